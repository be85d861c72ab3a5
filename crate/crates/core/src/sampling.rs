//! Keyed randomness and the two samplers of the model: the column set under
//! the product law of density `rho`, and bond configurations under the
//! column-enhanced product measure.
//!
//! # Stream keys
//!
//! Every random draw comes from a [`RandomStream`] identified by
//! `(master_seed, experiment, index)`:
//!
//! * `experiment` is the 64-bit FNV-1a hash of the experiment id string
//!   (see [`fnv1a64`]); [`RandomStream::child`] re-hashes it with a label to
//!   get a fresh key for a sub-experiment.
//! * `index` is the sample index.
//!
//! The generator is ChaCha8 seeded with the 32 bytes
//! `master_seed.to_le_bytes() ++ experiment.to_le_bytes() ++ [0; 16]`, with
//! the ChaCha stream id set to `index`. The draws of a sample therefore do
//! not depend on which worker runs it or in which order.
//!
//! Bernoulli draws use one `u32` word each: the outcome is `1` iff
//! `word < round(prob * 2^32)`. Using the same stream at two parameter
//! values couples the configurations monotonically.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{check_probability, Error, Result};
use crate::lattice::{ColumnSet, Edge, Rect};

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    bytes
        .iter()
        .fold(OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(PRIME))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RandomStream {
    master_seed: u64,
    experiment: u64,
    index: u64,
}

impl RandomStream {
    pub fn new(master_seed: u64, experiment_id: &str) -> Self {
        RandomStream {
            master_seed,
            experiment: fnv1a64(experiment_id.as_bytes()),
            index: 0,
        }
    }

    /// The same experiment key at sample `index`.
    pub fn sample(&self, index: u64) -> Self {
        RandomStream { index, ..*self }
    }

    /// A derived experiment key; the index is reset to zero.
    pub fn child(&self, label: &str) -> Self {
        let mut bytes = self.experiment.to_le_bytes().to_vec();
        bytes.extend_from_slice(label.as_bytes());
        RandomStream {
            master_seed: self.master_seed,
            experiment: fnv1a64(&bytes),
            index: 0,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn experiment(&self) -> u64 {
        self.experiment
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    /// `experiment/index` with the experiment hash in hex.
    pub fn key(&self) -> String {
        format!("{:016x}/{}", self.experiment, self.index)
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut seed = [0u8; 32];
        seed[..8].copy_from_slice(&self.master_seed.to_le_bytes());
        seed[8..16].copy_from_slice(&self.experiment.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(self.index);
        rng
    }
}

/// Threshold such that `word < threshold` has probability `prob` (to within
/// 2^-33) for a uniform `u32` word.
#[inline]
pub fn threshold(prob: f64) -> u64 {
    (prob * 4_294_967_296.0).round() as u64
}

#[inline]
pub fn bernoulli(rng: &mut impl RngCore, threshold: u64) -> bool {
    u64::from(rng.next_u32()) < threshold
}

/// Edge weights: `p` on enhanced vertical edges, `q` everywhere else, and
/// the column density `rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerParams {
    pub p: f64,
    pub q: f64,
    pub rho: f64,
}

impl SamplerParams {
    pub fn new(p: f64, q: f64, rho: f64) -> Result<Self> {
        check_probability("p", p)?;
        check_probability("q", q)?;
        check_probability("rho", rho)?;
        Ok(SamplerParams { p, q, rho })
    }

    /// Bernoulli bond percolation with parameter `p` everywhere.
    pub fn homogeneous(p: f64) -> Result<Self> {
        Self::new(p, p, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.p, self.q, self.rho).map(|_| ())
    }
}

/// One open/closed bit per edge of `region`, in canonical edge order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BondConfig {
    region: Rect,
    bits: Vec<bool>,
}

impl BondConfig {
    pub fn closed(region: Rect) -> Self {
        BondConfig {
            bits: vec![false; region.num_edges()],
            region,
        }
    }

    pub fn open(region: Rect) -> Self {
        BondConfig {
            bits: vec![true; region.num_edges()],
            region,
        }
    }

    pub fn from_fn(region: Rect, f: impl FnMut(Edge) -> bool) -> Self {
        BondConfig {
            bits: region.edges().map(f).collect(),
            region,
        }
    }

    pub fn from_bits(region: Rect, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != region.num_edges() {
            return Err(Error::param(
                "bits",
                format!(
                    "{} bits for {} edges of {region}",
                    bits.len(),
                    region.num_edges()
                ),
            ));
        }
        Ok(BondConfig { region, bits })
    }

    pub fn region(&self) -> &Rect {
        &self.region
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// State of `e`, or `None` if `e` is not inside the region.
    pub fn get(&self, e: &Edge) -> Option<bool> {
        self.region.edge_index(e).map(|i| self.bits[i])
    }

    /// # Panics
    /// If `e` is not an edge of the region.
    pub fn is_open(&self, e: &Edge) -> bool {
        self.get(e)
            .unwrap_or_else(|| panic!("edge {e} outside {}", self.region))
    }

    /// # Panics
    /// If `e` is not an edge of the region.
    pub fn set(&mut self, e: &Edge, open: bool) {
        let i = self
            .region
            .edge_index(e)
            .unwrap_or_else(|| panic!("edge {e} outside {}", self.region));
        self.bits[i] = open;
    }

    pub fn with_edge(&self, e: &Edge, open: bool) -> Self {
        let mut c = self.clone();
        c.set(e, open);
        c
    }

    /// East edge of the site at local column `c`, row `r`.
    #[inline]
    pub(crate) fn east_open(&self, c: usize, r: usize) -> bool {
        self.bits[self.region.east_index(c, r)]
    }

    #[inline]
    pub(crate) fn north_open(&self, c: usize, r: usize) -> bool {
        self.bits[self.region.north_index(c, r)]
    }

    pub fn count_open(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn restrict(&self, sub: &Rect) -> Result<Self> {
        if !self.region.contains_rect(sub) {
            return Err(Error::RegionTooSmall {
                have: self.region,
                need: *sub,
            });
        }
        Ok(BondConfig::from_fn(*sub, |e| self.is_open(&e)))
    }

    pub fn require_cover(&self, need: &Rect) -> Result<()> {
        if self.region.contains_rect(need) {
            Ok(())
        } else {
            Err(Error::RegionTooSmall {
                have: self.region,
                need: *need,
            })
        }
    }

    /// `'1'`/`'0'` per edge in canonical order.
    pub fn to_bit_string(&self) -> String {
        self.bits
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect()
    }

    pub fn from_bit_string(region: Rect, s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|ch| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::parse(
                    "bond configuration",
                    s,
                    format!("unexpected {other:?}"),
                )),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_bits(region, bits)
    }
}

pub fn sample_columns(rho: f64, lo: i64, hi: i64, stream: &RandomStream) -> Result<ColumnSet> {
    sample_columns_with(&mut stream.rng(), rho, lo, hi)
}

/// One word per column, west to east.
pub fn sample_columns_with(
    rng: &mut impl RngCore,
    rho: f64,
    lo: i64,
    hi: i64,
) -> Result<ColumnSet> {
    check_probability("rho", rho)?;
    let t = threshold(rho);
    Ok(ColumnSet::from_fn(lo, hi, |_| bernoulli(rng, t)))
}

pub fn sample_config(
    region: &Rect,
    columns: &ColumnSet,
    params: &SamplerParams,
    stream: &RandomStream,
) -> Result<BondConfig> {
    sample_config_with(&mut stream.rng(), region, columns, params)
}

/// One word per edge, in canonical order.
pub fn sample_config_with(
    rng: &mut impl RngCore,
    region: &Rect,
    columns: &ColumnSet,
    params: &SamplerParams,
) -> Result<BondConfig> {
    params.validate()?;
    columns.require_cover(region.lo().x, region.hi().x)?;
    let tq = threshold(params.q);
    let tp = threshold(params.p);
    let (w, h) = (region.width(), region.height());
    let vertical: Vec<u64> = (0..w)
        .map(|c| {
            let member = columns.members()[(region.lo().x + c as i64 - columns.lo()) as usize];
            if member {
                tp
            } else {
                tq
            }
        })
        .collect();
    let mut bits = Vec::with_capacity(region.num_edges());
    for r in 0..h {
        let top = r + 1 == h;
        for (c, &tv) in vertical.iter().enumerate() {
            if c + 1 < w {
                bits.push(bernoulli(rng, tq));
            }
            if !top {
                bits.push(bernoulli(rng, tv));
            }
        }
    }
    debug_assert_eq!(bits.len(), region.num_edges());
    Ok(BondConfig {
        region: *region,
        bits,
    })
}

/// Whether every subinterval of diameter `k` of `[lo, hi]` meets the column
/// set. Equivalently, no run of more than `k` consecutive non-members.
/// Intervals of diameter below `k` have no such subinterval and are
/// vacuously syndetic.
pub fn is_syndetic(columns: &ColumnSet, k: i64, lo: i64, hi: i64) -> Result<bool> {
    if k < 0 {
        return Err(Error::param("k", format!("{k} is negative")));
    }
    columns.require_cover(lo, hi)?;
    if hi < lo {
        return Ok(true);
    }
    let start = (lo - columns.lo()) as usize;
    let end = (hi - columns.lo()) as usize;
    let mut run = 0i64;
    for &m in &columns.members()[start..=end] {
        run = if m { 0 } else { run + 1 };
        if run > k {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Distance from `x` to the next column of the set strictly east of it, or
/// `None` when no member lies east of `x` within the stored range.
pub fn next_gap(columns: &ColumnSet, x: i64) -> Result<Option<i64>> {
    columns.contains(x)?;
    let start = (x - columns.lo()) as usize + 1;
    Ok(columns.members()[start..]
        .iter()
        .position(|&m| m)
        .map(|i| i as i64 + 1))
}
