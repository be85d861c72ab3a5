//! Block renormalization onto the oriented lattice.
//!
//! A site `v = (v1, v2)` with `v1 + v2` even stands for the box
//! `B_{2n-1}(2nv)`; `X(v)` records an open circuit in its annulus. All
//! blocks of a field are read off one shared configuration, so
//! neighbouring blocks overlap and the field is 1-dependent rather than
//! independent. `Y` is an independent Bernoulli(`1 - eta`) sprinkle and
//! `W = XY`. Column `i` is good when `Lambda` has no long gap in
//! `[2n(i-1), 2n(i+1)]`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::events::annulus_circuit;
use crate::lattice::{ColumnSet, Rect, Site};
use crate::nearcritical::{run_samples, Proportion};
use crate::sampling::{
    bernoulli, is_syndetic, sample_columns_with, sample_config_with, threshold, RandomStream,
    SamplerParams,
};

/// Gap length `ceil((2 / rho) ln(2n))` used to call a column good.
pub fn column_k(n: u32, rho: f64) -> Result<i64> {
    if n == 0 {
        return Err(Error::param("n", "block scale must be at least 1"));
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::param(
            "rho",
            format!("goodness needs rho in (0, 1], got {rho}"),
        ));
    }
    Ok(((2.0 / rho) * (2.0 * f64::from(n)).ln()).ceil() as i64)
}

/// The interval `[2n(i-1), 2n(i+1)]` that decides column `i`.
pub fn column_window(i: i64, n: u32) -> (i64, i64) {
    let m = 2 * i64::from(n);
    (m * (i - 1), m * (i + 1))
}

pub fn column_good(columns: &ColumnSet, i: i64, n: u32, rho: f64) -> Result<bool> {
    let k = column_k(n, rho)?;
    let (lo, hi) = column_window(i, n);
    is_syndetic(columns, k, lo, hi)
}

/// Goodness of columns `i_lo..=i_hi`. Neighbouring entries share half
/// their window.
pub fn goodness_field(
    columns: &ColumnSet,
    i_lo: i64,
    i_hi: i64,
    n: u32,
    rho: f64,
) -> Result<Vec<bool>> {
    (i_lo..=i_hi)
        .map(|i| column_good(columns, i, n, rho))
        .collect()
}

/// Frequency of bad column `0` over fresh draws of `Lambda` on its window.
pub fn bad_column_frequency(
    rho: f64,
    n: u32,
    draws: u64,
    stream: &RandomStream,
) -> Result<Proportion> {
    let k = column_k(n, rho)?;
    let (lo, hi) = column_window(0, n);
    let bad = run_samples(
        stream,
        draws,
        |s| {
            let cols = sample_columns_with(&mut s.rng(), rho, lo, hi)?;
            Ok(u64::from(!is_syndetic(&cols, k, lo, hi)?))
        },
        || 0,
        |a, b| a + b,
    )?;
    Ok(Proportion {
        successes: bad,
        samples: draws,
    })
}

/// A rectangle of oriented-lattice sites, keeping only `v1 + v2` even.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockWindow {
    pub n: u32,
    pub v1: (i64, i64),
    pub v2: (i64, i64),
}

impl BlockWindow {
    pub fn new(n: u32, v1: (i64, i64), v2: (i64, i64)) -> Result<Self> {
        if n < 2 {
            return Err(Error::param("n", format!("blocks need n >= 2, got {n}")));
        }
        let w = BlockWindow { n, v1, v2 };
        if v1.0 > v1.1 || v2.0 > v2.1 || w.sites().is_empty() {
            return Err(Error::param("window", "block window has no sites"));
        }
        Ok(w)
    }

    /// Sites in row-major order: `v2` outer, `v1` inner.
    pub fn sites(&self) -> Vec<(i64, i64)> {
        (self.v2.0..=self.v2.1)
            .flat_map(|b| (self.v1.0..=self.v1.1).map(move |a| (a, b)))
            .filter(|&(a, b)| (a + b).rem_euclid(2) == 0)
            .collect()
    }

    pub fn index_of(&self, v: (i64, i64)) -> Option<usize> {
        self.sites().iter().position(|&s| s == v)
    }

    pub fn center(&self, v: (i64, i64)) -> Site {
        let m = 2 * i64::from(self.n);
        Site::new(m * v.0, m * v.1)
    }

    /// Smallest rectangle containing every block box.
    pub fn bounding_rect(&self) -> Rect {
        let m = 2 * i64::from(self.n);
        let r = m - 1;
        Rect::new(
            Site::new(m * self.v1.0 - r, m * self.v2.0 - r),
            Site::new(m * self.v1.1 + r, m * self.v2.1 + r),
        )
        .expect("window is nonempty")
    }

    /// Column range `Lambda` must cover for the goodness of every column.
    pub fn column_span(&self) -> (i64, i64) {
        let m = 2 * i64::from(self.n);
        (m * (self.v1.0 - 1), m * (self.v1.1 + 1))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockField {
    pub window: BlockWindow,
    pub x: Vec<bool>,
    pub y: Vec<bool>,
    pub w: Vec<bool>,
    /// Goodness per column `v1.0..=v1.1`; absent when `rho = 0`.
    pub goodness: Option<Vec<bool>>,
}

fn bit(b: bool) -> char {
    if b {
        '1'
    } else {
        '0'
    }
}

impl BlockField {
    pub fn x_at(&self, v: (i64, i64)) -> Option<bool> {
        self.window.index_of(v).map(|k| self.x[k])
    }

    pub fn w_at(&self, v: (i64, i64)) -> Option<bool> {
        self.window.index_of(v).map(|k| self.w[k])
    }

    pub fn xi_at(&self, column: i64) -> Option<bool> {
        let g = self.goodness.as_ref()?;
        g.get(usize::try_from(column - self.window.v1.0).ok()?)
            .copied()
    }

    /// Site-list text format:
    ///
    /// ```text
    /// # blockfield v1 n=3 v1=-1..1 v2=-1..1
    /// # xi 011
    /// v1 v2 X Y W Xi
    /// -1 -1 1 1 1 0
    /// ```
    ///
    /// The `# xi` line lists goodness for every column of the window, which
    /// may include columns without sites. Both it and the per-site `Xi`
    /// entry are `-` when no goodness field was computed.
    pub fn to_text(&self) -> String {
        let wd = &self.window;
        let xi: String = match &self.goodness {
            Some(g) => g.iter().map(|&b| bit(b)).collect(),
            None => "-".to_string(),
        };
        let mut out = format!(
            "# blockfield v1 n={} v1={}..{} v2={}..{}\n# xi {xi}\nv1 v2 X Y W Xi\n",
            wd.n, wd.v1.0, wd.v1.1, wd.v2.0, wd.v2.1
        );
        for (k, v) in wd.sites().into_iter().enumerate() {
            let xi = self.xi_at(v.0).map_or('-', bit);
            let _ = writeln!(
                out,
                "{} {} {} {} {} {}",
                v.0,
                v.1,
                bit(self.x[k]),
                bit(self.y[k]),
                bit(self.w[k]),
                xi
            );
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad =
            |reason: &str| Error::parse("block field", text.lines().next().unwrap_or(""), reason);
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty input"))?;
        let fields = header
            .strip_prefix("# blockfield v1 ")
            .ok_or_else(|| bad("missing header"))?;
        let (mut n, mut v1, mut v2) = (None, None, None);
        let range = |s: &str| -> Option<(i64, i64)> {
            let (a, b) = s.split_once("..")?;
            Some((a.parse().ok()?, b.parse().ok()?))
        };
        for kv in fields.split_whitespace() {
            match kv.split_once('=') {
                Some(("n", s)) => n = s.parse::<u32>().ok(),
                Some(("v1", s)) => v1 = range(s),
                Some(("v2", s)) => v2 = range(s),
                _ => return Err(bad("unknown header field")),
            }
        }
        let window = BlockWindow::new(
            n.ok_or_else(|| bad("bad n"))?,
            v1.ok_or_else(|| bad("bad v1 range"))?,
            v2.ok_or_else(|| bad("bad v2 range"))?,
        )?;
        let flag = |s: char| match s {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(bad("bit must be 0 or 1")),
        };
        let xi_line = lines
            .next()
            .and_then(|l| l.strip_prefix("# xi "))
            .ok_or_else(|| bad("missing xi line"))?;
        let goodness = match xi_line {
            "-" => None,
            bits => Some(bits.chars().map(flag).collect::<Result<Vec<_>>>()?),
        };
        let cols = (window.v1.1 - window.v1.0 + 1) as usize;
        if goodness.as_ref().is_some_and(|g| g.len() != cols) {
            return Err(bad("xi line has the wrong length"));
        }
        if lines.next() != Some("v1 v2 X Y W Xi") {
            return Err(bad("missing column line"));
        }
        let sites = window.sites();
        let (mut x, mut y, mut w) = (vec![], vec![], vec![]);
        for (k, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 6 || k >= sites.len() {
                return Err(bad("malformed site line"));
            }
            let v = (
                parts[0].parse::<i64>().map_err(|_| bad("bad v1"))?,
                parts[1].parse::<i64>().map_err(|_| bad("bad v2"))?,
            );
            if v != sites[k] {
                return Err(bad("sites out of order"));
            }
            let one = |s: &str| {
                let mut c = s.chars();
                match (c.next(), c.next()) {
                    (Some(ch), None) => flag(ch),
                    _ => Err(bad("bit must be 0 or 1")),
                }
            };
            x.push(one(parts[2])?);
            y.push(one(parts[3])?);
            w.push(one(parts[4])?);
            let expected_xi = goodness.as_ref().map(|g| g[(v.0 - window.v1.0) as usize]);
            let got_xi = if parts[5] == "-" {
                None
            } else {
                Some(one(parts[5])?)
            };
            if got_xi != expected_xi {
                return Err(bad("site Xi disagrees with the xi line"));
            }
        }
        if x.len() != sites.len() {
            return Err(bad("wrong number of sites"));
        }
        Ok(BlockField {
            window,
            x,
            y,
            w,
            goodness,
        })
    }
}

/// One field sample: a configuration over the window's bounding rectangle,
/// then one sprinkle word per site in window order from the same stream.
pub fn block_field(
    columns: &ColumnSet,
    window: &BlockWindow,
    params: &SamplerParams,
    eta: f64,
    stream: &RandomStream,
) -> Result<BlockField> {
    if !(eta > 0.0 && eta <= 0.5) {
        return Err(Error::param(
            "eta",
            format!("must lie in (0, 1/2], got {eta}"),
        ));
    }
    let (c_lo, c_hi) = window.column_span();
    if params.rho > 0.0 {
        columns.require_cover(c_lo, c_hi)?;
    }
    let mut rng = stream.rng();
    let config = sample_config_with(&mut rng, &window.bounding_rect(), columns, params)?;
    let sites = window.sites();
    let x = sites
        .iter()
        .map(|&v| annulus_circuit(&config, window.center(v), window.n))
        .collect::<Result<Vec<_>>>()?;
    let ty = threshold(1.0 - eta);
    let y: Vec<bool> = sites.iter().map(|_| bernoulli(&mut rng, ty)).collect();
    let w = x.iter().zip(&y).map(|(a, b)| a & b).collect();
    let goodness = if params.rho > 0.0 {
        Some(goodness_field(
            columns,
            window.v1.0,
            window.v1.1,
            window.n,
            params.rho,
        )?)
    } else {
        None
    };
    Ok(BlockField {
        window: *window,
        x,
        y,
        w,
        goodness,
    })
}

pub const MIN_DEPENDENCE_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct PairCorrelation {
    pub v: (i64, i64),
    pub w: (i64, i64),
    pub dist2: i64,
    /// `None` when either indicator is constant over the samples.
    pub r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DependenceReport {
    pub samples: usize,
    pub pairs: Vec<PairCorrelation>,
    /// Largest `|r|` over pairs at Euclidean distance above 2.
    pub max_far_abs: Option<f64>,
}

/// Pearson correlations of `X` between every pair of window sites.
pub fn one_dependence_check(fields: &[BlockField]) -> Result<DependenceReport> {
    if fields.len() < MIN_DEPENDENCE_SAMPLES {
        return Err(Error::InsufficientSamples {
            need: MIN_DEPENDENCE_SAMPLES as u64,
            got: fields.len() as u64,
        });
    }
    let window = fields[0].window;
    if fields.iter().any(|f| f.window != window) {
        return Err(Error::param("fields", "all fields must share one window"));
    }
    let sites = window.sites();
    let m = sites.len();
    let n = fields.len() as f64;
    let mut ones = vec![0u64; m];
    let mut both = vec![0u64; m * m];
    for f in fields {
        for a in 0..m {
            if f.x[a] {
                ones[a] += 1;
                for b in a + 1..m {
                    both[a * m + b] += u64::from(f.x[b]);
                }
            }
        }
    }
    let mut pairs = Vec::new();
    let mut max_far_abs: Option<f64> = None;
    for a in 0..m {
        for b in a + 1..m {
            let (pa, pb) = (ones[a] as f64 / n, ones[b] as f64 / n);
            let pab = both[a * m + b] as f64 / n;
            let denom = (pa * (1.0 - pa) * pb * (1.0 - pb)).sqrt();
            let r = (denom > 0.0).then(|| (pab - pa * pb) / denom);
            let (v, w) = (sites[a], sites[b]);
            let dist2 = (v.0 - w.0).pow(2) + (v.1 - w.1).pow(2);
            if dist2 > 4 {
                if let Some(r) = r {
                    max_far_abs = Some(max_far_abs.map_or(r.abs(), |x: f64| x.max(r.abs())));
                }
            }
            pairs.push(PairCorrelation { v, w, dist2, r });
        }
    }
    Ok(DependenceReport {
        samples: fields.len(),
        pairs,
        max_far_abs,
    })
}

/// Neighbours of the origin on the oriented lattice, in pattern-bit order.
pub const NEIGHBOURS: [(i64, i64); 4] = [(-1, -1), (-1, 1), (1, -1), (1, 1)];

pub const MIN_PATTERN_OCCURRENCES: u64 = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct PatternRow {
    /// Bit `k` is `W` at `NEIGHBOURS[k]`.
    pub pattern: u8,
    pub occurrences: u64,
    pub w0_hits: u64,
    pub p_hat: f64,
    pub stderr: f64,
    pub bound: f64,
    pub checked: bool,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalReport {
    pub n: u32,
    pub eta: f64,
    pub w0: Proportion,
    pub patterns: Vec<PatternRow>,
}

impl ConditionalReport {
    /// Every pattern with enough occurrences satisfies the bound.
    pub fn all_hold(&self) -> bool {
        self.patterns.iter().all(|r| !r.checked || r.holds)
    }

    /// Some patterns were too rare to check.
    pub fn partial(&self) -> bool {
        self.patterns.iter().any(|r| !r.checked)
    }
}

/// `P(W(0) = 1 | W on the four neighbours)` against
/// `eta^4 P(W(0) = 1)`, with `3 sigma` slack on each conditional estimate.
pub fn conditional_bound_check(
    columns: &ColumnSet,
    params: &SamplerParams,
    n: u32,
    eta: f64,
    samples: u64,
    stream: &RandomStream,
) -> Result<ConditionalReport> {
    let window = BlockWindow::new(n, (-1, 1), (-1, 1))?;
    let origin = window.index_of((0, 0)).expect("origin in window");
    let nb: Vec<usize> = NEIGHBOURS
        .iter()
        .map(|&v| window.index_of(v).expect("neighbour in window"))
        .collect();
    let (occ, hits) = run_samples(
        stream,
        samples,
        |s| {
            let f = block_field(columns, &window, params, eta, s)?;
            let pat = nb
                .iter()
                .enumerate()
                .fold(0usize, |acc, (k, &i)| acc | usize::from(f.w[i]) << k);
            let mut occ = [0u64; 16];
            let mut hits = [0u64; 16];
            occ[pat] = 1;
            hits[pat] = u64::from(f.w[origin]);
            Ok((occ, hits))
        },
        || ([0u64; 16], [0u64; 16]),
        |mut a, b| {
            for k in 0..16 {
                a.0[k] += b.0[k];
                a.1[k] += b.1[k];
            }
            a
        },
    )?;
    let w0 = Proportion {
        successes: hits.iter().sum(),
        samples,
    };
    let target = eta.powi(4) * w0.p_hat();
    let patterns = (0..16)
        .map(|k| {
            let prop = Proportion {
                successes: hits[k],
                samples: occ[k],
            };
            let checked = occ[k] >= MIN_PATTERN_OCCURRENCES;
            let (p_hat, stderr) = if occ[k] > 0 {
                (prop.p_hat(), prop.stderr())
            } else {
                (f64::NAN, f64::NAN)
            };
            let bound = target - 3.0 * stderr;
            PatternRow {
                pattern: k as u8,
                occurrences: occ[k],
                w0_hits: hits[k],
                p_hat,
                stderr,
                bound,
                checked,
                holds: checked && p_hat >= bound,
            }
        })
        .collect();
    Ok(ConditionalReport {
        n,
        eta,
        w0,
        patterns,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremParameters {
    pub eta: f64,
    pub p_b: f64,
    pub p_g: f64,
}

/// Sprinkle and column parameters fed to the oriented model:
/// `eta = (1 - pc) / 3`, `p_G = 1 - 2 eta` and
/// `p_B = eta^4 (1 - eta) inf_n P(A_n)`.
pub fn theorem_parameters(pc_oriented: f64, inf_lower_bound: f64) -> Result<TheoremParameters> {
    let check = |name: &'static str, v: f64| {
        if v > 0.0 && v < 1.0 {
            Ok(())
        } else {
            Err(Error::param(name, format!("must lie in (0, 1), got {v}")))
        }
    };
    check("pc_oriented", pc_oriented)?;
    check("inf_lower_bound", inf_lower_bound)?;
    let eta = (1.0 - pc_oriented) / 3.0;
    Ok(TheoremParameters {
        eta,
        p_g: 1.0 - 2.0 * eta,
        p_b: eta.powi(4) * (1.0 - eta) * inf_lower_bound,
    })
}
