//! Monte Carlo estimators: event probabilities, the correlation length,
//! pivotality sums and parameter sweeps.
//!
//! Sample `i` of an estimate always draws from `stream.sample(i)`: first
//! the columns (annealed mode only), then one word per edge. All
//! accumulators are integers, so results do not depend on how rayon
//! splits the work.

use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::events::{annulus_circuit, EventSpec};
use crate::lattice::{annulus_edge_sets, ColumnSet, Edge, Rect, Site};
use crate::sampling::{
    sample_columns_with, sample_config_with, BondConfig, RandomStream, SamplerParams,
};

/// One-sided 95% normal quantile, used for the conservative threshold test.
pub const LOWER_BOUND_Z: f64 = 1.645;

/// Run `map` on every sample index in parallel and fold the results with
/// `merge`. On failure the error of the lowest failing index is returned,
/// wrapped with its stream key.
pub fn run_samples<A, M, Z, F>(
    stream: &RandomStream,
    n_samples: u64,
    map: M,
    zero: Z,
    merge: F,
) -> Result<A>
where
    A: Send,
    M: Fn(&RandomStream) -> Result<A> + Sync,
    Z: Fn() -> A + Sync + Send,
    F: Fn(A, A) -> A + Sync + Send,
{
    (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let s = stream.sample(i);
            map(&s).map_err(|e| (i, e))
        })
        .try_fold(&zero, |acc, r| r.map(|a| merge(acc, a)))
        .try_reduce(&zero, |a, b| Ok(merge(a, b)))
        .or_else(|_| {
            // Re-run sequentially to find the first failing index; the
            // parallel pass may have stopped at any of them.
            (0..n_samples).try_fold(zero(), |acc, i| {
                let s = stream.sample(i);
                map(&s).map(|a| merge(acc, a)).map_err(|e| (i, e))
            })
        })
        .map_err(|(index, source)| Error::Sample {
            index,
            stream: stream.sample(index).key(),
            source: Box::new(source),
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Proportion {
    pub successes: u64,
    pub samples: u64,
}

impl Proportion {
    pub fn p_hat(&self) -> f64 {
        if self.samples == 0 {
            return f64::NAN;
        }
        self.successes as f64 / self.samples as f64
    }

    /// Binomial standard error `sqrt(p(1-p)/N)`.
    pub fn stderr(&self) -> f64 {
        let p = self.p_hat();
        (p * (1.0 - p) / self.samples as f64).sqrt()
    }

    pub fn lower_bound(&self, z: f64) -> f64 {
        self.p_hat() - z * self.stderr()
    }
}

/// Where the enhanced columns come from.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnSource {
    /// A fresh `Lambda` per sample, drawn with density `rho` over the
    /// x-span of the event region.
    Annealed,
    /// One fixed `Lambda` for every sample.
    Quenched(ColumnSet),
}

impl ColumnSource {
    pub fn describe(&self) -> String {
        match self {
            ColumnSource::Annealed => "annealed".to_string(),
            ColumnSource::Quenched(c) => format!("quenched:{}..{}:{}", c.lo(), c.hi(), c.count()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRecord {
    pub event: EventSpec,
    pub params: SamplerParams,
    pub columns: String,
    pub n_samples: u64,
    pub successes: u64,
    pub p_hat: f64,
    pub stderr: f64,
    pub master_seed: u64,
    /// Key of the first sample's stream.
    pub stream_key: String,
    pub wall_time_ms: u64,
}

impl EstimateRecord {
    pub fn proportion(&self) -> Proportion {
        Proportion {
            successes: self.successes,
            samples: self.n_samples,
        }
    }
}

/// Draw the configuration for one sample of `event`.
fn draw(
    event_region: &Rect,
    params: &SamplerParams,
    source: &ColumnSource,
    stream: &RandomStream,
) -> Result<BondConfig> {
    let mut rng = stream.rng();
    match source {
        ColumnSource::Annealed => {
            let cols = sample_columns_with(
                &mut rng,
                params.rho,
                event_region.lo().x,
                event_region.hi().x,
            )?;
            sample_config_with(&mut rng, event_region, &cols, params)
        }
        ColumnSource::Quenched(cols) => sample_config_with(&mut rng, event_region, cols, params),
    }
}

pub fn estimate(
    event: &EventSpec,
    params: &SamplerParams,
    source: &ColumnSource,
    n_samples: u64,
    stream: &RandomStream,
) -> Result<EstimateRecord> {
    if n_samples == 0 {
        return Err(Error::InsufficientSamples { need: 1, got: 0 });
    }
    params.validate()?;
    let region = event.region()?;
    if let ColumnSource::Quenched(cols) = source {
        cols.require_cover(region.lo().x, region.hi().x)?;
    }
    let start = Instant::now();
    let successes = run_samples(
        stream,
        n_samples,
        |s| Ok(u64::from(event.occurs(&draw(&region, params, source, s)?)?)),
        || 0,
        |a, b| a + b,
    )?;
    let prop = Proportion {
        successes,
        samples: n_samples,
    };
    Ok(EstimateRecord {
        event: event.clone(),
        params: *params,
        columns: source.describe(),
        n_samples,
        successes,
        p_hat: prop.p_hat(),
        stderr: prop.stderr(),
        master_seed: stream.master_seed(),
        stream_key: stream.sample(0).key(),
        wall_time_ms: start.elapsed().as_millis() as u64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LengthOutcome {
    Found(u32),
    NotFound(u32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub n: u32,
    pub estimate: Proportion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationLengthResult {
    pub p: f64,
    pub epsilon: f64,
    pub length: LengthOutcome,
    /// Every scale that was evaluated, sorted by `n`.
    pub curve: Vec<CurvePoint>,
}

impl CorrelationLengthResult {
    pub fn found(&self) -> Option<u32> {
        match self.length {
            LengthOutcome::Found(n) => Some(n),
            LengthOutcome::NotFound(_) => None,
        }
    }
}

/// Smallest `n` at which the hard crossing of `[0,2n] x [0,n]` at
/// homogeneous parameter `p` has probability at least `1 - epsilon`,
/// declared when the lower confidence bound clears the threshold.
///
/// Scales are scanned on the grid `1, 2, 4, ...` up to `n_max`, then the
/// last bracket is bisected. Scale `n` uses the child stream `"n=<n>"`, so
/// each point of the curve is reproducible on its own.
pub fn correlation_length(
    p: f64,
    epsilon: f64,
    n_max: u32,
    samples_per_n: u64,
    stream: &RandomStream,
) -> Result<CorrelationLengthResult> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::param(
            "epsilon",
            format!("must lie in (0, 1/2), got {epsilon}"),
        ));
    }
    if n_max == 0 {
        return Err(Error::param("n_max", "must be at least 1"));
    }
    let params = SamplerParams::homogeneous(p)?;
    let mut curve: Vec<CurvePoint> = Vec::new();
    let mut eval = |n: u32| -> Result<bool> {
        let rec = estimate(
            &EventSpec::HardCrossing { n },
            &params,
            &ColumnSource::Annealed,
            samples_per_n,
            &stream.child(&format!("n={n}")),
        )?;
        let estimate = rec.proportion();
        curve.push(CurvePoint { n, estimate });
        Ok(estimate.lower_bound(LOWER_BOUND_Z) >= 1.0 - epsilon)
    };

    let mut below = 0u32;
    let mut above = None;
    let mut n = 1u32;
    loop {
        if eval(n)? {
            above = Some(n);
            break;
        }
        below = n;
        if n >= n_max {
            break;
        }
        n = n.saturating_mul(2).min(n_max);
    }
    let length = match above {
        None => LengthOutcome::NotFound(n_max),
        Some(mut hi) => {
            let mut lo = below;
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if eval(mid)? {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            LengthOutcome::Found(hi)
        }
    };
    curve.sort_by_key(|c| c.n);
    Ok(CorrelationLengthResult {
        p,
        epsilon,
        length,
        curve,
    })
}

/// Mean of a per-sample non-negative integer count, with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CountMean {
    pub samples: u64,
    pub total: u64,
    pub total_sq: u64,
}

impl CountMean {
    pub fn push(&mut self, x: u64) {
        self.samples += 1;
        self.total += x;
        self.total_sq += x * x;
    }

    pub fn merge(self, o: Self) -> Self {
        CountMean {
            samples: self.samples + o.samples,
            total: self.total + o.total,
            total_sq: self.total_sq + o.total_sq,
        }
    }

    pub fn mean(&self) -> f64 {
        self.total as f64 / self.samples as f64
    }

    pub fn stderr(&self) -> f64 {
        let n = self.samples as f64;
        if self.samples < 2 {
            return f64::NAN;
        }
        let m = self.mean();
        let var = ((self.total_sq as f64 - n * m * m) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RussoSums {
    pub n: u32,
    /// Annulus edges in `F` (enhanced) followed by those in `E \ F`.
    pub edges: Vec<Edge>,
    pub enhanced: usize,
    /// Per-edge pivotal counts, aligned with `edges`.
    pub pivotal_counts: Vec<u64>,
    /// Number of pivotal edges of `F` per sample.
    pub s_f: CountMean,
    /// Number of pivotal edges of `E \ F` per sample.
    pub s_not_f: CountMean,
    pub event: Proportion,
}

/// Expected number of pivotal annulus edges for the circuit event `A_n`,
/// split by class. By Russo's formula these are the partial derivatives of
/// `P(A_n)` in `p` and in `q`. Every annulus edge is tested on each sample.
pub fn russo_sums(
    columns: &ColumnSet,
    p: f64,
    q: f64,
    n: u32,
    n_samples: u64,
    stream: &RandomStream,
) -> Result<RussoSums> {
    if n < 2 {
        return Err(Error::param("n", format!("need n >= 2, got {n}")));
    }
    if n_samples == 0 {
        return Err(Error::InsufficientSamples { need: 1, got: 0 });
    }
    let params = SamplerParams::new(p, q, 0.0)?;
    let (all, f) = annulus_edge_sets(Site::ORIGIN, n, columns)?;
    let enhanced = f.len();
    let rest = all.into_iter().filter(|e| !f.contains(e));
    let edges: Vec<Edge> = f.iter().copied().chain(rest).collect();
    let region = Rect::ball(Site::ORIGIN, 2 * n - 1);
    let source = ColumnSource::Quenched(columns.clone());

    type Acc = (Vec<u64>, CountMean, CountMean, u64);
    let zero = || -> Acc {
        (
            vec![0; edges.len()],
            CountMean::default(),
            CountMean::default(),
            0,
        )
    };
    let (pivotal_counts, s_f, s_not_f, hits) = run_samples(
        stream,
        n_samples,
        |s| {
            let mut cfg = draw(&region, &params, &source, s)?;
            let base = annulus_circuit(&cfg, Site::ORIGIN, n)?;
            let mut acc = zero();
            let (mut in_f, mut out_f) = (0u64, 0u64);
            for (k, e) in edges.iter().enumerate() {
                let state = cfg.is_open(e);
                cfg.set(e, !state);
                let flipped = annulus_circuit(&cfg, Site::ORIGIN, n)?;
                cfg.set(e, state);
                if flipped != base {
                    acc.0[k] = 1;
                    if k < enhanced {
                        in_f += 1;
                    } else {
                        out_f += 1;
                    }
                }
            }
            acc.1.push(in_f);
            acc.2.push(out_f);
            acc.3 = u64::from(base);
            Ok(acc)
        },
        zero,
        |mut a, b| {
            a.0.iter_mut().zip(&b.0).for_each(|(x, y)| *x += y);
            (a.0, a.1.merge(b.1), a.2.merge(b.2), a.3 + b.3)
        },
    )?;
    Ok(RussoSums {
        n,
        edges,
        enhanced,
        pivotal_counts,
        s_f,
        s_not_f,
        event: Proportion {
            successes: hits,
            samples: n_samples,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    P,
    Q,
    Rho,
    Scale,
}

impl SweepAxis {
    fn apply(
        self,
        event: &EventSpec,
        params: &SamplerParams,
        value: f64,
    ) -> Result<(EventSpec, SamplerParams)> {
        let mut params = *params;
        let mut event = event.clone();
        match self {
            SweepAxis::P => params.p = value,
            SweepAxis::Q => params.q = value,
            SweepAxis::Rho => params.rho = value,
            SweepAxis::Scale => {
                if value < 1.0 || value.fract() != 0.0 || value > f64::from(u32::MAX) {
                    return Err(Error::param(
                        "n",
                        format!("scale grid value {value} is not a positive integer"),
                    ));
                }
                event = event.rescaled(value as u32)?;
            }
        }
        params.validate()?;
        Ok((event, params))
    }
}

/// One estimate per grid value, sorted by grid value. Every point uses the
/// same stream, so the samples are coupled across the grid (common random
/// numbers): along `p`, `q` and `rho` monotone events are pointwise
/// monotone.
pub fn sweep(
    axis: SweepAxis,
    grid: &[f64],
    event: &EventSpec,
    params: &SamplerParams,
    source: &ColumnSource,
    n_samples: u64,
    stream: &RandomStream,
) -> Result<Vec<EstimateRecord>> {
    if grid.is_empty() {
        return Err(Error::param("grid", "sweep grid is empty"));
    }
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let points = grid
        .iter()
        .map(|&v| axis.apply(event, params, v))
        .collect::<Result<Vec<_>>>()?;
    sweep_points(&points, source, n_samples, stream)
}

/// Estimates at explicit `(event, params)` points, in the given order.
pub fn sweep_points(
    points: &[(EventSpec, SamplerParams)],
    source: &ColumnSource,
    n_samples: u64,
    stream: &RandomStream,
) -> Result<Vec<EstimateRecord>> {
    points
        .iter()
        .map(|(e, p)| estimate(e, p, source, n_samples, stream))
        .collect()
}
