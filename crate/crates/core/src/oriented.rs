//! Oriented site percolation with good and bad columns.
//!
//! Sites are `(i, j)` with `i + j` even; `i` is the column, read as depth,
//! and `(i, j)` points to `(i + 1, j - 1)` and `(i + 1, j + 1)`. Column `i`
//! is good with probability `rho_prime`; its sites are occupied with
//! probability `p_g` if it is good and `p_b` otherwise.
//!
//! Randomness: column classes come from the child stream `"columns"` in
//! column order. Site `(i, j)` reads word `i * S + slot(i, j)` of the
//! sample stream, where `S` bounds the number of sites per column. Any
//! window and the lazy survival walk therefore see the same occupation
//! for the same site, and different parameters are coupled.

use rand_chacha::ChaCha8Rng;

use crate::error::{check_probability, Error, Result};
use crate::nearcritical::{run_samples, Proportion};
use crate::renorm::BlockField;
use crate::sampling::{bernoulli, threshold, RandomStream};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedParams {
    pub rho_prime: f64,
    pub p_g: f64,
    pub p_b: f64,
}

impl OrientedParams {
    pub fn new(rho_prime: f64, p_g: f64, p_b: f64) -> Result<Self> {
        check_probability("rho_prime", rho_prime)?;
        check_probability("p_g", p_g)?;
        check_probability("p_b", p_b)?;
        Ok(OrientedParams {
            rho_prime,
            p_g,
            p_b,
        })
    }

    /// Every column good, occupation `p` everywhere.
    pub fn homogeneous(p: f64) -> Result<Self> {
        Self::new(1.0, p, p)
    }
}

/// Columns `0..=depth` and rows `rows.0..=rows.1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrientedWindow {
    pub depth: u32,
    pub rows: (i64, i64),
}

impl OrientedWindow {
    pub fn new(depth: u32, rows: (i64, i64)) -> Result<Self> {
        if rows.0 > rows.1 || (depth == 0 && rows.0 == rows.1 && rows.0.rem_euclid(2) != 0) {
            return Err(Error::param("window", "oriented window has no sites"));
        }
        Ok(OrientedWindow { depth, rows })
    }

    /// The cone of the origin: rows `-depth..=depth`.
    pub fn cone(depth: u32) -> Self {
        OrientedWindow {
            depth,
            rows: (-i64::from(depth), i64::from(depth)),
        }
    }

    /// Word slots reserved per column.
    pub fn stride(&self) -> u64 {
        ((self.rows.1 - self.rows.0) / 2 + 1) as u64
    }

    /// Lowest row of column `i` with the right parity.
    pub fn first_row(&self, i: u32) -> i64 {
        let lo = self.rows.0;
        if (i64::from(i) + lo).rem_euclid(2) == 0 {
            lo
        } else {
            lo + 1
        }
    }

    pub fn contains(&self, i: u32, j: i64) -> bool {
        i <= self.depth
            && (self.rows.0..=self.rows.1).contains(&j)
            && (i64::from(i) + j).rem_euclid(2) == 0
    }

    fn slot(&self, i: u32, j: i64) -> u64 {
        ((j - self.first_row(i)) / 2) as u64
    }

    fn word(&self, i: u32, j: i64) -> u64 {
        u64::from(i) * self.stride() + self.slot(i, j)
    }

    fn rows_of(&self, i: u32) -> impl Iterator<Item = i64> {
        (self.first_row(i)..=self.rows.1).step_by(2)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientedConfig {
    pub window: OrientedWindow,
    /// Per column, occupation of `rows_of(i)` from the bottom.
    occupied: Vec<Vec<bool>>,
    pub good: Vec<bool>,
}

impl OrientedConfig {
    pub fn from_fn(
        window: OrientedWindow,
        good: Vec<bool>,
        mut f: impl FnMut(u32, i64) -> bool,
    ) -> Result<Self> {
        if good.len() != window.depth as usize + 1 {
            return Err(Error::param("good", "one goodness bit per column"));
        }
        let occupied = (0..=window.depth)
            .map(|i| window.rows_of(i).map(|j| f(i, j)).collect())
            .collect();
        Ok(OrientedConfig {
            window,
            occupied,
            good,
        })
    }

    /// Occupation of `(i, j)`; sites outside the window are vacant.
    pub fn is_occupied(&self, i: u32, j: i64) -> bool {
        self.window.contains(i, j) && self.occupied[i as usize][self.window.slot(i, j) as usize]
    }

    /// `W` of a block field as an oriented configuration. Block site
    /// `(v1, v2)` becomes `(v1 - a, v2 - a)` with `a` the lowest `v1`, which
    /// keeps the parity. Columns without a goodness field count as good.
    pub fn from_block_field(field: &BlockField) -> Result<Self> {
        let a = field.window.v1.0;
        let depth =
            u32::try_from(field.window.v1.1 - a).map_err(|_| Error::param("window", "too wide"))?;
        let window = OrientedWindow::new(depth, (field.window.v2.0 - a, field.window.v2.1 - a))?;
        let good = field
            .goodness
            .clone()
            .unwrap_or_else(|| vec![true; depth as usize + 1]);
        Self::from_fn(window, good, |i, j| {
            field.w_at((i64::from(i) + a, j + a)).unwrap_or(false)
        })
    }
}

fn column_classes(params: &OrientedParams, depth: u32, stream: &RandomStream) -> Vec<bool> {
    let mut rng = stream.child("columns").sample(stream.index()).rng();
    let t = threshold(params.rho_prime);
    (0..=depth).map(|_| bernoulli(&mut rng, t)).collect()
}

fn column_threshold(params: &OrientedParams, good: bool) -> u64 {
    threshold(if good { params.p_g } else { params.p_b })
}

fn read_words(
    rng: &mut ChaCha8Rng,
    window: &OrientedWindow,
    i: u32,
    j_lo: i64,
    count: usize,
    t: u64,
) -> Vec<bool> {
    rng.set_word_pos(u128::from(window.word(i, j_lo)));
    (0..count).map(|_| bernoulli(rng, t)).collect()
}

pub fn sample_oriented(
    params: &OrientedParams,
    window: &OrientedWindow,
    stream: &RandomStream,
) -> Result<OrientedConfig> {
    OrientedParams::new(params.rho_prime, params.p_g, params.p_b)?;
    let good = column_classes(params, window.depth, stream);
    let mut rng = stream.rng();
    let occupied = (0..=window.depth)
        .map(|i| {
            let count = window.rows_of(i).count();
            let t = column_threshold(params, good[i as usize]);
            read_words(&mut rng, window, i, window.first_row(i), count, t)
        })
        .collect();
    Ok(OrientedConfig {
        window: *window,
        occupied,
        good,
    })
}

/// Sites reachable from `sources` (rows of column 0) by occupied oriented
/// paths, column by column. Vacant sources are dropped. Entry `i` lists
/// the reachable rows of column `i` in increasing order; it is empty once
/// the front dies.
pub fn reachable_front(config: &OrientedConfig, sources: &[i64]) -> Vec<Vec<i64>> {
    let mut front: Vec<i64> = sources
        .iter()
        .copied()
        .filter(|&j| config.is_occupied(0, j))
        .collect();
    front.sort_unstable();
    front.dedup();
    let mut out = Vec::with_capacity(config.window.depth as usize + 1);
    out.push(front.clone());
    for i in 1..=config.window.depth {
        front = step(&front, |j| config.is_occupied(i, j));
        out.push(front.clone());
    }
    out
}

/// Next front from a sorted front: `j` is reached iff it is occupied and
/// `j - 1` or `j + 1` was reached.
fn step(front: &[i64], occupied: impl Fn(i64) -> bool) -> Vec<i64> {
    let mut next = Vec::with_capacity(front.len() + 1);
    for &j in front {
        for c in [j - 1, j + 1] {
            if next.last().is_some_and(|&l| l >= c) {
                continue;
            }
            if occupied(c) {
                next.push(c);
            }
        }
    }
    next
}

/// Last depth at which the front from the origin is alive, or `None` if
/// the origin is vacant. Reads only the words of the front's span.
pub fn survival_depth(params: &OrientedParams, depth: u32, stream: &RandomStream) -> Option<u32> {
    let window = OrientedWindow::cone(depth);
    let good = column_classes(params, depth, stream);
    let mut rng = stream.rng();
    let t0 = column_threshold(params, good[0]);
    if !read_words(&mut rng, &window, 0, 0, 1, t0)[0] {
        return None;
    }
    let mut front = vec![0i64];
    for i in 1..=depth {
        let lo = front[0] - 1;
        let hi = front[front.len() - 1] + 1;
        let count = ((hi - lo) / 2 + 1) as usize;
        let t = column_threshold(params, good[i as usize]);
        let bits = read_words(&mut rng, &window, i, lo, count, t);
        front = step(&front, |j| bits[((j - lo) / 2) as usize]);
        if front.is_empty() {
            return Some(i - 1);
        }
    }
    Some(depth)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalPoint {
    pub depth: u32,
    pub survived: Proportion,
}

/// Frequency with which the front from the origin is still alive at each
/// depth of `depths` (strictly increasing).
pub fn survival_curve(
    params: &OrientedParams,
    depths: &[u32],
    n_samples: u64,
    stream: &RandomStream,
) -> Result<Vec<SurvivalPoint>> {
    OrientedParams::new(params.rho_prime, params.p_g, params.p_b)?;
    if depths.is_empty() || depths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param(
            "depths",
            "must be nonempty and strictly increasing",
        ));
    }
    let max = *depths.last().expect("nonempty");
    let counts = run_samples(
        stream,
        n_samples,
        |s| {
            let last = survival_depth(params, max, s);
            let alive: Vec<bool> = depths
                .iter()
                .map(|&d| last.is_some_and(|l| d <= l))
                .collect();
            assert!(
                alive.windows(2).all(|w| w[0] >= w[1]),
                "survival increased with depth"
            );
            Ok(alive.into_iter().map(u64::from).collect::<Vec<_>>())
        },
        || vec![0u64; depths.len()],
        |mut a, b| {
            a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
            a
        },
    )?;
    Ok(depths
        .iter()
        .zip(counts)
        .map(|(&depth, successes)| SurvivalPoint {
            depth,
            survived: Proportion {
                successes,
                samples: n_samples,
            },
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream() -> RandomStream {
        RandomStream::new(11, "oriented-unit")
    }

    #[test]
    fn window_slots() {
        let w = OrientedWindow::new(3, (-3, 3)).unwrap();
        assert_eq!(w.stride(), 4);
        assert_eq!(w.rows_of(0).collect::<Vec<_>>(), vec![-2, 0, 2]);
        assert_eq!(w.rows_of(1).collect::<Vec<_>>(), vec![-3, -1, 1, 3]);
        assert_eq!(w.word(1, -1), 5);
        assert!(!w.contains(0, 1));
        assert!(OrientedWindow::new(0, (1, 1)).is_err());
    }

    #[test]
    fn all_occupied_front_is_the_cone() {
        let p = OrientedParams::homogeneous(1.0).unwrap();
        let cfg = sample_oriented(&p, &OrientedWindow::cone(4), &stream()).unwrap();
        let fronts = reachable_front(&cfg, &[0]);
        for (i, f) in fronts.iter().enumerate() {
            let i = i as i64;
            assert_eq!(*f, (-i..=i).step_by(2).collect::<Vec<_>>());
        }
        assert_eq!(survival_depth(&p, 30, &stream()), Some(30));
    }

    #[test]
    fn vacant_origin() {
        let p = OrientedParams::homogeneous(0.0).unwrap();
        let cfg = sample_oriented(&p, &OrientedWindow::cone(2), &stream()).unwrap();
        assert!(reachable_front(&cfg, &[0]).iter().all(|f| f.is_empty()));
        assert_eq!(survival_depth(&p, 5, &stream()), None);
    }

    #[test]
    fn hand_traced_config() {
        // Occupied sites, by column:
        //   0: 0        1: -1, 1     2: -2, 2     3: -1, 3     4: 0, 4
        let occ = [
            (0, 0),
            (1, -1),
            (1, 1),
            (2, -2),
            (2, 2),
            (3, -1),
            (3, 3),
            (4, 0),
            (4, 4),
        ];
        let window = OrientedWindow::cone(4);
        let cfg =
            OrientedConfig::from_fn(window, vec![true; 5], |i, j| occ.contains(&(i as i64, j)))
                .unwrap();
        let f = reachable_front(&cfg, &[0]);
        assert_eq!(
            f,
            vec![vec![0], vec![-1, 1], vec![-2, 2], vec![-1, 3], vec![0, 4]]
        );
        let cfg = OrientedConfig::from_fn(window, vec![true; 5], |i, j| {
            occ.contains(&(i as i64, j)) && (i, j) != (2, 2)
        })
        .unwrap();
        assert_eq!(reachable_front(&cfg, &[0])[4], vec![0]);
    }

    #[test]
    fn lazy_walk_matches_full_config() {
        let p = OrientedParams::new(0.6, 0.8, 0.4).unwrap();
        for k in 0..40 {
            let s = stream().sample(k);
            let cfg = sample_oriented(&p, &OrientedWindow::cone(25), &s).unwrap();
            let fronts = reachable_front(&cfg, &[0]);
            let last = fronts.iter().rposition(|f| !f.is_empty()).map(|d| d as u32);
            assert_eq!(survival_depth(&p, 25, &s), last);
        }
    }

    #[test]
    fn curve_extremes_and_validation() {
        let one = OrientedParams::homogeneous(1.0).unwrap();
        let c = survival_curve(&one, &[0, 5, 10], 20, &stream()).unwrap();
        assert!(c.iter().all(|pt| pt.survived.successes == 20));
        let zero = OrientedParams::homogeneous(0.0).unwrap();
        let c = survival_curve(&zero, &[0, 1], 20, &stream()).unwrap();
        assert!(c.iter().all(|pt| pt.survived.successes == 0));
        assert!(survival_curve(&one, &[3, 3], 5, &stream()).is_err());
        assert!(survival_curve(&one, &[], 5, &stream()).is_err());
    }

    #[test]
    fn all_good_columns_at_rho_one() {
        let p = OrientedParams::new(1.0, 0.5, 0.1).unwrap();
        let cfg = sample_oriented(&p, &OrientedWindow::cone(50), &stream()).unwrap();
        assert!(cfg.good.iter().all(|&g| g));
    }
}
