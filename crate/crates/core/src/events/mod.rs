//! Event detectors: rectangle crossings, annulus circuits, arm events and
//! pivotality.

mod annulus;
mod spec;

pub use annulus::{annulus_circuit, annulus_circuit_oracle, annulus_circuit_with, DualConvention};
pub use spec::{EventSpec, EVENT_SPEC_VERSION};

use std::collections::VecDeque;

use crate::connectivity::{two_vertex_disjoint_paths, ClusterLabeling};
use crate::error::{Error, Result};
use crate::lattice::{Edge, Rect, Site};
use crate::sampling::BondConfig;

/// Crossing direction: `Horizontal` joins the west and east sides,
/// `Vertical` the south and north sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    Horizontal,
    Vertical,
}

/// Open crossing of `rect` using only sites of `rect`.
pub fn rect_crossing(config: &BondConfig, rect: &Rect, axis: Axis) -> Result<bool> {
    let labels = ClusterLabeling::build_in(config, rect)?;
    match axis {
        Axis::Horizontal => labels.connects(rect.column(rect.lo().x), rect.column(rect.hi().x)),
        Axis::Vertical => labels.connects(rect.row(rect.lo().y), rect.row(rect.hi().y)),
    }
}

/// Hard-way crossing of the `2n x n` rectangle with south-west corner
/// `corner`, along `axis`.
///
/// For `Axis::Horizontal` this is `{x0} x [y0, y0+n] <-> {x0+2n} x [y0, y0+n]`
/// through `[x0, x0+2n] x [y0+1, y0+n-1]`; the vertical variant is the
/// same event with the coordinates swapped.
pub fn hard_crossing_at(config: &BondConfig, corner: Site, n: u32, axis: Axis) -> Result<bool> {
    if n == 0 {
        return Err(Error::param("n", "hard crossing needs n >= 1"));
    }
    let n = i64::from(n);
    let (long, short) = match axis {
        Axis::Horizontal => ((2 * n, n), (1, n - 1)),
        Axis::Vertical => ((n, 2 * n), (n - 1, 1)),
    };
    let outer = Rect::new(corner, corner.offset(long.0, long.1))?;
    config.require_cover(&outer)?;
    // The corridor drops the two long sides; for n = 1 it is empty.
    if n < 2 {
        return Ok(false);
    }
    let corridor = match axis {
        Axis::Horizontal => Rect::new(corner.offset(0, short.0), corner.offset(long.0, short.1))?,
        Axis::Vertical => Rect::new(corner.offset(short.1, 0), corner.offset(short.0, long.1))?,
    };
    rect_crossing(config, &corridor, axis)
}

/// Hard-way crossing of `[0, 2n] x [0, n]`, the event defining the
/// correlation length.
pub fn hard_crossing(config: &BondConfig, n: u32) -> Result<bool> {
    hard_crossing_at(config, Site::ORIGIN, n, Axis::Horizontal)
}

fn arm_labels(config: &BondConfig, n: u32) -> Result<(ClusterLabeling, Vec<Site>)> {
    if n == 0 {
        return Err(Error::param("n", "arm events need n >= 1"));
    }
    let bn = Rect::ball(Site::ORIGIN, n);
    Ok((ClusterLabeling::build_in(config, &bn)?, bn.boundary()))
}

/// `0 <-> boundary of B_n`. A path to the boundary can be stopped at its
/// first boundary site, so connections inside `B_n` suffice.
pub fn one_arm(config: &BondConfig, n: u32) -> Result<bool> {
    let (labels, boundary) = arm_labels(config, n)?;
    labels.reaches_set(Site::ORIGIN, &boundary)
}

/// The fixed neighbour of the origin in the four-arm event.
pub const FOUR_ARM_NEIGHBOUR: Site = Site::new(1, 0);

/// `{0 <-> dB_n} and {x <-> dB_n} and not {0 <-> x in B_n}` with `x = (1, 0)`.
pub fn four_arm(config: &BondConfig, n: u32) -> Result<bool> {
    let (labels, boundary) = arm_labels(config, n)?;
    let x = FOUR_ARM_NEIGHBOUR;
    Ok(!labels.connected(Site::ORIGIN, x)?
        && labels.reaches_set(Site::ORIGIN, &boundary)?
        && labels.reaches_set(x, &boundary)?)
}

/// Four arms plus two open paths from the origin to `dB_n` meeting only at
/// the origin.
pub fn five_arm(config: &BondConfig, n: u32) -> Result<bool> {
    if !four_arm(config, n)? {
        return Ok(false);
    }
    let bn = Rect::ball(Site::ORIGIN, n);
    let inner = config.restrict(&bn)?;
    two_vertex_disjoint_paths(&inner, Site::ORIGIN, &bn.boundary())
}

/// The 32 hard-way crossings, for `i, j` in `{-2, -1, 0, 1}`, whose joint
/// occurrence forces an open circuit around `B_n`: horizontal crossings of
/// `[in, (i+2)n] x [jn, (j+1)n]` and vertical crossings of
/// `[in, (i+1)n] x [jn, (j+2)n]`. The configuration must cover
/// `[-2n, 3n]^2`.
pub fn gluing_crossings(config: &BondConfig, n: u32) -> Result<bool> {
    let m = i64::from(n);
    config.require_cover(&gluing_region(n))?;
    for i in -2..=1i64 {
        for j in -2..=1i64 {
            let corner = Site::new(i * m, j * m);
            if !hard_crossing_at(config, corner, n, Axis::Horizontal)?
                || !hard_crossing_at(config, corner, n, Axis::Vertical)?
            {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

pub fn gluing_region(n: u32) -> Rect {
    let m = i64::from(n);
    Rect::new(Site::new(-2 * m, -2 * m), Site::new(3 * m, 3 * m)).expect("ordered corners")
}

/// Whether flipping `edge` changes the outcome of `spec`.
pub fn is_pivotal(config: &BondConfig, edge: &Edge, spec: &EventSpec) -> Result<bool> {
    let region = spec.region()?;
    if !region.contains_edge(edge) {
        return Err(Error::param(
            "edge",
            format!("edge {edge} is outside the event region {region}"),
        ));
    }
    config.require_cover(&region)?;
    let open = spec.occurs(&config.with_edge(edge, true))?;
    let closed = spec.occurs(&config.with_edge(edge, false))?;
    Ok(open != closed)
}

/// Dual blocking crossing: for `Axis::Horizontal`, whether a path of
/// closed-edge duals joins the dual row above `rect` to the dual row below
/// it while crossing only edges of `rect`. Exactly one of this and the
/// primal crossing occurs.
pub fn dual_blocking_crossing(config: &BondConfig, rect: &Rect, axis: Axis) -> Result<bool> {
    config.require_cover(rect)?;
    match axis {
        Axis::Horizontal => Ok(dual_top_bottom(config, rect)),
        Axis::Vertical => {
            let t = transpose(&config.restrict(rect)?);
            let tr = *t.region();
            Ok(dual_top_bottom(&t, &tr))
        }
    }
}

/// Breadth-first search over dual sites `(i + 1/2, j + 1/2)` with
/// `i in [lo.x, hi.x - 1]`, `j in [lo.y - 1, hi.y]`.
fn dual_top_bottom(config: &BondConfig, rect: &Rect) -> bool {
    let (lo, hi) = (rect.lo(), rect.hi());
    if lo.x == hi.x {
        // No dual sites; the single column of sites is trivially crossed.
        return false;
    }
    let cols = (hi.x - lo.x) as usize;
    let rows = (hi.y - lo.y + 2) as usize;
    let idx = |i: i64, j: i64| (j - lo.y + 1) as usize * cols + (i - lo.x) as usize;
    let mut seen = vec![false; cols * rows];
    let mut queue = VecDeque::new();
    for i in lo.x..hi.x {
        seen[idx(i, hi.y)] = true;
        queue.push_back((i, hi.y));
    }
    while let Some((i, j)) = queue.pop_front() {
        if j == lo.y - 1 {
            return true;
        }
        let mut steps = Vec::with_capacity(4);
        // Vertical dual steps cross east edges of row j or j + 1.
        if j > lo.y - 1 && !config.is_open(&Edge::east_of(Site::new(i, j))) {
            steps.push((i, j - 1));
        }
        if j < hi.y && !config.is_open(&Edge::east_of(Site::new(i, j + 1))) {
            steps.push((i, j + 1));
        }
        // Horizontal dual steps cross north edges of interior columns.
        if (lo.y..hi.y).contains(&j) {
            if i > lo.x && !config.is_open(&Edge::north_of(Site::new(i, j))) {
                steps.push((i - 1, j));
            }
            if i + 1 < hi.x && !config.is_open(&Edge::north_of(Site::new(i + 1, j))) {
                steps.push((i + 1, j));
            }
        }
        for (a, b) in steps {
            let k = idx(a, b);
            if !seen[k] {
                seen[k] = true;
                queue.push_back((a, b));
            }
        }
    }
    false
}

/// Mirror image in the diagonal `x = y`.
pub fn transpose(config: &BondConfig) -> BondConfig {
    let r = config.region();
    let tr = Rect::new(Site::new(r.lo().y, r.lo().x), Site::new(r.hi().y, r.hi().x))
        .expect("ordered corners");
    BondConfig::from_fn(tr, |e| {
        let flip = |s: Site| Site::new(s.y, s.x);
        config.is_open(&Edge::new(flip(e.a()), flip(e.b())).expect("mirrored edge"))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Rect;

    fn set_path(cfg: &mut BondConfig, sites: &[(i64, i64)]) {
        for w in sites.windows(2) {
            let e = Edge::new(Site::new(w[0].0, w[0].1), Site::new(w[1].0, w[1].1)).unwrap();
            cfg.set(&e, true);
        }
    }

    fn hard_region(n: i64) -> Rect {
        Rect::new(Site::ORIGIN, Site::new(2 * n, n)).unwrap()
    }

    #[test]
    fn hard_crossing_examples() {
        assert!(hard_crossing(&BondConfig::open(hard_region(4)), 4).unwrap());
        assert!(!hard_crossing(&BondConfig::closed(hard_region(4)), 4).unwrap());
        let mut line = BondConfig::closed(hard_region(4));
        set_path(&mut line, &(0..=8).map(|x| (x, 1)).collect::<Vec<_>>());
        assert!(hard_crossing(&line, 4).unwrap());
        // The bottom row is not part of the corridor.
        let mut bottom = BondConfig::closed(hard_region(4));
        set_path(&mut bottom, &(0..=8).map(|x| (x, 0)).collect::<Vec<_>>());
        assert!(!hard_crossing(&bottom, 4).unwrap());
        // n = 1 has an empty corridor.
        assert!(!hard_crossing(&BondConfig::open(hard_region(1)), 1).unwrap());
        assert!(hard_crossing(&BondConfig::open(hard_region(2)), 2).unwrap());
        assert!(matches!(
            hard_crossing(&BondConfig::open(hard_region(3)), 4),
            Err(Error::RegionTooSmall { .. })
        ));
    }

    #[test]
    fn vertical_hard_crossing_is_transpose() {
        let mut cfg = BondConfig::closed(Rect::new(Site::ORIGIN, Site::new(3, 6)).unwrap());
        set_path(&mut cfg, &(0..=6).map(|y| (1, y)).collect::<Vec<_>>());
        assert!(hard_crossing_at(&cfg, Site::ORIGIN, 3, Axis::Vertical).unwrap());
        let t = transpose(&cfg);
        assert!(hard_crossing_at(&t, Site::ORIGIN, 3, Axis::Horizontal).unwrap());
    }

    fn b(n: u32) -> Rect {
        Rect::ball(Site::ORIGIN, n)
    }

    #[test]
    fn four_arm_examples() {
        let n = 4;
        assert!(!four_arm(&BondConfig::open(b(n)), n).unwrap());
        assert!(!four_arm(&BondConfig::closed(b(n)), n).unwrap());
        let mut rays = BondConfig::closed(b(n));
        set_path(&mut rays, &(-4..=0).map(|x| (x, 0)).collect::<Vec<_>>());
        set_path(&mut rays, &(1..=4).map(|x| (x, 0)).collect::<Vec<_>>());
        assert!(four_arm(&rays, n).unwrap());
        assert!(!five_arm(&rays, n).unwrap(), "only one arm from the origin");
        assert!(four_arm(&BondConfig::open(b(2)), 0).is_err());
    }

    #[test]
    fn five_arm_examples() {
        let n = 4;
        assert!(!five_arm(&BondConfig::open(b(n)), n).unwrap());
        assert!(!five_arm(&BondConfig::closed(b(n)), n).unwrap());
        let mut cfg = BondConfig::closed(b(n));
        set_path(&mut cfg, &(-4..=4).map(|y| (0, y)).collect::<Vec<_>>());
        set_path(&mut cfg, &(1..=4).map(|x| (x, 0)).collect::<Vec<_>>());
        assert!(four_arm(&cfg, n).unwrap());
        assert!(five_arm(&cfg, n).unwrap());
    }

    #[test]
    fn one_arm_examples() {
        assert!(one_arm(&BondConfig::open(b(5)), 5).unwrap());
        assert!(!one_arm(&BondConfig::closed(b(5)), 5).unwrap());
        // Larger configurations are restricted to B_n.
        assert!(one_arm(&BondConfig::open(b(7)), 5).unwrap());
    }

    #[test]
    fn dual_crossing_on_tiny_cases() {
        let r = Rect::new(Site::ORIGIN, Site::new(2, 1)).unwrap();
        assert!(!dual_blocking_crossing(&BondConfig::open(r), &r, Axis::Horizontal).unwrap());
        assert!(dual_blocking_crossing(&BondConfig::closed(r), &r, Axis::Horizontal).unwrap());
        assert!(dual_blocking_crossing(&BondConfig::closed(r), &r, Axis::Vertical).unwrap());
    }

    #[test]
    fn pivotal_on_a_ring() {
        // Only open edges: the ring of sup-radius 3, which is A_2's annulus.
        let region = b(3);
        let ring = BondConfig::from_fn(region, |e| {
            e.a().sup_dist(Site::ORIGIN) == 3 && e.b().sup_dist(Site::ORIGIN) == 3
        });
        let spec = EventSpec::AnnulusCircuit {
            center: Site::ORIGIN,
            n: 2,
        };
        let on_ring = Edge::east_of(Site::new(0, 3));
        assert!(is_pivotal(&ring, &on_ring, &spec).unwrap());
        let off_ring = Edge::east_of(Site::new(0, 0));
        assert!(!is_pivotal(&ring, &off_ring, &spec).unwrap());
        let outside = Edge::east_of(Site::new(10, 0));
        assert!(is_pivotal(&ring, &outside, &spec).is_err());
    }

    #[test]
    fn pivotal_all_open_annulus_is_never_pivotal() {
        let n = 3;
        let cfg = BondConfig::open(b(2 * n - 1));
        let spec = EventSpec::AnnulusCircuit {
            center: Site::ORIGIN,
            n,
        };
        for e in b(2 * n - 1).edges() {
            assert!(!is_pivotal(&cfg, &e, &spec).unwrap());
        }
    }

    #[test]
    fn gluing_all_open_implies_circuit() {
        let n = 3;
        let cfg = BondConfig::open(gluing_region(n));
        assert!(gluing_crossings(&cfg, n).unwrap());
        assert!(annulus_circuit(&cfg, Site::ORIGIN, n).unwrap());
        assert!(gluing_crossings(&BondConfig::open(b(2 * n)), n).is_err());
    }
}
