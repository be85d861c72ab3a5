//! Open circuits in `B_{2n-1}(x) \ B_n(x)` winding around `x`.
//!
//! The production detector works on the dual: the annulus is a planar
//! region whose faces are the unit squares between the squares of
//! sup-radius `n + 1` and `2n - 1`, plus the hole and the exterior. An open
//! circuit around the hole exists iff the hole and the exterior are not
//! joined through faces separated by closed edges.
//!
//! The oracle lifts the annulus to its cyclic cover instead: crossing the
//! ray `{(x1 + t, x2 + 1/2) : t > 0}` upward moves one sheet up. A closed
//! open walk with non-zero winding exists iff some open cluster of the
//! annulus carries inconsistent sheet labels.

use std::collections::VecDeque;

use crate::connectivity::DisjointSet;
use crate::error::{Error, Result};
use crate::lattice::{in_annulus, Edge, Rect, Site};
use crate::sampling::BondConfig;

/// Which edges glue dual faces. `Flipped` is a deliberately wrong
/// convention, used to check that the oracle suite notices it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DualConvention {
    #[default]
    ClosedEdges,
    Flipped,
}

fn outer_box(config: &BondConfig, center: Site, n: u32) -> Result<Rect> {
    if n < 2 {
        return Err(Error::param(
            "n",
            format!("annulus circuit needs n >= 2, got {n}"),
        ));
    }
    let outer = Rect::ball(center, 2 * n - 1);
    config.require_cover(&outer)?;
    Ok(outer)
}

pub fn annulus_circuit(config: &BondConfig, center: Site, n: u32) -> Result<bool> {
    annulus_circuit_with(config, center, n, DualConvention::ClosedEdges)
}

pub fn annulus_circuit_with(
    config: &BondConfig,
    center: Site,
    n: u32,
    convention: DualConvention,
) -> Result<bool> {
    let outer = outer_box(config, center, n)?;
    let inner = i64::from(n) + 1;
    let reach = 2 * i64::from(n) - 1;
    // Faces by south-west corner (i, j) relative to the centre, for
    // i, j in [-reach, reach - 1].
    let side = (2 * reach) as usize;
    let hole = side * side;
    let exterior = hole + 1;
    let face = |i: i64, j: i64| -> usize {
        let in_hole = (-inner..inner).contains(&i) && (-inner..inner).contains(&j);
        if in_hole {
            hole
        } else if (-reach..reach).contains(&i) && (-reach..reach).contains(&j) {
            (j + reach) as usize * side + (i + reach) as usize
        } else {
            exterior
        }
    };
    let glue_open = convention == DualConvention::Flipped;
    let mut dsu = DisjointSet::new(hole + 2);

    let region = config.region();
    let dc = (outer.lo().x - region.lo().x) as usize;
    let dr = (outer.lo().y - region.lo().y) as usize;
    let w = outer.width();
    let in_ring = |u: i64, v: i64| {
        let d = u.abs().max(v.abs());
        d >= inner && d <= reach
    };
    for r in 0..w {
        let v = r as i64 - reach;
        for c in 0..w {
            let u = c as i64 - reach;
            if !in_ring(u, v) {
                continue;
            }
            if c + 1 < w && in_ring(u + 1, v) && config.east_open(c + dc, r + dr) == glue_open {
                dsu.union(face(u, v - 1), face(u, v));
            }
            if r + 1 < w && in_ring(u, v + 1) && config.north_open(c + dc, r + dr) == glue_open {
                dsu.union(face(u - 1, v), face(u, v));
            }
        }
    }
    Ok(!dsu.same(hole, exterior))
}

/// Winding oracle by sheet labelling on the cyclic cover of the annulus.
pub fn annulus_circuit_oracle(config: &BondConfig, center: Site, n: u32) -> Result<bool> {
    let outer = outer_box(config, center, n)?;
    let sites: Vec<Site> = outer
        .sites()
        .filter(|&s| in_annulus(center, n, s))
        .collect();
    let mut sheet: Vec<Option<i64>> = vec![None; outer.num_sites()];
    let index = |s: Site| outer.site_index(s).expect("annulus lies in the outer box");
    for &start in &sites {
        if sheet[index(start)].is_some() {
            continue;
        }
        sheet[index(start)] = Some(0);
        let mut queue = VecDeque::from([start]);
        while let Some(s) = queue.pop_front() {
            let level = sheet[index(s)].expect("queued sites are labelled");
            for t in s.neighbours() {
                if !in_annulus(center, n, t) {
                    continue;
                }
                let e = Edge::new(s, t).expect("neighbours");
                if !config.is_open(&e) {
                    continue;
                }
                let expected = level + ray_crossing(center, s, t);
                match sheet[index(t)] {
                    None => {
                        sheet[index(t)] = Some(expected);
                        queue.push_back(t);
                    }
                    Some(found) if found != expected => return Ok(true),
                    Some(_) => {}
                }
            }
        }
    }
    Ok(false)
}

/// Signed crossing of the step `s -> t` with the ray at height
/// `center.y + 1/2` east of the centre.
fn ray_crossing(center: Site, s: Site, t: Site) -> i64 {
    if s.x != t.x || s.x <= center.x {
        return 0;
    }
    match (s.y - center.y, t.y - center.y) {
        (0, 1) => 1,
        (1, 0) => -1,
        _ => 0,
    }
}
