//! Geometry of the square lattice: sites, nearest-neighbour edges, finite
//! rectangles, the dual lattice and the column set that selects enhanced
//! vertical edges.
//!
//! Edges of a rectangle are enumerated row by row (bottom row first, west to
//! east within a row); at every site the edge to the east comes before the
//! edge to the north. [`BondConfig`](crate::sampling::BondConfig) stores its
//! bits in exactly this order.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site {
    pub x: i64,
    pub y: i64,
}

impl Site {
    pub const ORIGIN: Site = Site { x: 0, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        Site { x, y }
    }

    pub fn offset(self, dx: i64, dy: i64) -> Self {
        Site::new(self.x + dx, self.y + dy)
    }

    /// Sup-norm distance, the metric in which `B_n` boxes are balls.
    pub fn sup_dist(self, other: Site) -> i64 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }

    pub fn neighbours(self) -> [Site; 4] {
        [
            self.offset(1, 0),
            self.offset(0, 1),
            self.offset(-1, 0),
            self.offset(0, -1),
        ]
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// A nearest-neighbour edge. `a` is always the lexicographically smaller
/// endpoint, so `a` is the west endpoint of a horizontal edge and the south
/// endpoint of a vertical one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    a: Site,
    b: Site,
}

impl Edge {
    pub fn new(u: Site, v: Site) -> Result<Self> {
        if (u.x - v.x).abs() + (u.y - v.y).abs() != 1 {
            return Err(Error::NotAnEdge(u, v));
        }
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        Ok(Edge { a, b })
    }

    /// The edge from `s` to its east neighbour.
    pub fn east_of(s: Site) -> Self {
        Edge {
            a: s,
            b: s.offset(1, 0),
        }
    }

    /// The edge from `s` to its north neighbour.
    pub fn north_of(s: Site) -> Self {
        Edge {
            a: s,
            b: s.offset(0, 1),
        }
    }

    pub fn a(&self) -> Site {
        self.a
    }

    pub fn b(&self) -> Site {
        self.b
    }

    pub fn orientation(&self) -> Orientation {
        if self.a.y == self.b.y {
            Orientation::Horizontal
        } else {
            Orientation::Vertical
        }
    }

    pub fn is_vertical(&self) -> bool {
        self.orientation() == Orientation::Vertical
    }

    /// Midpoint in doubled coordinates, so that half-integers stay exact.
    pub fn midpoint2(&self) -> (i64, i64) {
        (self.a.x + self.b.x, self.a.y + self.b.y)
    }

    pub fn dual(&self) -> DualEdge {
        let s = self.a;
        match self.orientation() {
            Orientation::Horizontal => DualEdge {
                a: DualSite::below_left_of(s.offset(0, -1)),
                b: DualSite::below_left_of(s),
            },
            Orientation::Vertical => DualEdge {
                a: DualSite::below_left_of(s.offset(-1, 0)),
                b: DualSite::below_left_of(s),
            },
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.a, self.b)
    }
}

/// A site of the dual lattice `(1/2, 1/2) + Z^2`, stored by the primal site
/// at its south-west: `DualSite { x, y }` is the point `(x + 1/2, y + 1/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DualSite {
    pub x: i64,
    pub y: i64,
}

impl DualSite {
    pub const fn below_left_of(s: Site) -> Self {
        DualSite { x: s.x, y: s.y }
    }

    /// Coordinates doubled; both are odd.
    pub fn coords2(&self) -> (i64, i64) {
        (2 * self.x + 1, 2 * self.y + 1)
    }
}

/// Dual edge, endpoints in lexicographic order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DualEdge {
    a: DualSite,
    b: DualSite,
}

impl DualEdge {
    pub fn a(&self) -> DualSite {
        self.a
    }

    pub fn b(&self) -> DualSite {
        self.b
    }

    pub fn midpoint2(&self) -> (i64, i64) {
        let (ax, ay) = self.a.coords2();
        let (bx, by) = self.b.coords2();
        ((ax + bx) / 2, (ay + by) / 2)
    }

    /// The primal edge this dual edge crosses. Dualizing a dual edge lands
    /// back on the primal lattice after the `(1/2, 1/2)` shift, so
    /// `e.dual().primal() == e`.
    pub fn primal(&self) -> Edge {
        let s = Site::new(self.b.x, self.b.y);
        if self.a.x == self.b.x {
            Edge::east_of(s)
        } else {
            Edge::north_of(s)
        }
    }
}

/// A finite rectangle `[lo.x, hi.x] x [lo.y, hi.y]` of sites, inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rect {
    lo: Site,
    hi: Site,
}

impl Rect {
    pub fn new(lo: Site, hi: Site) -> Result<Self> {
        if lo.x > hi.x || lo.y > hi.y {
            return Err(Error::param(
                "rect",
                format!("corner ({lo}) is not below-left of ({hi})"),
            ));
        }
        Ok(Rect { lo, hi })
    }

    /// `B_n(center) = center + [-n, n]^2`.
    pub fn ball(center: Site, n: u32) -> Self {
        let n = i64::from(n);
        Rect {
            lo: center.offset(-n, -n),
            hi: center.offset(n, n),
        }
    }

    pub fn lo(&self) -> Site {
        self.lo
    }

    pub fn hi(&self) -> Site {
        self.hi
    }

    pub fn width(&self) -> usize {
        (self.hi.x - self.lo.x + 1) as usize
    }

    pub fn height(&self) -> usize {
        (self.hi.y - self.lo.y + 1) as usize
    }

    pub fn num_sites(&self) -> usize {
        self.width() * self.height()
    }

    pub fn num_edges(&self) -> usize {
        let (w, h) = (self.width(), self.height());
        2 * w * h - w - h
    }

    pub fn contains(&self, s: Site) -> bool {
        (self.lo.x..=self.hi.x).contains(&s.x) && (self.lo.y..=self.hi.y).contains(&s.y)
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        self.contains(other.lo) && self.contains(other.hi)
    }

    pub fn contains_edge(&self, e: &Edge) -> bool {
        self.contains(e.a) && self.contains(e.b)
    }

    /// Smallest rectangle containing both.
    pub fn union(&self, other: &Rect) -> Rect {
        Rect {
            lo: Site::new(self.lo.x.min(other.lo.x), self.lo.y.min(other.lo.y)),
            hi: Site::new(self.hi.x.max(other.hi.x), self.hi.y.max(other.hi.y)),
        }
    }

    /// Row-major index of a site.
    pub fn site_index(&self, s: Site) -> Option<usize> {
        self.contains(s)
            .then(|| (s.y - self.lo.y) as usize * self.width() + (s.x - self.lo.x) as usize)
    }

    pub fn site_at(&self, index: usize) -> Site {
        let w = self.width();
        Site::new(
            self.lo.x + (index % w) as i64,
            self.lo.y + (index / w) as i64,
        )
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (self.lo.y..=self.hi.y)
            .flat_map(move |y| (self.lo.x..=self.hi.x).map(move |x| Site::new(x, y)))
    }

    /// Position of `e` in the canonical edge order, if `e` lies in the rectangle.
    pub fn edge_index(&self, e: &Edge) -> Option<usize> {
        if !self.contains_edge(e) {
            return None;
        }
        let c = (e.a.x - self.lo.x) as usize;
        let r = (e.a.y - self.lo.y) as usize;
        Some(match e.orientation() {
            Orientation::Horizontal => self.east_index(c, r),
            Orientation::Vertical => self.north_index(c, r),
        })
    }

    // Row r < h-1 holds 2w-1 edges: east and north edges interleave, the last
    // site only has a north edge. The top row holds w-1 east edges.
    #[inline]
    pub(crate) fn east_index(&self, c: usize, r: usize) -> usize {
        r * (2 * self.width() - 1) + if r + 1 < self.height() { 2 * c } else { c }
    }

    #[inline]
    pub(crate) fn north_index(&self, c: usize, r: usize) -> usize {
        let w = self.width();
        r * (2 * w - 1) + 2 * c + usize::from(c + 1 < w)
    }

    /// All edges with both endpoints in the rectangle, in canonical order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        let hi = self.hi;
        self.sites().flat_map(move |s| {
            let east = (s.x < hi.x).then(|| Edge::east_of(s));
            let north = (s.y < hi.y).then(|| Edge::north_of(s));
            east.into_iter().chain(north)
        })
    }

    /// Inner boundary: sites of the rectangle with a neighbour outside it.
    pub fn boundary(&self) -> Vec<Site> {
        self.sites()
            .filter(|s| {
                s.x == self.lo.x || s.x == self.hi.x || s.y == self.lo.y || s.y == self.hi.y
            })
            .collect()
    }

    pub fn column(&self, x: i64) -> impl Iterator<Item = Site> {
        (self.lo.y..=self.hi.y).map(move |y| Site::new(x, y))
    }

    pub fn row(&self, y: i64) -> impl Iterator<Item = Site> {
        (self.lo.x..=self.hi.x).map(move |x| Site::new(x, y))
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}..{}]x[{}..{}]",
            self.lo.x, self.hi.x, self.lo.y, self.hi.y
        )
    }
}

/// The edges of `region` in canonical order.
pub fn edges_of_region(region: &Rect) -> Vec<Edge> {
    region.edges().collect()
}

/// Membership of columns in the enhanced set over an explicit integer
/// range. Queries outside the range are errors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSet {
    lo: i64,
    members: Vec<bool>,
}

impl ColumnSet {
    /// Columns `lo..=hi`; `hi < lo` gives an empty range.
    pub fn from_fn(lo: i64, hi: i64, mut f: impl FnMut(i64) -> bool) -> Self {
        let members = if hi < lo {
            Vec::new()
        } else {
            (lo..=hi).map(&mut f).collect()
        };
        ColumnSet { lo, members }
    }

    pub fn empty(lo: i64, hi: i64) -> Self {
        Self::from_fn(lo, hi, |_| false)
    }

    pub fn full(lo: i64, hi: i64) -> Self {
        Self::from_fn(lo, hi, |_| true)
    }

    pub fn from_members(lo: i64, members: Vec<bool>) -> Self {
        ColumnSet { lo, members }
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    /// Last column of the range; `lo - 1` when the range is empty.
    pub fn hi(&self) -> i64 {
        self.lo + self.members.len() as i64 - 1
    }

    pub fn is_empty_range(&self) -> bool {
        self.members.is_empty()
    }

    pub fn covers(&self, lo: i64, hi: i64) -> bool {
        hi < lo || (self.lo <= lo && hi <= self.hi())
    }

    pub fn contains(&self, column: i64) -> Result<bool> {
        if column < self.lo || column > self.hi() {
            return Err(Error::ColumnOutOfRange {
                column,
                lo: self.lo,
                hi: self.hi(),
            });
        }
        Ok(self.members[(column - self.lo) as usize])
    }

    pub fn members(&self) -> &[bool] {
        &self.members
    }

    pub fn count(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }

    pub(crate) fn require_cover(&self, lo: i64, hi: i64) -> Result<()> {
        if self.covers(lo, hi) {
            return Ok(());
        }
        let column = if lo < self.lo { lo } else { hi };
        Err(Error::ColumnOutOfRange {
            column,
            lo: self.lo,
            hi: self.hi(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeClass {
    HorizontalBase,
    VerticalBase,
    VerticalEnhanced,
}

pub fn classify_edge(e: &Edge, columns: &ColumnSet) -> Result<EdgeClass> {
    let member = columns.contains(e.a.x)?;
    if e.orientation() == Orientation::Horizontal {
        columns.contains(e.b.x)?;
        return Ok(EdgeClass::HorizontalBase);
    }
    Ok(if member {
        EdgeClass::VerticalEnhanced
    } else {
        EdgeClass::VerticalBase
    })
}

/// Sites of `B_{2n-1}(center) \ B_n(center)`.
pub fn in_annulus(center: Site, n: u32, s: Site) -> bool {
    let d = center.sup_dist(s);
    d > i64::from(n) && d < 2 * i64::from(n)
}

/// Edges with both endpoints in the annulus `B_{2n-1}(x) \ B_n(x)` and the
/// subset of those that are enhanced verticals.
pub fn annulus_edge_sets(
    center: Site,
    n: u32,
    columns: &ColumnSet,
) -> Result<(Vec<Edge>, Vec<Edge>)> {
    if n < 2 {
        return Err(Error::param(
            "n",
            format!("annulus B_{{2n-1}} \\ B_n is empty for n = {n}"),
        ));
    }
    let outer = Rect::ball(center, 2 * n - 1);
    columns.require_cover(outer.lo.x, outer.hi.x)?;
    let all: Vec<Edge> = outer
        .edges()
        .filter(|e| in_annulus(center, n, e.a) && in_annulus(center, n, e.b))
        .collect();
    let mut enhanced = Vec::new();
    for e in &all {
        if classify_edge(e, columns)? == EdgeClass::VerticalEnhanced {
            enhanced.push(*e);
        }
    }
    Ok((all, enhanced))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(x0: i64, y0: i64, x1: i64, y1: i64) -> Rect {
        Rect::new(Site::new(x0, y0), Site::new(x1, y1)).unwrap()
    }

    #[test]
    fn small_region_edge_counts() {
        assert!(edges_of_region(&Rect::ball(Site::ORIGIN, 0)).is_empty());
        assert_eq!(edges_of_region(&rect(0, 0, 1, 1)).len(), 4);
        let b1 = edges_of_region(&Rect::ball(Site::ORIGIN, 1));
        assert_eq!(b1.len(), 12);
        assert_eq!(b1.iter().filter(|e| e.is_vertical()).count(), 6);
    }

    #[test]
    fn ball_edge_count_formula() {
        for n in 0..=16u32 {
            let r = Rect::ball(Site::new(3, -2), n);
            let k = 2 * n as usize + 1;
            assert_eq!(r.edges().count(), 2 * k * (k - 1));
            assert_eq!(r.num_edges(), 2 * k * (k - 1));
        }
    }

    #[test]
    fn edge_index_matches_enumeration() {
        for r in [
            rect(0, 0, 0, 0),
            rect(-2, 1, 3, 1),
            rect(4, -3, 4, 2),
            rect(-1, -2, 5, 3),
        ] {
            for (i, e) in r.edges().enumerate() {
                assert_eq!(r.edge_index(&e), Some(i), "{e} in {r}");
            }
            assert_eq!(r.edges().count(), r.num_edges());
        }
    }

    #[test]
    fn canonical_order_is_east_then_north() {
        let r = rect(0, 0, 1, 1);
        let edges = edges_of_region(&r);
        assert_eq!(edges[0], Edge::east_of(Site::new(0, 0)));
        assert_eq!(edges[1], Edge::north_of(Site::new(0, 0)));
        assert_eq!(edges[2], Edge::north_of(Site::new(1, 0)));
        assert_eq!(edges[3], Edge::east_of(Site::new(0, 1)));
    }

    #[test]
    fn edge_rejects_non_neighbours() {
        assert!(Edge::new(Site::new(0, 0), Site::new(1, 1)).is_err());
        assert!(Edge::new(Site::new(0, 0), Site::new(0, 0)).is_err());
        let e = Edge::new(Site::new(1, 0), Site::new(0, 0)).unwrap();
        assert_eq!(e.a(), Site::new(0, 0));
    }

    #[test]
    fn dual_edges() {
        let h = Edge::east_of(Site::ORIGIN);
        let d = h.dual();
        // (1/2, -1/2) -- (1/2, 1/2)
        assert_eq!(d.a().coords2(), (1, -1));
        assert_eq!(d.b().coords2(), (1, 1));
        assert_eq!(d.midpoint2(), h.midpoint2());
        assert_eq!(d.primal(), h);

        let v = Edge::north_of(Site::ORIGIN);
        let d = v.dual();
        // (-1/2, 1/2) -- (1/2, 1/2)
        assert_eq!(d.a().coords2(), (-1, 1));
        assert_eq!(d.b().coords2(), (1, 1));
        assert_eq!(d.midpoint2(), v.midpoint2());
        assert_eq!(d.primal(), v);
    }

    #[test]
    fn dual_is_bijective_on_region() {
        let r = Rect::ball(Site::new(1, 1), 3);
        let duals: std::collections::HashSet<_> = r.edges().map(|e| e.dual()).collect();
        assert_eq!(duals.len(), r.num_edges());
        for e in r.edges() {
            assert_eq!(e.dual().primal(), e);
            assert_eq!(e.dual().midpoint2(), e.midpoint2());
        }
    }

    #[test]
    fn classification() {
        let cols = ColumnSet::from_fn(0, 6, |i| i == 3);
        let v3 = Edge::north_of(Site::new(3, 5));
        let v2 = Edge::north_of(Site::new(2, 5));
        let h3 = Edge::east_of(Site::new(3, 0));
        assert_eq!(
            classify_edge(&v3, &cols).unwrap(),
            EdgeClass::VerticalEnhanced
        );
        assert_eq!(classify_edge(&v2, &cols).unwrap(), EdgeClass::VerticalBase);
        assert_eq!(
            classify_edge(&h3, &cols).unwrap(),
            EdgeClass::HorizontalBase
        );
        let full = ColumnSet::full(-10, 10);
        assert_eq!(
            classify_edge(&Edge::east_of(Site::new(2, 2)), &full).unwrap(),
            EdgeClass::HorizontalBase
        );
        assert!(matches!(
            classify_edge(&Edge::north_of(Site::new(7, 0)), &cols),
            Err(Error::ColumnOutOfRange { column: 7, .. })
        ));
        assert!(classify_edge(&Edge::east_of(Site::new(6, 0)), &cols).is_err());
    }

    #[test]
    fn column_set_ranges() {
        let c = ColumnSet::empty(5, 4);
        assert!(c.is_empty_range());
        assert!(c.contains(5).is_err());
        let c = ColumnSet::full(-2, 2);
        assert_eq!(c.hi(), 2);
        assert!(c.contains(-2).unwrap());
        assert!(c.contains(-3).is_err());
    }

    // Brute force: every edge of the outer box whose endpoints both avoid
    // B_n, filtered by hand-written class test.
    fn annulus_brute(n: u32, cols: &ColumnSet) -> (usize, Vec<Edge>) {
        let n = n as i64;
        let mut all = 0;
        let mut f = Vec::new();
        for x in -(2 * n)..=(2 * n) {
            for y in -(2 * n)..=(2 * n) {
                let s = Site::new(x, y);
                for t in [s.offset(1, 0), s.offset(0, 1)] {
                    let ok = |u: Site| {
                        let d = u.x.abs().max(u.y.abs());
                        (n + 1..2 * n).contains(&d)
                    };
                    if ok(s) && ok(t) {
                        all += 1;
                        if t.x == s.x && cols.contains(s.x).unwrap() {
                            f.push(Edge::new(s, t).unwrap());
                        }
                    }
                }
            }
        }
        (all, f)
    }

    #[test]
    fn annulus_sets_small_cases() {
        let cols = ColumnSet::from_fn(-10, 10, |i| i == 0);
        let (e, f) = annulus_edge_sets(Site::ORIGIN, 2, &cols).unwrap();
        // B_3 \ B_2 is the single ring of sup-radius 3: 24 edges, and column
        // 0 meets it only at (0, 3) and (0, -3), neither inside a vertical edge.
        assert_eq!(e.len(), 24);
        assert!(f.is_empty());
        assert_eq!(annulus_brute(2, &cols), (24, vec![]));

        let (_, f) = annulus_edge_sets(Site::ORIGIN, 3, &ColumnSet::empty(-10, 10)).unwrap();
        assert!(f.is_empty());

        let all = ColumnSet::full(-10, 10);
        let (e, f) = annulus_edge_sets(Site::ORIGIN, 3, &all).unwrap();
        let verticals: Vec<_> = e.iter().copied().filter(Edge::is_vertical).collect();
        assert_eq!(f, verticals);

        for n in 2..=5 {
            let cols = ColumnSet::from_fn(-20, 20, |i| i % 3 == 0);
            let (e, f) = annulus_edge_sets(Site::ORIGIN, n, &cols).unwrap();
            let (count, bf) = annulus_brute(n, &cols);
            assert_eq!(e.len(), count);
            let mut f2 = f.clone();
            let mut bf2 = bf.clone();
            f2.sort_by_key(|e| (e.a(), e.b()));
            bf2.sort_by_key(|e| (e.a(), e.b()));
            assert_eq!(f2, bf2);
        }
    }

    #[test]
    fn annulus_rejects_small_scale() {
        let cols = ColumnSet::full(-5, 5);
        assert!(annulus_edge_sets(Site::ORIGIN, 1, &cols).is_err());
        assert!(annulus_edge_sets(Site::ORIGIN, 0, &cols).is_err());
        assert!(
            annulus_edge_sets(Site::ORIGIN, 4, &cols).is_err(),
            "range too narrow"
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn enhanced_implies_vertical(x in -20i64..20, y in -20i64..20, vertical: bool, mask in any::<u64>()) {
                let cols = ColumnSet::from_fn(-21, 21, |i| (mask >> ((i + 21) as u32 % 64)) & 1 == 1);
                let e = if vertical { Edge::north_of(Site::new(x, y)) } else { Edge::east_of(Site::new(x, y)) };
                let class = classify_edge(&e, &cols).unwrap();
                if class == EdgeClass::VerticalEnhanced {
                    prop_assert!(e.is_vertical());
                    prop_assert!(cols.contains(x).unwrap());
                }
            }
        }
    }
}
