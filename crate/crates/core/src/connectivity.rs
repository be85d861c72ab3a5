//! Open clusters of a bond configuration and vertex-disjoint path counting.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::lattice::{Rect, Site};
use crate::sampling::BondConfig;

/// Disjoint-set forest with union by size and path halving.
#[derive(Debug, Clone)]
pub struct DisjointSet {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl DisjointSet {
    pub fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let grand = self.parent[self.parent[x] as usize];
            self.parent[x] = grand;
            x = grand as usize;
        }
        x
    }

    /// Returns false if `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        true
    }

    pub fn same(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }

    pub fn set_size(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r] as usize
    }
}

/// Root label of every site's open cluster, restricted to a rectangle:
/// only edges with both endpoints in the rectangle are used.
#[derive(Debug, Clone)]
pub struct ClusterLabeling {
    region: Rect,
    labels: Vec<u32>,
}

impl ClusterLabeling {
    pub fn build(config: &BondConfig) -> Self {
        Self::build_in(config, config.region())
            .expect("a configuration always covers its own region")
    }

    /// Clusters of the configuration restricted to `sub`.
    pub fn build_in(config: &BondConfig, sub: &Rect) -> Result<Self> {
        config.require_cover(sub)?;
        let outer = config.region();
        let (w, h) = (sub.width(), sub.height());
        let dc = (sub.lo().x - outer.lo().x) as usize;
        let dr = (sub.lo().y - outer.lo().y) as usize;
        let mut dsu = DisjointSet::new(w * h);
        for r in 0..h {
            for c in 0..w {
                let i = r * w + c;
                if c + 1 < w && config.east_open(c + dc, r + dr) {
                    dsu.union(i, i + 1);
                }
                if r + 1 < h && config.north_open(c + dc, r + dr) {
                    dsu.union(i, i + w);
                }
            }
        }
        let labels = (0..w * h).map(|i| dsu.find(i) as u32).collect();
        Ok(ClusterLabeling {
            region: *sub,
            labels,
        })
    }

    pub fn region(&self) -> &Rect {
        &self.region
    }

    pub fn label(&self, s: Site) -> Result<u32> {
        self.region
            .site_index(s)
            .map(|i| self.labels[i])
            .ok_or(Error::SiteOutOfRegion {
                site: s,
                region: self.region,
            })
    }

    pub fn connected(&self, a: Site, b: Site) -> Result<bool> {
        Ok(self.label(a)? == self.label(b)?)
    }

    /// Whether `a` shares a cluster with any of `targets`.
    pub fn reaches_set(&self, a: Site, targets: &[Site]) -> Result<bool> {
        let la = self.label(a)?;
        for &t in targets {
            if self.label(t)? == la {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Whether some site of `from` shares a cluster with some site of `to`.
    pub fn connects(
        &self,
        from: impl IntoIterator<Item = Site>,
        to: impl IntoIterator<Item = Site>,
    ) -> Result<bool> {
        let mut mark = vec![false; self.labels.len()];
        for s in from {
            mark[self.label(s)? as usize] = true;
        }
        for t in to {
            if mark[self.label(t)? as usize] {
                return Ok(true);
            }
        }
        Ok(false)
    }

    pub fn num_clusters(&self) -> usize {
        self.labels
            .iter()
            .enumerate()
            .filter(|&(i, &l)| i == l as usize)
            .count()
    }
}

pub fn build_clusters(config: &BondConfig) -> ClusterLabeling {
    ClusterLabeling::build(config)
}

pub fn connected(labeling: &ClusterLabeling, a: Site, b: Site) -> Result<bool> {
    labeling.connected(a, b)
}

pub fn reaches_set(labeling: &ClusterLabeling, a: Site, targets: &[Site]) -> Result<bool> {
    labeling.reaches_set(a, targets)
}

/// Unit-capacity residual network for the vertex-disjoint path search.
struct FlowNetwork {
    head: Vec<usize>,
    next: Vec<usize>,
    to: Vec<usize>,
    cap: Vec<u8>,
}

const NIL: usize = usize::MAX;

impl FlowNetwork {
    fn new(nodes: usize) -> Self {
        FlowNetwork {
            head: vec![NIL; nodes],
            next: Vec::new(),
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    fn arc(&mut self, u: usize, v: usize, cap: u8) {
        for (a, b, c) in [(u, v, cap), (v, u, 0)] {
            self.to.push(b);
            self.cap.push(c);
            self.next.push(self.head[a]);
            self.head[a] = self.to.len() - 1;
        }
    }

    /// One BFS augmentation; returns false if the sink is unreachable.
    fn augment(&mut self, source: usize, sink: usize) -> bool {
        let mut via = vec![NIL; self.head.len()];
        let mut seen = vec![false; self.head.len()];
        seen[source] = true;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let mut a = self.head[u];
            while a != NIL {
                let v = self.to[a];
                if self.cap[a] > 0 && !seen[v] {
                    seen[v] = true;
                    via[v] = a;
                    if v == sink {
                        let mut x = sink;
                        while x != source {
                            let arc = via[x];
                            self.cap[arc] -= 1;
                            self.cap[arc ^ 1] += 1;
                            x = self.to[arc ^ 1];
                        }
                        return true;
                    }
                    queue.push_back(v);
                }
                a = self.next[a];
            }
        }
        false
    }
}

/// Whether two open paths run from `source` to `targets` inside the
/// configuration's region, sharing no site other than `source`.
///
/// Max-flow on the vertex-split graph: every site other than `source` and
/// the targets has capacity one; targets drain into a common sink.
pub fn two_vertex_disjoint_paths(
    config: &BondConfig,
    source: Site,
    targets: &[Site],
) -> Result<bool> {
    let region = config.region();
    let src = region.site_index(source).ok_or(Error::SiteOutOfRegion {
        site: source,
        region: *region,
    })?;
    let n = region.num_sites();
    let mut is_target = vec![false; n];
    for &t in targets {
        let i = region.site_index(t).ok_or(Error::SiteOutOfRegion {
            site: t,
            region: *region,
        })?;
        is_target[i] = true;
    }
    if is_target[src] {
        return Ok(true);
    }
    // node 2i: entry of site i, 2i+1: exit of site i.
    let sink = 2 * n;
    let mut net = FlowNetwork::new(2 * n + 1);
    for (i, &target) in is_target.iter().enumerate() {
        let cap = if i == src || target { 2 } else { 1 };
        net.arc(2 * i, 2 * i + 1, cap);
        if target {
            net.arc(2 * i + 1, sink, 2);
        }
    }
    let w = region.width();
    for r in 0..region.height() {
        for c in 0..w {
            let i = r * w + c;
            let mut link = |j: usize| {
                net.arc(2 * i + 1, 2 * j, 1);
                net.arc(2 * j + 1, 2 * i, 1);
            };
            if c + 1 < w && config.east_open(c, r) {
                link(i + 1);
            }
            if r + 1 < region.height() && config.north_open(c, r) {
                link(i + w);
            }
        }
    }
    let source_node = 2 * src + 1;
    Ok(net.augment(source_node, sink) && net.augment(source_node, sink))
}
