//! Brute-force references for the fast detectors. Each one is written
//! without the disjoint-set engine or the flow network, so agreement
//! between the two paths is evidence for both.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::lattice::{Edge, Rect, Site};
use crate::sampling::BondConfig;

fn open_neighbours<'a>(config: &'a BondConfig, s: Site) -> impl Iterator<Item = Site> + 'a {
    s.neighbours().into_iter().filter(move |&t| {
        Edge::new(s, t)
            .ok()
            .and_then(|e| config.get(&e))
            .unwrap_or(false)
    })
}

/// Sites reachable from `start` by open edges of the configuration.
pub fn bfs_reachable(config: &BondConfig, start: Site) -> Vec<bool> {
    let region = config.region();
    let mut seen = vec![false; region.num_sites()];
    let Some(i0) = region.site_index(start) else {
        return seen;
    };
    seen[i0] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(s) = queue.pop_front() {
        for t in open_neighbours(config, s) {
            let j = region.site_index(t).expect("open edges stay in the region");
            if !seen[j] {
                seen[j] = true;
                queue.push_back(t);
            }
        }
    }
    seen
}

pub fn bfs_connected(config: &BondConfig, a: Site, b: Site) -> bool {
    config
        .region()
        .site_index(b)
        .is_some_and(|j| bfs_reachable(config, a)[j])
}

/// Two open paths from `source` to `targets` sharing only `source`, by
/// enumerating every self-avoiding open path that stops at its first
/// target and testing all pairs. Paths may not share targets either.
/// Limited to regions of at most 64 sites.
pub fn disjoint_paths_by_enumeration(
    config: &BondConfig,
    source: Site,
    targets: &[Site],
) -> Result<bool> {
    let region = config.region();
    if region.num_sites() > 64 {
        return Err(Error::param(
            "region",
            "path enumeration is limited to 64 sites",
        ));
    }
    let bit = |s: Site| 1u64 << region.site_index(s).expect("site in region");
    let target_mask = targets.iter().fold(0u64, |m, &t| m | bit(t));
    if target_mask & bit(source) != 0 {
        return Ok(true);
    }
    let mut paths: Vec<u64> = Vec::new();
    let mut stack = vec![(source, bit(source))];
    while let Some((s, used)) = stack.pop() {
        for t in open_neighbours(config, s) {
            let b = bit(t);
            if used & b != 0 {
                continue;
            }
            if target_mask & b != 0 {
                paths.push((used | b) & !bit(source));
            } else {
                stack.push((t, used | b));
            }
        }
    }
    paths.sort_unstable();
    paths.dedup();
    for (i, &a) in paths.iter().enumerate() {
        if paths[i + 1..].iter().any(|&b| a & b == 0) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Number of configurations of `region` on which `event` holds, out of
/// `2^edges`. At `p = 1/2` every configuration has the same weight, so the
/// ratio is the exact probability.
pub fn exhaustive_count(
    region: &Rect,
    mut event: impl FnMut(&BondConfig) -> Result<bool>,
) -> Result<(u64, u64)> {
    let m = region.num_edges();
    if m > 24 {
        return Err(Error::param(
            "region",
            format!("{m} edges is too many to enumerate"),
        ));
    }
    let mut hits = 0u64;
    for mask in 0..1u64 << m {
        let bits = (0..m).map(|k| mask >> k & 1 == 1).collect();
        let cfg = BondConfig::from_bits(*region, bits)?;
        hits += u64::from(event(&cfg)?);
    }
    Ok((hits, 1u64 << m))
}

/// Exact probability of `event` under Bernoulli(`p`) bond percolation on
/// `region`, summing over all configurations.
pub fn exhaustive_probability(
    region: &Rect,
    p: f64,
    mut event: impl FnMut(&BondConfig) -> Result<bool>,
) -> Result<f64> {
    let m = region.num_edges();
    let mut by_open = vec![0u64; m + 1];
    exhaustive_count(region, |cfg| {
        let hit = event(cfg)?;
        if hit {
            by_open[cfg.count_open()] += 1;
        }
        Ok(hit)
    })?;
    Ok(by_open
        .iter()
        .enumerate()
        .map(|(k, &c)| c as f64 * p.powi(k as i32) * (1.0 - p).powi((m - k) as i32))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_on_simple_shapes() {
        let r = Rect::ball(Site::ORIGIN, 2);
        let boundary = r.boundary();
        assert!(
            disjoint_paths_by_enumeration(&BondConfig::open(r), Site::ORIGIN, &boundary).unwrap()
        );
        assert!(
            !disjoint_paths_by_enumeration(&BondConfig::closed(r), Site::ORIGIN, &boundary)
                .unwrap()
        );
    }

    #[test]
    fn exhaustive_single_edge() {
        let r = Rect::new(Site::ORIGIN, Site::new(1, 0)).unwrap();
        let (hits, total) = exhaustive_count(&r, |c| Ok(c.count_open() == 1)).unwrap();
        assert_eq!((hits, total), (1, 2));
        let p = exhaustive_probability(&r, 0.3, |c| Ok(c.count_open() == 1)).unwrap();
        assert!((p - 0.3).abs() < 1e-15);
    }
}
