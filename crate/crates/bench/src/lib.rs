//! Fixtures shared by the benchmarks.

use brochette::sampling::sample_config;
use brochette::{BondConfig, ColumnSet, RandomStream, Rect, SamplerParams, Site};

/// A homogeneous configuration on the ball of radius `r` at the origin.
pub fn fixture(r: u32, p: f64, seed: u64) -> BondConfig {
    let region = Rect::ball(Site::ORIGIN, r);
    let cols = ColumnSet::empty(region.lo().x, region.hi().x);
    let params = SamplerParams::homogeneous(p).expect("valid p");
    sample_config(&region, &cols, &params, &RandomStream::new(seed, "bench")).expect("covered")
}
