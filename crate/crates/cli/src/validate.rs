//! The oracle suite: every fast detector against its brute-force
//! reference on fixed seeds.

use anyhow::Result;
use clap::ValueEnum;

use brochette::connectivity::two_vertex_disjoint_paths;
use brochette::events::{
    annulus_circuit_oracle, annulus_circuit_with, dual_blocking_crossing, rect_crossing,
    DualConvention,
};
use brochette::lattice::ColumnSet;
use brochette::nearcritical::{estimate, russo_sums, ColumnSource};
use brochette::oracles::{bfs_reachable, disjoint_paths_by_enumeration, exhaustive_count};
use brochette::sampling::sample_config;
use brochette::{
    Axis, BondConfig, ClusterLabeling, EventSpec, RandomStream, Rect, SamplerParams, Site,
};

/// Deliberate bugs for checking that the suite catches them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    /// Glue dual faces across open edges instead of closed ones.
    FlippedDual,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for CheckResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {:<14} {}", self.name, self.detail)
    }
}

fn homogeneous(region: Rect, p: f64, stream: &RandomStream) -> Result<BondConfig> {
    let cols = ColumnSet::empty(region.lo().x, region.hi().x);
    Ok(sample_config(
        &region,
        &cols,
        &SamplerParams::homogeneous(p)?,
        stream,
    )?)
}

fn agreement(name: &'static str, agree: usize, total: usize) -> CheckResult {
    CheckResult {
        name,
        passed: agree == total,
        detail: format!("{agree}/{total} agree"),
    }
}

fn check_annulus(fault: Option<Fault>, per_cell: u64) -> Result<CheckResult> {
    let convention = match fault {
        Some(Fault::FlippedDual) => DualConvention::Flipped,
        None => DualConvention::ClosedEdges,
    };
    let base = RandomStream::new(1, "validate/annulus");
    let (mut agree, mut total) = (0, 0);
    for n in 2..=4u32 {
        for p in [0.2, 0.5, 0.8] {
            let s = base.child(&format!("n={n};p={p}"));
            let region = Rect::ball(Site::ORIGIN, 2 * n - 1);
            for i in 0..per_cell {
                let cfg = homogeneous(region, p, &s.sample(i))?;
                let fast = annulus_circuit_with(&cfg, Site::ORIGIN, n, convention)?;
                agree += usize::from(fast == annulus_circuit_oracle(&cfg, Site::ORIGIN, n)?);
                total += 1;
            }
        }
    }
    // Circuits are rare below p = 0.8, so also check hand-made rings,
    // where the answer is known.
    for n in 2..=4u32 {
        let region = Rect::ball(Site::ORIGIN, 2 * n - 1);
        let ring = BondConfig::from_fn(region, |e| {
            e.a().sup_dist(Site::ORIGIN) == i64::from(n) + 1
                && e.b().sup_dist(Site::ORIGIN) == i64::from(n) + 1
        });
        agree += usize::from(annulus_circuit_with(&ring, Site::ORIGIN, n, convention)?);
        total += 1;
    }
    Ok(agreement("annulus", agree, total))
}

fn check_menger(samples: u64) -> Result<CheckResult> {
    let s = RandomStream::new(1, "validate/menger");
    let b2 = Rect::ball(Site::ORIGIN, 2);
    let boundary = b2.boundary();
    let mut agree = 0;
    for i in 0..samples {
        let p = [0.45, 0.6, 0.75][(i % 3) as usize];
        let cfg = homogeneous(b2, p, &s.sample(i))?;
        let fast = two_vertex_disjoint_paths(&cfg, Site::ORIGIN, &boundary)?;
        agree += usize::from(fast == disjoint_paths_by_enumeration(&cfg, Site::ORIGIN, &boundary)?);
    }
    Ok(agreement("menger", agree, samples as usize))
}

fn check_clusters() -> Result<CheckResult> {
    let r = Rect::new(Site::ORIGIN, Site::new(2, 2))?;
    let sites: Vec<Site> = r.sites().collect();
    let (agree, total) = exhaustive_count(&r, |cfg| {
        let labels = ClusterLabeling::build(cfg);
        for &a in &sites {
            let reach = bfs_reachable(cfg, a);
            for &b in &sites {
                if labels.connected(a, b)? != reach[r.site_index(b).expect("in rect")] {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    })?;
    Ok(agreement("clusters", agree as usize, total as usize))
}

fn check_duality() -> Result<CheckResult> {
    let r = Rect::new(Site::ORIGIN, Site::new(2, 2))?;
    let mut agree = 0;
    let mut total = 0;
    for axis in [Axis::Horizontal, Axis::Vertical] {
        let (ok, all) = exhaustive_count(&r, |cfg| {
            Ok(rect_crossing(cfg, &r, axis)? != dual_blocking_crossing(cfg, &r, axis)?)
        })?;
        agree += ok;
        total += all;
    }
    // [0, 3] x [0, 2] is self-dual: exactly half of its configurations cross.
    let sd = Rect::new(Site::ORIGIN, Site::new(3, 2))?;
    let (cross, all) = exhaustive_count(&sd, |cfg| rect_crossing(cfg, &sd, Axis::Horizontal))?;
    Ok(CheckResult {
        name: "duality",
        passed: agree == total && 2 * cross == all,
        detail: format!("{agree}/{total} complementary; self-dual crossing {cross}/{all}"),
    })
}

/// At `n = 2` the circuit is the ring of radius 3 and `P(A_2) = p^24`, so
/// both the pivotal sum and a central difference must match `24 p^23`.
fn check_russo(samples: u64) -> Result<CheckResult> {
    let p: f64 = 0.93;
    let h = 0.01;
    let exact = 24.0 * p.powi(23);
    let cols = ColumnSet::empty(-3, 3);
    let s = RandomStream::new(1, "validate/russo");
    let sums = russo_sums(&cols, p, p, 2, samples, &s)?;
    let piv = sums.s_f.mean() + sums.s_not_f.mean();
    let piv_se = sums.s_not_f.stderr();
    let ev = EventSpec::AnnulusCircuit {
        center: Site::ORIGIN,
        n: 2,
    };
    let source = ColumnSource::Quenched(cols);
    let at = |q: f64| -> Result<u64> {
        Ok(estimate(
            &ev,
            &SamplerParams::homogeneous(q)?,
            &source,
            samples,
            &s.child("fd"),
        )?
        .successes)
    };
    let flips = at(p + h)? - at(p - h)?;
    let scale = samples as f64 * 2.0 * h;
    let fd = flips as f64 / scale;
    let fd_se = (flips as f64).sqrt() / scale;
    let passed = (piv - exact).abs() <= 3.0 * piv_se
        && (fd - exact).abs() <= 3.0 * fd_se.max(f64::EPSILON) + h * h * 24.0 * 23.0 * 22.0;
    Ok(CheckResult {
        name: "russo",
        passed,
        detail: format!("pivotal sum {piv:.4} +- {piv_se:.4}, difference {fd:.4} +- {fd_se:.4}, exact {exact:.4}"),
    })
}

pub fn run_suite(fault: Option<Fault>) -> Result<Vec<CheckResult>> {
    Ok(vec![
        check_annulus(fault, 300)?,
        check_menger(600)?,
        check_clusters()?,
        check_duality()?,
        check_russo(20_000)?,
    ])
}
