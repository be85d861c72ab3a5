use brochette::events::annulus_circuit;
use brochette::lattice::ColumnSet;
use brochette::nearcritical::{run_samples, Proportion};
use brochette::oriented::{reachable_front, sample_oriented, survival_curve, survival_depth};
use brochette::renorm::{
    block_field, column_good, conditional_bound_check, goodness_field, one_dependence_check,
};
use brochette::sampling::sample_config;
use brochette::{
    BlockWindow, OrientedConfig, OrientedParams, OrientedWindow, RandomStream, Rect, SamplerParams,
};

const Z: f64 = 3.0;

#[test]
fn far_blocks_are_uncorrelated() {
    // Circuits are too rare at p = 1/2 for X to vary at this scale.
    let window = BlockWindow::new(4, (0, 4), (0, 0)).unwrap();
    let cols = ColumnSet::empty(-8, 40);
    let params = SamplerParams::homogeneous(0.7).unwrap();
    let stream = RandomStream::new(21, "one-dependence");
    let fields: Vec<_> = (0..50_000)
        .map(|i| block_field(&cols, &window, &params, 0.3, &stream.sample(i)).unwrap())
        .collect();
    let report = one_dependence_check(&fields).unwrap();
    assert_eq!(report.pairs.len(), 3);
    let far = report.max_far_abs.expect("X is not constant");
    assert!(far < 0.02, "far-pair correlation {far}");
    for f in &fields {
        for k in 0..f.x.len() {
            assert!(f.w[k] <= f.x[k]);
            assert_eq!(f.w[k], f.x[k] && f.y[k]);
        }
    }
}

#[test]
fn constant_fields_have_no_correlations() {
    let window = BlockWindow::new(2, (0, 2), (0, 2)).unwrap();
    let cols = ColumnSet::empty(-4, 12);
    let stream = RandomStream::new(22, "constant");
    for p in [0.0, 1.0] {
        let params = SamplerParams::homogeneous(p).unwrap();
        let fields: Vec<_> = (0..10_000)
            .map(|i| block_field(&cols, &window, &params, 0.5, &stream.sample(i)).unwrap())
            .collect();
        let report = one_dependence_check(&fields).unwrap();
        assert!(report.pairs.iter().all(|r| r.r.is_none()));
        assert_eq!(report.max_far_abs, None);
    }
}

#[test]
fn sprinkle_has_the_right_mean() {
    let window = BlockWindow::new(2, (0, 9), (0, 1)).unwrap();
    let cols = ColumnSet::empty(-4, 40);
    let stream = RandomStream::new(23, "sprinkle");
    let params = SamplerParams::homogeneous(1.0).unwrap();
    let mut y = Proportion {
        successes: 0,
        samples: 0,
    };
    for i in 0..1_000 {
        let f = block_field(&cols, &window, &params, 0.5, &stream.sample(i)).unwrap();
        assert_eq!(f.w, f.y);
        y.samples += f.y.len() as u64;
        y.successes += f.y.iter().filter(|&&b| b).count() as u64;
    }
    assert!(y.samples >= 10_000);
    assert!((y.p_hat() - 0.5).abs() < Z * y.stderr(), "{}", y.p_hat());
}

#[test]
fn goodness_is_monotone_in_lambda() {
    let stream = RandomStream::new(24, "goodness-monotone");
    let n = 8;
    for i in 0..200 {
        let s = stream.sample(i);
        let big = brochette::sampling::sample_columns(0.5, -64, 64, &s).unwrap();
        // Remove every column that a second coin rejects.
        let keep = brochette::sampling::sample_columns(0.8, -64, 64, &s.child("keep")).unwrap();
        let members: Vec<bool> = big
            .members()
            .iter()
            .zip(keep.members())
            .map(|(a, b)| *a && *b)
            .collect();
        let small = ColumnSet::from_members(-64, members);
        let g_big = goodness_field(&big, -3, 3, n, 0.5).unwrap();
        let g_small = goodness_field(&small, -3, 3, n, 0.5).unwrap();
        assert!(g_small.iter().zip(&g_big).all(|(a, b)| a <= b));
    }
    assert!(column_good(&ColumnSet::full(-64, 64), 0, n, 0.5).unwrap());
}

#[test]
fn shared_and_separate_blocks_have_equal_marginals() {
    let n = 2;
    let window = BlockWindow::new(n, (0, 1), (0, 1)).unwrap();
    let cols = ColumnSet::empty(-4, 12);
    let params = SamplerParams::homogeneous(0.7).unwrap();
    let stream = RandomStream::new(25, "shared");
    let samples = 20_000u64;
    let shared = run_samples(
        &stream,
        samples,
        |s| {
            Ok(u64::from(
                block_field(&cols, &window, &params, 0.5, s)?
                    .x_at((1, 1))
                    .unwrap(),
            ))
        },
        || 0,
        |a, b| a + b,
    )
    .unwrap();
    let center = window.center((1, 1));
    let own = Rect::ball(center, 2 * n - 1);
    let separate = run_samples(
        &stream.child("separate"),
        samples,
        |s| {
            Ok(u64::from(annulus_circuit(
                &sample_config(&own, &cols, &params, s)?,
                center,
                n,
            )?))
        },
        || 0,
        |a, b| a + b,
    )
    .unwrap();
    let a = Proportion {
        successes: shared,
        samples,
    };
    let b = Proportion {
        successes: separate,
        samples,
    };
    let se = (a.stderr().powi(2) + b.stderr().powi(2)).sqrt();
    assert!(
        (a.p_hat() - b.p_hat()).abs() < Z * se,
        "{} vs {}",
        a.p_hat(),
        b.p_hat()
    );
}

#[test]
fn conditional_bound_trivial_cases() {
    let cols = ColumnSet::empty(-12, 12);
    let stream = RandomStream::new(26, "conditional-trivial");
    let report = conditional_bound_check(
        &cols,
        &SamplerParams::homogeneous(1.0).unwrap(),
        3,
        0.3,
        2_000,
        &stream,
    )
    .unwrap();
    assert!(report.all_hold());
    for row in report.patterns.iter().filter(|r| r.checked) {
        assert!(row.p_hat >= 0.3f64.powi(4) * 0.7);
    }
    assert!(report.partial());
}

#[test]
fn oriented_marginal_occupation() {
    let params = OrientedParams::new(0.4, 0.9, 0.2).unwrap();
    let stream = RandomStream::new(27, "oriented-marginal");
    let window = OrientedWindow::new(20, (-20, 20)).unwrap();
    let mut occ = Proportion {
        successes: 0,
        samples: 0,
    };
    for i in 0..2_000 {
        let cfg = sample_oriented(&params, &window, &stream.sample(i)).unwrap();
        for c in 0..=20u32 {
            for j in -20..=20i64 {
                if window.contains(c, j) {
                    occ.samples += 1;
                    occ.successes += u64::from(cfg.is_occupied(c, j));
                }
            }
        }
    }
    let expect = 0.4 * 0.9 + 0.6 * 0.2;
    // Sites in one column share its class, so the binomial error is too
    // small; use the column count instead.
    let columns = 2_000.0 * 21.0;
    let sd = (0.4 * 0.6 * (0.9f64 - 0.2).powi(2) / columns
        + expect * (1.0 - expect) / occ.samples as f64)
        .sqrt();
    assert!(
        (occ.p_hat() - expect).abs() < Z * sd,
        "{} vs {expect}",
        occ.p_hat()
    );
}

#[test]
fn oriented_survival_is_coupled() {
    let stream = RandomStream::new(28, "oriented-coupling");
    let depth = 60;
    let base = OrientedParams::new(0.5, 0.7, 0.3).unwrap();
    for i in 0..300 {
        let s = stream.sample(i);
        let d0 = survival_depth(&base, depth, &s);
        for up in [
            OrientedParams {
                rho_prime: 0.8,
                ..base
            },
            OrientedParams { p_g: 0.9, ..base },
            OrientedParams { p_b: 0.6, ..base },
        ] {
            assert!(d0 <= survival_depth(&up, depth, &s), "sample {i}");
        }
    }
}

#[test]
fn survival_curve_is_nonincreasing() {
    let params = OrientedParams::homogeneous(0.72).unwrap();
    let curve = survival_curve(
        &params,
        &[0, 10, 50, 100],
        2_000,
        &RandomStream::new(29, "curve"),
    )
    .unwrap();
    assert!(curve
        .windows(2)
        .all(|w| w[0].survived.successes >= w[1].survived.successes));
}

#[test]
fn block_field_feeds_the_oriented_model() {
    let window = BlockWindow::new(2, (-1, 3), (-2, 2)).unwrap();
    let cols = ColumnSet::full(-8, 16);
    let f = block_field(
        &cols,
        &window,
        &SamplerParams::new(1.0, 1.0, 0.5).unwrap(),
        0.1,
        &RandomStream::new(30, "hand-off"),
    )
    .unwrap();
    let o = OrientedConfig::from_block_field(&f).unwrap();
    assert_eq!(o.window.depth, 4);
    for (k, &(v1, v2)) in window.sites().iter().enumerate() {
        assert_eq!(o.is_occupied((v1 + 1) as u32, v2 + 1), f.w[k]);
    }
    assert!(o.good.iter().all(|&g| g));
    let front = reachable_front(&o, &[0]);
    assert_eq!(front.len(), 5);
}
