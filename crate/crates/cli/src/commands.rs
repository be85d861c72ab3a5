use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use brochette::nearcritical::{
    correlation_length, estimate, russo_sums, sweep, ColumnSource, LengthOutcome, SweepAxis,
};
use brochette::oriented::survival_curve;
use brochette::renorm::{
    bad_column_frequency, block_field, conditional_bound_check, one_dependence_check,
    theorem_parameters,
};
use brochette::sampling::sample_columns;
use brochette::{BlockWindow, EventSpec, OrientedParams, RandomStream, Rect, SamplerParams};

use crate::config::{Axis, ColumnMode, ExperimentConfig, RenormCheck};
use crate::output::{build_id, Row};

/// The sampling subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Estimate,
    Sweep,
    Length,
    Russo,
    Renorm,
    Oriented,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Estimate => "estimate",
            Task::Sweep => "sweep",
            Task::Length => "length",
            Task::Russo => "russo",
            Task::Renorm => "renorm",
            Task::Oriented => "oriented",
        }
    }
}

/// Run `task` on the current rayon pool. Rows come back in grid order
/// and carry the experiment id, seed and build id.
pub fn run_task(task: Task, cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let mut rows =
        if cfg.samples == 0 && !matches!((task, cfg.check), (Task::Renorm, RenormCheck::Theorem)) {
            Vec::new()
        } else {
            match task {
                Task::Estimate => run_estimate(cfg)?,
                Task::Sweep => run_sweep(cfg)?,
                Task::Length => run_length(cfg)?,
                Task::Russo => run_russo(cfg)?,
                Task::Renorm => run_renorm(cfg)?,
                Task::Oriented => run_oriented(cfg)?,
            }
        };
    for r in &mut rows {
        r.experiment_id = cfg.experiment_id.clone();
        r.seed = cfg.seed;
        r.command = task.name().to_string();
        r.build = build_id();
        if !cfg.timing {
            r.wall_time_ms = None;
        }
    }
    Ok(rows)
}

fn stream(cfg: &ExperimentConfig) -> RandomStream {
    RandomStream::new(cfg.seed, &cfg.experiment_id)
}

fn params(cfg: &ExperimentConfig) -> Result<SamplerParams> {
    Ok(SamplerParams::new(cfg.p, cfg.q, cfg.rho)?)
}

/// Columns for a run over `regions`. A quenched set is drawn once from the
/// `lambda` child stream over the union of their x-spans.
fn column_source(cfg: &ExperimentConfig, regions: &[Rect]) -> Result<ColumnSource> {
    Ok(match cfg.columns {
        ColumnMode::Annealed => ColumnSource::Annealed,
        ColumnMode::Quenched => {
            let lo = regions
                .iter()
                .map(|r| r.lo().x)
                .min()
                .context("no regions")?;
            let hi = regions
                .iter()
                .map(|r| r.hi().x)
                .max()
                .context("no regions")?;
            ColumnSource::Quenched(sample_columns(
                cfg.rho,
                lo,
                hi,
                &stream(cfg).child("lambda"),
            )?)
        }
    })
}

fn run_estimate(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let event = cfg.event_spec()?;
    let source = column_source(cfg, &[event.region()?])?;
    let rec = estimate(&event, &params(cfg)?, &source, cfg.samples, &stream(cfg))?;
    Ok(vec![Row::from_record(&rec)])
}

fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let event = cfg.event_spec()?;
    if cfg.grid.is_empty() {
        bail!("field `grid` is empty");
    }
    let regions = if cfg.axis == Axis::N {
        cfg.grid
            .iter()
            .map(|&v| Ok(event.rescaled(v as u32)?.region()?))
            .collect::<Result<Vec<_>>>()?
    } else {
        vec![event.region()?]
    };
    if cfg.axis == Axis::Rho && cfg.columns == ColumnMode::Quenched {
        bail!("a rho sweep needs annealed columns");
    }
    let source = column_source(cfg, &regions)?;
    let axis: SweepAxis = cfg.axis.into();
    let recs = sweep(
        axis,
        &cfg.grid,
        &event,
        &params(cfg)?,
        &source,
        cfg.samples,
        &stream(cfg),
    )?;
    Ok(recs.iter().map(Row::from_record).collect())
}

fn run_length(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let s = stream(cfg);
    let res = correlation_length(cfg.p, cfg.epsilon, cfg.n_max, cfg.samples, &s)?;
    let mut rows: Vec<Row> = res
        .curve
        .iter()
        .map(|c| Row {
            event: EventSpec::HardCrossing { n: c.n }.to_string(),
            n: Some(c.n),
            p: Some(cfg.p),
            q: Some(cfg.p),
            rho: Some(0.0),
            samples: c.estimate.samples,
            successes: Some(c.estimate.successes),
            p_hat: Some(c.estimate.p_hat()),
            stderr: Some(c.estimate.stderr()),
            columns: "annealed".into(),
            stream_key: s.child(&format!("n={}", c.n)).key(),
            quantity: "curve".into(),
            ..Row::default()
        })
        .collect();
    let (n, value) = match res.length {
        LengthOutcome::Found(l) => (Some(l), l.to_string()),
        LengthOutcome::NotFound(m) => (None, format!("not-found:{m}")),
    };
    rows.push(Row {
        event: "hard".into(),
        n,
        p: Some(cfg.p),
        q: Some(cfg.p),
        rho: Some(0.0),
        samples: cfg.samples,
        quantity: format!("L_eps={}", cfg.epsilon),
        value,
        ..Row::default()
    });
    Ok(rows)
}

fn run_russo(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let n = match cfg.n {
        Some(n) => n,
        None => cfg.event_spec()?.scale().context("russo needs `n`")?,
    };
    if n < 2 {
        bail!("field `n`: russo needs n >= 2");
    }
    let s = stream(cfg);
    let reach = 2 * i64::from(n) - 1;
    let lambda = sample_columns(cfg.rho, -reach, reach, &s.child("lambda"))?;
    let sums = russo_sums(&lambda, cfg.p, cfg.q, n, cfg.samples, &s)?;
    let event = EventSpec::AnnulusCircuit {
        center: brochette::Site::ORIGIN,
        n,
    }
    .to_string();
    let base = Row {
        event,
        n: Some(n),
        p: Some(cfg.p),
        q: Some(cfg.q),
        rho: Some(cfg.rho),
        samples: cfg.samples,
        columns: format!(
            "quenched:{}..{}:{}",
            lambda.lo(),
            lambda.hi(),
            lambda.count()
        ),
        stream_key: s.sample(0).key(),
        ..Row::default()
    };
    Ok(vec![
        Row {
            p_hat: Some(sums.s_f.mean()),
            stderr: Some(sums.s_f.stderr()),
            quantity: "S_F".into(),
            value: format!("edges={}", sums.enhanced),
            ..base.clone()
        },
        Row {
            p_hat: Some(sums.s_not_f.mean()),
            stderr: Some(sums.s_not_f.stderr()),
            quantity: "S_notF".into(),
            value: format!("edges={}", sums.edges.len() - sums.enhanced),
            ..base.clone()
        },
        Row {
            successes: Some(sums.event.successes),
            p_hat: Some(sums.event.p_hat()),
            stderr: Some(sums.event.stderr()),
            quantity: "P(A_n)".into(),
            ..base
        },
    ])
}

fn run_renorm(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let s = stream(cfg);
    let n = cfg.n.unwrap_or(4);
    let base = Row {
        n: Some(n),
        p: Some(cfg.p),
        q: Some(cfg.q),
        rho: Some(cfg.rho),
        eta: Some(cfg.eta),
        samples: cfg.samples,
        stream_key: s.sample(0).key(),
        ..Row::default()
    };
    match cfg.check {
        RenormCheck::BadColumns => {
            let prop = bad_column_frequency(cfg.rho, n, cfg.samples, &s)?;
            Ok(vec![Row {
                event: "bad-column:i=0".into(),
                p: None,
                q: None,
                eta: None,
                columns: "annealed".into(),
                successes: Some(prop.successes),
                p_hat: Some(prop.p_hat()),
                stderr: Some(prop.stderr()),
                quantity: "bad_fraction".into(),
                value: format!("bound={}", 1.0 / f64::from(n)),
                ..base
            }])
        }
        RenormCheck::Conditional => {
            let window = BlockWindow::new(n, (-1, 1), (-1, 1))?;
            let (lo, hi) = window.column_span();
            let lambda = sample_columns(cfg.rho, lo, hi, &s.child("lambda"))?;
            let report =
                conditional_bound_check(&lambda, &params(cfg)?, n, cfg.eta, cfg.samples, &s)?;
            let columns = format!(
                "quenched:{}..{}:{}",
                lambda.lo(),
                lambda.hi(),
                lambda.count()
            );
            let mut rows = vec![Row {
                event: "W(0)".into(),
                successes: Some(report.w0.successes),
                p_hat: Some(report.w0.p_hat()),
                stderr: Some(report.w0.stderr()),
                columns: columns.clone(),
                quantity: "all_hold".into(),
                value: report.all_hold().to_string(),
                ..base.clone()
            }];
            for r in &report.patterns {
                let status = if !r.checked {
                    "unchecked"
                } else if r.holds {
                    "holds"
                } else {
                    "fails"
                };
                rows.push(Row {
                    event: format!("W(0)|pattern={:04b}", r.pattern),
                    samples: r.occurrences,
                    successes: Some(r.w0_hits),
                    p_hat: (r.occurrences > 0).then_some(r.p_hat),
                    stderr: (r.occurrences > 0).then_some(r.stderr),
                    columns: columns.clone(),
                    quantity: "conditional".into(),
                    value: format!("{status};bound={}", r.bound),
                    ..base.clone()
                });
            }
            Ok(rows)
        }
        RenormCheck::Dependence => {
            let r = cfg.window_radius;
            let window = BlockWindow::new(n, (-r, r), (-r, r))?;
            let (lo, hi) = window.column_span();
            let lambda = sample_columns(cfg.rho, lo, hi, &s.child("lambda"))?;
            let p = params(cfg)?;
            let fields = (0..cfg.samples)
                .into_par_iter()
                .map(|i| block_field(&lambda, &window, &p, cfg.eta, &s.sample(i)))
                .collect::<brochette::Result<Vec<_>>>()?;
            let report = one_dependence_check(&fields)?;
            let fmt_r = |r: Option<f64>| r.map_or("undefined".to_string(), |x| x.to_string());
            let mut rows: Vec<Row> = report
                .pairs
                .iter()
                .map(|pc| Row {
                    event: format!("X({},{})~X({},{})", pc.v.0, pc.v.1, pc.w.0, pc.w.1),
                    quantity: format!("r;dist2={}", pc.dist2),
                    value: fmt_r(pc.r),
                    ..base.clone()
                })
                .collect();
            rows.push(Row {
                event: "X".into(),
                quantity: "max_far_abs_r".into(),
                value: fmt_r(report.max_far_abs),
                ..base
            });
            Ok(rows)
        }
        RenormCheck::Theorem => {
            let t = theorem_parameters(cfg.pc_oriented, cfg.inf_lower_bound)?;
            let event = format!("theorem:pc={};inf={}", cfg.pc_oriented, cfg.inf_lower_bound);
            Ok([("eta", t.eta), ("p_B", t.p_b), ("p_G", t.p_g)]
                .into_iter()
                .map(|(name, v)| Row {
                    event: event.clone(),
                    n: None,
                    p: None,
                    q: None,
                    rho: None,
                    eta: None,
                    samples: 0,
                    stream_key: String::new(),
                    quantity: name.into(),
                    value: v.to_string(),
                    ..base.clone()
                })
                .collect())
        }
    }
}

fn run_oriented(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let s = stream(cfg);
    let params = OrientedParams::new(cfg.rho_prime, cfg.p_g, cfg.p_b)?;
    let curve = survival_curve(&params, &cfg.depths, cfg.samples, &s)?;
    Ok(curve
        .iter()
        .map(|pt| Row {
            event: format!(
                "oriented:depth={};rho_prime={};p_g={};p_b={}",
                pt.depth, cfg.rho_prime, cfg.p_g, cfg.p_b
            ),
            n: Some(pt.depth),
            samples: pt.survived.samples,
            successes: Some(pt.survived.successes),
            p_hat: Some(pt.survived.p_hat()),
            stderr: Some(pt.survived.stderr()),
            stream_key: s.sample(0).key(),
            quantity: "survival".into(),
            ..Row::default()
        })
        .collect())
}
