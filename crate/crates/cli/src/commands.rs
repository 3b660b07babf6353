use std::io::Write;

use tyc_core::analysis::{
    compare_thresholds, find_threshold, kinks, outcome_of, region_map, PointResult, ThresholdCurve, KINK_RATIO,
};
use tyc_core::models::{stability_check, trojan_negativity_trigger, Applicability, ModelSpec};
use tyc_core::ode::{integrate, EventLog, Status};
use tyc_core::pde::{integrate_pde_with, Field, SpatialGrid};

use crate::config::ExperimentConfig;
use crate::output::{create, event_summary, header, num, render, write_curve, write_row};
use crate::{core_exit_code, CliError, EXIT_NUMERICAL, EXIT_OK};

/// Result of a command: text for stdout and the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub stdout: String,
    pub exit: u8,
}

fn finish(
    command: &str,
    model: &ModelSpec<f64>,
    status: Status,
    events: EventLog<f64>,
    t_last: f64,
) -> (String, u8) {
    let (region, exit) = match outcome_of(status, events.clone(), t_last) {
        Ok(o) => (Some(o.region.name()), EXIT_OK),
        Err(_) => (None, EXIT_NUMERICAL),
    };
    let mut kv = vec![
        ("command".to_string(), command.to_string()),
        ("model".to_string(), model.kind().name().to_string()),
    ];
    kv.extend(event_summary(status, region, &events));
    (render(&kv), exit)
}

pub fn simulate(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let model = cfg.model.build()?;
    let icfg = cfg.integrator.build()?;
    let (traj, events) = integrate(&model, &cfg.initial.state(), &icfg)?;

    let species = model.species();
    let mut w = create(&cfg.output.dir, "trajectory.csv")?;
    let mut head = vec!["t".to_string()];
    head.extend(header(species, ""));
    write_row(&mut w, &head)?;
    for (t, x) in traj.times.iter().zip(&traj.states) {
        let mut row = vec![num(*t)];
        row.extend(x.to_vec().into_iter().map(num));
        write_row(&mut w, &row)?;
    }
    w.flush()?;

    let t_last = traj.times.last().copied().unwrap_or(0.0);
    let (text, exit) = finish("simulate", &model, traj.status, events, t_last);
    write_summary(cfg, &text)?;
    Ok(Report { stdout: text, exit })
}

pub fn classify(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let model = cfg.model.build()?;
    let icfg = cfg.integrator.build()?;
    let (status, events) = tyc_core::ode::integrate_events(&model, &cfg.initial.state(), &icfg)?;
    let (text, exit) = finish("classify", &model, status, events, icfg.t_end);
    Ok(Report { stdout: text, exit })
}

pub fn pde(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let model = cfg.model.build()?;
    let icfg = cfg.integrator.build()?;
    let sp = &cfg.spatial;
    let grid = SpatialGrid::new(sp.n, sp.boundary.into())?;
    let fields = Field::from_profiles(&grid, &sp.profiles());
    let (traj, events) = integrate_pde_with(&model, &fields, &grid, &icfg, &sp.snapshots)?;

    let species = model.species();
    for (i, (t, field)) in traj.snapshots.iter().enumerate() {
        let mut w = create(&cfg.output.dir, &format!("snapshot_{i:03}.csv"))?;
        let mut head = vec!["t".to_string(), "x".to_string()];
        head.extend(header(species, ""));
        write_row(&mut w, &head)?;
        for node in 0..grid.nodes() {
            let mut row = vec![num(*t), num(grid.x(node))];
            row.extend(field.values.iter().map(|v| num(v[node])));
            write_row(&mut w, &row)?;
        }
        w.flush()?;
    }

    let male = species.iter().position(|s| s.symbol() == "m").expect("every model has males");
    let mut w = create(&cfg.output.dir, "norms.csv")?;
    let mut head = vec!["t".to_string(), "min_m".to_string()];
    head.extend(header(species, "max_"));
    head.extend(header(species, "l1_"));
    write_row(&mut w, &head)?;
    for (t, d) in traj.times.iter().zip(&traj.diagnostics) {
        let mut row = vec![num(*t), num(d.min[male])];
        row.extend(d.max_norm.iter().copied().map(num));
        row.extend(d.l1_norm.iter().copied().map(num));
        write_row(&mut w, &row)?;
    }
    w.flush()?;

    let t_last = traj.times.last().copied().unwrap_or(0.0);
    let (text, exit) = finish("pde", &model, traj.status, events, t_last);
    write_summary(cfg, &text)?;
    Ok(Report { stdout: text, exit })
}

fn write_summary(cfg: &ExperimentConfig, text: &str) -> Result<(), CliError> {
    let mut w = create(&cfg.output.dir, "summary.txt")?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn curve_failures(curve: &ThresholdCurve<f64>) -> Vec<String> {
    curve
        .failures()
        .map(|p| match &p.result {
            PointResult::Failed(e) => format!("failed.{}.{}={e}", curve.boundary.name(), num(p.f0m0)),
            _ => unreachable!("failures() yields failed points"),
        })
        .collect()
}

fn all_failed(curves: &[&ThresholdCurve<f64>]) -> bool {
    curves
        .iter()
        .all(|c| c.points.iter().all(|p| matches!(p.result, PointResult::Failed(_))))
}

pub fn threshold(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let model = cfg.model.build()?;
    let icfg = cfg.integrator.build()?;
    let a = &cfg.analysis;
    let boundary = a.boundary.into();
    let r = find_threshold(&model, a.f0m0, a.axis.into(), boundary, &a.search(), &icfg);
    let result = PointResult::from_search(r, boundary);

    let curve = ThresholdCurve {
        axis: a.axis.into(),
        boundary,
        points: vec![tyc_core::analysis::ThresholdPoint {
            f0m0: a.f0m0,
            result: result.clone(),
        }],
    };
    let mut w = create(&cfg.output.dir, "thresholds.csv")?;
    write_row(&mut w, &["f0m0".into(), "critical".into(), "boundary".into()])?;
    write_curve(&mut w, &curve)?;
    w.flush()?;

    let mut kv = vec![
        ("command".to_string(), "threshold".to_string()),
        ("model".to_string(), model.kind().name().to_string()),
        ("axis".to_string(), curve.axis.name().to_string()),
        ("boundary".to_string(), boundary.name().to_string()),
        ("f0m0".to_string(), a.f0m0.to_string()),
    ];
    let exit = match &result {
        PointResult::Found(th) => {
            kv.push(("critical".into(), th.value.to_string()));
            kv.push(("below".into(), format!("{}:{}", th.below.0, th.below.1)));
            kv.push(("above".into(), format!("{}:{}", th.above.0, th.above.1)));
            EXIT_OK
        }
        PointResult::Absent => {
            kv.push(("critical".into(), "absent".into()));
            EXIT_OK
        }
        PointResult::Failed(e) => {
            kv.push(("critical".into(), "failed".into()));
            kv.push(("error".into(), e.to_string()));
            core_exit_code(e)
        }
    };
    Ok(Report { stdout: render(&kv), exit })
}

pub fn regionmap(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let model = cfg.model.build()?;
    let icfg = cfg.integrator.build()?;
    let a = &cfg.analysis;
    let map = region_map(&model, (a.range[0], a.range[1]), a.axis.into(), a.resolution, &a.search(), &icfg)?;

    let mut w = create(&cfg.output.dir, "thresholds.csv")?;
    write_row(&mut w, &["f0m0".into(), "critical".into(), "boundary".into()])?;
    write_curve(&mut w, &map.lower)?;
    write_curve(&mut w, &map.upper)?;
    w.flush()?;

    let mut lines = vec![
        "command=regionmap".to_string(),
        format!("model={}", model.kind().name()),
        format!("axis={}", map.lower.axis.name()),
        format!("points={}", map.lower.points.len()),
        format!("upper_absent={}", map.upper.is_absent()),
    ];
    lines.extend(curve_failures(&map.lower));
    lines.extend(curve_failures(&map.upper));
    let exit = if all_failed(&[&map.lower, &map.upper]) {
        EXIT_NUMERICAL
    } else {
        EXIT_OK
    };
    Ok(Report {
        stdout: lines.join("\n") + "\n",
        exit,
    })
}

pub fn compare(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let mut models = vec![cfg.model.build()?];
    for m in &cfg.analysis.compare {
        models.push(m.build()?);
    }
    let icfg = cfg.integrator.build()?;
    let a = &cfg.analysis;
    let cmp = compare_thresholds(&models, a.axis.into(), (a.range[0], a.range[1]), a.resolution, &a.search(), &icfg)?;

    let mut w = create(&cfg.output.dir, "comparison.csv")?;
    write_row(
        &mut w,
        &["model".into(), "f0m0".into(), "critical".into(), "boundary".into(), "kink".into()],
    )?;
    let mut lines = vec!["command=compare".to_string(), format!("axis={}", cmp.axis.name())];
    for (i, e) in cmp.entries.iter().enumerate() {
        // disambiguate repeated kinds by position
        let label = format!("{}#{i}", e.kind.name());
        for curve in [&e.map.lower, &e.map.upper] {
            let flagged = if std::ptr::eq(curve, &e.map.lower) {
                e.kinks.clone()
            } else {
                kinks(curve, KINK_RATIO)
            };
            for p in &curve.points {
                write_row(
                    &mut w,
                    &[
                        label.clone(),
                        num(p.f0m0),
                        crate::output::threshold_cell(&p.result),
                        curve.boundary.name().into(),
                        flagged.contains(&p.f0m0).to_string(),
                    ],
                )?;
            }
        }
        let ks: Vec<String> = e.kinks.iter().map(|k| k.to_string()).collect();
        lines.push(format!(
            "kinks.{label}={}",
            if ks.is_empty() { "none".to_string() } else { ks.join(",") }
        ));
        lines.push(format!("decreasing.{label}={}", e.map.lower.is_decreasing()));
        lines.push(format!("upper_absent.{label}={}", e.map.upper.is_absent()));
        lines.extend(curve_failures(&e.map.lower));
        lines.extend(curve_failures(&e.map.upper));
    }
    w.flush()?;
    let every: Vec<&ThresholdCurve<f64>> = cmp.entries.iter().flat_map(|e| [&e.map.lower, &e.map.upper]).collect();
    let exit = if all_failed(&every) { EXIT_NUMERICAL } else { EXIT_OK };
    Ok(Report {
        stdout: lines.join("\n") + "\n",
        exit,
    })
}

pub fn stability(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let p = cfg.model.physical()?;
    let rep = stability_check(&p)?;
    let flag = |b: Option<bool>| b.map_or("n/a".to_string(), |v| v.to_string());
    let mut kv = vec![
        ("command".to_string(), "stability".to_string()),
        ("criterion".to_string(), rep.criterion_value.to_string()),
    ];
    match rep.applicability {
        Applicability::Applicable => kv.push(("applicable".into(), "true".into())),
        Applicability::Inapplicable { ratio, bound } => {
            kv.push(("applicable".into(), "false".into()));
            kv.push(("delta_over_beta".into(), ratio.to_string()));
            kv.push(("capacity_over_16".into(), bound.to_string()));
        }
    }
    kv.push(("trojan_state_stable".into(), flag(rep.trojan_state_stable)));
    kv.push(("extinction_stable".into(), flag(rep.extinction_stable)));
    kv.push(("jacobian_stable".into(), rep.jacobian_stable.to_string()));
    let eig: Vec<String> = rep.eigenvalues.iter().map(|(re, im)| format!("{re}{im:+}i")).collect();
    kv.push(("eigenvalues".into(), eig.join(";")));
    kv.push(("agrees".into(), rep.agrees().to_string()));
    kv.push(("negativity_trigger_mu".into(), trojan_negativity_trigger(&p).to_string()));
    Ok(Report {
        stdout: render(&kv),
        exit: EXIT_OK,
    })
}

/// Effective configuration after overrides, as JSON.
pub fn show_config(cfg: &ExperimentConfig) -> Report {
    Report {
        stdout: cfg.to_json() + "\n",
        exit: EXIT_OK,
    }
}
