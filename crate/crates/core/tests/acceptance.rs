//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
//!
//! Runs without the libtest harness so the report is always printed.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tyc_core::analysis::{
    classify, find_threshold, region_map, Axis, Region, RegionBoundary, Search,
};
use tyc_core::models::{
    stability_check, threshold_f0, threshold_mu, DimensionalParams, DimensionlessParams, ModelKind,
    ModelSpec, Params, StateVector,
};
use tyc_core::ode::{integrate, integrate_events, IntegratorConfig, Status};
use tyc_core::pde::{integrate_pde, laplacian, Boundary, Field, Profile, SpatialGrid};

const R: f64 = 17.8125;

// 1
const C1_T_BLOWUP: f64 = 0.18;
const C1_T_TOL: f64 = 0.02;
const C1_BUDGET: Duration = Duration::from_secs(1);
// 2
const C2_S_STAR: f64 = 0.9194;
const C2_TOL: f64 = 0.01;
const C2_BUDGET: Duration = Duration::from_secs(30);
// 3
const C3_T_BLOWUP: f64 = 0.1899399;
const C3_TOL: f64 = 0.005;
const C3_BUDGET: Duration = Duration::from_secs(60);
// 4
const C4_T_BLOWUP: f64 = 0.1901902;
const C4_TOL: f64 = 0.005;
const C4_BUDGET: Duration = Duration::from_secs(60);
// 5
const C5_MAX_SPREAD: f64 = 0.05;
const C5_BUDGET: Duration = Duration::from_secs(300);
// 6
const C6_RESOLUTION: usize = 9;
// 7
const C7_ALLEE: f64 = 0.05;
const C7_RESOLUTION: usize = 9;
const C7_S0_SCAN: usize = 41;
const C7_S0_MAX: f64 = 10.0;
// 8
const C8_PDE_FACTOR: f64 = 100.0;
const C8_S_FACTOR: f64 = 10.0;
const C8_N: usize = 199;
const C8_N_EXACT: usize = 255;
// 9
const C9_FORMULA_TOL: f64 = 1e-12;
const C9_SAMPLES: usize = 200;
const C9_MIN_AGREEMENT: f64 = 0.95;
const C9_ZERO_SET: f64 = 1e-6;
const C9_SEED: u64 = 0x7c9;
// 10
const C10_ICS: usize = 32;
const C10_SEED: u64 = 0x7c10;
const C10_BUDGET: Duration = Duration::from_secs(60);

const SEARCH_TOL: f64 = 1e-4;

type Check = Result<String, String>;

fn cfg() -> IntegratorConfig<f64> {
    IntegratorConfig::default()
}

fn classic3(gamma: f64) -> ModelSpec<f64> {
    ModelSpec::classic3(DimensionlessParams::new(R, gamma).unwrap()).unwrap()
}

fn classic3_diffusive(d: f64) -> ModelSpec<f64> {
    ModelSpec::classic3(DimensionlessParams::new(R, 0.0).unwrap().with_diffusion(d).unwrap()).unwrap()
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within_budget(elapsed: Duration, budget: Duration, what: &str) -> Result<(), String> {
    ensure(
        elapsed <= budget,
        format!("{what} took {:.2?}, budget {:.0?}", elapsed, budget),
    )
}

fn criterion_1() -> Check {
    let m = classic3(0.0);
    let cases = [
        ((0.3, 0.3, 0.1), Region::Positive),
        ((0.3, 0.3, 2.5), Region::NegativeNoBlowup),
        ((0.4, 0.4, 2.5), Region::Blowup),
    ];
    let mut t_blow = None;
    for ((f, mm, s), want) in cases {
        let t0 = Instant::now();
        let out = classify(&m, &StateVector::new(f, mm, s), &cfg()).map_err(|e| e.to_string())?;
        within_budget(t0.elapsed(), C1_BUDGET, "classify")?;
        ensure(out.region == want, format!("({f},{mm},{s}) -> {} expected {}", out.region, want))?;
        if let Some(b) = out.events.blowup {
            t_blow = Some(b.t_estimate);
        }
    }
    let t = t_blow.ok_or("no blow-up record")?;
    ensure(
        (t - C1_T_BLOWUP).abs() <= C1_T_TOL,
        format!("t_estimate {t} outside {C1_T_BLOWUP} ± {C1_T_TOL}"),
    )?;
    Ok(format!("regions as expected, t_estimate = {t:.6}"))
}

fn criterion_2() -> Check {
    let t0 = Instant::now();
    let search = Search::default().with_bracket(0.0, 2.0);
    let th = find_threshold(&classic3(0.0), 0.3, Axis::InitialSupermale, RegionBoundary::Region12, &search, &cfg())
        .map_err(|e| e.to_string())?;
    within_budget(t0.elapsed(), C2_BUDGET, "find_threshold")?;
    ensure(
        (th.value - C2_S_STAR).abs() <= C2_TOL,
        format!("s* = {} outside {C2_S_STAR} ± {C2_TOL}", th.value),
    )?;
    Ok(format!("s* = {:.6} ({:.2?})", th.value, t0.elapsed()))
}

fn pde_run(
    fields: &[Profile<f64>],
    bc: Boundary,
    budget: Duration,
) -> Result<(Status, Option<f64>, bool), String> {
    let grid = SpatialGrid::new(C8_N, bc).unwrap();
    let f = Field::from_profiles(&grid, fields);
    let t0 = Instant::now();
    let (traj, ev) = integrate_pde(&classic3_diffusive(0.01), &f, &grid, &cfg()).map_err(|e| e.to_string())?;
    within_budget(t0.elapsed(), budget, "PDE run")?;
    Ok((traj.status, ev.blowup.map(|b| b.t_estimate), ev.any_negativity()))
}

fn pde_pair(blow: &[Profile<f64>], neg: &[Profile<f64>], bc: Boundary, target: f64, tol: f64, budget: Duration) -> Check {
    let (status, t, _) = pde_run(blow, bc, budget)?;
    ensure(status == Status::BlowupDetected, format!("blow-up case ended {}", status.name()))?;
    let t = t.ok_or("blow-up without record")?;
    let (status2, _, neg2) = pde_run(neg, bc, budget)?;
    ensure(
        status2 == Status::CompletedHorizon && neg2,
        format!("negativity case ended {} (negativity {neg2})", status2.name()),
    )?;
    ensure(
        (t - target).abs() <= tol,
        format!("blow-up t = {t:.7} outside {target} ± {tol} (negativity case OK)"),
    )?;
    Ok(format!("blow-up t = {t:.7}; negativity case bounded"))
}

fn criterion_3() -> Check {
    let c = Profile::Constant;
    pde_pair(
        &[c(0.3), c(0.3), c(2.75)],
        &[c(0.3), c(0.3), c(2.5)],
        Boundary::NeumannHomogeneous,
        C3_T_BLOWUP,
        C3_TOL,
        C3_BUDGET,
    )
}

fn criterion_4() -> Check {
    let p = Profile::Parabola;
    pde_pair(
        &[p, p, Profile::ScaledParabola { s_max: 3.0 }],
        &[p, p, Profile::ScaledParabola { s_max: 2.0 }],
        Boundary::DirichletHomogeneous,
        C4_T_BLOWUP,
        C4_TOL,
        C4_BUDGET,
    )
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::MIN, f64::max);
    let min = values.iter().copied().fold(f64::MAX, f64::min);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (max - min) / mean
}

fn criterion_5() -> Check {
    let t0 = Instant::now();
    let map = region_map(&classic3(0.0), (0.1, 0.5), Axis::IntroductionRate, 5, &Search::default(), &cfg())
        .map_err(|e| e.to_string())?;
    within_budget(t0.elapsed(), C5_BUDGET, "γ region map")?;
    let lower: Vec<f64> = map.lower.found().into_iter().map(|p| p.1).collect();
    let upper: Vec<f64> = map.upper.found().into_iter().map(|p| p.1).collect();
    ensure(lower.len() == 5 && upper.len() == 5, "missing γ thresholds")?;
    let (a, b) = (spread(&lower), spread(&upper));
    ensure(a < C5_MAX_SPREAD, format!("γ* spread {:.3}%", a * 100.0))?;
    ensure(b < C5_MAX_SPREAD, format!("γ** spread {:.3}%", b * 100.0))?;
    Ok(format!("γ* spread {:.3}%, γ** spread {:.3}%", a * 100.0, b * 100.0))
}

fn side_ok(model: &ModelSpec<f64>, f0m0: f64, value: f64, boundary: RegionBoundary) -> Result<(), String> {
    let at = |s0: f64| -> Result<Region, String> {
        classify(model, &StateVector::new(f0m0, f0m0, s0), &cfg())
            .map(|o| o.region)
            .map_err(|e| e.to_string())
    };
    let (lo, hi) = (at(value - SEARCH_TOL)?, at(value + SEARCH_TOL)?);
    ensure(
        !boundary.above(lo) && boundary.above(hi),
        format!("{} at f0m0={f0m0}: classify(c-tol)={lo}, classify(c+tol)={hi}", boundary.name()),
    )
}

fn criterion_6() -> Check {
    let m = classic3(0.0);
    let map = region_map(&m, (0.1, 0.5), Axis::InitialSupermale, C6_RESOLUTION, &Search::default(), &cfg())
        .map_err(|e| e.to_string())?;
    let (lo, hi) = (map.lower.found(), map.upper.found());
    ensure(
        lo.len() == C6_RESOLUTION && hi.len() == C6_RESOLUTION,
        format!("found {} s* and {} s** of {C6_RESOLUTION}", lo.len(), hi.len()),
    )?;
    for (a, b) in lo.iter().zip(&hi) {
        ensure(a.1 < b.1, format!("s* {} >= s** {} at {}", a.1, b.1, a.0))?;
        side_ok(&m, a.0, a.1, RegionBoundary::Region12)?;
        side_ok(&m, b.0, b.1, RegionBoundary::Region23)?;
    }
    Ok(format!(
        "{C6_RESOLUTION} points, s* in [{:.4}, {:.4}], s** in [{:.4}, {:.4}], all verified",
        lo.last().unwrap().1,
        lo[0].1,
        hi.last().unwrap().1,
        hi[0].1
    ))
}

fn criterion_7() -> Check {
    let base = DimensionlessParams::new(R, 0.0).unwrap();
    let allee = ModelSpec::new(ModelKind::ModifiedAllee, Params::Dimensionless(base.with_allee(C7_ALLEE).unwrap())).unwrap();
    let no_allee = ModelSpec::new(ModelKind::ModifiedNoAllee, Params::Dimensionless(base)).unwrap();
    let mut detail = Vec::new();
    for m in [allee, no_allee] {
        let map = region_map(&m, (0.1, 0.5), Axis::InitialSupermale, C7_RESOLUTION, &Search::default(), &cfg())
            .map_err(|e| e.to_string())?;
        let found = map.lower.found().len();
        ensure(found == C7_RESOLUTION, format!("{}: R1/2 found at {found}/{C7_RESOLUTION}", m.kind().name()))?;
        ensure(map.upper.is_absent(), format!("{}: R2/3 curve not absent", m.kind().name()))?;
        if m.kind() == ModelKind::ModifiedNoAllee {
            ensure(map.lower.is_decreasing(), "modified_no_allee s* not decreasing")?;
        }
        let mut collapsed = 0;
        for p in &map.lower.points {
            for k in 0..C7_S0_SCAN {
                let s0 = C7_S0_MAX * k as f64 / (C7_S0_SCAN - 1) as f64;
                let (status, _) =
                    integrate_events(&m, &StateVector::new(p.f0m0, p.f0m0, s0), &cfg()).map_err(|e| e.to_string())?;
                ensure(
                    status != Status::BlowupDetected,
                    format!("{}: blow-up at f0m0={}, s0={s0}", m.kind().name(), p.f0m0),
                )?;
                if status == Status::StepCollapse {
                    collapsed += 1;
                }
            }
        }
        detail.push(format!(
            "{}: {found} s* points, no blow-up in {} runs ({collapsed} stalled at m+s=0)",
            m.kind().name(),
            C7_RESOLUTION * C7_S0_SCAN
        ));
    }
    Ok(detail.join("; "))
}

fn criterion_8() -> Check {
    let c = cfg();
    // constant-IC Neumann PDE versus the point model, for two diffusivities
    let x0 = (0.3, 0.3, 2.5);
    let (ode, _) = integrate(&classic3(0.0), &StateVector::new(x0.0, x0.1, x0.2), &c).map_err(|e| e.to_string())?;
    let tol = C8_PDE_FACTOR * (c.abs_tol + c.rel_tol);
    let mut worst = 0.0f64;
    for d in [0.01, 1.0] {
        let grid = SpatialGrid::new(C8_N, Boundary::NeumannHomogeneous).unwrap();
        let prof = [Profile::Constant(x0.0), Profile::Constant(x0.1), Profile::Constant(x0.2)];
        let (pde, _) = integrate_pde(&classic3_diffusive(d), &Field::from_profiles(&grid, &prof), &grid, &c)
            .map_err(|e| e.to_string())?;
        let mut matched = 0;
        let mut j = 0;
        for (i, &t) in pde.times.iter().enumerate() {
            while j < ode.times.len() && ode.times[j] < t {
                j += 1;
            }
            if j == ode.times.len() || ode.times[j] != t {
                continue;
            }
            matched += 1;
            let want = ode.states[j].to_vec();
            let diag = &pde.diagnostics[i];
            for k in 0..3 {
                let dev = (diag.min[k] - want[k]).abs().max((diag.max_norm[k] - want[k].abs()).abs());
                worst = worst.max(dev);
            }
        }
        let grid_samples = (c.t_end / c.sample_dt).round() as usize;
        ensure(matched >= grid_samples, format!("D={d}: only {matched} shared samples"))?;
    }
    ensure(worst <= tol, format!("PDE/ODE deviation {worst:e} > {tol:e}"))?;

    // s(t) closed form
    let (gamma, s0) = (0.7, 2.5);
    let (traj, _) = integrate(&classic3(gamma), &StateVector::new(0.3, 0.3, s0), &c).map_err(|e| e.to_string())?;
    let mut s_ratio = 0.0f64;
    for (t, x) in traj.times.iter().zip(&traj.states) {
        let exact = gamma + (s0 - gamma) * (-t).exp();
        let bound = C8_S_FACTOR * (c.abs_tol + c.rel_tol * x.s.abs());
        s_ratio = s_ratio.max((x.s - exact).abs() / bound);
    }
    ensure(s_ratio <= 1.0, format!("s(t) error reaches {s_ratio:.3} of its bound"))?;

    // central differences are exact on quadratics; with h a power of two so is the arithmetic
    let grid = SpatialGrid::<f64>::new(C8_N_EXACT, Boundary::DirichletHomogeneous).unwrap();
    let u: Vec<f64> = (1..=C8_N_EXACT).map(|i| grid.x(i) * (1.0 - grid.x(i))).collect();
    let lap = laplacian(&u, &grid).map_err(|e| e.to_string())?;
    ensure(lap.iter().all(|&v| v == -2.0), "Laplacian of x(1-x) not exactly -2")?;

    Ok(format!(
        "PDE/ODE max dev {worst:.2e} (tol {tol:.0e}); s(t) error at {:.1e} of bound; Laplacian exact on n={C8_N_EXACT}",
        s_ratio
    ))
}

fn criterion_9() -> Check {
    let unit = DimensionalParams::<f64>::new(1.0, 1.0, 1.0, 0.0).unwrap();
    let f0 = threshold_f0(1.0, 1.0, &unit).map_err(|e| e.to_string())?;
    let mu = threshold_mu(1.0, &unit).map_err(|e| e.to_string())?;
    ensure((f0 - 4.0).abs() <= C9_FORMULA_TOL, format!("threshold_f0 = {f0}"))?;
    ensure((mu - 3.0).abs() <= C9_FORMULA_TOL, format!("threshold_mu = {mu}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(C9_SEED);
    let (mut n, mut agree) = (0usize, 0usize);
    while n < C9_SAMPLES {
        let beta: f64 = rng.random_range(0.1..10.0);
        let delta: f64 = rng.random_range(0.1..10.0);
        let k: f64 = rng.random_range(1.0..1000.0);
        let mu: f64 = rng.random_range(0.0..2.0 * delta * k);
        let rep = stability_check(&DimensionalParams::new(beta, delta, k, mu).unwrap()).map_err(|e| e.to_string())?;
        if rep.criterion_value.abs() < C9_ZERO_SET * beta * k * delta * mu {
            continue;
        }
        n += 1;
        agree += usize::from(rep.agrees());
    }
    let rate = agree as f64 / n as f64;
    ensure(rate >= C9_MIN_AGREEMENT, format!("criterion/Jacobian agreement {agree}/{n}"))?;
    Ok(format!("f0 = {f0}, mu* = {mu}; stability agreement {agree}/{n}"))
}

fn criterion_10() -> Check {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(C10_SEED);
    let mut tally = [0usize; 3];
    let mut first_positive = None;
    for _ in 0..C10_ICS {
        let beta: f64 = rng.random_range(0.5..2.0);
        let delta: f64 = rng.random_range(0.5..2.0);
        let k: f64 = rng.random_range(1.0..10.0);
        let mu = delta * k * rng.random_range(1.01..3.0);
        let p = DimensionalParams::new(beta, delta, k, mu).unwrap();
        let model = ModelSpec::new(ModelKind::Classic3, Params::Dimensional(p)).unwrap();
        let x0 = StateVector::new(
            rng.random_range(0.01..1.0) * k,
            rng.random_range(0.01..1.0) * k,
            rng.random_range(0.0..1.0) * k,
        );
        let region = classify(&model, &x0, &cfg()).map_err(|e| e.to_string())?.region;
        if region == Region::Positive && first_positive.is_none() {
            first_positive = Some(format!("β={beta:.4} δ={delta:.4} K={k:.4} μ={mu:.4} x0=({:.4},{:.4},{:.4})", x0.f, x0.m, x0.s));
        }
        tally[region as usize] += 1;
    }
    within_budget(t0.elapsed(), C10_BUDGET, "trigger runs")?;
    let counts = format!(
        "{C10_ICS} ICs with μ > δK: {} Positive, {} NegativeNoBlowup, {} Blowup",
        tally[0], tally[1], tally[2]
    );
    match first_positive {
        None => Ok(counts),
        Some(ic) => Err(format!("{counts}; first Positive at {ic}")),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("ODE region reproduction", criterion_1),
        ("s* at f0=m0=0.3", criterion_2),
        ("Neumann PDE reproduction", criterion_3),
        ("Dirichlet PDE reproduction", criterion_4),
        ("γ-threshold flatness", criterion_5),
        ("region-map shape", criterion_6),
        ("modified-model properties", criterion_7),
        ("oracle equivalences", criterion_8),
        ("closed-form checks", criterion_9),
        ("negativity trigger μ > δK", criterion_10),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let result = check();
        let secs = t0.elapsed().as_secs_f64();
        match result {
            Ok(msg) => println!("criterion {:>2} PASS  {name}: {msg} [{secs:.2}s]", i + 1),
            Err(msg) => {
                println!("criterion {:>2} FAIL  {name}: {msg} [{secs:.2}s]", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
