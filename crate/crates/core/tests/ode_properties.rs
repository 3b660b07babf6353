use proptest::prelude::*;
use tyc_core::models::{DimensionlessParams, ModelSpec, Species, StateVector};
use tyc_core::ode::{integrate, IntegratorConfig, Status};

const R: f64 = 17.8125;

fn classic3(gamma: f64) -> ModelSpec<f64> {
    ModelSpec::classic3(DimensionlessParams::new(R, gamma).unwrap()).unwrap()
}

fn short(t_end: f64) -> IntegratorConfig<f64> {
    IntegratorConfig {
        t_end,
        ..IntegratorConfig::default()
    }
}

fn blowup_time(cfg: &IntegratorConfig<f64>) -> f64 {
    let (traj, ev) = integrate(&classic3(0.0), &StateVector::new(0.4, 0.4, 2.5), cfg).unwrap();
    assert_eq!(traj.status, Status::BlowupDetected);
    ev.blowup.unwrap().t_estimate
}

#[test]
fn blowup_estimate_is_insensitive_to_tolerances_and_cutoff() {
    let base = IntegratorConfig::default();
    let t = blowup_time(&base);
    let tight = blowup_time(&base.with_tolerance_scale(0.5));
    let far = blowup_time(&IntegratorConfig {
        blowup_cutoff: 1e10,
        ..base
    });
    assert!((t - tight).abs() < 1e-3, "{t} vs {tight}");
    assert!((t - far).abs() < 1e-3, "{t} vs {far}");
}

#[test]
fn blowup_run_ends_beyond_cutoff() {
    let cfg = IntegratorConfig::default();
    let (traj, ev) = integrate(&classic3(0.0), &StateVector::new(0.4, 0.4, 2.5), &cfg).unwrap();
    let b = ev.blowup.unwrap();
    let last = traj.states.last().unwrap();
    let peak = last.to_vec().into_iter().fold(0.0f64, |a, v| a.max(v.abs()));
    assert!(peak >= cfg.blowup_cutoff, "peak {peak}");
    assert!(b.t_cutoff.is_some());
    assert!(b.t_estimate <= *traj.times.last().unwrap() + 1e-12);
}

#[test]
fn single_precision_path_classifies_like_double() {
    let p = DimensionlessParams::<f32>::new(17.8125, 0.0).unwrap();
    let m = ModelSpec::classic3(p).unwrap();
    let cfg = IntegratorConfig::<f32> {
        abs_tol: 1e-5,
        rel_tol: 1e-5,
        h_min: 1e-7,
        t_end: 5.0,
        // steps stall near |f| ~ 1e3 in single precision
        blowup_cutoff: 1e5,
        ..IntegratorConfig::default()
    };
    let (_, ev) = integrate(&m, &StateVector::new(0.4, 0.4, 2.5), &cfg).unwrap();
    let t = ev.blowup.expect("f32 run blows up").t_estimate;
    let t64 = blowup_time(&IntegratorConfig::default());
    assert!((f64::from(t) - t64).abs() < 1e-4, "{t} vs {t64}");
    let (traj, ev) = integrate(&m, &StateVector::new(0.3, 0.3, 2.5), &cfg).unwrap();
    assert_eq!(traj.status, Status::CompletedHorizon);
    assert!(!ev.intervals(Species::Male).is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trajectory_invariants(
        f0 in 0.05f64..0.6,
        m0 in 0.05f64..0.6,
        s0 in 0.0f64..3.0,
        gamma in 0.0f64..1.5,
    ) {
        let cfg = short(5.0);
        let (traj, ev) = integrate(&classic3(gamma), &StateVector::new(f0, m0, s0), &cfg).unwrap();

        prop_assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(traj.times.iter().all(|t| t.is_finite()));
        prop_assert!(traj.states.iter().all(|x| x.is_finite()));

        for sp in [Species::Female, Species::Male, Species::Supermale] {
            let iv = ev.intervals(sp);
            for i in iv {
                prop_assert!(i.start < i.end);
            }
            for w in iv.windows(2) {
                prop_assert!(w[0].end < w[1].start);
            }
        }

        // s decouples: γ + (s₀ − γ)e^{−t}
        for (t, x) in traj.times.iter().zip(&traj.states) {
            let exact = gamma + (s0 - gamma) * (-t).exp();
            let bound = 10.0 * (cfg.abs_tol + cfg.rel_tol * x.s.abs());
            prop_assert!((x.s - exact).abs() <= bound, "t={} s={} exact={}", t, x.s, exact);
        }

        if traj.status != Status::BlowupDetected {
            let floor = -10.0 * cfg.abs_tol;
            prop_assert!(traj.states.iter().all(|x| x.f >= floor && x.s >= floor));
        }
    }

    #[test]
    fn negativity_midpoints_are_negative(s0 in 1.6f64..2.8) {
        let cfg = short(3.0);
        let (traj, ev) = integrate(&classic3(0.0), &StateVector::new(0.3, 0.3, s0), &cfg).unwrap();
        for i in ev.intervals(Species::Male) {
            let mid = i.midpoint();
            // nearest recorded sample to the midpoint
            let k = traj.times.partition_point(|&t| t < mid);
            let k = if k > 0 && (k == traj.times.len() || mid - traj.times[k - 1] < traj.times[k] - mid) { k - 1 } else { k };
            if traj.times[k] > i.start && traj.times[k] < i.end {
                prop_assert!(traj.states[k].m <= -cfg.neg_eps, "m={} at t={}", traj.states[k].m, traj.times[k]);
            }
        }
    }
}
