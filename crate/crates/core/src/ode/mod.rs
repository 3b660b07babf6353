//! Adaptive Runge–Kutta–Fehlberg integration with negativity and blow-up events.

mod events;
mod rkf45;

pub use events::{
    estimate_blowup_time, extrapolate_blowup_time, locate_zero_crossing, BlowupEstimate,
    EstimateMethod,
};

use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};
use crate::models::{ModelSpec, Species, StateVector};
use crate::num::Real;
use rkf45::{Hermite, Rkf45};

/// Step-size, tolerance and event settings. Times are in the model's time unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub h_init: T,
    pub h_min: T,
    pub h_max: T,
    pub t_end: T,
    /// |component| at which blow-up is declared.
    pub blowup_cutoff: T,
    /// A component counts as negative once it drops below `-neg_eps`.
    pub neg_eps: T,
    /// Spacing of recorded samples.
    pub sample_dt: T,
}

impl<T: Real> Default for IntegratorConfig<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::lit(1e-9),
            rel_tol: T::lit(1e-9),
            h_init: T::lit(1e-4),
            h_min: T::lit(1e-12),
            h_max: T::lit(0.1),
            t_end: T::lit(50.0),
            blowup_cutoff: T::lit(1e8),
            neg_eps: T::lit(1e-9),
            sample_dt: T::lit(1e-3),
        }
    }
}

impl<T: Real> IntegratorConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        let all = [
            self.abs_tol,
            self.rel_tol,
            self.h_init,
            self.h_min,
            self.h_max,
            self.t_end,
            self.blowup_cutoff,
            self.neg_eps,
            self.sample_dt,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return bad("all settings must be finite".into());
        }
        if !(self.h_min > T::zero() && self.h_min <= self.h_init && self.h_init <= self.h_max) {
            return bad(format!(
                "need 0 < h_min <= h_init <= h_max, got {} / {} / {}",
                self.h_min, self.h_init, self.h_max
            ));
        }
        if !(self.abs_tol > T::zero() && self.rel_tol > T::zero()) {
            return bad("tolerances must be positive".into());
        }
        if self.blowup_cutoff < T::lit(1e3) {
            return bad(format!("blowup_cutoff must be >= 1e3, got {}", self.blowup_cutoff));
        }
        if self.neg_eps < T::zero() {
            return bad("neg_eps must be >= 0".into());
        }
        if !(self.t_end > T::zero() && self.sample_dt > T::zero()) {
            return bad("t_end and sample_dt must be positive".into());
        }
        Ok(())
    }

    /// Scales both tolerances by `factor`.
    pub fn with_tolerance_scale(mut self, factor: T) -> Self {
        self.abs_tol = self.abs_tol * factor;
        self.rel_tol = self.rel_tol * factor;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    CompletedHorizon,
    BlowupDetected,
    /// Step size fell below `h_min` without the solution growing.
    StepCollapse,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::CompletedHorizon => "completed_horizon",
            Status::BlowupDetected => "blowup_detected",
            Status::StepCollapse => "step_collapse",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    pub start: T,
    pub end: T,
}

impl<T: Real> Interval<T> {
    pub fn midpoint(&self) -> T {
        (self.start + self.end) * T::lit(0.5)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    PlusInfinity,
    MinusInfinity,
}

impl Sign {
    pub fn symbol(self) -> &'static str {
        match self {
            Sign::PlusInfinity => "+inf",
            Sign::MinusInfinity => "-inf",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupRecord<T> {
    /// First species to reach the cutoff.
    pub species: Species,
    pub sign: Sign,
    pub t_estimate: T,
    pub method: EstimateMethod,
    pub t_cutoff: Option<T>,
    pub t_fit: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventLog<T> {
    pub species: Vec<Species>,
    /// Per species (same order as `species`), ordered disjoint intervals.
    pub negativity: Vec<Vec<Interval<T>>>,
    pub blowup: Option<BlowupRecord<T>>,
}

impl<T: Real> EventLog<T> {
    fn new(species: &[Species]) -> Self {
        Self {
            species: species.to_vec(),
            negativity: vec![Vec::new(); species.len()],
            blowup: None,
        }
    }

    pub fn intervals(&self, species: Species) -> &[Interval<T>] {
        self.species
            .iter()
            .position(|&s| s == species)
            .map_or(&[][..], |i| &self.negativity[i])
    }

    pub fn any_negativity(&self) -> bool {
        self.negativity.iter().any(|v| !v.is_empty())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<StateVector<T>>,
    pub status: Status,
}

/// A first-order system the driver can step, together with how its state
/// reduces to per-species quantities for event detection.
pub trait OdeSystem<T: Real> {
    fn dim(&self) -> usize;

    fn rhs(&self, t: T, y: &[T], dy: &mut [T]);

    /// Monitored species, one event channel each.
    fn species(&self) -> &[Species];

    /// Smallest value of channel `c` (its minimum over space for fields).
    fn lowest(&self, y: &[T], c: usize) -> T;

    /// Value of channel `c` with the largest magnitude, sign kept.
    fn extreme(&self, y: &[T], c: usize) -> T;
}

impl<T: Real> OdeSystem<T> for ModelSpec<T> {
    fn dim(&self) -> usize {
        ModelSpec::dim(self)
    }

    fn rhs(&self, _t: T, y: &[T], dy: &mut [T]) {
        self.rhs_into(y, dy)
    }

    fn species(&self) -> &[Species] {
        ModelSpec::species(self)
    }

    fn lowest(&self, y: &[T], c: usize) -> T {
        y[c]
    }

    fn extreme(&self, y: &[T], c: usize) -> T {
        y[c]
    }
}

/// Summary of one driver run; samples go to the caller's sink.
#[derive(Debug, Clone)]
pub(crate) struct RunOutcome<T> {
    pub status: Status,
    pub events: EventLog<T>,
}

const TAIL_LEN: usize = 8;

/// Integrates `sys` from t = 0. `sink` receives samples at multiples of
/// `sample_dt`, at every event time, at each of `extra_times`, and at the final time.
pub(crate) fn run<T, S>(
    sys: &S,
    y0: &[T],
    cfg: &IntegratorConfig<T>,
    extra_times: &[T],
    mut sink: Option<&mut dyn FnMut(T, &[T])>,
) -> Result<RunOutcome<T>>
where
    T: Real,
    S: OdeSystem<T> + ?Sized,
{
    cfg.validate()?;
    let n = sys.dim();
    if y0.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: y0.len(),
        });
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("x0", "initial state must be finite"));
    }
    let channels = sys.species().len();
    let rhs = |t: T, y: &[T], dy: &mut [T]| sys.rhs(t, y, dy);
    let level = -cfg.neg_eps;
    let locate_tol = T::lit(1e-12);

    let mut extra: Vec<T> = extra_times
        .iter()
        .copied()
        .filter(|&t| t > T::zero() && t <= cfg.t_end)
        .collect();
    extra.sort_by(|a, b| a.partial_cmp(b).expect("finite snapshot times"));
    let mut extra_idx = 0;

    let mut events = EventLog::new(sys.species());
    let mut open: Vec<Option<T>> = (0..channels)
        .map(|c| (sys.lowest(y0, c) < level).then_some(T::zero()))
        .collect();
    let mut tails: Vec<VecDeque<(T, T)>> = (0..channels)
        .map(|c| VecDeque::from([(T::zero(), sys.extreme(y0, c).abs())]))
        .collect();

    let mut stepper = Rkf45::new(n);
    let mut t = T::zero();
    let mut y = y0.to_vec();
    let mut f1 = vec![T::zero(); n];
    let mut buf = vec![T::zero(); n];
    rhs(t, &y, stepper.k1_mut());

    let mut last_emit = T::zero();
    if let Some(s) = sink.as_mut() {
        s(t, &y);
    }
    let mut next_sample: u64 = 1;
    let mut prev_peak = peak(sys, &y, channels);
    let mut h = cfg.h_init;
    let safety = T::lit(0.9);
    let fifth = T::lit(0.2);

    let status = loop {
        if t >= cfg.t_end {
            break Status::CompletedHorizon;
        }
        // recorded runs land exactly on sample times so samples carry the
        // full step accuracy rather than the interpolant's
        let mut landing = cfg.t_end;
        if sink.is_some() {
            landing = landing.min(T::lit(next_sample as f64) * cfg.sample_dt);
            if let Some(&e) = extra.get(extra_idx) {
                landing = landing.min(e);
            }
        }
        let h_try = h.min(cfg.h_max);
        let clamped = h_try >= landing - t;
        h = if clamped { landing - t } else { h_try };

        let err = stepper.attempt(&rhs, t, &y, h, cfg.abs_tol, cfg.rel_tol);
        if !(err <= T::one()) {
            let shrink = if err.is_finite() {
                (safety * err.powf(-fifth)).max(T::lit(0.1)).min(safety)
            } else {
                T::lit(0.1)
            };
            let h_new = h * shrink;
            if h_new < cfg.h_min {
                if diverging(peak(sys, &y, channels), prev_peak, cfg.blowup_cutoff) {
                    let (c, est) = collapse_estimate(sys, &y, &tails, t)?;
                    events.blowup = Some(record(sys.species()[c], sys.extreme(&y, c), est));
                    break Status::BlowupDetected;
                }
                break Status::StepCollapse;
            }
            h = h_new;
            continue;
        }

        let t1 = if clamped { landing } else { t + h };
        rhs(t1, &stepper.y_new, &mut f1[..]);
        let herm = Hermite {
            t0: t,
            h: t1 - t,
            y0: &y,
            f0: stepper.k1(),
            y1: &stepper.y_new,
            f1: &f1,
        };

        // negativity crossings within the step
        let mut stamps: Vec<T> = Vec::new();
        for c in 0..channels {
            let g0 = sys.lowest(&y, c);
            let g1 = sys.lowest(&stepper.y_new, c);
            let was_neg = open[c].is_some();
            let is_neg = g1 < level;
            if was_neg == is_neg {
                continue;
            }
            let tc = locate_zero_crossing(
                (t, g0),
                (t1, g1),
                level,
                |tau| {
                    herm.eval(tau, &mut buf);
                    sys.lowest(&buf, c)
                },
                locate_tol,
            )?;
            if is_neg {
                open[c] = Some(tc);
            } else if let Some(start) = open[c].take() {
                events.negativity[c].push(Interval { start, end: tc });
            }
            stamps.push(tc);
        }

        let cutoff_hit: Vec<usize> = (0..channels)
            .filter(|&c| sys.extreme(&stepper.y_new, c).abs() >= cfg.blowup_cutoff)
            .collect();

        if let Some(s) = sink.as_mut() {
            let grid_t = |k: u64| T::lit(k as f64) * cfg.sample_dt;
            while grid_t(next_sample) <= t1 {
                stamps.push(grid_t(next_sample));
                next_sample += 1;
            }
            while extra_idx < extra.len() && extra[extra_idx] <= t1 {
                stamps.push(extra[extra_idx]);
                extra_idx += 1;
            }
            stamps.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
            let gap = T::lit(1e-13) * t1.abs().max(T::one());
            for &ts in &stamps {
                if ts <= last_emit + gap || ts > t1 {
                    continue;
                }
                if ts >= t1 - gap {
                    s(t1, &stepper.y_new);
                    last_emit = t1;
                } else if cutoff_hit.is_empty() {
                    herm.eval(ts, &mut buf);
                    s(ts, &buf);
                    last_emit = ts;
                }
            }
        } else {
            while T::lit(next_sample as f64) * cfg.sample_dt <= t1 {
                next_sample += 1;
            }
        }

        for c in 0..channels {
            let tail = &mut tails[c];
            if tail.len() == TAIL_LEN {
                tail.pop_front();
            }
            tail.push_back((t1, sys.extreme(&stepper.y_new, c).abs()));
        }

        prev_peak = peak(sys, &y, channels);
        t = t1;
        std::mem::swap(&mut y, &mut stepper.y_new);
        stepper.k1_mut().copy_from_slice(&f1);

        if !cutoff_hit.is_empty() {
            let mut best: Option<(usize, BlowupEstimate<T>)> = None;
            for &c in &cutoff_hit {
                let (ts, ms) = increasing_suffix(&tails[c]);
                let est = estimate_blowup_time(&ts, &ms, cfg.blowup_cutoff)?;
                if best.as_ref().is_none_or(|(_, b)| est.t_estimate < b.t_estimate) {
                    best = Some((c, est));
                }
            }
            let (c, est) = best.expect("at least one channel hit the cutoff");
            events.blowup = Some(record(sys.species()[c], sys.extreme(&y, c), est));
            break Status::BlowupDetected;
        }

        let grow = if err > T::zero() {
            (safety * err.powf(-fifth)).min(T::lit(5.0)).max(T::lit(0.2))
        } else {
            T::lit(5.0)
        };
        h = if clamped { (h * grow).max(h_try) } else { h * grow }.min(cfg.h_max);
        if h < cfg.h_min {
            if diverging(peak(sys, &y, channels), prev_peak, cfg.blowup_cutoff) {
                let (c, est) = collapse_estimate(sys, &y, &tails, t)?;
                events.blowup = Some(record(sys.species()[c], sys.extreme(&y, c), est));
                break Status::BlowupDetected;
            }
            break Status::StepCollapse;
        }
    };

    for c in 0..channels {
        if let Some(start) = open[c].take() {
            events.negativity[c].push(Interval { start, end: t });
        }
    }
    if let Some(s) = sink.as_mut() {
        if t > last_emit {
            s(t, &y);
        }
    }
    if status == Status::BlowupDetected && events.blowup.is_none() {
        unreachable!("blow-up status without a record");
    }
    Ok(RunOutcome {
        status,
        events,
    })
}

/// Step collapse counts as blow-up only while the peak is still rising and
/// already past the geometric midpoint of 1 and the cutoff; bounded
/// trajectories that stall on a derivative singularity are not blow-up.
fn diverging<T: Real>(cur: T, prev: T, cutoff: T) -> bool {
    cur > prev && cur >= cutoff.sqrt()
}

fn peak<T: Real, S: OdeSystem<T> + ?Sized>(sys: &S, y: &[T], channels: usize) -> T {
    (0..channels).fold(T::zero(), |acc, c| acc.max(sys.extreme(y, c).abs()))
}

fn record<T: Real>(species: Species, value: T, est: BlowupEstimate<T>) -> BlowupRecord<T> {
    BlowupRecord {
        species,
        sign: if value < T::zero() {
            Sign::MinusInfinity
        } else {
            Sign::PlusInfinity
        },
        t_estimate: est.t_estimate,
        method: est.method,
        t_cutoff: est.t_cutoff,
        t_fit: est.t_fit,
    }
}

fn increasing_suffix<T: Real>(tail: &VecDeque<(T, T)>) -> (Vec<T>, Vec<T>) {
    let v: Vec<(T, T)> = tail.iter().copied().collect();
    let mut start = v.len() - 1;
    while start > 0 && v[start - 1].1 < v[start].1 && v[start - 1].0 < v[start].0 {
        start -= 1;
    }
    v[start..].iter().copied().unzip()
}

fn collapse_estimate<T: Real, S: OdeSystem<T> + ?Sized>(
    sys: &S,
    y: &[T],
    tails: &[VecDeque<(T, T)>],
    t: T,
) -> Result<(usize, BlowupEstimate<T>)> {
    let channels = sys.species().len();
    let c = (0..channels)
        .max_by(|&a, &b| {
            let (va, vb) = (sys.extreme(y, a).abs(), sys.extreme(y, b).abs());
            va.partial_cmp(&vb).expect("finite state")
        })
        .expect("at least one channel");
    let (ts, ms) = increasing_suffix(&tails[c]);
    let est = extrapolate_blowup_time(&ts, &ms).unwrap_or(BlowupEstimate {
        t_estimate: t,
        method: EstimateMethod::ReciprocalFit,
        t_cutoff: None,
        t_fit: None,
    });
    Ok((c, est))
}

/// Integrates `model` from `x0` and records a trajectory sampled every
/// `cfg.sample_dt` plus event times.
pub fn integrate<T: Real>(
    model: &ModelSpec<T>,
    x0: &StateVector<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<(Trajectory<T>, EventLog<T>)> {
    check_state(model, x0)?;
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut sink = |t: T, y: &[T]| {
        times.push(t);
        states.push(StateVector::from_slice(y));
    };
    let out = run(model, &x0.to_vec(), cfg, &[], Some(&mut sink))?;
    Ok((
        Trajectory {
            times,
            states,
            status: out.status,
        },
        out.events,
    ))
}

/// Event detection only, without recording samples.
pub fn integrate_events<T: Real>(
    model: &ModelSpec<T>,
    x0: &StateVector<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<(Status, EventLog<T>)> {
    check_state(model, x0)?;
    let out = run(model, &x0.to_vec(), cfg, &[], None)?;
    Ok((out.status, out.events))
}

fn check_state<T: Real>(model: &ModelSpec<T>, x0: &StateVector<T>) -> Result<()> {
    if x0.len() != model.dim() {
        return Err(Error::LengthMismatch {
            expected: model.dim(),
            found: x0.len(),
        });
    }
    Ok(())
}
