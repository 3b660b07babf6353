//! Region classification and critical-threshold search.
//!
//! Outcomes are ordered Positive < NegativeNoBlowup < Blowup. Threshold
//! searches assume that order is weakly increasing along the swept axis and
//! check it on a coarse pre-scan before bisecting.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::{ModelKind, ModelSpec, StateVector};
use crate::num::Real;
use crate::ode::{integrate_events, EventLog, IntegratorConfig, Status};
use crate::pde::{integrate_pde, Field, SpatialGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Region {
    /// Region 1: solution stays nonnegative.
    Positive,
    /// Region 2: some population turns negative, no blow-up.
    NegativeNoBlowup,
    /// Region 3: finite-time blow-up.
    Blowup,
}

impl Region {
    pub fn name(self) -> &'static str {
        match self {
            Region::Positive => "Positive",
            Region::NegativeNoBlowup => "NegativeNoBlowup",
            Region::Blowup => "Blowup",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome<T> {
    pub region: Region,
    pub events: EventLog<T>,
}

/// Maps a finished run to its region; `t` is reported if the run collapsed.
pub fn outcome_of<T: Real>(status: Status, events: EventLog<T>, t: T) -> Result<Outcome<T>> {
    let region = match status {
        Status::StepCollapse => return Err(Error::Indeterminate { t: t.as_f64() }),
        Status::BlowupDetected => Region::Blowup,
        Status::CompletedHorizon if events.any_negativity() => Region::NegativeNoBlowup,
        Status::CompletedHorizon => Region::Positive,
    };
    Ok(Outcome { region, events })
}

pub fn classify<T: Real>(
    model: &ModelSpec<T>,
    x0: &StateVector<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<Outcome<T>> {
    let (status, events) = integrate_events(model, x0, cfg)?;
    let t = last_event_time(&events).unwrap_or(cfg.t_end);
    outcome_of(status, events, t)
}

pub fn classify_pde<T: Real>(
    model: &ModelSpec<T>,
    fields0: &Field<T>,
    grid: &SpatialGrid<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<Outcome<T>> {
    let (traj, events) = integrate_pde(model, fields0, grid, cfg)?;
    let t = traj.times.last().copied().unwrap_or_else(T::zero);
    outcome_of(traj.status, events, t)
}

fn last_event_time<T: Real>(events: &EventLog<T>) -> Option<T> {
    events.negativity.iter().flatten().map(|iv| iv.end).reduce(T::max)
}

/// The quantity swept by a threshold search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    /// Initial supermale level s₀, with the model's own stocking rate.
    InitialSupermale,
    /// Stocking rate γ (μ for dimensional models), with s₀ = 0.
    IntroductionRate,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::InitialSupermale => "s0",
            Axis::IntroductionRate => "gamma",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionBoundary {
    /// Between Positive and the two negative regions (s*, γ*).
    Region12,
    /// Between bounded and blowing-up solutions (s**, γ**).
    Region23,
}

impl RegionBoundary {
    pub fn name(self) -> &'static str {
        match self {
            RegionBoundary::Region12 => "R1/2",
            RegionBoundary::Region23 => "R2/3",
        }
    }

    /// Whether `region` lies on the upper side of this boundary.
    pub fn above(self, region: Region) -> bool {
        match self {
            RegionBoundary::Region12 => region >= Region::NegativeNoBlowup,
            RegionBoundary::Region23 => region == Region::Blowup,
        }
    }
}

/// Bisection settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Search<T> {
    pub lo: T,
    pub hi: T,
    /// Stop once the bracket is narrower than this.
    pub tol: T,
    /// Evenly spaced classifications used to validate ordering before bisecting.
    pub prescan: usize,
}

impl<T: Real> Default for Search<T> {
    fn default() -> Self {
        Self {
            lo: T::zero(),
            hi: T::lit(10.0),
            tol: T::lit(1e-4),
            prescan: 16,
        }
    }
}

impl<T: Real> Search<T> {
    pub fn with_bracket(self, lo: T, hi: T) -> Self {
        Self { lo, hi, ..self }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lo < self.hi && self.lo >= T::zero() && self.hi.is_finite()) {
            return Err(Error::param("bracket", format!("need 0 <= lo < hi, got [{}, {}]", self.lo, self.hi)));
        }
        if !(self.tol > T::zero()) {
            return Err(Error::param("tol", "must be positive"));
        }
        if self.prescan < 2 {
            return Err(Error::param("prescan", "need at least 2 points"));
        }
        Ok(())
    }
}

/// A located boundary value with the classifications that bracket it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold<T> {
    pub value: T,
    pub below: (T, Region),
    pub above: (T, Region),
}

/// Model and initial state for one point on the axis.
pub fn axis_problem<T: Real>(
    model: &ModelSpec<T>,
    f0m0: T,
    axis: Axis,
    value: T,
) -> Result<(ModelSpec<T>, StateVector<T>)> {
    if model.kind() == ModelKind::Classic4 {
        return Err(Error::ModelMismatch(
            "threshold searches are defined for the three-species models".into(),
        ));
    }
    match axis {
        Axis::InitialSupermale => Ok((*model, StateVector::new(f0m0, f0m0, value))),
        Axis::IntroductionRate => Ok((model.with_stocking(value)?, StateVector::new(f0m0, f0m0, T::zero()))),
    }
}

/// Region used by threshold searches. Unlike [`classify`], a step collapse
/// after a recorded negativity interval is resolved: the solution has already
/// left the nonnegative cone and a collapse without magnitude growth is not
/// blow-up, so the run is NegativeNoBlowup. The modified models reach this
/// routinely when m approaches −s and the mating fractions become singular.
fn search_region<T: Real>(status: Status, events: &EventLog<T>, t_end: T) -> Result<Region> {
    match status {
        Status::StepCollapse if events.any_negativity() => Ok(Region::NegativeNoBlowup),
        _ => outcome_of(status, events.clone(), t_end).map(|o| o.region),
    }
}

fn classify_on_axis<T: Real>(
    model: &ModelSpec<T>,
    f0m0: T,
    axis: Axis,
    value: T,
    cfg: &IntegratorConfig<T>,
) -> Result<Region> {
    let (m, x0) = axis_problem(model, f0m0, axis, value)?;
    let (status, events) = integrate_events(&m, &x0, cfg)?;
    let t = last_event_time(&events).unwrap_or(cfg.t_end);
    search_region(status, &events, t)
}

/// Bisects `axis` at f₀ = m₀ = `f0m0` for the value where outcomes cross `boundary`.
pub fn find_threshold<T: Real>(
    model: &ModelSpec<T>,
    f0m0: T,
    axis: Axis,
    boundary: RegionBoundary,
    search: &Search<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<Threshold<T>> {
    search.validate()?;
    let classify_at = |v: T| classify_on_axis(model, f0m0, axis, v, cfg);

    let steps = T::lit((search.prescan - 1) as f64);
    let mut scan: Vec<(T, Region)> = Vec::with_capacity(search.prescan);
    for i in 0..search.prescan {
        let v = if i + 1 == search.prescan {
            search.hi
        } else {
            search.lo + (search.hi - search.lo) * T::lit(i as f64) / steps
        };
        scan.push((v, classify_at(v)?));
    }
    for w in scan.windows(2) {
        if w[1].1 < w[0].1 {
            return Err(Error::NonMonotone {
                at: w[1].0.as_f64(),
                before: w[0].1,
                after: w[1].1,
            });
        }
    }
    let (first, last) = (scan[0], scan[scan.len() - 1]);
    if boundary.above(first.1) || !boundary.above(last.1) {
        return Err(Error::BracketInvalid {
            lo: first.1,
            hi: last.1,
        });
    }
    let idx = scan
        .iter()
        .position(|&(_, r)| boundary.above(r))
        .expect("upper end is above the boundary");
    let (mut below, mut above) = (scan[idx - 1], scan[idx]);
    let half = T::lit(0.5);
    while above.0 - below.0 >= search.tol {
        let mid = below.0 + half * (above.0 - below.0);
        let r = classify_at(mid)?;
        if boundary.above(r) {
            above = (mid, r);
        } else {
            below = (mid, r);
        }
    }
    Ok(Threshold {
        value: below.0 + half * (above.0 - below.0),
        below,
        above,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum PointResult<T> {
    Found(Threshold<T>),
    /// The whole bracket lies below the boundary (e.g. no blow-up at all).
    Absent,
    Failed(Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdPoint<T> {
    pub f0m0: T,
    pub result: PointResult<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdCurve<T> {
    pub axis: Axis,
    pub boundary: RegionBoundary,
    pub points: Vec<ThresholdPoint<T>>,
}

impl<T: Real> ThresholdCurve<T> {
    /// `(f₀ = m₀, critical value)` for every point where a threshold was found.
    pub fn found(&self) -> Vec<(T, T)> {
        self.points
            .iter()
            .filter_map(|p| match &p.result {
                PointResult::Found(th) => Some((p.f0m0, th.value)),
                _ => None,
            })
            .collect()
    }

    /// True when no point has this boundary inside its bracket.
    pub fn is_absent(&self) -> bool {
        !self.points.is_empty()
            && self.points.iter().all(|p| matches!(p.result, PointResult::Absent))
    }

    pub fn failures(&self) -> impl Iterator<Item = &ThresholdPoint<T>> {
        self.points
            .iter()
            .filter(|p| matches!(p.result, PointResult::Failed(_)))
    }

    /// Whether the found critical values strictly decrease with f₀ = m₀.
    pub fn is_decreasing(&self) -> bool {
        let pts = self.found();
        pts.len() >= 2 && pts.windows(2).all(|w| w[1].1 < w[0].1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionMap<T> {
    pub lower: ThresholdCurve<T>,
    pub upper: ThresholdCurve<T>,
}

/// Evenly spaced points over `range`, both ends included.
pub fn linspace<T: Real>(range: (T, T), count: usize) -> Vec<T> {
    if count == 1 {
        return vec![range.0];
    }
    let steps = T::lit((count - 1) as f64);
    (0..count)
        .map(|i| {
            if i + 1 == count {
                range.1
            } else {
                range.0 + (range.1 - range.0) * T::lit(i as f64) / steps
            }
        })
        .collect()
}

impl<T: Real> PointResult<T> {
    /// A bracket lying wholly below `boundary` means the boundary is absent there.
    pub fn from_search(r: Result<Threshold<T>>, boundary: RegionBoundary) -> Self {
        match r {
            Ok(th) => PointResult::Found(th),
            Err(Error::BracketInvalid { hi, .. }) if !boundary.above(hi) => PointResult::Absent,
            Err(e) => PointResult::Failed(e),
        }
    }
}

/// Sweeps f₀ = m₀ over `range` and locates both boundaries at each point.
/// Points are computed in parallel on the current rayon pool and merged by index.
pub fn region_map<T: Real>(
    model: &ModelSpec<T>,
    range: (T, T),
    axis: Axis,
    resolution: usize,
    search: &Search<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<RegionMap<T>> {
    if resolution < 2 {
        return Err(Error::param("resolution", "need at least 2 points"));
    }
    if !(range.0 < range.1) {
        return Err(Error::param("range", "need lo < hi"));
    }
    search.validate()?;
    cfg.validate()?;
    axis_problem(model, range.0, axis, search.lo)?;

    let grid = linspace(range, resolution);
    let results: Vec<(PointResult<T>, PointResult<T>)> = grid
        .par_iter()
        .map(|&f0| {
            let lower = find_threshold(model, f0, axis, RegionBoundary::Region12, search, cfg);
            let upper = find_threshold(model, f0, axis, RegionBoundary::Region23, search, cfg);
            (
                PointResult::from_search(lower, RegionBoundary::Region12),
                PointResult::from_search(upper, RegionBoundary::Region23),
            )
        })
        .collect();

    let mut lower = ThresholdCurve {
        axis,
        boundary: RegionBoundary::Region12,
        points: Vec::with_capacity(resolution),
    };
    let mut upper = ThresholdCurve {
        axis,
        boundary: RegionBoundary::Region23,
        points: Vec::with_capacity(resolution),
    };
    for (f0m0, (lo, hi)) in grid.into_iter().zip(results) {
        lower.points.push(ThresholdPoint { f0m0, result: lo });
        upper.points.push(ThresholdPoint { f0m0, result: hi });
    }
    Ok(RegionMap { lower, upper })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonEntry<T> {
    pub kind: ModelKind,
    pub map: RegionMap<T>,
    /// f₀ = m₀ values where the Region 1/2 curve has a kink (see [`kinks`]).
    pub kinks: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison<T> {
    pub axis: Axis,
    pub f0m0: Vec<T>,
    pub entries: Vec<ComparisonEntry<T>>,
}

/// Region maps for several models on a shared f₀ = m₀ grid.
pub fn compare_thresholds<T: Real>(
    models: &[ModelSpec<T>],
    axis: Axis,
    range: (T, T),
    resolution: usize,
    search: &Search<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<Comparison<T>> {
    if models.is_empty() {
        return Err(Error::param("models", "need at least one model"));
    }
    let mut entries = Vec::with_capacity(models.len());
    for model in models {
        let map = region_map(model, range, axis, resolution, search, cfg)?;
        let kinks = kinks(&map.lower, T::lit(KINK_RATIO));
        entries.push(ComparisonEntry {
            kind: model.kind(),
            map,
            kinks,
        });
    }
    Ok(Comparison {
        axis,
        f0m0: linspace(range, resolution),
        entries,
    })
}

/// Slope-jump ratio above which [`compare_thresholds`] flags a kink.
pub const KINK_RATIO: f64 = 4.0;

/// Interior points of `curve` where consecutive secant slopes differ by more
/// than `ratio` times the median absolute slope, or change sign. Points
/// without a threshold break the curve and are flagged as well.
pub fn kinks<T: Real>(curve: &ThresholdCurve<T>, ratio: T) -> Vec<T> {
    let mut flagged: Vec<T> = curve
        .points
        .iter()
        .filter(|p| !matches!(p.result, PointResult::Found(_)))
        .map(|p| p.f0m0)
        .collect();
    let pts = curve.found();
    if pts.len() >= 3 {
        let slopes: Vec<T> = pts
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .collect();
        let mut mags: Vec<T> = slopes.iter().map(|s| s.abs()).collect();
        mags.sort_by(|a, b| a.partial_cmp(b).expect("finite slopes"));
        let median = mags[mags.len() / 2];
        for i in 1..slopes.len() {
            let (a, b) = (slopes[i - 1], slopes[i]);
            let sign_flip = a * b < T::zero();
            if sign_flip || (b - a).abs() > ratio * median {
                flagged.push(pts[i].0);
            }
        }
    }
    flagged.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    flagged.dedup();
    flagged
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::DimensionlessParams;

    fn classic3() -> ModelSpec<f64> {
        ModelSpec::classic3(DimensionlessParams::new(17.8125, 0.0).unwrap()).unwrap()
    }

    fn cfg() -> IntegratorConfig<f64> {
        IntegratorConfig::default()
    }

    #[test]
    fn boundary_sides() {
        assert!(!RegionBoundary::Region12.above(Region::Positive));
        assert!(RegionBoundary::Region12.above(Region::Blowup));
        assert!(!RegionBoundary::Region23.above(Region::NegativeNoBlowup));
        assert!(Region::Positive < Region::NegativeNoBlowup && Region::NegativeNoBlowup < Region::Blowup);
    }

    #[test]
    fn invalid_bracket_when_both_positive() {
        let s = Search::default().with_bracket(0.0, 0.1);
        let r = find_threshold(&classic3(), 0.3, Axis::InitialSupermale, RegionBoundary::Region12, &s, &cfg());
        assert!(matches!(
            r,
            Err(Error::BracketInvalid {
                lo: Region::Positive,
                hi: Region::Positive
            })
        ));
    }

    #[test]
    fn linspace_hits_both_ends() {
        let v: Vec<f64> = linspace((0.1, 0.5), 5);
        assert_eq!(v.len(), 5);
        assert_eq!(v[0], 0.1);
        assert_eq!(v[4], 0.5);
        assert!((v[2] - 0.3).abs() < 1e-15);
    }

    fn curve(values: &[(f64, Option<f64>)]) -> ThresholdCurve<f64> {
        ThresholdCurve {
            axis: Axis::InitialSupermale,
            boundary: RegionBoundary::Region12,
            points: values
                .iter()
                .map(|&(f0m0, v)| ThresholdPoint {
                    f0m0,
                    result: match v {
                        Some(value) => PointResult::Found(Threshold {
                            value,
                            below: (value, Region::Positive),
                            above: (value, Region::NegativeNoBlowup),
                        }),
                        None => PointResult::Absent,
                    },
                })
                .collect(),
        }
    }

    #[test]
    fn smooth_curve_has_no_kinks() {
        let c = curve(&[(0.1, Some(2.0)), (0.2, Some(1.5)), (0.3, Some(1.1)), (0.4, Some(0.8)), (0.5, Some(0.6))]);
        assert!(kinks(&c, 4.0).is_empty());
        assert!(c.is_decreasing());
    }

    #[test]
    fn kinks_and_gaps_are_flagged() {
        let c = curve(&[(0.1, None), (0.2, Some(0.2)), (0.3, Some(1.1)), (0.4, Some(1.0)), (0.5, Some(0.9))]);
        let k = kinks(&c, 4.0);
        assert!(k.contains(&0.1) && k.contains(&0.3), "{k:?}");
        assert!(!c.is_absent());
        assert!(curve(&[(0.1, None), (0.2, None)]).is_absent());
    }

    #[test]
    fn classic4_has_no_axis_problem() {
        let p = crate::models::DimensionalParams::new(1.0, 1.0, 1.0, 0.0).unwrap();
        let m = ModelSpec::new(ModelKind::Classic4, crate::models::Params::Dimensional(p)).unwrap();
        assert!(axis_problem(&m, 0.3, Axis::InitialSupermale, 1.0).is_err());
    }
}
