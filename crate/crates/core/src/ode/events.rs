use crate::error::{Error, Result};
use crate::num::Real;

/// How a reported blow-up time was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateMethod {
    /// Time at which the magnitude first reaches the cutoff, interpolated
    /// linearly in 1/|x| between the bracketing samples.
    CutoffCrossing,
    /// Pole of a least-squares fit |x| ≈ c/(T* − t) to the tail.
    ReciprocalFit,
}

impl EstimateMethod {
    pub fn name(self) -> &'static str {
        match self {
            EstimateMethod::CutoffCrossing => "cutoff",
            EstimateMethod::ReciprocalFit => "reciprocal_fit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupEstimate<T> {
    pub t_estimate: T,
    pub method: EstimateMethod,
    pub t_cutoff: Option<T>,
    pub t_fit: Option<T>,
}

/// Points used by the reciprocal fit.
const FIT_POINTS: usize = 6;

/// Finds `t` in the bracket where `value(t) = level`.
///
/// Illinois-modified regula falsi, with a bisection step whenever an iteration
/// fails to halve the bracket. Stops once the bracket is narrower than `tol`.
pub fn locate_zero_crossing<T, F>(lo: (T, T), hi: (T, T), level: T, mut value: F, tol: T) -> Result<T>
where
    T: Real,
    F: FnMut(T) -> T,
{
    let (mut a, mut ga) = (lo.0, lo.1 - level);
    let (mut b, mut gb) = (hi.0, hi.1 - level);
    if ga == T::zero() {
        return Ok(a);
    }
    if gb == T::zero() {
        return Ok(b);
    }
    if !(ga.signum() != gb.signum()) || !(a < b) {
        return Err(Error::NotBracketing {
            t_lo: a.as_f64(),
            t_hi: b.as_f64(),
        });
    }
    let half = T::lit(0.5);
    let mut side = 0i8;
    for _ in 0..200 {
        let width = b - a;
        if width <= tol {
            break;
        }
        let mut t = (a * gb - b * ga) / (gb - ga);
        if !(t > a && t < b) {
            t = a + half * width;
        }
        let mut g = value(t) - level;
        if g == T::zero() {
            return Ok(t);
        }
        let (old_a, old_b) = (a, b);
        if g.signum() == ga.signum() {
            a = t;
            ga = g;
            if side == -1 {
                gb = gb * half;
            }
            side = -1;
        } else {
            b = t;
            gb = g;
            if side == 1 {
                ga = ga * half;
            }
            side = 1;
        }
        if b - a > half * (old_b - old_a) {
            let mid = a + half * (b - a);
            g = value(mid) - level;
            if g == T::zero() {
                return Ok(mid);
            }
            if g.signum() == ga.signum() {
                a = mid;
                ga = g;
            } else {
                b = mid;
                gb = g;
            }
            side = 0;
        }
    }
    Ok(a + half * (b - a))
}

/// Estimates the blow-up time from the diverging tail of one component.
///
/// `magnitudes` must be strictly increasing with its last entry at or above
/// `cutoff`. The cutoff crossing is the returned estimate; the reciprocal fit
/// is recorded alongside when it yields a pole.
pub fn estimate_blowup_time<T: Real>(
    times: &[T],
    magnitudes: &[T],
    cutoff: T,
) -> Result<BlowupEstimate<T>> {
    check_tail(times, magnitudes)?;
    let last = *magnitudes.last().expect("checked non-empty");
    if last < cutoff {
        return Err(Error::NonDivergingTail(format!(
            "final magnitude {last} is below the cutoff {cutoff}"
        )));
    }
    let j = magnitudes
        .iter()
        .position(|&m| m >= cutoff)
        .expect("last entry is above cutoff");
    let t_cutoff = if j == 0 {
        times[0]
    } else {
        let (u0, u1, target) = (
            magnitudes[j - 1].recip(),
            magnitudes[j].recip(),
            cutoff.recip(),
        );
        times[j - 1] + (times[j] - times[j - 1]) * (u0 - target) / (u0 - u1)
    };
    Ok(BlowupEstimate {
        t_estimate: t_cutoff,
        method: EstimateMethod::CutoffCrossing,
        t_cutoff: Some(t_cutoff),
        t_fit: reciprocal_fit(times, magnitudes),
    })
}

/// Blow-up time from the reciprocal fit alone, for tails that never reached a cutoff.
pub fn extrapolate_blowup_time<T: Real>(times: &[T], magnitudes: &[T]) -> Result<BlowupEstimate<T>> {
    check_tail(times, magnitudes)?;
    let t_fit = reciprocal_fit(times, magnitudes).ok_or_else(|| {
        Error::NonDivergingTail("reciprocal magnitudes do not decrease toward a pole".into())
    })?;
    Ok(BlowupEstimate {
        t_estimate: t_fit,
        method: EstimateMethod::ReciprocalFit,
        t_cutoff: None,
        t_fit: Some(t_fit),
    })
}

fn check_tail<T: Real>(times: &[T], magnitudes: &[T]) -> Result<()> {
    if times.len() != magnitudes.len() {
        return Err(Error::LengthMismatch {
            expected: times.len(),
            found: magnitudes.len(),
        });
    }
    if times.len() < 2 {
        return Err(Error::NonDivergingTail("need at least two samples".into()));
    }
    for w in times.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::NonDivergingTail("times are not strictly increasing".into()));
        }
    }
    for w in magnitudes.windows(2) {
        if !(w[1] > w[0]) || !(w[0] > T::zero()) {
            return Err(Error::NonDivergingTail(
                "magnitudes are not positive and strictly increasing".into(),
            ));
        }
    }
    Ok(())
}

/// Least-squares line through (t, 1/|x|) over the last few samples; returns its root.
fn reciprocal_fit<T: Real>(times: &[T], magnitudes: &[T]) -> Option<T> {
    let start = times.len().saturating_sub(FIT_POINTS);
    let ts = &times[start..];
    let us: Vec<T> = magnitudes[start..].iter().map(|m| m.recip()).collect();
    let n = T::lit(ts.len() as f64);
    // centre time for conditioning
    let t_ref = *ts.last()?;
    let xs: Vec<T> = ts.iter().map(|&t| t - t_ref).collect();
    let mx = xs.iter().copied().sum::<T>() / n;
    let mu = us.iter().copied().sum::<T>() / n;
    let mut sxx = T::zero();
    let mut sxu = T::zero();
    for (&x, &u) in xs.iter().zip(&us) {
        sxx = sxx + (x - mx) * (x - mx);
        sxu = sxu + (x - mx) * (u - mu);
    }
    if sxx <= T::zero() {
        return None;
    }
    let slope = sxu / sxx;
    if !(slope < T::zero()) {
        return None;
    }
    let intercept = mu - slope * mx;
    let root = t_ref - intercept / slope;
    root.is_finite().then_some(root)
}
