use super::{
    DimensionalParams, DimensionlessParams, ModelKind, ModelSpec, Params, StateVector,
};
use crate::num::Real;

/// Logistic damping factor of `model` evaluated at `x`.
///
/// Scaled models use `1 - (f+m+s)`; dimensional ones divide the total by K, and
/// Classic4 counts the trojan females in the total. The exponential variant
/// returns `exp(1 - (f+m+s))`.
pub fn logistic<T: Real>(x: &StateVector<T>, model: &ModelSpec<T>) -> T {
    match (model.kind(), model.params()) {
        (ModelKind::ExpLogistic3, _) => (T::one() - x.total3()).exp(),
        (ModelKind::Classic4, Params::Dimensional(p)) => classic4_logistic(p, x),
        (_, Params::Dimensional(p)) => T::one() - x.total3() / p.capacity,
        (_, Params::Dimensionless(_)) => T::one() - x.total3(),
    }
}

fn classic4_logistic<T: Real>(p: &DimensionalParams<T>, x: &StateVector<T>) -> T {
    T::one() - (x.total3() + x.r4.unwrap_or_else(T::zero)) / p.capacity
}

/// Scaled three-species system: `(rmfL - f, rmfL + 2rsfL - m, γ - s)` with `L = 1-(f+m+s)`.
pub fn rhs_classic3<T: Real>(p: &DimensionlessParams<T>, x: &StateVector<T>) -> StateVector<T> {
    scaled_classic(p, x, T::one() - x.total3())
}

/// Classic3 with the exponential logistic factor; the s-equation is untouched.
pub fn rhs_exp_logistic3<T: Real>(
    p: &DimensionlessParams<T>,
    x: &StateVector<T>,
) -> StateVector<T> {
    scaled_classic(p, x, (T::one() - x.total3()).exp())
}

#[inline]
fn scaled_classic<T: Real>(p: &DimensionlessParams<T>, x: &StateVector<T>, l: T) -> StateVector<T> {
    let &StateVector { f, m, s, .. } = x;
    let pair = p.r * m * f * l;
    let two = T::lit(2.0);
    StateVector::new(pair - f, pair + two * p.r * s * f * l - m, p.gamma - s)
}

/// Three-species system in physical units.
pub fn rhs_classic3_dimensional<T: Real>(
    p: &DimensionalParams<T>,
    x: &StateVector<T>,
) -> StateVector<T> {
    let &StateVector { f, m, s, .. } = x;
    let half = T::lit(0.5);
    let bl = p.beta * (T::one() - x.total3() / p.capacity);
    let pair = half * bl * f * m;
    StateVector::new(
        pair - p.delta * f,
        pair + bl * f * s - p.delta * m,
        p.mu - p.delta * s,
    )
}

/// Reaction terms of the four-species system (f, m, s, r4).
pub fn rhs_classic4<T: Real>(p: &DimensionalParams<T>, x: &StateVector<T>) -> StateVector<T> {
    let &StateVector { f, m, s, .. } = x;
    let r4 = x.r4.unwrap_or_else(T::zero);
    let half = T::lit(0.5);
    let bl = p.beta * classic4_logistic(p, x);
    StateVector::with_trojan(
        half * f * m * bl - p.delta * f,
        (half * f * m + half * r4 * m + f * s) * bl - p.delta * m,
        (half * r4 * m + r4 * s) * bl - p.delta * s,
        p.mu - p.delta * r4,
    )
}

/// Mate-competition system. `allee = Some(a)` multiplies the mating terms by
/// `(f/a - 1)`; `None` is the variant without the Allee effect.
///
/// Both mating fractions are taken as zero when `m + s == 0`.
pub fn rhs_modified<T: Real>(
    p: &DimensionlessParams<T>,
    x: &StateVector<T>,
    allee: Option<T>,
) -> StateVector<T> {
    let &StateVector { f, m, s, .. } = x;
    let l = T::one() - x.total3();
    let allee_factor = allee.map_or_else(T::one, |a| f / a - T::one());
    let pool = m + s;
    let (female_gain, male_gain) = if pool == T::zero() {
        (T::zero(), T::zero())
    } else {
        let common = p.r * l * allee_factor * f / pool;
        (common * m * m, common * (m * m + T::lit(2.0) * s * s))
    };
    StateVector::new(female_gain - f, male_gain - m, p.gamma - s)
}
