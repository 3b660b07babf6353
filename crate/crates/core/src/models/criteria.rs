use nalgebra::Matrix4;

use super::{rhs_classic4, DimensionalParams, ModelSpec, Species, StateVector};
use crate::error::{Error, Result};
use crate::num::Real;

/// Grid points per axis used when sampling a coordinate face.
pub const DEFAULT_FACE_POINTS: usize = 64;

const MAX_WITNESSES: usize = 32;

/// Axis-aligned box of states, `lo <= x <= hi` componentwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateBox<T> {
    pub lo: StateVector<T>,
    pub hi: StateVector<T>,
}

impl<T: Real> StateBox<T> {
    pub fn new(lo: StateVector<T>, hi: StateVector<T>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::LengthMismatch {
                expected: lo.len(),
                found: hi.len(),
            });
        }
        for (a, b) in lo.to_vec().into_iter().zip(hi.to_vec()) {
            if !(a >= T::zero() && a <= b && b.is_finite()) {
                return Err(Error::param(
                    "region",
                    format!("need 0 <= lo <= hi < inf, got [{a}, {b}]"),
                ));
            }
        }
        Ok(Self { lo, hi })
    }

    /// The cube `[0, side]^n` for an `n`-species model.
    pub fn cube(side: T, species: usize) -> Result<Self> {
        let zeros = vec![T::zero(); species];
        let tops = vec![side; species];
        Self::new(StateVector::from_slice(&zeros), StateVector::from_slice(&tops))
    }
}

/// One sampled coordinate face. `face` names the species held at zero.
pub type Face = Species;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness<T> {
    pub face: Face,
    pub point: StateVector<T>,
    /// Component of the vector field normal to the face; negative here.
    pub value: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositivityReport<T> {
    pub holds: bool,
    /// At most 32 violating points, in sampling order.
    pub witnesses: Vec<Witness<T>>,
    pub violations: usize,
    pub samples: usize,
}

/// Samples every coordinate face of `region` and checks that the vector field
/// points into the nonnegative orthant there (F(0,m,s) >= 0, G(f,0,s) >= 0, ...).
pub fn positivity_criterion<T: Real>(
    model: &ModelSpec<T>,
    region: &StateBox<T>,
    points_per_axis: usize,
) -> Result<PositivityReport<T>> {
    let n = model.dim();
    if region.lo.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: region.lo.len(),
        });
    }
    if points_per_axis < 2 {
        return Err(Error::param("points_per_axis", "need at least 2 points"));
    }
    let lo = region.lo.to_vec();
    let hi = region.hi.to_vec();
    let steps = T::lit((points_per_axis - 1) as f64);

    let mut report = PositivityReport {
        holds: true,
        witnesses: Vec::new(),
        violations: 0,
        samples: 0,
    };
    let mut y = vec![T::zero(); n];
    let mut dy = vec![T::zero(); n];
    for (face_idx, &face) in model.species().iter().enumerate() {
        let free: Vec<usize> = (0..n).filter(|&j| j != face_idx).collect();
        let total = points_per_axis.pow(free.len() as u32);
        for flat in 0..total {
            let mut rest = flat;
            for &j in &free {
                let k = rest % points_per_axis;
                rest /= points_per_axis;
                y[j] = lo[j] + (hi[j] - lo[j]) * T::lit(k as f64) / steps;
            }
            y[face_idx] = T::zero();
            model.rhs_into(&y, &mut dy);
            report.samples += 1;
            if dy[face_idx] < T::zero() {
                report.holds = false;
                report.violations += 1;
                if report.witnesses.len() < MAX_WITNESSES {
                    report.witnesses.push(Witness {
                        face,
                        point: StateVector::from_slice(&y),
                        value: dy[face_idx],
                    });
                }
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Applicability<T> {
    Applicable,
    /// δ/β is not below K/16.
    Inapplicable { ratio: T, bound: T },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport<T> {
    /// βμ² − βKδμ + Kδ³.
    pub criterion_value: T,
    pub applicability: Applicability<T>,
    /// Stability of (0,0,0,μ/δ) according to the cubic criterion; `None` when inapplicable.
    pub trojan_state_stable: Option<bool>,
    /// With μ = 0 the trojan state is the extinction state; reported from the Jacobian.
    pub extinction_stable: Option<bool>,
    /// Eigenvalues (re, im) of a central-difference Jacobian of the four-species
    /// reaction terms at (0,0,0,μ/δ).
    pub eigenvalues: Vec<(f64, f64)>,
    pub jacobian_stable: bool,
}

impl<T: Real> StabilityReport<T> {
    pub fn is_applicable(&self) -> bool {
        matches!(self.applicability, Applicability::Applicable)
    }

    /// Whether the criterion and the linearization agree on stability.
    pub fn agrees(&self) -> bool {
        (self.criterion_value > T::zero()) == self.jacobian_stable
    }
}

pub fn stability_check<T: Real>(p: &DimensionalParams<T>) -> Result<StabilityReport<T>> {
    p.validate()?;
    let (beta, delta, k, mu) = (p.beta, p.delta, p.capacity, p.mu);
    let criterion_value = beta * mu * mu - beta * k * delta * mu + k * delta * delta * delta;
    let bound = k / T::lit(16.0);
    let ratio = delta / beta;
    let applicability = if ratio < bound {
        Applicability::Applicable
    } else {
        Applicability::Inapplicable { ratio, bound }
    };

    let pf = DimensionalParams {
        beta: beta.as_f64(),
        delta: delta.as_f64(),
        capacity: k.as_f64(),
        mu: mu.as_f64(),
        diffusion: 0.0,
    };
    let eq = [0.0, 0.0, 0.0, pf.mu / pf.delta];
    let jac = numerical_jacobian(&pf, eq);
    let eigenvalues: Vec<(f64, f64)> = jac
        .complex_eigenvalues()
        .iter()
        .map(|z| (z.re, z.im))
        .collect();
    let jacobian_stable = eigenvalues.iter().all(|&(re, _)| re < 0.0);

    let applicable = matches!(applicability, Applicability::Applicable);
    Ok(StabilityReport {
        criterion_value,
        applicability,
        trojan_state_stable: applicable.then(|| criterion_value > T::zero()),
        extinction_stable: (mu == T::zero()).then_some(jacobian_stable),
        eigenvalues,
        jacobian_stable,
    })
}

fn numerical_jacobian(p: &DimensionalParams<f64>, at: [f64; 4]) -> Matrix4<f64> {
    let eval = |y: [f64; 4]| rhs_classic4(p, &StateVector::from_slice(&y)).to_vec();
    let mut jac = Matrix4::zeros();
    for j in 0..4 {
        let h = 1e-6 * at[j].abs().max(1.0);
        let (mut up, mut down) = (at, at);
        up[j] += h;
        down[j] -= h;
        let (fu, fd) = (eval(up), eval(down));
        for i in 0..4 {
            jac[(i, j)] = (fu[i] - fd[i]) / (2.0 * h);
        }
    }
    jac
}

fn require_positive<T: Real>(name: &'static str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be > 0, got {v}")))
    }
}

/// Initial female level above which the comparison problem for `f` blows up,
/// given bounds `-δ₂ < m < -δ₁` on the negative male population.
pub fn threshold_f0<T: Real>(delta1: T, delta2: T, p: &DimensionalParams<T>) -> Result<T> {
    require_positive("delta1", delta1)?;
    if delta2 < delta1 {
        return Err(Error::param("delta2", format!("must be >= delta1 = {delta1}, got {delta2}")));
    }
    require_positive("beta", p.beta)?;
    p.validate()?;
    let two = T::lit(2.0);
    let k = p.capacity;
    let loss = p.beta * delta2 / two + p.beta * delta2 * delta2 / (two * k) + p.delta;
    Ok(loss / (p.beta * delta1 / (two * k)))
}

/// Introduction rate above which `f` blows up for any positive data (ODE form).
pub fn threshold_mu<T: Real>(delta2: T, p: &DimensionalParams<T>) -> Result<T> {
    require_positive("delta2", delta2)?;
    require_positive("beta", p.beta)?;
    p.validate()?;
    let two = T::lit(2.0);
    let k = p.capacity;
    let loss = p.beta * delta2 / two + (p.beta * delta2 * delta2 + p.delta) / (two * k);
    Ok(loss / (p.beta * delta2 / (two * k * p.delta)))
}

/// Spatial counterpart of [`threshold_mu`]; the bound has the same algebraic form.
pub fn threshold_mu_pde<T: Real>(delta2: T, p: &DimensionalParams<T>) -> Result<T> {
    threshold_mu(delta2, p)
}

/// Initial |m| above which the comparison problem for `m` blows up. `c1` is the
/// linear-loss constant of that comparison and must be supplied by the caller.
pub fn threshold_m0<T: Real>(c1: T, delta3: T, p: &DimensionalParams<T>) -> Result<T> {
    require_positive("delta3", delta3)?;
    require_positive("beta", p.beta)?;
    if !(c1 >= T::zero()) {
        return Err(Error::param("c1", format!("must be >= 0, got {c1}")));
    }
    p.validate()?;
    Ok(c1 / (p.beta * delta3 / (T::lit(2.0) * p.capacity)))
}

/// Rate δK above which the supermale steady state μ/δ exceeds capacity, making
/// G(f,0,s) negative on the male face.
pub fn trojan_negativity_trigger<T: Real>(p: &DimensionalParams<T>) -> T {
    p.delta * p.capacity
}
