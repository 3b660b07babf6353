//! Right-hand sides, parameter sets and closed-form criteria for the
//! Trojan Y Chromosome model family.
//!
//! Populations are carried in [`StateVector`]; sign is unconstrained because
//! negative males are one of the things this crate exists to observe.

mod criteria;
mod rhs;

pub use criteria::{
    positivity_criterion, stability_check, threshold_f0, threshold_m0, threshold_mu,
    threshold_mu_pde, trojan_negativity_trigger, Applicability, Face, PositivityReport,
    StabilityReport, StateBox, Witness, DEFAULT_FACE_POINTS,
};
pub use rhs::{
    logistic, rhs_classic3, rhs_classic3_dimensional, rhs_classic4, rhs_exp_logistic3,
    rhs_modified,
};

use std::fmt;

use crate::error::{Error, Result};
use crate::num::Real;

/// Scaled parameters: populations as fractions of carrying capacity, time in units of 1/δ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessParams<T> {
    /// Birth/death time-scale ratio βK/(2δ).
    pub r: T,
    /// Scaled supermale introduction rate μ/(δK).
    pub gamma: T,
    /// Allee threshold `a`; only read by [`ModelKind::ModifiedAllee`].
    pub allee: Option<T>,
    /// Scaled diffusivity, PDE runs only.
    pub diffusion: T,
}

impl<T: Real> DimensionlessParams<T> {
    pub fn new(r: T, gamma: T) -> Result<Self> {
        let p = Self {
            r,
            gamma,
            allee: None,
            diffusion: T::zero(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_allee(mut self, a: T) -> Result<Self> {
        self.allee = Some(a);
        self.validate()?;
        Ok(self)
    }

    pub fn with_diffusion(mut self, d: T) -> Result<Self> {
        self.diffusion = d;
        self.validate()?;
        Ok(self)
    }

    pub fn with_gamma(mut self, gamma: T) -> Result<Self> {
        self.gamma = gamma;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        nonneg("r", self.r)?;
        nonneg("gamma", self.gamma)?;
        nonneg("diffusion", self.diffusion)?;
        if let Some(a) = self.allee {
            if !(a > T::zero() && a < T::one()) {
                return Err(Error::param("allee", format!("must lie in (0, 1), got {a}")));
            }
        }
        Ok(())
    }
}

/// Parameters in physical units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionalParams<T> {
    /// Per-capita birth rate β (1/time).
    pub beta: T,
    /// Per-capita death rate δ (1/time).
    pub delta: T,
    /// Carrying capacity K (individuals).
    pub capacity: T,
    /// Introduction rate μ (individuals/time).
    pub mu: T,
    /// Diffusivity D (length²/time).
    pub diffusion: T,
}

impl<T: Real> DimensionalParams<T> {
    pub fn new(beta: T, delta: T, capacity: T, mu: T) -> Result<Self> {
        let p = Self {
            beta,
            delta,
            capacity,
            mu,
            diffusion: T::zero(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_diffusion(mut self, d: T) -> Result<Self> {
        self.diffusion = d;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        nonneg("beta", self.beta)?;
        nonneg("mu", self.mu)?;
        nonneg("diffusion", self.diffusion)?;
        positive("delta", self.delta)?;
        positive("capacity", self.capacity)
    }
}

fn nonneg<T: Real>(name: &'static str, v: T) -> Result<()> {
    if v.is_finite() && v >= T::zero() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite and >= 0, got {v}")))
    }
}

fn positive<T: Real>(name: &'static str, v: T) -> Result<()> {
    if v.is_finite() && v > T::zero() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite and > 0, got {v}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Three-species classic system (f, m, s).
    Classic3,
    /// Four-species system with trojan females, dimensional form only.
    Classic4,
    /// Allee/mate-competition system.
    ModifiedAllee,
    /// Mate-competition system with the Allee factor removed.
    ModifiedNoAllee,
    /// Classic3 with L replaced by exp(1 - (f+m+s)).
    ExpLogistic3,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Classic3,
        ModelKind::Classic4,
        ModelKind::ModifiedAllee,
        ModelKind::ModifiedNoAllee,
        ModelKind::ExpLogistic3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Classic3 => "classic3",
            ModelKind::Classic4 => "classic4",
            ModelKind::ModifiedAllee => "modified_allee",
            ModelKind::ModifiedNoAllee => "modified_no_allee",
            ModelKind::ExpLogistic3 => "exp_logistic3",
        }
    }

    pub fn species(self) -> &'static [Species] {
        match self {
            ModelKind::Classic4 => &Species::ALL,
            _ => &Species::ALL[..3],
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::ModelMismatch(format!("unknown model kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Species {
    Female,
    Male,
    Supermale,
    TrojanFemale,
}

impl Species {
    pub const ALL: [Species; 4] = [
        Species::Female,
        Species::Male,
        Species::Supermale,
        Species::TrojanFemale,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Species::Female => "f",
            Species::Male => "m",
            Species::Supermale => "s",
            Species::TrojanFemale => "r4",
        }
    }
}

impl fmt::Display for Species {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Params<T> {
    Dimensionless(DimensionlessParams<T>),
    Dimensional(DimensionalParams<T>),
}

impl<T: Real> Params<T> {
    pub fn diffusion(&self) -> T {
        match self {
            Params::Dimensionless(p) => p.diffusion,
            Params::Dimensional(p) => p.diffusion,
        }
    }
}

/// A model variant together with a parameter set it accepts.
///
/// Classic3 runs in either form (dimensional uses the unscaled rates);
/// Classic4 is dimensional only; the modified and exponential variants
/// exist only in scaled form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec<T> {
    kind: ModelKind,
    params: Params<T>,
}

impl<T: Real> ModelSpec<T> {
    pub fn new(kind: ModelKind, params: Params<T>) -> Result<Self> {
        match (&kind, &params) {
            (ModelKind::Classic3, Params::Dimensionless(p)) => p.validate()?,
            (ModelKind::Classic3, Params::Dimensional(p)) => p.validate()?,
            (ModelKind::Classic4, Params::Dimensional(p)) => p.validate()?,
            (ModelKind::Classic4, Params::Dimensionless(_)) => {
                return Err(Error::ModelMismatch(
                    "classic4 is only defined with dimensional parameters".into(),
                ))
            }
            (ModelKind::ModifiedAllee, Params::Dimensionless(p)) => {
                p.validate()?;
                if p.allee.is_none() {
                    return Err(Error::param("allee", "modified_allee requires an Allee threshold"));
                }
            }
            (ModelKind::ModifiedNoAllee | ModelKind::ExpLogistic3, Params::Dimensionless(p)) => {
                p.validate()?
            }
            (k, Params::Dimensional(_)) => {
                return Err(Error::ModelMismatch(format!(
                    "{k} is only defined with dimensionless parameters"
                )))
            }
        }
        Ok(Self { kind, params })
    }

    pub fn classic3(p: DimensionlessParams<T>) -> Result<Self> {
        Self::new(ModelKind::Classic3, Params::Dimensionless(p))
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn params(&self) -> &Params<T> {
        &self.params
    }

    pub fn dimensionless(&self) -> Option<&DimensionlessParams<T>> {
        match &self.params {
            Params::Dimensionless(p) => Some(p),
            Params::Dimensional(_) => None,
        }
    }

    pub fn species(&self) -> &'static [Species] {
        self.kind.species()
    }

    pub fn dim(&self) -> usize {
        self.species().len()
    }

    pub fn diffusion(&self) -> T {
        self.params.diffusion()
    }

    /// Returns a copy with the supermale stocking rate replaced (γ, or μ when dimensional).
    pub fn with_stocking(&self, rate: T) -> Result<Self> {
        let params = match self.params {
            Params::Dimensionless(p) => Params::Dimensionless(p.with_gamma(rate)?),
            Params::Dimensional(mut p) => {
                p.mu = rate;
                p.validate()?;
                Params::Dimensional(p)
            }
        };
        Ok(Self { kind: self.kind, params })
    }

    /// Time derivative of `x`.
    pub fn rhs(&self, x: &StateVector<T>) -> StateVector<T> {
        match (self.kind, &self.params) {
            (ModelKind::Classic3, Params::Dimensionless(p)) => rhs_classic3(p, x),
            (ModelKind::Classic3, Params::Dimensional(p)) => rhs_classic3_dimensional(p, x),
            (ModelKind::Classic4, Params::Dimensional(p)) => rhs_classic4(p, x),
            (ModelKind::ModifiedAllee, Params::Dimensionless(p)) => rhs_modified(p, x, p.allee),
            (ModelKind::ModifiedNoAllee, Params::Dimensionless(p)) => rhs_modified(p, x, None),
            (ModelKind::ExpLogistic3, Params::Dimensionless(p)) => rhs_exp_logistic3(p, x),
            _ => unreachable!("ModelSpec::new rejects this combination"),
        }
    }

    /// Slice form of [`rhs`](Self::rhs), used by the integrators.
    #[inline]
    pub fn rhs_into(&self, y: &[T], dy: &mut [T]) {
        let x = StateVector::from_slice(y);
        let d = self.rhs(&x);
        d.write_to(dy);
    }
}

/// Instantaneous populations. `r4` is present exactly for four-species models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector<T> {
    pub f: T,
    pub m: T,
    pub s: T,
    pub r4: Option<T>,
}

impl<T: Real> StateVector<T> {
    pub fn new(f: T, m: T, s: T) -> Self {
        Self { f, m, s, r4: None }
    }

    pub fn with_trojan(f: T, m: T, s: T, r4: T) -> Self {
        Self {
            f,
            m,
            s,
            r4: Some(r4),
        }
    }

    /// Three entries give a three-species state, four add the trojan female.
    pub fn from_slice(v: &[T]) -> Self {
        match v.len() {
            3 => Self::new(v[0], v[1], v[2]),
            4 => Self::with_trojan(v[0], v[1], v[2], v[3]),
            n => panic!("state vectors have 3 or 4 components, got {n}"),
        }
    }

    pub fn len(&self) -> usize {
        if self.r4.is_some() {
            4
        } else {
            3
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn to_vec(&self) -> Vec<T> {
        let mut v = vec![self.f, self.m, self.s];
        v.extend(self.r4);
        v
    }

    pub fn write_to(&self, out: &mut [T]) {
        out[0] = self.f;
        out[1] = self.m;
        out[2] = self.s;
        if let Some(r4) = self.r4 {
            out[3] = r4;
        }
    }

    pub fn get(&self, species: Species) -> Option<T> {
        match species {
            Species::Female => Some(self.f),
            Species::Male => Some(self.m),
            Species::Supermale => Some(self.s),
            Species::TrojanFemale => self.r4,
        }
    }

    /// Sum of the three species entering the logistic term (r4 excluded).
    pub fn total3(&self) -> T {
        self.f + self.m + self.s
    }

    pub fn is_finite(&self) -> bool {
        self.f.is_finite()
            && self.m.is_finite()
            && self.s.is_finite()
            && self.r4.is_none_or(|r| r.is_finite())
    }

    pub fn scale(&self, k: T) -> Self {
        Self {
            f: self.f * k,
            m: self.m * k,
            s: self.s * k,
            r4: self.r4.map(|r| r * k),
        }
    }
}

/// Maps a dimensional parameter set and state onto the scaled system:
/// populations over K, r = βK/(2δ), γ = μ/(δK), time τ = δt and D/δ for diffusion
/// (the spatial domain is taken as already of unit length).
pub fn nondimensionalize<T: Real>(
    p: &DimensionalParams<T>,
    x_dim: &StateVector<T>,
) -> Result<(DimensionlessParams<T>, StateVector<T>)> {
    positive("capacity", p.capacity)?;
    positive("delta", p.delta)?;
    p.validate()?;
    let two = T::lit(2.0);
    let scaled = DimensionlessParams {
        r: p.beta * p.capacity / (two * p.delta),
        gamma: p.mu / (p.delta * p.capacity),
        allee: None,
        diffusion: p.diffusion / p.delta,
    };
    Ok((scaled, x_dim.scale(T::one() / p.capacity)))
}
