//! Method-of-lines discretization of the reaction–diffusion systems on (0, 1).
//!
//! Species are stacked species-major into one ODE state and handed to the
//! same RKF45 driver the point models use, so events and blow-up are detected
//! on spatial reductions (min over x for negativity, max-norm for blow-up).

mod grid;

pub use grid::{laplacian, Boundary, SpatialGrid};

use crate::error::{Error, Result};
use crate::models::{ModelSpec, Species, StateVector};
use crate::num::Real;
use crate::ode::{run, EventLog, IntegratorConfig, OdeSystem, Status};
use grid::laplacian_into;

/// Initial-profile catalog.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile<T> {
    Constant(T),
    /// x(1 − x)
    Parabola,
    /// 4 s_max x(1 − x), peaking at `s_max` in the middle.
    ScaledParabola { s_max: T },
}

impl<T: Real> Profile<T> {
    pub fn eval(&self, x: T) -> T {
        match *self {
            Profile::Constant(c) => c,
            Profile::Parabola => x * (T::one() - x),
            Profile::ScaledParabola { s_max } => T::lit(4.0) * s_max * x * (T::one() - x),
        }
    }
}

/// Nodal values of every species on all `n + 2` nodes (boundaries included).
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    pub values: Vec<Vec<T>>,
}

impl<T: Real> Field<T> {
    pub fn from_profiles(grid: &SpatialGrid<T>, profiles: &[Profile<T>]) -> Self {
        let values = profiles
            .iter()
            .map(|p| (0..grid.nodes()).map(|i| p.eval(grid.x(i))).collect())
            .collect();
        Self { values }
    }

    pub fn species_count(&self) -> usize {
        self.values.len()
    }

    /// State at one node.
    pub fn at(&self, node: usize) -> StateVector<T> {
        let v: Vec<T> = self.values.iter().map(|s| s[node]).collect();
        StateVector::from_slice(&v)
    }
}

/// Spatial reductions of one snapshot, indexed like the model's species.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics<T> {
    pub min: Vec<T>,
    pub max_norm: Vec<T>,
    pub l1_norm: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldTrajectory<T> {
    pub species: Vec<Species>,
    pub times: Vec<T>,
    /// One entry per element of `times`.
    pub diagnostics: Vec<Diagnostics<T>>,
    /// Full fields at t = 0, at requested snapshot times, and at the final time.
    pub snapshots: Vec<(T, Field<T>)>,
    pub status: Status,
}

impl<T: Real> FieldTrajectory<T> {
    /// Recorded min over x of `species`, aligned with `times`.
    pub fn min_history(&self, species: Species) -> Option<Vec<T>> {
        let c = self.species.iter().position(|&s| s == species)?;
        Some(self.diagnostics.iter().map(|d| d.min[c]).collect())
    }

    pub fn l1_history(&self, species: Species) -> Option<Vec<T>> {
        let c = self.species.iter().position(|&s| s == species)?;
        Some(self.diagnostics.iter().map(|d| d.l1_norm[c]).collect())
    }
}

/// The stacked semi-discrete system.
struct SemiDiscrete<'a, T> {
    model: &'a ModelSpec<T>,
    grid: &'a SpatialGrid<T>,
    species: usize,
    unknowns: usize,
    diffusion: T,
}

impl<T: Real> SemiDiscrete<'_, T> {
    fn block<'b>(&self, y: &'b [T], c: usize) -> &'b [T] {
        &y[c * self.unknowns..(c + 1) * self.unknowns]
    }

    /// Expands a stacked state to nodal values (Dirichlet boundaries inserted as 0).
    fn to_field(&self, y: &[T]) -> Field<T> {
        let first = self.grid.first_unknown();
        let values = (0..self.species)
            .map(|c| {
                let mut v = vec![T::zero(); self.grid.nodes()];
                v[first..first + self.unknowns].copy_from_slice(self.block(y, c));
                v
            })
            .collect();
        Field { values }
    }

    fn diagnostics(&self, y: &[T]) -> Diagnostics<T> {
        let field = self.to_field(y);
        let mut d = Diagnostics {
            min: Vec::with_capacity(self.species),
            max_norm: Vec::with_capacity(self.species),
            l1_norm: Vec::with_capacity(self.species),
        };
        for v in &field.values {
            d.min.push(v.iter().copied().fold(T::infinity(), T::min));
            d.max_norm.push(v.iter().fold(T::zero(), |a, b| a.max(b.abs())));
            d.l1_norm.push(self.grid.l1_norm(v));
        }
        d
    }
}

impl<T: Real> OdeSystem<T> for SemiDiscrete<'_, T> {
    fn dim(&self) -> usize {
        self.species * self.unknowns
    }

    fn rhs(&self, _t: T, y: &[T], dy: &mut [T]) {
        let u = self.unknowns;
        let mut point = [T::zero(); 4];
        let mut rate = [T::zero(); 4];
        let k = self.species;
        for j in 0..u {
            for c in 0..k {
                point[c] = y[c * u + j];
            }
            self.model.rhs_into(&point[..k], &mut rate[..k]);
            for c in 0..k {
                dy[c * u + j] = rate[c];
            }
        }
        if self.diffusion != T::zero() {
            for c in 0..k {
                let (lo, hi) = (c * u, (c + 1) * u);
                laplacian_into(&y[lo..hi], self.grid, self.diffusion, &mut dy[lo..hi]);
            }
        }
    }

    fn species(&self) -> &[Species] {
        self.model.species()
    }

    fn lowest(&self, y: &[T], c: usize) -> T {
        self.block(y, c).iter().copied().fold(T::infinity(), T::min)
    }

    fn extreme(&self, y: &[T], c: usize) -> T {
        self.block(y, c)
            .iter()
            .copied()
            .fold(T::zero(), |a, b| if b.abs() > a.abs() { b } else { a })
    }
}

/// Integrates the reaction–diffusion form of `model` with snapshots at t = 0
/// and at the final time.
pub fn integrate_pde<T: Real>(
    model: &ModelSpec<T>,
    fields0: &Field<T>,
    grid: &SpatialGrid<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<(FieldTrajectory<T>, EventLog<T>)> {
    integrate_pde_with(model, fields0, grid, cfg, &[])
}

/// As [`integrate_pde`], additionally storing full fields at `snapshot_times`.
pub fn integrate_pde_with<T: Real>(
    model: &ModelSpec<T>,
    fields0: &Field<T>,
    grid: &SpatialGrid<T>,
    cfg: &IntegratorConfig<T>,
    snapshot_times: &[T],
) -> Result<(FieldTrajectory<T>, EventLog<T>)> {
    check_fields(model, fields0, grid)?;
    let sys = SemiDiscrete {
        model,
        grid,
        species: model.dim(),
        unknowns: grid.unknowns(),
        diffusion: model.diffusion(),
    };
    let first = grid.first_unknown();
    let mut y0 = Vec::with_capacity(sys.dim());
    for v in &fields0.values {
        y0.extend_from_slice(&v[first..first + sys.unknowns]);
    }

    let mut wanted: Vec<T> = snapshot_times.to_vec();
    wanted.sort_by(|a, b| a.partial_cmp(b).expect("finite snapshot times"));
    let mut times = Vec::new();
    let mut diagnostics = Vec::new();
    let mut snapshots = vec![(T::zero(), fields0.clone())];
    let mut next = 0;
    let mut last: Option<(T, Vec<T>)> = None;
    let mut sink = |t: T, y: &[T]| {
        times.push(t);
        diagnostics.push(sys.diagnostics(y));
        while next < wanted.len() && wanted[next] <= t {
            if wanted[next] == t && t > T::zero() {
                snapshots.push((t, sys.to_field(y)));
            }
            next += 1;
        }
        last = Some((t, y.to_vec()));
    };
    let out = run(&sys, &y0, cfg, &wanted, Some(&mut sink))?;
    if let Some((t, y)) = last {
        if snapshots.last().is_none_or(|(ts, _)| *ts < t) {
            snapshots.push((t, sys.to_field(&y)));
        }
    }
    Ok((
        FieldTrajectory {
            species: model.species().to_vec(),
            times,
            diagnostics,
            snapshots,
            status: out.status,
        },
        out.events,
    ))
}

fn check_fields<T: Real>(model: &ModelSpec<T>, fields: &Field<T>, grid: &SpatialGrid<T>) -> Result<()> {
    if fields.species_count() != model.dim() {
        return Err(Error::LengthMismatch {
            expected: model.dim(),
            found: fields.species_count(),
        });
    }
    for v in &fields.values {
        if v.len() != grid.nodes() {
            return Err(Error::LengthMismatch {
                expected: grid.nodes(),
                found: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::param("fields0", "initial fields must be finite"));
        }
        if grid.boundary() == Boundary::DirichletHomogeneous
            && (v[0] != T::zero() || v[grid.nodes() - 1] != T::zero())
        {
            return Err(Error::param(
                "fields0",
                "Dirichlet initial fields must vanish at x = 0 and x = 1",
            ));
        }
    }
    Ok(())
}
