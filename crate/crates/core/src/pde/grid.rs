use std::fmt;

use crate::error::{Error, Result};
use crate::num::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Zero flux; boundary nodes are unknowns closed with mirrored ghost points.
    NeumannHomogeneous,
    /// Zero value; boundary nodes are fixed and not integrated.
    DirichletHomogeneous,
}

impl Boundary {
    pub fn name(self) -> &'static str {
        match self {
            Boundary::NeumannHomogeneous => "neumann",
            Boundary::DirichletHomogeneous => "dirichlet",
        }
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Uniform grid on (0, 1): `n` interior nodes at `x_i = i h`, `h = 1/(n+1)`,
/// plus the two boundary nodes `x_0 = 0` and `x_{n+1} = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid<T> {
    n: usize,
    h: T,
    bc: Boundary,
}

impl<T: Real> SpatialGrid<T> {
    pub fn new(n: usize, bc: Boundary) -> Result<Self> {
        if n < 3 {
            return Err(Error::param("n", format!("need at least 3 interior points, got {n}")));
        }
        Ok(Self {
            n,
            h: T::one() / T::lit((n + 1) as f64),
            bc,
        })
    }

    pub fn interior(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> T {
        self.h
    }

    pub fn boundary(&self) -> Boundary {
        self.bc
    }

    /// Node count including both boundary nodes.
    pub fn nodes(&self) -> usize {
        self.n + 2
    }

    pub fn x(&self, node: usize) -> T {
        if node == self.n + 1 {
            T::one()
        } else {
            T::lit(node as f64) * self.h
        }
    }

    /// Number of integrated values per species.
    pub fn unknowns(&self) -> usize {
        match self.bc {
            Boundary::NeumannHomogeneous => self.n + 2,
            Boundary::DirichletHomogeneous => self.n,
        }
    }

    /// Node index of the first unknown.
    pub fn first_unknown(&self) -> usize {
        match self.bc {
            Boundary::NeumannHomogeneous => 0,
            Boundary::DirichletHomogeneous => 1,
        }
    }

    /// Trapezoid weights per node: interior cells of width h, half cells at the ends.
    pub fn l1_norm(&self, nodal: &[T]) -> T {
        debug_assert_eq!(nodal.len(), self.nodes());
        let half = T::lit(0.5);
        let inner: T = nodal[1..=self.n].iter().map(|v| v.abs()).sum();
        self.h * (inner + half * (nodal[0].abs() + nodal[self.n + 1].abs()))
    }
}

/// Second-order central differences over the unknowns of `grid`.
pub fn laplacian<T: Real>(values: &[T], grid: &SpatialGrid<T>) -> Result<Vec<T>> {
    if values.len() != grid.unknowns() {
        return Err(Error::LengthMismatch {
            expected: grid.unknowns(),
            found: values.len(),
        });
    }
    let mut out = vec![T::zero(); values.len()];
    laplacian_into(values, grid, T::one(), &mut out);
    Ok(out)
}

/// Adds `coeff * Δu` to `out`.
pub(crate) fn laplacian_into<T: Real>(u: &[T], grid: &SpatialGrid<T>, coeff: T, out: &mut [T]) {
    let len = u.len();
    let scale = coeff / (grid.h * grid.h);
    let two = T::lit(2.0);
    match grid.bc {
        Boundary::NeumannHomogeneous => {
            // ghost u_{-1} = u_1 and u_{n+2} = u_n
            out[0] = out[0] + scale * two * (u[1] - u[0]);
            for i in 1..len - 1 {
                out[i] = out[i] + scale * (u[i - 1] - two * u[i] + u[i + 1]);
            }
            out[len - 1] = out[len - 1] + scale * two * (u[len - 2] - u[len - 1]);
        }
        Boundary::DirichletHomogeneous => {
            for i in 0..len {
                let left = if i == 0 { T::zero() } else { u[i - 1] };
                let right = if i + 1 == len { T::zero() } else { u[i + 1] };
                out[i] = out[i] + scale * (left - two * u[i] + right);
            }
        }
    }
}
