//! Fehlberg 4(5) embedded pair with local extrapolation and cubic Hermite dense output.

use crate::num::Real;

const C: [f64; 6] = [0.0, 0.25, 0.375, 12.0 / 13.0, 1.0, 0.5];

const A: [[f64; 5]; 6] = [
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [0.25, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 32.0, 9.0 / 32.0, 0.0, 0.0, 0.0],
    [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0, 0.0, 0.0],
    [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0, 0.0],
    [-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0],
];

/// Fifth-order weights (the propagated solution).
const B5: [f64; 6] = [
    16.0 / 135.0,
    0.0,
    6656.0 / 12825.0,
    28561.0 / 56430.0,
    -9.0 / 50.0,
    2.0 / 55.0,
];

/// Fourth-order weights (error estimate only).
const B4: [f64; 6] = [
    25.0 / 216.0,
    0.0,
    1408.0 / 2565.0,
    2197.0 / 4104.0,
    -1.0 / 5.0,
    0.0,
];

/// Scratch buffers for one system size.
pub(crate) struct Rkf45<T> {
    c: [T; 6],
    a: [[T; 5]; 6],
    b5: [T; 6],
    e: [T; 6],
    k: [Vec<T>; 6],
    stage: Vec<T>,
    pub(crate) y_new: Vec<T>,
}

impl<T: Real> Rkf45<T> {
    pub(crate) fn new(dim: usize) -> Self {
        let a = A.map(|row| row.map(T::lit));
        let mut e = [T::zero(); 6];
        for i in 0..6 {
            e[i] = T::lit(B5[i] - B4[i]);
        }
        Self {
            c: C.map(T::lit),
            a,
            b5: B5.map(T::lit),
            e,
            k: std::array::from_fn(|_| vec![T::zero(); dim]),
            stage: vec![T::zero(); dim],
            y_new: vec![T::zero(); dim],
        }
    }

    /// Derivative at the start of the next attempt; refreshed by the caller after acceptance.
    pub(crate) fn k1_mut(&mut self) -> &mut [T] {
        &mut self.k[0]
    }

    pub(crate) fn k1(&self) -> &[T] {
        &self.k[0]
    }

    /// Attempts a step of size `h` from `(t, y)`, leaving the candidate in
    /// `y_new` and returning the scaled max-norm error estimate (NaN if any
    /// stage went non-finite).
    pub(crate) fn attempt<F>(&mut self, rhs: &F, t: T, y: &[T], h: T, abs_tol: T, rel_tol: T) -> T
    where
        F: Fn(T, &[T], &mut [T]),
    {
        let n = y.len();
        for s in 1..6 {
            for i in 0..n {
                let mut acc = T::zero();
                for j in 0..s {
                    acc = acc + self.a[s][j] * self.k[j][i];
                }
                self.stage[i] = y[i] + h * acc;
            }
            let (_, rest) = self.k.split_at_mut(s);
            rhs(t + self.c[s] * h, &self.stage, &mut rest[0]);
        }
        let mut worst = T::zero();
        for i in 0..n {
            let mut hi = T::zero();
            let mut err = T::zero();
            for s in 0..6 {
                hi = hi + self.b5[s] * self.k[s][i];
                err = err + self.e[s] * self.k[s][i];
            }
            let yn = y[i] + h * hi;
            self.y_new[i] = yn;
            let scale = abs_tol + rel_tol * y[i].abs().max(yn.abs());
            let ratio = (h * err).abs() / scale;
            if !ratio.is_finite() || !yn.is_finite() {
                return T::nan();
            }
            worst = worst.max(ratio);
        }
        worst
    }
}

/// Cubic Hermite interpolant over one accepted step.
pub(crate) struct Hermite<'a, T> {
    pub t0: T,
    pub h: T,
    pub y0: &'a [T],
    pub f0: &'a [T],
    pub y1: &'a [T],
    pub f1: &'a [T],
}

impl<T: Real> Hermite<'_, T> {
    pub(crate) fn eval(&self, t: T, out: &mut [T]) {
        let th = (t - self.t0) / self.h;
        let one = T::one();
        let two = T::lit(2.0);
        for i in 0..out.len() {
            let dy = self.y1[i] - self.y0[i];
            out[i] = (one - th) * self.y0[i]
                + th * self.y1[i]
                + th * (th - one)
                    * ((one - two * th) * dy + (th - one) * self.h * self.f0[i] + th * self.h * self.f1[i]);
        }
    }
}
