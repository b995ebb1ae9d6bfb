//! Second-order forward-mode scalar differentiation.
//!
//! A [`Jet2`] carries a value together with its gradient and Hessian with
//! respect to the chart coordinates. Arithmetic propagates both derivative
//! orders through the chain rule, so any chart-evaluable scalar field yields
//! exact-to-roundoff first and second derivatives. Every curvature oracle in
//! this crate is built on top of this algebra.
//!
//! Gradients and Hessians are stored densely; chart dimensions stay small
//! (at most ~12), so sparsity would only add bookkeeping. The Hessian is
//! re-symmetrized after every multiplication to keep roundoff drift out of
//! the symmetry invariant.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Truncated second-order Taylor scalar: value, gradient, Hessian.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
}

impl Jet2 {
    /// Constant jet: zero gradient and Hessian in `dim` variables.
    pub fn constant(value: f64, dim: usize) -> Self {
        Jet2 {
            value,
            grad: DVector::zeros(dim),
            hess: DMatrix::zeros(dim, dim),
        }
    }

    /// Jet of the i-th coordinate function at a point whose i-th coordinate
    /// is `value`: gradient e_i, Hessian zero.
    pub fn variable(value: f64, index: usize, dim: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, dim });
        }
        let mut grad = DVector::zeros(dim);
        grad[index] = 1.0;
        Ok(Jet2 {
            value,
            grad,
            hess: DMatrix::zeros(dim, dim),
        })
    }

    /// Seed every coordinate of `x` as an independent variable.
    pub fn seed_point(x: &[f64]) -> Vec<Jet2> {
        let d = x.len();
        x.iter()
            .enumerate()
            .map(|(i, &v)| Jet2::variable(v, i, d).expect("index < dim by construction"))
            .collect()
    }

    /// Constant jets at `x` (no derivative tracking); used for value-only
    /// evaluation of jet fields, e.g. inside quadrature loops.
    pub fn seed_constants(x: &[f64]) -> Vec<Jet2> {
        let d = x.len();
        x.iter().map(|&v| Jet2::constant(v, d)).collect()
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    fn symmetrize(mut self) -> Self {
        let d = self.dim();
        for i in 0..d {
            for j in (i + 1)..d {
                let avg = 0.5 * (self.hess[(i, j)] + self.hess[(j, i)]);
                self.hess[(i, j)] = avg;
                self.hess[(j, i)] = avg;
            }
        }
        self
    }

    /// Chain rule through a scalar function with derivatives `d1 = f'(v)`,
    /// `d2 = f''(v)` at `v = self.value`.
    fn compose(&self, value: f64, d1: f64, d2: f64) -> Jet2 {
        Jet2 {
            value,
            grad: &self.grad * d1,
            hess: &self.hess * d1 + (&self.grad * self.grad.transpose()) * d2,
        }
    }

    pub fn try_recip(&self) -> Result<Jet2> {
        if self.value == 0.0 {
            return Err(Error::DivisionByZero);
        }
        let inv = 1.0 / self.value;
        Ok(self.compose(inv, -inv * inv, 2.0 * inv * inv * inv))
    }

    pub fn recip(&self) -> Jet2 {
        self.try_recip().expect("jet reciprocal of zero value")
    }

    pub fn try_sqrt(&self) -> Result<Jet2> {
        if self.value <= 0.0 {
            return Err(Error::NonPositiveArgument {
                op: "sqrt",
                value: self.value,
            });
        }
        let s = self.value.sqrt();
        Ok(self.compose(s, 0.5 / s, -0.25 / (s * self.value)))
    }

    pub fn sqrt(&self) -> Jet2 {
        self.try_sqrt().expect("jet sqrt of non-positive value")
    }

    pub fn try_ln(&self) -> Result<Jet2> {
        if self.value <= 0.0 {
            return Err(Error::NonPositiveArgument {
                op: "log",
                value: self.value,
            });
        }
        let inv = 1.0 / self.value;
        Ok(self.compose(self.value.ln(), inv, -inv * inv))
    }

    pub fn ln(&self) -> Jet2 {
        self.try_ln().expect("jet log of non-positive value")
    }

    pub fn exp(&self) -> Jet2 {
        let e = self.value.exp();
        self.compose(e, e, e)
    }

    pub fn sin(&self) -> Jet2 {
        let (s, c) = self.value.sin_cos();
        self.compose(s, c, -s)
    }

    pub fn cos(&self) -> Jet2 {
        let (s, c) = self.value.sin_cos();
        self.compose(c, -s, -c)
    }

    pub fn powi(&self, n: i32) -> Jet2 {
        match n {
            0 => Jet2::constant(1.0, self.dim()),
            1 => self.clone(),
            _ => {
                let v = self.value.powi(n - 2);
                self.compose(
                    v * self.value * self.value,
                    f64::from(n) * v * self.value,
                    f64::from(n) * f64::from(n - 1) * v,
                )
            }
        }
    }

    pub fn neg(&self) -> Jet2 {
        Jet2 {
            value: -self.value,
            grad: -&self.grad,
            hess: -&self.hess,
        }
    }

    pub fn scale(&self, s: f64) -> Jet2 {
        Jet2 {
            value: self.value * s,
            grad: &self.grad * s,
            hess: &self.hess * s,
        }
    }

    pub fn add_scalar(&self, s: f64) -> Jet2 {
        Jet2 {
            value: self.value + s,
            grad: self.grad.clone(),
            hess: self.hess.clone(),
        }
    }

    pub fn try_div(&self, rhs: &Jet2) -> Result<Jet2> {
        Ok(self * &rhs.try_recip()?)
    }
}

impl std::ops::Add for &Jet2 {
    type Output = Jet2;
    fn add(self, rhs: &Jet2) -> Jet2 {
        Jet2 {
            value: self.value + rhs.value,
            grad: &self.grad + &rhs.grad,
            hess: &self.hess + &rhs.hess,
        }
    }
}

impl std::ops::Sub for &Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: &Jet2) -> Jet2 {
        Jet2 {
            value: self.value - rhs.value,
            grad: &self.grad - &rhs.grad,
            hess: &self.hess - &rhs.hess,
        }
    }
}

impl std::ops::Mul for &Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: &Jet2) -> Jet2 {
        // Leibniz: (fg)'' = f''g + f'g'^T + g'f'^T + fg''
        let cross = &self.grad * rhs.grad.transpose();
        Jet2 {
            value: self.value * rhs.value,
            grad: &self.grad * rhs.value + &rhs.grad * self.value,
            hess: &self.hess * rhs.value + &rhs.hess * self.value + &cross + cross.transpose(),
        }
        .symmetrize()
    }
}

impl std::ops::Div for &Jet2 {
    type Output = Jet2;
    fn div(self, rhs: &Jet2) -> Jet2 {
        self.try_div(rhs).expect("jet division by zero value")
    }
}

macro_rules! forward_owned_ops {
    ($($trait:ident :: $method:ident),*) => {$(
        impl std::ops::$trait for Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: Jet2) -> Jet2 {
                std::ops::$trait::$method(&self, &rhs)
            }
        }
        impl std::ops::$trait<&Jet2> for Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: &Jet2) -> Jet2 {
                std::ops::$trait::$method(&self, rhs)
            }
        }
        impl std::ops::$trait<Jet2> for &Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: Jet2) -> Jet2 {
                std::ops::$trait::$method(self, &rhs)
            }
        }
    )*};
}

forward_owned_ops!(Add::add, Sub::sub, Mul::mul, Div::div);

impl std::ops::Neg for &Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        Jet2::neg(self)
    }
}

impl std::ops::Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        Jet2::neg(&self)
    }
}

/// Dense matrix with jet entries, row-major. Sized for chart dimensions,
/// so plain loops beat anything fancier.
#[derive(Debug, Clone)]
pub struct JetMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Jet2>,
}

impl JetMatrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Jet2) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        JetMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize, dim: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| Jet2::constant(0.0, dim))
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Jet2 {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Jet2) {
        self.data[i * self.cols + j] = v;
    }

    /// Value part as a plain matrix.
    pub fn values(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).value)
    }

    /// Gradient of entry (i, j): the vector of partials d_k m_ij.
    pub fn entry_grad(&self, i: usize, j: usize) -> &DVector<f64> {
        &self.get(i, j).grad
    }

    pub fn mul_vec(&self, v: &[Jet2]) -> Vec<Jet2> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = self.get(i, 0) * &v[0];
                for j in 1..self.cols {
                    acc = &acc + &(self.get(i, j) * &v[j]);
                }
                acc
            })
            .collect()
    }

    pub fn transpose(&self) -> JetMatrix {
        JetMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul_mat(&self, other: &JetMatrix) -> JetMatrix {
        assert_eq!(self.cols, other.rows);
        JetMatrix::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = self.get(i, 0) * other.get(0, j);
            for k in 1..self.cols {
                acc = &acc + &(self.get(i, k) * other.get(k, j));
            }
            acc
        })
    }

    /// Determinant by LU elimination with partial pivoting on values.
    pub fn det(&self) -> Result<Jet2> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let dim = if n > 0 { m.get(0, 0).dim() } else { 0 };
        let mut det = Jet2::constant(1.0, dim);
        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&a, &b| {
                    m.get(a, col)
                        .value
                        .abs()
                        .partial_cmp(&m.get(b, col).value.abs())
                        .unwrap()
                })
                .unwrap();
            if m.get(pivot_row, col).value.abs() < 1e-300 {
                return Err(Error::SingularMetric);
            }
            if pivot_row != col {
                for j in 0..n {
                    let a = m.get(col, j).clone();
                    let b = m.get(pivot_row, j).clone();
                    m.set(col, j, b);
                    m.set(pivot_row, j, a);
                }
                det = det.neg();
            }
            let pivot = m.get(col, col).clone();
            det = &det * &pivot;
            for row in (col + 1)..n {
                let factor = m.get(row, col) / &pivot;
                for j in col..n {
                    let updated = m.get(row, j) - &(&factor * m.get(col, j));
                    m.set(row, j, updated);
                }
            }
        }
        Ok(det)
    }

    /// Solve `self * X = rhs` by Gaussian elimination (partial pivoting on
    /// values). Consumes copies; fine at these sizes.
    pub fn solve(&self, rhs: &JetMatrix) -> Result<JetMatrix> {
        assert_eq!(self.rows, self.cols);
        assert_eq!(self.rows, rhs.rows);
        let n = self.rows;
        let mut a = self.clone();
        let mut b = rhs.clone();
        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&p, &q| {
                    a.get(p, col)
                        .value
                        .abs()
                        .partial_cmp(&a.get(q, col).value.abs())
                        .unwrap()
                })
                .unwrap();
            if a.get(pivot_row, col).value.abs() < 1e-300 {
                return Err(Error::SingularMetric);
            }
            if pivot_row != col {
                for j in 0..n {
                    let (x, y) = (a.get(col, j).clone(), a.get(pivot_row, j).clone());
                    a.set(col, j, y);
                    a.set(pivot_row, j, x);
                }
                for j in 0..b.cols {
                    let (x, y) = (b.get(col, j).clone(), b.get(pivot_row, j).clone());
                    b.set(col, j, y);
                    b.set(pivot_row, j, x);
                }
            }
            let pivot = a.get(col, col).clone();
            for row in 0..n {
                if row == col {
                    continue;
                }
                let factor = a.get(row, col) / &pivot;
                for j in col..n {
                    let updated = a.get(row, j) - &(&factor * a.get(col, j));
                    a.set(row, j, updated);
                }
                for j in 0..b.cols {
                    let updated = b.get(row, j) - &(&factor * b.get(col, j));
                    b.set(row, j, updated);
                }
            }
        }
        for i in 0..n {
            let pivot = a.get(i, i).clone();
            for j in 0..b.cols {
                let updated = b.get(i, j) / &pivot;
                b.set(i, j, updated);
            }
        }
        Ok(b)
    }

    pub fn inverse(&self) -> Result<JetMatrix> {
        let n = self.rows;
        let dim = self.get(0, 0).dim();
        let id = JetMatrix::from_fn(n, n, |i, j| {
            Jet2::constant(if i == j { 1.0 } else { 0.0 }, dim)
        });
        self.solve(&id)
    }
}

/// Max discrepancy between the jet gradient/Hessian of `f` at `x` and
/// second-order central finite differences with step `h`.
///
/// Lives here for the jet module's own validation; the rest of the crate
/// trusts jets once this gate passes.
pub fn finite_difference_crosscheck(
    f: &dyn Fn(&[Jet2]) -> Jet2,
    x: &[f64],
    h: f64,
) -> Result<f64> {
    let d = x.len();
    let eval = |p: &[f64]| -> Result<f64> {
        let v = f(&Jet2::seed_constants(p)).value;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite {
                context: "finite-difference stencil",
            })
        }
    };
    let jet = f(&Jet2::seed_point(x));

    let mut worst: f64 = 0.0;
    let f0 = eval(x)?;
    for i in 0..d {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += h;
        xm[i] -= h;
        let (fp, fm) = (eval(&xp)?, eval(&xm)?);
        worst = worst.max((jet.grad[i] - (fp - fm) / (2.0 * h)).abs());
        worst = worst.max((jet.hess[(i, i)] - (fp - 2.0 * f0 + fm) / (h * h)).abs());
        for j in (i + 1)..d {
            let mut xpp = x.to_vec();
            let mut xpm = x.to_vec();
            let mut xmp = x.to_vec();
            let mut xmm = x.to_vec();
            xpp[i] += h;
            xpp[j] += h;
            xpm[i] += h;
            xpm[j] -= h;
            xmp[i] -= h;
            xmp[j] += h;
            xmm[i] -= h;
            xmm[j] -= h;
            let fd = (eval(&xpp)? - eval(&xpm)? - eval(&xmp)? + eval(&xmm)?) / (4.0 * h * h);
            worst = worst.max((jet.hess[(i, j)] - fd).abs());
        }
    }
    Ok(worst)
}
