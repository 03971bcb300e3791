//! The polytope `D(m, a)` and the concave objective `f_a` on it.
//!
//! For `x = (x_1, …, x_{m−2})` the objective is `a log a` plus `φ` of the `m`
//! affine forms
//!
//! ```text
//! a − x_1,  x_1 − x_2, …, x_{m−3} − x_{m−2},  1 − a − Σx,  Σx + x_{m−2} + a − 1
//! ```
//!
//! and `D(m, a)` is exactly the set where all of them are non-negative.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_range, Error, Result};
use crate::markov::phi0;

/// Slack allowed on each inequality of `D(m, a)`.
pub const DOMAIN_TOL: f64 = 1e-12;

/// The affine forms `u_t(x) = c_t · x + b_t` whose φ-values make up `f_a`.
#[derive(Clone, Debug)]
pub(crate) struct AffineForms {
    pub coeffs: Vec<Vec<f64>>,
    pub offsets: Vec<f64>,
}

impl AffineForms {
    pub fn new(m: usize, a: f64) -> Self {
        let d = m - 2;
        let mut coeffs = Vec::with_capacity(m);
        let mut offsets = Vec::with_capacity(m);
        let mut row = vec![0.0; d];
        row[0] = -1.0;
        coeffs.push(row);
        offsets.push(a);
        for i in 1..d {
            let mut row = vec![0.0; d];
            row[i - 1] = 1.0;
            row[i] = -1.0;
            coeffs.push(row);
            offsets.push(0.0);
        }
        coeffs.push(vec![-1.0; d]);
        offsets.push(1.0 - a);
        let mut row = vec![1.0; d];
        row[d - 1] = 2.0;
        coeffs.push(row);
        offsets.push(a - 1.0);
        AffineForms { coeffs, offsets }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.coeffs
            .iter()
            .zip(&self.offsets)
            .map(|(c, b)| c.iter().zip(x).map(|(ci, xi)| ci * xi).sum::<f64>() + b)
            .collect()
    }
}

fn check_m(m: usize) -> Result<()> {
    if m < 3 {
        return Err(Error::Unsupported(format!("polytope needs m >= 3, got {m}")));
    }
    Ok(())
}

/// Membership in `D(m, a)` with slack [`DOMAIN_TOL`].
pub fn domain_contains(m: usize, a: f64, x: &[f64]) -> bool {
    m >= 3
        && a.is_finite()
        && x.len() == m - 2
        && x.iter().all(|v| v.is_finite())
        && AffineForms::new(m, a)
            .eval(x)
            .iter()
            .all(|&u| u >= -DOMAIN_TOL)
}

/// A point of `D(m, a)`: `(a, (1−2a)/(m−2), …)` for `a < 1/2` and
/// `(1−a, 0, …, 0)` otherwise.
pub fn feasible_point(m: usize, a: f64) -> Result<Vec<f64>> {
    check_m(m)?;
    check_range("a", a, 0.0, 1.0, "[0, 1]")?;
    if a < 1.0 / m as f64 - DOMAIN_TOL {
        return Err(Error::Infeasible { m, a });
    }
    let d = m - 2;
    let x = if a < 0.5 {
        let rest = (1.0 - 2.0 * a) / d as f64;
        std::iter::once(a).chain(std::iter::repeat_n(rest, d - 1)).collect()
    } else {
        let mut x = vec![0.0; d];
        x[0] = 1.0 - a;
        x
    };
    Ok(x)
}

/// `f_a(x)`, with `0 log 0 = 0`.
pub fn f_a_eval(m: usize, a: f64, x: &[f64]) -> Result<f64> {
    check_m(m)?;
    check_range("a", a, 0.0, 1.0, "[0, 1]")?;
    if x.len() != m - 2 {
        return Err(Error::LengthMismatch(x.len(), m - 2));
    }
    if !domain_contains(m, a, x) {
        return Err(Error::Infeasible { m, a });
    }
    Ok(objective(&AffineForms::new(m, a), a, x))
}

pub(crate) fn objective(forms: &AffineForms, a: f64, x: &[f64]) -> f64 {
    -phi0(a) + forms.eval(x).into_iter().map(phi0).sum::<f64>()
}

/// `∇f_a(x)`; `x` must be strictly interior.
pub fn f_a_gradient(m: usize, a: f64, x: &[f64]) -> Result<Vec<f64>> {
    check_m(m)?;
    check_range("a", a, 0.0, 1.0, "[0, 1]")?;
    if x.len() != m - 2 {
        return Err(Error::LengthMismatch(x.len(), m - 2));
    }
    let forms = AffineForms::new(m, a);
    let u = forms.eval(x);
    if let Some(t) = u.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::NotInterior(format!("affine form {t} equals {}", u[t])));
    }
    Ok(gradient(&forms, &u).iter().copied().collect())
}

/// `Σ_t φ'(u_t) c_t` with `φ'(u) = −log u − 1`.
pub(crate) fn gradient(forms: &AffineForms, u: &[f64]) -> DVector<f64> {
    let d = forms.coeffs[0].len();
    let mut g = DVector::zeros(d);
    for (c, &ut) in forms.coeffs.iter().zip(u) {
        let w = -ut.ln() - 1.0;
        for (gi, ci) in g.iter_mut().zip(c) {
            *gi += w * ci;
        }
    }
    g
}

/// `−∇²f_a = Σ_t c_t c_tᵀ / u_t`, positive definite in the interior.
pub(crate) fn neg_hessian(forms: &AffineForms, u: &[f64]) -> DMatrix<f64> {
    let d = forms.coeffs[0].len();
    let mut h = DMatrix::zeros(d, d);
    for (c, &ut) in forms.coeffs.iter().zip(u) {
        let c = DVector::from_column_slice(c);
        h += (&c * c.transpose()) / ut;
    }
    h
}

/// Vertices of `D(m, a)`: every choice of `m − 2` tight forms with a unique,
/// feasible intersection. Duplicates are merged.
pub fn vertices(m: usize, a: f64) -> Vec<Vec<f64>> {
    let forms = AffineForms::new(m, a);
    let d = m - 2;
    let mut out: Vec<Vec<f64>> = Vec::new();
    for subset in combinations(m, d) {
        let lhs = DMatrix::from_fn(d, d, |i, j| forms.coeffs[subset[i]][j]);
        let rhs = DVector::from_fn(d, |i, _| -forms.offsets[subset[i]]);
        let Some(sol) = lhs.lu().solve(&rhs) else {
            continue;
        };
        let x: Vec<f64> = sol.iter().copied().collect();
        if !domain_contains(m, a, &x) {
            continue;
        }
        if !out
            .iter()
            .any(|v| v.iter().zip(&x).all(|(p, q)| (p - q).abs() < 1e-12))
        {
            out.push(x);
        }
    }
    out
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}
