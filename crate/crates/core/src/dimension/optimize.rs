//! Interior damped Newton ascent for `f_a` on `D(m, a)`.
//!
//! `f_a` is a sum of `φ` of affine forms, so its Hessian `−Σ c_t c_tᵀ / u_t`
//! is negative definite wherever every form is positive. Steps are halved
//! until they stay strictly inside the polytope and satisfy an Armijo test.

use nalgebra::DVector;

use super::polytope::{
    domain_contains, feasible_point, gradient, neg_hessian, objective, vertices, AffineForms,
    DOMAIN_TOL,
};
use super::{DimResult, Method};
use crate::error::{check_range, Error, Result};

const MAX_ITERATIONS: usize = 200;
const ARMIJO: f64 = 1e-4;

/// Location and value of the maximum of `f_a`.
#[derive(Clone, Debug, PartialEq)]
pub struct Maximum {
    pub value: f64,
    pub argmax: Vec<f64>,
    /// Gradient norm at the argmax; 0 for single-point domains.
    pub kkt_residual: f64,
    pub iterations: usize,
}

/// Whether `D(m, a)` collapses to a single point (`a = 1/m` or `a = 1`).
pub(crate) fn is_degenerate(m: usize, a: f64) -> bool {
    (a - 1.0 / m as f64).abs() <= DOMAIN_TOL || (1.0 - a).abs() <= DOMAIN_TOL
}

fn interior(u: &[f64]) -> bool {
    u.iter().all(|&v| v > 0.0)
}

/// Maximizes `f_a` over `D(m, a)` for `1/m ≤ a ≤ 1`.
pub fn maximize_objective(m: usize, a: f64, tol: f64) -> Result<Maximum> {
    if m < 3 {
        return Err(Error::Unsupported(format!("polytope needs m >= 3, got {m}")));
    }
    check_range("a", a, 0.0, 1.0, "[0, 1]")?;
    if !(tol > 0.0) {
        return Err(Error::Domain {
            what: "tol",
            value: tol,
            domain: "(0, ∞)",
        });
    }
    let fp = feasible_point(m, a)?;
    let forms = AffineForms::new(m, a);
    if is_degenerate(m, a) {
        // every term cancels on the single-point domain
        return Ok(Maximum {
            value: 0.0,
            argmax: fp,
            kkt_residual: 0.0,
            iterations: 0,
        });
    }

    let verts = vertices(m, a);
    let d = m - 2;
    let centroid: Vec<f64> = (0..d)
        .map(|i| verts.iter().map(|v| v[i]).sum::<f64>() / verts.len() as f64)
        .collect();
    let mut x = DVector::from_iterator(
        d,
        fp.iter().zip(&centroid).map(|(p, c)| 0.9 * p + 0.1 * c),
    );
    if !interior(&forms.eval(x.as_slice())) {
        x = DVector::from_vec(centroid);
    }
    if !interior(&forms.eval(x.as_slice())) {
        return Err(Error::NotInterior(format!(
            "D({m}, {a}) has no interior start point"
        )));
    }

    let mut value = objective(&forms, a, x.as_slice());
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let u = forms.eval(x.as_slice());
        let g = gradient(&forms, &u);
        let Some(chol) = neg_hessian(&forms, &u).cholesky() else {
            break;
        };
        let step = chol.solve(&g);
        let decrement = g.dot(&step);
        if !(decrement > 0.0) {
            break;
        }
        let mut s = 1.0;
        let (next, next_value) = loop {
            let cand = &x + &step * s;
            if interior(&forms.eval(cand.as_slice())) {
                let v = objective(&forms, a, cand.as_slice());
                if v >= value + ARMIJO * s * decrement || decrement < tol {
                    break (cand, v);
                }
            }
            s *= 0.5;
            if s < 1e-30 {
                break (x.clone(), value);
            }
        };
        let moved = next != x;
        x = next;
        value = next_value.max(value);
        if !moved || (decrement < tol && s == 1.0) {
            break;
        }
    }

    let argmax: Vec<f64> = x.iter().copied().collect();
    debug_assert!(domain_contains(m, a, &argmax));
    let kkt_residual = gradient(&forms, &forms.eval(&argmax)).norm();
    Ok(Maximum {
        value: objective(&forms, a, &argmax),
        argmax,
        kkt_residual,
        iterations,
    })
}

/// `dim_H F_a = max f_a / log β` for the pseudo-golden β of order `m`;
/// `a < 1/m` gives the empty set.
pub fn maximize_f(m: usize, a: f64, tol: f64) -> Result<DimResult> {
    check_range("a", a, 0.0, 1.0, "[0, 1]")?;
    if m < 3 {
        return Err(Error::Unsupported(format!("polytope needs m >= 3, got {m}")));
    }
    if a < 1.0 / m as f64 - DOMAIN_TOL {
        return Ok(DimResult::empty(Method::PolytopeMax));
    }
    let log_beta = crate::BetaSystem::pseudo_golden(m)?.log_beta();
    let max = maximize_objective(m, a, tol)?;
    Ok(DimResult {
        dim: (max.value / log_beta).clamp(0.0, 1.0),
        argmax: max.argmax,
        method: Method::PolytopeMax,
        kkt_residual: max.kkt_residual,
        empty_set: false,
        cross_check_delta: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn m3_half() {
        let max = maximize_objective(3, 0.5, 1e-12).unwrap();
        assert!((max.argmax[0] - 1.0 / 3.0).abs() < 1e-9);
        assert!((max.value - 0.5 * 3f64.ln()).abs() < 1e-15);
        assert!(max.kkt_residual < 1e-9);
        let res = maximize_f(3, 0.5, 1e-12).unwrap();
        assert!((res.dim - 0.901_421_231_872_070).abs() < 1e-13);
    }

    #[test]
    fn endpoints_are_exact_zero() {
        for m in 3..7 {
            for a in [1.0 / m as f64, 1.0] {
                let res = maximize_f(m, a, 1e-12).unwrap();
                assert_eq!(res.dim, 0.0);
                assert!(!res.empty_set);
            }
            let below = maximize_f(m, 1.0 / m as f64 - 0.01, 1e-12).unwrap();
            assert!(below.empty_set && below.dim == 0.0 && below.argmax.is_empty());
        }
    }

    #[test]
    fn near_boundary_values_stay_small_and_feasible() {
        for m in 3..7 {
            for a in [1.0 / m as f64 + 1e-9, 1.0 - 1e-9] {
                let max = maximize_objective(m, a, 1e-12).unwrap();
                assert!(domain_contains(m, a, &max.argmax));
                assert!(max.value >= 0.0 && max.value < 1e-6, "m={m} a={a}: {}", max.value);
            }
        }
    }

    #[test]
    fn bad_arguments() {
        assert!(maximize_f(2, 0.5, 1e-12).is_err());
        assert!(maximize_f(3, 1.5, 1e-12).is_err());
        assert!(maximize_objective(3, 0.5, 0.0).is_err());
    }
}
