//! Transfer-matrix pressure oracle.
//!
//! With weight `e^t` on zero-emitting edges the Perron root `λ(t)` of the
//! follower graph gives the pressure `P(t) = log λ(t)`, a convex function
//! whose Legendre transform at `a` is the largest entropy of an invariant
//! measure with zero frequency `a`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{check_range, Error, Result};
use crate::expansion::{BetaKind, BetaSystem};
use crate::language::FollowerGraph;

/// Search bracket for the Legendre variable.
pub const T_BRACKET: f64 = 40.0;
const T_TOL: f64 = 1e-9;
const PERRON_REL_TOL: f64 = 1e-14;
const PERRON_MAX_ITER: usize = 500;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PressureResult {
    pub dim: f64,
    pub t_star: f64,
    /// The infimum sits at the edge of the bracket, i.e. at `t → ±∞`.
    pub boundary: bool,
    /// Whether a separate closed form or polytope certifies this β.
    pub certified: bool,
}

/// Perron root of an irreducible non-negative matrix by Noda iteration:
/// inverse iteration shifted by the Collatz–Wielandt upper bound, which keeps
/// iterates positive and converges superlinearly.
pub fn perron_root(a: &DMatrix<f64>) -> Result<f64> {
    let n = a.nrows();
    if n == 0 || a.ncols() != n || a.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidMeasure("matrix must be square, finite and non-negative".into()));
    }
    if n == 1 {
        return Ok(a[(0, 0)]);
    }
    let mut x = DVector::from_element(n, 1.0);
    let mut best: (f64, f64) = (0.0, f64::INFINITY);
    for _ in 0..PERRON_MAX_ITER {
        let ax = a * &x;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
        for (num, den) in ax.iter().zip(x.iter()) {
            let r = num / den;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        best = (best.0.max(lo), best.1.min(hi));
        if best.1 - best.0 <= PERRON_REL_TOL * best.1 {
            break;
        }
        let shifted = DMatrix::from_diagonal_element(n, n, best.1) - a;
        let next = shifted.lu().solve(&x).filter(|z| z.iter().all(|&v| v > 0.0));
        x = match next {
            Some(z) => z,
            // the shift hit the root to working precision
            None => break,
        };
        let scale = x.max();
        x /= scale;
    }
    if !(best.1 > 0.0) {
        return Err(Error::InvalidMeasure("matrix has zero spectral radius".into()));
    }
    Ok(0.5 * (best.0 + best.1))
}

/// Pressure `log λ(t)`. The matrix is scaled so every entry is at most 1.
pub fn pressure(graph: &FollowerGraph, t: f64) -> Result<f64> {
    let (w0, w1, shift) = if t <= 0.0 {
        (t.exp(), 1.0, 0.0)
    } else {
        (1.0, (-t).exp(), t)
    };
    let n = graph.states().len();
    let mut m = DMatrix::zeros(n, n);
    for tr in graph.transitions() {
        m[(tr.from, tr.to)] += if tr.emits_zero() { w0 } else { w1 };
    }
    Ok(perron_root(&m)?.ln() + shift)
}

/// `inf_t (P(t) − t a) / log β`, located by golden-section search on
/// `[−40, 40]`.
pub fn dim_via_pressure(graph: &FollowerGraph, a: f64, sys: &BetaSystem) -> Result<PressureResult> {
    check_range("a", a, 0.0, 1.0, "[0, 1]")?;
    if !graph.is_strongly_connected() {
        return Err(Error::Unsupported("follower graph is not strongly connected".into()));
    }
    let legendre = |t: f64| pressure(graph, t).map(|p| p - t * a);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (-T_BRACKET, T_BRACKET);
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (legendre(c)?, legendre(d)?);
    while hi - lo > T_TOL {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = legendre(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = legendre(d)?;
        }
    }
    let t_star = 0.5 * (lo + hi);
    let value = legendre(t_star)?;
    let boundary = T_BRACKET - t_star.abs() < 1e-3;
    let certified = matches!(sys.kind(), BetaKind::PseudoGolden(_) | BetaKind::Integer(2));
    let dim = if boundary {
        0.0
    } else {
        (value / sys.log_beta()).clamp(0.0, 1.0)
    };
    Ok(PressureResult {
        dim,
        t_star,
        boundary,
        certified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language::build_follower_graph;

    #[test]
    fn perron_of_small_matrices() {
        let g = (1.0 + 5f64.sqrt()) / 2.0;
        let fib = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 0.0]);
        assert!((perron_root(&fib).unwrap() - g).abs() < 1e-14);
        let diag = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 8.0, 0.0]);
        assert!((perron_root(&diag).unwrap() - 4.0).abs() < 1e-13);
        assert!(perron_root(&DMatrix::from_row_slice(1, 2, &[1.0, 1.0])).is_err());
        assert!(perron_root(&DMatrix::from_row_slice(1, 1, &[-1.0])).is_err());
    }

    #[test]
    fn pressure_at_zero_is_entropy() {
        for m in 2..7 {
            let sys = BetaSystem::pseudo_golden(m).unwrap();
            let graph = build_follower_graph(&sys).unwrap();
            assert!((pressure(&graph, 0.0).unwrap() - sys.log_beta()).abs() < 1e-13);
        }
    }

    #[test]
    fn pressure_handles_extreme_weights() {
        let sys = BetaSystem::pseudo_golden(4).unwrap();
        let graph = build_follower_graph(&sys).unwrap();
        // P(t) ~ t/4 as t → −∞ (one zero per four symbols at best) and ~ t as t → ∞
        let lo = pressure(&graph, -40.0).unwrap();
        let hi = pressure(&graph, 40.0).unwrap();
        assert!((lo + 10.0).abs() < 0.1, "{lo}");
        assert!((hi - 40.0).abs() < 1e-12, "{hi}");
    }

    #[test]
    fn full_shift_half() {
        let sys = BetaSystem::integer(2).unwrap();
        let graph = build_follower_graph(&sys).unwrap();
        let r = dim_via_pressure(&graph, 0.5, &sys).unwrap();
        assert!((r.dim - 1.0).abs() < 1e-12);
        // the minimum is flat to second order, so t* is only located to ~√ε
        assert!(r.t_star.abs() < 1e-6);
        assert!(r.certified && !r.boundary);
    }

    #[test]
    fn golden_peak() {
        let sys = BetaSystem::golden();
        let graph = build_follower_graph(&sys).unwrap();
        let r = dim_via_pressure(&graph, (5.0 + 5f64.sqrt()) / 10.0, &sys).unwrap();
        assert!((r.dim - 1.0).abs() < 1e-8);
    }

    #[test]
    fn tribonacci_half() {
        let sys = BetaSystem::pseudo_golden(3).unwrap();
        let graph = build_follower_graph(&sys).unwrap();
        let r = dim_via_pressure(&graph, 0.5, &sys).unwrap();
        assert!((r.dim - 0.901_421_231_872_070).abs() < 1e-10);
    }

    #[test]
    fn outside_frequency_range_is_boundary() {
        let sys = BetaSystem::pseudo_golden(3).unwrap();
        let graph = build_follower_graph(&sys).unwrap();
        let r = dim_via_pressure(&graph, 0.2, &sys).unwrap();
        assert!(r.boundary && r.dim == 0.0);
    }

    #[test]
    fn general_beta_is_uncertified() {
        // ε(1,β) = 101, so every 1 is followed by at least two 0s
        let sys = BetaSystem::general(1.465_571_231_876_768).unwrap();
        let graph = build_follower_graph(&sys).unwrap();
        let r = dim_via_pressure(&graph, 0.8, &sys).unwrap();
        assert!(!r.certified && !r.boundary);
        assert!(r.dim > 0.9 && r.dim <= 1.0);
        assert!(dim_via_pressure(&graph, 0.6, &sys).unwrap().boundary);
    }
}
