//! Hausdorff dimension of the frequency sets `F_a`.
//!
//! [`freq_dim`] dispatches on the system: the golden ratio and β = 2 have
//! one-line formulas, m = 3 has a closed form (cross-checked against the
//! optimizer), and larger pseudo-golden orders maximize `f_a` over the
//! polytope `D(m, a)`. The pressure oracle in [`pressure`] is independent of
//! all of them.

pub mod closed_form;
pub mod optimize;
pub mod polytope;
pub mod pressure;

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use closed_form::{closed_form_m3, eggleston_dim, golden_dim, m3_coefficients};
pub use optimize::{maximize_f, maximize_objective, Maximum};
pub use polytope::{domain_contains, f_a_eval, f_a_gradient, feasible_point, vertices};
pub use pressure::{dim_via_pressure, perron_root, pressure, PressureResult};

use crate::error::{check_range, Error, Result};
use crate::expansion::{BetaKind, BetaSystem};
use optimize::is_degenerate;

/// Default accuracy of the maximized objective.
pub const DEFAULT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    PolytopeMax,
    #[serde(rename = "closed-m3")]
    ClosedM3,
    Golden,
    Eggleston,
    Pressure,
    Counting,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::PolytopeMax => "polytope-max",
            Method::ClosedM3 => "closed-m3",
            Method::Golden => "golden",
            Method::Eggleston => "eggleston",
            Method::Pressure => "pressure",
            Method::Counting => "counting",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimResult {
    pub dim: f64,
    /// Maximizer of `f_a`; empty on closed-form paths.
    pub argmax: Vec<f64>,
    pub method: Method,
    pub kkt_residual: f64,
    pub empty_set: bool,
    /// `|closed form − optimizer|` when both were computed.
    pub cross_check_delta: Option<f64>,
}

impl DimResult {
    pub(crate) fn empty(method: Method) -> Self {
        DimResult {
            dim: 0.0,
            argmax: Vec::new(),
            method,
            kkt_residual: 0.0,
            empty_set: true,
            cross_check_delta: None,
        }
    }

    pub(crate) fn closed(dim: f64, method: Method) -> Self {
        DimResult {
            // `+ 0.0` turns −0 into 0
            dim: dim + 0.0,
            argmax: Vec::new(),
            method,
            kkt_residual: 0.0,
            empty_set: false,
            cross_check_delta: None,
        }
    }
}

/// A frequency `a` of the digit 0 for a system with a certified formula.
#[derive(Clone, Debug)]
pub struct FreqQuery {
    sys: BetaSystem,
    a: f64,
    tol: f64,
}

impl FreqQuery {
    /// Accepts pseudo-golden β (including the golden ratio) and β = 2.
    pub fn new(sys: BetaSystem, a: f64) -> Result<Self> {
        check_range("a", a, 0.0, 1.0, "[0, 1]")?;
        match sys.kind() {
            BetaKind::PseudoGolden(_) | BetaKind::Integer(2) => Ok(FreqQuery {
                sys,
                a,
                tol: DEFAULT_TOL,
            }),
            _ => Err(Error::Unsupported(format!(
                "no certified dimension formula for {sys}"
            ))),
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Result<Self> {
        if !(tol > 0.0) || !tol.is_finite() {
            return Err(Error::Domain {
                what: "tol",
                value: tol,
                domain: "(0, ∞)",
            });
        }
        self.tol = tol;
        Ok(self)
    }

    pub fn sys(&self) -> &BetaSystem {
        &self.sys
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }
}

/// `dim_H F_a`.
pub fn freq_dim(query: &FreqQuery) -> Result<DimResult> {
    let a = query.a;
    match query.sys.kind() {
        BetaKind::Integer(2) => Ok(DimResult::closed(eggleston_dim(a)?, Method::Eggleston)),
        BetaKind::PseudoGolden(2) => golden_dim(a),
        BetaKind::PseudoGolden(m) => {
            let method = if m == 3 {
                Method::ClosedM3
            } else {
                Method::PolytopeMax
            };
            if a < 1.0 / m as f64 - polytope::DOMAIN_TOL {
                return Ok(DimResult::empty(method));
            }
            if is_degenerate(m, a) {
                let mut res = DimResult::closed(0.0, method);
                if m > 3 {
                    res.argmax = feasible_point(m, a)?;
                }
                return Ok(res);
            }
            let opt = maximize_f(m, a, query.tol)?;
            if m > 3 {
                return Ok(opt);
            }
            let closed = closed_form_m3(&query.sys, a)?;
            Ok(DimResult {
                kkt_residual: opt.kkt_residual,
                cross_check_delta: Some((closed - opt.dim).abs()),
                ..DimResult::closed(closed, Method::ClosedM3)
            })
        }
        _ => Err(Error::Unsupported(format!(
            "no certified dimension formula for {}",
            query.sys
        ))),
    }
}

/// One grid point of a [`Spectrum`]; exactly one of `result` and `error` is set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub a: f64,
    pub result: Option<DimResult>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Spectrum {
    pub rows: Vec<SpectrumRow>,
    /// Largest `|Δdim / Δa|` between adjacent successful rows.
    pub lipschitz_estimate: f64,
}

/// [`freq_dim`] over a grid, computed in parallel and returned in grid order.
pub fn spectrum(sys: &BetaSystem, a_grid: &[f64], tol: f64) -> Spectrum {
    let rows: Vec<SpectrumRow> = a_grid
        .par_iter()
        .map(|&a| {
            let res = FreqQuery::new(sys.clone(), a)
                .and_then(|q| q.with_tol(tol))
                .and_then(|q| freq_dim(&q));
            match res {
                Ok(r) => SpectrumRow {
                    a,
                    result: Some(r),
                    error: None,
                },
                Err(e) => SpectrumRow {
                    a,
                    result: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let ok: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.result.as_ref().map(|d| (r.a, d.dim)))
        .collect();
    let lipschitz_estimate = ok
        .windows(2)
        .filter(|w| w[1].0 != w[0].0)
        .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
        .fold(0.0, f64::max);
    Spectrum {
        rows,
        lipschitz_estimate,
    }
}
