//! Markov measures on binary β-shifts.
//!
//! Words over {0,1} of length k are indexed by reading them as binary numbers
//! with the first digit most significant, so the k-word `s` followed by digit
//! `d` overlaps the state `((s << 1) | d) mod 2^k`. A k-step Markov measure
//! stores `p` over all 2^k words (zero-mass words included) and, per state,
//! the probabilities of appending 0 and 1; every other transition is zero by
//! construction.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dimension::polytope::domain_contains;
use crate::error::{check_range, Error, Result};
use crate::expansion::{is_legal_word, BetaSystem, DigitWord};
use crate::language::binary_word;

/// Largest supported Markov order.
pub const MAX_ORDER: usize = 20;

/// Consistency tolerance for measures handed to [`markovize`] and friends.
const VALIDITY_TOL: f64 = 1e-9;

/// `φ(x) = −x log x` with `φ(0) = 0`.
pub fn phi(x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            what: "x",
            value: x,
            domain: "[0, ∞)",
        });
    }
    Ok(phi0(x))
}

/// `φ` extended by 0 to `x ≤ 0`; arguments here are masses that may carry
/// rounding noise of either sign.
pub(crate) fn phi0(x: f64) -> f64 {
    if x > 0.0 {
        -x * x.ln()
    } else {
        0.0
    }
}

fn word_index(w: &[u8]) -> usize {
    w.iter().fold(0, |acc, &d| (acc << 1) | usize::from(d))
}

fn check_binary(w: &[u8]) -> Result<()> {
    match w.iter().find(|&&d| d > 1) {
        Some(&digit) => Err(Error::DigitOutOfRange { digit, max: 1 }),
        None => Ok(()),
    }
}

/// Masses of all binary cylinders `[w]` with `|w| ≤ max_order`.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderMeasure {
    levels: Vec<Vec<f64>>,
}

impl CylinderMeasure {
    pub fn from_fn(max_order: usize, mut mass: impl FnMut(&[u8]) -> f64) -> Self {
        let levels = (0..=max_order)
            .map(|n| {
                (0..1usize << n)
                    .map(|i| mass(&binary_word(i, n)))
                    .collect()
            })
            .collect();
        CylinderMeasure { levels }
    }

    /// Cylinder masses of a Markov measure up to `max_order`.
    pub fn from_markov(mu: &MarkovMeasure, max_order: usize) -> Self {
        let k = mu.order;
        let mut levels: Vec<Vec<f64>> = Vec::with_capacity(max_order + 1);
        for n in 0..=max_order {
            let level = if n <= k {
                let span = 1usize << (k - n);
                (0..1usize << n)
                    .map(|i| mu.p[i * span..(i + 1) * span].iter().sum())
                    .collect()
            } else {
                let prev = &levels[n - 1];
                let mask = (1usize << k) - 1;
                (0..1usize << n)
                    .map(|i| prev[i >> 1] * mu.trans[(i >> 1) & mask][i & 1])
                    .collect()
            };
            levels.push(level);
        }
        CylinderMeasure { levels }
    }

    pub fn max_order(&self) -> usize {
        self.levels.len() - 1
    }

    /// Mass of `[w]`.
    ///
    /// # Panics
    /// If `w` is longer than [`max_order`](Self::max_order) or not binary.
    pub fn mass(&self, w: &[u8]) -> f64 {
        assert!(w.len() <= self.max_order(), "word longer than max order");
        assert!(w.iter().all(|&d| d <= 1), "non-binary word");
        self.levels[w.len()][word_index(w)]
    }

    /// Masses of all n-words in index order.
    pub fn level(&self, n: usize) -> &[f64] {
        &self.levels[n]
    }

    fn internal_diagnostics(&self) -> CylinderDiagnostics {
        let mut diag = CylinderDiagnostics {
            empty_word_residual: (self.levels[0][0] - 1.0).abs(),
            ..Default::default()
        };
        for n in 0..self.max_order() {
            let (cur, next) = (&self.levels[n], &self.levels[n + 1]);
            let half = cur.len();
            for (i, &m) in cur.iter().enumerate() {
                let right = (next[2 * i] + next[2 * i + 1] - m).abs();
                let left = (next[i] + next[i + half] - m).abs();
                diag.additivity_residual = diag.additivity_residual.max(right);
                diag.shift_residual = diag.shift_residual.max(left);
            }
        }
        diag.negative_mass = self
            .levels
            .iter()
            .flatten()
            .fold(0.0_f64, |acc, &m| acc.max(-m));
        diag
    }

    fn check_valid(&self) -> Result<()> {
        let d = self.internal_diagnostics();
        if d.max_residual() > VALIDITY_TOL {
            return Err(Error::InvalidMeasure(format!(
                "cylinder measure inconsistent: {d:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CylinderDiagnostics {
    /// `|mass(∅) − 1|`.
    pub empty_word_residual: f64,
    /// Max of `|mass(w0) + mass(w1) − mass(w)|`.
    pub additivity_residual: f64,
    /// Max of `|mass(0w) + mass(1w) − mass(w)|`.
    pub shift_residual: f64,
    /// Largest mass on a word that is not legal for the system.
    pub support_violation: f64,
    /// Largest negative mass, as a positive number.
    pub negative_mass: f64,
}

impl CylinderDiagnostics {
    pub fn max_residual(&self) -> f64 {
        self.empty_word_residual
            .max(self.additivity_residual)
            .max(self.shift_residual)
            .max(self.support_violation)
            .max(self.negative_mass)
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        self.max_residual() <= tol
    }
}

/// Residuals of the cylinder-measure axioms and support on `S_β`.
pub fn validate_cylinder_measure(cm: &CylinderMeasure, sys: &BetaSystem) -> CylinderDiagnostics {
    let mut diag = cm.internal_diagnostics();
    for n in 1..=cm.max_order() {
        for (i, &m) in cm.levels[n].iter().enumerate() {
            if m > diag.support_violation && !is_legal_word(&binary_word(i, n), sys) {
                diag.support_violation = m;
            }
        }
    }
    diag
}

/// A k-step Markov measure on binary sequences.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "MarkovMeasureJson", try_from = "MarkovMeasureJson")]
pub struct MarkovMeasure {
    order: usize,
    p: Vec<f64>,
    trans: Vec<[f64; 2]>,
}

impl MarkovMeasure {
    /// `p` over the 2^k words of length k, and `trans[s][d]` the probability of
    /// moving from `s` to the state obtained by appending `d`.
    pub fn new(order: usize, p: Vec<f64>, trans: Vec<[f64; 2]>) -> Result<Self> {
        if !(1..=MAX_ORDER).contains(&order) {
            return Err(Error::InvalidMeasure(format!("order {order} out of 1..={MAX_ORDER}")));
        }
        let size = 1usize << order;
        if p.len() != size || trans.len() != size {
            return Err(Error::InvalidMeasure(format!(
                "expected {size} states, got p: {}, P: {}",
                p.len(),
                trans.len()
            )));
        }
        let entries = p.iter().chain(trans.iter().flatten());
        if entries.clone().any(|&v| !v.is_finite() || v < -VALIDITY_TOL) {
            return Err(Error::InvalidMeasure("negative or non-finite entry".into()));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > VALIDITY_TOL {
            return Err(Error::InvalidMeasure(format!("p sums to {total}")));
        }
        if let Some(s) = trans
            .iter()
            .position(|row| (row[0] + row[1] - 1.0).abs() > VALIDITY_TOL)
        {
            return Err(Error::InvalidMeasure(format!(
                "row {} of P sums to {}",
                binary_word(s, order),
                trans[s][0] + trans[s][1]
            )));
        }
        Ok(MarkovMeasure { order, p, trans })
    }

    /// Builds the measure from transition probabilities alone, taking `p` as
    /// the stationary vector (the chain must have a unique one).
    pub fn from_transitions(order: usize, trans: Vec<[f64; 2]>) -> Result<Self> {
        if !(1..=MAX_ORDER).contains(&order) || trans.len() != 1usize << order {
            return Err(Error::InvalidMeasure("bad order or transition table size".into()));
        }
        let n = trans.len();
        let mask = n - 1;
        // (P^T − I) p = 0 with the last equation replaced by Σ p = 1
        let mut a = DMatrix::<f64>::zeros(n, n);
        for (s, row) in trans.iter().enumerate() {
            for d in 0..2 {
                a[(((s << 1) | d) & mask, s)] += row[d];
            }
            a[(s, s)] -= 1.0;
        }
        for j in 0..n {
            a[(n - 1, j)] = 1.0;
        }
        let mut rhs = DVector::<f64>::zeros(n);
        rhs[n - 1] = 1.0;
        let p = a
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::InvalidMeasure("no unique stationary vector".into()))?;
        let p: Vec<f64> = p.iter().map(|&v| v.max(0.0)).collect();
        let total: f64 = p.iter().sum();
        Self::new(order, p.into_iter().map(|v| v / total).collect(), trans)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn num_states(&self) -> usize {
        self.p.len()
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    /// `trans[s][d]`: probability of appending digit `d` in state `s`.
    pub fn transitions(&self) -> &[[f64; 2]] {
        &self.trans
    }

    pub fn state_word(&self, s: usize) -> DigitWord {
        binary_word(s, self.order)
    }

    pub fn successor(&self, s: usize, d: u8) -> usize {
        ((s << 1) | usize::from(d)) & (self.p.len() - 1)
    }

    /// Dense matrix entry `P[from, to]`; zero unless the states overlap.
    pub fn transition(&self, from: usize, to: usize) -> f64 {
        match (0..2u8).find(|&d| self.successor(from, d) == to) {
            Some(d) => self.trans[from][usize::from(d)],
            None => 0.0,
        }
    }

    /// `max_t |(pP)_t − p_t|`.
    pub fn stationarity_residual(&self) -> f64 {
        let mut pp = vec![0.0; self.p.len()];
        for (s, row) in self.trans.iter().enumerate() {
            for d in 0..2u8 {
                pp[self.successor(s, d)] += self.p[s] * row[usize::from(d)];
            }
        }
        pp.iter()
            .zip(&self.p)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Mass of the cylinder `[w]` (see [`measure_of_word`]).
    pub fn measure_of_word(&self, w: &[u8]) -> Result<f64> {
        measure_of_word(self, w)
    }

    pub fn entropy(&self) -> f64 {
        markov_entropy(self)
    }
}

/// Chain-product mass of `[w]`; words shorter than the order are summed over
/// their extensions.
pub fn measure_of_word(mu: &MarkovMeasure, w: &[u8]) -> Result<f64> {
    if w.is_empty() {
        return Err(Error::InvalidMeasure("empty word".into()));
    }
    check_binary(w)?;
    let k = mu.order;
    if w.len() < k {
        let span = 1usize << (k - w.len());
        let i = word_index(w);
        return Ok(mu.p[i * span..(i + 1) * span].iter().sum());
    }
    let mut state = word_index(&w[..k]);
    let mut mass = mu.p[state];
    for &d in &w[k..] {
        mass *= mu.trans[state][usize::from(d)];
        state = mu.successor(state, d);
    }
    Ok(mass)
}

/// `h_µ = −Σ_s p_s Σ_t P_st log P_st`.
pub fn markov_entropy(mu: &MarkovMeasure) -> f64 {
    mu.p
        .iter()
        .zip(&mu.trans)
        .map(|(&ps, row)| ps * (phi0(row[0]) + phi0(row[1])))
        .sum()
}

/// The (m−1)-step Markov measure agreeing with `cm` on cylinders of order ≤ m.
/// Rows of zero-mass states continue deterministically with digit 0.
pub fn markovize(cm: &CylinderMeasure, m: usize) -> Result<MarkovMeasure> {
    if m < 2 || m > cm.max_order() || m - 1 > MAX_ORDER {
        return Err(Error::InvalidMeasure(format!(
            "markovize needs 2 <= m <= {} (got m = {m})",
            cm.max_order()
        )));
    }
    cm.check_valid()?;
    let k = m - 1;
    let p: Vec<f64> = cm.levels[k].iter().map(|&v| v.max(0.0)).collect();
    let next = &cm.levels[m];
    let trans = p
        .iter()
        .enumerate()
        .map(|(s, &ps)| {
            if ps > 0.0 {
                let (a, b) = (next[2 * s].max(0.0), next[2 * s + 1].max(0.0));
                [a / ps, b / ps]
            } else {
                [1.0, 0.0]
            }
        })
        .collect();
    MarkovMeasure::new(k, p, trans)
}

/// `H_µ(𝒫 | ⋁_{k=1}^{m−1} σ^{-k}𝒫) = Σ_{|w|=m−1} µ[w] log µ[w] − Σ_{|w|=m} µ[w] log µ[w]`.
pub fn conditional_entropy(cm: &CylinderMeasure, m: usize) -> Result<f64> {
    if m < 1 || m > cm.max_order() {
        return Err(Error::InvalidMeasure(format!(
            "conditional entropy needs 1 <= m <= {}",
            cm.max_order()
        )));
    }
    cm.check_valid()?;
    let h = |n: usize| cm.levels[n].iter().map(|&v| phi0(v)).sum::<f64>();
    Ok(h(m) - h(m - 1))
}

/// Cylinder masses up to order m of the entropy-maximizing measure attached
/// to a point `y` of the polytope `D(m, a)`.
///
/// Words `u 1^j v` come from the explicit table (with `y_0 = a`); every other
/// word `u w v` is glued as `µ[uw] µ[wv] / µ[w]` with `0/0 = 0`.
pub fn max_measure_cylinders(m: usize, a: f64, y: &[f64]) -> Result<CylinderMeasure> {
    if m < 3 || m - 1 > MAX_ORDER {
        return Err(Error::Unsupported(format!("max measure needs 3 <= m <= {}", MAX_ORDER + 1)));
    }
    check_range("a", a, 0.0, 1.0, "[0, 1]")?;
    if !domain_contains(m, a, y) {
        return Err(Error::Infeasible { m, a });
    }
    // ys[j] = y_j with y_0 = a; partial[j] = y_1 + … + y_j
    let ys: Vec<f64> = std::iter::once(a).chain(y.iter().copied()).collect();
    let partial: Vec<f64> = ys
        .iter()
        .skip(1)
        .scan(0.0, |acc, &v| {
            *acc += v;
            Some(*acc)
        })
        .collect();
    let sum_to = |j: usize| if j == 0 { 0.0 } else { partial[j - 1] };
    let last = m - 2;
    // mass of u 1^j v, 0 <= j <= m − 2
    let table = |u: u8, j: usize, v: u8| -> f64 {
        match (u, v) {
            (0, 0) if j < last => ys[j] - ys[j + 1],
            (0, 0) => sum_to(last) + ys[last] + a - 1.0,
            (1, 1) if j + 2 < m => 1.0 - a - sum_to(j + 1),
            (1, 1) => 0.0,
            _ if j < last => ys[j + 1],
            _ => 1.0 - a - sum_to(last),
        }
    };
    let mut levels: Vec<Vec<f64>> = vec![vec![1.0], vec![a, 1.0 - a]];
    for len in 2..=m {
        let level = (0..1usize << len)
            .map(|i| {
                let w = binary_word(i, len);
                let (u, v) = (w[0], w[len - 1]);
                let middle = &w[1..len - 1];
                let mass = if middle.iter().all(|&d| d == 1) {
                    table(u, len - 2, v)
                } else {
                    let mid = levels[len - 2][word_index(middle)];
                    let left = levels[len - 1][word_index(&w[..len - 1])];
                    let right = levels[len - 1][word_index(&w[1..])];
                    if mid > 0.0 {
                        left * right / mid
                    } else {
                        0.0
                    }
                };
                mass.max(0.0)
            })
            .collect();
        levels.push(level);
    }
    Ok(CylinderMeasure { levels })
}

/// The (m−1)-step Markov measure with `µ[0] = a` whose entropy is `f_a(y)`.
pub fn build_max_measure(m: usize, a: f64, y: &[f64]) -> Result<MarkovMeasure> {
    markovize(&max_measure_cylinders(m, a, y)?, m)
}

/// On-disk form: `{"order": k, "states": [...], "p": {state: real},
/// "P": {state: {state: real}}}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MarkovMeasureJson {
    pub order: usize,
    pub states: Vec<String>,
    pub p: BTreeMap<String, f64>,
    #[serde(rename = "P")]
    pub transition: BTreeMap<String, BTreeMap<String, f64>>,
}

impl From<MarkovMeasure> for MarkovMeasureJson {
    fn from(mu: MarkovMeasure) -> Self {
        let name = |s: usize| mu.state_word(s).to_string();
        let states: Vec<String> = (0..mu.num_states()).map(name).collect();
        let p = states.iter().cloned().zip(mu.p.iter().copied()).collect();
        let transition = (0..mu.num_states())
            .map(|s| {
                let row = (0..2u8)
                    .map(|d| (name(mu.successor(s, d)), mu.trans[s][usize::from(d)]))
                    .collect();
                (name(s), row)
            })
            .collect();
        MarkovMeasureJson {
            order: mu.order,
            states,
            p,
            transition,
        }
    }
}

impl TryFrom<MarkovMeasureJson> for MarkovMeasure {
    type Error = Error;

    fn try_from(j: MarkovMeasureJson) -> Result<Self> {
        let k = j.order;
        if !(1..=MAX_ORDER).contains(&k) {
            return Err(Error::InvalidMeasure(format!("order {k} out of range")));
        }
        let size = 1usize << k;
        let parse_state = |s: &str| -> Result<usize> {
            let w: DigitWord = s.parse()?;
            if w.len() != k || w.iter().any(|&d| d > 1) {
                return Err(Error::InvalidMeasure(format!("bad state {s:?} for order {k}")));
            }
            Ok(word_index(&w))
        };
        let mut listed = vec![false; size];
        for s in &j.states {
            listed[parse_state(s)?] = true;
        }
        if listed.iter().any(|&l| !l) || j.states.len() != size {
            return Err(Error::InvalidMeasure(format!("states must list all {size} words of length {k}")));
        }
        let mut p = vec![0.0; size];
        for (s, &v) in &j.p {
            p[parse_state(s)?] = v;
        }
        let mut trans = vec![[0.0; 2]; size];
        for (from, row) in &j.transition {
            let f = parse_state(from)?;
            for (to, &v) in row {
                let t = parse_state(to)?;
                let d = t & 1;
                if ((f << 1) | d) & (size - 1) == t {
                    trans[f][d] = v;
                } else if v != 0.0 {
                    return Err(Error::InvalidMeasure(format!(
                        "P[{from}][{to}] = {v} but the states do not overlap"
                    )));
                }
            }
        }
        MarkovMeasure::new(k, p, trans)
    }
}
