//! Follower graph of a β-shift of finite type and exact word counts.
//!
//! When `ε(1,β)` is finite with length `m` the β-shift is a subshift of
//! finite type whose forbidden words have length at most `m`. States are the
//! legal words of length `m−1`; appending a digit is an edge. Counting
//! paths by number of zero-emitting edges gives `N(n, k)`, the number of
//! legal n-words with exactly k zeros, which feeds a finite-n estimate of the
//! frequency-set dimension.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::io::Write;

use nalgebra::DMatrix;
use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{check_range, Error, Result};
use crate::expansion::{is_legal_word, BetaKind, BetaSystem, DigitWord};

/// Largest block length `m` for which the graph is built (2^{m−1} candidate states).
pub const MAX_BLOCK_LENGTH: usize = 20;

/// Default cap on `n` for the zero-count DP.
pub const DEFAULT_N_MAX: usize = 5000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub digit: u8,
}

impl Transition {
    pub fn emits_zero(&self) -> bool {
        self.digit == 0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FollowerGraph {
    block_length: usize,
    states: Vec<DigitWord>,
    transitions: Vec<Transition>,
    start_weights: Vec<u8>,
}

/// Builds the follower graph of a β-shift with finite `ε(1,β)` on digits {0,1}.
/// β = 2 is the full shift: one state (the empty word) with two loops.
pub fn build_follower_graph(sys: &BetaSystem) -> Result<FollowerGraph> {
    if sys.alphabet_max() != 1 {
        return Err(Error::Unsupported(format!(
            "{sys}: follower graphs need the alphabet {{0,1}}"
        )));
    }
    let m = match (sys.kind(), sys.finite_length()) {
        (BetaKind::Integer(2), _) => 1,
        (_, Some(m)) => m,
        (_, None) => {
            return Err(Error::Unsupported(format!(
                "{sys}: expansion of 1 is not finite"
            )))
        }
    };
    if m > MAX_BLOCK_LENGTH {
        return Err(Error::Unsupported(format!(
            "block length {m} exceeds {MAX_BLOCK_LENGTH}"
        )));
    }
    let len = m - 1;
    let states: Vec<DigitWord> = (0..1usize << len)
        .map(|idx| binary_word(idx, len))
        .filter(|w| is_legal_word(w, sys))
        .collect();
    let index: HashMap<&[u8], usize> = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.digits(), i))
        .collect();
    let mut transitions = Vec::new();
    for (from, s) in states.iter().enumerate() {
        for digit in 0..=1u8 {
            let mut word = s.to_vec();
            word.push(digit);
            if !is_legal_word(&word, sys) {
                continue;
            }
            let to = index[&word[1..]];
            transitions.push(Transition { from, to, digit });
        }
    }
    let start_weights = vec![1; states.len()];
    Ok(FollowerGraph {
        block_length: len,
        states,
        transitions,
        start_weights,
    })
}

/// Binary word of length `len` whose first digit is the most significant bit of `idx`.
pub(crate) fn binary_word(idx: usize, len: usize) -> DigitWord {
    DigitWord::new((0..len).rev().map(|b| ((idx >> b) & 1) as u8).collect())
}

impl FollowerGraph {
    /// Length of the words labelling states (`m − 1`).
    pub fn block_length(&self) -> usize {
        self.block_length
    }

    pub fn states(&self) -> &[DigitWord] {
        &self.states
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn start_weights(&self) -> &[u8] {
        &self.start_weights
    }

    /// Adjacency matrix with weight `zero_weight` on zero-emitting edges and 1
    /// elsewhere.
    pub fn weighted_adjacency(&self, zero_weight: f64) -> DMatrix<f64> {
        let n = self.states.len();
        let mut a = DMatrix::zeros(n, n);
        for t in &self.transitions {
            a[(t.from, t.to)] += if t.emits_zero() { zero_weight } else { 1.0 };
        }
        a
    }

    pub fn is_strongly_connected(&self) -> bool {
        let n = self.states.len();
        if n == 0 {
            return false;
        }
        let reach = |forward: bool| {
            let mut seen = vec![false; n];
            let mut queue = VecDeque::from([0]);
            seen[0] = true;
            while let Some(v) = queue.pop_front() {
                for t in &self.transitions {
                    let (src, dst) = if forward { (t.from, t.to) } else { (t.to, t.from) };
                    if src == v && !seen[dst] {
                        seen[dst] = true;
                        queue.push_back(dst);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(true) && reach(false)
    }

    /// Legal words shorter than the state length: distinct prefixes of states.
    fn short_words(&self, n: usize) -> BTreeSet<&[u8]> {
        self.states.iter().map(|s| &s[..n]).collect()
    }
}

/// Number of legal words of length `n`.
pub fn count_words(graph: &FollowerGraph, n: usize) -> BigUint {
    if n <= graph.block_length {
        return BigUint::from(graph.short_words(n).len());
    }
    let mut cur: Vec<BigUint> = graph
        .start_weights
        .iter()
        .map(|&w| BigUint::from(w))
        .collect();
    let mut next = vec![BigUint::zero(); cur.len()];
    for _ in graph.block_length..n {
        next.iter_mut().for_each(|x| x.set_zero());
        for t in &graph.transitions {
            next[t.to] += &cur[t.from];
        }
        std::mem::swap(&mut cur, &mut next);
    }
    cur.into_iter().sum()
}

/// Exact counts `N(n, k)` of legal n-words with exactly k zeros, `k = 0..=n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountTable {
    n: usize,
    counts: Vec<BigUint>,
}

impl CountTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    pub fn get(&self, k: usize) -> &BigUint {
        &self.counts[k]
    }

    pub fn total(&self) -> BigUint {
        self.counts.iter().sum()
    }

    /// `log N(n,k) / (n log β)`, or `None` when `N(n,k) = 0`.
    pub fn class_dimension(&self, k: usize, log_beta: f64) -> Option<f64> {
        let c = self.counts.get(k)?;
        if c.is_zero() {
            return None;
        }
        Some(ln_biguint(c) / (self.n as f64 * log_beta))
    }

    /// Finite-n estimate of `dim_H F_a` from the class `k = round(a·n)`
    /// (ties to even), plus the maximum over `{⌊an⌋−1, ⌊an⌋, ⌈an⌉+1}`.
    pub fn dim_estimate(&self, a: f64, log_beta: f64) -> Result<FreqEstimate> {
        check_range("a", a, 0.0, 1.0, "[0, 1]")?;
        let n = self.n as f64;
        let k = (a * n).round_ties_even() as usize;
        let lo = (a * n).floor() as i64 - 1;
        let hi = (a * n).ceil() as i64 + 1;
        let neighbourhood_max = [lo, (a * n).floor() as i64, hi]
            .into_iter()
            .filter(|&j| j >= 0 && j as usize <= self.n)
            .filter_map(|j| self.class_dimension(j as usize, log_beta))
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |m| m.max(v))));
        let dim = self.class_dimension(k, log_beta);
        Ok(FreqEstimate {
            n: self.n,
            a,
            k,
            dim: dim.unwrap_or(0.0),
            neighbourhood_max: neighbourhood_max.unwrap_or(0.0),
            empty_class: dim.is_none(),
        })
    }

    /// CSV with header `n,k,count` and exact decimal integers.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "n,k,count")?;
        for (k, c) in self.counts.iter().enumerate() {
            writeln!(out, "{},{},{}", self.n, k, c)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FreqEstimate {
    pub n: usize,
    pub a: f64,
    pub k: usize,
    pub dim: f64,
    pub neighbourhood_max: f64,
    pub empty_class: bool,
}

/// Natural log of a big integer from its bit length and top 64 bits.
pub fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return x.to_f64().map_or(f64::NEG_INFINITY, f64::ln);
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64-bit value fits in f64");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `N(n, k)` for all k by dynamic programming over (state, zero count).
pub fn count_words_by_zeros(graph: &FollowerGraph, n: usize) -> CountTable {
    let len = graph.block_length;
    let mut counts = vec![BigUint::zero(); n + 1];
    if n <= len {
        for w in graph.short_words(n) {
            counts[w.iter().filter(|&&d| d == 0).count()] += 1u32;
        }
        return CountTable { n, counts };
    }
    let width = n + 1;
    let states = graph.states.len();
    let mut cur = vec![BigUint::zero(); states * width];
    let mut next = cur.clone();
    for (s, w) in graph.states.iter().enumerate() {
        cur[s * width + w.count_zeros()] += u32::from(graph.start_weights[s]);
    }
    for step in len..n {
        // after `step` digits at most `step` zeros
        let kmax = step;
        next.iter_mut().for_each(|x| x.set_zero());
        for t in &graph.transitions {
            let shift = usize::from(t.emits_zero());
            let (src, dst) = (t.from * width, t.to * width);
            for k in 0..=kmax {
                let c = &cur[src + k];
                if !c.is_zero() {
                    next[dst + k + shift] += c;
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    for s in 0..states {
        for k in 0..=n {
            counts[k] += &cur[s * width + k];
        }
    }
    CountTable { n, counts }
}

/// `log N(n, round(a·n)) / (n log β)`.
pub fn freq_dim_estimate(
    graph: &FollowerGraph,
    n: usize,
    a: f64,
    sys: &BetaSystem,
) -> Result<FreqEstimate> {
    if n < 10 {
        return Err(Error::Domain {
            what: "n",
            value: n as f64,
            domain: "n >= 10",
        });
    }
    check_range("a", a, 0.0, 1.0, "[0, 1]")?;
    count_words_by_zeros(graph, n).dim_estimate(a, sys.log_beta())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(sys: &BetaSystem, n: usize) -> Vec<u64> {
        let mut by_zeros = vec![0u64; n + 1];
        for idx in 0..1usize << n {
            let w = binary_word(idx, n);
            if is_legal_word(&w, sys) {
                by_zeros[w.count_zeros()] += 1;
            }
        }
        by_zeros
    }

    #[test]
    fn golden_graph() {
        let g = build_follower_graph(&BetaSystem::golden()).unwrap();
        let states: Vec<String> = g.states().iter().map(|s| s.to_string()).collect();
        assert_eq!(states, ["0", "1"]);
        let edges: Vec<(usize, usize)> = g.transitions().iter().map(|t| (t.from, t.to)).collect();
        assert_eq!(edges, [(0, 0), (0, 1), (1, 0)]);
        assert!(g.is_strongly_connected());
    }

    #[test]
    fn tribonacci_graph() {
        let g = build_follower_graph(&BetaSystem::pseudo_golden(3).unwrap()).unwrap();
        assert_eq!(g.states().len(), 4);
        assert_eq!(g.transitions().len(), 7);
        let missing = g
            .transitions()
            .iter()
            .all(|t| !(t.from == 3 && t.to == 3));
        assert!(missing, "11 -> 11 would create 111");
        assert!(g.is_strongly_connected());
    }

    #[test]
    fn full_shift_graph() {
        let g = build_follower_graph(&BetaSystem::integer(2).unwrap()).unwrap();
        assert_eq!(g.states().len(), 1);
        assert_eq!(g.transitions().len(), 2);
        for n in 1..=20 {
            assert_eq!(count_words(&g, n), BigUint::from(1u64 << n));
        }
    }

    #[test]
    fn unsupported_systems() {
        assert!(build_follower_graph(&BetaSystem::general(1.7).unwrap()).is_err());
        assert!(build_follower_graph(&BetaSystem::integer(3).unwrap()).is_err());
        assert!(build_follower_graph(&BetaSystem::general(2.5).unwrap()).is_err());
    }

    #[test]
    fn word_counts() {
        let g3 = build_follower_graph(&BetaSystem::pseudo_golden(3).unwrap()).unwrap();
        let got: Vec<BigUint> = (1..=5).map(|n| count_words(&g3, n)).collect();
        let want: Vec<BigUint> = [2u32, 4, 7, 13, 24].map(BigUint::from).to_vec();
        assert_eq!(got, want);
        let g2 = build_follower_graph(&BetaSystem::golden()).unwrap();
        let got: Vec<BigUint> = (1..=3).map(|n| count_words(&g2, n)).collect();
        assert_eq!(got, [2u32, 3, 5].map(BigUint::from).to_vec());
    }

    #[test]
    fn zero_counts_small() {
        let g3 = build_follower_graph(&BetaSystem::pseudo_golden(3).unwrap()).unwrap();
        let t = count_words_by_zeros(&g3, 3);
        assert_eq!(t.counts(), &[0u32, 3, 3, 1].map(BigUint::from));
        let t = count_words_by_zeros(&g3, 2);
        assert_eq!(t.counts(), &[1u32, 2, 1].map(BigUint::from));
    }

    #[test]
    fn zero_counts_match_enumeration() {
        for sys in [
            BetaSystem::golden(),
            BetaSystem::pseudo_golden(3).unwrap(),
            BetaSystem::pseudo_golden(4).unwrap(),
            BetaSystem::pseudo_golden(5).unwrap(),
        ] {
            let g = build_follower_graph(&sys).unwrap();
            for n in 1..=14 {
                let t = count_words_by_zeros(&g, n);
                let want: Vec<BigUint> = brute_force(&sys, n).into_iter().map(BigUint::from).collect();
                assert_eq!(t.counts(), want.as_slice(), "{sys} n={n}");
                assert_eq!(t.total(), count_words(&g, n));
                assert_eq!(t.get(n), &BigUint::from(1u32));
            }
        }
    }

    #[test]
    fn csv_output() {
        let g = build_follower_graph(&BetaSystem::pseudo_golden(3).unwrap()).unwrap();
        let mut buf = Vec::new();
        count_words_by_zeros(&g, 3).write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "n,k,count\n3,0,0\n3,1,3\n3,2,3\n3,3,1\n"
        );
    }

    #[test]
    fn estimate_edge_cases() {
        let sys = BetaSystem::pseudo_golden(3).unwrap();
        let g = build_follower_graph(&sys).unwrap();
        let e = freq_dim_estimate(&g, 30, 1.0, &sys).unwrap();
        assert_eq!(e.dim, 0.0);
        assert!(!e.empty_class);
        let e = freq_dim_estimate(&g, 30, 0.0, &sys).unwrap();
        assert!(e.empty_class);
        assert_eq!(e.dim, 0.0);
        assert!(freq_dim_estimate(&g, 9, 0.5, &sys).is_err());
        assert!(freq_dim_estimate(&g, 30, 1.5, &sys).is_err());
    }

    #[test]
    fn big_log() {
        let x = BigUint::from(3u32).pow(1000);
        assert!((ln_biguint(&x) - 1000.0 * 3f64.ln()).abs() < 1e-9);
        assert_eq!(ln_biguint(&BigUint::from(1u32)), 0.0);
    }
}
