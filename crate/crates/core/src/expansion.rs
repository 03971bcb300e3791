//! Greedy β-expansions, expansions of 1, Parry admissibility and cylinders.
//!
//! Orbits of `T_β` are iterated in double-double arithmetic so that digits
//! stay correct to depth ~60 and round-trip residuals can be resolved below
//! `β^{-60}`. A value of `βt` within [`SNAP_TOL`] of an integer is treated
//! as that integer; for ordinary inputs the snap only fires at exact
//! cancellations such as `x = 1/β`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::error::{check_range, Error, Result};

/// Distance to an integer below which `βt` is read as that integer.
pub const SNAP_TOL: f64 = 1e-12;

/// Depth of the maximal legal tail used for cylinder right endpoints.
pub const TAIL_DEPTH: usize = 64;

/// Largest supported pseudo-golden order.
pub const MAX_PSEUDO_GOLDEN_ORDER: usize = 40;

/// Digits of `ε(1,β)` kept on a [`BetaSystem`] with infinite expansion of 1.
const EPS_ONE_PREFIX: usize = 96;

/// A finite word over the digit alphabet `{0, …, ⌈β⌉−1}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct DigitWord(Vec<u8>);

impl DigitWord {
    pub fn new(digits: Vec<u8>) -> Self {
        DigitWord(digits)
    }

    pub fn zeros(n: usize) -> Self {
        DigitWord(vec![0; n])
    }

    pub fn repeat(digit: u8, n: usize) -> Self {
        DigitWord(vec![digit; n])
    }

    pub fn digits(&self) -> &[u8] {
        &self.0
    }

    pub fn into_digits(self) -> Vec<u8> {
        self.0
    }

    pub fn push(&mut self, d: u8) {
        self.0.push(d);
    }

    pub fn count_zeros(&self) -> usize {
        self.0.iter().filter(|&&d| d == 0).count()
    }

    /// Checks every digit against the alphabet of `sys`.
    pub fn check_alphabet(&self, sys: &BetaSystem) -> Result<()> {
        match self.0.iter().find(|&&d| d > sys.alphabet_max) {
            Some(&digit) => Err(Error::DigitOutOfRange {
                digit,
                max: sys.alphabet_max,
            }),
            None => Ok(()),
        }
    }
}

impl Deref for DigitWord {
    type Target = [u8];

    fn deref(&self) -> &[u8] {
        &self.0
    }
}

impl From<Vec<u8>> for DigitWord {
    fn from(v: Vec<u8>) -> Self {
        DigitWord(v)
    }
}

impl From<&[u8]> for DigitWord {
    fn from(v: &[u8]) -> Self {
        DigitWord(v.to_vec())
    }
}

impl fmt::Display for DigitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &d in &self.0 {
            let c = char::from_digit(u32::from(d), 36).unwrap_or('?');
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for DigitWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| {
                c.to_digit(36)
                    .map(|d| d as u8)
                    .ok_or_else(|| Error::Parse(format!("bad digit {c:?} in word {s:?}")))
            })
            .collect::<Result<Vec<u8>>>()
            .map(DigitWord)
    }
}

impl From<DigitWord> for String {
    fn from(w: DigitWord) -> String {
        w.to_string()
    }
}

impl TryFrom<String> for DigitWord {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Which family a [`BetaSystem`] belongs to. Dimension formulas are
/// certified only for the first two.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetaKind {
    /// β ∈ ℕ, with the convention `ε*(1,β) = (β−1)^∞`.
    Integer(u32),
    /// Root of `β^m = β^{m−1} + … + 1`; `m = 2` is the golden ratio.
    PseudoGolden(usize),
    General,
}

/// A base β together with its expansion of 1.
#[derive(Clone, Debug)]
pub struct BetaSystem {
    beta: TwoFloat,
    kind: BetaKind,
    alphabet_max: u8,
    eps_one: DigitWord,
    finite_length: Option<usize>,
    quasi_greedy_period: Option<DigitWord>,
}

impl BetaSystem {
    /// The pseudo-golden ratio of order `m ≥ 2`.
    pub fn pseudo_golden(m: usize) -> Result<Self> {
        if !(2..=MAX_PSEUDO_GOLDEN_ORDER).contains(&m) {
            return Err(Error::Unsupported(format!(
                "pseudo-golden order {m} (supported: 2..={MAX_PSEUDO_GOLDEN_ORDER})"
            )));
        }
        let beta = pseudo_golden_root(m);
        let sys = Self::from_parts(beta, BetaKind::PseudoGolden(m));
        if sys.finite_length != Some(m) || sys.eps_one[..m].iter().any(|&d| d != 1) {
            return Err(Error::Unsupported(format!(
                "expansion of 1 for pseudo-golden order {m} not resolved at working precision"
            )));
        }
        Ok(sys)
    }

    pub fn golden() -> Self {
        Self::pseudo_golden(2).expect("golden ratio is always supported")
    }

    /// Integer base `k ≥ 2`.
    pub fn integer(k: u32) -> Result<Self> {
        if !(2..=36).contains(&k) {
            return Err(Error::Unsupported(format!("integer base {k}")));
        }
        let top = (k - 1) as u8;
        Ok(BetaSystem {
            beta: TwoFloat::from(f64::from(k)),
            kind: BetaKind::Integer(k),
            alphabet_max: top,
            eps_one: DigitWord::repeat(top, EPS_ONE_PREFIX),
            finite_length: None,
            quasi_greedy_period: Some(DigitWord::new(vec![top])),
        })
    }

    /// An arbitrary β > 1 taken at face value, without matching it against
    /// the certified families.
    pub fn general(beta: f64) -> Result<Self> {
        if !beta.is_finite() || beta <= 1.0 {
            return Err(Error::Domain {
                what: "beta",
                value: beta,
                domain: "(1, ∞)",
            });
        }
        if beta.fract() == 0.0 && beta <= 36.0 {
            return Self::integer(beta as u32);
        }
        Ok(Self::from_parts(TwoFloat::from(beta), BetaKind::General))
    }

    /// Like [`BetaSystem::general`], but a value within `1e-9` of a
    /// pseudo-golden root (orders 2..=24) selects that root exactly.
    pub fn from_value(beta: f64) -> Result<Self> {
        if beta.is_finite() && beta > 1.0 && beta < 2.0 {
            for m in 2..=24 {
                if (pseudo_golden_root(m).hi() - beta).abs() <= 1e-9 {
                    return Self::pseudo_golden(m);
                }
            }
        }
        Self::general(beta)
    }

    fn from_parts(beta: TwoFloat, kind: BetaKind) -> Self {
        let alphabet_max = (beta.hi().ceil() - 1.0) as u8;
        let mut sys = BetaSystem {
            beta,
            kind,
            alphabet_max,
            eps_one: DigitWord::default(),
            finite_length: None,
            quasi_greedy_period: None,
        };
        let (eps, finite) = expand_one(&sys, EPS_ONE_PREFIX);
        if finite {
            let m = eps.iter().rposition(|&d| d != 0).map_or(0, |i| i + 1);
            let mut period = eps[..m].to_vec();
            period[m - 1] -= 1;
            sys.finite_length = Some(m);
            sys.quasi_greedy_period = Some(DigitWord::new(period));
        }
        sys.eps_one = eps;
        sys
    }

    pub fn beta(&self) -> f64 {
        self.beta.hi()
    }

    pub fn log_beta(&self) -> f64 {
        // ln(hi + lo) = ln(hi) + lo/hi to first order
        self.beta.hi().ln() + self.beta.lo() / self.beta.hi()
    }

    pub fn kind(&self) -> BetaKind {
        self.kind
    }

    pub fn alphabet_max(&self) -> u8 {
        self.alphabet_max
    }

    /// A prefix of `ε(1,β)` (for integer β, the convention `(β−1)^∞`).
    pub fn eps_one(&self) -> &DigitWord {
        &self.eps_one
    }

    pub fn finite_length(&self) -> Option<usize> {
        self.finite_length
    }

    /// Period of `ε*(1,β)` when it is purely periodic.
    pub fn quasi_greedy_period(&self) -> Option<&DigitWord> {
        self.quasi_greedy_period.as_ref()
    }

    /// Order `m` when β is pseudo-golden.
    pub fn pseudo_golden_order(&self) -> Option<usize> {
        match self.kind {
            BetaKind::PseudoGolden(m) => Some(m),
            _ => None,
        }
    }

    /// Reads `βt` as a digit and returns it with `T_β(t)`. `admissible` is
    /// consulted only when snapping would round the digit up.
    fn digit_step(&self, t: TwoFloat, admissible: impl FnOnce(u8) -> bool) -> (u8, TwoFloat) {
        let y = self.beta * t;
        let r = y.round();
        if (y - r).abs() < SNAP_TOL {
            let d = r.hi();
            if r <= y {
                return (d as u8, TwoFloat::from(0.0));
            }
            if d <= f64::from(self.alphabet_max) && admissible(d as u8) {
                return (d as u8, TwoFloat::from(0.0));
            }
        }
        let f = y.floor();
        (f.hi() as u8, y - f)
    }
}

impl fmt::Display for BetaSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            BetaKind::Integer(k) => write!(f, "beta={k}"),
            BetaKind::PseudoGolden(2) => write!(f, "golden ratio {:.15}", self.beta()),
            BetaKind::PseudoGolden(m) => write!(f, "pseudo-golden m={m} {:.15}", self.beta()),
            BetaKind::General => write!(f, "beta={}", self.beta()),
        }
    }
}

/// Positive root of `β^m − β^{m−1} − … − β − 1` in `(1, 2)`.
fn pseudo_golden_root(m: usize) -> TwoFloat {
    let eval = |b: TwoFloat| {
        let mut p = TwoFloat::from(1.0);
        let mut dp = TwoFloat::from(0.0);
        for _ in 0..m {
            dp = dp * b + p;
            p = p * b - 1.0;
        }
        (p, dp)
    };
    let (mut lo, mut hi) = (1.0_f64, 2.0_f64);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if eval(TwoFloat::from(mid)).0 < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut b = TwoFloat::from(0.5 * (lo + hi));
    for _ in 0..4 {
        let (p, dp) = eval(b);
        b -= dd_div(p, dp);
    }
    b
}

/// `T_β(x) = βx − ⌊βx⌋` on `[0, 1]`.
pub fn beta_transform(x: f64, sys: &BetaSystem) -> Result<f64> {
    check_range("x", x, 0.0, 1.0, "[0, 1]")?;
    let (_, t) = sys.digit_step(TwoFloat::from(x), |_| true);
    Ok(t.hi())
}

/// First `n` digits of the greedy expansion `ε(x, β)`.
pub fn greedy_expand(x: f64, sys: &BetaSystem, n: usize) -> Result<DigitWord> {
    if !(x.is_finite() && (0.0..1.0).contains(&x)) {
        return Err(Error::Domain {
            what: "x",
            value: x,
            domain: "[0, 1)",
        });
    }
    let mut tracker = AdmissibilityTracker::new(sys, n);
    let mut digits = Vec::with_capacity(n);
    let mut t = TwoFloat::from(x);
    for _ in 0..n {
        let (d, next) = sys.digit_step(t, |d| tracker.accepts(d));
        let pushed = tracker.try_push(d);
        debug_assert!(pushed, "greedy digit {d} broke admissibility");
        digits.push(d);
        t = next;
    }
    Ok(DigitWord(digits))
}

/// First `n` digits of `ε(1, β)` and whether the expansion was detected to be
/// finite (`T_β^m(1) = 0` for some `m ≤ n`).
///
/// For integer β the convention `(β−1)^∞` is returned with `false`.
pub fn expand_one(sys: &BetaSystem, n: usize) -> (DigitWord, bool) {
    if let BetaKind::Integer(k) = sys.kind {
        return (DigitWord::repeat((k - 1) as u8, n), false);
    }
    let mut digits = Vec::with_capacity(n);
    let mut t = TwoFloat::from(1.0);
    let mut finite = false;
    for _ in 0..n {
        if t == 0.0 {
            digits.push(0);
            continue;
        }
        let (d, next) = sys.digit_step(t, |_| true);
        digits.push(d);
        t = next;
        if t == 0.0 {
            finite = true;
        }
    }
    (DigitWord(digits), finite)
}

/// First `n` digits of the quasi-greedy expansion `ε*(1, β)`.
pub fn quasi_greedy_one(sys: &BetaSystem, n: usize) -> DigitWord {
    match &sys.quasi_greedy_period {
        Some(p) => DigitWord(p.iter().copied().cycle().take(n).collect()),
        None => expand_one(sys, n).0,
    }
}

/// Lexicographic comparison of equal-length words.
pub fn lex_compare(u: &[u8], v: &[u8]) -> Result<Ordering> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch(u.len(), v.len()));
    }
    Ok(u.cmp(v))
}

/// Whether `w` is a factor of the β-shift: every suffix of `w` is
/// lexicographically at most the prefix of `ε*(1,β)` of the same length.
pub fn is_legal_word(w: &[u8], sys: &BetaSystem) -> bool {
    let mut tracker = AdmissibilityTracker::new(sys, w.len());
    w.iter().all(|&d| tracker.try_push(d))
}

/// Incremental Parry check. Keeps the start positions whose suffix still
/// coincides with a prefix of `ε*(1,β)`; a suffix that has dropped strictly
/// below stays below whatever is appended.
#[derive(Clone, Debug)]
pub struct AdmissibilityTracker {
    reference: Reference,
    max_digit: u8,
    active: Vec<usize>,
    len: usize,
}

#[derive(Clone, Debug)]
enum Reference {
    Periodic(Vec<u8>),
    Prefix(Vec<u8>),
}

impl Reference {
    fn digit(&self, i: usize) -> u8 {
        match self {
            Reference::Periodic(p) => p[i % p.len()],
            Reference::Prefix(p) => p[i],
        }
    }
}

impl AdmissibilityTracker {
    /// A tracker for words of length at most `max_len` (the bound matters
    /// only when `ε*(1,β)` is not periodic).
    pub fn new(sys: &BetaSystem, max_len: usize) -> Self {
        let reference = match &sys.quasi_greedy_period {
            Some(p) => Reference::Periodic(p.to_vec()),
            None => Reference::Prefix(expand_one(sys, max_len.max(1)).0.into_digits()),
        };
        AdmissibilityTracker {
            reference,
            max_digit: sys.alphabet_max,
            active: Vec::new(),
            len: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Whether appending `d` keeps the word legal.
    pub fn accepts(&self, d: u8) -> bool {
        if d > self.max_digit || d > self.reference.digit(0) {
            return false;
        }
        self.active
            .iter()
            .all(|&k| d <= self.reference.digit(self.len - k))
    }

    /// Appends `d` if the word stays legal; leaves the tracker untouched
    /// otherwise.
    pub fn try_push(&mut self, d: u8) -> bool {
        if !self.accepts(d) {
            return false;
        }
        let len = self.len;
        let reference = &self.reference;
        self.active.retain(|&k| d == reference.digit(len - k));
        if d == self.reference.digit(0) {
            self.active.push(len);
        }
        self.len += 1;
        true
    }

    /// Largest digit that can be appended (0 is always admissible).
    pub fn max_admissible(&self) -> u8 {
        (0..=self.max_digit).rev().find(|&d| self.accepts(d)).unwrap_or(0)
    }
}

pub(crate) fn project_dd(w: &[u8], beta: TwoFloat) -> TwoFloat {
    w.iter()
        .rev()
        .fold(TwoFloat::from(0.0), |acc, &d| dd_div(acc + f64::from(d), beta))
}

/// `a / b` to double-double accuracy. The quotient operator of `twofloat`
/// carries a relative error near 1e-17, too coarse for deep projections, so
/// the quotient is refined with two correction terms.
pub(crate) fn dd_div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q1 = a.hi() / b.hi();
    let r = a - b * q1;
    let q2 = r.hi() / b.hi();
    let r = r - b * q2;
    let q3 = r.hi() / b.hi();
    TwoFloat::from(q1) + q2 + q3
}

/// `π_β(w) = Σ w_i β^{-i}`.
pub fn project(w: &[u8], sys: &BetaSystem) -> f64 {
    project_dd(w, sys.beta).hi()
}

/// `|x − π_β(w)|`, evaluated in double-double so that it is meaningful far
/// below `f64::EPSILON`.
pub fn round_trip_residual(x: f64, w: &[u8], sys: &BetaSystem) -> f64 {
    (TwoFloat::from(x) - project_dd(w, sys.beta)).abs().hi()
}

/// `β^{-k}` where `k` is the first index where `u` and `v` differ; 0 when the
/// words agree on their whole length.
pub fn sequence_distance(u: &[u8], v: &[u8], sys: &BetaSystem) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch(u.len(), v.len()));
    }
    Ok(match u.iter().zip(v).position(|(a, b)| a != b) {
        Some(k) => sys.beta().powi(-(k as i32)),
        None => 0.0,
    })
}

/// The order-n cylinder `{x ∈ [0,1) : ε(x,β) starts with w}` as `[left, right)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CylinderInterval {
    pub word: DigitWord,
    pub left: f64,
    pub right: f64,
    pub order: usize,
}

impl CylinderInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.left <= x && x < self.right
    }

    pub fn length(&self) -> f64 {
        self.right - self.left
    }
}

fn interval_from_tracker(w: &[u8], tracker: &AdmissibilityTracker, beta: TwoFloat) -> (f64, f64) {
    let mut tail_tracker = tracker.clone();
    let mut full = w.to_vec();
    for _ in 0..TAIL_DEPTH {
        let d = tail_tracker.max_admissible();
        tail_tracker.try_push(d);
        full.push(d);
    }
    (project_dd(w, beta).hi(), project_dd(&full, beta).hi())
}

/// Cylinder of `w`; `None` when `w` is not legal (empty cylinder).
pub fn cylinder_interval(w: &[u8], sys: &BetaSystem) -> Option<CylinderInterval> {
    let mut tracker = AdmissibilityTracker::new(sys, w.len() + TAIL_DEPTH);
    if !w.iter().all(|&d| tracker.try_push(d)) {
        return None;
    }
    let (left, right) = interval_from_tracker(w, &tracker, sys.beta);
    Some(CylinderInterval {
        word: DigitWord::from(w),
        left,
        right,
        order: w.len(),
    })
}

/// Largest order accepted by [`covering_count`].
pub const MAX_COVERING_ORDER: usize = 20;

/// Number of order-n cylinders meeting `B(x, β^{-n}) ∩ [0,1)`.
pub fn covering_count(x: f64, n: usize, sys: &BetaSystem) -> Result<usize> {
    if !(x.is_finite() && (0.0..1.0).contains(&x)) {
        return Err(Error::Domain {
            what: "x",
            value: x,
            domain: "[0, 1)",
        });
    }
    if !(1..=MAX_COVERING_ORDER).contains(&n) {
        return Err(Error::Domain {
            what: "n",
            value: n as f64,
            domain: "1..=20",
        });
    }
    let radius = sys.beta().powi(-(n as i32));
    let (lo, hi) = (x - radius, x + radius);
    let mut count = 0;
    let mut stack = vec![(Vec::<u8>::new(), AdmissibilityTracker::new(sys, n + TAIL_DEPTH))];
    while let Some((word, tracker)) = stack.pop() {
        for d in 0..=sys.alphabet_max {
            let mut child = tracker.clone();
            if !child.try_push(d) {
                continue;
            }
            let mut w = word.clone();
            w.push(d);
            let (left, right) = interval_from_tracker(&w, &child, sys.beta);
            if left < hi && right > lo {
                if w.len() == n {
                    count += 1;
                } else {
                    stack.push((w, child));
                }
            }
        }
    }
    Ok(count)
}
