//! Capacity bounds for γ-quasisymmetric distortion of interval sets.

use rug::{Integer, Rational};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QsError {
    #[error("invalid interval set: {0}")]
    InvalidIntervalSet(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("domain error: {0}")]
    DomainError(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntervalSet {
    ambient: (f64, f64),
    components: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn new(ambient: (f64, f64), mut components: Vec<(f64, f64)>) -> Result<Self, QsError> {
        let bad = |m: &str| Err(QsError::InvalidIntervalSet(m.to_string()));
        if !(ambient.0 < ambient.1) || !ambient.0.is_finite() || !ambient.1.is_finite() {
            return bad("empty ambient interval");
        }
        components.sort_by(|a, b| a.0.total_cmp(&b.0));
        for c in &components {
            if !(c.0 <= c.1) || c.0 < ambient.0 || c.1 > ambient.1 {
                return bad("component outside the ambient interval");
            }
        }
        if components.windows(2).any(|w| w[0].1 > w[1].0) {
            return bad("overlapping components");
        }
        Ok(IntervalSet { ambient, components })
    }

    pub fn ambient(&self) -> (f64, f64) {
        self.ambient
    }

    pub fn components(&self) -> &[(f64, f64)] {
        &self.components
    }

    pub fn ambient_length(&self) -> f64 {
        self.ambient.1 - self.ambient.0
    }

    /// |X_i|/|I| per component.
    pub fn ratios(&self) -> impl Iterator<Item = f64> + '_ {
        let len = self.ambient_length();
        self.components.iter().map(move |c| (c.1 - c.0) / len)
    }

    pub fn lebesgue_ratio(&self) -> f64 {
        self.ratios().sum::<f64>().min(1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QsParameters {
    pub gamma: f64,
    /// Hölder constant k(2γ − 1).
    pub k: f64,
    pub epsilon: f64,
}

impl QsParameters {
    pub fn new(gamma: f64, k: f64, epsilon: f64) -> Result<Self, QsError> {
        if !(gamma > 1.0) {
            return Err(QsError::InvalidParameters(format!("γ = {gamma} must exceed 1")));
        }
        if !(k >= 1.0) || !(epsilon > 0.0) {
            return Err(QsError::InvalidParameters(format!("need k ≥ 1 and ε > 0, got k = {k}, ε = {epsilon}")));
        }
        if epsilon < 5.0 * (k - 1.0) - 1e-12 {
            return Err(QsError::InvalidParameters(format!("ε = {epsilon} below 5(k − 1)")));
        }
        Ok(QsParameters { gamma, k, epsilon })
    }

    /// k = 1 + ε/5.
    pub fn from_epsilon(gamma: f64, epsilon: f64) -> Result<Self, QsError> {
        Self::new(gamma, 1.0 + epsilon / 5.0, epsilon)
    }
}

impl Default for QsParameters {
    fn default() -> Self {
        QsParameters { gamma: 1.01, k: 1.01, epsilon: 0.05 }
    }
}

/// Which qs constant a bound refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QsConstant {
    Base,
    Gamma(u32),
    GammaTilde(u32),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Derivation {
    Holder { component: usize, ratio: f64, upper: f64 },
    UnionSum { total: f64 },
    Clamp,
    TreeProduct { outer: f64, inner: f64 },
    BranchPullback { n: u32, factor: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CapacityBound {
    pub lower: f64,
    pub upper: f64,
    pub constant: QsConstant,
    pub derivation: Vec<Derivation>,
}

impl CapacityBound {
    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

/// Two-sided bound on |h(J)|/|h(I)| for a γ-qs h with Hölder constant k.
pub fn holder_bounds(ratio: f64, k: f64) -> (f64, f64) {
    let lower = ratio.powf(k) / k;
    let upper = (k * ratio).powf(1.0 / k).min(1.0);
    (lower, upper)
}

pub fn capacity_bound(x: &IntervalSet, params: &QsParameters) -> CapacityBound {
    let mut derivation = Vec::with_capacity(x.components().len() + 2);
    let mut total = 0.0;
    for (i, r) in x.ratios().enumerate() {
        let (_, up) = holder_bounds(r, params.k);
        derivation.push(Derivation::Holder { component: i, ratio: r, upper: up });
        total += up;
    }
    derivation.push(Derivation::UnionSum { total });
    if total > 1.0 {
        derivation.push(Derivation::Clamp);
    }
    CapacityBound {
        lower: x.lebesgue_ratio(),
        upper: total.min(1.0),
        constant: QsConstant::Base,
        derivation,
    }
}

/// p(X|I) ≤ p(∪I_j|I)·sup_j p(X|I_j).  No lower bound follows from the tree
/// inequality; `witness` supplies one (typically the Lebesgue ratio).
pub fn tree_compose(outer: &CapacityBound, inner_sup: &CapacityBound, witness: Option<f64>) -> CapacityBound {
    let upper = outer.upper * inner_sup.upper;
    let mut derivation = outer.derivation.clone();
    derivation.extend(inner_sup.derivation.iter().cloned());
    derivation.push(Derivation::TreeProduct { outer: outer.upper, inner: inner_sup.upper });
    CapacityBound {
        lower: witness.unwrap_or(0.0).min(upper),
        upper,
        constant: inner_sup.constant,
        derivation,
    }
}

/// Pullback through a landing branch R^d_n: at most 2^n times the capacity
/// at γ_n, relabeled at γ̃_n.
pub fn branch_pullback_bound(bound: &CapacityBound, n: u32) -> CapacityBound {
    let factor = 2f64.powi(n as i32);
    let mut derivation = bound.derivation.clone();
    derivation.push(Derivation::BranchPullback { n, factor });
    let raw = bound.upper * factor;
    if raw > 1.0 {
        derivation.push(Derivation::Clamp);
    }
    CapacityBound { lower: 0.0, upper: raw.min(1.0), constant: QsConstant::GammaTilde(n), derivation }
}

/// γ_n = γ(n+1)/n and γ̃_n = γ(2n+3)/(2n+1), exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaSequence {
    pub base: Rational,
}

impl GammaSequence {
    pub fn new(base: Rational) -> Result<Self, QsError> {
        if base <= 1 {
            return Err(QsError::InvalidParameters("γ must exceed 1".into()));
        }
        Ok(GammaSequence { base })
    }

    pub fn gamma_n(&self, n: u32) -> Rational {
        assert!(n >= 1);
        Rational::from(&self.base * Rational::from((n + 1, n)))
    }

    pub fn gamma_tilde_n(&self, n: u32) -> Rational {
        assert!(n >= 1);
        Rational::from(&self.base * Rational::from((2 * n + 3, 2 * n + 1)))
    }
}

fn check_q(q: f64) -> Result<(), QsError> {
    if !(0.0..=1.0).contains(&q) {
        return Err(QsError::DomainError(format!("q = {q} outside [0, 1]")));
    }
    Ok(())
}

pub fn binomial(m: u32, k: u32) -> Integer {
    Integer::from(Integer::binomial_u(m, k))
}

/// Coefficient of q^k in C(m, k)(2^n q)^k.
pub fn large_deviation_coefficient(m: u32, k: u32, n: u32) -> Integer {
    binomial(m, k) << (n * k)
}

/// min(1, C(m, k)(2^n q)^k): capacity of addresses of length m with at
/// least k entries in a set of capacity q.
pub fn large_deviation_bound(m: u32, k: u32, q: f64, n: u32) -> Result<f64, QsError> {
    check_q(q)?;
    if k > m {
        return Err(QsError::DomainError(format!("k = {k} > m = {m}")));
    }
    if k == 0 {
        return Ok(1.0);
    }
    if q == 0.0 {
        return Ok(0.0);
    }
    let ln_c = ln_binomial(m, k);
    let ln = ln_c + k as f64 * (n as f64 * std::f64::consts::LN_2 + q.ln());
    Ok(ln.exp().min(1.0))
}

fn ln_binomial(m: u32, k: u32) -> f64 {
    let c = binomial(m, k);
    let (mant, exp) = c.to_f64_exp();
    mant.ln() + exp as f64 * std::f64::consts::LN_2
}

/// (3/q)^{qm}, the Stirling bound on C(m, qm).
pub fn stirling_form(m: u32, q: f64) -> Result<f64, QsError> {
    check_q(q)?;
    if q == 0.0 {
        return Ok(1.0);
    }
    Ok((q * m as f64 * (3.0 / q).ln()).exp())
}

/// log2 of 2^{−n} q^{−1} (1/2)^{6·2^n q^{−1}}, which underflows f64 for
/// torrentially small q.
pub fn log2_tail_sum(q: f64, n: u32) -> Result<f64, QsError> {
    check_q(q)?;
    let s = 6.0 * 2f64.powi(n as i32);
    if q == 0.0 || 1.0 / q <= s {
        return Err(QsError::DomainError(format!("need 1/q > 6·2^n, got q = {q}, n = {n}")));
    }
    Ok(-(n as f64) - q.log2() - s / q)
}

/// (1/2)^{6·2^n q m}.
pub fn sparse_form(m: u32, q: f64, n: u32) -> Result<f64, QsError> {
    check_q(q)?;
    Ok(0.5f64.powf(6.0 * 2f64.powi(n as i32) * q * m as f64))
}

/// 2^{−n} q^{−1} (1/2)^{6·2^n q^{−1}}, valid when q^{−1} > 6·2^n.
pub fn tail_sum(q: f64, n: u32) -> Result<f64, QsError> {
    log2_tail_sum(q, n).map(f64::exp2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn holder_examples() {
        assert_eq!(holder_bounds(0.5, 1.0), (0.5, 0.5));
        assert_eq!(holder_bounds(0.0, 1.3), (0.0, 0.0));
        let (lo, up) = holder_bounds(1.0, 1.3);
        assert!((lo - 1.0 / 1.3).abs() < 1e-15 && up == 1.0);
        let (_, up) = holder_bounds(0.25, 1.2);
        assert!((up - 0.3f64.powf(1.0 / 1.2)).abs() < 1e-15);
        assert!((up - 0.3667).abs() < 1e-4);
    }

    #[test]
    fn capacity_examples() {
        let p1 = QsParameters::new(1.01, 1.0, 0.05).unwrap();
        let whole = IntervalSet::new((0.0, 1.0), vec![(0.0, 1.0)]).unwrap();
        let b = capacity_bound(&whole, &QsParameters::default());
        assert_eq!((b.lower, b.upper), (1.0, 1.0));
        let half = IntervalSet::new((0.0, 1.0), vec![(0.0, 0.5)]).unwrap();
        let b = capacity_bound(&half, &p1);
        assert_eq!((b.lower, b.upper), (0.5, 0.5));
        let two = IntervalSet::new((0.0, 1.0), vec![(0.1, 0.2), (0.5, 0.6)]).unwrap();
        let p = QsParameters::new(1.1, 1.1, 0.5).unwrap();
        let b = capacity_bound(&two, &p);
        assert!((b.upper - 2.0 * 0.11f64.powf(1.0 / 1.1)).abs() < 1e-12);
        assert!((b.lower - 0.2).abs() < 1e-12);
    }

    #[test]
    fn composition_examples() {
        let mk = |u: f64| CapacityBound { lower: 0.0, upper: u, constant: QsConstant::Base, derivation: vec![] };
        assert!((tree_compose(&mk(0.3), &mk(0.5), None).upper - 0.15).abs() < 1e-15);
        assert_eq!(tree_compose(&mk(1.0), &mk(0.37), None).upper, 0.37);
        let chain = tree_compose(&tree_compose(&mk(0.3), &mk(0.5), None), &mk(0.2), None);
        assert!((chain.upper - 0.03).abs() < 1e-15);
        let b = branch_pullback_bound(&mk(1e-9), 10);
        assert!((b.upper - 1.024e-6).abs() < 1e-18);
        assert_eq!(b.constant, QsConstant::GammaTilde(10));
        assert_eq!(branch_pullback_bound(&mk(0.5), 3).upper, 1.0);
    }

    #[test]
    fn large_deviation_examples() {
        let q = 0.001;
        let n = 3;
        let b = large_deviation_bound(2, 1, q, n).unwrap();
        assert!((b - 2.0 * 8.0 * q).abs() < 1e-15);
        // q(2,1) ≤ q(1,1) + 2^n q·q(1,0) with q(1,1) ≤ 2^n q, q(1,0) = 1
        assert!(b >= 8.0 * q + 8.0 * q - 1e-15);
        assert_eq!(large_deviation_bound(7, 0, q, n).unwrap(), 1.0);
        assert!(large_deviation_bound(3, 4, q, n).is_err());
        assert!(large_deviation_bound(3, 1, 1.5, n).is_err());
    }

    #[test]
    fn recursion_holds_exactly() {
        // coefficients of q^{k}: B(m+1,k+1) = B(m,k+1) + 2^n B(m,k)
        for n in [1u32, 4] {
            for m in 1..30u32 {
                for k in 0..m {
                    let lhs = large_deviation_coefficient(m + 1, k + 1, n);
                    let rhs = large_deviation_coefficient(m, k + 1, n) + (large_deviation_coefficient(m, k, n) << n);
                    assert!(lhs >= rhs);
                }
            }
        }
    }

    #[test]
    fn gamma_sequence_is_ordered() {
        let g = GammaSequence::new(Rational::from((101, 100))).unwrap();
        for n in 1..200 {
            assert!(g.gamma_n(n) > g.gamma_tilde_n(n));
            assert!(g.gamma_tilde_n(n) > g.gamma_n(n + 1));
            assert!(g.gamma_n(n + 1) > g.base);
        }
    }

    #[test]
    fn stirling_and_sparse_forms() {
        assert!(stirling_form(100, 0.1).unwrap() >= binomial(100, 10).to_f64());
        assert!((sparse_form(10, 0.01, 2).unwrap() - 0.5f64.powf(2.4)).abs() < 1e-15);
        assert!(tail_sum(0.02, 1).unwrap() > 0.0);
        assert!((log2_tail_sum(0.001, 2).unwrap() - (-2.0 + 1000f64.log2() - 24000.0)).abs() < 1e-9);
        assert!(tail_sum(0.1, 2).is_err());
    }

    fn interval_set() -> impl Strategy<Value = IntervalSet> {
        proptest::collection::vec((0.0f64..1.0, 0.0f64..0.2), 0..6).prop_map(|v| {
            let mut comps: Vec<(f64, f64)> = Vec::new();
            let mut cursor = 0.0;
            for (gap, len) in v {
                let lo = cursor + gap * (1.0 - cursor) * 0.5;
                let hi = (lo + len).min(1.0);
                if lo >= 1.0 {
                    break;
                }
                comps.push((lo, hi));
                cursor = hi;
            }
            IntervalSet::new((0.0, 1.0), comps).unwrap()
        })
    }

    proptest! {
        #[test]
        fn sandwich_and_monotone(x in interval_set(), k in 1.0f64..1.5, extra in 0.0f64..0.1) {
            let p = QsParameters::new(1.1, k, 5.0 * k).unwrap();
            let b = capacity_bound(&x, &p);
            prop_assert!(b.lower <= b.upper + 1e-15);
            prop_assert!(b.lower >= x.lebesgue_ratio() - 1e-15);
            prop_assert!(b.upper <= 1.0);
            let last = x.components().last().map_or(0.0, |c| c.1);
            if last + extra < 1.0 && extra > 0.0 {
                let mut comps = x.components().to_vec();
                comps.push((last, last + extra));
                if let Ok(bigger) = IntervalSet::new((0.0, 1.0), comps) {
                    let bb = capacity_bound(&bigger, &p);
                    prop_assert!(bb.lower >= b.lower - 1e-15);
                    prop_assert!(bb.upper >= b.upper - 1e-15);
                }
            }
        }

        #[test]
        fn holder_sides_ordered(r in 0.0f64..=1.0, k in 1.0f64..3.0) {
            let (lo, up) = holder_bounds(r, k);
            prop_assert!(lo <= r + 1e-15 && r <= up + 1e-15);
        }
    }
}
