//! Renormalization windows: detection from central cascades and restart of
//! the nest inside the restrictive interval.

use rug::Float;

use super::{build_from_base, central_pullback, NestBase, NestConfig, NestError};
use crate::quad::{bracketed_root, QuadraticMap, Sign};
use crate::real::{log2_abs, Parameter};

#[derive(Clone, Debug, PartialEq)]
pub enum RenormStatus {
    NotDetected,
    SuspectedPeriod(usize),
    /// f^m maps T = [−t, t] into itself.
    Confirmed { period: usize, half_width: Float },
}

impl RenormStatus {
    pub fn period(&self) -> Option<usize> {
        match self {
            RenormStatus::NotDetected => None,
            RenormStatus::SuspectedPeriod(m) | RenormStatus::Confirmed { period: m, .. } => Some(*m),
        }
    }
}

/// f^m on T rescaled to [−1, 1], together with the new base interval
/// [−p_κ, p_κ] for the next nest.
#[derive(Clone, Debug, PartialEq)]
pub struct RenormalizedMap {
    pub a: Parameter,
    /// (period, side of the root) for every renormalization so far.
    pub chain: Vec<(usize, Sign)>,
    /// Half-width t of the restrictive interval T.
    pub outer: Float,
    /// Orientation reversing fixed point of f^m in T.
    pub p_kappa: Float,
}

impl RenormalizedMap {
    pub fn period(&self) -> usize {
        self.chain.last().map(|c| c.0).unwrap_or(1)
    }

    pub fn periods(&self) -> Vec<usize> {
        self.chain.iter().map(|c| c.0).collect()
    }

    pub fn to_standard(&self, x: &Float) -> Float {
        Float::with_val(x.prec(), x / &self.outer)
    }

    pub fn from_standard(&self, y: &Float) -> Float {
        Float::with_val(y.prec(), y * &self.outer)
    }

    /// The rescaled first return g(y) = f^m(t·y)/t on [−1, 1].
    pub fn rescaled(&self, y: &Float) -> Float {
        let map = QuadraticMap::new(&self.a, y.prec()).expect("validated");
        let x = self.from_standard(y);
        self.to_standard(&map.iterate(&x, self.period()))
    }

    pub(crate) fn p_kappa_at(&self, prec: u32) -> Result<Float, NestError> {
        if prec == self.p_kappa.prec() {
            return Ok(self.p_kappa.clone());
        }
        let map = QuadraticMap::new(&self.a, prec)?;
        let mut t = crate::quad::orientation_reversing_fixed_point(&self.a, prec)?;
        for &(m, side) in &self.chain {
            t = periodic_root(&map, m, side, &t)?;
        }
        Ok(t)
    }
}

/// Root of f^m(x) = x on the side of 0 where f^m is decreasing.
fn periodic_root(map: &QuadraticMap, m: usize, side: Sign, t: &Float) -> Result<Float, NestError> {
    let prec = map.precision();
    let zero = map.zero();
    let end = if side > 0 { Float::with_val(prec, t) } else { Float::with_val(prec, -t) };
    let tol = map.interval_length() >> (prec as i32 - 24);
    let root = bracketed_root(&zero, &end, None, &tol, 64 + 4 * prec as usize, |x| {
        let (y, d) = map.iterate_with_derivative(x, m);
        (y - x, d - 1u32)
    })
    .map_err(|_| NestError::NotRenormalizable)?;
    Ok(root.abs())
}

/// Restart data for the nest inside T = [−t, t] of period m.
pub fn renormalize(a: &Parameter, within: &NestBase, period: usize, t: &Float) -> Result<RenormalizedMap, NestError> {
    if period < 2 {
        return Err(NestError::NotRenormalizable);
    }
    let prec = t.prec().max(crate::quad::DEFAULT_PRECISION);
    let map = QuadraticMap::new(a, prec)?;
    let tol = Float::with_val(prec, map.threshold());
    let t = Float::with_val(prec, t);
    let slack = Float::with_val(prec, &t + &tol);
    // f^m(T) ⊆ T, f^m(∂T) ⊆ ∂T, and f^j(0) outside int T for 0 < j < m
    let mut x = map.zero();
    for j in 1..=period {
        map.step(&mut x);
        let xa = Float::with_val(prec, x.abs_ref());
        if j < period && xa < Float::with_val(prec, &t - &tol) {
            return Err(NestError::NotRenormalizable);
        }
        if j == period && xa > slack {
            return Err(NestError::NotRenormalizable);
        }
    }
    let image = map.iterate(&t, period);
    let miss = Float::with_val(prec, image.abs_ref()) - &t;
    if Float::with_val(prec, miss.abs_ref()) > tol {
        return Err(NestError::NotRenormalizable);
    }
    let at_zero = map.iterate(&map.zero(), period);
    // decreasing side: where f^m drops from its value at 0 toward the boundary
    let side: Sign = if at_zero > image { 1 } else { -1 };
    let p_kappa = periodic_root(&map, period, side, &t)?;
    let mut chain = match within {
        NestBase::FixedPoint => Vec::new(),
        NestBase::Renormalized(r) => r.chain.clone(),
    };
    chain.push((period, side));
    Ok(RenormalizedMap { a: a.clone(), chain, outer: t, p_kappa })
}

/// Decide renormalization at the next level of `base`.
pub fn detect_renormalization(a: &Parameter, base: &NestBase, config: &NestConfig) -> Result<RenormStatus, NestError> {
    let cfg = NestConfig { skip_regular_check: true, ..config.clone() };
    match build_from_base(a, base.clone(), &cfg) {
        // no cascade of central returns within the orbit budget
        Ok(_) | Err(NestError::BudgetExceeded(_)) => Ok(RenormStatus::NotDetected),
        Err(NestError::Renormalizable { period, half_width }) => Ok(RenormStatus::Confirmed { period, half_width }),
        Err(NestError::RenormalizationSuspected { period }) => Ok(RenormStatus::SuspectedPeriod(period)),
        Err(e) => Err(e),
    }
}

/// Repeatedly detect and renormalize.  Returns the confirmed periods and the
/// status at which the tower stopped.
pub fn renormalization_tower(
    a: &Parameter,
    config: &NestConfig,
    max_depth: usize,
) -> Result<(Vec<usize>, RenormStatus), NestError> {
    let mut base = NestBase::FixedPoint;
    let mut periods = Vec::new();
    for _ in 0..max_depth {
        let status = detect_renormalization(a, &base, config)?;
        match &status {
            RenormStatus::Confirmed { period, half_width } => {
                periods.push(*period);
                match renormalize(a, &base, *period, half_width) {
                    Ok(r) => base = NestBase::Renormalized(Box::new(r)),
                    Err(NestError::NotRenormalizable) => return Ok((periods, status)),
                    Err(e) => return Err(e),
                }
            }
            _ => return Ok((periods, status)),
        }
    }
    let last = periods.last().copied().unwrap_or(1);
    Ok((periods, RenormStatus::SuspectedPeriod(last)))
}

/// After a run of central returns with return time m, locate the fixed
/// point t of u ↦ (central pullback of ±u along the m-word) and test
/// whether [−t, t] is a restrictive interval.
pub(crate) fn confirm_after_central_run(map: &QuadraticMap, word: &[Sign], x_m: &Float, u: &Float) -> NestError {
    let m = word.len() + 1;
    let prec = map.precision();
    let log2_thr = map.log2_threshold();
    let mut t = Float::with_val(prec, u);
    let mut converged = None;
    for _ in 0..4 * prec {
        let Some((next, chain)) = central_pullback(map, word, &t) else { break };
        let step = Float::with_val(prec, &next - &t);
        t = next;
        if log2_abs(&step) < log2_thr {
            converged = Some(chain);
            break;
        }
    }
    let suspected = NestError::RenormalizationSuspected { period: m };
    let Some(chain) = converged else { return suspected };
    if Float::with_val(prec, x_m.abs_ref()) > t {
        return suspected;
    }
    let mut x = map.zero();
    for y in &chain {
        map.step(&mut x);
        let same_side = x.is_sign_negative() == y.is_sign_negative();
        if !same_side || Float::with_val(prec, x.abs_ref()) < t || Float::with_val(prec, y.abs_ref()) < t {
            return suspected;
        }
    }
    NestError::Renormalizable { period: m, half_width: t }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn par(s: &str) -> Parameter {
        s.parse().unwrap()
    }

    #[test]
    fn period_two_window() {
        let a = par("1.38");
        let cfg = NestConfig::with_max_level(6);
        let status = detect_renormalization(&a, &NestBase::FixedPoint, &cfg).unwrap();
        let RenormStatus::Confirmed { period: 2, half_width } = status else { panic!("{status:?}") };
        let p = crate::quad::orientation_reversing_fixed_point(&a, 256).unwrap();
        assert!((half_width.to_f64() - p.to_f64()).abs() < 1e-30);
        let r = renormalize(&a, &NestBase::FixedPoint, 2, &half_width).unwrap();
        // the period-2 orbit (1 ± √(4a − 3))/2
        let q = (1.0 - (4.0 * 1.38f64 - 3.0).sqrt()) / 2.0;
        assert!((r.p_kappa.to_f64() - q.abs()).abs() < 1e-14);
        let next = detect_renormalization(&a, &NestBase::Renormalized(Box::new(r)), &cfg).unwrap();
        assert_eq!(next.period(), Some(4));
    }

    #[test]
    fn rescaled_return_is_unimodal() {
        let a = par("1.38");
        let p = crate::quad::orientation_reversing_fixed_point(&a, 256).unwrap();
        let r = renormalize(&a, &NestBase::FixedPoint, 2, &p).unwrap();
        let ys: Vec<f64> = (0..=40)
            .map(|i| r.rescaled(&Float::with_val(128, -1.0 + i as f64 / 20.0)).to_f64())
            .collect();
        let turn = 20;
        assert!(ys[..=turn].windows(2).all(|w| w[0] >= w[1]) || ys[..=turn].windows(2).all(|w| w[0] <= w[1]));
        assert!(ys[turn..].windows(2).all(|w| w[0] >= w[1]) || ys[turn..].windows(2).all(|w| w[0] <= w[1]));
        assert!(ys.iter().all(|y| y.abs() <= 1.0 + 1e-12));
    }

    #[test]
    fn misiurewicz_is_not_renormalizable() {
        let a = par("2");
        let status = detect_renormalization(&a, &NestBase::FixedPoint, &NestConfig::with_max_level(4)).unwrap();
        assert_eq!(status, RenormStatus::NotDetected);
        let p = crate::quad::orientation_reversing_fixed_point(&a, 256).unwrap();
        assert_eq!(renormalize(&a, &NestBase::FixedPoint, 2, &p), Err(NestError::NotRenormalizable));
    }

    #[test]
    fn superstable_period_doubling_tower() {
        // superstable period-8 parameter: the tower confirms 2 and 4
        let a = par("1.3940461566");
        let (periods, _) = renormalization_tower(&a, &NestConfig::with_max_level(6), 6).unwrap();
        assert!(periods.starts_with(&[2, 4]), "{periods:?}");
    }
}
