//! Markov partition of f on I ∖ I_{n+1} when ∂I_{n+1} is preperiodic.

use std::collections::VecDeque;

use rug::{Float, Rational};

use super::{NestBase, NestError, PrincipalNest};
use crate::quad::orientation_reversing_fixed_point;
use crate::real::{log2_abs, Parameter};

const MAX_POINTS: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    pub lo: Float,
    pub hi: Float,
    /// Indices of the pieces covered by f(piece).
    pub image: Vec<usize>,
    /// Whether f(piece) also covers I_{n+1}.
    pub covers_central: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarkovPartition {
    pub level: usize,
    pub depth: usize,
    /// Steps from ∂I_{level} to the fixed point p.
    pub preperiod: usize,
    /// K ∪ {±β} ∪ ∂I_{level}, sorted.
    pub endpoints: Vec<Float>,
    pub pieces: Vec<Piece>,
    /// log2 of the largest distance from an endpoint image to the endpoint set.
    pub log2_endpoint_error: f64,
    pub log2_tolerance: f64,
}

impl MarkovPartition {
    pub fn is_markov(&self) -> bool {
        self.log2_endpoint_error <= self.log2_tolerance
    }
}

/// Index of the endpoint within 2^log2_tol of y.
fn locate(endpoints: &[Float], y: &Float, log2_tol: f64) -> (Option<usize>, f64) {
    let prec = y.prec();
    let i = endpoints.partition_point(|e| e < y);
    let mut best = (None, f64::INFINITY);
    for k in [i.wrapping_sub(1), i] {
        if let Some(e) = endpoints.get(k) {
            let d = log2_abs(&Float::with_val(prec, e - y));
            if d < best.1 {
                best = (Some(k), d);
            }
        }
    }
    if best.1 <= log2_tol {
        best
    } else {
        (None, best.1)
    }
}

/// Partition of I ∖ I_{level} by the depth-s preimages of p avoiding int I_{level}.
pub fn markov_partition(nest: &PrincipalNest, level: usize, depth: usize) -> Result<MarkovPartition, NestError> {
    if level == 0 {
        return Err(NestError::LevelMissing(0));
    }
    if !matches!(nest.base, NestBase::FixedPoint) {
        return Err(NestError::PreperiodNotFoundWithinBudget(depth));
    }
    let lvl = nest.level(level)?;
    let prec = nest.precision;
    let map = nest.map();
    let log2_tol = map.log2_threshold();
    let u = &lvl.half_width;
    let p = orientation_reversing_fixed_point(&nest.a, prec)?;

    // ∂I_level reaches p within `depth` steps
    let mut y = Float::with_val(prec, u);
    let mut preperiod = None;
    for j in 0..=depth {
        if log2_abs(&Float::with_val(prec, &y - &p)) <= log2_tol {
            preperiod = Some(j);
            break;
        }
        map.step(&mut y);
    }
    let preperiod = preperiod.ok_or(NestError::PreperiodNotFoundWithinBudget(depth))?;

    // backward tree of p, pruning branches through int I_level
    let mut points = vec![p.clone()];
    let mut queue = VecDeque::from([(p.clone(), 0usize)]);
    while let Some((z, d)) = queue.pop_front() {
        if d == depth {
            continue;
        }
        for s in [1i8, -1] {
            let Some(w) = map.preimage(&z, s) else { continue };
            if s < 0 && w.is_zero() {
                continue;
            }
            let gap = Float::with_val(prec, w.abs_ref()) - u;
            if gap.is_sign_negative() && log2_abs(&gap) > log2_tol {
                continue;
            }
            if points.len() >= MAX_POINTS {
                return Err(NestError::BudgetExceeded(MAX_POINTS));
            }
            points.push(w.clone());
            queue.push_back((w, d + 1));
        }
    }
    let (beta, minus_beta) = map.invariant_interval();
    points.extend([beta, minus_beta, Float::with_val(prec, -u), Float::with_val(prec, u)]);
    points.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    let mut endpoints: Vec<Float> = Vec::with_capacity(points.len());
    for x in points {
        match endpoints.last() {
            Some(last) if log2_abs(&Float::with_val(prec, &x - last)) <= log2_tol => {}
            _ => endpoints.push(x),
        }
    }

    let central = endpoints
        .iter()
        .position(|e| log2_abs(&Float::with_val(prec, e + u)) <= log2_tol)
        .expect("−u is an endpoint");
    // gap g lies between endpoints g and g+1; gap `central` is I_level
    let piece_of_gap = |g: usize| -> Option<usize> {
        match g.cmp(&central) {
            std::cmp::Ordering::Less => Some(g),
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => Some(g - 1),
        }
    };
    let mut worst = f64::NEG_INFINITY;
    let mut pieces = Vec::with_capacity(endpoints.len() - 2);
    for g in 0..endpoints.len() - 1 {
        if g == central {
            continue;
        }
        let (lo, hi) = (&endpoints[g], &endpoints[g + 1]);
        let (ilo, elo) = locate(&endpoints, &map.image(lo), log2_tol);
        let (ihi, ehi) = locate(&endpoints, &map.image(hi), log2_tol);
        worst = worst.max(elo).max(ehi);
        let mut image = Vec::new();
        let mut covers_central = false;
        if let (Some(a), Some(b)) = (ilo, ihi) {
            for h in a.min(b)..a.max(b) {
                match piece_of_gap(h) {
                    Some(k) => image.push(k),
                    None => covers_central = true,
                }
            }
        }
        pieces.push(Piece { lo: lo.clone(), hi: hi.clone(), image, covers_central });
    }
    Ok(MarkovPartition {
        level,
        depth,
        preperiod,
        endpoints,
        pieces,
        log2_endpoint_error: worst,
        log2_tolerance: log2_tol,
    })
}

/// The parameter in (lo, hi) with f^k(0) = ±√(a + p), so that
/// f^{k+1}(0) = −p and f^{k+2}(0) = p.
pub fn misiurewicz_parameter(k: usize, lo: f64, hi: f64, prec: u32) -> Result<Parameter, NestError> {
    let g = |a: &Float| -> Float {
        let mut x = Float::new(prec);
        for _ in 0..k {
            x.square_mut();
            x = Float::with_val(prec, a - &x);
        }
        let p = (Float::with_val(prec, a * 4u32) + 1u32).sqrt() - 1u32;
        let p = p / 2u32;
        x.square_mut();
        x - Float::with_val(prec, a + &p)
    };
    let mut lo = Float::with_val(prec, lo);
    let mut hi = Float::with_val(prec, hi);
    let neg_lo = g(&lo).is_sign_negative();
    if neg_lo == g(&hi).is_sign_negative() {
        return Err(crate::quad::QuadError::BracketInvalid.into());
    }
    for _ in 0..prec {
        let mid = Float::with_val(prec, &lo + &hi) / 2u32;
        if g(&mid).is_sign_negative() == neg_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Parameter::from_rational(lo.to_rational().unwrap_or_else(|| Rational::from(0))))
}

/// The sample used throughout: critical orbit 0 → a → … with v_0 = 3.
pub fn misiurewicz_sample() -> Parameter {
    misiurewicz_parameter(4, 1.69755, 1.69756, 2048).expect("bracketed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nest::{build_principal_nest, NestConfig};

    /// Depth-first f64 enumeration of the preimage tree, deduplicated.
    fn oracle(a: f64, u: f64, depth: usize) -> Vec<f64> {
        let p = ((1.0 + 4.0 * a).sqrt() - 1.0) / 2.0;
        let beta = -(1.0 + (1.0 + 4.0 * a).sqrt()) / 2.0;
        fn dfs(a: f64, u: f64, z: f64, d: usize, out: &mut Vec<f64>) {
            out.push(z);
            if d == 0 || z > a {
                return;
            }
            let r = (a - z).sqrt();
            for w in [r, -r] {
                if w.abs() < u - 1e-9 || (w == 0.0 && w.is_sign_negative()) {
                    continue;
                }
                dfs(a, u, w, d - 1, out);
            }
        }
        let mut out = vec![beta, -beta, -u, u];
        dfs(a, u, p, depth, &mut out);
        out.sort_by(|x, y| x.partial_cmp(y).unwrap());
        out.dedup_by(|x, y| (*x - *y).abs() < 1e-9);
        out
    }

    #[test]
    fn partition_matches_enumeration() {
        let a = misiurewicz_sample();
        let nest = build_principal_nest(&a, &NestConfig::with_max_level(2)).unwrap();
        assert_eq!(nest.levels[0].v, Some(3));
        let mp = markov_partition(&nest, 1, 8).unwrap();
        assert!(mp.is_markov());
        assert!(mp.preperiod <= 8);
        let expected = oracle(a.to_f64(), nest.levels[1].half_width.to_f64(), 8);
        let got: Vec<f64> = mp.endpoints.iter().map(|e| e.to_f64()).collect();
        assert_eq!(got.len(), expected.len());
        for (g, e) in got.iter().zip(&expected) {
            assert!((g - e).abs() < 1e-9);
        }
        assert_eq!(mp.pieces.len(), mp.endpoints.len() - 2);
        for piece in &mp.pieces {
            assert!(!piece.image.is_empty() || piece.covers_central);
            assert!(piece.lo.is_sign_negative() == piece.hi.is_sign_negative() || piece.lo.is_zero());
        }
    }

    #[test]
    fn non_preperiodic_boundary_is_reported() {
        let nest = build_principal_nest(&"1.7".parse().unwrap(), &NestConfig::with_max_level(2)).unwrap();
        assert_eq!(markov_partition(&nest, 2, 3), Err(NestError::PreperiodNotFoundWithinBudget(3)));
    }
}
