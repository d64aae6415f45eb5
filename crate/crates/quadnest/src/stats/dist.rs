//! Return-time distributions of R_n under Lebesgue measure on I_n.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Float;

use super::StatsError;
use crate::nest::{NestError, PrincipalNest, ReturnBranch};
use crate::qs::{capacity_bound, CapacityBound, IntervalSet, QsParameters};

pub const MIN_SAMPLES: usize = 100;

/// Right-side branches of R_n hit by one point in each of `samples` equal
/// strata of (0, u_n).
#[derive(Clone, Debug)]
pub struct Discovery {
    pub level: usize,
    pub samples: usize,
    /// Points rejected as landing on a boundary or never returning.
    pub skipped: usize,
    /// Sorted by position.
    pub branches: Vec<ReturnBranch>,
    pub central: ReturnBranch,
}

pub fn discover_branches(nest: &PrincipalNest, n: usize, samples: usize, seed: u64) -> Result<Discovery, StatsError> {
    let lvl = nest.level(n)?;
    let prec = nest.precision;
    let central = nest.branch_by_index(n, 0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut found: Vec<ReturnBranch> = Vec::new();
    let mut skipped = 0;
    for i in 0..samples {
        let t: f64 = rng.random();
        let x = Float::with_val(prec, &lvl.half_width * ((i as f64 + t) / samples as f64));
        if x < central.hi || found.iter().any(|b| b.contains(&x)) {
            continue;
        }
        match nest.return_branch_at(n, &x) {
            Ok(b) => found.push(b),
            Err(NestError::LandsOnBoundary(_) | NestError::NeverReturnsWithinBudget(_)) => skipped += 1,
            Err(e) => return Err(e.into()),
        }
    }
    found.sort_by(|a, b| a.lo.partial_cmp(&b.lo).expect("finite"));
    found.dedup_by(|a, b| a.word == b.word);
    Ok(Discovery { level: n, samples, skipped, branches: found, central })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Concentration {
    /// c_{n−1}^{−1+2ε}
    pub lo: f64,
    /// c_{n−1}^{−1−2ε}
    pub hi: f64,
    /// Lebesgue weight of return times in [lo, hi].
    pub mass: f64,
    /// mass / coverage
    pub fraction: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeDistribution {
    pub level: usize,
    pub samples: usize,
    pub skipped: usize,
    pub branch_count: usize,
    /// (return time, Σ |I^j_n|/|I_n| over sampled branches with that time),
    /// both sides and the central branch included.
    pub histogram: Vec<(usize, f64)>,
    /// Total sampled weight; 1 − coverage is unexplored.
    pub coverage: f64,
    pub concentration: Option<Concentration>,
    /// Largest ζ ≤ c_{n−1} on a geometric grid with A(k) ≤ e^{−ζk} for all
    /// sampled k ≥ 1/ζ.  Lebesgue analogue of α_n.
    pub alpha_estimate: Option<f64>,
    /// (lo/u_n, hi/u_n, return time) for the sampled right-side branches.
    pub components: Vec<(f64, f64, usize)>,
}

impl TimeDistribution {
    /// A^{Leb}_n(k): Lebesgue weight of sampled points with r_n ≥ k.
    pub fn tail(&self, k: usize) -> f64 {
        self.histogram.iter().filter(|(t, _)| *t >= k).map(|(_, w)| w).sum()
    }

    /// Capacity-bound version of the tail: the sampled branches with r_n ≥ k,
    /// both sides, as a subset of I_n.
    pub fn capacity_tail(&self, k: usize, params: &QsParameters) -> CapacityBound {
        let mut comps = Vec::new();
        for &(lo, hi, t) in &self.components {
            if t >= k {
                comps.push((lo, hi));
                comps.push((-hi, -lo));
            }
        }
        let set = IntervalSet::new((-1.0, 1.0), comps).expect("branches are disjoint");
        capacity_bound(&set, params)
    }
}

fn alpha_estimate(hist: &[(usize, f64)], c_prev: f64) -> Option<f64> {
    let tmax = hist.last()?.0;
    let holds = |zeta: f64| {
        let kmin = (1.0 / zeta).ceil().max(1.0) as usize;
        let mut prev = 0usize;
        let mut tail: f64 = hist.iter().map(|h| h.1).sum();
        for &(t, w) in hist {
            // A(k) = tail for k in (prev, t]
            let k = (prev + 1).max(kmin);
            if k <= t && k <= tmax && tail > (-zeta * k as f64).exp() {
                return false;
            }
            tail -= w;
            prev = t;
        }
        true
    };
    (0..=400).map(|i| c_prev * (-(i as f64) / 8.0).exp2()).find(|&z| holds(z))
}

pub fn return_time_distribution(
    nest: &PrincipalNest,
    n: usize,
    samples: usize,
    epsilon: f64,
    seed: u64,
) -> Result<TimeDistribution, StatsError> {
    if samples < MIN_SAMPLES {
        return Err(StatsError::BudgetTooSmall(samples));
    }
    let disc = discover_branches(nest, n, samples, seed)?;
    let u = &nest.level(n)?.half_width;
    let prec = nest.precision;
    let mut hist: BTreeMap<usize, f64> = BTreeMap::new();
    let ratio = |len: Float| Float::with_val(prec, len / u).to_f64() / 2.0;
    *hist.entry(disc.central.return_time).or_default() += ratio(disc.central.length());
    let mut components = Vec::with_capacity(disc.branches.len());
    for b in &disc.branches {
        *hist.entry(b.return_time).or_default() += 2.0 * ratio(b.length());
        let rel = |x: &Float| Float::with_val(prec, x / u).to_f64();
        components.push((rel(&b.lo), rel(&b.hi), b.return_time));
    }
    let histogram: Vec<(usize, f64)> = hist.into_iter().collect();
    let coverage = histogram.iter().map(|h| h.1).sum();
    let c_prev = (n >= 1).then(|| nest.scaling_factors()[n - 1].to_f64());
    let concentration = c_prev.map(|c| {
        let lo = c.powf(-1.0 + 2.0 * epsilon);
        let hi = c.powf(-1.0 - 2.0 * epsilon);
        let mass: f64 = histogram.iter().filter(|(t, _)| (*t as f64) >= lo && (*t as f64) <= hi).map(|h| h.1).sum();
        Concentration { lo, hi, mass, fraction: mass / coverage }
    });
    Ok(TimeDistribution {
        level: n,
        samples,
        skipped: disc.skipped,
        branch_count: disc.branches.len(),
        alpha_estimate: alpha_estimate(&histogram, c_prev.unwrap_or(1.0)),
        histogram,
        coverage,
        concentration,
        components,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nest::{build_principal_nest, misiurewicz_sample, NestConfig};

    /// Branches of R_1 with time ≤ tmax from a dense double-precision scan:
    /// runs of grid points sharing the return itinerary, as (time, |I^j|/u).
    fn scan(a: f64, u: f64, grid: usize, tmax: usize) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        let mut run: Option<(Vec<bool>, usize, f64)> = None;
        let h = u / grid as f64;
        for i in 0..grid {
            let mut y = (i as f64 + 0.5) * h;
            let mut word = vec![];
            let mut t = 0;
            for k in 1..=tmax {
                word.push(y > 0.0);
                y = a - y * y;
                if y.abs() < u {
                    t = k;
                    break;
                }
            }
            let key = if t == 0 { None } else { Some((word, t)) };
            match (&mut run, key) {
                (Some((w, rt, len)), Some((w2, t2))) if *w == w2 && *rt == t2 => *len += h,
                (r, key) => {
                    if let Some((_, rt, len)) = r.take() {
                        out.push((rt, len / u));
                    }
                    *r = key.map(|(w, t)| (w, t, h));
                }
            }
        }
        if let Some((_, rt, len)) = run {
            out.push((rt, len / u));
        }
        out
    }

    #[test]
    fn histogram_matches_scan_at_misiurewicz_sample() {
        let a = misiurewicz_sample();
        let nest = build_principal_nest(&a, &NestConfig::with_max_level(2)).unwrap();
        let samples = 4000;
        let d = return_time_distribution(&nest, 1, samples, 0.05, 11).unwrap();
        let u = nest.levels[1].half_width.to_f64();
        let runs = scan(a.to_f64(), u, 400_000, 30);
        // a branch wider than two strata always contains one sample point
        let sure = 2.0 / samples as f64 + 1e-5;
        for t in 1..=30 {
            let all: f64 = runs.iter().filter(|r| r.0 == t).map(|r| r.1).sum();
            let wide: f64 = runs.iter().filter(|r| r.0 == t && r.1 > sure).map(|r| r.1).sum();
            let got = d.histogram.iter().find(|h| h.0 == t).map_or(0.0, |h| h.1);
            let tol = 1e-4 + 1e-3 * all;
            assert!(got <= all + tol && got >= wide - tol, "time {t}: {got} outside [{wide}, {all}]");
        }
        assert!(d.coverage <= 1.0 + 1e-12);
    }

    #[test]
    fn tail_is_monotone_and_bounded() {
        let nest = build_principal_nest(&"1.7".parse().unwrap(), &NestConfig::with_max_level(3)).unwrap();
        let d = return_time_distribution(&nest, 2, 300, 0.05, 3).unwrap();
        assert!(d.tail(1) <= 1.0 + 1e-12);
        let tmax = d.histogram.last().unwrap().0;
        for k in 1..tmax + 2 {
            assert!(d.tail(k + 1) <= d.tail(k));
        }
        let cap = d.capacity_tail(1, &QsParameters::default());
        assert!(cap.upper >= d.tail(1) - d.histogram.iter().find(|h| h.0 == nest.levels[2].v.unwrap()).map_or(0.0, |h| h.1) - 1e-9);
        assert_eq!(return_time_distribution(&nest, 2, 99, 0.05, 3), Err(StatsError::BudgetTooSmall(99)));
    }

    #[test]
    fn alpha_grid_search() {
        // A(k) = e^{−(k−1)/2}: ζ must stay below (k−1)/(2k) from k = ⌈1/ζ⌉ on
        let hist: Vec<(usize, f64)> = (1..60).map(|t| (t, (-(t as f64 - 1.0) / 2.0).exp() - (-(t as f64) / 2.0).exp())).collect();
        let z = alpha_estimate(&hist, 0.3).unwrap();
        assert_eq!(z, 0.3);
        let z = alpha_estimate(&hist, 0.9).unwrap();
        assert!(z < 1.0 / 3.0 && z > 0.3, "{z}");
    }
}
