//! Grid estimates of λ_n(j), truncated log-derivatives and distortion of R_n.

use rayon::prelude::*;
use rug::Float;

use super::{discover_branches, StatsError};
use crate::nest::{PrincipalNest, ReturnBranch};
use crate::quad::QuadraticMap;
use crate::real::{ln_abs, log2_abs};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileConfig {
    /// Grid points per branch (endpoints included); the refinement pass uses 2·grid − 1.
    pub grid: usize,
    /// Branches profiled, spread evenly over the discovered ones.
    pub samples: usize,
    /// Strata used to discover branches.
    pub discovery: usize,
    pub seed: u64,
    /// Relative change of λ_n(j) under refinement that triggers a warning.
    pub refine_tolerance: f64,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig { grid: 16, samples: 32, discovery: 400, seed: 0, refine_tolerance: 0.05 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BranchProfile {
    pub index: i64,
    pub return_time: usize,
    /// min over the grid of ln|Df^r(x)|/r
    pub lambda: f64,
    /// The same on the refined grid.
    pub lambda_refined: f64,
    /// ln of max|Df^r| / min|Df^r| over the refined grid.
    pub ln_distortion: f64,
    /// ln(|I_n|/|I^j_n|)
    pub ln_length_ratio: f64,
    /// ln(d(I^j_n, 0)/|I_n|)
    pub ln_distance_ratio: f64,
    /// k = 1..=r: min over the refined grid of ln|Df^k(x)|/k.
    pub truncated: Vec<f64>,
    /// min over grid x and 1 ≤ k ≤ r of ln|Df^k(x)| − ln|x|.
    pub ln_lower_margin: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HyperbolicityProfile {
    pub level: usize,
    pub branches: Vec<BranchProfile>,
    /// λ_n over the sampled branches.
    pub lambda: Option<f64>,
    pub max_ln_distortion: f64,
    /// n ln 2, the distortion bound on return branches.
    pub ln_distortion_bound: f64,
    /// 3 ln c_{n−1}: the truncated lower bound |Df^k(x)| > |x| c_{n−1}^3.
    pub ln_lower_bound: Option<f64>,
    pub warnings: Vec<String>,
}

impl HyperbolicityProfile {
    pub fn branch(&self, index: i64) -> Option<&BranchProfile> {
        self.branches.iter().find(|b| b.index == index)
    }

    /// Branches violating |Df^k(x)| > |x| c_{n−1}^3 at some grid point.
    pub fn lower_bound_violations(&self) -> Vec<i64> {
        match self.ln_lower_bound {
            None => Vec::new(),
            Some(lb) => self.branches.iter().filter(|b| b.ln_lower_margin <= lb).map(|b| b.index).collect(),
        }
    }
}

/// Bits needed to follow a branch of relative length 2^{-l} through its return.
fn working_precision(nest_prec: u32, log2_rel: f64) -> u32 {
    let want = (2.0 * log2_rel.max(0.0) + 128.0).ceil() as u32;
    want.div_ceil(64).saturating_mul(64).clamp(128, nest_prec.max(128))
}

pub(crate) fn profile_branch(nest: &PrincipalNest, b: &ReturnBranch, grid: usize) -> BranchProfile {
    let n = b.level;
    let u = &nest.levels[n].half_width;
    let len = b.length();
    let log2_rel = log2_abs(u) + 1.0 - log2_abs(&len);
    let prec = working_precision(nest.precision, log2_rel);
    let map = QuadraticMap::new(&nest.a, prec).expect("validated parameter");
    let r = b.return_time;
    let points = 2 * grid.max(2) - 1;
    let mut truncated = vec![f64::INFINITY; r];
    let mut coarse = f64::INFINITY;
    let mut fine = f64::INFINITY;
    let mut lmax = f64::NEG_INFINITY;
    let mut margin = f64::INFINITY;
    for i in 0..points {
        let t = i as f64 / (points - 1) as f64;
        let mut x = Float::with_val(prec, &b.lo + Float::with_val(prec, &len * t));
        let ln_x = ln_abs(&x);
        let mut l = 0.0;
        for (k, slot) in truncated.iter_mut().enumerate() {
            l += ln_abs(&x) + std::f64::consts::LN_2;
            map.step(&mut x);
            *slot = slot.min(l / (k + 1) as f64);
            margin = margin.min(l - ln_x);
        }
        let lam = l / r as f64;
        fine = fine.min(lam);
        if i % 2 == 0 {
            coarse = coarse.min(lam);
        }
        lmax = lmax.max(l);
    }
    BranchProfile {
        index: b.index,
        return_time: r,
        lambda: coarse,
        lambda_refined: fine,
        ln_distortion: lmax - fine * r as f64,
        ln_length_ratio: log2_rel * std::f64::consts::LN_2,
        ln_distance_ratio: (log2_abs(&b.lo) - log2_abs(u) - 1.0) * std::f64::consts::LN_2,
        truncated,
        ln_lower_margin: margin,
    }
}

/// Pick `k` items spread evenly over `items`.
fn spread<T: Clone>(items: &[T], k: usize) -> Vec<T> {
    if items.len() <= k {
        return items.to_vec();
    }
    (0..k).map(|i| items[i * items.len() / k].clone()).collect()
}

pub fn hyperbolicity_profile(
    nest: &PrincipalNest,
    n: usize,
    cfg: &ProfileConfig,
) -> Result<HyperbolicityProfile, StatsError> {
    let disc = discover_branches(nest, n, cfg.discovery, cfg.seed)?;
    let chosen = spread(&disc.branches, cfg.samples);
    let branches: Vec<BranchProfile> = chosen.par_iter().map(|b| profile_branch(nest, b, cfg.grid)).collect();
    let mut warnings = Vec::new();
    for b in &branches {
        let rel = (b.lambda - b.lambda_refined).abs() / b.lambda_refined.abs().max(f64::MIN_POSITIVE);
        if rel > cfg.refine_tolerance {
            warnings.push(format!(
                "branch {} (r = {}): λ moves from {:.6} to {:.6} under refinement",
                b.index, b.return_time, b.lambda, b.lambda_refined
            ));
        }
    }
    let lambda = branches.iter().map(|b| b.lambda_refined).reduce(f64::min);
    let max_ln_distortion = branches.iter().map(|b| b.ln_distortion).fold(0.0, f64::max);
    let ln_lower_bound = (n >= 1).then(|| 3.0 * ln_abs(&nest.scaling_factors()[n - 1]));
    Ok(HyperbolicityProfile {
        level: n,
        branches,
        lambda,
        max_ln_distortion,
        ln_distortion_bound: n as f64 * std::f64::consts::LN_2,
        ln_lower_bound,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nest::{build_principal_nest, NestConfig};

    fn nest17() -> PrincipalNest {
        build_principal_nest(&"1.7".parse().unwrap(), &NestConfig::with_max_level(3)).unwrap()
    }

    #[test]
    fn lambda_positive_and_stable_at_one_point_seven() {
        let nest = nest17();
        let cfg = ProfileConfig { samples: 12, discovery: 200, ..ProfileConfig::default() };
        let prof = hyperbolicity_profile(&nest, 1, &cfg).unwrap();
        assert!(prof.lambda.unwrap() > 0.0);
        // 4× density: grid 64 against grid 16
        let dense = hyperbolicity_profile(&nest, 1, &ProfileConfig { grid: 64, ..cfg }).unwrap();
        for (a, b) in prof.branches.iter().zip(&dense.branches) {
            assert_eq!(a.index, b.index);
            assert!((a.lambda - b.lambda).abs() <= 0.05 * b.lambda.abs());
        }
    }

    #[test]
    fn mean_value_consistency() {
        let nest = nest17();
        let prof = hyperbolicity_profile(&nest, 1, &ProfileConfig { samples: 12, discovery: 200, ..Default::default() }).unwrap();
        for b in &prof.branches {
            let r = b.return_time as f64;
            assert!(b.ln_distortion >= 0.0);
            assert!(b.lambda_refined >= (b.ln_length_ratio - b.ln_distortion) / r - 1e-3);
            assert!(b.lambda_refined <= b.ln_length_ratio / r + 1e-3);
            assert_eq!(b.truncated.len(), b.return_time);
            assert!((b.truncated[b.return_time - 1] - b.lambda_refined).abs() < 1e-12);
        }
    }
}
