//! Statistical observables over a built principal nest.

mod classify;
mod dist;
mod hyper;
mod orbit;
mod report;

pub use classify::{
    classify_landing, classify_return_branch, vg_within_g, BranchContext, BranchEvidence, Clause, ClassifierConfig,
    InclusionReport, LandingContext, LandingFlags, ReturnFlags,
};
pub use dist::{discover_branches, return_time_distribution, Concentration, Discovery, TimeDistribution, MIN_SAMPLES};
pub use hyper::{hyperbolicity_profile, BranchProfile, HyperbolicityProfile, ProfileConfig};
pub use orbit::{
    ce_estimator, critical_return_times, recurrence_exponent, CeConfig, CeReport, CeStream, GammaCount, RecurrenceReport,
    GAMMA_GRID,
};
pub use report::{parse_statistics, statistics_to_text, write_csv};

use rug::Float;
use thiserror::Error;

use crate::nest::{NestError, PrincipalNest};
use crate::real::{ln_abs, log2_abs};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error(transparent)]
    Nest(#[from] NestError),
    #[error("need at least {needed} levels, nest has {have}")]
    InsufficientLevels { needed: usize, have: usize },
    #[error("missing data: {0}")]
    MissingData(String),
    #[error("critical orbit attracted by a cycle of period {period} (multiplier {multiplier})")]
    RegularParameter { period: usize, multiplier: f64 },
    #[error("orbit hit the critical point at step {0} in double precision")]
    PrecisionExhausted(usize),
    #[error("sample budget {0} below the minimum of 100")]
    BudgetTooSmall(usize),
    #[error("requested {0} steps, above the configured cap")]
    BudgetExceeded(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingReport {
    /// c_n = |I_{n+1}|/|I_n|, n = 0, 1, …
    pub c: Vec<Float>,
    /// ln c_n^{-1}
    pub ln_inv_c: Vec<f64>,
    /// ln ln c_{n+1}^{-1} / ln c_n^{-1} per consecutive pair.
    pub torrential_ratios: Vec<f64>,
    /// Least-squares fit ln c_n ≈ ln C + n ln λ, when at least two c_n exist.
    pub decay_fit: Option<DecayFit>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit {
    pub ln_c: f64,
    pub ln_lambda: f64,
    /// Largest ln c_n − (ln C + n ln λ) over the fitted levels.
    pub max_excess: f64,
}

pub fn scaling_sequence(nest: &PrincipalNest) -> Result<ScalingReport, StatsError> {
    if nest.levels.len() < 2 {
        return Err(StatsError::InsufficientLevels { needed: 2, have: nest.levels.len() });
    }
    let c = nest.scaling_factors();
    let ln_inv_c: Vec<f64> = c.iter().map(|c| -ln_abs(c)).collect();
    let torrential_ratios = ln_inv_c.windows(2).map(|w| w[1].ln() / w[0]).collect();
    let decay_fit = (ln_inv_c.len() >= 2).then(|| {
        let pts: Vec<(f64, f64)> = ln_inv_c.iter().enumerate().map(|(n, l)| (n as f64, -l)).collect();
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let slope = sxy / sxx;
        let icept = my - slope * mx;
        let max_excess = pts.iter().map(|p| p.1 - (icept + slope * p.0)).fold(f64::NEG_INFINITY, f64::max);
        DecayFit { ln_c: icept, ln_lambda: slope, max_excess }
    });
    Ok(ScalingReport { c, ln_inv_c, torrential_ratios, decay_fit })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelStatistics {
    pub n: usize,
    pub c: Option<Float>,
    pub ln_inv_c: Option<f64>,
    pub s: Option<usize>,
    pub v: Option<usize>,
    pub tau: Option<i64>,
    /// d(R_n(0), ∂I_n ∪ {0})/|I_n|
    pub w: Option<Float>,
    pub central: Option<bool>,
    /// r_n(j_i) along d^{(n)}(0).
    pub landing_times: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalDiagnostics {
    /// (n, ln s_n / ln c_n^{-1})
    pub s_ratio: Vec<(usize, f64)>,
    /// (n, ln v_{n+1} / ln c_n^{-1})
    pub v_ratio: Vec<(usize, f64)>,
    /// (n, −ln w_n / ln n), n ≥ 2
    pub w_exponent: Vec<(usize, f64)>,
    /// (n, v_{n+1} = v_n + l_n(d^{(n)}(0)))
    pub additivity: Vec<(usize, bool)>,
    /// (n, k_{i+1} − k_i = r_n(j_i) for every return of 0 before I_{n+1})
    pub return_steps: Vec<(usize, bool)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NestStatistics {
    pub a: crate::Parameter,
    pub precision: u32,
    pub levels: Vec<LevelStatistics>,
    pub diagnostics: CriticalDiagnostics,
}

impl NestStatistics {
    /// Deepest n with both s_n and c_n known.
    pub fn deepest_s(&self) -> Option<&LevelStatistics> {
        self.levels.iter().rev().find(|l| l.s.is_some() && l.ln_inv_c.is_some())
    }
}

pub fn critical_statistics(nest: &PrincipalNest) -> Result<NestStatistics, StatsError> {
    if nest.levels.len() < 2 {
        return Err(StatsError::InsufficientLevels { needed: 2, have: nest.levels.len() });
    }
    let prec = nest.precision;
    let c = nest.scaling_factors();
    let mut levels = Vec::with_capacity(nest.levels.len());
    let mut diag = CriticalDiagnostics {
        s_ratio: Vec::new(),
        v_ratio: Vec::new(),
        w_exponent: Vec::new(),
        additivity: Vec::new(),
        return_steps: Vec::new(),
    };
    for (n, lvl) in nest.levels.iter().enumerate() {
        let cn = c.get(n).cloned();
        let ln_inv_c = cn.as_ref().map(|c| -ln_abs(c));
        let w = lvl.critical_value.as_ref().map(|x| {
            let xa = Float::with_val(prec, x.abs_ref());
            let to_edge = Float::with_val(prec, &lvl.half_width - &xa);
            let d = if xa < to_edge { xa } else { to_edge };
            d / lvl.length()
        });
        let landing_times = match nest.critical_address(n) {
            Ok(addr) => Some(addr.times),
            Err(NestError::LevelMissing(_)) => None,
            Err(e) => return Err(e.into()),
        };
        let s = nest.s(n);
        if let (Some(s), Some(l)) = (s, ln_inv_c) {
            if s > 0 {
                diag.s_ratio.push((n, (s as f64).ln() / l));
            }
        }
        let v_next = nest.levels.get(n + 1).and_then(|l| l.v);
        if let (Some(vn), Some(l)) = (v_next, ln_inv_c) {
            diag.v_ratio.push((n, (vn as f64).ln() / l));
        }
        if let (Some(w), true) = (&w, n >= 2) {
            diag.w_exponent.push((n, -ln_abs(w) / (n as f64).ln()));
        }
        if let (Some(vn), Some(vnext), Some(times)) = (lvl.v, v_next, &landing_times) {
            diag.additivity.push((n, vnext == vn + times.iter().sum::<usize>()));
            let mut ks = vec![vn];
            ks.extend_from_slice(&lvl.returns);
            let steps_ok = ks.len() == times.len() + 1 && ks.windows(2).zip(times).all(|(k, &r)| k[1] - k[0] == r);
            diag.return_steps.push((n, steps_ok));
        }
        levels.push(LevelStatistics {
            n,
            c: cn,
            ln_inv_c,
            s,
            v: lvl.v,
            tau: nest.tau(n).ok(),
            w,
            central: nest.is_central(n),
            landing_times,
        });
    }
    Ok(NestStatistics { a: nest.a.clone(), precision: prec, levels, diagnostics: diag })
}

/// VG/G flags for the profiled branches of level m, with n0 = m or m − 1.
/// λ_{n0} is the sampled minimum at level n0; the parent landing of a branch
/// is the landing address of R_{m−1} at its midpoint.
pub fn level_return_flags(
    nest: &PrincipalNest,
    m: usize,
    cfg: &ClassifierConfig,
    pcfg: &ProfileConfig,
) -> Result<(Vec<ReturnFlags>, InclusionReport), StatsError> {
    if m != cfg.n0 && m != cfg.n0 + 1 {
        return Err(StatsError::MissingData(format!("VG at level {m} needs VG at level {} first", m - 1)));
    }
    if m == 0 || m >= nest.levels.len() {
        return Err(StatsError::InsufficientLevels { needed: m + 1, have: nest.levels.len() });
    }
    let prof = hyperbolicity_profile(nest, m, pcfg)?;
    let lambda_n0 = if m == cfg.n0 { prof.lambda } else { hyperbolicity_profile(nest, cfg.n0, pcfg)?.lambda }
        .ok_or_else(|| StatsError::MissingData(format!("no branches sampled at level {}", cfg.n0)))?;
    let c = nest.scaling_factors();
    let bctx = BranchContext { level: m, ln_c_prev: ln_abs(&c[m - 1]), lambda_n0 };
    let lctx = (m >= 2).then(|| LandingContext { n: m - 1, ln_c: ln_abs(&c[m - 1]), ln_c_prev: ln_abs(&c[m - 2]) });
    let map = nest.map();
    let mut flags = Vec::with_capacity(prof.branches.len());
    for bp in &prof.branches {
        let parent_excellent = match (m > cfg.n0, lctx) {
            (false, _) => None,
            (true, None) => return Err(StatsError::MissingData("c_{−1} is undefined".into())),
            (true, Some(lctx)) => {
                let b = nest.branch_by_index(m, bp.index)?;
                let mid = Float::with_val(nest.precision, &b.lo + &b.hi) / 2u32;
                let y = map.iterate(&mid, nest.levels[m - 1].v.expect("inner level"));
                match nest.landing_address(m - 1, &y) {
                    Ok(d) => Some(classify_landing(&d.indices, &d.times, &lctx, cfg, |_| true)?.le),
                    Err(NestError::LandsOnBoundary(_) | NestError::NeverReturnsWithinBudget(_)) => continue,
                    Err(e) => return Err(e.into()),
                }
            }
        };
        let ev = BranchEvidence {
            index: bp.index,
            return_time: bp.return_time,
            ln_distance_ratio: bp.ln_distance_ratio,
            parent_excellent,
            lambda: bp.lambda_refined,
            truncated: bp.truncated.clone(),
        };
        flags.push(classify_return_branch(&ev, &bctx, cfg)?);
    }
    let incl = vg_within_g(&flags);
    Ok((flags, incl))
}

/// log2 of |C^d|/|I^d| for a landing domain pair.
pub fn log2_domain_ratio(addr: &crate::nest::LandingAddress) -> f64 {
    let p = addr.domain.0.prec().max(addr.enclosing.0.prec());
    let c = Float::with_val(p, &addr.domain.1 - &addr.domain.0);
    let i = Float::with_val(p, &addr.enclosing.1 - &addr.enclosing.0);
    log2_abs(&c) - log2_abs(&i)
}
