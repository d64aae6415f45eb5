//! Landing predicates LS/LE/LC and return predicates VG/G, clause by clause.
//!
//! Scaling factors enter as ln c so that torrentially small values stay
//! representable; powers c^e are formed as exp(e ln c).

use std::fmt;

use super::StatsError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassifierConfig {
    pub epsilon: f64,
    pub n0: usize,
    /// Sparsity constants are sparsity · 2^n.
    pub sparsity: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig { epsilon: 0.05, n0: 1, sparsity: 6.0 }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<(), StatsError> {
        if self.epsilon > 0.0 && self.sparsity > 0.0 {
            Ok(())
        } else {
            Err(StatsError::MissingData(format!("ε = {} and sparsity = {} must be positive", self.epsilon, self.sparsity)))
        }
    }

    fn sparsity_at(&self, n: usize) -> f64 {
        self.sparsity * 2f64.powi(n as i32)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Clause {
    LS1,
    LS2,
    LS3,
    LS4,
    LE,
    LC1,
    LC2,
    LC3,
    LC4,
    LC5,
    VG,
    G1,
    G2,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Level data for landings at level n.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LandingContext {
    pub n: usize,
    /// ln c_n
    pub ln_c: f64,
    /// ln c_{n−1}
    pub ln_c_prev: f64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LandingFlags {
    pub ls: bool,
    pub le: bool,
    pub lc: bool,
    pub violated: Vec<Clause>,
}

/// c^e from ln c.
fn pw(ln_c: f64, e: f64) -> f64 {
    (e * ln_c).exp()
}

fn check_ln(ln: f64, what: &str) -> Result<(), StatsError> {
    if ln.is_finite() && ln < 0.0 {
        Ok(())
    } else {
        Err(StatsError::MissingData(format!("{what} must lie in (0, 1), got ln = {ln}")))
    }
}

/// For every k in the range with k ≤ m, #{i ≤ k : bad_i} < rate · k.
fn sparse_from(bad: &[bool], from: f64, strict_from: bool, rate: f64) -> bool {
    let mut count = 0usize;
    for (i, &b) in bad.iter().enumerate() {
        count += b as usize;
        let k = (i + 1) as f64;
        let in_range = if strict_from { k > from } else { k >= from };
        if in_range && count as f64 >= rate * k {
            return false;
        }
    }
    true
}

/// All of the first ⌊bound⌋ entries (within m) are good.
fn prefix_good(bad: &[bool], bound: f64) -> bool {
    bad.iter().enumerate().all(|(i, &b)| (i + 1) as f64 > bound || !b)
}

/// Evaluate LS1–LS4, LE and LC1–LC5 on d = (j_1, …, j_m) with times
/// r_n(j_i).  `vg` answers j ∈ VG(n0, n); at n = n0 every j ≠ 0 is very good.
pub fn classify_landing(
    indices: &[i64],
    times: &[usize],
    ctx: &LandingContext,
    cfg: &ClassifierConfig,
    vg: impl Fn(i64) -> bool,
) -> Result<LandingFlags, StatsError> {
    cfg.validate()?;
    if indices.len() != times.len() {
        return Err(StatsError::MissingData(format!("{} indices but {} times", indices.len(), times.len())));
    }
    if indices.contains(&0) {
        return Err(StatsError::MissingData("landing address through the central branch".into()));
    }
    if ctx.n < cfg.n0 {
        return Err(StatsError::MissingData(format!("excellent landings need n ≥ n0 = {}", cfg.n0)));
    }
    check_ln(ctx.ln_c, "c_n")?;
    check_ln(ctx.ln_c_prev, "c_{n−1}")?;
    let (n, eps, lc, lp) = (ctx.n, cfg.epsilon, ctx.ln_c, ctx.ln_c_prev);
    let m = indices.len() as f64;
    let k6 = cfg.sparsity_at(n);
    let r: Vec<f64> = times.iter().map(|&t| t as f64).collect();
    let short: Vec<bool> = r.iter().map(|&t| t < pw(lp, -1.0 + 2.0 * eps)).collect();
    let large: Vec<bool> = r.iter().map(|&t| t > pw(lp, -1.0 - 2.0 * eps)).collect();
    let not_vg: Vec<bool> = indices.iter().map(|&j| n > cfg.n0 && !vg(j)).collect();

    let mut violated = Vec::new();
    let mut clause = |c: Clause, ok: bool| {
        if !ok {
            violated.push(c);
        }
        ok
    };
    let ls1 = clause(Clause::LS1, pw(lc, -0.5) < m && m < pw(lc, -1.0 - 2.0 * eps));
    let ls2 = clause(Clause::LS2, r.iter().all(|&t| t < pw(lp, -14.0)));
    let ls3 = clause(Clause::LS3, sparse_from(&short, pw(lp, -2.0), false, k6 * pw(lp, eps / 10.0)));
    let ls4 = clause(
        Clause::LS4,
        sparse_from(&large, pw(lc, -1.0 / n as f64), false, k6 * (-pw(lp, eps / 5.0)).exp()),
    );
    let le_clause = clause(Clause::LE, sparse_from(&not_vg, pw(lp, -2.0), true, k6 * pw(lp, 1.0 / 20.0)));
    let lc1 = clause(Clause::LC1, prefix_good(&not_vg, pw(lp, -1.0 / 30.0)));
    let lc2 = clause(Clause::LC2, sparse_from(&short, pw(lp, -eps / 5.0), false, k6 * pw(lp, eps / 10.0)));
    let lc3 = clause(Clause::LC3, sparse_from(&not_vg, pw(lp, -1.0 / 30.0), false, k6 * pw(lp, 1.0 / 60.0)));
    let lc4 = clause(Clause::LC4, sparse_from(&large, pw(lp, -200.0), false, k6 * pw(lp, 100.0)));
    let lc5 = clause(Clause::LC5, prefix_good(&large, (pw(lp, -eps / 5.0) / 2.0).exp()));

    let ls = ls1 && ls2 && ls3 && ls4;
    let le = ls && le_clause;
    let lc = le && lc1 && lc2 && lc3 && lc4 && lc5;
    Ok(LandingFlags { ls, le, lc, violated })
}

/// Level data for return branches of level m.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchContext {
    pub level: usize,
    /// ln c_{m−1}
    pub ln_c_prev: f64,
    /// λ_{n0}
    pub lambda_n0: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BranchEvidence {
    pub index: i64,
    pub return_time: usize,
    /// ln(d(I^j_m, 0)/|I_m|)
    pub ln_distance_ratio: f64,
    /// Whether R_{m−1}(I^j_m) = C^d_{m−1} with d excellent; unused at m = n0.
    pub parent_excellent: Option<bool>,
    /// λ_m(j)
    pub lambda: f64,
    /// k = 1..=r: inf over I^j_m of ln|Df^k|/k.
    pub truncated: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReturnFlags {
    pub index: i64,
    /// The central branch is excluded from both classes.
    pub excluded: bool,
    pub vg: bool,
    pub g: bool,
    pub violated: Vec<Clause>,
}

pub fn classify_return_branch(
    ev: &BranchEvidence,
    ctx: &BranchContext,
    cfg: &ClassifierConfig,
) -> Result<ReturnFlags, StatsError> {
    cfg.validate()?;
    if ev.index == 0 {
        return Ok(ReturnFlags { index: 0, excluded: true, vg: false, g: false, violated: Vec::new() });
    }
    if ctx.level < cfg.n0 {
        return Err(StatsError::MissingData(format!("return classes need m ≥ n0 = {}", cfg.n0)));
    }
    check_ln(ctx.ln_c_prev, "c_{m−1}")?;
    if ev.truncated.len() != ev.return_time {
        return Err(StatsError::MissingData(format!(
            "{} truncated values for return time {}",
            ev.truncated.len(),
            ev.return_time
        )));
    }
    let (m, n0, lp) = (ctx.level as f64, cfg.n0 as f64, ctx.ln_c_prev);
    let mut violated = Vec::new();
    let vg = if ctx.level == cfg.n0 {
        true
    } else {
        let parent = ev.parent_excellent.ok_or_else(|| StatsError::MissingData("parent landing class".into()))?;
        let far = ev.ln_distance_ratio > lp / 3.0;
        if !far {
            violated.push(Clause::VG);
        }
        if !parent {
            violated.push(Clause::LE);
        }
        parent && far
    };
    let g1 = ev.lambda >= ctx.lambda_n0 * (1.0 + (n0 - m).exp2()) / 2.0;
    if !g1 {
        violated.push(Clause::G1);
    }
    let from = pw(lp, -3.0 / (m - 1.0));
    let floor = ctx.lambda_n0 * (1.0 + (n0 - m + 0.5).exp2()) / 2.0 - pw(lp, 2.0 / (m - 1.0));
    let g2 = ev.truncated.iter().enumerate().all(|(i, &t)| ((i + 1) as f64) < from || t >= floor);
    if !g2 {
        violated.push(Clause::G2);
    }
    Ok(ReturnFlags { index: ev.index, excluded: false, vg, g: g1 && g2, violated })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InclusionReport {
    pub vg: usize,
    pub g: usize,
    /// Very good branches that are not good.
    pub discrepancies: Vec<i64>,
}

impl InclusionReport {
    pub fn holds(&self) -> bool {
        self.discrepancies.is_empty()
    }
}

/// The empirical inclusion VG ⊆ G on classified branches.
pub fn vg_within_g(flags: &[ReturnFlags]) -> InclusionReport {
    InclusionReport {
        vg: flags.iter().filter(|f| f.vg).count(),
        g: flags.iter().filter(|f| f.g).count(),
        discrepancies: flags.iter().filter(|f| f.vg && !f.g).map(|f| f.index).collect(),
    }
}
