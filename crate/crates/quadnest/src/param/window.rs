//! Parapuzzle windows located by bisection on combinatorics.

use std::fmt;

use rug::{Float, Rational};

use super::ParamError;
use crate::nest::{build_principal_nest, NestConfig, PrincipalNest};
use crate::quad::Sign;
use crate::real::Parameter;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WindowKind {
    /// J_i: the nest persists through I_{i+1}.
    Level,
    /// J^j_i: R_i(0) stays in one return branch.
    Branch,
    /// Ξ_i(C^d_i): R_i(0) stays in one landing domain.
    Landing,
}

/// Combinatorial position of the critical value at level i, in terms of
/// return words (branch indices are only meaningful inside one nest).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Combinatorics {
    Level,
    Branch(Vec<Sign>),
    Landing(Vec<Vec<Sign>>),
}

fn word_text(w: &[Sign]) -> String {
    w.iter().map(|&s| match s.signum() { 1 => '+', -1 => '-', _ => '0' }).collect()
}

impl fmt::Display for Combinatorics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Combinatorics::Level => f.write_str("level"),
            Combinatorics::Branch(w) => write!(f, "branch {}", word_text(w)),
            Combinatorics::Landing(ws) if ws.is_empty() => f.write_str("landing central"),
            Combinatorics::Landing(ws) => {
                write!(f, "landing {}", ws.iter().map(|w| word_text(w)).collect::<Vec<_>>().join("|"))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowConfig {
    /// Endpoint tolerance is 2^{−precision/2}.
    pub precision: u32,
    /// First outward step 2^{initial_step_log2}, doubled until outside.
    pub initial_step_log2: i32,
    pub max_probes: usize,
    /// Equispaced interior probes re-checked after the endpoints are found.
    pub interior_checks: usize,
    /// Budgets for the probe nests (max_level is set per call).
    pub nest: NestConfig,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig {
            precision: 128,
            initial_step_log2: -40,
            max_probes: 5000,
            interior_checks: 16,
            nest: NestConfig { skip_regular_check: true, ..NestConfig::default() },
        }
    }
}

impl WindowConfig {
    pub fn tolerance(&self) -> Rational {
        Rational::from((1, 1)) >> (self.precision / 2)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParameterWindow {
    pub level: usize,
    pub combinatorics: Combinatorics,
    /// Branch index j or landing address d in the nest at the seed.
    pub indices: Vec<i64>,
    /// Innermost probes with the target combinatorics.
    pub lo: Parameter,
    pub hi: Parameter,
    /// Nearest probes without it; None where the search reached the end of
    /// the parameter range.
    pub lo_out: Option<Parameter>,
    pub hi_out: Option<Parameter>,
    /// Interior probes that failed the membership test.
    pub anomalies: Vec<Parameter>,
    pub certified: bool,
    pub probes: usize,
}

impl ParameterWindow {
    pub fn contains_window(&self, other: &ParameterWindow) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn center(&self) -> Parameter {
        self.lo.midpoint(&self.hi)
    }

    pub fn width(&self) -> Rational {
        self.hi.distance(&self.lo)
    }

    pub fn to_text(&self) -> String {
        let opt = |p: &Option<Parameter>| p.as_ref().map_or("-".to_string(), |p| p.to_string());
        format!(
            "level = {}\ncombinatorics = {}\nindices = {}\nlo = {}\nhi = {}\nlo_out = {}\nhi_out = {}\ncertified = {}\nanomalies = {}\nprobes = {}\n",
            self.level,
            self.combinatorics,
            self.indices.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(","),
            self.lo,
            self.hi,
            opt(&self.lo_out),
            opt(&self.hi_out),
            self.certified,
            self.anomalies.len(),
            self.probes,
        )
    }
}

fn probe_nest(g: &Parameter, level: usize, cfg: &WindowConfig) -> Option<PrincipalNest> {
    let nc = NestConfig { max_level: level, skip_regular_check: true, ..cfg.nest.clone() };
    let nest = build_principal_nest(g, &nc).ok()?;
    (nest.depth() >= level && nest.levels[level].v.is_some()).then_some(nest)
}

/// v_0 … v_i and the critical word up to v_i.
fn signature(nest: &PrincipalNest, level: usize) -> (Vec<usize>, Vec<Sign>) {
    let v: Vec<usize> = nest.levels[..=level].iter().filter_map(|l| l.v).collect();
    let word = nest.critical_word(v[level]).to_vec();
    (v, word)
}

/// The combinatorics of R_i(0) in `nest`, with the matching indices.
pub fn critical_combinatorics(
    nest: &PrincipalNest,
    level: usize,
    kind: WindowKind,
) -> Result<(Combinatorics, Vec<i64>), ParamError> {
    let cv = nest.level(level)?.critical_value.clone().ok_or(crate::nest::NestError::LevelMissing(level))?;
    Ok(match kind {
        WindowKind::Level => (Combinatorics::Level, Vec::new()),
        WindowKind::Branch => {
            let b = nest.return_branch_at(level, &cv)?;
            (Combinatorics::Branch(b.word), vec![b.index])
        }
        WindowKind::Landing => {
            let d = nest.landing_address(level, &cv)?;
            let words = d
                .indices
                .iter()
                .map(|&j| nest.branch_by_index(level, j).map(|b| b.word))
                .collect::<Result<Vec<_>, _>>()?;
            (Combinatorics::Landing(words), d.indices)
        }
    })
}

fn kind_of(c: &Combinatorics) -> WindowKind {
    match c {
        Combinatorics::Level => WindowKind::Level,
        Combinatorics::Branch(_) => WindowKind::Branch,
        Combinatorics::Landing(_) => WindowKind::Landing,
    }
}

struct Target<'a> {
    level: usize,
    signature: (Vec<usize>, Vec<Sign>),
    comb: &'a Combinatorics,
    cfg: &'a WindowConfig,
}

impl Target<'_> {
    fn contains(&self, g: &Parameter) -> bool {
        if *g < Parameter::ratio(-1, 4) || *g > Parameter::ratio(2, 1) {
            return false;
        }
        let Some(nest) = probe_nest(g, self.level, self.cfg) else { return false };
        if signature(&nest, self.level) != self.signature {
            return false;
        }
        match critical_combinatorics(&nest, self.level, kind_of(self.comb)) {
            Ok((c, _)) => c == *self.comb,
            Err(_) => false,
        }
    }
}

struct Counter {
    used: usize,
    max: usize,
}

impl Counter {
    fn tick(&mut self) -> Result<(), ParamError> {
        self.used += 1;
        if self.used > self.max {
            return Err(ParamError::BudgetExceeded(self.max));
        }
        Ok(())
    }
}

/// Walk from a0 in direction `dir` until the target is lost, then bisect.
fn edge(
    a0: &Parameter,
    dir: i32,
    target: &Target<'_>,
    counter: &mut Counter,
) -> Result<(Parameter, Option<Parameter>), ParamError> {
    let cfg = target.cfg;
    let bound = if dir > 0 { Parameter::ratio(2, 1) } else { Parameter::ratio(-1, 4) };
    let mut step = Rational::from((1, 1));
    if cfg.initial_step_log2 >= 0 {
        step <<= cfg.initial_step_log2 as u32;
    } else {
        step >>= cfg.initial_step_log2.unsigned_abs();
    }
    let mut inside = a0.clone();
    let outside = loop {
        counter.tick()?;
        let mut g = a0.offset(&Rational::from(&step * dir));
        let past = if dir > 0 { g >= bound } else { g <= bound };
        if past {
            g = bound.clone();
        }
        if target.contains(&g) {
            if past {
                return Ok((g, None));
            }
            inside = g;
            step <<= 1u32;
        } else {
            break g;
        }
    };
    let tol = cfg.tolerance();
    let mut out = outside;
    while out.distance(&inside) > tol {
        counter.tick()?;
        let mid = inside.midpoint(&out);
        if target.contains(&mid) {
            inside = mid;
        } else {
            out = mid;
        }
    }
    Ok((inside, Some(out)))
}

/// Locate the window around a0 on which `comb` persists at `level`.
pub fn locate_window(
    a0: &Parameter,
    level: usize,
    comb: &Combinatorics,
    cfg: &WindowConfig,
) -> Result<ParameterWindow, ParamError> {
    let nest = probe_nest(a0, level, cfg)
        .ok_or_else(|| ParamError::CombinatoricsUnstable(format!("nest at {a0} does not reach level {level}")))?;
    let (here, indices) = critical_combinatorics(&nest, level, kind_of(comb))?;
    if here != *comb {
        return Err(ParamError::CombinatoricsUnstable(format!("{comb} not realized at {a0} (found {here})")));
    }
    let target = Target { level, signature: signature(&nest, level), comb, cfg };
    let mut counter = Counter { used: 0, max: cfg.max_probes };
    let (lo, lo_out) = edge(a0, -1, &target, &mut counter)?;
    let (hi, hi_out) = edge(a0, 1, &target, &mut counter)?;
    let mut anomalies = Vec::new();
    let width = hi.distance(&lo);
    for t in 1..cfg.interior_checks {
        let g = lo.offset(&Rational::from(&width * Rational::from((t as i64, cfg.interior_checks as i64))));
        if !target.contains(&g) {
            anomalies.push(g);
        }
    }
    let certified = anomalies.is_empty() && lo_out.is_some() && hi_out.is_some();
    Ok(ParameterWindow {
        level,
        combinatorics: comb.clone(),
        indices,
        lo,
        hi,
        lo_out,
        hi_out,
        anomalies,
        certified,
        probes: counter.used + cfg.interior_checks.saturating_sub(1),
    })
}

/// Branch windows J^j_i found by a grid over J_i, in parameter order.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowFamily {
    pub level: usize,
    pub outer: ParameterWindow,
    pub windows: Vec<ParameterWindow>,
    /// Grid probes whose branch word had already appeared in an earlier run.
    pub recurring: Vec<Parameter>,
}

impl WindowFamily {
    /// Consecutive windows are disjoint.
    pub fn pairwise_disjoint(&self) -> bool {
        self.windows.windows(2).all(|w| w[0].hi < w[1].lo)
    }

    /// Positions of the branches in the nest of `nest` follow the parameter
    /// order of their windows (one direction throughout).
    pub fn phase_order_consistent(&self, nest: &PrincipalNest) -> Result<bool, ParamError> {
        let pos = branch_positions(nest, self)?;
        let up = pos.windows(2).all(|w| w[0] < w[1]);
        let down = pos.windows(2).all(|w| w[0] > w[1]);
        Ok(up || down)
    }
}

fn branch_positions(nest: &PrincipalNest, fam: &WindowFamily) -> Result<Vec<Float>, ParamError> {
    fam.windows
        .iter()
        .map(|w| match &w.combinatorics {
            Combinatorics::Branch(word) => {
                let b = nest.branch_with_word(fam.level, word)?;
                Ok(Float::with_val(nest.precision, &b.lo + &b.hi) / 2u32)
            }
            c => Err(ParamError::CombinatoricsUnstable(format!("{c} is not a branch"))),
        })
        .collect()
}

pub fn branch_windows(
    a0: &Parameter,
    level: usize,
    grid: usize,
    cfg: &WindowConfig,
) -> Result<WindowFamily, ParamError> {
    let outer = locate_window(a0, level, &Combinatorics::Level, cfg)?;
    let width = outer.width();
    let mut runs: Vec<(Combinatorics, Parameter)> = Vec::new();
    let mut recurring = Vec::new();
    for k in 0..grid {
        let t = Rational::from((2 * k as i64 + 1, 2 * grid as i64));
        let g = outer.lo.offset(&Rational::from(&width * t));
        let Some(nest) = probe_nest(&g, level, cfg) else { continue };
        let Ok((comb, _)) = critical_combinatorics(&nest, level, WindowKind::Branch) else { continue };
        if runs.last().is_some_and(|r| r.0 == comb) {
            continue;
        }
        if runs.iter().any(|r| r.0 == comb) {
            recurring.push(g);
            continue;
        }
        runs.push((comb, g));
    }
    let mut windows = Vec::with_capacity(runs.len());
    for (comb, seed) in &runs {
        windows.push(locate_window(seed, level, comb, cfg)?);
    }
    windows.sort_by(|a, b| a.lo.cmp(&b.lo));
    Ok(WindowFamily { level, outer, windows, recurring })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioRow {
    /// Index of the middle window.
    pub k: usize,
    pub phase: f64,
    pub parameter: f64,
    /// |ln(parameter/phase)|
    pub ln_distortion: f64,
}

/// Gap ratios (x_{k+1} − x_k)/(x_k − x_{k−1}) on both sides.
pub fn ratio_rows(phase: &[f64], parameter: &[f64]) -> Vec<RatioRow> {
    let ratio = |x: &[f64], k: usize| (x[k + 1] - x[k]) / (x[k] - x[k - 1]);
    (1..phase.len().min(parameter.len()).saturating_sub(1))
        .map(|k| {
            let (p, q) = (ratio(phase, k), ratio(parameter, k));
            RatioRow { k, phase: p, parameter: q, ln_distortion: (q / p).ln().abs() }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseParameterReport {
    pub level: usize,
    pub rows: Vec<RatioRow>,
    /// max ln distortion over the rows.
    pub band: f64,
}

/// Compare gap ratios of branch centers at a0 with those of window centers.
pub fn phase_parameter_report(nest: &PrincipalNest, family: &WindowFamily) -> Result<PhaseParameterReport, ParamError> {
    let have = family.windows.len();
    if have < 3 {
        return Err(ParamError::InsufficientWindows { needed: 3, have });
    }
    let pos = branch_positions(nest, family)?;
    let u = &nest.level(family.level)?.half_width;
    let phase: Vec<f64> = pos.iter().map(|x| Float::with_val(nest.precision, x / u).to_f64()).collect();
    let origin = family.outer.lo.as_rational();
    let parameter: Vec<f64> =
        family.windows.iter().map(|w| Rational::from(w.center().as_rational() - origin).to_f64()).collect();
    let rows = ratio_rows(&phase, &parameter);
    let band = rows.iter().map(|r| r.ln_distortion).fold(0.0, f64::max);
    Ok(PhaseParameterReport { level: family.level, rows, band })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_ratios() {
        let x = [0.0, 0.1, 0.35, 0.4, 0.9];
        let rows = ratio_rows(&x, &x);
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.ln_distortion == 0.0));
    }

    #[test]
    fn level_window_contains_branch_window() {
        let a: Parameter = "1.7".parse().unwrap();
        let cfg = WindowConfig { precision: 80, ..WindowConfig::default() };
        let nest = probe_nest(&a, 1, &cfg).unwrap();
        let (tau, _) = critical_combinatorics(&nest, 1, WindowKind::Branch).unwrap();
        let outer = locate_window(&a, 1, &Combinatorics::Level, &cfg).unwrap();
        let inner = locate_window(&a, 1, &tau, &cfg).unwrap();
        assert!(outer.certified && inner.certified);
        assert!(outer.contains_window(&inner));
        assert!(inner.lo <= a && a <= inner.hi);
        assert!(inner.hi.distance(&inner.hi_out.clone().unwrap()) <= cfg.tolerance());
    }

    #[test]
    fn unrealized_target_is_rejected() {
        let a: Parameter = "1.7".parse().unwrap();
        let r = locate_window(&a, 1, &Combinatorics::Branch(vec![1, 1, 1]), &WindowConfig::default());
        assert!(matches!(r, Err(ParamError::CombinatoricsUnstable(_))));
    }
}
