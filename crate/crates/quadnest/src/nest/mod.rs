//! The principal nest I_0 ⊃ I_1 ⊃ … of nice intervals around the critical point.

mod branch;
mod doc;
mod markov;
mod renorm;

pub use branch::{BranchTable, GapeReport, LandingAddress, ReturnBranch};
pub use doc::{LevelRecord, NestDocument};
pub use markov::{markov_partition, misiurewicz_parameter, misiurewicz_sample, MarkovPartition, Piece};
pub use renorm::{
    detect_renormalization, renormalization_tower, renormalize, RenormStatus, RenormalizedMap,
};

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, RwLock};

use rug::Float;
use thiserror::Error;

use crate::cycle::{detect_attracting_cycle, CycleBudget};
use crate::quad::{
    orientation_reversing_fixed_point, sign_of, ErrorTracker, QuadError, QuadraticMap, Sign,
};
use crate::real::{log2_abs, Parameter};

/// Bits by which an orbit decision must clear the running error bound.
pub(crate) const MARGIN_BITS: f64 = 8.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NestError {
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error("critical orbit attracted by a cycle of period {period} (multiplier {multiplier})")]
    RegularParameter { period: usize, multiplier: f64 },
    #[error("renormalizable with period {period}")]
    Renormalizable { period: usize, half_width: Float },
    #[error("persistent central returns suggest renormalization of period {period}")]
    RenormalizationSuspected { period: usize },
    #[error("budget of {0} steps exhausted")]
    BudgetExceeded(usize),
    #[error("precision ceiling of {0} bits reached")]
    PrecisionExhausted(u32),
    #[error("no return within {0} steps")]
    NeverReturnsWithinBudget(usize),
    #[error("orbit lands on the boundary of the level at step {0}")]
    LandsOnBoundary(usize),
    #[error("level {0} not built")]
    LevelMissing(usize),
    #[error("point outside I_{0}")]
    OutsideLevel(usize),
    #[error("itinerary has no preimage chain")]
    InadmissibleWord,
    #[error("map is not renormalizable")]
    NotRenormalizable,
    #[error("boundary not preperiodic within depth {0}")]
    PreperiodNotFoundWithinBudget(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NestBudgets {
    pub orbit_steps: usize,
    pub query_steps: usize,
    pub niceness_factor: usize,
    pub precision_start: u32,
    pub precision_max: u32,
    pub central_run: usize,
    pub cycle: CycleBudget,
}

impl Default for NestBudgets {
    fn default() -> Self {
        NestBudgets {
            orbit_steps: 30_000,
            query_steps: 50_000,
            niceness_factor: 10,
            precision_start: crate::quad::DEFAULT_PRECISION,
            precision_max: 1 << 16,
            central_run: 12,
            cycle: CycleBudget::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NestConfig {
    pub max_level: usize,
    pub budgets: NestBudgets,
    /// Skip the attracting-cycle check (renormalization detection wants the
    /// combinatorics even of regular maps).
    pub skip_regular_check: bool,
}

impl Default for NestConfig {
    fn default() -> Self {
        NestConfig { max_level: 8, budgets: NestBudgets::default(), skip_regular_check: false }
    }
}

impl NestConfig {
    pub fn with_max_level(max_level: usize) -> Self {
        NestConfig { max_level, ..Default::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StopReason {
    MaxLevel,
    OrbitBudget,
    PrecisionCeiling { step: usize },
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StopReason::MaxLevel => f.write_str("max-level"),
            StopReason::OrbitBudget => f.write_str("orbit-budget"),
            StopReason::PrecisionCeiling { step } => write!(f, "precision-ceiling@{step}"),
        }
    }
}

impl FromStr for StopReason {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "max-level" => Ok(StopReason::MaxLevel),
            "orbit-budget" => Ok(StopReason::OrbitBudget),
            _ => s
                .strip_prefix("precision-ceiling@")
                .and_then(|k| k.parse().ok())
                .map(|step| StopReason::PrecisionCeiling { step })
                .ok_or_else(|| format!("unknown stop reason {s:?}")),
        }
    }
}

/// Record certifying that ∂I_n never re-enters int I_n: the boundary orbit
/// reaches ∂I_{n−1} after v_{n−1} steps while staying outside I_{n−1}, and so
/// on down to the periodic boundary of I_0.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    /// Forward steps from ∂I_n until the periodic boundary of I_0.
    pub chain_steps: usize,
    /// min over the first segment of log2(|f^k(u_n)| − u_{n−1}).
    pub log2_margin: f64,
    pub verified: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Level {
    pub n: usize,
    /// u_n with I_n = [−u_n, u_n].
    pub half_width: Float,
    pub v: Option<usize>,
    /// Times k in (v_n, v_{n+1}] with f^k(0) ∈ I_n; up to the end of the run
    /// when v_{n+1} is unknown.
    pub returns: Vec<usize>,
    pub critical_value: Option<Float>,
    /// Half-width of the gape interval Ĩ_n (n ≥ 2).
    pub gape: Option<Float>,
    pub certificate: Certificate,
}

impl Level {
    pub fn length(&self) -> Float {
        Float::with_val(self.half_width.prec(), &self.half_width * 2u32)
    }
}

/// The starting interval I_0 = [−p, p].
#[derive(Clone, Debug, PartialEq)]
pub enum NestBase {
    FixedPoint,
    Renormalized(Box<RenormalizedMap>),
}

#[derive(Clone, Debug, Default)]
pub struct CriticalOrbit {
    /// sign of f^k(0); entry 0 is the critical point itself.
    pub signs: Vec<Sign>,
    pub approx: Vec<f64>,
    /// Σ_{j=1}^{k} ln|2 f^j(0)|.
    pub log_sums: Vec<f64>,
}

impl CriticalOrbit {
    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    /// Signs of f^k(0) for k in `range`.
    pub fn word(&self, range: std::ops::Range<usize>) -> &[Sign] {
        &self.signs[range]
    }

    /// a_k = ln|Df^k(f(0))| / k.
    pub fn ce_average(&self, k: usize) -> Option<f64> {
        if k == 0 || k >= self.log_sums.len() {
            return None;
        }
        Some(self.log_sums[k] / k as f64)
    }
}

pub struct PrincipalNest {
    pub a: Parameter,
    pub precision: u32,
    pub base: NestBase,
    pub levels: Vec<Level>,
    pub orbit: CriticalOrbit,
    pub stop: StopReason,
    pub budgets: NestBudgets,
    branches: Vec<RwLock<BranchTable>>,
    widths: Mutex<HashMap<u32, Arc<Vec<Float>>>>,
}

impl Clone for PrincipalNest {
    fn clone(&self) -> Self {
        PrincipalNest {
            a: self.a.clone(),
            precision: self.precision,
            base: self.base.clone(),
            levels: self.levels.clone(),
            orbit: self.orbit.clone(),
            stop: self.stop.clone(),
            budgets: self.budgets.clone(),
            branches: self
                .branches
                .iter()
                .map(|t| RwLock::new(t.read().expect("branch table").clone()))
                .collect(),
            widths: Mutex::new(self.widths.lock().expect("width cache").clone()),
        }
    }
}

impl fmt::Debug for PrincipalNest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PrincipalNest")
            .field("a", &self.a.to_string())
            .field("precision", &self.precision)
            .field("depth", &self.depth())
            .field("v", &self.v_sequence())
            .field("stop", &self.stop)
            .finish()
    }
}

/// Orientation-dependent target for the central pullback: the endpoint of
/// I_{n+1} maps to ε·u_n with ε the sign of −Df^{v−1}(f(0)).
fn central_target_sign(word_after_first: &[Sign]) -> Sign {
    // Df^{v-1} at f(0) has sign Π −sign(x_j) = (−1)^{#positive}
    let positives = word_after_first.iter().filter(|&&s| s > 0).count();
    if positives % 2 == 0 {
        -1
    } else {
        1
    }
}

/// Pull the symmetric interval [−u, u] back along the critical word of length
/// v (signs of f^1(0) … f^{v−1}(0)).  Returns the new half-width and the
/// chain f^k(w), k = 1..v−1, of its right endpoint w.
pub(crate) fn central_pullback(
    map: &QuadraticMap,
    word: &[Sign],
    u: &Float,
) -> Option<(Float, Vec<Float>)> {
    let eps = central_target_sign(word);
    let target = if eps > 0 { Float::with_val(map.precision(), u) } else { Float::with_val(map.precision(), -u) };
    let mut chain = vec![Float::new(map.precision()); word.len()];
    let y1 = map.pullback_visit(word, &target, |k, y| chain[k] = y.clone())?;
    let w = map.preimage(&y1, 1)?;
    Some((w, chain))
}

enum Pass {
    Done(StopReason),
    NeedsPrecision(usize),
}

struct PassState {
    levels: Vec<Level>,
    orbit: CriticalOrbit,
}

/// Build the principal nest of f_a starting from I_0 = [−p, p].
pub fn build_principal_nest(a: &Parameter, config: &NestConfig) -> Result<PrincipalNest, NestError> {
    QuadraticMap::new(a, 64)?;
    let p = orientation_reversing_fixed_point(a, 64);
    match p {
        Err(QuadError::NotDefined) => {
            if let Some(c) = detect_attracting_cycle(a.to_f64(), config.budgets.cycle) {
                return Err(NestError::RegularParameter { period: c.period, multiplier: c.multiplier });
            }
            return Err(QuadError::NotDefined.into());
        }
        Err(e) => return Err(e.into()),
        Ok(_) => {}
    }
    if !config.skip_regular_check {
        if let Some(c) = detect_attracting_cycle(a.to_f64(), config.budgets.cycle) {
            return Err(NestError::RegularParameter { period: c.period, multiplier: c.multiplier });
        }
    }
    build_from_base(a, NestBase::FixedPoint, config)
}

pub(crate) fn base_half_width(a: &Parameter, base: &NestBase, prec: u32) -> Result<Float, NestError> {
    match base {
        NestBase::FixedPoint => Ok(orientation_reversing_fixed_point(a, prec)?),
        NestBase::Renormalized(r) => r.p_kappa_at(prec),
    }
}

pub(crate) fn build_from_base(
    a: &Parameter,
    base: NestBase,
    config: &NestConfig,
) -> Result<PrincipalNest, NestError> {
    let budgets = &config.budgets;
    let mut prec = budgets.precision_start.max(64);
    loop {
        let map = QuadraticMap::new(a, prec)?;
        let u0 = base_half_width(a, &base, prec)?;
        let mut state = PassState {
            levels: vec![Level {
                n: 0,
                half_width: u0,
                v: None,
                returns: Vec::new(),
                critical_value: None,
                gape: None,
                certificate: Certificate { chain_steps: 0, log2_margin: f64::INFINITY, verified: true },
            }],
            orbit: CriticalOrbit::default(),
        };
        let outcome = run_pass(&map, config, &mut state)?;
        let stop = match outcome {
            Pass::Done(stop) => stop,
            Pass::NeedsPrecision(step) => {
                if prec * 2 <= budgets.precision_max {
                    prec *= 2;
                    continue;
                }
                StopReason::PrecisionCeiling { step }
            }
        };
        if state.levels.len() < 2 {
            return Err(match stop {
                StopReason::PrecisionCeiling { .. } => NestError::PrecisionExhausted(prec),
                _ => NestError::BudgetExceeded(budgets.orbit_steps),
            });
        }
        let levels = state.levels;
        let branches = (0..levels.len()).map(|_| RwLock::new(BranchTable::default())).collect();
        return Ok(PrincipalNest {
            a: a.clone(),
            precision: prec,
            base,
            levels,
            orbit: state.orbit,
            stop,
            budgets: budgets.clone(),
            branches,
            widths: Mutex::new(HashMap::new()),
        });
    }
}

fn run_pass(map: &QuadraticMap, config: &NestConfig, st: &mut PassState) -> Result<Pass, NestError> {
    let budgets = &config.budgets;
    let prec = map.precision();
    let log2_thr = map.log2_threshold();
    let mut x = map.zero();
    let mut tracker = ErrorTracker::new(prec);
    st.orbit.signs.push(0);
    st.orbit.approx.push(0.0);
    st.orbit.log_sums.push(0.0);
    let mut deepest = 0usize;
    let mut central_run = 0usize;
    let mut lx = f64::NEG_INFINITY;

    // decide |x| against u with certainty, or ask for more precision
    let decide = |x_abs: &Float, u: &Float, tracker: &ErrorTracker| -> Option<bool> {
        let d = Float::with_val(prec, x_abs - u);
        let ld = log2_abs(&d);
        if ld < log2_thr || !tracker.resolves(ld, MARGIN_BITS) {
            None
        } else {
            Some(d.is_sign_negative())
        }
    };

    for k in 1..=budgets.orbit_steps {
        map.step(&mut x);
        tracker.step(lx);
        lx = log2_abs(&x);
        if lx < log2_thr || !tracker.resolves(lx, MARGIN_BITS) {
            return Ok(Pass::NeedsPrecision(k));
        }
        let x_abs = Float::with_val(prec, x.abs_ref());
        let in_prev = if deepest >= 1 {
            match decide(&x_abs, &st.levels[deepest - 1].half_width, &tracker) {
                Some(b) => b,
                None => return Ok(Pass::NeedsPrecision(k)),
            }
        } else {
            false
        };
        let in_deepest = match decide(&x_abs, &st.levels[deepest].half_width, &tracker) {
            Some(b) => b,
            None => return Ok(Pass::NeedsPrecision(k)),
        };
        st.orbit.signs.push(sign_of(&x));
        st.orbit.approx.push(x.to_f64());
        let prev_sum = *st.orbit.log_sums.last().expect("seeded");
        st.orbit.log_sums.push(prev_sum + (lx + 1.0) * std::f64::consts::LN_2);
        if in_prev {
            st.levels[deepest - 1].returns.push(k);
        }
        if !in_deepest {
            continue;
        }
        loop {
            let lvl = deepest;
            st.levels[lvl].v = Some(k);
            st.levels[lvl].critical_value = Some(x.clone());
            if lvl >= config.max_level {
                return Ok(Pass::Done(StopReason::MaxLevel));
            }
            let word = &st.orbit.signs[1..k];
            let u = st.levels[lvl].half_width.clone();
            let Some((w, chain)) = central_pullback(map, word, &u) else {
                return Ok(Pass::NeedsPrecision(k));
            };
            // a − f(w) = w², so the collapse test is on w² against the threshold
            let lw = log2_abs(&w);
            if 2.0 * lw < log2_thr {
                return Ok(Pass::NeedsPrecision(k));
            }
            let gap = Float::with_val(prec, &u - &w);
            if log2_abs(&gap) < log2_thr {
                return Err(NestError::Renormalizable { period: k, half_width: u });
            }
            // chain points may sit on ∂I_n (the boundary is eventually fixed)
            // but never inside
            let mut margin = f64::INFINITY;
            let mut verified = true;
            for y in &chain {
                let d = Float::with_val(prec, y.abs_ref()) - &u;
                let ld = log2_abs(&d);
                if d.is_sign_negative() && ld > log2_thr {
                    verified = false;
                }
                margin = margin.min(if d.is_sign_negative() { f64::NEG_INFINITY } else { ld });
            }
            let gape = if lvl >= 1 {
                central_pullback(map, word, &st.levels[lvl - 1].half_width).map(|(g, _)| g)
            } else {
                None
            };
            let chain_steps = k + st.levels[lvl].certificate.chain_steps;
            st.levels.push(Level {
                n: lvl + 1,
                half_width: w,
                v: None,
                returns: Vec::new(),
                critical_value: None,
                gape,
                certificate: Certificate { chain_steps, log2_margin: margin, verified },
            });
            deepest = lvl + 1;
            let central = match decide(&x_abs, &st.levels[deepest].half_width, &tracker) {
                Some(b) => b,
                None => return Ok(Pass::NeedsPrecision(k)),
            };
            if !central {
                central_run = 0;
                break;
            }
            central_run += 1;
            if central_run >= budgets.central_run {
                let word = st.orbit.signs[1..k].to_vec();
                return Err(renorm::confirm_after_central_run(map, &word, &x, &st.levels[deepest].half_width));
            }
        }
    }
    Ok(Pass::Done(StopReason::OrbitBudget))
}

impl PrincipalNest {
    /// Number of intervals beyond I_0.
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn map(&self) -> QuadraticMap {
        QuadraticMap::new(&self.a, self.precision).expect("validated parameter")
    }

    pub fn level(&self, n: usize) -> Result<&Level, NestError> {
        self.levels.get(n).ok_or(NestError::LevelMissing(n))
    }

    pub fn v_sequence(&self) -> Vec<usize> {
        self.levels.iter().filter_map(|l| l.v).collect()
    }

    /// c_n = |I_{n+1}|/|I_n| for every n with I_{n+1} built.
    pub fn scaling_factors(&self) -> Vec<Float> {
        self.levels
            .windows(2)
            .map(|w| Float::with_val(self.precision, &w[1].half_width / &w[0].half_width))
            .collect()
    }

    /// s_n, known once v_{n+1} is.
    pub fn s(&self, n: usize) -> Option<usize> {
        let next = self.levels.get(n + 1)?;
        next.v?;
        Some(self.levels[n].returns.len())
    }

    pub fn is_central(&self, n: usize) -> Option<bool> {
        let vn = self.levels.get(n)?.v?;
        let vnext = self.levels.get(n + 1)?.v;
        match vnext {
            Some(w) => Some(w == vn),
            None => {
                if self.levels[n].returns.is_empty() {
                    None
                } else {
                    Some(false)
                }
            }
        }
    }

    /// The critical word of length m: signs of f^1(0) … f^{m−1}(0).
    pub fn critical_word(&self, m: usize) -> &[Sign] {
        &self.orbit.signs[1..m]
    }

    /// Half-widths u_0 … u_D recomputed at another precision.
    pub fn half_widths_at(&self, prec: u32) -> Result<Arc<Vec<Float>>, NestError> {
        if prec == self.precision {
            return Ok(Arc::new(self.levels.iter().map(|l| l.half_width.clone()).collect()));
        }
        if let Some(w) = self.widths.lock().expect("width cache").get(&prec) {
            return Ok(w.clone());
        }
        let map = QuadraticMap::new(&self.a, prec)?;
        let mut out = vec![base_half_width(&self.a, &self.base, prec)?];
        for lvl in &self.levels[..self.levels.len() - 1] {
            let v = lvl.v.expect("inner levels have v");
            let (w, _) = central_pullback(&map, self.critical_word(v), out.last().expect("seeded"))
                .ok_or(NestError::InadmissibleWord)?;
            out.push(w);
        }
        let out = Arc::new(out);
        self.widths.lock().expect("width cache").insert(prec, out.clone());
        Ok(out)
    }

    pub(crate) fn table(&self, n: usize) -> &RwLock<BranchTable> {
        &self.branches[n]
    }

    /// Independent forward check of niceness: iterate ∂I_n, snapping onto
    /// ±u_{m−1} each time the orbit reaches the boundary of the next level
    /// down, until it lands on the fixed point p or `budget` steps pass.
    /// Returns the number of steps certified.
    pub fn verify_niceness(&self, n: usize, budget: usize) -> Result<usize, NestError> {
        let lvl = self.level(n)?;
        let map = self.map();
        let prec = self.precision;
        let u = &lvl.half_width;
        let mut y = Float::with_val(prec, u);
        let mut m = n;
        let mut since = 0usize;
        let mut tracker = ErrorTracker::new(prec);
        for step in 1..=budget {
            tracker.step(log2_abs(&y));
            map.step(&mut y);
            since += 1;
            let ya = Float::with_val(prec, y.abs_ref());
            let d = Float::with_val(prec, &ya - u);
            if !tracker.resolves(log2_abs(&d), MARGIN_BITS) {
                return Ok(step - 1);
            }
            if d.is_sign_negative() {
                return Err(NestError::LandsOnBoundary(step));
            }
            if m == 0 {
                continue;
            }
            if since == self.levels[m - 1].v.expect("inner level") {
                let target = &self.levels[m - 1].half_width;
                let miss = Float::with_val(prec, &ya - target);
                if log2_abs(&miss) > tracker.log2_err() + MARGIN_BITS {
                    return Ok(step);
                }
                m -= 1;
                if m == 0 && matches!(self.base, NestBase::FixedPoint) {
                    // f(±p) = p
                    return Ok(budget);
                }
                y = if y.is_sign_negative() { Float::with_val(prec, -target) } else { target.clone() };
                tracker = ErrorTracker::new(prec);
                since = 0;
            }
        }
        Ok(budget)
    }

    /// Default niceness budget: niceness_factor · v_n forward steps.
    pub fn niceness_budget(&self, n: usize) -> usize {
        let v = self.levels.get(n).and_then(|l| l.v).unwrap_or(1);
        self.budgets.niceness_factor * v.max(1)
    }
}
