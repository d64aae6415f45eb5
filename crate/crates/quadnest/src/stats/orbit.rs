//! Collet-Eckmann and recurrence estimators along the critical orbit.
//!
//! Long series run on the double-precision shadow of the critical orbit; the
//! values at nest times e_n come from the certified high-precision orbit.

use crate::cycle::{detect_attracting_cycle, CycleBudget};
use crate::nest::PrincipalNest;
use crate::real::Parameter;

use super::StatsError;

pub const GAMMA_GRID: [f64; 4] = [0.8, 1.0, 1.2, 1.5];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CeConfig {
    /// Running minimum of a_k is taken over k ≥ k0.
    pub k0: usize,
    pub cap: usize,
    pub cycle: CycleBudget,
}

impl Default for CeConfig {
    fn default() -> Self {
        CeConfig { k0: 1000, cap: 100_000_000, cycle: CycleBudget::default() }
    }
}

/// (k, a_k) with a_k = ln|Df^k(f(0))|/k, from the double-precision orbit.
#[derive(Clone, Debug)]
pub struct CeStream {
    a: f64,
    x: f64,
    k: usize,
    sum: f64,
}

impl CeStream {
    pub fn new(a: f64) -> Self {
        CeStream { a, x: 0.0, k: 0, sum: 0.0 }
    }

    /// The current orbit point f^k(0).
    pub fn point(&self) -> f64 {
        self.x
    }
}

impl Iterator for CeStream {
    type Item = (usize, f64);

    fn next(&mut self) -> Option<(usize, f64)> {
        self.x = self.a - self.x * self.x;
        self.k += 1;
        self.sum += (2.0 * self.x).abs().ln();
        Some((self.k, self.sum / self.k as f64))
    }
}

fn check_regular(a: &Parameter, budget: CycleBudget) -> Result<(), StatsError> {
    match detect_attracting_cycle(a.to_f64(), budget) {
        Some(c) => Err(StatsError::RegularParameter { period: c.period, multiplier: c.multiplier }),
        None => Ok(()),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CeReport {
    pub steps: usize,
    pub k0: usize,
    pub last: f64,
    /// min over k0 ≤ k ≤ N of a_k, with the k attaining it.
    pub liminf_estimate: f64,
    pub argmin: usize,
    /// (n, v_n, e_n = a_{v_n − 1}) from the certified orbit of the nest.
    pub nest_times: Vec<(usize, usize, f64)>,
}

/// Stream a_1 … a_N into `sink` and summarize.
pub fn ce_estimator(
    a: &Parameter,
    steps: usize,
    cfg: &CeConfig,
    nest: Option<&PrincipalNest>,
    mut sink: impl FnMut(usize, f64),
) -> Result<CeReport, StatsError> {
    if steps > cfg.cap {
        return Err(StatsError::BudgetExceeded(steps));
    }
    check_regular(a, cfg.cycle)?;
    let k0 = cfg.k0.min(steps).max(1);
    let mut stream = CeStream::new(a.to_f64());
    let (mut min, mut argmin, mut last) = (f64::INFINITY, 0, f64::NAN);
    for (k, ak) in stream.by_ref().take(steps) {
        if !ak.is_finite() {
            return Err(StatsError::PrecisionExhausted(k));
        }
        sink(k, ak);
        if k >= k0 && ak < min {
            min = ak;
            argmin = k;
        }
        last = ak;
    }
    let nest_times = nest
        .map(|nest| {
            nest.levels
                .iter()
                .filter_map(|l| {
                    let v = l.v?;
                    Some((l.n, v, nest.orbit.ce_average(v.checked_sub(1).filter(|&k| k >= 1)?)?))
                })
                .collect()
        })
        .unwrap_or_default();
    Ok(CeReport { steps, k0, last, liminf_estimate: min, argmin, nest_times })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GammaCount {
    pub gamma: f64,
    /// #{n ≤ N : |f^n(0)| < n^{−γ}}
    pub count: usize,
    pub last_hit: Option<usize>,
}

impl GammaCount {
    /// No hit in the last decade (N/10, N].
    pub fn stabilized(&self, steps: usize) -> bool {
        self.last_hit.is_none_or(|t| t <= steps / 10)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecurrenceReport {
    pub steps: usize,
    /// max over √N ≤ n ≤ N of −ln|f^n(0)|/ln n
    pub estimate: f64,
    pub argmax: usize,
    /// Record-setting (n, −ln|f^n(0)|/ln n) over the same window.
    pub records: Vec<(usize, f64)>,
    pub counts: Vec<GammaCount>,
    /// (level, k_0 < k_1 < …): times with R_n^i(0) = f^{k_i}(0) at the
    /// deepest level whose returns are recorded.
    pub return_times: Option<(usize, Vec<usize>)>,
}

pub fn recurrence_exponent(
    a: &Parameter,
    steps: usize,
    cfg: &CeConfig,
    nest: Option<&PrincipalNest>,
) -> Result<RecurrenceReport, StatsError> {
    if steps > cfg.cap {
        return Err(StatsError::BudgetExceeded(steps));
    }
    check_regular(a, cfg.cycle)?;
    let af = a.to_f64();
    let start = ((steps as f64).sqrt().ceil() as usize).max(2);
    let mut counts: Vec<GammaCount> =
        GAMMA_GRID.iter().map(|&gamma| GammaCount { gamma, count: 0, last_hit: None }).collect();
    let mut records: Vec<(usize, f64)> = Vec::new();
    let mut x = 0.0f64;
    for n in 1..=steps {
        x = af - x * x;
        if x == 0.0 {
            return Err(StatsError::PrecisionExhausted(n));
        }
        let lx = -x.abs().ln();
        let ln_n = (n as f64).ln();
        for c in counts.iter_mut() {
            if lx > c.gamma * ln_n {
                c.count += 1;
                c.last_hit = Some(n);
            }
        }
        if n >= start {
            let e = lx / ln_n;
            if records.last().is_none_or(|r| e > r.1) {
                records.push((n, e));
            }
        }
    }
    let (argmax, estimate) = records.last().copied().unwrap_or((0, f64::NEG_INFINITY));
    Ok(RecurrenceReport {
        steps,
        estimate,
        argmax,
        records,
        counts,
        return_times: nest.and_then(critical_return_times),
    })
}

/// k_0 = v_n followed by the recorded returns of 0 to I_n, at the deepest
/// level with any.
pub fn critical_return_times(nest: &PrincipalNest) -> Option<(usize, Vec<usize>)> {
    nest.levels.iter().rev().find(|l| l.v.is_some() && !l.returns.is_empty()).map(|l| {
        let mut ks = vec![l.v.expect("checked")];
        ks.extend_from_slice(&l.returns);
        (l.n, ks)
    })
}
