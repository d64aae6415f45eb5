use std::fmt;

use crate::cycle::detect_attracting_cycle;
use crate::nest::{build_principal_nest, renormalization_tower, NestConfig, NestError, PrincipalNest};
use crate::real::Parameter;
use crate::stats::{ce_estimator, recurrence_exponent, CeConfig};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamBudgets {
    pub nest: NestConfig,
    pub ce_steps: usize,
    pub recurrence_steps: usize,
    pub ce: CeConfig,
    /// Trailing central levels that count as a renormalization cascade.
    pub central_cascade: usize,
    pub tower_depth: usize,
}

impl Default for ParamBudgets {
    fn default() -> Self {
        ParamBudgets {
            nest: NestConfig::default(),
            ce_steps: 100_000,
            recurrence_steps: 1_000_000,
            ce: CeConfig::default(),
            central_cascade: 4,
            tower_depth: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Regular { period: usize, multiplier: f64 },
    StochasticCandidate { depth: usize, ce_liminf: f64, recurrence: f64 },
    RenormalizationSuspect { periods: Vec<usize> },
    Undecided { reason: String },
}

impl Verdict {
    pub fn tag(&self) -> &'static str {
        match self {
            Verdict::Regular { .. } => "regular",
            Verdict::StochasticCandidate { .. } => "stochastic",
            Verdict::RenormalizationSuspect { .. } => "renormalization",
            Verdict::Undecided { .. } => "undecided",
        }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self, Verdict::StochasticCandidate { .. })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Regular { period, multiplier } => write!(f, "regular (period {period}, multiplier {multiplier:.6e})"),
            Verdict::StochasticCandidate { depth, ce_liminf, recurrence } => {
                write!(f, "stochastic candidate (depth {depth}, CE {ce_liminf:.6}, recurrence {recurrence:.4})")
            }
            Verdict::RenormalizationSuspect { periods } => write!(f, "renormalization suspect (periods {periods:?})"),
            Verdict::Undecided { reason } => write!(f, "undecided ({reason})"),
        }
    }
}

/// What a verdict cost.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Evidence {
    pub cycle_iterations: usize,
    pub nest_depth: usize,
    /// Length of the certified critical orbit.
    pub orbit_steps: usize,
    pub precision: Option<u32>,
    pub stop: Option<String>,
    pub ce_steps: usize,
    pub recurrence_steps: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub a: Parameter,
    pub verdict: Verdict,
    pub evidence: Evidence,
}

fn trailing_central(nest: &PrincipalNest) -> usize {
    (0..nest.depth()).rev().take_while(|&n| nest.is_central(n) == Some(true)).count()
}

fn tower_periods(a: &Parameter, budgets: &ParamBudgets, fallback: usize) -> Vec<usize> {
    match renormalization_tower(a, &budgets.nest, budgets.tower_depth) {
        Ok((periods, _)) if !periods.is_empty() => periods,
        _ => vec![fallback],
    }
}

pub fn classify_parameter(a: &Parameter, budgets: &ParamBudgets) -> Classification {
    let mut evidence = Evidence { cycle_iterations: budgets.nest.budgets.cycle.iterations, ..Evidence::default() };
    let done = |verdict, evidence| Classification { a: a.clone(), verdict, evidence };
    if *a < Parameter::ratio(-1, 4) || *a > Parameter::ratio(2, 1) {
        return done(Verdict::Undecided { reason: "parameter outside [-1/4, 2]".into() }, evidence);
    }
    if let Some(c) = detect_attracting_cycle(a.to_f64(), budgets.nest.budgets.cycle) {
        return done(Verdict::Regular { period: c.period, multiplier: c.multiplier }, evidence);
    }
    let cfg = NestConfig { skip_regular_check: true, ..budgets.nest.clone() };
    let nest = match build_principal_nest(a, &cfg) {
        Ok(nest) => nest,
        Err(NestError::RegularParameter { period, multiplier }) => {
            return done(Verdict::Regular { period, multiplier }, evidence)
        }
        Err(NestError::Renormalizable { period, .. }) => {
            let periods = tower_periods(a, budgets, period);
            return done(Verdict::RenormalizationSuspect { periods }, evidence);
        }
        Err(NestError::RenormalizationSuspected { period }) => {
            return done(Verdict::RenormalizationSuspect { periods: vec![period] }, evidence)
        }
        Err(e) => return done(Verdict::Undecided { reason: e.to_string() }, evidence),
    };
    evidence.nest_depth = nest.depth();
    evidence.orbit_steps = nest.orbit.len().saturating_sub(1);
    evidence.precision = Some(nest.precision);
    evidence.stop = Some(nest.stop.to_string());
    let run = trailing_central(&nest);
    if run >= budgets.central_cascade {
        let v = nest.levels[nest.depth()].v.unwrap_or(0);
        return done(Verdict::RenormalizationSuspect { periods: vec![v] }, evidence);
    }
    let depth = nest.depth();
    if depth < 2 {
        return done(Verdict::Undecided { reason: format!("nest depth {depth} below 2") }, evidence);
    }
    evidence.ce_steps = budgets.ce_steps;
    let ce = match ce_estimator(a, budgets.ce_steps, &budgets.ce, Some(&nest), |_, _| {}) {
        Ok(r) => r,
        Err(e) => return done(Verdict::Undecided { reason: format!("CE: {e}") }, evidence),
    };
    if !(ce.liminf_estimate > 0.0) {
        return done(Verdict::Undecided { reason: format!("CE estimate {} not positive", ce.liminf_estimate) }, evidence);
    }
    evidence.recurrence_steps = budgets.recurrence_steps;
    let rec = match recurrence_exponent(a, budgets.recurrence_steps, &budgets.ce, None) {
        Ok(r) => r,
        Err(e) => return done(Verdict::Undecided { reason: format!("recurrence: {e}") }, evidence),
    };
    done(Verdict::StochasticCandidate { depth, ce_liminf: ce.liminf_estimate, recurrence: rec.estimate }, evidence)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn superattracting_examples() {
        let b = ParamBudgets::default();
        match classify_parameter(&Parameter::from_f64(0.0), &b).verdict {
            Verdict::Regular { period, multiplier } => {
                assert_eq!(period, 1);
                assert!(multiplier.abs() < 1e-12);
            }
            v => panic!("{v}"),
        }
        match classify_parameter(&Parameter::from_f64(1.0), &b).verdict {
            Verdict::Regular { period, multiplier } => {
                assert_eq!(period, 2);
                assert!(multiplier.abs() < 1e-12);
            }
            v => panic!("{v}"),
        }
    }

    #[test]
    fn fixed_point_region() {
        let b = ParamBudgets::default();
        for i in 0..100 {
            let a = -0.24 + 0.98 * i as f64 / 99.0;
            let x = (-1.0 + (1.0 + 4.0 * a).sqrt()) / 2.0;
            match classify_parameter(&Parameter::from_f64(a), &b).verdict {
                Verdict::Regular { period: 1, multiplier } => assert!((multiplier + 2.0 * x).abs() < 1e-9, "{a}"),
                v => panic!("{a}: {v}"),
            }
        }
    }

    #[test]
    fn stochastic_and_deterministic() {
        let b = ParamBudgets::default();
        let a: Parameter = "1.7".parse().unwrap();
        let c = classify_parameter(&a, &b);
        assert!(c.verdict.is_stochastic(), "{}", c.verdict);
        assert_eq!(classify_parameter(&a, &b), c);
        let out = classify_parameter(&Parameter::from_f64(2.1), &b);
        assert_eq!(out.verdict.tag(), "undecided");
    }

    #[test]
    fn feigenbaum_region_is_renormalizable() {
        let b = ParamBudgets::default();
        let c = classify_parameter(&"1.401155189".parse().unwrap(), &b);
        match c.verdict {
            Verdict::RenormalizationSuspect { periods } => assert_eq!(periods[0], 2),
            v => panic!("{v}"),
        }
    }
}
