//! Reference evaluators and helpers shared by the integration tests.
#![allow(dead_code)]

use quadnest::param::{classify_parameter, Classification, ParamBudgets, SweepConfig};
use quadnest::stats::{BranchEvidence, ClassifierConfig, Clause};
use quadnest::Parameter;
use rand::Rng;

/// Literal reading of LS1–LS4, LE, LC1–LC5: every k is checked separately.
#[derive(Debug)]
pub struct NaiveLanding {
    pub ls: bool,
    pub le: bool,
    pub lc: bool,
    pub violated: Vec<Clause>,
}

fn count_upto(flags: &[bool], k: usize) -> usize {
    flags[..k].iter().filter(|&&b| b).count()
}

#[allow(clippy::too_many_arguments)]
pub fn naive_landing(
    indices: &[i64],
    times: &[usize],
    n: usize,
    c: f64,
    c_prev: f64,
    cfg: &ClassifierConfig,
    vg: &dyn Fn(i64) -> bool,
) -> NaiveLanding {
    let eps = cfg.epsilon;
    let m = indices.len();
    let k6 = cfg.sparsity * 2f64.powi(n as i32);
    let short: Vec<bool> = times.iter().map(|&r| (r as f64) < c_prev.powf(-1.0 + 2.0 * eps)).collect();
    let large: Vec<bool> = times.iter().map(|&r| (r as f64) > c_prev.powf(-1.0 - 2.0 * eps)).collect();
    let bad: Vec<bool> = indices.iter().map(|&j| n != cfg.n0 && !vg(j)).collect();
    let sparse = |flags: &[bool], lo_ok: &dyn Fn(f64) -> bool, rate: f64| {
        (1..=m).filter(|&k| lo_ok(k as f64)).all(|k| (count_upto(flags, k) as f64) < rate * k as f64)
    };
    let leading = |flags: &[bool], bound: f64| (1..=m).filter(|&i| i as f64 <= bound).all(|i| !flags[i - 1]);

    let mf = m as f64;
    let ls1 = c.powf(-0.5) < mf && mf < c.powf(-1.0 - 2.0 * eps);
    let ls2 = times.iter().all(|&r| (r as f64) < c_prev.powf(-14.0));
    let ls3 = sparse(&short, &|k| c_prev.powf(-2.0) <= k, k6 * c_prev.powf(eps / 10.0));
    let ls4 = sparse(&large, &|k| c.powf(-1.0 / n as f64) <= k, k6 * (-c_prev.powf(eps / 5.0)).exp());
    let le = sparse(&bad, &|k| c_prev.powf(-2.0) < k, k6 * c_prev.powf(1.0 / 20.0));
    let lc1 = leading(&bad, c_prev.powf(-1.0 / 30.0));
    let lc2 = sparse(&short, &|k| c_prev.powf(-eps / 5.0) <= k, k6 * c_prev.powf(eps / 10.0));
    let lc3 = sparse(&bad, &|k| c_prev.powf(-1.0 / 30.0) <= k, k6 * c_prev.powf(1.0 / 60.0));
    let lc4 = sparse(&large, &|k| c_prev.powf(-200.0) <= k, k6 * c_prev.powf(100.0));
    let lc5 = leading(&large, (c_prev.powf(-eps / 5.0) / 2.0).exp());

    let named = [
        (Clause::LS1, ls1),
        (Clause::LS2, ls2),
        (Clause::LS3, ls3),
        (Clause::LS4, ls4),
        (Clause::LE, le),
        (Clause::LC1, lc1),
        (Clause::LC2, lc2),
        (Clause::LC3, lc3),
        (Clause::LC4, lc4),
        (Clause::LC5, lc5),
    ];
    let violated = named.iter().filter(|(_, ok)| !ok).map(|(c, _)| *c).collect();
    let ls = ls1 && ls2 && ls3 && ls4;
    let le = ls && le;
    NaiveLanding { ls, le, lc: le && lc1 && lc2 && lc3 && lc4 && lc5, violated }
}

#[derive(Debug)]
pub struct NaiveReturn {
    pub vg: bool,
    pub g: bool,
    pub violated: Vec<Clause>,
}

/// VG, G1, G2 for a non-central branch of level m.
pub fn naive_return(ev: &BranchEvidence, level: usize, c_prev: f64, lambda_n0: f64, cfg: &ClassifierConfig) -> NaiveReturn {
    let mut violated = Vec::new();
    let vg = if level == cfg.n0 {
        true
    } else {
        let far = ev.ln_distance_ratio.exp() > c_prev.powf(1.0 / 3.0);
        let parent = ev.parent_excellent.unwrap();
        if !far {
            violated.push(Clause::VG);
        }
        if !parent {
            violated.push(Clause::LE);
        }
        far && parent
    };
    let (m, n0) = (level as i32, cfg.n0 as i32);
    let g1 = ev.lambda >= lambda_n0 * (1.0 + 2f64.powi(n0 - m)) / 2.0;
    let g2 = if m == 1 {
        true
    } else {
        let e = (m - 1) as f64;
        let floor = lambda_n0 * (1.0 + 2f64.powf((n0 - m) as f64 + 0.5)) / 2.0 - c_prev.powf(2.0 / e);
        (1..=ev.return_time).filter(|&k| c_prev.powf(-3.0 / e) <= k as f64).all(|k| ev.truncated[k - 1] >= floor)
    };
    if !g1 {
        violated.push(Clause::G1);
    }
    if !g2 {
        violated.push(Clause::G2);
    }
    NaiveReturn { vg, g: g1 && g2, violated }
}

/// A random landing problem whose clauses go both ways.
pub struct LandingCase {
    pub indices: Vec<i64>,
    pub times: Vec<usize>,
    pub n: usize,
    pub ln_c: f64,
    pub ln_c_prev: f64,
    pub cfg: ClassifierConfig,
    pub good: Vec<i64>,
}

pub fn landing_case<R: Rng>(rng: &mut R) -> LandingCase {
    let n = rng.random_range(1..=5usize);
    let n0 = rng.random_range(1..=n);
    let ln_c_prev: f64 = rng.random_range(-3.5..-0.2);
    let ln_c = ln_c_prev * rng.random_range(1.0..2.5);
    let cfg = ClassifierConfig {
        epsilon: rng.random_range(0.01..0.2),
        n0,
        sparsity: [0.005, 0.05, 0.3, 6.0][rng.random_range(0..4)],
    };
    let cp = ln_c_prev.exp();
    let top = (ln_c.exp().powf(-1.3)).clamp(3.0, 400.0) as usize;
    let m = rng.random_range(1..=top);
    let short = cp.powf(-1.0 + 2.0 * cfg.epsilon).max(1.0);
    let large = cp.powf(-1.0 - 2.0 * cfg.epsilon);
    let p_large = [0.0, 0.02, 0.3][rng.random_range(0..3)];
    let times = (0..m)
        .map(|_| {
            let u: f64 = rng.random();
            let t = if u < p_large {
                large * rng.random_range(1.0..3.0)
            } else if u < 0.5 {
                rng.random_range(1.0..=short)
            } else {
                rng.random_range(short..=large)
            };
            // just past the LS2 bound, clear of rounding in either evaluator
            let t = if rng.random_bool(0.003) { cp.powf(-14.0) * (1.0 + 1e-9) } else { t };
            t.ceil().min(1e15) as usize
        })
        .collect();
    let indices = (0..m).map(|_| rng.random_range(1..=12i64) * if rng.random_bool(0.5) { 1 } else { -1 }).collect();
    let p_good = [1.0, 0.97, 0.6][rng.random_range(0..3)];
    let good = (-12..=12).filter(|_| rng.random_bool(p_good)).collect();
    LandingCase { indices, times, n, ln_c, ln_c_prev, cfg, good }
}

pub struct ReturnCase {
    pub ev: BranchEvidence,
    pub level: usize,
    pub ln_c_prev: f64,
    pub lambda_n0: f64,
    pub cfg: ClassifierConfig,
}

pub fn return_case<R: Rng>(rng: &mut R) -> ReturnCase {
    let n0 = rng.random_range(1..=3usize);
    let level = rng.random_range(n0..=n0 + 4);
    let ln_c_prev: f64 = rng.random_range(-5.0..-0.1);
    let lambda_n0 = rng.random_range(0.05..0.6);
    let r = rng.random_range(1..=60usize);
    let base = lambda_n0 * rng.random_range(0.4..1.6);
    let truncated = (0..r).map(|_| base + rng.random_range(-0.3..0.3)).collect();
    let ev = BranchEvidence {
        index: rng.random_range(1..=40i64),
        return_time: r,
        ln_distance_ratio: rng.random_range(ln_c_prev * 0.7..0.0),
        parent_excellent: if level == n0 && rng.random_bool(0.5) { None } else { Some(rng.random_bool(0.8)) },
        lambda: lambda_n0 * rng.random_range(0.5..1.5),
        truncated,
    };
    let cfg = ClassifierConfig { epsilon: rng.random_range(0.01..0.2), n0, sparsity: 6.0 };
    ReturnCase { ev, level, ln_c_prev, lambda_n0, cfg }
}

/// u_0 … u_depth and v_0 … v_{depth−1} from a double-precision critical
/// orbit; pullbacks of ±u_n along the critical word, then through the fold.
pub fn f64_nest(a: f64, orbit: &[f64], depth: usize) -> Option<(Vec<f64>, Vec<usize>)> {
    let p = ((1.0 + 4.0 * a).sqrt() - 1.0) / 2.0;
    let mut u = vec![p];
    let mut v: Vec<usize> = Vec::new();
    for _ in 0..depth {
        let un = *u.last().unwrap();
        let from = v.last().copied().unwrap_or(1);
        let k = (from..orbit.len()).find(|&k| orbit[k].abs() < un)?;
        v.push(k);
        let positives = orbit[1..k].iter().filter(|x| **x > 0.0).count();
        let mut y = if positives % 2 == 0 { -un } else { un };
        for x in orbit[1..k].iter().rev() {
            y = (a - y).sqrt().copysign(*x);
        }
        u.push((a - y).sqrt());
    }
    Some((u, v))
}

pub fn f64_orbit(a: f64, len: usize) -> Vec<f64> {
    std::iter::successors(Some(0.0f64), |x| Some(a - x * x)).take(len).collect()
}

/// The first `want` stochastic candidates from a seeded stream in (1.55, 2).
pub fn stochastic_samples(want: usize, seed: u64) -> (Vec<Classification>, usize) {
    let stream = SweepConfig::new(Parameter::from_f64(1.55), Parameter::from_f64(2.0), 40 * want, seed).parameters();
    let budgets = ParamBudgets::default();
    let mut out = Vec::new();
    let mut tried = 0;
    for a in stream {
        if out.len() == want {
            break;
        }
        tried += 1;
        let c = classify_parameter(&a, &budgets);
        if c.verdict.is_stochastic() {
            out.push(c);
        }
    }
    (out, tried)
}
