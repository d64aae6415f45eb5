//! Seeded parameter sweeps classified in parallel.

use std::fmt::Write as _;
use std::io;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{classify_parameter, Classification, ParamBudgets, ParamError, Verdict};
use crate::real::Parameter;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepConfig {
    pub lo: Parameter,
    pub hi: Parameter,
    pub count: usize,
    pub seed: u64,
    pub budgets: ParamBudgets,
    /// Worker threads; None uses the global pool.
    pub threads: Option<usize>,
    /// One uniform point per equal stratum instead of plain uniform draws.
    pub stratified: bool,
}

impl SweepConfig {
    pub fn new(lo: Parameter, hi: Parameter, count: usize, seed: u64) -> Self {
        SweepConfig { lo, hi, count, seed, budgets: ParamBudgets::default(), threads: None, stratified: false }
    }

    /// The sampled parameters, in draw order.
    pub fn parameters(&self) -> Vec<Parameter> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let (lo, hi) = (self.lo.to_f64(), self.hi.to_f64());
        (0..self.count)
            .map(|i| {
                let t: f64 = rng.random();
                let t = if self.stratified { (i as f64 + t) / self.count as f64 } else { t };
                Parameter::from_f64(lo + (hi - lo) * t)
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub bin_width: f64,
    pub counts: Vec<usize>,
    pub below: usize,
    pub above: usize,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Self {
        Histogram { lo, bin_width: (hi - lo) / bins as f64, counts: vec![0; bins], below: 0, above: 0 }
    }

    pub fn add(&mut self, x: f64) {
        let i = ((x - self.lo) / self.bin_width).floor();
        if !(i >= 0.0) {
            self.below += 1;
        } else if i as usize >= self.counts.len() {
            self.above += 1;
        } else {
            self.counts[i as usize] += 1;
        }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum::<usize>() + self.below + self.above
    }

    fn line(&self) -> String {
        let bins: Vec<String> = self.counts.iter().map(|c| c.to_string()).collect();
        format!("lo={} width={} below={} above={} counts={}", self.lo, self.bin_width, self.below, self.above, bins.join(","))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSummary {
    pub count: usize,
    pub regular: usize,
    pub stochastic: usize,
    pub renormalization: usize,
    pub undecided: usize,
    pub ce: Histogram,
    pub recurrence: Histogram,
    pub recurrence_median: Option<f64>,
}

impl SweepSummary {
    pub fn fraction(&self, tag: &str) -> f64 {
        let k = match tag {
            "regular" => self.regular,
            "stochastic" => self.stochastic,
            "renormalization" => self.renormalization,
            _ => self.undecided,
        };
        k as f64 / self.count.max(1) as f64
    }

    pub fn from_records(records: &[Classification]) -> Self {
        let mut s = SweepSummary {
            count: records.len(),
            regular: 0,
            stochastic: 0,
            renormalization: 0,
            undecided: 0,
            ce: Histogram::new(0.0, 1.4, 14),
            recurrence: Histogram::new(0.0, 3.0, 15),
            recurrence_median: None,
        };
        let mut rec = Vec::new();
        for c in records {
            match &c.verdict {
                Verdict::Regular { .. } => s.regular += 1,
                Verdict::RenormalizationSuspect { .. } => s.renormalization += 1,
                Verdict::Undecided { .. } => s.undecided += 1,
                Verdict::StochasticCandidate { ce_liminf, recurrence, .. } => {
                    s.stochastic += 1;
                    s.ce.add(*ce_liminf);
                    s.recurrence.add(*recurrence);
                    rec.push(*recurrence);
                }
            }
        }
        s.recurrence_median = median(&mut rec);
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("quadnest-sweep 1\n");
        writeln!(out, "count = {}", self.count).unwrap();
        for tag in ["regular", "stochastic", "renormalization", "undecided"] {
            writeln!(out, "{tag} = {:.4}", self.fraction(tag)).unwrap();
        }
        writeln!(out, "ce_histogram = {}", self.ce.line()).unwrap();
        writeln!(out, "recurrence_histogram = {}", self.recurrence.line()).unwrap();
        let med = self.recurrence_median.map_or("-".to_string(), |m| format!("{m:.6}"));
        writeln!(out, "recurrence_median = {med}").unwrap();
        out
    }
}

pub(crate) fn median(xs: &mut [f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    Some(if n % 2 == 1 { xs[n / 2] } else { (xs[n / 2 - 1] + xs[n / 2]) / 2.0 })
}

pub const CSV_HEADER: &str = "a,verdict,period,multiplier,depth,ce,recurrence,precision,orbit_steps,note";

pub fn csv_record(c: &Classification) -> String {
    let e = &c.evidence;
    let prec = e.precision.map_or(String::new(), |p| p.to_string());
    let (period, mult, depth, ce, rec, note) = match &c.verdict {
        Verdict::Regular { period, multiplier } => (period.to_string(), multiplier.to_string(), String::new(), String::new(), String::new(), String::new()),
        Verdict::StochasticCandidate { depth, ce_liminf, recurrence } => {
            (String::new(), String::new(), depth.to_string(), ce_liminf.to_string(), recurrence.to_string(), String::new())
        }
        Verdict::RenormalizationSuspect { periods } => {
            let trail: Vec<String> = periods.iter().map(|p| p.to_string()).collect();
            (trail.join(" "), String::new(), e.nest_depth.to_string(), String::new(), String::new(), String::new())
        }
        Verdict::Undecided { reason } => {
            (String::new(), String::new(), e.nest_depth.to_string(), String::new(), String::new(), reason.replace(',', ";"))
        }
    };
    format!("{},{},{period},{mult},{depth},{ce},{rec},{prec},{},{note}", c.a, c.verdict.tag(), e.orbit_steps)
}

pub fn write_sweep_csv<W: io::Write>(mut w: W, records: &[Classification]) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for c in records {
        writeln!(w, "{}", csv_record(c))?;
    }
    w.flush()
}

/// Classify the sampled parameters; records come back sorted by parameter.
pub fn sweep(cfg: &SweepConfig) -> Result<(Vec<Classification>, SweepSummary), ParamError> {
    if cfg.lo < Parameter::ratio(-1, 4) || cfg.hi > Parameter::ratio(2, 1) || cfg.lo >= cfg.hi {
        return Err(ParamError::OutOfRange(format!("({}, {})", cfg.lo, cfg.hi)));
    }
    let params = cfg.parameters();
    let run = || -> Vec<Classification> { params.par_iter().map(|a| classify_parameter(a, &cfg.budgets)).collect() };
    let mut records = match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| ParamError::CombinatoricsUnstable(e.to_string()))?
            .install(run),
        None => run(),
    };
    records.sort_by(|a, b| a.a.cmp(&b.a));
    let summary = SweepSummary::from_records(&records);
    Ok((records, summary))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_parameters_are_reproducible() {
        let cfg = SweepConfig::new(Parameter::from_f64(1.75), Parameter::from_f64(2.0), 50, 9);
        assert_eq!(cfg.parameters(), cfg.parameters());
        assert!(cfg.parameters().iter().all(|p| *p >= cfg.lo && *p < cfg.hi));
        let strat = SweepConfig { stratified: true, ..cfg.clone() }.parameters();
        for (i, p) in strat.iter().enumerate() {
            let t = (p.to_f64() - 1.75) / 0.25;
            assert!(t >= i as f64 / 50.0 - 1e-12 && t < (i + 1) as f64 / 50.0 + 1e-12);
        }
    }

    #[test]
    fn regular_sweep() {
        let cfg = SweepConfig::new(Parameter::ratio(-1, 4), Parameter::ratio(3, 4), 200, 1);
        let (records, summary) = sweep(&cfg).unwrap();
        assert_eq!(summary.regular, 200);
        assert!(records.windows(2).all(|w| w[0].a <= w[1].a));
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &records).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 201);
    }

    #[test]
    fn histogram_and_median() {
        let mut h = Histogram::new(0.0, 1.0, 4);
        for x in [-0.1, 0.1, 0.3, 0.3, 0.99, 1.0, f64::NAN] {
            h.add(x);
        }
        assert_eq!(h.counts, vec![1, 2, 0, 1]);
        assert_eq!((h.below, h.above), (2, 1));
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), Some(2.5));
    }
}
