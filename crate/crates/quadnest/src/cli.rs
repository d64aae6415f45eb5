//! The `quadnest` command line.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use sha2::{Digest, Sha256};

use crate::cache::{Cache, CacheKey, Lookup, ENGINE_VERSION};
use crate::config::{ConfigError, RunConfig};
use crate::nest::{build_principal_nest, markov_partition, misiurewicz_sample, NestConfig, NestDocument, NestError};
use crate::param::{
    branch_windows, classify_parameter, phase_parameter_report, sweep, write_sweep_csv, ParamError, SweepConfig,
    Verdict,
};
use crate::qs::{capacity_bound, IntervalSet, QsParameters};
use crate::real::Parameter;
use crate::stats::{
    ce_estimator, critical_statistics, recurrence_exponent, return_time_distribution, statistics_to_text, write_csv,
    StatsError,
};

#[derive(Parser, Debug)]
#[command(name = "quadnest", version, about = "Principal nest experiments for f_a(x) = a - x^2")]
pub struct Cli {
    /// Flat key = value configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one configuration key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub no_cache: bool,
    #[arg(long, global = true)]
    pub precision_start: Option<u32>,
    #[arg(long, global = true)]
    pub precision_max: Option<u32>,
    #[arg(long, global = true)]
    pub max_level: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build the principal nest and write its document.
    Nest {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
    },
    /// Critical statistics and the return-time distribution of one level.
    Stats {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long)]
        level: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Stream a_k = ln|Df^k(f(0))|/k.
    Ce {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Polynomial recurrence exponent of the critical orbit.
    Recur {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Regular, stochastic candidate, renormalization suspect or undecided.
    Classify {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
    },
    /// Classify seeded uniform samples of a parameter range.
    Sweep {
        /// lo:hi
        #[arg(long, allow_hyphen_values = true)]
        range: String,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        stratified: bool,
    },
    /// Branch windows of one level and the phase-parameter ratio table.
    Windows {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, default_value_t = 1)]
        level: usize,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Capacity bound for a union of intervals.
    Capacity {
        /// lo:hi,lo:hi,...
        #[arg(long, allow_hyphen_values = true)]
        intervals: String,
        #[arg(long, default_value = "-1:1", allow_hyphen_values = true)]
        ambient: String,
        #[arg(long, default_value_t = 1.01)]
        gamma: f64,
    },
    /// Markov partition of I minus I_level for a Misiurewicz-type boundary.
    Markov {
        /// Defaults to the built-in Misiurewicz sample.
        #[arg(long, allow_hyphen_values = true)]
        a: Option<String>,
        #[arg(long, default_value_t = 1)]
        level: usize,
        #[arg(long, default_value_t = 8)]
        depth: usize,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    /// A budget or precision verdict.
    Budget(String),
    Engine(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Budget(_) => 2,
            CliError::Usage(_) | CliError::Engine(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Budget(m) => write!(f, "budget: {m}"),
            CliError::Engine(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Engine(e.to_string())
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<NestError> for CliError {
    fn from(e: NestError) -> Self {
        match e {
            NestError::BudgetExceeded(_)
            | NestError::PrecisionExhausted(_)
            | NestError::NeverReturnsWithinBudget(_)
            | NestError::PreperiodNotFoundWithinBudget(_) => CliError::Budget(e.to_string()),
            _ => CliError::Engine(e.to_string()),
        }
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::Nest(n) => n.into(),
            StatsError::BudgetExceeded(_) | StatsError::PrecisionExhausted(_) => CliError::Budget(e.to_string()),
            StatsError::BudgetTooSmall(_) => CliError::Usage(e.to_string()),
            _ => CliError::Engine(e.to_string()),
        }
    }
}

impl From<ParamError> for CliError {
    fn from(e: ParamError) -> Self {
        match e {
            ParamError::Nest(n) => n.into(),
            ParamError::BudgetExceeded(_) => CliError::Budget(e.to_string()),
            ParamError::OutOfRange(_) => CliError::Usage(e.to_string()),
            _ => CliError::Engine(e.to_string()),
        }
    }
}

/// Configuration from defaults, then the file, then `--set`, then flags.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        cfg.apply_text(&text)?;
    }
    for kv in &cli.overrides {
        let (k, v) = kv.split_once('=').ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k, v)?;
    }
    let flags: [(&str, Option<String>); 8] = [
        ("precision_start", cli.precision_start.map(|v| v.to_string())),
        ("precision_max", cli.precision_max.map(|v| v.to_string())),
        ("max_level", cli.max_level.map(|v| v.to_string())),
        ("seed", cli.seed.map(|v| v.to_string())),
        ("epsilon", cli.epsilon.map(|v| v.to_string())),
        ("threads", cli.threads.map(|v| v.to_string())),
        ("output_dir", cli.out.as_ref().map(|p| p.display().to_string())),
        ("cache_dir", cli.cache_dir.as_ref().map(|p| p.display().to_string())),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            cfg.set(k, &v)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parameter(s: &str) -> Result<Parameter, CliError> {
    s.parse().map_err(|e| CliError::Usage(format!("parameter {s:?}: {e}")))
}

fn file_tag(a: &Parameter) -> String {
    let s = a.to_string().replace('/', "_");
    if s.len() <= 64 {
        return s;
    }
    format!("h{}", &fingerprint(&s))
}

fn fingerprint<T: std::fmt::Debug>(x: &T) -> String {
    let d = Sha256::digest(format!("{x:?}").as_bytes());
    d.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

struct Ctx<'a> {
    cfg: RunConfig,
    cache: Option<Cache>,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn artifact(&self, name: &str) -> Result<PathBuf, CliError> {
        fs::create_dir_all(&self.cfg.output_dir)?;
        Ok(self.cfg.output_dir.join(name))
    }

    fn write_artifact(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.artifact(name)?;
        fs::write(&path, bytes)?;
        Ok(path)
    }

    /// Cached text artifact: the stored bytes on a hit, `make` on a miss.
    fn cached(&mut self, key: CacheKey, make: impl FnOnce() -> Result<String, CliError>) -> Result<(String, bool), CliError> {
        if let Some(cache) = &self.cache {
            match cache.lookup(&key)? {
                Lookup::Hit(bytes) => {
                    if let Ok(s) = String::from_utf8(bytes) {
                        return Ok((s, true));
                    }
                }
                Lookup::Corrupt(p) => writeln!(self.err, "warning: corrupt cache entry {} ignored", p.display())?,
                Lookup::Miss => {}
            }
        }
        let text = make()?;
        if let Some(cache) = &self.cache {
            if let Err(e) = cache.store(&key, text.as_bytes()) {
                writeln!(self.err, "warning: cache store failed: {e}")?;
            }
        }
        Ok((text, false))
    }
}

fn nest_summary(doc: &NestDocument) -> String {
    let mut s = String::new();
    writeln!(s, "a = {}", doc.a).unwrap();
    writeln!(s, "precision = {} bits, stop = {}", doc.precision, doc.stop).unwrap();
    let v: Vec<String> = doc.levels.iter().filter_map(|l| l.v).map(|v| v.to_string()).collect();
    writeln!(s, "depth = {}, v = [{}]", doc.levels.len() - 1, v.join(", ")).unwrap();
    for w in doc.levels.windows(2) {
        let l = crate::real::log2_abs(w[0].half_width.value()) - crate::real::log2_abs(w[1].half_width.value());
        writeln!(s, "ln 1/c_{} = {:.6}", w[0].n, l * std::f64::consts::LN_2).unwrap();
    }
    s
}

fn cmd_nest(ctx: &mut Ctx<'_>, a: &str) -> Result<(), CliError> {
    let a = parameter(a)?;
    let nc = ctx.cfg.nest_config();
    let key = CacheKey::new("nest", &a.to_string(), nc.max_level, &format!("{ENGINE_VERSION}+{}", fingerprint(&nc)));
    let (text, hit) = ctx.cached(key, || {
        let nest = build_principal_nest(&a, &nc)?;
        Ok(NestDocument::from_nest(&nest).to_text())
    })?;
    let doc = NestDocument::parse(&text).map_err(CliError::Engine)?;
    let path = ctx.write_artifact(&format!("nest-{}.txt", file_tag(&a)), text.as_bytes())?;
    write!(ctx.out, "{}", nest_summary(&doc))?;
    writeln!(ctx.out, "nest document: {}{}", path.display(), if hit { " (cached)" } else { "" })?;
    Ok(())
}

fn cmd_stats(ctx: &mut Ctx<'_>, a: &str, level: Option<usize>, samples: Option<usize>) -> Result<(), CliError> {
    let a = parameter(a)?;
    let nest = build_principal_nest(&a, &ctx.cfg.nest_config())?;
    let st = critical_statistics(&nest)?;
    let path = ctx.write_artifact(&format!("stats-{}.txt", file_tag(&a)), statistics_to_text(&st).as_bytes())?;
    writeln!(ctx.out, "statistics: {}", path.display())?;
    for l in &st.levels {
        if let (Some(s), Some(lc)) = (l.s, l.ln_inv_c) {
            writeln!(ctx.out, "n = {}: s = {s}, ln 1/c = {lc:.4}, central = {:?}", l.n, l.central)?;
        }
    }
    let deepest = (1..nest.depth()).rev().find(|&n| nest.levels[n].v.is_some()).unwrap_or(0);
    let n = level.unwrap_or(deepest);
    let samples = samples.unwrap_or(ctx.cfg.samples);
    let d = return_time_distribution(&nest, n, samples, ctx.cfg.epsilon, ctx.cfg.seed)?;
    let path = ctx.artifact(&format!("returns-{}-L{n}.csv", file_tag(&a)))?;
    write_csv(BufWriter::new(File::create(&path)?), "time,weight", d.histogram.iter().copied())?;
    writeln!(ctx.out, "level {n}: {} branches, coverage {:.6}, histogram {}", d.branch_count, d.coverage, path.display())?;
    if let Some(c) = d.concentration {
        writeln!(ctx.out, "mass in [{:.1}, {:.1}] = {:.6}", c.lo, c.hi, c.mass)?;
    }
    Ok(())
}

fn cmd_ce(ctx: &mut Ctx<'_>, a: &str, steps: Option<usize>) -> Result<(), CliError> {
    let a = parameter(a)?;
    let steps = steps.unwrap_or(ctx.cfg.ce_steps);
    let nest = build_principal_nest(&a, &ctx.cfg.nest_config()).ok();
    let path = ctx.artifact(&format!("ce-{}.csv", file_tag(&a)))?;
    let mut w = BufWriter::new(File::create(&path)?);
    writeln!(w, "k,a_k")?;
    let mut failed = None;
    let rep = ce_estimator(&a, steps, &ctx.cfg.ce_config(), nest.as_ref(), |k, v| {
        if failed.is_none() {
            failed = writeln!(w, "{k},{v}").err();
        }
    })?;
    if let Some(e) = failed {
        return Err(e.into());
    }
    w.flush()?;
    writeln!(ctx.out, "a_N = {:.9} at N = {}", rep.last, rep.steps)?;
    writeln!(ctx.out, "min over k >= {}: {:.9} at k = {}", rep.k0, rep.liminf_estimate, rep.argmin)?;
    for (n, v, e) in &rep.nest_times {
        writeln!(ctx.out, "e_{n} = {e:.9} (v_{n} = {v})")?;
    }
    writeln!(ctx.out, "series: {}", path.display())?;
    Ok(())
}

fn cmd_recur(ctx: &mut Ctx<'_>, a: &str, steps: Option<usize>) -> Result<(), CliError> {
    let a = parameter(a)?;
    let steps = steps.unwrap_or(ctx.cfg.recurrence_steps);
    let rep = recurrence_exponent(&a, steps, &ctx.cfg.ce_config(), None)?;
    let path = ctx.artifact(&format!("recur-{}.csv", file_tag(&a)))?;
    write_csv(BufWriter::new(File::create(&path)?), "n,exponent", rep.records.iter().copied())?;
    writeln!(ctx.out, "recurrence estimate {:.6} at n = {} (N = {steps})", rep.estimate, rep.argmax)?;
    for c in &rep.counts {
        writeln!(
            ctx.out,
            "gamma {}: {} hits, last {:?}, stabilized {}",
            c.gamma,
            c.count,
            c.last_hit,
            c.stabilized(steps)
        )?;
    }
    writeln!(ctx.out, "records: {}", path.display())?;
    Ok(())
}

fn cmd_classify(ctx: &mut Ctx<'_>, a: &str) -> Result<(), CliError> {
    let a = parameter(a)?;
    let c = classify_parameter(&a, &ctx.cfg.param_budgets());
    let e = &c.evidence;
    let text = format!(
        "a = {}\nverdict = {}\nnest_depth = {}\norbit_steps = {}\nprecision = {}\n",
        c.a,
        c.verdict,
        e.nest_depth,
        e.orbit_steps,
        e.precision.map_or("-".to_string(), |p| p.to_string())
    );
    ctx.write_artifact(&format!("classify-{}.txt", file_tag(&a)), text.as_bytes())?;
    write!(ctx.out, "{text}")?;
    if let Verdict::Undecided { reason } = c.verdict {
        return Err(CliError::Budget(reason));
    }
    Ok(())
}

fn parse_range(s: &str) -> Result<(Parameter, Parameter), CliError> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| CliError::Usage(format!("range {s:?} is not lo:hi")))?;
    Ok((parameter(lo)?, parameter(hi)?))
}

fn cmd_sweep(ctx: &mut Ctx<'_>, range: &str, count: Option<usize>, stratified: bool) -> Result<(), CliError> {
    let (lo, hi) = parse_range(range)?;
    let mut sc = SweepConfig::new(lo, hi, count.unwrap_or(ctx.cfg.sweep_count), ctx.cfg.seed);
    sc.budgets = ctx.cfg.param_budgets();
    sc.threads = (ctx.cfg.threads > 0).then_some(ctx.cfg.threads);
    sc.stratified = stratified;
    let (records, summary) = sweep(&sc)?;
    let path = ctx.artifact("sweep.csv")?;
    write_sweep_csv(BufWriter::new(File::create(&path)?), &records)?;
    let spath = ctx.write_artifact("sweep-summary.txt", summary.to_text().as_bytes())?;
    write!(ctx.out, "{}", summary.to_text())?;
    writeln!(ctx.out, "records: {}\nsummary: {}", path.display(), spath.display())?;
    Ok(())
}

fn cmd_windows(ctx: &mut Ctx<'_>, a: &str, level: usize, grid: Option<usize>) -> Result<(), CliError> {
    let a = parameter(a)?;
    let wc = ctx.cfg.window_config();
    let fam = branch_windows(&a, level, grid.unwrap_or(ctx.cfg.window_grid), &wc)?;
    let nest = build_principal_nest(&a, &NestConfig { max_level: level, ..wc.nest.clone() })?;
    let mut text = String::from("quadnest-windows 1\n");
    writeln!(text, "\n[outer]\n{}", fam.outer.to_text()).unwrap();
    for (k, w) in fam.windows.iter().enumerate() {
        writeln!(text, "[window {k}]\n{}", w.to_text()).unwrap();
    }
    let path = ctx.write_artifact(&format!("windows-{}-L{level}.txt", file_tag(&a)), text.as_bytes())?;
    let ordered = fam.phase_order_consistent(&nest)?;
    writeln!(ctx.out, "level {level}: {} windows in [{}, {}]", fam.windows.len(), fam.outer.lo, fam.outer.hi)?;
    writeln!(ctx.out, "disjoint = {}, phase order = {ordered}, recurring = {}", fam.pairwise_disjoint(), fam.recurring.len())?;
    match phase_parameter_report(&nest, &fam) {
        Ok(rep) => {
            let rows = rep.rows.iter().map(|r| (r.k, format!("{},{},{}", r.phase, r.parameter, r.ln_distortion)));
            let rpath = ctx.artifact(&format!("phase-parameter-{}-L{level}.csv", file_tag(&a)))?;
            write_csv(BufWriter::new(File::create(&rpath)?), "k,phase_ratio,parameter_ratio,ln_distortion", rows)?;
            writeln!(ctx.out, "ratio distortion band (ln) = {:.6}: {}", rep.band, rpath.display())?;
        }
        Err(e) => writeln!(ctx.out, "no ratio table: {e}")?,
    }
    writeln!(ctx.out, "windows: {}", path.display())?;
    Ok(())
}

fn pair(s: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Usage(format!("interval {s:?} is not lo:hi"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    Ok((lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?))
}

fn cmd_capacity(ctx: &mut Ctx<'_>, intervals: &str, ambient: &str, gamma: f64) -> Result<(), CliError> {
    let comps = intervals.split(',').filter(|s| !s.trim().is_empty()).map(pair).collect::<Result<Vec<_>, _>>()?;
    let set = IntervalSet::new(pair(ambient)?, comps).map_err(|e| CliError::Usage(e.to_string()))?;
    let params = QsParameters::from_epsilon(gamma, ctx.cfg.epsilon).map_err(|e| CliError::Usage(e.to_string()))?;
    let b = capacity_bound(&set, &params);
    writeln!(ctx.out, "lebesgue ratio = {:.9}", set.lebesgue_ratio())?;
    writeln!(ctx.out, "capacity in [{:.9}, {:.9}] ({:?})", b.lower, b.upper, b.constant)?;
    Ok(())
}

fn cmd_markov(ctx: &mut Ctx<'_>, a: Option<&str>, level: usize, depth: usize) -> Result<(), CliError> {
    let a = match a {
        Some(s) => parameter(s)?,
        None => misiurewicz_sample(),
    };
    let nest = build_principal_nest(&a, &NestConfig { max_level: level + 1, ..ctx.cfg.nest_config() })?;
    let mp = markov_partition(&nest, level, depth)?;
    let mut text = format!("quadnest-markov 1\na = {a}\nlevel = {level}\ndepth = {depth}\npreperiod = {}\n", mp.preperiod);
    for p in &mp.pieces {
        let img: Vec<String> = p.image.iter().map(|i| i.to_string()).collect();
        writeln!(text, "{} {} -> {}{}", p.lo, p.hi, img.join(","), if p.covers_central { " +central" } else { "" }).unwrap();
    }
    let path = ctx.write_artifact(&format!("markov-{}-L{level}.txt", file_tag(&a)), text.as_bytes())?;
    writeln!(ctx.out, "{} pieces, preperiod {}, markov = {}", mp.pieces.len(), mp.preperiod, mp.is_markov())?;
    writeln!(ctx.out, "partition: {}", path.display())?;
    if !mp.is_markov() {
        return Err(CliError::Budget(format!("endpoint error 2^{:.1} above tolerance", mp.log2_endpoint_error)));
    }
    Ok(())
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let cfg = resolve_config(&cli)?;
    let cache = (!cli.no_cache).then(|| Cache::resolve(cfg.cache_dir.as_deref()));
    let mut ctx = Ctx { cfg, cache, out, err };
    match &cli.command {
        Command::Nest { a } => cmd_nest(&mut ctx, a),
        Command::Stats { a, level, samples } => cmd_stats(&mut ctx, a, *level, *samples),
        Command::Ce { a, steps } => cmd_ce(&mut ctx, a, *steps),
        Command::Recur { a, steps } => cmd_recur(&mut ctx, a, *steps),
        Command::Classify { a } => cmd_classify(&mut ctx, a),
        Command::Sweep { range, count, stratified } => cmd_sweep(&mut ctx, range, *count, *stratified),
        Command::Windows { a, level, grid } => cmd_windows(&mut ctx, a, *level, *grid),
        Command::Capacity { intervals, ambient, gamma } => cmd_capacity(&mut ctx, intervals, ambient, *gamma),
        Command::Markov { a, level, depth } => cmd_markov(&mut ctx, a.as_deref(), *level, *depth),
    }
}

/// Run with explicit streams; returns the exit status.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    match dispatch(cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.exit_code()
        }
    }
}

pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let (stdout, stderr) = (io::stdout(), io::stderr());
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}
