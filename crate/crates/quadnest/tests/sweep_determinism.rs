use quadnest::param::{sweep, write_sweep_csv, SweepConfig};
use quadnest::Parameter;

fn csv(cfg: &SweepConfig) -> String {
    let (records, _) = sweep(cfg).unwrap();
    let mut buf = Vec::new();
    write_sweep_csv(&mut buf, &records).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn seeded_sweeps_are_reproducible_across_thread_counts() {
    let mut cfg = SweepConfig::new(Parameter::ratio(7, 4), Parameter::ratio(2, 1), 12, 21);
    cfg.budgets.recurrence_steps = 20_000;
    cfg.budgets.ce_steps = 20_000;
    cfg.budgets.nest.budgets.orbit_steps = 2_000;
    let one = csv(&SweepConfig { threads: Some(1), ..cfg.clone() });
    let many = csv(&SweepConfig { threads: Some(3), ..cfg.clone() });
    assert_eq!(one, many);
    assert_eq!(one, csv(&cfg));
    let other = csv(&SweepConfig { seed: 22, ..cfg });
    assert_ne!(one, other);
}

#[test]
fn summary_counts_add_up() {
    let cfg = SweepConfig { stratified: true, ..SweepConfig::new(Parameter::ratio(-1, 4), Parameter::ratio(3, 2), 60, 3) };
    let (records, summary) = sweep(&cfg).unwrap();
    assert_eq!(records.len(), 60);
    assert_eq!(summary.regular + summary.stochastic + summary.renormalization + summary.undecided, 60);
    assert!(summary.regular >= 40, "{}", summary.to_text());
    let fractions: f64 = ["regular", "stochastic", "renormalization", "undecided"].iter().map(|t| summary.fraction(t)).sum();
    assert!((fractions - 1.0).abs() < 1e-12);
    assert!(sweep(&SweepConfig::new(Parameter::ratio(1, 1), Parameter::ratio(3, 1), 5, 0)).is_err());
}
