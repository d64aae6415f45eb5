//! A small seeded sweep of (1.75, 2).

use quadnest::param::{sweep, SweepConfig};
use quadnest::Parameter;

fn main() {
    let mut cfg = SweepConfig::new(Parameter::ratio(7, 4), Parameter::ratio(2, 1), 24, 1);
    cfg.budgets.recurrence_steps = 100_000;
    let (records, summary) = sweep(&cfg).expect("sweep");
    for c in &records {
        println!("{:.9} {}", c.a.to_f64(), c.verdict);
    }
    print!("{}", summary.to_text());
}
