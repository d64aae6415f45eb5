//! Collet-Eckmann averages and the polynomial recurrence exponent.

use quadnest::stats::{ce_estimator, recurrence_exponent, CeConfig};
use quadnest::Parameter;

fn main() {
    let cfg = CeConfig::default();
    for a in ["2", "1.8", "1.7"] {
        let a: Parameter = a.parse().unwrap();
        let ce = ce_estimator(&a, 100_000, &cfg, None, |_, _| {}).expect("ce");
        let rec = recurrence_exponent(&a, 1_000_000, &cfg, None).expect("recurrence");
        let hits: Vec<_> = rec.counts.iter().map(|c| (c.gamma, c.count)).collect();
        println!("a = {a}: min a_k = {:.5}, recurrence {:.4}, hits {hits:?}", ce.liminf_estimate, rec.estimate);
    }
}
