//! Lebesgue distribution of first return times to I_n.

use quadnest::nest::{build_principal_nest, NestConfig};
use quadnest::qs::QsParameters;
use quadnest::stats::return_time_distribution;

fn main() {
    let a = "1.8".parse().unwrap();
    let nest = build_principal_nest(&a, &NestConfig::default()).expect("nest");
    let n = nest.depth().saturating_sub(1).max(1);
    let d = return_time_distribution(&nest, n, 1000, 0.05, 7).expect("distribution");
    println!("level {n}: {} branches sampled, coverage {:.4}", d.branch_count, d.coverage);
    for (t, w) in d.histogram.iter().take(15) {
        println!("r = {t:5}  weight {w:.6}");
    }
    if let Some(c) = d.concentration {
        println!("mass with r in [{:.1}, {:.1}]: {:.4}", c.lo, c.hi, c.mass);
    }
    println!("alpha estimate {:?}", d.alpha_estimate);
    let k = d.concentration.map_or(30, |c| c.hi.ceil() as usize);
    let cap = d.capacity_tail(k, &QsParameters::default());
    println!("tail at {k}: Lebesgue {:.6}, capacity <= {:.6}", d.tail(k), cap.upper);
}
