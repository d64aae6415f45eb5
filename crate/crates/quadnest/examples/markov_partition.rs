//! Markov partition of I \ I_1 at a parameter where ∂I_1 is preperiodic.

use quadnest::nest::{build_principal_nest, markov_partition, misiurewicz_sample, NestConfig};

fn main() {
    let a = misiurewicz_sample();
    let nest = build_principal_nest(&a, &NestConfig::with_max_level(2)).expect("nest");
    let mp = markov_partition(&nest, 1, 8).expect("partition");
    println!("a ≈ {:.15}, preperiod {}, {} pieces", a.to_f64(), mp.preperiod, mp.pieces.len());
    println!("endpoint error 2^{:.1} (tolerance 2^{:.1})", mp.log2_endpoint_error, mp.log2_tolerance);
    for (i, p) in mp.pieces.iter().enumerate().take(12) {
        println!("{i:3}: [{:+.9}, {:+.9}] -> {:?}{}", p.lo.to_f64(), p.hi.to_f64(), p.image, if p.covers_central { " + I_2" } else { "" });
    }
}
