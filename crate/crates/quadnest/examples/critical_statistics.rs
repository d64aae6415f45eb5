//! s_n, v_n, τ_n, c_n and the identities tying them together.

use quadnest::nest::{build_principal_nest, NestConfig};
use quadnest::stats::{critical_statistics, scaling_sequence, statistics_to_text};
use quadnest::Parameter;

fn main() {
    let a: Parameter = std::env::args().nth(1).unwrap_or_else(|| "1.8".into()).parse().unwrap();
    let nest = build_principal_nest(&a, &NestConfig::default()).expect("nest");
    let st = critical_statistics(&nest).expect("statistics");
    for l in &st.levels {
        println!("n = {}: v = {:?} s = {:?} tau = {:?} ln 1/c = {:?}", l.n, l.v, l.s, l.tau, l.ln_inv_c);
    }
    println!("additivity: {:?}", st.diagnostics.additivity);
    let sc = scaling_sequence(&nest).expect("scaling");
    println!("torrential ratios: {:?}", sc.torrential_ratios);
    print!("{}", statistics_to_text(&st).lines().take(4).collect::<Vec<_>>().join("\n"));
    println!();
}
