//! Parameter windows of level-1 branches and their phase order.

use quadnest::nest::{build_principal_nest, NestConfig};
use quadnest::param::{branch_windows, phase_parameter_report, WindowConfig};
use quadnest::Parameter;

fn main() {
    let a: Parameter = "1.7".parse().unwrap();
    let cfg = WindowConfig::default();
    let fam = branch_windows(&a, 1, 200, &cfg).expect("windows");
    let nest = build_principal_nest(&a, &NestConfig::with_max_level(2)).expect("nest");
    println!("J_1 = [{:.9}, {:.9}]", fam.outer.lo.to_f64(), fam.outer.hi.to_f64());
    for w in &fam.windows {
        println!("[{:.12}, {:.12}] {}", w.lo.to_f64(), w.hi.to_f64(), w.combinatorics);
    }
    println!("disjoint {}, phase order {:?}", fam.pairwise_disjoint(), fam.phase_order_consistent(&nest));
    let rep = phase_parameter_report(&nest, &fam).expect("report");
    println!("ln distortion band {:.4} over {} triples", rep.band, rep.rows.len());
}
