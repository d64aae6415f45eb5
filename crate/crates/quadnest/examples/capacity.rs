//! Capacity bounds, tree composition and the large deviation estimate.

use quadnest::qs::{branch_pullback_bound, capacity_bound, large_deviation_bound, tree_compose, IntervalSet, QsParameters};

fn main() {
    let params = QsParameters::from_epsilon(1.01, 0.05).unwrap();
    let x = IntervalSet::new((0.0, 1.0), vec![(0.1, 0.15), (0.4, 0.42), (0.8, 0.9)]).unwrap();
    let b = capacity_bound(&x, &params);
    println!("Lebesgue {:.4}, capacity in [{:.4}, {:.4}]", x.lebesgue_ratio(), b.lower, b.upper);
    let inner = capacity_bound(&IntervalSet::new((0.0, 1.0), vec![(0.3, 0.35)]).unwrap(), &params);
    let t = tree_compose(&b, &inner, None);
    println!("tree composite <= {:.6}", t.upper);
    println!("pulled back through level 2: <= {:.6}", branch_pullback_bound(&t, 2).upper);
    for k in [1, 3, 6] {
        println!("m = 12, k = {k}: {:.3e}", large_deviation_bound(12, k, 0.01, 1).unwrap());
    }
}
