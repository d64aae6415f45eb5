//! Regular, stochastic candidate or renormalization suspect.

use quadnest::param::{classify_parameter, ParamBudgets};

fn main() {
    let budgets = ParamBudgets::default();
    for a in ["0", "1", "0.5", "1.401155189", "1.7", "1.8", "1.9"] {
        let c = classify_parameter(&a.parse().unwrap(), &budgets);
        println!("a = {a:>11}: {}", c.verdict);
    }
}
