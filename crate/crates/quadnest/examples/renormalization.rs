//! Renormalization towers near the period-doubling cascade and inside a
//! period-3 window.

use quadnest::nest::{renormalization_tower, NestConfig};
use quadnest::Parameter;

fn main() {
    for a in ["1.3", "1.38", "1.401155189", "1.786"] {
        let a: Parameter = a.parse().unwrap();
        match renormalization_tower(&a, &NestConfig::with_max_level(16), 5) {
            Ok((periods, status)) => println!("a = {a}: periods {periods:?}, then {status:?}"),
            Err(e) => println!("a = {a}: {e}"),
        }
    }
}
