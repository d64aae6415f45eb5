//! Hyperbolicity λ_n(j) and distortion of return branches.

use quadnest::nest::{build_principal_nest, NestConfig};
use quadnest::stats::{hyperbolicity_profile, ProfileConfig};

fn main() {
    let a = "1.7".parse().unwrap();
    let nest = build_principal_nest(&a, &NestConfig::with_max_level(3)).expect("nest");
    for n in 1..=2 {
        let prof = hyperbolicity_profile(&nest, n, &ProfileConfig::default()).expect("profile");
        println!(
            "level {n}: lambda {:?}, max ln distortion {:.3} (bound {:.3}), {} warnings",
            prof.lambda,
            prof.max_ln_distortion,
            prof.ln_distortion_bound,
            prof.warnings.len()
        );
        for b in prof.branches.iter().take(5) {
            println!("  j = {:4} r = {:4} lambda {:.4}", b.index, b.return_time, b.lambda_refined);
        }
    }
}
