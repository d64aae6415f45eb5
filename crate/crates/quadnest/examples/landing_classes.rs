//! Standard, excellent and cool landings, and very good returns.

use quadnest::nest::{build_principal_nest, NestConfig};
use quadnest::real::ln_abs;
use quadnest::stats::{classify_landing, level_return_flags, ClassifierConfig, LandingContext, ProfileConfig};

fn main() {
    let a = "1.7".parse().unwrap();
    let nest = build_principal_nest(&a, &NestConfig::with_max_level(3)).expect("nest");
    let cfg = ClassifierConfig::default();
    let c = nest.scaling_factors();
    let d = nest.critical_address(1).expect("address");
    let ctx = LandingContext { n: 1, ln_c: ln_abs(&c[1]), ln_c_prev: ln_abs(&c[0]) };
    let flags = classify_landing(&d.indices, &d.times, &ctx, &cfg, |_| true).expect("flags");
    println!("d(0) at level 1 has length {}: {:?}", d.len(), flags);
    let (ret, incl) = level_return_flags(&nest, 1, &cfg, &ProfileConfig::default()).expect("return flags");
    println!("level 1: {} branches, {} very good, {} good, VG within G: {}", ret.len(), incl.vg, incl.g, incl.holds());
}
