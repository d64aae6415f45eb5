//! Build the principal nest of f_a and print its combinatorics.
//!
//! cargo run --release --example principal_nest -- 1.7 4

use quadnest::nest::{build_principal_nest, NestConfig, NestDocument};
use quadnest::real::log2_abs;
use quadnest::Parameter;

fn main() {
    let mut args = std::env::args().skip(1);
    let a: Parameter = args.next().unwrap_or_else(|| "1.7".into()).parse().expect("parameter");
    let max_level: usize = args.next().map_or(4, |s| s.parse().expect("level"));
    let nest = build_principal_nest(&a, &NestConfig::with_max_level(max_level)).expect("nest");
    println!("a = {a}, precision {} bits, stop {}", nest.precision, nest.stop);
    for l in &nest.levels {
        let tau = nest.tau(l.n).map_or("-".to_string(), |t| t.to_string());
        println!(
            "I_{}: log2 u = {:9.3}  v = {:?}  s = {:?}  tau = {tau}  central = {:?}  certified = {}",
            l.n,
            log2_abs(&l.half_width),
            l.v,
            nest.s(l.n),
            nest.is_central(l.n),
            l.certificate.verified
        );
    }
    let doc = NestDocument::from_nest(&nest);
    let text = doc.to_text();
    assert_eq!(NestDocument::parse(&text).expect("parse"), doc);
    println!("document: {} bytes, round trip exact", text.len());
}
