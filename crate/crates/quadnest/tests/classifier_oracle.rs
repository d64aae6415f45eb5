mod common;

use common::{landing_case, naive_landing, naive_return, return_case};
use quadnest::stats::{classify_landing, classify_return_branch, vg_within_g, BranchContext, LandingContext};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sorted<T: Ord + Clone>(v: &[T]) -> Vec<T> {
    let mut v = v.to_vec();
    v.sort();
    v
}

#[test]
fn landing_flags_match_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut seen = [0usize; 3];
    for case in 0..1000 {
        let t = landing_case(&mut rng);
        let vg = |j: i64| t.good.contains(&j);
        let ctx = LandingContext { n: t.n, ln_c: t.ln_c, ln_c_prev: t.ln_c_prev };
        let got = classify_landing(&t.indices, &t.times, &ctx, &t.cfg, vg).unwrap();
        let want = naive_landing(&t.indices, &t.times, t.n, t.ln_c.exp(), t.ln_c_prev.exp(), &t.cfg, &vg);
        assert_eq!((got.ls, got.le, got.lc), (want.ls, want.le, want.lc), "case {case}");
        assert_eq!(sorted(&got.violated), sorted(&want.violated), "case {case}");
        assert!(!got.lc || got.le);
        assert!(!got.le || got.ls);
        seen[0] += got.ls as usize;
        seen[1] += got.le as usize;
        seen[2] += got.lc as usize;
    }
    // the generator must exercise every class
    assert!(seen.iter().all(|&s| s > 20 && s < 980), "{seen:?}");
}

#[test]
fn return_flags_match_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut vg, mut g) = (0, 0);
    let mut all = Vec::new();
    for case in 0..1000 {
        let t = return_case(&mut rng);
        let ctx = BranchContext { level: t.level, ln_c_prev: t.ln_c_prev, lambda_n0: t.lambda_n0 };
        let got = classify_return_branch(&t.ev, &ctx, &t.cfg).unwrap();
        let want = naive_return(&t.ev, t.level, t.ln_c_prev.exp(), t.lambda_n0, &t.cfg);
        assert_eq!((got.vg, got.g), (want.vg, want.g), "case {case}");
        assert_eq!(sorted(&got.violated), sorted(&want.violated), "case {case}");
        vg += got.vg as usize;
        g += got.g as usize;
        all.push(got);
    }
    assert!(vg > 50 && vg < 950 && g > 50 && g < 950, "vg {vg}, g {g}");
    let report = vg_within_g(&all);
    assert_eq!(report.vg, vg);
    assert_eq!(report.g, g);
}
