//! Configuration text and the artifact cache.

use quadnest::cache::{Cache, CacheKey, Lookup, ENGINE_VERSION};
use quadnest::config::RunConfig;
use quadnest::nest::{build_principal_nest, NestDocument};

fn main() {
    let cfg = RunConfig::from_text("max_level = 3\nseed = 11\n").expect("config");
    let dir = tempfile::tempdir().expect("tempdir");
    let cache = Cache::new(dir.path());
    let a = "1.7".parse().unwrap();
    let key = CacheKey::new("nest", "1.7", cfg.max_level, ENGINE_VERSION);
    for round in 0..2 {
        let text = match cache.lookup(&key).expect("lookup") {
            Lookup::Hit(bytes) => String::from_utf8(bytes).unwrap(),
            _ => {
                let nest = build_principal_nest(&a, &cfg.nest_config()).expect("nest");
                let text = NestDocument::from_nest(&nest).to_text();
                cache.store(&key, text.as_bytes()).expect("store");
                text
            }
        };
        println!("round {round}: {} bytes", text.len());
    }
}
