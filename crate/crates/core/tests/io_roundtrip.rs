mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pwa_lyap::benchmarks;
use pwa_lyap::io::{parse_partition, partition_to_string};

use common::random_partition;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partitions_round_trip_bit_exactly(seed in any::<u64>(), dim in 2usize..=4) {
        let p = random_partition(&mut ChaCha8Rng::seed_from_u64(seed), dim, 3);
        let text = partition_to_string(&p);
        let q = parse_partition(&text, "mem").unwrap();
        prop_assert_eq!(q.cells(), p.cells());
        prop_assert_eq!(q.vertices().points(), p.vertices().points());
        prop_assert_eq!(partition_to_string(&q), text);
    }
}

/// The JSON files under `data/` are exactly what the built-in generators
/// produce.
#[test]
fn shipped_data_matches_generators() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    for (name, p) in benchmarks::shipped_benchmarks() {
        let path = dir.join(format!("{name}.json"));
        let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let q = parse_partition(&text, &path.display().to_string()).unwrap();
        assert_eq!(q.cells(), p.cells(), "{name}");
        assert_eq!(q.vertices().points(), p.vertices().points(), "{name}");
        assert_eq!(q.metadata, p.metadata, "{name}");
    }
}

