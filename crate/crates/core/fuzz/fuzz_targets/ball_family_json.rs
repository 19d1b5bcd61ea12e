#![no_main]

use libfuzzer_sys::fuzz_target;
use loravg::{BallSpec, MetricMeasureSpace};

fuzz_target!(|data: &[u8]| {
    let Ok(family) = serde_json::from_slice::<Vec<BallSpec>>(data) else {
        return;
    };
    if family.len() > 64 {
        return;
    }
    let space = MetricMeasureSpace::lattice(32);
    if let Ok(kept) = space.vitali_subfamily(&family) {
        assert!(space.pairwise_disjoint(&kept));
        assert!(space.enlargement_covers(&kept, 5.0, &family));
    }
});
