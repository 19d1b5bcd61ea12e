#![no_main]

use libfuzzer_sys::fuzz_target;
use loravg::space::BuildOptions;
use loravg::{MetricMeasureSpace, SpaceDescription};

fuzz_target!(|data: &[u8]| {
    let Ok(desc) = serde_json::from_slice::<SpaceDescription>(data) else {
        return;
    };
    let opts = BuildOptions {
        max_atoms: 48,
        skip_triangle_check: false,
    };
    let Ok(space) = MetricMeasureSpace::build_with(&desc, opts) else {
        return;
    };
    for x in 0..space.len() {
        assert_eq!(space.dist(x, x), 0.0);
        for y in 0..space.len() {
            assert_eq!(space.dist(x, y), space.dist(y, x));
        }
    }
    // matrix form survives a JSON round trip bit for bit
    let text = serde_json::to_string(&space.to_description()).unwrap();
    let back: SpaceDescription = serde_json::from_str(&text).unwrap();
    let rebuilt = MetricMeasureSpace::build_with(
        &back,
        BuildOptions {
            skip_triangle_check: true,
            ..opts
        },
    )
    .unwrap();
    assert_eq!(rebuilt, space);
});
