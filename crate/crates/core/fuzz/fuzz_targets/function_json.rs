#![no_main]

use libfuzzer_sys::fuzz_target;
use loravg::averaging::average;
use loravg::norms::lorentz_norm;
use loravg::rearrange::{distribution_function, rearrangement};
use loravg::{FunctionOnSpace, MetricMeasureSpace, NormSpec};

fuzz_target!(|data: &[u8]| {
    let Ok(f) = serde_json::from_slice::<FunctionOnSpace>(data) else {
        return;
    };
    if f.is_empty() || f.len() > 256 {
        return;
    }
    let space = MetricMeasureSpace::lattice(f.len() - 1);
    let Ok(fs) = rearrangement(&space, &f) else {
        return;
    };
    assert!(fs.levels().windows(2).all(|w| w[0] > w[1]));
    let _ = distribution_function(&space, &f);
    let _ = fs.maximal_profile();
    for spec in [
        NormSpec::plain(2.0, 1.0),
        NormSpec::plain(3.0, f64::INFINITY),
        NormSpec::double_star(1.5, 2.5),
    ] {
        let _ = lorentz_norm(&space, &f, &spec.unwrap());
    }
    let _ = average(&space, &f, 1.0);
});
