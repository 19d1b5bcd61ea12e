#![no_main]

use libfuzzer_sys::fuzz_target;
use loravg::norms::norm_of_rearrangement;
use loravg::plot::step_svg;
use loravg::{NormSpec, StepFunction};

fuzz_target!(|data: &[u8]| {
    let Ok(sf) = serde_json::from_slice::<StepFunction>(data) else {
        return;
    };
    assert!(sf.levels().windows(2).all(|w| w[0] > w[1]));
    let profile = sf.maximal_profile();
    for &t in sf.breakpoints().iter().skip(1) {
        let _ = profile.eval(t);
    }
    for spec in [NormSpec::plain(2.0, 2.0), NormSpec::double_star(2.0, 3.5)] {
        let _ = norm_of_rearrangement(&sf, &spec.unwrap());
    }
    let svg = step_svg(&sf, "fuzz");
    assert!(svg.ends_with("</svg>\n"));
});
