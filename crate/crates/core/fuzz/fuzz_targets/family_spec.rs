#![no_main]

use libfuzzer_sys::fuzz_target;
use loravg::compactness::{FamilySpec, MAX_FAMILY_MEMBERS};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(family) = text.parse::<FamilySpec>() {
        assert!(family.step > 0 && family.start <= family.end);
        assert!(family.lengths().count() <= MAX_FAMILY_MEMBERS);
    }
});
