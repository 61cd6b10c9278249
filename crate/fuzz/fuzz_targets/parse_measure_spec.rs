#![no_main]

use libfuzzer_sys::fuzz_target;
use momentdet::measures::parse_measure_spec;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    // Anything accepted must survive a write/read cycle unchanged.
    if let Ok(spec) = parse_measure_spec(s) {
        let again = parse_measure_spec(&spec.to_json().to_string()).expect("re-parse of written spec");
        assert_eq!(spec, again);
    }
});
