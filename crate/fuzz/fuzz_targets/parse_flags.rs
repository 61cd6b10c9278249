#![no_main]

use libfuzzer_sys::fuzz_target;
use momentdet::arith::parse_complex_literal;
use momentdet::nevanlinna::parse_phi;

// --z, --w and --phi values
fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    let _ = parse_complex_literal(s);
    let _ = parse_phi(s);
});
