#![no_main]

use libfuzzer_sys::fuzz_target;
use momentdet::poly::{format_rational_polynomial, parse_polynomial};

fuzz_target!(|data: &[u8]| {
    let Some((&d, rest)) = data.split_first() else {
        return;
    };
    let Ok(s) = std::str::from_utf8(rest) else {
        return;
    };
    let dim = 1 + (d % 4) as usize;
    if let Ok(p) = parse_polynomial(s, dim) {
        let again = parse_polynomial(&format_rational_polynomial(&p), dim).expect("re-parse of formatted polynomial");
        assert_eq!(p, again);
    }
});
