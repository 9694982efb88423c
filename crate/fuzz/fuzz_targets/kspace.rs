#![no_main]

use libfuzzer_sys::fuzz_target;
use swcs::io::{parse_kspace, write_kspace};

fuzz_target!(|data: &[u8]| {
    if let Ok(y) = parse_kspace(data) {
        // Anything accepted must write back to the same bytes.
        let mut out = Vec::new();
        write_kspace(&mut out, &y).unwrap();
        assert_eq!(out, data);
    }
});
