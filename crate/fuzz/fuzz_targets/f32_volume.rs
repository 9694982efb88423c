#![no_main]

use libfuzzer_sys::fuzz_target;
use swcs::io::{parse_complex_image, parse_f32_volume, parse_real_image};

fuzz_target!(|data: &[u8]| {
    let Some((&n, body)) = data.split_first() else { return };
    let n = usize::from(n % 16);
    if let Ok(frames) = parse_f32_volume(body, n.max(1)) {
        assert!(frames.iter().all(|f| f.len() == n.max(1)));
    }
    let _ = parse_real_image(body, n);
    let _ = parse_complex_image(body, n);
});
