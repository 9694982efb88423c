#![no_main]

use libfuzzer_sys::fuzz_target;
use swcs::trajectories::{read_csv, write_csv};

fuzz_target!(|data: &[u8]| {
    if let Ok(trajs) = read_csv(data, 1) {
        let mut out = Vec::new();
        write_csv(&mut out, &trajs).unwrap();
        let again = read_csv(out.as_slice(), 1).unwrap();
        assert_eq!(again, trajs);
    }
});
