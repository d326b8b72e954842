#![no_main]

use libfuzzer_sys::fuzz_target;
use reward_route::oracle::decode_truncation;

// Byte 0 picks the waypoint count and end mode; the rest is the vector.
fuzz_target!(|data: &[u8]| {
    let Some((&head, rest)) = data.split_first() else { return };
    let count = usize::from(head & 0x0f);
    let fixed_end = head & 0x80 != 0;
    let x: Vec<usize> = rest.iter().map(|&b| usize::from(b)).collect();
    if let Ok(seq) = decode_truncation(&x, count, fixed_end) {
        let inner = if fixed_end { &seq[1..seq.len() - 1] } else { &seq[1..] };
        assert!(seq[0] == 0);
        assert!(inner.iter().all(|&l| (1..=count).contains(&l)));
        let mut seen = inner.to_vec();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), inner.len());
    }
});
