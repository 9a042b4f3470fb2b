#![no_main]

use autor_core::ldpc::read_llr_csv;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&n, rest)) = data.split_first() else { return };
    let _ = read_llr_csv(rest, usize::from(n));
});
