#![no_main]

use autor_core::sigchain::read_iq_csv;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = read_iq_csv(data);
});
