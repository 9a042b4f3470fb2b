#![no_main]

use autor_core::amc::AmcDataset;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = AmcDataset::read_csv(data);
});
