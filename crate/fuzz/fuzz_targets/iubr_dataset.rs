#![no_main]

use autor_core::iubr::IubrDataset;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = IubrDataset::read_csv(data);
});
