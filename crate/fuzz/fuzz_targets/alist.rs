#![no_main]

use autor_core::ldpc::ParityCheckMatrix;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(h) = ParityCheckMatrix::from_alist(text) {
        let again = ParityCheckMatrix::from_alist(&h.to_alist()).expect("re-parse of emitted alist");
        assert_eq!(h, again);
    }
});
