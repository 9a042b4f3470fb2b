#![no_main]

use autor_core::ldpc::BaseGraph;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = BaseGraph::parse(text);
    }
});
