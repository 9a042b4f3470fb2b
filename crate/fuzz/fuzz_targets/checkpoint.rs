#![no_main]

use autor_core::nncore::{Array, Checkpoint};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(ck) = Checkpoint::from_json(text) else { return };
    let json = ck.to_json().expect("serialize parsed checkpoint");
    assert_eq!(Checkpoint::from_json(&json).expect("re-parse"), ck);
    if let Some(net) = ck.network().ok().filter(|n| n.input_size() <= 1 << 16) {
        let _ = net.predict(&Array::from_vec(vec![0.0; net.input_size()]));
    }
});
