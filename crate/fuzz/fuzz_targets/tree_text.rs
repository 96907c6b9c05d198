#![no_main]

use libfuzzer_sys::fuzz_target;
use rnatreedit::tree::{parse_tree, IndexedTree};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(t) = parse_tree(text) {
        let again = parse_tree(&t.to_text()).expect("written tree parses");
        assert!(again.same_shape_and_labels(&t));
        let _ = IndexedTree::new(t);
    }
});
