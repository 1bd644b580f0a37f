#![no_main]
use libfuzzer_sys::fuzz_target;
use trframe_cli::documents::parse_result_document;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(doc) = parse_result_document(text) {
        let again = parse_result_document(&doc.to_json()).unwrap();
        assert_eq!(again.to_json(), doc.to_json());
    }
});
