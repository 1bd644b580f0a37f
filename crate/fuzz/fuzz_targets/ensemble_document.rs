#![no_main]
use libfuzzer_sys::fuzz_target;
use trframe_cli::documents::parse_ensemble_document;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(doc) = parse_ensemble_document(text) {
        if let Ok(e) = doc.to_ensemble() {
            assert!(e.average_tau().is_finite());
        }
    }
});
