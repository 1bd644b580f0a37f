#![no_main]
use libfuzzer_sys::fuzz_target;
use trframe::angular::PhaseConvention;
use trframe::standardform::standardize;
use trframe_cli::documents::parse_state_document;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(doc) = parse_state_document(text) else { return };
    let _ = doc.to_state(1e-9);
    for conv in [PhaseConvention::LandauLifshitz, PhaseConvention::Sakurai] {
        if let Ok(psi) = doc.to_self_conjugate_state(1e-9, conv) {
            // accepted states are normalized, so standardization must succeed
            let _ = standardize(&psi).unwrap();
        }
    }
});
