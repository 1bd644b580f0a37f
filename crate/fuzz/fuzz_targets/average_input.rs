#![no_main]
use libfuzzer_sys::fuzz_target;
use trframe::angular::PhaseConvention;
use trframe_cli::documents::parse_average_input;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(input) = parse_average_input(text) {
        let _ = input.to_density(1e-9, PhaseConvention::LandauLifshitz);
    }
});
