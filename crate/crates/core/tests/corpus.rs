//! Replays the checked-in fuzz corpus through the config parser on the
//! stable toolchain: every seed must parse cleanly or error, never panic.

use std::fs;
use std::path::PathBuf;

use dbarrier::config::RunConfig;

#[test]
fn corpus_seeds_never_panic() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus/config_json");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).expect("corpus directory exists") {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        let _ = RunConfig::from_json(&text);
        seen += 1;
    }
    assert!(seen >= 5, "expected the checked-in seeds, found {seen}");
}

#[test]
fn good_seeds_parse_and_bad_seeds_error() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus/config_json");
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let parsed = RunConfig::from_json(&fs::read_to_string(&path).unwrap());
        if name.starts_with("bad_") {
            assert!(parsed.is_err(), "{name} should be rejected");
        } else {
            assert!(parsed.is_ok(), "{name} should parse: {:?}", parsed.err());
        }
    }
}
