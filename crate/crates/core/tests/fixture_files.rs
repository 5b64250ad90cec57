//! The JSON files under `fixtures/` are generated from the in-code
//! fixtures; set `DCL_BLESS=1` to rewrite them.

use std::path::PathBuf;

use dcl_core::fixtures::shipped_files;
use dcl_core::io::{object_json, to_pretty, Workspace};

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

#[test]
fn shipped_files_are_current() {
    let bless = std::env::var_os("DCL_BLESS").is_some();
    for (name, value) in shipped_files().unwrap() {
        let path = dir().join(&name);
        let expected = to_pretty(&value);
        if bless {
            std::fs::write(&path, &expected).unwrap();
        }
        let found = std::fs::read_to_string(&path).unwrap_or_default();
        assert!(found == expected, "{name} is stale; rerun with DCL_BLESS=1");
    }
}

#[test]
fn shipped_files_roundtrip() {
    for (name, _) in shipped_files().unwrap() {
        let path = dir().join(&name);
        let mut ws = Workspace::new();
        let first = ws.load_file(&path).unwrap();
        let text = to_pretty(&object_json(&first));
        let second = Workspace::new().load_str(&text, "again").unwrap();
        assert_eq!(first, second, "{name}");
    }
}
