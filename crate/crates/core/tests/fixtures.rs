use std::fs;
use std::path::PathBuf;

use cognilog::store::Store;
use cognilog::text::{parse_functors, write_belog, write_functor, write_log};

fn fixture_paths() -> Vec<PathBuf> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut paths: Vec<PathBuf> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    paths
}

#[test]
fn fixtures_are_in_canonical_form() {
    for path in fixture_paths() {
        let text = fs::read_to_string(&path).unwrap();
        let ext = path.extension().unwrap().to_str().unwrap();
        let written = match ext {
            "functor" => parse_functors(&text).unwrap().iter().map(|f| write_functor(f, None)).collect::<String>(),
            "belog" => write_belog(&Store::load(&path).unwrap().belog),
            _ => {
                let store = Store::load(&path).unwrap();
                let log = store.logs.values().next().unwrap();
                assert_eq!(path.file_stem().unwrap().to_str().unwrap(), log.id.as_str());
                assert!(log.validate().is_valid(), "{}", path.display());
                write_log(log)
            }
        };
        assert_eq!(written, text, "{}", path.display());
    }
}
