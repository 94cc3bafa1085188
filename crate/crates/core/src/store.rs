//! Plain-text store: a directory of `<id>.elog` and `<id>.slog` files, an
//! optional `store.belog` and an `index.tsv` listing the logs.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::UNIX_EPOCH;

use thiserror::Error;

use crate::belog::BeLog;
use crate::id::ObjectId;
use crate::log::{Log, LogKind};
use crate::text::{parse_belog, parse_log, write_belog, write_log, TextError};

pub const BELOG_FILE: &str = "store.belog";
pub const INDEX_FILE: &str = "index.tsv";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Text { path: PathBuf, source: TextError },
    #[error("{path}: log `{id}` already loaded")]
    DuplicateLog { path: PathBuf, id: ObjectId },
    #[error("{0}: not a log, be-log or store directory")]
    UnknownFile(PathBuf),
    #[error("{path}: header says {found}, extension says {expected}")]
    KindMismatch { path: PathBuf, found: LogKind, expected: LogKind },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_path_buf(), source }
}

fn extension_kind(path: &Path) -> Option<LogKind> {
    match path.extension()?.to_str()? {
        "elog" => Some(LogKind::Episode),
        "slog" => Some(LogKind::Scenario),
        _ => None,
    }
}

pub fn file_name(log: &Log) -> String {
    format!("{}.{}", log.id, log.kind)
}

/// Logs and be-log held in memory.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Store {
    pub logs: BTreeMap<ObjectId, Log>,
    pub belog: BeLog,
}

impl Store {
    pub fn new() -> Self {
        Store::default()
    }

    /// Loads a store directory, a single log file or a be-log file.
    pub fn load(path: &Path) -> Result<Store, StoreError> {
        let mut store = Store::new();
        if path.is_dir() {
            let mut entries: Vec<PathBuf> =
                fs::read_dir(path).map_err(io_err(path))?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>().map_err(io_err(path))?;
            entries.sort();
            for p in entries {
                if extension_kind(&p).is_some() {
                    store.load_log_file(&p)?;
                } else if p.file_name().is_some_and(|n| n == BELOG_FILE) {
                    store.load_belog_file(&p)?;
                }
            }
        } else if extension_kind(path).is_some() {
            store.load_log_file(path)?;
        } else if path.extension().is_some_and(|e| e == "belog") {
            store.load_belog_file(path)?;
        } else {
            return Err(StoreError::UnknownFile(path.to_path_buf()));
        }
        Ok(store)
    }

    pub fn load_log_file(&mut self, path: &Path) -> Result<ObjectId, StoreError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let log = parse_log(&text).map_err(|source| StoreError::Text { path: path.to_path_buf(), source })?;
        if let Some(expected) = extension_kind(path) {
            if expected != log.kind {
                return Err(StoreError::KindMismatch { path: path.to_path_buf(), found: log.kind, expected });
            }
        }
        if self.logs.contains_key(&log.id) {
            return Err(StoreError::DuplicateLog { path: path.to_path_buf(), id: log.id });
        }
        let id = log.id.clone();
        self.logs.insert(id.clone(), log);
        Ok(id)
    }

    /// Merges the relations of a be-log file into the store's be-log.
    pub fn load_belog_file(&mut self, path: &Path) -> Result<(), StoreError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let b = parse_belog(&text).map_err(|source| StoreError::Text { path: path.to_path_buf(), source })?;
        for r in b.relations() {
            self.belog
                .insert(r.clone())
                .map_err(|e| StoreError::Text { path: path.to_path_buf(), source: e.into() })?;
        }
        Ok(())
    }

    /// Writes every log, the be-log (when not empty) and the index into
    /// `dir`. Files whose content is unchanged are left untouched.
    pub fn save(&self, dir: &Path) -> Result<(), StoreError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let mut index = String::from("id\tkind\tfile\tmtime\n");
        for log in self.logs.values() {
            let name = file_name(log);
            let path = dir.join(&name);
            write_if_changed(&path, &write_log(log))?;
            let mtime = fs::metadata(&path)
                .and_then(|m| m.modified())
                .map_err(io_err(&path))?
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs());
            index.push_str(&format!("{}\t{}\t{}\t{}\n", log.id, log.kind, name, mtime));
        }
        if !self.belog.is_empty() {
            write_if_changed(&dir.join(BELOG_FILE), &write_belog(&self.belog))?;
        }
        write_if_changed(&dir.join(INDEX_FILE), &index)
    }

    pub fn get(&self, id: &ObjectId) -> Option<&Log> {
        self.logs.get(id)
    }

    /// Adds or replaces a log.
    pub fn put(&mut self, log: Log) {
        self.logs.insert(log.id.clone(), log);
    }

    pub fn scenarios(&self) -> Vec<Log> {
        self.logs.values().filter(|l| l.kind == LogKind::Scenario).cloned().collect()
    }
}

fn write_if_changed(path: &Path, text: &str) -> Result<(), StoreError> {
    if fs::read(path).is_ok_and(|old| old == text.as_bytes()) {
        return Ok(());
    }
    fs::write(path, text).map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    const ELOG: &str = "#ELOG ep\nP a\nA x who=a cs=unknown cn=unknown ts=1\n";
    const SLOG: &str = "#SLOG sc\nP C\nA y who=C cs=unknown cn=unknown\n";
    const BELOG: &str = "B be3 a C\n";

    fn scratch(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("cognilog-store-{}-{name}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn directory_round_trip() {
        let dir = scratch("rt");
        fs::write(dir.join("ep.elog"), ELOG).unwrap();
        fs::write(dir.join("sc.slog"), SLOG).unwrap();
        fs::write(dir.join(BELOG_FILE), BELOG).unwrap();
        let store = Store::load(&dir).unwrap();
        assert_eq!(store.logs.len(), 2);
        assert_eq!(store.scenarios().len(), 1);
        let out = scratch("rt-out");
        store.save(&out).unwrap();
        for f in ["ep.elog", "sc.slog", BELOG_FILE] {
            assert_eq!(fs::read(dir.join(f)).unwrap(), fs::read(out.join(f)).unwrap(), "{f}");
        }
        let index = fs::read_to_string(out.join(INDEX_FILE)).unwrap();
        assert!(index.lines().nth(1).unwrap().starts_with("ep\telog\tep.elog\t"));
        assert_eq!(Store::load(&out).unwrap(), store);
        let _ = fs::remove_dir_all(&dir);
        let _ = fs::remove_dir_all(&out);
    }

    #[test]
    fn single_files_and_errors() {
        let dir = scratch("single");
        let p = dir.join("ep.elog");
        fs::write(&p, ELOG).unwrap();
        assert_eq!(Store::load(&p).unwrap().logs.len(), 1);
        let wrong = dir.join("ep.slog");
        fs::write(&wrong, ELOG).unwrap();
        assert!(matches!(Store::load(&wrong), Err(StoreError::KindMismatch { .. })));
        let bad = dir.join("bad.elog");
        fs::write(&bad, "#ELOG bad\nA x who=\n").unwrap();
        let msg = Store::load(&bad).unwrap_err().to_string();
        assert!(msg.contains("bad.elog") && msg.contains("line 2"), "{msg}");
        assert!(matches!(Store::load(&dir.join("x.txt")), Err(StoreError::UnknownFile(_))));
        let mut s = Store::new();
        s.load_log_file(&p).unwrap();
        assert!(matches!(s.load_log_file(&p), Err(StoreError::DuplicateLog { .. })));
        let _ = fs::remove_dir_all(&dir);
    }
}
