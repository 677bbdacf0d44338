use std::fs::OpenOptions;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{apply_in_memory, check, Conflict, EditError, EditSet};
use crate::model::Program;

pub const BACKUP_DIR: &str = ".plref-backup";
pub const LOCK_FILE: &str = ".plref.lock";
const TMP_SUFFIX: &str = ".plref-tmp";

/// Filesystem operations used by `apply`; swapped out in tests to inject
/// failures.
pub trait Fs {
    fn read(&self, path: &Path) -> io::Result<Vec<u8>>;
    fn write(&self, path: &Path, data: &[u8]) -> io::Result<()>;
    fn rename(&self, from: &Path, to: &Path) -> io::Result<()>;
    fn remove(&self, path: &Path) -> io::Result<()>;
    fn create_dir_all(&self, path: &Path) -> io::Result<()>;
    fn remove_dir_all(&self, path: &Path) -> io::Result<()>;
    fn exists(&self, path: &Path) -> bool;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RealFs;

impl Fs for RealFs {
    fn read(&self, path: &Path) -> io::Result<Vec<u8>> {
        std::fs::read(path)
    }
    fn write(&self, path: &Path, data: &[u8]) -> io::Result<()> {
        std::fs::write(path, data)
    }
    fn rename(&self, from: &Path, to: &Path) -> io::Result<()> {
        std::fs::rename(from, to)
    }
    fn remove(&self, path: &Path) -> io::Result<()> {
        std::fs::remove_file(path)
    }
    fn create_dir_all(&self, path: &Path) -> io::Result<()> {
        std::fs::create_dir_all(path)
    }
    fn remove_dir_all(&self, path: &Path) -> io::Result<()> {
        match std::fs::remove_dir_all(path) {
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(()),
            r => r,
        }
    }
    fn exists(&self, path: &Path) -> bool {
        path.exists()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApplyReport {
    pub files_written: Vec<String>,
    pub files_deleted: Vec<String>,
    pub backup_dir: String,
    pub backups: Vec<String>,
    pub new_version: Option<u64>,
}

struct Lock(PathBuf);

impl Lock {
    fn acquire(root: &Path) -> Result<Lock, EditError> {
        let path = root.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(Lock(path)),
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => {
                Err(EditError::Locked(path.display().to_string()))
            }
            Err(e) => Err(io_err(&path, e)),
        }
    }
}

impl Drop for Lock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.0);
    }
}

fn io_err(path: &Path, e: io::Error) -> EditError {
    EditError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn tmp_path(p: &Path) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(TMP_SUFFIX);
    PathBuf::from(s)
}

// Undo step: restore the original bytes, or remove a file that did not exist.
struct Undo {
    path: PathBuf,
    original: Option<Vec<u8>>,
}

/// Writes every change or none: originals are backed up, new contents are
/// staged in temporary files, then renamed into place; a failure while
/// committing restores what was already replaced.
pub fn apply(es: &EditSet, program: &Program, fs: &dyn Fs) -> Result<ApplyReport, EditError> {
    let root = program.root.clone().ok_or(EditError::NoRoot)?;
    let conflicts = check(es, program);
    if !conflicts.is_empty() {
        return Err(EditError::Conflicts(conflicts));
    }
    let applied = apply_in_memory(es, program)?;
    let _lock = Lock::acquire(&root)?;

    let mut conflicts = Vec::new();
    for ch in &applied.changes {
        if let Some(old_path) = &ch.old_path {
            let p = root.join(old_path);
            let on_disk = fs.read(&p).map_err(|e| io_err(&p, e))?;
            if Some(on_disk.as_slice()) != ch.old.as_deref().map(str::as_bytes) {
                conflicts.push(Conflict::ChangedOnDisk { file: old_path.clone() });
            }
        }
        if let Some(new_path) = &ch.new_path {
            if ch.old_path.as_ref() != Some(new_path) && fs.exists(&root.join(new_path)) {
                conflicts.push(Conflict::FileExists { file: new_path.clone() });
            }
        }
    }
    if !conflicts.is_empty() {
        return Err(EditError::Conflicts(conflicts));
    }

    // backups go to a scratch directory that replaces the previous backup
    // only once every file is committed
    let backup_dir = root.join(BACKUP_DIR);
    let fresh = root.join(format!("{BACKUP_DIR}.new"));
    let retired = root.join(format!("{BACKUP_DIR}.old"));
    fs.remove_dir_all(&fresh).map_err(|e| io_err(&fresh, e))?;
    fs.remove_dir_all(&retired).map_err(|e| io_err(&retired, e))?;
    let mut backups = Vec::new();
    for ch in &applied.changes {
        if let (Some(old_path), Some(old)) = (&ch.old_path, &ch.old) {
            let b = fresh.join(old_path);
            let res = b
                .parent()
                .map_or(Ok(()), |d| fs.create_dir_all(d))
                .and_then(|_| fs.write(&b, old.as_bytes()));
            if let Err(e) = res {
                let _ = fs.remove_dir_all(&fresh);
                return Err(io_err(&b, e));
            }
            backups.push(format!("{BACKUP_DIR}/{old_path}"));
        }
    }

    // stage
    let mut staged: Vec<PathBuf> = Vec::new();
    for ch in &applied.changes {
        let (Some(new_path), Some(new)) = (&ch.new_path, &ch.new) else { continue };
        let target = root.join(new_path);
        let tmp = tmp_path(&target);
        let res = target
            .parent()
            .map_or(Ok(()), |d| fs.create_dir_all(d))
            .and_then(|_| fs.write(&tmp, new.as_bytes()));
        if let Err(e) = res {
            for t in &staged {
                let _ = fs.remove(t);
            }
            let _ = fs.remove(&tmp);
            let _ = fs.remove_dir_all(&fresh);
            return Err(io_err(&tmp, e));
        }
        staged.push(tmp);
    }

    // commit
    let mut done: Vec<Undo> = Vec::new();
    let mut written = Vec::new();
    let mut deleted = Vec::new();
    let mut failure = None;
    for ch in &applied.changes {
        if let (Some(new_path), Some(_)) = (&ch.new_path, &ch.new) {
            let target = root.join(new_path);
            let original = if ch.old_path.as_ref() == Some(new_path) {
                ch.old.as_ref().map(|s| s.as_bytes().to_vec())
            } else {
                None
            };
            if let Err(e) = fs.rename(&tmp_path(&target), &target) {
                failure = Some(io_err(&target, e));
                break;
            }
            done.push(Undo { path: target, original });
            written.push(new_path.clone());
        }
        if let Some(old_path) = &ch.old_path {
            if ch.new_path.as_ref() != Some(old_path) {
                let p = root.join(old_path);
                if let Err(e) = fs.remove(&p) {
                    failure = Some(io_err(&p, e));
                    break;
                }
                done.push(Undo {
                    path: p,
                    original: ch.old.as_ref().map(|s| s.as_bytes().to_vec()),
                });
                deleted.push(old_path.clone());
            }
        }
    }
    if failure.is_none() {
        failure = swap_backups(fs, &fresh, &backup_dir, &retired).err();
    }
    if let Some(err) = failure {
        for u in done.iter().rev() {
            let _ = match &u.original {
                Some(bytes) => fs.write(&u.path, bytes),
                None => fs.remove(&u.path),
            };
        }
        for t in &staged {
            if fs.exists(t) {
                let _ = fs.remove(t);
            }
        }
        let _ = fs.remove_dir_all(&fresh);
        return Err(match err {
            EditError::Io { path, message } => EditError::Io {
                path,
                message: format!("{message} (changes rolled back)"),
            },
            e => e,
        });
    }
    Ok(ApplyReport {
        files_written: written,
        files_deleted: deleted,
        backup_dir: BACKUP_DIR.to_string(),
        backups,
        new_version: None,
    })
}

fn swap_backups(fs: &dyn Fs, fresh: &Path, backup_dir: &Path, retired: &Path) -> Result<(), EditError> {
    let had_old = fs.exists(backup_dir);
    if had_old {
        fs.rename(backup_dir, retired).map_err(|e| io_err(backup_dir, e))?;
    }
    if !fs.exists(fresh) {
        fs.create_dir_all(fresh).map_err(|e| io_err(fresh, e))?;
    }
    if let Err(e) = fs.rename(fresh, backup_dir) {
        if had_old {
            let _ = fs.rename(retired, backup_dir);
        }
        return Err(io_err(backup_dir, e));
    }
    if had_old {
        let _ = fs.remove_dir_all(retired);
    }
    Ok(())
}

/// `apply`, then reloads the program from disk.
pub fn apply_and_reload(
    es: &EditSet,
    program: &Program,
    fs: &dyn Fs,
) -> Result<(ApplyReport, Program), EditError> {
    let mut report = apply(es, program, fs)?;
    let p = program.reload()?;
    report.new_version = Some(p.version);
    Ok((report, p))
}
