//! Artifact destinations and atomic writes.

use std::io::Write;
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use crate::args::{Format, RunPlan, OUT_DIR_ENV};

/// Where the main artifact of a run goes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Dest {
    Stdout,
    File(PathBuf),
}

impl Dest {
    pub fn for_plan(plan: &RunPlan) -> Dest {
        if let Some(p) = &plan.out {
            return Dest::File(p.clone());
        }
        match std::env::var_os(OUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => {
                let ext = match plan.format {
                    Format::Csv => "csv",
                    Format::Json => "json",
                };
                Dest::File(Path::new(&dir).join(format!("{}.{ext}", plan.sub.name())))
            }
            _ => Dest::Stdout,
        }
    }

    /// A companion artifact next to this one: `bands.csv` -> `bands.decay.csv`.
    pub fn sibling(&self, tag: &str) -> Dest {
        match self {
            Dest::Stdout => Dest::Stdout,
            Dest::File(p) => {
                let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                let name = match p.extension() {
                    Some(ext) => format!("{stem}.{tag}.{}", ext.to_string_lossy()),
                    None => format!("{stem}.{tag}"),
                };
                Dest::File(p.with_file_name(name))
            }
        }
    }

    pub fn write(&self, contents: &str) -> std::io::Result<()> {
        match self {
            Dest::Stdout => {
                let mut out = std::io::stdout().lock();
                out.write_all(contents.as_bytes())?;
                out.flush()
            }
            Dest::File(p) => write_atomic(p, contents),
        }
    }
}

/// Writes to a temporary file in the target directory, then renames it
/// over the target.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sibling_names() {
        let d = Dest::File(PathBuf::from("/tmp/x/bands.csv"));
        assert_eq!(d.sibling("decay"), Dest::File(PathBuf::from("/tmp/x/bands.decay.csv")));
        let e = Dest::File(PathBuf::from("out"));
        assert_eq!(e.sibling("decay"), Dest::File(PathBuf::from("out.decay")));
        assert_eq!(Dest::Stdout.sibling("decay"), Dest::Stdout);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        write_atomic(&p, "one\n").unwrap();
        write_atomic(&p, "two\n").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
        assert!(write_atomic(&dir.path().join("missing/a.csv"), "x").is_err());
    }
}
