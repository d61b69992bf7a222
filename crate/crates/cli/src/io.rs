//! Output files: written once, via a temporary sibling and a rename.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::CliError;

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(path.display().to_string(), e)
}

pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
    f.write_all(contents.as_bytes()).map_err(|e| io_err(&tmp, e))?;
    f.sync_all().map_err(|e| io_err(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

/// Collects artifacts of one command under an output directory.
#[derive(Debug)]
pub struct Artifacts {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Artifacts {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into(), written: Vec::new() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        write_atomic(&path, contents)?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn read(&self, name: &str) -> Result<String, CliError> {
        let path = self.dir.join(name);
        fs::read_to_string(&path).map_err(|e| io_err(&path, e))
    }
}

/// Parses a CSV with a header into named `f64` columns. Booleans become
/// 1 and 0, other non-numeric cells `NaN`.
pub fn read_csv_columns(text: &str) -> Result<Vec<(String, Vec<f64>)>, CliError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| CliError::Config("empty CSV".into()))?;
    let mut cols: Vec<(String, Vec<f64>)> = header.split(',').map(|h| (h.to_string(), Vec::new())).collect();
    for (n, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != cols.len() {
            return Err(CliError::Config(format!("CSV row {} has {} cells, header has {}", n + 2, cells.len(), cols.len())));
        }
        for (c, cell) in cols.iter_mut().zip(cells) {
            let v = match cell {
                "true" => 1.0,
                "false" => 0.0,
                _ => cell.parse().unwrap_or(f64::NAN),
            };
            c.1.push(v);
        }
    }
    Ok(cols)
}

pub fn column<'a>(cols: &'a [(String, Vec<f64>)], name: &str) -> Result<&'a [f64], CliError> {
    cols.iter()
        .find(|c| c.0 == name)
        .map(|c| c.1.as_slice())
        .ok_or_else(|| CliError::Config(format!("CSV has no column {name:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_leaves_no_temporaries() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("a.csv");
        write_atomic(&path, "x\n1\n").unwrap();
        write_atomic(&path, "x\n2\n").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "x\n2\n");
        let names: Vec<_> = fs::read_dir(path.parent().unwrap()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names.len(), 1);
    }

    #[test]
    fn csv_columns() {
        let cols = read_csv_columns("xi,symbol,value,ok\n0.5,1/2-,1e-3,true\n0.75,1/2-,2e-3,false\n").unwrap();
        assert_eq!(column(&cols, "ok").unwrap(), &[1.0, 0.0]);
        assert_eq!(column(&cols, "value").unwrap(), &[1e-3, 2e-3]);
        assert!(column(&cols, "symbol").unwrap()[0].is_nan());
        assert!(column(&cols, "nope").is_err());
        assert!(read_csv_columns("a,b\n1\n").is_err());
    }
}
