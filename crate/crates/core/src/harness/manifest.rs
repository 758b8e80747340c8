use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::Overrides;
use crate::error::{Error, Result};
use crate::io::parse_csv_values;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Role given to plot files; compare_runs skips them.
pub const PLOT_ROLE: &str = "plot";
/// Solver bookkeeping (iteration counts, raw objectives); compare_runs skips
/// these too since they scale with the data rather than the result.
pub const DIAGNOSTICS_ROLE: &str = "diagnostics";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub role: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: String,
    pub seed: u64,
    pub stream: u64,
    pub overrides: Overrides,
    pub files: Vec<ManifestEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Manifest {
    /// Accepts the manifest file itself or the run directory holding it.
    pub fn load(path: impl AsRef<Path>) -> Result<(Manifest, PathBuf)> {
        let path = path.as_ref();
        let file = if path.is_dir() { path.join(MANIFEST_FILE) } else { path.to_path_buf() };
        let text = fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
        let manifest = serde_json::from_str(&text)?;
        let dir = file.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((manifest, dir))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntryDeviation {
    pub key: String,
    pub a: f64,
    pub b: f64,
}

impl EntryDeviation {
    pub fn deviation(&self) -> f64 {
        (self.a - self.b).abs()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FileComparison {
    pub file: String,
    pub max_abs_deviation: f64,
    /// Entries whose deviation exceeds the tolerance.
    pub failing: Vec<EntryDeviation>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub experiment: String,
    pub tolerance: f64,
    pub files: Vec<FileComparison>,
}

impl ComparisonReport {
    pub fn passed(&self) -> bool {
        self.files.iter().all(|f| f.failing.is_empty())
    }

    pub fn max_abs_deviation(&self) -> f64 {
        self.files.iter().map(|f| f.max_abs_deviation).fold(0.0, f64::max)
    }
}

const LISTED_PER_FILE: usize = 20;

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "experiment {} tolerance {}", self.experiment, self.tolerance)?;
        for file in &self.files {
            let verdict = if file.failing.is_empty() { "pass" } else { "FAIL" };
            writeln!(f, "{verdict} {} max_abs_deviation {:e}", file.file, file.max_abs_deviation)?;
            for e in file.failing.iter().take(LISTED_PER_FILE) {
                writeln!(f, "    {}: {} vs {} (|diff| {:e})", e.key, e.a, e.b, e.deviation())?;
            }
            if file.failing.len() > LISTED_PER_FILE {
                writeln!(f, "    ... {} more", file.failing.len() - LISTED_PER_FILE)?;
            }
        }
        write!(f, "{}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

/// Compares the result files of two runs entry by entry, skipping plots
/// and diagnostics.
pub fn compare_runs(manifest_a: impl AsRef<Path>, manifest_b: impl AsRef<Path>, tolerance: f64) -> Result<ComparisonReport> {
    if !(tolerance >= 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be >= 0, got {tolerance}")));
    }
    let (a, dir_a) = Manifest::load(manifest_a)?;
    let (b, dir_b) = Manifest::load(manifest_b)?;
    if a.experiment != b.experiment {
        return Err(Error::Config(format!(
            "manifests are for different experiments: {} vs {}",
            a.experiment, b.experiment
        )));
    }
    let mut files = Vec::new();
    for entry in a.files.iter().filter(|e| e.role != PLOT_ROLE && e.role != DIAGNOSTICS_ROLE) {
        let other = b
            .files
            .iter()
            .find(|e| e.file == entry.file)
            .ok_or_else(|| Error::Config(format!("{} is missing from the second run", entry.file)))?;
        let va = read_values(&dir_a.join(&entry.file))?;
        let vb = if other.sha256 == entry.sha256 { va.clone() } else { read_values(&dir_b.join(&other.file))? };
        if va.len() != vb.len() {
            return Err(Error::Dimension(format!("{}: {} vs {} entries", entry.file, va.len(), vb.len())));
        }
        let mut max = 0.0f64;
        let mut failing = Vec::new();
        for ((ka, xa), (kb, xb)) in va.into_iter().zip(vb) {
            if ka != kb {
                return Err(Error::Dimension(format!("{}: entry {ka} lines up with {kb}", entry.file)));
            }
            let d = (xa - xb).abs();
            max = max.max(d);
            if d > tolerance || d.is_nan() {
                failing.push(EntryDeviation { key: ka, a: xa, b: xb });
            }
        }
        files.push(FileComparison {
            file: entry.file.clone(),
            max_abs_deviation: max,
            failing,
        });
    }
    Ok(ComparisonReport {
        experiment: a.experiment,
        tolerance,
        files,
    })
}

fn read_values(path: &Path) -> Result<Vec<(String, f64)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv_values(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    fn write_run(dir: &Path, experiment: &str, csv: &str) {
        fs::write(dir.join("t.csv"), csv).unwrap();
        fs::write(dir.join("t.svg"), "<svg/>").unwrap();
        let m = Manifest {
            experiment: experiment.into(),
            seed: 1,
            stream: 0,
            overrides: Overrides::default(),
            files: vec![
                ManifestEntry {
                    file: "t.csv".into(),
                    role: "table".into(),
                    sha256: sha256_hex(csv.as_bytes()),
                },
                ManifestEntry {
                    file: "t.svg".into(),
                    role: PLOT_ROLE.into(),
                    sha256: String::new(),
                },
            ],
        };
        fs::write(dir.join(MANIFEST_FILE), m.to_json()).unwrap();
    }

    #[test]
    fn self_comparison_and_failures() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let c = tempfile::tempdir().unwrap();
        write_run(a.path(), "table1", "row,col,value\n1,1,1\n1,2,0.5\n");
        write_run(b.path(), "table1", "row,col,value\n1,1,1\n1,2,0.25\n");
        write_run(c.path(), "table3", "row,col,value\n1,1,1\n1,2,0.5\n");

        let same = compare_runs(a.path(), a.path(), 0.0).unwrap();
        assert!(same.passed());
        assert_eq!(same.max_abs_deviation(), 0.0);
        assert_eq!(same.files.len(), 1);

        let diff = compare_runs(a.path(), b.path().join(MANIFEST_FILE), 0.0).unwrap();
        assert!(!diff.passed());
        assert_eq!(diff.files[0].failing, vec![EntryDeviation { key: "1,2".into(), a: 0.5, b: 0.25 }]);
        assert!(diff.to_string().contains("1,2: 0.5 vs 0.25"));
        assert!(compare_runs(a.path(), b.path(), 0.3).unwrap().passed());

        let err = compare_runs(a.path(), c.path(), 1.0).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
