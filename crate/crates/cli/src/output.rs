//! Output files. Everything a command produces is buffered and written at the
//! end; if any write fails, files already written by the command are removed.

use std::fmt::Write as _;
use std::path::PathBuf;

use doob_fiducial::SampleSet;

use crate::CliError;

#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, path: PathBuf, contents: impl Into<Vec<u8>>) {
        self.files.push((path, contents.into()));
    }

    pub fn commit(self) -> Result<Vec<PathBuf>, CliError> {
        let mut written: Vec<PathBuf> = Vec::new();
        for (path, contents) in &self.files {
            let result = path
                .parent()
                .filter(|d| !d.as_os_str().is_empty())
                .map_or(Ok(()), std::fs::create_dir_all)
                .and_then(|_| std::fs::write(path, contents));
            if let Err(e) = result {
                for p in &written {
                    let _ = std::fs::remove_file(p);
                }
                return Err(CliError::Io(format!("writing {}: {e}", path.display())));
            }
            written.push(path.clone());
        }
        Ok(written)
    }
}

/// `chain_id,<coordinates>` followed by one row per chain.
pub fn samples_csv(set: &SampleSet) -> String {
    let mut out = String::from("chain_id");
    for name in &set.coordinate_names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (b, row) in set.samples.iter().enumerate() {
        let _ = write!(out, "{b}");
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct Bin {
    pub left: f64,
    pub right: f64,
    pub count: usize,
}

/// Equal-width bins spanning `[min, max]`; the last bin is closed. Constant data
/// uses the range `[v − 0.5, v + 0.5]`.
pub fn histogram(values: &[f64], bins: usize) -> Result<Vec<Bin>, CliError> {
    if bins == 0 {
        return Err(CliError::Usage("bins must be positive".into()));
    }
    if values.is_empty() {
        return Err(CliError::Usage("no values to bin".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Usage("histogram input contains non-finite values".into()));
    }
    let mut lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        lo -= 0.5;
        hi += 0.5;
    }
    let width = (hi - lo) / bins as f64;
    let edge = |i: usize| if i == bins { hi } else { lo + width * i as f64 };
    let mut counts = vec![0usize; bins];
    for &v in values {
        let mut i = (((v - lo) / width) as usize).min(bins - 1);
        // Guard against rounding placing v one bin off its edges.
        while i > 0 && v < edge(i) {
            i -= 1;
        }
        while i + 1 < bins && v >= edge(i + 1) {
            i += 1;
        }
        counts[i] += 1;
    }
    Ok((0..bins)
        .map(|i| Bin {
            left: edge(i),
            right: edge(i + 1),
            count: counts[i],
        })
        .collect())
}

pub fn histogram_csv(bins: &[Bin]) -> String {
    let mut out = String::from("bin_left,bin_right,count\n");
    for b in bins {
        let _ = writeln!(out, "{},{},{}", b.left, b.right, b.count);
    }
    out
}

/// Replaces characters that are awkward in file names.
pub fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_counts_and_edges() {
        let data = [0.0, 0.1, 0.5, 0.99, 1.0, 0.3];
        let bins = histogram(&data, 4).unwrap();
        assert_eq!(bins.iter().map(|b| b.count).sum::<usize>(), data.len());
        assert_eq!(bins[0].left, 0.0);
        assert_eq!(bins[3].right, 1.0);
        assert_eq!(bins.iter().map(|b| b.count).collect::<Vec<_>>(), vec![2, 1, 1, 2]);
    }

    #[test]
    fn histogram_of_constant_data() {
        let bins = histogram(&[2.0, 2.0, 2.0], 5).unwrap();
        assert_eq!(bins[0].left, 1.5);
        assert_eq!(bins[4].right, 2.5);
        assert_eq!(bins.iter().filter(|b| b.count > 0).count(), 1);
        assert_eq!(bins[2].count, 3);
    }

    #[test]
    fn histogram_rejects_bad_input() {
        assert!(histogram(&[1.0], 0).is_err());
        assert!(histogram(&[], 3).is_err());
        assert!(histogram(&[f64::NAN], 3).is_err());
    }

    #[test]
    fn failed_commit_removes_earlier_files() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("blocker");
        std::fs::write(&blocker, "x").unwrap();
        let mut out = Outputs::default();
        out.add(dir.path().join("a.csv"), "a");
        out.add(blocker.join("b.csv"), "b");
        assert!(out.commit().is_err());
        assert!(!dir.path().join("a.csv").exists());
    }
}
