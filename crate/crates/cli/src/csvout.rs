//! Byte-stable CSV output.
//!
//! Every float is printed as `{:.16e}` (17 significant digits), which
//! round-trips f64 exactly, so reruns with identical inputs produce
//! byte-identical files regardless of worker count or platform locale.
//! Files land via a temp-file rename, never as partial writes.

use std::fs;
use std::path::Path;

use crate::error::{CliError, Result};

pub fn float_field(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn bool_field(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

/// Rows of already-formatted cells under a fixed header.
pub struct CsvTable {
    header: &'static [&'static str],
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &'static [&'static str]) -> Self {
        CsvTable {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        assert_eq!(
            row.len(),
            self.header.len(),
            "row width must match the header"
        );
        self.rows.push(row);
    }

    /// Comma separator, '\n' line endings, header always present.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out.into_bytes()
    }
}

/// Write to `<name>.tmp` beside the target, then rename over it. The
/// suffix is appended rather than swapped so `a.csv` and `a` cannot
/// collide on the same temp path.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp_name = path
        .file_name()
        .ok_or_else(|| CliError::Run(format!("invalid output path {}", path.display())))?
        .to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);

    fs::write(&tmp, bytes)
        .map_err(|e| CliError::Run(format!("cannot write {}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        CliError::Run(format!("cannot move output into {}: {e}", path.display()))
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_fields_round_trip_exactly() {
        for &x in &[0.0, 1.0, -2.5e-13, std::f64::consts::PI, 6.02214076e23] {
            let printed = float_field(x);
            assert_eq!(printed.parse::<f64>().unwrap(), x, "{printed}");
        }
        assert_eq!(float_field(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn table_layout_is_fixed() {
        let mut table = CsvTable::new(&["a", "b"]);
        table.push_row(vec!["1".into(), "2".into()]);
        let bytes = table.to_bytes();
        assert_eq!(std::str::from_utf8(&bytes).unwrap(), "a,b\n1,2\n");
    }

    #[test]
    fn atomic_write_leaves_no_temp_file() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("table.csv");
        write_atomic(&target, b"a,b\n").unwrap();
        assert_eq!(fs::read(&target).unwrap(), b"a,b\n");
        let leftovers: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(leftovers, vec![std::ffi::OsString::from("table.csv")]);
    }
}
