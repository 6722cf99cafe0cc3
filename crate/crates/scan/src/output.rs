//! CSV, PGM and manifest writers.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha1::{Digest, Sha1};

use crate::ScanError;

/// `printf("%.17g", x)`.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    const P: i32 = 17;
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= P {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (P - 1 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Builds CSV text with `\n` line endings.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.text.into_bytes()
    }
}

pub fn cell(x: f64) -> String {
    fmt_g17(x)
}

pub fn opt_cell(x: Option<f64>) -> String {
    x.map(fmt_g17).unwrap_or_default()
}

/// Grey level of a coherence value: `round(255 (L + 1) / 2)`, clamped.
pub fn grey(l: f64) -> u8 {
    (255.0 * (l + 1.0) / 2.0).round().clamp(0.0, 255.0) as u8
}

/// Binary PGM (P5), one image row per field value.
pub fn pgm(rows: &[Vec<f64>]) -> Vec<u8> {
    let h = rows.len();
    let w = rows.first().map_or(0, Vec::len);
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    for r in rows {
        out.extend(r.iter().map(|&l| grey(l)));
    }
    out
}

/// Git blob hash: SHA-1 of `blob <len>\0` followed by the content.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha1::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    let digest = h.finalize();
    let mut s = String::with_capacity(40);
    for b in digest.iter() {
        let _ = write!(s, "{b:02x}");
    }
    s
}

#[derive(Serialize)]
pub struct FileRecord {
    pub name: String,
    pub sha1: String,
}

#[derive(Serialize)]
pub struct Manifest<'a, C: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub quantity: &'a str,
    pub config_sha1: String,
    pub config: &'a C,
    pub outputs: Vec<FileRecord>,
}

/// Writes the files and the manifest that lists them.
pub fn write_all<C: Serialize>(
    dir: &Path,
    files: Vec<(String, Vec<u8>)>,
    mut manifest: Manifest<'_, C>,
) -> Result<Vec<PathBuf>, ScanError> {
    std::fs::create_dir_all(dir).map_err(|e| ScanError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let mut written = Vec::new();
    for (name, bytes) in files {
        let path = dir.join(&name);
        std::fs::write(&path, &bytes).map_err(|e| ScanError::Io(format!("cannot write {}: {e}", path.display())))?;
        manifest.outputs.push(FileRecord { name, sha1: content_hash(&bytes) });
        written.push(path);
    }
    let mut json = serde_json::to_string_pretty(&manifest).map_err(|e| ScanError::Io(e.to_string()))?;
    json.push('\n');
    let path = dir.join("manifest.json");
    std::fs::write(&path, json).map_err(|e| ScanError::Io(format!("cannot write {}: {e}", path.display())))?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_matches_printf() {
        let cases = [
            (1.0, "1"),
            (0.1, "0.10000000000000001"),
            (-2.5, "-2.5"),
            (1e-5, "1.0000000000000001e-05"),
            (123456.0, "123456"),
            (1e17, "1e+17"),
            (1e16, "10000000000000000"),
            (0.0001, "0.0001"),
            (2.0 / 3.0, "0.66666666666666663"),
            (0.0, "0"),
        ];
        for (x, want) in cases {
            assert_eq!(fmt_g17(x), want, "{x}");
        }
    }

    #[test]
    fn g17_round_trips() {
        for x in [std::f64::consts::PI, 1.0 / 3.0, 6.02e23, -4.2e-9, 0.9999999999999999] {
            assert_eq!(fmt_g17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn grey_levels() {
        assert_eq!(grey(-1.0), 0);
        assert_eq!(grey(1.0), 255);
        assert_eq!(grey(0.0), 128);
        assert_eq!(grey(1.0 + 1e-12), 255);
        let mut last = 0;
        for i in 0..=2000 {
            let g = grey(-1.0 + i as f64 / 1000.0);
            assert!(g >= last);
            last = g;
        }
    }

    #[test]
    fn pgm_header_and_size() {
        let img = pgm(&[vec![-1.0, 1.0, 0.0], vec![0.5, 0.5, 0.5]]);
        assert!(img.starts_with(b"P5\n3 2\n255\n"));
        assert_eq!(img.len(), b"P5\n3 2\n255\n".len() + 6);
    }

    #[test]
    fn git_blob_hash() {
        // `printf 'hello\n' | git hash-object --stdin`
        assert_eq!(content_hash(b"hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
    }
}
