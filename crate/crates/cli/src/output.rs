//! Deterministic file emission: CSV with a trailing config-hash comment,
//! JSON summaries, atomic writes.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

/// FNV-1a over the canonical config string; recorded in every emitted
/// file so reruns are comparable.
pub fn config_hash(canonical: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in canonical.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// Write bytes atomically: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut tmp = PathBuf::from(path);
    tmp.set_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Assemble a CSV document: header row, data rows, and the trailing
/// config comment.
pub fn csv_document(header: &[&str], rows: &[Vec<String>], config: &str) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out.push_str(&format!("# config {:016x}\n", config_hash(config)));
    out
}
