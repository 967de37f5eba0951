//! Deterministic artifact writing.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

/// 17 significant digits in scientific notation: lossless for `f64` and
/// independent of any locale.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a CSV artifact with the resolved configuration embedded as a
/// leading comment line (`# config: {...}`), followed by the header and rows.
pub fn write_csv<C: Serialize>(
    path: &Path,
    config: &C,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<()> {
    let mut out = String::new();
    out.push_str("# config: ");
    out.push_str(&serde_json::to_string(config)?);
    out.push('\n');
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Writes a pretty-printed JSON artifact.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_is_lossless() {
        for x in [0.0, 1.0, -1.5, 0.1, 1e-300, 123456.789012345678, f64::MIN_POSITIVE] {
            let s = format_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
            assert!(!s.contains(','));
        }
    }
}
