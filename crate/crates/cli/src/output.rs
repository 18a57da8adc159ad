use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use serde_json::Value;
use unfold_core::Complex64;

use crate::commands::ensure_parent;

pub fn complex(z: Complex64) -> String {
    format!("{:.16e}{:+.16e}j", z.re, z.im)
}

pub fn vector(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.16e}")).collect();
    format!("({})", parts.join(", "))
}

pub fn write_csv<I>(path: &Path, header: &str, rows: I) -> anyhow::Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    ensure_parent(path)?;
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{header}")?;
    for row in rows {
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

pub fn write_json(path: &Path, doc: &Value) -> anyhow::Result<()> {
    ensure_parent(path)?;
    let mut text = serde_json::to_string_pretty(doc)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_format_keeps_the_sign() {
        assert_eq!(
            complex(Complex64::new(1.0, -0.5)),
            "1.0000000000000000e0-5.0000000000000000e-1j"
        );
    }
}
