//! Report emission: deterministic JSON, a text summary, CSV tables and a
//! separate metadata file for everything run-dependent.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use bregman_coherence::harness::Table;
use serde_json::Value;

/// Scientific notation with 17 significant digits, '.' as separator.
pub fn format_value(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

pub fn write_table(dir: &Path, table: &Table) -> Result<()> {
    let path = dir.join(format!("{}.csv", table.name));
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_path(&path)
        .with_context(|| format!("creating {}", path.display()))?;
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| format_value(*v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_carry_seventeen_significant_digits() {
        let s = format_value(0.1);
        assert_eq!(s, "1.0000000000000001e-1");
        let mantissa: String = s.split('e').next().unwrap().chars().filter(|c| c.is_ascii_digit()).collect();
        assert_eq!(mantissa.len(), 17);
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
        assert_eq!(format_value(f64::NAN), "NaN");
    }

    #[test]
    fn tables_round_trip_through_csv() {
        let dir = tempfile::tempdir().unwrap();
        let t = Table { name: "t".into(), columns: vec!["a".into(), "b".into()], rows: vec![vec![1.0 / 3.0, -2.5]] };
        write_table(dir.path(), &t).unwrap();
        let mut r = csv::Reader::from_path(dir.path().join("t.csv")).unwrap();
        assert_eq!(r.headers().unwrap(), vec!["a", "b"]);
        let rec = r.records().next().unwrap().unwrap();
        assert_eq!(rec[0].parse::<f64>().unwrap(), 1.0 / 3.0);
        assert_eq!(rec[1].parse::<f64>().unwrap(), -2.5);
    }
}
