//! JSON inputs and the CSV / PGM / text table writers.

use std::fmt::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;

use crate::error::{CliError, CliResult};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

/// Three decimals, with negative zero printed as `0.000`.
pub fn fmt3(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

/// `mean (std)` at three decimals.
pub fn fmt_stat(mean: f64, std: f64) -> String {
    format!("{} ({})", fmt3(mean), fmt3(std))
}

/// Left-aligned first column, right-aligned others.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let n = header.len();
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate().take(n) {
            width[i] = width[i].max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let line = |cells: Vec<&str>, out: &mut String| {
        let mut parts = Vec::with_capacity(n);
        for (i, c) in cells.iter().enumerate() {
            let pad = width[i] - c.chars().count();
            if i == 0 {
                parts.push(format!("{c}{}", " ".repeat(pad)));
            } else {
                parts.push(format!("{}{c}", " ".repeat(pad)));
            }
        }
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(header.to_vec(), &mut out);
    let rule: Vec<String> = width.iter().map(|w| "-".repeat(*w)).collect();
    line(rule.iter().map(String::as_str).collect(), &mut out);
    for row in rows {
        line(row.iter().map(String::as_str).collect(), &mut out);
    }
    out
}

/// Square matrix with a label column and header row.
pub fn matrix_csv(labels: &[String], values: &[Vec<f64>]) -> String {
    let mut out = String::from("label");
    for l in labels {
        out.push(',');
        out.push_str(l);
    }
    out.push('\n');
    for (l, row) in labels.iter().zip(values) {
        out.push_str(l);
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

pub fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Plain (ASCII) portable graymap; each entry becomes a `scale × scale`
/// block, 0 black and the maximum white.
pub fn matrix_pgm(values: &[Vec<f64>], scale: usize) -> String {
    let rows = values.len();
    let cols = values.first().map_or(0, Vec::len);
    let max = values.iter().flatten().copied().fold(0.0f64, f64::max);
    let mut out = format!("P2\n{} {}\n255\n", cols * scale, rows * scale);
    for row in values {
        let line: Vec<String> = row
            .iter()
            .flat_map(|&v| {
                let g = if max > 0.0 { (v / max * 255.0).round().clamp(0.0, 255.0) as u8 } else { 0 };
                std::iter::repeat_n(g.to_string(), scale)
            })
            .collect();
        let line = line.join(" ");
        for _ in 0..scale {
            out.push_str(&line);
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_zero_prints_plain() {
        assert_eq!(fmt3(-0.0), "0.000");
        assert_eq!(fmt3(-0.0001), "0.000");
        assert_eq!(fmt3(4.2631), "4.263");
        assert_eq!(fmt3(-0.5), "-0.500");
    }

    #[test]
    fn table_alignment() {
        let t = table(&["name", "v"], &[vec!["a".into(), "1.000".into()], vec!["long name".into(), "2.5".into()]]);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0], "name           v");
        assert_eq!(lines[3], "long name    2.5");
    }

    #[test]
    fn pgm_header_and_scale() {
        let p = matrix_pgm(&[vec![0.0, 2.0], vec![2.0, 0.0]], 2);
        let lines: Vec<&str> = p.lines().collect();
        assert_eq!(lines[..3], ["P2", "4 4", "255"]);
        assert_eq!(lines[3], "0 0 255 255");
        assert_eq!(lines.len(), 7);
    }

    #[test]
    fn csv_layout() {
        let c = matrix_csv(&["a".into(), "b".into()], &[vec![0.0, 0.5], vec![0.5, 0.0]]);
        assert_eq!(c, "label,a,b\na,0,0.5\nb,0.5,0\n");
    }
}
