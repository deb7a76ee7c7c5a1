//! Locale-independent number formatting, CSV assembly and atomic file output.

use std::fs;
use std::io::Write;
use std::path::Path;

/// `%.{sig}g` as in C: `sig` significant digits, trailing zeros dropped,
/// scientific notation when the exponent is below -4 or at least `sig`.
pub fn fmt_g(x: f64, sig: usize) -> String {
    let sig = sig.max(1);
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= sig as i32 {
        let m = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// 15 significant digits, the CSV contract.
pub fn num(x: f64) -> String {
    fmt_g(x, 15)
}

/// Comma-separated table with a header row and `\n` line endings.
pub fn csv(header: &[&str], columns: &[Vec<f64>]) -> String {
    let rows = columns.first().map_or(0, Vec::len);
    debug_assert!(columns.iter().all(|c| c.len() == rows));
    let mut out = String::with_capacity(rows * columns.len() * 20 + 64);
    out.push_str(&header.join(","));
    out.push('\n');
    for i in 0..rows {
        for (j, col) in columns.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&num(col[i]));
        }
        out.push('\n');
    }
    out
}

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_c_printf() {
        assert_eq!(num(1.0 / 7.0), "0.142857142857143");
        assert_eq!(num(1.0 / 14.0), "0.0714285714285714");
        assert_eq!(num(-20.0), "-20");
        assert_eq!(num(0.02), "0.02");
        assert_eq!(num(-0.0), "0");
        assert_eq!(num(1.5e-5), "1.5e-05");
        assert_eq!(num(1e-4), "0.0001");
        assert_eq!(num(123456789012345.0), "123456789012345");
        assert_eq!(num(1234567890123456.0), "1.23456789012346e+15");
        assert_eq!(num(2.0 / 3.0), "0.666666666666667");
        assert_eq!(fmt_g(1.23456, 3), "1.23");
        assert_eq!(fmt_g(99.96, 3), "100");
        assert_eq!(fmt_g(0.000123456, 3), "0.000123");
    }

    #[test]
    fn csv_layout() {
        let s = csv(&["omega", "A"], &[vec![-1.0, 1.0], vec![0.5, 0.25]]);
        assert_eq!(s, "omega,A\n-1,0.5\n1,0.25\n");
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        write_atomic(&p, "one").unwrap();
        write_atomic(&p, "two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn atomic_write_reports_missing_directory() {
        let dir = tempfile::tempdir().unwrap();
        assert!(write_atomic(&dir.path().join("missing/x.csv"), "a").is_err());
    }
}
