//! Locale-independent number formatting and CSV framing.

use std::io::{self, Write};

pub const SCHEMA_LINE: &str = "# schema-version: 1";
const SIGNIFICANT: usize = 9;

/// `%.9g`-style formatting: 9 significant digits, trailing zeros
/// removed, exponent form outside `1e-5 ≤ |x| < 1e9`.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..SIGNIFICANT as i32).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (SIGNIFICANT as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

/// Quotes a field when it contains a separator, quote or newline.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Writes the schema comment and header; rows follow with [`write_row`].
pub fn write_header<W: Write>(out: &mut W, columns: &[&str]) -> io::Result<()> {
    writeln!(out, "{SCHEMA_LINE}")?;
    writeln!(out, "{}", columns.join(","))
}

pub fn write_row<W: Write>(out: &mut W, cells: &[String]) -> io::Result<()> {
    let cells: Vec<String> = cells.iter().map(|c| csv_field(c)).collect();
    writeln!(out, "{}", cells.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn general_format() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(-2.5), "-2.5");
        assert_eq!(fmt_num(0.1), "0.1");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333");
        assert_eq!(fmt_num(123456789.0), "123456789");
        assert_eq!(fmt_num(1234567890.0), "1.23456789e+09");
        assert_eq!(fmt_num(1e-5), "0.00001");
        assert_eq!(fmt_num(1.5e-6), "1.5e-06");
        assert_eq!(fmt_num(99.49263), "99.49263");
        assert_eq!(fmt_num(0.999999999999), "1");
        assert_eq!(fmt_num(f64::NAN), "nan");
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }
}
