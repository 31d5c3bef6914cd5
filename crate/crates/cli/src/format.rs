use anyhow::Result;

/// Magnitudes below this are shown as 0; raw values stay untouched in JSON.
pub const DISPLAY_ZERO: f64 = 1e-7;

pub fn display(v: f64) -> f64 {
    if v.abs() < DISPLAY_ZERO {
        0.0
    } else {
        v
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Six significant digits, `%g` style, after the display clamp.
pub fn sig6(v: f64) -> String {
    let v = display(v);
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".into();
    }
    let mut exp = v.abs().log10().floor() as i32;
    let rounded: f64 = format!("{v:.5e}").parse().unwrap_or(v);
    if rounded.abs() >= 10f64.powi(exp + 1) {
        exp += 1;
    }
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    } else {
        let s = format!("{v:.5e}");
        let (mant, e) = s.split_once('e').expect("scientific format");
        format!("{}e{e}", trim_zeros(mant))
    }
}

/// CSV with a header row, `sig6` numbers and optional `#` footer lines.
pub fn csv_table(header: &[&str], rows: &[Vec<f64>], footer: &[String]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|&v| sig6(v)))?;
    }
    let mut out = String::from_utf8(w.into_inner()?)?;
    for line in footer {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    Ok(out)
}

/// Parses `0.25`, `1/3` or `-2/5`.
pub fn parse_number(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|_| format!("bad number {s:?}"))?;
            let d: f64 = d.trim().parse().map_err(|_| format!("bad number {s:?}"))?;
            n / d
        }
        None => s.parse().map_err(|_| format!("bad number {s:?}"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("bad number {s:?}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(2.0), "2");
        assert_eq!(sig6(2.0 / 3.0), "0.666667");
        assert_eq!(sig6(-0.02 / 3.0), "-0.00666667");
        assert_eq!(sig6(1.0 / 3.0), "0.333333");
        assert_eq!(sig6(9.9999996), "10");
        assert_eq!(sig6(123456.7), "123457");
        assert_eq!(sig6(1234567.0), "1.23457e6");
        assert_eq!(sig6(3e-8), "0");
        assert_eq!(sig6(-3e-8), "0");
        assert_eq!(sig6(2.5e-6), "2.5e-6");
        assert_eq!(sig6(0.5000000002), "0.5");
    }

    #[test]
    fn csv_layout() {
        let s = csv_table(&["p", "v"], &[vec![0.5, 1.0 / 3.0]], &["note".into()]).unwrap();
        assert_eq!(s, "p,v\n0.5,0.333333\n# note\n");
    }

    #[test]
    fn numbers() {
        assert_eq!(parse_number("1/4").unwrap(), 0.25);
        assert_eq!(parse_number(" 0.5 ").unwrap(), 0.5);
        assert!(parse_number("1/0").is_err());
        assert!(parse_number("x").is_err());
    }
}
