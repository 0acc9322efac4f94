//! CSV writing helpers: locale-independent float formatting with six
//! significant digits and minimal field quoting.

/// Formats with up to `sig` significant digits, '.' separator, trailing
/// zeros trimmed.
pub fn format_sig(x: f64, sig: i32) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    if magnitude >= sig {
        return format!("{:.*e}", (sig - 1) as usize, x);
    }
    let decimals = (sig - 1 - magnitude).max(0) as usize;
    let fixed = format!("{x:.decimals$}");
    if fixed.contains('.') {
        let trimmed = fixed.trim_end_matches('0').trim_end_matches('.');
        trimmed.to_string()
    } else {
        fixed
    }
}

/// Quotes a field if it contains a comma, quote or newline.
pub fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn csv_line(fields: &[String]) -> String {
    let mut line = fields
        .iter()
        .map(|f| csv_field(f))
        .collect::<Vec<_>>()
        .join(",");
    line.push('\n');
    line
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(format_sig(108.623451, 6), "108.623");
        assert_eq!(format_sig(2.5, 6), "2.5");
        assert_eq!(format_sig(0.00123, 6), "0.00123");
        assert_eq!(format_sig(0.0, 6), "0");
        assert_eq!(format_sig(-7.07106781, 6), "-7.07107");
        assert_eq!(format_sig(1234567.0, 6), "1.23457e6");
    }

    #[test]
    fn quoting() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
        assert_eq!(csv_line(&["x".into(), "a,b".into()]), "x,\"a,b\"\n");
    }
}
