//! Shared CSV conventions: UTF-8, `\n` line endings, header row, floats with
//! 17 significant digits so values round-trip exactly.

/// Formats a float with 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        return "NA".to_string();
    }
    format!("{:.16e}", x)
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_else(|| "NA".to_string())
}

/// Joins a header and rows into a CSV document.
pub fn document(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub(crate) fn parse_f64(field: &str, line: usize) -> crate::Result<f64> {
    let v: f64 = field.trim().parse().map_err(|_| crate::Error::Parse {
        line,
        msg: format!("not a number: {field:?}"),
    })?;
    if !v.is_finite() {
        return Err(crate::Error::Parse {
            line,
            msg: format!("non-finite value {field:?}"),
        });
    }
    Ok(v)
}
