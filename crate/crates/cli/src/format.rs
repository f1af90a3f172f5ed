use std::fmt::Write as _;

/// Rounds to three significant figures for display.
pub fn sig3(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if mag < -3 {
        return format!("{x:.2e}");
    }
    let factor = 10f64.powi(mag - 2);
    let rounded = (x / factor).round() * factor;
    // rounding can carry into the next decade (999.6 -> 1000)
    let mag = rounded.abs().log10().floor() as i32;
    if mag >= 2 {
        format!("{rounded:.0}")
    } else {
        format!("{rounded:.*}", (2 - mag) as usize)
    }
}

/// Left-aligned first column, right-aligned remaining columns.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &[String]| {
        for (i, cell) in cells.iter().enumerate().take(cols) {
            if i == 0 {
                let _ = write!(out, "{cell:<w$}", w = widths[0]);
            } else {
                let _ = write!(out, "  {cell:>w$}", w = widths[i]);
            }
        }
        let trimmed = out.trim_end_matches(' ').len();
        out.truncate(trimmed);
        out.push('\n');
    };
    line(&header.iter().map(|s| s.to_string()).collect::<Vec<_>>());
    for row in rows {
        line(row);
    }
    out
}

/// `quantity,value` CSV.
pub fn key_values(rows: &[(&str, String)]) -> String {
    let mut out = String::from("quantity,value\n");
    for (k, v) in rows {
        let _ = writeln!(out, "{k},{v}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_significant_figures() {
        assert_eq!(sig3(190_123.0), "190000");
        assert_eq!(sig3(1_612.4), "1610");
        assert_eq!(sig3(3.5714), "3.57");
        assert_eq!(sig3(0.0085), "0.00850");
        assert_eq!(sig3(999.6), "1000");
        assert_eq!(sig3(-42.42), "-42.4");
        assert_eq!(sig3(0.0), "0");
        assert_eq!(sig3(1.234e-22), "1.23e-22");
    }

    #[test]
    fn aligned_table() {
        let t = table(&["a", "bb"], &[vec!["xyz".into(), "1".into()]]);
        assert_eq!(t, "a    bb\nxyz   1\n");
    }
}
