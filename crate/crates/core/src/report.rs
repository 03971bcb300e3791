//! Deterministic text and CSV rendering.

use std::io::{self, Write};

use crate::dimension::Spectrum;

/// Significant digits for printed reals.
pub const SIG_DIGITS: usize = 12;

/// Formats `x` with [`SIG_DIGITS`] significant digits, trailing zeros removed.
/// Magnitudes outside `[1e-5, 1e12)` use scientific notation.
pub fn fmt_real(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let s = format!("{:.*e}", SIG_DIGITS - 1, x);
        let (mantissa, exponent) = s.split_once('e').expect("scientific format has an exponent");
        format!("{}e{exponent}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Spectrum CSV: `a,dim,method,kkt_residual,argmax_1,…`. Failed rows carry
/// `error` in the method column and the message in `argmax_1`.
pub fn write_spectrum_csv<W: Write>(spectrum: &Spectrum, mut out: W) -> io::Result<()> {
    let width = spectrum
        .rows
        .iter()
        .filter_map(|r| r.result.as_ref().map(|d| d.argmax.len()))
        .max()
        .unwrap_or(0)
        .max(1);
    let mut header = vec!["a".to_string(), "dim".into(), "method".into(), "kkt_residual".into()];
    header.extend((1..=width).map(|i| format!("argmax_{i}")));
    writeln!(out, "{}", header.join(","))?;
    for row in &spectrum.rows {
        let mut cells = vec![fmt_real(row.a)];
        match (&row.result, &row.error) {
            (Some(d), _) => {
                cells.push(fmt_real(d.dim));
                cells.push(if d.empty_set {
                    "empty-set".into()
                } else {
                    d.method.to_string()
                });
                cells.push(fmt_real(d.kkt_residual));
                cells.extend(d.argmax.iter().map(|&v| fmt_real(v)));
            }
            (None, err) => {
                cells.extend(["".into(), "error".into(), "".into()]);
                let msg = err.as_deref().unwrap_or("unknown error");
                cells.push(format!("\"{}\"", msg.replace('"', "\"\"")));
            }
        }
        cells.resize(4 + width, String::new());
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimension::{spectrum, DEFAULT_TOL};
    use crate::BetaSystem;

    #[test]
    fn real_formatting() {
        assert_eq!(fmt_real(0.0), "0");
        assert_eq!(fmt_real(-0.0), "0");
        assert_eq!(fmt_real(1.0), "1");
        assert_eq!(fmt_real(0.5), "0.5");
        assert_eq!(fmt_real(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_real(1.839_286_755_214_161), "1.83928675521");
        assert_eq!(fmt_real(-2.5e-9), "-2.5e-9");
        assert_eq!(fmt_real(1.5e13), "1.5e13");
        assert_eq!(fmt_real(123_456.0), "123456");
    }

    #[test]
    fn spectrum_csv_layout() {
        let s = spectrum(&BetaSystem::pseudo_golden(4).unwrap(), &[0.2, 0.5, 2.0], DEFAULT_TOL);
        let mut buf = Vec::new();
        write_spectrum_csv(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "a,dim,method,kkt_residual,argmax_1,argmax_2");
        assert_eq!(lines[1], "0.2,0,empty-set,0,,");
        assert!(lines[2].starts_with("0.5,0.") && lines[2].contains(",polytope-max,"));
        assert!(lines[3].starts_with("2,,error,,\""));
        for line in &lines[1..3] {
            assert_eq!(line.split(',').count(), 6);
        }
    }
}
