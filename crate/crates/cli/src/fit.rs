//! Power-law fits by least squares on `(log x, log y)`.

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub points_used: usize,
    pub r_squared: f64,
}

fn domain(msg: String) -> CliError {
    CliError::Domain(isothc::Error::Argument(msg))
}

/// Fits `log y = slope · log x + intercept` over the `k_last` points with
/// the largest `x`.
pub fn fit_loglog(points: &[(f64, f64)], k_last: usize) -> CliResult<FitResult> {
    if k_last < 2 {
        return Err(domain(format!(
            "need at least 2 points to fit, asked for {k_last}"
        )));
    }
    if points.len() < k_last {
        return Err(domain(format!(
            "series has {} points, fewer than {k_last}",
            points.len()
        )));
    }
    if let Some(&(x, y)) = points
        .iter()
        .find(|(x, y)| !(*x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite()))
    {
        return Err(domain(format!(
            "log fit needs positive finite values, got ({x}, {y})"
        )));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let used = &sorted[sorted.len() - k_last..];
    let (lx, ly): (Vec<f64>, Vec<f64>) = used.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let k = k_last as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(domain("all x values in the fit window are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(FitResult {
        slope,
        intercept,
        points_used: k_last,
        r_squared,
    })
}

/// Reads two numeric columns from CSV text with a header row. Columns are
/// picked by name, defaulting to the first two.
pub fn parse_series(
    text: &str,
    x_col: Option<&str>,
    y_col: Option<&str>,
) -> CliResult<Vec<(f64, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let parse_err =
        |line: usize, message: String| CliError::Domain(isothc::Error::Parse { line, message });
    let headers = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    let find = |name: Option<&str>, default: usize| -> CliResult<usize> {
        match name {
            Some(n) => headers
                .iter()
                .position(|h| h == n)
                .ok_or_else(|| parse_err(1, format!("no column named '{n}'"))),
            None if default < headers.len() => Ok(default),
            None => Err(parse_err(
                1,
                format!("header has {} columns, need 2", headers.len()),
            )),
        }
    };
    let (xi, yi) = (find(x_col, 0)?, find(y_col, 1)?);
    let mut out = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let line = k + 2;
        let record = record.map_err(|e| parse_err(line, e.to_string()))?;
        let cell = |i: usize| -> CliResult<f64> {
            let raw = record
                .get(i)
                .ok_or_else(|| parse_err(line, format!("missing column {}", i + 1)))?;
            raw.parse::<f64>()
                .map_err(|_| parse_err(line, format!("'{raw}' is not a number")))
        };
        out.push((cell(xi)?, cell(yi)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = (1..=6)
            .map(|k| (k as f64, 3.0 * (k as f64).powi(2)))
            .collect();
        let f = fit_loglog(&pts, 6).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn slope_ignores_y_scale() {
        let pts = [(1.0, 2.0), (2.0, 3.5), (4.0, 9.0), (8.0, 13.0)];
        let scaled: Vec<_> = pts.iter().map(|&(x, y)| (x, 7.0 * y)).collect();
        let a = fit_loglog(&pts, 4).unwrap();
        let b = fit_loglog(&scaled, 4).unwrap();
        assert!((a.slope - b.slope).abs() < 1e-12);
        assert!((b.intercept - a.intercept - 7f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn uses_largest_x_points() {
        let mut pts = vec![(1.0, 100.0), (2.0, 1.0)];
        pts.extend((3..6).map(|k| (k as f64, k as f64)));
        let f = fit_loglog(&pts, 3).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-12);
        assert_eq!(f.points_used, 3);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_loglog(&[(1.0, 1.0), (2.0, -1.0)], 2).is_err());
        assert!(fit_loglog(&[(1.0, 1.0)], 2).is_err());
        assert!(fit_loglog(&[(1.0, 1.0), (2.0, 2.0)], 1).is_err());
        assert!(fit_loglog(&[(1.0, 1.0), (1.0, 2.0)], 2).is_err());
    }

    #[test]
    fn parses_named_columns() {
        let text = "n,m,l1\n10,27,946.3\n20,57,909.2\n";
        assert_eq!(
            parse_series(text, Some("n"), Some("l1")).unwrap(),
            vec![(10.0, 946.3), (20.0, 909.2)]
        );
        assert_eq!(parse_series(text, None, None).unwrap()[1], (20.0, 57.0));
        let err = parse_series("a,b\n1,x\n", None, None).unwrap_err();
        assert!(err.to_string().contains("line 2"));
        assert!(parse_series(text, Some("q"), None).is_err());
    }
}
