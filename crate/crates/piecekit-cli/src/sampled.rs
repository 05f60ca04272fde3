//! Sampled targets: `(x, y)` pairs from a CSV file with monotone cubic
//! interpolation between the samples.

use std::fmt;
use std::path::Path;

/// Ordered samples plus Fritsch-Carlson slopes; evaluation is a cubic
/// Hermite interpolant that preserves monotone runs of the data and
/// reproduces linear data exactly.
pub struct SampledTarget {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

#[derive(Debug)]
pub enum SampleError {
    Io(std::io::Error),
    Malformed { line: usize, message: String },
    NotIncreasing { line: usize },
    TooFew,
}

impl fmt::Display for SampleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampleError::Io(e) => write!(f, "cannot read samples: {e}"),
            SampleError::Malformed { line, message } => {
                write!(f, "malformed CSV at line {line}: {message}")
            }
            SampleError::NotIncreasing { line } => {
                write!(f, "sample x values must be strictly increasing (line {line})")
            }
            SampleError::TooFew => write!(f, "need at least two samples"),
        }
    }
}

impl std::error::Error for SampleError {}

impl SampledTarget {
    pub fn from_csv(path: &Path) -> Result<SampledTarget, SampleError> {
        let text = std::fs::read_to_string(path).map_err(SampleError::Io)?;
        Self::from_csv_text(&text)
    }

    pub fn from_csv_text(text: &str) -> Result<SampledTarget, SampleError> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let x_field = fields.next().unwrap_or("").trim();
            let y_field = fields.next().unwrap_or("").trim();
            let parsed = (x_field.parse::<f64>(), y_field.parse::<f64>());
            match parsed {
                (Ok(x), Ok(y)) => {
                    if !x.is_finite() || !y.is_finite() {
                        return Err(SampleError::Malformed {
                            line: i + 1,
                            message: "non-finite sample".to_string(),
                        });
                    }
                    if let Some(&last) = xs.last() {
                        if x <= last {
                            return Err(SampleError::NotIncreasing { line: i + 1 });
                        }
                    }
                    xs.push(x);
                    ys.push(y);
                }
                // a single non-numeric header line is allowed
                _ if i == 0 => continue,
                _ => {
                    return Err(SampleError::Malformed {
                        line: i + 1,
                        message: format!("expected `x,y`, got `{line}`"),
                    })
                }
            }
        }
        if xs.len() < 2 {
            return Err(SampleError::TooFew);
        }
        let slopes = fritsch_carlson_slopes(&xs, &ys);
        Ok(SampledTarget { xs, ys, slopes })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().expect("non-empty"))
    }

    /// Interpolated value; clamps to the sampled range.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = self.xs.partition_point(|&v| v <= x) - 1;
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i] + h10 * h * self.slopes[i] + h01 * self.ys[i + 1]
            + h11 * h * self.slopes[i + 1]
    }
}

fn fritsch_carlson_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let secants: Vec<f64> = (0..n - 1)
        .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
        .collect();
    let mut m = vec![0.0; n];
    m[0] = secants[0];
    m[n - 1] = secants[n - 2];
    for i in 1..n - 1 {
        m[i] = if secants[i - 1] * secants[i] <= 0.0 {
            0.0
        } else {
            0.5 * (secants[i - 1] + secants[i])
        };
    }
    // limit the slopes so each interval stays monotone
    for i in 0..n - 1 {
        if secants[i] == 0.0 {
            m[i] = 0.0;
            m[i + 1] = 0.0;
            continue;
        }
        let alpha = m[i] / secants[i];
        let beta = m[i + 1] / secants[i];
        let norm = alpha * alpha + beta * beta;
        if norm > 9.0 {
            let tau = 3.0 / norm.sqrt();
            m[i] = tau * alpha * secants[i];
            m[i + 1] = tau * beta * secants[i];
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_data_is_reproduced_exactly() {
        let mut csv = String::from("x,y\n");
        for i in 0..=20 {
            let x = i as f64 * 0.05;
            csv.push_str(&format!("{x},{}\n", 2.0 * x + 1.0));
        }
        let target = SampledTarget::from_csv_text(&csv).unwrap();
        for j in 0..=100 {
            let x = j as f64 * 0.01;
            let err = (target.eval(x) - (2.0 * x + 1.0)).abs();
            assert!(err < 1e-14, "x={x} err={err:e}");
        }
    }

    #[test]
    fn monotone_data_stays_monotone() {
        let csv = "0,0\n1,0.1\n2,0.2\n3,5.0\n4,5.1\n";
        let target = SampledTarget::from_csv_text(csv).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for j in 0..=400 {
            let x = j as f64 * 0.01;
            let y = target.eval(x);
            assert!(y >= prev - 1e-12, "not monotone at x={x}");
            prev = y;
        }
    }

    #[test]
    fn rejects_unsorted_and_short_input() {
        assert!(matches!(
            SampledTarget::from_csv_text("1,1\n0,0\n"),
            Err(SampleError::NotIncreasing { line: 2 })
        ));
        assert!(matches!(
            SampledTarget::from_csv_text("1,1\n"),
            Err(SampleError::TooFew)
        ));
        assert!(matches!(
            SampledTarget::from_csv_text("0,0\nbad,row\n"),
            Err(SampleError::Malformed { line: 2, .. })
        ));
    }
}
