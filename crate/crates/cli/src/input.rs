use std::path::PathBuf;
use std::str::FromStr;

use clap::Args;
use lindist::{Mat3, SingularForm};
use serde::Deserialize;

use crate::Failure;

/// One of: nine positional entries, `--sing α β`, or `--matrix FILE`.
#[derive(Args, Clone, Debug, Default)]
pub struct MatrixInput {
    /// Nine matrix entries in row-major order.
    #[arg(num_args = 9, value_name = "ENTRY", allow_negative_numbers = true)]
    pub entries: Vec<f64>,

    /// Use diag(1, ALPHA, BETA).
    #[arg(long, num_args = 2, value_names = ["ALPHA", "BETA"], conflicts_with_all = ["entries", "matrix"])]
    pub sing: Option<Vec<f64>>,

    /// JSON file holding a 3x3 nested array or nine row-major numbers.
    #[arg(long, value_name = "FILE", conflicts_with = "entries")]
    pub matrix: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixFile {
    Nested([[f64; 3]; 3]),
    Flat(Vec<f64>),
}

impl MatrixInput {
    pub fn resolve(&self) -> Result<Mat3, Failure> {
        if let Some(ab) = &self.sing {
            return Ok(SingularForm::sing(ab[0], ab[1])?.normalized());
        }
        if let Some(path) = &self.matrix {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
            let parsed: MatrixFile = serde_json::from_str(&text)
                .map_err(|e| Failure::Usage(format!("{} is not a matrix: {e}", path.display())))?;
            return Ok(match parsed {
                MatrixFile::Nested(rows) => {
                    let m = Mat3::from_rows(rows);
                    m.check_finite()?;
                    m
                }
                MatrixFile::Flat(v) => Mat3::from_row_major(&v)?,
            });
        }
        if self.entries.is_empty() {
            return Err(Failure::Usage(
                "give nine entries, --sing ALPHA BETA, or --matrix FILE".into(),
            ));
        }
        Ok(Mat3::from_row_major(&self.entries)?)
    }
}

/// Axis values: `2,3,5`, `lin:LO:HI:N` or `log:LO:HI:N` (both endpoints included).
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec(pub Vec<f64>);

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad number {t:?}: {e}"))
        };
        let mut parts = s.split(':');
        let head = parts.next().unwrap_or_default();
        let values = match head {
            "lin" | "log" => {
                let rest: Vec<&str> = parts.collect();
                let [lo, hi, n] = rest[..] else {
                    return Err(format!("expected {head}:LO:HI:N, got {s:?}"));
                };
                let (lo, hi) = (num(lo)?, num(hi)?);
                let n: usize = n
                    .trim()
                    .parse()
                    .map_err(|e| format!("bad count {n:?}: {e}"))?;
                if head == "log" && !(lo > 0.0 && hi > 0.0) {
                    return Err("log grid needs positive endpoints".into());
                }
                let at = |i: usize| {
                    if i == 0 {
                        return lo;
                    }
                    if i + 1 == n {
                        return hi;
                    }
                    let f = i as f64 / (n - 1) as f64;
                    if head == "lin" {
                        lo + (hi - lo) * f
                    } else {
                        10f64.powf(lo.log10() + (hi.log10() - lo.log10()) * f)
                    }
                };
                (0..n).map(at).collect()
            }
            _ if s.trim().is_empty() => Vec::new(),
            _ => s.split(',').map(num).collect::<Result<_, _>>()?,
        };
        if values.iter().any(|v: &f64| !v.is_finite()) {
            return Err("grid values must be finite".into());
        }
        Ok(GridSpec(values))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_forms() {
        assert_eq!("2,3.5".parse::<GridSpec>().unwrap().0, vec![2.0, 3.5]);
        assert_eq!(
            "lin:1:3:3".parse::<GridSpec>().unwrap().0,
            vec![1.0, 2.0, 3.0]
        );
        let log = "log:10:1e3:3".parse::<GridSpec>().unwrap().0;
        assert_eq!(log, vec![10.0, 100.0, 1e3]);
        assert!("log:10:1e3:0".parse::<GridSpec>().unwrap().0.is_empty());
        assert!("".parse::<GridSpec>().unwrap().0.is_empty());
        assert!("log:0:1:3".parse::<GridSpec>().is_err());
        assert!("1,x".parse::<GridSpec>().is_err());
        assert!("lin:1:2".parse::<GridSpec>().is_err());
    }
}
