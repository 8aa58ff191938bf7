//! `start:stop:step` range flags for parameter sweeps.

use std::str::FromStr;

/// A scalar or an inclusive range. `"0:0.9:0.1"` yields 0, 0.1, ..., 0.9;
/// the stop value is included when it lands within half a step.
#[derive(Debug, Clone, PartialEq)]
pub enum RangeSpec {
    Scalar(f64),
    Range { start: f64, stop: f64, step: f64 },
}

impl RangeSpec {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            RangeSpec::Scalar(v) => vec![v],
            RangeSpec::Range { start, stop, step } => {
                let count = ((stop - start) / step + 0.5).floor() as usize;
                (0..=count).map(|i| start + i as f64 * step).collect()
            }
        }
    }

    pub fn scalar(&self) -> Option<f64> {
        match *self {
            RangeSpec::Scalar(v) => Some(v),
            RangeSpec::Range { .. } => None,
        }
    }
}

impl std::fmt::Display for RangeSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            RangeSpec::Scalar(v) => write!(f, "{v}"),
            RangeSpec::Range { start, stop, step } => write!(f, "{start}:{stop}:{step}"),
        }
    }
}

impl FromStr for RangeSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| -> Result<f64, String> {
            t.trim().parse::<f64>().map_err(|_| format!("invalid number '{t}' in range '{s}'"))
        };
        match parts.as_slice() {
            [one] => Ok(RangeSpec::Scalar(num(one)?)),
            [start, stop, step] => {
                let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
                if step <= 0.0 {
                    return Err(format!("range step must be positive in '{s}'"));
                }
                if stop < start {
                    return Err(format!("range stop must not precede start in '{s}'"));
                }
                Ok(RangeSpec::Range { start, stop, step })
            }
            _ => Err(format!("expected 'value' or 'start:stop:step', got '{s}'")),
        }
    }
}
