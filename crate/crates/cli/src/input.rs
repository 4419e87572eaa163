//! JSON problem and schedule files.

use std::fs;
use std::path::Path;

use ergokit::protocol::ControlSegment;
use ergokit::{BatterySpec, ComplexMatrix, QuantumState};
use num_complex::Complex;
use serde::Deserialize;

/// Malformed or invalid input. Always exits with status 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    energies: Vec<f64>,
    state: RawState,
    labels: Option<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    populations: Option<Vec<f64>>,
    matrix: Option<RawMatrix>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMatrix {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSegment {
    duration: f64,
    control: RawMatrix,
}

pub struct Problem {
    pub battery: BatterySpec,
    pub state: QuantumState,
    pub labels: Vec<String>,
}

fn read(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|e| InputError(format!("{}: cannot read file: {e}", path.display())))
}

fn parse<'a, T: Deserialize<'a>>(path: &Path, text: &'a str) -> Result<T, InputError> {
    // serde_json reports the line and column of the offending token
    serde_json::from_str(text).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn matrix(raw: &RawMatrix, dim: usize, field: &str) -> Result<ComplexMatrix, String> {
    for (part, rows) in [("re", &raw.re), ("im", &raw.im)] {
        if rows.len() != dim {
            return Err(format!(
                "field `{field}.{part}`: expected {dim} rows, found {}",
                rows.len()
            ));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(format!(
                    "field `{field}.{part}[{i}]`: expected {dim} entries, found {}",
                    row.len()
                ));
            }
            if let Some(j) = row.iter().position(|x| !x.is_finite()) {
                return Err(format!("field `{field}.{part}[{i}][{j}]`: value is not finite"));
            }
        }
    }
    Ok(ComplexMatrix::from_fn(dim, |i, j| {
        Complex::new(raw.re[i][j], raw.im[i][j])
    }))
}

pub fn load_problem(path: &Path) -> Result<Problem, InputError> {
    let text = read(path)?;
    let raw: RawProblem = parse(path, &text)?;
    let at = |msg: String| InputError(format!("{}: {msg}", path.display()));

    let battery = BatterySpec::new(raw.energies).map_err(|e| at(format!("field `energies`: {e}")))?;
    let d = battery.dim();
    let state = match (raw.state.populations, raw.state.matrix) {
        (Some(p), None) => {
            if p.len() != d {
                return Err(at(format!(
                    "field `state.populations`: expected {d} entries to match `energies`, found {}",
                    p.len()
                )));
            }
            QuantumState::diagonal(p).map_err(|e| at(format!("field `state.populations`: {e}")))?
        }
        (None, Some(m)) => {
            let rho = matrix(&m, d, "state.matrix").map_err(at)?;
            QuantumState::full(rho).map_err(|e| at(format!("field `state.matrix`: {e}")))?
        }
        (Some(_), Some(_)) => {
            return Err(at(
                "field `state`: give either `populations` or `matrix`, not both".into()
            ))
        }
        (None, None) => return Err(at("field `state`: missing `populations` or `matrix`".into())),
    };
    let labels = match raw.labels {
        Some(l) if l.len() != d => {
            return Err(at(format!("field `labels`: expected {d} entries, found {}", l.len())));
        }
        Some(l) => l,
        None => (0..d).map(|j| j.to_string()).collect(),
    };
    Ok(Problem { battery, state, labels })
}

/// Segments with controls checked against `tol` and symmetrized.
pub fn load_schedule(path: &Path, tol: f64) -> Result<Vec<ControlSegment<f64>>, InputError> {
    let text = read(path)?;
    let raw: Vec<RawSegment> = parse(path, &text)?;
    let at = |msg: String| InputError(format!("{}: {msg}", path.display()));
    let mut segments = Vec::with_capacity(raw.len());
    for (k, seg) in raw.iter().enumerate() {
        if !(seg.duration > 0.0) || !seg.duration.is_finite() {
            return Err(at(format!(
                "field `[{k}].duration`: must be positive and finite, got {}",
                seg.duration
            )));
        }
        let dim = seg.control.re.len();
        let v = matrix(&seg.control, dim, &format!("[{k}].control")).map_err(at)?;
        let deviation = v.hermitian_deviation();
        if !(deviation <= tol) {
            return Err(at(format!(
                "field `[{k}].control`: control is not Hermitian (deviation {deviation:e} exceeds {tol:e})"
            )));
        }
        segments.push(ControlSegment {
            duration: seg.duration,
            control: (&v + &v.adjoint()).scale_real(0.5),
        });
    }
    Ok(segments)
}
