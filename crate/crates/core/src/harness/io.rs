//! JSON problem files. Complex entries are `[re, im]` pairs (a bare number
//! is read as a real entry); matrices are row-major arrays of rows.

use serde::{Deserialize, Serialize};

use crate::error::{KreinError, Result};
use crate::krein::{KreinSpace, DEFAULT_TOL};
use crate::linalg::{c64, identity, Mat};
use crate::lsq::WeightedProblem;
use crate::subspace::{range_subspace, Subspace};

use super::generate::GeneratedInstance;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JsonEntry {
    Pair([f64; 2]),
    Real(f64),
}

impl JsonEntry {
    fn value(self) -> crate::linalg::C64 {
        match self {
            JsonEntry::Pair([re, im]) => c64(re, im),
            JsonEntry::Real(re) => c64(re, 0.0),
        }
    }
}

pub type JsonMatrix = Vec<Vec<JsonEntry>>;

pub fn mat_to_json(m: &Mat) -> JsonMatrix {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| JsonEntry::Pair([m[(r, c)].re, m[(r, c)].im])).collect())
        .collect()
}

/// Reads `rows` as a `dim x cols` matrix; `cols = None` requires a square matrix.
pub fn json_to_mat(field: &str, rows: &JsonMatrix, dim: usize, cols: Option<usize>) -> Result<Mat> {
    if rows.len() != dim {
        return Err(KreinError::MalformedInput(format!("field {field}: expected {dim} rows, found {}", rows.len())));
    }
    let width = cols.unwrap_or(dim);
    let width = if cols.is_none() { width } else { rows.first().map_or(width, |r| r.len()) };
    for (i, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(KreinError::MalformedInput(format!(
                "field {field}: row {i} has {} entries, expected {width}",
                row.len()
            )));
        }
        if let Some(k) = row.iter().position(|e| !e.value().re.is_finite() || !e.value().im.is_finite()) {
            return Err(KreinError::MalformedInput(format!("field {field}: entry ({i}, {k}) is not finite")));
        }
    }
    Ok(Mat::from_fn(dim, width, |r, c| rows[r][c].value()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub dim: usize,
    #[serde(rename = "J")]
    pub j: JsonMatrix,
    #[serde(rename = "W")]
    pub w: JsonMatrix,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<JsonMatrix>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<JsonMatrix>,
    /// Column frame of a subspace (`dim` rows).
    #[serde(rename = "S", default, skip_serializing_if = "Option::is_none")]
    pub s: Option<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

pub fn parse_problem(text: &str) -> Result<ProblemFile> {
    serde_json::from_str(text).map_err(|e| {
        KreinError::MalformedInput(format!("line {}, column {}: {e}", e.line(), e.column()))
    })
}

/// A single matrix file: either a bare matrix or an object `{"T": matrix}`.
pub fn parse_operator(text: &str, dim: usize) -> Result<Mat> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OpFile {
        Bare(JsonMatrix),
        Wrapped {
            #[serde(rename = "T")]
            t: JsonMatrix,
        },
    }
    let op: OpFile = serde_json::from_str(text)
        .map_err(|e| KreinError::MalformedInput(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    let rows = match op {
        OpFile::Bare(m) => m,
        OpFile::Wrapped { t } => t,
    };
    json_to_mat("T", &rows, dim, None)
}

impl ProblemFile {
    pub fn space(&self, tol_override: Option<f64>) -> Result<KreinSpace> {
        if self.dim == 0 {
            return Err(KreinError::MalformedInput("field dim: must be positive".into()));
        }
        let j = json_to_mat("J", &self.j, self.dim, None)?;
        let tol = tol_override.or(self.tol).unwrap_or(DEFAULT_TOL);
        if !(tol >= 0.0 && tol.is_finite()) {
            return Err(KreinError::MalformedInput(format!("field tol: {tol} is not a nonnegative number")));
        }
        KreinSpace::with_tol(j, tol)
    }

    pub fn weight(&self) -> Result<Mat> {
        json_to_mat("W", &self.w, self.dim, None)
    }

    /// `(W, B, C)`; `C` defaults to the identity.
    pub fn problem(&self, tol_override: Option<f64>) -> Result<WeightedProblem> {
        let space = self.space(tol_override)?;
        let b = self.b.as_ref().ok_or_else(|| KreinError::MalformedInput("field B: required".into()))?;
        let b = json_to_mat("B", b, self.dim, None)?;
        let c = match &self.c {
            Some(c) => json_to_mat("C", c, self.dim, None)?,
            None => identity(self.dim),
        };
        WeightedProblem::new(self.weight()?, b, c, space)
    }

    /// The subspace `S`, or `R(B)` when no frame is given.
    pub fn subspace(&self) -> Result<Subspace> {
        if let Some(s) = &self.s {
            return Ok(Subspace::from_frame(json_to_mat("S", s, self.dim, Some(0))?));
        }
        match &self.b {
            Some(b) => range_subspace(&json_to_mat("B", b, self.dim, None)?),
            None => Err(KreinError::MalformedInput("field S: required when B is absent".into())),
        }
    }

    pub fn from_instance(inst: &GeneratedInstance) -> Self {
        let p = &inst.problem;
        ProblemFile {
            dim: p.space.dim(),
            j: mat_to_json(p.space.j_ref()),
            w: mat_to_json(&p.w),
            b: Some(mat_to_json(&p.b)),
            c: Some(mat_to_json(&p.c)),
            s: Some(mat_to_json(inst.subspace.frame())),
            tol: Some(p.space.tol()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_and_reals() {
        let text = r#"{"dim": 2, "J": [[1, 0], [0, -1]], "W": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]], "S": [[1], [0]]}"#;
        let f = parse_problem(text).unwrap();
        let space = f.space(None).unwrap();
        assert_eq!(space.signature(), (1, 1));
        assert_eq!(f.subspace().unwrap().dim(), 1);
        assert_eq!(f.weight().unwrap(), *space.j_ref());
    }

    #[test]
    fn diagnostics_name_the_field() {
        let text = r#"{"dim": 2, "J": [[1, 0], [0, -1]], "W": [[1, 0, 0], [0, 1]]}"#;
        let err = parse_problem(text).unwrap().weight().unwrap_err();
        assert!(err.to_string().contains("field W: row 0"), "{err}");
        let err = parse_problem("{\"dim\": 2,\n \"J\": [[1, 0], [0, -1]]\n").unwrap_err();
        assert!(err.to_string().contains("line"), "{err}");
        let err = parse_problem(r#"{"dim": 2, "J": [[1, 0], [0, -1]], "W": [[1, 0], [0, 1]], "X": 1}"#).unwrap_err();
        assert!(matches!(err, KreinError::MalformedInput(_)));
    }

    #[test]
    fn matrices_round_trip_exactly() {
        let m = Mat::from_fn(3, 3, |r, c| c64(0.1 * r as f64 + 1.0 / 3.0, -(c as f64) / 7.0));
        let text = serde_json::to_string(&mat_to_json(&m)).unwrap();
        let back: JsonMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(json_to_mat("M", &back, 3, None).unwrap(), m);
    }
}
