//! On-disk representation of a multitwisted triple.

use std::fs;
use std::path::Path;

use multitwist::algebra::StarAlgebra;
use multitwist::numat::{Antilinear, Matrix};
use multitwist::triple::{Grading, Summand, Triple, TwistedTriple};
use multitwist::{Sign, C};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const FORMAT_VERSION: u32 = 1;

/// Tolerance used when re-validating an orthonormal basis read from disk.
const BASIS_TOL: f64 = 1e-9;

/// `{rows, cols, data}` with `data` a row-major list of `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDoc {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl MatrixDoc {
    pub fn from_matrix(m: &Matrix<f64>) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            data: m.data().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn to_matrix(&self) -> CliResult<Matrix<f64>> {
        if self.data.len() != self.rows * self.cols {
            return Err(CliError::Invalid(format!(
                "matrix declares {}x{} but has {} entries",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        Ok(Matrix::from_vec(
            self.rows,
            self.cols,
            self.data.iter().map(|[re, im]| C::new(*re, *im)).collect(),
        ))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraDoc {
    pub generators: Vec<MatrixDoc>,
    /// Orthonormal basis; recomputed from the generators when absent.
    pub basis: Option<Vec<MatrixDoc>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealStructureDoc {
    pub unitary: MatrixDoc,
    pub square_sign: Sign,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummandDoc {
    pub d_ell: MatrixDoc,
    pub nu_ell: MatrixDoc,
    /// Representative `ρ` with `ν̄_ℓ(b) = ρ b ρ⁻¹` on the algebra, if the
    /// twist is not `Ad ν_ℓ` there.
    #[serde(default)]
    pub nu_bar_rep: Option<MatrixDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripleDocument {
    pub format_version: u32,
    pub hilbert_dim: usize,
    pub algebra: AlgebraDoc,
    pub d: MatrixDoc,
    pub j: RealStructureDoc,
    pub grading: Option<MatrixDoc>,
    pub grading_sign: Option<Sign>,
    pub epsilon_prime: Sign,
    pub multitwist: Vec<SummandDoc>,
    pub provenance: String,
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: Option<serde_json::Value>,
}

impl TripleDocument {
    pub fn from_structure(tt: &TwistedTriple<f64>, provenance: &str) -> Self {
        let t = tt.triple();
        let m = MatrixDoc::from_matrix;
        Self {
            format_version: FORMAT_VERSION,
            hilbert_dim: t.dim_h(),
            algebra: AlgebraDoc {
                generators: t.algebra().generators().iter().map(m).collect(),
                basis: Some(t.algebra().basis().iter().map(m).collect()),
            },
            d: m(t.d()),
            j: RealStructureDoc {
                unitary: m(t.j().unitary()),
                square_sign: t.j().square_sign(),
            },
            grading: t.grading().map(|g| m(&g.gamma)),
            grading_sign: t.grading().map(|g| g.sign),
            epsilon_prime: t.epsilon_prime(),
            multitwist: tt
                .summands()
                .iter()
                .map(|s| SummandDoc {
                    d_ell: m(s.d()),
                    nu_ell: m(s.nu()),
                    nu_bar_rep: s.algebra_twist().map(m),
                })
                .collect(),
            provenance: provenance.to_string(),
        }
    }

    /// Rebuilds the structure, re-validating every structural invariant.
    pub fn to_structure(&self) -> CliResult<TwistedTriple<f64>> {
        if self.format_version != FORMAT_VERSION {
            return Err(CliError::Version {
                found: self.format_version.to_string(),
            });
        }
        let n = self.hilbert_dim;
        let square = |what: &str, m: &MatrixDoc| -> CliResult<Matrix<f64>> {
            if (m.rows, m.cols) != (n, n) {
                return Err(CliError::Invalid(format!(
                    "{what} is {}x{}, expected {n}x{n} (hilbert_dim)",
                    m.rows, m.cols
                )));
            }
            m.to_matrix()
        };
        let generators = self
            .algebra
            .generators
            .iter()
            .enumerate()
            .map(|(i, g)| square(&format!("algebra generator {i}"), g))
            .collect::<CliResult<Vec<_>>>()?;
        let algebra = match &self.algebra.basis {
            Some(basis) => {
                let basis = basis
                    .iter()
                    .enumerate()
                    .map(|(i, b)| square(&format!("algebra basis element {i}"), b))
                    .collect::<CliResult<Vec<_>>>()?;
                StarAlgebra::from_parts(generators, basis, BASIS_TOL)?
            }
            None => StarAlgebra::span_closure_in(n, generators, 1e-10, n * n)?,
        };
        let d = square("d", &self.d)?;
        let j = Antilinear::new(square("j.unitary", &self.j.unitary)?, self.j.square_sign, 1e-10)?;
        let grading = match (&self.grading, self.grading_sign) {
            (Some(g), Some(sign)) => Some(Grading {
                gamma: square("grading", g)?,
                sign,
            }),
            (None, None) => None,
            (Some(_), None) => return Err(CliError::Invalid("grading given without grading_sign".into())),
            (None, Some(_)) => return Err(CliError::Invalid("grading_sign given without grading".into())),
        };
        let triple = Triple::new(algebra, d, j, self.epsilon_prime, grading)?;
        let identity = Matrix::identity(n);
        let summands = self
            .multitwist
            .iter()
            .enumerate()
            .map(|(l, s)| {
                let d = square(&format!("multitwist[{l}].d_ell"), &s.d_ell)?;
                let nu = square(&format!("multitwist[{l}].nu_ell"), &s.nu_ell)?;
                let mut out = if nu == identity {
                    Summand::untwisted(d)
                } else {
                    Summand::new(d, nu)?
                };
                if let Some(r) = &s.nu_bar_rep {
                    out = out.with_algebra_twist(square(&format!("multitwist[{l}].nu_bar_rep"), r)?)?;
                }
                Ok(out)
            })
            .collect::<CliResult<Vec<_>>>()?;
        Ok(TwistedTriple::new(triple, summands)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("documents always serialize");
        s.push('\n');
        s
    }

    /// Parses a document from text; syntax errors carry a byte offset.
    pub fn from_json(text: &str) -> CliResult<Self> {
        // Check the version first so that a future format is reported as such
        // rather than as a schema mismatch.
        let probe: VersionProbe = serde_json::from_str(text).map_err(|e| parse_error(text, e))?;
        match probe.format_version {
            Some(serde_json::Value::Number(v)) if v.as_u64() == Some(FORMAT_VERSION as u64) => {}
            Some(v) => return Err(CliError::Version { found: v.to_string() }),
            None => return Err(CliError::Invalid("missing format_version".into())),
        }
        serde_json::from_str(text).map_err(|e| parse_error(text, e))
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        fs::write(path, self.to_json()).map_err(|e| CliError::io(path, e))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Converts serde_json's 1-based line/column into a byte offset.
pub(crate) fn parse_error(text: &str, e: serde_json::Error) -> CliError {
    let (line, column) = (e.line(), e.column());
    // serde_json points at the last byte it consumed; at end of input the
    // offending position is the end itself
    let offset = if e.is_eof() {
        text.len()
    } else if line == 0 {
        0
    } else {
        let start: usize = text.split_inclusive('\n').take(line - 1).map(str::len).sum();
        (start + column.saturating_sub(1)).min(text.len())
    };
    CliError::Parse {
        offset,
        line,
        column,
        message: e.to_string(),
    }
}

/// Drops the `asserts=` token from a provenance string so that it can be
/// embedded in a derived one.
pub fn strip_asserts(provenance: &str) -> String {
    provenance
        .split(';')
        .map(str::trim)
        .filter(|part| !part.starts_with("asserts=") && !part.is_empty())
        .collect::<Vec<_>>()
        .join("; ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use multitwist::examples::{circle_bundle, fuzzy_torus2, FuzzyParams};

    #[test]
    fn structure_round_trip_is_exact() {
        let m = fuzzy_torus2(&FuzzyParams::<f64>::new(2, 1)).unwrap();
        let doc = TripleDocument::from_structure(&m.triple, &m.provenance);
        let back = TripleDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_structure().unwrap(), m.triple);
    }

    #[test]
    fn algebra_twist_survives() {
        let cb = circle_bundle(&FuzzyParams::<f64>::new(2, 1), 0.3, None).unwrap();
        let doc = TripleDocument::from_structure(&cb.model.triple, &cb.model.provenance);
        assert!(doc.multitwist[1].nu_bar_rep.is_some());
        let back = TripleDocument::from_json(&doc.to_json())
            .unwrap()
            .to_structure()
            .unwrap();
        assert_eq!(back, cb.model.triple);
    }

    #[test]
    fn truncated_text_reports_offset() {
        let m = fuzzy_torus2(&FuzzyParams::<f64>::new(2, 1)).unwrap();
        let text = TripleDocument::from_structure(&m.triple, "x").to_json();
        let cut = &text[..100];
        match TripleDocument::from_json(cut) {
            Err(CliError::Parse { offset, .. }) => assert_eq!(offset, 100),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn version_mismatch() {
        let text = r#"{"format_version": 2, "whatever": true}"#;
        assert!(matches!(TripleDocument::from_json(text), Err(CliError::Version { .. })));
    }

    #[test]
    fn strip_asserts_token() {
        assert_eq!(strip_asserts("builder=x q=2; note; asserts=a,b"), "builder=x q=2; note");
    }
}
