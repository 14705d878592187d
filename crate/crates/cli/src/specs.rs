//! Inline specifications for rescaling elements and one-forms.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use multitwist::constructions::{exp_hermitian, make_one_form, random_terms, OneForm};
use multitwist::examples::{random_positive, FuzzyParams};
use multitwist::numat::{op_norm, Matrix};
use multitwist::triple::TwistedTriple;
use serde::Deserialize;

use crate::document::{parse_error, MatrixDoc, FORMAT_VERSION};
use crate::error::{CliError, CliResult};

/// A positive element used for rescaling.
///
/// * `id`
/// * `exp:S[:N]` — `exp(S·x)` with `x` the `N`-th Hermitian direction
///   (default 1): `h_N` for the fuzzy builders, the normalized Hermitian part
///   of generator `N` for a loaded algebra
/// * `gexp:S[:N]` — as `exp:`, with `x` multiplied by the grading (leaves the
///   algebra; for Clifford rescaling)
/// * `rand:SEED[:SPREAD]` — `exp(SPREAD·x)` for a seeded random Hermitian `x`
///   of norm one (default spread 0.5)
/// * anything else is read as a path to a JSON matrix `{rows, cols, data}`
#[derive(Clone, Debug, PartialEq)]
pub enum KSpec {
    Identity,
    Exp { scale: f64, index: usize },
    GradedExp { scale: f64, index: usize },
    Random { seed: u64, spread: f64 },
    File(PathBuf),
}

fn num<T: FromStr>(s: &str, what: &str, spec: &str) -> CliResult<T> {
    s.parse()
        .map_err(|_| CliError::Usage(format!("invalid {what} '{s}' in spec '{spec}'")))
}

impl FromStr for KSpec {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let index = |i: usize| -> CliResult<usize> {
            let n: usize = parts.get(i).map_or(Ok(1), |p| num(p, "direction index", s))?;
            if n == 0 {
                return Err(CliError::Usage(format!("direction indices start at 1 in '{s}'")));
            }
            Ok(n)
        };
        match parts[0] {
            "id" if parts.len() == 1 => Ok(KSpec::Identity),
            "exp" | "gexp" if (2..=3).contains(&parts.len()) => {
                let scale = num(parts[1], "scale", s)?;
                let index = index(2)?;
                Ok(if parts[0] == "exp" {
                    KSpec::Exp { scale, index }
                } else {
                    KSpec::GradedExp { scale, index }
                })
            }
            "rand" if (2..=3).contains(&parts.len()) => Ok(KSpec::Random {
                seed: num(parts[1], "seed", s)?,
                spread: parts.get(2).map_or(Ok(0.5), |p| num(p, "spread", s))?,
            }),
            "id" | "exp" | "gexp" | "rand" => Err(CliError::Usage(format!("malformed rescaling spec '{s}'"))),
            _ => Ok(KSpec::File(PathBuf::from(s))),
        }
    }
}

fn load_matrix(path: &Path) -> CliResult<Matrix<f64>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let m: MatrixDoc = serde_json::from_str(&text).map_err(|e| parse_error(&text, e))?;
    m.to_matrix()
}

fn normalized(x: &Matrix<f64>) -> CliResult<Matrix<f64>> {
    let n = op_norm(x);
    if n == 0.0 {
        return Err(CliError::Usage("direction is zero".into()));
    }
    Ok(x.scale_real(1.0 / n))
}

impl KSpec {
    /// A `q × q` element for the fuzzy builders.
    pub fn resolve_fuzzy(&self, params: &FuzzyParams<f64>) -> CliResult<Matrix<f64>> {
        let q = params.q;
        match self {
            KSpec::Identity => Ok(Matrix::identity(q)),
            KSpec::Exp { scale, index } => {
                let hs = params.derivations()?;
                let h = hs
                    .get(index - 1)
                    .ok_or_else(|| CliError::Usage(format!("direction index {index} out of range 1..=3")))?;
                Ok(exp_hermitian(h, *scale)?)
            }
            KSpec::GradedExp { .. } => Err(CliError::Usage(
                "gexp: leaves the algebra and cannot rescale a fuzzy builder".into(),
            )),
            KSpec::Random { seed, spread } => Ok(random_positive(q, *seed, *spread)?),
            KSpec::File(p) => load_matrix(p),
        }
    }

    /// An element acting on the Hilbert space of `tt`.
    pub fn resolve_on(&self, tt: &TwistedTriple<f64>) -> CliResult<Matrix<f64>> {
        let t = tt.triple();
        let direction = |index: usize| -> CliResult<Matrix<f64>> {
            let gens = t.algebra().generators();
            let g = gens
                .get(index - 1)
                .ok_or_else(|| CliError::Usage(format!("direction index {index} out of range 1..={}", gens.len())))?;
            normalized(&g.hermitian_part())
        };
        match self {
            KSpec::Identity => Ok(Matrix::identity(t.dim_h())),
            KSpec::Exp { scale, index } => Ok(exp_hermitian(&direction(*index)?, *scale)?),
            KSpec::GradedExp { scale, index } => {
                let g = t
                    .grading()
                    .ok_or_else(|| CliError::Usage("gexp: needs a graded triple".into()))?;
                let x = normalized(&g.gamma.matmul(&direction(*index)?).hermitian_part())?;
                Ok(exp_hermitian(&x, *scale)?)
            }
            KSpec::Random { seed, spread } => {
                let (a, _) = random_terms(t.algebra(), *seed, 1, 1.0).remove(0);
                Ok(exp_hermitian(&normalized(&a.hermitian_part())?, *spread)?)
            }
            KSpec::File(p) => load_matrix(p),
        }
    }
}

/// A one-form: `random[:SEED[:TERMS[:SCALE]]]` (symmetrized, seed defaulting
/// to the global one) or a path to a form file.
#[derive(Clone, Debug, PartialEq)]
pub enum FormSpec {
    Random {
        seed: Option<u64>,
        terms: usize,
        scale: f64,
    },
    File(PathBuf),
}

impl FromStr for FormSpec {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts[0] != "random" {
            return Ok(FormSpec::File(PathBuf::from(s)));
        }
        if parts.len() > 4 {
            return Err(CliError::Usage(format!("malformed form spec '{s}'")));
        }
        let terms: usize = parts.get(2).map_or(Ok(2), |p| num(p, "term count", s))?;
        if terms == 0 {
            return Err(CliError::Usage("a random form needs at least one term".into()));
        }
        Ok(FormSpec::Random {
            seed: parts.get(1).map(|p| num(p, "seed", s)).transpose()?,
            terms,
            scale: parts.get(3).map_or(Ok(1.0), |p| num(p, "scale", s))?,
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TermDoc {
    a: MatrixDoc,
    b: MatrixDoc,
}

/// `{format_version, kind: "one_form", symmetrize, terms: [{a, b}]}`; the
/// same terms are used for every summand.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FormDoc {
    format_version: u32,
    kind: String,
    symmetrize: bool,
    terms: Vec<TermDoc>,
}

impl FormSpec {
    pub fn resolve(&self, tt: &TwistedTriple<f64>, default_seed: u64) -> CliResult<OneForm<f64>> {
        match self {
            FormSpec::Random { seed, terms, scale } => {
                let terms = random_terms(tt.triple().algebra(), seed.unwrap_or(default_seed), *terms, *scale);
                Ok(make_one_form(tt, &terms, true)?)
            }
            FormSpec::File(path) => {
                let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                let doc: FormDoc = serde_json::from_str(&text).map_err(|e| parse_error(&text, e))?;
                if doc.format_version != FORMAT_VERSION {
                    return Err(CliError::Version {
                        found: doc.format_version.to_string(),
                    });
                }
                if doc.kind != "one_form" {
                    return Err(CliError::Invalid(format!("expected kind one_form, found {}", doc.kind)));
                }
                let terms = doc
                    .terms
                    .iter()
                    .map(|t| Ok((t.a.to_matrix()?, t.b.to_matrix()?)))
                    .collect::<CliResult<Vec<_>>>()?;
                Ok(make_one_form(tt, &terms, doc.symmetrize)?)
            }
        }
    }

    /// Text used in provenance strings.
    pub fn describe(&self, default_seed: u64) -> String {
        match self {
            FormSpec::Random { seed, terms, scale } => {
                format!("random:{}:{terms}:{scale}", seed.unwrap_or(default_seed))
            }
            FormSpec::File(p) => format!("file:{}", p.display()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_k_specs() {
        assert_eq!("id".parse::<KSpec>().unwrap(), KSpec::Identity);
        assert_eq!("exp:0.4".parse::<KSpec>().unwrap(), KSpec::Exp { scale: 0.4, index: 1 });
        assert_eq!(
            "gexp:0.3:2".parse::<KSpec>().unwrap(),
            KSpec::GradedExp { scale: 0.3, index: 2 }
        );
        assert_eq!(
            "rand:7".parse::<KSpec>().unwrap(),
            KSpec::Random { seed: 7, spread: 0.5 }
        );
        assert_eq!("k.json".parse::<KSpec>().unwrap(), KSpec::File("k.json".into()));
        assert!("exp:x".parse::<KSpec>().is_err());
        assert!("exp:1:0".parse::<KSpec>().is_err());
        assert!("rand".parse::<KSpec>().is_err());
    }

    #[test]
    fn parse_form_specs() {
        assert_eq!(
            "random".parse::<FormSpec>().unwrap(),
            FormSpec::Random {
                seed: None,
                terms: 2,
                scale: 1.0
            }
        );
        assert_eq!(
            "random:3:4:0.5".parse::<FormSpec>().unwrap(),
            FormSpec::Random {
                seed: Some(3),
                terms: 4,
                scale: 0.5
            }
        );
        assert!("random:3:0".parse::<FormSpec>().is_err());
        assert_eq!("w.json".parse::<FormSpec>().unwrap(), FormSpec::File("w.json".into()));
    }

    #[test]
    fn fuzzy_exp_uses_derivation() {
        let p = FuzzyParams::<f64>::new(2, 1);
        let k = KSpec::Exp { scale: 0.4, index: 1 }.resolve_fuzzy(&p).unwrap();
        let h1 = p.derivations().unwrap()[0].clone();
        assert_eq!(k, exp_hermitian(&h1, 0.4).unwrap());
    }
}
