//! Subcommand implementations. Each returns the process exit status on
//! success (0, or 1 for a condition violation); errors map to status 2.

use std::io::Write;
use std::path::Path;

use multitwist::constructions::{
    clifford_rescale, fluctuate_eps, fluctuate_plain, multiconformal_rescale, tensor_product,
};
use multitwist::examples::{
    asserts_from_provenance, asymmetric_torus, asymmetric_torus_seeded, circle_bundle, fuzzy_circle_even, fuzzy_torus2,
    fuzzy_torus3, FuzzyParams, Model,
};
use multitwist::numat::herm_eigenvalues;
use multitwist::triple::{run_all, AssertSet, TwistedTriple};
use multitwist::ConditionReport;
use serde::Serialize;

use crate::document::{strip_asserts, TripleDocument};
use crate::error::{CliError, CliResult};
use crate::specs::{FormSpec, KSpec};

/// Exit status for a passing run.
pub const EXIT_OK: i32 = 0;
/// Exit status when an asserted condition fails.
pub const EXIT_VIOLATION: i32 = 1;
/// Exit status for invalid input or usage.
pub const EXIT_INPUT: i32 = 2;

const TWISTED_ASSERTS: &str = "structural,mt_zero_order,mt_first_order,epsilon_prime,regularity";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Table,
    Json,
}

#[derive(Clone, Copy, Debug)]
pub struct Globals {
    pub tol: f64,
    pub format: Format,
    pub seed: u64,
}

impl Default for Globals {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            format: Format::Table,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExampleOpts {
    pub q: usize,
    pub p: usize,
    pub t: f64,
    pub k1: Option<String>,
    pub k2: Option<String>,
    pub spread: f64,
    pub single_summand: bool,
}

impl Default for ExampleOpts {
    fn default() -> Self {
        Self {
            q: 2,
            p: 1,
            t: 0.3,
            k1: None,
            k2: None,
            spread: 0.5,
            single_summand: false,
        }
    }
}

pub const EXAMPLE_NAMES: &[&str] = &[
    "fuzzy-torus2",
    "fuzzy-circle-even",
    "fuzzy-torus3",
    "asymmetric-torus",
    "circle-bundle",
];

fn io_err(e: std::io::Error) -> CliError {
    CliError::Io {
        path: "<stdout>".into(),
        source: e,
    }
}

fn load_structure(path: &Path) -> CliResult<(TripleDocument, TwistedTriple<f64>)> {
    let doc = TripleDocument::load(path)?;
    let tt = doc.to_structure()?;
    Ok((doc, tt))
}

/// Writes the document to `out`, or to `w` when no path is given.
fn emit(doc: &TripleDocument, out: Option<&Path>, w: &mut dyn Write) -> CliResult<()> {
    match out {
        Some(path) => {
            doc.save(path)?;
            writeln!(
                w,
                "wrote {} (hilbert_dim {}, {} summands)",
                path.display(),
                doc.hilbert_dim,
                doc.multitwist.len()
            )
            .map_err(io_err)
        }
        None => w.write_all(doc.to_json().as_bytes()).map_err(io_err),
    }
}

fn derived_provenance(what: String, inputs: &[&TripleDocument], asserts: &str) -> String {
    let inputs: Vec<String> = inputs
        .iter()
        .map(|d| format!("[{}]", strip_asserts(&d.provenance)))
        .collect();
    format!("builder={what} from={}; asserts={asserts}", inputs.join(" "))
}

fn with_grading_twist(tt: &TwistedTriple<f64>) -> String {
    if tt.triple().is_even() {
        format!("{TWISTED_ASSERTS},grading_twist")
    } else {
        TWISTED_ASSERTS.to_string()
    }
}

pub fn build_example(name: &str, opts: &ExampleOpts, seed: u64) -> CliResult<Model<f64>> {
    let params = FuzzyParams::<f64>::new(opts.q, opts.p);
    Ok(match name {
        "fuzzy-torus2" => fuzzy_torus2(&params)?,
        "fuzzy-circle-even" => fuzzy_circle_even(&params)?,
        "fuzzy-torus3" => fuzzy_torus3(&params, !opts.single_summand)?,
        "asymmetric-torus" => {
            if opts.k1.is_none() && opts.k2.is_none() {
                asymmetric_torus_seeded(&params, seed, opts.spread)?
            } else {
                let k = |s: &Option<String>| -> CliResult<_> {
                    s.as_deref().unwrap_or("id").parse::<KSpec>()?.resolve_fuzzy(&params)
                };
                let mut m = asymmetric_torus(&params, &k(&opts.k1)?, &k(&opts.k2)?)?;
                m.provenance = m.provenance.replace(
                    "k=explicit",
                    &format!(
                        "k1={} k2={}",
                        opts.k1.as_deref().unwrap_or("id"),
                        opts.k2.as_deref().unwrap_or("id")
                    ),
                );
                m
            }
        }
        "circle-bundle" => circle_bundle(&params, opts.t, None)?.model,
        other => {
            return Err(CliError::Usage(format!(
                "unknown example '{other}' (expected one of {})",
                EXAMPLE_NAMES.join(", ")
            )))
        }
    })
}

pub fn cmd_example(
    name: &str,
    opts: &ExampleOpts,
    g: &Globals,
    out: Option<&Path>,
    w: &mut dyn Write,
) -> CliResult<i32> {
    let m = build_example(name, opts, g.seed)?;
    emit(&TripleDocument::from_structure(&m.triple, &m.provenance), out, w)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct CheckOutput<'a> {
    tolerance: f64,
    asserts: String,
    passed: bool,
    failing: &'a [String],
    missing: &'a [String],
    report: &'a ConditionReport,
}

fn fmt_sign(s: i8) -> &'static str {
    if s > 0 {
        "+1"
    } else {
        "-1"
    }
}

fn render_table(report: &ConditionReport, asserts: &AssertSet, w: &mut dyn Write) -> std::io::Result<()> {
    writeln!(
        w,
        "{:<28} {:>7} {:>13} {:>13} {:>13}  {:<4} {:<8}",
        "condition", "summand", "relative", "absolute", "scale", "pass", "asserted"
    )?;
    for e in &report.entries {
        let summand = e.summand.map_or("-".to_string(), |s| s.to_string());
        let mut flags = String::new();
        if e.vacuous {
            flags.push_str(" (vacuous)");
        }
        if let Some((a, b)) = e.witness {
            if !e.pass {
                flags.push_str(&format!(" witness=({a},{b})"));
            }
        }
        writeln!(
            w,
            "{:<28} {:>7} {:>13.6e} {:>13.6e} {:>13.6e}  {:<4} {:<8}{}",
            e.id,
            summand,
            e.relative_residual,
            e.absolute_residual,
            e.scale,
            if e.pass { "ok" } else { "FAIL" },
            if asserts.contains(&e.id) { "yes" } else { "no" },
            flags
        )?;
    }
    let signs: Vec<&str> = report.measured_epsilon_prime.iter().map(|&s| fmt_sign(s)).collect();
    writeln!(w, "measured eps' per summand: {}", signs.join(" "))?;
    for n in &report.notes {
        writeln!(w, "note: {n}")?;
    }
    Ok(())
}

pub fn cmd_check(path: &Path, asserts: Option<&str>, g: &Globals, w: &mut dyn Write) -> CliResult<i32> {
    let (doc, tt) = load_structure(path)?;
    let asserts = match asserts {
        Some(s) => s.parse::<AssertSet>()?,
        None => asserts_from_provenance(&doc.provenance).unwrap_or(AssertSet::All),
    };
    let report = run_all(&tt, g.tol);
    let verdict = report.evaluate(&asserts);
    match g.format {
        Format::Table => {
            render_table(&report, &asserts, w).map_err(io_err)?;
            writeln!(w, "asserts: {asserts}").map_err(io_err)?;
            if !verdict.missing.is_empty() {
                writeln!(w, "asserted but not measured: {}", verdict.missing.join(", ")).map_err(io_err)?;
            }
            if verdict.passed {
                writeln!(w, "verdict: PASS at tol {:e}", g.tol)
            } else {
                writeln!(w, "verdict: FAIL at tol {:e} ({})", g.tol, verdict.failing.join(", "))
            }
            .map_err(io_err)?;
        }
        Format::Json => {
            let out = CheckOutput {
                tolerance: g.tol,
                asserts: asserts.to_string(),
                passed: verdict.passed,
                failing: &verdict.failing,
                missing: &verdict.missing,
                report: &report,
            };
            let text = serde_json::to_string_pretty(&out).expect("report serializes");
            writeln!(w, "{text}").map_err(io_err)?;
        }
    }
    Ok(if verdict.passed { EXIT_OK } else { EXIT_VIOLATION })
}

pub fn cmd_tensor(first: &Path, second: &Path, out: Option<&Path>, w: &mut dyn Write) -> CliResult<i32> {
    let (d1, t1) = load_structure(first)?;
    let (d2, t2) = load_structure(second)?;
    let tt = tensor_product(&t1, &t2)?;
    let prov = derived_provenance("tensor".into(), &[&d1, &d2], TWISTED_ASSERTS);
    emit(&TripleDocument::from_structure(&tt, &prov), out, w)?;
    Ok(EXIT_OK)
}

pub fn cmd_fluctuate(
    path: &Path,
    form: &str,
    eps_preserving: bool,
    g: &Globals,
    out: Option<&Path>,
    w: &mut dyn Write,
) -> CliResult<i32> {
    let (doc, tt) = load_structure(path)?;
    let spec: FormSpec = form.parse()?;
    let omega = spec.resolve(&tt, g.seed)?;
    let what = format!(
        "fluctuate eps_preserving={eps_preserving} form={}",
        spec.describe(g.seed)
    );
    let mut log = Vec::new();
    let result = if eps_preserving {
        let r = fluctuate_eps(&tt, &omega)?;
        log.push(format!("hermiticity defect: {:e}", r.hermiticity_defect));
        log.push(format!(
            "commutator equality: relative {:e} ({})",
            r.commutator_gap.relative_residual,
            if r.commutator_gap.pass { "ok" } else { "FAIL" }
        ));
        log.extend(r.notes.iter().map(|n| format!("note: {n}")));
        let asserts = if r.triple.triple().is_even() {
            with_grading_twist(&r.triple)
        } else {
            TWISTED_ASSERTS.to_string()
        };
        (r.triple, asserts)
    } else {
        (
            fluctuate_plain(&tt, &omega)?,
            "structural,mt_zero_order,mt_first_order".to_string(),
        )
    };
    let (tt, asserts) = result;
    let prov = derived_provenance(what, &[&doc], &asserts);
    let new_doc = TripleDocument::from_structure(&tt, &prov);
    emit(&new_doc, out, w)?;
    if out.is_some() {
        for line in log {
            writeln!(w, "{line}").map_err(io_err)?;
        }
    }
    Ok(EXIT_OK)
}

pub fn cmd_rescale(
    path: &Path,
    ks: &[String],
    clifford: bool,
    out: Option<&Path>,
    w: &mut dyn Write,
) -> CliResult<i32> {
    let (doc, tt) = load_structure(path)?;
    let specs = ks.iter().map(|s| s.parse::<KSpec>()).collect::<CliResult<Vec<_>>>()?;
    let matrices = specs.iter().map(|s| s.resolve_on(&tt)).collect::<CliResult<Vec<_>>>()?;
    let label = ks.join(",");
    let mut log = Vec::new();
    let (new_tt, what, asserts) = if clifford {
        let [k] = matrices.as_slice() else {
            return Err(CliError::Usage(format!(
                "Clifford rescaling takes exactly one --k, got {}",
                matrices.len()
            )));
        };
        let r = clifford_rescale(&tt, k)?;
        log.push(format!("Cl_D(A) dimension: {}", r.clifford_dim));
        log.push(format!("k distance from Cl_D(A): {:e}", r.k_membership));
        log.push(format!("k distance from A: {:e}", r.k_outside_algebra));
        log.push(format!("relative [k, JkJ^-1]: {:e}", r.k_commutator));
        log.push(format!(
            "twist automorphism witness: basis element {} leaves A by {:e}",
            r.automorphism_witness.0, r.automorphism_witness.1
        ));
        log.push(format!("grading kept: {}", r.grading_kept));
        log.extend(r.notes.iter().map(|n| format!("note: {n}")));
        (
            r.triple,
            format!("rescale clifford=true k={label}"),
            TWISTED_ASSERTS.to_string(),
        )
    } else {
        let new_tt = multiconformal_rescale(&tt, &matrices)?;
        let asserts = with_grading_twist(&new_tt);
        (new_tt, format!("rescale clifford=false k={label}"), asserts)
    };
    let prov = derived_provenance(what, &[&doc], &asserts);
    emit(&TripleDocument::from_structure(&new_tt, &prov), out, w)?;
    if out.is_some() {
        for line in log {
            writeln!(w, "{line}").map_err(io_err)?;
        }
    }
    Ok(EXIT_OK)
}

pub fn cmd_spectrum(path: &Path, g: &Globals, w: &mut dyn Write) -> CliResult<i32> {
    let (_, tt) = load_structure(path)?;
    let ev = herm_eigenvalues(tt.triple().d())?;
    match g.format {
        Format::Table => {
            for v in &ev {
                writeln!(w, "{v:.16e}").map_err(io_err)?;
            }
        }
        Format::Json => {
            let text = serde_json::to_string(&serde_json::json!({ "eigenvalues": ev })).expect("numbers serialize");
            writeln!(w, "{text}").map_err(io_err)?;
        }
    }
    Ok(EXIT_OK)
}
