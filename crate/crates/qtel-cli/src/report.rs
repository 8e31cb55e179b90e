//! Report emission.
//!
//! Text mode prints a header and a branch table; machine mode emits one JSON
//! record per line. Record fields are declared in alphabetical order so a
//! parse-and-re-emit through a generic JSON value is byte-identical.

use std::io::Write;

use serde::{Deserialize, Serialize};

use qtel_core::{ComplexMatrix, RecoveryFamily, Result, SessionResult, TeleportReport};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BranchLine {
    pub fidelity: f64,
    pub i: usize,
    pub k: usize,
    pub label: String,
    pub probability: f64,
}

/// Human label for a recovery operator: the four two-level standards when
/// they match exactly, otherwise a positional name.
pub fn recovery_label(family: &RecoveryFamily, i: usize, k: usize) -> Result<String> {
    let op = family.operator(i, k)?;
    if family.n3() == 2 {
        let one = qtel_core::Complex64::new(1.0, 0.0);
        let eye = ComplexMatrix::identity(2);
        let mut flip = ComplexMatrix::zeros(2, 2);
        flip.set(0, 1, one);
        flip.set(1, 0, one);
        let mut sign = ComplexMatrix::identity(2);
        sign.set(1, 1, -one);
        let mut iy = ComplexMatrix::zeros(2, 2);
        iy.set(0, 1, one);
        iy.set(1, 0, -one);
        for (label, reference) in [("I", eye), ("X", flip), ("Z", sign), ("iY", iy)] {
            if op.max_abs_diff(&reference) < 1e-10 {
                return Ok(label.to_string());
            }
        }
    }
    Ok(format!("O({i},{k})"))
}

fn branch_lines(report: &TeleportReport, family: &RecoveryFamily) -> Result<Vec<BranchLine>> {
    report
        .branches
        .iter()
        .map(|b| {
            Ok(BranchLine {
                fidelity: b.fidelity,
                i: b.i,
                k: b.k,
                label: recovery_label(family, b.i, b.k)?,
                probability: b.probability,
            })
        })
        .collect()
}

fn session_line(session: &SessionResult, family: &RecoveryFamily) -> Result<BranchLine> {
    Ok(BranchLine {
        fidelity: session.fidelity,
        i: session.outcome_i,
        k: session.outcome_k,
        label: recovery_label(family, session.outcome_i, session.outcome_k)?,
        probability: session.probability,
    })
}

fn write_header(
    out: &mut impl Write,
    name: &str,
    dims: (usize, usize, usize),
    mode: &str,
) -> Result<()> {
    writeln!(
        out,
        "scenario {name}: n1={} n2={} n3={} mode={mode}",
        dims.0, dims.1, dims.2
    )?;
    Ok(())
}

fn write_table(out: &mut impl Write, lines: &[BranchLine]) -> Result<()> {
    writeln!(
        out,
        "{:>4} {:>4} {:>14} {:>14}   {}",
        "i", "k", "probability", "fidelity", "recovery"
    )?;
    for l in lines {
        writeln!(
            out,
            "{:>4} {:>4} {:>14.10} {:>14.10}   {}",
            l.i, l.k, l.probability, l.fidelity, l.label
        )?;
    }
    Ok(())
}

/// Branch-table report for exhaustive and sampled runs.
pub fn emit_run_text(
    out: &mut impl Write,
    name: &str,
    report: &TeleportReport,
    family: &RecoveryFamily,
    mode: &str,
) -> Result<()> {
    write_header(out, name, (report.n1, report.n2, report.n3), mode)?;
    if report.branches.is_empty() {
        return Ok(());
    }
    write_table(out, &branch_lines(report, family)?)?;
    writeln!(
        out,
        "min fidelity {:.12}, mean fidelity {:.12}",
        report.min_fidelity, report.mean_fidelity
    )?;
    Ok(())
}

pub fn emit_run_jsonl(
    out: &mut impl Write,
    report: &TeleportReport,
    family: &RecoveryFamily,
) -> Result<()> {
    for line in branch_lines(report, family)? {
        let json = serde_json::to_string(&line)
            .map_err(|e| qtel_core::Error::Validation(format!("serialization failed: {e}")))?;
        writeln!(out, "{json}")?;
    }
    Ok(())
}

pub fn emit_session_text(
    out: &mut impl Write,
    name: &str,
    session: &SessionResult,
    family: &RecoveryFamily,
) -> Result<()> {
    write_header(out, name, (family.n1(), family.n2(), family.n3()), "session")?;
    let line = session_line(session, family)?;
    write_table(out, std::slice::from_ref(&line))?;
    let hex: String = session.frame.iter().map(|b| format!("{b:02x}")).collect();
    writeln!(out, "frame {hex}")?;
    writeln!(out, "fidelity {:.12}", session.fidelity)?;
    Ok(())
}

pub fn emit_session_jsonl(
    out: &mut impl Write,
    session: &SessionResult,
    family: &RecoveryFamily,
) -> Result<()> {
    let line = session_line(session, family)?;
    let json = serde_json::to_string(&line)
        .map_err(|e| qtel_core::Error::Validation(format!("serialization failed: {e}")))?;
    writeln!(out, "{json}")?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct FeasibilityLine {
    pub feasible: bool,
    pub lambdas: Vec<f64>,
    pub required: usize,
}

pub fn emit_feasibility_text(
    out: &mut impl Write,
    name: &str,
    verdict: &qtel_core::FeasibilityVerdict,
) -> Result<()> {
    writeln!(out, "scenario {name}: feasibility for n1={}", verdict.required)?;
    let spectrum: Vec<String> = verdict.lambdas.iter().map(|l| format!("{l:.10}")).collect();
    writeln!(out, "schmidt spectrum: {}", spectrum.join(" "))?;
    writeln!(
        out,
        "verdict: {}",
        if verdict.feasible { "feasible" } else { "infeasible" }
    )?;
    Ok(())
}

pub fn emit_feasibility_jsonl(
    out: &mut impl Write,
    verdict: &qtel_core::FeasibilityVerdict,
) -> Result<()> {
    let line = FeasibilityLine {
        feasible: verdict.feasible,
        lambdas: verdict.lambdas.clone(),
        required: verdict.required,
    };
    let json = serde_json::to_string(&line)
        .map_err(|e| qtel_core::Error::Validation(format!("serialization failed: {e}")))?;
    writeln!(out, "{json}")?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct VerifyLine {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub residual: f64,
    pub tolerance: f64,
    pub verdict: String,
}

pub fn emit_verify_text(out: &mut impl Write, name: &str, line: &VerifyLine) -> Result<()> {
    writeln!(
        out,
        "scenario {name}: n1={} n2={} n3={} verify",
        line.n1, line.n2, line.n3
    )?;
    writeln!(out, "condition residual {:.3e} (tolerance {:.3e})", line.residual, line.tolerance)?;
    writeln!(out, "verdict: {}", line.verdict)?;
    Ok(())
}

pub fn emit_verify_jsonl(out: &mut impl Write, line: &VerifyLine) -> Result<()> {
    let json = serde_json::to_string(line)
        .map_err(|e| qtel_core::Error::Validation(format!("serialization failed: {e}")))?;
    writeln!(out, "{json}")?;
    Ok(())
}
