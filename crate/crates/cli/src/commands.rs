//! Command implementations. Each one decodes its input, runs the library
//! operation and turns every certified bound into a [`Check`].

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use povmround::{
    fourier, orthogonalize, orthogonalize_symmetry_preserving, repair, unitary_to_pvm, verify_majorant_certificate,
    minimal_majorant, BlockAlgebra, Check, Element64, OrthReport, Pvm64, Tolerances,
};

use crate::error::CliError;
use crate::format::{elements_to_repr, element_to_repr, InstanceFile, ReportFile, SolutionRepr, REPORT_VERSION};
use crate::generate::{sweep_instance, SweepConfig};

/// Additive slack on the headline error bounds.
pub const BOUND_SLACK: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Orthogonalize,
    OrthogonalizeSym,
    Repair,
    Fourier,
    Majorant,
    Verify,
    Gen,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Orthogonalize => "orthogonalize",
            Command::OrthogonalizeSym => "orthogonalize-sym",
            Command::Repair => "repair",
            Command::Fourier => "fourier",
            Command::Majorant => "majorant",
            Command::Verify => "verify",
            Command::Gen => "gen",
            Command::Sweep => "sweep",
        }
    }
}

pub fn digest(bytes: &[u8]) -> String {
    format!("sha256:{:x}", Sha256::digest(bytes))
}

fn report(command: Command, input: &[u8], tol: &Tolerances, meta: Value, result: Value, checks: Vec<Check>, start: Instant) -> ReportFile {
    let passed = checks.iter().all(|c| c.pass);
    ReportFile {
        version: REPORT_VERSION.into(),
        command: command.name().into(),
        input_digest: digest(input),
        tolerances: tol.clone(),
        instance_metadata: meta,
        result,
        duration_ms: start.elapsed().as_secs_f64() * 1e3,
        checks,
        passed,
    }
}

fn sum_residual(alg: &BlockAlgebra, xs: &[Element64]) -> f64 {
    let sum = xs.iter().fold(Element64::zeros(alg), |acc, x| &acc + x);
    (&sum - &Element64::identity(alg)).max_abs()
}

fn orth_checks(alg: &BlockAlgebra, rep: &OrthReport<f64>, tol: &Tolerances) -> Vec<Check> {
    let sums = rep.selection.rank_sums(alg.num_blocks());
    let rank_gap = sums.iter().zip(alg.dims()).map(|(&s, &d)| s.abs_diff(d)).max().unwrap_or(0);
    let root = 1.0 - rep.error.max(0.0).sqrt();
    vec![
        Check::at_most("pvm_idempotency", rep.certificates.idempotency, tol.cert_tol),
        Check::at_most("pvm_sum", rep.certificates.sum_residual, tol.cert_tol),
        Check::at_most("main_bound", rep.error, 9.0 * rep.defect + BOUND_SLACK),
        Check::at_least("converse", rep.sum_of_squares(), root * root - BOUND_SLACK),
        Check::at_most("rank_sums", rank_gap as f64, 0.0),
        Check::at_least("selection_value", rep.selection.value, 1.0 - rep.defect - tol.cert_tol),
        Check::at_most("selection_commutation", rep.selection.commutation_residual, 1e3 * tol.cert_tol),
    ]
}

fn orth_payload(rep: &OrthReport<f64>) -> Value {
    json!({
        "defect": rep.defect,
        "error": rep.error,
        "ratio": rep.ratio,
        "sum_of_squares": rep.sum_of_squares(),
        "pvm": elements_to_repr(rep.pvm.elements()),
        "selection": {
            "ranks": rep.selection.ranks,
            "value": rep.selection.value,
            "lp_value": rep.selection.lp_value,
            "commutation_residual": rep.selection.commutation_residual,
            "clipped_scores": rep.selection.clipped_scores,
        },
        "certificates": rep.certificates,
    })
}

fn failed(check: &str) -> impl Fn(povmround::Error) -> CliError + '_ {
    move |e| CliError::computation(check, e)
}

/// Runs every command except `gen` and `sweep` on the raw bytes of an
/// instance file.
pub fn run_instance_command(command: Command, input: &[u8], tol: &Tolerances) -> Result<ReportFile, CliError> {
    let start = Instant::now();
    tol.validate().map_err(|e| CliError::Parse { location: "tolerances".into(), message: e.to_string() })?;
    let text = std::str::from_utf8(input).map_err(|e| CliError::Parse { location: "input".into(), message: e.to_string() })?;
    let file = InstanceFile::parse(text)?;
    let inst = file.decode(tol)?;
    let meta = serde_json::to_value(&inst.metadata).expect("metadata serialises");
    let alg = &inst.algebra;

    let (result, checks) = match command {
        Command::Orthogonalize => {
            let rep = orthogonalize(alg, inst.require_state()?, inst.require_povm()?, tol).map_err(failed("orthogonalize"))?;
            (orth_payload(&rep), orth_checks(alg, &rep, tol))
        }
        Command::OrthogonalizeSym => {
            let rep = orthogonalize_symmetry_preserving(alg, inst.require_state()?, inst.require_povm()?, tol)
                .map_err(failed("orthogonalize_sym"))?;
            let dec = &rep.decomposition;
            let result = json!({
                "defect": rep.defect,
                "error": rep.error,
                "pvm": elements_to_repr(rep.pvm.elements()),
                "generated_algebra": {
                    "dims": dec.sub.dims(),
                    "multiplicities": dec.multiplicities,
                    "ambient_block": dec.ambient_block,
                    "commutant_dim": dec.commutant_basis.len(),
                    "attempts": dec.attempts,
                },
                "inner": orth_payload(&rep.inner),
                "certificates": rep.certificates,
            });
            let mut checks = vec![
                Check::at_most("pvm_idempotency", rep.pvm.idempotency_residual(), tol.cert_tol),
                Check::at_most("pvm_sum", sum_residual(alg, rep.pvm.elements()), tol.cert_tol),
                Check::at_most("main_bound", rep.error, 9.0 * rep.defect + BOUND_SLACK),
                Check::at_most("symmetry_commutant", rep.certificates.commutant_residual, 10.0 * tol.cert_tol),
                Check::at_most("decomposition", rep.certificates.decomposition_residual, 10.0 * tol.cert_tol),
                Check::at_most("defect_consistency", rep.certificates.defect_consistency, tol.cert_tol),
            ];
            checks.extend(
                orth_checks(&dec.sub, &rep.inner, tol)
                    .into_iter()
                    .map(|c| Check { name: format!("inner_{}", c.name), ..c }),
            );
            (result, checks)
        }
        Command::Repair => {
            let (p, q) = inst.require_pvm_pair()?;
            let rep = repair(inst.require_state()?, p, q, tol).map_err(failed("repair"))?;
            let result = json!({
                "epsilon_c": rep.epsilon_c,
                "error": rep.error,
                "pvm_repaired": elements_to_repr(rep.pvm_repaired.elements()),
                "inner": { "defect": rep.inner.defect, "error": rep.inner.error },
                "certificates": rep.certificates,
            });
            let checks = vec![
                Check::at_most("repair_bound", rep.error, 10.0 * rep.epsilon_c + BOUND_SLACK),
                Check::at_most("commutation", rep.certificates.commutation_residual, tol.cert_tol),
                Check::at_most("exact_identity", rep.certificates.identity_residual, 0.1 * tol.cert_tol),
                Check::at_most("pvm_idempotency", rep.pvm_repaired.idempotency_residual(), tol.cert_tol),
            ];
            (result, checks)
        }
        Command::Fourier => {
            let (p, q) = inst.require_pvm_pair()?;
            let phi = inst.require_state()?;
            let u = fourier::pvm_to_unitary(q);
            let v = fourier::pvm_to_unitary(p);
            let roundtrip = pvm_distance(&unitary_to_pvm(alg, &u, q.n(), tol).map_err(failed("roundtrip"))?, q)
                .max(pvm_distance(&unitary_to_pvm(alg, &v, p.n(), tol).map_err(failed("roundtrip"))?, p));
            let r = fourier::repair_unitary_pair(alg, phi, &u, q.n(), &v, p.n(), tol).map_err(failed("fourier"))?;
            let result = json!({
                "u": element_to_repr(&u),
                "v": element_to_repr(&v),
                "v_repaired": element_to_repr(&r.v_repaired),
                "order_u": q.n(),
                "order_v": p.n(),
                "terms": r.terms,
                "roundtrip_residual": roundtrip,
            });
            let checks = vec![
                Check::at_most("unitary_commutation", r.terms.commutator_residual, tol.cert_tol),
                Check::at_most("corollary_bound", r.terms.rhs_error, 10.0 * r.terms.lhs + BOUND_SLACK),
                Check::at_most("roundtrip", roundtrip, 0.1 * tol.cert_tol),
            ];
            (result, checks)
        }
        Command::Majorant => {
            let f = inst.require_functionals()?;
            let sol = minimal_majorant(alg, f, tol).map_err(failed("solver_converged"))?;
            let diag = verify_majorant_certificate(alg, f, &sol, tol).map_err(failed("certificate"))?;
            let result = json!({
                "primal": sol.primal,
                "dual": sol.dual,
                "gap": sol.gap,
                "mu_final": sol.mu_final,
                "residuals": sol.residuals,
                "central_path": sol.central_path,
                "solution": SolutionRepr { z: element_to_repr(&sol.z), t: elements_to_repr(&sol.t), mu_final: sol.mu_final },
            });
            (result, diag.checks)
        }
        Command::Verify => {
            let mut checks = Vec::new();
            let mut verified = Vec::new();
            if let Some(a) = &inst.povm {
                let d = a.diagnostics();
                checks.push(Check::at_most("povm_negativity", d.max_negativity, tol.psd_tol));
                checks.push(Check::at_most("povm_excess", d.max_excess, tol.psd_tol));
                checks.push(Check::at_most("povm_sum", d.sum_residual, tol.cert_tol));
                verified.push("povm");
            }
            if let Some((p, q)) = &inst.pvm_pair {
                checks.push(Check::at_most("pvm_p_idempotency", p.idempotency_residual(), tol.cert_tol));
                checks.push(Check::at_most("pvm_q_idempotency", q.idempotency_residual(), tol.cert_tol));
                verified.push("pvm_pair");
            }
            if let (Some(f), Some(sol)) = (&inst.functionals, &inst.solution) {
                let diag = verify_majorant_certificate(alg, f, sol, tol).map_err(failed("certificate"))?;
                checks.extend(diag.checks);
                verified.push("majorant_solution");
            }
            if verified.is_empty() {
                return Err(CliError::Parse {
                    location: "input".into(),
                    message: "nothing to verify: need a povm, pvm_pair or majorant_solution".into(),
                });
            }
            (json!({ "verified": verified }), checks)
        }
        Command::Gen | Command::Sweep => unreachable!("handled separately"),
    };
    Ok(report(command, input, tol, meta, result, checks, start))
}

fn pvm_distance(a: &Pvm64, b: &Pvm64) -> f64 {
    a.elements().iter().zip(b.elements()).map(|(x, y)| (x - y).frobenius()).fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub seed: u64,
    pub dims: String,
    pub n: usize,
    pub defect: f64,
    pub error: f64,
    pub ratio: Option<f64>,
    pub bound_9eps_margin: f64,
    pub runtime_ms: f64,
    #[serde(skip)]
    pub checks: Vec<Check>,
}

/// Runs `cfg.count` instances with seeds `seed, seed + 1, ...` in parallel;
/// rows come back in seed order.
pub fn run_sweep(input: &[u8], seed: u64, tol: &Tolerances) -> Result<(ReportFile, Vec<SweepRow>), CliError> {
    let start = Instant::now();
    tol.validate().map_err(|e| CliError::Parse { location: "tolerances".into(), message: e.to_string() })?;
    let text = std::str::from_utf8(input).map_err(|e| CliError::Parse { location: "input".into(), message: e.to_string() })?;
    let cfg = SweepConfig::parse(text)?;
    let rows = (0..cfg.count as u64)
        .into_par_iter()
        .map(|i| sweep_row(seed.wrapping_add(i), &cfg, tol))
        .collect::<Result<Vec<_>, _>>()?;

    let mut checks = Vec::new();
    let names: Vec<String> = rows.first().map(|r| r.checks.iter().map(|c| c.name.clone()).collect()).unwrap_or_default();
    for (j, name) in names.iter().enumerate() {
        let failures = rows.iter().filter(|r| !r.checks[j].pass).count();
        checks.push(Check::at_most(&format!("{name}_failures"), failures as f64, 0.0));
    }
    let worst_ratio = rows.iter().filter_map(|r| r.ratio).fold(0.0, f64::max);
    let min_margin = rows.iter().map(|r| r.bound_9eps_margin).fold(f64::INFINITY, f64::min);
    let result = json!({
        "config": cfg,
        "base_seed": seed,
        "count": rows.len(),
        "worst_ratio": worst_ratio,
        "min_bound_9eps_margin": if rows.is_empty() { Value::Null } else { json!(min_margin) },
        "rows": rows,
    });
    let meta = json!({ "seed": seed, "generator": "sweep", "prng": povmround::gen::PRNG_NAME });
    Ok((report(Command::Sweep, input, tol, meta, result, checks, start), rows))
}

fn sweep_row(seed: u64, cfg: &SweepConfig, tol: &Tolerances) -> Result<SweepRow, CliError> {
    let t0 = Instant::now();
    let (alg, a, phi) = sweep_instance(seed, cfg, tol).map_err(|e| CliError::Failed {
        check: "generate".into(),
        message: format!("seed {seed}: {e}"),
    })?;
    let rep = orthogonalize(&alg, &phi, &a, tol).map_err(|e| CliError::Failed {
        check: "orthogonalize".into(),
        message: format!("seed {seed}: {e}"),
    })?;
    let dims = alg.dims().iter().map(|d| d.to_string()).collect::<Vec<_>>().join("+");
    Ok(SweepRow {
        seed,
        dims,
        n: a.n(),
        defect: rep.defect,
        error: rep.error,
        ratio: rep.ratio,
        bound_9eps_margin: 9.0 * rep.defect - rep.error,
        runtime_ms: t0.elapsed().as_secs_f64() * 1e3,
        checks: orth_checks(&alg, &rep, tol),
    })
}

/// CSV with columns `seed, dims, n, defect, error, ratio, bound_9eps_margin, runtime_ms`.
pub fn sweep_csv(rows: &[SweepRow]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_format() {
        assert_eq!(digest(b""), "sha256:e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }

    #[test]
    fn sweep_rows_in_seed_order() {
        let tol = Tolerances::default();
        let (rep, rows) = run_sweep(br#"{"count": 6, "max_total_dim": 5}"#, 100, &tol).unwrap();
        assert!(rep.passed);
        assert_eq!(rows.iter().map(|r| r.seed).collect::<Vec<_>>(), (100..106).collect::<Vec<_>>());
        let csv = sweep_csv(&rows).unwrap();
        assert_eq!(csv.lines().next().unwrap(), "seed,dims,n,defect,error,ratio,bound_9eps_margin,runtime_ms");
        assert_eq!(csv.lines().count(), 7);
    }

    #[test]
    fn missing_objects_are_parse_errors() {
        let tol = Tolerances::default();
        let text = br#"{"version": "povmround-instance/1", "dims": [2]}"#;
        match run_instance_command(Command::Repair, text, &tol) {
            Err(CliError::Parse { location, .. }) => assert_eq!(location, "pvm_pair"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(run_instance_command(Command::Verify, text, &tol), Err(CliError::Parse { .. })));
    }
}
