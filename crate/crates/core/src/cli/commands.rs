use std::collections::HashSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::json;

use super::config::{seed_from_env, RunConfig};
use super::trace::{
    read_report, read_samples, read_trace, report_path, samples_path, write_report, write_samples, RunReport,
    TraceWriter,
};
use crate::driver::{run_with_observer, TerminationReason};
use crate::error::Error;
use crate::problems::{self, by_name};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_MAX_ITERATIONS: i32 = 2;
pub const EXIT_ORACLE_ERROR: i32 = 3;
/// Run stopped on an infeasible sample or a failed subproblem.
pub const EXIT_ABORTED: i32 = 4;
/// `verify`: the audit found infeasible samples.
pub const EXIT_INFEASIBLE: i32 = 2;

pub fn exit_code(reason: TerminationReason) -> i32 {
    match reason {
        TerminationReason::BothConditionsMet => EXIT_OK,
        TerminationReason::MaxIterations => EXIT_MAX_ITERATIONS,
        TerminationReason::OracleError => EXIT_ORACLE_ERROR,
        TerminationReason::InfeasibleSample | TerminationReason::SubproblemFailure => EXIT_ABORTED,
    }
}

fn fail(kind: &str, message: impl std::fmt::Display) -> i32 {
    eprintln!("{}", json!({ "error": kind, "message": message.to_string() }));
    EXIT_ERROR
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub trace: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub quiet: bool,
}

/// `szoqq run`: solve the configured problem and write trace, samples and
/// report.
pub fn cmd_run(config_path: &Path, opts: &RunOptions) -> i32 {
    let seed = match seed_from_env() {
        Ok(s) => s,
        Err(e) => return fail("config", e),
    };
    let config = match RunConfig::load(config_path) {
        Ok(c) => c,
        Err(e) => return fail("config", e),
    };
    let base = config_path.parent().unwrap_or(Path::new("."));
    let mut resolved = match config.resolve(base, seed) {
        Ok(r) => r,
        Err(e) => return fail("config", e),
    };
    if let Some(t) = &opts.trace {
        resolved.trace = t.clone();
        if opts.report.is_none() && config.output.report.is_none() {
            resolved.report = report_path(t);
        }
    }
    if let Some(r) = &opts.report {
        resolved.report = r.clone();
    }

    let problem = &resolved.problem;
    let prep = match problem.prepare(resolved.smoothness.clone()) {
        Ok(p) => p,
        Err(e) => return fail("problem", e),
    };
    let mut writer = match TraceWriter::create(&resolved.trace) {
        Ok(w) => w,
        Err(e) => return fail("io", format!("{}: {e}", resolved.trace.display())),
    };
    let mut write_error = None;
    let outcome = run_with_observer(&prep.oracle, prep.smoothness.clone(), &resolved.algorithm, &prep.x0, |r| {
        if write_error.is_none() {
            write_error = writer.write(r).err();
        }
    });
    let finished = writer.finish();
    if let Some(e) = write_error.or(finished.err()) {
        return fail("io", format!("{}: {e}", resolved.trace.display()));
    }
    let samples = prep.oracle.samples();
    if let Err(e) = write_samples(&samples_path(&resolved.trace), &samples) {
        return fail("io", e);
    }
    let mut outcome = match outcome {
        Ok(o) => o,
        Err(e @ Error::StrictFeasibilityLost { .. }) => return fail("initial_point", e),
        Err(e) => return fail("run", e),
    };

    let kkt = match outcome.report.grade(prep.truth.as_ref()) {
        Ok(k) => k.clone(),
        Err(e) => return fail("grading", e),
    };
    let rep = &outcome.report;
    let code = exit_code(rep.reason);
    let report = RunReport {
        problem: problem.name.clone(),
        reason: rep.reason,
        exit_code: code,
        k_tilde: rep.k_tilde,
        x_tilde: rep.x_tilde.clone(),
        lambda_tilde: rep.lambda_tilde.clone(),
        objective: problem.objective_at(&rep.x_tilde),
        eta: resolved.algorithm.eta,
        xi: rep.xi,
        lambda_bound: rep.lambda_bound,
        eta_kkt_residual: kkt.max_residual,
        is_eta_kkt: kkt.is_eta_kkt(resolved.algorithm.eta),
        kkt,
        samples: samples.len(),
        infeasible_samples_observed: samples.iter().filter(|s| s.max_constraint() > 0.0).count(),
        lipschitz: outcome.state.smoothness.lipschitz().to_vec(),
        smoothness: outcome.state.smoothness.smoothness().to_vec(),
        message: rep.message.clone(),
    };
    if let Err(e) = write_report(&resolved.report, &report) {
        return fail("io", format!("{}: {e}", resolved.report.display()));
    }
    if !opts.quiet {
        println!("problem: {}", report.problem);
        println!("reason: {:?}", report.reason);
        println!("iterations: {}", report.k_tilde);
        println!("samples: {}", report.samples);
        println!("objective: {}", report.objective);
        println!("eta_kkt_residual: {}", report.eta_kkt_residual);
        println!("trace: {}", resolved.trace.display());
        println!("report: {}", resolved.report.display());
    }
    code
}

/// Outcome of replaying a run's samples against ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Audit {
    pub samples: usize,
    pub infeasible_samples: usize,
    pub constant_growth_events: usize,
    pub final_kkt_residual: Option<f64>,
}

/// Check a trace and its sample log for consistency with `problem_name` and
/// count ground-truth constraint violations.
pub fn audit(trace: &Path, problem_name: &str, report: Option<&Path>) -> Result<Audit, String> {
    let problem = by_name(problem_name).map_err(|e| e.to_string())?;
    let truth = problem.truth();
    let (d, m) = problem.solver_shape();
    let rows = read_trace(trace)?;
    let samples = read_samples(&samples_path(trace))?;

    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1.0);
    for (i, s) in samples.iter().enumerate() {
        if s.point.len() != d || s.values.len() != m + 1 {
            return Err(format!("sample {i} has the wrong shape for problem '{problem_name}'"));
        }
        let t = truth.true_values(&s.point);
        if s.values.iter().zip(&t).any(|(a, b)| !close(*a, *b)) {
            return Err(format!("sample {i} does not match problem '{problem_name}'"));
        }
    }
    let mut objective_seen: HashSet<u64> = HashSet::new();
    let mut next_sample = 0;
    let mut previous = 0;
    for (i, row) in rows.iter().enumerate() {
        if row.k != i {
            return Err(format!("trace row {} has k = {}", i + 1, row.k));
        }
        while next_sample < samples.len() && samples[next_sample].tag <= row.k {
            objective_seen.insert(samples[next_sample].values[0].to_bits());
            next_sample += 1;
        }
        if row.samples_cumulative != next_sample || row.samples_cumulative < previous {
            return Err(format!(
                "trace row {} claims {} samples, the log has {next_sample} up to that iteration",
                i + 1,
                row.samples_cumulative
            ));
        }
        if !objective_seen.contains(&row.f0.to_bits()) {
            return Err(format!("trace row {}: f0 = {} was never observed", i + 1, row.f0));
        }
        previous = row.samples_cumulative;
    }

    let infeasible_samples =
        samples.iter().filter(|s| truth.true_values(&s.point)[1..].iter().any(|f| *f > 0.0)).count();
    let constant_growth_events =
        rows.iter().map(|r| r.events.split(';').filter(|e| e.starts_with("grow_constants")).count()).sum();

    let default_report = report_path(trace);
    let report = report.map(Path::to_path_buf).or(default_report.exists().then_some(default_report));
    let final_kkt_residual = match report {
        Some(path) => {
            let rep = read_report(&path)?;
            if rep.problem != problem.name {
                return Err(format!("report is for '{}', not '{}'", rep.problem, problem.name));
            }
            let kkt = crate::kkt::kkt_residual(truth.as_ref(), &rep.x_tilde, &rep.lambda_tilde)
                .map_err(|e| e.to_string())?;
            Some(kkt.max_residual)
        }
        None => None,
    };
    Ok(Audit { samples: samples.len(), infeasible_samples, constant_growth_events, final_kkt_residual })
}

/// `szoqq verify`: exit 0 iff every sample was feasible.
pub fn cmd_verify(trace: &Path, problem_name: &str, report: Option<&Path>, quiet: bool) -> i32 {
    match audit(trace, problem_name, report) {
        Ok(a) => {
            if !quiet {
                println!("samples: {}", a.samples);
                println!("infeasible_samples: {}", a.infeasible_samples);
                println!("constant_growth_events: {}", a.constant_growth_events);
                if let Some(r) = a.final_kkt_residual {
                    println!("final_kkt_residual: {r}");
                }
            }
            if a.infeasible_samples == 0 {
                EXIT_OK
            } else {
                EXIT_INFEASIBLE
            }
        }
        Err(e) => fail("mismatch", e),
    }
}

/// Print one `name (d=.., m=..)` line per entry.
pub fn list_to(out: &mut dyn Write, entries: &[(&str, usize, usize)]) -> std::io::Result<()> {
    for (name, d, m) in entries {
        writeln!(out, "{name} (d={d}, m={m})")?;
    }
    Ok(())
}

/// `szoqq list`.
pub fn cmd_list() -> i32 {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let listed = list_to(&mut out, &problems::registry()).and_then(|_| writeln!(out, "random:SEED:D:M (d=D, m=M)"));
    if listed.is_err() {
        return EXIT_ERROR;
    }
    EXIT_OK
}
