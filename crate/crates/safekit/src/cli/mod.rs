//! Command surface binding all modules: `verify` runs the assertion suite
//! over the controller model, `analyze` computes exposure probabilities and
//! SIL bands from a scenario, `simulate` cross-validates the exact engine by
//! Monte Carlo, and `monitor` evaluates recorded or live event streams.
//!
//! Commands are plain functions from options to a [`CmdOutcome`] so they can
//! be exercised in-process; the binary is a thin argument-parsing shim.
//!
//! Exit codes: 0 success, 1 verification or monitoring failure, 2 input or
//! configuration error, 3 resource or convergence failure.

mod report;
mod scenario_file;
mod trace_file;

pub use report::{fnv1a_digest, Report, REPORT_HEADER};
pub use scenario_file::{format_scenario, parse_scenario, ScenarioFileError, SCENARIO_HEADER};
pub use trace_file::{format_trace, parse_trace, TraceFileError, TRACE_HEADER};

use std::fmt::Write as _;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::controller::{build_lts, ControllerConfig, ControllerError};
use crate::domain::{Action, TableRow};
use crate::refinement::{
    check_deadlock_freedom, check_determinism, check_traces_refinement, oracle_refinement_check,
    Counterexample, RefinementError, Verdict, ViolationKind,
};
use crate::rv::{run_offline, synthesize_monitor, MonitorVerdict};
use crate::spec_lang::compile_spec_with_alphabet;
use crate::spec_lang::parse_requirements;
use crate::stochastic::{
    build_dtmc, monte_carlo_jobs, pfd_to_sil, prob_bounded_reach, prob_reach, StochasticError,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

/// Minimum detection accuracy the concept study requires of the sensor
/// stack; scenario analyses flag detection probabilities below it.
pub const SENSOR_ACCURACY_THRESHOLD: f64 = 0.70;

/// What a command produced: the report on stdout, diagnostics on stderr, and
/// the process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CmdOutcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl CmdOutcome {
    fn report(report: Report, code: i32) -> Self {
        CmdOutcome {
            stdout: report.render(),
            stderr: String::new(),
            code,
        }
    }

    fn error(message: impl Into<String>, code: i32) -> Self {
        CmdOutcome {
            stdout: String::new(),
            stderr: format!("error: {}\n", message.into()),
            code,
        }
    }
}

#[derive(Clone, Copy)]
enum DropKind {
    Alert,
    Slow,
    Stop,
}

/// A named single-requirement controller mutant: one mitigation action
/// removed from one requirement-table row.
#[derive(Clone, Copy)]
pub struct Mutant {
    pub name: &'static str,
    pub row: TableRow,
    kind: DropKind,
}

impl Mutant {
    pub fn all() -> [Mutant; 5] {
        [
            Mutant {
                name: "drop-alert-trained-green",
                row: TableRow::R1,
                kind: DropKind::Alert,
            },
            Mutant {
                name: "drop-speed-untrained-green",
                row: TableRow::R2,
                kind: DropKind::Slow,
            },
            Mutant {
                name: "drop-speed-trained-yellow",
                row: TableRow::R3,
                kind: DropKind::Slow,
            },
            Mutant {
                name: "drop-stop-untrained-yellow",
                row: TableRow::R4,
                kind: DropKind::Stop,
            },
            Mutant {
                name: "drop-stop-red",
                row: TableRow::R5,
                kind: DropKind::Stop,
            },
        ]
    }

    pub fn by_name(name: &str) -> Option<Mutant> {
        Mutant::all().into_iter().find(|m| m.name == name)
    }

    /// The concrete action removed from the row under this configuration.
    pub fn dropped_action(&self, cfg: &ControllerConfig) -> Action {
        match self.kind {
            DropKind::Alert => Action::ActivateAlert(true),
            DropKind::Slow => Action::SetSpeed(cfg.slow_speed),
            DropKind::Stop => Action::StopRobot,
        }
    }

    pub fn apply(&self, cfg: &mut ControllerConfig) {
        cfg.drop_action = Some((self.row, self.dropped_action(cfg)));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckSelection {
    All,
    Refinement,
    Deadlock,
    Determinism,
}

impl CheckSelection {
    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "all" => Some(CheckSelection::All),
            "refinement" => Some(CheckSelection::Refinement),
            "deadlock" => Some(CheckSelection::Deadlock),
            "determinism" => Some(CheckSelection::Determinism),
            _ => None,
        }
    }

    fn wants(self, which: CheckSelection) -> bool {
        self == CheckSelection::All || self == which
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub requirements_path: PathBuf,
    pub check: CheckSelection,
    pub max_idle: u32,
    pub depth_oracle: Option<usize>,
    pub mutate: Option<String>,
    pub latency: u32,
    pub nondet_discharge: bool,
    pub nominal_speed: u32,
    pub slow_speed: u32,
    pub deadline_budget: u32,
    pub timings: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        let cfg = ControllerConfig::default();
        VerifyOptions {
            requirements_path: PathBuf::from("requirements/default.req"),
            check: CheckSelection::All,
            max_idle: 4,
            depth_oracle: None,
            mutate: None,
            latency: cfg.discharge_latency,
            nondet_discharge: false,
            nominal_speed: cfg.nominal_speed,
            slow_speed: cfg.slow_speed,
            deadline_budget: cfg.deadline_budget,
            timings: false,
        }
    }
}

fn read_file(path: &Path) -> Result<String, CmdOutcome> {
    std::fs::read_to_string(path)
        .map_err(|e| CmdOutcome::error(format!("cannot read {}: {e}", path.display()), EXIT_INPUT))
}

/// Flag scenario detection probabilities below the concept-study accuracy
/// threshold.
fn sensor_check_line(report: &mut Report, scenario: &crate::stochastic::Scenario) {
    let met = crate::stochastic::sensor_threshold_check(
        scenario.p_detect,
        SENSOR_ACCURACY_THRESHOLD,
    );
    report.kv(
        "sensor-threshold",
        format!(
            "p_detect={} threshold={SENSOR_ACCURACY_THRESHOLD} {}",
            scenario.p_detect,
            if met { "met" } else { "NOT met" }
        ),
    );
}

fn counterexample_details(report: &mut Report, cex: &Counterexample) {
    let trace_text = if cex.trace.is_empty() {
        "# empty trace".to_string()
    } else {
        cex.trace.to_string()
    };
    report.block("counterexample", &trace_text);
    if let Some(e) = cex.failing_event {
        report.kv("failing-event", e);
    }
    match &cex.kind {
        ViolationKind::RefusedEvent => report.kv("violation", "refused-event"),
        ViolationKind::Deadlock => report.kv("violation", "deadlock"),
        ViolationKind::Timelock { bound } => {
            report.kv("violation", format!("timelock within {bound} steps"))
        }
        ViolationKind::Nondeterminism { first, second } => report.kv(
            "violation",
            format!("nondeterminism: successors {first} and {second}"),
        ),
    }
}

fn verdict_line(report: &mut Report, name: &str, verdict: &Verdict) {
    match verdict {
        Verdict::Pass {
            states_explored,
            transitions,
        } => report.kv(
            "check",
            format!("{name} result=pass states={states_explored} transitions={transitions}"),
        ),
        Verdict::Fail(cex) => {
            report.kv("check", format!("{name} result=fail"));
            counterexample_details(report, cex);
        }
    }
}

/// Run the selected structural and refinement checks over the configured
/// controller against the requirement file.
pub fn cmd_verify(opts: &VerifyOptions) -> CmdOutcome {
    let started = Instant::now();
    let source = match read_file(&opts.requirements_path) {
        Ok(s) => s,
        Err(out) => return out,
    };
    let reqs = match parse_requirements(&source) {
        Ok(reqs) => reqs,
        Err(e) => {
            return CmdOutcome::error(
                format!("{}: {e}", opts.requirements_path.display()),
                EXIT_INPUT,
            )
        }
    };

    let mut cfg = ControllerConfig {
        nominal_speed: opts.nominal_speed,
        slow_speed: opts.slow_speed,
        deadline_budget: opts.deadline_budget,
        discharge_latency: opts.latency,
        nondeterministic_discharge: opts.nondet_discharge,
        ..ControllerConfig::default()
    };
    if let Some(name) = &opts.mutate {
        match Mutant::by_name(name) {
            Some(m) => m.apply(&mut cfg),
            None => {
                let names: Vec<&str> = Mutant::all().iter().map(|m| m.name).collect();
                return CmdOutcome::error(
                    format!(
                        "unknown mutant `{name}`, expected one of {}",
                        names.join(", ")
                    ),
                    EXIT_INPUT,
                );
            }
        }
    }
    if let Err(e) = cfg.validate() {
        return CmdOutcome::error(e.to_string(), EXIT_INPUT);
    }

    let lts = match build_lts(&cfg, opts.max_idle) {
        Ok(lts) => lts,
        Err(e @ ControllerError::StateBudgetExceeded { .. }) => {
            return CmdOutcome::error(e.to_string(), EXIT_RESOURCE)
        }
        Err(e) => return CmdOutcome::error(e.to_string(), EXIT_INPUT),
    };
    let spec = match compile_spec_with_alphabet(&reqs, &cfg.action_alphabet()) {
        Ok(spec) => spec,
        Err(e) => return CmdOutcome::error(e.to_string(), EXIT_INPUT),
    };

    let mut report = Report::new("verify");
    report.kv("requirements", opts.requirements_path.display());
    report.kv("requirements-digest", fnv1a_digest(source.as_bytes()));
    report.kv(
        "controller",
        format!(
            "nominal_speed={} slow_speed={} deadline_budget={} discharge_latency={}{}",
            cfg.nominal_speed,
            cfg.slow_speed,
            cfg.deadline_budget,
            cfg.discharge_latency,
            if cfg.nondeterministic_discharge {
                " nondeterministic_discharge"
            } else {
                ""
            }
        ),
    );
    if let Some(name) = &opts.mutate {
        report.kv("mutation", name);
    }
    report.kv("max-idle", opts.max_idle);
    report.kv(
        "model",
        format!(
            "states={} transitions={}",
            lts.state_count(),
            lts.transition_count()
        ),
    );
    report.kv(
        "spec",
        format!(
            "states={} transitions={}",
            spec.state_count(),
            spec.transition_count()
        ),
    );

    let mut all_passed = true;
    let mut refinement_verdict: Option<Verdict> = None;

    if opts.check.wants(CheckSelection::Refinement) || opts.depth_oracle.is_some() {
        match check_traces_refinement(&lts, &spec) {
            Ok(verdict) => {
                if opts.check.wants(CheckSelection::Refinement) {
                    verdict_line(&mut report, "refinement", &verdict);
                    all_passed &= verdict.passed();
                }
                refinement_verdict = Some(verdict);
            }
            Err(e @ RefinementError::AlphabetMismatch { .. }) => {
                return CmdOutcome::error(e.to_string(), EXIT_INPUT)
            }
            Err(e) => return CmdOutcome::error(e.to_string(), EXIT_RESOURCE),
        }
    }
    if opts.check.wants(CheckSelection::Deadlock) {
        let verdict = check_deadlock_freedom(&lts);
        verdict_line(&mut report, "deadlock-freedom", &verdict);
        all_passed &= verdict.passed();
    }
    if opts.check.wants(CheckSelection::Determinism) {
        let verdict = check_determinism(&lts);
        verdict_line(&mut report, "determinism", &verdict);
        all_passed &= verdict.passed();
    }

    if let Some(depth) = opts.depth_oracle {
        match oracle_refinement_check(&lts, &spec, depth) {
            Ok(oracle) => {
                let verdict = refinement_verdict.as_ref().expect("refinement ran");
                let agree = oracle.agrees_with(verdict);
                report.kv(
                    "oracle",
                    format!(
                        "depth={depth} traces={} agreement={}",
                        oracle.traces_checked,
                        if agree { "yes" } else { "NO" }
                    ),
                );
                all_passed &= agree;
            }
            Err(e) => return CmdOutcome::error(e.to_string(), EXIT_RESOURCE),
        }
    }

    if opts.timings {
        report.kv("wall-ms", started.elapsed().as_millis());
    }
    report.kv("verdict", if all_passed { "pass" } else { "fail" });
    CmdOutcome::report(report, if all_passed { EXIT_OK } else { EXIT_VIOLATION })
}

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    pub scenario_path: PathBuf,
    pub bounded: Option<u32>,
    pub sil: bool,
    pub timings: bool,
}

/// Exact exposure-probability analysis of a scenario, with optional SIL
/// interpretation of the result as a probability of failure on demand.
pub fn cmd_analyze(opts: &AnalyzeOptions) -> CmdOutcome {
    let started = Instant::now();
    let source = match read_file(&opts.scenario_path) {
        Ok(s) => s,
        Err(out) => return out,
    };
    let scenario = match parse_scenario(&source) {
        Ok(sc) => sc,
        Err(e) => {
            return CmdOutcome::error(format!("{}: {e}", opts.scenario_path.display()), EXIT_INPUT)
        }
    };
    let chain = match build_dtmc(&scenario) {
        Ok(m) => m,
        Err(e) => return CmdOutcome::error(e.to_string(), EXIT_INPUT),
    };

    let mut report = Report::new("analyze");
    report.kv("scenario", opts.scenario_path.display());
    report.kv("scenario-digest", fnv1a_digest(source.as_bytes()));
    sensor_check_line(&mut report, &scenario);
    report.kv(
        "model",
        format!(
            "states={} transitions={}",
            chain.state_count(),
            chain.transition_count()
        ),
    );

    let probability = match opts.bounded {
        Some(k) => {
            let p = prob_bounded_reach(&chain, k);
            report.kv("method", format!("bounded-reachability k={k}"));
            report.kv("probability", format!("{p:.12e}"));
            p
        }
        None => match prob_reach(&chain) {
            Ok(r) => {
                report.kv("method", "value-iteration");
                report.kv("probability", format!("{:.12e}", r.probability));
                report.kv("residual", format!("{:.3e}", r.residual));
                report.kv("iterations", r.iterations);
                r.probability
            }
            Err(e @ StochasticError::NonConvergence { .. }) => {
                return CmdOutcome::error(e.to_string(), EXIT_RESOURCE)
            }
            Err(e) => return CmdOutcome::error(e.to_string(), EXIT_INPUT),
        },
    };

    if opts.sil {
        match pfd_to_sil(probability) {
            Ok(level) => {
                report.kv("sil", level);
                if probability == 0.0 {
                    report.kv(
                        "sil-note",
                        "zero-risk: exposure unreachable in this scenario; reported band is the floor of the scale",
                    );
                }
            }
            Err(e) => return CmdOutcome::error(e.to_string(), EXIT_INPUT),
        }
    }

    if opts.timings {
        report.kv("wall-ms", started.elapsed().as_millis());
    }
    report.kv("verdict", "ok");
    CmdOutcome::report(report, EXIT_OK)
}

#[derive(Debug, Clone)]
pub struct SimulateOptions {
    pub scenario_path: PathBuf,
    pub runs: u64,
    pub horizon: u32,
    pub seed: u64,
    pub jobs: usize,
    pub timings: bool,
}

/// Monte Carlo estimate of the bounded exposure probability, with an
/// agreement check against the exact engine.
pub fn cmd_simulate(opts: &SimulateOptions) -> CmdOutcome {
    let started = Instant::now();
    let source = match read_file(&opts.scenario_path) {
        Ok(s) => s,
        Err(out) => return out,
    };
    let scenario = match parse_scenario(&source) {
        Ok(sc) => sc,
        Err(e) => {
            return CmdOutcome::error(format!("{}: {e}", opts.scenario_path.display()), EXIT_INPUT)
        }
    };
    if opts.runs == 0 {
        return CmdOutcome::error("--runs must be at least 1", EXIT_INPUT);
    }

    let estimate = match monte_carlo_jobs(&scenario, opts.runs, opts.horizon, opts.seed, opts.jobs)
    {
        Ok(e) => e,
        Err(e) => return CmdOutcome::error(e.to_string(), EXIT_INPUT),
    };

    let mut report = Report::new("simulate");
    report.kv("scenario", opts.scenario_path.display());
    report.kv("scenario-digest", fnv1a_digest(source.as_bytes()));
    sensor_check_line(&mut report, &scenario);
    report.kv("runs", opts.runs);
    report.kv("horizon", opts.horizon);
    report.kv("seed", opts.seed);
    report.kv("estimate", format!("{:.12e}", estimate.estimate));
    report.kv("stderr", format!("{:.12e}", estimate.stderr));
    report.kv("exposures", estimate.exposures);

    match build_dtmc(&scenario) {
        Ok(chain) => {
            let exact = prob_bounded_reach(&chain, opts.horizon);
            report.kv("exact-bounded", format!("{exact:.12e}"));
            let within = (estimate.estimate - exact).abs() <= 3.0 * estimate.stderr;
            report.kv("within-3-sigma", if within { "yes" } else { "no" });
        }
        Err(e) => return CmdOutcome::error(e.to_string(), EXIT_INPUT),
    }

    if opts.timings {
        report.kv("wall-ms", started.elapsed().as_millis());
    }
    report.kv("verdict", "ok");
    CmdOutcome::report(report, EXIT_OK)
}

#[derive(Debug, Clone)]
pub struct MonitorOptions {
    pub requirements_path: PathBuf,
    /// Trace file path, or `-` to read the stream from standard input.
    pub trace_path: String,
    pub near_miss: bool,
    pub timings: bool,
}

/// Evaluate a recorded trace (or a stream on stdin) against monitors
/// synthesized from the requirement file.
pub fn cmd_monitor(opts: &MonitorOptions) -> CmdOutcome {
    let started = Instant::now();
    let req_source = match read_file(&opts.requirements_path) {
        Ok(s) => s,
        Err(out) => return out,
    };
    let reqs = match parse_requirements(&req_source) {
        Ok(reqs) => reqs,
        Err(e) => {
            return CmdOutcome::error(
                format!("{}: {e}", opts.requirements_path.display()),
                EXIT_INPUT,
            )
        }
    };

    let (trace_source, trace_name) = if opts.trace_path == "-" {
        let mut buffer = String::new();
        if let Err(e) = std::io::stdin().read_to_string(&mut buffer) {
            return CmdOutcome::error(format!("cannot read stdin: {e}"), EXIT_INPUT);
        }
        (buffer, "-".to_string())
    } else {
        match read_file(Path::new(&opts.trace_path)) {
            Ok(s) => (s, opts.trace_path.clone()),
            Err(out) => return out,
        }
    };
    let trace = match parse_trace(&trace_source) {
        Ok(t) => t,
        Err(e) => return CmdOutcome::error(format!("{trace_name}: {e}"), EXIT_INPUT),
    };

    let monitors = reqs.iter().map(synthesize_monitor).collect();
    let result = run_offline(monitors, &trace);

    let mut report = Report::new("monitor");
    report.kv("requirements", opts.requirements_path.display());
    report.kv("requirements-digest", fnv1a_digest(req_source.as_bytes()));
    report.kv("trace", &trace_name);
    report.kv("trace-digest", fnv1a_digest(trace_source.as_bytes()));
    report.kv("events", trace.len());

    for record in &result.records {
        let triggers: Vec<String> = record.triggers.iter().map(|a| a.to_string()).collect();
        report.kv(
            "record",
            format!(
                "event={} requirement={} kind={} triggers=[{}]",
                record.event_index,
                record.requirement_id,
                if record.imminent {
                    "imminent"
                } else {
                    "violation"
                },
                triggers.join(", ")
            ),
        );
    }

    for entry in &result.entries {
        let mut line = String::new();
        match &entry.verdict {
            MonitorVerdict::Clean => write!(line, "{} clean", entry.requirement_id).unwrap(),
            MonitorVerdict::Violated { at_event, .. } => write!(
                line,
                "{} violated at-event={at_event}",
                entry.requirement_id
            )
            .unwrap(),
        }
        if opts.near_miss {
            write!(
                line,
                " near-misses={} imminent-warnings={}",
                entry.near_misses, entry.imminent_warnings
            )
            .unwrap();
        }
        report.kv("requirement", line);
    }
    if opts.near_miss {
        report.kv("near-misses-total", result.total_near_misses());
    }

    let code = match result.first_violation() {
        Some((at_event, id)) => {
            report.kv(
                "first-violation",
                format!("event={at_event} requirement={id}"),
            );
            EXIT_VIOLATION
        }
        None => EXIT_OK,
    };

    if opts.timings {
        report.kv("wall-ms", started.elapsed().as_millis());
    }
    report.kv(
        "verdict",
        if code == EXIT_OK {
            "clean"
        } else {
            "violation"
        },
    );
    CmdOutcome::report(report, code)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn workspace_file(rel: &str) -> PathBuf {
        PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("../..")
            .join(rel)
    }

    #[test]
    fn verify_default_requirements_passes() {
        let opts = VerifyOptions {
            requirements_path: workspace_file("requirements/default.req"),
            ..VerifyOptions::default()
        };
        let out = cmd_verify(&opts);
        assert_eq!(out.code, EXIT_OK, "stderr: {}", out.stderr);
        assert!(out.stdout.contains("check: refinement result=pass"));
        assert!(out.stdout.contains("check: deadlock-freedom result=pass"));
        assert!(out.stdout.contains("check: determinism result=pass"));
        assert!(out.stdout.ends_with("verdict: pass\n"));
    }

    #[test]
    fn verify_missing_file_exits_2() {
        let opts = VerifyOptions {
            requirements_path: PathBuf::from("definitely-missing.req"),
            ..VerifyOptions::default()
        };
        let out = cmd_verify(&opts);
        assert_eq!(out.code, EXIT_INPUT);
        assert!(out.stdout.is_empty());
        assert!(out.stderr.starts_with("error:"));
    }

    #[test]
    fn verify_mutant_fails_with_counterexample() {
        let opts = VerifyOptions {
            requirements_path: workspace_file("requirements/default.req"),
            mutate: Some("drop-stop-red".into()),
            ..VerifyOptions::default()
        };
        let out = cmd_verify(&opts);
        assert_eq!(out.code, EXIT_VIOLATION);
        assert!(out.stdout.contains("check: refinement result=fail"));
        assert!(out.stdout.contains("counterexample:"));
        assert!(out.stdout.contains("detection"));
        assert!(out.stdout.contains("red"));
        assert!(out.stdout.ends_with("verdict: fail\n"));
    }

    #[test]
    fn verify_unknown_mutant_exits_2() {
        let opts = VerifyOptions {
            requirements_path: workspace_file("requirements/default.req"),
            mutate: Some("drop-everything".into()),
            ..VerifyOptions::default()
        };
        assert_eq!(cmd_verify(&opts).code, EXIT_INPUT);
    }

    #[test]
    fn analyze_zero_intrusion_scenario() {
        let dir = std::env::temp_dir().join("safekit-test-analyze");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("zero.scenario");
        let mut sc = crate::stochastic::Scenario::example();
        sc.p_intrusion = 0.0;
        fs::write(&path, format_scenario(&sc)).unwrap();

        let out = cmd_analyze(&AnalyzeOptions {
            scenario_path: path,
            bounded: None,
            sil: true,
            timings: false,
        });
        assert_eq!(out.code, EXIT_OK, "stderr: {}", out.stderr);
        assert!(out.stdout.contains("probability: 0.000000000000e0"));
        assert!(out.stdout.contains("sil: SIL4"));
        assert!(out.stdout.contains("sil-note: zero-risk"));
    }

    #[test]
    fn simulate_rejects_zero_runs() {
        let dir = std::env::temp_dir().join("safekit-test-simulate");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("example.scenario");
        fs::write(
            &path,
            format_scenario(&crate::stochastic::Scenario::example()),
        )
        .unwrap();
        let out = cmd_simulate(&SimulateOptions {
            scenario_path: path,
            runs: 0,
            horizon: 10,
            seed: 1,
            jobs: 1,
            timings: false,
        });
        assert_eq!(out.code, EXIT_INPUT);
    }

    #[test]
    fn monitor_flags_bad_trace_line() {
        let dir = std::env::temp_dir().join("safekit-test-monitor");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.trace");
        fs::write(&path, "tock\ndetection trained blue\n").unwrap();
        let out = cmd_monitor(&MonitorOptions {
            requirements_path: workspace_file("requirements/default.req"),
            trace_path: path.to_string_lossy().into_owned(),
            near_miss: false,
            timings: false,
        });
        assert_eq!(out.code, EXIT_INPUT);
        assert!(out.stderr.contains("line 2"));
    }
}
