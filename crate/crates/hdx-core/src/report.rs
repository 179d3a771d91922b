//! Check suites, report records, and emission formats behind the `hdx`
//! command-line tool.
//!
//! Every record stores the numbers it compared, the tolerance, and the
//! resulting margin, so a report audits itself: `status` is `Pass` exactly
//! when `margin ≥ −tolerance`, with `Skipped` reserved for checks whose
//! hypotheses the instance does not meet. A check failure never aborts the
//! run; internal errors are recorded on the offending check.
//!
//! Determinism: all sampled functions and optimizer restarts derive from the
//! report seed with a per-check stream, so rerunning a subset of suites
//! reproduces the same numbers as a full run.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use itertools::Itertools;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::complex::{Face, PureSimplicialComplex};
use crate::contraction::{
    check_profile_property, compare_bounds, first_admissibility_violation, solve_recursion,
    ContractionFactors,
};
use crate::entropy::{
    check_entropy_decomposition, entropy_inequality_down_margin, entropy_inequality_up_margin,
    entropy_ratio_objective, gradient_finite_difference_error, relative_entropy, verify_main_ent,
    MainEntReport, MlsiObjective, OptimizerSettings, RatioObjective,
};
use crate::error::{Error, Result};
use crate::instance::InstanceSource;
use crate::spectral::{
    dirichlet_decomposition_residual, eigenvalue_relation_margin, local_row_identity_residual,
    measure_spectral_profile, poincare_eigen_gap, second_eigenvalue, trickling_down_check,
    up_decomposition_d_residual, up_decomposition_g_residual, SpectralProfile,
};
use crate::walks::{
    dirichlet_form, down_step, down_up_walk, expectation, local_walk, project_down,
    sample_gaussian_function, sample_positive_function, up_down_walk, up_step, variance,
    PairDecomposition, WalkOperator,
};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const REPORT_SCHEMA: u32 = 1;

/// Relative tolerance for the analytic-vs-finite-difference gradient check.
pub const GRAD_FD_TOL: f64 = 1e-5;
/// Central-difference step for the gradient check.
pub const GRAD_FD_STEP: f64 = 1e-6;

const UPPER_ESTIMATE: &str = "upper estimate of an infimum";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

/// Which side of `measured ⋛ bound` the check asserts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Asserts `measured ≤ bound`; margin is `bound − measured`.
    Le,
    /// Asserts `measured ≥ bound`; margin is `measured − bound`.
    Ge,
}

/// One verified inequality or identity. All float fields are finite;
/// structurally unbounded or inapplicable quantities become `Skipped`
/// records with a note instead of infinities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub id: String,
    pub suite: String,
    /// Name of the identity or theorem the check exercises.
    pub anchor: String,
    pub direction: Direction,
    pub measured: f64,
    pub bound: f64,
    pub tolerance: f64,
    /// `bound − measured` for `Le`, `measured − bound` for `Ge`.
    pub margin: f64,
    pub status: CheckStatus,
    /// Set when `measured` comes from an optimizer and is one-sided.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate_direction: Option<String>,
    pub wall_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceDescriptor {
    pub source: String,
    pub ground_set_size: usize,
    pub dimension: usize,
    pub level_sizes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub tool_version: String,
    pub instance: InstanceDescriptor,
    pub seed: u64,
    pub restarts: usize,
    pub functions: usize,
    pub eq_tol: f64,
    pub spec_tol: f64,
    pub opt_margin: f64,
    pub opt_tol: f64,
    pub suites: Vec<String>,
    pub checks: Vec<CheckRecord>,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub total_wall_ms: f64,
}

impl VerificationReport {
    /// Copy with every wall-time field zeroed; two runs with identical
    /// inputs agree byte-for-byte after normalization.
    pub fn normalized(&self) -> VerificationReport {
        let mut copy = self.clone();
        copy.total_wall_ms = 0.0;
        for check in &mut copy.checks {
            check.wall_ms = 0.0;
        }
        copy
    }

    /// 0 when nothing failed, 1 otherwise. Skipped checks do not fail.
    pub fn exit_code(&self) -> i32 {
        if self.failed == 0 {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<VerificationReport> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// One header row plus one row per check.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "id,suite,anchor,direction,measured,bound,tolerance,margin,status,estimate_direction,wall_ms,note\n",
        );
        for c in &self.checks {
            let direction = match c.direction {
                Direction::Le => "le",
                Direction::Ge => "ge",
            };
            let status = match c.status {
                CheckStatus::Pass => "pass",
                CheckStatus::Fail => "fail",
                CheckStatus::Skipped => "skipped",
            };
            let fields = [
                c.id.clone(),
                c.suite.clone(),
                c.anchor.clone(),
                direction.to_string(),
                format!("{}", c.measured),
                format!("{}", c.bound),
                format!("{}", c.tolerance),
                format!("{}", c.margin),
                status.to_string(),
                c.estimate_direction.clone().unwrap_or_default(),
                format!("{}", c.wall_ms),
                c.note.clone().unwrap_or_default(),
            ];
            out.push_str(&fields.iter().map(|f| csv_field(f)).join(","));
            out.push('\n');
        }
        out
    }

    /// Aligned human-readable table; failed checks are repeated at the end
    /// with their anchors and notes.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "verification report (schema {}, tool {})",
            self.schema, self.tool_version
        );
        let _ = writeln!(
            out,
            "instance {} | ground set {} | dimension {} | level sizes {:?}",
            self.instance.source,
            self.instance.ground_set_size,
            self.instance.dimension,
            self.instance.level_sizes
        );
        let _ = writeln!(
            out,
            "seed {} | restarts {} | functions {} | eq-tol {:e} | spec-tol {:e} | opt-margin {:e} | opt-tol {:e}",
            self.seed, self.restarts, self.functions, self.eq_tol, self.spec_tol,
            self.opt_margin, self.opt_tol
        );
        let _ = writeln!(out, "suites: {}", self.suites.join(", "));
        out.push('\n');
        let id_width = self
            .checks
            .iter()
            .map(|c| c.id.len())
            .max()
            .unwrap_or(5)
            .max(5);
        let anchor_width = self
            .checks
            .iter()
            .map(|c| c.anchor.len())
            .max()
            .unwrap_or(6)
            .max(6);
        let _ = writeln!(
            out,
            "{:<7} {:<id_width$} {:<anchor_width$} {:>13} {:>13} {:>13}",
            "status", "check", "anchor", "measured", "bound", "margin"
        );
        for c in &self.checks {
            let status = match c.status {
                CheckStatus::Pass => "PASS",
                CheckStatus::Fail => "FAIL",
                CheckStatus::Skipped => "SKIP",
            };
            let _ = writeln!(
                out,
                "{:<7} {:<id_width$} {:<anchor_width$} {:>13.4e} {:>13.4e} {:>13.4e}",
                status, c.id, c.anchor, c.measured, c.bound, c.margin
            );
        }
        let failed: Vec<&CheckRecord> = self
            .checks
            .iter()
            .filter(|c| c.status == CheckStatus::Fail)
            .collect();
        if !failed.is_empty() {
            out.push('\n');
            let _ = writeln!(out, "failed checks:");
            for c in failed {
                let _ = writeln!(
                    out,
                    "  {} ({}): measured {:e}, bound {:e}, margin {:e}{}",
                    c.id,
                    c.anchor,
                    c.measured,
                    c.bound,
                    c.margin,
                    c.note
                        .as_deref()
                        .map(|n| format!("; {n}"))
                        .unwrap_or_default()
                );
            }
        }
        out.push('\n');
        let _ = writeln!(
            out,
            "summary: {} passed, {} failed, {} skipped ({} checks, {:.0} ms)",
            self.passed,
            self.failed,
            self.skipped,
            self.checks.len(),
            self.total_wall_ms
        );
        out
    }
}

fn csv_field(text: &str) -> String {
    if text.contains(',') || text.contains('"') || text.contains('\n') {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

/// The five check suites, in canonical run order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Structure,
    Walks,
    Spectral,
    Bounds,
    Entropy,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Structure,
        Suite::Walks,
        Suite::Spectral,
        Suite::Bounds,
        Suite::Entropy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Structure => "structure",
            Suite::Walks => "walks",
            Suite::Spectral => "spectral",
            Suite::Bounds => "bounds",
            Suite::Entropy => "entropy",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(text: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|s| s.name() == text)
            .ok_or_else(|| {
                Error::Parse(format!(
                    "unknown suite '{text}' (expected one of structure, walks, spectral, bounds, entropy)"
                ))
            })
    }
}

/// Parses `all` or a comma-separated suite list into canonical order.
pub fn parse_suites(text: &str) -> Result<Vec<Suite>> {
    if text.trim() == "all" {
        return Ok(Suite::ALL.to_vec());
    }
    let mut suites: Vec<Suite> = text
        .split(',')
        .map(|part| part.trim().parse())
        .collect::<Result<_>>()?;
    suites.sort();
    suites.dedup();
    Ok(suites)
}

#[derive(Clone, Debug)]
pub struct AnalyzeOptions {
    pub seed: u64,
    pub restarts: usize,
    /// Sampled functions per inequality check and level.
    pub functions: usize,
    pub max_iterations: usize,
    /// Tolerance for exact algebraic identities.
    pub eq_tol: f64,
    /// Tolerance for eigensolver-backed comparisons.
    pub spec_tol: f64,
    /// Allowed shortfall of one-sided optimizer estimates.
    pub opt_margin: f64,
    /// Optimizer gradient-norm stopping tolerance.
    pub opt_tol: f64,
    pub suites: Vec<Suite>,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            seed: 42,
            restarts: crate::entropy::DEFAULT_RESTARTS,
            functions: 1000,
            max_iterations: crate::entropy::DEFAULT_MAX_ITERATIONS,
            eq_tol: 1e-10,
            spec_tol: 1e-9,
            opt_margin: 1e-6,
            opt_tol: crate::entropy::DEFAULT_GRAD_TOL,
            suites: Suite::ALL.to_vec(),
        }
    }
}

/// Loads the instance and runs every selected suite; check failures are
/// recorded, never raised. Only ingestion problems return an error.
pub fn run_analyze(
    source: &InstanceSource,
    options: &AnalyzeOptions,
) -> Result<VerificationReport> {
    let start = Instant::now();
    let complex = source.load()?;
    let instance = InstanceDescriptor {
        source: source.label(),
        ground_set_size: complex.ground_set_size(),
        dimension: complex.dimension(),
        level_sizes: complex.level_sizes(),
    };
    let mut checks = Vec::new();
    for suite in &options.suites {
        match suite {
            Suite::Structure => structure_suite(&complex, options, &mut checks),
            Suite::Walks => walks_suite(&complex, options, &mut checks),
            Suite::Spectral => spectral_suite(&complex, options, &mut checks),
            Suite::Bounds => bounds_suite(&complex, options, &mut checks),
            Suite::Entropy => entropy_suite(&complex, options, &mut checks),
        }
    }
    let passed = checks
        .iter()
        .filter(|c| c.status == CheckStatus::Pass)
        .count();
    let failed = checks
        .iter()
        .filter(|c| c.status == CheckStatus::Fail)
        .count();
    let skipped = checks
        .iter()
        .filter(|c| c.status == CheckStatus::Skipped)
        .count();
    Ok(VerificationReport {
        schema: REPORT_SCHEMA,
        tool_version: TOOL_VERSION.to_string(),
        instance,
        seed: options.seed,
        restarts: options.restarts,
        functions: options.functions,
        eq_tol: options.eq_tol,
        spec_tol: options.spec_tol,
        opt_margin: options.opt_margin,
        opt_tol: options.opt_tol,
        suites: options
            .suites
            .iter()
            .map(|s| s.name().to_string())
            .collect(),
        checks,
        passed,
        failed,
        skipped,
        total_wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Outcome a check body hands back to the recorder.
enum CheckOutcome {
    Measured {
        measured: f64,
        bound: f64,
        note: Option<String>,
    },
    Skip {
        note: String,
    },
}

impl CheckOutcome {
    fn measured(measured: f64, bound: f64) -> Self {
        CheckOutcome::Measured {
            measured,
            bound,
            note: None,
        }
    }

    fn measured_with(measured: f64, bound: f64, note: String) -> Self {
        CheckOutcome::Measured {
            measured,
            bound,
            note: Some(note),
        }
    }

    fn skip(note: impl Into<String>) -> Self {
        CheckOutcome::Skip { note: note.into() }
    }
}

/// Errors that mean "the check's hypothesis does not apply here" rather
/// than "something is wrong".
fn error_skips(e: &Error) -> bool {
    matches!(
        e,
        Error::LevelOutOfRange(_)
            | Error::PreconditionUnmet(_)
            | Error::DegenerateStateSpace(_)
            | Error::DisconnectedGraph(_)
            | Error::InstanceTooLarge(_)
            | Error::InvalidProfile(_)
            | Error::Admissibility { .. }
    )
}

struct CheckSpec<'a> {
    suite: Suite,
    id: &'a str,
    anchor: &'a str,
    direction: Direction,
    tolerance: f64,
    estimate: Option<&'a str>,
}

fn run_check(
    checks: &mut Vec<CheckRecord>,
    spec: CheckSpec<'_>,
    body: impl FnOnce() -> Result<CheckOutcome>,
) {
    let start = Instant::now();
    let outcome = body();
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let (measured, bound, margin, status, note) = match outcome {
        Ok(CheckOutcome::Measured {
            measured,
            bound,
            note,
        }) => {
            if measured.is_finite() && bound.is_finite() {
                let margin = match spec.direction {
                    Direction::Le => bound - measured,
                    Direction::Ge => measured - bound,
                };
                let status = if margin >= -spec.tolerance {
                    CheckStatus::Pass
                } else {
                    CheckStatus::Fail
                };
                (measured, bound, margin, status, note)
            } else {
                let reason = format!("non-finite comparison: measured {measured}, bound {bound}");
                let note = match note {
                    Some(n) => format!("{reason}; {n}"),
                    None => reason,
                };
                (0.0, 0.0, 0.0, CheckStatus::Skipped, Some(note))
            }
        }
        Ok(CheckOutcome::Skip { note }) => (0.0, 0.0, 0.0, CheckStatus::Skipped, Some(note)),
        Err(e) if error_skips(&e) => (0.0, 0.0, 0.0, CheckStatus::Skipped, Some(e.to_string())),
        Err(e) => (0.0, 0.0, -1.0, CheckStatus::Fail, Some(e.to_string())),
    };
    checks.push(CheckRecord {
        id: spec.id.to_string(),
        suite: spec.suite.name().to_string(),
        anchor: spec.anchor.to_string(),
        direction: spec.direction,
        measured,
        bound,
        tolerance: spec.tolerance,
        margin,
        status,
        estimate_direction: spec.estimate.map(str::to_string),
        wall_ms,
        note,
    });
}

/// Per-check generator: seeded by the report seed with a stream derived
/// from the check id, so the draws do not depend on which other checks ran.
fn check_rng(seed: u64, id: &str) -> ChaCha8Rng {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in id.bytes() {
        h ^= u64::from(byte);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(h);
    rng
}

fn structure_suite(
    complex: &PureSimplicialComplex,
    options: &AnalyzeOptions,
    checks: &mut Vec<CheckRecord>,
) {
    let d = complex.dimension();
    run_check(
        checks,
        CheckSpec {
            suite: Suite::Structure,
            id: "structure/weight-recursion",
            anchor: "weight-recursion",
            direction: Direction::Le,
            tolerance: options.eq_tol,
            estimate: None,
        },
        || {
            let mut worst: f64 = 0.0;
            for k in 0..d {
                let lower = complex.level(k);
                let upper = complex.level(k + 1);
                let mut sums = vec![0.0; lower.len()];
                for (t, &wt) in upper.faces().iter().zip(upper.weights()) {
                    for idx in 0..t.elements().len() {
                        let s = t.without_position(idx);
                        let i = lower.position(&s).ok_or_else(|| {
                            Error::NotAFace(format!("{s} missing from level {k}"))
                        })?;
                        sums[i] += wt;
                    }
                }
                for (i, &w) in lower.weights().iter().enumerate() {
                    worst = worst.max((sums[i] - w).abs() / w.abs().max(f64::MIN_POSITIVE));
                }
            }
            Ok(CheckOutcome::measured(worst, 0.0))
        },
    );
    run_check(
        checks,
        CheckSpec {
            suite: Suite::Structure,
            id: "structure/marginal-consistency",
            anchor: "stationary-marginals",
            direction: Direction::Le,
            tolerance: options.eq_tol,
            estimate: None,
        },
        || {
            let mut worst: f64 = 0.0;
            for k in 0..d {
                let up = up_step(complex, k)?;
                worst = worst.max(up.stationarity_residual(&complex.level_distribution(k + 1)?)?);
                let down = down_step(complex, k + 1)?;
                worst = worst.max(down.stationarity_residual(&complex.level_distribution(k)?)?);
            }
            Ok(CheckOutcome::measured(worst, 0.0))
        },
    );
    run_check(
        checks,
        CheckSpec {
            suite: Suite::Structure,
            id: "structure/distribution-normalization",
            anchor: "level-distributions",
            direction: Direction::Le,
            tolerance: options.eq_tol,
            estimate: None,
        },
        || {
            let mut worst: f64 = 0.0;
            for k in 0..=d {
                let pi = complex.level_distribution(k)?;
                worst = worst.max((pi.probs().sum() - 1.0).abs());
            }
            Ok(CheckOutcome::measured(worst, 0.0))
        },
    );
}

fn walks_suite(
    complex: &PureSimplicialComplex,
    options: &AnalyzeOptions,
    checks: &mut Vec<CheckRecord>,
) {
    let d = complex.dimension();
    run_check(
        checks,
        CheckSpec {
            suite: Suite::Walks,
            id: "walks/row-sums",
            anchor: "stochasticity",
            direction: Direction::Le,
            tolerance: options.eq_tol,
            estimate: None,
        },
        || {
            let mut worst: f64 = 0.0;
            for k in 0..d {
                worst = worst.max(up_step(complex, k)?.row_sum_residual());
                worst = worst.max(up_down_walk(complex, k)?.row_sum_residual());
            }
            for k in 1..=d {
                worst = worst.max(down_step(complex, k)?.row_sum_residual());
                worst = worst.max(down_up_walk(complex, k)?.row_sum_residual());
            }
            Ok(CheckOutcome::measured(worst, 0.0))
        },
    );
    run_check(
        checks,
        CheckSpec {
            suite: Suite::Walks,
            id: "walks/reversibility",
            anchor: "detailed-balance",
            direction: Direction::Le,
            tolerance: options.eq_tol,
            estimate: None,
        },
        || {
            let mut worst: f64 = 0.0;
            for k in 0..d {
                worst = worst.max(up_down_walk(complex, k)?.detailed_balance_residual()?);
            }
            for k in 1..=d {
                worst = worst.max(down_up_walk(complex, k)?.detailed_balance_residual()?);
            }
            Ok(CheckOutcome::measured(worst, 0.0))
        },
    );
    run_check(
        checks,
        CheckSpec {
            suite: Suite::Walks,
            id: "walks/adjointness",
            anchor: "up-down-adjoint",
            direction: Direction::Le,
            tolerance: options.eq_tol,
            estimate: None,
        },
        || {
            let mut worst: f64 = 0.0;
            for k in 0..d {
                let up = up_step(complex, k)?;
                let down = down_step(complex, k + 1)?;
                let pi_k = complex.level_distribution(k)?;
                let pi_k1 = complex.level_distribution(k + 1)?;
                for s in 0..up.nrows() {
                    for t in 0..up.ncols() {
                        let flow_up = pi_k.get(s) * up.matrix()[(s, t)];
                        let flow_down = pi_k1.get(t) * down.matrix()[(t, s)];
                        worst = worst.max((flow_up - flow_down).abs());
                    }
                }
            }
            Ok(CheckOutcome::measured(worst, 0.0))
        },
    );
    run_check(
        checks,
        CheckSpec {
            suite: Suite::Walks,
            id: "walks/var-equiv",
            anchor: "var-equiv",
            direction: Direction::Le,
            tolerance: options.eq_tol,
            estimate: None,
        },
        || {
            let mut rng = check_rng(options.seed, "walks/var-equiv");
            let mut worst: f64 = 0.0;
            for k in 1..=d {
                let walk = down_up_walk(complex, k)?;
                let pi_k = complex.level_distribution(k)?;
                let pi_km1 = complex.level_distribution(k - 1)?;
                for _ in 0..options.functions {
                    let f = sample_gaussian_function(complex, k, &mut rng)?;
                    let projected = project_down(complex, &f, k - 1)?;
                    let lhs = dirichlet_form(&walk, &f, &f)?;
                    let rhs = variance(&pi_k, &f)? - variance(&pi_km1, &projected)?;
                    worst = worst.max((lhs - rhs).abs() / lhs.abs().max(1.0));
                }
            }
            Ok(CheckOutcome::measured(worst, 0.0))
        },
    );
    run_check(
        checks,
        CheckSpec {
            suite: Suite::Walks,
            id: "walks/var-equiv-up",
            anchor: "var-equiv-up",
            direction: Direction::Le,
            tolerance: options.eq_tol,
            estimate: None,
        },
        || {
            let mut rng = check_rng(options.seed, "walks/var-equiv-up");
            let mut worst: f64 = 0.0;
            for k in 1..=d {
                let walk = up_down_walk(complex, k - 1)?;
                let lift = down_step(complex, k)?;
                let pi_k = complex.level_distribution(k)?;
                let pi_km1 = complex.level_distribution(k - 1)?;
                for _ in 0..options.functions {
                    let g = sample_gaussian_function(complex, k - 1, &mut rng)?;
                    let lifted = lift.apply(&g)?;
                    let lhs = dirichlet_form(&walk, &g, &g)?;
                    let rhs = variance(&pi_km1, &g)? - variance(&pi_k, &lifted)?;
                    worst = worst.max((lhs - rhs).abs() / lhs.abs().max(1.0));
                }
            }
            Ok(CheckOutcome::measured(worst, 0.0))
        },
    );
    run_check(
        checks,
        CheckSpec {
            suite: Suite::Walks,
            id: "walks/variance-decomposition",
            anchor: "variance-decomposition",
            direction: Direction::Le,
            tolerance: options.eq_tol,
            estimate: None,
        },
        || {
            if d < 2 {
                return Ok(CheckOutcome::skip("needs dimension ≥ 2"));
            }
            let mut rng = check_rng(options.seed, "walks/variance-decomposition");
            let mut worst: f64 = 0.0;
            for k in 2..=d {
                for _ in 0..options.functions {
                    let f = sample_gaussian_function(complex, k, &mut rng)?;
                    worst = worst.max(crate::walks::check_variance_decomposition(complex, k, &f)?);
                }
            }
            Ok(CheckOutcome::measured(worst, 0.0))
        },
    );
    run_check(
        checks,
        CheckSpec {
            suite: Suite::Walks,
            id: "walks/mixture-identity",
            anchor: "mixture-identity",
            direction: Direction::Le,
            tolerance: options.eq_tol,
            estimate: None,
        },
        || {
            if d < 2 {
                return Ok(CheckOutcome::skip("needs dimension ≥ 2"));
            }
            let mut worst: f64 = 0.0;
            for k in 2..=d {
                let decomp = PairDecomposition::new(complex, k)?;
                worst =
                    worst.max(decomp.mixture_identity_residual(&complex.level_distribution(k)?)?);
            }
            Ok(CheckOutcome::measured(worst, 0.0))
        },
    );
    run_check(
        checks,
        CheckSpec {
            suite: Suite::Walks,
            id: "walks/projection-mean",
            anchor: "projection-mean",
            direction: Direction::Le,
            tolerance: options.eq_tol,
            estimate: None,
        },
        || {
            let mut rng = check_rng(options.seed, "walks/projection-mean");
            let mut worst: f64 = 0.0;
            for k in 1..=d {
                let pi_k = complex.level_distribution(k)?;
                let pi_km1 = complex.level_distribution(k - 1)?;
                for _ in 0..options.functions {
                    let f = sample_gaussian_function(complex, k, &mut rng)?;
                    let projected = project_down(complex, &f, k - 1)?;
                    let mean_k = expectation(&pi_k, &f)?;
                    let mean_km1 = expectation(&pi_km1, &projected)?;
                    worst = worst.max((mean_k - mean_km1).abs() / mean_k.abs().max(1.0));
                }
            }
            Ok(CheckOutcome::measured(worst, 0.0))
        },
    );
    run_check(
        checks,
        CheckSpec {
            suite: Suite::Walks,
            id: "walks/poincare",
            anchor: "poincare",
            direction: Direction::Le,
            tolerance: options.spec_tol,
            estimate: None,
        },
        || {
            let mut worst: f64 = 0.0;
            let mut measured_any = false;
            for k in 1..=d {
                match poincare_eigen_gap(&down_up_walk(complex, k)?) {
                    Ok((gap, quotient)) => {
                        worst = worst.max((gap - quotient).abs());
                        measured_any = true;
                    }
                    Err(e) if error_skips(&e) => {}
                    Err(e) => return Err(e),
                }
            }
            for k in 0..d {
                match poincare_eigen_gap(&up_down_walk(complex, k)?) {
                    Ok((gap, quotient)) => {
                        worst = worst.max((gap - quotient).abs());
                        measured_any = true;
                    }
                    Err(e) if error_skips(&e) => {}
                    Err(e) => return Err(e),
                }
            }
            if !measured_any {
                return Ok(CheckOutcome::skip("no walk has more than one state"));
            }
            Ok(CheckOutcome::measured(worst, 0.0))
        },
    );
    run_check(
        checks,
        CheckSpec {
            suite: Suite::Walks,
            id: "walks/cospectrality",
            anchor: "cospectrality",
            direction: Direction::Le,
            tolerance: options.spec_tol,
            estimate: None,
        },
        || {
            let mut worst: f64 = 0.0;
            for k in 1..=d {
                let down = walk_spectrum(&down_up_walk(complex, k)?)?;
                let up = walk_spectrum(&up_down_walk(complex, k - 1)?)?;
                let len = down.len().max(up.len());
                let pad = |mut v: Vec<f64>| {
                    v.resize(len, 0.0);
                    v.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
                    v
                };
                let down = pad(down);
                let up = pad(up);
                for (a, b) in down.iter().zip(&up) {
                    worst = worst.max((a - b).abs());
                }
            }
            Ok(CheckOutcome::measured(worst, 0.0))
        },
    );
}

/// Eigenvalues of a reversible walk; a single-state walk trivially has
/// spectrum `{1}`.
fn walk_spectrum(op: &WalkOperator) -> Result<Vec<f64>> {
    if op.nrows() == 1 {
        return Ok(vec![1.0]);
    }
    Ok(crate::spectral::reversible_eigen(op)?.values)
}

fn spectral_suite(
    complex: &PureSimplicialComplex,
    options: &AnalyzeOptions,
    checks: &mut Vec<CheckRecord>,
) {
    let d = complex.dimension();
    run_check(
        checks,
        CheckSpec {
            suite: Suite::Spectral,
            id: "spectral/profile-witness",
            anchor: "local-spectral-profile",
            direction: Direction::Le,
            tolerance: options.spec_tol,
            estimate: None,
        },
        || {
            let measurement = measure_spectral_profile(complex)?;
            let mut worst: f64 = 0.0;
            for witness in &measurement.witnesses {
                let recomputed = second_eigenvalue(&local_walk(complex, &witness.face)?)?;
                worst = worst.max((recomputed - witness.lambda2).abs());
            }
            let mut note = format!(
                "profile [{}]",
                measurement
                    .profile
                    .values()
                    .iter()
                    .map(|v| format!("{v:.6}"))
                    .join(", ")
            );
            if !measurement.disconnected.is_empty() {
                let _ = write!(
                    note,
                    "; {} disconnected local walk(s)",
                    measurement.disconnected.len()
                );
            }
            Ok(CheckOutcome::measured_with(worst, 0.0, note))
        },
    );
    run_check(
        checks,
        CheckSpec {
            suite: Suite::Spectral,
            id: "spectral/trickling-down",
            anchor: "trickling-down",
            direction: Direction::Ge,
            tolerance: options.spec_tol,
            estimate: None,
        },
        || {
            if d < 3 {
                return Ok(CheckOutcome::skip("needs dimension ≥ 3"));
            }
            let mut worst = f64::INFINITY;
            let mut notes = Vec::new();
            for k in 1..=(d - 2) {
                match trickling_down_check(complex, k) {
                    Ok(check) => {
                        notes.push(format!(
                            "k={k}: γ={:.6}, bound={:.6}",
                            check.gamma, check.bound
                        ));
                        if check.worst_margin.is_finite() {
                            worst = worst.min(check.worst_margin);
                        }
                    }
                    Err(Error::PreconditionUnmet(msg)) => {
                        notes.push(format!("k={k}: hypothesis vacuous ({msg})"));
                    }
                    Err(e) => return Err(e),
                }
            }
            if !worst.is_finite() {
                return Ok(CheckOutcome::skip(format!(
                    "no level admits the check: {}",
                    notes.join("; ")
                )));
            }
            Ok(CheckOutcome::measured_with(worst, 0.0, notes.join("; ")))
        },
    );
    run_check(
        checks,
        CheckSpec {
            suite: Suite::Spectral,
            id: "spectral/operator-decomposition",
            anchor: "up-decomposition",
            direction: Direction::Le,
            tolerance: options.eq_tol,
            estimate: None,
        },
        || {
            let measure = up_decomposition_d_residual(complex)?;
            let operator = up_decomposition_g_residual(complex)?;
            Ok(CheckOutcome::measured(measure.max(operator), 0.0))
        },
    );
    run_check(
        checks,
        CheckSpec {
            suite: Suite::Spectral,
            id: "spectral/row-identity",
            anchor: "local-row-identity",
            direction: Direction::Le,
            tolerance: options.eq_tol,
            estimate: None,
        },
        || {
            Ok(CheckOutcome::measured(
                local_row_identity_residual(complex)?,
                0.0,
            ))
        },
    );
    run_check(
        checks,
        CheckSpec {
            suite: Suite::Spectral,
            id: "spectral/dirichlet-decomposition",
            anchor: "dirichlet-decomposition",
            direction: Direction::Le,
            tolerance: options.eq_tol,
            estimate: None,
        },
        || {
            let mut rng = check_rng(options.seed, "spectral/dirichlet-decomposition");
            let mut worst: f64 = 0.0;
            for _ in 0..options.functions {
                let f = sample_gaussian_function(complex, 1, &mut rng)?;
                worst = worst.max(dirichlet_decomposition_residual(complex, &f)?);
            }
            Ok(CheckOutcome::measured(worst, 0.0))
        },
    );
    run_check(
        checks,
        CheckSpec {
            suite: Suite::Spectral,
            id: "spectral/eigenvalue-relation",
            anchor: "eigenvalue-relation",
            direction: Direction::Ge,
            tolerance: options.spec_tol,
            estimate: None,
        },
        || {
            Ok(CheckOutcome::measured(
                eigenvalue_relation_margin(complex)?,
                0.0,
            ))
        },
    );
}

fn bounds_suite(
    complex: &PureSimplicialComplex,
    options: &AnalyzeOptions,
    checks: &mut Vec<CheckRecord>,
) {
    let d = complex.dimension();
    let mut clamped: Option<SpectralProfile> = None;
    run_check(
        checks,
        CheckSpec {
            suite: Suite::Bounds,
            id: "bounds/recursion-closed-form",
            anchor: "closed-form",
            direction: Direction::Le,
            tolerance: options.eq_tol,
            estimate: None,
        },
        || {
            let measurement = measure_spectral_profile(complex)?;
            let profile = measurement.profile.clamped_nonnegative();
            clamped = Some(profile.clone());
            let solution = solve_recursion(&ContractionFactors::from_profile(&profile)?);
            match solution.recursion_closed_form_residual() {
                Some(residual) => Ok(CheckOutcome::measured(residual, 0.0)),
                None => Ok(CheckOutcome::skip(
                    "closed form is singular (some factor equals one)",
                )),
            }
        },
    );
    run_check(
        checks,
        CheckSpec {
            suite: Suite::Bounds,
            id: "bounds/comparison",
            anchor: "bound-comparison",
            direction: Direction::Ge,
            tolerance: options.eq_tol,
            estimate: None,
        },
        || {
            let Some(profile) = clamped.as_ref() else {
                return Ok(CheckOutcome::skip("spectral profile unavailable"));
            };
            let rows = compare_bounds(profile)?;
            let min_gap = rows.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min);
            let note = rows
                .iter()
                .map(|r| format!("k={}: ours={:.6}, al={:.6}", r.k, r.ours, r.al))
                .join("; ");
            Ok(CheckOutcome::measured_with(min_gap, 0.0, note))
        },
    );
    run_check(
        checks,
        CheckSpec {
            suite: Suite::Bounds,
            id: "bounds/down-walk-gap",
            anchor: "down-up-gap",
            direction: Direction::Le,
            tolerance: options.spec_tol,
            estimate: None,
        },
        || {
            let Some(profile) = clamped.as_ref() else {
                return Ok(CheckOutcome::skip("spectral profile unavailable"));
            };
            if let Some(index) = first_admissibility_violation(profile) {
                return Ok(CheckOutcome::skip(format!(
                    "clamped profile inadmissible at index {index}"
                )));
            }
            let solution = solve_recursion(&ContractionFactors::from_profile(profile)?);
            let mut worst = f64::NEG_INFINITY;
            let mut notes = Vec::new();
            for k in 2..=d {
                match second_eigenvalue(&down_up_walk(complex, k)?) {
                    Ok(lambda2) => {
                        let bound = solution.our_bound_at(k)?;
                        worst = worst.max(lambda2 - bound);
                        notes.push(format!("k={k}: λ₂={lambda2:.6} vs {bound:.6}"));
                    }
                    Err(e) if error_skips(&e) => notes.push(format!("k={k}: skipped ({e})")),
                    Err(e) => return Err(e),
                }
            }
            if !worst.is_finite() {
                return Ok(CheckOutcome::skip(format!(
                    "no level measurable: {}",
                    notes.join("; ")
                )));
            }
            Ok(CheckOutcome::measured_with(worst, 0.0, notes.join("; ")))
        },
    );
    run_check(
        checks,
        CheckSpec {
            suite: Suite::Bounds,
            id: "bounds/profile-property",
            anchor: "profile-property",
            direction: Direction::Ge,
            tolerance: options.eq_tol,
            estimate: None,
        },
        || {
            let Some(profile) = clamped.as_ref() else {
                return Ok(CheckOutcome::skip("spectral profile unavailable"));
            };
            if let Some(index) = first_admissibility_violation(profile) {
                return Ok(CheckOutcome::skip(format!(
                    "clamped profile inadmissible at index {index}"
                )));
            }
            let min = (0..profile.len())
                .map(|k| check_profile_property(profile, k))
                .fold(f64::INFINITY, f64::min);
            Ok(CheckOutcome::measured(min, 0.0))
        },
    );
}

fn entropy_suite(
    complex: &PureSimplicialComplex,
    options: &AnalyzeOptions,
    checks: &mut Vec<CheckRecord>,
) {
    let d = complex.dimension();
    let settings = OptimizerSettings {
        restarts: options.restarts,
        max_iterations: options.max_iterations,
        grad_tol: options.opt_tol,
    };
    run_check(
        checks,
        CheckSpec {
            suite: Suite::Entropy,
            id: "entropy/gradient-check",
            anchor: "gradient-fd",
            direction: Direction::Le,
            tolerance: GRAD_FD_TOL,
            estimate: None,
        },
        || {
            let mut rng = check_rng(options.seed, "entropy/gradient-check");
            let mlsi = MlsiObjective::new(down_up_walk(complex, d)?)?;
            let ratio = entropy_ratio_objective(complex, d)?;
            let mut worst: f64 = 0.0;
            for _ in 0..3 {
                let g = DVector::from_fn(mlsi.dimension(), |_, _| {
                    rng.sample::<f64, _>(StandardNormal)
                });
                worst = worst.max(gradient_finite_difference_error(&mlsi, &g, GRAD_FD_STEP));
                let g = DVector::from_fn(ratio.dimension(), |_, _| {
                    rng.sample::<f64, _>(StandardNormal)
                });
                worst = worst.max(gradient_finite_difference_error(&ratio, &g, GRAD_FD_STEP));
            }
            Ok(CheckOutcome::measured(worst, 0.0))
        },
    );
    run_check(
        checks,
        CheckSpec {
            suite: Suite::Entropy,
            id: "entropy/inequality-down",
            anchor: "entropy-ineq",
            direction: Direction::Ge,
            tolerance: options.eq_tol,
            estimate: None,
        },
        || {
            let mut rng = check_rng(options.seed, "entropy/inequality-down");
            let mut worst = f64::INFINITY;
            for k in 1..=d {
                for _ in 0..options.functions {
                    let f = sample_positive_function(complex, k, &mut rng)?;
                    worst = worst.min(entropy_inequality_down_margin(complex, k, &f)?);
                }
            }
            Ok(CheckOutcome::measured(worst, 0.0))
        },
    );
    run_check(
        checks,
        CheckSpec {
            suite: Suite::Entropy,
            id: "entropy/inequality-up",
            anchor: "entropy-ineq-up",
            direction: Direction::Ge,
            tolerance: options.eq_tol,
            estimate: None,
        },
        || {
            let mut rng = check_rng(options.seed, "entropy/inequality-up");
            let mut worst = f64::INFINITY;
            for k in 1..=d {
                for _ in 0..options.functions {
                    let g = sample_positive_function(complex, k - 1, &mut rng)?;
                    worst = worst.min(entropy_inequality_up_margin(complex, k, &g)?);
                }
            }
            Ok(CheckOutcome::measured(worst, 0.0))
        },
    );
    run_check(
        checks,
        CheckSpec {
            suite: Suite::Entropy,
            id: "entropy/decomposition",
            anchor: "entropy-decomposition",
            direction: Direction::Le,
            tolerance: options.eq_tol,
            estimate: None,
        },
        || {
            if d < 2 {
                return Ok(CheckOutcome::skip("needs dimension ≥ 2"));
            }
            let mut rng = check_rng(options.seed, "entropy/decomposition");
            let mut worst: f64 = 0.0;
            for k in 2..=d {
                for _ in 0..options.functions {
                    let f = sample_positive_function(complex, k, &mut rng)?;
                    worst = worst.max(check_entropy_decomposition(complex, k, &f)?);
                }
            }
            Ok(CheckOutcome::measured(worst, 0.0))
        },
    );
    run_check(
        checks,
        CheckSpec {
            suite: Suite::Entropy,
            id: "entropy/data-processing",
            anchor: "data-processing",
            direction: Direction::Ge,
            tolerance: options.eq_tol,
            estimate: None,
        },
        || {
            let mut rng = check_rng(options.seed, "entropy/data-processing");
            let mut worst = f64::INFINITY;
            for k in 1..=d {
                let pi_k = complex.level_distribution(k)?;
                let pi_km1 = complex.level_distribution(k - 1)?;
                for _ in 0..options.functions {
                    let f = sample_positive_function(complex, k, &mut rng)?;
                    let projected = project_down(complex, &f, k - 1)?;
                    let drop =
                        relative_entropy(&pi_k, &f)? - relative_entropy(&pi_km1, &projected)?;
                    worst = worst.min(drop);
                }
            }
            Ok(CheckOutcome::measured(worst, 0.0))
        },
    );
    let mut main_report: Option<MainEntReport> = None;
    run_check(
        checks,
        CheckSpec {
            suite: Suite::Entropy,
            id: "entropy/main-ent",
            anchor: "main-ent",
            direction: Direction::Ge,
            tolerance: options.opt_margin,
            estimate: Some(UPPER_ESTIMATE),
        },
        || {
            let report = verify_main_ent(complex, d, &settings, options.seed)?;
            let outcome = if report.global_estimate.is_finite() && report.v_hat.is_finite() {
                let note = format!(
                    "k={}; v̂={:.9}; local factors [{}]",
                    report.k,
                    report.v_hat,
                    report
                        .local
                        .iter()
                        .map(|l| format!("{:.6}", l.worst_factor))
                        .join(", ")
                );
                CheckOutcome::measured_with(report.global_estimate, report.v_hat, note)
            } else {
                CheckOutcome::skip(format!(
                    "unbounded estimate: global {}, v̂ {}",
                    report.global_estimate, report.v_hat
                ))
            };
            main_report = Some(report);
            Ok(outcome)
        },
    );
    run_check(
        checks,
        CheckSpec {
            suite: Suite::Entropy,
            id: "entropy/mlsi-down",
            anchor: "mlsi-corollary",
            direction: Direction::Ge,
            tolerance: options.opt_margin,
            estimate: Some(UPPER_ESTIMATE),
        },
        || match &main_report {
            Some(report) => Ok(CheckOutcome::measured(
                report.mlsi_down_estimate,
                report.mlsi_bound,
            )),
            None => Ok(CheckOutcome::skip("no entropy-theorem measurements")),
        },
    );
    run_check(
        checks,
        CheckSpec {
            suite: Suite::Entropy,
            id: "entropy/mlsi-up",
            anchor: "mlsi-corollary-up",
            direction: Direction::Ge,
            tolerance: options.opt_margin,
            estimate: Some(UPPER_ESTIMATE),
        },
        || match &main_report {
            Some(report) => Ok(CheckOutcome::measured(
                report.mlsi_up_estimate,
                report.mlsi_bound,
            )),
            None => Ok(CheckOutcome::skip("no entropy-theorem measurements")),
        },
    );
    run_check(
        checks,
        CheckSpec {
            suite: Suite::Entropy,
            id: "entropy/collapse",
            anchor: "main-ent-collapse",
            direction: Direction::Le,
            tolerance: options.opt_margin,
            estimate: Some(UPPER_ESTIMATE),
        },
        || {
            let gap = match main_report.as_ref().filter(|r| r.k == 2) {
                Some(report) => report.collapse_gap,
                None => verify_main_ent(complex, 2, &settings, options.seed)?.collapse_gap,
            };
            match gap {
                Some(gap) => Ok(CheckOutcome::measured(gap, 0.0)),
                None => Ok(CheckOutcome::skip("no two-level comparison available")),
            }
        },
    );
}

/// One row of the bound table derived from a spectral profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub k: usize,
    /// Recursion value `v_{k−2}`.
    pub v: f64,
    /// `γ_k = 1/v_{k−2}`.
    pub our_bound: f64,
    /// Product-form bound `γ_{k,AL}`.
    pub al_bound: f64,
    /// `our_bound − al_bound`.
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub schema: u32,
    pub profile: Vec<f64>,
    pub rows: Vec<BoundsRow>,
}

impl BoundsReport {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("bounds report serializes");
        text.push('\n');
        text
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "profile [{}]",
            self.profile.iter().map(|v| format!("{v:.6}")).join(", ")
        );
        let _ = writeln!(
            out,
            "{:>3} {:>16} {:>16} {:>16} {:>13}",
            "k", "v", "our_bound", "al_bound", "gap"
        );
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{:>3} {:>16.12} {:>16.12} {:>16.12} {:>13.4e}",
                row.k, row.v, row.our_bound, row.al_bound, row.gap
            );
        }
        out
    }
}

/// Solves the recursion on an admissible profile and tabulates both bound
/// families for `k = 2, …, min(k_max, d)`. A `k_max` beyond the profile's
/// dimension is clamped; one below 2 is invalid.
pub fn profile_bounds_rows(
    profile: &SpectralProfile,
    k_max: Option<usize>,
) -> Result<BoundsReport> {
    if let Some(index) = first_admissibility_violation(profile) {
        return Err(Error::Admissibility { index });
    }
    let d = profile.dimension();
    let top = k_max.unwrap_or(d).min(d);
    if top < 2 {
        return Err(Error::InvalidParameter(format!(
            "k-max must be at least 2, got {top}"
        )));
    }
    let solution = solve_recursion(&ContractionFactors::from_profile(profile)?);
    let rows = (2..=top)
        .map(|k| {
            let our_bound = solution.our_bound_at(k)?;
            let al_bound = solution.al_bound_at(k)?;
            Ok(BoundsRow {
                k,
                v: solution.v()[k - 2],
                our_bound,
                al_bound,
                gap: our_bound - al_bound,
            })
        })
        .collect::<Result<_>>()?;
    Ok(BoundsReport {
        schema: REPORT_SCHEMA,
        profile: profile.values().to_vec(),
        rows,
    })
}

fn face_label(face: &Face) -> String {
    if face.elements().is_empty() {
        "()".to_string()
    } else {
        face.elements().iter().join("-")
    }
}

/// CSV dump of one operator: header row of target-face labels, one row per
/// source face, entries in full precision.
pub fn operator_csv(op: &WalkOperator, sources: &[Face], targets: &[Face]) -> String {
    let mut out = String::from("face");
    for t in targets {
        out.push(',');
        out.push_str(&face_label(t));
    }
    out.push('\n');
    for (i, s) in sources.iter().enumerate() {
        out.push_str(&face_label(s));
        for j in 0..op.ncols() {
            let _ = write!(out, ",{:.17e}", op.matrix()[(i, j)]);
        }
        out.push('\n');
    }
    out
}

/// Writes every one-step and composed walk operator as CSV under `dir` and
/// returns the created paths.
pub fn export_operator_csvs(complex: &PureSimplicialComplex, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let d = complex.dimension();
    let faces = |k: usize| complex.level(k).faces();
    let mut paths = Vec::new();
    let mut dump = |name: String, op: &WalkOperator| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(
            &path,
            operator_csv(op, faces(op.source_level()), faces(op.target_level())),
        )?;
        paths.push(path);
        Ok(())
    };
    for k in 0..d {
        dump(format!("up_{k}.csv"), &up_step(complex, k)?)?;
        dump(format!("rw_up_{k}.csv"), &up_down_walk(complex, k)?)?;
    }
    for k in 1..=d {
        dump(format!("down_{k}.csv"), &down_step(complex, k)?)?;
        dump(format!("rw_down_{k}.csv"), &down_up_walk(complex, k)?)?;
    }
    Ok(paths)
}
