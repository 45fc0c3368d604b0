//! JSON-ready run reports.

use serde::{Deserialize, Serialize};

use crate::bounded::{Mode, StrictConstants, RELAXED_DELTA_LIMIT};
use crate::general::{GeneralConstants, GeneralRun, RunConfig, RunStop, Schedule, StepReport};
use crate::graph::WeightedGraph;
use crate::leverage::LeverageProfile;
use crate::linalg::{ApproxCertificate, Convention, CERTIFICATION_TOL, RANGE_RTOL};
use crate::partition::Partitioner;

pub const RUN_REPORT_SCHEMA: &str = "kssparse.run-report/v1";
pub const CERTIFICATE_SCHEMA: &str = "kssparse.certificate/v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    Infeasible,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputSummary {
    pub n: usize,
    pub m: usize,
    pub components: usize,
    pub max_leverage: f64,
}

impl InputSummary {
    pub fn new(g: &WeightedGraph, profile: &LeverageProfile) -> Self {
        InputSummary {
            n: g.n(),
            m: g.m(),
            components: profile.components,
            max_leverage: profile.max,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsBlock {
    pub c: f64,
    pub c_prime: f64,
    pub beta: f64,
    pub beta_exponent: f64,
    pub small_leverage: f64,
    pub relaxed_delta_limit: f64,
    pub range_rtol: f64,
    pub certification_tol: f64,
}

impl Default for ConstantsBlock {
    fn default() -> Self {
        let k = GeneralConstants::default();
        ConstantsBlock {
            c: k.c,
            c_prime: k.c_prime,
            beta: k.beta,
            beta_exponent: k.beta_exponent,
            small_leverage: StrictConstants::default().small_leverage,
            relaxed_delta_limit: RELAXED_DELTA_LIMIT,
            range_rtol: RANGE_RTOL,
            certification_tol: CERTIFICATION_TOL,
        }
    }
}

/// A certificate without witness vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateSummary {
    pub lower: f64,
    pub upper: f64,
    /// `max(b - 1, 1 - a)`.
    pub epsilon: f64,
    /// `max(ln b, -ln a)`; absent when `a <= 0`.
    pub epsilon_exp: Option<f64>,
    pub kernel_match: bool,
    pub rank_g: usize,
    pub rank_h: usize,
}

impl From<&ApproxCertificate> for CertificateSummary {
    fn from(c: &ApproxCertificate) -> Self {
        let e = c.epsilon_exp();
        CertificateSummary {
            lower: c.lower,
            upper: c.upper,
            epsilon: c.epsilon(),
            epsilon_exp: e.is_finite().then_some(e),
            kernel_match: c.kernel_match,
            rank_g: c.rank_g,
            rank_h: c.rank_h,
        }
    }
}

/// Output of `verify`: whether `H` is an ε-approximation of `G`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema: String,
    pub epsilon: f64,
    pub convention: Convention,
    pub verified: bool,
    #[serde(flatten)]
    pub certificate: CertificateSummary,
}

impl VerifyReport {
    pub fn new(cert: &ApproxCertificate, eps: f64, convention: Convention) -> Self {
        VerifyReport {
            schema: CERTIFICATE_SCHEMA.into(),
            epsilon: eps,
            convention,
            verified: cert.certifies(eps, convention),
            certificate: cert.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Composition {
    pub lower: f64,
    pub upper: f64,
    /// End-to-end factors lie within the per-step products.
    pub sound: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub status: RunStatus,
    /// Why the run stopped early, for infeasible runs.
    pub diagnostic: Option<String>,
    pub mode: Mode,
    pub epsilon: f64,
    pub delta_t: Option<f64>,
    pub target_size: Option<usize>,
    pub partitioner: Partitioner,
    pub seed: Option<u64>,
    pub input: InputSummary,
    pub constants: ConstantsBlock,
    pub schedule: Option<Schedule>,
    pub steps: Vec<StepReport>,
    pub stop: Option<RunStop>,
    pub edge_counts: Vec<usize>,
    pub output_edges: Option<usize>,
    pub certificate: Option<CertificateSummary>,
    pub composition: Option<Composition>,
    pub factor_sum: Option<f64>,
    pub notes: Vec<String>,
    /// Only filled when explicitly requested; keeps reports reproducible.
    pub wall_time_ms: Option<u64>,
}

impl RunReport {
    fn base(input: InputSummary, cfg: &RunConfig) -> Self {
        RunReport {
            schema: RUN_REPORT_SCHEMA.into(),
            status: RunStatus::Completed,
            diagnostic: None,
            mode: cfg.mode,
            epsilon: cfg.epsilon,
            delta_t: cfg.delta_t,
            target_size: cfg.target_size,
            partitioner: cfg.partitioner,
            seed: cfg.partitioner.seed(),
            input,
            constants: ConstantsBlock::default(),
            schedule: None,
            steps: Vec::new(),
            stop: None,
            edge_counts: Vec::new(),
            output_edges: None,
            certificate: None,
            composition: None,
            factor_sum: None,
            notes: Vec::new(),
            wall_time_ms: None,
        }
    }

    pub fn completed(
        input: InputSummary,
        cfg: &RunConfig,
        run: GeneralRun,
        output_edges: usize,
    ) -> Self {
        let mut r = Self::base(input, cfg);
        r.delta_t = Some(run.schedule.delta_t);
        r.target_size = run.target_size;
        r.certificate = Some((&run.certificate).into());
        r.composition = Some(Composition {
            lower: run.composed_lower,
            upper: run.composed_upper,
            sound: run.composition_ok,
        });
        r.factor_sum = Some(run.factor_sum);
        r.stop = Some(run.stop);
        r.edge_counts = run.edge_counts;
        r.output_edges = Some(output_edges);
        r.steps = run.steps;
        r.notes = run.notes;
        r.schedule = Some(run.schedule);
        r
    }

    pub fn infeasible(
        input: InputSummary,
        cfg: &RunConfig,
        schedule: Option<Schedule>,
        diagnostic: String,
    ) -> Self {
        let mut r = Self::base(input, cfg);
        r.status = RunStatus::Infeasible;
        r.diagnostic = Some(diagnostic);
        r.delta_t = schedule.as_ref().map(|s| s.delta_t).or(cfg.delta_t);
        r.schedule = schedule;
        r
    }

    /// Measured ε of the final certificate.
    pub fn measured_epsilon(&self) -> Option<f64> {
        self.certificate.as_ref().map(|c| c.epsilon)
    }
}
