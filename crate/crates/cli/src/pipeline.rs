//! Relaxation solve followed by the independent physical analysis of the design.

use serde::{Deserialize, Serialize};
use trusspp_core::analysis::{
    active_count, eigenfrequencies, mass_utilization, peak_power, power_trace, solve_equilibrium, trace_gap,
    AnalysisError,
};
use trusspp_core::sdp::{build_penalized_relaxation, SdpError};
use trusspp_core::sensitivity::{kkt_residual, SensitivityError};
use trusspp_core::solver::{ConicBackend, SolveStatus};

use crate::problem::Case;

/// Areas at or below this fraction of the largest count as removed.
pub const PRUNE_THRESHOLD: f64 = 1e-6;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_BACKEND: i32 = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub name: String,
    pub eta: f64,
    pub status: SolveStatus,
    pub omega0: f64,
    pub n_harm: usize,
    /// θ from the relaxation.
    pub theta: f64,
    pub objective: f64,
    /// max_t |f(t)ᵀv(t)| of the returned design.
    pub peak_power: Option<f64>,
    pub trace_gap: Option<f64>,
    pub trace_x: f64,
    pub mass_utilization: f64,
    pub eigenfrequencies: Vec<f64>,
    pub kkt_residual: Option<f64>,
    pub mass_multiplier: Option<f64>,
    pub n_elements: usize,
    pub active_elements: usize,
    pub prune_threshold: f64,
    pub iterations: usize,
    pub solve_time: f64,
    /// Analysis failure of the design, if any.
    pub error: Option<String>,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            SolveStatus::Optimal | SolveStatus::NearOptimal if self.error.is_none() => EXIT_OK,
            SolveStatus::Optimal | SolveStatus::NearOptimal | SolveStatus::Infeasible => EXIT_INFEASIBLE,
            SolveStatus::Unbounded | SolveStatus::NumericalFailure => EXIT_BACKEND,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Report,
    pub design: Vec<f64>,
    /// One period of (t, p(t)) when the design carries the load.
    pub power: Option<Vec<(f64, f64)>>,
}

/// Options for what to compute after the solve.
#[derive(Clone, Copy, Debug)]
pub struct Analyses {
    pub kkt: bool,
    pub power_samples: usize,
    pub eigen_count: usize,
}

impl Default for Analyses {
    fn default() -> Self {
        Analyses { kkt: true, power_samples: 4096, eigen_count: 3 }
    }
}

pub fn run(case: &Case, eta: f64, backend: &dyn ConicBackend, what: Analyses) -> Result<Outcome, SdpError> {
    let relax = build_penalized_relaxation(&case.model, &case.load, case.mass, eta)?;
    let sol = relax.solve(backend);
    let a = sol.a.clone();
    let model = &case.model;
    let mut report = Report {
        name: case.name.clone(),
        eta,
        status: sol.status,
        omega0: case.load.omega0,
        n_harm: case.load.n_harm(),
        theta: sol.theta,
        objective: sol.objective,
        peak_power: None,
        trace_gap: None,
        trace_x: sol.x.trace().re,
        mass_utilization: mass_utilization(model, &a, case.mass),
        eigenfrequencies: Vec::new(),
        kkt_residual: None,
        mass_multiplier: None,
        n_elements: model.n_elements(),
        active_elements: active_count(&a, PRUNE_THRESHOLD),
        prune_threshold: PRUNE_THRESHOLD,
        iterations: sol.iterations,
        solve_time: sol.solve_time,
        error: None,
    };
    if !sol.status.is_usable() {
        return Ok(Outcome { report, design: a, power: None });
    }
    let mut power = None;
    let analysed: Result<(), AnalysisError> = (|| {
        report.trace_gap = Some(trace_gap(&sol.x, &a, &relax.f, model, case.load.omega0)?);
        report.eigenfrequencies = eigenfrequencies(model, &a, what.eigen_count)?;
        report.peak_power = Some(peak_power(model, &a, &case.load)?);
        if what.power_samples > 0 {
            let ss = solve_equilibrium(model, &a, &case.load)?;
            power = Some(power_trace(&case.load, &ss, what.power_samples));
        }
        Ok(())
    })();
    if let Err(e) = analysed {
        report.error = Some(e.to_string());
        return Ok(Outcome { report, design: a, power });
    }
    if what.kkt {
        match kkt_residual(model, &a, &case.load, case.mass, backend) {
            Ok(k) => {
                report.kkt_residual = Some(k.residual);
                report.mass_multiplier = Some(k.mass_multiplier);
            }
            Err(SensitivityError::Analysis(e)) => report.error = Some(e.to_string()),
            // a failed inner solve leaves the indicator unset but the design intact
            Err(e) => eprintln!("warning: KKT residual unavailable: {e}"),
        }
    }
    Ok(Outcome { report, design: a, power })
}
