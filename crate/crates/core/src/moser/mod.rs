//! The one-dimensional Moser problem
//!
//! ```text
//! maximise  F(phi) = int_0^inf exp(beta phi^{q'} - t) dt
//! over      phi(0) = 0,  phi' >= 0,  G(phi) = int_0^inf (phi')^q dt <= 1
//! ```
//!
//! discretised on a graded grid over `[0, T]` with piecewise-linear `phi`, constant
//! beyond `T`. The decision variables are the cell slopes.

mod extremal;
mod optimize;

use serde::{Deserialize, Serialize};

pub use extremal::{build_extremal, Extremal};
pub use optimize::{optimize, supremum_estimate, Init, SupremumEstimate};

use crate::quadrature::cell_rule;
use crate::reduction::{exponential_integral, graded_grid, tail_bound, OneDProfile, TRUNCATION_FACTOR};
use crate::{Error, Result};

/// Minimum number of grid cells.
pub const MIN_CELLS: usize = 16;

/// Number of breakpoints in the Moser-family scan.
pub const SCAN_POINTS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSettings {
    /// First trial step of the line search.
    pub initial_step: f64,
    pub max_iterations: usize,
    /// Allowed `|G - 1|` of every iterate.
    pub constraint_tolerance: f64,
    /// Stop once the value grows by less than `stall_tolerance` (relative) over this many steps.
    pub stall_window: usize,
    pub stall_tolerance: f64,
    /// Allowed value change between truncation `T` and `2T` when `beta = 1`.
    pub truncation_tolerance: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            initial_step: 1.0,
            max_iterations: 100_000,
            constraint_tolerance: 1e-6,
            stall_window: 50,
            stall_tolerance: 1e-9,
            truncation_tolerance: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoserProblem {
    q: f64,
    beta: f64,
    truncation: f64,
    cells: usize,
    pub settings: OptimizerSettings,
}

impl MoserProblem {
    /// `truncation = None` uses `T = 40 q`.
    pub fn new(q: f64, beta: f64, truncation: Option<f64>, cells: usize) -> Result<Self> {
        if !(q > 1.0 && q.is_finite()) {
            return Err(Error::ExponentNotAboveOne(q));
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::BetaOutOfRange(beta));
        }
        let truncation = truncation.unwrap_or(TRUNCATION_FACTOR * q);
        if !(truncation > 0.0 && truncation.is_finite()) {
            return Err(Error::NonPositiveTruncation(truncation));
        }
        if cells < MIN_CELLS {
            return Err(Error::TooFewCells(cells));
        }
        Ok(Self {
            q,
            beta,
            truncation,
            cells,
            settings: OptimizerSettings::default(),
        })
    }

    pub fn with_settings(mut self, settings: OptimizerSettings) -> Self {
        self.settings = settings;
        self
    }

    /// Same problem on `cells` cells.
    pub fn with_cells(&self, cells: usize) -> Result<Self> {
        Ok(Self::new(self.q, self.beta, Some(self.truncation), cells)?.with_settings(self.settings))
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `q' = q / (q - 1)`.
    pub fn conjugate(&self) -> f64 {
        self.q / (self.q - 1.0)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn grid(&self) -> Vec<f64> {
        graded_grid(self.truncation, self.cells).expect("validated problem")
    }
}

/// `F(phi)` including the tail of the constant continuation past `T`.
pub fn functional_f(phi: &OneDProfile, problem: &MoserProblem) -> f64 {
    let (head, tail) = exponential_integral(phi, problem.beta, problem.conjugate());
    head + tail
}

/// `G(phi) = sum slope^q dt`.
pub fn constraint_g(phi: &OneDProfile, problem: &MoserProblem) -> f64 {
    phi.dirichlet_energy(problem.q)
}

/// Inserts `tau` as a node unless it already is one.
fn with_breakpoint(times: &[f64], tau: f64) -> Vec<f64> {
    let k = times.partition_point(|&t| t < tau);
    let mut out = times.to_vec();
    if times.get(k) != Some(&tau) {
        out.insert(k, tau);
    }
    out
}

/// `phi_tau(t) = t tau^{-1/q}` up to `tau`, then constant; `G(phi_tau) = 1`.
///
/// The profile lives on the problem grid with `tau` added as a node.
pub fn moser_family(tau: f64, problem: &MoserProblem) -> Result<OneDProfile> {
    if !(tau > 0.0 && tau < problem.truncation) {
        return Err(Error::BreakpointOutOfRange {
            tau,
            truncation: problem.truncation,
        });
    }
    let times = with_breakpoint(&problem.grid(), tau);
    let slope = tau.powf(-1.0 / problem.q);
    let slopes: Vec<f64> = times
        .windows(2)
        .map(|w| if w[1] <= tau { slope } else { 0.0 })
        .collect();
    OneDProfile::from_slopes(times, &slopes)
}

/// Best member of the Moser family over the scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub tau: f64,
    pub value: f64,
}

/// `F(phi_tau)` at `SCAN_POINTS` logarithmically spaced `tau` in `[0.01 T, 0.9 T]`.
pub fn tau_scan(problem: &MoserProblem) -> Result<Vec<Baseline>> {
    let (lo, hi) = (0.01 * problem.truncation, 0.9 * problem.truncation);
    (0..SCAN_POINTS)
        .map(|k| {
            let tau = lo * (hi / lo).powf(k as f64 / (SCAN_POINTS - 1) as f64);
            let phi = moser_family(tau, problem)?;
            Ok(Baseline {
                tau,
                value: functional_f(&phi, problem),
            })
        })
        .collect()
}

pub fn best_of_scan(scan: &[Baseline]) -> Baseline {
    *scan
        .iter()
        .max_by(|a, b| a.value.total_cmp(&b.value))
        .expect("scan is nonempty")
}

/// Value and slope-gradient of `F` for slopes on `times`.
pub(crate) fn value_and_gradient(times: &[f64], slopes: &[f64], beta: f64, conjugate: f64) -> (f64, Vec<f64>) {
    let rule = cell_rule();
    let n = slopes.len();
    let mut value = 0.0;
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    let mut phi0 = 0.0;
    for i in 0..n {
        let (t0, t1) = (times[i], times[i + 1]);
        for (t, w) in rule.mapped(t0, t1) {
            let phi: f64 = phi0 + slopes[i] * (t - t0);
            let e = (beta * phi.powf(conjugate) - t).exp();
            let g = e * beta * conjugate * phi.powf(conjugate - 1.0);
            value += w * e;
            a[i] += w * g;
            b[i] += w * g * (t - t0);
        }
        phi0 += slopes[i] * (t1 - t0);
    }
    let t_end = times[n];
    let tail = (beta * phi0.powf(conjugate) - t_end).exp();
    value += tail;
    let mut downstream = tail * beta * conjugate * phi0.powf(conjugate - 1.0);
    let mut grad = vec![0.0; n];
    for j in (0..n).rev() {
        grad[j] = (times[j + 1] - times[j]) * downstream + b[j];
        downstream += a[j];
    }
    (value, grad)
}

/// Result of the constrained maximisation.
#[derive(Debug, Clone, Serialize)]
pub struct MoserReport {
    pub q: f64,
    pub conjugate: f64,
    pub beta: f64,
    pub truncation: f64,
    pub cells: usize,
    /// `F*`.
    pub value: f64,
    /// `G` of the returned profile.
    pub constraint: f64,
    pub constraint_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `(N, F)` for the grid sizes that were solved.
    pub history: Vec<(usize, f64)>,
    pub baseline: Baseline,
    /// Contribution of `(T, inf)` to `value`.
    pub tail: f64,
    pub tail_bound: Option<f64>,
    /// Value after re-solving on `[0, 2T]`; `beta = 1` only.
    pub doubled_truncation_value: Option<f64>,
    /// `max_i (phi(t_i) - t_i^{1/q'} G^{1/q})`; nonpositive for feasible profiles.
    pub holder_margin: f64,
    #[serde(skip)]
    pub profile: OneDProfile,
    /// Accepted values, one per iteration, starting with `F(init)`.
    #[serde(skip)]
    pub trace: Vec<f64>,
}

impl MoserReport {
    pub fn profile(&self) -> &OneDProfile {
        &self.profile
    }
}

pub(crate) fn holder_margin(phi: &OneDProfile, q: f64) -> f64 {
    let g = phi.dirichlet_energy(q).powf(1.0 / q);
    let exponent = 1.0 - 1.0 / q;
    phi.rows()
        .map(|(t, v)| v - t.powf(exponent) * g)
        .fold(f64::NEG_INFINITY, f64::max)
}

pub(crate) fn tail_of(phi: &OneDProfile, problem: &MoserProblem) -> (f64, Option<f64>) {
    let last = *phi.values().last().unwrap();
    (
        (problem.beta * last.powf(problem.conjugate()) - phi.truncation()).exp(),
        tail_bound(problem.beta, phi.truncation()),
    )
}
