//! Lifting a maximising profile to `u(x) = U(|x|)` on `B_R ∩ Σ`.

use serde::Serialize;

use super::MoserReport;
use crate::grid::GridFunction;
use crate::rearrange::{composition_integral, gradient_seminorm, sample_radial, RadialProfile};
use crate::reduction::{phi_to_profile, reduce, ReductionReport};
use crate::weights::{ball_measure, GeometricConstants, WeightSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct Extremal {
    /// `a = beta c`.
    pub coefficient: f64,
    pub radius: f64,
    pub nodes: usize,
    /// `||grad u||_{D,mu}` on the grid.
    pub gradient_norm: f64,
    /// `(1/mu(B_R ∩ Σ)) int exp(a u^{D'}) dmu` on the grid.
    pub exp_functional: f64,
    /// `F*` of the one-dimensional problem.
    pub value_1d: f64,
    /// Both identities for `U` and the report's profile.
    pub identities: ReductionReport,
    #[serde(skip)]
    pub profile: RadialProfile,
    #[serde(skip)]
    pub grid: GridFunction,
}

/// Maps the report's profile to `U`, samples `u = U(|x|)` with `nodes` per axis and
/// evaluates the constraint and the exponential functional in `d` dimensions.
pub fn build_extremal(
    report: &MoserReport,
    spec: &WeightSpec,
    consts: &GeometricConstants,
    radius: f64,
    nodes: usize,
) -> Result<Extremal> {
    if (report.q - consts.dimension).abs() > 1e-12 * consts.dimension {
        return Err(Error::ExponentMismatch {
            report_q: report.q,
            dimension: consts.dimension,
        });
    }
    let phi = report.profile();
    let profile = phi_to_profile(phi, consts, radius)?;
    let a = report.beta * consts.moser_constant;
    let (_, identities) = reduce(&profile, consts, phi.times(), a)?;
    let grid = sample_radial(&profile, spec, nodes)?;
    let gradient_norm = gradient_seminorm(&grid, spec, consts.dimension)?;
    let dp = consts.conjugate();
    let excess = composition_integral(&grid, spec, |s| (a * s.powf(dp)).exp_m1())?;
    let exp_functional = 1.0 + excess / ball_measure(consts, radius)?;
    Ok(Extremal {
        coefficient: a,
        radius,
        nodes,
        gradient_norm,
        exp_functional,
        value_1d: report.value,
        identities,
        profile,
        grid,
    })
}
