//! One-dimensional reduction of radial profiles.
//!
//! A radial profile `U` on `[0, R]` maps to `phi(t) = c^{1/D'} U(R e^{-t/D})` on
//! `[0, inf)`, with `c = D P_w^{1/(D-1)}` the Moser constant of the weight
//! ([`GeometricConstants::moser_constant`]). Under this map
//!
//! ```text
//! int_{B_R ∩ Σ} |grad u|^D dmu              = int_0^inf (phi')^D dt
//! (1/mu(B_R ∩ Σ)) int exp(a u^{D'}) dmu     = int_0^inf exp(beta phi^{D'} - t) dt,   beta = a / c
//! ```
//!
//! Profiles are stored on a truncated graded grid `0 = t_0 < ... < t_N = T` and
//! continued by the constant `phi(T)` beyond `T`, which makes the exponential
//! tail `exp(beta phi(T)^{D'} - T)` exact for stored profiles.

use serde::{Deserialize, Serialize};

use crate::parallel::chunked_sum;
use crate::quadrature::cell_rule;
use crate::rearrange::RadialProfile;
use crate::weights::GeometricConstants;
use crate::{Error, Result};

/// Default truncation is this multiple of `D` (or of `q`).
pub const TRUNCATION_FACTOR: f64 = 40.0;

/// Ratio between a uniform cell and the first (and last) cell of the graded grid.
const GRADING: f64 = 8.0;

/// Widths of `cells` cells covering `length`, growing geometrically from `first`.
fn geometric_widths(length: f64, cells: usize, first: f64) -> Vec<f64> {
    if cells == 1 {
        return vec![length];
    }
    let total = |rho: f64| first * (rho.powi(cells as i32) - 1.0) / (rho - 1.0);
    let (mut lo, mut hi) = (1.0 + 1e-12, 2.0);
    while total(hi) < length {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid) < length {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let rho = 0.5 * (lo + hi);
    let mut widths: Vec<f64> = (0..cells).map(|k| first * rho.powi(k as i32)).collect();
    let scale = length / widths.iter().sum::<f64>();
    widths.iter_mut().for_each(|w| *w *= scale);
    widths
}

/// Fraction of `[0, T]` covered by the left part of the graded grid.
const SPLIT: f64 = 0.25;

/// Share of the cells placed in the left part.
const LEFT_SHARE: f64 = 0.75;

/// Grid on `[0, T]` with `cells` cells, refined geometrically towards both ends.
///
/// Three quarters of the cells cover `[0, T/4]`, growing from `T / (8N)` at `t = 0`;
/// the rest cover `[T/4, T]` and shrink back to `T / (8N)` at `t = T`.
pub fn graded_grid(truncation: f64, cells: usize) -> Result<Vec<f64>> {
    if !(truncation > 0.0 && truncation.is_finite()) {
        return Err(Error::NonPositiveTruncation(truncation));
    }
    if cells < 2 {
        return Err(Error::InvalidProfile("grid needs at least two cells".into()));
    }
    let first = truncation / (GRADING * cells as f64);
    let left_cells = ((cells as f64 * LEFT_SHARE).round() as usize).clamp(1, cells - 1);
    let right_cells = cells - left_cells;
    let left = geometric_widths(SPLIT * truncation, left_cells, first);
    let mut right = geometric_widths((1.0 - SPLIT) * truncation, right_cells, first);
    right.reverse();
    let mut times = Vec::with_capacity(cells + 1);
    let mut t = 0.0;
    times.push(t);
    for w in left.iter().chain(&right) {
        t += w;
        times.push(t);
    }
    times[cells] = truncation;
    Ok(times)
}

/// A nondecreasing piecewise-linear profile with `phi(0) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneDProfile {
    times: Vec<f64>,
    values: Vec<f64>,
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.len() < 2 || times[0] != 0.0 {
        return Err(Error::InvalidProfile("grid must start at t = 0 and have a cell".into()));
    }
    if !times.windows(2).all(|w| w[1] > w[0]) || !times.iter().all(|t| t.is_finite()) {
        return Err(Error::InvalidProfile("times must be strictly increasing".into()));
    }
    Ok(())
}

impl OneDProfile {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_times(&times)?;
        if values.len() != times.len() {
            return Err(Error::InvalidProfile("one value per node required".into()));
        }
        if values[0] != 0.0 {
            return Err(Error::InvalidProfile("phi(0) must be 0".into()));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidProfile("values must be finite".into()));
        }
        if let Some(i) = values.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::InvalidProfile(format!(
                "phi decreases after t = {}",
                times[i]
            )));
        }
        Ok(Self { times, values })
    }

    /// Builds the profile from nonnegative cell slopes.
    pub fn from_slopes(times: Vec<f64>, slopes: &[f64]) -> Result<Self> {
        check_times(&times)?;
        if slopes.len() + 1 != times.len() {
            return Err(Error::InvalidProfile("one slope per cell required".into()));
        }
        if slopes.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return Err(Error::InvalidProfile("slopes must be finite and nonnegative".into()));
        }
        let mut values = Vec::with_capacity(times.len());
        let mut acc = 0.0;
        values.push(acc);
        for (s, w) in slopes.iter().zip(times.windows(2)) {
            acc += s * (w[1] - w[0]);
            values.push(acc);
        }
        Self::new(times, values)
    }

    pub fn zero(times: Vec<f64>) -> Result<Self> {
        let n = times.len();
        Self::new(times, vec![0.0; n])
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cells(&self) -> usize {
        self.times.len() - 1
    }

    pub fn truncation(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.times.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn slopes(&self) -> Vec<f64> {
        self.times
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(t, v)| (v[1] - v[0]) / (t[1] - t[0]))
            .collect()
    }

    /// Linear interpolation, constant beyond `T`.
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= self.truncation() {
            return *self.values.last().unwrap();
        }
        let k = self.times.partition_point(|&x| x <= t);
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let (v0, v1) = (self.values[k - 1], self.values[k]);
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    /// `int_0^T (phi')^q dt`, exact for piecewise-linear profiles.
    pub fn dirichlet_energy(&self, q: f64) -> f64 {
        self.slopes()
            .iter()
            .zip(self.widths())
            .map(|(s, w)| s.powf(q) * w)
            .sum()
    }

    pub fn rows(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }
}

/// `int_0^T exp(beta phi^{q'} - t) dt` and the exact tail beyond `T` of the
/// constant continuation.
pub fn exponential_integral(phi: &OneDProfile, beta: f64, conjugate: f64) -> (f64, f64) {
    let rule = cell_rule();
    let times = phi.times();
    let values = phi.values();
    let head = chunked_sum(phi.cells(), |i| {
        let (t0, t1) = (times[i], times[i + 1]);
        let (v0, v1) = (values[i], values[i + 1]);
        rule.integrate(t0, t1, |t| {
            let v = v0 + (v1 - v0) * (t - t0) / (t1 - t0);
            (beta * v.powf(conjugate) - t).exp()
        })
    });
    let last = *values.last().unwrap();
    let tail = (beta * last.powf(conjugate) - phi.truncation()).exp();
    (head, tail)
}

/// `e^{(beta - 1) T} / (1 - beta)`: bound on the tail of any profile with unit
/// energy, from `phi(t)^{q'} <= t`. `None` in the critical case `beta = 1`.
pub fn tail_bound(beta: f64, truncation: f64) -> Option<f64> {
    (beta < 1.0).then(|| ((beta - 1.0) * truncation).exp() / (1.0 - beta))
}

/// `phi(t_i) = c^{1/D'} U(R e^{-t_i / D})` on the given grid.
pub fn profile_to_phi(profile: &RadialProfile, consts: &GeometricConstants, times: &[f64]) -> Result<OneDProfile> {
    check_times(times)?;
    let scale = consts.profile_scale();
    let radius = profile.support_radius();
    let d = consts.dimension;
    let mut running = 0.0f64;
    let values = times
        .iter()
        .map(|&t| {
            let v = if t == 0.0 {
                0.0
            } else {
                scale * profile.eval(radius * (-t / d).exp())
            };
            running = running.max(v);
            running
        })
        .collect();
    OneDProfile::new(times.to_vec(), values)
}

/// Inverse of [`profile_to_phi`]: `U(r) = c^{-1/D'} phi(D log(R / r))`.
///
/// The radial grid is the image `r_i = R e^{-t_i/D}` of the profile's grid plus
/// `r = 0`, where `U` takes the constant continuation `phi(T)`.
pub fn phi_to_profile(phi: &OneDProfile, consts: &GeometricConstants, radius: f64) -> Result<RadialProfile> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::NonPositiveRadius(radius));
    }
    let scale = consts.profile_scale();
    let d = consts.dimension;
    let n = phi.times().len();
    let mut radii = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity(n + 1);
    radii.push(0.0);
    values.push(phi.values()[n - 1] / scale);
    for i in (0..n).rev() {
        radii.push(if i == 0 {
            radius
        } else {
            radius * (-phi.times()[i] / d).exp()
        });
        values.push(phi.values()[i] / scale);
    }
    RadialProfile::new(radii, values)
}

fn check_pair(profile: &RadialProfile, phi: &OneDProfile, consts: &GeometricConstants) -> Result<()> {
    let scale = consts.profile_scale();
    let radius = profile.support_radius();
    let tol = 1e-9 * (1.0 + scale * profile.max_value());
    for (i, (t, v)) in phi.rows().enumerate() {
        let expected = if t == 0.0 {
            0.0
        } else {
            scale * profile.eval(radius * (-t / consts.dimension).exp())
        };
        let deviation = (expected - v).abs();
        if deviation > tol {
            return Err(Error::MismatchedProfiles { node: i, deviation });
        }
    }
    Ok(())
}

fn relative_residual(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Both sides of the two identities for a profile pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    /// `P_w int_0^R |U'|^D r^{D-1} dr`.
    pub energy_nd: f64,
    /// `int_0^T (phi')^D dt`.
    pub energy_1d: f64,
    pub energy_residual: f64,
    /// `(1/mu(B_R ∩ Σ)) int_{B_R ∩ Σ} exp(a U^{D'}) dmu`.
    pub exp_nd: f64,
    /// `int_0^inf exp(beta phi^{D'} - t) dt` with constant continuation past `T`.
    pub exp_1d: f64,
    pub exp_residual: f64,
    pub a: f64,
    pub beta: f64,
    pub truncation: f64,
    /// Contribution of `(T, inf)` to `exp_1d`.
    pub tail: f64,
    /// Bound on that contribution for unit-energy profiles; absent when `beta = 1`.
    pub tail_bound: Option<f64>,
}

/// `(energy_nd, energy_1d)` for `phi = profile_to_phi(U)`.
pub fn energy_identity(profile: &RadialProfile, phi: &OneDProfile, consts: &GeometricConstants) -> Result<(f64, f64)> {
    check_pair(profile, phi, consts)?;
    Ok((
        profile.gradient_energy(consts, consts.dimension),
        phi.dirichlet_energy(consts.dimension),
    ))
}

/// `(exp_nd, exp_1d, tail)` for coefficient `a` in `(0, c]`.
pub fn exponential_identity(
    profile: &RadialProfile,
    phi: &OneDProfile,
    consts: &GeometricConstants,
    a: f64,
) -> Result<(f64, f64, f64)> {
    if !(a > 0.0 && a <= consts.moser_constant) {
        return Err(Error::CoefficientOutOfRange {
            a,
            max: consts.moser_constant,
        });
    }
    check_pair(profile, phi, consts)?;
    let beta = (a / consts.moser_constant).min(1.0);
    let dp = consts.conjugate();
    let d = consts.dimension;
    let radius = profile.support_radius();
    let rule = cell_rule();
    let radii = profile.radii();
    let values = profile.values();
    let integral = chunked_sum(radii.len() - 1, |i| {
        let (r0, r1) = (radii[i], radii[i + 1]);
        let (u0, u1) = (values[i], values[i + 1]);
        rule.integrate(r0, r1, |r| {
            let u = u0 + (u1 - u0) * (r - r0) / (r1 - r0);
            (a * u.powf(dp)).exp() * r.powf(d - 1.0)
        })
    });
    let exp_nd = consts.p_w * integral / (consts.c_d * radius.powf(d));
    let (head, tail) = exponential_integral(phi, beta, dp);
    Ok((exp_nd, head + tail, tail))
}

/// `times` merged with the images `D log(R / r_k)` of the interior radial nodes of `U`
/// that fall inside `(0, T)`.
///
/// `U` is linear between its nodes, so `phi` is smooth between the merged nodes and
/// its piecewise-linear interpolant converges at second order.
pub fn aligned_grid(profile: &RadialProfile, consts: &GeometricConstants, times: &[f64]) -> Result<Vec<f64>> {
    check_times(times)?;
    let t_end = *times.last().unwrap();
    let radius = profile.support_radius();
    let mut out: Vec<f64> = profile
        .radii()
        .iter()
        .filter(|&&r| r > 0.0 && r < radius)
        .map(|&r| consts.dimension * (radius / r).ln())
        .filter(|&t| t > 0.0 && t < t_end)
        .chain(times.iter().copied())
        .collect();
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * t_end);
    out[0] = 0.0;
    *out.last_mut().unwrap() = t_end;
    Ok(out)
}

/// Maps `U` to `phi` on `times` merged with the kinks of `U` (see [`aligned_grid`])
/// and evaluates both identities with coefficient `a`.
pub fn reduce(
    profile: &RadialProfile,
    consts: &GeometricConstants,
    times: &[f64],
    a: f64,
) -> Result<(OneDProfile, ReductionReport)> {
    if !(a > 0.0 && a <= consts.moser_constant) {
        return Err(Error::CoefficientOutOfRange {
            a,
            max: consts.moser_constant,
        });
    }
    let phi = profile_to_phi(profile, consts, &aligned_grid(profile, consts, times)?)?;
    let (energy_nd, energy_1d) = energy_identity(profile, &phi, consts)?;
    let (exp_nd, exp_1d, tail) = exponential_identity(profile, &phi, consts, a)?;
    let beta = (a / consts.moser_constant).min(1.0);
    let report = ReductionReport {
        energy_nd,
        energy_1d,
        energy_residual: relative_residual(energy_nd, energy_1d),
        exp_nd,
        exp_1d,
        exp_residual: relative_residual(exp_nd, exp_1d),
        a,
        beta,
        truncation: phi.truncation(),
        tail,
        tail_bound: tail_bound(beta, phi.truncation()),
    };
    Ok((phi, report))
}
