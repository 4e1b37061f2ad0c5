//! Monomial weights on orthant-type cones and their geometric constants.
//!
//! A cone is `Σ = {x in R^d : x_j > 0 for j in J}`: a positive orthant in the
//! active coordinates `J` times full lines in the others. The weight
//! `w(x) = prod_{j in J} x_j^{A_j}` is `alpha`-homogeneous with
//! `alpha = sum A_j`, and the weighted measure `dmu = w dx` scales like
//! `mu(B_r ∩ Σ) = C_D r^D` with `D = d + alpha`.
//!
//! Coordinate indices are 0-based in the Rust API and 1-based in the JSON form
//! (`{"d": 2, "active": [1], "exponents": [1.0]}` is the weight `x_1` in the plane).

use std::f64::consts::PI;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::parallel::{chunked_sum, map_collect};
use crate::quadrature::{halton, Estimate, LegendreRule, MAX_HALTON_DIM};
use crate::{Error, Result};

/// Smallest node count accepted by the quadrature routines.
pub const MIN_BUDGET: usize = 10_000;

/// Seed used when the caller does not provide one.
pub const DEFAULT_SEED: u64 = 0x5eed_2024;

const QMC_REPLICAS: usize = 8;

/// An orthant-type convex cone with vertex at the origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeSpec {
    dim: usize,
    active: Vec<usize>,
}

impl ConeSpec {
    /// `active` holds 0-based coordinate indices; order does not matter.
    pub fn new(dim: usize, mut active: Vec<usize>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        if active.is_empty() || active.len() > dim {
            return Err(Error::EmptyCone);
        }
        active.sort_unstable();
        for w in active.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateActiveIndex(w[0]));
            }
        }
        if let Some(&index) = active.iter().find(|&&j| j >= dim) {
            return Err(Error::ActiveIndexOutOfRange { index, dim });
        }
        Ok(Self { dim, active })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Sorted 0-based active coordinates.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn is_active(&self, axis: usize) -> bool {
        self.active.binary_search(&axis).is_ok()
    }

    /// Membership in the open cone.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim && self.active.iter().all(|&j| x[j] > 0.0)
    }

    /// Membership in the closed cone.
    pub fn contains_closure(&self, x: &[f64]) -> bool {
        x.len() == self.dim && self.active.iter().all(|&j| x[j] >= 0.0)
    }
}

/// A monomial weight `prod_{j in J} x_j^{A_j}` with all `A_j > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightSpecJson", into = "WeightSpecJson")]
pub struct WeightSpec {
    cone: ConeSpec,
    exponents: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct WeightSpecJson {
    d: usize,
    active: Vec<usize>,
    exponents: Vec<f64>,
}

impl TryFrom<WeightSpecJson> for WeightSpec {
    type Error = Error;

    fn try_from(raw: WeightSpecJson) -> Result<Self> {
        if raw.active.contains(&0) {
            return Err(Error::ActiveIndexOutOfRange {
                index: 0,
                dim: raw.d,
            });
        }
        let active = raw.active.iter().map(|j| j - 1).collect();
        WeightSpec::new(raw.d, active, raw.exponents)
    }
}

impl From<WeightSpec> for WeightSpecJson {
    fn from(spec: WeightSpec) -> Self {
        Self {
            d: spec.cone.dim,
            active: spec.cone.active.iter().map(|j| j + 1).collect(),
            exponents: spec.exponents,
        }
    }
}

impl WeightSpec {
    /// Builds a weight from 0-based active indices and matching exponents.
    pub fn new(dim: usize, active: Vec<usize>, exponents: Vec<f64>) -> Result<Self> {
        if active.len() != exponents.len() {
            return Err(Error::ExponentCount {
                expected: active.len(),
                got: exponents.len(),
            });
        }
        if let Some(&a) = exponents.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::NonPositiveExponent(a));
        }
        let mut pairs: Vec<(usize, f64)> = active.into_iter().zip(exponents).collect();
        pairs.sort_by_key(|p| p.0);
        let cone = ConeSpec::new(dim, pairs.iter().map(|p| p.0).collect())?;
        Ok(Self {
            cone,
            exponents: pairs.into_iter().map(|p| p.1).collect(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn cone(&self) -> &ConeSpec {
        &self.cone
    }

    pub fn dim(&self) -> usize {
        self.cone.dim
    }

    /// Exponents aligned with [`ConeSpec::active`].
    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    /// The exponent attached to `axis`, zero for inactive coordinates.
    pub fn exponent_of(&self, axis: usize) -> f64 {
        match self.cone.active.binary_search(&axis) {
            Ok(k) => self.exponents[k],
            Err(_) => 0.0,
        }
    }

    /// Homogeneity degree `alpha = sum A_j`.
    pub fn alpha(&self) -> f64 {
        self.exponents.iter().sum()
    }

    /// Effective dimension `D = d + alpha`.
    pub fn effective_dim(&self) -> f64 {
        self.cone.dim as f64 + self.alpha()
    }

    /// Hölder conjugate `D' = D / (D - 1)`.
    pub fn conjugate_exponent(&self) -> f64 {
        let d = self.effective_dim();
        d / (d - 1.0)
    }

    /// Evaluates `w(x)`; the point must lie in the closed cone.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.cone.dim {
            return Err(Error::PointDimension {
                expected: self.cone.dim,
                got: x.len(),
            });
        }
        if let Some(&index) = self.cone.active.iter().find(|&&j| x[j] < 0.0) {
            return Err(Error::PointOutsideCone {
                index,
                value: x[index],
            });
        }
        Ok(self.monomial(x))
    }

    fn monomial(&self, x: &[f64]) -> f64 {
        self.cone
            .active
            .iter()
            .zip(&self.exponents)
            .map(|(&j, &a)| x[j].powf(a))
            .product()
    }

    /// `int_lo^hi x^{A} dx` along one axis (`hi - lo` for inactive axes).
    ///
    /// Active axes require `0 <= lo <= hi`.
    pub fn axis_integral(&self, axis: usize, lo: f64, hi: f64) -> f64 {
        let a = self.exponent_of(axis);
        if a == 0.0 {
            hi - lo
        } else {
            (hi.powf(a + 1.0) - lo.powf(a + 1.0)) / (a + 1.0)
        }
    }
}

/// An `alpha`-homogeneous weight on some convex cone.
///
/// Monomial weights implement this with closed-form constants available
/// elsewhere in this module; arbitrary implementations only get the Monte Carlo
/// estimate of [`unit_ball_measure_qmc`]. Concavity of `w^{1/alpha}` is the
/// implementor's responsibility and is not checked.
pub trait HomogeneousWeight: Sync {
    fn dim(&self) -> usize;
    fn homogeneity(&self) -> f64;
    fn in_cone(&self, x: &[f64]) -> bool;
    /// Weight at a point of the cone; callers check [`Self::in_cone`] first.
    fn value(&self, x: &[f64]) -> f64;
    /// A box containing `B_1 ∩ Σ`, used for sampling.
    fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        (vec![-1.0; self.dim()], vec![1.0; self.dim()])
    }
}

impl HomogeneousWeight for WeightSpec {
    fn dim(&self) -> usize {
        self.cone.dim
    }

    fn homogeneity(&self) -> f64 {
        self.alpha()
    }

    fn in_cone(&self, x: &[f64]) -> bool {
        self.cone.contains(x)
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.monomial(x)
    }

    fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let lo = (0..self.dim())
            .map(|j| if self.cone.is_active(j) { 0.0 } else { -1.0 })
            .collect();
        (lo, vec![1.0; self.dim()])
    }
}

/// `sum_i ln Gamma((A_i + 1) / 2)` over all coordinates (inactive ones have `A_i = 0`).
fn half_gamma_sum(spec: &WeightSpec) -> f64 {
    (0..spec.dim())
        .map(|i| ln_gamma(0.5 * (spec.exponent_of(i) + 1.0)))
        .sum()
}

/// `C_D = mu(B_1 ∩ Σ) = prod_i Gamma((A_i+1)/2) / (2^k Gamma(D/2 + 1))`, `k = |J|`.
///
/// Follows from integrating `prod |x_i|^{A_i} e^{-|x|^2}` over `R^d` in Cartesian and
/// polar coordinates and keeping the `2^{-k}` share of sign patterns lying in the cone.
pub fn unit_ball_measure_closed_form(spec: &WeightSpec) -> f64 {
    let k = spec.cone.active.len() as f64;
    let d = spec.effective_dim();
    (half_gamma_sum(spec) - k * std::f64::consts::LN_2 - ln_gamma(0.5 * d + 1.0)).exp()
}

/// `P_w = int_{S^{d-1} ∩ Σ} w dsigma = 2^{1-k} prod_i Gamma((A_i+1)/2) / Gamma(D/2)`.
pub fn perimeter(spec: &WeightSpec) -> f64 {
    let k = spec.cone.active.len() as f64;
    let d = spec.effective_dim();
    (half_gamma_sum(spec) + (1.0 - k) * std::f64::consts::LN_2 - ln_gamma(0.5 * d)).exp()
}

/// `mu(B_r ∩ Σ) = C_D r^D`.
pub fn ball_measure(consts: &GeometricConstants, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::NonPositiveRadius(r));
    }
    Ok(consts.c_d * r.powf(consts.dimension))
}

fn check_budget(budget: usize) -> Result<()> {
    if budget < MIN_BUDGET {
        return Err(Error::BudgetTooSmall {
            got: budget,
            min: MIN_BUDGET,
        });
    }
    Ok(())
}

/// Angular sectors (quadrants in 2D, octants in 3D) lying inside the cone,
/// each given by the sign of every coordinate.
fn sectors_in_cone(spec: &WeightSpec) -> Vec<Vec<f64>> {
    let d = spec.dim();
    (0..1usize << d)
        .map(|mask| {
            (0..d)
                .map(|j| if mask >> j & 1 == 1 { -1.0 } else { 1.0 })
                .collect::<Vec<f64>>()
        })
        .filter(|signs| spec.cone.active.iter().all(|&j| signs[j] > 0.0))
        .collect()
}

/// Integrates `r^radial_power * w(omega)` over `r in [0, 1]` (when `radial`) and the
/// part of the unit sphere inside the cone, with tensor Gauss–Legendre rules of
/// `n` nodes per axis on each sector. Only `d = 2, 3`.
fn spherical_rule(spec: &WeightSpec, n: usize, radial: bool) -> f64 {
    let rule = LegendreRule::new(n);
    let sectors = sectors_in_cone(spec);
    let radial_nodes: Vec<(f64, f64)> = if radial {
        rule.mapped(0.0, 1.0).collect()
    } else {
        vec![(1.0, 1.0)]
    };
    let jac = (spec.dim() - 1) as i32;
    let angular: Vec<(Vec<f64>, f64)> = match spec.dim() {
        2 => sectors
            .iter()
            .flat_map(|s| {
                // quadrant of (s0, s1): parametrise by the acute angle to the x_0 axis
                rule.mapped(0.0, 0.5 * PI)
                    .map(|(th, w)| (vec![s[0] * th.cos(), s[1] * th.sin()], w))
                    .collect::<Vec<_>>()
            })
            .collect(),
        3 => sectors
            .iter()
            .flat_map(|s| {
                let nodes: Vec<(f64, f64)> = rule.mapped(0.0, 0.5 * PI).collect();
                let mut out = Vec::with_capacity(nodes.len() * nodes.len());
                for &(th, wt) in &nodes {
                    for &(ph, wp) in &nodes {
                        let omega = vec![
                            s[0] * th.sin() * ph.cos(),
                            s[1] * th.sin() * ph.sin(),
                            s[2] * th.cos(),
                        ];
                        out.push((omega, wt * wp * th.sin()));
                    }
                }
                out
            })
            .collect(),
        _ => unreachable!("spherical rule is only used for d <= 3"),
    };
    chunked_sum(radial_nodes.len(), |i| {
        let (r, wr) = radial_nodes[i];
        let mut x = vec![0.0; spec.dim()];
        let mut acc = 0.0;
        for (omega, wa) in &angular {
            for (xj, oj) in x.iter_mut().zip(omega) {
                *xj = r * oj;
            }
            acc += wa * spec.monomial(&x);
        }
        wr * r.powi(jac) * acc
    })
}

fn nodes_per_axis(spec: &WeightSpec, budget: usize, radial: bool) -> usize {
    let sectors = sectors_in_cone(spec).len();
    let axes = if radial { spec.dim() } else { spec.dim() - 1 };
    let per_sector = budget as f64 / sectors as f64;
    (per_sector.powf(1.0 / axes as f64).floor() as usize).max(2)
}

/// Quadrature estimate of `C_D` used as an oracle for the closed form.
///
/// Tensor Gauss–Legendre in polar/spherical coordinates for `d <= 3`, randomized
/// quasi–Monte Carlo otherwise. The error indicator is the difference to the
/// half-resolution rule (or the replica standard error for QMC).
pub fn unit_ball_measure_quadrature(spec: &WeightSpec, budget: usize) -> Result<Estimate> {
    unit_ball_measure_quadrature_seeded(spec, budget, DEFAULT_SEED)
}

pub fn unit_ball_measure_quadrature_seeded(
    spec: &WeightSpec,
    budget: usize,
    seed: u64,
) -> Result<Estimate> {
    check_budget(budget)?;
    if spec.dim() <= 3 {
        let n = nodes_per_axis(spec, budget, true);
        let fine = spherical_rule(spec, n, true);
        let coarse = spherical_rule(spec, n / 2, true);
        Ok(Estimate {
            value: fine,
            error: (fine - coarse).abs(),
        })
    } else {
        unit_ball_measure_qmc(spec, budget, seed)
    }
}

/// Quadrature estimate of `P_w` on the unit sphere.
///
/// For `d > 3` this falls back to `D` times the QMC ball estimate.
pub fn perimeter_quadrature(spec: &WeightSpec, budget: usize, seed: u64) -> Result<Estimate> {
    check_budget(budget)?;
    if spec.dim() <= 3 {
        let n = nodes_per_axis(spec, budget, false);
        let fine = spherical_rule(spec, n, false);
        let coarse = spherical_rule(spec, n / 2, false);
        Ok(Estimate {
            value: fine,
            error: (fine - coarse).abs(),
        })
    } else {
        let ball = unit_ball_measure_qmc(spec, budget, seed)?;
        let d = spec.effective_dim();
        Ok(Estimate {
            value: d * ball.value,
            error: d * ball.error,
        })
    }
}

/// Randomly shifted Halton estimate of `mu(B_1 ∩ Σ)` for any homogeneous weight.
///
/// The budget is split over independent Cranley–Patterson shifts drawn from a
/// ChaCha stream seeded with `seed`; the error is their standard error.
pub fn unit_ball_measure_qmc<W: HomogeneousWeight + ?Sized>(
    weight: &W,
    budget: usize,
    seed: u64,
) -> Result<Estimate> {
    check_budget(budget)?;
    let dim = weight.dim();
    if dim > MAX_HALTON_DIM {
        return Err(Error::PointDimension {
            expected: MAX_HALTON_DIM,
            got: dim,
        });
    }
    let (lo, hi) = weight.bounding_box();
    let volume: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shifts: Vec<Vec<f64>> = (0..QMC_REPLICAS)
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect();
    let per_replica = budget / QMC_REPLICAS;
    let estimates = map_collect(QMC_REPLICAS, |k| {
        let shift = &shifts[k];
        let sum = chunked_sum(per_replica, |i| {
            let x: Vec<f64> = (0..dim)
                .map(|j| {
                    let u = (halton(i as u64 + 1, j) + shift[j]).fract();
                    lo[j] + (hi[j] - lo[j]) * u
                })
                .collect();
            let r2: f64 = x.iter().map(|v| v * v).sum();
            if r2 < 1.0 && weight.in_cone(&x) {
                weight.value(&x)
            } else {
                0.0
            }
        });
        volume * sum / per_replica as f64
    });
    let m = QMC_REPLICAS as f64;
    let mean = estimates.iter().sum::<f64>() / m;
    let var = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (m - 1.0);
    Ok(Estimate {
        value: mean,
        error: (var / m).sqrt(),
    })
}

/// The constants every downstream module consumes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricConstants {
    /// `mu(B_1 ∩ Σ)`.
    #[serde(rename = "C_D")]
    pub c_d: f64,
    /// Weighted surface measure of `S^{d-1} ∩ Σ`.
    #[serde(rename = "P_w")]
    pub p_w: f64,
    pub alpha: f64,
    /// Effective dimension `D = d + alpha`.
    #[serde(rename = "D")]
    pub dimension: f64,
    /// `|P_w - D C_D| / P_w`.
    pub residual: f64,
    /// `D P_w^{1/(D-1)}`, the largest admissible exponential coefficient.
    pub moser_constant: f64,
}

impl GeometricConstants {
    /// Closed-form constants for a monomial weight.
    pub fn from_spec(spec: &WeightSpec) -> Self {
        Self::assemble(spec, unit_ball_measure_closed_form(spec), perimeter(spec))
    }

    /// Closed-form `C_D` with `P_w` taken from sphere quadrature, so that the
    /// residual compares two independent computations.
    pub fn with_quadrature(spec: &WeightSpec, budget: usize, seed: u64) -> Result<Self> {
        let p_w = perimeter_quadrature(spec, budget, seed)?.value;
        Ok(Self::assemble(spec, unit_ball_measure_closed_form(spec), p_w))
    }

    fn assemble(spec: &WeightSpec, c_d: f64, p_w: f64) -> Self {
        let dimension = spec.effective_dim();
        Self {
            c_d,
            p_w,
            alpha: spec.alpha(),
            dimension,
            residual: (p_w - dimension * c_d).abs() / p_w,
            moser_constant: dimension * p_w.powf(1.0 / (dimension - 1.0)),
        }
    }

    /// `D' = D / (D - 1)`.
    pub fn conjugate(&self) -> f64 {
        self.dimension / (self.dimension - 1.0)
    }

    /// Scale factor `c^{1/D'}` between a radial profile and its reduced profile,
    /// with `c` the Moser constant.
    pub fn profile_scale(&self) -> f64 {
        self.moser_constant.powf(1.0 / self.conjugate())
    }
}
