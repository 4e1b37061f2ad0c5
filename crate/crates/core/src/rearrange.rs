//! Distribution functions and rearrangements with respect to `dmu = w dx`.
//!
//! Superlevel sets are measured by corner counting: a grid cell contributes the
//! fraction of its corners where `|f| > tau` times its weighted mass. Summed over
//! cells this is the same as giving every node its lumped mass (see
//! [`GridFunction::node_masses`]) and adding up the nodes above the threshold, which
//! is how it is computed here: sort nodes by value once, then read measures off a
//! cumulative sum.
//!
//! Samples are only read inside the cone closure (the grid box is required to lie
//! there), so values a caller might associate with points outside `Σ` never enter.

use serde::{Deserialize, Serialize};

use crate::grid::GridFunction;
use crate::parallel::{chunked_sum, sort_by};
use crate::quadrature::cell_rule;
use crate::weights::{unit_ball_measure_closed_form, GeometricConstants, WeightSpec};
use crate::{Error, Result};

/// Default number of thresholds for [`default_thresholds`].
pub const DEFAULT_THRESHOLDS: usize = 256;
/// Default number of points of a radial profile.
pub const DEFAULT_RADIAL_NODES: usize = 512;
/// Radial cells of [`radial_rearrangement`] per grid spacing of the input.
pub const RADIAL_NODES_PER_SPACING: f64 = 2.0;
/// Discretisation slack of the Pólya–Szegő comparison.
pub const POLYA_SZEGO_SLACK: f64 = 1e-2;

/// `mu{|f| > tau_i}` at increasing thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDistribution {
    thresholds: Vec<f64>,
    measures: Vec<f64>,
    /// `mu{|f| > 0}`.
    support_measure: f64,
}

impl StepDistribution {
    pub fn new(thresholds: Vec<f64>, measures: Vec<f64>, support_measure: f64) -> Result<Self> {
        if thresholds.is_empty() {
            return Err(Error::EmptyThresholds);
        }
        check_thresholds(&thresholds)?;
        if measures.len() != thresholds.len() {
            return Err(Error::InvalidThresholds);
        }
        let nonincreasing = measures.windows(2).all(|w| w[1] <= w[0]);
        let bounded = measures.iter().all(|&m| (0.0..=support_measure).contains(&m));
        if !nonincreasing || !bounded {
            return Err(Error::InvalidThresholds);
        }
        Ok(Self {
            thresholds,
            measures,
            support_measure,
        })
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    pub fn support_measure(&self) -> f64 {
        self.support_measure
    }

    /// The right-continuous step function `tau -> mu{|f| > tau}` for `tau > 0`.
    pub fn measure_above(&self, tau: f64) -> f64 {
        let k = self.thresholds.partition_point(|&t| t <= tau);
        if k == 0 {
            self.support_measure
        } else {
            self.measures[k - 1]
        }
    }

    /// `f*(t) = inf{tau > 0 : mu{|f| > tau} <= t}` for the step data.
    ///
    /// Beyond the largest threshold nothing is known, so if even that threshold
    /// has measure above `t` the largest threshold is returned.
    pub fn decreasing_rearrangement(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::NonPositiveMeasure(t));
        }
        if t >= self.support_measure {
            return Ok(0.0);
        }
        let k = self.measures.partition_point(|&m| m > t);
        Ok(self.thresholds[k.min(self.thresholds.len() - 1)])
    }

    /// Continuous version of [`Self::decreasing_rearrangement`].
    ///
    /// Level `v_k` occupies the `t`-interval `[mu_k, mu_{k-1})` of the exact
    /// inverse; here it is pinned at the interval midpoint and the inverse is
    /// interpolated linearly between consecutive levels (and down to 0 at the
    /// support measure). Agrees with the step inverse up to one level's mass.
    pub fn interpolated_rearrangement(&self, t: f64) -> f64 {
        let m = self.thresholds.len();
        if t >= self.support_measure {
            return 0.0;
        }
        let mid = |k: usize| {
            let below = if k == 0 {
                self.support_measure
            } else {
                self.measures[k - 1]
            };
            0.5 * (self.measures[k] + below)
        };
        // midpoints decrease with k
        let top = mid(m - 1);
        if t <= top {
            return self.thresholds[m - 1];
        }
        let first = mid(0);
        if t >= first {
            let s = (t - first) / (self.support_measure - first);
            return self.thresholds[0] * (1.0 - s);
        }
        // first k with mid(k) < t, then t lies in [mid(k), mid(k-1))
        let (mut lo, mut hi) = (0usize, m - 1);
        while lo < hi {
            let c = (lo + hi) / 2;
            if mid(c) < t {
                hi = c;
            } else {
                lo = c + 1;
            }
        }
        let k = lo;
        let (t0, t1) = (mid(k), mid(k - 1));
        let s = (t - t0) / (t1 - t0);
        self.thresholds[k] + s * (self.thresholds[k - 1] - self.thresholds[k])
    }
}

fn check_thresholds(thresholds: &[f64]) -> Result<()> {
    if thresholds.is_empty() {
        return Err(Error::EmptyThresholds);
    }
    let ok = thresholds.iter().all(|t| t.is_finite() && *t > 0.0)
        && thresholds.windows(2).all(|w| w[1] > w[0]);
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidThresholds)
    }
}

/// Nodes with `|f| > 0` inside the cone, sorted by decreasing value and paired
/// with their lumped masses.
fn sorted_levels(f: &GridFunction, spec: &WeightSpec) -> Result<Vec<(f64, f64)>> {
    f.check_in_cone(spec)?;
    let masses = f.node_masses(spec);
    let mut levels: Vec<(f64, f64)> = f
        .values()
        .iter()
        .zip(&masses)
        .map(|(v, m)| (v.abs(), *m))
        .filter(|(v, m)| *v > 0.0 && *m > 0.0)
        .collect();
    sort_by(&mut levels, |a, b| b.0.total_cmp(&a.0));
    Ok(levels)
}

/// Lumped measure of the nodes where `f` does not vanish.
pub fn support_measure(f: &GridFunction, spec: &WeightSpec) -> Result<f64> {
    f.check_in_cone(spec)?;
    let masses = f.node_masses(spec);
    let values = f.values();
    Ok(chunked_sum(values.len(), |l| if values[l] != 0.0 { masses[l] } else { 0.0 }))
}

/// Cumulative masses of the sorted levels: `cum[k] = sum of masses of levels[..k]`.
fn cumulative(levels: &[(f64, f64)]) -> Vec<f64> {
    let mut cum = Vec::with_capacity(levels.len() + 1);
    let mut acc = 0.0;
    cum.push(0.0);
    for (_, m) in levels {
        acc += m;
        cum.push(acc);
    }
    cum
}

/// `mu{|f| > tau_i} ∩ Σ` at the given thresholds.
pub fn distribution(f: &GridFunction, spec: &WeightSpec, thresholds: &[f64]) -> Result<StepDistribution> {
    check_thresholds(thresholds)?;
    let levels = sorted_levels(f, spec)?;
    let cum = cumulative(&levels);
    let measures = thresholds
        .iter()
        .map(|&tau| cum[levels.partition_point(|(v, _)| *v > tau)])
        .collect();
    StepDistribution::new(thresholds.to_vec(), measures, *cum.last().unwrap())
}

/// The exact corner-count distribution, with a threshold at every distinct sample value.
pub fn full_distribution(f: &GridFunction, spec: &WeightSpec) -> Result<StepDistribution> {
    step_distribution(sorted_levels(f, spec)?)
}

fn step_distribution(levels: Vec<(f64, f64)>) -> Result<StepDistribution> {
    if levels.is_empty() {
        return Err(Error::ZeroFunction);
    }
    let cum = cumulative(&levels);
    let mut thresholds = Vec::new();
    let mut measures = Vec::new();
    let mut k = 0;
    while k < levels.len() {
        let v = levels[k].0;
        thresholds.push(v);
        measures.push(cum[k]);
        while k < levels.len() && levels[k].0 == v {
            k += 1;
        }
    }
    thresholds.reverse();
    measures.reverse();
    StepDistribution::new(thresholds, measures, *cum.last().unwrap())
}

/// `count` thresholds spaced logarithmically between the smallest positive and the
/// largest `|f|`.
pub fn default_thresholds(f: &GridFunction, count: usize) -> Result<Vec<f64>> {
    let (lo, hi) = f
        .values()
        .iter()
        .map(|v| v.abs())
        .filter(|&v| v > 0.0)
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if hi == 0.0 {
        return Err(Error::ZeroFunction);
    }
    if lo == hi || count < 2 {
        return Ok(vec![hi]);
    }
    let ratio = (hi / lo).ln() / (count - 1) as f64;
    let mut out: Vec<f64> = (0..count).map(|i| lo * (ratio * i as f64).exp()).collect();
    out[count - 1] = hi;
    out.dedup();
    Ok(out)
}

/// A radial profile `U` on `[0, R]`: nonincreasing, piecewise linear, `U(R) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    radii: Vec<f64>,
    values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.len() < 2 || radii.len() != values.len() {
            return Err(Error::InvalidRadialProfile(
                "need at least two radii and one value per radius".into(),
            ));
        }
        if radii[0] != 0.0 {
            return Err(Error::InvalidRadialProfile("grid must start at r = 0".into()));
        }
        if !radii.windows(2).all(|w| w[1] > w[0]) || !radii.iter().all(|r| r.is_finite()) {
            return Err(Error::InvalidRadialProfile("radii must be strictly increasing".into()));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidRadialProfile("values must be finite".into()));
        }
        if let Some(i) = values.windows(2).position(|w| w[1] > w[0]) {
            return Err(Error::IncreasingProfile(radii[i]));
        }
        if *values.last().unwrap() != 0.0 {
            return Err(Error::InvalidRadialProfile("U(R) must be 0".into()));
        }
        Ok(Self { radii, values })
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn support_radius(&self) -> f64 {
        *self.radii.last().unwrap()
    }

    pub fn max_value(&self) -> f64 {
        self.values[0]
    }

    pub fn is_zero(&self) -> bool {
        self.values[0] == 0.0
    }

    /// Linear interpolation; zero for `r >= R`.
    pub fn eval(&self, r: f64) -> f64 {
        if r >= self.support_radius() {
            return 0.0;
        }
        if r <= 0.0 {
            return self.values[0];
        }
        let k = self.radii.partition_point(|&x| x <= r);
        let (r0, r1) = (self.radii[k - 1], self.radii[k]);
        let (u0, u1) = (self.values[k - 1], self.values[k]);
        u0 + (u1 - u0) * (r - r0) / (r1 - r0)
    }

    /// Slopes `U'` on each cell.
    pub fn slopes(&self) -> Vec<f64> {
        self.radii
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(r, u)| (u[1] - u[0]) / (r[1] - r[0]))
            .collect()
    }

    /// `P_w int_0^R |U'|^p r^{D-1} dr`, exact for the piecewise-linear profile.
    pub fn gradient_energy(&self, consts: &GeometricConstants, p: f64) -> f64 {
        let d = consts.dimension;
        let sum: f64 = self
            .slopes()
            .iter()
            .zip(self.radii.windows(2))
            .map(|(s, r)| s.abs().powf(p) * (r[1].powf(d) - r[0].powf(d)) / d)
            .sum();
        consts.p_w * sum
    }

    /// `||grad u||_{p,mu}` of `u(x) = U(|x|)` on `B_R ∩ Σ`.
    pub fn gradient_norm(&self, consts: &GeometricConstants, p: f64) -> f64 {
        self.gradient_energy(consts, p).powf(1.0 / p)
    }

    /// Two-column CSV rows `(r, U)`.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.radii.iter().copied().zip(self.values.iter().copied())
    }
}

/// `f★(x) = f*(C_D |x|^D)` on a uniform radial grid over `[0, R]`, where
/// `mu(B_R ∩ Σ)` equals the measure of the support of `f`.
///
/// The grid has `n` points, or fewer when `n` would put more than
/// [`RADIAL_NODES_PER_SPACING`] radial cells into one grid spacing of `f`: finer
/// than that the corner-count distribution only resolves lattice noise, which
/// turns up in the slopes of `f★`.
pub fn radial_rearrangement(f: &GridFunction, spec: &WeightSpec, n: usize) -> Result<RadialProfile> {
    if n < 2 {
        return Err(Error::InvalidRadialProfile("need at least two radial nodes".into()));
    }
    if f.is_zero() {
        return Err(Error::ZeroFunction);
    }
    let dist = full_distribution(f, spec)?;
    let c_d = unit_ball_measure_closed_form(spec);
    let d = spec.effective_dim();
    let radius = (dist.support_measure() / c_d).powf(1.0 / d);
    let h = f.spacings().into_iter().fold(0.0, f64::max);
    let n = n.min((RADIAL_NODES_PER_SPACING * radius / h).ceil() as usize + 1).max(2);
    let radii: Vec<f64> = (0..n)
        .map(|i| if i + 1 == n { radius } else { radius * i as f64 / (n - 1) as f64 })
        .collect();
    let mut values = Vec::with_capacity(n);
    let mut running = f64::INFINITY;
    for (i, &r) in radii.iter().enumerate() {
        let v = if i == 0 {
            dist.thresholds()[dist.thresholds().len() - 1]
        } else if i + 1 == n {
            0.0
        } else {
            dist.interpolated_rearrangement(c_d * r.powf(d))
        };
        running = running.min(v);
        values.push(running);
    }
    RadialProfile::new(radii, values)
}

fn check_increasing_map<F: Fn(f64) -> f64>(psi: &F, top: f64) -> Result<()> {
    const PROBES: usize = 64;
    let mut prev = f64::NEG_INFINITY;
    for k in 1..=PROBES {
        let v = psi(top * k as f64 / PROBES as f64);
        if !v.is_finite() || v <= prev {
            return Err(Error::NonIncreasingMap);
        }
        prev = v;
    }
    Ok(())
}

/// `int_{{|f| > 0} ∩ Σ} Psi(|f|) dmu` by lumped-mass quadrature.
///
/// Integration runs over the support of `f` so that maps with `Psi(0) != 0`
/// (such as `exp(a s^{D'})`) give finite values.
pub fn composition_integral<F>(f: &GridFunction, spec: &WeightSpec, psi: F) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    f.check_in_cone(spec)?;
    if f.is_zero() {
        return Ok(0.0);
    }
    check_increasing_map(&psi, f.max_abs())?;
    let masses = f.node_masses(spec);
    let values = f.values();
    Ok(chunked_sum(values.len(), |l| {
        let v = values[l].abs();
        if v > 0.0 {
            masses[l] * psi(v)
        } else {
            0.0
        }
    }))
}

/// `P_w int_0^R Psi(U(r)) r^{D-1} dr`, the radial form of [`composition_integral`].
pub fn radial_composition_integral<F>(profile: &RadialProfile, consts: &GeometricConstants, psi: F) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    if profile.is_zero() {
        return Ok(0.0);
    }
    check_increasing_map(&psi, profile.max_value())?;
    let rule = cell_rule();
    let d = consts.dimension;
    let radii = profile.radii();
    let values = profile.values();
    let sum = chunked_sum(radii.len() - 1, |i| {
        let (r0, r1) = (radii[i], radii[i + 1]);
        let (u0, u1) = (values[i], values[i + 1]);
        rule.integrate(r0, r1, |r| {
            let u = u0 + (u1 - u0) * (r - r0) / (r1 - r0);
            psi(u) * r.powf(d - 1.0)
        })
    });
    Ok(consts.p_w * sum)
}

/// Central differences inside, second-order one-sided differences on box faces.
fn partial(values: &[f64], l: usize, i: usize, n: usize, stride: usize, h: f64) -> f64 {
    let at = |k: usize| values[l - i * stride + k * stride];
    if i == 0 {
        (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h)
    } else if i + 1 == n {
        (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h)
    } else {
        (at(i + 1) - at(i - 1)) / (2.0 * h)
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::ExponentOutOfRange(p));
    }
    Ok(())
}

/// `int |grad f|^p dmu` over the box.
pub fn gradient_energy(f: &GridFunction, spec: &WeightSpec, p: f64) -> Result<f64> {
    check_p(p)?;
    f.check_in_cone(spec)?;
    let masses = f.node_masses(spec);
    let d = f.dim();
    let strides: Vec<usize> = (0..d).map(|k| f.stride(k)).collect();
    let h = f.spacings();
    let shape = f.shape();
    let values = f.values();
    Ok(chunked_sum(values.len(), |l| {
        if masses[l] == 0.0 {
            return 0.0;
        }
        let idx = f.unravel(l);
        let g2: f64 = (0..d)
            .map(|k| partial(values, l, idx[k], shape[k], strides[k], h[k]).powi(2))
            .sum();
        masses[l] * g2.powf(0.5 * p)
    }))
}

/// `||grad f||_{p,mu}`.
pub fn gradient_seminorm(f: &GridFunction, spec: &WeightSpec, p: f64) -> Result<f64> {
    Ok(gradient_energy(f, spec, p)?.powf(1.0 / p))
}

/// Samples `u(x) = U(|x|)` on a grid covering `B_R ∩ Σ` with a small margin, so the
/// outer faces carry zeros.
pub fn sample_radial(profile: &RadialProfile, spec: &WeightSpec, nodes: usize) -> Result<GridFunction> {
    let reach = profile.support_radius() * 1.02;
    let d = spec.dim();
    let lower = (0..d)
        .map(|k| if spec.cone().is_active(k) { 0.0 } else { -reach })
        .collect();
    GridFunction::from_fn(lower, vec![reach; d], vec![nodes; d], |x| {
        profile.eval(x.iter().map(|v| v * v).sum::<f64>().sqrt())
    })
}

/// Distribution of `f` against that of its radial rearrangement sampled on a grid
/// of the same shape.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquimeasurabilityReport {
    pub thresholds: Vec<f64>,
    pub original: Vec<f64>,
    pub rearranged: Vec<f64>,
    /// `max_i |mu_f(tau_i) - mu_rearranged(tau_i)| / mu(spt f)`.
    pub sup_relative: f64,
}

pub fn equimeasurability(
    f: &GridFunction,
    spec: &WeightSpec,
    profile: &RadialProfile,
    thresholds: &[f64],
) -> Result<EquimeasurabilityReport> {
    let nodes = *f.shape().iter().max().unwrap();
    let star = sample_radial(profile, spec, nodes)?;
    let a = distribution(f, spec, thresholds)?;
    let b = distribution(&star, spec, thresholds)?;
    let scale = a.support_measure();
    let sup_relative = a
        .measures()
        .iter()
        .zip(b.measures())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
        / scale;
    Ok(EquimeasurabilityReport {
        thresholds: thresholds.to_vec(),
        original: a.measures().to_vec(),
        rearranged: b.measures().to_vec(),
        sup_relative,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolyaSzegoReport {
    pub p: f64,
    /// `||grad f★||_{p,mu}` from the radial profile.
    pub lhs: f64,
    /// `||grad f||_{p,mu}` on the grid.
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
}

/// Compares the gradient norms of `f` and of its radial rearrangement.
pub fn polya_szego_check(f: &GridFunction, spec: &WeightSpec, p: f64) -> Result<PolyaSzegoReport> {
    check_p(p)?;
    f.check_compact_support(spec)?;
    let profile = radial_rearrangement(f, spec, DEFAULT_RADIAL_NODES)?;
    polya_szego_compare(f, &profile, spec, p)
}

/// As [`polya_szego_check`] with a precomputed rearrangement.
pub fn polya_szego_compare(
    f: &GridFunction,
    profile: &RadialProfile,
    spec: &WeightSpec,
    p: f64,
) -> Result<PolyaSzegoReport> {
    check_p(p)?;
    let consts = GeometricConstants::from_spec(spec);
    let lhs = profile.gradient_norm(&consts, p);
    let rhs = gradient_seminorm(f, spec, p)?;
    Ok(PolyaSzegoReport {
        p,
        lhs,
        rhs,
        slack: POLYA_SZEGO_SLACK,
        holds: lhs <= rhs * (1.0 + POLYA_SZEGO_SLACK),
    })
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;

    fn x1() -> WeightSpec {
        WeightSpec::new(2, vec![0], vec![1.0]).unwrap()
    }

    fn half_disc_grid(n: usize, f: impl Fn(f64, f64) -> f64 + Sync + Send) -> GridFunction {
        GridFunction::from_fn(vec![0.0, -1.25], vec![1.25, 1.25], vec![n, n], |x| f(x[0], x[1])).unwrap()
    }

    fn tent(n: usize) -> GridFunction {
        half_disc_grid(n, |x, y| (1.0 - (x * x + y * y).sqrt()).max(0.0))
    }

    fn indicator(n: usize) -> GridFunction {
        half_disc_grid(n, |x, y| if x * x + y * y < 1.0 { 1.0 } else { 0.0 })
    }

    #[test]
    fn distribution_of_indicator() {
        let spec = x1();
        let dist = distribution(&indicator(256), &spec, &[0.5, 1.5]).unwrap();
        assert!((dist.measures()[0] - 2.0 / 3.0).abs() < 2e-2);
        assert_eq!(dist.measures()[1], 0.0);
    }

    #[test]
    fn distribution_of_tent_at_half() {
        // superlevel set {tent > 1/2} is B_{1/2}: (2/3)(1/2)^3
        let dist = distribution(&tent(256), &x1(), &[0.5]).unwrap();
        assert!((dist.measures()[0] - 1.0 / 12.0).abs() < 1e-3);
    }

    #[test]
    fn threshold_validation() {
        let f = tent(16);
        assert!(matches!(distribution(&f, &x1(), &[]), Err(Error::EmptyThresholds)));
        assert!(matches!(
            distribution(&f, &x1(), &[0.5, 0.5]),
            Err(Error::InvalidThresholds)
        ));
        assert!(matches!(
            distribution(&f, &x1(), &[0.0, 0.5]),
            Err(Error::InvalidThresholds)
        ));
    }

    #[test]
    fn rearrangement_of_single_step() {
        let c = 2.0 / 3.0;
        let dist = StepDistribution::new(vec![1.0], vec![0.0], c).unwrap();
        assert_eq!(dist.decreasing_rearrangement(c / 2.0).unwrap(), 1.0);
        assert_eq!(dist.decreasing_rearrangement(2.0 * c).unwrap(), 0.0);
        assert!(matches!(
            dist.decreasing_rearrangement(0.0),
            Err(Error::NonPositiveMeasure(_))
        ));
    }

    #[test]
    fn rearrangement_inverts_tent_distribution() {
        // mu{tent > tau} = C_D (1 - tau)^3, so f*(1/12) = 1/2
        let f = tent(256);
        let thresholds = default_thresholds(&f, DEFAULT_THRESHOLDS).unwrap();
        let dist = distribution(&f, &x1(), &thresholds).unwrap();
        let v = dist.decreasing_rearrangement(1.0 / 12.0).unwrap();
        assert!((v - 0.5).abs() < 0.02, "{v}");
    }

    #[test]
    fn measure_above_is_right_continuous() {
        let dist = StepDistribution::new(vec![1.0, 2.0], vec![0.5, 0.0], 1.0).unwrap();
        assert_eq!(dist.measure_above(0.5), 1.0);
        assert_eq!(dist.measure_above(1.0), 0.5);
        assert_eq!(dist.measure_above(1.5), 0.5);
        assert_eq!(dist.measure_above(2.0), 0.0);
    }

    #[test]
    fn radial_function_is_its_own_rearrangement() {
        let g = |r: f64| (1.0 - r * r).max(0.0).powi(2);
        let f = half_disc_grid(192, |x, y| g((x * x + y * y).sqrt()));
        let u = radial_rearrangement(&f, &x1(), 256).unwrap();
        let err = u
            .rows()
            .map(|(r, v)| (v - g(r)).abs())
            .fold(0.0, f64::max);
        assert!(err < 2e-2, "{err}");
        assert!((u.support_radius() - 1.0).abs() < 2e-2);
    }

    #[test]
    fn indicator_rearranges_to_indicator() {
        let u = radial_rearrangement(&indicator(256), &x1(), 256).unwrap();
        assert!((u.support_radius() - 1.0).abs() < 1e-2);
        assert_eq!(u.eval(0.5), 1.0);
        assert_eq!(u.eval(1.1), 0.0);
    }

    #[test]
    fn translation_along_free_axis_preserves_profile() {
        let bump = |cx: f64, cy: f64| {
            move |x: f64, y: f64| {
                let r2 = ((x - cx).powi(2) + (y - cy).powi(2)) / 0.25;
                (1.0 - r2).max(0.0).powi(2)
            }
        };
        let a = radial_rearrangement(&half_disc_grid(160, bump(0.6, 0.0)), &x1(), 128).unwrap();
        let b = radial_rearrangement(&half_disc_grid(160, bump(0.6, 0.4)), &x1(), 128).unwrap();
        let r = a.support_radius().max(b.support_radius());
        let dev = (0..=100)
            .map(|i| (a.eval(r * i as f64 / 100.0) - b.eval(r * i as f64 / 100.0)).abs())
            .fold(0.0, f64::max);
        assert!(dev < 2e-2, "{dev}");
    }

    #[test]
    fn zero_function_rejected() {
        let z = half_disc_grid(16, |_, _| 0.0);
        assert!(matches!(radial_rearrangement(&z, &x1(), 64), Err(Error::ZeroFunction)));
    }

    #[test]
    fn composition_of_indicator_is_ball_measure() {
        let v = composition_integral(&indicator(256), &x1(), |s| s).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 2e-2);
    }

    #[test]
    fn composition_of_tent() {
        // int (1 - |x|) x_1 dx over B_1 ∩ Σ = 2 (1/3 - 1/4) = 1/6
        let v = composition_integral(&tent(256), &x1(), |s| s).unwrap();
        assert_relative_eq!(v, 1.0 / 6.0, max_relative = 1e-3);
    }

    #[test]
    fn composition_rejects_decreasing_map() {
        assert!(matches!(
            composition_integral(&tent(32), &x1(), |s| -s),
            Err(Error::NonIncreasingMap)
        ));
    }

    #[test]
    fn gradient_of_linear_function() {
        // |grad x_1| = 1, so the p = 1 seminorm is int_box x_1 dx = 1/2 * 2 = 1
        let f = GridFunction::from_fn(vec![0.0, 0.0], vec![1.0, 2.0], vec![9, 9], |x| x[0]).unwrap();
        let v = gradient_seminorm(&f, &x1(), 1.0).unwrap();
        assert_relative_eq!(v, 1.0, epsilon = 1e-12);
        let z = GridFunction::from_fn(vec![0.0, 0.0], vec![1.0, 2.0], vec![9, 9], |_| 0.0).unwrap();
        assert_eq!(gradient_seminorm(&z, &x1(), 2.0).unwrap(), 0.0);
        assert!(matches!(
            gradient_seminorm(&f, &x1(), 0.5),
            Err(Error::ExponentOutOfRange(_))
        ));
    }
}
