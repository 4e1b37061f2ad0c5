//! Sampled functions on axis-aligned boxes.

use crate::parallel::map_collect;
use crate::weights::WeightSpec;
use crate::{Error, Result};

/// Minimum nodes per axis.
pub const MIN_NODES: usize = 8;

/// Samples of a function on a uniform tensor grid, extended by zero outside the box.
///
/// Nodes include both box faces, so axis `k` has spacing
/// `(upper[k] - lower[k]) / (shape[k] - 1)`. Values are stored column-major:
/// the first axis varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    lower: Vec<f64>,
    upper: Vec<f64>,
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let d = shape.len();
        if d == 0 || lower.len() != d || upper.len() != d {
            return Err(Error::InvalidGrid(format!(
                "box has {} / {} bounds for {} axes",
                lower.len(),
                upper.len(),
                d
            )));
        }
        if let Some(k) = shape.iter().position(|&n| n < MIN_NODES) {
            return Err(Error::InvalidGrid(format!(
                "axis {k} has {} nodes, need at least {MIN_NODES}",
                shape[k]
            )));
        }
        if let Some(k) = (0..d).find(|&k| !(upper[k] > lower[k]) || !lower[k].is_finite() || !upper[k].is_finite()) {
            return Err(Error::InvalidGrid(format!("axis {k} has an empty or infinite extent")));
        }
        let expected: usize = shape.iter().product();
        if values.len() != expected {
            return Err(Error::InvalidGrid(format!(
                "expected {expected} samples, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("sample {i} is not finite")));
        }
        Ok(Self {
            lower,
            upper,
            shape,
            values,
        })
    }

    /// Samples `f` at every node.
    pub fn from_fn<F>(lower: Vec<f64>, upper: Vec<f64>, shape: Vec<usize>, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Sync + Send,
    {
        let probe = Self {
            lower: lower.clone(),
            upper: upper.clone(),
            shape: shape.clone(),
            values: Vec::new(),
        };
        let n: usize = shape.iter().product();
        let values = map_collect(n, |l| f(&probe.node(l)));
        Self::new(lower, upper, shape, values)
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / (self.shape[axis] - 1) as f64
    }

    pub fn spacings(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.spacing(k)).collect()
    }

    /// Coordinate of node `i` along `axis`.
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        if i + 1 == self.shape[axis] {
            self.upper[axis]
        } else {
            self.lower[axis] + i as f64 * self.spacing(axis)
        }
    }

    /// Multi-index of a linear (column-major) index.
    pub fn unravel(&self, mut l: usize) -> Vec<usize> {
        self.shape
            .iter()
            .map(|&n| {
                let i = l % n;
                l /= n;
                i
            })
            .collect()
    }

    /// Stride of `axis` in the linear layout.
    pub fn stride(&self, axis: usize) -> usize {
        self.shape[..axis].iter().product()
    }

    pub fn node(&self, l: usize) -> Vec<f64> {
        self.unravel(l)
            .into_iter()
            .enumerate()
            .map(|(k, i)| self.coord(k, i))
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Errors unless the box lies in the closure of the cone of `spec`.
    pub fn check_in_cone(&self, spec: &WeightSpec) -> Result<()> {
        if spec.dim() != self.dim() {
            return Err(Error::PointDimension {
                expected: spec.dim(),
                got: self.dim(),
            });
        }
        match spec.cone().active().iter().find(|&&j| self.lower[j] < 0.0) {
            Some(&j) => Err(Error::GridOutsideCone(j)),
            None => Ok(()),
        }
    }

    /// Largest `|f|` over box faces that are not part of the cone boundary.
    ///
    /// A lower face `x_j = 0` with `j` active sits on `∂Σ`, where a function in
    /// `C_c^1(R^d)` need not vanish; every other face must carry zeros for the
    /// zero extension to be continuous.
    pub fn free_face_max(&self, spec: &WeightSpec) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for l in 0..self.len() {
            let idx = self.unravel(l);
            let on_free_face = (0..d).any(|k| {
                let on_cone_face = spec.cone().is_active(k) && self.lower[k] == 0.0;
                (idx[k] == 0 && !on_cone_face) || idx[k] + 1 == self.shape[k]
            });
            if on_free_face {
                worst = worst.max(self.values[l].abs());
            }
        }
        worst
    }

    /// Checks the compact-support invariant up to a relative tolerance.
    pub fn check_compact_support(&self, spec: &WeightSpec) -> Result<()> {
        let face = self.free_face_max(spec);
        if face > 1e-12 * self.max_abs().max(f64::MIN_POSITIVE) {
            return Err(Error::SupportNotCompact(face));
        }
        Ok(())
    }

    /// Per-node share of the weighted mass of the adjacent cells along one axis.
    ///
    /// Each cell's mass `int x^A dx` is split evenly between its two end nodes.
    pub fn axis_masses(&self, spec: &WeightSpec, axis: usize) -> Vec<f64> {
        let n = self.shape[axis];
        let mut out = vec![0.0; n];
        for i in 0..n - 1 {
            let m = spec.axis_integral(axis, self.coord(axis, i), self.coord(axis, i + 1));
            out[i] += 0.5 * m;
            out[i + 1] += 0.5 * m;
        }
        out
    }

    /// Lumped weighted mass of every node: `sum over adjacent cells of mu(cell) / 2^d`.
    ///
    /// The monomial weight factorises over axes, so this is a tensor product of
    /// [`Self::axis_masses`].
    pub fn node_masses(&self, spec: &WeightSpec) -> Vec<f64> {
        let axes: Vec<Vec<f64>> = (0..self.dim()).map(|k| self.axis_masses(spec, k)).collect();
        map_collect(self.len(), |l| {
            self.unravel(l)
                .iter()
                .zip(&axes)
                .map(|(&i, m)| m[i])
                .product()
        })
    }
}
