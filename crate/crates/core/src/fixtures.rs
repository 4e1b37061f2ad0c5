//! Canonical weights and test functions.

use crate::grid::GridFunction;
use crate::weights::WeightSpec;
use crate::Result;

/// Half-width of the fixture boxes.
pub const BOX_REACH: f64 = 1.2;

/// `w(x) = x_1` on `{x_1 > 0}` in the plane.
pub fn weight_x1() -> WeightSpec {
    WeightSpec::new(2, vec![0], vec![1.0]).expect("valid spec")
}

/// `w(x) = x_1 x_2` on the positive quadrant.
pub fn weight_x1x2() -> WeightSpec {
    WeightSpec::new(2, vec![0, 1], vec![1.0, 1.0]).expect("valid spec")
}

pub fn weights() -> [(&'static str, WeightSpec); 2] {
    [("x1", weight_x1()), ("x1x2", weight_x1x2())]
}

/// `(1 - |x - c|^2 / rho^2)^2` inside the ball, 0 outside. C^1 across the sphere.
pub fn bump(x: &[f64], center: &[f64], rho: f64) -> f64 {
    let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / (rho * rho);
    if r2 >= 1.0 {
        0.0
    } else {
        (1.0 - r2) * (1.0 - r2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fixture {
    /// Unit bump at the vertex; already its own rearrangement.
    RadialBump,
    /// A smaller bump away from the vertex.
    ShiftedBump,
    /// Two separated bumps of different heights.
    TwoBump,
}

impl Fixture {
    pub const ALL: [Fixture; 3] = [Fixture::RadialBump, Fixture::ShiftedBump, Fixture::TwoBump];

    pub fn name(self) -> &'static str {
        match self {
            Fixture::RadialBump => "radial-bump",
            Fixture::ShiftedBump => "shifted-bump",
            Fixture::TwoBump => "two-bump",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }

    /// Samples the fixture with `nodes` per axis on `[0, 1.2]` along active axes
    /// and `[-1.2, 1.2]` along free ones.
    pub fn sample(self, spec: &WeightSpec, nodes: usize) -> Result<GridFunction> {
        let d = spec.dim();
        let free = |k: usize| !spec.cone().is_active(k);
        let lower = (0..d).map(|k| if free(k) { -BOX_REACH } else { 0.0 }).collect();
        // centres sit at positive coordinates along active axes and straddle free ones
        let place = |active: f64, free_pos: f64| -> Vec<f64> {
            (0..d).map(|k| if free(k) { free_pos } else { active }).collect()
        };
        match self {
            Fixture::RadialBump => GridFunction::from_fn(lower, vec![BOX_REACH; d], vec![nodes; d], |x| {
                bump(x, &vec![0.0; d], 1.0)
            }),
            Fixture::ShiftedBump => {
                let c = place(0.55, 0.3);
                GridFunction::from_fn(lower, vec![BOX_REACH; d], vec![nodes; d], move |x| bump(x, &c, 0.45))
            }
            Fixture::TwoBump => {
                let mut c1 = place(0.35, -0.5);
                let mut c2 = place(0.75, 0.45);
                if d >= 2 && !free(0) && !free(1) {
                    c1[1] = 0.75;
                    c2[1] = 0.35;
                    c1[0] = 0.35;
                    c2[0] = 0.75;
                }
                GridFunction::from_fn(lower, vec![BOX_REACH; d], vec![nodes; d], move |x| {
                    bump(x, &c1, 0.25) + 0.6 * bump(x, &c2, 0.25)
                })
            }
        }
    }
}
