//! Projected gradient ascent on the cell slopes.

use serde::Serialize;

use super::{
    best_of_scan, holder_margin, moser_family, tail_of, tau_scan, value_and_gradient, Baseline, MoserProblem,
    MoserReport,
};
use crate::reduction::{graded_grid, OneDProfile};
use crate::{Error, Result};

/// Starting point of [`optimize`].
#[derive(Debug, Clone)]
pub enum Init {
    /// Best member of the Moser-family scan.
    Auto,
    /// Any valid profile; it is resampled onto the problem grid and rescaled to `G = 1`.
    Profile(OneDProfile),
}

fn widths(times: &[f64]) -> Vec<f64> {
    times.windows(2).map(|w| w[1] - w[0]).collect()
}

fn energy(slopes: &[f64], widths: &[f64], q: f64) -> f64 {
    slopes.iter().zip(widths).map(|(s, h)| s.powf(q) * h).sum()
}

/// Rescales onto `G = 1`; `None` for the zero vector.
fn normalise(mut slopes: Vec<f64>, widths: &[f64], q: f64) -> Option<Vec<f64>> {
    let g = energy(&slopes, widths, q);
    if g <= 0.0 {
        return None;
    }
    let scale = g.powf(-1.0 / q);
    slopes.iter_mut().for_each(|s| *s *= scale);
    Some(slopes)
}

/// Slopes of `phi` interpolated onto `times`, clipped at zero.
fn resample(phi: &OneDProfile, times: &[f64]) -> Vec<f64> {
    let values: Vec<f64> = times.iter().map(|&t| phi.eval(t)).collect();
    values
        .windows(2)
        .zip(times.windows(2))
        .map(|(v, t)| ((v[1] - v[0]) / (t[1] - t[0])).max(0.0))
        .collect()
}

struct Ascent {
    times: Vec<f64>,
    slopes: Vec<f64>,
    value: f64,
    iterations: usize,
    trace: Vec<f64>,
    converged: bool,
}

impl Ascent {
    fn profile(&self) -> OneDProfile {
        OneDProfile::from_slopes(self.times.clone(), &self.slopes).expect("iterates are valid")
    }
}

fn ascend(times: Vec<f64>, init: Vec<f64>, problem: &MoserProblem) -> Ascent {
    let q = problem.q();
    let qc = problem.conjugate();
    let beta = problem.beta();
    let settings = problem.settings;
    let h = widths(&times);
    let eval = |s: &[f64]| value_and_gradient(&times, s, beta, qc);

    let mut trace = Vec::new();
    let mut slopes = match normalise(init, &h, q) {
        Some(s) => s,
        None => {
            // F has zero gradient at phi = 0; start along uniform slopes instead.
            trace.push(eval(&vec![0.0; h.len()]).0);
            normalise(vec![1.0; h.len()], &h, q).unwrap()
        }
    };
    let (mut value, mut grad) = eval(&slopes);
    trace.push(value);
    let mut step = settings.initial_step;
    let mut iterations = trace.len() - 1;
    let mut converged = false;

    while iterations < settings.max_iterations {
        // ascent direction in the metric of the Hessian of G, projected on the
        // tangent space of G = 1
        let floor = 1e-3 * slopes.iter().cloned().fold(0.0, f64::max);
        let metric: Vec<f64> = slopes
            .iter()
            .zip(&h)
            .map(|(s, w)| w * (s + floor).powf(q - 2.0))
            .collect();
        let mut dir: Vec<f64> = grad
            .iter()
            .zip(&metric)
            .zip(&slopes)
            .map(|((g, m), s)| if *s == 0.0 && *g <= 0.0 { 0.0 } else { g / m })
            .collect();
        // gradient of G, raised to a tangent-space normal in the same metric
        let normal: Vec<f64> = slopes
            .iter()
            .zip(&h)
            .zip(&metric)
            .map(|((s, w), m)| q * s.powf(q - 1.0) * w / m)
            .collect();
        let nn: f64 = normal.iter().zip(&metric).map(|(n, m)| n * n * m).sum();
        if nn > 0.0 {
            let dn: f64 = dir.iter().zip(&normal).zip(&metric).map(|((d, n), m)| d * n * m).sum();
            dir.iter_mut().zip(&normal).for_each(|(d, n)| *d -= dn / nn * n);
        }
        if dir.iter().all(|&d| d == 0.0) {
            converged = true;
            break;
        }

        let mut accepted = None;
        while step > 1e-18 {
            let trial: Vec<f64> = slopes.iter().zip(&dir).map(|(s, d)| (s + step * d).max(0.0)).collect();
            if let Some(trial) = normalise(trial, &h, q) {
                let (v, g) = eval(&trial);
                if v > value {
                    accepted = Some((trial, v, g));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((s, v, g)) = accepted else {
            converged = true;
            break;
        };
        slopes = s;
        value = v;
        grad = g;
        step = (2.0 * step).min(1e6);
        iterations += 1;
        trace.push(value);

        let window = settings.stall_window;
        if trace.len() > window {
            let before = trace[trace.len() - 1 - window];
            if (value - before) / value.abs() < settings.stall_tolerance {
                converged = true;
                break;
            }
        }
    }

    Ascent {
        times,
        slopes,
        value,
        iterations,
        trace,
        converged,
    }
}

fn initial_slopes(problem: &MoserProblem, init: &Init, baseline: &Baseline) -> Result<Vec<f64>> {
    let times = problem.grid();
    Ok(match init {
        Init::Auto => resample(&moser_family(baseline.tau, problem)?, &times),
        Init::Profile(phi) => resample(phi, &times),
    })
}

/// `times` on `[0, T]` followed by the right half of a graded grid on `[T, 2T]`.
fn doubled_grid(times: &[f64]) -> Vec<f64> {
    let t = *times.last().unwrap();
    let n = times.len() - 1;
    let ext = graded_grid(t, n).expect("valid grid");
    times.iter().copied().chain(ext[1..].iter().map(|s| t + s)).collect()
}

fn report_from(problem: &MoserProblem, run: &Ascent, baseline: Baseline) -> MoserReport {
    let profile = run.profile();
    let constraint = profile.dirichlet_energy(problem.q());
    let (tail, tail_bound) = tail_of(&profile, problem);
    MoserReport {
        q: problem.q(),
        conjugate: problem.conjugate(),
        beta: problem.beta(),
        truncation: problem.truncation(),
        cells: problem.cells(),
        value: run.value,
        constraint,
        constraint_residual: (constraint - 1.0).abs(),
        iterations: run.iterations,
        converged: run.converged,
        history: vec![(problem.cells(), run.value)],
        baseline,
        tail,
        tail_bound,
        doubled_truncation_value: None,
        holder_margin: holder_margin(&profile, problem.q()),
        profile,
        trace: run.trace.clone(),
    }
}

/// Maximises `F` on the problem grid, then re-solves on `2N` cells (and on
/// `[0, 2T]` when `beta = 1`) warm-started from the result.
pub fn optimize(problem: &MoserProblem, init: Init) -> Result<MoserReport> {
    let baseline = best_of_scan(&tau_scan(problem)?);
    let start = initial_slopes(problem, &init, &baseline)?;
    let run = ascend(problem.grid(), start, problem);
    let mut report = report_from(problem, &run, baseline);
    if !run.converged {
        report.converged = false;
        return Err(Error::NotConverged {
            iterations: run.iterations,
            partial: Box::new(report),
        });
    }

    let fine = problem.with_cells(2 * problem.cells())?;
    let fine_times = fine.grid();
    let refined = ascend(fine_times.clone(), resample(&report.profile, &fine_times), &fine);
    report.history.push((fine.cells(), refined.value));
    report.converged &= refined.converged;

    if problem.beta() >= 1.0 {
        let times = doubled_grid(&run.times);
        let mut slopes = run.slopes.clone();
        slopes.resize(times.len() - 1, 0.0);
        let doubled = ascend(times, slopes, problem);
        let difference = (doubled.value - run.value).abs();
        report.doubled_truncation_value = Some(doubled.value);
        if difference >= problem.settings.truncation_tolerance {
            report.converged = false;
            return Err(Error::TruncationNotConverged {
                difference,
                partial: Box::new(report),
            });
        }
    }
    if !report.converged {
        return Err(Error::NotConverged {
            iterations: report.iterations,
            partial: Box::new(report),
        });
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct SupremumEstimate {
    /// `(N, F*)` in schedule order.
    pub values: Vec<(usize, f64)>,
    /// Richardson extrapolation of the last two values, assuming second order in `1/N`.
    pub estimate: f64,
    pub monotone: bool,
    /// Solution at the top of the schedule.
    #[serde(skip)]
    pub top: Option<MoserReport>,
}

/// Solves the problem for every `N` in `schedule`, each run warm-started from the previous.
pub fn supremum_estimate(problem: &MoserProblem, schedule: &[usize]) -> Result<SupremumEstimate> {
    if schedule.is_empty() || !schedule.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::InvalidSchedule);
    }
    let mut values = Vec::with_capacity(schedule.len());
    let mut previous: Option<OneDProfile> = None;
    let mut top = None;
    for &n in schedule {
        let p = problem.with_cells(n)?;
        let times = p.grid();
        let start = match &previous {
            Some(phi) => resample(phi, &times),
            None => {
                let baseline = best_of_scan(&tau_scan(&p)?);
                initial_slopes(&p, &Init::Auto, &baseline)?
            }
        };
        let run = ascend(times, start, &p);
        let baseline = best_of_scan(&tau_scan(&p)?);
        let report = report_from(&p, &run, baseline);
        if !run.converged {
            return Err(Error::NotConverged {
                iterations: run.iterations,
                partial: Box::new(report),
            });
        }
        values.push((n, run.value));
        previous = Some(report.profile.clone());
        top = Some(report);
    }
    let monotone = values.windows(2).all(|w| w[1].1 >= w[0].1);
    let estimate = match values.as_slice() {
        [.., (n1, v1), (n2, v2)] => {
            let rho = *n2 as f64 / *n1 as f64;
            v2 + (v2 - v1) / (rho * rho - 1.0)
        }
        [(_, v)] => *v,
        [] => unreachable!(),
    };
    Ok(SupremumEstimate {
        values,
        estimate,
        monotone,
        top,
    })
}
