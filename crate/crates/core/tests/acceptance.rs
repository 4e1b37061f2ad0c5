//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
//! if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weighted_moser::fixtures::{weights, Fixture};
use weighted_moser::moser::{build_extremal, optimize, Init, MoserProblem, MoserReport};
use weighted_moser::rearrange::{
    composition_integral, default_thresholds, equimeasurability, polya_szego_compare, radial_composition_integral,
    radial_rearrangement, DEFAULT_RADIAL_NODES, DEFAULT_THRESHOLDS, POLYA_SZEGO_SLACK,
};
use weighted_moser::reduction::{graded_grid, reduce, TRUNCATION_FACTOR};
use weighted_moser::weights::{
    perimeter_quadrature, unit_ball_measure_closed_form, unit_ball_measure_qmc, unit_ball_measure_quadrature,
    DEFAULT_SEED,
};
use weighted_moser::{GeometricConstants, WeightSpec};

struct Outcome {
    pass: bool,
    detail: String,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed < Duration::from_secs(limit_secs)
}

fn constants() -> Outcome {
    let expected = [2.0 / 3.0, 1.0 / 8.0];
    let mut pass = true;
    let mut detail = Vec::new();
    for ((name, spec), want) in weights().into_iter().zip(expected) {
        let start = Instant::now();
        let closed = unit_ball_measure_closed_form(&spec);
        let quad = unit_ball_measure_quadrature(&spec, 1_000_000).unwrap();
        let qmc = unit_ball_measure_qmc(&spec, 1_000_000, DEFAULT_SEED).unwrap();
        let per = perimeter_quadrature(&spec, 1_000_000, DEFAULT_SEED).unwrap();
        let d = spec.effective_dim();
        let elapsed = start.elapsed();
        let ok = (closed - want).abs() <= 1e-6
            && rel(quad.value, closed) <= 1e-3
            && rel(qmc.value, closed) <= 1e-3
            && rel(per.value, d * closed) <= 1e-4
            && within(elapsed, 5);
        pass &= ok;
        detail.push(format!(
            "{name}: C_D={closed:.8} quad={:.8} qmc={:.6} P_w={:.8} D*C_D={:.8} ({:.2?})",
            quad.value,
            qmc.value,
            per.value,
            d * closed,
            elapsed
        ));
    }
    Outcome {
        pass,
        detail: detail.join("; "),
    }
}

fn homogeneity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut worst = 0.0f64;
    for (_, spec) in weights() {
        for _ in 0..1000 {
            let x: Vec<f64> = (0..spec.dim())
                .map(|k| {
                    let u = 4.0 * rng.random::<f64>();
                    if spec.cone().is_active(k) {
                        u + 1e-3
                    } else {
                        u - 2.0
                    }
                })
                .collect();
            let kappa = 10.0 * (1.0 - rng.random::<f64>());
            let scaled: Vec<f64> = x.iter().map(|v| kappa * v).collect();
            let lhs = spec.eval(&scaled).unwrap();
            let rhs = kappa.powf(spec.alpha()) * spec.eval(&x).unwrap();
            worst = worst.max((lhs - rhs).abs() / lhs.max(f64::MIN_POSITIVE));
        }
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: worst <= 1e-12 && within(elapsed, 1),
        detail: format!("2000 samples, max relative deviation {worst:.2e} ({elapsed:.2?})"),
    }
}

fn equimeasurable() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, spec) in weights() {
        for fx in Fixture::ALL {
            let mut errs = Vec::new();
            for nodes in [128, 256] {
                let f = fx.sample(&spec, nodes).unwrap();
                let u = radial_rearrangement(&f, &spec, DEFAULT_RADIAL_NODES).unwrap();
                let thresholds = default_thresholds(&f, DEFAULT_THRESHOLDS).unwrap();
                errs.push(equimeasurability(&f, &spec, &u, &thresholds).unwrap().sup_relative);
            }
            pass &= errs[0] <= 1e-2 && errs[1] < errs[0];
            detail.push(format!("{name}/{}: {:.2e} -> {:.2e}", fx.name(), errs[0], errs[1]));
        }
    }
    let elapsed = start.elapsed();
    pass &= within(elapsed, 30);
    Outcome {
        pass,
        detail: format!("{} ({elapsed:.2?})", detail.join("; ")),
    }
}

fn composition() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut where_ = String::new();
    for (name, spec) in weights() {
        let consts = GeometricConstants::from_spec(&spec);
        let a = consts.c_d / 2.0;
        let dp = consts.conjugate();
        for fx in Fixture::ALL {
            let f = fx.sample(&spec, 128).unwrap();
            let u = radial_rearrangement(&f, &spec, DEFAULT_RADIAL_NODES).unwrap();
            let maps: [(&str, Box<dyn Fn(f64) -> f64 + Sync + Send>); 3] = [
                ("s", Box::new(|s| s)),
                ("s^2", Box::new(|s| s * s)),
                ("exp", Box::new(move |s: f64| (a * s.powf(dp)).exp())),
            ];
            for (label, psi) in maps {
                let lhs = radial_composition_integral(&u, &consts, &psi).unwrap();
                let rhs = composition_integral(&f, &spec, &psi).unwrap();
                let e = rel(lhs, rhs);
                if e > worst {
                    worst = e;
                    where_ = format!("{name}/{}/{label}", fx.name());
                }
            }
        }
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: worst <= 1e-2 && within(elapsed, 30),
        detail: format!("max relative gap {worst:.2e} at {where_} ({elapsed:.2?})"),
    }
}

fn polya_szego() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, spec) in weights() {
        let d = spec.effective_dim();
        for fx in Fixture::ALL {
            let f = fx.sample(&spec, 128).unwrap();
            let u = radial_rearrangement(&f, &spec, DEFAULT_RADIAL_NODES).unwrap();
            for p in [1.0, 2.0, d] {
                let rep = polya_szego_compare(&f, &u, &spec, p).unwrap();
                pass &= rep.lhs <= rep.rhs * (1.0 + POLYA_SZEGO_SLACK);
                if fx == Fixture::TwoBump {
                    pass &= rep.lhs < rep.rhs;
                    detail.push(format!("{name}/two-bump p={p}: {:.4} < {:.4}", rep.lhs, rep.rhs));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    pass &= within(elapsed, 60);
    Outcome {
        pass,
        detail: format!("{} ({elapsed:.2?})", detail.join("; ")),
    }
}

fn reduction() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut worst = [0.0f64; 2];
    for (_, spec) in weights() {
        let consts = GeometricConstants::from_spec(&spec);
        let t = TRUNCATION_FACTOR * consts.dimension;
        for fx in Fixture::ALL {
            let f = fx.sample(&spec, 128).unwrap();
            let u = radial_rearrangement(&f, &spec, DEFAULT_RADIAL_NODES).unwrap();
            for beta in [0.25, 0.5, 0.9, 1.0] {
                let a = beta * consts.moser_constant;
                let (_, coarse) = reduce(&u, &consts, &graded_grid(t, 1024).unwrap(), a).unwrap();
                let (_, fine) = reduce(&u, &consts, &graded_grid(t, 2048).unwrap(), a).unwrap();
                pass &= fine.energy_residual <= 1e-3 && fine.exp_residual <= 1e-3;
                pass &= fine.energy_residual < coarse.energy_residual && fine.exp_residual < coarse.exp_residual;
                worst[0] = worst[0].max(fine.energy_residual);
                worst[1] = worst[1].max(fine.exp_residual);
            }
        }
    }
    let elapsed = start.elapsed();
    pass &= within(elapsed, 30);
    Outcome {
        pass,
        detail: format!(
            "max residuals at N=2048: energy {:.2e}, exponential {:.2e} ({elapsed:.2?})",
            worst[0], worst[1]
        ),
    }
}

fn moser(reports: &mut Vec<MoserReport>) -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for q in [2.0, 1.5, 3.0] {
        let problem = MoserProblem::new(q, 1.0, None, 256).unwrap();
        match optimize(&problem, Init::Auto) {
            Ok(rep) => {
                let change = (rep.history[1].1 - rep.history[0].1).abs();
                let ok = rep.constraint_residual <= 1e-6
                    && rep.value > rep.baseline.value
                    && change <= 1e-3
                    && rep.holder_margin <= 1e-12;
                pass &= ok;
                detail.push(format!(
                    "q={q}: F*={:.6} scan max={:.6} |G-1|={:.1e} N256->512 change {change:.1e}",
                    rep.value, rep.baseline.value, rep.constraint_residual
                ));
                reports.push(rep);
            }
            Err(e) => {
                pass = false;
                detail.push(format!("q={q}: {e}"));
            }
        }
    }
    let elapsed = start.elapsed();
    pass &= within(elapsed, 300);
    Outcome {
        pass,
        detail: format!("{} ({elapsed:.2?})", detail.join("; ")),
    }
}

fn pipeline(reports: &[MoserReport]) -> Outcome {
    let start = Instant::now();
    let spec: WeightSpec = weights()[0].1.clone();
    let consts = GeometricConstants::from_spec(&spec);
    let Some(report) = reports.iter().find(|r| r.q == consts.dimension) else {
        return Outcome {
            pass: false,
            detail: "no converged q = D report".into(),
        };
    };
    match build_extremal(report, &spec, &consts, 1.0, 2048) {
        Ok(ext) => {
            let gap = rel(ext.exp_functional, ext.value_1d);
            let elapsed = start.elapsed();
            Outcome {
                pass: (0.99..=1.01).contains(&ext.gradient_norm) && gap <= 1e-2 && within(elapsed, 120),
                detail: format!(
                    "||grad u||={:.5}, exp functional {:.5} vs F*={:.5} (gap {gap:.2e}), identity residuals {:.1e}/{:.1e} ({elapsed:.2?})",
                    ext.gradient_norm,
                    ext.exp_functional,
                    ext.value_1d,
                    ext.identities.energy_residual,
                    ext.identities.exp_residual
                ),
            }
        }
        Err(e) => Outcome {
            pass: false,
            detail: e.to_string(),
        },
    }
}

fn main() -> ExitCode {
    let mut reports = Vec::new();
    let criteria: Vec<(&str, Outcome)> = vec![
        ("1 geometric constants", constants()),
        ("2 homogeneity", homogeneity()),
        ("3 equimeasurability", equimeasurable()),
        ("4 composition identity", composition()),
        ("5 Polya-Szego", polya_szego()),
        ("6 reduction identities", reduction()),
        ("7 Moser problem", moser(&mut reports)),
    ];
    let mut all = criteria;
    all.push(("8 extremal pipeline", pipeline(&reports)));
    let mut failed = 0;
    for (name, outcome) in &all {
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {name}: {}", outcome.detail);
        failed += usize::from(!outcome.pass);
    }
    println!("acceptance: {} passed, {failed} failed", all.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
