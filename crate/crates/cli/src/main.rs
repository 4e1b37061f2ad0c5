//! `wmoser`: reproducible runs of the weighted-moser library.
//!
//! Each subcommand validates all of its inputs first, computes, and only then
//! writes `<subcommand>_<label>.json` plus its CSV artifacts into `--out`.
//! Exit codes: 0 on success, 1 when a computation fails (for example the optimizer
//! does not converge; the partial report is still written), 2 on invalid input.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use weighted_moser::fixtures::Fixture;
use weighted_moser::io::{self, Encoding};
use weighted_moser::moser::{build_extremal, optimize, supremum_estimate, Init, MoserProblem, MoserReport};
use weighted_moser::quadrature::Estimate;
use weighted_moser::rearrange::{
    default_thresholds, equimeasurability, gradient_seminorm, composition_integral, polya_szego_compare,
    radial_rearrangement, PolyaSzegoReport, DEFAULT_RADIAL_NODES, DEFAULT_THRESHOLDS,
};
use weighted_moser::reduction::{graded_grid, reduce, ReductionReport, TRUNCATION_FACTOR};
use weighted_moser::weights::{
    ball_measure, perimeter_quadrature, unit_ball_measure_qmc, unit_ball_measure_quadrature_seeded, DEFAULT_SEED,
};
use weighted_moser::{Error, GeometricConstants, GridFunction, OptimizerSettings, WeightSpec};

#[derive(Parser)]
#[command(name = "wmoser", version, about = "Weighted rearrangements and the Moser problem on cones")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Output directory (must exist)
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Label in the output file names
    #[arg(long, default_value = "run")]
    label: String,
    /// Seed for randomized quadrature
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args, Clone)]
struct WeightArgs {
    /// Weight spec JSON: {"d": .., "active": [..], "exponents": [..]}, 1-based indices
    #[arg(long, conflicts_with_all = ["dim", "active", "exponents"])]
    weight: Option<PathBuf>,
    /// Ambient dimension d
    #[arg(short = 'd', long = "dim")]
    dim: Option<usize>,
    /// Active coordinates J of the cone, 1-based, comma separated
    #[arg(long, value_delimiter = ',')]
    active: Vec<usize>,
    /// Exponents A_j of w(x) = prod x_j^{A_j}, one per active coordinate
    #[arg(short = 'A', long, value_delimiter = ',', allow_hyphen_values = true)]
    exponents: Vec<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Geometric constants C_D, P_w, D and the Moser constant of a weight
    Constants {
        #[command(flatten)]
        weight: WeightArgs,
        #[command(flatten)]
        common: Common,
        /// Quadrature budget for the independent estimates
        #[arg(long, default_value_t = 1_000_000)]
        budget: usize,
    },
    /// Radial rearrangement of a sampled function, with equimeasurability and
    /// Polya-Szego reports
    Rearrange {
        #[command(flatten)]
        weight: WeightArgs,
        #[command(flatten)]
        common: Common,
        /// Grid header JSON of the input function
        #[arg(long)]
        input: PathBuf,
        /// Radial nodes of the profile (capped by the input resolution)
        #[arg(long, default_value_t = DEFAULT_RADIAL_NODES)]
        radial_nodes: usize,
        /// Thresholds of the distribution comparison
        #[arg(long, default_value_t = DEFAULT_THRESHOLDS)]
        thresholds: usize,
    },
    /// One-dimensional reduction of a radial profile and both identities
    Reduce {
        #[command(flatten)]
        weight: WeightArgs,
        #[command(flatten)]
        common: Common,
        /// Radial profile CSV with columns r,U
        #[arg(long)]
        profile: PathBuf,
        /// Exponential coefficient as a fraction beta of the Moser constant
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        /// Truncation T of the t-axis (default 40 D)
        #[arg(short = 'T', long)]
        truncation: Option<f64>,
        /// Cells N of the t-grid
        #[arg(short = 'N', long, default_value_t = 2048)]
        cells: usize,
    },
    /// Maximise int exp(beta phi^{q'} - t) dt subject to int (phi')^q dt <= 1
    Optimize {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        problem: ProblemArgs,
        /// Refinement schedule of N values, solved in order with warm starts
        #[arg(long, value_delimiter = ',')]
        schedule: Vec<usize>,
    },
    /// Rearrange, reduce, check the identities and compare the exponential
    /// functional of the normalised input with the optimal value at q = D
    Verify {
        #[command(flatten)]
        weight: WeightArgs,
        #[command(flatten)]
        common: Common,
        /// Grid header JSON of the input function
        #[arg(long, conflicts_with = "fixture")]
        input: Option<PathBuf>,
        /// Built-in fixture instead of an input file
        #[arg(long, value_enum)]
        fixture: Option<FixtureName>,
        /// Nodes per axis when sampling a fixture
        #[arg(long, default_value_t = 128)]
        nodes: usize,
        /// Exponential coefficient as a fraction beta of the Moser constant
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        /// Cells N of the optimizer grid
        #[arg(short = 'N', long, default_value_t = 256)]
        cells: usize,
        /// Cells of the reduction grid
        #[arg(long, default_value_t = 2048)]
        reduction_cells: usize,
        /// Nodes per axis of the lifted maximiser
        #[arg(long, default_value_t = 2048)]
        extremal_nodes: usize,
    },
    /// Sample a built-in test function and write it as a grid file
    Fixture {
        #[command(flatten)]
        weight: WeightArgs,
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        name: FixtureName,
        /// Nodes per axis
        #[arg(long, default_value_t = 128)]
        nodes: usize,
        #[arg(long, value_enum, default_value = "csv")]
        encoding: EncodingArg,
    },
}

#[derive(Args)]
struct ProblemArgs {
    /// Exponent q of the constraint, q > 1
    #[arg(short = 'q', long, default_value_t = 2.0)]
    q: f64,
    /// Coefficient beta in (0, 1] of the exponential
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Truncation T of the t-axis (default 40 q)
    #[arg(short = 'T', long)]
    truncation: Option<f64>,
    /// Cells N of the t-grid
    #[arg(short = 'N', long, default_value_t = 256)]
    cells: usize,
    /// Iteration cap of the ascent
    #[arg(long, default_value_t = OptimizerSettings::default().max_iterations)]
    max_iterations: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum FixtureName {
    RadialBump,
    ShiftedBump,
    TwoBump,
}

impl FixtureName {
    fn fixture(self) -> Fixture {
        match self {
            FixtureName::RadialBump => Fixture::RadialBump,
            FixtureName::ShiftedBump => Fixture::ShiftedBump,
            FixtureName::TwoBump => Fixture::TwoBump,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EncodingArg {
    Csv,
    F64le,
}

enum Failure {
    Invalid(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotConverged { .. } | Error::TruncationNotConverged { .. } | Error::Io(_) => {
                Failure::Runtime(e.to_string())
            }
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Invalid(msg.into())
}

fn load_weight(args: &WeightArgs) -> Outcome<WeightSpec> {
    if let Some(path) = &args.weight {
        return io::read_weight(path).map_err(|e| invalid(format!("{}: {e}", path.display())));
    }
    let dim = args
        .dim
        .ok_or_else(|| invalid("give either --weight or --dim with --active and --exponents"))?;
    if args.active.contains(&0) {
        return Err(invalid("active coordinates are 1-based"));
    }
    let active = args.active.iter().map(|j| j - 1).collect();
    Ok(WeightSpec::new(dim, active, args.exponents.clone())?)
}

fn check_out(common: &Common) -> Outcome {
    if !common.out.is_dir() {
        return Err(invalid(format!("output directory {} does not exist", common.out.display())));
    }
    if common.label.is_empty() || common.label.contains(['/', '\\']) {
        return Err(invalid("label must be a nonempty file-name fragment"));
    }
    Ok(())
}

fn check_file(path: &Path) -> Outcome {
    if path.is_file() {
        Ok(())
    } else {
        Err(invalid(format!("{} does not exist", path.display())))
    }
}

fn load_grid(path: &Path, spec: &WeightSpec) -> Outcome<GridFunction> {
    check_file(path)?;
    let f = io::read_grid(path)?;
    if f.dim() != spec.dim() {
        return Err(invalid(format!("grid has dimension {}, weight has d = {}", f.dim(), spec.dim())));
    }
    f.check_in_cone(spec)?;
    f.check_compact_support(spec)?;
    if f.is_zero() {
        return Err(Error::ZeroFunction.into());
    }
    Ok(f)
}

fn output(common: &Common, command: &str, suffix: &str, ext: &str) -> PathBuf {
    common.out.join(format!("{command}_{}{suffix}.{ext}", common.label))
}

fn write_json<T: Serialize>(common: &Common, command: &str, value: &T) -> Outcome {
    io::write_json(&output(common, command, "", "json"), value).map_err(|e| Failure::Runtime(e.to_string()))
}

fn runtime(e: Error) -> Failure {
    Failure::Runtime(e.to_string())
}

#[derive(Serialize)]
struct ConstantsOut {
    weight: WeightSpec,
    #[serde(flatten)]
    constants: GeometricConstants,
    seed: u64,
    budget: usize,
    quadrature_c_d: Estimate,
    qmc_c_d: Estimate,
    quadrature_p_w: Estimate,
}

fn cmd_constants(weight: &WeightArgs, common: &Common, budget: usize) -> Outcome {
    let spec = load_weight(weight)?;
    check_out(common)?;
    let quadrature_c_d = unit_ball_measure_quadrature_seeded(&spec, budget, common.seed)?;
    let qmc_c_d = unit_ball_measure_qmc(&spec, budget, common.seed)?;
    let quadrature_p_w = perimeter_quadrature(&spec, budget, common.seed)?;
    let out = ConstantsOut {
        constants: GeometricConstants::from_spec(&spec),
        weight: spec,
        seed: common.seed,
        budget,
        quadrature_c_d,
        qmc_c_d,
        quadrature_p_w,
    };
    write_json(common, "constants", &out)
}

#[derive(Serialize)]
struct RearrangeOut {
    weight: WeightSpec,
    constants: GeometricConstants,
    radius: f64,
    radial_nodes: usize,
    sup_relative: f64,
    thresholds: Vec<f64>,
    original: Vec<f64>,
    rearranged: Vec<f64>,
    polya_szego: Vec<PolyaSzegoReport>,
}

fn cmd_rearrange(weight: &WeightArgs, common: &Common, input: &Path, radial_nodes: usize, thresholds: usize) -> Outcome {
    let spec = load_weight(weight)?;
    check_out(common)?;
    let f = load_grid(input, &spec)?;
    if radial_nodes < 2 || thresholds == 0 {
        return Err(invalid("need at least two radial nodes and one threshold"));
    }
    let consts = GeometricConstants::from_spec(&spec);
    let profile = radial_rearrangement(&f, &spec, radial_nodes)?;
    let taus = default_thresholds(&f, thresholds)?;
    let eq = equimeasurability(&f, &spec, &profile, &taus)?;
    let polya_szego = [1.0, 2.0, consts.dimension]
        .into_iter()
        .map(|p| polya_szego_compare(&f, &profile, &spec, p))
        .collect::<Result<Vec<_>, _>>()?;
    let out = RearrangeOut {
        weight: spec,
        constants: consts,
        radius: profile.support_radius(),
        radial_nodes: profile.radii().len(),
        sup_relative: eq.sup_relative,
        thresholds: eq.thresholds,
        original: eq.original,
        rearranged: eq.rearranged,
        polya_szego,
    };
    io::write_radial_profile(&output(common, "rearrange", "", "csv"), &profile).map_err(runtime)?;
    write_json(common, "rearrange", &out)
}

#[derive(Serialize)]
struct ReduceOut {
    weight: WeightSpec,
    constants: GeometricConstants,
    cells: usize,
    #[serde(flatten)]
    report: ReductionReport,
}

fn check_beta(beta: f64) -> Outcome {
    if beta > 0.0 && beta <= 1.0 {
        Ok(())
    } else {
        Err(Error::BetaOutOfRange(beta).into())
    }
}

fn reduction_grid(consts: &GeometricConstants, truncation: Option<f64>, cells: usize) -> Outcome<Vec<f64>> {
    let t = truncation.unwrap_or(TRUNCATION_FACTOR * consts.dimension);
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::NonPositiveTruncation(t).into());
    }
    if cells < 16 {
        return Err(Error::TooFewCells(cells).into());
    }
    Ok(graded_grid(t, cells)?)
}

fn cmd_reduce(
    weight: &WeightArgs,
    common: &Common,
    profile: &Path,
    beta: f64,
    truncation: Option<f64>,
    cells: usize,
) -> Outcome {
    let spec = load_weight(weight)?;
    check_out(common)?;
    check_beta(beta)?;
    check_file(profile)?;
    let u = io::read_radial_profile(profile)?;
    if u.is_zero() {
        return Err(Error::ZeroFunction.into());
    }
    let consts = GeometricConstants::from_spec(&spec);
    let times = reduction_grid(&consts, truncation, cells)?;
    let (phi, report) = reduce(&u, &consts, &times, beta * consts.moser_constant)?;
    io::write_one_d_profile(&output(common, "reduce", "", "csv"), &phi).map_err(runtime)?;
    write_json(
        common,
        "reduce",
        &ReduceOut {
            weight: spec,
            constants: consts,
            cells,
            report,
        },
    )
}

#[derive(Serialize)]
struct OptimizeOut {
    #[serde(flatten)]
    report: MoserReport,
    /// Extrapolated supremum over the schedule.
    extrapolated: Option<f64>,
    monotone: Option<bool>,
    error: Option<String>,
}

fn problem_from(args: &ProblemArgs) -> Outcome<MoserProblem> {
    let settings = OptimizerSettings {
        max_iterations: args.max_iterations,
        ..OptimizerSettings::default()
    };
    Ok(MoserProblem::new(args.q, args.beta, args.truncation, args.cells)?.with_settings(settings))
}

/// The report to write and, for a failed run, the error it failed with.
fn solve(problem: &MoserProblem, schedule: &[usize]) -> Outcome<(OptimizeOut, Option<String>)> {
    let out = |report, extrapolated, monotone, error: Option<String>| OptimizeOut {
        report,
        extrapolated,
        monotone,
        error,
    };
    let result = if schedule.is_empty() {
        optimize(problem, Init::Auto).map(|report| out(report, None, None, None))
    } else {
        supremum_estimate(problem, schedule).map(|est| {
            let mut report = est.top.expect("nonempty schedule");
            report.history = est.values;
            out(report, Some(est.estimate), Some(est.monotone), None)
        })
    };
    match result {
        Ok(o) => Ok((o, None)),
        Err(e) => {
            let msg = e.to_string();
            match e {
                Error::NotConverged { partial, .. } | Error::TruncationNotConverged { partial, .. } => {
                    Ok((out(*partial, None, None, Some(msg.clone())), Some(msg)))
                }
                e => Err(e.into()),
            }
        }
    }
}

fn cmd_optimize(common: &Common, args: &ProblemArgs, schedule: &[usize]) -> Outcome {
    check_out(common)?;
    let problem = problem_from(args)?;
    if !schedule.is_empty() {
        if !schedule.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::InvalidSchedule.into());
        }
        problem.with_cells(schedule[0])?;
    }
    let (out, failure) = solve(&problem, schedule)?;
    io::write_one_d_profile(&output(common, "optimize", "", "csv"), out.report.profile()).map_err(runtime)?;
    write_json(common, "optimize", &out)?;
    match failure {
        Some(msg) => Err(Failure::Runtime(msg)),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct VerifyOut {
    weight: WeightSpec,
    constants: GeometricConstants,
    source: String,
    beta: f64,
    /// `||grad f||_{D,mu}` of the input; the input is divided by it.
    input_gradient_norm: f64,
    equimeasurability: f64,
    polya_szego: PolyaSzegoReport,
    /// `(1/mu(spt f)) int exp(a |f|^{D'}) dmu` of the normalised input on its grid.
    exp_grid: f64,
    identities: ReductionReport,
    /// Optimal value of the one-dimensional problem at `q = D`.
    supremum: f64,
    supremum_converged: bool,
    /// `exp_1d <= F*` up to the identity residual.
    bounded_by_supremum: bool,
    extremal: weighted_moser::moser::Extremal,
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    weight: &WeightArgs,
    common: &Common,
    input: Option<&Path>,
    fixture: Option<FixtureName>,
    nodes: usize,
    beta: f64,
    cells: usize,
    reduction_cells: usize,
    extremal_nodes: usize,
) -> Outcome {
    let spec = load_weight(weight)?;
    check_out(common)?;
    check_beta(beta)?;
    let consts = GeometricConstants::from_spec(&spec);
    let problem = MoserProblem::new(consts.dimension, beta, None, cells)?;
    let times = reduction_grid(&consts, None, reduction_cells)?;
    let (f, source) = match (input, fixture) {
        (Some(path), None) => (load_grid(path, &spec)?, path.display().to_string()),
        (None, Some(name)) => {
            if nodes < 8 {
                return Err(invalid("need at least 8 nodes per axis"));
            }
            (name.fixture().sample(&spec, nodes)?, name.fixture().name().to_string())
        }
        _ => return Err(invalid("give exactly one of --input and --fixture")),
    };
    if extremal_nodes < 8 {
        return Err(invalid("need at least 8 extremal nodes per axis"));
    }

    let input_gradient_norm = gradient_seminorm(&f, &spec, consts.dimension)?;
    if input_gradient_norm == 0.0 {
        return Err(Error::ZeroFunction.into());
    }
    let values: Vec<f64> = f.values().iter().map(|v| v / input_gradient_norm).collect();
    let f = GridFunction::new(f.lower().to_vec(), f.upper().to_vec(), f.shape().to_vec(), values)?;

    let profile = radial_rearrangement(&f, &spec, DEFAULT_RADIAL_NODES)?;
    let taus = default_thresholds(&f, DEFAULT_THRESHOLDS)?;
    let equi = equimeasurability(&f, &spec, &profile, &taus)?.sup_relative;
    let polya_szego = polya_szego_compare(&f, &profile, &spec, consts.dimension)?;
    let a = beta * consts.moser_constant;
    let dp = consts.conjugate();
    let excess = composition_integral(&f, &spec, |s| (a * s.powf(dp)).exp_m1())?;
    let exp_grid = 1.0 + excess / ball_measure(&consts, profile.support_radius())?;
    let (phi, identities) = reduce(&profile, &consts, &times, a)?;

    let (report, converged) = match optimize(&problem, Init::Auto) {
        Ok(r) => (r, true),
        Err(Error::NotConverged { partial, .. }) | Err(Error::TruncationNotConverged { partial, .. }) => {
            (*partial, false)
        }
        Err(e) => return Err(e.into()),
    };
    let extremal = build_extremal(&report, &spec, &consts, profile.support_radius(), extremal_nodes)?;
    let slack = identities.exp_residual.max(1e-9);
    let out = VerifyOut {
        weight: spec,
        constants: consts,
        source,
        beta,
        input_gradient_norm,
        equimeasurability: equi,
        polya_szego,
        exp_grid,
        identities,
        supremum: report.value,
        supremum_converged: converged,
        bounded_by_supremum: identities.exp_1d <= report.value * (1.0 + slack),
        extremal,
    };
    io::write_radial_profile(&output(common, "verify", "_profile", "csv"), &profile).map_err(runtime)?;
    io::write_one_d_profile(&output(common, "verify", "_phi", "csv"), &phi).map_err(runtime)?;
    write_json(common, "verify", &out)?;
    if converged {
        Ok(())
    } else {
        Err(Failure::Runtime("optimizer did not converge".into()))
    }
}

fn cmd_fixture(weight: &WeightArgs, common: &Common, name: FixtureName, nodes: usize, encoding: EncodingArg) -> Outcome {
    let spec = load_weight(weight)?;
    check_out(common)?;
    if nodes < 2 {
        return Err(invalid("need at least two nodes per axis"));
    }
    let f = name.fixture().sample(&spec, nodes)?;
    let encoding = match encoding {
        EncodingArg::Csv => Encoding::Csv,
        EncodingArg::F64le => Encoding::F64le,
    };
    io::write_grid(&f, &output(common, "fixture", "", "json"), encoding).map_err(runtime)
}

fn run(cli: Cli) -> Outcome {
    match &cli.command {
        Command::Constants { weight, common, budget } => cmd_constants(weight, common, *budget),
        Command::Rearrange {
            weight,
            common,
            input,
            radial_nodes,
            thresholds,
        } => cmd_rearrange(weight, common, input, *radial_nodes, *thresholds),
        Command::Reduce {
            weight,
            common,
            profile,
            beta,
            truncation,
            cells,
        } => cmd_reduce(weight, common, profile, *beta, *truncation, *cells),
        Command::Optimize {
            common,
            problem,
            schedule,
        } => cmd_optimize(common, problem, schedule),
        Command::Verify {
            weight,
            common,
            input,
            fixture,
            nodes,
            beta,
            cells,
            reduction_cells,
            extremal_nodes,
        } => cmd_verify(
            weight,
            common,
            input.as_deref(),
            *fixture,
            *nodes,
            *beta,
            *cells,
            *reduction_cells,
            *extremal_nodes,
        ),
        Command::Fixture {
            weight,
            common,
            name,
            nodes,
            encoding,
        } => cmd_fixture(weight, common, *name, *nodes, *encoding),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
