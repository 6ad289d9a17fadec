//! Command-line front end: single-state analysis, two-copy concentration,
//! qutrit simplex sweeps, anomalous-relaxation scans, correlation-assisted
//! activation, randomness reports, and the self-verification harness.
//!
//! Machine output is compact JSON with numbers rounded to 12 significant
//! digits; `--pretty` switches to aligned human-readable tables. Exit
//! codes: 0 success, 1 verification failure, 2 parse or I/O error,
//! 3 state validation error, 4 domain error (out-of-range parameter,
//! unsupported dimension).

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use inconc::concentration::{
    delta_p, evolve_and_trace, is_bound, noneq_measure, optimal_unitary, simple_unitary,
    ConcentrationReport,
};
use inconc::correlations::{
    activation_delta, activation_demo, entanglement_advantage, gain_and_mutual_information,
    mpemba_compare, mpemba_scan, qutrit_grid, qutrit_optimal_marginals, von_neumann_entropy,
    MpembaComparison,
};
use inconc::linalg::ComplexMatrix;
use inconc::randomness::{guess_prob, randomness_gain, randomness_unitary};
use inconc::states::{BipartiteState, DensityMatrix};
use inconc::verify::{run as run_verify, FaultInjection, VerifyConfig};
use inconc::{tol, Error};

#[derive(Parser)]
#[command(
    name = "inconc",
    version,
    about = "Concentration of informational non-equilibrium for finite-dimensional quantum states"
)]
struct Cli {
    /// Loosen the numerical tolerances to at least this value.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Aligned human-readable output instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Non-equilibrium measure, entropy, and guessing probability of a state.
    Measure {
        /// JSON state file: {"dim": d, "matrix": [[{"re", "im"}, ..], ..]}
        /// or {"eigenvalues": [..]}.
        state_file: PathBuf,
    },
    /// Evolve two copies of a state and report the concentrated marginals.
    Concentrate {
        state_file: PathBuf,
        /// Which two-copy unitary to apply.
        #[arg(long, value_enum, default_value_t = UnitaryChoice::Optimal)]
        unitary: UnitaryChoice,
        /// Also write the full report, including the unitary and the
        /// evolved joint state, to this path.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Tabulate a qutrit surface over the spectrum simplex as CSV.
    SweepQutrit {
        /// Grid step per simplex edge, in (0, 0.5].
        #[arg(long)]
        step: f64,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Which surface to tabulate.
        #[arg(long, value_enum)]
        panel: Panel,
        /// Emit the whole simplex instead of the sorted sector.
        #[arg(long)]
        full_triangle: bool,
    },
    /// Compare concentrated outputs of diag(p, 1-p, 0) inputs.
    Mpemba {
        #[arg(long, requires = "p2", conflicts_with = "scan")]
        p1: Option<f64>,
        #[arg(long, requires = "p1", conflicts_with = "scan")]
        p2: Option<f64>,
        /// Scan p over [1/2, 1] with this step against the p = 1/2 reference.
        #[arg(long)]
        scan: Option<f64>,
    },
    /// Concentrate a correlated mixture of a purification with two
    /// uncorrelated copies.
    Activate {
        state_file: PathBuf,
        /// Weight of the purification in the mixture.
        #[arg(long, default_value_t = 1.0)]
        p: f64,
    },
    /// Guessing probability and the two-copy unitary that lowers it.
    Randomness { state_file: PathBuf },
    /// Run every self-verification suite against the independent oracles.
    Verify {
        /// Local dimensions the randomized suites draw from.
        #[arg(long, value_delimiter = ',', default_values_t = vec![2usize, 3, 4])]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
        /// Corrupt one analytic value to demonstrate the harness catches it.
        #[arg(long, hide = true, value_enum)]
        inject_fault: Option<FaultChoice>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum UnitaryChoice {
    /// The constructed maximizer of the marginal measure.
    Optimal,
    /// The fixed |1,0> <-> |0,2> swap; requires dimension >= 3.
    Simple,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Panel {
    /// Concentration gain of the A marginal.
    A,
    /// Measure gain of the partner B marginal.
    B,
    /// Mutual information created between the marginals.
    C,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FaultChoice {
    KyFan,
}

enum CmdError {
    Lib(Error),
    Io(std::io::Error),
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CmdError::Lib(e) => write!(f, "{e}"),
            CmdError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CmdError {
    fn from(e: Error) -> Self {
        CmdError::Lib(e)
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::Io(e)
    }
}

impl CmdError {
    fn exit_code(&self) -> i32 {
        match self {
            CmdError::Io(_) => 2,
            CmdError::Lib(e) => match e {
                Error::Parse(_) => 2,
                Error::NotHermitian { .. }
                | Error::TraceNotOne { .. }
                | Error::NotPositive { .. }
                | Error::NegativeProbability { .. }
                | Error::ProbabilitiesNotNormalized { .. }
                | Error::VectorNotNormalized { .. } => 3,
                _ => 4,
            },
        }
    }
}

fn main() {
    // Die quietly when the read end of a pipe closes, like any filter.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let code = match install_tolerances(&cli).and_then(|_| dispatch(cli)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    process::exit(code);
}

/// Applies `--tolerance`, falling back to the INCONC_TOLERANCE variable.
fn install_tolerances(cli: &Cli) -> Result<(), CmdError> {
    let floor = match cli.tolerance {
        Some(f) => Some(f),
        None => match std::env::var("INCONC_TOLERANCE") {
            Ok(text) => Some(text.trim().parse::<f64>().map_err(|_| {
                Error::Parse(format!("INCONC_TOLERANCE is not a number: {text:?}"))
            })?),
            Err(_) => None,
        },
    };
    if let Some(f) = floor {
        if !f.is_finite() || f < 0.0 {
            return Err(Error::ParameterOutOfRange {
                name: "tolerance",
                value: f,
                min: 0.0,
                max: f64::INFINITY,
            }
            .into());
        }
        tol::install(tol::loosened(f));
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<i32, CmdError> {
    let pretty = cli.pretty;
    match cli.command {
        Command::Measure { state_file } => cmd_measure(&state_file, pretty),
        Command::Concentrate {
            state_file,
            unitary,
            json,
        } => cmd_concentrate(&state_file, unitary, json.as_deref(), pretty),
        Command::SweepQutrit {
            step,
            out,
            panel,
            full_triangle,
        } => cmd_sweep_qutrit(step, out.as_deref(), panel, full_triangle),
        Command::Mpemba { p1, p2, scan } => cmd_mpemba(p1, p2, scan, pretty),
        Command::Activate { state_file, p } => cmd_activate(&state_file, p, pretty),
        Command::Randomness { state_file } => cmd_randomness(&state_file, pretty),
        Command::Verify {
            dims,
            trials,
            seed,
            inject_fault,
        } => cmd_verify(dims, trials, seed, inject_fault, pretty),
    }
}

/// Rounds to 12 significant digits so output is stable across runs.
fn sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x + 0.0;
    }
    format!("{x:.11e}")
        .parse()
        .expect("formatted float reparses")
}

fn sig12_vec(values: &[f64]) -> Vec<f64> {
    values.iter().map(|&x| sig12(x)).collect()
}

fn load_state(path: &Path) -> Result<DensityMatrix, CmdError> {
    let text = fs::read_to_string(path)?;
    Ok(DensityMatrix::from_json(&text)?)
}

fn print_json<T: Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string(value).expect("reports serialize cleanly")
    );
}

#[derive(Serialize)]
struct MeasureOut {
    #[serde(rename = "P")]
    measure: f64,
    spectrum: Vec<f64>,
    #[serde(rename = "S")]
    entropy: f64,
    p_guess: f64,
    bound: bool,
}

fn cmd_measure(state_file: &Path, pretty: bool) -> Result<i32, CmdError> {
    let rho = load_state(state_file)?;
    let out = MeasureOut {
        measure: sig12(noneq_measure(&rho)),
        spectrum: sig12_vec(rho.eigenvalues()),
        entropy: sig12(von_neumann_entropy(&rho)),
        p_guess: sig12(guess_prob(&rho)),
        bound: is_bound(&rho, tol::current().equality),
    };
    if pretty {
        println!("{:<12}{}", "measure", out.measure);
        println!("{:<12}{}", "spectrum", join_numbers(&out.spectrum));
        println!("{:<12}{}", "entropy", out.entropy);
        println!("{:<12}{}", "p_guess", out.p_guess);
        println!("{:<12}{}", "bound", out.bound);
    } else {
        print_json(&out);
    }
    Ok(0)
}

#[derive(Serialize)]
struct ConcentrateOut {
    delta_p: f64,
    p_before: f64,
    p_after: f64,
    sigma_a_spectrum: Vec<f64>,
    sigma_b_spectrum: Vec<f64>,
    mutual_information: f64,
}

fn cmd_concentrate(
    state_file: &Path,
    unitary: UnitaryChoice,
    json_out: Option<&Path>,
    pretty: bool,
) -> Result<i32, CmdError> {
    let rho = load_state(state_file)?;
    let u = match unitary {
        UnitaryChoice::Optimal => optimal_unitary(&rho, &rho)?,
        UnitaryChoice::Simple => simple_unitary(rho.dim())?,
    };
    let joint = BipartiteState::product(&rho, &rho);
    let report = evolve_and_trace(&joint, &u)?;
    let out = ConcentrateOut {
        delta_p: sig12(report.delta_p),
        p_before: sig12(report.p_before),
        p_after: sig12(report.p_after),
        sigma_a_spectrum: sig12_vec(report.sigma_a.eigenvalues()),
        sigma_b_spectrum: sig12_vec(report.sigma_b.eigenvalues()),
        mutual_information: sig12(report.mutual_information),
    };
    if let Some(path) = json_out {
        let full = full_concentration_json(&report)?;
        fs::write(
            path,
            serde_json::to_string_pretty(&full).expect("serializable"),
        )?;
    }
    if pretty {
        println!("{:<20}{}", "delta_p", out.delta_p);
        println!("{:<20}{}", "p_before", out.p_before);
        println!("{:<20}{}", "p_after", out.p_after);
        println!(
            "{:<20}{}",
            "sigma_a spectrum",
            join_numbers(&out.sigma_a_spectrum)
        );
        println!(
            "{:<20}{}",
            "sigma_b spectrum",
            join_numbers(&out.sigma_b_spectrum)
        );
        println!("{:<20}{}", "mutual information", out.mutual_information);
    } else {
        print_json(&out);
    }
    Ok(0)
}

fn matrix_json(m: &ComplexMatrix) -> serde_json::Value {
    let rows: Vec<Vec<serde_json::Value>> = (0..m.rows())
        .map(|r| {
            (0..m.cols())
                .map(|c| {
                    let z = m.get(r, c);
                    serde_json::json!({"re": z.re, "im": z.im})
                })
                .collect()
        })
        .collect();
    serde_json::json!(rows)
}

fn state_json(rho: &DensityMatrix) -> Result<serde_json::Value, CmdError> {
    serde_json::from_str(&rho.to_json())
        .map_err(|e| Error::Parse(format!("state serialization: {e}")).into())
}

fn full_concentration_json(report: &ConcentrationReport) -> Result<serde_json::Value, CmdError> {
    Ok(serde_json::json!({
        "delta_p": sig12(report.delta_p),
        "p_before": sig12(report.p_before),
        "p_after": sig12(report.p_after),
        "mutual_information": sig12(report.mutual_information),
        "sigma_a": state_json(&report.sigma_a)?,
        "sigma_b": state_json(&report.sigma_b)?,
        "sigma_ab": {
            "dim_a": report.sigma_ab.dim_a(),
            "dim_b": report.sigma_ab.dim_b(),
            "state": state_json(report.sigma_ab.joint())?,
        },
        "unitary": matrix_json(report.unitary.matrix()),
    }))
}

fn panel_value(panel: Panel, spectrum: &[f64; 3]) -> Result<f64, Error> {
    let rho = DensityMatrix::from_eigenvalues(spectrum)?;
    match panel {
        Panel::A => inconc::concentration::qutrit_delta_p(rho.spectrum()),
        Panel::B => {
            let (_, sigma_b) = qutrit_optimal_marginals(rho.spectrum())?;
            Ok(noneq_measure(&sigma_b) - noneq_measure(&rho))
        }
        Panel::C => gain_and_mutual_information(rho.spectrum()).map(|(_, mi)| mi),
    }
}

fn cmd_sweep_qutrit(
    step: f64,
    out: Option<&Path>,
    panel: Panel,
    full_triangle: bool,
) -> Result<i32, CmdError> {
    if !(step > 0.0 && step <= 0.5) {
        return Err(Error::ParameterOutOfRange {
            name: "step",
            value: step,
            min: f64::MIN_POSITIVE,
            max: 0.5,
        }
        .into());
    }
    let divisions = (1.0 / step).round() as usize;
    let grid = qutrit_grid(divisions, full_triangle)?;
    // Rows evaluate in parallel; collect preserves grid order.
    let values: Vec<f64> = grid
        .par_iter()
        .map(|row| panel_value(panel, row))
        .collect::<Result<_, _>>()?;
    let mut csv = String::with_capacity(32 * (grid.len() + 1));
    csv.push_str("a0,a1,a2,value\n");
    for (row, value) in grid.iter().zip(values.iter()) {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            fmt_number(row[0]),
            fmt_number(row[1]),
            fmt_number(row[2]),
            fmt_number(*value),
        ));
    }
    match out {
        Some(path) => fs::write(path, csv)?,
        None => {
            std::io::stdout().write_all(csv.as_bytes())?;
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct MpembaRow {
    p1: f64,
    p2: f64,
    measure_in_1: f64,
    measure_in_2: f64,
    measure_out_1: f64,
    measure_out_2: f64,
    inversion: bool,
}

impl MpembaRow {
    fn from(c: &MpembaComparison) -> Self {
        MpembaRow {
            p1: sig12(c.p1),
            p2: sig12(c.p2),
            measure_in_1: sig12(c.measure_in_1),
            measure_in_2: sig12(c.measure_in_2),
            measure_out_1: sig12(c.measure_out_1),
            measure_out_2: sig12(c.measure_out_2),
            inversion: c.inversion,
        }
    }
}

#[derive(Serialize)]
struct MpembaScanOut {
    rows: Vec<MpembaRow>,
    /// Smallest and largest scanned p showing an inversion, when any.
    inversion_window: Option<[f64; 2]>,
}

fn cmd_mpemba(
    p1: Option<f64>,
    p2: Option<f64>,
    scan: Option<f64>,
    pretty: bool,
) -> Result<i32, CmdError> {
    match (p1, p2, scan) {
        (Some(p1), Some(p2), None) => {
            let row = MpembaRow::from(&mpemba_compare(p1, p2)?);
            if pretty {
                print_mpemba_table(std::slice::from_ref(&row));
            } else {
                print_json(&row);
            }
            Ok(0)
        }
        (None, None, Some(step)) => {
            let rows: Vec<MpembaRow> = mpemba_scan(step)?.iter().map(MpembaRow::from).collect();
            let inverted: Vec<f64> = rows.iter().filter(|r| r.inversion).map(|r| r.p1).collect();
            let window = match (inverted.first(), inverted.last()) {
                (Some(&lo), Some(&hi)) => Some([lo, hi]),
                _ => None,
            };
            let out = MpembaScanOut {
                rows,
                inversion_window: window,
            };
            if pretty {
                print_mpemba_table(&out.rows);
                match out.inversion_window {
                    Some([lo, hi]) => println!("inversion window: [{lo}, {hi}]"),
                    None => println!("inversion window: none"),
                }
            } else {
                print_json(&out);
            }
            Ok(0)
        }
        _ => Err(Error::Parse("provide either --p1 with --p2, or --scan".to_string()).into()),
    }
}

fn print_mpemba_table(rows: &[MpembaRow]) {
    println!(
        "{:<8}{:<8}{:<14}{:<14}{:<14}{:<14}inversion",
        "p1", "p2", "in_1", "in_2", "out_1", "out_2"
    );
    for r in rows {
        println!(
            "{:<8}{:<8}{:<14}{:<14}{:<14}{:<14}{}",
            r.p1,
            r.p2,
            r.measure_in_1,
            r.measure_in_2,
            r.measure_out_1,
            r.measure_out_2,
            r.inversion
        );
    }
}

#[derive(Serialize)]
struct ActivateOut {
    p: f64,
    delta_p: f64,
    activation_delta: f64,
    entanglement_advantage: f64,
    /// Measure gain actually achieved by concentrating the mixture.
    activated_gain: f64,
}

fn cmd_activate(state_file: &Path, p: f64, pretty: bool) -> Result<i32, CmdError> {
    let rho = load_state(state_file)?;
    let joint = BipartiteState::purified_mixture(p, &rho)?;
    let demo = activation_demo(&joint)?;
    let out = ActivateOut {
        p,
        delta_p: sig12(delta_p(&rho)),
        activation_delta: sig12(activation_delta(&rho)),
        entanglement_advantage: sig12(entanglement_advantage(&rho)),
        activated_gain: sig12(demo.delta_p),
    };
    if pretty {
        println!("{:<24}{}", "p", out.p);
        println!("{:<24}{}", "delta_p", out.delta_p);
        println!("{:<24}{}", "activation_delta", out.activation_delta);
        println!(
            "{:<24}{}",
            "entanglement_advantage", out.entanglement_advantage
        );
        println!("{:<24}{}", "activated_gain", out.activated_gain);
    } else {
        print_json(&out);
    }
    Ok(0)
}

#[derive(Serialize)]
struct RandomnessOut {
    constructed: bool,
    p_guess_before: f64,
    p_guess_after: f64,
    p_before: f64,
    p_after: f64,
    delta_star: f64,
    source_pair: [usize; 2],
    target_level: usize,
    output_eigenvalues: Vec<f64>,
    /// Drop in tr sqrt between input and improved marginal.
    gain: f64,
}

#[derive(Serialize)]
struct NoConstructionOut {
    constructed: bool,
    delta_p: f64,
    p_guess: f64,
}

fn cmd_randomness(state_file: &Path, pretty: bool) -> Result<i32, CmdError> {
    let rho = load_state(state_file)?;
    match randomness_unitary(&rho) {
        Ok(report) => {
            let gain = randomness_gain(&rho)?;
            let out = RandomnessOut {
                constructed: true,
                p_guess_before: sig12(report.p_guess_before),
                p_guess_after: sig12(report.p_guess_after),
                p_before: sig12(report.p_before),
                p_after: sig12(report.p_after),
                delta_star: sig12(report.delta_star),
                source_pair: [report.source_pair.0, report.source_pair.1],
                target_level: report.target_level,
                output_eigenvalues: sig12_vec(&report.output_eigenvalues),
                gain: sig12(gain),
            };
            if pretty {
                println!("{:<20}{}", "constructed", out.constructed);
                println!("{:<20}{}", "p_guess_before", out.p_guess_before);
                println!("{:<20}{}", "p_guess_after", out.p_guess_after);
                println!("{:<20}{}", "p_before", out.p_before);
                println!("{:<20}{}", "p_after", out.p_after);
                println!("{:<20}{}", "delta_star", out.delta_star);
                println!(
                    "{:<20}({}, {}) -> (0, {})",
                    "swap", out.source_pair[0], out.source_pair[1], out.target_level
                );
                println!(
                    "{:<20}{}",
                    "output spectrum",
                    join_numbers(&out.output_eigenvalues)
                );
                println!("{:<20}{}", "gain", out.gain);
            } else {
                print_json(&out);
            }
            Ok(0)
        }
        Err(Error::NoConstruction { delta_p: dp, .. }) => {
            let out = NoConstructionOut {
                constructed: false,
                delta_p: sig12(dp),
                p_guess: sig12(guess_prob(&rho)),
            };
            if pretty {
                println!("{:<20}{}", "constructed", out.constructed);
                println!("{:<20}{}", "delta_p", out.delta_p);
                println!("{:<20}{}", "p_guess", out.p_guess);
            } else {
                print_json(&out);
            }
            Ok(0)
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Serialize)]
struct SuiteOut {
    name: String,
    passed: bool,
    max_deviation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<String>,
}

#[derive(Serialize)]
struct VerifyOut {
    seed: u64,
    passed: bool,
    suites: Vec<SuiteOut>,
}

fn cmd_verify(
    dims: Vec<usize>,
    trials: usize,
    seed: u64,
    inject_fault: Option<FaultChoice>,
    pretty: bool,
) -> Result<i32, CmdError> {
    for &d in &dims {
        if d < 2 {
            return Err(Error::DimensionTooSmall { dim: d, min: 2 }.into());
        }
    }
    let config = VerifyConfig {
        dims,
        trials,
        seed,
        fault: inject_fault.map(|FaultChoice::KyFan| FaultInjection::KyFan),
    };
    let summary = run_verify(&config);
    let out = VerifyOut {
        seed: summary.seed,
        passed: summary.passed,
        suites: summary
            .suites
            .iter()
            .map(|s| SuiteOut {
                name: s.name.to_string(),
                passed: s.passed,
                max_deviation: sig12(s.max_deviation),
                detail: s.detail.clone(),
            })
            .collect(),
    };
    if pretty {
        for s in &out.suites {
            let status = if s.passed { "pass" } else { "FAIL" };
            println!("{:<22}{:<6}{:e}", s.name, status, s.max_deviation);
            if let Some(detail) = &s.detail {
                println!("    {detail}");
            }
        }
        println!("overall: {}", if out.passed { "pass" } else { "FAIL" });
    } else {
        print_json(&out);
    }
    Ok(if out.passed { 0 } else { 1 })
}

/// Shortest decimal form of a 12-significant-digit rounding.
fn fmt_number(x: f64) -> String {
    format!("{}", sig12(x))
}

fn join_numbers(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| fmt_number(*v))
        .collect::<Vec<_>>()
        .join(", ")
}
