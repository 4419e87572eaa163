#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ergokit::battery::passive_state;
use ergokit::ensemble::{
    brute_force_oracle, build_level_table, curve_with, largest_feasible_n, passive_energy_per_copy, EnsembleConfig,
};
use ergokit::gibbs::thermodynamic_bound_report;
use ergokit::protocol::{evolve, ControlSchedule, Register};
use serde::Serialize;

mod input;

use input::{load_problem, load_schedule, InputError};

/// Work extraction from finite-level quantum batteries.
///
/// Exit status: 2 for unreadable or invalid input, 3 for numerical failures
/// and dimension mismatches, 4 when the enumeration cap is hit, 5 when the
/// oracle disagrees. The composition cap can be raised with
/// ERGOKIT_MAX_COMPOSITIONS.
#[derive(Parser)]
#[command(name = "ergokit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single-copy ergotropy and the entropy-matched thermodynamic bound.
    Ergotropy {
        /// Problem file (JSON).
        file: PathBuf,
        /// Entropy-matching tolerance in nats.
        #[arg(long, default_value = "1e-10")]
        tol: f64,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Per-copy passive energy e(n) for n = 1..n_max, written as CSV.
    Curve {
        file: PathBuf,
        #[arg(long)]
        n_max: usize,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        /// Entropy-matching tolerance for the asymptote, in nats.
        #[arg(long, default_value = "1e-10")]
        tol: f64,
    },
    /// Evolve the state under a piecewise-constant control schedule.
    Simulate {
        file: PathBuf,
        /// Schedule file: JSON array of {duration, control: {re, im}}.
        schedule: PathBuf,
        /// Number of battery copies the schedule acts on.
        #[arg(long, default_value_t = 1)]
        copies: usize,
        /// Hermiticity tolerance for controls.
        #[arg(long, default_value = "1e-10")]
        tol: f64,
    },
    /// Compare the compressed e(n) with brute-force enumeration of all d^n levels.
    Oracle {
        file: PathBuf,
        #[arg(short)]
        n: usize,
        /// Largest accepted absolute difference.
        #[arg(long, default_value = "1e-9")]
        tol: f64,
    },
}

enum Failure {
    Input(String),
    Numeric(String),
    Cap(String),
    Mismatch(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Numeric(_) => 3,
            Failure::Cap(_) => 4,
            Failure::Mismatch(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Numeric(m) | Failure::Cap(m) | Failure::Mismatch(m) => m,
        }
    }
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e.0)
    }
}

impl From<ergokit::Error> for Failure {
    fn from(e: ergokit::Error) -> Self {
        match e {
            ergokit::Error::CapExceeded { .. } => Failure::Cap(e.to_string()),
            ergokit::Error::DimensionMismatch { .. } => Failure::Numeric(e.to_string()),
            _ if e.is_validation() => Failure::Input(e.to_string()),
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

fn check_tol(tol: f64) -> Result<(), Failure> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Failure::Input(format!("--tol must be positive and finite, got {tol}")))
    }
}

fn config() -> Result<EnsembleConfig, Failure> {
    EnsembleConfig::from_env().map_err(|e| Failure::Input(e.to_string()))
}

#[derive(Serialize)]
struct ErgotropyJson<'a> {
    labels: &'a [String],
    initial_energy: f64,
    passive_populations: &'a [f64],
    passive_energy: f64,
    ergotropy: f64,
    thermodynamic_bound: f64,
    beta_bar: f64,
    gibbs_energy: f64,
    bound_gap: f64,
}

fn cmd_ergotropy(file: PathBuf, tol: f64, json: bool) -> Result<(), Failure> {
    check_tol(tol)?;
    let p = load_problem(&file)?;
    let report = passive_state(&p.state, &p.battery)?;
    let bound = thermodynamic_bound_report(&p.state, &p.battery, tol)?;
    let gap = bound.bound - report.ergotropy;
    if json {
        let out = ErgotropyJson {
            labels: &p.labels,
            initial_energy: report.initial_energy,
            passive_populations: &report.passive_populations,
            passive_energy: report.passive_energy,
            ergotropy: report.ergotropy,
            thermodynamic_bound: bound.bound,
            beta_bar: bound.gibbs.beta,
            gibbs_energy: bound.gibbs.gibbs_energy,
            bound_gap: gap,
        };
        println!(
            "{}",
            serde_json::to_string_pretty(&out).map_err(|e| Failure::Numeric(e.to_string()))?
        );
        return Ok(());
    }
    println!("initial energy       {:.12}", report.initial_energy);
    println!("passive spectrum");
    for ((label, e), p) in p
        .labels
        .iter()
        .zip(p.battery.energies())
        .zip(&report.passive_populations)
    {
        println!("  {label:>8}  eps = {e:<12}  p = {p:.12}");
    }
    println!("passive energy       {:.12}", report.passive_energy);
    println!("ergotropy            {:.12}", report.ergotropy);
    println!("thermodynamic bound  {:.12}", bound.bound);
    let beta = if bound.gibbs.saturated {
        format!("{:.12} (saturated)", bound.gibbs.beta)
    } else {
        format!("{:.12}", bound.gibbs.beta)
    };
    println!("beta_bar             {beta}");
    println!("bound gap            {gap:.12}");
    Ok(())
}

fn cmd_curve(file: PathBuf, n_max: usize, out: PathBuf, tol: f64) -> Result<(), Failure> {
    check_tol(tol)?;
    if n_max == 0 {
        return Err(Failure::Input("--n-max must be at least 1".into()));
    }
    let p = load_problem(&file)?;
    let config = config()?;
    let feasible = n_max.min(largest_feasible_n(p.battery.dim(), config.max_compositions));

    let mut csv = String::from("n,e_n,w_n,asymptote,gap\n");
    let mut summary = None;
    if feasible > 0 {
        let c = curve_with(&p.state, &p.battery, feasible, &config, tol)?;
        for n in 1..=feasible {
            writeln!(
                csv,
                "{n},{:.16e},{:.16e},{:.16e},{:.16e}",
                c.e(n),
                c.w(n),
                c.asymptote,
                c.gap(n)
            )
            .unwrap();
        }
        summary = Some(format!(
            "e(1) = {:.12}, e({feasible}) = {:.12}, asymptote = {:.12}",
            c.e(1),
            c.e(feasible),
            c.asymptote
        ));
    }
    fs::write(&out, csv).map_err(|e| Failure::Input(format!("{}: cannot write: {e}", out.display())))?;
    if feasible < n_max {
        // rows up to the cap are already on disk
        let err = build_level_table(p.state.spectrum(), &p.battery, feasible + 1, &config)
            .err()
            .map(|e| e.to_string())
            .unwrap_or_else(|| format!("enumeration cap exceeded at n = {}", feasible + 1));
        if let Some(s) = summary {
            eprintln!("{s}");
        }
        return Err(Failure::Cap(format!(
            "{err}; wrote rows 1..={feasible} to {}",
            out.display()
        )));
    }
    eprintln!("{}", summary.expect("at least one row"));
    Ok(())
}

fn cmd_simulate(file: PathBuf, schedule: PathBuf, copies: usize, tol: f64) -> Result<(), Failure> {
    check_tol(tol)?;
    let p = load_problem(&file)?;
    let register = Register::copies(&p.battery, copies).map_err(|e| Failure::Input(e.to_string()))?;
    let segments = load_schedule(&schedule, tol)?;
    let schedule = ControlSchedule::new(segments)?;
    let state = p.state.tensor_power(copies)?;
    let result = evolve(&state, &register, &schedule)?;

    let table = build_level_table(p.state.spectrum(), &p.battery, copies, &config()?)?;
    let available = register.energy(&state)? - copies as f64 * passive_energy_per_copy(&table);
    println!("work extracted       {:.12}", result.work);
    println!("ergotropy available  {:.12}", available);
    if available > 1e-12 {
        println!("fraction captured    {:.9}", result.work / available);
    } else {
        println!("fraction captured    n/a (no extractable work)");
    }
    println!("unitarity residual   {:.3e}", result.total_unitary.unitarity_residual());
    println!("final populations");
    for (j, pop) in result.final_state.populations().iter().enumerate() {
        println!("  {j:>6}  {pop:.12}");
    }
    Ok(())
}

fn cmd_oracle(file: PathBuf, n: usize, tol: f64) -> Result<(), Failure> {
    check_tol(tol)?;
    if n == 0 {
        return Err(Failure::Input("-n must be at least 1".into()));
    }
    let p = load_problem(&file)?;
    let config = config()?;
    let spectrum = p.state.spectrum();
    let brute = brute_force_oracle(spectrum, &p.battery, n, &config)?;
    let compressed = passive_energy_per_copy(&build_level_table(spectrum, &p.battery, n, &config)?);
    let diff = (compressed - brute).abs();
    println!("compressed e(n)   {compressed:.17e}");
    println!("brute-force e(n)  {brute:.17e}");
    println!("difference        {diff:.3e}");
    if diff > tol {
        return Err(Failure::Mismatch(format!("difference {diff:e} exceeds {tol:e}")));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ergotropy { file, tol, json } => cmd_ergotropy(file, tol, json),
        Command::Curve { file, n_max, out, tol } => cmd_curve(file, n_max, out, tol),
        Command::Simulate {
            file,
            schedule,
            copies,
            tol,
        } => cmd_simulate(file, schedule, copies, tol),
        Command::Oracle { file, n, tol } => cmd_oracle(file, n, tol),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
