use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use capflow::flow::run;
use capflow::manifest::{parse_manifest, RunManifest};
use capflow::potential::solve_potential;
use capflow::radial::{compute_r_opt, integrate_radial};
use capflow::verify::{all_passed, verify_suite, write_report_csv, write_report_text, Tolerances};
use capflow::{output, Error};

#[derive(Parser)]
#[command(name = "capflow", version, about = "Curvature flow with a capacity-potential term")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the curve described by a manifest and write CSV output.
    Run {
        manifest: PathBuf,
        /// Start even if the initial curve violates H > u_nu^2.
        #[arg(long)]
        force: bool,
        /// Also dump the initial potential as `<label>_field.csv`.
        #[arg(long)]
        dump_field: bool,
    },
    /// Integrate the disk radius ODE and print `t,R`.
    Radial {
        #[arg(long = "R0")]
        r0: f64,
        #[arg(long)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
    },
    /// Print the stationary radius.
    Ropt {
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Run the verification suite on a manifest's initial curve.
    Verify { manifest: PathBuf },
}

fn load(path: &Path) -> Result<RunManifest, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_manifest(&text)
}

fn cmd_run(path: &Path, force: bool, dump_field: bool) -> Result<ExitCode, Error> {
    let m = load(path)?;
    let initial = m.initial_curve()?;
    fs::create_dir_all(&m.output_dir)?;
    let out = |suffix: &str| m.output_dir.join(format!("{}_{suffix}", m.seed_label));
    if dump_field {
        let field = solve_potential(&initial, m.config.m_s, m.config.solver_tol)?;
        field.write_csv(std::io::BufWriter::new(fs::File::create(out("field.csv"))?))?;
    }
    let result = run(initial, &m.config, force)?;
    output::emit_time_series(&result.states, &out("timeseries.csv"))?;
    output::emit_snapshot(result.initial(), &out("initial.csv"))?;
    output::emit_snapshot(result.last(), &out("final.csv"))?;
    output::emit_snapshot_svg(result.initial(), &out("initial.svg"))?;
    output::emit_snapshot_svg(result.last(), &out("final.svg"))?;
    for w in &result.warnings {
        eprintln!("warning: t = {:.6}: min(H - u_nu^2) = {:.3e}", w.t, w.min_condition);
    }
    let last = result.last();
    println!(
        "t = {:.6}  rho in [{:.9}, {:.9}]  min(H - u_nu^2) = {:.3e}  ({} samples in {})",
        last.t,
        last.diagnostics.min_rho,
        last.diagnostics.max_rho,
        last.diagnostics.min_condition,
        result.states.len(),
        m.output_dir.display()
    );
    if let Some(f) = result.failure {
        eprintln!("error: run stopped at t = {}: {}", f.t, f.error);
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(path: &Path) -> Result<ExitCode, Error> {
    let m = load(path)?;
    let reports = verify_suite(&m.initial_curve()?, &m.config, &Tolerances::default())?;
    let mut text = Vec::new();
    write_report_text(&reports, &mut text)?;
    print!("{}", String::from_utf8_lossy(&text));
    fs::create_dir_all(&m.output_dir)?;
    fs::write(m.output_dir.join(format!("{}_report.txt", m.seed_label)), &text)?;
    write_report_csv(&reports, fs::File::create(m.output_dir.join(format!("{}_report.csv", m.seed_label)))?)?;
    if all_passed(&reports) {
        Ok(ExitCode::SUCCESS)
    } else {
        let failed: Vec<_> = reports.iter().filter(|r| !r.passed).map(|r| r.theorem_id.as_str()).collect();
        eprintln!("error: failed checks: {}", failed.join(", "));
        Ok(ExitCode::from(4))
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Run { manifest, force, dump_field } => cmd_run(&manifest, force, dump_field),
        Command::Radial { r0, t_end, dt } => {
            let traj = integrate_radial(r0, t_end, dt)?;
            println!("t,R");
            for s in traj {
                println!("{},{:.15e}", s.t, s.radius);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Ropt { tol } => {
            println!("{:.15}", compute_r_opt(tol)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { manifest } => cmd_verify(&manifest),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
