use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use commonbath_cli::output::{
    output_path, qgrid_table, run_tables, sweep_table, write_atomic, write_table,
};
use commonbath_cli::runner::{self, RunOutput};
use commonbath_cli::scenario::{AxisGrid, Scenario};
use commonbath_cli::verify::{self, Fault, VerifyOptions};
use commonbath_cli::CliError;

#[derive(Debug, Parser)]
#[command(name = "commonbath", version)]
#[command(about = "Two bosonic modes in a common thermal reservoir: scenario runs and verification")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Directory for CSV outputs.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and write one CSV per requested output.
    Run { file: PathBuf },
    /// Run a scenario for every value of its swept field.
    Sweep { file: PathBuf },
    /// Run the acceptance suite.
    Verify {
        /// Also write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Comma-separated criterion ids (default: all).
        #[arg(long, value_delimiter = ',')]
        criteria: Option<Vec<u32>>,
        #[arg(long, hide = true)]
        inject_fault: Option<FaultArg>,
    },
    /// Q-function of the correlated-channel output on a 4-D grid.
    Qgrid {
        file: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        xmin: f64,
        #[arg(long, allow_negative_numbers = true)]
        xmax: f64,
        #[arg(long)]
        step: f64,
        /// Evaluation time (default: the scenario's t_max).
        #[arg(long)]
        time: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FaultArg {
    GammaSign,
}

fn print_summary(label: &str, out: &RunOutput) {
    println!("{label}: cutoff {}", out.cutoff);
    for run in &out.runs {
        let last = run.times.len() - 1;
        let mut parts = vec![format!("t = {}", run.times[last])];
        if let Some(v) = run.purity.last() {
            parts.push(format!("purity {v:.10}"));
        }
        if let Some(v) = run.fidelity.last() {
            parts.push(format!("fidelity {v:.10}"));
        }
        if let Some(v) = run.trace_distance.last() {
            parts.push(format!("trace distance {v:.3e}"));
        }
        if let Some(c) = run.convergence {
            parts.push(format!("step-halving difference {c:.3e}"));
        }
        println!("  {}: {}", run.generator, parts.join(", "));
        for w in &run.warnings {
            eprintln!("  warning: {w}");
        }
    }
}

fn cmd_run(file: &Path, out_dir: &Path) -> Result<(), CliError> {
    let s = Scenario::load(file)?;
    if s.sweep.is_some() {
        return Err(CliError::Config("scenario declares a sweep; use the sweep command".into()));
    }
    let out = runner::execute(&s)?;
    for (o, table) in run_tables(&out) {
        let path = output_path(out_dir, file, o.name());
        write_table(&path, &table)?;
        println!("wrote {}", path.display());
    }
    print_summary(&file.display().to_string(), &out);
    Ok(())
}

fn cmd_sweep(file: &Path, out_dir: &Path) -> Result<(), CliError> {
    let s = Scenario::load(file)?;
    let results = runner::sweep(&s)?;
    let field = s.sweep.as_ref().expect("sweep checked by runner").field;
    let path = output_path(out_dir, file, "sweep");
    write_table(&path, &sweep_table(field, &results))?;
    println!("wrote {}", path.display());
    for (v, out) in &results {
        print_summary(&format!("{} = {v}", field.name()), out);
    }
    Ok(())
}

fn cmd_verify(json: Option<&Path>, only: Option<&[u32]>, fault: Option<FaultArg>) -> Result<(), CliError> {
    if let Some(bad) = only.and_then(|ids| ids.iter().find(|id| !verify::CRITERIA.contains(id))) {
        return Err(CliError::Config(format!("unknown criterion {bad}")));
    }
    let opts = VerifyOptions {
        fault: fault.map(|FaultArg::GammaSign| Fault::GammaSign),
        only: only.map(|ids| ids.to_vec()),
    };
    let report = verify::run_all(&opts, |r, adj| {
        println!("{r}");
        if let Some(a) = adj {
            println!("{a}");
        }
    });
    println!(
        "{} in {:.1} s",
        if report.passed { "all criteria passed" } else { "some criteria failed" },
        report.runtime_s
    );
    if let Some(path) = json {
        let text = serde_json::to_vec_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
        write_atomic(path, &text)?;
        println!("wrote {}", path.display());
    }
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<String> = report
            .criteria
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.id.to_string())
            .collect();
        Err(CliError::Verify(format!("criteria {}", failed.join(", "))))
    }
}

fn cmd_qgrid(file: &Path, out_dir: &Path, grid: AxisGrid, time: Option<f64>) -> Result<(), CliError> {
    let s = Scenario::load(file)?;
    grid.validate()?;
    let t = time.unwrap_or(s.time_grid.t_max);
    let rows = runner::q_grid(&s, t, &grid.points())?;
    let path = output_path(out_dir, file, "qgrid");
    write_table(&path, &qgrid_table(&rows))?;
    let worst = rows.iter().map(|r| (r.analytic - r.numeric).abs()).fold(0.0, f64::max);
    println!("wrote {} ({} points, max |dQ| {worst:.3e})", path.display(), rows.len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Run { file } => cmd_run(file, &cli.out_dir),
        Command::Sweep { file } => cmd_sweep(file, &cli.out_dir),
        Command::Verify {
            json,
            criteria,
            inject_fault,
        } => cmd_verify(json.as_deref(), criteria.as_deref(), *inject_fault),
        Command::Qgrid {
            file,
            xmin,
            xmax,
            step,
            time,
        } => cmd_qgrid(
            file,
            &cli.out_dir,
            AxisGrid {
                min: *xmin,
                max: *xmax,
                step: *step,
            },
            *time,
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
