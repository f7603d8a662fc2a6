use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mlpr::bench::{run_benchmark, write_csv, BenchSpec};
use mlpr::io::{read_problem, write_problem_to_path};
use mlpr::solvers::{solve, Method, SolveReport, SolverConfig};
use mlpr::{generate_random_problem, Error, Execution};

#[derive(Parser, Debug)]
#[command(name = "mlpr", version, about = "Multilinear PageRank solvers and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a random problem file.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve a problem file.
    Solve {
        #[arg(long)]
        problem: PathBuf,
        /// Overrides the alpha stored in the file.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        method: Method,
        #[arg(long, default_value_t = 4)]
        inner: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 200)]
        max_outer: usize,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
        /// Write the full solve report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Sweep alphas and methods on a generated problem and write CSV.
    Bench {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_delimiter = ',', required = true)]
        alphas: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        methods: Vec<Method>,
        #[arg(long, default_value_t = 4)]
        inner: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
        /// Output path, `-` for stdout.
        #[arg(long)]
        csv: PathBuf,
        /// Run the sweep rows concurrently.
        #[arg(long)]
        concurrent_rows: bool,
        /// Keep every kernel on the calling thread.
        #[arg(long)]
        sequential: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Generate { n, seed, alpha, out } => {
            let inst = generate_random_problem(n, seed, alpha.unwrap_or(0.0))?;
            if alpha.is_some() {
                write_problem_to_path(&inst, &out)?;
            } else {
                mlpr::io::write_parts(inst.tensor(), None, inst.v(), File::create(&out)?)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve { problem, alpha, method, inner, tol, max_outer, max_steps, report } => {
            let inst = read_problem(&problem)?.into_instance(alpha)?;
            let cfg = SolverConfig { method, inner_steps: inner, tol, max_outer, max_total_steps: max_steps, ..SolverConfig::default() };
            let (result, code) = match solve(&inst, &cfg) {
                Ok(r) => (r, ExitCode::SUCCESS),
                Err(Error::NotConverged(r)) => (*r, ExitCode::from(2)),
                Err(e) => return Err(e),
            };
            print_summary(&result);
            if let Some(path) = report {
                serde_json::to_writer_pretty(File::create(path)?, &result).map_err(std::io::Error::from)?;
            }
            Ok(code)
        }
        Command::Bench { n, seed, alphas, methods, inner, tol, max_steps, csv, concurrent_rows, sequential } => {
            let mut spec = BenchSpec::new(n, seed, alphas, methods);
            spec.inner_steps = inner;
            spec.tol = tol;
            spec.max_total_steps = max_steps;
            spec.concurrent_rows = concurrent_rows;
            if sequential {
                spec.execution = Execution::Sequential;
            }
            let rows = run_benchmark(&spec)?;
            if csv.as_os_str() == "-" {
                write_csv(&rows, std::io::stdout().lock())?;
            } else {
                write_csv(&rows, File::create(&csv)?)?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn print_summary(r: &SolveReport) {
    println!("method            {}", r.method);
    println!("converged         {}", r.converged);
    println!("nres              {:.3e}", r.nres_final);
    println!("factorizations    {}", r.factorizations);
    println!("inner steps       {}", r.total_inner_steps);
    println!("sum(x)            {:.15}", r.solution.iter().sum::<f64>());
    println!("monotone viol.    {}", r.monotone_violations);
    println!("time              {:.3} ms", r.elapsed.as_secs_f64() * 1e3);
}
