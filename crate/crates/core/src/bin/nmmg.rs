use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use nmmg::config::Fault;
use nmmg::harness::io::{self, FrontDocument};
use nmmg::harness::{check_suite, run_compare, run_front, CheckOptions};
use nmmg::problems::{by_id, PROBLEM_IDS};
use nmmg::{run, Algorithm, SolverConfig};

const EXIT_AUDIT: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Parser)]
#[command(
    name = "nmmg",
    version,
    about = "Nonmonotone memory gradient solver for multiobjective problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One problem, one start, one algorithm; writes trace.csv and run.json.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Comma-separated start point; defaults to a seeded box sample.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x0: Option<Vec<f64>>,
    },
    /// Multistart run; writes front.csv and stats.json.
    Front {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        starts: usize,
    },
    /// Every algorithm from the same starts; writes compare.csv and compare.json.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20)]
        starts: usize,
    },
    /// Finite-difference Jacobian checks and the invariant audit over the suite.
    Check {
        #[command(flatten)]
        common: Common,
        /// Starts per problem, dimension and algorithm.
        #[arg(long, default_value_t = 10)]
        starts: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    FlipBetaSign,
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value = "quad2")]
    problem: String,
    #[arg(long)]
    algo: Option<Algorithm>,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// key=value parameter file; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; defaults to $NMMG_OUT_DIR, then ./nmmg-out.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long = "eta-max")]
    eta_max: Option<f64>,
    /// Max-type window length.
    #[arg(long = "M")]
    window: Option<usize>,
    /// Number of remembered directions.
    #[arg(long = "N")]
    memory: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long = "eps-crit")]
    eps_crit: Option<f64>,
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    #[arg(long = "inject-fault", hide = true)]
    inject_fault: Option<FaultArg>,
}

struct Failure {
    code: u8,
    msg: String,
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        msg: msg.into(),
    }
}

fn io_fail(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_SOLVER,
        msg: format!("error: {e}"),
    }
}

impl Common {
    fn config(&self) -> Result<SolverConfig, Failure> {
        let mut cfg = SolverConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)
                .map_err(|e| usage(format!("error: cannot read {}: {e}", path.display())))?;
            cfg.apply_kv(&text)
                .map_err(|e| usage(format!("error: {}: {e}", path.display())))?;
        }
        if let Some(a) = self.algo {
            cfg.algorithm = a;
        }
        macro_rules! over {
            ($($field:ident),*) => { $( if let Some(v) = self.$field { cfg.$field = v; } )* };
        }
        over!(rho, delta, eta_max, window, memory, gamma, eps_crit, max_iter);
        cfg.rng_seed = self.seed;
        if let Some(FaultArg::FlipBetaSign) = self.inject_fault {
            cfg.fault = Some(Fault::FlipBetaSign);
        }
        cfg.validate().map_err(|e| usage(format!("error: {e}")))
    }

    fn entry(&self) -> Result<nmmg::SuiteEntry64, Failure> {
        by_id(&self.problem, self.n).map_err(|e| {
            usage(format!(
                "error: {e} at n={} (known: {})",
                self.n,
                PROBLEM_IDS.join(", ")
            ))
        })
    }

    fn out_dir(&self) -> PathBuf {
        io::resolve_out_dir(self.out.as_deref())
    }
}

fn solve(common: &Common, x0: Option<Vec<f64>>) -> Result<(), Failure> {
    let cfg = common.config()?;
    let entry = common.entry()?;
    let x0 = match x0 {
        Some(x) if x.len() != common.n => {
            return Err(usage(format!(
                "error: --x0 has {} entries, expected {}",
                x.len(),
                common.n
            )))
        }
        Some(x) => x,
        None => entry.sample_starts(1, common.seed).remove(0),
    };
    let r = run(entry.problem.as_ref(), &x0, &cfg).map_err(|e| usage(format!("error: {e}")))?;
    let dir = common.out_dir();
    let trace = io::write_file(
        &dir,
        "trace.csv",
        &io::trace_csv_string(&r).map_err(io_fail)?,
    )
    .map_err(io_fail)?;
    io::write_file(&dir, "run.json", &io::run_json(&r, &cfg).map_err(io_fail)?).map_err(io_fail)?;
    println!(
        "problem      {} (n={}, m={})",
        r.problem,
        common.n,
        r.final_f.len()
    );
    println!("algorithm    {}", r.algorithm);
    println!("stop         {}", r.stop_reason.as_str());
    println!("iterations   {}", r.iterations());
    println!("f_evals      {}", r.counters.f_evals);
    println!("final |v|    {:e}", r.final_v_norm().unwrap_or(f64::NAN));
    println!("final F      {:?}", r.final_f);
    if let Some(d) = entry.pareto_distance(&r.final_x) {
        println!("pareto dist  {d:e}");
    }
    println!("trace        {}", trace.display());
    if r.stop_reason.is_error() {
        return Err(Failure {
            code: EXIT_SOLVER,
            msg: format!("solver stopped: {}", r.stop_reason.as_str()),
        });
    }
    Ok(())
}

fn front(common: &Common, starts: usize) -> Result<(), Failure> {
    let cfg = common.config()?;
    let entry = common.entry()?;
    let f =
        run_front(&entry, &cfg, starts, common.seed).map_err(|e| usage(format!("error: {e}")))?;
    let dir = common.out_dir();
    let doc = FrontDocument::new(&f, cfg.algorithm, common.n, common.seed);
    let csv = io::write_file(
        &dir,
        "front.csv",
        &io::front_csv_string(&f).map_err(io_fail)?,
    )
    .map_err(io_fail)?;
    io::write_file(&dir, "stats.json", &io::front_json(&doc).map_err(io_fail)?).map_err(io_fail)?;
    let s = &f.stats;
    println!(
        "runs {}  converged {}  rate {:.3}",
        s.runs, s.converged, s.convergence_rate
    );
    println!(
        "median iterations {}  median f_evals {}  max final |v| {:e}",
        s.median_iterations, s.median_f_evals, s.max_final_v_norm
    );
    println!(
        "nondominated points {}  -> {}",
        f.front.len(),
        csv.display()
    );
    let errors = f.runs.iter().filter(|r| r.stop_reason.is_error()).count();
    if errors > 0 {
        return Err(Failure {
            code: EXIT_SOLVER,
            msg: format!("{errors} runs ended in a solver error"),
        });
    }
    Ok(())
}

fn compare(common: &Common, starts: usize) -> Result<(), Failure> {
    let cfg = common.config()?;
    let entry = common.entry()?;
    let doc =
        run_compare(&entry, &cfg, starts, common.seed).map_err(|e| usage(format!("error: {e}")))?;
    let dir = common.out_dir();
    io::write_file(
        &dir,
        "compare.csv",
        &io::compare_csv_string(&doc).map_err(io_fail)?,
    )
    .map_err(io_fail)?;
    io::write_file(
        &dir,
        "compare.json",
        &io::compare_json(&doc).map_err(io_fail)?,
    )
    .map_err(io_fail)?;
    println!(
        "{:<10} {:>5} {:>9} {:>8} {:>10} {:>10} {:>12} {:>7}",
        "algorithm", "runs", "converged", "rate", "med_iter", "med_fev", "max|v|", "errors"
    );
    for r in &doc.rows {
        let s = &r.stats;
        println!(
            "{:<10} {:>5} {:>9} {:>8.3} {:>10} {:>10} {:>12.3e} {:>7}",
            r.algorithm.as_str(),
            s.runs,
            s.converged,
            s.convergence_rate,
            s.median_iterations,
            s.median_f_evals,
            s.max_final_v_norm,
            r.solver_errors
        );
    }
    Ok(())
}

fn check(common: &Common, starts: usize) -> Result<(), Failure> {
    let cfg = common.config()?;
    let opts = CheckOptions {
        starts,
        seed: common.seed,
        algorithms: match common.algo {
            Some(a) => vec![a],
            None => Algorithm::ALL.to_vec(),
        },
        ..CheckOptions::default()
    };
    let report = check_suite(&cfg, &opts).map_err(|e| usage(format!("error: {e}")))?;
    for fd in &report.fd {
        let status = if fd.max_rel_err <= report.fd_tolerance {
            "ok"
        } else {
            "FAIL"
        };
        println!(
            "fd_check {:<7} n={:<3} points={} max_rel_err={:.3e} {status}",
            fd.problem, fd.n, fd.points, fd.max_rel_err
        );
    }
    println!(
        "audit: {} runs, {} iterations, {} violations",
        report.runs,
        report.audit.iterations_checked,
        report.audit.violations.len()
    );
    for (inv, count) in report.audit.counts() {
        println!("  violated {inv}: {count}");
    }
    for v in report.audit.violations.iter().take(5) {
        println!("  e.g. {v}");
    }
    if let Some((p, n, a, s)) = report.failing_runs.first() {
        println!("  first failing run: problem={p} n={n} algo={a} start={s}");
    }
    if report.passed() {
        println!("check passed");
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_AUDIT,
            msg: "check failed".into(),
        })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let result = match &cli.command {
        Command::Solve { common, x0 } => solve(common, x0.clone()),
        Command::Front { common, starts } => front(common, *starts),
        Command::Compare { common, starts } => compare(common, *starts),
        Command::Check { common, starts } => check(common, *starts),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
