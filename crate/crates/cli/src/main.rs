mod config;
mod output;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use glued_bessel::suite::{self, Settings, SuiteReport};

use config::{RunConfig, CONFIG_ENV};

/// Verification suites for Bessel operators on the glued line.
#[derive(Debug, Parser)]
#[command(name = "glued", version)]
struct Cli {
    /// TOML run configuration; flags take precedence over it.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    /// Worker threads (default: every available core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Report directory, or a `.csv` file for the first table.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Refuse stochastic suites without an explicit --seed.
    #[arg(long, global = true)]
    ci: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reference values, junction zeros and asymptotic fits.
    SpecfunCheck {
        #[arg(long)]
        d: Option<f64>,
    },
    /// Heat-kernel suites.
    Heat {
        #[arg(long)]
        d: Option<f64>,
        /// Times for the assembly check.
        #[arg(long, value_delimiter = ',')]
        t: Vec<f64>,
        #[arg(long, value_enum)]
        suite: HeatSuite,
    },
    /// Riesz-transform suites.
    Riesz {
        #[arg(long)]
        d: Option<f64>,
        #[arg(long, value_enum)]
        suite: RieszSuite,
    },
    /// Hardy-space suites.
    Hardy {
        #[arg(long)]
        d: Option<f64>,
        #[arg(long, value_enum)]
        suite: HardySuite,
        #[arg(long)]
        atoms: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Diffusion suites.
    Simulate {
        #[arg(long)]
        d: Option<f64>,
        /// Signed starting point, e.g. -2.
        #[arg(long, allow_negative_numbers = true)]
        x0: Option<f64>,
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        suite: SimSuite,
    },
    /// Every suite.
    All {
        #[arg(long)]
        d: Option<f64>,
        /// Reduced ensembles.
        #[arg(long)]
        quick: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum HeatSuite {
    Assembly,
    Gauss,
    Mixed,
    Pi,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RieszSuite {
    Kernel,
    Bounds,
    Lp,
    Xcheck,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum HardySuite {
    Rh,
    H1l1,
    Counterexample,
    Maximal,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SimSuite {
    Exit,
    Hit,
    Occupation,
}

type Runner = fn(&Settings) -> glued_bessel::Result<SuiteReport>;

/// Applies the flags to `s` and picks the suites.
fn plan(command: &Command, s: &mut Settings, ci: bool) -> Result<Vec<Runner>, String> {
    let set_d = |s: &mut Settings, d: &Option<f64>| {
        if let Some(d) = d {
            s.d = *d;
        }
    };
    let need_seed = |seed: &Option<u64>| {
        if ci && seed.is_none() {
            Err("--seed is required for stochastic suites with --ci".to_string())
        } else {
            Ok(())
        }
    };
    Ok(match command {
        Command::SpecfunCheck { d } => {
            set_d(s, d);
            vec![suite::specfun_check]
        }
        Command::Heat { d, t, suite } => {
            set_d(s, d);
            if !t.is_empty() {
                s.heat_times = t.clone();
            }
            vec![match suite {
                HeatSuite::Assembly => suite::heat_assembly,
                HeatSuite::Gauss => suite::heat_gauss,
                HeatSuite::Mixed => suite::heat_mixed,
                HeatSuite::Pi => suite::heat_pi,
            }]
        }
        Command::Riesz { d, suite } => {
            set_d(s, d);
            vec![match suite {
                RieszSuite::Kernel => suite::riesz_kernels,
                RieszSuite::Bounds => suite::riesz_bounds,
                RieszSuite::Lp => suite::riesz_lp,
                RieszSuite::Xcheck => suite::riesz_xcheck,
            }]
        }
        Command::Hardy { d, suite, atoms, seed } => {
            set_d(s, d);
            if let Some(n) = atoms {
                s.atoms = *n;
            }
            if let Some(seed) = seed {
                s.hardy_seed = *seed;
            }
            vec![match suite {
                HardySuite::Rh => suite::hardy_rh,
                HardySuite::H1l1 => suite::hardy_h1l1,
                HardySuite::Counterexample => suite::hardy_counterexample,
                HardySuite::Maximal => suite::hardy_maximal,
            }]
        }
        Command::Simulate { d, x0, paths, seed, suite } => {
            need_seed(seed)?;
            set_d(s, d);
            if let Some(x) = x0 {
                s.x0 = vec![*x];
            }
            if let Some(n) = paths {
                s.paths = *n;
            }
            if let Some(seed) = seed {
                s.sim_seed = *seed;
            }
            if !matches!(suite, SimSuite::Exit) && s.x0.iter().all(|x| *x < 0.0) {
                return Err("hit and occupation suites start on the plus side".into());
            }
            vec![match suite {
                SimSuite::Exit => suite::simulate_exit,
                SimSuite::Hit => suite::simulate_hit,
                SimSuite::Occupation => suite::simulate_occupation,
            }]
        }
        Command::All { d, quick, seed } => {
            need_seed(seed)?;
            set_d(s, d);
            s.quick |= *quick;
            if let Some(seed) = seed {
                s.sim_seed = *seed;
                s.hardy_seed = *seed;
            }
            vec![
                suite::specfun_check,
                suite::heat_assembly,
                suite::heat_gauss,
                suite::heat_mixed,
                suite::heat_pi,
                suite::riesz_kernels,
                suite::riesz_bounds,
                suite::riesz_lp,
                suite::riesz_xcheck,
                suite::hardy_rh,
                suite::hardy_counterexample,
                suite::hardy_maximal,
                suite::hardy_h1l1,
                suite::simulate_exit,
                suite::simulate_hit,
                suite::simulate_occupation,
            ]
        }
    })
}

fn configure(cli: &Cli) -> Result<(RunConfig, Vec<Runner>), String> {
    let mut cfg = config::load(cli.config.as_deref())?;
    if let Some(n) = cli.threads {
        cfg.threads = Some(n);
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    let runners = plan(&cli.command, &mut cfg.settings, cli.ci)?;
    cfg.settings.validate().map_err(|e| e.to_string())?;
    if cfg.threads == Some(0) {
        return Err("--threads must be positive".into());
    }
    Ok((cfg, runners))
}

fn run(cli: Cli) -> ExitCode {
    let (cfg, runners) = match configure(&cli) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("glued: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(n) = cfg.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("glued: {e}");
            return ExitCode::from(2);
        }
    }
    let ctx = output::Context {
        settings: &cfg.settings,
        threads: rayon::current_num_threads(),
    };
    let mut failed = 0;
    for runner in &runners {
        match catch_unwind(AssertUnwindSafe(|| runner(&cfg.settings))) {
            Ok(Ok(report)) => {
                println!("{}: {} ({:.1}s)", report.suite, if report.pass { "PASS" } else { "FAIL" }, report.seconds);
                for line in &report.summary {
                    println!("    {line}");
                }
                match output::write(&ctx, &cfg.out, &report) {
                    Ok(paths) => {
                        for p in paths {
                            println!("    wrote {}", p.display());
                        }
                    }
                    Err(e) => {
                        eprintln!("glued: cannot write reports to {}: {e}", cfg.out.display());
                        failed += 1;
                    }
                }
                failed += usize::from(!report.pass);
            }
            Ok(Err(e)) => {
                println!("error: {e}");
                failed += 1;
            }
            Err(_) => {
                println!("error: internal failure");
                failed += 1;
            }
        }
    }
    if runners.len() > 1 {
        println!("{} of {} suites passed", runners.len() - failed.min(runners.len()), runners.len());
    }
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) }
}

fn main() -> ExitCode {
    match Cli::try_parse() {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            // help and version requests are not errors
            if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS }
        }
    }
}
