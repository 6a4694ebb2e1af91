use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use smuas::adapt::adaptive_loop_with;
use smuas::assembly::{assemble, dirichlet_values};
use smuas::dmp::{run_dmp_suite, solver_options};
use smuas::estimator::{estimate_solution, EstimatorConfig};
use smuas::output::{DirLock, RecordWriter};
use smuas::stabilization::LimiterContext;
use smuas::vtk::{read_vtk, write_vtk};
use smuas::{solve_nonlinear, Error, Problem, RunConfig, SolverOptions};

/// Adaptive SMUAS finite elements for convection-diffusion-reaction problems.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the adaptive loop and write record.csv and mesh_<step>.vtk.
    Run(ConfigArgs),
    /// Evaluate the estimator for a solution stored in a VTK file.
    EstimateOnly {
        vtk: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Check the discrete maximum principle on three meshes.
    DmpTest,
    /// Solve on a uniform mesh and print limiter data per matrix entry.
    DumpLimiters {
        /// Uniform refinements of the initial mesh.
        #[arg(long, default_value_t = 2)]
        level: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides, e.g. `dof_stop=300`.
    #[arg(value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                RunConfig::parse(&text)?
            }
            None => RunConfig::default(),
        };
        for kv in &self.overrides {
            cfg.apply_override(kv)?;
        }
        Problem::by_name(&cfg.problem).map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }
}

const EXIT_CONFIG: u8 = 1;
const EXIT_NOT_CONVERGED: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_CHECK_FAILED: u8 = 4;

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(match e {
        Error::Config(_) | Error::UnknownProblem(_) => EXIT_CONFIG,
        Error::Io(_) | Error::Parse(_) => EXIT_IO,
        _ => EXIT_NOT_CONVERGED,
    })
}

fn run(args: &ConfigArgs) -> Result<ExitCode, Error> {
    let cfg = args.load()?;
    let problem = Problem::by_name(&cfg.problem)?;
    let _lock = DirLock::acquire(&cfg.out_dir)?;
    let mut csv = RecordWriter::create(&cfg.out_dir.join("record.csv"))?;
    let mut all_converged = true;
    adaptive_loop_with(&problem, &cfg, |step| {
        csv.append(step.record)?;
        let path = cfg.out_dir.join(format!("mesh_{}.vtk", step.record.step));
        let mut w = BufWriter::new(File::create(path)?);
        write_vtk(
            &mut w,
            step.mesh,
            Some(&step.solution.u),
            Some(&step.report.per_cell),
        )?;
        w.flush()?;
        all_converged &= step.record.converged;
        println!(
            "step {:>3}  dofs {:>7}  eta {:.6e}  error {}  iterations {}+{}",
            step.record.step,
            step.record.dofs,
            step.record.eta,
            step.record
                .energy_error
                .map_or("-".to_string(), |e| format!("{e:.6e}")),
            step.record.iterations,
            step.record.rejections
        );
        Ok(())
    })?;
    Ok(if all_converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_NOT_CONVERGED)
    })
}

fn estimate_only(vtk: &PathBuf, args: &ConfigArgs) -> Result<ExitCode, Error> {
    let cfg = args.load()?;
    let problem = Problem::by_name(&cfg.problem)?;
    let data = read_vtk(&fs::read_to_string(vtk)?)?;
    let u = data
        .u
        .clone()
        .ok_or_else(|| Error::Parse("VTK file has no point field u".into()))?;
    let mesh = data.to_mesh(|x| (problem.boundary)(x))?;
    let est = EstimatorConfig {
        quad_degree: cfg.quad_degree,
        ..Default::default()
    };
    let r = estimate_solution(&mesh, &problem, &u, &est)?;
    println!("dofs {}", mesh.num_dofs());
    println!("eta {:.16e}", r.eta);
    println!("eta1 {:.16e}", r.eta1);
    println!("eta2 {:.16e}", r.eta2);
    println!("eta3 {:.16e}", r.eta3);
    if let Some(e) = r.energy_error {
        println!("energy_error {e:.16e}");
    }
    Ok(ExitCode::SUCCESS)
}

fn dmp_test() -> Result<ExitCode, Error> {
    let reports = run_dmp_suite(&solver_options())?;
    let mut ok = true;
    for r in &reports {
        println!(
            "{} {:<14} dofs {:>4}  non-Delaunay edges {:>3}  min {:.3e}  max {:.16e}  iterations {}+{}",
            if r.holds() { "PASS" } else { "FAIL" },
            r.name,
            r.dofs,
            r.non_delaunay_edges,
            r.min,
            r.max,
            r.stats.iterations,
            r.stats.rejections
        );
        ok &= r.holds();
        if !r.stats.converged {
            return Ok(ExitCode::from(EXIT_NOT_CONVERGED));
        }
    }
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK_FAILED)
    })
}

fn dump_limiters(level: usize, out: Option<&PathBuf>, args: &ConfigArgs) -> Result<ExitCode, Error> {
    let cfg = args.load()?;
    let problem = Problem::by_name(&cfg.problem)?;
    let mesh = (0..level).fold(problem.initial_mesh(), |m, _| m.uniform_refine());
    let sys = assemble(&mesh, &problem, cfg.quad_degree)?;
    let opts = SolverOptions {
        max_iterations: cfg.max_iters,
        tol_scale: cfg.nonlinear_tol_scale,
        ..Default::default()
    };
    let sol = solve_nonlinear(&sys, &mesh, &opts, &dirichlet_values(&mesh, &problem))?;
    let ctx = LimiterContext::new(&mesh, &sys.a);
    let ls = &sol.limiters;
    let b = &sol.stabilization;

    let mut w: Box<dyn Write> = match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    writeln!(
        w,
        "i,j,a_ij,alpha_ij,b_ij,upwind_cell,u_i,p_plus,p_minus,q_plus,q_minus,r_plus,r_minus"
    )?;
    for i in 0..sys.dim() {
        for k in sys.a.row_range(i) {
            let j = sys.a.col_idx()[k];
            if i == j {
                continue;
            }
            writeln!(
                w,
                "{i},{j},{:.16e},{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                sys.a.values()[k],
                ls.alpha[k],
                b.values()[k],
                ctx.upwind_slot(k).map_or(String::new(), |c| c.to_string()),
                sol.u[i],
                ls.p_plus[i],
                ls.p_minus[i],
                ls.q_plus[i],
                ls.q_minus[i],
                ls.r_plus[i],
                ls.r_minus[i],
            )?;
        }
    }
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run(args),
        Command::EstimateOnly { vtk, config } => estimate_only(vtk, config),
        Command::DmpTest => dmp_test(),
        Command::DumpLimiters { level, out, config } => dump_limiters(*level, out.as_ref(), config),
    };
    result.unwrap_or_else(|e| fail(&e))
}
