use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rodopt::cli_io::{
    self, parse_config_file, serialize_config, summarize, write_field_snapshot,
    write_history_csv, SummaryRow,
};
use rodopt::flow::{self, FlowConfig};
use rodopt::mesh::generate_disk_mesh;
use rodopt::phase_field::{density_from_phase, MaterialParams};
use rodopt::rigidity;
use rodopt::{Error, Result};

#[derive(Parser)]
#[command(name = "rodopt", about = "Two-material rod cross-section optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one optimization and write history + snapshots.
    Run {
        /// Configuration file (flat key = value text).
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// Named experiment preset (a-g) instead of a config file.
        #[arg(long)]
        preset: Option<String>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// Override the mesh resolution.
        #[arg(long)]
        elements: Option<usize>,
        #[arg(long)]
        max_steps: Option<usize>,
        /// Reserved; the method is deterministic.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Summarize finished runs from their history CSV files.
    Report {
        /// History files; the row label is the file stem.
        #[arg(required = true)]
        histories: Vec<PathBuf>,
    },
    /// Run the built-in analytic validation checks.
    Check {
        /// Mesh resolution for the checks.
        #[arg(long, default_value_t = 4000)]
        elements: usize,
    },
}

fn load_config(config: &Option<PathBuf>, preset: &Option<String>) -> Result<FlowConfig> {
    match (config, preset) {
        (Some(path), None) => parse_config_file(path),
        (None, Some(name)) => cli_io::preset(name),
        (None, None) => Err(Error::Usage(
            "either --config or --preset is required".into(),
        )),
        (Some(_), Some(_)) => unreachable!("clap enforces the conflict"),
    }
}

fn cmd_run(
    config: Option<PathBuf>,
    preset: Option<String>,
    out_dir: PathBuf,
    elements: Option<usize>,
    max_steps: Option<usize>,
    seed: Option<u64>,
) -> Result<()> {
    if seed.is_some() {
        eprintln!("note: --seed is reserved; runs are deterministic");
    }
    let mut cfg = load_config(&config, &preset)?;
    if let Some(n) = elements {
        cfg.target_elements = n;
    }
    if let Some(n) = max_steps {
        cfg.max_steps = n;
    }
    for warning in cfg.validate()? {
        eprintln!("warning: {warning}");
    }
    std::fs::create_dir_all(&out_dir)?;
    std::fs::write(out_dir.join("config.txt"), serialize_config(&cfg))?;
    let mesh = generate_disk_mesh(cfg.radius, cfg.target_elements)?;
    eprintln!(
        "mesh: {} nodes, {} elements",
        mesh.num_nodes(),
        mesh.num_elements()
    );
    let params = cfg.material();
    let snapshot = |mesh: &rodopt::mesh::Mesh, st: &flow::FlowState| -> Result<()> {
        let u = density_from_phase(&st.phi.values, &params);
        let stress = rigidity::solve_prandtl(mesh, &u, &params)?;
        let path = out_dir.join(format!("snapshot_{:06}.vtk", st.step));
        write_field_snapshot(
            mesh,
            &[("phi", &st.phi.values), ("u", &u), ("Phi", &stress)],
            &path,
        )
    };
    let state = flow::run_with(&mesh, &cfg, |mesh, st| {
        if st.step % 100 == 0 {
            snapshot(mesh, st)?;
        }
        if st.step % 1000 == 0 {
            if let Some(row) = st.history.last() {
                eprintln!(
                    "step {:>7}  J = {:+.6e}  D_mean = {:.6e}  D_T = {:.6e}  res = {:.3e}",
                    row.step, row.j_eps, row.d_mean, row.d_t, row.residual
                );
            }
        }
        Ok(())
    })?;
    if state.step % 100 != 0 {
        snapshot(&mesh, &state)?;
    }
    write_history_csv(&state, &out_dir.join("history.csv"))?;
    let last = state.history.last().expect("history is never empty");
    println!(
        "finished after {} steps ({}): D_mean = {:.6e}, D_T = {:.6e}, ratio = {:.4}",
        state.step,
        if state.stationary {
            "stationary"
        } else {
            "step limit"
        },
        last.d_mean,
        last.d_t,
        last.d_mean / last.d_t
    );
    Ok(())
}

fn cmd_report(histories: Vec<PathBuf>) -> Result<()> {
    let mut rows = Vec::new();
    for path in &histories {
        let text = std::fs::read_to_string(path)?;
        let history = cli_io::parse_history_csv(&text)?;
        let last = history.last().ok_or_else(|| {
            Error::Config(format!("{}: history has no rows", path.display()))
        })?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        rows.push(SummaryRow {
            name,
            d_mean: last.d_mean,
            d_t: last.d_t,
        });
    }
    print!("{}", summarize(&rows));
    Ok(())
}

fn cmd_check(elements: usize) -> Result<()> {
    let mut failures = 0;
    let mut report = |name: &str, value: f64, expected: f64, tol: f64| {
        let rel = (value - expected).abs() / expected.abs();
        let ok = rel <= tol;
        if !ok {
            failures += 1;
        }
        println!(
            "{} {name}: got {value:.6e}, expected {expected:.6e} (rel err {rel:.2e}, tol {tol:.0e})",
            if ok { "PASS" } else { "FAIL" }
        );
    };
    let r = 0.7;
    let mesh = generate_disk_mesh(r, elements)?;
    // uniform stiff disk: closed-form torsion
    let params_t = MaterialParams::new(1.0, 1.0, 0.0)?;
    let u1 = vec![1.0; mesh.num_nodes()];
    let stress = rigidity::solve_prandtl(&mesh, &u1, &params_t)?;
    let d_t = rigidity::torsional_rigidity(&mesh, &stress);
    report(
        "uniform disk torsional rigidity",
        d_t,
        std::f64::consts::PI * r.powi(4) / 2.0,
        0.01,
    );
    // warp formulation agrees with the stress-function formulation
    let params = MaterialParams::new(0.1, 26.0, 70.57)?;
    let phi0 = flow::initial_condition(&mesh, 25.0 / 49.0, 0.5, 0.01)?;
    let u = density_from_phase(&phi0.values, &params);
    let stress = rigidity::solve_prandtl(&mesh, &u, &params)?;
    let d_t_stress = rigidity::torsional_rigidity(&mesh, &stress);
    let warp = rigidity::solve_warp_neumann(&mesh, &u)?;
    let d_t_warp = rigidity::torsional_rigidity_warp(&mesh, &u, &warp)? * params.mu_norm;
    report(
        "warp vs stress-function torsion",
        d_t_warp,
        d_t_stress,
        0.02,
    );
    // two-phase concentric profile against the closed-form polar integral
    let u2: Vec<f64> = mesh
        .nodes
        .iter()
        .map(|p| {
            if (p[0] * p[0] + p[1] * p[1]).sqrt() <= 0.5 {
                1.0
            } else {
                0.1
            }
        })
        .collect();
    let warp2 = rigidity::solve_warp_neumann(&mesh, &u2)?;
    let d_t2 = rigidity::torsional_rigidity_warp(&mesh, &u2, &warp2)?;
    report("two-phase concentric torsion", d_t2, 0.12608, 0.02);
    if failures > 0 {
        return Err(Error::Numerical(format!("{failures} validation check(s) failed")));
    }
    println!("all checks passed");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            preset,
            out_dir,
            elements,
            max_steps,
            seed,
        } => cmd_run(config, preset, out_dir, elements, max_steps, seed),
        Command::Report { histories } => cmd_report(histories),
        Command::Check { elements } => cmd_check(elements),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
