//! `iprox`: run inexact-proximal experiments, verify the bound suite, print
//! quality/regularity rows, emit the contraction-factor surface, and compare
//! analytic vs numerical fixed points.
//!
//! Every flag can also be supplied through an `IPROX_`-prefixed environment
//! variable (`IPROX_SEED`, `IPROX_FILTER`, `IPROX_JOBS`, `IPROX_OUT_DIR`,
//! `IPROX_CONFIG`); command-line values win.

mod config;
mod output;
mod runner;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use iprox::algorithms::SplitKind;
use iprox::approx::{lipschitz_pair, sigma_bound, ApproxKind, Constants};
use iprox::svg;
use iprox::verify::{self, Status};

#[derive(Parser)]
#[command(name = "iprox", version, about = "Inexact proximal operators: experiments and verification", long_about = None)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one configured experiment; writes trace CSV, manifest JSON, SVG.
    Run {
        /// Experiment configuration file (key = value sections).
        #[arg(long, env = "IPROX_CONFIG")]
        config: Option<PathBuf>,
        /// Overrides the seed in the [approx] section.
        #[arg(long, env = "IPROX_SEED")]
        seed: Option<u64>,
        #[arg(long, env = "IPROX_OUT_DIR", default_value = ".")]
        out_dir: PathBuf,
    },
    /// Run the registered verification checks; nonzero exit on any failure.
    Verify {
        /// Substring filter on check ids (empty = everything).
        #[arg(long, env = "IPROX_FILTER", default_value = "")]
        filter: String,
        #[arg(long, env = "IPROX_SEED", default_value_t = 42)]
        seed: u64,
        /// Worker threads for the check fan-out (0 = one per check group).
        #[arg(long, env = "IPROX_JOBS", default_value_t = 4)]
        jobs: usize,
        #[arg(long, env = "IPROX_OUT_DIR", default_value = ".")]
        out_dir: PathBuf,
        /// Report path (relative to --out-dir unless absolute).
        #[arg(long, default_value = "report.json")]
        report: PathBuf,
    },
    /// Print the quality/regularity row sigma, L, gamma for one kind.
    Bounds {
        /// Approximation kind: a, b, c, d, e, or f.
        kind: String,
        /// Error budget eps.
        eps: f64,
        /// Potential Lipschitz constant; printed symbolically if omitted.
        #[arg(long)]
        l_psi: Option<f64>,
        /// Scaled weak-convexity modulus of lambda*phi (negative = strongly convex).
        #[arg(long, default_value_t = 0.0)]
        rho: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Ambient dimension (enters the kind-f quality bound).
        #[arg(long, default_value_t = 1)]
        dim: usize,
        /// Lipschitz constant of the smoothed-potential gradient (kind d).
        #[arg(long)]
        l_eps: Option<f64>,
    },
    /// Emit the contraction-factor surface over (L_g, mu/L_f): CSV + SVGs.
    Surface {
        #[arg(long, env = "IPROX_OUT_DIR", default_value = ".")]
        out_dir: PathBuf,
    },
    /// Compare an analytic fixed-point example against the numerical solver.
    Fixedpoint {
        /// One of: sq_l2:a, sq_l2:b, sq_l2:d, l2:a, l2:b, l2:d.
        example_id: String,
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
    },
}

fn resolve(out_dir: &Path, name: &str) -> PathBuf {
    let p = Path::new(name);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        out_dir.join(p)
    }
}

fn cmd_run(config: Option<PathBuf>, seed: Option<u64>, out_dir: &Path) -> Result<(), String> {
    let cfg = match config {
        Some(path) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| format!("{}: {e}", path.display()))?;
            config::parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => config::RunConfig::default(),
    };
    let result = runner::execute(&cfg, seed)?;

    let csv = output::trace_csv(&result.trace);
    let manifest = serde_json::json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "seed_override": seed,
        "derived": result.derived,
        "final_dist": result.trace.final_dist(),
        "tail_max_dist": result.trace.tail_max_dist(),
    });
    let plot = svg::line_plot("distance to the exact fixed point", &result.trace.dist_to_target, true);

    let csv_path = resolve(out_dir, &cfg.output.trace_csv);
    let json_path = resolve(out_dir, &cfg.output.manifest_json);
    let svg_path = resolve(out_dir, &cfg.output.plot_svg);
    output::atomic_write(&csv_path, csv.as_bytes()).map_err(|e| e.to_string())?;
    let mut body = serde_json::to_string_pretty(&manifest).map_err(|e| e.to_string())?;
    body.push('\n');
    output::atomic_write(&json_path, body.as_bytes()).map_err(|e| e.to_string())?;
    output::atomic_write(&svg_path, plot.as_bytes()).map_err(|e| e.to_string())?;

    println!(
        "run: {} iterations, final dist {:.6e}, tail max {:.6e}{}",
        result.trace.residuals.len(),
        result.trace.final_dist(),
        result.trace.tail_max_dist(),
        match result.derived.ball_radius {
            Some(r) => format!(", predicted ball radius {r:.6e}"),
            None => String::new(),
        }
    );
    println!("wrote {} {} {}", csv_path.display(), json_path.display(), svg_path.display());
    Ok(())
}

fn cmd_verify(filter: &str, seed: u64, jobs: usize, out_dir: &Path, report: &Path) -> Result<bool, String> {
    let records = verify::run_all(filter, seed, jobs);
    for r in &records {
        let tag = match r.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        };
        print!("{} [{}] {}", r.check_id, tag, r.config);
        if let Some(w) = &r.witness {
            print!("  witness: {w}");
        }
        println!();
    }
    let failed = records.iter().filter(|r| r.status == Status::Fail).count();
    let path = resolve(out_dir, report.to_str().unwrap_or("report.json"));
    output::atomic_write(&path, output::records_json(&records, seed, filter).as_bytes())
        .map_err(|e| e.to_string())?;
    println!("{} checks, {} failed; report: {}", records.len(), failed, path.display());
    Ok(failed == 0)
}

/// Formats `coef * L_psi`, numerically when L_psi is known.
fn lpsi_term(coef: f64, l_psi: Option<f64>) -> String {
    match l_psi {
        Some(v) => format!("{}", coef * v),
        None if coef == 1.0 => "L_psi".into(),
        None => format!("{coef}*L_psi"),
    }
}

fn cmd_bounds(
    kind: &str,
    eps: f64,
    l_psi: Option<f64>,
    rho: f64,
    lambda: f64,
    dim: usize,
    l_eps: Option<f64>,
) -> Result<(), String> {
    let k = ApproxKind::from_name(kind).ok_or_else(|| format!("unknown kind `{kind}`"))?;
    if let Some(lp) = l_psi {
        let c = Constants { l_psi: lp, rho, lambda, n_dim: dim, l_eps, tau: None };
        let sigma = sigma_bound(k, eps, &c).map_err(|e| e.to_string())?;
        let pair = lipschitz_pair(k, eps, &c).map_err(|e| e.to_string())?;
        println!("sigma={sigma} L={} gamma={}", pair.l, pair.gamma);
        return Ok(());
    }
    // Symbolic L_psi: print the row as the table states it.
    let r = rho.max(0.0);
    let (sigma, l, gamma) = match k {
        ApproxKind::A => (format!("{eps}"), lpsi_term(1.0, None), format!("{}", 2.0 * eps)),
        ApproxKind::B => {
            (lpsi_term(eps, None), lpsi_term(1.0, None), lpsi_term(2.0 * eps, None))
        }
        ApproxKind::C => (
            format!("{}", (eps / (1.0 - r)).sqrt()),
            format!("{}", 1.0 / (1.0 - r)),
            format!("{}", (2.0 * eps / (1.0 - r)).sqrt()),
        ),
        ApproxKind::D => {
            let le = l_eps.ok_or("kind d needs --l-eps")?;
            (format!("{}", 2.0 * (le * eps).sqrt()), format!("{le}"), "0".into())
        }
        ApproxKind::E => (
            format!("sqrt({}*L_psi)", 2.0 * eps),
            lpsi_term(1.0, None),
            format!("sqrt({}*L_psi)", 2.0 * eps),
        ),
        ApproxKind::F => (
            format!("{}", (dim as f64 * eps / (1.0 / lambda - rho)).sqrt()),
            lpsi_term(1.0, None),
            "0".into(),
        ),
    };
    println!("sigma={sigma} L={l} gamma={gamma}");
    Ok(())
}

fn cmd_surface(out_dir: &Path) -> Result<(), String> {
    let l_g: Vec<f64> = vec![0.5, 1.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0];
    let ratios: Vec<f64> = (1..=20).map(|i| i as f64 / 20.0).collect();
    let grid = verify::contractivity_surface(&l_g, &ratios);
    let csv_path = out_dir.join("surface.csv");
    output::atomic_write(&csv_path, output::surface_csv(&grid).as_bytes())
        .map_err(|e| e.to_string())?;
    for kind in [SplitKind::FB, SplitKind::PR, SplitKind::DR] {
        let path = out_dir.join(format!("surface_{}.svg", kind.name()));
        output::atomic_write(&path, grid.to_svg(kind).as_bytes()).map_err(|e| e.to_string())?;
    }
    println!("wrote {} and surface_{{fb,pr,dr}}.svg", csv_path.display());
    Ok(())
}

fn cmd_fixedpoint(example_id: &str, eps: f64, gamma: f64) -> Result<bool, String> {
    let rec = verify::check_appendix_fixed_points(example_id, eps, gamma);
    let tag = match rec.status {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::Skipped => "SKIP",
    };
    println!("{} [{}] {}", rec.check_id, tag, rec.config);
    println!("  analytic-vs-numeric gaps: {:?}", rec.measured);
    println!("  tolerances: {:?}", rec.bound);
    if let Some(w) = &rec.witness {
        println!("  witness: {w}");
    }
    Ok(rec.status != Status::Fail)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Cmd::Run { config, seed, out_dir } => cmd_run(config, seed, &out_dir).map(|_| true),
        Cmd::Verify { filter, seed, jobs, out_dir, report } => {
            cmd_verify(&filter, seed, jobs, &out_dir, &report)
        }
        Cmd::Bounds { kind, eps, l_psi, rho, lambda, dim, l_eps } => {
            cmd_bounds(&kind, eps, l_psi, rho, lambda, dim, l_eps).map(|_| true)
        }
        Cmd::Surface { out_dir } => cmd_surface(&out_dir).map(|_| true),
        Cmd::Fixedpoint { example_id, eps, gamma } => cmd_fixedpoint(&example_id, eps, gamma),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
