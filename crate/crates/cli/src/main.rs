use adfpinn_cli::export;
use adfpinn_cli::registry::{registry, Method};
use adfpinn_cli::run::{run, LossMode, Options};
use adfpinn_core::geometry::{mvp_polygon_adf, polygon_adf_req, AdfMethod, Polygon};
use adfpinn_core::net::Activation;
use adfpinn_core::solver::Precision;
use anyhow::{anyhow, bail, Result};
use clap::{Args, Parser, Subcommand};
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "adfpinn", about = "Mesh-free PDE benchmarks with distance-field trial functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a registered benchmark problem.
    Solve(SolveArgs),
    /// Print the problem registry.
    List,
    /// Evaluate a polygon ADF on a grid and dump it as CSV.
    Adf(AdfArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Problem name from `list`.
    problem: String,
    #[arg(long, value_parser = parse_method)]
    method: Option<Method>,
    #[arg(long, value_parser = parse_adf)]
    adf: Option<AdfMethod>,
    /// R-equivalence normalization order.
    #[arg(long, default_value_t = 1)]
    m: i32,
    /// MVP exponent.
    #[arg(long, default_value_t = 1)]
    p: i32,
    /// Hidden-layer widths, e.g. "50,50".
    #[arg(long)]
    arch: Option<String>,
    #[arg(long, value_parser = parse_activation)]
    activation: Option<Activation>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    n_interior: Option<usize>,
    #[arg(long)]
    n_boundary: Option<usize>,
    #[arg(long)]
    delta_margin: Option<f64>,
    /// "exactbc" trains the boundary-exact ansatz; "standard" trains a
    /// bare network with boundary misfit terms.
    #[arg(long, default_value = "exactbc", value_parser = parse_loss)]
    loss: LossMode,
    /// Convex weight of the interior term for the standard loss.
    #[arg(long)]
    loss_weight: Option<f64>,
    #[arg(long, default_value = "f64", value_parser = parse_precision)]
    precision: Precision,
    /// Output directory for trace.csv and field.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AdfArgs {
    /// Polygon file: two decimals per line, blank lines between loops,
    /// outer loop first.
    polygon_file: PathBuf,
    /// Grid resolution per axis.
    #[arg(long, default_value_t = 101)]
    grid: usize,
    #[arg(long, default_value = "req", value_parser = parse_adf)]
    adf: AdfMethod,
    #[arg(long, default_value_t = 1)]
    m: i32,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_method(s: &str) -> Result<Method, String> {
    Method::parse(s).ok_or_else(|| format!("unknown method {s:?} (collocation|ritz|eigen|eikonal)"))
}

fn parse_adf(s: &str) -> Result<AdfMethod, String> {
    match s {
        "req" => Ok(AdfMethod::Req),
        "mvp" => Ok(AdfMethod::Mvp),
        "exact" => Ok(AdfMethod::Exact),
        "product" => Ok(AdfMethod::Product),
        _ => Err(format!("unknown ADF {s:?} (req|mvp|exact|product)")),
    }
}

fn parse_activation(s: &str) -> Result<Activation, String> {
    Activation::parse(s)
        .ok_or_else(|| format!("unknown activation {s:?} (tanh|relu|repu3|gaussian)"))
}

fn parse_loss(s: &str) -> Result<LossMode, String> {
    match s {
        "exactbc" => Ok(LossMode::ExactBc),
        "standard" => Ok(LossMode::Standard),
        _ => Err(format!("unknown loss {s:?} (standard|exactbc)")),
    }
}

fn parse_precision(s: &str) -> Result<Precision, String> {
    match s {
        "f32" => Ok(Precision::F32),
        "f64" => Ok(Precision::F64),
        _ => Err(format!("unknown precision {s:?} (f32|f64)")),
    }
}

fn parse_arch(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| anyhow!("bad arch component {t:?}")))
        .collect()
}

fn solve(args: SolveArgs) -> Result<()> {
    let opts = Options {
        method: args.method,
        adf: args.adf,
        m: args.m,
        p: args.p,
        arch: args.arch.as_deref().map(parse_arch).transpose()?,
        activation: args.activation,
        epochs: args.epochs,
        lr: args.lr,
        seed: args.seed,
        n_interior: args.n_interior,
        n_boundary: args.n_boundary,
        delta: args.delta_margin,
        loss_mode: args.loss,
        loss_weight: args.loss_weight,
        precision: args.precision,
    };
    let result = run(&args.problem, &opts)?;
    println!(
        "{}: method={} adf={:?} epochs={} final_loss={:.6e}",
        result.name,
        result.method.name(),
        result.adf,
        result.trace.rows.len(),
        result.final_loss
    );
    if let Some(e) = result.normalized_error {
        println!("  normalized_l2_error = {e:.6e}");
    }
    if let Some(e) = result.max_abs_error {
        println!("  max_abs_error       = {e:.6e}");
    }
    if let Some(w) = result.omega {
        println!("  omega               = {w:.8}");
    }
    if let Some(b) = result.boundary_misfit {
        println!("  boundary_misfit     = {b:.3e}");
    }
    if let Some(dir) = args.out {
        export::export(&result, &dir)?;
        println!("  wrote {}/trace.csv and field.csv", dir.display());
    }
    Ok(())
}

fn adf_dump(args: AdfArgs) -> Result<()> {
    let poly = Polygon::from_path(&args.polygon_file)?;
    let phi = match args.adf {
        AdfMethod::Req => polygon_adf_req(&poly, args.m)?,
        AdfMethod::Mvp => mvp_polygon_adf(&poly),
        other => bail!("ADF {other:?} is not defined for polygon files (req|mvp)"),
    };
    let (lo, hi) = {
        let outer = &poly.loops()[0];
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in outer {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    };
    let n = args.grid.max(2);
    let mut out = String::from("x,y,phi\n");
    for i in 0..n {
        for j in 0..n {
            let x = lo[0] + (hi[0] - lo[0]) * i as f64 / (n - 1) as f64;
            let y = lo[1] + (hi[1] - lo[1]) * j as f64 / (n - 1) as f64;
            let v = phi.eval(&[x, y][..]);
            out.push_str(&format!("{x},{y},{v}\n"));
        }
    }
    match args.out {
        Some(path) => {
            std::fs::File::create(&path)?.write_all(out.as_bytes())?;
            println!("wrote {}", path.display());
        }
        None => print!("{out}"),
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => solve(args),
        Command::List => {
            let mut names = registry();
            names.sort_by_key(|p| p.name);
            for p in names {
                println!(
                    "{:22} [{}] {}",
                    p.name,
                    p.methods.iter().map(|m| m.name()).collect::<Vec<_>>().join("|"),
                    p.description
                );
            }
            Ok(())
        }
        Command::Adf(args) => adf_dump(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
