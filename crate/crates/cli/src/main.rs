//! `cm` — command-line frontend for the completely-monotone-function
//! toolkit. All subcommands emit JSON on stdout by default (`--format text`
//! for aligned text). Exit codes: 0 success, 1 computation error (with a
//! structured JSON error on stdout), 2 refuted-CM verdict under
//! `check --expect-cm`, 64 usage errors.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use cm_core::cmtest::{self, GridSpec, Spacing, Verdict};
use cm_core::expr::parse;
use cm_core::gammaex;
use cm_core::inversion::{invert_cm, InversionConfig};
use cm_core::krull;
use cm_core::laplace::{catalog, transform};
use cm_core::measure::Measure;
use serde_json::json;
use std::collections::BTreeMap;

#[derive(Parser)]
#[command(
    name = "cm",
    version,
    about = "Test, transform and invert completely monotone functions"
)]
struct Cli {
    /// Output format for reports.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Seed for the randomized samples in the check suite; fixed default
    /// keeps runs bit-reproducible.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Grid CM check plus the full necessary-condition suite.
    Check(CheckArgs),
    /// Laplace transform of a measure file at given points.
    Transform(TransformArgs),
    /// Instantiate and verify a catalog transform pair.
    Pairs(PairsArgs),
    /// Gil-Pelaez inversion of a function's representing measure.
    Invert(InvertArgs),
    /// Series solution of g(x+1) - g(x) = f(x).
    Krull(KrullArgs),
    /// Worked Gamma-function examples.
    Example(ExampleArgs),
}

#[derive(Args)]
struct CheckArgs {
    /// Expression in x.
    #[arg(long = "f")]
    function: String,
    /// Highest derivative order checked.
    #[arg(long, default_value_t = 10)]
    order: usize,
    /// Grid as min:max:points:log|lin.
    #[arg(long, default_value = "0.05:50:64:log")]
    grid: String,
    /// Exit with code 2 when the verdict is refuted.
    #[arg(long)]
    expect_cm: bool,
}

#[derive(Args)]
struct TransformArgs {
    /// Path to a measure JSON file
    /// ({"atoms":[{"t":..,"mass":..}],"density":"<expr in t>"|null,
    ///   "support_hint":..|null}).
    #[arg(long)]
    measure: String,
    /// Comma-separated evaluation points.
    #[arg(long = "x")]
    xs: String,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Args)]
struct PairsArgs {
    /// Catalog name: milsam1..milsam5, psin, recxn.
    #[arg(long)]
    name: String,
    /// Comma-separated k=v parameters, e.g. a=1,b=2,c=0.5.
    #[arg(long, default_value = "")]
    params: String,
    /// Verification points.
    #[arg(long = "x", default_value = "0.3,1,3,10")]
    xs: String,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Args)]
struct InvertArgs {
    /// Expression in x (must admit complex evaluation).
    #[arg(long = "f")]
    function: String,
    /// Comma-separated t values.
    #[arg(long = "t")]
    ts: String,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Args)]
struct KrullArgs {
    /// Expression in x.
    #[arg(long = "f")]
    function: String,
    /// Derivative order of g to compute (1 uses the limit formula for g').
    #[arg(long, default_value_t = 2)]
    j: u32,
    /// Evaluation point.
    #[arg(long = "x")]
    x: f64,
    #[arg(long, default_value_t = 10_000)]
    n_max: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Args)]
struct ExampleArgs {
    /// lem0, exa200 or exa300.
    #[arg(long)]
    name: String,
    /// Single parameter assignment like a=0.5 or b=0.8.
    #[arg(long)]
    param: Option<String>,
    /// Points for the closed-form/quadrature cross-check table.
    #[arg(long = "x", default_value = "0.5,1,2,5")]
    xs: String,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                print!("{e}");
                std::process::exit(0);
            }
            _ => {
                eprint!("{e}");
                std::process::exit(64);
            }
        },
    };
    std::process::exit(run(cli));
}

fn run(cli: Cli) -> i32 {
    let format = cli.format;
    let result = match &cli.command {
        Command::Check(args) => run_check(args, cli.seed, format),
        Command::Transform(args) => run_transform(args, format),
        Command::Pairs(args) => run_pairs(args, format),
        Command::Invert(args) => run_invert(args, format),
        Command::Krull(args) => run_krull(args, format),
        Command::Example(args) => run_example(args, format),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let payload = json!({ "error": e.to_string() });
            println!("{}", serde_json::to_string_pretty(&payload).unwrap());
            1
        }
    }
}

fn parse_grid(text: &str) -> cm_core::Result<GridSpec> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 4 {
        return Err(cm_core::Error::Constraint(format!(
            "grid must be min:max:points:log|lin, got '{text}'"
        )));
    }
    let bad = |what: &str| cm_core::Error::Constraint(format!("invalid grid {what} in '{text}'"));
    let x_min: f64 = parts[0].parse().map_err(|_| bad("min"))?;
    let x_max: f64 = parts[1].parse().map_err(|_| bad("max"))?;
    let points: usize = parts[2].parse().map_err(|_| bad("points"))?;
    let spacing = match parts[3] {
        "log" => Spacing::Log,
        "lin" => Spacing::Linear,
        _ => return Err(bad("spacing")),
    };
    Ok(GridSpec {
        x_min,
        x_max,
        points,
        spacing,
    })
}

fn parse_csv(text: &str) -> cm_core::Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| cm_core::Error::Constraint(format!("invalid number '{s}' in list")))
        })
        .collect()
}

fn parse_params(text: &str) -> cm_core::Result<BTreeMap<String, f64>> {
    let mut map = BTreeMap::new();
    for chunk in text.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, v) = chunk.split_once('=').ok_or_else(|| {
            cm_core::Error::Constraint(format!("parameter '{chunk}' is not of the form k=v"))
        })?;
        let value: f64 = v
            .trim()
            .parse()
            .map_err(|_| cm_core::Error::Constraint(format!("invalid parameter value '{v}'")))?;
        map.insert(k.trim().to_string(), value);
    }
    Ok(map)
}

fn run_check(args: &CheckArgs, seed: u64, format: Format) -> cm_core::Result<i32> {
    let f = parse(&args.function)?;
    let grid = parse_grid(&args.grid)?;
    let report = cmtest::full_check(&f, &grid, args.order, seed)?;
    match format {
        Format::Json => println!("{}", report.to_json()?),
        Format::Text => {
            let verdict = match report.verdict {
                Verdict::Refuted => "refuted",
                Verdict::ConsistentUpTo => "consistent (not a proof)",
            };
            println!("verdict: {verdict}");
            println!("order checked: {}", report.order_checked);
            for (id, status) in &report.conditions {
                println!("  {id:<20} {status:?}");
            }
            for w in &report.witnesses {
                println!(
                    "  witness {} {} at {:?}: lhs={:.6e} rhs={:.6e}",
                    w.condition, w.index, w.point, w.lhs, w.rhs
                );
            }
        }
    }
    if args.expect_cm && report.verdict == Verdict::Refuted {
        return Ok(2);
    }
    Ok(0)
}

fn run_transform(args: &TransformArgs, format: Format) -> cm_core::Result<i32> {
    let text = std::fs::read_to_string(&args.measure).map_err(|e| {
        cm_core::Error::InvalidMeasure(format!("cannot read {}: {e}", args.measure))
    })?;
    let mu = Measure::from_json(&text)?;
    let xs = parse_csv(&args.xs)?;
    let mut rows = Vec::new();
    for &x in &xs {
        rows.push(json!({ "x": x, "value": transform(&mu, x, args.tol)? }));
    }
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&rows).unwrap()),
        Format::Text => {
            for r in &rows {
                println!("L(dmu)({}) = {}", r["x"], r["value"]);
            }
        }
    }
    Ok(0)
}

fn run_pairs(args: &PairsArgs, format: Format) -> cm_core::Result<i32> {
    let params = parse_params(&args.params)?;
    let pair = catalog(&args.name, &params)?;
    let xs = parse_csv(&args.xs)?;
    let mut checks = Vec::new();
    let mut worst = 0.0f64;
    for &x in &xs {
        let lhs = transform(&pair.measure, x, args.tol)?;
        let rhs = pair.function.eval(x)?;
        let dev = (lhs - rhs).abs() / (1.0 + rhs.abs());
        worst = worst.max(dev);
        checks.push(json!({
            "x": x,
            "function": rhs,
            "transform": lhs,
            "abs_error": (lhs - rhs).abs(),
        }));
    }
    let payload = json!({
        "name": pair.name,
        "params": pair.params,
        "constraints": pair.constraint_doc,
        "function": pair.function.print(),
        "measure": serde_json::from_str::<serde_json::Value>(&pair.measure.to_json()?)?,
        "checks": checks,
        "max_relative_deviation": worst,
    });
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&payload).unwrap()),
        Format::Text => {
            println!("pair {}: f(x) = {}", pair.name, pair.function.print());
            println!("constraints: {}", pair.constraint_doc);
            for c in &checks {
                println!(
                    "  x={} function={} transform={}",
                    c["x"], c["function"], c["transform"]
                );
            }
            println!("max relative deviation: {worst:.3e}");
        }
    }
    Ok(0)
}

fn run_invert(args: &InvertArgs, format: Format) -> cm_core::Result<i32> {
    let f = parse(&args.function)?;
    let ts = parse_csv(&args.ts)?;
    let cfg = InversionConfig {
        tol: args.tol,
        ..Default::default()
    };
    let est = invert_cm(&f, &ts, &cfg)?;
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&est).unwrap()),
        Format::Text => {
            println!("phi(0) = {}", est.phi0);
            for p in &est.points {
                println!(
                    "F({}) = {:.8} (err est {:.2e})",
                    p.t, p.f_estimate, p.error_bound_estimate
                );
            }
            if !est.monotonicity_violations.is_empty() {
                println!(
                    "monotonicity violations at {:?}",
                    est.monotonicity_violations
                );
            }
        }
    }
    Ok(0)
}

fn run_krull(args: &KrullArgs, format: Format) -> cm_core::Result<i32> {
    let f = parse(&args.function)?;
    let value = if args.j <= 1 {
        krull::krull_gprime(&f, args.x, args.n_max, args.tol)?
    } else {
        krull::krull_gderiv(&f, args.j, args.x, args.n_max, args.tol)?
    };
    let payload = json!({ "j": args.j, "x": args.x, "value": value });
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&payload).unwrap()),
        Format::Text => println!("g^({})({}) = {}", args.j, args.x, value),
    }
    Ok(0)
}

fn run_example(args: &ExampleArgs, format: Format) -> cm_core::Result<i32> {
    let xs = parse_csv(&args.xs)?;
    let param = match &args.param {
        None => None,
        Some(p) => {
            let map = parse_params(p)?;
            map.into_iter().next()
        }
    };
    let payload = match args.name.as_str() {
        "lem0" => serde_json::to_value(gammaex::run_lem0(&xs)?)
            .map_err(cm_core::Error::from)?,
        "exa200" => {
            let a = param.map(|(_, v)| v).unwrap_or(0.5);
            serde_json::to_value(gammaex::run_exa200(a, &xs)?).map_err(cm_core::Error::from)?
        }
        "exa300" => {
            let b = param
                .map(|(_, v)| v)
                .unwrap_or_else(gammaex::exa300_threshold);
            serde_json::to_value(gammaex::run_exa300(b, &xs)?).map_err(cm_core::Error::from)?
        }
        other => {
            return Err(cm_core::Error::Constraint(format!(
                "unknown example '{other}' (expected lem0, exa200 or exa300)"
            )))
        }
    };
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&payload).unwrap()),
        Format::Text => println!("{payload:#}"),
    }
    Ok(0)
}
