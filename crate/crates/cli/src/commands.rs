use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use tcm_core::analytics::{
    char_euler_product, landau_liminf_check_with, mertens_product, phi_bound_scan_with,
};
use tcm_core::feasibility::{bound_table, chain_audit, refined_table, EULER_GAMMA};
use tcm_core::galois::{
    cn_elements, kernel_size, max_stabilizer_order, verify_homotheties, CN_CAP,
};
use tcm_core::ideal::{brute_force_phi, ideal_norm, phi_k, principal_ideal, BRUTE_FORCE_PHI_CAP};
use tcm_core::quad::{class_number, l1_value};
use tcm_core::{BoundRecord, Discriminant, TorsionShape};

use crate::cache::{self, ClassNumberCache, DEFAULT_CAP, DEFAULT_PATH};
use crate::error::CliError;
use crate::output::{emit, round_opt, round_sig, Format, OutputEnvelope};

/// Largest degree accepted by `tcm bound`.
pub const MAX_DEGREE: u64 = 1_000_000;

#[derive(Debug, Parser)]
#[command(
    name = "tcm",
    version,
    about = "Torsion bounds for CM elliptic curves and the arithmetic behind them"
)]
pub struct Cli {
    #[arg(long, value_enum, default_value = "table", global = true)]
    pub format: Format,
    /// Class number cache file.
    #[arg(long, default_value = DEFAULT_PATH, global = true)]
    pub cache: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Upper bounds B(d) on CM torsion for each degree in a range.
    Bound {
        #[arg(long)]
        d_min: u64,
        #[arg(long)]
        d_max: u64,
    },
    /// phi_K(N O_K) with its factorization and a residue-count cross-check.
    Phi {
        #[arg(long, allow_negative_numbers = true)]
        disc: i64,
        #[arg(long)]
        n: u64,
    },
    /// Exhaustive checks on the unit group (O/NO)^x.
    Galois(GaloisArgs),
    /// Euler products, scans and the liminf comparison.
    Analytics {
        #[command(subcommand)]
        which: AnalyticsCommand,
    },
    /// Load, validate or (re)build the class number cache.
    Cache {
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: u64,
        /// Rebuild even if a valid cache exists.
        #[arg(long)]
        rebuild: bool,
    },
    /// Per-field feasibility of every relaxed-feasible shape (diagnostic).
    Refine {
        #[arg(long)]
        d: u64,
        #[arg(long)]
        disc_cap: u64,
    },
    /// Evaluate each inequality of the degree chain for one shape.
    Audit {
        #[arg(long)]
        d: u64,
        #[arg(long, allow_negative_numbers = true)]
        disc: i64,
        #[arg(long)]
        a: u64,
        #[arg(long)]
        b: u64,
    },
}

#[derive(Debug, Args)]
pub struct GaloisArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub disc: i64,
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub a: Option<u32>,
    #[arg(long)]
    pub b: Option<u32>,
    /// Enumerate C_N and check the homotheties instead.
    #[arg(long, conflicts_with_all = ["p", "a", "b"])]
    pub n: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum AnalyticsCommand {
    Mertens {
        #[arg(long)]
        x: u64,
    },
    Product {
        #[arg(long, allow_negative_numbers = true)]
        disc: i64,
        #[arg(long)]
        x: u64,
    },
    Scan {
        #[arg(long, allow_negative_numbers = true)]
        disc: i64,
        #[arg(long)]
        x: u64,
    },
    Landau {
        #[arg(long, allow_negative_numbers = true)]
        disc: i64,
        #[arg(long)]
        x: u64,
    },
}

/// One line of `tcm bound` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub d: u64,
    pub a: u64,
    pub b: u64,
    pub bound: u64,
    pub ratio: Option<f64>,
    /// Supremum of `ratio` over the rows so far.
    pub running_constant: Option<f64>,
}

impl BoundRow {
    pub fn to_record(&self) -> BoundRecord {
        BoundRecord {
            d: self.d,
            best_shape: TorsionShape::new(self.a, self.b),
            bound: self.bound as u128,
            ratio: self.ratio,
        }
    }
}

/// Rows for a bound table, floats rounded for output.
pub fn bound_rows(records: &[BoundRecord]) -> Vec<BoundRow> {
    let mut running: Option<f64> = None;
    records
        .iter()
        .map(|r| {
            if let Some(x) = r.ratio {
                running = Some(running.map_or(x, |m: f64| m.max(x)));
            }
            BoundRow {
                d: r.d,
                a: r.best_shape.a,
                b: r.best_shape.b,
                bound: u64::try_from(r.bound).expect("bound fits u64"),
                ratio: round_opt(r.ratio),
                running_constant: round_opt(running),
            }
        })
        .collect()
}

fn params(pairs: &[(&str, Value)]) -> Map<String, Value> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}

fn fundamental(disc: i64) -> Result<Discriminant, CliError> {
    Ok(Discriminant::fundamental(disc)?)
}

fn class_numbers(path: &std::path::Path) -> Result<Option<ClassNumberCache>, CliError> {
    cache::load_existing(path)
}

fn cmd_bound(d_min: u64, d_max: u64) -> Result<OutputEnvelope, CliError> {
    if d_min < 1 || d_min > d_max || d_max > MAX_DEGREE {
        return Err(CliError::Usage(format!(
            "invalid degree range {d_min}..{d_max}: need 1 <= d-min <= d-max <= {MAX_DEGREE}"
        )));
    }
    if d_max - d_min >= 10_000 {
        eprintln!("computing B(d) for d in {d_min}..={d_max}");
    }
    let records = bound_table(d_min, d_max)?;
    let mut env = OutputEnvelope::new(
        "bound",
        params(&[("d_min", json!(d_min)), ("d_max", json!(d_max))]),
    );
    for row in bound_rows(&records) {
        env.push(&row)?;
    }
    Ok(env)
}

fn cmd_phi(disc: i64, n: u64) -> Result<OutputEnvelope, CliError> {
    let d = fundamental(disc)?;
    let ideal = principal_ideal(d, n)?;
    let phi = phi_k(&ideal);
    let brute = (n <= BRUTE_FORCE_PHI_CAP)
        .then(|| brute_force_phi(d, n, BRUTE_FORCE_PHI_CAP))
        .transpose()?;
    let mut env = OutputEnvelope::new("phi", params(&[("disc", json!(disc)), ("n", json!(n))]));
    env.push(&json!({
        "disc": disc,
        "n": n,
        "phi": phi,
        "norm": ideal_norm(&ideal),
        "factorization": ideal.to_string(),
        "brute_force": brute,
        "agree": brute.map(|b| b == phi),
    }))?;
    Ok(env)
}

fn cmd_galois(args: &GaloisArgs) -> Result<OutputEnvelope, CliError> {
    let d = Discriminant::new(args.disc)?;
    let mut p = Map::new();
    p.insert("disc".into(), json!(args.disc));
    if let Some(n) = args.n {
        p.insert("n".into(), json!(n));
        let mut env = OutputEnvelope::new("galois", p);
        let order = cn_elements(d, n, CN_CAP)?.len();
        env.push(&json!({
            "disc": args.disc,
            "N": n,
            "order": order,
            "homotheties": verify_homotheties(d, n, CN_CAP)?,
        }))?;
        return Ok(env);
    }
    let (Some(prime), Some(a)) = (args.p, args.a) else {
        return Err(CliError::Usage(
            "galois needs --n, or --p and --a (and optionally --b)".into(),
        ));
    };
    p.insert("p".into(), json!(prime));
    p.insert("a".into(), json!(a));
    match args.b {
        Some(b) => {
            p.insert("b".into(), json!(b));
            let mut env = OutputEnvelope::new("galois", p);
            let r = kernel_size(d, prime, a, b, CN_CAP)?;
            let expected = prime.pow(2 * b);
            env.push(&json!({
                "disc": args.disc,
                "p": prime,
                "A": a,
                "B": b,
                "kernel_size": r.kernel_size,
                "expected": expected,
                "image_size": r.image_size,
                "target_size": r.target_size,
                "surjective": r.surjective,
            }))?;
            Ok(env)
        }
        None => {
            let mut env = OutputEnvelope::new("galois", p);
            let r = max_stabilizer_order(d, prime, a, CN_CAP)?;
            env.push(&json!({
                "disc": args.disc,
                "p": prime,
                "A": a,
                "split_type": r.split_type,
                "max_stabilizer_order": r.max_stabilizer_order,
                "expected_divisor": r.expected_divisor,
                "divides": r.divides_expected(),
            }))?;
            Ok(env)
        }
    }
}

fn cmd_analytics(
    which: &AnalyticsCommand,
    cache_path: &std::path::Path,
) -> Result<OutputEnvelope, CliError> {
    let h_of = |d: Discriminant| -> Result<u64, CliError> {
        Ok(class_numbers(cache_path)?.map_or_else(|| class_number(d), |c| c.class_number(d)))
    };
    match *which {
        AnalyticsCommand::Mertens { x } => {
            let m = mertens_product(x)?;
            let mut env = OutputEnvelope::new("analytics mertens", params(&[("x", json!(x))]));
            env.push(&json!({
                "x": m.x,
                "value": round_sig(m.value),
                "terms": m.terms,
                "normalized": round_sig(m.value * EULER_GAMMA.exp() * (x as f64).ln()),
            }))?;
            Ok(env)
        }
        AnalyticsCommand::Product { disc, x } => {
            let d = fundamental(disc)?;
            let prod = char_euler_product(d, x)?;
            let l1 = l1_value(d, h_of(d)?);
            let mut env = OutputEnvelope::new(
                "analytics product",
                params(&[("disc", json!(disc)), ("x", json!(x))]),
            );
            env.push(&json!({
                "D": disc,
                "x": prod.x,
                "value": round_sig(prod.value),
                "terms": prod.terms,
                "inverse": round_sig(1.0 / prod.value),
                "l1": round_sig(l1),
            }))?;
            Ok(env)
        }
        AnalyticsCommand::Scan { disc, x } => {
            let d = fundamental(disc)?;
            let h = h_of(d)?;
            let r = phi_bound_scan_with(d, x, h)?;
            let mut env = OutputEnvelope::new(
                "analytics scan",
                params(&[("disc", json!(disc)), ("x", json!(x))]),
            );
            env.push(&json!({
                "D": disc,
                "X": x,
                "h": h,
                "min_value": round_sig(r.min_value),
                "argmin_ideal": r.argmin_ideal.to_string(),
                "argmin_norm": r.argmin_ideal.norm(),
            }))?;
            Ok(env)
        }
        AnalyticsCommand::Landau { disc, x } => {
            let d = fundamental(disc)?;
            let r = landau_liminf_check_with(d, x, h_of(d)?)?;
            let mut env = OutputEnvelope::new(
                "analytics landau",
                params(&[("disc", json!(disc)), ("x", json!(x))]),
            );
            env.push(&json!({
                "D": disc,
                "X": x,
                "empirical_min_tail": round_sig(r.empirical_min_tail),
                "target": round_sig(r.target),
                "ratio": round_sig(r.empirical_min_tail / r.target),
                "argmin_ideal": r.argmin_ideal.to_string(),
            }))?;
            Ok(env)
        }
    }
}

fn cmd_cache(path: &std::path::Path, cap: u64, rebuild: bool) -> Result<OutputEnvelope, CliError> {
    let (cache, status) = if rebuild {
        let c = ClassNumberCache::build(cap);
        c.save(path)?;
        (c, cache::CacheStatus::Built)
    } else {
        cache::cache_io(path, cap)?
    };
    let mut env = OutputEnvelope::new(
        "cache",
        params(&[
            ("path", json!(path.display().to_string())),
            ("cap", json!(cap)),
        ]),
    );
    env.push(&json!({
        "path": path.display().to_string(),
        "status": status.as_str(),
        "entries": cache.len(),
        "max_abs_disc": cache.max_abs_disc(),
    }))?;
    Ok(env)
}

fn cmd_refine(
    d: u64,
    disc_cap: u64,
    cache_path: &std::path::Path,
) -> Result<OutputEnvelope, CliError> {
    let cache = class_numbers(cache_path)?;
    let rows = match &cache {
        Some(c) => refined_table(d, disc_cap, |disc| c.class_number(disc))?,
        None => refined_table(d, disc_cap, class_number)?,
    };
    let mut env = OutputEnvelope::new(
        "refine",
        params(&[("d", json!(d)), ("disc_cap", json!(disc_cap))]),
    );
    for r in &rows {
        env.push(r)?;
    }
    Ok(env)
}

fn cmd_audit(d: u64, disc: i64, a: u64, b: u64) -> Result<OutputEnvelope, CliError> {
    let trace = chain_audit(d, fundamental(disc)?, a, b)?;
    let mut env = OutputEnvelope::new(
        "audit",
        params(&[
            ("d", json!(d)),
            ("disc", json!(disc)),
            ("a", json!(a)),
            ("b", json!(b)),
        ]),
    );
    for (i, s) in trace.steps.iter().enumerate() {
        env.push(&json!({
            "step": i,
            "label": s.label,
            "lhs": s.lhs.to_string(),
            "relation": s.relation,
            "rhs": s.rhs.to_string(),
            "holds": s.holds,
            "first_failure": trace.first_failure == Some(i),
        }))?;
    }
    Ok(env)
}

/// Runs one parsed invocation, writing the data stream to `out`.
pub fn run<W: Write>(cli: &Cli, out: &mut W) -> Result<(), CliError> {
    let env = match &cli.command {
        Command::Bound { d_min, d_max } => cmd_bound(*d_min, *d_max)?,
        Command::Phi { disc, n } => cmd_phi(*disc, *n)?,
        Command::Galois(args) => cmd_galois(args)?,
        Command::Analytics { which } => cmd_analytics(which, &cli.cache)?,
        Command::Cache { cap, rebuild } => cmd_cache(&cli.cache, *cap, *rebuild)?,
        Command::Refine { d, disc_cap } => cmd_refine(*d, *disc_cap, &cli.cache)?,
        Command::Audit { d, disc, a, b } => cmd_audit(*d, *disc, *a, *b)?,
    };
    emit(&env, cli.format, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Result<String, CliError> {
        let cli = Cli::try_parse_from(std::iter::once("tcm").chain(args.iter().copied()))
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let mut buf = Vec::new();
        run(&cli, &mut buf)?;
        Ok(String::from_utf8(buf).unwrap())
    }

    fn rows(args: &[&str]) -> Vec<Value> {
        let mut full = args.to_vec();
        full.extend(["--format", "json"]);
        let env: OutputEnvelope = serde_json::from_str(&run_args(&full).unwrap()).unwrap();
        env.rows
    }

    #[test]
    fn phi_command() {
        assert_eq!(rows(&["phi", "--disc", "-4", "--n", "5"])[0]["phi"], 16);
        assert_eq!(rows(&["phi", "--disc", "-4", "--n", "1"])[0]["phi"], 1);
        let r = &rows(&["phi", "--disc", "-4", "--n", "12"])[0];
        assert_eq!(
            (r["phi"].as_u64(), r["agree"].as_bool()),
            (Some(64), Some(true))
        );
        let err = run_args(&["phi", "--disc", "-12", "--n", "5"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn galois_command() {
        let r = &rows(&["galois", "--disc", "-4", "--p", "3", "--a", "1", "--b", "1"])[0];
        assert_eq!(r["kernel_size"], 9);
        let r = &rows(&["galois", "--disc", "-7", "--p", "5", "--a", "0"])[0];
        assert_eq!(
            (r["max_stabilizer_order"].as_u64(), r["split_type"].as_str()),
            (Some(1), Some("Inert"))
        );
        let err = run_args(&["galois", "--disc", "-4", "--n", "1000"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("200"));
        assert_eq!(
            rows(&["galois", "--disc", "-8", "--n", "6"])[0]["homotheties"],
            true
        );
    }

    #[test]
    fn bound_command() {
        let r = rows(&["bound", "--d-min", "1", "--d-max", "1"]);
        assert_eq!(r.len(), 1);
        assert_eq!(r[0]["bound"], 60);
        assert!(r[0]["ratio"].is_null());
        assert_eq!(
            run_args(&["bound", "--d-min", "5", "--d-max", "3"])
                .unwrap_err()
                .exit_code(),
            2
        );
        assert_eq!(
            run_args(&["bound", "--d-min", "1", "--d-max", "1000001"])
                .unwrap_err()
                .exit_code(),
            2
        );
    }

    #[test]
    fn analytics_command() {
        let r = &rows(&[
            "analytics",
            "product",
            "--disc",
            "-4",
            "--x",
            "2",
            "--cache",
            "/nonexistent/c.csv",
        ])[0];
        assert_eq!(r["value"], 1.0);
        let r = &rows(&["analytics", "mertens", "--x", "1000000"])[0];
        let v = r["normalized"].as_f64().unwrap();
        assert!((0.98..=1.02).contains(&v));
        let r = &rows(&[
            "analytics",
            "scan",
            "--disc",
            "-4",
            "--x",
            "10000",
            "--cache",
            "/nonexistent/c.csv",
        ])[0];
        assert!(r["min_value"].as_f64().unwrap() > 0.0);
        assert!(r["argmin_ideal"].as_str().unwrap().starts_with('P'));
    }

    #[test]
    fn audit_and_refine_commands() {
        let r = rows(&["audit", "--d", "1", "--disc", "-4", "--a", "5", "--b", "1"]);
        assert_eq!(r[0]["holds"], false);
        assert_eq!(r[0]["first_failure"], true);
        assert_eq!(r[0]["rhs"], "16/3");
        let r = rows(&[
            "refine",
            "--d",
            "1",
            "--disc-cap",
            "4",
            "--cache",
            "/nonexistent/c.csv",
        ]);
        assert!(r
            .iter()
            .any(|row| row["D"] == -4 && row["a"] == 2 && row["b"] == 1 && row["lhs"] == "1/3"));
    }

    #[test]
    fn bound_rows_track_running_sup() {
        let records = bound_table(1, 40).unwrap();
        let rows = bound_rows(&records);
        assert_eq!(rows[0].running_constant, None);
        let sup = records.iter().filter_map(|r| r.ratio).fold(0.0, f64::max);
        assert_eq!(rows.last().unwrap().running_constant, Some(round_sig(sup)));
    }
}
