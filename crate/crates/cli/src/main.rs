use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use flagforge::constructions::{ConstructionSpec, CONSTRUCTION_KINDS};
use flagforge::counting::{
    containment_graph, count_flags_bruteforce, count_partial_flags, count_with_graph, degree_profile_with_graph,
    BRUTEFORCE_CAP,
};
use flagforge::harness::verify::{verify_suite, Suite};
use flagforge::harness::{
    bound_to_csv, build_schedule, evaluate_bound, fit_exponent, rows_to_csv, run_experiment, DEFAULT_MAX_FLATS,
};
use flagforge::LayeredFamily;

/// Exact flag counting among affine flats, extremal constructions and bound experiments
#[derive(Parser, Debug)]
#[command(name = "flagforge", version, about)]
struct Cli {
    /// Seed for every randomized step
    #[arg(long, global = true, env = "FLAGFORGE_SEED", default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a construction and write it as family JSON, plus a
    /// `<name>.predicted.json` sidecar with the guaranteed quantities
    Generate {
        /// One of: elekes-2d, lifted-elekes, flag-lower-bound, grid-3d,
        /// parallel-bundle-3d, disjoint-copies, lightlike, legendrian
        #[arg(long)]
        kind: String,
        /// Construction parameter, repeatable (e.g. --param k=4 --param l=2)
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Count flags of a family JSON file
    ///
    /// Prints `sizes,flags` as CSV. Levels with non-consecutive dimensions
    /// are counted as partial flags.
    Count {
        #[arg(long)]
        input: PathBuf,
        /// Also run the brute-force enumeration and fail on disagreement
        #[arg(long)]
        brute: bool,
        /// Write the points/lines/planes degree profile (`k,l,count`) here
        #[arg(long)]
        profile: Option<PathBuf>,
    },
    /// Evaluate one bound: st, gk, flags, pl34, flags3d-restricted, partial-flags
    ///
    /// Inputs: st and pl34 take m, n; gk takes m, n, B; flags takes
    /// sizes=a,b,..; flags3d-restricted takes p, l, s, b; partial-flags takes
    /// sigma=i,j,.. and sizes. Output columns: bound_id, inputs, value,
    /// dominant_term.
    Bound {
        #[arg(long)]
        id: String,
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
    },
    /// Run a parameter sweep and write a CSV report
    ///
    /// Columns: kind, params, seed, sizes, count, status, bound_st,
    /// bound_pl34, bound_flags, bound_flags3d-restricted,
    /// bound_partial-flags, primary_bound, dominant_term, dominant_value,
    /// measured_constant, max_line_degree, note, and wall_ms with --timing.
    /// Counts are exact decimal integers.
    Experiment {
        #[arg(long)]
        kind: String,
        /// Fixed parameter; values may refer to the swept one, e.g. k=l^2
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
        /// Swept parameter and its values, e.g. l=2,3,4
        #[arg(long, value_name = "KEY=V1,V2,..")]
        sweep: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Fit log(count) against a size expression: size_<i>, total, param:<name>
        #[arg(long)]
        fit: Option<String>,
        /// Add a wall-time column (makes the report non-reproducible)
        #[arg(long)]
        timing: bool,
        /// Skip schedule points with more flats than this
        #[arg(long, default_value_t = DEFAULT_MAX_FLATS)]
        max_flats: usize,
    },
    /// Run the self-check suites; exits nonzero if any fails
    Verify {
        /// Suite to run, repeatable; all suites when omitted
        #[arg(long = "suite")]
        suites: Vec<String>,
    },
}

fn parse_params(raw: &[String]) -> Result<BTreeMap<String, String>> {
    raw.iter()
        .map(|p| {
            let (k, v) = p.split_once('=').with_context(|| format!("parameter {p:?} is not KEY=VALUE"))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

fn sidecar_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "family".into());
    out.with_file_name(format!("{stem}.predicted.json"))
}

fn generate(kind: &str, params: &[String], out: &Path, seed: u64) -> Result<()> {
    if !CONSTRUCTION_KINDS.contains(&kind) {
        bail!("unknown kind {kind:?}; expected one of {}", CONSTRUCTION_KINDS.join(", "));
    }
    let spec = ConstructionSpec::from_params(kind, &parse_params(params)?)?;
    let instance = spec.build(seed)?;
    instance.family.write_json(out).with_context(|| format!("writing {}", out.display()))?;
    let mut sidecar = instance.predicted_json();
    sidecar["kind"] = kind.into();
    sidecar["params"] = serde_json::to_value(spec.params())?;
    sidecar["seed"] = seed.into();
    let path = sidecar_path(out);
    fs::write(&path, serde_json::to_string_pretty(&sidecar)? + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    eprintln!("wrote {} (sizes {:?}) and {}", out.display(), instance.family.sizes(), path.display());
    Ok(())
}

fn count(input: &Path, brute: bool, profile: Option<&Path>) -> Result<()> {
    let family = LayeredFamily::read_json(input).with_context(|| format!("reading {}", input.display()))?;
    let consecutive = family.dims().windows(2).all(|w| w[1] == w[0] + 1);
    let flags =
        if consecutive { count_with_graph(&family, &containment_graph(&family)) } else { count_partial_flags(&family) };
    if brute {
        let b = count_flags_bruteforce(&family, BRUTEFORCE_CAP)?;
        if b != flags {
            bail!("brute force found {b} flags, dynamic programming {flags}");
        }
    }
    if let Some(path) = profile {
        if family.ambient_dim() != 3 || family.dims() != [0, 1, 2] {
            bail!("a degree profile needs points, lines and planes in 3-space");
        }
        let prof = degree_profile_with_graph(&family, &containment_graph(&family));
        fs::write(path, prof.to_csv()).with_context(|| format!("writing {}", path.display()))?;
    }
    let sizes: Vec<String> = family.sizes().iter().map(usize::to_string).collect();
    println!("sizes,flags");
    println!("{},{flags}", sizes.join(";"));
    Ok(())
}

fn bound(id: &str, params: &[String]) -> Result<()> {
    let parsed = parse_params(params)?;
    let value = evaluate_bound(id, &parsed)?;
    let inputs: Vec<(String, String)> = parsed.into_iter().collect();
    print!("{}", bound_to_csv(id, &inputs, &value)?);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn experiment(
    kind: &str,
    params: &[String],
    sweep: &str,
    out: Option<&Path>,
    fit: Option<&str>,
    timing: bool,
    max_flats: usize,
    seed: u64,
) -> Result<()> {
    let (name, values) = sweep.split_once('=').context("--sweep must look like KEY=V1,V2,..")?;
    let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
    let schedule = build_schedule(kind, &parse_params(params)?, name.trim(), &values)?;
    let rows = run_experiment(&schedule, seed, max_flats)?;
    let csv = rows_to_csv(&rows, timing)?;
    match out {
        Some(path) => fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{csv}"),
    }
    if let Some(expr) = fit {
        let f = fit_exponent(&rows, &expr.parse()?)?;
        eprintln!(
            "fit against {expr}: slope {:.6}, intercept {:.6}, r^2 {:.6}, points {}",
            f.slope, f.intercept, f.r_squared, f.points_used
        );
    }
    let skipped = rows.iter().filter(|r| r.skipped.is_some()).count();
    if skipped > 0 {
        eprintln!("{skipped} of {} schedule points skipped", rows.len());
    }
    Ok(())
}

fn verify(suites: &[String], seed: u64) -> Result<bool> {
    let selected: Vec<Suite> = if suites.is_empty() {
        Suite::ALL.to_vec()
    } else {
        suites.iter().map(|s| s.parse()).collect::<flagforge::Result<_>>()?
    };
    let reports = verify_suite(&selected, seed);
    for r in &reports {
        println!("{}", r.summary());
        for note in &r.notes {
            println!("  {note}");
        }
    }
    Ok(reports.iter().all(|r| r.passed()))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Generate { kind, params, out } => generate(&kind, &params, &out, cli.seed).map(|_| true),
        Command::Count { input, brute, profile } => count(&input, brute, profile.as_deref()).map(|_| true),
        Command::Bound { id, params } => bound(&id, &params).map(|_| true),
        Command::Experiment { kind, params, sweep, out, fit, timing, max_flats } => {
            experiment(&kind, &params, &sweep, out.as_deref(), fit.as_deref(), timing, max_flats, cli.seed)
                .map(|_| true)
        }
        Command::Verify { suites } => verify(&suites, cli.seed),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
