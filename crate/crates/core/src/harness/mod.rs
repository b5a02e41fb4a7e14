//! Experiment runner: builds schedules of constructions, counts flags
//! exactly, evaluates the applicable bounds, fits log-log exponents and writes
//! CSV reports.

pub mod verify;

use std::collections::BTreeMap;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_bigint::BigUint;

use crate::bounds::{
    flags3d_restricted_bound, flags_bound, gk_bound, partial_flags_bound, pl34_bound, st_bound, BoundValue, BOUND_IDS,
};
use crate::constructions::ConstructionSpec;
use crate::counting::{containment_graph, count_to_f64, count_with_graph, degree_profile_with_graph};
use crate::error::{Error, Result};
use crate::family::LayeredFamily;

/// Rows whose family exceeds this many flats are skipped.
pub const DEFAULT_MAX_FLATS: usize = 5_000_000;

/// Bound ids in the order they appear as CSV columns.
const BOUND_COLUMNS: [&str; 5] = ["st", "pl34", "flags", "flags3d-restricted", "partial-flags"];

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRow {
    pub kind: String,
    pub params: BTreeMap<String, String>,
    pub seed: u64,
    pub sizes: Vec<usize>,
    /// `None` when the row was skipped.
    pub count: Option<BigUint>,
    pub bounds: BTreeMap<String, BoundValue>,
    /// Bound the measured constant refers to.
    pub primary_bound: Option<String>,
    /// `count / dominant term of the primary bound`.
    pub measured_constant: Option<f64>,
    /// For point/line/plane families: max of points per line and planes per line.
    pub max_line_degree: Option<usize>,
    pub wall_time: Duration,
    pub skipped: Option<String>,
}

impl ExperimentRow {
    fn skipped(spec: &ConstructionSpec, seed: u64, reason: String, wall_time: Duration) -> Self {
        ExperimentRow {
            kind: spec.kind().to_string(),
            params: spec.params(),
            seed,
            sizes: Vec::new(),
            count: None,
            bounds: BTreeMap::new(),
            primary_bound: None,
            measured_constant: None,
            max_line_degree: None,
            wall_time,
            skipped: Some(reason),
        }
    }

    pub fn status(&self) -> &str {
        if self.skipped.is_some() {
            "skipped"
        } else {
            "ok"
        }
    }
}

/// Bounds that apply to a family, keyed by bound id, and the primary one.
pub fn applicable_bounds(
    family: &LayeredFamily,
    max_line_degree: Option<usize>,
) -> Result<(BTreeMap<String, BoundValue>, Option<String>)> {
    let sizes: Vec<u64> = family.sizes().iter().map(|&s| s as u64).collect();
    let dims = family.dims();
    let mut out = BTreeMap::new();
    if sizes.is_empty() {
        return Ok((out, None));
    }
    if dims.windows(2).all(|w| w[1] == w[0] + 1) {
        out.insert("flags".to_string(), flags_bound(&sizes));
    } else {
        out.insert("partial-flags".to_string(), partial_flags_bound(&dims, &sizes)?);
    }
    match (family.ambient_dim(), dims.as_slice()) {
        (2, [0, 1]) => {
            out.insert("st".into(), st_bound(sizes[0], sizes[1]));
        }
        (3, [0, 1]) => {
            out.insert("pl34".into(), pl34_bound(sizes[0], sizes[1]));
        }
        (3, [0, 1, 2]) => {
            let b = max_line_degree.unwrap_or(1).max(1) as u64;
            out.insert("flags3d-restricted".into(), flags3d_restricted_bound(sizes[0], sizes[1], sizes[2], b));
        }
        _ => {}
    }
    let primary = ["flags3d-restricted", "flags", "partial-flags"]
        .into_iter()
        .find(|id| out.contains_key(*id))
        .map(str::to_string);
    Ok((out, primary))
}

fn measure(spec: &ConstructionSpec, seed: u64, max_flats: usize) -> Result<ExperimentRow> {
    let start = Instant::now();
    let instance = match spec.build(seed) {
        Ok(i) => i,
        Err(e @ (Error::GenericityFailure(_) | Error::CapExceeded { .. })) => {
            return Ok(ExperimentRow::skipped(spec, seed, e.to_string(), start.elapsed()))
        }
        Err(e) => return Err(e),
    };
    let family = &instance.family;
    let sizes = family.sizes();
    let total: usize = sizes.iter().sum();
    if total > max_flats {
        let reason = format!("{total} flats exceed the cap of {max_flats}");
        return Ok(ExperimentRow::skipped(spec, seed, reason, start.elapsed()));
    }
    let graph = containment_graph(family);
    let count = count_with_graph(family, &graph);
    let max_line_degree = (family.ambient_dim() == 3 && family.dims() == [0, 1, 2]).then(|| {
        let profile = degree_profile_with_graph(family, &graph);
        profile.max_points_per_line().max(profile.max_planes_per_line())
    });
    let (bounds, primary_bound) = applicable_bounds(family, max_line_degree)?;
    let measured_constant =
        primary_bound.as_ref().map(|id| count_to_f64(&count) / bounds[id].dominant_value).filter(|c| c.is_finite());
    Ok(ExperimentRow {
        kind: spec.kind().to_string(),
        params: spec.params(),
        seed,
        sizes,
        count: Some(count),
        bounds,
        primary_bound,
        measured_constant,
        max_line_degree,
        wall_time: start.elapsed(),
        skipped: None,
    })
}

/// One row per schedule point, in schedule order. Points whose family is too
/// large or cannot be made generic are kept as skipped rows.
pub fn run_experiment(schedule: &[ConstructionSpec], seed: u64, max_flats: usize) -> Result<Vec<ExperimentRow>> {
    if schedule.is_empty() {
        return Err(Error::InvalidParameters("empty schedule".into()));
    }
    schedule.iter().map(|spec| measure(spec, seed, max_flats)).collect()
}

/// Resolves one parameter value against the swept ones: an integer, a swept
/// name, or `name^p`.
fn resolve(value: &str, env: &BTreeMap<String, String>) -> Result<String> {
    let v = value.trim();
    if let Some((name, p)) = v.split_once('^') {
        let base: u64 = env
            .get(name.trim())
            .ok_or_else(|| Error::InvalidParameters(format!("unknown parameter {name:?} in {v:?}")))?
            .parse()
            .map_err(|_| Error::InvalidParameters(format!("{name} is not an integer")))?;
        let p: u32 = p.trim().parse().map_err(|_| Error::InvalidParameters(format!("bad exponent in {v:?}")))?;
        return Ok(base.pow(p).to_string());
    }
    Ok(env.get(v).cloned().unwrap_or_else(|| v.to_string()))
}

/// Specs for `kind` with the fixed parameters and `sweep_name` taking each of
/// `sweep_values`. Fixed values may refer to the swept one, e.g. `k = l^2`.
pub fn build_schedule(
    kind: &str,
    fixed: &BTreeMap<String, String>,
    sweep_name: &str,
    sweep_values: &[String],
) -> Result<Vec<ConstructionSpec>> {
    sweep_values
        .iter()
        .map(|v| {
            let mut env = BTreeMap::new();
            env.insert(sweep_name.to_string(), v.clone());
            let mut params = env.clone();
            for (k, raw) in fixed {
                params.insert(k.clone(), resolve(raw, &env)?);
            }
            ConstructionSpec::from_params(kind, &params)
        })
        .collect()
}

/// The x coordinate used for exponent fits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SizeExpr {
    Level(usize),
    Total,
    Param(String),
}

impl SizeExpr {
    pub fn eval(&self, row: &ExperimentRow) -> Option<f64> {
        match self {
            SizeExpr::Level(i) => row.sizes.get(*i).map(|&s| s as f64),
            SizeExpr::Total => Some(row.sizes.iter().sum::<usize>() as f64),
            SizeExpr::Param(name) => row.params.get(name).and_then(|v| v.parse().ok()),
        }
    }
}

impl FromStr for SizeExpr {
    type Err = Error;
    /// `size_<i>`, `total`, or `param:<name>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "total" {
            return Ok(SizeExpr::Total);
        }
        if let Some(i) = s.strip_prefix("size_") {
            return i.parse().map(SizeExpr::Level).map_err(|_| Error::Parse(format!("bad level in {s:?}")));
        }
        if let Some(name) = s.strip_prefix("param:") {
            return Ok(SizeExpr::Param(name.to_string()));
        }
        Err(Error::Parse(format!("size expression must be size_<i>, total or param:<name>, got {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points_used: usize,
}

/// Least squares fit of `ln y = slope · ln x + intercept` over points with
/// positive coordinates.
pub fn fit_log_log(points: &[(f64, f64)]) -> Result<FitResult> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = logs.len();
    if n < 2 {
        return Err(Error::InsufficientData(n));
    }
    let nf = n as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData(1));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy <= f64::EPSILON * nf { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok(FitResult { slope, intercept, r_squared, points_used: n })
}

/// Fits exact counts against `x` over the rows that were not skipped.
pub fn fit_exponent(rows: &[ExperimentRow], x: &SizeExpr) -> Result<FitResult> {
    let points: Vec<(f64, f64)> =
        rows.iter().filter_map(|r| Some((x.eval(r)?, count_to_f64(r.count.as_ref()?)))).collect();
    fit_log_log(&points)
}

fn int_param(params: &BTreeMap<String, String>, names: &[&str]) -> Result<u64> {
    let raw = names
        .iter()
        .find_map(|n| params.get(*n))
        .ok_or_else(|| Error::InvalidParameters(format!("missing parameter {}", names[0])))?;
    raw.trim()
        .parse()
        .map_err(|_| Error::InvalidParameters(format!("parameter {} must be a non-negative integer", names[0])))
}

fn list_param(params: &BTreeMap<String, String>, name: &str) -> Result<Vec<u64>> {
    let raw = params.get(name).ok_or_else(|| Error::InvalidParameters(format!("missing parameter {name}")))?;
    raw.split(',')
        .map(|s| s.trim().parse().map_err(|_| Error::InvalidParameters(format!("bad entry {s:?} in {name}"))))
        .collect()
}

/// Evaluates a bound by id from named parameters:
/// `st`, `pl34`: m, n; `gk`: m, n, B; `flags`: sizes; `flags3d-restricted`:
/// p, l, s, b; `partial-flags`: sigma, sizes.
pub fn evaluate_bound(id: &str, params: &BTreeMap<String, String>) -> Result<BoundValue> {
    match id {
        "st" => Ok(st_bound(int_param(params, &["m"])?, int_param(params, &["n"])?)),
        "pl34" => Ok(pl34_bound(int_param(params, &["m"])?, int_param(params, &["n"])?)),
        "gk" => Ok(gk_bound(int_param(params, &["m"])?, int_param(params, &["n"])?, int_param(params, &["B", "b"])?)),
        "flags" => {
            let sizes = list_param(params, "sizes")?;
            if sizes.is_empty() || sizes.contains(&0) {
                return Err(Error::InvalidParameters("sizes must be positive".into()));
            }
            Ok(flags_bound(&sizes))
        }
        "flags3d-restricted" => {
            let b = int_param(params, &["b"])?;
            if b == 0 {
                return Err(Error::InvalidParameters("b must be at least 1".into()));
            }
            Ok(flags3d_restricted_bound(
                int_param(params, &["p"])?,
                int_param(params, &["l"])?,
                int_param(params, &["s"])?,
                b,
            ))
        }
        "partial-flags" => {
            let sigma: Vec<usize> = list_param(params, "sigma")?.into_iter().map(|x| x as usize).collect();
            partial_flags_bound(&sigma, &list_param(params, "sizes")?)
        }
        other => {
            Err(Error::InvalidParameters(format!("unknown bound {other:?}; expected one of {}", BOUND_IDS.join(", "))))
        }
    }
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

fn join_params(params: &BTreeMap<String, String>) -> String {
    params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}

/// Header of the experiment CSV. Wall time is only included on request so
/// the default report is byte-identical across runs.
pub fn experiment_header(timing: bool) -> Vec<String> {
    let mut h: Vec<String> =
        ["kind", "params", "seed", "sizes", "count", "status"].iter().map(|s| s.to_string()).collect();
    h.extend(BOUND_COLUMNS.iter().map(|b| format!("bound_{b}")));
    h.extend(
        ["primary_bound", "dominant_term", "dominant_value", "measured_constant", "max_line_degree", "note"]
            .iter()
            .map(|s| s.to_string()),
    );
    if timing {
        h.push("wall_ms".into());
    }
    h
}

pub fn rows_to_csv(rows: &[ExperimentRow], timing: bool) -> Result<String> {
    let mut w = csv_writer();
    w.write_record(experiment_header(timing)).map_err(csv_err)?;
    for r in rows {
        let primary = r.primary_bound.as_ref().and_then(|id| r.bounds.get(id));
        let mut rec = vec![
            r.kind.clone(),
            join_params(&r.params),
            r.seed.to_string(),
            r.sizes.iter().map(usize::to_string).collect::<Vec<_>>().join(";"),
            r.count.as_ref().map(BigUint::to_string).unwrap_or_default(),
            r.status().to_string(),
        ];
        rec.extend(
            BOUND_COLUMNS.iter().map(|b| r.bounds.get(*b).map(|v| format!("{:.6e}", v.value)).unwrap_or_default()),
        );
        rec.push(r.primary_bound.clone().unwrap_or_default());
        rec.push(primary.map(|b| b.dominant_term.clone()).unwrap_or_default());
        rec.push(primary.map(|b| format!("{:.6e}", b.dominant_value)).unwrap_or_default());
        rec.push(r.measured_constant.map(|c| format!("{c:.6}")).unwrap_or_default());
        rec.push(r.max_line_degree.map(|b| b.to_string()).unwrap_or_default());
        rec.push(r.skipped.clone().unwrap_or_default());
        if timing {
            rec.push(r.wall_time.as_millis().to_string());
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    finish(w)
}

/// One-row CSV for a single bound evaluation: `bound_id, inputs…, value, dominant_term`.
pub fn bound_to_csv(id: &str, inputs: &[(String, String)], value: &BoundValue) -> Result<String> {
    let mut w = csv_writer();
    let mut header = vec!["bound_id".to_string()];
    header.extend(inputs.iter().map(|(k, _)| k.clone()));
    header.extend(["value".to_string(), "dominant_term".to_string()]);
    w.write_record(&header).map_err(csv_err)?;
    let mut rec = vec![id.to_string()];
    rec.extend(inputs.iter().map(|(_, v)| v.clone()));
    rec.extend([format!("{:.6e}", value.value), value.dominant_term.clone()]);
    w.write_record(&rec).map_err(csv_err)?;
    finish(w)
}
