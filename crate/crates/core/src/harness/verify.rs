//! Self-check suites run by `flagforge verify` and by the acceptance tests.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::bounds::{valid_exponent_tuples, valid_exponent_tuples_bruteforce, ExponentTuple};
use crate::constructions::{lightlike_instance, random_nested_family, ConstructionSpec};
use crate::counting::{
    count_flags_bruteforce_with, count_flags_dp, degree_split, max_coplanar_through_point, BRUTEFORCE_CAP,
};
use crate::error::{Error, Result};
use crate::family::{LayeredFamily, Level};
use crate::flat::{Flat, Point};
use crate::generic::{generic_projection, generic_section, random_vector, seeded, LinearMap, SeededRng};
use crate::legendrian::{is_legendrian, legendrian_form, legendrian_line_at, legendrian_point};
use crate::linalg;
use crate::scalar::{int, Scalar};
use crate::space3::{dualize_3d, Line3, Plane3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    Oracle,
    EqSum,
    Duality,
    Legendrian,
    Predicted,
    Tuples,
    Section,
    Lightlike,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Oracle,
        Suite::EqSum,
        Suite::Duality,
        Suite::Legendrian,
        Suite::Predicted,
        Suite::Tuples,
        Suite::Section,
        Suite::Lightlike,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Oracle => "oracle",
            Suite::EqSum => "eq-sum",
            Suite::Duality => "duality",
            Suite::Legendrian => "legendrian",
            Suite::Predicted => "predicted",
            Suite::Tuples => "tuples",
            Suite::Section => "section",
            Suite::Lightlike => "lightlike",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s.trim())
            .ok_or_else(|| Error::Parse(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: usize,
    pub failures: Vec<String>,
    pub notes: Vec<String>,
}

impl SuiteReport {
    fn new(suite: Suite) -> Self {
        SuiteReport { suite, checks: 0, failures: Vec::new(), notes: Vec::new() }
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(msg());
        }
    }

    fn error(&mut self, context: &str, e: Error) {
        self.checks += 1;
        self.failures.push(format!("{context}: {e}"));
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// `PASS name (n checks)` or `FAIL name (k of n failed): first failure`.
    pub fn summary(&self) -> String {
        if self.passed() {
            format!("PASS {} ({} checks)", self.suite, self.checks)
        } else {
            format!("FAIL {} ({} of {} failed): {}", self.suite, self.failures.len(), self.checks, self.failures[0])
        }
    }
}

/// Flag counts from the DP against brute force with `contains(outer, inner)`.
pub fn oracle_suite<P>(seed: u64, instances: usize, contains: P) -> SuiteReport
where
    P: Fn(&Flat, &Flat) -> bool,
{
    let mut r = SuiteReport::new(Suite::Oracle);
    for n in 0..instances {
        let d = 1 + n % 4;
        let fam = match random_nested_family(d, 25, seed.wrapping_add(n as u64)) {
            Ok(f) => f,
            Err(e) => {
                r.error("generate", e);
                continue;
            }
        };
        match count_flags_bruteforce_with(&fam, BRUTEFORCE_CAP, &contains) {
            Ok(brute) => {
                let dp = count_flags_dp(&fam);
                r.check(dp == brute, || {
                    format!("instance {n} (d={d}, sizes {:?}): dp {dp} vs brute {brute}", fam.sizes())
                });
            }
            Err(e) => r.error("brute force", e),
        }
    }
    r
}

pub fn default_oracle_suite(seed: u64, instances: usize) -> SuiteReport {
    oracle_suite(seed, instances, |outer, inner| outer.contains(inner).unwrap_or(false))
}

/// Total count equals the sum over the three parts of every degree split.
pub fn eq_sum_suite(seed: u64, instances: usize) -> SuiteReport {
    let mut r = SuiteReport::new(Suite::EqSum);
    for n in 0..instances {
        let d = 3 + n % 2;
        let fam = match random_nested_family(d, 15, seed.wrapping_add(1000 + n as u64)) {
            Ok(f) => f,
            Err(e) => {
                r.error("generate", e);
                continue;
            }
        };
        let total = count_flags_dp(&fam);
        for i in 1..fam.len() - 1 {
            let split = match degree_split(&fam, i) {
                Ok(s) => s,
                Err(e) => {
                    r.error("split", e);
                    continue;
                }
            };
            let mut sum = num_bigint::BigUint::from(0u32);
            for part in split.parts() {
                match fam.with_level(i, part.to_vec()) {
                    Ok(sub) => sum += count_flags_dp(&sub),
                    Err(e) => r.error("restrict", e),
                }
            }
            r.check(sum == total, || format!("instance {n}, level {i}: parts sum {sum} vs total {total}"));
        }
    }
    r
}

/// Dualizes a random point/line/plane family after a random linear change of
/// coordinates that leaves nothing vertical.
pub fn dual_pair(seed: u64) -> Result<(LayeredFamily, LayeredFamily)> {
    let fam = random_nested_family(3, 15, seed)?;
    let mut rng = seeded(seed ^ 0x5eed);
    for _ in 0..32 {
        let map = LinearMap::random(3, 10, &mut rng);
        let rotated = fam.map_flats(3, |f| Ok(map.apply(f)))?;
        let duals: Result<Vec<Vec<Flat>>> =
            rotated.levels().iter().rev().map(|l| l.flats.iter().map(dualize_3d).collect()).collect();
        match duals {
            Ok(levels) => {
                let levels = levels.into_iter().enumerate().map(|(dim, flats)| Level { dim, flats }).collect();
                return Ok((rotated, LayeredFamily::new(3, levels)?));
            }
            Err(Error::Vertical(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::GenericityFailure("every rotation left a vertical flat".into()))
}

pub fn duality_suite(seed: u64, instances: usize) -> SuiteReport {
    let mut r = SuiteReport::new(Suite::Duality);
    for n in 0..instances {
        let s = seed.wrapping_add(2000 + n as u64);
        match dual_pair(s) {
            Ok((fam, dual)) => {
                let (a, b) = (count_flags_dp(&fam), count_flags_dp(&dual));
                r.check(a == b, || format!("instance {n}: {a} flags vs {b} after duality"));
            }
            Err(e) => r.error("dualize", e),
        }
    }
    r
}

fn small_vec<R: Rng>(rng: &mut R, range: i64) -> Vec<Scalar> {
    (0..3).map(|_| int(rng.gen_range(-range..=range))).collect()
}

fn nonzero_small_vec<R: Rng>(rng: &mut R, range: i64) -> Vec<Scalar> {
    loop {
        let v = small_vec(rng, range);
        if v.iter().any(|x| !x.is_zero()) {
            return v;
        }
    }
}

/// Anchor independence of the predicate on random lines, and the in-plane
/// laws on random non-vertical planes.
pub fn legendrian_suite(seed: u64, lines: usize, planes: usize) -> SuiteReport {
    let mut r = SuiteReport::new(Suite::Legendrian);
    let mut rng = seeded(seed);
    for n in 0..lines {
        let anchor = small_vec(&mut rng, 50);
        let mut dir = nonzero_small_vec(&mut rng, 50);
        if n % 2 == 0 {
            // force the predicate to hold through the z-component
            if dir[0].is_zero() && dir[1].is_zero() {
                dir[0] = int(1);
            }
            dir[2] = int(0);
            dir[2] = -&legendrian_form(&anchor, &dir);
        }
        let line = match Line3::through(&anchor, &dir) {
            Ok(l) => l,
            Err(e) => {
                r.error("line", e);
                continue;
            }
        };
        let t = int(rng.gen_range(1..=100));
        let other = line.point_at(&t);
        let a = legendrian_form(&anchor, &dir).is_zero();
        let b = legendrian_form(&other, &dir).is_zero();
        r.check(a == b && a == is_legendrian(&line), || {
            format!("line {n}: predicate differs between anchors {anchor:?} and {other:?}")
        });
    }
    for n in 0..planes {
        let (u, v, w) = (int(rng.gen_range(-30..=30)), int(rng.gen_range(-30..=30)), int(rng.gen_range(-30..=30)));
        let plane = Plane3::non_vertical(&u, &v, &w);
        let flat = plane.to_flat();
        let dirs = flat.directions();
        let q = match legendrian_point(&plane) {
            Ok(q) => q,
            Err(e) => {
                r.error("legendrian point", e);
                continue;
            }
        };
        r.check(plane.contains_point(&q), || format!("plane {n}: Legendrian point off the plane"));
        let combo = |rng: &mut SeededRng| loop {
            let (s, t) = (int(rng.gen_range(-20..=20)), int(rng.gen_range(-20..=20)));
            if !(s.is_zero() && t.is_zero()) {
                return linalg::add(&linalg::scale(&dirs[0], &s), &linalg::scale(&dirs[1], &t));
            }
        };
        for _ in 0..20 {
            let dir = combo(&mut rng);
            let ok =
                Line3::through(&q, &dir).map(|l| is_legendrian(&l) && flat.contains(&l.to_flat()).unwrap_or(false));
            r.check(ok.unwrap_or(false), || format!("plane {n}: in-plane line through its point is not Legendrian"));
        }
        for _ in 0..20 {
            let p = linalg::add(&q, &combo(&mut rng));
            let unique = !(legendrian_form(&p, &dirs[0]).is_zero() && legendrian_form(&p, &dirs[1]).is_zero());
            match legendrian_line_at(&p, &plane) {
                Ok(Some(line)) => {
                    let lf = line.to_flat();
                    let ok =
                        unique && is_legendrian(&line) && lf.contains_point(&p) && flat.contains(&lf).unwrap_or(false);
                    r.check(ok, || format!("plane {n}: bad Legendrian line at {p:?}"));
                }
                Ok(None) => r.check(false, || format!("plane {n}: no Legendrian line at {p:?}")),
                Err(e) => r.error("legendrian line", e),
            }
        }
    }
    r
}

/// Small specs across every generator, used to compare predictions with counts.
pub fn prediction_specs() -> Vec<ConstructionSpec> {
    let mut specs = Vec::new();
    for k in 1..=3 {
        for l in 1..=3 {
            specs.push(ConstructionSpec::Elekes2d { k, l });
        }
    }
    specs.push(ConstructionSpec::LiftedElekes { k: 2, l: 2, d: 4, i: 1 });
    specs.push(ConstructionSpec::LiftedElekes { k: 3, l: 1, d: 5, i: 2 });
    for (n, b) in [(4, 2), (9, 3), (12, 3), (40, 5)] {
        specs.push(ConstructionSpec::ParallelBundle3d { n, b });
    }
    for l in 1..=2 {
        specs.push(ConstructionSpec::Grid3d { k: l * l, l });
    }
    for (t, sizes) in [
        ("(0,1,0)", vec![1, 7, 1]),
        ("(1,0,1)", vec![4, 1, 5]),
        ("(2/3,2/3,0)", vec![8, 2, 1]),
        ("(0,2/3,2/3,0)", vec![1, 9, 9, 2]),
        ("(1,0,0,1)", vec![3, 2, 2, 4]),
    ] {
        let tuple: ExponentTuple = t.parse().expect("literal tuple");
        specs.push(ConstructionSpec::FlagLowerBound { tuple, sizes });
    }
    specs.push(ConstructionSpec::DisjointCopies {
        base: Box::new(ConstructionSpec::ParallelBundle3d { n: 4, b: 2 }),
        copies: 3,
        separation: None,
    });
    specs.push(ConstructionSpec::Lightlike { directions: 5, per_direction: 3 });
    specs.push(ConstructionSpec::Legendrian { grid_side: 2, lines_per_point: 3 });
    specs
}

pub fn predicted_suite(seed: u64) -> SuiteReport {
    let mut r = SuiteReport::new(Suite::Predicted);
    for spec in prediction_specs() {
        let label = format!("{} {:?}", spec.kind(), spec.params());
        match spec.build(seed).and_then(|inst| inst.check()) {
            Ok(checks) => {
                for c in checks {
                    r.check(c.ok(), || {
                        format!("{label}: {} predicted {} but counted {}", c.name, c.predicted, c.actual)
                    });
                }
            }
            Err(e) => r.error(&label, e),
        }
    }
    r
}

pub fn tuples_suite(max_d: usize) -> SuiteReport {
    let mut r = SuiteReport::new(Suite::Tuples);
    for (d, n) in [(2, 3), (3, 4), (4, 6)] {
        let got = valid_exponent_tuples(d).len();
        r.check(got == n, || format!("d={d}: {got} tuples, expected {n}"));
    }
    for d in 1..=max_d {
        r.check(valid_exponent_tuples(d) == valid_exponent_tuples_bruteforce(d), || {
            format!("d={d}: grammar differs from the brute-force filter")
        });
    }
    r
}

const SMALL_RANGE: i64 = 9;

/// Two levels of dims `(j, j+1)` in Q^d with small coordinates and
/// containments made by choosing lower flats inside upper ones.
pub fn random_two_level(d: usize, j: usize, per_level: usize, seed: u64) -> Result<LayeredFamily> {
    let mut rng = seeded(seed);
    let point = |rng: &mut SeededRng| Flat::point(&random_vector(d, SMALL_RANGE, rng));
    let extend = |mut f: Flat, dim: usize, rng: &mut SeededRng| -> Result<Flat> {
        while f.dim() < dim {
            f = f.join(&point(rng))?;
        }
        Ok(f)
    };
    let mut upper: Vec<Flat> = Vec::new();
    let mut lower: Vec<Flat> = Vec::new();
    while upper.len() < per_level {
        let base = if lower.is_empty() || rng.gen_bool(0.3) {
            let p = point(&mut rng);
            extend(p, j, &mut rng)?
        } else {
            lower[rng.gen_range(0..lower.len())].clone()
        };
        let up = extend(base.clone(), j + 1, &mut rng)?;
        if !lower.contains(&base) {
            lower.push(base);
        }
        if !upper.contains(&up) {
            upper.push(up);
        }
    }
    while lower.len() < per_level {
        let host = &upper[rng.gen_range(0..upper.len())];
        let dirs = host.directions();
        let pts: Vec<Point> = (0..=j)
            .map(|_| {
                dirs.iter().fold(host.anchor(), |acc, v| {
                    linalg::add(&acc, &linalg::scale(v, &int(rng.gen_range(-SMALL_RANGE..=SMALL_RANGE))))
                })
            })
            .collect();
        let f = Flat::from_points(&pts, d)?;
        if f.dim() == j && !lower.contains(&f) {
            lower.push(f);
        }
    }
    LayeredFamily::from_sets(d, vec![(j, lower), (j + 1, upper)])
}

/// Outcome of one section-then-projection run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReductionOutcome {
    Preserved,
    Changed { before: String, after: String },
    GenericityFailure,
}

/// Cuts a two-level family down to points and lines and projects to the plane.
pub fn section_then_project(fam: &LayeredFamily, seed: u64) -> Result<ReductionOutcome> {
    let d = fam.ambient_dim();
    let codim = fam.dims()[0];
    let before = count_flags_dp(fam);
    let flats = fam.all_flats();
    let run = || -> Result<LayeredFamily> {
        let cut = generic_section(&flats, d - codim, seed)?;
        let cut = if d - codim > 2 { generic_projection(&cut, 2, seed.wrapping_add(7919))? } else { cut };
        fam.from_flattened(2, cut)
    };
    match run() {
        Ok(reduced) => {
            let after = count_flags_dp(&reduced);
            Ok(if after == before {
                ReductionOutcome::Preserved
            } else {
                ReductionOutcome::Changed { before: before.to_string(), after: after.to_string() }
            })
        }
        Err(Error::GenericityFailure(_)) | Err(Error::InvalidFamily(_)) => Ok(ReductionOutcome::GenericityFailure),
        Err(e) => Err(e),
    }
}

/// Section then projection on two-level families in Q⁴ and Q⁵: counts must be
/// preserved whenever genericity holds, and genericity may fail on under 5%
/// of seeds.
pub fn section_suite(seed: u64, instances: usize, seeds_per_instance: usize) -> SuiteReport {
    let mut r = SuiteReport::new(Suite::Section);
    let shapes = [(4, 1), (5, 1), (5, 2)];
    let (mut failures, mut runs) = (0usize, 0usize);
    for n in 0..instances {
        let (d, j) = shapes[n % shapes.len()];
        let fam = match random_two_level(d, j, 12, seed.wrapping_add(3000 + n as u64)) {
            Ok(f) => f,
            Err(e) => {
                r.error("generate", e);
                continue;
            }
        };
        let outcomes: Vec<Result<ReductionOutcome>> = (0..seeds_per_instance as u64)
            .into_par_iter()
            .map(|s| section_then_project(&fam, seed.wrapping_mul(31).wrapping_add(s)))
            .collect();
        for (s, outcome) in outcomes.into_iter().enumerate() {
            runs += 1;
            match outcome {
                Ok(ReductionOutcome::Preserved) => r.checks += 1,
                Ok(ReductionOutcome::GenericityFailure) => failures += 1,
                Ok(ReductionOutcome::Changed { before, after }) => {
                    r.check(false, || format!("instance {n} seed {s}: {before} incidences became {after}"))
                }
                Err(e) => r.error("reduce", e),
            }
        }
    }
    let rate = if runs == 0 { 0.0 } else { failures as f64 / runs as f64 };
    r.notes.push(format!("genericity failures: {failures} of {runs} ({:.2}%)", 100.0 * rate));
    r.check(rate < 0.05, || format!("genericity failure rate {:.2}% is not below 5%", 100.0 * rate));
    r
}

/// Light-like families never put three lines through a point in one plane.
pub fn lightlike_suite(seed: u64) -> SuiteReport {
    let mut r = SuiteReport::new(Suite::Lightlike);
    for (dirs, per) in [(1, 1), (2, 3), (4, 4), (8, 3), (12, 2), (6, 6)] {
        for s in 0..3 {
            match lightlike_instance(dirs, per, seed.wrapping_add(s)) {
                Ok(inst) => {
                    let fam = &inst.family;
                    match max_coplanar_through_point(&fam.level(0).flats, &fam.level(1).flats) {
                        Ok(m) => r.check(m <= 2, || format!("{dirs}x{per} seed {s}: {m} coplanar lines at a point")),
                        Err(e) => r.error("coplanarity", e),
                    }
                }
                Err(e) => r.error("generate", e),
            }
        }
    }
    r
}

/// Runs the requested suites with their default sizes.
pub fn verify_suite(suites: &[Suite], seed: u64) -> Vec<SuiteReport> {
    suites
        .iter()
        .map(|s| match s {
            Suite::Oracle => default_oracle_suite(seed, 60),
            Suite::EqSum => eq_sum_suite(seed, 20),
            Suite::Duality => duality_suite(seed, 20),
            Suite::Legendrian => legendrian_suite(seed, 200, 40),
            Suite::Predicted => predicted_suite(seed),
            Suite::Tuples => tuples_suite(12),
            Suite::Section => section_suite(seed, 6, 20),
            Suite::Lightlike => lightlike_suite(seed),
        })
        .collect()
}
