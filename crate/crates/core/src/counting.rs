//! Exact flag counting over layered families.
//!
//! The containment graph between two levels is built by grouping the upper
//! flats by direction space: a lower flat `f` can only lie in an upper flat `g`
//! with direction space `V` if `dir(f) ⊆ V`, and then `g` must be the unique
//! flat `f + V`, whose canonical anchor row is `f`'s anchor row reduced
//! against `V`. One hash lookup per (lower flat, direction class) replaces a
//! scan over every upper flat; when all directions are distinct this
//! degenerates to the pairwise scan.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::family::LayeredFamily;
use crate::flat::Flat;
use crate::linalg::{self, Row};

/// Default cap on the Cartesian product size for brute-force enumeration.
pub const BRUTEFORCE_CAP: u128 = 100_000_000;

/// Containment edges between each pair of consecutive levels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContainmentGraph {
    /// `below[t][g]` lists the indices of level-`t` flats contained in flat `g` of level `t + 1`.
    below: Vec<Vec<Vec<u32>>>,
}

impl ContainmentGraph {
    pub fn interfaces(&self) -> usize {
        self.below.len()
    }

    /// Lower indices contained in upper flat `upper` across interface `t`.
    pub fn below(&self, t: usize, upper: usize) -> &[u32] {
        &self.below[t][upper]
    }

    /// `(lower, upper)` edges across interface `t`, sorted.
    pub fn edges(&self, t: usize) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> =
            self.below[t].iter().enumerate().flat_map(|(g, fs)| fs.iter().map(move |&f| (f as usize, g))).collect();
        out.sort_unstable();
        out
    }

    pub fn edge_count(&self, t: usize) -> usize {
        self.below[t].iter().map(Vec::len).sum()
    }

    pub fn total_edges(&self) -> usize {
        (0..self.interfaces()).map(|t| self.edge_count(t)).sum()
    }

    /// Number of lower flats inside each upper flat of interface `t`.
    pub fn upper_degrees(&self, t: usize) -> Vec<usize> {
        self.below[t].iter().map(Vec::len).collect()
    }

    /// Number of upper flats containing each lower flat of interface `t`.
    pub fn lower_degrees(&self, t: usize, lower_len: usize) -> Vec<usize> {
        let mut deg = vec![0; lower_len];
        for fs in &self.below[t] {
            for &f in fs {
                deg[f as usize] += 1;
            }
        }
        deg
    }
}

struct DirectionClass {
    rows: Vec<Row>,
    pivots: Vec<usize>,
    by_anchor: HashMap<Row, u32>,
}

fn direction_classes(upper: &[Flat]) -> Vec<DirectionClass> {
    let mut index: HashMap<&[Row], usize> = HashMap::new();
    let mut classes: Vec<DirectionClass> = Vec::new();
    for (g_idx, g) in upper.iter().enumerate() {
        let dirs = g.direction_rows();
        let c = *index.entry(dirs).or_insert_with(|| {
            classes.push(DirectionClass {
                rows: dirs.to_vec(),
                pivots: g.pivots()[1..].to_vec(),
                by_anchor: HashMap::new(),
            });
            classes.len() - 1
        });
        classes[c].by_anchor.insert(g.basis()[0].clone(), g_idx as u32);
    }
    classes
}

/// Indices of upper flats containing each lower flat.
fn containments_above(lower: &[Flat], upper: &[Flat]) -> Vec<Vec<u32>> {
    if upper.is_empty() {
        return vec![Vec::new(); lower.len()];
    }
    let classes = direction_classes(upper);
    lower
        .par_iter()
        .map(|f| {
            let mut hits = Vec::new();
            for class in &classes {
                if class.rows.len() < f.dim() {
                    continue;
                }
                let dirs_inside =
                    f.direction_rows().iter().all(|r| linalg::in_row_space(r, &class.rows, &class.pivots));
                if !dirs_inside {
                    continue;
                }
                let key = linalg::reduce(&f.basis()[0], &class.rows, &class.pivots);
                if let Some(&g) = class.by_anchor.get(&key) {
                    hits.push(g);
                }
            }
            hits.sort_unstable();
            hits
        })
        .collect()
}

fn invert(above: Vec<Vec<u32>>, upper_len: usize) -> Vec<Vec<u32>> {
    let mut below = vec![Vec::new(); upper_len];
    for (f, gs) in above.into_iter().enumerate() {
        for g in gs {
            below[g as usize].push(f as u32);
        }
    }
    below
}

pub fn containment_graph(family: &LayeredFamily) -> ContainmentGraph {
    let levels = family.levels();
    let below =
        levels.windows(2).map(|w| invert(containments_above(&w[0].flats, &w[1].flats), w[1].flats.len())).collect();
    ContainmentGraph { below }
}

/// `prefix[t][f]` = number of partial flags ending at flat `f` of level `t`.
fn forward_counts(family: &LayeredFamily, graph: &ContainmentGraph) -> Vec<Vec<BigUint>> {
    let levels = family.levels();
    let mut out: Vec<Vec<BigUint>> = Vec::with_capacity(levels.len());
    if levels.is_empty() {
        return out;
    }
    out.push(vec![BigUint::one(); levels[0].flats.len()]);
    for t in 0..graph.interfaces() {
        let prev = &out[t];
        let next: Vec<BigUint> = graph.below[t]
            .par_iter()
            .map(|fs| fs.iter().fold(BigUint::zero(), |acc, &f| acc + &prev[f as usize]))
            .collect();
        out.push(next);
    }
    out
}

/// `suffix[t][f]` = number of partial flags starting at flat `f` of level `t`.
fn backward_counts(family: &LayeredFamily, graph: &ContainmentGraph) -> Vec<Vec<BigUint>> {
    let levels = family.levels();
    let n = levels.len();
    let mut out: Vec<Vec<BigUint>> = vec![Vec::new(); n];
    if n == 0 {
        return out;
    }
    out[n - 1] = vec![BigUint::one(); levels[n - 1].flats.len()];
    for t in (0..graph.interfaces()).rev() {
        let mut cur = vec![BigUint::zero(); levels[t].flats.len()];
        for (g, fs) in graph.below[t].iter().enumerate() {
            let up = &out[t + 1][g];
            for &f in fs {
                cur[f as usize] += up;
            }
        }
        out[t] = cur;
    }
    out
}

/// Number of flags `(f_0, …, f_t)`, one flat per level, each contained in the next.
pub fn count_flags_dp(family: &LayeredFamily) -> BigUint {
    let graph = containment_graph(family);
    count_with_graph(family, &graph)
}

pub fn count_with_graph(family: &LayeredFamily, graph: &ContainmentGraph) -> BigUint {
    if family.is_empty() {
        return BigUint::zero();
    }
    forward_counts(family, graph).last().map(|top| top.iter().sum()).unwrap_or_default()
}

/// Partial flags over a family whose level dimensions need not be consecutive;
/// containment is required only between consecutive levels.
pub fn count_partial_flags(family: &LayeredFamily) -> BigUint {
    count_flags_dp(family)
}

/// Brute-force oracle using [`Flat::contains`] on every consecutive pair.
pub fn count_flags_bruteforce(family: &LayeredFamily, cap: u128) -> Result<BigUint> {
    count_flags_bruteforce_with(family, cap, |outer, inner| {
        outer.contains(inner).expect("family flats share the ambient dimension")
    })
}

/// Brute-force enumeration with an injectable containment predicate
/// `contains(outer, inner)`.
pub fn count_flags_bruteforce_with<P>(family: &LayeredFamily, cap: u128, contains: P) -> Result<BigUint>
where
    P: Fn(&Flat, &Flat) -> bool,
{
    let sizes = family.sizes();
    if sizes.is_empty() {
        return Ok(BigUint::zero());
    }
    let product = sizes.iter().try_fold(1u128, |acc, &s| acc.checked_mul(s as u128)).unwrap_or(u128::MAX);
    if product > cap {
        return Err(Error::CapExceeded { size: product, cap });
    }
    let levels = family.levels();
    let table: Vec<Vec<Vec<bool>>> = levels
        .windows(2)
        .map(|w| w[0].flats.iter().map(|f| w[1].flats.iter().map(|g| contains(g, f)).collect()).collect())
        .collect();

    fn walk(table: &[Vec<Vec<bool>>], level: usize, at: usize, count: &mut u128) {
        if level == table.len() {
            *count += 1;
            return;
        }
        for (next, &ok) in table[level][at].iter().enumerate() {
            if ok {
                walk(table, level + 1, next, count);
            }
        }
    }

    let mut count = 0u128;
    for start in 0..sizes[0] {
        walk(&table, 0, start, &mut count);
    }
    Ok(BigUint::from(count))
}

/// Partition of level `i` by prefix and suffix flag counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeSplit {
    pub level: usize,
    /// Prefix and suffix counts both exceed one.
    pub heavy: Vec<Flat>,
    /// Prefix count at most one.
    pub low_prefix: Vec<Flat>,
    /// Prefix count above one, suffix count at most one.
    pub low_suffix: Vec<Flat>,
}

impl DegreeSplit {
    /// The three parts in order `(S_{i,0}, S_{i,1}, S_{i,2})`.
    pub fn parts(&self) -> [&[Flat]; 3] {
        [&self.heavy, &self.low_prefix, &self.low_suffix]
    }
}

/// Splits level `i` (strictly inside the family) into heavy flats, flats with at
/// most one prefix flag, and flats with at most one suffix flag.
pub fn degree_split(family: &LayeredFamily, i: usize) -> Result<DegreeSplit> {
    if i == 0 || i + 1 >= family.len() {
        return Err(Error::InvalidIndex(i));
    }
    let graph = containment_graph(family);
    let prefix = forward_counts(family, &graph);
    let suffix = backward_counts(family, &graph);
    let one = BigUint::one();
    let mut split = DegreeSplit { level: i, heavy: Vec::new(), low_prefix: Vec::new(), low_suffix: Vec::new() };
    for (idx, f) in family.level(i).flats.iter().enumerate() {
        if prefix[i][idx] <= one {
            split.low_prefix.push(f.clone());
        } else if suffix[i][idx] <= one {
            split.low_suffix.push(f.clone());
        } else {
            split.heavy.push(f.clone());
        }
    }
    Ok(split)
}

/// Histogram `(points on line, planes through line) ↦ number of lines`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DegreeProfile {
    pub cells: BTreeMap<(usize, usize), usize>,
}

impl DegreeProfile {
    pub fn line_count(&self) -> usize {
        self.cells.values().sum()
    }

    /// `Σ k·l·N_{k,l}`, which equals the number of point-line-plane flags.
    pub fn weighted_sum(&self) -> BigUint {
        self.cells.iter().map(|(&(k, l), &n)| BigUint::from(k) * BigUint::from(l) * BigUint::from(n)).sum()
    }

    /// Number of lines carrying exactly `k` points.
    pub fn lines_with_points(&self, k: usize) -> usize {
        self.cells.iter().filter(|((kk, _), _)| *kk == k).map(|(_, n)| n).sum()
    }

    pub fn max_points_per_line(&self) -> usize {
        self.cells.keys().map(|&(k, _)| k).max().unwrap_or(0)
    }

    pub fn max_planes_per_line(&self) -> usize {
        self.cells.keys().map(|&(_, l)| l).max().unwrap_or(0)
    }

    /// CSV rows `k,l,count` with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,l,count\n");
        for (&(k, l), &n) in &self.cells {
            out.push_str(&format!("{k},{l},{n}\n"));
        }
        out
    }
}

fn require_point_line_plane(family: &LayeredFamily) -> Result<()> {
    if family.ambient_dim() != 3 || family.dims() != [0, 1, 2] {
        return Err(Error::InvalidFamily(format!(
            "expected points, lines, planes in Q^3; got dims {:?} in Q^{}",
            family.dims(),
            family.ambient_dim()
        )));
    }
    Ok(())
}

pub fn degree_profile(family: &LayeredFamily) -> Result<DegreeProfile> {
    require_point_line_plane(family)?;
    let graph = containment_graph(family);
    Ok(degree_profile_with_graph(family, &graph))
}

pub fn degree_profile_with_graph(family: &LayeredFamily, graph: &ContainmentGraph) -> DegreeProfile {
    let points_on = graph.upper_degrees(0);
    let planes_through = graph.lower_degrees(1, family.level(1).flats.len());
    let mut cells = BTreeMap::new();
    for (k, l) in points_on.into_iter().zip(planes_through) {
        *cells.entry((k, l)).or_insert(0) += 1;
    }
    DegreeProfile { cells }
}

/// Largest number of lines through one point of `points` that lie in a common
/// plane. Points on no line contribute 0.
pub fn max_coplanar_through_point(points: &[Flat], lines: &[Flat]) -> Result<usize> {
    if points.iter().chain(lines).any(|f| f.ambient_dim() != 3)
        || points.iter().any(|p| p.dim() != 0)
        || lines.iter().any(|l| l.dim() != 1)
    {
        return Err(Error::InvalidFamily("expected points and lines in Q^3".into()));
    }
    let above = containments_above(points, lines);
    let directions: Vec<Row> = lines.iter().map(|l| linalg::primitive(&l.directions()[0])).collect();
    let best = above
        .par_iter()
        .map(|through| {
            if through.len() <= 1 {
                return through.len();
            }
            // lines through a common point share a plane iff their directions span it
            let mut by_plane: HashMap<Row, Vec<u32>> = HashMap::new();
            for (a, &la) in through.iter().enumerate() {
                for &lb in &through[a + 1..] {
                    let n = linalg::primitive(&linalg::cross(&directions[la as usize], &directions[lb as usize]));
                    let members = by_plane.entry(n).or_default();
                    for l in [la, lb] {
                        if !members.contains(&l) {
                            members.push(l);
                        }
                    }
                }
            }
            by_plane.values().map(Vec::len).max().unwrap_or(1)
        })
        .max()
        .unwrap_or(0);
    Ok(best)
}

/// Lossy conversion of an exact count for fitting and bound ratios.
pub fn count_to_f64(count: &BigUint) -> f64 {
    count.to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ints;

    fn pt(c: &[i64]) -> Flat {
        Flat::point(&ints(c))
    }

    fn line(a: &[i64], b: &[i64]) -> Flat {
        Flat::from_points(&[ints(a), ints(b)], a.len()).unwrap()
    }

    fn chain3() -> LayeredFamily {
        let p = pt(&[0, 0, 0]);
        let l = line(&[0, 0, 0], &[1, 0, 0]);
        let s = l.join(&pt(&[0, 1, 0])).unwrap();
        LayeredFamily::from_sets(3, vec![(0, vec![p]), (1, vec![l]), (2, vec![s])]).unwrap()
    }

    /// Elekes grid in Q^2 written out by hand: P = [1,k]×[1,2kl], lines y = ax + b.
    fn elekes(k: i64, l: i64) -> LayeredFamily {
        let mut pts = Vec::new();
        for x in 1..=k {
            for y in 1..=2 * k * l {
                pts.push(pt(&[x, y]));
            }
        }
        let mut lines = Vec::new();
        for a in 1..=l {
            for b in 1..=k * l {
                lines.push(line(&[0, b], &[1, a + b]));
            }
        }
        LayeredFamily::from_sets(2, vec![(0, pts), (1, lines)]).unwrap()
    }

    #[test]
    fn chain_graph_and_count() {
        let fam = chain3();
        let g = containment_graph(&fam);
        assert_eq!(g.total_edges(), 2);
        assert_eq!(count_flags_dp(&fam), BigUint::one());
        assert_eq!(count_flags_bruteforce(&fam, BRUTEFORCE_CAP).unwrap(), BigUint::one());
    }

    #[test]
    fn elekes_edges_and_counts() {
        let small = elekes(2, 1);
        assert_eq!(small.sizes(), vec![8, 2]);
        assert_eq!(containment_graph(&small).total_edges(), 4);
        let fam = elekes(3, 2);
        assert_eq!(fam.sizes(), vec![36, 12]);
        assert_eq!(count_flags_dp(&fam), BigUint::from(36u32));
        assert_eq!(count_flags_bruteforce(&fam, BRUTEFORCE_CAP).unwrap(), BigUint::from(36u32));
    }

    #[test]
    fn empty_level_gives_zero() {
        let fam = chain3().with_level(1, Vec::new()).unwrap();
        let g = containment_graph(&fam);
        assert_eq!(g.edge_count(0), 0);
        assert_eq!(g.edge_count(1), 0);
        assert!(count_flags_dp(&fam).is_zero());
        assert!(count_flags_bruteforce(&fam, BRUTEFORCE_CAP).unwrap().is_zero());
    }

    #[test]
    fn cap_is_enforced() {
        let fam = elekes(3, 2);
        assert!(matches!(count_flags_bruteforce(&fam, 100), Err(Error::CapExceeded { size: 432, cap: 100 })));
    }

    #[test]
    fn partial_points_and_planes() {
        let planes = vec![
            Flat::from_equations(3, &[ints(&[0, 0, 0, 1])]).unwrap().unwrap(),
            Flat::from_equations(3, &[ints(&[0, 1, 0, 0])]).unwrap().unwrap(),
        ];
        let points = vec![pt(&[0, 0, 0]), pt(&[0, 1, 0]), pt(&[1, 1, 0]), pt(&[0, 2, 2])];
        let fam = LayeredFamily::from_sets(3, vec![(0, points), (2, planes)]).unwrap();
        // (0,0,0) on both, (0,1,0) on both, (1,1,0) on z=0, (0,2,2) on x=0
        assert_eq!(count_partial_flags(&fam), BigUint::from(6u32));
        assert_eq!(count_flags_bruteforce(&fam, BRUTEFORCE_CAP).unwrap(), BigUint::from(6u32));
    }

    #[test]
    fn partial_chain_in_q5() {
        let p = pt(&[0, 0, 0, 0, 0]);
        let l = line(&[0, 0, 0, 0, 0], &[1, 0, 0, 0, 0]);
        let mut f3 = l.clone();
        for e in [[0, 1, 0, 0, 0], [0, 0, 1, 0, 0]] {
            f3 = f3.join(&pt(&e)).unwrap();
        }
        let f4 = f3.join(&pt(&[0, 0, 0, 1, 0])).unwrap();
        let fam = LayeredFamily::from_sets(5, vec![(0, vec![p]), (1, vec![l]), (3, vec![f3]), (4, vec![f4])]).unwrap();
        assert_eq!(count_partial_flags(&fam), BigUint::one());
    }

    #[test]
    fn degree_split_on_chain() {
        let split = degree_split(&chain3(), 1).unwrap();
        assert_eq!(split.low_prefix.len(), 1);
        assert!(split.heavy.is_empty() && split.low_suffix.is_empty());
        assert!(matches!(degree_split(&chain3(), 0), Err(Error::InvalidIndex(0))));
        assert!(matches!(degree_split(&chain3(), 2), Err(Error::InvalidIndex(2))));
    }

    #[test]
    fn heavy_line_in_3d() {
        let l = line(&[0, 0, 0], &[1, 0, 0]);
        let points = vec![pt(&[0, 0, 0]), pt(&[1, 0, 0]), pt(&[5, 5, 5])];
        let planes = vec![l.join(&pt(&[0, 1, 0])).unwrap(), l.join(&pt(&[0, 0, 1])).unwrap()];
        let other = line(&[5, 5, 5], &[5, 5, 6]);
        let fam =
            LayeredFamily::from_sets(3, vec![(0, points), (1, vec![l.clone(), other.clone()]), (2, planes)]).unwrap();
        let split = degree_split(&fam, 1).unwrap();
        assert_eq!(split.heavy, vec![l]);
        assert_eq!(split.low_prefix, vec![other]);
    }

    #[test]
    fn profile_examples() {
        let fam = chain3();
        let prof = degree_profile(&fam).unwrap();
        assert_eq!(prof.cells.get(&(1, 1)), Some(&1));
        assert_eq!(prof.weighted_sum(), count_flags_dp(&fam));
        let empty = fam.with_level(1, Vec::new()).unwrap();
        assert!(degree_profile(&empty).unwrap().cells.is_empty());
        assert_eq!(prof.to_csv(), "k,l,count\n1,1,1\n");
        assert!(degree_profile(&elekes(2, 1)).is_err());
    }

    #[test]
    fn coplanar_examples() {
        let o = [0, 0, 0];
        let three_coplanar = vec![line(&o, &[1, 0, 0]), line(&o, &[0, 1, 0]), line(&o, &[1, 1, 0])];
        assert_eq!(max_coplanar_through_point(&[pt(&o)], &three_coplanar).unwrap(), 3);
        let axes = vec![line(&o, &[1, 0, 0]), line(&o, &[0, 1, 0]), line(&o, &[0, 0, 1])];
        assert_eq!(max_coplanar_through_point(&[pt(&o)], &axes).unwrap(), 2);
        assert_eq!(max_coplanar_through_point(&[pt(&[9, 9, 9])], &axes).unwrap(), 0);
        assert_eq!(max_coplanar_through_point(&[pt(&[5, 0, 0])], &axes).unwrap(), 1);
    }
}
