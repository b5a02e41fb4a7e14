use num_bigint::BigUint;

use super::{GeneratedInstance, Prediction};
use crate::bounds::{Exponent, ExponentTuple};
use crate::error::{Error, Result};
use crate::family::{LayeredFamily, Level};
use crate::flat::{Flat, Point};
use crate::generic::{random_flat, random_point, seeded, SeededRng};
use crate::linalg;
use crate::scalar::{int, ints, Scalar};

const ATTEMPTS: usize = 32;

fn elekes_flats(k: u64, l: u64) -> (Vec<Flat>, Vec<Flat>) {
    let (k, l) = (k as i64, l as i64);
    let points = (1..=k).flat_map(|x| (1..=2 * k * l).map(move |y| Flat::point(&ints(&[x, y])))).collect();
    let lines = (1..=l)
        .flat_map(|a| {
            (1..=k * l).map(move |b| Flat::from_anchor_directions(&ints(&[0, b]), &[ints(&[1, a])]).expect("line"))
        })
        .collect();
    (points, lines)
}

/// Points `[1,k]×[1,2kl]` and lines `y = ax + b` with `a ∈ [1,l]`, `b ∈ [1,kl]`
/// in Q². Every line holds exactly `k` of the points.
pub fn elekes_grid_2d(k: u64, l: u64) -> Result<GeneratedInstance> {
    if k == 0 || l == 0 {
        return Err(Error::InvalidParameters("k and l must be at least 1".into()));
    }
    let (points, lines) = elekes_flats(k, l);
    let family = LayeredFamily::new(2, vec![Level { dim: 0, flats: points }, Level { dim: 1, flats: lines }])?;
    Ok(GeneratedInstance::new(family).predict_sizes().predict("flags", Prediction::exact(k * k * l * l)))
}

/// Affine coordinates `(x, y) ↦ origin + x·e1 + y·e2` on a 2-plane.
#[derive(Clone, Debug)]
pub struct PlaneFrame {
    pub origin: Point,
    pub e1: Point,
    pub e2: Point,
}

impl PlaneFrame {
    /// The plane spanned by the first two coordinate axes of Q^d.
    pub fn standard(d: usize) -> Self {
        let unit = |i: usize| (0..d).map(|j| if i == j { Scalar::one() } else { Scalar::zero() }).collect();
        PlaneFrame { origin: vec![Scalar::zero(); d], e1: unit(0), e2: unit(1) }
    }

    /// The frame of `aff(a, b, c)` based at `a`.
    pub fn through(a: &[Scalar], b: &[Scalar], c: &[Scalar]) -> Self {
        PlaneFrame { origin: a.to_vec(), e1: linalg::sub(b, a), e2: linalg::sub(c, a) }
    }

    pub fn ambient_dim(&self) -> usize {
        self.origin.len()
    }

    pub fn map(&self, xy: &[Scalar]) -> Point {
        let p = linalg::add(&self.origin, &linalg::scale(&self.e1, &xy[0]));
        linalg::add(&p, &linalg::scale(&self.e2, &xy[1]))
    }

    pub fn plane(&self) -> Result<Flat> {
        Flat::from_anchor_directions(&self.origin, &[self.e1.clone(), self.e2.clone()])
    }

    pub fn embed(&self, flat: &Flat) -> Result<Flat> {
        flat.map_points(self.ambient_dim(), |p| self.map(p))
    }
}

/// Embeds planar flats through `frame` and joins each with `q`.
fn lift_all(flats: &[Flat], frame: &PlaneFrame, q: Option<&Flat>) -> Result<Vec<Flat>> {
    flats
        .iter()
        .map(|f| {
            let e = frame.embed(f)?;
            match q {
                Some(q) => e.join(q),
                None => Ok(e),
            }
        })
        .collect()
}

/// Lifts a planar point/line family to `i`- and `(i+1)`-flats of Q^d by
/// joining with a random `(i−1)`-flat skew to the image plane.
pub fn lift_to_flats(instance: &GeneratedInstance, d: usize, i: usize, seed: u64) -> Result<GeneratedInstance> {
    let fam = &instance.family;
    if fam.ambient_dim() != 2 || fam.dims() != [0, 1] {
        return Err(Error::InvalidParameters("lift needs a point/line family in Q^2".into()));
    }
    if d < 2 || i > d - 2 {
        return Err(Error::InvalidParameters(format!("need 0 <= i <= d-2, got i={i}, d={d}")));
    }
    let frame = PlaneFrame::standard(d);
    let plane = frame.plane()?;
    let mut rng = seeded(seed);
    for _ in 0..ATTEMPTS {
        let q = if i == 0 { None } else { Some(random_flat(i - 1, d, &mut rng)) };
        if let Some(q) = &q {
            if plane.join(q)?.dim() != i + 2 {
                continue;
            }
        }
        let lower = lift_all(&fam.level(0).flats, &frame, q.as_ref())?;
        let upper = lift_all(&fam.level(1).flats, &frame, q.as_ref())?;
        let lifted =
            match LayeredFamily::new(d, vec![Level { dim: i, flats: lower }, Level { dim: i + 1, flats: upper }]) {
                Ok(f) => f,
                Err(Error::InvalidFamily(_)) => continue,
                Err(e) => return Err(e),
            };
        let mut out = GeneratedInstance::new(lifted).predict_sizes();
        if let Some(p) = instance.predicted.get("flags") {
            out = out.predict("flags", p.clone());
        }
        return Ok(out);
    }
    Err(Error::GenericityFailure("no skew flat found for the lift".into()))
}

struct PlanarConfig {
    points: Vec<Flat>,
    lines: Vec<Flat>,
    incidences: u64,
}

/// Largest Elekes grid with at most `m` points and `n` lines, or a star or a
/// collinear set when none fits; padded with random points and lines.
fn planar_config(m: u64, n: u64, rng: &mut SeededRng) -> PlanarConfig {
    let mut best: Option<(u64, u64)> = None;
    for k in 1..=m {
        if 2 * k * k > m {
            break;
        }
        for l in 1..=n {
            if 2 * k * k * l > m || k * l * l > n {
                break;
            }
            if best.is_none_or(|(bk, bl)| k * l > bk * bl) {
                best = Some((k, l));
            }
        }
    }
    let (mut points, mut lines, incidences) = match best {
        Some((k, l)) => {
            let (p, ls) = elekes_flats(k, l);
            (p, ls, k * k * l * l)
        }
        None if n >= m => {
            let star = (0..n as i64)
                .map(|t| Flat::from_anchor_directions(&ints(&[0, 0]), &[ints(&[1, t])]).expect("line"))
                .collect();
            (vec![Flat::point(&ints(&[0, 0]))], star, n)
        }
        None => {
            let pts = (0..m as i64).map(|t| Flat::point(&ints(&[t, 0]))).collect();
            let axis = Flat::from_anchor_directions(&ints(&[0, 0]), &[ints(&[1, 0])]).expect("line");
            (pts, vec![axis], m)
        }
    };
    while (points.len() as u64) < m {
        let p = Flat::point(&random_point(2, rng));
        if !points.contains(&p) {
            points.push(p);
        }
    }
    while (lines.len() as u64) < n {
        let l = random_flat(1, 2, rng);
        if !lines.contains(&l) {
            lines.push(l);
        }
    }
    PlanarConfig { points, lines, incidences }
}

fn tuple_pairs(tuple: &ExponentTuple) -> Vec<usize> {
    let a = tuple.entries();
    let mut starts = Vec::new();
    let mut i = 0;
    while i < a.len() {
        if a[i] == Exponent::TwoThirds {
            starts.push(i);
            i += 2;
        } else {
            i += 1;
        }
    }
    starts
}

/// A `d`-level family in Q^d whose flag count is at least a constant times
/// `∏ sizes_i^{a_i}` for the given valid tuple.
///
/// A random chain `π_0 ⊂ … ⊂ π_d` with `π_j = aff(p_0, …, p_j)` fills zero
/// slots; a one slot `j` gets a pencil of `j`-flats through `π_{j−1}` inside
/// `π_{j+1}`; a `(2/3, 2/3)` pair at `(j, j+1)` gets a planar configuration in
/// `aff(p_j, p_{j+1}, p_{j+2})` lifted through `π_{j−1}`.
pub fn flag_lower_bound_construction(
    tuple: &ExponentTuple,
    sizes: &[u64],
    d: usize,
    seed: u64,
) -> Result<GeneratedInstance> {
    if tuple.len() != d || sizes.len() != d {
        return Err(Error::InvalidParameters(format!(
            "tuple length {} and {} sizes must both equal d = {d}",
            tuple.len(),
            sizes.len()
        )));
    }
    if !tuple.is_valid() {
        return Err(Error::InvalidParameters(format!("invalid exponent tuple {tuple}")));
    }
    if sizes.contains(&0) {
        return Err(Error::InvalidParameters("sizes must be at least 1".into()));
    }
    // pairs outside n^(1/2) <= m <= n^2 still build; they are flagged in the constants
    let outside = tuple_pairs(tuple).iter().any(|&j| {
        let (m, n) = (sizes[j], sizes[j + 1]);
        m * m < n || m > n * n
    });
    let a = tuple.entries();
    let mut rng = seeded(seed);
    for _ in 0..ATTEMPTS {
        let p: Vec<Point> = (0..=d).map(|_| random_point(d, &mut rng)).collect();
        let diffs: Vec<Point> = p[1..].iter().map(|q| linalg::sub(q, &p[0])).collect();
        if linalg::rank(diffs) != d {
            continue;
        }
        let pi: Vec<Flat> = (0..d).map(|j| Flat::from_points(&p[..=j], d)).collect::<Result<_>>()?;
        let below = |j: usize| if j == 0 { None } else { Some(&pi[j - 1]) };

        let mut levels: Vec<Vec<Flat>> = vec![Vec::new(); d];
        let mut predicted = BigUint::from(1u32);
        let mut j = 0;
        while j < d {
            match a[j] {
                Exponent::Zero => {
                    levels[j].push(pi[j].clone());
                    while (levels[j].len() as u64) < sizes[j] {
                        let f = random_flat(j, d, &mut rng);
                        if !levels[j].contains(&f) {
                            levels[j].push(f);
                        }
                    }
                    j += 1;
                }
                Exponent::One => {
                    let step = linalg::sub(&p[j + 1], &p[j]);
                    for t in 0..sizes[j] as i64 {
                        let q = Flat::point(&linalg::add(&p[j], &linalg::scale(&step, &int(t))));
                        levels[j].push(match below(j) {
                            Some(b) => b.join(&q)?,
                            None => q,
                        });
                    }
                    predicted *= sizes[j];
                    j += 1;
                }
                Exponent::TwoThirds => {
                    let cfg = planar_config(sizes[j], sizes[j + 1], &mut rng);
                    let frame = PlaneFrame::through(&p[j], &p[j + 1], &p[j + 2]);
                    levels[j] = lift_all(&cfg.points, &frame, below(j))?;
                    levels[j + 1] = lift_all(&cfg.lines, &frame, below(j))?;
                    predicted *= cfg.incidences;
                    j += 2;
                }
            }
        }
        let levels = levels.into_iter().enumerate().map(|(dim, flats)| Level { dim, flats }).collect();
        let family = match LayeredFamily::new(d, levels) {
            Ok(f) => f,
            Err(Error::InvalidFamily(_)) => continue,
            Err(e) => return Err(e),
        };
        let term = tuple.evaluate(&sizes.iter().map(|&s| s as f64).collect::<Vec<_>>());
        let mut out = GeneratedInstance::new(family).predict_sizes();
        out.record_constant("witness_constant", &predicted, term);
        if outside {
            out.constants.insert("outside_elekes_regime".into(), 1.0);
        }
        return Ok(out.predict("flags", Prediction::AtLeast(predicted)));
    }
    Err(Error::GenericityFailure("could not build a generic chain".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::{count_flags_bruteforce, count_flags_dp, BRUTEFORCE_CAP};

    fn brute(inst: &GeneratedInstance) -> BigUint {
        count_flags_bruteforce(&inst.family, BRUTEFORCE_CAP).unwrap()
    }

    #[test]
    fn elekes_examples() {
        let a = elekes_grid_2d(2, 1).unwrap();
        assert_eq!(a.family.sizes(), vec![8, 2]);
        assert_eq!(brute(&a), BigUint::from(4u32));
        let b = elekes_grid_2d(3, 2).unwrap();
        assert_eq!(b.family.sizes(), vec![36, 12]);
        assert_eq!(brute(&b), BigUint::from(36u32));
        assert!(elekes_grid_2d(0, 1).is_err());
    }

    #[test]
    fn elekes_lines_hold_k_points() {
        let (k, l) = (3, 2);
        let inst = elekes_grid_2d(k, l).unwrap();
        let pts = &inst.family.level(0).flats;
        for line in &inst.family.level(1).flats {
            assert_eq!(pts.iter().filter(|p| line.contains(p).unwrap()).count() as u64, k);
        }
    }

    #[test]
    fn lift_examples() {
        let base = elekes_grid_2d(2, 1).unwrap();
        let flat0 = lift_to_flats(&base, 3, 0, 1).unwrap();
        assert_eq!(flat0.family.dims(), vec![0, 1]);
        assert_eq!(count_flags_dp(&flat0.family), BigUint::from(4u32));
        let lifted = lift_to_flats(&base, 4, 1, 7).unwrap();
        assert_eq!(lifted.family.dims(), vec![1, 2]);
        assert_eq!(lifted.family.sizes(), vec![8, 2]);
        assert_eq!(brute(&lifted), BigUint::from(4u32));
        assert!(lift_to_flats(&base, 4, 3, 0).is_err());
    }

    #[test]
    fn lift_preserves_counts_in_higher_dims() {
        let base = elekes_grid_2d(2, 2).unwrap();
        for (d, i) in [(5, 2), (5, 3), (6, 1)] {
            let lifted = lift_to_flats(&base, d, i, d as u64).unwrap();
            assert_eq!(count_flags_dp(&lifted.family), BigUint::from(16u32));
        }
    }

    fn tuple(s: &str) -> ExponentTuple {
        s.parse().unwrap()
    }

    #[test]
    fn lower_bound_examples() {
        let n = 6;
        let star = flag_lower_bound_construction(&tuple("(0,1,0)"), &[1, n, 1], 3, 2).unwrap();
        assert_eq!(brute(&star), BigUint::from(n));
        let (m, s) = (4, 5);
        let book = flag_lower_bound_construction(&tuple("(1,0,1)"), &[m, 1, s], 3, 3).unwrap();
        assert_eq!(brute(&book), BigUint::from(m * s));
        let pair = flag_lower_bound_construction(&tuple("(2/3,2/3,0)"), &[8, 2, 1], 3, 4).unwrap();
        assert_eq!(brute(&pair), BigUint::from(4u32));
        assert_eq!(pair.constants.get("outside_elekes_regime"), Some(&1.0));
    }

    #[test]
    fn lower_bound_rejects_bad_input() {
        assert!(flag_lower_bound_construction(&tuple("(1,1,0)"), &[1, 1, 1], 3, 0).is_err());
        assert!(flag_lower_bound_construction(&tuple("(0,1,0)"), &[1, 1], 3, 0).is_err());
        assert!(flag_lower_bound_construction(&tuple("(0,1,0)"), &[1, 0, 1], 3, 0).is_err());
    }

    #[test]
    fn padded_zero_slots() {
        let inst = flag_lower_bound_construction(&tuple("(0,2/3,2/3,0)"), &[3, 9, 4, 2], 4, 5).unwrap();
        assert_eq!(inst.family.sizes(), vec![3, 9, 4, 2]);
        let counted = count_flags_dp(&inst.family);
        assert!(inst.check().unwrap().iter().all(|c| c.ok()));
        assert_eq!(counted, brute(&inst));
    }
}
