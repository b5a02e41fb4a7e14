use std::collections::HashSet;

use num_integer::Integer;
use rayon::prelude::*;

use super::{ConstructionSpec, GeneratedInstance, Prediction};
use crate::counting::containment_graph;
use crate::error::{Error, Result};
use crate::family::{LayeredFamily, Level};
use crate::flat::Flat;
use crate::scalar::{int, ints, Scalar};

fn plane_from_key(key: [i64; 4]) -> Flat {
    // n·x = offset, stored as the equation -offset + n·x = 0
    Flat::from_equations(3, &[ints(&[-key[3], key[0], key[1], key[2]])])
        .expect("equation has the right length")
        .expect("a plane is nonempty")
}

/// Primitive integer normal with positive leading entry.
fn normalize(n: [i64; 3]) -> [i64; 3] {
    let g = n[0].gcd(&n[1]).gcd(&n[2]);
    let sign = if n.iter().find(|&&x| x != 0).copied().unwrap_or(0) < 0 { -1 } else { 1 };
    [sign * n[0] / g, sign * n[1] / g, sign * n[2] / g]
}

/// Points `[1,k]×[1,2kl]×[1,2kl]`, lines `y = ax+b, z = cx+d` with
/// `a, c ∈ [1,l]`, `b, d ∈ [1,kl]`, and every plane spanned by two lines of
/// the family meeting at a grid point.
pub fn grid_construction_3d(k: u64, l: u64) -> Result<GeneratedInstance> {
    if k == 0 || l == 0 {
        return Err(Error::InvalidParameters("k and l must be at least 1".into()));
    }
    let (k, l) = (k as i64, l as i64);
    let kl = k * l;
    let side = 2 * kl;

    let points: Vec<Flat> = (1..=k)
        .flat_map(|x| (1..=side).flat_map(move |y| (1..=side).map(move |z| Flat::point(&ints(&[x, y, z])))))
        .collect();
    let lines: Vec<Flat> = (1..=l)
        .flat_map(|a| (1..=l).flat_map(move |c| (1..=kl).flat_map(move |b| (1..=kl).map(move |d| (a, b, c, d)))))
        .map(|(a, b, c, d)| Flat::from_anchor_directions(&ints(&[0, b, d]), &[ints(&[1, a, c])]).expect("line"))
        .collect();

    let slopes: Vec<(i64, i64)> = (1..=l).flat_map(|a| (1..=l).map(move |c| (a, c))).collect();
    let coords: Vec<(i64, i64)> = (1..=k).flat_map(|x| (1..=side).map(move |y| (x, y))).collect();
    let keys: HashSet<[i64; 4]> = coords
        .par_iter()
        .fold(HashSet::new, |mut acc, &(x, y)| {
            let mut through = Vec::with_capacity(slopes.len());
            for z in 1..=side {
                through.clear();
                through.extend(slopes.iter().filter(|&&(a, c)| {
                    let (b, d) = (y - a * x, z - c * x);
                    (1..=kl).contains(&b) && (1..=kl).contains(&d)
                }));
                for (i, &(a, c)) in through.iter().enumerate() {
                    for &(a2, c2) in &through[i + 1..] {
                        let n = normalize([a * c2 - a2 * c, c - c2, a2 - a]);
                        acc.insert([n[0], n[1], n[2], n[0] * x + n[1] * y + n[2] * z]);
                    }
                }
            }
            acc
        })
        .reduce(HashSet::new, |mut a, b| {
            if a.len() < b.len() {
                return b.into_iter().chain(a).collect();
            }
            a.extend(b);
            a
        });
    let mut keys: Vec<[i64; 4]> = keys.into_iter().collect();
    keys.sort_unstable();
    let planes: Vec<Flat> = keys.into_par_iter().map(plane_from_key).collect();

    let family = LayeredFamily::new(
        3,
        vec![Level { dim: 0, flats: points }, Level { dim: 1, flats: lines }, Level { dim: 2, flats: planes }],
    )?;
    let (k, l) = (k as u64, l as u64);
    Ok(GeneratedInstance::new(family)
        .predict_sizes()
        .predict("size_0", Prediction::exact(4 * k.pow(3) * l * l))
        .predict("size_1", Prediction::exact(k * k * l.pow(4))))
}

/// `N/b` lines `x = j, y = 0`, each with the points `z = 1..b` and the planes
/// `y = s(x − j)` for `s = 1..b`.
pub fn parallel_bundle_3d(n: u64, b: u64) -> Result<GeneratedInstance> {
    if b == 0 || n == 0 || !n.is_multiple_of(b) {
        return Err(Error::InvalidParameters(format!("b = {b} must be positive and divide N = {n}")));
    }
    let lines_count = (n / b) as i64;
    let b_i = b as i64;
    let mut points = Vec::new();
    let mut lines = Vec::new();
    let mut planes = Vec::new();
    for j in 1..=lines_count {
        lines.push(Flat::from_anchor_directions(&ints(&[j, 0, 0]), &[ints(&[0, 0, 1])])?);
        for z in 1..=b_i {
            points.push(Flat::point(&ints(&[j, 0, z])));
        }
        for s in 1..=b_i {
            let eq = ints(&[-s * j, s, -1, 0]);
            planes.push(Flat::from_equations(3, &[eq])?.expect("plane"));
        }
    }
    let family = LayeredFamily::new(
        3,
        vec![Level { dim: 0, flats: points }, Level { dim: 1, flats: lines }, Level { dim: 2, flats: planes }],
    )?;
    Ok(GeneratedInstance::new(family).predict_sizes().predict("flags", Prediction::exact(b * n)))
}

/// Largest absolute coordinate over all flat generators, rounded up.
fn coordinate_radius(family: &LayeredFamily) -> Scalar {
    let mut r = Scalar::zero();
    for level in family.levels() {
        for f in &level.flats {
            for row in f.basis() {
                for x in &row[1..] {
                    let a = if x.signum() < 0 { -x } else { x.clone() };
                    if a > r {
                        r = a;
                    }
                }
            }
        }
    }
    let whole = r.numer() / r.denom();
    Scalar::from(whole) + int(1)
}

/// Union of translated copies of an instance.
///
/// Copy `c` moves by `c·M·(1, M, M², …)`. The skew direction keeps flats that
/// are invariant under a single axis from landing on each other. Separation
/// is verified: the union must have distinct flats and exactly `copies` times
/// the containments of one copy.
pub fn disjoint_copies_of(base: &GeneratedInstance, copies: u64, separation: Option<i64>) -> Result<GeneratedInstance> {
    if copies == 0 {
        return Err(Error::InvalidParameters("copies must be at least 1".into()));
    }
    let fam = &base.family;
    let d = fam.ambient_dim();
    let m = match separation {
        Some(s) if s <= 0 => return Err(Error::InvalidParameters("separation must be positive".into())),
        Some(s) => int(s),
        None => &(&coordinate_radius(fam) * &int(2)) + &int(1),
    };
    let mut step = Vec::with_capacity(d);
    let mut power = m.clone();
    for _ in 0..d {
        step.push(power.clone());
        power = &power * &m;
    }
    let mut levels: Vec<Level> = fam.levels().iter().map(|l| Level { dim: l.dim, flats: Vec::new() }).collect();
    for c in 0..copies {
        let offset: Vec<Scalar> = step.iter().map(|s| s * &int(c as i64)).collect();
        for (out, level) in levels.iter_mut().zip(fam.levels()) {
            out.flats.extend(level.flats.par_iter().map(|f| f.translate(&offset)).collect::<Vec<_>>());
        }
    }
    let union = LayeredFamily::new(d, levels).map_err(|e| match e {
        Error::InvalidFamily(msg) => Error::Interaction(msg),
        other => other,
    })?;
    let single = containment_graph(fam).total_edges() as u64;
    let joint = containment_graph(&union).total_edges() as u64;
    if joint != single * copies {
        return Err(Error::Interaction(format!("{joint} containments across the union, expected {}", single * copies)));
    }
    let mut out = GeneratedInstance::new(union);
    for (name, p) in &base.predicted {
        out.predicted.insert(name.clone(), p.scaled(copies));
    }
    Ok(out)
}

pub fn disjoint_copies(
    spec: &ConstructionSpec,
    copies: u64,
    separation: Option<i64>,
    seed: u64,
) -> Result<GeneratedInstance> {
    disjoint_copies_of(&spec.build(seed)?, copies, separation)
}
