//! Seeded "generic" objects: random flats, sections, projections, and
//! invertible coordinate changes.
//!
//! Generic positions are realized by sampling integer coordinates uniformly
//! from `[-GENERIC_RANGE, GENERIC_RANGE]` and then verifying the properties a
//! caller relies on. A failed verification is reported as
//! [`Error::GenericityFailure`] so the caller can retry with another seed.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::flat::{Flat, Point};
use crate::linalg::{self, Row};
use crate::scalar::{int, Scalar};

pub const GENERIC_RANGE: i64 = 1_000_000;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vector<R: Rng>(d: usize, range: i64, rng: &mut R) -> Vec<Scalar> {
    (0..d).map(|_| int(rng.gen_range(-range..=range))).collect()
}

pub fn random_point<R: Rng>(d: usize, rng: &mut R) -> Point {
    random_vector(d, GENERIC_RANGE, rng)
}

/// A random `dim`-flat in Q^d through `dim + 1` sampled points.
pub fn random_flat<R: Rng>(dim: usize, d: usize, rng: &mut R) -> Flat {
    assert!(dim <= d, "flat dimension exceeds ambient dimension");
    loop {
        let pts: Vec<Point> = (0..=dim).map(|_| random_point(d, rng)).collect();
        let f = Flat::from_points(&pts, d).expect("nonempty");
        if f.dim() == dim {
            return f;
        }
    }
}

/// A random flat of dimension `dim` containing `base`, inside `within` if given.
pub fn random_flat_through<R: Rng>(base: &Flat, dim: usize, within: Option<&Flat>, rng: &mut R) -> Result<Flat> {
    let d = base.ambient_dim();
    if dim < base.dim() || within.map_or(dim > d, |w| dim > w.dim()) {
        return Err(Error::InvalidParameters(format!("no {dim}-flat between the given flats")));
    }
    for _ in 0..64 {
        let mut f = base.clone();
        while f.dim() < dim {
            let p = match within {
                Some(w) => random_point_in(w, rng),
                None => random_point(d, rng),
            };
            f = f.join(&Flat::point(&p))?;
        }
        if f.dim() == dim {
            return Ok(f);
        }
    }
    Err(Error::GenericityFailure("could not extend flat".into()))
}

/// Random point of a flat as an integer combination of its generators.
pub fn random_point_in<R: Rng>(flat: &Flat, rng: &mut R) -> Point {
    let mut p = flat.anchor();
    for dir in flat.directions() {
        let c = int(rng.gen_range(-GENERIC_RANGE..=GENERIC_RANGE));
        p = linalg::add(&p, &linalg::scale(&dir, &c));
    }
    p
}

fn ensure_distinct(images: &[Flat], what: &str) -> Result<()> {
    let mut seen = HashSet::with_capacity(images.len());
    for f in images {
        if !seen.insert(f) {
            return Err(Error::GenericityFailure(format!("two {what} images coincide")));
        }
    }
    Ok(())
}

/// Intersects every flat with one random `section_dim`-flat π and returns the
/// intersections in the intrinsic coordinates of π (a copy of Q^section_dim).
///
/// Each k-flat maps to a (k − codim π)-flat; containments carry over.
pub fn generic_section(flats: &[Flat], section_dim: usize, seed: u64) -> Result<Vec<Flat>> {
    let Some(first) = flats.first() else {
        return Ok(Vec::new());
    };
    let d = first.ambient_dim();
    if section_dim > d {
        return Err(Error::InvalidParameters("section dimension exceeds ambient".into()));
    }
    let codim = d - section_dim;
    if let Some(f) = flats.iter().find(|f| f.dim() < codim) {
        return Err(Error::InvalidParameters(format!(
            "{}-flat cannot meet a codimension-{codim} section in a flat",
            f.dim()
        )));
    }
    let mut rng = seeded(seed);
    // π = origin + span(basis); s ↦ origin + Σ s_j basis_j
    let origin = random_point(d, &mut rng);
    let basis: Vec<Row> = (0..section_dim).map(|_| random_vector(d, GENERIC_RANGE, &mut rng)).collect();
    if linalg::rank(basis.clone()) != section_dim {
        return Err(Error::GenericityFailure("degenerate section basis".into()));
    }
    let images = flats
        .iter()
        .map(|f| {
            if f.ambient_dim() != d {
                return Err(Error::DimensionMismatch(f.ambient_dim(), d));
            }
            let pulled: Vec<Row> = f
                .equations()
                .iter()
                .map(|e| {
                    let mut row = vec![&e[0] + &linalg::dot(&e[1..], &origin)];
                    row.extend(basis.iter().map(|b| linalg::dot(&e[1..], b)));
                    row
                })
                .collect();
            match Flat::from_equations(section_dim, &pulled)? {
                Some(g) if g.dim() == f.dim() - codim => Ok(g),
                Some(g) => {
                    Err(Error::GenericityFailure(format!("{}-flat met the section in a {}-flat", f.dim(), g.dim())))
                }
                None => Err(Error::GenericityFailure("flat misses the section".into())),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    ensure_distinct(&images, "section")?;
    Ok(images)
}

/// Projects every flat by one random affine map Q^d → Q^target_dim.
///
/// Images keep the dimension of the original flat; containments carry over.
pub fn generic_projection(flats: &[Flat], target_dim: usize, seed: u64) -> Result<Vec<Flat>> {
    let Some(first) = flats.first() else {
        return Ok(Vec::new());
    };
    let d = first.ambient_dim();
    if target_dim >= d {
        return Err(Error::InvalidParameters("projection must lower the dimension".into()));
    }
    if let Some(f) = flats.iter().find(|f| f.dim() > target_dim) {
        return Err(Error::InvalidParameters(format!("{}-flat cannot keep its dimension in Q^{target_dim}", f.dim())));
    }
    let mut rng = seeded(seed);
    let matrix: Vec<Row> = (0..target_dim).map(|_| random_vector(d, GENERIC_RANGE, &mut rng)).collect();
    let offset = random_point(target_dim, &mut rng);
    let map = |p: &[Scalar]| -> Point { matrix.iter().zip(&offset).map(|(row, o)| &linalg::dot(row, p) + o).collect() };
    let images = flats
        .iter()
        .map(|f| {
            if f.ambient_dim() != d {
                return Err(Error::DimensionMismatch(f.ambient_dim(), d));
            }
            let g = f.map_points(target_dim, map)?;
            if g.dim() != f.dim() {
                return Err(Error::GenericityFailure(format!("{}-flat projected to a {}-flat", f.dim(), g.dim())));
            }
            Ok(g)
        })
        .collect::<Result<Vec<_>>>()?;
    ensure_distinct(&images, "projected")?;
    Ok(images)
}

/// An invertible linear change of coordinates of Q^d.
#[derive(Clone, Debug)]
pub struct LinearMap {
    rows: Vec<Row>,
}

impl LinearMap {
    pub fn random<R: Rng>(d: usize, range: i64, rng: &mut R) -> Self {
        loop {
            let rows: Vec<Row> = (0..d).map(|_| random_vector(d, range, rng)).collect();
            if linalg::rank(rows.clone()) == d {
                return LinearMap { rows };
            }
        }
    }

    pub fn apply_point(&self, p: &[Scalar]) -> Point {
        self.rows.iter().map(|r| linalg::dot(r, p)).collect()
    }

    pub fn apply(&self, flat: &Flat) -> Flat {
        flat.map_points(self.rows.len(), |p| self.apply_point(p)).expect("invertible maps preserve flats")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ints;

    fn incidences(lower: &[Flat], upper: &[Flat]) -> usize {
        lower.iter().map(|f| upper.iter().filter(|g| g.contains(f).unwrap()).count()).sum()
    }

    #[test]
    fn section_of_a_plane_is_a_line() {
        let plane = Flat::from_equations(3, &[ints(&[0, 0, 0, 1])]).unwrap().unwrap();
        let out = generic_section(&[plane], 2, 1).unwrap();
        assert_eq!(out[0].dim(), 1);
        assert_eq!(out[0].ambient_dim(), 2);
    }

    #[test]
    fn section_keeps_containment() {
        let line = Flat::from_points(&[ints(&[0, 0, 0]), ints(&[1, 2, 3])], 3).unwrap();
        let plane = line.join(&Flat::point(&ints(&[5, -1, 2]))).unwrap();
        let out = generic_section(&[line, plane], 2, 3).unwrap();
        assert_eq!(out[0].dim(), 0);
        assert_eq!(out[1].dim(), 1);
        assert!(out[1].contains(&out[0]).unwrap());
    }

    #[test]
    fn section_counts_in_q4() {
        let mut rng = seeded(11);
        let mut lines = Vec::new();
        let mut planes = Vec::new();
        for _ in 0..10 {
            let l = random_flat(1, 4, &mut rng);
            planes.push(random_flat_through(&l, 2, None, &mut rng).unwrap());
            lines.push(l);
        }
        let before = incidences(&lines, &planes);
        let mut all = lines.clone();
        all.extend(planes.iter().cloned());
        let out = generic_section(&all, 3, 5).unwrap();
        let (l2, p2) = out.split_at(lines.len());
        assert_eq!(incidences(l2, p2), before);
        assert_eq!(before, 10);
    }

    #[test]
    fn projection_of_point_and_pair() {
        let p = Flat::point(&ints(&[1, 2, 3]));
        let out = generic_projection(std::slice::from_ref(&p), 2, 9).unwrap();
        assert_eq!(out[0].dim(), 0);
        let line = Flat::from_points(&[ints(&[1, 2, 3]), ints(&[4, 4, 4])], 3).unwrap();
        let out = generic_projection(&[p, line], 2, 9).unwrap();
        assert!(out[1].contains(&out[0]).unwrap());
    }

    #[test]
    fn projection_counts_in_q3() {
        let mut rng = seeded(2);
        let lines: Vec<Flat> = (0..20).map(|_| random_flat(1, 3, &mut rng)).collect();
        let mut points: Vec<Flat> = (0..40)
            .map(|i| {
                let l = &lines[i % 20];
                Flat::point(&random_point_in(l, &mut rng))
            })
            .collect();
        points.dedup();
        let before = incidences(&points, &lines);
        let mut all = points.clone();
        all.extend(lines.iter().cloned());
        let out = generic_projection(&all, 2, 4).unwrap();
        let (p2, l2) = out.split_at(points.len());
        let after = incidences(p2, l2);
        assert!(after >= before);
        assert_eq!(after, before);
    }

    #[test]
    fn rejects_bad_dimensions() {
        let p = Flat::point(&ints(&[1, 2, 3]));
        assert!(matches!(generic_section(std::slice::from_ref(&p), 2, 0), Err(Error::InvalidParameters(_))));
        assert!(matches!(generic_projection(&[p], 3, 0), Err(Error::InvalidParameters(_))));
    }

    #[test]
    fn linear_map_preserves_incidence() {
        let mut rng = seeded(8);
        let m = LinearMap::random(3, 50, &mut rng);
        let line = Flat::from_points(&[ints(&[1, 2, 3]), ints(&[4, 4, 4])], 3).unwrap();
        let p = Flat::point(&ints(&[7, 6, 5]));
        assert!(m.apply(&line).contains(&m.apply(&p)).unwrap());
    }
}
