use std::collections::HashSet;

use rand::seq::index::sample;
use rand::Rng;

use super::{GeneratedInstance, Prediction};
use crate::error::{Error, Result};
use crate::family::LayeredFamily;
use crate::flat::Flat;
use crate::generic::seeded;
use crate::linalg::{self, Row};
use crate::scalar::{int, ints, Scalar};
use crate::space3::Line3;

const MAX_PARAMETER: i64 = 200;

/// Distinct primitive directions on the cone `x² + y² = z²`, from
/// `(m² − n², 2mn, m² + n²)` and its sign and axis-swap variants.
pub fn pythagorean_directions(count: usize) -> Result<Vec<Row>> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(count);
    'outer: for m in 1..=MAX_PARAMETER {
        for n in 1..=m {
            let (x, y, z) = (m * m - n * n, 2 * m * n, m * m + n * n);
            for (a, b) in [(x, y), (y, x)] {
                for (sa, sb) in [(1, 1), (1, -1)] {
                    let dir = linalg::primitive(&ints(&[sa * a, sb * b, z]));
                    if seen.insert(dir.clone()) {
                        out.push(dir);
                        if out.len() == count {
                            break 'outer;
                        }
                    }
                }
            }
        }
    }
    if out.len() < count {
        return Err(Error::NotEnoughDirections { requested: count, found: out.len() });
    }
    Ok(out)
}

/// `per_direction` distinct lines for each of `directions` light-like
/// directions, anchored at random points of a small cube so lines meet often.
pub fn lightlike_family(directions: usize, per_direction: usize, seed: u64) -> Result<Vec<Line3>> {
    if directions == 0 || per_direction == 0 {
        return Err(Error::InvalidParameters("counts must be at least 1".into()));
    }
    let dirs = pythagorean_directions(directions)?;
    // a line with a primitive direction meets at most s cube points, so s² ≥ 2·per_direction lines exist
    let mut s = 2i64;
    while ((s * s) as usize) < 2 * per_direction {
        s += 1;
    }
    let mut rng = seeded(seed);
    let mut lines = Vec::with_capacity(directions * per_direction);
    for dir in &dirs {
        let mut seen = HashSet::new();
        while seen.len() < per_direction {
            let anchor: Vec<Scalar> = (0..3).map(|_| int(rng.gen_range(0..s))).collect();
            let line = Line3::through(&anchor, dir)?;
            if seen.insert(line.to_flat()) {
                lines.push(line);
            }
        }
    }
    Ok(lines)
}

/// Light-like lines with the points where they are anchored or meet.
pub fn lightlike_instance(directions: usize, per_direction: usize, seed: u64) -> Result<GeneratedInstance> {
    let lines = lightlike_family(directions, per_direction, seed)?;
    let flats: Vec<Flat> = lines.iter().map(Line3::to_flat).collect();
    let mut points: Vec<Flat> = lines.iter().map(|l| Flat::point(&l.anchor)).collect();
    for (i, a) in flats.iter().enumerate() {
        for b in &flats[i + 1..] {
            if let Some(m) = a.meet(b)? {
                if m.dim() == 0 {
                    points.push(m);
                }
            }
        }
    }
    let family = LayeredFamily::from_sets(3, vec![(0, points), (1, flats)])?;
    Ok(GeneratedInstance::new(family).predict_sizes())
}

/// For each point `p` of the cube `[0, g)³`, `r` distinct lines through `p`
/// inside its Legendrian plane, with pencil parameters drawn from the seed.
pub fn legendrian_family(grid_side: usize, lines_per_point: usize, seed: u64) -> Result<Vec<Line3>> {
    if grid_side == 0 || lines_per_point == 0 {
        return Err(Error::InvalidParameters("grid side and lines per point must be at least 1".into()));
    }
    let g = grid_side as i64;
    let range = 4 * lines_per_point.max(2);
    let mut rng = seeded(seed);
    let mut seen = HashSet::new();
    let mut lines = Vec::new();
    for a in 0..g {
        for b in 0..g {
            for c in 0..g {
                let p = ints(&[a, b, c]);
                // in-plane basis for the normal (b, −a, 1)
                let e1 = ints(&[1, 0, -b]);
                let e2 = ints(&[0, 1, a]);
                for j in sample(&mut rng, range, lines_per_point) {
                    let j = j as i64 - (range / 2) as i64;
                    let dir = linalg::add(&e1, &linalg::scale(&e2, &int(j)));
                    let line = Line3::through(&p, &dir)?;
                    if seen.insert(line.to_flat()) {
                        lines.push(line);
                    }
                }
            }
        }
    }
    Ok(lines)
}

pub fn legendrian_instance(grid_side: usize, lines_per_point: usize, seed: u64) -> Result<GeneratedInstance> {
    let lines = legendrian_family(grid_side, lines_per_point, seed)?;
    let g = grid_side as i64;
    let points: Vec<Flat> =
        (0..g).flat_map(|a| (0..g).flat_map(move |b| (0..g).map(move |c| Flat::point(&ints(&[a, b, c]))))).collect();
    let flats = lines.iter().map(Line3::to_flat).collect();
    let family = LayeredFamily::from_sets(3, vec![(0, points), (1, flats)])?;
    let n = family.sizes()[0] as u64;
    Ok(GeneratedInstance::new(family).predict_sizes().predict("size_0", Prediction::exact(n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::max_coplanar_through_point;
    use crate::legendrian::{is_legendrian, legendrian_plane};

    fn on_cone(d: &[Scalar]) -> bool {
        &(&d[0] * &d[0]) + &(&d[1] * &d[1]) == &d[2] * &d[2]
    }

    #[test]
    fn pythagorean_examples() {
        let dirs = pythagorean_directions(12).unwrap();
        assert!(dirs.contains(&ints(&[0, 1, 1])));
        assert!(dirs.contains(&ints(&[3, 4, 5])));
        assert!(dirs.iter().all(|d| on_cone(d)));
        assert_eq!(dirs.iter().collect::<HashSet<_>>().len(), 12);
        assert!(matches!(
            pythagorean_directions(1_000_000),
            Err(Error::NotEnoughDirections { requested: 1_000_000, .. })
        ));
    }

    #[test]
    fn lightlike_lines_are_on_cone_and_distinct() {
        let lines = lightlike_family(6, 5, 3).unwrap();
        assert_eq!(lines.len(), 30);
        assert!(lines.iter().all(|l| on_cone(&l.direction)));
        let flats: HashSet<Flat> = lines.iter().map(Line3::to_flat).collect();
        assert_eq!(flats.len(), 30);
    }

    #[test]
    fn lightlike_coplanarity() {
        let inst = lightlike_instance(8, 4, 1).unwrap();
        let fam = &inst.family;
        assert!(fam.sizes()[0] > fam.sizes()[1] / 2);
        let worst = max_coplanar_through_point(&fam.level(0).flats, &fam.level(1).flats).unwrap();
        assert!(worst <= 2);
        assert_eq!(worst, 2);
    }

    #[test]
    fn legendrian_examples() {
        let one = legendrian_family(1, 3, 0).unwrap();
        assert_eq!(one.len(), 3);
        let plane = legendrian_plane(&ints(&[0, 0, 0])).to_flat();
        for l in &one {
            assert!(is_legendrian(l));
            assert!(plane.contains(&l.to_flat()).unwrap());
        }
        let small = legendrian_family(2, 2, 5).unwrap();
        assert!(small.len() <= 16);
        assert!(small.iter().all(is_legendrian));
        let inst = legendrian_instance(3, 4, 2).unwrap();
        assert_eq!(inst.family.sizes()[0], 27);
        assert!(inst.family.level(1).flats.iter().all(|f| is_legendrian(&Line3::from_flat(f).unwrap())));
    }
}
