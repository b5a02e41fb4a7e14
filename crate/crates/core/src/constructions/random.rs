use rand::Rng;

use crate::error::{Error, Result};
use crate::family::LayeredFamily;
use crate::flat::{Flat, Point};
use crate::generic::{random_vector, seeded, SeededRng};

const POOL_RANGE: i64 = 3;

/// A complete-flag family in Q^d with rich containment: each `j`-flat is
/// usually the join of two `(j−1)`-flats of the family, or of one with a
/// point of the family or of a small shared pool, and sometimes an unrelated
/// span of pool points.
pub fn random_nested_family(d: usize, max_per_level: usize, seed: u64) -> Result<LayeredFamily> {
    if d == 0 || max_per_level == 0 {
        return Err(Error::InvalidParameters("need d >= 1 and at least one flat per level".into()));
    }
    let mut rng = seeded(seed);
    let pool: Vec<Point> = (0..3 * max_per_level).map(|_| random_vector(d, POOL_RANGE, &mut rng)).collect();
    let pick = |rng: &mut SeededRng| Flat::point(&pool[rng.gen_range(0..pool.len())]);

    let mut sets: Vec<(usize, Vec<Flat>)> = Vec::with_capacity(d);
    for j in 0..d {
        let target = rng.gen_range(max_per_level.div_ceil(3)..=max_per_level);
        let mut flats = Vec::with_capacity(target);
        let mut tries = 0;
        while flats.len() < target && tries < 50 * target {
            tries += 1;
            let f = if j == 0 {
                pick(&mut rng)
            } else {
                let lower = &sets[j - 1].1;
                let a = &lower[rng.gen_range(0..lower.len())];
                match rng.gen_range(0..10) {
                    // two lower flats whose join has the right dimension
                    0..=4 => a.join(&lower[rng.gen_range(0..lower.len())])?,
                    5..=7 => {
                        let points = &sets[0].1;
                        a.join(&points[rng.gen_range(0..points.len())])?
                    }
                    8 => a.join(&pick(&mut rng))?,
                    _ => {
                        let mut f = pick(&mut rng);
                        for _ in 0..j {
                            f = f.join(&pick(&mut rng))?;
                        }
                        f
                    }
                }
            };
            if f.dim() == j && !flats.contains(&f) {
                flats.push(f);
            }
        }
        if flats.is_empty() {
            return Err(Error::GenericityFailure(format!("no {j}-flat found")));
        }
        sets.push((j, flats));
    }
    LayeredFamily::from_sets(d, sets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::containment_graph;

    #[test]
    fn shape_and_determinism() {
        for d in 1..=4 {
            let a = random_nested_family(d, 10, 42).unwrap();
            assert_eq!(a.dims(), (0..d).collect::<Vec<_>>());
            assert!(a.sizes().iter().all(|&s| (1..=10).contains(&s)));
            assert_eq!(a, random_nested_family(d, 10, 42).unwrap());
        }
    }

    #[test]
    fn has_containments() {
        let edges: usize =
            (0..10).map(|s| containment_graph(&random_nested_family(3, 20, s).unwrap()).total_edges()).sum();
        assert!(edges > 50);
    }
}
