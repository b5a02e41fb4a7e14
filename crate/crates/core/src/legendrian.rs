//! Legendrian lines: lines orthogonal at each of their points to the field
//! `(y, −x, 1)`.
//!
//! For a line through `(a, b, c)` with direction `(u, v, w)` the product
//! `(u, v, w) · (b + v t, −a − u t, 1)` equals `b u − a v + w` for every `t`, so
//! the predicate can be evaluated from any anchor.

use crate::error::{Error, Result};
use crate::flat::Point;
use crate::linalg;
use crate::scalar::Scalar;
use crate::space3::{Line3, Plane3};

/// `b u − a v + w` for anchor `(a, b, _)` and direction `(u, v, w)`.
pub fn legendrian_form(anchor: &[Scalar], direction: &[Scalar]) -> Scalar {
    let bu = &anchor[1] * &direction[0];
    let av = &anchor[0] * &direction[1];
    &(&bu - &av) + &direction[2]
}

pub fn is_legendrian(line: &Line3) -> bool {
    legendrian_form(&line.anchor, &line.direction).is_zero()
}

/// Field vector `(y, −x, 1)` at `p`.
pub fn field_at(p: &[Scalar]) -> Vec<Scalar> {
    vec![p[1].clone(), -&p[0], Scalar::one()]
}

/// The plane through `p` with normal `(b, −a, 1)`; every line through `p` in it is Legendrian.
pub fn legendrian_plane(p: &[Scalar]) -> Plane3 {
    let normal = field_at(p);
    let offset = linalg::dot(&normal, p);
    Plane3::new(&normal, &offset).expect("field vector is nonzero")
}

/// The point `(v, −u, w)` of the non-vertical plane `z = u x + v y + w`.
pub fn legendrian_point(plane: &Plane3) -> Result<Point> {
    let (u, v, w) = plane.slopes()?;
    Ok(vec![v, -u, w])
}

/// The unique Legendrian line through `q` inside `plane`; `None` when `q` is
/// the plane's Legendrian point (every in-plane line through it qualifies).
pub fn legendrian_line_at(q: &[Scalar], plane: &Plane3) -> Result<Option<Line3>> {
    if plane.is_vertical() {
        return Err(Error::Vertical(format!("plane with normal {:?}", plane.normal)));
    }
    if !plane.contains_point(q) {
        return Err(Error::NotOnPlane);
    }
    let direction = linalg::cross(&plane.normal, &field_at(q));
    if direction.iter().all(Scalar::is_zero) {
        return Ok(None);
    }
    Line3::through(q, &direction).map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flat::Flat;
    use crate::scalar::{int, ints};

    #[test]
    fn predicate_examples() {
        let l = Line3::through(&ints(&[1, 2, 3]), &ints(&[2, 1, -3])).unwrap();
        assert!(legendrian_form(&ints(&[1, 2, 3]), &ints(&[2, 1, -3])).is_zero());
        assert!(is_legendrian(&l));
        let vertical = Line3::through(&ints(&[4, -1, 0]), &ints(&[0, 0, 1])).unwrap();
        assert!(!is_legendrian(&vertical));
        let x_axis = Line3::through(&ints(&[0, 0, 0]), &ints(&[1, 0, 0])).unwrap();
        assert!(is_legendrian(&x_axis));
    }

    #[test]
    fn plane_examples() {
        assert_eq!(legendrian_plane(&ints(&[0, 0, 0])), Plane3::non_vertical(&int(0), &int(0), &int(0)));
        // p = (1,0,0): normal (0,-1,1) through p, i.e. z = y
        assert_eq!(legendrian_plane(&ints(&[1, 0, 0])), Plane3::non_vertical(&int(0), &int(1), &int(0)));
        let p = ints(&[1, 2, 3]);
        let plane = legendrian_plane(&p);
        assert!(plane.contains_point(&p));
        let f = plane.to_flat();
        let dirs = f.directions();
        for (s, t) in (0..20i64).map(|i| (i - 10, 2 * i + 1)) {
            let dir = linalg::add(&linalg::scale(&dirs[0], &int(s)), &linalg::scale(&dirs[1], &int(t)));
            let line = Line3::through(&p, &dir).unwrap();
            assert!(f.contains(&line.to_flat()).unwrap());
            assert!(is_legendrian(&line));
        }
    }

    #[test]
    fn legendrian_point_examples() {
        let z0 = Plane3::non_vertical(&int(0), &int(0), &int(0));
        assert_eq!(legendrian_point(&z0).unwrap(), ints(&[0, 0, 0]));
        let pl = Plane3::non_vertical(&int(2), &int(-1), &int(5));
        assert_eq!(legendrian_point(&pl).unwrap(), ints(&[-1, -2, 5]));
        let vertical = Plane3::new(&ints(&[0, 1, 0]), &int(2)).unwrap();
        assert!(legendrian_point(&vertical).is_err());
    }

    #[test]
    fn line_at_examples() {
        let z0 = Plane3::non_vertical(&int(0), &int(0), &int(0));
        let line = legendrian_line_at(&ints(&[1, 0, 0]), &z0).unwrap().unwrap();
        assert_eq!(line.direction, ints(&[1, 0, 0]));
        assert!(line.to_flat().contains_point(&ints(&[1, 0, 0])));
        assert!(legendrian_line_at(&ints(&[0, 0, 0]), &z0).unwrap().is_none());
        assert!(matches!(legendrian_line_at(&ints(&[0, 0, 1]), &z0), Err(Error::NotOnPlane)));
    }

    #[test]
    fn z_equals_x_plus_y() {
        let pl = Plane3::non_vertical(&int(1), &int(1), &int(0));
        let p = legendrian_point(&pl).unwrap();
        assert_eq!(p, ints(&[1, -1, 0]));
        let f = pl.to_flat();
        let dirs = f.directions();
        for s in -5..5i64 {
            for t in 1..6i64 {
                let dir = linalg::add(&linalg::scale(&dirs[0], &int(s)), &linalg::scale(&dirs[1], &int(t)));
                let line = Line3::through(&p, &dir).unwrap();
                assert!(Flat::contains(&f, &line.to_flat()).unwrap());
                assert!(is_legendrian(&line));
            }
        }
    }
}
