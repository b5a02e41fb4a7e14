//! Line and plane views of flats in Q³, and the point-plane duality.

use crate::error::{Error, Result};
use crate::flat::{Flat, Point};
use crate::linalg;
use crate::scalar::Scalar;

/// A line in Q³: canonical anchor plus primitive integer direction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Line3 {
    pub anchor: Point,
    pub direction: Vec<Scalar>,
}

/// A plane `normal · x = offset` in Q³ with primitive integer normal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Plane3 {
    pub normal: Vec<Scalar>,
    pub offset: Scalar,
}

impl Line3 {
    pub fn through(point: &[Scalar], direction: &[Scalar]) -> Result<Self> {
        if point.len() != 3 || direction.len() != 3 {
            return Err(Error::InvalidFlat("Line3 needs 3-vectors".into()));
        }
        if direction.iter().all(Scalar::is_zero) {
            return Err(Error::InvalidFlat("zero direction".into()));
        }
        Self::from_flat(&Flat::from_anchor_directions(point, &[direction.to_vec()])?)
    }

    pub fn from_flat(flat: &Flat) -> Result<Self> {
        if flat.ambient_dim() != 3 || flat.dim() != 1 {
            return Err(Error::InvalidFlat(format!(
                "expected a line in Q^3, got a {}-flat in Q^{}",
                flat.dim(),
                flat.ambient_dim()
            )));
        }
        Ok(Line3 { anchor: flat.anchor(), direction: linalg::primitive(&flat.directions()[0]) })
    }

    pub fn to_flat(&self) -> Flat {
        Flat::from_anchor_directions(&self.anchor, std::slice::from_ref(&self.direction))
            .expect("Line3 always has a nonzero direction")
    }

    pub fn point_at(&self, t: &Scalar) -> Point {
        linalg::add(&self.anchor, &linalg::scale(&self.direction, t))
    }

    pub fn is_vertical(&self) -> bool {
        self.direction[0].is_zero() && self.direction[1].is_zero()
    }
}

impl Plane3 {
    pub fn new(normal: &[Scalar], offset: &Scalar) -> Result<Self> {
        if normal.len() != 3 || normal.iter().all(Scalar::is_zero) {
            return Err(Error::InvalidFlat("plane needs a nonzero 3-vector normal".into()));
        }
        // rescale (normal, offset) together so the normal is primitive
        let first = normal.iter().position(|x| !x.is_zero()).unwrap();
        let prim = linalg::primitive(normal);
        let factor = &prim[first] / &normal[first];
        Ok(Plane3 { normal: prim, offset: offset * &factor })
    }

    /// `z = u x + v y + w`.
    pub fn non_vertical(u: &Scalar, v: &Scalar, w: &Scalar) -> Self {
        Self::new(&[-u, -v, Scalar::one()], w).expect("normal has unit z")
    }

    pub fn from_flat(flat: &Flat) -> Result<Self> {
        if flat.ambient_dim() != 3 || flat.dim() != 2 {
            return Err(Error::InvalidFlat(format!(
                "expected a plane in Q^3, got a {}-flat in Q^{}",
                flat.dim(),
                flat.ambient_dim()
            )));
        }
        let eq = flat.equations().remove(0);
        Self::new(&eq[1..], &-&eq[0])
    }

    pub fn to_flat(&self) -> Flat {
        let mut eq = vec![-&self.offset];
        eq.extend(self.normal.iter().cloned());
        Flat::from_equations(3, &[eq]).expect("well-formed equation").expect("a plane is nonempty")
    }

    pub fn contains_point(&self, p: &[Scalar]) -> bool {
        linalg::dot(&self.normal, p) == self.offset
    }

    pub fn is_vertical(&self) -> bool {
        self.normal[2].is_zero()
    }

    /// Coefficients `(u, v, w)` of `z = u x + v y + w`.
    pub fn slopes(&self) -> Result<(Scalar, Scalar, Scalar)> {
        if self.is_vertical() {
            return Err(Error::Vertical(format!("plane with normal {:?}", self.normal)));
        }
        let nz = &self.normal[2];
        Ok((-&(&self.normal[0] / nz), -&(&self.normal[1] / nz), &self.offset / nz))
    }
}

/// Dual plane of a point: `(a, b, c) ↦ {z = a x + b y − c}`.
pub fn dual_of_point(p: &[Scalar]) -> Plane3 {
    Plane3::non_vertical(&p[0], &p[1], &-&p[2])
}

/// Dual point of a non-vertical plane: `{z = u x + v y + w} ↦ (u, v, −w)`.
pub fn dual_of_plane(plane: &Plane3) -> Result<Point> {
    let (u, v, w) = plane.slopes()?;
    Ok(vec![u, v, -w])
}

/// Dual line: the common line of the dual planes of the points of `line`.
pub fn dual_of_line(line: &Line3) -> Result<Line3> {
    if line.is_vertical() {
        return Err(Error::Vertical(format!("line with direction {:?} dualizes to parallel planes", line.direction)));
    }
    let p1 = dual_of_point(&line.anchor).to_flat();
    let p2 = dual_of_point(&line.point_at(&Scalar::one())).to_flat();
    let meet = p1.meet(&p2)?.expect("non-parallel planes meet");
    Line3::from_flat(&meet)
}

/// Duality on flats of Q³: points ↔ planes, lines ↔ lines.
pub fn dualize_3d(flat: &Flat) -> Result<Flat> {
    if flat.ambient_dim() != 3 {
        return Err(Error::DimensionMismatch(flat.ambient_dim(), 3));
    }
    match flat.dim() {
        0 => Ok(dual_of_point(&flat.anchor()).to_flat()),
        1 => Ok(dual_of_line(&Line3::from_flat(flat)?)?.to_flat()),
        2 => Ok(Flat::point(&dual_of_plane(&Plane3::from_flat(flat)?)?)),
        _ => Err(Error::InvalidFlat("the whole space has no dual".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ints};

    #[test]
    fn plane_view_roundtrip() {
        let f = Flat::from_points(&[ints(&[1, 0, 0]), ints(&[0, 2, 0]), ints(&[0, 0, 3])], 3).unwrap();
        let p = Plane3::from_flat(&f).unwrap();
        assert_eq!(p.normal, ints(&[6, 3, 2]));
        assert_eq!(p.offset, int(6));
        assert_eq!(p.to_flat(), f);
    }

    #[test]
    fn line_view_sign_convention() {
        let l = Line3::through(&ints(&[1, 1, 1]), &[Scalar::new(-1, 2), int(0), int(1)]).unwrap();
        assert_eq!(l.direction, ints(&[1, 0, -2]));
        assert_eq!(Line3::from_flat(&l.to_flat()).unwrap(), l);
    }

    #[test]
    fn duality_of_origin_is_involution() {
        let o = Flat::point(&ints(&[0, 0, 0]));
        let d = dualize_3d(&o).unwrap();
        assert_eq!(Plane3::from_flat(&d).unwrap(), Plane3::non_vertical(&int(0), &int(0), &int(0)));
        assert_eq!(dualize_3d(&d).unwrap(), o);
    }

    #[test]
    fn duality_reverses_incidence_by_hand() {
        // p = (1,2,3) lies on z = x + y
        let p = ints(&[1, 2, 3]);
        let plane = Plane3::non_vertical(&int(1), &int(1), &int(0));
        assert!(plane.contains_point(&p));
        let p_dual = dual_of_point(&p);
        assert_eq!(p_dual, Plane3::non_vertical(&int(1), &int(2), &int(-3)));
        let plane_dual = dual_of_plane(&plane).unwrap();
        assert_eq!(plane_dual, ints(&[1, 1, 0]));
        assert!(p_dual.contains_point(&plane_dual));
    }

    #[test]
    fn vertical_inputs_rejected() {
        let vertical_plane = Plane3::new(&ints(&[1, 0, 0]), &int(0)).unwrap();
        assert!(matches!(dual_of_plane(&vertical_plane), Err(Error::Vertical(_))));
        let vertical_line = Line3::through(&ints(&[0, 0, 0]), &ints(&[0, 0, 1])).unwrap();
        assert!(matches!(dual_of_line(&vertical_line), Err(Error::Vertical(_))));
    }

    #[test]
    fn line_duality_involution_and_incidence() {
        let l = Line3::through(&ints(&[1, -2, 5]), &ints(&[2, 1, 7])).unwrap();
        let ld = dual_of_line(&l).unwrap();
        assert_eq!(dual_of_line(&ld).unwrap(), l);
        // point on l  <=>  dual line inside dual plane of the point
        let p = l.point_at(&int(3));
        let p_dual = dual_of_point(&p).to_flat();
        assert!(p_dual.contains(&ld.to_flat()).unwrap());
        // plane through l  <=>  its dual point on the dual line
        let plane = l.to_flat().join(&Flat::point(&ints(&[0, 0, 0]))).unwrap();
        let q = dual_of_plane(&Plane3::from_flat(&plane).unwrap()).unwrap();
        assert!(ld.to_flat().contains_point(&q));
    }
}
