//! Affine flats in Q^d in canonical homogeneous form.
//!
//! A k-flat is stored as the reduced row-echelon basis of the (k+1)-dimensional
//! linear subspace of Q^{d+1} spanned by the lifts `(1, x)` of its points.
//! Column 0 is the homogenizing coordinate. Because the flat is nonempty the
//! first row always has its pivot in column 0; it is the unique anchor point
//! with zeros in every other pivot column. The remaining rows span the
//! direction space.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{self, Row};
use crate::scalar::Scalar;

/// A point of Q^d.
pub type Point = Vec<Scalar>;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Flat {
    ambient_dim: usize,
    rows: Vec<Row>,
    pivots: Vec<usize>,
}

impl Flat {
    /// Canonical flat from homogeneous spanning rows (any number, any order).
    pub fn from_homogeneous(ambient_dim: usize, rows: Vec<Row>) -> Result<Self> {
        if rows.iter().any(|r| r.len() != ambient_dim + 1) {
            return Err(Error::InvalidFlat(format!("homogeneous rows must have length {}", ambient_dim + 1)));
        }
        let (rows, pivots) = linalg::rref(rows);
        if pivots.first() != Some(&0) {
            return Err(Error::InvalidFlat("no affine part".into()));
        }
        Ok(Flat { ambient_dim, rows, pivots })
    }

    /// Affine hull of a nonempty point set.
    pub fn from_points(points: &[Point], ambient_dim: usize) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut rows = Vec::with_capacity(points.len());
        for p in points {
            if p.len() != ambient_dim {
                return Err(Error::DimensionMismatch(p.len(), ambient_dim));
            }
            let mut row = Vec::with_capacity(ambient_dim + 1);
            row.push(Scalar::one());
            row.extend(p.iter().cloned());
            rows.push(row);
        }
        Self::from_homogeneous(ambient_dim, rows)
    }

    pub fn point(p: &[Scalar]) -> Self {
        Self::from_points(&[p.to_vec()], p.len()).expect("a single point is a valid flat")
    }

    /// Flat through `anchor` spanned by `directions` (dependent directions allowed).
    pub fn from_anchor_directions(anchor: &[Scalar], directions: &[Point]) -> Result<Self> {
        let d = anchor.len();
        let mut rows = Vec::with_capacity(directions.len() + 1);
        let mut first = vec![Scalar::one()];
        first.extend(anchor.iter().cloned());
        rows.push(first);
        for dir in directions {
            if dir.len() != d {
                return Err(Error::DimensionMismatch(dir.len(), d));
            }
            let mut row = vec![Scalar::zero()];
            row.extend(dir.iter().cloned());
            rows.push(row);
        }
        Self::from_homogeneous(d, rows)
    }

    /// The flat cut out by affine equations `e[0] + e[1..]·x = 0`, or `None` if empty.
    pub fn from_equations(ambient_dim: usize, equations: &[Row]) -> Result<Option<Self>> {
        let ncols = ambient_dim + 1;
        if equations.iter().any(|e| e.len() != ncols) {
            return Err(Error::InvalidFlat("equation length mismatch".into()));
        }
        let (eq, piv) = linalg::rref(equations.to_vec());
        let span = linalg::null_space(&eq, &piv, ncols);
        if span.is_empty() {
            return Ok(None);
        }
        match Self::from_homogeneous(ambient_dim, span) {
            Ok(f) => Ok(Some(f)),
            Err(Error::InvalidFlat(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.rows.len() - 1
    }

    /// Canonical `(dim+1) × (d+1)` basis.
    pub fn basis(&self) -> &[Row] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Canonical anchor point of the flat.
    pub fn anchor(&self) -> Point {
        self.rows[0][1..].to_vec()
    }

    /// Direction vectors, in reduced echelon form.
    pub fn directions(&self) -> Vec<Point> {
        self.rows[1..].iter().map(|r| r[1..].to_vec()).collect()
    }

    /// The direction rows in homogeneous form (leading zero kept).
    pub fn direction_rows(&self) -> &[Row] {
        &self.rows[1..]
    }

    /// `dim + 1` affinely independent points spanning the flat.
    pub fn generators(&self) -> Vec<Point> {
        let a = self.anchor();
        let mut out = vec![a.clone()];
        for dir in self.directions() {
            out.push(linalg::add(&a, &dir));
        }
        out
    }

    fn check_ambient(&self, other: &Flat) -> Result<()> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::DimensionMismatch(self.ambient_dim, other.ambient_dim));
        }
        Ok(())
    }

    /// True iff every point of `inner` lies in `self`.
    pub fn contains(&self, inner: &Flat) -> Result<bool> {
        self.check_ambient(inner)?;
        Ok(self.contains_unchecked(inner))
    }

    pub(crate) fn contains_unchecked(&self, inner: &Flat) -> bool {
        inner.dim() <= self.dim() && inner.rows.iter().all(|r| linalg::in_row_space(r, &self.rows, &self.pivots))
    }

    pub fn contains_point(&self, p: &[Scalar]) -> bool {
        if p.len() != self.ambient_dim {
            return false;
        }
        let mut row = vec![Scalar::one()];
        row.extend(p.iter().cloned());
        linalg::in_row_space(&row, &self.rows, &self.pivots)
    }

    /// Affine span of `self ∪ other`.
    pub fn join(&self, other: &Flat) -> Result<Flat> {
        self.check_ambient(other)?;
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        Flat::from_homogeneous(self.ambient_dim, rows)
    }

    /// Hyperplane equations `e` with `e · (1, x) = 0` on the flat; `d - dim` of them.
    pub fn equations(&self) -> Vec<Row> {
        linalg::null_space(&self.rows, &self.pivots, self.ambient_dim + 1)
    }

    /// `self ∩ other`, or `None` when they are disjoint.
    pub fn meet(&self, other: &Flat) -> Result<Option<Flat>> {
        self.check_ambient(other)?;
        if self.contains_unchecked(other) {
            return Ok(Some(other.clone()));
        }
        if other.contains_unchecked(self) {
            return Ok(Some(self.clone()));
        }
        let mut eqs = self.equations();
        eqs.extend(other.equations());
        Flat::from_equations(self.ambient_dim, &eqs)
    }

    /// Image under an affine map given on points. The image may have lower dimension.
    pub fn map_points<F>(&self, target_dim: usize, map: F) -> Result<Flat>
    where
        F: Fn(&[Scalar]) -> Point,
    {
        let pts: Vec<Point> = self.generators().iter().map(|p| map(p)).collect();
        Flat::from_points(&pts, target_dim)
    }

    /// Translate by `offset`.
    pub fn translate(&self, offset: &[Scalar]) -> Flat {
        self.map_points(self.ambient_dim, |p| linalg::add(p, offset)).expect("translation preserves validity")
    }

    pub fn to_json(&self) -> FlatJson {
        FlatJson { ambient_dim: self.ambient_dim, dim: self.dim(), basis: self.rows.clone() }
    }

    pub fn from_json(json: FlatJson) -> Result<Flat> {
        let flat = Flat::from_homogeneous(json.ambient_dim, json.basis)?;
        if flat.dim() != json.dim {
            return Err(Error::InvalidFlat(format!("declared dim {} but basis spans dim {}", json.dim, flat.dim())));
        }
        Ok(flat)
    }
}

impl fmt::Debug for Flat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Flat{{d={}, k={}, anchor={:?}", self.ambient_dim, self.dim(), self.anchor())?;
        if self.dim() > 0 {
            write!(f, ", dirs={:?}", self.directions())?;
        }
        write!(f, "}}")
    }
}

/// Serialized form: `{ambient_dim, dim, basis: [["p/q", ...], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlatJson {
    pub ambient_dim: usize,
    pub dim: usize,
    pub basis: Vec<Row>,
}

impl Serialize for Flat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Flat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let json = FlatJson::deserialize(d)?;
        Flat::from_json(json).map_err(serde::de::Error::custom)
    }
}
