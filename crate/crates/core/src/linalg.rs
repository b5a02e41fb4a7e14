//! Dense exact row reduction over [`Scalar`].

use crate::scalar::Scalar;

pub type Row = Vec<Scalar>;

/// Reduced row-echelon form of `rows`, with zero rows dropped.
///
/// Returns the reduced rows and the pivot column of each row.
pub fn rref(mut rows: Vec<Row>) -> (Vec<Row>, Vec<usize>) {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..ncols {
        if rank == rows.len() {
            break;
        }
        let Some(found) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, found);
        let lead = rows[rank][col].clone();
        if !lead.is_one() {
            let inv = lead.recip();
            for x in rows[rank][col..].iter_mut() {
                if !x.is_zero() {
                    *x = &*x * &inv;
                }
            }
        }
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == rank || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for c in col..ncols {
                if !pivot_row[c].is_zero() {
                    row[c] = row[c].sub_mul(&factor, &pivot_row[c]);
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }
    rows.truncate(rank);
    (rows, pivots)
}

/// Pivot column of each row of a matrix already in reduced row-echelon form.
pub fn pivot_columns(rows: &[Row]) -> Vec<usize> {
    rows.iter().map(|r| r.iter().position(|x| !x.is_zero()).expect("zero row in echelon form")).collect()
}

/// Residual of `v` after eliminating the pivot columns of an RREF basis.
///
/// `v` lies in the row space iff the residual is zero.
pub fn reduce(v: &[Scalar], basis: &[Row], pivots: &[usize]) -> Row {
    let mut out = v.to_vec();
    for (row, &p) in basis.iter().zip(pivots) {
        if out[p].is_zero() {
            continue;
        }
        let factor = out[p].clone();
        for (c, x) in row.iter().enumerate().skip(p) {
            if !x.is_zero() {
                out[c] = out[c].sub_mul(&factor, x);
            }
        }
    }
    out
}

pub fn in_row_space(v: &[Scalar], basis: &[Row], pivots: &[usize]) -> bool {
    // Coordinates at the pivots fix the only candidate combination; compare it
    // against `v` column by column and stop at the first disagreement.
    let ncols = v.len();
    for c in 0..ncols {
        if pivots.contains(&c) {
            continue;
        }
        let mut acc = Scalar::zero();
        for (row, &p) in basis.iter().zip(pivots) {
            if !v[p].is_zero() && !row[c].is_zero() {
                acc = &acc + &(&v[p] * &row[c]);
            }
        }
        if acc != v[c] {
            return false;
        }
    }
    true
}

/// Basis of `{x : row · x = 0 for every row}` for a matrix in RREF.
pub fn null_space(rref_rows: &[Row], pivots: &[usize], ncols: usize) -> Vec<Row> {
    let mut out = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut x = vec![Scalar::zero(); ncols];
        x[free] = Scalar::one();
        for (row, &p) in rref_rows.iter().zip(pivots) {
            x[p] = -&row[free];
        }
        out.push(x);
    }
    out
}

pub fn rank(rows: Vec<Row>) -> usize {
    rref(rows).0.len()
}

pub fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    a.iter().zip(b).filter(|(x, y)| !x.is_zero() && !y.is_zero()).fold(Scalar::zero(), |acc, (x, y)| &acc + &(x * y))
}

pub fn sub(a: &[Scalar], b: &[Scalar]) -> Row {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[Scalar], b: &[Scalar]) -> Row {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[Scalar], s: &Scalar) -> Row {
    a.iter().map(|x| x * s).collect()
}

pub fn cross(a: &[Scalar], b: &[Scalar]) -> Row {
    vec![&(&a[1] * &b[2]) - &(&a[2] * &b[1]), &(&a[2] * &b[0]) - &(&a[0] * &b[2]), &(&a[0] * &b[1]) - &(&a[1] * &b[0])]
}

/// Scales a nonzero rational vector to the primitive integer vector with
/// first nonzero entry positive.
pub fn primitive(v: &[Scalar]) -> Row {
    use num_bigint::BigInt;
    use num_integer::Integer;
    use num_traits::{One, Signed, Zero};

    let lcm = v.iter().filter(|x| !x.is_zero()).fold(BigInt::one(), |acc, x| acc.lcm(&x.denom()));
    let nums: Vec<BigInt> = v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    let g = nums.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    assert!(!g.is_zero(), "primitive of zero vector");
    let sign = nums.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative());
    nums.into_iter()
        .map(|x| {
            let q = x / &g;
            Scalar::from(if sign { -q } else { q })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ints;

    #[test]
    fn rref_drops_dependent_rows() {
        let rows = vec![ints(&[1, 2, 3]), ints(&[2, 4, 6]), ints(&[0, 1, 1])];
        let (r, piv) = rref(rows);
        assert_eq!(piv, vec![0, 1]);
        assert_eq!(r, vec![ints(&[1, 0, 1]), ints(&[0, 1, 1])]);
    }

    #[test]
    fn null_space_is_orthogonal() {
        let (r, piv) = rref(vec![ints(&[1, 2, 3, 4]), ints(&[0, 1, 5, 2])]);
        let ns = null_space(&r, &piv, 4);
        assert_eq!(ns.len(), 2);
        for x in &ns {
            for row in &r {
                assert!(dot(row, x).is_zero());
            }
        }
    }

    #[test]
    fn reduce_matches_membership() {
        let (r, piv) = rref(vec![ints(&[1, 0, 2]), ints(&[0, 1, -1])]);
        let inside = ints(&[3, -2, 8]);
        let outside = ints(&[3, -2, 7]);
        assert!(reduce(&inside, &r, &piv).iter().all(Scalar::is_zero));
        assert!(in_row_space(&inside, &r, &piv));
        assert!(!in_row_space(&outside, &r, &piv));
    }

    #[test]
    fn primitive_sign_convention() {
        let v = vec![Scalar::zero(), Scalar::new(-2, 3), Scalar::new(4, 9)];
        assert_eq!(primitive(&v), ints(&[0, 3, -2]));
    }
}
