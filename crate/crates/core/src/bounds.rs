//! Exponent-tuple grammar and evaluators for the incidence and flag bounds.
//!
//! Bounds are asymptotic, so they are evaluated in `f64`; exponents stay
//! symbolic until evaluation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Exponent {
    Zero,
    TwoThirds,
    One,
}

impl Exponent {
    pub const ALL: [Exponent; 3] = [Exponent::Zero, Exponent::TwoThirds, Exponent::One];

    pub fn value(self) -> f64 {
        match self {
            Exponent::Zero => 0.0,
            Exponent::TwoThirds => 2.0 / 3.0,
            Exponent::One => 1.0,
        }
    }

    pub fn is_zero(self) -> bool {
        self == Exponent::Zero
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Exponent::Zero => "0",
            Exponent::TwoThirds => "2/3",
            Exponent::One => "1",
        })
    }
}

impl FromStr for Exponent {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "0" => Ok(Exponent::Zero),
            "2/3" => Ok(Exponent::TwoThirds),
            "1" => Ok(Exponent::One),
            other => Err(Error::Parse(format!("exponent must be 0, 2/3 or 1, got {other:?}"))),
        }
    }
}

/// One term `∏ |S_i|^{a_i}` of the flag bound.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ExponentTuple(pub Vec<Exponent>);

impl ExponentTuple {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[Exponent] {
        &self.0
    }

    /// (i) no three consecutive nonzero entries.
    pub fn no_three_nonzero_run(&self) -> bool {
        !self.0.windows(3).any(|w| w.iter().all(|e| !e.is_zero()))
    }

    /// (ii) every 1 has 0 on each side where a neighbor exists.
    pub fn ones_isolated(&self) -> bool {
        let a = &self.0;
        (0..a.len())
            .filter(|&i| a[i] == Exponent::One)
            .all(|i| (i == 0 || a[i - 1].is_zero()) && (i + 1 == a.len() || a[i + 1].is_zero()))
    }

    /// (iii) every 2/3 has a 2/3 neighbor.
    pub fn two_thirds_paired(&self) -> bool {
        let a = &self.0;
        let tt = |j: Option<usize>| j.and_then(|j| a.get(j)) == Some(&Exponent::TwoThirds);
        (0..a.len()).filter(|&i| a[i] == Exponent::TwoThirds).all(|i| tt(i.checked_sub(1)) || tt(Some(i + 1)))
    }

    /// (iv) every 0 has a nonzero neighbor.
    pub fn zeros_supported(&self) -> bool {
        let a = &self.0;
        let nz = |j: Option<usize>| j.and_then(|j| a.get(j)).is_some_and(|e| !e.is_zero());
        (0..a.len()).filter(|&i| a[i].is_zero()).all(|i| nz(i.checked_sub(1)) || nz(Some(i + 1)))
    }

    pub fn is_valid(&self) -> bool {
        !self.0.is_empty()
            && self.no_three_nonzero_run()
            && self.ones_isolated()
            && self.two_thirds_paired()
            && self.zeros_supported()
    }

    /// `∏ sizes_i^{a_i}`.
    pub fn evaluate(&self, sizes: &[f64]) -> f64 {
        self.0.iter().zip(sizes).map(|(e, &s)| if e.is_zero() { 1.0 } else { s.powf(e.value()) }).product()
    }
}

impl fmt::Display for ExponentTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl FromStr for ExponentTuple {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        inner.split(',').map(str::parse).collect::<Result<Vec<_>>>().map(ExponentTuple)
    }
}

/// All valid tuples of length `d`, built from blocks `[2/3, 2/3]` and `[1]`
/// separated by one or two zeros, with at most one zero at either end.
pub fn valid_exponent_tuples(d: usize) -> Vec<ExponentTuple> {
    use Exponent::*;
    fn blocks(rest: usize, cur: &mut Vec<Exponent>, out: &mut Vec<Vec<Exponent>>) {
        // place a nonzero block, then either finish (optional trailing zero) or separate
        for block in [&[TwoThirds, TwoThirds][..], &[One][..]] {
            if block.len() > rest {
                continue;
            }
            let mark = cur.len();
            cur.extend_from_slice(block);
            let left = rest - block.len();
            if left == 0 {
                out.push(cur.clone());
            } else if left == 1 {
                cur.push(Zero);
                out.push(cur.clone());
            }
            for sep in 1..=2usize {
                if sep < left {
                    cur.extend(std::iter::repeat_n(Zero, sep));
                    blocks(left - sep, cur, out);
                    cur.truncate(mark + block.len());
                }
            }
            cur.truncate(mark);
        }
    }

    let mut out = Vec::new();
    for lead in 0..=1usize {
        if lead < d {
            let mut cur = vec![Zero; lead];
            blocks(d - lead, &mut cur, &mut out);
        }
    }
    let mut tuples: Vec<ExponentTuple> = out.into_iter().map(ExponentTuple).collect();
    tuples.sort();
    tuples
}

/// Reference enumeration: filter all `3^d` vectors by conditions (i)–(iv).
pub fn valid_exponent_tuples_bruteforce(d: usize) -> Vec<ExponentTuple> {
    let total = 3usize.pow(d as u32);
    let mut out: Vec<ExponentTuple> = (0..total)
        .map(|mut code| {
            ExponentTuple(
                (0..d)
                    .map(|_| {
                        let e = Exponent::ALL[code % 3];
                        code /= 3;
                        e
                    })
                    .collect(),
            )
        })
        .filter(ExponentTuple::is_valid)
        .collect();
    out.sort();
    out
}

/// A bound evaluated in floating point with the term that dominates it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub value: f64,
    pub dominant_term: String,
    /// Value of the dominant term alone.
    pub dominant_value: f64,
}

impl BoundValue {
    /// Ties within rounding go to the earlier term.
    fn from_terms(terms: Vec<(String, f64)>) -> Self {
        let (name, top) = terms.iter().fold((String::new(), f64::NEG_INFINITY), |(bn, bv), (n, v)| {
            if *v > bv * (1.0 + 1e-9) || bv == f64::NEG_INFINITY {
                (n.clone(), *v)
            } else {
                (bn, bv)
            }
        });
        BoundValue { value: terms.iter().map(|(_, v)| v).sum(), dominant_term: name, dominant_value: top }
    }
}

/// Stable identifiers used on the command line and in CSV output.
pub const BOUND_IDS: [&str; 6] = ["st", "gk", "flags", "pl34", "flags3d-restricted", "partial-flags"];

/// `Σ_{valid a} ∏ sizes_i^{a_i}` with `d = sizes.len()`.
pub fn flags_bound(sizes: &[u64]) -> BoundValue {
    let s: Vec<f64> = sizes.iter().map(|&x| x as f64).collect();
    let terms = valid_exponent_tuples(sizes.len())
        .into_iter()
        .map(|t| {
            let v = t.evaluate(&s);
            (t.to_string(), v)
        })
        .collect();
    BoundValue::from_terms(terms)
}

/// Points/lines in the plane: `m^{2/3} n^{2/3} + m + n`.
pub fn st_bound(m: u64, n: u64) -> BoundValue {
    let (m, n) = (m as f64, n as f64);
    BoundValue::from_terms(vec![("m^2/3*n^2/3".into(), (m * n).powf(2.0 / 3.0)), ("m".into(), m), ("n".into(), n)])
}

/// Points/lines in space with at most `b` lines per plane:
/// `m^{1/2} n^{3/4} + m^{2/3} n^{1/3} B^{1/3} + m + n`.
pub fn gk_bound(m: u64, n: u64, b: u64) -> BoundValue {
    let (m, n, b) = (m as f64, n as f64, b as f64);
    BoundValue::from_terms(vec![
        ("m^1/2*n^3/4".into(), m.sqrt() * n.powf(0.75)),
        ("m^2/3*n^1/3*B^1/3".into(), m.powf(2.0 / 3.0) * n.powf(1.0 / 3.0) * b.powf(1.0 / 3.0)),
        ("m".into(), m),
        ("n".into(), n),
    ])
}

/// `m^{1/2} n^{3/4} + m + n`.
pub fn pl34_bound(m: u64, n: u64) -> BoundValue {
    let (m, n) = (m as f64, n as f64);
    BoundValue::from_terms(vec![("m^1/2*n^3/4".into(), m.sqrt() * n.powf(0.75)), ("m".into(), m), ("n".into(), n)])
}

fn log_b(b: u64) -> f64 {
    (b.max(2) as f64).ln()
}

/// Point-line-plane flags with at most `b` points on and `b` planes through
/// each line: the smaller of `b²|L|` and
/// `(|P|+|S|)|L|^{1/2} + (|P||S|^{1/2} + |S||P|^{1/2}) log b + (|P|+|S|) b`.
///
/// `log b` is taken as `ln max(b, 2)`.
pub fn flags3d_restricted_bound(p: u64, l: u64, s: u64, b: u64) -> BoundValue {
    let (pf, lf, sf, bf) = (p as f64, l as f64, s as f64, b as f64);
    let first = bf * bf * lf;
    let second = BoundValue::from_terms(vec![
        ("(P+S)*L^1/2".into(), (pf + sf) * lf.sqrt()),
        ("(P*S^1/2+S*P^1/2)*log b".into(), (pf * sf.sqrt() + sf * pf.sqrt()) * log_b(b)),
        ("(P+S)*b".into(), (pf + sf) * bf),
    ]);
    restricted_min(first, second)
}

/// The same bound when `|P|, |L|, |S| ≤ N`: `min{b² N, N^{3/2} log b + b N}`.
pub fn flags3d_restricted_bound_uniform(n: u64, b: u64) -> BoundValue {
    let (nf, bf) = (n as f64, b as f64);
    let first = bf * bf * nf;
    let second = BoundValue::from_terms(vec![("N^3/2*log b".into(), nf.powf(1.5) * log_b(b)), ("b*N".into(), bf * nf)]);
    restricted_min(first, second)
}

fn restricted_min(first: f64, second: BoundValue) -> BoundValue {
    if first <= second.value {
        BoundValue { value: first, dominant_term: "b^2*L".into(), dominant_value: first }
    } else {
        second
    }
}

/// Splits a strictly increasing index sequence into maximal runs of consecutive indices.
pub fn maximal_runs(sigma: &[usize]) -> Vec<std::ops::Range<usize>> {
    let mut runs = Vec::new();
    let mut start = 0;
    for i in 1..=sigma.len() {
        if i == sigma.len() || sigma[i] != sigma[i - 1] + 1 {
            if start < i {
                runs.push(start..i);
            }
            start = i;
        }
    }
    runs
}

/// Product of [`flags_bound`] over the maximal consecutive runs of `sigma`.
pub fn partial_flags_bound(sigma: &[usize], sizes: &[u64]) -> Result<BoundValue> {
    if sigma.len() != sizes.len() || sigma.is_empty() {
        return Err(Error::InvalidParameters("sigma and sizes must be nonempty and equally long".into()));
    }
    if sigma.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameters("sigma must be strictly increasing".into()));
    }
    let parts: Vec<BoundValue> = maximal_runs(sigma).into_iter().map(|r| flags_bound(&sizes[r])).collect();
    Ok(BoundValue {
        value: parts.iter().map(|b| b.value).product(),
        dominant_term: parts.iter().map(|b| b.dominant_term.clone()).collect::<Vec<_>>().join("*"),
        dominant_value: parts.iter().map(|b| b.dominant_value).product(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Exponent::*;

    fn t(v: &[Exponent]) -> ExponentTuple {
        ExponentTuple(v.to_vec())
    }

    fn sorted(mut v: Vec<ExponentTuple>) -> Vec<ExponentTuple> {
        v.sort();
        v
    }

    #[test]
    fn small_dimensions() {
        assert_eq!(valid_exponent_tuples(1), vec![t(&[One])]);
        assert_eq!(
            valid_exponent_tuples(2),
            sorted(vec![t(&[TwoThirds, TwoThirds]), t(&[One, Zero]), t(&[Zero, One])])
        );
        assert_eq!(
            valid_exponent_tuples(3),
            sorted(vec![
                t(&[TwoThirds, TwoThirds, Zero]),
                t(&[Zero, TwoThirds, TwoThirds]),
                t(&[One, Zero, One]),
                t(&[Zero, One, Zero]),
            ])
        );
        assert_eq!(
            valid_exponent_tuples(4),
            sorted(vec![
                t(&[TwoThirds, TwoThirds, Zero, One]),
                t(&[One, Zero, TwoThirds, TwoThirds]),
                t(&[One, Zero, One, Zero]),
                t(&[One, Zero, Zero, One]),
                t(&[Zero, One, Zero, One]),
                t(&[Zero, TwoThirds, TwoThirds, Zero]),
            ])
        );
    }

    #[test]
    fn conditions_individually() {
        assert!(!t(&[One, One, Zero]).ones_isolated());
        assert!(!t(&[TwoThirds, TwoThirds, TwoThirds]).no_three_nonzero_run());
        assert!(!t(&[TwoThirds, Zero, One]).two_thirds_paired());
        assert!(!t(&[One, Zero, Zero]).zeros_supported());
        assert!(!t(&[Zero]).is_valid());
    }

    #[test]
    fn grammar_matches_filter() {
        for d in 1..=12 {
            assert_eq!(valid_exponent_tuples(d), valid_exponent_tuples_bruteforce(d), "d = {d}");
        }
    }

    #[test]
    fn closed_under_reversal() {
        for d in 1..=10 {
            let all = valid_exponent_tuples(d);
            for tuple in &all {
                let mut r = tuple.0.clone();
                r.reverse();
                assert!(all.contains(&ExponentTuple(r)));
            }
        }
    }

    #[test]
    fn tuple_text_roundtrip() {
        let x: ExponentTuple = "(2/3,2/3,0,1)".parse().unwrap();
        assert_eq!(x, t(&[TwoThirds, TwoThirds, Zero, One]));
        assert_eq!(x.to_string(), "(2/3,2/3,0,1)");
        assert!("(1,5)".parse::<ExponentTuple>().is_err());
    }

    #[test]
    fn flags_bound_examples() {
        assert_eq!(flags_bound(&[7]).value, 7.0);
        let b = flags_bound(&[8, 8]);
        assert!((b.value - 32.0).abs() < 1e-9);
        assert_eq!(flags_bound(&[1, 1, 1]).value, 4.0);
        // d = 2 coincides with the planar bound
        for (m, n) in [(3, 10), (100, 7), (64, 512)] {
            assert!((flags_bound(&[m, n]).value - st_bound(m, n).value).abs() < 1e-9);
        }
        // d = 3: |P|^{2/3}|L|^{2/3} + |L|^{2/3}|S|^{2/3} + |P||S| + |L|
        let (p, l, s) = (27.0f64, 8.0f64, 64.0f64);
        let expected = (p * l).powf(2.0 / 3.0) + (l * s).powf(2.0 / 3.0) + p * s + l;
        assert!((flags_bound(&[27, 8, 64]).value - expected).abs() < 1e-9);
    }

    #[test]
    fn named_bounds() {
        let n = 50u64;
        let st = st_bound(n * n, n);
        assert_eq!(st.dominant_term, "m^2/3*n^2/3");
        assert!((st.dominant_value - (n * n) as f64).abs() < 1e-6);
        let gk0 = gk_bound(300, 40, 0);
        assert!((gk0.value - pl34_bound(300, 40).value).abs() < 1e-9);
        assert!((pl34_bound(16, 16).value - 64.0).abs() < 1e-9);
    }

    #[test]
    fn restricted_examples() {
        let n = 1_000_000u64;
        assert_eq!(flags3d_restricted_bound(n, n, n, 1).value, n as f64);
        assert_eq!(flags3d_restricted_bound_uniform(n, 1).value, n as f64);
        let u = flags3d_restricted_bound_uniform(10_000, 10);
        let second = 1e6 * 10f64.ln() + 1e5;
        assert_eq!(u.value, 1e6f64.min(second));
        assert_eq!(u.dominant_term, "b^2*L");
        let big_b = flags3d_restricted_bound_uniform(4096, 16);
        assert!(big_b.value < 16.0 * 16.0 * 4096.0);
        assert_ne!(big_b.dominant_term, "b^2*L");
    }

    #[test]
    fn partial_flag_runs() {
        assert_eq!(maximal_runs(&[0, 1, 3, 4, 5, 7, 8]), vec![0..2, 2..5, 5..7]);
        let (m, n) = (20u64, 30u64);
        let single = partial_flags_bound(&[0, 1], &[m, n]).unwrap();
        assert!((single.value - st_bound(m, n).value).abs() < 1e-9);
        assert_eq!(partial_flags_bound(&[0, 2], &[m, n]).unwrap().value, (m * n) as f64);
        let sizes = [2, 3, 4, 5, 6, 7, 8];
        let full = partial_flags_bound(&[0, 1, 3, 4, 5, 7, 8], &sizes).unwrap();
        let expected =
            flags_bound(&sizes[0..2]).value * flags_bound(&sizes[2..5]).value * flags_bound(&sizes[5..7]).value;
        assert!((full.value - expected).abs() < 1e-6 * expected);
        assert!(partial_flags_bound(&[2, 1], &[1, 1]).is_err());
    }

    proptest::proptest! {
        #[test]
        fn flags_bound_monotone(sizes in proptest::collection::vec(1u64..500, 1..6), slot in 0usize..6, bump in 1u64..100) {
            let slot = slot % sizes.len();
            let mut bigger = sizes.clone();
            bigger[slot] += bump;
            let (a, b) = (flags_bound(&sizes), flags_bound(&bigger));
            proptest::prop_assert!(b.value >= a.value);
            proptest::prop_assert!(a.value >= a.dominant_value);
            let terms = valid_exponent_tuples(sizes.len()).len() as f64;
            proptest::prop_assert!(a.value <= terms * a.dominant_value * (1.0 + 1e-12));
        }
    }
}
