//! Parameter regime of the L² convergence result: admissible `s0`, the open
//! interval for `b0`, and the dimension-dependent `s0` cases with their Hölder
//! exponents used in the local error analysis.

use std::fmt;

use num_rational::Rational64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::grid::MAX_DIM;

/// Largest `s0` covered by the result.
pub const S0_MAX: f64 = 2.0;

/// A Lebesgue exponent: an exact rational or `∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exponent {
    Finite(Rational64),
    Infinite,
}

impl Exponent {
    const fn frac(num: i64, den: i64) -> Self {
        Exponent::Finite(Rational64::new_raw(num, den))
    }

    /// `1/p`, zero for `p = ∞`.
    pub fn reciprocal(&self) -> Rational64 {
        match self {
            Exponent::Finite(r) => r.recip(),
            Exponent::Infinite => Rational64::from_integer(0),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(r) => write!(f, "{r}"),
            Exponent::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn ser_ratio<S: Serializer>(r: &Rational64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(r)
}

/// Half-open interval `(lo, hi]` of `s0` values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CaseInterval {
    #[serde(serialize_with = "ser_ratio")]
    pub lo: Rational64,
    #[serde(serialize_with = "ser_ratio")]
    pub hi: Rational64,
}

impl CaseInterval {
    const fn new(lo: (i64, i64), hi: (i64, i64)) -> Self {
        CaseInterval {
            lo: Rational64::new_raw(lo.0, lo.1),
            hi: Rational64::new_raw(hi.0, hi.1),
        }
    }

    pub fn contains(&self, s0: f64) -> bool {
        ratio_to_f64(self.lo) < s0 && s0 <= ratio_to_f64(self.hi)
    }
}

impl fmt::Display for CaseInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}]", self.lo, self.hi)
    }
}

fn ratio_to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Exponent pair `(p, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExponentPair {
    pub p: Exponent,
    pub q: Exponent,
}

/// One column of the dimension table: three `s0` cases, the pair used with
/// `4/p + 1/q = 1/2` and the pair used in the crude bound with
/// `2/p + 3/q = 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DimensionRow {
    pub dim: usize,
    pub cases: [CaseInterval; 3],
    pub holder: ExponentPair,
    pub crude: ExponentPair,
}

const fn row(
    dim: usize,
    cases: [CaseInterval; 3],
    holder: (Exponent, Exponent),
    crude: (Exponent, Exponent),
) -> DimensionRow {
    DimensionRow {
        dim,
        cases,
        holder: ExponentPair {
            p: holder.0,
            q: holder.1,
        },
        crude: ExponentPair {
            p: crude.0,
            q: crude.1,
        },
    }
}

const TABLE: [DimensionRow; MAX_DIM] = [
    row(
        1,
        [
            CaseInterval::new((0, 1), (1, 5)),
            CaseInterval::new((1, 5), (4, 3)),
            CaseInterval::new((4, 3), (2, 1)),
        ],
        (Exponent::frac(20, 1), Exponent::frac(10, 3)),
        (Exponent::Infinite, Exponent::frac(6, 1)),
    ),
    row(
        2,
        [
            CaseInterval::new((0, 1), (2, 5)),
            CaseInterval::new((2, 5), (4, 3)),
            CaseInterval::new((4, 3), (2, 1)),
        ],
        (Exponent::frac(20, 1), Exponent::frac(10, 3)),
        (Exponent::Infinite, Exponent::frac(6, 1)),
    ),
    row(
        3,
        [
            CaseInterval::new((1, 2), (4, 5)),
            CaseInterval::new((4, 5), (3, 2)),
            CaseInterval::new((3, 2), (2, 1)),
        ],
        (Exponent::frac(15, 1), Exponent::frac(30, 7)),
        (Exponent::Infinite, Exponent::frac(6, 1)),
    ),
    row(
        4,
        [
            CaseInterval::new((1, 1), (6, 5)),
            CaseInterval::new((6, 5), (5, 3)),
            CaseInterval::new((5, 3), (2, 1)),
        ],
        (Exponent::frac(40, 3), Exponent::frac(5, 1)),
        (Exponent::frac(40, 1), Exponent::frac(20, 3)),
    ),
    row(
        5,
        [
            CaseInterval::new((3, 2), (8, 5)),
            CaseInterval::new((8, 5), (11, 6)),
            CaseInterval::new((11, 6), (2, 1)),
        ],
        (Exponent::frac(25, 2), Exponent::frac(50, 9)),
        (Exponent::frac(25, 1), Exponent::frac(50, 7)),
    ),
];

pub fn dimension_row(dim: usize) -> Result<&'static DimensionRow> {
    TABLE
        .get(dim.wrapping_sub(1))
        .ok_or_else(|| Error::config(format!("dimension must be in 1..={MAX_DIM}, got {dim}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeQuery {
    pub dim: usize,
    pub s0: f64,
    pub b0: Option<f64>,
}

/// Open interval `(lo, hi)`; empty when `hi <= lo`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OpenInterval {
    pub lo: f64,
    pub hi: f64,
}

impl OpenInterval {
    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct S0Condition {
    /// `max(0, d/2 - 1)`, excluded.
    pub lower: f64,
    /// `2`, included.
    pub upper: f64,
    pub above_lower: bool,
    pub within_upper: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport {
    pub dim: usize,
    pub s0: f64,
    pub admissible: bool,
    pub s0_condition: S0Condition,
    pub b0_interval: OpenInterval,
    pub b0: Option<f64>,
    pub b0_admissible: Option<bool>,
    pub b1: Option<f64>,
    /// 1-based index of the `s0` case, if `s0` falls in one.
    pub case: Option<usize>,
    pub table_row: DimensionRow,
}

impl RegimeReport {
    pub fn case_interval(&self) -> Option<CaseInterval> {
        self.case.map(|c| self.table_row.cases[c - 1])
    }
}

/// Evaluates the regime conditions for `(d, s0[, b0])`.
pub fn regime_check(q: &RegimeQuery) -> Result<RegimeReport> {
    let table_row = *dimension_row(q.dim)?;
    if !q.s0.is_finite() {
        return Err(Error::config(format!("s0 must be finite, got {}", q.s0)));
    }
    let half_d = q.dim as f64 / 2.0;
    let lower = f64::max(0.0, half_d - 1.0);
    let s0_condition = S0Condition {
        lower,
        upper: S0_MAX,
        above_lower: q.s0 > lower,
        within_upper: q.s0 <= S0_MAX,
    };
    let hi = f64::min(0.5 + 0.25 * (q.s0 - half_d + 1.0), 0.75).max(0.5);
    let b0_interval = OpenInterval { lo: 0.5, hi };
    let case = table_row
        .cases
        .iter()
        .position(|c| c.contains(q.s0))
        .map(|i| i + 1);
    Ok(RegimeReport {
        dim: q.dim,
        s0: q.s0,
        admissible: s0_condition.above_lower && s0_condition.within_upper,
        s0_condition,
        b0_interval,
        b0: q.b0,
        b0_admissible: q.b0.map(|b| b0_interval.contains(b)),
        b1: q.b0.map(|b| 1.0 - b),
        case,
        table_row,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn check(dim: usize, s0: f64) -> RegimeReport {
        regime_check(&RegimeQuery { dim, s0, b0: None }).unwrap()
    }

    #[test]
    fn three_dimensional_unit_regularity() {
        let r = check(3, 1.0);
        assert!(r.admissible);
        assert_eq!(r.b0_interval, OpenInterval { lo: 0.5, hi: 0.625 });
    }

    #[test]
    fn five_dimensional_needs_more_regularity() {
        let r = check(5, 1.4);
        assert!(!r.admissible);
        assert!(!r.s0_condition.above_lower);
        assert_eq!(r.s0_condition.lower, 1.5);
        assert!(r.b0_interval.is_empty());
    }

    #[test]
    fn three_dimensional_first_case() {
        let r = check(3, 0.7);
        assert_eq!(r.case, Some(1));
        assert_eq!(r.case_interval().unwrap().to_string(), "(1/2, 4/5]");
        assert_eq!(r.table_row.holder.p.to_string(), "15");
        assert_eq!(r.table_row.holder.q.to_string(), "30/7");
        assert_eq!(r.table_row.crude.p.to_string(), "inf");
    }

    #[test]
    fn b0_and_b1() {
        let r = regime_check(&RegimeQuery { dim: 2, s0: 1.0, b0: Some(0.6) }).unwrap();
        assert_eq!(r.b0_admissible, Some(true));
        assert!((r.b1.unwrap() - 0.4).abs() < 1e-15);
        let r = regime_check(&RegimeQuery { dim: 3, s0: 1.0, b0: Some(0.625) }).unwrap();
        assert_eq!(r.b0_admissible, Some(false));
    }

    #[test]
    fn bad_dimension_and_upper_bound() {
        assert!(regime_check(&RegimeQuery { dim: 0, s0: 1.0, b0: None }).is_err());
        assert!(regime_check(&RegimeQuery { dim: 6, s0: 1.0, b0: None }).is_err());
        let r = check(1, 2.5);
        assert!(!r.admissible && r.case.is_none());
        assert!(check(1, 2.0).admissible);
        assert!(!check(1, 0.0).admissible);
    }

    #[test]
    fn table_pairs_satisfy_holder_relations() {
        let half = Rational64::new(1, 2);
        for d in 1..=MAX_DIM {
            let row = dimension_row(d).unwrap();
            let h = &row.holder;
            assert_eq!(h.p.reciprocal() * 4 + h.q.reciprocal(), half, "d={d}");
            let c = &row.crude;
            assert_eq!(c.p.reciprocal() * 2 + c.q.reciprocal() * 3, half, "d={d}");
            assert_eq!(row.cases[0].hi, row.cases[1].lo);
            assert_eq!(row.cases[1].hi, row.cases[2].lo);
            assert_eq!(row.cases[2].hi, Rational64::from_integer(2));
        }
    }

    proptest! {
        #[test]
        fn interval_inside_half_three_quarters(dim in 1usize..=5, s0 in -1.0f64..3.0) {
            let r = check(dim, s0);
            let iv = r.b0_interval;
            prop_assert!(iv.lo == 0.5 && iv.hi <= 0.75 && iv.hi >= 0.5);
            let threshold = dim as f64 / 2.0 - 1.0;
            prop_assert_eq!(iv.is_empty(), s0 <= threshold);
        }
    }
}
