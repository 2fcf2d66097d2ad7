//! Quadratic fields `Q(sqrt D)`, their rings of integers in a fixed integral
//! basis, and the coordinate map `alpha = k1 + k2 w  ->  (k1, k2)`.
//!
//! Two bases are supported: `{1, sqrt D}` and, for `D = 1 (mod 4)`,
//! `{1, (1 + sqrt D)/2}`. All element arithmetic is exact; coordinates live in
//! `i64` and every product is formed in `i128` and checked on the way back.

use std::fmt;
use std::str::FromStr;

use crate::arith;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BasisKind {
    /// `{1, sqrt D}`.
    SqrtD,
    /// `{1, (1 + sqrt D)/2}`, only for `D = 1 (mod 4)`.
    HalfBasis,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    d: i64,
    basis: BasisKind,
}

impl FieldSpec {
    /// Degree over `Q`. Fixed at 2.
    pub const DEGREE: usize = 2;

    /// Validates `D` and the basis. `SqrtD` is refused for `D = 1 (mod 4)`
    /// since `Z[sqrt D]` is then not the full ring of integers.
    pub fn new(d: i64, basis: BasisKind) -> Result<Self> {
        if d == 0 || d == 1 {
            return Err(Error::InvalidField(format!("D = {d} does not give a quadratic field")));
        }
        if d.unsigned_abs() > 1 << 40 {
            return Err(Error::InvalidField(format!("|D| = {} is too large", d.unsigned_abs())));
        }
        if !arith::is_squarefree(d) {
            return Err(Error::InvalidField(format!("D = {d} is not squarefree")));
        }
        let one_mod_four = d.rem_euclid(4) == 1;
        match basis {
            BasisKind::HalfBasis if !one_mod_four => Err(Error::InvalidField(format!(
                "half basis needs D = 1 mod 4, got D = {d}"
            ))),
            BasisKind::SqrtD if one_mod_four => Err(Error::InvalidField(format!(
                "D = {d} = 1 mod 4: {{1, sqrt D}} is not an integral basis, use half"
            ))),
            _ => Ok(FieldSpec { d, basis }),
        }
    }

    /// The field `Q(sqrt D)` with the integral basis of its maximal order.
    pub fn quadratic(d: i64) -> Result<Self> {
        let basis = if d.rem_euclid(4) == 1 {
            BasisKind::HalfBasis
        } else {
            BasisKind::SqrtD
        };
        Self::new(d, basis)
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    pub fn basis(&self) -> BasisKind {
        self.basis
    }

    pub fn degree(&self) -> usize {
        Self::DEGREE
    }

    pub fn is_real(&self) -> bool {
        self.d > 0
    }

    pub fn discriminant(&self) -> i64 {
        match self.basis {
            BasisKind::SqrtD => 4 * self.d,
            BasisKind::HalfBasis => self.d,
        }
    }

    /// Minimal polynomial `x^2 - t x - n` of the second basis element, as `(t, n)`.
    pub fn min_poly(&self) -> (i64, i64) {
        match self.basis {
            BasisKind::SqrtD => (0, self.d),
            BasisKind::HalfBasis => (1, (self.d - 1) / 4),
        }
    }

    /// Constant `K` with `|N(alpha)| <= K * sup_norm(alpha)^2` for every element.
    pub fn norm_form_bound(&self) -> f64 {
        let d = self.d as f64;
        match self.basis {
            BasisKind::SqrtD => 1.0 + d.abs(),
            BasisKind::HalfBasis => 2.0 + ((1.0 - d) / 4.0).abs(),
        }
    }

    /// Norm of `k1 + k2 w` straight from coordinates.
    #[inline]
    pub fn norm_of(&self, k1: i64, k2: i64) -> i128 {
        let (a, b, d) = (k1 as i128, k2 as i128, self.d as i128);
        match self.basis {
            BasisKind::SqrtD => a * a - d * b * b,
            BasisKind::HalfBasis => a * a + a * b + b * b * ((1 - d) / 4),
        }
    }

    pub fn element(&self, k1: i64, k2: i64) -> QuadInt {
        QuadInt { field: *self, k1, k2 }
    }

    pub fn zero(&self) -> QuadInt {
        self.element(0, 0)
    }

    pub fn one(&self) -> QuadInt {
        self.element(1, 0)
    }

    /// Canonical spec string, `D=<int>` or `D=<int>,half`.
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.basis {
            BasisKind::SqrtD => write!(f, "D={}", self.d),
            BasisKind::HalfBasis => write!(f, "D={},half", self.d),
        }
    }
}

impl FromStr for FieldSpec {
    type Err = Error;

    /// Parses `D=<int>[,half]`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut parts = s.split(',').map(str::trim);
        let head = parts.next().unwrap_or_default();
        let value = head
            .strip_prefix("D=")
            .ok_or_else(|| Error::InvalidField(format!("expected D=<int>[,half], got {s:?}")))?;
        let d: i64 = value
            .trim()
            .parse()
            .map_err(|_| Error::InvalidField(format!("bad D value {value:?}")))?;
        let basis = match parts.next() {
            None => BasisKind::SqrtD,
            Some("half") => BasisKind::HalfBasis,
            Some(other) => {
                return Err(Error::InvalidField(format!("unknown basis modifier {other:?}")))
            }
        };
        if parts.next().is_some() {
            return Err(Error::InvalidField(format!("trailing input in {s:?}")));
        }
        FieldSpec::new(d, basis)
    }
}

/// An algebraic integer `k1 + k2 w` in the field's integral basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QuadInt {
    field: FieldSpec,
    pub k1: i64,
    pub k2: i64,
}

fn narrow(v: i128, what: &'static str) -> Result<i64> {
    i64::try_from(v).map_err(|_| Error::Overflow(what))
}

impl QuadInt {
    pub fn field(&self) -> FieldSpec {
        self.field
    }

    /// The coordinate vector `m(alpha)`.
    pub fn coords(&self) -> (i64, i64) {
        (self.k1, self.k2)
    }

    pub fn is_zero(&self) -> bool {
        self.k1 == 0 && self.k2 == 0
    }

    fn same_field(&self, other: &QuadInt) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field.label(), other.field.label()));
        }
        Ok(())
    }

    pub fn norm(&self) -> Result<i128> {
        // |k| < 2^63 and |D| < 2^41 keep every partial product below 2^127
        // except in the last term; check that one.
        let (a, b) = (self.k1 as i128, self.k2 as i128);
        let (t, n) = self.field.min_poly();
        let bb = b.checked_mul(b).ok_or(Error::Overflow("norm"))?;
        let tail = bb.checked_mul(n as i128).ok_or(Error::Overflow("norm"))?;
        // N(a + b w) = a^2 + t a b - n b^2
        let ab = a.checked_mul(b).ok_or(Error::Overflow("norm"))?;
        a.checked_mul(a)
            .and_then(|aa| aa.checked_add(ab * t as i128))
            .and_then(|s| s.checked_sub(tail))
            .ok_or(Error::Overflow("norm"))
    }

    pub fn sup_norm(&self) -> u64 {
        self.k1.unsigned_abs().max(self.k2.unsigned_abs())
    }

    pub fn add(&self, other: &QuadInt) -> Result<QuadInt> {
        self.same_field(other)?;
        Ok(QuadInt {
            field: self.field,
            k1: self.k1.checked_add(other.k1).ok_or(Error::Overflow("add"))?,
            k2: self.k2.checked_add(other.k2).ok_or(Error::Overflow("add"))?,
        })
    }

    pub fn sub(&self, other: &QuadInt) -> Result<QuadInt> {
        self.same_field(other)?;
        Ok(QuadInt {
            field: self.field,
            k1: self.k1.checked_sub(other.k1).ok_or(Error::Overflow("sub"))?,
            k2: self.k2.checked_sub(other.k2).ok_or(Error::Overflow("sub"))?,
        })
    }

    pub fn neg(&self) -> Result<QuadInt> {
        Ok(QuadInt {
            field: self.field,
            k1: self.k1.checked_neg().ok_or(Error::Overflow("neg"))?,
            k2: self.k2.checked_neg().ok_or(Error::Overflow("neg"))?,
        })
    }

    /// Galois conjugate. For the half basis `w -> 1 - w`.
    pub fn conjugate(&self) -> Result<QuadInt> {
        let (k1, k2) = match self.field.basis {
            BasisKind::SqrtD => (Some(self.k1), self.k2.checked_neg()),
            BasisKind::HalfBasis => (self.k1.checked_add(self.k2), self.k2.checked_neg()),
        };
        Ok(QuadInt {
            field: self.field,
            k1: k1.ok_or(Error::Overflow("conjugate"))?,
            k2: k2.ok_or(Error::Overflow("conjugate"))?,
        })
    }

    fn mul_wide(&self, other: &QuadInt) -> Result<(i128, i128)> {
        let (a, b) = (self.k1 as i128, self.k2 as i128);
        let (c, d) = (other.k1 as i128, other.k2 as i128);
        let (t, n) = self.field.min_poly();
        // (a + b w)(c + d w) = ac + (ad + bc) w + bd w^2,  w^2 = t w + n
        let bd = b.checked_mul(d).ok_or(Error::Overflow("mul"))?;
        let ac = a.checked_mul(c).ok_or(Error::Overflow("mul"))?;
        let cross = a
            .checked_mul(d)
            .and_then(|x| b.checked_mul(c).and_then(|y| x.checked_add(y)))
            .ok_or(Error::Overflow("mul"))?;
        let r1 = bd
            .checked_mul(n as i128)
            .and_then(|x| x.checked_add(ac))
            .ok_or(Error::Overflow("mul"))?;
        let r2 = bd
            .checked_mul(t as i128)
            .and_then(|x| x.checked_add(cross))
            .ok_or(Error::Overflow("mul"))?;
        Ok((r1, r2))
    }

    pub fn mul(&self, other: &QuadInt) -> Result<QuadInt> {
        self.same_field(other)?;
        let (r1, r2) = self.mul_wide(other)?;
        Ok(QuadInt {
            field: self.field,
            k1: narrow(r1, "mul")?,
            k2: narrow(r2, "mul")?,
        })
    }

    /// `self / divisor` when the quotient is an algebraic integer.
    pub fn divide_exact(&self, divisor: &QuadInt) -> Result<Option<QuadInt>> {
        self.same_field(divisor)?;
        if divisor.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let n = divisor.norm()?;
        let (r1, r2) = self.mul_wide(&divisor.conjugate()?)?;
        if r1 % n != 0 || r2 % n != 0 {
            return Ok(None);
        }
        Ok(Some(QuadInt {
            field: self.field,
            k1: narrow(r1 / n, "divide_exact")?,
            k2: narrow(r2 / n, "divide_exact")?,
        }))
    }

    pub fn is_unit(&self) -> Result<bool> {
        Ok(self.norm()?.abs() == 1)
    }
}

impl fmt::Display for QuadInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.k1, self.k2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gauss() -> FieldSpec {
        FieldSpec::new(-1, BasisKind::SqrtD).unwrap()
    }

    fn test_fields() -> Vec<FieldSpec> {
        vec![
            FieldSpec::quadratic(-1).unwrap(),
            FieldSpec::quadratic(-3).unwrap(),
            FieldSpec::quadratic(-5).unwrap(),
            FieldSpec::quadratic(2).unwrap(),
            FieldSpec::quadratic(5).unwrap(),
            FieldSpec::quadratic(10).unwrap(),
        ]
    }

    #[test]
    fn norms() {
        let k = gauss();
        assert_eq!(k.element(1, 1).norm().unwrap(), 2);
        assert_eq!(k.one().norm().unwrap(), 1);
        let q5 = FieldSpec::new(5, BasisKind::HalfBasis).unwrap();
        assert_eq!(q5.element(0, 1).norm().unwrap(), -1);
        assert_eq!(q5.one().norm().unwrap(), 1);
    }

    #[test]
    fn sup_norm_values() {
        assert_eq!(gauss().element(3, -7).sup_norm(), 7);
        assert_eq!(gauss().zero().sup_norm(), 0);
    }

    #[test]
    fn half_basis_sup_norm_matches_sqrt_coordinates() {
        // k1 + k2 (1 + sqrt D)/2 = a + b sqrt D with a = k1 + k2/2, b = k2/2,
        // so max(|a - b|, |2b|) must equal max(|k1|, |k2|).
        let k = FieldSpec::new(5, BasisKind::HalfBasis).unwrap();
        for k1 in -50..50i64 {
            for k2 in -50..50i64 {
                let (two_a, two_b) = (2 * k1 + k2, k2);
                let other = ((two_a - two_b).abs() / 2).max(two_b.abs()) as u64;
                assert_eq!(k.element(k1, k2).sup_norm(), other);
            }
        }
    }

    #[test]
    fn products() {
        let k = gauss();
        assert_eq!(k.element(1, 1).mul(&k.element(1, -1)).unwrap(), k.element(2, 0));
        let a = k.element(4, -9);
        assert_eq!(a.mul(&k.one()).unwrap(), a);
        let q2 = FieldSpec::quadratic(2).unwrap();
        assert_eq!(q2.element(1, 1).mul(&q2.element(-1, 1)).unwrap(), q2.one());
    }

    #[test]
    fn exact_division() {
        let k = gauss();
        assert_eq!(
            k.element(2, 0).divide_exact(&k.element(1, 1)).unwrap(),
            Some(k.element(1, -1))
        );
        assert_eq!(k.one().divide_exact(&k.element(2, 0)).unwrap(), None);
        let a = k.element(7, 3);
        assert_eq!(a.divide_exact(&a).unwrap(), Some(k.one()));
        assert!(matches!(a.divide_exact(&k.zero()), Err(Error::DivisionByZero)));
    }

    #[test]
    fn units() {
        assert!(gauss().element(0, 1).is_unit().unwrap());
        assert!(!gauss().element(1, 1).is_unit().unwrap());
        assert!(FieldSpec::quadratic(2).unwrap().element(1, 1).is_unit().unwrap());
    }

    #[test]
    fn overflow_is_reported() {
        let k = gauss();
        let big = k.element(i64::MAX / 2, 3);
        assert!(matches!(big.mul(&big), Err(Error::Overflow(_))));
        assert!(matches!(k.element(i64::MIN, 0).neg(), Err(Error::Overflow(_))));
        // the norm of a large element still fits in i128
        assert!(big.norm().is_ok());
    }

    #[test]
    fn parse_field_strings() {
        assert_eq!("D=-1".parse::<FieldSpec>().unwrap(), gauss());
        let f: FieldSpec = "D=5,half".parse().unwrap();
        assert_eq!(f.basis(), BasisKind::HalfBasis);
        assert_eq!(f.discriminant(), 5);
        assert_eq!(f.to_string(), "D=5,half");
        assert!("D=-1,half".parse::<FieldSpec>().is_err());
        assert!("D=3,half".parse::<FieldSpec>().is_err());
        assert!("D=12".parse::<FieldSpec>().is_err());
        assert!("D=1".parse::<FieldSpec>().is_err());
        assert!("E=2".parse::<FieldSpec>().is_err());
        assert!("D=2,quarter".parse::<FieldSpec>().is_err());
        assert_eq!("D=2".parse::<FieldSpec>().unwrap().discriminant(), 8);
        assert_eq!("D=-3,half".parse::<FieldSpec>().unwrap().discriminant(), -3);
    }

    #[test]
    fn discriminants_are_0_or_1_mod_4() {
        for d in [-1i64, -2, -3, -5, -7, 2, 3, 5, 6, 7, 10, 13, 17] {
            let f = FieldSpec::quadratic(d).unwrap();
            assert!(matches!(f.discriminant().rem_euclid(4), 0 | 1));
        }
    }

    proptest! {
        #[test]
        fn norm_is_multiplicative(fi in 0usize..6, a in -3000i64..3000, b in -3000i64..3000,
                                  c in -3000i64..3000, d in -3000i64..3000) {
            let f = test_fields()[fi];
            let x = f.element(a, b);
            let y = f.element(c, d);
            let xy = x.mul(&y).unwrap();
            prop_assert_eq!(xy.norm().unwrap(), x.norm().unwrap() * y.norm().unwrap());
            prop_assert_eq!(f.norm_of(a, b), x.norm().unwrap());
            prop_assert!((x.norm().unwrap().abs() as f64) <= f.norm_form_bound() * (x.sup_norm() as f64).powi(2));
        }

        #[test]
        fn conjugation_is_an_involution(fi in 0usize..6, a in -10_000i64..10_000, b in -10_000i64..10_000) {
            let f = test_fields()[fi];
            let x = f.element(a, b);
            let c = x.conjugate().unwrap();
            prop_assert_eq!(c.conjugate().unwrap(), x);
            prop_assert_eq!(c.norm().unwrap(), x.norm().unwrap());
        }

        #[test]
        fn division_undoes_multiplication(fi in 0usize..6, a in -1000i64..1000, b in -1000i64..1000,
                                          c in -1000i64..1000, d in -1000i64..1000) {
            let f = test_fields()[fi];
            let x = f.element(a, b);
            prop_assume!(!x.is_zero());
            let y = f.element(c, d);
            let xy = x.mul(&y).unwrap();
            prop_assert_eq!(xy.divide_exact(&x).unwrap(), Some(y));
        }
    }
}
