//! Arithmetic in GF(q) for q prime or q = 2^k.
//!
//! Elements are canonical integers in `[0, q)`. For prime fields this is the
//! residue; for characteristic 2 the bits are polynomial coefficients reduced
//! modulo the lexicographically smallest irreducible polynomial of degree k.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest supported extension degree over GF(2).
pub const MAX_BINARY_DEGREE: u32 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize)]
pub struct FieldElement(u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    #[inline]
    pub fn value(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FieldSpec {
    q: u32,
    characteristic: u32,
    degree: u32,
    /// Bit-encoded modulus including the leading x^k term; present iff p = 2 and k > 1.
    modulus: Option<u32>,
}

impl FieldSpec {
    /// Validates `q` and, for 2^k with k > 1, selects the canonical modulus.
    pub fn new(q: u64) -> Result<Self> {
        if q < 2 || q > u64::from(u32::MAX) {
            return Err(Error::UnsupportedOrder(q));
        }
        if q.is_power_of_two() {
            let k = q.trailing_zeros();
            if k > MAX_BINARY_DEGREE {
                return Err(Error::UnsupportedOrder(q));
            }
            let modulus = (k > 1).then(|| smallest_irreducible(k));
            return Ok(FieldSpec {
                q: q as u32,
                characteristic: 2,
                degree: k,
                modulus,
            });
        }
        if is_prime(q) {
            return Ok(FieldSpec {
                q: q as u32,
                characteristic: q as u32,
                degree: 1,
                modulus: None,
            });
        }
        Err(Error::UnsupportedOrder(q))
    }

    #[inline]
    pub fn order(&self) -> u32 {
        self.q
    }

    #[inline]
    pub fn characteristic(&self) -> u32 {
        self.characteristic
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.degree
    }

    #[inline]
    pub fn modulus(&self) -> Option<u32> {
        self.modulus
    }

    #[inline]
    fn is_binary(&self) -> bool {
        self.characteristic == 2
    }

    /// Returns the element with canonical value `v`, or `None` if `v >= q`.
    pub fn element(&self, v: u32) -> Option<FieldElement> {
        (v < self.q).then_some(FieldElement(v))
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.q).map(FieldElement)
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if self.is_binary() {
            FieldElement(a.0 ^ b.0)
        } else {
            FieldElement(((u64::from(a.0) + u64::from(b.0)) % u64::from(self.q)) as u32)
        }
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        if self.is_binary() || a.0 == 0 {
            a
        } else {
            FieldElement(self.q - a.0)
        }
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if !self.is_binary() {
            return FieldElement(((u64::from(a.0) * u64::from(b.0)) % u64::from(self.q)) as u32);
        }
        let Some(modulus) = self.modulus else {
            // GF(2)
            return FieldElement(a.0 & b.0);
        };
        let k = self.degree;
        let mut prod = clmul(a.0, b.0);
        for bit in (k..2 * k - 1).rev() {
            if prod >> bit & 1 == 1 {
                prod ^= u64::from(modulus) << (bit - k);
            }
        }
        FieldElement(prod as u32)
    }

    pub fn pow(&self, a: FieldElement, mut e: u64) -> FieldElement {
        let mut base = a;
        let mut acc = FieldElement::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Extended Euclid for prime fields, a^(q-2) in characteristic 2.
    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        if a.is_zero() {
            return Err(Error::DivisionByZero(self.q));
        }
        if self.is_binary() {
            return Ok(self.pow(a, u64::from(self.q) - 2));
        }
        let p = i64::from(self.q);
        let (mut r0, mut r1) = (p, i64::from(a.0));
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let quot = r0 / r1;
            (r0, r1) = (r1, r0 - quot * r1);
            (t0, t1) = (t1, t0 - quot * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(FieldElement(t0.rem_euclid(p) as u32))
    }
}

fn clmul(a: u32, b: u32) -> u64 {
    let (a, mut b) = (u64::from(a), b);
    let mut acc = 0u64;
    let mut shift = 0;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a << shift;
        }
        b >>= 1;
        shift += 1;
    }
    acc
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Remainder of GF(2)[x] polynomial division, both operands bit-encoded.
pub(crate) fn gf2_poly_rem(mut a: u64, b: u64) -> u64 {
    debug_assert!(b != 0);
    let db = 63 - b.leading_zeros();
    while a != 0 && 63 - a.leading_zeros() >= db {
        let da = 63 - a.leading_zeros();
        a ^= b << (da - db);
    }
    a
}

/// Trial division by every polynomial of degree 1..=deg/2.
pub fn is_irreducible_gf2(poly: u64) -> bool {
    if poly < 2 {
        return false;
    }
    let deg = 63 - poly.leading_zeros();
    for d in 1..=deg / 2 {
        for divisor in (1u64 << d)..(1u64 << (d + 1)) {
            if gf2_poly_rem(poly, divisor) == 0 {
                return false;
            }
        }
    }
    true
}

fn smallest_irreducible(k: u32) -> u32 {
    ((1u64 << k)..(1u64 << (k + 1)))
        .find(|&p| is_irreducible_gf2(p))
        .expect("an irreducible polynomial exists in every degree") as u32
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SMALL: [u64; 9] = [2, 3, 4, 5, 7, 8, 11, 13, 16];

    #[test]
    fn rejects_non_prime_powers() {
        for q in [0, 1, 6, 9, 12, 25, 27, 1 << 17] {
            assert!(matches!(FieldSpec::new(q), Err(Error::UnsupportedOrder(_))), "q = {q}");
        }
    }

    #[test]
    fn prime_field_shape() {
        let f = FieldSpec::new(7).unwrap();
        assert_eq!((f.order(), f.characteristic(), f.degree(), f.modulus()), (7, 7, 1, None));
        let three = f.element(3).unwrap();
        let five = f.element(5).unwrap();
        assert_eq!(f.add(three, five).value(), 1);
    }

    #[test]
    fn gf8_modulus_is_x3_x_1() {
        // Oracle: a cubic over GF(2) is irreducible iff it has no root in {0, 1}.
        let eval = |p: u32, x: u32| (0..=3).filter(|i| p >> i & 1 == 1).map(|i| x.pow(i)).sum::<u32>() % 2;
        let cubics: Vec<u32> = (8..16).filter(|&p| eval(p, 0) != 0 && eval(p, 1) != 0).collect();
        assert_eq!(cubics, vec![0b1011, 0b1101]);
        let f = FieldSpec::new(8).unwrap();
        assert_eq!(f.modulus(), Some(0b1011));
        // x * x^2 = x^3 = x + 1
        let x = f.element(2).unwrap();
        let x2 = f.element(4).unwrap();
        assert_eq!(f.mul(x, x2).value(), 3);
    }

    #[test]
    fn binary_moduli_are_irreducible() {
        for k in 2..=MAX_BINARY_DEGREE {
            let f = FieldSpec::new(1 << k).unwrap();
            let m = u64::from(f.modulus().unwrap());
            assert_eq!(63 - m.leading_zeros(), k);
            assert!(is_irreducible_gf2(m));
            // Nothing smaller of the same degree is irreducible.
            assert!(((1u64 << k)..m).all(|p| !is_irreducible_gf2(p)));
        }
        assert_eq!(FieldSpec::new(2).unwrap().modulus(), None);
    }

    #[test]
    fn inverse_of_zero_fails() {
        for q in [5, 16] {
            let f = FieldSpec::new(q).unwrap();
            assert!(matches!(f.inv(FieldElement::ZERO), Err(Error::DivisionByZero(_))));
        }
    }

    #[test]
    fn small_fields_satisfy_axioms_exhaustively() {
        for q in SMALL {
            let f = FieldSpec::new(q).unwrap();
            let els: Vec<_> = f.elements().collect();
            for &a in &els {
                assert_eq!(f.add(a, f.neg(a)), FieldElement::ZERO);
                assert_eq!(f.mul(a, FieldElement::ONE), a);
                if !a.is_zero() {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElement::ONE, "q={q} a={a}");
                    assert_eq!(f.pow(a, u64::from(f.order()) - 1), FieldElement::ONE);
                }
                for &b in &els {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    if f.characteristic() == 2 {
                        let s = f.add(a, b);
                        assert_eq!(f.mul(s, s), f.add(f.mul(a, a), f.mul(b, b)));
                    }
                    for &c in &els {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    fn large_field() -> impl Strategy<Value = FieldSpec> {
        prop::sample::select(vec![32u64, 64, 256, 1024, 1 << 16, 17, 257, 65521])
            .prop_map(|q| FieldSpec::new(q).unwrap())
    }

    fn field_with_triple() -> impl Strategy<Value = (FieldSpec, u32, u32, u32)> {
        large_field().prop_flat_map(|f| {
            let q = f.order();
            (Just(f), 0..q, 0..q, 0..q)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn large_fields_satisfy_axioms((f, a, b, c) in field_with_triple()) {
            let (a, b, c) = (FieldElement(a), FieldElement(b), FieldElement(c));
            prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
            prop_assert_eq!(f.mul(a, b), f.mul(b, a));
            if !a.is_zero() {
                prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElement::ONE);
            }
            if f.characteristic() == 2 {
                let s = f.add(a, b);
                prop_assert_eq!(f.mul(s, s), f.add(f.mul(a, a), f.mul(b, b)));
            }
        }
    }
}
