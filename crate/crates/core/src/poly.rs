//! Exact sparse polynomials in `z` whose coefficients are integer polynomials
//! in the family parameter `a`, plus their numeric specialization.
//!
//! [`APoly`] is an element of `Z[a]`, [`BiPolyZ`] an element of `Z[a][z]` and
//! [`CPoly`] a complex-coefficient polynomial in `z` obtained by fixing `a`.
//! All three keep a canonical sparse form: no stored coefficient is zero.
//!
//! Every ring operation on [`BiPolyZ`] optionally works modulo `a^t`
//! ([`Truncation::BelowADegree`]). Reduction modulo `a^t` is a ring
//! homomorphism, so truncated results agree exactly with truncating the full
//! result afterwards, while staying small when the full expansion would not.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How much of the `a`-adic expansion to keep.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Truncation {
    /// Keep every coefficient.
    #[default]
    Exact,
    /// Work in `Z[a]/(a^t)`: drop all `a`-exponents `>= t`.
    BelowADegree(u64),
}

impl Truncation {
    #[inline]
    fn keeps(self, a_exp: u64) -> bool {
        match self {
            Truncation::Exact => true,
            Truncation::BelowADegree(t) => a_exp < t,
        }
    }
}

/// `z^k` for a 64-bit exponent by repeated squaring.
pub fn cpow(z: Complex64, mut k: u64) -> Complex64 {
    let mut base = z;
    let mut acc = Complex64::new(1.0, 0.0);
    while k > 0 {
        if k & 1 == 1 {
            acc *= base;
        }
        k >>= 1;
        if k > 0 {
            base *= base;
        }
    }
    acc
}

fn bigint_to_f64(c: &BigInt) -> f64 {
    c.to_f64().unwrap_or(if c.is_negative() {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    })
}

/// A polynomial in `a` with big-integer coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct APoly {
    coeffs: BTreeMap<u64, BigInt>,
}

impl APoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(1)
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::monomial(c, 0)
    }

    /// `c * a^exp`.
    pub fn monomial(c: impl Into<BigInt>, exp: u64) -> Self {
        let c = c.into();
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(exp, c);
        }
        Self { coeffs }
    }

    /// Builds from `(a_exponent, coefficient)` pairs, merging repeats and
    /// dropping zeros.
    pub fn from_coeffs<I, C>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (u64, C)>,
        C: Into<BigInt>,
    {
        let mut out = Self::zero();
        for (e, c) in pairs {
            out.add_coeff(e, c.into());
        }
        out
    }

    fn add_coeff(&mut self, exp: u64, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.coeffs.entry(exp) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &BTreeMap<u64, BigInt> {
        &self.coeffs
    }

    pub fn coeff(&self, exp: u64) -> Option<&BigInt> {
        self.coeffs.get(&exp)
    }

    pub fn constant_term(&self) -> BigInt {
        self.coeffs.get(&0).cloned().unwrap_or_default()
    }

    pub fn degree(&self) -> Option<u64> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn add_assign_ref(&mut self, other: &APoly) {
        for (&e, c) in &other.coeffs {
            self.add_coeff(e, c.clone());
        }
    }

    pub fn neg(&self) -> APoly {
        APoly {
            coeffs: self.coeffs.iter().map(|(&e, c)| (e, -c)).collect(),
        }
    }

    pub fn scale(&self, k: &BigInt) -> APoly {
        if k.is_zero() {
            return APoly::zero();
        }
        APoly {
            coeffs: self.coeffs.iter().map(|(&e, c)| (e, c * k)).collect(),
        }
    }

    pub fn mul_trunc(&self, other: &APoly, trunc: Truncation) -> APoly {
        let mut out = APoly::zero();
        for (&e1, c1) in &self.coeffs {
            if !trunc.keeps(e1) {
                break;
            }
            for (&e2, c2) in &other.coeffs {
                // a-exponents stay far below u64::MAX: they are bounded by the
                // z-degree, which is overflow-checked.
                let e = e1 + e2;
                if !trunc.keeps(e) {
                    break;
                }
                out.add_coeff(e, c1 * c2);
            }
        }
        out
    }

    pub fn truncate(&self, trunc: Truncation) -> APoly {
        APoly {
            coeffs: self
                .coeffs
                .iter()
                .filter(|(&e, _)| trunc.keeps(e))
                .map(|(&e, c)| (e, c.clone()))
                .collect(),
        }
    }

    /// Horner evaluation at a complex `a`, highest exponent first.
    pub fn eval(&self, a: Complex64) -> Complex64 {
        let mut iter = self.coeffs.iter().rev();
        let Some((&top, c)) = iter.next() else {
            return Complex64::zero();
        };
        let mut acc = Complex64::new(bigint_to_f64(c), 0.0);
        let mut prev = top;
        for (&e, c) in iter {
            acc = acc * cpow(a, prev - e) + bigint_to_f64(c);
            prev = e;
        }
        acc * cpow(a, prev)
    }
}

impl fmt::Display for APoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (i, (&e, c)) in self.coeffs.iter().enumerate() {
            let (neg, mag) = (c.is_negative(), c.abs());
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let one = mag == BigInt::from(1);
            match e {
                0 => write!(f, "{mag}")?,
                _ if one => write!(f, "a")?,
                _ => write!(f, "{mag}a")?,
            }
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// A sparse polynomial in `z` with coefficients in `Z[a]`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<JsonTerm>", try_from = "Vec<JsonTerm>")]
pub struct BiPolyZ {
    terms: BTreeMap<u64, APoly>,
}

impl BiPolyZ {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, APoly::one())
    }

    /// `z^k` with coefficient 1.
    pub fn z_pow(k: u64) -> Self {
        Self::monomial(k, APoly::one())
    }

    pub fn monomial(z_exp: u64, coeff: APoly) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(z_exp, coeff);
        }
        Self { terms }
    }

    /// Builds from `(z_exponent, coefficient)` pairs, merging repeats and
    /// dropping zero coefficients.
    pub fn from_terms<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (u64, APoly)>,
    {
        let mut out = Self::zero();
        for (e, c) in pairs {
            out.add_term(e, &c);
        }
        out
    }

    fn add_term(&mut self, z_exp: u64, c: &APoly) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(z_exp) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                o.get_mut().add_assign_ref(c);
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> &BTreeMap<u64, APoly> {
        &self.terms
    }

    pub fn term(&self, z_exp: u64) -> Option<&APoly> {
        self.terms.get(&z_exp)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u64> {
        self.terms.keys().next_back().copied()
    }

    /// Total number of stored big-integer coefficients.
    pub fn coefficient_count(&self) -> usize {
        self.terms.values().map(|c| c.coeffs.len()).sum()
    }

    pub fn add(&self, other: &BiPolyZ) -> BiPolyZ {
        let mut out = self.clone();
        for (&e, c) in &other.terms {
            out.add_term(e, c);
        }
        out
    }

    pub fn neg(&self) -> BiPolyZ {
        BiPolyZ {
            terms: self.terms.iter().map(|(&e, c)| (e, c.neg())).collect(),
        }
    }

    pub fn sub(&self, other: &BiPolyZ) -> BiPolyZ {
        self.add(&other.neg())
    }

    /// Multiplies every coefficient by an element of `Z[a]`.
    pub fn scale_a(&self, k: &APoly, trunc: Truncation) -> BiPolyZ {
        BiPolyZ::from_terms(self.terms.iter().map(|(&e, c)| (e, c.mul_trunc(k, trunc))))
    }

    /// Multiplies by `z^k`.
    pub fn shift(&self, k: u64) -> Result<BiPolyZ> {
        let terms = self
            .terms
            .iter()
            .map(|(&e, c)| {
                e.checked_add(k)
                    .map(|e| (e, c.clone()))
                    .ok_or(Error::ExponentOverflow { limit: u64::MAX })
            })
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(BiPolyZ { terms })
    }

    pub fn mul(&self, other: &BiPolyZ) -> Result<BiPolyZ> {
        self.mul_trunc(other, Truncation::Exact)
    }

    pub fn mul_trunc(&self, other: &BiPolyZ, trunc: Truncation) -> Result<BiPolyZ> {
        if let (Some(d1), Some(d2)) = (self.degree(), other.degree()) {
            d1.checked_add(d2)
                .ok_or(Error::ExponentOverflow { limit: u64::MAX })?;
        }
        let mut out = BiPolyZ::zero();
        for (&e1, c1) in &self.terms {
            for (&e2, c2) in &other.terms {
                let prod = c1.mul_trunc(c2, trunc);
                out.add_term(e1 + e2, &prod);
            }
        }
        Ok(out)
    }

    fn pow_trunc(&self, k: u64, trunc: Truncation) -> Result<BiPolyZ> {
        let mut base = self.clone();
        let mut acc = BiPolyZ::one().truncate_a(trunc);
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul_trunc(&base, trunc)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul_trunc(&base, trunc)?;
            }
        }
        Ok(acc)
    }

    /// `self(g(z))`, expanded exactly by Horner's rule over the sorted
    /// exponents of `self`.
    pub fn compose(&self, g: &BiPolyZ) -> Result<BiPolyZ> {
        self.compose_trunc(g, Truncation::Exact)
    }

    pub fn compose_trunc(&self, g: &BiPolyZ, trunc: Truncation) -> Result<BiPolyZ> {
        let mut iter = self.terms.iter().rev();
        let Some((&top, top_c)) = iter.next() else {
            return Ok(BiPolyZ::zero());
        };
        if let Some(dg) = g.degree() {
            top.checked_mul(dg)
                .ok_or(Error::ExponentOverflow { limit: u64::MAX })?;
        }
        let mut powers: HashMap<u64, BiPolyZ> = HashMap::new();
        let mut pow_of = |k: u64| -> Result<BiPolyZ> {
            if let Some(p) = powers.get(&k) {
                return Ok(p.clone());
            }
            let p = g.pow_trunc(k, trunc)?;
            powers.insert(k, p.clone());
            Ok(p)
        };

        let mut acc = BiPolyZ::monomial(0, top_c.truncate(trunc));
        let mut prev = top;
        for (&e, c) in iter {
            acc = acc.mul_trunc(&pow_of(prev - e)?, trunc)?;
            acc.add_term(0, &c.truncate(trunc));
            prev = e;
        }
        if prev > 0 {
            acc = acc.mul_trunc(&pow_of(prev)?, trunc)?;
        }
        Ok(acc)
    }

    /// Reduces every coefficient modulo `a^t`.
    pub fn truncate_a(&self, trunc: Truncation) -> BiPolyZ {
        BiPolyZ::from_terms(self.terms.iter().map(|(&e, c)| (e, c.truncate(trunc))))
    }

    /// Evaluates every coefficient at `a` and returns the numeric polynomial.
    pub fn specialize(&self, a: Complex64) -> CPoly {
        CPoly::from_terms(self.terms.iter().map(|(&e, c)| (e, c.eval(a))))
    }
}

impl fmt::Display for BiPolyZ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (&e, c)) in self.terms.iter().rev().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            match e {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})*z")?,
                _ => write!(f, "({c})*z^{e}")?,
            }
        }
        Ok(())
    }
}

/// One term of the JSON form: `{"z_exp": 4, "a_poly": ["0", "1"]}` means
/// `a * z^4`. `a_poly[i]` is the decimal coefficient of `a^i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonTerm {
    pub z_exp: u64,
    pub a_poly: Vec<String>,
}

impl From<BiPolyZ> for Vec<JsonTerm> {
    fn from(p: BiPolyZ) -> Self {
        p.terms
            .into_iter()
            .map(|(z_exp, c)| {
                let deg = c.degree().unwrap_or(0);
                let a_poly = (0..=deg)
                    .map(|i| {
                        c.coeff(i)
                            .map_or_else(|| "0".to_string(), |v| v.to_string())
                    })
                    .collect();
                JsonTerm { z_exp, a_poly }
            })
            .collect()
    }
}

impl TryFrom<Vec<JsonTerm>> for BiPolyZ {
    type Error = Error;

    fn try_from(terms: Vec<JsonTerm>) -> Result<Self> {
        let mut out = BiPolyZ::zero();
        for t in terms {
            if out.terms.contains_key(&t.z_exp) {
                return Err(Error::Parse(format!("duplicate z_exp {}", t.z_exp)));
            }
            let mut c = APoly::zero();
            for (i, s) in t.a_poly.iter().enumerate() {
                let v: BigInt = s
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad integer {s:?}")))?;
                c.add_coeff(i as u64, v);
            }
            if !c.is_zero() {
                out.terms.insert(t.z_exp, c);
            }
        }
        Ok(out)
    }
}

/// A polynomial in `z` with complex coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CPoly {
    terms: BTreeMap<u64, Complex64>,
}

impl CPoly {
    /// Builds from `(z_exponent, coefficient)` pairs; repeated exponents are
    /// summed and exact zeros dropped.
    pub fn from_terms<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (u64, Complex64)>,
    {
        let mut terms: BTreeMap<u64, Complex64> = BTreeMap::new();
        for (e, c) in pairs {
            *terms.entry(e).or_default() += c;
        }
        terms.retain(|_, c| !c.is_zero());
        Self { terms }
    }

    pub fn terms(&self) -> &BTreeMap<u64, Complex64> {
        &self.terms
    }

    pub fn coeff(&self, z_exp: u64) -> Complex64 {
        self.terms.get(&z_exp).copied().unwrap_or_default()
    }

    pub fn degree(&self) -> Option<u64> {
        self.terms.keys().next_back().copied()
    }

    pub fn mul(&self, other: &CPoly) -> CPoly {
        CPoly::from_terms(
            self.terms.iter().flat_map(|(&e1, &c1)| {
                other.terms.iter().map(move |(&e2, &c2)| (e1 + e2, c1 * c2))
            }),
        )
    }

    /// `self(g(z))` in floating point, by Horner's rule.
    pub fn compose(&self, g: &CPoly) -> CPoly {
        let mut iter = self.terms.iter().rev();
        let Some((&top, &top_c)) = iter.next() else {
            return CPoly::default();
        };
        let pow = |k: u64| {
            let mut acc = CPoly::from_terms([(0, Complex64::new(1.0, 0.0))]);
            for _ in 0..k {
                acc = acc.mul(g);
            }
            acc
        };
        let mut acc = CPoly::from_terms([(0, top_c)]);
        let mut prev = top;
        for (&e, &c) in iter {
            acc = acc.mul(&pow(prev - e));
            *acc.terms.entry(0).or_default() += c;
            prev = e;
        }
        acc.mul(&pow(prev))
    }

    /// Sums `c_e z^e` in ascending exponent order. The summation order is
    /// fixed, so results are bit-reproducible.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut sum = Complex64::zero();
        let mut power = Complex64::new(1.0, 0.0);
        let mut at = 0u64;
        for (&e, &c) in &self.terms {
            power *= cpow(z, e - at);
            at = e;
            sum += c * power;
        }
        sum
    }
}

pub fn poly_add(f: &BiPolyZ, g: &BiPolyZ) -> BiPolyZ {
    f.add(g)
}

pub fn poly_mul(f: &BiPolyZ, g: &BiPolyZ) -> Result<BiPolyZ> {
    f.mul(g)
}

pub fn poly_compose(f: &BiPolyZ, g: &BiPolyZ) -> Result<BiPolyZ> {
    f.compose(g)
}

pub fn specialize(f: &BiPolyZ, a: Complex64) -> CPoly {
    f.specialize(a)
}

pub fn eval_at(f: &CPoly, z: Complex64) -> Complex64 {
    f.eval(z)
}
