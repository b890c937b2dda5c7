//! Symbolic Cuntz operators and the basis vectors they generate.
//!
//! `S_0 f = f∘R_a` and `S_1 f = z^alpha · f∘R_a` act on `Z[a][z]`; a word
//! `v = (j_1, …, j_N)` yields `b_v = S_{j_1} ⋯ S_{j_N} 1`, with `S_{j_N}`
//! applied first. Everything here is exact and independent of the numeric
//! value of `a`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{FamilyIndex, FamilyMember};
use crate::poly::{cpow, APoly, BiPolyZ, CPoly, Truncation};

/// Longest supported word.
pub const MAX_WORD_LEN: usize = 12;

/// Largest z-degree a basis vector may reach.
pub const MAX_BASIS_DEGREE: u64 = 1 << 62;

/// Upper limit on the z-terms of an exact expansion, estimated from the degree.
pub const MAX_EXACT_TERMS: u64 = 1 << 16;

/// A finite word over `{0, 1}` of length at most [`MAX_WORD_LEN`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(letters: Vec<u8>) -> Result<Self> {
        if letters.len() > MAX_WORD_LEN {
            return Err(Error::WordTooLong {
                len: letters.len(),
                max: MAX_WORD_LEN,
            });
        }
        if letters.iter().any(|&l| l > 1) {
            return Err(Error::InvalidWord(format!("{letters:?}")));
        }
        Ok(Self(letters))
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Canonical words are the empty word and the words ending in 1.
    pub fn is_canonical(&self) -> bool {
        self.0.last().is_none_or(|&l| l == 1)
    }

    /// `self` followed by `letter`.
    pub fn pushed(&self, letter: u8) -> Result<Self> {
        let mut v = self.0.clone();
        v.push(letter);
        Self::new(v)
    }

    /// `letter` followed by `self`.
    pub fn prepended(&self, letter: u8) -> Result<Self> {
        let mut v = Vec::with_capacity(self.len() + 1);
        v.push(letter);
        v.extend_from_slice(&self.0);
        Self::new(v)
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|ch| match ch {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::InvalidWord(s.to_string())),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::new(letters)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// A basis vector `b_v` with `a` kept symbolic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisVector {
    pub word: Word,
    pub poly: BiPolyZ,
}

/// The coefficients `beta_i(a)` of a basis vector, by z-exponent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientProfile {
    pub entries: Vec<(u64, APoly)>,
}

impl CoefficientProfile {
    /// `beta_i(a)` for every entry.
    pub fn eval(&self, a: Complex64) -> Vec<(u64, Complex64)> {
        self.entries.iter().map(|(e, b)| (*e, b.eval(a))).collect()
    }
}

pub fn apply_s0(index: FamilyIndex, f: &BiPolyZ) -> Result<BiPolyZ> {
    apply_s0_trunc(index, f, Truncation::Exact)
}

pub fn apply_s1(index: FamilyIndex, f: &BiPolyZ) -> Result<BiPolyZ> {
    apply_s1_trunc(index, f, Truncation::Exact)
}

/// `S_0 f = f∘R_a`, optionally modulo `a^t`.
pub fn apply_s0_trunc(index: FamilyIndex, f: &BiPolyZ, trunc: Truncation) -> Result<BiPolyZ> {
    f.compose_trunc(&index.symbolic_poly(), trunc)
}

/// `S_1 f = e_1 · (f∘R_a)` with `e_1 = z^alpha`, optionally modulo `a^t`.
pub fn apply_s1_trunc(index: FamilyIndex, f: &BiPolyZ, trunc: Truncation) -> Result<BiPolyZ> {
    let e1 = BiPolyZ::z_pow(index.alpha());
    e1.mul_trunc(&apply_s0_trunc(index, f, trunc)?, trunc)
}

/// Numeric counterpart of [`basis_poly`]: the whole S-word construction run
/// in floating point at a fixed `a`.
pub fn basis_poly_numeric(index: FamilyIndex, v: &Word, a: Complex64) -> CPoly {
    let r = index.symbolic_poly().specialize(a);
    let e1 = CPoly::from_terms([(index.alpha(), Complex64::new(1.0, 0.0))]);
    let mut f = CPoly::from_terms([(0, Complex64::new(1.0, 0.0))]);
    for &j in v.letters().iter().rev() {
        f = f.compose(&r);
        if j == 1 {
            f = e1.mul(&f);
        }
    }
    f
}

/// `b_v(z)` evaluated along the orbit: `S_j f(z) = e_j(z) f(R(z))` unrolls to
/// the product of `R^k(z)^alpha` over the positions `k` holding a 1.
pub fn basis_eval(fm: &FamilyMember, v: &Word, z: Complex64) -> Complex64 {
    let mut value = Complex64::new(1.0, 0.0);
    let mut zk = z;
    for &j in v.letters() {
        if j == 1 {
            value *= cpow(zk, fm.alpha());
        }
        zk = fm.eval(zk);
    }
    value
}

/// Exact z-degree of `b_v`, or `ExponentOverflow` past [`MAX_BASIS_DEGREE`].
pub fn basis_degree(index: FamilyIndex, v: &Word) -> Result<u64> {
    let overflow = Error::ExponentOverflow {
        limit: MAX_BASIS_DEGREE,
    };
    v.letters().iter().rev().try_fold(0u64, |deg, &j| {
        let d = deg
            .checked_mul(index.degree())
            .and_then(|d| d.checked_add(if j == 1 { index.alpha() } else { 0 }))
            .filter(|&d| d <= MAX_BASIS_DEGREE);
        d.ok_or_else(|| overflow.clone())
    })
}

/// `S_v 1`, optionally modulo `a^t`. Exact requests are refused up front when
/// the degree bound implies more than [`MAX_EXACT_TERMS`] terms.
pub fn basis_poly(index: FamilyIndex, v: &Word, trunc: Truncation) -> Result<BiPolyZ> {
    let deg = basis_degree(index, v)?;
    // every exponent of b_v is a multiple of alpha
    let estimated_terms = deg / index.alpha() + 1;
    if trunc == Truncation::Exact && estimated_terms > MAX_EXACT_TERMS {
        return Err(Error::TooLarge {
            estimated_terms,
            limit: MAX_EXACT_TERMS,
        });
    }
    let mut f = BiPolyZ::one().truncate_a(trunc);
    for &j in v.letters().iter().rev() {
        f = match j {
            0 => apply_s0_trunc(index, &f, trunc)?,
            _ => apply_s1_trunc(index, &f, trunc)?,
        };
    }
    Ok(f)
}

pub fn basis_vector(index: FamilyIndex, v: &Word) -> Result<BasisVector> {
    Ok(BasisVector {
        word: v.clone(),
        poly: basis_poly(index, v, Truncation::Exact)?,
    })
}

/// The empty word followed by every word of length `1..=max_len` ending in 1,
/// ordered by length, then lexicographically. `2^max_len` words in total.
pub fn enumerate_canonical(max_len: usize) -> Result<Vec<Word>> {
    if max_len > MAX_WORD_LEN {
        return Err(Error::WordTooLong {
            len: max_len,
            max: MAX_WORD_LEN,
        });
    }
    let mut out = vec![Word::empty()];
    for len in 1..=max_len {
        let prefix_len = len - 1;
        for bits in 0u32..(1 << prefix_len) {
            let mut letters: Vec<u8> = (0..prefix_len)
                .map(|i| ((bits >> (prefix_len - 1 - i)) & 1) as u8)
                .collect();
            letters.push(1);
            out.push(Word(letters));
        }
    }
    Ok(out)
}

/// Good form: every coefficient is an integer polynomial in `a` with zero
/// constant term. Integrality holds by construction, so only the constant
/// terms are inspected. The zero polynomial qualifies vacuously.
pub fn good_form_poly(p: &BiPolyZ) -> bool {
    p.terms().values().all(|c| c.constant_term().is_zero())
}

pub fn good_form(bv: &BasisVector) -> bool {
    good_form_poly(&bv.poly)
}

/// The JSON record for one basis vector: `{word, n, terms, good_form}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisRecord {
    pub word: String,
    pub n: u32,
    pub terms: BiPolyZ,
    pub good_form: bool,
}

impl BasisRecord {
    pub fn new(index: FamilyIndex, bv: &BasisVector) -> Self {
        Self {
            word: bv.word.to_string(),
            n: index.n(),
            terms: bv.poly.clone(),
            good_form: good_form(bv),
        }
    }
}

pub fn coefficient_profile(bv: &BasisVector) -> CoefficientProfile {
    CoefficientProfile {
        entries: bv
            .poly
            .terms()
            .iter()
            .map(|(&e, c)| (e, c.clone()))
            .collect(),
    }
}

/// Coefficient distance between `b_{v,a_k}` and `b_{v,a_lim}` for each `a_k`:
/// `sum_i |beta_i(a_k) - beta_i(a_lim)| * max(1, r)^deg`. For `r <= 1` this is
/// the plain l1 distance, which bounds the sup-norm deviation on the disk of
/// radius `r`.
pub fn continuity_modulus(
    index: FamilyIndex,
    v: &Word,
    a_seq: &[Complex64],
    a_lim: Complex64,
    eval_disk_radius: f64,
) -> Result<Vec<f64>> {
    if !(eval_disk_radius > 0.0 && eval_disk_radius.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "disk radius must be positive, got {eval_disk_radius}"
        )));
    }
    if let Some(bad) = a_seq.iter().chain([&a_lim]).find(|a| a.is_zero()) {
        return Err(Error::InvalidFamily(format!(
            "a must be nonzero, got {bad}"
        )));
    }
    let profile = coefficient_profile(&basis_vector(index, v)?);
    let limit = profile.eval(a_lim);
    let scale = eval_disk_radius
        .max(1.0)
        .powf(profile.entries.last().map_or(0.0, |(e, _)| *e as f64));
    Ok(a_seq
        .iter()
        .map(|&a| {
            let d: f64 = profile
                .eval(a)
                .iter()
                .zip(&limit)
                .map(|((_, x), (_, y))| (x - y).norm())
                .sum();
            d * scale
        })
        .collect())
}
