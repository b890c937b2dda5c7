//! The polynomial family `R_a(z) = a z^(4m) - 2a z^(2m)` with `m = 2^n`.

use std::sync::OnceLock;

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::poly::{APoly, BiPolyZ};

/// Largest supported family index `n`; keeps the degree at most 32.
pub const MAX_FAMILY_INDEX: u32 = 3;

/// The family index `n`, validated to `n <= 3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FamilyIndex(u32);

impl FamilyIndex {
    pub fn new(n: u32) -> Result<Self> {
        if n > MAX_FAMILY_INDEX {
            return Err(Error::InvalidFamily(format!(
                "n = {n} exceeds the cap of {MAX_FAMILY_INDEX}"
            )));
        }
        Ok(Self(n))
    }

    pub fn n(self) -> u32 {
        self.0
    }

    /// `alpha = 2^n`, the exponent in `e_1(z) = z^alpha` and in the kernel.
    pub fn alpha(self) -> u64 {
        1 << self.0
    }

    /// `2^(n+1)`, the lower exponent of `R_a`.
    pub fn half_degree(self) -> u64 {
        2 << self.0
    }

    /// `2^(n+2)`, the degree of `R_a`.
    pub fn degree(self) -> u64 {
        4 << self.0
    }

    /// `R_a` with `a` kept symbolic: `a z^(2^(n+2)) - 2a z^(2^(n+1))`.
    pub fn symbolic_poly(self) -> BiPolyZ {
        BiPolyZ::from_terms([
            (self.degree(), APoly::monomial(1, 1)),
            (self.half_degree(), APoly::monomial(-2, 1)),
        ])
    }
}

/// A member `(n, a)` of the family, `a != 0`.
#[derive(Clone, Debug)]
pub struct FamilyMember {
    index: FamilyIndex,
    a: Complex64,
    attractors: OnceLock<Vec<Complex64>>,
}

impl PartialEq for FamilyMember {
    fn eq(&self, other: &Self) -> bool {
        self.index == other.index && self.a == other.a
    }
}

impl FamilyMember {
    pub fn new(n: u32, a: Complex64) -> Result<Self> {
        let index = FamilyIndex::new(n)?;
        if a.is_zero() || !a.re.is_finite() || !a.im.is_finite() {
            return Err(Error::InvalidFamily(format!(
                "a must be finite and nonzero, got {a}"
            )));
        }
        Ok(Self {
            index,
            a,
            attractors: OnceLock::new(),
        })
    }

    pub fn index(&self) -> FamilyIndex {
        self.index
    }

    pub fn n(&self) -> u32 {
        self.index.n()
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn alpha(&self) -> u64 {
        self.index.alpha()
    }

    pub fn degree(&self) -> u64 {
        self.index.degree()
    }

    /// Symbolic `R_a`; the same for every `a`.
    pub fn poly(&self) -> BiPolyZ {
        self.index.symbolic_poly()
    }

    /// `R_a(z)`, evaluated as `a u (u - 2)` with `u = z^(2^(n+1))` by repeated
    /// squaring.
    #[inline]
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut u = z;
        for _ in 0..=self.index.n() {
            u = u * u;
        }
        self.a * u * (u - 2.0)
    }

    /// `R_a'(z) = 4m a z^(2m-1) (z^(2m) - 1)` with `m = 2^n`.
    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let two_m = self.index.half_degree();
        let lower = crate::poly::cpow(z, two_m - 1);
        let u = lower * z;
        self.a * (2.0 * two_m as f64) * lower * (u - 1.0)
    }

    /// A radius `rho` such that every orbit leaving the disk `|z| <= rho`
    /// tends to infinity: `|R_a(z)| >= 2|z|` whenever `|z| >= rho`.
    pub fn escape_bound(&self) -> f64 {
        let two_m = self.index.half_degree() as i32;
        let abs_a = self.a.norm();
        // |R(z)|/|z| >= |a| r^(2m-1) (r^(2m) - 2), increasing once r^(2m) > 2
        let growth = |r: f64| abs_a * r.powi(two_m - 1) * (r.powi(two_m) - 2.0);
        let mut lo = 2f64.powf(1.0 / f64::from(two_m));
        let mut hi = lo * 2.0;
        while growth(hi) < 2.0 {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if growth(mid) >= 2.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// A radius `rho0` with `|R_a(z)| <= |z|/2` on `|z| <= rho0`; the disk lies
    /// in the basin of 0.
    pub fn contraction_radius(&self) -> f64 {
        let two_m = self.index.half_degree() as i32;
        let abs_a = self.a.norm();
        let ratio = |r: f64| abs_a * r.powi(two_m - 1) * (r.powi(two_m) + 2.0);
        let mut lo = 0.0;
        let mut hi = 1.0;
        while ratio(hi) <= 0.5 {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if ratio(mid) <= 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Nonzero attracting fixed points (`R(p) = p`, `|R'(p)| < 1`), found by
    /// Newton refinement of `R(z) - z` from a grid of seeds. Computed once.
    pub fn attracting_fixed_points(&self) -> &[Complex64] {
        self.attractors
            .get_or_init(|| self.find_attracting_fixed_points())
    }

    fn find_attracting_fixed_points(&self) -> Vec<Complex64> {
        const SEEDS: usize = 32;
        // Cauchy bound for the roots of R(z) - z
        let bound = 1.0 + f64::max(2.0, 1.0 / self.a.norm());
        let step = 2.0 * bound / (SEEDS - 1) as f64;
        let mut found: Vec<Complex64> = Vec::new();
        for iy in 0..SEEDS {
            for ix in 0..SEEDS {
                let mut z = Complex64::new(-bound + ix as f64 * step, -bound + iy as f64 * step);
                for _ in 0..100 {
                    let f = self.eval(z) - z;
                    let df = self.derivative(z) - 1.0;
                    if df.is_zero() || !f.is_finite() {
                        break;
                    }
                    let dz = f / df;
                    z -= dz;
                    if dz.norm() <= 1e-15 * (1.0 + z.norm()) {
                        break;
                    }
                }
                if !z.is_finite() || z.norm() < 1e-6 {
                    continue;
                }
                if (self.eval(z) - z).norm() > 1e-10 * (1.0 + z.norm()) {
                    continue;
                }
                if self.derivative(z).norm() >= 1.0 {
                    continue;
                }
                if found.iter().all(|p| (*p - z).norm() > 1e-7) {
                    found.push(z);
                }
            }
        }
        found.sort_by(|p, q| p.re.total_cmp(&q.re).then(p.im.total_cmp(&q.im)));
        found
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn index_cap() {
        assert!(FamilyIndex::new(3).is_ok());
        assert!(FamilyIndex::new(4).is_err());
        assert!(FamilyMember::new(0, Complex64::zero()).is_err());
        assert!(FamilyMember::new(0, c(f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn symbolic_family_polys() {
        let n0 = FamilyIndex::new(0).unwrap().symbolic_poly();
        assert_eq!(n0.to_string(), "(a)*z^4 + (-2a)*z^2");
        let n1 = FamilyIndex::new(1).unwrap().symbolic_poly();
        assert_eq!(n1.to_string(), "(a)*z^8 + (-2a)*z^4");
        let sp = n0.specialize(c(1.0, 0.0));
        assert_eq!(sp.coeff(4), c(1.0, 0.0));
        assert_eq!(sp.coeff(2), c(-2.0, 0.0));
    }

    #[test]
    fn numeric_eval_matches_poly() {
        for n in 0..=3 {
            let fm = FamilyMember::new(n, c(0.7, -0.4)).unwrap();
            let p = fm.poly().specialize(fm.a());
            for z in [c(0.3, 0.2), c(-0.9, 0.1), c(1.05, -0.3)] {
                let (x, y) = (fm.eval(z), p.eval(z));
                assert!((x - y).norm() <= 1e-13 * (1.0 + y.norm()), "n={n} z={z}");
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let fm = FamilyMember::new(1, c(1.2, 0.3)).unwrap();
        let z = c(0.4, -0.7);
        let h = 1e-6;
        let fd = (fm.eval(z + h) - fm.eval(z - h)) / (2.0 * h);
        assert!((fd - fm.derivative(z)).norm() < 1e-6);
    }

    #[test]
    fn escape_and_contraction_radii() {
        for (n, a) in [(0, c(1.0, 0.0)), (0, c(0.01, 0.0)), (2, c(3.0, 1.0))] {
            let fm = FamilyMember::new(n, a).unwrap();
            let rho = fm.escape_bound();
            for k in 0..16 {
                let z = Complex64::from_polar(rho * 1.000001, k as f64 * 0.4);
                assert!(fm.eval(z).norm() >= 2.0 * z.norm() * (1.0 - 1e-9));
            }
            let r0 = fm.contraction_radius();
            assert!(r0 > 0.0);
            for k in 0..16 {
                let z = Complex64::from_polar(r0, k as f64 * 0.4);
                assert!(fm.eval(z).norm() <= 0.5 * z.norm() * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn minus_one_is_the_coexisting_attractor() {
        let fm = FamilyMember::new(0, c(1.0, 0.0)).unwrap();
        let pts = fm.attracting_fixed_points();
        assert_eq!(pts.len(), 1);
        assert!((pts[0] - c(-1.0, 0.0)).norm() < 1e-12);
        // a = 0.5: critical orbits fall into 0, nothing else attracts
        let fm = FamilyMember::new(0, c(0.5, 0.0)).unwrap();
        assert!(fm.attracting_fixed_points().is_empty());
    }
}
