//! The infinite-product kernel on the basin of 0,
//!
//! ```text
//! K_a(z, w) = prod_{i >= 0} (1 + (R^i(z) * conj(R^i(w)))^alpha),   alpha = 2^n,
//! ```
//!
//! evaluated with a certified geometric tail, plus the functional equation
//! `K(z, w) = k(z, w) K(R(z), R(w))` and the summability series of the
//! diagonal terms.

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::dynamics::GeometricTail;
use crate::error::{Error, Result};
use crate::family::FamilyMember;
use crate::poly::cpow;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub max_factors: usize,
    pub tail_eps: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            max_factors: 256,
            tail_eps: 1e-14,
        }
    }
}

impl KernelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_factors > 0 && self.tail_eps > 0.0 && self.tail_eps < 1.0 {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "need max_factors > 0 and 0 < tail_eps < 1, got {self:?}"
            )))
        }
    }
}

/// A truncated product with its error certificate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub value: Complex64,
    pub factors_used: usize,
    /// Bound on the summed deviations `|factor - 1|` from the last factor on.
    pub tail_bound: f64,
    pub converged: bool,
}

impl KernelValue {
    /// `Err(NotConverged)` unless the product converged.
    pub fn into_result(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                factors_used: self.factors_used,
            })
        }
    }
}

/// `k(z, w) = 1 + (z conj(w))^alpha`.
pub fn base_kernel(alpha: u64, z: Complex64, w: Complex64) -> Complex64 {
    1.0 + cpow(z * w.conj(), alpha)
}

/// Evaluates `K_a(z, w)` factor by factor in ascending order.
///
/// Stops when three consecutive deviations `|factor - 1|` have each halved,
/// the latest is below `tail_eps`, and `deviation / (1 - ratio)` is below
/// `tail_eps * |value|`. A factor that is exactly 1 because one of the orbits
/// reached 0 ends the product exactly. Non-convergence is reported through
/// `converged = false`, never by silent truncation.
pub fn eval_kernel(
    fm: &FamilyMember,
    z: Complex64,
    w: Complex64,
    cfg: &KernelConfig,
) -> KernelValue {
    let alpha = fm.alpha();
    let mut value = Complex64::new(1.0, 0.0);
    let mut zi = z;
    let mut wi = w;
    let mut tail = GeometricTail::default();
    let mut last_dev = f64::INFINITY;
    for i in 0..cfg.max_factors {
        let t = zi * wi.conj();
        if t.is_zero() {
            // R(0) = 0: every remaining factor is exactly 1
            return KernelValue {
                value,
                factors_used: i + 1,
                tail_bound: 0.0,
                converged: true,
            };
        }
        let x = cpow(t, alpha);
        if !x.is_finite() {
            return KernelValue {
                value,
                factors_used: i,
                tail_bound: f64::INFINITY,
                converged: false,
            };
        }
        value *= 1.0 + x;
        let dev = x.norm();
        last_dev = dev;
        if let Some(ratio) = tail.push(dev, cfg.tail_eps) {
            let bound = dev / (1.0 - ratio);
            if bound < cfg.tail_eps * value.norm() {
                return KernelValue {
                    value,
                    factors_used: i + 1,
                    tail_bound: bound,
                    converged: true,
                };
            }
        }
        zi = fm.eval(zi);
        wi = fm.eval(wi);
    }
    KernelValue {
        value,
        factors_used: cfg.max_factors,
        tail_bound: last_dev,
        converged: false,
    }
}

/// `|K(z,w) - k(z,w) K(R(z), R(w))| / |K(z,w)|`.
pub fn check_functional_eq(
    fm: &FamilyMember,
    z: Complex64,
    w: Complex64,
    cfg: &KernelConfig,
) -> Result<f64> {
    let lhs = eval_kernel(fm, z, w, cfg).into_result()?.value;
    let inner = eval_kernel(fm, fm.eval(z), fm.eval(w), cfg)
        .into_result()?
        .value;
    let rhs = base_kernel(fm.alpha(), z, w) * inner;
    Ok((lhs - rhs).norm() / lhs.norm())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SeriesVerdict {
    Converges,
    Diverges,
    Indeterminate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaSeries {
    pub sum: f64,
    pub terms_used: usize,
    pub verdict: SeriesVerdict,
}

/// Settling tolerance for detecting an orbit stuck on a nonzero value.
const STATIONARY_TOL: f64 = 1e-10;

/// Partial sums of `sum_i |R^i(z)|^(2 alpha)`, the diagonal of `t(z,w) = (z conj w)^alpha`.
///
/// Converges on a certified geometric tail (as the series basin test does);
/// Diverges when the orbit leaves the escape bound or settles on a nonzero
/// value; Indeterminate after `max_factors` terms otherwise.
pub fn omega_series(fm: &FamilyMember, z: Complex64, cfg: &KernelConfig) -> OmegaSeries {
    let two_alpha = 2 * fm.alpha();
    let escape = fm.escape_bound();
    let floor = fm.contraction_radius();
    let mut tail = GeometricTail::default();
    let mut sum = 0.0;
    let mut zi = z;
    let done = |sum, i: usize, verdict| OmegaSeries {
        sum,
        terms_used: i + 1,
        verdict,
    };
    for i in 0..cfg.max_factors {
        let mag = zi.norm();
        if !mag.is_finite() || mag > escape {
            return done(sum, i, SeriesVerdict::Diverges);
        }
        let term = mag.powi(two_alpha as i32);
        sum += term;
        if mag == 0.0 || tail.push(term, cfg.tail_eps).is_some() {
            return done(sum, i, SeriesVerdict::Converges);
        }
        let next = fm.eval(zi);
        if mag > floor && (next - zi).norm() < STATIONARY_TOL {
            return done(sum, i, SeriesVerdict::Diverges);
        }
        zi = next;
    }
    OmegaSeries {
        sum,
        terms_used: cfg.max_factors,
        verdict: SeriesVerdict::Indeterminate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fm(n: u32, a: Complex64) -> FamilyMember {
        FamilyMember::new(n, a).unwrap()
    }

    /// Plain product over a fixed number of factors, no certification.
    fn product_oracle(
        n: u32,
        a: Complex64,
        z: Complex64,
        w: Complex64,
        factors: usize,
    ) -> Complex64 {
        let alpha = 1u32 << n;
        let r = |x: Complex64| a * x.powu(4 << n) - 2.0 * a * x.powu(2 << n);
        let (mut zi, mut wi) = (z, w);
        let mut p = c(1.0, 0.0);
        for _ in 0..factors {
            p *= 1.0 + (zi * wi.conj()).powu(alpha);
            zi = r(zi);
            wi = r(wi);
        }
        p
    }

    #[test]
    fn trivial_values() {
        let f = fm(0, c(1.0, 0.0));
        let cfg = KernelConfig::default();
        let k = eval_kernel(&f, Complex64::zero(), Complex64::zero(), &cfg);
        assert_eq!(k.value, c(1.0, 0.0));
        assert!(k.converged && k.factors_used <= 2);
        let k = eval_kernel(&f, c(0.5, 0.0), Complex64::zero(), &cfg);
        assert_eq!(k.value, c(1.0, 0.0));
        assert!(k.converged);
    }

    #[test]
    fn diagonal_at_one_tenth() {
        let f = fm(0, c(1.0, 0.0));
        let k = eval_kernel(&f, c(0.1, 0.0), c(0.1, 0.0), &KernelConfig::default());
        assert!(k.converged);
        assert!((k.value - c(1.010400, 0.0)).norm() < 1e-5);
        let oracle = product_oracle(0, c(1.0, 0.0), c(0.1, 0.0), c(0.1, 0.0), 12);
        assert!((k.value - oracle).norm() < 1e-14);
        assert!(k.tail_bound < 1e-14 * k.value.norm());
    }

    #[test]
    fn outside_the_basin_does_not_converge() {
        let f = fm(0, c(1.0, 0.0));
        let k = eval_kernel(&f, c(-1.0, 0.0), c(-1.0, 0.0), &KernelConfig::default());
        assert!(!k.converged);
        assert_eq!(k.factors_used, 256);
        assert!(k.into_result().is_err());
        let k = eval_kernel(&f, c(3.0, 0.0), c(3.0, 0.0), &KernelConfig::default());
        assert!(!k.converged);
    }

    #[test]
    fn functional_equation_examples() {
        let cfg = KernelConfig::default();
        let f = fm(0, c(1.0, 0.0));
        assert!(check_functional_eq(&f, c(0.1, 0.0), c(0.1, 0.0), &cfg).unwrap() < 1e-10);
        assert!(
            check_functional_eq(&f, Complex64::zero(), Complex64::zero(), &cfg).unwrap() < 1e-16
        );
        let f = fm(1, c(0.5, 0.0));
        assert!(check_functional_eq(&f, c(0.2, 0.0), c(0.0, 0.1), &cfg).unwrap() < 1e-10);
        let f = fm(0, c(1.0, 0.0));
        assert!(matches!(
            check_functional_eq(&f, c(-1.0, 0.0), c(0.1, 0.0), &cfg),
            Err(Error::NotConverged { .. }) | Ok(_)
        ));
    }

    #[test]
    fn omega_examples() {
        let cfg = KernelConfig::default();
        let f = fm(0, c(1.0, 0.0));
        let s = omega_series(&f, Complex64::zero(), &cfg);
        assert_eq!((s.sum, s.verdict), (0.0, SeriesVerdict::Converges));

        let mut z = c(0.1, 0.0);
        let mut oracle = 0.0;
        for _ in 0..10 {
            oracle += z.norm_sqr();
            z = z * z * z * z - 2.0 * z * z;
        }
        let s = omega_series(&f, c(0.1, 0.0), &cfg);
        assert_eq!(s.verdict, SeriesVerdict::Converges);
        assert!((s.sum - oracle).abs() < 1e-15);
        assert!((s.sum - 0.0103966).abs() < 1e-7);

        assert_eq!(
            omega_series(&f, c(-1.0, 0.0), &cfg).verdict,
            SeriesVerdict::Diverges
        );
        assert_eq!(
            omega_series(&f, c(5.0, 0.0), &cfg).verdict,
            SeriesVerdict::Diverges
        );
    }

    #[test]
    fn config_validation() {
        assert!(KernelConfig::default().validate().is_ok());
        let bad = KernelConfig {
            tail_eps: 1.0,
            ..KernelConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
