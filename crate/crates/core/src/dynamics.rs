//! Orbits of `R_a`, the two basin-of-attraction tests, closed-form preimages
//! and the escape-time basin rasterizer.

use std::f64::consts::TAU;

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::FamilyMember;
use crate::par::{self, Exec};

/// Iteration limits shared by both basin tests.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterConfig {
    pub max_iters: usize,
    pub escape_radius: f64,
    pub convergence_radius: f64,
    pub series_tail_eps: f64,
}

impl Default for IterConfig {
    fn default() -> Self {
        Self {
            max_iters: 512,
            escape_radius: 1e6,
            convergence_radius: 1e-8,
            series_tail_eps: 1e-12,
        }
    }
}

impl IterConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.max_iters > 0
            && self.convergence_radius > 0.0
            && self.convergence_radius < 1.0
            && self.escape_radius > 1.0
            && self.series_tail_eps > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "need max_iters > 0, 0 < convergence_radius < 1 < escape_radius, series_tail_eps > 0; got {self:?}"
            )))
        }
    }

    /// The escape radius actually used for `fm`: never below the certified
    /// escape bound, so small `|a|` (huge basins) is not misclassified.
    pub fn effective_escape_radius(&self, fm: &FamilyMember) -> f64 {
        self.escape_radius.max(fm.escape_bound())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasinStatus {
    Member,
    NonMember,
    Indeterminate,
}

/// Outcome of a basin membership test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasinVerdict {
    pub status: BasinStatus,
    /// Index of the iterate on which the decision was made.
    pub iterations_used: usize,
    /// `|z|` of that iterate.
    pub final_magnitude: f64,
    /// `sum |R^i(z0)|` up to the decision; only the series test fills it.
    pub partial_series_sum: f64,
}

impl BasinVerdict {
    fn new(status: BasinStatus, iterations_used: usize, z: Complex64, sum: f64) -> Self {
        Self {
            status,
            iterations_used,
            final_magnitude: z.norm(),
            partial_series_sum: sum,
        }
    }
}

/// `[z0, R(z0), …, R^k(z0)]` by repeated numeric evaluation. Once an iterate
/// overflows, it and every later entry are `inf + inf i`.
pub fn iterate_orbit(fm: &FamilyMember, z0: Complex64, k: usize) -> Vec<Complex64> {
    let inf = Complex64::new(f64::INFINITY, f64::INFINITY);
    let mut out = Vec::with_capacity(k + 1);
    let mut z = z0;
    for i in 0..=k {
        if !z.is_finite() {
            out.resize(k + 1, inf);
            break;
        }
        out.push(z);
        if i < k {
            z = fm.eval(z);
        }
    }
    out
}

/// Membership by the limit definition: the orbit enters `|z| < convergence_radius`.
///
/// NonMember when the orbit escapes or is captured by a nonzero attracting
/// fixed point; Indeterminate when neither happens within `max_iters`.
pub fn basin_member_limit(fm: &FamilyMember, z0: Complex64, cfg: &IterConfig) -> BasinVerdict {
    let escape = cfg.effective_escape_radius(fm);
    let attractors = fm.attracting_fixed_points();
    let mut z = z0;
    for i in 0..=cfg.max_iters {
        let mag = z.norm();
        if mag < cfg.convergence_radius {
            return BasinVerdict::new(BasinStatus::Member, i, z, 0.0);
        }
        if !mag.is_finite() || mag > escape {
            return BasinVerdict::new(BasinStatus::NonMember, i, z, 0.0);
        }
        if attractors
            .iter()
            .any(|p| (z - p).norm() < cfg.convergence_radius)
        {
            return BasinVerdict::new(BasinStatus::NonMember, i, z, 0.0);
        }
        if i < cfg.max_iters {
            z = fm.eval(z);
        }
    }
    BasinVerdict::new(BasinStatus::Indeterminate, cfg.max_iters, z, 0.0)
}

/// Certified geometric decay: `term < tail_eps` after three consecutive
/// ratios below 1/2.
#[derive(Debug, Default)]
pub(crate) struct GeometricTail {
    prev: Option<f64>,
    streak: u32,
}

impl GeometricTail {
    /// Feeds the next term; returns the latest ratio when the tail is certified.
    pub(crate) fn push(&mut self, term: f64, tail_eps: f64) -> Option<f64> {
        let mut ratio = None;
        if let Some(prev) = self.prev {
            if term < 0.5 * prev {
                self.streak += 1;
            } else {
                self.streak = 0;
            }
            ratio = Some(if prev > 0.0 { term / prev } else { 0.0 });
        }
        self.prev = Some(term);
        match ratio {
            Some(r) if self.streak >= 3 && term < tail_eps => Some(r),
            _ => None,
        }
    }
}

/// Membership by summability of `sum |R^i(z0)|`.
///
/// Member once the terms are certified geometrically small; NonMember on
/// escape or when the orbit settles on a nonzero value (terms do not tend
/// to zero); Indeterminate otherwise.
pub fn basin_member_series(fm: &FamilyMember, z0: Complex64, cfg: &IterConfig) -> BasinVerdict {
    let escape = cfg.effective_escape_radius(fm);
    let floor = fm.contraction_radius();
    let mut tail = GeometricTail::default();
    let mut sum = 0.0;
    let mut z = z0;
    for i in 0..=cfg.max_iters {
        let term = z.norm();
        if !term.is_finite() || term > escape {
            return BasinVerdict::new(BasinStatus::NonMember, i, z, sum);
        }
        sum += term;
        if term == 0.0 || tail.push(term, cfg.series_tail_eps).is_some() {
            return BasinVerdict::new(BasinStatus::Member, i, z, sum);
        }
        if i == cfg.max_iters {
            break;
        }
        let next = fm.eval(z);
        if term > floor && (next - z).norm() < cfg.convergence_radius {
            return BasinVerdict::new(BasinStatus::NonMember, i, z, sum);
        }
        z = next;
    }
    BasinVerdict::new(BasinStatus::Indeterminate, cfg.max_iters, z, sum)
}

/// All `2^(n+2)` solutions of `R_a(zeta) = w`, with multiplicity.
///
/// `zeta^(2^(n+1)) = u` with `u = 1 ± sqrt(a^2 + a w)/a` (principal root);
/// the `+` branch comes first, and within a branch roots are listed by
/// ascending argument in `[0, 2π)`.
pub fn preimages(fm: &FamilyMember, w: Complex64) -> Vec<Complex64> {
    let a = fm.a();
    let s = (a * a + a * w).sqrt() / a;
    let k = fm.index().half_degree();
    let mut out = Vec::with_capacity(fm.degree() as usize);
    for u in [1.0 + s, 1.0 - s] {
        roots_of_unity_scaled(u, k, &mut out);
    }
    out
}

/// Appends the `k` solutions of `x^k = u`.
fn roots_of_unity_scaled(u: Complex64, k: u64, out: &mut Vec<Complex64>) {
    if u.is_zero() {
        out.extend(std::iter::repeat_n(Complex64::zero(), k as usize));
        return;
    }
    let (r, theta) = u.to_polar();
    let theta = theta.rem_euclid(TAU);
    let radius = r.powf(1.0 / k as f64);
    for j in 0..k {
        let arg = (theta + TAU * j as f64) / k as f64;
        out.push(Complex64::from_polar(radius, arg));
    }
}

/// Pixel raster over a rectangle of the plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub center: Complex64,
    pub half_width: f64,
    pub width_px: usize,
    pub height_px: usize,
}

pub const MAX_GRID_PIXELS: usize = 100_000_000;

impl GridSpec {
    pub fn new(
        center: Complex64,
        half_width: f64,
        width_px: usize,
        height_px: usize,
    ) -> Result<Self> {
        let g = Self {
            center,
            half_width,
            width_px,
            height_px,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn square(center: Complex64, half_width: f64, px: usize) -> Result<Self> {
        Self::new(center, half_width, px, px)
    }

    pub fn validate(&self) -> Result<()> {
        let pixels = self.width_px.checked_mul(self.height_px);
        let ok = self.half_width > 0.0
            && self.half_width.is_finite()
            && self.center.is_finite()
            && self.width_px > 0
            && self.height_px > 0
            && pixels.is_some_and(|p| p <= MAX_GRID_PIXELS);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid grid {self:?}")))
        }
    }

    /// Half the vertical extent; pixels are square.
    pub fn half_height(&self) -> f64 {
        self.half_width * self.height_px as f64 / self.width_px as f64
    }

    pub fn pixel_count(&self) -> usize {
        self.width_px * self.height_px
    }

    /// Center of pixel `(x, y)`; `(0, 0)` is the top-left pixel.
    pub fn pixel_to_complex(&self, x: usize, y: usize) -> Complex64 {
        let pitch = 2.0 * self.half_width / self.width_px as f64;
        Complex64::new(
            self.center.re - self.half_width + (x as f64 + 0.5) * pitch,
            self.center.im + self.half_height() - (y as f64 + 0.5) * pitch,
        )
    }

    pub fn points(&self) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.height_px)
            .flat_map(move |y| (0..self.width_px).map(move |x| self.pixel_to_complex(x, y)))
    }
}

/// Applies `f` to every pixel center, row-major.
pub fn map_grid<T, F>(grid: &GridSpec, exec: Exec, f: F) -> Vec<T>
where
    T: Send + Default + Clone,
    F: Fn(Complex64) -> T + Sync + Send,
{
    let mut out = vec![T::default(); grid.pixel_count()];
    par::fill_rows(&mut out, grid.width_px, exec, |y, row| {
        for (x, slot) in row.iter_mut().enumerate() {
            *slot = f(grid.pixel_to_complex(x, y));
        }
    });
    out
}

/// Gray level for NonMember pixels.
pub const SHADE_NON_MEMBER: u8 = 0;
/// Gray level for Indeterminate pixels.
pub const SHADE_INDETERMINATE: u8 = 64;
/// Member pixels use `255 - min(iterations_used, 127)`, i.e. `128..=255`.
pub const SHADE_MEMBER_MIN: u8 = 128;

pub fn shade(v: &BasinVerdict) -> u8 {
    match v.status {
        BasinStatus::Member => 255 - v.iterations_used.min(127) as u8,
        BasinStatus::NonMember => SHADE_NON_MEMBER,
        BasinStatus::Indeterminate => SHADE_INDETERMINATE,
    }
}

/// An 8-bit grayscale raster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }
}

/// Escape-time render of the basin of 0: one limit-test verdict per pixel.
pub fn render_basin(
    fm: &FamilyMember,
    grid: &GridSpec,
    cfg: &IterConfig,
    exec: Exec,
) -> Result<GrayImage> {
    grid.validate()?;
    cfg.validate()?;
    // warm the attractor cache before fanning out
    fm.attracting_fixed_points();
    let pixels = map_grid(grid, exec, |z| shade(&basin_member_limit(fm, z, cfg)));
    Ok(GrayImage {
        width: grid.width_px,
        height: grid.height_px,
        pixels,
    })
}

/// Same raster as [`render_basin`], shaded by the series-test verdicts.
pub fn render_basin_series(
    fm: &FamilyMember,
    grid: &GridSpec,
    cfg: &IterConfig,
    exec: Exec,
) -> Result<GrayImage> {
    grid.validate()?;
    cfg.validate()?;
    fm.attracting_fixed_points();
    let pixels = map_grid(grid, exec, |z| shade(&basin_member_series(fm, z, cfg)));
    Ok(GrayImage {
        width: grid.width_px,
        height: grid.height_px,
        pixels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn r01() -> FamilyMember {
        FamilyMember::new(0, c(1.0, 0.0)).unwrap()
    }

    #[test]
    fn orbit_examples() {
        let fm = r01();
        assert_eq!(
            iterate_orbit(&fm, Complex64::zero(), 3),
            vec![Complex64::zero(); 4]
        );
        let orbit = iterate_orbit(&fm, c(2f64.sqrt(), 0.0), 2);
        assert_eq!(orbit.len(), 3);
        assert!(orbit[1].norm() < 1e-15 && orbit[2].norm() < 1e-15);
        assert_eq!(iterate_orbit(&fm, c(-1.0, 0.0), 3), vec![c(-1.0, 0.0); 4]);
    }

    #[test]
    fn orbit_overflow_is_infinite_not_a_crash() {
        let orbit = iterate_orbit(&r01(), c(10.0, 0.0), 20);
        assert_eq!(orbit.len(), 21);
        assert!(orbit[20].re.is_infinite());
    }

    #[test]
    fn limit_test_examples() {
        let fm = r01();
        let cfg = IterConfig::default();
        assert_eq!(
            basin_member_limit(&fm, c(0.1, 0.0), &cfg).status,
            BasinStatus::Member
        );
        let v = basin_member_limit(&fm, c(-1.0, 0.0), &cfg);
        assert_eq!(v.status, BasinStatus::NonMember);
        assert_eq!(v.iterations_used, 0);
        let v = basin_member_limit(&fm, c(10.0, 0.0), &cfg);
        assert_eq!(v.status, BasinStatus::NonMember);
        assert!(v.final_magnitude > cfg.escape_radius);
    }

    #[test]
    fn series_test_examples() {
        let fm = r01();
        let cfg = IterConfig::default();
        let v = basin_member_series(&fm, Complex64::zero(), &cfg);
        assert_eq!(v.status, BasinStatus::Member);
        assert_eq!(v.partial_series_sum, 0.0);

        // direct summation: 0.1 + 0.0199 + 7.91e-4 + 1.25e-6 + ...
        let mut z = c(0.1, 0.0);
        let mut oracle = 0.0;
        for _ in 0..12 {
            oracle += z.norm();
            z = z * z * z * z - 2.0 * z * z;
        }
        let v = basin_member_series(&fm, c(0.1, 0.0), &cfg);
        assert_eq!(v.status, BasinStatus::Member);
        assert!((v.partial_series_sum - oracle).abs() < 1e-12);
        assert!((v.partial_series_sum - 0.12069).abs() < 1e-5);

        assert_eq!(
            basin_member_series(&fm, c(-1.0, 0.0), &cfg).status,
            BasinStatus::NonMember
        );
        assert_eq!(
            basin_member_series(&fm, c(10.0, 0.0), &cfg).status,
            BasinStatus::NonMember
        );
    }

    #[test]
    fn tiny_iteration_budget_is_indeterminate() {
        let cfg = IterConfig {
            max_iters: 1,
            ..IterConfig::default()
        };
        let fm = r01();
        assert_eq!(
            basin_member_limit(&fm, c(0.5, 0.1), &cfg).status,
            BasinStatus::Indeterminate
        );
        assert_eq!(
            basin_member_series(&fm, c(0.5, 0.1), &cfg).status,
            BasinStatus::Indeterminate
        );
    }

    #[test]
    fn config_validation() {
        assert!(IterConfig::default().validate().is_ok());
        let bad = IterConfig {
            convergence_radius: 2.0,
            ..IterConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|p, q| p.re.total_cmp(&q.re).then(p.im.total_cmp(&q.im)));
        v
    }

    fn close(got: Vec<Complex64>, want: Vec<Complex64>) {
        assert_eq!(got.len(), want.len());
        for (g, w) in sorted(got).iter().zip(sorted(want)) {
            assert!((g - w).norm() < 1e-7, "{g} vs {w}");
        }
    }

    #[test]
    fn preimages_of_zero_and_minus_one() {
        let fm = r01();
        let r2 = 2f64.sqrt();
        let p = preimages(&fm, Complex64::zero());
        close(
            p.clone(),
            vec![c(r2, 0.0), c(-r2, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        );
        // + branch first: u = 2 gives ±sqrt2 by ascending argument
        assert!((p[0] - c(r2, 0.0)).norm() < 1e-15);
        assert!((p[1] - c(-r2, 0.0)).norm() < 1e-15);
        assert_eq!(p[2], Complex64::zero());

        let p = preimages(&fm, c(-1.0, 0.0));
        close(
            p,
            vec![c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(-1.0, 0.0)],
        );
    }

    #[test]
    fn preimages_map_back() {
        for n in 0..=3 {
            let fm = FamilyMember::new(n, c(0.8, 0.6)).unwrap();
            let w = c(0.3, -1.1);
            let p = preimages(&fm, w);
            assert_eq!(p.len() as u64, fm.degree());
            for z in p {
                assert!((fm.eval(z) - w).norm() / (1.0 + w.norm()) < 1e-10);
            }
        }
    }

    #[test]
    fn pixel_mapping() {
        let g = GridSpec::square(Complex64::zero(), 2.0, 4).unwrap();
        assert_eq!(g.pixel_to_complex(0, 0), c(-1.5, 1.5));
        assert_eq!(g.pixel_to_complex(3, 3), c(1.5, -1.5));
        let wide = GridSpec::new(c(1.0, 1.0), 2.0, 4, 2).unwrap();
        assert_eq!(wide.half_height(), 1.0);
        assert_eq!(wide.pixel_to_complex(0, 0), c(-0.5, 1.5));
        assert!(GridSpec::square(Complex64::zero(), 0.0, 4).is_err());
        assert!(GridSpec::new(Complex64::zero(), 1.0, 20_000, 20_000).is_err());
    }

    #[test]
    fn render_shades() {
        let fm = r01();
        // odd size so pixels sit exactly on 0 and -1
        let g = GridSpec::square(Complex64::zero(), 1.5, 3).unwrap();
        let img = render_basin(&fm, &g, &IterConfig::default(), Exec::Sequential).unwrap();
        assert_eq!(img.get(1, 1), 255);
        assert_eq!(g.pixel_to_complex(0, 1), c(-1.0, 0.0));
        assert_eq!(img.get(0, 1), SHADE_NON_MEMBER);
    }
}
