//! Executable checks of the identities behind the construction, aggregated
//! into [`CheckReport`]s.
//!
//! Every check is a pure function of its inputs and a seed; reports are
//! sorted by check name, then family member, so two runs with the same seed
//! serialize to identical bytes regardless of thread count.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cuntz::{self, Word};
use crate::dynamics::{
    basin_member_limit, basin_member_series, preimages, BasinStatus, GridSpec, IterConfig,
};
use crate::error::Result;
use crate::family::{FamilyIndex, FamilyMember};
use crate::kernel::{self, eval_kernel, omega_series, KernelConfig, SeriesVerdict};
use crate::par::{self, Exec};
use crate::poly::{BiPolyZ, Truncation};

/// Parameters recorded with each report.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckParams {
    pub n: Option<u32>,
    pub a: Option<[f64; 2]>,
    pub seed: Option<u64>,
    pub tolerance: f64,
}

impl CheckParams {
    fn for_member(fm: &FamilyMember, seed: Option<u64>, tolerance: f64) -> Self {
        Self {
            n: Some(fm.n()),
            a: Some([fm.a().re, fm.a().im]),
            seed,
            tolerance,
        }
    }

    fn for_index(n: u32, tolerance: f64) -> Self {
        Self {
            n: Some(n),
            tolerance,
            ..Self::default()
        }
    }
}

/// Outcome of one check. `passed` holds exactly when `max_residual <= tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_name: String,
    pub params: CheckParams,
    pub samples: usize,
    pub max_residual: f64,
    pub passed: bool,
    /// Per-step residuals where a check has a natural sequence.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub residuals: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckReport {
    pub fn new(check_name: &str, params: CheckParams, samples: usize, max_residual: f64) -> Self {
        // NaN compares false, so it fails
        let passed = max_residual <= params.tolerance;
        Self {
            check_name: check_name.to_string(),
            params,
            samples,
            max_residual,
            passed,
            residuals: Vec::new(),
            note: None,
        }
    }

    fn with_residuals(mut self, residuals: Vec<f64>) -> Self {
        self.residuals = residuals;
        self
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Acceptance thresholds per check family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub cuntz_sums: f64,
    pub functional_eq: f64,
    pub kernel_expansion: f64,
    pub hermitian: f64,
    pub gram: f64,
    pub preimage: f64,
    pub continuity: f64,
    pub specialization: f64,
    /// Allowed disagreement fraction for the basin tests.
    pub basin_equivalence: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            cuntz_sums: 1e-9,
            functional_eq: 1e-9,
            kernel_expansion: 1e-6,
            hermitian: 1e-12,
            gram: 1e-9,
            preimage: 1e-8,
            continuity: 1e-12,
            specialization: 1e-10,
            basin_equivalence: 0.0,
        }
    }
}

impl Tolerances {
    /// The same tolerance for every numeric check.
    pub fn uniform(t: f64) -> Self {
        Self {
            cuntz_sums: t,
            functional_eq: t,
            kernel_expansion: t,
            hermitian: t,
            gram: t,
            preimage: t,
            continuity: t,
            specialization: t,
            basin_equivalence: t,
        }
    }
}

/// Sample counts and sizes for [`run_all`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub tolerances: Tolerances,
    pub iter: IterConfig,
    pub kernel: KernelConfig,
    pub cuntz_points: usize,
    pub kernel_pairs: usize,
    pub gram_sets: usize,
    pub gram_size: usize,
    pub preimage_points: usize,
    pub invariance_points: usize,
    pub grid_px: usize,
    pub grid_half_width: f64,
    pub expansion_max_len: usize,
    /// Longest canonical word in the good-form sweep (modulo `a^2`).
    pub good_form_len: usize,
    /// Longest canonical word checked with exact expansion at `n = 0`.
    pub exact_good_form_len: usize,
    pub duplicate_len: usize,
    pub specialization_samples: usize,
    pub continuity_words: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            tolerances: Tolerances::default(),
            iter: IterConfig::default(),
            kernel: KernelConfig::default(),
            cuntz_points: 200,
            kernel_pairs: 500,
            gram_sets: 50,
            gram_size: 6,
            preimage_points: 1000,
            invariance_points: 200,
            grid_px: 256,
            grid_half_width: 2.0,
            expansion_max_len: 4,
            good_form_len: 6,
            exact_good_form_len: 4,
            duplicate_len: 5,
            specialization_samples: 100,
            continuity_words: 20,
        }
    }
}

/// The default parameter corners `(n, a)`.
pub fn default_corners() -> Vec<FamilyMember> {
    [
        (0, Complex64::new(1.0, 0.0)),
        (0, Complex64::new(0.5, 0.0)),
        (0, Complex64::new(1.0, 0.3)),
        (1, Complex64::new(1.0, 0.0)),
        (2, Complex64::new(1.0, 0.0)),
    ]
    .into_iter()
    .map(|(n, a)| FamilyMember::new(n, a).expect("valid corner"))
    .collect()
}

/// A generator derived from the suite seed, a check tag and a family member,
/// so each check draws an independent, reproducible stream.
pub fn rng_for(seed: u64, tag: &str, fm: Option<&FamilyMember>) -> ChaCha8Rng {
    // FNV-1a over the tag and the member's parameters
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |bytes: &[u8]| {
        for &b in bytes {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    };
    feed(&seed.to_le_bytes());
    feed(tag.as_bytes());
    if let Some(fm) = fm {
        feed(&fm.n().to_le_bytes());
        feed(&fm.a().re.to_bits().to_le_bytes());
        feed(&fm.a().im.to_bits().to_le_bytes());
    }
    ChaCha8Rng::seed_from_u64(h)
}

/// Rejection-samples `count` points with a Member limit-test verdict from the
/// square `|re|, |im| <= half_width`. Returns fewer if `1000 * count` draws
/// are not enough.
pub fn sample_basin_points(
    fm: &FamilyMember,
    count: usize,
    half_width: f64,
    cfg: &IterConfig,
    rng: &mut impl Rng,
) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(count);
    for _ in 0..count.saturating_mul(1000) {
        if out.len() == count {
            break;
        }
        let z = Complex64::new(
            rng.gen_range(-half_width..=half_width),
            rng.gen_range(-half_width..=half_width),
        );
        if basin_member_limit(fm, z, cfg).status == BasinStatus::Member {
            out.push(z);
        }
    }
    out
}

fn sample_half_width(fm: &FamilyMember) -> f64 {
    fm.escape_bound()
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    // NaN propagates so that it fails the check
    values.into_iter().fold(0.0, |m, x| {
        if x.is_nan() || m.is_nan() {
            f64::NAN
        } else {
            m.max(x)
        }
    })
}

/// The three normalized preimage sums at `w`, compared with `(1, 1, 0)`:
/// `(1/M) sum 1`, `(1/M) sum zeta^(2^(n+1))`, `(1/M) sum zeta^(2^n)`.
pub fn cuntz_sums_residual(fm: &FamilyMember, w: Complex64) -> f64 {
    let roots = preimages(fm, w);
    let m = fm.degree() as f64;
    let alpha = fm.alpha();
    let count = roots.len() as f64 / m;
    let s_even: Complex64 = roots.iter().map(|z| crate::poly::cpow(*z, 2 * alpha)).sum();
    let s_odd: Complex64 = roots.iter().map(|z| crate::poly::cpow(*z, alpha)).sum();
    let dev = [
        (count - 1.0).abs(),
        (s_even / m - 1.0).norm(),
        (s_odd / m).norm(),
    ];
    max_of(dev)
}

pub fn check_cuntz_sums(fm: &FamilyMember, w: Complex64, tol: f64) -> CheckReport {
    CheckReport::new(
        "cuntz_sums",
        CheckParams::for_member(fm, None, tol),
        1,
        cuntz_sums_residual(fm, w),
    )
}

/// Partial sums of `sum_v b_v(z) conj(b_v(w))` over canonical words of length
/// `1..=max_len`, each compared with `K(z, w)`.
pub fn kernel_expansion_residuals(
    fm: &FamilyMember,
    z: Complex64,
    w: Complex64,
    max_len: usize,
    cfg: &KernelConfig,
) -> Result<Vec<f64>> {
    let k = eval_kernel(fm, z, w, cfg).into_result()?.value;
    let words = cuntz::enumerate_canonical(max_len)?;
    let mut residuals = Vec::with_capacity(max_len);
    let mut partial = Complex64::new(0.0, 0.0);
    let mut len = 0;
    for v in &words {
        if v.len() > len {
            if len >= 1 {
                residuals.push((partial - k).norm() / k.norm());
            }
            len = v.len();
        }
        partial += cuntz::basis_eval(fm, v, z) * cuntz::basis_eval(fm, v, w).conj();
    }
    residuals.push((partial - k).norm() / k.norm());
    Ok(residuals)
}

/// Crude bound on the terms omitted after length `max_len`: every omitted
/// word carries the factor `(R^max_len(z) conj R^max_len(w))^alpha` times a
/// product bounded by `K(|z|, |w|)`-like growth, estimated here by
/// `|R^L(z)|^alpha |R^L(w)|^alpha * K(z,z)^(1/2) K(w,w)^(1/2)`.
pub fn expansion_tail_estimate(
    fm: &FamilyMember,
    z: Complex64,
    w: Complex64,
    max_len: usize,
    cfg: &KernelConfig,
) -> f64 {
    let (mut zi, mut wi) = (z, w);
    for _ in 0..max_len {
        zi = fm.eval(zi);
        wi = fm.eval(wi);
    }
    let kz = eval_kernel(fm, z, z, cfg).value.re;
    let kw = eval_kernel(fm, w, w, cfg).value.re;
    let a = fm.alpha() as i32;
    zi.norm().powi(a) * wi.norm().powi(a) * (kz * kw).sqrt()
}

pub fn check_kernel_expansion(
    fm: &FamilyMember,
    z: Complex64,
    w: Complex64,
    max_len: usize,
    cfg: &KernelConfig,
    tol: f64,
) -> CheckReport {
    let params = CheckParams::for_member(fm, None, tol);
    match kernel_expansion_residuals(fm, z, w, max_len, cfg) {
        Ok(seq) => {
            let last = *seq.last().unwrap_or(&f64::NAN);
            let tail = expansion_tail_estimate(fm, z, w, max_len, cfg);
            let monotone = is_decreasing_to_floor(&seq, EXPANSION_FLOOR);
            // a sequence that stops shrinking fails regardless of its last value
            let residual = if monotone { last } else { f64::INFINITY };
            CheckReport::new("kernel_expansion", params, 1, residual)
                .with_residuals(seq)
                .with_note(format!(
                    "z={z} w={w} max_len={max_len} tail_estimate={tail:e} decreasing={monotone}"
                ))
        }
        Err(e) => {
            CheckReport::new("kernel_expansion", params, 0, f64::NAN).with_note(e.to_string())
        }
    }
}

/// Residuals at or below this are rounding noise in a relative error of
/// values near 1, so the expansion sequence may stall there.
pub const EXPANSION_FLOOR: f64 = 1e-15;

/// Every step strictly decreases, except that once both neighbours are at or
/// below `floor` the sequence may stall.
pub fn is_decreasing_to_floor(seq: &[f64], floor: f64) -> bool {
    seq.windows(2)
        .all(|p| p[1] < p[0] || (p[0] <= floor && p[1] <= floor))
}

/// Disagreement counts between the limit test, the series test and the
/// diagonal-summability series over a grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EquivalenceTally {
    pub compared: usize,
    pub excluded: usize,
    pub disagreements: usize,
}

pub fn basin_equivalence_tally(
    fm: &FamilyMember,
    grid: &GridSpec,
    cfg: &IterConfig,
    kcfg: &KernelConfig,
    exec: Exec,
) -> EquivalenceTally {
    fm.attracting_fixed_points();
    // 0 = excluded, 1 = agree, 2 = disagree
    let cells: Vec<u8> = crate::dynamics::map_grid(grid, exec, |z| {
        let limit = basin_member_limit(fm, z, cfg).status;
        let series = basin_member_series(fm, z, cfg).status;
        let omega = match omega_series(fm, z, kcfg).verdict {
            SeriesVerdict::Converges => BasinStatus::Member,
            SeriesVerdict::Diverges => BasinStatus::NonMember,
            SeriesVerdict::Indeterminate => BasinStatus::Indeterminate,
        };
        if [limit, series, omega].contains(&BasinStatus::Indeterminate) {
            0
        } else if limit == series && series == omega {
            1
        } else {
            2
        }
    });
    let mut t = EquivalenceTally::default();
    for c in cells {
        match c {
            0 => t.excluded += 1,
            1 => t.compared += 1,
            _ => {
                t.compared += 1;
                t.disagreements += 1;
            }
        }
    }
    t
}

pub fn check_basin_equivalence(
    fm: &FamilyMember,
    grid: &GridSpec,
    cfg: &IterConfig,
    tol: f64,
    exec: Exec,
) -> CheckReport {
    let t = basin_equivalence_tally(fm, grid, cfg, &KernelConfig::default(), exec);
    let fraction = if t.compared == 0 {
        0.0
    } else {
        t.disagreements as f64 / t.compared as f64
    };
    CheckReport::new(
        "basin_equivalence",
        CheckParams::for_member(fm, None, tol),
        t.compared,
        fraction,
    )
    .with_note(format!(
        "{}x{} grid, {} disagreements, {} indeterminate excluded",
        grid.width_px, grid.height_px, t.disagreements, t.excluded
    ))
}

/// Smallest eigenvalue of the Hermitian Gram matrix `[K(z_i, z_j)]`, or
/// `None` if some entry did not converge.
pub fn gram_min_eigenvalue(
    fm: &FamilyMember,
    points: &[Complex64],
    cfg: &KernelConfig,
) -> Option<f64> {
    let n = points.len();
    let mut entries = Vec::with_capacity(n * n);
    for &zi in points {
        for &zj in points {
            entries.push(eval_kernel(fm, zi, zj, cfg).into_result().ok()?.value);
        }
    }
    let m = DMatrix::from_row_slice(n, n, &entries);
    // symmetrize away rounding so the Hermitian solver sees a Hermitian input
    let h = (&m + m.adjoint()).map(|x| x * 0.5);
    h.symmetric_eigenvalues().iter().copied().reduce(f64::min)
}

fn member_checks(fm: &FamilyMember, cfg: &SuiteConfig, exec: Exec) -> Vec<CheckReport> {
    let tol = &cfg.tolerances;
    let seed = Some(cfg.seed);
    let hw = sample_half_width(fm);
    let kcfg = &cfg.kernel;
    let mut out = Vec::new();

    // preimage sums
    let mut rng = rng_for(cfg.seed, "cuntz_sums", Some(fm));
    let ws = sample_basin_points(fm, cfg.cuntz_points, hw, &cfg.iter, &mut rng);
    let res = par::map_slice(&ws, exec, |&w| cuntz_sums_residual(fm, w));
    out.push(CheckReport::new(
        "cuntz_sums",
        CheckParams::for_member(fm, seed, tol.cuntz_sums),
        ws.len(),
        max_of(res),
    ));

    // kernel identities on random basin pairs
    let mut rng = rng_for(cfg.seed, "kernel_pairs", Some(fm));
    let pts = sample_basin_points(fm, 2 * cfg.kernel_pairs, hw, &cfg.iter, &mut rng);
    let pairs: Vec<(Complex64, Complex64)> = pts.chunks_exact(2).map(|p| (p[0], p[1])).collect();
    let fe = par::map_slice(&pairs, exec, |&(z, w)| {
        kernel::check_functional_eq(fm, z, w, kcfg).unwrap_or(f64::INFINITY)
    });
    let not_converged = fe.iter().filter(|r| r.is_infinite()).count();
    let mut report = CheckReport::new(
        "kernel_functional_eq",
        CheckParams::for_member(fm, seed, tol.functional_eq),
        pairs.len(),
        max_of(fe),
    );
    if not_converged > 0 {
        report = report.with_note(format!("{not_converged} pairs did not converge"));
    }
    out.push(report);

    let herm = par::map_slice(&pairs, exec, |&(z, w)| {
        let kzw = eval_kernel(fm, z, w, kcfg);
        let kwz = eval_kernel(fm, w, z, kcfg);
        if !(kzw.converged && kwz.converged) {
            return f64::INFINITY;
        }
        (kzw.value - kwz.value.conj()).norm() / kzw.value.norm()
    });
    out.push(CheckReport::new(
        "kernel_hermitian",
        CheckParams::for_member(fm, seed, tol.hermitian),
        pairs.len(),
        max_of(herm),
    ));

    // diagonal: real, positive, >= 1
    let diag = par::map_slice(&pts, exec, |&z| {
        let k = eval_kernel(fm, z, z, kcfg);
        if !k.converged {
            return f64::INFINITY;
        }
        let v = k.value;
        f64::max(v.im.abs() / v.norm(), (1.0 - v.re).max(0.0))
    });
    out.push(CheckReport::new(
        "kernel_diagonal",
        CheckParams::for_member(fm, seed, tol.hermitian),
        pts.len(),
        max_of(diag),
    ));

    // Gram positivity
    let mut rng = rng_for(cfg.seed, "gram", Some(fm));
    let sets: Vec<Vec<Complex64>> = (0..cfg.gram_sets)
        .map(|_| sample_basin_points(fm, cfg.gram_size, hw, &cfg.iter, &mut rng))
        .collect();
    let eig = par::map_slice(&sets, exec, |s| {
        gram_min_eigenvalue(fm, s, kcfg).map_or(f64::INFINITY, |e| (-e).max(0.0))
    });
    out.push(CheckReport::new(
        "kernel_gram_psd",
        CheckParams::for_member(fm, seed, tol.gram),
        sets.len(),
        max_of(eig),
    ));

    // preimages: round trip on arbitrary w, complete invariance on basin w
    let mut rng = rng_for(cfg.seed, "preimage_roundtrip", Some(fm));
    let ws: Vec<Complex64> = (0..cfg.preimage_points)
        .map(|_| Complex64::new(rng.gen_range(-3.0..=3.0), rng.gen_range(-3.0..=3.0)))
        .collect();
    let rt = par::map_slice(&ws, exec, |&w| {
        max_of(
            preimages(fm, w)
                .into_iter()
                .map(|z| (fm.eval(z) - w).norm() / (1.0 + w.norm())),
        )
    });
    out.push(CheckReport::new(
        "preimage_roundtrip",
        CheckParams::for_member(fm, seed, tol.preimage),
        ws.len(),
        max_of(rt),
    ));

    let mut rng = rng_for(cfg.seed, "complete_invariance", Some(fm));
    let ws = sample_basin_points(fm, cfg.invariance_points, hw, &cfg.iter, &mut rng);
    let bad = par::map_slice(&ws, exec, |&w| {
        preimages(fm, w)
            .into_iter()
            .filter(|&z| basin_member_limit(fm, z, &cfg.iter).status != BasinStatus::Member)
            .count()
    });
    let total: usize = bad.iter().sum();
    out.push(
        CheckReport::new(
            "complete_invariance",
            CheckParams::for_member(fm, seed, 0.0),
            ws.len(),
            total as f64 / (ws.len().max(1) as f64 * fm.degree() as f64),
        )
        .with_note(format!("{total} preimages of basin points left the basin")),
    );

    // orthonormal expansion at small points
    out.push(check_kernel_expansion(
        fm,
        Complex64::new(0.1, 0.0),
        Complex64::new(0.1, 0.0),
        cfg.expansion_max_len,
        kcfg,
        tol.kernel_expansion,
    ));

    // basin characterizations
    match GridSpec::square(Complex64::new(0.0, 0.0), cfg.grid_half_width, cfg.grid_px) {
        Ok(grid) => out.push(check_basin_equivalence(
            fm,
            &grid,
            &cfg.iter,
            tol.basin_equivalence,
            exec,
        )),
        Err(e) => out.push(
            CheckReport::new(
                "basin_equivalence",
                CheckParams::for_member(fm, None, 0.0),
                0,
                f64::NAN,
            )
            .with_note(e.to_string()),
        ),
    }
    out
}

fn exact(ok: bool) -> f64 {
    if ok {
        0.0
    } else {
        1.0
    }
}

/// `alpha_k(a) = (-2)^k binom(2^n, k) a^(2^n)` placed at
/// `z^(2^(2n+2) - 2^(n+1) k + shift)`.
pub fn closed_form_two_letter(index: FamilyIndex, shift: u64) -> BiPolyZ {
    use crate::poly::APoly;
    use num_bigint::BigInt;
    let m = index.alpha();
    let mut binom = BigInt::from(1);
    let mut terms = Vec::new();
    for k in 0..=m {
        let coeff = &binom * BigInt::from(-2).pow(k as u32);
        let z_exp = 4 * m * m - 2 * m * k + shift;
        terms.push((z_exp, APoly::monomial(coeff, m)));
        binom = binom * BigInt::from(m - k) / BigInt::from(k + 1);
    }
    BiPolyZ::from_terms(terms)
}

fn index_checks(n: u32, cfg: &SuiteConfig, exec: Exec) -> Vec<CheckReport> {
    let index = FamilyIndex::new(n).expect("validated index");
    let tol = &cfg.tolerances;
    let mut out = Vec::new();
    let word = |s: &str| s.parse::<Word>().expect("literal word");

    // closed forms for S_0 S_1 1 and S_1 S_1 1
    let ok = [("01", 0), ("11", index.alpha())]
        .iter()
        .all(|&(w, shift)| {
            cuntz::basis_vector(index, &word(w)).map(|b| b.poly)
                == Ok(closed_form_two_letter(index, shift))
        });
    out.push(CheckReport::new(
        "basis_closed_form",
        CheckParams::for_index(n, 0.0),
        2,
        exact(ok),
    ));

    // S_1 f = z^alpha S_0 f on short basis vectors; at n = 2 a length-3
    // vector already has thousands of terms and S_1 of it takes seconds
    let words = cuntz::enumerate_canonical(if n >= 2 { 2 } else { 3 }).expect("short words");
    let fact = par::map_slice(&words, exec, |v| {
        let f = cuntz::basis_poly(index, v, Truncation::Exact)?;
        let lhs = cuntz::apply_s1(index, &f)?;
        let rhs = cuntz::apply_s0(index, &f)?.shift(index.alpha())?;
        Ok::<bool, crate::Error>(lhs == rhs)
    });
    let bad = fact.iter().filter(|r| !matches!(r, Ok(true))).count();
    out.push(CheckReport::new(
        "s1_factorization",
        CheckParams::for_index(n, 0.0),
        words.len(),
        bad as f64,
    ));

    // good form modulo a^2 for all canonical words, with closure under S_0, S_1
    let trunc = Truncation::BelowADegree(2);
    let words = cuntz::enumerate_canonical(cfg.good_form_len).expect("word cap");
    let gf = par::map_slice(&words, exec, |v| good_form_violations(index, v, trunc));
    let bad: usize = gf.iter().sum();
    out.push(
        CheckReport::new(
            "good_form_mod_a2",
            CheckParams::for_index(n, 0.0),
            words.len(),
            bad as f64,
        )
        .with_note(format!(
            "canonical words up to length {}",
            cfg.good_form_len
        )),
    );

    if n == 0 {
        let words = cuntz::enumerate_canonical(cfg.exact_good_form_len).expect("word cap");
        let gf = par::map_slice(&words, exec, |v| {
            good_form_violations(index, v, Truncation::Exact)
        });
        let bad: usize = gf.iter().sum();
        out.push(
            CheckReport::new(
                "good_form_exact",
                CheckParams::for_index(n, 0.0),
                words.len(),
                bad as f64,
            )
            .with_note(format!(
                "canonical words up to length {}",
                cfg.exact_good_form_len
            )),
        );

        // b_(v,0) = b_v
        let all = all_words(cfg.duplicate_len);
        let dup = par::map_slice(&all, exec, |v| {
            let ext = v.pushed(0).expect("below cap");
            let (p, q) = (
                cuntz::basis_poly(index, v, Truncation::Exact),
                cuntz::basis_poly(index, &ext, Truncation::Exact),
            );
            matches!((p, q), (Ok(p), Ok(q)) if p == q)
        });
        let bad = dup.iter().filter(|ok| !**ok).count();
        out.push(CheckReport::new(
            "duplicate_law",
            CheckParams::for_index(n, 0.0),
            all.len(),
            bad as f64,
        ));
    }

    // exact-then-specialize against the numeric S-word construction
    if n <= 1 {
        let mut rng = rng_for(cfg.seed, &format!("specialization_n{n}"), None);
        let samples: Vec<(Word, Complex64)> = (0..cfg.specialization_samples)
            .map(|_| {
                let len = rng.gen_range(0..=4usize);
                let letters = (0..len).map(|_| rng.gen_range(0..=1u8)).collect();
                let a = Complex64::from_polar(
                    rng.gen_range(0.25..2.0),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                );
                (Word::new(letters).expect("short word"), a)
            })
            .collect();
        let res = par::map_slice(&samples, exec, |(v, a)| {
            specialization_residual(index, v, *a)
        });
        out.push(CheckReport::new(
            "specialization_commutes",
            CheckParams {
                seed: Some(cfg.seed),
                ..CheckParams::for_index(n, tol.specialization)
            },
            samples.len(),
            max_of(res),
        ));
    }
    out
}

/// Every word of length `0..=max_len`.
fn all_words(max_len: usize) -> Vec<Word> {
    (0..=max_len)
        .flat_map(|len| {
            (0u32..(1 << len)).map(move |bits| {
                Word::new((0..len).map(|i| ((bits >> i) & 1) as u8).collect()).expect("below cap")
            })
        })
        .collect()
}

/// Counts good-form failures for `b_v`, `S_0 b_v` and `S_1 b_v` (closure is
/// only required when `b_v` itself has good form). The two simple vectors
/// `1` and `z^alpha` are expected to fail and are not counted.
pub fn good_form_violations(index: FamilyIndex, v: &Word, trunc: Truncation) -> usize {
    let Ok(f) = cuntz::basis_poly(index, v, trunc) else {
        return 1;
    };
    let simple = f == BiPolyZ::one().truncate_a(trunc)
        || f == BiPolyZ::z_pow(index.alpha()).truncate_a(trunc);
    if simple {
        return usize::from(v.len() >= 2 && v.letters()[..v.len() - 1].contains(&1));
    }
    let mut bad = usize::from(!cuntz::good_form_poly(&f));
    if bad == 0 {
        for g in [
            cuntz::apply_s0_trunc(index, &f, trunc),
            cuntz::apply_s1_trunc(index, &f, trunc),
        ] {
            bad += usize::from(!g.is_ok_and(|g| cuntz::good_form_poly(&g)));
        }
    }
    bad
}

/// Max coefficient deviation between the exact vector specialized at `a` and
/// the numeric S-word construction, relative to the largest coefficient.
pub fn specialization_residual(index: FamilyIndex, v: &Word, a: Complex64) -> f64 {
    let Ok(exact) = cuntz::basis_poly(index, v, Truncation::Exact) else {
        return f64::NAN;
    };
    let exact = exact.specialize(a);
    let numeric = cuntz::basis_poly_numeric(index, v, a);
    let scale = max_of(exact.terms().values().map(|c| c.norm())).max(f64::MIN_POSITIVE);
    let exps = exact.terms().keys().chain(numeric.terms().keys());
    max_of(exps.map(|&e| (exact.coeff(e) - numeric.coeff(e)).norm() / scale))
}

fn continuity_checks(cfg: &SuiteConfig) -> Vec<CheckReport> {
    let tol = &cfg.tolerances;
    let index = FamilyIndex::new(0).expect("n = 0");
    let mut out = Vec::new();
    let one = Complex64::new(1.0, 0.0);

    let seq: Vec<Complex64> = (1..=10).map(|k| one + 1.0 / f64::from(k)).collect();
    let v: Word = "01".parse().expect("literal word");
    let res = match cuntz::continuity_modulus(index, &v, &seq, one, 1.0) {
        Ok(d) => max_of(
            d.iter()
                .zip(1..)
                .map(|(dk, k)| (dk - 3.0 / f64::from(k)).abs()),
        ),
        Err(_) => f64::NAN,
    };
    out.push(CheckReport::new(
        "continuity_harmonic",
        CheckParams::for_index(0, tol.continuity),
        seq.len(),
        res,
    ));

    // geometric approach a_k = a_lim (1 + 10^-k): distances must shrink
    let mut rng = rng_for(cfg.seed, "continuity_geometric", None);
    let mut steps = 0;
    let mut violations = 0;
    for _ in 0..cfg.continuity_words {
        let len = rng.gen_range(1..=4usize);
        let v = Word::new((0..len).map(|_| rng.gen_range(0..=1u8)).collect()).expect("short");
        let n = rng.gen_range(0..=1u32);
        let a_lim = Complex64::from_polar(
            rng.gen_range(0.5..1.5),
            rng.gen_range(0.0..std::f64::consts::TAU),
        );
        let path = geometric_path(a_lim, 8);
        let Ok(d) =
            cuntz::continuity_modulus(FamilyIndex::new(n).expect("n <= 1"), &v, &path, a_lim, 1.0)
        else {
            violations += 1;
            continue;
        };
        steps += d.len() - 1;
        violations += count_non_decreasing(&d);
    }
    out.push(
        CheckReport::new(
            "continuity_geometric",
            CheckParams {
                seed: Some(cfg.seed),
                ..CheckParams::for_index(0, 0.0)
            },
            cfg.continuity_words,
            violations as f64,
        )
        .with_note(format!("{steps} steps over {} words", cfg.continuity_words)),
    );
    out
}

/// `a_lim (1 + 10^-k)` for `k = 1..=steps`.
pub fn geometric_path(a_lim: Complex64, steps: u32) -> Vec<Complex64> {
    (1..=steps)
        .map(|k| a_lim * (1.0 + 10f64.powi(-(k as i32))))
        .collect()
}

/// Steps where a distance sequence fails to shrink; an identically zero
/// sequence (constant profile) has none.
pub fn count_non_decreasing(d: &[f64]) -> usize {
    d.windows(2)
        .filter(|p| !(p[1] < p[0] || (p[0] == 0.0 && p[1] == 0.0)))
        .count()
}

/// Runs every check over `members` plus the symbolic checks for each distinct
/// family index among them. Never aborts early; reports are sorted by check
/// name, then `n`, then `a`.
pub fn run_all(members: &[FamilyMember], cfg: &SuiteConfig, exec: Exec) -> Vec<CheckReport> {
    if members.is_empty() {
        return Vec::new();
    }
    let mut out: Vec<CheckReport> = members
        .iter()
        .flat_map(|fm| member_checks(fm, cfg, exec))
        .collect();
    let mut indices: Vec<u32> = members.iter().map(FamilyMember::n).collect();
    indices.sort_unstable();
    indices.dedup();
    for n in indices {
        out.extend(index_checks(n, cfg, exec));
    }
    out.extend(continuity_checks(cfg));
    out.sort_by(|x, y| {
        x.check_name
            .cmp(&y.check_name)
            .then(x.params.n.cmp(&y.params.n))
            .then_with(|| {
                let key = |r: &CheckReport| r.params.a.unwrap_or([0.0, 0.0]);
                let (p, q) = (key(x), key(y));
                p[0].total_cmp(&q[0]).then(p[1].total_cmp(&q[1]))
            })
    });
    out
}

pub fn all_passed(reports: &[CheckReport]) -> bool {
    reports.iter().all(|r| r.passed)
}

/// One CSV row per report.
pub fn reports_to_csv(reports: &[CheckReport]) -> String {
    let mut s = String::from("check_name,n,a_re,a_im,seed,tolerance,samples,max_residual,passed\n");
    let opt = |x: Option<String>| x.unwrap_or_default();
    for r in reports {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{:e},{},{:e},{}",
            r.check_name,
            opt(r.params.n.map(|n| n.to_string())),
            opt(r.params.a.map(|a| a[0].to_string())),
            opt(r.params.a.map(|a| a[1].to_string())),
            opt(r.params.seed.map(|x| x.to_string())),
            r.params.tolerance,
            r.samples,
            r.max_residual,
            r.passed
        );
    }
    s
}

pub fn reports_to_json(reports: &[CheckReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports serialize")
}
