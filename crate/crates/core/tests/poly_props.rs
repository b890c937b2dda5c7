use basinkernel::dynamics::preimages;
use basinkernel::poly::{APoly, BiPolyZ, JsonTerm, Truncation};
use basinkernel::{Complex64, FamilyMember};
use num_traits::ToPrimitive;
use proptest::prelude::*;

fn apoly() -> impl Strategy<Value = APoly> {
    prop::collection::vec((0u64..4, -20i64..=20), 0..4).prop_map(APoly::from_coeffs)
}

fn bipoly(max_exp: u64) -> impl Strategy<Value = BiPolyZ> {
    prop::collection::vec((0..=max_exp, apoly()), 0..5).prop_map(BiPolyZ::from_terms)
}

fn small_complex(r: f64) -> impl Strategy<Value = Complex64> {
    (0.0..=r, 0.0..std::f64::consts::TAU).prop_map(|(m, t)| Complex64::from_polar(m, t))
}

/// Naive evaluation straight from the term map, no Horner.
fn eval_direct(p: &BiPolyZ, a: Complex64, z: Complex64) -> Complex64 {
    p.terms()
        .iter()
        .map(|(&e, c)| c.eval(a) * z.powu(e as u32))
        .sum()
}

/// `sum |c_e|(|a|) |z|^e` with every integer replaced by its magnitude.
fn abs_eval(p: &BiPolyZ, a: f64, z: f64) -> f64 {
    p.terms()
        .iter()
        .map(|(&e, c)| {
            let ca: f64 = c
                .coeffs()
                .iter()
                .map(|(&k, v)| v.magnitude().to_f64().unwrap() * a.powi(k as i32))
                .sum();
            ca * z.powi(e as i32)
        })
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn multiplication_distributes(f in bipoly(8), g in bipoly(8), h in bipoly(8)) {
        let lhs = f.mul(&g.add(&h)).unwrap();
        let rhs = f.mul(&g).unwrap().add(&f.mul(&h).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn addition_commutes_and_cancels(f in bipoly(8), g in bipoly(8)) {
        prop_assert_eq!(f.add(&g), g.add(&f));
        prop_assert!(f.sub(&f).is_zero());
    }

    #[test]
    fn composition_matches_evaluation(
        f in bipoly(8),
        g in bipoly(8),
        a in small_complex(1.5),
        z in small_complex(2.0),
    ) {
        let fg = f.compose(&g).unwrap();
        prop_assume!(fg.degree().unwrap_or(0) <= 64);
        let want = eval_direct(&f, a, eval_direct(&g, a, z));
        let got = fg.specialize(a).eval(z);
        // rounding is relative to the sum of term magnitudes
        let scale = 1.0 + abs_eval(&fg, a.norm(), z.norm());
        prop_assert!((got - want).norm() <= 1e-9 * scale, "got {got} want {want} scale {scale}");
    }

    #[test]
    fn truncation_commutes_with_products(f in bipoly(6), g in bipoly(6), t in 1u64..4) {
        let trunc = Truncation::BelowADegree(t);
        let full = f.mul(&g).unwrap().truncate_a(trunc);
        let cut = f.truncate_a(trunc).mul_trunc(&g.truncate_a(trunc), trunc).unwrap();
        prop_assert_eq!(full, cut);
    }

    #[test]
    fn json_round_trip(f in bipoly(1 << 20)) {
        let json = serde_json::to_string(&f).unwrap();
        let back: BiPolyZ = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(&back, &f);
        let terms: Vec<JsonTerm> = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(terms.len(), f.len());
    }

    #[test]
    fn preimages_form_a_full_fibre(n in 0u32..=2, a in small_complex(2.0), w in small_complex(3.0)) {
        prop_assume!(a.norm() > 0.1);
        let fm = FamilyMember::new(n, a).unwrap();
        let roots = preimages(&fm, w);
        prop_assert_eq!(roots.len() as u64, fm.degree());
        for z in &roots {
            prop_assert!((fm.eval(*z) - w).norm() / (1.0 + w.norm()) < 1e-8);
        }
    }
}
