use nalgebra::DMatrix;
use proptest::prelude::*;

use quotient_curvature::cli::specfile;
use quotient_curvature::equivalence::{decide_equivalence, Outcome};
use quotient_curvature::oracle::{gamma_gram, reproducing_check};
use quotient_curvature::{
    quotient_curvature, DiskGrid64, HoloFun64, ModuleKind64, MultiplierPair64, QuotientSpec64, C64,
};

fn kind() -> impl Strategy<Value = ModuleKind64> {
    prop_oneof![
        Just(ModuleKind64::Hardy),
        (-0.9f64..3.0).prop_map(|a| ModuleKind64::weighted_bergman(a).unwrap()),
    ]
}

fn point(r_max: f64) -> impl Strategy<Value = C64> {
    (0.0..r_max, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| C64::from_polar(r, t))
}

fn coeff() -> impl Strategy<Value = C64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| C64::new(a, b))
}

// c (z - r_1) ... (z - r_k) with every |r_i| in [1.1, 3]
fn nonvanishing() -> impl Strategy<Value = HoloFun64> {
    (prop::collection::vec(point(1.0), 0..=2), 0.5f64..2.0).prop_map(|(dirs, scale)| {
        let mut f = HoloFun64::constant(C64::new(scale, 0.0));
        for d in dirs {
            let r = if d.norm() < 1e-9 { C64::new(1.1, 0.0) } else { d / d.norm() * (1.1 + 1.9 * d.norm()) };
            f = f.mul(&HoloFun64::polynomial(vec![-r, C64::new(1.0, 0.0)]));
        }
        f
    })
}

fn corona_pair() -> impl Strategy<Value = MultiplierPair64> {
    // a unit in the first slot keeps the pair well away from a common zero
    (nonvanishing(), prop::collection::vec(coeff(), 1..4))
        .prop_map(|(f, g)| MultiplierPair64::new(f, HoloFun64::polynomial(g)).unwrap())
}

fn spec(kind: ModuleKind64, theta: MultiplierPair64) -> QuotientSpec64 {
    QuotientSpec64::new(kind, theta).certify(1e-6).unwrap()
}

fn min_eigen(m: DMatrix<C64>) -> (f64, f64) {
    let eig = m.symmetric_eigen().eigenvalues;
    (eig.iter().copied().fold(f64::INFINITY, f64::min), eig.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

proptest! {
    #[test]
    fn kernel_gram_is_psd(kind in kind(), pts in prop::collection::vec(point(0.95), 6)) {
        let m = DMatrix::from_fn(6, 6, |i, j| kind.kernel_eval(pts[j], pts[i]).unwrap());
        let (lo, hi) = min_eigen(m);
        prop_assert!(lo >= -1e-10 * hi, "{lo} {hi}");
    }

    #[test]
    fn reproducing_property(kind in kind(), c in prop::collection::vec(coeff(), 1..=11), w in point(0.95)) {
        let f = HoloFun64::polynomial(c);
        prop_assert!(reproducing_check(kind, &f, w).unwrap() <= 1e-12);
    }

    #[test]
    fn spec_file_round_trip(
        a in prop::collection::vec(coeff(), 1..4),
        b in prop::collection::vec(coeff(), 1..4),
        alpha in -0.9f64..3.0,
        r_max in 0.1f64..0.95,
        n_r in 1usize..40,
    ) {
        let f = HoloFun64::polynomial(a);
        let g = HoloFun64::polynomial(b);
        let text = format!(
            "[moduleA]\nbase = hardy\ntheta1 = {f}\ntheta2 = {g}\n[moduleB]\nbase = bergman(alpha={alpha})\ntheta1 = {g}\ntheta2 = {f}\n[grid]\nr_max = {r_max}\nn_r = {n_r}\n"
        );
        let parsed = specfile::parse(&text).unwrap();
        let canon = parsed.to_canonical();
        let again = specfile::parse(&canon).unwrap();
        prop_assert_eq!(&again.to_canonical(), &canon);
        prop_assert_eq!(again.module_a.theta1, f);
        prop_assert_eq!(again.module_b.unwrap().base, ModuleKind64::weighted_bergman(alpha).unwrap());
        prop_assert_eq!(again.grid.r_max, Some(r_max));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn section_gram_is_psd(kind in kind(), theta in corona_pair(), pts in prop::collection::vec(point(0.9), 5)) {
        let s = spec(kind, theta);
        let g = gamma_gram(&s, &pts).unwrap();
        let m = DMatrix::from_fn(5, 5, |i, j| g[(i, j)]);
        let (lo, hi) = min_eigen(m);
        prop_assert!(lo >= -1e-9 * hi, "{lo} {hi}");
    }

    #[test]
    fn quotient_curvature_below_base(kind in kind(), theta in corona_pair(), z in point(0.9)) {
        let s = spec(kind, theta);
        prop_assert!(quotient_curvature(&s, z).unwrap() <= kind.base_curvature(z).unwrap() + 1e-12);
    }

    #[test]
    fn verdict_ignores_nonvanishing_factor(kind in kind(), theta in corona_pair(), f in nonvanishing()) {
        let a = spec(kind, theta.clone());
        let b = spec(kind, theta.times(&f).unwrap());
        let grid = DiskGrid64::new(0.8, 8, 16).unwrap();
        prop_assert_eq!(decide_equivalence(&a, &b, &grid, 1e-6).unwrap().outcome, Outcome::Isomorphic);
    }

    #[test]
    fn decisions_symmetric_and_reflexive(ka in kind(), kb in kind(), ta in corona_pair(), tb in corona_pair()) {
        let a = spec(ka, ta);
        let b = spec(kb, tb);
        let grid = DiskGrid64::new(0.8, 8, 16).unwrap();
        prop_assert_eq!(decide_equivalence(&a, &a, &grid, 1e-6).unwrap().outcome, Outcome::Isomorphic);
        let ab = decide_equivalence(&a, &b, &grid, 1e-6).unwrap();
        let ba = decide_equivalence(&b, &a, &grid, 1e-6).unwrap();
        prop_assert_eq!(ab.outcome, ba.outcome);
        prop_assert_eq!(ab.branch, ba.branch);
    }

    #[test]
    fn f32_curvature_tracks_f64(theta in corona_pair(), z in point(0.7)) {
        let s64 = spec(ModuleKind64::Hardy, theta.clone());
        let to32 = |f: &HoloFun64| {
            let p = f.as_polynomial().unwrap();
            quotient_curvature::HoloFun32::polynomial(
                p.coeffs().iter().map(|c| quotient_curvature::C32::new(c.re as f32, c.im as f32)).collect(),
            )
        };
        let pair32 = quotient_curvature::MultiplierPair32::new(to32(theta.theta1()), to32(theta.theta2())).unwrap();
        let s32 = quotient_curvature::QuotientSpec32::new(quotient_curvature::ModuleKind32::Hardy, pair32)
            .certify(1e-4)
            .unwrap();
        let k64 = quotient_curvature(&s64, z).unwrap();
        let k32 = quotient_curvature(&s32, quotient_curvature::C32::new(z.re as f32, z.im as f32)).unwrap();
        prop_assert!((k64 - k32 as f64).abs() <= 1e-3 * (1.0 + k64.abs()), "{k64} {k32}");
    }
}
