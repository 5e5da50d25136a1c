use conflat::calculus::{dirac_fd, dirac_squared_fd, laplace_fd, FdScheme, Side};
use conflat::clifford::{MultiVector, VectorN};
use conflat::conformal::{pull_back_monogenic, MoebiusMap};
use conflat::kernels_euclid::{cauchy_g, green_h};
use conflat::kernels_periodic::{cyl_cauchy, cyl_cauchy_reg, cyl_green_auto};
use conflat::kernels_pin::{proj_cauchy, proj_green, KernelForm};
use conflat::lattice::{
    moebius_sgn, shell, BundleCharacter, CoeffVector, Lattice, ManifoldSpec, SignVariant,
};
use conflat::quadrature::{cauchy_integral, green_integral, order_of_zero, Hypersurface};
use proptest::prelude::*;

fn vec_of(n: usize, lo: f64, hi: f64) -> impl Strategy<Value = VectorN> {
    proptest::collection::vec(lo..hi, n).prop_map(VectorN)
}

fn mv_of(n: usize) -> impl Strategy<Value = MultiVector> {
    proptest::collection::vec(-1.0f64..1.0, 1 << n).prop_map(move |c| MultiVector::from_coeffs(n, c).unwrap())
}

fn orbit_gap(z: &VectorN, k: usize) -> f64 {
    let mut r = z.clone();
    for j in 0..k {
        r.0[j] -= r.0[j].round();
    }
    r.norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_is_associative((a, b, c) in (1usize..=5).prop_flat_map(|n| (mv_of(n), mv_of(n), mv_of(n)))) {
        let lhs = &(&a * &b) * &c;
        let rhs = &a * &(&b * &c);
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * (1.0 + lhs.norm()));
    }

    #[test]
    fn reversion_reverses_products((a, b) in (1usize..=5).prop_flat_map(|n| (mv_of(n), mv_of(n)))) {
        let lhs = (&a * &b).reversion();
        let rhs = &b.reversion() * &a.reversion();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
    }

    #[test]
    fn vectors_square_to_minus_norm(x in (1usize..=5).prop_flat_map(|n| vec_of(n, -3.0, 3.0))) {
        let xm = x.to_multivector();
        let sq = &xm * &xm;
        prop_assert!(sq.max_abs_diff(&MultiVector::scalar(x.dim(), -x.norm_sq())) <= 1e-12 * (1.0 + x.norm_sq()));
    }

    #[test]
    fn moebius_composition(t1 in vec_of(3, -1.0, 1.0), t2 in vec_of(3, -1.0, 1.0),
                           lambda in 0.3f64..3.0, x in vec_of(3, -1.0, 1.0)) {
        let inversion = MoebiusMap::new(
            MultiVector::zero(3),
            MultiVector::scalar(3, 1.0),
            MultiVector::scalar(3, 1.0),
            MultiVector::zero(3),
        ).unwrap();
        let psi1 = inversion.compose(&MoebiusMap::translation(&t1));
        let psi2 = MoebiusMap::dilation(3, lambda).unwrap().compose(&MoebiusMap::translation(&t2));
        prop_assume!((&x + &t1).norm() > 0.2);
        let stepwise = psi2.apply(&psi1.apply(&x).unwrap()).unwrap();
        let direct = psi2.compose(&psi1).apply(&x).unwrap();
        prop_assert!((&stepwise - &direct).norm() <= 1e-9 * (1.0 + direct.norm()));
    }

    #[test]
    fn pull_back_stays_monogenic(t in vec_of(3, -0.5, 0.5), lambda in 0.5f64..2.0, x in vec_of(3, -1.0, 1.0)) {
        let src = VectorN(vec![0.0, 0.0, 6.0]);
        let f = |z: &VectorN| cauchy_g(z, &src).unwrap().to_multivector();
        let psi = MoebiusMap::dilation(3, lambda).unwrap().compose(&MoebiusMap::translation(&t));
        let pulled = |z: &VectorN| pull_back_monogenic(&psi, f, z, 1.0).unwrap();
        prop_assert!(dirac_fd(pulled, &x, &FdScheme::default(), Side::Left).norm() <= 1e-6);
    }

    #[test]
    fn dirac_squared_is_minus_laplacian(c in proptest::collection::vec(-1.0f64..1.0, 4), x in vec_of(3, -1.0, 1.0)) {
        let f = |z: &VectorN| {
            let mut v = MultiVector::scalar(3, c[0] * z[0] * z[0] * z[1] + c[1] * z[2].powi(3));
            v += &MultiVector::generator(3, 1).scale(c[2] * z[0] * z[2] + c[3] * z[1] * z[1]);
            v
        };
        let s = FdScheme::default();
        let d2 = dirac_squared_fd(f, &x, &s, Side::Left);
        let lap = laplace_fd(f, &x, &s);
        prop_assert!((&d2 + &lap).norm() <= 1e-5);
    }

    #[test]
    fn euclidean_kernels_scale(x in vec_of(4, -2.0, 2.0), y in vec_of(4, -2.0, 2.0), lambda in 0.2f64..5.0) {
        prop_assume!((&x - &y).norm() > 0.1);
        let g = cauchy_g(&x, &y).unwrap();
        let gl = cauchy_g(&x.scale(lambda), &y.scale(lambda)).unwrap();
        prop_assert!((&gl - &g.scale(lambda.powi(-3))).norm() <= 1e-13 * g.norm().max(1.0) * lambda.powi(-3).max(1.0));
        let h = green_h(&x, &y).unwrap();
        let hl = green_h(&x.scale(lambda), &y.scale(lambda)).unwrap();
        prop_assert!((hl - h * lambda.powi(-2)).abs() <= 1e-12 * h.abs() * lambda.powi(-2).max(1.0));
    }

    #[test]
    fn sum_parity_is_a_character(a in proptest::collection::vec(-20i64..20, 3), b in proptest::collection::vec(-20i64..20, 3)) {
        let (a, b) = (CoeffVector(a), CoeffVector(b));
        let lhs = moebius_sgn(&a.add(&b), SignVariant::SumParity);
        prop_assert_eq!(lhs, moebius_sgn(&a, SignVariant::SumParity) * moebius_sgn(&b, SignVariant::SumParity));
    }

    #[test]
    fn canonical_rep_is_idempotent(x in vec_of(4, -5.0, 5.0), kind in 0usize..3) {
        let m = match kind {
            0 => ManifoldSpec::cylinder(Lattice::standard(4, 2).unwrap(), BundleCharacter::trivial()).unwrap(),
            1 => ManifoldSpec::projective(Lattice::standard(4, 1).unwrap(), 3, BundleCharacter::trivial()).unwrap(),
            _ => ManifoldSpec::moebius_strip(Lattice::standard(4, 1).unwrap(), SignVariant::SumParity, BundleCharacter::trivial()).unwrap(),
        };
        let (r1, _) = m.canonical_rep(&x).unwrap();
        let (r2, g) = m.canonical_rep(&r1).unwrap();
        prop_assert!((&r1 - &r2).norm() <= 1e-12);
        prop_assert!(g.is_identity() || (&m.act(&g, &r2) - &r1).norm() <= 1e-12);
    }
}

#[test]
fn shells_partition_the_box() {
    for k in 1..=3 {
        let r0 = 4;
        let mut all: Vec<Vec<i64>> = (0..=r0).flat_map(|r| shell(k, r)).map(|m| m.0).collect();
        let total = all.len();
        all.sort();
        all.dedup();
        assert_eq!(total, (2 * r0 + 1).pow(k as u32));
        assert_eq!(all.len(), total);
    }
}

#[test]
fn all_even_sign_is_not_a_character() {
    let (a, b) = (CoeffVector(vec![1, 0]), CoeffVector(vec![0, 1]));
    let lhs = moebius_sgn(&a.add(&b), SignVariant::AllEven);
    let rhs = moebius_sgn(&a, SignVariant::AllEven) * moebius_sgn(&b, SignVariant::AllEven);
    assert_ne!(lhs, rhs);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn periodic_kernels_are_certified(x in vec_of(3, -0.5, 0.5), y in vec_of(3, -0.5, 0.5), l in 0usize..=1) {
        prop_assume!(orbit_gap(&(&x - &y), 1) >= 0.3);
        let lat = Lattice::standard(3, 1).unwrap();
        let chi = BundleCharacter::with_split(l);
        let s = FdScheme::default();
        for kernel in [cyl_cauchy, cyl_green_auto] {
            let a = kernel(&lat, &chi, &x, &y, 30).unwrap();
            let b = kernel(&lat, &chi, &x, &y, 60).unwrap();
            prop_assert!((&a.value - &b.value).norm() <= 2.0 * a.tail_bound);
            let shifted = kernel(&lat, &chi, &(&x + &VectorN::basis(3, 0)), &y, 30).unwrap();
            let sign = if l == 1 { -1.0 } else { 1.0 };
            prop_assert!((&shifted.value - &a.value.scale(sign)).norm() <= 2.0 * a.tail_bound.max(shifted.tail_bound));
        }
        let f = |z: &VectorN| cyl_cauchy(&lat, &chi, z, &y, 30).unwrap().value;
        let tau = cyl_cauchy(&lat, &chi, &x, &y, 30).unwrap().tail_bound;
        for side in [Side::Left, Side::Right] {
            prop_assert!(dirac_fd(f, &x, &s, side).norm() <= (1e-5f64).max(10.0 * tau));
        }
    }

    #[test]
    fn regularised_kernel_is_certified(x in vec_of(3, -0.5, 0.5), y in vec_of(3, -0.5, 0.5)) {
        prop_assume!(orbit_gap(&(&x - &y), 2) >= 0.3);
        let lat = Lattice::standard(3, 2).unwrap();
        let chi = BundleCharacter::trivial();
        let a = cyl_cauchy_reg(&lat, &chi, &x, &y, 20).unwrap();
        let b = cyl_cauchy_reg(&lat, &chi, &x, &y, 40).unwrap();
        prop_assert!((&a.value - &b.value).norm() <= 2.0 * a.tail_bound);
    }

    #[test]
    fn orbit_green_is_group_invariant(x in vec_of(4, -0.5, 0.5), y in vec_of(4, -0.5, 0.5)) {
        let m = ManifoldSpec::projective(Lattice::standard(4, 1).unwrap(), 3, BundleCharacter::trivial()).unwrap();
        let mut x = x;
        let mut y = y;
        for j in 1..3 {
            x.0[j] = x.0[j].abs() + 0.2;
            y.0[j] = y.0[j].abs() + 0.2;
        }
        prop_assume!(orbit_gap(&(&x - &y), 1) >= 0.3);
        let k0 = proj_green(&m, &x, &y, 30, KernelForm::Orbit).unwrap();
        for g in m.generators() {
            let k1 = proj_green(&m, &m.act(&g, &x), &y, 30, KernelForm::Orbit).unwrap();
            prop_assert!((&k1.value - &k0.value).norm() <= k0.tail_bound + k1.tail_bound + 1e-13);
        }
    }

    #[test]
    fn forms_agree_without_reflections(x in vec_of(3, -0.5, 0.5), y in vec_of(3, -0.5, 0.5)) {
        prop_assume!(orbit_gap(&(&x - &y), 1) >= 0.3);
        let m = ManifoldSpec::projective(Lattice::standard(3, 1).unwrap(), 1, BundleCharacter::trivial()).unwrap();
        let a = proj_cauchy(&m, &x, &y, 20, KernelForm::Orbit).unwrap();
        let b = proj_cauchy(&m, &x, &y, 20, KernelForm::PaperLiteral).unwrap();
        prop_assert!(a.value.max_abs_diff(&b.value) <= 1e-14);
    }

    #[test]
    fn order_is_stable_under_halving(cx in -1.0f64..1.0, cy in -1.0f64..1.0, degree in 0i32..=3) {
        let c = VectorN(vec![cx, cy]);
        let g = |x: &VectorN| {
            let (a, b) = (x[0] - cx, x[1] - cy);
            let (r, t) = ((a * a + b * b).sqrt(), b.atan2(a));
            let mut out = VectorN(vec![r.powi(degree) * (t * degree as f64).cos(), r.powi(degree) * (t * degree as f64).sin()]);
            if degree == 0 {
                out.0[0] += 0.5;
            }
            out
        };
        let a = order_of_zero(g, &c, 0.3, &[256]).unwrap();
        let b = order_of_zero(g, &c, 0.15, &[256]).unwrap();
        prop_assert_eq!(a.order, degree as i64);
        prop_assert_eq!(a.order, b.order);
    }

    #[test]
    fn green_minus_cauchy_vanishes_for_monogenic(src in vec_of(3, 1.5, 2.5), y in vec_of(3, -0.3, 0.3)) {
        let s = Hypersurface::sphere(VectorN::zeros(3), 1.0, &[16, 32]).unwrap();
        let g = |x: &VectorN, y: &VectorN| Ok(cauchy_g(x, y)?.to_multivector());
        let h = |x: &VectorN, y: &VectorN| Ok(MultiVector::scalar(3, green_h(x, y)?));
        let f = |x: &VectorN| cauchy_g(x, &src).unwrap().to_multivector();
        let df = |x: &VectorN| dirac_fd(f, x, &FdScheme::default(), Side::Left);
        let a = green_integral(g, h, &s, f, df, &y, -2.0).unwrap().value;
        let b = cauchy_integral(g, &s, f, &y).unwrap().value;
        prop_assert!(a.max_abs_diff(&b) <= 1e-7);
    }

    #[test]
    fn cauchy_integral_is_deformation_invariant(y in vec_of(3, -0.2, 0.2), r in 0.4f64..2.0) {
        let g = |x: &VectorN, y: &VectorN| Ok(cauchy_g(x, y)?.to_multivector());
        let one = |_: &VectorN| MultiVector::scalar(3, 1.0);
        let small = Hypersurface::sphere(VectorN::zeros(3), r, &[24, 48]).unwrap();
        let big = Hypersurface::sphere(VectorN::zeros(3), 2.0 * r, &[24, 48]).unwrap();
        let a = cauchy_integral(g, &small, one, &y).unwrap().value;
        let b = cauchy_integral(g, &big, one, &y).unwrap().value;
        prop_assert!(a.max_abs_diff(&b) <= 1e-6);
    }
}
