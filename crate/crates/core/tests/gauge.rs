use feynlab::exact::{int, rat, PolyFunction, QuadraticForm, RMatrix, Rational, Scalar};
use feynlab::gauge::{
    brst_apply, build_fp, fp_critical_points, fp_direct_corrections, fp_expand, fp_expand_at, fp_rules_at, gauge_fermion,
    gauge_fermion_check, gauge_fermion_report, nullspace, DetMode, FPModel, GaugeError, GaugeModel, GroupVolume,
    StructureConstants,
};
use feynlab::graph::HalfEdgeType;
use feynlab::stationary::ActionModel;
use feynlab::superalgebra::SuperFunction;
use feynlab::wick::{fresnel_value, FresnelNormalization};
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn p(dim: usize, terms: &[(&[u32], Scalar)]) -> PolyFunction {
    PolyFunction::from_terms(dim, terms.iter().map(|(e, c)| (e.to_vec(), c.clone())))
}

fn s(n: i64, d: i64) -> Scalar {
    Scalar::from_ratio(n, d)
}

fn mexican_hat(points: Vec<Vec<Rational>>, n: u32) -> GaugeModel {
    let r2 = p(2, &[(&[2, 0], s(1, 1)), (&[0, 2], s(1, 1)), (&[0, 0], s(-1, 1))]);
    GaugeModel {
        base: ActionModel::new(r2.pow(2).scale(&s(1, 4))).with_points(points),
        lie: StructureConstants::abelian(1),
        vector_fields: vec![vec![PolyFunction::var(2, 1).neg(), PolyFunction::var(2, 0)]],
        phi: vec![PolyFunction::var(2, 1)],
        vol_g: GroupVolume { coeff: int(2), pi_power: 1 },
        intersections: n,
    }
}

/// SO(2) on (x, y) with a spectator z: S = ¼(r²−1)² + ½z² + γ z(r²−1), φ = y + αz + βxy.
fn tilted(alpha: Rational, beta: Rational, gamma: Rational) -> GaugeModel {
    let r2m1 = p(3, &[(&[2, 0, 0], s(1, 1)), (&[0, 2, 0], s(1, 1)), (&[0, 0, 0], s(-1, 1))]);
    let z = PolyFunction::var(3, 2);
    let action = r2m1
        .pow(2)
        .scale(&s(1, 4))
        .add(&z.pow(2).scale(&s(1, 2)))
        .add(&z.mul(&r2m1).scale(&Scalar::real(gamma)));
    GaugeModel {
        base: ActionModel::new(action).with_points(vec![vec![int(1), int(0), int(0)]]),
        lie: StructureConstants::abelian(1),
        vector_fields: vec![vec![PolyFunction::var(3, 1).neg(), PolyFunction::var(3, 0), PolyFunction::zero(3)]],
        phi: vec![p(3, &[(&[0, 1, 0], s(1, 1)), (&[0, 0, 1], Scalar::real(alpha)), (&[1, 1, 0], Scalar::real(beta))])],
        vol_g: GroupVolume { coeff: int(2), pi_power: 1 },
        intersections: 1,
    }
}

/// Non-abelian `[e₁, e₂] = e₂` acting on (w, s, z) by `v₁ = −w∂_w + s∂_s`, `v₂ = ∂_w`.
fn affine(phi: Vec<PolyFunction>) -> GaugeModel {
    let z = PolyFunction::var(3, 2);
    GaugeModel {
        base: ActionModel::new(z.pow(2).scale(&s(1, 2)).add(&z.pow(3).scale(&s(1, 3))))
            .with_points(vec![vec![int(0), int(1), int(0)], vec![int(0), int(1), int(-1)]]),
        lie: StructureConstants::new(2, [(0, 1, 1, int(1)), (1, 0, 1, int(-1))]).unwrap(),
        vector_fields: vec![
            vec![PolyFunction::var(3, 0).neg(), PolyFunction::var(3, 1), PolyFunction::zero(3)],
            vec![PolyFunction::one(3), PolyFunction::zero(3), PolyFunction::zero(3)],
        ],
        phi,
        vol_g: GroupVolume::one(),
        intersections: 1,
    }
}

#[test]
fn mexican_hat_critical_data() {
    let fp = build_fp(&mexican_hat(vec![], 2)).unwrap();
    let search = fp_critical_points(&fp).unwrap();
    let xs: Vec<Vec<Rational>> = search.points.iter().map(|p| p.x.clone()).collect();
    assert_eq!(xs, vec![vec![int(-1), int(0)], vec![int(1), int(0)]]);
    assert!(search.excluded.iter().any(|e| matches!(e, GaugeError::DegenerateFP { point } if point == &["0", "0"])));
    let at_one = &search.points[1];
    assert_eq!(at_one.hessian, RMatrix::from_ints(&[vec![2, 0, 0], vec![0, 0, 1], vec![0, 1, 0]]));
    assert_eq!(at_one.slice_hessian, RMatrix::from_ints(&[vec![2]]));
    assert_eq!(at_one.fp, RMatrix::identity(1));
    assert_eq!(at_one.gamma, RMatrix::from_ints(&[vec![0], vec![1]]));
    assert_eq!(at_one.k_block, RMatrix::from_rows(vec![vec![rat(1, 2), int(0)], vec![int(0), int(0)]]));
    assert_eq!(search.points[0].det_fp, int(-1));
    // the undeclared model hits the fixed point of the rotation
    assert!(matches!(fp_expand(&fp, 1, DetMode::Abs), Err(GaugeError::DegenerateFP { .. })));
}

#[test]
fn graph_sum_matches_direct_route_on_mexican_hat() {
    let fp = build_fp(&mexican_hat(vec![vec![int(1), int(0)], vec![int(-1), int(0)]], 2)).unwrap();
    for pt in fp_critical_points(&fp).unwrap().points {
        let graphs = fp_expand_at(&fp, &pt, 2, DetMode::Abs).unwrap();
        assert_eq!(graphs.corrections, fp_direct_corrections(&fp, &pt, 2).unwrap());
    }
}

#[test]
fn abs_mode_with_two_intersections_equals_strict_half_slice() {
    let both = build_fp(&mexican_hat(vec![vec![int(1), int(0)], vec![int(-1), int(0)]], 2)).unwrap();
    let half = build_fp(&mexican_hat(vec![vec![int(1), int(0)]], 1)).unwrap();
    let abs = fp_expand(&both, 2, DetMode::Abs).unwrap();
    let strict = fp_expand(&half, 2, DetMode::Signed).unwrap();
    let (a, b) = (&abs.contributions[0], &abs.contributions[1]);
    assert_eq!(a.corrections, b.corrections);
    assert_eq!(a.fresnel, b.fresnel);
    let sum = &a.constant + &b.constant;
    let c = &strict.contributions[0];
    assert_eq!(sum, c.constant);
    assert_eq!(a.corrections, c.corrections);
    assert_eq!(a.fresnel, c.fresnel);
    for h in [0.05, 0.1] {
        assert!((abs.eval_f64(h) - strict.eval_f64(h)).norm() < 1e-12);
    }
    // signed determinants of the two intersections cancel
    let signed = fp_expand(&both, 2, DetMode::Signed).unwrap();
    assert!(signed.eval_f64(0.1).norm() < 1e-12);
}

#[test]
fn brst_examples_and_gauge_fermion() {
    let fp = build_fp(&mexican_hat(vec![], 2)).unwrap();
    assert_eq!(brst_apply(&fp, &fp.x(0)), fp.ghost(0).mul(&fp.x(1)).neg());
    assert_eq!(brst_apply(&fp, &fp.x(1)), fp.ghost(0).mul(&fp.x(0)));
    assert!(brst_apply(&fp, &fp.ghost(0)).is_zero());
    assert_eq!(brst_apply(&fp, &fp.antighost(0)), fp.lambda(0));
    assert!(brst_apply(&fp, &fp.lift(&fp.gauge.base.action)).is_zero());
    assert!(gauge_fermion_check(&fp));
}

#[test]
fn flipped_ghost_sign_is_localized() {
    let fp = build_fp(&mexican_hat(vec![], 2)).unwrap();
    let ghost_term = fp.antighost(0).mul(&fp.x(0)).mul(&fp.ghost(0));
    let broken = fp.action().sub(&ghost_term.scale(&s(2, 1)));
    let fixture = fp.clone().with_action(broken);
    let report = gauge_fermion_report(&fixture);
    assert!(!report.holds);
    assert_eq!(report.difference, ghost_term.scale(&s(2, 1)));
}

fn degree_four_monomials(fp: &FPModel) -> Vec<SuperFunction> {
    // x^a y^b λ^c θ^m with a + b + c + |m| ≤ 4
    let mut out = Vec::new();
    for mask in 0u64..4 {
        let odd: Vec<usize> = (0..2).filter(|j| mask & (1 << j) != 0).collect();
        let o = mask.count_ones();
        for a in 0..=4u32 {
            for b in 0..=4 - a {
                for c in 0..=4 - a - b {
                    if a + b + c + o > 4 {
                        continue;
                    }
                    let even = PolyFunction::monomial(vec![a, b, c], Scalar::one());
                    out.push(SuperFunction::odd_monomial(fp.space(), &odd).mul_poly(&even));
                }
            }
        }
    }
    out
}

#[test]
fn brst_squares_to_zero_on_mexican_hat() {
    let fp = build_fp(&mexican_hat(vec![], 2)).unwrap();
    let basis = degree_four_monomials(&fp);
    assert!(basis.len() > 50);
    for f in &basis {
        assert!(brst_apply(&fp, &brst_apply(&fp, f)).is_zero(), "Q² ≠ 0 on {f}");
    }
}

#[test]
fn brst_splits_into_minimal_and_auxiliary_parts() {
    let fp = build_fp(&affine(vec![PolyFunction::var(3, 0), PolyFunction::var(3, 1).sub(&PolyFunction::one(3))])).unwrap();
    let (n, k) = (fp.n(), fp.k());
    let lam_or_antighost = |f: &SuperFunction| {
        f.components().any(|(mask, p)| {
            mask >> k != 0 || p.terms().any(|(e, _)| e[n..].iter().any(|&m| m > 0))
        })
    };
    for i in 0..n {
        assert!(!lam_or_antighost(&brst_apply(&fp, &fp.x(i))));
    }
    for a in 0..k {
        assert!(!lam_or_antighost(&brst_apply(&fp, &fp.ghost(a))));
        assert!(brst_apply(&fp, &fp.lambda(a)).is_zero());
        assert_eq!(brst_apply(&fp, &fp.antighost(a)), fp.lambda(a));
    }
    assert!(gauge_fermion_check(&fp));
    // Q² = 0 on products mixing all generator kinds
    let f = fp.x(0).mul(&fp.ghost(1)).mul(&fp.antighost(0)).add(&fp.x(1).pow(2).mul(&fp.lambda(1)));
    assert!(brst_apply(&fp, &brst_apply(&fp, &f)).is_zero());
    assert!(brst_apply(&fp, &gauge_fermion(&fp)).sub(&fp.action().sub(&fp.lift(&fp.gauge.base.action))).is_zero());
}

#[test]
fn inconsistent_bracket_is_rejected() {
    let mut gm = affine(vec![PolyFunction::var(3, 0), PolyFunction::var(3, 1).sub(&PolyFunction::one(3))]);
    gm.lie = StructureConstants::new(2, [(0, 1, 1, int(-1)), (1, 0, 1, int(1))]).unwrap();
    assert!(matches!(build_fp(&gm), Err(GaugeError::BadStructureConstants(_))));
    gm.lie = StructureConstants::new(2, [(0, 1, 1, int(1))]).unwrap();
    assert!(matches!(build_fp(&gm), Err(GaugeError::BadStructureConstants(_))));
}

#[test]
fn nonabelian_linear_gauge_has_no_lagrange_vertices() {
    let fp = build_fp(&affine(vec![PolyFunction::var(3, 0), PolyFunction::var(3, 1).sub(&PolyFunction::one(3))])).unwrap();
    let search = fp_critical_points(&fp).unwrap();
    assert_eq!(search.points.len(), 2);
    for pt in &search.points {
        assert_eq!(pt.det_fp, int(-1));
        let rules = fp_rules_at(&fp, pt).unwrap();
        assert!(rules.signatures().iter().all(|s| !s.contains(&HalfEdgeType::Lagrange)));
        let c = fp_expand_at(&fp, pt, 2, DetMode::Signed).unwrap();
        assert_eq!(c.corrections, fp_direct_corrections(&fp, pt, 2).unwrap());
    }
}

#[test]
fn constant_fp_has_no_ghost_vertices_and_reduces_to_fresnel() {
    // translation in x on R³, S = ½(y² − 3z²) + yz, φ = x + y/2
    let action = p(3, &[(&[0, 2, 0], s(1, 2)), (&[0, 0, 2], s(-3, 2)), (&[0, 1, 1], s(1, 1))]);
    let gm = GaugeModel {
        base: ActionModel::new(action).with_points(vec![vec![int(0); 3]]),
        lie: StructureConstants::abelian(1),
        vector_fields: vec![vec![PolyFunction::one(3), PolyFunction::zero(3), PolyFunction::zero(3)]],
        phi: vec![p(3, &[(&[1, 0, 0], s(1, 1)), (&[0, 1, 0], s(1, 2))])],
        vol_g: GroupVolume { coeff: int(3), pi_power: 0 },
        intersections: 1,
    };
    let fp = build_fp(&gm).unwrap();
    let pt = &fp_critical_points(&fp).unwrap().points[0];
    assert!(fp_rules_at(&fp, pt).unwrap().signatures().is_empty());
    let e = fp_expand(&fp, 2, DetMode::Abs).unwrap();
    let c = &e.contributions[0];
    let slice = QuadraticForm::new(RMatrix::from_ints(&[vec![1, 1], vec![1, -3]])).unwrap();
    assert_eq!(c.fresnel, fresnel_value(&slice, FresnelNormalization::Hbar).unwrap());
    assert_eq!(c.constant, Scalar::from_int(3));
    assert!(c.corrections.coeff(1).is_zero() && c.corrections.coeff(2).is_zero());
}

#[test]
fn fp_determinant_is_the_slice_jacobian_for_linear_data() {
    // translations V (n×k) and linear φ = Bx: |det[V L]| = |det BV| · |det[L M]| with BM = 1, BL = 0
    let b = RMatrix::from_ints(&[vec![1, 2, 0, -1], vec![0, 1, 3, 1]]);
    let v = RMatrix::from_ints(&[vec![1, 0], vec![0, 1], vec![2, -1], vec![1, 1]]);
    let l = nullspace(&b);
    assert_eq!(b.mul(&l), RMatrix::zeros(2, 2));
    let bt = b.transpose();
    let m = bt.mul(&b.mul(&bt).inverse().unwrap());
    let join = |a: &RMatrix, c: &RMatrix| {
        RMatrix::from_rows((0..a.rows()).map(|i| a.row(i).iter().chain(c.row(i)).cloned().collect()).collect())
    };
    let lhs = join(&v, &l).det().abs();
    let rhs = b.mul(&v).det().abs() * join(&l, &m).det().abs();
    assert_eq!(lhs, rhs);
}

fn small() -> impl Strategy<Value = Rational> {
    (-3i64..=3, 1i64..=3).prop_map(|(n, d)| rat(n, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn graph_sum_matches_direct_route_on_tilted_slices(alpha in small(), beta in small(), gamma in small()) {
        prop_assume!(beta != -Rational::one());
        let fp = build_fp(&tilted(alpha, beta, gamma)).unwrap();
        prop_assert!(gauge_fermion_check(&fp));
        let search = fp_critical_points(&fp).unwrap();
        prop_assume!(search.excluded.is_empty());
        for pt in &search.points {
            let c = fp_expand_at(&fp, pt, 2, DetMode::Signed).unwrap();
            prop_assert_eq!(&c.corrections, &fp_direct_corrections(&fp, pt, 2).unwrap());
        }
    }
}
