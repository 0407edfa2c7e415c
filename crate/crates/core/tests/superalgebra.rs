use std::sync::Arc;

use feynlab::exact::{PolyFunction, RMatrix, Scalar};
use feynlab::superalgebra::{berezin_det, berezin_integral, Generator, Side, SuperFunction, SuperSpace};
use proptest::prelude::*;

fn space() -> Arc<SuperSpace> {
    SuperSpace::new(vec!["x", "y"], vec!["a", "b", "c"]).unwrap()
}

fn arb_super() -> impl Strategy<Value = SuperFunction> {
    prop::collection::vec((0u32..=2, 0u32..=1, 0u64..8, -3i64..=3), 0..6).prop_map(|terms| {
        let s = space();
        let mut f = SuperFunction::zero(&s);
        for (ex, ey, mask, c) in terms {
            let odd: Vec<usize> = (0..3).filter(|j| mask & (1 << j) != 0).collect();
            let mono = SuperFunction::odd_monomial(&s, &odd).mul_poly(&PolyFunction::monomial(vec![ex, ey], Scalar::from_int(c)));
            f = f.add(&mono);
        }
        f
    })
}

fn arb_homogeneous() -> impl Strategy<Value = SuperFunction> {
    (arb_super(), any::<bool>()).prop_map(|(f, odd)| {
        let (e, o) = f.split_parity();
        if odd {
            o
        } else {
            e
        }
    })
}

fn sign(p: u8) -> Scalar {
    if p % 2 == 0 {
        Scalar::from_int(1)
    } else {
        Scalar::from_int(-1)
    }
}

proptest! {
    #[test]
    fn graded_leibniz(f in arb_homogeneous(), g in arb_super(), j in 0usize..3) {
        let lhs = f.mul(&g).odd_derivative(j, Side::Left);
        let rhs = f.odd_derivative(j, Side::Left).mul(&g).add(&f.mul(&g.odd_derivative(j, Side::Left)).scale(&sign(f.parity().unwrap())));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn right_derivative_sign_rule(f in arb_homogeneous(), j in 0usize..3) {
        // ∂_r g/∂θ = (−1)^{|θ|(|g|+1)} ∂_l g/∂θ for homogeneous g and odd θ
        let p = f.parity().unwrap();
        prop_assert_eq!(f.odd_derivative(j, Side::Right), f.odd_derivative(j, Side::Left).scale(&sign(p + 1)));
    }

    #[test]
    fn second_derivative_vanishes(f in arb_super(), j in 0usize..3, side in prop::sample::select(vec![Side::Left, Side::Right])) {
        prop_assert!(f.odd_derivative(j, side).odd_derivative(j, side).is_zero());
    }

    #[test]
    fn integral_of_derivative_vanishes(f in arb_super(), j in 0usize..3) {
        prop_assert!(berezin_integral(&f.odd_derivative(j, Side::Left), &[j]).is_zero());
    }

    #[test]
    fn product_is_associative(f in arb_super(), g in arb_super(), h in arb_super()) {
        prop_assert_eq!(f.mul(&g).mul(&h), f.mul(&g.mul(&h)));
    }

    #[test]
    fn rescaled_generator_integrates_to_one(num in 1i64..20, den in 1i64..20, neg in any::<bool>()) {
        let lambda = Scalar::from_ratio(if neg { -num } else { num }, den);
        let s = space();
        let a = s.generator("a").unwrap();
        // θ' = λθ: ∫ Dθ θ' = λ, so Dθ' = Dθ/λ gives ∫ Dθ' θ' = 1
        let theta_prime = SuperFunction::generator(&s, a).scale(&lambda);
        let Generator::Odd(j) = a else { unreachable!() };
        let val = berezin_integral(&theta_prime, &[j]).component(0).constant_term();
        prop_assert_eq!(&val / &lambda, Scalar::from_int(1));
    }
}

fn arb_int_matrix(n: usize) -> impl Strategy<Value = RMatrix> {
    prop::collection::vec(-4i64..=4, n * n).prop_map(move |v| RMatrix::from_ints(&v.chunks(n).map(<[i64]>::to_vec).collect::<Vec<_>>()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn berezin_det_matches_cofactor(m in (1usize..=5).prop_flat_map(arb_int_matrix)) {
        prop_assert_eq!(berezin_det(&m), m.det_cofactor());
    }

    #[test]
    fn berezin_det_is_multiplicative((a, b) in (1usize..=4).prop_flat_map(|n| (arb_int_matrix(n), arb_int_matrix(n)))) {
        prop_assert_eq!(berezin_det(&a.mul(&b)), berezin_det(&a) * berezin_det(&b));
    }
}
