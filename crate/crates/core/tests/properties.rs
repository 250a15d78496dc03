use proptest::prelude::*;

use skewaffine::algebra::ratio;
use skewaffine::maps::{decompose, DecomposeOptions};
use skewaffine::subspace::{intersect_affine, largest_side_subspace};
use skewaffine::{Algebra, AlgebraParams, Mode, Rational, Sampler, Scalar, Side};

fn algebra(ai: usize) -> Algebra {
    let (a, b) = [((-1, 1), (-1, 1)), ((-2, 1), (-5, 1)), ((-1, 2), (-3, 1)), ((-3, 7), (-2, 5))][ai];
    Algebra::new(AlgebraParams {
        a: ratio(a.0, a.1),
        b: ratio(b.0, b.1),
        commutative: false,
    })
    .unwrap()
}

fn rational() -> impl Strategy<Value = Rational> {
    (-50i64..=50, 1i64..=12).prop_map(|(n, d)| ratio(n, d))
}

fn scalar() -> impl Strategy<Value = Scalar> {
    [rational(), rational(), rational(), rational()].prop_map(|[t, x, y, z]| Scalar::new(t, x, y, z))
}

/// Product straight from the multiplication table, one rational operation at a time.
fn table_mul(alg: &Algebra, p: &Scalar, q: &Scalar) -> Scalar {
    let [t1, x1, y1, z1] = &p.0;
    let [t2, x2, y2, z2] = &q.0;
    let (a, b) = (&alg.params().a, &alg.params().b);
    let ab = a * b;
    Scalar::new(
        t1 * t2 + a * (x1 * x2) + b * (y1 * y2) - &ab * (z1 * z2),
        t1 * x2 + x1 * t2 - b * (y1 * z2) + b * (z1 * y2),
        t1 * y2 + y1 * t2 + a * (x1 * z2) - a * (z1 * x2),
        t1 * z2 + z1 * t2 + x1 * y2 - y1 * x2,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_matches_multiplication_table(ai in 0usize..4, p in scalar(), q in scalar()) {
        let alg = algebra(ai);
        prop_assert_eq!(alg.mul(&p, &q), table_mul(&alg, &p, &q));
    }

    #[test]
    fn conjugation_is_inverse_sandwich(ai in 0usize..4, q in scalar(), x in scalar()) {
        prop_assume!(!q.is_zero());
        let alg = algebra(ai);
        let expected = alg.mul3(&alg.inv(&q).unwrap(), &x, &q);
        prop_assert_eq!(alg.conjugate_by(&q, &x), expected);
    }

    #[test]
    fn norm_is_multiplicative(ai in 0usize..4, p in scalar(), q in scalar()) {
        let alg = algebra(ai);
        prop_assert_eq!(alg.norm(&alg.mul(&p, &q)), alg.norm(&p) * alg.norm(&q));
    }

    #[test]
    fn largest_opposite_subspace_is_closed(seed in any::<u64>(), n in 2usize..=4, ai in 0usize..2) {
        let alg = algebra(ai);
        let mut rng = Sampler::new(seed, 4);
        let dim = rng.range(1, n);
        let side = rng.side();
        let v = rng.subspace(&alg, n, dim, side);
        let s = largest_side_subspace(&alg, &v, side.opposite()).unwrap();
        prop_assert!(s.dim() <= v.dim());
        for b in s.basis() {
            for c in alg.basis() {
                prop_assert!(v.contains(&alg, &b.scale(&alg, &c, side.opposite())));
            }
        }
    }

    #[test]
    fn intersection_is_symmetric(seed in any::<u64>()) {
        let alg = Algebra::hamilton();
        let mut rng = Sampler::new(seed, 4);
        let n = 3;
        let (d1, s1) = (rng.range(0, n), rng.side());
        let v1 = rng.subspace(&alg, n, d1, s1);
        let a = rng.affine(&alg, v1);
        let d2 = rng.range(0, n);
        let v2 = rng.subspace(&alg, n, d2, s1);
        let b = if rng.coin() {
            rng.affine(&alg, v2)
        } else {
            let p = a.random_point(&alg, &mut rng);
            skewaffine::AffineSubspace::new(&alg, p, v2)
        };
        let ab = intersect_affine(&alg, &a, &b).unwrap();
        let ba = intersect_affine(&alg, &b, &a).unwrap();
        match (ab, ba) {
            (None, None) => {}
            (Some(x), Some(y)) => {
                prop_assert!(x.same_points(&alg, &y));
                prop_assert!(a.contains_subspace(&alg, &x) && b.contains_subspace(&alg, &x));
            }
            _ => prop_assert!(false, "emptiness differs"),
        }
    }

    #[test]
    fn scrambled_forms_normalize_to_the_same_form(seed in any::<u64>(), n in 1usize..=3, swap in any::<bool>()) {
        let alg = Algebra::hamilton();
        let mut rng = Sampler::new(seed, 4);
        let mode = if swap { Mode::SideSwap } else { Mode::SameSide };
        let form = skewaffine::SemilinearForm::random(&alg, n, mode, &mut rng);
        let other = form.scramble(&alg, &mut rng);
        prop_assert_eq!(other.normalize(&alg).unwrap(), form.normalize(&alg).unwrap());
        let f = form.to_map(&alg).unwrap();
        let g = other.to_map(&alg).unwrap();
        use skewaffine::PointMap;
        for _ in 0..5 {
            let x = rng.vector(&alg, n);
            prop_assert_eq!(f.eval(&x).unwrap(), g.eval(&x).unwrap());
        }
    }

    #[test]
    fn decomposition_recovers_normal_form_over_other_algebras(seed in any::<u64>(), swap in any::<bool>()) {
        let alg = algebra(2);
        let mut rng = Sampler::new(seed, 3);
        let mode = if swap { Mode::SideSwap } else { Mode::SameSide };
        let form = skewaffine::SemilinearForm::random(&alg, 3, mode, &mut rng);
        let map = form.to_map(&alg).unwrap();
        let d = decompose(&alg, &map, None, DecomposeOptions::default(), &mut rng).unwrap();
        prop_assert_eq!(d.mode, mode);
        prop_assert_eq!(d.form, form.normalize(&alg).unwrap());
    }
}

#[test]
fn two_sided_subspace_is_its_own_opposite_part() {
    let alg = Algebra::hamilton();
    let mut rng = Sampler::new(3, 4);
    let v = rng.two_sided_subspace(&alg, 4, 2);
    let s = largest_side_subspace(&alg, &v, Side::Right).unwrap();
    assert_eq!(s.dim(), 2);
}
