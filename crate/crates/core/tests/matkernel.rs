use cocycle_core::matkernel::{binomial, exterior_power, op_norm, singular_values, Matrix};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn square(max_k: usize) -> impl Strategy<Value = Matrix> {
    (1..=max_k).prop_flat_map(|k| {
        prop::collection::vec(-3.0f64..3.0, k * k).prop_map(move |v| Matrix::from_row_slice(k, &v))
    })
}

fn pair(max_k: usize) -> impl Strategy<Value = (Matrix, Matrix)> {
    (1..=max_k).prop_flat_map(|k| {
        (prop::collection::vec(-3.0f64..3.0, k * k), prop::collection::vec(-3.0f64..3.0, k * k))
            .prop_map(move |(a, b)| (Matrix::from_row_slice(k, &a), Matrix::from_row_slice(k, &b)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn exterior_norm_is_product_of_top_singular_values(m in square(5)) {
        let sv = singular_values(&m);
        for l in 1..=m.dim() {
            let ext = exterior_power(&m, l).unwrap();
            prop_assert_eq!(ext.dim(), binomial(m.dim(), l));
            let expect: f64 = sv[..l].iter().product();
            let got = op_norm(&ext);
            prop_assert!((got - expect).abs() <= 1e-9 * expect.max(1e-300), "l={}: {} vs {}", l, got, expect);
        }
    }

    #[test]
    fn exterior_power_is_functorial((a, b) in pair(5)) {
        for l in 1..=a.dim() {
            let lhs = exterior_power(&(&a * &b), l).unwrap();
            let rhs = &exterior_power(&a, l).unwrap() * &exterior_power(&b, l).unwrap();
            let scale = lhs.frobenius().max(1.0);
            prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-9 * scale, "l={}", l);
        }
    }

    #[test]
    fn singular_values_match_nalgebra(m in square(5)) {
        let mut expect: Vec<f64> = DMatrix::from_row_slice(m.dim(), m.dim(), &m.rows().concat())
            .svd(false, false).singular_values.iter().copied().collect();
        expect.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in singular_values(&m).iter().zip(&expect) {
            prop_assert!((a - b).abs() <= 1e-10 * expect[0].max(1.0));
        }
    }

    #[test]
    fn top_exterior_power_is_determinant(m in square(5)) {
        let top = exterior_power(&m, m.dim()).unwrap();
        prop_assert!((top.get(0, 0) - m.determinant()).abs() <= 1e-9 * m.determinant().abs().max(1.0));
    }
}
