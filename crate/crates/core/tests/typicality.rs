use cocycle_core::matkernel::{eigen_moduli, exterior_power, Matrix};
use cocycle_core::subshift::{TransitionMatrix, Word};
use cocycle_core::typicality::{
    holonomy_loop, periodic_product, pinching_at_level, pinching_check, search_typicality, twisting_check,
    typicality_report, HomoclinicSpec, Tolerances, Verdict,
};
use cocycle_core::{presets, CocycleSpec, Error};
use proptest::prelude::*;

const TOL: f64 = 1e-8;

fn full2() -> TransitionMatrix {
    TransitionMatrix::full(2)
}

fn fixed_point_insert(shift: &TransitionMatrix) -> HomoclinicSpec {
    HomoclinicSpec::parse(shift, "0", "1", 0).unwrap()
}

fn close(a: &Matrix, b: &Matrix, tol: f64) -> bool {
    a.max_abs_diff(b) <= tol
}

#[test]
fn periodic_product_examples() {
    let spec = presets::diag_rotation(1.0);
    let p = periodic_product(&spec, &Word::parse(spec.shift(), "0").unwrap()).unwrap();
    assert!(close(&p, &Matrix::diag(&[2.0, 0.5]), 0.0));
    let butler = presets::butler(2.0);
    let p = periodic_product(&butler, &Word::parse(butler.shift(), "01").unwrap()).unwrap();
    assert!(close(&p, &Matrix::identity(2), 1e-15));
    let id = presets::identity(full2(), 2);
    assert!(close(&periodic_product(&id, &Word::parse(&full2(), "0").unwrap()).unwrap(), &Matrix::identity(2), 0.0));
    // 0 → 0 is forbidden on the alternating shift
    let alt = TransitionMatrix::new(vec![vec![0, 1], vec![1, 0]]).unwrap();
    let spec = presets::identity(alt.clone(), 2);
    assert!(matches!(
        periodic_product(&spec, &Word::from_symbols(vec![0])),
        Err(Error::Inadmissible { .. })
    ));
}

#[test]
fn pinching_examples() {
    let d = pinching_check(&Matrix::diag(&[2.0, 0.5]), 1e-6).unwrap();
    assert_eq!(d.verdict, Verdict::True);
    assert!((d.gaps[0] - 4.0).abs() <= 1e-12);
    let r = pinching_check(&Matrix::rotation(1.0), 1e-6).unwrap();
    assert_eq!(r.verdict, Verdict::False);
    let m = pinching_check(&Matrix::from_row_slice(2, &[2.0, 1.0, 1.0, 1.0]), 1e-6).unwrap();
    assert_eq!(m.verdict, Verdict::True);
    let s5 = 5f64.sqrt();
    assert!((m.moduli[0] - (3.0 + s5) / 2.0).abs() <= 1e-12);
    assert!((m.moduli[1] - (3.0 - s5) / 2.0).abs() <= 1e-12);
    // a gap inside the band is inconclusive
    let near = pinching_check(&Matrix::diag(&[1.0, 1.0 - 5e-7]), 1e-6).unwrap();
    assert_eq!(near.verdict, Verdict::Inconclusive);
}

#[test]
fn level_pinching_detects_product_collisions() {
    // moduli 4, 2, 1, 1/2: the products 4·(1/2) and 2·1 coincide
    let p = Matrix::diag(&[4.0, 2.0, 1.0, 0.5]);
    assert_eq!(pinching_at_level(&p, 1, 1e-6).unwrap().verdict, Verdict::True);
    assert_eq!(pinching_at_level(&p, 2, 1e-6).unwrap().verdict, Verdict::False);
    assert_eq!(pinching_at_level(&p, 3, 1e-6).unwrap().verdict, Verdict::True);
}

#[test]
fn level_pinching_matches_direct_exterior_power() {
    let p = Matrix::from_row_slice(3, &[3.0, 1.0, 0.2, 0.5, 2.0, 0.1, 0.3, 0.4, 0.7]);
    for t in 1..=3 {
        let via_products = pinching_at_level(&p, t, 1e-6).unwrap();
        let direct: Vec<f64> = eigen_moduli(&exterior_power(&p, t).unwrap()).unwrap().iter().map(|e| e.modulus).collect();
        for (a, b) in via_products.moduli.iter().zip(&direct) {
            assert!((a - b).abs() <= 1e-9 * a.max(1.0), "t={t}: {a} vs {b}");
        }
    }
}

#[test]
fn holonomy_examples() {
    let shift = full2();
    let h = fixed_point_insert(&shift);
    let id = holonomy_loop(&presets::identity(shift.clone(), 2), &h).unwrap();
    assert!(close(&id, &Matrix::identity(2), 0.0));
    let theta = 0.7;
    let psi = holonomy_loop(&presets::diag_rotation(theta), &h).unwrap();
    let expect = Matrix::diag(&[0.5, 2.0]) * Matrix::rotation(theta);
    assert!(close(&psi, &expect, 1e-14));
    let butler = holonomy_loop(&presets::butler(2.0), &h).unwrap();
    assert!(close(&butler, &Matrix::diag(&[0.25, 4.0]), 1e-14));
}

#[test]
fn holonomy_from_the_past() {
    // with the insert at coordinate −1, only the unstable holonomy moves
    let spec = presets::diag_rotation(0.4);
    let h = HomoclinicSpec::parse(&full2(), "0", "1", -1).unwrap();
    let psi = holonomy_loop(&spec, &h).unwrap();
    let a0 = Matrix::diag(&[2.0, 0.5]);
    let expect = Matrix::rotation(0.4) * a0.inverse().unwrap();
    assert!(close(&psi, &expect, 1e-14));
}

#[test]
fn homoclinic_validation() {
    let shift = full2();
    let err = HomoclinicSpec::parse(&shift, "0", "0", 0).unwrap_err();
    assert!(err.to_string().contains("z = p"));
    // on the golden mean shift 1 → 1 is forbidden
    let gm = TransitionMatrix::golden_mean();
    assert!(HomoclinicSpec::parse(&gm, "01", "1", 0).is_err());
    assert!(HomoclinicSpec::parse(&gm, "0", "1", 0).is_ok());
}

#[test]
fn twisting_examples() {
    let p = Matrix::diag(&[2.0, 0.5]);
    let id = twisting_check(&Matrix::identity(2), &p, 1, TOL).unwrap();
    assert_eq!(id.verdict, Verdict::False);
    assert_eq!(id.min_coefficient, 0.0);
    let quarter = Matrix::diag(&[0.5, 2.0]) * Matrix::rotation(std::f64::consts::FRAC_PI_4);
    let tw = twisting_check(&quarter, &p, 1, TOL).unwrap();
    assert_eq!(tw.verdict, Verdict::True);
    // ψ(e1) = (√2/4, √2): the smaller coefficient relative to the norm
    let expect = (0.5f64.sqrt() / 2.0) / (0.125f64 + 2.0).sqrt();
    assert!((tw.min_coefficient - expect).abs() <= 1e-12, "{tw:?}");
    let half = Matrix::diag(&[0.5, 2.0]) * Matrix::rotation(std::f64::consts::FRAC_PI_2);
    assert_eq!(twisting_check(&half, &p, 1, TOL).unwrap().verdict, Verdict::False);
    assert!(matches!(
        twisting_check(&Matrix::identity(2), &Matrix::rotation(1.0), 1, TOL),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn typicality_ground_truths() {
    let shift = full2();
    let h = fixed_point_insert(&shift);
    let tol = Tolerances::default();
    let good = typicality_report(&presets::diag_rotation(1.0), &h, tol).unwrap();
    assert_eq!(good.typical, Verdict::True);
    assert_eq!(good.levels.len(), 1);
    let butler = typicality_report(&presets::butler(2.0), &h, tol).unwrap();
    assert_eq!(butler.typical, Verdict::False);
    assert_eq!(butler.levels[0].pinching.verdict, Verdict::True);
    assert_eq!(butler.levels[0].twisting.as_ref().unwrap().verdict, Verdict::False);
    let id = typicality_report(&presets::identity(shift, 2), &h, tol).unwrap();
    assert_eq!(id.typical, Verdict::False);
    assert_eq!(id.levels[0].pinching.verdict, Verdict::False);
    assert!(id.levels[0].twisting.is_none());
}

#[test]
fn three_dimensional_typicality_covers_both_levels() {
    let a0 = Matrix::diag(&[3.0, 1.0, 0.25]);
    let a1 = Matrix::from_row_slice(3, &[1.0, 0.3, 0.2, 0.1, 1.0, 0.4, 0.5, 0.2, 1.0]);
    let spec = CocycleSpec::full_shift(vec![a0, a1]).unwrap();
    let r = typicality_report(&spec, &fixed_point_insert(&full2()), Tolerances::default()).unwrap();
    assert_eq!(r.levels.len(), 2);
    assert_eq!(r.typical, Verdict::True, "{r:?}");
}

#[test]
fn search_finds_a_witness() {
    let r = search_typicality(&presets::diag_rotation(1.0), 2, 2, Tolerances::default()).unwrap();
    assert_eq!(r.typical, Verdict::True);
    let r = search_typicality(&presets::butler(2.0), 2, 2, Tolerances::default()).unwrap();
    assert_ne!(r.typical, Verdict::True);
}

fn conjugate(spec: &CocycleSpec, g: &Matrix) -> CocycleSpec {
    let gi = g.inverse().unwrap();
    spec.with_generators(spec.generators().iter().map(|a| g * &(a * &gi)).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conjugation_covariance(entries in prop::collection::vec(-1.0f64..1.0, 4), theta in 0.2f64..3.0) {
        // identity plus a small perturbation keeps G well conditioned
        let g = Matrix::from_row_slice(2, &[
            1.0 + 0.4 * entries[0], 0.4 * entries[1],
            0.4 * entries[2], 1.0 + 0.4 * entries[3],
        ]);
        let shift = full2();
        let h = fixed_point_insert(&shift);
        for spec in [presets::diag_rotation(theta), presets::butler(2.0), presets::identity(shift.clone(), 2)] {
            let conj = conjugate(&spec, &g);
            let gi = g.inverse().unwrap();
            let p = periodic_product(&spec, h.p_word()).unwrap();
            let pc = periodic_product(&conj, h.p_word()).unwrap();
            prop_assert!(close(&pc, &(&g * &(&p * &gi)), 1e-10));
            let psi = holonomy_loop(&spec, &h).unwrap();
            let psic = holonomy_loop(&conj, &h).unwrap();
            prop_assert!(close(&psic, &(&g * &(&psi * &gi)), 1e-10));
            let a = typicality_report(&spec, &h, Tolerances::default()).unwrap();
            let b = typicality_report(&conj, &h, Tolerances::default()).unwrap();
            prop_assert_eq!(a.levels[0].pinching.verdict, b.levels[0].pinching.verdict);
            prop_assert_eq!(a.typical, b.typical);
        }
    }
}
