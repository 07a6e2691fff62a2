use cocycle_core::cocycle::{level_table, TableOptions};
use cocycle_core::matkernel::Matrix;
use cocycle_core::presets;
use cocycle_core::pressure::{partition_sum, WeightVector};
use cocycle_core::spectrum::{
    exact_slopes, gibbs_report, legendre_entropy, lyapunov_interval, spectrum_curve, PressureCurve, Region,
};
use cocycle_core::subshift::{topological_entropy, TransitionMatrix};

const CAP: u64 = 1 << 26;
const LN2: f64 = std::f64::consts::LN_2;

fn opts() -> TableOptions {
    TableOptions::default()
}

/// Entropy spectrum of the diagonal pair: binary entropy of (1 + α/log 2)/2.
fn butler_spectrum(alpha: f64) -> f64 {
    let p = (1.0 + alpha / LN2) / 2.0;
    let h = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.ln() };
    h(p) + h(1.0 - p)
}

fn quarter_grid() -> Vec<f64> {
    (-32..=32).map(|i| i as f64 * 0.25).collect()
}

fn butler_curve(n: usize) -> PressureCurve {
    PressureCurve::compute(&presets::butler(2.0), &[1.0, 0.0], &quarter_grid(), n, None, opts()).unwrap()
}

#[test]
fn legendre_examples_on_butler() {
    let curve = butler_curve(14);
    let at0 = legendre_entropy(&curve, 0.0);
    assert!((at0.h - LN2).abs() <= 0.05, "{at0:?}");
    assert_eq!(at0.region, Region::Interior);
    let half = legendre_entropy(&curve, 0.5 * LN2);
    assert!((half.h - 0.5623351).abs() <= 0.05, "{half:?}");
    let top = legendre_entropy(&curve, LN2);
    assert!(top.h.abs() <= 0.05, "{top:?}");
    assert_ne!(top.region, Region::Interior);
    let beyond = legendre_entropy(&curve, 2.0);
    assert_eq!(beyond.region, Region::Exterior);
    assert_eq!(beyond.h, 0.0);
}

#[test]
fn butler_spectrum_matches_binary_entropy() {
    let pts = spectrum_curve(&presets::butler(2.0), &quarter_grid(), 14, opts()).unwrap();
    let mut sup: f64 = 0.0;
    let mut checked = 0;
    for p in &pts {
        if (0.05..=0.6).contains(&p.alpha) {
            sup = sup.max((p.h - butler_spectrum(p.alpha)).abs());
            checked += 1;
        }
    }
    assert!(checked >= 5);
    assert!(sup <= 0.05, "sup error {sup}");
    let end = pts.last().unwrap();
    assert!((end.alpha - LN2).abs() < 0.01 && end.h <= 0.05, "{end:?}");
}

#[test]
fn spectrum_is_concave_and_tangent() {
    let spec = presets::butler(2.0);
    let grid = quarter_grid();
    let curve = PressureCurve::compute(&spec, &[1.0, 0.0], &grid, 14, None, opts()).unwrap();
    let pts = spectrum_curve(&spec, &grid, 14, opts()).unwrap();
    for w in pts.windows(3) {
        let (a, b, c) = (&w[0], &w[1], &w[2]);
        let lam = (c.alpha - b.alpha) / (c.alpha - a.alpha);
        let chord = lam * a.h + (1.0 - lam) * c.h;
        assert!(chord <= b.h + a.h_uncertainty + b.h_uncertainty + c.h_uncertainty + 1e-12);
    }
    for p in &pts {
        let (_, br) = curve.points.iter().find(|(t, _)| *t == p.t_source).unwrap();
        let v = p.h + p.t_source * p.alpha;
        assert!(v >= br.lower - 1e-9 && v <= br.upper + 1e-9, "{p:?} {br:?}");
    }
}

#[test]
fn spectrum_positive_inside_lyapunov_interval() {
    let spec = presets::butler(2.0);
    let pts = spectrum_curve(&spec, &quarter_grid(), 14, opts()).unwrap();
    let li = lyapunov_interval(&spec, 14, None, CAP).unwrap();
    let h_top = LN2;
    let mut big = false;
    for p in &pts {
        assert!(p.h >= 0.0 && p.h <= h_top + p.h_uncertainty + 1e-9);
        assert!(p.alpha >= li.alpha_lower - p.h_uncertainty - 1e-9 && p.alpha <= li.beta_upper + p.h_uncertainty, "{p:?} {li:?}");
        if p.alpha > li.alpha_lower + p.h_uncertainty && p.alpha < li.beta_upper - p.h_uncertainty {
            assert!(p.h > -p.h_uncertainty);
        }
        if p.region == Region::Interior && p.h >= 0.5 * h_top {
            big = true;
        }
    }
    assert!(big);
}

#[test]
fn degenerate_spectra_collapse_to_one_point() {
    let gm = TransitionMatrix::golden_mean();
    let h_top = topological_entropy(&gm).unwrap();
    let grid: Vec<f64> = (-4..=4).map(|i| i as f64).collect();
    let id = spectrum_curve(&presets::identity(gm.clone(), 2), &grid, 8, opts()).unwrap();
    assert_eq!(id.len(), 1);
    assert!(id[0].alpha.abs() <= 1e-9 && (id[0].h - h_top).abs() <= 1e-9);
    let c = 1.7_f64;
    let sc = spectrum_curve(&presets::scalar(gm, 2, c), &grid, 8, opts()).unwrap();
    assert_eq!(sc.len(), 1);
    assert!((sc[0].alpha - c.ln()).abs() <= 1e-9 && (sc[0].h - h_top).abs() <= 1e-9, "{sc:?}");
}

#[test]
fn single_grid_point_uses_exact_slope() {
    let pts = spectrum_curve(&presets::butler(2.0), &[0.0], 10, opts()).unwrap();
    assert_eq!(pts.len(), 1);
    assert!((pts[0].h - LN2).abs() <= 1e-9);
}

#[test]
fn exact_slopes_agree_with_central_differences() {
    let spec = presets::positive_pair();
    let n = 10;
    let dt = 1e-4;
    let grid = [-1.0, 0.0, 0.5, 2.0];
    let slopes = exact_slopes(&spec, &grid, n, opts()).unwrap();
    for (t, s) in grid.iter().zip(slopes) {
        let w = |x: f64| WeightVector::scalar(x, 2).unwrap();
        let fd = (partition_sum(&spec, &w(t + dt), n, opts()).unwrap() - partition_sum(&spec, &w(t - dt), n, opts()).unwrap())
            / (2.0 * dt * n as f64);
        assert!((fd - s).abs() <= 1e-6, "t={t}: {fd} vs {s}");
    }
}

#[test]
fn unsorted_grid_is_rejected() {
    assert!(spectrum_curve(&presets::butler(2.0), &[0.0, -1.0], 6, opts()).is_err());
    assert!(spectrum_curve(&presets::butler(2.0), &[], 6, opts()).is_err());
}

#[test]
fn lyapunov_interval_examples() {
    let b = lyapunov_interval(&presets::butler(2.0), 10, None, CAP).unwrap();
    assert!(b.alpha_lower <= 0.0 && 0.0 <= b.alpha_upper);
    assert!(b.beta_lower <= LN2 + 1e-12 && LN2 <= b.beta_upper + 1e-12);
    let id = lyapunov_interval(&presets::identity(TransitionMatrix::golden_mean(), 2), 6, None, CAP).unwrap();
    assert_eq!((id.alpha_lower, id.alpha_upper, id.beta_lower, id.beta_upper), (0.0, 0.0, 0.0, 0.0));
    let one = lyapunov_interval(&presets::single(Matrix::from_row_slice(2, &[2.0, 1.0, 1.0, 1.0])), 32, None, CAP).unwrap();
    let truth = ((3.0 + 5f64.sqrt()) / 2.0).ln();
    for v in [one.alpha_lower, one.alpha_upper, one.beta_lower, one.beta_upper] {
        assert!((v - truth).abs() <= 1e-9, "{one:?}");
    }
}

#[test]
fn gibbs_at_zero_weight_is_uniform() {
    let spec = presets::positive_pair();
    let n = 8;
    let g = gibbs_report(&spec, &WeightVector::scalar(0.0, 2).unwrap(), n, None, opts()).unwrap();
    assert!((g.entropy - 256f64.ln() / n as f64).abs() <= 1e-12);
    let table = level_table(&spec, n, false, opts()).unwrap();
    let mean = table.rows().map(|r| r[0]).sum::<f64>() / table.len() as f64 / n as f64;
    assert!((g.chi - mean).abs() <= 1e-12);
    assert_eq!(g.energy, 0.0);
}

#[test]
fn gibbs_identity_has_zero_exponent() {
    let spec = presets::identity(TransitionMatrix::golden_mean(), 2);
    let g = gibbs_report(&spec, &WeightVector::scalar(2.5, 2).unwrap(), 9, None, opts()).unwrap();
    // |L(9)| = 89 on the golden mean shift
    assert!((g.entropy - 89f64.ln() / 9.0).abs() <= 1e-12);
    assert_eq!(g.chi, 0.0);
}

#[test]
fn gibbs_variational_value_in_bracket() {
    let spec = presets::butler(2.0);
    let g = gibbs_report(&spec, &WeightVector::scalar(1.0, 2).unwrap(), 12, None, opts()).unwrap();
    let v = g.entropy + g.chi;
    assert!(v >= g.pressure.lower - 1e-9 && v <= g.pressure.upper + 1e-9);
    assert!(g.pressure.contains(2.5f64.ln()));
}

#[test]
fn gibbs_ratio_bound_stable_for_positive_pair() {
    let spec = presets::positive_pair();
    let t = WeightVector::scalar(1.0, 2).unwrap();
    let bounds: Vec<f64> = (6..=12)
        .map(|n| gibbs_report(&spec, &t, n, None, opts()).unwrap().ratio_bound)
        .collect();
    let (lo, hi) = bounds.iter().fold((f64::INFINITY, 0.0_f64), |(a, b), &x| (a.min(x), b.max(x)));
    assert!(lo >= 1.0 && hi / lo <= 2.0, "{bounds:?}");
}
