use homog_core::constructor::{construct, regularize};
use homog_core::heterogeneity::Family;
use homog_core::trigpoly::parse_decimal;
use homog_core::validate::*;
use homog_core::Valuation;

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

#[test]
fn series_error_slopes_track_truncation() {
    let c = construct(Family::SinglePeriod, 8, 8).unwrap();
    let pde = c.pde.evaluate_single(&parse_decimal("0.5").unwrap()).unwrap();
    let ks = log_grid(0.01, 0.1, 8);
    let t = bloch_branch(0.5, &ks, None).unwrap().with_series(&pde, &[2, 4]);
    for (j, n) in [2.0, 4.0].iter().enumerate() {
        let err: Vec<f64> = t.rows.iter().map(|r| (r.series[j] - r.lambda_bloch).abs()).collect();
        let slope = loglog_slope(&ks, &err);
        assert!((slope - (n + 2.0)).abs() < 0.5, "N={n}: slope {slope}");
    }
    assert!(t.rows.iter().all(|r| !r.flagged));
}

#[test]
fn zero_wavenumber_spectrum_has_one_kernel_vector() {
    for a in [0.25, 0.5, 0.75] {
        let ev = BlochMatrix::auto(a).unwrap().eigenvalues(0.0);
        let kmin = 1.0 / (1.0 + a);
        assert!(ev[0].abs() < 1e-12);
        assert!(ev[1..].iter().all(|l| *l <= -kmin * (1.0 - 1e-6)), "a={a}: {}", ev[1]);
    }
}

#[test]
fn regularized_symbol_is_close_at_long_waves() {
    let c = construct(Family::SinglePeriod, 6, 6).unwrap();
    let pde = c.pde.evaluate_single(&parse_decimal("0.5").unwrap()).unwrap();
    let t = bloch_branch(0.5, &[0.02, 0.05], None).unwrap().with_series(&pde, &[2]);
    for r in &t.rows {
        let reg = r.regularized.unwrap();
        assert!((reg - r.lambda_bloch).abs() < (r.series[0] - r.lambda_bloch).abs());
    }
    assert!(regularize(&pde).unwrap().alpha() > 0.0);
}

#[test]
fn phase_shift_residual_scales_with_order() {
    let c = construct(Family::QuasiPeriodic, 2, 6).unwrap();
    let v = Valuation {
        a1: 0.1,
        a2: 0.1 * 2.0 / 3.0,
        k1: 1.0,
        k2: (1.0 + 5f64.sqrt()) / 2.0,
    };
    let r = phase_shift_scaling(&c, &v, &[(0.0, 0.0), (2.1, 0.4)], &[0.4, 0.2, 0.1, 0.05]).unwrap();
    let (lo, hi) = r.exponent_range();
    assert!(lo > 2.5 && hi < 3.5, "exponents in [{lo}, {hi}]");
}

#[test]
fn homogeneous_cross_validation_is_exact_up_to_discretization() {
    let c = construct(Family::SinglePeriod, 4, 4).unwrap();
    let pde = c.pde.evaluate_single(&parse_decimal("0").unwrap()).unwrap();
    let mut cfg = CrossValidation::new(0.0, 4);
    cfg.samples = 4;
    let r = cross_validate(&cfg, &c, &HomogenizedModel::Truncated { pde, order: 2 }).unwrap();
    assert!(r.max_error() < 1e-3, "{}", r.max_error());
    let m0 = r.means[0];
    assert!(r.means.iter().all(|m| (m - m0).abs() < 1e-12));
}

#[test]
fn unregularized_fourth_order_is_rejected() {
    let c = construct(Family::SinglePeriod, 6, 6).unwrap();
    let pde = c.pde.evaluate_single(&parse_decimal("0.5").unwrap()).unwrap();
    let cfg = CrossValidation::new(0.5, 4);
    let err = cross_validate(&cfg, &c, &HomogenizedModel::Truncated { pde, order: 4 }).unwrap_err();
    assert!(matches!(err, homog_core::Error::Unstable(_)));
}
