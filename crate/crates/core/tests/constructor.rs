use homog_core::constructor::{construct, HomogenizedPDE, Status};
use homog_core::heterogeneity::Family;
use homog_core::trigpoly::json::{series_from_json, series_to_json};
use homog_core::trigpoly::poly::{frac, int};
use homog_core::trigpoly::series::coeff;
use homog_core::{RingElement, Substitution};
use serde_json::Value;

fn golden(name: &str) -> Value {
    let text = match name {
        "quasi_order6" => include_str!("golden/quasi_order6.json"),
        "single_order10" => include_str!("golden/single_order10.json"),
        "quasi_field_order2" => include_str!("golden/quasi_field_order2.json"),
        _ => unreachable!(),
    };
    serde_json::from_str(text).unwrap()
}

#[test]
fn quasi_order_six_matches_golden() {
    let c = construct(Family::QuasiPeriodic, 6, 6).unwrap();
    assert_eq!(c.pde.to_json(), golden("quasi_order6"));
    assert!(c.residual.is_zero());
}

#[test]
fn golden_quasi_coefficients_follow_closed_form() {
    // ½(a1²/k1² + a2²/k2²)² − 2(a1²/k1⁴ + a2²/k2⁴)
    let pde = HomogenizedPDE::from_json(&golden("quasi_order6")).unwrap();
    let s = coeff(2, 0, -2, 0, int(1)).add(&coeff(0, 2, 0, -2, int(1)));
    let k6 = s
        .mul(&s)
        .scale(&frac(1, 2))
        .sub(&coeff(2, 0, -4, 0, int(2)))
        .sub(&coeff(0, 2, 0, -4, int(2)));
    assert_eq!(pde.coefficient(4), s.scale(&frac(1, 2)));
    assert_eq!(pde.coefficient(6), k6);
}

#[test]
fn single_order_ten_matches_golden() {
    let c = construct(Family::SinglePeriod, 10, 10).unwrap();
    assert_eq!(c.pde.to_json(), golden("single_order10"));
}

#[test]
fn single_period_is_quasi_periodic_without_second_phase() {
    let quasi = HomogenizedPDE::from_json(&golden("quasi_order6")).unwrap();
    let single = HomogenizedPDE::from_json(&golden("single_order10")).unwrap();
    let sub = Substitution {
        a2: Some(int(0)),
        k1: Some(int(1)),
        ..Default::default()
    };
    for n in [2, 4, 6] {
        assert_eq!(quasi.coefficient(n).substitute(&sub).unwrap(), single.coefficient(n), "K_{n}");
    }
}

#[test]
fn leading_field_matches_golden() {
    let want = series_from_json(&golden("quasi_field_order2")).unwrap();
    for n_a in [2, 3] {
        let c = construct(Family::QuasiPeriodic, 2, n_a).unwrap();
        let got = series_from_json(&series_to_json(&c.manifold.u)).unwrap();
        assert_eq!(got.iter().collect::<Vec<_>>(), want.iter().collect::<Vec<_>>(), "N_a = {n_a}");
    }
}

#[test]
fn residual_certificate_at_every_order() {
    for (family, n_d, n_a) in [
        (Family::QuasiPeriodic, 2, 2),
        (Family::QuasiPeriodic, 4, 4),
        (Family::QuasiPeriodic, 5, 3),
        (Family::SinglePeriod, 8, 8),
        (Family::FirstPhase, 6, 6),
    ] {
        let c = construct(family, n_d, n_a).unwrap();
        assert!(c.residual.is_zero(), "{family} ({n_d}, {n_a})");
        assert_eq!(c.report.status, Status::Converged);
    }
}

#[test]
fn homogeneous_medium_has_plain_diffusion() {
    let c = construct(Family::QuasiPeriodic, 6, 6).unwrap();
    let sub = Substitution {
        a1: Some(int(0)),
        a2: Some(int(0)),
        ..Default::default()
    };
    for (n, k) in c.pde.coeffs.iter().enumerate() {
        let want = if n == 2 { RingElement::one() } else { RingElement::zero() };
        assert_eq!(k.substitute(&sub).unwrap(), want, "K_{n}");
    }
}

#[test]
fn odd_coefficients_vanish() {
    let c = construct(Family::QuasiPeriodic, 5, 4).unwrap();
    assert!(c.pde.coefficient(3).is_zero());
    assert!(c.pde.coefficient(5).is_zero());
    assert!(c.warnings.is_empty(), "{:?}", c.warnings);
}
