//! L-function coefficients, functional equations, central values and
//! derivatives, and class-partial series.

use num_complex::Complex64;
use thetalift::lfunc::*;
use thetalift::modforms::{newform_from_curve, Curve, NewformCoefficients};
use thetalift::numerics::hurwitz_zeta;
use thetalift::quadfield::{class_group, ideal_count, kronecker_symbol};

fn curve_37a(prec: usize) -> NewformCoefficients {
    newform_from_curve(&Curve::new([0, 0, 1, -1, 0]), 37, prec, 1).unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `L(s, η_{-4}) = 4^{-s} (ζ(s, 1/4) - ζ(s, 3/4))`.
fn l_minus4(s: Complex64) -> Complex64 {
    (hurwitz_zeta(s, 0.25).unwrap() - hurwitz_zeta(s, 0.75).unwrap()) * c(4.0, 0.0).powc(-s)
}

#[test]
fn dirichlet_values_match_hurwitz_oracle() {
    let spec = dirichlet_spec(-4, 300).unwrap();
    for s in [c(0.5, 0.0), c(0.3, 0.0), c(0.5, 0.7), c(1.2, 0.0)] {
        let v = l_value(&spec, s).unwrap();
        assert!((v - l_minus4(s)).norm() < 1e-8, "s = {s}: {v} vs {}", l_minus4(s));
    }
    let lambda = lambda_eval(&spec, c(0.5, 0.0)).unwrap();
    let direct = l_minus4(c(0.5, 0.0)) * spec.gamma_factor.eval(c(0.5, 0.0)).unwrap();
    assert!((lambda.value - direct).norm() < 1e-8);
    assert!(lambda.error_estimate < 1e-8);
}

#[test]
fn dirichlet_functional_equation_and_negative_control() {
    let spec = dirichlet_spec(-4, 300).unwrap();
    let samples = [c(0.3, 0.0), c(0.5, 0.7), c(1.2, 0.0)];
    assert!(fe_residual(&spec, &samples).unwrap() < 1e-8);
    let wrong = spec.with_sign(c(-1.0, 0.0)).unwrap();
    assert!(fe_residual(&wrong, &samples).unwrap() > 0.1);
    // an even character too
    let even = dirichlet_spec(5, 300).unwrap();
    assert!(fe_residual(&even, &samples).unwrap() < 1e-8);
}

#[test]
fn class_number_from_afe_value_at_one() {
    // h = w √|d| L(1, η) / (2π) for imaginary fields
    for (d, h, w) in [(-23i64, 3.0, 2.0), (-4, 1.0, 4.0), (-47, 5.0, 2.0)] {
        let spec = dirichlet_spec(d, 400).unwrap();
        let l1 = l_value(&spec, c(1.0, 0.0)).unwrap().re;
        let got = w * (d.abs() as f64).sqrt() * l1 / (2.0 * std::f64::consts::PI);
        assert!((got - h).abs() < 1e-8, "d = {d}: {got}");
    }
}

#[test]
fn artin_factorization_is_exact() {
    let phi = curve_37a(500);
    for d in [-139i64, -7, -3, 5] {
        let g = class_group(d).unwrap();
        let rs = rankin_selberg_unnormalized(&phi, &g, 0, 500).unwrap();
        for n in 1..=500usize {
            let mut expect = 0i64;
            for e in 1..=n {
                if n % e == 0 {
                    expect += phi.a[n / e] * phi.a[e] * kronecker_symbol(d, e as i64).unwrap() as i64;
                }
            }
            assert_eq!(rs[n], c(expect as f64, 0.0), "d = {d}, n = {n}");
        }
    }
}

#[test]
fn split_and_inert_prime_coefficients() {
    let phi = curve_37a(50);
    let g = class_group(-7).unwrap();
    let spec = rankin_selberg_coeffs(&phi, &g, 0, 50).unwrap();
    // 2 splits in Q(√-7): two ideals of norm 2
    assert!((spec.coeffs[2] - 2.0 * phi.a[2] as f64 / 2f64.sqrt()).norm() < 1e-14);
    // 3 is inert: no ideal of norm 3
    assert_eq!(spec.coeffs[3], c(0.0, 0.0));
}

#[test]
fn signs_follow_the_kronecker_symbol() {
    let phi37 = curve_37a(20);
    let phi389 = newform_from_curve(&Curve::new([0, 1, 1, -2, 0]), 389, 20, -1).unwrap();
    assert_eq!(phi389.root_number(), 1);
    for (phi, d) in [(&phi37, -139i64), (&phi389, -7)] {
        assert_eq!(kronecker_symbol(d, -phi.level).unwrap(), -1);
        let spec = rankin_selberg_coeffs(phi, &class_group(d).unwrap(), 0, 20).unwrap();
        assert_eq!(spec.sign, c(-1.0, 0.0));
    }
    assert!(rankin_selberg_coeffs(&phi37, &class_group(-148).unwrap(), 0, 20).is_err());
}

#[test]
fn odd_sign_central_values_vanish() {
    let phi = curve_37a(6000);
    let spec = standard_weight2(&phi).unwrap();
    assert!(lambda_eval(&spec, c(0.5, 0.0)).unwrap().value.norm() < 1e-8);
    let phi389 = newform_from_curve(&Curve::new([0, 1, 1, -2, 0]), 389, 8000, -1).unwrap();
    let rs = rankin_selberg_coeffs(&phi389, &class_group(-7).unwrap(), 0, 8000).unwrap();
    assert!(lambda_eval(&rs, c(0.5, 0.0)).unwrap().value.norm() < 1e-8);
}

#[test]
fn rankin_selberg_functional_equations() {
    let phi = curve_37a(4000);
    let samples = [c(0.2, 0.0), c(0.5, 1.0), c(0.7, -0.4), c(1.1, 0.3), c(0.35, 2.0)];
    for (d, chi) in [(-7i64, 0usize), (-23, 1), (5, 0), (-3, 0)] {
        let g = class_group(d).unwrap();
        let spec = rankin_selberg_coeffs(&phi, &g, chi, 4000).unwrap();
        let res = fe_residual(&spec, &samples).unwrap();
        assert!(res < 1e-6, "d = {d}: residual {res}");
        let flipped = spec.with_sign(-spec.sign).unwrap();
        let bad = fe_residual(&flipped, &samples).unwrap();
        assert!(bad > 1e-4 && bad > 1e4 * res, "d = {d}: {bad}");
    }
}

#[test]
fn too_few_coefficients_are_rejected() {
    let phi = curve_37a(50);
    let spec = rankin_selberg_coeffs(&phi, &class_group(-139).unwrap(), 0, 50).unwrap();
    assert!(matches!(lambda_eval(&spec, c(0.5, 0.0)), Err(thetalift::Error::InsufficientCoefficients { .. })));
    assert!(!spec.warnings.is_empty());
}

/// E₁(x) by its power series for small x and a continued fraction otherwise.
fn e1_oracle(x: f64) -> f64 {
    if x < 2.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..60 {
            term *= -x / k as f64;
            sum += term / k as f64;
        }
        -0.577_215_664_901_532_9 - x.ln() - sum
    } else {
        let mut f = 0.0;
        for k in (1..80).rev() {
            let k = k as f64;
            f = k / (1.0 + k / (x + f));
        }
        (-x).exp() / (x + f)
    }
}

#[test]
fn central_derivative_of_37a() {
    let phi = curve_37a(5000);
    let spec = standard_weight2(&phi).unwrap();
    let d = central_derivative(&spec).unwrap();
    assert!(d.agreement < 1e-6, "{d:?}");
    let q = 37f64.sqrt();
    let oracle: f64 = (1..=5000)
        .map(|n| 2.0 * phi.a[n] as f64 / n as f64 * e1_oracle(2.0 * std::f64::consts::PI * n as f64 / q))
        .sum();
    assert!((d.l_derivative - oracle).abs() < 1e-5, "{} vs {oracle}", d.l_derivative);
    assert!((oracle - 0.305_999_773_8).abs() < 1e-8);
    // linearity and the zero spec
    let doubled = central_derivative(&spec.scaled(2.0)).unwrap();
    assert!((doubled.kernel_series - 2.0 * d.kernel_series).abs() < 1e-12);
    let zero = central_derivative(&spec.scaled(0.0)).unwrap();
    assert_eq!(zero.kernel_series, 0.0);
    assert!(central_derivative(&dirichlet_spec(-4, 100).unwrap()).is_err());
}

#[test]
fn rankin_selberg_derivative_factors() {
    // L'(½, f × θ) = L'(½, f) L(½, f ⊗ η) when L(½, f) = 0
    let phi = curve_37a(8000);
    let g = class_group(-7).unwrap();
    let rs = rankin_selberg_coeffs(&phi, &g, 0, 8000).unwrap();
    let d_rs = central_derivative(&rs).unwrap();
    assert!(d_rs.agreement < 1e-6);
    let d_std = central_derivative(&standard_weight2(&phi).unwrap()).unwrap();
    let twist: Vec<Complex64> = (0..=8000usize)
        .map(|n| {
            if n == 0 {
                c(0.0, 0.0)
            } else {
                c((phi.a[n] * kronecker_symbol(-7, n as i64).unwrap() as i64) as f64 / (n as f64).sqrt(), 0.0)
            }
        })
        .collect();
    let tw = LFunctionSpec::new("twist", twist, GammaFactor::StdWeight2, (37.0f64 * 49.0).sqrt(), c(1.0, 0.0)).unwrap();
    let l_tw = l_value(&tw, c(0.5, 0.0)).unwrap().re;
    assert!((d_rs.l_derivative - d_std.l_derivative * l_tw).abs() < 1e-6);
}

#[test]
fn class_partial_series() {
    let phi = curve_37a(200);
    // h = 1: the single class carries all ideals
    let g7 = class_group(-7).unwrap();
    let p = class_partial_coeffs(&g7, 0, &phi, 200).unwrap();
    for n in 1..=200u64 {
        assert_eq!(p.coeffs[n as usize], phi.a[n as usize] * ideal_count(-7, n) as i64);
    }
    // d = -23: the three classes partition the ideals
    let g = class_group(-23).unwrap();
    let parts: Vec<ClassPartialL> = (0..3).map(|a| class_partial_coeffs(&g, a, &phi, 200).unwrap()).collect();
    for n in 1..=200usize {
        let total: i64 = parts.iter().map(|p| p.coeffs[n]).sum();
        assert_eq!(total, phi.a[n] * ideal_count(-23, n as u64) as i64, "n = {n}");
    }
    assert_eq!(parts.iter().map(|p| p.coeffs[2]).sum::<i64>(), phi.a[2] * 2);
    // character-twisted sums reproduce the convolution coefficients without the L(2s) factor
    for chi in 0..3 {
        let theta = thetalift::modforms::theta_chi(&g, chi, 200).unwrap();
        for n in 1..=200usize {
            let twisted: Complex64 = (0..3).map(|a| g.characters[chi].value(a) * parts[a].coeffs[n] as f64).sum();
            assert!((twisted - theta[n] * phi.a[n] as f64).norm() < 1e-9);
        }
    }
    // orthogonality: Σ_χ Σ_A χ(A) L_A = h · L_principal
    for n in 1..=200usize {
        let mut total = c(0.0, 0.0);
        for chi in 0..3 {
            for (a, part) in parts.iter().enumerate() {
                total += g.characters[chi].value(a) * part.coeffs[n] as f64;
            }
        }
        assert!((total - 3.0 * parts[0].coeffs[n] as f64).norm() < 1e-9);
    }
}
