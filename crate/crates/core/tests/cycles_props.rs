//! Heegner point enumeration, CM traces of j, and closed geodesics.

use num_complex::Complex64;
use thetalift::cycles::*;
use thetalift::lattice::Rat;
use thetalift::quadfield::{class_group, fundamental_discriminants, BinaryForm};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn heegner_counts_equal_class_numbers() {
    for n in [1i64, 5, 37] {
        for d in fundamental_discriminants(200).into_iter().filter(|&d| d < 0) {
            if thetalift::numerics::gcd_i64(d, n) != 1 {
                continue;
            }
            let h = class_group(d).unwrap().order();
            for r in heegner_residues(n, d) {
                let set = heegner_points(n, d, r, HeegnerHypothesis::Coprime).unwrap();
                assert_eq!(set.len(), h, "N = {n}, D = {d}, r = {r}");
                for p in &set.points {
                    let f = p.form;
                    assert_eq!(f.disc(), d);
                    assert_eq!(f.a % n, 0);
                    assert_eq!((f.b - r).rem_euclid(2 * n), 0);
                    assert!(-f.a < f.b && f.b <= f.a);
                    let tau = p.tau;
                    let res = tau * tau * f.a as f64 + tau * f.b as f64 + f.c as f64;
                    assert!(res.norm() < 1e-9);
                    assert!((tau.im - (-d as f64).sqrt() / (2.0 * f.a as f64)).abs() < 1e-12);
                }
            }
        }
    }
}

/// Independent check of the class count: Heegner forms with a ≤ bound
/// fall into exactly h(D) classes under Γ₀(N), where two forms are compared
/// by searching small matrices of Γ₀(N) between them.
#[test]
fn classes_are_distinct_under_small_gamma0_search() {
    for (n, d) in [(5i64, -19i64), (37, -139), (5, -11), (37, -3)] {
        let r = heegner_residues(n, d)[0];
        let set = heegner_points(n, d, r, HeegnerHypothesis::Coprime).unwrap();
        let forms: Vec<BinaryForm> = set.points.iter().map(|p| p.form).collect();
        for (i, f) in forms.iter().enumerate() {
            for g in forms.iter().skip(i + 1) {
                for p in -8i64..=8 {
                    for q in -8i64..=8 {
                        for k in -2i64..=2 {
                            let rr = n * k;
                            if p == 0 {
                                continue;
                            }
                            // s from p s − q r = 1
                            if (1 + q * rr) % p != 0 {
                                continue;
                            }
                            let s = (1 + q * rr) / p;
                            assert_ne!(f.transform([[p, q], [rr, s]]), *g, "N = {n}, D = {d}");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn documented_examples() {
    let s3 = heegner_points(1, -3, 1, HeegnerHypothesis::Coprime).unwrap();
    assert_eq!(s3.len(), 1);
    assert_eq!(s3.points[0].stabilizer_order, 3);
    assert!((s3.points[0].tau - c(-0.5, 3f64.sqrt() / 2.0)).norm() < 1e-14);
    let s4 = heegner_points(1, -4, 0, HeegnerHypothesis::Coprime).unwrap();
    assert_eq!(s4.points[0].stabilizer_order, 2);
    assert!((s4.points[0].tau - c(0.0, 1.0)).norm() < 1e-14);
    let s = heegner_points(37, -139, 3, HeegnerHypothesis::Coprime).unwrap();
    assert_eq!(s.len(), 3);
    assert!(s.points.iter().all(|p| p.stabilizer_order == 1));
    assert!(heegner_points(37, -139, 4, HeegnerHypothesis::Coprime).is_err());
    assert!(heegner_points(5, -4, 4, HeegnerHypothesis::Strict).is_err());
    assert!(heegner_points(5, -4, 4, HeegnerHypothesis::Coprime).is_ok());
}

#[test]
fn hurwitz_degrees() {
    let expect = [(-3i64, Rat::new(1, 3)), (-4, Rat::new(1, 2)), (-7, Rat::from_integer(1)), (-8, Rat::from_integer(1))];
    for (d, deg) in expect {
        assert_eq!(cm_cycle_degree(1, d, DegreeConvention::Classical).unwrap(), deg, "D = {d}");
    }
    assert_eq!(cm_cycle_degree(37, -139, DegreeConvention::Classical).unwrap(), Rat::from_integer(3));
    assert_eq!(cm_cycle_degree(1, -3, DegreeConvention::HalfUnitWeighted).unwrap(), Rat::new(1, 12));
    assert_eq!(cm_cycle_degree(1, -23, DegreeConvention::HalfUnitWeighted).unwrap(), Rat::new(3, 4));
}

#[test]
fn residue_sign_symmetry() {
    for (n, d) in [(5i64, -19i64), (37, -139), (37, -7), (5, -31)] {
        let r = heegner_residues(n, d)[0];
        let mut plus: Vec<f64> = heegner_points(n, d, r, HeegnerHypothesis::Coprime).unwrap().points.iter().map(|p| p.tau.im).collect();
        let mut minus: Vec<f64> = heegner_points(n, d, -r, HeegnerHypothesis::Coprime).unwrap().points.iter().map(|p| p.tau.im).collect();
        plus.sort_by(f64::total_cmp);
        minus.sort_by(f64::total_cmp);
        for (a, b) in plus.iter().zip(&minus) {
            assert!((a - b).abs() < 1e-14, "N = {n}, D = {d}");
        }
    }
}

/// j by the Eisenstein series E₄, E₆ and j = 1728 E₄³/(E₄³ − E₆²), summed
/// directly without fundamental-domain reduction.
fn j_oracle(tau: Complex64) -> Complex64 {
    let q = (c(0.0, 2.0 * std::f64::consts::PI) * tau).exp();
    let mut e4 = c(1.0, 0.0);
    let mut e6 = c(1.0, 0.0);
    let mut qn = c(1.0, 0.0);
    for n in 1..200u64 {
        qn *= q;
        let s3: u64 = (1..=n).filter(|t| n % t == 0).map(|t| t.pow(3)).sum();
        let s5: f64 = (1..=n).filter(|t| n % t == 0).map(|t| (t as f64).powi(5)).sum();
        e4 += qn * (240.0 * s3 as f64);
        e6 -= qn * (504.0 * s5);
    }
    let e43 = e4 * e4 * e4;
    e43 * 1728.0 / (e43 - e6 * e6)
}

#[test]
fn j_matches_eisenstein_oracle_and_is_invariant() {
    for tau in [c(0.1, 1.2), c(-0.3, 0.95), c(0.45, 2.0)] {
        let j = j_invariant(tau).unwrap();
        assert!((j - j_oracle(tau)).norm() < 1e-8 * j.norm().max(1.0), "{tau}");
        for g in [[[1, 1], [0, 1]], [[0, -1], [1, 0]], [[2, 1], [5, 3]]] {
            let jg = j_invariant(mobius(g, tau)).unwrap();
            assert!((jg - j).norm() < 1e-7 * j.norm().max(1.0));
        }
    }
    assert!((j_invariant(c(0.0, 1.0)).unwrap() - 1728.0).norm() < 1e-9);
    assert!(j_invariant(c(1.0, -1.0)).is_err());
}

#[test]
fn singular_moduli_traces() {
    for (d, r, expect) in [(-3i64, 1i64, -248.0), (-4, 0, 492.0), (-7, 1, -4119.0), (-8, 0, 8000.0 - 744.0)] {
        let set = heegner_points(1, d, r, HeegnerHypothesis::Coprime).unwrap();
        let t = trace_cm(j_minus_744, &set).unwrap();
        assert!((t - c(expect, 0.0)).norm() < 1e-6, "D = {d}: {t}");
    }
    // h(−23) = 3: the three conjugates of j are the roots of x³ + 3491750x² − 5151296875x + 12771880859375
    let set = heegner_points(1, -23, 1, HeegnerHypothesis::Coprime).unwrap();
    let t = trace_cm(j_invariant, &set).unwrap();
    assert!((t - c(-3_491_750.0, 0.0)).norm() < 1e-4, "{t}");
    // linearity and the constant function
    let one = trace_cm(|_| Ok(c(1.0, 0.0)), &set).unwrap();
    assert_eq!(one, c(3.0, 0.0));
    let lin = trace_cm(|z| Ok(j_invariant(z)? * 2.0 + 5.0), &set).unwrap();
    assert!((lin - (t * 2.0 + 15.0)).norm() < 1e-4);
    // a pole at a CM point is reported
    let s4 = heegner_points(1, -4, 0, HeegnerHypothesis::Coprime).unwrap();
    assert!(trace_cm(|z| Ok(c(1.0, 0.0) / (j_invariant(z)? - 1728.0).re.round()), &s4).is_err());
}

#[test]
fn disc_five_geodesic() {
    let f = BinaryForm::new(1, 1, -1);
    let x = geodesic_vector(1, f).unwrap();
    let g = geodesic_from_vector(1, x).unwrap();
    assert!((g.length - 1.924_847_300_238_413).abs() < 1e-9, "{}", g.length);
    assert_eq!(g.pell, (3, 1));
    assert_eq!(g.unit_power, 2);
    assert!((g.length - 2.0 * g.unit_power as f64 * g.regulator).abs() < 1e-12);
    let s5 = 5f64.sqrt();
    assert!((g.endpoints.0 - (-1.0 - s5) / 2.0).abs() < 1e-14);
    assert!((g.endpoints.1 - (-1.0 + s5) / 2.0).abs() < 1e-14);
    assert!(g.is_stabilized_by(g.automorph));
    for e in [g.endpoints.0, g.endpoints.1] {
        let a = g.automorph;
        let image = (a[0][0] as f64 * e + a[0][1] as f64) / (a[1][0] as f64 * e + a[1][1] as f64);
        assert!((image - e).abs() < 1e-12);
    }
    // constant integrand
    let one = trace_geodesic(|_| Ok(c(1.0, 0.0)), &g, 64, 0.0).unwrap();
    let m = 5.0f64 / 4.0;
    assert!((one.re - g.length / (2.0 * std::f64::consts::PI * m.sqrt())).abs() < 1e-12);
    // orientation
    let rev = g.reversed().unwrap();
    assert_eq!(rev.orientation, -1);
    let back = trace_geodesic(|_| Ok(c(1.0, 0.0)), &rev, 64, 0.0).unwrap();
    assert!((back + one).norm() < 1e-12);
}

#[test]
fn automorphs_at_higher_level() {
    for (n, f) in [(5i64, BinaryForm::new(5, 3, -1)), (37, BinaryForm::new(37, 5, -1)), (2, BinaryForm::new(4, 2, -3))] {
        let g = geodesic_from_vector(n, geodesic_vector(n, f).unwrap()).unwrap();
        assert_eq!(g.automorph[1][0] % n, 0);
        assert!(g.is_stabilized_by(g.automorph));
        assert!((g.length - 2.0 * g.unit_power as f64 * g.regulator).abs() < 1e-9);
        // the point is moved exactly one period along the geodesic
        let z0 = g.point(0.3);
        let z1 = mobius(g.automorph, z0);
        let dist = (1.0 + (z0 - z1).norm_sqr() / (2.0 * z0.im * z1.im)).acosh();
        assert!((dist - g.length).abs() < 1e-8, "N = {n}: {dist} vs {}", g.length);
    }
    // square discriminant: infinite geodesic
    assert!(geodesic_from_vector(1, geodesic_vector(1, BinaryForm::new(1, 3, 2)).unwrap()).is_err());
    // definite vector
    assert!(geodesic_from_vector(1, geodesic_vector(1, BinaryForm::new(1, 1, 1)).unwrap()).is_err());
}

#[test]
fn geodesic_trace_of_j_is_stable() {
    let g = geodesic_from_vector(1, geodesic_vector(1, BinaryForm::new(1, 1, -1)).unwrap()).unwrap();
    let a = trace_geodesic(j_minus_744, &g, 256, 0.0).unwrap();
    let b = trace_geodesic(j_minus_744, &g, 512, 0.0).unwrap();
    assert!((a - b).norm() < 1e-8 * a.norm().max(1.0), "{a} vs {b}");
    for base in [0.37, -0.8, 1.5] {
        let s = trace_geodesic(j_minus_744, &g, 512, base).unwrap();
        assert!((s - b).norm() < 1e-9 * b.norm().max(1.0), "base {base}: {s} vs {b}");
    }
}
