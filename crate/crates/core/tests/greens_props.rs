//! Green's functions: cross-formula agreement, geometry of the summands,
//! symmetry and invariance, convergence, logarithmic singularity, and
//! Laplacian eigenvalues.

use num_complex::Complex64;
use thetalift::cycles::{heegner_points, HeegnerHypothesis};
use thetalift::greens::*;
use thetalift::lattice::*;
use thetalift::modforms::GrassmannPoint;
use thetalift::numerics::{gamma_real, legendre_q};
use thetalift::quadfield::{class_group, QuadraticField};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn mobius(g: [[f64; 2]; 2], z: Complex64) -> Complex64 {
    (z * g[0][0] + g[0][1]) / (z * g[1][0] + g[1][1])
}

#[test]
fn power_function_eigenvalue() {
    for a in [0.3, 1.7, -0.5] {
        let chk = laplacian_eigencheck(|z| Ok(z[0].im.powf(a)), &[c(0.4, 1.3)], 1e-3, -1.0, a * (1.0 - a)).unwrap();
        assert!(chk.residual < 1e-6, "a = {a}: {chk:?}");
    }
    // two variables: the sum of the two Laplacians
    let chk = laplacian_eigencheck(|z| Ok(z[0].im.powi(2) * z[1].im.powi(3)), &[c(0.1, 1.0), c(0.0, 2.0)], 1e-3, -1.0, -2.0 - 6.0)
        .unwrap();
    assert!(chk.residual < 1e-5, "{chk:?}");
    assert!(laplacian_eigencheck(|z| Ok(z[0].im), &[c(0.0, 1e-4)], 1e-3, 1.0, 0.0).is_err());
}

fn sig12(n: i64) -> (QuadraticLattice, DiscriminantModule) {
    build_signature12_lattice(n).unwrap()
}

#[test]
fn lift_cross_formula_on_a_grid() {
    let (l, m) = sig12(1);
    let s = c(1.0, 0.0);
    let z0 = c(0.0, 2.0);
    let v = lift_closed_form(&l, &m, 1, 0, Rat::from_integer(1), s, z0, 12.0).unwrap();
    let ev = LiftEvaluator::new(&l, &m, 0, Rat::from_integer(1), s, &GrassmannPoint::signature12(1, z0).unwrap(), 12.0).unwrap();
    let w = ev.eval_legendre(&GrassmannPoint::signature12(1, z0).unwrap()).unwrap();
    assert!((v.value - w.value).abs() < 1e-8 * v.value.abs(), "{v:?} vs {w:?}");
    for k in 0..10 {
        let z = c(-0.45 + 0.1 * k as f64, 0.9 + 0.13 * k as f64);
        let p = GrassmannPoint::signature12(1, z).unwrap();
        let a = ev.eval(&p).unwrap().value;
        let b = ev.eval_legendre(&p).unwrap().value;
        assert!((a - b).abs() < 1e-8 * a.abs().max(1.0), "z = {z}: {a} vs {b}");
    }
}

#[test]
fn lift_summands_are_point_pair_invariants() {
    // the vector (b, a, c) is the matrix [[b, -a/N], [c, -b]] with fixed point τ_λ,
    // and its summand is 4/Γ(s + 1/4) Q_{2s-1/2}(cosh d(z, τ_λ))
    let (l, m) = sig12(5);
    let s = c(1.4, 0.0);
    let z = c(-0.05, 0.46);
    let p = GrassmannPoint::signature12(5, z).unwrap();
    let ev = LiftEvaluator::new(&l, &m, 1, Rat::new(19, 20), s, &p, 4.0).unwrap();
    assert!(ev.len() >= 2, "{}", ev.len());
    let mut oracle = 0.0;
    for v in ev.vectors() {
        let (b, a, cc) = (v[0], v[1], v[2]);
        let disc = a * cc / 5.0 - b * b;
        assert!((5.0 * disc - 0.95).abs() < 1e-12);
        let tau = c(b / cc, disc.sqrt() / cc.abs());
        oracle += legendre_q(2.0 * s - 0.5, cosh_distance(z, tau)).unwrap().re;
    }
    oracle *= 4.0 / gamma_real(1.4 + 0.25).unwrap();
    let got = ev.eval_legendre(&p).unwrap().value;
    assert!((got - oracle).abs() < 1e-10 * oracle.abs(), "{got} vs {oracle}");
    let closed = ev.eval(&p).unwrap().value;
    assert!((closed - oracle).abs() < 1e-8 * oracle.abs());
}

#[test]
fn lift_empty_quadric_and_errors() {
    let (l, m) = sig12(1);
    // Q(μ₀) = 0 but m = 3/4: no vectors
    let z = c(0.1, 1.3);
    let v = lift_closed_form(&l, &m, 1, 0, Rat::new(3, 4), c(1.5, 0.0), z, 10.0).unwrap();
    assert_eq!(v.value, 0.0);
    assert!(lift_closed_form(&l, &m, 1, 0, Rat::from_integer(1), c(0.7, 0.0), z, 10.0).is_err());
    // at the CM point i the argument is 1
    assert!(matches!(
        lift_closed_form(&l, &m, 1, 0, Rat::from_integer(1), c(1.5, 0.0), c(0.0, 1.0), 10.0),
        Err(thetalift::Error::Singular(_))
    ));
}

#[test]
fn lift_tail_estimate_tracks_the_remainder() {
    let (l, m) = sig12(1);
    let z = c(0.1, 1.3);
    let at = |r: f64| lift_closed_form(&l, &m, 1, 0, Rat::from_integer(1), c(1.6, 0.0), z, r).unwrap();
    let (a, b, f) = (at(32.0), at(64.0), at(128.0));
    assert!(a.value < b.value && b.value < f.value);
    assert!(b.value - a.value <= 1.5 * a.tail_bound(), "{a:?} {b:?}");
    assert!(f.value - b.value <= 1.5 * b.tail_bound(), "{b:?} {f:?}");
    assert!((b.extrapolated() - f.extrapolated()).abs() <= f.tail_bound(), "{b:?} {f:?}");
}

#[test]
fn lift_eigenvalue() {
    let (l, m) = sig12(1);
    let s = 1.5;
    let expected = 0.5 * (s - 0.75) * (s - 0.25);
    for z in [c(0.1, 1.3), c(-0.35, 0.8), c(0.27, 2.1)] {
        let ev = LiftEvaluator::new(&l, &m, 0, Rat::from_integer(1), c(s, 0.0), &GrassmannPoint::signature12(1, z).unwrap(), 10.0)
            .unwrap();
        let f = |w: &[Complex64]| Ok(ev.eval(&GrassmannPoint::signature12(1, w[0])?)?.value);
        let chk = laplacian_eigencheck(f, &[z], 1e-3, 0.125, expected).unwrap();
        assert!(chk.residual < 1e-3, "z = {z}: {chk:?}");
    }
}

struct HilbertSetup {
    field: QuadraticField,
    group: thetalift::quadfield::ClassGroup,
    lattice: QuadraticLattice,
    module: DiscriminantModule,
}

fn hilbert_setup(d: i64, class: usize) -> HilbertSetup {
    let field = QuadraticField::new(d).unwrap();
    let group = class_group(d).unwrap();
    let (lattice, module) = build_la_lattice(&field, &group, class, 1).unwrap();
    HilbertSetup { field, group, lattice, module }
}

#[test]
fn hilbert_summands_are_point_pair_invariants() {
    // d = −4: ζⱼ = xⱼ + i yⱼ and λ ↦ X = [[x₁ + x₂, y₁ + y₂], [y₂ − y₁, x₁ − x₂]]
    let h = hilbert_setup(-4, 0);
    let (z1, z2) = (c(0.2, 1.1), c(-0.3, 0.9));
    let s = c(2.2, 0.0);
    let ev = HilbertEvaluator::new(&h.field, &h.group, 0, &h.lattice, &h.module, 0, Rat::from_integer(1), s, (z1, z2), 8.0).unwrap();
    let mut oracle = 0.0;
    for v in ev.vectors() {
        let x = [[v[0] + v[2], v[1] + v[3]], [v[3] - v[1], v[0] - v[2]]];
        assert!((x[0][0] * x[1][1] - x[0][1] * x[1][0] - 1.0).abs() < 1e-12);
        oracle += legendre_q(s, cosh_distance(z1, mobius(x, z2))).unwrap().re;
    }
    oracle *= 4.0 / gamma_real(2.2).unwrap();
    let got = ev.eval(z1, z2).unwrap().value;
    assert!((got - oracle).abs() < 1e-10 * oracle.abs(), "{got} vs {oracle}");
}

#[test]
fn hilbert_symmetry_and_empty_quadric() {
    let h = hilbert_setup(-4, 0);
    let s = c(2.2, 0.0);
    for (z1, z2) in [(c(0.2, 1.1), c(-0.3, 0.9)), (c(0.0, 1.5), c(0.4, 0.7))] {
        let a = hilbert_green(&h.field, &h.group, 0, &h.lattice, &h.module, 0, Rat::from_integer(1), s, z1, z2, 10.0).unwrap();
        let b = hilbert_green(&h.field, &h.group, 0, &h.lattice, &h.module, 0, Rat::from_integer(1), s, z2, z1, 10.0).unwrap();
        assert!((a.value - b.value).abs() < 1e-8 * a.value.abs(), "{a:?} vs {b:?}");
    }
    // Q(μ) = 1/4 for μ = (0, 0, 0, 1/2)... norms not ≡ m mod 1 give nothing
    let mu = (0..h.module.order).find(|&i| h.module.norms[i] != Rat::from_integer(0) && !h.module.norms[i].is_integer()).unwrap();
    let v = hilbert_green(&h.field, &h.group, 0, &h.lattice, &h.module, mu, Rat::from_integer(1), s, c(0.2, 1.1), c(-0.3, 0.9), 10.0)
        .unwrap();
    assert_eq!(v.value, 0.0);
    // on the divisor z₁ = X z₂ with X = 1
    assert!(hilbert_green(&h.field, &h.group, 0, &h.lattice, &h.module, 0, Rat::from_integer(1), s, c(0.2, 1.1), c(0.2, 1.1), 10.0)
        .is_err());
}

#[test]
fn hilbert_matches_level_two_resolvent() {
    // for d = −4 the matrices X of determinant 1 form the theta group,
    // which is (TS) Γ₀(2) (TS)⁻¹; each γ appears as ±X
    let h = hilbert_setup(-4, 0);
    let s = 2.2;
    let (z1, z2) = (c(0.2, 1.1), c(-0.3, 0.9));
    let hv = hilbert_green(&h.field, &h.group, 0, &h.lattice, &h.module, 0, Rat::from_integer(1), c(s, 0.0), z1, z2, 40.0).unwrap();
    let ginv = [[0.0, 1.0], [-1.0, 1.0]];
    let g = resolvent_gs(2, c(s, 0.0), mobius(ginv, z1), mobius(ginv, z2), 2000.0).unwrap();
    let expect = -4.0 / gamma_real(s).unwrap() * g.extrapolated();
    assert!((hv.extrapolated() - expect).abs() < 1e-3 * expect.abs(), "{hv:?} vs {expect}");
}

#[test]
fn hilbert_eigenvalue() {
    let h = hilbert_setup(-4, 0);
    let s = 2.2;
    let expected = 0.5 * s * (s - 1.0);
    for (z1, z2) in [(c(0.2, 1.1), c(-0.3, 0.9)), (c(0.05, 1.6), c(0.4, 0.75)), (c(-0.4, 0.95), c(0.1, 1.4))] {
        let ev = HilbertEvaluator::new(&h.field, &h.group, 0, &h.lattice, &h.module, 0, Rat::from_integer(1), c(s, 0.0), (z1, z2), 10.0)
            .unwrap();
        let chk = laplacian_eigencheck(|w| Ok(ev.eval(w[0], w[1])?.value), &[z1, z2], 1e-3, 0.25, expected).unwrap();
        assert!(chk.residual < 1e-3, "{chk:?}");
    }
}

#[test]
fn resolvent_symmetry_and_invariance() {
    let s = c(2.0, 0.0);
    for (z1, z2) in [
        (c(0.0, 1.0), c(0.0, 2.0)),
        (c(0.3, 1.2), c(-0.2, 0.8)),
        (c(0.45, 0.9), c(0.1, 3.0)),
        (c(-0.1, 1.7), c(0.25, 1.1)),
        (c(0.2, 0.6), c(-0.4, 1.5)),
    ] {
        let a = resolvent_gs(1, s, z1, z2, 500.0).unwrap();
        let b = resolvent_gs(1, s, z2, z1, 500.0).unwrap();
        assert!((a.value - b.value).abs() < 1e-8, "{z1}, {z2}: {a:?} vs {b:?}");
        let t = resolvent_gs(1, s, z1 + 1.0, z2, 500.0).unwrap();
        assert!((a.value - t.value).abs() < 1e-8);
    }
    // level 5 invariance under [[1, 0], [5, 1]] in the second variable
    let z1 = c(0.1, 0.4);
    let z2 = c(0.05, 0.3);
    let a = resolvent_gs(5, s, z1, z2, 500.0).unwrap();
    let b = resolvent_gs(5, s, z1, mobius([[1.0, 0.0], [5.0, 1.0]], z2), 500.0).unwrap();
    assert!((a.value - b.value).abs() < 1e-8, "{a:?} vs {b:?}");
}

#[test]
fn resolvent_self_convergence() {
    let s = c(2.0, 0.0);
    let a = resolvent_gs(1, s, c(0.0, 1.0), c(0.0, 2.0), 5e4).unwrap();
    let b = resolvent_gs(1, s, c(0.0, 1.0), c(0.0, 2.0), 1e5).unwrap();
    assert!((a.extrapolated() - b.extrapolated()).abs() < 1e-6, "{a:?} vs {b:?}");
    assert!((b.value - a.value).abs() <= a.tail_bound());
}

#[test]
fn resolvent_logarithmic_singularity() {
    let s = c(2.0, 0.0);
    for (z2, e) in [(c(0.0, 2.0), 1.0), (c(0.0, 1.0), 2.0), (c(0.5, 3f64.sqrt() / 2.0), 3.0)] {
        let mut limits = Vec::new();
        for dir in [c(1.0, 0.0), c(0.0, 1.0), c(-0.6, -0.8)] {
            let profile: Vec<f64> = [1e-2, 1e-3, 1e-4]
                .iter()
                .map(|&eps| {
                    let z1 = z2 + dir * eps;
                    resolvent_gs(1, s, z1, z2, 300.0).unwrap().value - e * (eps * eps).ln()
                })
                .collect();
            assert!((profile[2] - profile[1]).abs() < 1e-2, "z₂ = {z2}: {profile:?}");
            limits.push(profile[2]);
        }
        assert!(limits.iter().all(|x| (x - limits[0]).abs() < 1e-2), "{limits:?}");
    }
    assert!(matches!(resolvent_gs(1, s, c(0.0, 2.0), c(0.0, 0.5), 100.0), Err(thetalift::Error::Singular(_))));
}

#[test]
fn resolvent_eigenvalue() {
    let s = 2.0;
    let z2 = c(0.0, 2.0);
    for z in [c(0.1, 1.3), c(-0.35, 0.8), c(0.27, 2.6)] {
        let ev = ResolventEvaluator::new(1, c(s, 0.0), z, z2, 400.0).unwrap();
        let chk = laplacian_eigencheck(|w| Ok(ev.eval(w[0])?.value), &[z], 1e-3, 1.0, s * (s - 1.0)).unwrap();
        assert!(chk.residual < 1e-3, "z = {z}: {chk:?}");
    }
}

#[test]
fn sums_over_cm_cycles() {
    let set = heegner_points(1, -23, 1, HeegnerHypothesis::Coprime).unwrap();
    assert_eq!(sum_over_cm_cycle(|_| Ok(2.5), &set).unwrap(), 7.5);
    let single = heegner_points(1, -7, 1, HeegnerHypothesis::Coprime).unwrap();
    let f = |z: Complex64| Ok(resolvent_gs(1, c(2.0, 0.0), z, c(0.1, 2.0), 300.0)?.value);
    assert_eq!(sum_over_cm_cycle(f, &single).unwrap(), f(single.points[0].tau).unwrap());
    // brute force over the three reduced forms of discriminant −23
    let mut brute = 0.0;
    for (a, b, cc) in [(1i64, 1i64, 6i64), (2, 1, 3), (2, -1, 3)] {
        let _ = cc;
        let tau = c(-(b as f64) / (2.0 * a as f64), 23f64.sqrt() / (2.0 * a as f64));
        brute += f(tau).unwrap();
    }
    assert!((sum_over_cm_cycle(f, &set).unwrap() - brute).abs() < 1e-9);
    let d4 = heegner_points(1, -4, 0, HeegnerHypothesis::Coprime).unwrap();
    assert!(sum_over_cm_cycle(|z| Ok(1.0 / (z.re * 0.0)), &d4).is_err());
}
