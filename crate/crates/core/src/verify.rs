//! End-to-end verification suites. Each suite returns a
//! [`VerificationReport`] whose checks are ordered deterministically.

use std::time::Instant;

use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cycles::{cm_cycle_degree, heegner_points, heegner_residues, j_minus_744, trace_cm, DegreeConvention, HeegnerHypothesis};
use crate::error::Result;
use crate::greens::{laplacian_eigencheck, HilbertEvaluator, LiftEvaluator, ResolventEvaluator};
use crate::lattice::{build_la_lattice, build_signature12_lattice, QuadraticLattice, Rat};
use crate::lfunc::{central_derivative, fe_residual, lambda_eval, rankin_selberg_coeffs, standard_weight2};
use crate::modforms::{
    hecke_theta, maass_operator, newform_from_curve, shimura_lift_coeffs, shimura_radial_coeffs, twist_convolve, Curve,
    EisensteinEvaluator, GrassmannPoint, MaassKind, NewformCoefficients,
};
use crate::numerics::{exp_integral_e1, gcd_i64};
use crate::quadfield::{class_group, class_number_from_l_value, fundamental_discriminants, kronecker_symbol, QuadraticField};
use crate::report::{Check, VerificationReport};
use crate::weil::{weil_generators, ExponentConvention, VectorValuedQSeries, WeilRep};

/// An elliptic curve with its conductor and the sign of the Fricke involution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CurveData {
    /// Weierstrass coefficients `[a1, a2, a3, a4, a6]`.
    pub coeffs: [i64; 5],
    /// Conductor.
    pub level: i64,
    /// Eigenvalue of the Fricke involution on the attached newform.
    pub fricke_sign: i8,
}

impl CurveData {
    /// The curve 37a: y² + y = x³ − x.
    pub const C37A: CurveData = CurveData { coeffs: [0, 0, 1, -1, 0], level: 37, fricke_sign: 1 };
    /// The curve 389a: y² + y = x³ + x² − 2x.
    pub const C389A: CurveData = CurveData { coeffs: [0, 1, 1, -2, 0], level: 389, fricke_sign: -1 };

    /// Newform coefficients `a(0..=prec)`.
    pub fn newform(&self, prec: usize) -> Result<NewformCoefficients> {
        newform_from_curve(&Curve::new(self.coeffs), self.level, prec, self.fricke_sign)
    }
}

fn timed(suite: &str, body: impl FnOnce(&mut VerificationReport)) -> VerificationReport {
    let start = Instant::now();
    let mut report = VerificationReport::new(suite);
    body(&mut report);
    report.wall_time_s = start.elapsed().as_secs_f64();
    report
}

/// Runs `f` and records its value against `expected`, or a failed check on error.
fn attempt(id: impl Into<String>, description: &str, expected: f64, tol: f64, f: impl FnOnce() -> Result<f64>) -> Check {
    let id = id.into();
    match f() {
        Ok(v) => Check::new(id, description, expected, v, tol),
        Err(e) => Check::failed(id, description, expected, tol, &e),
    }
}

/// Class numbers from `L(1, η)` against form enumeration for every
/// fundamental discriminant with `|d| ≤ max_disc`.
pub fn classnumber(max_disc: i64) -> VerificationReport {
    timed("classnumber", |r| {
        let checks: Vec<Check> = fundamental_discriminants(max_disc)
            .into_par_iter()
            .map(|d| {
                let id = format!("d={d}");
                match QuadraticField::new(d) {
                    Ok(field) => attempt(id, "h from L(1, eta) vs reduced forms", field.class_number as f64, 1e-6, || {
                        class_number_from_l_value(&field)
                    }),
                    Err(e) => Check::failed(id, "field construction", f64::NAN, 1e-6, &e),
                }
            })
            .collect();
        r.checks = checks;
    })
}

/// Rankin–Selberg checks for `curve × θ(𝟙)` over `Q(√disc)`: sign, functional
/// equation, vanishing central value, the central derivative computed two
/// ways, and the Heegner point count.
pub fn gross_zagier(curve: &CurveData, disc: i64, prec: usize) -> VerificationReport {
    timed(&format!("gz{}", curve.level), |r| {
        r.push(attempt("sign", "eta_k(-N)", -1.0, 0.0, || Ok(kronecker_symbol(disc, -curve.level)? as f64)));
        let built = curve.newform(prec).and_then(|phi| {
            let group = class_group(disc)?;
            Ok((rankin_selberg_coeffs(&phi, &group, 0, prec)?, group))
        });
        let (spec, group) = match built {
            Ok(x) => x,
            Err(e) => {
                r.push(Check::failed("setup", "coefficients", 0.0, 0.0, &e));
                return;
            }
        };
        r.push(Check::new("root_number", "declared functional-equation sign", -1.0, spec.sign.re, 0.0));
        let samples = [
            Complex64::new(0.2, 0.0),
            Complex64::new(0.5, 1.0),
            Complex64::new(0.7, -0.4),
            Complex64::new(1.1, 0.3),
            Complex64::new(0.35, 2.0),
        ];
        r.push(attempt("fe_residual", "max |Lambda(s) - eps Q^(1-2s) Lambda(1-s)|", 0.0, 1e-5, || fe_residual(&spec, &samples)));
        r.push(attempt("lambda_half", "|Lambda(1/2)|", 0.0, 1e-8, || {
            Ok(lambda_eval(&spec, Complex64::new(0.5, 0.0))?.value.norm())
        }));
        match central_derivative(&spec) {
            Ok(d) => {
                r.push(Check::new("derivative_agreement", "kernel series vs central differences", d.kernel_series, d.numeric, 1e-6));
                r.observe("lambda_prime_half", d.kernel_series);
                r.observe("l_prime_half", d.l_derivative);
            }
            Err(e) => r.push(Check::failed("derivative_agreement", "central derivative", 0.0, 1e-6, &e)),
        }
        let h = group.field.class_number as i64;
        match heegner_residues(curve.level, disc).first() {
            Some(&res) => match heegner_points(curve.level, disc, res, HeegnerHypothesis::Coprime) {
                Ok(set) => r.push(Check::exact("heegner_count", "Heegner points vs h(D)", h, set.len() as i64)),
                Err(e) => r.push(Check::failed("heegner_count", "Heegner enumeration", h as f64, 0.0, &e)),
            },
            None => r.push(Check::failed(
                "heegner_count",
                "Heegner enumeration",
                h as f64,
                0.0,
                &crate::Error::Domain(format!("{disc} is not a square mod {}", 4 * curve.level)),
            )),
        }
    })
}

/// `L'(E, 1)` of a rank-one curve by two internal methods and by the
/// exponential-integral series `Σ 2 a_n/n E₁(2πn/√N)`.
pub fn central_derivative_suite(curve: &CurveData, prec: usize) -> VerificationReport {
    timed("derivative", |r| {
        let phi = match curve.newform(prec) {
            Ok(p) => p,
            Err(e) => return r.push(Check::failed("setup", "coefficients", 0.0, 0.0, &e)),
        };
        let spec = match standard_weight2(&phi) {
            Ok(s) => s,
            Err(e) => return r.push(Check::failed("setup", "standard L-function", 0.0, 0.0, &e)),
        };
        let d = match central_derivative(&spec) {
            Ok(d) => d,
            Err(e) => return r.push(Check::failed("agreement", "central derivative", 0.0, 1e-6, &e)),
        };
        r.push(Check::new("agreement", "kernel series vs central differences", d.kernel_series, d.numeric, 1e-6));
        let q = (curve.level as f64).sqrt();
        let series: Result<f64> = (1..=prec)
            .map(|n| Ok(2.0 * phi.a[n] as f64 / n as f64 * exp_integral_e1(2.0 * std::f64::consts::PI * n as f64 / q)?))
            .sum();
        r.push(match series {
            Ok(s) => Check::new("e1_series", "L'(E,1) vs exponential-integral series", s, d.l_derivative, 1e-5),
            Err(e) => Check::failed("e1_series", "exponential-integral series", 0.0, 1e-5, &e),
        });
        r.observe("l_prime_one", d.l_derivative);
    })
}

fn weil_checks(r: &mut VerificationReport, label: &str, w: &WeilRep) {
    let c = w.checks();
    let phase = Complex64::new(c.braid_phase.0, c.braid_phase.1);
    for (name, value) in [
        ("unitarity", c.unitarity),
        ("s_squared", c.s_squared),
        ("braid", c.braid),
        ("braid_phase", (phase - 1.0).norm()),
        ("s_symmetry", c.s_symmetry),
    ] {
        r.push(Check::new(format!("{label}/{name}"), "Weil relation residual", 0.0, value, 1e-12));
    }
}

/// Weil-representation relations for the signature-(1, 2) modules of the
/// given levels and the signature-(2, 2) modules `L_A` of the given fields.
pub fn weil_suite(levels: &[i64], la_discs: &[i64]) -> VerificationReport {
    timed("weil", |r| {
        for &n in levels {
            match build_signature12_lattice(n) {
                Ok((l, m)) => weil_checks(r, &format!("sig12 N={n}"), &weil_generators(&m, l.signature)),
                Err(e) => r.push(Check::failed(format!("sig12 N={n}"), "lattice", 0.0, 0.0, &e)),
            }
        }
        for &d in la_discs {
            let built = QuadraticField::new(d).and_then(|f| build_la_lattice(&f, &class_group(d)?, 0, 1));
            match built {
                Ok((l, m)) => weil_checks(r, &format!("LA d={d}"), &weil_generators(&m, l.signature)),
                Err(e) => r.push(Check::failed(format!("LA d={d}"), "lattice", 0.0, 0.0, &e)),
            }
        }
    })
}

/// Heegner point counts against class numbers, and classical degrees of the
/// level-one CM cycles for D = −3, −4, −7, −8.
pub fn heegner_suite(levels: &[i64], max_disc: i64) -> VerificationReport {
    timed("heegner", |r| {
        let discs: Vec<i64> = fundamental_discriminants(max_disc).into_iter().filter(|d| *d < 0).collect();
        for &n in levels {
            let checks: Vec<Check> = discs
                .par_iter()
                .filter(|&&d| gcd_i64(d, n) == 1)
                .flat_map_iter(|&d| {
                    let h = class_group(d).map(|g| g.field.class_number as i64);
                    heegner_residues(n, d).into_iter().map(move |res| {
                        let id = format!("N={n} D={d} r={res}");
                        match (&h, heegner_points(n, d, res, HeegnerHypothesis::Coprime)) {
                            (Ok(h), Ok(set)) => Check::exact(id, "Heegner points vs h(D)", *h, set.len() as i64),
                            (Err(e), _) => Check::failed(id, "class group", f64::NAN, 0.0, e),
                            (_, Err(e)) => Check::failed(id, "Heegner enumeration", f64::NAN, 0.0, &e),
                        }
                    })
                })
                .collect();
            r.checks.extend(checks);
        }
        for (d, expect) in [(-3i64, 1.0 / 3.0), (-4, 0.5), (-7, 1.0), (-8, 1.0)] {
            r.push(attempt(format!("degree D={d}"), "classical degree of the CM cycle", expect, 1e-12, || {
                Ok(cm_cycle_degree(1, d, DegreeConvention::Classical)?.to_f64().unwrap_or(f64::NAN))
            }));
        }
    })
}

/// Traces of `j − 744` over the level-one CM cycles of discriminant −3, −4, −7.
pub fn singular_moduli() -> VerificationReport {
    timed("traces", |r| {
        for (d, expect) in [(-3i64, -248.0), (-4, 492.0), (-7, -4119.0)] {
            r.push(attempt(format!("D={d}"), "trace of j - 744", expect, 1e-6, || {
                let res = d.rem_euclid(2);
                Ok(trace_cm(j_minus_744, &heegner_points(1, d, res, HeegnerHypothesis::Coprime)?)?.re)
            }));
        }
    })
}

/// Laplacian eigenvalue checks for the three Green's functions at three
/// points each, with `h = 1e-3` stencils.
pub fn greens_suite() -> VerificationReport {
    const H: f64 = 1e-3;
    const TOL: f64 = 1e-3;
    timed("greens", |r| {
        let c = Complex64::new;
        let points = [c(0.1, 1.3), c(-0.35, 0.8), c(0.27, 2.1)];
        if let Ok((l, m)) = build_signature12_lattice(1) {
            let s = 1.5;
            let expected = 0.5 * (s - 0.75) * (s - 0.25);
            for (k, &z) in points.iter().enumerate() {
                r.push(attempt(format!("lift/{k}"), "lift eigenvalue residual", 0.0, TOL, || {
                    let centre = GrassmannPoint::signature12(1, z)?;
                    let ev = LiftEvaluator::new(&l, &m, 0, Rat::from_integer(1), c(s, 0.0), &centre, 10.0)?;
                    let f = |w: &[Complex64]| Ok(ev.eval(&GrassmannPoint::signature12(1, w[0])?)?.value);
                    Ok(laplacian_eigencheck(f, &[z], H, 0.125, expected)?.residual)
                }));
            }
        }
        let s = 2.2;
        let expected = 0.5 * s * (s - 1.0);
        let pairs = [(c(0.2, 1.1), c(-0.3, 0.9)), (c(0.05, 1.6), c(0.4, 0.75)), (c(-0.4, 0.95), c(0.1, 1.4))];
        for (k, &(z1, z2)) in pairs.iter().enumerate() {
            r.push(attempt(format!("hilbert/{k}"), "Hilbert eigenvalue residual", 0.0, TOL, || {
                let field = QuadraticField::new(-4)?;
                let group = class_group(-4)?;
                let (l, m) = build_la_lattice(&field, &group, 0, 1)?;
                let ev = HilbertEvaluator::new(&field, &group, 0, &l, &m, 0, Rat::from_integer(1), c(s, 0.0), (z1, z2), 10.0)?;
                Ok(laplacian_eigencheck(|w| Ok(ev.eval(w[0], w[1])?.value), &[z1, z2], H, 0.25, expected)?.residual)
            }));
        }
        let s = 2.0;
        for (k, &z) in [c(0.1, 1.3), c(-0.35, 0.8), c(0.27, 2.6)].iter().enumerate() {
            r.push(attempt(format!("resolvent/{k}"), "resolvent eigenvalue residual", 0.0, TOL, || {
                let ev = ResolventEvaluator::new(1, c(s, 0.0), z, c(0.0, 2.0), 400.0)?;
                Ok(laplacian_eigencheck(|w| Ok(ev.eval(w[0])?.value), &[z], H, 1.0, s * (s - 1.0))?.residual)
            }));
        }
    })
}

/// Lowering identity `L_l E(τ, s; l) = ½(s + 1 − l) E(τ, s; l − 2)` at five
/// random `(τ, s)` with `Re s = 2.5`, for a positive definite and an
/// indefinite binary lattice.
pub fn eisenstein_suite(seed: u64) -> VerificationReport {
    timed("eisenstein", |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples: Vec<(Complex64, Complex64)> = (0..5)
            .map(|_| {
                let tau = Complex64::new(rng.random_range(-0.5..0.5), rng.random_range(0.75..1.75));
                (tau, Complex64::new(2.5, rng.random_range(-2.5..2.5)))
            })
            .collect();
        for (label, gram, l) in [("cm", [[2i64, 1], [1, 12]], 1i64), ("geodesic", [[2, 1], [1, -2]], 2)] {
            let gram: Vec<Vec<i64>> = gram.iter().map(|row| row.to_vec()).collect();
            let ev = QuadraticLattice::from_integer_gram(&gram, label)
                .and_then(|lat| Ok((lat.discriminant_module()?, lat.signature)))
                .and_then(|(m, sig)| EisensteinEvaluator::new(weil_generators(&m, sig), 8));
            for (k, &(tau, s)) in samples.iter().enumerate() {
                r.push(attempt(format!("{label}/{k}"), "lowering identity residual", 0.0, 1e-6, || {
                    let ev = ev.as_ref().map_err(Clone::clone)?;
                    let f = |t: Complex64| ev.eval(t, s, l).map(|v| v.components);
                    let lowered = maass_operator(f, MaassKind::Lower, l, tau, 1e-3)?;
                    let target = ev.eval(tau, s, l - 2)?.components;
                    let factor = 0.5 * (s + 1.0 - l as f64);
                    Ok(lowered.value.iter().zip(&target).map(|(a, b)| (a - b * factor).norm()).fold(0.0, f64::max))
                }));
            }
        }
    })
}

/// Random integer weight-3/2 data on the level-N module with `0 < m ≤ max_m`.
pub fn synthetic_series(n: i64, max_m: i64, seed: u64) -> Result<VectorValuedQSeries> {
    let (_, module) = build_signature12_lattice(n)?;
    let mut g = VectorValuedQSeries::new(&module, ExponentConvention::Plus, Rat::new(3, 2));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for mu in 0..module.order {
        let mut e = module.norms[mu];
        while e <= Rat::from_integer(max_m) {
            if e > Rat::zero() {
                g.insert(mu, e, Complex64::new(rng.random_range(-10i32..=10) as f64, 0.0))?;
            }
            e += 1;
        }
    }
    Ok(g)
}

/// Exact agreement of the Shimura coefficient map with the twisted
/// convolution of its radial coefficients, up to `prec`.
pub fn shimura_suite(seed: u64, prec: usize) -> VerificationReport {
    timed("shimura", |r| {
        let cases = [(1i64, -3i64, 1i64), (1, -4, 0), (5, -11, 3), (37, -3, 21), (37, -4, 12), (37, -7, 17)];
        let checks: Vec<Check> = cases
            .par_iter()
            .map(|&(n, d0, res)| {
                let id = format!("N={n} D0={d0}");
                let run = || -> Result<i64> {
                    let m0 = Rat::new(-d0, 4 * n);
                    let max_m = (m0 * (prec * prec) as i64).ceil().to_integer() + 1;
                    let g = synthetic_series(n, max_m, seed ^ (n as u64) << 8)?;
                    let direct = shimura_lift_coeffs(&g, n, res, m0, prec)?;
                    let product = twist_convolve(d0, &shimura_radial_coeffs(&g, n, res, m0, prec)?);
                    Ok((1..=prec).filter(|&k| direct[k] != product[k]).count() as i64)
                };
                match run() {
                    Ok(bad) => Check::exact(id, "coefficients differing from the Dirichlet identity", 0, bad),
                    Err(e) => Check::failed(id, "Shimura map", 0.0, 0.0, &e),
                }
            })
            .collect();
        r.checks = checks;
    })
}

/// `Σ_A r_A(m) = Σ_{e | m} η(e)` for `m ≤ max_m`.
pub fn theta_suite(discs: &[i64], max_m: usize) -> VerificationReport {
    timed("theta", |r| {
        for &d in discs {
            let run = || -> Result<i64> {
                let g = class_group(d)?;
                let mut total = vec![Rat::zero(); max_m + 1];
                for a in 0..g.order() {
                    for (t, c) in total.iter_mut().zip(&hecke_theta(&g, a, max_m)?.coeffs) {
                        *t += c;
                    }
                }
                let mut bad = 0;
                for (m, t) in total.iter().enumerate().skip(1) {
                    let mut expect = 0i64;
                    for e in (1..=m).filter(|e| m % e == 0) {
                        expect += kronecker_symbol(d, e as i64)? as i64;
                    }
                    bad += (*t != Rat::from_integer(expect)) as i64;
                }
                Ok(bad)
            };
            r.push(match run() {
                Ok(bad) => Check::exact(format!("d={d}"), "coefficients differing from the divisor sum", 0, bad),
                Err(e) => Check::failed(format!("d={d}"), "theta series", 0.0, 0.0, &e),
            });
        }
    })
}

/// Every suite with its default parameters.
pub fn all(seed: u64) -> VerificationReport {
    let start = Instant::now();
    let mut report = VerificationReport::new("all");
    report.absorb(classnumber(500));
    report.absorb(gross_zagier(&CurveData::C37A, -139, 20000));
    report.absorb(gross_zagier(&CurveData::C389A, -7, 20000));
    report.absorb(central_derivative_suite(&CurveData::C37A, 5000));
    report.absorb(heegner_suite(&[1, 5, 37], 200));
    report.absorb(singular_moduli());
    report.absorb(greens_suite());
    report.absorb(eisenstein_suite(seed));
    report.absorb(shimura_suite(seed, 200));
    report.absorb(weil_suite(&[1, 2, 37], &[-4]));
    report.absorb(theta_suite(&[-4, -23, 5, 12], 200));
    report.wall_time_s = start.elapsed().as_secs_f64();
    report
}
