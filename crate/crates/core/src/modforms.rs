//! Concrete modular objects: Hecke theta series of ideal classes, numerical
//! Siegel theta functions, truncated vector-valued Eisenstein series, Maass
//! raising and lowering operators, the Shimura coefficient map with Hecke
//! operators, and newform coefficients of elliptic curves by point counting.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{enumerate_quadric, ideal_norm_gram, BoundPolicy, DiscriminantModule, QuadraticLattice, Rat};
use crate::numerics::{e_of, gcd_i64, hurwitz_zeta};
use crate::quadfield::{kronecker_raw, xgcd, ClassGroup, FieldSign};
use crate::weil::{sl2_word, ExponentConvention, Generator, VectorValuedQSeries, WeilRep};

/// Theta series `θ_A = Σ r_A(m) q^m` of an ideal class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeckeThetaSeries {
    /// Field discriminant.
    pub disc: i64,
    /// Class index within the class group.
    pub class: usize,
    /// Weight `l(k)`: 1 for imaginary fields, 0 for real fields.
    pub weight: u8,
    /// `r_A(m)` for `0 ≤ m ≤ prec`.
    pub coeffs: Vec<Rat>,
}

/// `r_A(m) = (1/w) #{λ ∈ 𝔞 : Q_𝔞(λ) = m}` for imaginary fields, and
/// `r_A(m) = (1/2) #{λ ∈ 𝔞* : |Q_𝔞(λ)| = m}` for real fields, where `𝔞*` is a
/// fundamental domain for the action of `⟨ε⟩`.
pub fn hecke_theta(group: &ClassGroup, class: usize, prec: usize) -> Result<HeckeThetaSeries> {
    hecke_theta_rotated(group, class, prec, 0.0)
}

/// As [`hecke_theta`], with the real-quadratic fundamental domain rotated by `theta`.
pub fn hecke_theta_rotated(group: &ClassGroup, class: usize, prec: usize, theta: f64) -> Result<HeckeThetaSeries> {
    let form = *group
        .classes
        .get(class)
        .ok_or_else(|| Error::Invalid(format!("class index {class} out of range")))?;
    let field = &group.field;
    let mut coeffs = Vec::with_capacity(prec + 1);
    match field.sign {
        FieldSign::Imaginary => {
            let w = field.unit_count as i64;
            let counts = definite_form_counts(form.a, -form.b, form.c, prec);
            coeffs.extend(counts.iter().map(|&c| Rat::new(c, w)));
            Ok(HeckeThetaSeries { disc: field.disc, class, weight: 1, coeffs })
        }
        FieldSign::Real => {
            let fu = field
                .fundamental_unit
                .as_ref()
                .ok_or_else(|| Error::Invalid("real field without fundamental unit".into()))?;
            let t = fu.t.to_i64().ok_or_else(|| Error::Invalid("fundamental unit too large".into()))?;
            let u = fu.u.to_i64().ok_or_else(|| Error::Invalid("fundamental unit too large".into()))?;
            let lattice = QuadraticLattice::from_integer_gram(&ideal_norm_gram(form), format!("ideal {form}"))?;
            let zero = [Rat::zero(), Rat::zero()];
            let policy = BoundPolicy::UnitDomain { form, unit_t: t, unit_u: u, theta };
            coeffs.push(Rat::new(1, 2));
            for m in 1..=prec as i64 {
                let pos = enumerate_quadric(&lattice, &zero, Rat::from_integer(m), &policy)?;
                let neg = enumerate_quadric(&lattice, &zero, Rat::from_integer(-m), &policy)?;
                coeffs.push(Rat::new((pos.len() + neg.len()) as i64, 2));
            }
            Ok(HeckeThetaSeries { disc: field.disc, class, weight: 0, coeffs })
        }
    }
}

/// Representation numbers `#{(x, y) : a x² + b x y + c y² = m}` for
/// `0 ≤ m ≤ prec` of a positive definite form, by a single sweep of the ellipse.
pub fn definite_form_counts(a: i64, b: i64, c: i64, prec: usize) -> Vec<i64> {
    let disc = 4 * a * c - b * b;
    assert!(a > 0 && disc > 0, "form must be positive definite");
    let bound = 4 * a * prec as i64;
    let mut counts = vec![0i64; prec + 1];
    let ymax = crate::quadfield::isqrt_floor(bound / disc);
    for y in -ymax..=ymax {
        let rem = bound - disc * y * y;
        if rem < 0 {
            continue;
        }
        // (2ax + by)² ≤ rem
        let s = crate::quadfield::isqrt_floor(rem);
        let lo = (-b * y - s).div_euclid(2 * a);
        let hi = (-b * y + s).div_euclid(2 * a) + 1;
        for x in lo..=hi {
            let q = a * x * x + b * x * y + c * y * y;
            if (0..=prec as i64).contains(&q) {
                counts[q as usize] += 1;
            }
        }
    }
    counts
}

/// `θ(χ) = Σ_A χ(A) θ_A` as complex coefficients `0..=prec`.
pub fn theta_chi(group: &ClassGroup, chi: usize, prec: usize) -> Result<Vec<Complex64>> {
    let character = group
        .characters
        .get(chi)
        .ok_or_else(|| Error::Invalid(format!("character index {chi} out of range")))?;
    let mut out = vec![Complex64::zero(); prec + 1];
    for a in 0..group.order() {
        let th = hecke_theta(group, a, prec)?;
        let v = character.value(a);
        for (o, r) in out.iter_mut().zip(&th.coeffs) {
            *o += v * (*r.numer() as f64 / *r.denom() as f64);
        }
    }
    Ok(out)
}

/// Vector-valued theta series `Σ_μ Σ_m #{x ∈ μ + L : Q(x) = m} q^m 𝟙_μ` of a
/// positive definite lattice, for exponents below `max_m`.
pub fn definite_theta_series(
    lattice: &QuadraticLattice,
    module: &DiscriminantModule,
    max_m: i64,
) -> Result<VectorValuedQSeries> {
    if lattice.signature.1 != 0 {
        return Err(Error::Invalid("theta series requires a positive definite lattice".into()));
    }
    let mut th = VectorValuedQSeries::new(module, ExponentConvention::Plus, Rat::new(lattice.rank as i64, 2));
    for (mu, v) in module.cosets.iter().enumerate() {
        let mut m = module.norms[mu];
        while m < Rat::from_integer(max_m) {
            let s = enumerate_quadric(lattice, v, m, &BoundPolicy::Definite)?;
            if !s.is_empty() {
                th.insert(mu, m, Complex64::new(s.len() as f64, 0.0))?;
            }
            m += 1;
        }
    }
    Ok(th)
}

/// A maximal negative definite subspace, given by basis vectors in lattice coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct GrassmannPoint {
    /// Basis vectors of the negative definite subspace.
    pub basis: Vec<Vec<f64>>,
}

impl GrassmannPoint {
    /// The point of the sig-(1,2) Grassmannian attached to `z ∈ 𝔥`, spanned by
    /// the real and imaginary parts of `[[z, -z²], [1, -z]]` in the coordinates
    /// `(b, a, c)` of the level-`N` lattice.
    pub fn signature12(n: i64, z: Complex64) -> Result<Self> {
        if z.im <= 0.0 {
            return Err(Error::Domain(format!("{z} is not in the upper half plane")));
        }
        let nf = n as f64;
        let (x, y) = (z.re, z.im);
        Ok(Self { basis: vec![vec![x, nf * (x * x - y * y), 1.0], vec![y, 2.0 * nf * x * y, 0.0]] })
    }

    /// Pulls back a negative plane given in ambient coordinates through the
    /// linear map `ambient = A · lattice_coords`.
    pub fn from_ambient(a: &[Vec<f64>], ambient: &[Vec<f64>]) -> Result<Self> {
        let n = a.len();
        let m = DMatrix::from_fn(n, n, |i, j| a[i][j]);
        let inv = m.try_inverse().ok_or_else(|| Error::Singular("coordinate map is singular".into()))?;
        let basis = ambient
            .iter()
            .map(|v| (&inv * DVector::from_column_slice(v)).iter().copied().collect())
            .collect();
        Ok(Self { basis })
    }

    /// `Q(x_z)`, the norm of the projection of `x` onto the negative subspace.
    pub fn negative_norm(&self, gram: &[Vec<f64>], x: &[f64]) -> Result<f64> {
        let q = self.basis.len();
        if q == 0 {
            return Ok(0.0);
        }
        let bil = |u: &[f64], v: &[f64]| -> f64 {
            let mut s = 0.0;
            for i in 0..u.len() {
                for j in 0..v.len() {
                    s += u[i] * gram[i][j] * v[j];
                }
            }
            s
        };
        let h = DMatrix::from_fn(q, q, |i, j| bil(&self.basis[i], &self.basis[j]));
        let r = DVector::from_fn(q, |i, _| bil(x, &self.basis[i]));
        let hinv = h.try_inverse().ok_or_else(|| Error::Singular("negative plane is degenerate".into()))?;
        Ok(0.5 * r.dot(&(&hinv * &r)))
    }

    /// The majorant matrix `M_z` with `x^T M_z x = 2(Q(x_{z⊥}) - Q(x_z))`.
    pub fn majorant(&self, gram: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let n = gram.len();
        let q = self.basis.len();
        let g = DMatrix::from_fn(n, n, |i, j| gram[i][j]);
        if q == 0 {
            return Ok(gram.to_vec());
        }
        let b = DMatrix::from_fn(q, n, |i, j| self.basis[i][j]);
        let gb = &b * &g; // rows (G b_i)^T
        let h = &gb * b.transpose();
        let hinv = h.try_inverse().ok_or_else(|| Error::Singular("negative plane is degenerate".into()))?;
        let m = &g - 2.0 * gb.transpose() * hinv * &gb;
        Ok((0..n).map(|i| (0..n).map(|j| m[(i, j)]).collect()).collect())
    }
}

/// Value of a Siegel theta function on each coset.
#[derive(Debug, Clone, Serialize)]
pub struct SiegelThetaValue {
    /// `Σ_{x ∈ μ + L} e(Q(x_{z⊥}) τ + Q(x_z) τ̄)` per coset.
    pub components: Vec<Complex64>,
    /// The components multiplied by `v^{q/2}`.
    pub scaled: Vec<Complex64>,
    /// Bound for the omitted terms.
    pub tail_bound: f64,
    /// Set when the tail bound exceeds the relative tolerance.
    pub truncation_warning: bool,
}

/// Evaluates the Siegel theta function of an even lattice at `(τ, z)`,
/// summing over vectors with `Q(x_{z⊥}) - Q(x_z) ≤ radius²`.
pub fn siegel_theta_eval(
    lattice: &QuadraticLattice,
    module: &DiscriminantModule,
    tau: Complex64,
    z: &GrassmannPoint,
    radius: f64,
) -> Result<SiegelThetaValue> {
    if tau.im <= 0.0 {
        return Err(Error::Domain(format!("{tau} is not in the upper half plane")));
    }
    let gi = lattice.integer_gram()?;
    let gram: Vec<Vec<f64>> = gi.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
    let n = lattice.rank;
    let maj = z.majorant(&gram)?;
    let v = tau.im;
    let mut components = Vec::with_capacity(module.order);
    for mu in &module.cosets {
        let muf: Vec<f64> = mu.iter().map(|x| *x.numer() as f64 / *x.denom() as f64).collect();
        let centre: Vec<f64> = muf.iter().map(|x| -x).collect();
        let ys = crate::lattice::fincke_pohst(&maj, &centre, 2.0 * radius * radius)?;
        let mut acc = Complex64::zero();
        for y in ys {
            let x: Vec<f64> = (0..n).map(|i| muf[i] + y[i] as f64).collect();
            let mut qx = 0.0;
            for i in 0..n {
                for j in 0..n {
                    qx += 0.5 * x[i] * gram[i][j] * x[j];
                }
            }
            let qneg = z.negative_norm(&gram, &x)?;
            let qpos = qx - qneg;
            acc += e_of(qpos * tau.re + qneg * tau.re) * (-2.0 * PI * v * (qpos - qneg)).exp();
        }
        components.push(acc);
    }
    // lattice points with majorant value in [t, t+1] are at most the volume of
    // the corresponding shell plus a boundary layer
    let det = DMatrix::from_fn(n, n, |i, j| maj[i][j]).determinant().abs();
    let unit_ball = PI.powf(n as f64 / 2.0) / crate::numerics::gamma_real(n as f64 / 2.0 + 1.0)?;
    let count = |t: f64| unit_ball * (2.0 * t + 2.0 * (n as f64).sqrt()).powf(n as f64 / 2.0) / det.sqrt() + 1.0;
    let r2 = radius * radius;
    let mut tail = 0.0;
    for k in 0..200 {
        let t = r2 + k as f64;
        tail += count(t + 1.0) * (-2.0 * PI * v * t).exp();
    }
    let (_, q) = lattice.signature;
    let scale = v.powf(q as f64 / 2.0);
    let scaled = components.iter().map(|c| c * scale).collect();
    let max = components.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
    Ok(SiegelThetaValue { components, scaled, tail_bound: tail, truncation_warning: tail > 1e-12 * max })
}

/// Truncated vector-valued Eisenstein series
/// `E(τ, s; l) = Σ_{γ ∈ Γ_∞\Γ} (v^{(s+1-l)/2} 𝟙₀)|_l γ` for a lattice of even rank.
#[derive(Debug, Clone)]
pub struct EisensteinEvaluator {
    /// Representation data.
    pub weil: WeilRep,
    /// Coset truncation `0 < c ≤ c_max`, `|d| ≤ c_max`.
    pub c_max: i64,
    /// Margin δ in the convergence condition `Re s > 1 + δ`.
    pub delta: f64,
    terms: Vec<(i64, i64, Vec<Complex64>)>,
}

/// Result of a truncated Eisenstein evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct EisensteinValue {
    /// Coset components.
    pub components: Vec<Complex64>,
    /// Bound for the omitted cosets.
    pub tail_bound: f64,
}

impl EisensteinEvaluator {
    /// Precomputes `ρ(γ)⁻¹ 𝟙₀` for all cosets in the truncation.
    pub fn new(weil: WeilRep, c_max: i64) -> Result<Self> {
        let (p, q) = weil.signature;
        if (p + q) % 2 != 0 {
            return Err(Error::Invalid("Eisenstein series are implemented for even rank".into()));
        }
        if c_max < 1 {
            return Err(Error::Invalid("c_max must be positive".into()));
        }
        let n = weil.module.order;
        let mut e0 = vec![Complex64::zero(); n];
        e0[0] = Complex64::new(1.0, 0.0);
        let mut terms = vec![(0, 1, e0.clone())];
        for c in 1..=c_max {
            for d in -c_max..=c_max {
                if gcd_i64(c, d) != 1 {
                    continue;
                }
                // complete to γ = [[a, b], [c, d]] and apply ρ(γ⁻¹) = ρ([[d, -b], [-c, a]])
                let (_, x, y) = xgcd(d, c);
                // x d + y c = 1, so γ = [[x, -y], [c, d]]
                let inv = [[d, y], [-c, x]];
                terms.push((c, d, apply_word(&weil, inv, &e0)?));
            }
        }
        Ok(Self { weil, c_max, delta: 0.1, terms })
    }

    /// Evaluates `E(τ, s; l)` on all cosets.
    pub fn eval(&self, tau: Complex64, s: Complex64, l: i64) -> Result<EisensteinValue> {
        if s.re <= 1.0 + self.delta {
            return Err(Error::Domain(format!("Re(s) = {} is outside the convergent range", s.re)));
        }
        if tau.im <= 0.0 {
            return Err(Error::Domain(format!("{tau} is not in the upper half plane")));
        }
        let (p, q) = self.weil.signature;
        let parity = if l.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        if (e_of((p as f64 - q as f64) / 4.0) * parity - 1.0).norm() > 1e-12 {
            return Err(Error::Invalid(format!("weight {l} has the wrong parity for signature ({p}, {q})")));
        }
        let v = tau.im;
        let n = self.weil.module.order;
        let expo = (s + 1.0 - l as f64) / 2.0;
        let vpow = Complex64::new(v, 0.0).powc(expo);
        let mut acc = vec![Complex64::zero(); n];
        for (c, d, vec) in &self.terms {
            let j = tau * *c as f64 + *d as f64;
            let factor = j.powi(-(l as i32)) * Complex64::new(j.norm(), 0.0).powc(l as f64 - s - 1.0) * vpow;
            for (a, b) in acc.iter_mut().zip(vec) {
                *a += factor * b;
            }
        }
        // tail: |cτ + d|² ≥ κ (c² + d²) and #{(c, d) : max(|c|, |d|) = k} ≤ 8k
        let sigma = s.re;
        let (u, vv) = (tau.re, v);
        let tr = u * u + vv * vv + 1.0;
        let det = vv * vv;
        let kappa = (tr - (tr * tr - 4.0 * det).max(0.0).sqrt()) / 2.0;
        let cm = self.c_max as f64;
        let tail = 0.5 * kappa.powf(-(sigma + 1.0) / 2.0) * v.powf((sigma + 1.0 - l as f64) / 2.0) * 8.0
            * cm.powf(1.0 - sigma)
            / (sigma - 1.0);
        Ok(EisensteinValue { components: acc, tail_bound: tail })
    }

    /// Classical real-analytic Eisenstein series `½ Σ_{(c,d)=1} v^σ |cτ + d|^{-2σ}`
    /// truncated the same way (scalar oracle).
    pub fn classical_partial_sum(tau: Complex64, sigma: f64, c_max: i64) -> f64 {
        let v = tau.im;
        let mut acc = v.powf(sigma);
        for c in 1..=c_max {
            for d in -c_max..=c_max {
                if gcd_i64(c, d) == 1 {
                    acc += v.powf(sigma) / (tau * c as f64 + d as f64).norm().powf(2.0 * sigma);
                }
            }
        }
        acc
    }
}

fn apply_word(weil: &WeilRep, gamma: [[i64; 2]; 2], v: &[Complex64]) -> Result<Vec<Complex64>> {
    let word = sl2_word(gamma)?;
    let mut x = DVector::from_column_slice(v);
    for g in word.iter().rev() {
        x = match *g {
            Generator::S => &weil.s_matrix * x,
            Generator::T(k) => DVector::from_fn(x.len(), |i, _| x[i] * weil.t_diag[i].powi(k as i32)),
        };
    }
    Ok(x.iter().copied().collect())
}

/// Which Maass-type differential operator to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MaassKind {
    /// Lowering `L_l = -2i v² ∂_τ̄`.
    Lower,
    /// Raising `R_l = 2i ∂_τ + l / v`.
    Raise,
    /// `ξ_l F = v^{l-2} conj(L_l F)`.
    Xi,
}

/// Output of a finite-difference operator evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct StencilResult {
    /// Operator applied to each component.
    pub value: Vec<Complex64>,
    /// Difference between the step-`h` and step-`h/2` extrapolations.
    pub error_estimate: f64,
}

fn richardson_partials<F>(f: &F, tau: Complex64, h: f64) -> Result<(Vec<Complex64>, Vec<Complex64>)>
where
    F: Fn(Complex64) -> Result<Vec<Complex64>>,
{
    let central = |dir: Complex64, step: f64| -> Result<Vec<Complex64>> {
        let a = f(tau + dir * step)?;
        let b = f(tau - dir * step)?;
        Ok(a.iter().zip(&b).map(|(x, y)| (x - y) / (2.0 * step)).collect())
    };
    let rich = |dir: Complex64| -> Result<Vec<Complex64>> {
        let d1 = central(dir, h)?;
        let d2 = central(dir, h / 2.0)?;
        Ok(d1.iter().zip(&d2).map(|(a, b)| (4.0 * b - a) / 3.0).collect())
    };
    Ok((rich(Complex64::new(1.0, 0.0))?, rich(Complex64::new(0.0, 1.0))?))
}

/// Applies a Maass operator of weight `l` to a vector-valued function by
/// Richardson-extrapolated central differences with step `h`.
pub fn maass_operator<F>(f: F, kind: MaassKind, l: i64, tau: Complex64, h: f64) -> Result<StencilResult>
where
    F: Fn(Complex64) -> Result<Vec<Complex64>>,
{
    if tau.im <= 2.0 * h {
        return Err(Error::Domain("stencil leaves the upper half plane".into()));
    }
    let apply = |h: f64| -> Result<Vec<Complex64>> {
        let (dx, dy) = richardson_partials(&f, tau, h)?;
        let v = tau.im;
        let i = Complex64::i();
        Ok(match kind {
            MaassKind::Lower | MaassKind::Xi => {
                let lower: Vec<Complex64> = dx
                    .iter()
                    .zip(&dy)
                    .map(|(a, b)| -2.0 * i * v * v * 0.5 * (a + i * b))
                    .collect();
                if kind == MaassKind::Lower {
                    lower
                } else {
                    lower.iter().map(|z| z.conj() * v.powi(l as i32 - 2)).collect()
                }
            }
            MaassKind::Raise => {
                let fv = f(tau)?;
                dx.iter()
                    .zip(&dy)
                    .zip(&fv)
                    .map(|((a, b), g)| 2.0 * i * 0.5 * (a - i * b) + g * (l as f64 / v))
                    .collect()
            }
        })
    };
    let coarse = apply(h)?;
    let fine = apply(h / 2.0)?;
    let err = coarse.iter().zip(&fine).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    Ok(StencilResult { value: fine, error_estimate: err })
}

/// Coefficients of a weight-2 form `Σ c(n) q^n` indexed from `n = 0`.
pub type ScalarCoeffs = Vec<Complex64>;

/// The Shimura coefficient map
/// `c(n) = Σ_{d | n} (D₀/d) c_g(μ_{r n/d}, m₀ n²/d²)` for a series on the
/// signature-(1,2) module of level `N` with `D₀ = -4 N m₀ ≡ r² mod 4N`.
pub fn shimura_lift_coeffs(g: &VectorValuedQSeries, n_level: i64, r: i64, m0: Rat, prec: usize) -> Result<ScalarCoeffs> {
    let d0 = shimura_discriminant(n_level, r, m0)?;
    let modulus = 2 * n_level;
    if g.module_order() as i64 != modulus {
        return Err(Error::ModuleMismatch("series does not live on the level-N module".into()));
    }
    let mut out = vec![Complex64::zero(); prec + 1];
    for n in 1..=prec as i64 {
        let mut acc = Complex64::zero();
        for d in 1..=n {
            if n % d != 0 {
                continue;
            }
            let k = n / d;
            let chi = kronecker_raw(d0, d) as f64;
            if chi == 0.0 {
                continue;
            }
            let mu = (r * k).rem_euclid(modulus) as usize;
            acc += g.coeff(mu, m0 * (k * k)) * chi;
        }
        out[n as usize] = acc;
    }
    Ok(out)
}

fn shimura_discriminant(n_level: i64, r: i64, m0: Rat) -> Result<i64> {
    let d = m0 * (-4 * n_level);
    if !d.is_integer() || d.to_integer() >= 0 {
        return Err(Error::Invalid(format!("-4 N m0 = {d} is not a negative integer")));
    }
    let d = d.to_integer();
    if (d - r * r).rem_euclid(4 * n_level) != 0 {
        return Err(Error::Invalid(format!("{d} is not congruent to {r}^2 mod {}", 4 * n_level)));
    }
    Ok(d)
}

/// The sequence `b(k) = c_g(μ_{r k}, m₀ k²)` for `1 ≤ k ≤ prec` (index 0 unused).
pub fn shimura_radial_coeffs(g: &VectorValuedQSeries, n_level: i64, r: i64, m0: Rat, prec: usize) -> Result<ScalarCoeffs> {
    shimura_discriminant(n_level, r, m0)?;
    let modulus = 2 * n_level;
    let mut out = vec![Complex64::zero(); prec + 1];
    for k in 1..=prec as i64 {
        out[k as usize] = g.coeff((r * k).rem_euclid(modulus) as usize, m0 * (k * k));
    }
    Ok(out)
}

/// Dirichlet convolution of the character `(D/·)` with a coefficient sequence.
pub fn twist_convolve(d: i64, b: &[Complex64]) -> ScalarCoeffs {
    let prec = b.len().saturating_sub(1);
    let mut out = vec![Complex64::zero(); prec + 1];
    for e in 1..=prec {
        let chi = kronecker_raw(d, e as i64) as f64;
        if chi == 0.0 {
            continue;
        }
        for k in 1..=prec / e {
            out[e * k] += b[k] * chi;
        }
    }
    out
}

/// The Hecke operator `T(p²)` on series over the signature-(1,2) module of
/// level `N`, in the discriminant indexing
/// `c*(D, r) = c(p²D, pr) + (D/p) c(D, r) + p c(D/p², r/p)` with `D = -4Nm`.
/// Coefficients are produced for exponents `m ≤ max_m`.
pub fn hecke_tp2(g: &VectorValuedQSeries, n_level: i64, p: i64, max_m: Rat) -> Result<VectorValuedQSeries> {
    let modulus = 2 * n_level;
    if g.module_order() as i64 != modulus {
        return Err(Error::ModuleMismatch("series does not live on the level-N module".into()));
    }
    if !is_prime(p) {
        return Err(Error::Invalid(format!("{p} is not prime")));
    }
    let mut out = g.clone();
    out.terms.clear();
    let pf = p as f64;
    for r in 0..modulus {
        let mut m = g.norms[r as usize];
        while m <= max_m {
            if m > Rat::zero() {
                let d = (m * (-4 * n_level)).to_integer();
                let mut c = g.coeff(((p * r).rem_euclid(modulus)) as usize, m * (p * p));
                c += g.coeff(r as usize, m) * kronecker_raw(d, p) as f64;
                if d % (p * p) == 0 {
                    let d2 = d / (p * p);
                    // r' with p r' ≡ r mod 2N and r'² ≡ d2 mod 4N
                    let cands: Vec<i64> = (0..modulus)
                        .filter(|&s| (p * s - r).rem_euclid(modulus) == 0 && (s * s - d2).rem_euclid(4 * n_level) == 0)
                        .collect();
                    match cands.as_slice() {
                        [] => {}
                        [s] => c += g.coeff(*s as usize, m / (p * p)) * pf,
                        _ => {
                            return Err(Error::Invalid(format!(
                                "coset of D/p^2 is ambiguous for p = {p} at level {n_level}"
                            )))
                        }
                    }
                }
                if c != Complex64::zero() {
                    out.insert(r as usize, m, c)?;
                }
            }
            m += 1;
        }
    }
    Ok(out)
}

/// The weight-2 Hecke operator `T_p` at level prime to `p`:
/// `c'(n) = c(pn) + p c(n/p)`, computed for `n ≤ (len - 1)/p`.
pub fn hecke_tp_weight2(c: &[Complex64], p: usize) -> ScalarCoeffs {
    let prec = (c.len() - 1) / p;
    let mut out = vec![Complex64::zero(); prec + 1];
    for n in 1..=prec {
        out[n] = c[p * n];
        if n % p == 0 {
            out[n] += c[n / p] * p as f64;
        }
    }
    out
}

/// Deterministic primality by trial division (inputs are small).
pub fn is_prime(n: i64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Primes up to `n` by the sieve of Eratosthenes.
pub fn primes_up_to(n: usize) -> Vec<usize> {
    if n < 2 {
        return Vec::new();
    }
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    (0..=n).filter(|&k| sieve[k]).collect()
}

/// An elliptic curve in long Weierstrass form
/// `y² + a₁xy + a₃y = x³ + a₂x² + a₄x + a₆`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Curve {
    /// Coefficients `[a₁, a₂, a₃, a₄, a₆]`.
    pub a: [i64; 5],
}

impl Curve {
    /// Builds a curve from its five coefficients.
    pub fn new(a: [i64; 5]) -> Self {
        Self { a }
    }

    /// The discriminant `Δ`.
    pub fn discriminant(&self) -> i128 {
        let [a1, a2, a3, a4, a6] = self.a.map(|x| x as i128);
        let b2 = a1 * a1 + 4 * a2;
        let b4 = 2 * a4 + a1 * a3;
        let b6 = a3 * a3 + 4 * a6;
        let b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
        -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6
    }

    /// Cache key `a1,a2,a3,a4,a6`.
    pub fn key(&self) -> String {
        self.a.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
    }
}

/// `a_p = p + 1 - #E(𝔽_p)` by exhaustive point counting (the singular point is
/// counted at primes of bad reduction, giving the local value 1, -1 or 0).
pub fn ap_from_curve(curve: &Curve, p: i64) -> Result<i64> {
    if !is_prime(p) {
        return Err(Error::Invalid(format!("{p} is not prime")));
    }
    let a = curve.a.map(|x| x.rem_euclid(p));
    let [a1, a2, a3, a4, a6] = a;
    let mut count: i64 = 1; // point at infinity
    if p == 2 {
        for x in 0..2 {
            for y in 0..2 {
                let lhs = (y * y + a1 * x * y + a3 * y) % 2;
                let rhs = (x * x * x + a2 * x * x + a4 * x + a6) % 2;
                if lhs == rhs {
                    count += 1;
                }
            }
        }
        return Ok(p + 1 - count);
    }
    // number of square roots of each residue
    let mut roots = vec![0i64; p as usize];
    for y in 0..p {
        roots[((y * y) % p) as usize] += 1;
    }
    for x in 0..p {
        let f = (((x * x % p) * x) % p + a2 * (x * x % p) + a4 * x + a6) % p;
        let b = (a1 * x + a3) % p;
        // y² + b y - f = 0 has as many roots as (b² + 4f) has square roots
        let disc = (b * b + 4 * f) % p;
        count += roots[disc as usize];
    }
    Ok(p + 1 - count)
}

/// Coefficients `a(n)` of the weight-2 newform attached to an elliptic curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NewformCoefficients {
    /// Level (conductor of the curve).
    pub level: i64,
    /// Weight (always 2).
    pub weight: u8,
    /// `a(n)` for `0 ≤ n ≤ prec` with `a(0) = 0`.
    pub a: Vec<i64>,
    /// Eigenvalue of the Fricke involution (input metadata).
    pub fricke_sign: i8,
}

impl NewformCoefficients {
    /// Sign of the functional equation of the standard L-function, `-w_N`.
    pub fn root_number(&self) -> i8 {
        -self.fricke_sign
    }

    /// Number of coefficients beyond `a(0)`.
    pub fn prec(&self) -> usize {
        self.a.len() - 1
    }
}

/// Prime-indexed `a_p` for all primes up to `pmax`, computed in parallel.
pub fn ap_table(curve: &Curve, pmax: usize) -> Result<BTreeMap<i64, i64>> {
    let primes = primes_up_to(pmax);
    let vals: Vec<(i64, i64)> = primes
        .par_iter()
        .map(|&p| ap_from_curve(curve, p as i64).map(|a| (p as i64, a)))
        .collect::<Result<_>>()?;
    Ok(vals.into_iter().collect())
}

/// Extends prime coefficients to all `n ≤ prec` by the Hecke recursion
/// `a(p^{k+1}) = a(p) a(p^k) - p a(p^{k-1})` (with `a(p^k) = a(p)^k` for
/// `p | N`) and multiplicativity.
pub fn newform_from_ap(level: i64, ap: &BTreeMap<i64, i64>, prec: usize, fricke_sign: i8) -> Result<NewformCoefficients> {
    let mut a = vec![0i64; prec + 1];
    if prec >= 1 {
        a[1] = 1;
    }
    // smallest prime factor sieve
    let mut spf = vec![0usize; prec + 1];
    for i in 2..=prec {
        if spf[i] == 0 {
            let mut j = i;
            while j <= prec {
                if spf[j] == 0 {
                    spf[j] = i;
                }
                j += i;
            }
        }
    }
    for n in 2..=prec {
        let p = spf[n];
        let mut m = n;
        let mut k = 0;
        while m % p == 0 {
            m /= p;
            k += 1;
        }
        let pk = n / m;
        if m > 1 {
            a[n] = a[pk] * a[m];
            continue;
        }
        let app = *ap
            .get(&(p as i64))
            .ok_or(Error::InsufficientCoefficients { have: ap.len(), need: p })?;
        a[n] = if k == 1 {
            app
        } else if level % p as i64 == 0 {
            app * a[n / p]
        } else {
            app * a[n / p] - p as i64 * a[n / (p * p)]
        };
    }
    Ok(NewformCoefficients { level, weight: 2, a, fricke_sign })
}

/// Newform coefficients of a curve of the given conductor up to `prec`.
pub fn newform_from_curve(curve: &Curve, level: i64, prec: usize, fricke_sign: i8) -> Result<NewformCoefficients> {
    let ap = ap_table(curve, prec)?;
    newform_from_ap(level, &ap, prec, fricke_sign)
}

/// Plain-text cache of `a_p` values, one `p a_p` pair per line, sorted by `p`.
pub struct ApCache;

impl ApCache {
    /// Reads a cache file.
    pub fn load(path: &Path) -> Result<BTreeMap<i64, i64>> {
        let text = std::fs::read_to_string(path)?;
        let mut out = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let parse = |s: Option<&str>| -> Result<i64> {
                s.and_then(|x| x.parse().ok())
                    .ok_or_else(|| Error::Invalid(format!("malformed cache line {}: '{line}'", i + 1)))
            };
            let p = parse(it.next())?;
            let a = parse(it.next())?;
            out.insert(p, a);
        }
        Ok(out)
    }

    /// Writes a cache file with a header naming the curve.
    pub fn save(path: &Path, curve: &Curve, table: &BTreeMap<i64, i64>) -> Result<()> {
        let mut s = format!("# curve {}\n", curve.key());
        for (p, a) in table {
            s.push_str(&format!("{p} {a}\n"));
        }
        std::fs::write(path, s)?;
        Ok(())
    }

    /// Loads the table if it covers `pmax` and belongs to the curve, otherwise
    /// recomputes and rewrites it.
    pub fn get_or_compute(path: &Path, curve: &Curve, pmax: usize) -> Result<BTreeMap<i64, i64>> {
        if let Ok(text) = std::fs::read_to_string(path) {
            let header_ok = text.lines().next() == Some(&format!("# curve {}", curve.key()));
            if header_ok {
                let table = Self::load(path)?;
                let covered = primes_up_to(pmax).iter().all(|p| table.contains_key(&(*p as i64)));
                if covered {
                    return Ok(table.into_iter().filter(|(p, _)| *p as usize <= pmax).collect());
                }
            }
        }
        let table = ap_table(curve, pmax)?;
        Self::save(path, curve, &table)?;
        Ok(table)
    }
}

/// Riemann zeta at real `s > 1` (used in bounds).
pub fn zeta_real(s: f64) -> Result<f64> {
    Ok(hurwitz_zeta(Complex64::new(s, 0.0), 1.0)?.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_37a_small_primes() {
        let e = Curve::new([0, 0, 1, -1, 0]);
        assert_eq!(e.discriminant(), 37);
        assert_eq!(ap_from_curve(&e, 2).unwrap(), -2);
        assert_eq!(ap_from_curve(&e, 3).unwrap(), -3);
    }

    #[test]
    fn gaussian_theta() {
        let g = crate::quadfield::class_group(-4).unwrap();
        let th = hecke_theta(&g, 0, 5).unwrap();
        let expect = [Rat::new(1, 4), Rat::from_integer(1), Rat::from_integer(1), Rat::zero(), Rat::new(1, 1), Rat::from_integer(2)];
        assert_eq!(th.coeffs, expect);
    }
}
