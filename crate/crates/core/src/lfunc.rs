//! Rankin–Selberg and standard L-functions: Dirichlet coefficients, completed
//! functional equations, evaluation by a smoothed approximate functional
//! equation, central derivatives, and class-partial series.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::modforms::{hecke_theta, theta_chi, NewformCoefficients};
use crate::numerics::{bessel_k, gamma, gauss_legendre, gcd_i64, ComplexKahanSum};
use crate::quadfield::{kronecker_raw, ClassGroup, FieldSign};

/// Shape of the archimedean factor `γ(s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GammaFactor {
    /// `(2π)^{-2s} Γ(s + ½)²`, the product of a weight-2 newform with a theta series.
    RsWeight2Theta,
    /// `(2π)^{-s} Γ(s + ½)`, a weight-2 newform.
    StdWeight2,
    /// `π^{-(s+a)/2} Γ((s + a)/2)` for a Dirichlet character of parity `a`.
    Dirichlet {
        /// 0 for even, 1 for odd characters.
        parity: u8,
    },
}

/// `γ(s) = k · c^{-s} Π_j Γ(α s + β_j)`.
#[derive(Debug, Clone, PartialEq)]
struct GammaShape {
    constant: f64,
    c: f64,
    alpha: f64,
    betas: Vec<f64>,
}

impl GammaFactor {
    fn shape(&self) -> GammaShape {
        match *self {
            GammaFactor::RsWeight2Theta => GammaShape { constant: 1.0, c: 4.0 * PI * PI, alpha: 1.0, betas: vec![0.5, 0.5] },
            GammaFactor::StdWeight2 => GammaShape { constant: 1.0, c: 2.0 * PI, alpha: 1.0, betas: vec![0.5] },
            GammaFactor::Dirichlet { parity } => {
                let a = parity as f64;
                GammaShape { constant: PI.powf(-a / 2.0), c: PI.sqrt(), alpha: 0.5, betas: vec![a / 2.0] }
            }
        }
    }

    /// Evaluates `γ(s)` directly.
    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        let sh = self.shape();
        let mut v = Complex64::new(sh.constant, 0.0) * (-s * sh.c.ln()).exp();
        for b in &sh.betas {
            v *= gamma(s * sh.alpha + b)?;
        }
        Ok(v)
    }
}

/// A completed L-function `Λ(s) = γ(s) Σ b(n) n^{-s}` with
/// `Λ(s) = ε Q^{1-2s} Λ(1-s)` and centre `½`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LFunctionSpec {
    /// Human-readable description.
    pub label: String,
    /// `b(n)` for `0 ≤ n ≤ prec` (`b(0)` is unused and zero).
    pub coeffs: Vec<Complex64>,
    /// Archimedean factor.
    pub gamma_factor: GammaFactor,
    /// `Q` in the functional equation.
    pub conductor: f64,
    /// Root number `ε`.
    pub sign: Complex64,
    /// Critical centre (always ½).
    pub critical_center: f64,
    /// Conditions that do not prevent evaluation but weaken it.
    pub warnings: Vec<String>,
}

impl LFunctionSpec {
    /// Builds a spec, checking `|ε| = 1` and the coefficient count.
    pub fn new(label: impl Into<String>, coeffs: Vec<Complex64>, gamma_factor: GammaFactor, conductor: f64, sign: Complex64) -> Result<Self> {
        if (sign.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!("root number {sign} does not have modulus one")));
        }
        if !(conductor > 0.0) {
            return Err(Error::Invalid(format!("conductor must be positive, got {conductor}")));
        }
        if coeffs.len() < 2 {
            return Err(Error::InsufficientCoefficients { have: coeffs.len().saturating_sub(1), need: 1 });
        }
        let mut warnings = Vec::new();
        let prec = coeffs.len() - 1;
        let want = 3.0 * conductor.sqrt();
        if (prec as f64) < want {
            warnings.push(format!("prec = {prec} is below 3·sqrt(Q) = {want:.1}"));
        }
        Ok(Self { label: label.into(), coeffs, gamma_factor, conductor, sign, critical_center: 0.5, warnings })
    }

    /// Number of Dirichlet coefficients.
    pub fn prec(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// The same spec with every coefficient multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c *= k;
        }
        out
    }

    /// The same spec with a different root number (used as a negative control).
    pub fn with_sign(&self, sign: Complex64) -> Result<Self> {
        Self::new(self.label.clone(), self.coeffs.clone(), self.gamma_factor, self.conductor, sign)
    }

    /// Partial Dirichlet series `Σ_{n ≤ prec} b(n) n^{-s}` (meaningful for large `Re s`).
    pub fn dirichlet_partial_sum(&self, s: Complex64) -> Complex64 {
        let mut acc = ComplexKahanSum::new();
        for (n, b) in self.coeffs.iter().enumerate().skip(1) {
            acc.add(b * (-s * (n as f64).ln()).exp());
        }
        acc.total()
    }
}

/// Default coefficient count `max(2000, 50 √Q)`.
pub fn default_prec(conductor: f64) -> usize {
    (50.0 * conductor.sqrt()).ceil().max(2000.0) as usize
}

/// Dirichlet coefficients of `L(s, φ × θ(χ))` in the unitary normalization:
/// `b(n) = n^{-1/2} Σ_{k² m = n, (k, N) = 1} η(k) k a_φ(m) r_χ(m)`, i.e. the
/// convolution with `L^{(N)}(2s, η)` folded in.
pub fn rankin_selberg_coeffs(phi: &NewformCoefficients, group: &ClassGroup, chi: usize, prec: usize) -> Result<LFunctionSpec> {
    let d = group.field.disc;
    let n_level = phi.level;
    let c = rankin_selberg_unnormalized(phi, group, chi, prec)?;
    let coeffs = c.iter().enumerate().map(|(n, x)| if n == 0 { *x } else { x / (n as f64).sqrt() }).collect();
    let sign = kronecker_raw(d, -n_level) as f64;
    let kind = match group.field.sign {
        FieldSign::Imaginary => "CM",
        FieldSign::Real => "geodesic",
    };
    LFunctionSpec::new(
        format!("L(s, f x theta(chi_{chi})) level {n_level}, d = {d} ({kind})"),
        coeffs,
        GammaFactor::RsWeight2Theta,
        (d * n_level).unsigned_abs() as f64,
        Complex64::new(sign, 0.0),
    )
}

/// The integral coefficients `C(n) = Σ_{k² m = n, (k, N) = 1} η(k) k a_φ(m) r_χ(m)`
/// before the `n^{-1/2}` normalization.
pub fn rankin_selberg_unnormalized(phi: &NewformCoefficients, group: &ClassGroup, chi: usize, prec: usize) -> Result<Vec<Complex64>> {
    let d = group.field.disc;
    let n_level = phi.level;
    if gcd_i64(d, n_level) != 1 {
        return Err(Error::Gcd(format!("gcd(N, d) = gcd({n_level}, {d}) is not 1")));
    }
    if phi.prec() < prec {
        return Err(Error::InsufficientCoefficients { have: phi.prec(), need: prec });
    }
    let r = theta_chi(group, chi, prec)?;
    let mut c = vec![Complex64::zero(); prec + 1];
    let mut k = 1usize;
    while k * k <= prec {
        if gcd_i64(k as i64, n_level) == 1 {
            let eta = kronecker_raw(d, k as i64) as f64;
            if eta != 0.0 {
                for m in 1..=prec / (k * k) {
                    c[k * k * m] += r[m] * (phi.a[m] as f64 * eta * k as f64);
                }
            }
        }
        k += 1;
    }
    Ok(c)
}

/// Standard L-function of a weight-2 newform, `b(n) = a(n)/√n`, `Q = √N`.
pub fn standard_weight2(phi: &NewformCoefficients) -> Result<LFunctionSpec> {
    let coeffs = phi
        .a
        .iter()
        .enumerate()
        .map(|(n, &a)| if n == 0 { Complex64::zero() } else { Complex64::new(a as f64 / (n as f64).sqrt(), 0.0) })
        .collect();
    LFunctionSpec::new(
        format!("L(s, f) level {}", phi.level),
        coeffs,
        GammaFactor::StdWeight2,
        (phi.level as f64).sqrt(),
        Complex64::new(phi.root_number() as f64, 0.0),
    )
}

/// `L(s, η_d)` for a fundamental discriminant `d`, `Q = √|d|`.
pub fn dirichlet_spec(d: i64, prec: usize) -> Result<LFunctionSpec> {
    if !crate::quadfield::is_fundamental(d) {
        return Err(Error::NonFundamental(d));
    }
    let coeffs = (0..=prec as i64)
        .map(|n| if n == 0 { Complex64::zero() } else { Complex64::new(kronecker_raw(d, n) as f64, 0.0) })
        .collect();
    LFunctionSpec::new(
        format!("L(s, eta_{d})"),
        coeffs,
        GammaFactor::Dirichlet { parity: u8::from(d < 0) },
        (d.unsigned_abs() as f64).sqrt(),
        Complex64::new(1.0, 0.0),
    )
}

/// Integration grid for `h_s(x) = ∫_x^∞ K(u) u^{α s} du/u` at the nodes `x_n`.
#[derive(Debug, Clone)]
struct KernelGrid {
    /// Per node `x_n`: `ln x_n`.
    ln_x: Vec<f64>,
    /// Flat quadrature data, `ranges[n]` indexing the pieces of `[x_n, x_{n+1}]`.
    ranges: Vec<(usize, usize)>,
    ln_u: Vec<f64>,
    weight: Vec<f64>,
}

impl KernelGrid {
    fn new(shape: &GammaShape, nodes: &[f64]) -> Result<Self> {
        let (gl_x, gl_w) = gauss_legendre(12);
        let kernel = |u: f64| -> Result<f64> {
            Ok(match shape.betas.as_slice() {
                [b] => u.powf(*b) * (-u).exp(),
                [b1, b2] => 2.0 * u.powf((b1 + b2) / 2.0) * bessel_k(b1 - b2, 2.0 * u.sqrt())?,
                _ => return Err(Error::Invalid("unsupported gamma factor".into())),
            })
        };
        let scale = |u: f64| -> f64 {
            if shape.betas.len() == 2 {
                u.sqrt().max(1.0)
            } else {
                1.0
            }
        };
        // beyond u_cut the integrand is below e^{-80} for Re(αs) ≤ 3
        let mut u_cut = 1.0f64;
        loop {
            let k = kernel(u_cut)?;
            if k <= 0.0 || k.ln() + 3.0 * u_cut.ln() < -80.0 {
                break;
            }
            u_cut *= 1.05;
        }
        let mut ranges = Vec::with_capacity(nodes.len());
        let mut ln_u = Vec::new();
        let mut weight = Vec::new();
        for (i, &a) in nodes.iter().enumerate() {
            let start = ln_u.len();
            let b = nodes.get(i + 1).copied().unwrap_or(f64::INFINITY).min(u_cut.max(a));
            let mut cur = a;
            while cur < b {
                let step = cur.min(2.0 * scale(cur));
                let next = (cur + step).min(b);
                let half = 0.5 * (next - cur);
                let mid = 0.5 * (next + cur);
                for (x, w) in gl_x.iter().zip(&gl_w) {
                    let u = mid + half * x;
                    ln_u.push(u.ln());
                    weight.push(w * half * kernel(u)? / u);
                }
                cur = next;
            }
            ranges.push((start, ln_u.len()));
        }
        Ok(Self { ln_x: nodes.iter().map(|x| x.ln()).collect(), ranges, ln_u, weight })
    }

    /// `(h_s(x_n), ∂_s h_s(x_n))` for all nodes, by suffix sums of the piecewise integrals.
    fn h_values(&self, alpha: f64, s: Complex64, derivative: bool) -> (Vec<Complex64>, Vec<Complex64>) {
        let n = self.ranges.len();
        let mut h = vec![Complex64::zero(); n];
        let mut dh = vec![Complex64::zero(); if derivative { n } else { 0 }];
        let mut acc = ComplexKahanSum::new();
        let mut dacc = ComplexKahanSum::new();
        for i in (0..n).rev() {
            let (a, b) = self.ranges[i];
            let mut piece = Complex64::zero();
            let mut dpiece = Complex64::zero();
            for j in a..b {
                let t = (s * (alpha * self.ln_u[j])).exp() * self.weight[j];
                piece += t;
                if derivative {
                    dpiece += t * (alpha * self.ln_u[j]);
                }
            }
            acc.add(piece);
            h[i] = acc.total();
            if derivative {
                dacc.add(dpiece);
                dh[i] = dacc.total();
            }
        }
        (h, dh)
    }
}

/// Value of `Λ(s)` with a heuristic error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaValue {
    /// `Λ(s)`.
    pub value: Complex64,
    /// Size of the truncated tail, extrapolated from the last terms.
    pub error_estimate: f64,
}

/// Smoothed approximate functional equation split at `u = T`:
/// `Q^s Λ(s) = T^s Σ b(n) x_n^{-αs} h_s(x_n) + ε T^{s-1} Σ conj(b(n)) x'_n^{-α(1-s)} h_{1-s}(x'_n)`
/// with `x_n = (c n T / Q)^{1/α}`, `x'_n = (c n / (T Q))^{1/α}`.
#[derive(Debug, Clone)]
pub struct AfeEvaluator {
    spec: LFunctionSpec,
    split: f64,
    alpha: f64,
    constant: f64,
    direct: KernelGrid,
    dual: KernelGrid,
}

impl AfeEvaluator {
    /// Prepares kernel grids for the spec with splitting point `T`.
    pub fn new(spec: &LFunctionSpec, split: f64) -> Result<Self> {
        let sh = spec.gamma_factor.shape();
        let prec = spec.prec();
        let node = |n: usize, t: f64| (sh.c * n as f64 * t / spec.conductor).powf(1.0 / sh.alpha);
        let direct_nodes: Vec<f64> = (1..=prec).map(|n| node(n, split)).collect();
        let dual_nodes: Vec<f64> = (1..=prec).map(|n| node(n, 1.0 / split)).collect();
        // the kernel must have decayed at the last node
        let shape_decay = |x: f64| -> bool {
            match sh.betas.len() {
                1 => x > 20.0,
                _ => 2.0 * x.sqrt() > 20.0,
            }
        };
        let last = direct_nodes[prec - 1].min(dual_nodes[prec - 1]);
        if !shape_decay(last) {
            let need_x: f64 = match sh.betas.len() {
                1 => 20.0,
                _ => 100.0,
            };
            let need = (spec.conductor * need_x.powf(sh.alpha) / sh.c * split.max(1.0 / split)).ceil() as usize;
            return Err(Error::InsufficientCoefficients { have: prec, need });
        }
        let direct = KernelGrid::new(&sh, &direct_nodes)?;
        let dual = if (split - 1.0).abs() < 1e-15 { direct.clone() } else { KernelGrid::new(&sh, &dual_nodes)? };
        Ok(Self { spec: spec.clone(), split, alpha: sh.alpha, constant: sh.constant, direct, dual })
    }

    fn half_sum(&self, grid: &KernelGrid, s: Complex64, conj: bool, derivative: bool) -> (Complex64, Complex64, f64) {
        let (h, dh) = grid.h_values(self.alpha, s, derivative);
        let mut acc = ComplexKahanSum::new();
        let mut dacc = ComplexKahanSum::new();
        let prec = self.spec.prec();
        let tail_from = prec - (prec / 20).max(1);
        let mut tail = 0.0;
        for n in 1..=prec {
            let b = if conj { self.spec.coeffs[n].conj() } else { self.spec.coeffs[n] };
            if b == Complex64::zero() {
                continue;
            }
            let lx = grid.ln_x[n - 1];
            let xpow = (-s * (self.alpha * lx)).exp();
            let term = b * xpow * h[n - 1];
            acc.add(term);
            if derivative {
                dacc.add(b * xpow * (dh[n - 1] - h[n - 1] * (self.alpha * lx)));
            }
            if n > tail_from {
                tail += term.norm();
            }
        }
        (acc.total(), dacc.total(), tail)
    }

    /// `Λ(s)`.
    pub fn lambda(&self, s: Complex64) -> Result<LambdaValue> {
        if !(-1.0..=2.0).contains(&s.re) {
            return Err(Error::Domain(format!("Re(s) = {} is outside [-1, 2]", s.re)));
        }
        let t = self.split;
        let (a, _, ta) = self.half_sum(&self.direct, s, false, false);
        let (b, _, tb) = self.half_sum(&self.dual, Complex64::new(1.0, 0.0) - s, true, false);
        let ts = (s * t.ln()).exp();
        let ts1 = ((s - 1.0) * t.ln()).exp();
        let q = (-s * self.spec.conductor.ln()).exp() * self.constant;
        let value = q * (ts * a + self.spec.sign * ts1 * b);
        let err = q.norm() * (ts.norm() * ta + ts1.norm() * tb) + 1e-14 * value.norm();
        Ok(LambdaValue { value, error_estimate: err })
    }

    /// `Λ'(s)` from the differentiated kernel series.
    pub fn lambda_derivative(&self, s: Complex64) -> Result<Complex64> {
        let t = self.split;
        let lt = t.ln();
        let lq = self.spec.conductor.ln();
        let one = Complex64::new(1.0, 0.0);
        let (a, da, _) = self.half_sum(&self.direct, s, false, true);
        let (b, db, _) = self.half_sum(&self.dual, one - s, true, true);
        let ts = (s * lt).exp();
        let ts1 = ((s - 1.0) * lt).exp();
        let inner = ts * a + self.spec.sign * ts1 * b;
        // d/ds of the dual half carries a sign from the argument 1 - s
        let dinner = ts * (lt * a + da) + self.spec.sign * ts1 * (lt * b - db);
        let q = (-s * lq).exp() * self.constant;
        Ok(q * (dinner - lq * inner))
    }
}

/// `Λ(s)` by the approximate functional equation split at `T = 1`.
pub fn lambda_eval(spec: &LFunctionSpec, s: Complex64) -> Result<LambdaValue> {
    AfeEvaluator::new(spec, 1.0)?.lambda(s)
}

/// `max |Λ(s) - ε Q^{1-2s} Λ(1-s)|` over the samples, where the two sides are
/// evaluated with different splitting points so that the identity is a genuine
/// test of the declared sign, conductor and coefficients.
pub fn fe_residual(spec: &LFunctionSpec, samples: &[Complex64]) -> Result<f64> {
    let left = AfeEvaluator::new(spec, 1.0)?;
    let right = AfeEvaluator::new(spec, 1.2)?;
    let mut worst = 0.0f64;
    for &s in samples {
        let l = left.lambda(s)?.value;
        let r = right.lambda(Complex64::new(1.0, 0.0) - s)?.value;
        let factor = spec.sign * ((Complex64::new(1.0, 0.0) - 2.0 * s) * spec.conductor.ln()).exp();
        worst = worst.max((l - factor * r).norm());
    }
    Ok(worst)
}

/// Central derivative computed two ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CentralDerivative {
    /// `Λ'(½)` from the differentiated kernel series.
    pub kernel_series: f64,
    /// `Λ'(½)` from Richardson-extrapolated central differences of `Λ`.
    pub numeric: f64,
    /// `L'(½) = Λ'(½)/γ(½)` (since `Λ(½) = 0`).
    pub l_derivative: f64,
    /// `|kernel_series - numeric|`.
    pub agreement: f64,
}

/// `Λ'(½)` for a spec with odd sign.
pub fn central_derivative(spec: &LFunctionSpec) -> Result<CentralDerivative> {
    if (spec.sign + 1.0).norm() > 1e-12 {
        return Err(Error::Invalid(format!("central derivative requires sign -1, got {}", spec.sign)));
    }
    let afe = AfeEvaluator::new(spec, 1.0)?;
    let half = Complex64::new(0.5, 0.0);
    let kernel = afe.lambda_derivative(half)?.re;
    let h = 1e-3;
    let diff = |h: f64| -> Result<f64> {
        Ok((afe.lambda(half + h)?.value - afe.lambda(half - h)?.value).re / (2.0 * h))
    };
    let numeric = (4.0 * diff(h / 2.0)? - diff(h)?) / 3.0;
    let g = spec.gamma_factor.eval(half)?.re;
    Ok(CentralDerivative { kernel_series: kernel, numeric, l_derivative: kernel / g, agreement: (kernel - numeric).abs() })
}

/// `L(s) = Λ(s)/γ(s)`.
pub fn l_value(spec: &LFunctionSpec, s: Complex64) -> Result<Complex64> {
    Ok(lambda_eval(spec, s)?.value / spec.gamma_factor.eval(s)?)
}

/// Class-partial series `L_A(s, φ) = Σ_{𝔞 ∈ A} a_φ(N𝔞) N𝔞^{-s}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassPartialL {
    /// Field discriminant.
    pub disc: i64,
    /// Class index.
    pub class: usize,
    /// Coefficients `a_φ(n) · #{𝔞 ∈ A : N𝔞 = n}` for `0 ≤ n ≤ prec`.
    pub coeffs: Vec<i64>,
}

/// Coefficients of the class-partial series.
pub fn class_partial_coeffs(group: &ClassGroup, class: usize, phi: &NewformCoefficients, prec: usize) -> Result<ClassPartialL> {
    if phi.prec() < prec {
        return Err(Error::InsufficientCoefficients { have: phi.prec(), need: prec });
    }
    let th = hecke_theta(group, class, prec)?;
    let mut coeffs = vec![0i64; prec + 1];
    for n in 1..=prec {
        let r = th.coeffs[n];
        if !r.is_integer() {
            return Err(Error::Invalid(format!("ideal count at n = {n} is not integral: {r}")));
        }
        coeffs[n] = phi.a[n] * r.to_integer();
    }
    Ok(ClassPartialL { disc: group.field.disc, class, coeffs })
}
