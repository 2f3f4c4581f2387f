//! Automorphic Green's functions: the closed form of the regularized theta
//! lift, its Legendre-function specialization on Hilbert modular surfaces,
//! the resolvent kernel of Γ₀(N), finite-difference Laplacian checks, and
//! sums over CM cycles.
//!
//! Every evaluator freezes its truncation set (lattice vectors or group
//! elements) when it is built around a centre point. Evaluating the frozen
//! sum at nearby points then gives an exact eigenfunction of the Laplacian,
//! so finite-difference stencils are never disturbed by terms entering or
//! leaving the truncation. The reported tail is a shell extrapolation: the
//! terms in the outermost dyadic shell, continued geometrically with the
//! ratio 2^{u − Re s} predicted by the growth of the vector count and the
//! decay of the summands (u = n/4 + 1/2).

use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::cycles::{HeegnerPointSet, Mat2};
use crate::error::{Error, Result};
use crate::lattice::{enumerate_quadric, BoundPolicy, DiscriminantModule, QuadraticLattice, Rat};
use crate::modforms::GrassmannPoint;
use crate::numerics::{gamma, hyp2f1, legendre_q, ComplexKahanSum, KahanSum};
use crate::quadfield::{ClassGroup, FieldSign, QuadraticField};

/// Default clearance from the divisor: ₂F₁ arguments are kept ≤ 1 − 10⁻².
pub const DEFAULT_DELTA_MIN: f64 = 1e-2;

/// A truncated sum together with the extrapolated size of the omitted part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenValue {
    /// Sum over the frozen truncation set.
    pub value: f64,
    /// Shell extrapolation of the omitted terms (signed).
    pub tail_estimate: f64,
}

impl GreenValue {
    /// Absolute size of the tail estimate.
    pub fn tail_bound(&self) -> f64 {
        self.tail_estimate.abs()
    }

    /// The truncated sum plus the tail estimate.
    pub fn extrapolated(&self) -> f64 {
        self.value + self.tail_estimate
    }
}

fn shell_ratio(u: f64, sigma: f64) -> f64 {
    2f64.powf(u - sigma)
}

fn tail_from_shell(shell: f64, u: f64, sigma: f64) -> f64 {
    let r = shell_ratio(u, sigma);
    shell * r / (1.0 - r)
}

fn gram_f64(lattice: &QuadraticLattice) -> Result<Vec<Vec<f64>>> {
    Ok(lattice
        .integer_gram()?
        .iter()
        .map(|r| r.iter().map(|&x| x as f64).collect())
        .collect())
}

/// Closed-form regularized theta lift Φ_{μ,m}(z, s) for an even lattice of
/// signature (n, 2), with the vectors λ ∈ μ + L, Q(λ) = m > 0 frozen inside
/// a majorant ball around a centre point.
#[derive(Debug, Clone)]
pub struct LiftEvaluator {
    /// n in the signature (n, 2).
    pub n: usize,
    /// Norm m > 0 of the divisor vectors.
    pub m: f64,
    /// Spectral parameter.
    pub s: Complex64,
    /// Squared majorant radius of the frozen set.
    pub radius_sq: f64,
    /// Minimal clearance 1 − m/Q(λ_{z⊥}) from the divisor.
    pub delta_min: f64,
    gram: Vec<Vec<f64>>,
    vectors: Vec<Vec<f64>>,
    shell: Vec<bool>,
}

impl LiftEvaluator {
    /// Enumerates λ ∈ μ + L with Q(λ) = m and majorant norm ≤ radius² at `centre`.
    pub fn new(
        lattice: &QuadraticLattice,
        module: &DiscriminantModule,
        mu: usize,
        m: Rat,
        s: Complex64,
        centre: &GrassmannPoint,
        radius: f64,
    ) -> Result<Self> {
        if lattice.signature.1 != 2 {
            return Err(Error::Invalid(format!(
                "the lift needs signature (n, 2), got {:?}",
                lattice.signature
            )));
        }
        let n = lattice.signature.0;
        let u = n as f64 / 4.0 + 0.5;
        if !(s.re > u) {
            return Err(Error::Domain(format!("the lift converges for Re(s) > {u}, got {s}")));
        }
        if m <= Rat::zero() {
            return Err(Error::Domain(format!("divisor norm must be positive, got {m}")));
        }
        let coset = module
            .cosets
            .get(mu)
            .ok_or_else(|| Error::Invalid(format!("coset index {mu} out of range")))?;
        let gram = gram_f64(lattice)?;
        let majorant = centre.majorant(&gram)?;
        let radius_sq = radius * radius;
        let slice = enumerate_quadric(lattice, coset, m, &BoundPolicy::MajorantBall { majorant: majorant.clone(), radius_sq })?;
        let vectors: Vec<Vec<f64>> = (0..slice.len()).map(|i| slice.vector_f64(i)).collect();
        let shell = vectors
            .iter()
            .map(|x| quad_form(&majorant, x) > 0.5 * radius_sq)
            .collect();
        Ok(Self {
            n,
            m: m.to_f64().unwrap_or(f64::NAN),
            s,
            radius_sq,
            delta_min: DEFAULT_DELTA_MIN,
            gram,
            vectors,
            shell,
        })
    }

    /// Number of frozen vectors.
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    /// Whether no vector of norm m lies in the ball.
    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Frozen vectors in lattice coordinates.
    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    fn u(&self) -> f64 {
        self.n as f64 / 4.0 + 0.5
    }

    /// The arguments m/Q(λ_{z⊥}) of the summands at z.
    fn arguments(&self, z: &GrassmannPoint) -> Result<Vec<f64>> {
        self.vectors
            .iter()
            .map(|x| {
                let q_minus = z.negative_norm(&self.gram, x)?;
                let q_plus = self.m - q_minus;
                let arg = self.m / q_plus;
                if arg > 1.0 - self.delta_min {
                    return Err(Error::Singular(format!(
                        "evaluation point within {} of the divisor (argument {arg})",
                        self.delta_min
                    )));
                }
                Ok(arg)
            })
            .collect()
    }

    /// Φ = 2Γ(s + n/4 − ½)/Γ(2s) Σ (m/Q(λ_{z⊥}))^{s+n/4−½} ₂F₁(s + n/4 − ½, s − n/4 + ½; 2s; m/Q(λ_{z⊥})).
    pub fn eval(&self, z: &GrassmannPoint) -> Result<GreenValue> {
        let s = self.s;
        let a = s + self.n as f64 / 4.0 - 0.5;
        let b = s - self.n as f64 / 4.0 + 0.5;
        let pref = gamma(a)? * 2.0 / gamma(2.0 * s)?;
        let args = self.arguments(z)?;
        let mut total = ComplexKahanSum::new();
        let mut shell = ComplexKahanSum::new();
        for (x, &outer) in args.iter().zip(&self.shell) {
            let term = Complex64::new(*x, 0.0).powc(a) * hyp2f1(a, b, 2.0 * s, Complex64::new(*x, 0.0))?;
            total.add(term);
            if outer {
                shell.add(term);
            }
        }
        Ok(GreenValue {
            value: (pref * total.total()).re,
            tail_estimate: tail_from_shell((pref * shell.total()).re, self.u(), s.re),
        })
    }

    /// The same sum written with Legendre functions of the second kind:
    /// Φ = 4/Γ(s + n/4) Σ Q_{2s−3/2}(√(Q(λ_{z⊥})/m)), valid for n = 1.
    pub fn eval_legendre(&self, z: &GrassmannPoint) -> Result<GreenValue> {
        if self.n != 1 {
            return Err(Error::Invalid("the Legendre form of the lift is implemented for n = 1".into()));
        }
        let s = self.s;
        let pref = 4.0 / gamma(s + 0.25)?;
        let args = self.arguments(z)?;
        let order = 2.0 * s - 0.5;
        let mut total = ComplexKahanSum::new();
        let mut shell = ComplexKahanSum::new();
        for (x, &outer) in args.iter().zip(&self.shell) {
            let term = legendre_q(order, (1.0 / x).sqrt())?;
            total.add(term);
            if outer {
                shell.add(term);
            }
        }
        Ok(GreenValue {
            value: (pref * total.total()).re,
            tail_estimate: tail_from_shell((pref * shell.total()).re, self.u(), s.re),
        })
    }
}

fn quad_form(a: &[Vec<f64>], x: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..x.len() {
        for j in 0..x.len() {
            s += x[i] * a[i][j] * x[j];
        }
    }
    s
}

/// Φ_{μ,m}(z, s) for the level-N sig-(1,2) lattice at z ∈ 𝔥, with the vectors
/// frozen in the majorant ball of radius `radius` around z.
#[allow(clippy::too_many_arguments)]
pub fn lift_closed_form(
    lattice: &QuadraticLattice,
    module: &DiscriminantModule,
    level: i64,
    mu: usize,
    m: Rat,
    s: Complex64,
    z: Complex64,
    radius: f64,
) -> Result<GreenValue> {
    let point = GrassmannPoint::signature12(level, z)?;
    LiftEvaluator::new(lattice, module, mu, m, s, &point, radius)?.eval(&point)
}

/// The Hilbert-surface Green's function (4/Γ(s)) Σ Q_{s−1}(1 − 2Q_A(λ_z)/m)
/// over λ ∈ μ + L_A with Q_A(λ) = m, for L_A = 𝔞 ⊕ 𝔞 with form
/// Q_𝔞(x₁) − Q_𝔞(x₂) attached to an imaginary quadratic field (level 1).
///
/// The point (z₁, z₂) ∈ 𝔥² is the negative plane spanned by the real and
/// imaginary parts of `[[z₁, −z₁z₂], [1, −z₂]]` in (M₂(ℝ), det), and
/// (𝔞 ⊕ 𝔞)_ℝ is identified with (M₂(ℝ), det) through
/// ζⱼ = (xⱼ a + yⱼ(−b + √d)/2)/√a ↦ [[Re ζ₁ + Re ζ₂, Im ζ₁ + Im ζ₂], [Im ζ₂ − Im ζ₁, Re ζ₁ − Re ζ₂]].
#[derive(Debug, Clone)]
pub struct HilbertEvaluator {
    /// Norm m > 0.
    pub m: f64,
    /// Spectral parameter, Re s > 1.
    pub s: Complex64,
    ambient: [[f64; 4]; 4],
    gram: Vec<Vec<f64>>,
    vectors: Vec<Vec<f64>>,
    shell: Vec<bool>,
}

/// Columns map lattice coordinates (x₁, y₁, x₂, y₂) to the entries
/// (X₁₁, X₁₂, X₂₁, X₂₂) of a 2×2 real matrix.
fn hilbert_ambient_map(form: crate::quadfield::BinaryForm, d: i64) -> [[f64; 4]; 4] {
    let sa = (form.a as f64).sqrt();
    let re_x = form.a as f64 / sa;
    let re_y = -(form.b as f64) / 2.0 / sa;
    let im_y = ((-d) as f64).sqrt() / 2.0 / sa;
    // ζ₁ = re_x x₁ + (re_y + i im_y) y₁, ζ₂ likewise
    // p = Re ζ₁, q = Im ζ₁, r = Re ζ₂, u = Im ζ₂
    let p = [re_x, re_y, 0.0, 0.0];
    let q = [0.0, im_y, 0.0, 0.0];
    let r = [0.0, 0.0, re_x, re_y];
    let u = [0.0, 0.0, 0.0, im_y];
    let mut a = [[0.0; 4]; 4];
    for j in 0..4 {
        a[0][j] = p[j] + r[j];
        a[1][j] = q[j] + u[j];
        a[2][j] = u[j] - q[j];
        a[3][j] = p[j] - r[j];
    }
    a
}

/// The negative plane of (z₁, z₂) in lattice coordinates of L_A.
fn hilbert_plane(ambient: &[[f64; 4]; 4], z1: Complex64, z2: Complex64) -> Result<GrassmannPoint> {
    if z1.im <= 0.0 || z2.im <= 0.0 {
        return Err(Error::Domain(format!("({z1}, {z2}) is not in 𝔥²")));
    }
    let w = [z1, -z1 * z2, Complex64::new(1.0, 0.0), -z2];
    let re: Vec<f64> = w.iter().map(|c| c.re).collect();
    let im: Vec<f64> = w.iter().map(|c| c.im).collect();
    let a: Vec<Vec<f64>> = ambient.iter().map(|r| r.to_vec()).collect();
    GrassmannPoint::from_ambient(&a, &[re, im])
}

impl HilbertEvaluator {
    /// Enumerates λ ∈ μ + L_A with Q_A(λ) = m and majorant norm ≤ radius² at
    /// the centre (z₁, z₂).
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        field: &QuadraticField,
        group: &ClassGroup,
        class: usize,
        lattice: &QuadraticLattice,
        module: &DiscriminantModule,
        mu: usize,
        m: Rat,
        s: Complex64,
        centre: (Complex64, Complex64),
        radius: f64,
    ) -> Result<Self> {
        if field.sign != FieldSign::Imaginary {
            return Err(Error::Invalid("the Hilbert Green's function is implemented for imaginary fields".into()));
        }
        if !(s.re > 1.0) {
            return Err(Error::Domain(format!("the Legendre sum converges for Re(s) > 1, got {s}")));
        }
        if m <= Rat::zero() {
            return Err(Error::Domain(format!("divisor norm must be positive, got {m}")));
        }
        if lattice.rank != 4 {
            return Err(Error::ModuleMismatch("L_A must have rank 4".into()));
        }
        let form = *group
            .classes
            .get(class)
            .ok_or_else(|| Error::Invalid(format!("class index {class} out of range")))?;
        let ambient = hilbert_ambient_map(form, field.disc);
        let gram = gram_f64(lattice)?;
        let plane = hilbert_plane(&ambient, centre.0, centre.1)?;
        let majorant = plane.majorant(&gram)?;
        let coset = module
            .cosets
            .get(mu)
            .ok_or_else(|| Error::Invalid(format!("coset index {mu} out of range")))?;
        let radius_sq = radius * radius;
        let slice = enumerate_quadric(lattice, coset, m, &BoundPolicy::MajorantBall { majorant: majorant.clone(), radius_sq })?;
        let vectors: Vec<Vec<f64>> = (0..slice.len()).map(|i| slice.vector_f64(i)).collect();
        let shell = vectors.iter().map(|x| quad_form(&majorant, x) > 0.5 * radius_sq).collect();
        Ok(Self {
            m: m.to_f64().unwrap_or(f64::NAN),
            s,
            ambient,
            gram,
            vectors,
            shell,
        })
    }

    /// Number of frozen vectors.
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    /// Whether the frozen set is empty.
    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Frozen vectors in lattice coordinates.
    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    /// Evaluates the frozen sum at (z₁, z₂).
    pub fn eval(&self, z1: Complex64, z2: Complex64) -> Result<GreenValue> {
        let plane = hilbert_plane(&self.ambient, z1, z2)?;
        let pref = 4.0 / gamma(self.s)?;
        let mut total = ComplexKahanSum::new();
        let mut shell = ComplexKahanSum::new();
        for (x, &outer) in self.vectors.iter().zip(&self.shell) {
            let q_minus = plane.negative_norm(&self.gram, x)?;
            let t = 1.0 - 2.0 * q_minus / self.m;
            if t <= 1.0 + 1e-12 {
                return Err(Error::Singular(format!("({z1}, {z2}) lies on the Hirzebruch–Zagier divisor")));
            }
            let term = legendre_q(self.s, t)?;
            total.add(term);
            if outer {
                shell.add(term);
            }
        }
        Ok(GreenValue {
            value: (pref * total.total()).re,
            tail_estimate: tail_from_shell((pref * shell.total()).re, 1.0, self.s.re),
        })
    }
}

/// Evaluates the Hilbert Green's function with the truncation set frozen at
/// the evaluation point itself.
#[allow(clippy::too_many_arguments)]
pub fn hilbert_green(
    field: &QuadraticField,
    group: &ClassGroup,
    class: usize,
    lattice: &QuadraticLattice,
    module: &DiscriminantModule,
    mu: usize,
    m: Rat,
    s: Complex64,
    z1: Complex64,
    z2: Complex64,
    radius: f64,
) -> Result<GreenValue> {
    HilbertEvaluator::new(field, group, class, lattice, module, mu, m, s, (z1, z2), radius)?.eval(z1, z2)
}

/// cosh of the hyperbolic distance between two points of 𝔥.
pub fn cosh_distance(z: Complex64, w: Complex64) -> f64 {
    1.0 + (z - w).norm_sqr() / (2.0 * z.im * w.im)
}

/// Legendre Q_{s−1}(t) with the Γ-prefactor cached, for repeated evaluation.
struct LegendreKernel {
    s: Complex64,
    pref: Complex64,
}

impl LegendreKernel {
    fn new(s: Complex64) -> Result<Self> {
        Ok(Self {
            s,
            pref: gamma(s)? * gamma(s)? / (gamma(2.0 * s)? * 2.0),
        })
    }

    fn eval(&self, t: f64) -> Result<Complex64> {
        if t < 3.0 {
            return legendre_q(self.s, t);
        }
        // Γ(s)²/(2Γ(2s)) w^s ₂F₁(s, s; 2s; w), w = 2/(1 + t) ≤ 1/2
        let w = 2.0 / (1.0 + t);
        let s = self.s;
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for n in 0..200 {
            let nf = n as f64;
            term = term * (s + nf) * (s + nf) / ((2.0 * s + nf) * (nf + 1.0)) * w;
            sum += term;
            if term.norm() < 1e-17 * sum.norm() {
                break;
            }
        }
        Ok(self.pref * (s * w.ln()).exp() * sum)
    }
}

/// The resolvent kernel G_s(z₁, z₂) = Σ_{γ ∈ Γ₀(N)/±1} −2Q_{s−1}(cosh d(z₁, γz₂)),
/// with the elements γ frozen as those with cosh d(c, γz₂) ≤ T for a centre c.
#[derive(Debug, Clone)]
pub struct ResolventEvaluator {
    /// Level N.
    pub level: i64,
    /// Spectral parameter, Re s > 1.
    pub s: Complex64,
    /// Cut-off T on cosh d at the centre.
    pub bound: f64,
    /// Second argument z₂.
    pub z2: Complex64,
    /// The frozen group elements.
    pub elements: Vec<Mat2>,
    shell: Vec<bool>,
}

fn coprime(a: i64, b: i64) -> bool {
    crate::numerics::gcd_i64(a, b) == 1
}

impl ResolventEvaluator {
    /// Collects all γ ∈ Γ₀(N)/±1 with cosh d(centre, γz₂) ≤ bound.
    pub fn new(level: i64, s: Complex64, centre: Complex64, z2: Complex64, bound: f64) -> Result<Self> {
        if level < 1 {
            return Err(Error::Invalid(format!("level must be positive, got {level}")));
        }
        if !(s.re > 1.0) {
            return Err(Error::Domain(format!("the resolvent sum converges for Re(s) > 1, got {s}")));
        }
        if centre.im <= 0.0 || z2.im <= 0.0 {
            return Err(Error::Domain("points must lie in the upper half-plane".into()));
        }
        if !(bound > 1.0) {
            return Err(Error::Invalid(format!("cut-off must exceed 1, got {bound}")));
        }
        let (x1, y1) = (centre.re, centre.im);
        let (x2, y2) = (z2.re, z2.im);
        // cosh d ≥ y1/(2 Im γz₂) forces |c z₂ + d|² ≤ 2 T y₂ / y₁
        let cap = 2.0 * bound * y2 / y1;
        let c_max = (cap.sqrt() / y2).floor() as i64;
        let mut elements = Vec::new();
        let mut shell = Vec::new();
        let mut c = 0i64;
        while c <= c_max {
            let cz = c as f64;
            // (c x₂ + d)² ≤ cap − c² y₂²
            let room = cap - cz * cz * y2 * y2;
            if room >= 0.0 {
                let lo = (-cz * x2 - room.sqrt()).floor() as i64;
                let hi = (-cz * x2 + room.sqrt()).ceil() as i64;
                for d in lo..=hi {
                    if c == 0 && d != 1 {
                        continue;
                    }
                    if !coprime(c, d) {
                        continue;
                    }
                    let (g, aa, bb) = crate::quadfield::xgcd(d, -c);
                    let (aa, bb) = if g < 0 { (-aa, -bb) } else { (aa, bb) };
                    // aa·d − bb·c = 1
                    let g0: Mat2 = [[aa, bb], [c, d]];
                    let w0 = crate::cycles::mobius(g0, z2);
                    // translates w0 + k with (x₁ − x − k)² ≤ 2 y₁ Im(w0)(T − 1) − (y₁ − Im w0)²
                    let span = 2.0 * y1 * w0.im * (bound - 1.0) - (y1 - w0.im).powi(2);
                    if span < 0.0 {
                        continue;
                    }
                    let kl = (x1 - w0.re - span.sqrt()).floor() as i64;
                    let kh = (x1 - w0.re + span.sqrt()).ceil() as i64;
                    for k in kl..=kh {
                        let g = [[aa + k * c, bb + k * d], [c, d]];
                        let t = cosh_distance(centre, w0 + k as f64);
                        if t <= bound {
                            elements.push(g);
                            shell.push(t > 0.5 * bound);
                        }
                    }
                }
            }
            c += level;
        }
        Ok(Self {
            level,
            s,
            bound,
            z2,
            elements,
            shell,
        })
    }

    /// Evaluates the frozen sum at (z₁, z₂) with z₂ fixed at construction.
    pub fn eval(&self, z1: Complex64) -> Result<GreenValue> {
        if z1.im <= 0.0 {
            return Err(Error::Domain(format!("{z1} is not in the upper half-plane")));
        }
        let kernel = LegendreKernel::new(self.s)?;
        let mut total = KahanSum::new();
        let mut shell = KahanSum::new();
        for (g, &outer) in self.elements.iter().zip(&self.shell) {
            let t = cosh_distance(z1, crate::cycles::mobius(*g, self.z2));
            if t <= 1.0 + 1e-14 {
                return Err(Error::Singular(format!("{z1} is Γ₀({})-equivalent to {}", self.level, self.z2)));
            }
            let v = -2.0 * kernel.eval(t)?.re;
            total.add(v);
            if outer {
                shell.add(v);
            }
        }
        Ok(GreenValue {
            value: total.total(),
            tail_estimate: tail_from_shell(shell.total(), 1.0, self.s.re),
        })
    }
}

/// The resolvent kernel with the group elements frozen around z₁ itself.
pub fn resolvent_gs(level: i64, s: Complex64, z1: Complex64, z2: Complex64, bound: f64) -> Result<GreenValue> {
    ResolventEvaluator::new(level, s, z1, z2, bound)?.eval(z1)
}

/// Result of a finite-difference Laplacian check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenCheck {
    /// ΔF/F from the stencil.
    pub eigenvalue_estimate: f64,
    /// The eigenvalue being tested.
    pub expected: f64,
    /// |estimate − expected|.
    pub residual: f64,
}

/// Applies `factor · Σⱼ yⱼ²(∂²/∂xⱼ² + ∂²/∂yⱼ²)` to F at the point
/// (z₁, …, z_k) ∈ 𝔥^k with central differences of step h, and compares
/// ΔF/F with `expected`. The factor −1 gives the positive Laplacian
/// −y²(∂ₓ² + ∂ᵧ²), for which Δ yᵃ = a(1 − a) yᵃ.
pub fn laplacian_eigencheck<F>(f: F, z: &[Complex64], h: f64, factor: f64, expected: f64) -> Result<EigenCheck>
where
    F: Fn(&[Complex64]) -> Result<f64>,
{
    if !(h > 0.0) {
        return Err(Error::Invalid(format!("stencil step must be positive, got {h}")));
    }
    if z.iter().any(|w| w.im <= h) {
        return Err(Error::Domain("stencil leaves the upper half-plane".into()));
    }
    let eval = |pt: &[Complex64]| -> Result<f64> {
        let v = f(pt)?;
        if !v.is_finite() {
            return Err(Error::Singular(format!("non-finite value on the stencil at {pt:?}")));
        }
        Ok(v)
    };
    let centre = eval(z)?;
    let mut lap = 0.0;
    let mut pt = z.to_vec();
    for j in 0..z.len() {
        let mut second = -4.0 * centre;
        for step in [Complex64::new(h, 0.0), Complex64::new(-h, 0.0), Complex64::new(0.0, h), Complex64::new(0.0, -h)] {
            pt[j] = z[j] + step;
            second += eval(&pt)?;
        }
        pt[j] = z[j];
        lap += z[j].im * z[j].im * second / (h * h);
    }
    if centre == 0.0 {
        return Err(Error::Singular("function vanishes at the stencil centre".into()));
    }
    let est = factor * lap / centre;
    Ok(EigenCheck {
        eigenvalue_estimate: est,
        expected,
        residual: (est - expected).abs(),
    })
}

/// Stabilizer-weighted sum Σ F(τ)/e_τ of a real-valued function over a CM cycle.
pub fn sum_over_cm_cycle<F>(f: F, cycle: &HeegnerPointSet) -> Result<f64>
where
    F: Fn(Complex64) -> Result<f64>,
{
    let mut sum = KahanSum::new();
    for p in &cycle.points {
        let v = f(p.tau)?;
        if !v.is_finite() {
            return Err(Error::Singular(format!("function is not finite at the CM point {}", p.tau)));
        }
        sum.add(v / p.stabilizer_order as f64);
    }
    Ok(sum.total())
}
