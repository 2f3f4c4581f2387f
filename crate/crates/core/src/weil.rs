//! The Weil representation of the metaplectic group on `ℂ[L∨/L]`, vector-valued
//! q-series indexed by cosets, their tautological pairing and constant term,
//! and the restriction and trace maps attached to a finite-index sublattice.
//!
//! Conventions: `ρ(T) e_μ = e(Q(μ)) e_μ` and
//! `ρ(S) e_μ = e((q-p)/8) |D|^{-1/2} Σ_ν e(-(μ,ν)) e_ν`, so that
//! `ρ(S)² = ρ(Z)` with `ρ(Z) e_μ = e((q-p)/4) e_{-μ}`. Matrices act on column
//! vectors of coset coefficients.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{frac, DiscriminantModule, Rat, SublatticeMaps};
use crate::numerics::e_of;

/// Complex matrix type used for representation matrices.
pub type CMatrix = DMatrix<Complex64>;

fn rat_f64(x: Rat) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

/// Generator matrices of the Weil representation attached to a discriminant module.
#[derive(Debug, Clone)]
pub struct WeilRep {
    /// The discriminant module.
    pub module: DiscriminantModule,
    /// Signature `(p, q)` of the lattice.
    pub signature: (usize, usize),
    /// Diagonal of `ρ(T)`.
    pub t_diag: Vec<Complex64>,
    /// `ρ(S)`.
    pub s_matrix: CMatrix,
    /// The eighth root of unity `e((q - p)/8)`.
    pub signature_phase: Complex64,
    /// Whether this is the dual (complex conjugate) representation.
    pub dual: bool,
}

/// Element of `SL₂(ℤ)` written as a word in `S`, `T` and `T⁻¹`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Generator {
    /// `S = [[0, -1], [1, 0]]`.
    S,
    /// `T^k = [[1, k], [0, 1]]`.
    T(i64),
}

/// An element of the metaplectic group as a matrix with a branch bit: the bit
/// selects the sign of the holomorphic square root `±√(cτ + d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MpElement {
    /// Matrix entries `[[a, b], [c, d]]`.
    pub matrix: [[i64; 2]; 2],
    /// `false` for the principal branch of `√(cτ + d)`, `true` for its negative.
    pub branch: bool,
}

impl MpElement {
    /// The principal lift of a matrix of determinant one.
    pub fn new(matrix: [[i64; 2]; 2]) -> Result<Self> {
        let [[a, b], [c, d]] = matrix;
        if a * d - b * c != 1 {
            return Err(Error::Invalid(format!("{matrix:?} is not in SL2(Z)")));
        }
        Ok(Self { matrix, branch: false })
    }

    /// The square root `±√(cτ + d)` selected by the branch bit.
    pub fn sqrt_factor(&self, tau: Complex64) -> Complex64 {
        let [_, [c, d]] = self.matrix;
        let r = (tau * c as f64 + d as f64).sqrt();
        if self.branch {
            -r
        } else {
            r
        }
    }
}

/// Decomposes `γ ∈ SL₂(ℤ)` as a word `γ = w₁ w₂ ⋯ w_k` in `S` and powers of `T`.
pub fn sl2_word(gamma: [[i64; 2]; 2]) -> Result<Vec<Generator>> {
    let [[mut a, mut b], [mut c, mut d]] = gamma;
    if a * d - b * c != 1 {
        return Err(Error::Invalid(format!("{gamma:?} is not in SL2(Z)")));
    }
    let mut word = Vec::new();
    while c != 0 {
        // γ = T^q S γ' with γ' = S⁻¹ T^{-q} γ
        let q = a.div_euclid(c);
        let (a1, b1) = (a - q * c, b - q * d);
        word.push(Generator::T(q));
        word.push(Generator::S);
        (a, b, c, d) = (c, d, -a1, -b1);
    }
    if a == 1 {
        word.push(Generator::T(b));
    } else {
        // -T^{-b} = S² T^{-b}
        word.push(Generator::S);
        word.push(Generator::S);
        word.push(Generator::T(-b));
    }
    word.retain(|g| *g != Generator::T(0));
    Ok(word)
}

/// Evaluates a word back to its matrix.
pub fn word_matrix(word: &[Generator]) -> [[i64; 2]; 2] {
    let mut m = [[1i64, 0], [0, 1]];
    for g in word {
        let h = match *g {
            Generator::S => [[0, -1], [1, 0]],
            Generator::T(k) => [[1, k], [0, 1]],
        };
        m = [
            [m[0][0] * h[0][0] + m[0][1] * h[1][0], m[0][0] * h[0][1] + m[0][1] * h[1][1]],
            [m[1][0] * h[0][0] + m[1][1] * h[1][0], m[1][0] * h[0][1] + m[1][1] * h[1][1]],
        ];
    }
    m
}

/// Builds `ρ(S)` and `ρ(T)` for the module and signature.
pub fn weil_generators(module: &DiscriminantModule, signature: (usize, usize)) -> WeilRep {
    let n = module.order;
    let (p, q) = signature;
    let phase = e_of((q as f64 - p as f64) / 8.0);
    let scale = 1.0 / (n as f64).sqrt();
    let t_diag = module.norms.iter().map(|&x| e_of(rat_f64(x))).collect();
    let s_matrix = CMatrix::from_fn(n, n, |nu, mu| phase * scale * e_of(-rat_f64(module.bilinear(mu, nu))));
    WeilRep { module: module.clone(), signature, t_diag, s_matrix, signature_phase: phase, dual: false }
}

/// Summary of the relation checks for a Weil representation.
#[derive(Debug, Clone, Serialize)]
pub struct WeilChecks {
    /// Max over `g ∈ {S, T, ST, STS}` of `‖ρ(g)ρ(g)^† - I‖_∞`.
    pub unitarity: f64,
    /// `‖ρ(S)² - ρ(Z)‖_∞`.
    pub s_squared: f64,
    /// `‖(ρ(S)ρ(T))³ - ρ(S)²‖_∞` after dividing out the recorded phase.
    pub braid: f64,
    /// The scalar `c` with `(ρ(S)ρ(T))³ = c ρ(S)²` (expected to be 1).
    pub braid_phase: (f64, f64),
    /// `‖ρ(S) - ρ(S)^T‖_∞`.
    pub s_symmetry: f64,
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl WeilRep {
    /// `ρ(T)` as a dense matrix.
    pub fn t_matrix(&self) -> CMatrix {
        CMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.t_diag.clone()))
    }

    /// `ρ(Z)`, the image of the central element `(-I, √-1)`.
    pub fn z_matrix(&self) -> CMatrix {
        let n = self.module.order;
        let (p, q) = self.signature;
        let mut ph = e_of((q as f64 - p as f64) / 4.0);
        if self.dual {
            ph = ph.conj();
        }
        let mut z = CMatrix::zeros(n, n);
        for mu in 0..n {
            z[(self.module.neg(mu), mu)] = ph;
        }
        z
    }

    /// The dual representation `ρ∨ = conj(ρ)`.
    pub fn dual(&self) -> WeilRep {
        WeilRep {
            module: self.module.clone(),
            signature: self.signature,
            t_diag: self.t_diag.iter().map(|z| z.conj()).collect(),
            s_matrix: self.s_matrix.map(|z| z.conj()),
            signature_phase: self.signature_phase.conj(),
            dual: !self.dual,
        }
    }

    /// `ρ(γ)` for `γ ∈ SL₂(ℤ)` through its `S`/`T` word. For lattices of even
    /// rank the representation factors through `SL₂(ℤ)` and this is exact; for
    /// odd rank it is the image of the metaplectic lift determined by the word.
    pub fn rho(&self, gamma: [[i64; 2]; 2]) -> Result<CMatrix> {
        let word = sl2_word(gamma)?;
        let n = self.module.order;
        let mut m = CMatrix::identity(n, n);
        let t = self.t_matrix();
        for g in word {
            m = match g {
                Generator::S => m * &self.s_matrix,
                Generator::T(k) => {
                    let tk = if k >= 0 {
                        t.pow(k as u32)
                    } else {
                        t.adjoint().pow((-k) as u32)
                    };
                    m * tk
                }
            };
        }
        Ok(m)
    }

    /// Runs the unitarity, `S² = Z`, braid and symmetry checks.
    pub fn checks(&self) -> WeilChecks {
        let n = self.module.order;
        let id = CMatrix::identity(n, n);
        let s = &self.s_matrix;
        let t = self.t_matrix();
        let st = s * &t;
        let sts = &st * s;
        let unitarity = [s.clone(), t.clone(), st.clone(), sts]
            .iter()
            .map(|g| max_abs(&(g * g.adjoint() - &id)))
            .fold(0.0, f64::max);
        let s2 = s * s;
        let s_squared = max_abs(&(&s2 - self.z_matrix()));
        let st3 = &st * &st * &st;
        // phase c minimizing ‖st3 - c s2‖: c = <s2, st3> / <s2, s2>
        let num: Complex64 = s2.iter().zip(st3.iter()).map(|(a, b)| a.conj() * b).sum();
        let den: f64 = s2.iter().map(|a| a.norm_sqr()).sum();
        let c = num / den;
        let braid = max_abs(&(&st3 - &s2 * c));
        let s_symmetry = max_abs(&(s - s.transpose()));
        WeilChecks { unitarity, s_squared, braid, braid_phase: (c.re, c.im), s_symmetry }
    }

    /// Checks `⟨⟨ρ(g) f, ρ∨(g) h⟩⟩ = ⟨⟨f, h⟩⟩` for coefficient vectors, returning
    /// the absolute discrepancy.
    pub fn pairing_invariance(&self, gamma: [[i64; 2]; 2], f: &[Complex64], h: &[Complex64]) -> Result<f64> {
        let n = self.module.order;
        if f.len() != n || h.len() != n {
            return Err(Error::ModuleMismatch("coefficient vector has wrong length".into()));
        }
        let r = self.rho(gamma)?;
        let rd = self.dual().rho(gamma)?;
        let fv = nalgebra::DVector::from_column_slice(f);
        let hv = nalgebra::DVector::from_column_slice(h);
        let a = (&r * &fv).iter().zip((&rd * &hv).iter()).map(|(x, y)| x * y).sum::<Complex64>();
        let b = fv.iter().zip(hv.iter()).map(|(x, y)| x * y).sum::<Complex64>();
        Ok((a - b).norm())
    }
}

/// Which congruence the exponents of a series satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExponentConvention {
    /// `m ≡ Q(μ) mod 1` (series transforming with `ω_L`).
    Plus,
    /// `m ≡ -Q(μ) mod 1` (series transforming with the dual representation).
    Minus,
}

impl ExponentConvention {
    /// The opposite convention.
    pub fn opposite(self) -> Self {
        match self {
            Self::Plus => Self::Minus,
            Self::Minus => Self::Plus,
        }
    }
}

/// Whether a coefficient belongs to the holomorphic part or to a
/// nonholomorphic Whittaker term `Γ(1 - l, 4π|m|v) q^m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum PartTag {
    /// Holomorphic part `f⁺`.
    Holomorphic,
    /// Nonholomorphic part `f⁻`.
    Whittaker,
}

/// A vector-valued q-series `Σ_μ Σ_m c(μ, m) q^m 𝟙_μ` with finitely many terms.
#[derive(Debug, Clone, Serialize)]
pub struct VectorValuedQSeries {
    /// `Q(μ) mod 1` for each coset, defining the exponent congruences.
    pub norms: Vec<Rat>,
    /// Exponent congruence convention.
    pub convention: ExponentConvention,
    /// Weight (a half-integer).
    pub weight: Rat,
    /// Coefficients keyed by `(coset, exponent, part)`.
    pub terms: BTreeMap<(usize, Rat, PartTag), Complex64>,
}

impl VectorValuedQSeries {
    /// Empty series over a module.
    pub fn new(module: &DiscriminantModule, convention: ExponentConvention, weight: Rat) -> Self {
        Self { norms: module.norms.clone(), convention, weight, terms: BTreeMap::new() }
    }

    /// Adds `c q^m 𝟙_μ` to the holomorphic part, validating the congruence.
    pub fn insert(&mut self, mu: usize, m: Rat, c: Complex64) -> Result<()> {
        self.insert_part(mu, m, PartTag::Holomorphic, c)
    }

    /// Adds a term to the given part, validating the congruence.
    pub fn insert_part(&mut self, mu: usize, m: Rat, part: PartTag, c: Complex64) -> Result<()> {
        let q = *self
            .norms
            .get(mu)
            .ok_or_else(|| Error::ModuleMismatch(format!("coset {mu} out of range")))?;
        let expected = match self.convention {
            ExponentConvention::Plus => q,
            ExponentConvention::Minus => -q,
        };
        if !(m - expected).is_integer() {
            return Err(Error::ExponentCongruence { coset: mu, m: m.to_string() });
        }
        *self.terms.entry((mu, m, part)).or_insert(Complex64::zero()) += c;
        Ok(())
    }

    /// Coefficient `c(μ, m)` of the holomorphic part.
    pub fn coeff(&self, mu: usize, m: Rat) -> Complex64 {
        self.terms.get(&(mu, m, PartTag::Holomorphic)).copied().unwrap_or_default()
    }

    /// Number of cosets of the underlying module.
    pub fn module_order(&self) -> usize {
        self.norms.len()
    }

    /// Smallest exponent present, if any.
    pub fn min_exponent(&self) -> Option<Rat> {
        self.terms.keys().map(|k| k.1).min()
    }

    fn check_partner(&self, other: &VectorValuedQSeries) -> Result<()> {
        if self.norms != other.norms {
            return Err(Error::ModuleMismatch("series live on different discriminant modules".into()));
        }
        if self.convention == other.convention {
            return Err(Error::ModuleMismatch("pairing needs a series and a dual series".into()));
        }
        Ok(())
    }
}

/// A scalar q-series with rational exponents.
pub type ScalarQSeries = BTreeMap<Rat, Complex64>;

/// The tautological pairing `⟨⟨f, g⟩⟩ = Σ_μ f_μ g_μ` of holomorphic parts.
pub fn pairing(f: &VectorValuedQSeries, g: &VectorValuedQSeries) -> Result<ScalarQSeries> {
    f.check_partner(g)?;
    let mut out = ScalarQSeries::new();
    for (&(mu, a, pa), &cf) in &f.terms {
        if pa != PartTag::Holomorphic {
            continue;
        }
        for (&(nu, b, pb), &cg) in g.terms.range((mu, Rat::from_integer(i64::MIN), PartTag::Holomorphic)..) {
            if nu != mu {
                break;
            }
            if pb != PartTag::Holomorphic {
                continue;
            }
            *out.entry(a + b).or_insert(Complex64::zero()) += cf * cg;
        }
    }
    out.retain(|_, c| *c != Complex64::zero());
    Ok(out)
}

/// The constant term `Σ_μ Σ_m c_f(μ, -m) c_g(μ, m)` of `⟨⟨f, g⟩⟩`.
pub fn constant_term(f: &VectorValuedQSeries, g: &VectorValuedQSeries) -> Result<Complex64> {
    f.check_partner(g)?;
    let mut acc = Complex64::zero();
    for (&(mu, m, part), &cg) in &g.terms {
        if part == PartTag::Holomorphic {
            acc += f.coeff(mu, -m) * cg;
        }
    }
    Ok(acc)
}

/// Restriction `f ↦ f_M` from `L∨/L` to `M∨/M`: copies coefficients onto
/// `L∨/M` and vanishes elsewhere.
pub fn restrict(
    f: &VectorValuedQSeries,
    sub_module: &DiscriminantModule,
    maps: &SublatticeMaps,
) -> Result<VectorValuedQSeries> {
    if maps.fibers.len() != f.module_order() || maps.to_l.len() != sub_module.order {
        return Err(Error::ModuleMismatch("coset maps do not match the series".into()));
    }
    let mut out = VectorValuedQSeries::new(sub_module, f.convention, f.weight);
    for (&(mu, m, part), &c) in &f.terms {
        for &nu in &maps.fibers[mu] {
            out.insert_part(nu, m, part, c)?;
        }
    }
    Ok(out)
}

/// Trace `g ↦ g^L` from `M∨/M` to `L∨/L`: `g^L_μ = Σ_{ν ∈ L/M} g_{μ + ν}`.
pub fn trace(
    g: &VectorValuedQSeries,
    module: &DiscriminantModule,
    maps: &SublatticeMaps,
) -> Result<VectorValuedQSeries> {
    if maps.to_l.len() != g.module_order() || maps.fibers.len() != module.order {
        return Err(Error::ModuleMismatch("coset maps do not match the series".into()));
    }
    let mut out = VectorValuedQSeries::new(module, g.convention, g.weight);
    for (&(nu, m, part), &c) in &g.terms {
        if let Some(mu) = maps.to_l[nu] {
            out.insert_part(mu, m, part, c)?;
        }
    }
    Ok(out)
}

/// Applies a coset matrix to the coefficient vectors of a series exponent by
/// exponent (used for transformation checks on finite data).
pub fn apply_matrix(f: &VectorValuedQSeries, m: &CMatrix) -> Result<Vec<(Rat, Vec<Complex64>)>> {
    let n = f.module_order();
    if m.nrows() != n {
        return Err(Error::ModuleMismatch("matrix size does not match module".into()));
    }
    let mut by_frac: BTreeMap<Rat, Vec<Complex64>> = BTreeMap::new();
    for (&(mu, e, part), &c) in &f.terms {
        if part == PartTag::Holomorphic {
            by_frac.entry(e).or_insert_with(|| vec![Complex64::zero(); n])[mu] += c;
        }
    }
    Ok(by_frac
        .into_iter()
        .map(|(e, v)| {
            let w = m * nalgebra::DVector::from_vec(v);
            (e, w.iter().copied().collect())
        })
        .collect())
}

/// `Q(μ) mod 1` as a float in `[0, 1)`.
pub fn norm_mod_one(module: &DiscriminantModule, mu: usize) -> f64 {
    rat_f64(frac(module.norms[mu]))
}
