//! Heegner points, CM cycles, closed geodesics and the trace operators
//! attached to them.
//!
//! A Heegner point of level N, discriminant D < 0 and residue r is the root
//! τ ∈ 𝔥 of a positive definite form [a, b, c] of discriminant D with N | a
//! and b ≡ r mod 2N, taken up to the action of Γ₀(N). The classes are found
//! by running over the Γ₀(N)-cosets of SL₂(ℤ) for every reduced form of
//! discriminant D, and each class is represented by its lexicographically
//! least form (a, b, c) with b ∈ (−a, a].
//!
//! A closed geodesic comes from an indefinite form [A, B, C] with N | A and
//! non-square discriminant. In the coordinates (b, a, c) of the trace-zero
//! matrices `[[b, −a/N], [c, −b]]` the form corresponds to the vector
//! (B/2N, −A/N, −C), whose norm is −(B² − 4AC)/4N.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Rat;
use crate::numerics::{gauss_legendre, gcd_i64, ComplexKahanSum};
use crate::quadfield::{
    class_representatives, fundamental_unit, is_fundamental, is_square, xgcd, BinaryForm, ClassConvention,
};

/// An integer 2×2 matrix `[[p, q], [r, s]]`.
pub type Mat2 = [[i64; 2]; 2];

const IDENTITY: Mat2 = [[1, 0], [0, 1]];

fn mat_mul(x: Mat2, y: Mat2) -> Mat2 {
    [
        [x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]],
        [x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]],
    ]
}

fn mat_inv(x: Mat2) -> Mat2 {
    [[x[1][1], -x[0][1]], [-x[1][0], x[0][0]]]
}

/// Möbius action of an integer matrix on the upper half-plane.
pub fn mobius(g: Mat2, z: Complex64) -> Complex64 {
    (z * g[0][0] as f64 + g[0][1] as f64) / (z * g[1][0] as f64 + g[1][1] as f64)
}

/// Reduces a positive definite form, returning the reduced form f∘g and the
/// matrix g ∈ SL₂(ℤ) that achieves it.
pub fn reduce_definite_with_matrix(f: BinaryForm) -> Result<(BinaryForm, Mat2)> {
    if f.a <= 0 || f.disc() >= 0 {
        return Err(Error::Domain(format!("{f} is not positive definite")));
    }
    let mut cur = f;
    let mut g = IDENTITY;
    loop {
        // translate b into (−a, a]
        let k = (cur.a - cur.b).div_euclid(2 * cur.a);
        if k != 0 {
            let t = [[1, k], [0, 1]];
            cur = cur.transform(t);
            g = mat_mul(g, t);
        }
        if cur.a > cur.c || (cur.a == cur.c && cur.b < 0) {
            let s = [[0, -1], [1, 0]];
            cur = cur.transform(s);
            g = mat_mul(g, s);
            continue;
        }
        break;
    }
    debug_assert!(cur.is_reduced_definite());
    Ok((cur, g))
}

/// Automorphs of a reduced positive definite form in SL₂(ℤ), including ±1.
fn definite_automorphs(q: BinaryForm) -> Vec<Mat2> {
    // entries of automorphs of a reduced form are bounded by 1 in absolute value
    let mut out = Vec::new();
    for p in -1..=1 {
        for qq in -1..=1 {
            for r in -1..=1 {
                for s in -1..=1 {
                    let g = [[p, qq], [r, s]];
                    if p * s - qq * r == 1 && q.transform(g) == q {
                        out.push(g);
                    }
                }
            }
        }
    }
    out
}

/// Canonical representative of (x : y) in P¹(ℤ/N).
fn p1_canonical(x: i64, y: i64, n: i64) -> (i64, i64) {
    if n == 1 {
        return (0, 0);
    }
    let mut best = (x.rem_euclid(n), y.rem_euclid(n));
    for l in 1..n {
        if gcd_i64(l, n) != 1 {
            continue;
        }
        let cand = ((l * x).rem_euclid(n), (l * y).rem_euclid(n));
        if cand < best {
            best = cand;
        }
    }
    best
}

/// All points of P¹(ℤ/N) in canonical form.
fn p1_points(n: i64) -> Vec<(i64, i64)> {
    let mut set = BTreeSet::new();
    for x in 0..n {
        for y in 0..n {
            if gcd_i64(gcd_i64(x, y), n) == 1 {
                set.insert(p1_canonical(x, y, n));
            }
        }
    }
    set.into_iter().collect()
}

/// An element of SL₂(ℤ) whose first column reduces to (x, y) mod N.
fn lift_p1(x: i64, y: i64, n: i64) -> Mat2 {
    if n == 1 {
        return IDENTITY;
    }
    let y1 = if y == 0 { n } else { y };
    let mut x1 = x;
    while gcd_i64(x1, y1) != 1 {
        x1 += n;
    }
    let (_, u, v) = xgcd(x1, y1);
    // x1·u + y1·v = 1
    [[x1, -v], [y1, u]]
}

/// Data of the reduced SL₂(ℤ)-class underlying a Γ₀(N)-class of forms: the
/// reduced form and the Stab-orbit-minimal P¹(ℤ/N) point.
type ClassKey = (BinaryForm, (i64, i64));

struct LevelStructure {
    n: i64,
    automorphs: BTreeMap<BinaryForm, Vec<Mat2>>,
}

impl LevelStructure {
    fn automorphs_of(&mut self, q: BinaryForm) -> &Vec<Mat2> {
        self.automorphs.entry(q).or_insert_with(|| definite_automorphs(q))
    }

    fn orbit_min(&mut self, q: BinaryForm, p: (i64, i64)) -> (i64, i64) {
        let n = self.n;
        self.automorphs_of(q)
            .iter()
            .map(|s| p1_canonical(s[0][0] * p.0 + s[0][1] * p.1, s[1][0] * p.0 + s[1][1] * p.1, n))
            .min()
            .expect("the identity is an automorph")
    }

    /// Number of automorphs modulo ±1 that fix the P¹ point.
    fn point_stabilizer(&mut self, q: BinaryForm, p: (i64, i64)) -> u32 {
        let n = self.n;
        let fixing = self
            .automorphs_of(q)
            .iter()
            .filter(|s| p1_canonical(s[0][0] * p.0 + s[0][1] * p.1, s[1][0] * p.0 + s[1][1] * p.1, n) == p)
            .count();
        (fixing / 2) as u32
    }

    fn key(&mut self, f: BinaryForm) -> Result<ClassKey> {
        let (q, g) = reduce_definite_with_matrix(f)?;
        // f = q∘g⁻¹, and the coset of f is the first column of g⁻¹
        let gi = mat_inv(g);
        let p = p1_canonical(gi[0][0], gi[1][0], self.n);
        Ok((q, self.orbit_min(q, p)))
    }
}

/// Strictness of the coprimality hypothesis on (D, N).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum HeegnerHypothesis {
    /// gcd(D, N) = 1.
    #[default]
    Coprime,
    /// gcd(D, 2N) = 1.
    Strict,
}

/// One Heegner point with its canonical form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeegnerPoint {
    /// Canonical form [a, b, c] with N | a, b ≡ r mod 2N, b ∈ (−a, a].
    pub form: BinaryForm,
    /// The root τ = (−b + i√|D|)/(2a).
    pub tau: Complex64,
    /// Order of the stabilizer in Γ₀(N)/{±1}.
    pub stabilizer_order: u32,
}

/// The Heegner points of level N, discriminant D and residue r.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeegnerPointSet {
    /// Level N.
    pub level: i64,
    /// Discriminant D < 0.
    pub disc: i64,
    /// Residue r with D ≡ r² mod 4N.
    pub residue: i64,
    /// Points in canonical order.
    pub points: Vec<HeegnerPoint>,
}

/// Square roots of D modulo 4N, reduced into [0, 2N).
pub fn heegner_residues(n: i64, d: i64) -> Vec<i64> {
    (0..2 * n).filter(|r| (d - r * r).rem_euclid(4 * n) == 0).collect()
}

/// Enumerates the Γ₀(N)-classes of Heegner forms of discriminant D and
/// residue r.
pub fn heegner_points(n: i64, d: i64, r: i64, hypothesis: HeegnerHypothesis) -> Result<HeegnerPointSet> {
    if n < 1 {
        return Err(Error::Invalid(format!("level must be positive, got {n}")));
    }
    if d >= 0 || !is_fundamental(d) {
        return Err(Error::NonFundamental(d));
    }
    let modulus = match hypothesis {
        HeegnerHypothesis::Coprime => n,
        HeegnerHypothesis::Strict => 2 * n,
    };
    if gcd_i64(d, modulus) != 1 {
        return Err(Error::Gcd(format!("gcd({d}, {modulus}) ≠ 1")));
    }
    if (d - r * r).rem_euclid(4 * n) != 0 {
        return Err(Error::Domain(format!("{d} has no square root ≡ {r} modulo {}", 4 * n)));
    }
    let r = r.rem_euclid(2 * n);
    let mut level = LevelStructure {
        n,
        automorphs: BTreeMap::new(),
    };
    // one representative per class, with its P¹ data
    let mut found: BTreeMap<ClassKey, (BinaryForm, u32)> = BTreeMap::new();
    for q in class_representatives(d, ClassConvention::Wide)? {
        let mut seen = BTreeSet::new();
        for p in p1_points(n) {
            let orbit = level.orbit_min(q, p);
            if !seen.insert(orbit) {
                continue;
            }
            let f = q.transform(lift_p1(p.0, p.1, n));
            if f.a.rem_euclid(n) != 0 || (f.b - r).rem_euclid(2 * n) != 0 {
                continue;
            }
            let e = level.point_stabilizer(q, p);
            found.insert((q, orbit), (descend(f, n), e));
        }
    }
    let bound = found.values().map(|(f, _)| f.a).max().unwrap_or(0);
    // bounded orbit search for the least (a, b, c) in each class
    let mut best: BTreeMap<ClassKey, BinaryForm> = BTreeMap::new();
    let mut a = n;
    while a <= bound && best.len() < found.len() {
        for b in -a + 1..=a {
            if (b - r).rem_euclid(2 * n) != 0 || (b * b - d) % (4 * a) != 0 {
                continue;
            }
            let f = BinaryForm::new(a, b, (b * b - d) / (4 * a));
            let key = level.key(f)?;
            if found.contains_key(&key) {
                best.entry(key).or_insert(f);
            }
        }
        a += n;
    }
    let mut points: Vec<HeegnerPoint> = found
        .iter()
        .map(|(key, (f, e))| {
            let form = *best.get(key).unwrap_or(f);
            HeegnerPoint {
                form,
                tau: form_root(form),
                stabilizer_order: *e,
            }
        })
        .collect();
    points.sort_by_key(|p| (p.form.a, p.form.b, p.form.c));
    Ok(HeegnerPointSet {
        level: n,
        disc: d,
        residue: r,
        points,
    })
}

/// Greedy descent of a Heegner form inside its Γ₀(N)-class: alternate the
/// translation b ∈ (−a, a] with the lower unipotent [[1, 0], [Nk, 1]] that
/// minimizes a.
fn descend(mut f: BinaryForm, n: i64) -> BinaryForm {
    loop {
        let k = (f.a - f.b).div_euclid(2 * f.a);
        f = f.transform([[1, k], [0, 1]]);
        // a(k) = a + b N k + c N² k², minimized near k = −b / (2 c N)
        let k0 = (-(f.b as f64) / (2.0 * f.c as f64 * n as f64)).round() as i64;
        let mut next = f;
        for k in [k0 - 1, k0, k0 + 1] {
            let g = f.transform([[1, 0], [n * k, 1]]);
            if g.a < next.a {
                next = g;
            }
        }
        if next.a >= f.a {
            return f;
        }
        f = next;
    }
}

/// The root (−b + i√|D|)/(2a) of a positive definite form.
pub fn form_root(f: BinaryForm) -> Complex64 {
    let d = f.disc() as f64;
    Complex64::new(-(f.b as f64) / (2.0 * f.a as f64), (-d).sqrt() / (2.0 * f.a as f64))
}

/// Normalization of the degree of a CM cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum DegreeConvention {
    /// Σ 1/e_τ over the points (2h/w for N = 1).
    #[default]
    Classical,
    /// h/(2w) with w the number of units.
    HalfUnitWeighted,
}

/// Degree of the CM cycle of level N and discriminant D, using the first
/// square root of D modulo 4N.
pub fn cm_cycle_degree(n: i64, d: i64, convention: DegreeConvention) -> Result<Rat> {
    let r = *heegner_residues(n, d)
        .first()
        .ok_or_else(|| Error::Domain(format!("{d} is not a square modulo {}", 4 * n)))?;
    let set = heegner_points(n, d, r, HeegnerHypothesis::Coprime)?;
    Ok(match convention {
        DegreeConvention::Classical => set.degree(),
        DegreeConvention::HalfUnitWeighted => {
            let w = match d {
                -3 => 6,
                -4 => 4,
                _ => 2,
            };
            Rat::new(set.points.len() as i64, 2 * w)
        }
    })
}

impl HeegnerPointSet {
    /// Σ 1/e_τ.
    pub fn degree(&self) -> Rat {
        self.points
            .iter()
            .map(|p| Rat::new(1, p.stabilizer_order as i64))
            .fold(Rat::zero(), |x, y| x + y)
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Whether the set is empty.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Stabilizer-weighted sum Σ F(τ)/e_τ over a Heegner point set.
pub fn trace_cm<F>(f: F, set: &HeegnerPointSet) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let mut sum = ComplexKahanSum::new();
    for p in &set.points {
        let v = f(p.tau)?;
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::Singular(format!("function is not finite at the CM point {}", p.tau)));
        }
        sum.add(v / p.stabilizer_order as f64);
    }
    Ok(sum.total())
}

/// Moves τ into the standard fundamental domain of SL₂(ℤ); returns the
/// reduced point and the matrix g with g·τ equal to it.
pub fn reduce_to_fundamental_domain(tau: Complex64) -> Result<(Complex64, Mat2)> {
    if !(tau.im > 0.0) || !tau.re.is_finite() {
        return Err(Error::Domain(format!("{tau} is not in the upper half-plane")));
    }
    let mut z = tau;
    let mut g = IDENTITY;
    for _ in 0..10_000 {
        let k = (z.re + 0.5).floor() as i64;
        if k != 0 {
            z -= k as f64;
            g = mat_mul([[1, -k], [0, 1]], g);
        }
        if z.norm_sqr() < 1.0 - 1e-15 {
            z = -z.inv();
            g = mat_mul([[0, -1], [1, 0]], g);
        } else {
            return Ok((z, g));
        }
    }
    Err(Error::NonConvergence {
        what: "fundamental domain reduction",
        terms: 10_000,
    })
}

const J_TERMS: usize = 50;

/// Klein's j-invariant, evaluated as E₄³/Δ from 50-term q-expansions after
/// reduction to the fundamental domain.
pub fn j_invariant(tau: Complex64) -> Result<Complex64> {
    let (z, _) = reduce_to_fundamental_domain(tau)?;
    let q = (Complex64::new(0.0, 2.0 * std::f64::consts::PI) * z).exp();
    let mut powers = vec![Complex64::new(1.0, 0.0); J_TERMS + 1];
    for k in 1..=J_TERMS {
        powers[k] = powers[k - 1] * q;
    }
    let mut e4 = Complex64::new(1.0, 0.0);
    for (k, qk) in powers.iter().enumerate().skip(1) {
        let sigma3: u64 = (1..=k as u64).filter(|t| k as u64 % t == 0).map(|t| t * t * t).sum();
        e4 += qk * (240.0 * sigma3 as f64);
    }
    let mut prod = Complex64::new(1.0, 0.0);
    for qk in powers.iter().skip(1) {
        prod *= Complex64::new(1.0, 0.0) - qk;
    }
    let delta = q * prod.powi(24);
    Ok(e4 * e4 * e4 / delta)
}

/// j − 744, the Hauptmodul with vanishing constant term.
pub fn j_minus_744(tau: Complex64) -> Result<Complex64> {
    Ok(j_invariant(tau)? - 744.0)
}

/// A closed geodesic on X₀(N) attached to an indefinite form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedGeodesic {
    /// Level N.
    pub level: i64,
    /// Vector (b, a, c) in trace-zero-matrix coordinates.
    pub vector: [Rat; 3],
    /// The form [A, B, C] = [−N a, 2N b, −c].
    pub form: BinaryForm,
    /// Discriminant B² − 4AC.
    pub disc: i64,
    /// Norm m = disc/4N.
    pub m: Rat,
    /// The two real endpoints (−B ∓ √disc)/(2A), in increasing order.
    pub endpoints: (f64, f64),
    /// Generator of the stabilizer in Γ₀(N), acting with expansion factor e^{length}.
    pub automorph: Mat2,
    /// (t, u) with automorph trace t and t² − D₀ u² = 4 for the primitive discriminant.
    pub pell: (i64, i64),
    /// Power of the fundamental unit of the underlying field realized by the automorph.
    pub unit_power: u32,
    /// ln of the fundamental unit of the field.
    pub regulator: f64,
    /// Hyperbolic length of one period.
    pub length: f64,
    /// +1 when A > 0, −1 otherwise.
    pub orientation: i8,
}

/// Coordinates (b, a, c) of the vector attached to an indefinite form with N | A.
pub fn geodesic_vector(n: i64, f: BinaryForm) -> Result<[Rat; 3]> {
    if f.a.rem_euclid(n) != 0 {
        return Err(Error::Invalid(format!("{n} does not divide the leading coefficient of {f}")));
    }
    Ok([Rat::new(f.b, 2 * n), Rat::from_integer(-f.a / n), Rat::from_integer(-f.c)])
}

/// Builds the closed geodesic of the vector x = (b, a, c) at level N.
pub fn geodesic_from_vector(n: i64, x: [Rat; 3]) -> Result<ClosedGeodesic> {
    if n < 1 {
        return Err(Error::Invalid(format!("level must be positive, got {n}")));
    }
    let big_b = x[0] * (2 * n);
    let big_a = -x[1] * n;
    let big_c = -x[2];
    if !big_a.is_integer() || !big_b.is_integer() || !big_c.is_integer() {
        return Err(Error::Invalid("vector is not in the dual lattice".into()));
    }
    let form = BinaryForm::new(big_a.to_integer(), big_b.to_integer(), big_c.to_integer());
    let disc = form.disc();
    if disc <= 0 {
        return Err(Error::Domain(format!("{form} has discriminant {disc} ≤ 0: not a geodesic vector")));
    }
    if is_square(disc) {
        return Err(Error::Domain(format!(
            "discriminant {disc} is a square: the orthogonal complement is isotropic and the geodesic is infinite"
        )));
    }
    if form.a == 0 {
        return Err(Error::Domain(format!("{form} has A = 0")));
    }
    let g = form.content();
    let prim = BinaryForm::new(form.a / g, form.b / g, form.c / g);
    let d_prim = prim.disc();
    // d_prim = f² d0 with d0 fundamental
    let (d0, cond) = fundamental_part(d_prim);
    let unit = fundamental_unit(d0)?;
    let (t0, u0) = (unit.t.clone(), unit.u.clone());
    let mut t = t0.clone();
    let mut u = u0.clone();
    let mut norm = unit.norm as i64;
    let mut k = 1u32;
    loop {
        let ok = norm == 1 && (&u % cond).is_zero() && {
            let uu: BigInt = &u / cond;
            (&uu * BigInt::from(prim.a) % n).is_zero()
        };
        if ok {
            break;
        }
        // (t + u√d0)/2 · (t0 + u0√d0)/2
        let nt: BigInt = (&t * &t0 + BigInt::from(d0) * &u * &u0) / 2;
        let nu: BigInt = (&t * &u0 + &u * &t0) / 2;
        t = nt;
        u = nu;
        norm *= unit.norm as i64;
        k += 1;
        if k > 10_000 {
            return Err(Error::NonConvergence {
                what: "automorph search",
                terms: 10_000,
            });
        }
    }
    let u_form: BigInt = &u / cond;
    let overflow = || Error::Lattice("automorph entries exceed 64 bits".into());
    let tt = t.to_i64().ok_or_else(overflow)?;
    let uu = u_form.to_i64().ok_or_else(overflow)?;
    let automorph = [
        [(tt - prim.b * uu) / 2, -prim.c * uu],
        [prim.a * uu, (tt + prim.b * uu) / 2],
    ];
    debug_assert_eq!(form.transform(automorph), form);
    let sd = (disc as f64).sqrt();
    let (r1, r2) = (
        (-(form.b as f64) - sd) / (2.0 * form.a as f64),
        (-(form.b as f64) + sd) / (2.0 * form.a as f64),
    );
    let endpoints = if r1 < r2 { (r1, r2) } else { (r2, r1) };
    let length = 2.0 * k as f64 * unit.regulator;
    Ok(ClosedGeodesic {
        level: n,
        vector: x,
        form,
        disc,
        m: Rat::new(disc, 4 * n),
        endpoints,
        automorph,
        pell: (tt, uu),
        unit_power: k,
        regulator: unit.regulator,
        length,
        orientation: if form.a > 0 { 1 } else { -1 },
    })
}

/// Splits a positive discriminant as f²·d₀ with d₀ fundamental.
fn fundamental_part(d: i64) -> (i64, i64) {
    let mut f = 1i64;
    let mut k = 2i64;
    let mut rest = d;
    while k * k <= rest {
        while rest % (k * k) == 0 && {
            let q = rest / (k * k);
            q % 4 == 0 || q % 4 == 1
        } {
            rest /= k * k;
            f *= k;
        }
        k += 1;
    }
    debug_assert!(is_fundamental(rest));
    (rest, f)
}

impl ClosedGeodesic {
    /// Center and radius of the semicircle joining the endpoints.
    pub fn circle(&self) -> (f64, f64) {
        let (x1, x2) = self.endpoints;
        (0.5 * (x1 + x2), 0.5 * (x2 - x1))
    }

    /// Unit-speed parametrization z(t) = c + R(tanh t + i sech t).
    pub fn point(&self, t: f64) -> Complex64 {
        let (c, r) = self.circle();
        Complex64::new(c + r * t.tanh(), r / t.cosh())
    }

    /// Whether γ fixes the vector: the form is invariant under γ.
    pub fn is_stabilized_by(&self, g: Mat2) -> bool {
        g[0][0] * g[1][1] - g[0][1] * g[1][0] == 1
            && g[1][0].rem_euclid(self.level) == 0
            && self.form.transform(g) == self.form
    }

    /// The same geodesic with reversed orientation (the negated vector).
    pub fn reversed(&self) -> Result<Self> {
        geodesic_from_vector(self.level, [-self.vector[0], -self.vector[1], -self.vector[2]])
    }
}

/// (1/2π)∫ F dz_x over one period of the geodesic starting at the
/// parameter `base`, with dz_x = ±|dz|/(√m Im z) the oriented hyperbolic
/// arc length scaled by 1/√m. `quad_points` Gauss–Legendre nodes are spread
/// over panels of 16 nodes each.
pub fn trace_geodesic<F>(f: F, geo: &ClosedGeodesic, quad_points: usize, base: f64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    const PANEL: usize = 16;
    if quad_points < PANEL {
        return Err(Error::Invalid(format!("need at least {PANEL} quadrature points")));
    }
    let panels = quad_points.div_ceil(PANEL);
    let (x, w) = gauss_legendre(PANEL);
    let h = geo.length / panels as f64;
    let mut sum = ComplexKahanSum::new();
    for p in 0..panels {
        let lo = base + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            let t = lo + 0.5 * h * (xi + 1.0);
            let v = f(geo.point(t))?;
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::Singular(format!("function is not finite at {}", geo.point(t))));
            }
            sum.add(v * (0.5 * h * wi));
        }
    }
    let m = geo.m.to_f64().unwrap_or(f64::NAN);
    Ok(sum.total() * (geo.orientation as f64 / (2.0 * std::f64::consts::PI * m.sqrt())))
}
