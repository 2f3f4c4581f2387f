//! Quadratic fields k = Q(√d): Kronecker characters, binary quadratic forms,
//! class groups with composition tables and characters, fundamental units
//! and Dirichlet L-values.
//!
//! Classes of primitive forms [a, b, c] of discriminant d correspond to ideal
//! classes through [a, b, c] ↦ [a, (−b + √d)/2].

use crate::error::{Error, Result};
use crate::numerics::{digamma, e_of, gcd_i64, hurwitz_zeta};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;

/// Kronecker symbol (d/n) for a discriminant d ≡ 0, 1 mod 4.
///
/// This is the completely multiplicative extension of the Legendre symbol,
/// with (d/−1) = sign(d) and (d/2) determined by d mod 8.
pub fn kronecker_symbol(d: i64, n: i64) -> Result<i8> {
    if d.rem_euclid(4) > 1 {
        return Err(Error::BadDiscriminant(d));
    }
    Ok(kronecker_raw(d, n))
}

/// Kronecker symbol without the discriminant-shape check.
pub fn kronecker_raw(d: i64, n: i64) -> i8 {
    if n == 0 {
        return if d.abs() == 1 { 1 } else { 0 };
    }
    let mut result: i8 = 1;
    let mut n = n;
    if n < 0 {
        n = -n;
        if d < 0 {
            result = -result;
        }
    }
    while n % 2 == 0 {
        n /= 2;
        match d.rem_euclid(8) {
            1 | 7 => {}
            3 | 5 => result = -result,
            _ => return 0,
        }
    }
    if n == 1 {
        return result;
    }
    result * jacobi(d.rem_euclid(n), n)
}

/// Jacobi symbol (a/n) for odd positive n.
fn jacobi(a: i64, n: i64) -> i8 {
    let mut a = a.rem_euclid(n);
    let mut n = n;
    let mut r: i8 = 1;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let m = n % 8;
            if m == 3 || m == 5 {
                r = -r;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            r = -r;
        }
        a %= n;
    }
    if n == 1 {
        r
    } else {
        0
    }
}

fn is_squarefree(n: i64) -> bool {
    let n = n.unsigned_abs();
    if n == 0 {
        return false;
    }
    let mut p = 2u64;
    let mut m = n;
    while p * p <= m {
        if m % p == 0 {
            m /= p;
            if m % p == 0 {
                return false;
            }
        }
        p += 1;
    }
    true
}

/// Whether d is the discriminant of a quadratic field.
pub fn is_fundamental(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    match d.rem_euclid(4) {
        1 => is_squarefree(d),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && is_squarefree(m)
        }
        _ => false,
    }
}

/// Primitive binary quadratic form a x² + b x y + c y².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BinaryForm {
    /// Coefficient of x².
    pub a: i64,
    /// Coefficient of xy.
    pub b: i64,
    /// Coefficient of y².
    pub c: i64,
}

impl BinaryForm {
    /// Construct a form.
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        BinaryForm { a, b, c }
    }

    /// Discriminant b² − 4ac.
    pub fn disc(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    /// Value at (x, y).
    pub fn eval(&self, x: i64, y: i64) -> i64 {
        self.a * x * x + self.b * x * y + self.c * y * y
    }

    /// The principal form of discriminant d.
    pub fn principal(d: i64) -> Self {
        let b = d.rem_euclid(2);
        BinaryForm::new(1, b, (b * b - d) / 4)
    }

    /// The opposite form [a, −b, c], inverse in the class group.
    pub fn opposite(&self) -> Self {
        BinaryForm::new(self.a, -self.b, self.c)
    }

    /// The negated form [−a, b, −c].
    pub fn negated(&self) -> Self {
        BinaryForm::new(-self.a, self.b, -self.c)
    }

    /// Form transformed by γ = [[p, q], [r, s]]: f(px + qy, rx + sy).
    pub fn transform(&self, g: [[i64; 2]; 2]) -> Self {
        let [[p, q], [r, s]] = g;
        let a = self.a * p * p + self.b * p * r + self.c * r * r;
        let b = 2 * self.a * p * q + self.b * (p * s + q * r) + 2 * self.c * r * s;
        let c = self.a * q * q + self.b * q * s + self.c * s * s;
        BinaryForm::new(a, b, c)
    }

    /// gcd(a, b, c).
    pub fn content(&self) -> i64 {
        gcd_i64(gcd_i64(self.a, self.b), self.c)
    }

    /// Whether a positive definite form is reduced.
    pub fn is_reduced_definite(&self) -> bool {
        let BinaryForm { a, b, c } = *self;
        a > 0 && b.abs() <= a && a <= c && !((b.abs() == a || a == c) && b < 0)
    }

    /// Whether an indefinite form is reduced: |√D − 2|a|| < b < √D.
    pub fn is_reduced_indefinite(&self) -> bool {
        let d = self.disc();
        if d <= 0 {
            return false;
        }
        let sd = isqrt_floor(d);
        let b = self.b;
        if b <= 0 || b > sd {
            return false;
        }
        let two_a = 2 * self.a.abs();
        // √D − b < 2|a| < √D + b, tested with exact integer squares
        let lo = (two_a + b) * (two_a + b) > d;
        let hi = if two_a >= b {
            (two_a - b) * (two_a - b) < d
        } else {
            true
        };
        lo && hi
    }
}

impl std::fmt::Display for BinaryForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{},{},{}]", self.a, self.b, self.c)
    }
}

/// ⌊√n⌋ for n ≥ 0.
pub fn isqrt_floor(n: i64) -> i64 {
    if n <= 0 {
        return 0;
    }
    let mut x = (n as f64).sqrt() as i64;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

/// Reduce a positive definite form to its unique reduced representative.
pub fn reduce_definite(f: BinaryForm) -> BinaryForm {
    let (mut a, mut b, mut c) = (f.a as i128, f.b as i128, f.c as i128);
    loop {
        if b > a || b <= -a {
            // translate b into (−a, a]
            let k = (a - b).div_euclid(2 * a);
            let nb = b + 2 * a * k;
            c += (nb * nb - b * b) / (4 * a);
            b = nb;
        }
        if a > c {
            std::mem::swap(&mut a, &mut c);
            b = -b;
            continue;
        }
        if a == c && b < 0 {
            b = -b;
        }
        break;
    }
    BinaryForm::new(a as i64, b as i64, c as i64)
}

/// Normalization r(b, c) used by the indefinite reduction operator.
fn rho_normalize(b: i128, c: i128, d: i128) -> i128 {
    let ac = c.abs();
    let sd = isqrt_floor(d as i64) as i128;
    if ac * ac > d {
        // −|c| < r ≤ |c|
        let m = 2 * ac;
        let mut r = b.rem_euclid(m);
        if r > ac {
            r -= m;
        }
        r
    } else {
        // √D − 2|c| < r < √D: r is the largest value ≡ b mod 2|c| that is ≤ ⌊√D⌋
        let m = 2 * ac;
        sd - (sd - b).rem_euclid(m)
    }
}

/// One step of the reduction operator ρ on an indefinite form.
fn rho(f: BinaryForm) -> BinaryForm {
    let d = f.disc() as i128;
    let c = f.c as i128;
    let nb = rho_normalize(-(f.b as i128), c, d);
    let nc = (nb * nb - d) / (4 * c);
    BinaryForm::new(c as i64, nb as i64, nc as i64)
}

/// Reduce an indefinite form by iterating ρ.
pub fn reduce_indefinite(f: BinaryForm) -> BinaryForm {
    let mut g = f;
    let mut steps = 0;
    while !g.is_reduced_indefinite() {
        g = rho(g);
        steps += 1;
        assert!(steps < 100_000, "indefinite reduction did not terminate for {f}");
    }
    g
}

/// The ρ-cycle of a reduced indefinite form.
pub fn rho_cycle(f: BinaryForm) -> Vec<BinaryForm> {
    let start = reduce_indefinite(f);
    let mut out = vec![start];
    let mut g = rho(start);
    while g != start {
        out.push(g);
        g = rho(g);
    }
    out
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    // returns (g, x, y) with a x + b y = g ≥ 0
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let q = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// Gauss (Dirichlet) composition of two primitive forms of the same discriminant,
/// without reduction.
pub fn compose_raw(f1: BinaryForm, f2: BinaryForm) -> BinaryForm {
    let d = f1.disc() as i128;
    let (a1, b1) = (f1.a as i128, f1.b as i128);
    let (a2, b2) = (f2.a as i128, f2.b as i128);
    // Solve for B with B ≡ b1 mod 2a1, B ≡ b2 mod 2a2, B² ≡ D mod 4 a1 a2 / e²,
    // e = gcd(a1, a2, (b1+b2)/2).
    let s = (b1 + b2) / 2;
    let (e, x, y) = {
        let (g1, u1, v1) = ext_gcd(a1, a2);
        let (g, u2, v2) = ext_gcd(g1, s);
        (g, (u1 * u2, v1 * u2), v2)
    };
    let (x1, x2) = x;
    let a3 = a1 * a2 / (e * e);
    // B = b2 + 2 (a2/e)( x1 (b1 − b2)/2 ... ) standard formula:
    // B ≡ [a1 b2 x1 + a2 b1 x2 + y (b1 b2 + D)/2] / e  mod 2 a3
    let num = a1 * b2 * x1 + a2 * b1 * x2 + y * (b1 * b2 + d) / 2;
    let b3 = (num / e).rem_euclid(2 * a3);
    let c3 = (b3 * b3 - d) / (4 * a3);
    BinaryForm::new(a3 as i64, b3 as i64, c3 as i64)
}

/// Kind of class group requested for a real quadratic field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassConvention {
    /// Ideal class group (classes of forms up to proper equivalence and f ~ −f).
    Wide,
    /// Narrow class group (proper equivalence only).
    Narrow,
}

/// Fundamental unit ε = (t + u√d)/2 of a real quadratic field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FundamentalUnit {
    /// t in ε = (t + u√d)/2.
    pub t: BigInt,
    /// u in ε = (t + u√d)/2.
    pub u: BigInt,
    /// Norm of ε (±1), i.e. (t² − d u²)/4.
    pub norm: i8,
    /// ln ε.
    pub regulator: f64,
}

fn big_ln(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        x.to_f64().unwrap().ln()
    } else {
        let shift = bits - 60;
        let top: BigInt = x >> shift;
        top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// Fundamental unit of the real quadratic field of discriminant d > 0.
///
/// Found from the first convergent of the continued fraction of √(d/4)
/// (d ≡ 0 mod 4) or (1 + √d)/2 (d ≡ 1 mod 4) whose norm is ±1.
pub fn fundamental_unit(d: i64) -> Result<FundamentalUnit> {
    if d <= 0 || !is_fundamental(d) {
        return Err(Error::NonFundamental(d));
    }
    // Expand x0 = (P0 + √D0)/Q0 with the standard PQa recurrence.
    let (d0, p0, q0, even) = if d % 4 == 0 {
        (d / 4, 0i64, 1i64, true)
    } else {
        (d, 1i64, 2i64, false)
    };
    let sd = isqrt_floor(d0);
    let (mut p, mut q) = (p0 as i128, q0 as i128);
    // Require Q | D0 − P²: for (1+√d)/2, (d−1)/... scale numerator/denominator.
    let (mut dd, mut sdd) = (d0 as i128, sd as i128);
    if (dd - p * p).rem_euclid(q) != 0 {
        p *= q;
        dd *= q * q;
        q *= q;
        sdd = isqrt_floor(dd as i64) as i128;
    }
    let mut h_prev2 = BigInt::zero();
    let mut h_prev1 = BigInt::one();
    let mut k_prev2 = BigInt::one();
    let mut k_prev1 = BigInt::zero();
    for _ in 0..1_000_000 {
        let a = (p + sdd).div_euclid(q);
        let h = BigInt::from(a as i64) * &h_prev1 + &h_prev2;
        let k = BigInt::from(a as i64) * &k_prev1 + &k_prev2;
        h_prev2 = std::mem::replace(&mut h_prev1, h);
        k_prev2 = std::mem::replace(&mut k_prev1, k);
        let (hh, kk) = (&h_prev1, &k_prev1);
        let (t, u, n4): (BigInt, BigInt, BigInt) = if even {
            // x² − (d/4) y² = ±1 → t = 2x, u = y
            let n = hh * hh - BigInt::from(d0) * kk * kk;
            (BigInt::from(2) * hh, kk.clone(), n * 4)
        } else {
            // p² − pq − ((d−1)/4) q² = ±1 → ε = p − q ω̄, t = 2p − q, u = q
            let n = hh * hh - hh * kk - BigInt::from((d - 1) / 4) * kk * kk;
            (BigInt::from(2) * hh - kk, kk.clone(), n * 4)
        };
        if n4.abs() == BigInt::from(4) && u.is_positive() {
            let norm: i8 = if n4.is_positive() { 1 } else { -1 };
            // ln ε = ln((t + u√d)/2)
            let ratio = u.to_f64().map(|uf| uf * (d as f64).sqrt());
            let regulator = match (t.to_f64(), ratio) {
                (Some(tf), Some(r)) if tf.is_finite() && r.is_finite() => ((tf + r) / 2.0).ln(),
                _ => big_ln(&u) + 0.5 * (d as f64).ln(),
            };
            return Ok(FundamentalUnit {
                t,
                u,
                norm,
                regulator,
            });
        }
        p = a * q - p;
        q = (dd - p * p) / q;
    }
    Err(Error::NonConvergence {
        what: "continued fraction for the fundamental unit",
        terms: 1_000_000,
    })
}

/// Whether the field is imaginary or real.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldSign {
    /// d < 0.
    Imaginary,
    /// d > 0.
    Real,
}

/// Arithmetic data of the quadratic field of discriminant d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticField {
    /// Fundamental discriminant.
    pub disc: i64,
    /// Imaginary or real.
    pub sign: FieldSign,
    /// Class number (wide by default; narrow when built with the narrow convention).
    pub class_number: usize,
    /// Number of units (4, 6 or 2 for imaginary fields, 2 = #{±1} for real fields).
    pub unit_count: usize,
    /// Fundamental unit for real fields.
    pub fundamental_unit: Option<FundamentalUnit>,
    /// ln ε for real fields.
    pub regulator: Option<f64>,
}

impl QuadraticField {
    /// Build the field with the ideal (wide) class group convention.
    pub fn new(d: i64) -> Result<Self> {
        Self::with_convention(d, ClassConvention::Wide)
    }

    /// Build the field with an explicit class-group convention.
    pub fn with_convention(d: i64, conv: ClassConvention) -> Result<Self> {
        if !is_fundamental(d) {
            return Err(Error::NonFundamental(d));
        }
        let forms = class_representatives(d, conv)?;
        let (sign, unit_count, fu) = if d < 0 {
            let w = match d {
                -4 => 4,
                -3 => 6,
                _ => 2,
            };
            (FieldSign::Imaginary, w, None)
        } else {
            (FieldSign::Real, 2, Some(fundamental_unit(d)?))
        };
        Ok(QuadraticField {
            disc: d,
            sign,
            class_number: forms.len(),
            unit_count,
            regulator: fu.as_ref().map(|u| u.regulator),
            fundamental_unit: fu,
        })
    }

    /// The quadratic character η_k(n) = (d_k/n).
    pub fn eta(&self, n: i64) -> i8 {
        kronecker_raw(self.disc, n)
    }
}

fn canonical_key(f: &BinaryForm) -> (i64, i64, i64, i64) {
    (f.a, f.b.abs(), (f.b < 0) as i64, f.c)
}

/// Canonical reduced representative for a (narrow or wide) indefinite class.
fn canonical_indefinite(f: BinaryForm, conv: ClassConvention) -> BinaryForm {
    let mut cands = rho_cycle(f);
    if conv == ClassConvention::Wide {
        cands.extend(rho_cycle(f.negated()));
    }
    cands
        .into_iter()
        .filter(|g| g.a > 0)
        .min_by_key(canonical_key)
        .expect("every cycle contains a form with a > 0")
}

/// Reduced representatives, one per class, in canonical order.
pub fn class_representatives(d: i64, conv: ClassConvention) -> Result<Vec<BinaryForm>> {
    if !is_fundamental(d) {
        return Err(Error::NonFundamental(d));
    }
    let mut out = Vec::new();
    if d < 0 {
        let amax = isqrt_floor(-d / 3) + 1;
        for a in 1..=amax {
            for b in -a..=a {
                let num = b * b - d;
                if num % (4 * a) != 0 {
                    continue;
                }
                let f = BinaryForm::new(a, b, num / (4 * a));
                if f.is_reduced_definite() && f.content() == 1 {
                    out.push(f);
                }
            }
        }
    } else {
        let sd = isqrt_floor(d);
        let mut seen = std::collections::BTreeSet::new();
        for b in 1..=sd {
            if (b * b - d) % 4 != 0 {
                continue;
            }
            let ac = (b * b - d) / 4; // negative
            for a in 1..=ac.abs() {
                if ac % a != 0 {
                    continue;
                }
                for sa in [a, -a] {
                    let f = BinaryForm::new(sa, b, ac / sa);
                    if f.is_reduced_indefinite() && f.content() == 1 {
                        seen.insert(canonical_indefinite(f, conv));
                    }
                }
            }
        }
        out.extend(seen);
    }
    out.sort_by_key(canonical_key);
    Ok(out)
}

/// A character of the class group, stored as angles θ with χ(A) = e(θ_A).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCharacter {
    /// θ_A ∈ [0, 1) as exact fractions, indexed like the class list.
    pub angles: Vec<Ratio<i64>>,
}

impl ClassCharacter {
    /// Complex value χ(A).
    pub fn value(&self, class: usize) -> Complex64 {
        let a = self.angles[class];
        e_of(*a.numer() as f64 / *a.denom() as f64)
    }

    /// Whether every value is real (±1).
    pub fn is_real(&self) -> bool {
        self.angles.iter().all(|a| a.is_zero() || *a == Ratio::new(1, 2))
    }

    /// Index of the conjugate character within `all`.
    pub fn conjugate_in(&self, all: &[ClassCharacter]) -> Option<usize> {
        let conj: Vec<Ratio<i64>> = self.angles.iter().map(|a| frac(-*a)).collect();
        all.iter().position(|c| c.angles == conj)
    }
}

fn frac(x: Ratio<i64>) -> Ratio<i64> {
    let f = x - x.floor();
    if f < Ratio::zero() {
        f + Ratio::one()
    } else {
        f
    }
}

/// Class group of a quadratic field with its composition law and characters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassGroup {
    /// Field data.
    pub field: QuadraticField,
    /// Class convention used for real fields.
    pub convention: ClassConvention,
    /// Reduced representatives; index 0 is the principal class.
    pub classes: Vec<BinaryForm>,
    /// `composition_table[i][j]` is the index of classes[i]·classes[j].
    pub composition_table: Vec<Vec<usize>>,
    /// All h characters; index 0 is the principal character.
    pub characters: Vec<ClassCharacter>,
}

/// Build the class group of discriminant d with the wide convention.
pub fn class_group(d: i64) -> Result<ClassGroup> {
    class_group_with(d, ClassConvention::Wide)
}

/// Build the class group of discriminant d with an explicit convention.
pub fn class_group_with(d: i64, conv: ClassConvention) -> Result<ClassGroup> {
    let field = QuadraticField::with_convention(d, conv)?;
    let classes = class_representatives(d, conv)?;
    let index: HashMap<BinaryForm, usize> =
        classes.iter().enumerate().map(|(i, f)| (*f, i)).collect();
    let locate = |f: BinaryForm| -> usize {
        let canon = if d < 0 {
            reduce_definite(f)
        } else {
            canonical_indefinite(f, conv)
        };
        index[&canon]
    };
    debug_assert_eq!(locate(BinaryForm::principal(d)), 0);
    let h = classes.len();
    let mut table = vec![vec![0usize; h]; h];
    for i in 0..h {
        for j in 0..h {
            table[i][j] = locate(compose_raw(classes[i], classes[j]));
        }
    }
    let characters = characters_of(&table);
    Ok(ClassGroup {
        field,
        convention: conv,
        classes,
        composition_table: table,
        characters,
    })
}

impl ClassGroup {
    /// Number of classes.
    pub fn order(&self) -> usize {
        self.classes.len()
    }

    /// Index of the class of an arbitrary primitive form of the right discriminant.
    pub fn class_of(&self, f: BinaryForm) -> Result<usize> {
        if f.disc() != self.field.disc {
            return Err(Error::Invalid(format!("form {f} has the wrong discriminant")));
        }
        let canon = if self.field.disc < 0 {
            if f.a < 0 {
                return Err(Error::Invalid(format!("form {f} is not positive definite")));
            }
            reduce_definite(f)
        } else {
            canonical_indefinite(f, self.convention)
        };
        self.classes
            .iter()
            .position(|g| *g == canon)
            .ok_or_else(|| Error::Invalid(format!("no class found for {f}")))
    }

    /// Index of the inverse class.
    pub fn inverse(&self, i: usize) -> usize {
        self.composition_table[i].iter().position(|&k| k == 0).expect("group has inverses")
    }
}

/// Enumerate all characters of a finite abelian group given by its table.
///
/// Generators g_1, g_2, … are chosen greedily; r_i is the least k > 0 with
/// g_i^k in the subgroup generated by the earlier generators. Every element
/// then has a unique exponent vector with 0 ≤ e_i < r_i, and a character is
/// fixed by angles θ_i with r_i θ_i ≡ θ(g_i^{r_i}) mod 1.
fn characters_of(table: &[Vec<usize>]) -> Vec<ClassCharacter> {
    let h = table.len();
    let mut coords: Vec<Option<Vec<usize>>> = vec![None; h];
    coords[0] = Some(vec![]);
    let mut members: Vec<usize> = vec![0];
    let mut rel_orders: Vec<usize> = Vec::new();
    let mut rel_images: Vec<Vec<usize>> = Vec::new();
    for g in 0..h {
        if coords[g].is_some() {
            continue;
        }
        let mut k = 1;
        let mut p = g;
        while coords[p].is_none() {
            p = table[p][g];
            k += 1;
        }
        let image = coords[p].clone().expect("power lies in subgroup");
        let ngen = rel_orders.len();
        let mut new_members = Vec::with_capacity(members.len() * k);
        let mut gj = 0usize;
        for j in 0..k {
            for &m in &members {
                let el = table[m][gj];
                let mut v = coords[m].clone().expect("member has coordinates");
                v.resize(ngen, 0);
                v.push(j);
                coords[el] = Some(v);
                new_members.push(el);
            }
            gj = table[gj][g];
        }
        members = new_members;
        rel_orders.push(k);
        rel_images.push(image);
    }
    let mut chars: Vec<Vec<Ratio<i64>>> = vec![vec![]];
    for i in 0..rel_orders.len() {
        let mut next = Vec::new();
        for theta in &chars {
            let mut base = Ratio::zero();
            for (j, e) in rel_images[i].iter().enumerate() {
                base += theta[j] * Ratio::from_integer(*e as i64);
            }
            let r = rel_orders[i] as i64;
            for t in 0..r {
                let mut th = theta.clone();
                th.push(frac((base + Ratio::from_integer(t)) / Ratio::from_integer(r)));
                next.push(th);
            }
        }
        chars = next;
    }
    chars
        .into_iter()
        .map(|theta| {
            let angles = (0..h)
                .map(|g| {
                    let v = coords[g].as_ref().expect("all elements reached");
                    let mut a = Ratio::zero();
                    for (j, e) in v.iter().enumerate() {
                        a += theta[j] * Ratio::from_integer(*e as i64);
                    }
                    frac(a)
                })
                .collect();
            ClassCharacter { angles }
        })
        .collect()
}

/// Dirichlet L-value L(s, η_d) for real s ≥ 1.
///
/// At s = 1 uses L(1, χ) = −(1/q) Σ_{a=1}^{q} χ(a) ψ(a/q); for s > 1 uses
/// q^{−s} Σ χ(a) ζ(s, a/q).
pub fn dirichlet_l_value(d: i64, s: f64) -> Result<f64> {
    if !(s >= 1.0) {
        return Err(Error::Domain(format!("L(s, η) is only evaluated for s ≥ 1, got {s}")));
    }
    if d.rem_euclid(4) > 1 {
        return Err(Error::BadDiscriminant(d));
    }
    let q = d.abs();
    let mut acc = crate::numerics::KahanSum::new();
    for a in 1..=q {
        let chi = kronecker_raw(d, a);
        if chi == 0 {
            continue;
        }
        let x = a as f64 / q as f64;
        let v = if s == 1.0 {
            digamma(Complex64::new(x, 0.0))?.re
        } else {
            hurwitz_zeta(Complex64::new(s, 0.0), x)?.re
        };
        acc.add(chi as f64 * v);
    }
    if s == 1.0 {
        Ok(-acc.total() / q as f64)
    } else {
        Ok(acc.total() * (q as f64).powf(-s))
    }
}

/// Class number recovered from L(1, η_d) by the analytic class number formula
/// (before rounding).
pub fn class_number_from_l_value(field: &QuadraticField) -> Result<f64> {
    let l1 = dirichlet_l_value(field.disc, 1.0)?;
    let d = field.disc.abs() as f64;
    Ok(match field.sign {
        FieldSign::Imaginary => l1 * field.unit_count as f64 * d.sqrt() / (2.0 * PI),
        FieldSign::Real => l1 * d.sqrt() / (2.0 * field.regulator.expect("real field has a regulator")),
    })
}

/// Number of integral ideals of norm m: Σ_{e | m} η_d(e).
pub fn ideal_count(d: i64, m: u64) -> u64 {
    let mut total: i64 = 0;
    let m = m as i64;
    let mut e = 1;
    while e * e <= m {
        if m % e == 0 {
            total += kronecker_raw(d, e) as i64;
            if e * e != m {
                total += kronecker_raw(d, m / e) as i64;
            }
        }
        e += 1;
    }
    total as u64
}

/// All fundamental discriminants d with 0 < |d| ≤ bound, in increasing |d|.
pub fn fundamental_discriminants(bound: i64) -> Vec<i64> {
    let mut v: Vec<i64> = (-bound..=bound).filter(|&d| is_fundamental(d)).collect();
    v.sort_by_key(|d| (d.abs(), *d));
    v
}

/// Integer square root test.
pub fn is_square(n: i64) -> bool {
    n >= 0 && isqrt_floor(n).pow(2) == n
}

/// Extended gcd exposed for other modules: (g, x, y) with a x + b y = g.
pub fn xgcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (g, x, y) = ext_gcd(a as i128, b as i128);
    (g as i64, x as i64, y as i64)
}

/// Modular inverse of a modulo m (m ≥ 1).
pub fn mod_inverse(a: i64, m: i64) -> Option<i64> {
    let (g, x, _) = xgcd(a.rem_euclid(m), m);
    if g == 1 {
        Some(x.rem_euclid(m))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronecker_examples() {
        assert_eq!(kronecker_symbol(-4, 3).unwrap(), -1);
        assert_eq!(kronecker_symbol(-139, 37).unwrap(), 1);
        assert_eq!(kronecker_symbol(-139, -37).unwrap(), -1);
        assert_eq!(kronecker_symbol(5, 1).unwrap(), 1);
        assert!(kronecker_symbol(7, 3).is_err());
    }

    #[test]
    fn fundamental_discriminant_shapes() {
        for d in [-3, -4, -7, -8, -23, 5, 8, 12, 13] {
            assert!(is_fundamental(d), "{d}");
        }
        for d in [-12, -16, 1, 9, 20, 7] {
            assert!(!is_fundamental(d), "{d}");
        }
    }

    #[test]
    fn small_class_groups() {
        let g = class_group(-4).unwrap();
        assert_eq!(g.classes, vec![BinaryForm::new(1, 0, 1)]);
        let g = class_group(-23).unwrap();
        assert_eq!(
            g.classes,
            vec![BinaryForm::new(1, 1, 6), BinaryForm::new(2, 1, 3), BinaryForm::new(2, -1, 3)]
        );
        assert_eq!(class_group(5).unwrap().order(), 1);
        assert_eq!(class_group(12).unwrap().order(), 1);
        assert_eq!(class_group_with(12, ClassConvention::Narrow).unwrap().order(), 2);
    }

    #[test]
    fn units() {
        let u = fundamental_unit(5).unwrap();
        assert_eq!((u.t.clone(), u.u.clone()), (BigInt::from(1), BigInt::from(1)));
        assert!((u.regulator - 0.481_211_825_059_603_4).abs() < 1e-12);
        let u = fundamental_unit(8).unwrap();
        assert!((u.regulator - 0.881_373_587_019_543).abs() < 1e-12);
        let u = fundamental_unit(12).unwrap();
        assert_eq!(u.norm, 1);
    }

    #[test]
    fn l_values() {
        assert!((dirichlet_l_value(-4, 1.0).unwrap() - PI / 4.0).abs() < 1e-12);
        assert!((dirichlet_l_value(-23, 1.0).unwrap() - 3.0 * PI / 23f64.sqrt()).abs() < 1e-10);
        let eps = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((dirichlet_l_value(5, 1.0).unwrap() - 2.0 * eps.ln() / 5f64.sqrt()).abs() < 1e-10);
        assert!(dirichlet_l_value(-4, 0.5).is_err());
    }

    #[test]
    fn ideal_counts() {
        assert_eq!(ideal_count(-4, 5), 2);
        assert_eq!(ideal_count(-4, 3), 0);
        assert_eq!(ideal_count(-23, 1), 1);
    }
}
