//! Quadratic lattices over the integers: Gram data, signatures, discriminant
//! modules, the two lattice families attached to modular curves and to
//! ideal classes, exact enumeration of vectors on quadrics, and the coset
//! bookkeeping between a lattice and a finite-index sublattice.
//!
//! Gram matrices hold the values of the bilinear form `(x, y) = Q(x + y) -
//! Q(x) - Q(y)` on a basis, so `Q(x) = (x, x) / 2`. All membership tests are
//! exact; floating point is only used to prune the enumeration search.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadfield::{BinaryForm, ClassGroup, FieldSign, QuadraticField};

/// Exact rational scalar used for coset coordinates and quadratic values.
pub type Rat = Rational64;

/// A nondegenerate quadratic lattice given by its Gram matrix on a basis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticLattice {
    /// Rank of the lattice.
    pub rank: usize,
    /// Gram matrix `((e_i, e_j))` with exact rational entries.
    #[serde(serialize_with = "serialize_big_matrix")]
    pub gram: Vec<Vec<BigRational>>,
    /// Signature `(p, q)`: numbers of positive and negative squares.
    pub signature: (usize, usize),
    /// Free-form description.
    pub label: String,
}

fn serialize_big_matrix<S: serde::Serializer>(
    m: &[Vec<BigRational>],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<String>> = m
        .iter()
        .map(|r| r.iter().map(|x| x.to_string()).collect())
        .collect();
    rows.serialize(s)
}

fn big(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// Reduces a rational to its representative in `[0, 1)`.
pub fn frac(x: Rat) -> Rat {
    x - x.floor()
}

impl QuadraticLattice {
    /// Builds a lattice from an exact Gram matrix, checking symmetry and
    /// nondegeneracy and computing the signature.
    pub fn new(gram: Vec<Vec<BigRational>>, label: impl Into<String>) -> Result<Self> {
        let rank = gram.len();
        if rank == 0 || gram.iter().any(|r| r.len() != rank) {
            return Err(Error::Lattice("gram matrix must be square and nonempty".into()));
        }
        for i in 0..rank {
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::Lattice("gram matrix is not symmetric".into()));
                }
            }
        }
        let signature = inertia(&gram)?;
        Ok(Self { rank, gram, signature, label: label.into() })
    }

    /// Builds a lattice from an integer Gram matrix.
    pub fn from_integer_gram(gram: &[Vec<i64>], label: impl Into<String>) -> Result<Self> {
        let g = gram.iter().map(|r| r.iter().map(|&x| big(x)).collect()).collect();
        Self::new(g, label)
    }

    /// The Gram matrix as machine integers; fails when an entry is not integral.
    pub fn integer_gram(&self) -> Result<Vec<Vec<i64>>> {
        self.gram
            .iter()
            .map(|r| {
                r.iter()
                    .map(|x| {
                        if !x.is_integer() {
                            return Err(Error::Lattice(format!("gram entry {x} is not integral")));
                        }
                        x.to_integer()
                            .to_i64()
                            .ok_or_else(|| Error::Lattice("gram entry overflows i64".into()))
                    })
                    .collect()
            })
            .collect()
    }

    /// Whether `Q` is integral on the lattice (integral Gram with even diagonal).
    pub fn is_even(&self) -> bool {
        match self.integer_gram() {
            Ok(g) => (0..self.rank).all(|i| g[i][i] % 2 == 0),
            Err(_) => false,
        }
    }

    /// Exact determinant of the Gram matrix.
    pub fn determinant(&self) -> BigRational {
        determinant(&self.gram)
    }

    /// Whether the form is positive or negative definite.
    pub fn is_definite(&self) -> bool {
        self.signature.0 == 0 || self.signature.1 == 0
    }

    /// Exact bilinear form on rational coordinate vectors.
    pub fn bilinear(&self, x: &[Rat], y: &[Rat]) -> BigRational {
        let mut acc = BigRational::zero();
        for i in 0..self.rank {
            for j in 0..self.rank {
                acc += &self.gram[i][j] * to_big(x[i]) * to_big(y[j]);
            }
        }
        acc
    }

    /// Exact quadratic form `Q(x) = (x, x) / 2`.
    pub fn norm(&self, x: &[Rat]) -> BigRational {
        self.bilinear(x, x) / big(2)
    }

    /// Orthogonal direct sum.
    pub fn direct_sum(&self, other: &QuadraticLattice) -> Result<Self> {
        let n = self.rank + other.rank;
        let mut g = vec![vec![BigRational::zero(); n]; n];
        for i in 0..self.rank {
            for j in 0..self.rank {
                g[i][j] = self.gram[i][j].clone();
            }
        }
        for i in 0..other.rank {
            for j in 0..other.rank {
                g[self.rank + i][self.rank + j] = other.gram[i][j].clone();
            }
        }
        Self::new(g, format!("{} + {}", self.label, other.label))
    }

    /// The sublattice spanned by the given integer combinations of the basis
    /// (one row per new basis vector).
    pub fn sublattice(&self, basis: &[Vec<i64>]) -> Result<Self> {
        let k = basis.len();
        if basis.iter().any(|r| r.len() != self.rank) {
            return Err(Error::Lattice("sublattice basis has wrong length".into()));
        }
        let mut g = vec![vec![BigRational::zero(); k]; k];
        for a in 0..k {
            for b in 0..k {
                let mut acc = BigRational::zero();
                for i in 0..self.rank {
                    for j in 0..self.rank {
                        acc += &self.gram[i][j] * big(basis[a][i] * basis[b][j]);
                    }
                }
                g[a][b] = acc;
            }
        }
        Self::new(g, format!("sublattice of {}", self.label))
    }

    /// The discriminant module `L∨/L`; requires an even lattice.
    pub fn discriminant_module(&self) -> Result<DiscriminantModule> {
        if !self.is_even() {
            return Err(Error::Lattice(format!(
                "lattice '{}' is not even; its discriminant module is undefined",
                self.label
            )));
        }
        DiscriminantModule::from_gram(&self.integer_gram()?, self.signature)
    }
}

fn to_big(x: Rat) -> BigRational {
    BigRational::new(BigInt::from(*x.numer()), BigInt::from(*x.denom()))
}

fn determinant(m: &[Vec<BigRational>]) -> BigRational {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        let pivot = a[col][col].clone();
        det *= &pivot;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &pivot;
            for c in col..n {
                let v = &f * &a[col][c];
                a[r][c] -= v;
            }
        }
    }
    det
}

/// Signature of a symmetric rational matrix by symmetric Gaussian elimination
/// (Sylvester's law of inertia).
fn inertia(m: &[Vec<BigRational>]) -> Result<(usize, usize)> {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let (mut p, mut q) = (0, 0);
    let mut k = 0;
    while k < n {
        // find a nonzero diagonal pivot in the trailing block
        let pivot = (k..n).find(|&i| !a[i][i].is_zero());
        let i = match pivot {
            Some(i) => i,
            None => {
                // all trailing diagonals vanish: use an off-diagonal entry
                let Some((i, j)) = (k..n)
                    .flat_map(|i| (k..n).map(move |j| (i, j)))
                    .find(|&(i, j)| i != j && !a[i][j].is_zero())
                else {
                    return Err(Error::Lattice("gram matrix is degenerate".into()));
                };
                // replace basis vector i by e_i + e_j, giving diagonal 2 a_ij
                for c in 0..n {
                    let v = a[j][c].clone();
                    a[i][c] += v;
                }
                for r in 0..n {
                    let v = a[r][j].clone();
                    a[r][i] += v;
                }
                i
            }
        };
        // symmetric swap of i and k
        a.swap(i, k);
        for row in a.iter_mut() {
            row.swap(i, k);
        }
        let d = a[k][k].clone();
        if d.is_positive() {
            p += 1;
        } else {
            q += 1;
        }
        for r in k + 1..n {
            if a[r][k].is_zero() {
                continue;
            }
            let f = &a[r][k] / &d;
            for c in k..n {
                let v = &f * &a[k][c];
                a[r][c] -= v;
            }
        }
        for c in k + 1..n {
            a[k][c] = BigRational::zero();
        }
        for r in k + 1..n {
            a[r][k] = BigRational::zero();
        }
        k += 1;
    }
    Ok((p, q))
}

/// The finite quadratic module `L∨/L` of an even lattice.
#[derive(Debug, Clone, Serialize)]
pub struct DiscriminantModule {
    /// Coset representatives as rational coordinates in `[0, 1)` on the lattice basis.
    pub cosets: Vec<Vec<Rat>>,
    /// `Q(μ) mod 1` for each coset, normalized to `[0, 1)`.
    pub norms: Vec<Rat>,
    /// `|L∨/L|`.
    pub order: usize,
    /// Minimal positive integer `a` with `a Q(λ) ∈ ℤ` for all `λ ∈ L∨`.
    pub level: i64,
    /// Signature of the underlying lattice.
    pub signature: (usize, usize),
    /// Integer Gram matrix of the underlying lattice.
    pub gram: Vec<Vec<i64>>,
    /// Elementary divisors (diagonal of a diagonal form of the Gram matrix).
    pub elementary_divisors: Vec<i64>,
    #[serde(skip)]
    left: Vec<Vec<i64>>,
    #[serde(skip)]
    lookup: HashMap<Vec<i64>, usize>,
}

impl DiscriminantModule {
    /// Builds the module from an even integer Gram matrix.
    pub fn from_gram(gram: &[Vec<i64>], signature: (usize, usize)) -> Result<Self> {
        let n = gram.len();
        let (left, left_inv, diag) = diagonalize(gram)?;
        let ginv = rational_inverse(gram)?;
        let mut cosets = Vec::new();
        let mut lookup = HashMap::new();
        // iterate over all k with 0 <= k_i < d_i
        let total: usize = diag.iter().map(|&d| d as usize).product();
        for idx in 0..total {
            let mut k = vec![0i64; n];
            let mut rem = idx;
            for i in (0..n).rev() {
                let d = diag[i] as usize;
                k[i] = (rem % d) as i64;
                rem /= d;
            }
            let x: Vec<i64> = (0..n).map(|i| (0..n).map(|j| left_inv[i][j] * k[j]).sum()).collect();
            let mu: Vec<Rat> = (0..n)
                .map(|i| frac((0..n).map(|j| ginv[i][j] * Rat::from_integer(x[j])).sum()))
                .collect();
            lookup.insert(k, cosets.len());
            cosets.push(mu);
        }
        let mut module = Self {
            cosets,
            norms: Vec::new(),
            order: total,
            level: 1,
            signature,
            gram: gram.to_vec(),
            elementary_divisors: diag,
            left,
            lookup,
        };
        module.norms = module.cosets.iter().map(|mu| frac(module.norm_of(mu))).collect();
        module.level = module.norms.iter().fold(1i64, |acc, q| acc.lcm(q.denom()));
        Ok(module)
    }

    /// Exact `Q(x)` for rational coordinates (not reduced).
    pub fn norm_of(&self, x: &[Rat]) -> Rat {
        self.bilinear_of(x, x) / 2
    }

    /// Exact bilinear form on rational coordinates (not reduced).
    pub fn bilinear_of(&self, x: &[Rat], y: &[Rat]) -> Rat {
        let n = self.gram.len();
        let mut acc = Rat::zero();
        for i in 0..n {
            for j in 0..n {
                acc += x[i] * y[j] * self.gram[i][j];
            }
        }
        acc
    }

    /// `(μ_i, μ_j) mod 1` in `[0, 1)`.
    pub fn bilinear(&self, i: usize, j: usize) -> Rat {
        frac(self.bilinear_of(&self.cosets[i], &self.cosets[j]))
    }

    /// Index of the coset containing the dual vector with the given coordinates.
    pub fn index_of(&self, x: &[Rat]) -> Result<usize> {
        let n = self.gram.len();
        if x.len() != n {
            return Err(Error::ModuleMismatch("coordinate vector has wrong length".into()));
        }
        let mut gx = vec![0i64; n];
        for i in 0..n {
            let v: Rat = (0..n).map(|j| x[j] * self.gram[i][j]).sum();
            if !v.is_integer() {
                return Err(Error::Lattice("vector is not in the dual lattice".into()));
            }
            gx[i] = v.to_integer();
        }
        let k: Vec<i64> = (0..n)
            .map(|i| {
                let s: i64 = (0..n).map(|j| self.left[i][j] * gx[j]).sum();
                s.rem_euclid(self.elementary_divisors[i])
            })
            .collect();
        self.lookup
            .get(&k)
            .copied()
            .ok_or_else(|| Error::Lattice("coset lookup failed".into()))
    }

    /// Index of `μ_i + μ_j`.
    pub fn add(&self, i: usize, j: usize) -> usize {
        let s: Vec<Rat> = self.cosets[i].iter().zip(&self.cosets[j]).map(|(a, b)| *a + *b).collect();
        self.index_of(&s).expect("sum of dual vectors is dual")
    }

    /// Index of `-μ_i`.
    pub fn neg(&self, i: usize) -> usize {
        let s: Vec<Rat> = self.cosets[i].iter().map(|a| -*a).collect();
        self.index_of(&s).expect("negative of a dual vector is dual")
    }

    /// Reorders the cosets so that position `k` holds the old coset `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.order {
            return Err(Error::Invalid("permutation has wrong length".into()));
        }
        let mut seen = vec![false; self.order];
        for &o in order {
            if o >= self.order || seen[o] {
                return Err(Error::Invalid("not a permutation".into()));
            }
            seen[o] = true;
        }
        let mut inverse = vec![0usize; self.order];
        for (new, &old) in order.iter().enumerate() {
            inverse[old] = new;
        }
        let mut out = self.clone();
        out.cosets = order.iter().map(|&o| self.cosets[o].clone()).collect();
        out.norms = order.iter().map(|&o| self.norms[o]).collect();
        for v in out.lookup.values_mut() {
            *v = inverse[*v];
        }
        Ok(out)
    }

    /// Whether two modules have identical coset data.
    pub fn same_as(&self, other: &DiscriminantModule) -> bool {
        self.gram == other.gram && self.cosets == other.cosets
    }
}

/// Diagonalizes an integer matrix by unimodular row and column operations.
/// Returns `(U, U^{-1}, d)` with `U G V = diag(d)` and `d_i > 0`.
#[allow(clippy::type_complexity)]
fn diagonalize(g: &[Vec<i64>]) -> Result<(Vec<Vec<i64>>, Vec<Vec<i64>>, Vec<i64>)> {
    let n = g.len();
    let mut a: Vec<Vec<i128>> = g.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut u: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i128).collect()).collect();
    let mut ui = u.clone();
    for t in 0..n {
        loop {
            // pivot: smallest nonzero absolute value in the trailing block
            let mut best: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..n {
                    if a[i][j] != 0 && best.map_or(true, |(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return Err(Error::Lattice("gram matrix is singular".into()));
            };
            if pi != t {
                a.swap(pi, t);
                u.swap(pi, t);
                for row in ui.iter_mut() {
                    row.swap(pi, t);
                }
            }
            if pj != t {
                for row in a.iter_mut() {
                    row.swap(pj, t);
                }
            }
            let mut clean = true;
            for i in t + 1..n {
                let q = a[i][t].div_euclid(a[t][t]);
                if q != 0 {
                    for c in 0..n {
                        a[i][c] -= q * a[t][c];
                        u[i][c] -= q * u[t][c];
                    }
                    for row in ui.iter_mut() {
                        row[t] += q * row[i];
                    }
                }
                if a[i][t] != 0 {
                    clean = false;
                }
            }
            for j in t + 1..n {
                let q = a[t][j].div_euclid(a[t][t]);
                if q != 0 {
                    for row in a.iter_mut() {
                        row[j] -= q * row[t];
                    }
                }
                if a[t][j] != 0 {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        if a[t][t] < 0 {
            for c in 0..n {
                a[t][c] = -a[t][c];
                u[t][c] = -u[t][c];
            }
            for row in ui.iter_mut() {
                row[t] = -row[t];
            }
        }
    }
    let conv = |m: Vec<Vec<i128>>| -> Result<Vec<Vec<i64>>> {
        m.into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|x| i64::try_from(x).map_err(|_| Error::Lattice("overflow in diagonalization".into())))
                    .collect()
            })
            .collect()
    };
    let d = (0..n).map(|i| a[i][i] as i64).collect();
    Ok((conv(u)?, conv(ui)?, d))
}

fn rational_inverse(g: &[Vec<i64>]) -> Result<Vec<Vec<Rat>>> {
    let n = g.len();
    let mut a: Vec<Vec<Rat>> = g
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row: Vec<Rat> = r.iter().map(|&x| Rat::from_integer(x)).collect();
            row.extend((0..n).map(|j| Rat::from_integer((i == j) as i64)));
            row
        })
        .collect();
    for col in 0..n {
        let p = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| Error::Lattice("gram matrix is singular".into()))?;
        a.swap(p, col);
        let pivot = a[col][col];
        for c in 0..2 * n {
            a[col][c] /= pivot;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col];
                for c in 0..2 * n {
                    let v = f * a[col][c];
                    a[r][c] -= v;
                }
            }
        }
    }
    Ok(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// The rank-3 lattice of trace-zero matrices `[[b, -a/N], [c, -b]]` with
/// `Q = N det`, in the basis `diag(1,-1)`, `[[0,-1/N],[0,0]]`, `[[0,0],[1,0]]`.
///
/// Coordinates `(b, a, c)` give `Q = ac - N b²`. The cosets of the returned
/// module are ordered so that position `r` holds `μ_r = (r/2N) diag(1,-1)`.
pub fn build_signature12_lattice(n: i64) -> Result<(QuadraticLattice, DiscriminantModule)> {
    if n < 1 {
        return Err(Error::Invalid(format!("level must be positive, got {n}")));
    }
    let gram = vec![vec![-2 * n, 0, 0], vec![0, 0, 1], vec![0, 1, 0]];
    let lattice = QuadraticLattice::from_integer_gram(&gram, format!("trace-zero matrices, level {n}"))?;
    let module = lattice.discriminant_module()?;
    let order: Vec<usize> = (0..2 * n)
        .map(|r| module.index_of(&[Rat::new(r, 2 * n), Rat::zero(), Rat::zero()]))
        .collect::<Result<_>>()?;
    let module = module.permuted(&order)?;
    Ok((lattice, module))
}

/// Coordinates `(b, a, c)` of the matrix `[[b, -a/N], [c, -b]]`.
pub fn signature12_coords(matrix: [[Rat; 2]; 2], n: i64) -> Result<[Rat; 3]> {
    if matrix[0][0] + matrix[1][1] != Rat::zero() {
        return Err(Error::Invalid("matrix is not trace zero".into()));
    }
    Ok([matrix[0][0], -matrix[0][1] * n, matrix[1][0]])
}

/// The matrix `[[b, -a/N], [c, -b]]` attached to coordinates `(b, a, c)`.
pub fn signature12_matrix(coords: &[Rat], n: i64) -> [[Rat; 2]; 2] {
    [[coords[0], -coords[1] / n], [coords[2], -coords[0]]]
}

/// The vector `x(μ_r, -D/4N) = [[r/2N, 1/N], [(D - r²)/4N, -r/2N]]` in
/// coordinates `(b, a, c)`; requires `D ≡ r² mod 4N`.
pub fn heegner_vector(n: i64, d: i64, r: i64) -> Result<[Rat; 3]> {
    if (d - r * r).rem_euclid(4 * n) != 0 {
        return Err(Error::Invalid(format!("{d} is not congruent to {r}^2 mod {}", 4 * n)));
    }
    Ok([Rat::new(r, 2 * n), Rat::from_integer(-1), Rat::new(d - r * r, 4 * n)])
}

/// Gram matrix of the norm form `Q_𝔞(x a + y (-b + √d)/2) = a x² - b x y + c y²`
/// of the ideal attached to the form `[a, b, c]`.
pub fn ideal_norm_gram(form: BinaryForm) -> Vec<Vec<i64>> {
    vec![vec![2 * form.a, -form.b], vec![-form.b, 2 * form.c]]
}

/// The rank-2 lattice `(𝔞, Q_𝔞)` for the class with index `class` in `group`.
pub fn build_ideal_lattice(group: &ClassGroup, class: usize) -> Result<QuadraticLattice> {
    let form = *group
        .classes
        .get(class)
        .ok_or_else(|| Error::Invalid(format!("class index {class} out of range")))?;
    QuadraticLattice::from_integer_gram(&ideal_norm_gram(form), format!("ideal {form}"))
}

/// The rank-4 lattice `N^{-1}𝔞 ⊕ N^{-1}𝔞` with form `Q_𝔞(z₁) - Q_𝔞(z₂)`,
/// together with its discriminant module.
///
/// For `N > 1` the scaled lattice is not even, and a lattice error is returned.
/// Use [`build_la_gram`] to inspect the Gram matrix in that case.
pub fn build_la_lattice(
    field: &QuadraticField,
    group: &ClassGroup,
    class: usize,
    n: i64,
) -> Result<(QuadraticLattice, DiscriminantModule)> {
    let lattice = build_la_gram(field, group, class, n)?;
    let module = lattice.discriminant_module()?;
    Ok((lattice, module))
}

/// The rank-4 lattice `N^{-1}𝔞 ⊕ N^{-1}𝔞` with form `Q_𝔞(z₁) - Q_𝔞(z₂)`.
pub fn build_la_gram(
    field: &QuadraticField,
    group: &ClassGroup,
    class: usize,
    n: i64,
) -> Result<QuadraticLattice> {
    if n < 1 {
        return Err(Error::Invalid(format!("level must be positive, got {n}")));
    }
    if crate::numerics::gcd_i64(n, field.disc) != 1 {
        return Err(Error::Gcd(format!("gcd({n}, {}) != 1", field.disc)));
    }
    if group.field.disc != field.disc {
        return Err(Error::ModuleMismatch("class group belongs to another field".into()));
    }
    let form = *group
        .classes
        .get(class)
        .ok_or_else(|| Error::Invalid(format!("class index {class} out of range")))?;
    let g = ideal_norm_gram(form);
    let scale = BigRational::new(BigInt::one(), BigInt::from(n * n));
    let mut gram = vec![vec![BigRational::zero(); 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            gram[i][j] = big(g[i][j]) * &scale;
            gram[2 + i][2 + j] = -big(g[i][j]) * &scale;
        }
    }
    let sign = match field.sign {
        FieldSign::Imaginary => "imaginary",
        FieldSign::Real => "real",
    };
    QuadraticLattice::new(gram, format!("L_A({n}) for {sign} d = {}, class {form}", field.disc))
}

/// How to make an enumeration of `{x ∈ μ + L : Q(x) = m}` finite.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundPolicy {
    /// No bound; the lattice must be definite.
    Definite,
    /// Keep only vectors with `x^T M x ≤ radius_sq` for a positive definite
    /// majorant `M` given in lattice coordinates.
    MajorantBall {
        /// Positive definite matrix in lattice coordinates.
        majorant: Vec<Vec<f64>>,
        /// Squared radius.
        radius_sq: f64,
    },
    /// One representative per orbit of the unit group `⟨ε⟩` on the rank-2
    /// lattice of an ideal `[a, (-b + √d)/2]` in a real quadratic field.
    UnitDomain {
        /// The form `[a, b, c]` attached to the ideal.
        form: BinaryForm,
        /// Fundamental unit `(t + u√d)/2`, component `t`.
        unit_t: i64,
        /// Fundamental unit component `u`.
        unit_u: i64,
        /// Rotation of the fundamental domain: `θ ≤ ln|λ₁/λ₂| < θ + 2 ln ε`.
        theta: f64,
    },
}

/// The finite set of lattice vectors on a quadric `Q(x) = m` in a coset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadricSlice {
    /// Coset representative in lattice coordinates.
    pub mu: Vec<Rat>,
    /// Target value of `Q`.
    pub m: Rat,
    /// Common denominator of the stored vectors.
    pub denom: i64,
    /// Numerators: the vectors are `numerators / denom`.
    pub vectors: Vec<Vec<i64>>,
}

impl QuadricSlice {
    /// Number of vectors found.
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    /// Whether the slice is empty.
    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Vector `i` in exact rational coordinates.
    pub fn vector(&self, i: usize) -> Vec<Rat> {
        self.vectors[i].iter().map(|&x| Rat::new(x, self.denom)).collect()
    }

    /// Vector `i` in floating coordinates.
    pub fn vector_f64(&self, i: usize) -> Vec<f64> {
        self.vectors[i].iter().map(|&x| x as f64 / self.denom as f64).collect()
    }
}

/// All integer vectors `y` with `(y - c)^T A (y - c) ≤ bound` for a positive
/// definite matrix `A`, by the Fincke–Pohst depth-first search.
pub fn fincke_pohst(a: &[Vec<f64>], center: &[f64], bound: f64) -> Result<Vec<Vec<i64>>> {
    let n = a.len();
    // q_ii and q_ij with A = sum_i q_ii (y_i - c_i + sum_{j>i} q_ij (y_j - c_j))^2
    let mut q = a.to_vec();
    for i in 0..n {
        if q[i][i] <= 0.0 {
            return Err(Error::Lattice("majorant is not positive definite".into()));
        }
        for j in i + 1..n {
            q[j][i] = q[i][j];
            q[i][j] /= q[i][i];
        }
        for k in i + 1..n {
            for l in k..n {
                q[k][l] -= q[k][i] * q[i][l];
            }
        }
    }
    for i in 0..n {
        if q[i][i] <= 0.0 {
            return Err(Error::Lattice("majorant is not positive definite".into()));
        }
    }
    let bound = bound * (1.0 + 1e-9) + 1e-9;
    let mut out = Vec::new();
    let mut y = vec![0i64; n];
    let mut rem = vec![0.0f64; n + 1];
    rem[n] = bound;
    fn rec(
        i: usize,
        q: &[Vec<f64>],
        c: &[f64],
        y: &mut Vec<i64>,
        rem: &mut Vec<f64>,
        out: &mut Vec<Vec<i64>>,
    ) {
        let n = q.len();
        let shift: f64 = (i + 1..n).map(|j| q[i][j] * (y[j] as f64 - c[j])).sum();
        let centre = c[i] - shift;
        let r = (rem[i + 1] / q[i][i]).max(0.0).sqrt();
        let lo = (centre - r).ceil() as i64;
        let hi = (centre + r).floor() as i64;
        for v in lo..=hi {
            y[i] = v;
            let t = v as f64 - centre;
            let left = rem[i + 1] - q[i][i] * t * t;
            if left < 0.0 {
                continue;
            }
            rem[i] = left;
            if i == 0 {
                out.push(y.clone());
            } else {
                rec(i - 1, q, c, y, rem, out);
            }
        }
    }
    if n > 0 {
        rec(n - 1, &q, center, &mut y, &mut rem, &mut out);
    }
    Ok(out)
}

/// Enumerates `{x ∈ μ + L : Q(x) = m}` exactly, finite under the given policy.
pub fn enumerate_quadric(
    lattice: &QuadraticLattice,
    mu: &[Rat],
    m: Rat,
    policy: &BoundPolicy,
) -> Result<QuadricSlice> {
    let g = lattice.integer_gram()?;
    let n = lattice.rank;
    if mu.len() != n {
        return Err(Error::ModuleMismatch("coset vector has wrong length".into()));
    }
    let denom = mu.iter().fold(1i64, |acc, x| acc.lcm(x.denom()));
    let base: Vec<i64> = mu.iter().map(|x| (*x * denom).to_integer()).collect();
    let mut slice = QuadricSlice { mu: mu.to_vec(), m, denom, vectors: Vec::new() };

    // congruence obstruction for dual vectors
    let in_dual = (0..n).all(|i| (0..n).map(|j| mu[j] * g[i][j]).sum::<Rat>().is_integer());
    if in_dual {
        let q_mu: Rat = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| mu[i] * mu[j] * g[i][j])
            .sum::<Rat>()
            / 2;
        if !(q_mu - m).is_integer() {
            return Ok(slice);
        }
    }

    let exact_hit = |y: &[i64]| -> Option<Vec<i64>> {
        let x: Vec<i128> = (0..n).map(|i| base[i] as i128 + denom as i128 * y[i] as i128).collect();
        let mut s: i128 = 0;
        for i in 0..n {
            for j in 0..n {
                s += x[i] * g[i][j] as i128 * x[j];
            }
        }
        // Q(x) = s / (2 denom²)
        let lhs = s * *m.denom() as i128;
        let rhs = 2 * *m.numer() as i128 * (denom as i128) * (denom as i128);
        (lhs == rhs).then(|| x.iter().map(|&v| v as i64).collect())
    };
    let center: Vec<f64> = mu.iter().map(|x| -(*x.numer() as f64) / *x.denom() as f64).collect();

    match policy {
        BoundPolicy::Definite => {
            let (p, q) = lattice.signature;
            if p > 0 && q > 0 {
                return Err(Error::MissingBound);
            }
            let sign = if q == 0 { 1.0 } else { -1.0 };
            let target = 2.0 * sign * (*m.numer() as f64 / *m.denom() as f64);
            if target < 0.0 {
                return Ok(slice);
            }
            let a: Vec<Vec<f64>> = g.iter().map(|r| r.iter().map(|&x| sign * x as f64).collect()).collect();
            for y in fincke_pohst(&a, &center, target)? {
                if let Some(x) = exact_hit(&y) {
                    slice.vectors.push(x);
                }
            }
        }
        BoundPolicy::MajorantBall { majorant, radius_sq } => {
            for y in fincke_pohst(majorant, &center, *radius_sq)? {
                if let Some(x) = exact_hit(&y) {
                    slice.vectors.push(x);
                }
            }
        }
        BoundPolicy::UnitDomain { form, unit_t, unit_u, theta } => {
            if n != 2 || g != ideal_norm_gram(*form) {
                return Err(Error::ModuleMismatch("unit domain requires the ideal lattice of the form".into()));
            }
            let d = form.disc();
            if d <= 0 {
                return Err(Error::Invalid("unit domain requires a real quadratic form".into()));
            }
            let sd = (d as f64).sqrt();
            let eps = (*unit_t as f64 + *unit_u as f64 * sd) / 2.0;
            let reg = eps.ln();
            let a = form.a as f64;
            let b = form.b as f64;
            // embeddings λ₁, λ₂ = x a + y (-b ± √d)/2; majorant λ₁² + λ₂²
            let maj = vec![vec![2.0 * a * a, -a * b], vec![-a * b, (b * b + d as f64) / 2.0]];
            let nrm = (*m.numer() as f64 / *m.denom() as f64).abs() * a;
            let tmax = theta.abs().max((theta + 2.0 * reg).abs());
            let bound = 2.0 * nrm * tmax.cosh();
            for y in fincke_pohst(&maj, &center, bound)? {
                let Some(x) = exact_hit(&y) else { continue };
                if x.iter().all(|&v| v == 0) {
                    continue;
                }
                let inside = if *theta == 0.0 {
                    // λ = (P + Q√d)/2 with P = 2 a x - b y, Q = y (in units of 1/denom)
                    let p = 2 * form.a as i128 * x[0] as i128 - form.b as i128 * x[1] as i128;
                    let q = x[1] as i128;
                    let (t, u, d) = (*unit_t as i128, *unit_u as i128, d as i128);
                    // κ = ε' λ with ε' = (t - u√d)/2
                    let p2 = p * t - q * u * d;
                    let q2 = q * t - p * u;
                    p * q >= 0 && p2 * q2 < 0
                } else {
                    let xf = x[0] as f64;
                    let yf = x[1] as f64;
                    let l1 = xf * a + yf * (-b + sd) / 2.0;
                    let l2 = xf * a + yf * (-b - sd) / 2.0;
                    let t = (l1 / l2).abs().ln() - theta;
                    (0.0..2.0 * reg).contains(&t)
                };
                if inside {
                    slice.vectors.push(x);
                }
            }
        }
    }
    slice.vectors.sort();
    Ok(slice)
}

/// Coset correspondence between a lattice `L` and a finite-index sublattice `M`.
#[derive(Debug, Clone, Serialize)]
pub struct SublatticeMaps {
    /// Index `[L : M]`.
    pub index: usize,
    /// For each coset of `M∨/M`: the image in `L∨/L` if it lies in `L∨/M`.
    pub to_l: Vec<Option<usize>>,
    /// For each coset of `L∨/L`: the cosets of `L∨/M` above it.
    pub fibers: Vec<Vec<usize>>,
}

/// Coset tables for `M ⊆ L`, where `M` is given by integer basis rows in the
/// coordinates of `L`. Returns `(M, M∨/M, tables)`.
pub fn sublattice_coset_maps(
    lattice: &QuadraticLattice,
    module: &DiscriminantModule,
    basis: &[Vec<i64>],
) -> Result<(QuadraticLattice, DiscriminantModule, SublatticeMaps)> {
    let n = lattice.rank;
    if basis.len() != n {
        return Err(Error::Lattice("sublattice must have full rank".into()));
    }
    let det = determinant(
        &basis.iter().map(|r| r.iter().map(|&x| big(x)).collect()).collect::<Vec<_>>(),
    );
    if det.is_zero() {
        return Err(Error::Lattice("sublattice basis is singular".into()));
    }
    let index = det.abs().to_integer().to_usize().ok_or_else(|| Error::Lattice("index overflow".into()))?;
    let sub = lattice.sublattice(basis)?;
    let sub_module = sub.discriminant_module()?;
    let mut to_l = Vec::with_capacity(sub_module.order);
    let mut fibers = vec![Vec::new(); module.order];
    for (j, nu) in sub_module.cosets.iter().enumerate() {
        // coordinates in L: v = B^T nu
        let v: Vec<Rat> = (0..n).map(|i| (0..n).map(|k| nu[k] * basis[k][i]).sum()).collect();
        match module.index_of(&v) {
            Ok(i) => {
                to_l.push(Some(i));
                fibers[i].push(j);
            }
            Err(Error::Lattice(_)) => to_l.push(None),
            Err(e) => return Err(e),
        }
    }
    if fibers.iter().any(|f| f.len() != index) {
        return Err(Error::Lattice("fiber sizes do not match the index".into()));
    }
    Ok((sub, sub_module, SublatticeMaps { index, to_l, fibers }))
}
