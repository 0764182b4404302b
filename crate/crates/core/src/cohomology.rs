//! Chevalley–Eilenberg, operator and differential Lie algebra cochain
//! complexes as explicit matrices on the increasing-tuple basis.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};

use crate::combinatorics::binomial;
use crate::error::{Error, Result};
use crate::lie::{rho_lambda, trivial_extension, DiffLieAlgebra, DiffRepresentation};
use crate::linalg::{self, Matrix};
use crate::multilinear::AltMap;
use crate::par;
use crate::scalar::{self, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Flavor {
    Ce,
    Do,
    DiffLie,
    Tilde,
}

impl FromStr for Flavor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ce" => Ok(Flavor::Ce),
            "do" => Ok(Flavor::Do),
            "difflie" => Ok(Flavor::DiffLie),
            "tilde" => Ok(Flavor::Tilde),
            _ => Err(Error::Parse(format!("unknown flavor {s:?}"))),
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flavor::Ce => "ce",
            Flavor::Do => "do",
            Flavor::DiffLie => "difflie",
            Flavor::Tilde => "tilde",
        })
    }
}

/// `dim Cⁿ(g, V) = C(dim g, n) · dim V`.
pub fn cochain_dim(g_dim: usize, v_dim: usize, n: usize) -> usize {
    binomial(g_dim, n) * v_dim
}

/// Matrix of a linear operator on `n`-cochains, built column by column.
fn matrix_of<F>(g_dim: usize, v_dim: usize, n: usize, out_arity: usize, apply: F) -> Matrix
where
    F: Fn(&AltMap) -> AltMap + Sync + Send,
{
    let cols_n = cochain_dim(g_dim, v_dim, n);
    let cols = par::map_range(cols_n, |k| apply(&AltMap::unit(n, g_dim, v_dim, k)).coeffs);
    Matrix::from_columns(cochain_dim(g_dim, v_dim, out_arity), &cols)
}

/// `∂ⁿf(x₁..x_{n+1}) = Σ(−1)^{i+n}ρ(x_i)f(..x̂_i..) + Σ_{i<j}(−1)^{i+j+n+1}f([x_i,x_j],..x̂_i..x̂_j..)`.
pub fn ce_apply(a: &DiffLieAlgebra, rho: &[Matrix], f: &AltMap) -> AltMap {
    let n = f.arity;
    let g = &a.algebra;
    let mut out = AltMap::zero(n + 1, f.src_dim, f.tgt_dim);
    let mut rest = Vec::with_capacity(n);
    let mut args = vec![0usize; n];
    for t in out.tuples() {
        let mut acc = scalar::zeros(f.tgt_dim);
        for p in 0..=n {
            rest.clear();
            rest.extend(t.iter().enumerate().filter(|&(q, _)| q != p).map(|(_, &x)| x));
            let fv = f.value(&rest);
            if !scalar::is_zero_vec(fv) {
                let s = scalar::sign((p + 1 + n) as i64);
                scalar::add_scaled(&mut acc, &s, &rho[t[p]].apply(fv));
            }
        }
        for p in 0..=n {
            for q in p + 1..=n {
                let b = g.bracket_basis(t[p], t[q]);
                if scalar::is_zero_vec(&b) {
                    continue;
                }
                let s = scalar::sign((p + q + 2 + n + 1) as i64);
                let mut r = 1;
                for (pos, &x) in t.iter().enumerate() {
                    if pos != p && pos != q {
                        args[r] = x;
                        r += 1;
                    }
                }
                for (k, c) in b.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    args[0] = k;
                    if let Some((s2, fv)) = f.on_basis(&args) {
                        scalar::add_scaled(&mut acc, &(c * &s * s2), fv);
                    }
                }
            }
        }
        out.value_mut(&t).clone_from_slice(&acc);
    }
    out
}

/// `δⁿf = Σ_k λ^{k−1} Σ_{i₁<…<i_k} f(.., dx_{i₁}, .., dx_{i_k}, ..) − d_V f`.
pub fn delta_apply(a: &DiffLieAlgebra, rep: &DiffRepresentation, f: &AltMap) -> AltMap {
    let n = f.arity;
    let dim = f.src_dim;
    let mut out = AltMap::zero(n, dim, f.tgt_dim);
    let units: Vec<Vec<Scalar>> = (0..dim).map(|i| crate::lie::unit(dim, i)).collect();
    let images: Vec<Vec<Scalar>> = (0..dim).map(|i| a.d.column(i)).collect();
    let lam_pows: Vec<Scalar> = (0..=n).map(|k| scalar::pow(&a.weight, k)).collect();
    for t in out.tuples() {
        let mut acc = rep.dv.apply(f.value(&t));
        for v in acc.iter_mut() {
            *v = -v.clone();
        }
        for mask in 1u32..(1u32 << n) {
            let k = mask.count_ones() as usize;
            let c = &lam_pows[k - 1];
            if c.is_zero() {
                continue;
            }
            let args: Vec<&[Scalar]> =
                t.iter().enumerate().map(|(p, &x)| if mask >> p & 1 == 1 { images[x].as_slice() } else { units[x].as_slice() }).collect();
            f.eval_into(&args, c, &mut acc);
        }
        out.value_mut(&t).clone_from_slice(&acc);
    }
    out
}

pub fn ce_differential(a: &DiffLieAlgebra, rep: &DiffRepresentation, n: usize) -> Matrix {
    matrix_of(a.dim(), rep.space_dim, n, n + 1, |f| ce_apply(a, &rep.rho, f))
}

pub fn do_differential(a: &DiffLieAlgebra, rep: &DiffRepresentation, n: usize) -> Matrix {
    let rl = rho_lambda(rep, a);
    matrix_of(a.dim(), rep.space_dim, n, n + 1, |f| ce_apply(a, &rl.rho, f))
}

pub fn delta_map(a: &DiffLieAlgebra, rep: &DiffRepresentation, n: usize) -> Matrix {
    matrix_of(a.dim(), rep.space_dim, n, n, |f| delta_apply(a, rep, f))
}

/// `dim C^n_DiffLie`.
pub fn difflie_dim(g_dim: usize, v_dim: usize, n: usize) -> usize {
    if n == 0 {
        v_dim
    } else {
        cochain_dim(g_dim, v_dim, n) + cochain_dim(g_dim, v_dim, n - 1)
    }
}

fn stack_rows(top: &Matrix, bottom: &Matrix) -> Matrix {
    assert_eq!(top.cols, bottom.cols);
    let mut entries = top.entries.clone();
    entries.extend(bottom.entries.iter().cloned());
    Matrix { rows: top.rows + bottom.rows, cols: top.cols, entries }
}

/// `∂⁰v = (∂⁰_alg v, d_V v)`; for n ≥ 1 the block `[[∂ⁿ_alg, 0], [−δⁿ, −∂ⁿ⁻¹_DO]]`.
pub fn difflie_differential(a: &DiffLieAlgebra, rep: &DiffRepresentation, n: usize) -> Matrix {
    if n == 0 {
        return stack_rows(&ce_differential(a, rep, 0), &rep.dv);
    }
    let alg = ce_differential(a, rep, n);
    let del = delta_map(a, rep, n);
    let dop = do_differential(a, rep, n - 1);
    Matrix::block(&alg, &Matrix::zeros(alg.rows, dop.cols), &del.neg(), &dop.neg())
}

/// Degree-zero differential with the second component `δ⁰v = −d_V v` taken literally.
pub fn difflie_differential_zero_literal(a: &DiffLieAlgebra, rep: &DiffRepresentation) -> Matrix {
    stack_rows(&ce_differential(a, rep, 0), &rep.dv.neg())
}

/// `C̃⁰ = 0`, `C̃¹ = C¹_alg`, `C̃ⁿ = Cⁿ_DiffLie` for n ≥ 2.
pub fn tilde_differential(a: &DiffLieAlgebra, rep: &DiffRepresentation, n: usize) -> Matrix {
    match n {
        0 => Matrix::zeros(cochain_dim(a.dim(), rep.space_dim, 1), 0),
        1 => {
            let full = difflie_differential(a, rep, 1);
            full.columns(0..cochain_dim(a.dim(), rep.space_dim, 1))
        }
        _ => difflie_differential(a, rep, n),
    }
}

pub fn complex_dim(flavor: Flavor, g_dim: usize, v_dim: usize, n: usize) -> usize {
    match flavor {
        Flavor::Ce | Flavor::Do => cochain_dim(g_dim, v_dim, n),
        Flavor::DiffLie => difflie_dim(g_dim, v_dim, n),
        Flavor::Tilde => match n {
            0 => 0,
            1 => cochain_dim(g_dim, v_dim, 1),
            _ => difflie_dim(g_dim, v_dim, n),
        },
    }
}

pub fn differential(flavor: Flavor, a: &DiffLieAlgebra, rep: &DiffRepresentation, n: usize) -> Matrix {
    match flavor {
        Flavor::Ce => ce_differential(a, rep, n),
        Flavor::Do => do_differential(a, rep, n),
        Flavor::DiffLie => difflie_differential(a, rep, n),
        Flavor::Tilde => tilde_differential(a, rep, n),
    }
}

#[derive(Clone, Debug)]
pub struct CochainComplexSpec {
    pub algebra: DiffLieAlgebra,
    pub coefficients: DiffRepresentation,
    pub max_degree: usize,
    pub flavor: Flavor,
}

/// Differentials `d⁰..d^max_degree` with `d^{n+1} d^n = 0` checked.
#[derive(Clone, Debug)]
pub struct CochainComplex {
    pub flavor: Flavor,
    pub dims: Vec<usize>,
    pub maps: Vec<Matrix>,
}

impl CochainComplexSpec {
    pub fn new(algebra: DiffLieAlgebra, coefficients: DiffRepresentation, max_degree: usize, flavor: Flavor) -> Self {
        CochainComplexSpec { algebra, coefficients, max_degree, flavor }
    }

    pub fn build(&self) -> Result<CochainComplex> {
        let (gd, vd) = (self.algebra.dim(), self.coefficients.space_dim);
        let maps: Vec<Matrix> =
            par::map_range(self.max_degree + 1, |n| differential(self.flavor, &self.algebra, &self.coefficients, n));
        for n in 0..self.max_degree {
            if !maps[n + 1].mul(&maps[n]).is_zero() {
                return Err(Error::CompositionNonzero(n));
            }
        }
        let dims = (0..=self.max_degree + 1).map(|n| complex_dim(self.flavor, gd, vd, n)).collect();
        Ok(CochainComplex { flavor: self.flavor, dims, maps })
    }
}

impl CochainComplex {
    /// `dim Hⁿ` for `0 ≤ n < max_degree`.
    pub fn cohomology_dims(&self) -> Result<Vec<usize>> {
        (0..self.maps.len() - 1)
            .map(|n| {
                let d_in = if n == 0 { Matrix::zeros(self.dims[0], 0) } else { self.maps[n - 1].clone() };
                linalg::homology_dim(&self.maps[n], &d_in, n)
            })
            .collect()
    }

    pub fn report_json(&self) -> Result<serde_json::Value> {
        let dims_h = self.cohomology_dims()?;
        let c: Vec<usize> = self.dims[..self.maps.len() - 1].to_vec();
        Ok(serde_json::json!({
            "flavor": self.flavor.to_string(),
            "dims_C": c,
            "dims_H": dims_h,
            "d_squared_ok": true,
        }))
    }
}

pub fn cohomology_dims(spec: &CochainComplexSpec) -> Result<Vec<usize>> {
    spec.build()?.cohomology_dims()
}

/// `(f, g) ∈ Cⁿ_alg ⊕ Cⁿ⁻¹_DO`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CocyclePair {
    pub f: AltMap,
    pub g: AltMap,
}

impl CocyclePair {
    pub fn degree(&self) -> usize {
        self.f.arity
    }

    pub fn zero(n: usize, g_dim: usize, v_dim: usize) -> Self {
        assert!(n >= 1);
        CocyclePair { f: AltMap::zero(n, g_dim, v_dim), g: AltMap::zero(n - 1, g_dim, v_dim) }
    }

    pub fn coords(&self) -> Vec<Scalar> {
        let mut v = self.f.coeffs.clone();
        v.extend(self.g.coeffs.iter().cloned());
        v
    }

    pub fn from_coords(n: usize, g_dim: usize, v_dim: usize, coords: &[Scalar]) -> Self {
        let k = cochain_dim(g_dim, v_dim, n);
        CocyclePair {
            f: AltMap::from_coords(n, g_dim, v_dim, coords[..k].to_vec()),
            g: AltMap::from_coords(n - 1, g_dim, v_dim, coords[k..].to_vec()),
        }
    }

    pub fn add(&self, other: &CocyclePair) -> CocyclePair {
        CocyclePair { f: self.f.add(&other.f), g: self.g.add(&other.g) }
    }

    pub fn sub(&self, other: &CocyclePair) -> CocyclePair {
        CocyclePair { f: self.f.sub(&other.f), g: self.g.sub(&other.g) }
    }

    pub fn scale(&self, c: &Scalar) -> CocyclePair {
        CocyclePair { f: self.f.scale(c), g: self.g.scale(c) }
    }

    pub fn is_zero(&self) -> bool {
        self.f.is_zero() && self.g.is_zero()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "f": self.f.to_json(), "g": self.g.to_json() })
    }

    pub fn from_json(v: &serde_json::Value, g_dim: usize, v_dim: usize) -> Result<Self> {
        let f = AltMap::from_json(v.get("f").ok_or_else(|| Error::Parse("pair needs \"f\"".into()))?, g_dim, v_dim)?;
        let g = AltMap::from_json(v.get("g").ok_or_else(|| Error::Parse("pair needs \"g\"".into()))?, g_dim, v_dim)?;
        if f.arity == 0 || g.arity + 1 != f.arity {
            return Err(Error::ArityMismatch { expected: f.arity.max(1) - 1, got: g.arity });
        }
        Ok(CocyclePair { f, g })
    }
}

/// `∂ⁿ(f, g) = (∂_alg f, −∂_DO g − δf)`.
pub fn difflie_apply(a: &DiffLieAlgebra, rep: &DiffRepresentation, pair: &CocyclePair) -> CocyclePair {
    let rl = rho_lambda(rep, a);
    let f = ce_apply(a, &rep.rho, &pair.f);
    let g = ce_apply(a, &rl.rho, &pair.g).add(&delta_apply(a, rep, &pair.f)).scale(&-Scalar::one());
    CocyclePair { f, g }
}

/// `∂¹φ` for a linear map `φ: g → V`, as a pair of arities (2, 1).
pub fn difflie_apply_one(a: &DiffLieAlgebra, rep: &DiffRepresentation, phi: &AltMap) -> CocyclePair {
    difflie_apply(a, rep, &CocyclePair { f: phi.clone(), g: AltMap::zero(0, a.dim(), rep.space_dim) })
}

/// The image of the pair under the differential; zero iff it is a cocycle.
pub fn cocycle_residual(a: &DiffLieAlgebra, rep: &DiffRepresentation, pair: &CocyclePair) -> Result<CocyclePair> {
    if pair.f.src_dim != a.dim() || pair.f.tgt_dim != rep.space_dim || pair.g.src_dim != a.dim() || pair.g.tgt_dim != rep.space_dim {
        return Err(Error::DimensionMismatch("cochain pair does not match algebra and coefficients".into()));
    }
    if pair.f.arity != pair.g.arity + 1 {
        return Err(Error::ArityMismatch { expected: pair.f.arity.saturating_sub(1), got: pair.g.arity });
    }
    Ok(difflie_apply(a, rep, pair))
}

/// Restrict along `∧ⁿg ⊆ ∧ⁿ(g⊕V)`, vanish on V-factors, corestrict along `V ⊆ g⊕V`.
pub fn embed_cochain(f: &AltMap, g_dim: usize) -> AltMap {
    let total = g_dim + f.tgt_dim;
    let mut out = AltMap::zero(f.arity, total, total);
    for t in f.tuples() {
        out.value_mut(&t)[g_dim..].clone_from_slice(f.value(&t));
    }
    out
}

/// Matrix of the coefficient embedding on `Cⁿ_DiffLie`.
pub fn embedding_matrix(g_dim: usize, v_dim: usize, n: usize) -> Matrix {
    let total = g_dim + v_dim;
    let part = |k: usize| matrix_of_embedding(g_dim, v_dim, k, total);
    if n == 0 {
        return part(0);
    }
    let (a, b) = (part(n), part(n - 1));
    Matrix::block(&a, &Matrix::zeros(a.rows, b.cols), &Matrix::zeros(b.rows, a.cols), &b)
}

fn matrix_of_embedding(g_dim: usize, v_dim: usize, k: usize, total: usize) -> Matrix {
    let cols: Vec<Vec<Scalar>> = (0..cochain_dim(g_dim, v_dim, k)).map(|c| embed_cochain(&AltMap::unit(k, g_dim, v_dim, c), g_dim).coeffs).collect();
    Matrix::from_columns(cochain_dim(total, total, k), &cols)
}

/// `∂_big ∘ E − E ∘ ∂` on `Cⁿ_DiffLie(g, V) → C^{n+1}_DiffLie(g ⋉ V, ad)`.
pub fn embedding_commutator(a: &DiffLieAlgebra, rep: &DiffRepresentation, n: usize) -> Matrix {
    let big = trivial_extension(a, rep);
    let big_rep = crate::lie::adjoint_rep(&big);
    let (gd, vd) = (a.dim(), rep.space_dim);
    let lhs = difflie_differential(&big, &big_rep, n).mul(&embedding_matrix(gd, vd, n));
    let rhs = embedding_matrix(gd, vd, n + 1).mul(&difflie_differential(a, rep, n));
    lhs.sub(&rhs)
}

/// `∂ⁿ_DO δⁿ − δⁿ⁺¹ ∂ⁿ_alg`.
pub fn cochain_map_defect(a: &DiffLieAlgebra, rep: &DiffRepresentation, n: usize) -> Matrix {
    do_differential(a, rep, n).mul(&delta_map(a, rep, n)).sub(&delta_map(a, rep, n + 1).mul(&ce_differential(a, rep, n)))
}

/// Cocycles of the tilde complex whose classes form a basis of `H̃ⁿ`.
pub fn tilde_cohomology_basis(a: &DiffLieAlgebra, rep: &DiffRepresentation, n: usize) -> Vec<Vec<Scalar>> {
    let d_out = tilde_differential(a, rep, n);
    let rows = d_out.cols;
    let mut span: Vec<Vec<Scalar>> = if n == 0 {
        Vec::new()
    } else {
        let d_in = tilde_differential(a, rep, n - 1);
        (0..d_in.cols).map(|j| d_in.column(j)).collect()
    };
    let mut r = linalg::rank(&Matrix::from_columns(rows, &span));
    let mut out = Vec::new();
    for z in linalg::kernel_basis(&d_out) {
        span.push(z.clone());
        let r2 = linalg::rank(&Matrix::from_columns(rows, &span));
        if r2 > r {
            out.push(z);
            r = r2;
        } else {
            span.pop();
        }
    }
    out
}

/// A linear `φ: g → V` with `∂¹φ = pair`, if one exists.
pub fn coboundary_preimage(a: &DiffLieAlgebra, rep: &DiffRepresentation, pair: &CocyclePair) -> Option<AltMap> {
    let m = tilde_differential(a, rep, 1);
    linalg::solve(&m, &pair.coords()).map(|x| AltMap::from_coords(1, a.dim(), rep.space_dim, x))
}

/// A cochain whose ∂_alg-part is built from `coords`; for random sampling in tests.
pub fn random_pair(rng: &mut impl rand::Rng, n: usize, g_dim: usize, v_dim: usize) -> CocyclePair {
    let coords = crate::catalog::random_vec(rng, difflie_dim(g_dim, v_dim, n), 2);
    CocyclePair::from_coords(n, g_dim, v_dim, &coords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{self, aff1};
    use crate::lie::adjoint_rep;
    use crate::scalar::int;

    fn aff1_d() -> DiffLieAlgebra {
        DiffLieAlgebra::new(aff1(), Matrix::from_i64(&[&[0, 0], &[0, 1]]), int(3))
    }

    #[test]
    fn degree_zero_is_minus_rho() {
        let a = aff1_d();
        let rep = adjoint_rep(&a);
        let m = ce_differential(&a, &rep, 0);
        let v = vec![int(1), int(2)];
        let got = m.apply(&v);
        let mut want = rep.rho[0].apply(&v);
        want.extend(rep.rho[1].apply(&v));
        assert_eq!(got, scalar::scaled(&-Scalar::one(), &want));
    }

    #[test]
    fn delta_on_aff1() {
        let a = DiffLieAlgebra::new(aff1(), Matrix::from_i64(&[&[0, 0], &[0, 1]]), int(0));
        let rep = adjoint_rep(&a);
        let f = AltMap::from_matrix(&Matrix::from_i64(&[&[0, 0], &[1, 0]]));
        let df = delta_apply(&a, &rep, &f);
        assert_eq!(df.to_matrix(), Matrix::from_i64(&[&[0, 0], &[-1, 0]]));
        let id = AltMap::from_matrix(&Matrix::identity(2));
        assert!(delta_apply(&a, &rep, &id).is_zero());
    }

    #[test]
    fn squares_vanish_and_literal_sign_fails() {
        let mut r = catalog::rng(3);
        let mut literal_failed = false;
        for _ in 0..8 {
            let w = catalog::random_weight(&mut r);
            let a = catalog::random_diff_lie(&mut r, 3, &w);
            let rep = catalog::random_coefficients(&mut r, &a);
            for flavor in [Flavor::Ce, Flavor::Do, Flavor::DiffLie, Flavor::Tilde] {
                CochainComplexSpec::new(a.clone(), rep.clone(), 4, flavor).build().unwrap();
            }
            for n in 0..3 {
                assert!(cochain_map_defect(&a, &rep, n).is_zero());
                assert!(embedding_commutator(&a, &rep, n).is_zero());
            }
            let lit = difflie_differential(&a, &rep, 1).mul(&difflie_differential_zero_literal(&a, &rep));
            literal_failed |= !lit.is_zero();
        }
        assert!(literal_failed);
    }

    #[test]
    fn abelian_trivial_h0() {
        let a = DiffLieAlgebra::new(crate::lie::LieAlgebra::abelian(1), Matrix::zeros(1, 1), int(0));
        let rep = DiffRepresentation::trivial(1, Matrix::zeros(1, 1));
        let dims = cohomology_dims(&CochainComplexSpec::new(a, rep, 4, Flavor::DiffLie)).unwrap();
        assert_eq!(dims[0], 1);
    }

    #[test]
    fn aff1_h0_vanishes() {
        let a = aff1_d();
        let rep = adjoint_rep(&a);
        let dims = cohomology_dims(&CochainComplexSpec::new(a, rep, 3, Flavor::DiffLie)).unwrap();
        assert_eq!(dims[0], 0);
    }

    #[test]
    fn pair_apply_matches_matrix() {
        let mut r = catalog::rng(5);
        let a = catalog::random_diff_lie(&mut r, 3, &int(2));
        let rep = catalog::random_diff_rep(&mut r, &a);
        for n in 1..3 {
            let p = random_pair(&mut r, n, a.dim(), rep.space_dim);
            let m = difflie_differential(&a, &rep, n);
            assert_eq!(m.apply(&p.coords()), cocycle_residual(&a, &rep, &p).unwrap().coords());
        }
    }
}
