//! Lie algebras, weighted differential operators, representations, LieAct triples.

use std::ops::Deref;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::multilinear::AltMap;
use crate::scalar::{self, Scalar};

/// Residual vectors keyed by the basis indices that produced them.
pub type Residuals = Vec<(Vec<usize>, Vec<Scalar>)>;

pub fn residuals_vanish(r: &Residuals) -> bool {
    r.iter().all(|(_, v)| scalar::is_zero_vec(v))
}

pub fn first_nonzero(r: &Residuals) -> Option<&(Vec<usize>, Vec<Scalar>)> {
    r.iter().find(|(_, v)| !scalar::is_zero_vec(v))
}

pub fn unit(n: usize, i: usize) -> Vec<Scalar> {
    let mut v = scalar::zeros(n);
    v[i] = Scalar::one();
    v
}

/// Values that passed their residual checks.
#[derive(Clone, Debug)]
pub struct Validated<T>(T);

impl<T> Validated<T> {
    pub fn into_inner(self) -> T {
        self.0
    }
}

impl<T> Deref for Validated<T> {
    type Target = T;
    fn deref(&self) -> &T {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LieAlgebra {
    pub dim: usize,
    pub bracket: AltMap,
}

impl LieAlgebra {
    pub fn abelian(dim: usize) -> Self {
        LieAlgebra { dim, bracket: AltMap::zero(2, dim, dim) }
    }

    /// From `(i, j, [c¹..cⁿ])` triples with 0-based `i < j`.
    pub fn from_constants(dim: usize, entries: &[(usize, usize, Vec<Scalar>)]) -> Self {
        let mut bracket = AltMap::zero(2, dim, dim);
        for (i, j, c) in entries {
            bracket.add_on_basis(&[*i, *j], &Scalar::one(), c);
        }
        LieAlgebra { dim, bracket }
    }

    pub fn bracket_vec(&self, x: &[Scalar], y: &[Scalar]) -> Vec<Scalar> {
        let mut out = scalar::zeros(self.dim);
        self.bracket.eval_into(&[x, y], &Scalar::one(), &mut out);
        out
    }

    pub fn bracket_basis(&self, i: usize, j: usize) -> Vec<Scalar> {
        match self.bracket.on_basis(&[i, j]) {
            Some((s, v)) => scalar::scaled(&s, v),
            None => scalar::zeros(self.dim),
        }
    }

    /// `ad(x)`.
    pub fn ad(&self, x: &[Scalar]) -> Matrix {
        let cols: Vec<Vec<Scalar>> = (0..self.dim).map(|j| self.bracket_vec(x, &unit(self.dim, j))).collect();
        Matrix::from_columns(self.dim, &cols)
    }

    pub fn jacobi_residual(&self) -> Residuals {
        let n = self.dim;
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let (x, y, z) = (unit(n, i), unit(n, j), unit(n, k));
                    let mut r = self.bracket_vec(&self.bracket_vec(&x, &y), &z);
                    scalar::add_into(&mut r, &self.bracket_vec(&self.bracket_vec(&y, &z), &x));
                    scalar::add_into(&mut r, &self.bracket_vec(&self.bracket_vec(&z, &x), &y));
                    out.push((vec![i, j, k], r));
                }
            }
        }
        out
    }

    /// Transport along a change of basis: new basis vectors are the columns of `p`.
    pub fn change_basis(&self, p: &Matrix) -> Option<LieAlgebra> {
        let inv = crate::linalg::inverse(p)?;
        let n = self.dim;
        let mut bracket = AltMap::zero(2, n, n);
        for i in 0..n {
            for j in i + 1..n {
                let v = inv.apply(&self.bracket_vec(&p.column(i), &p.column(j)));
                bracket.value_mut(&[i, j]).clone_from_slice(&v);
            }
        }
        Some(LieAlgebra { dim: n, bracket })
    }

    /// Direct sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &LieAlgebra) -> LieAlgebra {
        let n = self.dim + other.dim;
        let mut bracket = AltMap::zero(2, n, n);
        for (alg, off) in [(self, 0), (other, self.dim)] {
            for i in 0..alg.dim {
                for j in i + 1..alg.dim {
                    let v = alg.bracket_basis(i, j);
                    let slot = bracket.value_mut(&[i + off, j + off]);
                    for (k, c) in v.into_iter().enumerate() {
                        slot[k + off] = c;
                    }
                }
            }
        }
        LieAlgebra { dim: n, bracket }
    }

    pub fn validate(self) -> Result<Validated<Self>> {
        match first_nonzero(&self.jacobi_residual()) {
            None => Ok(Validated(self)),
            Some((t, _)) => Err(Error::Invalid(format!("Jacobi fails on basis triple {t:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffLieAlgebra {
    pub algebra: LieAlgebra,
    pub d: Matrix,
    pub weight: Scalar,
}

impl DiffLieAlgebra {
    pub fn new(algebra: LieAlgebra, d: Matrix, weight: Scalar) -> Self {
        assert_eq!((d.rows, d.cols), (algebra.dim, algebra.dim), "operator shape");
        DiffLieAlgebra { algebra, d, weight }
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim
    }

    /// `d[x,y] − [dx,y] − [x,dy] − λ[dx,dy]` over basis pairs.
    pub fn weighted_derivation_residual(&self) -> Residuals {
        let n = self.dim();
        let g = &self.algebra;
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let (x, y) = (unit(n, i), unit(n, j));
                let (dx, dy) = (self.d.column(i), self.d.column(j));
                let mut r = self.d.apply(&g.bracket_basis(i, j));
                r = scalar::sub(&r, &g.bracket_vec(&dx, &y));
                r = scalar::sub(&r, &g.bracket_vec(&x, &dy));
                scalar::add_scaled(&mut r, &-self.weight.clone(), &g.bracket_vec(&dx, &dy));
                out.push((vec![i, j], r));
            }
        }
        out
    }

    /// `κ·d` with weight `λ/κ`.
    pub fn rescale_operator(&self, kappa: &Scalar) -> Result<DiffLieAlgebra> {
        if kappa.is_zero() {
            return Err(Error::ZeroScale);
        }
        Ok(DiffLieAlgebra { algebra: self.algebra.clone(), d: self.d.scale(kappa), weight: &self.weight / kappa })
    }

    pub fn is_valid(&self) -> bool {
        residuals_vanish(&self.algebra.jacobi_residual()) && residuals_vanish(&self.weighted_derivation_residual())
    }

    pub fn validate(self) -> Result<Validated<Self>> {
        if let Some((t, _)) = first_nonzero(&self.algebra.jacobi_residual()) {
            return Err(Error::Invalid(format!("Jacobi fails on basis triple {t:?}")));
        }
        if let Some((t, _)) = first_nonzero(&self.weighted_derivation_residual()) {
            return Err(Error::Invalid(format!("weighted derivation identity fails on basis pair {t:?}")));
        }
        Ok(Validated(self))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffRepresentation {
    pub space_dim: usize,
    pub rho: Vec<Matrix>,
    pub dv: Matrix,
}

impl DiffRepresentation {
    pub fn rho_of(&self, x: &[Scalar]) -> Matrix {
        let mut m = Matrix::zeros(self.space_dim, self.space_dim);
        for (c, r) in x.iter().zip(&self.rho) {
            if !c.is_zero() {
                scalar::add_scaled(&mut m.entries, c, &r.entries);
            }
        }
        m
    }

    /// Trivial action with the given operator on V.
    pub fn trivial(g_dim: usize, dv: Matrix) -> Self {
        let m = dv.rows;
        DiffRepresentation { space_dim: m, rho: vec![Matrix::zeros(m, m); g_dim], dv }
    }

    /// `ρ([x_i,x_j]) − [ρ(x_i), ρ(x_j)]`, flattened.
    pub fn homomorphism_residual(&self, g: &LieAlgebra) -> Residuals {
        let mut out = Vec::new();
        for i in 0..g.dim {
            for j in i + 1..g.dim {
                let lhs = self.rho_of(&g.bracket_basis(i, j));
                let comm = self.rho[i].mul(&self.rho[j]).sub(&self.rho[j].mul(&self.rho[i]));
                out.push((vec![i, j], lhs.sub(&comm).entries));
            }
        }
        out
    }

    /// `d_V ρ(x) − ρ(dx) − ρ(x) d_V − λ ρ(dx) d_V` per basis vector x, flattened.
    pub fn compatibility_residual(&self, a: &DiffLieAlgebra) -> Residuals {
        (0..a.dim())
            .map(|i| {
                let r = &self.rho[i];
                let rdx = self.rho_of(&a.d.column(i));
                let m = self.dv.mul(r).sub(&rdx).sub(&r.mul(&self.dv)).sub(&rdx.mul(&self.dv).scale(&a.weight));
                (vec![i], m.entries)
            })
            .collect()
    }

    pub fn is_valid_over(&self, a: &DiffLieAlgebra) -> bool {
        residuals_vanish(&self.homomorphism_residual(&a.algebra)) && residuals_vanish(&self.compatibility_residual(a))
    }

    pub fn validate(self, a: &DiffLieAlgebra) -> Result<Validated<Self>> {
        if self.rho.len() != a.dim() {
            return Err(Error::DimensionMismatch(format!("{} action matrices for dim {}", self.rho.len(), a.dim())));
        }
        if let Some((t, _)) = first_nonzero(&self.homomorphism_residual(&a.algebra)) {
            return Err(Error::Invalid(format!("representation is not a homomorphism on pair {t:?}")));
        }
        if let Some((t, _)) = first_nonzero(&self.compatibility_residual(a)) {
            return Err(Error::Invalid(format!("d_V compatibility fails at basis vector {t:?}")));
        }
        Ok(Validated(self))
    }

    /// Direct sum of two representations of the same algebra.
    pub fn direct_sum(&self, other: &DiffRepresentation) -> DiffRepresentation {
        let z = |a: usize, b: usize| Matrix::zeros(a, b);
        let (m, k) = (self.space_dim, other.space_dim);
        DiffRepresentation {
            space_dim: m + k,
            rho: self.rho.iter().zip(&other.rho).map(|(a, b)| Matrix::block(a, &z(m, k), &z(k, m), b)).collect(),
            dv: Matrix::block(&self.dv, &z(m, k), &z(k, m), &other.dv),
        }
    }
}

/// `ρ_λ(x) = ρ(x + λ dx)`.
pub fn rho_lambda(rep: &DiffRepresentation, a: &DiffLieAlgebra) -> DiffRepresentation {
    let n = a.dim();
    let rho = (0..n)
        .map(|i| {
            let mut x = unit(n, i);
            scalar::add_scaled(&mut x, &a.weight, &a.d.column(i));
            rep.rho_of(&x)
        })
        .collect();
    DiffRepresentation { space_dim: rep.space_dim, rho, dv: rep.dv.clone() }
}

pub fn adjoint_rep(a: &DiffLieAlgebra) -> DiffRepresentation {
    let n = a.dim();
    DiffRepresentation { space_dim: n, rho: (0..n).map(|i| a.algebra.ad(&unit(n, i))).collect(), dv: a.d.clone() }
}

/// `g ⊕ V` with `{x+u, y+v} = [x,y] + ρ(x)v − ρ(y)u` and operator `d + d_V`.
pub fn trivial_extension(a: &DiffLieAlgebra, rep: &DiffRepresentation) -> DiffLieAlgebra {
    let (n, m) = (a.dim(), rep.space_dim);
    let total = n + m;
    let mut bracket = AltMap::zero(2, total, total);
    for i in 0..n {
        for j in i + 1..n {
            let v = a.algebra.bracket_basis(i, j);
            bracket.value_mut(&[i, j])[..n].clone_from_slice(&v);
        }
        for u in 0..m {
            let col = rep.rho[i].column(u);
            bracket.value_mut(&[i, n + u])[n..].clone_from_slice(&col);
        }
    }
    let d = Matrix::block(&a.d, &Matrix::zeros(n, m), &Matrix::zeros(m, n), &rep.dv);
    DiffLieAlgebra { algebra: LieAlgebra { dim: total, bracket }, d, weight: a.weight.clone() }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LieActTriple {
    pub g: LieAlgebra,
    pub h: LieAlgebra,
    pub rho: Vec<Matrix>,
}

#[derive(Clone, Debug, Default)]
pub struct LieActReport {
    pub homomorphism: Residuals,
    pub derivation: Residuals,
}

impl LieActReport {
    pub fn vanishes(&self) -> bool {
        residuals_vanish(&self.homomorphism) && residuals_vanish(&self.derivation)
    }
}

impl LieActTriple {
    pub fn rho_of(&self, x: &[Scalar]) -> Matrix {
        let k = self.h.dim;
        let mut m = Matrix::zeros(k, k);
        for (c, r) in x.iter().zip(&self.rho) {
            if !c.is_zero() {
                scalar::add_scaled(&mut m.entries, c, &r.entries);
            }
        }
        m
    }

    pub fn lieact_residuals(&self) -> LieActReport {
        let as_rep = DiffRepresentation { space_dim: self.h.dim, rho: self.rho.clone(), dv: Matrix::zeros(self.h.dim, self.h.dim) };
        let homomorphism = as_rep.homomorphism_residual(&self.g);
        let k = self.h.dim;
        let mut derivation = Vec::new();
        for x in 0..self.g.dim {
            let r = &self.rho[x];
            for u in 0..k {
                for v in u + 1..k {
                    let mut res = r.apply(&self.h.bracket_basis(u, v));
                    res = scalar::sub(&res, &self.h.bracket_vec(&r.column(u), &unit(k, v)));
                    res = scalar::sub(&res, &self.h.bracket_vec(&unit(k, u), &r.column(v)));
                    derivation.push((vec![x, u, v], res));
                }
            }
        }
        LieActReport { homomorphism, derivation }
    }

    /// `D[x,y] − ρ(x)Dy + ρ(y)Dx − λ[Dx,Dy]_h` over basis pairs of g.
    pub fn relative_diff_residual(&self, d: &Matrix, weight: &Scalar) -> Result<Residuals> {
        if (d.rows, d.cols) != (self.h.dim, self.g.dim) {
            return Err(Error::DimensionMismatch(format!("relative operator is {}x{}", d.rows, d.cols)));
        }
        let mut out = Vec::new();
        for i in 0..self.g.dim {
            for j in i + 1..self.g.dim {
                let (dx, dy) = (d.column(i), d.column(j));
                let mut r = d.apply(&self.g.bracket_basis(i, j));
                r = scalar::sub(&r, &self.rho[i].apply(&dy));
                r = scalar::add(&r, &self.rho[j].apply(&dx));
                scalar::add_scaled(&mut r, &-weight.clone(), &self.h.bracket_vec(&dx, &dy));
                out.push((vec![i, j], r));
            }
        }
        Ok(out)
    }

    /// `[x+u, y+v] = [x,y] + ρ(x)v − ρ(y)u + λ[u,v]_h` on g ⊕ h.
    pub fn semidirect_weighted(&self, weight: &Scalar) -> LieAlgebra {
        let (n, k) = (self.g.dim, self.h.dim);
        let total = n + k;
        let mut bracket = AltMap::zero(2, total, total);
        for i in 0..n {
            for j in i + 1..n {
                bracket.value_mut(&[i, j])[..n].clone_from_slice(&self.g.bracket_basis(i, j));
            }
            for u in 0..k {
                bracket.value_mut(&[i, n + u])[n..].clone_from_slice(&self.rho[i].column(u));
            }
        }
        for u in 0..k {
            for v in u + 1..k {
                let w = scalar::scaled(weight, &self.h.bracket_basis(u, v));
                bracket.value_mut(&[n + u, n + v])[n..].clone_from_slice(&w);
            }
        }
        LieAlgebra { dim: total, bracket }
    }

    /// `D̃(x+u) = D(x) − u` on `g ⋉_λ h`, as an operator of weight 1.
    pub fn lift_tilde_d(&self, d: &Matrix, weight: &Scalar) -> DiffLieAlgebra {
        let (n, k) = (self.g.dim, self.h.dim);
        let op = Matrix::block(&Matrix::zeros(n, n), &Matrix::zeros(n, k), d, &Matrix::identity(k).neg());
        DiffLieAlgebra { algebra: self.semidirect_weighted(weight), d: op, weight: Scalar::one() }
    }
}

fn index_1based(v: &serde_json::Value, dim: usize, what: &str) -> Result<usize> {
    v.as_u64()
        .map(|i| i as usize)
        .filter(|&i| i >= 1 && i <= dim)
        .map(|i| i - 1)
        .ok_or_else(|| Error::Parse(format!("{what} index {v} out of range 1..={dim}")))
}

impl LieAlgebra {
    pub fn brackets_json(&self) -> serde_json::Value {
        let mut out = Vec::new();
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                let v = self.bracket_basis(i, j);
                if !scalar::is_zero_vec(&v) {
                    out.push(serde_json::json!([i + 1, j + 1, scalar::vec_to_json(&v)]));
                }
            }
        }
        serde_json::Value::Array(out)
    }

    pub fn brackets_from_json(dim: usize, v: Option<&serde_json::Value>) -> Result<LieAlgebra> {
        let mut bracket = AltMap::zero(2, dim, dim);
        let Some(v) = v else { return Ok(LieAlgebra { dim, bracket }) };
        let arr = v.as_array().ok_or_else(|| Error::Parse("\"brackets\" must be an array".into()))?;
        for e in arr {
            let t = e.as_array().filter(|t| t.len() == 3).ok_or_else(|| Error::Parse(format!("bad bracket entry {e}")))?;
            let i = index_1based(&t[0], dim, "bracket")?;
            let j = index_1based(&t[1], dim, "bracket")?;
            if i >= j {
                return Err(Error::Parse(format!("bracket entry {e} needs i < j")));
            }
            let c = scalar::vec_from_json(&t[2])?;
            if c.len() != dim {
                return Err(Error::Parse(format!("bracket entry {e} needs {dim} coefficients")));
            }
            bracket.value_mut(&[i, j]).clone_from_slice(&c);
        }
        Ok(LieAlgebra { dim, bracket })
    }
}

impl DiffLieAlgebra {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "dim": self.dim(),
            "weight": scalar::format(&self.weight),
            "brackets": self.algebra.brackets_json(),
            "d": self.d.to_json(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<DiffLieAlgebra> {
        let dim = v.get("dim").and_then(serde_json::Value::as_u64).ok_or_else(|| Error::Parse("missing \"dim\"".into()))? as usize;
        let weight = match v.get("weight") {
            Some(w) => scalar::from_json(w)?,
            None => Scalar::zero(),
        };
        let algebra = LieAlgebra::brackets_from_json(dim, v.get("brackets"))?;
        let d = match v.get("d") {
            Some(m) => Matrix::from_json(m, dim, dim)?,
            None => Matrix::zeros(dim, dim),
        };
        Ok(DiffLieAlgebra { algebra, d, weight })
    }
}

impl DiffRepresentation {
    /// Reads `rep_dim`/`rho`/`dV` next to a differential Lie algebra; `None` if absent.
    pub fn from_json(v: &serde_json::Value, g_dim: usize) -> Result<Option<DiffRepresentation>> {
        let Some(m) = v.get("rep_dim") else { return Ok(None) };
        let m = m.as_u64().ok_or_else(|| Error::Parse("\"rep_dim\" must be a natural number".into()))? as usize;
        let mut rho = vec![Matrix::zeros(m, m); g_dim];
        if let Some(r) = v.get("rho") {
            let obj = r.as_object().ok_or_else(|| Error::Parse("\"rho\" must be an object".into()))?;
            for (key, mat) in obj {
                let i: usize = key.parse().ok().filter(|&i: &usize| i >= 1 && i <= g_dim).ok_or_else(|| Error::Parse(format!("bad rho key {key:?}")))?;
                rho[i - 1] = Matrix::from_json(mat, m, m)?;
            }
        }
        let dv = match v.get("dV") {
            Some(d) => Matrix::from_json(d, m, m)?,
            None => Matrix::zeros(m, m),
        };
        Ok(Some(DiffRepresentation { space_dim: m, rho, dv }))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut rho = serde_json::Map::new();
        for (i, r) in self.rho.iter().enumerate() {
            if !r.is_zero() {
                rho.insert((i + 1).to_string(), r.to_json());
            }
        }
        serde_json::json!({ "rep_dim": self.space_dim, "rho": rho, "dV": self.dv.to_json() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    fn aff1(weight: Scalar) -> DiffLieAlgebra {
        let g = LieAlgebra::from_constants(2, &[(0, 1, vec![int(0), int(1)])]);
        DiffLieAlgebra::new(g, Matrix::diagonal(&[int(0), int(1)]), weight)
    }

    #[test]
    fn aff1_is_differential_for_every_weight() {
        for w in [int(0), int(1), int(-1), int(2), scalar::frac(1, 2)] {
            assert!(aff1(w).is_valid());
        }
    }

    #[test]
    fn identity_has_weight_minus_one() {
        let g = aff1(int(0)).algebra;
        let a = DiffLieAlgebra::new(g, Matrix::identity(2), int(-1));
        assert!(residuals_vanish(&a.weighted_derivation_residual()));
        let r = rho_lambda(&adjoint_rep(&a), &a);
        assert!(r.rho.iter().all(Matrix::is_zero));
    }

    #[test]
    fn jacobi_detects_failure() {
        let g = LieAlgebra::from_constants(3, &[(0, 1, vec![int(1), int(0), int(0)]), (0, 2, vec![int(0), int(0), int(1)])]);
        let r = g.jacobi_residual();
        // [[x,y],z] + [[y,z],x] + [[z,x],y] = [x,z] + 0 + [-z, y] = z
        assert_eq!(r[0].1, vec![int(0), int(0), int(1)]);
    }

    #[test]
    fn rescale_example() {
        let a = DiffLieAlgebra::new(LieAlgebra::abelian(2), Matrix::identity(2), int(-1));
        let b = a.rescale_operator(&int(2)).unwrap();
        assert_eq!(b.weight, scalar::frac(-1, 2));
        assert_eq!(b.d, Matrix::identity(2).scale(&int(2)));
        assert!(matches!(a.rescale_operator(&int(0)), Err(Error::ZeroScale)));
    }

    #[test]
    fn trivial_extension_of_aff1_adjoint() {
        let a = aff1(int(3));
        let e = trivial_extension(&a, &adjoint_rep(&a));
        assert_eq!(e.dim(), 4);
        assert!(e.is_valid());
    }

    #[test]
    fn json_round_trip() {
        let a = aff1(scalar::frac(1, 3));
        assert_eq!(DiffLieAlgebra::from_json(&a.to_json()).unwrap(), a);
    }
}
