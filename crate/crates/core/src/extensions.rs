//! Abelian extensions `0 → V → ĝ → g → 0` of differential Lie algebras,
//! their 2-cocycles, and equivalences `ζ = Id + φ`.

use num_traits::One;

use crate::cohomology::{self, CocyclePair};
use crate::error::{Error, Result};
use crate::lie::{DiffLieAlgebra, DiffRepresentation, LieAlgebra};
use crate::linalg::{self, Matrix};
use crate::multilinear::AltMap;
use crate::scalar::{self, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianExtension {
    pub base: DiffLieAlgebra,
    pub total: DiffLieAlgebra,
    /// `V → ĝ`.
    pub i: Matrix,
    /// `ĝ → g`.
    pub p: Matrix,
    /// Section `g → ĝ` with `p∘s = Id`.
    pub s: Matrix,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidExtension(msg.into())
}

impl AbelianExtension {
    pub fn g_dim(&self) -> usize {
        self.base.dim()
    }

    pub fn v_dim(&self) -> usize {
        self.i.cols
    }

    /// `[s | i]`, an isomorphism `g ⊕ V → ĝ` for a valid extension.
    pub fn splitting(&self) -> Matrix {
        let n = self.total.dim();
        let mut cols: Vec<Vec<Scalar>> = (0..self.s.cols).map(|j| self.s.column(j)).collect();
        cols.extend((0..self.i.cols).map(|j| self.i.column(j)));
        Matrix::from_columns(n, &cols)
    }

    /// `t: ĝ → V` with `t∘i = Id` and `t∘s = 0`.
    pub fn retraction(&self) -> Result<Matrix> {
        let inv = linalg::inverse(&self.splitting()).ok_or_else(|| invalid("section and inclusion do not span"))?;
        let (gd, n) = (self.g_dim(), self.total.dim());
        let rows: Vec<Vec<Scalar>> = (gd..n).map(|r| inv.row(r).to_vec()).collect();
        Ok(Matrix::from_rows(rows))
    }

    pub fn with_section(&self, s: Matrix) -> AbelianExtension {
        AbelianExtension { s, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let (gd, vd, n) = (self.g_dim(), self.v_dim(), self.total.dim());
        if n != gd + vd || (self.i.rows, self.p.rows, self.p.cols, self.s.rows, self.s.cols) != (n, gd, n, n, gd) {
            return Err(invalid("shapes do not form g ⊕ V"));
        }
        if self.total.weight != self.base.weight {
            return Err(invalid("weights differ"));
        }
        if !self.p.mul(&self.i).is_zero() {
            return Err(invalid("p∘i ≠ 0"));
        }
        if self.p.mul(&self.s) != Matrix::identity(gd) {
            return Err(invalid("p∘s ≠ Id"));
        }
        if linalg::rank(&self.i) != vd {
            return Err(invalid("i is not injective"));
        }
        if !self.total.is_valid() {
            return Err(invalid("total space is not a differential Lie algebra"));
        }
        let t = self.retraction()?;
        let back = self.i.mul(&t);
        let hat = &self.total.algebra;
        for a in 0..n {
            for b in a + 1..n {
                let lhs = self.p.apply(&hat.bracket_basis(a, b));
                let rhs = self.base.algebra.bracket_vec(&self.p.column(a), &self.p.column(b));
                if lhs != rhs {
                    return Err(invalid(format!("p is not a homomorphism on ({}, {})", a + 1, b + 1)));
                }
            }
        }
        for u in 0..vd {
            for v in u + 1..vd {
                if !scalar::is_zero_vec(&hat.bracket_vec(&self.i.column(u), &self.i.column(v))) {
                    return Err(invalid("V is not abelian"));
                }
            }
        }
        if self.p.mul(&self.total.d) != self.base.d.mul(&self.p) {
            return Err(invalid("p∘d̂ ≠ d∘p"));
        }
        let di = self.total.d.mul(&self.i);
        if back.mul(&di) != di {
            return Err(invalid("d̂ does not preserve V"));
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "base": self.base.to_json(),
            "total": self.total.to_json(),
            "i": self.i.to_json(),
            "p": self.p.to_json(),
            "s": self.s.to_json(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<AbelianExtension> {
        let get = |k: &str| v.get(k).ok_or_else(|| Error::Parse(format!("extension needs {k:?}")));
        let base = DiffLieAlgebra::from_json(get("base")?)?;
        let total = DiffLieAlgebra::from_json(get("total")?)?;
        let (gd, n) = (base.dim(), total.dim());
        if n < gd {
            return Err(Error::Parse("total space smaller than base".into()));
        }
        let vd = n - gd;
        Ok(AbelianExtension {
            base,
            total,
            i: Matrix::from_json(get("i")?, n, vd)?,
            p: Matrix::from_json(get("p")?, gd, n)?,
            s: Matrix::from_json(get("s")?, n, gd)?,
        })
    }
}

/// `[x+u, y+v] = [x,y] + ρ(x)v − ρ(y)u + ψ(x,y)`, `d(x+v) = dx + χ(x) + d_V v` on g ⊕ V.
pub fn build_extension_unchecked(a: &DiffLieAlgebra, rep: &DiffRepresentation, psi: &AltMap, chi: &AltMap) -> AbelianExtension {
    let (n, m) = (a.dim(), rep.space_dim);
    let total = n + m;
    let mut bracket = AltMap::zero(2, total, total);
    for i in 0..n {
        for j in i + 1..n {
            let slot = bracket.value_mut(&[i, j]);
            slot[..n].clone_from_slice(&a.algebra.bracket_basis(i, j));
            slot[n..].clone_from_slice(psi.value(&[i, j]));
        }
        for u in 0..m {
            bracket.value_mut(&[i, n + u])[n..].clone_from_slice(&rep.rho[i].column(u));
        }
    }
    let mut chi_m = Matrix::zeros(m, n);
    for j in 0..n {
        chi_m.set_column(j, chi.value(&[j]));
    }
    let d = Matrix::block(&a.d, &Matrix::zeros(n, m), &chi_m, &rep.dv);
    let mut inc = Matrix::zeros(total, m);
    for u in 0..m {
        inc.set(n + u, u, Scalar::one());
    }
    let mut proj = Matrix::zeros(n, total);
    for x in 0..n {
        proj.set(x, x, Scalar::one());
    }
    AbelianExtension {
        base: a.clone(),
        total: DiffLieAlgebra { algebra: LieAlgebra { dim: total, bracket }, d, weight: a.weight.clone() },
        i: inc,
        p: proj.clone(),
        s: proj.transpose(),
    }
}

/// The split extension attached to a 2-cocycle.
pub fn build_extension(a: &DiffLieAlgebra, rep: &DiffRepresentation, psi: &AltMap, chi: &AltMap) -> Result<AbelianExtension> {
    if psi.arity != 2 || chi.arity != 1 {
        return Err(Error::ArityMismatch { expected: 2, got: psi.arity });
    }
    let pair = CocyclePair { f: psi.clone(), g: chi.clone() };
    let res = cohomology::cocycle_residual(a, rep, &pair)?;
    if !res.is_zero() {
        return Err(Error::NotCocycle { mc_residual: res.f.coeffs, dc_residual: res.g.coeffs });
    }
    Ok(build_extension_unchecked(a, rep, psi, chi))
}

/// `ρ(x)v = t[s(x), i(v)]`, `d_V = t d̂ i`, `ψ(x,y) = t([sx,sy] − s[x,y])`, `χ(x) = t(d̂ s x − s d x)`.
pub fn extract_cocycle(e: &AbelianExtension) -> Result<(DiffRepresentation, CocyclePair)> {
    e.validate()?;
    let (n, m) = (e.g_dim(), e.v_dim());
    let t = e.retraction()?;
    let hat = &e.total.algebra;
    let sx: Vec<Vec<Scalar>> = (0..n).map(|j| e.s.column(j)).collect();
    let iv: Vec<Vec<Scalar>> = (0..m).map(|j| e.i.column(j)).collect();
    let rho: Vec<Matrix> = sx
        .iter()
        .map(|x| {
            let cols: Vec<Vec<Scalar>> = iv.iter().map(|v| t.apply(&hat.bracket_vec(x, v))).collect();
            Matrix::from_columns(m, &cols)
        })
        .collect();
    let dv = t.mul(&e.total.d).mul(&e.i);
    let mut psi = AltMap::zero(2, n, m);
    for i in 0..n {
        for j in i + 1..n {
            let mut w = hat.bracket_vec(&sx[i], &sx[j]);
            w = scalar::sub(&w, &e.s.apply(&e.base.algebra.bracket_basis(i, j)));
            psi.value_mut(&[i, j]).clone_from_slice(&t.apply(&w));
        }
    }
    let mut chi = AltMap::zero(1, n, m);
    for j in 0..n {
        let w = scalar::sub(&e.total.d.apply(&sx[j]), &e.s.apply(&e.base.d.column(j)));
        chi.value_mut(&[j]).clone_from_slice(&t.apply(&w));
    }
    Ok((DiffRepresentation { space_dim: m, rho, dv }, CocyclePair { f: psi, g: chi }))
}

/// `ζ(s₁x + i₁v) = s₂x + i₂(φx + v)` as a map `ĝ₁ → ĝ₂`; `φ` is `dim V × dim g`.
pub fn zeta(e1: &AbelianExtension, e2: &AbelianExtension, phi: &Matrix) -> Option<Matrix> {
    let inv = linalg::inverse(&e1.splitting())?;
    let img = e2.s.add(&e2.i.mul(phi));
    let n = e2.total.dim();
    let mut cols: Vec<Vec<Scalar>> = (0..img.cols).map(|j| img.column(j)).collect();
    cols.extend((0..e2.i.cols).map(|j| e2.i.column(j)));
    Some(Matrix::from_columns(n, &cols).mul(&inv))
}

/// Whether `ζ = Id + φ` is an isomorphism of differential Lie algebras commuting with `i` and `p`.
pub fn equivalence_witness(e1: &AbelianExtension, e2: &AbelianExtension, phi: &Matrix) -> bool {
    if e1.base != e2.base || e1.total.dim() != e2.total.dim() || (phi.rows, phi.cols) != (e2.v_dim(), e2.g_dim()) {
        return false;
    }
    let Some(z) = zeta(e1, e2, phi) else { return false };
    if linalg::inverse(&z).is_none() || z.mul(&e1.i) != e2.i || e2.p.mul(&z) != e1.p {
        return false;
    }
    if z.mul(&e1.total.d) != e2.total.d.mul(&z) {
        return false;
    }
    let n = e1.total.dim();
    (0..n).all(|a| {
        (a + 1..n).all(|b| {
            let lhs = z.apply(&e1.total.algebra.bracket_basis(a, b));
            lhs == e2.total.algebra.bracket_vec(&z.column(a), &z.column(b))
        })
    })
}

/// Solves `∂¹φ = (ψ₁−ψ₂, χ₁−χ₂)`; `Some(φ)` is an equivalence witness.
pub fn find_witness(e1: &AbelianExtension, e2: &AbelianExtension) -> Result<Option<Matrix>> {
    let (r1, c1) = extract_cocycle(e1)?;
    let (r2, c2) = extract_cocycle(e2)?;
    if r1 != r2 || e1.base != e2.base {
        return Ok(None);
    }
    Ok(cohomology::coboundary_preimage(&e1.base, &r1, &c1.sub(&c2)).map(|phi| phi.to_matrix()))
}

/// `dim H̃²_DiffLie(g, V)`.
pub fn classify(a: &DiffLieAlgebra, rep: &DiffRepresentation) -> Result<usize> {
    let d2 = cohomology::tilde_differential(a, rep, 2);
    let d1 = cohomology::tilde_differential(a, rep, 1);
    linalg::homology_dim(&d2, &d1, 2)
}

/// A section differing from the given one by `i∘φ`.
pub fn shifted_section(e: &AbelianExtension, phi: &Matrix) -> Matrix {
    e.s.add(&e.i.mul(phi))
}

pub fn is_split(e: &AbelianExtension) -> Result<bool> {
    let (_, c) = extract_cocycle(e)?;
    Ok(c.is_zero())
}
