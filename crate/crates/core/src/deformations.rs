//! Truncated one-parameter formal deformations `μ_t = Σ μ_i tⁱ`, `d_t = Σ d_i tⁱ`
//! over `k[t]/(t^{N+1})`.

use num_traits::One;

use crate::catalog;
use crate::cohomology::{self, CocyclePair};
use crate::error::{Error, Result};
use crate::lie::{adjoint_rep, unit, DiffLieAlgebra};
use crate::linalg::{self, Matrix};
use crate::multilinear::AltMap;
use crate::par;
use crate::scalar::{self, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedDeformation {
    pub base: DiffLieAlgebra,
    pub order: usize,
    pub mu: Vec<AltMap>,
    pub d: Vec<Matrix>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalIso {
    pub order: usize,
    pub phi: Vec<Matrix>,
}

/// Residuals of the order-`n` equations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderResidual {
    pub order: usize,
    /// `Σ_{i+j=n} μ_i(μ_j(x,y),z) + cyclic`, over basis triples.
    pub jacobi: Vec<Scalar>,
    /// `Σ d_l μ_k − Σ μ_k(d_l x, y) − Σ μ_k(x, d_l y) − λ Σ μ_k(d_l x, d_m y)`, over basis pairs.
    pub operator: Vec<Scalar>,
}

impl OrderResidual {
    pub fn is_zero(&self) -> bool {
        scalar::is_zero_vec(&self.jacobi) && scalar::is_zero_vec(&self.operator)
    }

    pub fn flat(&self) -> Vec<Scalar> {
        let mut v = self.jacobi.clone();
        v.extend(self.operator.iter().cloned());
        v
    }
}

fn bracket(mu: &AltMap, x: &[Scalar], y: &[Scalar]) -> Vec<Scalar> {
    let mut out = scalar::zeros(mu.tgt_dim);
    mu.eval_into(&[x, y], &Scalar::one(), &mut out);
    out
}

impl TruncatedDeformation {
    /// `μ_i = δ_{i0} μ`, `d_i = δ_{i0} d`.
    pub fn constant(base: &DiffLieAlgebra, order: usize) -> Self {
        let n = base.dim();
        let mut mu = vec![AltMap::zero(2, n, n); order + 1];
        let mut d = vec![Matrix::zeros(n, n); order + 1];
        mu[0] = base.algebra.bracket.clone();
        d[0] = base.d.clone();
        TruncatedDeformation { base: base.clone(), order, mu, d }
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn check_shape(&self) -> Result<()> {
        let n = self.dim();
        if self.mu.len() != self.order + 1 || self.d.len() != self.order + 1 {
            return Err(Error::LengthMismatch(self.mu.len(), self.order + 1));
        }
        if self.mu.iter().any(|m| (m.arity, m.src_dim, m.tgt_dim) != (2, n, n)) || self.d.iter().any(|m| (m.rows, m.cols) != (n, n)) {
            return Err(Error::DimensionMismatch("deformation terms do not match the base".into()));
        }
        if self.mu[0] != self.base.algebra.bracket || self.d[0] != self.base.d {
            return Err(Error::Invalid("order-0 terms differ from the base".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "base": self.base.to_json(),
            "order": self.order,
            "mu": self.mu.iter().map(AltMap::to_json).collect::<Vec<_>>(),
            "d": self.d.iter().map(Matrix::to_json).collect::<Vec<_>>(),
        })
    }

    /// Reads `{"base", "order", "mu", "d"}`; missing higher terms are zero, `μ₀`, `d₀` come from the base.
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let base = DiffLieAlgebra::from_json(v.get("base").ok_or_else(|| Error::Parse("deformation needs \"base\"".into()))?)?;
        let order = v.get("order").and_then(serde_json::Value::as_u64).ok_or_else(|| Error::Parse("deformation needs \"order\"".into()))? as usize;
        let n = base.dim();
        let mut out = TruncatedDeformation::constant(&base, order);
        let arr = |k: &str| -> Result<Vec<serde_json::Value>> {
            match v.get(k) {
                None => Ok(Vec::new()),
                Some(a) => a.as_array().cloned().ok_or_else(|| Error::Parse(format!("{k:?} must be an array"))),
            }
        };
        let mus = arr("mu")?;
        let ds = arr("d")?;
        if mus.len() > order + 1 || ds.len() > order + 1 {
            return Err(Error::Parse("more terms than the order allows".into()));
        }
        for (i, m) in mus.iter().enumerate() {
            out.mu[i] = AltMap::from_json(m, n, n)?;
        }
        for (i, m) in ds.iter().enumerate() {
            out.d[i] = Matrix::from_json(m, n, n)?;
        }
        Ok(out)
    }
}

/// Residuals for every order `0 ≤ n ≤ N`.
pub fn deformation_residuals(def: &TruncatedDeformation) -> Vec<OrderResidual> {
    par::map_range(def.order + 1, |n| order_residual(def, n))
}

pub fn order_residual(def: &TruncatedDeformation, n: usize) -> OrderResidual {
    let dim = def.dim();
    let lam = &def.base.weight;
    let mut jacobi = Vec::new();
    for a in 0..dim {
        for b in a + 1..dim {
            for c in b + 1..dim {
                let (x, y, z) = (unit(dim, a), unit(dim, b), unit(dim, c));
                let mut r = scalar::zeros(dim);
                for i in 0..=n {
                    let (mi, mj) = (&def.mu[i], &def.mu[n - i]);
                    for (p, q, s) in [(&x, &y, &z), (&y, &z, &x), (&z, &x, &y)] {
                        r = scalar::add(&r, &bracket(mi, &bracket(mj, p, q), s));
                    }
                }
                jacobi.extend(r);
            }
        }
    }
    let mut operator = Vec::new();
    for a in 0..dim {
        for b in a + 1..dim {
            let (x, y) = (unit(dim, a), unit(dim, b));
            let mut r = scalar::zeros(dim);
            for k in 0..=n {
                let l = n - k;
                let mk = &def.mu[k];
                let dl = &def.d[l];
                r = scalar::add(&r, &dl.apply(&bracket(mk, &x, &y)));
                r = scalar::sub(&r, &bracket(mk, &dl.column(a), &y));
                r = scalar::sub(&r, &bracket(mk, &x, &dl.column(b)));
                for m in 0..=l {
                    let t = bracket(mk, &def.d[m].column(a), &def.d[l - m].column(b));
                    scalar::add_scaled(&mut r, &-lam.clone(), &t);
                }
            }
            operator.extend(r);
        }
    }
    OrderResidual { order: n, jacobi, operator }
}

pub fn is_deformation(def: &TruncatedDeformation) -> bool {
    deformation_residuals(def).iter().all(OrderResidual::is_zero)
}

/// `(μ₁, d₁)`, a 2-cocycle with adjoint coefficients when the order-1 equations hold.
pub fn infinitesimal(def: &TruncatedDeformation) -> Result<CocyclePair> {
    def.check_shape()?;
    if def.order < 1 {
        return Err(Error::NotDeformation(1));
    }
    if !(0..=1).all(|n| order_residual(def, n).is_zero()) {
        return Err(Error::NotDeformation(1));
    }
    Ok(CocyclePair { f: def.mu[1].clone(), g: AltMap::from_matrix(&def.d[1]) })
}

impl FormalIso {
    pub fn identity(n: usize, order: usize) -> Self {
        let mut phi = vec![Matrix::zeros(n, n); order + 1];
        phi[0] = Matrix::identity(n);
        FormalIso { order, phi }
    }

    /// `Id + φ tᵏ`.
    pub fn single(n: usize, order: usize, k: usize, phi_k: Matrix) -> Self {
        let mut f = FormalIso::identity(n, order);
        if k <= order {
            f.phi[k] = phi_k;
        }
        f
    }

    /// `ψ₀ = Id`, `ψ_k = −Σ_{j=1}^k φ_j ψ_{k−j}`.
    pub fn inverse(&self) -> FormalIso {
        let n = self.phi[0].rows;
        let mut psi = vec![Matrix::identity(n)];
        for k in 1..=self.order {
            let mut acc = Matrix::zeros(n, n);
            for j in 1..=k {
                acc = acc.sub(&self.phi[j].mul(&psi[k - j]));
            }
            psi.push(acc);
        }
        FormalIso { order: self.order, phi: psi }
    }

    pub fn compose(&self, other: &FormalIso) -> FormalIso {
        let n = self.phi[0].rows;
        let phi = (0..=self.order)
            .map(|k| (0..=k).fold(Matrix::zeros(n, n), |acc, j| acc.add(&self.phi[j].mul(&other.phi[k - j]))))
            .collect();
        FormalIso { order: self.order, phi }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "order": self.order, "phi": self.phi.iter().map(Matrix::to_json).collect::<Vec<_>>() })
    }
}

/// `μ̄_t = Φ_t⁻¹ μ_t(Φ_t × Φ_t)`, `d̄_t = Φ_t⁻¹ d_t Φ_t`, truncated at `N`.
pub fn apply_formal_iso(def: &TruncatedDeformation, iso: &FormalIso) -> Result<TruncatedDeformation> {
    if iso.order != def.order || iso.phi.len() != def.order + 1 {
        return Err(Error::LengthMismatch(iso.order, def.order));
    }
    let n = def.dim();
    if iso.phi[0] != Matrix::identity(n) {
        return Err(Error::Invalid("formal isomorphism must start with the identity".into()));
    }
    let psi = iso.inverse();
    let big = def.order;
    let mu: Vec<AltMap> = par::map_range(big + 1, |k| {
        let mut out = AltMap::zero(2, n, n);
        for t in out.tuples() {
            let (x, y) = (t[0], t[1]);
            let mut acc = scalar::zeros(n);
            for a in 0..=k {
                for b in 0..=k - a {
                    for c in 0..=k - a - b {
                        let e = k - a - b - c;
                        if def.mu[b].is_zero() {
                            continue;
                        }
                        let inner = bracket(&def.mu[b], &iso.phi[c].column(x), &iso.phi[e].column(y));
                        acc = scalar::add(&acc, &psi.phi[a].apply(&inner));
                    }
                }
            }
            out.value_mut(&t).clone_from_slice(&acc);
        }
        out
    });
    let d: Vec<Matrix> = (0..=big)
        .map(|k| {
            let mut acc = Matrix::zeros(n, n);
            for a in 0..=k {
                for b in 0..=k - a {
                    acc = acc.add(&psi.phi[a].mul(&def.d[b]).mul(&iso.phi[k - a - b]));
                }
            }
            acc
        })
        .collect();
    Ok(TruncatedDeformation { base: def.base.clone(), order: def.order, mu, d })
}

/// The deformation equivalent to the constant one through `(Id + φ₁t)⁻¹`; its infinitesimal is `−∂¹φ₁`.
pub fn coboundary_deformation(base: &DiffLieAlgebra, order: usize, phi1: &Matrix) -> Result<TruncatedDeformation> {
    let iso = FormalIso::single(base.dim(), order, 1, phi1.clone()).inverse();
    apply_formal_iso(&TruncatedDeformation::constant(base, order), &iso)
}

/// Solves the order-`k` equations for `(μ_k, d_k)` given the lower orders; `None` if obstructed.
pub fn complete_order(def: &TruncatedDeformation, k: usize, choice: &[Scalar]) -> Option<TruncatedDeformation> {
    let n = def.dim();
    let mut base = def.clone();
    base.mu[k] = AltMap::zero(2, n, n);
    base.d[k] = Matrix::zeros(n, n);
    let r0 = order_residual(&base, k).flat();
    let unknowns = base.mu[k].len() + n * n;
    let cols: Vec<Vec<Scalar>> = par::map_range(unknowns, |j| {
        let mut t = base.clone();
        set_unknowns(&mut t, k, &unit(unknowns, j));
        scalar::sub(&order_residual(&t, k).flat(), &r0)
    });
    let m = Matrix::from_columns(r0.len(), &cols);
    let rhs: Vec<Scalar> = r0.iter().map(|x| -x.clone()).collect();
    let part = linalg::solve(&m, &rhs)?;
    let mut x = part;
    for (c, z) in choice.iter().zip(linalg::kernel_basis(&m)) {
        scalar::add_scaled(&mut x, c, &z);
    }
    let mut out = base;
    set_unknowns(&mut out, k, &x);
    Some(out)
}

fn set_unknowns(def: &mut TruncatedDeformation, k: usize, x: &[Scalar]) {
    let n = def.dim();
    let m = def.mu[k].len();
    def.mu[k].coeffs = x[..m].to_vec();
    def.d[k] = Matrix { rows: n, cols: n, entries: x[m..].to_vec() };
}

/// Clears the lowest nonzero order `k` by `Φ = Id + φ tᵏ` with `∂¹φ = −(μ_k, d_k)`.
pub fn rigidify_step(def: &TruncatedDeformation) -> Result<(FormalIso, TruncatedDeformation)> {
    def.check_shape()?;
    if let Some(r) = deformation_residuals(def).into_iter().find(|r| !r.is_zero()) {
        return Err(Error::NotDeformation(r.order));
    }
    let n = def.dim();
    let Some(k) = (1..=def.order).find(|&k| !def.mu[k].is_zero() || !def.d[k].is_zero()) else {
        return Ok((FormalIso::identity(n, def.order), def.clone()));
    };
    let pair = CocyclePair { f: def.mu[k].clone(), g: AltMap::from_matrix(&def.d[k]) };
    let rep = adjoint_rep(&def.base);
    let Some(phi) = cohomology::coboundary_preimage(&def.base, &rep, &pair.scale(&-Scalar::one())) else {
        return Err(Error::Obstructed { order: k, class: (pair.f.coeffs, pair.g.coeffs) });
    };
    let iso = FormalIso::single(n, def.order, k, phi.to_matrix());
    let out = apply_formal_iso(def, &iso)?;
    Ok((iso, out))
}

pub fn is_constant(def: &TruncatedDeformation) -> bool {
    (1..=def.order).all(|k| def.mu[k].is_zero() && def.d[k].is_zero())
}

/// A valid order-2 deformation: a random 2-cocycle at order 1 and a random solution at order 2.
pub fn random_order2(rng: &mut impl rand::Rng, a: &DiffLieAlgebra) -> Option<TruncatedDeformation> {
    let rep = adjoint_rep(a);
    let d2 = cohomology::difflie_differential(a, &rep, 2);
    let z = catalog::random_combination(rng, &linalg::kernel_basis(&d2), d2.cols);
    let pair = CocyclePair::from_coords(2, a.dim(), a.dim(), &z);
    let mut def = TruncatedDeformation::constant(a, 2);
    def.mu[1] = pair.f;
    def.d[1] = pair.g.to_matrix();
    let choice = catalog::random_vec(rng, 40, 2);
    complete_order(&def, 2, &choice)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{self, rng};
    use crate::cohomology::difflie_apply_one;
    use num_traits::Zero;
    use rand::Rng;

    fn random_iso(r: &mut impl Rng, n: usize, order: usize) -> FormalIso {
        let mut f = FormalIso::identity(n, order);
        for k in 1..=order {
            f.phi[k] = catalog::random_matrix(r, n, n, 1);
        }
        f
    }

    #[test]
    fn constant_and_transported_deformations() {
        let mut r = rng(4);
        for _ in 0..6 {
            let lam = catalog::random_weight(&mut r);
            let a = catalog::random_diff_lie(&mut r, 3, &lam);
            let c = TruncatedDeformation::constant(&a, 2);
            assert!(is_deformation(&c));
            let iso = random_iso(&mut r, a.dim(), 2);
            let t = apply_formal_iso(&c, &iso).unwrap();
            assert!(is_deformation(&t));
            let back = apply_formal_iso(&t, &iso.inverse()).unwrap();
            assert_eq!(back, c);
        }
    }

    #[test]
    fn coboundary_infinitesimal() {
        let mut r = rng(5);
        for _ in 0..6 {
            let lam = catalog::random_weight(&mut r);
            let a = catalog::random_diff_lie(&mut r, 3, &lam);
            let phi = catalog::random_matrix(&mut r, a.dim(), a.dim(), 2);
            let def = coboundary_deformation(&a, 2, &phi).unwrap();
            let inf = infinitesimal(&def).unwrap();
            let d = difflie_apply_one(&a, &adjoint_rep(&a), &AltMap::from_matrix(&phi));
            assert_eq!(inf, d.scale(&-Scalar::one()));
            let (_, flat) = rigidify_step(&def).unwrap();
            assert!(flat.mu[1].is_zero() && flat.d[1].is_zero());
            assert!(is_deformation(&flat));
        }
    }

    #[test]
    fn order_one_cocycles() {
        let mut r = rng(6);
        for _ in 0..6 {
            let lam = catalog::random_weight(&mut r);
            let a = catalog::random_diff_lie(&mut r, 3, &lam);
            let rep = adjoint_rep(&a);
            let d2 = cohomology::difflie_differential(&a, &rep, 2);
            let z = catalog::random_combination(&mut r, &linalg::kernel_basis(&d2), d2.cols);
            let pair = CocyclePair::from_coords(2, a.dim(), a.dim(), &z);
            let mut def = TruncatedDeformation::constant(&a, 1);
            def.mu[1] = pair.f.clone();
            def.d[1] = pair.g.to_matrix();
            assert!(is_deformation(&def));
            assert_eq!(infinitesimal(&def).unwrap(), pair);
        }
    }

    #[test]
    fn rigid_fixture_trivializes() {
        let a = catalog::rigid_sl2();
        assert!(a.is_valid());
        assert_eq!(crate::extensions::classify(&a, &adjoint_rep(&a)).unwrap(), 0);
        let mut r = rng(7);
        for _ in 0..4 {
            let def = random_order2(&mut r, &a).expect("order 2 unobstructed");
            assert!(is_deformation(&def));
            let mut cur = def.clone();
            let mut total = FormalIso::identity(3, 2);
            for _ in 0..2 {
                let (iso, next) = rigidify_step(&cur).unwrap();
                total = total.compose(&iso);
                cur = next;
            }
            assert!(is_constant(&cur));
            assert_eq!(apply_formal_iso(&def, &total).unwrap(), cur);
            let (iso, same) = rigidify_step(&cur).unwrap();
            assert_eq!(iso, FormalIso::identity(3, 2));
            assert_eq!(same, cur);
        }
    }

    #[test]
    fn nontrivial_class_is_obstructed() {
        let g = catalog::aff1();
        let a = DiffLieAlgebra::new(g, Matrix::zeros(2, 2), Scalar::zero());
        let rep = adjoint_rep(&a);
        let z = cohomology::tilde_cohomology_basis(&a, &rep, 2);
        let pair = CocyclePair::from_coords(2, 2, 2, &z[0]);
        let mut def = TruncatedDeformation::constant(&a, 1);
        def.mu[1] = pair.f;
        def.d[1] = pair.g.to_matrix();
        assert!(is_deformation(&def));
        assert!(matches!(rigidify_step(&def), Err(Error::Obstructed { order: 1, .. })));
    }
}
