//! Homotopy differential Lie algebras of weight λ on a graded space `g`,
//! with structure maps on `l = sg`.

use std::collections::HashMap;

use num_traits::{One, Zero};
use rand::Rng;

use crate::catalog;
use crate::combinatorics::{block_starts, compositions, koszul_exponent, multisets, shuffles};
use crate::error::{Error, Result};
use crate::lie::{DiffLieAlgebra, DiffRepresentation};
use crate::linalg::{self, Matrix};
use crate::multilinear::{suspend_alt_to_sym, vector_degree, AltMap, GradedSymMap, GradedVectorSpace};
use crate::nr::graded_nr_bracket;
use crate::par;
use crate::scalar::{self, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomotopyDiffLie {
    /// `l = sg`.
    pub space: GradedVectorSpace,
    /// `μ_i` at index `i − 1`, of degree 1.
    pub mu: Vec<GradedSymMap>,
    /// `D_i` at index `i − 1`, of degree 0.
    pub d: Vec<GradedSymMap>,
    pub weight: Scalar,
}

fn top(maps: &[GradedSymMap]) -> usize {
    maps.iter().rposition(|m| !m.is_zero()).map_or(0, |i| i + 1)
}

impl HomotopyDiffLie {
    /// All maps zero in arities `1..=bound`.
    pub fn zero(g: &GradedVectorSpace, bound: usize, weight: Scalar) -> Self {
        let space = g.suspended();
        let degs = space.basis_degrees();
        let mu = (1..=bound).map(|k| GradedSymMap::zero(degs.clone(), k, 1)).collect();
        let d = (1..=bound).map(|k| GradedSymMap::zero(degs.clone(), k, 0)).collect();
        HomotopyDiffLie { space, mu, d, weight }
    }

    pub fn degs(&self) -> Vec<i32> {
        self.space.basis_degrees()
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// `μ_k` if present and nonzero.
    pub fn mu_of(&self, k: usize) -> Option<&GradedSymMap> {
        k.checked_sub(1).and_then(|i| self.mu.get(i)).filter(|m| !m.is_zero())
    }

    pub fn d_of(&self, k: usize) -> Option<&GradedSymMap> {
        k.checked_sub(1).and_then(|i| self.d.get(i)).filter(|m| !m.is_zero())
    }

    /// Largest arity in which a residual can be nonzero.
    pub fn residual_arity(&self) -> usize {
        let (m, d) = (top(&self.mu), top(&self.d));
        let diff = if d == 0 || m == 0 {
            0
        } else if self.weight.is_zero() {
            m + d - 1
        } else {
            m * d
        };
        (2 * m).saturating_sub(1).max(diff)
    }

    /// A differential Lie algebra placed in degree 0: `μ₂ = s∘π`, `D₁ = s∘d`.
    pub fn from_diff_lie(a: &DiffLieAlgebra) -> Self {
        let n = a.dim();
        let g = GradedVectorSpace { components: vec![(0, n)] };
        let mut h = HomotopyDiffLie::zero(&g, 2, a.weight.clone());
        h.mu[1] = suspend_alt_to_sym(&a.algebra.bracket);
        h.d[0] = suspend_alt_to_sym(&AltMap::from_matrix(&a.d));
        h
    }

    /// `g₀ ⊕ g₁ = A ⊕ V` with `[x, v] = ρ(x)v`, `[V, V] = 0` and `D₁ = d ⊕ d_V`; maps up to arity 3.
    pub fn two_term(a: &DiffLieAlgebra, rep: &DiffRepresentation) -> Self {
        let (n, m) = (a.dim(), rep.space_dim);
        let g = GradedVectorSpace { components: vec![(0, n), (1, m)] };
        let mut h = HomotopyDiffLie::zero(&g, 3, a.weight.clone());
        let pad = |v: &[Scalar], at: usize| {
            let mut out = scalar::zeros(n + m);
            out[at..at + v.len()].clone_from_slice(v);
            out
        };
        for i in 0..n {
            for j in i + 1..n {
                h.mu[1].set(&[i, j], pad(&a.algebra.bracket_basis(i, j), 0));
            }
            for k in 0..m {
                h.mu[1].set(&[i, n + k], pad(&rep.rho[i].column(k), n));
            }
            h.d[0].set(&[i], pad(&a.d.column(i), 0));
        }
        for k in 0..m {
            h.d[0].set(&[n + k], pad(&rep.dv.column(k), n));
        }
        h
    }

    pub fn to_json(&self) -> serde_json::Value {
        let g = GradedVectorSpace { components: self.space.components.iter().map(|&(d, n)| (d + 1, n)).collect() };
        serde_json::json!({
            "space": g.to_json(),
            "weight": scalar::to_json(&self.weight),
            "mu": self.mu.iter().filter(|m| !m.is_zero()).map(GradedSymMap::to_json).collect::<Vec<_>>(),
            "d": self.d.iter().filter(|m| !m.is_zero()).map(GradedSymMap::to_json).collect::<Vec<_>>(),
        })
    }

    /// `"space"` describes `g`; maps act on the basis of `l = sg` in the same order.
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let g = GradedVectorSpace::from_json(v.get("space").ok_or_else(|| Error::Parse("homotopy data needs \"space\"".into()))?)?;
        let weight = match v.get("weight") {
            Some(w) => scalar::from_json(w)?,
            None => Scalar::zero(),
        };
        let degs = g.suspended().basis_degrees();
        let read = |key: &str, degree: i32| -> Result<Vec<GradedSymMap>> {
            let Some(arr) = v.get(key) else { return Ok(Vec::new()) };
            let arr = arr.as_array().ok_or_else(|| Error::Parse(format!("{key:?} must be an array")))?;
            let mut out = Vec::new();
            for m in arr {
                let f = GradedSymMap::from_json(m, &degs)?;
                if f.degree != degree {
                    return Err(Error::DegreeMismatch(f.degree));
                }
                if f.arity == 0 {
                    return Err(Error::Parse(format!("{key:?} maps need arity ≥ 1")));
                }
                out.push(f);
            }
            Ok(out)
        };
        let mus = read("mu", 1)?;
        let ds = read("d", 0)?;
        let bound = mus.iter().chain(&ds).map(|f| f.arity).max().unwrap_or(1);
        let mut h = HomotopyDiffLie::zero(&g, bound, weight);
        for f in mus {
            let k = f.arity - 1;
            h.mu[k] = h.mu[k].add(&f);
        }
        for f in ds {
            let k = f.arity - 1;
            h.d[k] = h.d[k].add(&f);
        }
        Ok(h)
    }
}

fn arg_degrees(h: &HomotopyDiffLie, args: &[&[Scalar]]) -> Result<Vec<i32>> {
    let degs = h.degs();
    args.iter()
        .map(|a| {
            if a.len() != degs.len() {
                return Err(Error::DimensionMismatch(format!("argument of length {} in a space of dim {}", a.len(), degs.len())));
            }
            Ok(vector_degree(&degs, a)?.unwrap_or(0))
        })
        .collect()
}

/// `acc += c · Σ_σ ε(σ) f(b₁(x_σ…), …, b_k(x_σ…), x_σ(rest))` over
/// `σ ∈ Sh(|b₁|, …, |b_k|, n − Σ|b_j|)`; `pointed` keeps σ with increasing block leaders.
fn block_sum(f: &GradedSymMap, blocks: &[&GradedSymMap], args: &[&[Scalar]], arg_degs: &[i32], pointed: bool, c: &Scalar, acc: &mut [Scalar]) {
    let sizes: Vec<usize> = blocks.iter().map(|b| b.arity).collect();
    let t: usize = sizes.iter().sum();
    if t > args.len() || f.arity != blocks.len() + args.len() - t {
        return;
    }
    let mut all = sizes.clone();
    all.push(args.len() - t);
    let starts = block_starts(&sizes);
    let n = f.dim();
    let mut memo: HashMap<(usize, u64), Option<Vec<Scalar>>> = HashMap::new();
    'outer: for s in shuffles(&all) {
        if pointed && starts.windows(2).any(|w| s.images[w[0]] > s.images[w[1]]) {
            continue;
        }
        let mut inputs: Vec<&[Scalar]> = Vec::with_capacity(f.arity);
        let mut pos = 0;
        let mut keys = Vec::with_capacity(blocks.len());
        for (bi, b) in blocks.iter().enumerate() {
            let idx = &s.images[pos..pos + b.arity];
            let mask = idx.iter().fold(0u64, |m, &p| m | 1 << p);
            let key = (bi, mask);
            let v = memo.entry(key).or_insert_with(|| {
                let sub: Vec<&[Scalar]> = idx.iter().map(|&p| args[p]).collect();
                let mut v = scalar::zeros(n);
                b.eval_into(&sub, &Scalar::one(), &mut v);
                (!scalar::is_zero_vec(&v)).then_some(v)
            });
            if v.is_none() {
                continue 'outer;
            }
            keys.push(key);
            pos += b.arity;
        }
        for k in &keys {
            inputs.push(memo[k].as_deref().expect("nonzero block"));
        }
        let eps = scalar::sign(koszul_exponent(&s.images, arg_degs));
        let mut refs = inputs;
        refs.extend(s.images[t..].iter().map(|&p| args[p]));
        f.eval_into(&refs, &(c * eps), acc);
    }
}

/// `Σ_{i=1}^n Σ_{σ∈Sh(i,n−i)} ε(σ) μ_{n−i+1}(μ_i(x_σ(1..i)), x_σ(i+1..n))`.
pub fn linfty_residual(h: &HomotopyDiffLie, args: &[&[Scalar]]) -> Result<Vec<Scalar>> {
    let ad = arg_degrees(h, args)?;
    let n = args.len();
    let mut acc = scalar::zeros(h.dim());
    for i in 1..=n {
        if let (Some(inner), Some(outer)) = (h.mu_of(i), h.mu_of(n - i + 1)) {
            block_sum(outer, &[inner], args, &ad, false, &Scalar::one(), &mut acc);
        }
    }
    Ok(acc)
}

fn d_after_mu(h: &HomotopyDiffLie, args: &[&[Scalar]], ad: &[i32], acc: &mut [Scalar]) {
    let n = args.len();
    for j in 1..=n {
        if let (Some(inner), Some(outer)) = (h.mu_of(j), h.d_of(n - j + 1)) {
            block_sum(outer, &[inner], args, ad, false, &-Scalar::one(), acc);
        }
    }
}

fn mu_after_d(h: &HomotopyDiffLie, args: &[&[Scalar]], ad: &[i32], pointed: bool, acc: &mut [Scalar]) {
    let n = args.len();
    for p in 2..=n + 1 {
        if p > 2 && h.weight.is_zero() {
            break;
        }
        let mut c = scalar::pow(&h.weight, p - 2);
        if !pointed {
            c /= scalar::factorial(p - 1);
        }
        for t in p - 1..=n {
            let Some(outer) = h.mu_of(n - t + p - 1) else { continue };
            for comp in compositions(t, p - 1) {
                let Some(blocks) = comp.iter().map(|&m| h.d_of(m)).collect::<Option<Vec<_>>>() else { continue };
                block_sum(outer, &blocks, args, ad, pointed, &c, acc);
            }
        }
    }
}

/// The homotopy operator identity with pointed inner shuffles:
/// `Σ_{p≥2} λ^{p−2} μ(D…, D…, x…) − Σ_j D_{n−j+1}(μ_j(…), …)`.
pub fn homotopy_diff_residual(h: &HomotopyDiffLie, args: &[&[Scalar]]) -> Result<Vec<Scalar>> {
    let ad = arg_degrees(h, args)?;
    let mut acc = scalar::zeros(h.dim());
    mu_after_d(h, args, &ad, true, &mut acc);
    d_after_mu(h, args, &ad, &mut acc);
    Ok(acc)
}

/// Same identity expanded over all ordered compositions and full shuffles, weighted by `1/(p−1)!`.
pub fn homotopy_diff_residual_factorial(h: &HomotopyDiffLie, args: &[&[Scalar]]) -> Result<Vec<Scalar>> {
    let ad = arg_degrees(h, args)?;
    let mut acc = scalar::zeros(h.dim());
    mu_after_d(h, args, &ad, false, &mut acc);
    d_after_mu(h, args, &ad, &mut acc);
    Ok(acc)
}

fn ev(f: Option<&GradedSymMap>, args: &[&[Scalar]], n: usize) -> Vec<Scalar> {
    let mut out = scalar::zeros(n);
    if let Some(f) = f {
        f.eval_into(args, &Scalar::one(), &mut out);
    }
    out
}

/// `μ₁D₁x − D₁μ₁x`.
pub fn example_n1(h: &HomotopyDiffLie, x: &[Scalar]) -> Result<Vec<Scalar>> {
    arg_degrees(h, &[x])?;
    let n = h.dim();
    let (m1, d1) = (h.mu_of(1), h.d_of(1));
    Ok(scalar::sub(&ev(m1, &[&ev(d1, &[x], n)], n), &ev(d1, &[&ev(m1, &[x], n)], n)))
}

/// `D₁μ₂(x,y) − μ₂(D₁x,y) − μ₂(x,D₁y) − λμ₂(D₁x,D₁y) − (μ₁D₂(x,y) − D₂(μ₁x,y) − (−1)^{|x|}D₂(x,μ₁y))`.
pub fn example_n2(h: &HomotopyDiffLie, x: &[Scalar], y: &[Scalar]) -> Result<Vec<Scalar>> {
    let ad = arg_degrees(h, &[x, y])?;
    let n = h.dim();
    let (m1, m2, d1, d2) = (h.mu_of(1), h.mu_of(2), h.d_of(1), h.d_of(2));
    let dx = ev(d1, &[x], n);
    let dy = ev(d1, &[y], n);
    let mut lhs = ev(d1, &[&ev(m2, &[x, y], n)], n);
    lhs = scalar::sub(&lhs, &ev(m2, &[&dx, y], n));
    lhs = scalar::sub(&lhs, &ev(m2, &[x, &dy], n));
    scalar::add_scaled(&mut lhs, &-h.weight.clone(), &ev(m2, &[&dx, &dy], n));
    let mut rhs = ev(m1, &[&ev(d2, &[x, y], n)], n);
    rhs = scalar::sub(&rhs, &ev(d2, &[&ev(m1, &[x], n), y], n));
    scalar::add_scaled(&mut rhs, &-scalar::sign(ad[0] as i64), &ev(d2, &[x, &ev(m1, &[y], n)], n));
    Ok(scalar::sub(&lhs, &rhs))
}

/// Components of the MC residual of `(sμ, D)`, indexed by arity − 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct McMaps {
    /// `−½[μ,μ]_NR` (degree 2).
    pub m_part: Vec<GradedSymMap>,
    /// `Σ_{p≥2} 1/(p−1)! l_p(sμ, D, …, D)` (degree 1).
    pub a_part: Vec<GradedSymMap>,
}

impl McMaps {
    pub fn is_zero(&self) -> bool {
        self.m_part.iter().chain(&self.a_part).all(GradedSymMap::is_zero)
    }

    pub fn flat(&self) -> Vec<Scalar> {
        let mut out = Vec::new();
        for f in self.m_part.iter().chain(&self.a_part) {
            for t in GradedSymMap::support_tuples(&f.degs, f.arity, f.degree) {
                out.extend(f.on_basis(&t).unwrap_or_else(|| scalar::zeros(f.dim())));
            }
        }
        out
    }
}

/// `l_p(sf, ξ₁, …, ξ_{p−1})` for `p ≥ 3` and degree-0 `ξ_j`, without the λ factor: the sum over
/// `τ ∈ Sh(|ξ_{p−1}|, …, |ξ₁|, rest)` of `ε(τ) f(ξ_{p−1} ⊗ … ⊗ ξ₁ ⊗ Id)τ⁻¹`.
pub fn graded_closed_form(f: &GradedSymMap, xis: &[&GradedSymMap]) -> Result<GradedSymMap> {
    if let Some(x) = xis.iter().find(|x| x.degree != 0) {
        return Err(Error::DegreeMismatch(x.degree));
    }
    if xis.len() > f.arity || xis.iter().any(|x| x.arity == 0) {
        return Err(Error::ArityMismatch { expected: f.arity, got: xis.len() });
    }
    let degs = &f.degs;
    let out_arity = f.arity - xis.len() + xis.iter().map(|x| x.arity).sum::<usize>();
    let mut out = GradedSymMap::zero(degs.clone(), out_arity, f.degree);
    if f.is_zero() || xis.iter().any(|x| x.is_zero()) {
        return Ok(out);
    }
    let blocks: Vec<&GradedSymMap> = xis.iter().rev().copied().collect();
    let tuples = GradedSymMap::support_tuples(degs, out_arity, f.degree);
    let vals = par::map_slice(&tuples, |t| {
        let units: Vec<Vec<Scalar>> = t.iter().map(|&i| crate::lie::unit(degs.len(), i)).collect();
        let args: Vec<&[Scalar]> = units.iter().map(Vec::as_slice).collect();
        let tdegs: Vec<i32> = t.iter().map(|&i| degs[i]).collect();
        let mut acc = scalar::zeros(degs.len());
        block_sum(f, &blocks, &args, &tdegs, false, &Scalar::one(), &mut acc);
        acc
    });
    for (t, v) in tuples.iter().zip(vals) {
        out.add_on_basis(t, &Scalar::one(), &v);
    }
    Ok(out)
}

fn ordered_tuples(len: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out.into_iter().flat_map(|v| (1..=max).map(move |k| [v.clone(), vec![k]].concat())).collect();
    }
    out
}

/// The MC residual of `(sμ, D)` in the graded absolute structure, up to `cap`.
pub fn mc_maps_capped(h: &HomotopyDiffLie, cap: usize) -> Result<McMaps> {
    let degs = h.degs();
    let mut m_part: Vec<GradedSymMap> = (1..=cap).map(|k| GradedSymMap::zero(degs.clone(), k, 2)).collect();
    let mut a_part: Vec<GradedSymMap> = (1..=cap).map(|k| GradedSymMap::zero(degs.clone(), k, 1)).collect();
    let half = -Scalar::new(1.into(), 2.into());
    let put = |parts: &mut Vec<GradedSymMap>, c: &Scalar, f: &GradedSymMap| {
        if f.arity >= 1 && f.arity <= cap {
            parts[f.arity - 1].add_assign_scaled(c, f);
        }
    };
    for i in 1..=h.mu.len() {
        let Some(mi) = h.mu_of(i) else { continue };
        for j in 1..=h.mu.len() {
            if let Some(mj) = h.mu_of(j) {
                put(&mut m_part, &half, &graded_nr_bracket(mi, mj)?);
            }
        }
        for j in 1..=h.d.len() {
            if let Some(dj) = h.d_of(j) {
                put(&mut a_part, &Scalar::one(), &graded_nr_bracket(mi, dj)?);
            }
        }
        if h.weight.is_zero() {
            continue;
        }
        for p in 3..=i + 1 {
            let c = scalar::pow(&h.weight, p - 2) / scalar::factorial(p - 1);
            for ms in ordered_tuples(p - 1, h.d.len()) {
                let Some(xis) = ms.iter().map(|&m| h.d_of(m)).collect::<Option<Vec<_>>>() else { continue };
                put(&mut a_part, &c, &graded_closed_form(mi, &xis)?);
            }
        }
    }
    Ok(McMaps { m_part, a_part })
}

pub fn mc_maps(h: &HomotopyDiffLie) -> Result<McMaps> {
    mc_maps_capped(h, h.residual_arity())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomotopyReport {
    /// The MC residual vanishes.
    pub maurer_cartan: bool,
    pub linfty_ok: bool,
    pub diff_ok: bool,
    /// The MC components equal `−linfty_residual` and `homotopy_diff_residual` on every basis tuple,
    /// and the pointed and factorial forms coincide.
    pub forms_agree: bool,
    /// First basis tuple with a nonzero residual, and which family.
    pub first_failure: Option<(String, Vec<usize>, Vec<Scalar>)>,
}

impl HomotopyReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "maurer_cartan": self.maurer_cartan,
            "linfty_ok": self.linfty_ok,
            "diff_ok": self.diff_ok,
            "forms_agree": self.forms_agree,
            "first_failure": self.first_failure.as_ref().map(|(k, t, v)| serde_json::json!({
                "family": k,
                "tuple": t.iter().map(|i| i + 1).collect::<Vec<_>>(),
                "residual": scalar::vec_to_json(v),
            })),
        })
    }
}

/// Basis tuples spanning `S^{≤cap}(l)`: weakly increasing, no repeated odd vector.
pub fn basis_tuples(degs: &[i32], cap: usize) -> Vec<Vec<usize>> {
    (1..=cap)
        .flat_map(|k| multisets(degs.len(), k))
        .filter(|t| !t.windows(2).any(|w| w[0] == w[1] && degs[w[0]].rem_euclid(2) == 1))
        .collect()
}

pub fn homotopy_mc_check(h: &HomotopyDiffLie) -> Result<HomotopyReport> {
    let cap = h.residual_arity();
    let maps = mc_maps_capped(h, cap)?;
    let degs = h.degs();
    let tuples = basis_tuples(&degs, cap);
    let rows = par::map_slice(&tuples, |t| -> Result<_> {
        let units: Vec<Vec<Scalar>> = t.iter().map(|&i| crate::lie::unit(degs.len(), i)).collect();
        let args: Vec<&[Scalar]> = units.iter().map(Vec::as_slice).collect();
        let zero = || scalar::zeros(degs.len());
        let sum: i32 = t.iter().map(|&i| degs[i]).sum();
        let lands = |d: i32| degs.contains(&(sum + d));
        let l = if lands(2) { linfty_residual(h, &args)? } else { zero() };
        let (dp, df) = if lands(1) { (homotopy_diff_residual(h, &args)?, homotopy_diff_residual_factorial(h, &args)?) } else { (zero(), zero()) };
        let k = t.len() - 1;
        let mp = maps.m_part[k].on_basis(t).unwrap_or_else(zero);
        let ap = maps.a_part[k].on_basis(t).unwrap_or_else(zero);
        let agree = scalar::add(&l, &mp).iter().all(Zero::is_zero) && dp == ap && dp == df;
        Ok((l, dp, agree))
    });
    let mut report = HomotopyReport { maurer_cartan: maps.is_zero(), linfty_ok: true, diff_ok: true, forms_agree: true, first_failure: None };
    for (t, row) in tuples.iter().zip(rows) {
        let (l, dp, agree) = row?;
        report.forms_agree &= agree;
        for (name, v, ok) in [("linfty", l, &mut report.linfty_ok), ("homotopy_diff", dp, &mut report.diff_ok)] {
            if !scalar::is_zero_vec(&v) {
                *ok = false;
                if report.first_failure.is_none() {
                    report.first_failure = Some((name.to_string(), t.clone(), v));
                }
            }
        }
    }
    Ok(report)
}

/// Which structure map a coordinate belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Mu,
    D,
}

/// One coordinate: `f_arity(e_tuple)` in direction `e_out`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slot {
    pub family: Family,
    pub arity: usize,
    pub tuple: Vec<usize>,
    pub out: usize,
}

pub fn slots(h: &HomotopyDiffLie, family: Family, arity: usize) -> Vec<Slot> {
    let degs = h.degs();
    let degree = if family == Family::Mu { 1 } else { 0 };
    GradedSymMap::support_tuples(&degs, arity, degree)
        .into_iter()
        .flat_map(|t| {
            let od = t.iter().map(|&i| degs[i]).sum::<i32>() + degree;
            let degs = &degs;
            (0..degs.len()).filter(move |&k| degs[k] == od).map(move |k| Slot { family, arity, tuple: t.clone(), out: k })
        })
        .collect()
}

pub fn add_at(h: &mut HomotopyDiffLie, s: &Slot, c: &Scalar) {
    let maps = if s.family == Family::Mu { &mut h.mu } else { &mut h.d };
    let n = maps[s.arity - 1].dim();
    maps[s.arity - 1].add_on_basis(&s.tuple, c, &crate::lie::unit(n, s.out));
}

/// Solves the MC equation for the given coordinates, assuming it is affine in them there;
/// a random point of the solution set, checked exactly.
pub fn solve_affine(h: &HomotopyDiffLie, free: &[Slot], rng: &mut impl Rng) -> Result<Option<HomotopyDiffLie>> {
    let mut probe = h.clone();
    for s in free {
        add_at(&mut probe, s, &Scalar::one());
    }
    let cap = h.residual_arity().max(probe.residual_arity());
    let r0 = mc_maps_capped(h, cap)?.flat();
    if free.is_empty() {
        return Ok(scalar::is_zero_vec(&r0).then(|| h.clone()));
    }
    let cols = par::map_slice(free, |s| -> Result<Vec<Scalar>> {
        let mut t = h.clone();
        add_at(&mut t, s, &Scalar::one());
        Ok(scalar::sub(&mc_maps_capped(&t, cap)?.flat(), &r0))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let m = Matrix::from_columns(r0.len(), &cols);
    let rhs: Vec<Scalar> = r0.iter().map(|x| -x.clone()).collect();
    let Some(mut x) = linalg::solve(&m, &rhs) else { return Ok(None) };
    let kernel = linalg::kernel_basis(&m);
    let z = catalog::random_combination(rng, &kernel, free.len());
    x = scalar::add(&x, &z);
    let mut out = h.clone();
    for (s, c) in free.iter().zip(&x) {
        add_at(&mut out, s, c);
    }
    Ok(mc_maps(&out)?.is_zero().then_some(out))
}

/// A valid two-term candidate with `μ₂ ≠ 0`: strict data from a differential representation, then `μ₁` and
/// higher `D_k` solved linearly. For λ ≠ 0 the `D_k`, `k ≥ 2`, only see even inputs and outputs.
pub fn random_two_term(rng: &mut impl Rng, weight: &Scalar) -> Result<HomotopyDiffLie> {
    let mut h = loop {
        let a = catalog::random_diff_lie(rng, 2, weight);
        let rep = catalog::random_diff_rep(rng, &a);
        let h = HomotopyDiffLie::two_term(&a, &rep);
        if !h.mu[1].is_zero() {
            break h;
        }
    };
    let mu1 = slots(&h, Family::Mu, 1);
    h = solve_affine(&h, &mu1, rng)?.ok_or_else(|| Error::Invalid("strict two-term data is not Maurer-Cartan".into()))?;
    let degs = h.degs();
    let free: Vec<Slot> = if weight.is_zero() {
        (1..=3).flat_map(|k| slots(&h, Family::D, k)).collect()
    } else {
        (2..=3)
            .flat_map(|k| slots(&h, Family::D, k))
            .filter(|s| degs[s.out] % 2 == 0 && s.tuple.iter().all(|&i| degs[i] % 2 == 0))
            .collect()
    };
    solve_affine(&h, &free, rng)?.ok_or_else(|| Error::Invalid("higher operator system has no solution".into()))
}

/// Adds a small nonzero scalar to one random coordinate of `μ` or `D`.
pub fn perturb(rng: &mut impl Rng, h: &HomotopyDiffLie) -> HomotopyDiffLie {
    let all: Vec<Slot> = (1..=h.mu.len())
        .flat_map(|k| slots(h, Family::Mu, k))
        .chain((1..=h.d.len()).flat_map(|k| slots(h, Family::D, k)))
        .collect();
    perturb_among(rng, h, &all)
}

/// Adds a small nonzero scalar to one coordinate drawn from `among`.
pub fn perturb_among(rng: &mut impl Rng, h: &HomotopyDiffLie, among: &[Slot]) -> HomotopyDiffLie {
    let mut out = h.clone();
    if among.is_empty() {
        return out;
    }
    let s = &among[rng.gen_range(0..among.len())];
    let c = [scalar::int(1), scalar::int(-1), scalar::frac(1, 2), scalar::int(2)][rng.gen_range(0..4)].clone();
    add_at(&mut out, s, &c);
    out
}
