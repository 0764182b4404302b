//! L∞[1]-algebras with finitely many brackets on block-graded spaces, and the
//! derived-bracket structures of differential Lie data.
//!
//! Elements of `sM ⊕ a` live in blocks `(part, arity)`; `sf` with `f` of arity
//! `k` has degree `k − 2`, `ξ ∈ a` of arity `k` has degree `k − 1`.

use num_traits::{One, Zero};
use rand::Rng;

use crate::combinatorics::{binomial, block_starts, combinations_colex, koszul_exponent, shuffles, signature, sort_alternating};
use crate::error::{Error, Result};
use crate::lie::{adjoint_rep, unit, DiffLieAlgebra, LieActTriple};
use crate::linalg::Matrix;
use crate::multilinear::AltMap;
use crate::nr::{circ_bar, nr_bracket};
use crate::par;
use crate::scalar::{self, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Part {
    M,
    A,
}

impl Part {
    fn name(self) -> &'static str {
        match self {
            Part::M => "m",
            Part::A => "a",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub part: Part,
    pub arity: usize,
    pub degree: i32,
    pub dim: usize,
    /// Admissible coordinates when the block is a coordinate subspace.
    pub mask: Option<Vec<bool>>,
}

impl Block {
    pub fn admissible(&self) -> Vec<usize> {
        match &self.mask {
            None => (0..self.dim).collect(),
            Some(m) => (0..self.dim).filter(|&i| m[i]).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockSpace {
    pub blocks: Vec<Block>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Element {
    pub parts: Vec<Vec<Scalar>>,
}

impl BlockSpace {
    pub fn find(&self, part: Part, arity: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.part == part && b.arity == arity)
    }

    pub fn zero(&self) -> Element {
        Element { parts: self.blocks.iter().map(|b| scalar::zeros(b.dim)).collect() }
    }

    pub fn single(&self, block: usize, coords: Vec<Scalar>) -> Element {
        let mut e = self.zero();
        assert_eq!(coords.len(), self.blocks[block].dim, "block size");
        e.parts[block] = coords;
        e
    }

    pub fn unit(&self, block: usize, k: usize) -> Element {
        let mut e = self.zero();
        e.parts[block][k] = Scalar::one();
        e
    }

    /// Element with the given maps placed in their blocks; maps whose block
    /// does not exist must vanish.
    pub fn element(&self, maps: &[(Part, &AltMap)]) -> Result<Element> {
        let mut e = self.zero();
        for (part, f) in maps {
            match self.find(*part, f.arity) {
                Some(b) if self.blocks[b].dim == f.coeffs.len() => scalar::add_into(&mut e.parts[b], &f.coeffs),
                Some(_) => return Err(Error::DimensionMismatch(format!("map of arity {} has the wrong shape", f.arity))),
                None if f.is_zero() => {}
                None => return Err(Error::ArityMismatch { expected: self.max_block_arity(), got: f.arity }),
            }
        }
        if !self.contains(&e) {
            return Err(Error::Invalid("element leaves the admissible subspace".into()));
        }
        Ok(e)
    }

    fn max_block_arity(&self) -> usize {
        self.blocks.iter().map(|b| b.arity).max().unwrap_or(0)
    }

    pub fn contains(&self, x: &Element) -> bool {
        x.parts.len() == self.blocks.len()
            && self.blocks.iter().zip(&x.parts).all(|(b, v)| {
                v.len() == b.dim && b.mask.as_ref().is_none_or(|m| v.iter().zip(m).all(|(c, ok)| *ok || c.is_zero()))
            })
    }

    pub fn degrees(&self) -> Vec<i32> {
        let mut d: Vec<i32> = self.blocks.iter().map(|b| b.degree).collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    /// Basis vectors of the admissible coordinates of one block.
    pub fn block_basis(&self, block: usize) -> Vec<Element> {
        self.blocks[block].admissible().into_iter().map(|k| self.unit(block, k)).collect()
    }

    /// Random homogeneous element of degree `degree` supported on blocks of arity ≤ `max_arity`.
    pub fn random_homogeneous(&self, rng: &mut impl Rng, degree: i32, max_arity: usize, r: i64) -> Element {
        let mut e = self.zero();
        for (i, b) in self.blocks.iter().enumerate() {
            if b.degree != degree || b.arity > max_arity {
                continue;
            }
            for k in b.admissible() {
                if rng.gen_bool(0.5) {
                    e.parts[i][k] = crate::catalog::small(rng, r);
                }
            }
        }
        e
    }

    /// The map stored in block `(part, arity)`, or zero if there is no such block.
    pub fn map_of(&self, x: &Element, part: Part, arity: usize, src: usize, tgt: usize) -> AltMap {
        match self.find(part, arity) {
            Some(b) => AltMap::from_coords(arity, src, tgt, x.parts[b].clone()),
            None => AltMap::zero(arity, src, tgt),
        }
    }
}

impl Element {
    pub fn is_zero(&self) -> bool {
        self.parts.iter().all(|p| scalar::is_zero_vec(p))
    }

    pub fn add(&self, other: &Element) -> Element {
        Element { parts: self.parts.iter().zip(&other.parts).map(|(a, b)| scalar::add(a, b)).collect() }
    }

    pub fn sub(&self, other: &Element) -> Element {
        Element { parts: self.parts.iter().zip(&other.parts).map(|(a, b)| scalar::sub(a, b)).collect() }
    }

    pub fn scale(&self, c: &Scalar) -> Element {
        Element { parts: self.parts.iter().map(|a| scalar::scaled(c, a)).collect() }
    }

    pub fn add_assign_scaled(&mut self, c: &Scalar, other: &Element) {
        for (a, b) in self.parts.iter_mut().zip(&other.parts) {
            scalar::add_scaled(a, c, b);
        }
    }

    pub fn add_assign(&mut self, other: &Element) {
        for (a, b) in self.parts.iter_mut().zip(&other.parts) {
            scalar::add_into(a, b);
        }
    }

    /// Common degree of the nonzero blocks; `None` for zero.
    pub fn degree(&self, space: &BlockSpace) -> Result<Option<i32>> {
        let mut d = None;
        for (b, v) in space.blocks.iter().zip(&self.parts) {
            if scalar::is_zero_vec(v) {
                continue;
            }
            match d {
                None => d = Some(b.degree),
                Some(e) if e != b.degree => return Err(Error::NonHomogeneousInput),
                _ => {}
            }
        }
        Ok(d)
    }

    pub fn to_json(&self, space: &BlockSpace) -> serde_json::Value {
        let parts: Vec<serde_json::Value> = space
            .blocks
            .iter()
            .zip(&self.parts)
            .filter(|(_, v)| !scalar::is_zero_vec(v))
            .map(|(b, v)| serde_json::json!({ "part": b.part.name(), "arity": b.arity, "coeffs": scalar::vec_to_json(v) }))
            .collect();
        serde_json::Value::Array(parts)
    }

    pub fn from_json(v: &serde_json::Value, space: &BlockSpace) -> Result<Element> {
        let items = v.as_array().ok_or_else(|| Error::Parse("element must be an array of blocks".into()))?;
        let mut e = space.zero();
        for it in items {
            let part = match it.get("part").and_then(serde_json::Value::as_str) {
                Some("m") => Part::M,
                Some("a") => Part::A,
                _ => return Err(Error::Parse(format!("bad block part in {it}"))),
            };
            let arity = it.get("arity").and_then(serde_json::Value::as_u64).ok_or_else(|| Error::Parse(format!("bad arity in {it}")))? as usize;
            let b = space.find(part, arity).ok_or_else(|| Error::Parse(format!("no block ({}, {arity})", part.name())))?;
            let coeffs = scalar::vec_from_json(it.get("coeffs").ok_or_else(|| Error::Parse("block needs \"coeffs\"".into()))?)?;
            if coeffs.len() != space.blocks[b].dim {
                return Err(Error::LengthMismatch(coeffs.len(), space.blocks[b].dim));
            }
            scalar::add_into(&mut e.parts[b], &coeffs);
        }
        if !space.contains(&e) {
            return Err(Error::Invalid("element leaves the admissible subspace".into()));
        }
        Ok(e)
    }
}

/// An L∞[1]-algebra: graded-symmetric brackets `l_k` of degree 1, zero for `k > max_arity`.
pub trait LInftyAlgebra: Sync {
    fn space(&self) -> &BlockSpace;
    fn max_arity(&self) -> usize;
    /// `l_k` on block components given in any order.
    fn bracket_blocks(&self, args: &[(usize, &[Scalar])]) -> Element;
}

impl<L: LInftyAlgebra + ?Sized> LInftyAlgebra for &L {
    fn space(&self) -> &BlockSpace {
        (**self).space()
    }
    fn max_arity(&self) -> usize {
        (**self).max_arity()
    }
    fn bracket_blocks(&self, args: &[(usize, &[Scalar])]) -> Element {
        (**self).bracket_blocks(args)
    }
}

/// `l_k(x₁,…,x_k)` by multilinear expansion over blocks.
pub fn bracket<L: LInftyAlgebra + ?Sized>(l: &L, xs: &[&Element]) -> Element {
    let space = l.space();
    let mut out = space.zero();
    if xs.is_empty() || xs.len() > l.max_arity() {
        return out;
    }
    let choices: Vec<Vec<usize>> =
        xs.iter().map(|x| (0..x.parts.len()).filter(|&b| !scalar::is_zero_vec(&x.parts[b])).collect()).collect();
    if choices.iter().any(Vec::is_empty) {
        return out;
    }
    let mut pick = vec![0usize; xs.len()];
    loop {
        let args: Vec<(usize, &[Scalar])> = pick
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let b = choices[i][p];
                (b, xs[i].parts[b].as_slice())
            })
            .collect();
        out.add_assign(&l.bracket_blocks(&args));
        let mut i = 0;
        loop {
            if i == pick.len() {
                return out;
            }
            pick[i] += 1;
            if pick[i] < choices[i].len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}

fn degrees_of<L: LInftyAlgebra + ?Sized>(l: &L, xs: &[&Element]) -> Result<Vec<i32>> {
    xs.iter().map(|x| x.degree(l.space()).map(|d| d.unwrap_or(0))).collect()
}

/// `Σ_{i} Σ_{σ∈Sh(i,n−i)} ε(σ) l_{n−i+1}(l_i(x_σ(1..i)), x_σ(i+1..n))` for homogeneous inputs.
pub fn generalized_jacobi_residual<L: LInftyAlgebra + ?Sized>(l: &L, xs: &[&Element]) -> Result<Element> {
    let degs = degrees_of(l, xs)?;
    let n = xs.len();
    let terms: Vec<(usize, Vec<usize>)> =
        (1..=n).flat_map(|i| shuffles(&[i, n - i]).into_iter().map(move |s| (i, s.images))).collect();
    let parts = par::map_slice(&terms, |(i, images)| {
        let inner: Vec<&Element> = images[..*i].iter().map(|&k| xs[k]).collect();
        let y = bracket(l, &inner);
        if y.is_zero() {
            return None;
        }
        let mut outer = vec![&y];
        outer.extend(images[*i..].iter().map(|&k| xs[k]));
        Some(bracket(l, &outer).scale(&scalar::sign(koszul_exponent(images, &degs))))
    });
    let mut out = l.space().zero();
    for p in parts.into_iter().flatten() {
        out.add_assign(&p);
    }
    Ok(out)
}

/// `Σ_{k≥1} (1/k!) l_k(α,…,α)` for `α` of degree 0.
pub fn mc_residual<L: LInftyAlgebra + ?Sized>(l: &L, alpha: &Element) -> Result<Element> {
    if let Some(d) = alpha.degree(l.space())? {
        if d != 0 {
            return Err(Error::DegreeMismatch(d));
        }
    }
    let mut out = l.space().zero();
    for k in 1..=l.max_arity() {
        let args = vec![alpha; k];
        out.add_assign_scaled(&(Scalar::one() / scalar::factorial(k)), &bracket(l, &args));
    }
    Ok(out)
}

/// `l^α_k(x) = Σ_{i≥0} (1/i!) l_{k+i}(α,…,α,x)`.
pub struct Twisted<L> {
    pub base: L,
    pub alpha: Element,
}

/// Twisting by a Maurer–Cartan element.
pub fn twist<L: LInftyAlgebra>(base: L, alpha: Element) -> Result<Twisted<L>> {
    if !mc_residual(&base, &alpha)?.is_zero() {
        return Err(Error::NotMaurerCartan);
    }
    Ok(Twisted { base, alpha })
}

impl<L: LInftyAlgebra> LInftyAlgebra for Twisted<L> {
    fn space(&self) -> &BlockSpace {
        self.base.space()
    }

    fn max_arity(&self) -> usize {
        self.base.max_arity()
    }

    fn bracket_blocks(&self, args: &[(usize, &[Scalar])]) -> Element {
        let space = self.base.space();
        let xs: Vec<Element> = args.iter().map(|(b, c)| space.single(*b, c.to_vec())).collect();
        let mut out = space.zero();
        let max = self.base.max_arity();
        for i in 0..=max.saturating_sub(args.len()) {
            let mut refs: Vec<&Element> = vec![&self.alpha; i];
            refs.extend(xs.iter());
            out.add_assign_scaled(&(Scalar::one() / scalar::factorial(i)), &bracket(&self.base, &refs));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rescaling {
    /// `l_k ↦ λ^{k−1} l_k`.
    Full,
    /// `l_k ↦ λ^{k−2} l_k` for `k ≥ 2`; needs `l_1 = 0`.
    FixedDifferential,
}

pub struct Rescaled<L> {
    pub base: L,
    pub lambda: Scalar,
    pub mode: Rescaling,
}

pub fn lambda_rescale<L: LInftyAlgebra>(base: L, lambda: Scalar, mode: Rescaling) -> Result<Rescaled<L>> {
    if mode == Rescaling::FixedDifferential {
        let space = base.space();
        for b in 0..space.blocks.len() {
            for k in space.blocks[b].admissible() {
                let x = space.unit(b, k);
                if !bracket(&base, &[&x]).is_zero() {
                    return Err(Error::Invalid("rescaling with fixed differential needs l_1 = 0".into()));
                }
            }
        }
    }
    Ok(Rescaled { base, lambda, mode })
}

impl<L: LInftyAlgebra> LInftyAlgebra for Rescaled<L> {
    fn space(&self) -> &BlockSpace {
        self.base.space()
    }

    fn max_arity(&self) -> usize {
        self.base.max_arity()
    }

    fn bracket_blocks(&self, args: &[(usize, &[Scalar])]) -> Element {
        let k = args.len();
        let c = match self.mode {
            Rescaling::Full => scalar::pow(&self.lambda, k - 1),
            Rescaling::FixedDifferential if k == 1 => return self.space().zero(),
            Rescaling::FixedDifferential => scalar::pow(&self.lambda, k - 2),
        };
        if c.is_zero() {
            return self.space().zero();
        }
        self.base.bracket_blocks(args).scale(&c)
    }
}

/// Blocks `M_k`, `A_k` for `0 ≤ k ≤ n` over an `n`-dimensional space.
pub fn absolute_space(n: usize) -> BlockSpace {
    let mut blocks = Vec::new();
    for k in 0..=n {
        blocks.push(Block { part: Part::M, arity: k, degree: k as i32 - 2, dim: binomial(n, k) * n, mask: None });
    }
    for k in 0..=n {
        blocks.push(Block { part: Part::A, arity: k, degree: k as i32 - 1, dim: binomial(n, k) * n, mask: None });
    }
    BlockSpace { blocks }
}

/// `(−1)^{Σ_j (m₁+…+m_{j−1})} Σ_{τ∈Sh(m_r+1,…,m₁+1,n+1−r)} f(ξ_r⊗…⊗ξ₁⊗Id)τ⁻¹`
/// with `m_j = arity(ξ_j) − 1` and `arity(f) = n + 1`.
pub fn composite_closed_form(f: &AltMap, xis: &[&AltMap]) -> AltMap {
    let n = f.src_dim;
    let r = xis.len();
    let t = f.arity as i64 + xis.iter().map(|x| x.arity as i64 - 1).sum::<i64>();
    let mut out = AltMap::zero(t.max(0) as usize, n, f.tgt_dim);
    if r > f.arity || t as usize > n {
        return out;
    }
    let ms: Vec<i64> = xis.iter().map(|x| x.arity as i64 - 1).collect();
    let mut pre = 0i64;
    let mut run = 0i64;
    for &m in &ms {
        pre += run;
        run += m;
    }
    let mut blocks: Vec<usize> = xis.iter().rev().map(|x| x.arity).collect();
    blocks.push(f.arity - r);
    let starts = block_starts(&blocks);
    let shs = shuffles(&blocks);
    let units: Vec<Vec<Scalar>> = (0..n).map(|i| unit(n, i)).collect();
    let c0 = scalar::sign(pre);
    for tuple in out.tuples() {
        let mut acc = scalar::zeros(f.tgt_dim);
        'tau: for tau in &shs {
            let mut vals: Vec<&[Scalar]> = Vec::with_capacity(f.arity);
            for j in 0..r {
                let xi = xis[r - 1 - j];
                let sub: Vec<usize> = tau.images[starts[j]..starts[j] + blocks[j]].iter().map(|&p| tuple[p]).collect();
                let v = xi.value(&sub);
                if scalar::is_zero_vec(v) {
                    continue 'tau;
                }
                vals.push(v);
            }
            for &p in &tau.images[starts[r]..] {
                vals.push(&units[tuple[p]]);
            }
            f.eval_into(&vals, &(&c0 * signature(tau)), &mut acc);
        }
        out.value_mut(&tuple).clone_from_slice(&acc);
    }
    out
}

fn move_m_first(args: &[(usize, &[Scalar])], space: &BlockSpace, p: usize) -> Scalar {
    let dp = space.blocks[args[p].0].degree as i64;
    let before: i64 = args[..p].iter().map(|(b, _)| space.blocks[*b].degree as i64).sum();
    scalar::sign(dp * before)
}

/// The closed-form structure on `sM ⊕ a` for `M = a = Hom(∧g, g)`.
pub struct AbsoluteStructure {
    pub dim: usize,
    pub lambda: Scalar,
    space: BlockSpace,
}

pub fn absolute_structure(dim: usize, lambda: Scalar) -> AbsoluteStructure {
    AbsoluteStructure { dim, lambda, space: absolute_space(dim) }
}

impl AbsoluteStructure {
    fn map(&self, b: usize, c: &[Scalar]) -> AltMap {
        AltMap::from_coords(self.space.blocks[b].arity, self.dim, self.dim, c.to_vec())
    }

    fn place(&self, out: &mut Element, part: Part, f: &AltMap, c: &Scalar) {
        if let Some(b) = self.space.find(part, f.arity) {
            scalar::add_scaled(&mut out.parts[b], c, &f.coeffs);
        }
    }
}

impl LInftyAlgebra for AbsoluteStructure {
    fn space(&self) -> &BlockSpace {
        &self.space
    }

    fn max_arity(&self) -> usize {
        (self.dim + 1).max(2)
    }

    fn bracket_blocks(&self, args: &[(usize, &[Scalar])]) -> Element {
        let mut out = self.space.zero();
        let k = args.len();
        let ms: Vec<usize> = (0..k).filter(|&i| self.space.blocks[args[i].0].part == Part::M).collect();
        let arity_sum: i64 = args.iter().map(|(b, _)| self.space.blocks[*b].arity as i64).sum();
        let out_arity = arity_sum - (k as i64 - 1);
        if out_arity < 0 || out_arity > self.dim as i64 {
            return out;
        }
        match (ms.len(), k) {
            (2, 2) => {
                let f = self.map(args[0].0, args[0].1);
                let g = self.map(args[1].0, args[1].1);
                let x = nr_bracket(&f, &g).expect("same shape");
                self.place(&mut out, Part::M, &x, &scalar::sign(f.arity as i64 - 1));
            }
            (1, _) if k >= 2 => {
                let p = ms[0];
                let s = move_m_first(args, &self.space, p);
                let f = self.map(args[p].0, args[p].1);
                let xis: Vec<AltMap> = (0..k).filter(|&i| i != p).map(|i| self.map(args[i].0, args[i].1)).collect();
                if k == 2 {
                    let x = nr_bracket(&f, &xis[0]).expect("same shape");
                    self.place(&mut out, Part::A, &x, &s);
                } else {
                    let refs: Vec<&AltMap> = xis.iter().collect();
                    let x = composite_closed_form(&f, &refs);
                    self.place(&mut out, Part::A, &x, &(s * scalar::pow(&self.lambda, k - 2)));
                }
            }
            _ => {}
        }
        out
    }
}

/// V-data `(L, M, a, P, Δ)` with `L = Hom(∧W, W)` and injections `ι_M`, `ι_a`.
pub trait VData: Sync {
    fn space(&self) -> &BlockSpace;
    fn w_dim(&self) -> usize;
    fn max_arity(&self) -> usize;
    /// `ι_M` on an M-block, `ι_a` on an A-block.
    fn include(&self, block: usize, coords: &[Scalar]) -> AltMap;
    /// `P`, landing in the A-blocks.
    fn project(&self, big: &AltMap) -> Element;
    /// `ι_M⁻¹` on the image of `ι_M`, landing in the M-blocks.
    fn m_inverse(&self, big: &AltMap) -> Element;
    fn delta(&self) -> Option<&AltMap>;
}

/// `ι_M(f) = Σ_i f_i` on `g ⊕ g′`: `f_0` lands in g, `f_i` (i primed inputs, i ≥ 1) in g′.
pub fn iota_m(f: &AltMap) -> AltMap {
    let n = f.src_dim;
    let mut out = AltMap::zero(f.arity, 2 * n, 2 * n);
    for t in out.tuples() {
        let primed = t.iter().filter(|&&x| x >= n).count();
        let mut u: Vec<usize> = t.iter().map(|&x| if x >= n { x - n } else { x }).collect();
        let Some(s) = sort_alternating(&mut u) else { continue };
        let v = scalar::scaled(&s, f.value(&u));
        let slot = out.value_mut(&t);
        if primed == 0 {
            slot[..n].clone_from_slice(&v);
        } else {
            slot[n..].clone_from_slice(&v);
        }
    }
    out
}

/// `ι_a(ξ)`: unprimed inputs, primed output.
pub fn iota_a(xi: &AltMap) -> AltMap {
    let n = xi.src_dim;
    let mut out = AltMap::zero(xi.arity, 2 * n, 2 * n);
    for t in xi.tuples() {
        out.value_mut(&t)[n..].clone_from_slice(xi.value(&t));
    }
    out
}

/// `P`: the g′-component on unprimed inputs.
pub fn project_a(big: &AltMap, n: usize) -> AltMap {
    let mut out = AltMap::zero(big.arity, n, n);
    for t in out.tuples() {
        out.value_mut(&t).clone_from_slice(&big.value(&t)[n..]);
    }
    out
}

/// The g-component on unprimed inputs; inverts `ι_M` on its image.
pub fn restrict_unprimed(big: &AltMap, n: usize) -> AltMap {
    let mut out = AltMap::zero(big.arity, n, n);
    for t in out.tuples() {
        out.value_mut(&t).clone_from_slice(&big.value(&t)[..n]);
    }
    out
}

/// `ι_M[f,g] − [ι_M f, ι_M g]`.
pub fn iota_m_defect(f: &AltMap, g: &AltMap) -> Result<AltMap> {
    let lhs = iota_m(&nr_bracket(f, g)?);
    Ok(lhs.sub(&nr_bracket(&iota_m(f), &iota_m(g))?))
}

/// V-data on `L = Hom(∧(g⊕g′), g⊕g′)` with `M = a = Hom(∧g, g)`; `Δ = ι_M(μ)` when given.
pub struct AbsoluteVData {
    pub dim: usize,
    delta: Option<AltMap>,
    space: BlockSpace,
}

impl AbsoluteVData {
    pub fn new(dim: usize) -> Self {
        AbsoluteVData { dim, delta: None, space: absolute_space(dim) }
    }

    pub fn with_delta(mu: &AltMap) -> Self {
        AbsoluteVData { dim: mu.src_dim, delta: Some(iota_m(mu)), space: absolute_space(mu.src_dim) }
    }
}

impl VData for AbsoluteVData {
    fn space(&self) -> &BlockSpace {
        &self.space
    }

    fn w_dim(&self) -> usize {
        2 * self.dim
    }

    fn max_arity(&self) -> usize {
        (self.dim + 1).max(3)
    }

    fn include(&self, block: usize, coords: &[Scalar]) -> AltMap {
        let b = &self.space.blocks[block];
        let f = AltMap::from_coords(b.arity, self.dim, self.dim, coords.to_vec());
        match b.part {
            Part::M => iota_m(&f),
            Part::A => iota_a(&f),
        }
    }

    fn project(&self, big: &AltMap) -> Element {
        let mut out = self.space.zero();
        if let Some(b) = self.space.find(Part::A, big.arity) {
            out.parts[b] = project_a(big, self.dim).coeffs;
        }
        out
    }

    fn m_inverse(&self, big: &AltMap) -> Element {
        let mut out = self.space.zero();
        if let Some(b) = self.space.find(Part::M, big.arity) {
            out.parts[b] = restrict_unprimed(big, self.dim).coeffs;
        }
        out
    }

    fn delta(&self) -> Option<&AltMap> {
        self.delta.as_ref()
    }
}

/// Blocks of `sM′ ⊕ a′` over `g ⊕ h`, in coordinates of `Hom(∧(g⊕h), g⊕h)`:
/// `M′` sends inputs involving h into h and g-inputs into g; `a′ = Hom(∧g, h)`.
pub fn relative_space(p: usize, q: usize) -> BlockSpace {
    let w = p + q;
    let mut blocks = Vec::new();
    let masks = |k: usize, pick: &dyn Fn(bool, bool) -> bool| -> Vec<bool> {
        let mut m = Vec::new();
        for t in combinations_colex(w, k) {
            let all_g = t.iter().all(|&x| x < p);
            for o in 0..w {
                m.push(pick(all_g, o < p));
            }
        }
        m
    };
    for k in 1..=w {
        let mask = masks(k, &|all_g, out_g| all_g == out_g);
        blocks.push(Block { part: Part::M, arity: k, degree: k as i32 - 2, dim: binomial(w, k) * w, mask: Some(mask) });
    }
    for k in 1..=p {
        let mask = masks(k, &|all_g, out_g| all_g && !out_g);
        blocks.push(Block { part: Part::A, arity: k, degree: k as i32 - 1, dim: binomial(w, k) * w, mask: Some(mask) });
    }
    BlockSpace { blocks }
}

/// V-data on `L′ = Hom(∧(g⊕h), g⊕h)` with `M′`, `a′` as coordinate subspaces and `Δ = 0`.
pub struct RelativeVData {
    pub g_dim: usize,
    pub h_dim: usize,
    space: BlockSpace,
}

impl RelativeVData {
    pub fn new(g_dim: usize, h_dim: usize) -> Self {
        RelativeVData { g_dim, h_dim, space: relative_space(g_dim, h_dim) }
    }
}

/// `P′`: the h-component on g-inputs.
pub fn project_relative(big: &AltMap, p: usize) -> AltMap {
    let mut out = AltMap::zero(big.arity, big.src_dim, big.tgt_dim);
    for t in combinations_colex(p, big.arity) {
        out.value_mut(&t)[p..].clone_from_slice(&big.value(&t)[p..]);
    }
    out
}

impl VData for RelativeVData {
    fn space(&self) -> &BlockSpace {
        &self.space
    }

    fn w_dim(&self) -> usize {
        self.g_dim + self.h_dim
    }

    fn max_arity(&self) -> usize {
        self.w_dim() + 1
    }

    fn include(&self, block: usize, coords: &[Scalar]) -> AltMap {
        let w = self.w_dim();
        AltMap::from_coords(self.space.blocks[block].arity, w, w, coords.to_vec())
    }

    fn project(&self, big: &AltMap) -> Element {
        let mut out = self.space.zero();
        if let Some(b) = self.space.find(Part::A, big.arity) {
            out.parts[b] = project_relative(big, self.g_dim).coeffs;
        }
        out
    }

    fn m_inverse(&self, big: &AltMap) -> Element {
        let mut out = self.space.zero();
        if let Some(b) = self.space.find(Part::M, big.arity) {
            out.parts[b] = big.coeffs.clone();
        }
        out
    }

    fn delta(&self) -> Option<&AltMap> {
        None
    }
}

/// Derived brackets of weight λ:
/// `l₁(sf) = (−s ι⁻¹[Δ,ιf], Pιf)`, `l₁(ξ) = P[Δ,ιξ]`, `l₂(sf,sg) = (−1)^{|f|} λ s[f,g]`,
/// `l_k(sf,ξ₁,…) = λ^{k−1} P[…[ιf,ιξ₁]…]`, `l_k(ξ₁,…) = λ^{k−1} P[…[Δ,ιξ₁]…]`.
pub struct DerivedBrackets<V> {
    pub vdata: V,
    pub lambda: Scalar,
}

impl<V: VData> DerivedBrackets<V> {
    fn nested(&self, start: AltMap, args: &[(usize, &[Scalar])]) -> AltMap {
        let mut x = start;
        for (b, c) in args {
            if x.is_zero() {
                break;
            }
            x = nr_bracket(&x, &self.vdata.include(*b, c)).expect("same shape");
        }
        x
    }
}

impl<V: VData> LInftyAlgebra for DerivedBrackets<V> {
    fn space(&self) -> &BlockSpace {
        self.vdata.space()
    }

    fn max_arity(&self) -> usize {
        self.vdata.max_arity()
    }

    fn bracket_blocks(&self, args: &[(usize, &[Scalar])]) -> Element {
        let space = self.vdata.space();
        let k = args.len();
        let ms: Vec<usize> = (0..k).filter(|&i| space.blocks[args[i].0].part == Part::M).collect();
        let zero = || space.zero();
        match (ms.len(), k) {
            (1, 1) => {
                let f = self.vdata.include(args[0].0, args[0].1);
                let mut out = self.vdata.project(&f);
                if let Some(d) = self.vdata.delta() {
                    let x = nr_bracket(d, &f).expect("same shape");
                    out.add_assign_scaled(&-Scalar::one(), &self.vdata.m_inverse(&x));
                }
                out
            }
            (0, 1) => match self.vdata.delta() {
                Some(d) => self.vdata.project(&self.nested(d.clone(), args)),
                None => zero(),
            },
            (2, 2) => {
                let f = self.vdata.include(args[0].0, args[0].1);
                let g = self.vdata.include(args[1].0, args[1].1);
                let x = nr_bracket(&f, &g).expect("same shape");
                let c = scalar::sign(f.arity as i64 - 1) * &self.lambda;
                self.vdata.m_inverse(&x).scale(&c)
            }
            (1, _) => {
                let p = ms[0];
                let s = move_m_first(args, space, p);
                let rest: Vec<(usize, &[Scalar])> = (0..k).filter(|&i| i != p).map(|i| args[i]).collect();
                let x = self.nested(self.vdata.include(args[p].0, args[p].1), &rest);
                self.vdata.project(&x).scale(&(s * scalar::pow(&self.lambda, k - 1)))
            }
            (0, _) => match self.vdata.delta() {
                Some(d) => self.vdata.project(&self.nested(d.clone(), args)).scale(&scalar::pow(&self.lambda, k - 1)),
                None => zero(),
            },
            _ => zero(),
        }
    }
}

pub type RelativeStructure = Rescaled<DerivedBrackets<RelativeVData>>;
pub type AbsoluteDerived = Rescaled<DerivedBrackets<AbsoluteVData>>;

/// `l₂(sf,sg) = (−1)^{|f|} s[f,g]`, `l_k(sf,ξ₁,…) = λ^{k−2} P′[…[f,ξ₁]…]` on `sM′ ⊕ a′`.
/// General derived-bracket tables for `V` with weight `λ` inserted.
pub fn derived_brackets_general<V: VData>(vdata: V, lambda: Scalar) -> DerivedBrackets<V> {
    DerivedBrackets { vdata, lambda }
}

pub fn relative_structure(g_dim: usize, h_dim: usize, lambda: Scalar) -> RelativeStructure {
    let base = derived_brackets_general(RelativeVData::new(g_dim, h_dim), Scalar::one());
    Rescaled { base, lambda, mode: Rescaling::FixedDifferential }
}

/// The absolute structure obtained as derived brackets of `(ι_M, ι_a, P)` with `Δ = 0`.
pub fn absolute_derived(dim: usize, lambda: Scalar) -> AbsoluteDerived {
    let base = derived_brackets_general(AbsoluteVData::new(dim), Scalar::one());
    Rescaled { base, lambda, mode: Rescaling::FixedDifferential }
}

/// `P((…(ι_M f ∘̄ ι_a ξ₁)…) ∘̄ ι_a ξ_r)` minus the closed form, for `1 ≤ r ≤ arity(f)`.
pub fn key_formula_check(f: &AltMap, xis: &[&AltMap]) -> Result<AltMap> {
    let n = f.src_dim;
    if f.tgt_dim != n || xis.iter().any(|x| x.src_dim != n || x.tgt_dim != n) {
        return Err(Error::DimensionMismatch("key formula needs maps g^k → g".into()));
    }
    if xis.is_empty() || xis.len() > f.arity {
        return Err(Error::ArityMismatch { expected: f.arity, got: xis.len() });
    }
    let mut x = iota_m(f);
    for xi in xis {
        x = circ_bar(&x, &iota_a(xi))?;
    }
    let lhs = project_a(&x, n);
    let rhs = composite_closed_form(f, xis);
    Ok(lhs.sub(&rhs))
}

/// `φ(l_k(x)) − l′_k(φx₁,…,φx_k)`.
pub fn morphism_residual<L1, L2, F>(src: &L1, dst: &L2, phi: F, xs: &[&Element]) -> Element
where
    L1: LInftyAlgebra + ?Sized,
    L2: LInftyAlgebra + ?Sized,
    F: Fn(&Element) -> Element,
{
    let lhs = phi(&bracket(src, xs));
    let images: Vec<Element> = xs.iter().map(|x| phi(x)).collect();
    let refs: Vec<&Element> = images.iter().collect();
    lhs.sub(&bracket(dst, &refs))
}

/// `(sf, ξ) ↦ (s ι_M f, ξ)`: absolute structure over g into the relative one over `(g, g′)`.
pub fn iota_morphism(dim: usize, x: &Element) -> Element {
    let src = absolute_space(dim);
    let dst = relative_space(dim, dim);
    let mut out = dst.zero();
    for (b, block) in src.blocks.iter().enumerate() {
        if block.arity == 0 || scalar::is_zero_vec(&x.parts[b]) {
            continue;
        }
        let f = AltMap::from_coords(block.arity, dim, dim, x.parts[b].clone());
        let big = match block.part {
            Part::M => iota_m(&f),
            Part::A => iota_a(&f),
        };
        if let Some(t) = dst.find(block.part, block.arity) {
            scalar::add_into(&mut out.parts[t], &big.coeffs);
        }
    }
    out
}

/// The natural inclusions `M′ ⊆ Hom(∧(g⊕h), g⊕h)`, `a′ ⊆ Hom(∧(g⊕h), g⊕h)`.
pub fn inclusion_morphism(g_dim: usize, h_dim: usize, x: &Element) -> Element {
    let src = relative_space(g_dim, h_dim);
    let dst = absolute_space(g_dim + h_dim);
    let mut out = dst.zero();
    for (b, block) in src.blocks.iter().enumerate() {
        if let Some(t) = dst.find(block.part, block.arity) {
            scalar::add_into(&mut out.parts[t], &x.parts[b]);
        }
    }
    out
}

/// Residuals of the Maurer–Cartan equation for `(sπ, D)` or `(sχ, D)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct McReport {
    /// `[π,π]_NR`.
    pub bracket_square: AltMap,
    /// The a-component of the MC residual.
    pub operator: AltMap,
    /// The full MC residual in `sM ⊕ a`.
    pub residual: Element,
}

impl McReport {
    pub fn is_mc(&self) -> bool {
        self.residual.is_zero()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "is_mc": self.is_mc(),
            "bracket_square": self.bracket_square.to_json(),
            "operator": self.operator.to_json(),
        })
    }
}

/// MC condition for `(sπ, D)` in the absolute structure of weight λ:
/// `[π,π] = 0` and `l₂(sπ,D) + ½ l₃(sπ,D,D) = 0`.
pub fn mc_check_absolute(pi: &AltMap, d: &Matrix, lambda: &Scalar) -> Result<McReport> {
    let n = pi.src_dim;
    if pi.arity != 2 || pi.tgt_dim != n || (d.rows, d.cols) != (n, n) {
        return Err(Error::DimensionMismatch("need a bracket g∧g → g and an operator g → g".into()));
    }
    let l = absolute_structure(n, lambda.clone());
    let space = l.space();
    let alpha = space.element(&[(Part::M, pi), (Part::A, &AltMap::from_matrix(d))])?;
    let residual = mc_residual(&l, &alpha)?;
    Ok(McReport {
        bracket_square: nr_bracket(pi, pi)?,
        operator: space.map_of(&residual, Part::A, 2, n, n),
        residual,
    })
}

/// `χ = π + ρ + μ ∈ Hom(∧²(g⊕h), g⊕h)`.
pub fn chi_of(t: &LieActTriple) -> AltMap {
    t.semidirect_weighted(&Scalar::one()).bracket
}

/// `D` as an element of `Hom(g, h) ⊆ Hom(g⊕h, g⊕h)`.
pub fn relative_operator_map(d: &Matrix, g_dim: usize, h_dim: usize) -> AltMap {
    let w = g_dim + h_dim;
    let mut f = AltMap::zero(1, w, w);
    for j in 0..g_dim {
        f.value_mut(&[j])[g_dim..].clone_from_slice(&d.column(j));
    }
    f
}

/// MC condition for `(sχ, D)` in the relative structure of weight λ.
pub fn mc_check_relative(t: &LieActTriple, d: &Matrix, lambda: &Scalar) -> Result<McReport> {
    let (p, q) = (t.g.dim, t.h.dim);
    if (d.rows, d.cols) != (q, p) {
        return Err(Error::DimensionMismatch(format!("relative operator is {}x{}", d.rows, d.cols)));
    }
    let l = relative_structure(p, q, lambda.clone());
    let space = l.space();
    let chi = chi_of(t);
    let alpha = space.element(&[(Part::M, &chi), (Part::A, &relative_operator_map(d, p, q))])?;
    let residual = mc_residual(&l, &alpha)?;
    Ok(McReport { bracket_square: nr_bracket(&chi, &chi)?, operator: space.map_of(&residual, Part::A, 2, p + q, p + q), residual })
}

/// `l₁^{(sμ,d)}(sf, g) + ∂ⁿ(f, g)` with adjoint coefficients; `g` is absent in degree 0.
pub fn twist_bridge_residual(a: &DiffLieAlgebra, f: &AltMap, g: Option<&AltMap>) -> Result<(AltMap, AltMap)> {
    let n = a.dim();
    let deg = f.arity;
    let l = absolute_structure(n, a.weight.clone());
    let space = l.space();
    let alpha = space.element(&[(Part::M, &a.algebra.bracket), (Part::A, &AltMap::from_matrix(&a.d))])?;
    let tw = Twisted { base: &l, alpha };
    let mut maps = vec![(Part::M, f)];
    if let Some(g) = g {
        maps.push((Part::A, g));
    }
    let x = space.element(&maps)?;
    let y = bracket(&tw, &[&x]);
    let rep = adjoint_rep(a);
    let (df, dg) = match g {
        Some(g) => {
            let p = crate::cohomology::difflie_apply(a, &rep, &crate::cohomology::CocyclePair { f: f.clone(), g: g.clone() });
            (p.f, p.g)
        }
        None => {
            if deg != 0 {
                return Err(Error::ArityMismatch { expected: 0, got: deg });
            }
            let f1 = crate::cohomology::ce_apply(a, &rep.rho, f);
            (f1, AltMap::constant(n, a.d.apply(&f.coeffs)))
        }
    };
    let rf = space.map_of(&y, Part::M, deg + 1, n, n).add(&df);
    let rg = space.map_of(&y, Part::A, deg, n, n).add(&dg);
    Ok((rf, rg))
}

pub fn random_altmap(rng: &mut impl Rng, arity: usize, src: usize, tgt: usize, r: i64) -> AltMap {
    let len = binomial(src, arity) * tgt;
    AltMap::from_coords(arity, src, tgt, crate::catalog::random_vec(rng, len, r))
}
