//! Alternating maps on ungraded spaces and graded-symmetric maps on graded spaces.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::combinatorics::{self, binomial, combinations_colex, rank_colex, sort_alternating, sort_graded};
use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};

/// `f ∈ Hom(∧^arity k^src, k^tgt)`, stored on increasing tuples in colex order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AltMap {
    pub arity: usize,
    pub src_dim: usize,
    pub tgt_dim: usize,
    pub coeffs: Vec<Scalar>,
}

impl AltMap {
    pub fn zero(arity: usize, src_dim: usize, tgt_dim: usize) -> Self {
        AltMap { arity, src_dim, tgt_dim, coeffs: scalar::zeros(binomial(src_dim, arity) * tgt_dim) }
    }

    pub fn from_coords(arity: usize, src_dim: usize, tgt_dim: usize, coeffs: Vec<Scalar>) -> Self {
        assert_eq!(coeffs.len(), binomial(src_dim, arity) * tgt_dim, "coefficient count");
        AltMap { arity, src_dim, tgt_dim, coeffs }
    }

    /// Linear map from a `tgt × src` matrix.
    pub fn from_matrix(m: &crate::linalg::Matrix) -> Self {
        let mut f = AltMap::zero(1, m.cols, m.rows);
        for j in 0..m.cols {
            f.value_mut(&[j]).clone_from_slice(&m.column(j));
        }
        f
    }

    pub fn to_matrix(&self) -> crate::linalg::Matrix {
        assert_eq!(self.arity, 1);
        let cols: Vec<Vec<Scalar>> = (0..self.src_dim).map(|j| self.value(&[j]).to_vec()).collect();
        crate::linalg::Matrix::from_columns(self.tgt_dim, &cols)
    }

    /// Constant map of arity 0.
    pub fn constant(src_dim: usize, v: Vec<Scalar>) -> Self {
        AltMap { arity: 0, src_dim, tgt_dim: v.len(), coeffs: v }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn tuples(&self) -> Vec<Vec<usize>> {
        combinations_colex(self.src_dim, self.arity)
    }

    /// Value on a strictly increasing tuple.
    pub fn value(&self, tuple: &[usize]) -> &[Scalar] {
        let r = rank_colex(tuple) * self.tgt_dim;
        &self.coeffs[r..r + self.tgt_dim]
    }

    pub fn value_mut(&mut self, tuple: &[usize]) -> &mut [Scalar] {
        let r = rank_colex(tuple) * self.tgt_dim;
        &mut self.coeffs[r..r + self.tgt_dim]
    }

    /// Value on an arbitrary basis tuple, as (sign, increasing-tuple value).
    pub fn on_basis(&self, idx: &[usize]) -> Option<(Scalar, &[Scalar])> {
        let mut t = idx.to_vec();
        let s = sort_alternating(&mut t)?;
        Some((s, self.value(&t)))
    }

    /// Adds `c · v` to f(e_idx) for an arbitrary basis tuple.
    pub fn add_on_basis(&mut self, idx: &[usize], c: &Scalar, v: &[Scalar]) {
        let mut t = idx.to_vec();
        if let Some(s) = sort_alternating(&mut t) {
            let c = c * s;
            scalar::add_scaled(self.value_mut(&t), &c, v);
        }
    }

    /// Multilinear evaluation; `acc += c · f(args)`.
    pub fn eval_into(&self, args: &[&[Scalar]], c: &Scalar, acc: &mut [Scalar]) {
        debug_assert_eq!(args.len(), self.arity);
        let mut idx = Vec::with_capacity(self.arity);
        self.eval_rec(args, c, &mut idx, acc);
    }

    fn eval_rec(&self, args: &[&[Scalar]], c: &Scalar, idx: &mut Vec<usize>, acc: &mut [Scalar]) {
        let k = idx.len();
        if k == args.len() {
            if let Some((s, v)) = self.on_basis(idx) {
                scalar::add_scaled(acc, &(c * s), v);
            }
            return;
        }
        for (i, x) in args[k].iter().enumerate() {
            if x.is_zero() || idx.contains(&i) {
                continue;
            }
            idx.push(i);
            self.eval_rec(args, &(c * x), idx, acc);
            idx.pop();
        }
    }

    pub fn add(&self, other: &AltMap) -> AltMap {
        self.check_same(other);
        AltMap { coeffs: scalar::add(&self.coeffs, &other.coeffs), ..self.clone() }
    }

    pub fn sub(&self, other: &AltMap) -> AltMap {
        self.check_same(other);
        AltMap { coeffs: scalar::sub(&self.coeffs, &other.coeffs), ..self.clone() }
    }

    pub fn scale(&self, c: &Scalar) -> AltMap {
        AltMap { coeffs: scalar::scaled(c, &self.coeffs), ..self.clone() }
    }

    pub fn add_assign_scaled(&mut self, c: &Scalar, other: &AltMap) {
        self.check_same(other);
        scalar::add_scaled(&mut self.coeffs, c, &other.coeffs);
    }

    pub fn is_zero(&self) -> bool {
        scalar::is_zero_vec(&self.coeffs)
    }

    fn check_same(&self, other: &AltMap) {
        assert_eq!(
            (self.arity, self.src_dim, self.tgt_dim),
            (other.arity, other.src_dim, other.tgt_dim),
            "alternating maps of different shapes"
        );
    }

    /// Basis element: the map sending the `k`-th coordinate slot to 1.
    pub fn unit(arity: usize, src_dim: usize, tgt_dim: usize, k: usize) -> Self {
        let mut f = AltMap::zero(arity, src_dim, tgt_dim);
        f.coeffs[k] = Scalar::from_integer(1.into());
        f
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut coeffs = serde_json::Map::new();
        for t in combinations_colex(self.src_dim, self.arity) {
            let v = self.value(&t);
            if scalar::is_zero_vec(v) {
                continue;
            }
            let key: Vec<String> = t.iter().map(|i| (i + 1).to_string()).collect();
            coeffs.insert(key.join("<"), scalar::vec_to_json(v));
        }
        serde_json::json!({ "arity": self.arity, "coeffs": coeffs })
    }

    pub fn from_json(v: &serde_json::Value, src_dim: usize, tgt_dim: usize) -> Result<AltMap> {
        let arity = v
            .get("arity")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::Parse("cochain needs integer \"arity\"".into()))? as usize;
        let mut f = AltMap::zero(arity, src_dim, tgt_dim);
        let empty = serde_json::Map::new();
        let coeffs = match v.get("coeffs") {
            None => &empty,
            Some(c) => c.as_object().ok_or_else(|| Error::Parse("\"coeffs\" must be an object".into()))?,
        };
        for (key, val) in coeffs {
            let idx: Vec<usize> = if key.is_empty() {
                Vec::new()
            } else {
                key.split('<')
                    .map(|s| s.trim().parse::<usize>().ok().filter(|&i| i >= 1 && i <= src_dim).map(|i| i - 1))
                    .collect::<Option<_>>()
                    .ok_or_else(|| Error::Parse(format!("bad cochain key {key:?}")))?
            };
            if idx.len() != arity || idx.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Parse(format!("cochain key {key:?} must be {arity} increasing indices")));
            }
            let vec = scalar::vec_from_json(val)?;
            if vec.len() != tgt_dim {
                return Err(Error::Parse(format!("cochain value for {key:?} has length {}", vec.len())));
            }
            f.value_mut(&idx).clone_from_slice(&vec);
        }
        Ok(f)
    }
}

/// Checked multilinear evaluation of an alternating map.
pub fn evaluate_alt(f: &AltMap, args: &[Vec<Scalar>]) -> Result<Vec<Scalar>> {
    if args.len() != f.arity {
        return Err(Error::ArityMismatch { expected: f.arity, got: args.len() });
    }
    if let Some(a) = args.iter().find(|a| a.len() != f.src_dim) {
        return Err(Error::DimensionMismatch(format!("argument of length {} for source dim {}", a.len(), f.src_dim)));
    }
    let refs: Vec<&[Scalar]> = args.iter().map(Vec::as_slice).collect();
    let mut out = scalar::zeros(f.tgt_dim);
    f.eval_into(&refs, &scalar::one(), &mut out);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedVectorSpace {
    pub components: Vec<(i32, usize)>,
}

impl GradedVectorSpace {
    pub fn new(components: Vec<(i32, usize)>) -> Result<Self> {
        let mut degs: Vec<i32> = components.iter().map(|c| c.0).collect();
        degs.sort_unstable();
        if degs.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Parse("graded space degrees must be distinct".into()));
        }
        Ok(GradedVectorSpace { components })
    }

    pub fn dim(&self) -> usize {
        self.components.iter().map(|c| c.1).sum()
    }

    /// Degree of each basis vector, components in the given order.
    pub fn basis_degrees(&self) -> Vec<i32> {
        self.components.iter().flat_map(|&(d, n)| std::iter::repeat_n(d, n)).collect()
    }

    /// Suspension `s`: degree shifts down by one.
    pub fn suspended(&self) -> GradedVectorSpace {
        GradedVectorSpace { components: self.components.iter().map(|&(d, n)| (d - 1, n)).collect() }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "components": self.components.iter().map(|&(d, n)| vec![d as i64, n as i64]).collect::<Vec<_>>() })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let comps = v
            .get("components")
            .and_then(serde_json::Value::as_array)
            .ok_or_else(|| Error::Parse("graded space needs \"components\"".into()))?;
        let mut out = Vec::new();
        for c in comps {
            let pair = c.as_array().filter(|a| a.len() == 2).ok_or_else(|| Error::Parse(format!("bad component {c}")))?;
            let d = pair[0].as_i64().ok_or_else(|| Error::Parse(format!("bad degree {}", pair[0])))?;
            let n = pair[1].as_u64().ok_or_else(|| Error::Parse(format!("bad dim {}", pair[1])))?;
            out.push((d as i32, n as usize));
        }
        GradedVectorSpace::new(out)
    }
}

/// Degree of a vector if it is homogeneous (`None` for 0 means any degree).
pub fn vector_degree(degs: &[i32], v: &[Scalar]) -> Result<Option<i32>> {
    let mut d = None;
    for (i, x) in v.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        match d {
            None => d = Some(degs[i]),
            Some(e) if e != degs[i] => return Err(Error::NonHomogeneousInput),
            _ => {}
        }
    }
    Ok(d)
}

/// A graded-symmetric map `Sⁿ(l) → l` of a fixed degree, stored sparsely on
/// weakly increasing basis tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedSymMap {
    pub degs: Vec<i32>,
    pub arity: usize,
    pub degree: i32,
    pub entries: BTreeMap<Vec<usize>, Vec<Scalar>>,
}

impl GradedSymMap {
    pub fn zero(degs: Vec<i32>, arity: usize, degree: i32) -> Self {
        GradedSymMap { degs, arity, degree, entries: BTreeMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.degs.len()
    }

    /// Degree of the output on a basis tuple.
    pub fn out_degree(&self, idx: &[usize]) -> i32 {
        idx.iter().map(|&i| self.degs[i]).sum::<i32>() + self.degree
    }

    /// Value on an arbitrary basis tuple.
    pub fn on_basis(&self, idx: &[usize]) -> Option<Vec<Scalar>> {
        let mut t = idx.to_vec();
        let s = sort_graded(&mut t, &self.degs)?;
        self.entries.get(&t).map(|v| scalar::scaled(&s, v))
    }

    /// Adds `c · v` to f(e_idx); components of `v` of the wrong degree must vanish.
    pub fn add_on_basis(&mut self, idx: &[usize], c: &Scalar, v: &[Scalar]) {
        if c.is_zero() || scalar::is_zero_vec(v) {
            return;
        }
        let mut t = idx.to_vec();
        let Some(s) = sort_graded(&mut t, &self.degs) else { return };
        let od = self.out_degree(&t);
        debug_assert!(v.iter().enumerate().all(|(i, x)| x.is_zero() || self.degs[i] == od), "output degree");
        let n = self.dim();
        let slot = self.entries.entry(t.clone()).or_insert_with(|| scalar::zeros(n));
        scalar::add_scaled(slot, &(c * s), v);
        if scalar::is_zero_vec(slot) {
            self.entries.remove(&t);
        }
    }

    /// Sets the value on a basis tuple, overwriting.
    pub fn set(&mut self, idx: &[usize], v: Vec<Scalar>) {
        let mut t = idx.to_vec();
        let Some(s) = sort_graded(&mut t, &self.degs) else { return };
        self.entries.remove(&t);
        self.add_on_basis(&t, &s, &v);
    }

    /// Multilinear evaluation on homogeneous vectors: `acc += c · f(args)`.
    pub fn eval_into(&self, args: &[&[Scalar]], c: &Scalar, acc: &mut [Scalar]) {
        let mut idx = Vec::with_capacity(args.len());
        self.eval_rec(args, c, &mut idx, acc);
    }

    fn eval_rec(&self, args: &[&[Scalar]], c: &Scalar, idx: &mut Vec<usize>, acc: &mut [Scalar]) {
        let k = idx.len();
        if k == args.len() {
            if let Some(v) = self.on_basis(idx) {
                scalar::add_scaled(acc, c, &v);
            }
            return;
        }
        for (i, x) in args[k].iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            idx.push(i);
            self.eval_rec(args, &(c * x), idx, acc);
            idx.pop();
        }
    }

    pub fn add(&self, other: &GradedSymMap) -> GradedSymMap {
        let mut out = self.clone();
        out.add_assign_scaled(&scalar::one(), other);
        out
    }

    pub fn scale(&self, c: &Scalar) -> GradedSymMap {
        let mut out = GradedSymMap::zero(self.degs.clone(), self.arity, self.degree);
        if !c.is_zero() {
            for (k, v) in &self.entries {
                out.entries.insert(k.clone(), scalar::scaled(c, v));
            }
        }
        out
    }

    pub fn add_assign_scaled(&mut self, c: &Scalar, other: &GradedSymMap) {
        assert_eq!((self.arity, self.degree), (other.arity, other.degree), "graded maps of different shapes");
        for (k, v) in &other.entries {
            self.add_on_basis(k, c, v);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// All weakly increasing basis tuples on which a map of this shape can be nonzero.
    pub fn support_tuples(degs: &[i32], arity: usize, degree: i32) -> Vec<Vec<usize>> {
        let present: std::collections::BTreeSet<i32> = degs.iter().copied().collect();
        combinatorics::multisets(degs.len(), arity)
            .into_iter()
            .filter(|t| !t.windows(2).any(|w| w[0] == w[1] && degs[w[0]].rem_euclid(2) == 1))
            .filter(|t| present.contains(&(t.iter().map(|&i| degs[i]).sum::<i32>() + degree)))
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut coeffs = serde_json::Map::new();
        for (k, v) in &self.entries {
            let key: Vec<String> = k.iter().map(|i| (i + 1).to_string()).collect();
            coeffs.insert(key.join(","), scalar::vec_to_json(v));
        }
        serde_json::json!({ "arity": self.arity, "degree": self.degree, "coeffs": coeffs })
    }

    pub fn from_json(v: &serde_json::Value, degs: &[i32]) -> Result<GradedSymMap> {
        let get_i = |k: &str| v.get(k).and_then(serde_json::Value::as_i64).ok_or_else(|| Error::Parse(format!("graded map needs integer {k:?}")));
        let arity = get_i("arity")? as usize;
        let degree = get_i("degree")? as i32;
        let mut f = GradedSymMap::zero(degs.to_vec(), arity, degree);
        if let Some(c) = v.get("coeffs") {
            let obj = c.as_object().ok_or_else(|| Error::Parse("\"coeffs\" must be an object".into()))?;
            for (key, val) in obj {
                let idx: Vec<usize> = key
                    .split(',')
                    .map(|s| s.trim().parse::<usize>().ok().filter(|&i| i >= 1 && i <= degs.len()).map(|i| i - 1))
                    .collect::<Option<_>>()
                    .ok_or_else(|| Error::Parse(format!("bad graded key {key:?}")))?;
                if idx.len() != arity {
                    return Err(Error::ArityMismatch { expected: arity, got: idx.len() });
                }
                let vec = scalar::vec_from_json(val)?;
                if vec.len() != degs.len() {
                    return Err(Error::DimensionMismatch(format!("graded value for {key:?}")));
                }
                let od = idx.iter().map(|&i| degs[i]).sum::<i32>() + degree;
                if vec.iter().enumerate().any(|(i, x)| !x.is_zero() && degs[i] != od) {
                    return Err(Error::Parse(format!("value for {key:?} is not of degree {od}")));
                }
                f.set(&idx, vec);
            }
        }
        Ok(f)
    }
}

/// Checked graded evaluation on homogeneous arguments.
pub fn evaluate_graded(f: &GradedSymMap, args: &[Vec<Scalar>]) -> Result<Vec<Scalar>> {
    if args.len() != f.arity {
        return Err(Error::ArityMismatch { expected: f.arity, got: args.len() });
    }
    for a in args {
        if a.len() != f.dim() {
            return Err(Error::DimensionMismatch(format!("argument of length {}", a.len())));
        }
        vector_degree(&f.degs, a)?;
    }
    let refs: Vec<&[Scalar]> = args.iter().map(Vec::as_slice).collect();
    let mut out = scalar::zeros(f.dim());
    f.eval_into(&refs, &scalar::one(), &mut out);
    Ok(out)
}

/// Sign of `sv₁⊙…⊙svₙ ↦ ± sⁿ(v₁∧…∧vₙ)`: exponent Σ (n−i)|vᵢ|.
pub fn suspension_sign(v_degs: &[i32]) -> Scalar {
    let n = v_degs.len() as i64;
    let e: i64 = v_degs.iter().enumerate().map(|(i, &d)| (n - 1 - i as i64) * d as i64).sum();
    scalar::sign(e)
}

/// Transport `f: ∧ⁿg → g` (g in degree 0) to `Sⁿ(sg) → sg`, sg in degree −1.
pub fn suspend_alt_to_sym(f: &AltMap) -> GradedSymMap {
    assert_eq!(f.src_dim, f.tgt_dim, "suspension needs an endomorphism-type map");
    let degs = vec![-1; f.src_dim];
    let mut out = GradedSymMap::zero(degs, f.arity, f.arity as i32 - 1);
    for t in f.tuples() {
        let s = suspension_sign(&vec![0; t.len()]);
        out.add_on_basis(&t, &s, f.value(&t));
    }
    out
}

pub fn desuspend_sym_to_alt(f: &GradedSymMap) -> AltMap {
    assert!(f.degs.iter().all(|&d| d == -1), "desuspension expects sg concentrated in degree -1");
    let mut out = AltMap::zero(f.arity, f.dim(), f.dim());
    for (t, v) in &f.entries {
        let s = suspension_sign(&vec![0; t.len()]);
        scalar::add_scaled(out.value_mut(t), &s, v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, one};

    fn e(n: usize, i: usize) -> Vec<Scalar> {
        let mut v = scalar::zeros(n);
        v[i] = one();
        v
    }

    #[test]
    fn alternating_evaluation() {
        let mut f = AltMap::zero(2, 2, 2);
        f.value_mut(&[0, 1]).clone_from_slice(&e(2, 0));
        assert_eq!(evaluate_alt(&f, &[e(2, 1), e(2, 0)]).unwrap(), vec![int(-1), int(0)]);
        assert!(scalar::is_zero_vec(&evaluate_alt(&f, &[e(2, 1), e(2, 1)]).unwrap()));
        assert!(matches!(evaluate_alt(&f, &[e(2, 1)]), Err(Error::ArityMismatch { .. })));
    }

    #[test]
    fn graded_symmetry() {
        let degs = vec![0, 0, -1, -1];
        let mut f = GradedSymMap::zero(degs.clone(), 2, 1);
        f.set(&[2, 3], e(4, 2));
        assert_eq!(f.on_basis(&[3, 2]).unwrap(), scalar::scaled(&-one(), &e(4, 2)));
        let mut g = GradedSymMap::zero(degs, 2, 0);
        g.set(&[0, 1], e(4, 1));
        assert_eq!(g.on_basis(&[1, 0]).unwrap(), e(4, 1));
        assert!(evaluate_graded(&g, &[scalar::add(&e(4, 0), &e(4, 2)), e(4, 1)]).is_err());
    }

    #[test]
    fn suspension_round_trip() {
        let mut f = AltMap::zero(3, 3, 3);
        f.coeffs = (0..3).map(|i| int(i + 1)).collect();
        let s = suspend_alt_to_sym(&f);
        assert_eq!(s.degree, 2);
        assert_eq!(desuspend_sym_to_alt(&s), f);
    }

    #[test]
    fn json_round_trip() {
        let mut f = AltMap::zero(2, 3, 2);
        f.value_mut(&[0, 2]).clone_from_slice(&[scalar::frac(1, 2), int(-3)]);
        let back = AltMap::from_json(&f.to_json(), 3, 2).unwrap();
        assert_eq!(back, f);
    }
}
