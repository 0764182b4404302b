//! Nijenhuis–Richardson circle product and bracket.

use num_traits::Zero;

use crate::combinatorics::{koszul_exponent, shuffles, subsets_lex};
use crate::error::{Error, Result};
use crate::multilinear::{AltMap, GradedSymMap};
use crate::scalar;

/// NR degree of an alternating map: arity − 1.
pub fn degree(f: &AltMap) -> i64 {
    f.arity as i64 - 1
}

/// `f∘̄g(x) = Σ_{σ∈Sh(q+1,p)} sgn(σ) f(g(x_σ(1..q+1)), x_σ(q+2..))`.
pub fn circ_bar(f: &AltMap, g: &AltMap) -> Result<AltMap> {
    if g.tgt_dim != f.src_dim || g.src_dim != f.src_dim {
        return Err(Error::DimensionMismatch(format!(
            "circ_bar of ({}→{}) after ({}→{})",
            f.src_dim, f.tgt_dim, g.src_dim, g.tgt_dim
        )));
    }
    let n = f.src_dim;
    if f.arity == 0 {
        return Ok(AltMap::zero(g.arity.saturating_sub(1), n, f.tgt_dim));
    }
    let out_arity = f.arity + g.arity - 1;
    let mut out = AltMap::zero(out_arity, n, f.tgt_dim);
    if out_arity > n {
        return Ok(out);
    }
    let positions: Vec<usize> = (0..out_arity).collect();
    let subsets = subsets_lex(&positions, g.arity);
    let base = (g.arity * g.arity.saturating_sub(1) / 2) as i64;
    let mut args = vec![0usize; f.arity];
    for t in out.tuples() {
        let mut acc = scalar::zeros(f.tgt_dim);
        for s in &subsets {
            let inner: Vec<usize> = s.iter().map(|&p| t[p]).collect();
            let gv = g.value(&inner);
            if scalar::is_zero_vec(gv) {
                continue;
            }
            let sgn = scalar::sign(s.iter().sum::<usize>() as i64 - base);
            let mut r = 1;
            for (p, &x) in t.iter().enumerate() {
                if !s.contains(&p) {
                    args[r] = x;
                    r += 1;
                }
            }
            for (k, c) in gv.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                args[0] = k;
                if let Some((s2, fv)) = f.on_basis(&args) {
                    scalar::add_scaled(&mut acc, &(c * &sgn * s2), fv);
                }
            }
        }
        out.value_mut(&t).clone_from_slice(&acc);
    }
    Ok(out)
}

/// `[f,g] = f∘̄g − (−1)^{pq} g∘̄f`.
pub fn nr_bracket(f: &AltMap, g: &AltMap) -> Result<AltMap> {
    let a = circ_bar(f, g)?;
    let b = circ_bar(g, f)?;
    let s = scalar::sign(degree(f) * degree(g));
    Ok(a.sub(&b.scale(&s)))
}

/// Graded circle product: `Σ_{σ∈Sh(m,n−1)} ε(σ) f(g(v_σ(1..m)), v_σ(m+1..))`.
/// Components of arity above `max_arity` are dropped.
pub fn graded_circ_bar_truncated(f: &GradedSymMap, g: &GradedSymMap, max_arity: usize) -> Result<GradedSymMap> {
    if f.degs != g.degs {
        return Err(Error::DimensionMismatch("graded maps on different spaces".into()));
    }
    let degs = &f.degs;
    let degree = f.degree + g.degree;
    if f.arity == 0 {
        return Ok(GradedSymMap::zero(degs.clone(), g.arity.saturating_sub(1), degree));
    }
    let out_arity = f.arity + g.arity - 1;
    let mut out = GradedSymMap::zero(degs.clone(), out_arity, degree);
    if out_arity > max_arity || f.is_zero() || g.is_zero() {
        return Ok(out);
    }
    let shs = shuffles(&[g.arity, f.arity - 1]);
    let mut args = vec![0usize; f.arity];
    for t in GradedSymMap::support_tuples(degs, out_arity, degree) {
        let tdegs: Vec<i32> = t.iter().map(|&i| degs[i]).collect();
        let mut acc = scalar::zeros(degs.len());
        for s in &shs {
            let inner: Vec<usize> = s.images[..g.arity].iter().map(|&p| t[p]).collect();
            let Some(gv) = g.on_basis(&inner) else { continue };
            if scalar::is_zero_vec(&gv) {
                continue;
            }
            let eps = scalar::sign(koszul_exponent(&s.images, &tdegs));
            for (r, &p) in s.images[g.arity..].iter().enumerate() {
                args[r + 1] = t[p];
            }
            for (k, c) in gv.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                args[0] = k;
                if let Some(fv) = f.on_basis(&args) {
                    scalar::add_scaled(&mut acc, &(c * &eps), &fv);
                }
            }
        }
        out.add_on_basis(&t, &scalar::one(), &acc);
    }
    Ok(out)
}

pub fn graded_circ_bar(f: &GradedSymMap, g: &GradedSymMap) -> Result<GradedSymMap> {
    graded_circ_bar_truncated(f, g, usize::MAX)
}

pub fn graded_nr_bracket_truncated(f: &GradedSymMap, g: &GradedSymMap, max_arity: usize) -> Result<GradedSymMap> {
    let a = graded_circ_bar_truncated(f, g, max_arity)?;
    let b = graded_circ_bar_truncated(g, f, max_arity)?;
    let s = scalar::sign(f.degree as i64 * g.degree as i64);
    let mut out = a;
    if out.arity == b.arity {
        out.add_assign_scaled(&-s, &b);
    }
    Ok(out)
}

pub fn graded_nr_bracket(f: &GradedSymMap, g: &GradedSymMap) -> Result<GradedSymMap> {
    graded_nr_bracket_truncated(f, g, usize::MAX)
}
