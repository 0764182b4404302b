//! Shuffles, pointed shuffles, signatures and Koszul signs.
//!
//! Permutations are stored 0-based: `images[k] = σ(k+1) − 1`.

use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    pub images: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation { images: (0..n).collect() }
    }

    pub fn new(images: Vec<usize>) -> Self {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            assert!(i < images.len() && !seen[i], "not a permutation: {images:?}");
            seen[i] = true;
        }
        Permutation { images }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// `(self ∘ other)(k) = self(other(k))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation { images: other.images.iter().map(|&k| self.images[k]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (k, &i) in self.images.iter().enumerate() {
            inv[i] = k;
        }
        Permutation { images: inv }
    }

    fn inversion_parity(&self) -> usize {
        let mut count = 0;
        for a in 0..self.len() {
            for b in a + 1..self.len() {
                if self.images[a] > self.images[b] {
                    count += 1;
                }
            }
        }
        count
    }
}

pub fn signature(sigma: &Permutation) -> Scalar {
    scalar::sign(sigma.inversion_parity() as i64)
}

/// Parity exponent of the Koszul sign; `degs[i]` is the degree of `x_{i+1}`.
pub fn koszul_exponent(images: &[usize], degs: &[i32]) -> i64 {
    let mut e = 0i64;
    for a in 0..images.len() {
        let da = degs[images[a]] as i64;
        if da % 2 == 0 {
            continue;
        }
        for b in a + 1..images.len() {
            if images[a] > images[b] {
                e += da * degs[images[b]] as i64;
            }
        }
    }
    e
}

/// ε(σ; x₁..xₙ): `x₁⊙…⊙xₙ = ε(σ) x_{σ(1)}⊙…⊙x_{σ(n)}`.
pub fn koszul_sign(sigma: &Permutation, degs: &[i32]) -> Result<Scalar> {
    if sigma.len() != degs.len() {
        return Err(Error::LengthMismatch(sigma.len(), degs.len()));
    }
    Ok(scalar::sign(koszul_exponent(&sigma.images, degs)))
}

pub fn chi_sign(sigma: &Permutation, degs: &[i32]) -> Result<Scalar> {
    Ok(koszul_sign(sigma, degs)? * signature(sigma))
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

pub fn multinomial(blocks: &[usize]) -> usize {
    let mut n = 0;
    let mut acc = 1;
    for &b in blocks {
        n += b;
        acc *= binomial(n, b);
    }
    acc
}

/// k-subsets of `items` in lexicographic order.
pub fn subsets_lex(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn go(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        let need = k - cur.len();
        for i in start..items.len() {
            if items.len() - i < need {
                break;
            }
            cur.push(items[i]);
            go(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= items.len() {
        go(items, k, 0, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

/// (i₁,…,i_r)-shuffles, lexicographic by the position subset of each block.
pub fn shuffles(blocks: &[usize]) -> Vec<Permutation> {
    let n: usize = blocks.iter().sum();
    let mut out = Vec::with_capacity(multinomial(blocks));
    let mut images = Vec::with_capacity(n);
    fn go(blocks: &[usize], remaining: Vec<usize>, images: &mut Vec<usize>, out: &mut Vec<Permutation>) {
        match blocks.split_first() {
            None => out.push(Permutation { images: images.clone() }),
            Some((&b, rest)) => {
                for chosen in subsets_lex(&remaining, b) {
                    let left: Vec<usize> = remaining.iter().copied().filter(|x| !chosen.contains(x)).collect();
                    let len = images.len();
                    images.extend_from_slice(&chosen);
                    go(rest, left, images, out);
                    images.truncate(len);
                }
            }
        }
    }
    go(blocks, (0..n).collect(), &mut images, &mut out);
    out
}

/// Shuffles whose block leaders increase: σ(1) < σ(i₁+1) < σ(i₁+i₂+1) < ….
pub fn pointed_shuffles(blocks: &[usize]) -> Vec<Permutation> {
    assert!(blocks.iter().all(|&b| b >= 1), "pointed shuffles need nonempty blocks");
    let starts = block_starts(blocks);
    shuffles(blocks)
        .into_iter()
        .filter(|s| starts.windows(2).all(|w| s.images[w[0]] < s.images[w[1]]))
        .collect()
}

pub fn block_starts(blocks: &[usize]) -> Vec<usize> {
    let mut acc = 0;
    blocks
        .iter()
        .map(|&b| {
            let s = acc;
            acc += b;
            s
        })
        .collect()
}

/// Compositions of `t` into `parts` positive integers.
pub fn compositions(t: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if t == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 1..=t {
        if t - first < parts - 1 {
            break;
        }
        for mut rest in compositions(t - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Sorts `idx` ascending. Returns the sign (signature) or `None` on a repeated index.
pub fn sort_alternating(idx: &mut [usize]) -> Option<Scalar> {
    let mut swaps = 0;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            swaps += 1;
            j -= 1;
        }
        if j > 0 && idx[j - 1] == idx[j] {
            return None;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some(scalar::sign(swaps))
}

/// Sorts `idx` ascending with the Koszul sign for basis degrees `deg`.
/// Returns `None` when an odd-degree index repeats.
pub fn sort_graded(idx: &mut [usize], deg: &[i32]) -> Option<Scalar> {
    let mut e = 0i64;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            e += (deg[idx[j - 1]] as i64) * (deg[idx[j]] as i64);
            idx.swap(j - 1, j);
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1] && deg[w[0]].rem_euclid(2) == 1) {
        return None;
    }
    Some(scalar::sign(e))
}

/// Colex rank of a strictly increasing tuple.
pub fn rank_colex(tuple: &[usize]) -> usize {
    tuple.iter().enumerate().map(|(i, &c)| binomial(c, i + 1)).sum()
}

/// All strictly increasing k-tuples from 0..n, in colex order.
pub fn combinations_colex(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = subsets_lex(&(0..n).collect::<Vec<_>>(), k);
    out.sort_by(|a, b| a.iter().rev().cmp(b.iter().rev()));
    out
}

/// Weakly increasing k-tuples from 0..n, lexicographic.
pub fn multisets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(n, k, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, k, 0, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, one};

    fn p(v: &[usize]) -> Permutation {
        Permutation::new(v.to_vec())
    }

    #[test]
    fn shuffle_examples() {
        assert_eq!(shuffles(&[1, 1]), vec![p(&[0, 1]), p(&[1, 0])]);
        assert_eq!(shuffles(&[2, 1]).len(), 3);
        assert_eq!(shuffles(&[0, 3]), vec![p(&[0, 1, 2])]);
        assert_eq!(shuffles(&[2, 2, 1]).len(), multinomial(&[2, 2, 1]));
    }

    #[test]
    fn pointed_shuffle_examples() {
        assert_eq!(pointed_shuffles(&[1, 1]), vec![p(&[0, 1])]);
        assert_eq!(pointed_shuffles(&[1, 1, 1]), vec![p(&[0, 1, 2])]);
        assert_eq!(pointed_shuffles(&[2, 2]).len(), 3);
    }

    #[test]
    fn signature_examples() {
        assert_eq!(signature(&p(&[0, 1, 2])), one());
        assert_eq!(signature(&p(&[1, 0, 2])), -one());
        assert_eq!(signature(&p(&[1, 2, 0])), one());
    }

    #[test]
    fn koszul_examples() {
        assert_eq!(koszul_sign(&p(&[2, 0, 1]), &[0, 0, 0]).unwrap(), one());
        assert_eq!(koszul_sign(&p(&[1, 0]), &[1, 1]).unwrap(), -one());
        assert_eq!(koszul_sign(&p(&[1, 0]), &[1, 2]).unwrap(), one());
        assert!(koszul_sign(&p(&[1, 0]), &[1]).is_err());
    }

    #[test]
    fn chi_examples() {
        assert_eq!(chi_sign(&p(&[0, 1]), &[3, 1]).unwrap(), one());
        assert_eq!(chi_sign(&p(&[1, 0]), &[0, 0]).unwrap(), -one());
        assert_eq!(chi_sign(&p(&[1, 0]), &[1, 1]).unwrap(), one());
    }

    #[test]
    fn colex_rank_matches_enumeration() {
        for n in 0..7 {
            for k in 0..=n {
                for (r, c) in combinations_colex(n, k).iter().enumerate() {
                    assert_eq!(rank_colex(c), r);
                }
            }
        }
    }

    #[test]
    fn sorting_signs() {
        let mut v = [2, 0, 1];
        assert_eq!(sort_alternating(&mut v), Some(one()));
        assert_eq!(v, [0, 1, 2]);
        assert_eq!(sort_alternating(&mut [1, 0]), Some(int(-1)));
        assert_eq!(sort_alternating(&mut [1, 1]), None);
        assert_eq!(sort_graded(&mut [1, 1], &[0, 0]), Some(one()));
        assert_eq!(sort_graded(&mut [1, 1], &[0, 1]), None);
        assert_eq!(sort_graded(&mut [1, 0], &[1, 1]), Some(-one()));
    }

    #[test]
    fn compositions_count() {
        assert_eq!(compositions(4, 2), vec![vec![1, 3], vec![2, 2], vec![3, 1]]);
        assert_eq!(compositions(0, 0), vec![Vec::<usize>::new()]);
        assert!(compositions(1, 2).is_empty());
    }
}
