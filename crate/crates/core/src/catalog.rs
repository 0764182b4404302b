//! Small Lie algebras with known endomorphisms, and seeded generators of
//! validated differential Lie algebras and differential representations.

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::lie::{adjoint_rep, residuals_vanish, unit, DiffLieAlgebra, DiffRepresentation, LieActTriple, LieAlgebra};
use crate::linalg::{self, Matrix};
use crate::scalar::{self, frac, int, Scalar};

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub const WEIGHTS: [(i64, i64); 5] = [(0, 1), (1, 1), (-1, 1), (2, 1), (1, 2)];

pub fn random_weight(rng: &mut impl Rng) -> Scalar {
    let (p, q) = WEIGHTS[rng.gen_range(0..WEIGHTS.len())];
    frac(p, q)
}

pub fn small(rng: &mut impl Rng, r: i64) -> Scalar {
    int(rng.gen_range(-r..=r))
}

pub fn random_vec(rng: &mut impl Rng, n: usize, r: i64) -> Vec<Scalar> {
    (0..n).map(|_| small(rng, r)).collect()
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, r: i64) -> Matrix {
    Matrix { rows, cols, entries: random_vec(rng, rows * cols, r) }
}

/// Unipotent-times-permutation integer matrix; always invertible.
pub fn random_invertible(rng: &mut impl Rng, n: usize) -> Matrix {
    let mut l = Matrix::identity(n);
    let mut u = Matrix::identity(n);
    for i in 0..n {
        for j in 0..i {
            l.set(i, j, small(rng, 1));
            u.set(j, i, small(rng, 1));
        }
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut p = Matrix::zeros(n, n);
    for (i, &j) in perm.iter().enumerate() {
        p.set(i, j, int(1));
    }
    p.mul(&l).mul(&u)
}

fn c(v: &[i64]) -> Vec<Scalar> {
    v.iter().map(|&x| int(x)).collect()
}

pub fn aff1() -> LieAlgebra {
    LieAlgebra::from_constants(2, &[(0, 1, c(&[0, 1]))])
}

pub fn heisenberg() -> LieAlgebra {
    LieAlgebra::from_constants(3, &[(0, 1, c(&[0, 0, 1]))])
}

/// Basis (h, e, f).
pub fn sl2() -> LieAlgebra {
    LieAlgebra::from_constants(3, &[(0, 1, c(&[0, 2, 0])), (0, 2, c(&[0, 0, -2])), (1, 2, c(&[1, 0, 0]))])
}

pub fn so3() -> LieAlgebra {
    LieAlgebra::from_constants(3, &[(0, 1, c(&[0, 0, 1])), (1, 2, c(&[1, 0, 0])), (0, 2, c(&[0, -1, 0]))])
}

/// sl₂ with `d = Id` of weight −1; `H̃²(g, ad) = 0`.
pub fn rigid_sl2() -> DiffLieAlgebra {
    DiffLieAlgebra::new(sl2(), Matrix::identity(3), int(-1))
}

/// `[e1,e2]=e3, [e1,e3]=e4`.
pub fn filiform4() -> LieAlgebra {
    LieAlgebra::from_constants(4, &[(0, 1, c(&[0, 0, 1, 0])), (0, 2, c(&[0, 0, 0, 1]))])
}

/// `[e1,e2]=e2, [e1,e3]=e3`.
pub fn r3() -> LieAlgebra {
    LieAlgebra::from_constants(3, &[(0, 1, c(&[0, 1, 0])), (0, 2, c(&[0, 0, 1]))])
}

/// `exp(N)` for nilpotent `N`.
pub fn exp_nilpotent(n: &Matrix) -> Matrix {
    let mut acc = Matrix::identity(n.rows);
    let mut term = Matrix::identity(n.rows);
    for k in 1..=n.rows {
        term = term.mul(n).scale(&frac(1, k as i64));
        if term.is_zero() {
            break;
        }
        acc = acc.add(&term);
    }
    acc
}

fn is_nilpotent(m: &Matrix) -> bool {
    let mut p = m.clone();
    for _ in 0..m.rows {
        p = p.mul(m);
    }
    p.is_zero()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Abelian(usize),
    Aff1,
    Heisenberg,
    Sl2,
    So3,
    Filiform4,
    R3,
}

/// A catalog algebra as a direct sum of kinds.
#[derive(Clone, Debug)]
pub struct Entry {
    pub parts: Vec<Kind>,
}

fn kind_algebra(k: Kind) -> LieAlgebra {
    match k {
        Kind::Abelian(n) => LieAlgebra::abelian(n),
        Kind::Aff1 => aff1(),
        Kind::Heisenberg => heisenberg(),
        Kind::Sl2 => sl2(),
        Kind::So3 => so3(),
        Kind::Filiform4 => filiform4(),
        Kind::R3 => r3(),
    }
}

fn kind_endomorphism(k: Kind, rng: &mut impl Rng) -> Matrix {
    let g = kind_algebra(k);
    let n = g.dim;
    let roll = rng.gen_range(0..10);
    if roll == 0 {
        return Matrix::identity(n);
    }
    if roll == 1 {
        return Matrix::zeros(n, n);
    }
    match k {
        Kind::Abelian(n) => random_matrix(rng, n, n, 2),
        Kind::Aff1 => {
            if rng.gen_bool(0.7) {
                let cc = small(rng, 2);
                Matrix::from_rows(vec![vec![int(1), int(0)], vec![small(rng, 2), cc]])
            } else {
                Matrix::from_rows(vec![vec![small(rng, 2), int(0)], vec![small(rng, 2), int(0)]])
            }
        }
        Kind::Heisenberg => {
            let a = random_matrix(rng, 3, 2, 2);
            let det = a.get(0, 0) * a.get(1, 1) - a.get(1, 0) * a.get(0, 1);
            let mut m = Matrix::zeros(3, 3);
            for i in 0..3 {
                for j in 0..2 {
                    m.set(i, j, a.get(i, j).clone());
                }
            }
            m.set(2, 2, det);
            m
        }
        Kind::Sl2 => {
            let mut m = Matrix::identity(3);
            for _ in 0..rng.gen_range(1..=3) {
                let f = match rng.gen_range(0..3) {
                    0 => exp_nilpotent(&g.ad(&unit(3, 1)).scale(&small(rng, 2))),
                    1 => exp_nilpotent(&g.ad(&unit(3, 2)).scale(&small(rng, 2))),
                    _ => {
                        let cc = [int(2), int(-1), frac(1, 2), int(3)][rng.gen_range(0..4)].clone();
                        Matrix::diagonal(&[int(1), cc.clone(), cc.recip()])
                    }
                };
                m = m.mul(&f);
            }
            m
        }
        Kind::So3 => {
            let (a, b, cc) = (small(rng, 2), small(rng, 2), small(rng, 2));
            let skew = Matrix::from_rows(vec![
                vec![int(0), -a.clone(), b.clone()],
                vec![a, int(0), -cc.clone()],
                vec![-b, cc, int(0)],
            ]);
            let i = Matrix::identity(3);
            let inv = linalg::inverse(&i.add(&skew)).expect("I + skew is invertible");
            i.sub(&skew).mul(&inv)
        }
        Kind::Filiform4 | Kind::R3 => {
            if k == Kind::Filiform4 && rng.gen_bool(0.3) {
                let u = [int(0), small(rng, 2), small(rng, 2), small(rng, 2)];
                let v = [int(0), small(rng, 2), small(rng, 2), small(rng, 2)];
                let mut m = Matrix::zeros(4, 4);
                m.set_column(0, &u);
                m.set_column(1, &v);
                return m;
            }
            let mut m = if k == Kind::Filiform4 {
                let (a, b) = ([int(1), int(2), int(-1)][rng.gen_range(0..3)].clone(), [int(1), int(-2), int(3)][rng.gen_range(0..3)].clone());
                Matrix::diagonal(&[a.clone(), b.clone(), &a * &b, &a * &a * &b])
            } else {
                Matrix::identity(3)
            };
            for _ in 0..2 {
                let x = random_vec(rng, n, 1);
                let ad = g.ad(&x);
                if is_nilpotent(&ad) {
                    m = m.mul(&exp_nilpotent(&ad));
                }
            }
            m
        }
    }
}

impl Entry {
    pub fn algebra(&self) -> LieAlgebra {
        let mut it = self.parts.iter();
        let mut g = kind_algebra(*it.next().expect("nonempty entry"));
        for &k in it {
            g = g.direct_sum(&kind_algebra(k));
        }
        g
    }

    pub fn dim(&self) -> usize {
        self.algebra().dim
    }

    /// A random Lie algebra endomorphism (block diagonal, composed a few times).
    pub fn endomorphism(&self, rng: &mut impl Rng) -> Matrix {
        let mut total = Matrix::identity(self.dim());
        for _ in 0..rng.gen_range(1..=2) {
            let blocks: Vec<Matrix> = self.parts.iter().map(|&k| kind_endomorphism(k, rng)).collect();
            let mut m = blocks[0].clone();
            for b in &blocks[1..] {
                m = Matrix::block(&m, &Matrix::zeros(m.rows, b.cols), &Matrix::zeros(b.rows, m.cols), b);
            }
            total = total.mul(&m);
        }
        total
    }
}

pub fn entries(max_dim: usize) -> Vec<Entry> {
    use Kind::*;
    let all = vec![
        vec![Abelian(1)],
        vec![Abelian(2)],
        vec![Aff1],
        vec![Abelian(3)],
        vec![Heisenberg],
        vec![Sl2],
        vec![So3],
        vec![R3],
        vec![Aff1, Abelian(1)],
        vec![Filiform4],
        vec![Aff1, Aff1],
        vec![Heisenberg, Abelian(1)],
        vec![Sl2, Abelian(1)],
        vec![Aff1, Abelian(2)],
    ];
    all.into_iter().map(|parts| Entry { parts }).filter(|e| e.dim() <= max_dim).collect()
}

/// Matrix of the linear map `D ↦ (weighted-derivation residual of D at λ = 0)`.
fn derivation_system(g: &LieAlgebra) -> Matrix {
    let n = g.dim;
    let cols: Vec<Vec<Scalar>> = (0..n * n)
        .map(|k| {
            let mut d = Matrix::zeros(n, n);
            d.entries[k] = int(1);
            DiffLieAlgebra::new(g.clone(), d, int(0)).weighted_derivation_residual().into_iter().flat_map(|(_, v)| v).collect()
        })
        .collect();
    let rows = cols.first().map_or(0, Vec::len);
    Matrix::from_columns(rows, &cols)
}

pub fn random_combination(rng: &mut impl Rng, basis: &[Vec<Scalar>], len: usize) -> Vec<Scalar> {
    let mut v = scalar::zeros(len);
    for b in basis {
        scalar::add_scaled(&mut v, &small(rng, 2), b);
    }
    v
}

/// Random weight-λ operator on an entry's algebra, before basis change.
fn random_operator(rng: &mut impl Rng, e: &Entry, g: &LieAlgebra, weight: &Scalar) -> Matrix {
    let n = g.dim;
    if weight.is_zero() {
        let sys = derivation_system(g);
        let ker = if sys.rows == 0 { (0..n * n).map(|k| unit(n * n, k)).collect() } else { linalg::kernel_basis(&sys) };
        Matrix { rows: n, cols: n, entries: random_combination(rng, &ker, n * n) }
    } else {
        e.endomorphism(rng).sub(&Matrix::identity(n)).scale(&weight.recip())
    }
}

/// A validated differential Lie algebra with a random basis change applied.
pub fn random_diff_lie(rng: &mut impl Rng, max_dim: usize, weight: &Scalar) -> DiffLieAlgebra {
    let es = entries(max_dim);
    let e = &es[rng.gen_range(0..es.len())];
    diff_lie_from_entry(rng, e, weight)
}

pub fn diff_lie_from_entry(rng: &mut impl Rng, e: &Entry, weight: &Scalar) -> DiffLieAlgebra {
    let g = e.algebra();
    let d = random_operator(rng, e, &g, weight);
    let p = random_invertible(rng, g.dim);
    let pinv = linalg::inverse(&p).expect("invertible");
    let g2 = g.change_basis(&p).expect("invertible");
    let a = DiffLieAlgebra::new(g2, pinv.mul(&d).mul(&p), weight.clone());
    debug_assert!(a.is_valid());
    a
}

fn stacked(blocks: &[Matrix]) -> Matrix {
    let cols = blocks[0].cols;
    let mut entries = Vec::new();
    for b in blocks {
        entries.extend(b.entries.iter().cloned());
    }
    Matrix { rows: blocks.iter().map(|b| b.rows).sum(), cols, entries }
}

/// Operators `d_V` making `(V, ρ, d_V)` a differential representation, as
/// an affine family `particular + span(kernel)`; `None` if no solution.
pub fn compatible_operators(a: &DiffLieAlgebra, rho: &[Matrix]) -> Option<(Matrix, Vec<Matrix>)> {
    let m = rho.first().map_or(0, |r| r.rows);
    let n = a.dim();
    let rho_of = |x: &[Scalar]| {
        let mut out = Matrix::zeros(m, m);
        for (c, r) in x.iter().zip(rho) {
            scalar::add_scaled(&mut out.entries, c, &r.entries);
        }
        out
    };
    let lam = &a.weight;
    let mut phi_rho = Vec::new();
    for i in 0..n {
        let mut x = unit(n, i);
        scalar::add_scaled(&mut x, lam, &a.d.column(i));
        phi_rho.push(rho_of(&x));
    }
    // columns of the linear map T ↦ (T ρ_i − ρ'_i T)_i
    let cols: Vec<Vec<Scalar>> = (0..m * m)
        .map(|k| {
            let mut t = Matrix::zeros(m, m);
            t.entries[k] = int(1);
            let blocks: Vec<Matrix> = (0..n).map(|i| t.mul(&rho[i]).sub(&phi_rho[i].mul(&t))).collect();
            if blocks.is_empty() {
                Vec::new()
            } else {
                stacked(&blocks).entries
            }
        })
        .collect();
    let rows = cols.first().map_or(0, Vec::len);
    let sys = Matrix::from_columns(rows, &cols);
    let as_mat = |v: Vec<Scalar>| Matrix { rows: m, cols: m, entries: v };
    let kernel: Vec<Matrix> = if rows == 0 { (0..m * m).map(|k| as_mat(unit(m * m, k))).collect() } else { linalg::kernel_basis(&sys).into_iter().map(as_mat).collect() };
    if lam.is_zero() {
        // T ρ_i − ρ_i T = ρ(d e_i)
        let rhs: Vec<Scalar> = (0..n).flat_map(|i| rho_of(&a.d.column(i)).entries).collect();
        let part = if rows == 0 { vec![] } else { linalg::solve(&sys, &rhs)? };
        Some((if rows == 0 { Matrix::zeros(m, m) } else { as_mat(part) }, kernel))
    } else {
        // ψ = Id + λ d_V intertwines ρ and ρ∘φ; d_V = (ψ − Id)/λ
        let inv = lam.recip();
        Some((Matrix::identity(m).scale(&-inv.clone()), kernel.into_iter().map(|k| k.scale(&inv)).collect()))
    }
}

pub fn coadjoint(g: &LieAlgebra) -> Vec<Matrix> {
    (0..g.dim).map(|i| g.ad(&unit(g.dim, i)).transpose().neg()).collect()
}

/// A random validated differential representation of `a`.
pub fn random_diff_rep(rng: &mut impl Rng, a: &DiffLieAlgebra) -> DiffRepresentation {
    let n = a.dim();
    let ad: Vec<Matrix> = adjoint_rep(a).rho;
    let choice = rng.gen_range(0..4);
    let rho: Vec<Matrix> = match choice {
        0 => ad,
        1 => coadjoint(&a.algebra),
        2 => {
            let k = rng.gen_range(1..=2);
            vec![Matrix::zeros(k, k); n]
        }
        _ => ad.iter().map(|r| Matrix::block(r, &Matrix::zeros(n, 1), &Matrix::zeros(1, n), &Matrix::zeros(1, 1))).collect(),
    };
    let m = rho[0].rows;
    let rep = match compatible_operators(a, &rho) {
        Some((part, ker)) => {
            let mut dv = part;
            for k in &ker {
                dv = dv.add(&k.scale(&small(rng, 2)));
            }
            DiffRepresentation { space_dim: m, rho, dv }
        }
        None => DiffRepresentation::trivial(n, random_matrix(rng, 1, 1, 2)),
    };
    debug_assert!(rep.is_valid_over(a));
    rep
}

/// The adjoint representation, or a random one, with equal odds.
pub fn random_coefficients(rng: &mut impl Rng, a: &DiffLieAlgebra) -> DiffRepresentation {
    if rng.gen_bool(0.5) {
        adjoint_rep(a)
    } else {
        random_diff_rep(rng, a)
    }
}

pub fn is_valid_pair(a: &DiffLieAlgebra, rep: &DiffRepresentation) -> bool {
    a.is_valid() && residuals_vanish(&rep.homomorphism_residual(&a.algebra)) && residuals_vanish(&rep.compatibility_residual(a))
}

/// A LieAct triple with a relative operator of weight λ: the adjoint action with a
/// differential operator, a crossed homomorphism into an abelian h, or a trivial action
/// with `λD` a homomorphism.
pub fn random_relative(rng: &mut impl Rng, weight: &Scalar) -> (LieActTriple, Matrix) {
    match rng.gen_range(0..3) {
        0 => {
            let a = random_diff_lie(rng, 3, weight);
            let rho = adjoint_rep(&a).rho;
            (LieActTriple { g: a.algebra.clone(), h: a.algebra, rho }, a.d)
        }
        1 => {
            let a = random_diff_lie(rng, 2, &Scalar::zero());
            let rep = random_diff_rep(rng, &a);
            let m = rep.space_dim;
            let bare = DiffRepresentation { space_dim: m, rho: rep.rho.clone(), dv: Matrix::zeros(m, m) };
            let d1 = crate::cohomology::ce_differential(&a, &bare, 1);
            let z = random_combination(rng, &linalg::kernel_basis(&d1), d1.cols);
            let d = crate::multilinear::AltMap::from_coords(1, a.dim(), m, z).to_matrix();
            (LieActTriple { g: a.algebra, h: LieAlgebra::abelian(m), rho: rep.rho }, d)
        }
        _ => {
            let es = entries(3);
            let e = &es[rng.gen_range(0..es.len())];
            let g = e.algebra();
            let n = g.dim;
            let rho = vec![Matrix::zeros(n, n); n];
            let d = if weight.is_zero() {
                let brackets: Vec<Vec<Scalar>> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| g.bracket_basis(i, j)).collect();
                let ann = if brackets.is_empty() { (0..n).map(|k| unit(n, k)).collect() } else { linalg::kernel_basis(&Matrix::from_columns(n, &brackets).transpose()) };
                let rows: Vec<Vec<Scalar>> = (0..n).map(|_| random_combination(rng, &ann, n)).collect();
                Matrix::from_rows(rows)
            } else {
                e.endomorphism(rng).scale(&weight.recip())
            };
            (LieActTriple { g: g.clone(), h: g, rho }, d)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_algebras_are_lie() {
        for e in entries(4) {
            assert!(residuals_vanish(&e.algebra().jacobi_residual()), "{:?}", e.parts);
        }
    }

    #[test]
    fn endomorphisms_preserve_brackets() {
        let mut r = rng(7);
        for e in entries(4) {
            let g = e.algebra();
            for _ in 0..5 {
                let phi = e.endomorphism(&mut r);
                for i in 0..g.dim {
                    for j in i + 1..g.dim {
                        let lhs = phi.apply(&g.bracket_basis(i, j));
                        let rhs = g.bracket_vec(&phi.column(i), &phi.column(j));
                        assert_eq!(lhs, rhs, "{:?}", e.parts);
                    }
                }
            }
        }
    }

    #[test]
    fn generated_pairs_are_valid() {
        let mut r = rng(11);
        for _ in 0..40 {
            let w = random_weight(&mut r);
            let a = random_diff_lie(&mut r, 4, &w);
            assert!(a.is_valid());
            let rep = random_diff_rep(&mut r, &a);
            assert!(is_valid_pair(&a, &rep));
        }
    }

    #[test]
    fn relative_operators_are_valid() {
        let mut r = rng(12);
        for _ in 0..30 {
            let w = random_weight(&mut r);
            let (t, d) = random_relative(&mut r, &w);
            assert!(t.lieact_residuals().vanishes());
            assert!(residuals_vanish(&t.relative_diff_residual(&d, &w).unwrap()));
        }
    }
}
