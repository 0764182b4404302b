//! Acceptance suite: one PASS/FAIL line per criterion, exact arithmetic throughout.
//!
//! Exits nonzero if a criterion fails that is not listed in `KNOWN_RED`, or if a
//! known-red criterion unexpectedly passes.

use std::process::ExitCode;
use std::time::Instant;

use num_traits::{One, Zero};
use rand::Rng;

use difflie::catalog::{self, rng};
use difflie::cohomology::{self, CocyclePair};
use difflie::deformations::{self, FormalIso, TruncatedDeformation};
use difflie::extensions;
use difflie::homotopy::{self, Family, HomotopyDiffLie};
use difflie::lie::{adjoint_rep, residuals_vanish, unit, DiffLieAlgebra, DiffRepresentation};
use difflie::linalg::{self, Matrix};
use difflie::linfty::{self, bracket, BlockSpace, Element, LInftyAlgebra, Part, Rescaling};
use difflie::multilinear::AltMap;
use difflie::scalar::{self, frac, int, Scalar};

/// The inclusion of the relative structure into the absolute one is not a strict morphism.
const KNOWN_RED: &[usize] = &[9];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn weights() -> Vec<Scalar> {
    vec![int(0), int(1), int(-1), int(2), frac(1, 2)]
}

fn random_args(r: &mut impl Rng, s: &BlockSpace, k: usize, max_arity: usize) -> Vec<Element> {
    let degs: Vec<i32> = s.blocks.iter().filter(|b| b.arity <= max_arity).map(|b| b.degree).collect();
    (0..k)
        .map(|_| {
            let d = degs[r.gen_range(0..degs.len())];
            s.random_homogeneous(r, d, max_arity, 2)
        })
        .collect()
}

fn jacobi_holds<L: LInftyAlgebra>(l: &L, xs: &[Element]) -> bool {
    let refs: Vec<&Element> = xs.iter().collect();
    match linfty::generalized_jacobi_residual(l, &refs) {
        Ok(e) => e.is_zero(),
        Err(e) => {
            eprintln!("generalized Jacobi: {e}");
            false
        }
    }
}

fn square_zero(d_next: &Matrix, d: &Matrix) -> bool {
    d.rows == 0 || d_next.cols == 0 || d_next.mul(d).is_zero()
}

fn criterion_1() -> Outcome {
    let mut r = rng(101);
    let mut checks = 0;
    for k in 0..50 {
        let lam = weights()[k % 5].clone();
        let a = catalog::random_diff_lie(&mut r, 4, &lam);
        for rep in [adjoint_rep(&a), catalog::random_diff_rep(&mut r, &a)] {
            for n in 0..4 {
                let ce = square_zero(&cohomology::ce_differential(&a, &rep, n + 1), &cohomology::ce_differential(&a, &rep, n));
                let dop = square_zero(&cohomology::do_differential(&a, &rep, n + 1), &cohomology::do_differential(&a, &rep, n));
                let full = square_zero(&cohomology::difflie_differential(&a, &rep, n + 1), &cohomology::difflie_differential(&a, &rep, n));
                let comm = cohomology::cochain_map_defect(&a, &rep, n).is_zero();
                if !(ce && dop && full && comm) {
                    return outcome(false, format!("algebra {k}, degree {n}: ce {ce}, do {dop}, difflie {full}, chain map {comm}"));
                }
                checks += 4;
            }
        }
    }
    outcome(true, format!("50 algebras x 2 representations, {checks} identities through degree 4"))
}

fn perturb_matrix(r: &mut impl Rng, m: &Matrix) -> Matrix {
    let mut out = m.clone();
    let k = r.gen_range(0..m.entries.len());
    out.entries[k] += int(r.gen_range(1..=2));
    out
}

fn perturb_map(r: &mut impl Rng, f: &AltMap) -> AltMap {
    let mut out = f.clone();
    if !out.coeffs.is_empty() {
        let k = r.gen_range(0..out.coeffs.len());
        out.coeffs[k] += int(r.gen_range(1..=2));
    }
    out
}

fn criterion_2() -> Outcome {
    let mut r = rng(202);
    let (mut yes, mut no) = (0, 0);
    for k in 0..100 {
        let lam = weights()[k % 5].clone();
        let a = catalog::random_diff_lie(&mut r, 3, &lam);
        let (mut pi, mut d) = (a.algebra.bracket.clone(), a.d.clone());
        match k % 4 {
            1 => d = perturb_matrix(&mut r, &d),
            2 => pi = perturb_map(&mut r, &pi),
            3 => {
                d = perturb_matrix(&mut r, &d);
                pi = perturb_map(&mut r, &pi);
            }
            _ => {}
        }
        let mc = match linfty::mc_check_absolute(&pi, &d, &lam) {
            Ok(rep) => rep.is_mc(),
            Err(e) => return outcome(false, format!("sample {k}: {e}")),
        };
        let cand = DiffLieAlgebra::new(difflie::lie::LieAlgebra { dim: a.dim(), bracket: pi }, d, lam);
        let direct = residuals_vanish(&cand.algebra.jacobi_residual()) && residuals_vanish(&cand.weighted_derivation_residual());
        if mc != direct {
            return outcome(false, format!("sample {k}: MC {mc}, residuals vanish {direct}"));
        }
        if mc {
            yes += 1
        } else {
            no += 1
        }
    }
    outcome(yes > 0 && no > 0, format!("100 samples, {yes} MC and {no} non-MC, all agree"))
}

fn criterion_3() -> Outcome {
    let mut r = rng(303);
    let (mut yes, mut no) = (0, 0);
    for k in 0..100 {
        let lam = weights()[k % 5].clone();
        let (mut t, mut d) = catalog::random_relative(&mut r, &lam);
        match k % 4 {
            1 => d = perturb_matrix(&mut r, &d),
            2 => {
                let i = r.gen_range(0..t.rho.len());
                t.rho[i] = perturb_matrix(&mut r, &t.rho[i]);
            }
            3 => t.h.bracket = perturb_map(&mut r, &t.h.bracket),
            _ => {}
        }
        let mc = match linfty::mc_check_relative(&t, &d, &lam) {
            Ok(rep) => rep.is_mc(),
            Err(e) => return outcome(false, format!("sample {k}: {e}")),
        };
        let lie = residuals_vanish(&t.g.jacobi_residual()) && residuals_vanish(&t.h.jacobi_residual());
        let direct = lie && t.lieact_residuals().vanishes() && residuals_vanish(&t.relative_diff_residual(&d, &lam).unwrap());
        if mc != direct {
            return outcome(false, format!("sample {k}: MC {mc}, residuals vanish {direct}"));
        }
        if mc {
            yes += 1
        } else {
            no += 1
        }
    }
    outcome(yes > 0 && no > 0, format!("100 samples, {yes} MC and {no} non-MC, all agree"))
}

fn criterion_4() -> Outcome {
    let mut r = rng(404);
    let mut count = 0;
    for (i, lam) in weights().into_iter().enumerate() {
        let abs = linfty::absolute_structure(1 + i % 3, lam.clone());
        let (p, q) = [(1, 1), (1, 2), (2, 1)][i % 3];
        let rel = linfty::relative_structure(p, q, lam);
        for n in 1..=4 {
            let reps = if n == 4 { 2 } else { 4 };
            for _ in 0..reps {
                let xs = random_args(&mut r, abs.space(), n, 3);
                if !jacobi_holds(&abs, &xs) {
                    return outcome(false, format!("absolute, dim {}, n = {n}", 1 + i % 3));
                }
                let xs = random_args(&mut r, rel.space(), n, 3);
                if !jacobi_holds(&rel, &xs) {
                    return outcome(false, format!("relative ({p}, {q}), n = {n}"));
                }
                count += 2;
            }
        }
    }
    outcome(true, format!("{count} generalized Jacobi residuals, n <= 4, arity <= 3"))
}

fn basis_maps(arity: usize, n: usize) -> Vec<AltMap> {
    let len = AltMap::zero(arity, n, n).coeffs.len();
    (0..len).map(|k| AltMap::unit(arity, n, n, k)).collect()
}

fn all_basis_maps(n: usize) -> Vec<AltMap> {
    (0..=n).flat_map(|a| basis_maps(a, n)).collect()
}

fn key_zero(f: &AltMap, xis: &[&AltMap]) -> bool {
    linfty::key_formula_check(f, xis).map(|m| m.is_zero()).unwrap_or(false)
}

fn criterion_5() -> Outcome {
    let mut exhaustive = 0;
    for n in 1..=2 {
        let xs = all_basis_maps(n);
        for fa in 1..=n {
            for f in basis_maps(fa, n) {
                for x1 in &xs {
                    if !key_zero(&f, &[x1]) {
                        return outcome(false, format!("dim {n}, r = 1"));
                    }
                    exhaustive += 1;
                    if fa < 2 {
                        continue;
                    }
                    for x2 in &xs {
                        if !key_zero(&f, &[x1, x2]) {
                            return outcome(false, format!("dim {n}, r = 2"));
                        }
                        exhaustive += 1;
                    }
                }
            }
        }
    }
    let mut r = rng(505);
    for k in 0..200 {
        let fa = r.gen_range(1..=3);
        let rr = r.gen_range(1..=fa);
        let f = linfty::random_altmap(&mut r, fa, 3, 3, 2);
        let xis: Vec<AltMap> = (0..rr)
            .map(|_| {
                let a = r.gen_range(0..=3);
                linfty::random_altmap(&mut r, a, 3, 3, 2)
            })
            .collect();
        let refs: Vec<&AltMap> = xis.iter().collect();
        if !key_zero(&f, &refs) {
            return outcome(false, format!("dim 3 sample {k}"));
        }
    }
    let mut pairs = 0;
    for n in 2..=3 {
        for lam in weights() {
            let l = linfty::absolute_structure(n, lam.clone());
            let s = l.space();
            for pi in basis_maps(2, n) {
                for d in basis_maps(1, n) {
                    let x = s.element(&[(Part::M, &pi)]).unwrap();
                    let y = s.element(&[(Part::A, &d)]).unwrap();
                    let out = s.map_of(&bracket(&l, &[&x, &y, &y]), Part::A, 2, n, n);
                    for t in out.tuples() {
                        let mut want = scalar::zeros(n);
                        pi.eval_into(&[d.value(&[t[0]]), d.value(&[t[1]])], &(int(2) * &lam), &mut want);
                        if out.value(&t) != want.as_slice() {
                            return outcome(false, format!("l3 specialization, dim {n}, pair {t:?}"));
                        }
                        pairs += 1;
                    }
                }
            }
        }
    }
    outcome(true, format!("{exhaustive} basis cases (dims 1, 2), 200 dim-3 samples, l3 = 2λπ(Dx,Dy) on {pairs} basis pairs"))
}

fn criterion_6() -> Outcome {
    let mut r = rng(606);
    let mut checks = 0;
    for k in 0..20 {
        let lam = weights()[k % 5].clone();
        let a = catalog::random_diff_lie(&mut r, 3, &lam);
        let n = a.dim();
        for v in basis_maps(0, n) {
            let (x, y) = linfty::twist_bridge_residual(&a, &v, None).unwrap();
            if !(x.is_zero() && y.is_zero()) {
                return outcome(false, format!("algebra {k}, degree 0"));
            }
            checks += 1;
        }
        for deg in 1..=3 {
            let zf = AltMap::zero(deg, n, n);
            let zg = AltMap::zero(deg - 1, n, n);
            let cases = basis_maps(deg, n).into_iter().map(|f| (f, zg.clone())).chain(basis_maps(deg - 1, n).into_iter().map(|g| (zf.clone(), g)));
            for (f, g) in cases {
                let (x, y) = linfty::twist_bridge_residual(&a, &f, Some(&g)).unwrap();
                if !(x.is_zero() && y.is_zero()) {
                    return outcome(false, format!("algebra {k}, degree {deg}"));
                }
                checks += 1;
            }
        }
        let l = linfty::absolute_structure(n, lam.clone());
        let alpha = l.space().element(&[(Part::M, &a.algebra.bracket), (Part::A, &AltMap::from_matrix(&a.d))]).unwrap();
        let tw = linfty::twist(&l, alpha).unwrap();
        for (b, block) in l.space().blocks.iter().enumerate() {
            for i in block.admissible() {
                let x = l.space().unit(b, i);
                let y = bracket(&tw, &[&x]);
                if !bracket(&tw, &[&y]).is_zero() {
                    return outcome(false, format!("algebra {k}: twisted l1 squared on block {b}"));
                }
                checks += 1;
            }
        }
        let rep = catalog::random_diff_rep(&mut r, &a);
        for deg in 0..=2 {
            if !cohomology::embedding_commutator(&a, &rep, deg).is_zero() {
                return outcome(false, format!("algebra {k}: coefficient embedding, degree {deg}"));
            }
            checks += 1;
        }
    }
    outcome(true, format!("20 algebras, {checks} exact checks (bridge n <= 3, l1² = 0, embedding)"))
}

fn small_rep(r: &mut impl Rng, a: &DiffLieAlgebra) -> DiffRepresentation {
    loop {
        let rep = catalog::random_diff_rep(r, a);
        if rep.space_dim <= 2 {
            return rep;
        }
    }
}

fn random_cocycle(r: &mut impl Rng, a: &DiffLieAlgebra, rep: &DiffRepresentation) -> CocyclePair {
    let d2 = cohomology::difflie_differential(a, rep, 2);
    let z = catalog::random_combination(r, &linalg::kernel_basis(&d2), d2.cols);
    CocyclePair::from_coords(2, a.dim(), rep.space_dim, &z)
}

fn criterion_7() -> Outcome {
    let mut r = rng(707);
    let mut distinct = 0;
    for k in 0..24 {
        let lam = weights()[k % 5].clone();
        let a = catalog::random_diff_lie(&mut r, 3, &lam);
        let rep = small_rep(&mut r, &a);
        let c = random_cocycle(&mut r, &a, &rep);
        let e = match extensions::build_extension(&a, &rep, &c.f, &c.g) {
            Ok(e) => e,
            Err(err) => return outcome(false, format!("fixture {k}: {err}")),
        };
        let (rep2, c2) = extensions::extract_cocycle(&e).unwrap();
        if rep2 != rep || c2 != c {
            return outcome(false, format!("fixture {k}: round trip"));
        }
        let phi = catalog::random_matrix(&mut r, rep.space_dim, a.dim(), 2);
        let shifted = e.with_section(extensions::shifted_section(&e, &phi));
        let (_, c3) = extensions::extract_cocycle(&shifted).unwrap();
        let dphi = cohomology::difflie_apply_one(&a, &rep, &AltMap::from_matrix(&phi));
        if c3 != c.add(&dphi) {
            return outcome(false, format!("fixture {k}: section change is not the coboundary"));
        }
        let e3 = extensions::build_extension(&a, &rep, &c3.f, &c3.g).unwrap();
        match extensions::find_witness(&e3, &e).unwrap() {
            Some(w) if extensions::equivalence_witness(&e3, &e, &w) => {}
            _ => return outcome(false, format!("fixture {k}: cohomologous cocycles without witness")),
        }
        for z in cohomology::tilde_cohomology_basis(&a, &rep, 2) {
            let class = CocyclePair::from_coords(2, a.dim(), rep.space_dim, &z);
            let other = c.add(&class);
            let e4 = extensions::build_extension(&a, &rep, &other.f, &other.g).unwrap();
            if extensions::find_witness(&e4, &e).unwrap().is_some() || extensions::equivalence_witness(&e4, &e, &Matrix::zeros(rep.space_dim, a.dim())) {
                return outcome(false, format!("fixture {k}: witness for a nontrivial class"));
            }
            distinct += 1;
        }
    }
    outcome(distinct > 0, format!("24 fixtures, {distinct} non-cohomologous pairs without witness"))
}

fn criterion_8() -> Outcome {
    let mut r = rng(808);
    for k in 0..20 {
        let lam = weights()[k % 5].clone();
        let a = catalog::random_diff_lie(&mut r, 3, &lam);
        let rep = adjoint_rep(&a);
        let pair = if k % 2 == 0 { random_cocycle(&mut r, &a, &rep) } else { cohomology::random_pair(&mut r, 2, a.dim(), a.dim()) };
        let mut def = TruncatedDeformation::constant(&a, 1);
        def.mu[1] = pair.f.clone();
        def.d[1] = pair.g.to_matrix();
        let cocycle = cohomology::cocycle_residual(&a, &rep, &pair).unwrap().is_zero();
        match deformations::infinitesimal(&def) {
            Ok(inf) if cocycle && cohomology::cocycle_residual(&a, &rep, &inf).unwrap().is_zero() => {}
            Err(_) if !cocycle => {}
            _ => return outcome(false, format!("sample {k}: infinitesimal vs cocycle residual")),
        }
    }
    for k in 0..10 {
        let lam = weights()[k % 5].clone();
        let a = catalog::random_diff_lie(&mut r, 3, &lam);
        let Some(def) = deformations::random_order2(&mut r, &a) else { continue };
        let phi1 = catalog::random_matrix(&mut r, a.dim(), a.dim(), 2);
        let mut iso = FormalIso::single(a.dim(), 2, 1, phi1.clone());
        iso.phi[2] = catalog::random_matrix(&mut r, a.dim(), a.dim(), 1);
        let eq = deformations::apply_formal_iso(&def, &iso).unwrap();
        let diff = deformations::infinitesimal(&eq).unwrap().sub(&deformations::infinitesimal(&def).unwrap());
        let dphi = cohomology::difflie_apply_one(&a, &adjoint_rep(&a), &AltMap::from_matrix(&phi1));
        if !deformations::is_deformation(&eq) || diff != dphi {
            return outcome(false, format!("equivalence {k}: infinitesimals differ by a non-coboundary"));
        }
    }
    let a = catalog::rigid_sl2();
    let h2 = extensions::classify(&a, &adjoint_rep(&a)).unwrap();
    if h2 != 0 {
        return outcome(false, format!("fixture has dim H̃² = {h2}"));
    }
    let mut trivialized = 0;
    for k in 0..8 {
        let Some(def) = deformations::random_order2(&mut r, &a) else {
            return outcome(false, format!("rigid fixture sample {k}: order 2 obstructed"));
        };
        let mut cur = def.clone();
        let mut total = FormalIso::identity(3, 2);
        for _ in 0..def.order {
            match deformations::rigidify_step(&cur) {
                Ok((iso, next)) => {
                    total = total.compose(&iso);
                    cur = next;
                }
                Err(e) => return outcome(false, format!("rigid fixture sample {k}: {e}")),
            }
        }
        if !deformations::is_constant(&cur) || deformations::apply_formal_iso(&def, &total).unwrap() != cur {
            return outcome(false, format!("rigid fixture sample {k} not trivialized"));
        }
        trivialized += 1;
    }
    outcome(true, format!("20 order-1 samples, 10 equivalences, dim H̃²(sl2, ad) = 0 and {trivialized}/8 order-2 deformations trivialized"))
}

/// Coordinates of a relative element with at least two h-inputs, set to zero.
fn drop_hh(space: &BlockSpace, x: &Element, p: usize, w: usize) -> Element {
    let mut out = x.clone();
    for (b, block) in space.blocks.iter().enumerate() {
        if block.part != Part::M {
            continue;
        }
        let mut f = AltMap::from_coords(block.arity, w, w, out.parts[b].clone());
        for t in f.tuples() {
            if t.iter().filter(|&&i| i >= p).count() >= 2 {
                f.value_mut(&t).iter_mut().for_each(|c| *c = Scalar::zero());
            }
        }
        out.parts[b] = f.coeffs;
    }
    out
}

fn criterion_9() -> Outcome {
    let mut r = rng(909);
    let (mut yes, mut no) = (0, 0);
    for k in 0..100 {
        let lam = weights()[k % 5].clone();
        let (t, mut d) = catalog::random_relative(&mut r, &lam);
        if k % 2 == 1 {
            d = perturb_matrix(&mut r, &d);
        }
        let rel = residuals_vanish(&t.relative_diff_residual(&d, &lam).unwrap());
        let lifted = t.lift_tilde_d(&d, &lam);
        let abs = residuals_vanish(&lifted.weighted_derivation_residual());
        if rel != abs {
            return outcome(false, format!("lift sample {k}: relative {rel}, lifted {abs}"));
        }
        if rel {
            yes += 1
        } else {
            no += 1
        }
    }
    if yes == 0 || no == 0 {
        return outcome(false, "lift samples one-sided");
    }
    for n in 1..=3 {
        let lam = weights()[n].clone();
        let src = linfty::absolute_structure(n, lam.clone());
        let dst = linfty::relative_structure(n, n, lam);
        for k in 1..=3 {
            for _ in 0..3 {
                let mut xs = random_args(&mut r, src.space(), k, 2);
                for x in xs.iter_mut() {
                    for (b, block) in src.space().blocks.iter().enumerate() {
                        if block.arity == 0 {
                            x.parts[b] = scalar::zeros(block.dim);
                        }
                    }
                }
                let refs: Vec<&Element> = xs.iter().collect();
                if !linfty::morphism_residual(&src, &dst, |e| linfty::iota_morphism(n, e), &refs).is_zero() {
                    return outcome(false, format!("iota embedding fails, dim {n}, k = {k}"));
                }
            }
        }
    }
    let mut clean = 0;
    let mut failures = 0;
    let mut witness = None;
    for (p, q) in [(1, 1), (1, 2), (2, 1)] {
        let w = p + q;
        let lam = int(1 + p as i64);
        let rel = linfty::relative_structure(p, q, lam.clone());
        let abs = linfty::absolute_structure(w, lam);
        for k in 1..=2 {
            for _ in 0..4 {
                let xs = random_args(&mut r, rel.space(), k, 2);
                let refs: Vec<&Element> = xs.iter().collect();
                if !linfty::morphism_residual(&rel, &abs, |e| linfty::inclusion_morphism(p, q, e), &refs).is_zero() {
                    failures += 1;
                }
                let ys: Vec<Element> = xs.iter().map(|x| drop_hh(rel.space(), x, p, w)).collect();
                let refs: Vec<&Element> = ys.iter().collect();
                if !linfty::morphism_residual(&rel, &abs, |e| linfty::inclusion_morphism(p, q, e), &refs).is_zero() {
                    return outcome(false, format!("inclusion fails without h-h components, ({p}, {q})"));
                }
                clean += 1;
            }
        }
        let s = rel.space();
        let mb = s.find(Part::M, 2).unwrap();
        let ab = s.find(Part::A, 1).unwrap();
        for i in s.blocks[mb].admissible() {
            for j in s.blocks[ab].admissible() {
                let (x, y) = (s.unit(mb, i), s.unit(ab, j));
                if !linfty::morphism_residual(&rel, &abs, |e| linfty::inclusion_morphism(p, q, e), &[&x, &y]).is_zero() {
                    let tuple = AltMap::zero(2, w, w).tuples()[i / w].clone();
                    if tuple.iter().filter(|&&t| t >= p).count() < 2 {
                        return outcome(false, format!("inclusion fails on M-input {tuple:?}, not an h-h component"));
                    }
                    failures += 1;
                    witness.get_or_insert((p, q, tuple, i % w));
                }
            }
        }
    }
    let lift = format!("lift_tilde_D: {yes}/{no} valid/invalid agree; iota embedding strict");
    match witness {
        Some((p, q, t, o)) => outcome(
            false,
            format!(
                "{lift}; inclusion embedding breaks l2 on h-h components of M' ({failures} failing samples, e.g. (g, h) = ({p}, {q}), inputs e{}∧e{} -> e{}), holds on {clean} samples without them",
                t[0] + 1,
                t[1] + 1,
                o + 1
            ),
        ),
        None => outcome(true, format!("{lift}; inclusion embedding strict")),
    }
}

fn check_examples(h: &HomotopyDiffLie) -> bool {
    let n = h.dim();
    let us: Vec<Vec<Scalar>> = (0..n).map(|i| unit(n, i)).collect();
    us.iter().all(|x| {
        homotopy::example_n1(h, x).map(|v| scalar::is_zero_vec(&v)).unwrap_or(false)
            && us.iter().all(|y| homotopy::example_n2(h, x, y).map(|v| scalar::is_zero_vec(&v)).unwrap_or(false))
    })
}

/// The a-part of the MC maps in arities 1 and 2.
fn low_arity_mc(h: &HomotopyDiffLie) -> bool {
    let maps = homotopy::mc_maps_capped(h, 2).unwrap();
    maps.a_part.iter().take(2).all(|m| m.is_zero())
}

fn criterion_10() -> Outcome {
    let mut r = rng(1010);
    let (mut valid_ok, mut broken) = (0, 0);
    let mut cands: Vec<HomotopyDiffLie> = Vec::new();
    for k in 0..10 {
        let lam = weights()[k % 5].clone();
        let h = match homotopy::random_two_term(&mut r, &lam) {
            Ok(h) => h,
            Err(e) => return outcome(false, format!("generator: {e}")),
        };
        if !check_examples(&h) {
            return outcome(false, format!("valid fixture {k} fails the n = 1, 2 identities"));
        }
        valid_ok += 1;
        let low: Vec<homotopy::Slot> = homotopy::slots(&h, Family::D, 1).into_iter().chain(homotopy::slots(&h, Family::D, 2)).collect();
        let mut p = homotopy::perturb_among(&mut r, &h, &low);
        for _ in 0..8 {
            if !low_arity_mc(&p) {
                break;
            }
            p = homotopy::perturb_among(&mut r, &h, &low);
        }
        if check_examples(&p) != low_arity_mc(&p) {
            return outcome(false, format!("perturbed fixture {k}: n = 1, 2 identities disagree with the MC maps"));
        }
        if !check_examples(&p) {
            broken += 1;
        }
        cands.push(p);
        cands.push(h);
    }
    for k in 0..40 {
        let lam = weights()[k % 5].clone();
        let a = catalog::random_diff_lie(&mut r, if k % 2 == 0 { 2 } else { 3 }, &lam);
        let h = if k % 2 == 0 {
            let rep = catalog::random_diff_rep(&mut r, &a);
            HomotopyDiffLie::two_term(&a, &rep)
        } else {
            HomotopyDiffLie::from_diff_lie(&a)
        };
        let low: Vec<homotopy::Slot> = [(Family::Mu, 2), (Family::D, 1)].iter().flat_map(|&(f, k)| homotopy::slots(&h, f, k)).collect();
        cands.push(if k % 4 < 2 { homotopy::perturb_among(&mut r, &h, &low) } else { h });
    }
    let (mut mc, mut non) = (0, 0);
    for (k, h) in cands.iter().enumerate() {
        let rep = match homotopy::homotopy_mc_check(h) {
            Ok(rep) => rep,
            Err(e) => return outcome(false, format!("candidate {k}: {e}")),
        };
        if !rep.forms_agree || rep.maurer_cartan != (rep.linfty_ok && rep.diff_ok) {
            return outcome(false, format!("candidate {k}: MC {}, linfty {}, diff {}, forms agree {}", rep.maurer_cartan, rep.linfty_ok, rep.diff_ok, rep.forms_agree));
        }
        if rep.maurer_cartan {
            mc += 1
        } else {
            non += 1
        }
    }
    let pass = broken == valid_ok && mc > 0 && non > 0;
    outcome(
        pass,
        format!("n = 1, 2 identities: {valid_ok} valid fixtures hold, {broken}/{valid_ok} perturbed fail; {} candidates ({mc} MC, {non} non-MC) agree, PSh = factorial form", cands.len()),
    )
}

fn criterion_11() -> Outcome {
    let mut r = rng(1111);
    let mut jac = 0;
    for (i, kappa) in [int(2), frac(1, 2), int(-1), int(3)].into_iter().enumerate() {
        let lam = weights()[i].clone();
        let n = 1 + i % 2;
        let full = linfty::lambda_rescale(linfty::absolute_structure(n, lam.clone()), kappa.clone(), Rescaling::Full).unwrap();
        let fixed = linfty::lambda_rescale(linfty::absolute_structure(n, lam.clone()), kappa.clone(), Rescaling::FixedDifferential).unwrap();
        let rel = linfty::lambda_rescale(linfty::relative_structure(1, 1, lam), kappa, Rescaling::Full).unwrap();
        for k in 1..=3 {
            for _ in 0..3 {
                let xs = random_args(&mut r, full.space(), k, 3);
                let ys = random_args(&mut r, rel.space(), k, 2);
                if !(jacobi_holds(&full, &xs) && jacobi_holds(&fixed, &xs) && jacobi_holds(&rel, &ys)) {
                    return outcome(false, format!("rescaled Jacobi fails, κ case {i}, k = {k}"));
                }
                jac += 3;
            }
        }
    }
    let kappas = [int(1), int(-1), int(2), frac(1, 2), int(3), frac(-2, 3)];
    for k in 0..50 {
        let lam = weights()[k % 5].clone();
        let a = catalog::random_diff_lie(&mut r, 3, &lam);
        let kappa = kappas[k % kappas.len()].clone();
        let b = a.rescale_operator(&kappa).unwrap();
        if b.weight != &lam / &kappa || b.d != a.d.scale(&kappa) || !residuals_vanish(&b.weighted_derivation_residual()) {
            return outcome(false, format!("rescale_operator fixture {k}"));
        }
    }
    let zero = catalog::random_diff_lie(&mut r, 2, &Scalar::one()).rescale_operator(&Scalar::zero()).is_err();
    outcome(zero, format!("{jac} rescaled Jacobi residuals vanish; 50 rescaled operators satisfy weight λ/κ"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("complex axioms", criterion_1),
        ("MC <=> structure (absolute)", criterion_2),
        ("MC <=> structure (relative)", criterion_3),
        ("derived-bracket soundness", criterion_4),
        ("key formula", criterion_5),
        ("twist bridge", criterion_6),
        ("extensions", criterion_7),
        ("deformations", criterion_8),
        ("relative <-> absolute", criterion_9),
        ("homotopy", criterion_10),
        ("rescaling", criterion_11),
    ];
    let start = Instant::now();
    let mut unexpected = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        let t = Instant::now();
        let o = run();
        println!("{} {n:>2} {name}: {} ({:.1}s)", if o.pass { "PASS" } else { "FAIL" }, o.detail, t.elapsed().as_secs_f64());
        if o.pass == KNOWN_RED.contains(&n) {
            unexpected.push(n);
        }
    }
    println!("total {:.1}s", start.elapsed().as_secs_f64());
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected outcome for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
