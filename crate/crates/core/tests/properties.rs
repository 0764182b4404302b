use proptest::prelude::*;
use rand::Rng;

use difflie::catalog::{self, rng};
use difflie::cohomology::{CochainComplexSpec, Flavor};
use difflie::combinatorics::{koszul_sign, signature, Permutation};
use difflie::deformations::{self, FormalIso};
use difflie::lie::{residuals_vanish, rho_lambda, trivial_extension};
use difflie::linfty::{self, Element, LInftyAlgebra};
use difflie::scalar::{int, Scalar};

fn permutation() -> impl Strategy<Value = Permutation> {
    (0usize..6).prop_flat_map(|n| Just((0..n).collect::<Vec<_>>()).prop_shuffle()).prop_map(Permutation::new)
}

fn perm_with_degrees() -> impl Strategy<Value = (Permutation, Permutation, Vec<i32>)> {
    (1usize..6).prop_flat_map(|n| {
        let p = Just((0..n).collect::<Vec<_>>()).prop_shuffle().prop_map(Permutation::new);
        let q = Just((0..n).collect::<Vec<_>>()).prop_shuffle().prop_map(Permutation::new);
        (p, q, prop::collection::vec(-3i32..4, n))
    })
}

fn weight() -> impl Strategy<Value = Scalar> {
    prop_oneof![Just(int(0)), Just(int(1)), Just(int(-1)), Just(int(2)), Just(difflie::scalar::frac(1, 2))]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn koszul_sign_is_a_cocycle((s, t, degs) in perm_with_degrees()) {
        let moved: Vec<i32> = s.images.iter().map(|&i| degs[i]).collect();
        let lhs = koszul_sign(&s.compose(&t), &degs).unwrap();
        let rhs = koszul_sign(&s, &degs).unwrap() * koszul_sign(&t, &moved).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn koszul_sign_extremes(s in permutation()) {
        let n = s.len();
        prop_assert_eq!(koszul_sign(&s, &vec![0; n]).unwrap(), int(1));
        prop_assert_eq!(koszul_sign(&s, &vec![1; n]).unwrap(), signature(&s));
    }

    #[test]
    fn graded_jacobi_absolute(seed in any::<u64>(), lam in weight(), n in 1usize..3, k in 1usize..4) {
        let mut r = rng(seed);
        let l = linfty::absolute_structure(n, lam);
        let xs = random_elements(&mut r, &l, k);
        let refs: Vec<&Element> = xs.iter().collect();
        prop_assert!(linfty::generalized_jacobi_residual(&l, &refs).unwrap().is_zero());
    }

    #[test]
    fn differentials_square_to_zero(seed in any::<u64>(), lam in weight()) {
        let mut r = rng(seed);
        let a = catalog::random_diff_lie(&mut r, 3, &lam);
        let rep = catalog::random_coefficients(&mut r, &a);
        for flavor in [Flavor::Ce, Flavor::Do, Flavor::DiffLie, Flavor::Tilde] {
            prop_assert!(CochainComplexSpec::new(a.clone(), rep.clone(), 3, flavor).build().is_ok());
        }
    }

    #[test]
    fn rho_lambda_and_trivial_extension(seed in any::<u64>(), lam in weight()) {
        let mut r = rng(seed);
        let a = catalog::random_diff_lie(&mut r, 3, &lam);
        let rep = catalog::random_diff_rep(&mut r, &a);
        prop_assert!(rho_lambda(&rep, &a).is_valid_over(&a));
        prop_assert!(trivial_extension(&a, &rep).is_valid());
    }

    #[test]
    fn lift_is_weight_one_iff_relative(seed in any::<u64>(), lam in weight(), perturb in any::<bool>()) {
        let mut r = rng(seed);
        let (t, mut d) = catalog::random_relative(&mut r, &lam);
        if perturb {
            let (i, j) = (r.gen_range(0..d.rows), r.gen_range(0..d.cols));
            d.set(i, j, d.get(i, j) + int(1));
        }
        let relative = residuals_vanish(&t.relative_diff_residual(&d, &lam).unwrap());
        prop_assert_eq!(t.lift_tilde_d(&d, &lam).is_valid(), relative);
    }

    #[test]
    fn formal_iso_preserves_deformation_equations(seed in any::<u64>(), lam in weight()) {
        let mut r = rng(seed);
        let a = catalog::random_diff_lie(&mut r, 3, &lam);
        let Some(def) = deformations::random_order2(&mut r, &a) else { return Ok(()) };
        let mut iso = FormalIso::identity(a.dim(), def.order);
        for k in 1..=def.order {
            iso.phi[k] = catalog::random_matrix(&mut r, a.dim(), a.dim(), 1);
        }
        let moved = deformations::apply_formal_iso(&def, &iso).unwrap();
        prop_assert!(deformations::is_deformation(&moved));
    }

    #[test]
    fn key_formula(seed in any::<u64>(), n in 1usize..4) {
        let mut r = rng(seed);
        let fa = r.gen_range(1..=n);
        let f = linfty::random_altmap(&mut r, fa, n, n, 2);
        let xis: Vec<_> = (0..r.gen_range(1..=fa.min(3))).map(|_| {
            let a = r.gen_range(0..=n);
            linfty::random_altmap(&mut r, a, n, n, 2)
        }).collect();
        let refs: Vec<_> = xis.iter().collect();
        prop_assert!(linfty::key_formula_check(&f, &refs).unwrap().is_zero());
    }
}

fn random_elements(r: &mut impl Rng, l: &impl LInftyAlgebra, k: usize) -> Vec<Element> {
    let s = l.space();
    let degs: Vec<i32> = s.blocks.iter().filter(|b| b.arity <= 2).map(|b| b.degree).collect();
    (0..k)
        .map(|_| {
            let d = degs[r.gen_range(0..degs.len())];
            s.random_homogeneous(r, d, 2, 2)
        })
        .collect()
}
