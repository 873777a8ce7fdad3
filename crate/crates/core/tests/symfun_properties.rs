use hk_core::symfun::{
    cone_member, de_m, e_m, e_m_matrix, e_m_matrix_minors, newton_maclaurin_deficit, sigma_all,
    sigma_m_minors, EigenTuple, SymMatrix,
};
use proptest::prelude::*;

fn sym_matrix() -> impl Strategy<Value = SymMatrix> {
    (1usize..=6).prop_flat_map(|n| {
        prop::collection::vec(-2.0f64..2.0, n * (n + 1) / 2)
            .prop_map(move |v| SymMatrix::from_lower_fn(n, |i, j| v[i * (i + 1) / 2 + j]))
    })
}

/// Natural magnitude of degree-`m` expressions in the entries of `a`.
fn scale(a: &SymMatrix, m: usize) -> f64 {
    let frob = a.contract(a).sqrt();
    (1.0 + frob).powi(m as i32 + 1)
}

fn e_at(a: &SymMatrix, m: usize) -> f64 {
    if m == 0 {
        1.0
    } else {
        e_m_matrix(a, m)
    }
}

proptest! {
    #[test]
    fn contraction_with_the_matrix(a in sym_matrix()) {
        let n = a.dim();
        for m in 1..=n {
            let lhs = de_m(&a, m).unwrap().contract(&a);
            let rhs = m as f64 * e_m_matrix(&a, m);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale(&a, m), "m={m}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn contraction_with_the_identity(a in sym_matrix()) {
        let n = a.dim();
        for m in 1..=n {
            let lhs = de_m(&a, m).unwrap().trace();
            let rhs = m as f64 * e_at(&a, m - 1);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale(&a, m));
        }
    }

    #[test]
    fn contraction_with_the_square(a in sym_matrix()) {
        let n = a.dim();
        for m in 1..=n {
            let lhs = de_m(&a, m).unwrap().contract(&a.square());
            let rhs = n as f64 * e_m_matrix(&a, 1) * e_m_matrix(&a, m)
                - (n - m) as f64 * e_m_matrix(&a, m + 1);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale(&a, m + 1));
        }
    }

    #[test]
    fn eigenvalues_agree_with_principal_minors(a in sym_matrix()) {
        let n = a.dim();
        let s = sigma_all(&a.eigenvalues());
        for m in 0..=n {
            prop_assert!((s[m] - sigma_m_minors(&a, m)).abs() <= 1e-12 * scale(&a, m));
            prop_assert!((e_m_matrix(&a, m) - e_m_matrix_minors(&a, m)).abs() <= 1e-12 * scale(&a, m));
        }
    }

    #[test]
    fn derivative_matches_central_differences(a in sym_matrix(), seed in 0u64..1000) {
        let n = a.dim();
        let dir = SymMatrix::from_lower_fn(n, |i, j| (((i * 7 + j * 3) as u64 + seed) % 5) as f64 - 2.0);
        let delta = 1e-5;
        let shift = |t: f64| SymMatrix::from_lower_fn(n, |i, j| a.get(i, j) + t * dir.get(i, j));
        for m in 1..=n {
            let fd = (e_m_matrix_minors(&shift(delta), m) - e_m_matrix_minors(&shift(-delta), m)) / (2.0 * delta);
            let exact = de_m(&a, m).unwrap().contract(&dir);
            prop_assert!((fd - exact).abs() <= 1e-6 * scale(&a, m), "m={m}: {fd} vs {exact}");
        }
    }

    #[test]
    fn newton_maclaurin_holds_in_the_cone(
        v in prop::collection::vec(-1.0f64..4.0, 1..=6),
        m_pick in 0usize..6,
    ) {
        let n = v.len();
        let m = 1 + m_pick % n;
        let lam = EigenTuple::new(v).unwrap();
        if cone_member(&lam, m).unwrap() {
            let d = newton_maclaurin_deficit(&lam, m).unwrap();
            let mag = e_m(&lam, 1).abs().max(1.0).powi(m as i32);
            prop_assert!(d >= -1e-12 * mag, "deficit {d}");
        } else {
            prop_assert!(newton_maclaurin_deficit(&lam, m).is_err());
        }
    }

    #[test]
    fn newton_maclaurin_is_tight_at_multiples_of_identity(c in 0.01f64..10.0, n in 1usize..=6) {
        let lam = EigenTuple::constant(c, n).unwrap();
        for m in 1..=n {
            let d = newton_maclaurin_deficit(&lam, m).unwrap();
            prop_assert!(d.abs() <= 1e-12 * c.powi(m as i32).max(1.0));
        }
    }

    #[test]
    fn functions_are_symmetric_under_permutation(v in prop::collection::vec(-3.0f64..3.0, 2..=6)) {
        let mut w = v.clone();
        w.reverse();
        w.rotate_left(1);
        let (a, b) = (sigma_all(&v), sigma_all(&w));
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()) * 10f64.powi(v.len() as i32));
        }
    }
}
