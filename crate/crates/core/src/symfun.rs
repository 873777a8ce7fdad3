//! Elementary symmetric functions of eigenvalue tuples and symmetric matrices.
//!
//! `σ_m(λ)` is the m-th elementary symmetric polynomial and
//! `E_m(λ) = σ_m(λ) / C(n, m)` its normalisation, with `σ_0 = E_0 = 1` and
//! `σ_m = E_m = 0` for `m > n`. For a symmetric matrix `A`, `E_m(A)` is
//! `E_m` of its eigenvalues; it is computed here two independent ways
//! (Jacobi eigenvalues, and sums of principal minors) which must agree.

use crate::numeric::binomial;
use crate::{Error, Result};

/// Ordered tuple of real eigenvalues (principal or shifted principal curvatures).
#[derive(Debug, Clone, PartialEq)]
pub struct EigenTuple(Vec<f64>);

impl EigenTuple {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("eigen tuple must be non-empty".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "eigen tuple entry {i} is not finite"
            )));
        }
        Ok(Self(values))
    }

    /// `n` copies of `c`.
    pub fn constant(c: f64, n: usize) -> Result<Self> {
        Self::new(vec![c; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Every entry shifted by `-eps`.
    pub fn shifted(&self, eps: f64) -> Self {
        Self(self.0.iter().map(|v| v - eps).collect())
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.0.len() as f64
    }

    /// `max_i λ_i - min_i λ_i`.
    pub fn spread(&self) -> f64 {
        let max = self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = self.0.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    }
}

/// Real symmetric `n x n` matrix. Only the lower triangle is stored, so the
/// stored matrix is exactly symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    lower: Vec<f64>,
}

#[inline]
fn packed(i: usize, j: usize) -> usize {
    let (r, c) = if i >= j { (i, j) } else { (j, i) };
    r * (r + 1) / 2 + c
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            lower: vec![0.0; n * (n + 1) / 2],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Builds a matrix from `f(i, j)` evaluated on the lower triangle.
    pub fn from_lower_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Builds a matrix from full rows; rejects any asymmetry.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Domain("matrix must be non-empty".into()));
        }
        if let Some(r) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::Domain(format!("row {r} has wrong length")));
        }
        for i in 0..n {
            for j in 0..i {
                let gap = (rows[i][j] - rows[j][i]).abs();
                if gap != 0.0 || rows[i][j].is_nan() {
                    return Err(Error::NotSymmetric {
                        row: i,
                        col: j,
                        gap,
                    });
                }
            }
        }
        Ok(Self::from_lower_fn(n, |i, j| rows[i][j]))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.lower[packed(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.lower[packed(i, j)] = v;
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// `Σ_ij self_ij * other_ij`, i.e. `tr(self · other)` for symmetric inputs.
    pub fn contract(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.n, other.n);
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                acc += self.get(i, j) * other.get(j, i);
            }
        }
        acc
    }

    /// `self · self`.
    pub fn square(&self) -> SymMatrix {
        SymMatrix::from_lower_fn(self.n, |i, j| {
            (0..self.n).map(|k| self.get(i, k) * self.get(k, j)).sum()
        })
    }

    /// Eigenvalues in ascending order by cyclic Jacobi rotations.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.n;
        let mut a = self.to_dense();
        let scale: f64 = a.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
        if scale > 0.0 {
            for _sweep in 0..64 {
                let off: f64 = (0..n)
                    .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                    .map(|(i, j)| a[i][j] * a[i][j])
                    .sum::<f64>()
                    .sqrt();
                if off <= f64::EPSILON * 1e-3 * scale {
                    break;
                }
                for p in 0..n {
                    for q in (p + 1)..n {
                        if a[p][q] == 0.0 {
                            continue;
                        }
                        let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                        let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                        let t = if theta == 0.0 { 1.0 } else { t };
                        let c = 1.0 / (t * t + 1.0).sqrt();
                        let s = t * c;
                        for row in a.iter_mut() {
                            let (akp, akq) = (row[p], row[q]);
                            row[p] = c * akp - s * akq;
                            row[q] = s * akp + c * akq;
                        }
                        for k in 0..n {
                            let (apk, aqk) = (a[p][k], a[q][k]);
                            a[p][k] = c * apk - s * aqk;
                            a[q][k] = s * apk + c * aqk;
                        }
                    }
                }
            }
        }
        let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
        ev.sort_by(|x, y| x.total_cmp(y));
        ev
    }

    pub fn eigen_tuple(&self) -> Result<EigenTuple> {
        EigenTuple::new(self.eigenvalues())
    }
}

/// `σ_m(λ)`; 1 for `m = 0`, 0 for `m > n`.
pub fn sigma_m(lam: &EigenTuple, m: usize) -> f64 {
    sigma_all(lam.values())[..].get(m).copied().unwrap_or(0.0)
}

/// `[σ_0, …, σ_n]` by the product-expansion recurrence.
pub fn sigma_all(lam: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; lam.len() + 1];
    e[0] = 1.0;
    for (k, &l) in lam.iter().enumerate() {
        for j in (1..=k + 1).rev() {
            e[j] += l * e[j - 1];
        }
    }
    e
}

/// `E_m(λ) = σ_m(λ) / C(n, m)`.
pub fn e_m(lam: &EigenTuple, m: usize) -> f64 {
    let n = lam.len();
    if m > n {
        return 0.0;
    }
    sigma_m(lam, m) / binomial(n, m)
}

/// `E_m(A)` via the eigenvalues of `A`.
pub fn e_m_matrix(a: &SymMatrix, m: usize) -> f64 {
    let n = a.dim();
    if m > n {
        return 0.0;
    }
    let ev = a.eigenvalues();
    sigma_all(&ev)[m] / binomial(n, m)
}

/// `σ_m(A)` as the generalized-Kronecker contraction, evaluated as the sum of
/// all `m x m` principal minors.
pub fn sigma_m_minors(a: &SymMatrix, m: usize) -> f64 {
    let n = a.dim();
    if m == 0 {
        return 1.0;
    }
    if m > n {
        return 0.0;
    }
    let mut total = 0.0;
    let mut idx = Vec::with_capacity(m);
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != m {
            continue;
        }
        idx.clear();
        idx.extend((0..n).filter(|&i| mask & (1 << i) != 0));
        let sub: Vec<Vec<f64>> = idx
            .iter()
            .map(|&i| idx.iter().map(|&j| a.get(i, j)).collect())
            .collect();
        total += determinant(sub);
    }
    total
}

/// `E_m(A)` via principal minors; independent of the eigenvalue route.
pub fn e_m_matrix_minors(a: &SymMatrix, m: usize) -> f64 {
    let n = a.dim();
    if m > n {
        return 0.0;
    }
    sigma_m_minors(a, m) / binomial(n, m)
}

fn determinant(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        if a[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det *= a[col][col];
        for r in (col + 1)..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    det
}

/// `(Ė_m)_i^j(A) = ∂E_m(A)/∂A_j^i`, `1 <= m <= n`.
///
/// Uses `∂σ_m/∂A = T_{m-1}` with `T_0 = I`, `T_r = σ_r(A) I - A T_{r-1}`.
pub fn de_m(a: &SymMatrix, m: usize) -> Result<SymMatrix> {
    let n = a.dim();
    if m == 0 || m > n {
        return Err(Error::Domain(format!(
            "derivative of E_m needs 1 <= m <= n, got m = {m}, n = {n}"
        )));
    }
    let dense = a.to_dense();
    let mut t: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for r in 1..m {
        let s = sigma_m_minors(a, r);
        let at: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| dense[i][k] * t[k][j]).sum())
                    .collect()
            })
            .collect();
        for i in 0..n {
            for j in 0..n {
                t[i][j] = if i == j { s } else { 0.0 } - at[i][j];
            }
        }
    }
    let norm = binomial(n, m);
    // T is a polynomial in A, so symmetric up to rounding.
    Ok(SymMatrix::from_lower_fn(n, |i, j| {
        0.5 * (t[i][j] + t[j][i]) / norm
    }))
}

fn check_cone_order(n: usize, m: usize) -> Result<()> {
    if m == 0 || m > n {
        return Err(Error::Domain(format!(
            "cone order must satisfy 1 <= m <= n, got m = {m}, n = {n}"
        )));
    }
    Ok(())
}

/// `λ ∈ Γ_m^+`, i.e. `σ_i(λ) > 0` for `1 <= i <= m` (strict, no slack).
pub fn cone_member(lam: &EigenTuple, m: usize) -> Result<bool> {
    check_cone_order(lam.len(), m)?;
    Ok(first_cone_failure(lam, m).is_none())
}

fn first_cone_failure(lam: &EigenTuple, m: usize) -> Option<(usize, f64)> {
    let s = sigma_all(lam.values());
    (1..=m).find(|&i| s[i] <= 0.0).map(|i| (i, s[i]))
}

/// Newton–MacLaurin deficit `E_1 E_{m-1} - E_m >= 0` on `Γ_m^+`.
pub fn newton_maclaurin_deficit(lam: &EigenTuple, m: usize) -> Result<f64> {
    check_cone_order(lam.len(), m)?;
    if let Some((index, sigma)) = first_cone_failure(lam, m) {
        return Err(Error::ConeViolation { index, sigma });
    }
    Ok(e_m(lam, 1) * e_m(lam, m - 1) - e_m(lam, m))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tuple(v: &[f64]) -> EigenTuple {
        EigenTuple::new(v.to_vec()).unwrap()
    }

    // Enumerates index subsets directly.
    fn sigma_brute(lam: &[f64], m: usize) -> f64 {
        let n = lam.len();
        (0u32..(1 << n))
            .filter(|mask| mask.count_ones() as usize == m)
            .map(|mask| {
                (0..n)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| lam[i])
                    .product::<f64>()
            })
            .sum()
    }

    #[test]
    fn sigma_examples() {
        let l = tuple(&[1.0, 2.0, 3.0]);
        assert_eq!(sigma_brute(&[1.0, 2.0, 3.0], 2), 11.0);
        assert_eq!(sigma_m(&l, 2), 11.0);
        assert_eq!(sigma_m(&tuple(&[0.7; 4]), 0), 1.0);
        assert_eq!(sigma_m(&l, 4), 0.0);
    }

    #[test]
    fn sigma_matches_brute_force() {
        let l = [0.3, -1.2, 2.5, 0.9, -0.4, 1.7];
        for m in 0..=6 {
            let a = sigma_m(&tuple(&l), m);
            let b = if m == 0 { 1.0 } else { sigma_brute(&l, m) };
            assert!((a - b).abs() < 1e-12, "m={m}: {a} vs {b}");
        }
    }

    #[test]
    fn e_m_examples() {
        let c = 1.7;
        assert!((e_m(&tuple(&[c, c, c]), 2) - c * c).abs() < 1e-14);
        assert!((e_m(&tuple(&[1.0, 2.0, 3.0]), 2) - 11.0 / 3.0).abs() < 1e-15);
        assert_eq!(e_m(&tuple(&[4.0, -2.0]), 0), 1.0);
    }

    #[test]
    fn e_m_matrix_examples() {
        let d = SymMatrix::diagonal(&[1.0, 2.0, 3.0]);
        assert!((e_m_matrix(&d, 2) - 11.0 / 3.0).abs() < 1e-14);
        assert!((e_m_matrix_minors(&d, 2) - 11.0 / 3.0).abs() < 1e-14);
        assert!((e_m_matrix(&SymMatrix::identity(3), 3) - 1.0).abs() < 1e-15);
        assert_eq!(e_m_matrix(&d, 4), 0.0);
        assert_eq!(e_m_matrix_minors(&d, 4), 0.0);
    }

    #[test]
    fn non_symmetric_rows_rejected() {
        let err = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0 + 1e-15, 1.0]]).unwrap_err();
        assert!(matches!(err, Error::NotSymmetric { row: 1, col: 0, .. }));
        assert!(SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).is_ok());
    }

    #[test]
    fn jacobi_eigenvalues_of_known_matrix() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3.
        let a = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let ev = a.eigenvalues();
        assert!((ev[0] - 1.0).abs() < 1e-15 && (ev[1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn de_m_examples() {
        let d2 = SymMatrix::diagonal(&[0.4, -1.3]);
        let g = de_m(&d2, 1).unwrap();
        assert!((g.get(0, 0) - 0.5).abs() < 1e-15);
        assert!((g.get(1, 1) - 0.5).abs() < 1e-15);
        assert_eq!(g.get(0, 1), 0.0);

        // dE_2/dλ_i = (σ_1 - λ_i) / C(3,2) for diag(1,2,3).
        let g = de_m(&SymMatrix::diagonal(&[1.0, 2.0, 3.0]), 2).unwrap();
        for (i, want) in [5.0 / 3.0, 4.0 / 3.0, 1.0].iter().enumerate() {
            assert!((g.get(i, i) - want).abs() < 1e-14);
        }
        assert!(de_m(&d2, 0).is_err());
        assert!(de_m(&d2, 3).is_err());
    }

    #[test]
    fn de_m_matches_central_differences() {
        let a = SymMatrix::from_rows(&[
            vec![0.8, 0.3, -0.2],
            vec![0.3, 1.5, 0.4],
            vec![-0.2, 0.4, -0.6],
        ])
        .unwrap();
        let h = 1e-6;
        for m in 1..=3 {
            let d = de_m(&a, m).unwrap();
            for i in 0..3 {
                for j in 0..=i {
                    let bump = |s: f64| {
                        let mut b = a.clone();
                        b.set(i, j, a.get(i, j) + s);
                        e_m_matrix_minors(&b, m)
                    };
                    let fd = (bump(h) - bump(-h)) / (2.0 * h);
                    // a symmetric off-diagonal bump moves both A_ij and A_ji
                    let want = if i == j {
                        d.get(i, i)
                    } else {
                        2.0 * d.get(i, j)
                    };
                    assert!((fd - want).abs() < 1e-6, "m={m} ({i},{j}): {fd} vs {want}");
                }
            }
        }
    }

    #[test]
    fn cone_examples() {
        assert!(cone_member(&tuple(&[3.0, -1.0]), 1).unwrap());
        assert!(!cone_member(&tuple(&[3.0, -1.0]), 2).unwrap());
        assert!(cone_member(&tuple(&[1.0; 4]), 4).unwrap());
        assert!(cone_member(&tuple(&[1.0; 4]), 5).is_err());
        // boundary of the open cone is excluded
        assert!(!cone_member(&tuple(&[0.0, 1.0]), 2).unwrap());
    }

    #[test]
    fn newton_maclaurin_examples() {
        let c = 0.9;
        assert!(
            newton_maclaurin_deficit(&tuple(&[c, c, c]), 2)
                .unwrap()
                .abs()
                < 1e-15
        );
        let d = newton_maclaurin_deficit(&tuple(&[1.0, 2.0, 3.0]), 2).unwrap();
        assert!((d - 1.0 / 3.0).abs() < 1e-14);
        match newton_maclaurin_deficit(&tuple(&[3.0, -1.0]), 2) {
            Err(Error::ConeViolation { index: 2, sigma }) => assert_eq!(sigma, -3.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn eigen_tuple_validation() {
        assert!(EigenTuple::new(vec![]).is_err());
        assert!(EigenTuple::new(vec![1.0, f64::NAN]).is_err());
        assert_eq!(tuple(&[1.0, 4.0]).spread(), 3.0);
    }
}
