//! Dense eigen-quantities of small real matrices.

use nalgebra::{DMatrix, DVector, Schur, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classes::{ChainQuery, ClassPartition, Digraph};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative residual for eigenpairs.
    pub eig: f64,
    /// Singular values below `rank * sigma_max` count as zero.
    pub rank: f64,
    /// Block abscissae within `basic * max(1, |zeta|)` of the top are basic.
    pub basic: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { eig: 1e-9, rank: 1e-8, basic: 1e-8 }
    }
}

fn check_square(a: &DMatrix<f64>) -> Result<()> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    if a.nrows() == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    Ok(())
}

pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    check_square(a)?;
    if a.nrows() == 1 {
        return Ok(vec![Complex64::new(a[(0, 0)], 0.0)]);
    }
    let schur = Schur::try_new(a.clone(), f64::EPSILON, 1000 * a.nrows())
        .ok_or(Error::EigenNoConvergence)?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

pub fn spectral_abscissa(a: &DMatrix<f64>) -> Result<f64> {
    Ok(eigenvalues(a)?.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

pub fn spectral_radius(a: &DMatrix<f64>) -> Result<f64> {
    Ok(eigenvalues(a)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

pub fn is_metzler(a: &DMatrix<f64>) -> bool {
    a.is_square()
        && (0..a.nrows()).all(|i| (0..a.ncols()).all(|j| i == j || a[(i, j)] >= 0.0))
}

fn check_metzler(a: &DMatrix<f64>) -> Result<()> {
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            if i != j && a[(i, j)] < 0.0 {
                return Err(Error::NotMetzler { row: i, col: j, value: a[(i, j)] });
            }
        }
    }
    Ok(())
}

/// Principal submatrix on the given index set.
pub fn principal_block(a: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| a[(idx[i], idx[j])])
}

pub fn submatrix(a: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])])
}

/// Spectral abscissa of each diagonal block of `a` along the partition.
pub fn block_abscissae(a: &DMatrix<f64>, p: &ClassPartition) -> Result<Vec<f64>> {
    p.classes().iter().map(|c| spectral_abscissa(&principal_block(a, c))).collect()
}

/// Perron root and sum-normalized positive eigenvectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerronData {
    pub root: f64,
    pub right: Vec<f64>,
    pub left: Vec<f64>,
}

pub fn perron_data(a: &DMatrix<f64>, assert_irreducible: bool) -> Result<PerronData> {
    perron_data_with(a, assert_irreducible, &Tolerances::default())
}

pub fn perron_data_with(a: &DMatrix<f64>, assert_irreducible: bool, tol: &Tolerances) -> Result<PerronData> {
    check_square(a)?;
    check_metzler(a)?;
    let n = a.nrows();
    if assert_irreducible {
        let p = ClassPartition::of(&Digraph::from_matrix(a, 0.0)?);
        if !p.is_irreducible() {
            return Err(Error::Reducible { classes: p.len() });
        }
    }
    if n == 1 {
        return Ok(PerronData { root: a[(0, 0)], right: vec![1.0], left: vec![1.0] });
    }
    let root = spectral_abscissa(a)?;
    let shifted = a - DMatrix::identity(n, n) * root;
    let right = null_vector(&shifted)?;
    let left = null_vector(&shifted.transpose())?;

    let scale = a.norm().max(1.0);
    let res_r = (a * DVector::from_vec(right.clone()) - DVector::from_vec(right.clone()) * root).norm();
    let res_l = (a.transpose() * DVector::from_vec(left.clone()) - DVector::from_vec(left.clone()) * root).norm();
    let res = res_r.max(res_l);
    if res > tol.eig * scale {
        return Err(Error::PerronResidual(res));
    }
    Ok(PerronData { root, right, left })
}

// Right singular vector of the smallest singular value, sign-fixed and
// normalized to sum 1; every entry must be strictly positive.
fn null_vector(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let svd = SVD::try_new(m.clone(), false, true, f64::EPSILON, 0).ok_or(Error::SvdNoConvergence)?;
    let v_t = svd.v_t.as_ref().ok_or(Error::SvdNoConvergence)?;
    let (imin, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
    let row: Vec<f64> = v_t.row(imin).iter().copied().collect();
    let sum: f64 = row.iter().sum();
    if sum == 0.0 {
        return Err(Error::NonpositivePerronVector(0.0));
    }
    let v: Vec<f64> = row.iter().map(|x| x / sum).collect();
    if let Some(&bad) = v.iter().find(|&&x| x <= 0.0) {
        return Err(Error::NonpositivePerronVector(bad));
    }
    Ok(v)
}

fn singular_values(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let svd = SVD::try_new(m.clone(), false, false, f64::EPSILON, 0).ok_or(Error::SvdNoConvergence)?;
    Ok(svd.singular_values.iter().copied().collect())
}

/// Numerical rank with a threshold relative to the largest singular value.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> Result<usize> {
    let sv = singular_values(m)?;
    let top = sv.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > rel_tol * top).count())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexResult {
    pub eigenvalue: f64,
    pub index: usize,
    /// Ranks of (B - lambda I)^k for k = 0..=index + 1.
    pub rank_sequence: Vec<usize>,
}

pub fn eigenvalue_index(b: &DMatrix<f64>, lambda: f64) -> Result<IndexResult> {
    eigenvalue_index_with(b, lambda, &Tolerances::default())
}

pub fn eigenvalue_index_with(b: &DMatrix<f64>, lambda: f64, tol: &Tolerances) -> Result<IndexResult> {
    check_square(b)?;
    let n = b.nrows();
    let shifted = b - DMatrix::identity(n, n) * lambda;
    let sv = singular_values(&shifted)?;
    let top = sv.iter().copied().fold(0.0, f64::max);
    let bottom = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if bottom > tol.eig * top.max(1.0) {
        return Err(Error::NotAnEigenvalue { lambda, sigma: bottom / top.max(1.0) });
    }
    if top == 0.0 {
        return Ok(IndexResult { eigenvalue: lambda, index: 1, rank_sequence: vec![n, 0, 0] });
    }
    let m = shifted / top;
    let mut ranks = vec![n];
    let mut power = DMatrix::identity(n, n);
    for k in 1..=n + 1 {
        power = &power * &m;
        ranks.push(numerical_rank(&power, tol.rank)?);
        if ranks[k] == ranks[k - 1] {
            return Ok(IndexResult { eigenvalue: lambda, index: k - 1, rank_sequence: ranks });
        }
    }
    Err(Error::RankPlateau(n))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RothblumOutcome {
    pub zeta: f64,
    pub index: usize,
    pub chain_length: usize,
    pub agree: bool,
    pub basic: Vec<bool>,
    pub rank_sequence: Vec<usize>,
}

pub fn rothblum_check(b: &DMatrix<f64>) -> Result<RothblumOutcome> {
    rothblum_check_with(b, &Tolerances::default())
}

/// Compares the index of the spectral abscissa with the longest chain of
/// classes. The abscissa is taken as the largest block abscissa, which is
/// exact for block triangular structure and avoids the sensitivity of a
/// defective eigenvalue computed from the full matrix.
pub fn rothblum_check_with(b: &DMatrix<f64>, tol: &Tolerances) -> Result<RothblumOutcome> {
    check_square(b)?;
    check_metzler(b)?;
    let p = ClassPartition::of(&Digraph::from_matrix(b, 0.0)?);
    let blocks = block_abscissae(b, &p)?;
    let zeta = blocks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let thresh = tol.basic * zeta.abs().max(1.0);
    let basic: Vec<bool> = blocks.iter().map(|z| (z - zeta).abs() <= thresh).collect();
    let chain_length = p.longest_chain_length(&ChainQuery::new(basic.clone()))?;
    let idx = eigenvalue_index_with(b, zeta, tol)?;
    Ok(RothblumOutcome {
        zeta,
        index: idx.index,
        chain_length,
        agree: idx.index == chain_length,
        basic,
        rank_sequence: idx.rank_sequence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example_matrix;

    fn m(rows: &[&[f64]]) -> DMatrix<f64> {
        DMatrix::from_row_slice(rows.len(), rows[0].len(), &rows.concat())
    }

    #[test]
    fn abscissa_of_example_blocks() {
        assert!((spectral_abscissa(&m(&[&[-3., 1.], &[12., 1.]])).unwrap() - 3.0).abs() < 1e-12);
        let b = m(&[&[0., 0., 1.], &[0., 0., 1.], &[1., 1., 0.]]);
        assert!((spectral_abscissa(&b).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert!((spectral_abscissa(&m(&[&[1., 1.], &[5., -3.]])).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn radius() {
        assert!((spectral_radius(&DMatrix::identity(4, 4)).unwrap() - 1.0).abs() < 1e-14);
        let a = m(&[&[0., 2.], &[2., 0.]]);
        assert!((spectral_radius(&a).unwrap() - 2.0).abs() < 1e-12);
        assert!((spectral_abscissa(&a).unwrap() - 2.0).abs() < 1e-12);
        assert!((spectral_radius(&m(&[&[-3., 1.], &[12., 1.]])).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn perron_examples() {
        let d = perron_data(&m(&[&[-3., 1.], &[12., 1.]]), true).unwrap();
        assert!((d.root - 3.0).abs() < 1e-12);
        assert!((d.right[0] - 1.0 / 7.0).abs() < 1e-12);
        assert!((d.right[1] - 6.0 / 7.0).abs() < 1e-12);
        // left: y^T (A - 3I) = 0 gives y proportional to (2, 1)
        assert!((d.left[0] - 2.0 / 3.0).abs() < 1e-12);

        let d = perron_data(&m(&[&[-0.5]]), true).unwrap();
        assert_eq!((d.root, d.right.clone(), d.left.clone()), (-0.5, vec![1.0], vec![1.0]));

        let d = perron_data(&m(&[&[0., 2.], &[2., 0.]]), true).unwrap();
        assert!((d.root - 2.0).abs() < 1e-12);
        for x in d.right.iter().chain(&d.left) {
            assert!((x - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn perron_rejects_reducible_and_non_metzler() {
        assert!(matches!(
            perron_data(&m(&[&[1., 1.], &[0., 1.]]), true),
            Err(Error::Reducible { classes: 2 })
        ));
        assert!(matches!(perron_data(&m(&[&[1., -1.], &[1., 1.]]), true), Err(Error::NotMetzler { .. })));
    }

    #[test]
    fn index_examples() {
        let r = eigenvalue_index(&example_matrix(), 3.0).unwrap();
        assert_eq!(r.index, 2);
        let j3 = m(&[&[0., 1., 0.], &[0., 0., 1.], &[0., 0., 0.]]);
        let r = eigenvalue_index(&j3, 0.0).unwrap();
        assert_eq!((r.index, r.rank_sequence.clone()), (3, vec![3, 2, 1, 0, 0]));
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![1., 1., 2.]));
        assert_eq!(eigenvalue_index(&d, 1.0).unwrap().index, 1);
        assert!(matches!(eigenvalue_index(&d, 1.5), Err(Error::NotAnEigenvalue { .. })));
    }

    #[test]
    fn rothblum_examples() {
        let r = rothblum_check(&example_matrix()).unwrap();
        assert_eq!((r.index, r.chain_length, r.agree), (2, 2, true));
        let r = rothblum_check(&m(&[&[-1., 2.], &[1., 0.5]])).unwrap();
        assert_eq!((r.index, r.chain_length, r.agree), (1, 1, true));
        let r = rothblum_check(&DMatrix::zeros(2, 2)).unwrap();
        assert_eq!((r.index, r.chain_length, r.agree), (1, 1, true));
    }

    #[test]
    fn shift_moves_abscissa() {
        let a = m(&[&[-1., 2., 0.], &[1., 0.5, 3.], &[0., 1., -2.]]);
        let shifted = &a + DMatrix::identity(3, 3) * 2.5;
        let (z0, z1) = (spectral_abscissa(&a).unwrap(), spectral_abscissa(&shifted).unwrap());
        assert!((z1 - z0 - 2.5).abs() < 1e-10);
    }
}
