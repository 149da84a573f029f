//! Reference matrices and pencils used by tests, examples and the CLI.

use nalgebra::DMatrix;

use crate::pencil::MetzlerPencil;

/// A reducible 10x10 Metzler matrix with five classes and a longest chain of two.
pub fn example_matrix() -> DMatrix<f64> {
    #[rustfmt::skip]
    let rows = [
        -3., 0., 0., 1., 0., 3., 0., 0., 0., 0.,
        0., 1., 0., 0., 0., 0., 0., 0., 0., 4.,
        0., 1., 0., 0., 0., 0., 1., 0., 0., 0.,
        12., 0., 0., 1., 0., 0., 4., 0., 0., 0.,
        0., 0., 0., 0., 1., 0., 0., 1., 0., 0.,
        0., 0., 0., 0., 0., 0., 1., 0., 7., 0.,
        0., 0., 1., 0., 0., 1., 0., 0., 0., 0.,
        0., 0., 0., 0., 5., 0., 0., -3., 0., 0.,
        0., 0., 0., 0., 0., 0., 0., 0., 3., 0.,
        0., 2., 0., 0., 0., 0., 0., 2., 0., -1.,
    ];
    DMatrix::from_row_slice(10, 10, &rows)
}

fn poly(n: usize, terms: &[(usize, usize, usize, f64)]) -> MetzlerPencil {
    let degree = terms.iter().map(|t| t.2).max().unwrap_or(0);
    let mut coeffs = vec![DMatrix::zeros(n, n); degree + 1];
    for &(i, j, k, c) in terms {
        coeffs[k][(i, j)] += c;
    }
    MetzlerPencil::explicit(coeffs).expect("fixture pencil is well formed")
}

/// Upper triangular 3x3 pencil with z on the diagonal; pole of order 3 at 0.
pub fn counterexample_baseline() -> MetzlerPencil {
    poly(3, &[(0, 0, 1, 1.), (1, 1, 1, 1.), (2, 2, 1, 1.), (0, 1, 0, 1.), (1, 2, 0, 1.), (0, 2, 2, 1.)])
}

/// Baseline with z^2 added in the bottom-left corner.
pub fn counterexample_bottom_left() -> MetzlerPencil {
    poly(
        3,
        &[(0, 0, 1, 1.), (1, 1, 1, 1.), (2, 2, 1, 1.), (0, 1, 0, 1.), (1, 2, 0, 1.), (0, 2, 2, 1.), (2, 0, 2, 1.)],
    )
}

/// Baseline with the top-left z replaced by z^2.
pub fn counterexample_top_left() -> MetzlerPencil {
    poly(3, &[(0, 0, 2, 1.), (1, 1, 1, 1.), (2, 2, 1, 1.), (0, 1, 0, 1.), (1, 2, 0, 1.), (0, 2, 2, 1.)])
}

/// 4x4 pencil whose basic blocks have derivatives of both signs at 0.
pub fn counterexample_mixed() -> MetzlerPencil {
    poly(
        4,
        &[
            (0, 0, 1, 1.),
            (1, 1, 1, 1.),
            (2, 2, 1, -1.),
            (3, 3, 1, 1.),
            (0, 1, 0, 1.),
            (0, 2, 0, 1.),
            (1, 3, 0, 1.),
            (2, 3, 0, 1.),
        ],
    )
}

/// A - zI for a constant matrix A.
pub fn shifted_constant(a: &DMatrix<f64>) -> MetzlerPencil {
    let n = a.nrows();
    MetzlerPencil::explicit(vec![a.clone(), -DMatrix::identity(n, n)]).expect("square matrix")
}
