//! Exact rational linear algebra: the null space of a homogeneous system.

use num::traits::{One, Signed, Zero};

use crate::rational::Rat;

/// Null-space basis of the homogeneous system `rows * x = 0` over the
/// rationals, computed by Gauss-Jordan elimination with exact arithmetic.
///
/// Each basis vector is scaled so its first nonzero coordinate equals 1;
/// vectors come out ordered by the index of that coordinate. An empty return
/// means the null space is trivial.
#[allow(clippy::needless_range_loop)] // rows are read and written across indices
pub fn nullspace(rows: &[Vec<Rat>], n_cols: usize) -> Vec<Vec<Rat>> {
    let mut mat: Vec<Vec<Rat>> = rows
        .iter()
        .filter(|r| r.iter().any(|c| !c.is_zero()))
        .cloned()
        .collect();
    for r in &mat {
        assert_eq!(r.len(), n_cols, "ragged matrix");
    }

    // reduced row echelon form
    let mut pivot_cols: Vec<usize> = vec![];
    let mut row = 0;
    for col in 0..n_cols {
        // partial pivot by largest absolute value keeps numerators small-ish
        let pivot = (row..mat.len())
            .filter(|&i| !mat[i][col].is_zero())
            .max_by(|&i, &j| mat[i][col].abs().cmp(&mat[j][col].abs()));
        let Some(p) = pivot else { continue };
        mat.swap(row, p);
        let inv = mat[row][col].clone().recip();
        for c in col..n_cols {
            let v = &mat[row][c] * &inv;
            mat[row][c] = v;
        }
        for i in 0..mat.len() {
            if i != row && !mat[i][col].is_zero() {
                let factor = mat[i][col].clone();
                for c in col..n_cols {
                    let v = &mat[i][c] - &factor * &mat[row][c];
                    mat[i][c] = v;
                }
            }
        }
        pivot_cols.push(col);
        row += 1;
        if row == mat.len() {
            break;
        }
    }

    let free_cols: Vec<usize> = (0..n_cols).filter(|c| !pivot_cols.contains(c)).collect();
    let mut basis = vec![];
    for &fc in &free_cols {
        let mut v = vec![Rat::zero(); n_cols];
        v[fc] = Rat::one();
        for (r, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = -mat[r][fc].clone();
        }
        // scale so the first nonzero coordinate is 1
        if let Some(first) = v.iter().find(|x| !x.is_zero()).cloned() {
            if !first.is_one() {
                let inv = first.recip();
                for x in &mut v {
                    *x = &*x * &inv;
                }
            }
        }
        basis.push(v);
    }
    basis.sort_by_key(|v| v.iter().position(|x| !x.is_zero()).unwrap_or(n_cols));
    basis
}
