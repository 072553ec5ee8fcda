//! Row reduction over a finite field. Matrices are row-major `Vec<Vec<Elem>>`.

use crate::gf::{Elem, Field};

/// Reduces `m` to reduced row echelon form in place, dropping zero rows.
/// Returns the pivot columns.
pub fn rref(f: &Field, m: &mut Vec<Vec<Elem>>) -> Vec<usize> {
    let ncols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pr) = (rank..m.len()).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(rank, pr);
        let inv = f.inv_nonzero(m[rank][col]);
        if inv != 1 {
            for x in m[rank].iter_mut() {
                *x = f.mul(*x, inv);
            }
        }
        let pivot_row = m[rank].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r == rank || row[col] == 0 {
                continue;
            }
            let c = f.neg(row[col]);
            for (x, &y) in row.iter_mut().zip(&pivot_row).skip(col) {
                if y != 0 {
                    *x = f.add(*x, f.mul(c, y));
                }
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    m.truncate(rank);
    pivots
}

pub fn rank(f: &Field, m: &[Vec<Elem>]) -> usize {
    let mut m = m.to_vec();
    rref(f, &mut m).len()
}

/// Basis (in reduced echelon form) of `{x : m x = 0}` for vectors of length `ncols`.
pub fn nullspace(f: &Field, m: &[Vec<Elem>], ncols: usize) -> Vec<Vec<Elem>> {
    let mut r = m.to_vec();
    let pivots = rref(f, &mut r);
    let mut is_pivot = vec![false; ncols];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    let mut basis: Vec<Vec<Elem>> = (0..ncols)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut x = vec![0; ncols];
            x[free] = 1;
            for (row, &pc) in r.iter().zip(&pivots) {
                x[pc] = f.neg(row[free]);
            }
            x
        })
        .collect();
    rref(f, &mut basis);
    basis
}

/// `m * v`.
pub fn mat_vec(f: &Field, m: &[Vec<Elem>], v: &[Elem]) -> Vec<Elem> {
    m.iter().map(|row| f.dot(row, v)).collect()
}
