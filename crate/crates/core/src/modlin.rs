//! Exact linear algebra over `Z_n`.
//!
//! Prime moduli get ordinary Gaussian elimination. General moduli go through
//! a Smith form computed directly on residues; the 2x2 gcd transforms used
//! for elimination have determinant 1, so they stay invertible mod `n`.

use crate::ring::{ext_gcd, gcd};

pub type Mat = Vec<Vec<u64>>;

fn reduce(v: i128, n: u64) -> u64 {
    v.rem_euclid(n as i128) as u64
}

fn inv_mod(a: u64, n: u64) -> Option<u64> {
    let (g, x, _) = ext_gcd(a as i64, n as i64);
    (g == 1).then(|| reduce(x as i128, n))
}

/// Reduced row echelon form over `GF(p)`; returns pivot columns.
pub fn rref_mod_p(m: &mut Mat, ncols: usize, p: u64) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(sel) = (row..m.len()).find(|&r| !m[r][col].is_multiple_of(p)) else {
            continue;
        };
        m.swap(row, sel);
        let inv = inv_mod(m[row][col], p).expect("nonzero element of a prime field");
        for v in m[row].iter_mut() {
            *v = *v * inv % p;
        }
        for r in 0..m.len() {
            if r != row && m[r][col] != 0 {
                let k = m[r][col];
                for c in 0..ncols {
                    m[r][c] = (m[r][c] + p - k * m[row][c] % p) % p;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    pivots
}

/// Basis of `{c : A c = 0}` over `GF(p)`, one vector per free column.
pub fn kernel_mod_p(a: &Mat, ncols: usize, p: u64) -> Vec<Vec<u64>> {
    let mut m: Mat = a.iter().map(|r| r.iter().map(|v| v % p).collect()).collect();
    let pivots = rref_mod_p(&mut m, ncols, p);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![0u64; ncols];
            v[f] = 1;
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = (p - m[r][f]) % p;
            }
            v
        })
        .collect()
}

/// Smith decomposition `U A V = D` over `Z_n`.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub n: u64,
    pub u: Mat,
    pub v: Mat,
    /// Diagonal entries `D[i][i]`, `i < rank`; all others vanish mod `n`.
    pub diag: Vec<u64>,
    pub rows: usize,
    pub cols: usize,
}

fn identity(k: usize) -> Mat {
    (0..k)
        .map(|i| (0..k).map(|j| (i == j) as u64).collect())
        .collect()
}

/// Replace rows `(i, j)` by `(x r_i + y r_j, -b/g r_i + a/g r_j)`.
fn row_combine(m: &mut Mat, i: usize, j: usize, coeffs: [i128; 4], n: u64) {
    let [p, q, r, s] = coeffs;
    for c in 0..m[i].len() {
        let (a, b) = (m[i][c] as i128, m[j][c] as i128);
        m[i][c] = reduce(p * a + q * b, n);
        m[j][c] = reduce(r * a + s * b, n);
    }
}

fn col_combine(m: &mut Mat, i: usize, j: usize, coeffs: [i128; 4], n: u64) {
    let [p, q, r, s] = coeffs;
    for row in m.iter_mut() {
        let (a, b) = (row[i] as i128, row[j] as i128);
        row[i] = reduce(p * a + q * b, n);
        row[j] = reduce(r * a + s * b, n);
    }
}

/// Unimodular 2x2 transform sending `(a, b)` to `(g, 0)`.
fn gcd_transform(a: u64, b: u64) -> [i128; 4] {
    // Plain elimination when the pivot divides; keeps the pivot row intact.
    if b.is_multiple_of(a) {
        return [1, 0, -((b / a) as i128), 1];
    }
    let (g, x, y) = ext_gcd(a as i64, b as i64);
    let (g, x, y) = (g as i128, x as i128, y as i128);
    [x, y, -(b as i128) / g, a as i128 / g]
}

pub fn smith_mod_n(a: &Mat, cols: usize, n: u64) -> SmithForm {
    let rows = a.len();
    let mut m: Mat = a.iter().map(|r| r.iter().map(|v| v % n).collect()).collect();
    let mut u = identity(rows);
    let mut v = identity(cols);
    let mut diag = Vec::new();
    for t in 0..rows.min(cols) {
        // Pivot: smallest nonzero residue in the trailing block.
        let mut best: Option<(u64, usize, usize)> = None;
        for (i, row) in m.iter().enumerate().skip(t) {
            for (j, &val) in row.iter().enumerate().skip(t) {
                if val != 0 && best.is_none_or(|b| val < b.0) {
                    best = Some((val, i, j));
                }
            }
        }
        let Some((_, pi, pj)) = best else { break };
        m.swap(t, pi);
        u.swap(t, pi);
        for row in m.iter_mut() {
            row.swap(t, pj);
        }
        for row in v.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                if m[i][t] != 0 {
                    let tr = gcd_transform(m[t][t], m[i][t]);
                    row_combine(&mut m, t, i, tr, n);
                    row_combine(&mut u, t, i, tr, n);
                    dirty = true;
                }
            }
            for j in t + 1..cols {
                if m[t][j] != 0 {
                    let tr = gcd_transform(m[t][t], m[t][j]);
                    col_combine(&mut m, t, j, tr, n);
                    col_combine(&mut v, t, j, tr, n);
                    dirty = true;
                }
            }
            if !dirty {
                break;
            }
        }
        if m[t][t] == 0 {
            break;
        }
        diag.push(m[t][t]);
    }
    SmithForm { n, u, v, diag, rows, cols }
}

/// One solution of `A x = b (mod n)`, or `None` if the system is
/// inconsistent.
pub fn solve_mod_n(a: &Mat, cols: usize, b: &[u64], n: u64) -> Option<Vec<u64>> {
    let sf = smith_mod_n(a, cols, n);
    let c: Vec<u64> = sf
        .u
        .iter()
        .map(|row| reduce(row.iter().zip(b).map(|(&x, &y)| x as i128 * y as i128).sum(), n))
        .collect();
    let mut y = vec![0u64; cols];
    for (i, &ci) in c.iter().enumerate() {
        if i < sf.diag.len() {
            let di = sf.diag[i];
            let g = gcd(di, n);
            if ci % g != 0 {
                return None;
            }
            let m = n / g;
            let inv = if m == 1 { 0 } else { inv_mod((di / g) % m, m)? };
            y[i] = ((ci / g) as u128 * inv as u128 % m.max(1) as u128) as u64;
        } else if ci != 0 {
            return None;
        }
    }
    let x = sf
        .v
        .iter()
        .map(|row| reduce(row.iter().zip(&y).map(|(&p, &q)| p as i128 * q as i128).sum(), n))
        .collect();
    Some(x)
}

pub fn mat_vec_mod(a: &Mat, x: &[u64], n: u64) -> Vec<u64> {
    a.iter()
        .map(|row| reduce(row.iter().zip(x).map(|(&p, &q)| p as i128 * q as i128).sum(), n))
        .collect()
}

pub fn transpose(a: &Mat, cols: usize) -> Mat {
    (0..cols).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_solvable(a: &Mat, cols: usize, b: &[u64], n: u64) -> bool {
        let total = (n as usize).pow(cols as u32);
        (0..total).any(|mut k| {
            let x: Vec<u64> = (0..cols)
                .map(|_| {
                    let v = (k % n as usize) as u64;
                    k /= n as usize;
                    v
                })
                .collect();
            mat_vec_mod(a, &x, n) == b
        })
    }

    #[test]
    fn kernel_of_simple_system() {
        let a = vec![vec![1, 1, 0], vec![0, 1, 1]];
        let k = kernel_mod_p(&a, 3, 5);
        assert_eq!(k.len(), 1);
        assert_eq!(mat_vec_mod(&a, &k[0], 5), vec![0, 0]);
        assert_eq!(k[0], vec![1, 4, 1]);
    }

    #[test]
    fn composite_inconsistency() {
        // 2 x = 1 has no solution mod 4.
        assert_eq!(solve_mod_n(&vec![vec![2]], 1, &[1], 4), None);
        let x = solve_mod_n(&vec![vec![2]], 1, &[2], 4).unwrap();
        assert_eq!(2 * x[0] % 4, 2);
    }

    proptest! {
        #[test]
        fn smith_solver_matches_brute_force(
            n in 2u64..10,
            entries in proptest::collection::vec(0u64..10, 6),
            rhs in proptest::collection::vec(0u64..10, 2),
        ) {
            let a: Mat = vec![
                entries[0..3].iter().map(|v| v % n).collect(),
                entries[3..6].iter().map(|v| v % n).collect(),
            ];
            let b: Vec<u64> = rhs.iter().map(|v| v % n).collect();
            let got = solve_mod_n(&a, 3, &b, n);
            prop_assert_eq!(got.is_some(), brute_solvable(&a, 3, &b, n));
            if let Some(x) = got {
                prop_assert_eq!(mat_vec_mod(&a, &x, n), b);
            }
        }

        #[test]
        fn prime_kernel_vectors_annihilate(
            p in prop::sample::select(vec![2u64, 3, 5, 7, 11]),
            entries in proptest::collection::vec(0u64..11, 12),
        ) {
            let a: Mat = entries.chunks(4).map(|r| r.iter().map(|v| v % p).collect()).collect();
            let ker = kernel_mod_p(&a, 4, p);
            let mut m = a.clone();
            let rank = rref_mod_p(&mut m, 4, p).len();
            prop_assert_eq!(ker.len(), 4 - rank);
            for k in ker {
                prop_assert!(mat_vec_mod(&a, &k, p).iter().all(|&v| v == 0));
            }
        }
    }
}
