//! Full-matrix constructions for small registers, built by Kronecker
//! products independently of the stride kernels. Used to cross-check the
//! state-vector engine and the tableau.

use super::primitives::{fourier_matrix, ham_matrix, pulse_matrix};
use super::GlobalPrimitive;
use crate::linalg::{self, CMatrix};
use crate::tableau::PauliFrame;
use crate::weyl::{self, Dimension, WeylLabel};
use crate::{Error, Result, C64};

/// `(x) ops[k]` over `ops.len()` sites, site 0 most significant.
pub fn kron_all(ops: &[CMatrix]) -> CMatrix {
    ops.iter()
        .skip(1)
        .fold(ops[0].clone(), |acc, m| linalg::kron(&acc, m))
}

/// Operator acting as `op` on 0-based `site` of an `n`-site register.
pub fn embed(d: u32, n: usize, site: usize, op: &CMatrix) -> CMatrix {
    let ops: Vec<CMatrix> = (0..n)
        .map(|k| if k == site { op.clone() } else { linalg::identity(d as usize) })
        .collect();
    kron_all(&ops)
}

/// Dense matrix of the word `zeta^f (x) X^{x_j} Z^{z_j}`.
pub fn pauli_word_matrix(frame: &PauliFrame) -> CMatrix {
    let d = frame.d();
    let ops: Vec<CMatrix> = frame
        .x
        .iter()
        .zip(&frame.z)
        .map(|(&a, &b)| {
            weyl::weyl_matrix(Dimension::Finite(d), WeylLabel::new(d, a as i64, b as i64))
                .expect("finite dimension")
        })
        .collect();
    kron_all(&ops) * weyl::zeta_int(d, frame.f as i64)
}

fn diagonal(d: u32, sites: usize, phase: impl Fn(&[usize]) -> i64) -> CMatrix {
    let du = d as usize;
    let dim = du.pow(sites as u32);
    let mut m = CMatrix::zeros(dim, dim);
    for idx in 0..dim {
        let mut digits = vec![0usize; sites];
        let mut r = idx;
        for k in (0..sites).rev() {
            digits[k] = r % du;
            r /= du;
        }
        m[(idx, idx)] = weyl::zeta_int(d, phase(&digits));
    }
    m
}

/// `CZ|j,k> = zeta^{jk}|j,k>` on two sites.
pub fn cz_matrix(d: u32) -> CMatrix {
    diagonal(d, 2, |s| (s[0] * s[1]) as i64)
}

pub fn swap_matrix(d: u32) -> CMatrix {
    let du = d as usize;
    let mut m = CMatrix::zeros(du * du, du * du);
    for a in 0..du {
        for b in 0..du {
            m[(b * du + a, a * du + b)] = C64::new(1.0, 0.0);
        }
    }
    m
}

/// Matrix of a homogeneous primitive on a single `n`-site chain.
pub fn primitive_matrix(d: u32, n: usize, prim: &GlobalPrimitive) -> Result<CMatrix> {
    use GlobalPrimitive::*;
    let all = |m: CMatrix| kron_all(&vec![m; n]);
    let chain = || diagonal(d, n, |s| (0..n - 1).map(|j| (s[j] * s[j + 1]) as i64).sum());
    Ok(match prim {
        FourierAll { dagger } => all(fourier_matrix(d, !dagger)),
        CzChain => chain(),
        Pulse { strength } => all(pulse_matrix(d, strength % d)),
        HamPulse { beta, u, v } => all(ham_matrix(d, *beta, *u, *v)),
        TStep => all(fourier_matrix(d, true)) * chain(),
        TInv => chain().adjoint() * all(fourier_matrix(d, false)),
        FourierSelect { sites, dagger } => {
            let f = fourier_matrix(d, !dagger);
            let ops: Vec<CMatrix> = (1..=n)
                .map(|l| if sites.contains(&l) { f.clone() } else { linalg::identity(d as usize) })
                .collect();
            kron_all(&ops)
        }
        CzInterchain | MeasureAncilla => {
            return Err(Error::Validation(format!("{prim} has no single-chain matrix")))
        }
    })
}

/// Product of a primitive sequence in time order.
pub fn program_matrix(d: u32, n: usize, prims: &[GlobalPrimitive]) -> Result<CMatrix> {
    let dim = (d as usize).pow(n as u32);
    prims.iter().try_fold(linalg::identity(dim), |acc, p| {
        Ok(primitive_matrix(d, n, p)? * acc)
    })
}

/// `exp(i t G)` of a Hermitian generator `G` acting on 0-based `sites`
/// (listed order = Kronecker order of `G`) in an `n`-site register.
pub fn local_unitary(d: u32, n: usize, sites: &[usize], gen: &CMatrix, t: f64) -> CMatrix {
    let u = linalg::expm_i_hermitian(gen, t);
    embed_multi(d, n, sites, &u)
}

/// Embeds a `d^k x d^k` operator on arbitrary 0-based sites.
pub fn embed_multi(d: u32, n: usize, sites: &[usize], op: &CMatrix) -> CMatrix {
    let du = d as usize;
    let dim = du.pow(n as u32);
    let k = sites.len();
    let mut out = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut digits = vec![0usize; n];
        let mut r = col;
        for s in (0..n).rev() {
            digits[s] = r % du;
            r /= du;
        }
        let sub_col = sites.iter().fold(0, |acc, &s| acc * du + digits[s]);
        for sub_row in 0..du.pow(k as u32) {
            let amp = op[(sub_row, sub_col)];
            if amp == C64::new(0.0, 0.0) {
                continue;
            }
            let mut rd = digits.clone();
            let mut rr = sub_row;
            for j in (0..k).rev() {
                rd[sites[j]] = rr % du;
                rr /= du;
            }
            let row = rd.iter().fold(0, |acc, &x| acc * du + x);
            out[(row, col)] += amp;
        }
    }
    out
}
