#![allow(dead_code)]

use qca_core::linalg::{self, CMatrix};
use qca_core::simulator::{DenseState, Layout};
use qca_core::weyl::{self, Dimension, Part, WeylLabel};
use qca_core::C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn weyl(d: u32, a: i64, b: i64) -> CMatrix {
    weyl::weyl_matrix(Dimension::Finite(d), WeylLabel::new(d, a, b)).unwrap()
}

pub fn basis_element(d: u32, a: i64, b: i64, part: Part) -> CMatrix {
    weyl::hermitian_basis_matrix(Dimension::Finite(d), WeylLabel::new(d, a, b), part)
        .unwrap()
        .matrix
}

/// `c A + conj(c) A^dag`.
pub fn weighted_sym(a: &CMatrix, c: C64) -> CMatrix {
    a * c + a.adjoint() * c.conj()
}

/// Applies `exp(i t G)` on 0-based `sites`.
pub fn apply_exp(state: &DenseState, sites: &[usize], gen: &CMatrix, t: f64) -> DenseState {
    let mut out = state.clone();
    out.apply_sites(sites, &linalg::expm_i_hermitian(gen, t)).unwrap();
    out
}

pub fn random_state(d: u32, n: usize, seed: u64) -> DenseState {
    DenseState::random(d, n, Layout::Single, &mut rng(seed)).unwrap()
}

pub fn random_logical(dim: usize, seed: u64) -> Vec<C64> {
    let mut r = rng(seed);
    let st = DenseState::random(dim as u32, 1, Layout::Single, &mut r).unwrap();
    st.amplitudes().to_vec()
}
