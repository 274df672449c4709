//! Dense state-vector engine for the physical chain.
//!
//! Site 0 is the most significant digit of the amplitude index. In the
//! two-chain readout layout the data chain occupies sites `0..N` and the
//! ancilla chain sites `N..2N`, ancilla `j` paired with data `j`.

mod measure;
pub mod oracle;
mod primitives;
pub mod protocol;
mod snapshot;

use std::f64::consts::PI;

use rand_distr::StandardNormal;

use crate::linalg::{self, CMatrix};
use crate::{Error, Result, C64};

pub use measure::{marginal, measure, Histogram};
pub use primitives::{fourier_matrix, ham_matrix, pulse_matrix, GlobalPrimitive};
pub use snapshot::{read_snapshot, read_text_snapshot, write_snapshot, write_text_snapshot};

/// Default amplitude cap, `2^26`.
pub const DEFAULT_CAP: usize = 1 << 26;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Layout {
    Single,
    DataPlusAncilla,
}

impl Layout {
    pub fn code(&self) -> u32 {
        match self {
            Layout::Single => 0,
            Layout::DataPlusAncilla => 1,
        }
    }

    pub fn from_code(c: u32) -> Option<Self> {
        match c {
            0 => Some(Layout::Single),
            1 => Some(Layout::DataPlusAncilla),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    d: u32,
    n: usize,
    layout: Layout,
    amps: Vec<C64>,
}

fn total_sites(n: usize, layout: Layout) -> usize {
    match layout {
        Layout::Single => n,
        Layout::DataPlusAncilla => 2 * n,
    }
}

/// `d^sites`, or a memory-cap error.
pub fn checked_dim(d: u32, sites: usize, cap: usize) -> Result<usize> {
    let requested = (d as u128).checked_pow(sites as u32).unwrap_or(u128::MAX);
    if requested > cap as u128 {
        return Err(Error::MemoryCap { requested, cap });
    }
    Ok(requested as usize)
}

impl DenseState {
    /// Computational basis state; `digits` lists every site's value.
    pub fn basis(d: u32, n: usize, layout: Layout, digits: &[u32]) -> Result<Self> {
        Self::basis_with_cap(d, n, layout, digits, DEFAULT_CAP)
    }

    pub fn basis_with_cap(
        d: u32,
        n: usize,
        layout: Layout,
        digits: &[u32],
        cap: usize,
    ) -> Result<Self> {
        if d < 2 {
            return Err(Error::UnsupportedDimension(format!("d = {d}")));
        }
        let sites = total_sites(n, layout);
        if digits.len() != sites {
            return Err(Error::DimensionMismatch(format!(
                "{} digits for {sites} sites",
                digits.len()
            )));
        }
        if let Some(&bad) = digits.iter().find(|&&s| s >= d) {
            return Err(Error::Domain(format!("digit {bad} not below d = {d}")));
        }
        let dim = checked_dim(d, sites, cap)?;
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        let idx = digits.iter().fold(0usize, |acc, &s| acc * d as usize + s as usize);
        amps[idx] = C64::new(1.0, 0.0);
        Ok(DenseState { d, n, layout, amps })
    }

    pub fn zero(d: u32, n: usize, layout: Layout) -> Result<Self> {
        Self::basis(d, n, layout, &vec![0; total_sites(n, layout)])
    }

    /// Wraps an amplitude vector, which must be normalized within `1e-8`.
    pub fn from_amplitudes(d: u32, n: usize, layout: Layout, amps: Vec<C64>) -> Result<Self> {
        if d < 2 {
            return Err(Error::UnsupportedDimension(format!("d = {d}")));
        }
        let dim = checked_dim(d, total_sites(n, layout), DEFAULT_CAP)?;
        if amps.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes, expected {dim}",
                amps.len()
            )));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::Validation(format!("state norm {norm} is not 1")));
        }
        Ok(DenseState { d, n, layout, amps })
    }

    /// Haar-like random state from Gaussian amplitudes.
    pub fn random(d: u32, n: usize, layout: Layout, rng: &mut impl rand::Rng) -> Result<Self> {
        let dim = checked_dim(d, total_sites(n, layout), DEFAULT_CAP)?;
        Ok(DenseState {
            d,
            n,
            layout,
            amps: random_vector(dim, rng),
        })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// Data-chain length `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn n_sites(&self) -> usize {
        total_sites(self.n, self.layout)
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Digits of amplitude index `idx`, site 0 first.
    pub fn digits(&self, mut idx: usize) -> Vec<u32> {
        let sites = self.n_sites();
        let mut out = vec![0u32; sites];
        for k in (0..sites).rev() {
            out[k] = (idx % self.d as usize) as u32;
            idx /= self.d as usize;
        }
        out
    }

    fn stride(&self, site: usize) -> usize {
        (self.d as usize).pow((self.n_sites() - 1 - site) as u32)
    }

    /// Applies a `d x d` matrix to one site (0-based).
    pub fn apply_site(&mut self, site: usize, m: &CMatrix) -> Result<()> {
        self.apply_sites(&[site], m)
    }

    /// Applies a `d^k x d^k` matrix to `sites` (0-based; the first listed site
    /// is the most significant factor of `m`).
    pub fn apply_sites(&mut self, sites: &[usize], m: &CMatrix) -> Result<()> {
        let d = self.d as usize;
        let k = sites.len();
        let block = d.pow(k as u32);
        if m.nrows() != block || m.ncols() != block {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix on {k} sites of dimension {d}",
                m.nrows(),
                m.ncols()
            )));
        }
        if let Some(&s) = sites.iter().find(|&&s| s >= self.n_sites()) {
            return Err(Error::Domain(format!("site {s} outside the register")));
        }
        for i in 0..k {
            if sites[i + 1..].contains(&sites[i]) {
                return Err(Error::Domain(format!("site {} listed twice", sites[i])));
            }
        }
        let strides: Vec<usize> = sites.iter().map(|&s| self.stride(s)).collect();
        let offsets: Vec<usize> = (0..block)
            .map(|b| {
                let mut rem = b;
                let mut off = 0;
                for j in (0..k).rev() {
                    off += (rem % d) * strides[j];
                    rem /= d;
                }
                off
            })
            .collect();
        let mut buf = vec![C64::new(0.0, 0.0); block];
        for base in 0..self.amps.len() {
            // Visit each block once, from its all-zero corner.
            if strides.iter().any(|&st| (base / st) % d != 0) {
                continue;
            }
            for (b, &off) in offsets.iter().enumerate() {
                buf[b] = self.amps[base + off];
            }
            for (r, &off) in offsets.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (c, &x) in buf.iter().enumerate() {
                    acc += m[(r, c)] * x;
                }
                self.amps[base + off] = acc;
            }
        }
        Ok(())
    }

    /// Multiplies every amplitude by `zeta^{phase(digits)}`.
    pub fn apply_diagonal_phase(&mut self, phase: impl Fn(&[u32]) -> i64) {
        let d = self.d;
        let table: Vec<C64> = (0..d)
            .map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / d as f64))
            .collect();
        let sites = self.n_sites();
        let mut digits = vec![0u32; sites];
        for (idx, a) in self.amps.iter_mut().enumerate() {
            let mut rem = idx;
            for k in (0..sites).rev() {
                digits[k] = (rem % d as usize) as u32;
                rem /= d as usize;
            }
            let p = phase(&digits).rem_euclid(d as i64) as usize;
            if p != 0 {
                *a *= table[p];
            }
        }
    }

    pub fn apply(&mut self, prim: &GlobalPrimitive) -> Result<()> {
        primitives::apply(self, prim)
    }

    pub fn apply_all(&mut self, prims: &[GlobalPrimitive]) -> Result<()> {
        for p in prims {
            primitives::apply(self, p)?;
        }
        Ok(())
    }

    /// Site-reversed copy (`l <-> N+1-l` on each chain).
    pub fn site_reversed(&self) -> DenseState {
        let n = self.n;
        let perm: Vec<usize> = match self.layout {
            Layout::Single => (0..n).rev().collect(),
            Layout::DataPlusAncilla => (0..n).rev().chain((n..2 * n).rev()).collect(),
        };
        self.permuted(&perm)
    }

    /// Copy whose site `k` carries the content of old site `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> DenseState {
        let d = self.d as usize;
        let sites = self.n_sites();
        let mut out = vec![C64::new(0.0, 0.0); self.amps.len()];
        for (idx, &a) in self.amps.iter().enumerate() {
            let old = self.digits(idx);
            let new_idx = (0..sites).fold(0usize, |acc, k| acc * d + old[perm[k]] as usize);
            out[new_idx] = a;
        }
        DenseState { amps: out, ..self.clone() }
    }

    /// Reduced density matrix of `sites` (0-based, listed order).
    pub fn reduced_density(&self, sites: &[usize]) -> CMatrix {
        let d = self.d as usize;
        let k = sites.len();
        let dim = d.pow(k as u32);
        let rest: Vec<usize> = (0..self.n_sites()).filter(|s| !sites.contains(s)).collect();
        let rest_dim = d.pow(rest.len() as u32);
        let index = |kept: usize, other: usize| -> usize {
            let mut digits = vec![0usize; self.n_sites()];
            let mut r = kept;
            for j in (0..k).rev() {
                digits[sites[j]] = r % d;
                r /= d;
            }
            let mut r = other;
            for j in (0..rest.len()).rev() {
                digits[rest[j]] = r % d;
                r /= d;
            }
            digits.iter().fold(0usize, |acc, &x| acc * d + x)
        };
        let mut rho = CMatrix::zeros(dim, dim);
        for o in 0..rest_dim {
            let col: Vec<C64> = (0..dim).map(|i| self.amps[index(i, o)]).collect();
            for i in 0..dim {
                for j in 0..dim {
                    rho[(i, j)] += col[i] * col[j].conj();
                }
            }
        }
        rho
    }

    /// Extends a single-chain state with an ancilla chain in `|0...0>`.
    pub fn with_ancilla_chain(&self) -> Result<DenseState> {
        if self.layout != Layout::Single {
            return Err(Error::Validation("state already carries an ancilla chain".into()));
        }
        let anc = checked_dim(self.d, self.n, DEFAULT_CAP)?;
        checked_dim(self.d, 2 * self.n, DEFAULT_CAP)?;
        let mut amps = vec![C64::new(0.0, 0.0); self.amps.len() * anc];
        for (i, &a) in self.amps.iter().enumerate() {
            amps[i * anc] = a;
        }
        Ok(DenseState {
            d: self.d,
            n: self.n,
            layout: Layout::DataPlusAncilla,
            amps,
        })
    }
}

pub(crate) fn random_vector(dim: usize, rng: &mut impl rand::Rng) -> Vec<C64> {
    let mut v: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|a| *a /= norm);
    v
}

/// `|<a|b>|`.
pub fn fidelity(a: &DenseState, b: &DenseState) -> Result<f64> {
    if a.d != b.d || a.n != b.n || a.layout != b.layout {
        return Err(Error::DimensionMismatch(format!(
            "states (d={}, N={}, {:?}) and (d={}, N={}, {:?})",
            a.d, a.n, a.layout, b.d, b.n, b.layout
        )));
    }
    Ok(linalg::overlap_abs(&a.amps, &b.amps).min(1.0))
}

/// `0.5 * ||rho - sigma||_1` for Hermitian arguments.
pub fn trace_distance(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    let diff = rho - sigma;
    let eig = diff.symmetric_eigen();
    0.5 * eig.eigenvalues.iter().map(|e| e.abs()).sum::<f64>()
}

/// Logical register count stored in a mirror-encoded chain of `N` sites.
pub fn logical_count(n: usize) -> usize {
    n / 2
}

/// `|psi> (x) |chi> (x) reverse(|psi>)`, with `chi = |0>` for odd `N`.
pub fn encode_mirror(logical: &[C64], d: u32, n: usize) -> Result<DenseState> {
    let m = logical_count(n);
    if m == 0 {
        return Err(Error::Domain(format!("N = {n} holds no logical site")));
    }
    let ldim = checked_dim(d, m, DEFAULT_CAP)?;
    if logical.len() != ldim {
        return Err(Error::DimensionMismatch(format!(
            "logical state has {} amplitudes, expected d^{m} = {ldim}",
            logical.len()
        )));
    }
    let dim = checked_dim(d, n, DEFAULT_CAP)?;
    let du = d as usize;
    // Index of the reversed copy: sites N..N+1-M read back to front.
    let reverse = |x: usize| -> usize {
        let mut r = x;
        let mut out = 0;
        for _ in 0..m {
            out = out * du + r % du;
            r /= du;
        }
        out
    };
    let mid = n % 2;
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    for (a, &pa) in logical.iter().enumerate() {
        if pa == C64::new(0.0, 0.0) {
            continue;
        }
        for (b, &pb) in logical.iter().enumerate() {
            // Mirror half stores psi with its digit order reversed.
            let idx = (a * du.pow(mid as u32)) * ldim + reverse(b);
            amps[idx] = pa * pb;
        }
    }
    let mut st = DenseState::from_amplitudes(d, n, Layout::Single, amps)
        .map_err(|e| Error::Validation(format!("logical state must be normalized: {e}")))?;
    st.layout = Layout::Single;
    Ok(st)
}

/// Mirror encoding with a `|0>` ancilla between neighbouring logical sites:
/// `L1 a L2 a ... L_M | L_M a ... a L1`, `N' = 4M - 2` sites.
pub fn encode_interleaved(logical: &[C64], d: u32, m: usize) -> Result<DenseState> {
    if m == 0 {
        return Err(Error::Domain("need at least one logical site".into()));
    }
    let n = 4 * m - 2;
    let ldim = checked_dim(d, m, DEFAULT_CAP)?;
    if logical.len() != ldim {
        return Err(Error::DimensionMismatch(format!(
            "logical state has {} amplitudes, expected {ldim}",
            logical.len()
        )));
    }
    let dim = checked_dim(d, n, DEFAULT_CAP)?;
    let du = d as usize;
    let digits_of = |x: usize| -> Vec<usize> {
        let mut r = x;
        let mut out = vec![0; m];
        for k in (0..m).rev() {
            out[k] = r % du;
            r /= du;
        }
        out
    };
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    for (a, &pa) in logical.iter().enumerate() {
        for (b, &pb) in logical.iter().enumerate() {
            let (da, db) = (digits_of(a), digits_of(b));
            let mut phys = vec![0usize; n];
            for k in 0..m {
                phys[2 * k] = da[k];
                phys[n - 1 - 2 * k] = db[k];
            }
            let idx = phys.iter().fold(0usize, |acc, &x| acc * du + x);
            amps[idx] = pa * pb;
        }
    }
    DenseState::from_amplitudes(d, n, Layout::Single, amps)
}

/// Physical 1-based positions of logical site `k` in [`encode_interleaved`].
pub fn interleaved_position(k: usize) -> usize {
    2 * k - 1
}

/// Recovers the logical state (up to phase) from a product `psi (x) rest`
/// of the first `m` sites, via the dominant eigenvector of their reduced state.
pub fn decode_first_half(state: &DenseState, sites: &[usize]) -> Vec<C64> {
    let rho = state.reduced_density(sites);
    let eig = rho.symmetric_eigen();
    let (best, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |acc, (i, &e)| if e > acc.1 { (i, e) } else { acc });
    eig.eigenvectors.column(best).iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn encode_examples() {
        let st = encode_mirror(&[c(1.0), c(0.0)], 2, 2).unwrap();
        assert_eq!(st.amplitudes()[0], c(1.0));
        let st = encode_mirror(&[c(0.0), c(1.0)], 2, 3).unwrap();
        // |101> is index 5.
        assert!((st.amplitudes()[5] - c(1.0)).norm() < 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = [c(h), c(0.0), c(0.0), c(h)];
        let st = encode_mirror(&bell, 2, 4).unwrap();
        assert!((st.norm() - 1.0).abs() < 1e-12);
        // |00>|00> and |11>|11> and cross terms |00>|11>, |11>|00>.
        for idx in [0b0000, 0b0011, 0b1100, 0b1111] {
            assert!((st.amplitudes()[idx] - c(0.5)).norm() < 1e-12);
        }
        assert_eq!(st.site_reversed(), st);
        assert!(matches!(
            encode_mirror(&[c(1.0)], 2, 4),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn memory_cap_is_enforced() {
        assert!(matches!(
            DenseState::basis_with_cap(3, 5, Layout::Single, &[0; 5], 100),
            Err(Error::MemoryCap { requested: 243, cap: 100 })
        ));
        assert!(matches!(
            DenseState::zero(2, 27, Layout::Single),
            Err(Error::MemoryCap { .. })
        ));
    }

    #[test]
    fn two_site_kernel_matches_kron() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let st = DenseState::random(3, 3, Layout::Single, &mut rng).unwrap();
        let a = CMatrix::from_fn(3, 3, |i, j| C64::new((i + 2 * j) as f64, (i * j) as f64 - 1.0));
        let b = CMatrix::from_fn(3, 3, |i, j| C64::new((3 * i + j) as f64 * 0.5, i as f64));
        let mut one = st.clone();
        one.apply_site(0, &a).unwrap();
        one.apply_site(2, &b).unwrap();
        let mut two = st.clone();
        two.apply_sites(&[2, 0], &linalg::kron(&b, &a)).unwrap();
        for (x, y) in one.amplitudes().iter().zip(two.amplitudes()) {
            assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn fidelity_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = DenseState::random(2, 3, Layout::Single, &mut rng).unwrap();
        assert!((fidelity(&psi, &psi).unwrap() - 1.0).abs() < 1e-12);
        let mut phased = psi.clone();
        phased.amps.iter_mut().for_each(|a| *a *= C64::from_polar(1.0, 0.4));
        assert!((fidelity(&psi, &phased).unwrap() - 1.0).abs() < 1e-12);
        let zero = DenseState::basis(2, 1, Layout::Single, &[0]).unwrap();
        let one = DenseState::basis(2, 1, Layout::Single, &[1]).unwrap();
        assert_eq!(fidelity(&zero, &one).unwrap(), 0.0);
        assert!(fidelity(&zero, &psi).is_err());
    }

    #[test]
    fn interleaved_layout() {
        // M = 2: L1 a L2 L2 a L1, logical |01>.
        let st = encode_interleaved(&[c(0.0), c(1.0), c(0.0), c(0.0)], 2, 2).unwrap();
        assert_eq!(st.n(), 6);
        let idx = st.amplitudes().iter().position(|a| a.norm() > 0.5).unwrap();
        assert_eq!(st.digits(idx), vec![0, 0, 1, 1, 0, 0]);
    }

    #[test]
    fn decode_recovers_product_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let psi = random_vector(9, &mut rng);
        let st = encode_mirror(&psi, 3, 4).unwrap();
        let got = decode_first_half(&st, &[0, 1]);
        assert!(linalg::overlap_abs(&got, &psi) > 1.0 - 1e-10);
    }
}
