//! Heisenberg-picture evolution of Pauli words `zeta^f (x) X^{x_j} Z^{z_j}`.
//!
//! Every map here is a conjugation `A -> U A U^{-1}` by a global Clifford
//! operation. Exponents live in a [`Ring`]: `Z_d` for qudit chains, the reals
//! for continuous-variable chains. The phase exponent is reduced mod `d`,
//! since exponents are canonical residues and `X^d = Z^d = I` holds exactly.
//!
//! Conventions: `F = (1/sqrt d) sum zeta^{rs} |r><s|`, `CZ|j,k> = zeta^{jk}|j,k>`
//! on neighbours, and the step operator `T = prod_j F_j^{-1} * prod CZ`
//! (controlled phases act first).

use crate::ring::{Reals, Ring, Zmod};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Frame<R: Ring> {
    pub ring: R,
    pub x: Vec<R::Elem>,
    pub z: Vec<R::Elem>,
    pub f: R::Elem,
}

/// Qudit frame with exponents in `Z_d`.
pub type PauliFrame = Frame<Zmod>;
/// Continuous-variable frame with real exponents.
pub type CvFrame = Frame<Reals>;

fn gamma<R: Ring>(ring: &R, x: &[R::Elem]) -> Vec<R::Elem> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let mut s = ring.zero();
            if i > 0 {
                s = ring.add(s, x[i - 1]);
            }
            if i + 1 < n {
                s = ring.add(s, x[i + 1]);
            }
            s
        })
        .collect()
}

/// `L(s_1, ..., s_N) = (s_2, ..., s_N, 0)`.
fn shift_left<R: Ring>(ring: &R, x: &[R::Elem]) -> Vec<R::Elem> {
    let mut out: Vec<_> = x.iter().skip(1).copied().collect();
    out.push(ring.zero());
    out
}

impl<R: Ring> Frame<R> {
    pub fn new(ring: R, x: Vec<R::Elem>, z: Vec<R::Elem>, f: R::Elem) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::DimensionMismatch(format!(
                "x has {} sites, z has {}",
                x.len(),
                z.len()
            )));
        }
        // Route every entry through the ring so integer inputs are reduced.
        let zero = ring.zero();
        let x = x.into_iter().map(|v| ring.add(v, zero)).collect();
        let z = z.into_iter().map(|v| ring.add(v, zero)).collect();
        let f = ring.add(f, zero);
        Ok(Frame { ring, x, z, f })
    }

    pub fn identity(ring: R, n: usize) -> Self {
        Frame {
            ring,
            x: vec![ring.zero(); n],
            z: vec![ring.zero(); n],
            f: ring.zero(),
        }
    }

    /// `X(u) Z(v)` on site `l` (1-based), identity elsewhere.
    pub fn single_site(ring: R, n: usize, l: usize, u: R::Elem, v: R::Elem) -> Result<Self> {
        if l == 0 || l > n {
            return Err(Error::Domain(format!("site {l} outside 1..={n}")));
        }
        let mut fr = Self::identity(ring, n);
        fr.x[l - 1] = ring.add(u, ring.zero());
        fr.z[l - 1] = ring.add(v, ring.zero());
        Ok(fr)
    }

    pub fn n_sites(&self) -> usize {
        self.x.len()
    }

    pub fn is_identity(&self) -> bool {
        let r = &self.ring;
        self.x.iter().chain(&self.z).all(|&e| r.is_zero(e)) && r.is_zero(self.f)
    }

    /// Same operator content, phase ignored.
    pub fn same_word(&self, other: &Self) -> bool {
        let r = &self.ring;
        self.x.len() == other.x.len()
            && self.x.iter().zip(&other.x).all(|(&a, &b)| r.equal(a, b))
            && self.z.iter().zip(&other.z).all(|(&a, &b)| r.equal(a, b))
    }

    /// `CZ A CZ^{-1}`: `z += Gamma x`, `f += x . L(x)`.
    pub fn conjugate_by_cz(&self) -> Self {
        let r = self.ring;
        let g = gamma(&r, &self.x);
        let z = self.z.iter().zip(&g).map(|(&a, &b)| r.add(a, b)).collect();
        let f = r.add(self.f, r.dot(&self.x, &shift_left(&r, &self.x)));
        Frame { ring: r, x: self.x.clone(), z, f }
    }

    /// `CZ^{-1} A CZ`.
    pub fn conjugate_by_cz_inv(&self) -> Self {
        let r = self.ring;
        let g = gamma(&r, &self.x);
        let z = self.z.iter().zip(&g).map(|(&a, &b)| r.sub(a, b)).collect();
        let f = r.sub(self.f, r.dot(&self.x, &shift_left(&r, &self.x)));
        Frame { ring: r, x: self.x.clone(), z, f }
    }

    /// Conjugation by the step's Fourier layer `prod_j F_j^{-1}`:
    /// `(x, z, f) -> (z, -x, f - x . z)`.
    pub fn conjugate_by_f(&self) -> Self {
        let r = self.ring;
        let f = r.sub(self.f, r.dot(&self.x, &self.z));
        Frame {
            ring: r,
            x: self.z.clone(),
            z: self.x.iter().map(|&a| r.neg(a)).collect(),
            f,
        }
    }

    /// Conjugation by `prod_j F_j`: `(x, z, f) -> (-z, x, f - x . z)`.
    pub fn conjugate_by_f_inv(&self) -> Self {
        let r = self.ring;
        let f = r.sub(self.f, r.dot(&self.x, &self.z));
        Frame {
            ring: r,
            x: self.z.iter().map(|&a| r.neg(a)).collect(),
            z: self.x.clone(),
            f,
        }
    }

    /// Conjugation by `F^2` (either Fourier layer squared): `(x, z) -> (-x, -z)`.
    pub fn conjugate_by_f_squared(&self) -> Self {
        let r = self.ring;
        Frame {
            ring: r,
            x: self.x.iter().map(|&a| r.neg(a)).collect(),
            z: self.z.iter().map(|&a| r.neg(a)).collect(),
            f: self.f,
        }
    }

    /// `T A T^{-1}`: `a' = C a`, `f' = f - (z . x + x . L(x))`.
    pub fn step(&self) -> Self {
        let r = self.ring;
        let g = gamma(&r, &self.x);
        let x = g.iter().zip(&self.z).map(|(&a, &b)| r.add(a, b)).collect();
        let z = self.x.iter().map(|&a| r.neg(a)).collect();
        let quad = r.add(
            r.dot(&self.z, &self.x),
            r.dot(&self.x, &shift_left(&r, &self.x)),
        );
        Frame { ring: r, x, z, f: r.sub(self.f, quad) }
    }

    /// `T^{-1} A T`.
    pub fn step_inv(&self) -> Self {
        let r = self.ring;
        let x: Vec<_> = self.z.iter().map(|&a| r.neg(a)).collect();
        let g = gamma(&r, &self.z);
        let z: Vec<_> = self.x.iter().zip(&g).map(|(&a, &b)| r.add(a, b)).collect();
        let quad = r.add(r.dot(&z, &x), r.dot(&x, &shift_left(&r, &x)));
        Frame { ring: r, x, z, f: r.add(self.f, quad) }
    }

    pub fn steps(&self, t: usize) -> Self {
        (0..t).fold(self.clone(), |fr, _| fr.step())
    }

    /// Conjugation by `P(eps) = (x) X(-eps) Z(eps)`: `f += eps * sum(x + z)`.
    pub fn conjugate_by_pulse(&self, eps: R::Elem) -> Self {
        let r = self.ring;
        let weight = r.add(r.sum(&self.x), r.sum(&self.z));
        Frame {
            f: r.add(self.f, r.mul(eps, weight)),
            ..self.clone()
        }
    }

    /// Site reversal `l <-> N+1-l`, phase unchanged.
    pub fn mirror(&self) -> Self {
        Frame {
            ring: self.ring,
            x: self.x.iter().rev().copied().collect(),
            z: self.z.iter().rev().copied().collect(),
            f: self.f,
        }
    }

    /// `W^{-1} A W` for the pulsed reflection
    /// `W = F^2 P(eps_{N+1}) T ... T P(eps_1) T P(eps_0)`, with
    /// `slot_eps[k]` the strength applied after `k` steps.
    pub fn pull_back_through_reflection(&self, slot_eps: &[R::Elem]) -> Result<Self> {
        let n = self.n_sites();
        if slot_eps.len() != n + 2 {
            return Err(Error::DimensionMismatch(format!(
                "expected {} pulse slots, got {}",
                n + 2,
                slot_eps.len()
            )));
        }
        let r = self.ring;
        let mut fr = self.conjugate_by_f_squared();
        for k in (0..=n + 1).rev() {
            fr = fr.conjugate_by_pulse(r.neg(slot_eps[k]));
            if k > 0 {
                fr = fr.step_inv();
            }
        }
        Ok(fr)
    }
}

impl PauliFrame {
    pub fn qudit(d: u32, x: &[i64], z: &[i64], f: i64) -> Result<Self> {
        let r = Zmod::new(d)?;
        Frame::new(
            r,
            x.iter().map(|&v| r.reduce(v)).collect(),
            z.iter().map(|&v| r.reduce(v)).collect(),
            r.reduce(f),
        )
    }

    pub fn d(&self) -> u32 {
        self.ring.modulus()
    }
}

/// The step operator's symplectic data `C = [[Gamma, I], [-I, 0]]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepMatrix {
    pub n: usize,
    /// Row-major `2N x 2N` integer entries.
    pub c: Vec<Vec<i64>>,
}

impl StepMatrix {
    pub fn new(n: usize) -> Self {
        let mut c = vec![vec![0i64; 2 * n]; 2 * n];
        for i in 0..n {
            if i > 0 {
                c[i][i - 1] = 1;
            }
            if i + 1 < n {
                c[i][i + 1] = 1;
            }
            c[i][n + i] = 1;
            c[n + i][i] = -1;
        }
        StepMatrix { n, c }
    }

    pub fn gamma(&self, i: usize, j: usize) -> i64 {
        self.c[i][j]
    }

    /// `C (x, z)^T mod d`, exponents only.
    pub fn apply(&self, frame: &PauliFrame) -> (Vec<u32>, Vec<u32>) {
        let r = frame.ring;
        let a: Vec<i64> = frame.x.iter().chain(&frame.z).map(|&v| v as i64).collect();
        let out: Vec<u32> = self
            .c
            .iter()
            .map(|row| r.reduce(row.iter().zip(&a).map(|(c, v)| c * v).sum()))
            .collect();
        (out[..self.n].to_vec(), out[self.n..].to_vec())
    }
}

fn theta(n: i64) -> i64 {
    (n >= 0) as i64
}

/// `[x(t)]_l = theta(l+t-N-1) - theta(l-t-1)` with `theta(0) = 1`.
pub fn x_profile(n: usize, t: usize, l: usize) -> Result<i64> {
    if t > n + 1 {
        return Err(Error::Domain(format!("t = {t} outside 0..={}", n + 1)));
    }
    if l == 0 || l > n {
        return Err(Error::Domain(format!("site {l} outside 1..={n}")));
    }
    let (n, t, l) = (n as i64, t as i64, l as i64);
    Ok(theta(l + t - n - 1) - theta(l - t - 1))
}

/// `[z(t)]_l`, which is `-[x(t-1)]_l` for `t >= 1` and `1` at `t = 0`.
pub fn z_profile(n: usize, t: usize, l: usize) -> Result<i64> {
    if t == 0 {
        x_profile(n, 0, l).map(|_| 1)
    } else {
        x_profile(n, t - 1, l).map(|v| -v)
    }
}

/// Iterates `(x, z) -> (Gamma x + z, -x)` over the integers from `(-1, 1)`.
pub fn iterate_profile(n: usize, t: usize) -> (Vec<i64>, Vec<i64>) {
    let mut x = vec![-1i64; n];
    let mut z = vec![1i64; n];
    for _ in 0..t {
        let nx: Vec<i64> = (0..n)
            .map(|i| {
                let left = if i > 0 { x[i - 1] } else { 0 };
                let right = if i + 1 < n { x[i + 1] } else { 0 };
                left + right + z[i]
            })
            .collect();
        z = x.iter().map(|v| -v).collect();
        x = nx;
    }
    (x, z)
}

/// Phase multiplier `-v x_l(m) + u z_l(m)` that a unit pulse in slot
/// `N+1-m` leaves on `X(u)Z(v)` at site `l`.
pub fn profile_value<R: Ring>(
    ring: &R,
    n: usize,
    m: usize,
    u: R::Elem,
    v: R::Elem,
    l: usize,
) -> Result<R::Elem> {
    let x = x_profile(n, m, l)?;
    let z = z_profile(n, m, l)?;
    Ok(ring.add(
        ring.mul(ring.neg(v), ring.from_i64(x)),
        ring.mul(u, ring.from_i64(z)),
    ))
}

/// Qudit version of [`profile_value`] restricted to the documented range
/// `1 <= m <= ceil((N+1)/2)`.
pub fn pulse_phase(n: usize, d: u32, u: i64, v: i64, m: usize, l: usize) -> Result<u32> {
    let top = (n + 2) / 2;
    if m == 0 || m > top {
        return Err(Error::Domain(format!("time index {m} outside 1..={top}")));
    }
    let r = Zmod::new(d)?;
    profile_value(&r, n, m, r.reduce(u), r.reduce(v), l)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_even_table_entries() {
        // N = 8 pulse frame after t steps, columns S_3 and S_4.
        let r = Zmod::new(7).unwrap();
        let eps = 2u32;
        let p = Frame::new(r, vec![r.neg(eps); 8], vec![eps; 8], 0).unwrap();
        let s3 = p.steps(3);
        let s4 = p.steps(4);
        assert_eq!(s3.x[3], r.neg(eps));
        assert_eq!(s4.x[3], 0);
        assert_eq!(s4.z[3], eps);
    }

    #[test]
    fn identity_is_fixed() {
        let r = Zmod::new(5).unwrap();
        let id = Frame::identity(r, 6);
        assert_eq!(id.step(), id);
        assert_eq!(id.conjugate_by_f(), id);
        assert_eq!(id.conjugate_by_cz(), id);
        assert_eq!(id.conjugate_by_pulse(3), id);
    }

    #[test]
    fn f_maps_z_word_to_x_word() {
        let fr = PauliFrame::qudit(5, &[0, 0, 0], &[1, 2, 3], 0).unwrap();
        let out = fr.conjugate_by_f();
        assert_eq!(out.x, vec![1, 2, 3]);
        assert!(out.z.iter().all(|&v| v == 0));
        let back = out.conjugate_by_f_inv();
        assert_eq!(back, fr);
    }

    #[test]
    fn inverses_undo() {
        let fr = PauliFrame::qudit(5, &[1, 4, 0, 2], &[3, 0, 2, 1], 2).unwrap();
        assert_eq!(fr.step().step_inv(), fr);
        assert_eq!(fr.step_inv().step(), fr);
        assert_eq!(fr.conjugate_by_cz().conjugate_by_cz_inv(), fr);
        assert_eq!(fr.conjugate_by_f().conjugate_by_f_inv(), fr);
        assert_eq!(fr.conjugate_by_pulse(3).conjugate_by_pulse(2), fr);
    }

    #[test]
    fn x_profile_examples() {
        assert_eq!(x_profile(8, 0, 1).unwrap(), -1);
        assert_eq!(x_profile(8, 4, 4).unwrap(), 0);
        assert_eq!(x_profile(8, 3, 5).unwrap(), -1);
        assert!(x_profile(8, 10, 1).is_err());
        assert!(x_profile(8, 1, 0).is_err());
        assert!(x_profile(8, 1, 9).is_err());
    }

    #[test]
    fn mirror_examples() {
        let fr = PauliFrame::qudit(3, &[1, 0, 0, 0], &[0, 2, 0, 0], 1).unwrap();
        let m = fr.mirror();
        assert_eq!(m.x, vec![0, 0, 0, 1]);
        assert_eq!(m.z, vec![0, 0, 2, 0]);
        assert_eq!(m.f, 1);
        assert_eq!(m.mirror(), fr);
        let sym = PauliFrame::qudit(3, &[1, 2, 2, 1], &[0, 1, 1, 0], 0).unwrap();
        assert_eq!(sym.mirror(), sym);
    }

    #[test]
    fn pulse_phase_examples() {
        let (u, v, d) = (2i64, 3i64, 11u32);
        assert_eq!(pulse_phase(8, d, u, v, 4, 4).unwrap(), u as u32);
        assert_eq!(pulse_phase(8, d, u, v, 2, 5).unwrap(), (u + v) as u32);
        assert_eq!(pulse_phase(8, d, u, v, 3, 1).unwrap(), 0);
        assert!(pulse_phase(8, d, u, v, 0, 1).is_err());
        assert!(pulse_phase(8, d, u, v, 6, 1).is_err());
    }

    #[test]
    fn step_matrix_shape() {
        let s = StepMatrix::new(4);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(s.gamma(i, j), ((i as i64 - j as i64).abs() == 1) as i64);
                assert_eq!(s.c[i][4 + j], (i == j) as i64);
                assert_eq!(s.c[4 + i][j], -((i == j) as i64));
                assert_eq!(s.c[4 + i][4 + j], 0);
            }
        }
    }

    #[test]
    fn cv_frames_use_real_arithmetic() {
        let fr = Frame::new(Reals, vec![0.5, -1.25], vec![2.0, 0.0], 0.0).unwrap();
        let back = fr.step().step_inv();
        for (a, b) in back.x.iter().zip(&fr.x) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((back.f - fr.f).abs() < 1e-12);
    }
}
