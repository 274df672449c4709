//! Generalized Pauli (Weyl–Heisenberg) operators on one d-level site.
//!
//! `X|s> = |s+1>`, `Z|s> = zeta^s |s>` with `zeta = e^{2 pi i / d}`. Labels
//! `(a, b)` name `X^a Z^b`. The Hermitian basis pairs each label with its
//! adjoint, `X(a)Z(b) + Z(-b)X(-a)` and `i (X(a)Z(b) - Z(-b)X(-a))`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::linalg::{self, CMatrix};
use crate::{Error, Result, C64};

/// Hermiticity tolerance accepted by [`decompose_hamiltonian`].
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Frobenius residual allowed when reconstructing a decomposed Hamiltonian.
pub const ROUNDTRIP_TOL: f64 = 1e-9;

#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Dimension {
    Finite(u32),
    /// Continuous-variable site, `zeta = e^i`. No matrices exist for it.
    Continuous,
}

impl Dimension {
    pub fn finite(d: u32) -> Result<Self> {
        if d < 2 {
            return Err(Error::UnsupportedDimension(format!("d = {d}, need d >= 2")));
        }
        Ok(Dimension::Finite(d))
    }

    pub fn as_finite(&self) -> Result<u32> {
        match *self {
            Dimension::Finite(d) => Ok(d),
            Dimension::Continuous => Err(Error::UnsupportedDimension(
                "continuous-variable sites have no finite matrix representation".into(),
            )),
        }
    }
}

/// `X(a) Z(b)` with exponents reduced into `0..d`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WeylLabel {
    pub a: u32,
    pub b: u32,
}

impl WeylLabel {
    pub fn new(d: u32, a: i64, b: i64) -> Self {
        let d = d as i64;
        WeylLabel {
            a: a.rem_euclid(d) as u32,
            b: b.rem_euclid(d) as u32,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.a == 0 && self.b == 0
    }

    /// Label of the adjoint up to phase, `(-a, -b)`.
    pub fn negated(&self, d: u32) -> Self {
        WeylLabel::new(d, -(self.a as i64), -(self.b as i64))
    }
}

impl fmt::Display for WeylLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Part {
    Symmetric,
    Antisymmetric,
}

impl Part {
    pub fn letter(&self) -> char {
        match self {
            Part::Symmetric => 'S',
            Part::Antisymmetric => 'A',
        }
    }

    pub fn from_letter(s: &str) -> Option<Part> {
        match s {
            "S" | "s" => Some(Part::Symmetric),
            "A" | "a" => Some(Part::Antisymmetric),
            _ => None,
        }
    }
}

/// `zeta^k`. For finite `d` and integral `k` use [`zeta_int`] to avoid
/// rounding in the exponent.
pub fn zeta_power(d: Dimension, k: f64) -> C64 {
    match d {
        Dimension::Finite(d) => C64::from_polar(1.0, 2.0 * PI * k / d as f64),
        Dimension::Continuous => C64::from_polar(1.0, k),
    }
}

/// `zeta^k` for integer `k`, reduced mod `d` first so periodicity is exact.
pub fn zeta_int(d: u32, k: i64) -> C64 {
    let r = k.rem_euclid(d as i64);
    match (4 * r).checked_rem(d as i64) {
        // Quarter-period multiples are returned exactly.
        Some(0) => match (4 * r) / d as i64 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        },
        _ => C64::from_polar(1.0, 2.0 * PI * r as f64 / d as f64),
    }
}

/// `phi_{a,b} = pi/4 + pi a b / d`.
pub fn phase_angle(d: u32, label: WeylLabel) -> f64 {
    PI / 4.0 + PI * (label.a as f64) * (label.b as f64) / d as f64
}

/// `X^a Z^b` in the computational basis.
pub fn weyl_matrix(d: Dimension, label: WeylLabel) -> Result<CMatrix> {
    let d = d.as_finite()?;
    let n = d as usize;
    let mut m = CMatrix::zeros(n, n);
    for s in 0..n {
        let row = (s + label.a as usize) % n;
        m[(row, s)] = zeta_int(d, label.b as i64 * s as i64);
    }
    Ok(m)
}

/// `k` with `(X^a Z^b)(X^a' Z^b') = zeta^k X^{a+a'} Z^{b+b'}`.
pub fn commute_phase(d: u32, left: WeylLabel, right: WeylLabel) -> u32 {
    ((right.a as u64 * left.b as u64) % d as u64) as u32
}

#[derive(Clone, Debug)]
pub struct HermitianBasisElement {
    pub label: WeylLabel,
    pub part: Part,
    pub matrix: CMatrix,
}

pub fn hermitian_basis_matrix(
    d: Dimension,
    label: WeylLabel,
    part: Part,
) -> Result<HermitianBasisElement> {
    if part == Part::Antisymmetric && label.is_identity() {
        return Err(Error::DegenerateElement(
            "antisymmetric part of the (0,0) label vanishes".into(),
        ));
    }
    let w = weyl_matrix(d, label)?;
    let w_adj = w.adjoint();
    let matrix = match part {
        Part::Symmetric => &w + &w_adj,
        Part::Antisymmetric => (&w - &w_adj) * C64::i(),
    };
    Ok(HermitianBasisElement { label, part, matrix })
}

/// Real expansion of a Hermitian matrix in the basis `B_{a,b,part}`.
///
/// The full family of `2 d^2 - 1` elements is linearly dependent, so a
/// spanning subset of `d^2` elements is chosen greedily in label order
/// (`(a, b)` lexicographic, symmetric before antisymmetric) and the
/// coefficients solve the Gram system of that subset.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub d: u32,
    pub coeffs: BTreeMap<(WeylLabel, Part), f64>,
}

impl Decomposition {
    /// Coefficient of `B_{(0,0),S} = 2 I`, a global phase for unitaries.
    pub fn identity_component(&self) -> f64 {
        self.coeffs
            .get(&(WeylLabel { a: 0, b: 0 }, Part::Symmetric))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn get(&self, label: WeylLabel, part: Part) -> f64 {
        self.coeffs.get(&(label, part)).copied().unwrap_or(0.0)
    }

    /// Terms with `|c| > tol`, excluding the identity.
    pub fn nontrivial_terms(&self, tol: f64) -> Vec<(WeylLabel, Part, f64)> {
        self.coeffs
            .iter()
            .filter(|((l, _), c)| !l.is_identity() && c.abs() > tol)
            .map(|(&(l, p), &c)| (l, p, c))
            .collect()
    }

    pub fn reconstruct(&self) -> Result<CMatrix> {
        let n = self.d as usize;
        let mut h = CMatrix::zeros(n, n);
        for (&(label, part), &c) in &self.coeffs {
            let b = hermitian_basis_matrix(Dimension::Finite(self.d), label, part)?;
            h += b.matrix.scale(c);
        }
        Ok(h)
    }
}

fn real_inner(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Spanning subset of the Hermitian basis, in canonical label order.
pub fn spanning_basis(d: u32) -> Result<Vec<HermitianBasisElement>> {
    let dim = Dimension::finite(d)?;
    let target = (d * d) as usize;
    let mut chosen: Vec<HermitianBasisElement> = Vec::with_capacity(target);
    // Orthonormalized copies for the independence test.
    let mut ortho: Vec<CMatrix> = Vec::with_capacity(target);
    'outer: for a in 0..d {
        for b in 0..d {
            for part in [Part::Symmetric, Part::Antisymmetric] {
                let label = WeylLabel { a, b };
                if part == Part::Antisymmetric && label.is_identity() {
                    continue;
                }
                let el = hermitian_basis_matrix(dim, label, part)?;
                let mut r = el.matrix.clone();
                for q in &ortho {
                    let c = real_inner(q, &r);
                    r -= q.scale(c);
                }
                let norm = real_inner(&r, &r).sqrt();
                if norm > 1e-8 {
                    ortho.push(r.scale(1.0 / norm));
                    chosen.push(el);
                    if chosen.len() == target {
                        break 'outer;
                    }
                }
            }
        }
    }
    if chosen.len() != target {
        return Err(Error::Internal(format!(
            "Hermitian basis for d = {d} spans {} of {target} dimensions",
            chosen.len()
        )));
    }
    Ok(chosen)
}

pub fn decompose_hamiltonian(d: u32, h: &CMatrix) -> Result<Decomposition> {
    let n = d as usize;
    if h.nrows() != n || h.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "expected {n}x{n} matrix, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    if !linalg::is_hermitian(h, HERMITIAN_TOL) {
        return Err(Error::Validation(format!(
            "matrix is not Hermitian (defect {:e})",
            linalg::hermitian_defect(h)
        )));
    }
    let basis = spanning_basis(d)?;
    let k = basis.len();
    let gram = DMatrix::from_fn(k, k, |i, j| real_inner(&basis[i].matrix, &basis[j].matrix));
    let rhs = DVector::from_fn(k, |i, _| real_inner(&basis[i].matrix, h));
    let sol = gram
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Internal("singular Gram matrix".into()))?;
    let coeffs = basis
        .iter()
        .zip(sol.iter())
        .map(|(el, &c)| ((el.label, el.part), c))
        .collect();
    let dec = Decomposition { d, coeffs };
    let residual = linalg::frobenius(&(dec.reconstruct()? - h));
    if residual > ROUNDTRIP_TOL {
        return Err(Error::Internal(format!(
            "decomposition residual {residual:e} exceeds {ROUNDTRIP_TOL:e}"
        )));
    }
    Ok(dec)
}

/// One factor `exp(i angle B_{label,part})` of a product formula.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct TrotterGate {
    pub label: WeylLabel,
    pub part: Part,
    pub angle: f64,
}

/// First-order product formula for `exp(i H t)`, gates listed in time order.
///
/// Terms are taken in the decomposition's label order. A single generator
/// commutes with itself, so it is emitted as one gate regardless of
/// `n_slices`.
pub fn trotterize(coeffs: &Decomposition, t: f64, n_slices: usize) -> Result<Vec<TrotterGate>> {
    if n_slices == 0 {
        return Err(Error::Domain("n_slices must be at least 1".into()));
    }
    let terms: Vec<_> = coeffs
        .coeffs
        .iter()
        .filter(|(_, c)| **c != 0.0)
        .map(|(&(label, part), &c)| (label, part, c))
        .collect();
    let non_identity = terms.iter().filter(|(l, _, _)| !l.is_identity()).count();
    if non_identity <= 1 {
        return Ok(terms
            .into_iter()
            .map(|(label, part, c)| TrotterGate { label, part, angle: c * t })
            .collect());
    }
    let dt = t / n_slices as f64;
    let mut out = Vec::with_capacity(terms.len() * n_slices);
    for _ in 0..n_slices {
        out.extend(terms.iter().map(|&(label, part, c)| TrotterGate {
            label,
            part,
            angle: c * dt,
        }));
    }
    Ok(out)
}

/// Dense product of a gate list, first gate acting first.
pub fn gate_product(d: u32, gates: &[TrotterGate]) -> Result<CMatrix> {
    let dim = Dimension::finite(d)?;
    let mut u = linalg::identity(d as usize);
    for g in gates {
        let b = hermitian_basis_matrix(dim, g.label, g.part)?;
        u = linalg::expm_i_hermitian(&b.matrix, g.angle) * u;
    }
    Ok(u)
}

/// Slice count for which the first-order commutator bound
/// `t^2 / (2n) * sum_{j<k} ||[H_j, H_k]||` stays below `tol`.
pub fn trotter_slices(coeffs: &Decomposition, t: f64, tol: f64) -> Result<usize> {
    if tol <= 0.0 {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let dim = Dimension::finite(coeffs.d)?;
    let mut terms = Vec::new();
    for (label, part, c) in coeffs.nontrivial_terms(0.0) {
        terms.push(hermitian_basis_matrix(dim, label, part)?.matrix.scale(c));
    }
    let mut bound = 0.0;
    for j in 0..terms.len() {
        for k in j + 1..terms.len() {
            let comm = &terms[j] * &terms[k] - &terms[k] * &terms[j];
            bound += linalg::operator_norm(&comm);
        }
    }
    let n = (t * t * bound / (2.0 * tol)).ceil();
    Ok((n as usize).max(1))
}
