//! Global-pulse protocols: reflection, localized gates, the time-shift
//! entangler and the two-chain readout swap.
//!
//! Builders return primitive sequences in time order; the state-level
//! wrappers run them on a [`DenseState`].

use std::f64::consts::PI;

use super::{marginal, DenseState, GlobalPrimitive, Layout};
use crate::pulses::{self, PeakSolution, QuditSchedule};
use crate::ring::{Ring, Zmod};
use crate::linalg;
use crate::weyl::{self, Dimension, Part, WeylLabel};
use crate::{Error, Result};

use GlobalPrimitive::{FourierAll, HamPulse, Pulse, TInv, TStep};

const F_ALL: GlobalPrimitive = FourierAll { dagger: false };
const F_ALL_DAG: GlobalPrimitive = FourierAll { dagger: true };

/// Coefficient below which a real or imaginary part counts as zero.
const COEFF_TOL: f64 = 1e-12;

/// `T^{N+1}` followed by `F^2`.
pub fn reflection_program(n: usize) -> Vec<GlobalPrimitive> {
    let mut out = vec![TStep; n + 1];
    out.extend([F_ALL, F_ALL]);
    out
}

pub fn reflection(state: &DenseState) -> Result<DenseState> {
    if state.layout() != Layout::Single {
        return Err(Error::Validation("reflection acts on a single chain".into()));
    }
    let mut out = state.clone();
    out.apply_all(&reflection_program(state.n()))?;
    Ok(out)
}

/// The pulsed reflection `W`: `P(slot 0), T, P(slot 1), ..., T, P(slot N+1), F, F`.
pub fn pulsed_reflection(schedule: &QuditSchedule) -> Vec<GlobalPrimitive> {
    let slots = schedule.slot_strengths();
    let mut out = Vec::new();
    for (k, &eps) in slots.iter().enumerate() {
        if k > 0 {
            out.push(TStep);
        }
        if eps != 0 {
            out.push(Pulse { strength: eps });
        }
    }
    out.extend([F_ALL, F_ALL]);
    out
}

/// `W^{-1}` in time order.
pub fn pulsed_reflection_inverse(schedule: &QuditSchedule) -> Vec<GlobalPrimitive> {
    let r = schedule.ring;
    let slots = schedule.slot_strengths();
    let mut out = vec![F_ALL_DAG, F_ALL_DAG];
    for (k, &eps) in slots.iter().enumerate().rev() {
        if eps != 0 {
            out.push(Pulse { strength: r.neg(eps) });
        }
        if k > 0 {
            out.push(TInv);
        }
    }
    out
}

/// Single-run core `HAM(-beta), W, HAM(beta), W^{-1}`. On the peak sites it
/// equals `exp(i beta/2 ((1 - zeta^kappa) A + h.c.))` with `A = X(u)Z(v)`
/// and is the identity elsewhere.
pub fn localized_core(schedule: &QuditSchedule, beta: f64, u: u32, v: u32) -> Vec<GlobalPrimitive> {
    if beta == 0.0 {
        return Vec::new();
    }
    let mut out = vec![HamPulse { beta: -beta, u, v }];
    out.extend(pulsed_reflection(schedule));
    out.push(HamPulse { beta, u, v });
    out.extend(pulsed_reflection_inverse(schedule));
    out
}

/// Peak strength of `schedule` on `(u, v)` at site `l`, or a mismatch error.
pub fn schedule_peak(schedule: &QuditSchedule, u: u32, v: u32, l: usize) -> Result<u32> {
    if l == 0 || l > schedule.n {
        return Err(Error::Domain(format!("site {l} outside 1..={}", schedule.n)));
    }
    schedule.profile(u, v)?.peak_at(l).ok_or_else(|| {
        Error::ScheduleMismatch(format!(
            "schedule [{schedule}] is not a site-{l} peak for (u,v)=({u},{v})"
        ))
    })
}

/// `1 - zeta^kappa` as `(re, im)`.
pub fn peak_coefficient(d: u32, kappa: u32) -> (f64, f64) {
    let phi = 2.0 * PI * kappa as f64 / d as f64;
    (1.0 - phi.cos(), -phi.sin())
}

/// Runs one localized core on `state`.
pub fn localized_gate(
    state: &DenseState,
    schedule: &QuditSchedule,
    alpha: f64,
    u: u32,
    v: u32,
    l: usize,
) -> Result<DenseState> {
    check_chain(state, schedule)?;
    schedule_peak(schedule, u, v, l)?;
    let mut out = state.clone();
    out.apply_all(&localized_core(schedule, alpha, u, v))?;
    Ok(out)
}

fn check_chain(state: &DenseState, schedule: &QuditSchedule) -> Result<()> {
    if state.d() != schedule.d() || state.n() != schedule.n {
        return Err(Error::DimensionMismatch(format!(
            "schedule for (d={}, N={}) on a (d={}, N={}) state",
            schedule.d(),
            schedule.n,
            state.d(),
            state.n()
        )));
    }
    Ok(())
}

/// One localized core with its schedule, angle and peak strength.
#[derive(Clone, Debug, PartialEq)]
pub struct Run {
    pub schedule: QuditSchedule,
    pub beta: f64,
    pub kappa: u32,
}

/// Runs whose combined generator is `theta * B_{label, part}` at the peak
/// sites `l, N+1-l`.
///
/// A single run produces `(beta/2)(c_r SYM + c_i ANTI)` with
/// `c = 1 - zeta^kappa`. Pairing it with the sign-flipped schedule
/// (`kappa -> -kappa`) at `+beta` keeps only the SYM part, at `-beta` only
/// the ANTI part.
pub fn rotation_runs(
    n: usize,
    d: u32,
    l: usize,
    label: WeylLabel,
    part: Part,
    theta: f64,
) -> Result<Vec<Run>> {
    if label.is_identity() {
        return match part {
            Part::Symmetric => Ok(Vec::new()),
            Part::Antisymmetric => Err(Error::DegenerateElement(
                "antisymmetric part of the (0,0) label vanishes".into(),
            )),
        };
    }
    if theta == 0.0 || vanishes(d, label, part)? {
        return Ok(Vec::new());
    }
    let (u, v) = (label.a as i64, label.b as i64);
    let pair = |sol: PeakSolution<Zmod>, beta_first: f64, beta_second: f64| -> Vec<Run> {
        let r = sol.schedule.ring;
        vec![
            Run { schedule: sol.schedule.clone(), beta: beta_first, kappa: sol.kappa },
            Run { schedule: sol.schedule.negated(), beta: beta_second, kappa: r.neg(sol.kappa) },
        ]
    };
    match part {
        Part::Symmetric => {
            let sol = pulses::solve_peak(n, d, u, v, l)?;
            pulses::schedule_kappa(&sol)?;
            let (cr, ci) = peak_coefficient(d, sol.kappa);
            if ci.abs() < COEFF_TOL {
                Ok(vec![Run { beta: 2.0 * theta / cr, kappa: sol.kappa, schedule: sol.schedule }])
            } else {
                let beta = theta / cr;
                Ok(pair(sol, beta, beta))
            }
        }
        Part::Antisymmetric => {
            let base = pulses::solve_peak(n, d, u, v, l)?;
            pulses::schedule_kappa(&base)?;
            let sol = pulses::solve_peak_where(n, d, u, v, l, |k| !(2 * k as u64).is_multiple_of(d as u64))?
                .ok_or_else(|| {
                    Error::Uncontrollable(format!(
                        "every site-{l} peak for {label} has zeta^kappa real, so the antisymmetric part cannot be reached"
                    ))
                })?;
            let (_, ci) = peak_coefficient(d, sol.kappa);
            let beta = theta / ci;
            Ok(pair(sol, beta, -beta))
        }
    }
}

/// Whether `B_{label,part}` is the zero matrix, as happens for even `d` when
/// `X^a Z^b` is Hermitian or anti-Hermitian.
fn vanishes(d: u32, label: WeylLabel, part: Part) -> Result<bool> {
    let m = weyl::hermitian_basis_matrix(Dimension::Finite(d), label, part)?.matrix;
    Ok(linalg::frobenius(&m) < COEFF_TOL)
}

pub fn runs_program(runs: &[Run], label: WeylLabel) -> Vec<GlobalPrimitive> {
    runs.iter()
        .flat_map(|r| localized_core(&r.schedule, r.beta, label.a, label.b))
        .collect()
}

/// `exp(i theta B_{label,part})` at sites `l, N+1-l`.
///
/// For `d = 2 mod 4` the label `(d/2, d/2)` only admits real peak phases,
/// so its antisymmetric part is reached by conjugation instead:
/// `exp(i theta ANTI(d/2,d/2)) = W exp(-i theta SYM(d/2,0)) W^dag` with
/// `W = exp(i pi/8 SYM(0,d/2))`.
pub fn rotation_sequence(
    n: usize,
    d: u32,
    l: usize,
    label: WeylLabel,
    part: Part,
    theta: f64,
) -> Result<Vec<GlobalPrimitive>> {
    match rotation_runs(n, d, l, label, part, theta) {
        Ok(runs) => Ok(runs_program(&runs, label)),
        Err(Error::Uncontrollable(_))
            if d % 4 == 2 && label.a == d / 2 && label.b == d / 2 && part == Part::Antisymmetric =>
        {
            let half = d / 2;
            let w_label = WeylLabel { a: 0, b: half };
            let mid_label = WeylLabel { a: half, b: 0 };
            let mut out = rotation_sequence(n, d, l, w_label, Part::Symmetric, -PI / 8.0)?;
            out.extend(rotation_sequence(n, d, l, mid_label, Part::Symmetric, -theta)?);
            out.extend(rotation_sequence(n, d, l, w_label, Part::Symmetric, PI / 8.0)?);
            Ok(out)
        }
        Err(e) => Err(e),
    }
}

/// Two localized runs whose net generator is `theta * B_{label,part}`.
pub fn double_run(
    state: &DenseState,
    l: usize,
    label: WeylLabel,
    part: Part,
    theta: f64,
) -> Result<DenseState> {
    let mut out = state.clone();
    out.apply_all(&rotation_sequence(state.n(), state.d(), l, label, part, theta)?)?;
    Ok(out)
}

/// `T^{-m}`, the site-1 rotation `exp(i alpha SYM(u,0))`, then `T^m`:
/// `exp(i alpha (Z(-u)_m X(u)_{m+1} + h.c.))` and its mirror image.
pub fn entangle_program(n: usize, d: u32, m: usize, u: u32, alpha: f64) -> Result<Vec<GlobalPrimitive>> {
    if m == 0 || m + 1 > n {
        return Err(Error::Domain(format!("m = {m} outside 1..={}", n.saturating_sub(1))));
    }
    let rot = rotation_sequence(n, d, 1, WeylLabel::new(d, u as i64, 0), Part::Symmetric, alpha)?;
    if rot.is_empty() {
        return Ok(rot);
    }
    let mut out = vec![TInv; m];
    out.extend(rot);
    out.extend(vec![TStep; m]);
    Ok(out)
}

pub fn entangle_timeshift(state: &DenseState, m: usize, u: u32, alpha: f64) -> Result<DenseState> {
    let mut out = state.clone();
    out.apply_all(&entangle_program(state.n(), state.d(), m, u, alpha)?)?;
    Ok(out)
}

/// Ancilla-interleaved variant on the `4M - 2` chain: `T^{-1}`, rotation at
/// the ancilla `2l`, `T`. With the ancilla in `|0>` this acts as
/// `exp(i alpha (X(u)_l X(u)_{l+1} + h.c.))` on logical sites `l, l+1`.
pub fn entangle_ancilla_program(
    m_logical: usize,
    d: u32,
    l: usize,
    u: u32,
    alpha: f64,
) -> Result<Vec<GlobalPrimitive>> {
    if l == 0 || l >= m_logical {
        return Err(Error::Domain(format!("l = {l} outside 1..{m_logical}")));
    }
    let n = 4 * m_logical - 2;
    let rot = rotation_sequence(n, d, 2 * l, WeylLabel::new(d, u as i64, 0), Part::Symmetric, alpha)?;
    if rot.is_empty() {
        return Ok(rot);
    }
    let mut out = vec![TInv];
    out.extend(rot);
    out.push(TStep);
    Ok(out)
}

/// Swap network between data site `l` and ancilla `l`, in time order:
/// `F^-1 (x) F^-1, CZ, F^-1 (x) F^-1, CZ, F (x) F, CZ`.
pub fn readout_swap_program(l: usize) -> Vec<GlobalPrimitive> {
    let sel = |dagger| GlobalPrimitive::FourierSelect { sites: vec![l], dagger };
    vec![
        sel(false),
        GlobalPrimitive::CzInterchain,
        sel(false),
        GlobalPrimitive::CzInterchain,
        sel(true),
        GlobalPrimitive::CzInterchain,
    ]
}

/// Swaps data site `l` into the ancilla chain and returns the state with
/// the exact distribution of ancilla `l`.
pub fn readout_swap(state: &DenseState, l: usize) -> Result<(DenseState, Vec<f64>)> {
    if state.layout() != Layout::DataPlusAncilla {
        return Err(Error::Validation("readout needs the data-plus-ancilla layout".into()));
    }
    let n = state.n();
    if l == 0 || l > n {
        return Err(Error::Domain(format!("site {l} outside 1..={n}")));
    }
    let ancillas: Vec<usize> = (n..2 * n).collect();
    let p_zero = marginal(state, &ancillas)?[0];
    if (p_zero - 1.0).abs() > 1e-10 {
        return Err(Error::Validation(format!(
            "ancilla chain is not in |0...0> (overlap probability {p_zero})"
        )));
    }
    let mut out = state.clone();
    out.apply_all(&readout_swap_program(l))?;
    let dist = marginal(&out, &[n + l - 1])?;
    Ok((out, dist))
}
