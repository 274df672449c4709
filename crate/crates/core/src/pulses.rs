//! Pulse schedules that turn plateau phase profiles into single-site peaks.
//!
//! A unit pulse applied `N+1-m` steps into the reflection sequence leaves the
//! mirror-symmetric profile `S_m` on `X(u)Z(v)`: `u` on sites `{m, N+1-m}`,
//! `u+v` strictly between them, zero outside (with the centre of odd chains
//! and the `m = N/2 + 1` slot of even chains as special cases, all read off
//! the tableau). A schedule is a list of `(m, eps_m)`; its profile is
//! `sum eps_m S_m`. Solving for a peak is a linear system over the site
//! classes `{l, N+1-l}`.

use std::fmt;
use std::f64::consts::PI;

use crate::modlin;
use crate::ring::{Reals, Ring, Zmod};
use crate::tableau::{profile_value, Frame};
use crate::{Error, Result};

/// Kernel enumeration size above which the prime solver falls back to search.
const KERNEL_ENUMERATION_CAP: u64 = 5_000_000;

/// Largest profile index, `ceil((N+1)/2)`.
pub fn max_index(n: usize) -> usize {
    (n + 2) / 2
}

/// Number of site classes, `ceil(N/2)`.
pub fn n_classes(n: usize) -> usize {
    n.div_ceil(2)
}

/// Per-site phase multipliers, mirror symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseProfile<R: Ring> {
    pub ring: R,
    pub values: Vec<R::Elem>,
}

impl<R: Ring> PhaseProfile<R> {
    pub fn n_sites(&self) -> usize {
        self.values.len()
    }

    /// Site-class value, `l` in `1..=N`.
    pub fn at(&self, l: usize) -> R::Elem {
        self.values[l - 1]
    }

    pub fn is_mirror_symmetric(&self) -> bool {
        let n = self.values.len();
        (0..n).all(|i| self.ring.equal(self.values[i], self.values[n - 1 - i]))
    }

    /// `Some(kappa)` if the profile is supported exactly on `{l, N+1-l}`
    /// with non-zero value there.
    pub fn peak_at(&self, l: usize) -> Option<R::Elem> {
        let n = self.values.len();
        let r = &self.ring;
        let mirror = n + 1 - l;
        let kappa = self.values[l - 1];
        if r.is_zero(kappa) || !r.equal(self.values[mirror - 1], kappa) {
            return None;
        }
        let clean = (1..=n)
            .filter(|&j| j != l && j != mirror)
            .all(|j| r.is_zero(self.values[j - 1]));
        clean.then_some(kappa)
    }

    pub fn add(&self, other: &Self) -> Self {
        PhaseProfile {
            ring: self.ring,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| self.ring.add(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, k: R::Elem) -> Self {
        PhaseProfile {
            ring: self.ring,
            values: self.values.iter().map(|&a| self.ring.mul(a, k)).collect(),
        }
    }
}

/// `S_m` for `0 <= m <= ceil((N+1)/2)`.
pub fn plateau_profile<R: Ring>(
    ring: R,
    n: usize,
    m: usize,
    u: R::Elem,
    v: R::Elem,
) -> Result<PhaseProfile<R>> {
    if n == 0 {
        return Err(Error::Domain("chain must have at least one site".into()));
    }
    if m > max_index(n) {
        return Err(Error::Domain(format!(
            "profile index {m} outside 0..={}",
            max_index(n)
        )));
    }
    let values = (1..=n)
        .map(|l| profile_value(&ring, n, m, u, v, l))
        .collect::<Result<_>>()?;
    Ok(PhaseProfile { ring, values })
}

/// Ordered `(m, eps_m)` entries, `m` strictly increasing, no zero strengths.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseSchedule<R: Ring> {
    pub ring: R,
    pub n: usize,
    pub entries: Vec<(usize, R::Elem)>,
}

pub type QuditSchedule = PulseSchedule<Zmod>;
pub type CvSchedule = PulseSchedule<Reals>;

impl<R: Ring> PulseSchedule<R> {
    pub fn new(ring: R, n: usize, mut entries: Vec<(usize, R::Elem)>) -> Result<Self> {
        entries.sort_by_key(|e| e.0);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::Validation(format!("duplicate time index {}", w[0].0)));
            }
        }
        if let Some(&(m, _)) = entries.iter().find(|e| e.0 > max_index(n)) {
            return Err(Error::Validation(format!(
                "time index {m} outside 0..={}",
                max_index(n)
            )));
        }
        let zero = ring.zero();
        let entries = entries
            .into_iter()
            .map(|(m, e)| (m, ring.add(e, zero)))
            .filter(|&(_, e)| !ring.is_zero(e))
            .collect();
        Ok(PulseSchedule { ring, n, entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Combined profile `sum eps_m S_m` on `X(u)Z(v)`.
    pub fn profile(&self, u: R::Elem, v: R::Elem) -> Result<PhaseProfile<R>> {
        let mut acc = PhaseProfile {
            ring: self.ring,
            values: vec![self.ring.zero(); self.n],
        };
        for &(m, eps) in &self.entries {
            acc = acc.add(&plateau_profile(self.ring, self.n, m, u, v)?.scale(eps));
        }
        Ok(acc)
    }

    /// Pulse strength per slot `k = 0..=N+1` (slot `k` follows `k` steps).
    pub fn slot_strengths(&self) -> Vec<R::Elem> {
        let mut slots = vec![self.ring.zero(); self.n + 2];
        for &(m, eps) in &self.entries {
            slots[self.n + 1 - m] = eps;
        }
        slots
    }

    pub fn negated(&self) -> Self {
        PulseSchedule {
            ring: self.ring,
            n: self.n,
            entries: self.entries.iter().map(|&(m, e)| (m, self.ring.neg(e))).collect(),
        }
    }

    /// Profile computed the long way, by pulling `X(u)Z(v)` on each site back
    /// through the pulsed reflection. Used to cross-check [`Self::profile`].
    pub fn profile_via_tableau(&self, u: R::Elem, v: R::Elem) -> Result<PhaseProfile<R>> {
        let slots = self.slot_strengths();
        let mut values = Vec::with_capacity(self.n);
        for l in 1..=self.n {
            let fr = Frame::single_site(self.ring, self.n, l, u, v)?;
            let back = fr.pull_back_through_reflection(&slots)?;
            let target = Frame::single_site(self.ring, self.n, self.n + 1 - l, u, v)?;
            if !back.same_word(&target) {
                return Err(Error::Internal(format!(
                    "pulsed reflection did not map site {l} onto its mirror"
                )));
            }
            values.push(back.f);
        }
        Ok(PhaseProfile { ring: self.ring, values })
    }
}

impl QuditSchedule {
    pub fn d(&self) -> u32 {
        self.ring.modulus()
    }

    pub fn scaled(&self, k: u32) -> Self {
        let r = self.ring;
        PulseSchedule {
            ring: r,
            n: self.n,
            entries: self
                .entries
                .iter()
                .map(|&(m, e)| (m, r.mul(e, k)))
                .filter(|&(_, e)| e != 0)
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PeakStatus {
    Exact,
    Unreachable(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeakSolution<R: Ring> {
    pub schedule: PulseSchedule<R>,
    pub l: usize,
    pub u: R::Elem,
    pub v: R::Elem,
    pub kappa: R::Elem,
    pub status: PeakStatus,
    /// For unreachable qudit peaks: `y` with `sum_k y_k row_k = row_l`
    /// over the zero classes `k`, so every admissible schedule has `kappa = 0`.
    pub witness: Option<Vec<u32>>,
}

impl<R: Ring> PeakSolution<R> {
    pub fn is_exact(&self) -> bool {
        self.status == PeakStatus::Exact
    }
}

pub fn schedule_kappa<R: Ring>(solution: &PeakSolution<R>) -> Result<R::Elem> {
    match &solution.status {
        PeakStatus::Exact => Ok(solution.kappa),
        PeakStatus::Unreachable(why) => Err(Error::Unreachable(why.clone())),
    }
}

/// Class-by-unknown coefficient rows: `rows[j-1][m] = S_m(j)`.
fn class_rows(r: &Zmod, n: usize, u: u32, v: u32) -> Result<Vec<Vec<u64>>> {
    let k = max_index(n) + 1;
    let mut rows = vec![vec![0u64; k]; n_classes(n)];
    for m in 0..k {
        let p = plateau_profile(*r, n, m, u, v)?;
        for (j, row) in rows.iter_mut().enumerate() {
            row[m] = p.at(j + 1) as u64;
        }
    }
    Ok(rows)
}

fn check_site(n: usize, l: usize) -> Result<()> {
    if l == 0 || l > n_classes(n) {
        return Err(Error::Domain(format!(
            "target site {l} outside 1..={}",
            n_classes(n)
        )));
    }
    Ok(())
}

type Entries = Vec<(usize, u32)>;

fn entries_of(c: &[u64]) -> Entries {
    c.iter()
        .enumerate()
        .filter(|(_, &e)| e != 0)
        .map(|(m, &e)| (m, e as u32))
        .collect()
}

/// Depth-first search over `c_0, c_1, ...` with iterative deepening on the
/// number of non-zero pulses. Values are tried `1..d-1` then `0`, which makes
/// the first hit at each budget the lexicographically smallest entry list.
fn search_min(rows: &[Vec<u64>], target: usize, d: u64) -> Option<Entries> {
    let k = rows[0].len();
    // Class constraints become decidable once their last non-zero unknown is set.
    let last: Vec<Option<usize>> = rows
        .iter()
        .map(|row| row.iter().rposition(|&v| v != 0))
        .collect();
    last[target]?;
    let mut checks: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (j, lm) in last.iter().enumerate() {
        if let Some(m) = lm {
            checks[*m].push(j);
        }
    }

    struct Search<'a> {
        rows: &'a [Vec<u64>],
        checks: Vec<Vec<usize>>,
        target: usize,
        d: u64,
        c: Vec<u64>,
        partial: Vec<u64>,
    }

    impl Search<'_> {
        fn go(&mut self, m: usize, budget: usize) -> bool {
            if m == self.c.len() {
                return true;
            }
            let d = self.d;
            let order = (1..d).chain(std::iter::once(0));
            for val in order {
                if val != 0 && budget == 0 {
                    continue;
                }
                self.c[m] = val;
                for (j, row) in self.rows.iter().enumerate() {
                    self.partial[j] = (self.partial[j] + row[m] * val) % d;
                }
                let ok = self.checks[m].iter().all(|&j| {
                    if j == self.target {
                        self.partial[j] != 0
                    } else {
                        self.partial[j] == 0
                    }
                });
                let nb = if val != 0 { budget - 1 } else { budget };
                if ok && self.go(m + 1, nb) {
                    return true;
                }
                for (j, row) in self.rows.iter().enumerate() {
                    self.partial[j] = (self.partial[j] + d - row[m] * val % d) % d;
                }
                self.c[m] = 0;
            }
            false
        }
    }

    let mut s = Search {
        rows,
        checks,
        target,
        d,
        c: vec![0; k],
        partial: vec![0; rows.len()],
    };
    for budget in 1..=k {
        s.c.iter_mut().for_each(|v| *v = 0);
        s.partial.iter_mut().for_each(|v| *v = 0);
        if s.go(0, budget) {
            return Some(entries_of(&s.c));
        }
    }
    None
}

/// Prime modulus: enumerate the kernel of the zero-class equations and keep
/// the best admissible vector.
fn kernel_min(rows: &[Vec<u64>], target: usize, p: u64) -> Option<Option<Entries>> {
    let k = rows[0].len();
    let zero_rows: Vec<Vec<u64>> = rows
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != target)
        .map(|(_, r)| r.clone())
        .collect();
    let basis = if zero_rows.is_empty() {
        (0..k)
            .map(|i| (0..k).map(|j| (i == j) as u64).collect())
            .collect()
    } else {
        modlin::kernel_mod_p(&zero_rows, k, p)
    };
    let total = p.checked_pow(basis.len() as u32)?;
    if total > KERNEL_ENUMERATION_CAP {
        return None;
    }
    let mut best: Option<(usize, Entries)> = None;
    let mut coef = vec![0u64; basis.len()];
    for mut idx in 0..total {
        for c in coef.iter_mut() {
            *c = idx % p;
            idx /= p;
        }
        let mut vec = vec![0u64; k];
        for (b, &cf) in basis.iter().zip(&coef) {
            if cf != 0 {
                for (x, &bv) in vec.iter_mut().zip(b) {
                    *x = (*x + cf * bv) % p;
                }
            }
        }
        let kappa: u64 = rows[target].iter().zip(&vec).map(|(a, b)| a * b % p).sum::<u64>() % p;
        if kappa == 0 {
            continue;
        }
        let e = entries_of(&vec);
        let key = (e.len(), e);
        if best.as_ref().is_none_or(|b| key < *b) {
            best = Some(key);
        }
    }
    Some(best.map(|b| b.1))
}

/// Exact peak solver over `Z_d`.
///
/// Among all schedules whose profile is an `l`-peak, returns one with the
/// fewest pulses, ties broken by the lexicographically smallest entry list.
/// When no schedule exists the solution is `Unreachable` and carries a
/// witness combination proving it.
pub fn solve_peak(n: usize, d: u32, u: i64, v: i64, l: usize) -> Result<PeakSolution<Zmod>> {
    let r = Zmod::new(d)?;
    check_site(n, l)?;
    let (u, v) = (r.reduce(u), r.reduce(v));
    if u == 0 && v == 0 {
        return Err(Error::Domain("(u, v) = (0, 0) has no peak".into()));
    }
    let rows = class_rows(&r, n, u, v)?;
    let target = l - 1;
    let dd = d as u64;

    let unreachable = |witness: Option<Vec<u32>>| -> Result<PeakSolution<Zmod>> {
        let reason = match &witness {
            Some(y) => format!(
                "site class {l} of N={n} is a Z_{d} combination {y:?} of the other classes for (u,v)=({u},{v}); every schedule cancelling them cancels it too"
            ),
            None => format!("no pulse combination isolates site {l} of N={n} over Z_{d} for (u,v)=({u},{v})"),
        };
        Ok(PeakSolution {
            schedule: PulseSchedule { ring: r, n, entries: vec![] },
            l,
            u,
            v,
            kappa: 0,
            status: PeakStatus::Unreachable(reason),
            witness,
        })
    };

    let witness = unreachability_witness(&rows, target, dd);
    if witness.is_some() {
        return unreachable(witness);
    }

    let found = if r.is_prime() {
        match kernel_min(&rows, target, dd) {
            Some(res) => res,
            None => search_min(&rows, target, dd),
        }
    } else {
        search_min(&rows, target, dd)
    };
    let Some(entries) = found else {
        return unreachable(None);
    };
    let schedule = PulseSchedule::new(r, n, entries)?;
    let kappa = schedule
        .profile(u, v)?
        .peak_at(l)
        .ok_or_else(|| Error::Internal("solver returned a non-peak schedule".into()))?;
    Ok(PeakSolution {
        schedule,
        l,
        u,
        v,
        kappa,
        status: PeakStatus::Exact,
        witness: None,
    })
}

/// Like [`solve_peak`], but returns the canonical schedule among those whose
/// peak strength satisfies `accept`, also trying non-zero multiples of it.
pub fn solve_peak_where(
    n: usize,
    d: u32,
    u: i64,
    v: i64,
    l: usize,
    accept: impl Fn(u32) -> bool,
) -> Result<Option<PeakSolution<Zmod>>> {
    let base = solve_peak(n, d, u, v, l)?;
    if !base.is_exact() {
        return Ok(None);
    }
    if accept(base.kappa) {
        return Ok(Some(base));
    }
    for k in 2..d {
        let sched = base.schedule.scaled(k);
        if sched.is_empty() {
            continue;
        }
        if let Some(kappa) = sched.profile(base.u, base.v)?.peak_at(l) {
            if accept(kappa) {
                return Ok(Some(PeakSolution { schedule: sched, kappa, ..base.clone() }));
            }
        }
    }
    // Exhaustive fallback over every admissible schedule.
    let r = base.schedule.ring;
    let rows = class_rows(&r, n, base.u, base.v)?;
    let k = rows[0].len();
    let total = (d as u64).checked_pow(k as u32).unwrap_or(u64::MAX);
    if total > KERNEL_ENUMERATION_CAP {
        return Ok(None);
    }
    let mut best: Option<(usize, Entries, u32)> = None;
    for mut idx in 0..total {
        let c: Vec<u64> = (0..k)
            .map(|_| {
                let x = idx % d as u64;
                idx /= d as u64;
                x
            })
            .collect();
        let vals: Vec<u64> = rows
            .iter()
            .map(|row| row.iter().zip(&c).map(|(a, b)| a * b).sum::<u64>() % d as u64)
            .collect();
        let ok = vals
            .iter()
            .enumerate()
            .all(|(j, &x)| if j == l - 1 { x != 0 } else { x == 0 });
        if !ok || !accept(vals[l - 1] as u32) {
            continue;
        }
        let e = entries_of(&c);
        if best.as_ref().is_none_or(|b| (e.len(), &e) < (b.0, &b.1)) {
            best = Some((e.len(), e, vals[l - 1] as u32));
        }
    }
    Ok(match best {
        Some((_, e, kappa)) => Some(PeakSolution {
            schedule: PulseSchedule::new(r, n, e)?,
            kappa,
            ..base
        }),
        None => None,
    })
}

/// `y` over the zero classes with `sum y_k row_k = row_target (mod d)`.
fn unreachability_witness(rows: &[Vec<u64>], target: usize, d: u64) -> Option<Vec<u32>> {
    let k = rows[0].len();
    let others: Vec<&Vec<u64>> = rows
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != target)
        .map(|(_, r)| r)
        .collect();
    if others.is_empty() {
        return rows[target].iter().all(|&v| v == 0).then(Vec::new);
    }
    // Columns of A are the zero-class rows: A y = row_target.
    let a: modlin::Mat = (0..k).map(|m| others.iter().map(|r| r[m]).collect()).collect();
    modlin::solve_mod_n(&a, others.len(), &rows[target], d)
        .map(|y| y.into_iter().map(|v| v as u32).collect())
}

/// Checks that `witness` certifies unreachability of class `l`.
pub fn verify_witness(n: usize, d: u32, u: i64, v: i64, l: usize, witness: &[u32]) -> Result<bool> {
    let r = Zmod::new(d)?;
    let rows = class_rows(&r, n, r.reduce(u), r.reduce(v))?;
    let others: Vec<&Vec<u64>> = rows
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != l - 1)
        .map(|(_, r)| r)
        .collect();
    if others.len() != witness.len() {
        return Ok(false);
    }
    let k = rows[0].len();
    Ok((0..k).all(|m| {
        let s: u64 = others
            .iter()
            .zip(witness)
            .map(|(row, &y)| row[m] * y as u64)
            .sum();
        s % d as u64 == rows[l - 1][m]
    }))
}

/// Fraction-free triangular elimination, the paper-style recurrence: start at
/// `S_l` and cancel each class `l+1, ..., ceil(N/2)` with the next profile.
/// Returns `None` when a pivot vanishes or the resulting peak is zero mod `d`.
pub fn triangular_peak(n: usize, d: u32, u: i64, v: i64, l: usize) -> Result<Option<(Vec<(usize, u32)>, u32)>> {
    let r = Zmod::new(d)?;
    check_site(n, l)?;
    let top = n_classes(n);
    // Integer profiles, evaluated with the given representatives of u and v.
    let val = |m: usize, j: usize| -> Result<i128> {
        let x = crate::tableau::x_profile(n, m, j)? as i128;
        let z = crate::tableau::z_profile(n, m, j)? as i128;
        Ok(-(v as i128) * x + (u as i128) * z)
    };
    let mut c = vec![0i128; top + 1];
    c[l] = 1;
    for j in l + 1..=top {
        c[l] *= val(j, j)?;
    }
    for j in l + 1..=top {
        let pivot = val(j, j)?;
        if pivot == 0 {
            return Ok(None);
        }
        let s: i128 = (l..j).map(|m| c[m] * val(m, j).unwrap_or(0)).sum();
        if s % pivot != 0 {
            return Err(Error::Internal("triangular elimination lost exactness".into()));
        }
        c[j] = -s / pivot;
    }
    let entries: Vec<(usize, u32)> = (l..=top)
        .map(|m| (m, r.reduce_i128(c[m])))
        .filter(|&(_, e)| e != 0)
        .collect();
    let sched = PulseSchedule::new(r, n, entries.clone())?;
    Ok(sched
        .profile(r.reduce(u), r.reduce(v))?
        .peak_at(l)
        .map(|kappa| (entries, kappa)))
}

/// `R_i(u) = S_i - S_{i+1}` for `v = 0`; the centre of an odd chain is
/// `S_i` itself.
pub fn v_zero_peak(n: usize, d: u32, u: i64, l: usize) -> Result<PeakSolution<Zmod>> {
    let r = Zmod::new(d)?;
    check_site(n, l)?;
    let u = r.reduce(u);
    if u == 0 {
        return Err(Error::Domain("u must be non-zero when v = 0".into()));
    }
    let entries = if n % 2 == 1 && l == n_classes(n) {
        vec![(l, 1)]
    } else {
        vec![(l, 1), (l + 1, d - 1)]
    };
    let schedule = PulseSchedule::new(r, n, entries)?;
    let kappa = schedule.profile(u, 0)?.peak_at(l).ok_or_else(|| {
        Error::Internal(format!("S_{l} - S_{} is not a peak", l + 1))
    })?;
    Ok(PeakSolution {
        schedule,
        l,
        u,
        v: 0,
        kappa,
        status: PeakStatus::Exact,
        witness: None,
    })
}

/// Peak solver for continuous-variable chains (`zeta = e^i`).
///
/// Phases only matter mod `2 pi`, so a single pulse of strength
/// `2 pi / (u+v)` turns the plateau `S_l` into a peak of strength
/// `2 pi u / (u+v)`. The centre profiles are peaks already and take unit
/// strength. Otherwise an exact real elimination is used.
pub fn solve_peak_cv(n: usize, u: f64, v: f64, l: usize) -> Result<PeakSolution<Reals>> {
    check_site(n, l)?;
    let r = Reals;
    if r.is_zero(u) && r.is_zero(v) {
        return Err(Error::Domain("(u, v) = (0, 0) has no peak".into()));
    }
    let exact = |schedule: CvSchedule| -> Result<Option<PeakSolution<Reals>>> {
        let prof = schedule.profile(u, v)?;
        Ok(cv_peak(&prof, l).map(|kappa| PeakSolution {
            schedule,
            l,
            u,
            v,
            kappa,
            status: PeakStatus::Exact,
            witness: None,
        }))
    };
    let centre = l == n_classes(n);
    if centre {
        if let Some(sol) = exact(PulseSchedule::new(r, n, vec![(l, 1.0)])?)? {
            return Ok(sol);
        }
    }
    if !r.is_zero(u + v) {
        let eps = 2.0 * PI / (u + v);
        if let Some(sol) = exact(PulseSchedule::new(r, n, vec![(l, eps)])?)? {
            return Ok(sol);
        }
    }
    // Real triangular elimination from S_l.
    let top = n_classes(n);
    let mut c = vec![0.0f64; top + 1];
    c[l] = 1.0;
    let mut pivots_ok = true;
    for j in l + 1..=top {
        let pivot = profile_value(&r, n, j, u, v, j)?;
        if r.is_zero(pivot) {
            pivots_ok = false;
            break;
        }
        let s: f64 = (l..j)
            .map(|m| profile_value(&r, n, m, u, v, j).map(|p| c[m] * p))
            .sum::<Result<f64>>()?;
        c[j] = -s / pivot;
    }
    if pivots_ok {
        let entries = (l..=top).filter(|&m| !r.is_zero(c[m])).map(|m| (m, c[m])).collect();
        if let Some(sol) = exact(PulseSchedule::new(r, n, entries)?)? {
            return Ok(sol);
        }
    }
    // With u = 0 the plateau edges vanish and S_{l-1} - S_l isolates class l.
    if let Some(sol) = exact(PulseSchedule::new(r, n, vec![(l - 1, 1.0), (l, -1.0)])?)? {
        return Ok(sol);
    }
    Ok(PeakSolution {
        schedule: PulseSchedule { ring: r, n, entries: vec![] },
        l,
        u,
        v,
        kappa: 0.0,
        status: PeakStatus::Unreachable(format!(
            "no real pulse combination isolates site {l} of N={n} for (u,v)=({u},{v})"
        )),
        witness: None,
    })
}

/// Peak test for real profiles, where multiples of `2 pi` count as zero.
pub fn cv_peak(prof: &PhaseProfile<Reals>, l: usize) -> Option<f64> {
    let wrap = |x: f64| {
        let y = x.rem_euclid(2.0 * PI);
        y.min(2.0 * PI - y)
    };
    let n = prof.n_sites();
    let mirror = n + 1 - l;
    let kappa = prof.at(l);
    if wrap(kappa) < 1e-9 || (prof.at(mirror) - kappa).abs() > 1e-9 {
        return None;
    }
    (1..=n)
        .filter(|&j| j != l && j != mirror)
        .all(|j| wrap(prof.at(j)) < 1e-9)
        .then_some(kappa)
}

/// `4(N+2) + floor(N/2) - 2m`.
pub fn op_count(n: usize, m: usize) -> Result<usize> {
    if m == 0 || m > n_classes(n) {
        return Err(Error::Domain(format!("m = {m} outside 1..={}", n_classes(n))));
    }
    Ok(4 * (n + 2) + n / 2 - 2 * m)
}

/// A strength as `p/q*pi` when it is a small rational multiple of pi.
pub fn format_real_strength(x: f64) -> String {
    let t = x / PI;
    for q in 1..=1000i64 {
        let p = (t * q as f64).round();
        if (p / q as f64 - t).abs() < 1e-12 && p != 0.0 {
            return if q == 1 {
                format!("{}*pi", p as i64)
            } else {
                format!("{}/{}*pi", p as i64, q)
            };
        }
    }
    format!("{x}")
}

pub fn parse_real_strength(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Some(head) = s.strip_suffix("*pi") {
        let value = match head.split_once('/') {
            Some((p, q)) => p.trim().parse::<f64>().ok()? / q.trim().parse::<f64>().ok()?,
            None => head.trim().parse::<f64>().ok()?,
        };
        return Some(value * PI);
    }
    if s == "pi" {
        return Some(PI);
    }
    s.parse().ok()
}

impl fmt::Display for QuditSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ring=Zd:{}", self.d())?;
        for &(s, eps) in &self.entries {
            writeln!(f, "s={s} eps={eps}")?;
        }
        Ok(())
    }
}

impl fmt::Display for CvSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ring=R")?;
        for &(s, eps) in &self.entries {
            writeln!(f, "s={s} eps={}", format_real_strength(eps))?;
        }
        Ok(())
    }
}

/// A schedule read back from its text form.
#[derive(Clone, Debug, PartialEq)]
pub enum AnySchedule {
    Qudit(QuditSchedule),
    Cv(CvSchedule),
}

pub fn parse_schedule(text: &str, n: usize) -> Result<AnySchedule> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hl, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing ring header".into(),
    })?;
    let mut raw = Vec::new();
    for (ln, line) in lines {
        let mut s = None;
        let mut eps = None;
        for tok in line.split_whitespace() {
            match tok.split_once('=') {
                Some(("s", val)) => s = Some(val),
                Some(("eps", val)) => eps = Some(val),
                _ => {
                    return Err(Error::Parse { line: ln, message: format!("unexpected token {tok:?}") })
                }
            }
        }
        match (s, eps) {
            (Some(s), Some(e)) => raw.push((ln, s, e)),
            _ => {
                return Err(Error::Parse { line: ln, message: "expected `s=<int> eps=<value>`".into() })
            }
        }
    }
    let parse_s = |ln: usize, s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::Parse { line: ln, message: format!("bad time index {s:?}") })
    };
    if let Some(d) = header.strip_prefix("ring=Zd:") {
        let d: u32 = d
            .parse()
            .map_err(|_| Error::Parse { line: hl, message: format!("bad modulus {d:?}") })?;
        let r = Zmod::new(d)?;
        let mut entries = Vec::new();
        for (ln, s, e) in raw {
            let e: i64 = e
                .parse()
                .map_err(|_| Error::Parse { line: ln, message: format!("bad strength {e:?}") })?;
            entries.push((parse_s(ln, s)?, r.reduce(e)));
        }
        Ok(AnySchedule::Qudit(PulseSchedule::new(r, n, entries)?))
    } else if header == "ring=R" {
        let mut entries = Vec::new();
        for (ln, s, e) in raw {
            let e = parse_real_strength(e)
                .ok_or_else(|| Error::Parse { line: ln, message: format!("bad strength {e:?}") })?;
            entries.push((parse_s(ln, s)?, e));
        }
        Ok(AnySchedule::Cv(PulseSchedule::new(Reals, n, entries)?))
    } else {
        Err(Error::Parse { line: hl, message: format!("unknown ring header {header:?}") })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(d: u32) -> Zmod {
        Zmod::new(d).unwrap()
    }

    #[test]
    fn plateau_examples() {
        let r = z(101);
        let (u, v) = (2, 7);
        let p = plateau_profile(r, 8, 3, u, v).unwrap();
        assert_eq!(p.values, vec![0, 0, u, u + v, u + v, u, 0, 0]);
        let p = plateau_profile(r, 7, 4, u, v).unwrap();
        assert_eq!(p.values, vec![0, 0, 0, r.sub(u, v), 0, 0, 0]);
        let p = plateau_profile(r, 8, 0, u, v).unwrap();
        assert!(p.values.iter().all(|&x| x == u + v));
        assert!(plateau_profile(r, 8, 6, u, v).is_err());
    }

    #[test]
    fn paper_even_example() {
        let sol = solve_peak(8, 5, 1, 1, 3).unwrap();
        assert!(sol.is_exact());
        assert_eq!(sol.schedule.entries, vec![(3, 1), (4, 3)]);
        assert_eq!(sol.kappa, 1);
        assert_eq!(schedule_kappa(&sol).unwrap(), 1);
    }

    #[test]
    fn centre_of_even_chain_is_single_pulse() {
        for u in 1..7 {
            let sol = solve_peak(8, 7, u, 3, 4).unwrap();
            assert_eq!(sol.schedule.entries, vec![(4, 1)]);
            assert_eq!(sol.kappa, u as u32);
        }
    }

    #[test]
    fn odd_chain_l3_corrected_coefficients() {
        // (c3, c4) = (u - v, -(u + v)), kappa = u (u - v).
        let d = 7;
        let r = z(d);
        for (u, v) in [(1i64, 3i64), (2, 4), (3, 1)] {
            let (tri, kappa) = triangular_peak(7, d, u, v, 3).unwrap().unwrap();
            let c3 = r.reduce(u - v);
            let c4 = r.reduce(-(u + v));
            assert_eq!(tri, vec![(3, c3), (4, c4)]);
            assert_eq!(kappa, r.reduce(u * (u - v)));
        }
    }

    #[test]
    fn degenerate_u_equals_v_odd_chain_uses_global_pulse() {
        let sol = solve_peak(7, 3, 1, 1, 4).unwrap();
        assert!(sol.is_exact());
        assert_eq!(sol.schedule.entries, vec![(0, 1), (1, 1), (2, 2), (3, 1)]);
        assert_eq!(sol.kappa, 1);
    }

    #[test]
    fn unreachable_has_witness() {
        // u + v = 0 and u - v = 0 mod 2 leaves the odd centre unreachable.
        let sol = solve_peak(5, 2, 1, 1, 3).unwrap();
        assert!(!sol.is_exact());
        let w = sol.witness.clone().unwrap();
        assert!(verify_witness(5, 2, 1, 1, 3, &w).unwrap());
        assert!(schedule_kappa(&sol).is_err());
    }

    #[test]
    fn invalid_site_is_domain_error() {
        assert!(matches!(solve_peak(8, 5, 1, 1, 0), Err(Error::Domain(_))));
        assert!(matches!(solve_peak(8, 5, 1, 1, 5), Err(Error::Domain(_))));
        assert!(matches!(solve_peak(8, 5, 0, 5, 2), Err(Error::Domain(_))));
    }

    #[test]
    fn op_count_examples() {
        assert_eq!(op_count(8, 1).unwrap(), 42);
        assert_eq!(op_count(8, 4).unwrap(), 36);
        assert_eq!(op_count(7, 3).unwrap(), 33);
        assert!(op_count(8, 0).is_err());
        assert!(op_count(8, 5).is_err());
    }

    #[test]
    fn kappa_of_even_centre() {
        for u in 1..5 {
            let sol = solve_peak(8, 5, u, 2, 4).unwrap();
            assert_eq!(schedule_kappa(&sol).unwrap(), u as u32);
        }
    }

    #[test]
    fn cv_single_pulse_normalization() {
        let (u, v) = (1.0, 2.0);
        let sol = solve_peak_cv(8, u, v, 2).unwrap();
        assert!(sol.is_exact());
        assert_eq!(sol.schedule.entries.len(), 1);
        assert!((sol.schedule.entries[0].1 - 2.0 * PI / 3.0).abs() < 1e-12);
        assert!((sol.kappa - 2.0 * PI * u / (u + v)).abs() < 1e-12);
        let text = sol.schedule.to_string();
        assert!(text.contains("eps=2/3*pi"), "{text}");
    }

    #[test]
    fn cv_falls_back_to_elimination() {
        // u + v = 0 rules out the 2 pi / (u+v) normalization.
        let sol = solve_peak_cv(8, 1.0, -1.0, 2).unwrap();
        assert!(sol.is_exact());
        let prof = sol.schedule.profile(1.0, -1.0).unwrap();
        assert!(cv_peak(&prof, 2).is_some());
    }

    #[test]
    fn schedule_text_roundtrip() {
        let sol = solve_peak(8, 5, 1, 1, 3).unwrap();
        let text = sol.schedule.to_string();
        assert_eq!(text, "ring=Zd:5\ns=3 eps=1\ns=4 eps=3\n");
        assert_eq!(parse_schedule(&text, 8).unwrap(), AnySchedule::Qudit(sol.schedule));
        let cv = solve_peak_cv(6, 1.0, 1.0, 1).unwrap();
        match parse_schedule(&cv.schedule.to_string(), 6).unwrap() {
            AnySchedule::Cv(s) => {
                assert_eq!(s.entries.len(), cv.schedule.entries.len());
                for (a, b) in s.entries.iter().zip(&cv.schedule.entries) {
                    assert_eq!(a.0, b.0);
                    assert!((a.1 - b.1).abs() < 1e-12);
                }
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_schedule("ring=Q\n", 4), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(
            parse_schedule("ring=Zd:3\ns=1 eps=x\n", 4),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn v_zero_fast_path_agrees_with_solver_profile() {
        for n in 2..=10 {
            for l in 1..=n_classes(n) {
                let fast = v_zero_peak(n, 5, 2, l).unwrap();
                assert_eq!(fast.kappa, 2, "n={n} l={l}");
                let gen = solve_peak(n, 5, 2, 0, l).unwrap();
                assert!(gen.is_exact());
                assert!(gen.schedule.len() <= fast.schedule.len());
            }
        }
    }
}
