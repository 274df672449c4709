//! Logical circuits on `M` mirror-encoded sites to global pulse programs.
//!
//! Logical site `l` lives on physical sites `l` and `N+1-l`. Rotations use
//! the localized cores of [`crate::simulator::protocol`]; arbitrary
//! single-site unitaries go through the principal logarithm, the Hermitian
//! basis expansion and a product formula; entangling gates use the
//! time-shift construction.

use std::f64::consts::PI;
use std::fmt::{self, Write as _};
use std::ops::Range;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{self, CMatrix};
use crate::pulses;
use crate::simulator::oracle::embed_multi;
use crate::simulator::protocol;
use crate::simulator::{self, encode_mirror, fidelity, logical_count, DenseState, GlobalPrimitive};
use crate::weyl::{self, Decomposition, Dimension, Part, TrotterGate, WeylLabel};
use crate::{Error, Result, C64};

/// Default end-to-end operator tolerance for product-formula synthesis.
pub const DEFAULT_TOL: f64 = 1e-4;
/// Unitarity tolerance for supplied matrices.
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub enum LogicalGate {
    SingleUnitary { l: usize, u: CMatrix },
    BasisRotation { l: usize, label: WeylLabel, part: Part, angle: f64 },
    /// `exp(i angle (Z(-u)_l X(u)_{l+1} + h.c.))`.
    Entangle { l: usize, u: u32, angle: f64 },
}

impl LogicalGate {
    pub fn validate(&self, d: u32, m: usize) -> Result<()> {
        let check_site = |l: usize, top: usize| {
            if l == 0 || l > top {
                Err(Error::Domain(format!("logical site {l} outside 1..={top}")))
            } else {
                Ok(())
            }
        };
        match self {
            LogicalGate::SingleUnitary { l, u } => {
                check_site(*l, m)?;
                if u.nrows() != d as usize || u.ncols() != d as usize {
                    return Err(Error::DimensionMismatch(format!(
                        "unitary is {}x{}, expected {d}x{d}",
                        u.nrows(),
                        u.ncols()
                    )));
                }
                if !linalg::is_unitary(u, UNITARY_TOL) {
                    return Err(Error::Validation("matrix is not unitary within 1e-10".into()));
                }
                Ok(())
            }
            LogicalGate::BasisRotation { l, angle, .. } => {
                check_site(*l, m)?;
                finite(*angle)
            }
            LogicalGate::Entangle { l, angle, .. } => {
                check_site(*l, m.saturating_sub(1))?;
                finite(*angle)
            }
        }
    }

    /// The gate as a `d^M x d^M` matrix on the logical register.
    pub fn logical_unitary(&self, d: u32, m: usize) -> Result<CMatrix> {
        self.validate(d, m)?;
        let dim = Dimension::Finite(d);
        Ok(match self {
            LogicalGate::SingleUnitary { l, u } => embed_multi(d, m, &[l - 1], u),
            LogicalGate::BasisRotation { l, label, part, angle } => {
                let b = basis_or_zero(d, *label, *part)?;
                embed_multi(d, m, &[l - 1], &linalg::expm_i_hermitian(&b, *angle))
            }
            LogicalGate::Entangle { l, u, angle } => {
                let z = weyl::weyl_matrix(dim, WeylLabel::new(d, 0, -(*u as i64)))?;
                let x = weyl::weyl_matrix(dim, WeylLabel::new(d, *u as i64, 0))?;
                let word = linalg::kron(&z, &x);
                let gen = &word + word.adjoint();
                embed_multi(d, m, &[l - 1, *l], &linalg::expm_i_hermitian(&gen, *angle))
            }
        })
    }
}

fn finite(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Validation(format!("angle {x} is not finite")))
    }
}

fn basis_or_zero(d: u32, label: WeylLabel, part: Part) -> Result<CMatrix> {
    if label.is_identity() && part == Part::Antisymmetric {
        return Ok(CMatrix::zeros(d as usize, d as usize));
    }
    Ok(weyl::hermitian_basis_matrix(Dimension::Finite(d), label, part)?.matrix)
}

fn format_matrix_inline(u: &CMatrix) -> String {
    let vals: Vec<String> = u
        .row_iter()
        .flat_map(|r| r.iter().flat_map(|z| [format!("{:?}", z.re), format!("{:?}", z.im)]).collect::<Vec<_>>())
        .collect();
    vals.join(",")
}

impl fmt::Display for LogicalGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogicalGate::SingleUnitary { l, u } => {
                write!(f, "UNI l={l} data={}", format_matrix_inline(u))
            }
            LogicalGate::BasisRotation { l, label, part, angle } => write!(
                f,
                "ROT l={l} a={} b={} part={} angle={angle:?}",
                label.a,
                label.b,
                part.letter()
            ),
            LogicalGate::Entangle { l, u, angle } => write!(f, "ENT l={l} u={u} angle={angle:?}"),
        }
    }
}

/// Contiguous run of primitives emitted for one logical gate.
#[derive(Clone, Debug, PartialEq)]
pub struct Provenance {
    pub gate_index: usize,
    pub gate: String,
    pub ops: Range<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PulseProgram {
    pub d: u32,
    pub n: usize,
    pub ops: Vec<GlobalPrimitive>,
    pub provenance: Vec<Provenance>,
}

impl PulseProgram {
    pub fn empty(d: u32, n: usize) -> Self {
        PulseProgram { d, n, ops: Vec::new(), provenance: Vec::new() }
    }

    pub fn cost(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Appends `other`, shifting its provenance spans.
    pub fn append(&mut self, other: PulseProgram) {
        let off = self.ops.len();
        self.ops.extend(other.ops);
        self.provenance.extend(other.provenance.into_iter().map(|p| Provenance {
            ops: p.ops.start + off..p.ops.end + off,
            ..p
        }));
    }

    pub fn gate_costs(&self) -> Vec<(usize, usize)> {
        self.provenance.iter().map(|p| (p.gate_index, p.ops.len())).collect()
    }

    pub fn run(&self, state: &mut DenseState) -> Result<()> {
        if state.d() != self.d || state.n() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "program for (d={}, N={}) on a (d={}, N={}) state",
                self.d,
                self.n,
                state.d(),
                state.n()
            )));
        }
        state.apply_all(&self.ops)
    }

    /// Line-oriented text form: header, `# gate i: ...` provenance comments
    /// before each gate's primitives, and a cost footer.
    pub fn to_text(&self) -> String {
        let mut s = format!("# qca program d={} N={}\n", self.d, self.n);
        let mut spans = self.provenance.iter().peekable();
        for (i, op) in self.ops.iter().enumerate() {
            while let Some(p) = spans.next_if(|p| p.ops.start == i) {
                let _ = writeln!(s, "# gate {}: {}", p.gate_index, p.gate);
                if p.ops.is_empty() {
                    continue;
                }
                break;
            }
            let _ = writeln!(s, "{op}");
        }
        for p in spans {
            let _ = writeln!(s, "# gate {}: {}", p.gate_index, p.gate);
        }
        let _ = writeln!(s, "# cost {}", self.cost());
        s
    }

    /// The logical circuit recorded in the provenance comments.
    pub fn recorded_circuit(&self) -> Result<Vec<LogicalGate>> {
        self.provenance
            .iter()
            .map(|p| parse_gate(&p.gate, None).map_err(|e| Error::Parse { line: 0, message: e }))
            .collect()
    }
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Parses [`PulseProgram::to_text`] output. `fallback` gives `(d, N)` when
/// the header is missing.
pub fn parse_program(text: &str, fallback: Option<(u32, usize)>) -> Result<PulseProgram> {
    let mut shape = fallback;
    let mut ops = Vec::new();
    let mut provenance: Vec<Provenance> = Vec::new();
    let mut footer = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            let c = c.trim();
            if let Some(h) = c.strip_prefix("qca program") {
                let mut d = None;
                let mut n = None;
                for tok in h.split_whitespace() {
                    match tok.split_once('=') {
                        Some(("d", v)) => d = v.parse().ok(),
                        Some(("N", v)) => n = v.parse().ok(),
                        _ => {}
                    }
                }
                match (d, n) {
                    (Some(d), Some(n)) => shape = Some((d, n)),
                    _ => return Err(parse_error(line_no, "header needs d=<int> N=<int>")),
                }
            } else if let Some(g) = c.strip_prefix("gate ") {
                let (idx, desc) = g
                    .split_once(':')
                    .ok_or_else(|| parse_error(line_no, "expected `# gate <i>: <gate>`"))?;
                let gate_index = idx
                    .trim()
                    .parse()
                    .map_err(|_| parse_error(line_no, format!("bad gate index `{idx}`")))?;
                if let Some(last) = provenance.last_mut() {
                    last.ops.end = ops.len();
                }
                provenance.push(Provenance {
                    gate_index,
                    gate: desc.trim().to_string(),
                    ops: ops.len()..ops.len(),
                });
            } else if let Some(v) = c.strip_prefix("cost") {
                footer = Some(
                    v.trim()
                        .parse::<usize>()
                        .map_err(|_| parse_error(line_no, format!("bad cost `{}`", v.trim())))?,
                );
            }
            continue;
        }
        let op: GlobalPrimitive = line.parse().map_err(|e: String| parse_error(line_no, e))?;
        ops.push(op);
    }
    if let Some(last) = provenance.last_mut() {
        last.ops.end = ops.len();
    }
    let (d, n) = shape.ok_or_else(|| parse_error(0, "missing `# qca program d= N=` header"))?;
    if d < 2 || n == 0 {
        return Err(parse_error(0, format!("invalid shape d={d} N={n}")));
    }
    if let Some(c) = footer {
        if c != ops.len() {
            return Err(parse_error(0, format!("cost footer says {c}, program has {}", ops.len())));
        }
    }
    Ok(PulseProgram { d, n, ops, provenance })
}

fn single_gate(d: u32, n: usize, gate: &LogicalGate, ops: Vec<GlobalPrimitive>) -> PulseProgram {
    let len = ops.len();
    PulseProgram {
        d,
        n,
        ops,
        provenance: vec![Provenance { gate_index: 0, gate: gate.to_string(), ops: 0..len }],
    }
}

fn check_logical_site(n: usize, l: usize) -> Result<()> {
    let m = logical_count(n);
    if l == 0 || l > m {
        return Err(Error::Domain(format!("logical site {l} outside 1..={m} for N={n}")));
    }
    Ok(())
}

/// `exp(i angle B_{label,part})` on logical site `l`.
pub fn compile_rotation(
    n: usize,
    d: u32,
    l: usize,
    label: WeylLabel,
    part: Part,
    angle: f64,
) -> Result<PulseProgram> {
    check_logical_site(n, l)?;
    finite(angle)?;
    let label = WeylLabel::new(d, label.a as i64, label.b as i64);
    let ops = protocol::rotation_sequence(n, d, l, label, part, angle)?;
    Ok(single_gate(d, n, &LogicalGate::BasisRotation { l, label, part, angle }, ops))
}

/// Primitive count of the single-run core for `(u, v)` at site class `m`.
pub fn core_cost(n: usize, d: u32, u: i64, v: i64, m: usize) -> Result<usize> {
    let sol = pulses::solve_peak(n, d, u, v, m)?;
    pulses::schedule_kappa(&sol)?;
    let r = sol.schedule.ring;
    Ok(protocol::localized_core(&sol.schedule, 1.0, r.reduce(u), r.reduce(v)).len())
}

/// Product-formula slice selection.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Slicing {
    /// Smallest count (doubling from 1) whose product meets the tolerance,
    /// never above the commutator-bound count.
    Tolerance(f64),
    Fixed(usize),
}

/// Synthesis plan for one single-site unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryPlan {
    pub decomposition: Decomposition,
    pub slices: usize,
    pub gates: Vec<TrotterGate>,
    /// `min_phi || U - e^{i phi} prod ||_2` of the gate list.
    pub operator_error: f64,
}

fn phase_aligned_error(u: &CMatrix, v: &CMatrix) -> f64 {
    let inner: C64 = v.iter().zip(u.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if inner.norm() > 0.0 { inner / inner.norm() } else { C64::new(1.0, 0.0) };
    linalg::operator_norm(&(u - v * phase))
}

pub fn plan_single_unitary(d: u32, u: &CMatrix, slicing: Slicing) -> Result<UnitaryPlan> {
    let h = linalg::principal_log_unitary(u)?;
    let full = weyl::decompose_hamiltonian(d, &h)?;
    // Drop rounding-level terms and the identity, a global phase.
    let coeffs = full
        .nontrivial_terms(1e-13)
        .into_iter()
        .map(|(l, p, c)| ((l, p), c))
        .collect();
    let dec = Decomposition { d, coeffs };
    let build = |slices: usize| -> Result<(Vec<TrotterGate>, f64)> {
        let gates = weyl::trotterize(&dec, 1.0, slices)?;
        let err = phase_aligned_error(u, &weyl::gate_product(d, &gates)?);
        Ok((gates, err))
    };
    let (slices, gates, err) = match slicing {
        Slicing::Fixed(k) => {
            let (g, e) = build(k)?;
            (k, g, e)
        }
        Slicing::Tolerance(tol) => {
            let cap = weyl::trotter_slices(&dec, 1.0, tol)?;
            let mut k = 1;
            loop {
                let (g, e) = build(k)?;
                if e <= tol || k >= cap {
                    break (k, g, e);
                }
                k = (2 * k).min(cap);
            }
        }
    };
    Ok(UnitaryPlan { decomposition: dec, slices, gates, operator_error: err })
}

pub fn compile_single_unitary(
    n: usize,
    d: u32,
    l: usize,
    u: &CMatrix,
    slicing: Slicing,
) -> Result<PulseProgram> {
    check_logical_site(n, l)?;
    let gate = LogicalGate::SingleUnitary { l, u: u.clone() };
    gate.validate(d, logical_count(n))?;
    let plan = plan_single_unitary(d, u, slicing)?;
    if let Slicing::Tolerance(tol) = slicing {
        if plan.operator_error > tol {
            return Err(Error::Internal(format!(
                "product formula error {:e} above tolerance {tol:e} after {} slices",
                plan.operator_error, plan.slices
            )));
        }
    }
    let mut ops = Vec::new();
    for g in &plan.gates {
        ops.extend(protocol::rotation_sequence(n, d, l, g.label, g.part, g.angle)?);
    }
    Ok(single_gate(d, n, &gate, ops))
}

/// Entangler between logical `l` and `l+1`. With `ancilla` set the program
/// targets the interleaved `4M - 2` chain and realises
/// `exp(i angle (X(u) X(u) + h.c.))`, the time-shift gate conjugated by
/// `F` on site `l`.
pub fn compile_entangle(n: usize, d: u32, l: usize, u: u32, angle: f64, ancilla: bool) -> Result<PulseProgram> {
    finite(angle)?;
    let m = logical_count(n);
    if l == 0 || l + 1 > m {
        return Err(Error::Domain(format!("entangler site {l} outside 1..{m} for N={n}")));
    }
    let u = u % d;
    let gate = LogicalGate::Entangle { l, u, angle };
    if ancilla {
        let ops = protocol::entangle_ancilla_program(m, d, l, u, angle)?;
        return Ok(single_gate(d, 4 * m - 2, &gate, ops));
    }
    let ops = protocol::entangle_program(n, d, l, u, angle)?;
    Ok(single_gate(d, n, &gate, ops))
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct CompileOptions {
    pub slicing: Slicing,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions { slicing: Slicing::Tolerance(DEFAULT_TOL) }
    }
}

pub fn compile_gate(n: usize, d: u32, gate: &LogicalGate, opts: &CompileOptions) -> Result<PulseProgram> {
    match gate {
        LogicalGate::SingleUnitary { l, u } => compile_single_unitary(n, d, *l, u, opts.slicing),
        LogicalGate::BasisRotation { l, label, part, angle } => {
            compile_rotation(n, d, *l, *label, *part, *angle)
        }
        LogicalGate::Entangle { l, u, angle } => compile_entangle(n, d, *l, *u, *angle, false),
    }
}

pub fn compile_circuit(
    circuit: &[LogicalGate],
    n: usize,
    d: u32,
    opts: &CompileOptions,
) -> Result<PulseProgram> {
    let mut prog = PulseProgram::empty(d, n);
    for (index, gate) in circuit.iter().enumerate() {
        let mut part = compile_gate(n, d, gate, opts)
            .map_err(|e| Error::Gate { index, source: Box::new(e) })?;
        for p in &mut part.provenance {
            p.gate_index = index;
        }
        prog.append(part);
    }
    Ok(prog)
}

/// Applies the circuit directly to a logical state vector.
pub fn execute_logical(circuit: &[LogicalGate], d: u32, m: usize, psi: &[C64]) -> Result<Vec<C64>> {
    let mut v = nalgebra::DVector::from_column_slice(psi);
    for g in circuit {
        v = g.logical_unitary(d, m)? * v;
    }
    Ok(v.iter().copied().collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub trials: usize,
    pub fidelities: Vec<f64>,
    /// Site-reversal fidelity of each output (mirror symmetry check).
    pub mirror_fidelities: Vec<f64>,
}

impl VerifyReport {
    pub fn min(&self) -> f64 {
        self.fidelities.iter().copied().fold(1.0, f64::min)
    }

    pub fn mean(&self) -> f64 {
        if self.fidelities.is_empty() {
            return 1.0;
        }
        self.fidelities.iter().sum::<f64>() / self.fidelities.len() as f64
    }

    pub fn min_mirror(&self) -> f64 {
        self.mirror_fidelities.iter().copied().fold(1.0, f64::min)
    }
}

/// Runs `program` on `trials` random encoded inputs and compares with the
/// circuit applied directly to the logical state.
pub fn verify_program(
    program: &PulseProgram,
    circuit: &[LogicalGate],
    trials: usize,
    seed: u64,
) -> Result<VerifyReport> {
    let (d, n) = (program.d, program.n);
    let m = logical_count(n);
    simulator::checked_dim(d, n, simulator::DEFAULT_CAP)?;
    let ldim = (d as usize).pow(m as u32);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fidelities = Vec::with_capacity(trials);
    let mut mirror_fidelities = Vec::with_capacity(trials);
    for _ in 0..trials {
        let psi = simulator::random_vector(ldim, &mut rng);
        let mut phys = encode_mirror(&psi, d, n)?;
        program.run(&mut phys)?;
        let want = encode_mirror(&execute_logical(circuit, d, m, &psi)?, d, n)?;
        fidelities.push(fidelity(&phys, &want)?);
        mirror_fidelities.push(fidelity(&phys, &phys.site_reversed())?);
    }
    Ok(VerifyReport { trials, fidelities, mirror_fidelities })
}

fn kv<'a>(parts: &[&'a str], key: &str) -> std::result::Result<&'a str, String> {
    parts
        .iter()
        .find_map(|p| p.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .ok_or_else(|| format!("missing `{key}=`"))
}

fn parse_num<T: std::str::FromStr>(s: &str, key: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|_| format!("bad value for `{key}`: `{s}`"))
}

fn parse_angle(s: &str) -> std::result::Result<f64, String> {
    pulses::parse_real_strength(s)
        .or_else(|| s.parse().ok())
        .filter(|x: &f64| x.is_finite())
        .ok_or_else(|| format!("bad angle `{s}`"))
}

/// Matrix from `d` rows of `2d` numbers (`re im` pairs); commas or
/// whitespace separate values.
pub fn parse_matrix(text: &str) -> std::result::Result<CMatrix, String> {
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(|l| l.trim())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<f64>().map_err(|_| format!("bad number `{t}`")))
                .collect()
        })
        .collect::<std::result::Result<_, _>>()?;
    let k = rows.len();
    if k == 0 || rows.iter().any(|r| r.len() != 2 * k) {
        return Err(format!("expected {k} rows of {} numbers", 2 * k));
    }
    Ok(CMatrix::from_fn(k, k, |i, j| C64::new(rows[i][2 * j], rows[i][2 * j + 1])))
}

fn parse_inline_matrix(s: &str) -> std::result::Result<CMatrix, String> {
    let vals: Vec<f64> = s
        .split(',')
        .map(|t| t.parse::<f64>().map_err(|_| format!("bad number `{t}`")))
        .collect::<std::result::Result<_, _>>()?;
    let k = ((vals.len() / 2) as f64).sqrt().round() as usize;
    if k == 0 || 2 * k * k != vals.len() {
        return Err(format!("{} values do not form a square complex matrix", vals.len()));
    }
    Ok(CMatrix::from_fn(k, k, |i, j| C64::new(vals[2 * (i * k + j)], vals[2 * (i * k + j) + 1])))
}

/// One circuit line. `base` resolves relative `matrix=` paths.
pub fn parse_gate(line: &str, base: Option<&Path>) -> std::result::Result<LogicalGate, String> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    let Some((&head, rest)) = parts.split_first() else {
        return Err("empty gate".into());
    };
    let l: usize = parse_num(kv(rest, "l")?, "l")?;
    match head {
        "ROT" => {
            let a: i64 = parse_num(kv(rest, "a")?, "a")?;
            let b: i64 = parse_num(kv(rest, "b")?, "b")?;
            if a < 0 || b < 0 {
                return Err("labels must be non-negative".into());
            }
            let part = Part::from_letter(kv(rest, "part")?)
                .ok_or_else(|| "part must be S or A".to_string())?;
            Ok(LogicalGate::BasisRotation {
                l,
                label: WeylLabel { a: a as u32, b: b as u32 },
                part,
                angle: parse_angle(kv(rest, "angle")?)?,
            })
        }
        "ENT" => Ok(LogicalGate::Entangle {
            l,
            u: parse_num(kv(rest, "u")?, "u")?,
            angle: parse_angle(kv(rest, "angle")?)?,
        }),
        "UNI" => {
            let u = if let Ok(data) = kv(rest, "data") {
                parse_inline_matrix(data)?
            } else {
                let p = Path::new(kv(rest, "matrix")?);
                let full = match base {
                    Some(b) if p.is_relative() => b.join(p),
                    _ => p.to_path_buf(),
                };
                let text = std::fs::read_to_string(&full)
                    .map_err(|e| format!("cannot read {}: {e}", full.display()))?;
                parse_matrix(&text).map_err(|e| format!("{}: {e}", full.display()))?
            };
            Ok(LogicalGate::SingleUnitary { l, u })
        }
        other => Err(format!("unknown gate `{other}`")),
    }
}

/// Parses a circuit file; labels are reduced mod `d`.
pub fn parse_circuit(text: &str, d: u32, base: Option<&Path>) -> Result<Vec<LogicalGate>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut g = parse_gate(line, base).map_err(|e| parse_error(i + 1, e))?;
        match &mut g {
            LogicalGate::BasisRotation { label, .. } => {
                *label = WeylLabel::new(d, label.a as i64, label.b as i64)
            }
            LogicalGate::Entangle { u, .. } => *u %= d,
            LogicalGate::SingleUnitary { u, .. } => {
                if u.nrows() != d as usize {
                    return Err(parse_error(i + 1, format!("matrix is {0}x{0}, expected {d}x{d}", u.nrows())));
                }
            }
        }
        out.push(g);
    }
    Ok(out)
}

/// Indices `(j, k, p, q)` and phases witnessing the exact-universality
/// inequality `theta_jk + theta_pq != theta_jq + theta_pk` for
/// `theta_jk = 2 cos(2 pi (j + k) / d)`.
#[derive(Clone, Debug, PartialEq)]
pub struct UniversalityWitness {
    pub d: u32,
    pub s: u32,
    pub indices: (u32, u32, u32, u32),
    pub left: f64,
    pub right: f64,
}

impl UniversalityWitness {
    pub fn margin(&self) -> f64 {
        (self.left - self.right).abs()
    }

    /// Distance of the full phase difference from `2 pi Z`.
    pub fn circular_margin(&self) -> f64 {
        let diff = 2.0 * (self.left - self.right);
        let r = diff.rem_euclid(2.0 * PI);
        r.min(2.0 * PI - r)
    }
}

pub const WITNESS_MARGIN: f64 = 1e-9;

fn theta(d: u32, j: u32, k: u32) -> f64 {
    2.0 * (2.0 * PI * (j + k) as f64 / d as f64).cos()
}

/// Smallest valid `s` (trying `1..=d-2`, then `0`) giving
/// `(j, k, p, q) = (1, d-1, d-s, s)` with both margins above `1e-9`.
pub fn universality_witness(d: u32) -> Result<UniversalityWitness> {
    if d < 2 {
        return Err(Error::UnsupportedDimension(format!("d = {d}")));
    }
    for s in (1..d.saturating_sub(1)).chain([0]) {
        if (s + 1) % d == 0 {
            continue;
        }
        let (j, k, p, q) = (1, d - 1, (d - s) % d, s % d);
        let left = (theta(d, j, k) + theta(d, p, q)) / 2.0;
        let right = (theta(d, j, q) + theta(d, p, k)) / 2.0;
        let w = UniversalityWitness { d, s, indices: (j, k, p, q), left, right };
        if w.margin() > WITNESS_MARGIN && w.circular_margin() > WITNESS_MARGIN {
            return Ok(w);
        }
    }
    Err(Error::Certification(format!("no universality witness found for d = {d}")))
}

/// Diagonal phases of the unit-angle entangler generator after conjugating
/// the second site into the `Z` basis, with the Brylinski difference at the
/// witness indices (relabelled to this basis).
#[derive(Clone, Debug, PartialEq)]
pub struct EntanglerCertificate {
    pub witness: UniversalityWitness,
    pub phase_difference: f64,
    pub off_diagonal: f64,
}

/// Checks numerically that `exp(i (Z(-1) X(1) + h.c.))` is diagonal after a
/// Fourier change of basis on the second site and that its phases satisfy
/// the universality inequality at the witness indices.
pub fn certify_entangler(d: u32) -> Result<EntanglerCertificate> {
    let w = universality_witness(d)?;
    let dim = Dimension::Finite(d);
    let z = weyl::weyl_matrix(dim, WeylLabel::new(d, 0, -1))?;
    let x = weyl::weyl_matrix(dim, WeylLabel::new(d, 1, 0))?;
    let word = linalg::kron(&z, &x);
    let gen = &word + word.adjoint();
    let f = simulator::fourier_matrix(d, false);
    let basis = linalg::kron(&linalg::identity(d as usize), &f);
    // F^dag X F = Z^{-1}: diagonal generator.
    let diag = basis.adjoint() * &gen * &basis;
    let du = d as usize;
    let mut off = 0.0f64;
    for i in 0..du * du {
        for k in 0..du * du {
            if i != k {
                off = off.max(diag[(i, k)].norm());
            }
        }
    }
    if off > 1e-9 {
        return Err(Error::Certification(format!(
            "entangler is not diagonal after the Fourier change of basis ({off:e})"
        )));
    }
    let phase = |j: u32, k: u32| diag[(j as usize * du + k as usize, j as usize * du + k as usize)].re;
    // Find the relabelling (j, k) -> (sj j, sk k) that matches 2cos(2 pi (j+k)/d).
    let mut signs = None;
    'search: for sj in [1i64, -1] {
        for sk in [1i64, -1] {
            let ok = (0..d).all(|j| {
                (0..d).all(|k| {
                    let jj = (sj * j as i64).rem_euclid(d as i64) as u32;
                    let kk = (sk * k as i64).rem_euclid(d as i64) as u32;
                    (phase(jj, kk) - theta(d, j, k)).abs() < 1e-9
                })
            });
            if ok {
                signs = Some((sj, sk));
                break 'search;
            }
        }
    }
    let (sj, sk) = signs.ok_or_else(|| {
        Error::Certification("entangler phases are not of the form 2cos(2 pi (j+k)/d)".into())
    })?;
    let map = |v: u32, s: i64| (s * v as i64).rem_euclid(d as i64) as u32;
    let (j, k, p, q) = w.indices;
    let diff = phase(map(j, sj), map(k, sk)) + phase(map(p, sj), map(q, sk))
        - phase(map(j, sj), map(q, sk))
        - phase(map(p, sj), map(k, sk));
    let r = diff.rem_euclid(2.0 * PI);
    if r.min(2.0 * PI - r) <= WITNESS_MARGIN {
        return Err(Error::Certification(format!(
            "phase difference {diff} is a multiple of 2 pi"
        )));
    }
    Ok(EntanglerCertificate { witness: w, phase_difference: diff, off_diagonal: off })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_inputs_give_empty_programs() {
        let p = compile_circuit(&[], 6, 2, &CompileOptions::default()).unwrap();
        assert!(p.is_empty());
        let r = compile_rotation(6, 2, 1, WeylLabel { a: 1, b: 0 }, Part::Symmetric, 0.0).unwrap();
        assert_eq!(r.cost(), 0);
        let u = compile_single_unitary(6, 3, 2, &linalg::identity(3), Slicing::Tolerance(1e-4)).unwrap();
        assert_eq!(u.cost(), 0);
    }

    #[test]
    fn single_generator_needs_no_slicing() {
        let x = weyl::hermitian_basis_matrix(Dimension::Finite(2), WeylLabel { a: 1, b: 0 }, Part::Symmetric)
            .unwrap()
            .matrix;
        let u = linalg::expm_i_hermitian(&x, 0.3);
        let plan = plan_single_unitary(2, &u, Slicing::Tolerance(1e-6)).unwrap();
        assert_eq!(plan.gates.len(), 1);
        assert!((plan.gates[0].angle - 0.3).abs() < 1e-10);
        let prog = compile_single_unitary(6, 2, 1, &u, Slicing::Tolerance(1e-6)).unwrap();
        let rot = compile_rotation(6, 2, 1, WeylLabel { a: 1, b: 0 }, Part::Symmetric, plan.gates[0].angle).unwrap();
        assert_eq!(prog.ops, rot.ops);
    }

    #[test]
    fn witness_examples() {
        let w3 = universality_witness(3).unwrap();
        assert_eq!(w3.indices, (1, 2, 2, 1));
        assert!((w3.left - 2.0).abs() < 1e-12 && (w3.right + 1.0).abs() < 1e-12);
        assert!((w3.margin() - 3.0).abs() < 1e-12);
        let w2 = universality_witness(2).unwrap();
        assert_eq!(w2.s, 0);
        assert!(w2.margin() > 1e-9);
        for d in 2..=17 {
            let w = universality_witness(d).unwrap();
            assert!(w.margin() > 1e-9 && w.circular_margin() > 1e-9, "d={d}");
            assert_ne!((w.s + 1) % d, 0);
        }
    }

    #[test]
    fn entangler_certified() {
        for d in 2..=7 {
            let c = certify_entangler(d).unwrap();
            assert!(c.off_diagonal < 1e-9);
        }
    }

    #[test]
    fn gate_text_roundtrip() {
        let gates = vec![
            LogicalGate::BasisRotation { l: 2, label: WeylLabel { a: 1, b: 2 }, part: Part::Antisymmetric, angle: 0.125 },
            LogicalGate::Entangle { l: 1, u: 2, angle: -0.5 },
            LogicalGate::SingleUnitary { l: 1, u: simulator::fourier_matrix(3, false) },
        ];
        for g in gates {
            let text = g.to_string();
            let back = parse_gate(&text, None).unwrap();
            assert_eq!(back, g, "{text}");
        }
        assert!(parse_gate("ROT l=1 a=1 b=0 part=Q angle=1", None).is_err());
        assert!(parse_gate("FOO l=1", None).is_err());
        let c = parse_circuit("# comment\nROT l=1 a=4 b=0 part=S angle=1/4*pi\n", 3, None).unwrap();
        assert_eq!(c[0], LogicalGate::BasisRotation { l: 1, label: WeylLabel { a: 1, b: 0 }, part: Part::Symmetric, angle: PI / 4.0 });
        let err = parse_circuit("ROT l=1 a=1 b=0 part=S angle=1\nENT l=1\n", 3, None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn program_text_roundtrip() {
        let circuit = vec![
            LogicalGate::BasisRotation { l: 1, label: WeylLabel { a: 1, b: 0 }, part: Part::Symmetric, angle: 0.0 },
            LogicalGate::BasisRotation { l: 2, label: WeylLabel { a: 1, b: 1 }, part: Part::Symmetric, angle: 0.3 },
            LogicalGate::Entangle { l: 1, u: 1, angle: 0.2 },
        ];
        let p = compile_circuit(&circuit, 6, 3, &CompileOptions::default()).unwrap();
        let text = p.to_text();
        let back = parse_program(&text, None).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.recorded_circuit().unwrap(), circuit);
        assert!(text.ends_with(&format!("# cost {}\n", p.cost())));
        let bad = text.replace("# cost", "# cost 1").replace("# cost 1 ", "# cost 1");
        assert!(parse_program(&bad, None).is_err());
    }

    #[test]
    fn gate_errors_carry_index() {
        let circuit = vec![
            LogicalGate::BasisRotation { l: 1, label: WeylLabel { a: 1, b: 0 }, part: Part::Symmetric, angle: 0.3 },
            LogicalGate::BasisRotation { l: 9, label: WeylLabel { a: 1, b: 0 }, part: Part::Symmetric, angle: 0.3 },
        ];
        let err = compile_circuit(&circuit, 6, 2, &CompileOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Gate { index: 1, .. }), "{err}");
    }

    #[test]
    fn cost_is_additive() {
        let g1 = LogicalGate::BasisRotation { l: 1, label: WeylLabel { a: 0, b: 1 }, part: Part::Symmetric, angle: 0.3 };
        let g2 = LogicalGate::Entangle { l: 1, u: 1, angle: 0.4 };
        let opts = CompileOptions::default();
        let both = compile_circuit(&[g1.clone(), g2.clone()], 6, 2, &opts).unwrap();
        let c1 = compile_gate(6, 2, &g1, &opts).unwrap().cost();
        let c2 = compile_gate(6, 2, &g2, &opts).unwrap().cost();
        assert_eq!(both.cost(), c1 + c2);
        assert_eq!(both.gate_costs(), vec![(0, c1), (1, c2)]);
    }
}
