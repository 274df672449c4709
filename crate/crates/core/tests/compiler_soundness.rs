mod common;

use std::f64::consts::PI;

use common::*;
use proptest::prelude::*;
use qca_core::compiler::*;
use qca_core::linalg::{self, CMatrix};
use qca_core::simulator::{encode_interleaved, encode_mirror, fidelity, fourier_matrix, DenseState, Layout};
use qca_core::weyl::{Part, WeylLabel};
use qca_core::{Error, C64};
use rand::Rng;

fn mat_vec(m: &CMatrix, v: &[C64]) -> Vec<C64> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum()).collect()
}

/// Haar-ish random unitary from the QR of a Gaussian matrix.
fn random_unitary(d: usize, seed: u64) -> CMatrix {
    let mut r = rng(seed);
    let g = CMatrix::from_fn(d, d, |_, _| C64::new(r.gen::<f64>() - 0.5, r.gen::<f64>() - 0.5));
    g.qr().q()
}

#[test]
fn basis_rotation_on_long_odd_dimension_chain() {
    let (n, d, l) = (8usize, 5u32, 3usize);
    let label = WeylLabel::new(d, 1, 1);
    let prog = compile_rotation(n, d, l, label, Part::Symmetric, PI / 8.0).unwrap();
    let gen = basis_element(d, 1, 1, Part::Symmetric);
    for seed in 0..2 {
        let st = random_state(d, n, seed);
        let mut got = st.clone();
        prog.run(&mut got).unwrap();
        let want = apply_exp(&apply_exp(&st, &[l - 1], &gen, PI / 8.0), &[n - l], &gen, PI / 8.0);
        let f = fidelity(&got, &want).unwrap();
        assert!(f > 1.0 - 1e-8, "{f}");
    }
}

#[test]
fn random_qutrit_unitary_with_fixed_slices() {
    let (n, d) = (4usize, 3u32);
    let u = random_unitary(3, 11);
    let prog = compile_single_unitary(n, d, 1, &u, Slicing::Fixed(200)).unwrap();
    let circuit = [LogicalGate::SingleUnitary { l: 1, u }];
    let report = verify_program(&prog, &circuit, 3, 5).unwrap();
    assert!(report.min() > 1.0 - 1e-3, "{:?}", report.fidelities);
}

#[test]
fn tolerance_slicing_meets_the_operator_bound() {
    let u = random_unitary(2, 3);
    let plan = plan_single_unitary(2, &u, Slicing::Tolerance(1e-4)).unwrap();
    assert!(plan.operator_error <= 1e-4);
    let coarse = plan_single_unitary(2, &u, Slicing::Fixed(1)).unwrap();
    assert!(coarse.operator_error >= plan.operator_error);
}

#[test]
fn entangler_program_matches_logical_gate() {
    let (n, d) = (4usize, 2u32);
    let circuit = [LogicalGate::Entangle { l: 1, u: 1, angle: 0.6 }];
    let prog = compile_circuit(&circuit, n, d, &CompileOptions::default()).unwrap();
    let report = verify_program(&prog, &circuit, 10, 1).unwrap();
    assert!(report.min() > 1.0 - 1e-8, "{:?}", report.fidelities);
    assert!(report.min_mirror() > 1.0 - 1e-8);
}

#[test]
fn ancilla_entangler_is_f_conjugate_of_time_shift_gate() {
    let (d, m, alpha) = (3u32, 2usize, 0.45);
    let anc = compile_entangle(4, d, 1, 1, alpha, true).unwrap();
    assert_eq!(anc.n, 4 * m - 2);
    let ent = LogicalGate::Entangle { l: 1, u: 1, angle: alpha }.logical_unitary(d, m).unwrap();
    // W with W X W^dag = Z(-1), taken from {F, F^dag}.
    let x = weyl(d, 1, 0);
    let z_neg = weyl(d, 0, -1);
    let w = [fourier_matrix(d, false), fourier_matrix(d, true)]
        .into_iter()
        .find(|w| linalg::frobenius(&(w * &x * w.adjoint() - &z_neg)) < 1e-12)
        .expect("a Fourier power maps X to Z(-1)");
    let wl = linalg::kron(&w, &linalg::identity(d as usize));
    let xx_gate = wl.adjoint() * &ent * &wl;
    for seed in 0..4 {
        let psi = random_logical((d * d) as usize, seed);
        let mut st = encode_interleaved(&psi, d, m).unwrap();
        anc.run(&mut st).unwrap();
        let want = encode_interleaved(&mat_vec(&xx_gate, &psi), d, m).unwrap();
        assert!(fidelity(&st, &want).unwrap() > 1.0 - 1e-8);
    }
}

#[test]
fn compilation_is_deterministic() {
    let circuit = vec![
        LogicalGate::BasisRotation { l: 2, label: WeylLabel::new(3, 1, 2), part: Part::Antisymmetric, angle: 0.3 },
        LogicalGate::SingleUnitary { l: 1, u: random_unitary(3, 9) },
        LogicalGate::Entangle { l: 1, u: 2, angle: -0.2 },
    ];
    let a = compile_circuit(&circuit, 6, 3, &CompileOptions::default()).unwrap();
    let b = compile_circuit(&circuit, 6, 3, &CompileOptions::default()).unwrap();
    assert_eq!(a.to_text(), b.to_text());
    let parsed = parse_program(&a.to_text(), None).unwrap();
    assert_eq!(parsed.ops, a.ops);
    assert_eq!(parsed.provenance.len(), 3);
    assert_eq!(parsed.to_text(), a.to_text());
}

#[test]
fn failing_gate_is_reported_with_its_index() {
    let circuit = vec![
        LogicalGate::BasisRotation { l: 1, label: WeylLabel::new(2, 1, 0), part: Part::Symmetric, angle: 0.1 },
        LogicalGate::Entangle { l: 3, u: 1, angle: 0.1 },
    ];
    match compile_circuit(&circuit, 6, 2, &CompileOptions::default()) {
        Err(Error::Gate { index, .. }) => assert_eq!(index, 1),
        other => panic!("{other:?}"),
    }
}

#[test]
fn circuit_text_round_trip() {
    let text = "ROT l=1 a=1 b=0 part=S angle=1/4*pi\n# comment\nENT l=1 u=1 angle=0.5\n";
    let c = parse_circuit(text, 2, None).unwrap();
    assert_eq!(c.len(), 2);
    let again = parse_circuit(&c.iter().map(|g| format!("{g}\n")).collect::<String>(), 2, None).unwrap();
    assert_eq!(c, again);
    assert!(matches!(parse_circuit("ROT l=1\n", 2, None), Err(Error::Parse { line: 1, .. })));
}

#[test]
fn universality_witness_for_small_dimensions() {
    for d in 2..=17u32 {
        let w = universality_witness(d).unwrap();
        assert!(w.margin() > WITNESS_MARGIN, "d={d}");
        let cert = certify_entangler(d).unwrap();
        assert!(cert.off_diagonal < 1e-9);
    }
}

fn arb_gate(d: u32, m: usize) -> impl Strategy<Value = LogicalGate> {
    let rot = (1..=m, 0..d, 0..d, any::<bool>(), -3.0f64..3.0)
        .prop_filter("identity label", |(_, a, b, _, _)| (*a, *b) != (0, 0))
        .prop_map(move |(l, a, b, s, angle)| {
        LogicalGate::BasisRotation {
            l,
            label: WeylLabel::new(d, a as i64, b as i64),
            part: if s { Part::Symmetric } else { Part::Antisymmetric },
            angle,
        }
    });
    let ent = (1..m, 1..d, -3.0f64..3.0).prop_map(|(l, u, angle)| LogicalGate::Entangle { l, u, angle });
    prop_oneof![3 => rot, 1 => ent]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_circuits_compile_soundly(circuit in prop::collection::vec(arb_gate(2, 3), 1..4), seed in any::<u64>()) {
        let prog = compile_circuit(&circuit, 6, 2, &CompileOptions::default()).unwrap();
        let report = verify_program(&prog, &circuit, 2, seed).unwrap();
        prop_assert!(report.min() > 1.0 - 1e-8, "{:?}", report.fidelities);
        // Global primitives preserve mirror symmetry of the encoding.
        prop_assert!(report.min_mirror() > 1.0 - 1e-8);
    }

    #[test]
    fn qutrit_rotations_compile_soundly(gate in arb_gate(3, 2), seed in any::<u64>()) {
        let prog = compile_gate(5, 3, &gate, &CompileOptions::default()).unwrap();
        let report = verify_program(&prog, std::slice::from_ref(&gate), 1, seed).unwrap();
        prop_assert!(report.min() > 1.0 - 1e-8);
    }
}

#[test]
fn zero_state_of_empty_program_is_unchanged() {
    let prog = PulseProgram::empty(2, 4);
    let mut st = DenseState::zero(2, 4, Layout::Single).unwrap();
    let before = st.clone();
    prog.run(&mut st).unwrap();
    assert_eq!(st, before);
    let psi = random_logical(4, 1);
    assert!(encode_mirror(&psi, 2, 4).is_ok());
}
