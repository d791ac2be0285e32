use std::collections::BTreeMap;

use num_complex::Complex64;
use proptest::prelude::*;
use zxrl_core::circuit::{from_circuit, Gate};
use zxrl_core::semantics::{
    equivalent_up_to_scalar, semantics, spider_tensor, CompareError, ContractionOrder, Matrix, Oracle, SpiderColor,
};
use zxrl_core::{Angle, Diagram, NodeKind};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn dense(rows: Vec<Vec<Complex64>>) -> Matrix {
    Matrix::from_rows(&rows)
}

fn hadamard() -> Matrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Matrix::from_real(&[&[h, h], &[h, -h]])
}

fn z_rot(theta: f64) -> Matrix {
    dense(vec![vec![c(1.0), c(0.0)], vec![c(0.0), Complex64::from_polar(1.0, theta)]])
}

fn x_rot(theta: f64) -> Matrix {
    hadamard().matmul(&z_rot(theta)).matmul(&hadamard())
}

/// Operator on `n` qubits from its action on basis states, qubit 0 being the
/// most significant bit.
fn permutation(n: usize, f: impl Fn(Vec<bool>) -> Vec<bool>) -> Matrix {
    let dim = 1 << n;
    let mut m = Matrix::zeros(dim, dim);
    for col in 0..dim {
        let bits: Vec<bool> = (0..n).map(|q| (col >> (n - 1 - q)) & 1 == 1).collect();
        let out = f(bits);
        let row = out.iter().fold(0, |acc, &b| (acc << 1) | b as usize);
        m.data[row * dim + col] = c(1.0);
    }
    m
}

fn on_qubit(n: usize, q: usize, g: &Matrix) -> Matrix {
    let id = Matrix::identity(2);
    (0..n).fold(Matrix::identity(1), |acc, i| acc.kron(if i == q { g } else { &id }))
}

fn gate_matrix(n: usize, g: &Gate) -> Matrix {
    let rad = |a: &Angle| a.concrete_radians().unwrap();
    match g {
        Gate::ZRot { qubit, angle } => on_qubit(n, *qubit, &z_rot(rad(angle))),
        Gate::XRot { qubit, angle } => on_qubit(n, *qubit, &x_rot(rad(angle))),
        Gate::H(q) => on_qubit(n, *q, &hadamard()),
        Gate::Cnot { control, target } => permutation(n, |mut b| {
            if b[*control] {
                b[*target] = !b[*target];
            }
            b
        }),
        Gate::Swap(a, b) => permutation(n, |mut bits| {
            bits.swap(*a, *b);
            bits
        }),
    }
}

fn circuit_matrix(n: usize, gates: &[Gate]) -> Matrix {
    gates.iter().fold(Matrix::identity(1 << n), |acc, g| gate_matrix(n, g).matmul(&acc))
}

fn no_symbols() -> BTreeMap<zxrl_core::Symbol, f64> {
    BTreeMap::new()
}

#[test]
fn spider_tensor_examples() {
    assert_eq!(spider_tensor(SpiderColor::Z, 0.0, 1, 1), Matrix::identity(2));
    // |+> + |-> is proportional to |0>.
    let plus = Matrix::from_real(&[&[1.0], &[1.0]]).scaled(c(std::f64::consts::FRAC_1_SQRT_2));
    let minus = Matrix::from_real(&[&[1.0], &[-1.0]]).scaled(c(std::f64::consts::FRAC_1_SQRT_2));
    let expected = Matrix { rows: 2, cols: 1, data: vec![plus.data[0] + minus.data[0], plus.data[1] + minus.data[1]] };
    let state = spider_tensor(SpiderColor::X, 0.0, 0, 1);
    assert!(equivalent_up_to_scalar(&state, &expected, 1e-12).unwrap());
    let pi_state = spider_tensor(SpiderColor::X, std::f64::consts::PI, 0, 1);
    assert!(equivalent_up_to_scalar(&pi_state, &Matrix::from_real(&[&[0.0], &[1.0]]), 1e-12).unwrap());
    let m = spider_tensor(SpiderColor::Z, 1.1, 1, 1);
    assert!(equivalent_up_to_scalar(&m, &z_rot(1.1), 1e-12).unwrap());
}

#[test]
fn scalar_comparison_examples() {
    let i2 = Matrix::identity(2);
    assert!(equivalent_up_to_scalar(&i2, &i2.scaled(Complex64::new(0.0, 3.0)), 1e-9).unwrap());
    let x = Matrix::from_real(&[&[0.0, 1.0], &[1.0, 0.0]]);
    assert!(!equivalent_up_to_scalar(&i2, &x, 1e-9).unwrap());
    assert!(matches!(equivalent_up_to_scalar(&i2, &Matrix::identity(4), 1e-9), Err(CompareError::DimensionMismatch(..))));
    assert_eq!(equivalent_up_to_scalar(&Matrix::zeros(2, 2), &Matrix::zeros(2, 2), 1e-9), Err(CompareError::BothZero));
}

#[test]
fn cnot_matches_diagram_and_circuit() {
    let cnot = Matrix::from_real(&[&[1., 0., 0., 0.], &[0., 1., 0., 0.], &[0., 0., 0., 1.], &[0., 0., 1., 0.]]);
    let d = from_circuit(&[Gate::Cnot { control: 0, target: 1 }], 2).unwrap();
    let m = semantics(&d, &no_symbols()).unwrap();
    assert!(equivalent_up_to_scalar(&m, &cnot, 1e-9).unwrap());
    assert!(equivalent_up_to_scalar(&circuit_matrix(2, &[Gate::Cnot { control: 0, target: 1 }]), &m, 1e-9).unwrap());
}

#[test]
fn mixed_circuit_matches_product() {
    let gates = [
        Gate::ZRot { qubit: 0, angle: Angle::HALF_PI },
        Gate::Cnot { control: 0, target: 1 },
        Gate::XRot { qubit: 1, angle: Angle::PI },
    ];
    let d = from_circuit(&gates, 2).unwrap();
    let m = semantics(&d, &no_symbols()).unwrap();
    assert!(equivalent_up_to_scalar(&m, &circuit_matrix(2, &gates), 1e-9).unwrap());
}

#[test]
fn hadamard_chain_is_hadamard() {
    let gates = [
        Gate::ZRot { qubit: 0, angle: Angle::HALF_PI },
        Gate::XRot { qubit: 0, angle: Angle::HALF_PI },
        Gate::ZRot { qubit: 0, angle: Angle::HALF_PI },
    ];
    let m = semantics(&from_circuit(&gates, 1).unwrap(), &no_symbols()).unwrap();
    assert!(equivalent_up_to_scalar(&m, &hadamard(), 1e-9).unwrap());
}

#[test]
fn symbolic_phase_is_substituted() {
    let mut d = Diagram::new();
    let i = d.add_input();
    let s = d.add_spider(NodeKind::Z, Angle::symbol(zxrl_core::Symbol(0)));
    let o = d.add_output();
    d.add_edge(i, s);
    d.add_edge(s, o);
    let m = semantics(&d, &BTreeMap::from([(zxrl_core::Symbol(0), 0.3)])).unwrap();
    assert!(equivalent_up_to_scalar(&m, &z_rot(0.3), 1e-12).unwrap());
}

fn gate_strategy(n: usize) -> impl Strategy<Value = Gate> {
    let q = 0..n;
    let angle = (0i64..4).prop_map(Angle::quarter);
    prop_oneof![
        (q.clone(), angle.clone()).prop_map(|(qubit, angle)| Gate::ZRot { qubit, angle }),
        (q.clone(), angle).prop_map(|(qubit, angle)| Gate::XRot { qubit, angle }),
        q.clone().prop_map(Gate::H),
        (q.clone(), q.clone()).prop_filter_map("distinct", |(a, b)| (a != b).then_some(Gate::Cnot { control: a, target: b })),
        (q.clone(), q).prop_filter_map("distinct", |(a, b)| (a != b).then_some(Gate::Swap(a, b))),
    ]
}

fn circuit_strategy() -> impl Strategy<Value = (usize, Vec<Gate>)> {
    (2usize..=3).prop_flat_map(|n| (Just(n), proptest::collection::vec(gate_strategy(n), 0..=6)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn circuits_match_gate_products((n, gates) in circuit_strategy()) {
        let d = from_circuit(&gates, n).unwrap();
        let m = semantics(&d, &no_symbols()).unwrap();
        prop_assert!(equivalent_up_to_scalar(&m, &circuit_matrix(n, &gates), 1e-9).unwrap());
    }

    #[test]
    fn contraction_order_does_not_matter((n, gates) in circuit_strategy()) {
        let d = from_circuit(&gates, n).unwrap();
        let greedy = Oracle::default().evaluate(&d, &no_symbols()).unwrap().matrix;
        let seq = Oracle { order: ContractionOrder::Sequential, ..Oracle::default() }.evaluate(&d, &no_symbols()).unwrap().matrix;
        for (a, b) in greedy.data.iter().zip(&seq.data) {
            prop_assert!((a - b).norm() < 1e-10);
        }
    }
}
