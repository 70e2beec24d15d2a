//! Explicit-matrix oracle. Builds full 2^N × 2^N operators and multiplies
//! them out; shares no code with the simulator kernels.
#![allow(dead_code)]

use num_complex::Complex64;

pub type Matrix = Vec<Vec<Complex64>>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> Matrix {
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| c(if i == j { 1.0 } else { 0.0 }, 0.0))
                .collect()
        })
        .collect()
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0, 0.0); ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let mut out = vec![vec![c(0.0, 0.0); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == c(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn apply(m: &Matrix, v: &[Complex64]) -> Vec<Complex64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// `|0><0| ⊗ I + |1><1| ⊗ X` on qubits (control, target), qubit 1 leftmost.
pub fn cnot(nq: usize, control: usize, target: usize) -> Matrix {
    let p0 = vec![
        vec![c(1.0, 0.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(0.0, 0.0)],
    ];
    let p1 = vec![
        vec![c(0.0, 0.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(1.0, 0.0)],
    ];
    let x = pauli('X');
    if control == target {
        return identity(1 << nq);
    }
    let mut a = identity(1);
    let mut b = identity(1);
    for q in 1..=nq {
        let (fa, fb) = if q == control {
            (p0.clone(), p1.clone())
        } else if q == target {
            (identity(2), x.clone())
        } else {
            (identity(2), identity(2))
        };
        a = kron(&a, &fa);
        b = kron(&b, &fb);
    }
    a.iter()
        .zip(&b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect())
        .collect()
}

pub fn pauli(which: char) -> Matrix {
    match which {
        'X' => vec![
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0)],
        ],
        'Y' => vec![
            vec![c(0.0, 0.0), c(0.0, -1.0)],
            vec![c(0.0, 1.0), c(0.0, 0.0)],
        ],
        'Z' => vec![
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(-1.0, 0.0)],
        ],
        _ => panic!("unknown pauli"),
    }
}

pub fn single(nq: usize, qubit: usize, u: &Matrix) -> Matrix {
    let id = identity(2);
    let mut m = identity(1);
    for q in 1..=nq {
        m = kron(&m, if q == qubit { u } else { &id });
    }
    m
}

/// Ket of a BB84 symbol 0..=3.
pub fn ket(symbol: u8) -> Vec<Complex64> {
    let h = 0.5f64.sqrt();
    match symbol {
        0 => vec![c(1.0, 0.0), c(0.0, 0.0)],
        1 => vec![c(0.0, 0.0), c(1.0, 0.0)],
        2 => vec![c(h, 0.0), c(h, 0.0)],
        3 => vec![c(h, 0.0), c(-h, 0.0)],
        _ => panic!("bad symbol"),
    }
}

pub fn kron_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x * y))
        .collect()
}

/// Encoding operator: CNOT(1, t1) first, CNOT(n+m, t_{n+m}) last.
pub fn encoding_matrix(targets: &[usize]) -> Matrix {
    let nq = targets.len();
    targets
        .iter()
        .enumerate()
        .fold(identity(1 << nq), |acc, (i, &t)| {
            matmul(&cnot(nq, i + 1, t), &acc)
        })
}

/// Decoding operator: gates applied for descending control index.
pub fn decoding_matrix(targets: &[usize]) -> Matrix {
    let nq = targets.len();
    targets
        .iter()
        .enumerate()
        .rev()
        .fold(identity(1 << nq), |acc, (i, &t)| {
            matmul(&cnot(nq, i + 1, t), &acc)
        })
}

/// `<v|P|v>` with `P = ⊗ |s_i><s_i|` on the leading qubits, identity after.
pub fn check_projection(v: &[Complex64], symbols: &[u8]) -> f64 {
    let mut proj = vec![c(1.0, 0.0)];
    for &s in symbols {
        proj = kron_vec(&proj, &ket(s));
    }
    let rest = v.len() / proj.len();
    (0..rest)
        .map(|r| {
            let amp: Complex64 = proj
                .iter()
                .enumerate()
                .map(|(k, p)| p.conj() * v[k * rest + r])
                .sum();
            amp.norm_sqr()
        })
        .sum()
}
