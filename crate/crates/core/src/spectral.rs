// SPDX-License-Identifier: Apache-2.0

//! Dense symmetric linear algebra on graph Laplacians.
//!
//! The eigensolver is a cyclic Jacobi iteration: slow for large orders but
//! unconditionally stable on symmetric input, and the graphs examined here
//! are small. The Cheeger constant is computed exactly by enumerating vertex
//! subsets, so it is capped at [`CHEEGER_MAX_N`] vertices.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::SimpleGraph;
use crate::model::StubbornnessDraw;

pub const CHEEGER_MAX_N: usize = 20;

const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;
const TIE_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-10;
const SIMPLE_GAP: f64 = 1e-9;
const SLACK: f64 = 1e-9;
const STRICT_MARGIN: f64 = 1e-12;

/// Square matrix with `entries[i][j] == entries[j][i]` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl SymmetricMatrix {
    /// Accepts a row-major `n x n` array; asymmetry is an error.
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::shape(format!(
                "expected {} entries for order {n}, got {}",
                n * n,
                entries.len()
            )));
        }
        for i in 0..n {
            for j in i + 1..n {
                if entries[i * n + j] != entries[j * n + i] {
                    return Err(Error::shape(format!(
                        "matrix is not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Self { n, entries })
    }

    /// Symmetrizes a row-major array as `(M + M') / 2`.
    pub fn symmetrized(n: usize, mut entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::shape("symmetrize: wrong entry count"));
        }
        for i in 0..n {
            for j in i + 1..n {
                let avg = 0.5 * (entries[i * n + j] + entries[j * n + i]);
                entries[i * n + j] = avg;
                entries[j * n + i] = avg;
            }
        }
        Ok(Self { n, entries })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            entries: vec![0.0; n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Adds `diag[i]` to entry `(i, i)`.
    pub fn plus_diagonal(&self, diag: &[f64]) -> Result<Self> {
        if diag.len() != self.n {
            return Err(Error::shape("diagonal length differs from matrix order"));
        }
        let mut m = self.clone();
        for (i, v) in diag.iter().enumerate() {
            m.entries[i * self.n + i] += v;
        }
        Ok(m)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.entries
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        self.entries
            .chunks_exact(self.n.max(1))
            .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_frobenius(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Ascending eigenvalues with unit eigenvectors stored as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Row-major `n x n`; column `k` pairs with `eigenvalues[k]`.
    pub eigenvectors: Vec<f64>,
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        let n = self.n();
        (0..n).map(|i| self.eigenvectors[i * n + k]).collect()
    }
}

/// `D_G - A_G`.
pub fn laplacian(g: &SimpleGraph) -> SymmetricMatrix {
    let n = g.n();
    let mut m = SymmetricMatrix::zeros(n);
    for (i, j) in g.edges() {
        m.entries[i * n + j] = -1.0;
        m.entries[j * n + i] = -1.0;
        m.entries[i * n + i] += 1.0;
        m.entries[j * n + j] += 1.0;
    }
    m
}

/// Full symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Iterates until the off-diagonal Frobenius norm is at most
/// `1e-12 * max(1, |M|_F)`, failing after 100 sweeps. Eigenvalues closer than
/// 1e-10 keep the order of their diagonal positions; each eigenvector is
/// signed so that its largest-magnitude entry is positive.
pub fn eigendecompose(m: &SymmetricMatrix) -> Result<Spectrum> {
    let n = m.n;
    let mut a = m.entries.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let threshold = JACOBI_TOL * m.norm_frobenius().max(1.0);

    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };

    let mut converged = off_norm(&a) <= threshold;
    let mut sweeps = 0;
    while !converged && sweeps < JACOBI_MAX_SWEEPS {
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let tau = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        sweeps += 1;
        converged = off_norm(&a) <= threshold;
    }
    if !converged {
        return Err(Error::Numerical {
            message: format!("Jacobi iteration did not converge in {JACOBI_MAX_SWEEPS} sweeps"),
            residual: off_norm(&a),
        });
    }

    let diag: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| diag[x].total_cmp(&diag[y]));
    // near-equal eigenvalues are reported in assembly order
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && diag[order[end]] - diag[order[end - 1]] <= TIE_TOL {
            end += 1;
        }
        order[start..end].sort_unstable();
        start = end;
    }

    let eigenvalues: Vec<f64> = order.iter().map(|&k| diag[k]).collect();
    let mut eigenvectors = vec![0.0; n * n];
    for (col, &k) in order.iter().enumerate() {
        let mut pivot = 0.0_f64;
        for i in 0..n {
            let x = v[i * n + k];
            if x.abs() > pivot.abs() {
                pivot = x;
            }
        }
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            eigenvectors[i * n + col] = sign * v[i * n + k];
        }
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Second-smallest eigenvalue of a positive semidefinite matrix.
pub fn lambda2(m: &SymmetricMatrix) -> Result<f64> {
    if m.n < 2 {
        return Err(Error::domain("lambda_2 needs a matrix of order at least 2"));
    }
    let spec = eigendecompose(m)?;
    if spec.eigenvalues[0] < -PSD_TOL {
        return Err(Error::domain(format!(
            "matrix is indefinite (smallest eigenvalue {:e})",
            spec.eigenvalues[0]
        )));
    }
    Ok(spec.eigenvalues[1])
}

/// Exact isoperimetric number `min |dS| / |S|` over `0 < |S| <= n/2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheegerResult {
    /// Boundary edge count `|dS|` of the witness.
    pub boundary: usize,
    /// `|S|` of the witness.
    pub size: usize,
    /// Lexicographically smallest minimizing subset, 0-based and sorted.
    #[serde(serialize_with = "crate::io::one_based_list")]
    pub witness: Vec<usize>,
    pub max_degree: usize,
}

impl CheegerResult {
    pub fn value(&self) -> f64 {
        self.boundary as f64 / self.size as f64
    }
}

fn mask_members(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |b| mask & (1 << b) != 0)
}

/// Lexicographic order on the sorted member lists of two subsets.
fn lex_less(a: u32, b: u32) -> bool {
    let mut ia = mask_members(a);
    let mut ib = mask_members(b);
    loop {
        match (ia.next(), ib.next()) {
            (None, None) => return false,
            (None, Some(_)) => return true,
            (Some(_), None) => return false,
            (Some(x), Some(y)) if x != y => return x < y,
            _ => {}
        }
    }
}

pub fn cheeger_constant(g: &SimpleGraph) -> Result<CheegerResult> {
    let n = g.n();
    if n > CHEEGER_MAX_N {
        return Err(Error::SizeLimit(format!(
            "exhaustive Cheeger search is limited to {CHEEGER_MAX_N} vertices (got {n})"
        )));
    }
    if n < 2 {
        return Err(Error::domain("Cheeger constant needs at least 2 vertices"));
    }
    let adj: Vec<u32> = g
        .adjacency()
        .iter()
        .map(|nb| nb.iter().fold(0u32, |m, &w| m | (1 << w)))
        .collect();
    let half = n / 2;
    let mut best: Option<(usize, usize, u32)> = None;
    for mask in 1u32..(1u32 << n) {
        let size = mask.count_ones() as usize;
        if size > half {
            continue;
        }
        let boundary: usize = mask_members(mask)
            .map(|v| (adj[v] & !mask).count_ones() as usize)
            .sum();
        let better = match best {
            None => true,
            Some((bb, bs, bm)) => {
                let lhs = boundary * bs;
                let rhs = bb * size;
                lhs < rhs || (lhs == rhs && lex_less(mask, bm))
            }
        };
        if better {
            best = Some((boundary, size, mask));
        }
    }
    let (boundary, size, mask) = best.expect("n >= 2 admits a singleton subset");
    Ok(CheegerResult {
        boundary,
        size,
        witness: mask_members(mask).collect(),
        max_degree: g.max_degree(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichReport {
    pub cheeger: CheegerResult,
    pub isoperimetric_number: f64,
    pub lambda2: f64,
    /// `2 i(G)`.
    pub upper: f64,
    /// `i(G)^2 / (2 Delta(G))`.
    pub lower: f64,
    pub pass: bool,
}

/// Checks `2 i(G) >= lambda_2(L) >= i(G)^2 / (2 Delta(G))` with slack 1e-9.
pub fn check_cheeger_sandwich(g: &SimpleGraph) -> Result<SandwichReport> {
    if g.n() > CHEEGER_MAX_N {
        return Err(Error::SizeLimit(format!(
            "Cheeger sandwich is limited to {CHEEGER_MAX_N} vertices (got {})",
            g.n()
        )));
    }
    if !g.is_connected() {
        return Err(Error::domain("Cheeger sandwich requires a connected graph"));
    }
    let cheeger = cheeger_constant(g)?;
    let l2 = lambda2(&laplacian(g))?;
    let i = cheeger.value();
    let upper = 2.0 * i;
    let lower = i * i / (2.0 * cheeger.max_degree as f64);
    let pass = upper + SLACK >= l2 && l2 >= lower - SLACK;
    Ok(SandwichReport {
        isoperimetric_number: i,
        cheeger,
        lambda2: l2,
        upper,
        lower,
        pass,
    })
}

/// Off-diagonal entries are negative exactly on the edges of `g` and zero
/// elsewhere.
pub fn is_generalized_laplacian(m: &SymmetricMatrix, g: &SimpleGraph) -> bool {
    if m.n != g.n() {
        return false;
    }
    (0..m.n).all(|i| {
        (0..m.n).all(|j| {
            i == j
                || if g.has_edge(i, j) {
                    m.get(i, j) < 0.0
                } else {
                    m.get(i, j) == 0.0
                }
        })
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerronFrobeniusReport {
    pub lambda1: f64,
    pub lambda2: Option<f64>,
    pub gap: Option<f64>,
    /// Smallest entry of the sign-normalized ground-state eigenvector.
    pub min_entry: f64,
    pub pass: bool,
}

/// Smallest eigenvalue of a generalized Laplacian of a connected graph is
/// simple (gap above 1e-9) with an entrywise positive eigenvector.
pub fn check_perron_frobenius(
    m: &SymmetricMatrix,
    g: &SimpleGraph,
) -> Result<PerronFrobeniusReport> {
    if !is_generalized_laplacian(m, g) {
        return Err(Error::precondition(
            "matrix is not a generalized Laplacian of the graph",
        ));
    }
    if !g.is_connected() {
        return Err(Error::precondition("graph is not connected"));
    }
    let spec = eigendecompose(m)?;
    let lambda1 = spec.eigenvalues[0];
    let lambda2 = spec.eigenvalues.get(1).copied();
    let gap = lambda2.map(|l2| l2 - lambda1);
    let v = spec.vector(0);
    let min_entry = v.iter().copied().fold(f64::INFINITY, f64::min);
    let pass = gap.is_none_or(|g| g > SIMPLE_GAP) && min_entry > STRICT_MARGIN;
    Ok(PerronFrobeniusReport {
        lambda1,
        lambda2,
        gap,
        min_entry,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QqReport {
    pub lambda1: f64,
    /// Angle between the ground-state eigenvector of `Q'Q` and the all-ones vector.
    pub kernel_angle: f64,
    pub lambda2_qq: f64,
    pub lambda2_laplacian: f64,
    /// `((1 - max alpha) / n)^2 * lambda_2(L)^2`.
    pub bound: f64,
    pub pass: bool,
}

/// Forms `Q = (I - diag(alpha)) (I + D)^{-1} L` and checks that `Q'Q` has a
/// simple zero eigenvalue on the all-ones vector with `lambda_2(Q'Q)` above
/// `((1 - max alpha) / n)^2 lambda_2(L)^2`.
pub fn check_lambda2_qq(g: &SimpleGraph, alpha: &StubbornnessDraw) -> Result<QqReport> {
    let n = g.n();
    if alpha.len() != n {
        return Err(Error::shape("stubbornness length differs from graph order"));
    }
    if alpha.as_slice().iter().any(|&a| a >= 1.0) {
        return Err(Error::precondition(
            "I - diag(alpha) is singular: some alpha_i = 1",
        ));
    }
    if !g.is_connected() {
        return Err(Error::precondition("graph is not connected"));
    }
    if n < 2 {
        return Err(Error::domain("lambda_2(Q'Q) needs at least 2 vertices"));
    }
    let lap = laplacian(g);
    let deg = g.degrees();
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        let w = (1.0 - alpha.get(i)) / (1.0 + deg[i] as f64);
        for j in 0..n {
            q[i * n + j] = w * lap.get(i, j);
        }
    }
    let mut qq = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            qq[i * n + j] = (0..n).map(|k| q[k * n + i] * q[k * n + j]).sum();
        }
    }
    let qq = SymmetricMatrix::symmetrized(n, qq)?;
    let spec = eigendecompose(&qq)?;
    let lambda1 = spec.eigenvalues[0];
    let lambda2_qq = spec.eigenvalues[1];
    let v = spec.vector(0);
    let proj = v.iter().sum::<f64>() / (n as f64).sqrt();
    let kernel_angle = (1.0 - proj * proj).max(0.0).sqrt().asin();
    let lambda2_laplacian = lambda2(&lap)?;
    let max_alpha = alpha.as_slice().iter().copied().fold(0.0, f64::max);
    let bound = ((1.0 - max_alpha) / n as f64).powi(2) * lambda2_laplacian * lambda2_laplacian;
    let pass = lambda1.abs() <= SLACK
        && kernel_angle <= 1e-6
        && lambda2_qq > STRICT_MARGIN
        && lambda2_qq >= bound - SLACK;
    Ok(QqReport {
        lambda1,
        kernel_angle,
        lambda2_qq,
        lambda2_laplacian,
        bound,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn laplacian_examples() {
        assert_eq!(
            laplacian(&SimpleGraph::complete(2)).entries(),
            &[1.0, -1.0, -1.0, 1.0]
        );
        assert_eq!(
            laplacian(&SimpleGraph::path(3)).entries(),
            &[1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0]
        );
        assert_eq!(laplacian(&SimpleGraph::empty(2)).entries(), &[0.0; 4]);
    }

    #[test]
    fn eigen_examples() {
        let s = eigendecompose(&laplacian(&SimpleGraph::complete(2))).unwrap();
        assert!(close(&s.eigenvalues, &[0.0, 2.0], 1e-12));
        let s = eigendecompose(&laplacian(&SimpleGraph::path(3))).unwrap();
        assert!(close(&s.eigenvalues, &[0.0, 1.0, 3.0], 1e-12));
        let s = eigendecompose(&laplacian(&SimpleGraph::complete(3))).unwrap();
        assert!(close(&s.eigenvalues, &[0.0, 3.0, 3.0], 1e-12));
    }

    #[test]
    fn eigenvectors_are_orthonormal_and_satisfy_residual() {
        let m = laplacian(&SimpleGraph::cycle(6))
            .plus_diagonal(&[0.3, 0.0, 1.0, 0.0, 0.0, 2.0])
            .unwrap();
        let s = eigendecompose(&m).unwrap();
        let n = m.n();
        for k in 0..n {
            let v = s.vector(k);
            let mv = m.mul_vec(&v);
            let res: f64 = mv
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - s.eigenvalues[k] * b).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(res <= 1e-8 * m.norm_inf().max(1.0));
            for l in 0..n {
                let dot: f64 = v.iter().zip(s.vector(l)).map(|(a, b)| a * b).sum();
                let want = if k == l { 1.0 } else { 0.0 };
                assert!((dot - want).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn degenerate_orders() {
        let s = eigendecompose(&SymmetricMatrix::zeros(0)).unwrap();
        assert!(s.eigenvalues.is_empty());
        let s = eigendecompose(&SymmetricMatrix::new(1, vec![4.5]).unwrap()).unwrap();
        assert_eq!(s.eigenvalues, vec![4.5]);
    }

    #[test]
    fn asymmetric_input_rejected() {
        assert!(SymmetricMatrix::new(2, vec![1.0, 2.0, 3.0, 1.0]).is_err());
    }

    #[test]
    fn lambda2_examples() {
        assert!((lambda2(&laplacian(&SimpleGraph::path(3))).unwrap() - 1.0).abs() < 1e-12);
        assert!((lambda2(&laplacian(&SimpleGraph::complete(2))).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(lambda2(&SymmetricMatrix::zeros(3)).unwrap(), 0.0);
        let indefinite = SymmetricMatrix::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!(matches!(lambda2(&indefinite), Err(Error::Domain(_))));
    }

    #[test]
    fn cheeger_examples() {
        let r = cheeger_constant(&SimpleGraph::complete(2)).unwrap();
        assert_eq!((r.boundary, r.size, r.witness.clone()), (1, 1, vec![0]));
        let r = cheeger_constant(&SimpleGraph::path(3)).unwrap();
        assert_eq!((r.boundary, r.size, r.witness.clone()), (1, 1, vec![0]));
        let r = cheeger_constant(&SimpleGraph::cycle(4)).unwrap();
        assert_eq!((r.boundary, r.size, r.witness.clone()), (2, 2, vec![0, 1]));
        assert_eq!(r.max_degree, 2);
    }

    #[test]
    fn cheeger_limits() {
        assert!(matches!(
            cheeger_constant(&SimpleGraph::path(21)),
            Err(Error::SizeLimit(_))
        ));
        assert!(matches!(
            cheeger_constant(&SimpleGraph::empty(1)),
            Err(Error::Domain(_))
        ));
        let r = cheeger_constant(&SimpleGraph::empty(4)).unwrap();
        assert_eq!((r.boundary, r.witness.clone()), (0, vec![0]));
    }

    #[test]
    fn sandwich_examples() {
        let r = check_cheeger_sandwich(&SimpleGraph::path(3)).unwrap();
        assert!(r.pass);
        assert!((r.lambda2 - 1.0).abs() < 1e-12);
        assert_eq!(r.lower, 0.25);
        let r = check_cheeger_sandwich(&SimpleGraph::complete(2)).unwrap();
        assert!(r.pass && r.upper == 2.0 && r.lower == 0.5);
        let r = check_cheeger_sandwich(&SimpleGraph::cycle(4)).unwrap();
        assert!(r.pass && (r.lambda2 - 2.0).abs() < 1e-12);
        assert!(matches!(
            check_cheeger_sandwich(&SimpleGraph::empty(3)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn perron_frobenius_examples() {
        let p3 = SimpleGraph::path(3);
        let r = check_perron_frobenius(&laplacian(&p3), &p3).unwrap();
        assert!(r.pass);
        assert!((r.min_entry - 1.0 / 3f64.sqrt()).abs() < 1e-12);

        let k3 = SimpleGraph::complete(3);
        let m = laplacian(&k3).plus_diagonal(&[0.1, 0.0, 0.0]).unwrap();
        assert!(check_perron_frobenius(&m, &k3).unwrap().pass);

        let split = SimpleGraph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(matches!(
            check_perron_frobenius(&laplacian(&split), &split),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            check_perron_frobenius(&laplacian(&k3), &p3),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn qq_examples() {
        let r = check_lambda2_qq(
            &SimpleGraph::path(3),
            &StubbornnessDraw::uniform(3, 0.0).unwrap(),
        )
        .unwrap();
        assert!(r.pass && r.lambda1.abs() < 1e-12 && r.lambda2_qq > 0.0);
        let r = check_lambda2_qq(
            &SimpleGraph::complete(2),
            &StubbornnessDraw::uniform(2, 0.0).unwrap(),
        )
        .unwrap();
        assert!(r.pass);
        assert!((r.lambda2_qq - 1.0).abs() < 1e-12);
        let err = check_lambda2_qq(
            &SimpleGraph::path(3),
            &StubbornnessDraw::new(vec![0.0, 1.0, 0.2]).unwrap(),
        );
        assert!(matches!(err, Err(Error::Precondition(_))));
    }
}
