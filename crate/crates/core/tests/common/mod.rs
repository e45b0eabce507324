// SPDX-License-Identifier: Apache-2.0

//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's numerics.

#![allow(dead_code)]

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Complex, One, ToPrimitive, Zero};
use rand::Rng;

// ---------------------------------------------------------------------------
// Exact characteristic polynomials

/// Polynomial, lowest degree first.
pub type Poly = Vec<BigRational>;

fn trim(mut p: Poly) -> Poly {
    if p.is_empty() {
        p.push(BigRational::zero());
    }
    while p.len() > 1 && p.last().unwrap().is_zero() {
        p.pop();
    }
    p
}

fn deriv(p: &Poly) -> Poly {
    if p.len() <= 1 {
        return vec![BigRational::zero()];
    }
    trim(
        p.iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * BigRational::from_integer(BigInt::from(k)))
            .collect(),
    )
}

fn is_const(p: &Poly) -> bool {
    trim(p.clone()).len() == 1
}

fn monic(p: &Poly) -> Poly {
    let p = trim(p.clone());
    let lead = p.last().unwrap().clone();
    p.into_iter().map(|c| c / &lead).collect()
}

/// Quotient and remainder of `a / b`.
fn divmod(a: &Poly, b: &Poly) -> (Poly, Poly) {
    let b = trim(b.clone());
    let mut r = trim(a.clone());
    let db = b.len() - 1;
    if r.len() < b.len() {
        return (vec![BigRational::zero()], r);
    }
    let mut q = vec![BigRational::zero(); r.len() - db];
    while r.len() >= b.len() && !(r.len() == 1 && r[0].is_zero()) {
        let shift = r.len() - b.len();
        let coef = r.last().unwrap() / b.last().unwrap();
        for (k, bc) in b.iter().enumerate() {
            r[k + shift] = &r[k + shift] - &coef * bc;
        }
        q[shift] = coef;
        r.pop();
        r = trim(r);
        if r.len() < b.len() {
            break;
        }
    }
    (trim(q), r)
}

fn gcd(a: &Poly, b: &Poly) -> Poly {
    let (mut a, mut b) = (trim(a.clone()), trim(b.clone()));
    while !(b.len() == 1 && b[0].is_zero()) {
        let (_, r) = divmod(&a, &b);
        a = b;
        b = r;
    }
    monic(&a)
}

fn sub(a: &Poly, b: &Poly) -> Poly {
    let n = a.len().max(b.len());
    trim(
        (0..n)
            .map(|k| {
                let x = a.get(k).cloned().unwrap_or_else(BigRational::zero);
                let y = b.get(k).cloned().unwrap_or_else(BigRational::zero);
                x - y
            })
            .collect(),
    )
}

/// `det(lambda I - M)` by Faddeev-LeVerrier in exact rational arithmetic.
pub fn charpoly_exact(m: &[Vec<i64>]) -> Poly {
    let n = m.len();
    let a: Vec<Vec<BigRational>> = m
        .iter()
        .map(|r| {
            r.iter()
                .map(|&x| BigRational::from_integer(BigInt::from(x)))
                .collect()
        })
        .collect();
    let mut c = vec![BigRational::zero(); n + 1];
    c[n] = BigRational::one();
    let mut mk = vec![vec![BigRational::zero(); n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = vec![vec![BigRational::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = BigRational::zero();
                for l in 0..n {
                    s += &a[i][l] * &mk[l][j];
                }
                if i == j {
                    s += &c[n - k + 1];
                }
                next[i][j] = s;
            }
        }
        mk = next;
        let mut tr = BigRational::zero();
        for i in 0..n {
            for l in 0..n {
                tr += &a[i][l] * &mk[l][i];
            }
        }
        c[n - k] = -tr / BigRational::from_integer(BigInt::from(k));
    }
    c
}

/// Yun's square-free decomposition: `(factor, multiplicity)` pairs.
pub fn square_free(f: &Poly) -> Vec<(Poly, usize)> {
    let f = monic(f);
    let fp = deriv(&f);
    let a0 = gcd(&f, &fp);
    let mut b = divmod(&f, &a0).0;
    let c = divmod(&fp, &a0).0;
    let mut d = sub(&c, &deriv(&b));
    let mut out = Vec::new();
    let mut i = 1;
    while !is_const(&b) {
        let a = gcd(&b, &d);
        let nb = divmod(&b, &a).0;
        let nc = divmod(&d, &a).0;
        d = sub(&nc, &deriv(&nb));
        b = nb;
        if !is_const(&a) {
            out.push((a, i));
        }
        i += 1;
    }
    out
}

/// Roots of a polynomial with simple roots, by Durand-Kerner iteration.
pub fn durand_kerner(coeffs_low_first: &[f64]) -> Vec<Complex<f64>> {
    let n = coeffs_low_first.len() - 1;
    let lead = coeffs_low_first[n];
    let c: Vec<f64> = coeffs_low_first.iter().map(|x| x / lead).collect();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![Complex::new(-c[0], 0.0)];
    }
    let eval = |z: Complex<f64>| {
        c.iter()
            .rev()
            .fold(Complex::new(0.0, 0.0), |acc, &k| acc * z + k)
    };
    let radius = 1.0 + c[..n].iter().map(|x| x.abs()).fold(0.0, f64::max);
    let seed = Complex::new(0.4, 0.9);
    let mut z: Vec<Complex<f64>> = (0..n)
        .map(|k| seed.powu(k as u32) * radius.min(4.0))
        .collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut den = Complex::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            let step = eval(z[i]) / den;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    z
}

/// Eigenvalues of an integer symmetric matrix from its characteristic
/// polynomial, with multiplicity, ascending.
pub fn integer_matrix_eigenvalues(m: &[Vec<i64>]) -> Vec<f64> {
    let mut out = Vec::new();
    for (factor, mult) in square_free(&charpoly_exact(m)) {
        let coeffs: Vec<f64> = factor.iter().map(|c| c.to_f64().unwrap()).collect();
        for r in durand_kerner(&coeffs) {
            assert!(
                r.im.abs() < 1e-8,
                "symmetric matrix produced complex root {r}"
            );
            out.extend(std::iter::repeat_n(r.re, mult));
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Characteristic polynomial of a real matrix by Faddeev-LeVerrier in f64.
pub fn charpoly_f64(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut mk = vec![vec![0.0; n]; n];
    for k in 1..=n {
        let mut next = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                next[i][j] = (0..n).map(|l| a[i][l] * mk[l][j]).sum::<f64>()
                    + if i == j { c[n - k + 1] } else { 0.0 };
            }
        }
        mk = next;
        let tr: f64 = (0..n)
            .map(|i| (0..n).map(|l| a[i][l] * mk[l][i]).sum::<f64>())
            .sum();
        c[n - k] = -tr / k as f64;
    }
    c
}

/// Ascending real parts of the characteristic roots of a real symmetric
/// matrix whose eigenvalues are assumed distinct.
pub fn real_matrix_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let mut r: Vec<f64> = durand_kerner(&charpoly_f64(a))
        .into_iter()
        .map(|z| z.re)
        .collect();
    r.sort_by(f64::total_cmp);
    r
}

// ---------------------------------------------------------------------------
// Graphs as plain edge lists (0-based)

pub fn laplacian_int(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<i64>> {
    let mut l = vec![vec![0i64; n]; n];
    for &(i, j) in edges {
        l[i][j] -= 1;
        l[j][i] -= 1;
        l[i][i] += 1;
        l[j][j] += 1;
    }
    l
}

pub fn is_connected(n: usize, edges: &[(usize, usize)]) -> bool {
    if n == 0 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &(a, b) in edges {
            let w = if a == v {
                b
            } else if b == v {
                a
            } else {
                continue;
            };
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Random connected graph: a random spanning tree plus each other pair with
/// probability `p`.
pub fn random_connected<R: Rng>(n: usize, p: f64, rng: &mut R) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        edges.push((u, v));
    }
    for i in 0..n {
        for j in i + 1..n {
            if !edges.contains(&(i, j)) && rng.gen_bool(p) {
                edges.push((i, j));
            }
        }
    }
    edges.sort_unstable();
    edges
}

fn combinations(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for v in start..n {
        cur.push(v);
        combinations(n, k, v + 1, cur, out);
        cur.pop();
    }
}

/// Cheeger constant by enumerating subsets size by size. Returns
/// `(boundary, size, lexicographically smallest witness)`.
pub fn cheeger_by_combinations(n: usize, edges: &[(usize, usize)]) -> (usize, usize, Vec<usize>) {
    let mut best: Option<(usize, usize, Vec<usize>)> = None;
    for k in 1..=n / 2 {
        let mut subsets = Vec::new();
        combinations(n, k, 0, &mut Vec::new(), &mut subsets);
        for s in subsets {
            let inside = |v: usize| s.contains(&v);
            let boundary = edges
                .iter()
                .filter(|&&(a, b)| inside(a) != inside(b))
                .count();
            let replace = match &best {
                None => true,
                Some((bb, bs, bw)) => {
                    let (l, r) = (boundary * bs, bb * k);
                    l < r || (l == r && s < *bw)
                }
            };
            if replace {
                best = Some((boundary, k, s));
            }
        }
    }
    best.expect("n >= 2")
}

// ---------------------------------------------------------------------------
// Opinion-model quantities

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Ordered-pair capped energy.
pub fn energy(x: &[Vec<f64>], eps: f64) -> f64 {
    let mut z = 0.0;
    for i in 0..x.len() {
        for j in 0..x.len() {
            if i != j {
                let d2: f64 = x[i].iter().zip(&x[j]).map(|(a, b)| (a - b) * (a - b)).sum();
                z += d2.min(eps * eps);
            }
        }
    }
    z
}

pub fn diameter(x: &[Vec<f64>]) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            m = m.max(dist(&x[i], &x[j]));
        }
    }
    m
}

pub fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(r, s)| r.iter().zip(s).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}
