// SPDX-License-Identifier: Apache-2.0

//! Textbook forms of the three classical models, written directly from their
//! usual definitions and sharing no code with the engine. The verifier uses
//! them to cross-check the preset reductions.

type Rows = Vec<Vec<f64>>;

fn within(a: &[f64], b: &[f64], epsilon: f64) -> bool {
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    if a.len() == 1 {
        (a[0] - b[0]).abs() <= epsilon
    } else {
        s.sqrt() <= epsilon
    }
}

fn mean_of_confidants(x: &Rows, i: usize, epsilon: f64) -> Vec<f64> {
    let mut acc = vec![0.0; x[i].len()];
    let mut k = 0usize;
    for xj in x {
        if within(&x[i], xj, epsilon) {
            k += 1;
            for (a, v) in acc.iter_mut().zip(xj) {
                *a += v;
            }
        }
    }
    acc.iter().map(|a| a / k as f64).collect()
}

/// Every agent moves to the mean of all opinions within `epsilon` of its own.
pub fn sync_hk_step(x: &Rows, epsilon: f64) -> Rows {
    (0..x.len())
        .map(|i| mean_of_confidants(x, i, epsilon))
        .collect()
}

/// Only `agent` moves; the rest keep their opinions.
pub fn async_hk_step(x: &Rows, epsilon: f64, agent: usize) -> Rows {
    let mut out = x.clone();
    out[agent] = mean_of_confidants(x, agent, epsilon);
    out
}

/// Agents `i` and `j` each move a fraction `mu` toward the other when close enough.
pub fn deffuant_step(x: &Rows, epsilon: f64, mu: f64, i: usize, j: usize) -> Rows {
    let mut out = x.clone();
    if within(&x[i], &x[j], epsilon) {
        for k in 0..x[i].len() {
            let gap = x[j][k] - x[i][k];
            out[i][k] = x[i][k] + mu * gap;
            out[j][k] = x[j][k] - mu * gap;
        }
    }
    out
}

/// Largest coordinate-wise absolute difference.
pub fn max_abs_diff(a: &Rows, b: &Rows) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_cases() {
        let x = vec![vec![0.0], vec![0.6], vec![1.2]];
        let y = sync_hk_step(&x, 0.7);
        assert!(max_abs_diff(&y, &vec![vec![0.3], vec![0.6], vec![0.9]]) < 1e-15);
        let z = async_hk_step(&x, 0.7, 2);
        assert_eq!(z[..2], x[..2]);
        let w = deffuant_step(&vec![vec![0.0], vec![0.5]], 1.0, 0.25, 0, 1);
        assert_eq!(w, vec![vec![0.125], vec![0.375]]);
        assert_eq!(deffuant_step(&x, 0.5, 0.25, 0, 2), x);
    }
}
