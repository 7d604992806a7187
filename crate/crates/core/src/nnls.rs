//! Non-negative least squares (Lawson–Hanson active set method).

use nalgebra::{DMatrix, DVector};

/// Solves `min ‖A x − b‖₂` subject to `x ≥ 0`. Returns the minimiser and
/// the residual norm.
pub(crate) fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, f64) {
    let n = a.ncols();
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0) * b.amax().max(1.0);
    let tol = 1e-13 * scale * n.max(1) as f64;
    let max_outer = 3 * n + 10;

    for _ in 0..max_outer {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..n)
            .filter(|&j| !passive[j])
            .max_by(|&i, &j| w[i].total_cmp(&w[j]).then(j.cmp(&i)));
        match candidate {
            Some(j) if w[j] > tol => passive[j] = true,
            _ => break,
        }
        for _ in 0..max_outer {
            let s = solve_passive(a, b, &passive);
            let infeasible: Vec<usize> = (0..n).filter(|&i| passive[i] && s[i] <= 0.0).collect();
            if infeasible.is_empty() {
                x = s;
                break;
            }
            let alpha = infeasible
                .iter()
                .map(|&i| x[i] / (x[i] - s[i]))
                .fold(f64::INFINITY, f64::min);
            x += (s - &x) * alpha;
            for i in 0..n {
                if passive[i] && x[i] <= tol {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
        }
    }
    let residual = (a * &x - b).norm();
    (x, residual)
}

/// Unconstrained least squares restricted to the passive columns.
fn solve_passive(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let cols: Vec<usize> = (0..passive.len()).filter(|&i| passive[i]).collect();
    let mut out = DVector::zeros(passive.len());
    if cols.is_empty() {
        return out;
    }
    let sub = a.select_columns(&cols);
    let svd = sub.svd(true, true);
    let sol = svd.solve(b, 1e-12).expect("U and V were computed");
    for (k, &i) in cols.iter().enumerate() {
        out[i] = sol[k];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_feasible_solution() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0]);
        let x0 = DVector::from_vec(vec![0.2, 0.0, 0.5]);
        let (x, r) = nnls(&a, &(&a * &x0));
        assert!(r < 1e-12);
        assert!((x - x0).amax() < 1e-12);
    }

    #[test]
    fn clamps_negative_directions() {
        let a = DMatrix::identity(2, 2);
        let b = DVector::from_vec(vec![1.0, -1.0]);
        let (x, r) = nnls(&a, &b);
        assert_eq!(x[1], 0.0);
        assert!((x[0] - 1.0).abs() < 1e-14);
        assert!((r - 1.0).abs() < 1e-14);
    }

    #[test]
    fn underdetermined_convex_combination() {
        // Two columns reach the target; any non-negative combination is fine.
        let a = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.5, 2.0, 0.0, 1.0, 0.5, -1.0]);
        let b = DVector::from_vec(vec![0.5, 0.5]);
        let (x, r) = nnls(&a, &b);
        assert!(r < 1e-12);
        assert!(x.iter().all(|v| *v >= 0.0));
    }
}
