/// Result of [`conjugate_gradient`].
#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iters: usize,
    pub converged: bool,
    /// Final residual 2-norm.
    pub residual: f64,
}

/// Matrix-free conjugate gradients for a symmetric positive semidefinite
/// operator, started from zero. Stops when `‖b - Ax‖₂ ≤ tol · max(1, ‖b‖₂)`.
/// With a consistent right-hand side the iterates stay in the range of `A`.
pub fn conjugate_gradient<F>(apply: F, b: &[f64], tol: f64, max_iter: usize) -> CgOutcome
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let target = tol * norm(b).max(1.0);
    let mut rr = dot(&r, &r);
    let mut iters = 0;
    while rr.sqrt() > target && iters < max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        iters += 1;
        // recompute the true residual now and then against drift
        if iters % 50 == 0 {
            apply(&x, &mut ap);
            for i in 0..n {
                r[i] = b[i] - ap[i];
            }
            rr = dot(&r, &r);
        }
    }
    apply(&x, &mut ap);
    let residual = b.iter().zip(&ap).map(|(b, a)| (b - a).powi(2)).sum::<f64>().sqrt();
    CgOutcome { x, iters, converged: residual <= target, residual }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
