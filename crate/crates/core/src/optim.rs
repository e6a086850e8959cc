//! Unconstrained smooth minimization (BFGS with Armijo backtracking).

#[derive(Clone, Copy, Debug)]
pub(crate) struct BfgsSettings {
    pub max_iter: usize,
    pub grad_tol: f64,
}

impl Default for BfgsSettings {
    fn default() -> Self {
        Self {
            max_iter: 200,
            grad_tol: 1e-10,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes `f`, where `f(x)` returns the value and gradient. Returns the
/// final point and value; non-finite trial points are treated as +∞.
pub(crate) fn bfgs<F>(f: F, x0: &[f64], settings: BfgsSettings) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut fx, mut g) = f(&x);
    if !fx.is_finite() {
        return (x, fx);
    }
    // inverse Hessian approximation, row-major
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }
    for _ in 0..settings.max_iter {
        let gnorm = dot(&g, &g).sqrt();
        if gnorm <= settings.grad_tol * (1.0 + fx.abs()) {
            break;
        }
        let mut d: Vec<f64> = (0..n).map(|i| -dot(&h[i * n..(i + 1) * n], &g)).collect();
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            // lost descent: restart from steepest descent
            for v in h.iter_mut() {
                *v = 0.0;
            }
            for i in 0..n {
                h[i * n + i] = 1.0;
            }
            d = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let xt: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            let (ft, gt) = f(&xt);
            if ft.is_finite() && ft <= fx + 1e-4 * t * slope {
                accepted = Some((xt, ft, gt));
                break;
            }
            t *= 0.5;
        }
        let Some((xn, fnew, gn)) = accepted else { break };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            let hy: Vec<f64> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], &y)).collect();
            let yhy = dot(&y, &hy);
            let rho = 1.0 / sy;
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
                }
            }
        }
        let improvement = fx - fnew;
        x = xn;
        fx = fnew;
        g = gn;
        if improvement.abs() <= 1e-15 * (1.0 + fx.abs()) {
            break;
        }
    }
    (x, fx)
}
