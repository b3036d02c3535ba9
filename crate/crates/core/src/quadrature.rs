//! Gauss–Legendre rules.

use alloc::vec::Vec;

#[allow(unused_imports)] // unused when std float methods are linked in
use num_traits::Float;

/// Nodes and weights of the `k`-point Gauss–Legendre rule on `[0, 1]`.
pub fn gauss_legendre_unit(k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(k);
    let mut weights = Vec::with_capacity(k);
    let kf = k as f64;
    for i in 0..k {
        // Newton iteration for the i-th root of P_k from a cosine initial guess
        let mut x = (core::f64::consts::PI * (i as f64 + 0.75) / (kf + 0.5)).cos();
        let mut derivative = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=k {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let pk = if k == 0 { 1.0 } else if k == 1 { x } else { p1 };
            let pk_prev = if k == 1 { 1.0 } else { p0 };
            derivative = kf * (x * pk - pk_prev) / (x * x - 1.0);
            let step = pk / derivative;
            x -= step;
            if step.abs() <= 1e-16 * x.abs().max(1e-300) {
                break;
            }
        }
        nodes.push(0.5 * (1.0 - x));
        weights.push(1.0 / ((1.0 - x * x) * derivative * derivative));
    }
    (nodes, weights)
}
