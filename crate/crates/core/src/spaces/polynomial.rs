//! Hierarchical H1 shape functions: vertex hats, integrated-Legendre edge
//! modes and interior bubbles.

use crate::mesh::Point;

/// `P_0..=P_n`, their first and second derivatives at `x`.
pub fn legendre_table(n: usize, x: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut p = vec![0.0; n + 1];
    let mut dp = vec![0.0; n + 1];
    let mut ddp = vec![0.0; n + 1];
    p[0] = 1.0;
    if n >= 1 {
        p[1] = x;
        dp[1] = 1.0;
    }
    for j in 1..n {
        let jf = j as f64;
        p[j + 1] = ((2.0 * jf + 1.0) * x * p[j] - jf * p[j - 1]) / (jf + 1.0);
        dp[j + 1] = dp[j - 1] + (2.0 * jf + 1.0) * p[j];
        ddp[j + 1] = ddp[j - 1] + (2.0 * jf + 1.0) * dp[j];
    }
    (p, dp, ddp)
}

/// Integrated Legendre function `N_j(s) = (P_j - P_{j-2}) / sqrt(2(2j-1))`
/// for `j >= 2`, with its derivative `sqrt((2j-1)/2) P_{j-1}(s)`.
pub fn integrated_legendre(j: usize, s: f64) -> (f64, f64) {
    let (p, _, _) = legendre_table(j, s);
    let jf = j as f64;
    (
        (p[j] - p[j - 2]) / (2.0 * (2.0 * jf - 1.0)).sqrt(),
        ((2.0 * jf - 1.0) / 2.0).sqrt() * p[j - 1],
    )
}

/// Kernel `kappa_j` with `N_j(s) = (1 - s^2)/4 * kappa_j(s)`, and its derivative.
fn edge_kernel(j: usize, s: f64) -> (f64, f64) {
    let (_, dp, ddp) = legendre_table(j - 1, s);
    let jf = j as f64;
    let c = -4.0 * ((2.0 * jf - 1.0) / 2.0).sqrt() / (jf * (jf - 1.0));
    (c * dp[j - 1], c * ddp[j - 1])
}

/// Number of local shape functions of degree `p` on an interval.
pub fn local_dim_1d(p: usize) -> usize {
    p + 1
}

/// Number of local shape functions of degree `p` on a triangle.
pub fn local_dim_2d(p: usize) -> usize {
    (p + 1) * (p + 2) / 2
}

/// Shape functions of degree `p` on the interval `[a, b]` at `x`:
/// two hats (left, right) followed by bubbles `N_j(2t - 1)`, `j = 2..=p`.
pub fn eval_interval(p: usize, a: f64, b: f64, x: f64, vals: &mut [f64], ders: &mut [f64]) {
    let len = b - a;
    let t = (x - a) / len;
    vals[0] = 1.0 - t;
    ders[0] = -1.0 / len;
    vals[1] = t;
    ders[1] = 1.0 / len;
    for j in 2..=p {
        let (n, dn) = integrated_legendre(j, 2.0 * t - 1.0);
        vals[j] = n;
        ders[j] = dn * 2.0 / len;
    }
}

/// Gradients of the barycentric coordinates of a triangle.
pub fn barycentric_gradients(v: [Point; 3]) -> [[f64; 2]; 3] {
    let [a, b, c] = v;
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let g1 = [(c[1] - a[1]) / det, -(c[0] - a[0]) / det];
    let g2 = [-(b[1] - a[1]) / det, (b[0] - a[0]) / det];
    [[-g1[0] - g2[0], -g1[1] - g2[1]], g1, g2]
}

/// Shape functions of degree `p` on a triangle.
///
/// `lambda` are the barycentric coordinates of the evaluation point,
/// `grad_lambda` their gradients and `global` the global node indices of
/// the three vertices, which fix the orientation of the edge modes. Order:
/// three hats, then `p - 1` modes per local edge `(0,1), (1,2), (2,0)`,
/// then interior bubbles.
pub fn eval_triangle(
    p: usize,
    lambda: [f64; 3],
    grad_lambda: &[[f64; 2]; 3],
    global: [usize; 3],
    vals: &mut [f64],
    grads: &mut [[f64; 2]],
) {
    let comb = |d: [f64; 3]| -> [f64; 2] {
        [
            d[0] * grad_lambda[0][0] + d[1] * grad_lambda[1][0] + d[2] * grad_lambda[2][0],
            d[0] * grad_lambda[0][1] + d[1] * grad_lambda[1][1] + d[2] * grad_lambda[2][1],
        ]
    };
    for m in 0..3 {
        vals[m] = lambda[m];
        grads[m] = grad_lambda[m];
    }
    let mut idx = 3;
    for edge in 0..3 {
        let (la, lb) = (edge, (edge + 1) % 3);
        // orient from lower to higher global index
        let (ia, ib) = if global[la] < global[lb] { (la, lb) } else { (lb, la) };
        let s = lambda[ib] - lambda[ia];
        let prod = lambda[ia] * lambda[ib];
        for j in 2..=p {
            let (kap, dkap) = edge_kernel(j, s);
            vals[idx] = prod * kap;
            let mut d = [0.0; 3];
            d[ia] = lambda[ib] * kap - prod * dkap;
            d[ib] = lambda[ia] * kap + prod * dkap;
            grads[idx] = comb(d);
            idx += 1;
        }
    }
    if p >= 3 {
        let bub = lambda[0] * lambda[1] * lambda[2];
        let db = [lambda[1] * lambda[2], lambda[0] * lambda[2], lambda[0] * lambda[1]];
        let s = lambda[1] - lambda[0];
        let t = 2.0 * lambda[2] - 1.0;
        let (ps, dps, _) = legendre_table(p - 3, s);
        let (pt, dpt, _) = legendre_table(p - 3, t);
        for total in 0..=p - 3 {
            for i in 0..=total {
                let j = total - i;
                let f = ps[i] * pt[j];
                vals[idx] = bub * f;
                // d/dlambda of P_i(l1 - l0) P_j(2 l2 - 1)
                let df = [-dps[i] * pt[j], dps[i] * pt[j], 2.0 * ps[i] * dpt[j]];
                let d = [
                    db[0] * f + bub * df[0],
                    db[1] * f + bub * df[1],
                    db[2] * f + bub * df[2],
                ];
                grads[idx] = comb(d);
                idx += 1;
            }
        }
    }
    debug_assert_eq!(idx, local_dim_2d(p));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_derivatives_match_finite_differences() {
        let h = 1e-6;
        for &x in &[-0.9, -0.3, 0.2, 0.77] {
            let (p, dp, ddp) = legendre_table(8, x);
            let (pp, dpp, _) = legendre_table(8, x + h);
            let (pm, dpm, _) = legendre_table(8, x - h);
            for n in 0..=8 {
                assert!((dp[n] - (pp[n] - pm[n]) / (2.0 * h)).abs() < 1e-6);
                assert!((ddp[n] - (dpp[n] - dpm[n]) / (2.0 * h)).abs() < 1e-5);
            }
            assert!((p[2] - 0.5 * (3.0 * x * x - 1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn edge_kernel_reproduces_integrated_legendre() {
        for j in 2..=10 {
            for &s in &[-0.8, -0.1, 0.4, 0.95] {
                let (n, _) = integrated_legendre(j, s);
                let (k, _) = edge_kernel(j, s);
                assert!((n - 0.25 * (1.0 - s * s) * k).abs() < 1e-13, "j={j} s={s}");
            }
        }
    }

    #[test]
    fn bubbles_vanish_at_endpoints() {
        let mut v = vec![0.0; 5];
        let mut d = vec![0.0; 5];
        eval_interval(4, 0.0, 2.0, 0.0, &mut v, &mut d);
        assert_eq!(v[0], 1.0);
        assert!(v[2..].iter().all(|x| x.abs() < 1e-15));
        eval_interval(4, 0.0, 2.0, 2.0, &mut v, &mut d);
        assert_eq!(v[1], 1.0);
        assert!(v[2..].iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn triangle_gradients_match_finite_differences() {
        let verts = [[0.1, 0.0], [1.2, 0.3], [0.4, 0.9]];
        let gl = barycentric_gradients(verts);
        let p = 6;
        let n = local_dim_2d(p);
        let lam = |x: [f64; 2]| -> [f64; 3] {
            let l1 = gl[1][0] * (x[0] - verts[0][0]) + gl[1][1] * (x[1] - verts[0][1]);
            let l2 = gl[2][0] * (x[0] - verts[0][0]) + gl[2][1] * (x[1] - verts[0][1]);
            [1.0 - l1 - l2, l1, l2]
        };
        let x = [0.55, 0.4];
        let mut v = vec![0.0; n];
        let mut g = vec![[0.0; 2]; n];
        eval_triangle(p, lam(x), &gl, [7, 2, 5], &mut v, &mut g);
        let h = 1e-6;
        for dir in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[dir] += h;
            xm[dir] -= h;
            let mut vp = vec![0.0; n];
            let mut vm = vec![0.0; n];
            let mut scratch = vec![[0.0; 2]; n];
            eval_triangle(p, lam(xp), &gl, [7, 2, 5], &mut vp, &mut scratch);
            eval_triangle(p, lam(xm), &gl, [7, 2, 5], &mut vm, &mut scratch);
            for i in 0..n {
                let fd = (vp[i] - vm[i]) / (2.0 * h);
                assert!((fd - g[i][dir]).abs() < 1e-6 * (1.0 + fd.abs()), "i={i}");
            }
        }
    }
}
