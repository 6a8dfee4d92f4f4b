use crate::error::{Error, Result};

/// Quadrature rule on a reference element: the interval `[0,1]` for `D = 1`
/// or the triangle with vertices `(0,0), (1,0), (0,1)` for `D = 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<const D: usize> {
    pub points: Vec<[f64; D]>,
    pub weights: Vec<f64>,
    pub exactness_degree: usize,
}

pub type IntervalRule = QuadratureRule<1>;
pub type TriangleRule = QuadratureRule<2>;

impl<const D: usize> QuadratureRule<D> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64; D], f64)> + '_ {
        self.points.iter().zip(self.weights.iter().copied())
    }
}

pub const MAX_GAUSS_POINTS: usize = 64;
pub const MAX_TRIANGLE_DEGREE: usize = 40;

/// Legendre polynomial `P_n` and its derivative at `x` in `[-1,1]`.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        let nf = n as f64;
        0.5 * nf * (nf + 1.0) * if x > 0.0 { 1.0 } else { (-1.0f64).powi(n as i32 + 1) }
    } else {
        n as f64 * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, dp)
}

/// `n`-point Gauss-Legendre rule on `[0,1]`, exact to degree `2n - 1`.
pub fn gauss_interval(n: usize) -> Result<IntervalRule> {
    if n == 0 || n > MAX_GAUSS_POINTS {
        return Err(Error::Unsupported(format!(
            "gauss_interval supports 1..={MAX_GAUSS_POINTS} points, got {n}"
        )));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(QuadratureRule {
        points: nodes.iter().map(|&x| [0.5 * (x + 1.0)]).collect(),
        weights: weights.iter().map(|w| 0.5 * w).collect(),
        exactness_degree: 2 * n - 1,
    })
}

/// Gauss rule on `[0,1]` exact for polynomials of the given degree.
pub fn gauss_interval_for_degree(degree: usize) -> Result<IntervalRule> {
    gauss_interval((degree + 2) / 2)
}

/// Collapsed-coordinate (Duffy) rule on the reference triangle.
///
/// `(u, v) in [0,1]^2` maps to `(u, (1-u) v)` with Jacobian `1-u`, so the
/// vertex `(1,0)` is the collapsed one.
pub fn quad_triangle(degree: usize) -> Result<TriangleRule> {
    if degree == 0 || degree > MAX_TRIANGLE_DEGREE {
        return Err(Error::Unsupported(format!(
            "quad_triangle supports degree 1..={MAX_TRIANGLE_DEGREE}, got {degree}"
        )));
    }
    let outer = gauss_interval((degree + 2).div_ceil(2))?;
    let inner = gauss_interval((degree + 1).div_ceil(2))?;
    let mut points = Vec::with_capacity(outer.len() * inner.len());
    let mut weights = Vec::with_capacity(points.capacity());
    for (u, wu) in outer.iter() {
        let u = u[0];
        for (v, wv) in inner.iter() {
            points.push([u, (1.0 - u) * v[0]]);
            weights.push(wu * wv * (1.0 - u));
        }
    }
    Ok(QuadratureRule {
        points,
        weights,
        exactness_degree: degree,
    })
}

/// Quadrature degree for integrands of polynomial degree `poly_degree`
/// multiplied by oscillations of wavenumber `k` over an element of size `h`.
pub fn oscillatory_degree(poly_degree: usize, k: f64, h: f64) -> usize {
    poly_degree + (1.5 * k * h).ceil() as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_rule() {
        let r = gauss_interval(1).unwrap();
        assert_eq!(r.points, vec![[0.5]]);
        assert!((r.weights[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_point_cubic() {
        let r = gauss_interval(2).unwrap();
        let s: f64 = r.iter().map(|(p, w)| w * p[0].powi(3)).sum();
        assert!((s - 0.25).abs() < 1e-15);
    }

    #[test]
    fn sixteen_point_cosine() {
        let r = gauss_interval(16).unwrap();
        let s: f64 = r.iter().map(|(p, w)| w * (20.0 * p[0]).cos()).sum();
        assert!((s - 20f64.sin() / 20.0).abs() < 1e-12);
    }

    #[test]
    fn interval_monomials() {
        for n in [1, 3, 8, 20, 40, 64] {
            let r = gauss_interval(n).unwrap();
            assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            assert!(r.weights.iter().all(|&w| w > 0.0));
            for d in 0..=r.exactness_degree {
                let s: f64 = r.iter().map(|(p, w)| w * p[0].powi(d as i32)).sum();
                let exact = 1.0 / (d as f64 + 1.0);
                assert!(((s - exact) / exact).abs() < 1e-12, "n={n} d={d}");
            }
        }
    }

    #[test]
    fn triangle_small_degrees() {
        let r = quad_triangle(1).unwrap();
        assert!((r.weights.iter().sum::<f64>() - 0.5).abs() < 1e-15);
        let r = quad_triangle(2).unwrap();
        let s: f64 = r.iter().map(|(p, w)| w * p[0] * p[1]).sum();
        assert!((s - 1.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(gauss_interval(0).is_err());
        assert!(gauss_interval(65).is_err());
        assert!(quad_triangle(0).is_err());
        assert!(quad_triangle(41).is_err());
    }
}
