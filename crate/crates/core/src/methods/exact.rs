use std::fmt;
use std::sync::Arc;

use crate::mesh::Point;
use crate::numerics::{bessel_j, bessel_j_derivative};
use crate::C64;

type Field = dyn Fn(Point) -> (C64, [C64; 2]) + Send + Sync;

/// Closed-form solutions used for error reporting.
#[derive(Clone)]
pub enum ExactSolution {
    /// `exp(i k d . x)` with unit direction `d`.
    PlaneWave {
        k: f64,
        direction: Point,
    },
    /// `J_{2/3}(k r) cos(2 phi / 3)` with `phi in [0, 2 pi)`.
    BesselSingular {
        k: f64,
    },
    /// Solution of `-u'' - k^2 u = 1`, `u(0) = 0`, `u'(1) - i k u(1) = 0`.
    Model1d {
        k: f64,
    },
    Custom {
        name: String,
        field: Arc<Field>,
    },
}

impl fmt::Debug for ExactSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactSolution::PlaneWave { k, direction } => {
                write!(f, "PlaneWave {{ k: {k}, direction: {direction:?} }}")
            }
            ExactSolution::BesselSingular { k } => write!(f, "BesselSingular {{ k: {k} }}"),
            ExactSolution::Model1d { k } => write!(f, "Model1d {{ k: {k} }}"),
            ExactSolution::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// Order of the corner singularity of the L-shaped domain.
pub const SINGULAR_ORDER: f64 = 2.0 / 3.0;

impl ExactSolution {
    /// Plane wave with `k_1 = -k_2 = k / sqrt(2)`.
    pub fn pw2d(k: f64) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ExactSolution::PlaneWave { k, direction: [s, -s] }
    }

    pub fn custom(name: &str, field: impl Fn(Point) -> (C64, [C64; 2]) + Send + Sync + 'static) -> Self {
        ExactSolution::Custom {
            name: name.to_string(),
            field: Arc::new(field),
        }
    }

    pub fn id(&self) -> &str {
        match self {
            ExactSolution::PlaneWave { .. } => "pw2d",
            ExactSolution::BesselSingular { .. } => "bessel_singular",
            ExactSolution::Model1d { .. } => "model1d",
            ExactSolution::Custom { name, .. } => name,
        }
    }

    /// Point where the gradient is unbounded, if any.
    pub fn singular_point(&self) -> Option<Point> {
        match self {
            ExactSolution::BesselSingular { .. } => Some([0.0, 0.0]),
            _ => None,
        }
    }

    /// True when the field solves the homogeneous Helmholtz equation.
    pub fn is_homogeneous(&self) -> bool {
        matches!(
            self,
            ExactSolution::PlaneWave { .. } | ExactSolution::BesselSingular { .. }
        )
    }

    /// Value and gradient at `x`.
    pub fn eval(&self, x: Point) -> (C64, [C64; 2]) {
        match self {
            ExactSolution::PlaneWave { k, direction: d } => {
                let v = C64::from_polar(1.0, k * (d[0] * x[0] + d[1] * x[1]));
                let ik = C64::new(0.0, *k);
                (v, [ik * d[0] * v, ik * d[1] * v])
            }
            ExactSolution::BesselSingular { k } => {
                let nu = SINGULAR_ORDER;
                let r = x[0].hypot(x[1]);
                if r == 0.0 {
                    return (C64::new(0.0, 0.0), [C64::new(0.0, 0.0); 2]);
                }
                let mut phi = x[1].atan2(x[0]);
                if phi < 0.0 {
                    phi += 2.0 * std::f64::consts::PI;
                }
                let j = bessel_j(nu, k * r).expect("argument in range");
                let dj = bessel_j_derivative(nu, k * r).expect("argument in range");
                let (c, s) = ((nu * phi).cos(), (nu * phi).sin());
                let u = j * c;
                let ur = k * dj * c;
                let ut = -nu * j * s / r;
                let (ct, st) = (x[0] / r, x[1] / r);
                (
                    C64::new(u, 0.0),
                    [C64::new(ur * ct - ut * st, 0.0), C64::new(ur * st + ut * ct, 0.0)],
                )
            }
            ExactSolution::Model1d { k } => {
                // u(x) = int_0^1 G(x,y) dy with G = sin(k min) e^{i k max} / k
                let k = *k;
                let t = x[0];
                let ik = C64::new(0.0, k);
                let ekx = C64::from_polar(1.0, k * t);
                let ek = C64::from_polar(1.0, k);
                let u = (ekx * (1.0 - (k * t).cos()) / k + (k * t).sin() * (ek - ekx) / ik) / k;
                let du = C64::new(0.0, 1.0 / k) * (ekx - (k * t).cos() * ek);
                (u, [du, C64::new(0.0, 0.0)])
            }
            ExactSolution::Custom { field, .. } => field(x),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_gradient(u: &ExactSolution, x: Point, dims: usize) {
        let (_, g) = u.eval(x);
        let h = 1e-6;
        for d in 0..dims {
            let (mut xp, mut xm) = (x, x);
            xp[d] += h;
            xm[d] -= h;
            let fd = (u.eval(xp).0 - u.eval(xm).0) / (2.0 * h);
            assert!((fd - g[d]).norm() <= 1e-6 * (1.0 + fd.norm()), "{u:?} at {x:?}");
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        check_gradient(&ExactSolution::pw2d(7.0), [0.3, 0.8], 2);
        for x in [[0.5, 0.5], [-0.3, 0.2], [-0.4, -0.7], [0.9, 0.05]] {
            check_gradient(&ExactSolution::BesselSingular { k: 1.0 }, x, 2);
        }
        check_gradient(&ExactSolution::Model1d { k: 10.0 }, [0.37, 0.0], 1);
    }

    #[test]
    fn model_solution_from_the_ode() {
        // u = (cos kx - 1)/k^2 + i (1 - e^{ik}) sin(kx)/k^2 solves the ODE directly
        for k in [1.0, 10.0, 33.0] {
            let u = ExactSolution::Model1d { k };
            for x in [0.0, 0.25, 0.6, 1.0] {
                let want = C64::new(((k * x).cos() - 1.0) / (k * k), 0.0)
                    + C64::new(0.0, 1.0) * (1.0 - C64::from_polar(1.0, k)) * (k * x).sin() / (k * k);
                assert!((u.eval([x, 0.0]).0 - want).norm() < 1e-14 * (1.0 + want.norm()));
            }
        }
    }

    #[test]
    fn singular_solution_satisfies_neumann_on_reentrant_sides() {
        let u = ExactSolution::BesselSingular { k: 1.0 };
        // side phi = 0 (positive x axis): normal (0,-1) out of the domain
        let (_, g) = u.eval([0.4, 0.0]);
        assert!(g[1].norm() < 1e-14);
        // side phi = 3 pi / 2 (negative y axis): normal (1, 0)
        let (_, g) = u.eval([0.0, -0.4]);
        assert!(g[0].norm() < 1e-12);
    }
}
