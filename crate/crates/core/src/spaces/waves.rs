//! Local solutions of the homogeneous Helmholtz equation: plane waves and
//! generalized harmonic polynomials (circular waves).

use std::f64::consts::PI;

use crate::error::{param, Result};
use crate::mesh::Point;
use crate::numerics::special::bessel_j_integer_orders;
use crate::C64;

/// `p` plane waves `exp(i k omega_n . x)` with equispaced directions.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWaveBasis {
    pub p: usize,
    pub k: f64,
    pub directions: Vec<Point>,
}

impl PlaneWaveBasis {
    pub fn new(p: usize, k: f64) -> Result<Self> {
        if p == 0 {
            return Err(param("p", "need at least one plane wave"));
        }
        if !(k > 0.0) {
            return Err(param("k", format!("wavenumber must be positive, got {k}")));
        }
        let directions = (0..p)
            .map(|n| {
                let t = 2.0 * PI * n as f64 / p as f64;
                [t.cos(), t.sin()]
            })
            .collect();
        Ok(PlaneWaveBasis { p, k, directions })
    }
}

/// Circular waves `J_|n|(k r) e^{i n phi}`, `n = -p..=p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhpBasis {
    pub p: usize,
    pub k: f64,
}

impl GhpBasis {
    pub fn new(p: usize, k: f64) -> Result<Self> {
        if !(k > 0.0) {
            return Err(param("k", format!("wavenumber must be positive, got {k}")));
        }
        if p > 150 {
            return Err(param("p", format!("order {p} is too large")));
        }
        Ok(GhpBasis { p, k })
    }

    pub fn dim(&self) -> usize {
        2 * self.p + 1
    }
}

/// A set of local Helmholtz solutions used either as PUM enrichment or as
/// a Trefftz element basis.
#[derive(Debug, Clone, PartialEq)]
pub enum Enrichment {
    PlaneWaves(PlaneWaveBasis),
    Ghp(GhpBasis),
}

impl From<PlaneWaveBasis> for Enrichment {
    fn from(b: PlaneWaveBasis) -> Self {
        Enrichment::PlaneWaves(b)
    }
}

impl From<GhpBasis> for Enrichment {
    fn from(b: GhpBasis) -> Self {
        Enrichment::Ghp(b)
    }
}

/// `e^{i n phi}` for `n = 0..=max` from the Cartesian offset.
fn angular_powers(x: Point, max: usize) -> Vec<C64> {
    let r = x[0].hypot(x[1]);
    let unit = if r > 0.0 {
        C64::new(x[0] / r, x[1] / r)
    } else {
        C64::new(1.0, 0.0)
    };
    let mut out = Vec::with_capacity(max + 1);
    let mut z = C64::new(1.0, 0.0);
    for _ in 0..=max {
        out.push(z);
        z *= unit;
    }
    out
}

impl Enrichment {
    pub fn dim(&self) -> usize {
        match self {
            Enrichment::PlaneWaves(b) => b.p,
            Enrichment::Ghp(b) => b.dim(),
        }
    }

    pub fn k(&self) -> f64 {
        match self {
            Enrichment::PlaneWaves(b) => b.k,
            Enrichment::Ghp(b) => b.k,
        }
    }

    pub fn p(&self) -> usize {
        match self {
            Enrichment::PlaneWaves(b) => b.p,
            Enrichment::Ghp(b) => b.p,
        }
    }

    /// Values and gradients at offset `x` from the local center.
    pub fn eval(&self, x: Point, vals: &mut [C64], grads: &mut [[C64; 2]]) {
        match self {
            Enrichment::PlaneWaves(b) => {
                let ik = C64::new(0.0, b.k);
                for (n, w) in b.directions.iter().enumerate() {
                    let v = C64::from_polar(1.0, b.k * (w[0] * x[0] + w[1] * x[1]));
                    vals[n] = v;
                    grads[n] = [ik * w[0] * v, ik * w[1] * v];
                }
            }
            Enrichment::Ghp(b) => {
                let p = b.p;
                let k = b.k;
                let r = x[0].hypot(x[1]);
                let kr = k * r;
                let j = bessel_j_integer_orders(p + 1, kr).expect("argument within range");
                let e = angular_powers(x, p);
                let (cos_t, sin_t) = if r > 0.0 { (x[0] / r, x[1] / r) } else { (1.0, 0.0) };
                for n in -(p as i64)..=(p as i64) {
                    let m = n.unsigned_abs() as usize;
                    let idx = (n + p as i64) as usize;
                    let phase = if n >= 0 { e[m] } else { e[m].conj() };
                    let jm = j[m];
                    vals[idx] = phase * jm;
                    // radial derivative and J_m(kr)/r without dividing by r
                    let djr = if m == 0 {
                        -k * j[1]
                    } else {
                        0.5 * k * (j[m - 1] - j[m + 1])
                    };
                    let j_over_r = if m == 0 {
                        0.0
                    } else {
                        k * (j[m - 1] + j[m + 1]) / (2.0 * m as f64)
                    };
                    let d_r = phase * djr;
                    let d_t = phase * C64::new(0.0, n as f64 * j_over_r);
                    grads[idx] = [d_r * cos_t - d_t * sin_t, d_r * sin_t + d_t * cos_t];
                }
            }
        }
    }

    /// Laplacian of every function at offset `x`, from second derivatives
    /// of the closed forms. Used to verify the Trefftz property.
    pub fn laplacian(&self, x: Point, out: &mut [C64]) {
        match self {
            Enrichment::PlaneWaves(b) => {
                for (n, w) in b.directions.iter().enumerate() {
                    let v = C64::from_polar(1.0, b.k * (w[0] * x[0] + w[1] * x[1]));
                    // (i k w)^2 = -k^2 |w|^2
                    out[n] = -b.k * b.k * (w[0] * w[0] + w[1] * w[1]) * v;
                }
            }
            Enrichment::Ghp(b) => {
                let p = b.p;
                let k = b.k;
                let r = x[0].hypot(x[1]);
                let kr = k * r;
                let j = bessel_j_integer_orders(p + 2, kr).expect("argument within range");
                let e = angular_powers(x, p);
                let jneg = |m: i64| -> f64 {
                    // J_{-m} = (-1)^m J_m
                    let a = m.unsigned_abs() as usize;
                    if m < 0 && a % 2 == 1 {
                        -j[a]
                    } else {
                        j[a]
                    }
                };
                for n in -(p as i64)..=(p as i64) {
                    let m = n.unsigned_abs() as i64;
                    let idx = (n + p as i64) as usize;
                    let phase = if n >= 0 { e[m as usize] } else { e[m as usize].conj() };
                    let d1 = 0.5 * (jneg(m - 1) - jneg(m + 1));
                    let d2 = 0.25 * (jneg(m - 2) - 2.0 * jneg(m) + jneg(m + 2));
                    // u_rr + u_r / r - n^2 u / r^2 in the variable z = k r
                    let radial = if kr > 0.0 {
                        d2 + d1 / kr - (m * m) as f64 * jneg(m) / (kr * kr)
                    } else {
                        // limit at the origin: only m = 0 contributes, J_0'' + J_0'/z -> -1
                        if m == 0 {
                            -1.0
                        } else {
                            0.0
                        }
                    };
                    out[idx] = phase * (k * k * radial);
                }
            }
        }
    }

    /// Coefficients of the near-unity function built in the proof of the
    /// PUM approximation result: `|1 - psi| = O((k |x|)^2)` near the center.
    pub fn near_unity(&self) -> Result<Vec<C64>> {
        let mut c = vec![C64::new(0.0, 0.0); self.dim()];
        match self {
            Enrichment::Ghp(b) => {
                c[b.p] = C64::new(1.0, 0.0);
            }
            Enrichment::PlaneWaves(b) => {
                let p = b.p;
                if p < 2 {
                    return Err(param("p", "near-unity construction needs p >= 2 plane waves"));
                }
                let m = p / 2;
                if p % 2 == 0 {
                    c[0] = C64::new(0.5, 0.0);
                    c[m] = C64::new(0.5, 0.0);
                } else {
                    let cm = (2.0 * PI * m as f64 / p as f64).cos();
                    let scale = 1.0 / (1.0 - 1.0 / cm);
                    c[0] = C64::new(scale, 0.0);
                    c[m] = C64::new(-0.5 / cm * scale, 0.0);
                    c[m + 1] = C64::new(-0.5 / cm * scale, 0.0);
                }
            }
        }
        Ok(c)
    }

    /// Evaluate `sum c_n b_n(x)`.
    pub fn combine(&self, c: &[C64], x: Point) -> C64 {
        let n = self.dim();
        let mut v = vec![C64::new(0.0, 0.0); n];
        let mut g = vec![[C64::new(0.0, 0.0); 2]; n];
        self.eval(x, &mut v, &mut g);
        v.iter().zip(c).map(|(a, b)| a * b).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directions_are_unit() {
        let b = PlaneWaveBasis::new(7, 3.0).unwrap();
        for w in &b.directions {
            assert!((w[0].hypot(w[1]) - 1.0).abs() <= 1e-15);
        }
        assert_eq!(b.directions[0], [1.0, 0.0]);
    }

    #[test]
    fn ghp_dimension() {
        assert_eq!(GhpBasis::new(4, 1.0).unwrap().dim(), 9);
        assert_eq!(Enrichment::from(GhpBasis::new(0, 1.0).unwrap()).dim(), 1);
    }

    fn check_gradients(e: &Enrichment, x: Point) {
        let n = e.dim();
        let mut v = vec![C64::default(); n];
        let mut g = vec![[C64::default(); 2]; n];
        e.eval(x, &mut v, &mut g);
        let h = 1e-6;
        for d in 0..2 {
            let (mut xp, mut xm) = (x, x);
            xp[d] += h;
            xm[d] -= h;
            let mut vp = vec![C64::default(); n];
            let mut vm = vec![C64::default(); n];
            let mut s = vec![[C64::default(); 2]; n];
            e.eval(xp, &mut vp, &mut s);
            e.eval(xm, &mut vm, &mut s);
            for i in 0..n {
                let fd = (vp[i] - vm[i]) / (2.0 * h);
                assert!((fd - g[i][d]).norm() <= 1e-6 * (1.0 + fd.norm()), "i={i} d={d}");
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        check_gradients(&PlaneWaveBasis::new(5, 4.0).unwrap().into(), [0.3, -0.2]);
        check_gradients(&GhpBasis::new(6, 4.0).unwrap().into(), [0.3, -0.2]);
        check_gradients(&GhpBasis::new(3, 2.0).unwrap().into(), [1e-3, 2e-3]);
    }

    #[test]
    fn ghp_gradient_at_center_is_finite() {
        let e: Enrichment = GhpBasis::new(3, 2.0).unwrap().into();
        let mut v = vec![C64::default(); 7];
        let mut g = vec![[C64::default(); 2]; 7];
        e.eval([0.0, 0.0], &mut v, &mut g);
        assert!(g.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite()));
        // J_1(kr) e^{i phi} = (k/2)(x + i y) + ...
        assert!((g[4][0] - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((g[4][1] - C64::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn trefftz_property_from_second_derivatives() {
        let bases: Vec<Enrichment> = vec![
            PlaneWaveBasis::new(9, 7.0).unwrap().into(),
            GhpBasis::new(8, 7.0).unwrap().into(),
        ];
        for e in &bases {
            let k = e.k();
            let n = e.dim();
            for x in [[0.1, 0.2], [-0.35, 0.05], [0.0, 0.0], [0.7, -0.6]] {
                let mut v = vec![C64::default(); n];
                let mut g = vec![[C64::default(); 2]; n];
                let mut lap = vec![C64::default(); n];
                e.eval(x, &mut v, &mut g);
                e.laplacian(x, &mut lap);
                for i in 0..n {
                    assert!((-lap[i] - k * k * v[i]).norm() <= 1e-10 * k * k, "x={x:?} i={i}");
                }
            }
        }
    }

    #[test]
    fn near_unity_matches_closed_forms() {
        let k = 3.0;
        let even: Enrichment = PlaneWaveBasis::new(4, k).unwrap().into();
        let c = even.near_unity().unwrap();
        let x = [0.13, -0.4];
        assert!((even.combine(&c, x) - C64::new((k * x[0]).cos(), 0.0)).norm() < 1e-14);
        let odd: Enrichment = PlaneWaveBasis::new(5, k).unwrap().into();
        let c = odd.near_unity().unwrap();
        assert!((odd.combine(&c, [0.0, 0.0]) - 1.0).norm() < 1e-14);
        let small = 1e-3;
        assert!((odd.combine(&c, [small, 0.5 * small]) - 1.0).norm() < 10.0 * (k * small).powi(2));
        assert!(Enrichment::from(PlaneWaveBasis::new(1, k).unwrap())
            .near_unity()
            .is_err());
    }
}
