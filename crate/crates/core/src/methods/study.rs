use crate::analysis::{error_degree, volume_errors};
use crate::assembly::{assemble_gram_1k, element_rule, solve_matrix, SolveStrategy};
use crate::error::{param, Result};
use crate::mesh::{triangulate, Polygon};
use crate::spaces::{trefftz_space, DiscreteSpace, Enrichment, GhpBasis, PlaneWaveBasis};
use crate::C64;

use super::ExactSolution;

/// Constants of the scale resolution condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolutionConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl Default for ResolutionConstants {
    fn default() -> Self {
        ResolutionConstants {
            c1: 1.0,
            c2: 1.0,
            c3: 1.0,
        }
    }
}

/// Outcome of the scale resolution check; a margin is nonnegative exactly
/// when its condition holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleResolution {
    pub holds: bool,
    /// `c1 - k h / p`.
    pub mesh_margin: f64,
    /// `p - c2 log k`.
    pub degree_margin: f64,
    /// `L - c3 p`.
    pub layer_margin: f64,
}

/// `k h / p <= c1`, `p >= c2 log k` and `L >= c3 p`.
pub fn scale_resolution_check(k: f64, h: f64, p: usize, layers: usize, c: ResolutionConstants) -> ScaleResolution {
    let pf = p as f64;
    let mesh_margin = c.c1 - k * h / pf;
    let degree_margin = pf - c.c2 * k.ln();
    let layer_margin = layers as f64 - c.c3 * pf;
    ScaleResolution {
        holds: mesh_margin >= 0.0 && degree_margin >= 0.0 && layer_margin >= 0.0,
        mesh_margin,
        degree_margin,
        layer_margin,
    }
}

/// Family of local Helmholtz solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveFamily {
    PlaneWaves,
    Ghp,
}

impl WaveFamily {
    pub fn basis(self, p: usize, k: f64) -> Result<Enrichment> {
        Ok(match self {
            WaveFamily::PlaneWaves => PlaneWaveBasis::new(p, k)?.into(),
            WaveFamily::Ghp => GhpBasis::new(p, k)?.into(),
        })
    }
}

/// `max |1 - psi|` over a square grid of `samples^2` points in the disk of
/// radius `h` about the expansion center, for the near-unity combination `psi`.
pub fn near_unity_error(family: WaveFamily, p: usize, k: f64, h: f64, samples: usize) -> Result<f64> {
    if !(h > 0.0) {
        return Err(param("h", format!("must be positive, got {h}")));
    }
    let basis = family.basis(p, k)?;
    let c = basis.near_unity()?;
    let n = samples.max(2);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let x = [
                h * (2.0 * i as f64 / (n - 1) as f64 - 1.0),
                h * (2.0 * j as f64 / (n - 1) as f64 - 1.0),
            ];
            if x[0].hypot(x[1]) <= h {
                worst = worst.max((1.0 - basis.combine(&c, x)).norm());
            }
        }
    }
    Ok(worst)
}

/// One best-approximation measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxPoint {
    pub h: f64,
    pub p: usize,
    pub dofs: usize,
    /// `||u - v||_{H^1}` for the `H^1` projection `v`.
    pub err_h1: f64,
    pub err_h1_rel: f64,
    pub h1_semi_rel: f64,
    pub l2_rel: f64,
    pub norm_1k_rel: f64,
    pub residual: f64,
    /// False when the projection is not resolved by the regularized solve.
    pub reliable: bool,
}

/// `H^1` projection of `target` onto `space` by a truncated-SVD solve of the
/// normal equations, and its error by quadrature.
pub fn approx_error(target: &ExactSolution, space: &DiscreteSpace, k: f64, cutoff: f64) -> Result<ApproxPoint> {
    let gram = assemble_gram_1k(space, 1.0)?;
    let degree = error_degree(space, k)?;
    let mesh = &*space.mesh;
    let m = space.local_dim();
    let mut rhs = vec![C64::new(0.0, 0.0); space.n_dofs];
    let mut vals = vec![C64::new(0.0, 0.0); m];
    let mut grads = vec![[C64::new(0.0, 0.0); 2]; m];
    for e in 0..mesh.n_elements() {
        let dofs = space.element_dofs(e);
        for (x, w) in element_rule(mesh, e, degree)? {
            let (u, gu) = target.eval(x);
            space.eval_local(e, x, &mut vals, &mut grads);
            for (a, &d) in dofs.iter().enumerate() {
                let b = vals[a].conj();
                let gb = [grads[a][0].conj(), grads[a][1].conj()];
                rhs[d] += (u * b + gu[0] * gb[0] + gu[1] * gb[1]) * w;
            }
        }
    }
    let solution = solve_matrix(&gram, &rhs, SolveStrategy::TruncatedSvd { cutoff })?;
    let ve = volume_errors(space, &solution.x, &|x| target.eval(x), degree, None)?;
    let err = ve.l2.hypot(ve.h1_semi);
    let norm = ve.exact_l2.hypot(ve.exact_h1_semi);
    let cancellation = 1e-15 * solution.x.iter().map(|c| c.norm()).sum::<f64>() * norm;
    Ok(ApproxPoint {
        h: mesh.h,
        p: space.degree(),
        dofs: space.n_dofs,
        err_h1: err,
        err_h1_rel: if norm > 0.0 { err / norm } else { err },
        h1_semi_rel: ve.h1_semi_rel(),
        l2_rel: ve.l2_rel(),
        norm_1k_rel: ve.norm_1k_rel(k),
        residual: solution.residual,
        reliable: solution.residual <= 1e-6 && cancellation <= err.max(1e-12 * norm),
    })
}

/// Sweep over degrees on a fixed mesh, or over mesh sizes at a fixed degree.
#[derive(Debug, Clone, PartialEq)]
pub enum ApproxMode {
    PSweep { h: f64, ps: Vec<usize> },
    HSweep { p: usize, hs: Vec<f64> },
}

/// Best-approximation errors of `target` in Trefftz spaces over `domain`.
pub fn approx_study(
    target: &ExactSolution,
    family: WaveFamily,
    k: f64,
    domain: &Polygon,
    mode: &ApproxMode,
    cutoff: f64,
) -> Result<Vec<ApproxPoint>> {
    let runs: Vec<(f64, usize)> = match mode {
        ApproxMode::PSweep { h, ps } => ps.iter().map(|&p| (*h, p)).collect(),
        ApproxMode::HSweep { p, hs } => hs.iter().map(|&h| (h, *p)).collect(),
    };
    runs.into_iter()
        .map(|(h, p)| {
            let mesh = triangulate(domain, h)?;
            let space = trefftz_space(mesh, family.basis(p, k)?)?;
            approx_error(target, &space, k, cutoff)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn basis_direction(n: usize, p: usize) -> [f64; 2] {
        let t = 2.0 * PI * n as f64 / p as f64;
        [t.cos(), t.sin()]
    }

    #[test]
    fn resolution_arithmetic() {
        let c = ResolutionConstants::default();
        let r = scale_resolution_check(10.0, 0.1, 2, 2, c);
        assert!((r.mesh_margin - 0.5).abs() < 1e-15);
        assert!(r.degree_margin < 0.0);
        assert!(!r.holds);
        let r = scale_resolution_check(1.0, 0.5, 1, 1, c);
        assert!(r.degree_margin >= 0.0 && r.holds);
    }

    #[test]
    fn resolution_is_monotone_in_p() {
        let c = ResolutionConstants {
            c1: 1.0,
            c2: 1.0,
            c3: 0.0,
        };
        let mut was = false;
        for p in 1..12 {
            let now = scale_resolution_check(20.0, 0.05, p, 0, c).holds;
            assert!(!was || now);
            was = now;
        }
        assert!(was);
    }

    #[test]
    fn aligned_plane_wave_is_reproduced() {
        let k = 6.0;
        let target = ExactSolution::PlaneWave {
            k,
            direction: basis_direction(2, 7),
        };
        let space = trefftz_space(
            triangulate(&Polygon::unit_square(), 0.5).unwrap(),
            PlaneWaveBasis::new(7, k).unwrap(),
        )
        .unwrap();
        let a = approx_error(&target, &space, k, 1e-12).unwrap();
        assert!(a.err_h1_rel < 1e-10, "{a:?}");
    }

    #[test]
    fn near_unity_is_second_order() {
        let e1 = near_unity_error(WaveFamily::PlaneWaves, 4, 5.0, 0.02, 21).unwrap();
        let e2 = near_unity_error(WaveFamily::PlaneWaves, 4, 5.0, 0.01, 21).unwrap();
        assert!(((e1 / e2).log2() - 2.0).abs() < 0.1);
    }
}
