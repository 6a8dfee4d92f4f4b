//! Skeleton-only forms on Trefftz spaces: the Least Squares normal
//! equations and the plane-wave DG / UWVF family.

use super::galerkin::facet_rule;
use super::{BoundaryFn, ComplexSystem, SystemMatrix};
use crate::error::{param, Error, Result};
use crate::mesh::{BoundaryTag, Mesh, Point};
use crate::numerics::oscillatory_degree;
use crate::spaces::{DiscreteSpace, LocalBasis};
use crate::C64;

const OSC_MARGIN: usize = 6;

/// Gauss degree used on an edge of length `len`.
pub fn edge_degree(space: &DiscreteSpace, k: f64, len: f64) -> usize {
    let poly = match &space.basis {
        LocalBasis::Trefftz(e) | LocalBasis::Pum(e) => match e {
            crate::spaces::Enrichment::Ghp(b) => 2 * b.p,
            crate::spaces::Enrichment::PlaneWaves(_) => 0,
        },
        LocalBasis::Polynomial { p } => 2 * p,
        LocalBasis::NodallyExact { .. } => 0,
    };
    let kk = space.wavenumber().unwrap_or(k).max(k);
    oscillatory_degree(poly, 2.0 * kk, len) + OSC_MARGIN
}

fn require_trefftz(space: &DiscreteSpace) -> Result<()> {
    match space.basis {
        LocalBasis::Trefftz(_) => Ok(()),
        _ => Err(Error::Unsupported(format!(
            "skeleton forms need a Trefftz space, got {}",
            space.kind
        ))),
    }
}

/// Values, gradients and normal derivatives of the local functions of one
/// element at one point.
pub(crate) struct Trace {
    pub vals: Vec<C64>,
    pub grads: Vec<[C64; 2]>,
    pub dn: Vec<C64>,
}

impl Trace {
    pub fn new(n: usize) -> Self {
        Trace {
            vals: vec![C64::new(0.0, 0.0); n],
            grads: vec![[C64::new(0.0, 0.0); 2]; n],
            dn: vec![C64::new(0.0, 0.0); n],
        }
    }

    /// Fill at `x` with the normal `n` (pointing out of the first element of the edge).
    pub fn fill(&mut self, space: &DiscreteSpace, e: usize, x: Point, n: Point) {
        space.eval_local(e, x, &mut self.vals, &mut self.grads);
        for (d, g) in self.dn.iter_mut().zip(&self.grads) {
            *d = g[0] * n[0] + g[1] * n[1];
        }
    }
}

/// Quadrature on facet `f` with the space's edge rule.
pub(crate) fn skeleton_rule(space: &DiscreteSpace, k: f64, f: usize) -> Result<Vec<(Point, f64)>> {
    let len = space.mesh.edges[f].length;
    facet_rule(&space.mesh, f, edge_degree(space, k, len))
}

/// Per-edge weights of the Least Squares functional.
#[derive(Debug, Clone, PartialEq)]
pub struct LsWeights {
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
}

impl LsWeights {
    /// `w1 = k`, `w2 = 1` on every edge.
    pub fn standard(mesh: &Mesh, k: f64) -> Self {
        LsWeights {
            w1: vec![k; mesh.edges.len()],
            w2: vec![1.0; mesh.edges.len()],
        }
    }

    pub fn uniform(mesh: &Mesh, w1: f64, w2: f64) -> Self {
        LsWeights {
            w1: vec![w1; mesh.edges.len()],
            w2: vec![w2; mesh.edges.len()],
        }
    }
}

/// Impedance trace `d_n v + i k v` (Robin edges) or `d_n v` (Neumann edges).
fn boundary_operator(tag: BoundaryTag, k: f64, v: C64, dn: C64) -> C64 {
    match tag {
        BoundaryTag::Neumann => dn,
        _ => dn + C64::new(0.0, k) * v,
    }
}

/// Normal equations of the Least Squares functional
/// `J(v) = sum_{E_I} w1^2 |[v]|^2 + w2^2 |[d_n v]|^2 + sum_{E_B} w2^2 |g - T v|^2`.
pub fn assemble_least_squares(
    space: &DiscreteSpace,
    k: f64,
    g: Option<BoundaryFn>,
    weights: &LsWeights,
) -> Result<ComplexSystem> {
    require_trefftz(space)?;
    let mesh = &*space.mesh;
    if weights.w1.len() != mesh.edges.len() || weights.w2.len() != mesh.edges.len() {
        return Err(Error::Dimension {
            expected: mesh.edges.len(),
            got: weights.w1.len().min(weights.w2.len()),
        });
    }
    let m = space.local_dim();
    let mut triplets = Vec::new();
    let mut rhs = vec![C64::new(0.0, 0.0); space.n_dofs];
    let mut tp = Trace::new(m);
    let mut tm = Trace::new(m);
    for (f, edge) in mesh.edges.iter().enumerate() {
        let (e1, e2) = edge.elements;
        let (w1s, w2s) = (weights.w1[f].powi(2), weights.w2[f].powi(2));
        let d1 = space.element_dofs(e1);
        let rule = skeleton_rule(space, k, f)?;
        match e2 {
            Some(e2) => {
                let d2 = space.element_dofs(e2);
                let mut block = vec![C64::new(0.0, 0.0); 4 * m * m];
                for &(x, w) in &rule {
                    tp.fill(space, e1, x, edge.normal);
                    tm.fill(space, e2, x, edge.normal);
                    // jump coefficients of each side: +1 on e1, -1 on e2
                    for si in 0..2 {
                        let (ti, sgn_i) = if si == 0 { (&tp, 1.0) } else { (&tm, -1.0) };
                        for sj in 0..2 {
                            let (tj, sgn_j) = if sj == 0 { (&tp, 1.0) } else { (&tm, -1.0) };
                            let s = sgn_i * sgn_j * w;
                            let off = (si * 2 + sj) * m * m;
                            for i in 0..m {
                                let (vi, di) = (ti.vals[i].conj(), ti.dn[i].conj());
                                for j in 0..m {
                                    block[off + i * m + j] += (tj.vals[j] * vi * w1s + tj.dn[j] * di * w2s) * s;
                                }
                            }
                        }
                    }
                }
                for si in 0..2 {
                    let di = if si == 0 { d1 } else { d2 };
                    for sj in 0..2 {
                        let dj = if sj == 0 { d1 } else { d2 };
                        let off = (si * 2 + sj) * m * m;
                        for i in 0..m {
                            for j in 0..m {
                                triplets.push((di[i], dj[j], block[off + i * m + j]));
                            }
                        }
                    }
                }
            }
            None => {
                let tag = edge.tag.unwrap_or(BoundaryTag::Robin);
                let mut tv = vec![C64::new(0.0, 0.0); m];
                for &(x, w) in &rule {
                    tp.fill(space, e1, x, edge.normal);
                    for i in 0..m {
                        tv[i] = boundary_operator(tag, k, tp.vals[i], tp.dn[i]);
                    }
                    for i in 0..m {
                        for j in 0..m {
                            triplets.push((d1[i], d1[j], tv[j] * tv[i].conj() * w2s * w));
                        }
                    }
                    if let Some(g) = g {
                        let gx = g(x, edge.normal, tag);
                        for i in 0..m {
                            rhs[d1[i]] += gx * tv[i].conj() * w2s * w;
                        }
                    }
                }
            }
        }
    }
    Ok(ComplexSystem {
        a: SystemMatrix::Sparse {
            n: space.n_dofs,
            triplets,
        },
        rhs,
        gram: None,
        method: "least_squares".into(),
        k,
        h: mesh.h,
        p: space.degree(),
    })
}

/// Flux parameter families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FluxPreset {
    /// `alpha = beta = delta = 1/2`.
    Uwvf,
    /// `alpha = a p / (k h log(p+1))`, `beta = k h log(p+1) / p`,
    /// `delta = min(1/2 - eps, k h log(p+1) / p)`.
    Hmp { a: f64, eps: f64 },
    /// `alpha = a / (k h)` with constant `beta` and `delta`.
    HVersion { a: f64, beta: f64, delta: f64 },
}

impl FluxPreset {
    pub const HMP_DEFAULT: FluxPreset = FluxPreset::Hmp { a: 1.0, eps: 0.01 };
    pub const H_VERSION_DEFAULT: FluxPreset = FluxPreset::HVersion {
        a: 1.0,
        beta: 0.5,
        delta: 0.25,
    };
}

/// Per-edge flux parameters; `alpha`, `beta` are read on interior edges and
/// `delta` on boundary edges.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxParams {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub delta: Vec<f64>,
}

impl FluxParams {
    pub fn constant(mesh: &Mesh, alpha: f64, beta: f64, delta: f64) -> Self {
        let n = mesh.edges.len();
        FluxParams {
            alpha: vec![alpha; n],
            beta: vec![beta; n],
            delta: vec![delta; n],
        }
    }

    /// Evaluate a preset with local mesh size `h_f` (largest adjacent
    /// element diameter) and effective degree `p`.
    pub fn from_preset(preset: FluxPreset, mesh: &Mesh, k: f64, p: usize) -> Self {
        match preset {
            FluxPreset::Uwvf => FluxParams::constant(mesh, 0.5, 0.5, 0.5),
            FluxPreset::Hmp { a, eps } => {
                let pf = p.max(1) as f64;
                let lg = (pf + 1.0).ln();
                let mut out = FluxParams::constant(mesh, 0.0, 0.0, 0.0);
                for (f, edge) in mesh.edges.iter().enumerate() {
                    let kh = k * local_h(mesh, edge.elements);
                    out.alpha[f] = a * pf / (kh * lg);
                    out.beta[f] = kh * lg / pf;
                    out.delta[f] = (0.5 - eps).min(kh * lg / pf);
                }
                out
            }
            FluxPreset::HVersion { a, beta, delta } => {
                let mut out = FluxParams::constant(mesh, 0.0, beta, delta);
                for (f, edge) in mesh.edges.iter().enumerate() {
                    out.alpha[f] = a / (k * local_h(mesh, edge.elements));
                }
                out
            }
        }
    }

    pub fn validate(&self, mesh: &Mesh) -> Result<()> {
        let n = mesh.edges.len();
        if self.alpha.len() != n || self.beta.len() != n || self.delta.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: self.alpha.len(),
            });
        }
        for &f in &mesh.interior_edges {
            if !(self.alpha[f] > 0.0) {
                return Err(param(
                    "alpha",
                    format!("must be positive, got {} on edge {f}", self.alpha[f]),
                ));
            }
            if !(self.beta[f] > 0.0) {
                return Err(param(
                    "beta",
                    format!("must be positive, got {} on edge {f}", self.beta[f]),
                ));
            }
        }
        for &f in &mesh.boundary_edges {
            let d = self.delta[f];
            if !(d > 0.0 && d < 1.0) {
                return Err(param("delta", format!("must lie in (0,1), got {d} on edge {f}")));
            }
        }
        Ok(())
    }
}

fn local_h(mesh: &Mesh, elements: (usize, Option<usize>)) -> f64 {
    let a = mesh.element_diameter(elements.0);
    elements.1.map_or(a, |b| a.max(mesh.element_diameter(b)))
}

/// Effective polynomial degree of a Trefftz space (`(dim - 1) / 2`).
pub(crate) fn effective_degree(space: &DiscreteSpace) -> usize {
    ((space.local_dim().max(2) - 1) / 2).max(1)
}

/// Plane-wave DG system `A_N(u, v) = l(v)` in skeleton form, for the
/// condition `d_n u + i k u = g` on the whole boundary.
pub fn assemble_pwdg(space: &DiscreteSpace, k: f64, g: Option<BoundaryFn>, flux: &FluxParams) -> Result<ComplexSystem> {
    require_trefftz(space)?;
    let mesh = &*space.mesh;
    flux.validate(mesh)?;
    if let Some(&f) = mesh
        .boundary_edges
        .iter()
        .find(|&&f| mesh.edges[f].tag != Some(BoundaryTag::Robin))
    {
        return Err(Error::Unsupported(format!(
            "DG form needs Robin conditions; edge {f} is {:?}",
            mesh.edges[f].tag
        )));
    }
    let m = space.local_dim();
    let ik = C64::new(0.0, k);
    let i_over_k = C64::new(0.0, 1.0 / k);
    let mut triplets = Vec::new();
    let mut rhs = vec![C64::new(0.0, 0.0); space.n_dofs];
    let mut tp = Trace::new(m);
    let mut tm = Trace::new(m);
    for (f, edge) in mesh.edges.iter().enumerate() {
        let (e1, e2) = edge.elements;
        let d1 = space.element_dofs(e1);
        let rule = skeleton_rule(space, k, f)?;
        match e2 {
            Some(e2) => {
                let (alpha, beta) = (flux.alpha[f], flux.beta[f]);
                let d2 = space.element_dofs(e2);
                let mut block = vec![C64::new(0.0, 0.0); 4 * m * m];
                for &(x, w) in &rule {
                    tp.fill(space, e1, x, edge.normal);
                    tm.fill(space, e2, x, edge.normal);
                    // trial side sj, test side si; sign s = +1 on e1 and -1 on e2
                    for si in 0..2 {
                        let (ti, s_i) = if si == 0 { (&tp, 1.0) } else { (&tm, -1.0) };
                        for sj in 0..2 {
                            let (tj, s_j) = if sj == 0 { (&tp, 1.0) } else { (&tm, -1.0) };
                            let off = (si * 2 + sj) * m * m;
                            for i in 0..m {
                                let vbar = ti.vals[i].conj();
                                let dvbar = ti.dn[i].conj();
                                for j in 0..m {
                                    let (u, du) = (tj.vals[j], tj.dn[j]);
                                    // <u> [grad v], (i/k) beta [grad u][grad v], -<grad u>.[v], i k alpha [u].[v]
                                    let val = 0.5 * u * s_i * dvbar + i_over_k * beta * s_j * s_i * du * dvbar
                                        - 0.5 * du * s_i * vbar
                                        + ik * alpha * s_j * s_i * u * vbar;
                                    block[off + i * m + j] += val * w;
                                }
                            }
                        }
                    }
                }
                for si in 0..2 {
                    let di = if si == 0 { d1 } else { d2 };
                    for sj in 0..2 {
                        let dj = if sj == 0 { d1 } else { d2 };
                        let off = (si * 2 + sj) * m * m;
                        for i in 0..m {
                            for j in 0..m {
                                triplets.push((di[i], dj[j], block[off + i * m + j]));
                            }
                        }
                    }
                }
            }
            None => {
                let delta = flux.delta[f];
                let mut block = vec![C64::new(0.0, 0.0); m * m];
                for &(x, w) in &rule {
                    tp.fill(space, e1, x, edge.normal);
                    for i in 0..m {
                        let vbar = tp.vals[i].conj();
                        let dvbar = tp.dn[i].conj();
                        for j in 0..m {
                            let (u, du) = (tp.vals[j], tp.dn[j]);
                            let val = (1.0 - delta) * u * dvbar + i_over_k * delta * du * dvbar - delta * du * vbar
                                + ik * (1.0 - delta) * u * vbar;
                            block[i * m + j] += val * w;
                        }
                    }
                    if let Some(g) = g {
                        let gx = g(x, edge.normal, BoundaryTag::Robin);
                        for i in 0..m {
                            let l = -(delta * gx * tp.dn[i].conj()) / ik + (1.0 - delta) * gx * tp.vals[i].conj();
                            rhs[d1[i]] += l * w;
                        }
                    }
                }
                for i in 0..m {
                    for j in 0..m {
                        triplets.push((d1[i], d1[j], block[i * m + j]));
                    }
                }
            }
        }
    }
    Ok(ComplexSystem {
        a: SystemMatrix::Sparse {
            n: space.n_dofs,
            triplets,
        },
        rhs,
        gram: None,
        method: "pwdg".into(),
        k,
        h: mesh.h,
        p: space.degree(),
    })
}
