//! Discrete function spaces over a mesh.

pub mod polynomial;
mod waves;

use std::fmt;
use std::sync::Arc;

use crate::error::{param, Error, Result};
use crate::mesh::{BoundaryTag, Mesh, Point};
use crate::C64;

pub use waves::{Enrichment, GhpBasis, PlaneWaveBasis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    H1Polynomial,
    Pum,
    TrefftzPw,
    TrefftzGhp,
    NodallyExact1d,
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpaceKind::H1Polynomial => "h1_polynomial",
            SpaceKind::Pum => "pum",
            SpaceKind::TrefftzPw => "trefftz_pw",
            SpaceKind::TrefftzGhp => "trefftz_ghp",
            SpaceKind::NodallyExact1d => "nodally_exact_1d",
        })
    }
}

/// What the local shape functions on every element are.
#[derive(Debug, Clone, PartialEq)]
pub enum LocalBasis {
    Polynomial { p: usize },
    NodallyExact { k: f64 },
    Pum(Enrichment),
    Trefftz(Enrichment),
}

/// Mesh entity a global degree of freedom is attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Owner {
    Node(usize),
    Facet(usize),
    Element,
}

/// Marker for an eliminated local degree of freedom.
pub const ELIMINATED: usize = usize::MAX;

#[derive(Debug, Clone)]
pub struct DiscreteSpace {
    pub kind: SpaceKind,
    pub mesh: Arc<Mesh>,
    pub basis: LocalBasis,
    pub n_dofs: usize,
    pub conforming: bool,
    local_dim: usize,
    /// `local_dim` global indices per element; [`ELIMINATED`] marks
    /// functions removed by a Dirichlet constraint.
    dofs: Vec<usize>,
    owners: Vec<Owner>,
}

impl DiscreteSpace {
    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn element_dofs(&self, e: usize) -> &[usize] {
        &self.dofs[e * self.local_dim..(e + 1) * self.local_dim]
    }

    /// Wavenumber built into the basis, if any.
    pub fn wavenumber(&self) -> Option<f64> {
        match &self.basis {
            LocalBasis::Polynomial { .. } => None,
            LocalBasis::NodallyExact { k } => Some(*k),
            LocalBasis::Pum(e) | LocalBasis::Trefftz(e) => Some(e.k()),
        }
    }

    /// Polynomial degree of the shape functions, or the enrichment size.
    pub fn degree(&self) -> usize {
        match &self.basis {
            LocalBasis::Polynomial { p } => *p,
            LocalBasis::NodallyExact { .. } => 1,
            LocalBasis::Pum(e) | LocalBasis::Trefftz(e) => e.p(),
        }
    }

    /// Remove the functions that do not vanish on Dirichlet-tagged facets.
    pub fn eliminate_dirichlet(mut self) -> Result<Self> {
        if !self.conforming {
            return Err(Error::Unsupported(
                "Dirichlet elimination on a discontinuous space".into(),
            ));
        }
        let mesh = &self.mesh;
        let mut on_dirichlet_node = vec![false; mesh.n_nodes()];
        let mut on_dirichlet_facet = vec![false; mesh.edges.len()];
        for &b in &mesh.boundary_edges {
            if mesh.edges[b].tag == Some(BoundaryTag::Dirichlet) {
                on_dirichlet_facet[b] = true;
                for n in mesh.edges[b].nodes {
                    on_dirichlet_node[n] = true;
                }
            }
        }
        let removed: Vec<bool> = self
            .owners
            .iter()
            .map(|o| match *o {
                Owner::Node(n) => on_dirichlet_node[n],
                Owner::Facet(f) => on_dirichlet_facet[f],
                Owner::Element => false,
            })
            .collect();
        let mut renumber = vec![ELIMINATED; self.n_dofs];
        let mut next = 0;
        let mut owners = Vec::with_capacity(self.n_dofs);
        for (i, &r) in removed.iter().enumerate() {
            if !r {
                renumber[i] = next;
                owners.push(self.owners[i]);
                next += 1;
            }
        }
        for d in &mut self.dofs {
            if *d != ELIMINATED {
                *d = renumber[*d];
            }
        }
        self.n_dofs = next;
        self.owners = owners;
        Ok(self)
    }

    /// Values and gradients of all local functions of element `e` at `x`.
    /// `x` is assumed to lie in the closure of `e`.
    pub fn eval_local(&self, e: usize, x: Point, vals: &mut [C64], grads: &mut [[C64; 2]]) {
        let mesh = &*self.mesh;
        let el = mesh.element(e);
        match &self.basis {
            LocalBasis::Polynomial { p } => {
                let n = self.local_dim;
                let mut v = [0.0; 66];
                if mesh.dim == 1 {
                    let mut d = [0.0; 66];
                    let (a, b) = (mesh.nodes[el[0]][0], mesh.nodes[el[1]][0]);
                    polynomial::eval_interval(*p, a, b, x[0], &mut v[..n], &mut d[..n]);
                    for i in 0..n {
                        vals[i] = C64::new(v[i], 0.0);
                        grads[i] = [C64::new(d[i], 0.0), C64::new(0.0, 0.0)];
                    }
                } else {
                    let mut g = [[0.0; 2]; 66];
                    let verts = [mesh.nodes[el[0]], mesh.nodes[el[1]], mesh.nodes[el[2]]];
                    let gl = polynomial::barycentric_gradients(verts);
                    let lam = barycentric_2d(verts, &gl, x);
                    polynomial::eval_triangle(*p, lam, &gl, [el[0], el[1], el[2]], &mut v[..n], &mut g[..n]);
                    for i in 0..n {
                        vals[i] = C64::new(v[i], 0.0);
                        grads[i] = [C64::new(g[i][0], 0.0), C64::new(g[i][1], 0.0)];
                    }
                }
            }
            LocalBasis::NodallyExact { k } => {
                let (a, b) = (mesh.nodes[el[0]][0], mesh.nodes[el[1]][0]);
                let s = (k * (b - a)).sin();
                vals[0] = C64::new((k * (b - x[0])).sin() / s, 0.0);
                grads[0] = [C64::new(-k * (k * (b - x[0])).cos() / s, 0.0), C64::new(0.0, 0.0)];
                vals[1] = C64::new((k * (x[0] - a)).sin() / s, 0.0);
                grads[1] = [C64::new(k * (k * (x[0] - a)).cos() / s, 0.0), C64::new(0.0, 0.0)];
            }
            LocalBasis::Pum(enr) => {
                let m = enr.dim();
                let verts = [mesh.nodes[el[0]], mesh.nodes[el[1]], mesh.nodes[el[2]]];
                let gl = polynomial::barycentric_gradients(verts);
                let lam = barycentric_2d(verts, &gl, x);
                let mut bv = vec![C64::new(0.0, 0.0); m];
                let mut bg = vec![[C64::new(0.0, 0.0); 2]; m];
                for v in 0..3 {
                    let c = verts[v];
                    enr.eval([x[0] - c[0], x[1] - c[1]], &mut bv, &mut bg);
                    for j in 0..m {
                        let i = v * m + j;
                        vals[i] = bv[j] * lam[v];
                        grads[i] = [
                            bg[j][0] * lam[v] + bv[j] * gl[v][0],
                            bg[j][1] * lam[v] + bv[j] * gl[v][1],
                        ];
                    }
                }
            }
            LocalBasis::Trefftz(enr) => {
                let c = mesh.centroid(e);
                enr.eval([x[0] - c[0], x[1] - c[1]], vals, grads);
            }
        }
    }

    /// Value and gradient of `sum_j coeffs_j b_j` at `x` in element `e`.
    pub fn evaluate(&self, coeffs: &[C64], x: Point, e: usize) -> Result<(C64, [C64; 2])> {
        if coeffs.len() != self.n_dofs {
            return Err(Error::Dimension {
                expected: self.n_dofs,
                got: coeffs.len(),
            });
        }
        if e >= self.mesh.n_elements() {
            return Err(Error::OutsideElement {
                element: e,
                x: x[0],
                y: x[1],
            });
        }
        let tol = 1e-10;
        if !self.mesh.contains_point(e, x, tol) {
            return Err(Error::OutsideElement {
                element: e,
                x: x[0],
                y: x[1],
            });
        }
        Ok(self.evaluate_unchecked(coeffs, x, e))
    }

    pub(crate) fn evaluate_unchecked(&self, coeffs: &[C64], x: Point, e: usize) -> (C64, [C64; 2]) {
        let n = self.local_dim;
        let mut vals = vec![C64::new(0.0, 0.0); n];
        let mut grads = vec![[C64::new(0.0, 0.0); 2]; n];
        self.eval_local(e, x, &mut vals, &mut grads);
        let mut u = C64::new(0.0, 0.0);
        let mut g = [C64::new(0.0, 0.0); 2];
        for (i, &d) in self.element_dofs(e).iter().enumerate() {
            if d == ELIMINATED {
                continue;
            }
            u += coeffs[d] * vals[i];
            g[0] += coeffs[d] * grads[i][0];
            g[1] += coeffs[d] * grads[i][1];
        }
        (u, g)
    }
}

fn barycentric_2d(verts: [Point; 3], gl: &[[f64; 2]; 3], x: Point) -> [f64; 3] {
    let a = verts[0];
    let l1 = gl[1][0] * (x[0] - a[0]) + gl[1][1] * (x[1] - a[1]);
    let l2 = gl[2][0] * (x[0] - a[0]) + gl[2][1] * (x[1] - a[1]);
    [1.0 - l1 - l2, l1, l2]
}

/// Conforming space of degree-`p` piecewise polynomials with a
/// hierarchical basis.
pub fn h1_space(mesh: impl Into<Arc<Mesh>>, p: usize) -> Result<DiscreteSpace> {
    let mesh: Arc<Mesh> = mesh.into();
    let max_p = if mesh.dim == 1 { 4 } else { 10 };
    if p == 0 || p > max_p {
        return Err(Error::Unsupported(format!(
            "degree p = {p} in {}D (supported 1..={max_p})",
            mesh.dim
        )));
    }
    let n_el = mesh.n_elements();
    let mut owners: Vec<Owner> = (0..mesh.n_nodes()).map(Owner::Node).collect();
    let (local_dim, dofs) = if mesh.dim == 1 {
        let local = polynomial::local_dim_1d(p);
        let mut dofs = Vec::with_capacity(n_el * local);
        for e in 0..n_el {
            let el = mesh.element(e);
            dofs.extend_from_slice(&[el[0], el[1]]);
            for _ in 2..=p {
                dofs.push(owners.len());
                owners.push(Owner::Element);
            }
        }
        (local, dofs)
    } else {
        let local = polynomial::local_dim_2d(p);
        let per_edge = p - 1;
        let edge_base = owners.len();
        for f in 0..mesh.edges.len() {
            for _ in 0..per_edge {
                owners.push(Owner::Facet(f));
            }
        }
        let mut dofs = Vec::with_capacity(n_el * local);
        for e in 0..n_el {
            let el = mesh.element(e);
            dofs.extend_from_slice(el);
            for &f in mesh.element_facets(e) {
                for j in 0..per_edge {
                    dofs.push(edge_base + f * per_edge + j);
                }
            }
            let n_int = local - 3 - 3 * per_edge;
            for _ in 0..n_int {
                dofs.push(owners.len());
                owners.push(Owner::Element);
            }
        }
        (local, dofs)
    };
    Ok(DiscreteSpace {
        kind: SpaceKind::H1Polynomial,
        n_dofs: owners.len(),
        mesh,
        basis: LocalBasis::Polynomial { p },
        conforming: true,
        local_dim,
        dofs,
        owners,
    })
}

/// Piecewise solutions of `-u'' - k^2 u = 0` interpolating nodal values.
pub fn nodally_exact_space_1d(mesh: impl Into<Arc<Mesh>>, k: f64) -> Result<DiscreteSpace> {
    let mesh: Arc<Mesh> = mesh.into();
    if mesh.dim != 1 {
        return Err(Error::Unsupported("nodally exact space is one-dimensional".into()));
    }
    if !(k > 0.0) {
        return Err(param("k", format!("wavenumber must be positive, got {k}")));
    }
    for e in 0..mesh.n_elements() {
        let h = mesh.element_measure(e);
        if k * h >= std::f64::consts::PI {
            return Err(param("h", format!("k h = {} >= pi on element {e}", k * h)));
        }
    }
    let dofs = mesh.connectivity().to_vec();
    Ok(DiscreteSpace {
        kind: SpaceKind::NodallyExact1d,
        n_dofs: mesh.n_nodes(),
        owners: (0..mesh.n_nodes()).map(Owner::Node).collect(),
        mesh,
        basis: LocalBasis::NodallyExact { k },
        conforming: true,
        local_dim: 2,
        dofs,
    })
}

/// Hat functions times nodally anchored Helmholtz solutions `b(x - x_i)`.
pub fn pum_space(mesh: impl Into<Arc<Mesh>>, enrichment: impl Into<Enrichment>) -> Result<DiscreteSpace> {
    let mesh: Arc<Mesh> = mesh.into();
    let enrichment = enrichment.into();
    if mesh.dim != 2 {
        return Err(Error::Unsupported("PUM spaces are two-dimensional".into()));
    }
    let m = enrichment.dim();
    if let Enrichment::PlaneWaves(b) = &enrichment {
        if b.p < 2 {
            return Err(param("p", "PUM plane-wave enrichment needs p >= 2".to_string()));
        }
    }
    let mut dofs = Vec::with_capacity(mesh.n_elements() * 3 * m);
    for e in 0..mesh.n_elements() {
        for &n in mesh.element(e) {
            dofs.extend((0..m).map(|j| n * m + j));
        }
    }
    let owners = (0..mesh.n_nodes())
        .flat_map(|n| std::iter::repeat_n(Owner::Node(n), m))
        .collect();
    Ok(DiscreteSpace {
        kind: SpaceKind::Pum,
        n_dofs: mesh.n_nodes() * m,
        mesh,
        basis: LocalBasis::Pum(enrichment),
        conforming: true,
        local_dim: 3 * m,
        dofs,
        owners,
    })
}

/// Discontinuous space of local Helmholtz solutions centered at element centroids.
pub fn trefftz_space(mesh: impl Into<Arc<Mesh>>, local: impl Into<Enrichment>) -> Result<DiscreteSpace> {
    let mesh: Arc<Mesh> = mesh.into();
    let local = local.into();
    if mesh.dim != 2 {
        return Err(Error::Unsupported("Trefftz spaces are two-dimensional".into()));
    }
    let m = local.dim();
    let n = mesh.n_elements() * m;
    let kind = match local {
        Enrichment::PlaneWaves(_) => SpaceKind::TrefftzPw,
        Enrichment::Ghp(_) => SpaceKind::TrefftzGhp,
    };
    Ok(DiscreteSpace {
        kind,
        n_dofs: n,
        mesh,
        basis: LocalBasis::Trefftz(local),
        conforming: false,
        local_dim: m,
        dofs: (0..n).collect(),
        owners: vec![Owner::Element; n],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{triangulate, uniform_interval_mesh, Polygon};
    use crate::numerics::gauss_interval;

    #[test]
    fn one_dimensional_counts() {
        let m = Arc::new(uniform_interval_mesh(4).unwrap());
        assert_eq!(h1_space(m.clone(), 1).unwrap().n_dofs, 5);
        assert_eq!(h1_space(m.clone(), 3).unwrap().n_dofs, 13);
        assert!(h1_space(m.clone(), 5).is_err());
        assert_eq!(
            h1_space(m.clone(), 3).unwrap().eliminate_dirichlet().unwrap().n_dofs,
            12
        );
    }

    #[test]
    fn two_dimensional_quadratic_count() {
        let m = triangulate(&Polygon::unit_square(), 0.5).unwrap();
        let (v, e, t) = (m.n_nodes(), m.edges.len(), m.n_elements());
        // Euler: V - E + F = 1 for a triangulated disk
        assert_eq!(v + t, e + 1);
        assert_eq!(h1_space(m, 2).unwrap().n_dofs, v + e);
    }

    #[test]
    fn counts_for_enriched_spaces() {
        let m = triangulate(&Polygon::unit_square(), 1.0).unwrap();
        assert_eq!(m.n_nodes(), 4);
        assert_eq!(
            pum_space(m.clone(), PlaneWaveBasis::new(3, 2.0).unwrap())
                .unwrap()
                .n_dofs,
            12
        );
        assert_eq!(
            trefftz_space(m, PlaneWaveBasis::new(5, 2.0).unwrap()).unwrap().n_dofs,
            10
        );
        assert!(pum_space(uniform_interval_mesh(2).unwrap(), GhpBasis::new(2, 1.0).unwrap()).is_err());
    }

    #[test]
    fn hat_at_node_is_one() {
        let m = Arc::new(triangulate(&Polygon::unit_square(), 0.5).unwrap());
        let s = h1_space(m.clone(), 3).unwrap();
        let node = 4;
        let e = m.node_patch(node)[0];
        let mut c = vec![C64::new(0.0, 0.0); s.n_dofs];
        c[node] = C64::new(1.0, 0.0);
        let (u, _) = s.evaluate(&c, m.nodes[node], e).unwrap();
        assert!((u - 1.0).norm() < 1e-15);
        let zero = vec![C64::new(0.0, 0.0); s.n_dofs];
        assert_eq!(s.evaluate(&zero, m.centroid(e), e).unwrap().0, C64::new(0.0, 0.0));
        assert!(s.evaluate(&zero, [5.0, 5.0], e).is_err());
    }

    #[test]
    fn nodally_exact_elements() {
        let k = 3.0;
        let m = Arc::new(uniform_interval_mesh(10).unwrap());
        let s = nodally_exact_space_1d(m.clone(), k).unwrap();
        let mut c = vec![C64::new(0.0, 0.0); s.n_dofs];
        c[2] = C64::new(1.0, 0.0);
        assert!((s.evaluate(&c, m.nodes[2], 1).unwrap().0 - 1.0).norm() < 1e-15);
        assert!(s.evaluate(&c, m.nodes[1], 1).unwrap().0.norm() < 1e-15);
        let h = 0.1;
        let mut c0 = vec![C64::new(0.0, 0.0); s.n_dofs];
        c0[0] = C64::new(1.0, 0.0);
        let x = 0.037;
        let want = (k * (h - x)).sin() / (k * h).sin();
        assert!((s.evaluate(&c0, [x, 0.0], 0).unwrap().0.re - want).abs() < 1e-15);
        assert!(nodally_exact_space_1d(uniform_interval_mesh(2).unwrap(), 7.0).is_err());
    }

    #[test]
    fn nodally_exact_residual_by_finite_differences() {
        let k = 10.0;
        let m = Arc::new(uniform_interval_mesh(20).unwrap());
        let s = nodally_exact_space_1d(m.clone(), k).unwrap();
        let mut c = vec![C64::new(0.0, 0.0); s.n_dofs];
        c[5] = C64::new(1.0, 0.0);
        let d = 1e-4;
        for e in [4, 5] {
            let x = m.centroid(e)[0];
            let f = |y: f64| s.evaluate(&c, [y, 0.0], e).unwrap().0.re;
            let second = (f(x + d) - 2.0 * f(x) + f(x - d)) / (d * d);
            assert!((-second - k * k * f(x)).abs() <= 1e-6 * k * k);
        }
    }

    /// Both element traces agree at quadrature points of every interior edge.
    fn assert_conforming(s: &DiscreteSpace, seed: u64) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let c: Vec<C64> = (0..s.n_dofs)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let rule = gauss_interval(6).unwrap();
        let m = &s.mesh;
        for &f in &m.interior_edges {
            let edge = &m.edges[f];
            let (a, b) = (edge.elements.0, edge.elements.1.unwrap());
            for (t, _) in rule.iter() {
                let x = edge.point(m, t[0]);
                let ua = s.evaluate_unchecked(&c, x, a).0;
                let ub = s.evaluate_unchecked(&c, x, b).0;
                assert!((ua - ub).norm() <= 1e-12, "{} edge {f}", s.kind);
            }
        }
    }

    #[test]
    fn conforming_kinds_are_continuous() {
        use crate::mesh::geometric_refine;
        let m = triangulate(&Polygon::l_shape(true), 0.5).unwrap();
        let m = Arc::new(geometric_refine(&m, &[[0.0, 0.0]], 0.3, 2).unwrap());
        for p in 1..=6 {
            assert_conforming(&h1_space(m.clone(), p).unwrap(), p as u64);
        }
        assert_conforming(&pum_space(m.clone(), PlaneWaveBasis::new(4, 3.0).unwrap()).unwrap(), 9);
        assert_conforming(&pum_space(m.clone(), GhpBasis::new(2, 3.0).unwrap()).unwrap(), 10);
        let m1 = Arc::new(uniform_interval_mesh(7).unwrap());
        assert_conforming(&h1_space(m1.clone(), 4).unwrap(), 11);
        assert_conforming(&nodally_exact_space_1d(m1, 2.0).unwrap(), 12);
    }

    #[test]
    fn partition_of_unity() {
        let m = Arc::new(triangulate(&Polygon::unit_square(), 0.25).unwrap());
        let s = h1_space(m.clone(), 1).unwrap();
        let ones = vec![C64::new(1.0, 0.0); s.n_dofs];
        let rule = crate::numerics::quad_triangle(6).unwrap();
        for e in 0..m.n_elements() {
            for (xi, _) in rule.iter() {
                let x = m.map_to_element(e, xi);
                assert!((s.evaluate(&ones, x, e).unwrap().0 - 1.0).norm() <= 1e-13);
            }
        }
    }

    #[test]
    fn global_plane_wave_lies_in_trefftz_space() {
        let k = 4.0;
        let m = Arc::new(triangulate(&Polygon::unit_square(), 0.5).unwrap());
        let s = trefftz_space(m.clone(), PlaneWaveBasis::new(6, k).unwrap()).unwrap();
        let mut c = vec![C64::new(0.0, 0.0); s.n_dofs];
        for e in 0..m.n_elements() {
            let cen = m.centroid(e);
            c[s.element_dofs(e)[0]] = C64::from_polar(1.0, k * cen[0]);
        }
        for e in 0..m.n_elements() {
            let x = m.map_to_element(e, &[0.2, 0.3]);
            let (u, _) = s.evaluate(&c, x, e).unwrap();
            assert!((u - C64::from_polar(1.0, k * x[0])).norm() < 1e-13);
        }
    }

    #[test]
    fn space_gradients_match_finite_differences() {
        let m = Arc::new(triangulate(&Polygon::unit_square(), 0.5).unwrap());
        let spaces = [
            h1_space(m.clone(), 4).unwrap(),
            pum_space(m.clone(), PlaneWaveBasis::new(3, 5.0).unwrap()).unwrap(),
            trefftz_space(m.clone(), GhpBasis::new(3, 5.0).unwrap()).unwrap(),
            trefftz_space(m.clone(), PlaneWaveBasis::new(3, 5.0).unwrap()).unwrap(),
        ];
        for s in &spaces {
            let c: Vec<C64> = (0..s.n_dofs)
                .map(|i| C64::new((i as f64).sin(), (i as f64 * 0.7).cos()))
                .collect();
            let e = 3;
            let x = m.map_to_element(e, &[0.3, 0.3]);
            let (_, g) = s.evaluate(&c, x, e).unwrap();
            let step = 1e-6 * m.h;
            for d in 0..2 {
                let (mut xp, mut xm) = (x, x);
                xp[d] += step;
                xm[d] -= step;
                let fd = (s.evaluate_unchecked(&c, xp, e).0 - s.evaluate_unchecked(&c, xm, e).0) / (2.0 * step);
                assert!((fd - g[d]).norm() <= 1e-6 * (1.0 + fd.norm()), "{}", s.kind);
            }
        }
    }
}
