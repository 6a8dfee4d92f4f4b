use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use helmholtz_lab::analysis::{dg_norm, dg_plus_norm, fit_rate};
use helmholtz_lab::assembly::{assemble_galerkin, FluxPreset, GalerkinOptions};
use helmholtz_lab::experiment::ExperimentConfig;
use helmholtz_lab::mesh::{geometric_refine, read_mesh, triangulate, write_mesh, Polygon};
use helmholtz_lab::methods::flux_for;
use helmholtz_lab::numerics::{bessel_j, gauss_interval, quad_triangle};
use helmholtz_lab::spaces::{h1_space, trefftz_space, PlaneWaveBasis};
use helmholtz_lab::C64;

/// `J_n(x)` by its power series in exact rational arithmetic.
fn bessel_series(n: usize, x: f64) -> f64 {
    let half_x = BigRational::from_float(x).unwrap() / BigRational::from_integer(BigInt::from(2));
    let x2 = &half_x * &half_x;
    let mut term = BigRational::one();
    for i in 1..=n {
        term = term * &half_x / BigRational::from_integer(BigInt::from(i));
    }
    let cutoff = BigRational::new(BigInt::one(), BigInt::from(10).pow(40));
    let mut sum = BigRational::zero();
    let mut m = 0usize;
    loop {
        sum += &term;
        m += 1;
        term = -term * &x2 / BigRational::from_integer(BigInt::from(m * (m + n)));
        let mag = if term < BigRational::zero() {
            -&term
        } else {
            term.clone()
        };
        if mag < cutoff && m as f64 > x {
            return sum.to_f64().unwrap();
        }
    }
}

fn random_vector(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bessel_matches_rational_series(n in 0usize..=20, x in 0.0f64..50.0) {
        let got = bessel_j(n as f64, x).unwrap();
        prop_assert!((got - bessel_series(n, x)).abs() <= 1e-12, "J_{}({}) = {}", n, x, got);
    }

    #[test]
    fn bessel_three_term_recurrence(n in 1usize..20, x in 0.5f64..50.0) {
        let (a, b, c) = (bessel_j(n as f64 - 1.0, x).unwrap(), bessel_j(n as f64, x).unwrap(), bessel_j(n as f64 + 1.0, x).unwrap());
        prop_assert!((a + c - 2.0 * n as f64 / x * b).abs() <= 1e-11 * (1.0 + 2.0 * n as f64 / x));
    }

    #[test]
    fn gauss_rules_integrate_random_polynomials(n in 1usize..=20, coeffs in prop::collection::vec(-1.0f64..1.0, 40)) {
        let r = gauss_interval(n).unwrap();
        let degree = 2 * n - 1;
        let exact: f64 = (0..=degree).map(|d| coeffs[d] / (d as f64 + 1.0)).sum();
        let got: f64 = r.iter().map(|(p, w)| w * (0..=degree).map(|d| coeffs[d] * p[0].powi(d as i32)).sum::<f64>()).sum();
        prop_assert!((got - exact).abs() <= 1e-13);
    }

    #[test]
    fn triangle_rules_integrate_monomials(degree in 1usize..=20, a in 0usize..=20, b in 0usize..=20) {
        prop_assume!(a + b <= degree);
        let fact = |n: usize| (1..=n).map(|i| i as f64).product::<f64>();
        let r = quad_triangle(degree).unwrap();
        let got: f64 = r.iter().map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32)).sum();
        prop_assert!((got - fact(a) * fact(b) / fact(a + b + 2)).abs() <= 1e-14);
    }

    #[test]
    fn graded_meshes_keep_area(h in 0.2f64..0.6, sigma in 0.1f64..0.5, layers in 0usize..6, lshape in any::<bool>()) {
        let domain = if lshape { Polygon::l_shape(true) } else { Polygon::unit_square() };
        let mesh = triangulate(&domain, h).unwrap();
        let graded = geometric_refine(&mesh, &[[0.0, 0.0]], sigma, layers).unwrap();
        prop_assert!(graded.validate().is_ok());
        prop_assert!((graded.total_measure() - domain.area()).abs() <= 1e-12);
        prop_assert!(graded.n_elements() >= mesh.n_elements());
        let back = read_mesh(&write_mesh(&graded)).unwrap();
        prop_assert_eq!(back.n_elements(), graded.n_elements());
    }

    #[test]
    fn dg_norms_are_ordered_and_homogeneous(seed in any::<u64>(), scale in 0.1f64..10.0, p in 3usize..9, uwvf in any::<bool>()) {
        let k = 6.0;
        let space = trefftz_space(triangulate(&Polygon::unit_square(), 0.5).unwrap(), PlaneWaveBasis::new(p, k).unwrap()).unwrap();
        let preset = if uwvf { FluxPreset::Uwvf } else { FluxPreset::H_VERSION_DEFAULT };
        let flux = flux_for(preset, &space, k);
        let v = random_vector(space.n_dofs, seed);
        let dg = dg_norm(&space, &v, &flux, k).unwrap();
        prop_assert!(dg_plus_norm(&space, &v, &flux, k).unwrap() >= dg);
        let c = C64::new(0.0, scale);
        let cv: Vec<C64> = v.iter().map(|z| z * c).collect();
        prop_assert!((dg_norm(&space, &cv, &flux, k).unwrap() - scale * dg).abs() <= 1e-12 * scale * dg);
    }

    #[test]
    fn galerkin_volume_part_is_complex_symmetric(p in 1usize..4, k in 1.0f64..20.0) {
        let space = h1_space(triangulate(&Polygon::unit_square(), 0.5).unwrap(), p).unwrap();
        let a = assemble_galerkin(&space, k, None, None, GalerkinOptions::default()).unwrap().a.to_dense();
        let n = space.n_dofs;
        let scale = (0..n).map(|i| a[(i, i)].norm()).fold(0.0, f64::max);
        for i in 0..n {
            for j in 0..n {
                prop_assert!((a[(i, j)] - a[(j, i)]).norm() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn power_laws_are_recovered(slope in -6.0f64..6.0, c in 0.01f64..100.0) {
        let pts: Vec<(f64, f64)> = (1..=6).map(|i| { let x = 2f64.powi(i); (x, c * x.powf(slope)) }).collect();
        prop_assert!((fit_rate(&pts).unwrap().slope - slope).abs() <= 1e-10);
    }

    #[test]
    fn unknown_config_keys_are_named(key in "[a-z]{3,10}") {
        prop_assume!(!["preset", "method", "domain", "exact", "source", "seed", "sigma", "basis", "solver", "output", "threads", "timing", "flux"].contains(&key.as_str()));
        let text = format!("method = fem\ndomain = interval\nk = 1\nn_elements = 4\n{key} = 1\n");
        prop_assert_eq!(ExperimentConfig::parse(&text).unwrap_err().key, key);
    }
}
