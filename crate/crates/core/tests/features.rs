use hhl_depth::features::{
    cassini, extract, feature_names, gershgorin, two_norm, Variant, BOUND_FLOOR,
};
use hhl_depth::matrix::{generate_random_sparse, spectrum, GenSpec, Provenance, SystemMatrix};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random(k: u64) -> SystemMatrix {
    let n = [2, 4, 8, 16][(k % 4) as usize];
    let s = 1 + (k / 4) as usize % n;
    generate_random_sparse(&GenSpec::new(n, s, 77_000 + k)).unwrap()
}

fn dense_nonsymmetric(n: usize, seed: u64, dominant: bool) -> SystemMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut e: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    if dominant {
        for i in 0..n {
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| e[i * n + j].abs()).sum();
            e[i * n + i] = (off + rng.gen_range(0.1..1.0)) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        }
    }
    SystemMatrix::new(n, e, Provenance::Random).unwrap()
}

#[test]
fn gershgorin_bounds_contain_every_eigenvalue() {
    for k in 0..1000 {
        let a = random(k);
        let sp = spectrum(&a).unwrap();
        let g = gershgorin(&a);
        let tol = 1e-10 * g[0];
        for l in &sp.eigenvalues {
            assert!(l.abs() <= g[0] + tol, "k={k}: |lambda| {} above {}", l.abs(), g[0]);
            assert!(l.abs() >= g[1] - tol, "k={k}: |lambda| {} below {}", l.abs(), g[1]);
        }
        assert!(g[2] >= 1.0);
    }
}

#[test]
fn cassini_interval_inside_gershgorin_and_sound() {
    for k in 0..1000 {
        let a = random(k);
        let sp = spectrum(&a).unwrap();
        let g = gershgorin(&a);
        let c = cassini(&a);
        let tol = 1e-10 * g[0];
        assert!(c[0] <= g[0] + tol && c[1] >= g[1] - tol, "k={k}: {c:?} vs {g:?}");
        assert!(c[2] <= g[2] * (1.0 + 1e-12), "k={k}");
        for l in &sp.eigenvalues {
            assert!(l.abs() <= c[0] + tol && l.abs() >= c[1] - tol, "k={k}: |lambda| {}", l.abs());
        }
    }
}

#[test]
fn cassini_tighter_on_diagonally_dominant_matrices() {
    for seed in 0..200 {
        let n = [2, 3, 4, 8][seed as usize % 4];
        let a = dense_nonsymmetric(n, seed, true);
        let g = gershgorin(&a);
        let c = cassini(&a);
        assert!(c[0] <= g[0] * (1.0 + 1e-12) && c[1] >= g[1] * (1.0 - 1e-12), "seed {seed}");
        // every eigenvalue (complex in general) is bounded in modulus by the disks
        let m = DMatrix::from_row_slice(n, n, a.elements());
        for z in m.complex_eigenvalues().iter() {
            assert!(z.norm() <= g[0] * (1.0 + 1e-9) && z.norm() >= g[1] * (1.0 - 1e-9), "seed {seed}");
        }
    }
}

#[test]
fn two_norm_matches_svd_and_norm_inequalities() {
    for seed in 0..100 {
        let n = [2, 4, 8, 16][seed as usize % 4];
        let a = dense_nonsymmetric(n, 300 + seed, false);
        let m = DMatrix::from_row_slice(n, n, a.elements());
        let oracle = m.singular_values().max();
        let t = two_norm(&a);
        assert!((t - oracle).abs() <= 1e-8 * oracle, "seed {seed}: {t} vs {oracle}");
        let fv = extract(&a, Variant::D3).unwrap();
        let one = fv.get("value_norm_one").unwrap();
        let inf = fv.get("value_norm_inf").unwrap();
        let fro = fv.get("value_norm_frobenius").unwrap();
        let two = fv.get("value_norm_two").unwrap();
        assert!(two >= one * 1e-3 && two >= one / (n as f64).sqrt() * (1.0 - 1e-12));
        assert!(two <= fro * (1.0 + 1e-12) && two <= (one * inf).sqrt() * (1.0 + 1e-12));
    }
}

/// Whether a feature scales with the matrix (`true`) or is scale-free.
fn scales_linearly(name: &str) -> bool {
    if name.starts_with("struct_") || name == "cond_kappa" || name.ends_with("_ratio") {
        return false;
    }
    if name.starts_with("diag_") {
        return matches!(
            name,
            "diag_diff_mean" | "diag_diff_std" | "diag_rowmax_diff_mean" | "diag_rowmax_diff_std"
        );
    }
    true
}

#[test]
fn features_are_scale_covariant() {
    let c = 3.0;
    for k in 0..200 {
        let a = random(k);
        let b = a.scaled(c);
        for v in [Variant::D1, Variant::D2] {
            let fa = extract(&a, v).unwrap();
            let fb = extract(&b, v).unwrap();
            let clamped = fa.get("cond_gersh_min") == Some(BOUND_FLOOR)
                || fa.get("cond_cassini_min") == Some(BOUND_FLOOR);
            for (i, name) in fa.names.iter().enumerate() {
                if clamped && name.starts_with("cond_") && name != "cond_kappa" {
                    continue;
                }
                let want = if scales_linearly(name) { c * fa.values[i] } else { fa.values[i] };
                let got = fb.values[i];
                assert!(
                    (got - want).abs() <= 1e-9 * want.abs().max(1.0),
                    "k={k} {name}: {got} vs {want}"
                );
            }
        }
    }
}

#[test]
fn condition_features_absent_from_d3() {
    let d3 = feature_names(Variant::D3);
    assert!(d3.iter().all(|n| !n.starts_with("cond_")));
    let d2 = feature_names(Variant::D2);
    assert!(!d2.contains(&"cond_kappa".to_string()));
    assert!(d2.contains(&"cond_cassini_ratio".to_string()));
}

proptest! {
    #[test]
    fn extraction_is_finite_and_repeatable(k in 0u64..5000) {
        let a = random(k);
        for v in [Variant::D1, Variant::D2, Variant::D3] {
            let x = extract(&a, v).unwrap();
            let y = extract(&a, v).unwrap();
            prop_assert_eq!(x.names.len(), x.values.len());
            prop_assert!(x.values.iter().all(|f| f.is_finite()));
            prop_assert!(x.values.iter().zip(&y.values).all(|(p, q)| p.to_bits() == q.to_bits()));
        }
    }

    #[test]
    fn raw_variant_is_row_major(vals in proptest::collection::vec(-5.0f64..5.0, 16)) {
        let a = SystemMatrix::new(4, vals.clone(), Provenance::Random).unwrap();
        prop_assert_eq!(extract(&a, Variant::D4).unwrap().values, vals);
    }
}
