use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tsvnet_core::em::lumped::lumped_oracle_model;
use tsvnet_core::em::sparams::{rfe_matrices, SParameterBlock};
use tsvnet_core::em::sweep::{chain_solution, SolverPath, SweepSolver};
use tsvnet_core::em::{average_crosstalk, solve_sweep, DEFAULT_Z_REF};
use tsvnet_core::geometry::{EPS0, MU0};
use tsvnet_core::rlcg::bessel::conductor_internal_impedance;
use tsvnet_core::rlcg::depletion::depletion_thickness;
use tsvnet_core::rlcg::extract_rlcg;
use tsvnet_core::symmetry::apply_d4;
use tsvnet_core::{C64, D4Transform, FrequencyGrid, GeometryMaterials, Role, TsvLayout};

fn random_layout(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> TsvLayout {
    loop {
        let roles = (0..rows * cols)
            .map(|_| match rng.gen_range(0..3) {
                0 => Role::Ground,
                1 => Role::Empty,
                _ => Role::Signal,
            })
            .collect();
        let l = TsvLayout::new(rows, cols, roles).unwrap();
        if l.is_electrically_solvable() {
            return l;
        }
    }
}

/// Closed-form two-port of one uniform line between equal terminations,
/// with every per-unit-length quantity computed from the geometry.
fn scalar_pair_oracle(g: &GeometryMaterials, f: f64) -> (C64, C64) {
    let w = 2.0 * PI * f;
    let j = C64::new(0.0, w);
    let l = MU0 / (2.0 * PI) * (g.p_int_um / g.r_cond_um).powi(2).ln();
    let c_sub = MU0 * EPS0 * g.eps_s / l;
    let g_sub = MU0 * g.sigma_s / l;
    let t_dep = depletion_thickness(g).unwrap();
    let (r, ro) = (g.r_cond_um, g.r_cond_um + g.t_ins_um);
    let c_ox = 2.0 * PI * EPS0 * g.eps_ins * g.eps_s
        / (g.eps_s * (ro / r).ln() + g.eps_ins * ((ro + t_dep) / ro).ln());
    let z = conductor_internal_impedance(w, g).unwrap() + j * l;
    let ys = C64::new(g_sub, w * c_sub);
    let y = j * c_ox * ys / (j * c_ox + ys);
    let gamma = (z * y).sqrt();
    let zc = (z / y).sqrt();
    let x = gamma * g.h_int_um * 1e-6;
    let (a, b, c, d) = (x.cosh(), zc * x.sinh(), x.sinh() / zc, x.cosh());
    let z0 = 50.0;
    let den = a + b / z0 + c * z0 + d;
    ((a + b / z0 - c * z0 - d) / den, C64::new(2.0, 0.0) / den)
}

#[test]
fn scalar_pair_matches_closed_form() {
    let g = GeometryMaterials::default();
    let l = TsvLayout::build(1, 2, &[0], &[1]).unwrap();
    let grid = FrequencyGrid::default_sweep();
    let s = solve_sweep(&l, &g, &grid).unwrap();
    for (k, &f) in grid.points().iter().enumerate() {
        let (s11, s21) = scalar_pair_oracle(&g, f);
        let m = &s.data[k];
        assert!((m[(0, 0)] - s11).norm() <= 1e-3 * s11.norm(), "S11 at {f}");
        assert!((m[(1, 0)] - s21).norm() <= 1e-3 * s21.norm(), "S21 at {f}");
    }
}

#[test]
fn lumped_sections_converge_to_distributed_solution() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let g = GeometryMaterials::default();
    let f = 15e9;
    let grid = FrequencyGrid::single(f).unwrap();
    for _ in 0..5 {
        let l = random_layout(&mut rng, 3, 3);
        let m = extract_rlcg(&l, &g, &grid).unwrap();
        let exact = chain_solution(&m, 2.0 * PI * f, DEFAULT_Z_REF).unwrap();
        let mut prev = f64::INFINITY;
        for n_seg in [8, 16, 32, 64, 128] {
            let lumped = lumped_oracle_model(&m, 2.0 * PI * f, n_seg, DEFAULT_Z_REF).unwrap();
            let e = rfe_matrices(&[lumped], std::slice::from_ref(&exact)).unwrap();
            assert!(e < prev, "{n_seg}: {e} >= {prev}");
            prev = e;
        }
        assert!(prev < 1e-3);
    }
}

#[test]
fn tiny_structure_single_section() {
    let g = GeometryMaterials { h_int_um: 1.0, ..Default::default() };
    let l = TsvLayout::build(2, 2, &[0, 3], &[1, 2]).unwrap();
    let grid = FrequencyGrid::single(1e9).unwrap();
    let m = extract_rlcg(&l, &g, &grid).unwrap();
    let w = 2.0 * PI * 1e9;
    let exact = chain_solution(&m, w, DEFAULT_Z_REF).unwrap();
    let lumped = lumped_oracle_model(&m, w, 1, DEFAULT_Z_REF).unwrap();
    assert!(rfe_matrices(&[lumped], &[exact]).unwrap() < 1e-6);
}

#[test]
fn lumped_halves_at_100ghz() {
    let g = GeometryMaterials::default();
    let l = TsvLayout::build(3, 3, &[0, 4, 8], &[1, 2, 3, 5, 6, 7]).unwrap();
    let f = 100e9;
    let m = extract_rlcg(&l, &g, &FrequencyGrid::single(f).unwrap()).unwrap();
    let exact = chain_solution(&m, 2.0 * PI * f, DEFAULT_Z_REF).unwrap();
    let errs: Vec<f64> = [8, 16, 32, 64]
        .iter()
        .map(|&n| rfe_matrices(&[lumped_oracle_model(&m, 2.0 * PI * f, n, DEFAULT_Z_REF).unwrap()], std::slice::from_ref(&exact)).unwrap())
        .collect();
    for w in errs.windows(2) {
        assert!(w[1] <= 0.5 * w[0], "{errs:?}");
    }
}

fn permuted_block(base: &SParameterBlock, layout: &TsvLayout, t: D4Transform) -> SParameterBlock {
    let map = t.cell_map(layout.rows(), layout.cols()).unwrap();
    let old = layout.signal_cells();
    let mut new: Vec<(usize, usize)> = old.iter().enumerate().map(|(i, &c)| (map[c], i)).collect();
    new.sort();
    let perm: Vec<usize> = new.iter().map(|&(_, i)| i).collect();
    let cells: Vec<usize> = new.iter().map(|&(c, _)| c).collect();
    base.permute_signals(&perm, &cells).unwrap()
}

#[test]
fn d4_covariance_on_4x4() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let g = GeometryMaterials::default();
    let grid = FrequencyGrid::linear(1e9, 100e9, 5).unwrap();
    for _ in 0..3 {
        let l = random_layout(&mut rng, 4, 4);
        let base = solve_sweep(&l, &g, &grid).unwrap();
        for t in D4Transform::ALL {
            let lt = apply_d4(&l, t).unwrap();
            let st = solve_sweep(&lt, &g, &grid).unwrap();
            let expected = permuted_block(&base, &l, t);
            let e = rfe_matrices(&st.data, &expected.data).unwrap();
            assert!(e < 1e-9, "{t:?}: {e}");
            if l.count(Role::Signal) >= 2 {
                let a = average_crosstalk(&base, 1e9).unwrap();
                let b = average_crosstalk(&st, 1e9).unwrap();
                assert!((a - b).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn random_designs_are_reciprocal_and_passive() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let grid = FrequencyGrid::linear(1e9, 100e9, 20).unwrap();
    for _ in 0..10 {
        let g = GeometryMaterials {
            r_cond_um: rng.gen_range(2.0..6.0),
            p_int_um: rng.gen_range(20.0..60.0),
            h_int_um: rng.gen_range(60.0..100.0),
            t_ins_um: rng.gen_range(0.5..3.0),
            ..Default::default()
        };
        if g.validate().is_err() {
            continue;
        }
        let n = rng.gen_range(2..5);
        let l = random_layout(&mut rng, n, n);
        let s = solve_sweep(&l, &g, &grid).unwrap();
        assert!(s.max_reciprocity_error() < 1e-10);
        assert!(s.max_passivity_margin() <= 1e-9);
    }
}

#[test]
fn modal_path_matches_chain_on_random_layouts() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = GeometryMaterials::default();
    let grid = FrequencyGrid::linear(1e9, 100e9, 7).unwrap();
    for _ in 0..4 {
        let l = random_layout(&mut rng, 4, 4);
        let m = extract_rlcg(&l, &g, &grid).unwrap();
        let a = SweepSolver::new(m.clone(), SolverPath::Modal).unwrap().solve_grid(&grid).unwrap();
        let b = SweepSolver::new(m, SolverPath::Chain).unwrap().solve_grid(&grid).unwrap();
        assert!(rfe_matrices(&a.data, &b.data).unwrap() < 1e-9);
    }
}

#[test]
fn reference_choice_barely_changes_s() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let g = GeometryMaterials::default();
    let grid = FrequencyGrid::linear(1e9, 100e9, 5).unwrap();
    for _ in 0..4 {
        let l = random_layout(&mut rng, 3, 3);
        let grounds = l.ground_cells();
        let base = SweepSolver::new(extract_rlcg(&l, &g, &grid).unwrap(), SolverPath::Auto).unwrap().solve_grid(&grid).unwrap();
        for &r in &grounds[1..] {
            let m = tsvnet_core::rlcg::extract_rlcg_with_reference(&l, &g, &grid, Some(r)).unwrap();
            let s = SweepSolver::new(m, SolverPath::Auto).unwrap().solve_grid(&grid).unwrap();
            assert!(rfe_matrices(&s.data, &base.data).unwrap() < 1e-2);
        }
    }
}
