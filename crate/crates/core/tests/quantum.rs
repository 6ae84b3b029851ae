use faer::Mat;
use num_complex::Complex64;
use qpoincare::linalg::{eigenvalues, identity, max_abs_diff, op_norm};
use qpoincare::quantum::*;
use qpoincare::section::*;
use qpoincare::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;

use common::{c, cat_map_block, three_disk_data};

#[test]
fn rank_counts_oscillator_levels() {
    // a = b, ab / (2h) = 10.5: levels (2k + 1) h <= ab for k = 0..=10
    let h = 1.0 / 21.0;
    assert_eq!(projector_rank(1.0, 1.0, h), 11);
    // non-positive levels of the oscillator, counted one by one
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let (a, b, h) = (rng.gen_range(0.2..2.0), rng.gen_range(0.2..2.0), rng.gen_range(0.002..0.2));
        let direct = (0..).take_while(|&k| (2 * k + 1) as f64 * h <= a * b).count();
        assert_eq!(projector_rank(a, b, h), direct);
        assert_eq!(projector_rank(a, b, h), (a * b / (2.0 * h) + 0.5).floor() as usize);
    }
    assert_eq!(projector_rank(1.0, 1.0, 3.0), 0);
}

#[test]
fn rank_doubles_when_h_halves() {
    for (a, b) in [(1.0, 1.0), (0.76, 0.84), (2.0, 0.3)] {
        let mut h = a * b / 40.0;
        for _ in 0..5 {
            let (r1, r2) = (projector_rank(a, b, h), projector_rank(a, b, h / 2.0));
            assert!(r2.abs_diff(2 * r1) <= 1, "{r1} -> {r2}");
            h /= 2.0;
        }
    }
}

#[test]
fn projector_is_an_orthogonal_projection() {
    for (center, axes, h) in [([0.0, 0.0], [0.76, 0.84], 1.0 / 64.0), ([0.3, -0.2], [0.5, 1.1], 1.0 / 40.0)] {
        let p = build_projector_with(0, center, axes, h, &ProjectorParams::default()).unwrap();
        assert_eq!(p.rank, projector_rank(axes[0], axes[1], h));
        let pi = p.matrix();
        let sq = &pi * &pi;
        assert!(op_norm((&sq - &pi).as_ref()).unwrap() < 1e-12);
        assert!(op_norm((&pi - pi.adjoint()).as_ref()).unwrap() < 1e-12);
        // range vectors are fixed: Pi W^(1/2) phi_k = W^(1/2) phi_k
        let n = p.nodes.len();
        for k in [0, p.rank / 2, p.rank - 1] {
            let v = Mat::from_fn(n, 1, |m, _| p.basis[(m, k)] * p.weights[m].sqrt());
            assert!(max_abs_diff((&pi * &v).as_ref(), v.as_ref()) < 1e-12);
            let coords = p.coordinates(&(0..n).map(|m| p.basis[(m, k)]).collect::<Vec<_>>());
            for (l, x) in coords.iter().enumerate() {
                let e = if l == k { 1.0 } else { 0.0 };
                assert!((x - e).norm() < 1e-12);
            }
        }
        // the quadrature already makes the raw Hermite functions orthonormal
        let cm = p.coefficients();
        for i in 0..p.rank {
            for j in 0..p.rank {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((cm[(i, j)] - e).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn projector_rejects_coarse_h() {
    assert!(matches!(build_projector_with(0, [0.0, 0.0], [0.1, 0.1], 1.0, &ProjectorParams::default()), Err(Error::Resolution { .. })));
}

#[test]
fn three_disk_projectors_follow_the_trapped_ellipses() {
    let data = three_disk_data();
    for chart in &data.charts {
        let p = build_projector(chart, 1.0 / 64.0).unwrap();
        assert_eq!(p.rank, projector_rank(chart.trapped.semi_axes[0], chart.trapped.semi_axes[1], 1.0 / 64.0));
        let pi = p.matrix();
        assert!(op_norm((&pi * &pi - &pi).as_ref()).unwrap() < 1e-12);
    }
}

#[test]
fn quadratic_phase_block_is_the_metaplectic_operator() {
    let h = 1.0 / 128.0;
    let (kernel, target, source, oracle) = cat_map_block(h);
    let block = kernel.quantize(c(0.0, 0.0));
    let raw = oracle.elements(&target, &source, h);
    // the block lives in the orthonormalized bases: C_j^T m C_i
    let cj = target.coefficients().as_ref();
    let ci = source.coefficients().as_ref();
    let cj = Mat::from_fn(cj.nrows(), cj.ncols(), |r, s| c(cj[(r, s)], 0.0));
    let ci = Mat::from_fn(ci.nrows(), ci.ncols(), |r, s| c(ci[(r, s)], 0.0));
    let expected = cj.transpose() * &raw * &ci;
    let err = max_abs_diff(block.matrix.as_ref(), expected.as_ref());
    assert!(err < 1e-6, "metaplectic mismatch {err:e}");

    // interior source states land well inside the target ellipse, where the
    // compressed operator is an isometry
    let interior = Mat::from_fn(block.matrix.nrows(), 3, |r, s| block.matrix[(r, s)]);
    for s in interior.singular_values().unwrap() {
        assert!((s - 1.0).abs() < 1e-6, "singular value {s}");
    }
}

#[test]
fn constant_return_time_factors_out_of_the_block() {
    let h = 1.0 / 64.0;
    let data = three_disk_data();
    let blk = &data.blocks[0];
    let gf = blk.generating_function.as_ref().unwrap();
    let tau0 = 4.2;
    let flat = GeneratingFunction { tau_coefficients: gf.tau_coefficients.iter().enumerate().map(|(k, _)| if k == 0 { tau0 } else { 0.0 }).collect(), ..gf.clone() };
    let params = QuantParams::default();
    let pj = build_projector(&data.charts[blk.target], h).unwrap();
    let pi = build_projector(&data.charts[blk.source], h).unwrap();
    let kernel = BlockKernel::new(&flat, &pj, &pi, h, &params).unwrap();
    let m0 = kernel.quantize(c(0.0, 0.0)).matrix;
    let scale = op_norm(m0.as_ref()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let z = c(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)) * h;
        let phase = (Complex64::i() * z * tau0 / h).exp();
        let mz = kernel.quantize(z).matrix;
        let expected = Mat::from_fn(m0.nrows(), m0.ncols(), |r, s| m0[(r, s)] * phase);
        let err = max_abs_diff(mz.as_ref(), expected.as_ref()) / (scale * phase.norm());
        assert!(err < 1e-13, "relative error {err:e} at z = {z}");
    }
}

/// `<phi_(y, eta), u>` by the arrival quadrature, for a normalized coherent state.
fn coherent_overlap(kernel: &BlockKernel, u: &[Complex64], y: f64, eta: f64, h: f64) -> Complex64 {
    let norm = (std::f64::consts::PI * h).powf(-0.25);
    kernel
        .y
        .nodes
        .iter()
        .zip(&kernel.y.weights)
        .zip(u)
        .map(|((&x, &w), &v)| {
            let phi = Complex64::from_polar(norm * (-(x - y).powi(2) / (2.0 * h)).exp(), eta * (x - y) / h);
            phi.conj() * v * w
        })
        .sum()
}

#[test]
fn coherent_states_follow_the_billiard_map() {
    // small h, so that the packet and its sheared image fit inside the
    // sample box of the block
    let h = 1.0 / 2048.0;
    let data = three_disk_data();
    let params = QuantParams::default();
    let projectors: Vec<_> = data.charts.iter().map(|c| build_projector(c, h).unwrap()).collect();
    let norm = (std::f64::consts::PI * h).powf(-0.25);
    for blk in &data.blocks {
        let gf = blk.generating_function.as_ref().unwrap();
        let kernel = BlockKernel::new(gf, &projectors[blk.target], &projectors[blk.source], h, &params).unwrap();
        let k = kernel.kernel(c(0.0, 0.0));
        let (yr, ypr) = (gf.y_range, gf.yp_range);
        let clearance = |s: &BlockSample| {
            (s.arrival[0] - yr[0]).min(yr[1] - s.arrival[0]).min(s.departure[0] - ypr[0]).min(ypr[1] - s.departure[0])
        };
        let s = blk.samples.iter().max_by(|a, b| clearance(a).total_cmp(&clearance(b))).unwrap();
        let [y0, e0] = s.departure;
        let g: Vec<Complex64> = kernel
            .yp
            .nodes
            .iter()
            .map(|&x| Complex64::from_polar(norm * (-(x - y0).powi(2) / (2.0 * h)).exp(), e0 * (x - y0) / h))
            .collect();
        let u: Vec<Complex64> = (0..k.nrows()).map(|m| (0..k.ncols()).map(|n| k[(m, n)] * g[n]).sum()).collect();
        // Husimi peak on a grid around the classical image, then refined
        let [ya, ea] = s.arrival;
        let mut best = (0.0, ya, ea);
        let mut step = 0.02;
        for _ in 0..6 {
            let (cy, ce) = (best.1, best.2);
            for a in -10..=10 {
                for b in -10..=10 {
                    let (y, e) = (cy + step * a as f64, ce + step * b as f64);
                    let v = coherent_overlap(&kernel, &u, y, e, h).norm_sqr();
                    if v > best.0 {
                        best = (v, y, e);
                    }
                }
            }
            step /= 4.0;
        }
        let dist = (best.1 - ya).hypot(best.2 - ea);
        assert!(dist < h.sqrt(), "Husimi peak {:?} vs classical image {:?}: distance {dist}", (best.1, best.2), (ya, ea));
    }
}

#[test]
fn three_disk_operator_structure() {
    let h = 1.0 / 64.0;
    let data = three_disk_data();
    let sys = QuantumSystem::new(&data, h, &QuantParams::default()).unwrap();
    let op = sys.operator(c(0.0, 0.0)).unwrap();
    assert_eq!(op.dim(), sys.ranks().iter().sum::<usize>());
    assert_eq!(op.blocks.len(), 6);
    let off = op.offsets();
    for j in 0..3 {
        for i in 0..3 {
            let mut norm: f64 = 0.0;
            for r in off[j]..off[j + 1] {
                for s in off[i]..off[i + 1] {
                    norm = norm.max(op.matrix[(r, s)].norm());
                }
            }
            if i == j {
                assert_eq!(norm, 0.0);
            } else {
                assert!(norm > 1e-3, "block ({j}, {i}) vanishes");
            }
        }
    }
    // the compression of a near-isometry does not expand much
    let n = op_norm(op.matrix.as_ref()).unwrap();
    assert!(n <= 1.0 + 5.0 * h, "|M(0)| = {n}");
}

#[test]
fn entries_are_holomorphic_in_z() {
    let h = 1.0 / 64.0;
    let data = three_disk_data();
    let sys = QuantumSystem::new(&data, h, &QuantParams::default()).unwrap();
    // derivatives in zeta = z / h, where entries vary on unit scales;
    // residuals relative to the largest entry, which grows like exp(-tau Im zeta)
    let d = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let zeta = c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..1.0));
        let m = |w: Complex64| sys.matrix(w * h).unwrap();
        let (xp, xm) = (m(zeta + d), m(zeta - d));
        let (yp, ym) = (m(zeta + c(0.0, d)), m(zeta - c(0.0, d)));
        let mut worst: f64 = 0.0;
        let scale = (0..xp.nrows()).flat_map(|r| (0..xp.ncols()).map(move |s| (r, s))).map(|(r, s)| xp[(r, s)].norm()).fold(0.0, f64::max);
        for r in 0..xp.nrows() {
            for s in 0..xp.ncols() {
                let dx = (xp[(r, s)] - xm[(r, s)]) / (2.0 * d);
                let dy = (yp[(r, s)] - ym[(r, s)]) / (2.0 * d);
                worst = worst.max((dx + Complex64::i() * dy).norm() / (2.0 * scale));
            }
        }
        assert!(worst < 1e-8, "Cauchy-Riemann residual {worst:e} at zeta = {zeta}");
    }
}

#[test]
fn grid_doubling_leaves_the_operator_unchanged() {
    let h = 1.0 / 64.0;
    let data = three_disk_data();
    let base = QuantumSystem::new(&data, h, &QuantParams::default()).unwrap();
    let fine = QuantumSystem::new(&data, h, &QuantParams { oversampling: 4.0, ..Default::default() }).unwrap();
    for (a, b) in base.kernels.iter().zip(&fine.kernels) {
        assert!(b.grid_size().0 >= 2 * a.grid_size().0 - 1);
    }
    for z in [c(0.0, 0.0), c(0.03, -0.02)] {
        let err = max_abs_diff(base.matrix(z).unwrap().as_ref(), fine.matrix(z).unwrap().as_ref());
        assert!(err < 1e-10, "{err:e}");
    }
}

#[test]
fn fixed_grids_below_nyquist_are_rejected() {
    let h = 1.0 / 64.0;
    let data = three_disk_data();
    let err = QuantumSystem::new(&data, h, &QuantParams { nodes: Some(10), ..Default::default() }).unwrap_err();
    match err {
        Error::Aliasing { nodes, required } => assert!(nodes == 10 && required > 10),
        e => panic!("{e}"),
    }
    assert!(QuantumSystem::new(&data, h, &QuantParams { nodes: Some(200), ..Default::default() }).is_ok());
}

#[test]
fn weak_twist_is_rejected() {
    let h = 1.0 / 64.0;
    let p = build_projector_with(0, [0.0, 0.0], [0.5, 0.5], h, &ProjectorParams::default()).unwrap();
    let gf = GeneratingFunction::interpolate(|y, yp| 1e-4 * y * yp + y * y, |_, _| 1.0, 2, [-1.0, 1.0], [-1.0, 1.0]).unwrap();
    assert!(matches!(BlockKernel::new(&gf, &p, &p, h, &QuantParams::default()), Err(Error::Twist { .. })));
}

#[test]
fn assembly_checks_shapes_and_adjacency() {
    let z = c(0.1, 0.0);
    let blk = |t, s, r: usize, q: usize| QuantumBlock { source: s, target: t, h: 0.1, z, matrix: Mat::from_fn(r, q, |a, b| c((a + b) as f64, 0.0)) };
    // one chart: M is its single block
    let op = assemble_m(&[blk(0, 0, 3, 3)], &[3], &[vec![0]], z, 0.1).unwrap();
    assert_eq!(op.dim(), 3);
    assert_eq!(op.matrix[(2, 1)], c(3.0, 0.0));
    // two charts, 0 -> 1 only
    let op = assemble_m(&[blk(1, 0, 2, 3)], &[3, 2], &[vec![1], vec![]], z, 0.1).unwrap();
    assert_eq!(op.dim(), 5);
    assert_eq!(op.matrix[(4, 2)], c(3.0, 0.0));
    assert_eq!(op.matrix[(0, 0)], c(0.0, 0.0));
    assert!(matches!(assemble_m(&[blk(1, 0, 3, 3)], &[3, 2], &[vec![1], vec![]], z, 0.1), Err(Error::Assembly(_))));
    assert!(matches!(assemble_m(&[blk(1, 0, 2, 3)], &[3, 2], &[vec![], vec![0]], z, 0.1), Err(Error::Assembly(_))));
    assert!(matches!(assemble_m(&[], &[3, 2], &[vec![1], vec![]], z, 0.1), Err(Error::Assembly(_))));
}

#[test]
fn closed_baker_is_unitary() {
    for n in [3, 27, 243] {
        let b = open_baker(n, false).unwrap();
        let err = max_abs_diff((b.adjoint() * &b).as_ref(), identity(n).as_ref());
        assert!(err < 1e-12, "N = {n}: {err:e}");
    }
}

#[test]
fn open_baker_is_a_strict_contraction() {
    for n in [9, 81, 243] {
        let b = open_baker(n, true).unwrap();
        let rho = eigenvalues(b.as_ref()).unwrap().iter().map(|l| l.norm()).fold(0.0, f64::max);
        assert!(rho < 1.0, "N = {n}: spectral radius {rho}");
        assert!(op_norm(b.as_ref()).unwrap() < 1.0 + 1e-12);
    }
    let b = open_baker(3, true).unwrap();
    let s = b.singular_values().unwrap();
    assert_eq!(s.iter().filter(|&&v| v > 1e-12).count(), 2);
}

#[test]
fn baker_dimension_must_be_a_multiple_of_three() {
    assert!(matches!(open_baker(10, true), Err(Error::Parameter(_))));
    assert!(matches!(open_baker(0, false), Err(Error::Parameter(_))));
}

#[test]
fn operator_files_round_trip() {
    let h = 1.0 / 64.0;
    let data = three_disk_data();
    let sys = QuantumSystem::new(&data, h, &QuantParams::default()).unwrap();
    let op = sys.operator(c(0.01, -0.02)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let [bin, side] = save_operator(dir.path(), "m", &sys, &op).unwrap();
    let back = read_matrix(std::fs::File::open(bin).unwrap()).unwrap();
    assert_eq!(back.h, h);
    assert_eq!(back.z, op.z);
    assert_eq!(max_abs_diff(back.matrix.as_ref(), op.matrix.as_ref()), 0.0);
    let meta: Sidecar = serde_json::from_str(&std::fs::read_to_string(side).unwrap()).unwrap();
    assert_eq!(meta.dim, op.dim());
    assert_eq!(meta.ranks, sys.ranks());
    assert_eq!(meta.blocks.len(), 6);
}
