use qpoincare::classical::*;
use qpoincare::dynamics::three_disk;
use qpoincare::resonances::{Domain, ZeroFinderParams};
use qpoincare::{Complex64, Error};

fn colloc(degree: usize) -> Discretization {
    Discretization::Collocation { degree }
}

#[test]
fn ulam_doubling_has_leading_eigenvalue_two() {
    let m = build_transfer_matrix(&SymbolicModel::doubling(), &Observable::zero(), Discretization::Ulam { cells: 32 }, None)
        .unwrap();
    assert_eq!(m.dim(), 64);
    let l = m.eigenvalues().unwrap()[0];
    assert!((l - Complex64::new(2.0, 0.0)).norm() < 1e-12, "{l}");
    // every cell has exactly two unit-weight preimages
    for r in 0..m.dim() {
        let s: Complex64 = (0..m.dim()).map(|c| m.entries[(r, c)]).sum();
        assert!((s.re - 2.0).abs() < 1e-14 && s.im == 0.0);
    }
}

#[test]
fn constant_weight_scales_the_spectrum() {
    for model in [SymbolicModel::doubling(), SymbolicModel::golden_mean(), SymbolicModel::ternary_cut()] {
        let base = build_transfer_matrix(&model, &Observable::jacobian(0.5), colloc(16), None).unwrap();
        let c = 0.37;
        let shifted = build_transfer_matrix(&model, &Observable::jacobian(0.5).plus_constant(c), colloc(16), None).unwrap();
        for r in 0..base.dim() {
            for k in 0..base.dim() {
                let d = shifted.entries[(r, k)] - base.entries[(r, k)] * c.exp();
                assert!(d.norm() < 1e-12);
            }
        }
        let (e0, e1) = (base.eigenvalues().unwrap(), shifted.eigenvalues().unwrap());
        assert!((e0[0] * c.exp() - e1[0]).norm() < 1e-10);
        // subleading eigenvalues of these non-normal matrices are only
        // conditioned to about 1e-9
        for b in e1.iter().take(6) {
            let d = e0.iter().map(|a| (a * c.exp() - b).norm()).fold(f64::INFINITY, f64::min);
            assert!(d < 1e-7, "{b} has no partner ({d:e})");
        }
    }
}

#[test]
fn normalized_doubling_operator_fixes_constants() {
    let m = build_transfer_matrix(&SymbolicModel::doubling(), &Observable::jacobian(1.0), colloc(32), None).unwrap();
    let e = m.eigenvalues().unwrap();
    assert!((e[0] - Complex64::new(1.0, 0.0)).norm() < 1e-10);
    // polynomial eigenfunctions give 2^-k; the higher ones are ill-conditioned
    for k in 1..6 {
        assert!((e[k].re - 2f64.powi(-(k as i32))).abs() < 1e-6, "{k}: {}", e[k]);
    }
}

#[test]
fn pressures_of_analytic_models() {
    let log2 = 2f64.ln();
    let r = topological_pressure(&SymbolicModel::doubling(), &Observable::zero(), colloc(32)).unwrap();
    assert!((r.value - log2).abs() < 1e-10);
    assert!(r.error_estimate < 1e-8);

    // adjacency matrix [[1,1],[1,0]]: largest root of x^2 = x + 1
    let golden = (0.5 * (1.0 + 5f64.sqrt())).ln();
    let r = topological_pressure(&SymbolicModel::golden_mean(), &Observable::zero(), colloc(32)).unwrap();
    assert!((r.value - golden).abs() < 1e-10);

    let c = -0.8;
    let r2 = topological_pressure(&SymbolicModel::golden_mean(), &Observable::constant(c), colloc(32)).unwrap();
    assert!((r2.value - (golden + c)).abs() < 1e-12);

    // half-Jacobian weight on the open ternary map: two branches of slope 3
    let r = topological_pressure(&SymbolicModel::ternary_cut(), &Observable::jacobian(0.5), colloc(32)).unwrap();
    assert!((r.value - (log2 - 0.5 * 3f64.ln())).abs() < 1e-10);
}

#[test]
fn ulam_pressure_is_exact_on_piecewise_constant_weights() {
    let r = topological_pressure(&SymbolicModel::golden_mean(), &Observable::zero(), Discretization::Ulam { cells: 16 })
        .unwrap();
    assert!((r.value - (0.5 * (1.0 + 5f64.sqrt())).ln()).abs() < 1e-10);
}

#[test]
fn orbit_sums_agree_with_transfer_operator() {
    let log2 = 2f64.ln();
    // every binary word of length 12 closes into one periodic point
    let p = orbit_pressure(&SymbolicModel::doubling(), &Observable::zero(), 12).unwrap();
    assert!((p - (4096f64).ln() / 12.0).abs() < 1e-14);
    assert!((p - log2).abs() < 0.01);
    // tr(A^14) is the Lucas number L_14 = 843
    let p = orbit_pressure(&SymbolicModel::golden_mean(), &Observable::zero(), 14).unwrap();
    assert!((p - 843f64.ln() / 14.0).abs() < 1e-12);
    assert!((p - (0.5 * (1.0 + 5f64.sqrt())).ln()).abs() < 0.01);
    let p12 = orbit_pressure(&SymbolicModel::golden_mean(), &Observable::zero(), 12).unwrap();
    let t = topological_pressure(&SymbolicModel::golden_mean(), &Observable::zero(), colloc(32)).unwrap();
    assert!((p12 - t.value).abs() < 0.01);
}

#[test]
fn single_fixed_point_pressure() {
    let model = SymbolicModel::interval(
        "fixed",
        vec![[0.0, 1.0]],
        vec![Branch { source: 0, target: 0, slope: 0.25, offset: 0.5 }],
    )
    .unwrap();
    let f = Observable { constant: 0.3, log_jacobian: -0.5, ..Observable::default() };
    let expect = 0.3 - 0.5 * 4f64.ln();
    assert!((orbit_pressure(&model, &f, 7).unwrap() - expect).abs() < 1e-14);
    assert!((topological_pressure(&model, &f, colloc(8)).unwrap().value - expect).abs() < 1e-12);
}

#[test]
fn collocation_converges_under_degree_doubling() {
    for model in [SymbolicModel::doubling(), SymbolicModel::golden_mean(), SymbolicModel::ternary_cut()] {
        let f = Observable::jacobian(0.7).plus_constant(0.1);
        let a = topological_pressure(&model, &f, colloc(32)).unwrap();
        let b = topological_pressure(&model, &f, colloc(64)).unwrap();
        assert!((a.value - b.value).abs() < 1e-8);
    }
}

#[test]
fn flow_pressure_with_constant_and_branch_roofs() {
    let log2 = 2f64.ln();
    let s = flow_pressure(&SymbolicModel::doubling(), &Observable::zero(), &Observable::constant(2.0), colloc(16)).unwrap();
    assert!((s - 0.5 * log2).abs() < 1e-10);

    // roof 1 on symbol 0, 2 on symbol 1; oracle: bisection of the period-12
    // orbit sum over all binary words
    let roof = Observable::per_cell(vec![1.0, 2.0]);
    let s = flow_pressure(&SymbolicModel::doubling(), &Observable::zero(), &roof, colloc(16)).unwrap();
    let orbit_sum = |s: f64| {
        let t = 12;
        let mut sum = 0.0;
        for w in 0..(1u32 << t) {
            let ones = w.count_ones() as f64;
            let tau = (t as f64 - ones) + 2.0 * ones;
            sum += (-s * tau).exp();
        }
        sum.ln() / t as f64
    };
    let (mut lo, mut hi) = (0.0, 2.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if orbit_sum(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!((s - 0.5 * (lo + hi)).abs() < 1e-6, "{s} vs {}", 0.5 * (lo + hi));
}

#[test]
fn doubling_ruelle_resonances() {
    let start = std::time::Instant::now();
    let model = SymbolicModel::doubling();
    let f = Observable::jacobian(1.0);
    let roof = Observable::constant(1.0);
    let domain = Domain::Rect { re: [-2.4, 0.3], im: [-3.0, 3.0] };
    let set = ruelle_resonances(&model, &f, &roof, domain, 32, &ZeroFinderParams::default()).unwrap();
    assert_eq!(set.zeros.len(), 4, "{:?}", set.zeros);
    for (k, z) in set.zeros.iter().rev().enumerate() {
        assert_eq!(z.multiplicity, 1);
        assert!((z.z - Complex64::new(-(k as f64) * 2f64.ln(), 0.0)).norm() < 1e-8, "{k}: {}", z.z);
        // the operator at a zero has eigenvalue 1
        let m = build_transfer_matrix(&model, &f, colloc(32), Some((&roof, z.z))).unwrap();
        let near = m.eigenvalues().unwrap().iter().map(|l| (l - 1.0).norm()).fold(f64::INFINITY, f64::min);
        assert!(near < 1e-7);
    }
    assert!(start.elapsed().as_secs_f64() < 10.0);

    // f + c with roof 1 moves every resonance by c
    let c = 0.5;
    let shifted = Domain::Rect { re: [-2.4 + c, 0.3 + c], im: [-3.0, 3.0] };
    let moved = ruelle_resonances(&model, &f.plus_constant(c), &roof, shifted, 32, &ZeroFinderParams::default()).unwrap();
    assert_eq!(moved.zeros.len(), 4);
    for (a, b) in moved.zeros.iter().zip(&set.zeros) {
        assert!((a.z - b.z - c).norm() < 1e-8);
    }
}

#[test]
fn model_errors() {
    let contracting = SymbolicModel::interval(
        "contracting",
        vec![[0.0, 1.0]],
        vec![Branch { source: 0, target: 0, slope: 1.0, offset: 0.0 }],
    )
    .unwrap();
    assert!(matches!(
        build_transfer_matrix(&contracting, &Observable::zero(), colloc(8), None),
        Err(Error::Model(_))
    ));
    assert!(matches!(
        build_transfer_matrix(&SymbolicModel::doubling(), &Observable::zero(), colloc(4), None),
        Err(Error::Parameter(_))
    ));
    assert!(matches!(orbit_pressure(&SymbolicModel::doubling(), &Observable::zero(), 40), Err(Error::Budget(_))));
    assert!(SymbolicModel::interval(
        "leaky",
        vec![[0.0, 1.0]],
        vec![Branch { source: 0, target: 0, slope: 0.5, offset: 0.8 }]
    )
    .is_err());
}

#[test]
fn three_disk_cycle_expansion_escape_rate() {
    let d = three_disk(6.0, 1.0).unwrap();
    let g8 = -cycle_expansion_pressure(&d, 1.0, 8).unwrap();
    let g10 = -cycle_expansion_pressure(&d, 1.0, 10).unwrap();
    // published value for R:a = 6
    assert!((g10 - 0.410338407769).abs() < 1e-8, "{g8} {g10}");
    // the half-Jacobian pressure lies between the escape rate and entropy
    let p_half = cycle_expansion_pressure(&d, 0.5, 10).unwrap();
    assert!(p_half > -g10 && p_half < cycle_expansion_pressure(&d, 0.0, 10).unwrap());
}

#[test]
fn sampled_three_disk_map_reproduces_the_escape_rate() {
    use qpoincare::dynamics::{sample_trapped_set, ScatteringSystem};
    use qpoincare::section::{build_sections, partition_blocks, PartitionParams, SectionParams};
    let d = three_disk(6.0, 1.0).unwrap();
    let gamma = -cycle_expansion_pressure(&d, 1.0, 10).unwrap();
    let sys = ScatteringSystem::DiskBilliard(d);
    let pts = sample_trapped_set(&sys, 0.5, 100_000, 30.0, 6.0).unwrap();
    let charts = build_sections(&sys, 0.5, &pts, 3.0).unwrap();
    let data = partition_blocks(&charts, &sys, 600, &PartitionParams::default()).unwrap();
    let model = SymbolicModel::from_return_map(data, sys, SectionParams::default()).unwrap();
    assert_eq!(model.alphabet(), 3);
    // the Ulam matrix of an area-preserving map carries the Lebesgue weight,
    // so the flow pressure with f = 0 is minus the escape rate (unit speed)
    let disc = Discretization::Ulam { cells: 64 };
    let s = flow_pressure(&model, &Observable::zero(), &Observable::return_time(), disc).unwrap();
    assert!((s + gamma).abs() < 0.02, "{s} vs {}", -gamma);
    assert!(matches!(
        build_transfer_matrix(&model, &Observable::zero(), Discretization::Collocation { degree: 16 }, None),
        Err(Error::Model(_))
    ));
    assert!(matches!(
        topological_pressure(&model, &Observable::jacobian(0.5), disc),
        Err(Error::Model(_))
    ));
}
