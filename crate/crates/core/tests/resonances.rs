use faer::Mat;
use qpoincare::linalg::eigenvalues;
use qpoincare::resonances::*;
use qpoincare::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn zero_mat(n: usize) -> Mat<Complex64> {
    Mat::from_fn(n, n, |_, _| c(0.0, 0.0))
}

#[test]
fn zeta_of_trivial_matrices() {
    for n in [1, 5, 40] {
        let z = zeta(zero_mat(n).as_ref()).unwrap();
        assert!((z.value() - c(1.0, 0.0)).norm() < 1e-15);
    }
    let mut m = zero_mat(2);
    m[(0, 0)] = c(1.0, 0.0);
    m[(1, 1)] = c(0.3, 0.0);
    assert!(zeta(m.as_ref()).unwrap().value().norm() < 1e-15);
}

#[test]
fn zeta_matches_eigenvalue_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 50;
    let m = Mat::from_fn(n, n, |_, _| c(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2)));
    let det = zeta(m.as_ref()).unwrap();
    // product in log form: sum of log(1 - lambda)
    let mut log_abs = 0.0;
    let mut phase = c(1.0, 0.0);
    for l in eigenvalues(m.as_ref()).unwrap() {
        let f = c(1.0, 0.0) - l;
        log_abs += f.norm().ln();
        phase *= f / f.norm();
    }
    assert!((det.log_abs - log_abs).abs() < 1e-8);
    assert!((det.phase - phase).norm() < 1e-8);
}

#[test]
fn rank_one_builder_has_one_simple_zero() {
    let z0 = c(0.7, -0.4);
    let mut p = zero_mat(3);
    p[(1, 1)] = c(1.0, 0.0);
    let builder = |z: Complex64| Ok(Mat::from_fn(3, 3, |i, j| p[(i, j)] * (z / z0)));
    let domain = Domain::Disk { center: [0.0, 0.0], radius: 2.0 };
    let set = zeta_zeros(builder, domain, &ZeroFinderParams::default()).unwrap();
    assert_eq!(set.zeros.len(), 1);
    assert_eq!(set.zeros[0].multiplicity, 1);
    assert!((set.zeros[0].z - z0).norm() < 1e-10, "{:?}", set.zeros[0]);
    assert_eq!(set.winding, 1);
    assert!(set.zeros[0].residual <= set.zero_tol);
}

#[test]
fn jordan_builder_gives_a_double_zero() {
    let z0 = c(-0.3, 0.25);
    // det(I - M) = (1 - z/z0)^2 with a nilpotent coupling
    let builder = |z: Complex64| {
        let mut m = zero_mat(2);
        m[(0, 0)] = z / z0;
        m[(1, 1)] = z / z0;
        m[(0, 1)] = c(0.8, 0.1) * z;
        Ok(m)
    };
    let domain = Domain::Rect { re: [-1.0, 1.0], im: [-1.0, 1.0] };
    let set = zeta_zeros(builder, domain, &ZeroFinderParams::default()).unwrap();
    assert_eq!(set.winding, 2);
    assert_eq!(set.zeros.len(), 1, "{:?}", set.zeros);
    assert_eq!(set.zeros[0].multiplicity, 2);
    assert!((set.zeros[0].z - z0).norm() < 1e-6);
}

#[test]
fn many_simple_zeros_and_global_winding() {
    // polynomial with known roots, some close together
    let roots = [c(0.1, 0.2), c(0.1, 0.2001), c(-0.5, 0.4), c(0.6, -0.6), c(-0.2, -0.7), c(1.5, 1.5)];
    let f = |z: Complex64| {
        let v: Complex64 = roots.iter().map(|r| z - r).product();
        Ok(qpoincare::linalg::LogDet { log_abs: v.norm().ln(), phase: v / v.norm() })
    };
    let set = find_zeros(f, Domain::Disk { center: [0.0, 0.0], radius: 1.0 }, &ZeroFinderParams::default()).unwrap();
    assert_eq!(set.winding, 5);
    assert_eq!(set.total_multiplicity(), 5);
    for r in &roots[..5] {
        let d = set.zeros.iter().map(|z| (z.z - r).norm()).fold(f64::INFINITY, f64::min);
        assert!(d < 1e-10, "root {r} missed by {d:e}");
    }
    assert!(set.winding_checks > 1);
}

#[test]
fn zero_on_the_boundary_inflates_the_domain() {
    let z0 = c(1.0, 0.0);
    let f = |z: Complex64| {
        let v = z - z0;
        if v.norm() == 0.0 {
            return Ok(qpoincare::linalg::LogDet::zero());
        }
        Ok(qpoincare::linalg::LogDet { log_abs: v.norm().ln(), phase: v / v.norm() })
    };
    let set = find_zeros(f, Domain::Disk { center: [0.0, 0.0], radius: 1.0 }, &ZeroFinderParams::default()).unwrap();
    assert_eq!(set.zeros.len(), 1);
    assert!((set.zeros[0].z - z0).norm() < 1e-10);
    match set.domain {
        Domain::Disk { radius, .. } => assert!(radius > 1.0),
        _ => unreachable!(),
    }
}

#[test]
fn non_finite_builder_is_an_input_error() {
    let f = |_z: Complex64| Ok(Mat::from_fn(2, 2, |_, _| c(f64::NAN, 0.0)));
    let err = zeta_zeros(f, Domain::Disk { center: [0.0, 0.0], radius: 1.0 }, &ZeroFinderParams::default());
    assert!(matches!(err, Err(qpoincare::Error::Input(_))), "{err:?}");
}

#[test]
fn density_fits() {
    // closed unitary map: all N eigenvalues on the unit circle
    let samples: Vec<DensitySample> =
        [27.0, 81.0, 243.0, 729.0].iter().map(|&n| DensitySample { size: n, count: n as usize }).collect();
    let fit = resonance_density(&samples).unwrap();
    assert!((fit.exponent - 1.0).abs() < 1e-12);
    assert!(resonance_density(&samples[..3]).is_err());
    let empty: Vec<DensitySample> = samples.iter().map(|s| DensitySample { count: 0, ..*s }).collect();
    assert!(matches!(resonance_density(&empty), Err(qpoincare::Error::Parameter(_))));
}

#[test]
fn gap_reports() {
    let mk = |zs: &[Complex64], h: f64| ResonanceSet {
        zeros: zs.iter().map(|&z| Zero { z, multiplicity: 1, residual: 0.0, tolerance: 0.0 }).collect(),
        domain: Domain::Disk { center: [0.0, 0.0], radius: 1.0 },
        h: Some(h),
        provenance: "test".into(),
        winding: zs.len() as i64,
        zero_tol: 0.0,
        winding_checks: 0,
    };
    let r = spectral_gap_report(&mk(&[c(0.3, 0.0), c(0.1, -0.2)], 0.1), 0.2).unwrap();
    assert_eq!(r.gap, 0.0);

    let p = 2f64.ln() - 0.5 * 3f64.ln();
    let set = mk(&[c(0.5, -0.02)], 0.1);
    let r = spectral_gap_report(&set, p).unwrap();
    assert!((r.gap - 0.2).abs() < 1e-15);
    assert_eq!(r.pressure, p);
    assert_eq!(r.bound, 0.0);
    assert!(r.difference > 0.0);
    let halved = spectral_gap_report(&mk(&[c(0.5, -0.02)], 0.2), p).unwrap();
    assert!((halved.gap - 0.5 * r.gap).abs() < 1e-15);
}

#[test]
fn eigenvalue_sets_use_log_modulus() {
    let eigs = [Complex64::from_polar(0.5, 1.0), Complex64::from_polar(1.0, -2.0)];
    let set = ResonanceSet::from_eigenvalues(&eigs, 0.01, "map");
    let r = spectral_gap_report(&set, 0.0).unwrap();
    assert!(r.gap.abs() < 1e-14);
    assert!((set.zeros[0].z.im / 0.01 - 0.5f64.ln()).abs() < 1e-14);
}

#[test]
fn resonance_csv_has_header() {
    let set = ResonanceSet::from_eigenvalues(&[c(0.5, 0.0)], 1.0, "x");
    let mut buf = Vec::new();
    set.write_csv(&mut buf).unwrap();
    let s = String::from_utf8(buf).unwrap();
    assert!(s.starts_with("re,im,multiplicity,residual\n"));
    let back: ResonanceSet = serde_json::from_str(&set.to_json().unwrap()).unwrap();
    assert_eq!(back.zeros, set.zeros);
}
