#![allow(dead_code)]

use faer::Mat;
use num_complex::Complex64;
use qpoincare::dynamics::*;
use qpoincare::linalg::CMat;
use qpoincare::quantum::*;
use qpoincare::section::*;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Sampled, partitioned and fitted return map of the 6:1 three-disk billiard at E = 1/2.
pub fn three_disk_data() -> ReturnMapData {
    let sys = ScatteringSystem::DiskBilliard(three_disk(6.0, 1.0).unwrap());
    let pts = sample_trapped_set(&sys, 0.5, 100_000, 30.0, 6.0).unwrap();
    let charts = build_sections(&sys, 0.5, &pts, 3.0).unwrap();
    let mut data = partition_blocks(&charts, &sys, 6 * 5000, &PartitionParams::default()).unwrap();
    data.fit_all(8, 1e-3).unwrap();
    data
}

/// Matrix elements `<psi_l^j, K psi_k^i>` of the kernel
/// `A exp(i S / h)` with quadratic `S`, between the raw scaled Hermite
/// functions of two charts, from the closed-form Gaussian integral and the
/// Hermite generating function.
pub struct QuadraticKernel {
    /// `S = s0 + sy y + syp y' + syy y^2 / 2 + syyp y y' + sypyp y'^2 / 2`.
    pub s0: f64,
    pub sy: f64,
    pub syp: f64,
    pub syy: f64,
    pub syyp: f64,
    pub sypyp: f64,
    pub amplitude: f64,
}

impl QuadraticKernel {
    pub fn elements(&self, target: &SectionProjector, source: &SectionProjector, h: f64) -> CMat {
        let i = Complex64::i();
        let (lj, li) = (target.length, source.length);
        let ([yj, ej], [yi, ei]) = (target.center, source.center);
        // exponent -x^T P x / 2 + b^T x + c with x = (y, y')
        let p = [[1.0 / (lj * lj) - i * self.syy / h, -i * self.syyp / h], [-i * self.syyp / h, 1.0 / (li * li) - i * self.sypyp / h]];
        let det = p[0][0] * p[1][1] - p[0][1] * p[1][0];
        // branch continuous from the positive definite case: product of
        // principal roots of the eigenvalues, which lie in Re > 0
        let tr = p[0][0] + p[1][1];
        let disc = (tr * tr - 4.0 * det).sqrt();
        let sqrt_det = (0.5 * (tr + disc)).sqrt() * (0.5 * (tr - disc)).sqrt();
        let q = [[p[1][1] / det, -p[0][1] / det], [-p[1][0] / det, p[0][0] / det]];
        let quad = |a: [Complex64; 2], b: [Complex64; 2]| {
            a[0] * (q[0][0] * b[0] + q[0][1] * b[1]) + a[1] * (q[1][0] * b[0] + q[1][1] * b[1])
        };
        let b0 = [
            c(yj / (lj * lj), 0.0) - i * ej / h + i * self.sy / h,
            c(yi / (li * li), 0.0) + i * ei / h + i * self.syp / h,
        ];
        let bs = [c(std::f64::consts::SQRT_2 / lj, 0.0), c(0.0, 0.0)];
        let bt = [c(0.0, 0.0), c(std::f64::consts::SQRT_2 / li, 0.0)];
        let c0 = c(-yj * yj / (2.0 * lj * lj) - yi * yi / (2.0 * li * li), 0.0) + i * ej * yj / h - i * ei * yi / h
            + i * self.s0 / h;
        let (cs, ct) = (-std::f64::consts::SQRT_2 * yj / lj, -std::f64::consts::SQRT_2 * yi / li);
        let norm = std::f64::consts::PI.powf(-0.5) / (lj * li).sqrt();
        let g0 = (c(norm * self.amplitude * 2.0 * std::f64::consts::PI, 0.0) / sqrt_det).ln() + 0.5 * quad(b0, b0) + c0;
        let gs = quad(bs, b0) + cs;
        let gt = quad(bt, b0) + ct;
        let gss = quad(bs, bs) - 1.0;
        let gtt = quad(bt, bt) - 1.0;
        let gst = quad(bs, bt);

        let (rj, ri) = (target.rank, source.rank);
        let mut m = Mat::from_fn(rj, ri, |_, _| c(0.0, 0.0));
        m[(0, 0)] = g0.exp();
        for k in 0..ri {
            if k > 0 {
                let km = k - 1;
                let prev2 = if km > 0 { m[(0, km - 1)] * (km as f64).sqrt() } else { c(0.0, 0.0) };
                m[(0, k)] = (gt * m[(0, km)] + gtt * prev2) / (k as f64).sqrt();
            }
            for l in 0..rj - 1 {
                let lf = l as f64;
                let a = if l > 0 { gss * lf.sqrt() * m[(l - 1, k)] } else { c(0.0, 0.0) };
                let b = if k > 0 { gst * (k as f64).sqrt() * m[(l, k - 1)] } else { c(0.0, 0.0) };
                m[(l + 1, k)] = (gs * m[(l, k)] + a + b) / (lf + 1.0).sqrt();
            }
        }
        m
    }
}

pub fn cat_map_block(h: f64) -> (BlockKernel, SectionProjector, SectionProjector, QuadraticKernel) {
    // (y', eta') -> (y, eta) = (2 y' + eta', y' + eta')
    let (a, b, d) = (2.0, 1.0, 1.0);
    let params = QuantParams::default();
    let source = build_projector_with(0, [0.1, 0.05], [0.3, 0.3], h, &params.projector).unwrap();
    let target = build_projector_with(1, [0.25, 0.15], [1.2, 1.2], h, &params.projector).unwrap();
    let span = |p: &SectionProjector| [p.nodes[0], *p.nodes.last().unwrap()];
    let gf = GeneratingFunction::interpolate(
        |y, yp| (d * y * y - 2.0 * y * yp + a * yp * yp) / (2.0 * b),
        |_, _| 0.0,
        2,
        span(&target),
        span(&source),
    )
    .unwrap();
    let kernel = BlockKernel::new(&gf, &target, &source, h, &params).unwrap();
    let oracle = QuadraticKernel {
        s0: 0.0,
        sy: 0.0,
        syp: 0.0,
        syy: d / b,
        syyp: -1.0 / b,
        sypyp: a / b,
        amplitude: (2.0 * std::f64::consts::PI * h * b.abs()).powf(-0.5),
    };
    (kernel, target, source, oracle)
}

