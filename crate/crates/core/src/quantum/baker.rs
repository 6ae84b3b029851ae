use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMat;

/// Half-shifted DFT `(F_N)_{kl} = N^(-1/2) exp(-2 pi i (k + 1/2)(l + 1/2) / N)`.
pub fn shifted_dft(n: usize) -> CMat {
    let s = (n as f64).sqrt().recip();
    Mat::from_fn(n, n, |k, l| {
        let a = -2.0 * std::f64::consts::PI * (k as f64 + 0.5) * (l as f64 + 0.5) / n as f64;
        Complex64::from_polar(s, a)
    })
}

/// Balazs–Voros quantization of the three-branch baker map:
/// `F_N^{-1} (F_{N/3} + F_{N/3} + F_{N/3})`, with the middle block dropped
/// when `open_middle`.
pub fn open_baker(n: usize, open_middle: bool) -> Result<CMat> {
    if n == 0 || n % 3 != 0 {
        return Err(Error::Parameter(format!("baker dimension {n} is not a positive multiple of 3")));
    }
    let m = n / 3;
    let fm = shifted_dft(m);
    let mut blocks = Mat::from_fn(n, n, |_, _| Complex64::new(0.0, 0.0));
    for b in 0..3 {
        if open_middle && b == 1 {
            continue;
        }
        for r in 0..m {
            for c in 0..m {
                blocks[(b * m + r, b * m + c)] = fm[(r, c)];
            }
        }
    }
    // F_N is symmetric and unitary, so its inverse is its conjugate
    let finv = shifted_dft(n).adjoint().to_owned();
    Ok(&finv * &blocks)
}
