//! Fractional DFT `G(k) = sum_j x(j) exp(-2 pi i j k delta)` through the
//! chirp-z (Bluestein) identity `jk = (j^2 + k^2 - (k - j)^2) / 2`: one
//! chirp multiply, one circular convolution of length `2m`, one chirp multiply.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// `exp(sign * i * pi * n^2 * delta)` with the phase reduced modulo 2 first.
fn chirp(n: usize, delta: f64, sign: f64) -> Complex64 {
    let n2 = (n as f64) * (n as f64);
    let mut t = n2 * delta;
    t -= 2.0 * (t * 0.5).floor();
    let (s, c) = (PI * t).sin_cos();
    Complex64::new(c, sign * s)
}

/// A planned transform for one length; reusable across calls and threads.
pub struct FrftPlan {
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FrftPlan {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 || !m.is_power_of_two() {
            return Err(Error::Size(m));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            m,
            forward: planner.plan_fft_forward(2 * m),
            inverse: planner.plan_fft_inverse(2 * m),
        })
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    /// Precomputes everything that depends only on `delta`.
    pub fn kernel(&self, delta: f64) -> FrftKernel {
        let m = self.m;
        let n = 2 * m;
        let zero = Complex64::new(0.0, 0.0);
        let chirp_out: Vec<Complex64> = (0..m).map(|j| chirp(j, delta, -1.0)).collect();
        // kernel exp(+i pi l^2 delta) for l in -(m-1)..=(m-1), wrapped
        let mut z = vec![zero; n];
        for l in 0..m {
            z[l] = chirp_out[l].conj();
        }
        for l in 1..m {
            z[n - l] = z[l];
        }
        self.forward.process(&mut z);
        // fold the inverse transform's 1/n into the kernel
        let scale = 1.0 / n as f64;
        for v in z.iter_mut() {
            *v *= scale;
        }
        FrftKernel {
            m,
            delta,
            chirp: chirp_out,
            spectrum: z,
        }
    }

    pub fn transform(&self, seq: &[Complex64], delta: f64) -> Result<Vec<Complex64>> {
        self.transform_with(&self.kernel(delta), seq)
    }

    pub fn transform_with(&self, kernel: &FrftKernel, seq: &[Complex64]) -> Result<Vec<Complex64>> {
        let m = self.m;
        if seq.len() != m {
            return Err(Error::Size(seq.len()));
        }
        if kernel.m != m {
            return Err(Error::Size(kernel.m));
        }
        let mut y = vec![Complex64::new(0.0, 0.0); 2 * m];
        for ((slot, &x), &c) in y.iter_mut().zip(seq).zip(&kernel.chirp) {
            *slot = x * c;
        }
        self.forward.process(&mut y);
        for (a, b) in y.iter_mut().zip(&kernel.spectrum) {
            *a *= b;
        }
        self.inverse.process(&mut y);
        Ok(y.iter().zip(&kernel.chirp).map(|(v, c)| v * c).collect())
    }
}

/// The `delta`-dependent half of a transform: output chirp and the spectrum
/// of the convolution kernel.
#[derive(Debug, Clone)]
pub struct FrftKernel {
    m: usize,
    delta: f64,
    chirp: Vec<Complex64>,
    spectrum: Vec<Complex64>,
}

impl FrftKernel {
    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// One-shot fractional transform; plans internally.
pub fn frft(seq: &[Complex64], delta: f64) -> Result<Vec<Complex64>> {
    FrftPlan::new(seq.len())?.transform(seq, delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn direct(seq: &[Complex64], delta: f64) -> Vec<Complex64> {
        let m = seq.len();
        (0..m)
            .map(|k| {
                seq.iter()
                    .enumerate()
                    .map(|(j, &x)| {
                        let ang = -2.0 * PI * (j * k) as f64 * delta;
                        x * Complex64::new(ang.cos(), ang.sin())
                    })
                    .sum()
            })
            .collect()
    }

    fn random_seq(rng: &mut ChaCha8Rng, m: usize) -> Vec<Complex64> {
        (0..m)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn reduces_to_dft() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let seq = random_seq(&mut rng, 32);
        let mut dft = seq.clone();
        FftPlanner::new().plan_fft_forward(32).process(&mut dft);
        let got = frft(&seq, 1.0 / 32.0).unwrap();
        for (a, b) in got.iter().zip(&dft) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn zero_delta_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let seq = random_seq(&mut rng, 16);
        let total: Complex64 = seq.iter().sum();
        for g in frft(&seq, 0.0).unwrap() {
            assert!((g - total).norm() < 1e-12);
        }
    }

    #[test]
    fn matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let seq = random_seq(&mut rng, 64);
        let got = frft(&seq, 0.013).unwrap();
        let want = direct(&seq, 0.013);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn rejects_non_power_of_two() {
        let seq = vec![Complex64::new(1.0, 0.0); 12];
        assert!(matches!(frft(&seq, 0.1), Err(Error::Size(12))));
        assert!(matches!(FrftPlan::new(0), Err(Error::Size(0))));
    }
}
