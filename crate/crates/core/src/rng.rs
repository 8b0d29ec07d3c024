//! Seedable random number generation pinned to a fixed algorithm.
//!
//! Every randomized experiment in this workspace draws from [`SplitMix64`]
//! (Steele, Lea & Flood's 64-bit mixer over a Weyl sequence) so that a run is
//! reproducible from its seed alone, independent of platform or library
//! version. Derived distributions are pinned too:
//!
//! - `uniform01`: the top 53 bits of the next output scaled by 2^-53,
//! - `uniform_symmetric(d)`: `d * (2u - 1)` with `u` drawn from the open
//!   interval (0, 1), giving the open interval (-d, d),
//! - `standard_normal`: Box-Muller on two uniforms, second value cached.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::math;

const WEYL: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 generator: a Weyl counter passed through a 64-bit finalizer.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
    cached_normal: Option<f64>,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self {
            state: seed,
            cached_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(WEYL);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw from [0, 1) with 53-bit resolution.
    pub fn uniform01(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw from the open interval (0, 1).
    fn uniform_open(&mut self) -> f64 {
        loop {
            let bits = self.next_u64() >> 11;
            if bits != 0 {
                return bits as f64 * (1.0 / (1u64 << 53) as f64);
            }
        }
    }

    /// Uniform draw from the open interval (-delta, delta).
    pub fn uniform_symmetric(&mut self, delta: f64) -> f64 {
        delta * (2.0 * self.uniform_open() - 1.0)
    }

    /// Standard normal draw via Box-Muller.
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.cached_normal.take() {
            return z;
        }
        // u1 in (0, 1] keeps ln(u1) finite.
        let u1 = 1.0 - self.uniform01();
        let u2 = self.uniform01();
        let r = math::sqrt(-2.0 * math::ln(u1));
        let theta = 2.0 * core::f64::consts::PI * u2;
        self.cached_normal = Some(r * math::sin(theta));
        r * math::cos(theta)
    }

    /// n-by-k matrix of independent standard normal entries, column-major.
    pub fn gaussian_matrix(&mut self, n: usize, k: usize) -> DMatrix<f64> {
        let data: Vec<f64> = (0..n * k).map(|_| self.standard_normal()).collect();
        DMatrix::from_vec(n, k, data)
    }
}
