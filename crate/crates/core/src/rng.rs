//! Counter-based complex Gaussian streams.
//!
//! Every stream is addressed by `(key, stream)`; the generator behind it is a
//! ChaCha8 keystream, so drawing trial `t` never depends on how many other
//! trials were drawn before it or on which thread draws it.

use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Domain tags separating the streams of unrelated consumers of one seed.
pub const DOMAIN_MODEL: u64 = 0x6d6f_6465_6c00_0001;
pub const DOMAIN_TRIALS: u64 = 0x7472_6961_6c00_0002;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a user seed with a domain tag into a generator key.
pub fn derive_key(seed: u64, domain: u64) -> u64 {
    splitmix64(seed ^ splitmix64(domain))
}

pub struct GaussianStream {
    rng: ChaCha8Rng,
}

impl GaussianStream {
    pub fn new(key: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(key);
        rng.set_stream(stream);
        Self { rng }
    }

    /// Uniform on `(0, 1]`.
    pub fn open_uniform(&mut self) -> f64 {
        1.0 - self.rng.random::<f64>()
    }

    /// Circularly symmetric complex Gaussian with unit total variance
    /// (real and imaginary parts each N(0, 1/2)), by Box-Muller.
    pub fn complex_normal(&mut self) -> Complex<f64> {
        let u1 = self.open_uniform();
        let u2 = self.rng.random::<f64>();
        let radius = (-u1.ln()).sqrt();
        let angle = 2.0 * PI * u2;
        Complex::new(radius * angle.cos(), radius * angle.sin())
    }

    /// A `rows x cols` matrix of i.i.d. unit-variance complex Gaussians,
    /// filled in column-major order.
    pub fn complex_matrix(&mut self, rows: usize, cols: usize) -> DMatrix<Complex<f64>> {
        DMatrix::from_fn(rows, cols, |_, _| self.complex_normal())
    }
}
