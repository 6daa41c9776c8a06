//! Seeded randomness with reproducible substreams.
//!
//! All sampling in this crate flows through `Prng`, a ChaCha20 stream cipher
//! generator seeded via `seed_from_u64`. Gaussians use Box-Muller on top of
//! the uniform stream, so a (seed, trial) pair pins every draw bit-exactly;
//! trial substreams map to ChaCha20 stream numbers.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub struct Prng {
    rng: ChaCha20Rng,
    spare_gaussian: Option<f64>,
}

impl Prng {
    pub fn seeded(seed: u64) -> Self {
        Prng { rng: ChaCha20Rng::seed_from_u64(seed), spare_gaussian: None }
    }

    /// Independent stream for a numbered trial under the same seed.
    pub fn substream(seed: u64, trial: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(trial.wrapping_add(1));
        Prng { rng, spare_gaussian: None }
    }

    /// Uniform draw in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    pub fn uniform_range(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    /// Standard normal via Box-Muller; draws come in cached pairs.
    pub fn gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare_gaussian.take() {
            return z;
        }
        // 1 - u keeps the log argument in (0, 1].
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare_gaussian = Some(radius * angle.sin());
        radius * angle.cos()
    }

    /// Complex standard normal (unit total variance).
    pub fn complex_gaussian(&mut self) -> Complex64 {
        Complex64::new(self.gaussian(), self.gaussian()) * std::f64::consts::FRAC_1_SQRT_2
    }
}
