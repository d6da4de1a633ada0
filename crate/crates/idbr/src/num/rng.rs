//! Counter-based pseudo-random generator and the distribution draws the
//! model needs.
//!
//! The generator is a SplitMix-style bijective mix over a 64-bit counter,
//! keyed by `(seed, stream)`. State is three words, every output is a pure
//! function of the state, and distinct streams under the same seed are
//! statistically independent sequences. That is what makes chains,
//! replications, and prediction rows safely splittable: give each its own
//! stream and never share.

use crate::error::{Error, Result};
use crate::math;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const INV_2_53: f64 = 1.0 / 9_007_199_254_740_992.0; // 2^-53

#[inline]
fn mix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a fresh 64-bit seed from a base seed and a salt.
///
/// Used by the simulation harness to give every replication its own
/// sampler seed while staying a pure function of the study seed.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    mix64(mix64(seed ^ GOLDEN).wrapping_add(salt.wrapping_mul(GOLDEN)))
}

/// Seeded, streamed random number generator.
///
/// Identical `(seed, stream)` give a bit-identical `u64` sequence on every
/// platform; the floating-point draws are pure arithmetic on that sequence.
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    stream: u64,
    counter: u64,
    key: u64,
}

impl Rng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let key = mix64(mix64(seed.wrapping_add(GOLDEN)) ^ stream.wrapping_mul(GOLDEN));
        Rng { seed, stream, counter: 0, key }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Next raw 64-bit word.
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform draw on `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64) * INV_2_53
    }

    /// Standard normal draw (Box–Muller; consumes exactly two uniforms).
    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform(); // (0, 1], keeps the log finite
        let u2 = self.uniform();
        math::sqrt(-2.0 * math::ln(u1)) * math::cos(core::f64::consts::TAU * u2)
    }

    /// Normal draw with the given mean and standard deviation.
    pub fn normal(&mut self, mean: f64, sd: f64) -> Result<f64> {
        if !mean.is_finite() || !sd.is_finite() || sd < 0.0 {
            return Err(Error::Domain { op: "draw_normal", value: sd });
        }
        Ok(mean + sd * self.standard_normal())
    }

    /// Bernoulli draw; returns `true` with probability `prob`.
    pub fn bernoulli(&mut self, prob: f64) -> Result<bool> {
        if !(0.0..=1.0).contains(&prob) {
            return Err(Error::Domain { op: "draw_bernoulli", value: prob });
        }
        Ok(self.uniform() < prob)
    }

    /// Gamma draw with the given shape and unit scale.
    pub fn gamma(&mut self, shape: f64) -> Result<f64> {
        if !(shape > 0.0) || !shape.is_finite() {
            return Err(Error::Domain { op: "draw_gamma", value: shape });
        }
        Ok(self.gamma_raw(shape))
    }

    /// Beta draw as a ratio of gamma draws: `G(p) / (G(p) + G(q))`.
    pub fn beta(&mut self, p: f64, q: f64) -> Result<f64> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::Domain { op: "draw_beta", value: p });
        }
        if !(q > 0.0) || !q.is_finite() {
            return Err(Error::Domain { op: "draw_beta", value: q });
        }
        let g1 = self.gamma_raw(p);
        let g2 = self.gamma_raw(q);
        let total = g1 + g2;
        if total == 0.0 {
            // Both gammas underflowed: Beta(p, q) with p, q → 0 degenerates
            // to a Bernoulli(p / (p + q)) on {0, 1}.
            return Ok(if self.uniform() * (p + q) < p { 1.0 } else { 0.0 });
        }
        Ok(g1 / total)
    }

    fn gamma_raw(&mut self, shape: f64) -> f64 {
        if shape < 1.0 {
            // Boost: G(a) = G(a + 1) · U^(1/a).
            let g = self.gamma_ge1(shape + 1.0);
            let u = self.uniform();
            return g * math::exp(math::ln(u) / shape);
        }
        self.gamma_ge1(shape)
    }

    /// Marsaglia–Tsang squeeze-and-reject sampler, valid for shape ≥ 1.
    fn gamma_ge1(&mut self, shape: f64) -> f64 {
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / math::sqrt(9.0 * d);
        loop {
            let x = self.standard_normal();
            let t = 1.0 + c * x;
            if t <= 0.0 {
                continue;
            }
            let v = t * t * t;
            let u = self.uniform();
            if u < 1.0 - 0.0331 * x * x * x * x {
                return d * v;
            }
            if math::ln(u) < 0.5 * x * x + d * (1.0 - v + math::ln(v)) {
                return d * v;
            }
        }
    }
}
