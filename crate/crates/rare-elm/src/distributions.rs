//! Weibull and exponential variates, their tails, and a splittable seeded stream.
//!
//! Every sampler here is an inverse transform of a single uniform, so each one
//! also has a pure `*_inverse` form that tests can drive with a fixed `U`.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Result};

/// Seeded ChaCha stream addressed by `(seed, stream_id)`.
///
/// Distinct stream ids select disjoint ChaCha keystreams under the same key, so
/// substreams never overlap. The sequence depends only on the pair, never on the
/// platform or on how many other streams exist.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Child stream `index`, derived from this stream's address only.
    ///
    /// The parent's position is irrelevant: `substream(k)` returns the same
    /// stream whether or not the parent has produced variates.
    pub fn substream(&self, index: u64) -> RandomStream {
        let id = splitmix64(self.stream_id ^ splitmix64(index.wrapping_add(0x5851_f42d_4c95_7f2d)));
        RandomStream::new(self.seed, id)
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform on `(0, 1]`, safe to pass to `ln`.
    pub fn uniform_pos(&mut self) -> f64 {
        1.0 - self.rng.random::<f64>()
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(rand_distr::StandardNormal)
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        use rand::seq::SliceRandom;
        items.shuffle(&mut self.rng);
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// The splitmix64 finalizer, used to spread stream indices.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Weibull shape with unit scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeibullParams {
    alpha: f64,
}

impl WeibullParams {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Shapes below one give subexponential tails.
    pub fn is_heavy_tailed(&self) -> bool {
        self.alpha < 1.0
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(domain(format!("shape must be finite and > 0, got {alpha}")))
    }
}

/// `ln P(X ≥ x) = -x^α`.
pub fn log_weibull_tail(alpha: f64, x: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(x >= 0.0) {
        return Err(domain(format!("x must be >= 0, got {x}")));
    }
    Ok(-x.powf(alpha))
}

/// `P(X ≥ x) = exp(-x^α)` for `X ~ Weib(α, 1)`.
pub fn weibull_tail(alpha: f64, x: f64) -> Result<f64> {
    log_weibull_tail(alpha, x).map(f64::exp)
}

/// `(-ln u)^(1/α)`.
#[inline]
pub fn weibull_inverse(alpha: f64, u: f64) -> f64 {
    (-u.ln()).powf(1.0 / alpha)
}

pub fn weibull_sample(params: WeibullParams, rng: &mut RandomStream) -> f64 {
    weibull_inverse(params.alpha, rng.uniform_pos())
}

/// Inverse CDF of the Weibull restricted to `[a, b)` at `u ∈ [0, 1)`.
///
/// With `b = ∞` and `u ∈ (0, 1]` this is `(a^α - ln u)^(1/α)`; the finite form
/// keeps `a^α - b^α` in the exponent so huge thresholds do not underflow.
pub fn truncated_weibull_inverse(alpha: f64, a: f64, b: f64, u: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(a >= 0.0) || !(a < b) {
        return Err(domain(format!("need 0 <= a < b, got a={a}, b={b}")));
    }
    Ok(truncated_inverse_unchecked(alpha, a, b, u))
}

#[inline]
pub(crate) fn truncated_inverse_unchecked(alpha: f64, a: f64, b: f64, u: f64) -> f64 {
    let aa = a.powf(alpha);
    let x = if b.is_infinite() {
        (aa - u.ln()).powf(1.0 / alpha)
    } else {
        // 1 - u(1 - e^{a^α - b^α}) = 1 + u·expm1(a^α - b^α)
        let q = (aa - b.powf(alpha)).exp_m1();
        (aa - (u * q).ln_1p()).powf(1.0 / alpha)
    };
    if b.is_finite() && x >= b {
        return b.next_down();
    }
    x.max(a)
}

/// Draw from the Weibull restricted to `[a, b)`; `b` may be `f64::INFINITY`.
pub fn truncated_weibull_sample(alpha: f64, a: f64, b: f64, rng: &mut RandomStream) -> Result<f64> {
    if b.is_infinite() {
        truncated_weibull_inverse(alpha, a, b, rng.uniform_pos())
    } else {
        truncated_weibull_inverse(alpha, a, b, rng.uniform())
    }
}

/// `-ln u`.
#[inline]
pub fn exp_inverse(u: f64) -> f64 {
    -u.ln()
}

pub fn exp_sample(rng: &mut RandomStream) -> f64 {
    exp_inverse(rng.uniform_pos())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn tail_values() {
        assert_eq!(weibull_tail(0.5, 0.0).unwrap(), 1.0);
        assert!(close(weibull_tail(0.5, 4.0).unwrap(), 0.135_335_283_236_612_7, 1e-14));
        assert!(close(weibull_tail(1.0, 3.0).unwrap(), 0.049_787_068_367_863_94, 1e-14));
    }

    #[test]
    fn tail_rejects_bad_input() {
        assert!(weibull_tail(0.5, -1.0).is_err());
        assert!(weibull_tail(0.0, 1.0).is_err());
        assert!(weibull_tail(-1.0, 1.0).is_err());
        assert!(weibull_tail(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn inverse_transform_at_fixed_u() {
        assert!(close(weibull_inverse(1.0, (-2.0f64).exp()), 2.0, 1e-14));
        assert!(close(weibull_inverse(0.5, (-3.0f64).exp()), 9.0, 1e-13));
        assert_eq!(exp_inverse(1.0), 0.0);
        assert!(close(exp_inverse((-5.0f64).exp()), 5.0, 1e-14));
    }

    #[test]
    fn truncated_endpoints() {
        assert_eq!(truncated_weibull_inverse(0.8, 2.0, 5.0, 0.0).unwrap(), 2.0);
        let x = truncated_weibull_inverse(1.0, 0.0, f64::INFINITY, (-1.7f64).exp()).unwrap();
        assert!(close(x, 1.7, 1e-14));
        let top = truncated_weibull_inverse(0.5, 1.0, 4.0, 1.0 - 1e-15).unwrap();
        assert!(top < 4.0 && top > 3.99);
        assert!(truncated_weibull_inverse(0.5, 4.0, 4.0, 0.5).is_err());
        assert!(truncated_weibull_inverse(0.5, 5.0, 4.0, 0.5).is_err());
    }

    #[test]
    fn truncation_survives_huge_thresholds() {
        let g = 1e15;
        let x = truncated_weibull_inverse(0.1, 0.5 * g, g, 0.3).unwrap();
        assert!(x >= 0.5 * g && x < g);
    }

    #[test]
    fn same_address_same_sequence() {
        let mut a = RandomStream::new(42, 7);
        let mut b = RandomStream::new(42, 7);
        let xs: Vec<u64> = (0..64).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..64).map(|_| b.next_u64()).collect();
        assert_eq!(xs, ys);
        let mut c = RandomStream::new(42, 8);
        assert_ne!(xs[0], c.next_u64());
    }

    #[test]
    fn substream_ignores_parent_position() {
        let mut parent = RandomStream::new(3, 1);
        let before = parent.substream(5).next_u64();
        for _ in 0..100 {
            parent.next_u64();
        }
        assert_eq!(before, parent.substream(5).next_u64());
        assert_ne!(parent.substream(5).next_u64(), parent.substream(6).next_u64());
    }

    #[test]
    fn uniform_ranges() {
        let mut r = RandomStream::new(1, 0);
        for _ in 0..10_000 {
            let u = r.uniform();
            assert!((0.0..1.0).contains(&u));
            let v = r.uniform_pos();
            assert!(v > 0.0 && v <= 1.0);
        }
    }

    #[test]
    fn heavy_tail_flag() {
        assert!(WeibullParams::new(0.5).unwrap().is_heavy_tailed());
        assert!(!WeibullParams::new(1.0).unwrap().is_heavy_tailed());
        assert!(WeibullParams::new(0.0).is_err());
    }
}
