use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::pow::{self, Target};
use crate::relkin::{gamma, RelError, Velocity};
use crate::Seconds;

/// How inter-block times are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MiningModel {
    /// Exponential waiting times.
    #[default]
    Poisson,
    /// Grind real SHA-256 nonces against a target of `2^(256 − difficulty_bits)`
    /// and convert the trial count to time. Only practical for small
    /// difficulties; used to validate the Poisson abstraction.
    HashGrind { difficulty_bits: u32 },
}

impl MiningModel {
    pub const MAX_GRIND_BITS: u32 = 24;
}

/// Independent random stream for node `node` under `seed`.
///
/// Streams are keyed by node index so adding a node leaves the samples of
/// existing nodes unchanged.
pub fn node_rng(seed: u64, node: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(node as u64);
    rng
}

/// Coordinate-frame block rate of a miner: its share of `1/blocktime`,
/// slowed by time dilation since hashing happens in proper time.
pub fn mining_rate(blocktime: Seconds, hashshare: f64, velocity: Velocity, c: f64) -> Result<f64, RelError> {
    Ok(hashshare / blocktime / gamma(velocity, c)?)
}

/// Draws the wait until this miner's next block, or `None` for a miner with
/// no hashpower.
pub fn next_mining_event<R: Rng + ?Sized>(
    rng: &mut R,
    blocktime: Seconds,
    hashshare: f64,
    velocity: Velocity,
    c: f64,
) -> Result<Option<Seconds>, RelError> {
    if hashshare <= 0.0 {
        return Ok(None);
    }
    let rate = mining_rate(blocktime, hashshare, velocity, c)?;
    let exp = Exp::new(rate).expect("rate is positive and finite");
    Ok(Some(exp.sample(rng)))
}

/// Hash-grinding counterpart of [`next_mining_event`]: mines a fresh random
/// header and scales the number of trials by the miner's hash rate.
pub fn next_grind_event<R: Rng + ?Sized>(
    rng: &mut R,
    blocktime: Seconds,
    hashshare: f64,
    velocity: Velocity,
    c: f64,
    difficulty_bits: u32,
) -> Result<Option<Seconds>, RelError> {
    if hashshare <= 0.0 {
        return Ok(None);
    }
    let g = gamma(velocity, c)?;
    let target = Target::power_of_two(256 - difficulty_bits).expect("difficulty_bits in 1..=24");
    let template: [u8; 16] = rng.random();
    let trials = match pow::mine(&template, target, 1 << 32) {
        Some(nonce) => nonce as f64 + 1.0,
        None => (1u64 << 32) as f64,
    };
    let trials_per_second = hashshare * (1u64 << difficulty_bits) as f64 / blocktime;
    Ok(Some(trials / trials_per_second * g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relkin::SPEED_OF_LIGHT as C;

    fn mean_wait(velocity: Velocity, samples: usize) -> f64 {
        let mut rng = node_rng(7, 0);
        (0..samples)
            .map(|_| next_mining_event(&mut rng, 600.0, 1.0, velocity, C).unwrap().unwrap())
            .sum::<f64>()
            / samples as f64
    }

    #[test]
    fn rest_frame_mean() {
        // sd of the mean is 600/√1e5 ≈ 1.9 s, so ±12 s is over 6 sigma
        let m = mean_wait(Velocity::ZERO, 100_000);
        assert!((588.0..=612.0).contains(&m), "{m}");
    }

    #[test]
    fn dilated_mean() {
        let m = mean_wait(Velocity::from_fraction(0.98, C), 100_000);
        let expected = 600.0 * 5.025_189_076_296;
        assert!((m / expected - 1.0).abs() < 0.02, "{m}");
    }

    #[test]
    fn zero_hashshare_never_mines() {
        let mut rng = node_rng(1, 0);
        assert_eq!(next_mining_event(&mut rng, 600.0, 0.0, Velocity::ZERO, C).unwrap(), None);
        assert_eq!(next_grind_event(&mut rng, 600.0, 0.0, Velocity::ZERO, C, 8).unwrap(), None);
    }

    #[test]
    fn superluminal_miner_rejected() {
        let mut rng = node_rng(1, 0);
        assert!(next_mining_event(&mut rng, 600.0, 1.0, Velocity(C), C).is_err());
    }

    #[test]
    fn streams_are_independent_of_other_nodes() {
        let a: Vec<u64> = (0..4).map(|_| node_rng(99, 3).random()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let x: u64 = node_rng(99, 3).random();
        let y: u64 = node_rng(99, 4).random();
        assert_ne!(x, y);
    }

    #[test]
    fn grind_matches_blocktime() {
        let mut rng = node_rng(11, 0);
        let n = 2000;
        let mean = (0..n)
            .map(|_| next_grind_event(&mut rng, 600.0, 0.5, Velocity::ZERO, C, 6).unwrap().unwrap())
            .sum::<f64>()
            / n as f64;
        // geometric trials with p = 1/64 scaled to a 1200 s mean
        assert!((mean / 1200.0 - 1.0).abs() < 0.1, "{mean}");
    }
}
