//! Reference generators for the null hypothesis.
//!
//! [`Pcg64`] is PCG XSL-RR 128/64 with the reference multiplier and seeding,
//! matching the published C implementation word for word. [`LogisticMap`] is
//! a deliberately simple chaotic generator used to show the test picks up
//! weak sources.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::sequence::BinarySequence;

/// 128-bit LCG multiplier of the reference implementation.
pub const PCG_MULTIPLIER: u128 = 0x2360_ED05_1FC6_5DA4_4385_DF64_9FCC_F645;

/// PCG XSL-RR 128/64 state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pcg64 {
    state: u128,
    increment: u128,
}

impl Pcg64 {
    /// Seeds like the reference `srandom_r`: the increment is
    /// `(stream << 1) | 1` and the seed is mixed in between two steps.
    pub fn new(seed: u128, stream: u128) -> Self {
        let increment = (stream << 1) | 1;
        let mut rng = Self {
            state: 0,
            increment,
        };
        rng.step();
        rng.state = rng.state.wrapping_add(seed);
        rng.step();
        rng
    }

    /// Restores a raw state. The increment must be odd.
    pub fn from_parts(state: u128, increment: u128) -> Result<Self> {
        if increment & 1 == 0 {
            return Err(Error::Domain("PCG increment must be odd"));
        }
        Ok(Self { state, increment })
    }

    /// Current LCG state.
    pub fn state(&self) -> u128 {
        self.state
    }

    /// Stream increment (always odd).
    pub fn increment(&self) -> u128 {
        self.increment
    }

    #[inline]
    fn step(&mut self) {
        self.state = self
            .state
            .wrapping_mul(PCG_MULTIPLIER)
            .wrapping_add(self.increment);
    }

    /// Advances the state and returns the XSL-RR permutation of the new
    /// state.
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.step();
        let rot = (self.state >> 122) as u32;
        let xsl = ((self.state >> 64) as u64) ^ (self.state as u64);
        xsl.rotate_right(rot)
    }

    /// Uniform draw in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// `n_bits` bits taken most-significant first from successive output words.
pub fn pcg64_bits(rng: &mut Pcg64, n_bits: usize, source_id: &str) -> Result<BinarySequence> {
    if n_bits == 0 {
        return Err(Error::Empty);
    }
    let mut bits = Vec::with_capacity(n_bits);
    while bits.len() < n_bits {
        let word = rng.next_u64();
        let take = (n_bits - bits.len()).min(64);
        bits.extend((0..take).map(|i| ((word >> (63 - i)) & 1) as u8));
    }
    BinarySequence::new(bits, source_id)
}

/// The logistic map `x ← 4x(1 − x)` read through a threshold at 0.5.
///
/// Whenever the orbit lands on 0, 1 or the fixed point 3/4 it is re-seeded
/// from a fresh uniform draw.
#[derive(Debug, Clone)]
pub struct LogisticMap {
    x: f64,
    reseed: Pcg64,
    reseeds: usize,
}

/// Control parameter of the map.
pub const LOGISTIC_R: f64 = 4.0;

fn valid_logistic_seed(x: f64) -> bool {
    x > 0.0 && x < 1.0 && x != 0.25 && x != 0.5 && x != 0.75
}

impl LogisticMap {
    /// Starts the orbit at `seed`; `reseed` supplies replacement seeds.
    pub fn new(seed: f64, reseed: Pcg64) -> Result<Self> {
        if !valid_logistic_seed(seed) {
            return Err(Error::Domain(
                "logistic seed must lie in (0,1) and avoid 1/4, 1/2, 3/4",
            ));
        }
        Ok(Self {
            x: seed,
            reseed,
            reseeds: 0,
        })
    }

    /// Current orbit value.
    pub fn value(&self) -> f64 {
        self.x
    }

    /// How many times the orbit was re-seeded.
    pub fn reseeds(&self) -> usize {
        self.reseeds
    }

    /// One iteration; returns the new value.
    pub fn step(&mut self) -> f64 {
        let next = LOGISTIC_R * self.x * (1.0 - self.x);
        self.x = if next > 0.0 && next < 1.0 && next != 0.75 {
            next
        } else {
            self.reseeds += 1;
            self.fresh_seed()
        };
        self.x
    }

    fn fresh_seed(&mut self) -> f64 {
        loop {
            let x = self.reseed.next_f64();
            if valid_logistic_seed(x) {
                return x;
            }
        }
    }

    /// One output bit: whether the next value exceeds 0.5.
    pub fn next_bit(&mut self) -> u8 {
        u8::from(self.step() > 0.5)
    }
}

/// Bits from a logistic-map orbit started at `seed` after `burn_in`
/// discarded steps.
pub fn logistic_bits(seed: f64, n_bits: usize, burn_in: usize) -> Result<BinarySequence> {
    let reseed = Pcg64::new(seed.to_bits() as u128, 0);
    let mut map = LogisticMap::new(seed, reseed)?;
    logistic_bits_from(&mut map, n_bits, burn_in, &format!("logistic:{seed}"))
}

/// Like [`logistic_bits`], driving an existing map.
pub fn logistic_bits_from(
    map: &mut LogisticMap,
    n_bits: usize,
    burn_in: usize,
    source_id: &str,
) -> Result<BinarySequence> {
    if n_bits == 0 {
        return Err(Error::Empty);
    }
    for _ in 0..burn_in {
        map.step();
    }
    let bits = (0..n_bits).map(|_| map.next_bit()).collect();
    BinarySequence::new(bits, source_id)
}
