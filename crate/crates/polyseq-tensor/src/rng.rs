//! Deterministic random streams. SplitMix64 for sequential draws plus a
//! stateless counter hash for dropout masks, so a mask depends only on
//! (seed, op id, step, element index) and never on evaluation order.

#[derive(Debug, Clone)]
pub struct SplitMix64(u64);

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        mix(self.0)
    }

    /// Uniform in `0..n` (n > 0).
    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    /// Uniform in `[0, 1)`.
    pub fn f64(&mut self) -> f64 {
        to_unit(self.next_u64())
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        let u1 = (self.f64()).max(1e-300);
        let u2 = self.f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            items.swap(i, self.below(i + 1));
        }
    }
}

#[inline]
fn mix(v: u64) -> u64 {
    let mut z = v;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn to_unit(v: u64) -> f64 {
    (v >> 11) as f64 / (1u64 << 53) as f64
}

/// Combine stream components into one key.
pub fn stream_key(seed: u64, op_id: u64, step: u64) -> u64 {
    mix(seed
        ^ mix(op_id.wrapping_mul(0xA24B_AED4_963E_E407))
        ^ mix(step.wrapping_mul(0x9FB2_1C65_1E98_DF25)))
}

/// Uniform in `[0, 1)` for element `index` of stream `key`.
pub fn counter_uniform(key: u64, index: u64) -> f64 {
    to_unit(mix(key ^ index.wrapping_mul(0xD6E8_FEB8_6659_FD93)))
}
