use crate::error::{Error, Result};

pub const MAX_QB: u8 = 16;

/// Uniform midrise quantizer with `2^bits` levels spanning
/// `[-full_scale, +full_scale]`. There is no zero level; codeword `k`
/// reconstructs to `-full_scale + (k + 0.5) * step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Midrise {
    bits: u8,
    full_scale: f64,
    step: f64,
}

impl Midrise {
    pub fn new(bits: u8, full_scale: f64) -> Result<Self> {
        if !(1..=MAX_QB).contains(&bits) {
            return Err(Error::Config(format!("quantizer bits {bits} outside 1..={MAX_QB}")));
        }
        if !(full_scale.is_finite() && full_scale > 0.0) {
            return Err(Error::Config(format!("full scale {full_scale} must be positive")));
        }
        Ok(Self {
            bits,
            full_scale,
            step: 2.0 * full_scale / f64::from(1u32 << bits),
        })
    }

    pub fn bits(&self) -> u8 {
        self.bits
    }

    pub fn full_scale(&self) -> f64 {
        self.full_scale
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn levels(&self) -> u32 {
        1 << self.bits
    }

    /// Out-of-range inputs clip to the extreme codewords.
    pub fn quantize(&self, x: f64) -> u32 {
        let k = ((x + self.full_scale) / self.step).floor();
        k.clamp(0.0, f64::from(self.levels() - 1)) as u32
    }

    pub fn level(&self, codeword: u32) -> f64 {
        -self.full_scale + (f64::from(codeword) + 0.5) * self.step
    }

    pub fn clip(&self, x: f64) -> f64 {
        x.clamp(-self.full_scale, self.full_scale)
    }
}
