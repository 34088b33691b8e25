use num_complex::Complex64;

use crate::error::{Error, Result};

pub const SUPPORTED_QAM_ORDERS: [u32; 6] = [4, 16, 64, 256, 1024, 4096];

/// Square Gray-mapped QAM constellation scaled to unit average power.
///
/// The symbol index splits into an in-phase half (high bits) and a
/// quadrature half (low bits); each half is the Gray code of its level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QamConstellation {
    order: u32,
    bits_per_axis: u32,
    scale: f64,
}

impl QamConstellation {
    pub fn new(order: u32) -> Result<Self> {
        if !SUPPORTED_QAM_ORDERS.contains(&order) {
            return Err(Error::UnsupportedQamOrder(order));
        }
        let bits_per_axis = order.trailing_zeros() / 2;
        // E|s|^2 for levels ±1, ±3, … is 2(M-1)/3.
        let scale = (3.0 / (2.0 * (f64::from(order) - 1.0))).sqrt();
        Ok(Self {
            order,
            bits_per_axis,
            scale,
        })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn levels_per_axis(&self) -> u32 {
        1 << self.bits_per_axis
    }

    pub fn point(&self, index: u32) -> Complex64 {
        debug_assert!(index < self.order);
        let mask = self.levels_per_axis() - 1;
        let i = self.axis_level(gray_decode(index >> self.bits_per_axis));
        let q = self.axis_level(gray_decode(index & mask));
        Complex64::new(i, q) * self.scale
    }

    /// Nearest constellation index (hard decision).
    pub fn slice(&self, point: Complex64) -> u32 {
        let i = self.nearest_level(point.re / self.scale);
        let q = self.nearest_level(point.im / self.scale);
        (gray_encode(i) << self.bits_per_axis) | gray_encode(q)
    }

    fn axis_level(&self, level: u32) -> f64 {
        2.0 * f64::from(level) - f64::from(self.levels_per_axis() - 1)
    }

    fn nearest_level(&self, amplitude: f64) -> u32 {
        let top = self.levels_per_axis() - 1;
        let level = ((amplitude + f64::from(top)) / 2.0).round();
        level.clamp(0.0, f64::from(top)) as u32
    }
}

fn gray_encode(n: u32) -> u32 {
    n ^ (n >> 1)
}

fn gray_decode(mut g: u32) -> u32 {
    let mut n = g;
    while g > 1 {
        g >>= 1;
        n ^= g;
    }
    n
}
