//! Binary (quantics) discretization of an interval; site 0 carries the most significant bit.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuanticsGrid {
    x_min: f64,
    x_max: f64,
    bits: usize,
}

impl QuanticsGrid {
    pub const MAX_BITS: usize = 52;

    pub fn new(x_min: f64, x_max: f64, bits: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(Error::Invalid(format!("empty interval [{}, {})", x_min, x_max)));
        }
        if bits == 0 || bits > Self::MAX_BITS {
            return Err(Error::Invalid(format!("bit count {} outside 1..={}", bits, Self::MAX_BITS)));
        }
        Ok(QuanticsGrid { x_min, x_max, bits })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn local_dims(&self) -> Vec<usize> {
        vec![2; self.bits]
    }

    pub fn points(&self) -> u64 {
        1u64 << self.bits
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / self.points() as f64
    }

    /// Grid point with integer label `n` in `0..2^bits`.
    pub fn point(&self, n: u64) -> f64 {
        self.x_min + (self.x_max - self.x_min) * (n as f64 / self.points() as f64)
    }

    pub fn digits_to_int(&self, digits: &[usize]) -> Result<u64> {
        if digits.len() != self.bits {
            return Err(Error::Dimension(format!("{} digits for a {}-bit grid", digits.len(), self.bits)));
        }
        digits.iter().try_fold(0u64, |n, &s| match s {
            0 | 1 => Ok((n << 1) | s as u64),
            _ => Err(Error::Dimension(format!("digit {} is not binary", s))),
        })
    }

    pub fn int_to_digits(&self, n: u64) -> Vec<usize> {
        (0..self.bits).map(|l| ((n >> (self.bits - 1 - l)) & 1) as usize).collect()
    }

    pub fn decode(&self, digits: &[usize]) -> Result<f64> {
        Ok(self.point(self.digits_to_int(digits)?))
    }

    /// Digits of the largest grid point not above `x`.
    pub fn encode(&self, x: f64) -> Result<Vec<usize>> {
        if !(x >= self.x_min && x < self.x_max) {
            return Err(Error::Domain { value: x, min: self.x_min, max: self.x_max });
        }
        let top = self.points() - 1;
        let scaled = (x - self.x_min) / (self.x_max - self.x_min) * self.points() as f64;
        let mut n = (scaled.floor().max(0.0) as u64).min(top);
        while n > 0 && self.point(n) > x {
            n -= 1;
        }
        while n < top && self.point(n + 1) <= x {
            n += 1;
        }
        Ok(self.int_to_digits(n))
    }
}
