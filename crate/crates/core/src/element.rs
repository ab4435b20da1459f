//! Per-element reflection states.
//!
//! Every element carries one 0°/180° phase bit per polarization, giving four
//! distinct states. [`STATES`] fixes the order in which searches try them.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Phase configuration of a single reflecting element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ElementState {
    /// Horizontal polarization shifted by 180°.
    pub h: bool,
    /// Vertical polarization shifted by 180°.
    pub v: bool,
}

pub const OFF: ElementState = ElementState { h: false, v: false };

/// Search order of the four states: (0,0), (1,0), (0,1), (1,1) as (h, v).
pub const STATES: [ElementState; 4] = [
    ElementState { h: false, v: false },
    ElementState { h: true, v: false },
    ElementState { h: false, v: true },
    ElementState { h: true, v: true },
];

impl ElementState {
    pub fn from_bits(h_bit: u8, v_bit: u8) -> Result<Self> {
        Ok(Self {
            h: bit_to_bool(h_bit)?,
            v: bit_to_bool(v_bit)?,
        })
    }

    pub fn h_bit(self) -> u8 {
        self.h as u8
    }

    pub fn v_bit(self) -> u8 {
        self.v as u8
    }

    /// `h_bit + 2 * v_bit`; equals the position in [`STATES`].
    pub fn code(self) -> u8 {
        self.h_bit() + 2 * self.v_bit()
    }

    pub fn from_code(code: u8) -> Option<Self> {
        STATES.get(code as usize).copied()
    }

    pub fn flipped(self) -> Self {
        Self { h: !self.h, v: !self.v }
    }
}

fn bit_to_bool(bit: u8) -> Result<bool> {
    match bit {
        0 => Ok(false),
        1 => Ok(true),
        other => Err(Error::InvalidBit(other)),
    }
}

/// Reflection coefficient `alpha * exp(j * pi * bit)` of one polarization branch.
pub fn element_coefficient(bit: u8, alpha: f64) -> Result<Complex64> {
    let flipped = bit_to_bool(bit)?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidAlpha(alpha));
    }
    Ok(Complex64::new(if flipped { -alpha } else { alpha }, 0.0))
}
