// SPDX-License-Identifier: Apache-2.0

//! Two's-complement words of parametric width and saturating arithmetic.
//!
//! All arithmetic is carried out on `i64`, which gives far more than the two
//! bits of headroom the generator needs above a 24-bit word, so nothing wraps
//! before a saturation stage clips it.

use crate::{Error, Result};

pub const MIN_WIDTH: u32 = 4;
pub const MAX_WIDTH: u32 = 24;

/// A signed two's-complement value together with its bit width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Word {
    value: i64,
    width: u32,
}

impl Word {
    /// Creates a word, rejecting values the width cannot hold.
    pub fn new(value: i64, width: u32) -> Result<Self> {
        check_width(width)?;
        if value < min_value(width) || value > max_value(width) {
            return Err(Error::ValueOutOfRange { value, width });
        }
        Ok(Word { value, width })
    }

    /// Creates a word, clipping `value` into the representable range.
    pub fn saturating(value: i64, width: u32) -> Result<Self> {
        check_width(width)?;
        Ok(Word {
            value: value.clamp(min_value(width), max_value(width)),
            width,
        })
    }

    pub fn zero(width: u32) -> Result<Self> {
        Word::new(0, width)
    }

    pub fn value(self) -> i64 {
        self.value
    }

    pub fn width(self) -> u32 {
        self.width
    }

    /// Saturating sum of two words of the same width.
    pub fn saturating_add(self, rhs: Word) -> Result<Word> {
        self.same_width(rhs)?;
        Word::saturating(self.value + rhs.value, self.width)
    }

    /// Saturating difference of two words of the same width.
    pub fn saturating_sub(self, rhs: Word) -> Result<Word> {
        self.same_width(rhs)?;
        Word::saturating(self.value - rhs.value, self.width)
    }

    fn same_width(self, rhs: Word) -> Result<()> {
        if self.width != rhs.width {
            return Err(Error::WidthMismatch {
                expected: self.width,
                actual: rhs.width,
            });
        }
        Ok(())
    }
}

impl std::fmt::Display for Word {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.value)
    }
}

pub fn check_width(width: u32) -> Result<()> {
    if (MIN_WIDTH..=MAX_WIDTH).contains(&width) {
        Ok(())
    } else {
        Err(Error::InvalidWidth(width))
    }
}

/// Smallest value of an `width`-bit two's-complement word.
pub const fn min_value(width: u32) -> i64 {
    -(1i64 << (width - 1))
}

/// Largest value of an `width`-bit two's-complement word.
pub const fn max_value(width: u32) -> i64 {
    (1i64 << (width - 1)) - 1
}

/// Clipping interval of a saturating adder or subtracter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SatBound {
    lower: i64,
    upper: i64,
}

impl SatBound {
    pub fn new(lower: i64, upper: i64) -> Result<Self> {
        if lower > 0 || upper < 0 {
            return Err(Error::InvalidBound { lower, upper });
        }
        Ok(SatBound { lower, upper })
    }

    /// The bound `(-y, y)`.
    pub fn symmetric(y: i64) -> Result<Self> {
        SatBound::new(-y, y)
    }

    pub fn lower(self) -> i64 {
        self.lower
    }

    pub fn upper(self) -> i64 {
        self.upper
    }

    /// Whether both limits fit a `width`-bit word widened by `headroom` bits.
    pub fn fits(self, width: u32, headroom: u32) -> bool {
        let w = width + headroom;
        self.lower >= min_value(w) && self.upper <= max_value(w)
    }
}

/// Hard limiter: `lower` below the interval, `upper` above it, identity inside.
#[inline]
pub fn sat(x: i64, bound: SatBound) -> i64 {
    if x <= bound.lower {
        bound.lower
    } else if x >= bound.upper {
        bound.upper
    } else {
        x
    }
}

/// Saturating adder: `sat(a + b)`.
#[inline]
pub fn sat_add(a: Word, b: i64, bound: SatBound) -> i64 {
    debug_assert!(bound.fits(a.width, 2));
    sat(a.value + b, bound)
}

/// Saturating subtracter: `sat(a - b)`.
#[inline]
pub fn sat_sub(a: i64, b: i64, bound: SatBound) -> i64 {
    sat(a - b, bound)
}

/// Changes the width of a word.
///
/// Widening preserves the value. Narrowing drops the `R - R'` low bits with an
/// arithmetic shift (rounding toward minus infinity) and then saturates into
/// the narrower range.
pub fn resize(x: Word, new_width: u32) -> Result<Word> {
    check_width(new_width)?;
    if new_width >= x.width {
        return Word::new(x.value, new_width);
    }
    Word::saturating(x.value >> (x.width - new_width), new_width)
}

/// Brings a wide accumulator value back to a `width`-bit word by dropping
/// `shift` fractional bits (floor) and saturating.
pub fn rescale(wide: i64, shift: u32, width: u32) -> Result<Word> {
    Word::saturating(wide >> shift, width)
}

/// `floor(sum / len)` for a power-of-two `len`, i.e. an arithmetic right shift.
pub fn avg_floor(sum: i64, len: u64) -> Result<i64> {
    if !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(len));
    }
    Ok(sum >> len.trailing_zeros())
}
