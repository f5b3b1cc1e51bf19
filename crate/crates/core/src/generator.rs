// SPDX-License-Identifier: Apache-2.0

//! Counter-driven iterative activation generator.
//!
//! For an input word `n` the generator averages, over the `N` counter offsets
//! `U(k)`, the result of a saturating add followed by a saturating subtract:
//!
//! ```text
//! f(n) = floor( (1/N) * sum_k sat( sat(n + U(k), adder) - U(k), subtracter ) )
//! ```
//!
//! The offsets are midpoint-anchored on a uniform grid of stride
//! `S = 2 U_MAX / N`. At the maximum length `N = 2^(R-1)` the stride is one
//! LSB and the midpoints fall on half-LSB positions, so the datapath is
//! evaluated in half-LSB units (one extra counter bit). Every other length
//! yields even strides and integer offsets; the result is the same either way.

use crate::closedform::{m_limit, u_max, Rational};
use crate::fixedpoint::{avg_floor, check_width, sat, sat_sub, SatBound, Word};
use crate::{Error, Result};

/// Which member of the family the generator produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorMode {
    /// Square-law nonlinearity, tanh-shaped, range `[-2^(R-2), 2^(R-2)]`.
    Symmetric,
    /// `floor(SQNL / 2) + 2^(R-3)`: logistic-shaped, range `[0, 2^(R-2)]`.
    LogSqnl,
    /// SQLU / SQ_Softplus family. `alpha = 0` is softplus-like.
    Asymmetric { alpha: i64 },
    /// Scaled SQNL whose adder saturates at the external level `C`.
    Gated,
}

impl GeneratorMode {
    pub fn name(&self) -> &'static str {
        match self {
            GeneratorMode::Symmetric => "symmetric",
            GeneratorMode::LogSqnl => "logsqnl",
            GeneratorMode::Asymmetric { .. } => "asymmetric",
            GeneratorMode::Gated => "gated",
        }
    }
}

/// Placement of the counter offsets inside each stride.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Anchor {
    /// `U(k) = -U_MAX + S/2 + (k-1) S`, symmetric about zero.
    #[default]
    Midpoint,
    /// `U(k) = -U_MAX + (k-1) S`; kept for experimentation.
    Endpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorConfig {
    width: u32,
    len: u64,
    mode: GeneratorMode,
    anchor: Anchor,
}

impl GeneratorConfig {
    /// Validates width, sequence length (a power of two in `[2, 2^(R-1)]`)
    /// and, for the asymmetric mode, `0 <= alpha <= M/2`.
    pub fn new(width: u32, len: u64, mode: GeneratorMode) -> Result<Self> {
        check_width(width)?;
        let max = m_limit(width) as u64;
        if !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(len));
        }
        if !(2..=max).contains(&len) {
            return Err(Error::InvalidSequenceLength { len, max, width });
        }
        if let GeneratorMode::Asymmetric { alpha } = mode {
            let max = m_limit(width) / 2;
            if alpha < 0 || alpha > max {
                return Err(Error::AlphaOutOfRange { alpha, max });
            }
        }
        Ok(GeneratorConfig {
            width,
            len,
            mode,
            anchor: Anchor::Midpoint,
        })
    }

    pub fn with_anchor(mut self, anchor: Anchor) -> Self {
        self.anchor = anchor;
        self
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    /// Sequence length `N`.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn mode(&self) -> GeneratorMode {
        self.mode
    }

    pub fn anchor(&self) -> Anchor {
        self.anchor
    }

    pub fn u_max(&self) -> i64 {
        u_max(self.width)
    }

    pub fn m(&self) -> i64 {
        m_limit(self.width)
    }

    /// Clock cycles per activation: one per counter state.
    pub fn cycles(&self) -> u64 {
        self.len
    }

    /// Accumulator width in bits, including the half-LSB bit.
    pub fn accumulator_width(&self) -> u32 {
        self.width + self.len.trailing_zeros() + 2
    }

    fn check_scale(&self, c_scale: Option<i64>) -> Result<()> {
        match (self.mode, c_scale) {
            (GeneratorMode::Gated, None) => Err(Error::MissingScale),
            (GeneratorMode::Gated, Some(c)) if c < 0 || c > self.u_max() => {
                Err(Error::ScaleOutOfRange {
                    c,
                    max: self.u_max(),
                })
            }
            (GeneratorMode::Gated, Some(_)) => Ok(()),
            (_, Some(_)) => Err(Error::UnexpectedScale),
            (_, None) => Ok(()),
        }
    }

    /// Adder and subtracter bounds, in half-LSB units.
    fn bounds(&self, c_scale: Option<i64>) -> (SatBound, SatBound) {
        let (u, m) = (self.u_max(), self.m());
        let adder = match self.mode {
            GeneratorMode::Symmetric | GeneratorMode::LogSqnl => SatBound::symmetric(2 * u),
            GeneratorMode::Asymmetric { .. } => SatBound::new(-2 * u, 2 * m),
            GeneratorMode::Gated => SatBound::symmetric(2 * c_scale.unwrap_or(0)),
        };
        let subtracter = SatBound::symmetric(2 * m);
        // all limits are non-negative multiples validated by the config
        (
            adder.expect("adder bound"),
            subtracter.expect("subtracter bound"),
        )
    }
}

/// The counter offsets `U(1..=N)`, stored in half-LSB units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sequence {
    half_units: Vec<i64>,
}

impl Sequence {
    pub fn len(&self) -> usize {
        self.half_units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.half_units.is_empty()
    }

    /// Offsets as `2 * U(k)`.
    pub fn half_units(&self) -> &[i64] {
        &self.half_units
    }

    pub fn values(&self) -> Vec<Rational> {
        self.half_units
            .iter()
            .map(|&h| Rational::new(h as i128, 2))
            .collect()
    }

    /// The offsets as integers, when none of them sits on a half LSB.
    pub fn integers(&self) -> Option<Vec<i64>> {
        self.half_units
            .iter()
            .map(|&h| (h % 2 == 0).then_some(h / 2))
            .collect()
    }
}

pub fn make_sequence(cfg: &GeneratorConfig) -> Sequence {
    let u = cfg.u_max();
    let len = cfg.len as i64;
    // stride in half units: 2 * (2 U_MAX / N)
    let stride = 4 * u / len;
    let first = match cfg.anchor {
        Anchor::Midpoint => -2 * u + stride / 2,
        Anchor::Endpoint => -2 * u,
    };
    let shift = match cfg.mode {
        GeneratorMode::Asymmetric { alpha } => -2 * u + 2 * alpha,
        _ => 0,
    };
    Sequence {
        half_units: (0..len).map(|k| first + k * stride + shift).collect(),
    }
}

/// Sum over the sequence of the saturating add/subtract terms, in half-LSB
/// units. The exact average is `sum / (2N)`.
fn accumulate(n: i64, cfg: &GeneratorConfig, seq: &Sequence, c_scale: Option<i64>) -> i64 {
    let (adder, subtracter) = cfg.bounds(c_scale);
    let n2 = 2 * n;
    seq.half_units
        .iter()
        .map(|&u2| sat_sub(sat(n2 + u2, adder), u2, subtracter))
        .sum()
}

fn check_input(n: Word, cfg: &GeneratorConfig, c_scale: Option<i64>) -> Result<()> {
    if n.width() != cfg.width {
        return Err(Error::WidthMismatch {
            expected: cfg.width,
            actual: n.width(),
        });
    }
    cfg.check_scale(c_scale)
}

fn post_process(avg: i64, cfg: &GeneratorConfig) -> Result<Word> {
    let out = match cfg.mode {
        GeneratorMode::LogSqnl => (avg >> 1) + (1i64 << (cfg.width - 3)),
        _ => avg,
    };
    // the symmetric range tops out at 2^(R-2), well inside the word; the clip
    // only guards the asymmetric mode's upper subtracter limit
    Word::saturating(out, cfg.width)
}

/// Evaluates the generator for one input word.
///
/// `c_scale` must be supplied exactly when the mode is [`GeneratorMode::Gated`],
/// with `0 <= c_scale <= U_MAX`.
pub fn eval(n: Word, cfg: &GeneratorConfig, c_scale: Option<i64>) -> Result<Word> {
    check_input(n, cfg, c_scale)?;
    let seq = make_sequence(cfg);
    eval_with(n.value(), cfg, &seq, c_scale)
}

fn eval_with(n: i64, cfg: &GeneratorConfig, seq: &Sequence, c: Option<i64>) -> Result<Word> {
    let sum = accumulate(n, cfg, seq, c);
    post_process(avg_floor(sum, 2 * cfg.len)?, cfg)
}

/// The exact (pre-rounding) average of the summation, before any LogSQNL
/// post-mapping.
pub fn exact_average(n: Word, cfg: &GeneratorConfig, c_scale: Option<i64>) -> Result<Rational> {
    check_input(n, cfg, c_scale)?;
    let seq = make_sequence(cfg);
    let sum = accumulate(n.value(), cfg, &seq, c_scale);
    Ok(Rational::new(sum as i128, 2 * cfg.len as i128))
}

/// Input/output map of a generator over its whole `R`-bit input domain.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingTable {
    width: u32,
    cycles: u64,
    outputs: Vec<i64>,
    exact: Vec<Rational>,
}

impl MappingTable {
    /// Builds a table from integer outputs for inputs `-2^(R-1) ..= 2^(R-1)-1`.
    pub fn from_values(width: u32, outputs: Vec<i64>) -> Result<Self> {
        check_width(width)?;
        let expected = 1usize << width;
        if outputs.len() != expected {
            return Err(Error::DimensionMismatch {
                context: "mapping table",
                expected,
                actual: outputs.len(),
            });
        }
        let exact = outputs
            .iter()
            .map(|&v| Rational::from_integer(v as i128))
            .collect();
        Ok(MappingTable {
            width,
            cycles: 0,
            outputs,
            exact,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    /// Clock cycles the hardware spends per entry (0 for tables not produced
    /// by a generator).
    pub fn cycles(&self) -> u64 {
        self.cycles
    }

    pub fn first_input(&self) -> i64 {
        -(1i64 << (self.width - 1))
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn outputs(&self) -> &[i64] {
        &self.outputs
    }

    /// Pre-rounding values of the same mapping.
    pub fn exact(&self) -> &[Rational] {
        &self.exact
    }

    pub fn get(&self, n: i64) -> Option<i64> {
        let idx = n.checked_sub(self.first_input())?;
        self.outputs.get(usize::try_from(idx).ok()?).copied()
    }

    /// `(n, f(n))` pairs in ascending input order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        let first = self.first_input();
        self.outputs
            .iter()
            .enumerate()
            .map(move |(i, &f)| (first + i as i64, f))
    }

    pub fn min(&self) -> i64 {
        self.outputs.iter().copied().min().unwrap_or(0)
    }

    pub fn max(&self) -> i64 {
        self.outputs.iter().copied().max().unwrap_or(0)
    }
}

/// Sweeps the generator over every input of its width.
pub fn map_all(cfg: &GeneratorConfig, c_scale: Option<i64>) -> Result<MappingTable> {
    cfg.check_scale(c_scale)?;
    let seq = make_sequence(cfg);
    let lo = -(1i64 << (cfg.width - 1));
    let hi = (1i64 << (cfg.width - 1)) - 1;
    let denom = 2 * cfg.len as i128;
    let mut outputs = Vec::with_capacity(1 << cfg.width);
    let mut exact = Vec::with_capacity(1 << cfg.width);
    for n in lo..=hi {
        let sum = accumulate(n, cfg, &seq, c_scale);
        outputs.push(post_process(avg_floor(sum, 2 * cfg.len)?, cfg)?.value());
        let avg = Rational::new(sum as i128, denom);
        exact.push(match cfg.mode {
            GeneratorMode::LogSqnl => {
                avg / Rational::from_integer(2) + Rational::from_integer(1 << (cfg.width - 3))
            }
            _ => avg,
        });
    }
    Ok(MappingTable {
        width: cfg.width,
        cycles: cfg.cycles(),
        outputs,
        exact,
    })
}
