// SPDX-License-Identifier: Apache-2.0

//! Real-valued square-law activations for software networks, with analytic
//! first derivatives.
//!
//! Each activation is a table of quadratic pieces with dyadic coefficients.
//! A piece covers `[start, next start)`, so at a knee the value and the
//! derivative come from the piece on the right. All activations are
//! continuous, so only the derivative depends on that choice.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActivationKind {
    /// tanh-like, range `[-1, 1]`.
    Sqnl,
    /// logistic-like, `SQNL / 2 + 0.5`.
    SqLogSig,
    /// ELU-like.
    Sqlu,
    /// Softplus-shaped scalar map; despite the name it does not normalise a
    /// vector.
    SqSoftmax,
    SqSqish,
    SqReu,
}

impl ActivationKind {
    pub const ALL: [ActivationKind; 6] = [
        ActivationKind::Sqnl,
        ActivationKind::SqLogSig,
        ActivationKind::Sqlu,
        ActivationKind::SqSoftmax,
        ActivationKind::SqSqish,
        ActivationKind::SqReu,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ActivationKind::Sqnl => "sqnl",
            ActivationKind::SqLogSig => "sq_logsig",
            ActivationKind::Sqlu => "sqlu",
            ActivationKind::SqSoftmax => "sq_softmax",
            ActivationKind::SqSqish => "sq_sqish",
            ActivationKind::SqReu => "sq_reu",
        }
    }

    pub fn pieces(&self) -> &'static [Piece] {
        match self {
            ActivationKind::Sqnl => SQNL,
            ActivationKind::SqLogSig => SQ_LOGSIG,
            ActivationKind::Sqlu => SQLU,
            ActivationKind::SqSoftmax => SQ_SOFTMAX,
            ActivationKind::SqSqish => SQ_SQISH,
            ActivationKind::SqReu => SQ_REU,
        }
    }

    /// Input values where the piece changes.
    pub fn knees(&self) -> Vec<f64> {
        self.pieces()
            .iter()
            .filter_map(|p| p.start_halves)
            .map(|h| h as f64 / 2.0)
            .collect()
    }
}

impl std::str::FromStr for ActivationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ActivationKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown activation `{s}`")))
    }
}

/// One quadratic piece `(c0 + c1 x + c2 x^2) / 32`, starting at
/// `start_halves / 2` (unbounded below when `None`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Piece {
    pub start_halves: Option<i64>,
    pub coeffs_32nds: [i64; 3],
}

pub const COEFF_DENOMINATOR: i64 = 32;

const fn piece(start_halves: Option<i64>, c0: i64, c1: i64, c2: i64) -> Piece {
    Piece {
        start_halves,
        coeffs_32nds: [c0, c1, c2],
    }
}

const SQNL: &[Piece] = &[
    piece(None, -32, 0, 0),
    piece(Some(-4), 0, 32, 8),
    piece(Some(0), 0, 32, -8),
    piece(Some(4), 32, 0, 0),
];

const SQ_LOGSIG: &[Piece] = &[
    piece(None, 0, 0, 0),
    piece(Some(-4), 16, 16, 4),
    piece(Some(0), 16, 16, -4),
    piece(Some(4), 32, 0, 0),
];

const SQLU: &[Piece] = &[
    piece(None, -32, 0, 0),
    piece(Some(-4), 0, 32, 8),
    piece(Some(0), 0, 32, 0),
];

// (x + 1/2)^2 / 2 = 1/8 + x/2 + x^2/2
const SQ_SOFTMAX: &[Piece] = &[
    piece(None, 0, 0, 0),
    piece(Some(-1), 4, 16, 16),
    piece(Some(1), 0, 32, 0),
];

const SQ_SQISH: &[Piece] = &[
    piece(None, 0, 0, 0),
    piece(Some(-4), 0, 32, 16),
    piece(Some(0), 0, 32, 1),
];

const SQ_REU: &[Piece] = &[
    piece(None, 0, 0, 0),
    piece(Some(-4), 0, 32, 16),
    piece(Some(0), 0, 32, 0),
];

impl Piece {
    pub fn value(&self, x: f64) -> f64 {
        let [c0, c1, c2] = self
            .coeffs_32nds
            .map(|c| c as f64 / COEFF_DENOMINATOR as f64);
        c0 + x * (c1 + x * c2)
    }

    pub fn slope(&self, x: f64) -> f64 {
        let [_, c1, c2] = self
            .coeffs_32nds
            .map(|c| c as f64 / COEFF_DENOMINATOR as f64);
        c1 + 2.0 * c2 * x
    }
}

fn piece_at(kind: ActivationKind, x: f64) -> &'static Piece {
    let pieces = kind.pieces();
    pieces
        .iter()
        .rev()
        .find(|p| p.start_halves.is_none_or(|h| x >= h as f64 / 2.0))
        .expect("first piece is unbounded below")
}

fn finite(x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonFinite(x))
    }
}

pub fn activate(kind: ActivationKind, x: f64) -> Result<f64> {
    let x = finite(x)?;
    Ok(piece_at(kind, x).value(x))
}

/// First derivative; at a knee the right-hand derivative.
pub fn derivative(kind: ActivationKind, x: f64) -> Result<f64> {
    let x = finite(x)?;
    Ok(piece_at(kind, x).slope(x))
}

pub fn activate_batch(kind: ActivationKind, xs: &[f64]) -> Result<Vec<f64>> {
    xs.iter().map(|&x| activate(kind, x)).collect()
}
