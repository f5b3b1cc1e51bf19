// SPDX-License-Identifier: Apache-2.0

//! Exact closed forms of the generator mappings.
//!
//! Every function here returns an exact rational; callers that need an output
//! word take the floor, the same rounding the generator's shift performs.

use num_traits::{Signed, Zero};

use crate::fixedpoint::check_width;
use crate::{Error, Result};

/// Exact rational number. Reduced, with a positive denominator.
pub type Rational = num_rational::Ratio<i128>;

pub(crate) fn int(v: i64) -> Rational {
    Rational::from_integer(v as i128)
}

pub(crate) fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(num as i128, den as i128)
}

/// `2^(R-2)`: the counter span and the symmetric adder limit.
pub fn u_max(width: u32) -> i64 {
    1i64 << (width - 2)
}

/// `2^(R-1)`: the subtracter limit.
pub fn m_limit(width: u32) -> i64 {
    1i64 << (width - 1)
}

/// Square-law nonlinearity for an `R`-bit word:
///
/// ```text
///   -M/2            n < -M
///   n + n^2/(2M)    -M <= n < 0
///   n - n^2/(2M)    0 <= n <= M
///   M/2             n > M
/// ```
pub fn sqnl_exact(n: i64, width: u32) -> Result<Rational> {
    check_width(width)?;
    let m = m_limit(width);
    let n_r = int(n);
    let sq = Rational::new((n as i128) * (n as i128), 2 * m as i128);
    Ok(if n < -m {
        ratio(-m, 2)
    } else if n < 0 {
        n_r + sq
    } else if n <= m {
        n_r - sq
    } else {
        ratio(m, 2)
    })
}

/// Asymmetric (SQLU / SQ_Softplus) mapping with offset `alpha`:
///
/// ```text
///   -alpha                          n < -M/2 - alpha
///   (M/2 + n + alpha)^2/(2M) - alpha   otherwise up to M/2 - alpha
///   n                               n > M/2 - alpha
/// ```
pub fn asym_exact(n: i64, width: u32, alpha: i64) -> Result<Rational> {
    check_width(width)?;
    let m = m_limit(width);
    if alpha < 0 || alpha > m / 2 {
        return Err(Error::AlphaOutOfRange { alpha, max: m / 2 });
    }
    let half = m / 2;
    Ok(if n < -half - alpha {
        int(-alpha)
    } else if n <= half - alpha {
        let t = (half + n + alpha) as i128;
        Rational::new(t * t, 2 * m as i128) - int(alpha)
    } else {
        int(n)
    })
}

/// Parameters of the gated mapping: the counter span `U_MAX = 2^(R-2)` and the
/// scaling level `C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GatedParams {
    u_max: i64,
    c: i64,
}

impl GatedParams {
    pub fn new(width: u32, c: i64) -> Result<Self> {
        check_width(width)?;
        let u_max = u_max(width);
        if c < 0 || c > u_max {
            return Err(Error::ScaleOutOfRange { c, max: u_max });
        }
        Ok(GatedParams { u_max, c })
    }

    pub fn u_max(&self) -> i64 {
        self.u_max
    }

    pub fn c(&self) -> i64 {
        self.c
    }

    /// Half-width of the linear mid-region, `U_MAX - C`.
    pub fn delta(&self) -> i64 {
        self.u_max - self.c
    }

    /// The unscaled parameters (`C = U_MAX`) at the same width.
    pub fn full_scale(&self) -> GatedParams {
        GatedParams {
            u_max: self.u_max,
            c: self.u_max,
        }
    }
}

/// Gated (scaled) mapping `f(n, C)`:
///
/// ```text
///   -C                          n < -(U_MAX + C)
///   n + (n - D)^2/(4 U_MAX)     -(U_MAX + C) <= n < -D
///   n C / U_MAX                 -D <= n <= D
///   n - (n + D)^2/(4 U_MAX)     D < n <= U_MAX + C
///   C                           n > U_MAX + C
/// ```
///
/// with `D = U_MAX - C`.
pub fn gated_exact(n: i64, params: &GatedParams) -> Rational {
    let (u, c, d) = (params.u_max, params.c, params.delta());
    let four_u = 4 * u as i128;
    if n < -(u + c) {
        int(-c)
    } else if n < -d {
        let t = (n - d) as i128;
        int(n) + Rational::new(t * t, four_u)
    } else if n <= d {
        ratio(n * c, u)
    } else if n <= u + c {
        let t = (n + d) as i128;
        int(n) - Rational::new(t * t, four_u)
    } else {
        int(c)
    }
}

/// Error of the gated mapping against ideal scaling:
/// `E(n, C) = (C / U_MAX) * G(n) - f(n, C)` with `G(n) = f(n, U_MAX)`.
pub fn gated_error_exact(n: i64, params: &GatedParams) -> Rational {
    let g = gated_exact(n, &params.full_scale());
    ratio(params.c, params.u_max) * g - gated_exact(n, params)
}

/// Tansig-shaped model `2 / (1 + exp(a x + b x^3)) - 1`; `a = -2, b = 0`
/// gives `tanh(x)`.
pub fn tansig_model(x: f64, a: f64, b: f64) -> f64 {
    2.0 / (1.0 + (a * x + b * x * x * x).exp()) - 1.0
}

/// Floor of a rational as an `i64`.
pub fn floor_i64(r: &Rational) -> i64 {
    r.floor().to_integer() as i64
}

/// Round half away from zero.
pub fn round_half_away(r: &Rational) -> i64 {
    let half = Rational::new(1, 2);
    if r.is_negative() {
        -floor_i64(&(-r + half))
    } else {
        floor_i64(&(r + half))
    }
}

/// Exact decimal rendering for rationals whose denominator has only the
/// prime factors 2 and 5; anything else falls back to `num/den`.
pub fn to_decimal_string(r: &Rational) -> String {
    let den = *r.denom();
    let (mut d, mut twos, mut fives) = (den, 0u32, 0u32);
    while d % 2 == 0 {
        d /= 2;
        twos += 1;
    }
    while d % 5 == 0 {
        d /= 5;
        fives += 1;
    }
    if d != 1 {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let digits = twos.max(fives);
    if digits == 0 {
        return r.numer().to_string();
    }
    let scale = 10i128.pow(digits);
    let scaled = r.numer() * (scale / den);
    let sign = if scaled < 0 { "-" } else { "" };
    let abs = scaled.abs();
    let int_part = abs / scale;
    let frac = abs % scale;
    let frac = format!("{:0width$}", frac, width = digits as usize);
    let frac = frac.trim_end_matches('0');
    if frac.is_empty() {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac}")
    }
}

pub(crate) fn abs(r: &Rational) -> Rational {
    if r.is_negative() {
        -r
    } else {
        *r
    }
}

pub(crate) fn is_zero(r: &Rational) -> bool {
    r.is_zero()
}
