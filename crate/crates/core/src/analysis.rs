// SPDX-License-Identifier: Apache-2.0

//! Deviation of the iterative generator from the closed form, segment
//! counting, and the gated error surface.

use crate::closedform::{
    abs, floor_i64, gated_error_exact, is_zero, round_half_away, sqnl_exact, GatedParams, Rational,
};
use crate::fixedpoint::check_width;
use crate::generator::{eval, exact_average, GeneratorConfig, GeneratorMode, MappingTable};
use crate::{Error, Result, Word};

/// Deviation of one input.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationEntry {
    pub n: i64,
    /// Exact average of the summation, before the output shift.
    pub average: Rational,
    /// Closed-form value.
    pub ideal: Rational,
    /// `average - ideal`.
    pub deviation: Rational,
    /// `deviation` rounded to whole LSBs (half away from zero).
    pub lsb_deviation: i64,
    /// `eval(n) - floor(ideal)`.
    pub output_error: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationProfile {
    pub width: u32,
    pub len: u64,
    pub entries: Vec<DeviationEntry>,
}

impl DeviationProfile {
    pub fn max_abs_deviation(&self) -> Rational {
        self.entries
            .iter()
            .map(|e| abs(&e.deviation))
            .max()
            .unwrap_or_default()
    }

    pub fn max_abs_output_error(&self) -> i64 {
        self.entries
            .iter()
            .map(|e| e.output_error.abs())
            .max()
            .unwrap_or(0)
    }

    /// Fraction of inputs whose deviation rounds to zero LSBs.
    pub fn zero_bit_fraction(&self) -> f64 {
        let zeros = self.entries.iter().filter(|e| e.lsb_deviation == 0).count();
        zeros as f64 / self.entries.len() as f64
    }

    /// Fraction of inputs with no deviation at all.
    pub fn exact_fraction(&self) -> f64 {
        let zeros = self
            .entries
            .iter()
            .filter(|e| is_zero(&e.deviation))
            .count();
        zeros as f64 / self.entries.len() as f64
    }
}

/// Deviation of a symmetric generator from `sqnl_exact` over all `2^R` inputs.
pub fn deviation_profile(cfg: &GeneratorConfig) -> Result<DeviationProfile> {
    if cfg.mode() != GeneratorMode::Symmetric {
        return Err(Error::UnsupportedMode {
            expected: "symmetric",
        });
    }
    let width = cfg.width();
    let half = 1i64 << (width - 1);
    let mut entries = Vec::with_capacity(1 << width);
    for n in -half..half {
        let word = Word::new(n, width)?;
        let average = exact_average(word, cfg, None)?;
        let ideal = sqnl_exact(n, width)?;
        let deviation = average - ideal;
        entries.push(DeviationEntry {
            n,
            average,
            ideal,
            deviation,
            lsb_deviation: round_half_away(&deviation),
            output_error: eval(word, cfg, None)?.value() - floor_i64(&ideal),
        });
    }
    Ok(DeviationProfile {
        width,
        len: cfg.len(),
        entries,
    })
}

/// Bin counts over `[lo, hi]`. Bin `i` covers `[edge_i, edge_{i+1})`, the last
/// one is closed. Values outside the span land in the nearest end bin so the
/// counts always sum to the number of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<Rational>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Samples in bins lying entirely inside `[lo, hi]`.
    pub fn mass_within(&self, lo: Rational, hi: Rational) -> u64 {
        self.counts
            .iter()
            .enumerate()
            .filter(|(i, _)| self.edges[*i] >= lo && self.edges[i + 1] <= hi)
            .map(|(_, c)| c)
            .sum()
    }
}

pub fn deviation_histogram(
    profile: &DeviationProfile,
    bins: usize,
    lo: Rational,
    hi: Rational,
) -> Result<Histogram> {
    if bins < 1 {
        return Err(Error::InvalidConfig(
            "histogram needs at least one bin".into(),
        ));
    }
    if lo >= hi {
        return Err(Error::InvalidConfig(format!(
            "histogram span [{lo}, {hi}] is empty"
        )));
    }
    let step = (hi - lo) / Rational::from_integer(bins as i128);
    let edges: Vec<Rational> = (0..=bins)
        .map(|i| lo + step * Rational::from_integer(i as i128))
        .collect();
    let mut counts = vec![0u64; bins];
    for e in &profile.entries {
        let idx = ((e.deviation - lo) / step).floor().to_integer();
        let idx = idx.clamp(0, bins as i128 - 1) as usize;
        counts[idx] += 1;
    }
    Ok(Histogram { edges, counts })
}

/// Number of maximal runs of constant first difference in the pre-rounding
/// table, not counting a zero-slope run at either end.
pub fn count_segments(table: &MappingTable) -> usize {
    let diffs: Vec<Rational> = table.exact().windows(2).map(|p| p[1] - p[0]).collect();
    let mut runs: Vec<Rational> = Vec::new();
    for d in diffs {
        if runs.last() != Some(&d) {
            runs.push(d);
        }
    }
    let mut slice = &runs[..];
    if slice.len() > 1 && slice.first().is_some_and(is_zero) {
        slice = &slice[1..];
    }
    if slice.len() > 1 && slice.last().is_some_and(is_zero) {
        slice = &slice[..slice.len() - 1];
    }
    slice.len()
}

/// Slope breakpoints of the pre-rounding table: inputs where the first
/// difference changes.
pub fn breakpoints(table: &MappingTable) -> Vec<i64> {
    let exact = table.exact();
    let first = table.first_input();
    (1..exact.len().saturating_sub(1))
        .filter(|&i| exact[i] - exact[i - 1] != exact[i + 1] - exact[i])
        .map(|i| first + i as i64)
        .collect()
}

/// Gated error for one scaling level over the whole input domain.
#[derive(Debug, Clone, PartialEq)]
pub struct GatedErrorRow {
    pub c: i64,
    pub errors: Vec<Rational>,
    pub max_abs: Rational,
    /// Smallest non-negative input attaining `max_abs` (the error is odd in n).
    pub argmax: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GatedErrorSurface {
    pub width: u32,
    pub first_input: i64,
    pub rows: Vec<GatedErrorRow>,
}

impl GatedErrorSurface {
    pub fn row(&self, c: i64) -> Option<&GatedErrorRow> {
        self.rows.iter().find(|r| r.c == c)
    }

    pub fn at(&self, c: i64, n: i64) -> Option<Rational> {
        let row = self.row(c)?;
        let idx = usize::try_from(n - self.first_input).ok()?;
        row.errors.get(idx).copied()
    }
}

pub fn gated_error_surface(width: u32, c_values: &[i64]) -> Result<GatedErrorSurface> {
    check_width(width)?;
    let half = 1i64 << (width - 1);
    let rows = c_values
        .iter()
        .map(|&c| {
            let params = GatedParams::new(width, c)?;
            let errors: Vec<Rational> = (-half..half)
                .map(|n| gated_error_exact(n, &params))
                .collect();
            let max_abs = errors.iter().map(abs).max().unwrap_or_default();
            let argmax = (0..half)
                .find(|&n| abs(&errors[(n + half) as usize]) == max_abs)
                .unwrap_or(0);
            Ok(GatedErrorRow {
                c,
                errors,
                max_abs,
                argmax,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GatedErrorSurface {
        width,
        first_input: -half,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closedform::{int, ratio};
    use crate::generator::map_all;
    use proptest::prelude::*;

    fn sym(width: u32, len: u64) -> GeneratorConfig {
        GeneratorConfig::new(width, len, GeneratorMode::Symmetric).unwrap()
    }

    #[test]
    fn full_length_profile_is_exact() {
        let p = deviation_profile(&sym(8, 128)).unwrap();
        assert_eq!(p.entries.len(), 256);
        assert_eq!(p.max_abs_deviation(), int(0));
        assert_eq!(p.max_abs_output_error(), 0);
    }

    #[test]
    fn length_eight_within_quarter_lsb() {
        let p = deviation_profile(&sym(8, 8)).unwrap();
        assert_eq!(p.max_abs_deviation(), ratio(1, 4));
        assert_eq!(p.zero_bit_fraction(), 1.0);
    }

    #[test]
    fn length_four_within_one_lsb() {
        let p = deviation_profile(&sym(8, 4)).unwrap();
        assert_eq!(p.max_abs_deviation(), int(1));
        // 184 of 256 inputs deviate by less than half an LSB
        assert_eq!(p.zero_bit_fraction(), 184.0 / 256.0);
        assert!(p.zero_bit_fraction() > 0.70);
    }

    #[test]
    fn deviation_peaks_at_offsets_and_vanishes_midway() {
        let p = deviation_profile(&sym(8, 8)).unwrap();
        let dev = |n: i64| p.entries[(n + 128) as usize].deviation;
        for u in [-56i64, -40, -24, -8, 8, 24, 40, 56] {
            assert_eq!(abs(&dev(u)), ratio(1, 4), "n={u}");
        }
        for mid in [-48i64, -32, -16, 0, 16, 32, 48] {
            assert_eq!(dev(mid), int(0), "n={mid}");
        }
    }

    #[test]
    fn profile_requires_symmetric_mode() {
        let c = GeneratorConfig::new(8, 8, GeneratorMode::LogSqnl).unwrap();
        assert!(matches!(
            deviation_profile(&c),
            Err(Error::UnsupportedMode { .. })
        ));
    }

    #[test]
    fn histogram_examples() {
        let p = deviation_profile(&sym(8, 8)).unwrap();
        // bins centred on multiples of 1/4 across [-1, 1]
        let h = deviation_histogram(&p, 9, ratio(-9, 8), ratio(9, 8)).unwrap();
        assert_eq!(h.total(), 256);
        assert_eq!(h.mass_within(ratio(-3, 8), ratio(3, 8)), 256);

        let p4 = deviation_profile(&sym(8, 4)).unwrap();
        let h = deviation_histogram(&p4, 9, ratio(-9, 8), ratio(9, 8)).unwrap();
        assert_eq!(h.total(), 256);
        assert_eq!(h.mass_within(ratio(-9, 8), ratio(9, 8)), 256);
        assert!(h.mass_within(ratio(-3, 8), ratio(3, 8)) < 256);

        let zero = deviation_profile(&sym(8, 128)).unwrap();
        let h = deviation_histogram(&zero, 9, ratio(-9, 8), ratio(9, 8)).unwrap();
        assert_eq!(h.counts.iter().filter(|&&c| c > 0).count(), 1);
        assert_eq!(h.counts[4], 256);

        assert!(deviation_histogram(&zero, 0, int(-1), int(1)).is_err());
    }

    #[test]
    fn segment_counts() {
        let t = map_all(&sym(8, 8), None).unwrap();
        // 16 slope breakpoints, at +-8, +-24, ..., +-120
        assert_eq!(
            breakpoints(&t),
            vec![-120, -104, -88, -72, -56, -40, -24, -8, 8, 24, 40, 56, 72, 88, 104, 120]
        );
        // between them 15 sloped runs; the outer flat runs are dropped
        assert_eq!(count_segments(&t), 15);

        let t = map_all(&sym(8, 4), None).unwrap();
        assert_eq!(breakpoints(&t).len(), 8);
        assert_eq!(count_segments(&t), 7);

        let identity = MappingTable::from_values(8, (-128..128).collect()).unwrap();
        assert_eq!(count_segments(&identity), 1);
        assert!(breakpoints(&identity).is_empty());

        let flat = MappingTable::from_values(4, vec![3; 16]).unwrap();
        assert_eq!(count_segments(&flat), 1);
    }

    #[test]
    fn segment_count_pattern() {
        // brute-force sweep: 2N breakpoints, 2N - 1 sloped runs
        for width in [6u32, 8] {
            for len in [2u64, 4, 8, 16] {
                if len > 1 << (width - 2) {
                    continue;
                }
                let t = map_all(&sym(width, len), None).unwrap();
                assert_eq!(
                    count_segments(&t),
                    2 * len as usize - 1,
                    "R={width} N={len}"
                );
            }
        }
    }

    #[test]
    fn gated_surface_examples() {
        let s = gated_error_surface(8, &[0, 40, 64]).unwrap();
        assert!(s.row(64).unwrap().errors.iter().all(is_zero));
        assert!(s.row(0).unwrap().errors.iter().all(is_zero));
        assert_eq!(s.at(40, 40).unwrap(), ratio(-93, 32));
        assert!(gated_error_surface(8, &[65]).is_err());
    }

    #[test]
    fn gated_error_peak_lies_in_upper_quadratic_region() {
        let cs: Vec<i64> = (1..64).collect();
        let s = gated_error_surface(8, &cs).unwrap();
        for row in &s.rows {
            let delta = 64 - row.c;
            assert!(
                row.argmax > delta && row.argmax < 64 + row.c,
                "C={} argmax={}",
                row.c,
                row.argmax
            );
        }
    }

    proptest! {
        #[test]
        fn profile_deviation_is_odd(log_len in 1u32..=7, n in -127i64..=127) {
            let p = deviation_profile(&sym(8, 1 << log_len)).unwrap();
            let d = |n: i64| p.entries[(n + 128) as usize].deviation;
            prop_assert_eq!(d(-n), -d(n));
        }
    }
}
