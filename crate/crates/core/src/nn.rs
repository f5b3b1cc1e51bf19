// SPDX-License-Identifier: Apache-2.0

//! Fixed-point inference building blocks and an LSTM cell built on the
//! generator family.
//!
//! Activations and states are `R`-bit words holding reals at a scale of
//! `2^(R-2)` (one unit of `U_MAX`). Weights share that scale, so a product
//! lands at `2^(2(R-2))`; biases are stored at the product scale.
//!
//! In the fixed-point cell the input, forget and output gates come from
//! LogSQNL and drive the `C` port of gated generators, which replace the
//! products `i * tanh(g)` and `o * tanh(c)`. The forget product `f * c` is
//! linear in `c` and goes through a [`ResidualMultiplier`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::closedform::u_max;
use crate::fixedpoint::{check_width, rescale, Word};
use crate::floatfamily::{activate, ActivationKind};
use crate::generator::{eval, GeneratorConfig, GeneratorMode};
use crate::{Error, Result};

fn mismatch(context: &'static str, expected: usize, actual: usize) -> Error {
    Error::DimensionMismatch {
        context,
        expected,
        actual,
    }
}

fn check_word(w: Word, width: u32) -> Result<()> {
    if w.width() != width {
        return Err(Error::WidthMismatch {
            expected: width,
            actual: w.width(),
        });
    }
    Ok(())
}

/// `2^(R-2)`: the real value 1.0 as a word.
pub fn unit(width: u32) -> i64 {
    u_max(width)
}

/// Nearest word for a real value, saturated.
pub fn quantize(x: f64, width: u32) -> Result<Word> {
    if !x.is_finite() {
        return Err(Error::NonFinite(x));
    }
    let v = (x * unit(width) as f64).round();
    let v = v.clamp(i64::MIN as f64 / 2.0, i64::MAX as f64 / 2.0) as i64;
    Word::saturating(v, width)
}

pub fn dequantize(w: Word) -> f64 {
    w.value() as f64 / unit(w.width()) as f64
}

/// Fully connected layer `n = w p + b` over `R`-bit words.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    width: u32,
    weights: Vec<Vec<Word>>,
    bias: Vec<i64>,
}

impl DenseLayer {
    /// `weights` is `outputs x inputs`; all words must be `width` bits.
    pub fn new(width: u32, weights: Vec<Vec<Word>>, bias: Vec<i64>) -> Result<Self> {
        check_width(width)?;
        if weights.len() != bias.len() {
            return Err(mismatch("layer bias", weights.len(), bias.len()));
        }
        let fan_in = weights.first().map_or(0, Vec::len);
        for row in &weights {
            if row.len() != fan_in {
                return Err(mismatch("layer weight row", fan_in, row.len()));
            }
            for &w in row {
                check_word(w, width)?;
            }
        }
        Ok(DenseLayer {
            width,
            weights,
            bias,
        })
    }

    pub fn from_values(width: u32, weights: &[Vec<i64>], bias: &[i64]) -> Result<Self> {
        let weights = weights
            .iter()
            .map(|row| row.iter().map(|&v| Word::new(v, width)).collect())
            .collect::<Result<Vec<Vec<Word>>>>()?;
        DenseLayer::new(width, weights, bias.to_vec())
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn fan_in(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    pub fn outputs(&self) -> usize {
        self.bias.len()
    }

    pub fn weights(&self) -> &[Vec<Word>] {
        &self.weights
    }

    pub fn bias(&self) -> &[i64] {
        &self.bias
    }

    /// `R_w + R_in + ceil(log2(fan_in)) + 1`, enough for any input.
    pub fn accumulator_width(&self) -> u32 {
        let fan_in = self.fan_in().max(1) as u64;
        2 * self.width + fan_in.next_power_of_two().trailing_zeros() + 1
    }
}

/// Exact integer dot products plus bias, without saturation.
pub fn gemm_netsum(layer: &DenseLayer, input: &[Word]) -> Result<Vec<i64>> {
    if input.len() != layer.fan_in() {
        return Err(mismatch("netsum input", layer.fan_in(), input.len()));
    }
    for &p in input {
        check_word(p, layer.width)?;
    }
    Ok(layer
        .weights
        .iter()
        .zip(&layer.bias)
        .map(|(row, &b)| {
            row.iter()
                .zip(input)
                .map(|(w, p)| w.value() * p.value())
                .sum::<i64>()
                + b
        })
        .collect())
}

/// The one product left in the fixed-point cell, `f * c` with `f` in
/// `[0, U_MAX]`.
pub trait ResidualMultiplier {
    fn multiply(&self, f: Word, c: Word) -> Result<Word>;
}

/// Exact integer product followed by a floor resize to `R` bits.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactMultiplier;

impl ResidualMultiplier for ExactMultiplier {
    fn multiply(&self, f: Word, c: Word) -> Result<Word> {
        check_word(c, f.width())?;
        rescale(f.value() * c.value(), f.width() - 2, f.width())
    }
}

/// Product rounded to nearest by adding half an output LSB before the shift.
#[derive(Debug, Clone, Copy, Default)]
pub struct RoundingMultiplier;

impl ResidualMultiplier for RoundingMultiplier {
    fn multiply(&self, f: Word, c: Word) -> Result<Word> {
        check_word(c, f.width())?;
        let half = 1i64 << (f.width() - 3);
        rescale(f.value() * c.value() + half, f.width() - 2, f.width())
    }
}

/// Serialized weights of one gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateWeights {
    pub weights: Vec<Vec<i64>>,
    pub bias: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSet {
    pub input: GateWeights,
    pub forget: GateWeights,
    pub output: GateWeights,
    pub candidate: GateWeights,
}

/// JSON weight fixture. Each gate sees `[x; h]`, so its weight rows have
/// `input_size + hidden_size` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LstmFixture {
    pub width: u32,
    pub input_size: usize,
    pub hidden_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator_len: Option<u64>,
    pub gates: GateSet,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<Vec<i64>>,
}

impl LstmFixture {
    pub fn from_json(text: &str) -> Result<Self> {
        let fixture: LstmFixture = serde_json::from_str(text)?;
        fixture.validate()?;
        Ok(fixture)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fixture serializes")
    }

    pub fn validate(&self) -> Result<()> {
        check_width(self.width)?;
        let fan_in = self.input_size + self.hidden_size;
        for gate in self.gate_list() {
            if gate.weights.len() != self.hidden_size {
                return Err(mismatch("gate rows", self.hidden_size, gate.weights.len()));
            }
            if gate.bias.len() != self.hidden_size {
                return Err(mismatch("gate bias", self.hidden_size, gate.bias.len()));
            }
            for row in &gate.weights {
                if row.len() != fan_in {
                    return Err(mismatch("gate columns", fan_in, row.len()));
                }
            }
        }
        for x in &self.inputs {
            if x.len() != self.input_size {
                return Err(mismatch("input vector", self.input_size, x.len()));
            }
        }
        Ok(())
    }

    fn gate_list(&self) -> [&GateWeights; 4] {
        let g = &self.gates;
        [&g.input, &g.forget, &g.output, &g.candidate]
    }

    /// Input word vector for step `t`; inputs repeat cyclically and an empty
    /// list means zero input.
    pub fn input_at(&self, t: usize) -> Result<Vec<Word>> {
        if self.inputs.is_empty() {
            return vec![Word::zero(self.width); self.input_size]
                .into_iter()
                .collect();
        }
        self.inputs[t % self.inputs.len()]
            .iter()
            .map(|&v| Word::new(v, self.width))
            .collect()
    }

    /// Seeded random fixture: weights uniform in `+-weight_range`, biases in
    /// `+-weight_range / 2`, inputs in `+-1`, all rounded to the grid.
    pub fn random(
        width: u32,
        input_size: usize,
        hidden_size: usize,
        steps: usize,
        weight_range: f64,
        seed: u64,
    ) -> Result<Self> {
        check_width(width)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = unit(width) as f64;
        let fan_in = input_size + hidden_size;
        let gate = |rng: &mut ChaCha8Rng| -> Result<GateWeights> {
            let weights = (0..hidden_size)
                .map(|_| {
                    (0..fan_in)
                        .map(|_| quantize(rng.gen_range(-weight_range..=weight_range), width))
                        .map(|w| w.map(Word::value))
                        .collect::<Result<Vec<i64>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            let half = weight_range / 2.0;
            let bias = (0..hidden_size)
                .map(|_| (rng.gen_range(-half..=half) * scale * scale).round() as i64)
                .collect();
            Ok(GateWeights { weights, bias })
        };
        let gates = GateSet {
            input: gate(&mut rng)?,
            forget: gate(&mut rng)?,
            output: gate(&mut rng)?,
            candidate: gate(&mut rng)?,
        };
        let inputs = (0..steps)
            .map(|_| {
                (0..input_size)
                    .map(|_| quantize(rng.gen_range(-1.0..=1.0), width).map(Word::value))
                    .collect::<Result<Vec<i64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LstmFixture {
            width,
            input_size,
            hidden_size,
            generator_len: None,
            gates,
            inputs,
        })
    }
}

/// Gate layers in the order input, forget, output, candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct GateLayers {
    pub input: DenseLayer,
    pub forget: DenseLayer,
    pub output: DenseLayer,
    pub candidate: DenseLayer,
}

/// Fixed-point LSTM cell with LogSQNL gates and gated-generator products.
pub struct LstmCellFixed<M: ResidualMultiplier = ExactMultiplier> {
    width: u32,
    input_size: usize,
    layers: GateLayers,
    logsig: GeneratorConfig,
    gated: GeneratorConfig,
    multiplier: M,
    cell: Vec<Word>,
    hidden: Vec<Word>,
}

impl LstmCellFixed<ExactMultiplier> {
    pub fn from_fixture(fixture: &LstmFixture) -> Result<Self> {
        LstmCellFixed::with_multiplier(fixture, ExactMultiplier)
    }
}

impl<M: ResidualMultiplier> LstmCellFixed<M> {
    /// Builds a cell with zero states. The generator length defaults to
    /// `2^(R-1)`.
    pub fn with_multiplier(fixture: &LstmFixture, multiplier: M) -> Result<Self> {
        fixture.validate()?;
        let width = fixture.width;
        let len = fixture.generator_len.unwrap_or(1 << (width - 1));
        let layer = |g: &GateWeights| DenseLayer::from_values(width, &g.weights, &g.bias);
        let g = &fixture.gates;
        let layers = GateLayers {
            input: layer(&g.input)?,
            forget: layer(&g.forget)?,
            output: layer(&g.output)?,
            candidate: layer(&g.candidate)?,
        };
        let zeros = vec![Word::zero(width)?; fixture.hidden_size];
        Ok(LstmCellFixed {
            width,
            input_size: fixture.input_size,
            layers,
            logsig: GeneratorConfig::new(width, len, GeneratorMode::LogSqnl)?,
            gated: GeneratorConfig::new(width, len, GeneratorMode::Gated)?,
            multiplier,
            cell: zeros.clone(),
            hidden: zeros,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn hidden(&self) -> &[Word] {
        &self.hidden
    }

    pub fn cell(&self) -> &[Word] {
        &self.cell
    }

    pub fn layers(&self) -> &GateLayers {
        &self.layers
    }

    fn net(&self, layer: &DenseLayer, xh: &[Word]) -> Result<Vec<Word>> {
        gemm_netsum(layer, xh)?
            .into_iter()
            .map(|n| rescale(n, self.width - 2, self.width))
            .collect()
    }

    /// One recurrence step; returns the new `(hidden, cell)`.
    pub fn step(&mut self, x: &[Word]) -> Result<(Vec<Word>, Vec<Word>)> {
        if x.len() != self.input_size {
            return Err(mismatch("cell input", self.input_size, x.len()));
        }
        let xh: Vec<Word> = x.iter().chain(&self.hidden).copied().collect();
        let i = self.net(&self.layers.input, &xh)?;
        let f = self.net(&self.layers.forget, &xh)?;
        let o = self.net(&self.layers.output, &xh)?;
        let g = self.net(&self.layers.candidate, &xh)?;

        let mut cell = Vec::with_capacity(self.cell.len());
        let mut hidden = Vec::with_capacity(self.cell.len());
        for k in 0..self.cell.len() {
            let i_k = eval(i[k], &self.logsig, None)?.value();
            let f_k = eval(f[k], &self.logsig, None)?;
            let o_k = eval(o[k], &self.logsig, None)?.value();
            let ig = eval(g[k], &self.gated, Some(i_k))?;
            let fc = self.multiplier.multiply(f_k, self.cell[k])?;
            let c = Word::saturating(fc.value() + ig.value(), self.width)?;
            hidden.push(eval(c, &self.gated, Some(o_k))?);
            cell.push(c);
        }
        self.cell = cell.clone();
        self.hidden = hidden.clone();
        Ok((hidden, cell))
    }
}

/// Activation pair for the float reference cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FloatActivations {
    /// `tanh` and the logistic function.
    Classic,
    /// SQNL and SQ_LogSig.
    Sqnl,
}

impl FloatActivations {
    fn squash(self, x: f64) -> Result<f64> {
        match self {
            FloatActivations::Classic => Ok(x.tanh()),
            FloatActivations::Sqnl => activate(ActivationKind::Sqnl, x),
        }
    }

    fn gate(self, x: f64) -> Result<f64> {
        match self {
            FloatActivations::Classic => Ok(1.0 / (1.0 + (-x).exp())),
            FloatActivations::Sqnl => activate(ActivationKind::SqLogSig, x),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct FloatLayer {
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

impl FloatLayer {
    fn from_gate(g: &GateWeights, width: u32) -> Self {
        let s = unit(width) as f64;
        FloatLayer {
            weights: g
                .weights
                .iter()
                .map(|row| row.iter().map(|&w| w as f64 / s).collect())
                .collect(),
            bias: g.bias.iter().map(|&b| b as f64 / (s * s)).collect(),
        }
    }

    fn apply(&self, xh: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(row, b)| row.iter().zip(xh).map(|(w, p)| w * p).sum::<f64>() + b)
            .collect()
    }
}

/// Conventional LSTM cell with three elementwise products, on the
/// dequantized fixture weights.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmCellFloat {
    activations: FloatActivations,
    input_size: usize,
    layers: [FloatLayer; 4],
    cell: Vec<f64>,
    hidden: Vec<f64>,
}

impl LstmCellFloat {
    pub fn from_fixture(fixture: &LstmFixture, activations: FloatActivations) -> Result<Self> {
        fixture.validate()?;
        let w = fixture.width;
        let g = &fixture.gates;
        Ok(LstmCellFloat {
            activations,
            input_size: fixture.input_size,
            layers: [
                FloatLayer::from_gate(&g.input, w),
                FloatLayer::from_gate(&g.forget, w),
                FloatLayer::from_gate(&g.output, w),
                FloatLayer::from_gate(&g.candidate, w),
            ],
            cell: vec![0.0; fixture.hidden_size],
            hidden: vec![0.0; fixture.hidden_size],
        })
    }

    pub fn hidden(&self) -> &[f64] {
        &self.hidden
    }

    pub fn cell(&self) -> &[f64] {
        &self.cell
    }

    pub fn step(&mut self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        if x.len() != self.input_size {
            return Err(mismatch("cell input", self.input_size, x.len()));
        }
        if let Some(&bad) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(bad));
        }
        let xh: Vec<f64> = x.iter().chain(&self.hidden).copied().collect();
        let [i, f, o, g] = [0, 1, 2, 3].map(|k| self.layers[k].apply(&xh));
        let act = self.activations;
        for k in 0..self.cell.len() {
            let c = act.gate(f[k])? * self.cell[k] + act.gate(i[k])? * act.squash(g[k])?;
            self.cell[k] = c;
            self.hidden[k] = act.gate(o[k])? * act.squash(c)?;
        }
        Ok((self.hidden.clone(), self.cell.clone()))
    }
}

/// Per-step hidden vectors in reals.
pub type Trace = Vec<Vec<f64>>;

/// Hidden-state traces of both cells over `steps` fixture inputs, in reals.
pub fn run_traces(fixture: &LstmFixture, steps: usize) -> Result<(Trace, Trace)> {
    let mut fixed = LstmCellFixed::from_fixture(fixture)?;
    let mut float = LstmCellFloat::from_fixture(fixture, FloatActivations::Sqnl)?;
    let mut a = Vec::with_capacity(steps);
    let mut b = Vec::with_capacity(steps);
    for t in 0..steps {
        let x = fixture.input_at(t)?;
        let xf: Vec<f64> = x.iter().map(|&w| dequantize(w)).collect();
        let (h, _) = fixed.step(&x)?;
        a.push(h.into_iter().map(dequantize).collect());
        b.push(float.step(&xf)?.0);
    }
    Ok((a, b))
}

/// Largest elementwise distance between two real-valued traces, in LSBs of
/// an `R`-bit word.
pub fn divergence(a: &[Vec<f64>], b: &[Vec<f64>], width: u32) -> Result<f64> {
    if a.len() != b.len() {
        return Err(mismatch("trace length", a.len(), b.len()));
    }
    let scale = unit(width) as f64;
    let mut worst = 0.0f64;
    for (ra, rb) in a.iter().zip(b) {
        if ra.len() != rb.len() {
            return Err(mismatch("trace row", ra.len(), rb.len()));
        }
        for (x, y) in ra.iter().zip(rb) {
            worst = worst.max((x - y).abs() * scale);
        }
    }
    Ok(worst)
}
