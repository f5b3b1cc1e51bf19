// SPDX-License-Identifier: Apache-2.0

//! Indicative NAND-equivalent gate counts for digital building blocks, and
//! bills of materials for three ways of producing an activation: the counter
//! generator, a closed form evaluated with a Booth multiplier, and a lookup
//! table.
//!
//! The numbers are indicative. They reproduce the reference block table and
//! order the methods; they are not a synthesis result.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Block {
    /// Storage, `width` bits.
    Register(u32),
    FullAdder,
    /// Ripple-carry adder of `width` full adders.
    Adder(u32),
    TwosComplement(u32),
    /// 2-to-1 multiplexer, `width` bits wide.
    Mux2(u32),
    /// Table holding only the non-negative half of an odd mapping.
    LutOneSided(u32),
    LutTwoSided(u32),
    /// Radix-4 Booth multiplier; only characterised at 8 and 12 bits.
    BoothMultiplier(u32),
}

impl Block {
    pub fn kind(&self) -> &'static str {
        match self {
            Block::Register(_) => "register",
            Block::FullAdder => "full_adder",
            Block::Adder(_) => "adder",
            Block::TwosComplement(_) => "twos_complement",
            Block::Mux2(_) => "mux2",
            Block::LutOneSided(_) => "lut_one_sided",
            Block::LutTwoSided(_) => "lut_two_sided",
            Block::BoothMultiplier(_) => "booth_multiplier",
        }
    }

    pub fn width(&self) -> u32 {
        match *self {
            Block::FullAdder => 1,
            Block::Register(w)
            | Block::Adder(w)
            | Block::TwosComplement(w)
            | Block::Mux2(w)
            | Block::LutOneSided(w)
            | Block::LutTwoSided(w)
            | Block::BoothMultiplier(w) => w,
        }
    }

    pub fn from_kind(kind: &str, width: u32) -> Result<Block> {
        if width < 1 {
            return Err(Error::InvalidConfig(format!("{kind}: width must be >= 1")));
        }
        Ok(match kind {
            "register" => Block::Register(width),
            "full_adder" => {
                if width != 1 {
                    return Err(Error::InvalidConfig(
                        "full_adder is a single-bit block".into(),
                    ));
                }
                Block::FullAdder
            }
            "adder" => Block::Adder(width),
            "twos_complement" => Block::TwosComplement(width),
            "mux2" => Block::Mux2(width),
            "lut_one_sided" => Block::LutOneSided(width),
            "lut_two_sided" => Block::LutTwoSided(width),
            "booth_multiplier" => Block::BoothMultiplier(width),
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown block kind `{other}`"
                )))
            }
        })
    }
}

const GATES_PER_REGISTER_BIT: u64 = 4;
const GATES_PER_FULL_ADDER: u64 = 9;
const GATES_PER_COMPLEMENT_BIT: u64 = 10;
const GATES_PER_MUX_BIT: u64 = 3;

fn lut_gates(cells: u64, bits: u64) -> u64 {
    GATES_PER_MUX_BIT * cells * bits
}

pub fn gate_cost(block: Block) -> Result<u64> {
    let w = block.width() as u64;
    if w == 0 {
        return Err(Error::InvalidConfig("block width must be >= 1".into()));
    }
    Ok(match block {
        Block::Register(_) => GATES_PER_REGISTER_BIT * w,
        Block::FullAdder => GATES_PER_FULL_ADDER,
        Block::Adder(_) => GATES_PER_FULL_ADDER * w,
        Block::TwosComplement(_) => GATES_PER_COMPLEMENT_BIT * w,
        Block::Mux2(_) => GATES_PER_MUX_BIT * w,
        // 2^(R-1) - 1 cells of R - 1 bits; the sign is restored outside
        Block::LutOneSided(_) => {
            check_lut_width(block)?;
            lut_gates((1 << (w - 1)) - 1, w - 1)
        }
        Block::LutTwoSided(_) => {
            check_lut_width(block)?;
            lut_gates((1 << w) - 1, w)
        }
        Block::BoothMultiplier(8) => 754,
        Block::BoothMultiplier(12) => 1124,
        Block::BoothMultiplier(width) => {
            return Err(Error::UnsupportedWidth {
                block: "booth_multiplier",
                width,
            })
        }
    })
}

fn check_lut_width(block: Block) -> Result<()> {
    let w = block.width();
    if (2..=32).contains(&w) {
        Ok(())
    } else {
        Err(Error::UnsupportedWidth {
            block: block.kind(),
            width: w,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BomItem {
    pub block: Block,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BillOfMaterials {
    pub label: String,
    pub items: Vec<BomItem>,
}

impl BillOfMaterials {
    pub fn new(label: impl Into<String>) -> Self {
        BillOfMaterials {
            label: label.into(),
            items: Vec::new(),
        }
    }

    pub fn with(mut self, block: Block, count: u64) -> Self {
        assert!(count >= 1, "bill of materials counts start at 1");
        self.items.push(BomItem { block, count });
        self
    }

    /// Concatenation of two bills; the label is taken from `self`.
    pub fn merged(&self, other: &BillOfMaterials) -> BillOfMaterials {
        let mut out = self.clone();
        out.items.extend(other.items.iter().cloned());
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: BomDoc = serde_json::from_str(text)?;
        let items = doc
            .items
            .into_iter()
            .map(|it| {
                if it.count < 1 {
                    return Err(Error::InvalidConfig(format!(
                        "{}: count must be >= 1",
                        it.kind
                    )));
                }
                Ok(BomItem {
                    block: Block::from_kind(&it.kind, it.width)?,
                    count: it.count,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BillOfMaterials {
            label: doc.label,
            items,
        })
    }

    pub fn to_json(&self) -> String {
        let doc = BomDoc {
            label: self.label.clone(),
            items: self
                .items
                .iter()
                .map(|it| BomItemDoc {
                    kind: it.block.kind().to_string(),
                    width: it.block.width(),
                    count: it.count,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("bill of materials serializes")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BomDoc {
    label: String,
    #[serde(default)]
    items: Vec<BomItemDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BomItemDoc {
    kind: String,
    width: u32,
    count: u64,
}

pub fn estimate(bom: &BillOfMaterials) -> Result<u64> {
    bom.items
        .iter()
        .map(|it| Ok(it.count * gate_cost(it.block)?))
        .sum()
}

/// Counter generator: two saturating adders (adder plus a mux for the clip),
/// the sequence counter and its incrementer, and the averaging accumulator.
/// The final division is a shift and costs nothing.
pub fn counter_bom(width: u32, len: u64) -> Result<BillOfMaterials> {
    if !len.is_power_of_two() || len < 2 {
        return Err(Error::NotPowerOfTwo(len));
    }
    let counter_bits = len.trailing_zeros();
    let acc_bits = width + counter_bits;
    Ok(BillOfMaterials::new("counter")
        .with(Block::Adder(width), 2)
        .with(Block::Mux2(width), 2)
        .with(Block::Register(counter_bits), 1)
        .with(Block::Adder(counter_bits), 1)
        .with(Block::Register(acc_bits), 1)
        .with(Block::Adder(acc_bits), 1))
}

/// Closed form `n -+ n^2 / 2M`: one Booth multiplier for the square (the
/// division is a shift), an adder, a complementer for the sign branch and a
/// mux selecting the branch.
pub fn multiplier_bom(width: u32) -> Result<BillOfMaterials> {
    gate_cost(Block::BoothMultiplier(width))?;
    Ok(BillOfMaterials::new("multiplier")
        .with(Block::BoothMultiplier(width), 1)
        .with(Block::Adder(width), 1)
        .with(Block::TwosComplement(width), 1)
        .with(Block::Mux2(width), 1))
}

pub fn lut_bom(width: u32) -> BillOfMaterials {
    BillOfMaterials::new("lut").with(Block::LutTwoSided(width), 1)
}

/// The three competing implementations, in the order counter, multiplier, LUT.
pub fn method_boms(width: u32, len: u64) -> Result<Vec<BillOfMaterials>> {
    Ok(vec![
        counter_bom(width, len)?,
        multiplier_bom(width)?,
        lut_bom(width),
    ])
}
