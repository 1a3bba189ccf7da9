//! Binary design vectors and the layer stacks they describe.
//!
//! Each layer is two bits, read (high, low) left to right:
//! `00` SiO2, `01` Si3N4, `10` Al2O3, `11` TiO2. All layers share the
//! fixed total thickness equally.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Total thickness of the candidate layers.
pub const TOTAL_THICKNESS_NM: f64 = 1200.0;

/// Fixed-length binary optimization variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    bits: Box<[u8]>,
}

impl BitVector {
    /// Builds a vector from 0/1 values; anything else is rejected.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return Err(Error::Encoding(format!(
                "bit {pos} has value {}, expected 0 or 1",
                bits[pos]
            )));
        }
        Ok(Self { bits: bits.into() })
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        Self {
            bits: bits.iter().map(|&b| b as u8).collect(),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            bits: alloc::vec![0u8; n].into_boxed_slice(),
        }
    }

    pub fn ones(n: usize) -> Self {
        Self {
            bits: alloc::vec![1u8; n].into_boxed_slice(),
        }
    }

    /// The `index`-th vector in lexicographic order (bit 0 is the most significant).
    pub fn from_index(index: u64, n: usize) -> Self {
        let bits = (0..n)
            .map(|i| ((index >> (n - 1 - i)) & 1) as u8)
            .collect();
        Self { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.bits
    }

    pub fn get(&self, i: usize) -> u8 {
        self.bits[i]
    }

    /// Indices of the set bits.
    pub fn ones_iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == 1)
            .map(|(i, _)| i)
    }

    /// Space-separated pairs, e.g. `11 11 00`.
    pub fn to_grouped_string(&self) -> String {
        let mut out = String::with_capacity(self.len() * 3 / 2);
        for (i, b) in self.bits.iter().enumerate() {
            if i > 0 && i % 2 == 0 {
                out.push(' ');
            }
            out.push(if *b == 1 { '1' } else { '0' });
        }
        out
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits.iter() {
            f.write_str(if *b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Accepts contiguous `0`/`1` characters, optionally separated by
/// whitespace and wrapped in brackets (`[11 11 00]`).
impl FromStr for BitVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim();
        let body = body
            .strip_prefix('[')
            .and_then(|b| b.strip_suffix(']'))
            .unwrap_or(body);
        let mut bits = Vec::with_capacity(body.len());
        for c in body.chars() {
            match c {
                '0' => bits.push(0),
                '1' => bits.push(1),
                c if c.is_whitespace() => {}
                c => {
                    return Err(Error::Encoding(format!(
                        "unexpected character {c:?} in bit string"
                    )))
                }
            }
        }
        Ok(Self { bits: bits.into() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Material {
    SiO2,
    Si3N4,
    Al2O3,
    TiO2,
    Pdms,
    Air,
}

impl Material {
    pub const CANDIDATES: [Material; 4] =
        [Material::SiO2, Material::Si3N4, Material::Al2O3, Material::TiO2];

    /// Whether the material may appear as a stack layer.
    pub fn is_candidate(self) -> bool {
        Self::CANDIDATES.contains(&self)
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::CANDIDATES.get(code as usize).copied()
    }

    pub fn code(self) -> Option<u8> {
        Self::CANDIDATES
            .iter()
            .position(|&m| m == self)
            .map(|p| p as u8)
    }

    pub fn name(self) -> &'static str {
        match self {
            Material::SiO2 => "SiO2",
            Material::Si3N4 => "Si3N4",
            Material::Al2O3 => "Al2O3",
            Material::TiO2 => "TiO2",
            Material::Pdms => "PDMS",
            Material::Air => "Air",
        }
    }
}

impl fmt::Display for Material {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Material {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let all = [
            Material::SiO2,
            Material::Si3N4,
            Material::Al2O3,
            Material::TiO2,
            Material::Pdms,
            Material::Air,
        ];
        all.into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Encoding(format!("unknown material {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layer {
    pub material: Material,
    pub thickness_nm: f64,
}

/// Coherent layers between a semi-infinite superstrate (incident side)
/// and substrate. `layers[0]` faces the superstrate.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerStack {
    pub layers: Vec<Layer>,
    pub superstrate: Material,
    pub substrate: Material,
}

impl LayerStack {
    pub fn new(layers: Vec<Layer>, superstrate: Material, substrate: Material) -> Self {
        Self {
            layers,
            superstrate,
            substrate,
        }
    }

    pub fn with_superstrate(mut self, superstrate: Material) -> Self {
        self.superstrate = superstrate;
        self
    }

    pub fn total_thickness_nm(&self) -> f64 {
        self.layers.iter().map(|l| l.thickness_nm).sum()
    }
}

/// Maps a design vector to its stack: air superstrate, SiO2 substrate,
/// `len / 2` equal-thickness layers.
pub fn decode(bits: &BitVector) -> Result<LayerStack> {
    let n = bits.len();
    if n < 2 || n % 2 != 0 {
        return Err(Error::Encoding(format!(
            "bit vector length must be even and at least 2, got {n}"
        )));
    }
    let count = n / 2;
    let thickness_nm = TOTAL_THICKNESS_NM / count as f64;
    let layers = bits
        .as_slice()
        .chunks_exact(2)
        .map(|pair| Layer {
            material: Material::from_code(pair[0] * 2 + pair[1]).expect("two bits index four candidates"),
            thickness_nm,
        })
        .collect();
    Ok(LayerStack::new(layers, Material::Air, Material::SiO2))
}

/// Inverse of [`decode`]. Requires equal thicknesses and candidate materials.
pub fn encode(stack: &LayerStack) -> Result<BitVector> {
    let first = stack
        .layers
        .first()
        .ok_or_else(|| Error::Encoding("stack has no layers".into()))?;
    let mut bits = Vec::with_capacity(stack.layers.len() * 2);
    for (i, layer) in stack.layers.iter().enumerate() {
        let code = layer.material.code().ok_or_else(|| {
            Error::Encoding(format!(
                "layer {i}: {} is not a stack candidate material",
                layer.material
            ))
        })?;
        let scale = first.thickness_nm.abs().max(layer.thickness_nm.abs());
        if (layer.thickness_nm - first.thickness_nm).abs() > 1e-9 * scale {
            return Err(Error::Encoding(format!(
                "layer {i}: thickness {} nm differs from {} nm",
                layer.thickness_nm, first.thickness_nm
            )));
        }
        bits.push(code >> 1);
        bits.push(code & 1);
    }
    Ok(BitVector { bits: bits.into() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use proptest::prelude::*;

    #[test]
    fn decode_two_layers() {
        let stack = decode(&"0011".parse().unwrap()).unwrap();
        assert_eq!(stack.layers.len(), 2);
        assert_eq!(stack.layers[0].material, Material::SiO2);
        assert_eq!(stack.layers[1].material, Material::TiO2);
        assert!(stack.layers.iter().all(|l| l.thickness_nm == 600.0));
        assert_eq!(stack.substrate, Material::SiO2);
    }

    #[test]
    fn decode_single_material() {
        let stack = decode(&BitVector::zeros(40)).unwrap();
        assert_eq!(stack.layers.len(), 20);
        assert!(stack
            .layers
            .iter()
            .all(|l| l.material == Material::SiO2 && l.thickness_nm == 60.0));
    }

    #[test]
    fn decode_optimized_window() {
        let bits: BitVector = "[11 11 11 00 01 00 11 11 10 00 00 10 11 11 01 00 01 01 11 11 11 11 01 00 00 00 10 11 11 10]"
            .parse()
            .unwrap();
        assert_eq!(bits.len(), 60);
        let stack = decode(&bits).unwrap();
        assert_eq!(stack.layers.len(), 30);
        assert!((stack.layers[0].thickness_nm - 40.0).abs() < 1e-12);
        let mats: Vec<_> = stack.layers[..5].iter().map(|l| l.material).collect();
        assert_eq!(
            mats,
            [Material::TiO2, Material::TiO2, Material::TiO2, Material::SiO2, Material::Si3N4]
        );
        assert_eq!(encode(&stack).unwrap(), bits);
    }

    #[test]
    fn odd_length_rejected() {
        assert!(matches!(decode(&BitVector::zeros(3)), Err(Error::Encoding(_))));
        assert!(matches!(decode(&BitVector::zeros(0)), Err(Error::Encoding(_))));
    }

    #[test]
    fn encode_inverse_example() {
        let stack = LayerStack::new(
            alloc::vec![
                Layer { material: Material::SiO2, thickness_nm: 600.0 },
                Layer { material: Material::TiO2, thickness_nm: 600.0 },
            ],
            Material::Air,
            Material::SiO2,
        );
        assert_eq!(encode(&stack).unwrap().to_string(), "0011");
    }

    #[test]
    fn encode_rejects_pdms_and_unequal_layers() {
        let mut stack = decode(&"0011".parse().unwrap()).unwrap();
        stack.layers[1].material = Material::Pdms;
        assert!(matches!(encode(&stack), Err(Error::Encoding(_))));
        let mut stack = decode(&"0011".parse().unwrap()).unwrap();
        stack.layers[1].thickness_nm = 500.0;
        assert!(matches!(encode(&stack), Err(Error::Encoding(_))));
    }

    #[test]
    fn text_forms() {
        let a: BitVector = "00 11 10".parse().unwrap();
        let b: BitVector = "001110".parse().unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "001110");
        assert_eq!(a.to_grouped_string(), "00 11 10");
        assert!("0012".parse::<BitVector>().is_err());
        assert!(BitVector::from_bits(&[0, 2]).is_err());
    }

    #[test]
    fn index_order_is_lexicographic() {
        assert_eq!(BitVector::from_index(1, 3).to_string(), "001");
        assert_eq!(BitVector::from_index(6, 3).to_string(), "110");
        assert!(BitVector::from_index(3, 4) < BitVector::from_index(4, 4));
    }

    proptest! {
        #[test]
        fn round_trip(pairs in proptest::collection::vec(0u8..4, 1..80)) {
            let bits: Vec<u8> = pairs.iter().flat_map(|c| [c >> 1, c & 1]).collect();
            let b = BitVector::from_bits(&bits).unwrap();
            let stack = decode(&b).unwrap();
            prop_assert_eq!(stack.layers.len(), b.len() / 2);
            prop_assert!((stack.total_thickness_nm() - TOTAL_THICKNESS_NM).abs() <= 1e-9 * TOTAL_THICKNESS_NM);
            prop_assert_eq!(encode(&stack).unwrap(), b);
        }
    }
}
