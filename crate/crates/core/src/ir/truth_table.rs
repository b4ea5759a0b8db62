use std::fmt;
use std::str::FromStr;

use super::IrError;

/// Bits of `index` as an `n`-entry big-endian vector (entry 0 is the MSB).
pub fn index_bits(index: usize, n: usize) -> Vec<bool> {
    (0..n).map(|i| (index >> (n - 1 - i)) & 1 == 1).collect()
}

/// Inverse of [`index_bits`].
pub fn bits_index(bits: &[bool]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b))
}

/// Boolean function on `arity` inputs stored as its `2^arity` outputs.
///
/// Entry `x` is the value on the input whose big-endian reading is `x`,
/// so input 0 is the most significant bit.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TruthTable {
    arity: usize,
    bits: Vec<bool>,
}

impl TruthTable {
    pub fn new(arity: usize, bits: Vec<bool>) -> Result<Self, IrError> {
        if arity >= usize::BITS as usize || bits.len() != 1usize << arity {
            return Err(IrError::schema(
                "$",
                format!("truth table of arity {arity} needs {} bits, got {}", 1u128 << arity, bits.len()),
            ));
        }
        Ok(Self { arity, bits })
    }

    pub fn from_fn(arity: usize, f: impl Fn(&[bool]) -> bool) -> Self {
        let bits = (0..1usize << arity).map(|x| f(&index_bits(x, arity))).collect();
        Self { arity, bits }
    }

    pub fn constant(arity: usize, value: bool) -> Self {
        Self {
            arity,
            bits: vec![value; 1 << arity],
        }
    }

    pub fn parity(arity: usize) -> Self {
        Self::from_fn(arity, |x| x.iter().filter(|&&b| b).count() % 2 == 1)
    }

    pub fn and(arity: usize) -> Self {
        Self::from_fn(arity, |x| x.iter().all(|&b| b))
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, index: usize) -> bool {
        self.bits[index]
    }

    pub fn eval(&self, inputs: &[bool]) -> bool {
        assert_eq!(inputs.len(), self.arity);
        self.bits[bits_index(inputs)]
    }

    pub fn is_constant(&self) -> bool {
        self.bits.iter().all(|&b| b == self.bits[0])
    }

    /// Whether the function changes when input `i` alone is flipped, for some input.
    pub fn depends_on(&self, i: usize) -> bool {
        let mask = 1usize << (self.arity - 1 - i);
        (0..self.bits.len()).any(|x| self.bits[x] != self.bits[x ^ mask])
    }

    pub fn to_bit_string(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

impl FromStr for TruthTable {
    type Err = IrError;

    /// Parses a `"0110"`-style string; the length must be a power of two.
    fn from_str(s: &str) -> Result<Self, IrError> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(IrError::schema("$", format!("invalid truth-table character {other:?}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if !bits.len().is_power_of_two() {
            return Err(IrError::schema(
                "$",
                format!("truth table length {} is not a power of two", bits.len()),
            ));
        }
        let arity = bits.len().trailing_zeros() as usize;
        Self::new(arity, bits)
    }
}

impl fmt::Display for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bit_string())
    }
}

impl fmt::Debug for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruthTable({}: {})", self.arity, self.to_bit_string())
    }
}
