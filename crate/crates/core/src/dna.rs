//! DNA coding of bytes: each byte is four 2-bit digits (most significant
//! first), each digit mapped to a base by one of the eight encodings that
//! respect Watson–Crick complementarity. Arithmetic on bases is done on their
//! digit values under a chosen rule.

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DnaBase {
    A,
    C,
    G,
    T,
}

impl DnaBase {
    pub fn complement(self) -> DnaBase {
        match self {
            DnaBase::A => DnaBase::T,
            DnaBase::T => DnaBase::A,
            DnaBase::C => DnaBase::G,
            DnaBase::G => DnaBase::C,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            DnaBase::A => 'A',
            DnaBase::C => 'C',
            DnaBase::G => 'G',
            DnaBase::T => 'T',
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

use DnaBase::{A, C, G, T};

/// Digit `00, 01, 10, 11` → base, rules 1 through 8.
const RULES: [[DnaBase; 4]; 8] = [
    [A, C, G, T],
    [A, G, C, T],
    [C, A, T, G],
    [C, T, A, G],
    [G, A, T, C],
    [G, T, A, C],
    [T, C, G, A],
    [T, G, C, A],
];

/// Inverse tables, indexed by `DnaBase as usize`.
const DIGITS: [[u8; 4]; 8] = {
    let mut out = [[0u8; 4]; 8];
    let mut r = 0;
    while r < 8 {
        let mut d = 0;
        while d < 4 {
            out[r][RULES[r][d] as usize] = d as u8;
            d += 1;
        }
        r += 1;
    }
    out
};

/// One of the eight complement-respecting encodings, numbered 1..=8.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DnaRule(u8);

impl DnaRule {
    pub const ALL: [DnaRule; 8] = [
        DnaRule(1),
        DnaRule(2),
        DnaRule(3),
        DnaRule(4),
        DnaRule(5),
        DnaRule(6),
        DnaRule(7),
        DnaRule(8),
    ];

    pub fn new(id: u8) -> Result<Self> {
        if (1..=8).contains(&id) {
            Ok(DnaRule(id))
        } else {
            Err(invalid(format!("DNA rule id must be 1..=8, got {id}")))
        }
    }

    /// Rule for a zero-based index in `0..8`.
    pub fn from_index(i: u8) -> Self {
        DnaRule(i % 8 + 1)
    }

    pub fn id(self) -> u8 {
        self.0
    }

    #[inline]
    pub fn base(self, digit: u8) -> DnaBase {
        RULES[(self.0 - 1) as usize][(digit & 3) as usize]
    }

    #[inline]
    pub fn digit(self, base: DnaBase) -> u8 {
        DIGITS[(self.0 - 1) as usize][base.slot()]
    }

    pub fn mapping(self) -> [DnaBase; 4] {
        RULES[(self.0 - 1) as usize]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DnaOp {
    Add,
    Sub,
    Xor,
}

impl DnaOp {
    /// Operator for a zero-based index in `0..3`.
    pub fn from_index(i: u8) -> Self {
        match i % 3 {
            0 => DnaOp::Add,
            1 => DnaOp::Sub,
            _ => DnaOp::Xor,
        }
    }

    pub fn inverse(self) -> Self {
        match self {
            DnaOp::Add => DnaOp::Sub,
            DnaOp::Sub => DnaOp::Add,
            DnaOp::Xor => DnaOp::Xor,
        }
    }

    #[inline]
    pub fn apply_digit(self, x: u8, y: u8) -> u8 {
        match self {
            DnaOp::Add => (x + y) & 3,
            DnaOp::Sub => (x + 4 - y) & 3,
            DnaOp::Xor => (x ^ y) & 3,
        }
    }

    /// Combines two bases through their digit values under `rule`.
    #[inline]
    pub fn apply(self, x: DnaBase, y: DnaBase, rule: DnaRule) -> DnaBase {
        rule.base(self.apply_digit(rule.digit(x), rule.digit(y)))
    }
}

#[inline]
pub fn encode_byte(b: u8, rule: DnaRule) -> [DnaBase; 4] {
    [
        rule.base(b >> 6),
        rule.base(b >> 4),
        rule.base(b >> 2),
        rule.base(b),
    ]
}

#[inline]
pub fn decode_byte(bases: &[DnaBase; 4], rule: DnaRule) -> u8 {
    bases
        .iter()
        .fold(0u8, |acc, &base| (acc << 2) | rule.digit(base))
}

pub fn op_bases(x: &[DnaBase; 4], y: &[DnaBase; 4], op: DnaOp, rule: DnaRule) -> [DnaBase; 4] {
    std::array::from_fn(|i| op.apply(x[i], y[i], rule))
}

pub const BLOCK_SIDE: usize = 4;
pub const BLOCK_PIXELS: usize = BLOCK_SIDE * BLOCK_SIDE;

/// A 4×4 pixel block in base space, pixels row-major.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DnaBlock {
    pub bases: [[DnaBase; 4]; BLOCK_PIXELS],
    pub rule: DnaRule,
}

impl DnaBlock {
    pub fn to_string_bases(&self) -> String {
        self.bases.iter().flatten().map(|b| b.as_char()).collect()
    }
}

pub fn dna_encode(block: &[u8; BLOCK_PIXELS], rule: DnaRule) -> DnaBlock {
    DnaBlock {
        bases: block.map(|b| encode_byte(b, rule)),
        rule,
    }
}

pub fn dna_decode(block: &DnaBlock, rule: DnaRule) -> [u8; BLOCK_PIXELS] {
    block.bases.map(|px| decode_byte(&px, rule))
}

/// Elementwise `op` on digit values under `rule`. The result is tagged with
/// `rule`.
pub fn dna_op(x: &DnaBlock, y: &DnaBlock, op: DnaOp, rule: DnaRule) -> DnaBlock {
    DnaBlock {
        bases: std::array::from_fn(|i| op_bases(&x.bases[i], &y.bases[i], op, rule)),
        rule,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const R1: DnaRule = DnaRule(1);

    #[test]
    fn rules_respect_complements() {
        for rule in DnaRule::ALL {
            let m = rule.mapping();
            for d in 0..4u8 {
                assert_eq!(
                    m[(!d & 3) as usize],
                    m[d as usize].complement(),
                    "rule {}",
                    rule.id()
                );
            }
            let mut seen = m.to_vec();
            seen.sort_by_key(|b| b.slot());
            seen.dedup();
            assert_eq!(seen.len(), 4);
        }
    }

    #[test]
    fn rule_one_examples() {
        assert_eq!(encode_byte(0x00, R1), [A, A, A, A]);
        assert_eq!(encode_byte(0xE4, R1), [T, G, C, A]);
        assert_eq!(decode_byte(&[A, A, A, A], R1), 0x00);
        assert_eq!(decode_byte(&[T, G, C, A], R1), 0xE4);
        assert_eq!(DnaOp::Add.apply(T, C, R1), A);
    }

    #[test]
    fn rule_ids() {
        assert!(DnaRule::new(0).is_err());
        assert!(DnaRule::new(9).is_err());
        assert_eq!(DnaRule::from_index(7).id(), 8);
        assert_eq!(DnaRule::from_index(8).id(), 1);
    }

    #[test]
    fn exhaustive_byte_round_trip() {
        for rule in DnaRule::ALL {
            for b in 0..=255u8 {
                assert_eq!(decode_byte(&encode_byte(b, rule), rule), b);
            }
        }
    }

    #[test]
    fn exhaustive_op_inverses() {
        for rule in DnaRule::ALL {
            for op in [DnaOp::Add, DnaOp::Sub, DnaOp::Xor] {
                for x in 0..=255u8 {
                    for y in 0..=255u8 {
                        let (bx, by) = (encode_byte(x, rule), encode_byte(y, rule));
                        let z = op_bases(&bx, &by, op, rule);
                        assert_eq!(op_bases(&z, &by, op.inverse(), rule), bx);
                    }
                }
            }
        }
    }

    #[test]
    fn xor_with_self_is_all_a_under_rule_one() {
        let block: [u8; 16] = std::array::from_fn(|i| (i * 37 + 5) as u8);
        let e = dna_encode(&block, R1);
        let z = dna_op(&e, &e, DnaOp::Xor, R1);
        assert!(z.to_string_bases().chars().all(|c| c == 'A'));
        assert_eq!(z.to_string_bases().len(), 64);
    }

    proptest! {
        #[test]
        fn block_round_trip(block in prop::array::uniform16(any::<u8>()), r in 0u8..8) {
            let rule = DnaRule::from_index(r);
            prop_assert_eq!(dna_decode(&dna_encode(&block, rule), rule), block);
        }

        #[test]
        fn block_op_inverse(
            x in prop::array::uniform16(any::<u8>()),
            y in prop::array::uniform16(any::<u8>()),
            rx in 0u8..8, ry in 0u8..8, o in 0u8..3,
        ) {
            let (rx, ry, op) = (DnaRule::from_index(rx), DnaRule::from_index(ry), DnaOp::from_index(o));
            let bx = dna_encode(&x, rx);
            let by = dna_encode(&y, ry);
            let c = dna_op(&bx, &by, op, rx);
            let back = dna_op(&c, &by, op.inverse(), rx);
            prop_assert_eq!(dna_decode(&back, rx), x);
        }
    }
}
