//! Modbus RTU frames and the chaotic DNA encryption of their CRC field.
//!
//! Only the two CRC bytes are encrypted; address, function and data travel in
//! clear. The receiver decrypts the CRC with the shared key and the frame's
//! nonce and recomputes it over the clear fields.

use crate::dna::{decode_byte, encode_byte, op_bases, DnaOp, DnaRule};
use crate::error::{Error, Result};
use crate::keystream::{quantize_bytes, CipherKey, SequenceStream};

pub const MAX_FRAME: usize = 256;
pub const MAX_DATA: usize = MAX_FRAME - 4;

/// CRC-16/MODBUS lookup table, reflected polynomial 0xA001.
const CRC_TABLE: [u16; 256] = {
    let mut table = [0u16; 256];
    let mut i = 0;
    while i < 256 {
        let mut crc = i as u16;
        let mut k = 0;
        while k < 8 {
            crc = if crc & 1 != 0 {
                (crc >> 1) ^ 0xA001
            } else {
                crc >> 1
            };
            k += 1;
        }
        table[i] = crc;
        i += 1;
    }
    table
};

/// CRC-16/MODBUS: init 0xFFFF, reflected polynomial 0xA001, no final xor.
pub fn crc16(bytes: &[u8]) -> u16 {
    bytes.iter().fold(0xFFFF, |crc, &b| {
        (crc >> 8) ^ CRC_TABLE[((crc ^ b as u16) & 0xFF) as usize]
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModbusFrame {
    pub address: u8,
    pub function: u8,
    pub data: Vec<u8>,
    /// Sent low byte first.
    pub crc: u16,
}

impl ModbusFrame {
    fn body(&self) -> Vec<u8> {
        let mut v = Vec::with_capacity(self.data.len() + 2);
        v.push(self.address);
        v.push(self.function);
        v.extend_from_slice(&self.data);
        v
    }

    pub fn plain_crc(&self) -> u16 {
        crc16(&self.body())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut v = self.body();
        v.extend_from_slice(&self.crc.to_le_bytes());
        v
    }

    pub fn len(&self) -> usize {
        self.data.len() + 4
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Builds a frame with its plain CRC.
pub fn build_frame(address: u8, function: u8, data: &[u8]) -> Result<ModbusFrame> {
    if data.len() > MAX_DATA {
        return Err(Error::FrameTooLong(data.len() + 4));
    }
    let mut f = ModbusFrame {
        address,
        function,
        data: data.to_vec(),
        crc: 0,
    };
    f.crc = f.plain_crc();
    Ok(f)
}

/// Splits raw bytes into fields. The CRC is taken as-is, not checked.
pub fn parse_frame(bytes: &[u8]) -> Result<ModbusFrame> {
    if bytes.len() < 4 {
        return Err(Error::FrameTooShort(bytes.len()));
    }
    if bytes.len() > MAX_FRAME {
        return Err(Error::FrameTooLong(bytes.len()));
    }
    let n = bytes.len();
    Ok(ModbusFrame {
        address: bytes[0],
        function: bytes[1],
        data: bytes[2..n - 2].to_vec(),
        crc: u16::from_le_bytes([bytes[n - 2], bytes[n - 1]]),
    })
}

/// Keystream material for one CRC byte.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ByteMaterial {
    pub key_byte: u8,
    pub plain_rule: DnaRule,
    pub key_rule: DnaRule,
    pub op: DnaOp,
}

/// Encode with the plain rule, combine with the encoded key byte, decode with
/// the plain rule.
pub fn encrypt_byte(b: u8, m: &ByteMaterial) -> u8 {
    let x = encode_byte(b, m.plain_rule);
    let k = encode_byte(m.key_byte, m.key_rule);
    decode_byte(&op_bases(&x, &k, m.op, m.plain_rule), m.plain_rule)
}

pub fn decrypt_byte(b: u8, m: &ByteMaterial) -> u8 {
    let x = encode_byte(b, m.plain_rule);
    let k = encode_byte(m.key_byte, m.key_rule);
    decode_byte(
        &op_bases(&x, &k, m.op.inverse(), m.plain_rule),
        m.plain_rule,
    )
}

pub fn transform_crc(crc: u16, material: &[ByteMaterial; 2], decrypt: bool) -> u16 {
    let [lo, hi] = crc.to_le_bytes();
    let f = if decrypt { decrypt_byte } else { encrypt_byte };
    u16::from_le_bytes([f(lo, &material[0]), f(hi, &material[1])])
}

/// Per-session keystream for CRC protection. Frame `nonce` consumes sequence
/// positions `2·nonce` and `2·nonce + 1` of A (key bytes), X (plain rules),
/// Y (key rules) and H (operators).
pub struct CrcCipher {
    stream: SequenceStream,
    scale: f64,
}

impl CrcCipher {
    pub fn new(key: &CipherKey) -> Result<Self> {
        Ok(CrcCipher {
            stream: SequenceStream::new(key)?,
            scale: key.quantizer_scale as f64,
        })
    }

    pub fn material(&mut self, nonce: u64) -> Result<[ByteMaterial; 2]> {
        let start = usize::try_from(nonce)
            .ok()
            .and_then(|n| n.checked_mul(2))
            .ok_or_else(|| crate::error::invalid("nonce too large"))?;
        let seqs = self.stream.ensure(start + 2)?;
        let bytes = |x: &[f64]| quantize_bytes(&x[start..start + 2], self.scale);
        let (a, x, y, h) = (
            bytes(&seqs.a),
            bytes(&seqs.x),
            bytes(&seqs.y),
            bytes(&seqs.h),
        );
        Ok(std::array::from_fn(|i| ByteMaterial {
            key_byte: a[i],
            plain_rule: DnaRule::from_index(x[i] % 8),
            key_rule: DnaRule::from_index(y[i] % 8),
            op: DnaOp::from_index(h[i] % 3),
        }))
    }

    pub fn encrypt_crc(&mut self, frame: &ModbusFrame, nonce: u64) -> Result<ModbusFrame> {
        if frame.data.len() > MAX_DATA {
            return Err(Error::FrameTooLong(frame.len()));
        }
        let m = self.material(nonce)?;
        Ok(ModbusFrame {
            crc: transform_crc(frame.crc, &m, false),
            ..frame.clone()
        })
    }

    pub fn decrypt_crc(&mut self, frame: &ModbusFrame, nonce: u64) -> Result<ModbusFrame> {
        if frame.data.len() > MAX_DATA {
            return Err(Error::FrameTooLong(frame.len()));
        }
        let m = self.material(nonce)?;
        Ok(ModbusFrame {
            crc: transform_crc(frame.crc, &m, true),
            ..frame.clone()
        })
    }

    pub fn verify(&mut self, frame: &ModbusFrame, nonce: u64) -> Verdict {
        match self.decrypt_crc(frame, nonce) {
            Ok(plain) if plain.crc == plain.plain_crc() => Verdict::Accept,
            _ => Verdict::Reject,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject,
}

pub fn encrypt_crc(frame: &ModbusFrame, key: &CipherKey, nonce: u64) -> Result<ModbusFrame> {
    CrcCipher::new(key)?.encrypt_crc(frame, nonce)
}

pub fn decrypt_crc(frame: &ModbusFrame, key: &CipherKey, nonce: u64) -> Result<ModbusFrame> {
    CrcCipher::new(key)?.decrypt_crc(frame, nonce)
}

pub fn verify_frame(frame: &ModbusFrame, key: &CipherKey, nonce: u64) -> Verdict {
    match CrcCipher::new(key) {
        Ok(mut c) => c.verify(frame, nonce),
        Err(_) => Verdict::Reject,
    }
}

/// Parses `"010300000001"`-style hex, whitespace ignored.
pub fn parse_hex(s: &str) -> Result<Vec<u8>> {
    let digits: Vec<u8> = s.bytes().filter(|c| !c.is_ascii_whitespace()).collect();
    if !digits.len().is_multiple_of(2) {
        return Err(crate::error::invalid("hex string has odd length"));
    }
    digits
        .chunks(2)
        .map(|pair| {
            let text = std::str::from_utf8(pair).map_err(|_| crate::error::invalid("bad hex"))?;
            u8::from_str_radix(text, 16)
                .map_err(|_| crate::error::invalid(format!("bad hex digit pair `{text}`")))
        })
        .collect()
}

pub fn to_hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02X}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keystream::CipherKey;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// MSB-first polynomial long division with 0x8005 on bit-reversed input,
    /// result bit-reversed. Independent of the reflected table above.
    fn crc16_oracle(bytes: &[u8]) -> u16 {
        let mut reg: u16 = 0xFFFF;
        for &b in bytes {
            let b = b.reverse_bits();
            for i in (0..8).rev() {
                let bit = ((b >> i) & 1) as u16;
                let top = (reg >> 15) & 1;
                reg <<= 1;
                if top ^ bit == 1 {
                    reg ^= 0x8005;
                }
            }
        }
        reg.reverse_bits()
    }

    #[test]
    fn crc_known_values() {
        assert_eq!(crc16(&[]), 0xFFFF);
        assert_eq!(crc16(b"123456789"), 0x4B37);
        assert_eq!(crc16_oracle(b"123456789"), 0x4B37);
        // read holding register request, CRC 0x0A84 sent as 84 0A
        let f = build_frame(0x01, 0x03, &[0x00, 0x00, 0x00, 0x01]).unwrap();
        assert_eq!(to_hex(&f.to_bytes()), "010300000001840A");
    }

    #[test]
    fn crc_matches_oracle_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..10_000 {
            let len = rng.random_range(0..64);
            let v: Vec<u8> = (0..len).map(|_| rng.random()).collect();
            assert_eq!(crc16(&v), crc16_oracle(&v));
        }
    }

    #[test]
    fn appended_crc_gives_zero_residue() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let len = rng.random_range(1..40);
            let data: Vec<u8> = (0..len).map(|_| rng.random()).collect();
            let f = build_frame(rng.random(), rng.random(), &data).unwrap();
            assert_eq!(crc16(&f.to_bytes()), 0x0000);
        }
    }

    #[test]
    fn parse_build_round_trip_and_limits() {
        let f = build_frame(0x01, 0x03, &[0x00, 0x00, 0x00, 0x01]).unwrap();
        assert_eq!(parse_frame(&f.to_bytes()).unwrap(), f);
        assert!(matches!(
            parse_frame(&[1, 2, 3]),
            Err(Error::FrameTooShort(3))
        ));
        assert!(matches!(
            parse_frame(&[0u8; 257]),
            Err(Error::FrameTooLong(257))
        ));
        assert!(matches!(
            build_frame(1, 1, &[0u8; 253]),
            Err(Error::FrameTooLong(_))
        ));
        assert!(build_frame(1, 1, &[0u8; 252]).is_ok());
        let empty = parse_frame(&[1, 2, 3, 4]).unwrap();
        assert!(empty.data.is_empty());
    }

    #[test]
    fn xor_with_zero_key_byte_is_identity() {
        let rule = DnaRule::new(1).unwrap();
        let m = ByteMaterial {
            key_byte: 0,
            plain_rule: rule,
            key_rule: rule,
            op: DnaOp::Xor,
        };
        for crc in [0x0000u16, 0x4B37, 0xFFFF, 0x840A] {
            assert_eq!(transform_crc(crc, &[m, m], false), crc);
        }
    }

    #[test]
    fn byte_transform_inverts_for_all_material() {
        for pr in DnaRule::ALL {
            for kr in DnaRule::ALL {
                for op in [DnaOp::Add, DnaOp::Sub, DnaOp::Xor] {
                    for kb in [0u8, 1, 0x5A, 0xFF] {
                        let m = ByteMaterial {
                            key_byte: kb,
                            plain_rule: pr,
                            key_rule: kr,
                            op,
                        };
                        for b in 0..=255u8 {
                            assert_eq!(decrypt_byte(encrypt_byte(b, &m), &m), b);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn hex_parsing() {
        assert_eq!(parse_hex("0103 0000 0001").unwrap(), vec![1, 3, 0, 0, 0, 1]);
        assert!(parse_hex("010").is_err());
        assert!(parse_hex("zz").is_err());
        assert_eq!(to_hex(&[0xAB, 0x01]), "AB01");
    }

    fn test_key() -> CipherKey {
        CipherKey {
            transient_steps: 2000,
            ..CipherKey::default()
        }
    }

    #[test]
    fn encrypt_verify_session() {
        let key = test_key();
        let mut tx = CrcCipher::new(&key).unwrap();
        let mut rx = CrcCipher::new(&key).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        for nonce in 0..2000u64 {
            let len = rng.random_range(0..20);
            let data: Vec<u8> = (0..len).map(|_| rng.random()).collect();
            let f = build_frame(rng.random(), rng.random(), &data).unwrap();
            let enc = tx.encrypt_crc(&f, nonce).unwrap();
            assert_eq!(rx.decrypt_crc(&enc, nonce).unwrap(), f);
            assert_eq!(rx.verify(&enc, nonce), Verdict::Accept);
        }
    }

    #[test]
    fn nonce_changes_ciphertext() {
        let key = test_key();
        let mut c = CrcCipher::new(&key).unwrap();
        let f = build_frame(0x11, 0x06, &[0x00, 0x01, 0x00, 0x03]).unwrap();
        let encs: Vec<u16> = (0..16).map(|n| c.encrypt_crc(&f, n).unwrap().crc).collect();
        let mut distinct = encs.clone();
        distinct.sort();
        distinct.dedup();
        assert!(distinct.len() >= 12, "{encs:?}");
        assert_ne!(encs[0], encs[1]);
    }

    #[test]
    fn wrong_nonce_and_tampering_rejected() {
        let key = test_key();
        let f = build_frame(0x01, 0x03, &[0x00, 0x6B, 0x00, 0x03]).unwrap();
        let enc = encrypt_crc(&f, &key, 5).unwrap();
        assert_eq!(verify_frame(&enc, &key, 5), Verdict::Accept);
        assert_eq!(verify_frame(&enc, &key, 6), Verdict::Reject);
        let mut cipher = CrcCipher::new(&key).unwrap();
        for bit in 0..(enc.data.len() * 8) {
            let mut t = enc.clone();
            t.data[bit / 8] ^= 1 << (bit % 8);
            assert_eq!(cipher.verify(&t, 5), Verdict::Reject);
        }
    }
}
