//! Checkpoint container.
//!
//! ```text
//! b"GAZEGEN\0" | u32 LE header length | JSON header | f32 LE arrays
//! ```
//!
//! The header lists every array with its shape and element offset, in file
//! order. Arrays are named `g.*` (generator), `d.*` (discriminator) and
//! `opt.{g,d}.{acc,vel}.*` (optimizer state).

use std::path::Path;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{Regime, TrainConfig};
use crate::error::{Error, Result};
use crate::gan::{DiscriminatorSpec, GeneratorSpec};

pub const MAGIC: &[u8; 8] = b"GAZEGEN\0";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Position of a ChaCha8 stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    pub seed: String,
    pub stream: u64,
    pub word_pos: u128,
}

impl RngState {
    pub fn capture(rng: &ChaCha8Rng) -> Self {
        Self {
            seed: rng.get_seed().iter().map(|b| format!("{b:02x}")).collect(),
            stream: rng.get_stream(),
            word_pos: rng.get_word_pos(),
        }
    }

    pub fn restore(&self) -> Result<ChaCha8Rng> {
        use rand::SeedableRng;
        let bad = || Error::Checkpoint(format!("malformed rng seed {:?}", self.seed));
        if self.seed.len() != 64 {
            return Err(bad());
        }
        let mut seed = [0u8; 32];
        for (i, b) in seed.iter_mut().enumerate() {
            *b = u8::from_str_radix(&self.seed[2 * i..2 * i + 2], 16).map_err(|_| bad())?;
        }
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(self.word_pos);
        Ok(rng)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedArray {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ArrayEntry {
    name: String,
    shape: Vec<usize>,
    offset: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    format_version: u32,
    regime: Regime,
    epoch: usize,
    step: usize,
    image_side: usize,
    generator_spec: GeneratorSpec,
    discriminator_spec: DiscriminatorSpec,
    config: TrainConfig,
    rng_state: RngState,
    arrays: Vec<ArrayEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelCheckpoint {
    pub format_version: u32,
    pub regime: Regime,
    pub epoch: usize,
    /// Training steps taken so far.
    pub step: usize,
    pub image_side: usize,
    pub generator_spec: GeneratorSpec,
    pub discriminator_spec: DiscriminatorSpec,
    pub config: TrainConfig,
    pub rng_state: RngState,
    pub arrays: Vec<NamedArray>,
}

impl ModelCheckpoint {
    pub fn array(&self, name: &str) -> Option<&NamedArray> {
        self.arrays.iter().find(|a| a.name == name)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut offset = 0;
        let arrays = self
            .arrays
            .iter()
            .map(|a| {
                let e = ArrayEntry {
                    name: a.name.clone(),
                    shape: a.shape.clone(),
                    offset,
                };
                offset += a.data.len();
                e
            })
            .collect();
        let header = Header {
            format_version: self.format_version,
            regime: self.regime,
            epoch: self.epoch,
            step: self.step,
            image_side: self.image_side,
            generator_spec: self.generator_spec,
            discriminator_spec: self.discriminator_spec,
            config: self.config.clone(),
            rng_state: self.rng_state.clone(),
            arrays,
        };
        let json = serde_json::to_vec(&header)?;
        let mut out = Vec::with_capacity(12 + json.len() + 4 * offset);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(json.len() as u32).to_le_bytes());
        out.extend_from_slice(&json);
        for a in &self.arrays {
            for v in &a.data {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let corrupt = |why: &str| Error::Checkpoint(why.to_string());
        if bytes.len() < 12 || &bytes[..8] != MAGIC {
            return Err(corrupt("not a checkpoint file (bad magic)"));
        }
        let hlen = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let body = bytes.get(12..12 + hlen).ok_or_else(|| corrupt("truncated header"))?;
        let header: Header =
            serde_json::from_slice(body).map_err(|e| Error::Checkpoint(format!("bad header: {e}")))?;
        if header.format_version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "checkpoint format_version {} is not {CHECKPOINT_VERSION}",
                header.format_version
            )));
        }
        let data = &bytes[12 + hlen..];
        if data.len() % 4 != 0 {
            return Err(corrupt("array section is not a whole number of f32 values"));
        }
        let total = data.len() / 4;
        let mut arrays = Vec::with_capacity(header.arrays.len());
        let mut expected_offset = 0;
        for e in &header.arrays {
            let len: usize = e.shape.iter().product();
            if e.offset != expected_offset || e.offset + len > total {
                return Err(Error::Checkpoint(format!("array {} out of bounds", e.name)));
            }
            let raw = &data[4 * e.offset..4 * (e.offset + len)];
            let values = raw
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                .collect();
            arrays.push(NamedArray {
                name: e.name.clone(),
                shape: e.shape.clone(),
                data: values,
            });
            expected_offset += len;
        }
        if expected_offset != total {
            return Err(corrupt("trailing bytes after the last array"));
        }
        Ok(Self {
            format_version: header.format_version,
            regime: header.regime,
            epoch: header.epoch,
            step: header.step,
            image_side: header.image_side,
            generator_spec: header.generator_spec,
            discriminator_spec: header.discriminator_spec,
            config: header.config,
            rng_state: header.rng_state,
            arrays,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::io::write_atomic(path, &self.to_bytes()?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::load(path, e))?;
        Self::from_bytes(&bytes).map_err(|e| Error::load(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngCore, SeedableRng};

    fn sample() -> ModelCheckpoint {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        rng.next_u64();
        ModelCheckpoint {
            format_version: CHECKPOINT_VERSION,
            regime: Regime::Text,
            epoch: 2,
            step: 7,
            image_side: 64,
            generator_spec: GeneratorSpec::default(),
            discriminator_spec: DiscriminatorSpec::default(),
            config: TrainConfig::default(),
            rng_state: RngState::capture(&rng),
            arrays: vec![
                NamedArray { name: "g.a".into(), shape: vec![2, 2], data: vec![0.1, -0.0, f32::MIN_POSITIVE, 3.5] },
                NamedArray { name: "d.b".into(), shape: vec![3], data: vec![1.0, 2.0, 3.0] },
            ],
        }
    }

    #[test]
    fn bytes_round_trip_exactly() {
        let c = sample();
        let b = c.to_bytes().unwrap();
        let back = ModelCheckpoint::from_bytes(&b).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_bytes().unwrap(), b);
    }

    #[test]
    fn rng_state_resumes_the_stream() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        rng.next_u32();
        let state = RngState::capture(&rng);
        let mut resumed = state.restore().unwrap();
        assert_eq!(rng.next_u64(), resumed.next_u64());
    }

    #[test]
    fn corruption_is_reported() {
        let mut b = sample().to_bytes().unwrap();
        assert!(ModelCheckpoint::from_bytes(&b[..10]).is_err());
        b.push(0);
        assert!(matches!(ModelCheckpoint::from_bytes(&b), Err(Error::Checkpoint(_))));
        let mut c = sample();
        c.format_version = 99;
        assert!(ModelCheckpoint::from_bytes(&c.to_bytes().unwrap()).is_err());
        let mut bad = c.to_bytes().unwrap();
        bad[0] = b'X';
        assert!(ModelCheckpoint::from_bytes(&bad).is_err());
    }
}
