//! Classifier compression with holographic reduced representations.
//!
//! A classifier with `L` rows is packed into one hypervector
//! `w = sum_i K_i (*) W_i` where `K_i` is a random key for class `i` and `(*)`
//! is circular convolution. Keys are regenerated from the producer's agent ID,
//! so only `w` travels. Unpacking convolves `w` with each key's inverse; the
//! other `L - 1` bound pairs remain as crosstalk noise.
//!
//! Wire format (all integers little-endian):
//!
//! ```text
//! "HRRC" | version u16 | agent_id u64 | L u32 | D u32 | mode u8 | D x f64
//! ```

use nalgebra::DMatrix;
use rustfft::num_complex::Complex64;

use crate::classifier::{ClassifierKind, ClassifierMatrix};
use crate::error::check_dim;
use crate::hdc::{self, Hypervector, InverseMode};
use crate::{Error, Result, SeedSpec};

pub const MAGIC: &[u8; 4] = b"HRRC";
pub const FORMAT_VERSION: u16 = 1;
pub const HEADER_LEN: usize = 4 + 2 + 8 + 4 + 4 + 1;

/// Seed stream for the keys of `agent_id`. Depends on nothing else.
pub fn key_seed(agent_id: u64) -> SeedSpec {
    SeedSpec::new(agent_id)
}

#[derive(Debug, Clone)]
pub struct KeySet {
    agent_id: u64,
    keys: Vec<Hypervector>,
    mode: InverseMode,
    key_spectra: Vec<Vec<Complex64>>,
    inverse_spectra: Vec<Vec<Complex64>>,
}

impl PartialEq for KeySet {
    fn eq(&self, other: &Self) -> bool {
        self.agent_id == other.agent_id && self.keys == other.keys && self.mode == other.mode
    }
}

/// Keys for `classes` classes with the default (involution) inverse mode.
pub fn generate_keys(agent_id: u64, classes: usize, dim: usize) -> Result<KeySet> {
    generate_keys_with_mode(agent_id, classes, dim, InverseMode::default())
}

pub fn generate_keys_with_mode(
    agent_id: u64,
    classes: usize,
    dim: usize,
    mode: InverseMode,
) -> Result<KeySet> {
    if classes < 1 {
        return Err(Error::InvalidParameter("class count L must be >= 1".into()));
    }
    let seed = key_seed(agent_id);
    let keys = (0..classes)
        .map(|i| hdc::random_gaussian_key(dim, &seed.with("key", i as u64)))
        .collect::<Result<Vec<_>>>()?;
    KeySet::from_keys(agent_id, keys, mode)
}

impl KeySet {
    /// Builds a key set from explicit keys; inverses are computed eagerly so
    /// a singular key is reported here.
    pub fn from_keys(agent_id: u64, keys: Vec<Hypervector>, mode: InverseMode) -> Result<Self> {
        let dim = keys
            .first()
            .map(Hypervector::dim)
            .ok_or_else(|| Error::InvalidParameter("key set must be non-empty".into()))?;
        let mut key_spectra = Vec::with_capacity(keys.len());
        let mut inverse_spectra = Vec::with_capacity(keys.len());
        for k in &keys {
            check_dim(dim, k.dim())?;
            key_spectra.push(hdc::spectrum(k.as_slice()));
            let inv = hdc::inverse(k, mode)?;
            inverse_spectra.push(hdc::spectrum(inv.as_slice()));
        }
        Ok(Self {
            agent_id,
            keys,
            mode,
            key_spectra,
            inverse_spectra,
        })
    }

    pub fn agent_id(&self) -> u64 {
        self.agent_id
    }

    pub fn keys(&self) -> &[Hypervector] {
        &self.keys
    }

    pub fn mode(&self) -> InverseMode {
        self.mode
    }

    pub fn classes(&self) -> usize {
        self.keys.len()
    }

    pub fn dim(&self) -> usize {
        self.keys[0].dim()
    }

    /// Largest pairwise |cosine| between keys.
    pub fn max_pairwise_cosine(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for i in 0..self.keys.len() {
            for j in i + 1..self.keys.len() {
                worst = worst.max(hdc::cosine(&self.keys[i], &self.keys[j])?.abs());
            }
        }
        Ok(worst)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompressedClassifier {
    w: Hypervector,
    agent_id: u64,
    classes: usize,
    mode: InverseMode,
    kind: ClassifierKind,
}

impl CompressedClassifier {
    pub fn w(&self) -> &Hypervector {
        &self.w
    }

    pub fn agent_id(&self) -> u64 {
        self.agent_id
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn dim(&self) -> usize {
        self.w.dim()
    }

    pub fn mode(&self) -> InverseMode {
        self.mode
    }

    pub fn kind(&self) -> ClassifierKind {
        self.kind
    }

    /// Number of `f64` payload values (the header excluded).
    pub fn payload_values(&self) -> usize {
        self.w.dim()
    }

    pub fn encoded_len(&self) -> usize {
        HEADER_LEN + 8 * self.w.dim()
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&self.agent_id.to_le_bytes());
        out.extend_from_slice(&(self.classes as u32).to_le_bytes());
        out.extend_from_slice(&(self.w.dim() as u32).to_le_bytes());
        out.push(self.mode.code());
        for v in self.w.as_slice() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    /// Parses the wire format. The classifier kind is not on the wire; the
    /// receiver supplies it from the experiment configuration.
    pub fn decode(bytes: &[u8], kind: ClassifierKind) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Wire(format!(
                "{} bytes is shorter than the header",
                bytes.len()
            )));
        }
        if &bytes[..4] != MAGIC {
            return Err(Error::Wire("bad magic".into()));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != FORMAT_VERSION {
            return Err(Error::Wire(format!("unsupported version {version}")));
        }
        let agent_id = u64::from_le_bytes(bytes[6..14].try_into().expect("8 bytes"));
        let classes = u32::from_le_bytes(bytes[14..18].try_into().expect("4 bytes")) as usize;
        let dim = u32::from_le_bytes(bytes[18..22].try_into().expect("4 bytes")) as usize;
        let mode = InverseMode::from_code(bytes[22])
            .ok_or_else(|| Error::Wire(format!("unknown inverse mode {}", bytes[22])))?;
        let body = &bytes[HEADER_LEN..];
        if body.len() != 8 * dim {
            return Err(Error::Wire(format!(
                "expected {} payload bytes for D = {dim}, found {}",
                8 * dim,
                body.len()
            )));
        }
        let values = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        let w = Hypervector::new(values).map_err(|e| Error::Wire(e.to_string()))?;
        if classes < 1 {
            return Err(Error::Wire("class count is zero".into()));
        }
        Ok(Self {
            w,
            agent_id,
            classes,
            mode,
            kind,
        })
    }
}

fn check_shapes(w: &ClassifierMatrix, keys: &KeySet) -> Result<()> {
    check_dim(keys.classes(), w.classes())?;
    check_dim(keys.dim(), w.dim())
}

/// `w = sum_i K_i (*) W_i`.
pub fn compress(w: &ClassifierMatrix, keys: &KeySet) -> Result<CompressedClassifier> {
    check_shapes(w, keys)?;
    let dim = w.dim();
    let mut acc = vec![Complex64::new(0.0, 0.0); dim];
    for (i, key_spec) in keys.key_spectra.iter().enumerate() {
        let row = hdc::spectrum(&w.row(i));
        for ((a, k), r) in acc.iter_mut().zip(key_spec).zip(&row) {
            *a += k * r;
        }
    }
    Ok(CompressedClassifier {
        w: Hypervector::new(hdc::inverse_spectrum(acc))?,
        agent_id: keys.agent_id(),
        classes: w.classes(),
        mode: keys.mode(),
        kind: w.kind(),
    })
}

/// Row `i` of the result is `w (*) inverse(K_i)`.
pub fn decompress(c: &CompressedClassifier, keys: &KeySet) -> Result<ClassifierMatrix> {
    check_dim(keys.classes(), c.classes())?;
    check_dim(keys.dim(), c.dim())?;
    if keys.agent_id() != c.agent_id() {
        return Err(Error::Protocol(format!(
            "keys of agent {} cannot unpack a classifier from agent {}",
            keys.agent_id(),
            c.agent_id()
        )));
    }
    let dim = c.dim();
    let w_spec = hdc::spectrum(c.w.as_slice());
    let mut weights = DMatrix::zeros(c.classes(), dim);
    for (i, inv) in keys.inverse_spectra.iter().enumerate() {
        let row = hdc::convolve_spectra(&w_spec, inv);
        weights.row_mut(i).copy_from_slice(&row);
    }
    ClassifierMatrix::from_weights(weights, c.kind())
}

/// Cosine between each original row and its reconstruction. Zero rows (on
/// either side) report 0.
pub fn compression_fidelity(w: &ClassifierMatrix, keys: &KeySet) -> Result<Vec<f64>> {
    let restored = decompress(&compress(w, keys)?, keys)?;
    Ok((0..w.classes())
        .map(|i| hdc::cosine_slices(&w.row(i), &restored.row(i)).unwrap_or(0.0))
        .collect())
}
