//! Binary model files.
//!
//! ```text
//! offset  size  field
//! 0       8     magic "CCCPDEMF"
//! 8       4     format version (u32 LE)
//! 12      1     model kind: 1 = cccpde, 2 = ffnn, 3 = glm
//! 13      8     payload length in bytes (u64 LE)
//! 21      n     payload
//! 21+n    4     CRC-32 (IEEE) of bytes 0..21+n (u32 LE)
//! ```
//!
//! Inside the payload every integer is a u64 LE and every float an f64 LE.
//! A matrix is `rows, cols` followed by its row-major values; a vector is its
//! length followed by the values.

use std::fs;
use std::path::Path;

use super::{CccpDeModel, FfnnModel, GlmRegressor, SigmoidClassifier};
use crate::data::Standardizer;
use crate::error::{Error, ModelFileError, Result};
use crate::flow::{CouplingLayer, FlowStack};
use crate::nn::{Activation, DenseBlock, DenseLayer, LayerNorm, Mlp};
use crate::numerics::Matrix;

pub const MAGIC: [u8; 8] = *b"CCCPDEMF";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 21;

/// Any model that can be written to a model file.
#[derive(Debug, Clone, PartialEq)]
pub enum SavedModel {
    Cccpde(CccpDeModel),
    Ffnn(FfnnModel),
    Glm(GlmRegressor),
}

impl SavedModel {
    fn kind(&self) -> u8 {
        match self {
            SavedModel::Cccpde(_) => 1,
            SavedModel::Ffnn(_) => 2,
            SavedModel::Glm(_) => 3,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            SavedModel::Cccpde(_) => "cccpde",
            SavedModel::Ffnn(_) => "ffnn",
            SavedModel::Glm(_) => "glm",
        }
    }
}

pub fn save_model(model: &SavedModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_model(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SavedModel> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_model(&bytes)
}

pub fn encode_model(model: &SavedModel) -> Vec<u8> {
    let mut w = Writer::default();
    match model {
        SavedModel::Cccpde(m) => {
            w.standardizer(&m.standardizer);
            w.stack(&m.base);
            w.u64(m.heads.len());
            for head in &m.heads {
                w.stack(head);
            }
            w.classifier(&m.disc);
            w.f64s(m.class_counts());
        }
        SavedModel::Ffnn(m) => {
            w.standardizer(&m.standardizer);
            w.classifier(&m.net);
        }
        SavedModel::Glm(m) => {
            w.mlp(&m.hidden);
            w.dense(&m.mean_head);
            w.dense(&m.log_var_head);
        }
    }
    let payload = w.buf;
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len() + 4);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(model.kind());
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(&payload);
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

pub fn decode_model(bytes: &[u8]) -> Result<SavedModel> {
    let magic_len = bytes.len().min(MAGIC.len());
    if bytes[..magic_len] != MAGIC[..magic_len] {
        return Err(ModelFileError::BadMagic.into());
    }
    if bytes.len() < HEADER_LEN {
        return Err(ModelFileError::Truncated.into());
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != FORMAT_VERSION {
        return Err(ModelFileError::Version {
            found: version,
            supported: FORMAT_VERSION,
        }
        .into());
    }
    let kind = bytes[12];
    let payload_len = u64::from_le_bytes(bytes[13..21].try_into().expect("8 bytes"));
    let expected = usize::try_from(payload_len)
        .ok()
        .and_then(|n| n.checked_add(HEADER_LEN + 4))
        .ok_or_else(|| ModelFileError::Malformed("payload length overflows".into()))?;
    if bytes.len() < expected {
        return Err(ModelFileError::Truncated.into());
    }
    if bytes.len() > expected {
        return Err(ModelFileError::Malformed(format!(
            "{} unexpected trailing bytes",
            bytes.len() - expected
        ))
        .into());
    }
    let body = &bytes[..expected - 4];
    let stored = u32::from_le_bytes(bytes[expected - 4..].try_into().expect("4 bytes"));
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(ModelFileError::Checksum { stored, computed }.into());
    }

    let mut r = Reader {
        buf: &body[HEADER_LEN..],
        pos: 0,
    };
    let model = match kind {
        1 => {
            let standardizer = r.standardizer()?;
            let base = r.stack()?;
            let n_heads = r.len()?;
            let heads = (0..n_heads).map(|_| r.stack()).collect::<Result<Vec<_>>>()?;
            let disc = r.classifier()?;
            let counts = r.f64s()?;
            SavedModel::Cccpde(CccpDeModel::from_parts(standardizer, base, heads, disc, counts).map_err(malformed)?)
        }
        2 => SavedModel::Ffnn(FfnnModel {
            standardizer: r.standardizer()?,
            net: r.classifier()?,
        }),
        3 => {
            let hidden = r.mlp()?;
            let mean = r.dense()?;
            let log_var = r.dense()?;
            SavedModel::Glm(GlmRegressor::from_parts(hidden, mean, log_var).map_err(malformed)?)
        }
        other => return Err(ModelFileError::Malformed(format!("unknown model kind {other}")).into()),
    };
    if r.pos != r.buf.len() {
        return Err(ModelFileError::Malformed("payload has unread bytes".into()).into());
    }
    if let SavedModel::Ffnn(m) = &model {
        if m.standardizer.dim() != m.net.in_dim() {
            return Err(ModelFileError::Malformed("standardizer and network disagree on dimension".into()).into());
        }
    }
    Ok(model)
}

fn malformed(e: Error) -> Error {
    ModelFileError::Malformed(e.to_string()).into()
}

#[derive(Default)]
struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    fn u64(&mut self, v: usize) {
        self.buf.extend_from_slice(&(v as u64).to_le_bytes());
    }

    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn f64s(&mut self, v: &[f64]) {
        self.u64(v.len());
        v.iter().for_each(|&x| self.f64(x));
    }

    fn matrix(&mut self, m: &Matrix) {
        self.u64(m.rows());
        self.u64(m.cols());
        m.data().iter().for_each(|&x| self.f64(x));
    }

    fn dense(&mut self, d: &DenseLayer) {
        self.matrix(&d.weights.value);
        self.matrix(&d.bias.value);
    }

    fn mlp(&mut self, m: &Mlp) {
        self.u64(m.layers.len());
        for (layer, act) in m.layers.iter().zip(&m.activations) {
            self.u8(act.code());
            self.dense(layer);
        }
    }

    fn stack(&mut self, s: &FlowStack) {
        self.u64(s.dim());
        self.u64(s.depth());
        for layer in &s.layers {
            self.u64(layer.permutation().len());
            layer.permutation().iter().for_each(|&p| self.u64(p));
            self.mlp(&layer.s_net);
            self.mlp(&layer.t_net);
        }
    }

    fn classifier(&mut self, c: &SigmoidClassifier) {
        self.u64(c.blocks.len());
        for b in &c.blocks {
            self.f64(b.dropout);
            self.u8(b.activation.code());
            self.dense(&b.dense);
            self.matrix(&b.norm.gain.value);
            self.matrix(&b.norm.bias.value);
        }
        self.dense(&c.output);
    }

    fn standardizer(&mut self, s: &Standardizer) {
        self.f64s(s.mean());
        self.f64s(s.std());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

/// Upper bound on any decoded length, so corrupt counts cannot trigger
/// huge allocations.
const MAX_LEN: u64 = 1 << 32;

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| ModelFileError::Malformed("payload ends mid-field".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn len(&mut self) -> Result<usize> {
        let v = u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes"));
        if v > MAX_LEN {
            return Err(ModelFileError::Malformed(format!("implausible length {v}")).into());
        }
        Ok(v as usize)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64s(&mut self) -> Result<Vec<f64>> {
        let n = self.len()?;
        (0..n).map(|_| self.f64()).collect()
    }

    fn matrix(&mut self) -> Result<Matrix> {
        let rows = self.len()?;
        let cols = self.len()?;
        let n = rows
            .checked_mul(cols)
            .filter(|&n| n as u64 <= MAX_LEN)
            .ok_or_else(|| ModelFileError::Malformed("matrix too large".into()))?;
        let data = (0..n).map(|_| self.f64()).collect::<Result<Vec<_>>>()?;
        Matrix::new(rows, cols, data).map_err(malformed)
    }

    fn activation(&mut self) -> Result<Activation> {
        let code = self.u8()?;
        Activation::from_code(code)
            .ok_or_else(|| ModelFileError::Malformed(format!("unknown activation code {code}")).into())
    }

    fn row(&mut self) -> Result<Vec<f64>> {
        let m = self.matrix()?;
        if m.rows() != 1 {
            return Err(ModelFileError::Malformed("expected a row vector".into()).into());
        }
        Ok(m.into_data())
    }

    fn dense(&mut self) -> Result<DenseLayer> {
        let w = self.matrix()?;
        let b = self.row()?;
        DenseLayer::from_parts(w, b).map_err(malformed)
    }

    fn mlp(&mut self) -> Result<Mlp> {
        let n = self.len()?;
        let mut layers = Vec::with_capacity(n.min(64));
        let mut acts = Vec::with_capacity(n.min(64));
        for _ in 0..n {
            acts.push(self.activation()?);
            layers.push(self.dense()?);
        }
        Mlp::from_layers(layers, acts).map_err(malformed)
    }

    fn stack(&mut self) -> Result<FlowStack> {
        let dim = self.len()?;
        let depth = self.len()?;
        let mut layers = Vec::with_capacity(depth.min(64));
        for _ in 0..depth {
            let n = self.len()?;
            let perm = (0..n).map(|_| self.len()).collect::<Result<Vec<_>>>()?;
            let s = self.mlp()?;
            let t = self.mlp()?;
            layers.push(CouplingLayer::from_parts(dim, perm, s, t).map_err(malformed)?);
        }
        FlowStack::from_layers(dim, layers).map_err(malformed)
    }

    fn classifier(&mut self) -> Result<SigmoidClassifier> {
        let n = self.len()?;
        let mut blocks = Vec::with_capacity(n.min(64));
        for _ in 0..n {
            let dropout = self.f64()?;
            if !(0.0..1.0).contains(&dropout) {
                return Err(ModelFileError::Malformed(format!("dropout rate {dropout}")).into());
            }
            let activation = self.activation()?;
            let dense = self.dense()?;
            let norm = LayerNorm::from_parts(self.row()?, self.row()?).map_err(malformed)?;
            if norm.dim() != dense.out_dim() {
                return Err(ModelFileError::Malformed("layer norm width mismatch".into()).into());
            }
            blocks.push(DenseBlock {
                dropout,
                dense,
                norm,
                activation,
            });
        }
        let output = self.dense()?;
        SigmoidClassifier::from_parts(blocks, output).map_err(malformed)
    }

    fn standardizer(&mut self) -> Result<Standardizer> {
        let mean = self.f64s()?;
        let std = self.f64s()?;
        Standardizer::from_parts(mean, std).map_err(malformed)
    }
}
