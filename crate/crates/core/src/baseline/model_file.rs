//! Binary weights file, all integers and floats little-endian:
//!
//! ```text
//! magic       4 bytes  "LXBM"
//! version     u32      1
//! dim         u64      vocabulary size = number of weights
//! lr          f64
//! l2_lambda   f64
//! epochs      u32
//! batch_size  u32
//! seed        u64
//! min_df      u32
//! bias        f64
//! weights     dim x f64
//! tokens      dim x (u32 byte length, UTF-8 bytes), in index order
//! ```
//!
//! Nothing may follow the last token.

use super::{BaselineError, ModelWeights, TrainConfig, TrainedModel, Vocabulary};

pub const MAGIC: &[u8; 4] = b"LXBM";
pub const VERSION: u32 = 1;

pub fn encode(model: &TrainedModel) -> Vec<u8> {
    let w = &model.weights;
    let c = &w.config;
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(w.w.len() as u64).to_le_bytes());
    out.extend_from_slice(&c.learning_rate.to_le_bytes());
    out.extend_from_slice(&c.l2_lambda.to_le_bytes());
    out.extend_from_slice(&c.epochs.to_le_bytes());
    out.extend_from_slice(&c.batch_size.to_le_bytes());
    out.extend_from_slice(&c.seed.to_le_bytes());
    out.extend_from_slice(&c.min_df.to_le_bytes());
    out.extend_from_slice(&w.b.to_le_bytes());
    for x in &w.w {
        out.extend_from_slice(&x.to_le_bytes());
    }
    for tok in model.vocab.tokens() {
        out.extend_from_slice(&(tok.len() as u32).to_le_bytes());
        out.extend_from_slice(tok.as_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], BaselineError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| BaselineError::Format(format!("truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], BaselineError> {
        Ok(self.take(N)?.try_into().expect("slice has requested length"))
    }

    fn u32(&mut self) -> Result<u32, BaselineError> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn u64(&mut self) -> Result<u64, BaselineError> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    fn f64(&mut self) -> Result<f64, BaselineError> {
        let v = f64::from_le_bytes(self.array()?);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(BaselineError::Format(format!("non-finite value before byte {}", self.pos)))
        }
    }
}

pub fn decode(bytes: &[u8]) -> Result<TrainedModel, BaselineError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(BaselineError::Format("bad magic".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(BaselineError::Format(format!("unsupported version {version}")));
    }
    let dim = r.u64()? as usize;
    let config = TrainConfig {
        learning_rate: r.f64()?,
        l2_lambda: r.f64()?,
        epochs: r.u32()?,
        batch_size: r.u32()?,
        seed: r.u64()?,
        min_df: r.u32()?,
    };
    let b = r.f64()?;
    if dim > bytes.len() / 8 {
        return Err(BaselineError::Format(format!("dimension {dim} exceeds file size")));
    }
    let w = (0..dim).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
    let mut tokens = Vec::with_capacity(dim);
    for _ in 0..dim {
        let len = r.u32()? as usize;
        let tok = std::str::from_utf8(r.take(len)?).map_err(|e| BaselineError::Format(e.to_string()))?;
        tokens.push(tok.to_string());
    }
    if r.pos != bytes.len() {
        return Err(BaselineError::Format("trailing bytes".into()));
    }
    if tokens.iter().collect::<std::collections::HashSet<_>>().len() != dim {
        return Err(BaselineError::Format("duplicate vocabulary tokens".into()));
    }
    let vocab = Vocabulary::from_tokens(tokens, config.min_df as usize);
    Ok(TrainedModel {
        vocab,
        weights: ModelWeights { w, b, config },
    })
}
