//! Versioned binary checkpoint container: a JSON metadata header, named
//! parameter blocks of 64-bit floats, and a trailing content hash. The
//! translation baseline shares the container with its own block names.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::graph::KnowledgeGraph;
use crate::model::{ModelConfig, ModelParams};
use crate::tensor::Tensor;

use super::{TrainConfig, TrainError, TrainResult};

const MAGIC: &[u8] = b"VKGCKPT1";

#[derive(Clone, Debug, Serialize, Deserialize)]
struct Meta {
    kind: String,
    model_config: ModelConfig,
    train_config: TrainConfig,
    graph_checksum: String,
    epoch: usize,
    loss_log: Vec<f64>,
}

/// A loaded or to-be-saved checkpoint.
#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub kind: String,
    pub model_config: ModelConfig,
    pub train_config: TrainConfig,
    pub graph_checksum: String,
    pub epoch: usize,
    pub loss_log: Vec<f64>,
    pub blocks: Vec<(String, Vec<usize>, Vec<f64>)>,
}

impl Checkpoint {
    pub fn from_params(
        kind: &str,
        params: &ModelParams,
        train_config: &TrainConfig,
        graph: &KnowledgeGraph,
        epoch: usize,
        loss_log: &[f64],
    ) -> Self {
        let blocks = params
            .store
            .ids()
            .map(|id| {
                let p = params.store.get(id);
                (
                    params.store.name_of(id).to_string(),
                    p.value.shape().to_vec(),
                    p.value.data().to_vec(),
                )
            })
            .collect();
        Checkpoint {
            kind: kind.to_string(),
            model_config: params.config.clone(),
            train_config: train_config.clone(),
            graph_checksum: graph.structural_checksum(),
            epoch,
            loss_log: loss_log.to_vec(),
            blocks,
        }
    }

    /// Rebuilds model parameters: fresh layout from the stored config, then
    /// every block written over it by name.
    pub fn to_params(&self) -> TrainResult<ModelParams> {
        let mut params = ModelParams::init(self.model_config.clone(), 0);
        for (name, shape, data) in &self.blocks {
            let id = params
                .store
                .id_of(name)
                .map_err(|_| TrainError::BadCheckpoint(format!("unknown block {name:?}")))?;
            let tensor = Tensor::new(shape.clone(), data.clone())
                .map_err(|_| TrainError::BadCheckpoint(format!("bad block {name:?}")))?;
            if tensor.shape() != params.store.get(id).value.shape() {
                return Err(TrainError::BadCheckpoint(format!(
                    "block {name:?} has shape {:?}, expected {:?}",
                    tensor.shape(),
                    params.store.get(id).value.shape()
                )));
            }
            params.store.set_value(id, tensor);
        }
        Ok(params)
    }

    pub fn block(&self, name: &str) -> Option<(&[usize], &[f64])> {
        self.blocks
            .iter()
            .find(|(n, _, _)| n == name)
            .map(|(_, s, d)| (s.as_slice(), d.as_slice()))
    }
}

fn io_err<'p>(path: &'p Path) -> impl FnOnce(std::io::Error) -> TrainError + 'p {
    move |source| TrainError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn save_checkpoint(ckpt: &Checkpoint, path: &Path) -> TrainResult<()> {
    let meta = Meta {
        kind: ckpt.kind.clone(),
        model_config: ckpt.model_config.clone(),
        train_config: ckpt.train_config.clone(),
        graph_checksum: ckpt.graph_checksum.clone(),
        epoch: ckpt.epoch,
        loss_log: ckpt.loss_log.clone(),
    };
    let meta_json = serde_json::to_vec(&meta)
        .map_err(|e| TrainError::BadCheckpoint(format!("meta serialization: {e}")))?;

    let mut buf: Vec<u8> = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(meta_json.len() as u32).to_le_bytes());
    buf.extend_from_slice(&meta_json);
    buf.extend_from_slice(&(ckpt.blocks.len() as u32).to_le_bytes());
    for (name, shape, data) in &ckpt.blocks {
        buf.extend_from_slice(&(name.len() as u32).to_le_bytes());
        buf.extend_from_slice(name.as_bytes());
        buf.extend_from_slice(&(shape.len() as u32).to_le_bytes());
        for &d in shape {
            buf.extend_from_slice(&(d as u64).to_le_bytes());
        }
        for v in data {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    let digest = Sha256::digest(&buf);
    buf.extend_from_slice(&digest);

    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(path))?;
    }
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(&buf).map_err(io_err(path))?;
    Ok(())
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> TrainResult<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(TrainError::BadCheckpoint("truncated".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> TrainResult<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> TrainResult<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Loads a checkpoint. When `expected_graph` is given, the stored graph
/// checksum must match unless `force` is set.
pub fn load_checkpoint(
    path: &Path,
    expected_graph: Option<&KnowledgeGraph>,
    force: bool,
) -> TrainResult<Checkpoint> {
    let buf = fs::read(path).map_err(io_err(path))?;
    if buf.len() < MAGIC.len() + 32 {
        return Err(TrainError::BadCheckpoint("file too small".into()));
    }
    let (body, stored_digest) = buf.split_at(buf.len() - 32);
    let digest = Sha256::digest(body);
    if digest.as_slice() != stored_digest {
        return Err(TrainError::BadCheckpoint("content hash mismatch".into()));
    }

    let mut r = Reader { buf: body, pos: 0 };
    if r.take(MAGIC.len())? != MAGIC {
        return Err(TrainError::BadCheckpoint("wrong magic/version".into()));
    }
    let meta_len = r.u32()? as usize;
    let meta: Meta = serde_json::from_slice(r.take(meta_len)?)
        .map_err(|e| TrainError::BadCheckpoint(format!("meta: {e}")))?;
    let block_count = r.u32()? as usize;
    let mut blocks = Vec::with_capacity(block_count);
    for _ in 0..block_count {
        let name_len = r.u32()? as usize;
        let name = String::from_utf8(r.take(name_len)?.to_vec())
            .map_err(|_| TrainError::BadCheckpoint("non-utf8 block name".into()))?;
        let ndim = r.u32()? as usize;
        let mut shape = Vec::with_capacity(ndim);
        for _ in 0..ndim {
            shape.push(r.u64()? as usize);
        }
        let numel: usize = shape.iter().product();
        let raw = r.take(numel * 8)?;
        let data: Vec<f64> = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        blocks.push((name, shape, data));
    }

    if let Some(g) = expected_graph {
        let actual = g.structural_checksum();
        if actual != meta.graph_checksum && !force {
            return Err(TrainError::GraphMismatch {
                expected: meta.graph_checksum,
                actual,
            });
        }
    }

    Ok(Checkpoint {
        kind: meta.kind,
        model_config: meta.model_config,
        train_config: meta.train_config,
        graph_checksum: meta.graph_checksum,
        epoch: meta.epoch,
        loss_log: meta.loss_log,
        blocks,
    })
}
