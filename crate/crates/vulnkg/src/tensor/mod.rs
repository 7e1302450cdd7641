//! Dense f64 tensors with tape-based reverse-mode differentiation.
//!
//! Everything the models need — elementwise ops, matrix products, segment
//! sums for message aggregation, row gathers, concatenation — is recorded on
//! a [`Tape`] when an input is gradient-tracked. A tape is single-threaded;
//! independent tapes (one per worker) can run concurrently over read-shared
//! [`ParamStore`] values, and gradient accumulation is serialized by the
//! caller via [`Tape::backward`].

mod gradcheck;
mod tape;

pub use gradcheck::{grad_check, grad_check_params, grad_check_sample};
pub use tape::Tape;

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

pub type NumResult<T> = Result<T, NumError>;

#[derive(Debug, Error)]
pub enum NumError {
    #[error("{op}: shape mismatch {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: Vec<usize>,
        right: Vec<usize>,
    },
    #[error("{op}: produced a non-finite value")]
    NonFinite { op: &'static str },
    #[error("shape {shape:?} does not describe {len} elements")]
    InvalidShape { shape: Vec<usize>, len: usize },
    #[error("{op}: expected a matrix, got shape {shape:?}")]
    NotMatrix { op: &'static str, shape: Vec<usize> },
    #[error("segment id {id} out of range for {num_segments} segments")]
    SegmentOutOfRange { id: usize, num_segments: usize },
    #[error("row index {index} out of range for {rows} rows")]
    RowOutOfRange { index: usize, rows: usize },
    #[error("backward requires a scalar loss, got shape {shape:?}")]
    NonScalarLoss { shape: Vec<usize> },
    #[error("tensor is not attached to this tape")]
    DetachedTape,
    #[error("finite-difference step {eps} outside [1e-7, 1e-3]")]
    BadEpsilon { eps: f64 },
    #[error("unknown parameter {0:?}")]
    UnknownParam(String),
}

/// Identifies a node on a specific tape.
#[derive(Clone, Copy, Debug)]
pub(crate) struct NodeRef {
    pub tape: u64,
    pub index: usize,
}

/// A dense row-major f64 tensor. Cloning is cheap (shared storage).
#[derive(Clone, Debug)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Arc<Vec<f64>>,
    pub(crate) node: Option<NodeRef>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> NumResult<Self> {
        let numel: usize = shape.iter().product();
        if numel != data.len() {
            return Err(NumError::InvalidShape {
                shape,
                len: data.len(),
            });
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(NumError::NonFinite { op: "new" });
        }
        Ok(Tensor {
            shape,
            data: Arc::new(data),
            node: None,
        })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let numel: usize = shape.iter().product();
        Tensor {
            shape,
            data: Arc::new(vec![0.0; numel]),
            node: None,
        }
    }

    pub fn scalar(v: f64) -> Self {
        Tensor {
            shape: vec![1],
            data: Arc::new(vec![v]),
            node: None,
        }
    }

    pub fn vector(data: Vec<f64>) -> NumResult<Self> {
        let n = data.len();
        Tensor::new(vec![n], data)
    }

    pub fn matrix(rows: usize, cols: usize, data: Vec<f64>) -> NumResult<Self> {
        Tensor::new(vec![rows, cols], data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    /// True when the tensor participates in gradient recording.
    pub fn requires_grad(&self) -> bool {
        self.node.is_some()
    }

    /// Detached copy sharing storage but dropping the tape link.
    pub fn detach(&self) -> Tensor {
        Tensor {
            shape: self.shape.clone(),
            data: Arc::clone(&self.data),
            node: None,
        }
    }

    pub fn item(&self) -> f64 {
        debug_assert_eq!(self.numel(), 1);
        self.data[0]
    }

    /// Rows of a matrix (a 1-d tensor counts as a single row).
    pub fn rows(&self) -> usize {
        if self.shape.len() == 2 {
            self.shape[0]
        } else {
            1
        }
    }

    pub fn cols(&self) -> usize {
        if self.shape.len() == 2 {
            self.shape[1]
        } else {
            self.shape[0]
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.cols();
        &self.data[i * c..(i + 1) * c]
    }

    /// Copy with one coordinate replaced; used by finite differencing.
    pub fn with_coord(&self, i: usize, v: f64) -> Tensor {
        let mut data = self.data.as_ref().clone();
        data[i] = v;
        Tensor {
            shape: self.shape.clone(),
            data: Arc::new(data),
            node: None,
        }
    }
}

pub type ParamId = usize;

/// A trainable value and its accumulated gradient (same shape, zero-initialized).
#[derive(Clone, Debug)]
pub struct Parameter {
    pub value: Tensor,
    pub grad: Tensor,
}

impl Parameter {
    fn new(value: Tensor) -> Self {
        let grad = Tensor::zeros(value.shape().to_vec());
        Parameter { value, grad }
    }
}

/// Named collection of parameters. Forward passes read values through
/// [`Tape::param`]; [`Tape::backward`] accumulates gradients here.
#[derive(Clone, Debug, Default)]
pub struct ParamStore {
    params: Vec<Parameter>,
    names: Vec<String>,
    index: HashMap<String, ParamId>,
}

impl ParamStore {
    pub fn new() -> Self {
        ParamStore::default()
    }

    pub fn insert(&mut self, name: &str, value: Tensor) -> ParamId {
        debug_assert!(!self.index.contains_key(name), "duplicate param {name}");
        let id = self.params.len();
        self.params.push(Parameter::new(value));
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn id_of(&self, name: &str) -> NumResult<ParamId> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| NumError::UnknownParam(name.to_string()))
    }

    pub fn get(&self, id: ParamId) -> &Parameter {
        &self.params[id]
    }

    pub fn name_of(&self, id: ParamId) -> &str {
        &self.names[id]
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        0..self.params.len()
    }

    pub fn set_value(&mut self, id: ParamId, value: Tensor) {
        debug_assert_eq!(value.shape(), self.params[id].value.shape());
        self.params[id].value = value.detach();
    }

    pub fn zero_grads(&mut self) {
        for p in &mut self.params {
            p.grad = Tensor::zeros(p.value.shape().to_vec());
        }
    }

    pub(crate) fn accumulate_grad(&mut self, id: ParamId, delta: &[f64]) {
        let p = &mut self.params[id];
        let data = Arc::make_mut(&mut p.grad.data);
        debug_assert_eq!(data.len(), delta.len());
        for (g, d) in data.iter_mut().zip(delta) {
            *g += d;
        }
    }

    /// In-place update of a parameter value (optimizer step).
    pub fn update_value(&mut self, id: ParamId, f: impl FnMut(usize, f64) -> f64) {
        let p = &mut self.params[id];
        let data = Arc::make_mut(&mut p.value.data);
        let mut f = f;
        for (i, v) in data.iter_mut().enumerate() {
            *v = f(i, *v);
        }
    }
}
