//! Operation recording and reverse-mode gradient replay.

use std::cell::{Cell, RefCell};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use super::{NodeRef, NumError, NumResult, ParamId, ParamStore, Tensor};

static TAPE_IDS: AtomicU64 = AtomicU64::new(1);

enum Op {
    /// Leaf bound to a parameter slot.
    Param { param: ParamId },
    /// Leaf watched directly (gradient checking of plain tensors).
    Watch,
    Add {
        a: Option<usize>,
        b: Option<usize>,
    },
    Sub {
        a: Option<usize>,
        b: Option<usize>,
    },
    Mul {
        a: Option<usize>,
        b: Option<usize>,
        a_data: Arc<Vec<f64>>,
        b_data: Arc<Vec<f64>>,
    },
    Relu {
        a: usize,
        input: Arc<Vec<f64>>,
    },
    Sigmoid {
        a: usize,
        out: Arc<Vec<f64>>,
    },
    Log {
        a: usize,
        input: Arc<Vec<f64>>,
    },
    Scale {
        a: usize,
        k: f64,
    },
    AddScalar {
        a: usize,
    },
    Clamp {
        a: usize,
        pass: Arc<Vec<f64>>,
    },
    Abs {
        a: usize,
        sign: Arc<Vec<f64>>,
    },
    Sqrt {
        a: usize,
        out: Arc<Vec<f64>>,
    },
    Matmul {
        a: Option<usize>,
        b: Option<usize>,
        a_data: Arc<Vec<f64>>,
        b_data: Arc<Vec<f64>>,
        m: usize,
        k: usize,
        n: usize,
    },
    SegmentSum {
        a: usize,
        ids: Arc<Vec<usize>>,
        cols: usize,
    },
    GatherRows {
        a: usize,
        idx: Arc<Vec<usize>>,
        in_rows: usize,
        cols: usize,
    },
    ConcatCols {
        a: Option<usize>,
        b: Option<usize>,
        rows: usize,
        cols_a: usize,
        cols_b: usize,
    },
    AddRowVec {
        a: Option<usize>,
        b: Option<usize>,
        rows: usize,
        cols: usize,
    },
    SumAll {
        a: usize,
        in_len: usize,
    },
}

struct Node {
    op: Op,
    out_len: usize,
}

/// Ordered record of executed operations. Backward replays the record once,
/// in reverse execution order, accumulating parameter gradients into the
/// supplied [`ParamStore`].
pub struct Tape {
    id: u64,
    nodes: RefCell<Vec<Node>>,
    recording: Cell<bool>,
}

impl Default for Tape {
    fn default() -> Self {
        Tape::new()
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape {
            id: TAPE_IDS.fetch_add(1, Ordering::Relaxed),
            nodes: RefCell::new(Vec::new()),
            recording: Cell::new(true),
        }
    }

    /// A tape that records nothing; use for forward-only evaluation.
    pub fn inference() -> Self {
        let t = Tape::new();
        t.recording.set(false);
        t
    }

    pub fn is_recording(&self) -> bool {
        self.recording.get()
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.borrow().is_empty()
    }

    /// Node index of `t` on this tape; `None` when untracked or foreign.
    fn node_of(&self, t: &Tensor) -> Option<usize> {
        match t.node {
            Some(NodeRef { tape, index }) if tape == self.id => Some(index),
            _ => None,
        }
    }

    fn push(&self, op: Op, out_len: usize) -> usize {
        let mut nodes = self.nodes.borrow_mut();
        nodes.push(Node { op, out_len });
        nodes.len() - 1
    }

    fn attach(&self, mut t: Tensor, index: usize) -> Tensor {
        t.node = Some(NodeRef {
            tape: self.id,
            index,
        });
        t
    }

    fn finish(
        &self,
        op_name: &'static str,
        shape: Vec<usize>,
        data: Vec<f64>,
        op: impl FnOnce() -> Op,
        tracked: bool,
    ) -> NumResult<Tensor> {
        if !data.iter().all(|v| v.is_finite()) {
            return Err(NumError::NonFinite { op: op_name });
        }
        let out_len = data.len();
        let t = Tensor {
            shape,
            data: Arc::new(data),
            node: None,
        };
        if self.recording.get() && tracked {
            let index = self.push(op(), out_len);
            Ok(self.attach(t, index))
        } else {
            Ok(t)
        }
    }

    /// Binds a parameter value to this tape as a gradient-tracked leaf.
    pub fn param(&self, store: &ParamStore, id: ParamId) -> Tensor {
        let value = store.get(id).value.detach();
        if !self.recording.get() {
            return value;
        }
        let index = self.push(
            Op::Param { param: id },
            value.numel(),
        );
        self.attach(value, index)
    }

    /// Tracks a plain tensor as a leaf; gradients are retrievable via
    /// [`Tape::backward_watched`].
    pub fn watch(&self, t: &Tensor) -> Tensor {
        let value = t.detach();
        if !self.recording.get() {
            return value;
        }
        let index = self.push(Op::Watch, value.numel());
        self.attach(value, index)
    }

    fn same_shape(op: &'static str, a: &Tensor, b: &Tensor) -> NumResult<()> {
        if a.shape != b.shape {
            return Err(NumError::ShapeMismatch {
                op,
                left: a.shape.clone(),
                right: b.shape.clone(),
            });
        }
        Ok(())
    }

    pub fn add(&self, a: &Tensor, b: &Tensor) -> NumResult<Tensor> {
        Self::same_shape("add", a, b)?;
        let data: Vec<f64> = a.data.iter().zip(b.data.iter()).map(|(x, y)| x + y).collect();
        let (na, nb) = (self.node_of(a), self.node_of(b));
        self.finish("add", a.shape.clone(), data, || Op::Add { a: na, b: nb }, na.is_some() || nb.is_some())
    }

    pub fn sub(&self, a: &Tensor, b: &Tensor) -> NumResult<Tensor> {
        Self::same_shape("sub", a, b)?;
        let data: Vec<f64> = a.data.iter().zip(b.data.iter()).map(|(x, y)| x - y).collect();
        let (na, nb) = (self.node_of(a), self.node_of(b));
        self.finish("sub", a.shape.clone(), data, || Op::Sub { a: na, b: nb }, na.is_some() || nb.is_some())
    }

    pub fn mul(&self, a: &Tensor, b: &Tensor) -> NumResult<Tensor> {
        Self::same_shape("mul", a, b)?;
        let data: Vec<f64> = a.data.iter().zip(b.data.iter()).map(|(x, y)| x * y).collect();
        let (na, nb) = (self.node_of(a), self.node_of(b));
        let (ad, bd) = (Arc::clone(&a.data), Arc::clone(&b.data));
        self.finish(
            "mul",
            a.shape.clone(),
            data,
            || Op::Mul { a: na, b: nb, a_data: ad, b_data: bd },
            na.is_some() || nb.is_some(),
        )
    }

    pub fn relu(&self, a: &Tensor) -> NumResult<Tensor> {
        let data: Vec<f64> = a.data.iter().map(|&x| if x > 0.0 { x } else { 0.0 }).collect();
        let na = self.node_of(a);
        let input = Arc::clone(&a.data);
        self.finish(
            "relu",
            a.shape.clone(),
            data,
            || Op::Relu { a: na.unwrap(), input },
            na.is_some(),
        )
    }

    pub fn sigmoid(&self, a: &Tensor) -> NumResult<Tensor> {
        let data: Vec<f64> = a
            .data
            .iter()
            .map(|&x| {
                if x >= 0.0 {
                    1.0 / (1.0 + (-x).exp())
                } else {
                    let e = x.exp();
                    e / (1.0 + e)
                }
            })
            .collect();
        let na = self.node_of(a);
        let out = Arc::new(data.clone());
        self.finish(
            "sigmoid",
            a.shape.clone(),
            data,
            || Op::Sigmoid { a: na.unwrap(), out },
            na.is_some(),
        )
    }

    pub fn log(&self, a: &Tensor) -> NumResult<Tensor> {
        let data: Vec<f64> = a.data.iter().map(|&x| x.ln()).collect();
        let na = self.node_of(a);
        let input = Arc::clone(&a.data);
        self.finish(
            "log",
            a.shape.clone(),
            data,
            || Op::Log { a: na.unwrap(), input },
            na.is_some(),
        )
    }

    pub fn scale(&self, a: &Tensor, k: f64) -> NumResult<Tensor> {
        let data: Vec<f64> = a.data.iter().map(|&x| x * k).collect();
        let na = self.node_of(a);
        self.finish("scale", a.shape.clone(), data, || Op::Scale { a: na.unwrap(), k }, na.is_some())
    }

    pub fn add_scalar(&self, a: &Tensor, k: f64) -> NumResult<Tensor> {
        let data: Vec<f64> = a.data.iter().map(|&x| x + k).collect();
        let na = self.node_of(a);
        self.finish("add_scalar", a.shape.clone(), data, || Op::AddScalar { a: na.unwrap() }, na.is_some())
    }

    /// Clamp to `[lo, hi]`; gradient passes only where the input was inside.
    pub fn clamp(&self, a: &Tensor, lo: f64, hi: f64) -> NumResult<Tensor> {
        let data: Vec<f64> = a.data.iter().map(|&x| x.clamp(lo, hi)).collect();
        let pass: Vec<f64> = a
            .data
            .iter()
            .map(|&x| if x > lo && x < hi { 1.0 } else { 0.0 })
            .collect();
        let na = self.node_of(a);
        let pass = Arc::new(pass);
        self.finish(
            "clamp",
            a.shape.clone(),
            data,
            || Op::Clamp { a: na.unwrap(), pass },
            na.is_some(),
        )
    }

    pub fn abs(&self, a: &Tensor) -> NumResult<Tensor> {
        let data: Vec<f64> = a.data.iter().map(|&x| x.abs()).collect();
        let sign: Vec<f64> = a
            .data
            .iter()
            .map(|&x| if x == 0.0 { 0.0 } else { x.signum() })
            .collect();
        let na = self.node_of(a);
        let sign = Arc::new(sign);
        self.finish(
            "abs",
            a.shape.clone(),
            data,
            || Op::Abs { a: na.unwrap(), sign },
            na.is_some(),
        )
    }

    /// Elementwise square root; inputs must be nonnegative.
    pub fn sqrt(&self, a: &Tensor) -> NumResult<Tensor> {
        let data: Vec<f64> = a.data.iter().map(|&x| x.sqrt()).collect();
        let na = self.node_of(a);
        let out = Arc::new(data.clone());
        self.finish(
            "sqrt",
            a.shape.clone(),
            data,
            || Op::Sqrt { a: na.unwrap(), out },
            na.is_some(),
        )
    }

    pub fn matmul(&self, a: &Tensor, b: &Tensor) -> NumResult<Tensor> {
        if a.shape.len() != 2 {
            return Err(NumError::NotMatrix { op: "matmul", shape: a.shape.clone() });
        }
        if b.shape.len() != 2 {
            return Err(NumError::NotMatrix { op: "matmul", shape: b.shape.clone() });
        }
        let (m, k) = (a.shape[0], a.shape[1]);
        let (k2, n) = (b.shape[0], b.shape[1]);
        if k != k2 {
            return Err(NumError::ShapeMismatch {
                op: "matmul",
                left: a.shape.clone(),
                right: b.shape.clone(),
            });
        }
        let data = matmul_raw(&a.data, &b.data, m, k, n);
        let (na, nb) = (self.node_of(a), self.node_of(b));
        let (ad, bd) = (Arc::clone(&a.data), Arc::clone(&b.data));
        self.finish(
            "matmul",
            vec![m, n],
            data,
            || Op::Matmul { a: na, b: nb, a_data: ad, b_data: bd, m, k, n },
            na.is_some() || nb.is_some(),
        )
    }

    /// Row `i` of the output is the sum of input rows whose segment id is `i`;
    /// empty segments stay zero.
    pub fn segment_sum(
        &self,
        values: &Tensor,
        segment_ids: &[usize],
        num_segments: usize,
    ) -> NumResult<Tensor> {
        if values.shape.len() != 2 {
            return Err(NumError::NotMatrix { op: "segment_sum", shape: values.shape.clone() });
        }
        let (rows, cols) = (values.shape[0], values.shape[1]);
        if segment_ids.len() != rows {
            return Err(NumError::ShapeMismatch {
                op: "segment_sum",
                left: vec![rows],
                right: vec![segment_ids.len()],
            });
        }
        if let Some(&bad) = segment_ids.iter().find(|&&id| id >= num_segments) {
            return Err(NumError::SegmentOutOfRange { id: bad, num_segments });
        }
        let mut data = vec![0.0; num_segments * cols];
        for (r, &seg) in segment_ids.iter().enumerate() {
            let src = &values.data[r * cols..(r + 1) * cols];
            let dst = &mut data[seg * cols..(seg + 1) * cols];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        }
        let na = self.node_of(values);
        let ids = Arc::new(segment_ids.to_vec());
        self.finish(
            "segment_sum",
            vec![num_segments, cols],
            data,
            || Op::SegmentSum { a: na.unwrap(), ids, cols },
            na.is_some(),
        )
    }

    /// Output row `j` is input row `idx[j]` (rows may repeat).
    pub fn gather_rows(&self, a: &Tensor, idx: &[usize]) -> NumResult<Tensor> {
        if a.shape.len() != 2 {
            return Err(NumError::NotMatrix { op: "gather_rows", shape: a.shape.clone() });
        }
        let (rows, cols) = (a.shape[0], a.shape[1]);
        if let Some(&bad) = idx.iter().find(|&&i| i >= rows) {
            return Err(NumError::RowOutOfRange { index: bad, rows });
        }
        let mut data = Vec::with_capacity(idx.len() * cols);
        for &i in idx {
            data.extend_from_slice(&a.data[i * cols..(i + 1) * cols]);
        }
        let na = self.node_of(a);
        let idx_arc = Arc::new(idx.to_vec());
        self.finish(
            "gather_rows",
            vec![idx.len(), cols],
            data,
            || Op::GatherRows { a: na.unwrap(), idx: idx_arc, in_rows: rows, cols },
            na.is_some(),
        )
    }

    /// Concatenates two matrices with equal row counts along columns.
    pub fn concat_cols(&self, a: &Tensor, b: &Tensor) -> NumResult<Tensor> {
        if a.shape.len() != 2 || b.shape.len() != 2 || a.shape[0] != b.shape[0] {
            return Err(NumError::ShapeMismatch {
                op: "concat_cols",
                left: a.shape.clone(),
                right: b.shape.clone(),
            });
        }
        let rows = a.shape[0];
        let (ca, cb) = (a.shape[1], b.shape[1]);
        let mut data = Vec::with_capacity(rows * (ca + cb));
        for r in 0..rows {
            data.extend_from_slice(&a.data[r * ca..(r + 1) * ca]);
            data.extend_from_slice(&b.data[r * cb..(r + 1) * cb]);
        }
        let (na, nb) = (self.node_of(a), self.node_of(b));
        self.finish(
            "concat_cols",
            vec![rows, ca + cb],
            data,
            || Op::ConcatCols { a: na, b: nb, rows, cols_a: ca, cols_b: cb },
            na.is_some() || nb.is_some(),
        )
    }

    /// Adds a length-`n` vector to every row of an `m×n` matrix.
    pub fn add_row_vec(&self, a: &Tensor, b: &Tensor) -> NumResult<Tensor> {
        if a.shape.len() != 2 {
            return Err(NumError::NotMatrix { op: "add_row_vec", shape: a.shape.clone() });
        }
        let (rows, cols) = (a.shape[0], a.shape[1]);
        if b.numel() != cols {
            return Err(NumError::ShapeMismatch {
                op: "add_row_vec",
                left: a.shape.clone(),
                right: b.shape.clone(),
            });
        }
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(a.data[r * cols + c] + b.data[c]);
            }
        }
        let (na, nb) = (self.node_of(a), self.node_of(b));
        self.finish(
            "add_row_vec",
            vec![rows, cols],
            data,
            || Op::AddRowVec { a: na, b: nb, rows, cols },
            na.is_some() || nb.is_some(),
        )
    }

    /// Sum of all elements, as a scalar.
    pub fn sum_all(&self, a: &Tensor) -> NumResult<Tensor> {
        let s: f64 = a.data.iter().sum();
        let na = self.node_of(a);
        let in_len = a.numel();
        self.finish("sum_all", vec![1], vec![s], || Op::SumAll { a: na.unwrap(), in_len }, na.is_some())
    }

    /// Mean of all elements, as a scalar.
    pub fn mean_all(&self, a: &Tensor) -> NumResult<Tensor> {
        let n = a.numel() as f64;
        let s = self.sum_all(a)?;
        self.scale(&s, 1.0 / n)
    }

    /// Reverse-mode gradients of a scalar `loss`; every parameter reached by
    /// the tape has d(loss)/d(param) added into its grad slot. Calling twice
    /// accumulates twice.
    pub fn backward(&self, loss: &Tensor, store: &mut ParamStore) -> NumResult<()> {
        let adj = self.adjoints(loss)?;
        let nodes = self.nodes.borrow();
        for (i, node) in nodes.iter().enumerate() {
            if let (Op::Param { param }, Some(g)) = (&node.op, &adj[i]) {
                store.accumulate_grad(*param, g);
            }
        }
        Ok(())
    }

    /// Gradient of a scalar `loss` with respect to one watched leaf.
    pub fn backward_watched(&self, loss: &Tensor, watched: &Tensor) -> NumResult<Tensor> {
        let widx = self.node_of(watched).ok_or(NumError::DetachedTape)?;
        let adj = self.adjoints(loss)?;
        let data = adj[widx].clone().unwrap_or_else(|| vec![0.0; watched.numel()]);
        Tensor::new(watched.shape.clone(), data)
    }

    fn adjoints(&self, loss: &Tensor) -> NumResult<Vec<Option<Vec<f64>>>> {
        if loss.numel() != 1 {
            return Err(NumError::NonScalarLoss { shape: loss.shape.clone() });
        }
        let root = self.node_of(loss).ok_or(NumError::DetachedTape)?;
        let nodes = self.nodes.borrow();
        let mut adj: Vec<Option<Vec<f64>>> = vec![None; nodes.len()];
        adj[root] = Some(vec![1.0]);
        for i in (0..=root).rev() {
            let Some(g) = adj[i].clone() else { continue };
            match &nodes[i].op {
                Op::Param { .. } | Op::Watch => {}
                Op::Add { a, b } => {
                    add_into(&mut adj, *a, &g, nodes[i].out_len);
                    add_into(&mut adj, *b, &g, nodes[i].out_len);
                }
                Op::Sub { a, b } => {
                    add_into(&mut adj, *a, &g, nodes[i].out_len);
                    if let Some(bi) = b {
                        let neg: Vec<f64> = g.iter().map(|x| -x).collect();
                        add_into(&mut adj, Some(*bi), &neg, nodes[i].out_len);
                    }
                }
                Op::Mul { a, b, a_data, b_data } => {
                    if a.is_some() {
                        let da: Vec<f64> = g.iter().zip(b_data.iter()).map(|(x, y)| x * y).collect();
                        add_into(&mut adj, *a, &da, nodes[i].out_len);
                    }
                    if b.is_some() {
                        let db: Vec<f64> = g.iter().zip(a_data.iter()).map(|(x, y)| x * y).collect();
                        add_into(&mut adj, *b, &db, nodes[i].out_len);
                    }
                }
                Op::Relu { a, input } => {
                    let da: Vec<f64> = g
                        .iter()
                        .zip(input.iter())
                        .map(|(x, &v)| if v > 0.0 { *x } else { 0.0 })
                        .collect();
                    add_into(&mut adj, Some(*a), &da, da.len());
                }
                Op::Sigmoid { a, out } => {
                    let da: Vec<f64> = g
                        .iter()
                        .zip(out.iter())
                        .map(|(x, &s)| x * s * (1.0 - s))
                        .collect();
                    add_into(&mut adj, Some(*a), &da, da.len());
                }
                Op::Log { a, input } => {
                    let da: Vec<f64> = g.iter().zip(input.iter()).map(|(x, &v)| x / v).collect();
                    add_into(&mut adj, Some(*a), &da, da.len());
                }
                Op::Scale { a, k } => {
                    let da: Vec<f64> = g.iter().map(|x| x * k).collect();
                    add_into(&mut adj, Some(*a), &da, da.len());
                }
                Op::AddScalar { a } => {
                    add_into(&mut adj, Some(*a), &g, g.len());
                }
                Op::Clamp { a, pass } => {
                    let da: Vec<f64> = g.iter().zip(pass.iter()).map(|(x, p)| x * p).collect();
                    add_into(&mut adj, Some(*a), &da, da.len());
                }
                Op::Abs { a, sign } => {
                    let da: Vec<f64> = g.iter().zip(sign.iter()).map(|(x, s)| x * s).collect();
                    add_into(&mut adj, Some(*a), &da, da.len());
                }
                Op::Sqrt { a, out } => {
                    let da: Vec<f64> = g
                        .iter()
                        .zip(out.iter())
                        .map(|(x, &o)| if o > 0.0 { x * 0.5 / o } else { 0.0 })
                        .collect();
                    add_into(&mut adj, Some(*a), &da, da.len());
                }
                Op::Matmul { a, b, a_data, b_data, m, k, n } => {
                    if a.is_some() {
                        // dA = G · Bᵀ  (m×n · n×k)
                        let mut da = vec![0.0; m * k];
                        for r in 0..*m {
                            for c in 0..*n {
                                let gv = g[r * n + c];
                                if gv == 0.0 {
                                    continue;
                                }
                                let brow = &b_data[c..];
                                let darow = &mut da[r * k..(r + 1) * k];
                                for (kk, d) in darow.iter_mut().enumerate() {
                                    *d += gv * brow[kk * n];
                                }
                            }
                        }
                        add_into(&mut adj, *a, &da, da.len());
                    }
                    if b.is_some() {
                        // dB = Aᵀ · G  (k×m · m×n)
                        let mut db = vec![0.0; k * n];
                        for r in 0..*m {
                            let arow = &a_data[r * k..(r + 1) * k];
                            let grow = &g[r * n..(r + 1) * n];
                            for (kk, &av) in arow.iter().enumerate() {
                                if av == 0.0 {
                                    continue;
                                }
                                let dbrow = &mut db[kk * n..(kk + 1) * n];
                                for (c, d) in dbrow.iter_mut().enumerate() {
                                    *d += av * grow[c];
                                }
                            }
                        }
                        add_into(&mut adj, *b, &db, db.len());
                    }
                }
                Op::SegmentSum { a, ids, cols } => {
                    let mut da = vec![0.0; ids.len() * cols];
                    for (r, &seg) in ids.iter().enumerate() {
                        let src = &g[seg * cols..(seg + 1) * cols];
                        da[r * cols..(r + 1) * cols].copy_from_slice(src);
                    }
                    add_into(&mut adj, Some(*a), &da, da.len());
                }
                Op::GatherRows { a, idx, in_rows, cols } => {
                    let mut da = vec![0.0; in_rows * cols];
                    for (j, &src_row) in idx.iter().enumerate() {
                        let grow = &g[j * cols..(j + 1) * cols];
                        let drow = &mut da[src_row * cols..(src_row + 1) * cols];
                        for (d, x) in drow.iter_mut().zip(grow) {
                            *d += x;
                        }
                    }
                    add_into(&mut adj, Some(*a), &da, da.len());
                }
                Op::ConcatCols { a, b, rows, cols_a, cols_b } => {
                    let total = cols_a + cols_b;
                    if a.is_some() {
                        let mut da = vec![0.0; rows * cols_a];
                        for r in 0..*rows {
                            da[r * cols_a..(r + 1) * cols_a]
                                .copy_from_slice(&g[r * total..r * total + cols_a]);
                        }
                        add_into(&mut adj, *a, &da, da.len());
                    }
                    if b.is_some() {
                        let mut db = vec![0.0; rows * cols_b];
                        for r in 0..*rows {
                            db[r * cols_b..(r + 1) * cols_b]
                                .copy_from_slice(&g[r * total + cols_a..(r + 1) * total]);
                        }
                        add_into(&mut adj, *b, &db, db.len());
                    }
                }
                Op::AddRowVec { a, b, rows, cols } => {
                    add_into(&mut adj, *a, &g, g.len());
                    if b.is_some() {
                        let mut db = vec![0.0; *cols];
                        for r in 0..*rows {
                            for c in 0..*cols {
                                db[c] += g[r * cols + c];
                            }
                        }
                        add_into(&mut adj, *b, &db, db.len());
                    }
                }
                Op::SumAll { a, in_len } => {
                    let da = vec![g[0]; *in_len];
                    add_into(&mut adj, Some(*a), &da, da.len());
                }
            }
        }
        Ok(adj)
    }
}

fn add_into(adj: &mut [Option<Vec<f64>>], target: Option<usize>, delta: &[f64], len: usize) {
    debug_assert_eq!(delta.len(), len);
    let Some(t) = target else { return };
    match &mut adj[t] {
        Some(buf) => {
            for (b, d) in buf.iter_mut().zip(delta) {
                *b += d;
            }
        }
        slot @ None => {
            *slot = Some(delta.to_vec());
        }
    }
}

pub(crate) fn matmul_raw(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * n];
    for r in 0..m {
        let arow = &a[r * k..(r + 1) * k];
        let orow = &mut out[r * n..(r + 1) * n];
        for (kk, &av) in arow.iter().enumerate() {
            if av == 0.0 {
                continue;
            }
            let brow = &b[kk * n..(kk + 1) * n];
            for (o, &bv) in orow.iter_mut().zip(brow) {
                *o += av * bv;
            }
        }
    }
    out
}
