//! LSTM cell, unrolled sequence with full backpropagation through time,
//! and the bidirectional wrapper.
//!
//! Gate equations are the standard formulation:
//!
//! ```text
//! i = σ(W_i·x + U_i·h_prev + b_i)      f, o analogous
//! g = tanh(W_g·x + U_g·h_prev + b_g)
//! c = f ⊙ c_prev + i ⊙ g
//! h = o ⊙ tanh(c)
//! ```
//!
//! Batches are `batch × features` matrices; a sequence is a slice of such
//! matrices, one per timestep. BPTT is untruncated.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::init::glorot_uniform;
use super::NnError;
use crate::matrix::Matrix;
use crate::rng::Rng;

/// The eight weight blocks and four biases of one LSTM direction.
///
/// `w_*` are `hidden × input`, `u_*` are `hidden × hidden`. The forget
/// bias starts at 1.0; everything else follows Glorot uniform or zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmCellParams {
    pub w_i: Matrix,
    pub w_f: Matrix,
    pub w_o: Matrix,
    pub w_g: Matrix,
    pub u_i: Matrix,
    pub u_f: Matrix,
    pub u_o: Matrix,
    pub u_g: Matrix,
    pub b_i: Vec<f64>,
    pub b_f: Vec<f64>,
    pub b_o: Vec<f64>,
    pub b_g: Vec<f64>,
}

impl LstmCellParams {
    /// Seeded initialization. Draw order: `w_i, w_f, w_o, w_g`, then
    /// `u_i, u_f, u_o, u_g`, each row-major.
    pub fn new(input: usize, hidden: usize, rng: &mut Rng) -> Self {
        let w = |rng: &mut Rng| glorot_uniform(hidden, input, input, hidden, rng);
        let w_i = w(rng);
        let w_f = w(rng);
        let w_o = w(rng);
        let w_g = w(rng);
        let u = |rng: &mut Rng| glorot_uniform(hidden, hidden, hidden, hidden, rng);
        let u_i = u(rng);
        let u_f = u(rng);
        let u_o = u(rng);
        let u_g = u(rng);
        LstmCellParams {
            w_i,
            w_f,
            w_o,
            w_g,
            u_i,
            u_f,
            u_o,
            u_g,
            b_i: vec![0.0; hidden],
            b_f: vec![1.0; hidden],
            b_o: vec![0.0; hidden],
            b_g: vec![0.0; hidden],
        }
    }

    pub fn input_size(&self) -> usize {
        self.w_i.cols()
    }

    pub fn hidden_size(&self) -> usize {
        self.w_i.rows()
    }

    /// All four gate blocks must share dimensions.
    pub fn is_consistent(&self) -> bool {
        let (h, n) = self.w_i.shape();
        let weights_ok = [&self.w_f, &self.w_o, &self.w_g]
            .iter()
            .all(|m| m.shape() == (h, n) && m.is_consistent());
        let recurrent_ok = [&self.u_i, &self.u_f, &self.u_o, &self.u_g]
            .iter()
            .all(|m| m.shape() == (h, h) && m.is_consistent());
        let bias_ok = [&self.b_i, &self.b_f, &self.b_o, &self.b_g]
            .iter()
            .all(|b| b.len() == h);
        self.w_i.is_consistent() && weights_ok && recurrent_ok && bias_ok
    }
}

/// Per-step intermediates cached by the forward pass.
pub struct LstmStepCache {
    x: Matrix,
    h_prev: Matrix,
    c_prev: Matrix,
    gate_i: Matrix,
    gate_f: Matrix,
    gate_o: Matrix,
    gate_g: Matrix,
    tanh_c: Matrix,
}

pub struct LstmSequenceCache {
    steps: Vec<LstmStepCache>,
}

/// Gradients shaped like [`LstmCellParams`].
#[derive(Debug, Clone)]
pub struct LstmGrads {
    pub w_i: Matrix,
    pub w_f: Matrix,
    pub w_o: Matrix,
    pub w_g: Matrix,
    pub u_i: Matrix,
    pub u_f: Matrix,
    pub u_o: Matrix,
    pub u_g: Matrix,
    pub b_i: Vec<f64>,
    pub b_f: Vec<f64>,
    pub b_o: Vec<f64>,
    pub b_g: Vec<f64>,
}

impl LstmGrads {
    pub fn zeros_like(params: &LstmCellParams) -> Self {
        let (h, n) = params.w_i.shape();
        LstmGrads {
            w_i: Matrix::zeros(h, n),
            w_f: Matrix::zeros(h, n),
            w_o: Matrix::zeros(h, n),
            w_g: Matrix::zeros(h, n),
            u_i: Matrix::zeros(h, h),
            u_f: Matrix::zeros(h, h),
            u_o: Matrix::zeros(h, h),
            u_g: Matrix::zeros(h, h),
            b_i: vec![0.0; h],
            b_f: vec![0.0; h],
            b_o: vec![0.0; h],
            b_g: vec![0.0; h],
        }
    }
}

fn gate_pre(params_w: &Matrix, params_u: &Matrix, bias: &[f64], x: &Matrix, h_prev: &Matrix) -> Matrix {
    let mut pre = x.matmul_nt(params_w);
    pre.add_assign(&h_prev.matmul_nt(params_u));
    pre.add_row_broadcast(bias);
    pre
}

/// One cell application over a batch. Returns `(h, c, cache)`.
pub fn lstm_cell_forward(
    params: &LstmCellParams,
    x: &Matrix,
    h_prev: &Matrix,
    c_prev: &Matrix,
) -> Result<(Matrix, Matrix, LstmStepCache), NnError> {
    if x.cols() != params.input_size() {
        return Err(NnError::ShapeMismatch {
            context: "lstm cell input",
            expected_rows: x.rows(),
            expected_cols: params.input_size(),
            got_rows: x.rows(),
            got_cols: x.cols(),
        });
    }
    if h_prev.shape() != (x.rows(), params.hidden_size()) {
        return Err(NnError::ShapeMismatch {
            context: "lstm cell hidden state",
            expected_rows: x.rows(),
            expected_cols: params.hidden_size(),
            got_rows: h_prev.rows(),
            got_cols: h_prev.cols(),
        });
    }
    let gate_i = gate_pre(&params.w_i, &params.u_i, &params.b_i, x, h_prev)
        .map(super::activation::sigmoid);
    let gate_f = gate_pre(&params.w_f, &params.u_f, &params.b_f, x, h_prev)
        .map(super::activation::sigmoid);
    let gate_o = gate_pre(&params.w_o, &params.u_o, &params.b_o, x, h_prev)
        .map(super::activation::sigmoid);
    let gate_g =
        gate_pre(&params.w_g, &params.u_g, &params.b_g, x, h_prev).map(crate::math::tanh);

    let c = gate_f.hadamard(c_prev).add(&gate_i.hadamard(&gate_g));
    let tanh_c = c.map(crate::math::tanh);
    let h = gate_o.hadamard(&tanh_c);

    let cache = LstmStepCache {
        x: x.clone(),
        h_prev: h_prev.clone(),
        c_prev: c_prev.clone(),
        gate_i,
        gate_f,
        gate_o,
        gate_g,
        tanh_c,
    };
    Ok((h, c, cache))
}

/// Unrolled forward over a sequence, starting from zero states.
///
/// Returns one hidden-state batch per timestep plus the cache for BPTT.
pub fn lstm_sequence_forward(
    params: &LstmCellParams,
    xs: &[Matrix],
) -> Result<(Vec<Matrix>, LstmSequenceCache), NnError> {
    if xs.is_empty() {
        return Err(NnError::EmptySequence);
    }
    let batch = xs[0].rows();
    let hidden = params.hidden_size();
    let mut h = Matrix::zeros(batch, hidden);
    let mut c = Matrix::zeros(batch, hidden);
    let mut h_seq = Vec::with_capacity(xs.len());
    let mut steps = Vec::with_capacity(xs.len());
    for x in xs {
        let (h_next, c_next, cache) = lstm_cell_forward(params, x, &h, &c)?;
        h = h_next;
        c = c_next;
        h_seq.push(h.clone());
        steps.push(cache);
    }
    Ok((h_seq, LstmSequenceCache { steps }))
}

/// Full backpropagation through time.
///
/// `grad_h_seq` carries the loss gradient w.r.t. every step's hidden
/// output (zero matrices where a step receives no gradient). Returns the
/// parameter gradients and the gradient w.r.t. every input step.
pub fn lstm_backward_bptt(
    params: &LstmCellParams,
    cache: &LstmSequenceCache,
    grad_h_seq: &[Matrix],
) -> (LstmGrads, Vec<Matrix>) {
    assert_eq!(
        cache.steps.len(),
        grad_h_seq.len(),
        "gradient sequence length mismatch"
    );
    let steps = cache.steps.len();
    let batch = cache.steps[0].x.rows();
    let hidden = params.hidden_size();
    let mut grads = LstmGrads::zeros_like(params);
    let mut dx_seq = vec![Matrix::zeros(0, 0); steps];
    let mut dh_carry = Matrix::zeros(batch, hidden);
    let mut dc_carry = Matrix::zeros(batch, hidden);

    for t in (0..steps).rev() {
        let step = &cache.steps[t];
        let dh = grad_h_seq[t].add(&dh_carry);

        // dc accumulates the carry from step t+1 plus the path through h.
        let one_minus_tanh2 = step.tanh_c.map(|v| 1.0 - v * v);
        let mut dc = dh.hadamard(&step.gate_o).hadamard(&one_minus_tanh2);
        dc.add_assign(&dc_carry);

        let dpre_o = dh
            .hadamard(&step.tanh_c)
            .hadamard(&step.gate_o.map(|v| v * (1.0 - v)));
        let dpre_i = dc
            .hadamard(&step.gate_g)
            .hadamard(&step.gate_i.map(|v| v * (1.0 - v)));
        let dpre_f = dc
            .hadamard(&step.c_prev)
            .hadamard(&step.gate_f.map(|v| v * (1.0 - v)));
        let dpre_g = dc
            .hadamard(&step.gate_i)
            .hadamard(&step.gate_g.map(|v| 1.0 - v * v));

        for (dpre, w, u, gw, gu, gb) in [
            (&dpre_i, &params.w_i, &params.u_i, &mut grads.w_i, &mut grads.u_i, &mut grads.b_i),
            (&dpre_f, &params.w_f, &params.u_f, &mut grads.w_f, &mut grads.u_f, &mut grads.b_f),
            (&dpre_o, &params.w_o, &params.u_o, &mut grads.w_o, &mut grads.u_o, &mut grads.b_o),
            (&dpre_g, &params.w_g, &params.u_g, &mut grads.w_g, &mut grads.u_g, &mut grads.b_g),
        ] {
            gw.add_assign(&dpre.matmul_tn(&step.x));
            gu.add_assign(&dpre.matmul_tn(&step.h_prev));
            for (acc, v) in gb.iter_mut().zip(dpre.col_sums()) {
                *acc += v;
            }
            let _ = (w, u);
        }

        let mut dx = dpre_i.matmul(&params.w_i);
        dx.add_assign(&dpre_f.matmul(&params.w_f));
        dx.add_assign(&dpre_o.matmul(&params.w_o));
        dx.add_assign(&dpre_g.matmul(&params.w_g));
        dx_seq[t] = dx;

        let mut dh_prev = dpre_i.matmul(&params.u_i);
        dh_prev.add_assign(&dpre_f.matmul(&params.u_f));
        dh_prev.add_assign(&dpre_o.matmul(&params.u_o));
        dh_prev.add_assign(&dpre_g.matmul(&params.u_g));
        dh_carry = dh_prev;

        dc_carry = dc.hadamard(&step.gate_f);
    }
    (grads, dx_seq)
}

/// One forward and one backward LSTM over the same input; per-step output
/// is the concatenation `[fwd_h_t ‖ bwd_h'_{L-1-t}]` where the backward
/// direction runs on the reversed sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiLstm {
    pub fwd: LstmCellParams,
    pub bwd: LstmCellParams,
}

pub struct BiLstmCache {
    fwd: LstmSequenceCache,
    bwd: LstmSequenceCache,
    hidden: usize,
}

#[derive(Debug, Clone)]
pub struct BiLstmGrads {
    pub fwd: LstmGrads,
    pub bwd: LstmGrads,
}

impl BiLstm {
    pub fn new(input: usize, hidden: usize, rng: &mut Rng) -> Self {
        BiLstm {
            fwd: LstmCellParams::new(input, hidden, rng),
            bwd: LstmCellParams::new(input, hidden, rng),
        }
    }

    pub fn hidden_size(&self) -> usize {
        self.fwd.hidden_size()
    }

    pub fn input_size(&self) -> usize {
        self.fwd.input_size()
    }

    /// Output width per step: both directions concatenated.
    pub fn output_size(&self) -> usize {
        self.fwd.hidden_size() + self.bwd.hidden_size()
    }

    pub fn is_consistent(&self) -> bool {
        self.fwd.is_consistent()
            && self.bwd.is_consistent()
            && self.fwd.hidden_size() == self.bwd.hidden_size()
            && self.fwd.input_size() == self.bwd.input_size()
    }

    pub fn forward(&self, xs: &[Matrix]) -> Result<(Vec<Matrix>, BiLstmCache), NnError> {
        let (fwd_h, fwd_cache) = lstm_sequence_forward(&self.fwd, xs)?;
        let reversed: Vec<Matrix> = xs.iter().rev().cloned().collect();
        let (bwd_h, bwd_cache) = lstm_sequence_forward(&self.bwd, &reversed)?;
        let steps = xs.len();
        let out = (0..steps)
            .map(|t| Matrix::hstack(&fwd_h[t], &bwd_h[steps - 1 - t]))
            .collect();
        Ok((
            out,
            BiLstmCache {
                fwd: fwd_cache,
                bwd: bwd_cache,
                hidden: self.fwd.hidden_size(),
            },
        ))
    }

    /// Mirror of the forward construction: the left gradient half flows
    /// into the forward direction, the right half (re-reversed) into the
    /// backward direction, and the input gradients recombine.
    pub fn backward(
        &self,
        cache: &BiLstmCache,
        grad_out_seq: &[Matrix],
    ) -> (BiLstmGrads, Vec<Matrix>) {
        let steps = grad_out_seq.len();
        let hidden = cache.hidden;
        let mut grad_fwd_h = Vec::with_capacity(steps);
        let mut grad_bwd_h = vec![Matrix::zeros(0, 0); steps];
        for (t, g) in grad_out_seq.iter().enumerate() {
            grad_fwd_h.push(g.col_slice(0, hidden));
            grad_bwd_h[steps - 1 - t] = g.col_slice(hidden, g.cols());
        }
        let (fwd_grads, dx_fwd) = lstm_backward_bptt(&self.fwd, &cache.fwd, &grad_fwd_h);
        let (bwd_grads, dx_bwd_rev) = lstm_backward_bptt(&self.bwd, &cache.bwd, &grad_bwd_h);
        let dx = (0..steps)
            .map(|t| dx_fwd[t].add(&dx_bwd_rev[steps - 1 - t]))
            .collect();
        (
            BiLstmGrads {
                fwd: fwd_grads,
                bwd: bwd_grads,
            },
            dx,
        )
    }
}
