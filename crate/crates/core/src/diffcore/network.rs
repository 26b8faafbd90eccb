use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::matrix::Matrix;
use super::tape::{Gradients, Tape, Var};
use crate::math;
use crate::rng::{uniform, Rng};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputActivation {
    Identity,
    /// Squashes every output into `[-1, 1]`.
    Tanh,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecurrentSpec {
    pub cell_size: usize,
}

/// Architecture of a dense network: `input → [tanh cell] → (ReLU hidden)* → output`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub input_dim: usize,
    pub hidden_layers: Vec<usize>,
    pub output_dim: usize,
    pub output: OutputActivation,
    pub recurrent: Option<RecurrentSpec>,
}

/// One named block of a [`ParamVector`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamBlock {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
}

impl ParamBlock {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Flat parameter storage with a named block layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    pub values: Vec<f64>,
    pub layout: Vec<ParamBlock>,
}

impl ParamVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let expected: usize = self.layout.iter().map(ParamBlock::len).sum();
        if expected != self.values.len() {
            return Err(Error::DimensionMismatch {
                layer: "parameter layout".into(),
                expected,
                found: self.values.len(),
            });
        }
        if let Some(index) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteParameter { index });
        }
        Ok(())
    }

    /// Iterates `(block, slice)` pairs in layout order.
    pub fn blocks(&self) -> impl Iterator<Item = (&ParamBlock, &[f64])> {
        let mut offset = 0;
        self.layout.iter().map(move |b| {
            let s = &self.values[offset..offset + b.len()];
            offset += b.len();
            (b, s)
        })
    }

    fn block_matrices(&self) -> Vec<Matrix> {
        self.blocks()
            .map(|(b, s)| Matrix::from_vec(b.rows, b.cols, s.to_vec()))
            .collect()
    }

    /// Offset of the block called `name`.
    pub fn offset_of(&self, name: &str) -> Option<(usize, &ParamBlock)> {
        let mut offset = 0;
        for b in &self.layout {
            if b.name == name {
                return Some((offset, b));
            }
            offset += b.len();
        }
        None
    }
}

impl NetworkSpec {
    pub fn mlp(input_dim: usize, hidden_layers: &[usize], output_dim: usize, output: OutputActivation) -> Self {
        Self {
            input_dim,
            hidden_layers: hidden_layers.to_vec(),
            output_dim,
            output,
            recurrent: None,
        }
    }

    pub fn recurrent(input_dim: usize, cell_size: usize, hidden_layers: &[usize], output_dim: usize) -> Self {
        Self {
            input_dim,
            hidden_layers: hidden_layers.to_vec(),
            output_dim,
            output: OutputActivation::Identity,
            recurrent: Some(RecurrentSpec { cell_size }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 {
            return Err(Error::InvalidConfig("network input/output dims must be positive".into()));
        }
        if self.hidden_layers.contains(&0) || self.recurrent.is_some_and(|r| r.cell_size == 0) {
            return Err(Error::InvalidConfig("layer widths must be positive".into()));
        }
        Ok(())
    }

    pub fn is_recurrent(&self) -> bool {
        self.recurrent.is_some()
    }

    pub fn cell_size(&self) -> Option<usize> {
        self.recurrent.map(|r| r.cell_size)
    }

    fn dense_widths(&self) -> Vec<usize> {
        let first = self.cell_size().unwrap_or(self.input_dim);
        let mut w = vec![first];
        w.extend_from_slice(&self.hidden_layers);
        w.push(self.output_dim);
        w
    }

    pub fn layout(&self) -> Vec<ParamBlock> {
        let block = |name: String, rows, cols| ParamBlock { name, rows, cols };
        let mut out = Vec::new();
        if let Some(c) = self.cell_size() {
            out.push(block("cell.input".into(), self.input_dim, c));
            out.push(block("cell.hidden".into(), c, c));
            out.push(block("cell.bias".into(), 1, c));
        }
        for (i, w) in self.dense_widths().windows(2).enumerate() {
            out.push(block(format!("layer{i}.weight"), w[0], w[1]));
            out.push(block(format!("layer{i}.bias"), 1, w[1]));
        }
        out
    }

    pub fn param_count(&self) -> usize {
        self.layout().iter().map(ParamBlock::len).sum()
    }

    /// Uniform fan-in initialization `U(-1/√fan_in, 1/√fan_in)` for weights and biases.
    pub fn init(&self, rng: &mut Rng) -> ParamVector {
        let layout = self.layout();
        let mut values = Vec::with_capacity(self.param_count());
        let mut fan_in = 0;
        for b in &layout {
            if b.rows > 1 || !b.name.ends_with("bias") {
                fan_in = b.rows;
            }
            if b.name == "cell.hidden" {
                fan_in += self.input_dim;
            }
            let bound = 1.0 / math::sqrt(fan_in.max(1) as f64);
            values.extend((0..b.len()).map(|_| uniform(rng, -bound, bound)));
        }
        ParamVector { values, layout }
    }

    fn check_params(&self, params: &ParamVector) -> Result<()> {
        let expected = self.param_count();
        if params.len() != expected || params.layout != self.layout() {
            return Err(Error::DimensionMismatch {
                layer: "parameters".into(),
                expected,
                found: params.len(),
            });
        }
        Ok(())
    }

    /// Plain, allocation-light evaluation of one input vector.
    ///
    /// `hidden` is required exactly when the network is recurrent; the updated
    /// hidden state is returned alongside the output.
    pub fn forward(
        &self,
        params: &ParamVector,
        input: &[f64],
        hidden: Option<&[f64]>,
    ) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
        self.check_params(params)?;
        if input.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                layer: if self.is_recurrent() { "cell.input".into() } else { "layer0".into() },
                expected: self.input_dim,
                found: input.len(),
            });
        }
        let blocks: Vec<(&ParamBlock, &[f64])> = params.blocks().collect();
        let mut next_block = 0;
        let mut x: Vec<f64>;
        let mut new_hidden = None;
        match (self.cell_size(), hidden) {
            (Some(c), Some(h)) => {
                if h.len() != c {
                    return Err(Error::DimensionMismatch {
                        layer: "cell.hidden".into(),
                        expected: c,
                        found: h.len(),
                    });
                }
                let (wx, wh, b) = (blocks[0].1, blocks[1].1, blocks[2].1);
                let mut pre = b.to_vec();
                affine_acc(&mut pre, input, wx, c);
                affine_acc(&mut pre, h, wh, c);
                x = pre.into_iter().map(math::tanh).collect();
                new_hidden = Some(x.clone());
                next_block = 3;
            }
            (Some(_), None) => {
                return Err(Error::InvalidConfig("recurrent network needs a hidden state".into()));
            }
            (None, Some(_)) => {
                return Err(Error::InvalidConfig("feedforward network takes no hidden state".into()));
            }
            (None, None) => x = input.to_vec(),
        }
        let n_dense = self.hidden_layers.len() + 1;
        for layer in 0..n_dense {
            let (wb, w) = blocks[next_block];
            let b = blocks[next_block + 1].1;
            next_block += 2;
            let mut y = b.to_vec();
            affine_acc(&mut y, &x, w, wb.cols);
            let last = layer + 1 == n_dense;
            if !last {
                y.iter_mut().for_each(|v| *v = v.max(0.0));
            } else if self.output == OutputActivation::Tanh {
                y.iter_mut().for_each(|v| *v = math::tanh(*v));
            }
            x = y;
        }
        Ok((x, new_hidden))
    }

    /// Registers `params` on `tape`. Frozen bindings still pass gradients to their inputs.
    pub fn bind(&self, tape: &mut Tape, params: &ParamVector, trainable: bool) -> Result<BoundNet> {
        self.check_params(params)?;
        let vars = params
            .block_matrices()
            .into_iter()
            .map(|m| if trainable { tape.param(m) } else { tape.constant(m) })
            .collect();
        Ok(BoundNet {
            spec: self.clone(),
            vars,
        })
    }
}

fn affine_acc(out: &mut [f64], x: &[f64], w: &[f64], cols: usize) {
    for (k, &xv) in x.iter().enumerate() {
        if xv == 0.0 {
            continue;
        }
        for (o, &wv) in out.iter_mut().zip(&w[k * cols..(k + 1) * cols]) {
            *o += xv * wv;
        }
    }
}

/// A network whose parameters live on a tape.
#[derive(Clone, Debug)]
pub struct BoundNet {
    spec: NetworkSpec,
    vars: Vec<Var>,
}

impl BoundNet {
    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    fn check_input(&self, tape: &Tape, x: Var, layer: &str, expected: usize) -> Result<()> {
        let found = tape.shape(x).1;
        if found != expected {
            return Err(Error::DimensionMismatch {
                layer: layer.into(),
                expected,
                found,
            });
        }
        Ok(())
    }

    fn dense(&self, tape: &mut Tape, mut x: Var, first_block: usize) -> Var {
        let n_dense = self.spec.hidden_layers.len() + 1;
        for layer in 0..n_dense {
            let w = self.vars[first_block + 2 * layer];
            let b = self.vars[first_block + 2 * layer + 1];
            let z = tape.matmul(x, w);
            let z = tape.add_row(z, b);
            x = if layer + 1 < n_dense {
                tape.relu(z)
            } else if self.spec.output == OutputActivation::Tanh {
                tape.tanh(z)
            } else {
                z
            };
        }
        x
    }

    /// Batched feedforward pass, `x` is `batch × input_dim`.
    pub fn forward(&self, tape: &mut Tape, x: Var) -> Result<Var> {
        if self.spec.is_recurrent() {
            return Err(Error::InvalidConfig("recurrent network needs a hidden state".into()));
        }
        self.check_input(tape, x, "layer0", self.spec.input_dim)?;
        Ok(self.dense(tape, x, 0))
    }

    /// One recurrent step; returns `(output, new_hidden)`.
    pub fn step(&self, tape: &mut Tape, x: Var, hidden: Var) -> Result<(Var, Var)> {
        let Some(c) = self.spec.cell_size() else {
            return Err(Error::InvalidConfig("feedforward network takes no hidden state".into()));
        };
        self.check_input(tape, x, "cell.input", self.spec.input_dim)?;
        self.check_input(tape, hidden, "cell.hidden", c)?;
        let zx = tape.matmul(x, self.vars[0]);
        let zh = tape.matmul(hidden, self.vars[1]);
        let z = tape.add(zx, zh);
        let z = tape.add_row(z, self.vars[2]);
        let h = tape.tanh(z);
        Ok((self.dense(tape, h, 3), h))
    }

    /// Flattens the gradients of this binding in layout order.
    pub fn gradient(&self, tape: &Tape, grads: &Gradients) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.spec.param_count());
        for &v in &self.vars {
            out.extend_from_slice(grads.wrt(v, tape.shape(v)).data());
        }
        out
    }
}
