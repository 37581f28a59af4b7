//! Reverse-mode differentiation over a linear operation record.
//!
//! Every op appends its output tensor to the tape's value arena and, when at
//! least one input requires a gradient, a node describing how to push the
//! output gradient back to its inputs. Nodes are appended in execution order,
//! so a single reverse sweep is a valid topological traversal.

use super::tensor::{order_free_sum, sigmoid, Tensor};
use crate::error::{Result, TdamError};

/// Clamp applied to probabilities inside the cross-entropy log.
pub const PROB_FLOOR: f64 = 1e-12;

/// Handle to a tensor stored on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Pointwise operation kinds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Elementwise {
    Tanh,
    Sigmoid,
    Mul,
    Add,
    Sub,
    Scale(f64),
}

impl Elementwise {
    pub fn is_binary(self) -> bool {
        matches!(self, Elementwise::Mul | Elementwise::Add | Elementwise::Sub)
    }
}

/// User-supplied vector-Jacobian product: `(inputs, output, output_grad) -> input grads`.
pub type CustomBackward = Box<dyn Fn(&[&Tensor], &Tensor, &[f64]) -> Vec<Vec<f64>> + Send + Sync>;

enum Op {
    MatMul,
    Transpose,
    Add,
    Sub,
    Mul,
    Scale(f64),
    Tanh,
    Sigmoid,
    Softmax,
    CrossEntropy { label: usize, clamped: bool },
    Sum,
    Concat,
    Stack,
    Mix,
    Custom(CustomBackward),
}

struct Node {
    op: Op,
    inputs: Vec<Var>,
    output: Var,
}

/// Single-threaded recording of one forward computation.
#[derive(Default)]
pub struct Tape {
    values: Vec<Tensor>,
    leaf: Vec<bool>,
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an input tensor; its own `requires_grad` flag is kept.
    pub fn leaf(&mut self, t: Tensor) -> Var {
        self.values.push(t);
        self.leaf.push(true);
        Var(self.values.len() - 1)
    }

    /// Adds a differentiable input.
    pub fn param(&mut self, t: Tensor) -> Var {
        self.leaf(t.with_requires_grad(true))
    }

    /// Adds a non-differentiable input.
    pub fn constant(&mut self, t: Tensor) -> Var {
        self.leaf(t.with_requires_grad(false))
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.values[v.0]
    }

    /// Gradient accumulated into a leaf by [`Tape::backward`].
    pub fn grad(&self, v: Var) -> Option<&[f64]> {
        self.values[v.0].grad()
    }

    pub fn take_value(&mut self, v: Var) -> Tensor {
        std::mem::replace(&mut self.values[v.0], Tensor::zeros(&[0]))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn value_count(&self) -> usize {
        self.values.len()
    }

    fn push(&mut self, out: Tensor, op: Op, inputs: Vec<Var>) -> Var {
        let needs_grad = inputs.iter().any(|v| self.values[v.0].requires_grad());
        let out = out.with_requires_grad(needs_grad);
        self.values.push(out);
        self.leaf.push(false);
        let output = Var(self.values.len() - 1);
        if needs_grad {
            self.nodes.push(Node { op, inputs, output });
        }
        output
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.value(a).matmul(self.value(b))?;
        Ok(self.push(out, Op::MatMul, vec![a, b]))
    }

    pub fn transpose(&mut self, a: Var) -> Result<Var> {
        let out = self.value(a).transpose()?;
        Ok(self.push(out, Op::Transpose, vec![a]))
    }

    pub fn elementwise(&mut self, kind: Elementwise, a: Var, b: Option<Var>) -> Result<Var> {
        match (kind, b) {
            (Elementwise::Tanh, None) => Ok(self.tanh(a)),
            (Elementwise::Sigmoid, None) => Ok(self.sigmoid(a)),
            (Elementwise::Scale(c), None) => Ok(self.scale(a, c)),
            (Elementwise::Add, Some(b)) => self.add(a, b),
            (Elementwise::Sub, Some(b)) => self.sub(a, b),
            (Elementwise::Mul, Some(b)) => self.mul(a, b),
            (k, _) => Err(TdamError::invalid(format!(
                "elementwise {k:?} takes {} operand(s)",
                if k.is_binary() { 2 } else { 1 }
            ))),
        }
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.value(a).zip_with(self.value(b), "add", |x, y| x + y)?;
        Ok(self.push(out, Op::Add, vec![a, b]))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.value(a).zip_with(self.value(b), "sub", |x, y| x - y)?;
        Ok(self.push(out, Op::Sub, vec![a, b]))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.value(a).zip_with(self.value(b), "mul", |x, y| x * y)?;
        Ok(self.push(out, Op::Mul, vec![a, b]))
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        let out = self.value(a).map(|x| x * c);
        self.push(out, Op::Scale(c), vec![a])
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let out = self.value(a).map(f64::tanh);
        self.push(out, Op::Tanh, vec![a])
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let out = self.value(a).map(sigmoid);
        self.push(out, Op::Sigmoid, vec![a])
    }

    pub fn softmax(&mut self, a: Var) -> Result<Var> {
        let out = self.value(a).softmax()?;
        Ok(self.push(out, Op::Softmax, vec![a]))
    }

    /// `-ln(max(probs[label], 1e-12))`.
    pub fn cross_entropy(&mut self, probs: Var, label: usize) -> Result<Var> {
        let p = self.value(probs);
        if label >= p.len() {
            return Err(TdamError::LabelOutOfRange {
                label,
                classes: p.len(),
            });
        }
        let pl = p.data()[label];
        let clamped = pl <= PROB_FLOOR;
        let out = Tensor::scalar(0.0 - pl.max(PROB_FLOOR).ln());
        Ok(self.push(out, Op::CrossEntropy { label, clamped }, vec![probs]))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.value(a).data().iter().sum();
        self.push(Tensor::scalar(s), Op::Sum, vec![a])
    }

    /// Concatenates 1-D tensors.
    pub fn concat(&mut self, parts: &[Var]) -> Result<Var> {
        let mut data = Vec::new();
        for &p in parts {
            let t = self.value(p);
            if t.shape().len() != 1 {
                return Err(TdamError::Shape {
                    op: "concat",
                    left: t.shape().to_vec(),
                    right: vec![t.len()],
                });
            }
            data.extend_from_slice(t.data());
        }
        Ok(self.push(Tensor::vector(data), Op::Concat, parts.to_vec()))
    }

    /// Stacks equal-length 1-D tensors as the rows of a matrix.
    pub fn stack(&mut self, rows: &[Var]) -> Result<Var> {
        if rows.is_empty() {
            return Err(TdamError::Empty("stack rows"));
        }
        let width = self.value(rows[0]).len();
        let mut data = Vec::with_capacity(width * rows.len());
        for &r in rows {
            let t = self.value(r);
            if t.shape() != [width] {
                return Err(TdamError::Shape {
                    op: "stack",
                    left: vec![width],
                    right: t.shape().to_vec(),
                });
            }
            data.extend_from_slice(t.data());
        }
        let out = Tensor::matrix(rows.len(), width, data)?;
        Ok(self.push(out, Op::Stack, rows.to_vec()))
    }

    /// Convex combination `Σ_k weights[k] · rows[k]` of the rows of a `K×n`
    /// matrix. Each output coordinate is summed in sorted order, so permuting
    /// the rows together with the weights leaves the result bit-identical.
    pub fn mix(&mut self, weights: Var, rows: Var) -> Result<Var> {
        let (w, m) = (self.value(weights), self.value(rows));
        let (k, n) = match m.shape() {
            [k, n] => (*k, *n),
            _ => {
                return Err(TdamError::Shape {
                    op: "mix",
                    left: w.shape().to_vec(),
                    right: m.shape().to_vec(),
                })
            }
        };
        if w.shape() != [k] {
            return Err(TdamError::Shape {
                op: "mix",
                left: w.shape().to_vec(),
                right: m.shape().to_vec(),
            });
        }
        let mut terms = vec![0.0; k];
        let mut out = vec![0.0; n];
        for (j, o) in out.iter_mut().enumerate() {
            for (i, t) in terms.iter_mut().enumerate() {
                *t = w.data()[i] * m.data()[i * n + j];
            }
            *o = order_free_sum(&mut terms);
        }
        Ok(self.push(Tensor::vector(out), Op::Mix, vec![weights, rows]))
    }

    /// Records an op whose forward result is `output` and whose backward is `backward`.
    pub fn custom(&mut self, inputs: &[Var], output: Tensor, backward: CustomBackward) -> Var {
        self.push(output, Op::Custom(backward), inputs.to_vec())
    }

    /// Back-propagates from a scalar `loss`, accumulating into the gradient
    /// slot of every participating leaf that requires a gradient.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        if self.value(loss).len() != 1 {
            return Err(TdamError::Shape {
                op: "backward",
                left: self.value(loss).shape().to_vec(),
                right: vec![],
            });
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; self.values.len()];
        grads[loss.0] = Some(vec![1.0]);
        for node in self.nodes.iter().rev() {
            let Some(g) = grads[node.output.0].take() else {
                continue;
            };
            let contributions = node_backward(node, &self.values, &g);
            for (input, contrib) in node.inputs.iter().zip(contributions) {
                if !self.values[input.0].requires_grad() {
                    continue;
                }
                let Some(c) = contrib else { continue };
                match &mut grads[input.0] {
                    Some(acc) => acc.iter_mut().zip(&c).for_each(|(a, b)| *a += b),
                    slot @ None => *slot = Some(c),
                }
            }
        }
        for (i, g) in grads.into_iter().enumerate() {
            if let Some(g) = g {
                if self.leaf[i] && self.values[i].requires_grad() {
                    self.values[i].accumulate_grad(&g);
                }
            }
        }
        Ok(())
    }
}

fn node_backward(node: &Node, values: &[Tensor], g: &[f64]) -> Vec<Option<Vec<f64>>> {
    let input = |i: usize| &values[node.inputs[i].0];
    let out = &values[node.output.0];
    match &node.op {
        Op::MatMul => {
            let (a, b) = (input(0), input(1));
            let (m, k) = (a.shape()[0], a.shape()[1]);
            let n = if b.shape().len() == 2 { b.shape()[1] } else { 1 };
            let mut da = vec![0.0; m * k];
            let mut db = vec![0.0; k * n];
            for i in 0..m {
                let grow = &g[i * n..(i + 1) * n];
                for p in 0..k {
                    let brow = &b.data()[p * n..(p + 1) * n];
                    da[i * k + p] = grow.iter().zip(brow).map(|(x, y)| x * y).sum();
                    let aip = a.data()[i * k + p];
                    for (d, gv) in db[p * n..(p + 1) * n].iter_mut().zip(grow) {
                        *d += aip * gv;
                    }
                }
            }
            vec![Some(da), Some(db)]
        }
        Op::Transpose => {
            let shape = out.shape();
            let (r, c) = (shape[0], shape[1]);
            let mut d = vec![0.0; r * c];
            for i in 0..r {
                for j in 0..c {
                    d[j * r + i] = g[i * c + j];
                }
            }
            vec![Some(d)]
        }
        Op::Add => vec![Some(g.to_vec()), Some(g.to_vec())],
        Op::Sub => vec![Some(g.to_vec()), Some(g.iter().map(|x| -x).collect())],
        Op::Mul => {
            let (a, b) = (input(0).data(), input(1).data());
            vec![
                Some(g.iter().zip(b).map(|(x, y)| x * y).collect()),
                Some(g.iter().zip(a).map(|(x, y)| x * y).collect()),
            ]
        }
        Op::Scale(c) => vec![Some(g.iter().map(|x| x * c).collect())],
        Op::Tanh => vec![Some(
            g.iter().zip(out.data()).map(|(gv, y)| gv * (1.0 - y * y)).collect(),
        )],
        Op::Sigmoid => vec![Some(
            g.iter().zip(out.data()).map(|(gv, y)| gv * y * (1.0 - y)).collect(),
        )],
        Op::Softmax => {
            let y = out.data();
            let dot: f64 = g.iter().zip(y).map(|(a, b)| a * b).sum();
            vec![Some(y.iter().zip(g).map(|(yv, gv)| yv * (gv - dot)).collect())]
        }
        Op::CrossEntropy { label, clamped } => {
            let p = input(0).data();
            let mut d = vec![0.0; p.len()];
            if !clamped {
                d[*label] = -g[0] / p[*label];
            }
            vec![Some(d)]
        }
        Op::Sum => vec![Some(vec![g[0]; input(0).len()])],
        Op::Concat => {
            let mut offset = 0;
            node.inputs
                .iter()
                .map(|v| {
                    let len = values[v.0].len();
                    let part = g[offset..offset + len].to_vec();
                    offset += len;
                    Some(part)
                })
                .collect()
        }
        Op::Stack => {
            let width = out.shape()[1];
            (0..node.inputs.len())
                .map(|i| Some(g[i * width..(i + 1) * width].to_vec()))
                .collect()
        }
        Op::Mix => {
            let (w, m) = (input(0), input(1));
            let (k, n) = (m.shape()[0], m.shape()[1]);
            let mut dw = vec![0.0; k];
            let mut dm = vec![0.0; k * n];
            for i in 0..k {
                let row = &m.data()[i * n..(i + 1) * n];
                dw[i] = row.iter().zip(g).map(|(a, b)| a * b).sum();
                let wi = w.data()[i];
                for (d, gv) in dm[i * n..(i + 1) * n].iter_mut().zip(g) {
                    *d = wi * gv;
                }
            }
            vec![Some(dw), Some(dm)]
        }
        Op::Custom(f) => {
            let ins: Vec<&Tensor> = node.inputs.iter().map(|v| &values[v.0]).collect();
            f(&ins, out, g).into_iter().map(Some).collect()
        }
    }
}
