//! Dense `f64` tensors with reverse-mode automatic differentiation.
//!
//! Values are stored row-major. Every operation computes its result eagerly
//! and, when any operand requires gradients, records a backward rule on the
//! output node. [`Tensor::backward`] walks the recorded graph once in reverse
//! topological order and accumulates gradients into every participating
//! tensor that requires them.
//!
//! A tensor handle is a cheap reference-counted pointer; cloning it does not
//! copy data. Graphs are single-threaded: build and consume a graph on one
//! thread, and do not mutate leaf data while a graph referencing it is alive.

mod grad_check;
mod ops;

pub use grad_check::{grad_check, GradCheckReport};

use std::cell::RefCell;
use std::collections::HashSet;
use std::fmt;
use std::rc::Rc;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

static NEXT_ID: AtomicU64 = AtomicU64::new(0);

pub(crate) type BackwardFn = Box<dyn Fn(&[f64], &[Tensor])>;

pub(crate) struct OpRecord {
    pub(crate) parents: Vec<Tensor>,
    pub(crate) backward: BackwardFn,
}

pub(crate) struct Node {
    id: u64,
    shape: Vec<usize>,
    data: RefCell<Vec<f64>>,
    grad: RefCell<Option<Vec<f64>>>,
    requires_grad: bool,
    op: Option<OpRecord>,
}

/// Dense row-major tensor of `f64` with an optional gradient buffer.
#[derive(Clone)]
pub struct Tensor {
    pub(crate) node: Rc<Node>,
}

impl fmt::Debug for Tensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tensor")
            .field("shape", &self.node.shape)
            .field("requires_grad", &self.node.requires_grad)
            .field("data", &self.node.data.borrow())
            .finish()
    }
}

impl Tensor {
    /// Leaf tensor from a shape and row-major data. Panics if the data length
    /// does not equal the product of the extents.
    pub fn new(shape: impl Into<Vec<usize>>, data: impl Into<Vec<f64>>) -> Tensor {
        let shape = shape.into();
        let data = data.into();
        assert_eq!(
            data.len(),
            shape.iter().product::<usize>(),
            "tensor data length {} does not match shape {:?}",
            data.len(),
            shape
        );
        Tensor::leaf(shape, data, false)
    }

    /// Trainable leaf: like [`Tensor::new`] but participates in backward.
    pub fn param(shape: impl Into<Vec<usize>>, data: impl Into<Vec<f64>>) -> Tensor {
        let t = Tensor::new(shape, data);
        Tensor::leaf(t.node.shape.clone(), t.node.data.borrow().clone(), true)
    }

    pub fn zeros(shape: impl Into<Vec<usize>>) -> Tensor {
        let shape = shape.into();
        let n = shape.iter().product();
        Tensor::leaf(shape, vec![0.0; n], false)
    }

    pub fn scalar(v: f64) -> Tensor {
        Tensor::leaf(vec![], vec![v], false)
    }

    pub(crate) fn leaf(shape: Vec<usize>, data: Vec<f64>, requires_grad: bool) -> Tensor {
        Tensor {
            node: Rc::new(Node {
                id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
                shape,
                data: RefCell::new(data),
                grad: RefCell::new(None),
                requires_grad,
                op: None,
            }),
        }
    }

    /// Output node of an operation. `requires_grad` is inherited from the
    /// parents; the backward rule is recorded only when it is needed.
    pub(crate) fn from_op(
        shape: Vec<usize>,
        data: Vec<f64>,
        parents: Vec<Tensor>,
        backward: BackwardFn,
    ) -> Tensor {
        debug_assert_eq!(data.len(), shape.iter().product::<usize>());
        let requires_grad = parents.iter().any(|p| p.node.requires_grad);
        let op = requires_grad.then_some(OpRecord { parents, backward });
        Tensor {
            node: Rc::new(Node {
                id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
                shape,
                data: RefCell::new(data),
                grad: RefCell::new(None),
                requires_grad,
                op,
            }),
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.node.shape
    }

    pub fn numel(&self) -> usize {
        self.node.shape.iter().product()
    }

    pub fn requires_grad(&self) -> bool {
        self.node.requires_grad
    }

    /// Number of rows of a rank-2 tensor.
    pub fn rows(&self) -> usize {
        assert_eq!(self.node.shape.len(), 2, "rows() needs a rank-2 tensor");
        self.node.shape[0]
    }

    /// Number of columns of a rank-2 tensor.
    pub fn cols(&self) -> usize {
        assert_eq!(self.node.shape.len(), 2, "cols() needs a rank-2 tensor");
        self.node.shape[1]
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.node.data.borrow().clone()
    }

    /// Value of a scalar (single-element) tensor.
    pub fn item(&self) -> f64 {
        let d = self.node.data.borrow();
        assert_eq!(d.len(), 1, "item() needs a single-element tensor");
        d[0]
    }

    /// Element of a rank-2 tensor.
    pub fn at2(&self, i: usize, j: usize) -> f64 {
        let cols = self.cols();
        self.node.data.borrow()[i * cols + j]
    }

    pub fn grad(&self) -> Option<Vec<f64>> {
        self.node.grad.borrow().clone()
    }

    pub fn zero_grad(&self) {
        *self.node.grad.borrow_mut() = None;
    }

    /// Detached copy: same values, fresh leaf, no graph history.
    pub fn detach(&self) -> Tensor {
        Tensor::leaf(self.node.shape.clone(), self.to_vec(), false)
    }

    /// Mutate the underlying values in place (parameter updates). Must not be
    /// called while a graph built from this tensor is still alive.
    pub fn update_data(&self, f: impl FnOnce(&mut [f64])) {
        f(&mut self.node.data.borrow_mut());
    }

    pub(crate) fn id(&self) -> u64 {
        self.node.id
    }

    pub(crate) fn accumulate_grad(&self, delta: &[f64]) {
        if !self.node.requires_grad {
            return;
        }
        let mut slot = self.node.grad.borrow_mut();
        match slot.as_mut() {
            Some(g) => {
                for (gi, di) in g.iter_mut().zip(delta) {
                    *gi += di;
                }
            }
            None => *slot = Some(delta.to_vec()),
        }
    }

    /// Reverse-mode differentiation from a scalar loss. Populates `grad` on
    /// every tensor in the graph that requires gradients; each node's rule
    /// runs exactly once, in reverse topological order.
    pub fn backward(&self) -> Result<()> {
        if self.numel() != 1 {
            return Err(Error::Degenerate {
                op: "backward",
                detail: format!("loss must be scalar, got shape {:?}", self.node.shape),
            });
        }
        if !self.node.requires_grad {
            return Ok(()); // constant loss: nothing to do
        }

        // Post-order DFS: parents before children, loss last.
        let mut order: Vec<Tensor> = Vec::new();
        let mut visited: HashSet<u64> = HashSet::new();
        let mut stack: Vec<(Tensor, bool)> = vec![(self.clone(), false)];
        while let Some((t, expanded)) = stack.pop() {
            if expanded {
                order.push(t);
                continue;
            }
            if !visited.insert(t.id()) {
                continue;
            }
            stack.push((t.clone(), true));
            if let Some(op) = &t.node.op {
                for p in &op.parents {
                    if p.node.requires_grad && !visited.contains(&p.id()) {
                        stack.push((p.clone(), false));
                    }
                }
            }
        }

        self.accumulate_grad(&[1.0]);
        for t in order.iter().rev() {
            if let Some(op) = &t.node.op {
                let g = t
                    .node
                    .grad
                    .borrow()
                    .clone()
                    .expect("reverse order guarantees a populated gradient");
                (op.backward)(&g, &op.parents);
            }
        }
        Ok(())
    }
}

/// Standard-normal sample via Box–Muller; deterministic given the generator.
pub fn randn(rng: &mut impl rand::Rng) -> f64 {
    loop {
        let u1: f64 = rng.gen();
        let u2: f64 = rng.gen();
        if u1 > f64::MIN_POSITIVE {
            return (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
        }
    }
}

#[cfg(test)]
mod tests;
