use std::collections::BTreeMap;

use super::{ops, Array, NumericError, ParamStore};

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NodeId(usize);

/// Operation that produced a node.
#[derive(Clone, Debug)]
pub enum Op {
    Constant,
    Param(String),
    Conv2d,
    LeakyRelu { slope: f64 },
    ConcatChannels,
    Add,
    Sub,
    Scale { factor: f64 },
    FullyConnected,
    Reshape,
    TileFrames { frames: usize },
    SumSquares,
}

#[derive(Clone, Debug)]
struct Node {
    op: Op,
    inputs: Vec<NodeId>,
    value: Array,
}

/// Topologically ordered record of a forward computation.
///
/// Nodes are appended eagerly with their forward values, so the record is a
/// valid evaluation order by construction; [`Tape::replay`] recomputes every
/// value from the recorded operations and reproduces the stored values
/// bit-exactly. [`Tape::backward`] runs the reverse sweep from a scalar node.
/// Gradient accumulation follows the fixed record order, so repeated runs are
/// bit-identical; only rewriting the graph in a different node order moves
/// results within floating-point associativity.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: NodeId) -> &Array {
        &self.nodes[id.0].value
    }

    pub fn op(&self, id: NodeId) -> &Op {
        &self.nodes[id.0].op
    }

    fn push(&mut self, op: Op, inputs: Vec<NodeId>, value: Array) -> NodeId {
        self.nodes.push(Node { op, inputs, value });
        NodeId(self.nodes.len() - 1)
    }

    pub fn constant(&mut self, value: Array) -> NodeId {
        self.push(Op::Constant, vec![], value)
    }

    /// Leaf node carrying the current value of a stored parameter.
    pub fn param(&mut self, store: &ParamStore, path: &str) -> Result<NodeId, NumericError> {
        let value = store.get(path)?.clone();
        Ok(self.push(Op::Param(path.to_string()), vec![], value))
    }

    pub fn conv2d(
        &mut self,
        input: NodeId,
        kernel: NodeId,
        bias: NodeId,
    ) -> Result<NodeId, NumericError> {
        let value = ops::conv2d(self.value(input), self.value(kernel), self.value(bias))?;
        Ok(self.push(Op::Conv2d, vec![input, kernel, bias], value))
    }

    pub fn leaky_relu(&mut self, x: NodeId, slope: f64) -> Result<NodeId, NumericError> {
        let value = ops::leaky_relu(self.value(x), slope)?;
        Ok(self.push(Op::LeakyRelu { slope }, vec![x], value))
    }

    pub fn concat_channels(&mut self, inputs: &[NodeId]) -> Result<NodeId, NumericError> {
        let arrays: Vec<&Array> = inputs.iter().map(|&id| self.value(id)).collect();
        let value = ops::concat_channels(&arrays)?;
        Ok(self.push(Op::ConcatChannels, inputs.to_vec(), value))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, NumericError> {
        let value = ops::add(self.value(a), self.value(b))?;
        Ok(self.push(Op::Add, vec![a, b], value))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, NumericError> {
        let value = ops::sub(self.value(a), self.value(b))?;
        Ok(self.push(Op::Sub, vec![a, b], value))
    }

    pub fn scale(&mut self, x: NodeId, factor: f64) -> NodeId {
        let value = ops::scale(self.value(x), factor);
        self.push(Op::Scale { factor }, vec![x], value)
    }

    pub fn fully_connected(
        &mut self,
        x: NodeId,
        weight: NodeId,
        bias: NodeId,
    ) -> Result<NodeId, NumericError> {
        let value = ops::fully_connected(self.value(x), self.value(weight), self.value(bias))?;
        Ok(self.push(Op::FullyConnected, vec![x, weight, bias], value))
    }

    pub fn reshape(&mut self, x: NodeId, shape: Vec<usize>) -> Result<NodeId, NumericError> {
        let value = self.value(x).reshaped(shape)?;
        Ok(self.push(Op::Reshape, vec![x], value))
    }

    pub fn tile_frames(&mut self, x: NodeId, frames: usize) -> Result<NodeId, NumericError> {
        let value = ops::tile_frames(self.value(x), frames)?;
        Ok(self.push(Op::TileFrames { frames }, vec![x], value))
    }

    pub fn sum_squares(&mut self, x: NodeId) -> NodeId {
        let value = ops::sum_squares(self.value(x));
        self.push(Op::SumSquares, vec![x], value)
    }

    /// Recompute every node from the recorded operations, returning the fresh
    /// values in record order.
    pub fn replay(&self) -> Result<Vec<Array>, NumericError> {
        let mut values: Vec<Array> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let arg = |i: usize| &values[node.inputs[i].0];
            let value = match &node.op {
                Op::Constant | Op::Param(_) => node.value.clone(),
                Op::Conv2d => ops::conv2d(arg(0), arg(1), arg(2))?,
                Op::LeakyRelu { slope } => ops::leaky_relu(arg(0), *slope)?,
                Op::ConcatChannels => {
                    let arrays: Vec<&Array> =
                        node.inputs.iter().map(|id| &values[id.0]).collect();
                    ops::concat_channels(&arrays)?
                }
                Op::Add => ops::add(arg(0), arg(1))?,
                Op::Sub => ops::sub(arg(0), arg(1))?,
                Op::Scale { factor } => ops::scale(arg(0), *factor),
                Op::FullyConnected => ops::fully_connected(arg(0), arg(1), arg(2))?,
                Op::Reshape => arg(0).reshaped(node.value.shape().to_vec())?,
                Op::TileFrames { frames } => ops::tile_frames(arg(0), *frames)?,
                Op::SumSquares => ops::sum_squares(arg(0)),
            };
            values.push(value);
        }
        Ok(values)
    }

    /// Reverse sweep from a scalar output. Returns gradients for every node
    /// that influences it, with parameter gradients collected by path.
    pub fn backward(&self, output: NodeId) -> Result<Gradients, NumericError> {
        let out_value = self.value(output);
        if !out_value.is_scalar() {
            return Err(NumericError::contract(
                "backward",
                format!(
                    "output must be scalar, got shape {:?}",
                    out_value.shape()
                ),
            ));
        }

        let mut node_grads: Vec<Option<Array>> = vec![None; self.nodes.len()];
        node_grads[output.0] = Some(Array::scalar(1.0));

        for id in (0..=output.0).rev() {
            let Some(grad) = node_grads[id].clone() else {
                continue;
            };
            let node = &self.nodes[id];
            let input_grads: Vec<(NodeId, Array)> = match &node.op {
                Op::Constant | Op::Param(_) => vec![],
                Op::Conv2d => {
                    let (gx, gk, gb) = ops::conv2d_backward(
                        &grad,
                        self.value(node.inputs[0]),
                        self.value(node.inputs[1]),
                    );
                    vec![
                        (node.inputs[0], gx),
                        (node.inputs[1], gk),
                        (node.inputs[2], gb),
                    ]
                }
                Op::LeakyRelu { slope } => {
                    let gx = ops::leaky_relu_backward(&grad, self.value(node.inputs[0]), *slope);
                    vec![(node.inputs[0], gx)]
                }
                Op::ConcatChannels => {
                    let arrays: Vec<&Array> =
                        node.inputs.iter().map(|&i| self.value(i)).collect();
                    let parts = ops::concat_channels_backward(&grad, &arrays);
                    node.inputs.iter().copied().zip(parts).collect()
                }
                Op::Add => vec![
                    (node.inputs[0], grad.clone()),
                    (node.inputs[1], grad.clone()),
                ],
                Op::Sub => vec![
                    (node.inputs[0], grad.clone()),
                    (node.inputs[1], ops::scale(&grad, -1.0)),
                ],
                Op::Scale { factor } => {
                    vec![(node.inputs[0], ops::scale(&grad, *factor))]
                }
                Op::FullyConnected => {
                    let (gx, gw, gb) = ops::fully_connected_backward(
                        &grad,
                        self.value(node.inputs[0]),
                        self.value(node.inputs[1]),
                    );
                    vec![
                        (node.inputs[0], gx),
                        (node.inputs[1], gw),
                        (node.inputs[2], gb),
                    ]
                }
                Op::Reshape => {
                    let gx = grad
                        .reshaped(self.value(node.inputs[0]).shape().to_vec())
                        .expect("reshape grad has matching element count");
                    vec![(node.inputs[0], gx)]
                }
                Op::TileFrames { .. } => {
                    let gx = ops::tile_frames_backward(&grad, self.value(node.inputs[0]));
                    vec![(node.inputs[0], gx)]
                }
                Op::SumSquares => {
                    let gx = ops::sum_squares_backward(&grad, self.value(node.inputs[0]));
                    vec![(node.inputs[0], gx)]
                }
            };
            for (input, g) in input_grads {
                match &mut node_grads[input.0] {
                    Some(existing) => {
                        for (e, v) in existing.data_mut().iter_mut().zip(g.data()) {
                            *e += v;
                        }
                    }
                    slot @ None => *slot = Some(g),
                }
            }
        }

        let mut by_param: BTreeMap<String, Array> = BTreeMap::new();
        for (i, node) in self.nodes.iter().enumerate() {
            if let Op::Param(path) = &node.op {
                if let Some(g) = &node_grads[i] {
                    match by_param.get_mut(path) {
                        Some(existing) => {
                            for (e, v) in existing.data_mut().iter_mut().zip(g.data()) {
                                *e += v;
                            }
                        }
                        None => {
                            by_param.insert(path.clone(), g.clone());
                        }
                    }
                }
            }
        }

        Ok(Gradients {
            node_grads,
            by_param,
        })
    }
}

/// Result of a reverse sweep.
#[derive(Debug)]
pub struct Gradients {
    node_grads: Vec<Option<Array>>,
    by_param: BTreeMap<String, Array>,
}

impl Gradients {
    /// Gradient with respect to a node, if the node influences the output.
    pub fn wrt(&self, id: NodeId) -> Option<&Array> {
        self.node_grads[id.0].as_ref()
    }

    pub fn param(&self, path: &str) -> Option<&Array> {
        self.by_param.get(path)
    }

    pub fn by_param(&self) -> &BTreeMap<String, Array> {
        &self.by_param
    }
}

/// Parameter leaf nodes bound onto one tape, looked up by path.
pub struct BoundParams {
    nodes: BTreeMap<String, NodeId>,
}

impl BoundParams {
    /// Create one leaf node per stored parameter. Reusing the returned
    /// handles across several forward passes on the same tape accumulates
    /// their gradients, which is how batches sum parameter gradients.
    pub fn bind(tape: &mut Tape, store: &ParamStore) -> Self {
        let mut nodes = BTreeMap::new();
        for path in store.paths() {
            let id = tape
                .param(store, path)
                .expect("paths() only yields stored parameters");
            nodes.insert(path.to_string(), id);
        }
        BoundParams { nodes }
    }

    pub fn get(&self, path: &str) -> Result<NodeId, NumericError> {
        self.nodes
            .get(path)
            .copied()
            .ok_or_else(|| NumericError::UnknownParam(path.to_string()))
    }
}
