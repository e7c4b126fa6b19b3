//! Feedforward networks with bias-augmented weight matrices.
//!
//! Layer `l` maps the previous activations `prev` to `f_l(W_l * [prev; 1])`,
//! where `W_l` has one row per unit and one column per input plus a final
//! bias column.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::fmt::g17;
use crate::linalg::{self, LinalgError, Matrix};

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("malformed network spec `{spec}`: {reason}")]
    Syntax { spec: String, reason: String },
    #[error("spec `{spec}` has {sizes} layer sizes but {activations} activations (need {needed})")]
    Arity {
        spec: String,
        sizes: usize,
        activations: usize,
        needed: usize,
    },
    #[error("layer {layer}: expected weights of shape {expected_rows}x{expected_cols}, got {rows}x{cols}")]
    WeightShape {
        layer: usize,
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },
    #[error("expected {expected} weight matrices, got {actual}")]
    LayerCount { expected: usize, actual: usize },
    #[error("input has length {actual}, network expects {expected}")]
    InputLength { expected: usize, actual: usize },
    #[error("target has length {actual}, network produces {expected}")]
    TargetLength { expected: usize, actual: usize },
    #[error("network has {0} outputs; a scalar output was required")]
    NotScalar(usize),
    #[error("layer {layer} uses activation {activation}; collapsing needs all-identity layers")]
    NotLinear { layer: usize, activation: Activation },
    #[error("model file line {line}: {reason}")]
    ModelFormat { line: usize, reason: String },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, NetworkError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Id,
    Tanh,
    Sigmoid,
    Relu,
}

impl Activation {
    pub const ALL: [Activation; 4] = [Activation::Id, Activation::Tanh, Activation::Sigmoid, Activation::Relu];

    pub fn apply(self, t: f64) -> f64 {
        match self {
            Activation::Id => t,
            Activation::Tanh => t.tanh(),
            Activation::Sigmoid => 1.0 / (1.0 + (-t).exp()),
            Activation::Relu => {
                if t > 0.0 {
                    t
                } else {
                    0.0
                }
            }
        }
    }

    /// Derivative at `t`. RELU uses slope 0 at the fold, matching `u(0) = 0`.
    pub fn derivative(self, t: f64) -> f64 {
        match self {
            Activation::Id => 1.0,
            Activation::Tanh => {
                let y = t.tanh();
                1.0 - y * y
            }
            Activation::Sigmoid => {
                let y = self.apply(t);
                y * (1.0 - y)
            }
            Activation::Relu => {
                if t > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Id => "id",
            Activation::Tanh => "tanh",
            Activation::Sigmoid => "sigmoid",
            Activation::Relu => "relu",
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "id" => Ok(Activation::Id),
            "tanh" => Ok(Activation::Tanh),
            "sigmoid" => Ok(Activation::Sigmoid),
            "relu" => Ok(Activation::Relu),
            _ => Err(format!("unknown activation `{s}` (expected id, tanh, sigmoid or relu)")),
        }
    }
}

/// Layer sizes plus one activation per non-input layer, written
/// `2-2-1/inp-tanh-tanh`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Topology {
    sizes: Vec<usize>,
    activations: Vec<Activation>,
}

impl Topology {
    pub fn new(sizes: Vec<usize>, activations: Vec<Activation>) -> Result<Self> {
        let spec = || render(&sizes, &activations);
        if sizes.len() < 2 {
            return Err(NetworkError::Syntax {
                spec: spec(),
                reason: "need at least an input and an output layer".into(),
            });
        }
        if sizes.contains(&0) {
            return Err(NetworkError::Syntax {
                spec: spec(),
                reason: "layer sizes must be positive".into(),
            });
        }
        if activations.len() != sizes.len() - 1 {
            return Err(NetworkError::Arity {
                spec: spec(),
                sizes: sizes.len(),
                activations: activations.len(),
                needed: sizes.len() - 1,
            });
        }
        Ok(Self { sizes, activations })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    pub fn inputs(&self) -> usize {
        self.sizes[0]
    }

    pub fn outputs(&self) -> usize {
        *self.sizes.last().expect("at least two layers")
    }

    /// Number of weight matrices.
    pub fn depth(&self) -> usize {
        self.activations.len()
    }

    /// Shape of weight matrix `l`: units by (inputs + bias).
    pub fn weight_shape(&self, l: usize) -> (usize, usize) {
        (self.sizes[l + 1], self.sizes[l] + 1)
    }

    pub fn is_linear(&self) -> bool {
        self.activations.iter().all(|&a| a == Activation::Id)
    }
}

fn render(sizes: &[usize], activations: &[Activation]) -> String {
    let sizes: Vec<String> = sizes.iter().map(|s| s.to_string()).collect();
    let mut out = sizes.join("-");
    out.push_str("/inp");
    for a in activations {
        out.push('-');
        out.push_str(a.name());
    }
    out
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(&self.sizes, &self.activations))
    }
}

impl FromStr for Topology {
    type Err = NetworkError;

    fn from_str(s: &str) -> Result<Self> {
        parse_spec(s)
    }
}

/// Parses the `2-2-1` part of a spec.
pub fn parse_layer_sizes(text: &str) -> Result<Vec<usize>> {
    let syntax = |reason: &str| NetworkError::Syntax {
        spec: text.to_string(),
        reason: reason.to_string(),
    };
    let sizes = text
        .trim()
        .split('-')
        .map(|p| p.trim().parse::<usize>().map_err(|_| syntax("layer sizes must be positive integers")))
        .collect::<Result<Vec<_>>>()?;
    if sizes.len() < 2 {
        return Err(syntax("need at least an input and an output layer"));
    }
    if sizes.contains(&0) {
        return Err(syntax("layer sizes must be positive"));
    }
    Ok(sizes)
}

/// Parses `sizes/inp-act-...`, e.g. `2-2-1/inp-tanh-tanh`.
pub fn parse_spec(text: &str) -> Result<Topology> {
    let syntax = |reason: String| NetworkError::Syntax {
        spec: text.to_string(),
        reason,
    };
    let (sizes, acts) = text
        .split_once('/')
        .ok_or_else(|| syntax("missing `/inp-...` activation part".into()))?;
    let sizes = parse_layer_sizes(sizes)?;
    let mut parts = acts.trim().split('-');
    if !parts.next().is_some_and(|p| p.eq_ignore_ascii_case("inp")) {
        return Err(syntax("activation part must start with `inp`".into()));
    }
    let activations = parts
        .map(|p| p.trim().parse::<Activation>().map_err(&syntax))
        .collect::<Result<Vec<_>>>()?;
    if activations.len() != sizes.len() - 1 {
        return Err(NetworkError::Arity {
            spec: text.to_string(),
            sizes: sizes.len(),
            activations: activations.len(),
            needed: sizes.len() - 1,
        });
    }
    Topology::new(sizes, activations)
}

/// Weights including biases: `sum_l n_{l+1} * (n_l + 1)`.
pub fn count_weights(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[1] * (w[0] + 1)).sum()
}

/// Values retained from a forward pass for reuse by the gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    pub input: Vec<f64>,
    /// Linear outputs `W_l * [prev; 1]`, one vector per layer.
    pub pre: Vec<Vec<f64>>,
    /// Activated outputs `f_l(pre_l)`; the last entry is the network output.
    pub post: Vec<Vec<f64>>,
}

impl Forward {
    pub fn output(&self) -> &[f64] {
        self.post.last().expect("network has at least one layer")
    }

    fn layer_input(&self, l: usize) -> &[f64] {
        if l == 0 {
            &self.input
        } else {
            &self.post[l - 1]
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    topology: Topology,
    weights: Vec<Matrix>,
}

impl Network {
    pub fn new(topology: Topology, weights: Vec<Matrix>) -> Result<Self> {
        if weights.len() != topology.depth() {
            return Err(NetworkError::LayerCount {
                expected: topology.depth(),
                actual: weights.len(),
            });
        }
        for (l, w) in weights.iter().enumerate() {
            let (er, ec) = topology.weight_shape(l);
            if w.shape() != (er, ec) {
                return Err(NetworkError::WeightShape {
                    layer: l,
                    expected_rows: er,
                    expected_cols: ec,
                    rows: w.rows(),
                    cols: w.cols(),
                });
            }
        }
        Ok(Self { topology, weights })
    }

    /// Convenience constructor from nested row slices, one block per layer.
    pub fn from_layers(spec: &str, layers: &[&[&[f64]]]) -> Result<Self> {
        let topology = parse_spec(spec)?;
        let weights = layers
            .iter()
            .map(|rows| Matrix::from_rows(rows))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(topology, weights)
    }

    pub fn zeros(topology: Topology) -> Self {
        let weights = (0..topology.depth())
            .map(|l| {
                let (r, c) = topology.weight_shape(l);
                Matrix::zeros(r, c)
            })
            .collect();
        Self { topology, weights }
    }

    /// Every weight drawn uniformly from `[-range, range]`.
    pub fn random<R: Rng + ?Sized>(topology: Topology, range: f64, rng: &mut R) -> Self {
        let mut net = Self::zeros(topology);
        for w in &mut net.weights {
            for r in 0..w.rows() {
                for c in 0..w.cols() {
                    w[(r, c)] = if range > 0.0 { rng.gen_range(-range..=range) } else { 0.0 };
                }
            }
        }
        net
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn weights(&self) -> &[Matrix] {
        &self.weights
    }

    pub fn weight_count(&self) -> usize {
        count_weights(self.topology.sizes())
    }

    pub fn get(&self, layer: usize, row: usize, col: usize) -> Option<f64> {
        let w = self.weights.get(layer)?;
        (row < w.rows() && col < w.cols()).then(|| w[(row, col)])
    }

    /// Returns a copy with one weight replaced.
    pub fn with_weight(&self, layer: usize, row: usize, col: usize, value: f64) -> Result<Network> {
        let mut net = self.clone();
        net.weights[layer].set(row, col, value)?;
        Ok(net)
    }

    /// Subtracts `rate * grads[l]` from every weight matrix.
    pub(crate) fn step(&mut self, grads: &[Matrix], rate: f64) {
        for (w, g) in self.weights.iter_mut().zip(grads) {
            for r in 0..w.rows() {
                for c in 0..w.cols() {
                    w[(r, c)] -= rate * g[(r, c)];
                }
            }
        }
    }

    pub(crate) fn all_finite(&self) -> bool {
        self.weights.iter().all(|w| w.as_slice().iter().all(|v| v.is_finite()))
    }

    pub fn forward(&self, input: &[f64]) -> Result<Forward> {
        if input.len() != self.topology.inputs() {
            return Err(NetworkError::InputLength {
                expected: self.topology.inputs(),
                actual: input.len(),
            });
        }
        let mut pre = Vec::with_capacity(self.weights.len());
        let mut post: Vec<Vec<f64>> = Vec::with_capacity(self.weights.len());
        for (l, (w, act)) in self.weights.iter().zip(self.topology.activations()).enumerate() {
            let prev = if l == 0 { input } else { &post[l - 1] };
            let bias = w.cols() - 1;
            // Bias first, then the inputs in order.
            let z: Vec<f64> = (0..w.rows())
                .map(|r| {
                    prev.iter()
                        .enumerate()
                        .fold(w[(r, bias)], |acc, (c, &x)| acc + w[(r, c)] * x)
                })
                .collect();
            let a = z.iter().map(|&t| act.apply(t)).collect();
            pre.push(z);
            post.push(a);
        }
        Ok(Forward {
            input: input.to_vec(),
            pre,
            post,
        })
    }

    /// Scalar output for single-output networks.
    pub fn output(&self, input: &[f64]) -> Result<f64> {
        if self.topology.outputs() != 1 {
            return Err(NetworkError::NotScalar(self.topology.outputs()));
        }
        Ok(self.forward(input)?.output()[0])
    }

    /// Partial derivatives of `sum_k (out_k - target_k)^2` with respect to
    /// every weight, shaped like [`Network::weights`].
    pub fn gradient(&self, input: &[f64], target: &[f64]) -> Result<Vec<Matrix>> {
        let fwd = self.forward(input)?;
        self.gradient_from(&fwd, target)
    }

    /// Reverse accumulation through the intermediates of a stored forward pass.
    pub fn gradient_from(&self, fwd: &Forward, target: &[f64]) -> Result<Vec<Matrix>> {
        let out = fwd.output();
        if target.len() != out.len() {
            return Err(NetworkError::TargetLength {
                expected: out.len(),
                actual: target.len(),
            });
        }
        let acts = self.topology.activations();
        let last = self.weights.len() - 1;
        let mut delta: Vec<f64> = out
            .iter()
            .zip(target)
            .zip(&fwd.pre[last])
            .map(|((o, t), &z)| 2.0 * (o - t) * acts[last].derivative(z))
            .collect();
        let mut grads: Vec<Matrix> = self.weights.iter().map(|w| Matrix::zeros(w.rows(), w.cols())).collect();
        for l in (0..=last).rev() {
            let prev = fwd.layer_input(l);
            let w = &self.weights[l];
            let g = &mut grads[l];
            for (r, &d) in delta.iter().enumerate() {
                for (c, &x) in prev.iter().enumerate() {
                    g[(r, c)] = d * x;
                }
                g[(r, prev.len())] = d;
            }
            if l > 0 {
                delta = (0..prev.len())
                    .map(|c| {
                        let back: f64 = delta.iter().enumerate().map(|(r, &d)| w[(r, c)] * d).sum();
                        back * acts[l - 1].derivative(fwd.pre[l - 1][c])
                    })
                    .collect();
            }
        }
        Ok(grads)
    }

    /// Folds an all-identity network into one layer using
    /// `A = A2 * A1`, `b = A2 * b1 + b2`, applied layer by layer.
    pub fn collapse_linear(&self) -> Result<Network> {
        for (l, &a) in self.topology.activations().iter().enumerate() {
            if a != Activation::Id {
                return Err(NetworkError::NotLinear { layer: l, activation: a });
            }
        }
        let (mut a, mut b) = split_bias(&self.weights[0]);
        for w in &self.weights[1..] {
            let (al, bl) = split_bias(w);
            b = linalg::mat_add(&linalg::mat_mul(&al, &b)?, &bl)?;
            a = linalg::mat_mul(&al, &a)?;
        }
        let mut merged = Matrix::zeros(a.rows(), a.cols() + 1);
        for r in 0..a.rows() {
            for c in 0..a.cols() {
                merged[(r, c)] = a[(r, c)];
            }
            merged[(r, a.cols())] = b[(r, 0)];
        }
        let topology = Topology::new(
            vec![self.topology.inputs(), self.topology.outputs()],
            vec![Activation::Id],
        )?;
        Network::new(topology, vec![merged])
    }

    /// Serialises to the model text format.
    pub fn to_model_string(&self, seed: Option<u64>) -> String {
        let mut out = String::from("# xorlab model v1\n");
        out.push_str(&format!("spec {}\n", self.topology));
        if let Some(seed) = seed {
            out.push_str(&format!("seed {seed}\n"));
        }
        for (l, w) in self.weights.iter().enumerate() {
            out.push_str(&format!("layer {} {}x{}\n", l + 1, w.rows(), w.cols()));
            for r in 0..w.rows() {
                let row: Vec<String> = w.row(r).iter().map(|&v| g17(v)).collect();
                out.push_str(&row.join(" "));
                out.push('\n');
            }
        }
        out
    }

    pub fn save(&self, path: &Path, seed: Option<u64>) -> Result<()> {
        fs::write(path, self.to_model_string(seed))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Model> {
        Model::parse(&fs::read_to_string(path)?)
    }
}

/// A network read from a model file, with its optional seed.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub network: Network,
    pub seed: Option<u64>,
}

impl Model {
    pub fn parse(text: &str) -> Result<Model> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .peekable();
        let bad = |line: usize, reason: String| NetworkError::ModelFormat { line, reason };

        let (n, first) = lines.next().ok_or_else(|| bad(0, "empty model file".into()))?;
        let spec = first
            .strip_prefix("spec ")
            .ok_or_else(|| bad(n, "expected `spec <topology>`".into()))?;
        let topology = parse_spec(spec.trim())?;

        let mut seed = None;
        if let Some(&(n, line)) = lines.peek() {
            if let Some(s) = line.strip_prefix("seed ") {
                seed = Some(s.trim().parse().map_err(|_| bad(n, format!("bad seed `{s}`")))?);
                lines.next();
            }
        }

        let mut weights = Vec::new();
        for l in 0..topology.depth() {
            let (n, header) = lines
                .next()
                .ok_or_else(|| bad(0, format!("missing layer {}", l + 1)))?;
            let shape = header
                .strip_prefix(&format!("layer {} ", l + 1))
                .ok_or_else(|| bad(n, format!("expected `layer {} RxC`", l + 1)))?;
            let (rows, cols) = shape
                .split_once('x')
                .and_then(|(r, c)| Some((r.trim().parse::<usize>().ok()?, c.trim().parse::<usize>().ok()?)))
                .ok_or_else(|| bad(n, format!("bad shape `{shape}`")))?;
            let mut data = Vec::with_capacity(rows * cols);
            for _ in 0..rows {
                let (n, row) = lines.next().ok_or_else(|| bad(0, "truncated weight rows".into()))?;
                let values = row
                    .split_whitespace()
                    .map(|v| v.parse::<f64>().map_err(|_| bad(n, format!("bad number `{v}`"))))
                    .collect::<Result<Vec<_>>>()?;
                if values.len() != cols {
                    return Err(bad(n, format!("expected {cols} values, found {}", values.len())));
                }
                data.extend(values);
            }
            weights.push(Matrix::new(rows, cols, data)?);
        }
        if let Some((n, extra)) = lines.next() {
            return Err(bad(n, format!("unexpected trailing content `{extra}`")));
        }
        Ok(Model {
            network: Network::new(topology, weights)?,
            seed,
        })
    }
}

fn split_bias(w: &Matrix) -> (Matrix, Matrix) {
    let n = w.cols() - 1;
    let mut a = Matrix::zeros(w.rows(), n);
    let mut b = Matrix::zeros(w.rows(), 1);
    for r in 0..w.rows() {
        for c in 0..n {
            a[(r, c)] = w[(r, c)];
        }
        b[(r, 0)] = w[(r, n)];
    }
    (a, b)
}

/// Reference networks taken from worked examples.
pub mod reference {
    use super::Network;

    /// The random-weight 2-2-1 network used as a base point throughout;
    /// `out(0, 1) = 0.18` with identity activations.
    pub fn random_base(spec: &str) -> Network {
        Network::from_layers(
            spec,
            &[&[&[0.1, -0.1, 0.2], &[-0.2, 0.3, 0.1]], &[&[-0.4, -0.2, 0.3]]],
        )
        .expect("2-2-1 spec")
    }

    /// Exact RELU representation of `F_0 = |x1 - x2|`.
    pub fn relu_f0() -> Network {
        Network::from_layers(
            "2-2-1/inp-relu-relu",
            &[&[&[1.0, -1.0, 0.0], &[-1.0, 1.0, 0.0]], &[&[1.0, 1.0, 0.0]]],
        )
        .expect("valid weights")
    }

    /// Exact RELU representation of `F_inf = min(x1 + x2, 1) - max(x1 + x2 - 1, 0)`.
    pub fn relu_finf() -> Network {
        Network::from_layers(
            "2-2-1/inp-relu-relu",
            &[&[&[1.0, 1.0, 0.0], &[1.0, 1.0, -1.0]], &[&[1.0, -2.0, 0.0]]],
        )
        .expect("valid weights")
    }

    /// First trained tanh-tanh network of the worked backpropagation example.
    pub fn tanh_trained() -> Network {
        Network::from_layers(
            "2-2-1/inp-tanh-tanh",
            &[
                &[&[2.320, 2.331, -0.850], &[1.743, 1.747, -2.653]],
                &[&[2.68, -2.704, -0.826]],
            ],
        )
        .expect("valid weights")
    }
}

#[cfg(test)]
mod tests {
    use super::reference::*;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn spec_parsing() {
        let t = parse_spec("2-2-1/inp-tanh-tanh").unwrap();
        assert_eq!(t.sizes(), [2, 2, 1]);
        assert_eq!(t.activations(), [Activation::Tanh, Activation::Tanh]);
        let t = parse_spec("2-1/inp-id").unwrap();
        assert_eq!((t.sizes(), t.activations()), (&[2, 1][..], &[Activation::Id][..]));
        assert_eq!(parse_spec("2-4-4-1/inp-tanh-tanh-tanh").unwrap().sizes(), [2, 4, 4, 1]);
        let t = parse_spec("2-2-1/INP-RELU-Relu").unwrap();
        assert_eq!(t.to_string(), "2-2-1/inp-relu-relu");
        assert_eq!(parse_spec(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn spec_errors() {
        assert!(matches!(parse_spec("2-2-1"), Err(NetworkError::Syntax { .. })));
        assert!(matches!(parse_spec("2-x-1/inp-id-id"), Err(NetworkError::Syntax { .. })));
        assert!(matches!(parse_spec("2-2-1/inp-foo-id"), Err(NetworkError::Syntax { .. })));
        assert!(matches!(parse_spec("2-2-1/tanh-tanh"), Err(NetworkError::Syntax { .. })));
        assert!(matches!(parse_spec("2/inp"), Err(NetworkError::Syntax { .. })));
        assert!(matches!(parse_spec("2-0-1/inp-id-id"), Err(NetworkError::Syntax { .. })));
        assert!(matches!(
            parse_spec("2-2-1/inp-tanh"),
            Err(NetworkError::Arity { needed: 2, activations: 1, .. })
        ));
    }

    #[test]
    fn activation_sanity() {
        assert_eq!(Activation::Tanh.apply(0.0), 0.0);
        assert_eq!(Activation::Sigmoid.apply(0.0), 0.5);
        for x in [0.1, 1.0, 7.5] {
            assert_eq!(Activation::Relu.apply(-x), 0.0);
            assert_eq!(Activation::Relu.apply(x), x);
            assert_eq!(Activation::Id.apply(-x), -x);
        }
        assert_eq!(Activation::Relu.derivative(0.0), 0.0);
        assert_eq!(Activation::Sigmoid.derivative(0.0), 0.25);
    }

    #[test]
    fn forward_linear_base() {
        let net = random_base("2-2-1/inp-id-id");
        let fwd = net.forward(&[0.0, 1.0]).unwrap();
        assert_eq!(fwd.post[0], vec![0.1, 0.4]);
        assert_eq!(fwd.output(), [0.18]);
    }

    #[test]
    fn forward_tanh_example() {
        let fwd = tanh_trained().forward(&[0.75, 0.5]).unwrap();
        assert!((fwd.output()[0] - 0.994616).abs() < 1e-3);
        assert!((fwd.post[0][0] - 0.967746).abs() < 1e-3);
        assert!((fwd.post[0][1] + 0.44002).abs() < 1e-3);
    }

    #[test]
    fn forward_relu_exact_nets() {
        assert_eq!(relu_f0().output(&[0.75, 0.5]).unwrap(), 0.25);
        assert_eq!(relu_finf().output(&[0.75, 0.5]).unwrap(), 0.75);
    }

    #[test]
    fn forward_shape_errors() {
        let net = relu_f0();
        assert!(matches!(net.forward(&[0.1]), Err(NetworkError::InputLength { expected: 2, actual: 1 })));
        assert!(matches!(net.gradient(&[0.1, 0.2], &[]), Err(NetworkError::TargetLength { .. })));
        let bad = Network::new(parse_spec("2-1/inp-id").unwrap(), vec![Matrix::zeros(1, 2)]);
        assert!(matches!(bad, Err(NetworkError::WeightShape { .. })));
        let bad = Network::new(parse_spec("2-1/inp-id").unwrap(), vec![]);
        assert!(matches!(bad, Err(NetworkError::LayerCount { .. })));
    }

    #[test]
    fn gradient_zero_residual_and_linear_bias() {
        let net = relu_f0();
        let out = net.output(&[0.3, 0.9]).unwrap();
        for g in net.gradient(&[0.3, 0.9], &[out]).unwrap() {
            assert!(g.as_slice().iter().all(|&v| v == 0.0));
        }
        let (w1, w2, w3, x1, x2, t) = (0.7, -1.3, 0.2, 0.4, 0.9, 0.5);
        let net = Network::from_layers("2-1/inp-id", &[&[&[w1, w2, w3]]]).unwrap();
        let g = net.gradient(&[x1, x2], &[t]).unwrap();
        let residual = w1 * x1 + w2 * x2 + w3 - t;
        assert!((g[0][(0, 2)] - 2.0 * residual).abs() < 1e-15);
        assert!((g[0][(0, 0)] - 2.0 * residual * x1).abs() < 1e-15);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let net = Network::random(parse_spec("2-2-1/inp-tanh-tanh").unwrap(), 1.5, &mut rng);
            let x = [rng.gen::<f64>(), rng.gen::<f64>()];
            let t = rng.gen::<f64>();
            let g = net.gradient(&x, &[t]).unwrap();
            for (l, w) in net.weights().iter().enumerate() {
                for r in 0..w.rows() {
                    for c in 0..w.cols() {
                        let h = 1e-5;
                        let loss = |v: f64| {
                            let o = net.with_weight(l, r, c, v).unwrap().output(&x).unwrap();
                            (o - t) * (o - t)
                        };
                        let fd = (loss(w[(r, c)] + h) - loss(w[(r, c)] - h)) / (2.0 * h);
                        let an = g[l][(r, c)];
                        assert!((an - fd).abs() <= 1e-6f64.max(1e-4 * an.abs()), "{an} vs {fd}");
                    }
                }
            }
        }
    }

    #[test]
    fn collapse_of_base_net() {
        let net = random_base("2-2-1/inp-id-id");
        let c = net.collapse_linear().unwrap();
        assert_eq!(c.topology().to_string(), "2-1/inp-id");
        let w = &c.weights()[0];
        assert!(w[(0, 0)].abs() < 1e-15);
        assert!((w[(0, 1)] + 0.02).abs() < 1e-15);
        assert!((w[(0, 2)] - 0.2).abs() < 1e-15);
        assert!((c.output(&[0.0, 1.0]).unwrap() - 0.18).abs() < 1e-15);
        assert!(matches!(
            random_base("2-2-1/inp-tanh-id").collapse_linear(),
            Err(NetworkError::NotLinear { layer: 0, .. })
        ));
    }

    #[test]
    fn collapse_identity_layers() {
        let net = Network::from_layers(
            "2-2-2/inp-id-id",
            &[&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]], &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]],
        )
        .unwrap();
        let c = net.collapse_linear().unwrap();
        assert_eq!(c.weights()[0], Matrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]).unwrap());
    }

    #[test]
    fn collapse_deep_random_nets() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let net = Network::random(parse_spec("2-3-2-1/inp-id-id-id").unwrap(), 1.0, &mut rng);
        let c = net.collapse_linear().unwrap();
        for _ in 0..100 {
            let x = [rng.gen::<f64>(), rng.gen::<f64>()];
            assert!((net.output(&x).unwrap() - c.output(&x).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn weight_counts() {
        let count = |s: &str| count_weights(&parse_layer_sizes(s).unwrap());
        assert_eq!(count("2-9-1"), 37);
        assert_eq!(count("2-4-4-1"), 37);
        assert_eq!(count("2-2-1"), 9);
        assert_eq!(count("2-1"), 3);
        for n in 1..=10 {
            assert_eq!(count_weights(&[2, n, 1]), 4 * n + 1);
            for q in 1..=10 {
                assert_eq!(count_weights(&[2, n, q, 1]), n * q + 3 * n + 2 * q + 1);
            }
        }
        assert_eq!(random_base("2-2-1/inp-id-id").weight_count(), 9);
    }

    #[test]
    fn linear_net_is_the_regression_family() {
        let net = Network::from_layers("2-1/inp-id", &[&[&[0.5, 0.25, -0.125]]]).unwrap();
        for (x1, x2) in [(0.0, 0.0), (1.0, 0.5), (0.25, 0.75)] {
            assert_eq!(net.output(&[x1, x2]).unwrap(), -0.125 + 0.5 * x1 + 0.25 * x2);
        }
    }

    #[test]
    fn model_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = Network::random(parse_spec("2-3-1/inp-relu-sigmoid").unwrap(), 2.0, &mut rng);
        let text = net.to_model_string(Some(99));
        let model = Model::parse(&text).unwrap();
        assert_eq!(model.network, net);
        assert_eq!(model.seed, Some(99));
        let model = Model::parse(&relu_f0().to_model_string(None)).unwrap();
        assert_eq!(model.seed, None);
    }

    #[test]
    fn model_format_errors() {
        let err = Model::parse("spec 2-1/inp-id\nlayer 1 1x3\n1 2\n").unwrap_err();
        assert!(matches!(err, NetworkError::ModelFormat { line: 3, .. }));
        let err = Model::parse("spec 2-1/inp-id\nlayer 1 1x3\n1 2 x\n").unwrap_err();
        assert!(matches!(err, NetworkError::ModelFormat { line: 3, .. }));
        let err = Model::parse("layer 1 1x3\n").unwrap_err();
        assert!(matches!(err, NetworkError::ModelFormat { line: 1, .. }));
        let err = Model::parse("spec 2-1/inp-id\nlayer 1 1x2\n1 2\n").unwrap_err();
        assert!(matches!(err, NetworkError::WeightShape { .. }));
    }
}
