//! Gradient-descent training, restart sweeps and classification of trained
//! networks against the xor limit functions.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::copula::{xor_raw, CopulaParam};
use crate::datasets::{Dataset, DatasetError};
use crate::linalg::Matrix;
use crate::network::{Network, NetworkError, Topology};

/// SSE above which a run is declared divergent.
pub const DIVERGENCE_SSE: f64 = 1e6;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid training config: {0}")]
    Config(String),
    #[error("dataset has {data} inputs and {data_targets} targets; network expects {net} inputs and {net_outputs} outputs")]
    Shape {
        data: usize,
        data_targets: usize,
        net: usize,
        net_outputs: usize,
    },
    #[error("training diverged at iteration {iteration} (SSE {sse})")]
    Divergence { iteration: usize, sse: f64 },
    #[error("classification needs a 2-input, 1-output network, got {inputs} inputs and {outputs} outputs")]
    ClassifyShape { inputs: usize, outputs: usize },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

pub type Result<T> = std::result::Result<T, TrainError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainMode {
    PerSample,
    FullBatch,
}

impl fmt::Display for TrainMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrainMode::PerSample => "per-sample",
            TrainMode::FullBatch => "full-batch",
        })
    }
}

impl FromStr for TrainMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "per-sample" | "per_sample" => Ok(TrainMode::PerSample),
            "full-batch" | "full_batch" => Ok(TrainMode::FullBatch),
            _ => Err(format!("unknown mode `{s}` (expected per-sample or full-batch)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_iters: usize,
    pub tol: f64,
    pub mode: TrainMode,
    pub seed: u64,
    pub init_range: f64,
    /// Record the SSE after every iteration.
    pub record_trajectory: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            max_iters: 10_000,
            tol: 0.001,
            mode: TrainMode::PerSample,
            seed: 0,
            init_range: 1.0,
            record_trajectory: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(TrainError::Config(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        if !(self.tol > 0.0) {
            return Err(TrainError::Config(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(TrainError::Config("max_iters must be at least 1".into()));
        }
        if !(self.init_range >= 0.0 && self.init_range.is_finite()) {
            return Err(TrainError::Config(format!("init range must be non-negative, got {}", self.init_range)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainResult {
    pub final_net: Network,
    pub iterations: usize,
    pub final_sse: f64,
    pub converged: bool,
    pub trajectory: Option<Vec<f64>>,
}

type Pairs = Vec<(Vec<f64>, Vec<f64>)>;

fn pairs_for(topology: &Topology, data: &Dataset) -> Result<Pairs> {
    if data.arity() != topology.inputs() || data.target_names().len() != topology.outputs() {
        return Err(TrainError::Shape {
            data: data.arity(),
            data_targets: data.target_names().len(),
            net: topology.inputs(),
            net_outputs: topology.outputs(),
        });
    }
    Ok(data
        .samples()
        .iter()
        .map(|s| (s.input_values(), s.target_values()))
        .collect())
}

fn pairs_sse(net: &Network, pairs: &Pairs) -> Result<f64> {
    let mut total = 0.0;
    for (x, t) in pairs {
        let fwd = net.forward(x)?;
        total += fwd.output().iter().zip(t).map(|(o, t)| (o - t) * (o - t)).sum::<f64>();
    }
    Ok(total)
}

/// SSE of a network over a dataset.
pub fn network_sse(net: &Network, data: &Dataset) -> Result<f64> {
    pairs_sse(net, &pairs_for(net.topology(), data)?)
}

/// SSE of an arbitrary predictor over a single-target dataset.
pub fn sse<F: Fn(&[f64]) -> f64>(predict: F, data: &Dataset) -> Result<f64> {
    Ok(crate::datasets::sse(predict, data)?)
}

/// Trains a freshly initialised network. Deterministic in `cfg.seed`.
pub fn train(topology: &Topology, data: &Dataset, cfg: &TrainConfig) -> Result<TrainResult> {
    cfg.validate()?;
    let pairs = pairs_for(topology, data)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let net = Network::random(topology.clone(), cfg.init_range, &mut rng);
    descend(net, &pairs, cfg, &mut rng)
}

/// Continues training from a given network.
pub fn train_from(net: Network, data: &Dataset, cfg: &TrainConfig) -> Result<TrainResult> {
    cfg.validate()?;
    let pairs = pairs_for(net.topology(), data)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    descend(net, &pairs, cfg, &mut rng)
}

fn descend(mut net: Network, pairs: &Pairs, cfg: &TrainConfig, rng: &mut ChaCha8Rng) -> Result<TrainResult> {
    let mut trajectory = cfg.record_trajectory.then(Vec::new);
    let mut sse = pairs_sse(&net, pairs)?;
    let mut iterations = 0;
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    while sse >= cfg.tol && iterations < cfg.max_iters {
        iterations += 1;
        match cfg.mode {
            TrainMode::PerSample => {
                order.shuffle(rng);
                for &i in &order {
                    let (x, t) = &pairs[i];
                    let g = net.gradient(x, t)?;
                    net.step(&g, cfg.learning_rate);
                }
            }
            TrainMode::FullBatch => {
                let mut total: Vec<Matrix> = net.weights().iter().map(|w| Matrix::zeros(w.rows(), w.cols())).collect();
                for (x, t) in pairs {
                    for (acc, g) in total.iter_mut().zip(net.gradient(x, t)?) {
                        for r in 0..g.rows() {
                            for c in 0..g.cols() {
                                acc[(r, c)] += g[(r, c)];
                            }
                        }
                    }
                }
                net.step(&total, cfg.learning_rate);
            }
        }
        if !net.all_finite() {
            return Err(TrainError::Divergence {
                iteration: iterations,
                sse: f64::NAN,
            });
        }
        sse = pairs_sse(&net, pairs)?;
        if !sse.is_finite() || sse > DIVERGENCE_SSE {
            return Err(TrainError::Divergence { iteration: iterations, sse });
        }
        if let Some(t) = trajectory.as_mut() {
            t.push(sse);
        }
    }
    Ok(TrainResult {
        final_net: net,
        iterations,
        final_sse: sse,
        converged: sse < cfg.tol,
        trajectory,
    })
}

/// Reference shapes a trained network is compared against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Label {
    F0,
    F1,
    Finf,
    Fs(f64),
    StepAbs,
    ConstHalf,
    Unclassified,
}

impl Label {
    /// Histogram key; every `Fs(s)` shares the key `Fs`.
    pub fn kind(&self) -> &'static str {
        match self {
            Label::F0 => "F0",
            Label::F1 => "F1",
            Label::Finf => "Finf",
            Label::Fs(_) => "Fs",
            Label::StepAbs => "StepAbs",
            Label::ConstHalf => "ConstHalf",
            Label::Unclassified => "Unclassified",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Fs(s) => write!(f, "Fs({s:.6})"),
            other => f.write_str(other.kind()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionLabel {
    pub label: Label,
    pub max_deviation: f64,
}

impl fmt::Display for FunctionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (max deviation {:.3e})", self.label, self.max_deviation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    pub tol: f64,
    pub grid: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self { tol: 0.05, grid: 21 }
    }
}

fn lattice(grid: usize) -> Vec<(f64, f64)> {
    crate::datasets::grid_inputs(grid.max(2))
}

fn max_dev<F: Fn(f64, f64) -> f64>(values: &[((f64, f64), f64)], reference: F) -> f64 {
    values
        .iter()
        .map(|&((x, y), v)| (v - reference(x, y)).abs())
        .fold(0.0, f64::max)
}

/// Whether `(x, y)` lies within one lattice step of a zero corner of StepAbs.
fn near_zero_corner(x: f64, y: f64, step: f64) -> bool {
    let cheb = |cx: f64, cy: f64| (x - cx).abs().max((y - cy).abs());
    cheb(0.0, 0.0) <= step + 1e-12 || cheb(1.0, 1.0) <= step + 1e-12
}

/// Classifies an arbitrary function of two variables on a `grid x grid` lattice.
pub fn classify_fn<F: Fn(f64, f64) -> f64>(f: F, opts: ClassifyOptions) -> FunctionLabel {
    let grid = opts.grid.max(2);
    let step = 1.0 / (grid - 1) as f64;
    let values: Vec<((f64, f64), f64)> = lattice(grid).into_iter().map(|(x, y)| ((x, y), f(x, y))).collect();
    let interior: Vec<((f64, f64), f64)> = values
        .iter()
        .copied()
        .filter(|&((x, y), _)| !near_zero_corner(x, y, step))
        .collect();

    let candidates = [
        (Label::F0, max_dev(&values, |x, y| xor_raw(CopulaParam::Zero, x, y))),
        (Label::F1, max_dev(&values, |x, y| xor_raw(CopulaParam::One, x, y))),
        (Label::Finf, max_dev(&values, |x, y| xor_raw(CopulaParam::Infinity, x, y))),
        (Label::ConstHalf, max_dev(&values, |_, _| 0.5)),
        (Label::StepAbs, max_dev(&interior, |_, _| 1.0)),
    ];
    let (best, dev) = candidates
        .iter()
        .copied()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty candidates");
    if dev <= opts.tol {
        return FunctionLabel {
            label: best,
            max_deviation: dev,
        };
    }

    let (s, fs_dev) = fit_s(&values);
    if fs_dev <= opts.tol {
        return FunctionLabel {
            label: Label::Fs(s),
            max_deviation: fs_dev,
        };
    }
    FunctionLabel {
        label: Label::Unclassified,
        max_deviation: dev.min(fs_dev),
    }
}

/// Minimises the max deviation from `F_s` over `log10 s` in [-8, 8]:
/// a coarse scan followed by golden-section refinement of the best bracket.
fn fit_s(values: &[((f64, f64), f64)]) -> (f64, f64) {
    let dev_at = |lg: f64| {
        let p = CopulaParam::new(10f64.powf(lg)).expect("finite positive s");
        max_dev(values, |x, y| xor_raw(p, x, y))
    };
    let (lo, hi, n) = (-8.0, 8.0, 160);
    let h = (hi - lo) / n as f64;
    let (best_i, _) = (0..=n)
        .map(|i| (i, dev_at(lo + i as f64 * h)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty scan");
    let mut a = lo + (best_i as f64 - 1.0).max(0.0) * h;
    let mut b = lo + (best_i as f64 + 1.0).min(n as f64) * h;
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (dev_at(c), dev_at(d));
    for _ in 0..60 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = dev_at(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = dev_at(d);
        }
    }
    let lg = (a + b) / 2.0;
    (10f64.powf(lg), dev_at(lg))
}

/// Classifies a 2-input, 1-output network.
pub fn classify(net: &Network, opts: ClassifyOptions) -> Result<FunctionLabel> {
    let t = net.topology();
    if t.inputs() != 2 || t.outputs() != 1 {
        return Err(TrainError::ClassifyShape {
            inputs: t.inputs(),
            outputs: t.outputs(),
        });
    }
    Ok(classify_fn(
        |x, y| net.output(&[x, y]).expect("2-input scalar network"),
        opts,
    ))
}

/// Whether `F_0 - tol <= out <= F_inf + tol` holds on the lattice.
pub fn within_envelope(net: &Network, tol: f64, grid: usize) -> Result<bool> {
    for (x, y) in lattice(grid) {
        let out = net.output(&[x, y])?;
        let lo = xor_raw(CopulaParam::Zero, x, y);
        let hi = xor_raw(CopulaParam::Infinity, x, y);
        if out < lo - tol || out > hi + tol {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug)]
pub struct SweepRun {
    pub seed: u64,
    pub outcome: Result<TrainResult>,
    /// Present for every run that finished without error.
    pub label: Option<FunctionLabel>,
    /// Present for every run that finished without error.
    pub within_envelope: Option<bool>,
}

#[derive(Debug)]
pub struct SweepReport {
    pub runs: Vec<SweepRun>,
}

impl SweepReport {
    pub fn converged(&self) -> impl Iterator<Item = (&TrainResult, &FunctionLabel)> {
        self.runs.iter().filter_map(|r| match (&r.outcome, &r.label) {
            (Ok(res), Some(label)) if res.converged => Some((res, label)),
            _ => None,
        })
    }

    pub fn converged_count(&self) -> usize {
        self.converged().count()
    }

    pub fn diverged_count(&self) -> usize {
        self.runs.iter().filter(|r| r.outcome.is_err()).count()
    }

    /// Label counts among converged runs.
    pub fn histogram(&self) -> BTreeMap<&'static str, usize> {
        let mut h = BTreeMap::new();
        for (_, label) in self.converged() {
            *h.entry(label.label.kind()).or_insert(0) += 1;
        }
        h
    }
}

/// Trains with seeds `cfg.seed, cfg.seed + 1, ...` in parallel; results are
/// ordered by seed.
pub fn sweep(
    topology: &Topology,
    data: &Dataset,
    cfg: &TrainConfig,
    restarts: usize,
    opts: ClassifyOptions,
) -> Result<SweepReport> {
    if restarts == 0 {
        return Err(TrainError::Config("restarts must be at least 1".into()));
    }
    cfg.validate()?;
    pairs_for(topology, data)?;
    let classifiable = topology.inputs() == 2 && topology.outputs() == 1;
    let runs = (0..restarts as u64)
        .into_par_iter()
        .map(|i| {
            let seed = cfg.seed.wrapping_add(i);
            let run_cfg = TrainConfig { seed, ..cfg.clone() };
            let outcome = train(topology, data, &run_cfg);
            let (label, within) = match &outcome {
                Ok(res) if classifiable => (
                    classify(&res.final_net, opts).ok(),
                    within_envelope(&res.final_net, opts.tol, opts.grid).ok(),
                ),
                _ => (None, None),
            };
            SweepRun {
                seed,
                outcome,
                label,
                within_envelope: within,
            }
        })
        .collect();
    Ok(SweepReport { runs })
}

/// Echo of a training run for the run-metadata document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMetadata {
    pub spec: String,
    pub dataset: String,
    pub config: TrainConfig,
    pub iterations: usize,
    pub final_sse: f64,
    pub converged: bool,
    pub label: Option<String>,
    pub max_deviation: Option<f64>,
}

impl RunMetadata {
    pub fn new(data: &Dataset, cfg: &TrainConfig, result: &TrainResult, label: Option<&FunctionLabel>) -> Self {
        Self {
            spec: result.final_net.topology().to_string(),
            dataset: data.name().to_string(),
            config: cfg.clone(),
            iterations: result.iterations,
            final_sse: result.final_sse,
            converged: result.converged,
            label: label.map(|l| l.label.to_string()),
            max_deviation: label.map(|l| l.max_deviation),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::builtin;
    use crate::linalg::Matrix;
    use crate::network::{parse_spec, reference};

    fn xor() -> Dataset {
        builtin("boolean_xor").unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        let bad = [
            TrainConfig { learning_rate: 0.0, ..Default::default() },
            TrainConfig { tol: 0.0, ..Default::default() },
            TrainConfig { max_iters: 0, ..Default::default() },
        ];
        for cfg in bad {
            assert!(matches!(cfg.validate(), Err(TrainError::Config(_))));
        }
    }

    #[test]
    fn sse_examples() {
        let net = reference::relu_f0();
        assert_eq!(network_sse(&net, &xor()).unwrap(), 0.0);
        assert_eq!(sse(|_| 0.5, &xor()).unwrap(), 1.0);
    }

    #[test]
    fn shape_mismatch() {
        let t = parse_spec("3-1/inp-id").unwrap();
        assert!(matches!(train(&t, &xor(), &TrainConfig::default()), Err(TrainError::Shape { .. })));
        let multi = builtin("outsample_fig7_2").unwrap();
        let t = parse_spec("2-1/inp-id").unwrap();
        assert!(matches!(train(&t, &multi, &TrainConfig::default()), Err(TrainError::Shape { .. })));
    }

    #[test]
    fn deterministic_in_seed() {
        let t = parse_spec("2-2-1/inp-tanh-tanh").unwrap();
        let cfg = TrainConfig { max_iters: 200, seed: 7, record_trajectory: true, ..Default::default() };
        let a = train(&t, &xor(), &cfg).unwrap();
        let b = train(&t, &xor(), &cfg).unwrap();
        assert_eq!(a, b);
        let c = train(&t, &xor(), &TrainConfig { seed: 8, ..cfg }).unwrap();
        assert_ne!(a.final_net, c.final_net);
        assert_eq!(a.trajectory.unwrap().len(), a.iterations);
    }

    #[test]
    fn converged_iff_below_tol() {
        let t = parse_spec("2-2-1/inp-tanh-tanh").unwrap();
        for seed in 0..5 {
            let cfg = TrainConfig { learning_rate: 0.5, max_iters: 2000, seed, ..Default::default() };
            if let Ok(r) = train(&t, &xor(), &cfg) {
                assert_eq!(r.converged, r.final_sse < cfg.tol);
            }
        }
    }

    #[test]
    fn tanh_learns_boolean_xor() {
        let t = parse_spec("2-2-1/inp-tanh-tanh").unwrap();
        let found = (0..20).find_map(|seed| {
            let cfg = TrainConfig { seed, ..Default::default() };
            train(&t, &xor(), &cfg).ok().filter(|r| r.converged)
        });
        let r = found.expect("some seed converges");
        assert!(r.final_sse < 0.001);
        for (x, target) in xor().pairs().unwrap() {
            assert!((r.final_net.output(&x).unwrap() - target).abs() < 0.05);
        }
    }

    #[test]
    fn linear_net_cannot_beat_one() {
        let t = parse_spec("2-2-1/inp-id-id").unwrap();
        for seed in 0..3 {
            let cfg = TrainConfig { max_iters: 2000, seed, record_trajectory: true, ..Default::default() };
            let r = train(&t, &xor(), &cfg).unwrap();
            assert!(!r.converged);
            assert!(r.trajectory.unwrap().iter().all(|&s| s >= 1.0 - 1e-6));
        }
    }

    #[test]
    fn linear_net_full_batch_plateaus_at_one() {
        let t = parse_spec("2-2-1/inp-id-id").unwrap();
        let cfg = TrainConfig { mode: TrainMode::FullBatch, seed: 4, ..Default::default() };
        let r = train(&t, &xor(), &cfg).unwrap();
        assert_eq!(r.iterations, cfg.max_iters);
        assert!((r.final_sse - 1.0).abs() < 1e-6, "{}", r.final_sse);
    }

    #[test]
    fn wide_relu_fits_the_combined_set() {
        let t = parse_spec("2-4-1/inp-relu-relu").unwrap();
        let all = builtin("all").unwrap();
        let r = (0..20)
            .find_map(|seed| train(&t, &all, &TrainConfig { seed, ..Default::default() }).ok().filter(|r| r.converged))
            .expect("some seed converges");
        assert!((r.final_net.output(&[0.5, 0.5]).unwrap() - 0.5).abs() < 0.05);
    }

    #[test]
    fn full_batch_linear_is_monotone_and_reaches_least_squares() {
        let t = parse_spec("2-1/inp-id").unwrap();
        let cfg = TrainConfig {
            learning_rate: 1e-3,
            max_iters: 3000,
            mode: TrainMode::FullBatch,
            record_trajectory: true,
            ..Default::default()
        };
        let r = train(&t, &xor(), &cfg).unwrap();
        let traj = r.trajectory.unwrap();
        assert!(traj.windows(2).all(|w| w[1] <= w[0]));

        let cfg = TrainConfig { learning_rate: 0.05, max_iters: 20_000, ..cfg };
        let r = train(&t, &xor(), &cfg).unwrap();
        let w = &r.final_net.weights()[0];
        let d = w.max_abs_diff(&Matrix::from_rows(&[[0.0, 0.0, 0.5]]).unwrap()).unwrap();
        assert!(d < 1e-3, "{w:?}");
        assert!((r.final_sse - 1.0).abs() < 1e-6);
    }

    #[test]
    fn divergence_is_reported() {
        let t = parse_spec("2-2-1/inp-id-id").unwrap();
        let cfg = TrainConfig { learning_rate: 50.0, init_range: 3.0, ..Default::default() };
        match train(&t, &xor(), &cfg) {
            Err(TrainError::Divergence { iteration, .. }) => assert!(iteration >= 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn classify_reference_nets() {
        let opts = ClassifyOptions::default();
        let l = classify(&reference::relu_f0(), opts).unwrap();
        assert_eq!(l.label, Label::F0);
        assert!(l.max_deviation < 1e-9);
        let l = classify(&reference::relu_finf(), opts).unwrap();
        assert_eq!(l.label, Label::Finf);
        assert!(l.max_deviation < 1e-9);
        let half = Network::from_layers("2-1/inp-id", &[&[&[0.0, 0.0, 0.5]]]).unwrap();
        assert_eq!(classify(&half, opts).unwrap().label, Label::ConstHalf);
        let wide = Network::zeros(parse_spec("2-2/inp-id").unwrap());
        assert!(matches!(classify(&wide, opts), Err(TrainError::ClassifyShape { .. })));
    }

    #[test]
    fn classify_copula_surrogates() {
        let opts = ClassifyOptions::default();
        for (p, want) in [
            (CopulaParam::Zero, Label::F0),
            (CopulaParam::One, Label::F1),
            (CopulaParam::Infinity, Label::Finf),
        ] {
            let l = classify_fn(|x, y| xor_raw(p, x, y), opts);
            assert_eq!(l.label, want);
            assert!(l.max_deviation < 1e-12);
        }
        let p = CopulaParam::new(20.0).unwrap();
        let l = classify_fn(|x, y| xor_raw(p, x, y), ClassifyOptions { tol: 0.01, ..opts });
        match l.label {
            Label::Fs(s) => assert!((s.log10() - 20f64.log10()).abs() < 0.05, "{s}"),
            other => panic!("{other:?}"),
        }
        assert!(l.max_deviation <= 0.01);
    }

    #[test]
    fn classify_step_and_unclassified() {
        let opts = ClassifyOptions::default();
        let step = |x: f64, y: f64| if (x == y) && (x == 0.0 || x == 1.0) { 0.0 } else { 1.0 };
        assert_eq!(classify_fn(step, opts).label, Label::StepAbs);
        let l = classify_fn(|x, _| x * 3.0 - 1.0, opts);
        assert_eq!(l.label, Label::Unclassified);
        assert!(l.max_deviation > opts.tol);
    }

    #[test]
    fn envelope() {
        assert!(within_envelope(&reference::relu_f0(), 1e-9, 21).unwrap());
        assert!(within_envelope(&reference::relu_finf(), 1e-9, 21).unwrap());
        let one = Network::from_layers("2-1/inp-id", &[&[&[0.0, 0.0, 1.0]]]).unwrap();
        assert!(!within_envelope(&one, 0.05, 21).unwrap());
    }

    #[test]
    fn sweep_basics() {
        let t = parse_spec("2-2-1/inp-tanh-tanh").unwrap();
        let cfg = TrainConfig { learning_rate: 0.5, max_iters: 300, seed: 100, ..Default::default() };
        let one = sweep(&t, &xor(), &cfg, 1, ClassifyOptions::default()).unwrap();
        assert_eq!(one.runs.len(), 1);
        assert_eq!(one.runs[0].seed, 100);
        let many = sweep(&t, &xor(), &cfg, 4, ClassifyOptions::default()).unwrap();
        let seeds: Vec<u64> = many.runs.iter().map(|r| r.seed).collect();
        assert_eq!(seeds, [100, 101, 102, 103]);
        let solo = train(&t, &xor(), &TrainConfig { seed: 102, ..cfg.clone() }).unwrap();
        assert_eq!(many.runs[2].outcome.as_ref().unwrap(), &solo);
        assert!(matches!(
            sweep(&t, &xor(), &cfg, 0, ClassifyOptions::default()),
            Err(TrainError::Config(_))
        ));
    }
}
