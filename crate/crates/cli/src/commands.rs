use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde_json::json;
use xorlab::copula::{self, CopulaParam, UnitValue};
use xorlab::datasets::{self, Dataset, BUILTIN_NAMES};
use xorlab::network::{count_weights, parse_layer_sizes, parse_spec, Model, Network};
use xorlab::problogic::{self, parse_expr};
use xorlab::surface::{self, landscape_stats};
use xorlab::trainer::{self, ClassifyOptions, Label, RunMetadata, TrainConfig};

use crate::output::{json_num, Cell, Format, Report};
use crate::{
    Cli, Command, CopulaCmd, CopulaFn, DatasetCmd, LogicCmd, NetCmd, SurfaceArgs, SurfaceCmd, SweepArgs, TrainArgs,
    TrainOpts,
};

/// What to print and whether the command succeeded.
pub struct Done {
    pub text: String,
    pub ok: bool,
}

impl Done {
    fn ok(text: String) -> Self {
        Self { text, ok: true }
    }
}

pub fn run(cli: &Cli) -> Result<Done> {
    let f = cli.format;
    match &cli.command {
        Command::Copula(cmd) => copula_cmd(cmd, f).map(Done::ok),
        Command::Logic(cmd) => logic_cmd(cmd, f),
        Command::Regress {
            data,
            product_feature,
            target,
        } => regress(data, *product_feature, target.as_deref(), f).map(Done::ok),
        Command::Net(cmd) => net_cmd(cmd, f).map(Done::ok),
        Command::Train(args) => train(args, f).map(Done::ok),
        Command::Classify { model, tol, grid } => classify(model, *tol, *grid, f).map(Done::ok),
        Command::Sweep(args) => sweep(args, f).map(Done::ok),
        Command::Surface(args) => surface_cmd(args, f).map(Done::ok),
        Command::Dataset(cmd) => dataset_cmd(cmd, f).map(Done::ok),
    }
}

fn unit(name: &str, v: f64) -> Result<UnitValue> {
    UnitValue::new(v).map_err(|_| anyhow!("--{name} must lie in [0, 1], got {v}"))
}

/// A built-in dataset name or a CSV path.
pub fn load_data(name_or_path: &str) -> Result<Dataset> {
    if BUILTIN_NAMES.contains(&name_or_path) {
        return Ok(datasets::builtin(name_or_path)?);
    }
    let path = Path::new(name_or_path);
    if path.exists() {
        return datasets::load_csv(path).with_context(|| format!("reading {}", path.display()));
    }
    bail!(
        "`{name_or_path}` is neither a built-in dataset ({}) nor an existing file",
        BUILTIN_NAMES.join(", ")
    )
}

fn with_target(ds: Dataset, target: Option<&str>) -> Result<Dataset> {
    Ok(match target {
        Some(t) => ds.select_target(t)?,
        None => ds,
    })
}

fn load_model(path: &Path) -> Result<Model> {
    Network::load(path).with_context(|| format!("reading model {}", path.display()))
}

fn meta_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn copula_value(function: CopulaFn, s: CopulaParam, x: UnitValue, y: UnitValue) -> f64 {
    match function {
        CopulaFn::And => copula::frank_and(s, x, y),
        CopulaFn::Or => copula::frank_or(s, x, y),
        CopulaFn::Xor => copula::xor_f(s, x, y),
    }
    .get()
}

fn copula_cmd(cmd: &CopulaCmd, f: Format) -> Result<String> {
    match cmd {
        CopulaCmd::Eval { s, x, y, function } => {
            let v = copula_value(*function, *s, unit("x", *x)?, unit("y", *y)?);
            Ok(Report::scalar("copula eval", "value", v).render(f))
        }
        CopulaCmd::SolveS { x, y, p } => {
            let (x, y) = (unit("x", *x)?, unit("y", *y)?);
            let s = copula::solve_s(x, y, unit("p", *p)?)?;
            let mut r = Report::new("copula solve-s", &["s", "and", "xor"]);
            r.row(vec![
                s.value().into(),
                copula::frank_and(s, x, y).get().into(),
                copula::xor_f(s, x, y).get().into(),
            ]);
            Ok(r.render(f))
        }
        CopulaCmd::Grid { s, function, steps, out } => {
            let mut r = Report::new("copula grid", &["x", "y", "value"]);
            for (x, y) in datasets::grid_inputs(*steps as usize) {
                let v = copula_value(*function, *s, unit("x", x)?, unit("y", y)?);
                r.row(vec![x.into(), y.into(), v.into()]);
            }
            match out {
                Some(path) => {
                    write(path, &r.render(Format::Csv))?;
                    Ok(Report::scalar("copula grid", "written", path.display().to_string()).render(f))
                }
                None => Ok(r.render(f)),
            }
        }
    }
}

fn logic_cmd(cmd: &LogicCmd, f: Format) -> Result<Done> {
    match cmd {
        LogicCmd::Prob { expr, assign, s } => {
            let e = parse_expr(expr)?;
            let mut a = BTreeMap::new();
            for (k, v) in assign {
                a.insert(k.clone(), unit(k, *v)?);
            }
            let p = problogic::copula_prob(&e, &a, *s)?;
            if !p.repeated.is_empty() {
                eprintln!(
                    "warning: {} occur more than once; each occurrence is treated as independent",
                    p.repeated.join(", ")
                );
            }
            let mut r = Report::scalar("logic prob", "value", p.value.get());
            r.extra("repeated_variables", json!(p.repeated));
            Ok(Done::ok(r.render(f)))
        }
        LogicCmd::Table { expr } => {
            let e = parse_expr(expr)?;
            let (vars, rows) = problogic::truth_table(&e)?;
            let mut header = vars.clone();
            header.push("value".into());
            let mut r = Report::new("logic table", &[]);
            r.header(header);
            for (bits, v) in rows {
                let mut cells: Vec<Cell> = bits.iter().map(|&b| Cell::Int(b.into())).collect();
                cells.push(Cell::Int(v.into()));
                r.row(cells);
            }
            Ok(Done::ok(r.render(f)))
        }
        LogicCmd::Freq { data, check } => {
            let ds = load_data(data)?;
            let (names, rows) = ds.columns_and_rows();
            let freq = problogic::empirical_frequencies(&names, &rows)?;
            let mut r = Report::new("logic freq", &["column", "frequency"]);
            for n in &names {
                r.row(vec![n.as_str().into(), freq[n].get().into()]);
            }
            if !*check {
                return Ok(Done::ok(r.render(f)));
            }
            if ds.arity() < 2 {
                bail!("--check needs at least two input columns");
            }
            let n = rows.len() as f64;
            let both = rows.iter().filter(|row| row[0] == 1.0 && row[1] == 1.0).count() as f64 / n;
            let either = rows.iter().filter(|row| row[0] == 1.0 || row[1] == 1.0).count() as f64 / n;
            let (px, py) = (freq[&names[0]].get(), freq[&names[1]].get());
            let verdict = problogic::check_consistency(px, py, both, either);
            let checks: Vec<_> = verdict
                .checks
                .iter()
                .map(|c| json!({"name": c.name, "passed": c.passed, "detail": c.detail}))
                .collect();
            r.extra("and", json!(both));
            r.extra("or", json!(either));
            r.extra("consistent", json!(verdict.consistent()));
            r.extra("checks", json!(checks));
            for c in verdict.failures() {
                eprintln!("inconsistent: {}: {}", c.name, c.detail);
            }
            Ok(Done {
                text: r.render(f),
                ok: verdict.consistent(),
            })
        }
    }
}

fn regress(data: &str, product: bool, target: Option<&str>, f: Format) -> Result<String> {
    let ds = with_target(load_data(data)?, target)?;
    let fit = datasets::regress(&ds, product)?;
    let mut r = Report::new("regress", &["feature", "weight"]);
    for (name, w) in fit.feature_names.iter().zip(&fit.weights) {
        r.row(vec![name.as_str().into(), (*w).into()]);
    }
    r.extra("weights", json!(fit.weights.iter().map(|&w| json_num(w)).collect::<Vec<_>>()));
    r.extra("sse", json_num(fit.sse));
    Ok(r.render(f))
}

fn net_cmd(cmd: &NetCmd, f: Format) -> Result<String> {
    match cmd {
        NetCmd::Forward { model, input } => {
            let net = load_model(model)?.network;
            for (i, &v) in input.iter().enumerate() {
                unit(&format!("input[{i}]"), v)?;
            }
            let fwd = net.forward(input)?;
            let mut r = Report::new("net forward", &["layer", "unit", "pre", "post"]);
            for (l, (pre, post)) in fwd.pre.iter().zip(&fwd.post).enumerate() {
                for (u, (z, a)) in pre.iter().zip(post).enumerate() {
                    r.row(vec![(l + 1).into(), (u + 1).into(), (*z).into(), (*a).into()]);
                }
            }
            let out: Vec<_> = fwd.output().iter().map(|&v| json_num(v)).collect();
            r.extra("output", json!(out));
            Ok(r.render(f))
        }
        NetCmd::Collapse { model, out } => {
            let m = load_model(model)?;
            let collapsed = m.network.collapse_linear()?;
            write(out, &collapsed.to_model_string(m.seed))?;
            let mut r = Report::new("net collapse", &["column", "weight"]);
            let w = &collapsed.weights()[0];
            for row in 0..w.rows() {
                for c in 0..w.cols() {
                    let name = if c + 1 == w.cols() { format!("b{}", row + 1) } else { format!("a{}_{}", row + 1, c + 1) };
                    r.row(vec![name.into(), w[(row, c)].into()]);
                }
            }
            r.extra("spec", json!(collapsed.topology().to_string()));
            Ok(r.render(f))
        }
        NetCmd::Count { spec } => Ok(Report::scalar("net count", "weights", count_weights(&spec.0)).render(f)),
    }
}

fn config(opts: &TrainOpts, trajectory: bool) -> TrainConfig {
    TrainConfig {
        learning_rate: opts.lr,
        max_iters: opts.max_iters,
        tol: opts.tol,
        mode: opts.mode,
        seed: opts.seed,
        init_range: opts.init_range,
        record_trajectory: trajectory,
    }
}

fn classify_if_possible(net: &Network, opts: ClassifyOptions) -> Option<trainer::FunctionLabel> {
    trainer::classify(net, opts).ok()
}

fn train(args: &TrainArgs, f: Format) -> Result<String> {
    let ds = with_target(load_data(&args.data)?, args.opts.target.as_deref())?;
    let cfg = config(&args.opts, args.log.is_some());
    let res = trainer::train(&args.spec, &ds, &cfg)?;
    let label = classify_if_possible(&res.final_net, ClassifyOptions::default());
    let meta = RunMetadata::new(&ds, &cfg, &res, label.as_ref());
    if let Some(out) = &args.out {
        write(out, &res.final_net.to_model_string(Some(cfg.seed)))?;
        write(&meta_path(out), &(serde_json::to_string_pretty(&meta)? + "\n"))?;
    }
    if let (Some(log), Some(traj)) = (&args.log, &res.trajectory) {
        let mut text = String::from("iteration,sse\n");
        for (i, s) in traj.iter().enumerate() {
            text.push_str(&format!("{},{}\n", i + 1, xorlab::fmt::g17(*s)));
        }
        write(log, &text)?;
    }
    let mut r = Report::new("train", &["iterations", "final_sse", "converged", "label", "max_deviation"]);
    r.row(vec![
        res.iterations.into(),
        res.final_sse.into(),
        res.converged.into(),
        label.map(|l| l.label.to_string()).into(),
        label.map(|l| l.max_deviation).into(),
    ]);
    Ok(r.render(f))
}

fn label_cells(label: &trainer::FunctionLabel) -> (Cell, Cell) {
    let s = match label.label {
        Label::Fs(s) => Cell::Num(s),
        _ => Cell::Missing,
    };
    (Cell::Text(label.label.kind().into()), s)
}

fn classify(model: &Path, tol: f64, grid: usize, f: Format) -> Result<String> {
    if !(tol > 0.0) || grid < 2 {
        bail!("--tol must be positive and --grid at least 2");
    }
    let net = load_model(model)?.network;
    let label = trainer::classify(&net, ClassifyOptions { tol, grid })?;
    let envelope = trainer::within_envelope(&net, tol, grid)?;
    let mut r = Report::new("classify", &["label", "s", "max_deviation", "within_envelope"]);
    let (kind, s) = label_cells(&label);
    r.row(vec![kind, s, label.max_deviation.into(), envelope.into()]);
    Ok(r.render(f))
}

fn sweep(args: &SweepArgs, f: Format) -> Result<String> {
    let ds = with_target(load_data(&args.data)?, args.opts.target.as_deref())?;
    let cfg = config(&args.opts, false);
    let opts = ClassifyOptions {
        tol: args.classify_tol,
        ..Default::default()
    };
    let report = trainer::sweep(&args.spec, &ds, &cfg, args.restarts as usize, opts)?;
    let mut runs = Report::new(
        "sweep",
        &["seed", "status", "iterations", "final_sse", "label", "s", "max_deviation", "within_envelope"],
    );
    for run in &report.runs {
        let (status, iterations, sse) = match &run.outcome {
            Ok(res) if res.converged => ("converged", Cell::from(res.iterations), Cell::from(res.final_sse)),
            Ok(res) => ("stalled", Cell::from(res.iterations), Cell::from(res.final_sse)),
            Err(trainer::TrainError::Divergence { iteration, sse }) => {
                ("diverged", Cell::from(*iteration), Cell::from(*sse))
            }
            Err(e) => return Err(anyhow!("seed {}: {e}", run.seed)),
        };
        let (kind, s) = run.label.as_ref().map_or((Cell::Missing, Cell::Missing), label_cells);
        runs.row(vec![
            run.seed.into(),
            status.into(),
            iterations,
            sse,
            kind,
            s,
            run.label.map(|l| l.max_deviation).into(),
            run.within_envelope.into(),
        ]);
    }
    let hist = report.histogram();
    let summary = json!({
        "restarts": report.runs.len(),
        "converged": report.converged_count(),
        "diverged": report.diverged_count(),
        "histogram": hist,
    });
    match &args.out {
        Some(out) => {
            write(out, &runs.render(Format::Csv))?;
            let mut r = Report::new("sweep", &["label", "count"]);
            for (k, v) in &hist {
                r.row(vec![(*k).into(), (*v).into()]);
            }
            r.extra("summary", summary);
            Ok(r.render(f))
        }
        None => {
            runs.extra("summary", summary);
            Ok(runs.render(f))
        }
    }
}

fn surface_cmd(args: &SurfaceArgs, f: Format) -> Result<String> {
    match &args.all {
        Some(SurfaceCmd::AllPairs {
            model,
            data,
            range,
            steps,
            out_dir,
        }) => all_pairs(model, data, *range, *steps as usize, out_dir, f),
        None => {
            let (model, data, (a, b), out) = match (&args.model, &args.data, args.pair, &args.out) {
                (Some(m), Some(d), Some(p), Some(o)) => (m, d, p, o),
                _ => unreachable!("clap enforces the required flags"),
            };
            let m = load_model(model)?;
            let ds = load_data(data)?;
            let grid = surface::project(&m.network, &ds, a, b, args.range, args.range, args.steps as usize)?;
            let meta = grid.metadata(&model.display().to_string(), ds.name());
            write(out, &grid.to_csv())?;
            write(&meta_path(out), &(serde_json::to_string_pretty(&meta)? + "\n"))?;
            let mut r = stats_report();
            stats_row(&mut r, &grid)?;
            Ok(r.render(f))
        }
    }
}

fn stats_report() -> Report {
    Report::new(
        "surface",
        &["pair", "min_err", "min_wa", "min_wb", "max_err", "strict_local_minima", "plateau_fraction"],
    )
}

fn stats_row(r: &mut Report, grid: &surface::SurfaceGrid) -> Result<()> {
    let pair = format!("{},{}", grid.coord_a, grid.coord_b);
    match landscape_stats(grid) {
        Ok(s) => r.row(vec![
            pair.into(),
            s.min_value.into(),
            s.min_at.0.into(),
            s.min_at.1.into(),
            s.max_value.into(),
            s.strict_local_minima.into(),
            s.plateau_fraction.into(),
        ]),
        Err(_) => r.row(vec![
            pair.into(),
            Cell::Missing,
            Cell::Missing,
            Cell::Missing,
            Cell::Missing,
            Cell::Missing,
            Cell::Missing,
        ]),
    };
    Ok(())
}

fn all_pairs(model: &Path, data: &str, range: (f64, f64), steps: usize, dir: &Path, f: Format) -> Result<String> {
    let m = load_model(model)?;
    let ds = load_data(data)?;
    let grids = surface::enumerate_pairs(m.network.topology())
        .into_iter()
        .map(|(a, b)| surface::project(&m.network, &ds, a, b, range, range, steps))
        .collect::<Result<Vec<_>, _>>()?;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut r = stats_report();
    for grid in &grids {
        let path = dir.join(format!("{}-{}.csv", grid.coord_a, grid.coord_b));
        let meta = grid.metadata(&model.display().to_string(), ds.name());
        write(&path, &grid.to_csv())?;
        write(&meta_path(&path), &(serde_json::to_string_pretty(&meta)? + "\n"))?;
        stats_row(&mut r, grid)?;
    }
    Ok(r.render(f))
}

fn dataset_cmd(cmd: &DatasetCmd, f: Format) -> Result<String> {
    match cmd {
        DatasetCmd::Emit { name, out } => {
            let ds = datasets::builtin(name)?;
            write(out, &datasets::to_csv_string(&ds)?)?;
            Ok(Report::scalar("dataset emit", "rows", ds.len()).render(f))
        }
        DatasetCmd::List => {
            let mut r = Report::new("dataset list", &["name", "rows", "inputs", "targets", "reconstructed_rows"]);
            for name in BUILTIN_NAMES {
                let ds = datasets::builtin(name)?;
                let recon: Vec<String> = ds.reconstructed_rows().iter().map(|i| i.to_string()).collect();
                r.row(vec![
                    name.into(),
                    ds.len().into(),
                    ds.input_names().join(" ").into(),
                    ds.target_names().join(" ").into(),
                    recon.join(" ").into(),
                ]);
            }
            Ok(r.render(f))
        }
    }
}

/// Parses `2-9-1` or `2-9-1/inp-...` into layer sizes.
pub fn parse_sizes(text: &str) -> Result<Vec<usize>, String> {
    if text.contains('/') {
        parse_spec(text).map(|t| t.sizes().to_vec()).map_err(|e| e.to_string())
    } else {
        parse_layer_sizes(text).map_err(|e| e.to_string())
    }
}
