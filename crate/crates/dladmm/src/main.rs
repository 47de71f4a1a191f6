use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use dladmm::data::{
    gen_dataset, patchify, read_dataset, read_matrix, read_pgm, salt_pepper, unpatchify,
    write_dataset, write_pgm,
};
use dladmm::diagnostics::{ebc_ratio, contraction_report, nmse, psnr, DIAG_CSV_HEADER};
use dladmm::ladmm::{oracle_solution, solve, LadmmConfig};
use dladmm::network::{forward, init_network, read_network, write_network};
use dladmm::train::{loss_log_csv, train, LossKind, TrainConfig};
use dladmm::{Error, IterateState, LayerParams, ProblemInstance, Result};

#[derive(Parser)]
#[command(name = "dladmm", version, about = "Linearized ADMM and its unrolled trainable variant")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic sparse-coding dataset
    Gen(GenArgs),
    /// Solve one dataset with plain linearized ADMM
    Solve(SolveArgs),
    /// Train an unrolled network on a dataset
    Train(TrainArgs),
    /// Per-layer NMSE of a network against iteration-matched baselines
    Eval(EvalArgs),
    /// Salt-and-pepper denoising through patch-wise sparse coding
    Denoise(DenoiseArgs),
    /// Contraction and error-bound diagnostics along a solver run
    Diag(DiagArgs),
}

#[derive(Args)]
struct Common {
    /// key=value file supplying defaults for any flag of this command
    #[arg(long)]
    config: Option<PathBuf>,
    /// worker count; this build always runs sequentially, so any value is deterministic
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    density: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// output dataset directory
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    /// dataset directory
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    lambda_reg: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// per-iteration CSV trace
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    data: Option<PathBuf>,
    /// number of layers
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    /// supervised | dual
    #[arg(long)]
    loss: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    lambda_reg: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// learn only theta/beta, keeping each layer's W at the dictionary
    #[arg(long)]
    freeze_w: bool,
    /// output network file; loss log goes to <out>.loss.csv
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    net: Option<PathBuf>,
    /// comma-separated LADMM iteration counts, e.g. 5,10,15
    #[arg(long)]
    baseline_iters: Option<String>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DenoiseArgs {
    #[command(flatten)]
    common: Common,
    /// clean input image (PGM)
    #[arg(long)]
    image: Option<PathBuf>,
    /// dictionary matrix, patch^2 rows
    #[arg(long)]
    dict: Option<PathBuf>,
    /// salt-and-pepper corruption rate
    #[arg(long)]
    rate: Option<f64>,
    /// ladmm | dladmm
    #[arg(long)]
    method: Option<String>,
    /// iteration count for the ladmm method
    #[arg(long)]
    iters: Option<usize>,
    /// trained network file, required for the dladmm method
    #[arg(long)]
    net: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    lambda_reg: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// denoised output image
    #[arg(long)]
    out: Option<PathBuf>,
    /// PSNR report CSV
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct DiagArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    lambda_reg: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

// ---- key=value run configuration ----

struct FileCfg {
    map: BTreeMap<String, String>,
}

impl FileCfg {
    fn load(path: Option<&Path>) -> Result<FileCfg> {
        let mut map = BTreeMap::new();
        if let Some(p) = path {
            let text = fs::read_to_string(p)?;
            for (i, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((k, v)) = line.split_once('=') else {
                    return Err(Error::Parse {
                        line: i + 1,
                        msg: format!("expected key=value, got {line:?}"),
                    });
                };
                map.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Ok(FileCfg { map })
    }

    fn check_known(&self, allowed: &[&str]) -> Result<()> {
        for k in self.map.keys() {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::Argument(format!("unknown config key {k:?}")));
            }
        }
        Ok(())
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.map.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Argument(format!("config key {key}: bad value {v:?}"))),
        }
    }
}

fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

fn require<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| Error::Argument(format!("missing required --{flag}")))
}

fn write_resolved(path: &Path, pairs: &[(&str, String)]) -> Result<()> {
    let mut s = String::new();
    for (k, v) in pairs {
        writeln!(s, "{k}={v}").unwrap();
    }
    fs::write(path, s)?;
    Ok(())
}

fn sibling_config(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".config");
    out.with_file_name(name)
}

fn fmt_db(v: f64) -> String {
    format!("{v:.6}")
}

fn csv_cell(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:.17e}"),
        Some(x) if x.is_infinite() && x > 0.0 => "inf".into(),
        Some(x) if x.is_infinite() => "-inf".into(),
        _ => "nan".into(),
    }
}

// ---- commands ----

fn cmd_gen(args: GenArgs) -> Result<()> {
    let fc = FileCfg::load(args.common.config.as_deref())?;
    fc.check_known(&["m", "d", "n", "density", "seed", "out"])?;
    let m = pick(args.m, fc.get("m")?, 500);
    let d = pick(args.d, fc.get("d")?, 250);
    let n = pick(args.n, fc.get("n")?, 1000);
    let density = pick(args.density, fc.get("density")?, 0.1);
    let seed = pick(args.seed, fc.get("seed")?, 0);
    let out: PathBuf = require(args.out.or(fc.get("out")?), "out")?;

    let ds = gen_dataset(m, d, n, density, seed)?;
    fs::create_dir_all(&out)?;
    write_dataset(&ds, &out)?;
    write_resolved(
        &out.join("run.config"),
        &[
            ("m", m.to_string()),
            ("d", d.to_string()),
            ("n", n.to_string()),
            ("density", density.to_string()),
            ("seed", seed.to_string()),
            ("out", out.display().to_string()),
        ],
    )?;
    println!("wrote {n} samples of size {m} (dictionary {m}x{d}) to {}", out.display());
    Ok(())
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let fc = FileCfg::load(args.common.config.as_deref())?;
    fc.check_known(&["data", "lambda_reg", "beta", "iters", "tol", "trace"])?;
    let data: PathBuf = require(args.data.or(fc.get("data")?), "data")?;
    let lambda_reg = pick(args.lambda_reg, fc.get("lambda_reg")?, 0.5);
    let beta = pick(args.beta, fc.get("beta")?, 1.0);
    let iters = pick(args.iters, fc.get("iters")?, 1000);
    let tol = pick(args.tol, fc.get("tol")?, 1e-6);
    let trace_path: Option<PathBuf> = args.trace.or(fc.get("trace")?);

    let ds = read_dataset(&data)?;
    let problem = ProblemInstance::new(ds.a.clone(), ds.x.clone(), lambda_reg)?;
    let mut cfg = LadmmConfig::with_default_l1(&problem.a, beta, iters, tol);
    cfg.record_trace = trace_path.is_some() && ds.has_ground_truth();
    let res = solve(&problem, &cfg)?;

    println!("iterations {}", res.iterations);
    println!("relative residual {:.6e}", res.residual);
    println!("objective {:.6e}", problem.objective(&res.state));
    if let (Some(zt), Some(et)) = (&ds.z_true, &ds.e_true) {
        println!("nmse_db {}", fmt_db(nmse(&res.state.z, &res.state.e, zt, et)?));
    }
    println!("converged {}", res.converged);

    if let Some(tp) = &trace_path {
        let mut csv = String::from(DIAG_CSV_HEADER);
        csv.push('\n');
        for k in 0..res.iterations {
            let n_db = match (&ds.z_true, &ds.e_true, &res.trace.iterates) {
                (Some(zt), Some(et), Some(states)) => {
                    Some(nmse(&states[k].z, &states[k].e, zt, et)?)
                }
                _ => None,
            };
            writeln!(
                csv,
                "{},{},{},{},nan,nan,nan",
                k + 1,
                csv_cell(Some(res.trace.residuals[k])),
                csv_cell(Some(res.trace.objectives[k])),
                csv_cell(n_db),
            )
            .unwrap();
        }
        fs::write(tp, csv)?;
        write_resolved(
            &sibling_config(tp),
            &[
                ("data", data.display().to_string()),
                ("lambda_reg", lambda_reg.to_string()),
                ("beta", beta.to_string()),
                ("iters", iters.to_string()),
                ("tol", tol.to_string()),
                ("trace", tp.display().to_string()),
            ],
        )?;
    }
    Ok(())
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let fc = FileCfg::load(args.common.config.as_deref())?;
    fc.check_known(&[
        "data", "k", "lr", "epochs", "batch", "loss", "seed", "lambda_reg", "beta", "freeze_w",
        "out",
    ])?;
    let data: PathBuf = require(args.data.or(fc.get("data")?), "data")?;
    let k = pick(args.k, fc.get("k")?, 15);
    let lr = pick(args.lr, fc.get("lr")?, 0.01);
    let epochs = pick(args.epochs, fc.get("epochs")?, 50);
    let batch = pick(args.batch, fc.get("batch")?, 64);
    let loss = pick(args.loss, fc.get("loss")?, "supervised".to_string());
    let seed = pick(args.seed, fc.get("seed")?, 0);
    let lambda_reg = pick(args.lambda_reg, fc.get("lambda_reg")?, 0.5);
    let beta = pick(args.beta, fc.get("beta")?, 1.0);
    let freeze_w = args.freeze_w || fc.get("freeze_w")?.unwrap_or(false);
    let out: PathBuf = require(args.out.or(fc.get("out")?), "out")?;

    let loss_kind = match loss.as_str() {
        "supervised" => LossKind::Supervised,
        "dual" => LossKind::DualGap,
        other => return Err(Error::Argument(format!("unknown loss {other:?}"))),
    };

    let ds = read_dataset(&data)?;
    let net0 = init_network(&ds.a, k, lambda_reg, beta, 0.001)?;
    let cfg = TrainConfig {
        learning_rate: lr,
        epochs,
        batch_size: batch,
        loss_kind,
        seed,
        freeze_w,
        ..TrainConfig::default()
    };
    let (net, records) = train(&net0, &ds, &cfg)?;
    write_network(&net, &out)?;

    let mut loss_path = out.as_os_str().to_os_string();
    loss_path.push(".loss.csv");
    fs::write(&loss_path, loss_log_csv(&records))?;
    write_resolved(
        &sibling_config(&out),
        &[
            ("data", data.display().to_string()),
            ("k", k.to_string()),
            ("lr", lr.to_string()),
            ("epochs", epochs.to_string()),
            ("batch", batch.to_string()),
            ("loss", loss.clone()),
            ("seed", seed.to_string()),
            ("lambda_reg", lambda_reg.to_string()),
            ("beta", beta.to_string()),
            ("freeze_w", freeze_w.to_string()),
            ("out", out.display().to_string()),
        ],
    )?;
    if let Some(last) = records.last() {
        println!("final batch loss {:.6e}", last.loss);
    }
    println!("wrote network to {}", out.display());
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let fc = FileCfg::load(args.common.config.as_deref())?;
    fc.check_known(&["data", "net", "baseline_iters", "beta", "out"])?;
    let data: PathBuf = require(args.data.or(fc.get("data")?), "data")?;
    let net_path: PathBuf = require(args.net.or(fc.get("net")?), "net")?;
    let baseline = pick(args.baseline_iters, fc.get("baseline_iters")?, String::new());
    let beta = pick(args.beta, fc.get("beta")?, 1.0);
    let out: PathBuf = require(args.out.or(fc.get("out")?), "out")?;

    let ds = read_dataset(&data)?;
    let net = read_network(&net_path)?;
    let (Some(zt), Some(et)) = (&ds.z_true, &ds.e_true) else {
        return Err(Error::Argument("eval needs a dataset with ground truth".into()));
    };
    let problem = ProblemInstance::new(ds.a.clone(), ds.x.clone(), net.lambda_reg)?;
    let fwd = forward(&problem, &net, false)?;

    let mut csv = String::from("method,k,nmse_db\n");
    let zero = IterateState::zeros(problem.m(), problem.d(), problem.n());
    let zero_db = nmse(&zero.z, &zero.e, zt, et)?;
    writeln!(csv, "dladmm,0,{}", fmt_db(zero_db)).unwrap();
    for (k, st) in fwd.layer_states.iter().enumerate() {
        writeln!(csv, "dladmm,{},{}", k + 1, fmt_db(nmse(&st.z, &st.e, zt, et)?)).unwrap();
    }

    let mut counts = Vec::new();
    for tok in baseline.split(',').filter(|t| !t.trim().is_empty()) {
        let c: usize = tok
            .trim()
            .parse()
            .map_err(|_| Error::Argument(format!("bad iteration count {tok:?}")))?;
        counts.push(c);
    }
    if let Some(&max) = counts.iter().max() {
        let mut cfg = LadmmConfig::with_default_l1(&problem.a, beta, max, 1e-300);
        cfg.record_trace = true;
        let res = solve(&problem, &cfg)?;
        let states = res.trace.iterates.as_deref().unwrap_or(&[]);
        for &c in &counts {
            let db = if c == 0 {
                zero_db
            } else {
                let st = states.get(c - 1).unwrap_or(&res.state);
                nmse(&st.z, &st.e, zt, et)?
            };
            writeln!(csv, "ladmm,{c},{}", fmt_db(db)).unwrap();
        }
    }
    fs::write(&out, &csv)?;
    write_resolved(
        &sibling_config(&out),
        &[
            ("data", data.display().to_string()),
            ("net", net_path.display().to_string()),
            ("baseline_iters", baseline.clone()),
            ("beta", beta.to_string()),
            ("out", out.display().to_string()),
        ],
    )?;
    print!("{csv}");
    Ok(())
}

fn cmd_denoise(args: DenoiseArgs) -> Result<()> {
    let fc = FileCfg::load(args.common.config.as_deref())?;
    fc.check_known(&[
        "image", "dict", "rate", "method", "iters", "net", "seed", "lambda_reg", "beta", "out",
        "report",
    ])?;
    let image: PathBuf = require(args.image.or(fc.get("image")?), "image")?;
    let dict_path: PathBuf = require(args.dict.or(fc.get("dict")?), "dict")?;
    let rate = pick(args.rate, fc.get("rate")?, 0.1);
    let method = pick(args.method, fc.get("method")?, "ladmm".to_string());
    let iters = pick(args.iters, fc.get("iters")?, 15);
    let net_path: Option<PathBuf> = args.net.or(fc.get("net")?);
    let seed = pick(args.seed, fc.get("seed")?, 0);
    let lambda_reg = pick(args.lambda_reg, fc.get("lambda_reg")?, 0.5);
    let beta = pick(args.beta, fc.get("beta")?, 1.0);
    let out: PathBuf = require(args.out.or(fc.get("out")?), "out")?;
    let report: Option<PathBuf> = args.report.or(fc.get("report")?);

    let img = read_pgm(&image)?;
    let dict = read_matrix(&dict_path)?;
    let patch = (dict.rows() as f64).sqrt().round() as usize;
    if patch * patch != dict.rows() {
        return Err(Error::Format(format!(
            "dictionary has {} rows, not a square patch size",
            dict.rows()
        )));
    }
    let noisy = salt_pepper(&img, rate, seed)?;
    let (x_noisy, layout) = patchify(&noisy, patch)?;
    let (x_clean, _) = patchify(&img, patch)?;
    let problem = ProblemInstance::new(dict, x_noisy.clone(), lambda_reg)?;

    let z = match method.as_str() {
        "ladmm" => {
            let cfg = LadmmConfig::with_default_l1(&problem.a, beta, iters, 1e-300);
            solve(&problem, &cfg)?.state.z
        }
        "dladmm" => {
            let np = require(net_path.clone(), "net")?;
            let net = read_network(&np)?;
            if net.m() != problem.m() {
                return Err(Error::Dim(format!(
                    "network expects {} pixel patches, dictionary has {} rows",
                    net.m(),
                    problem.m()
                )));
            }
            forward(&problem, &net, false)?.final_state.z
        }
        other => return Err(Error::Argument(format!("unknown method {other:?}"))),
    };

    let recon = problem.a.matmul(&z)?;
    let psnr_noisy = psnr(&x_clean, &x_noisy, 1.0)?;
    let psnr_denoised = psnr(&x_clean, &recon, 1.0)?;
    write_pgm(&unpatchify(&recon, &layout)?, &out)?;
    if let Some(rp) = &report {
        fs::write(rp, format!("stage,psnr_db\nnoisy,{}\ndenoised,{}\n", fmt_db(psnr_noisy), fmt_db(psnr_denoised)))?;
    }
    write_resolved(
        &sibling_config(&out),
        &[
            ("image", image.display().to_string()),
            ("dict", dict_path.display().to_string()),
            ("rate", rate.to_string()),
            ("method", method.clone()),
            ("iters", iters.to_string()),
            (
                "net",
                net_path.map(|p| p.display().to_string()).unwrap_or_default(),
            ),
            ("seed", seed.to_string()),
            ("lambda_reg", lambda_reg.to_string()),
            ("beta", beta.to_string()),
            ("out", out.display().to_string()),
            (
                "report",
                report.map(|p| p.display().to_string()).unwrap_or_default(),
            ),
        ],
    )?;
    println!("psnr_noisy_db {}", fmt_db(psnr_noisy));
    println!("psnr_denoised_db {}", fmt_db(psnr_denoised));
    Ok(())
}

fn cmd_diag(args: DiagArgs) -> Result<()> {
    let fc = FileCfg::load(args.common.config.as_deref())?;
    fc.check_known(&["data", "lambda_reg", "beta", "iters", "out"])?;
    let data: PathBuf = require(args.data.or(fc.get("data")?), "data")?;
    let lambda_reg = pick(args.lambda_reg, fc.get("lambda_reg")?, 0.5);
    let beta = pick(args.beta, fc.get("beta")?, 1.0);
    let iters = pick(args.iters, fc.get("iters")?, 100);
    let out: PathBuf = require(args.out.or(fc.get("out")?), "out")?;

    let ds = read_dataset(&data)?;
    let problem = ProblemInstance::new(ds.a.clone(), ds.x.clone(), lambda_reg)?;
    let mut cfg = LadmmConfig::with_default_l1(&problem.a, beta, iters, 1e-300);
    cfg.record_trace = true;
    let res = solve(&problem, &cfg)?;
    let oracle = oracle_solution(&problem, beta)?;

    let params = LayerParams::new(
        problem.a.clone(),
        vec![cfg.l1; problem.d()],
        vec![beta; problem.m()],
    )?;
    let mut trajectory = vec![IterateState::zeros(problem.m(), problem.d(), problem.n())];
    trajectory.extend(res.trace.iterates.clone().unwrap_or_default());
    let report = contraction_report(&trajectory, std::slice::from_ref(&params), &problem.a, &oracle.state)?;

    let mut csv = String::from(DIAG_CSV_HEADER);
    csv.push('\n');
    if oracle.residual > 1e-10 {
        writeln!(csv, "# warning: reference solution residual {:.3e} above 1e-10", oracle.residual).unwrap();
        eprintln!("warning: reference solution residual {:.3e} above 1e-10", oracle.residual);
    }
    for k in 0..res.iterations {
        let n_db = match (&ds.z_true, &ds.e_true) {
            (Some(zt), Some(et)) => Some(nmse(&trajectory[k + 1].z, &trajectory[k + 1].e, zt, et)?),
            _ => None,
        };
        let row = &report.rows[k];
        let ebc = ebc_ratio(&problem, &trajectory[k], &params, &oracle.state)?;
        writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            k + 1,
            csv_cell(Some(res.trace.residuals[k])),
            csv_cell(Some(res.trace.objectives[k])),
            csv_cell(n_db),
            csv_cell(Some(row.lhs16)),
            csv_cell(Some(row.lhs17_gap)),
            csv_cell(Some(ebc)),
        )
        .unwrap();
    }
    fs::write(&out, csv)?;
    write_resolved(
        &sibling_config(&out),
        &[
            ("data", data.display().to_string()),
            ("lambda_reg", lambda_reg.to_string()),
            ("beta", beta.to_string()),
            ("iters", iters.to_string()),
            ("out", out.display().to_string()),
        ],
    )?;
    println!("wrote {} diagnostic rows to {}", res.iterations, out.display());
    Ok(())
}

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::Argument(_) | Error::Dim(_) => 1,
        Error::Io(_) | Error::Parse { .. } | Error::Format(_) => 2,
        Error::Divergence(_) | Error::Numerical(_) => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let res = match cli.cmd {
        Cmd::Gen(a) => cmd_gen(a),
        Cmd::Solve(a) => cmd_solve(a),
        Cmd::Train(a) => cmd_train(a),
        Cmd::Eval(a) => cmd_eval(a),
        Cmd::Denoise(a) => cmd_denoise(a),
        Cmd::Diag(a) => cmd_diag(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
