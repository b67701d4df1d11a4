//! `antisym`: verification, bounds, Ĝ construction and training from the
//! command line. Every command writes `manifest.json` and `results.json` to
//! `--out`, plus CSV and SVG files where relevant.

mod output;

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use antisym_core::approxnet::{build_ghat, build_monomial_net_unchecked, ghat_error, monomial_sup_error, Activation, GhatParams};
use antisym_core::flatten::{ceil_exp, flatten_g, separation_lower_bound, verify_maroti_chain, SeparationMode};
use antisym_core::hardfn::{choose_r, monte_carlo_norm_sq, normalization_c, verify_pfaffian_identity, CMode, HardFnParams, DEFAULT_TAIL_TOL};
use antisym_core::partitions::enumerate_partitions;
use antisym_core::report::{self, Curve};
use antisym_core::symfunc::{alternant_coeffs, antisym_inner_exact};
use antisym_core::train::{train_run, ModelSpec, RunRecord, TrainConfig, CONFIG_SCHEMA_VERSION};
use antisym_core::{factorial, verify, Error};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use output::Artifacts;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_)
            | Error::Hypothesis(_)
            | Error::TooLong { .. }
            | Error::DimensionMismatch { .. }
            | Error::NotEvenSquare { .. }
            | Error::NotSkew { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "antisym", version, about = "Slater vs Jastrow separation toolkit")]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    #[command(subcommand)]
    Verify(VerifyCmd),
    #[command(subcommand)]
    Bounds(BoundsCmd),
    #[command(subcommand)]
    Norm(NormCmd),
    #[command(subcommand)]
    Ghat(GhatCmd),
    /// Train one model, or compare all ansatz families across seeds.
    Train(TrainArgs),
    /// Re-emit CSV and SVG from saved training results.
    Report(ReportArgs),
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Schur sum, Pfaffian and Jastrow form agree at random points.
    Pfaffian {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        r: f64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Exact inner products of alternants.
    Orthogonality {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        max_weight: usize,
    },
    /// The flattening of G is supported on the pairing.
    FlattenDiagonal {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 0.9)]
        r: f64,
        #[arg(long, default_value_t = 17)]
        max_exp: u32,
    },
    /// Growth inequalities between N^N, e^{N^2} and p(N^4).
    Maroti {
        #[arg(long, default_value_t = 6)]
        n: usize,
    },
    /// Measured sup error of monomial networks against both bounds.
    Approxnet {
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 1024)]
        grid: usize,
        #[arg(long, default_value_t = 8)]
        k_max: u32,
        #[arg(long, value_delimiter = ',', default_value = "32,64,128")]
        widths: Vec<usize>,
    },
    /// The full acceptance suite.
    All(Scale),
}

#[derive(Args, Clone, Copy)]
struct Scale {
    /// Desk-scale training (default).
    #[arg(long, conflicts_with = "full")]
    desk: bool,
    /// Full-scale training.
    #[arg(long)]
    full: bool,
}

#[derive(Subcommand)]
enum BoundsCmd {
    /// Lower bound on the squared distance from G to L-term Slater sums.
    Separation {
        #[arg(long, default_value_t = 6)]
        n: usize,
        /// Defaults to the value chosen for N.
        #[arg(long)]
        r: Option<f64>,
        /// L = ceil(e^{l_exp}).
        #[arg(long, default_value_t = 36.0)]
        l_exp: f64,
        #[arg(long, value_enum, default_value_t = ModeArg::PaperChain)]
        mode: ModeArg,
    },
}

#[derive(Subcommand)]
enum NormCmd {
    /// Monte-Carlo estimate of ||G||^2 against 1.
    Check {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        r: f64,
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Absolute allowance added to five standard errors.
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = CModeArg::ExactRestricted)]
        c_mode: CModeArg,
    },
}

#[derive(Args, Clone)]
struct GhatArgs {
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 0.9)]
    r: f64,
    #[arg(long = "k", default_value_t = 40)]
    k_terms: usize,
    #[arg(long, default_value_t = 512)]
    j: usize,
    #[arg(long, value_enum, default_value_t = ActArg::Exp)]
    activation: ActArg,
    #[arg(long, value_enum, default_value_t = CModeArg::ClosedForm)]
    c_mode: CModeArg,
}

#[derive(Subcommand)]
enum GhatCmd {
    /// Construct Ĝ and report its bounds and size.
    Build(GhatArgs),
    /// Measure sup |G - Ĝ| on a lattice and random samples.
    Error {
        #[command(flatten)]
        ghat: GhatArgs,
        #[arg(long, default_value_t = 4)]
        lattice: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args)]
struct TrainArgs {
    /// JSON config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    scale: Scale,
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    /// Slater determinants per model.
    #[arg(long)]
    determinants: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    hidden_width: Option<usize>,
    #[arg(long)]
    hidden_layers: Option<usize>,
    /// Train Slater sums with 1, 4 and 16 terms and the Jastrow model.
    #[arg(long)]
    compare: bool,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    seeds: Vec<u64>,
}

#[derive(Args)]
struct ReportArgs {
    /// `results.json` files written by `train`.
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy)]
enum ModeArg {
    PaperChain,
    ExactTruncated,
}

#[derive(ValueEnum, Clone, Copy)]
enum CModeArg {
    ClosedForm,
    ExactRestricted,
}

impl From<CModeArg> for CMode {
    fn from(m: CModeArg) -> Self {
        match m {
            CModeArg::ClosedForm => CMode::ClosedForm,
            CModeArg::ExactRestricted => CMode::ExactRestricted,
        }
    }
}

#[derive(ValueEnum, Clone, Copy)]
enum ActArg {
    Exp,
    SinPlusCos,
    SinhShift,
}

impl From<ActArg> for Activation {
    fn from(a: ActArg) -> Self {
        match a {
            ActArg::Exp => Activation::Exp,
            ActArg::SinPlusCos => Activation::SinPlusCos,
            ActArg::SinhShift => Activation::SinhShift,
        }
    }
}

#[derive(ValueEnum, Clone, Copy)]
enum ModelArg {
    Slater,
    Jastrow,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let out = cli.out;
    match cli.command {
        Command::Verify(v) => verify_cmd(v, out),
        Command::Bounds(BoundsCmd::Separation { n, r, l_exp, mode }) => separation(n, r, l_exp, mode, out),
        Command::Norm(NormCmd::Check { n, r, samples, seed, tol, c_mode }) => norm_check(n, r, samples, seed, tol, c_mode, out),
        Command::Ghat(GhatCmd::Build(g)) => ghat_build(g, out),
        Command::Ghat(GhatCmd::Error { ghat, lattice, samples, seed }) => ghat_err(ghat, lattice, samples, seed, out),
        Command::Train(t) => train(t, out),
        Command::Report(r) => report_cmd(r, out),
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn finish(art: Artifacts, pass: bool) -> Result<bool, Failure> {
    let path = art.finish()?;
    println!("manifest: {}", path.display());
    Ok(pass)
}

fn verify_cmd(cmd: VerifyCmd, out: PathBuf) -> Result<bool, Failure> {
    match cmd {
        VerifyCmd::Pfaffian { n, r, trials, tol, seed } => {
            let rep = verify_pfaffian_identity(n, r, trials, tol, seed)?;
            let mut art = Artifacts::new(&out, "verify pfaffian", json!({ "n": n, "r": r, "trials": trials, "tol": tol }), vec![seed]);
            art.json("results.json", &rep)?;
            println!(
                "[{}] pfaffian identity N={n} r={r}: max relative disagreement {:.3e} (tol {tol:e}, {} Schur terms)",
                verdict(rep.pass),
                rep.max_rel_disagreement,
                rep.schur_terms
            );
            finish(art, rep.pass)
        }
        VerifyCmd::Orthogonality { n, max_weight } => {
            let mut parts = Vec::new();
            for k in 0..=max_weight {
                parts.extend(enumerate_partitions(k, Some(n))?);
            }
            let coeffs = parts.iter().map(|p| alternant_coeffs(p, n)).collect::<Result<Vec<_>, _>>()?;
            let nf = factorial(n) as i128;
            let mut bad = Vec::new();
            for (i, a) in coeffs.iter().enumerate() {
                for (j, b) in coeffs.iter().enumerate() {
                    let got = antisym_inner_exact(a, b)?;
                    if got != if i == j { nf } else { 0 } {
                        bad.push(json!({ "lambda": parts[i].parts(), "mu": parts[j].parts(), "inner": got.to_string() }));
                    }
                }
            }
            let pass = bad.is_empty();
            let mut art = Artifacts::new(&out, "verify orthogonality", json!({ "n": n, "max_weight": max_weight }), vec![]);
            art.json("results.json", &json!({ "partitions": parts.len(), "pairs": parts.len() * parts.len(), "mismatches": bad }))?;
            println!("[{}] orthogonality N={n}: {} pairs, {} mismatches", verdict(pass), parts.len() * parts.len(), bad.len());
            finish(art, pass)
        }
        VerifyCmd::FlattenDiagonal { n, r, max_exp } => {
            let params = HardFnParams::new(n, r, CMode::ExactRestricted)?;
            let m = flatten_g(&params, max_exp)?;
            let off = m.off_pairing_entries();
            let pass = off.is_empty() && m.nnz() > 0;
            let mut csv = String::from("row,col,re,im\n");
            for (&(i, j), v) in &m.entries {
                let _ = writeln!(csv, "{},{},{:e},{:e}", join(&m.index.rows[i]), join(&m.index.cols[j]), v.re, v.im);
            }
            let mut art = Artifacts::new(&out, "verify flatten-diagonal", json!({ "n": n, "r": r, "max_exp": max_exp }), vec![]);
            art.write("entries.csv", &csv)?;
            art.json(
                "results.json",
                &json!({ "rows": m.nrows(), "cols": m.ncols(), "nnz": m.nnz(), "off_pairing": off.len(), "c": params.c }),
            )?;
            println!("[{}] flattening N={n} max_exp={max_exp}: {} nonzeros, {} off the pairing", verdict(pass), m.nnz(), off.len());
            finish(art, pass)
        }
        VerifyCmd::Maroti { n } => {
            let rep = verify_maroti_chain(n)?;
            let mut art = Artifacts::new(&out, "verify maroti", json!({ "n": n }), vec![]);
            art.json("results.json", &rep)?;
            for c in &rep.checks {
                println!("  {}: ln lhs {:.4} vs ln rhs {:.4} ({})", c.label, c.ln_lhs, c.ln_rhs, c.holds);
            }
            println!("[{}] growth inequalities N={n} (p(N^4) has {} digits)", verdict(rep.pass), rep.p_n4_digits);
            finish(art, rep.pass)
        }
        VerifyCmd::Approxnet { radius, grid, k_max, widths } => {
            let mut csv = String::from("activation,k,j,measured,measured_f64,lemma_bound,series_bound,hypothesis_holds\n");
            let mut rows = Vec::new();
            let mut pass = true;
            for act in Activation::ALL {
                for &j in &widths {
                    for k in 1..=k_max {
                        let rep = monomial_sup_error(&build_monomial_net_unchecked(k, j, act), radius, grid);
                        pass &= rep.measured <= rep.lemma_bound;
                        let _ = writeln!(
                            csv,
                            "{},{k},{j},{:e},{:e},{:e},{:e},{}",
                            act_name(act),
                            rep.measured,
                            rep.measured_f64,
                            rep.lemma_bound,
                            rep.series_bound,
                            rep.hypothesis_holds
                        );
                        rows.push(rep);
                    }
                }
            }
            let mut art = Artifacts::new(
                &out,
                "verify approxnet",
                json!({ "radius": radius, "grid": grid, "k_max": k_max, "widths": widths }),
                vec![],
            );
            art.write("monomial_errors.csv", &csv)?;
            art.json("results.json", &rows)?;
            println!("[{}] {} monomial networks within the bound at radius {radius}", verdict(pass), rows.len());
            finish(art, pass)
        }
        VerifyCmd::All(scale) => {
            let desk = !scale.full;
            let mut reports = Vec::new();
            for f in criteria(desk) {
                let r = f();
                println!("{}", r.line());
                reports.push(r);
            }
            let pass = reports.iter().all(|r| r.pass);
            let mut csv = String::from("criterion,name,pass\n");
            for r in &reports {
                let _ = writeln!(csv, "{},{},{}", r.id, r.name, r.pass);
            }
            let mut art = Artifacts::new(&out, "verify all", json!({ "desk": desk }), vec![]);
            art.write("criteria.csv", &csv)?;
            art.json("results.json", &reports)?;
            let passed = reports.iter().filter(|r| r.pass).count();
            println!("{passed}/{} criteria passed", reports.len());
            finish(art, pass)
        }
    }
}

type CriterionFn = Box<dyn FnOnce() -> verify::CriterionReport>;

fn criteria(desk: bool) -> Vec<CriterionFn> {
    vec![
        Box::new(verify::criterion_1),
        Box::new(verify::criterion_2),
        Box::new(verify::criterion_3),
        Box::new(verify::criterion_4),
        Box::new(verify::criterion_5),
        Box::new(verify::criterion_6),
        Box::new(verify::criterion_7),
        Box::new(verify::criterion_8),
        Box::new(verify::criterion_9),
        Box::new(move || verify::criterion_10(desk)),
        Box::new(verify::criterion_11),
    ]
}

fn join(v: &[u32]) -> String {
    v.iter().map(u32::to_string).collect::<Vec<_>>().join(" ")
}

fn act_name(a: Activation) -> &'static str {
    match a {
        Activation::Exp => "exp",
        Activation::SinPlusCos => "sin_plus_cos",
        Activation::SinhShift => "sinh_shift",
    }
}

fn separation(n: usize, r: Option<f64>, l_exp: f64, mode: ModeArg, out: PathBuf) -> Result<bool, Failure> {
    if n < 2 || n % 2 != 0 {
        return Err(Failure::Usage(format!("N = {n} must be even and at least 2")));
    }
    let r = r.unwrap_or_else(|| choose_r(n));
    let l = ceil_exp(l_exp).ok_or_else(|| Failure::Usage(format!("e^{l_exp} is not representable")))?;
    let mode = match mode {
        ModeArg::PaperChain => SeparationMode::PaperChain,
        ModeArg::ExactTruncated => SeparationMode::ExactTruncated,
    };
    let rep = separation_lower_bound(n, r, &l, mode)?;
    let mut csv = String::from("link,value,holds\n");
    for link in &rep.links {
        let _ = writeln!(csv, "{},{:e},{}", link.label, link.value, link.holds);
    }
    let mut art = Artifacts::new(&out, "bounds separation", json!({ "n": n, "r": r, "l_exp": l_exp, "mode": mode }), vec![]);
    art.write("links.csv", &csv)?;
    art.json("results.json", &rep)?;
    println!("separation lower bound N={n} ln L={:.4}: {:.6} (applicable: {})", rep.ln_l, rep.value, rep.applicable);
    finish(art, true)
}

fn norm_check(n: usize, r: f64, samples: usize, seed: u64, tol: f64, c_mode: CModeArg, out: PathBuf) -> Result<bool, Failure> {
    if samples < 2 {
        return Err(Failure::Usage("need at least 2 samples".into()));
    }
    let mode = CMode::from(c_mode);
    let (_, norm_rep) = normalization_c(n, r, mode, None, DEFAULT_TAIL_TOL)?;
    let params = HardFnParams::new(n, r, mode)?;
    let (mean, se) = monte_carlo_norm_sq(&params, samples, seed)?;
    let pass = (mean - 1.0).abs() <= 5.0 * se + tol;
    let mut art = Artifacts::new(&out, "norm check", json!({ "n": n, "r": r, "samples": samples, "tol": tol, "c_mode": mode }), vec![seed]);
    art.json("results.json", &json!({ "norm_sq": mean, "std_err": se, "normalization": norm_rep, "pass": pass }))?;
    println!("[{}] ||G||^2 = {mean:.5} +- {se:.5} (N={n}, r={r}, {samples} samples)", verdict(pass));
    finish(art, pass)
}

fn ghat_params(g: &GhatArgs) -> Result<GhatParams, Failure> {
    let hp = HardFnParams::new(g.n, g.r, g.c_mode.into())?;
    Ok(GhatParams { n: g.n, r: g.r, c: hp.c, k_terms: g.k_terms, j: g.j, activation: g.activation.into() })
}

fn ghat_build(g: GhatArgs, out: PathBuf) -> Result<bool, Failure> {
    let params = ghat_params(&g)?;
    let ghat = build_ghat(params.clone())?;
    let bounds = ghat.bounds();
    let mut art = Artifacts::new(&out, "ghat build", json!(params), vec![]);
    art.json("results.json", &json!({ "params": params, "bounds": bounds }))?;
    println!(
        "G-hat N={} K={} J={}: {} parameters, sup bound {:.3e}, budget rule met: {}",
        params.n, params.k_terms, params.j, bounds.parameter_count, bounds.bound_sup, bounds.meets_budget_rule
    );
    finish(art, true)
}

fn ghat_err(g: GhatArgs, lattice: usize, samples: usize, seed: u64, out: PathBuf) -> Result<bool, Failure> {
    let params = ghat_params(&g)?;
    let ghat = build_ghat(params.clone())?;
    let rep = ghat_error(&ghat, lattice, samples, seed)?;
    let pass = rep.measured_sup <= rep.bound_sup;
    let mut art = Artifacts::new(
        &out,
        "ghat error",
        json!({ "params": params, "lattice": lattice, "samples": samples }),
        vec![seed],
    );
    art.json("results.json", &rep)?;
    println!(
        "[{}] sup |G - G-hat| = {:.3e} vs bound {:.3e} ({} lattice points, {} samples)",
        verdict(pass),
        rep.measured_sup,
        rep.bound_sup,
        rep.lattice_points,
        rep.samples
    );
    finish(art, pass)
}

fn load_config(path: &PathBuf) -> Result<TrainConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let cfg: TrainConfig = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    if cfg.schema_version != CONFIG_SCHEMA_VERSION {
        return Err(Failure::Usage(format!(
            "config schema version {} is not {CONFIG_SCHEMA_VERSION}",
            cfg.schema_version
        )));
    }
    Ok(cfg)
}

fn resolve(t: &TrainArgs) -> Result<TrainConfig, Failure> {
    let model = match (t.model, t.determinants) {
        (Some(ModelArg::Jastrow), _) => Some(ModelSpec::Jastrow),
        (Some(ModelArg::Slater), d) => Some(ModelSpec::Slater { determinants: d.unwrap_or(1) }),
        (None, Some(d)) => Some(ModelSpec::Slater { determinants: d }),
        (None, None) => None,
    };
    let mut cfg = match &t.config {
        Some(p) => load_config(p)?,
        None => {
            let n = t.n.unwrap_or(4);
            let m = model.clone().unwrap_or(ModelSpec::Jastrow);
            if t.scale.full {
                TrainConfig::full(n, m, 1)
            } else {
                TrainConfig::desk(n, m, 1)
            }
        }
    };
    if let Some(m) = model {
        cfg.model = m;
    }
    macro_rules! set {
        ($($f:ident),*) => { $( if let Some(v) = t.$f { cfg.$f = v; } )* };
    }
    set!(n, seed, samples, iterations, learning_rate, hidden_width, hidden_layers);
    if let Some(r) = t.r {
        cfg.target.r = r;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn curves(records: &[RunRecord]) -> Vec<Curve> {
    records
        .iter()
        .map(|r| Curve {
            label: r.label.clone(),
            points: r.trajectory.iter().enumerate().map(|(i, &v)| (i as f64, v)).collect(),
        })
        .collect()
}

fn plot(records: &[RunRecord], title: &str) -> String {
    report::svg_plot(title, "iteration", "normalized MSE", &curves(records), true)
}

fn series(records: &[RunRecord]) -> String {
    let labels: Vec<String> = records.iter().map(|r| r.label.clone()).collect();
    let cols: Vec<Vec<f64>> = records.iter().map(|r| r.trajectory.clone()).collect();
    report::series_csv(&labels, &cols)
}

fn summarize(r: &RunRecord) {
    println!(
        "{} seed {}: final normalized MSE {:.4e}, antisymmetry defect {:.1e}, {:.1}s{}",
        r.label,
        r.config.seed,
        r.final_normalized_mse,
        r.antisymmetry_max_defect,
        r.wall_clock_secs,
        r.aborted.as_ref().map(|a| format!(" (aborted: {a})")).unwrap_or_default()
    );
}

fn train(t: TrainArgs, out: PathBuf) -> Result<bool, Failure> {
    let base = resolve(&t)?;
    if !t.compare {
        let rec = train_run(&base)?;
        summarize(&rec);
        let mut art = Artifacts::new(&out, "train", json!(base), vec![base.seed]);
        art.write("trajectory.csv", &report::trajectory_csv(&rec.trajectory))?;
        art.write("mse.svg", &plot(std::slice::from_ref(&rec), &format!("{} (seed {})", rec.label, base.seed)))?;
        art.json("results.json", &rec)?;
        return finish(art, rec.aborted.is_none());
    }
    if t.seeds.is_empty() {
        return Err(Failure::Usage("--seeds is empty".into()));
    }
    let mut art = Artifacts::new(&out, "train --compare", json!(base), t.seeds.clone());
    let mut all = Vec::new();
    let mut wins = 0usize;
    let mut ok = true;
    for &seed in &t.seeds {
        let mut recs = Vec::new();
        for model in verify::comparison_models() {
            let rec = train_run(&TrainConfig { seed, model, ..base.clone() })?;
            summarize(&rec);
            ok &= rec.aborted.is_none();
            recs.push(rec);
        }
        let finals: Vec<(ModelSpec, f64)> = recs.iter().map(|r| (r.config.model.clone(), r.final_normalized_mse)).collect();
        let win = verify::jastrow_wins(&finals);
        wins += win as usize;
        println!("seed {seed}: jastrow lowest: {win}");
        art.write(&format!("series_seed{seed}.csv"), &series(&recs))?;
        art.write(&format!("mse_seed{seed}.svg"), &plot(&recs, &format!("normalized MSE, seed {seed}")))?;
        all.extend(recs);
    }
    println!("jastrow lowest in {wins}/{} seeds", t.seeds.len());
    art.json("results.json", &json!({ "runs": all, "jastrow_wins": wins, "seeds": t.seeds }))?;
    finish(art, ok)
}

fn read_records(path: &PathBuf) -> Result<Vec<RunRecord>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let runs = match v.get("runs") {
        Some(runs) => runs.clone(),
        None => v,
    };
    let parsed = if runs.is_array() {
        serde_json::from_value::<Vec<RunRecord>>(runs)
    } else {
        serde_json::from_value::<RunRecord>(runs).map(|r| vec![r])
    };
    parsed.map_err(|e| Failure::Usage(format!("{}: not a training result ({e})", path.display())))
}

fn report_cmd(a: ReportArgs, out: PathBuf) -> Result<bool, Failure> {
    let mut records = Vec::new();
    for p in &a.input {
        records.extend(read_records(p)?);
    }
    let mut art = Artifacts::new(
        &out,
        "report",
        json!({ "inputs": a.input.iter().map(|p| p.display().to_string()).collect::<Vec<_>>() }),
        records.iter().map(|r| r.config.seed).collect(),
    );
    art.write("trajectories.csv", &series(&records))?;
    art.write("mse.svg", &plot(&records, "normalized MSE"))?;
    let summary: Vec<Value> = records
        .iter()
        .map(|r| json!({ "label": r.label, "seed": r.config.seed, "final_normalized_mse": r.final_normalized_mse, "param_digest": r.param_digest }))
        .collect();
    art.json("results.json", &summary)?;
    println!("{} runs reported", records.len());
    finish(art, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_errors_are_usage_errors() {
        assert!(matches!(Failure::from(Error::InvalidParameter("x".into())), Failure::Usage(_)));
        assert!(matches!(Failure::from(Error::Io("x".into())), Failure::Runtime(_)));
    }

    #[test]
    fn presets_and_overrides_resolve() {
        let cli = Cli::try_parse_from(["antisym", "train", "--full", "--determinants", "4", "--seed", "9"]).unwrap();
        let Command::Train(t) = cli.command else { panic!("not train") };
        let cfg = resolve(&t).unwrap();
        assert_eq!(cfg.iterations, 200_000);
        assert_eq!(cfg.model, ModelSpec::Slater { determinants: 4 });
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.n, 4);
    }

    #[test]
    fn desk_and_full_conflict() {
        assert!(Cli::try_parse_from(["antisym", "verify", "all", "--desk", "--full"]).is_err());
    }
}
