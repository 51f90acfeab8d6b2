use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dmor::analysis::{bode_sample, log_grid};
use dmor::index1::{irka_index1, reduce_index1};
use dmor::index2::{irka_index2, reduce_index2};
use dmor::interpolation::{reduce_dae, reduce_naive, verify_interpolation_with_tol, InterpolationReport};
use dmor::io::{load_model, load_system, save_model, save_system, ManifestMetadata};
use dmor::irka::{check_h2_first_order, default_initial, irka_dae, IrkaConfig, IrkaResult};
use dmor::spectral::{dense_limit, split_transfer, weierstrass};
use dmor::synthetic::{generate_synthetic, SyntheticKind, SyntheticParams};
use dmor::{CVec, DescriptorSystem, InterpolationData, ReducedModel, StructureKind, TransferFunction, C64};
use serde::{Deserialize, Serialize};

const EXIT_ERROR: u8 = 1;
const EXIT_NOT_CONVERGED: u8 = 2;

/// Interpolatory model reduction for descriptor systems.
#[derive(Parser)]
#[command(name = "dmor", version)]
struct Cli {
    /// Worker threads for parallel solves (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce a system and write the model plus a run report
    Reduce(ReduceArgs),
    /// Sample |G(iw)| (and |G~(iw)|, |G - G~|) on a log grid as CSV
    Bode(BodeArgs),
    /// Check interpolation (and optionally H2 first-order) conditions of a reduced model
    Verify(VerifyArgs),
    /// Print dimensions, structure and, when feasible, the spectral split
    Info(InfoArgs),
    /// Write a synthetic test system
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum MethodArg {
    Naive,
    Dae,
    Index1,
    Index2,
    IrkaDae,
    IrkaIndex1,
    IrkaIndex2,
}

impl MethodArg {
    fn is_irka(self) -> bool {
        matches!(self, MethodArg::IrkaDae | MethodArg::IrkaIndex1 | MethodArg::IrkaIndex2)
    }

    fn required_structure(self) -> Option<&'static str> {
        match self {
            MethodArg::Index1 | MethodArg::IrkaIndex1 => Some("index1"),
            MethodArg::Index2 | MethodArg::IrkaIndex2 => Some("index2"),
            _ => None,
        }
    }
}

#[derive(Args)]
struct ReduceArgs {
    /// System manifest (JSON)
    #[arg(long)]
    system: PathBuf,
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Reduced order r (number of interpolation points)
    #[arg(long)]
    order: usize,
    /// Interpolation points and directions (JSON); default: seeded from Ritz estimates
    #[arg(long)]
    shifts: Option<PathBuf>,
    /// IRKA iteration cap
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    /// IRKA relative shift-change tolerance
    #[arg(long, default_value_t = 1e-6)]
    shift_tol: f64,
    /// Relative tolerance for the interpolation residuals in the report
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Output directory for the model and report.json
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BodeArgs {
    /// Full system manifest
    #[arg(long)]
    system: PathBuf,
    /// Reduced model manifest
    #[arg(long)]
    reduced: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-3)]
    wmin: f64,
    #[arg(long, default_value_t = 1e6)]
    wmax: f64,
    #[arg(long, default_value_t = 200)]
    npts: usize,
    /// Explicit frequencies (comma separated); overrides the log grid
    #[arg(long, value_delimiter = ',')]
    omega: Vec<f64>,
    /// CSV output (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    system: PathBuf,
    #[arg(long)]
    reduced: PathBuf,
    /// Interpolation data to check; default: the data recorded with the model
    #[arg(long)]
    shifts: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Also check the first-order H2 conditions at the mirrored reduced poles
    #[arg(long)]
    h2: bool,
    /// JSON report (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InfoArgs {
    /// System manifest
    system: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    kind: SyntheticKind,
    #[arg(long)]
    n1: usize,
    #[arg(long, default_value_t = 0)]
    n2: usize,
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long, default_value_t = 1)]
    p: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

/// Interpolation data as JSON; complex numbers are `[re, im]`.
#[derive(Debug, Serialize, Deserialize)]
struct ShiftFile {
    points: Vec<[f64; 2]>,
    right: Vec<Vec<[f64; 2]>>,
    left: Vec<Vec<[f64; 2]>>,
}

fn c64(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

impl ShiftFile {
    fn read(path: &Path) -> anyhow::Result<InterpolationData> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let f: ShiftFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let vecs = |v: &[Vec<[f64; 2]>]| v.iter().map(|d| CVec::from_iterator(d.len(), d.iter().map(|p| c64(*p)))).collect();
        Ok(InterpolationData::new(f.points.iter().map(|p| c64(*p)).collect(), vecs(&f.right), vecs(&f.left))?)
    }
}

#[derive(Serialize)]
struct RunReport {
    format_version: u32,
    method: MethodArg,
    requested_order: usize,
    order: usize,
    converged: bool,
    iterations: Option<usize>,
    final_shift_change: Option<f64>,
    shift_history: Vec<Vec<[f64; 2]>>,
    interpolation: InterpolationReport,
}

fn structure_matches(structure: &StructureKind, want: &str) -> bool {
    structure.name() == want
}

fn initial_data(system: &DescriptorSystem, args: &ReduceArgs) -> anyhow::Result<InterpolationData> {
    let data = match &args.shifts {
        Some(p) => ShiftFile::read(p)?,
        None => default_initial(system, args.order)?,
    };
    if data.len() != args.order {
        bail!("shift file holds {} points but --order is {}", data.len(), args.order);
    }
    Ok(data)
}

fn cmd_reduce(args: &ReduceArgs) -> anyhow::Result<u8> {
    let system = load_system(&args.system)?;
    if let Some(want) = args.method.required_structure() {
        if !structure_matches(&system.structure, want) {
            bail!(
                "method/structure mismatch: method {} needs {want} blocks, manifest declares {}",
                args.method.to_possible_value().expect("no skipped variants").get_name(),
                system.structure.name()
            );
        }
    }
    let data = initial_data(&system, args)?;
    let (model, irka): (ReducedModel, Option<IrkaResult>) = if args.method.is_irka() {
        let mut config = IrkaConfig::new(args.order).with_initial(data);
        config.max_iter = args.max_iter;
        config.shift_tol = args.shift_tol;
        let res = match args.method {
            MethodArg::IrkaDae => irka_dae(&system, &weierstrass(&system)?, &config)?,
            MethodArg::IrkaIndex1 => irka_index1(&system, &config)?,
            _ => irka_index2(&system, &config)?,
        };
        (res.model.clone(), Some(res))
    } else {
        let model = match args.method {
            MethodArg::Naive => reduce_naive(&system, &data)?,
            MethodArg::Dae => reduce_dae(&system, &data, &weierstrass(&system)?)?,
            MethodArg::Index1 => reduce_index1(&system, &data)?,
            _ => reduce_index2(&system, &data)?,
        };
        (model, None)
    };
    let used = model.provenance.data.clone().expect("interpolatory methods record their data");
    let interpolation = verify_interpolation_with_tol(&system, &model, &used, &[0, 1], args.tol)?;
    fs::create_dir_all(&args.out)?;
    save_model(&model, &args.out)?;
    let converged = irka.as_ref().is_none_or(|r| r.converged);
    let report = RunReport {
        format_version: 1,
        method: args.method,
        requested_order: args.order,
        order: model.order(),
        converged,
        iterations: irka.as_ref().map(|r| r.iterations),
        final_shift_change: irka.as_ref().map(|r| r.final_shift_change),
        shift_history: irka
            .as_ref()
            .map(|r| r.shift_history.iter().map(|s| s.iter().map(|z| pair(*z)).collect()).collect())
            .unwrap_or_default(),
        interpolation,
    };
    write_json(&args.out.join("report.json"), &report)?;
    if !converged {
        eprintln!("warning: iteration did not converge; best iterate written");
        return Ok(EXIT_NOT_CONVERGED);
    }
    Ok(0)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => Ok(std::io::stdout().write_all(text.as_bytes())?),
    }
}

/// Shortest round-trip text; plain notation in `[1e-4, 1e15)`, exponent notation elsewhere.
fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !a.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn cmd_bode(args: &BodeArgs) -> anyhow::Result<u8> {
    let system = load_system(&args.system)?;
    let reduced = args.reduced.as_deref().map(load_model).transpose()?;
    let (p, m) = (system.outputs(), system.inputs());
    let sample = |tf: &dyn TransferFunction| -> anyhow::Result<_> {
        if args.omega.is_empty() {
            Ok(bode_sample(tf, args.wmin, args.wmax, args.npts)?.values)
        } else {
            args.omega
                .iter()
                .map(|&w| tf.eval(C64::new(0.0, w)).map_err(|e| anyhow::anyhow!("omega = {w}: {e}")))
                .collect()
        }
    };
    let omegas = if args.omega.is_empty() { log_grid(args.wmin, args.wmax, args.npts)? } else { args.omega.clone() };
    let full = sample(&system)?;
    let red = reduced.as_ref().map(|r| sample(r)).transpose()?;
    let mut header = vec!["omega".to_string()];
    let pairs: Vec<(usize, usize)> = (0..p).flat_map(|i| (0..m).map(move |j| (i, j))).collect();
    let mut groups = vec!["G"];
    if red.is_some() {
        groups.extend(["Gr", "err"]);
    }
    for g in &groups {
        for (i, j) in &pairs {
            header.push(format!("abs_{g}_{}_{}", i + 1, j + 1));
        }
    }
    let mut csv = header.join(",");
    csv.push('\n');
    for (k, w) in omegas.iter().enumerate() {
        let mut row = vec![num(*w)];
        row.extend(pairs.iter().map(|&(i, j)| num(full[k][(i, j)].norm())));
        if let Some(r) = &red {
            row.extend(pairs.iter().map(|&(i, j)| num(r[k][(i, j)].norm())));
            row.extend(pairs.iter().map(|&(i, j)| num((full[k][(i, j)] - r[k][(i, j)]).norm())));
        }
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    emit(args.out.as_deref(), &csv)?;
    Ok(0)
}

#[derive(Serialize)]
struct VerifyReport {
    format_version: u32,
    tol: f64,
    pass: bool,
    interpolation: InterpolationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    h2_first_order: Option<InterpolationReport>,
}

fn cmd_verify(args: &VerifyArgs) -> anyhow::Result<u8> {
    let system = load_system(&args.system)?;
    let model = load_model(&args.reduced)?;
    let data = match &args.shifts {
        Some(p) => ShiftFile::read(p)?,
        None => match model.provenance.data.clone() {
            Some(d) => d,
            None => bail!("model carries no interpolation data; pass --shifts"),
        },
    };
    let interpolation = verify_interpolation_with_tol(&system, &model, &data, &[0, 1], args.tol)?;
    let h2 = args.h2.then(|| check_h2_first_order(&system, &model, args.tol)).transpose()?;
    let pass = interpolation.pass && h2.as_ref().is_none_or(|r| r.pass);
    let report = VerifyReport { format_version: 1, tol: args.tol, pass, interpolation, h2_first_order: h2 };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    emit(args.out.as_deref(), &text)?;
    Ok(if pass { 0 } else { EXIT_ERROR })
}

#[derive(Serialize)]
struct Spectral {
    n_f: usize,
    n_inf: usize,
    index: usize,
    polynomial_degree: Option<usize>,
    /// Coefficients `P_0, P_1, ...`, each row-major.
    polynomial: Vec<Vec<Vec<f64>>>,
}

#[derive(Serialize)]
struct Info {
    order: usize,
    inputs: usize,
    outputs: usize,
    structure: StructureKind,
    sparse: bool,
    nnz_e: usize,
    nnz_a: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    spectral: Option<Spectral>,
    #[serde(skip_serializing_if = "Option::is_none")]
    notice: Option<String>,
}

fn cmd_info(args: &InfoArgs) -> anyhow::Result<u8> {
    let system = load_system(&args.system)?;
    let n = system.order();
    let limit = dense_limit();
    let (spectral, notice) = if n <= limit {
        let w = weierstrass(&system)?;
        let (_, poly) = split_transfer(&system, &w)?;
        let coeffs = poly
            .coeffs()
            .iter()
            .map(|c| (0..c.nrows()).map(|i| c.row(i).iter().cloned().collect()).collect())
            .collect();
        (Some(Spectral { n_f: w.n_f, n_inf: w.n_inf, index: w.nu, polynomial_degree: poly.degree(), polynomial: coeffs }), None)
    } else {
        (None, Some(format!("spectral analysis skipped: order {n} exceeds the dense limit {limit}")))
    };
    let info = Info {
        order: n,
        inputs: system.inputs(),
        outputs: system.outputs(),
        structure: system.structure,
        sparse: system.e.is_sparse() || system.a.is_sparse(),
        nnz_e: system.e.nnz(),
        nnz_a: system.a.nnz(),
        spectral,
        notice,
    };
    if args.json {
        let mut text = serde_json::to_string_pretty(&info)?;
        text.push('\n');
        emit(None, &text)?;
        return Ok(0);
    }
    let mut out = format!(
        "order: {}\ninputs: {}\noutputs: {}\nstructure: {}\nstorage: {} (nnz E = {}, nnz A = {})\n",
        info.order,
        info.inputs,
        info.outputs,
        info.structure.name(),
        if info.sparse { "sparse" } else { "dense" },
        info.nnz_e,
        info.nnz_a
    );
    if let Some(s) = &info.spectral {
        out.push_str(&format!("finite dimension n_f: {}\ninfinite dimension n_inf: {}\nindex nu: {}\n", s.n_f, s.n_inf, s.index));
        match s.polynomial_degree {
            None => out.push_str("polynomial part: zero\n"),
            Some(0) => out.push_str("polynomial part: constant\n"),
            Some(d) => out.push_str(&format!("polynomial part: degree {d}\n")),
        }
        for (k, c) in s.polynomial.iter().enumerate() {
            out.push_str(&format!("  P{k} = {c:?}\n"));
        }
    }
    if let Some(msg) = &info.notice {
        out.push_str(msg);
        out.push('\n');
    }
    emit(None, &out)?;
    Ok(0)
}

fn cmd_generate(args: &GenerateArgs) -> anyhow::Result<u8> {
    let params = SyntheticParams { n1: args.n1, n2: args.n2, m: args.m, p: args.p, seed: args.seed };
    let system = generate_synthetic(args.kind, &params)?;
    let metadata = ManifestMetadata {
        name: Some(format!("{}-n1-{}-n2-{}-seed-{}", args.kind.name(), args.n1, args.n2, args.seed)),
        units: None,
        source: Some("dmor generate".into()),
    };
    let path = save_system(&system, &args.out, metadata)?;
    println!("{}", path.display());
    Ok(0)
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().context("configuring the thread pool")?;
    }
    match &cli.command {
        Command::Reduce(a) => cmd_reduce(a),
        Command::Bode(a) => cmd_bode(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Info(a) => cmd_info(a),
        Command::Generate(a) => cmd_generate(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
