//! `bootperc`: simulate bootstrap percolation on two-community random
//! graphs, compute the analytic phase diagram, and cross-validate the two.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime error. Machine-readable
//! output goes to `--out`; the human summary goes to standard output.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use bootperc_core::chain::{ChainOptions, RunRecord};
use bootperc_core::experiments::{
    convergence_study, empirical_phase_boundary, instantiate_er, instantiate_point, presets,
    resolve_strategy, run_experiment_streaming, run_replicas, write_manifest, ExperimentConfig,
    FiniteInstance, SimMode,
};
use bootperc_core::phase::{
    classify, critical_curve, er_subcritical_limit, windowed_y1_grid, AsymptoticParams,
    CurveFamily,
};
use bootperc_core::binom::{binom_lower_tail, binom_upper_tail, binomial_tail_bound, TailDirection};
use bootperc_core::rng::RNG_ALGORITHM_ID;
use bootperc_core::sbm::{generate_graph, sample_seeds, ModelParams};

#[derive(Parser)]
#[command(
    name = "bootperc",
    version,
    about = "Bootstrap percolation on two-community random graphs: simulation and phase analysis"
)]
struct Cli {
    /// Master RNG seed.
    #[arg(long, global = true, default_value_t = 0xB007_5EED)]
    seed: u64,
    /// Path for machine-readable output (CSV/JSON, subcommand dependent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for replica runs (0 = auto).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph instance and dump it as an edge list.
    Generate(GenerateArgs),
    /// Run Monte Carlo replicas on one instance and summarize the final size.
    Run(RunArgs),
    /// Classify the phase regime of asymptotic parameters.
    Classify(AsymArgs),
    /// Emit the analytic critical curve as CSV.
    PhaseCurve(PhaseCurveArgs),
    /// Run a config-driven sweep over a parameter grid.
    Sweep(SweepArgs),
    /// Finite-size convergence study along an n-ladder.
    Converge(ConvergeArgs),
    /// Evaluate binomial tail bounds against exact tails.
    Bounds(BoundsArgs),
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    n1: u64,
    #[arg(long, default_value_t = 0)]
    n2: u64,
    #[arg(long)]
    p1: f64,
    #[arg(long, default_value_t = 0.0)]
    p2: f64,
    #[arg(long, default_value_t = 0.0)]
    q: f64,
    #[arg(long, default_value_t = 2)]
    r: u32,
    #[arg(long, default_value_t = 0)]
    a1: u64,
    #[arg(long, default_value_t = 0)]
    a2: u64,
}

impl ModelArgs {
    fn params(&self) -> ModelParams {
        ModelParams {
            n1: self.n1,
            n2: self.n2,
            p1: self.p1,
            p2: self.p2,
            q: self.q,
            r: self.r,
            a1: self.a1,
            a2: self.a2,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Also dump the sampled seed set as comment lines.
    #[arg(long)]
    dump_seeds: bool,
}

#[derive(Args)]
struct RunArgs {
    /// Named instance preset: fig1 | fig2 | fig3 | er.
    #[arg(long)]
    preset: Option<String>,
    /// Explicit node count for community 1 (presets only).
    #[arg(long, default_value_t = 200_000)]
    n1: u64,
    /// Target critical scale g1 (presets only).
    #[arg(long, default_value_t = 100.0)]
    g1: f64,
    #[arg(long, default_value_t = 2)]
    r: u32,
    #[arg(long)]
    alpha1: Option<f64>,
    #[arg(long)]
    alpha2: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    nu: f64,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[arg(long, default_value_t = 200)]
    replicas: u64,
    /// max | roundrobin | hybrid.
    #[arg(long, default_value = "max")]
    strategy: String,
    /// lazy | graph | cascade.
    #[arg(long, default_value = "lazy")]
    mode: String,
    /// Record (t, U1, U2, A1, A2) snapshots at this stride.
    #[arg(long)]
    trajectory_stride: Option<u64>,
}

#[derive(Args)]
struct AsymArgs {
    #[arg(long, default_value_t = 2)]
    r: u32,
    #[arg(long)]
    gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    nu: f64,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[arg(long)]
    alpha1: f64,
    #[arg(long)]
    alpha2: f64,
}

#[derive(Args)]
struct PhaseCurveArgs {
    #[arg(long, default_value_t = 2)]
    r: u32,
    #[arg(long, default_value_t = 0.25)]
    gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    nu: f64,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    /// Grid resolution along the curve parameter.
    #[arg(long, default_value_t = 512)]
    points: usize,
    /// Emit a whole family: gammavary | rvary | nuvary | muvary.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    /// Path to a JSON experiment config (schema in the README).
    #[arg(long)]
    config: PathBuf,
    /// Also emit the empirical 50% contour and the analytic curve
    /// (requires an alpha grid).
    #[arg(long)]
    boundary: bool,
    /// Manifest path (defaults to <out>.manifest.json when --out is set).
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergeArgs {
    #[arg(long, default_value_t = 2)]
    r: u32,
    #[arg(long, default_value_t = 0.25)]
    gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    nu: f64,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[arg(long, default_value_t = 0.2)]
    alpha1: f64,
    #[arg(long, default_value_t = 0.2)]
    alpha2: f64,
    #[arg(long, default_value_t = 0.3)]
    x1: f64,
    #[arg(long, default_value_t = 0.2)]
    x2: f64,
    /// Comma-separated community-1 sizes.
    #[arg(long, default_value = "10000,100000,1000000,10000000", value_delimiter = ',')]
    ladder: Vec<u64>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    m: u64,
    #[arg(long)]
    q: f64,
    #[arg(long)]
    k: f64,
    /// upper | lower | upper-far.
    #[arg(long, default_value = "upper")]
    direction: String,
}

fn open_out(path: &PathBuf) -> Result<BufWriter<File>, String> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| format!("{}: {e}", path.display()))
}

fn print_resolved<T: serde::Serialize>(label: &str, value: &T) {
    println!(
        "resolved config [{label}]: {}",
        serde_json::to_string(value).unwrap_or_else(|_| "<unprintable>".into())
    );
}

fn summarize(records: &[RunRecord], instance: &FiniteInstance, threshold: f64) -> (f64, f64, f64) {
    let g1 = instance.scale.g1;
    let n = instance.params.n() as f64;
    let mut ratios: Vec<f64> = records.iter().map(|r| r.final_active as f64 / g1).collect();
    ratios.sort_by(f64::total_cmp);
    let median = ratios[(ratios.len() - 1) / 2];
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let perc = records
        .iter()
        .filter(|r| r.final_active as f64 / n >= threshold)
        .count() as f64
        / records.len() as f64;
    (mean, median, perc)
}

fn cmd_generate(cli: &Cli, args: &GenerateArgs) -> Result<(), String> {
    let params = args.model.params();
    print_resolved("generate", &params);
    let report = params.validate().map_err(|e| e.to_string())?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let graph = generate_graph(&params, cli.seed).map_err(|e| e.to_string())?;
    let seeds = sample_seeds(&params, cli.seed).map_err(|e| e.to_string())?;
    println!(
        "generated graph: n = {}, undirected edges = {}, seeds = {}",
        graph.node_count(),
        graph.edge_count(),
        seeds.total()
    );
    if let Some(path) = &cli.out {
        let mut w = open_out(path)?;
        graph
            .write_edge_list(&mut w, cli.seed)
            .and_then(|_| {
                if args.dump_seeds {
                    writeln!(
                        w,
                        "# seeds1 {:?}\n# seeds2 {:?}",
                        seeds.community1, seeds.community2
                    )?;
                }
                Ok(())
            })
            .map_err(|e| e.to_string())?;
        println!("edge list written to {}", path.display());
    }
    Ok(())
}

type Reference = Option<(String, f64)>;

fn run_instance(args: &RunArgs) -> Result<(FiniteInstance, Option<AsymptoticParams>, Reference), String> {
    match args.preset.as_deref() {
        Some("er") => {
            let alpha1 = args.alpha1.unwrap_or(0.5);
            let inst = instantiate_er(args.r, alpha1, args.g1, args.n1).map_err(|e| e.to_string())?;
            let reference = er_subcritical_limit(args.r, alpha1).ok().map(|e| {
                (
                    format!(
                        "|G|/a1 -> {:.6} (equivalently |G|/g1 -> {:.6})",
                        e.limit, e.size_over_scale
                    ),
                    e.limit,
                )
            });
            Ok((inst, None, reference))
        }
        Some(name) => {
            let (family, alpha) = presets::figure_point(name)
                .ok_or_else(|| format!("unknown preset '{name}' (fig1|fig2|fig3|er)"))?;
            let alpha = (
                args.alpha1.unwrap_or(alpha.0),
                args.alpha2.unwrap_or(alpha.1),
            );
            let inst =
                instantiate_point(&family, alpha, args.g1, args.n1).map_err(|e| e.to_string())?;
            let asym =
                AsymptoticParams::new(family.nu, family.mu, family.gamma, family.r, alpha.0, alpha.1)
                    .map_err(|e| e.to_string())?;
            let reference = classify(&asym)
                .fixed_point
                .map(|fp| (format!("|G|/g1 -> {:.6}", fp.final_size_limit), fp.final_size_limit));
            Ok((inst, Some(asym), reference))
        }
        None => {
            let gamma = args
                .gamma
                .ok_or_else(|| "either --preset or --gamma/--alpha1/--alpha2".to_string())?;
            let alpha1 = args.alpha1.ok_or_else(|| "--alpha1 required".to_string())?;
            let alpha2 = args.alpha2.ok_or_else(|| "--alpha2 required".to_string())?;
            let family = CurveFamily {
                r: args.r,
                gamma,
                nu: args.nu,
                mu: args.mu,
            };
            let inst = instantiate_point(&family, (alpha1, alpha2), args.g1, args.n1)
                .map_err(|e| e.to_string())?;
            let asym = AsymptoticParams::new(args.nu, args.mu, gamma, args.r, alpha1, alpha2)
                .map_err(|e| e.to_string())?;
            let reference = classify(&asym)
                .fixed_point
                .map(|fp| (format!("|G|/g1 -> {:.6}", fp.final_size_limit), fp.final_size_limit));
            Ok((inst, Some(asym), reference))
        }
    }
}

fn cmd_run(cli: &Cli, args: &RunArgs) -> Result<(), String> {
    let (instance, asym, reference) = run_instance(args)?;
    print_resolved("run", &instance);
    let mode = match args.mode.as_str() {
        "lazy" => SimMode::Lazy,
        "graph" => SimMode::Graph,
        "cascade" => SimMode::Cascade,
        other => return Err(format!("unknown mode '{other}'")),
    };
    let strategy =
        resolve_strategy(&args.strategy, &instance, asym.as_ref()).map_err(|e| e.to_string())?;
    let opts = match args.trajectory_stride {
        Some(stride) => ChainOptions::with_trajectory(stride),
        None => ChainOptions::default(),
    };
    let records: Vec<RunRecord> = run_replicas(
        &instance.params,
        mode,
        &strategy,
        args.replicas,
        cli.seed,
        0,
        cli.workers,
        &opts,
    )
    .into_iter()
    .collect::<Result<_, _>>()
    .map_err(|e| e.to_string())?;
    let (mean, median, perc) = summarize(&records, &instance, 0.95);
    println!(
        "replicas = {}, mean |G|/g1 = {mean:.4}, median |G|/g1 = {median:.4}, percolation fraction (>=0.95 n) = {perc:.3}",
        records.len()
    );
    if let Some((label, _)) = &reference {
        println!("theoretical final-size reference: {label}");
    }
    if let Some(asym) = &asym {
        let d = classify(asym);
        println!("predicted regime = {}", d.regime);
    }
    println!("rng algorithm = {RNG_ALGORITHM_ID}, master seed = {}", cli.seed);
    if let Some(path) = &cli.out {
        let mut w = open_out(path)?;
        for rec in &records {
            serde_json::to_writer(&mut w, rec).map_err(|e| e.to_string())?;
            writeln!(w).map_err(|e| e.to_string())?;
        }
        println!("run records (JSONL) written to {}", path.display());
    }
    Ok(())
}

fn cmd_classify(cli: &Cli, args: &AsymArgs) -> Result<(), String> {
    let asym = AsymptoticParams::new(args.nu, args.mu, args.gamma, args.r, args.alpha1, args.alpha2)
        .map_err(|e| e.to_string())?;
    print_resolved("classify", &asym);
    let d = classify(&asym);
    println!("regime={}", d.regime);
    println!("assortativity={:?} det_chi={}", d.assortativity, d.det_chi);
    if let Some((lo, hi)) = d.curve_endpoints {
        println!("curve_domain=[{lo}, {hi}]");
    }
    if let Some(m) = d.min_rho_on_curve {
        println!("min_rho_on_curve={m}");
    }
    if let Some(fp) = &d.fixed_point {
        println!(
            "fixed_point: z={} zeta(z)={} final_size_limit={}",
            fp.x1, fp.x2, fp.final_size_limit
        );
    }
    if let Some(path) = &cli.out {
        let mut w = open_out(path)?;
        serde_json::to_writer_pretty(&mut w, &d).map_err(|e| e.to_string())?;
        println!("diagnosis written to {}", path.display());
    }
    Ok(())
}

fn write_curve(
    w: &mut dyn Write,
    family: &CurveFamily,
    points: usize,
    label: Option<&str>,
) -> Result<(), String> {
    let chi = family.chi();
    writeln!(
        w,
        "# r={} gamma={} nu={} mu={} det_chi={} branch={}{}",
        family.r,
        family.gamma,
        family.nu,
        family.mu,
        chi.det(),
        family.branch(),
        label.map(|l| format!(" label={l}")).unwrap_or_default()
    )
    .map_err(|e| e.to_string())?;
    writeln!(w, "y1,alpha1,alpha2").map_err(|e| e.to_string())?;
    for p in critical_curve(family, &windowed_y1_grid(family, points)) {
        writeln!(w, "{},{},{}", p.y1, p.alpha1, p.alpha2).map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn cmd_phase_curve(cli: &Cli, args: &PhaseCurveArgs) -> Result<(), String> {
    let families: Vec<(Option<String>, CurveFamily)> = match &args.preset {
        Some(name) => presets::curve_family_sweep(name)
            .ok_or_else(|| format!("unknown family preset '{name}'"))?
            .into_iter()
            .map(|f| {
                let label = format!("r={} gamma={} nu={} mu={}", f.r, f.gamma, f.nu, f.mu);
                (Some(label), f)
            })
            .collect(),
        None => vec![(
            None,
            CurveFamily {
                r: args.r,
                gamma: args.gamma,
                nu: args.nu,
                mu: args.mu,
            },
        )],
    };
    print_resolved("phase-curve", &families.iter().map(|(_, f)| f).collect::<Vec<_>>());
    let mut sink: Box<dyn Write> = match &cli.out {
        Some(path) => Box::new(open_out(path)?),
        None => Box::new(std::io::stdout()),
    };
    for (label, family) in &families {
        write_curve(&mut sink, family, args.points, label.as_deref())?;
    }
    if let Some(path) = &cli.out {
        println!("critical curve CSV written to {}", path.display());
    }
    Ok(())
}

fn cmd_sweep(cli: &Cli, args: &SweepArgs) -> Result<(), String> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| format!("{}: {e}", args.config.display()))?;
    let mut config = ExperimentConfig::from_json(&text).map_err(|e| e.to_string())?;
    if cli.workers != 0 {
        config.workers = cli.workers;
    }
    print_resolved("sweep", &config);
    let result = match &cli.out {
        Some(path) => {
            let mut w = open_out(path)?;
            let r = run_experiment_streaming(&config, Some(&mut w)).map_err(|e| e.to_string())?;
            println!("sweep CSV written to {}", path.display());
            r
        }
        None => {
            let mut stdout = std::io::stdout();
            run_experiment_streaming(&config, Some(&mut stdout)).map_err(|e| e.to_string())?
        }
    };
    let manifest_path = args.manifest.clone().or_else(|| {
        cli.out
            .as_ref()
            .map(|p| p.with_extension("manifest.json"))
    });
    if let Some(path) = manifest_path {
        write_manifest(&path, &config, result.rows.len()).map_err(|e| e.to_string())?;
        println!("manifest written to {}", path.display());
    }
    if args.boundary {
        let boundary = empirical_phase_boundary(&config).map_err(|e| e.to_string())?;
        let contour_path = cli
            .out
            .as_ref()
            .map(|p| p.with_extension("contour.csv"))
            .unwrap_or_else(|| PathBuf::from("contour.csv"));
        let mut w = open_out(&contour_path)?;
        writeln!(w, "alpha1,alpha2").map_err(|e| e.to_string())?;
        for (a1, a2) in &boundary.contour {
            writeln!(w, "{a1},{a2}").map_err(|e| e.to_string())?;
        }
        println!("empirical 50% contour written to {}", contour_path.display());
        let curve_path = cli
            .out
            .as_ref()
            .map(|p| p.with_extension("critical.csv"))
            .unwrap_or_else(|| PathBuf::from("critical.csv"));
        let family = CurveFamily {
            r: config.asym.r,
            gamma: config.asym.gamma,
            nu: config.asym.nu,
            mu: config.asym.mu,
        };
        let mut w = open_out(&curve_path)?;
        write_curve(&mut w, &family, 512, None)?;
        println!("analytic critical curve written to {}", curve_path.display());
    }
    println!("grid points: {}", result.rows.len());
    Ok(())
}

fn cmd_converge(cli: &Cli, args: &ConvergeArgs) -> Result<(), String> {
    let asym = AsymptoticParams::new(args.nu, args.mu, args.gamma, args.r, args.alpha1, args.alpha2)
        .map_err(|e| e.to_string())?;
    print_resolved("converge", &asym);
    let rows = convergence_study(&asym, (args.x1, args.x2), &args.ladder)
        .map_err(|e| e.to_string())?;
    let mut sink: Box<dyn Write> = match &cli.out {
        Some(path) => Box::new(open_out(path)?),
        None => Box::new(std::io::stdout()),
    };
    writeln!(sink, "n1,g1,g2,surplus_error1,surplus_error2,tail_ratio1,tail_ratio2")
        .map_err(|e| e.to_string())?;
    for row in &rows {
        writeln!(
            sink,
            "{},{},{},{},{},{},{}",
            row.n1,
            row.g1,
            row.g2,
            row.surplus_error[0],
            row.surplus_error[1],
            row.tail_ratio[0],
            row.tail_ratio[1]
        )
        .map_err(|e| e.to_string())?;
    }
    if let Some(path) = &cli.out {
        println!("convergence table written to {}", path.display());
    }
    Ok(())
}

fn cmd_bounds(cli: &Cli, args: &BoundsArgs) -> Result<(), String> {
    let direction = match args.direction.as_str() {
        "upper" => TailDirection::Upper,
        "lower" => TailDirection::Lower,
        "upper-far" => TailDirection::UpperFar,
        other => return Err(format!("unknown direction '{other}'")),
    };
    print_resolved("bounds", &(args.m, args.q, args.k, args.direction.clone()));
    let bound = binomial_tail_bound(args.m, args.q, args.k, direction).map_err(|e| e.to_string())?;
    let k_int = args.k.ceil() as u64;
    let exact = match direction {
        TailDirection::Upper | TailDirection::UpperFar => binom_upper_tail(args.m, args.q, k_int),
        TailDirection::Lower => binom_lower_tail(args.m, args.q, args.k.floor() as u64),
    };
    println!(
        "m={} q={} k={} direction={}: bound={bound:.6e}, exact_tail={exact:.6e}, bound_holds={}",
        args.m,
        args.q,
        args.k,
        args.direction,
        exact <= bound + 1e-12
    );
    if let Some(path) = &cli.out {
        let mut w = open_out(path)?;
        writeln!(w, "m,q,k,direction,bound,exact").map_err(|e| e.to_string())?;
        writeln!(
            w,
            "{},{},{},{},{},{}",
            args.m, args.q, args.k, args.direction, bound, exact
        )
        .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<(), String> {
    match &cli.command {
        Command::Generate(args) => cmd_generate(cli, args),
        Command::Run(args) => cmd_run(cli, args),
        Command::Classify(args) => cmd_classify(cli, args),
        Command::PhaseCurve(args) => cmd_phase_curve(cli, args),
        Command::Sweep(args) => cmd_sweep(cli, args),
        Command::Converge(args) => cmd_converge(cli, args),
        Command::Bounds(args) => cmd_bounds(cli, args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0u8,
                _ => 1u8,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
