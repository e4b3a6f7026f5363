//! One function per subcommand, all returning a typed error that carries the
//! process exit code.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use bellows_core::collapse::{
    build_hereditary_ordering, collapse_below, verify_collapse_detailed, CollapseError,
    CollapseSequence, TieBreak,
};
use bellows_core::complex::Complex;
use bellows_core::flex::{bellows_verify, bricard_octahedron, flex_trace, FlexError, FlexTrace};
use bellows_core::geometry::quadrature::{
    oriented_simplex_volume, volume_kernel, KernelValue, QuadratureSpec, VolumeValue,
};
use bellows_core::geometry::{Configuration, Space};
use bellows_core::gram::{
    collapse_certificate, random_low_rank_gram, select_kappa, threshold_graph, GramMatrix,
};
use bellows_core::homology::cone_over_vertex;
use bellows_core::polyhedra::{
    generalized_volume, phi_via_collapse, CyclePolyhedron, EdgeLengths, PhiReport, PolyVolume,
    PolyhedraError,
};
use bellows_core::rng::derive_seed;
use bellows_core::simplex::Simplex;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::manifest::{write_json, write_text_with_manifest, RunManifest, SCHEMA};
use crate::{
    BellowsArgs, CollapseArgs, Command, FlexArgs, KappaArgs, MethodArg, PipelineArg, PolyVolumeArgs,
    RandgramArgs, SimplexVolumeArgs, SpaceArg, Thm51Args,
};

#[derive(Debug, thiserror::Error)]
pub enum CmdError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
    #[error("{0}")]
    Math(String),
    #[error("not a flexion: {0}")]
    NotAFlexion(String),
}

impl CmdError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CmdError::Usage(_) | CmdError::Io { .. } | CmdError::Parse { .. } => 1,
            CmdError::Math(_) => 2,
            CmdError::NotAFlexion(_) => 3,
        }
    }
}

pub fn run(command: Command) -> Result<(), CmdError> {
    match command {
        Command::Collapse(args) => cmd_collapse(args),
        Command::Kappa(args) => cmd_kappa(args),
        Command::Thm51(args) => cmd_thm51(args),
        Command::SimplexVolume(args) => cmd_simplex_volume(args),
        Command::PolyVolume(args) => cmd_poly_volume(args),
        Command::Flex(args) => cmd_flex(args),
        Command::Bellows(args) => cmd_bellows(args),
        Command::Randgram(args) => cmd_randgram(args),
    }
}

// ---------------------------------------------------------------- plumbing

fn read_bytes(path: &Path) -> Result<Vec<u8>, CmdError> {
    fs::read(path).map_err(|source| CmdError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_json<T: DeserializeOwned>(path: &Path, bytes: &[u8]) -> Result<T, CmdError> {
    serde_json::from_slice(bytes).map_err(|source| CmdError::Parse {
        path: path.display().to_string(),
        source,
    })
}

fn write_output<T: Serialize>(out: Option<&Path>, value: &T) -> Result<(), CmdError> {
    write_json(out, value).map_err(|source| CmdError::Io {
        path: out
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| "<stdout>".to_string()),
        source,
    })
}

fn write_csv(path: &Path, text: &str, manifest: &RunManifest) -> Result<(), CmdError> {
    write_text_with_manifest(path, text, manifest).map_err(|source| CmdError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Input-shape problems in a parsed value are usage errors; everything the
/// mathematics itself rejects is a math failure.
fn collapse_exit(e: CollapseError) -> CmdError {
    match e {
        CollapseError::BadRank { .. } | CollapseError::GramTooSmall { .. } => {
            CmdError::Usage(e.to_string())
        }
        _ => CmdError::Math(e.to_string()),
    }
}

fn poly_exit(e: PolyhedraError) -> CmdError {
    match e {
        PolyhedraError::WrongVertexCount { .. }
        | PolyhedraError::VertexOutOfRange { .. }
        | PolyhedraError::BadModel => CmdError::Usage(e.to_string()),
        _ => CmdError::Math(e.to_string()),
    }
}

fn flex_exit(e: FlexError) -> CmdError {
    match e {
        FlexError::BadStep { .. } | FlexError::BadScale { .. } => CmdError::Usage(e.to_string()),
        FlexError::Poly(inner) => poly_exit(inner),
        _ => CmdError::Math(e.to_string()),
    }
}

fn math<E: std::fmt::Display>(e: E) -> CmdError {
    CmdError::Math(e.to_string())
}

/// Accepts either a bare Gram matrix or any object wrapping one under "gram"
/// (so randgram output files feed straight back in).
fn parse_gram(path: &Path, bytes: &[u8]) -> Result<GramMatrix, CmdError> {
    let value: serde_json::Value = parse_json(path, bytes)?;
    let candidate = match value.get("gram") {
        Some(inner) => inner.clone(),
        None => value,
    };
    serde_json::from_value(candidate).map_err(|source| CmdError::Parse {
        path: path.display().to_string(),
        source,
    })
}

fn space_of(arg: SpaceArg) -> Space {
    match arg {
        SpaceArg::Sphere => Space::Sphere,
        SpaceArg::Hyperbolic => Space::Hyperbolic,
    }
}

// ---------------------------------------------------------------- collapse

#[derive(Deserialize)]
struct CollapseInput {
    m: u32,
    maximal: Vec<Vec<u32>>,
    gram: GramMatrix,
    #[serde(default)]
    r: Option<u32>,
}

#[derive(Serialize)]
struct CollapseOutput {
    schema: &'static str,
    manifest: RunManifest,
    m: u32,
    r: u32,
    tie_break: TieBreak,
    ordering_hash: String,
    step_count: usize,
    residual_dim: i32,
    replay_ok: bool,
    sequence: CollapseSequence,
}

fn cmd_collapse(args: CollapseArgs) -> Result<(), CmdError> {
    let bytes = read_bytes(&args.input)?;
    let input: CollapseInput = parse_json(&args.input, &bytes)?;
    let r = args.r.or(input.r).ok_or_else(|| {
        CmdError::Usage("no collapse threshold: pass --r or put \"r\" in the input".to_string())
    })?;
    let mut simplices = Vec::with_capacity(input.maximal.len());
    for verts in &input.maximal {
        let s = Simplex::new(verts.clone())
            .map_err(|e| CmdError::Usage(format!("bad simplex {verts:?}: {e}")))?;
        simplices.push(s);
    }
    let k = Complex::from_maximal(input.m, simplices);
    let ord =
        build_hereditary_ordering(&k, &input.gram, TieBreak::LexMin).map_err(collapse_exit)?;
    let sequence = collapse_below(&k, &ord, r).map_err(collapse_exit)?;
    let replay_ok = verify_collapse_detailed(&k, &sequence).is_ok();
    if !replay_ok {
        return Err(CmdError::Math(
            "collapse sequence failed its own replay".to_string(),
        ));
    }
    let output = CollapseOutput {
        schema: SCHEMA,
        manifest: RunManifest::new("collapse")
            .with_input(&args.input, &bytes)
            .with_tol("r", r as f64),
        m: input.m,
        r,
        tie_break: TieBreak::LexMin,
        ordering_hash: format!("{:016x}", ord.order_hash()),
        step_count: sequence.steps.len(),
        residual_dim: sequence.residual.dim(),
        replay_ok,
        sequence,
    };
    write_output(args.out.as_deref(), &output)
}

// ---------------------------------------------------------------- kappa

#[derive(Serialize)]
struct KappaOutput {
    schema: &'static str,
    manifest: RunManifest,
    m: usize,
    r: u32,
    log2_kappa: f64,
    gap_ok: bool,
    edge_count: usize,
    edges: Vec<(u32, u32)>,
}

fn cmd_kappa(args: KappaArgs) -> Result<(), CmdError> {
    let bytes = read_bytes(&args.input)?;
    let g = parse_gram(&args.input, &bytes)?;
    let kappa = select_kappa(&g, args.r).map_err(math)?;
    let edges = threshold_graph(&g, kappa.log2_kappa);
    let output = KappaOutput {
        schema: SCHEMA,
        manifest: RunManifest::new("kappa").with_input(&args.input, &bytes),
        m: g.m(),
        r: args.r,
        log2_kappa: kappa.log2_kappa,
        gap_ok: kappa.gap_ok,
        edge_count: edges.len(),
        edges,
    };
    write_output(args.out.as_deref(), &output)
}

// ---------------------------------------------------------------- thm51

fn cmd_thm51(args: Thm51Args) -> Result<(), CmdError> {
    if args.m < 2 {
        return Err(CmdError::Usage(format!("m must be at least 2, got {}", args.m)));
    }
    if args.rank < 1 || args.rank > args.m {
        return Err(CmdError::Usage(format!(
            "rank must lie in 1..={}, got {}",
            args.m, args.rank
        )));
    }
    if args.rank as u32 > 2 * args.r {
        return Err(CmdError::Usage(format!(
            "rank {} exceeds 2r = {}; the collapse hypothesis needs rank <= 2r",
            args.rank,
            2 * args.r
        )));
    }
    let mut csv = String::from(
        "trial,seed,status,log2_kappa,numerical_rank,edge_count,simplex_count,step_count,residual_dim,replay_ok,note\n",
    );
    let mut failures = 0usize;
    for trial in 0..args.trials {
        let seed = derive_seed(args.seed, &format!("trial/{trial}"));
        let g = random_low_rank_gram(args.m, args.rank, seed);
        match collapse_certificate(&g, args.r) {
            Ok(report) => {
                let ok = report.replay_ok && report.residual_dim < args.r as i32;
                if !ok {
                    failures += 1;
                }
                let note = if report.replay_ok { "" } else { "replay failed" };
                let rank = report
                    .numerical_rank
                    .map(|k| k.to_string())
                    .unwrap_or_default();
                writeln!(
                    csv,
                    "{trial},{seed},{},{},{rank},{},{},{},{},{},{note}",
                    if ok { "pass" } else { "fail" },
                    report.kappa.log2_kappa,
                    report.edge_count,
                    report.simplex_count,
                    report.step_count,
                    report.residual_dim,
                    report.replay_ok,
                )
                .expect("string write");
            }
            Err(e) => {
                failures += 1;
                let note = e.to_string().replace(',', ";");
                writeln!(csv, "{trial},{seed},fail,,,,,,,,{note}").expect("string write");
            }
        }
    }
    let manifest = RunManifest::new("thm51").with_seed(args.seed).with_tol(
        "residual_dim_max",
        args.r as f64 - 1.0,
    );
    match &args.out {
        Some(path) => write_csv(path, &csv, &manifest)?,
        None => print!("{csv}"),
    }
    eprintln!(
        "thm51: {}/{} trials passed",
        args.trials - failures,
        args.trials
    );
    if failures > 0 {
        return Err(CmdError::Math(format!(
            "{failures} of {} trials failed",
            args.trials
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------- volumes

fn quadrature_for(
    method: MethodArg,
    order: usize,
    samples: usize,
    seed: u64,
    tol: Option<f64>,
) -> QuadratureSpec {
    let mut quad = match method {
        MethodArg::Laguerre => QuadratureSpec::laguerre(order),
        MethodArg::MonteCarlo => QuadratureSpec::monte_carlo(samples, seed),
    };
    if let Some(t) = tol {
        quad.target_rel_tol = t;
    }
    quad
}

#[derive(Serialize)]
struct SimplexVolumeOutput {
    schema: &'static str,
    manifest: RunManifest,
    space: Space,
    n: usize,
    points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    volume: Option<VolumeValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kernel: Option<KernelValue>,
}

fn cmd_simplex_volume(args: SimplexVolumeArgs) -> Result<(), CmdError> {
    let bytes = read_bytes(&args.config)?;
    let config: Configuration = parse_json(&args.config, &bytes)?;
    let quad = quadrature_for(args.method, args.order, args.samples, args.seed, args.tol);
    let (volume, kernel) = if config.space().is_real() {
        let v = oriented_simplex_volume(config.points(), &quad).map_err(math)?;
        (Some(v), None)
    } else {
        let k = volume_kernel(config.points(), &quad).map_err(math)?;
        (None, Some(k))
    };
    let mut manifest = RunManifest::new("simplex-volume")
        .with_input(&args.config, &bytes)
        .with_tol("target_rel_tol", quad.target_rel_tol);
    if args.method == MethodArg::MonteCarlo {
        manifest = manifest.with_seed(args.seed);
    }
    let output = SimplexVolumeOutput {
        schema: SCHEMA,
        manifest,
        space: config.space(),
        n: config.n(),
        points: config.m(),
        volume,
        kernel,
    };
    write_output(args.out.as_deref(), &output)
}

#[derive(Serialize)]
struct PolyVolumeOutput {
    schema: &'static str,
    manifest: RunManifest,
    space: Space,
    n: usize,
    m: u32,
    pipeline: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    volume: Option<PolyVolume>,
    #[serde(skip_serializing_if = "Option::is_none")]
    phi: Option<PhiReport>,
}

fn cmd_poly_volume(args: PolyVolumeArgs) -> Result<(), CmdError> {
    let poly_bytes = read_bytes(&args.poly)?;
    let poly: CyclePolyhedron = parse_json(&args.poly, &poly_bytes)?;
    let config_bytes = read_bytes(&args.config)?;
    let config: Configuration = parse_json(&args.config, &config_bytes)?;
    let quad = QuadratureSpec::laguerre(args.order);
    let manifest = RunManifest::new("poly-volume")
        .with_input(&args.poly, &poly_bytes)
        .with_input(&args.config, &config_bytes)
        .with_tol("target_rel_tol", quad.target_rel_tol);
    let (volume, phi, pipeline) = match args.pipeline {
        PipelineArg::Chain => {
            let apex = *poly
                .complex()
                .vertex_ids()
                .first()
                .ok_or_else(|| CmdError::Usage("polyhedron has no vertices".to_string()))?;
            let eta = cone_over_vertex(poly.xi(), apex);
            let v = generalized_volume(&poly, &eta, &config, &quad).map_err(poly_exit)?;
            (Some(v), None, "chain")
        }
        PipelineArg::Collapse => {
            let model = match (args.model, config.space()) {
                (Some(flag), _) => space_of(flag),
                (None, s) if s.is_real() => s,
                (None, _) => {
                    return Err(CmdError::Usage(
                        "--model is required for a complex configuration".to_string(),
                    ))
                }
            };
            let report = phi_via_collapse(&poly, &config, model, &quad).map_err(poly_exit)?;
            (None, Some(report), "collapse")
        }
    };
    let output = PolyVolumeOutput {
        schema: SCHEMA,
        manifest,
        space: config.space(),
        n: config.n(),
        m: poly.m(),
        pipeline,
        volume,
        phi,
    };
    write_output(args.out.as_deref(), &output)
}

// ---------------------------------------------------------------- flexions

/// Self-contained trace bundle: everything `bellows --trace` needs to verify.
#[derive(Serialize, Deserialize)]
struct FlexBundle {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schema: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    manifest: Option<RunManifest>,
    poly: CyclePolyhedron,
    lengths: EdgeLengths,
    trace: FlexTrace,
}

fn write_trace_files(
    bundle: &FlexBundle,
    out: Option<&Path>,
    csv: Option<&Path>,
    manifest: &RunManifest,
) -> Result<(), CmdError> {
    write_output(out, bundle)?;
    if let Some(path) = csv {
        write_csv(path, &bundle.trace.to_csv(), manifest)?;
    }
    Ok(())
}

fn cmd_flex(args: FlexArgs) -> Result<(), CmdError> {
    let poly_bytes = read_bytes(&args.poly)?;
    let poly: CyclePolyhedron = parse_json(&args.poly, &poly_bytes)?;
    let lengths_bytes = read_bytes(&args.lengths)?;
    let lengths: EdgeLengths = parse_json(&args.lengths, &lengths_bytes)?;
    let config_bytes = read_bytes(&args.config)?;
    let config: Configuration = parse_json(&args.config, &config_bytes)?;
    let manifest = RunManifest::new("flex")
        .with_input(&args.poly, &poly_bytes)
        .with_input(&args.lengths, &lengths_bytes)
        .with_input(&args.config, &config_bytes)
        .with_tol("h", args.h);
    match flex_trace(&poly, &lengths, &config, args.steps, args.h) {
        Ok(trace) => {
            let bundle = FlexBundle {
                schema: Some(SCHEMA.to_string()),
                manifest: Some(manifest.clone()),
                poly,
                lengths,
                trace,
            };
            write_trace_files(&bundle, args.out.as_deref(), args.csv.as_deref(), &manifest)
        }
        Err(FlexError::CorrectorDiverged { failed_step, trace }) => {
            // Keep whatever part of the path was completed: it is still a
            // valid (shorter) trace and often shows where the variety ends.
            if args.out.is_some() && !trace.is_empty() {
                let bundle = FlexBundle {
                    schema: Some(SCHEMA.to_string()),
                    manifest: Some(manifest.clone()),
                    poly,
                    lengths,
                    trace: *trace,
                };
                write_trace_files(&bundle, args.out.as_deref(), args.csv.as_deref(), &manifest)?;
            }
            Err(CmdError::Math(format!(
                "corrector diverged at step {failed_step}; partial trace written"
            )))
        }
        Err(e) => Err(flex_exit(e)),
    }
}

// ---------------------------------------------------------------- bellows

#[derive(Serialize)]
struct BellowsOutput {
    schema: &'static str,
    manifest: RunManifest,
    #[serde(skip_serializing_if = "Option::is_none")]
    space: Option<Space>,
    min_flex: f64,
    report: bellows_core::flex::BellowsReport,
}

fn cmd_bellows(args: BellowsArgs) -> Result<(), CmdError> {
    let (bundle, manifest, space) = match &args.trace {
        Some(path) => {
            let bytes = read_bytes(path)?;
            let bundle: FlexBundle = parse_json(path, &bytes)?;
            let manifest = RunManifest::new("bellows")
                .with_input(path, &bytes)
                .with_tol("constancy", args.tol)
                .with_tol("min_flex", args.min_flex);
            (bundle, manifest, None)
        }
        None => {
            let space = space_of(args.space);
            let (poly, lengths, start) =
                bricard_octahedron(space, args.scale, args.shape, args.seed).map_err(flex_exit)?;
            let trace = match flex_trace(&poly, &lengths, &start, args.steps, args.h) {
                Ok(trace) => trace,
                Err(FlexError::CorrectorDiverged { failed_step, .. }) => {
                    return Err(CmdError::Math(format!(
                        "corrector diverged at step {failed_step}"
                    )))
                }
                Err(e) => return Err(flex_exit(e)),
            };
            let manifest = RunManifest::new("bellows")
                .with_seed(args.seed)
                .with_tol("constancy", args.tol)
                .with_tol("min_flex", args.min_flex)
                .with_tol("scale", args.scale)
                .with_tol("shape", args.shape)
                .with_tol("h", args.h);
            let bundle = FlexBundle {
                schema: Some(SCHEMA.to_string()),
                manifest: Some(manifest.clone()),
                poly,
                lengths,
                trace,
            };
            if let Some(path) = &args.trace_out {
                write_output(Some(path), &bundle)?;
            }
            if let Some(path) = &args.csv {
                write_csv(path, &bundle.trace.to_csv(), &manifest)?;
            }
            (bundle, manifest, Some(space))
        }
    };
    let space = space.or(Some(bundle.trace.meta.space));
    let report = bellows_verify(&bundle.poly, &bundle.lengths, &bundle.trace, args.tol)
        .map_err(flex_exit)?;
    eprintln!("caveat: {}", report.caveat);
    let flexion = report.samples >= 2 && report.dihedral_spread > args.min_flex;
    let output = BellowsOutput {
        schema: SCHEMA,
        manifest,
        space,
        min_flex: args.min_flex,
        report,
    };
    write_output(args.out.as_deref(), &output)?;
    let report = &output.report;
    if !flexion {
        return Err(CmdError::NotAFlexion(format!(
            "dihedral swing {:.3e} rad over {} samples is below --min-flex {:.3e}",
            report.dihedral_spread, report.samples, args.min_flex
        )));
    }
    if !report.residuals_ok {
        return Err(CmdError::Math(format!(
            "constraint residual {:.3e} exceeds {:.3e}",
            report.max_residual, report.residual_tol
        )));
    }
    if !report.volume_constant {
        return Err(CmdError::Math(format!(
            "volume spread {:.3e} exceeds the constancy tolerance {:.3e}",
            report.volume_spread, report.constancy_tol
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------- randgram

#[derive(Serialize)]
struct RandgramOutput {
    schema: &'static str,
    manifest: RunManifest,
    m: usize,
    rank_bound: usize,
    gram: GramMatrix,
}

fn cmd_randgram(args: RandgramArgs) -> Result<(), CmdError> {
    if args.m < 1 || args.rank < 1 || args.rank > args.m {
        return Err(CmdError::Usage(format!(
            "need 1 <= rank <= m, got rank {} and m {}",
            args.rank, args.m
        )));
    }
    let gram = random_low_rank_gram(args.m, args.rank, args.seed);
    let output = RandgramOutput {
        schema: SCHEMA,
        manifest: RunManifest::new("randgram").with_seed(args.seed),
        m: args.m,
        rank_bound: args.rank,
        gram,
    };
    write_output(args.out.as_deref(), &output)
}
