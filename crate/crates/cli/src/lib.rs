//! The `cocycle` command-line tool.
//!
//! Exit status: 0 on success, 1 on numerical or internal failure, 2 on
//! invalid input (including failed preconditions), 3 when a resource cap is
//! hit.

pub mod args;
mod output;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use cocycle_core::cocycle::{fiber_bunched, TableOptions};
use cocycle_core::cones::{birkhoff_data, cone_invariance, domination_check, kappa_certificate, BirkhoffData, Cone};
use cocycle_core::pressure::{quasi_mult_search, PressureEngine, QuasiMultConstants, WeightVector};
use cocycle_core::spectrum::{gibbs_report, lyapunov_interval, spectrum_from_curve, PressureCurve, SpectrumPoint};
use cocycle_core::subshift::{enumerate_words, topological_entropy};
use cocycle_core::typicality::{search_typicality, typicality_report, HomoclinicSpec, Tolerances};
use cocycle_core::{CocycleSpec, Error, Matrix};

pub use args::Cli;
use args::{Check, Command, Common, Grid};

pub use output::sha256_hex;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("cannot read spec {path}: {source}")]
    SpecFile { path: String, source: std::io::Error },
    #[error("invalid arguments: {0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot serialize output: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::ResourceLimit { .. }) => 3,
            CliError::Core(Error::Numerical(_) | Error::Internal(_)) => 1,
            CliError::Core(_) | CliError::SpecFile { .. } | CliError::Usage(_) => 2,
            CliError::Io(_) | CliError::Output(_) => 1,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Runs a parsed command line and returns the process exit status.
pub fn run(cli: Cli) -> i32 {
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

struct Loaded {
    spec: CocycleSpec,
    hash: String,
}

fn load(common: &Common) -> Result<Loaded, CliError> {
    let bytes = std::fs::read(&common.spec).map_err(|source| CliError::SpecFile {
        path: common.spec.display().to_string(),
        source,
    })?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| usage("spec file is not UTF-8"))?;
    Ok(Loaded { spec: CocycleSpec::from_json(&text)?, hash: sha256_hex(&bytes) })
}

fn options(common: &Common) -> Result<TableOptions, CliError> {
    if common.shards == 0 {
        return Err(usage("--shards must be positive"));
    }
    if common.cap == 0 {
        return Err(usage("--cap must be positive"));
    }
    Ok(TableOptions { cap: common.cap, shards: common.shards })
}

/// Parses `A:B:STEP` into `A, A + STEP, …` up to and including `B`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let nums: Option<Vec<f64>> = parts.iter().map(|p| p.trim().parse::<f64>().ok()).collect();
    let Some([a, b, step]) = nums.as_deref().map(|v| <[f64; 3]>::try_from(v).ok()).flatten() else {
        return Err(usage(format!("--t-grid expects A:B:STEP, got {text:?}")));
    };
    if !(a.is_finite() && b.is_finite() && step.is_finite() && step > 0.0 && b >= a) {
        return Err(usage(format!("--t-grid needs finite A <= B and STEP > 0, got {text:?}")));
    }
    let count = ((b - a) / step + 1e-9).floor() as usize;
    if count > 100_000 {
        return Err(usage("--t-grid has more than 100000 points"));
    }
    Ok((0..=count).map(|i| a + i as f64 * step).collect())
}

fn grid_values(grid: &Grid, default: &[f64]) -> Result<Vec<f64>, CliError> {
    let values = match (&grid.t_grid, &grid.t) {
        (Some(g), _) => parse_grid(g)?,
        (None, Some(t)) => t.clone(),
        (None, None) => default.to_vec(),
    };
    if values.is_empty() {
        return Err(usage("the weight grid is empty"));
    }
    Ok(values)
}

/// Unit weight on every listed exterior level.
fn direction(grid: &Grid, k: usize) -> Result<Vec<f64>, CliError> {
    let mut d = vec![0.0; k];
    for &l in &grid.levels {
        if l == 0 || l > k {
            return Err(usage(format!("--levels entries must lie in 1..={k}, got {l}")));
        }
        d[l - 1] = 1.0;
    }
    Ok(d)
}

fn parse_vector(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| usage(format!("cannot parse vector {text:?}"))))
        .collect()
}

/// `orthant`, `circular:AXIS:APERTURE` or `rays:V1;V2;...`.
pub fn parse_cone(text: &str, k: usize) -> Result<Cone, CliError> {
    let text = text.trim();
    let cone = if text == "orthant" {
        Cone::orthant(k)?
    } else if let Some(rest) = text.strip_prefix("circular:") {
        let (axis, aperture) = rest
            .rsplit_once(':')
            .ok_or_else(|| usage("circular cones are written circular:AXIS:APERTURE"))?;
        let aperture: f64 = aperture.trim().parse().map_err(|_| usage(format!("cannot parse aperture {aperture:?}")))?;
        Cone::circular(parse_vector(axis)?, aperture)?
    } else if let Some(rest) = text.strip_prefix("rays:") {
        Cone::generated(rest.split(';').map(parse_vector).collect::<Result<_, _>>()?)?
    } else {
        return Err(usage(format!("unknown cone {text:?}; use orthant, circular:AXIS:APERTURE or rays:V1;V2")));
    };
    if cone.dim() != k {
        return Err(usage(format!("cone dimension {} differs from cocycle dimension {k}", cone.dim())));
    }
    Ok(cone)
}

#[derive(Serialize)]
struct PressureRow {
    t: f64,
    lower: f64,
    upper: f64,
    estimate: f64,
    n: usize,
    rigor: String,
    method: String,
}

#[derive(Serialize)]
struct SpectrumRow {
    alpha: f64,
    h: f64,
    uncertainty: f64,
    t_source: f64,
    region_flag: String,
}

impl From<&SpectrumPoint> for SpectrumRow {
    fn from(p: &SpectrumPoint) -> Self {
        SpectrumRow {
            alpha: p.alpha,
            h: p.h,
            uncertainty: p.h_uncertainty,
            t_source: p.t_source,
            region_flag: p.region.to_string(),
        }
    }
}

#[derive(Serialize)]
struct GibbsRow {
    n: usize,
    t: f64,
    h_n: f64,
    chi_n: f64,
    energy: f64,
    ratio_bound: f64,
    pressure_lower: f64,
    pressure_upper: f64,
}

#[derive(Serialize)]
struct Entropy {
    entropy: f64,
    alphabet: usize,
}

#[derive(Serialize)]
struct GeneratorBirkhoff {
    symbol: usize,
    #[serde(flatten)]
    data: BirkhoffData,
}

#[derive(Serialize)]
struct ConeReport {
    cone: Cone,
    invariant: bool,
    margin: f64,
    generators: Vec<GeneratorBirkhoff>,
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Entropy { common } => {
            let l = load(&common)?;
            let entropy = topological_entropy(l.spec.shift())?;
            let bytes = output::json("entropy", &l.hash, Entropy { entropy, alphabet: l.spec.alphabet_size() })?;
            output::emit(common.out.as_deref(), &bytes)
        }
        Command::Words { common, n, count } => {
            let l = load(&common)?;
            if n == 0 {
                return Err(usage("--n must be positive"));
            }
            let shift = l.spec.shift();
            let total = shift.word_count(n);
            let bytes = if count {
                format!("{total}\n").into_bytes()
            } else {
                let mut text = String::from("word\n");
                for w in enumerate_words(shift, n, common.cap)? {
                    text.push_str(&w.to_string());
                    text.push('\n');
                }
                text.into_bytes()
            };
            output::emit(common.out.as_deref(), &bytes)
        }
        Command::Pressure { common, grid, n, certified, kappa, gap, qm_depth } => {
            let l = load(&common)?;
            let opts = options(&common)?;
            let ts = grid_values(&grid, &[1.0])?;
            let dir = direction(&grid, l.spec.dim())?;
            let qm = match (kappa, gap) {
                (Some(_), Some(_)) => return Err(usage("--kappa and --gap are mutually exclusive")),
                (Some(k), None) => Some(QuasiMultConstants::from_kappa(k, n)?),
                (None, Some(m)) => {
                    let [level] = grid.levels[..] else {
                        return Err(usage("--gap needs a single exterior level in --levels"));
                    };
                    Some(quasi_mult_search(&l.spec, level, m, qm_depth, common.cap)?.ok_or_else(|| {
                        Error::Precondition(format!("some pair of words has no connector of length <= {m}"))
                    })?)
                }
                (None, None) => None,
            };
            let engine = PressureEngine::new(&l.spec, n, opts)?;
            let rows = ts
                .iter()
                .map(|&t| {
                    let b = engine.bracket(&WeightVector::along(&dir, t)?, qm.as_ref(), certified)?;
                    Ok(PressureRow {
                        t,
                        lower: b.lower,
                        upper: b.upper,
                        estimate: b.estimate,
                        n,
                        rigor: b.rigor.to_string(),
                        method: format!("{:?}", b.method).to_lowercase(),
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            output::emit(common.out.as_deref(), &output::csv(&rows)?)
        }
        Command::Spectrum { common, grid, n } => {
            let l = load(&common)?;
            let opts = options(&common)?;
            let ts = grid_values(&grid, &parse_grid("-8:8:0.25")?)?;
            let dir = direction(&grid, l.spec.dim())?;
            let pts = cocycle_core::spectrum::spectrum_along(&l.spec, &dir, &ts, n, opts)?;
            let rows: Vec<SpectrumRow> = pts.iter().map(SpectrumRow::from).collect();
            output::emit(common.out.as_deref(), &output::csv(&rows)?)
        }
        Command::Jsr { common, n, kappa } => {
            let l = load(&common)?;
            options(&common)?;
            let li = lyapunov_interval(&l.spec, n, kappa, common.cap)?;
            output::emit(common.out.as_deref(), &output::json("jsr", &l.hash, li)?)
        }
        Command::Gibbs { common, grid, n } => {
            let l = load(&common)?;
            let opts = options(&common)?;
            let ts = grid_values(&grid, &[1.0])?;
            let dir = direction(&grid, l.spec.dim())?;
            let mut rows = Vec::new();
            for &depth in &n {
                for &t in &ts {
                    let g = gibbs_report(&l.spec, &WeightVector::along(&dir, t)?, depth, None, opts)?;
                    rows.push(GibbsRow {
                        n: depth,
                        t,
                        h_n: g.entropy,
                        chi_n: g.chi,
                        energy: g.energy,
                        ratio_bound: g.ratio_bound,
                        pressure_lower: g.pressure.lower,
                        pressure_upper: g.pressure.upper,
                    });
                }
            }
            output::emit(common.out.as_deref(), &output::csv(&rows)?)
        }
        Command::Kappa { common, cone, n } => {
            let l = load(&common)?;
            let cone = parse_cone(&cone, l.spec.dim())?;
            let cert = kappa_certificate(&l.spec, &cone, n, common.cap)?;
            output::emit(common.out.as_deref(), &output::json("kappa", &l.hash, cert)?)
        }
        Command::Check(check) => run_check(check),
        Command::Perturb { common, grid, eps, seed, n } => {
            let l = load(&common)?;
            let opts = options(&common)?;
            let ts = grid_values(&grid, &parse_grid("-4:4:0.5")?)?;
            let dir = direction(&grid, l.spec.dim())?;
            let report = perturb(&l.spec, &dir, &ts, &eps, seed, n, opts)?;
            output::emit(common.out.as_deref(), &output::json("perturb", &l.hash, report)?)
        }
    }
}

fn run_check(check: Check) -> Result<(), CliError> {
    match check {
        Check::FiberBunched { common } => {
            let l = load(&common)?;
            let fb = fiber_bunched(&l.spec);
            output::emit(common.out.as_deref(), &output::json("check fiber-bunched", &l.hash, fb)?)
        }
        Check::Domination { common, index, n, tol } => {
            let l = load(&common)?;
            let d = domination_check(&l.spec, index, n, tol, options(&common)?)?;
            output::emit(common.out.as_deref(), &output::json("check domination", &l.hash, d)?)
        }
        Check::Cone { common, cone } => {
            let l = load(&common)?;
            let cone = parse_cone(&cone, l.spec.dim())?;
            let inv = cone_invariance(&l.spec, &cone)?;
            let generators = l
                .spec
                .generators()
                .iter()
                .enumerate()
                .map(|(symbol, g)| Ok(GeneratorBirkhoff { symbol, data: birkhoff_data(g, &cone)? }))
                .collect::<Result<Vec<_>, CliError>>()?;
            let report = ConeReport { cone, invariant: inv.invariant, margin: inv.margin, generators };
            output::emit(common.out.as_deref(), &output::json("check cone", &l.hash, report)?)
        }
        Check::Typical { common, p_word, insert, offset, tol, moduli_tol } => {
            let l = load(&common)?;
            let tolerances = Tolerances { moduli: moduli_tol, coefficient: tol };
            let report = match (p_word, insert) {
                (Some(p), Some(z)) => {
                    let h = HomoclinicSpec::parse(l.spec.shift(), &p, &z, offset)?;
                    typicality_report(&l.spec, &h, tolerances)?
                }
                (None, None) => search_typicality(&l.spec, 3, 2, tolerances)?,
                _ => return Err(usage("--p-word and --insert must be given together")),
            };
            output::emit(common.out.as_deref(), &output::json("check typical", &l.hash, report)?)
        }
    }
}

const LARGE_T: [f64; 3] = [8.0, 16.0, 32.0];
/// Brackets wider than this are flagged in the perturbation table.
const WIDE: f64 = 0.1;

#[derive(Serialize)]
struct LargeT {
    t: f64,
    lower: f64,
    upper: f64,
    estimate: f64,
    wide: bool,
}

#[derive(Serialize)]
struct Snapshot {
    alpha_upper: f64,
    beta_upper: f64,
    pressure: Vec<LargeT>,
}

#[derive(Serialize)]
struct PerturbRow {
    eps: f64,
    /// Largest change of `α` or `h` at a common grid weight.
    spectrum_sup_change: f64,
    alpha_change: f64,
    #[serde(flatten)]
    snapshot: Snapshot,
}

#[derive(Serialize)]
struct PerturbReport {
    seed: u64,
    depth: usize,
    base: Snapshot,
    rows: Vec<PerturbRow>,
}

fn snapshot(spec: &CocycleSpec, dir: &[f64], n: usize, opts: TableOptions) -> Result<Snapshot, CliError> {
    let li = lyapunov_interval(spec, n, None, opts.cap)?;
    let engine = PressureEngine::new(spec, n, opts)?;
    let pressure = LARGE_T
        .iter()
        .map(|&t| {
            let b = engine.bracket(&WeightVector::along(dir, t)?, None, false)?;
            if b.width() > WIDE {
                eprintln!("warning: pressure bracket at t = {t} has width {:.3}", b.width());
            }
            Ok(LargeT { t, lower: b.lower, upper: b.upper, estimate: b.estimate, wide: b.width() > WIDE })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Snapshot { alpha_upper: li.alpha_upper, beta_upper: li.beta_upper, pressure })
}

fn perturb(
    spec: &CocycleSpec,
    dir: &[f64],
    ts: &[f64],
    eps: &[f64],
    seed: u64,
    n: usize,
    opts: TableOptions,
) -> Result<PerturbReport, CliError> {
    if eps.iter().any(|e| !e.is_finite() || *e < 0.0) {
        return Err(usage("--eps values must be finite and nonnegative"));
    }
    let k = spec.dim();
    // one fixed direction per generator, scaled by each ε
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let directions: Vec<Matrix> = spec
        .generators()
        .iter()
        .map(|_| {
            let entries: Vec<f64> = (0..k * k).map(|_| rng.random_range(-1.0..=1.0)).collect();
            Matrix::from_row_slice(k, &entries)
        })
        .collect();
    let base_curve = spectrum_from_curve(&PressureCurve::compute(spec, dir, ts, n, None, opts)?)?;
    let base = snapshot(spec, dir, n, opts)?;
    let mut rows = Vec::with_capacity(eps.len());
    for &e in eps {
        let gens: Vec<Matrix> = spec
            .generators()
            .iter()
            .zip(&directions)
            .map(|(a, d)| a * &(&Matrix::identity(k) + &d.scale(e)))
            .collect();
        let perturbed = spec.with_generators(gens)?;
        let curve = spectrum_from_curve(&PressureCurve::compute(&perturbed, dir, ts, n, None, opts)?)?;
        let mut sup: f64 = 0.0;
        for p in &base_curve {
            if let Some(q) = curve.iter().find(|q| q.t_source == p.t_source) {
                sup = sup.max((p.alpha - q.alpha).abs()).max((p.h - q.h).abs());
            }
        }
        let snap = snapshot(&perturbed, dir, n, opts)?;
        rows.push(PerturbRow {
            eps: e,
            spectrum_sup_change: sup,
            alpha_change: (snap.alpha_upper - base.alpha_upper).abs(),
            snapshot: snap,
        });
    }
    Ok(PerturbReport { seed, depth: n, base, rows })
}
