//! Batch front end: parameter sweeps with CSV series, JSON summaries, and
//! the aggregate verification report.
//!
//! Every subcommand accepts `--print-config` (emit the effective settings as
//! flat JSON and exit) and `--config FILE` (load settings from such JSON;
//! unknown keys are rejected). Outputs are deterministic for a fixed
//! config. `KVWAVE_THREADS` caps the worker count for the sweep loops; it is
//! the only environment variable consulted.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use kvwave::bessel::bessel_zero;
use kvwave::elliptic::{dn_map_mode, dn_symbol};
use kvwave::grid::{build_grid, grid_for_lambda, DomainSpec};
use kvwave::operators::assemble_mode_operators;
use kvwave::pencil::{resolvent_norm, spectrum_mode};
use kvwave::quasimode::{
    apriori_check, apriori_exponents, build_corrected, default_grid, residual_norms,
};
use kvwave::rays::gcc_time;
use kvwave::report::{full_report, run_criterion};
use kvwave::semigroup::{decay_profile, evolve, smooth_random_state};
use kvwave::C64;

#[derive(Parser)]
#[command(name = "kvwave", about = "Damped wave toolkit batch runner", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bessel zero tables lambda_{m,n} along m = alpha n.
    BesselZeros(WithCommon<BesselZerosCfg>),
    /// Dirichlet-to-Neumann values against the principal symbol.
    DnMap(WithCommon<DnMapCfg>),
    /// Corrected quasi-mode sweep with residuals and scaling exponents.
    Quasimode(WithCommon<QuasimodeCfg>),
    /// Resolvent norms along the whispering branch over a frequency range.
    ResolventScan(WithCommon<ResolventScanCfg>),
    /// Eigenvalues near a shift for one angular mode.
    Spectrum(WithCommon<SpectrumCfg>),
    /// Time evolution of one initial state with energy tracking.
    Evolve(WithCommon<EvolveCfg>),
    /// Seeded smooth-data decay profiles across modes.
    Decay(WithCommon<DecayCfg>),
    /// Ray control times and interface hit classification.
    Rays(WithCommon<RaysCfg>),
    /// Aggregate verification report.
    Report(WithCommon<ReportCfg>),
}

#[derive(Args)]
struct WithCommon<T: Args> {
    /// Print the effective configuration as JSON and exit.
    #[arg(long)]
    print_config: bool,
    /// Load the configuration from a JSON file (overrides other flags).
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    cfg: T,
}

fn effective<T: Args + Serialize + DeserializeOwned + Clone>(w: &WithCommon<T>) -> Result<T> {
    match &w.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            let de = &mut serde_json::Deserializer::from_str(&text);
            let cfg = serde_path_to_error(de)?;
            Ok(cfg)
        }
        None => Ok(w.cfg.clone()),
    }
}

fn serde_path_to_error<'a, T: Deserialize<'a>>(
    de: &mut serde_json::Deserializer<serde_json::de::StrRead<'a>>,
) -> Result<T> {
    T::deserialize(de).map_err(|e| anyhow::anyhow!("config parse error: {e}"))
}

fn thread_count() -> usize {
    std::env::var("KVWAVE_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get().min(8))
                .unwrap_or(1)
        })
}

/// Order-preserving parallel map over independent tasks.
fn parallel_map<I, O, F>(items: Vec<I>, f: F) -> Vec<O>
where
    I: Send,
    O: Send,
    F: Fn(I) -> O + Sync,
{
    let workers = thread_count().min(items.len().max(1));
    if workers <= 1 {
        return items.into_iter().map(f).collect();
    }
    let items: Vec<(usize, I)> = items.into_iter().enumerate().collect();
    let mut out: Vec<Option<O>> = items.iter().map(|_| None).collect();
    let queue = std::sync::Mutex::new(items);
    let results = std::sync::Mutex::new(Vec::new());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let item = queue.lock().unwrap().pop();
                match item {
                    Some((i, x)) => {
                        let y = f(x);
                        results.lock().unwrap().push((i, y));
                    }
                    None => break,
                }
            });
        }
    });
    for (i, y) in results.into_inner().unwrap() {
        out[i] = Some(y);
    }
    out.into_iter().map(|o| o.unwrap()).collect()
}

fn parse_range(s: &str) -> Result<(f64, f64, f64)> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [a, b] => Ok((a.parse()?, b.parse()?, 1.0)),
        [a, b, c] => Ok((a.parse()?, b.parse()?, c.parse()?)),
        _ => bail!("range must look like start:end or start:end:step"),
    }
}

fn parse_n_range(s: &str) -> Result<(u32, u32)> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [a] => {
            let v = a.parse()?;
            Ok((v, v))
        }
        [a, b] => Ok((a.parse()?, b.parse()?)),
        _ => bail!("index range must look like lo:hi"),
    }
}

fn write_out(path: &PathBuf, content: &str) -> Result<()> {
    let mut f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    f.write_all(content.as_bytes())?;
    Ok(())
}

fn print_cfg<T: Serialize>(cfg: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(cfg)?);
    Ok(())
}

// ---- subcommand configs ----

#[derive(Args, Serialize, Deserialize, Clone)]
#[serde(deny_unknown_fields)]
struct BesselZerosCfg {
    /// Zero family slope: tabulate m = alpha n.
    #[arg(long, default_value_t = 8)]
    alpha: u32,
    /// Largest radial index n.
    #[arg(long, default_value_t = 20)]
    n_max: u32,
    /// Output CSV path.
    #[arg(long, default_value = "zeros.csv")]
    out: PathBuf,
}

#[derive(Args, Serialize, Deserialize, Clone)]
#[serde(deny_unknown_fields)]
struct DnMapCfg {
    /// Semiclassical parameter of the elliptic solve.
    #[arg(long, default_value_t = 0.05)]
    hbar: f64,
    /// Largest angular mode.
    #[arg(long, default_value_t = 80)]
    m_max: u32,
    #[arg(long, default_value = "dn.csv")]
    out: PathBuf,
}

#[derive(Args, Serialize, Deserialize, Clone)]
#[serde(deny_unknown_fields)]
struct QuasimodeCfg {
    #[arg(long, default_value_t = 8)]
    alpha: u32,
    /// Radial index range lo:hi.
    #[arg(long, default_value = "4:16")]
    n: String,
    /// Grid refinement parameter (spacing ~ kappa / lambda^2).
    #[arg(long, default_value_t = 2.0)]
    kappa: f64,
    /// Interface cutoff width of the correction.
    #[arg(long, default_value_t = 0.25)]
    cutoff: f64,
    #[arg(long, default_value = "qm.csv")]
    out: PathBuf,
}

#[derive(Args, Serialize, Deserialize, Clone)]
#[serde(deny_unknown_fields)]
struct ResolventScanCfg {
    /// Frequency range start:end:step.
    #[arg(long, default_value = "40:120:4")]
    lambda: String,
    /// Whispering family: at each frequency the mode m = alpha n with the
    /// nearest zero is scanned.
    #[arg(long, default_value_t = 8)]
    alpha: u32,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long, default_value = "scan.csv")]
    out: PathBuf,
}

#[derive(Args, Serialize, Deserialize, Clone)]
#[serde(deny_unknown_fields)]
struct SpectrumCfg {
    /// Angular mode.
    #[arg(long, default_value_t = 64)]
    m: u32,
    /// Imaginary part of the Arnoldi shift.
    #[arg(long, default_value_t = 77.5)]
    shift_imag: f64,
    /// Number of eigenvalues requested.
    #[arg(long, default_value_t = 8)]
    count: usize,
    #[arg(long, default_value_t = 0.7)]
    kappa: f64,
    #[arg(long, default_value = "spec.json")]
    out: PathBuf,
}

#[derive(Args, Serialize, Deserialize, Clone)]
#[serde(deny_unknown_fields)]
struct EvolveCfg {
    /// Initial state: "qm" (corrected quasi-mode) or "random".
    #[arg(long, default_value = "qm")]
    mode: String,
    #[arg(long, default_value_t = 8)]
    alpha: u32,
    #[arg(long, default_value_t = 8)]
    n: u32,
    /// Final time.
    #[arg(long, default_value_t = 100.0)]
    t_final: f64,
    /// Time step; "auto" resolves the carrier frequency.
    #[arg(long, default_value = "auto")]
    dt: String,
    /// Seed for the "random" initial state.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value = "traj.csv")]
    out: PathBuf,
}

#[derive(Args, Serialize, Deserialize, Clone)]
#[serde(deny_unknown_fields)]
struct DecayCfg {
    #[arg(long, default_value_t = 200.0)]
    t_final: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 0.02)]
    dt: f64,
    #[arg(long, default_value = "decay.csv")]
    out: PathBuf,
}

#[derive(Args, Serialize, Deserialize, Clone)]
#[serde(deny_unknown_fields)]
struct RaysCfg {
    /// Phase-space sample is grid x grid.
    #[arg(long, default_value_t = 64)]
    grid: u32,
    /// Outer domain radius.
    #[arg(long, default_value_t = 2.0)]
    r0_outer: f64,
    #[arg(long, default_value = "rays.csv")]
    out: PathBuf,
}

#[derive(Args, Serialize, Deserialize, Clone)]
#[serde(deny_unknown_fields)]
struct ReportCfg {
    /// Run every criterion (several minutes).
    #[arg(long, default_value_t = false)]
    full: bool,
    /// Run a single numbered criterion instead.
    #[arg(long)]
    criterion: Option<usize>,
    #[arg(long, default_value = "report.json")]
    out: PathBuf,
}

// ---- runners ----

fn run_bessel_zeros(cfg: &BesselZerosCfg) -> Result<()> {
    let rows = parallel_map((1..=cfg.n_max).collect(), |n| -> Result<String> {
        let m = cfg.alpha * n;
        let z = bessel_zero(m, n)?;
        Ok(format!(
            "{m},{n},{:.15e},{:.3e},{:.15e}\n",
            z.value,
            z.residual,
            m as f64 / z.value
        ))
    });
    let mut csv = String::from("m,n,lambda,residual,ratio\n");
    for r in rows {
        csv.push_str(&r?);
    }
    write_out(&cfg.out, &csv)
}

fn run_dn_map(cfg: &DnMapCfg) -> Result<()> {
    let spec = DomainSpec::default();
    let scale = (1.0 / cfg.hbar).max(cfg.m_max as f64);
    let grid = build_grid(&spec, ((17.0 * scale).ceil() as usize).max(128))?;
    let rows = parallel_map((0..=cfg.m_max).collect(), |m| -> Result<String> {
        let nu = dn_map_mode(&grid, m, cfg.hbar)?;
        let sym = dn_symbol(m, cfg.hbar);
        Ok(format!(
            "{m},{:.6e},{:.15e},{:.15e},{:.15e},{:.15e},{:.6e}\n",
            cfg.hbar,
            nu.re,
            nu.im,
            sym.re,
            sym.im,
            (nu - sym).norm()
        ))
    });
    let mut csv = String::from("m,hbar,nu_re,nu_im,symbol_re,symbol_im,gap\n");
    for r in rows {
        csv.push_str(&r?);
    }
    write_out(&cfg.out, &csv)
}

fn run_quasimode(cfg: &QuasimodeCfg) -> Result<()> {
    let (lo, hi) = parse_n_range(&cfg.n)?;
    if lo < 1 || hi < lo {
        bail!("need 1 <= lo <= hi in --n");
    }
    let spec = DomainSpec::default();
    let rows = parallel_map(
        (lo..=hi).collect(),
        |n| -> Result<(String, kvwave::quasimode::AprioriSample)> {
            let grid = default_grid(cfg.alpha, n, cfg.kappa)?;
            let qm = build_corrected(cfg.alpha, n, &grid, cfg.cutoff)?;
            let ops = assemble_mode_operators(&grid, &spec, qm.m)?;
            let res = residual_norms(&qm, &ops)?;
            let row = format!(
                "{n},{},{:.15e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e}\n",
                qm.m,
                qm.lambda,
                res.norm_u,
                res.norm_f,
                res.ratio,
                qm.report.dirichlet_mismatch,
                qm.report.neumann_mismatch,
                qm.report.g2_l2
            );
            Ok((row, apriori_check(&qm)))
        },
    );
    let mut csv =
        String::from("n,m,lambda,state_norm,residual,residual_ratio,dirichlet_gap,neumann_gap,cutoff_source\n");
    let mut samples = Vec::new();
    let mut lams = Vec::new();
    for r in rows {
        let (row, s) = r?;
        lams.push(1.0 / s.h);
        csv.push_str(&row);
        samples.push(s);
    }
    write_out(&cfg.out, &csv)?;
    // summary with measured exponents
    let ex = apriori_exponents(&samples)?;
    let mut summary = BTreeMap::new();
    summary.insert("exp_grad_v1", ex[0]);
    summary.insert("exp_v1", ex[1]);
    summary.insert("exp_grad_u1", ex[2]);
    summary.insert("exp_u1", ex[3]);
    summary.insert("exp_u1_trace", ex[4]);
    summary.insert("exp_v_trace", ex[5]);
    summary.insert("lambda_min", lams.iter().cloned().fold(f64::MAX, f64::min));
    summary.insert("lambda_max", lams.iter().cloned().fold(0.0, f64::max));
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn run_resolvent_scan(cfg: &ResolventScanCfg) -> Result<()> {
    let (start, end, step) = parse_range(&cfg.lambda)?;
    if !(start > 0.0) || end < start || !(step > 0.0) {
        bail!("need 0 < start <= end and step > 0 in --lambda");
    }
    let spec = DomainSpec::default();
    let mut lams = Vec::new();
    let mut x = start;
    while x <= end + 1e-12 {
        lams.push(x);
        x += step;
    }
    // nearest whispering pair (m, n) = (alpha n, n) per frequency
    let pick = |lam: f64| -> Result<u32> {
        let mut best = 1u32;
        let mut gap = f64::MAX;
        for n in 1..=400u32 {
            let z = bessel_zero(cfg.alpha * n, n)?.value;
            let g = (z - lam).abs();
            if g < gap {
                gap = g;
                best = n;
            }
            if z > lam + 2.0 * gap + 10.0 {
                break;
            }
        }
        Ok(best)
    };
    let rows = parallel_map(lams, |lam| -> Result<String> {
        let n = pick(lam)?;
        let m = cfg.alpha * n;
        let grid = grid_for_lambda(&spec, lam, cfg.kappa)?;
        let ops = assemble_mode_operators(&grid, &spec, m)?;
        let norm = resolvent_norm(&ops, lam)?;
        Ok(format!("{lam:.9e},{m},{norm:.9e}\n"))
    });
    let mut csv = String::from("lambda,m,resolvent_norm\n");
    for r in rows {
        csv.push_str(&r?);
    }
    write_out(&cfg.out, &csv)
}

fn run_spectrum(cfg: &SpectrumCfg) -> Result<()> {
    let spec = DomainSpec::default();
    let grid = grid_for_lambda(&spec, cfg.shift_imag.abs().max(10.0), cfg.kappa)?;
    let ops = assemble_mode_operators(&grid, &spec, cfg.m)?;
    let res = spectrum_mode(&ops, C64::new(0.0, cfg.shift_imag), cfg.count)?;
    #[derive(Serialize)]
    struct Eig {
        re: f64,
        im: f64,
        residual: f64,
        converged: bool,
    }
    #[derive(Serialize)]
    struct Out {
        m: u32,
        shift_imag: f64,
        eigenvalues: Vec<Eig>,
    }
    let out = Out {
        m: res.m,
        shift_imag: cfg.shift_imag,
        eigenvalues: res
            .eigenvalues
            .iter()
            .map(|e| Eig {
                re: e.value.re,
                im: e.value.im,
                residual: e.residual,
                converged: e.converged,
            })
            .collect(),
    };
    write_out(&cfg.out, &serde_json::to_string_pretty(&out)?)
}

fn run_evolve(cfg: &EvolveCfg) -> Result<()> {
    let spec = DomainSpec::default();
    let (ops, state, lambda) = match cfg.mode.as_str() {
        "qm" => {
            let grid = default_grid(cfg.alpha, cfg.n, 2.0)?;
            let qm = build_corrected(cfg.alpha, cfg.n, &grid, 0.25)?;
            let ops = assemble_mode_operators(&grid, &spec, qm.m)?;
            let state = qm.state();
            (ops, state, qm.lambda)
        }
        "random" => {
            let grid = build_grid(&spec, 768)?;
            let ops = assemble_mode_operators(&grid, &spec, cfg.alpha * cfg.n)?;
            let state = smooth_random_state(&ops, cfg.seed);
            (ops, state, 10.0)
        }
        other => bail!("unknown --mode {other} (expected qm or random)"),
    };
    let dt = match cfg.dt.as_str() {
        "auto" => (0.2 / lambda).min(0.01),
        s => s.parse().context("parsing --dt")?,
    };
    if !(dt > 0.0) {
        bail!("time step must be positive");
    }
    let steps = (cfg.t_final / dt).ceil() as usize;
    let every = (steps / 2000).max(1);
    let traj = evolve(&ops, &state, dt, steps, every)?;
    let mut csv = String::from("t,energy,dissipated\n");
    for ((t, e), d) in traj
        .times
        .iter()
        .zip(&traj.energies)
        .zip(&traj.dissipated)
    {
        csv.push_str(&format!("{t:.9e},{e:.12e},{d:.12e}\n"));
    }
    write_out(&cfg.out, &csv)
}

fn run_decay(cfg: &DecayCfg) -> Result<()> {
    let spec = DomainSpec::default();
    let rows = parallel_map(vec![0u32, 1, 2, 4, 8], |m| -> Result<String> {
        let grid = build_grid(&spec, 384)?;
        let ops = assemble_mode_operators(&grid, &spec, m)?;
        let p = decay_profile(&ops, cfg.seed + m as u64, cfg.t_final, cfg.dt)?;
        let mut s = String::new();
        for ((t, e), w) in p.times.iter().zip(&p.energies).zip(&p.weighted) {
            s.push_str(&format!("{m},{t:.9e},{e:.12e},{w:.12e}\n"));
        }
        Ok(s)
    });
    let mut csv = String::from("m,t,energy,weighted\n");
    for r in rows {
        csv.push_str(&r?);
    }
    write_out(&cfg.out, &csv)
}

fn run_rays(cfg: &RaysCfg) -> Result<()> {
    let rep = gcc_time(cfg.r0_outer, cfg.grid as usize)?;
    let n = cfg.grid as usize;
    let mut csv = String::from("start_r,start_angle,time_to_damping,first_r0,classification\n");
    let mut hit_iter = rep.first_hits.iter();
    let mut k = 0usize;
    for i in 0..n {
        let r = (i as f64 + 0.5) / n as f64 * cfg.r0_outer;
        for j in 0..n {
            let phi = (j as f64 + 0.5) / n as f64 * 2.0 * std::f64::consts::PI;
            let t = rep.times[k];
            k += 1;
            if r >= 1.0 {
                csv.push_str(&format!("{r:.9e},{phi:.9e},{t:.9e},,inside\n"));
            } else {
                let h = hit_iter.next().expect("one hit per interior start");
                let class = match h.classification {
                    kvwave::rays::HitClass::Hyperbolic => "hyperbolic",
                    kvwave::rays::HitClass::Glancing => "glancing",
                    kvwave::rays::HitClass::Elliptic => "elliptic",
                };
                csv.push_str(&format!(
                    "{r:.9e},{phi:.9e},{t:.9e},{:.12e},{class}\n",
                    h.r0
                ));
            }
        }
    }
    write_out(&cfg.out, &csv)?;
    println!(
        "{}",
        serde_json::json!({
            "max_time": rep.max_time,
            "flagged": rep.flagged,
            "all_transversal": rep.all_transversal,
        })
    );
    Ok(())
}

fn run_report(cfg: &ReportCfg) -> Result<()> {
    if let Some(id) = cfg.criterion {
        let c = run_criterion(id);
        println!(
            "[{}] criterion {:>2} ({}): {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            c.summary
        );
        write_out(&cfg.out, &serde_json::to_string_pretty(&c)?)?;
        return Ok(());
    }
    if !cfg.full {
        bail!("pass --full to run every criterion, or --criterion N for one");
    }
    let rep = full_report();
    for c in &rep.criteria {
        println!(
            "[{}] criterion {:>2} ({}): {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            c.summary
        );
    }
    write_out(&cfg.out, &serde_json::to_string_pretty(&rep)?)?;
    println!("all_pass: {}", rep.all_pass);
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    macro_rules! handle {
        ($w:expr, $run:expr) => {{
            let cfg = effective(&$w)?;
            if $w.print_config {
                print_cfg(&cfg)
            } else {
                $run(&cfg)
            }
        }};
    }
    match cli.command {
        Command::BesselZeros(w) => handle!(w, run_bessel_zeros),
        Command::DnMap(w) => handle!(w, run_dn_map),
        Command::Quasimode(w) => handle!(w, run_quasimode),
        Command::ResolventScan(w) => handle!(w, run_resolvent_scan),
        Command::Spectrum(w) => handle!(w, run_spectrum),
        Command::Evolve(w) => handle!(w, run_evolve),
        Command::Decay(w) => handle!(w, run_decay),
        Command::Rays(w) => handle!(w, run_rays),
        Command::Report(w) => handle!(w, run_report),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli) {
        // machine-readable failure record on stderr
        eprintln!("{}", serde_json::json!({ "error": format!("{e:#}") }));
        std::process::exit(1);
    }
}
