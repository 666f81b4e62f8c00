//! Command-line driver: wave profiles, amplitude and eigenvalue sweeps,
//! peaked-wave spectra, strip reports, characteristic evolution, and the
//! verification battery. Emits CSV/JSON (and optional SVG) files with
//! deterministic, bit-reproducible content.

mod output;
mod svg;

use clap::{Parser, Subcommand, ValueEnum};
use peakwave::Complex64;
use peakwave::chareval::{self, EvolveConfig, PerturbationState};
use peakwave::hessian::{self, Method};
use peakwave::peakedops::{self, StripClass};
use peakwave::verify;
use peakwave::waveprofile::{self, Grid};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_VALIDATION: u8 = 1;
const EXIT_ABORTED: u8 = 2;
const EXIT_ROW_FAILURES: u8 = 3;

#[derive(Parser)]
#[command(
    name = "peakwave",
    about = "Traveling waves of a Hunter-Saxton-type shallow water model: \
             profiles, linearized spectra, strip-spectrum probes, and \
             characteristic blow-up experiments",
    version
)]
struct Cli {
    /// Output directory (the PEAKWAVE_OUT environment variable overrides).
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Also emit SVG plots next to the data files.
    #[arg(long, global = true)]
    svg: bool,
    /// Worker pool size for sweep fan-out (default: available parallelism).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// JSON file with default parameter values; explicit flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

/// Flat optional defaults loadable from `--config file.json`. Precedence:
/// explicit flag, then config file, then the built-in default.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    c: Option<f64>,
    n: Option<usize>,
    tol: Option<f64>,
    c_list: Option<String>,
    method: Option<String>,
    grey_threshold: Option<f64>,
    modes: Option<usize>,
    lambda_list: Option<String>,
    delta: Option<f64>,
    t_end: Option<f64>,
    dt: Option<f64>,
    labels: Option<usize>,
    record_stride: Option<usize>,
}

fn load_config(path: Option<&Path>) -> Result<FileConfig, CliError> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| validation(format!("reading config {p:?}: {e}")))?;
            serde_json::from_str(&text)
                .map_err(|e| validation(format!("parsing config {p:?}: {e}")))
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Fd,
    Fourier,
    Both,
}

impl MethodArg {
    fn methods(self) -> Vec<Method> {
        match self {
            MethodArg::Fd => vec![Method::Fd],
            MethodArg::Fourier => vec![Method::Fourier],
            MethodArg::Both => vec![Method::Fd, Method::Fourier],
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve one smooth traveling-wave profile and emit profile.csv.
    Profile {
        /// Wave speed in (1, c*).
        #[arg(long)]
        c: Option<f64>,
        /// Grid half-count N (nodes are x_j = jπ/N, j = -N..N).
        #[arg(long)]
        n: Option<usize>,
        /// Newton tolerance on |f(η_j) - x_j|.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Amplitude-versus-speed table with the peaked endpoint appended.
    Sweep {
        /// Comma-separated wave speeds in (1, c*).
        #[arg(long)]
        c_list: Option<String>,
    },
    /// First four Hessian eigenvalues per speed and method.
    Spectrum {
        #[arg(long)]
        c_list: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        /// Cross-method disagreement above this flags the row (grey zone).
        #[arg(long)]
        grey_threshold: Option<f64>,
        /// Append the regularized c* endpoint to the sweep.
        #[arg(long)]
        include_peaked: bool,
    },
    /// Regularized peaked-wave spectra by both discretizations.
    PeakedSpectrum {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        /// Number of low eigenvalues to report.
        #[arg(long)]
        modes: Option<usize>,
        /// Also dump the raw operator matrices (row-major text).
        #[arg(long)]
        dump_matrix: bool,
    },
    /// Classify complex samples against the spectral strip and emit
    /// eigenfunction/resolvent witnesses.
    Strip {
        #[arg(long)]
        n: Option<usize>,
        /// Comma-separated complex samples, e.g. "0,0.3,0.2+2i,1.5".
        #[arg(long)]
        lambda_list: Option<String>,
    },
    /// Evolve a peaked-wave perturbation along characteristics.
    Evolve {
        /// Initial-data strength δ of the family a·x(2π-x), a = -δ/2π.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        /// Number of characteristic labels.
        #[arg(long)]
        labels: Option<usize>,
        /// Record every k-th step in evolve.csv.
        #[arg(long)]
        record_stride: Option<usize>,
    },
    /// Run the full verification battery (exit 0 only if all checks pass).
    Verify {
        /// Comma-separated check ids to run (default: all twelve).
        #[arg(long)]
        only: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out_dir = std::env::var_os("PEAKWAVE_OUT")
        .map(PathBuf::from)
        .unwrap_or_else(|| cli.out_dir.clone());
    let jobs = cli
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);

    let result = load_config(cli.config.as_deref()).and_then(|cfg| match &cli.command {
        Command::Profile { c, n, tol } => {
            let c = c.or(cfg.c).ok_or_else(|| {
                validation(r#"wave speed required: pass --c or set "c" in the config file"#)
            })?;
            cmd_profile(
                &out_dir,
                cli.svg,
                c,
                n.or(cfg.n).unwrap_or(300),
                tol.or(cfg.tol).unwrap_or(1e-14),
            )
        }
        Command::Sweep { c_list } => {
            let list = c_list
                .clone()
                .or(cfg.c_list.clone())
                .unwrap_or_else(|| "1.01,1.03,1.05,1.07,1.09".into());
            cmd_sweep(&out_dir, cli.svg, &list)
        }
        Command::Spectrum {
            c_list,
            n,
            method,
            grey_threshold,
            include_peaked,
        } => {
            let list = c_list
                .clone()
                .or(cfg.c_list.clone())
                .unwrap_or_else(|| "1.01,1.03,1.05,1.07,1.09".into());
            let method = resolve_method(*method, cfg.method.as_deref())?;
            cmd_spectrum(
                &out_dir,
                cli.svg,
                &list,
                n.or(cfg.n).unwrap_or(300),
                method,
                grey_threshold
                    .or(cfg.grey_threshold)
                    .unwrap_or(hessian::GREY_ZONE_THRESHOLD),
                jobs,
                *include_peaked,
            )
        }
        Command::PeakedSpectrum {
            n,
            method,
            modes,
            dump_matrix,
        } => {
            let method = resolve_method(*method, cfg.method.as_deref())?;
            cmd_peaked_spectrum(
                &out_dir,
                n.or(cfg.n).unwrap_or(300),
                method,
                modes.or(cfg.modes).unwrap_or(8),
                *dump_matrix,
            )
        }
        Command::Strip { n, lambda_list } => {
            let list = lambda_list.clone().or(cfg.lambda_list.clone()).unwrap_or_else(|| {
                "0,0.1,0.3,0.5,0.2+2i,0.7+3i,0.7853981633974483,1,1.5,0.9+5i,2".into()
            });
            cmd_strip(&out_dir, cli.svg, n.or(cfg.n).unwrap_or(512), &list)
        }
        Command::Evolve {
            delta,
            t_end,
            dt,
            labels,
            record_stride,
        } => cmd_evolve(
            &out_dir,
            cli.svg,
            delta.or(cfg.delta).unwrap_or(1e-2),
            t_end.or(cfg.t_end).unwrap_or(5.0),
            dt.or(cfg.dt).unwrap_or(1e-3),
            labels.or(cfg.labels).unwrap_or(1024),
            record_stride.or(cfg.record_stride).unwrap_or(10),
        ),
        Command::Verify { only } => cmd_verify(&out_dir, only.as_deref()),
    });

    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code)
        }
    }
}

#[derive(Debug)]
struct CliError {
    exit_code: u8,
    message: String,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

fn validation(message: impl Into<String>) -> CliError {
    CliError {
        exit_code: EXIT_VALIDATION,
        message: message.into(),
    }
}

fn aborted(message: impl std::fmt::Display) -> CliError {
    CliError {
        exit_code: EXIT_ABORTED,
        message: message.to_string(),
    }
}

type CmdResult = Result<ExitCode, CliError>;

fn check_speed(c: f64) -> Result<(), CliError> {
    let c_star = waveprofile::c_star();
    if !(c > 1.0 && c <= c_star) {
        return Err(validation(format!(
            "wave speed must satisfy 1 < c ≤ c* = {c_star:.10}, got {c}"
        )));
    }
    Ok(())
}

fn parse_c_list(list: &str) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for part in list.split(',') {
        let v: f64 = part
            .trim()
            .parse()
            .map_err(|_| validation(format!("bad speed entry {part:?} in c-list")))?;
        check_speed(v)?;
        out.push(v);
    }
    if out.is_empty() {
        return Err(validation("empty c-list"));
    }
    Ok(out)
}

/// Parse "a", "bi", "a+bi", "a-bi".
fn parse_complex(text: &str) -> Result<Complex64, CliError> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || validation(format!("cannot parse complex number {text:?}"));
    if let Some(body) = s.strip_suffix('i') {
        // Split at the sign of the imaginary part (not a leading sign,
        // not an exponent sign).
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            let ch = bytes[k] as char;
            if (ch == '+' || ch == '-') && !matches!(bytes[k - 1] as char, 'e' | 'E') {
                split = Some(k);
                break;
            }
        }
        match split {
            Some(k) => {
                let re: f64 = body[..k].parse().map_err(|_| bad())?;
                let im_str = &body[k..];
                let im: f64 = if im_str == "+" {
                    1.0
                } else if im_str == "-" {
                    -1.0
                } else {
                    im_str.parse().map_err(|_| bad())?
                };
                Ok(Complex64::new(re, im))
            }
            None => {
                let im: f64 = if body.is_empty() {
                    1.0
                } else if body == "-" {
                    -1.0
                } else {
                    body.parse().map_err(|_| bad())?
                };
                Ok(Complex64::new(0.0, im))
            }
        }
    } else {
        Ok(Complex64::new(s.parse().map_err(|_| bad())?, 0.0))
    }
}

fn resolve_method(flag: Option<MethodArg>, cfg: Option<&str>) -> Result<MethodArg, CliError> {
    if let Some(m) = flag {
        return Ok(m);
    }
    match cfg {
        None => Ok(MethodArg::Both),
        Some("fd") => Ok(MethodArg::Fd),
        Some("fourier") => Ok(MethodArg::Fourier),
        Some("both") => Ok(MethodArg::Both),
        Some(other) => Err(validation(format!(
            r#"config "method" must be fd|fourier|both, got {other:?}"#
        ))),
    }
}

fn grid_of(n: usize) -> Result<Grid, CliError> {
    Grid::new(n).map_err(|e| validation(e.to_string()))
}

fn emit(path: &Path, contents: &str) -> Result<(), CliError> {
    output::write_atomic(path, contents).map_err(|e| aborted(format!("writing {path:?}: {e}")))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_profile(out_dir: &Path, want_svg: bool, c: f64, n: usize, tol: f64) -> CmdResult {
    check_speed(c)?;
    if !(tol > 0.0) {
        return Err(validation(format!("tolerance must be positive, got {tol}")));
    }
    let grid = grid_of(n)?;
    let config = format!("profile c={c:.17e} n={n} tol={tol:.17e}");

    let energy = waveprofile::solve_energy_for_period(c, 2.0 * std::f64::consts::PI)
        .map_err(aborted)?;
    let params = waveprofile::ModelParams::new(c, energy).map_err(aborted)?;
    let profile = waveprofile::newton_profile(&params, &grid, tol).map_err(aborted)?;
    let (first_integral, zero_mean) = waveprofile::check_residuals(&profile);

    let rows: Vec<Vec<String>> = (0..grid.len())
        .map(|k| {
            vec![
                output::fmt(grid.node(k)),
                output::fmt(profile.values[k]),
                output::fmt(profile.slope[k]),
            ]
        })
        .collect();
    emit(
        &out_dir.join("profile.csv"),
        &output::csv_document(&["x", "eta", "slope"], &rows, &config),
    )?;
    println!(
        "profile c = {c}: energy {energy:.12e}, first-integral residual {first_integral:.3e}, \
         zero-mean residual {zero_mean:.3e}"
    );

    if want_svg {
        let pts: Vec<(f64, f64)> = (0..grid.len())
            .map(|k| (grid.node(k), profile.values[k]))
            .collect();
        let peaked: Vec<(f64, f64)> = (0..grid.len())
            .map(|k| (grid.node(k), waveprofile::peaked_eta(grid.node(k))))
            .collect();
        let doc = svg::chart(
            &format!("traveling wave profile, c = {c}"),
            &[
                svg::Series {
                    label: format!("eta (c = {c})"),
                    points: pts,
                    scatter: false,
                },
                svg::Series {
                    label: "peaked limit".into(),
                    points: peaked,
                    scatter: false,
                },
            ],
        );
        emit(&out_dir.join("profile.svg"), &doc)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(out_dir: &Path, want_svg: bool, c_list: &str) -> CmdResult {
    let speeds = parse_c_list(c_list)?;
    let config = format!("sweep c_list={c_list}");
    let rows_data = waveprofile::amplitude_sweep(&speeds);
    let mut failures = 0;
    let rows: Vec<Vec<String>> = rows_data
        .iter()
        .map(|r| {
            if r.error.is_some() {
                failures += 1;
            }
            vec![
                output::fmt(r.c),
                output::fmt(r.energy),
                output::fmt(r.amplitude),
                r.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    emit(
        &out_dir.join("sweep.csv"),
        &output::csv_document(&["c", "energy", "amplitude", "error"], &rows, &config),
    )?;

    if want_svg {
        let pts: Vec<(f64, f64)> = rows_data.iter().map(|r| (r.c, r.amplitude)).collect();
        emit(
            &out_dir.join("sweep.svg"),
            &svg::chart(
                "wave amplitude versus speed",
                &[svg::Series {
                    label: "max eta".into(),
                    points: pts,
                    scatter: false,
                }],
            ),
        )?;
    }
    if failures > 0 {
        println!("sweep finished with {failures} row failure(s)");
        return Ok(ExitCode::from(EXIT_ROW_FAILURES));
    }
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_spectrum(
    out_dir: &Path,
    want_svg: bool,
    c_list: &str,
    n: usize,
    method: MethodArg,
    grey_threshold: f64,
    jobs: usize,
    include_peaked: bool,
) -> CmdResult {
    let speeds = parse_c_list(c_list)?;
    let grid = grid_of(n)?;
    let methods = method.methods();
    let config = format!(
        "spectrum c_list={c_list} n={n} methods={} grey={grey_threshold:.17e} peaked={include_peaked}",
        methods.len()
    );

    // Fan the sweep out in worker-pool-sized chunks.
    let mut all_rows = Vec::new();
    for chunk in speeds.chunks(jobs) {
        all_rows.extend(hessian::eigen_sweep(chunk, &grid, &methods, grey_threshold));
    }
    if include_peaked {
        all_rows.push(hessian::peaked_endpoint_row(&grid, &methods, grey_threshold));
    }

    let mut failures = 0;
    let mut rows: Vec<Vec<String>> = Vec::new();
    for row in &all_rows {
        if let Some(err) = &row.error {
            failures += 1;
            let mut cells = vec![output::fmt(row.c)];
            cells.extend(std::iter::repeat_n(String::new(), 9));
            cells.push(err.clone());
            rows.push(cells);
            continue;
        }
        for (name, eigs) in [("fd", &row.fd), ("fourier", &row.fourier)] {
            if let Some(e) = eigs {
                rows.push(vec![
                    output::fmt(row.c),
                    name.to_string(),
                    output::fmt(e.lambdas[0]),
                    output::fmt(e.lambdas[1]),
                    output::fmt(e.lambdas[2]),
                    output::fmt(e.lambdas[3]),
                    format!(
                        "{}|{}|{}|{}",
                        e.parities[0], e.parities[1], e.parities[2], e.parities[3]
                    ),
                    output::fmt(e.residuals.iter().fold(0.0_f64, |m, v| m.max(*v))),
                    row.cross_method_gap.map_or(String::new(), output::fmt),
                    if row.flagged { "grey" } else { "" }.to_string(),
                    String::new(),
                ]);
            }
        }
    }
    emit(
        &out_dir.join("spectrum.csv"),
        &output::csv_document(
            &[
                "c",
                "method",
                "lambda1",
                "lambda2",
                "lambda3",
                "lambda4",
                "parities",
                "max_residual",
                "cross_method_gap",
                "flag",
                "error",
            ],
            &rows,
            &config,
        ),
    )?;

    if want_svg {
        let mut series = Vec::new();
        for k in 0..4 {
            let pts: Vec<(f64, f64)> = all_rows
                .iter()
                .filter_map(|r| r.fd.as_ref().map(|e| (r.c, e.lambdas[k])))
                .collect();
            series.push(svg::Series {
                label: format!("lambda_{} (fd)", k + 1),
                points: pts,
                scatter: false,
            });
        }
        emit(
            &out_dir.join("spectrum.svg"),
            &svg::chart("first four Hessian eigenvalues versus c", &series),
        )?;
    }
    if failures > 0 {
        println!("spectrum finished with {failures} row failure(s)");
        return Ok(ExitCode::from(EXIT_ROW_FAILURES));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_peaked_spectrum(
    out_dir: &Path,
    n: usize,
    method: MethodArg,
    modes: usize,
    dump_matrix: bool,
) -> CmdResult {
    let grid = grid_of(n)?;
    let config = format!("peaked-spectrum n={n} modes={modes}");
    let mut rows: Vec<Vec<String>> = Vec::new();
    for m in method.methods() {
        let matrix = hessian::assemble_l_peaked(&grid, m);
        let spec = hessian::eig(&matrix).map_err(aborted)?;
        for k in 0..modes.min(spec.eigenvalues.len()) {
            rows.push(vec![
                m.to_string(),
                k.to_string(),
                output::fmt(spec.eigenvalues[k].re),
                output::fmt(spec.eigenvalues[k].im),
                spec.parities[k].to_string(),
                output::fmt(spec.residuals[k]),
            ]);
        }
        if dump_matrix {
            let d = matrix.dimension();
            let basis = match matrix.basis() {
                hessian::Basis::Physical => "physical",
                hessian::Basis::Fourier => "fourier",
            };
            let mut doc = format!("{d} {d} {basis}\n");
            for entry in matrix.entries() {
                if matrix.basis() == hessian::Basis::Physical {
                    doc.push_str(&output::fmt(entry.re));
                } else {
                    doc.push_str(&format!(
                        "{} {}",
                        output::fmt(entry.re),
                        output::fmt(entry.im)
                    ));
                }
                doc.push('\n');
            }
            emit(&out_dir.join(format!("peaked_matrix_{m}.txt")), &doc)?;
        }
    }
    emit(
        &out_dir.join("peaked_spectrum.csv"),
        &output::csv_document(
            &["method", "index", "lambda_re", "lambda_im", "parity", "residual"],
            &rows,
            &config,
        ),
    )?;
    println!(
        "note: the collocation potential is -I/2 - T/2 with T the all-ones Toeplitz \
         band (the band-limited -1/2 - pi*delta under the h/2pi transform \
         normalization); the lowest eigenvalue is regularization-dependent and \
         diverges with N in both methods"
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_strip(out_dir: &Path, want_svg: bool, n: usize, lambda_list: &str) -> CmdResult {
    let grid = grid_of(n)?;
    let samples: Vec<Complex64> = lambda_list
        .split(',')
        .map(parse_complex)
        .collect::<Result<_, _>>()?;
    if samples.is_empty() {
        return Err(validation("empty lambda list"));
    }
    let config = format!("strip n={n} lambdas={lambda_list}");
    let rows_data = peakedops::strip_report(&grid, &samples);
    let mut failures = 0;
    let rows: Vec<Vec<String>> = rows_data
        .iter()
        .map(|row| {
            if row.status.starts_with("error") {
                failures += 1;
            }
            vec![
                output::fmt(row.lambda.re),
                output::fmt(row.lambda.im),
                row.class.to_string(),
                output::fmt(row.value),
                row.status.clone(),
            ]
        })
        .collect();
    emit(
        &out_dir.join("strip.csv"),
        &output::csv_document(
            &["lambda_re", "lambda_im", "class", "residual_or_ratio", "status"],
            &rows,
            &config,
        ),
    )?;
    let verdict = peakedops::strip_verdict(&rows_data, 1e-4);
    println!(
        "strip verdict: {}",
        if verdict {
            "every interior sample carries an eigenfunction witness and every \
             resolvent sample satisfies the bound"
        } else {
            "some samples failed their witness checks"
        }
    );

    if want_svg {
        let mut by_class = Vec::new();
        for (class, label) in [
            (StripClass::Interior, "interior"),
            (StripClass::Boundary, "boundary"),
            (StripClass::Resolvent, "resolvent"),
        ] {
            let pts: Vec<(f64, f64)> = rows_data
                .iter()
                .filter(|r| r.class == class)
                .map(|r| (r.lambda.re, r.lambda.im))
                .collect();
            if !pts.is_empty() {
                by_class.push(svg::Series {
                    label: label.into(),
                    points: pts,
                    scatter: true,
                });
            }
        }
        emit(
            &out_dir.join("strip.svg"),
            &svg::chart("strip classification of samples (Re, Im)", &by_class),
        )?;
    }
    if failures > 0 {
        return Ok(ExitCode::from(EXIT_ROW_FAILURES));
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct EvolveSummary {
    delta: f64,
    t_end: f64,
    dt: f64,
    labels: usize,
    fitted_rate: f64,
    theory_rate: f64,
    relative_error: f64,
    blowup_time: Option<f64>,
    breaking_time: Option<f64>,
    breaking_reason: Option<String>,
}

fn cmd_evolve(
    out_dir: &Path,
    want_svg: bool,
    delta: f64,
    t_end: f64,
    dt: f64,
    labels: usize,
    record_stride: usize,
) -> CmdResult {
    if !(delta > 0.0) {
        return Err(validation(format!("delta must be positive, got {delta}")));
    }
    if !(dt > 0.0 && t_end > 0.0) {
        return Err(validation("t-end and dt must be positive"));
    }
    let config =
        format!("evolve delta={delta:.17e} t_end={t_end:.17e} dt={dt:.17e} labels={labels}");

    let initial = PerturbationState::quadratic_family(labels, delta)
        .map_err(|e| validation(e.to_string()))?;
    let trajectory = chareval::evolve(
        &initial,
        &EvolveConfig {
            t_end,
            dt,
            record_stride,
            ..EvolveConfig::default()
        },
    )
    .map_err(aborted)?;

    let rows: Vec<Vec<String>> = trajectory
        .records
        .iter()
        .map(|r| {
            vec![
                output::fmt(r.time),
                output::fmt(r.v0),
                output::fmt(r.conserved.mass_zeta),
                output::fmt(r.conserved.blowup_invariant),
                output::fmt(r.conserved.full_mass),
                output::fmt(r.conserved.momentum),
                output::fmt(r.conserved.energy),
                output::fmt(r.w1inf),
                output::fmt(r.h1_norm),
                output::fmt(r.max_abs_v),
                output::fmt(r.min_spacing),
            ]
        })
        .collect();
    emit(
        &out_dir.join("evolve.csv"),
        &output::csv_document(
            &[
                "t",
                "v0",
                "mass_zeta",
                "blowup_invariant",
                "full_mass",
                "momentum",
                "energy",
                "w1inf",
                "h1_norm",
                "max_abs_v",
                "min_spacing",
            ],
            &rows,
            &config,
        ),
    )?;

    let experiment =
        chareval::instability_experiment(delta, t_end, dt, labels).map_err(aborted)?;
    let summary = EvolveSummary {
        delta,
        t_end,
        dt,
        labels,
        fitted_rate: experiment.fitted_rate,
        theory_rate: experiment.theory_rate,
        relative_error: (experiment.fitted_rate - experiment.theory_rate).abs()
            / experiment.theory_rate,
        blowup_time: experiment.blowup_time,
        breaking_time: experiment.breaking.as_ref().map(|b| b.time),
        breaking_reason: experiment.breaking.as_ref().map(|b| b.reason.clone()),
    };
    let json = serde_json::to_string_pretty(&summary)
        .map_err(|e| aborted(format!("serializing summary: {e}")))?;
    emit(&out_dir.join("evolve_summary.json"), &format!("{json}\n"))?;
    println!(
        "fitted rate {:.5} vs theory {:.5} ({:.2}% off){}",
        summary.fitted_rate,
        summary.theory_rate,
        100.0 * summary.relative_error,
        trajectory
            .breaking
            .map(|b| format!("; breaking at t = {:.4}: {}", b.time, b.reason))
            .unwrap_or_default()
    );

    if want_svg {
        let v0_log: Vec<(f64, f64)> = experiment
            .v0_series
            .iter()
            .filter(|(_, v)| v.abs() > 0.0)
            .map(|&(t, v)| (t, v.abs().ln()))
            .collect();
        emit(
            &out_dir.join("evolve.svg"),
            &svg::chart(
                "log |V0(t)|: gradient growth at the peak",
                &[svg::Series {
                    label: "log|V0|".into(),
                    points: v0_log,
                    scatter: false,
                }],
            ),
        )?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(out_dir: &Path, only: Option<&str>) -> CmdResult {
    let wanted: Option<Vec<usize>> = match only {
        None => None,
        Some(list) => Some(
            list.split(',')
                .map(|p| {
                    p.trim()
                        .parse::<usize>()
                        .map_err(|_| validation(format!("bad check id {p:?}")))
                })
                .collect::<Result<_, _>>()?,
        ),
    };

    let all = [
        verify::check_period_anchor as fn() -> verify::CheckResult,
        verify::check_profile_solver,
        verify::check_peaked_fourier,
        verify::check_small_amplitude_anchor,
        verify::check_translation_mode,
        verify::check_eigen_sweep,
        verify::check_kernel_identities,
        verify::check_strip_witnesses,
        verify::check_resolvent_bound,
        verify::check_nonlinear_conservation,
        verify::check_instability_rate,
        verify::check_determinism,
    ];

    let mut report = String::new();
    let mut all_passed = true;
    for (idx, run) in all.iter().enumerate() {
        let id = idx + 1;
        if let Some(w) = &wanted {
            if !w.contains(&id) {
                continue;
            }
        }
        let result = run();
        println!("{}", result.summary_line());
        report.push_str(&result.summary_line());
        report.push('\n');
        for d in &result.details {
            println!("    {d}");
            report.push_str("    ");
            report.push_str(d);
            report.push('\n');
        }
        all_passed &= result.passed;
    }
    emit(&out_dir.join("verify_report.txt"), &report)?;
    if all_passed {
        println!("verify: all checks passed");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("verify: FAILURES present");
        Ok(ExitCode::from(EXIT_ROW_FAILURES))
    }
}
