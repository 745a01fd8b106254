use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lmicert::baseline::{export_charts, export_radical_scripts};
use lmicert::certifier::rur::export_solver_input;
use lmicert::certifier::{certify_hybrid, replay, CertifyOpts, Certificate};
use lmicert::frontend::{find_feasible_point, FrontendOpts};
use lmicert::pipeline::run_pipeline;
use lmicert::poly::{lagrange_system, random_phi_u};
use lmicert::sdp::{corpus_entry, parse_instance, rotate_instance, RotationSpec, SdpInstance};

mod bench;

const EXIT_INCONCLUSIVE: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_INTERNAL: u8 = 70;

#[derive(Parser, Debug)]
#[command(name = "lmicert", version, about = "Certified feasibility of linear matrix inequalities")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Frontend residual tolerance.
    #[arg(long, global = true, env = "LMICERT_TOL", default_value_t = 1e-9)]
    tol: f64,
    /// Rank threshold for the chart (default √tol).
    #[arg(long, global = true, env = "LMICERT_EPS1")]
    eps1: Option<f64>,
    /// Rank threshold for the fixed variables (default 10³·eps1).
    #[arg(long, global = true, env = "LMICERT_EPS2")]
    eps2: Option<f64>,
    #[arg(long, global = true, env = "LMICERT_SEED", default_value_t = 1)]
    seed: u64,
    #[arg(long = "timeout-s", global = true, env = "LMICERT_TIMEOUT_S", default_value_t = 600.0)]
    timeout_s: f64,
    /// External exact solver, invoked as `bin -f in -o out -P 1`.
    #[arg(long, global = true, env = "LMICERT_SOLVER_BIN")]
    solver_bin: Option<PathBuf>,
    #[arg(long, global = true, env = "LMICERT_OUT")]
    out: Option<PathBuf>,
}

impl Common {
    fn certify_opts(&self) -> CertifyOpts {
        CertifyOpts {
            frontend: FrontendOpts { tol: self.tol, eps1: self.eps1, ..FrontendOpts::default() },
            eps2: self.eps2,
            seed: self.seed,
            solver_bin: self.solver_bin.clone(),
            timeout: self.timeout(),
            ..CertifyOpts::default()
        }
    }

    fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_s.max(0.0))
    }
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Certify one instance; exit 0 iff CERTIFIED_FEASIBLE.
    Certify {
        /// `corpus:NAME` or a path to an instance file.
        instance: String,
        /// Apply the seeded integer congruence first.
        #[arg(long)]
        rotate: Option<u64>,
    },
    /// Re-check a stored certificate against its instance.
    Replay {
        certificate: PathBuf,
        instance: String,
        #[arg(long)]
        rotate: Option<u64>,
    },
    /// Hybrid and baseline over the corpus, clean and rotated.
    Bench(bench::BenchArgs),
    /// Write polynomial systems in the external formats.
    Export {
        instance: String,
        #[arg(long, value_enum)]
        mode: ExportMode,
        #[arg(long)]
        rotate: Option<u64>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ExportMode {
    FixedSystem,
    Charts,
    Lagrange,
    RadicalScript,
}

enum Failure {
    Usage(String),
    Internal(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Internal(e)
    }
}

fn load_instance(spec: &str, rotate: Option<u64>) -> Result<SdpInstance, Failure> {
    let inst = if let Some(name) = spec.strip_prefix("corpus:") {
        corpus_entry(name).ok_or_else(|| Failure::Usage(format!("unknown corpus instance '{name}'")))?.instance
    } else {
        let text = std::fs::read_to_string(spec).map_err(|e| Failure::Usage(format!("{spec}: {e}")))?;
        parse_instance(&text).map_err(|e| Failure::Usage(format!("{spec}: {e}")))?
    };
    match rotate {
        None => Ok(inst),
        Some(s) => rotate_instance(&inst, &RotationSpec::from_seed(inst.n, s)).map_err(|e| Failure::Usage(e.to_string())),
    }
}

/// Stdout that tolerates a closed pipe (`lmicert ... | head`).
macro_rules! say {
    ($($t:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}
pub(crate) use say;

fn file_stem(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' }).collect()
}

fn write(path: &Path, body: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Internal(anyhow::anyhow!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, body).map_err(|e| Failure::Internal(anyhow::anyhow!("{}: {e}", path.display())))
}

fn cmd_certify(common: &Common, spec: &str, rotate: Option<u64>) -> Result<u8, Failure> {
    let inst = load_instance(spec, rotate)?;
    let cert = certify_hybrid(&inst, &common.certify_opts()).unwrap_or_else(|e| {
        let mut c = Certificate::new(&inst.name, inst.n);
        c.note(e.to_string());
        c
    });
    let path = common.out.clone().unwrap_or_else(|| PathBuf::from(format!("{}.cert.json", file_stem(&inst.name))));
    write(&path, &cert.to_json())?;
    say!("{}certificate: {}", cert.summary(), path.display());
    Ok(if cert.is_certified() { 0 } else { EXIT_INCONCLUSIVE })
}

fn cmd_replay(cert: &Path, spec: &str, rotate: Option<u64>) -> Result<u8, Failure> {
    let text = std::fs::read_to_string(cert).map_err(|e| Failure::Usage(format!("{}: {e}", cert.display())))?;
    let c = Certificate::from_json(&text).map_err(|e| Failure::Usage(e.to_string()))?;
    let inst = load_instance(spec, rotate)?;
    match replay(&c, &inst) {
        Ok(m) => {
            say!("replay ok: eig_margin >= {m} (~{:.6})", lmicert::rational::to_f64(&m));
            Ok(0)
        }
        Err(e) => {
            say!("replay failed: {e}");
            Ok(EXIT_INCONCLUSIVE)
        }
    }
}

fn cmd_export(common: &Common, spec: &str, mode: ExportMode, rotate: Option<u64>) -> Result<u8, Failure> {
    let inst = load_instance(spec, rotate)?;
    let dir = common.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let stem = file_stem(&inst.name);
    let files: Vec<(String, String)> = match mode {
        ExportMode::Charts => export_charts(&inst),
        ExportMode::RadicalScript => export_radical_scripts(&inst),
        ExportMode::FixedSystem | ExportMode::Lagrange => {
            let opts = common.certify_opts();
            let fr = find_feasible_point(&inst, &opts.frontend).map_err(|e| Failure::Internal(e.into()))?;
            let fs = run_pipeline(&inst, &fr.x_tilde, opts.eps1(), opts.eps2(), opts.max_den).map_err(|e| Failure::Internal(e.into()))?;
            let (sys, suffix) = if mode == ExportMode::Lagrange {
                let (phi, u) = random_phi_u(fs.system.nvars(), fs.system.len(), common.seed);
                (lagrange_system(&fs.system, &phi, &u).map_err(|e| Failure::Internal(e.into()))?, "lagrange")
            } else {
                (fs.system, "fixed")
            };
            let body = export_solver_input(&sys).map_err(|e| Failure::Internal(e.into()))?;
            vec![(format!("{stem}.{suffix}.txt"), body)]
        }
    };
    for (name, body) in &files {
        let path = dir.join(name);
        write(&path, body)?;
        say!("{}", path.display());
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match &cli.cmd {
        Cmd::Certify { instance, rotate } => cmd_certify(&cli.common, instance, *rotate),
        Cmd::Replay { certificate, instance, rotate } => cmd_replay(certificate, instance, *rotate),
        Cmd::Bench(args) => bench::cmd_bench(&cli.common, args),
        Cmd::Export { instance, mode, rotate } => cmd_export(&cli.common, instance, *mode, *rotate),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Internal(e)) => {
            eprintln!("internal error: {e:#}");
            ExitCode::from(EXIT_INTERNAL)
        }
    }
}
