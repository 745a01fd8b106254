//! Corpus benchmark: one row per instance and variant, TSV plus a text table.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{mpsc, Mutex};
use std::time::{Duration, Instant};

use clap::Args;

use lmicert::baseline::{run_baseline, BaselineMode, BaselineOpts, ChartOutcome};
use lmicert::certifier::{certify_from_frontend, Certificate, CertifyOpts};
use lmicert::frontend::find_feasible_point;
use lmicert::sdp::{congruent_transform, corpus, rotate_instance, RotationSpec, SdpInstance};

use super::{say, write, Common, Failure};

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Rotation seeds for the rotated variants.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    seeds: Vec<u64>,
    #[arg(long)]
    no_rotated: bool,
    #[arg(long)]
    no_baseline: bool,
    /// Restrict to these corpus names.
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Clone, Debug)]
struct Job {
    name: String,
    rotation: Option<RotationSpec>,
    original: SdpInstance,
    instance: SdpInstance,
    r_min: usize,
    r_max: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct Row {
    name: String,
    variant: String,
    n: usize,
    r_min: usize,
    r_max: Option<usize>,
    r_max_detected: Option<usize>,
    hybrid_status: String,
    hybrid_route: String,
    hybrid_time_s: f64,
    frontend_time_s: Option<f64>,
    residual: Option<f64>,
    baseline_status: String,
    baseline_chart: String,
    baseline_time_s: Option<f64>,
}

const HEADER: [&str; 14] = [
    "name",
    "variant",
    "n",
    "r_min",
    "r_max",
    "r_max_detected",
    "hybrid_status",
    "hybrid_route",
    "hybrid_time_s",
    "frontend_time_s",
    "residual",
    "baseline_status",
    "baseline_chart",
    "baseline_time_s",
];

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "-".into(), T::to_string)
}

fn secs(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |t| format!("{t:.2}"))
}

impl Row {
    fn cells(&self) -> Vec<String> {
        vec![
            self.name.clone(),
            self.variant.clone(),
            self.n.to_string(),
            self.r_min.to_string(),
            opt(&self.r_max),
            opt(&self.r_max_detected),
            self.hybrid_status.clone(),
            self.hybrid_route.clone(),
            format!("{:.2}", self.hybrid_time_s),
            secs(self.frontend_time_s),
            self.residual.map_or_else(|| "-".into(), |r| format!("{r:.1e}")),
            self.baseline_status.clone(),
            self.baseline_chart.clone(),
            secs(self.baseline_time_s),
        ]
    }
}

fn jobs(args: &BenchArgs) -> Vec<Job> {
    let mut out = Vec::new();
    for e in corpus() {
        let name = e.instance.name.clone();
        if !args.only.is_empty() && !args.only.contains(&name) {
            continue;
        }
        let base = Job {
            name: name.clone(),
            rotation: None,
            original: e.instance.clone(),
            instance: e.instance.clone(),
            r_min: e.r_min,
            r_max: e.r_max,
        };
        out.push(base.clone());
        if args.no_rotated {
            continue;
        }
        for &s in &args.seeds {
            let spec = RotationSpec::from_seed(e.instance.n, s);
            let inst = rotate_instance(&e.instance, &spec).expect("seeded rotations are nonsingular");
            out.push(Job { rotation: Some(spec), instance: inst, ..base.clone() });
        }
    }
    out
}

/// Run `f` on its own thread; `None` when it overruns.
fn with_timeout<T: Send + 'static>(timeout: Duration, f: impl FnOnce() -> T + Send + 'static) -> Option<T> {
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        let _ = tx.send(f());
    });
    rx.recv_timeout(timeout).ok()
}

fn hybrid(job: &Job, opts: &CertifyOpts, timeout: Duration, row: &mut Row) {
    let inst = job.instance.clone();
    let o = opts.clone();
    let t = Instant::now();
    let res = with_timeout(timeout, move || {
        let t0 = Instant::now();
        let fr = find_feasible_point(&inst, &o.frontend)?;
        let ft = t0.elapsed().as_secs_f64();
        let cert = certify_from_frontend(&inst, &fr, &o)?;
        Ok::<(f64, usize, Certificate), lmicert::certifier::CertifyError>((ft, fr.detected_rank, cert))
    });
    row.hybrid_time_s = t.elapsed().as_secs_f64();
    match res {
        None => row.hybrid_status = "TIMEOUT".into(),
        Some(Err(e)) => row.hybrid_status = format!("ERROR({e})"),
        Some(Ok((ft, rank, cert))) => {
            row.frontend_time_s = Some(ft);
            row.r_max_detected = Some(rank);
            row.hybrid_status = cert.status.to_string();
            row.hybrid_route = cert.route.map_or_else(|| "-".into(), |r| serde_json::to_value(r).unwrap().as_str().unwrap().to_string());
            if let Some(x) = cert.x_mid_q() {
                let back = match &job.rotation {
                    Some(spec) => congruent_transform(&x, &spec.t_q()),
                    None => x,
                };
                row.residual = Some(job.original.residual_f64(&back.to_f64()));
            }
        }
    }
}

fn baseline(job: &Job, common: &Common, row: &mut Row) {
    let opts = BaselineOpts {
        mode: common.solver_bin.clone().map_or(BaselineMode::Internal, BaselineMode::External),
        seed: common.seed,
        timeout: common.timeout(),
        ..BaselineOpts::default()
    };
    let inst = job.instance.clone();
    let t = Instant::now();
    let res = with_timeout(common.timeout(), move || run_baseline(&inst, &opts));
    row.baseline_time_s = Some(t.elapsed().as_secs_f64());
    match res {
        None => row.baseline_status = "TIMEOUT".into(),
        Some(en) => match en.found() {
            Some(hit) => {
                row.baseline_status = ChartOutcome::PsdFound.to_string();
                let ix: Vec<String> = hit.iota.iter().map(|i| (i + 1).to_string()).collect();
                row.baseline_chart = format!("{{{}}}", ix.join(","));
            }
            None if en.charts.iter().any(|c| c.outcome == Some(ChartOutcome::Timeout)) => row.baseline_status = "TIMEOUT".into(),
            None => row.baseline_status = "FAIL".into(),
        },
    }
}

fn run_job(job: &Job, common: &Common, args: &BenchArgs) -> Row {
    let mut row = Row {
        name: job.name.clone(),
        variant: job.rotation.as_ref().map_or_else(|| "clean".into(), |s| format!("rotated:{}", s.seed)),
        n: job.instance.n,
        r_min: job.r_min,
        r_max: job.r_max,
        r_max_detected: None,
        hybrid_status: String::new(),
        hybrid_route: "-".into(),
        hybrid_time_s: 0.0,
        frontend_time_s: None,
        residual: None,
        baseline_status: "SKIPPED".into(),
        baseline_chart: "-".into(),
        baseline_time_s: None,
    };
    hybrid(job, &common.certify_opts(), common.timeout(), &mut row);
    if !args.no_baseline {
        baseline(job, common, &mut row);
    }
    row
}

pub fn render_tsv(rows: &[Row], echo: &str) -> String {
    let mut s = format!("# {echo}\n{}\n", HEADER.join("\t"));
    for r in rows {
        s += &r.cells().join("\t");
        s.push('\n');
    }
    s
}

pub fn render_table(rows: &[Row]) -> String {
    let mut cells: Vec<Vec<String>> = vec![HEADER.iter().map(|h| h.to_string()).collect()];
    cells.extend(rows.iter().map(Row::cells));
    let widths: Vec<usize> = (0..HEADER.len()).map(|c| cells.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();
    let mut s = String::new();
    for (i, r) in cells.iter().enumerate() {
        let line: Vec<String> = r.iter().zip(&widths).map(|(v, w)| format!("{v:<w$}")).collect();
        s += line.join("  ").trim_end();
        s.push('\n');
        if i == 0 {
            s += &"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1));
            s.push('\n');
        }
    }
    s
}

pub fn cmd_bench(common: &Common, args: &BenchArgs) -> Result<u8, Failure> {
    let all = jobs(args);
    if all.is_empty() {
        return Err(Failure::Usage("no corpus instance selected".into()));
    }
    let workers = args.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())).max(1);
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Row>>> = Mutex::new(vec![None; all.len()]);
    std::thread::scope(|s| {
        for _ in 0..workers.min(all.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = all.get(i) else { break };
                let row = run_job(job, common, args);
                eprintln!("{} [{}]: hybrid {} / baseline {}", row.name, row.variant, row.hybrid_status, row.baseline_status);
                slots.lock().unwrap()[i] = Some(row);
            });
        }
    });
    let rows: Vec<Row> = slots.into_inner().unwrap().into_iter().map(|r| r.expect("every job reports")).collect();
    let echo = format!(
        "lmicert bench seed={} rotation_seeds={} tol={:e} timeout_s={} baseline={}",
        common.seed,
        if args.no_rotated { "none".to_string() } else { args.seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(",") },
        common.tol,
        common.timeout_s,
        match (&common.solver_bin, args.no_baseline) {
            (_, true) => "off",
            (Some(_), false) => "external",
            (None, false) => "internal",
        }
    );
    let dir = common.out.clone().unwrap_or_else(|| PathBuf::from("bench"));
    let table = render_table(&rows);
    write(&dir.join("bench.tsv"), &render_tsv(&rows, &echo))?;
    write(&dir.join("bench.txt"), &format!("{echo}\n\n{table}"))?;
    say!("{table}report: {}", dir.display());
    Ok(0)
}
