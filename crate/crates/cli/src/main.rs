//! Command line driver: generate benchmark instances, run the solvers
//! with CSV bound traces, and render traces as SVG plots.
//!
//! Exit codes: 0 when the requested gap (or deterministic tolerance) was
//! met, 2 when the iteration budget ran out first, 64 for flag errors,
//! 1 for runtime failures (bad files, solver errors).

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use nestedcuts::cuts::assemble_stage_lp;
use nestedcuts::dcup::{dcup_run, DcupRecord};
use nestedcuts::instances::{
    generate_instance_file, instance_problem, load_instance, save_instance,
};
use nestedcuts::lpcore::StageLp;
use nestedcuts::model::Problem;
use nestedcuts::stodcup::{
    run, Algo, BoundRecord, EpsSchedule, RunConfig, SolverState, StopReason,
};

#[derive(Parser)]
#[command(
    name = "nestedcuts",
    version,
    about = "Multistage stochastic convex programs by nested cutting planes"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Worker threads for per-stage child solves (default: all cores;
    /// env NESTEDCUTS_THREADS is used when the flag is absent).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a benchmark instance and write it as JSON.
    Generate(GenerateArgs),
    /// Run a solver on an instance file.
    Solve(SolveArgs),
    /// Render a bound-trace CSV as an SVG plot.
    Plot(PlotArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Horizon (number of stages).
    #[arg(long = "T")]
    t: usize,
    /// State dimension.
    #[arg(long = "n")]
    n: usize,
    /// Realizations per stage from stage 2 on.
    #[arg(long = "M")]
    m: usize,
    #[arg(long)]
    seed: u64,
    /// Output JSON path.
    #[arg(long)]
    out: PathBuf,
    /// Overwrite an existing output file.
    #[arg(long)]
    force: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgoArg {
    /// Deterministic nested cutting planes (single-scenario instances).
    Dcup,
    /// Sampled solver with tight subproblem solves.
    Stodcup,
    /// Sampled solver with scheduled inexact solves.
    Istodcup,
    /// Inexact solver with oldest-first cost-to-go cut selection.
    IstodcupCs,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum)]
    algo: AlgoArg,
    /// Instance JSON path.
    #[arg(long)]
    instance: PathBuf,
    /// Relative gap threshold (deterministic runs use it as tolerance).
    #[arg(long, default_value_t = 0.1)]
    gap: f64,
    #[arg(long, default_value_t = 2000)]
    max_iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Inexactness schedule: builtin:table2, builtin:table2/10,
    /// constant:EPS, or a path to a schedule JSON file.
    #[arg(long)]
    eps_schedule: Option<String>,
    /// Scenario costs averaged into the upper bound.
    #[arg(long, default_value_t = 200)]
    ub_window: usize,
    /// First iteration that publishes an upper bound.
    #[arg(long, default_value_t = 200)]
    ub_start: usize,
    /// One-sided confidence parameter for the upper bound.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Cut-selection budget (bundle size held during the window).
    #[arg(long, default_value_t = 350)]
    cs_keep: usize,
    /// Cut-selection window length.
    #[arg(long, default_value_t = 350)]
    cs_window: usize,
    /// Warm-start linearizations per bundle (0 keeps loose planes).
    #[arg(long, default_value_t = 20)]
    warm_start: usize,
    /// Write the per-iteration bound trace CSV here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write a final bundle snapshot CSV here.
    #[arg(long)]
    snapshot: Option<PathBuf>,
    /// Write the final first-stage LP as text here.
    #[arg(long)]
    dump_first_lp: Option<PathBuf>,
    /// Record wall times as 0 so traces are byte-reproducible.
    #[arg(long)]
    zero_time: bool,
}

#[derive(Args)]
struct PlotArgs {
    /// Bound-trace CSV produced by `solve --trace`.
    #[arg(long)]
    trace: PathBuf,
    /// Output SVG path.
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp
                | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let threads = cli.threads.or_else(|| {
        std::env::var("NESTEDCUTS_THREADS").ok().and_then(|s| s.parse().ok())
    });
    if let Some(t) = threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let code = match cli.cmd {
        Cmd::Generate(args) => cmd_generate(&args),
        Cmd::Solve(args) => cmd_solve(&args),
        Cmd::Plot(args) => cmd_plot(&args),
    };
    std::process::exit(code);
}

fn cmd_generate(args: &GenerateArgs) -> i32 {
    if args.out.exists() && !args.force {
        eprintln!(
            "output {} exists; pass --force to overwrite",
            args.out.display()
        );
        return 1;
    }
    let file = match generate_instance_file(args.t, args.n, args.m, args.seed) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("generation failed: {e}");
            return 1;
        }
    };
    if let Err(e) = save_instance(&file, &args.out) {
        eprintln!("{e}");
        return 1;
    }
    println!(
        "wrote {} (T={} n={} M={} seed={})",
        args.out.display(),
        args.t,
        args.n,
        args.m,
        args.seed
    );
    0
}

fn load_problem(path: &Path) -> Result<Problem, String> {
    let file = load_instance(path).map_err(|e| e.to_string())?;
    instance_problem(&file).map_err(|e| e.to_string())
}

fn resolve_schedule(spec: Option<&str>) -> Result<EpsSchedule, String> {
    let Some(s) = spec else {
        return Ok(EpsSchedule::benchmark());
    };
    match EpsSchedule::parse_spec(s).map_err(|e| e.to_string())? {
        Some(sched) => Ok(sched),
        None => {
            let body = std::fs::read_to_string(s)
                .map_err(|e| format!("schedule file {s}: {e}"))?;
            EpsSchedule::from_json_str(&body).map_err(|e| e.to_string())
        }
    }
}

fn cmd_solve(args: &SolveArgs) -> i32 {
    let problem = match load_problem(&args.instance) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{e}");
            return 1;
        }
    };
    if args.algo == AlgoArg::Dcup {
        return solve_deterministic(args, &problem);
    }
    let algo = match args.algo {
        AlgoArg::Stodcup => Algo::StoDcup,
        AlgoArg::Istodcup => Algo::IStoDcup,
        AlgoArg::IstodcupCs => Algo::IStoDcupCs,
        AlgoArg::Dcup => unreachable!(),
    };
    let schedule = match resolve_schedule(args.eps_schedule.as_deref()) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return 1;
        }
    };
    let config = RunConfig {
        algo,
        schedule,
        gap_threshold: args.gap,
        max_iters: args.max_iters,
        warm_start_count: args.warm_start,
        ub_window: args.ub_window,
        ub_start: args.ub_start,
        alpha: args.alpha,
        cs_keep: args.cs_keep,
        cs_window: args.cs_window,
        seed: args.seed,
    };
    match config.validate() {
        Ok(warnings) => {
            for w in warnings {
                eprintln!("warning: {w}");
            }
        }
        Err(e) => {
            eprintln!("{e}");
            return 1;
        }
    }
    let res = match run(&problem, &config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("solve failed: {e}");
            return 1;
        }
    };
    if let Some(path) = &args.trace {
        if let Err(e) = write_bound_trace(path, &res.records, args.zero_time) {
            eprintln!("trace {}: {e}", path.display());
            return 1;
        }
    }
    if let Some(path) = &args.snapshot {
        if let Err(e) = write_snapshot(path, &res.state) {
            eprintln!("snapshot {}: {e}", path.display());
            return 1;
        }
    }
    if let Some(path) = &args.dump_first_lp {
        let lp = first_stage_lp(&res.state);
        if let Err(e) = std::fs::write(path, dump_stage_lp(&lp)) {
            eprintln!("lp dump {}: {e}", path.display());
            return 1;
        }
    }
    match res.records.last() {
        Some(r) => {
            let gap = (r.ub - r.lb) / r.ub.abs().max(1.0);
            println!(
                "iters={} lb={} ub={} gap={} lp_solves={} ipm_iters={}",
                r.iter, r.lb, r.ub, gap, r.lp_solves, res.state.ipm_iters
            );
        }
        None => println!("no iterations run"),
    }
    match res.stop {
        StopReason::GapMet => 0,
        StopReason::MaxIters => 2,
    }
}

fn solve_deterministic(args: &SolveArgs, problem: &Problem) -> i32 {
    if problem.stages.iter().any(|s| s.len() != 1) {
        eprintln!("dcup requires deterministic instance");
        return 1;
    }
    let res = match dcup_run(problem, args.max_iters, args.gap) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("solve failed: {e}");
            return 1;
        }
    };
    if let Some(path) = &args.trace {
        if let Err(e) = write_dcup_trace(path, &res.records, args.zero_time) {
            eprintln!("trace {}: {e}", path.display());
            return 1;
        }
    }
    if let Some(path) = &args.snapshot {
        if let Err(e) = write_snapshot(path, &res.state) {
            eprintln!("snapshot {}: {e}", path.display());
            return 1;
        }
    }
    if let Some(path) = &args.dump_first_lp {
        let lp = first_stage_lp(&res.state);
        if let Err(e) = std::fs::write(path, dump_stage_lp(&lp)) {
            eprintln!("lp dump {}: {e}", path.display());
            return 1;
        }
    }
    if let Some(r) = res.records.last() {
        let flag = if r.infeasible_trajectory { " (infeasible trajectory)" } else { "" };
        println!(
            "iters={} lb={} ub={}{} max_violation={}",
            r.iter, r.lb, r.ub, flag, r.max_violation
        );
    }
    if res.converged {
        0
    } else {
        2
    }
}

fn write_bound_trace(
    path: &Path,
    records: &[BoundRecord],
    zero_time: bool,
) -> Result<(), String> {
    let mut w = csv::Writer::from_path(path).map_err(|e| e.to_string())?;
    for r in records {
        let mut r = r.clone();
        if zero_time {
            r.wall_time_s = 0.0;
        }
        w.serialize(&r).map_err(|e| e.to_string())?;
    }
    w.flush().map_err(|e| e.to_string())
}

fn write_dcup_trace(
    path: &Path,
    records: &[DcupRecord],
    zero_time: bool,
) -> Result<(), String> {
    let mut w = csv::Writer::from_path(path).map_err(|e| e.to_string())?;
    for r in records {
        let mut r = r.clone();
        if zero_time {
            r.time_s = 0.0;
        }
        w.serialize(&r).map_err(|e| e.to_string())?;
    }
    w.flush().map_err(|e| e.to_string())
}

/// Bundle snapshot rows: kind, stage, realization, birth iteration, the
/// constant, then the state and parent-state coefficient blocks.
fn write_snapshot(path: &Path, state: &SolverState) -> Result<(), String> {
    let n = state.problem.dim;
    let mut w = csv::Writer::from_path(path).map_err(|e| e.to_string())?;
    let mut header = vec![
        "kind".to_string(),
        "t".to_string(),
        "j".to_string(),
        "birth_iter".to_string(),
        "c".to_string(),
    ];
    for i in 1..=n {
        header.push(format!("a{i}"));
    }
    for i in 1..=n {
        header.push(format!("b{i}"));
    }
    w.write_record(&header).map_err(|e| e.to_string())?;
    let fmt = |v: f64| format!("{v}");
    for (ti, row) in state.f_bundles.iter().enumerate() {
        for (j, bundle) in row.iter().enumerate() {
            for cut in &bundle.cuts {
                let mut rec = vec![
                    "objective".to_string(),
                    (ti + 1).to_string(),
                    j.to_string(),
                    cut.birth_iter.to_string(),
                    fmt(cut.c),
                ];
                rec.extend(cut.a.iter().map(|v| fmt(*v)));
                rec.extend(cut.b.iter().map(|v| fmt(*v)));
                w.write_record(&rec).map_err(|e| e.to_string())?;
            }
        }
    }
    for (ti, row) in state.g_bundles.iter().enumerate() {
        for (j, bundles) in row.iter().enumerate() {
            for (gi, bundle) in bundles.iter().enumerate() {
                for cut in &bundle.cuts {
                    let mut rec = vec![
                        format!("constraint({gi})"),
                        (ti + 1).to_string(),
                        j.to_string(),
                        cut.birth_iter.to_string(),
                        fmt(cut.c),
                    ];
                    rec.extend(cut.a.iter().map(|v| fmt(*v)));
                    rec.extend(cut.b.iter().map(|v| fmt(*v)));
                    w.write_record(&rec).map_err(|e| e.to_string())?;
                }
            }
        }
    }
    for (qi, bundle) in state.q_bundles.iter().enumerate() {
        for cut in &bundle.cuts {
            let mut rec = vec![
                "cost-to-go".to_string(),
                (qi + 2).to_string(),
                String::new(),
                cut.birth_iter.to_string(),
                fmt(cut.theta),
            ];
            rec.extend(cut.beta.iter().map(|v| fmt(*v)));
            rec.extend(std::iter::repeat("0".to_string()).take(n));
            w.write_record(&rec).map_err(|e| e.to_string())?;
        }
    }
    w.flush().map_err(|e| e.to_string())
}

fn first_stage_lp(state: &SolverState) -> StageLp {
    let problem = &state.problem;
    assemble_stage_lp(
        &state.f_bundles[0][0],
        &state.g_bundles[0][0],
        &state.q_bundles[0],
        &problem.stages[0].realizations[0].coupling,
        problem.state_set(1),
        &problem.x0,
    )
}

/// Text form of a stage LP. Row kinds: OBJCUT (f >= a'x + b'xp + c),
/// EQ (a'x + b'xp = rhs), CONCUT (d'x + e'xp + h <= 0), CTGCUT
/// (theta >= beta'x + const), then bounds and the anchor state.
fn dump_stage_lp(lp: &StageLp) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let join = |v: &[f64]| -> String {
        v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(" ")
    };
    let _ = writeln!(out, "* stage LP: minimize f + theta, x in R^{}", lp.n);
    let _ = writeln!(out, "* row kinds: OBJCUT f >= a.x + b.xp + c");
    let _ = writeln!(out, "*            EQ     a.x + b.xp = rhs");
    let _ = writeln!(out, "*            CONCUT d.x + e.xp + h <= 0");
    let _ = writeln!(out, "*            CTGCUT theta >= beta.x + const");
    for i in 0..lp.obj_c.len() {
        let _ = writeln!(
            out,
            "OBJCUT {i} a= {} b= {} c= {}",
            join(lp.obj_a.row(i)),
            join(lp.obj_b.row(i)),
            lp.obj_c[i]
        );
    }
    for i in 0..lp.eq_rhs.len() {
        let _ = writeln!(
            out,
            "EQ {i} a= {} b= {} rhs= {}",
            join(lp.eq_a.row(i)),
            join(lp.eq_b.row(i)),
            lp.eq_rhs[i]
        );
    }
    for i in 0..lp.con_h.len() {
        let _ = writeln!(
            out,
            "CONCUT {i} d= {} e= {} h= {}",
            join(lp.con_d.row(i)),
            join(lp.con_e.row(i)),
            lp.con_h[i]
        );
    }
    for i in 0..lp.ctg_theta.len() {
        let _ = writeln!(
            out,
            "CTGCUT {i} beta= {} const= {}",
            join(lp.ctg_beta.row(i)),
            lp.ctg_theta[i]
        );
    }
    let _ = writeln!(out, "BOUNDS lo= {} hi= {}", join(&lp.lo), join(&lp.hi));
    let _ = writeln!(out, "ANCHOR xprev= {}", join(&lp.x_prev));
    out
}

fn cmd_plot(args: &PlotArgs) -> i32 {
    let rows = match read_trace(&args.trace) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return 1;
        }
    };
    if rows.is_empty() {
        eprintln!("trace {} has no rows", args.trace.display());
        return 1;
    }
    let svg = render_bounds_svg(&rows);
    if let Err(e) = std::fs::write(&args.out, svg) {
        eprintln!("plot {}: {e}", args.out.display());
        return 1;
    }
    println!("wrote {}", args.out.display());
    0
}

/// (iter, lb, ub) rows from any trace CSV carrying those columns.
fn read_trace(path: &Path) -> Result<Vec<(f64, f64, f64)>, String> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| format!("trace {}: {e}", path.display()))?;
    let headers = r.headers().map_err(|e| e.to_string())?.clone();
    let col = |name: &str| -> Result<usize, String> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| format!("trace {} lacks a {name:?} column", path.display()))
    };
    let (ci, cl, cu) = (col("iter")?, col("lb")?, col("ub")?);
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let get = |i: usize| -> Result<f64, String> {
            rec.get(i)
                .ok_or_else(|| "short row".to_string())?
                .parse::<f64>()
                .map_err(|e| format!("bad number in trace: {e}"))
        };
        out.push((get(ci)?, get(cl)?, get(cu)?));
    }
    Ok(out)
}

fn render_bounds_svg(rows: &[(f64, f64, f64)]) -> String {
    use std::fmt::Write;
    const W: f64 = 800.0;
    const H: f64 = 500.0;
    const ML: f64 = 80.0;
    const MR: f64 = 20.0;
    const MT: f64 = 20.0;
    const MB: f64 = 55.0;

    let finite: Vec<f64> = rows
        .iter()
        .flat_map(|(_, lb, ub)| [*lb, *ub])
        .filter(|v| v.is_finite())
        .collect();
    let amax = finite.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let amin_nz = finite
        .iter()
        .filter(|v| **v != 0.0)
        .fold(f64::INFINITY, |m, v| m.min(v.abs()));
    // A log-symmetric axis when the magnitudes span over four decades.
    let symlog = amin_nz.is_finite() && amax > 0.0 && amax / amin_nz > 1e4;
    let fwd = |v: f64| -> f64 {
        if symlog {
            v.signum() * (1.0 + v.abs()).log10()
        } else {
            v
        }
    };
    let inv = |u: f64| -> f64 {
        if symlog {
            u.signum() * (10.0_f64.powf(u.abs()) - 1.0)
        } else {
            u
        }
    };

    let (x0, x1) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| {
        (a.min(r.0), b.max(r.0))
    });
    let (x0, x1) = if x0 == x1 { (x0 - 0.5, x1 + 0.5) } else { (x0, x1) };
    let (mut y0, mut y1) = finite.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY),
        |(a, b), v| (a.min(fwd(*v)), b.max(fwd(*v))),
    );
    if !y0.is_finite() || !y1.is_finite() {
        y0 = 0.0;
        y1 = 1.0;
    }
    if y0 == y1 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);

    let px = |v: f64| ML + (v - x0) / (x1 - x0) * (W - ML - MR);
    let py = |v: f64| H - MB - (fwd(v) - y0) / (y1 - y0) * (H - MT - MB);

    let label = |v: f64| -> String {
        let a = v.abs();
        if a != 0.0 && (a >= 1e4 || a < 1e-2) {
            format!("{v:.2e}")
        } else {
            format!("{v:.3}")
        }
    };

    // Split a series into polyline segments at NaN holes.
    let polylines = |pick: &dyn Fn(&(f64, f64, f64)) -> f64, color: &str| -> String {
        let mut out = String::new();
        let mut seg: Vec<String> = Vec::new();
        let flush = |seg: &mut Vec<String>, out: &mut String| {
            if seg.len() >= 2 {
                let _ = write!(
                    out,
                    "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                    color,
                    seg.join(" ")
                );
            } else if seg.len() == 1 {
                let _ = write!(
                    out,
                    "<circle fill=\"{}\" r=\"2\" transform=\"translate({})\"/>\n",
                    color,
                    seg[0].replace(',', " ")
                );
            }
            seg.clear();
        };
        for row in rows {
            let v = pick(row);
            if v.is_finite() {
                seg.push(format!("{:.2},{:.2}", px(row.0), py(v)));
            } else {
                flush(&mut seg, &mut out);
            }
        }
        flush(&mut seg, &mut out);
        out
    };

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\">\n<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    );
    let _ = write!(
        svg,
        "<line x1=\"{ML}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - MB,
        W - MR,
        H - MB
    );
    let _ = write!(
        svg,
        "<line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - MB
    );
    for k in 0..=4 {
        let xv = x0 + (x1 - x0) * k as f64 / 4.0;
        let xp = px(xv);
        let _ = write!(
            svg,
            "<line x1=\"{xp:.2}\" y1=\"{}\" x2=\"{xp:.2}\" y2=\"{}\" stroke=\"black\"/>\n\
             <text x=\"{xp:.2}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
            H - MB,
            H - MB + 5.0,
            H - MB + 20.0,
            label(xv)
        );
        let yu = y0 + (y1 - y0) * k as f64 / 4.0;
        let yp = H - MB - (yu - y0) / (y1 - y0) * (H - MT - MB);
        let _ = write!(
            svg,
            "<line x1=\"{}\" y1=\"{yp:.2}\" x2=\"{ML}\" y2=\"{yp:.2}\" stroke=\"black\"/>\n\
             <text x=\"{}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"end\">{}</text>\n",
            ML - 5.0,
            ML - 8.0,
            yp + 4.0,
            label(inv(yu))
        );
    }
    let _ = write!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"14\" text-anchor=\"middle\">iteration</text>\n",
        ML + (W - ML - MR) / 2.0,
        H - 10.0
    );
    let _ = write!(
        svg,
        "<text x=\"18\" y=\"{:.2}\" font-size=\"14\" text-anchor=\"middle\" \
         transform=\"rotate(-90 18 {:.2})\">bound{}</text>\n",
        MT + (H - MT - MB) / 2.0,
        MT + (H - MT - MB) / 2.0,
        if symlog { " (symlog)" } else { "" }
    );
    svg.push_str(&polylines(&|r| r.1, "#1f77b4"));
    svg.push_str(&polylines(&|r| r.2, "#d62728"));
    let _ = write!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"#1f77b4\">lower bound</text>\n\
         <text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"#d62728\">upper bound</text>\n",
        W - 160.0,
        MT + 15.0,
        W - 160.0,
        MT + 32.0
    );
    svg.push_str("</svg>\n");
    svg
}
