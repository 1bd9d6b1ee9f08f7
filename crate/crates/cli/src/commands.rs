use crate::output::{csv_field, usage, CliError, CliResult, OutDir};
use crate::{AnalyzeArgs, DistArgs, DistKind, GraphArgs, McArgs, NonIidArgs, OrderArg};
use serde::Serialize;
use ssta_core::corrections::{
    corrected_cdf, corrected_mean, corrected_pdf, correlation_sum, validity_check, CorrelationSum,
    EpsilonMatrix, Order, ValidityReport,
};
use ssta_core::format::real;
use ssta_core::montecarlo::{
    empirical_stats, non_iid_experiment, sample_max_distribution, Ar1Model, Histogram, McConfig,
    NonIidConfig,
};
use ssta_core::timing_graph::{
    accumulated_delay_params, enumerate_paths, graph_delay_analysis, normalize_source_sink,
    parse_graph_auto, path_covariance, PathSet, TimingGraph,
};
use ssta_core::{GumbelMoments, GumbelParams};
use std::path::Path;

impl From<OrderArg> for Order {
    fn from(o: OrderArg) -> Self {
        match o {
            OrderArg::First => Order::First,
            OrderArg::Second => Order::Second,
            OrderArg::Complete => Order::Complete,
        }
    }
}

fn check_rho(rho: f64, flag: &str) -> CliResult<()> {
    if !(0.0..=1.0).contains(&rho) {
        return usage(format!("{flag} must lie in [0, 1], got {rho}"));
    }
    Ok(())
}

fn mc_config(reps: usize, seed: u64, workers: usize) -> CliResult<McConfig> {
    if reps < 1 {
        return usage("--reps must be at least 1");
    }
    if workers < 1 {
        return usage("--workers must be at least 1");
    }
    Ok(McConfig::new(reps, seed, workers)?)
}

fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

/// Reads a square matrix: rows of numbers separated by whitespace or commas.
fn load_eps(path: &Path) -> CliResult<EpsilonMatrix> {
    let text = read_file(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>().map_err(|_| ssta_core::Error::Parse {
                    line: k + 1,
                    message: format!("`{t}` is not a number"),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 {
        return Err(ssta_core::Error::EmptyInput.into());
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(ssta_core::Error::Parse {
            line: i + 1,
            message: format!("row {} has {} entries, expected {n}", i + 1, r.len()),
        }
        .into());
    }
    let flat: Vec<f64> = rows.concat();
    let diag: Vec<f64> = (0..n).map(|i| flat[i * n + i]).collect();
    let m = if diag.iter().all(|&d| d == 1.0) {
        EpsilonMatrix::from_correlation(n, &flat)
    } else {
        EpsilonMatrix::new(n, flat)
    };
    m.map_err(|e| CliError::Usage(format!("--eps-file: {e}")))
}

#[derive(Serialize)]
struct DistSidecar {
    kind: DistKind,
    n: usize,
    gumbel: GumbelParams,
    gumbel_moments: GumbelMoments,
    correlation_sum: CorrelationSum,
    mean: f64,
    z_min: f64,
    z_max: f64,
    points: usize,
    validity: Option<ValidityReport>,
}

pub fn dist(a: &DistArgs, out: &Path) -> CliResult<()> {
    let eps = match (&a.eps_file, a.rho) {
        (Some(path), _) => {
            let m = load_eps(path)?;
            if let Some(n) = a.n.filter(|&n| n != m.dim()) {
                return usage(format!(
                    "--n {n} disagrees with the {}-row --eps-file",
                    m.dim()
                ));
            }
            m
        }
        (None, rho) => {
            let Some(n) = a.n else {
                return usage("--n is required unless --eps-file is given");
            };
            let rho = rho.unwrap_or(0.0);
            check_rho(rho, "--rho")?;
            EpsilonMatrix::ar1(n, rho)?
        }
    };
    let n = eps.dim();
    if n < 2 {
        return usage(format!("--n must be at least 2, got {n}"));
    }
    if a.steps < 1 {
        return usage("--steps must be at least 1");
    }
    let p = GumbelParams::for_count(n)?;
    let z_min = a.z_min.unwrap_or(p.alpha - 2.0);
    let z_max = a.z_max.unwrap_or(p.alpha + 4.0);
    if !(z_min < z_max) || !z_min.is_finite() || !z_max.is_finite() {
        return usage(format!("--z-min ({z_min}) must be below --z-max ({z_max})"));
    }
    let grid: Vec<f64> = (0..=a.steps)
        .map(|k| z_min + (z_max - z_min) * k as f64 / a.steps as f64)
        .collect();

    let order = match a.kind {
        DistKind::Gumbel => None,
        DistKind::First => Some(Order::First),
        DistKind::Second => Some(Order::Second),
        DistKind::Complete => Some(Order::Complete),
    };
    let s = correlation_sum(&eps);
    let eval = |z: f64| match order {
        None => (p.cdf(z), p.pdf(z)),
        Some(o) => (corrected_cdf(z, &p, s, o), corrected_pdf(z, &p, s, o)),
    };
    let validity = order
        .map(|o| validity_check(&p, s, &eps, &grid, o))
        .transpose()?;
    let mean = match order {
        None => p.moments().mean,
        Some(o) => corrected_mean(&p, s, o),
    };

    let kind = serde_json::to_value(a.kind).unwrap();
    let stem = format!("dist_{}", kind.as_str().unwrap());
    let mut dir = OutDir::create(out)?;
    dir.write(&format!("{stem}.csv"), |w| {
        writeln!(w, "z,cdf,pdf")?;
        for &z in &grid {
            let (f, d) = eval(z);
            writeln!(w, "{},{},{}", real(z), real(f), real(d))?;
        }
        Ok(())
    })?;
    dir.write_json(
        &format!("{stem}.json"),
        &DistSidecar {
            kind: a.kind,
            n,
            gumbel: p,
            gumbel_moments: p.moments(),
            correlation_sum: s,
            mean,
            z_min,
            z_max,
            points: grid.len(),
            validity,
        },
    )?;
    dir.finish("dist", &stem, a, None)
}

#[derive(Serialize)]
struct McStats<'a> {
    n: usize,
    rho: f64,
    sigma: f64,
    reps: usize,
    seed: u64,
    mean: f64,
    std: f64,
    std_error: f64,
    histogram: &'a Histogram,
}

/// Inclusive `start:stop:step` grid, rounded to 12 decimals.
fn parse_sweep(spec: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::Usage(format!("--rho-sweep expects start:stop:step, got `{spec}`"));
    let parts: Vec<f64> = spec
        .split(':')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    let [start, stop, step] = parts[..] else {
        return Err(bad());
    };
    if !(step > 0.0) || stop < start {
        return Err(bad());
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    let values: Vec<f64> = (0..=count)
        .map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12)
        .collect();
    for &r in &values {
        check_rho(r, "--rho-sweep")?;
    }
    Ok(values)
}

pub fn mc(a: &McArgs, out: &Path) -> CliResult<()> {
    if a.n < 1 {
        return usage("--n must be at least 1");
    }
    if !(a.sigma > 0.0 && a.sigma.is_finite()) {
        return usage(format!("--sigma must be positive, got {}", a.sigma));
    }
    if a.bins == Some(0) {
        return usage("--bins must be at least 1");
    }
    let cfg = mc_config(a.reps, a.seed, a.workers)?;
    let mut dir = OutDir::create(out)?;

    if let Some(spec) = &a.rho_sweep {
        let rhos = parse_sweep(spec)?;
        if a.n < 2 {
            return usage("--rho-sweep needs --n of at least 2");
        }
        let p = GumbelParams::for_count(a.n)?;
        let mut rows = Vec::with_capacity(rhos.len());
        for (k, &rho) in rhos.iter().enumerate() {
            let model = Ar1Model::new(a.n, rho, a.sigma)?;
            let r = sample_max_distribution(&model, &cfg.derived(k as u64))?;
            let s = correlation_sum(&EpsilonMatrix::ar1(a.n, rho)?);
            let first = a.sigma * corrected_mean(&p, s, Order::First);
            rows.push((rho, r.mean, r.std, r.std_error(), first));
        }
        let gumbel_mean = a.sigma * p.moments().mean;
        dir.write("mc_sweep.csv", |w| {
            writeln!(w, "rho,mean,std,std_error,first_order_mean,gumbel_mean")?;
            for (rho, m, s, se, first) in &rows {
                writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    real(*rho),
                    real(*m),
                    real(*s),
                    real(*se),
                    real(*first),
                    real(gumbel_mean)
                )?;
            }
            Ok(())
        })?;
        return dir.finish("mc", "mc_sweep", a, Some(a.seed));
    }

    let rho = a.rho.unwrap_or(0.0);
    check_rho(rho, "--rho")?;
    let model = Ar1Model::new(a.n, rho, a.sigma)?;
    let mut r = sample_max_distribution(&model, &cfg)?;
    if let Some(bins) = a.bins {
        r = empirical_stats(r.samples, bins)?;
    }
    dir.write("mc_samples.csv", |w| r.write_samples_csv(w))?;
    dir.write_json(
        "mc_stats.json",
        &McStats {
            n: a.n,
            rho,
            sigma: a.sigma,
            reps: a.reps,
            seed: a.seed,
            mean: r.mean,
            std: r.std,
            std_error: r.std_error(),
            histogram: &r.histogram,
        },
    )?;
    dir.finish("mc", "mc", a, Some(a.seed))
}

fn load_graph(a: &GraphArgs) -> CliResult<(TimingGraph, PathSet)> {
    if a.cap < 1 {
        return usage("--cap must be at least 1");
    }
    let g = normalize_source_sink(&parse_graph_auto(&read_file(&a.file)?)?);
    let ps = enumerate_paths(&g, a.cap)?;
    Ok((g, ps))
}

fn graph_stem(file: &Path) -> String {
    file.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "graph".into())
}

pub fn graph_paths(a: &GraphArgs, out: &Path) -> CliResult<()> {
    let (g, ps) = load_graph(a)?;
    let mut dir = OutDir::create(out)?;
    let stem = format!("{}_paths", graph_stem(&a.file));
    dir.write(&format!("{stem}.csv"), |w| {
        writeln!(w, "path,length,mean,std,nodes")?;
        for (i, p) in ps.paths.iter().enumerate() {
            let (m, s) = accumulated_delay_params(&g, p);
            let nodes = ps.node_names(&g, i).join(" ");
            writeln!(
                w,
                "{i},{},{},{},{}",
                ps.lengths[i],
                real(m),
                real(s),
                csv_field(&nodes)
            )?;
        }
        Ok(())
    })?;
    eprintln!("{} paths", ps.len());
    dir.finish("graph paths", &stem, a, None)
}

pub fn graph_cov(a: &GraphArgs, out: &Path) -> CliResult<()> {
    let (g, ps) = load_graph(a)?;
    let c = path_covariance(&ps, &g);
    let mut dir = OutDir::create(out)?;
    let stem = format!("{}_cov", graph_stem(&a.file));
    dir.write(&format!("{stem}.csv"), |w| c.write_csv(w))?;
    dir.finish("graph cov", &stem, a, None)
}

pub fn graph_analyze(a: &AnalyzeArgs, out: &Path) -> CliResult<()> {
    let cfg = mc_config(a.reps, a.seed, a.workers)?;
    if a.graph.cap < 1 {
        return usage("--cap must be at least 1");
    }
    let g = parse_graph_auto(&read_file(&a.graph.file)?)?;
    let report = graph_delay_analysis(&g, &cfg, a.order.into(), a.graph.cap)?;
    let mut dir = OutDir::create(out)?;
    let stem = format!("{}_analysis", graph_stem(&a.graph.file));
    dir.write(&format!("{stem}.json"), |w| {
        writeln!(w, "{}", report.to_json())
    })?;
    eprintln!(
        "N = {}, analytic mean {:.6}, Monte Carlo mean {:.6} +- {:.6}",
        report.path_count,
        report.analytic_mean,
        report.monte_carlo.mean,
        report.monte_carlo.std_error
    );
    dir.finish("graph analyze", &stem, a, Some(a.seed))
}

pub fn noniid(a: &NonIidArgs, out: &Path) -> CliResult<()> {
    if a.n_grid.is_empty() || a.n_grid.contains(&0) {
        return usage("--n-grid entries must be positive");
    }
    if a.delta_mu < 0.0 {
        return usage("--delta-mu must be nonnegative");
    }
    if a.delta_sigma < 0.0 {
        return usage("--delta-sigma must be nonnegative");
    }
    if !(a.sigma - a.delta_sigma > 0.0) {
        return usage(format!(
            "--sigma ({}) minus --delta-sigma ({}) must be positive",
            a.sigma, a.delta_sigma
        ));
    }
    let cfg = mc_config(a.reps, a.seed, a.workers)?;
    let rows = non_iid_experiment(&NonIidConfig {
        n_grid: a.n_grid.clone(),
        mu: a.mu,
        sigma: a.sigma,
        delta_mu: a.delta_mu,
        delta_sigma: a.delta_sigma,
        reps: cfg.reps,
        seed: cfg.seed,
        workers: cfg.workers,
        freeze_params: a.freeze,
    })?;
    let mut dir = OutDir::create(out)?;
    dir.write("noniid.csv", |w| {
        writeln!(w, "n,mean,std,std_error")?;
        for r in &rows {
            writeln!(
                w,
                "{},{},{},{}",
                r.n,
                real(r.mean),
                real(r.std),
                real(r.std_error)
            )?;
        }
        Ok(())
    })?;
    dir.finish("noniid", "noniid", a, Some(a.seed))
}
