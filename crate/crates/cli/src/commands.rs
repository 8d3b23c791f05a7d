use std::fmt::Write as _;
use std::path::Path;

use longmem::acf::{acf_direct, acf_fft, band_mean, first_zero_crossing};
use longmem::chaos::{lyap_fit, lyap_k, EmbeddingParams};
use longmem::hurst::{
    fit_h, fractal_correlation, fractal_dimension, hurst_suite, rs_table, skipped_blocks_warning,
    ScaleScheme, SuiteConfig,
};
use longmem::ingest::to_column_string;
use longmem::permtest::{perm_test, resultant, serial_correlation_warning, PermConfig, Tail};
use longmem::series::{align, summarize};
use longmem::synth::{generate, GenKind, GenSpec};
use longmem::TimeSeries;
use serde_json::json;

use crate::args::{AcfMethod, Cli, Command, EmbeddingArgs, KindArg, ParseArgs, TailArg};
use crate::error::{CliError, CliResult};
use crate::input::{load, Loaded};
use crate::report::{csv, num, opt_num, table, to_value, Report};

pub fn run(cli: &Cli) -> CliResult<Report> {
    match &cli.command {
        Command::Stats { input, resolution } => {
            if cli.out.is_some() {
                return Err(CliError::Usage(
                    "stats has no curve output for --out".into(),
                ));
            }
            stats(load(&input.input, &input.parsing)?, *resolution)
        }
        Command::Acf {
            input,
            max_lag,
            method,
            band,
        } => acf(
            load(&input.input, &input.parsing)?,
            *max_lag,
            *method,
            *band,
        ),
        Command::Hurst {
            input,
            min_window,
            weighted,
        } => hurst(load(&input.input, &input.parsing)?, *min_window, *weighted),
        Command::Suite { input } => suite(load(&input.input, &input.parsing)?),
        Command::Lyap {
            input,
            embedding,
            fit,
            dt,
            grid,
        } => {
            let loaded = load(&input.input, &input.parsing)?;
            let base = embedding_params(embedding, cli.seed);
            let grid = match grid {
                Some(spec) => expand_grid(&base, spec)?,
                None => vec![base],
            };
            lyap(loaded, &grid, *fit, *dt)
        }
        Command::Permtest {
            x,
            y,
            resultant,
            n_perm,
            tail,
            parsing,
        } => {
            let seed = cli
                .seed
                .ok_or_else(|| CliError::Usage("permtest requires --seed".into()))?;
            let second = match (y, resultant) {
                (Some(y), _) => Second::Plain(y),
                (None, Some(uv)) => Second::Resultant(&uv[0], &uv[1]),
                (None, None) => return Err(CliError::Usage("give --y or --resultant".into())),
            };
            permtest(x, second, parsing, *n_perm, *tail, seed)
        }
        Command::Gen {
            kind,
            n,
            hurst,
            phi,
            r,
            x0,
            period,
        } => {
            let kind = gen_kind(*kind, *hurst, *phi, *r, *x0, *period)?;
            let seed = match (kind, cli.seed) {
                (_, Some(s)) => s,
                (GenKind::Logistic { .. } | GenKind::Sine { .. }, None) => 0,
                (_, None) => {
                    return Err(CliError::Usage("gen requires --seed for this kind".into()))
                }
            };
            gen(GenSpec::new(kind, *n, seed), cli.out.as_deref())
        }
    }
}

fn single(loaded: Loaded) -> (TimeSeries, Report) {
    let report = Report {
        results: serde_json::Value::Null,
        table: String::new(),
        csv: String::new(),
        curve: None,
        inputs: vec![loaded.info],
        warnings: loaded.warnings,
    };
    (loaded.series, report)
}

fn stats(loaded: Loaded, resolution: f64) -> CliResult<Report> {
    let (series, mut report) = single(loaded);
    let s = summarize(&series, resolution)?;
    let rows = vec![
        ("n", s.n.to_string(), s.n.to_string()),
        ("mean", num(s.mean), s.mean.to_string()),
        ("median", num(s.median), s.median.to_string()),
        ("mode_first", num(s.mode_first), s.mode_first.to_string()),
        (
            "mode_second",
            opt_num(s.mode_second),
            opt_csv(s.mode_second),
        ),
        ("std_dev", num(s.std_dev), s.std_dev.to_string()),
        (
            "mean_abs_dev",
            num(s.mean_abs_dev),
            s.mean_abs_dev.to_string(),
        ),
        ("variance", num(s.variance), s.variance.to_string()),
        ("cv_percent", opt_num(s.cv_percent), opt_csv(s.cv_percent)),
    ];
    report.table = table(
        &["statistic", "value"],
        &rows
            .iter()
            .map(|(k, v, _)| vec![k.to_string(), v.clone()])
            .collect::<Vec<_>>(),
    );
    report.csv = csv(
        &["statistic", "value"],
        &rows
            .iter()
            .map(|(k, _, v)| vec![k.to_string(), v.clone()])
            .collect::<Vec<_>>(),
    );
    report.results = json!({ "stats": s });
    Ok(report)
}

fn opt_csv(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn acf(
    loaded: Loaded,
    max_lag: usize,
    method: AcfMethod,
    band: Option<(usize, usize)>,
) -> CliResult<Report> {
    let (series, mut report) = single(loaded);
    let result = match method {
        AcfMethod::Fft => acf_fft(&series, max_lag)?,
        AcfMethod::Direct => acf_direct(&series, max_lag)?,
    };
    let zero = first_zero_crossing(&result);
    let band = band
        .map(|(lo, hi)| band_mean(&result, lo, hi).map(|m| (lo, hi, m)))
        .transpose()?;

    let mut t = String::new();
    let _ = writeln!(
        t,
        "first zero crossing: {}",
        zero.map_or("none".to_string(), |l| format!("lag {l}"))
    );
    if let Some((lo, hi, m)) = band {
        let _ = writeln!(t, "band {lo}:{hi} mean: {}", num(m));
    }
    t.push('\n');
    let rows: Vec<Vec<String>> = result
        .coefficients
        .iter()
        .enumerate()
        .map(|(lag, r)| vec![lag.to_string(), num(*r)])
        .collect();
    t.push_str(&table(&["lag", "r"], &rows));
    report.table = t;
    let full: Vec<Vec<String>> = result
        .coefficients
        .iter()
        .enumerate()
        .map(|(lag, r)| vec![lag.to_string(), r.to_string()])
        .collect();
    report.csv = csv(&["lag", "r"], &full);
    report.curve = Some(two_columns(
        result
            .coefficients
            .iter()
            .enumerate()
            .map(|(l, r)| (l as f64, *r)),
    ));
    report.results = json!({
        "method": match method { AcfMethod::Fft => "fft", AcfMethod::Direct => "direct" },
        "acf": result,
        "first_zero_crossing": zero,
        "band": band.map(|(lo, hi, mean)| json!({ "lo": lo, "hi": hi, "mean": mean })),
    });
    Ok(report)
}

fn hurst(loaded: Loaded, min_window: usize, weighted: bool) -> CliResult<Report> {
    let (series, mut report) = single(loaded);
    let scheme = ScaleScheme::Geometric { min_window };
    let points = rs_table(&series, &scheme)?;
    let estimate = fit_h(&points, weighted)?;
    report.warnings.extend(skipped_blocks_warning(&points));
    report.warnings.extend(estimate.range_warning());
    let dimension = fractal_dimension(estimate.h).ok();
    let rho = fractal_correlation(estimate.h).ok().map(|f| f.rho);

    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| {
            vec![
                p.window.to_string(),
                p.blocks.to_string(),
                p.skipped.to_string(),
                num(p.mean_rs),
                num(p.std_rs),
            ]
        })
        .collect();
    let mut t = table(&["window", "blocks", "skipped", "mean_rs", "std_rs"], &rows);
    t.push('\n');
    t.push_str(&table(
        &["estimate", "value"],
        &[
            vec!["H".into(), num(estimate.h)],
            vec!["std_err".into(), num(estimate.std_err)],
            vec!["r_squared".into(), num(estimate.r_squared)],
            vec!["fractal_dimension".into(), opt_num(dimension)],
            vec!["fractal_correlation".into(), opt_num(rho)],
        ],
    ));
    report.table = t;
    report.csv = csv(
        &["window", "blocks", "skipped", "mean_rs", "std_rs"],
        &points
            .iter()
            .map(|p| {
                vec![
                    p.window.to_string(),
                    p.blocks.to_string(),
                    p.skipped.to_string(),
                    p.mean_rs.to_string(),
                    p.std_rs.to_string(),
                ]
            })
            .collect::<Vec<_>>(),
    );
    report.curve = Some(log_curve(points.iter().map(|p| (p.window, p.mean_rs))));
    report.results = json!({
        "scheme": scheme,
        "points": points,
        "estimate": estimate,
        "fractal_dimension": dimension,
        "fractal_correlation": rho,
    });
    Ok(report)
}

fn suite(loaded: Loaded) -> CliResult<Report> {
    let (series, mut report) = single(loaded);
    let s = hurst_suite(&series, &SuiteConfig::default())?;
    let rows = [
        ("Simple R/S Hurst estimation", "simple", s.h_simple),
        (
            "Corrected R over S Hurst exponent",
            "corrected_rs",
            s.h_corrected_rs,
        ),
        ("Empirical H", "empirical", s.h_empirical),
        (
            "Corrected empirical H",
            "corrected_empirical",
            s.h_corrected_empirical,
        ),
        ("Theoretical H", "theoretical", s.h_theoretical),
    ];
    let mut t = table(
        &["Hurst exponent", "Value"],
        &rows
            .iter()
            .map(|(name, _, v)| vec![name.to_string(), format!("{v:.3}")])
            .collect::<Vec<_>>(),
    );
    let windows: Vec<String> = s.dense_table.iter().map(|p| p.window.to_string()).collect();
    let _ = writeln!(
        t,
        "\nfirst {} of {} samples, block sizes {}",
        s.n_used,
        series.len(),
        windows.join(" ")
    );
    report.table = t;
    report.csv = csv(
        &["estimator", "value"],
        &rows
            .iter()
            .map(|(_, key, v)| vec![key.to_string(), v.to_string()])
            .collect::<Vec<_>>(),
    );
    report
        .warnings
        .extend(skipped_blocks_warning(&s.dense_table));
    report.curve = Some(log_curve(
        s.dense_table.iter().map(|p| (p.window, p.mean_rs)),
    ));
    report.results = to_value(&s);
    Ok(report)
}

fn embedding_params(a: &EmbeddingArgs, seed: Option<u64>) -> EmbeddingParams {
    EmbeddingParams {
        m: a.m,
        d: a.d,
        theiler: a.theiler,
        eps: a.eps,
        n_ref: a.refs,
        steps: a.steps,
        k_min: a.k_min,
        seed,
    }
}

/// Cartesian product over `key=v1,v2;key=...`, the last key varying fastest.
fn expand_grid(base: &EmbeddingParams, spec: &str) -> CliResult<Vec<EmbeddingParams>> {
    let bad = |msg: String| CliError::Usage(format!("--grid: {msg}"));
    let mut out = vec![*base];
    for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, values) = part
            .split_once('=')
            .ok_or_else(|| bad(format!("`{part}` is not key=values")))?;
        let values: Vec<&str> = values.split(',').map(str::trim).collect();
        let mut next = Vec::with_capacity(out.len() * values.len());
        for p in &out {
            for v in &values {
                let mut q = *p;
                let int = || {
                    v.parse::<usize>()
                        .map_err(|e| bad(format!("{key}={v}: {e}")))
                };
                match key.trim() {
                    "m" => q.m = int()?,
                    "d" => q.d = int()?,
                    "theiler" => q.theiler = int()?,
                    "steps" => q.steps = int()?,
                    "refs" => q.n_ref = int()?,
                    "k-min" | "k_min" => q.k_min = int()?,
                    "eps" => {
                        q.eps = v.parse().map_err(|e| bad(format!("eps={v}: {e}")))?;
                    }
                    other => return Err(bad(format!("unknown key `{other}`"))),
                }
                next.push(q);
            }
        }
        out = next;
    }
    Ok(out)
}

fn lyap(
    loaded: Loaded,
    grid: &[EmbeddingParams],
    fit: Option<(usize, usize)>,
    dt: f64,
) -> CliResult<Report> {
    let (series, mut report) = single(loaded);
    let single_run = grid.len() == 1;
    let mut runs = Vec::new();
    let mut t = String::new();
    let mut csv_rows = Vec::new();
    let mut curves = Vec::new();
    let mut failures = Vec::new();

    for (idx, params) in grid.iter().enumerate() {
        let label = format!(
            "m={} d={} theiler={} eps={} steps={} refs={} k_min={}",
            params.m,
            params.d,
            params.theiler,
            params.eps,
            params.steps,
            params.n_ref,
            params.k_min
        );
        let outcome = lyap_k(&series, params).and_then(|curve| {
            let f = fit.map(|(a, b)| lyap_fit(&curve, a, b, dt)).transpose()?;
            Ok((curve, f))
        });
        let (curve, f) = match outcome {
            Ok(v) => v,
            Err(e) if !single_run => {
                let err = CliError::from(e);
                let _ = writeln!(t, "{label}\n  failed: {err}\n");
                runs.push(json!({ "params": params, "error": { "kind": err.kind(), "message": err.to_string() } }));
                failures.push(err);
                continue;
            }
            Err(e) => return Err(e.into()),
        };

        let _ = writeln!(t, "{label}");
        let rows: Vec<Vec<String>> = curve
            .s_values
            .iter()
            .zip(&curve.ref_counts)
            .enumerate()
            .map(|(step, (s, c))| vec![step.to_string(), opt_num(*s), c.to_string()])
            .collect();
        t.push_str(&table(&["step", "S", "refs"], &rows));
        if let Some(f) = &f {
            let _ = writeln!(
                t,
                "lambda1 = {} over {}:{} (r^2 = {}, dt = {})",
                num(f.lambda1),
                f.fit_range.0,
                f.fit_range.1,
                num(f.r_squared),
                f.dt
            );
        }
        t.push('\n');
        for (step, (s, c)) in curve.s_values.iter().zip(&curve.ref_counts).enumerate() {
            csv_rows.push(vec![
                idx.to_string(),
                params.m.to_string(),
                params.d.to_string(),
                params.theiler.to_string(),
                params.eps.to_string(),
                params.n_ref.to_string(),
                params.k_min.to_string(),
                step.to_string(),
                opt_csv(*s),
                c.to_string(),
            ]);
        }
        let points = two_columns(
            curve
                .s_values
                .iter()
                .enumerate()
                .filter_map(|(step, s)| s.map(|s| (step as f64 * dt, s))),
        );
        curves.push(if single_run {
            points
        } else {
            format!("# {label}\n{points}")
        });
        runs.push(json!({ "params": params, "curve": curve, "fit": f }));
    }
    if failures.len() == grid.len() {
        return Err(failures.swap_remove(0));
    }

    report.table = t.trim_end().to_string() + "\n";
    report.csv = csv(
        &[
            "run",
            "m",
            "d",
            "theiler",
            "eps",
            "refs",
            "k_min",
            "step",
            "s",
            "ref_count",
        ],
        &csv_rows,
    );
    report.curve = Some(curves.join("\n"));
    report.results = json!({ "dt": dt, "runs": runs });
    Ok(report)
}

enum Second<'a> {
    Plain(&'a Path),
    Resultant(&'a Path, &'a Path),
}

fn permtest(
    x: &Path,
    second: Second<'_>,
    parsing: &ParseArgs,
    n_perm: usize,
    tail: TailArg,
    seed: u64,
) -> CliResult<Report> {
    let first = load(x, parsing)?;
    let mut inputs = vec![first.info];
    let mut warnings = first.warnings;
    let other = match second {
        Second::Plain(p) => {
            let l = load(p, parsing)?;
            inputs.push(l.info);
            warnings.extend(l.warnings);
            l.series
        }
        Second::Resultant(u, v) => {
            let (lu, lv) = (load(u, parsing)?, load(v, parsing)?);
            inputs.extend([lu.info, lv.info]);
            warnings.extend(lu.warnings.into_iter().chain(lv.warnings));
            let (su, sv) = align(&lu.series, &lv.series)?;
            let mut s = TimeSeries::new(resultant(su.values(), sv.values())?)?
                .with_step_months(su.step_months())?;
            if let Some(start) = su.start() {
                s = s.with_start(start);
            }
            s
        }
    };
    let (a, b) = align(&first.series, &other)?;
    let tail = match tail {
        TailArg::Lower => Tail::Lower,
        TailArg::Upper => Tail::Upper,
        TailArg::Two => Tail::Two,
    };
    let mut config = PermConfig::new(seed, tail);
    config.n_perm = n_perm;
    let r = perm_test(a.values(), b.values(), &config)?;
    warnings.extend(serial_correlation_warning(a.values(), b.values()));

    let q = &r.r_sorted_summary;
    let rows = [
        ("pairs", r.n.to_string(), r.n.to_string()),
        ("n_perm", r.n_perm.to_string(), r.n_perm.to_string()),
        ("r_obs", num(r.r_obs), r.r_obs.to_string()),
        (
            "r_crit_lower",
            num(r.r_crit_lower),
            r.r_crit_lower.to_string(),
        ),
        (
            "r_crit_upper",
            num(r.r_crit_upper),
            r.r_crit_upper.to_string(),
        ),
        (
            "r_crit_two_lower",
            num(r.r_crit_two_sided.0),
            r.r_crit_two_sided.0.to_string(),
        ),
        (
            "r_crit_two_upper",
            num(r.r_crit_two_sided.1),
            r.r_crit_two_sided.1.to_string(),
        ),
        ("p_lower", num(r.p_lower), r.p_lower.to_string()),
        ("p_upper", num(r.p_upper), r.p_upper.to_string()),
        ("p_two_sided", num(r.p_two_sided), r.p_two_sided.to_string()),
        ("perm_min", num(q.min), q.min.to_string()),
        ("perm_median", num(q.p50), q.p50.to_string()),
        ("perm_max", num(q.max), q.max.to_string()),
    ];
    let mut t = table(
        &["quantity", "value"],
        &rows
            .iter()
            .map(|(k, v, _)| vec![k.to_string(), v.clone()])
            .collect::<Vec<_>>(),
    );
    let _ = writeln!(
        t,
        "\n{} at 5% ({} tail)",
        match r.decision_5pct {
            longmem::permtest::Decision::Reject => "reject independence",
            longmem::permtest::Decision::FailToReject => "fail to reject independence",
        },
        match tail {
            Tail::Lower => "lower",
            Tail::Upper => "upper",
            Tail::Two => "two-sided",
        }
    );
    let total = r.distribution.len() as f64;
    let curve = two_columns(
        r.distribution
            .iter()
            .enumerate()
            .map(|(k, v)| (*v, (k + 1) as f64 / total)),
    );
    Ok(Report {
        csv: csv(
            &["quantity", "value"],
            &rows
                .iter()
                .map(|(k, _, v)| vec![k.to_string(), v.clone()])
                .collect::<Vec<_>>(),
        ),
        results: to_value(&r),
        table: t,
        curve: Some(curve),
        inputs,
        warnings,
    })
}

fn gen_kind(
    kind: KindArg,
    hurst: Option<f64>,
    phi: Option<f64>,
    r: Option<f64>,
    x0: Option<f64>,
    period: Option<f64>,
) -> CliResult<GenKind> {
    let need = |v: Option<f64>, flag: &str| {
        v.ok_or_else(|| CliError::Usage(format!("this kind requires --{flag}")))
    };
    Ok(match kind {
        KindArg::White => GenKind::White,
        KindArg::Walk => GenKind::Walk,
        KindArg::Fgn => GenKind::Fgn {
            hurst: need(hurst, "hurst")?,
        },
        KindArg::Ar1 => GenKind::Ar1 {
            phi: need(phi, "phi")?,
        },
        KindArg::Logistic => GenKind::Logistic {
            r: r.unwrap_or(4.0),
            x0: x0.unwrap_or(0.3),
        },
        KindArg::Sine => GenKind::Sine {
            period: need(period, "period")?,
        },
    })
}

fn gen(spec: GenSpec, out: Option<&Path>) -> CliResult<Report> {
    let series = generate(&spec)?;
    let column = to_column_string(&series);
    let mut results = json!({ "spec": spec, "n": series.len(), "label": series.label() });
    let (table, curve) = match out {
        Some(p) => (
            format!("wrote {} samples to {}\n", series.len(), p.display()),
            Some(column),
        ),
        None => {
            results["values"] = json!(series.values());
            (column, None)
        }
    };
    Ok(Report {
        results,
        table,
        csv: csv(
            &["t", "value"],
            &series
                .values()
                .iter()
                .enumerate()
                .map(|(t, v)| vec![t.to_string(), v.to_string()])
                .collect::<Vec<_>>(),
        ),
        curve,
        inputs: vec![],
        warnings: vec![],
    })
}

fn two_columns(points: impl Iterator<Item = (f64, f64)>) -> String {
    let mut s = String::new();
    for (a, b) in points {
        let _ = writeln!(s, "{a} {b}");
    }
    s
}

/// `log2 window, log2 R/S`, the coordinates of the Hurst fit.
fn log_curve(points: impl Iterator<Item = (usize, f64)>) -> String {
    two_columns(points.map(|(w, rs)| ((w as f64).log2(), rs.log2())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_a_cartesian_product() {
        let base = EmbeddingParams::default();
        let g = expand_grid(&base, "m=1,2;eps=0.2,0.3,0.4").unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!((g[0].m, g[0].eps), (1, 0.2));
        assert_eq!((g[2].m, g[2].eps), (1, 0.4));
        assert_eq!((g[3].m, g[3].eps), (2, 0.2));
        assert!(g.iter().all(|p| p.d == base.d && p.n_ref == base.n_ref));
    }

    #[test]
    fn grid_rejects_unknown_keys() {
        let base = EmbeddingParams::default();
        assert!(matches!(
            expand_grid(&base, "tau=3"),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(expand_grid(&base, "m=x"), Err(CliError::Usage(_))));
        assert!(matches!(expand_grid(&base, "m"), Err(CliError::Usage(_))));
    }
}
