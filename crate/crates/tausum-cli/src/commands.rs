//! Command implementations.
//!
//! Each command produces a typed report rendered to CSV or JSON.  A report
//! whose *check* fails (a bound exceeded, a residual growing) is not an
//! error: the report is still emitted and the failure travels separately so
//! the caller can exit 1 after writing the output.

use serde::Serialize;
use tausum::euler::{self, PrecisionBudget};
use tausum::gregory;
use tausum::selberg;
use tausum::sums::{self, Checkpoint, SumKind, SumRequest};

use crate::cache::{self, CacheNote};
use crate::config::{CommandKind, Format, KindSpec, RunConfig, DEFAULT_GREGORY_LEN};
use crate::error::CliError;
use crate::render::{self, float, opt_float};

/// What a command hands back: the rendered report, the cache interaction
/// (sums only), and the verification verdict if the report's check failed.
pub struct Execution {
    pub rendered: String,
    pub cache: Option<CacheNote>,
    pub failure: Option<String>,
}

impl Execution {
    fn plain(rendered: String) -> Execution {
        Execution {
            rendered,
            cache: None,
            failure: None,
        }
    }
}

pub fn execute(cfg: &RunConfig) -> Result<Execution, CliError> {
    match cfg.command {
        CommandKind::Constants => cmd_constants(cfg),
        CommandKind::Gregory => cmd_gregory(cfg),
        CommandKind::VerifySieve => cmd_verify_sieve(cfg),
        CommandKind::Sums => cmd_sums(cfg),
        CommandKind::BoundReport => cmd_bound_report(cfg),
        CommandKind::MaintermCheck => cmd_mainterm_check(cfg),
    }
}

fn budget_of(cfg: &RunConfig) -> PrecisionBudget {
    PrecisionBudget {
        prime_cutoff: cfg.prime_cutoff,
        series_order: cfg.series_order,
        target_digits: cfg.digits,
    }
}

/// The shift for commands that need a positive one.
fn positive_shift(cfg: &RunConfig) -> Result<u64, CliError> {
    let a = cfg.a.unwrap_or(1);
    if a < 1 {
        return Err(CliError::usage(format!(
            "{} needs a shift a ≥ 1, got {a}",
            cfg.command
        )));
    }
    Ok(a as u64)
}

fn require_x(cfg: &RunConfig) -> Result<u64, CliError> {
    cfg.x
        .ok_or_else(|| CliError::usage(format!("{} requires --x", cfg.command)))
}

// ---------------------------------------------------------------- constants

fn cmd_constants(cfg: &RunConfig) -> Result<Execution, CliError> {
    let a = positive_shift(cfg)?;
    let report = euler::constants(a, &budget_of(cfg))?;
    let rendered = match cfg.format {
        Format::Json => render::json(&report)?,
        Format::Csv => render::csv(
            &[
                "a",
                "k",
                "beta_a",
                "k_a",
                "a0",
                "c_titchmarsh",
                "k_route_delta",
                "prime_cutoff",
                "series_order",
                "target_digits",
            ],
            &[vec![
                report.a.to_string(),
                float(report.k),
                float(report.beta_a),
                float(report.k_a),
                float(report.a0),
                float(report.c_titchmarsh),
                float(report.k_route_delta),
                report.budget.prime_cutoff.to_string(),
                report.budget.series_order.to_string(),
                report.budget.target_digits.to_string(),
            ]],
        ),
    };
    Ok(Execution::plain(rendered))
}

// ------------------------------------------------------------------ gregory

#[derive(Serialize)]
struct GregoryReport {
    n_max: usize,
    c: Vec<f64>,
    d: Vec<f64>,
}

fn cmd_gregory(cfg: &RunConfig) -> Result<Execution, CliError> {
    let n = cfg.m.unwrap_or(DEFAULT_GREGORY_LEN);
    let series = gregory::gregory_coefficients(n)?;
    let rendered = match cfg.format {
        Format::Json => render::json(&GregoryReport {
            n_max: series.n_max,
            c: series.c.clone(),
            d: series.d.clone(),
        })?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = (0..=series.n_max)
                .map(|k| vec![k.to_string(), float(series.c[k]), float(series.d[k])])
                .collect();
            render::csv(&["k", "c", "d"], &rows)
        }
    };
    Ok(Execution::plain(rendered))
}

// ------------------------------------------------------------- verify-sieve

#[derive(Serialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

impl CheckStatus {
    fn as_str(self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Skipped => "skipped",
        }
    }
}

#[derive(Serialize)]
struct CheckRow {
    name: &'static str,
    status: CheckStatus,
    value: Option<f64>,
    threshold: Option<f64>,
}

#[derive(Serialize)]
struct VerifySieveReport {
    a: u64,
    z: u64,
    h_a: f64,
    support_primes: usize,
    checks: Vec<CheckRow>,
    /// The weight table itself, included while small enough to read.
    rho: Option<std::collections::BTreeMap<u64, f64>>,
}

fn check(name: &'static str, value: f64, threshold: f64) -> CheckRow {
    CheckRow {
        name,
        status: if value <= threshold {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        value: Some(value),
        threshold: Some(threshold),
    }
}

fn skipped(name: &'static str) -> CheckRow {
    CheckRow {
        name,
        status: CheckStatus::Skipped,
        value: None,
        threshold: None,
    }
}

fn cmd_verify_sieve(cfg: &RunConfig) -> Result<Execution, CliError> {
    let a = positive_shift(cfg)?;
    let z = cfg
        .z
        .ok_or_else(|| CliError::usage("verify-sieve requires --z"))?;
    let ctx = selberg::build_context(a, z)?;
    let wt = selberg::weights(&ctx)?;

    let mut checks = Vec::new();

    // The unit weight is exact by construction; anything else is a failure.
    let rho_one = wt.rho(1);
    checks.push(CheckRow {
        name: "rho_unit",
        status: if rho_one.to_bits() == 1.0f64.to_bits() {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        value: Some(rho_one),
        threshold: Some(1.0),
    });

    let rho_max = wt.iter().map(|e| e.rho.abs()).fold(0.0f64, f64::max);
    checks.push(check("rho_bound", rho_max, 1.0 + 1e-12));

    let b = selberg::quadratic_form_b(&ctx, &wt)?;
    checks.push(check("quadratic_form", (b * ctx.h_a - 1.0).abs(), 1e-10));

    let lambda = selberg::lambda_table(&ctx, &wt)?;
    let mut lambda_ratio = 0.0f64;
    let mut route_gap = 0.0f64;
    for (&d, &l) in &lambda {
        let omega = tausum::arith::factorize(d)?.omega();
        lambda_ratio = lambda_ratio.max(l.abs() / 3.0f64.powi(omega as i32));
        route_gap = route_gap.max((l - selberg::lambda_value(&ctx, &wt, d)?).abs());
    }
    checks.push(check("lambda_bound", lambda_ratio, 1.0 + 1e-9));
    checks.push(check("lambda_routes", route_gap, 1e-12));

    let sieved = selberg::h_sum_sieve_route(a, z)?;
    checks.push(check(
        "h_routes",
        (sieved / ctx.h_a - 1.0).abs(),
        1e-11,
    ));

    if z <= selberg::RECURSION_Z_CAP {
        let rec = selberg::verify_recursions(&ctx, &wt)?;
        checks.push(check(
            "recursion_single_step",
            rec.single_step_max_residual,
            1e-12,
        ));
        checks.push(check("recursion_chains", rec.chain_max_residual, 1e-12));
    } else {
        checks.push(skipped("recursion_single_step"));
        checks.push(skipped("recursion_chains"));
    }

    if z <= selberg::TUPLE_Z_CAP {
        let t0 = selberg::t_m_diagnostic(&ctx, &wt, 0)?;
        checks.push(check("tuple_t0_normalization", (t0 - 1.0).abs(), 1e-10));
    } else {
        checks.push(skipped("tuple_t0_normalization"));
    }

    if z <= selberg::R_K_Z_CAP && ctx.primes.len() >= 2 {
        let (p0, p1) = (ctx.primes[0], ctx.primes[1]);
        let ratio = selberg::r_k_diagnostic(&ctx, p0 * p1, p0, p1, 1, 1)?;
        checks.push(check("remainder_envelope_ratio", ratio, 1.0));
    } else {
        checks.push(skipped("remainder_envelope_ratio"));
    }

    let failures: Vec<&str> = checks
        .iter()
        .filter(|c| c.status == CheckStatus::Fail)
        .map(|c| c.name)
        .collect();
    let failure = if failures.is_empty() {
        None
    } else {
        Some(format!("sieve checks failed: {}", failures.join(", ")))
    };

    let rho = if wt.len() <= 64 {
        Some(wt.iter().map(|e| (e.d, e.rho)).collect())
    } else {
        None
    };

    let rendered = match cfg.format {
        Format::Json => render::json(&VerifySieveReport {
            a,
            z,
            h_a: ctx.h_a,
            support_primes: ctx.primes.len(),
            checks,
            rho,
        })?,
        Format::Csv => {
            let mut rows: Vec<Vec<String>> = checks
                .iter()
                .map(|c| {
                    vec![
                        c.name.to_string(),
                        c.status.as_str().to_string(),
                        opt_float(c.value),
                        opt_float(c.threshold),
                    ]
                })
                .collect();
            if let Some(map) = &rho {
                for (d, r) in map {
                    rows.push(vec![
                        format!("rho[{d}]"),
                        "info".to_string(),
                        float(*r),
                        String::new(),
                    ]);
                }
            }
            render::csv(&["check", "status", "value", "threshold"], &rows)
        }
    };

    Ok(Execution {
        rendered,
        cache: None,
        failure,
    })
}

// --------------------------------------------------------------------- sums

#[derive(Serialize)]
struct SumsKeyPayload<'a> {
    version: &'a str,
    command: &'a str,
    kind: &'a SumKind,
    x: u64,
    checkpoints: &'a [u64],
}

#[derive(Serialize)]
struct SumsRow {
    x: u64,
    value: f64,
    normalized: f64,
    bound: Option<f64>,
    slack: Option<f64>,
    wall_time_ms: u64,
}

#[derive(Serialize)]
struct SumsReport<'a> {
    kind: &'a SumKind,
    x: u64,
    rows: Vec<SumsRow>,
}

fn to_sum_kind(cfg: &RunConfig, spec: KindSpec) -> Result<SumKind, CliError> {
    match spec {
        KindSpec::Phi => Ok(SumKind::Phi {
            a: positive_shift(cfg)?,
        }),
        KindSpec::Twin => Ok(SumKind::Twin {
            a: positive_shift(cfg)?,
        }),
        KindSpec::Titchmarsh => Ok(SumKind::Titchmarsh {
            a: cfg.a.unwrap_or(1),
        }),
        KindSpec::TauRecip => Ok(SumKind::TauRecip),
        KindSpec::CoprimeRestricted => Ok(SumKind::CoprimeRestricted {
            d: cfg
                .d
                .ok_or_else(|| CliError::usage("coprime-restricted requires --d"))?,
        }),
        KindSpec::Progression => Ok(SumKind::Progression {
            modulus: cfg
                .d
                .ok_or_else(|| CliError::usage("progression requires --d"))?,
            residue: cfg
                .residue
                .ok_or_else(|| CliError::usage("progression requires --residue"))?,
        }),
    }
}

fn sum_rows(rows: &[Checkpoint]) -> Vec<SumsRow> {
    rows.iter()
        .map(|c| SumsRow {
            x: c.x,
            value: c.value,
            normalized: c.normalized,
            bound: c.bound,
            slack: c.bound.map(|b| b - c.value),
            wall_time_ms: c.wall_time_ms,
        })
        .collect()
}

fn render_checkpoints(kind: &SumKind, x: u64, rows: &[Checkpoint], format: Format) -> Result<String, CliError> {
    let rows = sum_rows(rows);
    Ok(match format {
        Format::Json => render::json(&SumsReport { kind, x, rows })?,
        Format::Csv => {
            let lines: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.x.to_string(),
                        float(r.value),
                        float(r.normalized),
                        opt_float(r.bound),
                        opt_float(r.slack),
                        r.wall_time_ms.to_string(),
                    ]
                })
                .collect();
            render::csv(
                &["x", "value", "normalized", "bound", "slack", "wall_time_ms"],
                &lines,
            )
        }
    })
}

fn cmd_sums(cfg: &RunConfig) -> Result<Execution, CliError> {
    let spec = cfg
        .kind
        .ok_or_else(|| CliError::usage("sums requires --kind"))?;
    let x = require_x(cfg)?;
    let kind = to_sum_kind(cfg, spec)?;
    let checkpoints = cfg
        .checkpoints
        .clone()
        .unwrap_or_else(|| sums::default_checkpoints(x));
    let req = SumRequest {
        kind,
        x,
        checkpoints,
    };

    let mut note = None;
    let rows = match &cfg.cache_dir {
        Some(dir) => {
            let key = cache::cache_key(&SumsKeyPayload {
                version: env!("CARGO_PKG_VERSION"),
                command: "sums",
                kind: &req.kind,
                x,
                checkpoints: &req.checkpoints,
            });
            if let Some(rows) = cache::load(dir, &key) {
                note = Some(CacheNote { key, hit: true });
                rows
            } else {
                let rows = sums::run(&req, cfg.workers, cfg.x_cap)?;
                if let Err(e) = cache::store(dir, &key, &rows) {
                    eprintln!("warning: cache write failed: {e}");
                }
                note = Some(CacheNote { key, hit: false });
                rows
            }
        }
        None => sums::run(&req, cfg.workers, cfg.x_cap)?,
    };

    let rendered = render_checkpoints(&req.kind, x, &rows, cfg.format)?;
    Ok(Execution {
        rendered,
        cache: note,
        failure: None,
    })
}

// ------------------------------------------------------------- bound-report

#[derive(Serialize)]
struct BoundRow {
    x: u64,
    value: f64,
    bound: f64,
    ratio: f64,
    order: f64,
    verdict: &'static str,
}

#[derive(Serialize)]
struct BoundReport {
    a: u64,
    k_a: f64,
    rows: Vec<BoundRow>,
}

fn cmd_bound_report(cfg: &RunConfig) -> Result<Execution, CliError> {
    let a = positive_shift(cfg)?;
    let x = require_x(cfg)?;
    let consts = euler::constants(a, &budget_of(cfg))?;
    let checkpoints = cfg
        .checkpoints
        .clone()
        .unwrap_or_else(|| sums::default_checkpoints(x));
    let rows = sums::run(
        &SumRequest {
            kind: SumKind::Phi { a },
            x,
            checkpoints,
        },
        cfg.workers,
        cfg.x_cap,
    )?;

    let mut out_rows = Vec::with_capacity(rows.len());
    let mut first_fail: Option<u64> = None;
    for row in &rows {
        let lx = (row.x as f64).ln();
        let bound = 4.0 * consts.k_a * row.x as f64 / lx.powf(1.5);
        let ratio = row.value / bound;
        let order = row.value * lx.powf(1.5) / (row.x as f64 * consts.k_a);
        let verdict = if row.x < 10_000 {
            "info"
        } else if ratio < 1.0 {
            "pass"
        } else {
            first_fail.get_or_insert(row.x);
            "fail"
        };
        out_rows.push(BoundRow {
            x: row.x,
            value: row.value,
            bound,
            ratio,
            order,
            verdict,
        });
    }
    let failure = first_fail.map(|fx| format!("prime reciprocal sum exceeds its ceiling at x = {fx}"));

    let rendered = match cfg.format {
        Format::Json => render::json(&BoundReport {
            a,
            k_a: consts.k_a,
            rows: out_rows,
        })?,
        Format::Csv => {
            let lines: Vec<Vec<String>> = out_rows
                .iter()
                .map(|r| {
                    vec![
                        r.x.to_string(),
                        float(r.value),
                        float(r.bound),
                        float(r.ratio),
                        float(r.order),
                        r.verdict.to_string(),
                    ]
                })
                .collect();
            render::csv(&["x", "value", "bound", "ratio", "order", "verdict"], &lines)
        }
    };

    Ok(Execution {
        rendered,
        cache: None,
        failure,
    })
}

// ----------------------------------------------------------- mainterm-check

#[derive(Serialize)]
struct MaintermRow {
    x: u64,
    value: f64,
    mainterm: f64,
    residual: f64,
    scaled_residual: f64,
    mainterm_lower: Option<f64>,
    residual_lower: Option<f64>,
    scaled_residual_lower: Option<f64>,
}

#[derive(Serialize)]
struct MaintermReport {
    d: u64,
    m: usize,
    kappa: f64,
    top_growth: Option<f64>,
    rows: Vec<MaintermRow>,
}

fn cmd_mainterm_check(cfg: &RunConfig) -> Result<Execution, CliError> {
    let d = cfg.d.unwrap_or(1);
    let x = require_x(cfg)?;
    let m = cfg.m.unwrap_or(1);
    let budget = budget_of(cfg);
    let kappa = euler::kappa(d)?;
    let checkpoints = cfg
        .checkpoints
        .clone()
        .unwrap_or_else(|| sums::default_checkpoints(x));
    let rows = sums::run(
        &SumRequest {
            kind: SumKind::CoprimeRestricted { d },
            x,
            checkpoints,
        },
        cfg.workers,
        cfg.x_cap,
    )?;

    let mut out_rows = Vec::with_capacity(rows.len());
    for row in &rows {
        let xf = row.x as f64;
        let lx = xf.ln();
        let main = euler::mainterm(xf, d, m, &budget)?;
        let residual = row.value - main;
        let scaled_residual = residual.abs() * lx.powf(m as f64 + 1.5) / (xf * kappa);
        let (mainterm_lower, residual_lower, scaled_residual_lower) = if m >= 1 {
            let main_lo = euler::mainterm(xf, d, m - 1, &budget)?;
            let resid_lo = row.value - main_lo;
            let scaled_lo = resid_lo.abs() * lx.powf(m as f64 - 1.0 + 1.5) / (xf * kappa);
            (Some(main_lo), Some(resid_lo), Some(scaled_lo))
        } else {
            (None, None, None)
        };
        out_rows.push(MaintermRow {
            x: row.x,
            value: row.value,
            mainterm: main,
            residual,
            scaled_residual,
            mainterm_lower,
            residual_lower,
            scaled_residual_lower,
        });
    }

    // Boundedness check at the top end: the scaled residual may wobble but
    // must not blow up between the last two reported decades.
    let tracked: Vec<&MaintermRow> = out_rows.iter().filter(|r| r.x >= 10_000).collect();
    let top_growth = match tracked.as_slice() {
        [.., prev, last] if prev.scaled_residual > 0.0 => {
            Some(last.scaled_residual / prev.scaled_residual)
        }
        _ => None,
    };
    let failure = match top_growth {
        Some(g) if g > 3.0 => Some(format!(
            "scaled residual grew {g:.2}x between the last decades (limit 3x)"
        )),
        _ => None,
    };

    let rendered = match cfg.format {
        Format::Json => render::json(&MaintermReport {
            d,
            m,
            kappa,
            top_growth,
            rows: out_rows,
        })?,
        Format::Csv => {
            let lines: Vec<Vec<String>> = out_rows
                .iter()
                .map(|r| {
                    vec![
                        r.x.to_string(),
                        float(r.value),
                        float(r.mainterm),
                        float(r.residual),
                        float(r.scaled_residual),
                        opt_float(r.mainterm_lower),
                        opt_float(r.residual_lower),
                        opt_float(r.scaled_residual_lower),
                    ]
                })
                .collect();
            render::csv(
                &[
                    "x",
                    "value",
                    "mainterm",
                    "residual",
                    "scaled_residual",
                    "mainterm_lower",
                    "residual_lower",
                    "scaled_residual_lower",
                ],
                &lines,
            )
        }
    };

    Ok(Execution {
        rendered,
        cache: None,
        failure,
    })
}
