//! Command implementations. Every document starts with a schema-version
//! marker, and identical config + seed produces byte-identical bytes.

use quaddiff::arith::convergents;
use quaddiff::fourier::{classify_arc_fast, ArcClass, ArcParams};
use quaddiff::iterate::{
    blow_up_cascade, outer_iteration, FrequencySet, IterateError, IterationParams,
};
use quaddiff::poly::{
    content_bound, factor_over_rationals, is_intersective, AuxiliaryFamily, Intersectivity,
    QuadraticPoly,
};
use quaddiff::sets::{
    evaluate_bound, extremal_difference_free, greedy_difference_free, BoundKind, BoundParams,
    IntegerSet, SolverBudget,
};
use quaddiff::weyl::{
    count_j, major_arc_approx, make_context, minor_arc_bound, weyl_spectrum,
    weyl_sum, WeylError,
};
use serde::Serialize;
use serde_json::json;

pub struct CommandOutput {
    pub text: String,
    pub violations: usize,
}

pub type CmdResult = Result<CommandOutput, String>;

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.12e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

// ---- poly ----

#[derive(Serialize)]
struct PolyRow {
    d: u64,
    r_d: i128,
    f_d: String,
    content: i128,
}

pub fn cmd_poly(f: &QuadraticPoly, d_max: u64, format: Format) -> CmdResult {
    let form = factor_over_rationals(f).map_err(|e| e.to_string())?;
    let decision = is_intersective(f).map_err(|e| e.to_string())?;
    let mut violations = 0usize;
    let (table, bound, content_ok) = if decision.is_intersective() {
        let fam = AuxiliaryFamily::build(f, d_max).map_err(|e| e.to_string())?;
        let bound = content_bound(f);
        let rows: Vec<PolyRow> = (1..=d_max)
            .map(|d| PolyRow {
                d,
                r_d: fam.root(d),
                f_d: fam.poly(d).to_string(),
                content: fam.poly(d).content(),
            })
            .collect();
        let ok = match bound {
            Some(b) => (1..=d_max).all(|d| fam.poly(d).content() <= b),
            None => true,
        };
        if !ok {
            violations += 1;
        }
        (rows, bound, ok)
    } else {
        (Vec::new(), None, true)
    };
    let witness = match &decision {
        Intersectivity::Intersective => None,
        Intersectivity::NotIntersective { witness } => *witness,
    };
    let text = match format {
        Format::Json => {
            let doc = json!({
                "schema": "poly-v1",
                "poly": f.to_string(),
                "factorization": form.to_string(),
                "intersective": decision.is_intersective(),
                "witness": witness,
                "content": f.content(),
                "content_bound": bound,
                "content_bound_holds": content_ok,
                "table": table,
            });
            serde_json::to_string_pretty(&doc).unwrap() + "\n"
        }
        Format::Csv => {
            let mut out = String::from("# schema: poly-v1\n");
            out.push_str(&format!("# poly: {f}\n# factorization: {form}\n"));
            out.push_str(&format!(
                "# intersective: {}{}\n",
                decision.is_intersective(),
                witness.map(|w| format!(" (witness modulus {w})")).unwrap_or_default()
            ));
            if let Some(b) = bound {
                out.push_str(&format!("# content_bound: {b} (holds: {content_ok})\n"));
            }
            out.push_str("d,r_d,f_d,content\n");
            for row in &table {
                out.push_str(&format!("{},{},\"{}\",{}\n", row.d, row.r_d, row.f_d, row.content));
            }
            out
        }
    };
    Ok(CommandOutput { text, violations })
}

// ---- scan ----

pub fn cmd_scan(
    f: &QuadraticPoly,
    n_values: &[u64],
    exact_cap: u64,
    epsilon: f64,
    format: Format,
) -> CmdResult {
    let budget = SolverBudget {
        exact_cap,
        ..SolverBudget::default()
    };
    let bounds = BoundParams {
        rho: (1.0 - 11.0 * epsilon) / 3f64.ln(),
        ..BoundParams::default()
    };
    let mut violations = 0usize;
    #[derive(Serialize)]
    struct Row {
        n: u64,
        f: String,
        greedy_size: u64,
        exact_size: u64,
        exact_flag: bool,
        density: f64,
        thm_a_bound: Option<f64>,
        thm_main_bound: Option<f64>,
    }
    let mut rows = Vec::new();
    for &n in n_values {
        if n == 0 {
            return Err("N must be positive".into());
        }
        let greedy = greedy_difference_free(f, n).map_err(|e| e.to_string())?;
        let extremal = extremal_difference_free(f, n, budget).map_err(|e| e.to_string())?;
        if (greedy.len() as u64) > extremal.size {
            violations += 1;
        }
        rows.push(Row {
            n,
            f: f.to_string(),
            greedy_size: greedy.len() as u64,
            exact_size: extremal.size,
            exact_flag: extremal.exact,
            density: extremal.size as f64 / n as f64,
            thm_a_bound: if n >= 3 {
                evaluate_bound(BoundKind::ThmA, n, &bounds).value()
            } else {
                None
            },
            thm_main_bound: if n >= 3 {
                evaluate_bound(BoundKind::Main, n, &bounds).value()
            } else {
                None
            },
        });
    }
    let text = match format {
        Format::Json => {
            let doc = json!({ "schema": "scan-v1", "rows": rows });
            serde_json::to_string_pretty(&doc).unwrap() + "\n"
        }
        Format::Csv => {
            let mut out = String::from("# schema: scan-v1\n");
            out.push_str("N,f,greedy_size,exact_size,exact_flag,density,thmA_bound,thm1.1_bound\n");
            for r in &rows {
                out.push_str(&format!(
                    "{},\"{}\",{},{},{},{},{},{}\n",
                    r.n,
                    r.f,
                    r.greedy_size,
                    r.exact_size,
                    r.exact_flag,
                    fmt_f64(r.density),
                    fmt_opt(r.thm_a_bound),
                    fmt_opt(r.thm_main_bound),
                ));
            }
            out
        }
    };
    Ok(CommandOutput { text, violations })
}

// ---- weyl ----

const WEYL_SPECTRUM_CAP: u64 = 200_000;
const WEYL_MOMENT_CAP: u64 = 120;

pub fn cmd_weyl(f: &QuadraticPoly, l_values: &[u64], format: Format) -> CmdResult {
    let mut violations = 0usize;
    #[derive(Serialize)]
    struct Row {
        l: u64,
        m: u64,
        j: u64,
        s0: f64,
        s0_ge_quarter: bool,
        err_q1: Option<f64>,
        err_q2: Option<f64>,
        err_q3: Option<f64>,
        err_q5: Option<f64>,
        minor_ratio_max: Option<f64>,
        sixth_moment: Option<f64>,
        moment_rhs: Option<f64>,
    }
    let mut rows = Vec::new();
    for &l_raw in l_values {
        // Snap to a multiple of 30 so t/L = 1/q is exact for q in {1,2,3,5}.
        let l = (l_raw / 30) * 30;
        if l == 0 {
            return Err(format!("modulus {l_raw} too small (snapped to 0)"));
        }
        let ctx = match make_context(*f, l) {
            Ok(c) => c,
            Err(WeylError::DegenerateRange) => continue,
            Err(e) => return Err(e.to_string()),
        };
        let s0 = ctx.s0();
        let s0_ok = ctx.s0_at_least_quarter();
        if !s0_ok {
            violations += 1;
        }
        let mut errs = [None, None, None, None];
        for (slot, q) in [1u64, 2, 3, 5].iter().enumerate() {
            let t = l / q;
            let exact = weyl_sum(&ctx, t);
            let approx = major_arc_approx(&ctx, 1, *q, 0.0).map_err(|e| e.to_string())?;
            errs[slot] = Some((exact - approx.main_term).norm());
        }
        let (minor_ratio_max, moment, moment_rhs) = if l <= WEYL_SPECTRUM_CAP {
            let spec = weyl_spectrum(&ctx);
            let k = ((ctx.m as f64).powf(0.1).floor() as u64).max(2);
            let params = ArcParams::standard(k);
            let mut worst: Option<f64> = None;
            for t in 1..l {
                if !matches!(classify_arc_fast(t, l, &params), ArcClass::Minor) {
                    continue;
                }
                // Best Weyl-inequality envelope over the continued-fraction
                // approximations of t/L.
                let bound = convergents(t as i128, l as i128)
                    .into_iter()
                    .filter(|&(_, q)| q >= 1 && (q as u128) <= (ctx.m as u128).pow(2))
                    .map(|(_, q)| minor_arc_bound(&ctx, q as u64))
                    .fold(f64::INFINITY, f64::min);
                if bound.is_finite() && bound > 0.0 {
                    let ratio = spec[t as usize].norm() / bound;
                    worst = Some(worst.map_or(ratio, |w: f64| w.max(ratio)));
                }
            }
            let (moment, rhs) = if ctx.m <= WEYL_MOMENT_CAP {
                let moment = quaddiff::numeric::pairwise_sum(
                    &spec.iter().map(|c| c.norm_sqr().powi(3)).collect::<Vec<_>>(),
                );
                let j = count_j(ctx.h.a2, ctx.h.a1, ctx.m).map_err(|e| e.to_string())?;
                let rhs = l as f64 / (ctx.m as f64).powi(6) * j as f64;
                if moment > rhs {
                    violations += 1;
                }
                (Some(moment), Some(rhs))
            } else {
                (None, None)
            };
            (worst, moment, rhs)
        } else {
            (None, None, None)
        };
        rows.push(Row {
            l,
            m: ctx.m,
            j: ctx.j,
            s0,
            s0_ge_quarter: s0_ok,
            err_q1: errs[0],
            err_q2: errs[1],
            err_q3: errs[2],
            err_q5: errs[3],
            minor_ratio_max,
            sixth_moment: moment,
            moment_rhs,
        });
    }
    let text = match format {
        Format::Json => {
            let doc = json!({ "schema": "weyl-v1", "poly": f.to_string(), "rows": rows });
            serde_json::to_string_pretty(&doc).unwrap() + "\n"
        }
        Format::Csv => {
            let mut out = String::from("# schema: weyl-v1\n");
            out.push_str(&format!("# poly: {f}\n"));
            out.push_str(
                "L,M,j,s0,s0_ge_quarter,err_q1,err_q2,err_q3,err_q5,minor_ratio_max,sixth_moment,moment_rhs\n",
            );
            for r in &rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                    r.l,
                    r.m,
                    r.j,
                    fmt_f64(r.s0),
                    r.s0_ge_quarter,
                    fmt_opt(r.err_q1),
                    fmt_opt(r.err_q2),
                    fmt_opt(r.err_q3),
                    fmt_opt(r.err_q5),
                    fmt_opt(r.minor_ratio_max),
                    fmt_opt(r.sixth_moment),
                    fmt_opt(r.moment_rhs),
                ));
            }
            out
        }
    };
    Ok(CommandOutput { text, violations })
}

/// Per-frequency table for one modulus (CSV only; the table format is fixed).
pub fn cmd_weyl_detail(f: &QuadraticPoly, l: u64) -> CmdResult {
    if l > WEYL_SPECTRUM_CAP {
        return Err(format!("detail table caps L at {WEYL_SPECTRUM_CAP}"));
    }
    let ctx = make_context(*f, l).map_err(|e| e.to_string())?;
    let k = ((ctx.m as f64).powf(0.1).floor() as u64).max(2);
    let params = ArcParams::standard(k);
    let text = quaddiff::weyl::spectrum_table_csv(&ctx, &params).map_err(|e| e.to_string())?;
    Ok(CommandOutput { text, violations: 0 })
}

// ---- simulate ----

pub struct SimulateConfig {
    pub set_spec: String,
    pub n: u64,
    pub seed: u64,
    pub blowup_rounds: u32,
    pub params: IterationParams,
}

pub fn cmd_simulate(set: &IntegerSet, f: &QuadraticPoly, cfg: &SimulateConfig) -> CmdResult {
    let trace = match outer_iteration(set, f, &cfg.params) {
        Ok(t) => t,
        Err(e @ (IterateError::NotDifferenceFree { .. } | IterateError::NotIntersective)) => {
            return Err(format!("instance rejected: {e}"));
        }
        Err(e) => return Err(e.to_string()),
    };
    let mut violations = trace.violations.len();
    let is_case2 = matches!(trace.terminal, quaddiff::iterate::Terminal::Case2 { .. });
    let (blowups, blowup_note) = if is_case2 {
        match blow_up_cascade(
            &FrequencySet::seed(),
            &trace.final_set,
            &trace.final_poly,
            &cfg.params,
            cfg.blowup_rounds,
        ) {
            Ok((reports, stop)) => {
                violations += reports.iter().map(|r| r.violations.len()).sum::<usize>();
                (reports, stop)
            }
            Err(e) => (Vec::new(), Some(format!("blow-up unavailable: {e}"))),
        }
    } else {
        (
            Vec::new(),
            Some("terminal state is not in the spread-spectrum case".into()),
        )
    };
    let doc = json!({
        "schema": "simulate-v1",
        "config": {
            "poly": f.to_string(),
            "n": cfg.n,
            "set": cfg.set_spec,
            "set_size": set.len(),
            "seed": cfg.seed,
            "blowup_rounds": cfg.blowup_rounds,
            "params": cfg.params,
        },
        "trace": trace,
        "blowup": blowups.first(),
        "blowups": blowups,
        "blowup_note": blowup_note,
        "violation_count": violations,
    });
    Ok(CommandOutput {
        text: serde_json::to_string_pretty(&doc).unwrap() + "\n",
        violations,
    })
}
