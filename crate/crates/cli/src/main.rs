//! `iqlam`: lambda-invariant classification, scans, class groups, field
//! families, Eisenstein series checks and verification suites.
//!
//! Exit codes: 0 success, 1 verification failure or criterion
//! disagreement, 2 usage error, 3 budget exceeded.

mod config;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};
use iqlam_core::families::{self, FamilyKind};
use iqlam_core::lambda::{self, classify_lambda_with};
use iqlam_core::lvalues::{
    self, build_scaled_series_with, congruence_check, direct_filter, eisenstein_pipeline,
    is_p_integral, kappa_constants, rational_string, sturm_data, CongruenceOutcome, ModClass,
};
use iqlam_core::quadforms::{self, fundamental_from_radicand};
use iqlam_core::scanner::{self, ScanFilter, SuiteName, SuiteOptions};
use iqlam_core::tables::{self, RowResult};
use iqlam_core::{Budget, Error, FundamentalDiscriminant};
use serde_json::{json, Value};

use render::{render, Output};

#[derive(Parser, Debug)]
#[command(name = "iqlam", version, about = "Iwasawa lambda invariants of imaginary quadratic fields")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "text")]
    output: Output,

    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// File of key=value lines supplying flags; command-line flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Args, Debug)]
struct BudgetArgs {
    #[arg(long, global = true, env = "IQLAM_BUDGET_CLASS_GROUP_MAX_ABS_D")]
    budget_class_group_max_abs_d: Option<u64>,
    #[arg(long, global = true, env = "IQLAM_BUDGET_LVALUE_MAX_ABS_D")]
    budget_lvalue_max_abs_d: Option<u64>,
    #[arg(long, global = true, env = "IQLAM_BUDGET_LVALUE_MAX_N")]
    budget_lvalue_max_n: Option<u64>,
    #[arg(long, global = true, env = "IQLAM_BUDGET_BERNOULLI_MAX_N")]
    budget_bernoulli_max_n: Option<u64>,
    #[arg(long, global = true, env = "IQLAM_BUDGET_GENERATOR_MAX_BITS")]
    budget_generator_max_bits: Option<u64>,
    #[arg(long, global = true, env = "IQLAM_BUDGET_FACTOR_RHO_ITERATIONS")]
    budget_factor_rho_iterations: Option<u64>,
    #[arg(long, global = true, env = "IQLAM_BUDGET_SEARCH_MAX_ABS_D")]
    budget_search_max_abs_d: Option<u64>,
}

impl BudgetArgs {
    fn budget(&self) -> Budget {
        let mut b = Budget::default();
        let set = |slot: &mut u64, v: Option<u64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut b.class_group_max_abs_d, self.budget_class_group_max_abs_d);
        set(&mut b.lvalue_max_abs_d, self.budget_lvalue_max_abs_d);
        set(&mut b.lvalue_max_n, self.budget_lvalue_max_n);
        set(&mut b.bernoulli_max_n, self.budget_bernoulli_max_n);
        set(&mut b.generator_max_bits, self.budget_generator_max_bits);
        set(&mut b.factor_rho_iterations, self.budget_factor_rho_iterations);
        set(&mut b.search_max_abs_d, self.budget_search_max_abs_d);
        b
    }
}

fn parse_mod_class(s: &str) -> Result<ModClass, String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected A,B, got '{s}'"))?;
    let a: u64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b: u64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    ModClass::from_pair(a, b).map_err(|e| e.to_string())
}

/// `2..13`, `2..=13`, or `2,4,5`.
fn parse_n_list(s: &str) -> Result<Vec<u32>, String> {
    let bad = |e: std::num::ParseIntError| format!("bad n list '{s}': {e}");
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: u32 = lo.trim().parse().map_err(bad)?;
        let hi: u32 = hi.trim().trim_start_matches('=').parse().map_err(bad)?;
        if lo > hi {
            return Err(format!("empty range '{s}'"));
        }
        return Ok((lo..=hi).collect());
    }
    s.split(',').map(|x| x.trim().parse().map_err(bad)).collect()
}

#[derive(Args, Debug, Clone)]
struct PrimeSets {
    /// Primes that must split (comma separated).
    #[arg(long, value_delimiter = ',')]
    split: Vec<u64>,
    /// Primes that must be inert (comma separated).
    #[arg(long, value_delimiter = ',')]
    inert: Vec<u64>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Decide lambda_p = 1 or lambda_p > 1 for Q(sqrt d).
    Classify {
        #[arg(long)]
        p: u64,
        /// Radicand or discriminant of the field (negative).
        #[arg(long, allow_hyphen_values = true)]
        d: i64,
    },
    /// Classify every fundamental -X < D < 0 passing the filters, as JSONL.
    Scan {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        max_x: u64,
        /// Congruence class A,B of D: 1,8 or 5,8 or 8,16.
        #[arg(long, value_parser = parse_mod_class)]
        mod_class: Option<ModClass>,
        #[command(flatten)]
        sets: PrimeSets,
        /// Discriminants to leave out (comma separated).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        exclude: Vec<i64>,
        /// Write records here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Continue after the last complete record of --out.
        #[arg(long)]
        resume: bool,
    },
    /// Class number and invariant factors of Q(sqrt d).
    ClassGroup {
        #[arg(long, allow_hyphen_values = true)]
        d: i64,
        /// Also report the order of the class above this split prime.
        #[arg(long)]
        p: Option<u64>,
    },
    /// Family members, order checks, collisions, or the class-group table.
    Family {
        #[arg(long)]
        p: u64,
        /// one-minus-4pn, sands-a-sq, one-minus-pn, four-minus-pn,
        /// q1sq-minus-pn, four-q1sq-minus-pn; without it, the table of
        /// Q(sqrt(x1^2 - p^n)).
        #[arg(long)]
        kind: Option<String>,
        /// Exponents: `2..13` or `2,4,5`.
        #[arg(long)]
        n: Option<String>,
        /// x1 for the table, or a / q1 for the member kinds that take one.
        #[arg(long)]
        x1: Option<u64>,
        /// Report pairs of exponents giving the same field.
        #[arg(long)]
        collisions: bool,
    },
    /// Scaled Cohen series; with --mod-class, operator pipeline vs direct
    /// filter modulo p.
    Series {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 200)]
        bound: u64,
        #[arg(long, value_parser = parse_mod_class)]
        mod_class: Option<ModClass>,
        #[command(flatten)]
        sets: PrimeSets,
        /// Extra inert prime Q.
        #[arg(long)]
        q: Option<u64>,
    },
    /// Built-in verification suites.
    Verify {
        /// lemma23, bound, tables, cross or all.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Range bound for the bound and cross suites.
        #[arg(long)]
        max_x: Option<u64>,
    },
    /// Least |D| in a congruence class with lambda_p = 1 (D != -8).
    D0 {
        #[arg(long)]
        p: u64,
        #[arg(long, value_parser = parse_mod_class)]
        mod_class: Option<ModClass>,
        #[command(flatten)]
        sets: PrimeSets,
    },
    /// kappa and P1..P3, alpha(p), Sturm data.
    Constants {
        #[arg(long)]
        p: u64,
        #[arg(long, value_parser = parse_mod_class)]
        mod_class: Option<ModClass>,
        #[command(flatten)]
        sets: PrimeSets,
        #[arg(long)]
        q: Option<u64>,
        /// Twice the weight, for Sturm data.
        #[arg(long)]
        weight2: Option<u64>,
        /// Level, for Sturm data.
        #[arg(long)]
        level: Option<u64>,
    },
}

/// Command failure with its exit code.
struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BudgetExceeded(_) | Error::NotFoundWithinBudget(_) => 3,
            Error::CriterionDisagreement { .. } | Error::IntegralityViolation(_) => 1,
            _ => 2,
        };
        Failure {
            code,
            msg: e.to_string(),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        msg: msg.into(),
    }
}

/// Result value plus exit code for outcomes that are data, not errors.
struct Done {
    value: Value,
    text: Option<String>,
    code: u8,
}

impl Done {
    fn ok(value: Value) -> Self {
        Done {
            value,
            text: None,
            code: 0,
        }
    }
}

fn field(t: i64) -> Result<FundamentalDiscriminant, Failure> {
    Ok(fundamental_from_radicand(t)?.0)
}

fn run(cli: &Cli) -> Result<Done, Failure> {
    let budget = cli.budget.budget();
    match &cli.cmd {
        Cmd::Classify { p, d } => {
            let d = field(*d)?;
            let v = classify_lambda_with(d, *p, &budget)?;
            Ok(Done::ok(json!({
                "d": d.value(),
                "p": p,
                "lambda": v.value.as_str(),
                "method": v.method.as_str(),
                "witnesses": v.witnesses,
            })))
        }
        Cmd::Scan {
            p,
            max_x,
            mod_class,
            sets,
            exclude,
            out,
            resume,
        } => scan(cli.output, &budget, *p, *max_x, *mod_class, sets, exclude, out, *resume),
        Cmd::ClassGroup { d, p } => {
            let d = field(*d)?;
            let g = quadforms::class_group_with(d, &budget)?;
            let mut v = json!({
                "d": d.value(),
                "h": g.h,
                "factors": g.invariant_factors,
            });
            if let Some(p) = p {
                v["s"] = json!(quadforms::ideal_class_order_with(d, *p, &budget)?);
            }
            Ok(Done::ok(v))
        }
        Cmd::Family {
            p,
            kind,
            n,
            x1,
            collisions,
        } => family(cli.output, &budget, *p, kind.as_deref(), n.as_deref(), *x1, *collisions),
        Cmd::Series {
            p,
            bound,
            mod_class,
            sets,
            q,
        } => series(&budget, *p, *bound, *mod_class, sets, *q),
        Cmd::Verify { suite, max_x } => {
            let names: Vec<SuiteName> = if suite == "all" {
                SuiteName::ALL.to_vec()
            } else {
                vec![SuiteName::from_name(suite).ok_or_else(|| usage(format!("unknown suite '{suite}'")))?]
            };
            let mut opts = SuiteOptions::default();
            if let Some(x) = max_x {
                opts.bound_x = *x;
                opts.cross_x = *x;
            }
            let reports: Vec<_> = names
                .into_iter()
                .map(|n| scanner::verify_suite(n, &opts, &budget))
                .collect();
            let code = if reports.iter().all(|r| r.passed) { 0 } else { 1 };
            Ok(Done {
                value: serde_json::to_value(reports).expect("reports serialize"),
                text: None,
                code,
            })
        }
        Cmd::D0 { p, mod_class, sets } => {
            let d = match mod_class {
                Some(ab) => scanner::search_d0(*p, *ab, &sets.split, &sets.inert, &budget)?,
                None => {
                    if !sets.split.is_empty() || !sets.inert.is_empty() {
                        return Err(usage("--split/--inert need --mod-class"));
                    }
                    lambda::find_d0(*p)?
                }
            };
            Ok(Done {
                value: json!({ "d0": d.value(), "p": p }),
                text: (cli.output == Output::Text).then(|| format!("{}\n", d.value())),
                code: 0,
            })
        }
        Cmd::Constants {
            p,
            mod_class,
            sets,
            q,
            weight2,
            level,
        } => {
            let mut v = json!({ "p": p, "alpha": lvalues::alpha(*p) });
            match (mod_class, q) {
                (Some(ab), Some(q)) => {
                    let k = kappa_constants(*p, &sets.split, &sets.inert, *q, *ab)?;
                    v["kappa"] = json!(k.kappa.to_string());
                    v["p1"] = json!(k.p1.to_string());
                    v["p2"] = json!(k.p2.to_string());
                    v["p3"] = json!(k.p3.to_string());
                }
                (None, None) => {}
                _ => return Err(usage("kappa needs both --mod-class and --q")),
            }
            match (weight2, level) {
                (Some(k2), Some(n1)) => {
                    let (index, bound) = sturm_data(*k2, *n1)?;
                    v["sturm_index"] = json!(index);
                    v["sturm_bound"] = json!(rational_string(&bound));
                }
                (None, None) => {}
                _ => return Err(usage("Sturm data needs both --weight2 and --level")),
            }
            Ok(Done::ok(v))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn scan(
    output: Output,
    budget: &Budget,
    p: u64,
    max_x: u64,
    ab: Option<ModClass>,
    sets: &PrimeSets,
    exclude: &[i64],
    out: &Option<PathBuf>,
    resume: bool,
) -> Result<Done, Failure> {
    let filter = ScanFilter {
        x: max_x,
        p,
        ab,
        splus: sets.split.clone(),
        sminus: sets.inert.clone(),
        exclude: exclude.to_vec(),
    };
    let jsonl = matches!(output, Output::Json | Output::Text);
    if resume && (out.is_none() || !jsonl) {
        return Err(usage("--resume needs --out with JSONL output"));
    }
    if let (Some(path), true) = (out, jsonl) {
        let s = scanner::scan_to_jsonl(&filter, budget, path, resume)?;
        eprintln!(
            "scanned {} records ({} one, {} gt1, {} errors) into {}",
            s.records,
            s.one,
            s.gt1,
            s.errors,
            path.display()
        );
        return Ok(Done {
            value: Value::Null,
            text: Some(String::new()),
            code: 0,
        });
    }
    let mut lines = String::new();
    let mut records = Vec::new();
    let s = scanner::scan(&filter, budget, None, |r| {
        if jsonl {
            lines.push_str(&serde_json::to_string(r).expect("record serializes"));
            lines.push('\n');
        } else {
            records.push(serde_json::to_value(r).expect("record serializes"));
        }
        Ok(())
    })?;
    eprintln!(
        "scanned {} records ({} one, {} gt1, {} errors)",
        s.records, s.one, s.gt1, s.errors
    );
    let text = if jsonl {
        lines
    } else {
        render(&Value::Array(records), output)
    };
    if let Some(path) = out {
        std::fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        return Ok(Done {
            value: Value::Null,
            text: Some(String::new()),
            code: 0,
        });
    }
    Ok(Done {
        value: Value::Null,
        text: Some(text),
        code: 0,
    })
}

fn family(
    output: Output,
    budget: &Budget,
    p: u64,
    kind: Option<&str>,
    n: Option<&str>,
    x1: Option<u64>,
    collisions: bool,
) -> Result<Done, Failure> {
    let ns: Option<Vec<u32>> = n.map(parse_n_list).transpose().map_err(usage)?;
    let Some(kind) = kind else {
        // class-group table of Q(sqrt(x1^2 - p^n))
        let x1 = x1
            .or_else(|| tables::table_x1(p))
            .unwrap_or(if p % 4 == 1 { 2 } else { 1 });
        let ns = ns.unwrap_or_else(|| {
            let golden: Vec<u32> = tables::GOLDEN.iter().filter(|g| g.p == p).map(|g| g.n).collect();
            if golden.is_empty() {
                (2..=10).filter(|n| (*n as u64) % p != 0).collect()
            } else {
                golden
            }
        });
        let rows: Vec<RowResult> = ns
            .iter()
            .map(|&n| tables::compute_row(p, x1, n, budget).map_err(|e| (p, n, e.to_string())))
            .collect();
        let text = match output {
            Output::Md | Output::Text => Some(tables::render_markdown(&rows)),
            Output::Csv => Some(tables::render_csv(&rows)),
            Output::Json => None,
        };
        let value = Value::Array(
            rows.iter()
                .map(|r| match r {
                    Ok(r) => serde_json::to_value(r).expect("row serializes"),
                    Err((p, n, e)) => json!({ "p": p, "n": n, "error": e }),
                })
                .collect(),
        );
        return Ok(Done { value, text, code: 0 });
    };
    let kind = FamilyKind::from_name(kind).ok_or_else(|| usage(format!("unknown family kind '{kind}'")))?;
    let ns = ns.ok_or_else(|| usage("--n is required with --kind"))?;
    if collisions {
        let pairs = families::collision_scan(kind, p, &ns, x1)?;
        let v: Vec<Value> = pairs.iter().map(|(a, b)| json!({ "n1": a, "n2": b })).collect();
        return Ok(Done::ok(Value::Array(v)));
    }
    let mut out = Vec::new();
    let mut code = 0;
    for n in ns {
        let m = families::member(kind, p, n, x1)?;
        let mut v = json!({
            "kind": kind.name(),
            "p": p,
            "n": n,
            "param": m.a_or_q1,
            "radicand": m.radicand,
            "d": m.d.value(),
            "field": tables::field_label(m.d.radicand()),
        });
        match families::verify_order_with(&m, budget) {
            Ok((s, ok)) => {
                v["s"] = json!(s);
                v["matches"] = json!(ok);
                v["note"] = Value::Null;
                if !ok {
                    code = 1;
                }
            }
            Err(Error::ExcludedField { s, reason }) => {
                v["s"] = json!(s);
                v["matches"] = Value::Null;
                v["note"] = json!(reason);
            }
            Err(e) => return Err(e.into()),
        }
        out.push(v);
    }
    Ok(Done {
        value: Value::Array(out),
        text: None,
        code,
    })
}

fn series(
    budget: &Budget,
    p: u64,
    bound: u64,
    ab: Option<ModClass>,
    sets: &PrimeSets,
    q: Option<u64>,
) -> Result<Done, Failure> {
    let base = build_scaled_series_with(p, bound, budget)?;
    let Some(ab) = ab else {
        let v: Vec<Value> = (0..=bound)
            .map(|n| {
                let c = base.coeff(n);
                json!({ "n": n, "coeff": rational_string(&c), "p_integral": is_p_integral(&c, p) })
            })
            .collect();
        return Ok(Done::ok(Value::Array(v)));
    };
    let piped = eisenstein_pipeline(&base, &sets.split, &sets.inert, q, ab)?;
    let filtered = direct_filter(&base, &sets.split, &sets.inert, q, ab);
    let nonzero = filtered.coeffs().iter().filter(|c| **c != Default::default()).count();
    let outcome = congruence_check(&piped, &filtered, p, piped.bound.min(filtered.bound))?;
    let (check, code) = match outcome {
        CongruenceOutcome::Pass => ("pass".to_string(), 0),
        CongruenceOutcome::Mismatch { n, left, right } => {
            (format!("mismatch at N={n}: {left} vs {right}"), 1)
        }
    };
    let (a, b) = ab.pair();
    Ok(Done {
        value: json!({
            "p": p,
            "bound": bound,
            "mod_class": format!("{a},{b}"),
            "nonzero": nonzero,
            "exact_equal": piped.coeffs() == filtered.coeffs(),
            "check": check,
        }),
        text: None,
        code,
    })
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let args = match config::expand(args, &Cli::command()) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let res = match scanner::with_threads(cli.threads, || run(&cli)) {
        Ok(r) => r,
        Err(e) => Err(Failure::from(e)),
    };
    match res {
        Ok(done) => {
            let text = match done.text {
                Some(t) if cli.output != Output::Json || done.value.is_null() => t,
                _ => render(&done.value, cli.output),
            };
            print!("{text}");
            ExitCode::from(done.code)
        }
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
