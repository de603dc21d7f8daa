//! Sweeps over negative fundamental discriminants: enumeration, congruence
//! and splitting filters, lambda classification with resumable JSONL
//! output, the D0 search, and the built-in verification suites.

use std::collections::BTreeSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Seek, SeekFrom, Write};
use std::path::Path;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::lambda::{
    classify_lambda_with, lvalue_test_with, sands_test, split_context_with, LambdaValue,
    Method,
};
use crate::lvalues::ModClass;
use crate::numth::{self, kronecker};
use crate::quadforms::{
    self, analytic_h_bound, fundamental_from_radicand, is_fundamental, splitting_type,
    FundamentalDiscriminant, SplittingType,
};
use crate::tables::{self, RowResult, GOLDEN};

/// Discriminants per parallel work unit.
const CHUNK: usize = 512;

/// Squarefree flags for `0..n`.
fn squarefree_sieve(n: usize) -> Vec<bool> {
    let mut sf = vec![true; n];
    if n > 0 {
        sf[0] = false;
    }
    let mut q = 2usize;
    while q * q < n {
        let q2 = q * q;
        let mut k = q2;
        while k < n {
            sf[k] = false;
            k += q2;
        }
        q += 1;
    }
    sf
}

/// Every fundamental `-x < D < 0`, by ascending `|D|`.
pub fn enumerate_fundamental(x: u64) -> Vec<FundamentalDiscriminant> {
    let n = x as usize;
    let sf = squarefree_sieve(n);
    let mut out = Vec::new();
    for k in 3..n {
        let ok = match k % 4 {
            3 => sf[k],
            0 => {
                let m = k / 4;
                (m % 4 == 1 || m % 4 == 2) && sf[m]
            }
            _ => false,
        };
        if ok {
            out.push(FundamentalDiscriminant::new(-(k as i64)).expect("sieved"));
        }
    }
    out
}

fn check_prime_sets(splus: &[u64], sminus: &[u64]) -> Result<()> {
    for &r in splus.iter().chain(sminus) {
        if r == 2 || !numth::is_prime(r) {
            return Err(Error::precondition(format!("{r} is not an odd prime")));
        }
    }
    if splus.iter().any(|r| sminus.contains(r)) {
        return Err(Error::precondition("split and inert sets overlap"));
    }
    Ok(())
}

fn distinct(v: &[u64]) -> Vec<u64> {
    v.iter().copied().collect::<BTreeSet<_>>().into_iter().collect()
}

/// Residues mod `B * prod(r)` of the discriminants in the class `A mod B`
/// that split at every `r` in `splus` and are inert at every `r` in `sminus`.
pub fn residue_classes(ab: ModClass, splus: &[u64], sminus: &[u64]) -> Result<(u64, BTreeSet<u64>)> {
    check_prime_sets(splus, sminus)?;
    let (a, b) = ab.pair();
    let splus = distinct(splus);
    let sminus = distinct(sminus);
    let modulus = splus
        .iter()
        .chain(&sminus)
        .try_fold(b, |m, &r| m.checked_mul(r))
        .filter(|&m| m <= 1 << 32)
        .ok_or_else(|| Error::budget("residue modulus exceeds 2^32"))?;
    let classes = (a..modulus)
        .step_by(b as usize)
        .filter(|&c| {
            splus.iter().all(|&r| kronecker((c % r) as i64, r as i64) == 1)
                && sminus.iter().all(|&r| kronecker((c % r) as i64, r as i64) == -1)
        })
        .collect();
    Ok((modulus, classes))
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ScanFilter {
    /// Scan `-x < D < 0`.
    pub x: u64,
    pub p: u64,
    pub ab: Option<ModClass>,
    pub splus: Vec<u64>,
    pub sminus: Vec<u64>,
    pub exclude: Vec<i64>,
}

impl ScanFilter {
    pub fn new(x: u64, p: u64) -> Self {
        ScanFilter {
            x,
            p,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 2 || !numth::is_prime(self.p) {
            return Err(Error::precondition(format!("{} is not an odd prime", self.p)));
        }
        check_prime_sets(&self.splus, &self.sminus)?;
        if !self.splus.is_empty() && !self.splus.contains(&self.p) {
            return Err(Error::precondition(format!(
                "{} must belong to the split set",
                self.p
            )));
        }
        Ok(())
    }

    /// Ramified primes satisfy neither the split nor the inert condition.
    pub fn accepts(&self, d: FundamentalDiscriminant) -> bool {
        if let Some(ab) = self.ab {
            let (a, b) = ab.pair();
            if d.value().rem_euclid(b as i64) as u64 != a {
                return false;
            }
        }
        self.splus
            .iter()
            .all(|&r| splitting_type(d, r) == SplittingType::Split)
            && self
                .sminus
                .iter()
                .all(|&r| splitting_type(d, r) == SplittingType::Inert)
            && !self.exclude.contains(&d.value())
    }
}

/// One line of scan output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub d: i64,
    pub h: Option<u64>,
    pub factors: Vec<u64>,
    pub s: Option<u64>,
    pub lambda: Option<String>,
    pub method: Option<String>,
    pub error: Option<String>,
}

impl ScanRecord {
    pub fn lambda_value(&self) -> Option<LambdaValue> {
        match self.lambda.as_deref() {
            Some("one") => Some(LambdaValue::One),
            Some("gt1") => Some(LambdaValue::GreaterThanOne),
            _ => None,
        }
    }
}

/// Class group, order of the class above `p` and verdict for one field.
/// Failures land in `error`.
pub fn scan_record(d: FundamentalDiscriminant, p: u64, budget: &Budget) -> ScanRecord {
    let mut rec = ScanRecord {
        d: d.value(),
        h: None,
        factors: Vec::new(),
        s: None,
        lambda: None,
        method: None,
        error: None,
    };
    match quadforms::class_group_with(d, budget) {
        Ok(g) => {
            rec.h = Some(g.h);
            rec.factors = g.invariant_factors;
        }
        Err(e) => {
            rec.error = Some(e.to_string());
            return rec;
        }
    }
    if kronecker(d.value(), p as i64) != 1 {
        return rec;
    }
    let result = quadforms::ideal_class_order_with(d, p, budget).and_then(|s| {
        rec.s = Some(s);
        classify_lambda_with(d, p, budget)
    });
    match result {
        Ok(v) => {
            rec.lambda = Some(v.value.as_str().to_string());
            rec.method = Some(v.method.as_str().to_string());
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ScanSummary {
    pub records: u64,
    pub one: u64,
    pub gt1: u64,
    pub errors: u64,
}

/// Runs the scan, calling `emit` in ascending `|D|` order. Discriminants
/// with `|D| <= resume_after` are skipped.
pub fn scan(
    filter: &ScanFilter,
    budget: &Budget,
    resume_after: Option<u64>,
    mut emit: impl FnMut(&ScanRecord) -> Result<()>,
) -> Result<ScanSummary> {
    filter.validate()?;
    let ds: Vec<FundamentalDiscriminant> = enumerate_fundamental(filter.x)
        .into_iter()
        .filter(|d| resume_after.map_or(true, |r| d.abs() > r) && filter.accepts(*d))
        .collect();
    let mut summary = ScanSummary::default();
    let batch = CHUNK * rayon::current_num_threads().max(1);
    for block in ds.chunks(batch) {
        // the indexed collect keeps input order whatever the worker count
        let recs: Vec<ScanRecord> = block
            .par_iter()
            .with_min_len(CHUNK / 8)
            .map(|&d| scan_record(d, filter.p, budget))
            .collect();
        for r in &recs {
            summary.records += 1;
            match r.lambda_value() {
                Some(LambdaValue::One) => summary.one += 1,
                Some(LambdaValue::GreaterThanOne) => summary.gt1 += 1,
                None => {}
            }
            if r.error.is_some() {
                summary.errors += 1;
            }
            emit(r)?;
        }
    }
    Ok(summary)
}

pub fn scan_collect(filter: &ScanFilter, budget: &Budget) -> Result<Vec<ScanRecord>> {
    let mut out = Vec::new();
    scan(filter, budget, None, |r| {
        out.push(r.clone());
        Ok(())
    })?;
    Ok(out)
}

fn io_err(e: std::io::Error) -> Error {
    Error::precondition(format!("i/o: {e}"))
}

/// `|d|` of the last complete record of a JSONL file. A torn final line is
/// cut off so appending resumes cleanly.
pub fn checkpoint(path: &Path) -> Result<Option<u64>> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(io_err(e)),
    };
    let mut good_len = 0u64;
    let mut last = None;
    let mut reader = BufReader::new(file);
    let mut line = String::new();
    loop {
        line.clear();
        let n = reader.read_line(&mut line).map_err(io_err)?;
        if n == 0 {
            break;
        }
        if !line.ends_with('\n') {
            break;
        }
        match serde_json::from_str::<ScanRecord>(line.trim_end()) {
            Ok(r) => {
                last = Some(r.d.unsigned_abs());
                good_len += n as u64;
            }
            Err(_) => break,
        }
    }
    let f = OpenOptions::new().write(true).open(path).map_err(io_err)?;
    f.set_len(good_len).map_err(io_err)?;
    Ok(last)
}

/// Scans into a JSONL file, continuing after its checkpoint when `resume`.
pub fn scan_to_jsonl(
    filter: &ScanFilter,
    budget: &Budget,
    path: &Path,
    resume: bool,
) -> Result<ScanSummary> {
    let after = if resume { checkpoint(path)? } else { None };
    let mut file = OpenOptions::new()
        .create(true)
        .write(true)
        .truncate(!resume)
        .open(path)
        .map_err(io_err)?;
    file.seek(SeekFrom::End(0)).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    let summary = scan(filter, budget, after, |r| {
        let line = serde_json::to_string(r).expect("record serializes");
        writeln!(w, "{line}").map_err(io_err)
    })?;
    w.flush().map_err(io_err)?;
    Ok(summary)
}

/// Runs `f` on a pool of `threads` workers (0 = rayon default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::precondition(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Least `|D|` with `D = A mod B`, `D != -8`, every prime of `splus` (and
/// `p`) split, every prime of `sminus` inert, and `lambda_p = 1`.
pub fn search_d0(
    p: u64,
    ab: ModClass,
    splus: &[u64],
    sminus: &[u64],
    budget: &Budget,
) -> Result<FundamentalDiscriminant> {
    let mut split = distinct(splus);
    if !split.contains(&p) {
        split.push(p);
    }
    if p == 2 || !numth::is_prime(p) {
        return Err(Error::precondition(format!("{p} is not an odd prime")));
    }
    let (modulus, classes) = residue_classes(ab, &split, sminus)?;
    for k in 3..=budget.search_max_abs_d {
        let dv = -(k as i64);
        if dv == -8 || !classes.contains(&(dv.rem_euclid(modulus as i64) as u64)) {
            continue;
        }
        if !is_fundamental(dv) {
            continue;
        }
        let d = FundamentalDiscriminant::new(dv)?;
        if classify_lambda_with(d, p, budget)?.value == LambdaValue::One {
            return Ok(d);
        }
    }
    Err(Error::NotFoundWithinBudget(budget.search_max_abs_d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SuiteName {
    Lemma23Sweep,
    BoundSweep,
    Tables,
    CrossCriterion,
}

impl SuiteName {
    pub const ALL: [SuiteName; 4] = [
        SuiteName::Lemma23Sweep,
        SuiteName::BoundSweep,
        SuiteName::Tables,
        SuiteName::CrossCriterion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteName::Lemma23Sweep => "lemma23",
            SuiteName::BoundSweep => "bound",
            SuiteName::Tables => "tables",
            SuiteName::CrossCriterion => "cross",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        SuiteName::ALL.into_iter().find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteOptions {
    /// Upper end (exclusive) of the prime range for `Lemma23Sweep`.
    pub lemma_p_max: u64,
    pub bound_x: u64,
    pub cross_x: u64,
    pub cross_primes: Vec<u64>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            lemma_p_max: 1097,
            bound_x: 10_000,
            cross_x: 3000,
            cross_primes: vec![3, 5, 7, 11, 13],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub passed: bool,
    pub checked: u64,
    pub skipped: u64,
    pub counterexample: Option<String>,
    pub note: String,
}

pub fn verify_suite(name: SuiteName, opts: &SuiteOptions, budget: &Budget) -> SuiteReport {
    match name {
        SuiteName::Lemma23Sweep => lemma23_sweep(opts.lemma_p_max, budget),
        SuiteName::BoundSweep => bound_sweep(opts.bound_x),
        SuiteName::Tables => tables_suite(budget).0,
        SuiteName::CrossCriterion => cross_criterion(opts.cross_x, &opts.cross_primes, budget),
    }
}

fn report(
    suite: &'static str,
    checked: u64,
    skipped: u64,
    counterexample: Option<String>,
    note: impl Into<String>,
) -> SuiteReport {
    SuiteReport {
        suite,
        passed: counterexample.is_none(),
        checked,
        skipped,
        counterexample,
        note: note.into(),
    }
}

/// `p` does not divide the class numbers of the fields of `sqrt(1-p)` and
/// `sqrt(4-p)`, for every prime `3 < p < p_max`.
fn lemma23_sweep(p_max: u64, budget: &Budget) -> SuiteReport {
    let primes: Vec<u64> = numth::primes_up_to(p_max.saturating_sub(1))
        .into_iter()
        .filter(|&p| p > 3)
        .collect();
    let bad: Vec<String> = primes
        .par_iter()
        .flat_map_iter(|&p| {
            [1i64, 4].into_iter().filter_map(move |c| {
                let t = c - p as i64;
                let res = fundamental_from_radicand(t)
                    .and_then(|(d, _)| quadforms::class_number(d, budget).map(|h| (d, h)));
                match res {
                    Ok((_, h)) if h % p != 0 => None,
                    Ok((d, h)) => Some(format!("p={p}: h({d}) = {h}")),
                    Err(e) => Some(format!("p={p}, radicand {t}: {e}")),
                }
            })
        })
        .collect();
    report(
        "lemma23",
        primes.len() as u64,
        0,
        bad.into_iter().next(),
        format!("primes 3 < p < {p_max}"),
    )
}

/// `h(D)` never exceeds the analytic bound for `4 < |D| < x`.
fn bound_sweep(x: u64) -> SuiteReport {
    let ds: Vec<FundamentalDiscriminant> = enumerate_fundamental(x)
        .into_iter()
        .filter(|d| d.abs() > 4)
        .collect();
    let budget = Budget::default();
    let bad = ds
        .par_iter()
        .filter_map(|&d| {
            let h = match quadforms::class_number(d, &budget) {
                Ok(h) => h,
                Err(e) => return Some(format!("D={d}: {e}")),
            };
            let bound = analytic_h_bound(d).ok()?;
            let ok = bound.to_f64().map_or(false, |b| (h as f64) <= b)
                && crate::numth::Rational::from_integer(h.into()) <= bound;
            (!ok).then(|| format!("D={d}: h={h} exceeds {}", bound.to_f64().unwrap_or(f64::NAN)))
        })
        .min();
    report("bound", ds.len() as u64, 0, bad, format!("fundamental 4 < |D| < {x}"))
}

/// Recomputes every golden table row; rows over the class-group budget are
/// skipped.
pub fn tables_suite(budget: &Budget) -> (SuiteReport, Vec<RowResult>) {
    let rows: Vec<RowResult> = GOLDEN
        .par_iter()
        .map(|g| {
            let x1 = tables::table_x1(g.p).expect("tabulated prime");
            tables::compute_row(g.p, x1, g.n, budget).map_err(|e| (g.p, g.n, e.to_string()))
        })
        .collect();
    let mut checked = 0;
    let mut skipped = 0;
    let mut bad = None;
    for (g, r) in GOLDEN.iter().zip(&rows) {
        match r {
            Ok(r) if r.matches(g) => checked += 1,
            Ok(r) => {
                bad.get_or_insert(format!(
                    "p={} n={}: got field {} factors {:?}, expected {} {:?}",
                    g.p, g.n, r.field, r.factors, g.field, g.factors
                ));
            }
            Err((_, _, e)) if e.starts_with("budget exceeded") => skipped += 1,
            Err((p, n, e)) => {
                bad.get_or_insert(format!("p={p} n={n}: {e}"));
            }
        }
    }
    let note = format!("{checked} of {} rows matched", GOLDEN.len());
    (report("tables", checked, skipped, bad, note), rows)
}

/// Outcome of comparing the two criteria on one `(D, p)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CrossOutcome {
    Agree(LambdaValue),
    /// `p` divides the order of its class, so the generator test is out.
    NotApplicable,
    Disagree { sands: LambdaValue, lvalue: LambdaValue },
}

pub fn cross_check(d: FundamentalDiscriminant, p: u64, budget: &Budget) -> Result<CrossOutcome> {
    let ctx = split_context_with(d, p, budget)?;
    if ctx.s % p == 0 {
        return Ok(CrossOutcome::NotApplicable);
    }
    let h = quadforms::class_number(d, budget)?;
    let s = sands_test(&ctx, h)?.value;
    let l = lvalue_test_with(d, p, budget)?.value;
    Ok(if s == l {
        CrossOutcome::Agree(s)
    } else {
        CrossOutcome::Disagree {
            sands: s,
            lvalue: l,
        }
    })
}

/// Budget for the cross-criterion sweep: generators of high class powers
/// are large.
pub fn cross_budget(budget: &Budget) -> Budget {
    budget.with_generator_max_bits(budget.generator_max_bits.max(1024))
}

fn cross_criterion(x: u64, primes: &[u64], budget: &Budget) -> SuiteReport {
    let budget = cross_budget(budget);
    let pairs: Vec<(FundamentalDiscriminant, u64)> = enumerate_fundamental(x)
        .into_iter()
        .flat_map(|d| {
            primes
                .iter()
                .filter(move |&&p| kronecker(d.value(), p as i64) == 1)
                .map(move |&p| (d, p))
        })
        .collect();
    let outcomes: Vec<(FundamentalDiscriminant, u64, Result<CrossOutcome>)> = pairs
        .par_iter()
        .map(|&(d, p)| (d, p, cross_check(d, p, &budget)))
        .collect();
    let mut checked = 0;
    let mut skipped = 0;
    let mut bad = None;
    for (d, p, o) in outcomes {
        match o {
            Ok(CrossOutcome::Agree(_)) => checked += 1,
            Ok(CrossOutcome::NotApplicable) => skipped += 1,
            Ok(CrossOutcome::Disagree { sands, lvalue }) => {
                bad.get_or_insert(format!("D={d}, p={p}: sands {sands}, lvalue {lvalue}"));
            }
            Err(e) => {
                bad.get_or_insert(format!("D={d}, p={p}: {e}"));
            }
        }
    }
    report(
        "cross",
        checked,
        skipped,
        bad,
        format!("split p in {primes:?}, fundamental |D| < {x}, p not dividing s"),
    )
}

/// `Method` of a record, parsed back.
pub fn record_method(r: &ScanRecord) -> Option<Method> {
    match r.method.as_deref() {
        Some("sands") => Some(Method::Sands),
        Some("lvalue") => Some(Method::LValue),
        Some("both") => Some(Method::Both),
        _ => None,
    }
}
