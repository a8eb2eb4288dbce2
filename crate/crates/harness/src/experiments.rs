//! The six experiments and their per-replica records.

use std::collections::{BTreeMap, BTreeSet};

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value as Json};

use fcoupling::bad_events::{bad_event_report, check_b1, check_b2, low_degree_vertices};
use fcoupling::combinatorics::binomial;
use fcoupling::coupling::{extra_copies, extra_low_degree_incidences, run_static_coupling, CouplingConfig};
use fcoupling::factor::{find_f_factor, find_perfect_matching, verify_factor, Search};
use fcoupling::params::{p0, pi_prime, GMode, ParamSet};
use fcoupling::process::{
    couple_fh_processes, couple_gh_processes, hitting_time_tg, hitting_time_th, random_fgraph,
    verify_embedding_chain, FProcess, UProcess,
};
use fcoupling::{FCopy, Pattern, VertexId};

use crate::seed::{replica_rng, replica_seed, splitmix64};
use crate::stats::{chi_square_binomial, describe, proportion, wilson, Z95};
use crate::table::{col, Column, Table, Value};
use crate::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Analyze,
    StaticCouple,
    Window,
    ProcessCouple,
    Factor,
    LemmaLowdeg,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub pattern: Pattern,
    pub ns: Vec<usize>,
    pub replicas: usize,
    pub seed: u64,
    pub delta: f64,
    pub epsilon: f64,
    pub g_mode: GMode,
    pub coupling: CouplingConfig,
    /// Node budget of the B2 search.
    pub b2_budget: u64,
    /// Node budget of factor and matching searches.
    pub factor_budget: u64,
    /// Overrides `π+` where an experiment takes a single `π`.
    pub pi: Option<f64>,
    /// Overrides the `p` paired with `π`.
    pub p: Option<f64>,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, pattern: Pattern, ns: Vec<usize>) -> Self {
        Self {
            experiment,
            pattern,
            ns,
            replicas: 100,
            seed: 0,
            delta: fcoupling::params::DEFAULT_DELTA,
            epsilon: fcoupling::params::DEFAULT_EPSILON,
            g_mode: GMode::Default,
            coupling: CouplingConfig::default(),
            b2_budget: fcoupling::bad_events::DEFAULT_NODE_BUDGET,
            factor_budget: fcoupling::factor::DEFAULT_FACTOR_BUDGET,
            pi: None,
            p: None,
        }
    }

    fn validate(&self) -> Result<()> {
        let r = self.pattern.r();
        if self.ns.is_empty() {
            return Err(HarnessError::Invalid("no values of n given".into()));
        }
        if self.replicas == 0 && self.experiment != Experiment::Analyze {
            return Err(HarnessError::Invalid("replicas must be at least 1".into()));
        }
        if let Some(&n) = self.ns.iter().find(|&&n| n < r) {
            return Err(HarnessError::Invalid(format!("n = {n} is below the pattern order {r}")));
        }
        for (name, x) in [("pi", self.pi), ("p", self.p)] {
            if x.is_some_and(|x| !(0.0..=1.0).contains(&x)) {
                return Err(HarnessError::Invalid(format!("{name} must lie in [0, 1]")));
            }
        }
        if self.delta.is_nan() || self.epsilon.is_nan() || self.delta <= 0.0 || self.epsilon <= 0.0 {
            return Err(HarnessError::Invalid("delta and epsilon must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub table: Table,
    pub summary: Json,
    /// Replicas whose answer hinged on an exhausted search budget.
    pub inconclusive: usize,
}

const LEAD: [Column; 4] = [
    col("n", "number of vertices"),
    col("replica", "replica index"),
    col("seed", "seed of the replica generator"),
    col("status", "ok, or budget-exceeded if the run aborted on a search budget"),
];

const STATIC: [Column; 14] = [
    col("h_edges", "F-edges in H"),
    col("g_edges", "u-edges in G"),
    col("failed", "coupling failed (some copy of H is not in G)"),
    col("h_in_g", "every copy of H lies in G"),
    col("failure_steps", "steps that included a copy against a false A_j"),
    col("small_pi", "steps with pi_j < pi"),
    col("tested_yes", "A_j tests answered yes"),
    col("tested_no", "A_j tests answered no"),
    col("exact_steps", "steps resolved beyond the Harris bounds"),
    col("approx_steps", "steps that used an estimated pi_j"),
    col("b1", "B1(pi) holds for H"),
    col("b2", "B2 holds for H; evaluated only for failed runs without B1, empty if not evaluated or inconclusive"),
    col("b2_status", "present, absent, inconclusive or skipped"),
    col("failure_explained", "failed run lies in B1 or B2; empty for non-failed or inconclusive runs"),
];

const WINDOW: [Column; 8] = [
    col("t_h", "hitting time of the F-graph process"),
    col("t_e", "hitting time of the r-uniform process"),
    col("in_window", "t_h within [0.8 M pi-, 1.2 M pi+]"),
    col("t_h_eq_t_e", "the two hitting times agree"),
    col("agreement", "length of the shared unlabeled prefix"),
    col("shared", "copies of the binomial F-graph sample"),
    col("horizon_reached", "shared prefix reaches t_h + floor(g n)"),
    col("resamples", "resamples forced by repeated vertex sets"),
];

const PROCESS: [Column; 20] = [
    col("t_g", "hitting time of the u-graph process"),
    col("t_h", "hitting time of the F-graph process"),
    col("h_len", "F-edges of the static sample"),
    col("size_e", "copies of H at t_h missing from G at t_g"),
    col("size_f", "copies of H at t_h with a partner arriving within the horizon"),
    col("e_f_empty", "both sets are empty"),
    col("chain_holds", "E is contained in F"),
    col("chain_verified", "independent recomputation of the embedding chain"),
    col("failed", "the static coupling failed"),
    col("approx_steps", "static steps that used an estimated pi_j"),
    col("dummies", "dummy u-edges created for partner pairs"),
    col("b1", "B1(pi+) holds for the static H"),
    col("b2", "B2 holds for the static H; empty if inconclusive"),
    col("b3", "B3 holds for the static H"),
    col("b4", "B4 holds for the static H"),
    col("b5", "B5 holds for the static H"),
    col("matching", "perfect matching in the vertex sets of H at t_h minus F; empty unless r divides n or if inconclusive"),
    col("factor", "F-factor in G at t_g; empty unless r divides n or if inconclusive"),
    col("premise", "matching found and chain holds"),
    col("implication_ok", "premise implies the matching's label copies form an F-factor of G at t_g"),
];

const FACTOR: [Column; 4] = [
    col("t_g", "hitting time of the u-graph process"),
    col("factor", "F-factor in G at t_g; empty if inconclusive or r does not divide n"),
    col("t_h", "hitting time of the F-graph process"),
    col("matching", "perfect matching in the hat view at t_h; empty if inconclusive or r does not divide n"),
];

const LOWDEG: [Column; 6] = [
    col("failed", "the static coupling failed"),
    col("low_degree", "vertices of H with degree at most 7g"),
    col("extra_copies", "copies of F in G whose F-edge is absent from H"),
    col("incidences", "(low-degree vertex, extra copy) incidences"),
    col("any", "at least one incidence"),
    col("approx_steps", "static steps that used an estimated pi_j"),
];

const PRESENCE: [Column; 3] = [
    col("present_sets", "vertex sets carrying at least one F-edge"),
    col("total_sets", "r-subsets of the vertex set"),
    col("freq", "present_sets / total_sets"),
];

fn columns(exp: Experiment) -> Vec<Column> {
    let body: &[Column] = match exp {
        Experiment::Analyze => &PRESENCE,
        Experiment::StaticCouple => &STATIC,
        Experiment::Window => &WINDOW,
        Experiment::ProcessCouple => &PROCESS,
        Experiment::Factor => &FACTOR,
        Experiment::LemmaLowdeg => &LOWDEG,
    };
    LEAD.iter().chain(body).copied().collect()
}

/// Everything a replica needs besides its generator.
struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    params: ParamSet<f64>,
    m: u128,
    pi: f64,
    p: f64,
}

struct Row {
    values: Vec<Value>,
    inconclusive: bool,
}

impl Row {
    fn ok(values: Vec<Value>, inconclusive: bool) -> Self {
        Self { values, inconclusive }
    }
}

fn search_flag<T>(s: &Search<T>, inconclusive: &mut bool) -> Value {
    if matches!(s, Search::Inconclusive { .. }) {
        *inconclusive = true;
    }
    s.flag().into()
}

fn static_row(ctx: &Ctx, rng: &mut ChaCha8Rng) -> fcoupling::Result<Row> {
    let pat = &ctx.cfg.pattern;
    let t = run_static_coupling(pat, ctx.params.n, ctx.p, ctx.pi, &ctx.cfg.coupling, rng)?;
    let b1 = check_b1(&t.h, ctx.m, ctx.pi).flag;
    let (b2, status) = if t.failed && !b1 {
        let b = check_b2(&t.h, ctx.cfg.b2_budget)?.flag();
        (b, b.map_or("inconclusive", |x| if x { "present" } else { "absent" }))
    } else {
        (None, "skipped")
    };
    let explained = if !t.failed { None } else if b1 { Some(true) } else { b2 };
    let inconclusive = t.failed && !b1 && b2.is_none();
    Ok(Row::ok(
        vec![
            t.h.len().into(),
            t.g.edge_count().into(),
            t.failed.into(),
            t.h_within_g().into(),
            t.failure_steps.into(),
            t.small_pi.len().into(),
            t.tested_yes.into(),
            t.tested_no.into(),
            t.exact_evaluations.into(),
            t.approximate_steps.into(),
            b1.into(),
            b2.into(),
            Value::Text(status.into()),
            explained.into(),
        ],
        inconclusive,
    ))
}

fn window_bounds(params: &ParamSet<f64>) -> fcoupling::Result<(f64, f64)> {
    let (lo, hi) = params.window_edge_counts()?;
    Ok((0.8 * lo, 1.2 * hi))
}

fn window_row(ctx: &Ctx, rng: &mut ChaCha8Rng) -> fcoupling::Result<Row> {
    let c = couple_fh_processes(&ctx.params, rng)?;
    let (lo, hi) = window_bounds(&ctx.params)?;
    let t = c.t_h as f64;
    Ok(Row::ok(
        vec![
            c.t_h.into(),
            c.t_e.into(),
            (lo <= t && t <= hi).into(),
            (c.t_h == c.t_e).into(),
            c.agreement.into(),
            c.shared.into(),
            c.horizon_reached.into(),
            c.resamples.into(),
        ],
        false,
    ))
}

fn process_row(ctx: &Ctx, rng: &mut ChaCha8Rng) -> fcoupling::Result<Row> {
    let (pat, n) = (&ctx.cfg.pattern, ctx.params.n);
    let res = couple_gh_processes(&ctx.params, &ctx.cfg.coupling, rng)?;
    let verified = verify_embedding_chain(&res)?;
    let g = ctx.params.g();
    let bad = bad_event_report(&res.trace.h, ctx.m, ctx.params.pi_plus()?, g, ctx.cfg.b2_budget)?;
    let mut inconclusive = bad.b2.flag().is_none();

    let (mut matching, mut factor, mut premise, mut implication) =
        (Value::Missing, Value::Missing, Value::Missing, Value::Missing);
    if n % pat.r() == 0 {
        let set_f: BTreeSet<&FCopy> = res.set_f.iter().collect();
        let kept: Vec<&FCopy> = res.h_at_hit().iter().filter(|c| !set_f.contains(c)).collect();
        let by_set: BTreeMap<&[VertexId], &FCopy> = kept.iter().map(|c| (c.vertex_set(), *c)).collect();
        let sets: Vec<Vec<VertexId>> = by_set.keys().map(|s| s.to_vec()).collect();
        let found = find_perfect_matching(n, pat.r(), &sets, ctx.cfg.factor_budget);
        matching = search_flag(&found, &mut inconclusive);
        let g_hit = res.g_at_hit()?;
        factor = search_flag(&find_f_factor(&g_hit, pat, ctx.cfg.factor_budget)?, &mut inconclusive);
        if let Search::Found(m) = &found {
            premise = res.chain_holds.into();
            let labels: Vec<FCopy> = m.iter().map(|s| by_set[s.as_slice()].clone()).collect();
            implication = (!res.chain_holds || verify_factor(&g_hit, pat, &labels)).into();
        } else if found.flag() == Some(false) {
            premise = false.into();
            implication = true.into();
        }
    }
    Ok(Row::ok(
        vec![
            res.t_g.into(),
            res.t_h.into(),
            res.h_len.into(),
            res.set_e.len().into(),
            res.set_f.len().into(),
            (res.set_e.is_empty() && res.set_f.is_empty()).into(),
            res.chain_holds.into(),
            verified.into(),
            res.failed.into(),
            res.approximate_steps.into(),
            res.dummies.len().into(),
            bad.b1.flag.into(),
            bad.b2.flag().into(),
            bad.b3.into(),
            bad.b4.into(),
            bad.b5.into(),
            matching,
            factor,
            premise,
            implication,
        ],
        inconclusive,
    ))
}

fn factor_row(ctx: &Ctx, rng: &mut ChaCha8Rng) -> fcoupling::Result<Row> {
    let (pat, n) = (&ctx.cfg.pattern, ctx.params.n);
    let mut inconclusive = false;
    let gp = UProcess::random(n, pat.u(), rng)?;
    let t_g = hitting_time_tg(&gp, pat)?;
    let factor = search_flag(&find_f_factor(&gp.prefix(t_g)?, pat, ctx.cfg.factor_budget)?, &mut inconclusive);
    let hp = FProcess::until_covered(pat, n, 0, rng)?;
    let t_h = hitting_time_th(&hp)?;
    let hat = hp.forget_labels();
    let matching = search_flag(&find_perfect_matching(n, pat.r(), &hat[..t_h], ctx.cfg.factor_budget), &mut inconclusive);
    let (factor, matching) = if n % pat.r() == 0 { (factor, matching) } else { (Value::Missing, Value::Missing) };
    Ok(Row::ok(vec![t_g.into(), factor, t_h.into(), matching], inconclusive))
}

fn lowdeg_row(ctx: &Ctx, rng: &mut ChaCha8Rng) -> fcoupling::Result<Row> {
    let pat = &ctx.cfg.pattern;
    let t = run_static_coupling(pat, ctx.params.n, ctx.p, ctx.pi, &ctx.cfg.coupling, rng)?;
    let g = ctx.params.g();
    let inc = extra_low_degree_incidences(&t, pat, g)?;
    Ok(Row::ok(
        vec![
            t.failed.into(),
            low_degree_vertices(&t.h, g).len().into(),
            extra_copies(&t, pat)?.len().into(),
            inc.into(),
            (inc > 0).into(),
            t.approximate_steps.into(),
        ],
        false,
    ))
}

fn presence_row(ctx: &Ctx, rng: &mut ChaCha8Rng) -> fcoupling::Result<Row> {
    let pat = &ctx.cfg.pattern;
    let h = random_fgraph(pat, ctx.params.n, ctx.pi, rng)?;
    let present = h.forget_labels().distinct_count();
    let total = binomial(ctx.params.n as u64, pat.r() as u64).ok_or(fcoupling::Error::Overflow("C(n, r)"))?;
    Ok(Row::ok(vec![present.into(), (total as u64).into(), (present as f64 / total as f64).into()], false))
}

fn params_json(params: &ParamSet<f64>) -> Json {
    let n = params.n;
    let pat = &params.pattern;
    let ok = |r: fcoupling::Result<f64>| r.map_or(Json::Null, |x| json!(x));
    let pm = params.pi_pm().ok();
    json!({
        "M": params.m().ok().map(|m| m.to_string()),
        "N": params.big_n().ok().map(|m| m.to_string()),
        "g": params.g(),
        "pi_minus": pm.map(|x| x.0),
        "pi_plus": ok(params.pi_plus()),
        "p_minus": pm.map(|x| params.p_of_pi(x.0)),
        "p_plus": ok(params.p_plus()),
        "p0": p0::<f64>(n, pat),
        "pi_prime_at_pi_plus": params.pi_plus().ok().map(|pi| pi_prime(pi, pat)),
        "window_edge_counts": params.window_edge_counts().ok(),
    })
}

/// Means, medians and Wilson intervals of every column for one `n`.
fn column_summaries(table: &Table, rows: &[&Vec<Value>], warnings: &mut Vec<String>, n: usize) -> Json {
    let mut out = serde_json::Map::new();
    if rows.is_empty() {
        return Json::Object(out);
    }
    for (i, c) in table.columns.iter().enumerate().skip(LEAD.len()) {
        let vals: Vec<&Value> = rows.iter().map(|r| &r[i]).filter(|v| **v != Value::Missing).collect();
        if vals.iter().all(|v| v.as_bool().is_some()) {
            let flags: Vec<bool> = vals.iter().filter_map(|v| v.as_bool()).collect();
            match proportion(&flags) {
                Some(p) => {
                    out.insert(c.name.into(), json!(p));
                }
                None => warnings.push(format!("column {} is empty at n = {n}; omitted", c.name)),
            }
        } else if let Some(xs) = vals.iter().map(|v| v.as_f64()).collect::<Option<Vec<f64>>>() {
            if let Some(d) = describe(&xs) {
                out.insert(c.name.into(), json!(d));
            }
        }
    }
    Json::Object(out)
}

fn floats(rows: &[&Vec<Value>], i: usize) -> Vec<f64> {
    rows.iter().filter_map(|r| r[i].as_f64()).collect()
}

fn flags_where(table: &Table, rows: &[&Vec<Value>], col: &str, cond: &str, want: bool) -> Vec<bool> {
    let (i, j) = (table.index(col).expect("column"), table.index(cond).expect("column"));
    rows.iter().filter(|r| r[j].as_bool() == Some(want)).filter_map(|r| r[i].as_bool()).collect()
}

/// Experiment-specific checks for one `n`.
fn checks(ctx: &Ctx, table: &Table, rows: &[&Vec<Value>]) -> Json {
    let ix = |c: &str| table.index(c).expect("column");
    let m = ctx.m;
    match ctx.cfg.experiment {
        Experiment::StaticCouple => {
            let big_n = ctx.params.big_n().unwrap_or(0);
            let counts = |c: &str| -> Vec<u64> { floats(rows, ix(c)).into_iter().map(|x| x as u64).collect() };
            let fit_h = u64::try_from(m).ok().and_then(|m| chi_square_binomial(&counts("h_edges"), m, ctx.pi));
            let fit_g = u64::try_from(big_n).ok().and_then(|n| chi_square_binomial(&counts("g_edges"), n, ctx.p));
            let failed_rows: Vec<&Vec<Value>> =
                rows.iter().copied().filter(|r| r[ix("failed")].as_bool() == Some(true)).collect();
            let b2_inconclusive = failed_rows.iter().filter(|r| r[ix("b2_status")] == Value::Text("inconclusive".into())).count();
            json!({
                "pi": ctx.pi,
                "p": ctx.p,
                "expected_h_edges": m as f64 * ctx.pi,
                "expected_g_edges": big_n as f64 * ctx.p,
                "h_edges_fit": fit_h,
                "g_edges_fit": fit_g,
                "h_in_g_among_non_failed": proportion(&flags_where(table, rows, "h_in_g", "failed", false)),
                "explained_among_failed": proportion(&flags_where(table, rows, "failure_explained", "failed", true)),
                "failed_with_b1": failed_rows.iter().filter(|r| r[ix("b1")].as_bool() == Some(true)).count(),
                "failed_with_b2_only": failed_rows.iter().filter(|r| r[ix("b1")].as_bool() == Some(false) && r[ix("b2")].as_bool() == Some(true)).count(),
                "b2_inconclusive": b2_inconclusive,
                "b2_inconclusive_rate": if failed_rows.is_empty() { 0.0 } else { b2_inconclusive as f64 / failed_rows.len() as f64 },
            })
        }
        Experiment::Window => {
            let bounds = window_bounds(&ctx.params).ok();
            json!({ "window": bounds })
        }
        Experiment::ProcessCouple => json!({
            "chain_among_non_failed": proportion(&flags_where(table, rows, "chain_holds", "failed", false)),
            "empty_among_non_failed": proportion(&flags_where(table, rows, "e_f_empty", "failed", false)),
            "implication_violations": rows.iter().filter(|r| r[ix("implication_ok")].as_bool() == Some(false)).count(),
            "chain_recomputation_mismatches": rows.iter().filter(|r| r[ix("chain_holds")] != r[ix("chain_verified")]).count(),
        }),
        Experiment::LemmaLowdeg => json!({ "pi": ctx.pi, "p": ctx.p }),
        Experiment::Factor => json!({}),
        Experiment::Analyze => {
            let present: f64 = floats(rows, ix("present_sets")).iter().sum();
            let total: f64 = floats(rows, ix("total_sets")).iter().sum();
            if total == 0.0 {
                return json!({});
            }
            let target = pi_prime(ctx.pi, &ctx.cfg.pattern);
            let freq = present / total;
            let se = (target * (1.0 - target) / total).sqrt();
            let (lo, hi) = wilson(present as u64, total as u64, Z95);
            json!({
                "pi": ctx.pi,
                "pi_prime": target,
                "pooled_frequency": freq,
                "wilson_low": lo,
                "wilson_high": hi,
                "standard_error": se,
                "z": if se > 0.0 { (freq - target) / se } else { 0.0 },
            })
        }
    }
}

type RowFn = fn(&Ctx, &mut ChaCha8Rng) -> fcoupling::Result<Row>;

fn row_fn(exp: Experiment) -> RowFn {
    match exp {
        Experiment::Analyze => presence_row,
        Experiment::StaticCouple => static_row,
        Experiment::Window => window_row,
        Experiment::ProcessCouple => process_row,
        Experiment::Factor => factor_row,
        Experiment::LemmaLowdeg => lowdeg_row,
    }
}

fn context(cfg: &ExperimentConfig, n: usize) -> Result<Ctx<'_>> {
    let params = ParamSet::new(n, cfg.pattern.clone(), cfg.delta, cfg.epsilon, cfg.g_mode)?;
    let m = params.m()?;
    let needs_pi = !matches!(cfg.experiment, Experiment::Analyze | Experiment::Factor);
    let pi = match cfg.pi {
        Some(pi) => pi,
        None if needs_pi => params.pi_plus()?,
        None => 0.0,
    };
    let p = match cfg.p {
        Some(p) => p,
        None if needs_pi => params.p_of_pi(pi).min(1.0),
        None => 0.0,
    };
    if cfg.experiment == Experiment::Window {
        params.pi_pm()?;
    }
    Ok(Ctx { cfg, params, m, pi, p })
}

/// Runs the configured experiment. Replicas run in parallel but rows come
/// back in (n, replica) order, so the output depends only on the config.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let exp = cfg.experiment;
    let mut table = Table::new(&columns(exp));
    let width = table.columns.len();
    let replicas = if exp == Experiment::Analyze && cfg.pi.is_none() { 0 } else { cfg.replicas };
    let mut by_n = Vec::new();
    let mut warnings = Vec::new();
    let mut inconclusive = 0;
    let f = row_fn(exp);

    for &n in &cfg.ns {
        let ctx = context(cfg, n)?;
        let root = splitmix64(cfg.seed ^ n as u64);
        let rows: Vec<fcoupling::Result<Row>> = (0..replicas as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = replica_rng(root, i);
                let lead = vec![n.into(), (i as usize).into(), replica_seed(root, i).into()];
                match f(&ctx, &mut rng) {
                    Ok(row) => {
                        let mut values = lead;
                        values.push(Value::Text("ok".into()));
                        values.extend(row.values);
                        Ok(Row { values, inconclusive: row.inconclusive })
                    }
                    Err(e) if e.is_budget() => {
                        let mut values = lead;
                        values.push(Value::Text("budget-exceeded".into()));
                        values.resize(width, Value::Missing);
                        Ok(Row { values, inconclusive: true })
                    }
                    Err(e) => Err(e),
                }
            })
            .collect();
        let start = table.rows.len();
        for row in rows {
            let row = row?;
            inconclusive += row.inconclusive as usize;
            table.rows.push(row.values);
        }
        let mine: Vec<&Vec<Value>> = table.rows[start..].iter().collect();
        by_n.push(json!({
            "n": n,
            "params": params_json(&ctx.params),
            "metrics": column_summaries(&table, &mine, &mut warnings, n),
            "checks": checks(&ctx, &table, &mine),
        }));
    }

    let niceness = cfg.pattern.niceness();
    let d1 = cfg.pattern.d1();
    let summary = json!({
        "experiment": exp,
        "pattern": cfg.pattern.to_spec(),
        "nice": niceness.nice,
        "niceness": niceness,
        "aut": cfg.pattern.aut(),
        "d1": format!("{d1}"),
        "u": cfg.pattern.u(),
        "r": cfg.pattern.r(),
        "s": cfg.pattern.s(),
        "seed": cfg.seed,
        "replicas": replicas,
        "delta": cfg.delta,
        "epsilon": cfg.epsilon,
        "g_mode": cfg.g_mode.name(),
        "coupling": cfg.coupling,
        "inconclusive": inconclusive,
        "warnings": warnings,
        "by_n": by_n,
    });
    Ok(ExperimentOutput { table, summary, inconclusive })
}
