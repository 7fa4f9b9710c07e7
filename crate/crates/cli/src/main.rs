//! `rihull`: runs the exact engine on a scenario file and prints a JSON report.
//!
//! Exit status is 0 when every assertion holds, 1 when one fails and 2 on
//! usage or parse errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use rihull::bp::bp_check;
use rihull::campaign::{run_campaign, ORACLE_TOLERANCE};
use rihull::embedding::{corollary_check, embedding_constant, l1_plus_linf_norm, lp_integral, verify_embedding_norm};
use rihull::hull::{
    epsilon_zero_eligible, hull_lower_bound, hull_witness, hull_witness_degenerate, hull_witness_power_tail,
    HullInstance,
};
use rihull::mpt::{
    build_decreasing_mpt, build_increasing_mpt, check_mpt, necessity_certificate, realizes, ryff_conditions,
    RyffVerdict,
};
use rihull::oracle::{agrees, bathtub_search, grid_l1_plus_linf, grid_lambda_integral, grid_rearrange, grid_weighted_lp};
use rihull::rearrangement::{equimeasurable, layer_cake_check, rearrangements};
use rihull::scalar::{format_rational, parse_rational, rational_to_f64};
use rihull::scenario::{Scenario, WeightSpec};
use rihull::{Error, ExtScalar, Interval, Rational, StepFunction, WeightedSpace};

#[derive(Parser)]
#[command(name = "rihull", version, about = "Exact rearrangement, embedding and hull computations for step functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Distribution functions and both rearrangements of every function.
    Rearrange(Opts),
    /// L¹+L∞, L^p, Λ^p and weighted L^p norms.
    Norms(Opts),
    /// Ryff conditions and the measure-preserving representation.
    Ryff(Opts),
    /// The embedding constant of L^p(ν) into L¹+L∞(μ).
    Embed(Opts),
    /// Lower bound and near-optimal witnesses for the weighted norm over a hull.
    Hull(Opts),
    /// B_p membership of the weight's rearrangement.
    Bp(Opts),
    /// Randomized property campaign.
    Verify(Opts),
    /// Exact engine against the grid oracle.
    OracleDiff(Opts),
}

#[derive(Args, Clone, Default)]
struct Opts {
    #[arg(long, value_name = "PATH")]
    scenario: Option<PathBuf>,
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    #[arg(long, value_name = "N")]
    cases: Option<usize>,
    #[arg(long, value_name = "N")]
    grid: Option<usize>,
    /// Writes one CSV of (breakpoint, value) rows per emitted step function.
    #[arg(long, value_name = "DIR")]
    csv: Option<PathBuf>,
    #[arg(long, value_name = "RAT", value_parser = parse_rational_arg)]
    epsilon: Option<Rational>,
    #[arg(long, value_name = "RAT", value_parser = parse_rational_arg)]
    p: Option<Rational>,
}

fn parse_rational_arg(text: &str) -> Result<Rational, String> {
    parse_rational(text).map_err(|e| e.to_string())
}

/// Fatal errors: usage and parse problems exit 2, failed operations exit 1.
enum Fatal {
    Usage(String),
    Failed(String),
}

impl From<Error> for Fatal {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) => Fatal::Usage(e.to_string()),
            _ => Fatal::Failed(e.to_string()),
        }
    }
}

type Run<T> = Result<T, Fatal>;

/// Collects assertion outcomes; the first failure is kept for the report.
#[derive(Default)]
struct Assertions {
    checked: usize,
    first_failure: Option<String>,
}

impl Assertions {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok && self.first_failure.is_none() {
            self.first_failure = Some(what());
        }
    }
}

struct Ctx {
    opts: Opts,
    scenario: Option<Scenario>,
    tables: Vec<(String, StepFunction)>,
    asserts: Assertions,
}

impl Ctx {
    fn scenario(&self) -> Run<&Scenario> {
        self.scenario.as_ref().ok_or_else(|| Fatal::Usage("this command needs --scenario PATH".into()))
    }

    fn p(&self, default: i64) -> Run<Rational> {
        if let Some(p) = &self.opts.p {
            return Ok(p.clone());
        }
        let from_file = match &self.scenario {
            Some(s) => s.p()?,
            None => None,
        };
        Ok(from_file.unwrap_or_else(|| Rational::from_integer(default.into())))
    }

    fn epsilon(&self) -> Run<Rational> {
        if let Some(e) = &self.opts.epsilon {
            return Ok(e.clone());
        }
        let from_file = match &self.scenario {
            Some(s) => s.epsilon()?,
            None => None,
        };
        Ok(from_file.unwrap_or_else(|| Rational::new(1.into(), 10.into())))
    }

    fn table(&mut self, name: String, f: &StepFunction) -> Value {
        self.tables.push((name, f.clone()));
        to_value(f)
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn space_summary(space: &WeightedSpace) -> Value {
    json!({ "density": to_value(space.density()), "total_measure": space.total_measure().to_string() })
}

fn cmd_rearrange(ctx: &mut Ctx) -> Run<Value> {
    let scenario = ctx.scenario()?.clone();
    let space = &scenario.space;
    let mut out = Map::new();
    for (name, f) in &scenario.functions {
        let r = rearrangements(f, space)?;
        let equi = equimeasurable(f, space, &r.f_star, &WeightedSpace::lebesgue(r.f_star.domain().clone()))?;
        ctx.asserts.check(equi, || format!("{name}: f and f* are not equimeasurable"));
        let cake = layer_cake_check(f, space)?;
        ctx.asserts.check(cake, || format!("{name}: layer cake identity fails"));
        out.insert(
            name.clone(),
            json!({
                "mu_f": ctx.table(format!("{name}.mu_f"), &r.mu_f),
                "kappa_f": ctx.table(format!("{name}.kappa_f"), &r.kappa_f),
                "f_star": ctx.table(format!("{name}.f_star"), &r.f_star),
                "f_lowstar": ctx.table(format!("{name}.f_lowstar"), &r.f_lowstar),
                "equimeasurable": equi,
                "layer_cake": cake,
            }),
        );
    }
    Ok(json!({ "space": space_summary(space), "functions": out }))
}

fn cmd_norms(ctx: &mut Ctx) -> Run<Value> {
    let scenario = ctx.scenario()?.clone();
    let p = ctx.p(2)?;
    let space = &scenario.space;
    let mut out = Map::new();
    for (name, f) in &scenario.functions {
        let mut entry = Map::new();
        entry.insert("l1_plus_linf".into(), json!(l1_plus_linf_norm(f, space)?.to_string()));
        entry.insert("lp_integral".into(), to_value(&lp_integral(f, space, &p)?));
        match &scenario.weight {
            Some(WeightSpec::Step(v)) => {
                let instance = HullInstance::new(space.clone(), v.clone(), p.clone())?;
                let r = hull_lower_bound(f, &instance)?;
                ctx.asserts.check(r.holds, || format!("{name}: Λ^p(v_*) exceeds the weighted L^p norm"));
                entry.insert("lambda_integral".into(), to_value(&r.lhs));
                entry.insert("weighted_lp_integral".into(), to_value(&r.rhs));
                entry.insert("lower_bound_holds".into(), json!(r.holds));
            }
            Some(WeightSpec::PowerTail(w)) => {
                let f_star = rearrangements(f, space)?.f_star;
                entry.insert("lambda_integral".into(), to_value(&w.lambda_integral(&f_star, &p)?));
            }
            None => {}
        }
        out.insert(name.clone(), Value::Object(entry));
    }
    Ok(json!({ "p": format_rational(&p), "functions": out }))
}

fn cmd_ryff(ctx: &mut Ctx) -> Run<Value> {
    let scenario = ctx.scenario()?.clone();
    let space = &scenario.space;
    let mut out = Map::new();
    for (name, f) in &scenario.functions {
        let r = rearrangements(f, space)?;
        let verdict = ryff_conditions(f, space)?;
        let mut entry = Map::new();
        entry.insert("verdict".into(), to_value(&verdict));
        match &verdict {
            RyffVerdict::Neither { s } => {
                let certified = necessity_certificate(f, space, s)?;
                ctx.asserts.check(certified, || format!("{name}: f_* reaches the level s = {s}"));
                entry.insert("necessity_certificate".into(), json!(certified));
            }
            _ => {
                let sigma = build_increasing_mpt(f, space)?;
                let valid = check_mpt(&sigma, space);
                ctx.asserts.check(valid.is_ok(), || format!("{name}: sigma is not measure preserving: {valid:?}"));
                let ok = realizes(f, &r.f_lowstar, &sigma, space)?;
                ctx.asserts.check(ok, || format!("{name}: f differs from f_* o sigma"));
                entry.insert("sigma".into(), to_value(&sigma));
                entry.insert("sigma_valid".into(), json!(valid.is_ok()));
                entry.insert("realizes".into(), json!(ok));
            }
        }
        if space.total_measure().is_finite() {
            let sigma = build_decreasing_mpt(f, space)?;
            let valid = check_mpt(&sigma, space).is_ok();
            let ok = realizes(f, &r.f_star, &sigma, space)?;
            ctx.asserts.check(valid && ok, || format!("{name}: f differs from f* o sigma"));
            entry.insert("decreasing_sigma".into(), to_value(&sigma));
            entry.insert("decreasing_realizes".into(), json!(valid && ok));
        }
        entry.insert("f_lowstar".into(), ctx.table(format!("{name}.f_lowstar"), &r.f_lowstar));
        out.insert(name.clone(), Value::Object(entry));
    }
    Ok(json!({ "functions": out }))
}

fn cmd_embed(ctx: &mut Ctx) -> Run<Value> {
    let scenario = ctx.scenario()?.clone();
    let p = ctx.p(2)?;
    let m = scenario.measures()?;
    let samples: Vec<StepFunction> = scenario.functions.values().cloned().collect();
    let report = verify_embedding_norm(&m, &p, &samples)?;
    ctx.asserts.check(report.all_hold, || "the norm inequality fails on a sample".into());
    if report.extremal.is_some() {
        ctx.asserts.check(report.extremal_attains, || "the extremal candidate falls short of A".into());
    }
    let mut out = to_value(&report);
    let named: Map<String, Value> = scenario.functions.keys().cloned().zip(report.samples.iter().map(to_value)).collect();
    out["samples"] = Value::Object(named);
    if let Some(e) = &report.extremal {
        ctx.table("extremal".into(), e);
    }
    Ok(out)
}

fn cmd_hull(ctx: &mut Ctx) -> Run<Value> {
    let scenario = ctx.scenario()?.clone();
    let p = ctx.p(2)?;
    let eps = ctx.epsilon()?;
    let space = &scenario.space;
    let mut out = Map::new();
    match &scenario.weight {
        Some(WeightSpec::Step(v)) => {
            let instance = HullInstance::new(space.clone(), v.clone(), p.clone())?;
            for (name, g) in &scenario.functions {
                let mut entry = Map::new();
                let lower = hull_lower_bound(g, &instance)?;
                ctx.asserts.check(lower.holds, || format!("{name}: lower bound fails"));
                entry.insert("lower_bound".into(), to_value(&lower));
                let g_star = rearrangements(g, space)?.f_star;
                let mut witnesses = Map::new();
                if instance.vstar_is_zero() {
                    let w = hull_witness_degenerate(&g_star, &instance, &eps)?;
                    ctx.asserts.check(w.passes(), || format!("{name}: zero-set witness fails"));
                    witnesses.insert(format_rational(&eps), to_value(&w));
                    ctx.table(format!("{name}.witness"), &w.f);
                } else {
                    let mut epsilons = vec![eps.clone()];
                    if epsilon_zero_eligible(&instance)? && !num_is_zero(&eps) {
                        epsilons.push(Rational::from_integer(0.into()));
                    }
                    for e in epsilons {
                        let w = hull_witness(&g_star, &instance, &e)?;
                        ctx.asserts.check(w.passes(), || format!("{name}: witness fails at epsilon = {e}"));
                        ctx.table(format!("{name}.witness_eps_{}", format_rational(&e).replace('/', "_")), &w.f);
                        witnesses.insert(format_rational(&e), to_value(&w));
                    }
                }
                entry.insert("witnesses".into(), Value::Object(witnesses));
                out.insert(name.clone(), Value::Object(entry));
            }
            Ok(json!({
                "p": format_rational(&p),
                "v_lowstar": ctx.table("v_lowstar".into(), instance.v_lowstar()),
                "epsilon_zero_eligible": epsilon_zero_eligible(&instance)?,
                "functions": out,
            }))
        }
        Some(WeightSpec::PowerTail(w)) => {
            for (name, g) in &scenario.functions {
                let g_star = rearrangements(g, space)?.f_star;
                let r = hull_witness_power_tail(&g_star, space, w, &p, &eps)?;
                ctx.asserts.check(r.witness.passes(), || format!("{name}: tail witness fails"));
                ctx.table(format!("{name}.witness"), &r.witness.f);
                out.insert(name.clone(), to_value(&r));
            }
            Ok(json!({ "p": format_rational(&p), "functions": out }))
        }
        None => Err(Fatal::Usage("hull needs a `weight` in the scenario".into())),
    }
}

fn num_is_zero(q: &Rational) -> bool {
    q.numer() == &0.into()
}

fn cmd_bp(ctx: &mut Ctx) -> Run<Value> {
    let scenario = ctx.scenario()?.clone();
    let p = ctx.p(2)?;
    match &scenario.weight {
        Some(WeightSpec::Step(v)) => {
            let instance = HullInstance::new(scenario.space.clone(), v.clone(), p.clone())?;
            let report = bp_check(&instance.lorentz_weight()?, &p)?;
            let corollary = if report.in_class {
                match corollary_check(&scenario.space, v, &p) {
                    Ok(c) => {
                        ctx.asserts.check(c.identity_holds != Some(false), || "A^p' differs from the L¹+L∞ norm".into());
                        to_value(&c)
                    }
                    Err(e) => json!({ "skipped": e.to_string() }),
                }
            } else {
                Value::Null
            };
            Ok(json!({
                "p": format_rational(&p),
                "v_lowstar": ctx.table("v_lowstar".into(), instance.v_lowstar()),
                "bp": to_value(&report),
                "corollary": corollary,
            }))
        }
        Some(WeightSpec::PowerTail(w)) => Ok(json!({ "p": format_rational(&p), "bp": to_value(&bp_check(w, &p)?) })),
        None => Err(Fatal::Usage("bp needs a `weight` in the scenario".into())),
    }
}

fn cmd_verify(ctx: &mut Ctx) -> Run<Value> {
    let params = ctx.scenario.as_ref().map(|s| s.params.clone()).unwrap_or_default();
    let seed = ctx.opts.seed.or(params.seed).unwrap_or(42);
    let cases = ctx.opts.cases.or(params.cases).unwrap_or(10_000);
    let names: Vec<&str> = params.families.iter().map(String::as_str).collect();
    let report = run_campaign(seed, cases, &names).map_err(|e| Fatal::Usage(e.to_string()))?;
    for f in &report.families {
        if let Some(first) = &f.first_failure {
            ctx.asserts.check(false, || format!("{} case {}: {}", f.family, first.case, first.message));
        } else {
            ctx.asserts.check(true, String::new);
        }
    }
    Ok(to_value(&report))
}

fn relative(exact: f64, grid: f64) -> Value {
    if exact == grid {
        json!(0.0)
    } else {
        json!((exact - grid).abs() / exact.abs().max(grid.abs()))
    }
}

fn cmd_oracle_diff(ctx: &mut Ctx) -> Run<Value> {
    let scenario = ctx.scenario()?.clone();
    let n = ctx.opts.grid.or(scenario.params.grid).unwrap_or(100_000);
    let p = ctx.p(2)?;
    let pf = rational_to_f64(&p);
    let space = &scenario.space;
    let mut out = Map::new();
    for (name, f) in &scenario.functions {
        let mut rows = Vec::new();
        let mut compare = |what: String, exact: f64, grid: f64, asserts: &mut Assertions| {
            let ok = agrees(exact, grid, ORACLE_TOLERANCE);
            asserts.check(ok, || format!("{name}: {what}: exact {exact} vs grid {grid}"));
            rows.push(json!({ "quantity": what, "exact": exact, "grid": grid, "relative": relative(exact, grid) }));
        };
        let r = rearrangements(f, space)?;
        let grid = grid_rearrange(f, space, n)?;
        for (piece, value) in r.f_star.pieces() {
            let a = rational_to_f64(piece.lower().expect("starts at 0"));
            let t = piece.upper().map_or(a + 1.0, |b| 0.5 * (a + rational_to_f64(b)));
            compare(format!("f*({t})"), value.to_f64(), grid.eval(t), &mut ctx.asserts);
        }
        let exact = l1_plus_linf_norm(f, space)?.to_f64();
        compare("l1_plus_linf".into(), exact, grid_l1_plus_linf(f, space, n)?, &mut ctx.asserts);
        if let Some(v) = scenario.step_weight() {
            let instance = HullInstance::new(space.clone(), v.clone(), p.clone())?;
            let lower = hull_lower_bound(f, &instance)?;
            let weight = lorentz_step(&instance, space)?;
            let lambda = grid_lambda_integral(f, space, &weight, pf, n)?;
            compare("lambda_integral".into(), lower.lhs.to_f64(), lambda, &mut ctx.asserts);
            let lp = grid_weighted_lp(f, space, v, pf, n)?;
            compare("weighted_lp_integral".into(), lower.rhs.to_f64(), lp, &mut ctx.asserts);
        }
        out.insert(name.clone(), Value::Array(rows));
    }
    let mut report = json!({ "grid": n, "p": format_rational(&p), "tolerance": ORACLE_TOLERANCE, "functions": out });
    if let Ok(m) = scenario.measures() {
        let exact = embedding_constant(&m, &p)?.a.to_f64();
        let grid = bathtub_search(&m, pf, n)?;
        let ok = agrees(exact, grid, ORACLE_TOLERANCE);
        ctx.asserts.check(ok, || format!("embedding constant: exact {exact} vs grid {grid}"));
        report["embedding_constant"] = json!({ "exact": exact, "grid": grid, "relative": relative(exact, grid) });
    }
    Ok(report)
}

/// `v_*` on `(0, μ(R))`, zero beyond.
fn lorentz_step(instance: &HullInstance, space: &WeightedSpace) -> Run<StepFunction> {
    Ok(match space.total_measure() {
        ExtScalar::Finite(m) => instance
            .v_lowstar()
            .restrict(&Interval::bounded(Rational::from_integer(0.into()), m)?)?
            .extend_to(&Interval::half_line(), ExtScalar::Finite(Rational::from_integer(0.into())))?,
        ExtScalar::Infinite => instance.v_lowstar().clone(),
    })
}

fn write_csv(dir: &Path, tables: &[(String, StepFunction)]) -> Run<()> {
    let io = |e: std::io::Error| Fatal::Failed(format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    for (name, f) in tables {
        let mut text = String::from("x,value\n");
        for (piece, value) in f.pieces() {
            let x = piece.lower().map_or_else(|| "-inf".to_string(), format_rational);
            text.push_str(&format!("{x},{value}\n"));
        }
        fs::write(dir.join(format!("{name}.csv")), text).map_err(io)?;
    }
    Ok(())
}

fn load(path: &Path) -> Run<Scenario> {
    let text = fs::read_to_string(path).map_err(|e| Fatal::Usage(format!("{}: {e}", path.display())))?;
    Scenario::from_json(&text).map_err(|e| Fatal::Usage(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Run<(Value, bool)> {
    let (name, opts, handler): (&str, Opts, fn(&mut Ctx) -> Run<Value>) = match cli.command {
        Command::Rearrange(o) => ("rearrange", o, cmd_rearrange),
        Command::Norms(o) => ("norms", o, cmd_norms),
        Command::Ryff(o) => ("ryff", o, cmd_ryff),
        Command::Embed(o) => ("embed", o, cmd_embed),
        Command::Hull(o) => ("hull", o, cmd_hull),
        Command::Bp(o) => ("bp", o, cmd_bp),
        Command::Verify(o) => ("verify", o, cmd_verify),
        Command::OracleDiff(o) => ("oracle-diff", o, cmd_oracle_diff),
    };
    let scenario = opts.scenario.as_deref().map(load).transpose()?;
    let mut ctx = Ctx { opts, scenario, tables: Vec::new(), asserts: Assertions::default() };
    let result = handler(&mut ctx)?;
    if let Some(dir) = &ctx.opts.csv {
        write_csv(dir, &ctx.tables)?;
    }
    let passed = ctx.asserts.first_failure.is_none();
    let report = json!({
        "command": name,
        "assertions": ctx.asserts.checked,
        "passed": passed,
        "first_failure": ctx.asserts.first_failure,
        "result": result,
    });
    Ok((report, passed))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((report, passed)) => {
            let text = serde_json::to_string_pretty(&report).expect("reports serialize");
            // A closed pipe is not an error of the computation.
            let _ = writeln!(std::io::stdout(), "{text}");
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Fatal::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Fatal::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
