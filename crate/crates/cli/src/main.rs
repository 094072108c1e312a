mod config;
mod inputs;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use bilateral::catalog::{self, catalog_membership_check, CatalogEntry};
use bilateral::chiest::{chi_integral_general, chi_integral_simple, chi_seminorm, example_step, Chi, SetSpec};
use bilateral::fundamental::{log_grid, phi_grand_closed, phi_grand_ln, P2Reading};
use bilateral::grandnorm::{grand_norm, in_g0_test, Certificate, NormReport};
use bilateral::indices::{IndexFit, IndexReport};
use bilateral::psi::Family;
use bilateral::search::{Endpoint, SearchOptions};
use bilateral::smallnorm::{
    exponent_grid, sl_norm_dual, sl_norm_primal, sl_upper_single, DualOptions, PrimalOptions, GRID_SIZE,
};

use config::{check_grid, check_tol, ConfigFile};
use inputs::{parse_chi, parse_entry, parse_psi, parse_range, parse_source, resolve, Source};
use output::{num, nums, opt, Sink, Table};

#[derive(Parser)]
#[command(name = "bilateral", version, about = "Grand and Small Lebesgue space norms, fundamental functions and indices")]
struct Cli {
    /// key = value file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for report files (also echoed to stdout).
    #[arg(long, global = true, env = "BILATERAL_OUT_DIR")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Norm of a function in G(ψ) or SL(ψ).
    Norm(NormArgs),
    /// Profile of φ(δ) = ||I_A||_G and χ(δ) = δ/φ(δ).
    Fundamental(FundamentalArgs),
    /// χ-integral of a function.
    Chi(ChiArgs),
    /// Fitted dilation indices.
    Indices(IndicesArgs),
    /// Example catalog: listing, membership checks, sampled export.
    Catalog(CatalogArgs),
    /// Seeded property batteries.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NormKind {
    Grand,
    Small,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Primal,
    Dual,
    Both,
    Single,
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

#[derive(Args)]
struct NormArgs {
    #[arg(value_enum)]
    kind: NormKind,
    #[arg(long)]
    psi: Option<String>,
    /// atomic:w1,... or a CSV file id,weight,value.
    #[arg(long)]
    space: Option<String>,
    /// values:v1,..., catalog:NAME[:k=v,...] or a CSV file id,weight,value.
    #[arg(long)]
    function: Option<String>,
    /// Exponent grid size (small) or interior search points (grand).
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long)]
    tol: Option<f64>,
    /// Quadrature nodes for catalog functions.
    #[arg(long)]
    nodes: Option<usize>,
}

#[derive(Args)]
struct FundamentalArgs {
    #[arg(long)]
    psi: Option<String>,
    /// LO:HI
    #[arg(long)]
    delta_range: Option<String>,
    #[arg(long)]
    per_decade: Option<usize>,
}

#[derive(Args)]
struct ChiArgs {
    /// ψ whose SL fundamental function is used as χ.
    #[arg(long)]
    psi: Option<String>,
    /// power:E, overriding the χ derived from --psi.
    #[arg(long)]
    chi: Option<String>,
    #[arg(long)]
    function: Option<String>,
    #[arg(long)]
    space: Option<String>,
    /// Parameter of the step example.
    #[arg(long)]
    n: Option<u32>,
    /// Largest majorant level count.
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    nodes: Option<usize>,
}

#[derive(Args)]
struct IndicesArgs {
    #[arg(long)]
    psi: Option<String>,
    /// grand, small or both.
    #[arg(long)]
    space: Option<String>,
}

#[derive(Args)]
struct CatalogArgs {
    #[arg(long)]
    list: bool,
    /// NAME[:k=v,...]
    #[arg(long)]
    check: Option<String>,
    /// NAME[:k=v,...]; writes the sampled function as CSV.
    #[arg(long)]
    export: Option<String>,
    #[arg(long)]
    nodes: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Cases per suite.
    #[arg(long)]
    count: Option<usize>,
}

struct Ctx {
    cfg: ConfigFile,
    sink: Sink,
    format: Format,
}

impl Ctx {
    /// A JSON report, or its flattened `key,value` rows with `--format csv`.
    fn report(&self, name: &str, v: &Value) -> Result<()> {
        match self.format {
            Format::Json => self.sink.json(name, v),
            Format::Csv => {
                let mut rows = Vec::new();
                flatten("", v, &mut rows);
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["key", "value"])?;
                for (k, v) in rows {
                    w.write_record([k, v])?;
                }
                self.sink.write(&format!("{name}.csv"), &String::from_utf8(w.into_inner()?)?)
            }
        }
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, v)| flatten(&key(k), v, rows)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| flatten(&key(&i.to_string()), v, rows)),
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        Value::Null => rows.push((prefix.to_string(), String::new())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

fn endpoint(e: Option<Endpoint>) -> Value {
    match e {
        None => Value::Null,
        Some(Endpoint::Lower) => json!("lower"),
        Some(Endpoint::Upper) => json!("upper"),
    }
}

fn norm_json(r: &NormReport<f64>) -> Value {
    let mut m = Map::new();
    m.insert("value".into(), num(r.value));
    m.insert("arg".into(), num(r.arg));
    m.insert("divergent_at".into(), endpoint(r.divergent_at));
    m.insert("grid_points".into(), json!(r.grid_points));
    m.insert("tolerance".into(), num(r.tolerance));
    m.insert("lower_bound".into(), opt(r.lower_bound));
    match &r.certificate {
        Certificate::None => {}
        Certificate::FeasiblePoint(f) => {
            m.insert("primal_point".into(), nums(f));
        }
        Certificate::Decomposition(d) => {
            let comps: Vec<Value> = d.components.iter().map(|c| json!({"q": num(c.q), "values": nums(&c.values)})).collect();
            m.insert("decomposition".into(), json!({"cost": num(d.cost), "residual_l1": num(d.residual_l1), "components": comps}));
        }
    }
    Value::Object(m)
}

fn cmd_norm(ctx: &Ctx, a: NormArgs) -> Result<()> {
    let cfg = &ctx.cfg;
    let psi = parse_psi(&cfg.require(a.psi, "psi")?)?;
    let source = parse_source(&cfg.require(a.function, "function")?)?;
    let space_desc = cfg.pick(a.space, "space")?;
    let (space, f) = resolve(&source, space_desc.as_deref(), cfg.pick(a.nodes, "nodes")?)?;
    let mut report = Map::new();
    report.insert("psi".into(), json!(psi.label));
    report.insert("atoms".into(), json!(space.len()));
    match a.kind {
        NormKind::Grand => {
            let resolution = check_grid(cfg.pick_or(a.grid, "grid", SearchOptions::default().resolution)?)?;
            let r = grand_norm(&f, &psi, &space, SearchOptions { resolution, polish: true })?;
            report.insert("norm".into(), json!("grand"));
            report.insert("grand".into(), norm_json(&r));
            let g0 = match in_g0_test(&f, &psi, &space) {
                Ok(g) => json!(g.in_g0),
                Err(_) => Value::Null,
            };
            report.insert("in_g0".into(), g0);
        }
        NormKind::Small => {
            let m = check_grid(cfg.pick_or(a.grid, "grid", GRID_SIZE)?)?;
            let tol = check_tol(cfg.pick_or(a.tol, "tol", 1e-9)?)?;
            let mode = cfg.pick_or(a.mode, "mode", Mode::Both)?;
            let grid = exponent_grid(&psi, m);
            report.insert("norm".into(), json!("small"));
            let mut values = Vec::new();
            if matches!(mode, Mode::Primal | Mode::Both) {
                let r = sl_norm_primal(&f, &psi, &space, &grid, PrimalOptions { refine: true, tol, ..Default::default() })?;
                values.push(r.value);
                report.insert("primal".into(), norm_json(&r));
            }
            if matches!(mode, Mode::Dual | Mode::Both) {
                let r = sl_norm_dual(&f, &psi, &space, &grid, DualOptions { tol, ..Default::default() })?;
                values.push(r.value);
                report.insert("dual".into(), norm_json(&r));
            }
            if mode == Mode::Both {
                let gap = if values[1] > 0.0 { (values[1] - values[0]) / values[1] } else { 0.0 };
                report.insert("gap".into(), num(gap));
            }
            if mode == Mode::Single {
                report.insert("single".into(), norm_json(&sl_upper_single(&f, &psi, &space, &[])?));
            }
        }
    }
    ctx.report("norm", &Value::Object(report))
}

fn cmd_fundamental(ctx: &Ctx, a: FundamentalArgs) -> Result<()> {
    let cfg = &ctx.cfg;
    let psi = parse_psi(&cfg.require(a.psi, "psi")?)?;
    let (lo, hi) = parse_range(&cfg.pick_or(a.delta_range, "delta-range", "1e-8:1e8".to_string())?)?;
    let per_decade = cfg.pick_or(a.per_decade, "per-decade", 4)?;
    let deltas = log_grid(lo, hi, per_decade.max(1));
    check_grid(deltas.len())?;
    let zeta = psi.zeta.filter(|_| psi.family == Family::Zeta);
    let mut rows = Vec::with_capacity(deltas.len());
    for d in &deltas {
        let point = phi_grand_ln(&psi, d.ln());
        let numeric = point.phi();
        let closed = zeta.and_then(|z| phi_grand_closed(z.a, z.b, z.alpha, z.beta, *d, P2Reading::Stationary).ok());
        let closed_value = closed.as_ref().map(|c| c.value);
        let rel = closed_value.map(|c| (c - numeric).abs() / numeric);
        rows.push(vec![Some(*d), Some(numeric), closed_value, rel, Some(d / numeric), Some(point.arg)]);
    }
    let table = Table { header: vec!["delta", "phi_numeric", "phi_closed", "rel_diff", "chi", "p_star"], rows };
    match ctx.format {
        Format::Csv => ctx.sink.csv("fundamental", &table),
        Format::Json => {
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|r| {
                    let m: Map<String, Value> = table.header.iter().zip(r).map(|(h, c)| (h.to_string(), opt(*c))).collect();
                    Value::Object(m)
                })
                .collect();
            ctx.sink.json("fundamental", &json!({"psi": psi.label, "profile": rows}))
        }
    }
}

fn cmd_chi(ctx: &Ctx, a: ChiArgs) -> Result<()> {
    let cfg = &ctx.cfg;
    let psi = cfg.pick(a.psi, "psi")?.map(|d| parse_psi(&d)).transpose()?;
    let chi_desc = cfg.pick(a.chi, "chi")?;
    let source = parse_source(&cfg.require(a.function, "function")?)?;
    let levels = cfg.pick_or(a.levels, "levels", 16)?;
    let chi = match (&chi_desc, &psi, &source) {
        (Some(d), _, _) => parse_chi(d)?,
        (None, Some(p), _) => Chi::from_psi(p),
        (None, None, Source::Step) => Chi::power(0.5),
        (None, None, _) => bail!("chi needs --psi or --chi"),
    };
    let mut report = Map::new();
    report.insert("chi".into(), json!(chi.label));
    if let Source::Step = source {
        let n = cfg.pick_or(a.n, "n", 1000)?;
        if n == 0 {
            bail!("--n must be positive");
        }
        let f = example_step::<f64>(n);
        let terms: Vec<Value> = f
            .canonical()
            .terms()
            .iter()
            .map(|t| {
                let sets = match &t.set {
                    SetSpec::Intervals(iv) => iv.iter().map(|(l, h)| json!([num(*l), num(*h)])).collect(),
                    SetSpec::Atoms(ix) => ix.iter().map(|i| json!(i)).collect(),
                };
                json!({"coef": num(t.coef), "measure": num(t.measure), "set": Value::Array(sets)})
            })
            .collect();
        report.insert("function".into(), json!("step"));
        report.insert("n".into(), json!(n));
        report.insert("value".into(), num(chi_integral_simple(&f, &chi)));
        report.insert("terms".into(), Value::Array(terms));
        return ctx.report("chi", &Value::Object(report));
    }
    let space_desc = cfg.pick(a.space, "space")?;
    let (space, f) = resolve(&source, space_desc.as_deref(), cfg.pick(a.nodes, "nodes")?)?;
    if f.is_nonnegative() {
        let r = chi_integral_general(&f, &space, &chi, levels)?;
        report.insert("value".into(), num(r.value));
        report.insert("simple_value".into(), opt(r.simple_value));
        report.insert("undercuts_simple".into(), json!(r.undercuts_simple));
        report.insert("majorant".into(), json!({"levels": nums(&r.majorant.levels), "measures": nums(&r.majorant.measures)}));
    } else {
        report.insert("value".into(), num(chi_seminorm(&f, &space, &chi, levels)?));
    }
    // the SL norm sits below the χ-integral; its certified lower bound is reported alongside
    if let Some(p) = &psi {
        let grid = exponent_grid(p, GRID_SIZE);
        let lower = sl_norm_primal(&f, p, &space, &grid, PrimalOptions { refine: true, ..Default::default() }).ok().map(|r| r.value);
        report.insert("sl_lower_bound".into(), opt(lower));
    }
    ctx.report("chi", &Value::Object(report))
}

fn fit_json(f: &IndexFit<f64>) -> Value {
    json!({
        "name": f.name,
        "value": num(f.value),
        "target": opt(f.target),
        "residual": num(f.residual),
        "agrees": f.agrees,
        "diagnostic": f.diagnostic,
    })
}

fn cmd_indices(ctx: &Ctx, a: IndicesArgs) -> Result<()> {
    let cfg = &ctx.cfg;
    let psi = parse_psi(&cfg.require(a.psi, "psi")?)?;
    let which = cfg.pick_or(a.space, "space", "both".to_string())?;
    if !["grand", "small", "both"].contains(&which.as_str()) {
        bail!("--space must be grand, small or both, got {which:?}");
    }
    let r = IndexReport::compute(&psi);
    let mut report = Map::new();
    report.insert("psi".into(), json!(psi.label));
    if which != "small" {
        report.insert("grand".into(), json!([fit_json(&r.grand.gamma1), fit_json(&r.grand.gamma2)]));
    }
    if which != "grand" {
        let s = &r.small;
        report.insert("small".into(), json!([fit_json(&s.gamma1), fit_json(&s.gamma2), fit_json(&s.beta1), fit_json(&s.beta2)]));
    }
    report.insert("duality_defect".into(), json!([num(r.duality_defect.0), num(r.duality_defect.1)]));
    report.insert("diagnostics".into(), json!(r.diagnostics()));
    ctx.report("indices", &Value::Object(report))
}

fn entry_json(e: &CatalogEntry<f64>) -> Value {
    let params: Map<String, Value> = e.params().iter().map(|(k, v)| (k.to_string(), num(*v))).collect();
    let (lo, hi) = e.validity();
    json!({"name": e.name(), "params": params, "validity": [num(lo), num(hi)], "closed_form": e.has_closed_form()})
}

fn cmd_catalog(ctx: &Ctx, a: CatalogArgs) -> Result<()> {
    let actions = a.list as usize + a.check.is_some() as usize + a.export.is_some() as usize;
    if actions != 1 {
        bail!("catalog takes exactly one of --list, --check NAME, --export NAME");
    }
    if a.list {
        return ctx.sink.text("catalog", &catalog::listing());
    }
    if let Some(desc) = a.check {
        let e = parse_entry(&desc)?;
        let r = catalog_membership_check(&e)?;
        let claims: Vec<Value> = r
            .claims
            .iter()
            .map(|c| json!({"claim": c.description, "passed": c.passed, "value": opt(c.value)}))
            .collect();
        let v = json!({"entry": entry_json(&e), "claims": claims, "all_passed": r.all_passed(), "note": catalog::GAMMA_PAIRING_NOTE});
        return ctx.report("catalog_check", &v);
    }
    let e = parse_entry(&a.export.unwrap_or_default())?;
    let space = match ctx.cfg.pick(a.nodes, "nodes")? {
        Some(n) => e.space(n)?,
        None => e.default_space()?,
    };
    let f = e.sample_plain(&space)?;
    let rows = space
        .nodes()
        .iter()
        .zip(space.weights())
        .zip(f.values())
        .map(|((n, w), v)| vec![Some(n.x), Some(n.ln_x), Some(*w), Some(*v)])
        .collect();
    ctx.sink.csv(&format!("catalog_{}", e.name()), &Table { header: vec!["x", "ln_x", "weight", "value"], rows })
}

/// `Ok(false)` when a suite fails.
fn cmd_verify(ctx: &Ctx, a: VerifyArgs) -> Result<bool> {
    let cfg = &ctx.cfg;
    let names = verify::suites(&cfg.pick_or(a.suite, "suite", "all".to_string())?)?;
    let seed = cfg.pick_or(a.seed, "seed", 0)?;
    let count = cfg.pick(a.count, "count")?;
    let mut all = true;
    let mut suites = Vec::new();
    for name in names {
        let r = verify::run(name, seed, count);
        let verdict = if r.passed() { "PASS" } else { "FAIL" };
        eprintln!("{:<11} {verdict}  {} cases, worst {:.3e}", r.suite, r.cases, r.worst);
        for f in &r.failures {
            eprintln!("    {f}");
        }
        all &= r.passed();
        suites.push(json!({"suite": r.suite, "passed": r.passed(), "cases": r.cases, "worst": num(r.worst), "failures": r.failures}));
    }
    ctx.report("verify", &json!({"seed": seed, "passed": all, "suites": suites}))?;
    Ok(all)
}

fn run(cli: Cli) -> Result<bool> {
    let cfg = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let out = match cli.out {
        Some(p) => Some(p),
        None => cfg.pick::<PathBuf>(None, "out")?,
    };
    let format = cfg.pick_or(cli.format, "format", Format::Json)?;
    let format = match (&cli.cmd, cli.format.is_none() && cfg.raw("format").is_none()) {
        // profiles default to CSV
        (Command::Fundamental(_), true) => Format::Csv,
        _ => format,
    };
    let ctx = Ctx { cfg, sink: Sink { dir: out }, format };
    match cli.cmd {
        Command::Norm(a) => cmd_norm(&ctx, a)?,
        Command::Fundamental(a) => cmd_fundamental(&ctx, a)?,
        Command::Chi(a) => cmd_chi(&ctx, a)?,
        Command::Indices(a) => cmd_indices(&ctx, a)?,
        Command::Catalog(a) => cmd_catalog(&ctx, a)?,
        Command::Verify(a) => return cmd_verify(&ctx, a),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // usage errors are input errors; 2 is reserved for verify failures
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
