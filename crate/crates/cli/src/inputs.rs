//! Descriptors for ψ, spaces, functions and χ on the command line.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use bilateral::catalog::CatalogEntry;
use bilateral::chiest::Chi;
use bilateral::measure::{load_atomic_csv, MeasureSpace, SampledFunction};
use bilateral::psi::PsiFunction;

fn number(s: &str) -> Result<f64> {
    match s.trim() {
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        t => t.parse::<f64>().map_err(|_| anyhow!("not a number: {t:?}")),
    }
}

fn numbers(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(number).collect()
}

/// `zeta:a,b,alpha,beta` (b may be `inf`) or `table:PATH` with `p,psi` rows.
pub fn parse_psi(desc: &str) -> Result<PsiFunction<f64>> {
    let (kind, rest) = desc.split_once(':').ok_or_else(|| anyhow!("psi descriptor {desc:?}: expected KIND:ARGS"))?;
    match kind {
        "zeta" => {
            let v = numbers(rest).with_context(|| format!("psi descriptor {desc:?}"))?;
            let [a, b, alpha, beta] = v[..] else {
                bail!("psi descriptor {desc:?}: zeta takes a,b,alpha,beta");
            };
            Ok(PsiFunction::zeta(a, b, alpha, beta)?)
        }
        "table" => PsiFunction::load_tabulated(Path::new(rest)).with_context(|| format!("psi table {rest}")),
        other => bail!("unknown psi family {other:?} (expected zeta or table)"),
    }
}

/// `power:E` gives `χ(δ) = δ^E`.
pub fn parse_chi(desc: &str) -> Result<Chi<f64>> {
    match desc.split_once(':') {
        Some(("power", e)) => Ok(Chi::power(number(e)?)),
        _ => bail!("chi descriptor {desc:?}: expected power:E"),
    }
}

/// `lo:hi`.
pub fn parse_range(desc: &str) -> Result<(f64, f64)> {
    let (lo, hi) = desc.split_once(':').ok_or_else(|| anyhow!("range {desc:?}: expected LO:HI"))?;
    let (lo, hi) = (number(lo)?, number(hi)?);
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        bail!("range {desc:?}: need 0 < LO < HI < inf");
    }
    Ok((lo, hi))
}

/// `NAME` or `NAME:k=v,k=v`.
pub fn parse_entry(desc: &str) -> Result<CatalogEntry<f64>> {
    let (name, rest) = desc.split_once(':').unwrap_or((desc, ""));
    let mut params = Vec::new();
    for kv in rest.split(',').filter(|s| !s.is_empty()) {
        let (k, v) = kv.split_once('=').ok_or_else(|| anyhow!("catalog parameter {kv:?}: expected key=value"))?;
        params.push((k.trim().to_string(), number(v)?));
    }
    Ok(CatalogEntry::from_params(name, &params)?)
}

/// Where the function comes from.
pub enum Source {
    /// `values:v1,...` on the given or a unit-weight atomic space.
    Values(Vec<f64>),
    /// `catalog:NAME[:k=v,...]` on the entry's own discretization.
    Catalog(CatalogEntry<f64>),
    /// The Step example `I([0,1/2]) + (1+1/n) I((1/2,1))`.
    Step,
    /// CSV with `id,weight,value`, which also fixes the space.
    File(String),
}

pub fn parse_source(desc: &str) -> Result<Source> {
    if let Some(rest) = desc.strip_prefix("catalog:") {
        if rest == "example51" || rest == "step" {
            return Ok(Source::Step);
        }
        return Ok(Source::Catalog(parse_entry(rest)?));
    }
    if let Some(rest) = desc.strip_prefix("values:") {
        return Ok(Source::Values(numbers(rest)?));
    }
    Ok(Source::File(desc.to_string()))
}

/// `atomic:w1,...` or a CSV file `id,weight,value` (the value column is ignored here).
pub fn parse_space(desc: &str) -> Result<MeasureSpace<f64>> {
    if let Some(rest) = desc.strip_prefix("atomic:") {
        return Ok(MeasureSpace::atomic(numbers(rest)?)?);
    }
    Ok(load_atomic_csv::<f64>(Path::new(desc)).with_context(|| format!("space file {desc}"))?.0)
}

/// Resolves a function and the space it lives on.
pub fn resolve(source: &Source, space: Option<&str>, nodes: Option<usize>) -> Result<(MeasureSpace<f64>, SampledFunction<f64>)> {
    match source {
        Source::File(path) => {
            let (s, f) = load_atomic_csv::<f64>(Path::new(path)).with_context(|| format!("function file {path}"))?;
            match space {
                Some(d) => {
                    let s = parse_space(d)?;
                    if s.len() != f.len() {
                        bail!("space has {} atoms, function file has {} rows", s.len(), f.len());
                    }
                    Ok((s, f))
                }
                None => Ok((s, f)),
            }
        }
        Source::Values(v) => {
            let s = match space {
                Some(d) => parse_space(d)?,
                None => MeasureSpace::atomic(vec![1.0; v.len()])?,
            };
            if s.len() != v.len() {
                bail!("space has {} atoms, got {} values", s.len(), v.len());
            }
            Ok((s, SampledFunction::new(v.clone())?))
        }
        Source::Catalog(e) => {
            if space.is_some() {
                bail!("catalog functions carry their own space; drop --space");
            }
            let s = match nodes {
                Some(n) => e.space(n)?,
                None => e.default_space()?,
            };
            let f = e.sample(&s)?;
            Ok((s, f))
        }
        Source::Step => bail!("the step example is a simple function on [0,1]; only the chi subcommand takes it"),
    }
}
