//! Plain-text nest documents with exact decimal round trip.

use std::fmt::Write as _;

use super::{NestBase, PrincipalNest, StopReason};
use crate::real::{HighPrecisionReal, Parameter};
use crate::text::{join, list, maybe, num, opt, parse_sections};

const HEADER: &str = "quadnest-nest 1";

#[derive(Clone, Debug, PartialEq)]
pub struct LevelRecord {
    pub n: usize,
    pub half_width: HighPrecisionReal,
    pub v: Option<usize>,
    pub tau: Option<i64>,
    pub central: Option<bool>,
    pub s: Option<usize>,
    pub returns: Vec<usize>,
    pub gape: Option<HighPrecisionReal>,
    pub chain_steps: usize,
    pub verified: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NestDocument {
    pub a: Parameter,
    pub precision: u32,
    pub stop: StopReason,
    /// Renormalization periods below the base interval.
    pub renormalizations: Vec<usize>,
    pub base: HighPrecisionReal,
    pub levels: Vec<LevelRecord>,
}

impl NestDocument {
    pub fn from_nest(nest: &PrincipalNest) -> Self {
        let renormalizations = match &nest.base {
            NestBase::FixedPoint => Vec::new(),
            NestBase::Renormalized(r) => r.periods(),
        };
        let levels = nest
            .levels
            .iter()
            .map(|l| LevelRecord {
                n: l.n,
                half_width: HighPrecisionReal::new(l.half_width.clone()),
                v: l.v,
                tau: nest.tau(l.n).ok(),
                central: nest.is_central(l.n),
                s: nest.s(l.n),
                returns: l.returns.clone(),
                gape: l.gape.clone().map(HighPrecisionReal::new),
                chain_steps: l.certificate.chain_steps,
                verified: l.certificate.verified,
            })
            .collect();
        NestDocument {
            a: nest.a.clone(),
            precision: nest.precision,
            stop: nest.stop.clone(),
            renormalizations,
            base: HighPrecisionReal::new(nest.levels[0].half_width.clone()),
            levels,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{HEADER}").unwrap();
        writeln!(out, "a = {}", self.a).unwrap();
        writeln!(out, "precision = {}", self.precision).unwrap();
        writeln!(out, "stop = {}", self.stop).unwrap();
        writeln!(out, "renormalizations = {}", join(&self.renormalizations)).unwrap();
        writeln!(out, "base = {}", self.base).unwrap();
        for l in &self.levels {
            writeln!(out).unwrap();
            writeln!(out, "[level {}]", l.n).unwrap();
            writeln!(out, "half_width = {}", l.half_width).unwrap();
            writeln!(out, "v = {}", opt(&l.v)).unwrap();
            writeln!(out, "tau = {}", opt(&l.tau)).unwrap();
            writeln!(out, "central = {}", opt(&l.central)).unwrap();
            writeln!(out, "s = {}", opt(&l.s)).unwrap();
            writeln!(out, "returns = {}", join(&l.returns)).unwrap();
            writeln!(out, "gape = {}", opt(&l.gape)).unwrap();
            writeln!(out, "chain_steps = {}", l.chain_steps).unwrap();
            writeln!(out, "verified = {}", l.verified).unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let (head, sections) = parse_sections(text, HEADER)?;
        let real = |s: &str| HighPrecisionReal::parse_decimal(s).map_err(|e| e.to_string());
        let mut levels = Vec::with_capacity(sections.len());
        for b in &sections {
            let n = b.name.strip_prefix("level ").ok_or_else(|| format!("unknown section [{}]", b.name))?;
            let gape = b.get("gape")?;
            levels.push(LevelRecord {
                n: num(n)?,
                half_width: real(b.get("half_width")?)?,
                v: maybe(b.get("v")?)?,
                tau: maybe(b.get("tau")?)?,
                central: maybe(b.get("central")?)?,
                s: maybe(b.get("s")?)?,
                returns: list(b.get("returns")?)?,
                gape: if gape == "-" { None } else { Some(real(gape)?) },
                chain_steps: num(b.get("chain_steps")?)?,
                verified: num(b.get("verified")?)?,
            });
        }
        Ok(NestDocument {
            a: head.get("a")?.parse().map_err(|e: crate::real::ParseRealError| e.to_string())?,
            precision: num(head.get("precision")?)?,
            stop: head.get("stop")?.parse()?,
            renormalizations: list(head.get("renormalizations")?)?,
            base: real(head.get("base")?)?,
            levels,
        })
    }
}
