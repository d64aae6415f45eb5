//! Statistics report text and comma-separated series.

use std::fmt::Write as _;
use std::io;

use super::{CriticalDiagnostics, LevelStatistics, NestStatistics};
use crate::real::HighPrecisionReal;
use crate::text::{join, list, maybe, num, opt, parse_sections, Section};

const HEADER: &str = "quadnest-stats 1";

fn real(x: &Option<rug::Float>) -> String {
    opt(&x.clone().map(HighPrecisionReal::new))
}

fn parse_real(s: &str) -> Result<Option<rug::Float>, String> {
    if s == "-" {
        return Ok(None);
    }
    HighPrecisionReal::parse_decimal(s).map(|h| Some(h.into_inner())).map_err(|e| e.to_string())
}

fn pairs<T: ToString>(v: &[(usize, T)]) -> String {
    v.iter().map(|(n, x)| format!("{n}:{}", x.to_string())).collect::<Vec<_>>().join(";")
}

fn parse_pairs<T: std::str::FromStr>(s: &str) -> Result<Vec<(usize, T)>, String> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(';')
        .map(|p| {
            let (n, x) = p.split_once(':').ok_or_else(|| format!("bad pair {p:?}"))?;
            Ok((num(n)?, num(x)?))
        })
        .collect()
}

pub fn statistics_to_text(st: &NestStatistics) -> String {
    let mut out = String::new();
    writeln!(out, "{HEADER}").unwrap();
    writeln!(out, "a = {}", st.a).unwrap();
    writeln!(out, "precision = {}", st.precision).unwrap();
    for l in &st.levels {
        writeln!(out).unwrap();
        writeln!(out, "[level {}]", l.n).unwrap();
        writeln!(out, "c = {}", real(&l.c)).unwrap();
        writeln!(out, "ln_inv_c = {}", opt(&l.ln_inv_c)).unwrap();
        writeln!(out, "s = {}", opt(&l.s)).unwrap();
        writeln!(out, "v = {}", opt(&l.v)).unwrap();
        writeln!(out, "tau = {}", opt(&l.tau)).unwrap();
        writeln!(out, "w = {}", real(&l.w)).unwrap();
        writeln!(out, "central = {}", opt(&l.central)).unwrap();
        writeln!(out, "landing_times = {}", l.landing_times.as_ref().map_or("-".to_string(), |t| join(t))).unwrap();
    }
    let d = &st.diagnostics;
    writeln!(out).unwrap();
    writeln!(out, "[diagnostics]").unwrap();
    writeln!(out, "s_ratio = {}", pairs(&d.s_ratio)).unwrap();
    writeln!(out, "v_ratio = {}", pairs(&d.v_ratio)).unwrap();
    writeln!(out, "w_exponent = {}", pairs(&d.w_exponent)).unwrap();
    writeln!(out, "additivity = {}", pairs(&d.additivity)).unwrap();
    writeln!(out, "return_steps = {}", pairs(&d.return_steps)).unwrap();
    out
}

fn level(sec: &Section, n: &str) -> Result<LevelStatistics, String> {
    let times = sec.get("landing_times")?;
    Ok(LevelStatistics {
        n: num(n)?,
        c: parse_real(sec.get("c")?)?,
        ln_inv_c: maybe(sec.get("ln_inv_c")?)?,
        s: maybe(sec.get("s")?)?,
        v: maybe(sec.get("v")?)?,
        tau: maybe(sec.get("tau")?)?,
        w: parse_real(sec.get("w")?)?,
        central: maybe(sec.get("central")?)?,
        landing_times: if times == "-" { None } else { Some(list(times)?) },
    })
}

pub fn parse_statistics(text: &str) -> Result<NestStatistics, String> {
    let (head, sections) = parse_sections(text, HEADER)?;
    let mut levels = Vec::new();
    let mut diagnostics = None;
    for sec in &sections {
        if let Some(n) = sec.name.strip_prefix("level ") {
            levels.push(level(sec, n)?);
        } else if sec.name == "diagnostics" {
            diagnostics = Some(CriticalDiagnostics {
                s_ratio: parse_pairs(sec.get("s_ratio")?)?,
                v_ratio: parse_pairs(sec.get("v_ratio")?)?,
                w_exponent: parse_pairs(sec.get("w_exponent")?)?,
                additivity: parse_pairs(sec.get("additivity")?)?,
                return_steps: parse_pairs(sec.get("return_steps")?)?,
            });
        } else {
            return Err(format!("unknown section [{}]", sec.name));
        }
    }
    Ok(NestStatistics {
        a: head.get("a")?.parse().map_err(|e: crate::real::ParseRealError| e.to_string())?,
        precision: num(head.get("precision")?)?,
        levels,
        diagnostics: diagnostics.ok_or("missing [diagnostics]")?,
    })
}

/// `header` then one `k,value` line per item, written as they arrive.
pub fn write_csv<W: io::Write, T: std::fmt::Display>(
    mut w: W,
    header: &str,
    rows: impl IntoIterator<Item = (usize, T)>,
) -> io::Result<()> {
    writeln!(w, "{header}")?;
    for (k, v) in rows {
        writeln!(w, "{k},{v}")?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nest::{build_principal_nest, NestConfig};
    use crate::stats::critical_statistics;

    #[test]
    fn report_round_trip() {
        let nest = build_principal_nest(&"1.7".parse().unwrap(), &NestConfig::with_max_level(3)).unwrap();
        let st = critical_statistics(&nest).unwrap();
        let text = statistics_to_text(&st);
        let back = parse_statistics(&text).unwrap();
        assert_eq!(back, st);
        assert_eq!(statistics_to_text(&back), text);
    }

    #[test]
    fn csv_lines() {
        let mut buf = Vec::new();
        write_csv(&mut buf, "k,value", [(1, 0.5), (2, 0.25)]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "k,value\n1,0.5\n2,0.25\n");
    }
}
