//! Canonical line-oriented text formats for logs, be-logs and functors.
//!
//! ```text
//! #ELOG bob-alice
//! P Alice
//! P Bob
//! A is_loved who=Alice cs=loves cn=is_loved triv=loves
//! A loves who=Bob cs=unknown cn=is_loved triv=is_loved
//! ```
//!
//! Blank lines and lines starting with `;` are ignored. Emitted files list
//! participants then actions, each sorted by id; sentinels are implicit.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::belog::{BeLog, BeLogError, BeRelation, BeVerbType};
use crate::functor::{Candidate, Functor, FunctorDirection};
use crate::id::ObjectId;
use crate::log::{build_log, Action, Log, LogKind, ModelError, Participant, ParticipantKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TextError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    BeLog(#[from] BeLogError),
}

struct Token {
    text: String,
    /// Value part after `=`, unquoted, when the token is `key=value`.
    value: Option<String>,
    column: usize,
}

fn err(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError { line, column, message: message.into() }
}

/// Splits a line on whitespace, honouring `"..."` values with `\"`, `\\`
/// and `\n` escapes.
fn tokenize(line: &str, lineno: usize) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let column = i + 1;
        let mut raw = String::new();
        let mut value: Option<String> = None;
        while i < chars.len() && !chars[i].is_whitespace() {
            let c = chars[i];
            if c == '=' && value.is_none() {
                value = Some(String::new());
                raw.push(c);
                i += 1;
                if i < chars.len() && chars[i] == '"' {
                    i += 1;
                    let mut closed = false;
                    let v = value.as_mut().expect("set above");
                    while i < chars.len() {
                        match chars[i] {
                            '"' => {
                                closed = true;
                                i += 1;
                                break;
                            }
                            '\\' => {
                                let esc = chars.get(i + 1).ok_or_else(|| err(lineno, i + 1, "dangling escape"))?;
                                v.push(match esc {
                                    '"' => '"',
                                    '\\' => '\\',
                                    'n' => '\n',
                                    other => return Err(err(lineno, i + 1, format!("unknown escape \\{other}"))),
                                });
                                i += 2;
                            }
                            other => {
                                v.push(other);
                                i += 1;
                            }
                        }
                    }
                    if !closed {
                        return Err(err(lineno, column, "unterminated string"));
                    }
                    if i < chars.len() && !chars[i].is_whitespace() {
                        return Err(err(lineno, i + 1, "text after closing quote"));
                    }
                    break;
                }
                continue;
            }
            if c == '"' {
                return Err(err(lineno, i + 1, "unexpected quote"));
            }
            raw.push(c);
            if let Some(v) = value.as_mut() {
                v.push(c);
            }
            i += 1;
        }
        out.push(Token { text: raw, value, column });
    }
    Ok(out)
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn key_of(t: &Token) -> &str {
    t.text.split('=').next().unwrap_or("")
}

fn parse_id(s: &str, line: usize, column: usize) -> Result<ObjectId, ParseError> {
    ObjectId::new(s).map_err(|e| err(line, column, e.to_string()))
}

fn parse_int(t: &Token, line: usize) -> Result<i64, ParseError> {
    t.value.as_deref().unwrap_or("").parse().map_err(|_| err(line, t.column, format!("`{}` is not an integer", t.text)))
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end())).filter(|(_, l)| {
        let t = l.trim_start();
        !t.is_empty() && !t.starts_with(';')
    })
}

fn need_value(t: &Token, line: usize) -> Result<&str, ParseError> {
    t.value.as_deref().ok_or_else(|| err(line, t.column, format!("`{}` needs a value", t.text)))
}

/// Parses a log. The result is built and validated.
pub fn parse_log(text: &str) -> Result<Log, TextError> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or_else(|| err(1, 1, "missing #ELOG or #SLOG header"))?;
    let toks = tokenize(header, hl)?;
    let kind = match toks.first().map(|t| t.text.as_str()) {
        Some("#ELOG") => LogKind::Episode,
        Some("#SLOG") => LogKind::Scenario,
        _ => return Err(err(hl, 1, "expected #ELOG or #SLOG").into()),
    };
    let id_tok = toks.get(1).ok_or_else(|| err(hl, header.len() + 1, "missing log id"))?;
    let id = parse_id(&id_tok.text, hl, id_tok.column)?;
    let mut provenance = None;
    for t in &toks[2..] {
        match key_of(t) {
            "from" => provenance = Some(parse_id(need_value(t, hl)?, hl, t.column)?),
            k => return Err(err(hl, t.column, format!("unknown key `{k}`")).into()),
        }
    }

    let mut participants = Vec::new();
    let mut actions = Vec::new();
    for (ln, line) in lines {
        let toks = tokenize(line, ln)?;
        let head = &toks[0];
        let idt = toks.get(1).ok_or_else(|| err(ln, line.len() + 1, "missing object id"))?;
        if idt.value.is_some() {
            return Err(err(ln, idt.column, "missing object id").into());
        }
        let oid = parse_id(&idt.text, ln, idt.column)?;
        match head.text.as_str() {
            "P" => {
                let mut p = Participant::new(oid, kind.default_participant_kind());
                for t in &toks[2..] {
                    let v = need_value(t, ln)?;
                    match key_of(t) {
                        "kind" => {
                            p.kind = ParticipantKind::parse(v)
                                .ok_or_else(|| err(ln, t.column, format!("unknown participant kind `{v}`")))?
                        }
                        "label" => p.label = Some(v.to_string()),
                        k => return Err(err(ln, t.column, format!("unknown key `{k}`")).into()),
                    }
                }
                if p.id.is_sentinel() {
                    if p.id != ObjectId::nobody() || p.label.is_some() {
                        return Err(err(ln, idt.column, format!("sentinel `{}` cannot be redefined", p.id)).into());
                    }
                    continue;
                }
                participants.push(p);
            }
            "A" => {
                let mut a = Action {
                    id: oid,
                    label: None,
                    who: None,
                    cause_s: None,
                    cause_n: None,
                    trivial_partner: None,
                    volition: false,
                    raw: Default::default(),
                };
                for t in &toks[2..] {
                    let k = key_of(t);
                    if k == "vol" && t.value.is_none() {
                        a.volition = true;
                        continue;
                    }
                    let v = need_value(t, ln)?;
                    let target = || parse_id(v, ln, t.column + k.len() + 1);
                    match k {
                        "who" => a.who = Some(target()?),
                        "cs" => a.cause_s = Some(target()?),
                        "cn" => a.cause_n = Some(target()?),
                        "triv" => a.trivial_partner = Some(target()?),
                        "ts" => a.raw.t_start = Some(parse_int(t, ln)?),
                        "te" => a.raw.t_end = Some(parse_int(t, ln)?),
                        "label" => a.label = Some(v.to_string()),
                        _ if k.starts_with("attr.") && k.len() > 5 => {
                            a.raw.attrs.insert(k[5..].to_string(), v.to_string());
                        }
                        _ => return Err(err(ln, t.column, format!("unknown key `{k}`")).into()),
                    }
                }
                actions.push(a);
            }
            other => return Err(err(ln, head.column, format!("unknown record type `{other}`")).into()),
        }
    }
    let mut log = build_log(kind, id, actions, participants)?;
    log.provenance = provenance;
    Ok(log)
}

/// Canonical text of a log.
pub fn write_log(log: &Log) -> String {
    let mut s = String::new();
    let tag = match log.kind {
        LogKind::Episode => "#ELOG",
        LogKind::Scenario => "#SLOG",
    };
    let _ = write!(s, "{tag} {}", log.id);
    if let Some(p) = &log.provenance {
        let _ = write!(s, " from={p}");
    }
    s.push('\n');
    for p in log.participants.values().filter(|p| !p.id.is_sentinel()) {
        let _ = write!(s, "P {}", p.id);
        if p.kind != log.kind.default_participant_kind() {
            let _ = write!(s, " kind={}", p.kind.as_str());
        }
        if let Some(l) = &p.label {
            let _ = write!(s, " label={}", quote(l));
        }
        s.push('\n');
    }
    for a in log.content_actions() {
        let _ = write!(s, "A {}", a.id);
        for (k, v) in [("who", &a.who), ("cs", &a.cause_s), ("cn", &a.cause_n), ("triv", &a.trivial_partner)] {
            if let Some(v) = v {
                let _ = write!(s, " {k}={v}");
            }
        }
        if a.volition {
            s.push_str(" vol");
        }
        if let Some(t) = a.raw.t_start {
            let _ = write!(s, " ts={t}");
        }
        if let Some(t) = a.raw.t_end {
            let _ = write!(s, " te={t}");
        }
        if let Some(l) = &a.label {
            let _ = write!(s, " label={}", quote(l));
        }
        for (k, v) in &a.raw.attrs {
            let _ = write!(s, " attr.{k}={}", quote(v));
        }
        s.push('\n');
    }
    s
}

/// Table 1 style relational view: one row per action, sentinels included.
pub fn write_relational_table(log: &Log) -> String {
    let mut s = String::from("action\twho\tcause_s\tcause_n\n");
    let cell = |x: &Option<ObjectId>| x.as_ref().map(|x| x.as_str().to_string()).unwrap_or_default();
    for id in log.canonical_action_order() {
        let a = &log.actions[&id];
        let _ = writeln!(s, "{}\t{}\t{}\t{}", a.id, cell(&a.who), cell(&a.cause_s), cell(&a.cause_n));
    }
    s
}

/// Builds an e-log from a relational table. Participants are the plain
/// `who` targets that are not actions; trivial pairs are not recoverable
/// from the table and are left unmarked.
pub fn parse_relational_table(id: ObjectId, text: &str) -> Result<Log, TextError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| err(1, 1, "missing header"))?;
    if header.split('\t').collect::<Vec<_>>() != ["action", "who", "cause_s", "cause_n"] {
        return Err(err(1, 1, "header must be action, who, cause_s, cause_n").into());
    }
    let mut actions = Vec::new();
    let mut people = std::collections::BTreeSet::new();
    for (i, line) in lines {
        let cells: Vec<&str> = line.split('\t').collect();
        if cells.len() != 4 {
            return Err(err(i + 1, 1, format!("expected 4 cells, found {}", cells.len())).into());
        }
        let mut col = 1;
        let mut ids = Vec::new();
        for c in &cells {
            ids.push(parse_id(c, i + 1, col)?);
            col += c.chars().count() + 1;
        }
        people.insert(ids[1].clone());
        actions.push(Action::new(ids[0].clone(), ids[1].clone()).cause_s(ids[2].clone()).cause_n(ids[3].clone()));
    }
    let action_ids: std::collections::BTreeSet<ObjectId> = actions.iter().map(|a| a.id.clone()).collect();
    let participants =
        people.into_iter().filter(|p| !p.is_sentinel() && !action_ids.contains(p)).map(Participant::plain).collect();
    Ok(build_log(LogKind::Episode, id, actions, participants)?)
}

/// Parses `B <type> <source> <target> [w=<real>] [label="..."]` lines.
pub fn parse_belog(text: &str) -> Result<BeLog, TextError> {
    let mut b = BeLog::new();
    for (ln, line) in content_lines(text) {
        let toks = tokenize(line, ln)?;
        if toks[0].text != "B" {
            return Err(err(ln, toks[0].column, format!("unknown record type `{}`", toks[0].text)).into());
        }
        if toks.len() < 4 || toks[1..4].iter().any(|t| t.value.is_some()) {
            return Err(err(ln, 1, "expected B <type> <source> <target>").into());
        }
        let kind = BeVerbType::parse(&toks[1].text)
            .ok_or_else(|| err(ln, toks[1].column, format!("unknown relation type `{}`", toks[1].text)))?;
        let mut r = BeRelation::new(
            kind,
            parse_id(&toks[2].text, ln, toks[2].column)?,
            parse_id(&toks[3].text, ln, toks[3].column)?,
        );
        for t in &toks[4..] {
            let v = need_value(t, ln)?;
            match key_of(t) {
                "w" => {
                    r.weight = v.parse().map_err(|_| err(ln, t.column, format!("`{v}` is not a number")))?;
                }
                "label" => r.label = Some(v.to_string()),
                k => return Err(err(ln, t.column, format!("unknown key `{k}`")).into()),
            }
        }
        b.insert(r).map_err(|e| err(ln, 1, e.to_string()))?;
    }
    Ok(b)
}

pub fn write_belog(b: &BeLog) -> String {
    let mut s = String::new();
    for r in b.relations() {
        let _ = write!(s, "B {} {} {}", r.kind, r.source, r.target);
        if r.weight != 1.0 {
            let _ = write!(s, " w={}", r.weight);
        }
        if let Some(l) = &r.label {
            let _ = write!(s, " label={}", quote(l));
        }
        s.push('\n');
    }
    s
}

/// Functor block: header, one `map` line per pair, optional score line.
pub fn write_functor(f: &Functor, score: Option<&crate::functor::Score>) -> String {
    let mut s = format!("F {} -> {}", f.src, f.dst);
    if f.direction != FunctorDirection::EToS {
        let _ = write!(s, " dir={}", f.direction.as_str());
    }
    s.push('\n');
    for (a, b) in &f.action_map {
        let _ = writeln!(s, "map A {a} -> {b}");
    }
    for (a, b) in &f.participant_map {
        let _ = writeln!(s, "map P {a} -> {b}");
    }
    if let Some(sc) = score {
        let _ = writeln!(
            s,
            "score total={:.4} structural={:.4} temporal={:.4} similarity={:.4} complete={}",
            sc.total,
            sc.structural,
            sc.temporal,
            sc.similarity,
            sc.report.is_complete()
        );
    }
    s
}

pub fn write_candidates(cands: &[Candidate]) -> String {
    cands.iter().map(|c| write_functor(&c.functor, Some(&c.score))).collect::<Vec<_>>().join("\n")
}

/// Parses one or more functor blocks; score lines are skipped.
pub fn parse_functors(text: &str) -> Result<Vec<Functor>, ParseError> {
    let mut out: Vec<Functor> = Vec::new();
    for (ln, line) in content_lines(text) {
        let toks = tokenize(line, ln)?;
        let words: Vec<&str> = toks.iter().map(|t| t.text.as_str()).collect();
        match words.as_slice() {
            ["F", src, "->", dst, rest @ ..] => {
                let mut f = Functor::empty(parse_id(src, ln, toks[1].column)?, parse_id(dst, ln, toks[3].column)?);
                for (k, t) in rest.iter().zip(&toks[4..]) {
                    f.direction = match *k {
                        "dir=e_to_s" => FunctorDirection::EToS,
                        "dir=s_to_e" => FunctorDirection::SToE,
                        _ => return Err(err(ln, t.column, format!("unknown key `{k}`"))),
                    };
                }
                out.push(f);
            }
            ["map", kind @ ("A" | "P"), a, "->", b] => {
                let f = out.last_mut().ok_or_else(|| err(ln, 1, "map line before F header"))?;
                let (a, b) = (parse_id(a, ln, toks[2].column)?, parse_id(b, ln, toks[4].column)?);
                let map: &mut BTreeMap<ObjectId, ObjectId> =
                    if *kind == "A" { &mut f.action_map } else { &mut f.participant_map };
                if map.insert(a, b).is_some() {
                    return Err(err(ln, toks[2].column, "object mapped twice"));
                }
            }
            ["score", ..] => {}
            _ => return Err(err(ln, 1, format!("unrecognized line `{line}`"))),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::id::oid;

    const TABLE1: &str = "#ELOG bob-alice
P Alice
P Bob
A is_loved who=Alice cs=loves cn=is_loved triv=loves
A loves who=Bob cs=unknown cn=is_loved triv=is_loved
";

    #[test]
    fn table_one_round_trip() {
        let log = parse_log(TABLE1).unwrap();
        assert_eq!(log.content_actions().count(), 2);
        assert_eq!(write_log(&log), TABLE1);
    }

    #[test]
    fn sentinel_rows_are_accepted() {
        let with = format!("{TABLE1}A unknown who=nobody cs=unknown cn=unknown\nP nobody\n");
        assert_eq!(write_log(&parse_log(&with).unwrap()), TABLE1);
    }

    #[test]
    fn unknown_key_reports_position() {
        let e = parse_log("#ELOG x\nP Bob\nA a who=Bob foo=1\n").unwrap_err();
        assert_eq!(e, TextError::Parse(ParseError { line: 3, column: 13, message: "unknown key `foo`".into() }));
    }

    #[test]
    fn labels_and_attrs_escape() {
        let text = "#ELOG s from=e
P C kind=class label=\"a \\\"quoted\\\" \\\\ name\\nline\"
A x who=C cs=unknown cn=unknown vol ts=1 te=4 label=\"do it\" attr.place=\"the lab\"
";
        let log = parse_log(text).unwrap();
        assert_eq!(log.participants[&oid("C")].label.as_deref(), Some("a \"quoted\" \\ name\nline"));
        assert_eq!(log.provenance, Some(oid("e")));
        assert!(log.actions[&oid("x")].volition);
        assert_eq!(write_log(&log), text);
    }

    #[test]
    fn malformed_inputs() {
        for bad in [
            "",
            "#XLOG a\n",
            "#ELOG a\nQ b\n",
            "#ELOG a\nA b who=\"x\n",
            "#ELOG a\nA b ts=x\n",
            "#ELOG a\nP nothing\n",
            "#ELOG a\nA b who=Zed\n",
        ] {
            assert!(parse_log(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn relational_table_round_trip() {
        let log = parse_log(TABLE1).unwrap();
        let table = write_relational_table(&log);
        assert_eq!(
            table,
            "action\twho\tcause_s\tcause_n\nloves\tBob\tunknown\tis_loved\nis_loved\tAlice\tloves\tis_loved\n\
             nothing\tnobody\tnothing\tnothing\nunknown\tnobody\tunknown\tunknown\n"
        );
        let back = parse_relational_table(oid("bob-alice"), &table).unwrap();
        let mut unmarked = log.clone();
        for a in unmarked.actions.values_mut() {
            a.trivial_partner = None;
        }
        assert_eq!(back, unmarked);
    }

    #[test]
    fn belog_round_trip() {
        let text = "B be3 robot worker\nB be4 crow black label=\"colour\"\nB similar ignite explode w=0.6\n";
        let b = parse_belog(text).unwrap();
        assert_eq!(b.len(), 3);
        assert_eq!(write_belog(&b), text);
        assert!(parse_belog("B be9 a b\n").is_err());
        assert!(parse_belog("B be3 a a\n").is_err());
    }

    #[test]
    fn functor_round_trip() {
        let mut f = Functor::empty(oid("e"), oid("s"));
        f.action_map.insert(oid("a"), oid("x"));
        f.participant_map.insert(oid("P"), oid("Q"));
        let text = write_functor(&f, None);
        assert_eq!(text, "F e -> s\nmap A a -> x\nmap P P -> Q\n");
        assert_eq!(parse_functors(&text).unwrap(), vec![f]);
        assert!(parse_functors("map A a -> x\n").is_err());
    }
}
