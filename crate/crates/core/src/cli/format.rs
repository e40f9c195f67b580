//! Text formats: model documents, theory files, point lists and
//! substitution maps.
//!
//! A model document declares sorts, operations with their tables, relation
//! symbols, and any number of named instances:
//!
//! ```text
//! sort s = 3
//! op add : s s -> s
//! 0 1 2
//! 1 2 0
//! 2 0 1
//! rel p : s
//! instance f1
//! p: 1
//! ```
//!
//! A table has one row per tuple of leading arguments (all but the last, in
//! mixed radix with the first argument most significant) and one column per
//! element of the last argument's sort. Constants and unary operations have a
//! single row. Tuple lines list space-separated tuples whose components are
//! comma-separated.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use crate::algebra::{FiniteAlgebra, Signature, Substitution, Term, VarContext};
use crate::config::Limits;
use crate::error::{Error, Result};
use crate::formula::{parse_formula, parse_term};
use crate::galois::Theory;
use crate::geometry::{Model, PointSet, PointSpace};
use crate::knowledge::Multimodel;

fn err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Whitespace-separated tokens with their 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter()
        .map(|(s, t)| (line[..s].chars().count() + 1, t))
        .collect()
}

fn strip_comment(line: &str) -> &str {
    line.split_once('#').map_or(line, |(a, _)| a)
}

fn ident(line: usize, (col, tok): (usize, &str), what: &str) -> Result<String> {
    let ok = tok.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && tok.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if ok {
        Ok(tok.to_string())
    } else {
        Err(err(line, col, format!("expected {what}, found `{tok}`")))
    }
}

fn number(line: usize, (col, tok): (usize, &str)) -> Result<usize> {
    tok.parse()
        .map_err(|_| err(line, col, format!("expected a number, found `{tok}`")))
}

struct PendingTable {
    op: usize,
    rows: usize,
    cols: usize,
    bound: usize,
    started_at: usize,
    entries: Vec<usize>,
}

/// Tuples per relation name, for one instance block.
type Tuples = BTreeMap<String, Vec<Vec<usize>>>;

/// Parses a model document into a multimodel.
pub fn parse_model_text(text: &str, limits: &Limits) -> Result<Multimodel> {
    let mut sig = Signature::new();
    let mut carriers: Vec<usize> = Vec::new();
    let mut tables: Vec<Vec<usize>> = Vec::new();
    let mut pending: Option<PendingTable> = None;
    let mut instances: Vec<(String, Tuples)> = Vec::new();
    let mut last_line = 0;

    for (k, raw) in text.lines().enumerate() {
        let ln = k + 1;
        last_line = ln;
        let line = strip_comment(raw);
        let toks = tokens(line);
        if toks.is_empty() {
            continue;
        }
        if let Some(t) = pending.as_mut() {
            if toks.len() != t.cols {
                return Err(err(
                    ln,
                    1,
                    format!("table row has {} entries, expected {}", toks.len(), t.cols),
                ));
            }
            for &tok in &toks {
                let v = number(ln, tok)?;
                if v >= t.bound {
                    return Err(err(
                        ln,
                        tok.0,
                        format!("table entry {v} out of range for a sort of size {}", t.bound),
                    ));
                }
                t.entries.push(v);
            }
            if t.entries.len() == t.rows * t.cols {
                let done = pending.take().expect("pending table");
                tables[done.op] = done.entries;
            }
            continue;
        }
        match toks[0].1 {
            "sort" => {
                if !instances.is_empty() {
                    return Err(err(ln, 1, "declaration after the first instance"));
                }
                if toks.len() != 4 || toks[2].1 != "=" {
                    return Err(err(ln, 1, "expected `sort NAME = SIZE`"));
                }
                let name = ident(ln, toks[1], "a sort name")?;
                let size = number(ln, toks[3])?;
                if size == 0 {
                    return Err(err(ln, toks[3].0, "carrier must not be empty"));
                }
                if size > limits.max_carrier {
                    return Err(err(
                        ln,
                        toks[3].0,
                        format!("carrier size {size} exceeds the limit of {}", limits.max_carrier),
                    ));
                }
                if sig.sort_index(&name).is_some() {
                    return Err(err(ln, toks[1].0, format!("duplicate sort `{name}`")));
                }
                sig = sig.with_sort(&name);
                carriers.push(size);
            }
            "op" => {
                if !instances.is_empty() {
                    return Err(err(ln, 1, "declaration after the first instance"));
                }
                let arrow = toks.iter().position(|t| t.1 == "->");
                let (Some(arrow), true) = (arrow, toks.len() >= 4 && toks[2].1 == ":") else {
                    return Err(err(ln, 1, "expected `op NAME : ARGS -> SORT`"));
                };
                if arrow + 2 != toks.len() {
                    return Err(err(ln, 1, "expected exactly one result sort after `->`"));
                }
                let name = ident(ln, toks[1], "an operation name")?;
                let mut arg_sorts = Vec::new();
                for &tok in &toks[3..arrow] {
                    let s = ident(ln, tok, "a sort name")?;
                    let Some(si) = sig.sort_index(&s) else {
                        return Err(err(ln, tok.0, format!("unknown sort `{s}`")));
                    };
                    arg_sorts.push((s, si));
                }
                let res = ident(ln, toks[arrow + 1], "a sort name")?;
                let Some(ri) = sig.sort_index(&res) else {
                    return Err(err(ln, toks[arrow + 1].0, format!("unknown sort `{res}`")));
                };
                if sig.op(&name).is_some() || sig.rel(&name).is_some() {
                    return Err(err(ln, toks[1].0, format!("duplicate name `{name}`")));
                }
                let args: Vec<&str> = arg_sorts.iter().map(|(s, _)| s.as_str()).collect();
                sig = sig.with_op(&name, &args, &res);
                let (rows, cols) = match arg_sorts.split_last() {
                    None => (1, 1),
                    Some(((_, last), lead)) => (lead.iter().map(|(_, s)| carriers[*s]).product(), carriers[*last]),
                };
                tables.push(Vec::new());
                pending = Some(PendingTable {
                    op: sig.ops.len() - 1,
                    rows,
                    cols,
                    bound: carriers[ri],
                    started_at: ln,
                    entries: Vec::with_capacity(rows * cols),
                });
            }
            "rel" => {
                if !instances.is_empty() {
                    return Err(err(ln, 1, "declaration after the first instance"));
                }
                if toks.len() < 4 || toks[2].1 != ":" {
                    return Err(err(ln, 1, "expected `rel NAME : SORTS`"));
                }
                let name = ident(ln, toks[1], "a relation name")?;
                let mut args = Vec::new();
                for &tok in &toks[3..] {
                    let s = ident(ln, tok, "a sort name")?;
                    if sig.sort_index(&s).is_none() {
                        return Err(err(ln, tok.0, format!("unknown sort `{s}`")));
                    }
                    args.push(s);
                }
                if sig.op(&name).is_some() || sig.rel(&name).is_some() {
                    return Err(err(ln, toks[1].0, format!("duplicate name `{name}`")));
                }
                let args: Vec<&str> = args.iter().map(String::as_str).collect();
                sig = sig.with_rel(&name, &args);
            }
            "instance" => {
                if toks.len() != 2 {
                    return Err(err(ln, 1, "expected `instance NAME`"));
                }
                let name = ident(ln, toks[1], "an instance name")?;
                if instances.iter().any(|(n, _)| *n == name) {
                    return Err(err(ln, toks[1].0, format!("duplicate instance `{name}`")));
                }
                instances.push((name, BTreeMap::new()));
            }
            _ => {
                let Some((_, interp)) = instances.last_mut() else {
                    return Err(err(ln, toks[0].0, format!("unexpected `{}`", toks[0].1)));
                };
                let Some((head, rest)) = line.split_once(':') else {
                    return Err(err(ln, toks[0].0, "expected `RELATION: TUPLES`"));
                };
                let col0 = toks[0].0;
                let rel = head.trim();
                let Some((_, decl)) = sig.rel(rel) else {
                    return Err(err(ln, col0, format!("unknown relation `{rel}`")));
                };
                let sizes: Vec<(String, usize)> = decl
                    .args
                    .iter()
                    .map(|s| (s.clone(), carriers[sig.sort_index(s).expect("declared")]))
                    .collect();
                let offset = head.chars().count() + 1;
                let tuples = interp.entry(rel.to_string()).or_default();
                for (c, tok) in tokens(rest) {
                    let col = c + offset;
                    let parts: Vec<&str> = tok.split(',').collect();
                    if parts.len() != sizes.len() {
                        return Err(err(
                            ln,
                            col,
                            format!(
                                "tuple `{tok}` has {} components, `{rel}` takes {}",
                                parts.len(),
                                sizes.len()
                            ),
                        ));
                    }
                    let mut tuple = Vec::with_capacity(parts.len());
                    for (p, (sort, n)) in parts.iter().zip(&sizes) {
                        let v = number(ln, (col, p))?;
                        if v >= *n {
                            return Err(err(
                                ln,
                                col,
                                format!("element {v} out of range for sort {sort} of size {n}"),
                            ));
                        }
                        tuple.push(v);
                    }
                    tuples.push(tuple);
                }
            }
        }
    }
    if let Some(t) = pending {
        return Err(err(
            last_line.max(t.started_at),
            1,
            format!(
                "table for `{}` ended after {} of {} rows",
                sig.ops[t.op].name,
                t.entries.len() / t.cols,
                t.rows
            ),
        ));
    }
    if sig.sorts.is_empty() {
        return Err(err(last_line.max(1), 1, "no sorts declared"));
    }
    let algebra = Arc::new(FiniteAlgebra::new(sig, carriers, tables)?);
    let models = instances
        .into_iter()
        .map(|(name, interp)| {
            Model::new(Arc::clone(&algebra), interp).map(|m| (name, m.with_point_cap(limits.max_points)))
        })
        .collect::<Result<Vec<_>>>()?;
    Multimodel::new(algebra, models)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Other(format!("cannot read {}: {e}", path.display())))
}

fn located(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { line, column, message } => {
            Error::Other(format!("{}:{line}:{column}: {message}", path.display()))
        }
        other => other,
    }
}

pub fn parse_model_file(path: &Path, limits: &Limits) -> Result<Multimodel> {
    parse_model_text(&read(path)?, limits).map_err(|e| located(path, e))
}

/// `vars x:s, y:s` on the first line, then one formula per line.
pub fn parse_theory_text(text: &str, sig: &Signature) -> Result<Theory> {
    let mut context: Option<VarContext> = None;
    let mut formulas = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let ln = k + 1;
        let line = strip_comment(raw);
        if line.trim().is_empty() {
            continue;
        }
        match &context {
            None => {
                let rest = line
                    .trim_start()
                    .strip_prefix("vars")
                    .ok_or_else(|| err(ln, 1, "expected `vars` declaration first"))?;
                let ctx = VarContext::parse(rest.trim()).map_err(|e| err(ln, 1, e.to_string()))?;
                ctx.check(sig).map_err(|e| err(ln, 1, e.to_string()))?;
                context = Some(ctx);
            }
            Some(ctx) => {
                let u = parse_formula(line, ctx, sig).map_err(|e| match e {
                    Error::Parse { line, column, message } => err(ln + line - 1, column, message),
                    other => err(ln, 1, other.to_string()),
                })?;
                formulas.push(u);
            }
        }
    }
    let context = context.ok_or_else(|| err(1, 1, "missing `vars` declaration"))?;
    Theory::new(context, formulas)
}

pub fn parse_theory_file(path: &Path, sig: &Signature) -> Result<Theory> {
    parse_theory_text(&read(path)?, sig).map_err(|e| located(path, e))
}

/// Point indices separated by spaces or commas.
pub fn parse_points(text: &str, space: &Arc<PointSpace>) -> Result<PointSet> {
    let mut idx = Vec::new();
    for tok in text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
    {
        let v: usize = tok
            .parse()
            .map_err(|_| Error::Other(format!("expected a point index, found `{tok}`")))?;
        idx.push(v);
    }
    PointSet::from_indices(space, idx)
}

/// `y=add(x,x); z=x` with the left-hand sides in `source` and terms over
/// `target`. Source variables not mentioned map to the same-named target
/// variable.
pub fn parse_substitution(
    text: &str,
    source: &VarContext,
    target: &VarContext,
    sig: &Signature,
) -> Result<Substitution> {
    let mut map: BTreeMap<String, Term> = BTreeMap::new();
    for item in text.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let (lhs, rhs) = item
            .split_once('=')
            .ok_or_else(|| Error::Other(format!("expected `VAR=TERM`, found `{item}`")))?;
        let lhs = lhs.trim();
        if !source.contains(lhs) {
            return Err(Error::UnboundVariable(lhs.to_string()));
        }
        let (term, _) = parse_term(rhs.trim(), target, sig)?;
        if map.insert(lhs.to_string(), term).is_some() {
            return Err(Error::Other(format!("`{lhs}` is mapped twice")));
        }
    }
    for name in source.names() {
        if !map.contains_key(name) {
            map.insert(name.to_string(), Term::var(name));
        }
    }
    Substitution::new(source.clone(), target.clone(), map, sig)
}
