//! Batch command-line surface.
//!
//! Every command is a thin wrapper over a library operation and returns a
//! [`CommandResult`]; the binary only prints it. Exit codes: 0 success, 1 a
//! negative verdict or a failed internal cross-check, 2 a usage or parse
//! error.

pub mod format;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::algebra::{aut_group, Group, Substitution, VarContext};
use crate::autgalois::aut_model;
use crate::config::Limits;
use crate::error::{Error, Result};
use crate::formula::{apply_subst_formula, normalize_elementary, parse_formula, syntactic_support, FreshNames};
use crate::galois::{
    geometric_equiv_bounded, in_closure, rf_family, set_closure, CrossCheck, GeoBounds, GeoVerdict, RfConfig, Theory,
};
use crate::geometry::{eval_formula, semantic_support, Model};
use crate::knowledge::{admissible_sets, kb_equivalent, KnowledgeBase, Multimodel};

use format::{parse_model_file, parse_points, parse_substitution, parse_theory_file};

/// Outcome of one command invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommandResult {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CommandResult {
    fn ok(stdout: String) -> Self {
        CommandResult {
            code: 0,
            stdout,
            stderr: String::new(),
        }
    }

    fn verdict(positive: bool, stdout: String) -> Self {
        CommandResult {
            code: if positive { 0 } else { 1 },
            stdout,
            stderr: String::new(),
        }
    }

    fn usage(message: String) -> Self {
        CommandResult {
            code: 2,
            stdout: String::new(),
            stderr: message,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "algeo", version, about = "Logical geometry over finite multi-sorted models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct InstanceArgs {
    /// Model document.
    #[arg(long)]
    model: PathBuf,
    /// Instance name inside the document.
    #[arg(long)]
    instance: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Value of a formula: the points satisfying it.
    Eval {
        #[command(flatten)]
        target: InstanceArgs,
        #[arg(long)]
        vars: String,
        #[arg(long)]
        formula: String,
    },
    /// Closure A^ff of a point set.
    Closure {
        #[command(flatten)]
        target: InstanceArgs,
        #[arg(long)]
        vars: String,
        /// Point indices, space- or comma-separated.
        #[arg(long, allow_hyphen_values = true)]
        points: String,
    },
    /// Automorphism group of the algebra, or of one instance.
    Aut {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        instance: Option<String>,
    },
    /// Informational equivalence of two knowledge bases.
    KbEquiv { first: PathBuf, second: PathBuf },
    /// Whether a candidate formula lies in the closure of a theory.
    TheoryClosureMember {
        #[command(flatten)]
        target: InstanceArgs,
        #[arg(long)]
        vars: Option<String>,
        /// A theory formula; repeatable.
        #[arg(short = 'T', long = "formula")]
        formulas: Vec<String>,
        /// Theory file; its `vars` line fixes the context.
        #[arg(long)]
        theory: Option<PathBuf>,
        #[arg(long)]
        candidate: String,
    },
    /// Variables a formula's value depends on.
    Support {
        #[command(flatten)]
        target: InstanceArgs,
        #[arg(long)]
        vars: String,
        #[arg(long)]
        formula: String,
    },
    /// Elementary form of a formula, optionally under a substitution.
    Normalize {
        #[arg(long)]
        model: PathBuf,
        /// Context of the result before any fresh variables.
        #[arg(long)]
        vars: String,
        /// Context of the formula when a substitution is applied.
        #[arg(long)]
        source_vars: Option<String>,
        /// `VAR=TERM` pairs separated by `;`.
        #[arg(long)]
        map: Option<String>,
        #[arg(long)]
        formula: String,
    },
    /// Admissibility of a substitution for two point sets.
    Admissible {
        #[command(flatten)]
        target: InstanceArgs,
        /// Context X of the set A (the substitution's target).
        #[arg(long)]
        vars: String,
        /// Context Y of the set B (the substitution's source).
        #[arg(long)]
        source_vars: String,
        #[arg(long)]
        map: String,
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
    },
    /// The definable family R_f(X) as its blocks.
    Rf {
        #[command(flatten)]
        target: InstanceArgs,
        #[arg(long)]
        vars: String,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long, default_value_t = 2)]
        term_depth: usize,
        /// Print a defining formula per block.
        #[arg(long)]
        witness: bool,
    },
    /// Bounded search for a geometric-equivalence disagreement.
    GeoEquiv {
        /// `PATH:INSTANCE`.
        first: String,
        /// `PATH:INSTANCE`.
        second: String,
        #[arg(long, default_value_t = 2)]
        contexts: usize,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 2)]
        theory_size: usize,
        #[arg(long, default_value_t = 2)]
        term_depth: usize,
    },
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CommandResult::ok(text),
                _ => CommandResult::usage(text),
            };
        }
    };
    let limits = Limits::from_env();
    match dispatch(cli.command, &limits) {
        Ok(r) => r,
        Err(e) => CommandResult::usage(format!("error: {e}\n")),
    }
}

fn load(path: &Path, limits: &Limits) -> Result<Multimodel> {
    parse_model_file(path, limits)
}

fn instance(mm: &Multimodel, name: &str) -> Result<Model> {
    mm.instance(name).cloned().ok_or_else(|| Error::UnknownSymbol {
        kind: "instance",
        name: name.to_string(),
    })
}

fn context(text: &str, mm: &Multimodel) -> Result<VarContext> {
    let ctx = VarContext::parse(text)?;
    ctx.check(&mm.algebra().signature)?;
    Ok(ctx)
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" ")
}

fn line(out: &mut String, label: &str, rest: &str) {
    if rest.is_empty() {
        let _ = writeln!(out, "{label}:");
    } else {
        let _ = writeln!(out, "{label}: {rest}");
    }
}

fn print_group(out: &mut String, g: &Group, mm: &Multimodel) {
    line(out, "order", &g.order().to_string());
    for d in g.elements() {
        let _ = writeln!(out, "{}", d.cycle_notation(&mm.algebra().signature));
    }
}

fn split_target(spec: &str) -> Result<(PathBuf, String)> {
    let (path, name) = spec
        .rsplit_once(':')
        .ok_or_else(|| Error::Other(format!("expected PATH:INSTANCE, found `{spec}`")))?;
    Ok((PathBuf::from(path), name.to_string()))
}

fn dispatch(command: Command, limits: &Limits) -> Result<CommandResult> {
    match command {
        Command::Eval { target, vars, formula } => {
            let mm = load(&target.model, limits)?;
            let m = instance(&mm, &target.instance)?;
            let ctx = context(&vars, &mm)?;
            let val = eval_formula(&m, &parse_formula(&formula, &ctx, m.signature())?)?;
            let mut out = String::new();
            line(&mut out, "indices", &val.to_string());
            for i in val.indices() {
                let p = val.space().index_point(i);
                line(&mut out, "point", &p.describe(val.space()));
            }
            Ok(CommandResult::ok(out))
        }
        Command::Closure { target, vars, points } => {
            let mm = load(&target.model, limits)?;
            let m = instance(&mm, &target.instance)?;
            let ctx = context(&vars, &mm)?;
            let a = parse_points(&points, &m.space(&ctx)?)?;
            let report = set_closure(&m, &a)?;
            let mut out = String::new();
            line(&mut out, "indices", &report.closure.to_string());
            for o in &report.orbits {
                line(&mut out, "orbit", &o.to_string());
            }
            let code = match &report.cross_check {
                CrossCheck::Agreed => {
                    line(&mut out, "cross-check", "agreed");
                    0
                }
                CrossCheck::Unavailable(why) => {
                    line(&mut out, "cross-check", &format!("unavailable ({why})"));
                    0
                }
                CrossCheck::Mismatch(other) => {
                    line(
                        &mut out,
                        "cross-check",
                        &format!("MISMATCH definable family gives {other}"),
                    );
                    1
                }
            };
            Ok(CommandResult {
                code,
                stdout: out,
                stderr: String::new(),
            })
        }
        Command::Aut { model, instance: name } => {
            let mm = load(&model, limits)?;
            let g = match name {
                Some(n) => aut_model(&instance(&mm, &n)?),
                None => aut_group(mm.algebra()),
            };
            let mut out = String::new();
            print_group(&mut out, &g, &mm);
            Ok(CommandResult::ok(out))
        }
        Command::KbEquiv { first, second } => {
            let kb1 = KnowledgeBase::new(load(&first, limits)?);
            let kb2 = KnowledgeBase::new(load(&second, limits)?);
            let mut out = String::new();
            match kb_equivalent(&kb1, &kb2) {
                Some(w) => {
                    line(&mut out, "verdict", "EQUIVALENT");
                    for (f, g) in &w.alpha {
                        line(&mut out, "alpha", &format!("{f} -> {g}"));
                    }
                    for (f, d) in &w.deltas {
                        let _ = writeln!(
                            out,
                            "delta[{f}]: {}",
                            d.cycle_notation(&kb1.multimodel.algebra().signature)
                        );
                    }
                    Ok(CommandResult::ok(out))
                }
                None => {
                    line(&mut out, "verdict", "NOT-EQUIVALENT");
                    Ok(CommandResult::verdict(false, out))
                }
            }
        }
        Command::TheoryClosureMember {
            target,
            vars,
            formulas,
            theory,
            candidate,
        } => {
            let mm = load(&target.model, limits)?;
            let m = instance(&mm, &target.instance)?;
            let sig = m.signature();
            let mut t = match (&theory, &vars) {
                (Some(path), _) => parse_theory_file(path, sig)?,
                (None, Some(v)) => Theory::empty(context(v, &mm)?),
                (None, None) => return Err(Error::Other("either --vars or --theory is required".into())),
            };
            if let (Some(_), Some(v)) = (&theory, &vars) {
                if context(v, &mm)? != *t.context() {
                    return Err(Error::ContextMismatch("--vars differs from the theory file".into()));
                }
            }
            let ctx = t.context().clone();
            for f in &formulas {
                t.push(parse_formula(f, &ctx, sig)?)?;
            }
            let v = parse_formula(&candidate, &ctx, sig)?;
            let member = in_closure(&m, &t, &v)?;
            Ok(CommandResult::verdict(member, format!("{member}\n")))
        }
        Command::Support { target, vars, formula } => {
            let mm = load(&target.model, limits)?;
            let m = instance(&mm, &target.instance)?;
            let ctx = context(&vars, &mm)?;
            let u = parse_formula(&formula, &ctx, m.signature())?;
            let mut out = String::new();
            line(&mut out, "support", &join(semantic_support(&m, &u)?));
            line(&mut out, "free", &join(syntactic_support(&u)?));
            Ok(CommandResult::ok(out))
        }
        Command::Normalize {
            model,
            vars,
            source_vars,
            map,
            formula,
        } => {
            let mm = load(&model, limits)?;
            let sig = &mm.algebra().signature;
            let target = context(&vars, &mm)?;
            let source = match &source_vars {
                Some(s) => context(s, &mm)?,
                None => target.clone(),
            };
            let s = match &map {
                Some(text) => parse_substitution(text, &source, &target, sig)?,
                None if source == target => Substitution::identity(&target),
                None => return Err(Error::Other("--source-vars needs --map".into())),
            };
            let u = parse_formula(&formula, &source, sig)?;
            let lazy = if s.is_identity() && source == target {
                u
            } else {
                apply_subst_formula(&s, &u)?
            };
            let v = normalize_elementary(&lazy, &mut FreshNames::new())?;
            let mut out = String::new();
            line(&mut out, "context", &v.context.to_string());
            line(&mut out, "formula", &v.body.to_string());
            Ok(CommandResult::ok(out))
        }
        Command::Admissible {
            target,
            vars,
            source_vars,
            map,
            a,
            b,
        } => {
            let mm = load(&target.model, limits)?;
            let m = instance(&mm, &target.instance)?;
            let x = context(&vars, &mm)?;
            let y = context(&source_vars, &mm)?;
            let s = parse_substitution(&map, &y, &x, m.signature())?;
            let a = parse_points(&a, &m.space(&x)?)?;
            let b = parse_points(&b, &m.space(&y)?)?;
            let ok = admissible_sets(&s, &a, &b)?;
            Ok(CommandResult::verdict(ok, format!("admissible: {ok}\n")))
        }
        Command::Rf {
            target,
            vars,
            budget,
            term_depth,
            witness,
        } => {
            let mm = load(&target.model, limits)?;
            let m = instance(&mm, &target.instance)?;
            let ctx = context(&vars, &mm)?;
            let fam = rf_family(&m, &ctx, &RfConfig { budget, term_depth })?;
            let mut out = String::new();
            line(&mut out, "blocks", &fam.block_count().to_string());
            line(&mut out, "members", &fam.len().to_string());
            for blk in fam.blocks() {
                line(&mut out, "block", &blk.to_string());
                if witness {
                    if let Some(w) = fam.witness(blk)? {
                        line(&mut out, "witness", &w.body.to_string());
                    }
                }
            }
            if witness {
                if let Some(c) = fam.witness_context() {
                    line(&mut out, "witness-context", &c.to_string());
                }
            }
            if fam.block_count() <= 6 {
                for set in fam.sets()? {
                    line(&mut out, "set", &set.to_string());
                }
            }
            if let Some(c) = fam.convergence() {
                if !c.converged() {
                    line(
                        &mut out,
                        "warning",
                        &format!(
                            "{} blocks but {} automorphism orbits; raise --budget or --term-depth",
                            c.block_count, c.orbit_count
                        ),
                    );
                }
            }
            Ok(CommandResult::ok(out))
        }
        Command::GeoEquiv {
            first,
            second,
            contexts,
            depth,
            theory_size,
            term_depth,
        } => {
            if depth > limits.formula_depth {
                return Err(Error::Other(format!(
                    "--depth {depth} exceeds the formula depth limit of {}",
                    limits.formula_depth
                )));
            }
            let (p1, n1) = split_target(&first)?;
            let (p2, n2) = split_target(&second)?;
            let m1 = instance(&load(&p1, limits)?, &n1)?;
            let m2 = instance(&load(&p2, limits)?, &n2)?;
            let bounds = GeoBounds {
                context_bound: contexts,
                depth,
                theory_size,
                term_depth,
                ..GeoBounds::default()
            };
            let report = geometric_equiv_bounded(&m1, &m2, &bounds)?;
            let mut out = String::new();
            let positive = match &report.verdict {
                GeoVerdict::Disagree(w) => {
                    line(&mut out, "verdict", "DISAGREE");
                    line(&mut out, "context", &w.theory.context().to_string());
                    for u in w.theory.formulas() {
                        line(&mut out, "theory", &u.to_string());
                    }
                    line(&mut out, "candidate", &w.candidate.to_string());
                    let says = |b: bool| if b { "in-closure" } else { "not-in-closure" };
                    line(&mut out, &n1, says(w.in_first));
                    line(&mut out, &n2, says(w.in_second));
                    false
                }
                GeoVerdict::NoDisagreementUpToBounds => {
                    line(&mut out, "verdict", "NO-DISAGREEMENT-UP-TO-BOUNDS");
                    true
                }
            };
            line(
                &mut out,
                "checked",
                &format!(
                    "contexts={} values={} theories={}",
                    report.contexts_checked, report.values_checked, report.theories_checked
                ),
            );
            Ok(CommandResult::verdict(positive, out))
        }
    }
}
