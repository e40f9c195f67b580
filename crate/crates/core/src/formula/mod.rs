//! First-order formulas over a signature.
//!
//! A [`Formula`] is built from equalities of terms and relation atoms with
//! `∨ ∧ ¬ ∃x`, plus explicit substitution nodes `s_* u`. Every formula lives
//! over exactly one variable context, recorded by [`TypedFormula`]; quantifiers
//! bind variables of that context. Universal quantification is sugar for
//! `¬∃x¬` and is expanded by the parser.

mod normalize;
mod parser;

pub use normalize::{normalize_elementary, FreshNames};
pub use parser::{parse_formula, parse_term};

use std::collections::BTreeSet;
use std::fmt;

use crate::algebra::{Signature, Substitution, Term, VarContext};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Equal(Term, Term),
    Rel(String, Vec<Term>),
    Or(Box<Formula>, Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Not(Box<Formula>),
    Exists(String, Box<Formula>),
    /// `s_* body`: `body` is typed over `s.source()`, the node over `s.target()`.
    Subst(Box<Substitution>, Box<Formula>),
}

impl Formula {
    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Equal(a, b)
    }

    pub fn rel(name: &str, args: Vec<Term>) -> Formula {
        Formula::Rel(name.to_string(), args)
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Formula) -> Formula {
        Formula::Not(Box::new(a))
    }

    pub fn exists(var: &str, body: Formula) -> Formula {
        Formula::Exists(var.to_string(), Box::new(body))
    }

    pub fn forall(var: &str, body: Formula) -> Formula {
        Formula::not(Formula::exists(var, Formula::not(body)))
    }

    pub fn subst(s: Substitution, body: Formula) -> Formula {
        Formula::Subst(Box::new(s), Box::new(body))
    }

    pub fn contains_subst(&self) -> bool {
        match self {
            Formula::Equal(..) | Formula::Rel(..) => false,
            Formula::Or(a, b) | Formula::And(a, b) => a.contains_subst() || b.contains_subst(),
            Formula::Not(a) | Formula::Exists(_, a) => a.contains_subst(),
            Formula::Subst(..) => true,
        }
    }

    /// Nesting depth of connectives, quantifiers and substitution nodes.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Equal(..) | Formula::Rel(..) => 0,
            Formula::Or(a, b) | Formula::And(a, b) => 1 + a.depth().max(b.depth()),
            Formula::Not(a) | Formula::Exists(_, a) | Formula::Subst(_, a) => 1 + a.depth(),
        }
    }

    /// Checks well-typedness over `ctx`.
    pub fn check(&self, ctx: &VarContext, sig: &Signature) -> Result<()> {
        match self {
            Formula::Equal(a, b) => {
                let sa = a.sort_in(ctx, sig)?;
                let sb = b.sort_in(ctx, sig)?;
                if sa != sb {
                    return Err(Error::SortMismatch {
                        place: format!("equality {a} == {b}"),
                        expected: sa,
                        found: sb,
                    });
                }
                Ok(())
            }
            Formula::Rel(name, args) => {
                let (_, decl) = sig.rel(name).ok_or_else(|| Error::UnknownSymbol {
                    kind: "relation",
                    name: name.clone(),
                })?;
                if decl.args.len() != args.len() {
                    return Err(Error::ArityMismatch {
                        name: name.clone(),
                        expected: decl.args.len(),
                        found: args.len(),
                    });
                }
                for (i, (t, expected)) in args.iter().zip(&decl.args).enumerate() {
                    let found = t.sort_in(ctx, sig)?;
                    if &found != expected {
                        return Err(Error::SortMismatch {
                            place: format!("argument {} of `{name}`", i + 1),
                            expected: expected.clone(),
                            found,
                        });
                    }
                }
                Ok(())
            }
            Formula::Or(a, b) | Formula::And(a, b) => {
                a.check(ctx, sig)?;
                b.check(ctx, sig)
            }
            Formula::Not(a) => a.check(ctx, sig),
            Formula::Exists(x, a) => {
                if !ctx.contains(x) {
                    return Err(Error::UnboundVariable(x.clone()));
                }
                a.check(ctx, sig)
            }
            Formula::Subst(s, a) => {
                if s.target() != ctx {
                    return Err(Error::ContextMismatch(format!(
                        "substitution targets {{{}}} but is used over {{{ctx}}}",
                        s.target()
                    )));
                }
                a.check(s.source(), sig)
            }
        }
    }

    /// Free variables; defined for elementary formulas only.
    pub fn free_vars(&self) -> Result<BTreeSet<String>> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out)?;
        Ok(out)
    }

    fn collect_free(&self, out: &mut BTreeSet<String>) -> Result<()> {
        match self {
            Formula::Equal(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Formula::Rel(_, args) => args.iter().for_each(|t| t.collect_vars(out)),
            Formula::Or(a, b) | Formula::And(a, b) => {
                a.collect_free(out)?;
                b.collect_free(out)?;
            }
            Formula::Not(a) => a.collect_free(out)?,
            Formula::Exists(x, a) => {
                let mut inner = BTreeSet::new();
                a.collect_free(&mut inner)?;
                inner.remove(x);
                out.extend(inner);
            }
            Formula::Subst(..) => return Err(Error::NotElementary),
        }
        Ok(())
    }
}

// Precedence levels used by the printer: `|` < `&` < unary.
const OR: u8 = 1;
const AND: u8 = 2;
const UNARY: u8 = 3;

impl Formula {
    fn write_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        match self {
            Formula::Equal(a, b) => write!(f, "{a} == {b}"),
            Formula::Rel(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Formula::Or(a, b) => {
                let paren = prec > OR;
                if paren {
                    f.write_str("(")?;
                }
                a.write_prec(f, OR)?;
                f.write_str(" | ")?;
                b.write_prec(f, AND)?;
                if paren {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Formula::And(a, b) => {
                let paren = prec > AND;
                if paren {
                    f.write_str("(")?;
                }
                a.write_prec(f, AND)?;
                f.write_str(" & ")?;
                b.write_prec(f, UNARY)?;
                if paren {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Formula::Not(a) => {
                f.write_str("!")?;
                a.write_prec(f, UNARY)
            }
            Formula::Exists(x, a) => {
                // A quantifier's scope runs to the end, so it is bracketed
                // anywhere but the top.
                let paren = prec > 0;
                if paren {
                    f.write_str("(")?;
                }
                write!(f, "E {x}. ")?;
                a.write_prec(f, 0)?;
                if paren {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Formula::Subst(s, a) => {
                write!(f, "{s}(")?;
                a.write_prec(f, 0)?;
                f.write_str(")")
            }
        }
    }
}

/// Prints in the concrete syntax accepted by [`parse_formula`]. Substitution
/// nodes print as `[x:=t](body)`, which the parser does not accept.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prec(f, 0)
    }
}

/// A formula together with its type, the context it is written over.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TypedFormula {
    pub context: VarContext,
    pub body: Formula,
}

impl TypedFormula {
    pub fn new(context: VarContext, body: Formula, sig: &Signature) -> Result<Self> {
        context.check(sig)?;
        body.check(&context, sig)?;
        Ok(TypedFormula { context, body })
    }

    /// No substitution nodes (quantifiers always bind context variables).
    pub fn is_elementary(&self) -> bool {
        !self.body.contains_subst()
    }
}

impl fmt::Display for TypedFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.body)
    }
}

/// Builds the lazy node `s_* u`, typed over `s.target()`.
pub fn apply_subst_formula(s: &Substitution, u: &TypedFormula) -> Result<TypedFormula> {
    if s.source() != &u.context {
        return Err(Error::ContextMismatch(format!(
            "formula is typed over {{{}}}, substitution source is {{{}}}",
            u.context,
            s.source()
        )));
    }
    Ok(TypedFormula {
        context: s.target().clone(),
        body: Formula::subst(s.clone(), u.body.clone()),
    })
}

/// Context variables occurring free in an elementary formula.
pub fn syntactic_support(u: &TypedFormula) -> Result<BTreeSet<String>> {
    u.body.free_vars()
}
