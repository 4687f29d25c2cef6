//! Theory text format.
//!
//! ```text
//! # comment
//! theory NAME {
//!   provenance "free text";
//!   sort S;
//!   total op f : S1 S2 -> S;
//!   partial op g : S -> S when eta(x1) = eps(x1), ...;
//!   eq x:S, y:S |- lhs = rhs;
//! }
//! ```
//!
//! Identifiers may contain `@`, `'` and balanced `[...]` groups, so generated
//! sort names such as `th[x1:star|x1]@0` lex as a single token.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::theory::{
    check_sorting, Context, Equation, OpSymbol, RawTerm, SortId, Term, Theory, Totality,
    TypedTerm,
};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Str(String),
    Punct(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '@' | '\'' | '.')
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, col, expected: &str| Error::Parse {
        line,
        col,
        expected: expected.to_string(),
    };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (tl, tc) = (line, col);
        if is_ident_start(c) {
            let mut s = String::new();
            while i < chars.len() {
                let d = chars[i];
                if is_ident_continue(d) {
                    s.push(d);
                    i += 1;
                    col += 1;
                } else if d == '[' {
                    let mut depth = 0usize;
                    loop {
                        let Some(&e) = chars.get(i) else {
                            return Err(err(line, col, "`]`"));
                        };
                        if e == '\n' {
                            return Err(err(line, col, "`]` before end of line"));
                        }
                        s.push(e);
                        i += 1;
                        col += 1;
                        if e == '[' {
                            depth += 1;
                        } else if e == ']' {
                            depth -= 1;
                            if depth == 0 {
                                break;
                            }
                        }
                    }
                } else {
                    break;
                }
            }
            out.push(Token { tok: Tok::Ident(s), line: tl, col: tc });
            continue;
        }
        if c == '"' {
            let mut s = String::new();
            i += 1;
            col += 1;
            loop {
                match chars.get(i) {
                    None | Some('\n') => return Err(err(line, col, "closing `\"`")),
                    Some('"') => {
                        i += 1;
                        col += 1;
                        break;
                    }
                    Some(&d) => {
                        s.push(d);
                        i += 1;
                        col += 1;
                    }
                }
            }
            out.push(Token { tok: Tok::Str(s), line: tl, col: tc });
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let punct: &'static str = match two.as_str() {
            "->" => "->",
            "|-" => "|-",
            _ => match c {
                '{' => "{",
                '}' => "}",
                ';' => ";",
                ':' => ":",
                ',' => ",",
                '(' => "(",
                ')' => ")",
                '=' => "=",
                _ => return Err(err(line, col, "a token")),
            },
        };
        i += punct.len();
        col += punct.len();
        out.push(Token { tok: Tok::Punct(punct), line: tl, col: tc });
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Self> {
        Ok(Parser { toks: lex(src)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn fail<T>(&self, expected: &str) -> Result<T> {
        let (line, col) = self.here();
        Err(Error::Parse {
            line,
            col,
            expected: expected.to_string(),
        })
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, p: &str) -> bool {
        if matches!(self.peek(), Tok::Punct(q) if *q == p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, p: &str) -> Result<()> {
        if self.eat(p) {
            Ok(())
        } else {
            self.fail(&format!("`{p}`"))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        if self.is_keyword(kw) {
            self.bump();
            Ok(())
        } else {
            self.fail(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.fail(what),
        }
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    fn raw_term(&mut self) -> Result<RawTerm> {
        let head = self.ident("a term")?;
        if self.eat("(") {
            let mut args = Vec::new();
            if !self.eat(")") {
                loop {
                    args.push(self.raw_term()?);
                    if self.eat(")") {
                        break;
                    }
                    self.expect(",")?;
                }
            }
            Ok(RawTerm::app(head, args))
        } else {
            Ok(RawTerm::ident(head))
        }
    }

    /// `x:S, y:S` up to (not including) `|-`. May be empty.
    fn context(&mut self) -> Result<Context> {
        let mut ctx = Context::new();
        if matches!(self.peek(), Tok::Punct("|-")) {
            return Ok(ctx);
        }
        loop {
            let name = self.ident("a variable name")?;
            self.expect(":")?;
            let sort = self.ident("a sort name")?;
            if ctx.index_of(&name).is_some() {
                return self.fail(&format!("a fresh variable name (`{name}` repeats)"));
            }
            ctx.push(name, SortId::new(sort));
            if !self.eat(",") {
                break;
            }
        }
        Ok(ctx)
    }

    fn term_in(&mut self, theory: &Theory, ctx: &Context) -> Result<Term> {
        let (line, col) = self.here();
        let raw = self.raw_term()?;
        check_sorting(theory, ctx, &raw)
            .map(|(t, _)| t)
            .map_err(|e| Error::Parse {
                line,
                col,
                expected: format!("a well-sorted term ({e})"),
            })
    }

    fn equation_in(&mut self, theory: &Theory, ctx: &Context) -> Result<Equation> {
        let (line, col) = self.here();
        let lhs = self.term_in(theory, ctx)?;
        self.expect("=")?;
        let rhs = self.term_in(theory, ctx)?;
        let eq = Equation::new(ctx.clone(), lhs, rhs);
        theory.check_equation(&eq).map_err(|e| Error::Parse {
            line,
            col,
            expected: format!("sides of equal sort ({e})"),
        })?;
        Ok(eq)
    }
}

/// Parse a theory file. Sorting errors are reported at the offending term.
/// `when` clauses are resolved against all declared symbols so that a clause
/// citing a partial symbol parses and is reported by `validate_theory`.
pub fn parse_theory(src: &str) -> Result<Theory> {
    let mut p = Parser::new(src)?;
    p.keyword("theory")?;
    let name = p.ident("a theory name")?;
    let mut theory = Theory::new(name);
    p.expect("{")?;
    // Def clauses may mention symbols declared later; resolve them at the end.
    let mut pending_defs: Vec<(usize, usize, usize)> = Vec::new();
    let mut saved_positions = Vec::new();
    loop {
        if p.eat("}") {
            break;
        }
        let (line, col) = p.here();
        if p.is_keyword("sort") {
            p.bump();
            let s = p.ident("a sort name")?;
            theory.add_sort(s.as_str()).map_err(|e| Error::Parse {
                line,
                col,
                expected: format!("a new sort ({e})"),
            })?;
            p.expect(";")?;
        } else if p.is_keyword("provenance") {
            p.bump();
            match p.bump() {
                Tok::Str(s) => theory.set_provenance(Some(s)),
                _ => return Err(Error::Parse { line, col, expected: "a string".into() }),
            }
            p.expect(";")?;
        } else if p.is_keyword("total") || p.is_keyword("partial") {
            let total = p.is_keyword("total");
            p.bump();
            p.keyword("op")?;
            let name = p.ident("an operation name")?;
            p.expect(":")?;
            let mut args = Vec::new();
            while !matches!(p.peek(), Tok::Punct("->")) {
                args.push(SortId::new(p.ident("a sort name or `->`")?));
            }
            p.expect("->")?;
            let result = SortId::new(p.ident("a result sort")?);
            let totality = if total {
                Totality::Total
            } else {
                Totality::Partial(Vec::new())
            };
            if !total && p.is_keyword("when") {
                p.bump();
                saved_positions.push(p.pos);
                // skip clause tokens up to `;`
                let mut depth = 0i32;
                loop {
                    match p.peek() {
                        Tok::Punct("(") => depth += 1,
                        Tok::Punct(")") => depth -= 1,
                        Tok::Punct(";") if depth == 0 => break,
                        Tok::Eof => return p.fail("`;`"),
                        _ => {}
                    }
                    p.bump();
                }
                pending_defs.push((theory.ops().len(), line, col));
            }
            theory
                .add_op(OpSymbol {
                    name,
                    arg_sorts: args,
                    result_sort: result,
                    totality,
                })
                .map_err(|e| Error::Parse {
                    line,
                    col,
                    expected: format!("a new operation ({e})"),
                })?;
            p.expect(";")?;
        } else if p.is_keyword("eq") {
            p.bump();
            let ctx = p.context()?;
            p.expect("|-")?;
            let eq = p.equation_in(&theory, &ctx)?;
            theory.add_equation(eq);
            p.expect(";")?;
        } else {
            return p.fail("`sort`, `total`, `partial`, `eq`, `provenance` or `}`");
        }
    }
    if !p.at_eof() {
        return p.fail("end of input");
    }
    let end = p.pos;
    let mut ops: Vec<OpSymbol> = theory.ops().to_vec();
    for ((op_idx, _, _), start) in pending_defs.iter().zip(saved_positions) {
        p.pos = start;
        let ctx = Context::positional(&ops[*op_idx].arg_sorts);
        let mut eqs = Vec::new();
        loop {
            eqs.push(p.equation_in(&theory, &ctx)?);
            if !p.eat(",") {
                break;
            }
        }
        ops[*op_idx].totality = Totality::Partial(eqs);
    }
    p.pos = end;
    let mut rebuilt = Theory::new(theory.name.clone());
    rebuilt.set_provenance(theory.provenance().map(str::to_string));
    for s in theory.sorts() {
        rebuilt.add_sort(s.clone())?;
    }
    for op in ops {
        rebuilt.add_op(op)?;
    }
    for eq in theory.equations() {
        rebuilt.add_equation(eq.clone());
    }
    Ok(rebuilt)
}

/// Print a theory in the text format. `parse_theory(print_theory(t)) == t`.
pub fn print_theory(t: &Theory) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "theory {} {{", t.name);
    if let Some(p) = t.provenance() {
        let _ = writeln!(out, "  provenance \"{p}\";");
    }
    for s in t.sorts() {
        let _ = writeln!(out, "  sort {s};");
    }
    for op in t.ops() {
        let args: Vec<&str> = op.arg_sorts.iter().map(SortId::as_str).collect();
        let sig = if args.is_empty() {
            format!("-> {}", op.result_sort)
        } else {
            format!("{} -> {}", args.join(" "), op.result_sort)
        };
        match &op.totality {
            Totality::Total => {
                let _ = writeln!(out, "  total op {} : {};", op.name, sig);
            }
            Totality::Partial(eqs) if eqs.is_empty() => {
                let _ = writeln!(out, "  partial op {} : {};", op.name, sig);
            }
            Totality::Partial(eqs) => {
                let clauses: Vec<String> = eqs
                    .iter()
                    .map(|e| format!("{} = {}", e.lhs.display(&e.ctx), e.rhs.display(&e.ctx)))
                    .collect();
                let _ = writeln!(out, "  partial op {} : {} when {};", op.name, sig, clauses.join(", "));
            }
        }
    }
    for eq in t.equations() {
        let _ = writeln!(
            out,
            "  eq {} |- {} = {};",
            eq.ctx,
            eq.lhs.display(&eq.ctx),
            eq.rhs.display(&eq.ctx)
        );
    }
    out.push_str("}\n");
    out
}

/// Parse a term against a theory and an explicit context.
pub fn parse_term(theory: &Theory, ctx: &Context, src: &str) -> Result<(Term, SortId)> {
    let mut p = Parser::new(src)?;
    let (line, col) = p.here();
    let raw = p.raw_term()?;
    if !p.at_eof() {
        return p.fail("end of term");
    }
    check_sorting(theory, ctx, &raw).map_err(|e| match e {
        Error::Parse { .. } => e,
        other => Error::Parse {
            line,
            col,
            expected: format!("a well-sorted term ({other})"),
        },
    })
}

/// Parse a context `x:S, y:S` (possibly empty).
pub fn parse_context(src: &str) -> Result<Context> {
    let mut p = Parser::new(src)?;
    if p.at_eof() {
        return Ok(Context::new());
    }
    let mut ctx = Context::new();
    loop {
        let name = p.ident("a variable name")?;
        p.expect(":")?;
        let sort = p.ident("a sort name")?;
        ctx.push(name, SortId::new(sort));
        if !p.eat(",") {
            break;
        }
    }
    if !p.at_eof() {
        return p.fail("end of context");
    }
    Ok(ctx)
}

/// Split `ctx |- term` syntactically, without a theory.
pub fn parse_raw_typed(src: &str) -> Result<(Context, RawTerm)> {
    let mut p = Parser::new(src)?;
    let ctx = p.context()?;
    p.expect("|-")?;
    let raw = p.raw_term()?;
    if !p.at_eof() {
        return p.fail("end of input");
    }
    Ok((ctx, raw))
}

/// Parse `ctx |- term` against a theory.
pub fn parse_typed_term(theory: &Theory, src: &str) -> Result<TypedTerm> {
    let (ctx, raw) = parse_raw_typed(src)?;
    for (_, s) in ctx.iter() {
        if !theory.has_sort(s) {
            return Err(Error::UnknownSort(s.to_string()));
        }
    }
    let (term, _) = check_sorting(theory, &ctx, &raw)?;
    Ok(TypedTerm::new(ctx, term))
}

/// Parse a raw term without resolving it.
pub fn parse_raw_term(src: &str) -> Result<RawTerm> {
    let mut p = Parser::new(src)?;
    let raw = p.raw_term()?;
    if !p.at_eof() {
        return p.fail("end of term");
    }
    Ok(raw)
}

/// Infer a context for raw terms whose free identifiers are variables: any
/// bare identifier that is not a constant of the theory. Sorts come from
/// argument positions; a variable seen only at the root of one side takes
/// the sort of the other side. Variables are ordered by first occurrence.
pub fn infer_context(theory: &Theory, sides: &[&RawTerm]) -> Result<Context> {
    fn walk(
        theory: &Theory,
        raw: &RawTerm,
        expected: Option<&SortId>,
        found: &mut Vec<(String, Option<SortId>)>,
    ) -> Result<()> {
        match &raw.args {
            None if theory.op(&raw.head).is_none() => {
                match found.iter_mut().find(|(n, _)| n == &raw.head) {
                    Some((_, s)) => {
                        if let (Some(old), Some(new)) = (s.as_ref(), expected) {
                            if old != new {
                                return Err(Error::SortMismatch {
                                    path: vec![],
                                    expected: old.to_string(),
                                    found: new.to_string(),
                                });
                            }
                        }
                        if s.is_none() {
                            *s = expected.cloned();
                        }
                    }
                    None => found.push((raw.head.clone(), expected.cloned())),
                }
                Ok(())
            }
            None => Ok(()),
            Some(args) => {
                let op = theory
                    .op(&raw.head)
                    .ok_or_else(|| Error::UnknownSymbol(raw.head.clone()))?;
                for (a, s) in args.iter().zip(&op.arg_sorts) {
                    walk(theory, a, Some(s), found)?;
                }
                Ok(())
            }
        }
    }
    let mut found = Vec::new();
    let mut root_sorts = Vec::new();
    for side in sides {
        walk(theory, side, None, &mut found)?;
        root_sorts.push(side.args.as_ref().and_then(|_| theory.op(&side.head)).map(|o| o.result_sort.clone()));
    }
    let fallback = root_sorts.iter().flatten().next().cloned().or_else(|| {
        if theory.sorts().len() == 1 {
            Some(theory.sorts()[0].clone())
        } else {
            None
        }
    });
    let mut ctx = Context::new();
    for (name, sort) in found {
        let sort = sort
            .or_else(|| fallback.clone())
            .ok_or_else(|| Error::Invalid(format!("cannot infer the sort of `{name}`")))?;
        ctx.push(name, sort);
    }
    Ok(ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::validate_theory;

    const SRC: &str = "# toy\ntheory toy {\n  sort s;\n  sort s';\n  total op eta : s -> s';\n  total op eps : s -> s';\n  partial op pi : s -> s when eta(x1) = eps(x1);\n  eq x:s |- pi(x) = x;\n}\n";

    #[test]
    fn parses_and_round_trips() {
        let t = parse_theory(SRC).unwrap();
        assert_eq!(t.sorts().len(), 2);
        assert_eq!(t.ops().len(), 3);
        let printed = print_theory(&t);
        assert_eq!(parse_theory(&printed).unwrap(), t);
        assert_eq!(print_theory(&parse_theory(&printed).unwrap()), printed);
    }

    #[test]
    fn bracketed_identifiers() {
        let src = "theory g { sort star; sort th[x1:star|x1]; sort th'[x1:star|x1]@0; }";
        let t = parse_theory(src).unwrap();
        assert_eq!(t.sorts()[2].as_str(), "th'[x1:star|x1]@0");
    }

    #[test]
    fn error_positions() {
        let err = parse_theory("theory t {\n  sort s\n}").unwrap_err();
        assert_eq!(
            err,
            Error::Parse { line: 3, col: 1, expected: "`;`".into() }
        );
        let err = parse_theory("theory t { sort s; total op f : s -> s; eq x:s |- f(f) = x; }")
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, col: 51, .. }), "{err:?}");
    }

    #[test]
    fn when_clause_citing_partial_surfaces_in_validation() {
        let src = "theory t { sort s; partial op p : s -> s when x1 = x1; partial op q : s -> s when p(x1) = x1; }";
        let t = parse_theory(src).unwrap();
        let rep = validate_theory(&t);
        assert!(!rep.is_ok());
        assert!(rep.violations[0].subject.starts_with("q when"));
    }

    #[test]
    fn empty_body() {
        let t = parse_theory("theory e { }").unwrap();
        assert!(t.sorts().is_empty());
        assert_eq!(validate_theory(&t).warnings.len(), 1);
    }

    #[test]
    fn infers_contexts() {
        let t = parse_theory("theory b { sort s; total op m : s s -> s; }").unwrap();
        let l = parse_raw_term("m(x,y)").unwrap();
        let r = parse_raw_term("m(y,x)").unwrap();
        let ctx = infer_context(&t, &[&l, &r]).unwrap();
        assert_eq!(ctx.len(), 2);
        assert_eq!(ctx.name(0), "x");
    }
}
