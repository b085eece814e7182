//! Line-oriented text formats for structures, specs, operation tables and
//! templates. Emission is canonical: relations in signature order, tuples
//! sorted, so equal objects print byte-identically.
//!
//! ```text
//! signature E/2
//! structure K2 {
//!   elements a b;
//!   E(a b)
//!   E(b a)
//! }
//! ```

use std::collections::HashMap;
use std::fmt::Write;

use crate::agespec::{Atom, BoundSpec, Clause, DTypeTable, Literal};
use crate::construct::{OrbitTemplate, PcspTemplate};
use crate::error::{Error, Result};
use crate::polyfind::OperationTable;
use crate::relcore::{FiniteStructure, Relation, Signature};

#[derive(Clone, Debug)]
struct Tok {
    text: String,
    line: usize,
    col: usize,
}

fn is_hard_punct(c: char) -> bool {
    matches!(c, '(' | ')' | ';' | '#')
}

fn is_soft_punct(c: char) -> bool {
    matches!(c, '{' | '}' | '|')
}

fn lex(src: &str) -> Vec<Tok> {
    let mut out = Vec::new();
    for (li, line) in src.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            let start = i;
            if is_hard_punct(c) || is_soft_punct(c) {
                i += 1;
            } else if c == '"' {
                i += 1;
                while i < chars.len() && chars[i] != '"' {
                    i += 1;
                }
                i = (i + 1).min(chars.len());
            } else {
                // Derived symbol names carry braces and bars after their `@`.
                let mut derived = false;
                while i < chars.len() {
                    let ch = chars[i];
                    if ch.is_whitespace() || is_hard_punct(ch) || (!derived && is_soft_punct(ch)) {
                        break;
                    }
                    derived |= ch == '@';
                    i += 1;
                }
            }
            out.push(Tok { text: chars[start..i].iter().collect(), line: li + 1, col: start + 1 });
        }
    }
    out
}

fn is_word(s: &str) -> bool {
    let mut derived = false;
    !s.is_empty()
        && !s.starts_with('"')
        && s.chars().all(|c| {
            let ok = !(c.is_whitespace() || is_hard_punct(c) || (!derived && is_soft_punct(c)));
            derived |= c == '@';
            ok
        })
}

/// A name as a bare word when possible, else in double quotes.
fn quote(name: &str) -> String {
    if is_word(name) {
        name.to_string()
    } else {
        format!("\"{name}\"")
    }
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn new(src: &str) -> Parser {
        let lines = src.lines().count().max(1);
        let last = src.lines().last().map_or(0, |l| l.chars().count());
        Parser { toks: lex(src), pos: 0, end: (lines, last + 1) }
    }

    fn err_at(&self, tok: Option<&Tok>, msg: impl Into<String>) -> Error {
        let (line, col) = tok.map_or(self.end, |t| (t.line, t.col));
        Error::Parse { line, col, msg: msg.into() }
    }

    fn peek(&self) -> Option<&str> {
        self.toks.get(self.pos).map(|t| t.text.as_str())
    }

    fn next(&mut self, what: &str) -> Result<Tok> {
        match self.toks.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.clone())
            }
            None => Err(self.err_at(None, format!("expected {what}, found end of input"))),
        }
    }

    fn expect(&mut self, text: &str) -> Result<Tok> {
        let t = self.next(&format!("`{text}`"))?;
        if t.text != text {
            return Err(self.err_at(Some(&t), format!("expected `{text}`, found `{}`", t.text)));
        }
        Ok(t)
    }

    fn word(&mut self, what: &str) -> Result<Tok> {
        let t = self.next(what)?;
        if !is_word(&t.text) {
            return Err(self.err_at(Some(&t), format!("expected {what}, found `{}`", t.text)));
        }
        Ok(t)
    }

    /// A bare word or a double-quoted string.
    fn name(&mut self, what: &str) -> Result<String> {
        let t = self.next(what)?;
        if let Some(inner) = t.text.strip_prefix('"') {
            return match inner.strip_suffix('"') {
                Some(n) if !n.is_empty() => Ok(n.to_string()),
                _ => Err(self.err_at(Some(&t), "unterminated or empty quoted name")),
            };
        }
        if !is_word(&t.text) {
            return Err(self.err_at(Some(&t), format!("expected {what}, found `{}`", t.text)));
        }
        Ok(t.text)
    }

    fn eat(&mut self, text: &str) -> bool {
        if self.peek() == Some(text) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn done(&self) -> Result<()> {
        match self.toks.get(self.pos) {
            None => Ok(()),
            Some(t) => Err(self.err_at(Some(t), format!("unexpected `{}` after the end", t.text))),
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        let t = self.word(what)?;
        t.text.parse().map_err(|_| self.err_at(Some(&t), format!("expected {what}, found `{}`", t.text)))
    }

    /// `name/arity` items up to (not including) a token in `stop`.
    fn signature(&mut self, stop: &[&str]) -> Result<Signature> {
        let mut sig = Signature::default();
        while let Some(p) = self.peek() {
            if stop.contains(&p) {
                break;
            }
            let t = self.word("a `name/arity` item")?;
            let bad = || self.err_at(Some(&t), format!("expected `name/arity`, found `{}`", t.text));
            let (name, arity) = t.text.rsplit_once('/').ok_or_else(bad)?;
            let arity: usize = arity.parse().map_err(|_| bad())?;
            if name.is_empty() || arity == 0 {
                return Err(bad());
            }
            sig.push(name, arity).map_err(|e| self.err_at(Some(&t), e.to_string()))?;
        }
        Ok(sig)
    }

    /// `{ elements a b ...; R(a b) ... }`
    fn structure_body(&mut self, sig: &Signature) -> Result<FiniteStructure> {
        self.expect("{")?;
        self.expect("elements")?;
        let mut names: Vec<String> = Vec::new();
        let mut index: HashMap<String, u32> = HashMap::new();
        while !self.eat(";") {
            let t = self.word("an element name or `;`")?;
            if index.insert(t.text.clone(), names.len() as u32).is_some() {
                return Err(self.err_at(Some(&t), format!("element `{}` listed twice", t.text)));
            }
            names.push(t.text);
        }
        let mut data: Vec<Vec<u32>> = sig.symbols().iter().map(|_| Vec::new()).collect();
        while !self.eat("}") {
            let t = self.word("a fact or `}`")?;
            let s = sig.index_of(&t.text).ok_or_else(|| self.err_at(Some(&t), format!("unknown symbol `{}`", t.text)))?;
            self.expect("(")?;
            let mut args = Vec::new();
            while !self.eat(")") {
                let a = self.word("an element name or `)`")?;
                let e = *index.get(&a.text).ok_or_else(|| self.err_at(Some(&a), format!("unknown element `{}`", a.text)))?;
                args.push(e);
            }
            let arity = sig.symbol(s).arity;
            if args.len() != arity {
                return Err(self.err_at(
                    Some(&t),
                    format!("`{}` has arity {arity} but is applied to {} elements", t.text, args.len()),
                ));
            }
            data[s].extend(args);
            self.eat(";");
        }
        let rels = sig.symbols().iter().zip(data).map(|(s, d)| Relation::from_flat(s.arity, d)).collect();
        let a = FiniteStructure::from_relations(sig.clone(), names.len(), rels)?;
        let plain = names.iter().enumerate().all(|(i, n)| *n == format!("e{i}"));
        if plain {
            Ok(a)
        } else {
            a.with_labels(names)
        }
    }

    fn literal(&mut self, sig: &Signature, vars: &mut Vec<String>) -> Result<Literal> {
        let t = self.word("a literal")?;
        let (positive, name) = match t.text.strip_prefix('!') {
            Some(rest) => (false, rest),
            None => (true, t.text.as_str()),
        };
        self.expect("(")?;
        let mut args = Vec::new();
        while !self.eat(")") {
            let v = self.word("a variable or `)`")?;
            let i = match vars.iter().position(|x| *x == v.text) {
                Some(i) => i,
                None => {
                    vars.push(v.text);
                    vars.len() - 1
                }
            };
            args.push(i);
        }
        if name == "=" {
            if args.len() != 2 {
                return Err(self.err_at(Some(&t), "`=` takes two variables"));
            }
            return Ok(Literal::eq(positive, args[0], args[1]));
        }
        let s = sig.index_of(name).ok_or_else(|| self.err_at(Some(&t), format!("unknown symbol `{name}`")))?;
        if sig.symbol(s).arity != args.len() {
            return Err(self.err_at(
                Some(&t),
                format!("`{name}` has arity {} but is applied to {} variables", sig.symbol(s).arity, args.len()),
            ));
        }
        Ok(Literal::rel(positive, s, &args))
    }
}

fn element_names(a: &FiniteStructure) -> Vec<String> {
    let n = a.size() as u32;
    if let Some(l) = a.labels() {
        let mut seen = std::collections::HashSet::new();
        let reserved = ["elements", "{", "}"];
        if l.iter().all(|s| is_word(s) && !reserved.contains(&s.as_str()) && seen.insert(s.as_str())) {
            return l.to_vec();
        }
    }
    (0..n).map(|e| format!("e{e}")).collect()
}

fn emit_signature(sig: &Signature) -> String {
    sig.symbols().iter().map(|s| format!("{}/{}", s.name, s.arity)).collect::<Vec<_>>().join(" ")
}

fn emit_body(out: &mut String, a: &FiniteStructure, indent: &str) {
    let names = element_names(a);
    if names.is_empty() {
        let _ = writeln!(out, "{indent}  elements;");
    } else {
        let _ = writeln!(out, "{indent}  elements {};", names.join(" "));
    }
    for (r, sym) in a.relations().iter().zip(a.signature().symbols()) {
        for t in r.iter() {
            let args: Vec<&str> = t.iter().map(|&x| names[x as usize].as_str()).collect();
            let _ = writeln!(out, "{indent}  {}({})", sym.name, args.join(" "));
        }
    }
}

/// `signature ...` followed by one structure block.
pub fn emit_structure(a: &FiniteStructure, name: &str) -> String {
    let mut out = format!("signature {}\nstructure {} {{\n", emit_signature(a.signature()), quote(name));
    emit_body(&mut out, a, "");
    out.push_str("}\n");
    out
}

/// All structures of a file, with their names. Each file has one signature.
pub fn parse_structures(src: &str) -> Result<Vec<(String, FiniteStructure)>> {
    let mut p = Parser::new(src);
    p.expect("signature")?;
    let sig = p.signature(&["structure"])?;
    let mut out = Vec::new();
    while p.peek().is_some() {
        p.expect("structure")?;
        let name = p.name("a structure name")?;
        out.push((name, p.structure_body(&sig)?));
    }
    if out.is_empty() {
        return Err(p.err_at(None, "expected `structure`, found end of input"));
    }
    Ok(out)
}

pub fn parse_structure(src: &str) -> Result<FiniteStructure> {
    let mut all = parse_structures(src)?;
    if all.len() != 1 {
        return Err(Error::Parse { line: 1, col: 1, msg: format!("expected one structure, found {}", all.len()) });
    }
    Ok(all.pop().unwrap().1)
}

fn emit_literal(l: &Literal, sig: &Signature, names: &[String]) -> String {
    let sign = if l.positive { "" } else { "!" };
    match &l.atom {
        Atom::Rel { symbol, args } => {
            let a: Vec<&str> = args.iter().map(|&i| names[i].as_str()).collect();
            format!("{sign}{}({})", sig.symbol(*symbol).name, a.join(" "))
        }
        Atom::Eq(x, y) => format!("{sign}=({} {})", names[*x], names[*y]),
    }
}

/// Variables are named `x`, `y`, `z`, `u`, `v`, `w` and then `x6`, `x7`, ...
fn var_names(n: usize) -> Vec<String> {
    const FIRST: [&str; 6] = ["x", "y", "z", "u", "v", "w"];
    (0..n).map(|i| FIRST.get(i).map_or(format!("x{i}"), |s| s.to_string())).collect()
}

pub fn emit_spec(spec: &BoundSpec) -> String {
    let sig = &spec.signature;
    let mut out = format!("spec {} {{\n  signature {};\n  bound_size {};\n", quote(&spec.name), emit_signature(sig), spec.max_bound_size);
    for c in &spec.clauses {
        // Name variables in order of first use so that parsing gives back
        // the same numbering.
        let mut order: Vec<usize> = Vec::new();
        for l in &c.literals {
            let vs = match &l.atom {
                Atom::Rel { args, .. } => args.clone(),
                Atom::Eq(x, y) => vec![*x, *y],
            };
            for v in vs {
                if !order.contains(&v) {
                    order.push(v);
                }
            }
        }
        let fresh = var_names(order.len());
        let mut names = vec![String::new(); c.variable_count];
        for (i, &v) in order.iter().enumerate() {
            names[v] = fresh[i].clone();
        }
        let lits: Vec<String> = c.literals.iter().map(|l| emit_literal(l, sig, &names)).collect();
        let _ = writeln!(out, "  clause {}", lits.join(" | "));
    }
    if let Some(bounds) = &spec.forbidden {
        out.push_str("  bounds\n");
        for b in bounds {
            out.push_str("  bound {\n");
            emit_body(&mut out, b, "  ");
            out.push_str("  }\n");
        }
    }
    out.push_str("}\n");
    out
}

pub fn parse_spec(src: &str) -> Result<BoundSpec> {
    let mut p = Parser::new(src);
    p.expect("spec")?;
    let name = p.name("a spec name")?;
    p.expect("{")?;
    p.expect("signature")?;
    let sig = p.signature(&[";"])?;
    p.expect(";")?;
    let mut bound_size = None;
    let mut clauses = Vec::new();
    let mut forbidden: Option<Vec<FiniteStructure>> = None;
    loop {
        let t = p.next("`clause`, `bound_size`, `bounds`, `bound` or `}`")?;
        match t.text.as_str() {
            "}" => break,
            "bound_size" => {
                bound_size = Some(p.number("a bound size")?);
                p.eat(";");
            }
            "clause" => {
                let mut vars = Vec::new();
                let mut lits = vec![p.literal(&sig, &mut vars)?];
                while p.eat("|") {
                    lits.push(p.literal(&sig, &mut vars)?);
                }
                p.eat(";");
                let c = Clause::new(vars.len(), lits).map_err(|e| p.err_at(Some(&t), e.to_string()))?;
                clauses.push(c);
            }
            "bounds" => {
                forbidden.get_or_insert_with(Vec::new);
                p.eat(";");
            }
            "bound" => {
                let b = p.structure_body(&sig)?;
                forbidden.get_or_insert_with(Vec::new).push(b.without_labels());
            }
            other => return Err(p.err_at(Some(&t), format!("unexpected `{other}` in a spec"))),
        }
    }
    p.done()?;
    let mbs = match bound_size {
        Some(m) => m,
        None => {
            let c = clauses.iter().map(|c| c.variable_count).max().unwrap_or(1);
            let b = forbidden.iter().flatten().map(FiniteStructure::size).max().unwrap_or(1);
            c.max(b)
        }
    };
    BoundSpec::new(name, sig, clauses, forbidden, mbs)
}

/// `op arity=<n> domain=<m>` then the values in table order, 32 per line.
pub fn emit_op(f: &OperationTable) -> String {
    f.to_string()
}

pub fn parse_op(src: &str) -> Result<OperationTable> {
    let mut p = Parser::new(src);
    p.expect("op")?;
    let mut fields: HashMap<&str, usize> = HashMap::new();
    while p.peek().is_some_and(|w| w.contains('=')) {
        let t = p.next("a field")?;
        let k = t.text.split_once('=').unwrap().0;
        let key = match k {
            "arity" => "arity",
            "domain" => "domain",
            "codomain" => "codomain",
            _ => return Err(p.err_at(Some(&t), format!("unknown field `{k}`"))),
        };
        let v = t.text.split_once('=').unwrap().1;
        let v: usize = v.parse().map_err(|_| p.err_at(Some(&t), format!("`{v}` is not a number")))?;
        fields.insert(key, v);
    }
    let arity = *fields.get("arity").ok_or_else(|| p.err_at(None, "missing `arity=`"))?;
    let domain = *fields.get("domain").ok_or_else(|| p.err_at(None, "missing `domain=`"))?;
    let codomain = fields.get("codomain").copied().unwrap_or(domain);
    let mut values = Vec::new();
    while p.peek().is_some() {
        let t = p.word("a value")?;
        let v: u32 = t.text.parse().map_err(|_| p.err_at(Some(&t), format!("`{}` is not a value", t.text)))?;
        if v as usize >= codomain {
            return Err(p.err_at(Some(&t), format!("value {v} outside 0..{codomain}")));
        }
        values.push(v);
    }
    OperationTable::new(arity, domain, codomain, values)
}

/// One line per type: index, equality pattern, facts over the classes.
pub fn emit_type_table(table: &DTypeTable) -> String {
    let mut out = String::new();
    let sig = table.signature();
    for (i, t) in table.types().iter().enumerate() {
        let pat: Vec<String> = t.pattern.iter().map(u8::to_string).collect();
        let _ = write!(out, "type {i} [{}]", pat.join(" "));
        for (r, sym) in t.structure.relations().iter().zip(sig.symbols()) {
            for tu in r.iter() {
                let a: Vec<String> = tu.iter().map(u32::to_string).collect();
                let _ = write!(out, " {}({})", sym.name, a.join(" "));
            }
        }
        out.push('\n');
    }
    out
}

/// The factored template: a header, its spec and the list of `d`-types.
pub fn emit_orbit_template(s2: &OrbitTemplate) -> String {
    let mut out = format!("orbit_template d={} types={} tau={}\n", s2.d(), s2.size(), s2.tau().join(","));
    out.push_str(&emit_spec(s2.spec()));
    out.push_str(&emit_type_table(s2.table()));
    out
}

/// The provenance block and the map `S1 → S2` of a generated template.
pub fn emit_pcsp_summary(t: &PcspTemplate) -> String {
    let p = &t.provenance;
    let mut out = String::new();
    let _ = writeln!(out, "pcsp spec={} tau={} s_size={} with_i4={} d={}", p.spec, p.tau.join(","), p.s_size, p.with_i4, t.d);
    let _ = writeln!(out, "bhat={} tau_hat={}", p.bhat, p.tau_hat.join(","));
    let _ = writeln!(out, "s1_size={} s2_size={}", t.s1.size(), t.s2.size());
    out.push_str("hom");
    for (i, v) in t.hom.iter().enumerate() {
        out.push_str(if i % 32 == 0 { "\n" } else { " " });
        let _ = write!(out, "{v}");
    }
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agespec::builtin_linear_order;
    use crate::construct::{full_power_finite, wreath_spec};
    use crate::fixtures::{antichain, chain, clique, directed_cycle, parity_a1};
    use crate::caps::Caps;

    fn same(a: &FiniteStructure, b: &FiniteStructure) -> bool {
        a.signature() == b.signature() && a.size() == b.size() && a.relation_key() == b.relation_key()
    }

    #[test]
    fn structure_round_trips() {
        let fp = full_power_finite(&chain(2), 2, &Caps::default()).unwrap();
        for a in [chain(3), clique(3), directed_cycle(4), antichain(0), parity_a1(), fp] {
            let text = emit_structure(&a, "A");
            let b = parse_structure(&text).unwrap();
            assert!(same(&a, &b), "{text}");
            assert_eq!(emit_structure(&b, "A"), text);
        }
    }

    #[test]
    fn parses_k3() {
        let src = "# triangle\nsignature E/2\nstructure K3 {\n elements a b c;\n E(a b) E(b a) E(b c)\n E(c b) E(a c) E(c a)\n}\n";
        let a = parse_structure(src).unwrap();
        assert_eq!(a.size(), 3);
        assert!(same(&a, &clique(3)));
        assert_eq!(a.label(2), "c");
    }

    #[test]
    fn errors_carry_positions() {
        let src = "signature E/2\nstructure A {\n  elements a b;\n  E(a b a)\n}\n";
        assert_eq!(
            parse_structure(src).unwrap_err(),
            Error::Parse { line: 4, col: 3, msg: "`E` has arity 2 but is applied to 3 elements".into() }
        );
        let src = "signature E/2\nstructure A {\n  elements a b;\n  F(a b)\n}\n";
        assert!(matches!(parse_structure(src), Err(Error::Parse { line: 4, col: 3, .. })));
        let src = "signature E/2\nstructure A {\n  elements a;\n  E(a q)\n}\n";
        assert!(matches!(parse_structure(src), Err(Error::Parse { line: 4, col: 7, .. })));
        assert!(matches!(parse_structure("signature E/x"), Err(Error::Parse { line: 1, col: 11, .. })));
        assert!(matches!(parse_structure("signature E/2\nstructure A {"), Err(Error::Parse { .. })));
    }

    #[test]
    fn spec_round_trips() {
        let lin = builtin_linear_order("<");
        let text = emit_spec(&lin);
        assert_eq!(text.matches("clause").count(), 3);
        let back = parse_spec(&text).unwrap();
        assert_eq!(back, lin);
        assert_eq!(emit_spec(&back), text);

        let w = wreath_spec(&lin, &builtin_linear_order("<B")).unwrap();
        let back = parse_spec(&emit_spec(&w)).unwrap();
        assert_eq!(emit_spec(&back), emit_spec(&w));
    }

    #[test]
    fn spec_errors() {
        let src = "spec s {\n  signature R/2;\n  clause R(x y) | Q(x)\n}\n";
        assert!(matches!(parse_spec(src), Err(Error::Parse { line: 3, col: 19, .. })));
        let src = "spec s {\n  signature R/2;\n  clause !=(x y) | R(x)\n}\n";
        assert!(matches!(parse_spec(src), Err(Error::Parse { line: 3, col: 20, .. })));
    }

    #[test]
    fn spec_with_bounds() {
        let src = "spec noloop {\n  signature R/2;\n  bounds\n  bound {\n    elements a;\n    R(a a)\n  }\n}\n";
        let s = parse_spec(src).unwrap();
        assert_eq!(s.forbidden.as_ref().unwrap().len(), 1);
        assert_eq!(s.max_bound_size, 1);
        let again = parse_spec(&emit_spec(&s)).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn derived_names_lex_as_words() {
        let fp = full_power_finite(&chain(2), 2, &Caps::default()).unwrap();
        let text = emit_structure(&fp, "P");
        assert!(text.contains("S@c{1}[1|1]/2"));
        assert!(same(&parse_structure(&text).unwrap(), &fp));
    }

    #[test]
    fn op_round_trips() {
        let f = OperationTable::from_fn(3, 2, |a| (a[0] + a[1] + a[2]) % 2);
        let text = emit_op(&f);
        assert!(text.starts_with("op arity=3 domain=2\n"));
        assert_eq!(parse_op(&text).unwrap(), f);
        let g = OperationTable::new(2, 2, 5, vec![0, 4, 4, 1]).unwrap();
        assert_eq!(parse_op(&emit_op(&g)).unwrap(), g);
        assert!(matches!(parse_op("op arity=1 domain=2\n0 2"), Err(Error::Parse { line: 2, col: 3, .. })));
        assert!(parse_op("op arity=1 domain=2\n0").is_err());
    }
}
