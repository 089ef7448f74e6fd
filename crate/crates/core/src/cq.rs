//! Conjunctive queries: syntax tree, parser, pretty-printer, and the derived
//! queries obtained by projecting atoms to a scope or by adding refinement
//! atoms over variable sets.

use std::fmt;

use crate::error::{Error, Result};
use crate::eval::{Evaluator, NormalizedAtom};
use crate::relmodel::{Row, Signature, Structure};
use crate::varset::{Var, VarSet, MAX_VARS};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Atom {
    pub relation: String,
    /// Argument variables; repetition allowed.
    pub args: Vec<Var>,
}

impl Atom {
    pub fn vars(&self) -> VarSet {
        self.args.iter().copied().collect()
    }
}

/// A conjunctive query `∃ quantified . atom, atom, ...`.
///
/// Variables are numbered by first occurrence in the atom list; that order
/// is also the canonical column order of every answer tuple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cq {
    names: Vec<String>,
    atoms: Vec<Atom>,
    quantified: Vec<Var>,
}

impl Cq {
    pub fn new(names: Vec<String>, atoms: Vec<Atom>, quantified: Vec<Var>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Syntax {
                pos: 0,
                msg: "query needs at least one atom".into(),
            });
        }
        if names.len() > MAX_VARS {
            return Err(Error::TooManyVariables {
                found: names.len(),
                cap: MAX_VARS,
            });
        }
        let used: VarSet = atoms.iter().map(Atom::vars).fold(VarSet::EMPTY, VarSet::union);
        if used != VarSet::full(names.len()) {
            return Err(Error::Scope);
        }
        let mut seen = VarSet::EMPTY;
        for &q in &quantified {
            if seen.contains(q) {
                return Err(Error::DuplicateQuantifier(names[q].clone()));
            }
            seen.insert(q);
        }
        Ok(Cq {
            names,
            atoms,
            quantified,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Parser::new(text).query()
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn vars(&self) -> VarSet {
        VarSet::full(self.names.len())
    }

    pub fn quantified(&self) -> VarSet {
        self.quantified.iter().copied().collect()
    }

    pub fn free(&self) -> VarSet {
        self.vars().difference(self.quantified())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn var_name(&self, v: Var) -> &str {
        &self.names[v]
    }

    pub fn var_names(&self) -> &[String] {
        &self.names
    }

    pub fn var_index(&self, name: &str) -> Option<Var> {
        self.names.iter().position(|n| n == name)
    }

    /// Variable set from names; `None` if some name is unknown.
    pub fn var_set<'a>(&self, names: impl IntoIterator<Item = &'a str>) -> Option<VarSet> {
        names.into_iter().map(|n| self.var_index(n)).collect::<Option<Vec<_>>>().map(|v| v.into_iter().collect())
    }

    pub fn is_quantifier_free(&self) -> bool {
        self.quantified.is_empty()
    }

    pub fn is_boolean(&self) -> bool {
        self.free().is_empty()
    }

    /// The same atoms with every variable free.
    pub fn strip_quantifiers(&self) -> Cq {
        Cq {
            names: self.names.clone(),
            atoms: self.atoms.clone(),
            quantified: Vec::new(),
        }
    }

    /// Same atoms and variable numbering, different quantifier prefix.
    pub fn with_free(&self, free: VarSet) -> Cq {
        Cq {
            names: self.names.clone(),
            atoms: self.atoms.clone(),
            quantified: self.vars().difference(free).iter().collect(),
        }
    }

    pub fn check_signature(&self, sig: &Signature) -> Result<()> {
        for atom in &self.atoms {
            let declared = sig
                .arity(&atom.relation)
                .ok_or_else(|| Error::UnknownRelation(atom.relation.clone()))?;
            if declared != atom.args.len() {
                return Err(Error::AtomArity {
                    name: atom.relation.clone(),
                    used: atom.args.len(),
                    declared,
                });
            }
        }
        Ok(())
    }

    pub fn fmt_set(&self, s: VarSet) -> String {
        let names: Vec<&str> = s.iter().map(|v| self.var_name(v)).collect();
        format!("{{{}}}", names.join(","))
    }
}

impl fmt::Display for Cq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.quantified.is_empty() {
            f.write_str("exists")?;
            for &q in &self.quantified {
                write!(f, " {}", self.names[q])?;
            }
            f.write_str(" . ")?;
        }
        for (i, atom) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            let args: Vec<&str> = atom.args.iter().map(|&v| self.names[v].as_str()).collect();
            write!(f, "{}({})", atom.relation, args.join(","))?;
        }
        Ok(())
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src, pos: 0 }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn ident(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest
            .char_indices()
            .find(|&(i, c)| !(c == '_' || c.is_alphanumeric() || (i > 0 && c == '\'')))
            .map(|(i, _)| i)
            .unwrap_or(rest.len());
        if len == 0 || rest.starts_with(|c: char| c.is_ascii_digit()) {
            return self.err("expected identifier");
        }
        self.pos += len;
        Ok(&rest[..len])
    }

    fn query(&mut self) -> Result<Cq> {
        let mut quantified_names: Vec<&str> = Vec::new();
        let save = self.pos;
        if self.ident().ok() == Some("exists") && self.peek() != Some('(') {
            while !self.eat('.') {
                if self.peek().is_none() {
                    return self.err("expected `.` after quantifier list");
                }
                let name = self.ident()?;
                if quantified_names.contains(&name) {
                    return Err(Error::DuplicateQuantifier(name.to_string()));
                }
                quantified_names.push(name);
            }
        } else {
            self.pos = save;
        }

        let mut names: Vec<String> = Vec::new();
        let mut atoms = Vec::new();
        loop {
            let relation = self.ident()?.to_string();
            self.expect('(')?;
            let mut args = Vec::new();
            loop {
                let v = self.ident()?;
                let idx = match names.iter().position(|n| n == v) {
                    Some(i) => i,
                    None => {
                        names.push(v.to_string());
                        names.len() - 1
                    }
                };
                args.push(idx);
                if self.eat(')') {
                    break;
                }
                self.expect(',')?;
            }
            atoms.push(Atom { relation, args });
            if self.peek().is_none() {
                break;
            }
            self.expect(',')?;
        }

        let mut quantified = Vec::new();
        for q in quantified_names {
            match names.iter().position(|n| n == q) {
                Some(i) => quantified.push(i),
                None => return Err(Error::QuantifiedVarUnused(q.to_string())),
            }
        }
        Cq::new(names, atoms, quantified)
    }
}

/// The query obtained by projecting every atom to `scope`: an assignment of
/// `scope` is an answer iff each atom's restriction to the scope extends to
/// a tuple of its relation.
#[derive(Clone, Debug)]
pub struct ProjectedQuery {
    pub base: Cq,
    pub scope: VarSet,
}

impl ProjectedQuery {
    /// Per-atom constraint scopes `scope ∩ vars(atom)`.
    pub fn projected_atoms(&self) -> Vec<(&Atom, VarSet)> {
        self.base
            .atoms()
            .iter()
            .map(|a| (a, a.vars().intersection(self.scope)))
            .collect()
    }

    /// Answers as rows over `scope` in variable order, sorted.
    pub fn eval(&self, structure: &Structure) -> Result<Vec<Row>> {
        self.base.check_signature(structure.signature())?;
        let atoms = NormalizedAtom::all(&self.base, structure);
        let ev = Evaluator::new(atoms.iter().map(|a| (a.vars, a.rows.clone())));
        let mut rows = ev.solve(self.scope);
        rows.sort();
        Ok(rows)
    }
}

pub fn project_query(phi: &Cq, scope: VarSet) -> Result<ProjectedQuery> {
    if !scope.is_subset(phi.vars()) {
        return Err(Error::Scope);
    }
    Ok(ProjectedQuery {
        base: phi.clone(),
        scope,
    })
}

/// `φ ∧ ⋀_{S∈s} R_S(x_S)` over the extended signature.
#[derive(Clone, Debug)]
pub struct RefinedQuery {
    pub base: Cq,
    family: Vec<VarSet>,
}

impl RefinedQuery {
    /// Family members in canonical order.
    pub fn family(&self) -> &[VarSet] {
        &self.family
    }

    /// Name of the fresh relation symbol for `s`.
    pub fn relation_name(&self, s: VarSet) -> String {
        let names: Vec<&str> = s.iter().map(|v| self.base.var_name(v)).collect();
        format!("R[{}]", names.join(","))
    }

    /// Extended signature: the base symbols plus one `|S|`-ary symbol per
    /// family member. Nullary symbols are listed with arity 0.
    pub fn signature(&self) -> Vec<(String, usize)> {
        let mut out: Vec<(String, usize)> = Vec::new();
        for atom in self.base.atoms() {
            if !out.iter().any(|(n, _)| *n == atom.relation) {
                out.push((atom.relation.clone(), atom.args.len()));
            }
        }
        out.extend(self.family.iter().map(|&s| (self.relation_name(s), s.len())));
        out
    }

    pub fn num_atoms(&self) -> usize {
        self.base.atoms().len() + self.family.len()
    }
}

impl fmt::Display for RefinedQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.base)?;
        for &s in &self.family {
            let args: Vec<&str> = s.iter().map(|v| self.base.var_name(v)).collect();
            write!(f, ", {}({})", self.relation_name(s), args.join(","))?;
        }
        Ok(())
    }
}

pub fn is_subset_closed(family: &[VarSet]) -> bool {
    family
        .iter()
        .all(|s| s.subsets().all(|t| family.contains(&t)))
}

pub fn refine_query(phi: &Cq, family: &[VarSet]) -> Result<RefinedQuery> {
    if !phi.is_quantifier_free() {
        return Err(Error::NotQuantifierFree);
    }
    if family.iter().any(|s| !s.is_subset(phi.vars())) {
        return Err(Error::Scope);
    }
    if !is_subset_closed(family) {
        return Err(Error::NotSubsetClosed);
    }
    let mut family = family.to_vec();
    family.sort_by(|a, b| a.canonical_cmp(*b));
    family.dedup();
    Ok(RefinedQuery {
        base: phi.clone(),
        family,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{FOUR_CYCLE, FOUR_CYCLE_PROJECTED, TRIANGLE};

    #[test]
    fn parses_four_cycle() {
        let q = Cq::parse(FOUR_CYCLE).unwrap();
        assert_eq!(q.var_names(), ["x1", "x2", "x3", "x4"]);
        assert_eq!(q.free(), q.vars());
        assert!(q.is_quantifier_free());
        assert_eq!(q.atoms().len(), 4);
    }

    #[test]
    fn parses_projected_four_cycle() {
        let q = Cq::parse(FOUR_CYCLE_PROJECTED).unwrap();
        assert_eq!(q.free(), q.var_set(["x2", "x4"]).unwrap());
        assert_eq!(q.quantified(), q.var_set(["x1", "x3"]).unwrap());
    }

    #[test]
    fn rejects_bad_quantifiers() {
        assert!(matches!(
            Cq::parse("exists y y . E(x,y)"),
            Err(Error::DuplicateQuantifier(ref v)) if v == "y"
        ));
        assert!(matches!(
            Cq::parse("exists z . E(x,y)"),
            Err(Error::QuantifiedVarUnused(ref v)) if v == "z"
        ));
        assert!(matches!(Cq::parse("E(x,"), Err(Error::Syntax { .. })));
        assert!(matches!(Cq::parse(""), Err(Error::Syntax { .. })));
        assert!(matches!(Cq::parse("E(x) F(y)"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn repeated_variables_and_self_joins() {
        let q = Cq::parse("E(x,x), E(x,y)").unwrap();
        assert_eq!(q.num_vars(), 2);
        assert_eq!(q.atoms()[0].args, vec![0, 0]);
    }

    #[test]
    fn relation_named_exists_is_an_atom() {
        let q = Cq::parse("exists(x)").unwrap();
        assert_eq!(q.atoms()[0].relation, "exists");
    }

    #[test]
    fn pretty_print_round_trips() {
        for text in [FOUR_CYCLE, FOUR_CYCLE_PROJECTED, TRIANGLE, "exists a . R(a,b,a), S(b)"] {
            let q = Cq::parse(text).unwrap();
            assert_eq!(Cq::parse(&q.to_string()).unwrap(), q);
        }
    }

    #[test]
    fn refine_query_checks_family() {
        let q = Cq::parse(FOUR_CYCLE).unwrap();
        let x12 = q.var_set(["x1", "x2"]).unwrap();
        let family: Vec<VarSet> = x12.subsets().collect();
        let r = refine_query(&q, &family).unwrap();
        assert_eq!(r.family().len(), 4);
        assert_eq!(r.num_atoms(), 8);
        assert!(r.to_string().contains("R[x1,x2](x1,x2)"));
        assert!(matches!(refine_query(&q, &[x12]), Err(Error::NotSubsetClosed)));
        let neutral = refine_query(&q, &[VarSet::EMPTY]).unwrap();
        assert_eq!(neutral.family(), &[VarSet::EMPTY]);
        let projected = Cq::parse(FOUR_CYCLE_PROJECTED).unwrap();
        assert!(matches!(refine_query(&projected, &[VarSet::EMPTY]), Err(Error::NotQuantifierFree)));
    }

    #[test]
    fn project_query_scope_is_checked() {
        let q = Cq::parse(TRIANGLE).unwrap();
        assert!(matches!(project_query(&q, VarSet::singleton(7)), Err(Error::Scope)));
        let p = project_query(&q, q.var_set(["x", "z"]).unwrap()).unwrap();
        let scopes: Vec<VarSet> = p.projected_atoms().into_iter().map(|(_, k)| k).collect();
        assert_eq!(scopes[0], VarSet::singleton(0));
        assert_eq!(scopes[2], q.var_set(["x", "z"]).unwrap());
    }
}
