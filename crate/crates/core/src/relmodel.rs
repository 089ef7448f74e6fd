//! Relational structures: interned domain, relations, statistics and
//! selection indexes.

use std::fs;
use std::path::Path;

use indexmap::IndexSet;
use rustc_hash::{FxBuildHasher, FxHashMap};

use crate::error::{Error, Result};

/// Domain element id.
pub type Value = u32;
pub type Row = Vec<Value>;
pub type RowSet = IndexSet<Row, FxBuildHasher>;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    symbols: Vec<(String, usize)>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: &str, arity: usize) -> Result<()> {
        if arity == 0 {
            return Err(Error::Manifest {
                line: 0,
                reason: format!("relation `{name}` has arity 0"),
            });
        }
        if self.arity(name).is_some() {
            return Err(Error::Manifest {
                line: 0,
                reason: format!("relation `{name}` declared twice"),
            });
        }
        self.symbols.push((name.to_string(), arity));
        Ok(())
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.symbols.iter().find(|(n, _)| n == name).map(|&(_, a)| a)
    }

    pub fn symbols(&self) -> &[(String, usize)] {
        &self.symbols
    }

    /// ‖σ‖ = |σ| + Σ ar(R).
    pub fn size(&self) -> usize {
        self.symbols.len() + self.symbols.iter().map(|(_, a)| a).sum::<usize>()
    }

    /// Parses a manifest: one `Name/arity` per line, `#` comments allowed.
    pub fn parse_manifest(text: &str) -> Result<Self> {
        let mut sig = Signature::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |reason: &str| Error::Manifest {
                line: i + 1,
                reason: reason.to_string(),
            };
            let (name, arity) = line.rsplit_once('/').ok_or_else(|| bad("expected Name/arity"))?;
            let arity: usize = arity.trim().parse().map_err(|_| bad("arity is not a number"))?;
            sig.add(name.trim(), arity).map_err(|e| match e {
                Error::Manifest { reason, .. } => Error::Manifest { line: i + 1, reason },
                other => other,
            })?;
        }
        Ok(sig)
    }

    pub fn to_manifest(&self) -> String {
        self.symbols
            .iter()
            .map(|(n, a)| format!("{n}/{a}\n"))
            .collect()
    }
}

/// Interned external values.
#[derive(Clone, Debug, Default)]
pub struct Domain {
    names: Vec<String>,
    ids: FxHashMap<String, Value>,
}

impl Domain {
    pub fn intern(&mut self, name: &str) -> Value {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.names.len() as Value;
        self.names.push(name.to_string());
        self.ids.insert(name.to_string(), id);
        id
    }

    pub fn id(&self, name: &str) -> Option<Value> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, id: Value) -> &str {
        &self.names[id as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct Relation {
    pub name: String,
    pub arity: usize,
    pub rows: RowSet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Stats {
    /// Domain size.
    pub n: usize,
    /// Tuple count of the largest relation.
    pub m: usize,
    /// Encoding size ‖σ‖ + n + Σ ar(R)·|R|.
    pub size: usize,
}

/// A finite relational instance. Immutable once built.
#[derive(Clone, Debug)]
pub struct Structure {
    signature: Signature,
    domain: Domain,
    relations: Vec<Relation>,
}

impl Structure {
    pub fn builder(signature: Signature) -> StructureBuilder {
        let relations = signature
            .symbols()
            .iter()
            .map(|(n, a)| Relation {
                name: n.clone(),
                arity: *a,
                rows: RowSet::default(),
            })
            .collect();
        StructureBuilder {
            inner: Structure {
                signature,
                domain: Domain::default(),
                relations,
            },
        }
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn relation_index(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|r| r.name == name)
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.relation_index(name).map(|i| &self.relations[i])
    }

    pub fn stats(&self) -> Stats {
        Stats {
            n: self.domain.len(),
            m: self.relations.iter().map(|r| r.rows.len()).max().unwrap_or(0),
            size: self.signature.size()
                + self.domain.len()
                + self
                    .relations
                    .iter()
                    .map(|r| r.arity * r.rows.len())
                    .sum::<usize>(),
        }
    }

    /// Loads one file per relation symbol from `dir`; the file stem names
    /// the relation. Fields are separated by `delimiter`, no header row.
    pub fn load(dir: &Path, signature: Signature, delimiter: char) -> Result<Structure> {
        let mut builder = Structure::builder(signature);
        let mut seen = vec![false; builder.inner.relations.len()];
        let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        let mut paths: Vec<_> = entries
            .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
            .collect::<Result<_>>()?;
        paths.sort();
        for path in paths {
            if !path.is_file() {
                continue;
            }
            let file_name = path.file_name().and_then(|s| s.to_str()).unwrap_or("");
            if file_name.starts_with('.') || file_name.starts_with("manifest") {
                continue;
            }
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("").to_string();
            let idx = builder
                .inner
                .relation_index(&stem)
                .ok_or_else(|| Error::UnknownRelation(stem.clone()))?;
            seen[idx] = true;
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let arity = builder.inner.relations[idx].arity;
            for (i, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let fields: Vec<&str> = line.split(delimiter).map(str::trim).collect();
                if fields.len() != arity {
                    return Err(Error::ArityMismatch {
                        path: path.clone(),
                        line: i + 1,
                        expected: arity,
                        found: fields.len(),
                    });
                }
                builder.insert(&stem, &fields)?;
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            let name = &builder.inner.relations[i].name;
            return Err(Error::io(
                dir.join(name),
                std::io::Error::new(std::io::ErrorKind::NotFound, "no file for declared relation"),
            ));
        }
        Ok(builder.finish())
    }

    /// Loads `manifest` then the relation files next to it.
    pub fn load_with_manifest(dir: &Path, manifest: &Path, delimiter: char) -> Result<Structure> {
        let text = fs::read_to_string(manifest).map_err(|e| Error::io(manifest, e))?;
        Structure::load(dir, Signature::parse_manifest(&text)?, delimiter)
    }

    /// Writes `manifest.txt` plus one `<name>.tsv` per relation.
    pub fn export(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let manifest = dir.join("manifest.txt");
        fs::write(&manifest, self.signature.to_manifest()).map_err(|e| Error::io(&manifest, e))?;
        for rel in &self.relations {
            let mut text = String::new();
            for row in &rel.rows {
                let fields: Vec<&str> = row.iter().map(|&v| self.domain.name(v)).collect();
                text.push_str(&fields.join("\t"));
                text.push('\n');
            }
            let path = dir.join(format!("{}.tsv", rel.name));
            fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

pub struct StructureBuilder {
    inner: Structure,
}

impl StructureBuilder {
    /// Adds a domain element that need not occur in any tuple.
    pub fn element(&mut self, name: &str) -> Value {
        self.inner.domain.intern(name)
    }

    pub fn insert<S: AsRef<str>>(&mut self, relation: &str, fields: &[S]) -> Result<()> {
        let idx = self
            .inner
            .relation_index(relation)
            .ok_or_else(|| Error::UnknownRelation(relation.to_string()))?;
        let arity = self.inner.relations[idx].arity;
        if fields.len() != arity {
            return Err(Error::AtomArity {
                name: relation.to_string(),
                used: fields.len(),
                declared: arity,
            });
        }
        let row: Row = fields
            .iter()
            .map(|f| self.inner.domain.intern(f.as_ref()))
            .collect();
        self.inner.relations[idx].rows.insert(row);
        Ok(())
    }

    pub fn finish(self) -> Structure {
        self.inner
    }
}

/// For each key over `key_positions`, the rows of the relation carrying that
/// key, in insertion order.
#[derive(Clone, Debug)]
pub struct SelectionIndex {
    relation: String,
    key_positions: Vec<usize>,
    buckets: FxHashMap<Row, Vec<Row>>,
}

impl SelectionIndex {
    /// Positions are 0-based columns.
    pub fn build(structure: &Structure, relation: &str, key_positions: &[usize]) -> Result<Self> {
        let rel = structure
            .relation(relation)
            .ok_or_else(|| Error::UnknownRelation(relation.to_string()))?;
        if let Some(&p) = key_positions.iter().find(|&&p| p >= rel.arity) {
            return Err(Error::BadPositions {
                position: p,
                arity: rel.arity,
            });
        }
        let mut buckets: FxHashMap<Row, Vec<Row>> = FxHashMap::default();
        for row in &rel.rows {
            let key: Row = key_positions.iter().map(|&p| row[p]).collect();
            buckets.entry(key).or_default().push(row.clone());
        }
        Ok(SelectionIndex {
            relation: relation.to_string(),
            key_positions: key_positions.to_vec(),
            buckets,
        })
    }

    pub fn relation(&self) -> &str {
        &self.relation
    }

    pub fn key_positions(&self) -> &[usize] {
        &self.key_positions
    }

    pub fn bucket(&self, key: &[Value]) -> &[Row] {
        self.buckets.get(key).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn buckets(&self) -> impl Iterator<Item = (&Row, &[Row])> {
        self.buckets.iter().map(|(k, v)| (k, v.as_slice()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::four_cycle_instance;

    #[test]
    fn four_cycle_stats() {
        let a = four_cycle_instance(4);
        let st = a.stats();
        assert_eq!(st.n, 6);
        assert_eq!(st.m, 8);
        assert!(a.relations().iter().all(|r| r.rows.len() == 8));
        // ‖σ‖ = 4 + 8, plus n, plus 4 relations · 2 · 8.
        assert_eq!(st.size, 12 + 6 + 64);
    }

    #[test]
    fn empty_and_unary_stats() {
        let mut sig = Signature::new();
        sig.add("U", 1).unwrap();
        sig.add("E", 2).unwrap();
        let a = Structure::builder(sig.clone()).finish();
        assert_eq!(a.stats().m, 0);
        let mut b = Structure::builder(sig);
        for v in ["1", "2", "3"] {
            b.insert("U", &[v]).unwrap();
        }
        let b = b.finish();
        assert_eq!((b.stats().n, b.stats().m), (3, 3));
    }

    #[test]
    fn selection_index_buckets() {
        let a = four_cycle_instance(4);
        let idx = SelectionIndex::build(&a, "E12", &[0]).unwrap();
        let b = a.domain().id("b").unwrap();
        let bucket = idx.bucket(&[b]);
        assert_eq!(bucket.len(), 4);
        assert!(bucket.iter().all(|r| r[0] == b));
        // A linear scan agrees on every key.
        for (key, rows) in idx.buckets() {
            let scan: Vec<_> = a.relation("E12").unwrap().rows.iter().filter(|r| r[0] == key[0]).collect();
            assert_eq!(scan.len(), rows.len());
        }
        assert!(idx.bucket(&[9999]).is_empty());
        let full = SelectionIndex::build(&a, "E12", &[0, 1]).unwrap();
        assert!(full.buckets().all(|(_, rows)| rows.len() == 1));
        assert!(matches!(
            SelectionIndex::build(&a, "E12", &[2]),
            Err(Error::BadPositions { position: 2, arity: 2 })
        ));
    }

    #[test]
    fn load_rejects_bad_rows() {
        let dir = std::env::temp_dir().join(format!("cqenum-relmodel-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join("E.tsv"), "x\ty\tz\n").unwrap();
        let sig = Signature::parse_manifest("E/2\n").unwrap();
        let err = Structure::load(&dir, sig.clone(), '\t').unwrap_err();
        assert!(matches!(err, Error::ArityMismatch { expected: 2, found: 3, .. }));

        std::fs::write(dir.join("E.tsv"), "").unwrap();
        let a = Structure::load(&dir, sig.clone(), '\t').unwrap();
        assert_eq!(a.relation("E").unwrap().rows.len(), 0);

        std::fs::write(dir.join("F.tsv"), "1\t2\n").unwrap();
        let err = Structure::load(&dir, sig, '\t').unwrap_err();
        assert!(matches!(err, Error::UnknownRelation(ref r) if r == "F"));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
