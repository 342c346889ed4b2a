//! JSON graph files: `{"n": .., "mode": .., "edges": [{"u", "v", "p", "q"}]}`.
//!
//! Ferromagnetic edges carry `β = 1 + p/q`, antiferromagnetic edges `β = p/q`
//! with `p < q`. Integers may be JSON numbers or decimal strings (for values
//! beyond 64 bits); floats are rejected.

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use super::{IsingInstance, Mode, WeightedGraph};
use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IntLiteral {
    Number(u64),
    Text(String),
}

impl IntLiteral {
    fn to_bigint(&self, field: &str, edge: usize) -> Result<BigInt> {
        match self {
            IntLiteral::Number(x) => Ok(BigInt::from(*x)),
            IntLiteral::Text(s) => s.trim().parse().map_err(|_| {
                Error::Parse(format!("edges[{edge}].{field}: {s:?} is not an integer"))
            }),
        }
    }
}

impl From<&BigInt> for IntLiteral {
    fn from(x: &BigInt) -> Self {
        match u64::try_from(x) {
            Ok(v) => IntLiteral::Number(v),
            Err(_) => IntLiteral::Text(x.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub u: usize,
    pub v: usize,
    pub p: IntLiteral,
    pub q: IntLiteral,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub n: usize,
    pub mode: Mode,
    pub edges: Vec<EdgeRecord>,
}

impl GraphFile {
    pub fn to_instance(&self) -> Result<IsingInstance> {
        let mut pairs = Vec::with_capacity(self.edges.len());
        let mut beta = Vec::with_capacity(self.edges.len());
        for (i, e) in self.edges.iter().enumerate() {
            let p = e.p.to_bigint("p", i)?;
            let q = e.q.to_bigint("q", i)?;
            if !p.is_positive() || !q.is_positive() {
                return Err(Error::Parse(format!(
                    "edges[{i}]: p and q must be positive, got p={p}, q={q}"
                )));
            }
            let b = match self.mode {
                Mode::Ferromagnetic => Rational::one() + Rational::new(p, q),
                Mode::Antiferromagnetic => {
                    if p >= q {
                        return Err(Error::Parse(format!(
                            "edges[{i}]: antiferromagnetic weight p/q needs p < q, got {p}/{q}"
                        )));
                    }
                    Rational::new(p, q)
                }
            };
            pairs.push((e.u, e.v));
            beta.push(b);
        }
        let graph = WeightedGraph::new(self.n, pairs, beta)
            .map_err(|e| Error::Parse(format!("graph: {e}")))?;
        IsingInstance::from_graph(graph, self.mode)
    }

    pub fn from_instance(instance: &IsingInstance) -> Self {
        let edges = instance
            .edges()
            .iter()
            .zip(instance.beta())
            .map(|(&(u, v), b)| {
                let r = match instance.mode() {
                    Mode::Ferromagnetic => b - Rational::one(),
                    Mode::Antiferromagnetic => b.clone(),
                };
                EdgeRecord {
                    u,
                    v,
                    p: IntLiteral::from(r.numer()),
                    q: IntLiteral::from(r.denom()),
                }
            })
            .collect();
        GraphFile {
            n: instance.n(),
            mode: instance.mode(),
            edges,
        }
    }
}

/// Parses a graph document; JSON syntax errors carry line and column.
pub fn parse_graph(text: &str) -> Result<IsingInstance> {
    let file: GraphFile = serde_json::from_str(text).map_err(|e| {
        Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column()))
    })?;
    file.to_instance()
}

pub fn read_graph(path: &std::path::Path) -> Result<IsingInstance> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_graph(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn to_json(instance: &IsingInstance) -> String {
    serde_json::to_string_pretty(&GraphFile::from_instance(instance)).expect("graph serialises")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn parses_ferromagnetic_edge() {
        let inst = parse_graph(r#"{"n":2,"mode":"ferromagnetic","edges":[{"u":0,"v":1,"p":2,"q":1}]}"#)
            .unwrap();
        assert_eq!(inst.beta()[0], int(3));
    }

    #[test]
    fn parses_big_integers_as_strings() {
        let inst = parse_graph(
            r#"{"n":2,"mode":"ferromagnetic","edges":[{"u":0,"v":1,"p":"100000000000000000000000","q":"1"}]}"#,
        )
        .unwrap();
        assert_eq!(inst.beta()[0], parse_big("100000000000000000000001"));
    }

    fn parse_big(s: &str) -> Rational {
        crate::rational::parse(s).unwrap()
    }

    #[test]
    fn parses_antiferromagnetic_edge() {
        let inst = parse_graph(r#"{"n":2,"mode":"antiferromagnetic","edges":[{"u":0,"v":1,"p":1,"q":2}]}"#)
            .unwrap();
        assert_eq!(inst.beta()[0], ratio(1, 2));
        let bad = parse_graph(r#"{"n":2,"mode":"antiferromagnetic","edges":[{"u":0,"v":1,"p":2,"q":2}]}"#);
        assert!(matches!(bad, Err(Error::Parse(_))));
    }

    #[test]
    fn rejects_floats_and_bad_structure() {
        let e = parse_graph(r#"{"n":2,"mode":"ferromagnetic","edges":[{"u":0,"v":1,"p":0.5,"q":1}]}"#);
        assert!(matches!(e, Err(Error::Parse(_))));
        let e = parse_graph("{\"n\":2,\n\"mode\":\"ferro\"}").unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
        let e = parse_graph(r#"{"n":2,"mode":"ferromagnetic","edges":[{"u":0,"v":0,"p":1,"q":1}]}"#);
        assert!(e.unwrap_err().to_string().contains("self-loop"));
    }

    #[test]
    fn serialises_back() {
        let inst = IsingInstance::ferromagnetic(3, &[(0, 1, 2i64, 1), (1, 2, 1, 9)]).unwrap();
        let text = to_json(&inst);
        assert_eq!(parse_graph(&text).unwrap(), inst);
    }
}
