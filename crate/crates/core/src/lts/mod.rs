//! Rooted labeled transition systems: path structures, shared-root sums,
//! the extension relation and bounded tree enumeration.

pub mod trees;

use crate::alphabet::DOLLAR;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LtsError {
    #[error("lts parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("missing `root` line")]
    MissingRoot,
}

/// Labeled transition system with a total proposition labeling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Lts {
    pub state_names: Vec<String>,
    pub edges: BTreeSet<(usize, char, usize)>,
    pub labels: Vec<BTreeSet<String>>,
}

impl Lts {
    pub fn state_count(&self) -> usize {
        self.state_names.len()
    }

    pub fn state_id(&self, name: &str) -> Option<usize> {
        self.state_names.iter().position(|n| n == name)
    }

    pub fn successors(&self, s: usize) -> impl Iterator<Item = (char, usize)> + '_ {
        self.edges
            .iter()
            .filter(move |(from, _, _)| *from == s)
            .map(|&(_, c, to)| (c, to))
    }

    pub fn letters(&self) -> BTreeSet<char> {
        self.edges.iter().map(|&(_, c, _)| c).collect()
    }

    pub fn is_acyclic(&self) -> bool {
        self.topo_order().is_some()
    }

    fn topo_order(&self) -> Option<Vec<usize>> {
        let n = self.state_count();
        let mut indegree = vec![0usize; n];
        for &(_, _, to) in &self.edges {
            indegree[to] += 1;
        }
        let mut queue: VecDeque<usize> =
            (0..n).filter(|&s| indegree[s] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(s) = queue.pop_front() {
            order.push(s);
            for (_, t) in self.successors(s) {
                indegree[t] -= 1;
                if indegree[t] == 0 {
                    queue.push_back(t);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Length of the longest path, `None` on cyclic systems.
    pub fn longest_path(&self) -> Option<usize> {
        let order = self.topo_order()?;
        let mut dist = vec![0usize; self.state_count()];
        for &s in order.iter().rev() {
            for (_, t) in self.successors(s) {
                dist[s] = dist[s].max(dist[t] + 1);
            }
        }
        Some(dist.into_iter().max().unwrap_or(0))
    }
}

/// An LTS with a designated root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Structure {
    pub lts: Lts,
    pub root: usize,
}

impl Structure {
    pub fn single_state() -> Structure {
        Structure {
            lts: Lts {
                state_names: vec!["s0".into()],
                edges: BTreeSet::new(),
                labels: vec![BTreeSet::new()],
            },
            root: 0,
        }
    }

    pub fn root_name(&self) -> &str {
        &self.lts.state_names[self.root]
    }

    pub fn state_count(&self) -> usize {
        self.lts.state_count()
    }

    /// Parse the `state`/`edge`/`root` line format.
    pub fn parse(text: &str) -> Result<Structure, LtsError> {
        let mut names: Vec<String> = Vec::new();
        let mut labels: Vec<BTreeSet<String>> = Vec::new();
        let mut edge_lines: Vec<(usize, String, char, String)> = Vec::new();
        let mut root_name: Option<String> = None;
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut tokens = line.split_whitespace();
            match tokens.next() {
                Some("state") => {
                    let name = tokens
                        .next()
                        .ok_or_else(|| LtsError::Parse {
                            line: line_no,
                            msg: "expected `state NAME [props p,q]`".into(),
                        })?
                        .to_string();
                    let mut props = BTreeSet::new();
                    if let Some(kw) = tokens.next() {
                        if kw != "props" {
                            return Err(LtsError::Parse {
                                line: line_no,
                                msg: format!("unexpected token `{kw}`"),
                            });
                        }
                        let rest: String = tokens.collect::<Vec<_>>().join(" ");
                        for p in rest.split(',') {
                            let p = p.trim();
                            if !p.is_empty() {
                                props.insert(p.to_string());
                            }
                        }
                    }
                    names.push(name);
                    labels.push(props);
                }
                Some("edge") => {
                    let from = tokens.next();
                    let letter = tokens.next();
                    let to = tokens.next();
                    match (from, letter, to) {
                        (Some(f), Some(l), Some(t)) if l.chars().count() == 1 => {
                            edge_lines.push((
                                line_no,
                                f.to_string(),
                                l.chars().next().unwrap(),
                                t.to_string(),
                            ));
                        }
                        _ => {
                            return Err(LtsError::Parse {
                                line: line_no,
                                msg: "expected `edge FROM LETTER TO` with a single-character letter"
                                    .into(),
                            })
                        }
                    }
                }
                Some("root") => {
                    root_name = Some(
                        tokens
                            .next()
                            .ok_or_else(|| LtsError::Parse {
                                line: line_no,
                                msg: "expected `root NAME`".into(),
                            })?
                            .to_string(),
                    );
                }
                Some(other) => {
                    return Err(LtsError::Parse {
                        line: line_no,
                        msg: format!("unknown directive `{other}`"),
                    })
                }
                None => {}
            }
        }
        let id = |name: &str| {
            names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| LtsError::UnknownState(name.to_string()))
        };
        let mut edges = BTreeSet::new();
        for (_, from, letter, to) in &edge_lines {
            edges.insert((id(from)?, *letter, id(to)?));
        }
        let root = id(&root_name.ok_or(LtsError::MissingRoot)?)?;
        Ok(Structure {
            lts: Lts {
                state_names: names,
                edges,
                labels,
            },
            root,
        })
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, name) in self.lts.state_names.iter().enumerate() {
            if self.lts.labels[i].is_empty() {
                writeln!(f, "state {name}")?;
            } else {
                let props: Vec<&str> = self.lts.labels[i].iter().map(|s| s.as_str()).collect();
                writeln!(f, "state {name} props {}", props.join(","))?;
            }
        }
        for &(from, c, to) in &self.lts.edges {
            writeln!(
                f,
                "edge {} {c} {}",
                self.lts.state_names[from], self.lts.state_names[to]
            )?;
        }
        writeln!(f, "root {}", self.root_name())
    }
}

/// π_w: a bare path labeled by `w`; the last state has no successor and no
/// proposition holds anywhere.
pub fn path_structure(w: &str) -> Structure {
    let chars: Vec<char> = w.chars().collect();
    let n = chars.len();
    let state_names = (0..=n).map(|i| format!("p{i}")).collect();
    let labels = vec![BTreeSet::new(); n + 1];
    let edges = chars
        .iter()
        .enumerate()
        .map(|(i, &c)| (i, c, i + 1))
        .collect();
    Structure {
        lts: Lts {
            state_names,
            edges,
            labels,
        },
        root: 0,
    }
}

/// π_{w$}.
pub fn path_structure_dollar(w: &str) -> Structure {
    path_structure(&format!("{w}{DOLLAR}"))
}

/// ⊕: disjoint sum with all roots identified into one fresh root whose
/// labeling is empty.
pub fn oplus(structures: &[Structure]) -> Structure {
    assert!(!structures.is_empty(), "oplus needs at least one summand");
    let mut state_names = vec!["r".to_string()];
    let mut labels = vec![BTreeSet::new()];
    let mut edges = BTreeSet::new();
    for (idx, m) in structures.iter().enumerate() {
        // map: summand state -> new id (root maps to 0)
        let mut map: BTreeMap<usize, usize> = BTreeMap::new();
        map.insert(m.root, 0);
        for s in 0..m.lts.state_count() {
            if s == m.root {
                continue;
            }
            let id = state_names.len();
            state_names.push(format!("m{idx}_{}", m.lts.state_names[s]));
            labels.push(m.lts.labels[s].clone());
            map.insert(s, id);
        }
        for &(from, c, to) in &m.lts.edges {
            edges.insert((map[&from], c, map[&to]));
        }
    }
    Structure {
        lts: Lts {
            state_names,
            edges,
            labels,
        },
        root: 0,
    }
}

/// Componentwise containment: `ext` extends `base` (same root name, state,
/// edge and labeling containment, compared by state names).
pub fn is_extension(base: &Structure, ext: &Structure) -> bool {
    if base.root_name() != ext.root_name() {
        return false;
    }
    let ext_id: BTreeMap<&str, usize> = ext
        .lts
        .state_names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    for (i, name) in base.lts.state_names.iter().enumerate() {
        match ext_id.get(name.as_str()) {
            None => return false,
            Some(&j) => {
                if base.lts.labels[i] != ext.lts.labels[j] {
                    return false;
                }
            }
        }
    }
    for &(from, c, to) in &base.lts.edges {
        let f = ext_id[base.lts.state_names[from].as_str()];
        let t = ext_id[base.lts.state_names[to].as_str()];
        if !ext.lts.edges.contains(&(f, c, t)) {
            return false;
        }
    }
    true
}
