//! Chain specifications: vertex classes, class-level adjacency, and a finite
//! set of forbidden vertex pairs.
//!
//! A specification describes a countable directed graph G together with a
//! positive height per vertex. Vertices come in declared classes: finite
//! classes list their members explicitly, infinite families are indexed by
//! an integer `k >= k0` with a height formula `g(k)` and an optional
//! multiplicity `m(k)` (the family contains `m(k)` distinct vertices of
//! height `g(k)`). Edges are complete-minus-exceptions or an explicit set of
//! class pairs; the finite exception set D removes individual vertex pairs
//! on top of the class-level rule.

use crate::expr::{ExprError, WeightExpr};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("class `{0}` is empty")]
    EmptyClass(String),
    #[error("duplicate vertex label `{0}`")]
    DuplicateLabel(String),
    #[error("forbidden pair references unknown vertex `{0}`")]
    UnknownForbidVertex(String),
    #[error("forbidden pair references `{0}`, which belongs to an infinite class")]
    ForbidInfiniteVertex(String),
    #[error("forbidden member index {k} is below the family start of class `{class}`")]
    ForbidIndexOutOfRange { class: String, k: i64 },
    #[error("edge pair references unknown class `{0}`")]
    UnknownClassInPairs(String),
    #[error("forbidden pair ({0}, {1}) is not allowed at class level, so there is nothing to remove")]
    ForbidOutsidePairs(String, String),
    #[error("graph is not strongly connected")]
    Disconnected,
    #[error("vertex `{0}` has no outgoing or no incoming edge")]
    DeadEnd(String),
    #[error("root `{0}` not found among named vertices")]
    RootNotFound(String),
    #[error("root `{0}` must be a member of a finite class")]
    RootInInfiniteClass(String),
    #[error("family `{class}`: {source}")]
    FamilyEval {
        class: String,
        #[source]
        source: ExprError,
    },
    #[error("family `{class}`: height must be positive, got {value} at k = {k}")]
    NonPositiveFamilyHeight { class: String, k: i64, value: f64 },
    #[error("family `{class}`: multiplicity must be a non-negative integer, got {value} at k = {k}")]
    BadMultiplicity { class: String, k: i64, value: f64 },
    #[error("family `{class}`: multiplicity is zero on the whole probe window")]
    AllZeroMultiplicity { class: String },
    #[error("refinement produced an inconsistent class split")]
    RftViolation,
}

/// A named vertex of a finite class with its evaluated height.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteVertex {
    pub label: String,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClassKind {
    Finite(Vec<FiniteVertex>),
    Family {
        k0: i64,
        height: WeightExpr,
        /// Number of vertices carrying height `g(k)`; defaults to one.
        mult: Option<WeightExpr>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassDecl {
    pub name: String,
    pub kind: ClassKind,
}

impl ClassDecl {
    pub fn is_family(&self) -> bool {
        matches!(self.kind, ClassKind::Family { .. })
    }
}

/// Reference to a single vertex in a forbidden pair. Parsed files only ever
/// produce `Label`; `Member` addresses the k-th vertex of a family and is
/// available to programmatic constructions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum VertexRef {
    Label(String),
    Member { class: String, k: i64 },
}

impl fmt::Display for VertexRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexRef::Label(l) => write!(f, "{l}"),
            VertexRef::Member { class, k } => write!(f, "{class}[{k}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EdgeMode {
    /// Every class pair allowed (self-pairs included); D removes exceptions.
    CompleteMinusD,
    /// Only the listed ordered class pairs allowed; D removes exceptions
    /// inside allowed pairs.
    Pairs(BTreeSet<(String, String)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeDecl {
    pub mode: EdgeMode,
    pub forbidden: Vec<(VertexRef, VertexRef)>,
}

/// A validated chain specification.
#[derive(Debug, Clone, PartialEq)]
pub struct RftSpec {
    pub classes: Vec<ClassDecl>,
    pub edges: EdgeDecl,
    /// Default root vertex (a named vertex of a finite class).
    pub root: String,
}

/// How many indices of each family the validator probes for positivity and
/// integrality of the declared formulas.
pub(crate) const PROBE_WINDOW: i64 = 64;

impl RftSpec {
    /// Check all structural invariants. Strong connectivity is verified on
    /// the finite atom graph, which is faithful to the full countable graph.
    pub fn validate(&self) -> Result<(), ModelError> {
        let mut labels = BTreeSet::new();
        for class in &self.classes {
            match &class.kind {
                ClassKind::Finite(vs) => {
                    if vs.is_empty() {
                        return Err(ModelError::EmptyClass(class.name.clone()));
                    }
                    for v in vs {
                        if !labels.insert(v.label.clone()) {
                            return Err(ModelError::DuplicateLabel(v.label.clone()));
                        }
                    }
                }
                ClassKind::Family { k0, height, mult } => {
                    let mut any_mult = false;
                    for k in *k0..*k0 + PROBE_WINDOW {
                        let h = height.eval(k).map_err(|source| ModelError::FamilyEval {
                            class: class.name.clone(),
                            source,
                        })?;
                        if h <= 0.0 {
                            return Err(ModelError::NonPositiveFamilyHeight {
                                class: class.name.clone(),
                                k,
                                value: h,
                            });
                        }
                        if let Some(m) = mult {
                            let mv = m.eval(k).map_err(|source| ModelError::FamilyEval {
                                class: class.name.clone(),
                                source,
                            })?;
                            let tol = 1e-9 * mv.abs().max(1.0);
                            if mv < -tol || (mv - mv.round()).abs() > tol {
                                return Err(ModelError::BadMultiplicity {
                                    class: class.name.clone(),
                                    k,
                                    value: mv,
                                });
                            }
                            if mv >= 0.5 {
                                any_mult = true;
                            }
                        } else {
                            any_mult = true;
                        }
                    }
                    if !any_mult {
                        return Err(ModelError::AllZeroMultiplicity {
                            class: class.name.clone(),
                        });
                    }
                }
            }
        }

        if let EdgeMode::Pairs(pairs) = &self.edges.mode {
            for (a, b) in pairs {
                for name in [a, b] {
                    if !self.classes.iter().any(|c| &c.name == name) {
                        return Err(ModelError::UnknownClassInPairs(name.clone()));
                    }
                }
            }
        }

        for (a, b) in &self.edges.forbidden {
            let ca = self.resolve_ref(a)?;
            let cb = self.resolve_ref(b)?;
            if !self.class_pair_allowed(ca, cb) {
                return Err(ModelError::ForbidOutsidePairs(a.to_string(), b.to_string()));
            }
        }

        // Root checks and connectivity on the atom graph.
        self.class_of_label(&self.root)
            .ok_or_else(|| ModelError::RootNotFound(self.root.clone()))?;
        let atoms = AtomGraph::build(self);
        atoms.check_connected()?;
        Ok(())
    }

    /// Class index of a vertex reference; errors mirror the parse contract
    /// (labels must name finite-class members, member refs must be in range).
    fn resolve_ref(&self, r: &VertexRef) -> Result<usize, ModelError> {
        match r {
            VertexRef::Label(l) => {
                for (i, class) in self.classes.iter().enumerate() {
                    if let ClassKind::Finite(vs) = &class.kind {
                        if vs.iter().any(|v| &v.label == l) {
                            return Ok(i);
                        }
                    }
                }
                // A label matching a family class name reads as a mistake
                // worth a dedicated message.
                if self.classes.iter().any(|c| c.is_family() && &c.name == l) {
                    return Err(ModelError::ForbidInfiniteVertex(l.clone()));
                }
                Err(ModelError::UnknownForbidVertex(l.clone()))
            }
            VertexRef::Member { class, k } => {
                for (i, c) in self.classes.iter().enumerate() {
                    if &c.name == class {
                        if let ClassKind::Family { k0, .. } = &c.kind {
                            if *k < *k0 {
                                return Err(ModelError::ForbidIndexOutOfRange {
                                    class: class.clone(),
                                    k: *k,
                                });
                            }
                            return Ok(i);
                        }
                    }
                }
                Err(ModelError::UnknownForbidVertex(class.clone()))
            }
        }
    }

    pub(crate) fn class_pair_allowed(&self, ci: usize, cj: usize) -> bool {
        match &self.edges.mode {
            EdgeMode::CompleteMinusD => true,
            EdgeMode::Pairs(pairs) => pairs.contains(&(
                self.classes[ci].name.clone(),
                self.classes[cj].name.clone(),
            )),
        }
    }

    pub(crate) fn class_of_label(&self, label: &str) -> Option<usize> {
        self.classes.iter().position(|c| match &c.kind {
            ClassKind::Finite(vs) => vs.iter().any(|v| v.label == label),
            _ => false,
        })
    }

    pub(crate) fn height_of_label(&self, label: &str) -> Option<f64> {
        for c in &self.classes {
            if let ClassKind::Finite(vs) = &c.kind {
                if let Some(v) = vs.iter().find(|v| v.label == label) {
                    return Some(v.height);
                }
            }
        }
        None
    }

    /// All named vertices with their heights, in declaration order.
    pub fn named_vertices(&self) -> Vec<(String, f64)> {
        let mut out = Vec::new();
        for c in &self.classes {
            if let ClassKind::Finite(vs) = &c.kind {
                for v in vs {
                    out.push((v.label.clone(), v.height));
                }
            }
        }
        out
    }
}

/// One node of the finite quotient-ready view of the countable graph:
/// a named vertex, a single family member split off by an exception in D,
/// or the residual tail of a family.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Atom {
    Named { class: usize, label: String },
    Member { class: usize, k: i64 },
    Tail { class: usize, exclude: Vec<i64> },
}

impl Atom {
    pub fn class(&self) -> usize {
        match self {
            Atom::Named { class, .. } | Atom::Member { class, .. } | Atom::Tail { class, .. } => {
                *class
            }
        }
    }

    fn key(&self) -> Option<AtomKey> {
        match self {
            Atom::Named { label, .. } => Some(AtomKey::Named(label.clone())),
            Atom::Member { class, k } => Some(AtomKey::Member(*class, *k)),
            Atom::Tail { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum AtomKey {
    Named(String),
    Member(usize, i64),
}

/// Finite graph of atoms. Every vertex of G maps to exactly one atom, and
/// two vertices mapped to the same atom have identical adjacency, so paths,
/// reachability, and follower/leading sets of G are faithfully represented.
#[derive(Debug, Clone)]
pub(crate) struct AtomGraph {
    pub atoms: Vec<Atom>,
    /// adj[i][j]: every vertex of atom i has an edge to every vertex of atom j.
    pub adj: Vec<Vec<bool>>,
}

impl AtomGraph {
    pub fn build(spec: &RftSpec) -> AtomGraph {
        // Family indices split off by D.
        let mut boundaries: BTreeMap<usize, BTreeSet<i64>> = BTreeMap::new();
        for (a, b) in &spec.edges.forbidden {
            for r in [a, b] {
                if let VertexRef::Member { class, k } = r {
                    if let Some(ci) = spec.classes.iter().position(|c| &c.name == class) {
                        boundaries.entry(ci).or_default().insert(*k);
                    }
                }
            }
        }

        let mut atoms = Vec::new();
        for (ci, class) in spec.classes.iter().enumerate() {
            match &class.kind {
                ClassKind::Finite(vs) => {
                    for v in vs {
                        atoms.push(Atom::Named {
                            class: ci,
                            label: v.label.clone(),
                        });
                    }
                }
                ClassKind::Family { .. } => {
                    let split: Vec<i64> = boundaries
                        .get(&ci)
                        .map(|s| s.iter().copied().collect())
                        .unwrap_or_default();
                    for &k in &split {
                        atoms.push(Atom::Member { class: ci, k });
                    }
                    atoms.push(Atom::Tail {
                        class: ci,
                        exclude: split,
                    });
                }
            }
        }

        let forb: BTreeSet<(AtomKey, AtomKey)> = spec
            .edges
            .forbidden
            .iter()
            .map(|(a, b)| (ref_key(spec, a), ref_key(spec, b)))
            .collect();

        let n = atoms.len();
        let mut adj = vec![vec![false; n]; n];
        for i in 0..n {
            for j in 0..n {
                if !spec.class_pair_allowed(atoms[i].class(), atoms[j].class()) {
                    continue;
                }
                let removed = match (atoms[i].key(), atoms[j].key()) {
                    (Some(a), Some(b)) => forb.contains(&(a, b)),
                    _ => false,
                };
                adj[i][j] = !removed;
            }
        }
        AtomGraph { atoms, adj }
    }

    pub fn check_connected(&self) -> Result<(), ModelError> {
        let n = self.atoms.len();
        for i in 0..n {
            let has_out = (0..n).any(|j| self.adj[i][j]);
            let has_in = (0..n).any(|j| self.adj[j][i]);
            if !has_out || !has_in {
                return Err(ModelError::DeadEnd(format!("{:?}", self.atoms[i])));
            }
        }
        let fwd = self.reach(0, false);
        let bwd = self.reach(0, true);
        if fwd.iter().any(|r| !r) || bwd.iter().any(|r| !r) {
            return Err(ModelError::Disconnected);
        }
        Ok(())
    }

    fn reach(&self, start: usize, reverse: bool) -> Vec<bool> {
        let n = self.atoms.len();
        let mut seen = vec![false; n];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            for (u, seen_u) in seen.iter_mut().enumerate() {
                let edge = if reverse { self.adj[u][v] } else { self.adj[v][u] };
                if edge && !*seen_u {
                    *seen_u = true;
                    stack.push(u);
                }
            }
        }
        seen
    }

    pub fn index_of_label(&self, label: &str) -> Option<usize> {
        self.atoms.iter().position(|a| match a {
            Atom::Named { label: l, .. } => l == label,
            _ => false,
        })
    }
}

fn ref_key(spec: &RftSpec, r: &VertexRef) -> AtomKey {
    match r {
        VertexRef::Label(l) => AtomKey::Named(l.clone()),
        VertexRef::Member { class, k } => {
            let ci = spec
                .classes
                .iter()
                .position(|c| &c.name == class)
                .expect("validated member ref");
            AtomKey::Member(ci, *k)
        }
    }
}
