//! Follower/leading-set refinement and the finite quotient graph.
//!
//! Two vertices are equivalent when they have the same follower set and the
//! same leading set in G. Grouping the atoms of a specification by those
//! vertex-level signatures (restricted so that declared classes are only
//! ever split, never merged) yields a finite partition on which adjacency is
//! all-or-nothing. Fixing a root vertex `w` and splitting it into its own
//! singleton class produces the quotient graph used by the generating
//! function machinery.

use crate::model::{Atom, AtomGraph, ClassKind, ModelError, RftSpec};
use crate::series::FamilyDef;
use std::collections::BTreeMap;

/// One class of the refined partition.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinedClass {
    /// Labels of named members, in declaration order.
    pub labels: Vec<String>,
    /// Family members split off by exceptions, as (family class name, k).
    pub members: Vec<(String, i64)>,
    /// Family tails, as (family class name, excluded indices).
    pub tails: Vec<(String, Vec<i64>)>,
}

impl RefinedClass {
    pub fn is_infinite(&self) -> bool {
        !self.tails.is_empty()
    }

    /// Compact rendering such as `{3}`, `{4, 5}` or `{6, 7, ...}`.
    pub fn describe(&self) -> String {
        let mut parts: Vec<String> = self.labels.clone();
        parts.extend(self.members.iter().map(|(c, k)| format!("{c}[{k}]")));
        for (c, ex) in &self.tails {
            if ex.is_empty() {
                parts.push(format!("{c}[..]"));
            } else {
                parts.push(format!("{c}[..] minus {ex:?}"));
            }
        }
        format!("{{{}}}", parts.join(", "))
    }
}

/// Group atoms by (declared class, follower set, leading set).
///
/// The signature is absolute (sets of atoms, not of partition classes), so a
/// single pass computes the fixpoint: two atoms land in the same class iff
/// every vertex they represent has identical adjacency in G.
pub fn refine_partition(spec: &RftSpec) -> Result<Vec<RefinedClass>, ModelError> {
    let g = AtomGraph::build(spec);
    g.check_connected()?;
    Ok(refine_atoms(spec, &g)
        .into_iter()
        .map(|idxs| class_from_atoms(spec, &g, &idxs))
        .collect())
}

fn refine_atoms(spec: &RftSpec, g: &AtomGraph) -> Vec<Vec<usize>> {
    let _ = spec;
    let n = g.atoms.len();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut sig_of: BTreeMap<(usize, Vec<bool>, Vec<bool>), usize> = BTreeMap::new();
    for i in 0..n {
        let out: Vec<bool> = (0..n).map(|j| g.adj[i][j]).collect();
        let inc: Vec<bool> = (0..n).map(|j| g.adj[j][i]).collect();
        let key = (g.atoms[i].class(), out, inc);
        match sig_of.get(&key) {
            Some(&gi) => groups[gi].push(i),
            None => {
                sig_of.insert(key, groups.len());
                groups.push(vec![i]);
            }
        }
    }
    // Order groups by first atom so declaration order is preserved.
    groups.sort_by_key(|idxs| idxs[0]);
    groups
}

fn class_from_atoms(spec: &RftSpec, g: &AtomGraph, idxs: &[usize]) -> RefinedClass {
    let mut rc = RefinedClass {
        labels: Vec::new(),
        members: Vec::new(),
        tails: Vec::new(),
    };
    for &i in idxs {
        match &g.atoms[i] {
            Atom::Named { label, .. } => rc.labels.push(label.clone()),
            Atom::Member { class, k } => rc.members.push((spec.classes[*class].name.clone(), *k)),
            Atom::Tail { class, exclude } => rc
                .tails
                .push((spec.classes[*class].name.clone(), exclude.clone())),
        }
    }
    rc
}

/// Position of a class in the reindexed quotient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    /// The singleton root class.
    Root,
    /// Some outgoing edge of G is missing: indices 1..=ell.
    Constrained,
    /// Full outgoing edges, some incoming edge missing.
    FreeMissingIn,
    /// Full outgoing and incoming edges.
    Free,
}

/// Member of a quotient class, with everything needed to evaluate its
/// weight series.
#[derive(Debug, Clone, PartialEq)]
pub enum QAtom {
    Named { label: String, height: f64 },
    Member { family: usize, k: i64 },
    Tail { family: usize, exclude: Vec<i64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct QClass {
    pub atoms: Vec<QAtom>,
    pub band: Band,
}

impl QClass {
    pub fn is_infinite(&self) -> bool {
        self.atoms.iter().any(|a| matches!(a, QAtom::Tail { .. }))
    }
}

/// The finite quotient graph for a fixed root vertex.
///
/// Classes are indexed 0..=m with class 0 the singleton root. Classes
/// 1..=ell are the constrained band (some missing out-edge in G), followed
/// by classes with full out-edges, so the upper-left `ell x ell` block of
/// the weighted system matrix is exactly the constrained sub-system.
#[derive(Debug, Clone)]
pub struct QuotientGraph {
    pub root_label: String,
    pub root_height: f64,
    pub classes: Vec<QClass>,
    /// `adjacency[i][j]`: every vertex of class i has an edge to every
    /// vertex of class j.
    pub adjacency: Vec<Vec<bool>>,
    pub follower_sets: Vec<Vec<usize>>,
    pub leading_sets: Vec<Vec<usize>>,
    /// Number of constrained classes.
    pub ell: usize,
    /// Families referenced by `QAtom`s.
    pub families: Vec<FamilyDef>,
}

impl QuotientGraph {
    /// Number of non-root classes.
    pub fn m(&self) -> usize {
        self.classes.len() - 1
    }

    pub fn describe_classes(&self) -> Vec<String> {
        self.classes
            .iter()
            .map(|c| {
                let parts: Vec<String> = c
                    .atoms
                    .iter()
                    .map(|a| match a {
                        QAtom::Named { label, .. } => label.clone(),
                        QAtom::Member { family, k } => {
                            format!("{}[{}]", self.families[*family].name, k)
                        }
                        QAtom::Tail { family, exclude } => {
                            let name = &self.families[*family].name;
                            if exclude.is_empty() {
                                format!("{name}[..]")
                            } else {
                                format!("{name}[..] minus {exclude:?}")
                            }
                        }
                    })
                    .collect();
                format!("{{{}}}", parts.join(", "))
            })
            .collect()
    }
}

/// Build the quotient graph rooted at the named vertex `w`.
pub fn build_quotient(spec: &RftSpec, w: &str) -> Result<QuotientGraph, ModelError> {
    let g = AtomGraph::build(spec);
    g.check_connected()?;
    let w_atom = g.index_of_label(w).ok_or_else(|| {
        if spec.classes.iter().any(|c| c.is_family() && c.name == w) {
            ModelError::RootInInfiniteClass(w.to_string())
        } else {
            ModelError::RootNotFound(w.to_string())
        }
    })?;

    let mut groups = refine_atoms(spec, &g);
    // Split {w} into its own class, keeping the remainder in place.
    let gi = groups
        .iter()
        .position(|idxs| idxs.contains(&w_atom))
        .expect("root atom is in some group");
    groups[gi].retain(|&i| i != w_atom);
    if groups[gi].is_empty() {
        groups.remove(gi);
    }

    let n = g.atoms.len();
    let full_out = |idxs: &[usize]| (0..n).all(|j| g.adj[idxs[0]][j]);
    let full_in = |idxs: &[usize]| (0..n).all(|j| g.adj[j][idxs[0]]);

    // Reindex: root, then constrained classes, then full-out classes with a
    // missing in-edge, then fully unconstrained classes. Declaration order
    // is kept within each band.
    let mut ordered: Vec<(Vec<usize>, Band)> = vec![(vec![w_atom], Band::Root)];
    let mut ell = 0;
    for idxs in groups.iter().filter(|idxs| !full_out(idxs)) {
        ordered.push((idxs.clone(), Band::Constrained));
        ell += 1;
    }
    for idxs in groups.iter().filter(|idxs| full_out(idxs) && !full_in(idxs)) {
        ordered.push((idxs.clone(), Band::FreeMissingIn));
    }
    for idxs in groups.iter().filter(|idxs| full_out(idxs) && full_in(idxs)) {
        ordered.push((idxs.clone(), Band::Free));
    }

    // Families referenced by atoms, with their evaluation-ready definitions.
    let mut family_slot: BTreeMap<usize, usize> = BTreeMap::new();
    let mut families = Vec::new();
    for (idxs, _) in &ordered {
        for &i in idxs.iter() {
            let ci = g.atoms[i].class();
            if spec.classes[ci].is_family() && !family_slot.contains_key(&ci) {
                family_slot.insert(ci, families.len());
                if let ClassKind::Family { k0, height, mult } = &spec.classes[ci].kind {
                    families.push(FamilyDef::new(
                        spec.classes[ci].name.clone(),
                        *k0,
                        height.clone(),
                        mult.clone(),
                    ));
                }
            }
        }
    }

    let classes: Vec<QClass> = ordered
        .iter()
        .map(|(idxs, band)| {
            let atoms = idxs
                .iter()
                .map(|&i| match &g.atoms[i] {
                    Atom::Named { label, .. } => QAtom::Named {
                        label: label.clone(),
                        height: spec.height_of_label(label).expect("named vertex height"),
                    },
                    Atom::Member { class, k } => QAtom::Member {
                        family: family_slot[class],
                        k: *k,
                    },
                    Atom::Tail { class, exclude } => QAtom::Tail {
                        family: family_slot[class],
                        exclude: exclude.clone(),
                    },
                })
                .collect();
            QClass {
                atoms,
                band: *band,
            }
        })
        .collect();

    let mcount = ordered.len();
    let mut adjacency = vec![vec![false; mcount]; mcount];
    for (i, (ai, _)) in ordered.iter().enumerate() {
        for (j, (aj, _)) in ordered.iter().enumerate() {
            adjacency[i][j] = g.adj[ai[0]][aj[0]];
            // All-or-nothing at vertex-pair level, by construction.
            debug_assert!(ai
                .iter()
                .all(|&a| aj.iter().all(|&b| g.adj[a][b] == adjacency[i][j])));
        }
    }
    let follower_sets: Vec<Vec<usize>> = (0..mcount)
        .map(|i| (0..mcount).filter(|&j| adjacency[i][j]).collect())
        .collect();
    let leading_sets: Vec<Vec<usize>> = (0..mcount)
        .map(|i| (0..mcount).filter(|&j| adjacency[j][i]).collect())
        .collect();

    let root_height = spec
        .height_of_label(w)
        .ok_or_else(|| ModelError::RootNotFound(w.to_string()))?;

    Ok(QuotientGraph {
        root_label: w.to_string(),
        root_height,
        classes,
        adjacency,
        follower_sets,
        leading_sets,
        ell,
        families,
    })
}

/// First BFS level of every class when walking follower edges from the root,
/// together with the connectivity bound `level <= m - k + 2` where `k` is
/// the number of non-root follower classes of the root.
pub fn tree_level_check(q: &QuotientGraph) -> (BTreeMap<usize, usize>, bool) {
    let n = q.classes.len();
    let mut level = BTreeMap::new();
    level.insert(0usize, 0usize);
    let mut frontier = vec![0usize];
    let mut depth = 0usize;
    while !frontier.is_empty() {
        depth += 1;
        let mut next = Vec::new();
        for &i in &frontier {
            for &j in &q.follower_sets[i] {
                if let std::collections::btree_map::Entry::Vacant(e) = level.entry(j) {
                    e.insert(depth);
                    next.push(j);
                }
            }
        }
        frontier = next;
    }
    let m = q.m();
    let k = q.follower_sets[0].iter().filter(|&&j| j != 0).count();
    let bound = (m + 2).saturating_sub(k);
    let ok = level.len() == n && level.values().all(|&l| l <= bound);
    (level, ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::WeightExpr;
    use crate::model::{ClassDecl, EdgeDecl, EdgeMode, RftSpec, VertexRef};
    use crate::parser::parse_spec;

    fn height_2ln125k() -> WeightExpr {
        use WeightExpr::*;
        Mul(
            Box::new(Num(2.0)),
            Box::new(Ln(Box::new(Mul(Box::new(Num(1.25)), Box::new(Var))))),
        )
    }

    fn mref(class: &str, k: i64) -> VertexRef {
        VertexRef::Member {
            class: class.into(),
            k,
        }
    }

    /// Positive geometric-code system declared as a single family
    /// {3, 4, 5, ...} with exceptions touching its first three members.
    fn one_class_spec() -> RftSpec {
        RftSpec {
            classes: vec![ClassDecl {
                name: "v".into(),
                kind: ClassKind::Family {
                    k0: 3,
                    height: height_2ln125k(),
                    mult: None,
                },
            }],
            edges: EdgeDecl {
                mode: EdgeMode::CompleteMinusD,
                forbidden: vec![
                    (mref("v", 3), mref("v", 3)),
                    (mref("v", 3), mref("v", 4)),
                    (mref("v", 3), mref("v", 5)),
                    (mref("v", 4), mref("v", 3)),
                    (mref("v", 5), mref("v", 3)),
                ],
            },
            root: "unused".into(),
        }
    }

    #[test]
    fn one_class_input_splits_into_three() {
        let p = refine_partition(&one_class_spec()).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p[0].members, vec![("v".into(), 3)]);
        assert_eq!(p[1].members, vec![("v".into(), 4), ("v".into(), 5)]);
        assert!(p[2].is_infinite());
        assert_eq!(p[2].tails[0].1, vec![3, 4, 5]);
    }

    #[test]
    fn refinement_is_idempotent_on_complete_graph() {
        let spec =
            parse_spec("class a finite { a: 1, b: 1, c: 1 }\nedges complete_minus_D\nroot a\n")
                .unwrap();
        let p = refine_partition(&spec).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].labels, vec!["a", "b", "c"]);
    }

    #[test]
    fn example_quotient_shape() {
        // {3} -> rest only; {4,5} -> {4,5} and rest; rest -> everything.
        let text = "
class head finite { 3: 2*ln(3.75) }
class mid finite { 4: 2*ln(5), 5: 2*ln(6.25) }
class tail family k from 6 height 2*ln(1.25*k)
edges complete_minus_D
forbid { (3,3), (3,4), (3,5), (4,3), (5,3) }
root 3
";
        let spec = parse_spec(text).unwrap();
        let q = build_quotient(&spec, "3").unwrap();
        assert_eq!(q.m(), 2);
        assert_eq!(q.ell, 1);
        // V_1 = {4,5} constrained, V_2 = tail free.
        assert_eq!(q.classes[1].band, Band::Constrained);
        assert_eq!(q.classes[2].band, Band::Free);
        assert_eq!(q.follower_sets[0], vec![2]);
        assert_eq!(q.follower_sets[1], vec![1, 2]);
        assert_eq!(q.follower_sets[2], vec![0, 1, 2]);
        let (levels, ok) = tree_level_check(&q);
        assert!(ok);
        assert_eq!(levels[&0], 0);
        assert_eq!(levels[&2], 1);
        assert_eq!(levels[&1], 2);
    }

    #[test]
    fn self_loop_quotient_is_trivial() {
        let spec =
            parse_spec("class a finite { a: 1.0 }\nedges complete_minus_D\nroot a\n").unwrap();
        let q = build_quotient(&spec, "a").unwrap();
        assert_eq!(q.m(), 0);
        assert!(q.adjacency[0][0]);
        let (levels, ok) = tree_level_check(&q);
        assert!(ok);
        assert_eq!(levels.len(), 1);
        assert_eq!(levels[&0], 0);
    }

    #[test]
    fn root_errors() {
        let spec = parse_spec(
            "class a finite { a: 1.0 }\nclass f family k from 1 height k\nedges complete_minus_D\nroot a\n",
        )
        .unwrap();
        assert!(matches!(
            build_quotient(&spec, "zz"),
            Err(ModelError::RootNotFound(_))
        ));
        assert!(matches!(
            build_quotient(&spec, "f"),
            Err(ModelError::RootInInfiniteClass(_))
        ));
    }

    #[test]
    fn refinement_does_not_depend_on_declaration_order() {
        let a = "
class x finite { a: 1, b: 1 }
class y finite { c: 1 }
edges complete_minus_D
forbid { (a,c), (c,a) }
root b
";
        let b = "
class y finite { c: 1 }
class x finite { a: 1, b: 1 }
edges complete_minus_D
forbid { (a,c), (c,a) }
root b
";
        let pa = refine_partition(&parse_spec(a).unwrap()).unwrap();
        let pb = refine_partition(&parse_spec(b).unwrap()).unwrap();
        let mut da: Vec<_> = pa.iter().map(|c| c.describe()).collect();
        let mut db: Vec<_> = pb.iter().map(|c| c.describe()).collect();
        da.sort();
        db.sort();
        assert_eq!(da, db);
    }
}
