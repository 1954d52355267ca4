//! Shared helpers for the integration suites: bundled spec paths, random
//! finite chain generators, and an independent transfer-matrix cycle
//! counter used to cross-check the depth-first enumeration.

#![allow(dead_code)]

use entroflow::model::{ClassDecl, ClassKind, EdgeDecl, EdgeMode, FiniteVertex, RftSpec, VertexRef};
use entroflow::oracle::{CyclePoly, TruncatedGraph, WEIGHT_QUANTUM};
use rand::rngs::StdRng;
use rand::Rng;
use std::collections::BTreeSet;
use std::path::PathBuf;

pub fn spec_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../specs")
        .join(name)
}

pub fn load_spec(name: &str) -> RftSpec {
    let text = std::fs::read_to_string(spec_path(name)).expect("bundled spec exists");
    entroflow::parse_spec(&text).expect("bundled spec parses")
}

pub fn full_shift_spec(n: usize, height: f64) -> RftSpec {
    let vertices = (0..n)
        .map(|i| FiniteVertex {
            label: format!("v{i}"),
            height,
        })
        .collect();
    RftSpec {
        classes: vec![ClassDecl {
            name: "all".into(),
            kind: ClassKind::Finite(vertices),
        }],
        edges: EdgeDecl {
            mode: EdgeMode::CompleteMinusD,
            forbidden: Vec::new(),
        },
        root: "v0".into(),
    }
}

/// Random strongly connected digraph on singleton classes: a ring plus up
/// to `max_extra_out` extra edges per vertex. With `max_extra_out <= 1` the
/// interior branching stays at most 2, keeping deep DFS enumeration cheap.
pub fn random_pairs_spec(
    rng: &mut StdRng,
    n_lo: usize,
    n_hi: usize,
    h_lo: f64,
    h_hi: f64,
    max_extra_out: usize,
) -> RftSpec {
    let n = rng.gen_range(n_lo..=n_hi);
    let classes: Vec<ClassDecl> = (0..n)
        .map(|i| ClassDecl {
            name: format!("c{i}"),
            kind: ClassKind::Finite(vec![FiniteVertex {
                label: format!("v{i}"),
                height: rng.gen_range(h_lo..h_hi),
            }]),
        })
        .collect();
    let mut pairs = BTreeSet::new();
    for i in 0..n {
        pairs.insert((format!("c{i}"), format!("c{}", (i + 1) % n)));
        for _ in 0..max_extra_out {
            if rng.gen_bool(0.7) {
                let j = rng.gen_range(0..n);
                pairs.insert((format!("c{i}"), format!("c{j}")));
            }
        }
    }
    let spec = RftSpec {
        classes,
        edges: EdgeDecl {
            mode: EdgeMode::Pairs(pairs),
            forbidden: Vec::new(),
        },
        root: "v0".into(),
    };
    spec.validate().expect("ring keeps the graph connected");
    spec
}

/// Random complete graph minus a small exception set, retried until the
/// exceptions leave the graph strongly connected.
pub fn random_perturbation_spec(
    rng: &mut StdRng,
    n_lo: usize,
    n_hi: usize,
    h_lo: f64,
    h_hi: f64,
    d_max: usize,
) -> RftSpec {
    loop {
        let n = rng.gen_range(n_lo..=n_hi);
        let vertices: Vec<FiniteVertex> = (0..n)
            .map(|i| FiniteVertex {
                label: format!("v{i}"),
                height: rng.gen_range(h_lo..h_hi),
            })
            .collect();
        let d = rng.gen_range(0..=d_max);
        let mut forbidden = Vec::new();
        for _ in 0..d {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            forbidden.push((
                VertexRef::Label(format!("v{a}")),
                VertexRef::Label(format!("v{b}")),
            ));
        }
        let spec = RftSpec {
            classes: vec![ClassDecl {
                name: "all".into(),
                kind: ClassKind::Finite(vertices),
            }],
            edges: EdgeDecl {
                mode: EdgeMode::CompleteMinusD,
                forbidden,
            },
            root: "v0".into(),
        };
        if spec.validate().is_ok() {
            return spec;
        }
    }
}

fn expr(text: &str) -> entroflow::WeightExpr {
    entroflow::parser::parse_expr(text).unwrap()
}

fn member(class: &str, k: i64) -> VertexRef {
    VertexRef::Member {
        class: class.into(),
        k,
    }
}

/// The positive geodesic-code system declared as a single infinite family
/// {3, 4, 5, ...} with its five exceptions addressing family members.
pub fn geodesic_one_class_spec() -> RftSpec {
    RftSpec {
        classes: vec![ClassDecl {
            name: "v".into(),
            kind: ClassKind::Family {
                k0: 3,
                height: expr("2*ln(1.25*k)"),
                mult: None,
            },
        }],
        edges: EdgeDecl {
            mode: EdgeMode::CompleteMinusD,
            forbidden: vec![
                (member("v", 3), member("v", 3)),
                (member("v", 3), member("v", 4)),
                (member("v", 3), member("v", 5)),
                (member("v", 4), member("v", 3)),
                (member("v", 5), member("v", 3)),
            ],
        },
        root: "unused".into(),
    }
}

/// The two-sided geodesic-code system declared with six classes
/// ({2}, {3}, {4,5,...}, {-2}, {-3}, {-4,-5,...}); refinement must split
/// each family into a head pair and a tail, giving eight classes.
pub fn geodesic_six_class_spec() -> RftSpec {
    let finite = |name: &str, label: &str, v: f64| ClassDecl {
        name: name.into(),
        kind: ClassKind::Finite(vec![FiniteVertex {
            label: label.into(),
            height: 2.0 * (1.25 * v).ln(),
        }]),
    };
    let family = |name: &str| ClassDecl {
        name: name.into(),
        kind: ClassKind::Family {
            k0: 4,
            height: expr("2*ln(1.25*k)"),
            mult: None,
        },
    };
    let pairs: BTreeSet<(String, String)> = [
        ("c2", "n2"),
        ("c2", "n3"),
        ("c2", "nbig"),
        ("c3", "cbig"),
        ("c3", "n2"),
        ("c3", "n3"),
        ("c3", "nbig"),
        ("cbig", "c3"),
        ("cbig", "cbig"),
        ("cbig", "n2"),
        ("cbig", "n3"),
        ("cbig", "nbig"),
        ("n2", "c2"),
        ("n2", "c3"),
        ("n2", "cbig"),
        ("n3", "c2"),
        ("n3", "c3"),
        ("n3", "cbig"),
        ("n3", "nbig"),
        ("nbig", "c2"),
        ("nbig", "c3"),
        ("nbig", "cbig"),
        ("nbig", "n3"),
        ("nbig", "nbig"),
    ]
    .iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect();
    RftSpec {
        classes: vec![
            finite("c2", "2", 2.0),
            finite("c3", "3", 3.0),
            family("cbig"),
            finite("n2", "-2", 2.0),
            finite("n3", "-3", 3.0),
            family("nbig"),
        ],
        edges: EdgeDecl {
            mode: EdgeMode::Pairs(pairs),
            forbidden: vec![
                (VertexRef::Label("3".into()), member("cbig", 4)),
                (VertexRef::Label("3".into()), member("cbig", 5)),
                (member("cbig", 4), VertexRef::Label("3".into())),
                (member("cbig", 5), VertexRef::Label("3".into())),
                (VertexRef::Label("-3".into()), member("nbig", 4)),
                (VertexRef::Label("-3".into()), member("nbig", 5)),
                (member("nbig", 4), VertexRef::Label("-3".into())),
                (member("nbig", 5), VertexRef::Label("-3".into())),
            ],
        },
        root: "2".into(),
    }
}

/// Weight-bucketed dynamic program over path states: an independent
/// enumerator for first-return cycles, equivalent to powering the interior
/// transfer matrix. Weights accumulate left to right exactly as in the
/// depth-first search, so the resulting polynomial matches bit for bit.
pub fn transfer_cycle_poly(tg: &TruncatedGraph, root: &str, max_len: usize) -> CyclePoly {
    let w = tg.index_of(root).expect("root in truncation");
    let mut poly = CyclePoly::default();
    let bucket = |weight: f64| (weight / WEIGHT_QUANTUM).round() as i64;
    let mut record = |weight: f64, count: u64| {
        *poly.terms.entry(bucket(weight)).or_insert(0) += count;
    };
    if max_len >= 1 && tg.succ[w].contains(&w) {
        record(tg.heights[w], 1);
    }
    if max_len < 2 {
        return poly;
    }
    // State: (interior vertex, accumulated weight bits) -> path count.
    let mut cur: std::collections::BTreeMap<(usize, u64), u64> = Default::default();
    for &s in &tg.succ[w] {
        if s != w {
            let weight = tg.heights[w] + tg.heights[s];
            *cur.entry((s, weight.to_bits())).or_insert(0) += 1;
        }
    }
    for len in 1..max_len {
        let mut next: std::collections::BTreeMap<(usize, u64), u64> = Default::default();
        for (&(v, wbits), &count) in &cur {
            let weight = f64::from_bits(wbits);
            for &s in &tg.succ[v] {
                if s == w {
                    record(weight, count);
                } else if len < max_len - 1 {
                    let nw = weight + tg.heights[s];
                    *next.entry((s, nw.to_bits())).or_insert(0) += count;
                }
            }
        }
        cur = next;
        if cur.is_empty() {
            break;
        }
    }
    poly
}
