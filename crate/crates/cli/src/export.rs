//! Deterministic JSON and DOT renderings.

use std::fmt::Write;

use afenv::envelope::SilovGenerators;
use afenv::numeric::{norm, realize, ProbeReport};
use afenv::regular::CompressionTypeDecomposition;
use afenv::system::TelescopedSystem;
use afenv::{BratteliDiagram, CycleObstruction, RegularMap, SpaceElement, SummandStructure, VertexSet};
use serde::Serialize;
use serde_json::Value;

/// Rounds to 12 significant digits so printed floats do not depend on the
/// last bits of a computation.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// Indented JSON with arrays and objects of scalars kept on one line,
/// newline terminated.
pub fn json<T: Serialize + ?Sized>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("output values serialize");
    let mut s = String::new();
    write_value(&mut s, &v, 0);
    s.push('\n');
    s
}

fn write_value(s: &mut String, v: &Value, depth: usize) {
    let pad = |d: usize| "  ".repeat(d);
    match v {
        Value::Array(items) if items.iter().all(|x| !x.is_array() && !x.is_object()) => {
            let cells: Vec<String> = items.iter().map(|x| serde_json::to_string(x).expect("scalars serialize")).collect();
            s.push('[');
            s.push_str(&cells.join(", "));
            s.push(']');
        }
        Value::Array(items) => {
            s.push_str("[\n");
            for (k, x) in items.iter().enumerate() {
                s.push_str(&pad(depth + 1));
                write_value(s, x, depth + 1);
                s.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            s.push_str(&pad(depth));
            s.push(']');
        }
        Value::Object(map) if map.values().all(|x| !x.is_array() && !x.is_object()) => {
            let cells: Vec<String> = map
                .iter()
                .map(|(k, x)| format!("{}: {}", serde_json::to_string(k).expect("keys serialize"), x))
                .collect();
            s.push('{');
            s.push_str(&cells.join(", "));
            s.push('}');
        }
        Value::Object(map) => {
            s.push_str("{\n");
            for (k, (key, x)) in map.iter().enumerate() {
                s.push_str(&pad(depth + 1));
                s.push_str(&serde_json::to_string(key).expect("keys serialize"));
                s.push_str(": ");
                write_value(s, x, depth + 1);
                s.push_str(if k + 1 < map.len() { ",\n" } else { "\n" });
            }
            s.push_str(&pad(depth));
            s.push('}');
        }
        scalar => s.push_str(&serde_json::to_string(scalar).expect("scalars serialize")),
    }
}

#[derive(Debug, Serialize)]
pub struct SummandOut {
    pub q: Vec<usize>,
    pub dim: usize,
}

pub fn summands(s: &SummandStructure) -> Vec<SummandOut> {
    s.summands
        .iter()
        .map(|x| SummandOut {
            q: set(&x.q),
            dim: x.dim,
        })
        .collect()
}

fn set(q: &VertexSet) -> Vec<usize> {
    q.iter().copied().collect()
}

#[derive(Debug, Serialize)]
pub struct ComponentOut {
    pub q: Vec<usize>,
    pub range: Vec<usize>,
    pub rho: Vec<[usize; 2]>,
}

#[derive(Debug, Serialize)]
pub struct CycleEdgeOut {
    pub edge: [usize; 2],
    pub forward: bool,
}

/// `(row, col, coefficient)` triples of a real element.
pub fn real_terms(a: &SpaceElement) -> Vec<(usize, usize, f64)> {
    a.coeffs().iter().map(|(u, c)| (u.row, u.col, round_sig(c.re))).collect()
}

#[derive(Debug, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum DecisionOut {
    Compression {
        index: usize,
        components: Vec<ComponentOut>,
        summands: Vec<SummandOut>,
    },
    Obstruction {
        index: usize,
        #[serde(flatten)]
        witness: WitnessOut,
    },
}

#[derive(Debug, Serialize)]
pub struct WitnessOut {
    pub cycle_vertices: Vec<usize>,
    pub cycle_edges: Vec<CycleEdgeOut>,
    pub same_direction: Vec<usize>,
    pub pattern_size: usize,
    pub witness: Vec<(usize, usize, f64)>,
    pub witness_norm: f64,
    pub image_norm: f64,
    /// Norms of the full and truncated cycle pattern of this size.
    pub pattern_norms: [f64; 2],
}

pub fn compression(index: usize, d: &CompressionTypeDecomposition) -> DecisionOut {
    DecisionOut::Compression {
        index,
        components: d
            .components()
            .iter()
            .map(|c| ComponentOut {
                q: set(c.q()),
                range: set(&c.range()),
                rho: c.rho().iter().map(|(&u, &v)| [u, v]).collect(),
            })
            .collect(),
        summands: summands(&d.summands()),
    }
}

pub fn witness(f: &RegularMap, o: &CycleObstruction) -> WitnessOut {
    let image = f.apply(&o.witness).expect("witness lies in the domain");
    let (full, truncated) = afenv::numeric::cycle_norm_pair(o.pattern_size().max(2));
    WitnessOut {
        cycle_vertices: o.cycle_vertices.clone(),
        cycle_edges: o
            .cycle_edges
            .iter()
            .map(|c| CycleEdgeOut {
                edge: [c.edge.row, c.edge.col],
                forward: c.forward,
            })
            .collect(),
        same_direction: o.same_direction.clone(),
        pattern_size: o.pattern_size(),
        witness: real_terms(&o.witness),
        witness_norm: round_sig(norm(&realize(&o.witness))),
        image_norm: round_sig(norm(&realize(&image))),
        pattern_norms: [round_sig(full), round_sig(truncated)],
    }
}

pub fn obstruction(index: usize, f: &RegularMap, o: &CycleObstruction) -> DecisionOut {
    DecisionOut::Obstruction {
        index,
        witness: witness(f, o),
    }
}

#[derive(Debug, Serialize)]
pub struct StageOut {
    pub index: usize,
    pub summands: Vec<SummandOut>,
}

#[derive(Debug, Serialize)]
pub struct TelescopeOut {
    pub start_index: usize,
    pub stable: bool,
    pub stages: Vec<StageOut>,
}

pub fn telescoped(t: &TelescopedSystem) -> TelescopeOut {
    TelescopeOut {
        start_index: t.start_index(),
        stable: t.is_stable(),
        stages: t
            .stages()
            .iter()
            .map(|s| StageOut {
                index: s.index,
                summands: summands(&s.summands),
            })
            .collect(),
    }
}

#[derive(Debug, Serialize)]
pub struct ProbeOut {
    pub index: usize,
    pub verdict: &'static str,
    pub trials: usize,
    pub max_ratio: f64,
    pub worst_trial: Option<usize>,
    pub violations: usize,
    pub contractive: bool,
}

pub fn probe(index: usize, accepted: bool, r: &ProbeReport) -> ProbeOut {
    ProbeOut {
        index,
        verdict: if accepted { "compression" } else { "obstruction" },
        trials: r.trials,
        max_ratio: round_sig(r.max_ratio),
        worst_trial: r.worst_trial,
        violations: r.violations.len(),
        contractive: r.is_contractive(),
    }
}

/// DOT view of a diagram: one rank per level, edges labelled with their
/// multiplicity, maximal nodes with a double border, `removed` nodes
/// filled gray.
pub fn dot(d: &BratteliDiagram, removed: Option<&SilovGenerators>) -> String {
    let mut s = String::from("digraph bratteli {\n  rankdir=TB;\n  node [shape=circle];\n");
    for (k, level) in d.levels().iter().enumerate() {
        let _ = write!(s, "  {{ rank=same;");
        for (i, n) in level.iter().enumerate() {
            let mut attrs = vec![format!("label=\"M{}\"", n.dim)];
            if n.maximal {
                attrs.push("peripheries=2".into());
            }
            if removed.is_some_and(|r| r.contains(k, i)) {
                attrs.push("style=filled".into());
                attrs.push("fillcolor=gray".into());
            }
            let _ = write!(s, " n{k}_{i} [{}];", attrs.join(", "));
        }
        s.push_str(" }\n");
    }
    for (k, t) in d.transitions().iter().enumerate() {
        for i in 0..t.rows() {
            for j in 0..t.cols() {
                let n = t.get(i, j);
                if n > 0 {
                    let _ = writeln!(s, "  n{k}_{i} -> n{}_{j} [label=\"{n}\"];", k + 1);
                }
            }
        }
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round_sig(1.7320508075688772), 1.73205080757);
        assert_eq!(round_sig(0.0), 0.0);
        assert_eq!(round_sig(-2.0), -2.0);
        assert_eq!(round_sig(1.0000000000004), 1.0);
        assert_eq!(serde_json::to_string(&round_sig(1.8019377358048383)).unwrap(), "1.8019377358");
    }

    #[test]
    fn layout() {
        let v = serde_json::json!({"b": [[1, 2], ["x,y"]], "a": {"x": [], "y": "s,t"}, "c": {}, "d": {"p": 1, "q": null}});
        assert_eq!(
            json(&v),
            "{\n  \"b\": [\n    [1, 2],\n    [\"x,y\"]\n  ],\n  \"a\": {\n    \"x\": [],\n    \"y\": \"s,t\"\n  },\n  \"c\": {},\n  \"d\": {\"p\": 1, \"q\": null}\n}\n"
        );
    }
}
