use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;
use sha2::{Digest, Sha256};

use super::ops::{operator, Operator};
use super::params::{canonical, canonical_params, Binding, Params};
use super::value::DataTag;
use crate::error::{Error, Result};

/// Declarative description of one transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub name: String,
    pub op: String,
    #[serde(default)]
    pub params: Params,
    /// Candidate values for fluid (searched) parameters.
    #[serde(default)]
    pub space: BTreeMap<String, Vec<Json>>,
    /// Input channel → `"<node>.<channel>"`.
    #[serde(default)]
    pub inputs: BTreeMap<String, String>,
}

impl NodeSpec {
    pub fn new(name: &str, op: &str) -> NodeSpec {
        NodeSpec {
            name: name.into(),
            op: op.into(),
            params: Params::new(),
            space: BTreeMap::new(),
            inputs: BTreeMap::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Json>) -> NodeSpec {
        self.params.insert(key.into(), value.into());
        self
    }

    pub fn space<V: Into<Json>>(mut self, key: &str, values: impl IntoIterator<Item = V>) -> NodeSpec {
        self.space.insert(key.into(), values.into_iter().map(Into::into).collect());
        self
    }

    pub fn input(mut self, channel: &str, source: &str) -> NodeSpec {
        self.inputs.insert(channel.into(), source.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSpec {
    pub nodes: Vec<NodeSpec>,
    /// `"<node>.<channel>"` of the prediction vector.
    pub output: String,
}

pub(crate) struct Node {
    pub spec: NodeSpec,
    pub op: Box<dyn Operator>,
    /// Upstream `(node index, output channel index)` per op input.
    pub inputs: Vec<(usize, usize)>,
    /// Neither stateful itself nor downstream of a stateful transform.
    pub split_independent: bool,
    /// Has a fluid parameter itself or upstream.
    pub fluid: bool,
}

/// A validated transform graph in topological order.
pub struct Pipeline {
    pub(crate) nodes: Vec<Node>,
    pub(crate) output: (usize, usize),
    hash_cache: Vec<String>,
}

impl std::fmt::Debug for Pipeline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Pipeline").field("order", &self.order()).finish()
    }
}

fn parse_ref(r: &str) -> Result<(&str, &str)> {
    r.rsplit_once('.')
        .filter(|(a, b)| !a.is_empty() && !b.is_empty())
        .ok_or_else(|| Error::Pipeline(format!("malformed channel reference '{r}' (expected node.channel)")))
}

/// Validates wiring and orders transforms topologically (ties by name).
pub fn build_pipeline(spec: &PipelineSpec) -> Result<Pipeline> {
    let mut by_name: HashMap<&str, usize> = HashMap::new();
    let mut ops = Vec::with_capacity(spec.nodes.len());
    for (i, n) in spec.nodes.iter().enumerate() {
        if n.name.is_empty() || !n.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(Error::Pipeline(format!("invalid transform name '{}'", n.name)));
        }
        if by_name.insert(&n.name, i).is_some() {
            return Err(Error::Pipeline(format!("duplicate transform name '{}'", n.name)));
        }
        let op = operator(&n.op)?;
        for key in n.params.keys().chain(n.space.keys()) {
            if !op.params().contains(&key.as_str()) {
                return Err(Error::Pipeline(format!("{}: unknown parameter '{key}' for '{}'", n.name, n.op)));
            }
        }
        if let Some(k) = n.params.keys().find(|k| n.space.contains_key(*k)) {
            return Err(Error::Pipeline(format!("{}: parameter '{k}' is both fixed and fluid", n.name)));
        }
        if let Some((k, _)) = n.space.iter().find(|(_, v)| v.is_empty()) {
            return Err(Error::Pipeline(format!("{}: empty candidate list for '{k}'", n.name)));
        }
        ops.push(op);
    }

    // resolve wiring
    let mut wiring: Vec<Vec<(usize, usize)>> = Vec::with_capacity(spec.nodes.len());
    for (n, op) in spec.nodes.iter().zip(&ops) {
        if let Some(extra) = n.inputs.keys().find(|k| !op.inputs().iter().any(|(c, _)| c == k)) {
            return Err(Error::Pipeline(format!("{}: '{}' has no input channel '{extra}'", n.name, n.op)));
        }
        let mut wired = Vec::new();
        for (channel, tag) in op.inputs() {
            let source = n
                .inputs
                .get(*channel)
                .ok_or_else(|| Error::Pipeline(format!("{}: input '{channel}' is not wired", n.name)))?;
            let (up_name, up_channel) = parse_ref(source)?;
            let &up = by_name
                .get(up_name)
                .ok_or_else(|| Error::Pipeline(format!("{}: dangling input '{source}'", n.name)))?;
            let outs = ops[up].outputs();
            let ci = outs
                .iter()
                .position(|(c, _)| *c == up_channel)
                .ok_or_else(|| Error::Pipeline(format!("{}: dangling input '{source}'", n.name)))?;
            if outs[ci].1 != *tag {
                return Err(Error::Pipeline(format!(
                    "{}: input '{channel}' expects {} but '{source}' provides {}",
                    n.name,
                    tag.as_str(),
                    outs[ci].1.as_str()
                )));
            }
            wired.push((up, ci));
        }
        wiring.push(wired);
    }

    // Kahn's algorithm with a name-ordered ready set
    let count = spec.nodes.len();
    let mut indegree: Vec<usize> = wiring
        .iter()
        .map(|w| w.iter().map(|&(u, _)| u).collect::<BTreeSet<_>>().len())
        .collect();
    let mut ready: BTreeSet<(&str, usize)> =
        (0..count).filter(|&i| indegree[i] == 0).map(|i| (spec.nodes[i].name.as_str(), i)).collect();
    let mut order = Vec::with_capacity(count);
    while let Some(first) = ready.pop_first() {
        let i = first.1;
        order.push(i);
        for (j, w) in wiring.iter().enumerate() {
            if w.iter().any(|&(u, _)| u == i) {
                indegree[j] -= 1;
                if indegree[j] == 0 {
                    ready.insert((spec.nodes[j].name.as_str(), j));
                }
            }
        }
    }
    if order.len() != count {
        let stuck: Vec<&str> = (0..count)
            .filter(|i| !order.contains(i))
            .map(|i| spec.nodes[i].name.as_str())
            .collect();
        return Err(Error::Pipeline(format!("cycle detected among transforms: {}", stuck.join(", "))));
    }

    let mut position = vec![0; count];
    for (p, &i) in order.iter().enumerate() {
        position[i] = p;
    }
    let mut ops: Vec<Option<Box<dyn Operator>>> = ops.into_iter().map(Some).collect();
    let mut nodes: Vec<Node> = Vec::with_capacity(count);
    for &i in &order {
        let op = ops[i].take().expect("each node placed once");
        let inputs: Vec<(usize, usize)> = wiring[i].iter().map(|&(u, c)| (position[u], c)).collect();
        let split_independent = !op.stateful() && inputs.iter().all(|&(u, _)| nodes[u].split_independent);
        let fluid = !spec.nodes[i].space.is_empty() || inputs.iter().any(|&(u, _)| nodes[u].fluid);
        nodes.push(Node {
            spec: spec.nodes[i].clone(),
            op,
            inputs,
            split_independent,
            fluid,
        });
    }

    let (out_name, out_channel) = parse_ref(&spec.output)?;
    let out_node = nodes
        .iter()
        .position(|n| n.spec.name == out_name)
        .ok_or_else(|| Error::Pipeline(format!("output '{}' names no transform", spec.output)))?;
    let outs = nodes[out_node].op.outputs();
    let out_ci = outs
        .iter()
        .position(|(c, _)| *c == out_channel)
        .ok_or_else(|| Error::Pipeline(format!("output '{}' names no channel", spec.output)))?;
    if outs[out_ci].1 != DataTag::Vector {
        return Err(Error::Pipeline("pipeline output must be a vector".into()));
    }

    let mut pipeline = Pipeline {
        nodes,
        output: (out_node, out_ci),
        hash_cache: Vec::new(),
    };
    pipeline.hash_cache = pipeline.digests("", &Binding::new());
    Ok(pipeline)
}

impl Pipeline {
    /// Transform names in execution order.
    pub fn order(&self) -> Vec<&str> {
        self.nodes.iter().map(|n| n.spec.name.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub(crate) fn index_of(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.spec.name == name)
    }

    /// Digest of a transform with fluid parameters left unbound.
    pub fn dependency_hash(&self, name: &str) -> Option<&str> {
        self.index_of(name).map(|i| self.hash_cache[i].as_str())
    }

    /// Every `(node.param, candidates)` pair of the search space, in
    /// execution order then parameter name.
    pub fn search_space(&self) -> Vec<(String, Vec<Json>)> {
        self.nodes
            .iter()
            .flat_map(|n| n.spec.space.iter().map(move |(k, v)| (format!("{}.{k}", n.spec.name), v.clone())))
            .collect()
    }

    /// Fixed parameters merged with the bound fluid ones.
    pub(crate) fn bound_params(&self, node: usize, binding: &Binding) -> Params {
        let n = &self.nodes[node];
        let mut p = n.spec.params.clone();
        for key in n.spec.space.keys() {
            if let Some(v) = binding.get(&format!("{}.{key}", n.spec.name)) {
                p.insert(key.clone(), v.clone());
            }
        }
        p
    }

    /// Digests `H(name ‖ op ‖ bound params ‖ sorted upstream digests)`;
    /// `salt` enters through source transforms (those without inputs).
    pub fn digests(&self, salt: &str, binding: &Binding) -> Vec<String> {
        let mut out: Vec<String> = Vec::with_capacity(self.nodes.len());
        for (i, n) in self.nodes.iter().enumerate() {
            let mut h = Sha256::new();
            h.update(n.spec.name.as_bytes());
            h.update([0]);
            h.update(n.spec.op.as_bytes());
            h.update([0]);
            h.update(canonical_params(&self.bound_params(i, binding)).as_bytes());
            h.update([0]);
            let unbound: Vec<Json> = n
                .spec
                .space
                .keys()
                .filter(|k| !binding.contains_key(&format!("{}.{k}", n.spec.name)))
                .map(|k| Json::String(k.clone()))
                .collect();
            h.update(canonical(&Json::Array(unbound)).as_bytes());
            h.update([0]);
            if n.inputs.is_empty() {
                h.update(salt.as_bytes());
            }
            let mut upstream: Vec<&str> = n.inputs.iter().map(|&(u, _)| out[u].as_str()).collect();
            upstream.sort_unstable();
            upstream.dedup();
            for u in upstream {
                h.update([0]);
                h.update(u.as_bytes());
            }
            out.push(hex::encode(h.finalize()));
        }
        out
    }

    /// Indices of transforms the output depends on.
    pub(crate) fn needed(&self) -> Vec<bool> {
        let mut need = vec![false; self.nodes.len()];
        need[self.output.0] = true;
        for i in (0..self.nodes.len()).rev() {
            if need[i] {
                for &(u, _) in &self.nodes[i].inputs {
                    need[u] = true;
                }
            }
        }
        need
    }

    /// Precomputable: flagged so, split-independent and free of fluid parameters.
    pub(crate) fn precomputable(&self, i: usize) -> bool {
        let n = &self.nodes[i];
        n.op.precomputable() && n.split_independent && !n.fluid
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> PipelineSpec {
        PipelineSpec {
            nodes: vec![
                NodeSpec::new("ridge", "ridge").input("X", "desc.X").input("y", "src.y").input("sizes", "src.sizes").space(
                    "lambda",
                    [1e-3, 1.0],
                ),
                NodeSpec::new("desc", "coulomb").param("max_atoms", 5).input("dataset", "src.dataset"),
                NodeSpec::new("src", "input").param("target", "E"),
            ],
            output: "ridge.yhat".into(),
        }
    }

    #[test]
    fn chain_orders_topologically() {
        let p = build_pipeline(&chain()).unwrap();
        assert_eq!(p.order(), vec!["src", "desc", "ridge"]);
        assert!(p.precomputable(1));
        assert!(!p.precomputable(2));
    }

    #[test]
    fn ties_broken_by_name() {
        let spec = PipelineSpec {
            nodes: vec![
                NodeSpec::new("src", "input"),
                NodeSpec::new("zeta", "coulomb").input("dataset", "src.dataset"),
                NodeSpec::new("alpha", "features").input("dataset", "src.dataset"),
                NodeSpec::new("fit", "ridge")
                    .input("X", "zeta.X")
                    .input("y", "src.y")
                    .input("sizes", "src.sizes")
                    .param("lambda", 1.0),
                NodeSpec::new("other", "normalize").input("X", "alpha.X"),
            ],
            output: "fit.yhat".into(),
        };
        let p = build_pipeline(&spec).unwrap();
        assert_eq!(p.order(), vec!["src", "alpha", "other", "zeta", "fit"]);
    }

    #[test]
    fn wiring_errors() {
        let mut s = chain();
        s.nodes[0].inputs.insert("X".into(), "nowhere.X".into());
        assert!(build_pipeline(&s).unwrap_err().to_string().contains("dangling"));

        // kernel output into a design-matrix input
        let mut s = chain();
        s.nodes.push(NodeSpec::new("k", "kernel").input("X", "desc.X"));
        s.nodes[0].inputs.insert("X".into(), "k.K".into());
        assert!(build_pipeline(&s).unwrap_err().to_string().contains("expects design_matrix"));

        let s = PipelineSpec {
            nodes: vec![
                NodeSpec::new("a", "normalize").input("X", "b.X"),
                NodeSpec::new("b", "normalize").input("X", "a.X"),
            ],
            output: "a.X".into(),
        };
        assert!(build_pipeline(&s).unwrap_err().to_string().contains("cycle"));

        let mut s = chain();
        s.nodes[1].params.insert("bogus".into(), 1.into());
        assert!(build_pipeline(&s).is_err());
    }

    #[test]
    fn digests_respond_to_parameter_changes() {
        let a = build_pipeline(&chain()).unwrap();
        let b = build_pipeline(&chain()).unwrap();
        for n in ["src", "desc", "ridge"] {
            assert_eq!(a.dependency_hash(n), b.dependency_hash(n));
        }
        let mut s = chain();
        s.nodes[1].params.insert("max_atoms".into(), 6.into());
        let c = build_pipeline(&s).unwrap();
        assert_eq!(a.dependency_hash("src"), c.dependency_hash("src"));
        assert_ne!(a.dependency_hash("desc"), c.dependency_hash("desc"));
        assert_ne!(a.dependency_hash("ridge"), c.dependency_hash("ridge"));

        let mut s = chain();
        s.nodes[1].name = "desc2".into();
        s.nodes[0].inputs.insert("X".into(), "desc2.X".into());
        let d = build_pipeline(&s).unwrap();
        assert_ne!(a.dependency_hash("desc"), d.dependency_hash("desc2"));
    }

    #[test]
    fn binding_and_salt_change_digests() {
        let p = build_pipeline(&chain()).unwrap();
        let unbound = p.digests("", &Binding::new());
        let mut b = Binding::new();
        b.insert("ridge.lambda".into(), 1.0.into());
        let bound = p.digests("", &b);
        assert_eq!(unbound[1], bound[1]);
        assert_ne!(unbound[2], bound[2]);
        let salted = p.digests("data", &Binding::new());
        assert!(salted.iter().zip(&unbound).all(|(a, b)| a != b));
    }
}
