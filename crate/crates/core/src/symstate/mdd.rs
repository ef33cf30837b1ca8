//! Hash-consed reduced ordered multi-valued decision diagrams.
//!
//! Every library variable owns two adjacent levels: `2 * index` for its
//! current value and `2 * index + 1` for its next-state (primed) value.
//! Children are indexed by `value - lo`, so every path stays inside the
//! declared domain.

use std::collections::HashMap;

pub type NodeId = u32;

pub const FALSE: NodeId = 0;
pub const TRUE: NodeId = 1;

const TERMINAL_LEVEL: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct Node {
    level: u32,
    children: Box<[NodeId]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum BinOp {
    And,
    Or,
    Diff,
}

/// Identifier of an interned set of quantified levels.
pub type QuantId = u32;

/// Admitted offsets per constrained level along one path.
pub type LevelCube = Vec<(u32, Vec<u32>)>;

#[derive(Debug)]
pub struct Mdd {
    level_sizes: Vec<u32>,
    nodes: Vec<Node>,
    unique: HashMap<(u32, Box<[NodeId]>), NodeId>,
    bin_cache: HashMap<(BinOp, NodeId, NodeId), NodeId>,
    not_cache: HashMap<NodeId, NodeId>,
    exists_cache: HashMap<(NodeId, QuantId), NodeId>,
    relprod_cache: HashMap<(NodeId, NodeId, QuantId), NodeId>,
    shift_cache: HashMap<(NodeId, QuantId), NodeId>,
    quant_sets: Vec<Vec<bool>>,
    quant_index: HashMap<Vec<bool>, QuantId>,
}

impl Mdd {
    /// Creates a store for variables with the given domain sizes.
    pub fn new(domain_sizes: &[u32]) -> Self {
        let mut level_sizes = Vec::with_capacity(domain_sizes.len() * 2);
        for &size in domain_sizes {
            assert!(size >= 1, "empty domain");
            level_sizes.push(size);
            level_sizes.push(size);
        }
        let terminal = |_| Node { level: TERMINAL_LEVEL, children: Box::new([]) };
        Mdd {
            level_sizes,
            nodes: vec![terminal(0), terminal(1)],
            unique: HashMap::new(),
            bin_cache: HashMap::new(),
            not_cache: HashMap::new(),
            exists_cache: HashMap::new(),
            relprod_cache: HashMap::new(),
            shift_cache: HashMap::new(),
            quant_sets: Vec::new(),
            quant_index: HashMap::new(),
        }
    }

    pub fn level_size(&self, level: u32) -> u32 {
        self.level_sizes[level as usize]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn level(&self, node: NodeId) -> u32 {
        self.nodes[node as usize].level
    }

    pub fn is_terminal(&self, node: NodeId) -> bool {
        node <= TRUE
    }

    pub fn children(&self, node: NodeId) -> &[NodeId] {
        &self.nodes[node as usize].children
    }

    fn cofactor(&self, node: NodeId, level: u32, value: usize) -> NodeId {
        let n = &self.nodes[node as usize];
        if n.level == level {
            n.children[value]
        } else {
            node
        }
    }

    pub fn mk(&mut self, level: u32, children: Vec<NodeId>) -> NodeId {
        debug_assert_eq!(children.len() as u32, self.level_size(level));
        let first = children[0];
        if children.iter().all(|&c| c == first) {
            return first;
        }
        debug_assert!(children.iter().all(|&c| self.is_terminal(c) || self.level(c) > level));
        let key = (level, children.into_boxed_slice());
        if let Some(&id) = self.unique.get(&key) {
            return id;
        }
        let id = self.nodes.len() as NodeId;
        self.nodes.push(Node { level, children: key.1.clone() });
        self.unique.insert(key, id);
        id
    }

    /// Node accepting exactly `value` at `level` and anything elsewhere.
    pub fn literal(&mut self, level: u32, value: u32) -> NodeId {
        let size = self.level_size(level);
        let children = (0..size).map(|v| if v == value { TRUE } else { FALSE }).collect();
        self.mk(level, children)
    }

    pub fn and(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.apply(BinOp::And, a, b)
    }

    pub fn or(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.apply(BinOp::Or, a, b)
    }

    pub fn diff(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.apply(BinOp::Diff, a, b)
    }

    fn apply(&mut self, op: BinOp, a: NodeId, b: NodeId) -> NodeId {
        match op {
            BinOp::And => {
                if a == FALSE || b == FALSE {
                    return FALSE;
                }
                if a == TRUE || a == b {
                    return b;
                }
                if b == TRUE {
                    return a;
                }
            }
            BinOp::Or => {
                if a == TRUE || b == TRUE {
                    return TRUE;
                }
                if a == FALSE || a == b {
                    return b;
                }
                if b == FALSE {
                    return a;
                }
            }
            BinOp::Diff => {
                if a == FALSE || b == TRUE || a == b {
                    return FALSE;
                }
                if b == FALSE {
                    return a;
                }
                if a == TRUE {
                    return self.not(b);
                }
            }
        }
        let key = match op {
            BinOp::Diff => (op, a, b),
            _ => (op, a.min(b), a.max(b)),
        };
        if let Some(&r) = self.bin_cache.get(&key) {
            return r;
        }
        let level = self.level(a).min(self.level(b));
        let size = self.level_size(level) as usize;
        let mut children = Vec::with_capacity(size);
        for v in 0..size {
            let ca = self.cofactor(a, level, v);
            let cb = self.cofactor(b, level, v);
            children.push(self.apply(op, ca, cb));
        }
        let r = self.mk(level, children);
        self.bin_cache.insert(key, r);
        r
    }

    pub fn not(&mut self, a: NodeId) -> NodeId {
        if a == TRUE {
            return FALSE;
        }
        if a == FALSE {
            return TRUE;
        }
        if let Some(&r) = self.not_cache.get(&a) {
            return r;
        }
        let level = self.level(a);
        let kids: Vec<NodeId> = self.children(a).to_vec();
        let children = kids.into_iter().map(|c| self.not(c)).collect();
        let r = self.mk(level, children);
        self.not_cache.insert(a, r);
        r
    }

    /// Interns a set of levels for quantification.
    pub fn quant_set(&mut self, levels: impl IntoIterator<Item = u32>) -> QuantId {
        let mut mask = vec![false; self.level_sizes.len()];
        for l in levels {
            mask[l as usize] = true;
        }
        if let Some(&id) = self.quant_index.get(&mask) {
            return id;
        }
        let id = self.quant_sets.len() as QuantId;
        self.quant_sets.push(mask.clone());
        self.quant_index.insert(mask, id);
        id
    }

    fn quantified(&self, q: QuantId, level: u32) -> bool {
        self.quant_sets[q as usize][level as usize]
    }

    pub fn exists(&mut self, a: NodeId, q: QuantId) -> NodeId {
        if self.is_terminal(a) {
            return a;
        }
        if let Some(&r) = self.exists_cache.get(&(a, q)) {
            return r;
        }
        let level = self.level(a);
        let kids: Vec<NodeId> = self.children(a).to_vec();
        let r = if self.quantified(q, level) {
            let mut acc = FALSE;
            for c in kids {
                let e = self.exists(c, q);
                acc = self.or(acc, e);
                if acc == TRUE {
                    break;
                }
            }
            acc
        } else {
            let children = kids.into_iter().map(|c| self.exists(c, q)).collect();
            self.mk(level, children)
        };
        self.exists_cache.insert((a, q), r);
        r
    }

    /// `exists q. (a & b)` without building the full conjunction.
    pub fn and_exists(&mut self, a: NodeId, b: NodeId, q: QuantId) -> NodeId {
        if a == FALSE || b == FALSE {
            return FALSE;
        }
        if a == TRUE && b == TRUE {
            return TRUE;
        }
        if a == TRUE || a == b {
            return self.exists(b, q);
        }
        if b == TRUE {
            return self.exists(a, q);
        }
        let key = (a.min(b), a.max(b), q);
        if let Some(&r) = self.relprod_cache.get(&key) {
            return r;
        }
        let level = self.level(a).min(self.level(b));
        let size = self.level_size(level) as usize;
        let r = if self.quantified(q, level) {
            let mut acc = FALSE;
            for v in 0..size {
                let ca = self.cofactor(a, level, v);
                let cb = self.cofactor(b, level, v);
                let part = self.and_exists(ca, cb, q);
                acc = self.or(acc, part);
                if acc == TRUE {
                    break;
                }
            }
            acc
        } else {
            let mut children = Vec::with_capacity(size);
            for v in 0..size {
                let ca = self.cofactor(a, level, v);
                let cb = self.cofactor(b, level, v);
                children.push(self.and_exists(ca, cb, q));
            }
            self.mk(level, children)
        };
        self.relprod_cache.insert(key, r);
        r
    }

    /// Moves every primed level down to its current level. The caller
    /// guarantees no variable appears with both levels, which keeps the
    /// ordering intact.
    pub fn unprime(&mut self, a: NodeId) -> NodeId {
        if self.is_terminal(a) {
            return a;
        }
        if let Some(&r) = self.shift_cache.get(&(a, u32::MAX)) {
            return r;
        }
        let level = self.level(a);
        let new_level = level & !1;
        let kids: Vec<NodeId> = self.children(a).to_vec();
        let children = kids.into_iter().map(|c| self.unprime(c)).collect();
        let r = self.mk(new_level, children);
        self.shift_cache.insert((a, u32::MAX), r);
        r
    }

    /// Moves the current levels in `q` up to their primed level. The
    /// diagram must mention current levels only.
    pub fn prime(&mut self, a: NodeId, q: QuantId) -> NodeId {
        if self.is_terminal(a) {
            return a;
        }
        if let Some(&r) = self.shift_cache.get(&(a, q)) {
            return r;
        }
        let level = self.level(a);
        debug_assert_eq!(level % 2, 0, "prime on a diagram with primed levels");
        let new_level = if self.quantified(q, level) { level + 1 } else { level };
        let kids: Vec<NodeId> = self.children(a).to_vec();
        let children = kids.into_iter().map(|c| self.prime(c, q)).collect();
        let r = self.mk(new_level, children);
        self.shift_cache.insert((a, q), r);
        r
    }

    /// Builds the diagram of `pred` over the listed levels by exhaustive
    /// case split. `levels` must be strictly increasing.
    pub fn build_table(&mut self, levels: &[u32], pred: &mut dyn FnMut(&[u32]) -> bool) -> NodeId {
        let mut values = vec![0u32; levels.len()];
        self.build_table_rec(levels, 0, &mut values, pred)
    }

    fn build_table_rec(
        &mut self,
        levels: &[u32],
        idx: usize,
        values: &mut Vec<u32>,
        pred: &mut dyn FnMut(&[u32]) -> bool,
    ) -> NodeId {
        if idx == levels.len() {
            return if pred(values) { TRUE } else { FALSE };
        }
        let level = levels[idx];
        let size = self.level_size(level);
        let mut children = Vec::with_capacity(size as usize);
        for v in 0..size {
            values[idx] = v;
            children.push(self.build_table_rec(levels, idx + 1, values, pred));
        }
        self.mk(level, children)
    }

    /// Builds `target' = f(x)` where `f` reads the current levels in
    /// `sources` and returns the target offset, or `None` when the result
    /// falls outside the target domain. When the primed target level comes
    /// after every source the value is computed directly; otherwise the
    /// builder falls back to a case split on the target.
    pub fn build_assignment(
        &mut self,
        sources: &[u32],
        target: u32,
        eval: &mut dyn FnMut(&[u32]) -> Option<u32>,
    ) -> NodeId {
        if sources.iter().all(|&l| l < target) {
            let mut values = vec![0u32; sources.len()];
            self.build_assign_rec(sources, 0, &mut values, target, eval)
        } else {
            let mut levels: Vec<u32> = sources.to_vec();
            levels.push(target);
            levels.sort_unstable();
            let tpos = levels.iter().position(|&l| l == target).unwrap();
            let src_pos: Vec<usize> = sources.iter().map(|s| levels.iter().position(|l| l == s).unwrap()).collect();
            let mut scratch = vec![0u32; sources.len()];
            self.build_table(&levels, &mut |vals| {
                for (k, &p) in src_pos.iter().enumerate() {
                    scratch[k] = vals[p];
                }
                eval(&scratch) == Some(vals[tpos])
            })
        }
    }

    fn build_assign_rec(
        &mut self,
        sources: &[u32],
        idx: usize,
        values: &mut Vec<u32>,
        target: u32,
        eval: &mut dyn FnMut(&[u32]) -> Option<u32>,
    ) -> NodeId {
        if idx == sources.len() {
            return match eval(values) {
                Some(v) => self.literal(target, v),
                None => FALSE,
            };
        }
        let level = sources[idx];
        let size = self.level_size(level);
        let mut children = Vec::with_capacity(size as usize);
        for v in 0..size {
            values[idx] = v;
            children.push(self.build_assign_rec(sources, idx + 1, values, target, eval));
        }
        self.mk(level, children)
    }

    /// Number of satisfying assignments over `levels` (strictly increasing),
    /// assuming the diagram mentions no other level.
    pub fn count(&self, node: NodeId, levels: &[u32]) -> u128 {
        let mut memo: HashMap<NodeId, u128> = HashMap::new();
        let pos = |level: u32| -> usize {
            levels.iter().position(|&l| l == level).expect("diagram mentions a level outside the space")
        };
        fn span(mdd: &Mdd, levels: &[u32], from: usize, to: usize) -> u128 {
            levels[from..to].iter().map(|&l| mdd.level_size(l) as u128).product()
        }
        // counts assignments to levels[pos(node)..]
        fn rec(
            mdd: &Mdd,
            node: NodeId,
            levels: &[u32],
            pos: &dyn Fn(u32) -> usize,
            memo: &mut HashMap<NodeId, u128>,
        ) -> u128 {
            if node == FALSE {
                return 0;
            }
            if node == TRUE {
                return 1;
            }
            if let Some(&c) = memo.get(&node) {
                return c;
            }
            let p = pos(mdd.level(node));
            let mut total = 0u128;
            for &child in mdd.children(node) {
                let cp = if mdd.is_terminal(child) { levels.len() } else { pos(mdd.level(child)) };
                total += rec(mdd, child, levels, pos, memo) * span(mdd, levels, p + 1, cp);
            }
            memo.insert(node, total);
            total
        }
        let start = if self.is_terminal(node) { levels.len() } else { pos(self.level(node)) };
        rec(self, node, levels, &pos, &mut memo) * span(self, levels, 0, start)
    }

    /// Levels on which the diagram depends.
    pub fn support_levels(&self, node: NodeId) -> Vec<u32> {
        let mut seen = std::collections::HashSet::new();
        let mut levels = std::collections::BTreeSet::new();
        let mut stack = vec![node];
        while let Some(n) = stack.pop() {
            if self.is_terminal(n) || !seen.insert(n) {
                continue;
            }
            levels.insert(self.level(n));
            stack.extend_from_slice(self.children(n));
        }
        levels.into_iter().collect()
    }

    /// Evaluates the diagram on a total assignment, indexed by level.
    pub fn eval(&self, mut node: NodeId, value_at: &dyn Fn(u32) -> u32) -> bool {
        while !self.is_terminal(node) {
            let l = self.level(node);
            node = self.children(node)[value_at(l) as usize];
        }
        node == TRUE
    }

    /// Enumerates cubes: each cube maps levels to the set of admitted
    /// offsets along one path (unlisted levels are unconstrained). Children
    /// with a shared target are merged into one branch.
    pub fn cubes(&self, node: NodeId, limit: usize) -> (Vec<LevelCube>, bool) {
        let mut out = Vec::new();
        let mut path = Vec::new();
        let truncated = self.cubes_rec(node, &mut path, &mut out, limit);
        (out, truncated)
    }

    fn cubes_rec(
        &self,
        node: NodeId,
        path: &mut Vec<(u32, Vec<u32>)>,
        out: &mut Vec<Vec<(u32, Vec<u32>)>>,
        limit: usize,
    ) -> bool {
        if node == FALSE {
            return false;
        }
        if out.len() >= limit {
            return true;
        }
        if node == TRUE {
            out.push(path.clone());
            return false;
        }
        let level = self.level(node);
        let mut groups: Vec<(NodeId, Vec<u32>)> = Vec::new();
        for (v, &c) in self.children(node).iter().enumerate() {
            if c == FALSE {
                continue;
            }
            match groups.iter_mut().find(|(t, _)| *t == c) {
                Some((_, vals)) => vals.push(v as u32),
                None => groups.push((c, vec![v as u32])),
            }
        }
        let mut truncated = false;
        for (child, vals) in groups {
            path.push((level, vals));
            truncated |= self.cubes_rec(child, path, out, limit);
            path.pop();
            if truncated {
                break;
            }
        }
        truncated
    }
}
