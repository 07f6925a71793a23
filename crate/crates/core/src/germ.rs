//! Deterministic generators for Cayley-Abels-style graphs ("graph germs") and
//! finite windows (balls) onto them, plus an explicit Schreier-graph
//! construction for finite wreath products B wr_X^A H.
//!
//! A germ fixes a locally finite, connected, vertex-transitive graph by giving
//! a canonical address scheme and a deterministic neighbor enumeration. Only
//! quasi-isometry-invariant conclusions transfer back to the group; balls are
//! windows, not the group, and downstream analyses restrict to inner
//! sub-balls to dodge truncation artifacts.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::perm::{Perm, PermGroup};

pub const DEFAULT_VERTEX_CAP: usize = 200_000;

/// Canonical vertex address. Each germ kind uses one variant; derived `Ord`
/// supplies the deterministic tie-break order for BFS ID assignment.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Addr {
    /// Path from the root of a rooted (bi)regular tree. The first entry picks
    /// among the root's d neighbors; later entries pick among children.
    Tree(Vec<u16>),
    /// Integer lattice point.
    Grid(Vec<i64>),
    /// Reduced word in generators 1..rank and their negatives.
    Word(Vec<i32>),
    /// Diestel-Leader vertex: height `h` of the first tree coordinate plus
    /// the finitely supported nonzero digits of both coordinates (the second
    /// coordinate sits at height -h). Digit lists are sorted by index and
    /// never store zeros, so equality is canonical.
    Dl {
        h: i64,
        d1: Vec<(i64, u16)>,
        d2: Vec<(i64, u16)>,
    },
    /// Vertex of an explicit finite graph.
    Finite(usize),
    /// Product vertex.
    Pair(Box<Addr>, Box<Addr>),
    /// Canonical coset representative in a wreath Schreier graph:
    /// B-element indices per point of X followed by the H-element index.
    Raw(Vec<usize>),
}

/// The germ kinds. All are connected and vertex-transitive with the bounded
/// degree listed in [`GraphGerm::degree_bound`].
#[derive(Debug, Clone)]
pub enum GermKind {
    RegularTree(u16),
    BiregularTree(u16, u16),
    Grid(u16),
    FreeGroup(u16),
    DiestelLeader(u16, u16),
    FiniteGraph { vertices: usize, adj: Vec<Vec<usize>> },
    Product(Box<GraphGerm>, Box<GraphGerm>),
}

#[derive(Debug, Clone)]
pub struct GraphGerm {
    pub kind: GermKind,
}

#[derive(Deserialize)]
struct FiniteGraphJson {
    vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl GraphGerm {
    pub fn regular_tree(d: u16) -> Result<GraphGerm> {
        if d < 2 {
            return Err(Error::invalid("germ", "tree degree must be >= 2"));
        }
        Ok(GraphGerm {
            kind: GermKind::RegularTree(d),
        })
    }

    pub fn biregular_tree(d1: u16, d2: u16) -> Result<GraphGerm> {
        if d1 < 2 || d2 < 2 {
            return Err(Error::invalid("germ", "biregular degrees must be >= 2"));
        }
        Ok(GraphGerm {
            kind: GermKind::BiregularTree(d1, d2),
        })
    }

    pub fn grid(m: u16) -> Result<GraphGerm> {
        if m < 1 {
            return Err(Error::invalid("germ", "grid dimension must be >= 1"));
        }
        Ok(GraphGerm {
            kind: GermKind::Grid(m),
        })
    }

    pub fn free_group(rank: u16) -> Result<GraphGerm> {
        if rank < 1 {
            return Err(Error::invalid("germ", "free rank must be >= 1"));
        }
        Ok(GraphGerm {
            kind: GermKind::FreeGroup(rank),
        })
    }

    pub fn diestel_leader(p: u16, q: u16) -> Result<GraphGerm> {
        if p < 2 || q < 2 {
            return Err(Error::invalid("germ", "Diestel-Leader parameters must be >= 2"));
        }
        Ok(GraphGerm {
            kind: GermKind::DiestelLeader(p, q),
        })
    }

    pub fn product(a: GraphGerm, b: GraphGerm) -> GraphGerm {
        GraphGerm {
            kind: GermKind::Product(Box::new(a), Box::new(b)),
        }
    }

    /// FiniteGraph from JSON `{"vertices": N, "edges": [[i,j],...]}`.
    pub fn from_finite_json(text: &str) -> Result<GraphGerm> {
        let parsed: FiniteGraphJson = serde_json::from_str(text)
            .map_err(|e| Error::invalid("germ", format!("bad graph JSON: {e}")))?;
        let n = parsed.vertices;
        if n == 0 {
            return Err(Error::invalid("germ", "graph must have at least one vertex"));
        }
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for (i, j) in parsed.edges {
            if i >= n || j >= n {
                return Err(Error::invalid(
                    "germ",
                    format!("edge ({i},{j}) out of range for {n} vertices"),
                ));
            }
            if i == j {
                return Err(Error::invalid("germ", format!("loop at vertex {i}")));
            }
            adj[i].insert(j);
            adj[j].insert(i);
        }
        // Connectivity from vertex 0.
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        if count != n {
            return Err(Error::invalid("germ", "graph is not connected"));
        }
        Ok(GraphGerm {
            kind: GermKind::FiniteGraph {
                vertices: n,
                adj: adj.into_iter().map(|s| s.into_iter().collect()).collect(),
            },
        })
    }

    /// Parse a germ spec string: `tree:3`, `bitree:3,4`, `grid:2`, `free:2`,
    /// `dl:2,2`, `file:PATH`.
    pub fn parse(spec: &str) -> Result<GraphGerm> {
        let (kind, arg) = spec
            .split_once(':')
            .ok_or_else(|| Error::invalid("germ", format!("bad germ spec `{spec}`")))?;
        let ints = |want: usize| -> Result<Vec<u16>> {
            let parts: Vec<u16> = arg
                .split(',')
                .map(|s| s.trim().parse::<u16>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::invalid("germ", format!("bad germ spec `{spec}`")))?;
            if parts.len() != want {
                return Err(Error::invalid(
                    "germ",
                    format!("germ spec `{spec}`: expected {want} parameter(s)"),
                ));
            }
            Ok(parts)
        };
        match kind {
            "tree" => GraphGerm::regular_tree(ints(1)?[0]),
            "bitree" => {
                let v = ints(2)?;
                GraphGerm::biregular_tree(v[0], v[1])
            }
            "grid" => GraphGerm::grid(ints(1)?[0]),
            "free" => GraphGerm::free_group(ints(1)?[0]),
            "dl" => {
                let v = ints(2)?;
                GraphGerm::diestel_leader(v[0], v[1])
            }
            "file" => {
                let text = std::fs::read_to_string(arg)
                    .map_err(|e| Error::invalid("germ", format!("cannot read {arg}: {e}")))?;
                GraphGerm::from_finite_json(&text)
            }
            _ => Err(Error::invalid("germ", format!("unknown germ kind `{kind}`"))),
        }
    }

    pub fn root(&self) -> Addr {
        match &self.kind {
            GermKind::RegularTree(_) | GermKind::BiregularTree(_, _) => Addr::Tree(vec![]),
            GermKind::Grid(m) => Addr::Grid(vec![0; *m as usize]),
            GermKind::FreeGroup(_) => Addr::Word(vec![]),
            GermKind::DiestelLeader(_, _) => Addr::Dl {
                h: 0,
                d1: vec![],
                d2: vec![],
            },
            GermKind::FiniteGraph { .. } => Addr::Finite(0),
            GermKind::Product(a, b) => Addr::Pair(Box::new(a.root()), Box::new(b.root())),
        }
    }

    pub fn degree_bound(&self) -> usize {
        match &self.kind {
            GermKind::RegularTree(d) => *d as usize,
            GermKind::BiregularTree(d1, d2) => (*d1).max(*d2) as usize,
            GermKind::Grid(m) => 2 * *m as usize,
            GermKind::FreeGroup(r) => 2 * *r as usize,
            GermKind::DiestelLeader(p, q) => (*p + *q) as usize,
            GermKind::FiniteGraph { adj, .. } => adj.iter().map(Vec::len).max().unwrap_or(0),
            GermKind::Product(a, b) => a.degree_bound() + b.degree_bound(),
        }
    }

    /// Deterministic, order-stable neighbor enumeration.
    pub fn neighbors(&self, v: &Addr) -> Vec<Addr> {
        match (&self.kind, v) {
            (GermKind::RegularTree(d), Addr::Tree(path)) => {
                let mut out = Vec::new();
                if path.is_empty() {
                    for c in 0..*d {
                        out.push(Addr::Tree(vec![c]));
                    }
                } else {
                    let mut parent = path.clone();
                    parent.pop();
                    out.push(Addr::Tree(parent));
                    for c in 0..*d - 1 {
                        let mut child = path.clone();
                        child.push(c);
                        out.push(Addr::Tree(child));
                    }
                }
                out
            }
            (GermKind::BiregularTree(d1, d2), Addr::Tree(path)) => {
                let mut out = Vec::new();
                if path.is_empty() {
                    for c in 0..*d1 {
                        out.push(Addr::Tree(vec![c]));
                    }
                } else {
                    let mut parent = path.clone();
                    parent.pop();
                    out.push(Addr::Tree(parent));
                    // Depth-k vertices (k >= 1) alternate degrees d2, d1, ...
                    let deg = if path.len() % 2 == 1 { *d2 } else { *d1 };
                    for c in 0..deg - 1 {
                        let mut child = path.clone();
                        child.push(c);
                        out.push(Addr::Tree(child));
                    }
                }
                out
            }
            (GermKind::Grid(_), Addr::Grid(coords)) => {
                let mut out = Vec::new();
                for i in 0..coords.len() {
                    for delta in [-1i64, 1] {
                        let mut c = coords.clone();
                        c[i] += delta;
                        out.push(Addr::Grid(c));
                    }
                }
                out
            }
            (GermKind::FreeGroup(rank), Addr::Word(word)) => {
                let mut out = Vec::new();
                for l in 1..=*rank as i32 {
                    for letter in [l, -l] {
                        let mut w = word.clone();
                        if w.last() == Some(&-letter) {
                            w.pop();
                        } else {
                            w.push(letter);
                        }
                        out.push(Addr::Word(w));
                    }
                }
                out
            }
            (GermKind::DiestelLeader(p, q), Addr::Dl { h, d1, d2 }) => {
                let mut out = Vec::new();
                // Down moves: first coordinate steps to child c (new digit at
                // index h-... the child's digit sits at index h), second
                // coordinate steps to its parent (forget digit at -h+1).
                for c in 0..*p {
                    out.push(Addr::Dl {
                        h: h - 1,
                        d1: digit_set(d1, *h, c),
                        d2: digit_remove(d2, -h + 1),
                    });
                }
                // Up moves: first coordinate to its parent, second to child c.
                for c in 0..*q {
                    out.push(Addr::Dl {
                        h: h + 1,
                        d1: digit_remove(d1, h + 1),
                        d2: digit_set(d2, -h, c),
                    });
                }
                out
            }
            (GermKind::FiniteGraph { adj, .. }, Addr::Finite(i)) => {
                adj[*i].iter().map(|&j| Addr::Finite(j)).collect()
            }
            (GermKind::Product(ga, gb), Addr::Pair(a, b)) => {
                let mut out = Vec::new();
                for n in ga.neighbors(a) {
                    out.push(Addr::Pair(Box::new(n), Box::new((**b).clone())));
                }
                for n in gb.neighbors(b) {
                    out.push(Addr::Pair(Box::new((**a).clone()), Box::new(n)));
                }
                out
            }
            _ => panic!("address variant does not match germ kind"),
        }
    }
}

/// Insert digit `c` at `index` (dropping an explicit zero).
fn digit_set(digits: &[(i64, u16)], index: i64, c: u16) -> Vec<(i64, u16)> {
    let mut out: Vec<(i64, u16)> = digits
        .iter()
        .filter(|&&(i, _)| i != index)
        .cloned()
        .collect();
    if c != 0 {
        out.push((index, c));
        out.sort_unstable();
    }
    out
}

fn digit_remove(digits: &[(i64, u16)], index: i64) -> Vec<(i64, u16)> {
    digits
        .iter()
        .filter(|&&(i, _)| i != index)
        .cloned()
        .collect()
}

/// A finite window onto a germ: vertices with BFS-assigned IDs, symmetric
/// adjacency, and the distance-from-root map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ball {
    pub addrs: Vec<Addr>,
    /// Sorted neighbor ID lists; symmetric.
    pub adj: Vec<Vec<usize>>,
    pub radius: Vec<u32>,
    pub r: u32,
}

impl Ball {
    pub fn num_vertices(&self) -> usize {
        self.addrs.len()
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges as (u, v) with u < v, in order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, nbrs) in self.adj.iter().enumerate() {
            for &v in nbrs {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }
}

pub fn ball(germ: &GraphGerm, r: u32) -> Result<Ball> {
    ball_with_cap(germ, r, DEFAULT_VERTEX_CAP)
}

/// Level-by-level BFS with lexicographic tie-break on addresses inside each
/// level, so `ball(g, r)` is an ID-prefix of `ball(g, r')` for r' >= r.
pub fn ball_with_cap(germ: &GraphGerm, r: u32, cap: usize) -> Result<Ball> {
    let root = germ.root();
    let mut addrs: Vec<Addr> = vec![root.clone()];
    let mut id: HashMap<Addr, usize> = HashMap::from([(root.clone(), 0)]);
    let mut radius: Vec<u32> = vec![0];
    let mut level: Vec<Addr> = vec![root];
    let mut reached = 0;
    for depth in 1..=r {
        let mut next: BTreeSet<Addr> = BTreeSet::new();
        for v in &level {
            for n in germ.neighbors(v) {
                if !id.contains_key(&n) {
                    next.insert(n);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        reached = depth;
        for n in &next {
            if addrs.len() >= cap {
                return Err(Error::ResourceLimit {
                    module: "germ",
                    what: "ball vertices",
                    actual: addrs.len() + 1,
                    cap,
                });
            }
            id.insert(n.clone(), addrs.len());
            addrs.push(n.clone());
            radius.push(depth);
        }
        level = next.into_iter().collect();
    }
    let effective_r = if matches!(germ.kind, GermKind::FiniteGraph { .. }) {
        reached.max(0).min(r)
    } else {
        r
    };
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); addrs.len()];
    for (u, a) in addrs.iter().enumerate() {
        for n in germ.neighbors(a) {
            if let Some(&v) = id.get(&n) {
                adj[u].push(v);
            }
        }
    }
    for nbrs in &mut adj {
        nbrs.sort_unstable();
        nbrs.dedup();
    }
    Ok(Ball {
        addrs,
        adj,
        radius,
        r: effective_r,
    })
}

/// BFS distance within the ball. Near the window boundary this can exceed
/// the germ distance, since geodesics may leave the window.
pub fn distance(ball: &Ball, u: usize, v: usize) -> Result<u32> {
    let n = ball.num_vertices();
    if u >= n {
        return Err(Error::UnknownId { module: "germ", id: u });
    }
    if v >= n {
        return Err(Error::UnknownId { module: "germ", id: v });
    }
    if u == v {
        return Ok(0);
    }
    let mut dist = vec![u32::MAX; n];
    dist[u] = 0;
    let mut queue = VecDeque::from([u]);
    while let Some(x) = queue.pop_front() {
        for &y in &ball.adj[x] {
            if dist[y] == u32::MAX {
                dist[y] = dist[x] + 1;
                if y == v {
                    return Ok(dist[y]);
                }
                queue.push_back(y);
            }
        }
    }
    Err(Error::Invariant {
        module: "germ",
        detail: "ball is disconnected".into(),
    })
}

/// All-pairs-from-source distances within the ball (u32::MAX = unreachable).
pub fn distances_from(ball: &Ball, u: usize) -> Vec<u32> {
    let n = ball.num_vertices();
    let mut dist = vec![u32::MAX; n];
    dist[u] = 0;
    let mut queue = VecDeque::from([u]);
    while let Some(x) = queue.pop_front() {
        for &y in &ball.adj[x] {
            if dist[y] == u32::MAX {
                dist[y] = dist[x] + 1;
                queue.push_back(y);
            }
        }
    }
    dist
}

/// Data for a finite wreath product B wr_X^A H: for finite X the
/// semi-restricted power is the full power B^X, so G = B^X x| H.
pub struct WreathSpec {
    pub b: PermGroup,
    /// Generators of A <= B.
    pub a_gens: Vec<Perm>,
    pub h: PermGroup,
    pub x_size: usize,
    /// Action of each generator of H on X.
    pub action_gens: Vec<Perm>,
}

/// Group element of B^X x| H as (B-element indices per point, H-element index).
type WElem = (Vec<usize>, usize);

struct WreathGroup {
    b: PermGroup,
    h: PermGroup,
    x_size: usize,
    /// H-element index -> permutation of X.
    action: Vec<Perm>,
}

impl WreathGroup {
    fn identity(&self) -> WElem {
        (
            vec![self.b.identity_index(); self.x_size],
            self.h.identity_index(),
        )
    }

    /// (f1,h1)(f2,h2) = (x -> f1(x) f2(h1^-1 x), h1 h2).
    fn mul(&self, a: &WElem, c: &WElem) -> WElem {
        let h1_inv = &self.action[self.h.inv(a.1)];
        let f = (0..self.x_size)
            .map(|x| self.b.mul(a.0[x], c.0[h1_inv.apply(x)]))
            .collect();
        (f, self.h.mul(a.1, c.1))
    }
}

/// Schreier coset graph of G = B^X x| H on G/(A^X x| U), returned as a Ball
/// of full diameter rooted at the trivial coset.
pub fn wreath_cayley_abels(spec: &WreathSpec, u_gens: &[Perm]) -> Result<Ball> {
    wreath_cayley_abels_with_cap(spec, u_gens, DEFAULT_VERTEX_CAP)
}

pub fn wreath_cayley_abels_with_cap(
    spec: &WreathSpec,
    u_gens: &[Perm],
    cap: usize,
) -> Result<Ball> {
    if spec.x_size == 0 {
        return Err(Error::invalid("germ", "X must be nonempty"));
    }
    if spec.action_gens.len() != spec.h.gens().len() {
        return Err(Error::invalid(
            "germ",
            "need one X-permutation per generator of H",
        ));
    }
    for p in &spec.action_gens {
        if p.degree() != spec.x_size {
            return Err(Error::invalid("germ", "action permutation degree != |X|"));
        }
    }
    // Extend the generator action to all of H, checking the table is a valid
    // action (well-defined on the whole group).
    let mut action: Vec<Option<Perm>> = vec![None; spec.h.order()];
    let id_h = spec.h.identity_index();
    action[id_h] = Some(Perm::identity(spec.x_size));
    let mut queue = vec![id_h];
    while let Some(e) = queue.pop() {
        let pe = action[e].clone().unwrap();
        for (gi, g) in spec.h.gens().iter().enumerate() {
            let ge = spec.h.index_of(&g.compose(&spec.h.elements()[e])).unwrap();
            let pg = spec.action_gens[gi].compose(&pe);
            match &action[ge] {
                None => {
                    action[ge] = Some(pg);
                    queue.push(ge);
                }
                Some(existing) => {
                    if *existing != pg {
                        return Err(Error::invalid(
                            "germ",
                            "action table is not a group action of H on X",
                        ));
                    }
                }
            }
        }
    }
    let action: Vec<Perm> = action.into_iter().map(Option::unwrap).collect();

    // A as a member set of B.
    let a_sub = spec.b.subgroup(&spec.a_gens, "A")?;
    let u_group = PermGroup::generate(spec.h.degree(), u_gens.to_vec())?;
    let mut u_members: BTreeSet<usize> = BTreeSet::new();
    for p in u_group.elements() {
        match spec.h.index_of(p) {
            Some(i) => {
                u_members.insert(i);
            }
            None => {
                return Err(Error::NotSubgroup {
                    small: "U".into(),
                    big: "H".into(),
                });
            }
        }
    }

    let wg = WreathGroup {
        b: spec.b.clone(),
        h: spec.h.clone(),
        x_size: spec.x_size,
        action,
    };

    // K = A^X x| U, enumerated explicitly.
    let a_members: Vec<usize> = a_sub.members.iter().cloned().collect();
    let k_size = a_members
        .len()
        .checked_pow(spec.x_size as u32)
        .and_then(|n| n.checked_mul(u_members.len()))
        .ok_or(Error::ResourceLimit {
            module: "germ",
            what: "wreath subgroup size",
            actual: usize::MAX,
            cap,
        })?;
    if k_size > cap {
        return Err(Error::ResourceLimit {
            module: "germ",
            what: "wreath subgroup size",
            actual: k_size,
            cap,
        });
    }
    let mut k_elems: Vec<WElem> = Vec::with_capacity(k_size);
    let mut funcs: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..spec.x_size {
        let mut next = Vec::with_capacity(funcs.len() * a_members.len());
        for f in &funcs {
            for &a in &a_members {
                let mut f2 = f.clone();
                f2.push(a);
                next.push(f2);
            }
        }
        funcs = next;
    }
    for f in &funcs {
        for &u in &u_members {
            k_elems.push((f.clone(), u));
        }
    }
    // Closure check: K is a subgroup exactly when U-conjugation keeps A^X
    // inside A^X, i.e. products of the listed elements stay listed.
    {
        let k_set: BTreeSet<WElem> = k_elems.iter().cloned().collect();
        for k1 in k_elems.iter().take(64) {
            for k2 in k_elems.iter().take(64) {
                if !k_set.contains(&wg.mul(k1, k2)) {
                    return Err(Error::invalid(
                        "germ",
                        "A^X x| U is not closed under multiplication",
                    ));
                }
            }
        }
    }

    // Generating set: B's generators planted in one coordinate per H-orbit
    // of X, plus H's generators. Closed under inverses implicitly because
    // edges are recorded undirected.
    let mut orbit_min: Vec<usize> = Vec::new();
    {
        let mut seen = vec![false; spec.x_size];
        for x0 in 0..spec.x_size {
            if seen[x0] {
                continue;
            }
            orbit_min.push(x0);
            let mut stack = vec![x0];
            seen[x0] = true;
            while let Some(x) = stack.pop() {
                for p in &wg.action {
                    let y = p.apply(x);
                    if !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
    }
    let mut gens: Vec<WElem> = Vec::new();
    for &x0 in &orbit_min {
        for g in spec.b.gens() {
            let gi = spec.b.index_of(g).unwrap();
            let mut f = vec![spec.b.identity_index(); spec.x_size];
            f[x0] = gi;
            gens.push((f, id_h));
            // inverse, for undirected edge coverage when g has order > 2
            let mut fi = vec![spec.b.identity_index(); spec.x_size];
            fi[x0] = spec.b.inv(gi);
            gens.push((fi, id_h));
        }
    }
    for g in spec.h.gens() {
        let gi = spec.h.index_of(g).unwrap();
        gens.push((vec![spec.b.identity_index(); spec.x_size], gi));
        gens.push((
            vec![spec.b.identity_index(); spec.x_size],
            spec.h.inv(gi),
        ));
    }

    // Canonical coset key: the least element of gK.
    let canon = |g: &WElem| -> WElem {
        k_elems
            .iter()
            .map(|k| wg.mul(g, k))
            .min()
            .unwrap()
    };

    // BFS over cosets, level-sorted like `ball_with_cap`.
    let root = canon(&wg.identity());
    let mut addrs: Vec<WElem> = vec![root.clone()];
    let mut id: HashMap<WElem, usize> = HashMap::from([(root.clone(), 0)]);
    let mut radius: Vec<u32> = vec![0];
    let mut level: Vec<WElem> = vec![root];
    let mut depth = 0;
    loop {
        let mut next: BTreeSet<WElem> = BTreeSet::new();
        for v in &level {
            for s in &gens {
                let c = canon(&wg.mul(s, v));
                if !id.contains_key(&c) {
                    next.insert(c);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        depth += 1;
        for n in &next {
            if addrs.len() >= cap {
                return Err(Error::ResourceLimit {
                    module: "germ",
                    what: "wreath cosets",
                    actual: addrs.len() + 1,
                    cap,
                });
            }
            id.insert(n.clone(), addrs.len());
            addrs.push(n.clone());
            radius.push(depth);
        }
        level = next.into_iter().collect();
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); addrs.len()];
    for (u, g) in addrs.iter().enumerate() {
        for s in &gens {
            let v = id[&canon(&wg.mul(s, g))];
            if v != u {
                adj[u].push(v);
            }
        }
    }
    for nbrs in &mut adj {
        nbrs.sort_unstable();
        nbrs.dedup();
    }
    let ball_addrs = addrs
        .into_iter()
        .map(|(mut f, h)| {
            f.push(h);
            Addr::Raw(f)
        })
        .collect();
    Ok(Ball {
        addrs: ball_addrs,
        adj,
        radius,
        r: depth,
    })
}
