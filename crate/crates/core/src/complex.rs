//! Simplicial complexes, Rips complexes of balls, barycentric subdivision and
//! cellular chain complexes over Z and Q.
//!
//! Simplices are strictly increasing vertex-ID tuples; the sorted-tuple
//! orientation with alternating face signs is the fixed convention
//! throughout.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_traits::One;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::germ::{self, Ball};
use crate::linalg::SparseInt;

pub const DEFAULT_SIMPLEX_CAP: usize = 2_000_000;
pub const DEFAULT_MAX_DIM: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ring {
    Z,
    Q,
}

/// Per-dimension lists of strictly increasing vertex tuples, closed under
/// faces, each list sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplicialComplex {
    simplices: Vec<Vec<Vec<usize>>>,
}

#[derive(Deserialize)]
struct ComplexJson {
    simplices: Vec<Vec<usize>>,
}

impl SimplicialComplex {
    pub fn empty() -> SimplicialComplex {
        SimplicialComplex { simplices: vec![] }
    }

    /// Build from a generating set of simplices; faces are filled in.
    pub fn from_simplices(gens: impl IntoIterator<Item = Vec<usize>>) -> Result<SimplicialComplex> {
        let mut by_dim: Vec<BTreeSet<Vec<usize>>> = Vec::new();
        let mut stack: Vec<Vec<usize>> = Vec::new();
        for s in gens {
            if s.is_empty() {
                return Err(Error::invalid("complex", "empty simplex"));
            }
            if !s.windows(2).all(|w| w[0] < w[1]) {
                let mut t = s.clone();
                t.sort_unstable();
                t.dedup();
                if t.len() != s.len() {
                    return Err(Error::invalid(
                        "complex",
                        format!("simplex {s:?} has repeated vertices"),
                    ));
                }
                stack.push(t);
            } else {
                stack.push(s);
            }
        }
        while let Some(s) = stack.pop() {
            let d = s.len() - 1;
            if by_dim.len() <= d {
                by_dim.resize_with(d + 1, BTreeSet::new);
            }
            if by_dim[d].insert(s.clone()) && d > 0 {
                for i in 0..s.len() {
                    let mut face = s.clone();
                    face.remove(i);
                    stack.push(face);
                }
            }
        }
        Ok(SimplicialComplex {
            simplices: by_dim
                .into_iter()
                .map(|set| set.into_iter().collect())
                .collect(),
        })
    }

    /// JSON format `{"simplices": [[0],[1],[0,1],...]}`; closure computed.
    pub fn from_json(text: &str) -> Result<SimplicialComplex> {
        let parsed: ComplexJson = serde_json::from_str(text)
            .map_err(|e| Error::invalid("complex", format!("bad complex JSON: {e}")))?;
        SimplicialComplex::from_simplices(parsed.simplices)
    }

    pub fn to_json(&self) -> String {
        let all: Vec<&Vec<usize>> = self.simplices.iter().flatten().collect();
        serde_json::json!({ "simplices": all }).to_string()
    }

    /// Maximal nonempty dimension, or None for the empty complex.
    pub fn dim(&self) -> Option<usize> {
        if self.simplices.is_empty() {
            None
        } else {
            Some(self.simplices.len() - 1)
        }
    }

    pub fn simplices(&self, p: usize) -> &[Vec<usize>] {
        self.simplices.get(p).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn num_simplices(&self, p: usize) -> usize {
        self.simplices(p).len()
    }

    pub fn total_simplices(&self) -> usize {
        self.simplices.iter().map(Vec::len).sum()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.simplices
            .iter()
            .enumerate()
            .map(|(p, list)| {
                let n = list.len() as i64;
                if p % 2 == 0 {
                    n
                } else {
                    -n
                }
            })
            .sum()
    }

    pub fn contains(&self, simplex: &[usize]) -> bool {
        let d = simplex.len().wrapping_sub(1);
        self.simplices
            .get(d)
            .map(|list| list.binary_search_by(|s| s.as_slice().cmp(simplex)).is_ok())
            .unwrap_or(false)
    }

    /// Subset check with identical vertex IDs.
    pub fn is_subcomplex_of(&self, other: &SimplicialComplex) -> bool {
        self.simplices
            .iter()
            .flatten()
            .all(|s| other.contains(s))
    }

    /// Full subcomplex induced on a vertex set.
    pub fn induced(&self, keep: &BTreeSet<usize>) -> SimplicialComplex {
        let simplices = self
            .simplices
            .iter()
            .map(|list| {
                list.iter()
                    .filter(|s| s.iter().all(|v| keep.contains(v)))
                    .cloned()
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>();
        let mut trimmed = simplices;
        while trimmed.last().map(Vec::is_empty).unwrap_or(false) {
            trimmed.pop();
        }
        SimplicialComplex { simplices: trimmed }
    }
}

/// Rips complex of a ball at scale d: simplices are vertex tuples of size
/// <= max_dim+1 with pairwise ball distance <= d.
pub fn rips(ball: &Ball, d: u32, max_dim: usize) -> Result<SimplicialComplex> {
    rips_with_cap(ball, d, max_dim, DEFAULT_SIMPLEX_CAP)
}

pub fn rips_with_cap(
    ball: &Ball,
    d: u32,
    max_dim: usize,
    cap: usize,
) -> Result<SimplicialComplex> {
    if d < 1 || max_dim < 1 {
        return Err(Error::invalid("complex", "rips needs d >= 1 and max_dim >= 1"));
    }
    let n = ball.num_vertices();
    // d-neighborhoods via truncated BFS from every vertex. Only forward
    // neighbors (v > u) are needed for clique growth.
    let mut forward: Vec<Vec<usize>> = vec![Vec::new(); n];
    for u in 0..n {
        let dist = germ::distances_from(ball, u);
        for (v, &dv) in dist.iter().enumerate() {
            if v > u && dv <= d {
                forward[u].push(v);
            }
        }
    }
    let mut by_dim: Vec<Vec<Vec<usize>>> = vec![(0..n).map(|v| vec![v]).collect()];
    let mut count = n;
    if count > cap {
        return Err(Error::ResourceLimit {
            module: "complex",
            what: "rips simplices",
            actual: count,
            cap,
        });
    }
    for p in 1..=max_dim {
        let prev = &by_dim[p - 1];
        let mut cur: Vec<Vec<usize>> = Vec::new();
        for s in prev {
            let last = *s.last().unwrap();
            'cand: for &v in &forward[last] {
                // v must be within distance d of every vertex of s.
                for &u in &s[..s.len() - 1] {
                    if !forward[u].binary_search(&v).is_ok() {
                        continue 'cand;
                    }
                }
                let mut t = s.clone();
                t.push(v);
                count += 1;
                if count > cap {
                    return Err(Error::ResourceLimit {
                        module: "complex",
                        what: "rips simplices",
                        actual: count,
                        cap,
                    });
                }
                cur.push(t);
            }
        }
        if cur.is_empty() {
            break;
        }
        cur.sort_unstable();
        by_dim.push(cur);
    }
    Ok(SimplicialComplex { simplices: by_dim })
}

/// The chain complex of a simplicial complex with integer boundary matrices
/// (used for both Z and Q homology; Q computations promote entries).
#[derive(Debug, Clone)]
pub struct ChainComplex {
    pub ring: Ring,
    pub ranks: Vec<usize>,
    /// boundaries[p] is d_{p+1}: C_{p+1} -> C_p, so index 0 holds d_1.
    /// When augmented, an extra leading matrix eps: C_0 -> R is prepended and
    /// `ranks` gains no entry: the augmentation is tracked separately.
    pub boundaries: Vec<SparseInt>,
    pub augmented: bool,
}

impl ChainComplex {
    /// d_p as a matrix (p >= 1); zero-size matrices outside range.
    pub fn boundary(&self, p: usize) -> SparseInt {
        if p == 0 || p > self.boundaries.len() {
            let rows = if p == 0 { 0 } else { self.rank(p - 1) };
            return SparseInt::new(rows, self.rank(p));
        }
        self.boundaries[p - 1].clone()
    }

    pub fn rank(&self, p: usize) -> usize {
        self.ranks.get(p).copied().unwrap_or(0)
    }

    pub fn top_dim(&self) -> usize {
        self.ranks.len().saturating_sub(1)
    }

    /// Check d_p . d_{p+1} = 0 for all p (and eps . d_1 = 0 if augmented).
    pub fn verify(&self) -> Result<()> {
        for p in 1..=self.top_dim() {
            let prod = self.boundary(p).mul(&self.boundary(p + 1));
            if !prod.is_zero() {
                return Err(Error::Invariant {
                    module: "complex",
                    detail: format!("d_{} . d_{} != 0", p, p + 1),
                });
            }
        }
        if self.augmented {
            let mut eps = SparseInt::new(1, self.rank(0));
            for j in 0..self.rank(0) {
                eps.set(0, j, BigInt::one());
            }
            let prod = eps.mul(&self.boundary(1));
            if !prod.is_zero() {
                return Err(Error::Invariant {
                    module: "complex",
                    detail: "eps . d_1 != 0".into(),
                });
            }
        }
        Ok(())
    }
}

/// Alternating-face-sign boundary matrices of K.
pub fn chain_complex(k: &SimplicialComplex, ring: Ring, augmented: bool) -> ChainComplex {
    let top = k.dim().map(|d| d + 1).unwrap_or(0);
    let ranks: Vec<usize> = (0..top).map(|p| k.num_simplices(p)).collect();
    let mut boundaries = Vec::new();
    for p in 1..top {
        let lower = k.simplices(p - 1);
        let index: HashMap<&[usize], usize> = lower
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_slice(), i))
            .collect();
        let mut m = SparseInt::new(lower.len(), k.num_simplices(p));
        for (j, s) in k.simplices(p).iter().enumerate() {
            for i in 0..s.len() {
                let mut face = s.clone();
                face.remove(i);
                let row = index[face.as_slice()];
                let sign = if i % 2 == 0 { 1 } else { -1 };
                m.set(row, j, BigInt::from(sign));
            }
        }
        boundaries.push(m);
    }
    ChainComplex {
        ring,
        ranks,
        boundaries,
        augmented,
    }
}

/// Relative chain complex of a pair (L, K) with K a subcomplex of L:
/// quotient bases are the simplices of L not in K.
pub fn relative_chain_complex(
    l: &SimplicialComplex,
    k: &SimplicialComplex,
    ring: Ring,
) -> Result<ChainComplex> {
    if !k.is_subcomplex_of(l) {
        return Err(Error::NotSubcomplex {
            detail: "relative complex requires K subset L".into(),
        });
    }
    let top = l.dim().map(|d| d + 1).unwrap_or(0);
    let mut kept: Vec<Vec<&Vec<usize>>> = Vec::new();
    for p in 0..top {
        kept.push(
            l.simplices(p)
                .iter()
                .filter(|s| !k.contains(s))
                .collect(),
        );
    }
    let ranks: Vec<usize> = kept.iter().map(Vec::len).collect();
    let mut boundaries = Vec::new();
    for p in 1..top {
        let index: HashMap<&[usize], usize> = kept[p - 1]
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_slice(), i))
            .collect();
        let mut m = SparseInt::new(kept[p - 1].len(), kept[p].len());
        for (j, s) in kept[p].iter().enumerate() {
            for i in 0..s.len() {
                let mut face = (*s).clone();
                face.remove(i);
                if let Some(&row) = index.get(face.as_slice()) {
                    let sign = if i % 2 == 0 { 1 } else { -1 };
                    m.set(row, j, BigInt::from(sign));
                }
            }
        }
        boundaries.push(m);
    }
    Ok(ChainComplex {
        ring,
        ranks,
        boundaries,
        augmented: false,
    })
}

/// Barycentric subdivision for dim <= 2. New vertex IDs are the positions of
/// the original simplices in the flattened (dim-major, lex) order.
pub fn subdivide(k: &SimplicialComplex) -> Result<SimplicialComplex> {
    const CAP: usize = 2;
    if let Some(d) = k.dim() {
        if d > CAP {
            return Err(Error::DimensionCap { dim: d, cap: CAP });
        }
    }
    // New vertex per simplex.
    let mut vertex_of: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut next = 0;
    for p in 0..=k.dim().unwrap_or(0) {
        for s in k.simplices(p) {
            vertex_of.insert(s.clone(), next);
            next += 1;
        }
    }
    // Simplices of the subdivision: chains s_0 < s_1 < ... under the face
    // partial order.
    let mut gens: Vec<Vec<usize>> = Vec::new();
    match k.dim() {
        None => return Ok(SimplicialComplex::empty()),
        Some(0) => {
            for s in k.simplices(0) {
                gens.push(vec![vertex_of[s]]);
            }
        }
        Some(_) => {
            for p in 1..=k.dim().unwrap() {
                for s in k.simplices(p) {
                    // Maximal chains ending at s.
                    let chains = chains_into(s, &vertex_of);
                    gens.extend(chains);
                }
            }
            // Isolated vertices (not a face of any edge) must survive.
            for s in k.simplices(0) {
                gens.push(vec![vertex_of[s]]);
            }
        }
    }
    SimplicialComplex::from_simplices(gens)
}

/// All maximal chains of proper faces ending in `top`, as vertex tuples.
fn chains_into(top: &Vec<usize>, vertex_of: &HashMap<Vec<usize>, usize>) -> Vec<Vec<usize>> {
    // Recursive: chains for a p-simplex = for each facet f, chains(f) + top.
    if top.len() == 1 {
        return vec![vec![vertex_of[top]]];
    }
    let mut out = Vec::new();
    for i in 0..top.len() {
        let mut f = top.clone();
        f.remove(i);
        for mut c in chains_into(&f, vertex_of) {
            c.push(vertex_of[top]);
            out.push(c);
        }
    }
    out
}
