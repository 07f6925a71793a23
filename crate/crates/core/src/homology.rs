//! Homology of chain complexes over Z and Q, and induced maps on homology
//! for simplicial inclusions with exact triviality verdicts.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::complex::{chain_complex, ChainComplex, Ring, SimplicialComplex};
use crate::error::{Error, Result};
use crate::linalg::{self, ColumnSpace, RatMat};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomologySummary {
    pub ring: Ring,
    pub reduced: bool,
    /// betti[p]; in degree 0 this is the reduced rank when `reduced`.
    pub betti: Vec<usize>,
    /// torsion[p]: elementary divisors > 1 of H_p (empty over Q).
    pub torsion: Vec<Vec<BigInt>>,
}

impl HomologySummary {
    pub fn betti_p(&self, p: usize) -> usize {
        self.betti.get(p).copied().unwrap_or(0)
    }

    pub fn torsion_p(&self, p: usize) -> &[BigInt] {
        self.torsion.get(p).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn is_trivial_p(&self, p: usize) -> bool {
        self.betti_p(p) == 0 && self.torsion_p(p).is_empty()
    }
}

/// betti_p = rank C_p - rank d_p - rank d_{p+1}; over Z, torsion_p is the
/// invariant factors of d_{p+1} exceeding 1. An augmented complex reports
/// reduced homology in degree 0.
pub fn homology(c: &ChainComplex) -> HomologySummary {
    let top = c.top_dim();
    let mut rank_d = vec![0usize; top + 2]; // rank of d_p, index p
    let mut torsion: Vec<Vec<BigInt>> = vec![vec![]; top + 1];
    match c.ring {
        Ring::Z => {
            for p in 1..=top + 1 {
                let b = c.boundary(p);
                if b.rows() == 0 || b.cols() == 0 {
                    continue;
                }
                let s = linalg::smith(&b);
                rank_d[p] = s.rank;
                if p >= 1 && p - 1 <= top {
                    torsion[p - 1] = s.torsion();
                }
            }
        }
        Ring::Q => {
            for p in 1..=top + 1 {
                let b = c.boundary(p);
                if b.rows() == 0 || b.cols() == 0 {
                    continue;
                }
                rank_d[p] = linalg::rank_q(&b.to_rat());
            }
        }
    }
    let mut betti = Vec::with_capacity(top + 1);
    for p in 0..=top {
        let mut bp = c.rank(p) - rank_d[p] - rank_d[p + 1];
        if p == 0 && c.augmented && c.rank(0) > 0 {
            // The augmentation row has rank 1 and is onto, with d_1 mapping
            // into its kernel, so reduced betti_0 drops by exactly 1.
            bp -= 1;
        }
        betti.push(bp);
    }
    HomologySummary {
        ring: c.ring,
        reduced: c.augmented,
        betti,
        torsion,
    }
}

/// Convenience: homology of a simplicial complex.
pub fn homology_of(k: &SimplicialComplex, ring: Ring, reduced: bool) -> HomologySummary {
    homology(&chain_complex(k, ring, reduced))
}

#[derive(Debug, Clone)]
pub struct InducedMap {
    pub p: usize,
    pub ring: Ring,
    /// Free ranks of H_p(K) and H_p(L).
    pub source_rank: usize,
    pub target_rank: usize,
    /// Map on free parts in the chosen cycle bases (target_rank x source_rank).
    pub matrix: RatMat,
    /// True iff every source cycle generator maps into the boundary space of
    /// the target (over Z this includes torsion classes).
    pub trivial: bool,
}

/// Position of each p-simplex of K in L's p-simplex list.
fn simplex_positions(
    k: &SimplicialComplex,
    l: &SimplicialComplex,
    p: usize,
) -> Result<Vec<usize>> {
    let index: HashMap<&[usize], usize> = l
        .simplices(p)
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_slice(), i))
        .collect();
    k.simplices(p)
        .iter()
        .map(|s| {
            index.get(s.as_slice()).copied().ok_or_else(|| Error::NotSubcomplex {
                detail: format!("simplex {s:?} of K missing from L"),
            })
        })
        .collect()
}

/// Induced map H_p(K) -> H_p(L) for a subcomplex inclusion K <= L with
/// shared vertex IDs.
pub fn induced_map(
    k: &SimplicialComplex,
    l: &SimplicialComplex,
    p: usize,
    ring: Ring,
) -> Result<InducedMap> {
    if !k.is_subcomplex_of(l) {
        return Err(Error::NotSubcomplex {
            detail: "K is not a subcomplex of L".into(),
        });
    }
    let ck = chain_complex(k, ring, false);
    let cl = chain_complex(l, ring, false);
    let pos = simplex_positions(k, l, p)?;
    let nl = cl.rank(p);

    // Cycle generators of K in degree p. Over Z the kernel lattice basis
    // also witnesses torsion classes (every class has a cycle representative
    // in the lattice).
    let dk = ck.boundary(p);
    let dl_next = cl.boundary(p + 1);
    let kernel_k: Vec<Vec<BigRational>> = match ring {
        Ring::Q => linalg::kernel_basis_q(&dk.to_rat()),
        Ring::Z => linalg::kernel_basis_z(&dk)
            .into_iter()
            .map(|v| v.into_iter().map(BigRational::from_integer).collect())
            .collect(),
    };

    // Triviality: each generator's image must lie in im d_{p+1}(L), decided
    // over the requested ring.
    let mut trivial = true;
    match ring {
        Ring::Q => {
            let span = ColumnSpace::from_columns(&dl_next.to_rat());
            for z in &kernel_k {
                let img = push_vec(z, &pos, nl);
                if !span.contains(&linalg::vec_to_map(&img)) {
                    trivial = false;
                    break;
                }
            }
        }
        Ring::Z => {
            let s = if dl_next.rows() > 0 && dl_next.cols() > 0 {
                Some(linalg::smith(&dl_next))
            } else {
                None
            };
            for z in &kernel_k {
                let img: Vec<BigInt> = {
                    let v = push_vec(z, &pos, nl);
                    v.into_iter().map(|x| x.to_integer()).collect()
                };
                let solvable = match &s {
                    Some(s) => linalg::solve_z_with(s, &img).is_some(),
                    None => img.iter().all(Zero::is_zero),
                };
                if !solvable {
                    trivial = false;
                    break;
                }
            }
        }
    }

    // Matrix on free parts, computed rationally in deterministic cycle bases:
    // homology basis = kernel vectors that extend the boundary span.
    let (src_basis, src_rank) = homology_basis(&ck, p);
    let (tgt_basis, tgt_rank) = homology_basis(&cl, p);
    let mut matrix = RatMat::new(tgt_rank, src_rank);
    if src_rank > 0 {
        // Solve img = boundary-part + sum c_i * tgt_basis_i.
        let bnd = dl_next.to_rat();
        let mut sys = RatMat::new(nl, bnd.cols() + tgt_rank);
        for (r, c, v) in bnd.iter() {
            sys.set(r, c, v.clone());
        }
        for (i, h) in tgt_basis.iter().enumerate() {
            for (r, v) in h.iter().enumerate() {
                if !v.is_zero() {
                    sys.set(r, bnd.cols() + i, v.clone());
                }
            }
        }
        for (j, z) in src_basis.iter().enumerate() {
            let img = push_vec(z, &pos, nl);
            match linalg::solve_q(&sys, &img)? {
                linalg::SolveQ::Solution(sol) => {
                    for i in 0..tgt_rank {
                        let v = sol[bnd.cols() + i].clone();
                        if !v.is_zero() {
                            matrix.set(i, j, v);
                        }
                    }
                }
                linalg::SolveQ::Inconsistent => {
                    return Err(Error::Invariant {
                        module: "homology",
                        detail: "cycle image not expressible in target cycle space".into(),
                    })
                }
            }
        }
    }
    Ok(InducedMap {
        p,
        ring,
        source_rank: src_rank,
        target_rank: tgt_rank,
        matrix,
        trivial,
    })
}

/// Deterministic free-part homology basis in degree p: kernel basis vectors
/// of d_p that extend the span of im d_{p+1}, in order.
fn homology_basis(c: &ChainComplex, p: usize) -> (Vec<Vec<BigRational>>, usize) {
    let dk = c.boundary(p).to_rat();
    let kernel = linalg::kernel_basis_q(&dk);
    let mut span = ColumnSpace::from_columns(&c.boundary(p + 1).to_rat());
    let mut basis = Vec::new();
    for z in kernel {
        if span.insert(linalg::vec_to_map(&z)) {
            basis.push(z);
        }
    }
    let rank = basis.len();
    (basis, rank)
}

/// Push a K-chain vector forward to L-coordinates along the position map.
fn push_vec(z: &[BigRational], pos: &[usize], nl: usize) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); nl];
    for (i, v) in z.iter().enumerate() {
        if !v.is_zero() {
            out[pos[i]] = v.clone();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::SimplicialComplex;

    fn c4() -> SimplicialComplex {
        SimplicialComplex::from_simplices([vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]])
            .unwrap()
    }

    fn rp2() -> SimplicialComplex {
        // Minimal 6-vertex triangulation of the projective plane.
        SimplicialComplex::from_simplices([
            vec![0, 1, 2],
            vec![0, 2, 3],
            vec![0, 3, 4],
            vec![0, 4, 5],
            vec![0, 1, 5],
            vec![1, 2, 4],
            vec![1, 3, 4],
            vec![1, 3, 5],
            vec![2, 3, 5],
            vec![2, 4, 5],
        ])
        .unwrap()
    }

    #[test]
    fn cycle_graph_homology() {
        let h = homology_of(&c4(), Ring::Z, false);
        assert_eq!(h.betti, vec![1, 1]);
        assert!(h.torsion.iter().all(Vec::is_empty));
    }

    #[test]
    fn rp2_homology() {
        let k = rp2();
        assert_eq!(k.num_simplices(1), 15);
        assert_eq!(k.num_simplices(2), 10);
        assert_eq!(k.euler_characteristic(), 1);
        let h = homology_of(&k, Ring::Z, false);
        assert_eq!(h.betti, vec![1, 0, 0]);
        assert_eq!(h.torsion_p(1), &[BigInt::from(2)]);
        assert!(h.torsion_p(2).is_empty());
        // Over Q the torsion disappears.
        let hq = homology_of(&k, Ring::Q, false);
        assert_eq!(hq.betti, vec![1, 0, 0]);
    }

    #[test]
    fn point_reduced() {
        let k = SimplicialComplex::from_simplices([vec![0]]).unwrap();
        let h = homology_of(&k, Ring::Z, true);
        assert!(h.betti.iter().all(|&b| b == 0));
    }

    #[test]
    fn reduced_vs_unreduced() {
        for k in [c4(), rp2()] {
            let h = homology_of(&k, Ring::Z, false);
            let hr = homology_of(&k, Ring::Z, true);
            assert_eq!(h.betti_p(0), hr.betti_p(0) + 1);
            assert_eq!(h.torsion, hr.torsion);
            for p in 1..h.betti.len() {
                assert_eq!(h.betti_p(p), hr.betti_p(p));
            }
        }
    }

    #[test]
    fn induced_into_cone_is_trivial() {
        let k = c4();
        let l = SimplicialComplex::from_simplices([
            vec![0, 1, 4],
            vec![1, 2, 4],
            vec![2, 3, 4],
            vec![0, 3, 4],
        ])
        .unwrap();
        for ring in [Ring::Z, Ring::Q] {
            let m = induced_map(&k, &l, 1, ring).unwrap();
            assert!(m.trivial);
            assert_eq!(m.target_rank, 0);
        }
    }

    #[test]
    fn induced_identity() {
        let k = c4();
        let m = induced_map(&k, &k, 1, Ring::Z).unwrap();
        assert!(!m.trivial);
        assert_eq!(m.source_rank, 1);
        assert_eq!(m.target_rank, 1);
        let v = m.matrix.get(0, 0);
        assert_eq!(v.numer().magnitude(), &1u32.into());
        assert_eq!(v.denom(), &BigInt::from(1));
    }

    #[test]
    fn induced_annulus_nontrivial() {
        // Square annulus: inner cycle 0-1-2-3, outer 4-5-6-7.
        let l = SimplicialComplex::from_simplices([
            vec![0, 1, 5],
            vec![0, 4, 5],
            vec![1, 2, 6],
            vec![1, 5, 6],
            vec![2, 3, 7],
            vec![2, 6, 7],
            vec![0, 3, 4],
            vec![3, 4, 7],
        ])
        .unwrap();
        let k = c4();
        assert!(k.is_subcomplex_of(&l));
        for ring in [Ring::Z, Ring::Q] {
            let m = induced_map(&k, &l, 1, ring).unwrap();
            assert!(!m.trivial);
        }
    }

    #[test]
    fn torsion_class_detected_over_z_only() {
        // In the projective plane, some 3-cycle without a filling face
        // represents the Z/2 class: trivial over Q, nontrivial over Z.
        let l = rp2();
        let mut witnessed = false;
        let edges: Vec<&Vec<usize>> = l.simplices(1).iter().collect();
        for a in 0..edges.len() {
            for b in a + 1..edges.len() {
                for c in b + 1..edges.len() {
                    let mut vs: Vec<usize> = Vec::new();
                    vs.extend(edges[a]);
                    vs.extend(edges[b]);
                    vs.extend(edges[c]);
                    vs.sort_unstable();
                    vs.dedup();
                    if vs.len() != 3 {
                        continue;
                    }
                    if l.contains(&vs) {
                        continue; // bounds a face, trivial both ways
                    }
                    let k = SimplicialComplex::from_simplices([
                        edges[a].clone(),
                        edges[b].clone(),
                        edges[c].clone(),
                    ])
                    .unwrap();
                    let mq = induced_map(&k, &l, 1, Ring::Q).unwrap();
                    let mz = induced_map(&k, &l, 1, Ring::Z).unwrap();
                    assert!(mq.trivial, "H_1(RP^2; Q) = 0 forces Q-triviality");
                    if !mz.trivial {
                        witnessed = true;
                    }
                }
            }
        }
        assert!(witnessed, "some empty 3-cycle must carry the Z/2 class");
    }

    #[test]
    fn not_a_subcomplex() {
        let k = SimplicialComplex::from_simplices([vec![7, 8]]).unwrap();
        let l = c4();
        assert!(matches!(
            induced_map(&k, &l, 1, Ring::Q),
            Err(Error::NotSubcomplex { .. })
        ));
    }

    #[test]
    fn triviality_composes() {
        // K = C4, L = cone(C4), M = cone plus extra simplex: K -> L trivial
        // implies K -> M trivial.
        let k = c4();
        let l = SimplicialComplex::from_simplices([
            vec![0, 1, 4],
            vec![1, 2, 4],
            vec![2, 3, 4],
            vec![0, 3, 4],
        ])
        .unwrap();
        let m = SimplicialComplex::from_simplices([
            vec![0, 1, 4],
            vec![1, 2, 4],
            vec![2, 3, 4],
            vec![0, 3, 4],
            vec![4, 5],
        ])
        .unwrap();
        let kl = induced_map(&k, &l, 1, Ring::Z).unwrap();
        let km = induced_map(&k, &m, 1, Ring::Z).unwrap();
        assert!(kl.trivial);
        assert!(km.trivial);
    }
}
