//! Equivariant orbit complexes for cocompact proper actions and the
//! deflation functor Q (x)_G: homology of the deflated complex computes
//! dH_k(G;Q) when the underlying space is contractible (a user assertion,
//! recorded but not verified), and its length bounds cd_Q from above.
//!
//! Deflation coefficient rule: a boundary term sum c_i g_i V collapses to
//! sum c_i, since every coset term maps to 1 under (x)_G with trivial
//! coefficients; stabilizer inclusions act as the identity on Q.

use num_bigint::BigInt;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::linalg::{self, SparseInt};

/// Per dimension p: one stabilizer label per orbit of p-cells, and for p >= 1
/// the deflated boundary of each p-orbit as signed (p-1)-orbit terms.
#[derive(Debug, Clone)]
pub struct OrbitComplex {
    /// Stabilizer labels (opaque, all flagged compact-open).
    pub orbits: Vec<Vec<String>>,
    /// boundary[p-1][j] = deflated boundary of the j-th p-orbit, as
    /// (coefficient, index of target (p-1)-orbit) pairs.
    pub boundary: Vec<Vec<Vec<(i64, usize)>>>,
}

#[derive(Deserialize)]
struct OrbitJsonEntry {
    stab: String,
}

#[derive(Deserialize)]
struct OrbitComplexJson {
    orbits: Vec<Vec<OrbitJsonEntry>>,
    /// Flattened over all orbits of dimension >= 1, dimension-major:
    /// first all 1-orbits in order, then all 2-orbits, and so on.
    #[serde(default)]
    boundary: Vec<Vec<(i64, usize)>>,
}

impl OrbitComplex {
    pub fn from_json(text: &str) -> Result<OrbitComplex> {
        let parsed: OrbitComplexJson = serde_json::from_str(text)
            .map_err(|e| Error::invalid("orbit", format!("bad orbit-complex JSON: {e}")))?;
        if parsed.orbits.is_empty() || parsed.orbits[0].is_empty() {
            return Err(Error::invalid("orbit", "need at least one 0-orbit"));
        }
        let orbits: Vec<Vec<String>> = parsed
            .orbits
            .iter()
            .map(|dim| dim.iter().map(|o| o.stab.clone()).collect())
            .collect();
        let expected: usize = orbits.iter().skip(1).map(Vec::len).sum();
        if parsed.boundary.len() != expected {
            return Err(Error::invalid(
                "orbit",
                format!(
                    "boundary list has {} entries, expected {} (one per orbit of dimension >= 1)",
                    parsed.boundary.len(),
                    expected
                ),
            ));
        }
        let mut boundary = Vec::new();
        let mut it = parsed.boundary.into_iter();
        for p in 1..orbits.len() {
            let mut dim_entries = Vec::new();
            for _ in 0..orbits[p].len() {
                let entry = it.next().unwrap();
                for &(_, target) in &entry {
                    if target >= orbits[p - 1].len() {
                        return Err(Error::invalid(
                            "orbit",
                            format!(
                                "boundary target {target} out of range for dimension {}",
                                p - 1
                            ),
                        ));
                    }
                }
                dim_entries.push(entry);
            }
            boundary.push(dim_entries);
        }
        let oc = OrbitComplex { orbits, boundary };
        oc.verify()?;
        Ok(oc)
    }

    /// Top cell dimension of X.
    pub fn dim(&self) -> usize {
        self.orbits.len() - 1
    }

    pub fn num_orbits(&self, p: usize) -> usize {
        self.orbits.get(p).map(Vec::len).unwrap_or(0)
    }

    /// Deflated boundary matrix d_p (p >= 1), with duplicate targets
    /// accumulated.
    pub fn boundary_matrix(&self, p: usize) -> SparseInt {
        if p == 0 || p > self.dim() {
            let rows = if p == 0 { 0 } else { self.num_orbits(p - 1) };
            return SparseInt::new(rows, self.num_orbits(p));
        }
        let mut m = SparseInt::new(self.num_orbits(p - 1), self.num_orbits(p));
        for (j, entry) in self.boundary[p - 1].iter().enumerate() {
            for &(coef, target) in entry {
                let cur = m.get(target, j);
                m.set(target, j, cur + BigInt::from(coef));
            }
        }
        m
    }

    /// Deflated d d = 0.
    pub fn verify(&self) -> Result<()> {
        for p in 1..self.dim() {
            let prod = self.boundary_matrix(p).mul(&self.boundary_matrix(p + 1));
            if !prod.is_zero() {
                return Err(Error::Invariant {
                    module: "orbit",
                    detail: format!("deflated d_{} . d_{} != 0", p, p + 1),
                });
            }
        }
        Ok(())
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.orbits
            .iter()
            .enumerate()
            .map(|(p, o)| {
                let n = o.len() as i64;
                if p % 2 == 0 {
                    n
                } else {
                    -n
                }
            })
            .sum()
    }
}

/// Betti numbers over Q of the deflated complex: dH_p(G;Q) for contractible
/// cocompact proper X.
pub fn deflate_homology(oc: &OrbitComplex) -> Result<Vec<usize>> {
    oc.verify()?;
    let top = oc.dim();
    let mut rank_d = vec![0usize; top + 2];
    for p in 1..=top {
        let m = oc.boundary_matrix(p);
        if m.rows() > 0 && m.cols() > 0 {
            rank_d[p] = linalg::rank_q(&m.to_rat());
        }
    }
    Ok((0..=top)
        .map(|p| oc.num_orbits(p) - rank_d[p] - rank_d[p + 1])
        .collect())
}

/// (cd_Q upper bound from the resolution length, hd_Q-style lower witness
/// from the top nonvanishing deflated homology degree).
pub fn cd_report(oc: &OrbitComplex) -> Result<(usize, usize)> {
    let betti = deflate_homology(oc)?;
    let lower = betti
        .iter()
        .enumerate()
        .rev()
        .find(|(_, &b)| b > 0)
        .map(|(p, _)| p)
        .unwrap_or(0);
    Ok((oc.dim(), lower))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom(n: usize, k: usize) -> usize {
        if k > n {
            return 0;
        }
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    /// Z^m acting on the cubical complex of R^m: binom(m,p) orbits of
    /// p-cells, all deflated boundaries zero (opposite faces share an orbit
    /// with opposite signs).
    fn cubical(m: usize) -> OrbitComplex {
        let orbits = (0..=m)
            .map(|p| vec!["Zm".to_string(); binom(m, p)])
            .collect::<Vec<_>>();
        let boundary = (1..=m)
            .map(|p| vec![vec![]; binom(m, p)])
            .collect();
        OrbitComplex { orbits, boundary }
    }

    #[test]
    fn subdivided_tree() {
        // Vertex orbit + midpoint orbit, one half-edge orbit, d = (1, -1).
        let oc = OrbitComplex {
            orbits: vec![
                vec!["Kv".into(), "Km".into()],
                vec!["Ke".into()],
            ],
            boundary: vec![vec![vec![(1, 0), (-1, 1)]]],
        };
        let h = deflate_homology(&oc).unwrap();
        assert_eq!(h, vec![1, 0]);
        assert_eq!(cd_report(&oc).unwrap(), (1, 0));
    }

    #[test]
    fn cubical_torus_pattern() {
        for m in 1..=3 {
            let oc = cubical(m);
            let h = deflate_homology(&oc).unwrap();
            let expected: Vec<usize> = (0..=m).map(|p| binom(m, p)).collect();
            assert_eq!(h, expected);
            assert_eq!(cd_report(&oc).unwrap(), (m, m));
        }
    }

    #[test]
    fn compact_point() {
        let oc = OrbitComplex {
            orbits: vec![vec!["G".into()]],
            boundary: vec![],
        };
        assert_eq!(deflate_homology(&oc).unwrap(), vec![1]);
        assert_eq!(cd_report(&oc).unwrap(), (0, 0));
    }

    #[test]
    fn euler_consistency() {
        for m in 1..=3 {
            let oc = cubical(m);
            let h = deflate_homology(&oc).unwrap();
            let alt: i64 = h
                .iter()
                .enumerate()
                .map(|(p, &b)| if p % 2 == 0 { b as i64 } else { -(b as i64) })
                .sum();
            assert_eq!(alt, oc.euler_characteristic());
        }
    }

    #[test]
    fn dd_violation_rejected() {
        // d_1 = (1, -1)^T on one 1-orbit; d_2 hits it once: d d != 0.
        let oc = OrbitComplex {
            orbits: vec![
                vec!["U".into(), "V".into()],
                vec!["E".into()],
                vec!["F".into()],
            ],
            boundary: vec![vec![vec![(1, 0), (-1, 1)]], vec![vec![(1, 0)]]],
        };
        assert!(matches!(
            deflate_homology(&oc),
            Err(Error::Invariant { .. })
        ));
    }

    #[test]
    fn json_parse() {
        let text = r#"{
            "orbits": [[{"stab": "Kv"}, {"stab": "Km"}], [{"stab": "Ke"}]],
            "boundary": [[[1, 0], [-1, 1]]]
        }"#;
        let oc = OrbitComplex::from_json(text).unwrap();
        assert_eq!(oc.dim(), 1);
        assert_eq!(deflate_homology(&oc).unwrap(), vec![1, 0]);
        // Wrong boundary count.
        let bad = r#"{"orbits": [[{"stab": "A"}], [{"stab": "B"}]], "boundary": []}"#;
        assert!(OrbitComplex::from_json(bad).is_err());
        // Target out of range.
        let bad = r#"{"orbits": [[{"stab": "A"}], [{"stab": "B"}]], "boundary": [[[1, 7]]]}"#;
        assert!(OrbitComplex::from_json(bad).is_err());
    }
}
