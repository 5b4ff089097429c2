//! Assembly of `H = h·Δ + Σ_g ω_g P_g` restricted to a box.
//!
//! `Δ` is the nearest-neighbour adjacency operator (zero diagonal) with
//! hopping dropped across the box boundary. For matrix-valued families it
//! acts as `Δ ⊗ I_m` with the internal index running fastest.

use crate::band::SymBandMatrix;
use crate::disorder::DisorderSample;
use crate::error::{Error, Result};
use crate::lattice::{projection_blocks, LatticeBox, ModelSpec};

/// Hopping part and projection groups of a model on a fixed box.
///
/// Building the template once and calling [`assemble`](Self::assemble) per
/// realization avoids recomputing the geometry.
#[derive(Debug, Clone)]
pub struct HamiltonianTemplate {
    spec: ModelSpec,
    lattice: LatticeBox,
    blocks: Vec<Vec<usize>>,
    kinetic: SymBandMatrix,
}

impl HamiltonianTemplate {
    pub fn new(spec: &ModelSpec, lattice: &LatticeBox) -> Result<Self> {
        let blocks = projection_blocks(spec, lattice)?;
        let kinetic = kinetic_matrix(spec, lattice);
        Ok(HamiltonianTemplate {
            spec: spec.clone(),
            lattice: *lattice,
            blocks,
            kinetic,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn lattice(&self) -> &LatticeBox {
        &self.lattice
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn order(&self) -> usize {
        self.kinetic.order()
    }

    pub fn assemble_values(&self, omega: &[f64]) -> Result<SymBandMatrix> {
        if omega.len() != self.blocks.len() {
            return Err(Error::DimensionMismatch {
                expected: self.blocks.len(),
                actual: omega.len(),
            });
        }
        let mut h = self.kinetic.clone();
        for (group, &w) in self.blocks.iter().zip(omega) {
            for &i in group {
                h.add(i, i, w);
            }
        }
        Ok(h)
    }

    pub fn assemble(&self, omega: &DisorderSample) -> Result<SymBandMatrix> {
        self.assemble_values(&omega.values)
    }

    /// Matrix indices of the lattice sites in `sites`, internal index fastest.
    pub fn indices_of_sites(&self, sites: &[usize]) -> Vec<usize> {
        let m = self.spec.variant.internal_dim();
        sites.iter().flat_map(|&s| s * m..(s + 1) * m).collect()
    }
}

fn kinetic_matrix(spec: &ModelSpec, lattice: &LatticeBox) -> SymBandMatrix {
    let m = spec.variant.internal_dim();
    let n = spec.order(lattice);
    let side = lattice.side();
    if spec.hopping == 0.0 || side == 1 {
        return SymBandMatrix::zeros(n, 0);
    }
    let mut h = SymBandMatrix::zeros(n, m * lattice.stride(0));
    for site in 0..lattice.site_count() {
        let coords = lattice.coords(site);
        for (axis, &c) in coords.iter().enumerate() {
            if c + 1 < side {
                let neighbour = site + lattice.stride(axis);
                for a in 0..m {
                    h.set(neighbour * m + a, site * m + a, spec.hopping);
                }
            }
        }
    }
    h
}

/// Finite-volume Hamiltonian for one disorder draw.
pub fn build_hamiltonian(
    spec: &ModelSpec,
    lattice: &LatticeBox,
    omega: &DisorderSample,
) -> Result<SymBandMatrix> {
    HamiltonianTemplate::new(spec, lattice)?.assemble(omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::DisorderLaw;
    use crate::lattice::Variant;
    use crate::spectral::eigenvalues_dense;

    fn sample(values: Vec<f64>) -> DisorderSample {
        DisorderSample {
            values,
            seed: 0,
            realization: 0,
        }
    }

    fn spec(variant: Variant, dim: usize, h: f64) -> ModelSpec {
        ModelSpec::new(variant, dim, h, DisorderLaw::uniform(0.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn diagonal_model_without_hopping() {
        let s = spec(Variant::Diagonal { m: 2 }, 1, 0.0);
        let b = LatticeBox::with_side(1, 2).unwrap();
        let h = build_hamiltonian(&s, &b, &sample(vec![0.3, 0.7])).unwrap();
        assert_eq!(h.bandwidth(), 0);
        assert_eq!(h.diagonal(), vec![0.3, 0.3, 0.7, 0.7]);
    }

    #[test]
    fn pure_laplacian_in_one_dimension() {
        let s = spec(Variant::RankOneSite, 1, 1.0);
        let b = LatticeBox::cube(1, 1).unwrap();
        let h = build_hamiltonian(&s, &b, &sample(vec![0.0; 3])).unwrap();
        assert_eq!(h.diagonal(), vec![0.0; 3]);
        assert_eq!(h.get(0, 1), 1.0);
        assert_eq!(h.get(1, 2), 1.0);
        assert_eq!(h.get(0, 2), 0.0);
    }

    #[test]
    fn small_chain_matches_dense_oracle() {
        // [[1,1,0],[1,2,1],[0,1,3]]: characteristic polynomial
        // (1-x)(2-x)(3-x) - (1-x) - (3-x) has roots 2 and 2 ± √3.
        let s = spec(Variant::RankOneSite, 1, 1.0);
        let b = LatticeBox::cube(1, 1).unwrap();
        let h = build_hamiltonian(&s, &b, &sample(vec![1.0, 2.0, 3.0])).unwrap();
        let ev = eigenvalues_dense(&h).unwrap();
        let r3 = 3f64.sqrt();
        for (got, want) in ev.iter().zip([2.0 - r3, 2.0, 2.0 + r3]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn two_dimensional_bandwidth_and_neighbours() {
        let s = spec(Variant::RankOneSite, 2, 1.0);
        let b = LatticeBox::cube(2, 1).unwrap();
        let h = build_hamiltonian(&s, &b, &sample(vec![0.0; 9])).unwrap();
        assert_eq!(h.bandwidth(), 3);
        // site 4 is the centre and has four neighbours
        let degree: f64 = (0..9).map(|j| h.get(4, j)).sum();
        assert_eq!(degree, 4.0);
        // no wrap between rows
        assert_eq!(h.get(2, 3), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let s = spec(Variant::RankOneSite, 1, 1.0);
        let b = LatticeBox::cube(1, 1).unwrap();
        assert_eq!(
            build_hamiltonian(&s, &b, &sample(vec![0.0; 2])),
            Err(Error::DimensionMismatch {
                expected: 3,
                actual: 2
            })
        );
    }
}
