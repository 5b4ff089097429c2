//! Shared inputs for the benchmarks.

use levy_spectra::{
    sample_disorder, DisorderLaw, HamiltonianTemplate, LatticeBox, ModelSpec, SymBandMatrix,
    Variant,
};

/// Rank-one Anderson model on a box of half side `half_side` in `dim` dimensions.
pub fn anderson(dim: usize, half_side: usize) -> (ModelSpec, LatticeBox) {
    let spec = ModelSpec::new(
        Variant::RankOneSite,
        dim,
        1.0,
        DisorderLaw::uniform(0.0, 5.0).expect("valid bounds"),
    )
    .expect("valid model");
    let lattice = LatticeBox::cube(dim, half_side).expect("valid box");
    (spec, lattice)
}

/// One realization of the model.
pub fn realization(spec: &ModelSpec, lattice: &LatticeBox) -> SymBandMatrix {
    let template = HamiltonianTemplate::new(spec, lattice).expect("valid model");
    template
        .assemble(&sample_disorder(spec, lattice, 1, 0))
        .expect("matching draws")
}
