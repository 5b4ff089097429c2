//! Lattice boxes and the projection families that couple the disorder.

use serde::{Deserialize, Serialize};

use crate::disorder::DisorderLaw;
use crate::error::{Error, Result};

/// A cubic box in `Z^dim`, stored by side length.
///
/// Boxes built with [`LatticeBox::cube`] are the centered cubes
/// `{n : |n|_∞ ≤ L}` of side `2L + 1`. Block models whose block side does
/// not divide an odd side use [`LatticeBox::with_side`] instead.
///
/// Sites are enumerated row-major over coordinates `0..side`, the first
/// coordinate varying slowest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeBox {
    dim: usize,
    side: usize,
}

impl LatticeBox {
    pub fn cube(dim: usize, half_side: usize) -> Result<Self> {
        Self::with_side(dim, 2 * half_side + 1)
    }

    pub fn with_side(dim: usize, side: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidModel(format!("dimension {dim} not in 1..=3")));
        }
        if side == 0 {
            return Err(Error::InvalidModel("box side must be positive".into()));
        }
        Ok(LatticeBox { dim, side })
    }

    /// Smallest box with at least the side of `cube(dim, half_side)` whose
    /// side is a multiple of `block_side`.
    pub fn padded(dim: usize, half_side: usize, block_side: usize) -> Result<Self> {
        let side = 2 * half_side + 1;
        let block_side = block_side.max(1);
        Self::with_side(dim, side.div_ceil(block_side) * block_side)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// `L` for odd sides, `None` for padded even boxes.
    pub fn half_side(&self) -> Option<usize> {
        (self.side % 2 == 1).then_some(self.side / 2)
    }

    /// Label used in file names and tables: `L` for centered cubes, the side otherwise.
    pub fn label(&self) -> String {
        match self.half_side() {
            Some(l) => l.to_string(),
            None => format!("s{}", self.side),
        }
    }

    pub fn site_count(&self) -> usize {
        self.side.pow(self.dim as u32)
    }

    /// Stride of coordinate `axis` in the site enumeration.
    pub fn stride(&self, axis: usize) -> usize {
        self.side.pow((self.dim - 1 - axis) as u32)
    }

    pub fn site_index(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.dim);
        coords
            .iter()
            .enumerate()
            .map(|(axis, &c)| c * self.stride(axis))
            .sum()
    }

    pub fn coords(&self, mut site: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim];
        for axis in (0..self.dim).rev() {
            out[axis] = site % self.side;
            site /= self.side;
        }
        out
    }

    /// Lattice point of a site, centered so that odd boxes are `{|n|_∞ ≤ L}`.
    pub fn lattice_point(&self, site: usize) -> Vec<i64> {
        let offset = (self.side / 2) as i64;
        self.coords(site)
            .into_iter()
            .map(|c| c as i64 - offset)
            .collect()
    }

    /// Sites of the sub-cube with corner `origin` and side `sub_side`, in
    /// row-major order.
    pub fn subcube_sites(&self, origin: &[usize], sub_side: usize) -> Vec<usize> {
        let count = sub_side.pow(self.dim as u32);
        let mut out = Vec::with_capacity(count);
        let mut local = vec![0usize; self.dim];
        for _ in 0..count {
            let global: Vec<usize> = origin.iter().zip(&local).map(|(o, l)| o + l).collect();
            out.push(self.site_index(&global));
            for axis in (0..self.dim).rev() {
                local[axis] += 1;
                if local[axis] < sub_side {
                    break;
                }
                local[axis] = 0;
            }
        }
        out
    }

    /// Corners of the sub-cubes of side `sub_side` tiling this box.
    pub fn tiling_origins(&self, sub_side: usize) -> Result<Vec<Vec<usize>>> {
        if sub_side == 0 || !self.side.is_multiple_of(sub_side) {
            return Err(Error::Tiling {
                block: sub_side,
                side: self.side,
            });
        }
        let per_axis = self.side / sub_side;
        let tiles = LatticeBox {
            dim: self.dim,
            side: per_axis,
        };
        Ok((0..tiles.site_count())
            .map(|t| tiles.coords(t).into_iter().map(|c| c * sub_side).collect())
            .collect())
    }
}

/// Projection family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Variant {
    /// `P_i = |δ_i⟩⟨δ_i|`, the classical Anderson model.
    RankOneSite,
    /// `P_i` is the indicator of a cube of side `k`; rank `k^dim`.
    PolymerBlock { k: usize },
    /// `P_i = |δ_i⟩⟨δ_i| ⊗ I_m` on `ℓ²(Z^d) ⊗ C^m`, hopping `Δ ⊗ I_m`.
    MatrixValued { m: usize },
    /// One-dimensional pairs `{2i, 2i+1}`.
    Dimer,
    /// Same operator as `MatrixValued`; the family used with `h = 0`.
    Diagonal { m: usize },
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::RankOneSite => "rank-one-site",
            Variant::PolymerBlock { .. } => "polymer-block",
            Variant::MatrixValued { .. } => "matrix-valued",
            Variant::Dimer => "dimer",
            Variant::Diagonal { .. } => "diagonal",
        }
    }

    /// Internal dimension per lattice site.
    pub fn internal_dim(&self) -> usize {
        match *self {
            Variant::MatrixValued { m } | Variant::Diagonal { m } => m,
            _ => 1,
        }
    }

    /// Side of the lattice cube covered by one projection.
    pub fn block_side(&self) -> usize {
        match *self {
            Variant::PolymerBlock { k } => k,
            Variant::Dimer => 2,
            _ => 1,
        }
    }

    pub fn rank(&self, dim: usize) -> usize {
        match *self {
            Variant::RankOneSite => 1,
            Variant::PolymerBlock { k } => k.pow(dim as u32),
            Variant::MatrixValued { m } | Variant::Diagonal { m } => m,
            Variant::Dimer => 2,
        }
    }
}

/// Everything that determines the random operator family on a given box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub variant: Variant,
    pub rank: usize,
    pub hopping: f64,
    pub disorder: DisorderLaw,
}

impl ModelSpec {
    /// Builds a spec with the rank implied by `variant` in dimension `dim`.
    pub fn new(variant: Variant, dim: usize, hopping: f64, disorder: DisorderLaw) -> Result<Self> {
        let spec = ModelSpec {
            variant,
            rank: variant.rank(dim),
            hopping,
            disorder,
        };
        spec.validate(dim)?;
        Ok(spec)
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match self.variant {
            Variant::Dimer if dim != 1 => {
                return Err(Error::InvalidModel("dimer model is one-dimensional".into()))
            }
            Variant::PolymerBlock { k: 0 }
            | Variant::MatrixValued { m: 0 }
            | Variant::Diagonal { m: 0 } => {
                return Err(Error::InvalidModel("block size must be positive".into()))
            }
            _ => {}
        }
        let expected = self.variant.rank(dim);
        if self.rank != expected {
            return Err(Error::InvalidModel(format!(
                "{} in dimension {dim} has rank {expected}, not {}",
                self.variant.name(),
                self.rank
            )));
        }
        if !(self.hopping.is_finite() && self.hopping >= 0.0) {
            return Err(Error::InvalidModel(format!(
                "hopping must be finite and nonnegative, got {}",
                self.hopping
            )));
        }
        Ok(())
    }

    /// Matrix order of the finite-volume operator on `lattice`.
    pub fn order(&self, lattice: &LatticeBox) -> usize {
        lattice.site_count() * self.variant.internal_dim()
    }

    /// Number of disorder coordinates (projection blocks) on `lattice`.
    pub fn block_count(&self, lattice: &LatticeBox) -> usize {
        self.order(lattice) / self.rank
    }

    /// Checks that the box is compatible with the projection family.
    pub fn check_box(&self, lattice: &LatticeBox) -> Result<()> {
        self.validate(lattice.dim())?;
        let block = self.variant.block_side();
        if !lattice.side().is_multiple_of(block) {
            return Err(Error::Tiling {
                block,
                side: lattice.side(),
            });
        }
        Ok(())
    }
}

/// Disjoint groups of matrix-row indices, one per disorder coordinate.
///
/// Groups are ordered by their first index; each has exactly `spec.rank`
/// members and their union is `0..order`.
pub fn projection_blocks(spec: &ModelSpec, lattice: &LatticeBox) -> Result<Vec<Vec<usize>>> {
    spec.check_box(lattice)?;
    let groups = match spec.variant {
        Variant::RankOneSite => (0..lattice.site_count()).map(|s| vec![s]).collect(),
        Variant::MatrixValued { m } | Variant::Diagonal { m } => (0..lattice.site_count())
            .map(|s| (s * m..(s + 1) * m).collect())
            .collect(),
        Variant::Dimer | Variant::PolymerBlock { .. } => {
            let k = spec.variant.block_side();
            lattice
                .tiling_origins(k)?
                .iter()
                .map(|origin| lattice.subcube_sites(origin, k))
                .collect()
        }
    };
    Ok(groups)
}
