//! Uniform Cartesian mesh for one subdomain.
//!
//! Public cell indices are 1-based `(i, j)` with `i` along x and `j` along z.
//! Storage is row-major over `j` then `i`: cell `(i, j)` lives at
//! `(j - 1) * nx + (i - 1)`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuredGrid2D {
    pub nx: usize,
    pub nz: usize,
    pub x0: f64,
    pub z0: f64,
    pub dx: f64,
    pub dz: f64,
}

impl StructuredGrid2D {
    /// Builds a grid of `nx * nz` cells covering `x_extent x z_extent`.
    pub fn new(nx: usize, nz: usize, x_extent: (f64, f64), z_extent: (f64, f64)) -> Result<Self> {
        if nx == 0 || nz == 0 {
            return Err(Error::Grid(format!("cell counts must be positive (nx={nx}, nz={nz})")));
        }
        let (xa, xb) = x_extent;
        let (za, zb) = z_extent;
        if !(xb > xa) || !(zb > za) || !xa.is_finite() || !xb.is_finite() || !za.is_finite() || !zb.is_finite() {
            return Err(Error::Grid(format!(
                "empty or non-finite extent x=[{xa}, {xb}], z=[{za}, {zb}]"
            )));
        }
        Ok(Self {
            nx,
            nz,
            x0: xa,
            z0: za,
            dx: (xb - xa) / nx as f64,
            dz: (zb - za) / nz as f64,
        })
    }

    pub fn cell_count(&self) -> usize {
        self.nx * self.nz
    }

    pub fn cell_measure(&self) -> f64 {
        self.dx * self.dz
    }

    pub fn x_faces(&self) -> usize {
        (self.nx + 1) * self.nz
    }

    pub fn z_faces(&self) -> usize {
        self.nx * (self.nz + 1)
    }

    pub fn x_extent(&self) -> (f64, f64) {
        (self.x0, self.x0 + self.dx * self.nx as f64)
    }

    pub fn z_extent(&self) -> (f64, f64) {
        (self.z0, self.z0 + self.dz * self.nz as f64)
    }

    /// Center of cell `(i, j)`, 1-based.
    pub fn cell_center(&self, i: usize, j: usize) -> Result<(f64, f64)> {
        self.check(i, j)?;
        Ok(self.center0(i - 1, j - 1))
    }

    /// Flat storage index of cell `(i, j)`, 1-based.
    pub fn index(&self, i: usize, j: usize) -> Result<usize> {
        self.check(i, j)?;
        Ok((j - 1) * self.nx + (i - 1))
    }

    /// Center of the cell with 0-based indices.
    #[inline]
    pub fn center0(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.x0 + (i as f64 + 0.5) * self.dx,
            self.z0 + (j as f64 + 0.5) * self.dz,
        )
    }

    #[inline]
    pub fn idx0(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Same geometry at `factor` times the resolution in each direction.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.nx * factor, self.nz * factor, self.x_extent(), self.z_extent())
    }

    /// Two grids are conformal at a horizontal interface when they share
    /// the x-partition.
    pub fn conforms_in_x(&self, other: &Self) -> bool {
        let (a0, a1) = self.x_extent();
        let (b0, b1) = other.x_extent();
        let tol = 1e-12 * (a1 - a0).abs().max(1.0);
        self.nx == other.nx && (a0 - b0).abs() <= tol && (a1 - b1).abs() <= tol
    }

    fn check(&self, i: usize, j: usize) -> Result<()> {
        if i == 0 || j == 0 || i > self.nx || j > self.nz {
            return Err(Error::Index { i, j, nx: self.nx, nz: self.nz });
        }
        Ok(())
    }
}
