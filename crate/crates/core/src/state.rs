//! Conserved and primitive states, the nondimensional ideal-gas law and
//! per-subdomain fields.

use crate::error::{Error, Result};
use crate::grid::StructuredGrid2D;

/// Number of conserved variables per cell.
pub const NVAR: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidParams {
    pub gamma: f64,
    pub pr: f64,
    pub mu_tilde: f64,
    pub cp_tilde: f64,
}

impl FluidParams {
    pub fn new(gamma: f64, pr: f64, mu_tilde: f64) -> Result<Self> {
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(Error::Parameter(format!("gamma must exceed 1, got {gamma}")));
        }
        if !(pr > 0.0) || !pr.is_finite() {
            return Err(Error::Parameter(format!("Prandtl number must be positive, got {pr}")));
        }
        if !(mu_tilde >= 0.0) || !mu_tilde.is_finite() {
            return Err(Error::Parameter(format!("viscosity must be nonnegative, got {mu_tilde}")));
        }
        Ok(Self { gamma, pr, mu_tilde, cp_tilde: 1.0 / (gamma - 1.0) })
    }

    /// Air-like defaults: gamma = 1.4, Pr = 0.72.
    pub fn air(mu_tilde: f64) -> Self {
        Self::new(1.4, 0.72, mu_tilde).expect("valid defaults")
    }

    /// Nondimensional heat conductivity.
    pub fn kappa(&self) -> f64 {
        self.cp_tilde * self.mu_tilde / self.pr
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConservedCell {
    pub rho: f64,
    pub rho_u: f64,
    pub rho_w: f64,
    pub rho_e: f64,
}

impl ConservedCell {
    pub fn new(rho: f64, rho_u: f64, rho_w: f64, rho_e: f64) -> Self {
        Self { rho, rho_u, rho_w, rho_e }
    }

    pub fn to_array(self) -> [f64; NVAR] {
        [self.rho, self.rho_u, self.rho_w, self.rho_e]
    }

    pub fn from_array(a: [f64; NVAR]) -> Self {
        Self { rho: a[0], rho_u: a[1], rho_w: a[2], rho_e: a[3] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PrimitiveCell {
    pub rho: f64,
    pub u: f64,
    pub w: f64,
    pub p: f64,
    pub t: f64,
}

impl PrimitiveCell {
    /// Builds a primitive state from (rho, u, w, p); T follows from the EOS.
    pub fn from_rho_u_w_p(rho: f64, u: f64, w: f64, p: f64, gamma: f64) -> Self {
        Self { rho, u, w, p, t: gamma * p / rho }
    }

    /// Builds a primitive state from (rho, u, w, T); p follows from the EOS.
    pub fn from_rho_u_w_t(rho: f64, u: f64, w: f64, t: f64, gamma: f64) -> Self {
        Self { rho, u, w, p: rho * t / gamma, t }
    }
}

/// Pressure from conserved variables (no admissibility check).
#[inline]
pub fn pressure(q: &[f64; NVAR], gamma: f64) -> f64 {
    (gamma - 1.0) * (q[3] - 0.5 * (q[1] * q[1] + q[2] * q[2]) / q[0])
}

/// Conserved vector to (rho, u, w, p), checking admissibility.
#[inline]
pub fn checked_primitive(q: &[f64; NVAR], gamma: f64) -> Result<(f64, f64, f64, f64)> {
    let rho = q[0];
    if !(rho > 0.0) {
        return Err(Error::State(format!("nonpositive density {rho}")));
    }
    let u = q[1] / rho;
    let w = q[2] / rho;
    let p = (gamma - 1.0) * (q[3] - 0.5 * rho * (u * u + w * w));
    if !(p > 0.0) {
        return Err(Error::State(format!("nonpositive pressure {p}")));
    }
    Ok((rho, u, w, p))
}

pub fn primitive_from_conserved(c: ConservedCell, params: &FluidParams) -> Result<PrimitiveCell> {
    let (rho, u, w, p) = checked_primitive(&c.to_array(), params.gamma)?;
    Ok(PrimitiveCell { rho, u, w, p, t: params.gamma * p / rho })
}

pub fn conserved_from_primitive(w: PrimitiveCell, params: &FluidParams) -> Result<ConservedCell> {
    if !(w.rho > 0.0) {
        return Err(Error::State(format!("nonpositive density {}", w.rho)));
    }
    if !(w.p > 0.0) {
        return Err(Error::State(format!("nonpositive pressure {}", w.p)));
    }
    Ok(ConservedCell::from_array(cons_from_prim(w.rho, w.u, w.w, w.p, params.gamma)))
}

#[inline]
pub fn cons_from_prim(rho: f64, u: f64, w: f64, p: f64, gamma: f64) -> [f64; NVAR] {
    [rho, rho * u, rho * w, p / (gamma - 1.0) + 0.5 * rho * (u * u + w * w)]
}

pub fn sound_speed(rho: f64, p: f64, gamma: f64) -> Result<f64> {
    if !(rho > 0.0) || !(p > 0.0) || !(gamma > 0.0) {
        return Err(Error::State(format!("sound speed undefined for rho={rho}, p={p}, gamma={gamma}")));
    }
    Ok((gamma * p / rho).sqrt())
}

/// Conserved state of one subdomain, stored as a flat vector with
/// `NVAR` entries per cell in grid storage order.
#[derive(Debug, Clone, PartialEq)]
pub struct ConservedField {
    pub grid: StructuredGrid2D,
    pub params: FluidParams,
    pub data: Vec<f64>,
}

impl ConservedField {
    pub fn uniform(grid: StructuredGrid2D, params: FluidParams, cell: ConservedCell) -> Self {
        let mut data = Vec::with_capacity(grid.cell_count() * NVAR);
        for _ in 0..grid.cell_count() {
            data.extend_from_slice(&cell.to_array());
        }
        Self { grid, params, data }
    }

    pub fn from_data(grid: StructuredGrid2D, params: FluidParams, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.cell_count() * NVAR {
            return Err(Error::Mismatch(format!(
                "field data has {} entries, grid needs {}",
                data.len(),
                grid.cell_count() * NVAR
            )));
        }
        Ok(Self { grid, params, data })
    }

    /// Fills each cell from a primitive-state function of the cell center.
    pub fn from_primitive_fn<F>(grid: StructuredGrid2D, params: FluidParams, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> PrimitiveCell,
    {
        let mut data = Vec::with_capacity(grid.cell_count() * NVAR);
        for j in 0..grid.nz {
            for i in 0..grid.nx {
                let (x, z) = grid.center0(i, j);
                let c = conserved_from_primitive(f(x, z), &params)?;
                data.extend_from_slice(&c.to_array());
            }
        }
        Ok(Self { grid, params, data })
    }

    /// Cell `(i, j)`, 1-based.
    pub fn get(&self, i: usize, j: usize) -> Result<ConservedCell> {
        let k = self.grid.index(i, j)?;
        Ok(ConservedCell::from_array(self.cell(k)))
    }

    pub fn set(&mut self, i: usize, j: usize, c: ConservedCell) -> Result<()> {
        let k = self.grid.index(i, j)?;
        self.data[k * NVAR..(k + 1) * NVAR].copy_from_slice(&c.to_array());
        Ok(())
    }

    #[inline]
    pub fn cell(&self, k: usize) -> [f64; NVAR] {
        let s = &self.data[k * NVAR..(k + 1) * NVAR];
        [s[0], s[1], s[2], s[3]]
    }

    pub fn primitive(&self, i: usize, j: usize) -> Result<PrimitiveCell> {
        primitive_from_conserved(self.get(i, j)?, &self.params)
    }

    /// Checks every cell for positive density and pressure.
    pub fn check_admissible(&self) -> Result<()> {
        for k in 0..self.grid.cell_count() {
            if let Err(e) = checked_primitive(&self.cell(k), self.params.gamma) {
                let (i, j) = (k % self.grid.nx + 1, k / self.grid.nx + 1);
                return Err(Error::CellState { i, j, reason: e.to_string() });
            }
        }
        Ok(())
    }

    pub fn with_data(&self, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), self.data.len());
        Self { grid: self.grid, params: self.params, data }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const G: f64 = 1.4;

    #[test]
    fn rest_state() {
        let p = FluidParams::air(0.0);
        let c = ConservedCell::new(1.0, 0.0, 0.0, (1.0 / G) / (G - 1.0));
        let w = primitive_from_conserved(c, &p).unwrap();
        assert_eq!(w.u, 0.0);
        assert_eq!(w.w, 0.0);
        assert!((w.p - 1.0 / G).abs() < 1e-15);
        assert!((w.t - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kinetic_energy_bookkeeping() {
        let p = FluidParams::air(0.0);
        let c = ConservedCell::new(1.0, 0.1, 0.0, 1.0 / (G * 0.4) + 0.005);
        let w = primitive_from_conserved(c, &p).unwrap();
        assert!((w.u - 0.1).abs() < 1e-15);
        assert!((w.p - 1.0 / G).abs() < 1e-14);
        assert!((w.t - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_states() {
        let p = FluidParams::air(0.0);
        assert!(primitive_from_conserved(ConservedCell::new(-1.0, 0.0, 0.0, 1.0), &p).is_err());
        assert!(primitive_from_conserved(ConservedCell::new(1.0, 2.0, 0.0, 1.0), &p).is_err());
        let w = PrimitiveCell { rho: 1.0, u: 0.0, w: 0.0, p: 0.0, t: 0.0 };
        assert!(conserved_from_primitive(w, &p).is_err());
    }

    #[test]
    fn inverse_rest_state() {
        let p = FluidParams::air(0.0);
        let w = PrimitiveCell::from_rho_u_w_p(1.0, 0.0, 0.0, 1.0 / G, G);
        let c = conserved_from_primitive(w, &p).unwrap();
        assert_eq!(c.rho, 1.0);
        assert_eq!(c.rho_u, 0.0);
        assert_eq!(c.rho_w, 0.0);
        assert!((c.rho_e - 1.0 / (G * 0.4)).abs() < 1e-15);
    }

    #[test]
    fn sound_speed_examples() {
        assert!((sound_speed(1.0, 1.0 / G, G).unwrap() - 1.0).abs() < 1e-15);
        assert!((sound_speed(1.0, 1.1 / G, G).unwrap() - 1.1f64.sqrt()).abs() < 1e-15);
        assert!(sound_speed(0.0, 1.0, G).is_err());
        assert!(sound_speed(1.0, -1.0, G).is_err());
    }

    #[test]
    fn kappa_from_prandtl() {
        let p = FluidParams::new(1.4, 0.72, 1.0).unwrap();
        assert!((p.kappa() - 2.5 / 0.72).abs() < 1e-14);
        assert!(FluidParams::new(1.0, 0.72, 0.0).is_err());
        assert!(FluidParams::new(1.4, 0.0, 0.0).is_err());
        assert!(FluidParams::new(1.4, 0.72, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(rho in 0.1f64..10.0, u in -2.0f64..2.0, w in -2.0f64..2.0, pr in 0.1f64..10.0) {
            let p = FluidParams::air(0.0);
            let prim = PrimitiveCell::from_rho_u_w_p(rho, u, w, pr, G);
            let c = conserved_from_primitive(prim, &p).unwrap();
            let back = primitive_from_conserved(c, &p).unwrap();
            prop_assert!((back.rho - rho).abs() <= 1e-14 * rho);
            prop_assert!((back.u - u).abs() <= 1e-14 * u.abs().max(1.0));
            prop_assert!((back.w - w).abs() <= 1e-14 * w.abs().max(1.0));
            prop_assert!((back.p - pr).abs() <= 1e-13 * pr.max(1.0));
            // EOS identity
            prop_assert!((back.p - back.rho * back.t / G).abs() <= 1e-14 * back.p);
        }

        #[test]
        fn enthalpy_forms_agree(rho in 0.1f64..10.0, u in -2.0f64..2.0, w in -2.0f64..2.0, pr in 0.1f64..10.0) {
            let q = cons_from_prim(rho, u, w, pr, G);
            let a2 = G * pr / rho;
            let h1 = a2 / (G - 1.0) + 0.5 * (u * u + w * w);
            let h2 = q[3] / rho + pr / rho;
            prop_assert!((h1 - h2).abs() <= 1e-13 * h1.abs());
        }
    }
}
