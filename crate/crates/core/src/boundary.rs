//! Ghost-cell closures and the rigid-lid interface exchange.

use crate::error::{Error, Result};
use crate::numflux::{Axis, Padded, Vec4};
use crate::state::{checked_primitive, cons_from_prim, ConservedField, NVAR};

/// Closure applied on one side of a subdomain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundarySpec {
    Periodic,
    /// Wall moving tangentially at `wall_u` with fixed temperature `wall_t`.
    IsothermalWall { wall_u: f64, wall_t: f64 },
    /// No-slip wall (moving tangentially at `wall_u`) with zero heat flux.
    AdiabaticWall { wall_u: f64 },
    /// Rigid-lid interface; wall states come from an `InterfaceExchange`.
    Interface,
}

impl BoundarySpec {
    pub fn is_periodic(&self) -> bool {
        matches!(self, BoundarySpec::Periodic)
    }

    pub fn adiabatic_no_slip() -> Self {
        BoundarySpec::AdiabaticWall { wall_u: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySet {
    pub left: BoundarySpec,
    pub right: BoundarySpec,
    pub bottom: BoundarySpec,
    pub top: BoundarySpec,
}

impl BoundarySet {
    pub fn periodic() -> Self {
        Self {
            left: BoundarySpec::Periodic,
            right: BoundarySpec::Periodic,
            bottom: BoundarySpec::Periodic,
            top: BoundarySpec::Periodic,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.left.is_periodic() != self.right.is_periodic() {
            return Err(Error::Boundary("periodic closure must be applied to both x sides".into()));
        }
        if self.bottom.is_periodic() != self.top.is_periodic() {
            return Err(Error::Boundary("periodic closure must be applied to both z sides".into()));
        }
        if matches!(self.left, BoundarySpec::Interface) || matches!(self.right, BoundarySpec::Interface) {
            return Err(Error::Boundary("the interface must be horizontal (bottom or top side)".into()));
        }
        if matches!(self.bottom, BoundarySpec::Interface) && matches!(self.top, BoundarySpec::Interface) {
            return Err(Error::Boundary("at most one interface side per subdomain".into()));
        }
        for s in [self.left, self.right, self.bottom, self.top] {
            match s {
                BoundarySpec::IsothermalWall { wall_u, wall_t } => {
                    if !wall_u.is_finite() || !(wall_t > 0.0) {
                        return Err(Error::Boundary(format!(
                            "isothermal wall needs finite speed and positive temperature, got u={wall_u}, T={wall_t}"
                        )));
                    }
                }
                BoundarySpec::AdiabaticWall { wall_u } if !wall_u.is_finite() => {
                    return Err(Error::Boundary(format!("wall speed must be finite, got {wall_u}")));
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn periodic_x(&self) -> bool {
        self.left.is_periodic()
    }

    pub fn periodic_z(&self) -> bool {
        self.bottom.is_periodic()
    }

    pub fn has_interface(&self) -> bool {
        matches!(self.bottom, BoundarySpec::Interface) || matches!(self.top, BoundarySpec::Interface)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BulkCoefficients {
    pub b_u: f64,
    pub b_t: f64,
}

pub fn bulk_coefficients(mu1: f64, mu2: f64, kappa1: f64, kappa2: f64, dz1: f64, dz2: f64) -> Result<BulkCoefficients> {
    for (name, v) in [("mu1", mu1), ("mu2", mu2), ("kappa1", kappa1), ("kappa2", kappa2), ("dz1", dz1), ("dz2", dz2)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Parameter(format!("bulk coefficient input {name} must be positive, got {v}")));
        }
    }
    Ok(BulkCoefficients {
        b_u: 2.0 * mu1 * mu2 / (dz2 * mu1 + dz1 * mu2),
        b_t: 2.0 * kappa1 * kappa2 / (dz2 * kappa1 + dz1 * kappa2),
    })
}

/// Bulk momentum and heat fluxes (σ̂_xz, Π̂_z) from first-layer values.
pub fn interface_fluxes(u1: f64, t1: f64, u2: f64, t2: f64, coeffs: &BulkCoefficients) -> (f64, f64) {
    (coeffs.b_u * (u2 - u1), -coeffs.b_t * (t2 - t1))
}

/// Which side of the interface a subdomain sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Ω₁, whose top boundary is the interface.
    Lower,
    /// Ω₂, whose bottom boundary is the interface.
    Upper,
}

/// Wall velocity and temperature reproducing the bulk fluxes with a
/// one-sided difference over half a cell.
#[allow(clippy::too_many_arguments)]
pub fn interface_wall_states(u: f64, t: f64, sigma_xz: f64, pi_z: f64, dz: f64, mu: f64, kappa: f64, side: Side) -> (f64, f64) {
    match side {
        Side::Lower => (u + sigma_xz * dz / (2.0 * mu), t - pi_z * dz / (2.0 * kappa)),
        Side::Upper => (u - sigma_xz * dz / (2.0 * mu), t + pi_z * dz / (2.0 * kappa)),
    }
}

/// Interface data for every column, shared by both subdomains.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceExchange {
    pub coeffs: BulkCoefficients,
    pub sigma_xz: Vec<f64>,
    pub pi_z: Vec<f64>,
    pub wall_u_1: Vec<f64>,
    pub wall_t_1: Vec<f64>,
    pub wall_u_2: Vec<f64>,
    pub wall_t_2: Vec<f64>,
}

/// Wall states seen by one subdomain.
#[derive(Debug, Clone, Copy)]
pub struct InterfaceWall<'a> {
    pub u: &'a [f64],
    pub t: &'a [f64],
}

impl InterfaceExchange {
    /// Exchange from the first-layer cells of Ω₁ (top row) and Ω₂ (bottom row).
    pub fn compute(lower: &ConservedField, upper: &ConservedField) -> Result<Self> {
        if !lower.grid.conforms_in_x(&upper.grid) {
            return Err(Error::Mismatch("subdomain grids do not conform at the interface".into()));
        }
        let (p1, p2) = (lower.params, upper.params);
        let (dz1, dz2) = (lower.grid.dz, upper.grid.dz);
        let (mu1, mu2, k1, k2) = (p1.mu_tilde, p2.mu_tilde, p1.kappa(), p2.kappa());
        let coeffs = bulk_coefficients(mu1, mu2, k1, k2, dz1, dz2)?;
        let nx = lower.grid.nx;
        let top = lower.grid.nz - 1;
        let mut ex = Self {
            coeffs,
            sigma_xz: Vec::with_capacity(nx),
            pi_z: Vec::with_capacity(nx),
            wall_u_1: Vec::with_capacity(nx),
            wall_t_1: Vec::with_capacity(nx),
            wall_u_2: Vec::with_capacity(nx),
            wall_t_2: Vec::with_capacity(nx),
        };
        for i in 0..nx {
            let a = lower.cell(lower.grid.idx0(i, top));
            let b = upper.cell(upper.grid.idx0(i, 0));
            let (r1, u1, _, pr1) = checked_primitive(&a, p1.gamma)
                .map_err(|e| Error::CellState { i: i + 1, j: top + 1, reason: e.to_string() })?;
            let (r2, u2, _, pr2) = checked_primitive(&b, p2.gamma)
                .map_err(|e| Error::CellState { i: i + 1, j: 1, reason: e.to_string() })?;
            let t1 = p1.gamma * pr1 / r1;
            let t2 = p2.gamma * pr2 / r2;
            let (s, pi) = interface_fluxes(u1, t1, u2, t2, &coeffs);
            let (uw1, tw1) = interface_wall_states(u1, t1, s, pi, dz1, mu1, k1, Side::Lower);
            let (uw2, tw2) = interface_wall_states(u2, t2, s, pi, dz2, mu2, k2, Side::Upper);
            ex.sigma_xz.push(s);
            ex.pi_z.push(pi);
            ex.wall_u_1.push(uw1);
            ex.wall_t_1.push(tw1);
            ex.wall_u_2.push(uw2);
            ex.wall_t_2.push(tw2);
        }
        Ok(ex)
    }

    pub fn wall(&self, side: Side) -> InterfaceWall<'_> {
        match side {
            Side::Lower => InterfaceWall { u: &self.wall_u_1, t: &self.wall_t_1 },
            Side::Upper => InterfaceWall { u: &self.wall_u_2, t: &self.wall_t_2 },
        }
    }
}

/// Thermal condition of a wall ghost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WallThermal {
    Isothermal(f64),
    Adiabatic,
}

/// Mirror ghost of an interior state across a wall whose normal lies along
/// `axis`: tangential velocity reflected about the wall speed, normal
/// velocity negated, pressure copied, temperature mirrored about the wall
/// temperature (isothermal) or copied (adiabatic).
#[inline]
pub fn wall_ghost(q: &Vec4, axis: Axis, wall_u: f64, thermal: WallThermal, gamma: f64) -> Result<Vec4> {
    let (rho, u, w, p) = checked_primitive(q, gamma)?;
    let t = gamma * p / rho;
    let tg = match thermal {
        WallThermal::Isothermal(tw) => 2.0 * tw - t,
        WallThermal::Adiabatic => t,
    };
    if !(tg > 0.0) {
        return Err(Error::State(format!("mirrored ghost temperature {tg} is not positive")));
    }
    let (ug, wg) = match axis {
        Axis::X => (-u, 2.0 * wall_u - w),
        Axis::Z => (2.0 * wall_u - u, -w),
    };
    Ok(cons_from_prim(gamma * p / tg, ug, wg, p, gamma))
}

/// Ghost closure for one side, resolved for a given column/row.
#[derive(Debug, Clone, Copy)]
pub(crate) enum SideClosure {
    Periodic,
    Wall { wall_u: f64, thermal: WallThermal },
}

pub(crate) fn side_closure(spec: &BoundarySpec, k: usize, iface: Option<InterfaceWall<'_>>) -> Result<SideClosure> {
    Ok(match *spec {
        BoundarySpec::Periodic => SideClosure::Periodic,
        BoundarySpec::IsothermalWall { wall_u, wall_t } => SideClosure::Wall { wall_u, thermal: WallThermal::Isothermal(wall_t) },
        BoundarySpec::AdiabaticWall { wall_u } => SideClosure::Wall { wall_u, thermal: WallThermal::Adiabatic },
        BoundarySpec::Interface => {
            let w = iface.ok_or_else(|| Error::Boundary("interface side requires exchange data".into()))?;
            if k >= w.u.len() {
                return Err(Error::Mismatch(format!("interface data has {} columns, need column {}", w.u.len(), k + 1)));
            }
            SideClosure::Wall { wall_u: w.u[k], thermal: WallThermal::Isothermal(w.t[k]) }
        }
    })
}

/// Conserved field with ghost cells populated on all sides and corners.
///
/// Corner ghosts apply the x-direction closure to the z-ghost rows.
pub fn fill_ghosts(field: &ConservedField, specs: &BoundarySet, iface: Option<InterfaceWall<'_>>) -> Result<Padded> {
    specs.validate()?;
    if specs.has_interface() {
        match iface {
            None => return Err(Error::Boundary("interface side requires exchange data".into())),
            Some(w) if w.u.len() != field.grid.nx || w.t.len() != field.grid.nx => {
                return Err(Error::Mismatch(format!("interface data has {} columns, grid has {}", w.u.len(), field.grid.nx)))
            }
            _ => {}
        }
    }
    let g = &field.grid;
    let (nx, nz) = (g.nx as isize, g.nz as isize);
    let gamma = field.params.gamma;
    let mut p = Padded::new(g.nx, g.nz, NVAR);
    for j in 0..g.nz {
        for i in 0..g.nx {
            p.at_mut(i as isize, j as isize).copy_from_slice(&field.cell(g.idx0(i, j)));
        }
    }
    let cell_err = |i: isize, j: isize, e: Error| Error::CellState { i: (i + 1) as usize, j: (j + 1) as usize, reason: e.to_string() };

    // z ghosts for interior columns
    for i in 0..nx {
        let bottom = side_closure(&specs.bottom, i as usize, iface)?;
        let top = side_closure(&specs.top, i as usize, iface)?;
        let gb = match bottom {
            SideClosure::Periodic => p.get4(i, nz - 1),
            SideClosure::Wall { wall_u, thermal } => wall_ghost(&p.get4(i, 0), Axis::Z, wall_u, thermal, gamma).map_err(|e| cell_err(i, 0, e))?,
        };
        let gt = match top {
            SideClosure::Periodic => p.get4(i, 0),
            SideClosure::Wall { wall_u, thermal } => wall_ghost(&p.get4(i, nz - 1), Axis::Z, wall_u, thermal, gamma).map_err(|e| cell_err(i, nz - 1, e))?,
        };
        p.at_mut(i, -1).copy_from_slice(&gb);
        p.at_mut(i, nz).copy_from_slice(&gt);
    }
    // x ghosts for all rows including the z-ghost rows
    let left = side_closure(&specs.left, 0, None)?;
    let right = side_closure(&specs.right, 0, None)?;
    for j in -1..=nz {
        let gl = match left {
            SideClosure::Periodic => p.get4(nx - 1, j),
            SideClosure::Wall { wall_u, thermal } => wall_ghost(&p.get4(0, j), Axis::X, wall_u, thermal, gamma).map_err(|e| cell_err(0, j, e))?,
        };
        let gr = match right {
            SideClosure::Periodic => p.get4(0, j),
            SideClosure::Wall { wall_u, thermal } => wall_ghost(&p.get4(nx - 1, j), Axis::X, wall_u, thermal, gamma).map_err(|e| cell_err(nx - 1, j, e))?,
        };
        p.at_mut(-1, j).copy_from_slice(&gl);
        p.at_mut(nx, j).copy_from_slice(&gr);
    }
    Ok(p)
}
