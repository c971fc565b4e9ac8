//! Semi-discrete finite-volume right-hand side of one subdomain.
//!
//! Each face flux is computed once and scattered with opposite signs to its
//! two neighbours in a fixed order, so conservation holds to roundoff and
//! results are bit-reproducible.

use crate::boundary::{fill_ghosts, BoundarySet, InterfaceWall};
use crate::error::{Error, Result};
use crate::grid::StructuredGrid2D;
use crate::numflux::{
    common_face_gradients, ls_gradients_unchecked, reconstruct_pair, roe_flux_raw, viscous_face_flux, Axis, CellGradients,
    GradientStencil, Padded, Vec4,
};
use crate::state::{ConservedField, FluidParams, NVAR};

/// Time derivative of every conserved variable, in field layout.
#[derive(Debug, Clone, PartialEq)]
pub struct RhsField {
    pub grid: StructuredGrid2D,
    pub data: Vec<f64>,
}

/// Which flux contributions to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Terms {
    pub inviscid_x: bool,
    pub inviscid_z: bool,
    pub viscous: bool,
}

impl Terms {
    pub const ALL: Terms = Terms { inviscid_x: true, inviscid_z: true, viscous: true };
    pub const INVISCID: Terms = Terms { inviscid_x: true, inviscid_z: true, viscous: false };
    pub const VISCOUS: Terms = Terms { inviscid_x: false, inviscid_z: false, viscous: true };
}

/// Assembles R(q) for one subdomain with the default gradient stencil.
pub fn assemble_rhs(field: &ConservedField, specs: &BoundarySet, iface: Option<InterfaceWall<'_>>) -> Result<RhsField> {
    assemble_rhs_with(field, specs, iface, GradientStencil::default(), Terms::ALL)
}

pub fn assemble_rhs_with(
    field: &ConservedField,
    specs: &BoundarySet,
    iface: Option<InterfaceWall<'_>>,
    stencil: GradientStencil,
    terms: Terms,
) -> Result<RhsField> {
    field.check_admissible()?;
    let ghosted = fill_ghosts(field, specs, iface)?;
    let data = assemble_from_ghosts(&ghosted, &field.grid, &field.params, specs, stencil, terms);
    if let Some(k) = data.iter().position(|v| !v.is_finite()) {
        let c = k / NVAR;
        return Err(Error::CellState {
            i: c % field.grid.nx + 1,
            j: c / field.grid.nx + 1,
            reason: "non-finite residual (inadmissible reconstructed face state)".into(),
        });
    }
    Ok(RhsField { grid: field.grid, data })
}

/// Σ ρ-rate · |K| over all cells, in storage order.
pub fn global_mass_rate(rhs: &RhsField, grid: &StructuredGrid2D) -> f64 {
    let mut s = 0.0;
    for k in 0..grid.cell_count() {
        s += rhs.data[k * NVAR];
    }
    s * grid.cell_measure()
}

/// Reflection of a face state across a wall with normal along `axis`.
#[inline]
pub(crate) fn reflect(q: &Vec4, axis: Axis) -> Vec4 {
    match axis {
        Axis::X => [q[0], -q[1], q[2], q[3]],
        Axis::Z => [q[0], q[1], -q[2], q[3]],
    }
}

/// Keeps only the normal-momentum component of a wall flux; the other
/// components vanish analytically for a reflected state.
#[inline]
pub(crate) fn wall_only(f: Vec4, axis: Axis) -> Vec4 {
    match axis {
        Axis::X => [0.0, f[1], 0.0, 0.0],
        Axis::Z => [0.0, 0.0, f[2], 0.0],
    }
}

/// Inviscid flux through a wall face with normal +axis, given the state
/// reconstructed on the interior side. `interior_is_left` is true when the
/// interior cell lies on the low side of the face.
#[inline]
pub(crate) fn wall_inviscid_flux(qf: &Vec4, axis: Axis, interior_is_left: bool, gamma: f64) -> Vec4 {
    let r = reflect(qf, axis);
    let n = axis.normal();
    let f = if interior_is_left { roe_flux_raw(qf, &r, n, gamma) } else { roe_flux_raw(&r, qf, n, gamma) };
    wall_only(f, axis)
}

#[inline]
fn scatter(rhs: &mut [f64], a: Option<usize>, b: Option<usize>, phi: &Vec4, inv_h: f64) {
    if let Some(a) = a {
        for v in 0..NVAR {
            rhs[a * NVAR + v] -= phi[v] * inv_h;
        }
    }
    if let Some(b) = b {
        for v in 0..NVAR {
            rhs[b * NVAR + v] += phi[v] * inv_h;
        }
    }
}

/// Primitive (u, w, T) on the ghosted layout.
pub(crate) fn velocity_temperature(q: &Padded, gamma: f64) -> Padded {
    let mut v = Padded::new(q.nx, q.nz, 3);
    for c in 0..(q.nx + 2) * (q.nz + 2) {
        let s = &q.data[c * NVAR..c * NVAR + NVAR];
        let rho = s[0];
        let u = s[1] / rho;
        let w = s[2] / rho;
        let p = (gamma - 1.0) * (s[3] - 0.5 * rho * (u * u + w * w));
        v.data[c * 3] = u;
        v.data[c * 3 + 1] = w;
        v.data[c * 3 + 2] = gamma * p / rho;
    }
    v
}

#[inline]
fn triple(s: &[f64]) -> [f64; 3] {
    [s[0], s[1], s[2]]
}

/// Row-wise compact difference of (u, w, T) along the axis tangent to a
/// face, at padded cell (i, j).
#[inline]
fn compact_tangent(v: &Padded, i: isize, j: isize, axis: Axis, h: f64) -> [f64; 3] {
    let (a, b) = match axis {
        Axis::X => (v.at(i, j + 1), v.at(i, j - 1)),
        Axis::Z => (v.at(i + 1, j), v.at(i - 1, j)),
    };
    [(a[0] - b[0]) / (2.0 * h), (a[1] - b[1]) / (2.0 * h), (a[2] - b[2]) / (2.0 * h)]
}

/// Viscous flux between padded cells `a` (low side) and `b` along `axis`.
/// Tangential gradients come from cell gradients where both cells are
/// interior (`tang`), else from compact row differences.
#[allow(clippy::too_many_arguments)]
#[inline]
fn viscous_between(
    v: &Padded,
    vg: &CellGradients,
    a: (isize, isize),
    b: (isize, isize),
    a_interior: bool,
    b_interior: bool,
    axis: Axis,
    h_normal: f64,
    h_tangent: f64,
    params: &FluidParams,
) -> Vec4 {
    let va = triple(v.at(a.0, a.1));
    let vb = triple(v.at(b.0, b.1));
    let (ta, tb) = if a_interior && b_interior {
        let pick = |c: (isize, isize)| match axis {
            Axis::X => triple(vg.dz(c.0 as usize, c.1 as usize)),
            Axis::Z => triple(vg.dx(c.0 as usize, c.1 as usize)),
        };
        (pick(a), pick(b))
    } else {
        (compact_tangent(v, a.0, a.1, axis, h_tangent), compact_tangent(v, b.0, b.1, axis, h_tangent))
    };
    let g = common_face_gradients(va, vb, ta, tb, h_normal, axis);
    viscous_face_flux(&g, params, axis.normal())
}

/// Core assembly from a ghosted conserved array.
pub(crate) fn assemble_from_ghosts(
    q: &Padded,
    grid: &StructuredGrid2D,
    params: &FluidParams,
    specs: &BoundarySet,
    stencil: GradientStencil,
    terms: Terms,
) -> Vec<f64> {
    let (nx, nz) = (grid.nx, grid.nz);
    let (dx, dz) = (grid.dx, grid.dz);
    let gamma = params.gamma;
    let mut rhs = vec![0.0; nx * nz * NVAR];
    let inviscid = terms.inviscid_x || terms.inviscid_z;
    let grads = if inviscid { Some(ls_gradients_unchecked(q, dx, dz, stencil)) } else { None };
    let viscous = terms.viscous && params.mu_tilde > 0.0;
    let (v, vg) = if viscous {
        let v = velocity_temperature(q, gamma);
        let vg = ls_gradients_unchecked(&v, dx, dz, stencil);
        (Some(v), Some(vg))
    } else {
        (None, None)
    };
    let px = specs.periodic_x();
    let pz = specs.periodic_z();
    let (inv_dx, inv_dz) = (1.0 / dx, 1.0 / dz);

    // x faces: face f lies between cells f-1 and f.
    for j in 0..nz {
        let jj = j as isize;
        for f in 0..=nx {
            let (a, b) = if px {
                if f == 0 {
                    continue;
                }
                (Some(f - 1), Some(f % nx))
            } else {
                (if f > 0 { Some(f - 1) } else { None }, if f < nx { Some(f) } else { None })
            };
            let mut phi = [0.0; NVAR];
            if terms.inviscid_x {
                let g = grads.as_ref().unwrap();
                let fi = match (a, b) {
                    (Some(a), Some(b)) => {
                        let (l, r) = reconstruct_pair(q.at(a as isize, jj), g.dx(a, j), q.at(b as isize, jj), g.dx(b, j), dx);
                        roe_flux_raw(&l, &r, [1.0, 0.0], gamma)
                    }
                    (Some(a), None) => {
                        let s = q.at(a as isize, jj);
                        let gx = g.dx(a, j);
                        let qf = [s[0] + 0.5 * dx * gx[0], s[1] + 0.5 * dx * gx[1], s[2] + 0.5 * dx * gx[2], s[3] + 0.5 * dx * gx[3]];
                        wall_inviscid_flux(&qf, Axis::X, true, gamma)
                    }
                    (None, Some(b)) => {
                        let s = q.at(b as isize, jj);
                        let gx = g.dx(b, j);
                        let qf = [s[0] - 0.5 * dx * gx[0], s[1] - 0.5 * dx * gx[1], s[2] - 0.5 * dx * gx[2], s[3] - 0.5 * dx * gx[3]];
                        wall_inviscid_flux(&qf, Axis::X, false, gamma)
                    }
                    (None, None) => unreachable!(),
                };
                phi = fi;
            }
            if viscous {
                let (v, vg) = (v.as_ref().unwrap(), vg.as_ref().unwrap());
                let ca = a.map(|a| a as isize).unwrap_or(-1);
                let cb = b.map(|b| b as isize).unwrap_or(nx as isize);
                let fv = viscous_between(v, vg, (ca, jj), (cb, jj), a.is_some(), b.is_some(), Axis::X, dx, dz, params);
                for k in 0..NVAR {
                    phi[k] -= fv[k];
                }
            }
            if terms.inviscid_x || viscous {
                scatter(&mut rhs, a.map(|a| j * nx + a), b.map(|b| j * nx + b), &phi, inv_dx);
            }
        }
    }

    // z faces: face f lies between rows f-1 and f.
    for f in 0..=nz {
        let (a, b) = if pz {
            if f == 0 {
                continue;
            }
            (Some(f - 1), Some(f % nz))
        } else {
            (if f > 0 { Some(f - 1) } else { None }, if f < nz { Some(f) } else { None })
        };
        for i in 0..nx {
            let ii = i as isize;
            let mut phi = [0.0; NVAR];
            if terms.inviscid_z {
                let g = grads.as_ref().unwrap();
                phi = match (a, b) {
                    (Some(a), Some(b)) => {
                        let (l, r) = reconstruct_pair(q.at(ii, a as isize), g.dz(i, a), q.at(ii, b as isize), g.dz(i, b), dz);
                        roe_flux_raw(&l, &r, [0.0, 1.0], gamma)
                    }
                    (Some(a), None) => {
                        let s = q.at(ii, a as isize);
                        let gz = g.dz(i, a);
                        let qf = [s[0] + 0.5 * dz * gz[0], s[1] + 0.5 * dz * gz[1], s[2] + 0.5 * dz * gz[2], s[3] + 0.5 * dz * gz[3]];
                        wall_inviscid_flux(&qf, Axis::Z, true, gamma)
                    }
                    (None, Some(b)) => {
                        let s = q.at(ii, b as isize);
                        let gz = g.dz(i, b);
                        let qf = [s[0] - 0.5 * dz * gz[0], s[1] - 0.5 * dz * gz[1], s[2] - 0.5 * dz * gz[2], s[3] - 0.5 * dz * gz[3]];
                        wall_inviscid_flux(&qf, Axis::Z, false, gamma)
                    }
                    (None, None) => unreachable!(),
                };
            }
            if viscous {
                let (v, vg) = (v.as_ref().unwrap(), vg.as_ref().unwrap());
                let ca = a.map(|a| a as isize).unwrap_or(-1);
                let cb = b.map(|b| b as isize).unwrap_or(nz as isize);
                let fv = viscous_between(v, vg, (ii, ca), (ii, cb), a.is_some(), b.is_some(), Axis::Z, dz, dx, params);
                for k in 0..NVAR {
                    phi[k] -= fv[k];
                }
            }
            if terms.inviscid_z || viscous {
                scatter(&mut rhs, a.map(|a| a * nx + i), b.map(|b| b * nx + i), &phi, inv_dz);
            }
        }
    }
    rhs
}
