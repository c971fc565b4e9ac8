//! Matrix-free linearised flux operators L, Lᴵ and Lᶻ about a reference
//! state, and the Krylov solve of the implicit stage systems.
//!
//! Reference face states come from the residual's own reconstruction.
//! Perturbations are reconstructed with compact, direction-local slopes, so
//! that Lᶻ couples only the cells of a column. The smooth centred part of
//! each face flux is differentiated analytically; the Roe dissipation is
//! differentiated by a one-sided difference with step ε/‖δ‖∞ (ε = 1e-8).

use rayon::prelude::*;

use crate::boundary::{fill_ghosts, side_closure, wall_ghost, BoundarySet, BoundarySpec, InterfaceWall, SideClosure, WallThermal};
use crate::error::{Error, Result};
use crate::grid::StructuredGrid2D;
use crate::krylov::{gmres, GmresParams, SolveStats};
use crate::numflux::{flux_jacobian, ls_gradients_unchecked, mat_vec, reconstruct_pair, roe_dissipation, Axis, GradientStencil, Mat4, Vec4};
use crate::residual::{assemble_from_ghosts, reflect, wall_only, Terms};
use crate::state::{ConservedField, FluidParams, NVAR};

/// Finite-difference scale for the dissipation linearisation.
pub const FD_EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LinearOperatorKind {
    /// Inviscid and viscous fluxes in both directions.
    Full,
    /// Inviscid fluxes in both directions.
    Inviscid,
    /// Inviscid flux through horizontal faces only (column-local).
    #[default]
    Vertical,
}

impl LinearOperatorKind {
    pub fn label(self) -> &'static str {
        match self {
            LinearOperatorKind::Full => "L",
            LinearOperatorKind::Inviscid => "LI",
            LinearOperatorKind::Vertical => "Lz",
        }
    }
}

impl std::str::FromStr for LinearOperatorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l" | "full" => Ok(Self::Full),
            "li" | "inviscid" => Ok(Self::Inviscid),
            "lz" | "vertical" | "hevi" => Ok(Self::Vertical),
            _ => Err(Error::Parameter(format!("unknown linear operator '{s}' (expected L, LI or Lz)"))),
        }
    }
}

/// Reference data of one face.
#[derive(Debug, Clone, Copy)]
struct FaceRef {
    ql: Vec4,
    qr: Vec4,
    al: Mat4,
    ar: Mat4,
    d0: Vec4,
    /// Wall face; `Some(true)` when the interior cell is on the low side.
    wall: Option<bool>,
}

impl FaceRef {
    fn new(ql: Vec4, qr: Vec4, n: [f64; 2], gamma: f64, wall: Option<bool>) -> Self {
        Self {
            ql,
            qr,
            al: flux_jacobian(&ql, n, gamma),
            ar: flux_jacobian(&qr, n, gamma),
            d0: roe_dissipation(&ql, &qr, n, gamma),
            wall,
        }
    }

    /// Linearised flux for perturbation face states.
    #[inline]
    fn apply(&self, dl: &Vec4, dr: &Vec4, axis: Axis, gamma: f64) -> Vec4 {
        let n = axis.normal();
        let (dl, dr) = match self.wall {
            Some(true) => (*dl, reflect(dl, axis)),
            Some(false) => (reflect(dr, axis), *dr),
            None => (*dl, *dr),
        };
        let fl = mat_vec(&self.al, &dl);
        let fr = mat_vec(&self.ar, &dr);
        let scale = dl.iter().chain(dr.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
        let mut out = [0.0; NVAR];
        if scale > 0.0 {
            let h = FD_EPSILON / scale;
            let mut pl = self.ql;
            let mut pr = self.qr;
            for v in 0..NVAR {
                pl[v] += h * dl[v];
                pr[v] += h * dr[v];
            }
            let d1 = roe_dissipation(&pl, &pr, n, gamma);
            for v in 0..NVAR {
                out[v] = 0.5 * (fl[v] + fr[v]) - (d1[v] - self.d0[v]) / h;
            }
        } else {
            for v in 0..NVAR {
                out[v] = 0.5 * (fl[v] + fr[v]);
            }
        }
        match self.wall {
            Some(_) => wall_only(out, axis),
            None => out,
        }
    }
}

/// Ghost perturbation rule on one side.
#[derive(Debug, Clone)]
enum GhostLin {
    Periodic,
    /// Per boundary cell Jacobian of the mirror map.
    Wall(Vec<Mat4>),
}

/// Linearisation of R about a frozen reference state.
#[derive(Debug, Clone)]
pub struct LinearOperator {
    pub kind: LinearOperatorKind,
    pub grid: StructuredGrid2D,
    pub params: FluidParams,
    specs: BoundarySet,
    stencil: GradientStencil,
    xfaces: Vec<FaceRef>,
    zfaces: Vec<FaceRef>,
    left: GhostLin,
    right: GhostLin,
    bottom: GhostLin,
    top: GhostLin,
    reference: Vec<f64>,
    iface_u: Option<Vec<f64>>,
    iface_t: Option<Vec<f64>>,
    viscous_ref: Option<Vec<f64>>,
}

fn ghost_jacobian(q: &Vec4, axis: Axis, wall_u: f64, thermal: WallThermal, gamma: f64) -> Result<Mat4> {
    let mut m = [[0.0; NVAR]; NVAR];
    for c in 0..NVAR {
        let h = 1e-6 * q[c].abs().max(1.0);
        let mut qp = *q;
        let mut qm = *q;
        qp[c] += h;
        qm[c] -= h;
        let gp = wall_ghost(&qp, axis, wall_u, thermal, gamma)?;
        let gm = wall_ghost(&qm, axis, wall_u, thermal, gamma)?;
        for r in 0..NVAR {
            m[r][c] = (gp[r] - gm[r]) / (2.0 * h);
        }
    }
    Ok(m)
}

impl LinearOperator {
    /// Builds the operator about `reference`, with interface wall states
    /// (if any) frozen at `iface`.
    pub fn new(
        kind: LinearOperatorKind,
        reference: &ConservedField,
        specs: &BoundarySet,
        iface: Option<InterfaceWall<'_>>,
        stencil: GradientStencil,
    ) -> Result<Self> {
        reference.check_admissible()?;
        let g = reference.grid;
        let (nx, nz) = (g.nx, g.nz);
        let gamma = reference.params.gamma;
        let q = fill_ghosts(reference, specs, iface)?;
        let grads = ls_gradients_unchecked(&q, g.dx, g.dz, stencil);
        let px = specs.periodic_x();
        let pz = specs.periodic_z();

        let mut xfaces = Vec::new();
        if kind != LinearOperatorKind::Vertical {
            xfaces.reserve(nz * (nx + 1));
            for j in 0..nz {
                let jj = j as isize;
                for f in 0..=nx {
                    let fr = if px {
                        let (a, b) = (if f == 0 { nx - 1 } else { f - 1 }, f % nx);
                        let (l, r) = reconstruct_pair(q.at(a as isize, jj), grads.dx(a, j), q.at(b as isize, jj), grads.dx(b, j), g.dx);
                        FaceRef::new(l, r, [1.0, 0.0], gamma, None)
                    } else if f == 0 {
                        let s = q.at(0, jj);
                        let gx = grads.dx(0, j);
                        let qf = std::array::from_fn(|v| s[v] - 0.5 * g.dx * gx[v]);
                        FaceRef::new(reflect(&qf, Axis::X), qf, [1.0, 0.0], gamma, Some(false))
                    } else if f == nx {
                        let s = q.at(nx as isize - 1, jj);
                        let gx = grads.dx(nx - 1, j);
                        let qf = std::array::from_fn(|v| s[v] + 0.5 * g.dx * gx[v]);
                        FaceRef::new(qf, reflect(&qf, Axis::X), [1.0, 0.0], gamma, Some(true))
                    } else {
                        let (a, b) = (f - 1, f);
                        let (l, r) = reconstruct_pair(q.at(a as isize, jj), grads.dx(a, j), q.at(b as isize, jj), grads.dx(b, j), g.dx);
                        FaceRef::new(l, r, [1.0, 0.0], gamma, None)
                    };
                    xfaces.push(fr);
                }
            }
        }
        let mut zfaces = Vec::with_capacity(nx * (nz + 1));
        for f in 0..=nz {
            for i in 0..nx {
                let ii = i as isize;
                let fr = if pz {
                    let (a, b) = (if f == 0 { nz - 1 } else { f - 1 }, f % nz);
                    let (l, r) = reconstruct_pair(q.at(ii, a as isize), grads.dz(i, a), q.at(ii, b as isize), grads.dz(i, b), g.dz);
                    FaceRef::new(l, r, [0.0, 1.0], gamma, None)
                } else if f == 0 {
                    let s = q.at(ii, 0);
                    let gz = grads.dz(i, 0);
                    let qf = std::array::from_fn(|v| s[v] - 0.5 * g.dz * gz[v]);
                    FaceRef::new(reflect(&qf, Axis::Z), qf, [0.0, 1.0], gamma, Some(false))
                } else if f == nz {
                    let s = q.at(ii, nz as isize - 1);
                    let gz = grads.dz(i, nz - 1);
                    let qf = std::array::from_fn(|v| s[v] + 0.5 * g.dz * gz[v]);
                    FaceRef::new(qf, reflect(&qf, Axis::Z), [0.0, 1.0], gamma, Some(true))
                } else {
                    let (a, b) = (f - 1, f);
                    let (l, r) = reconstruct_pair(q.at(ii, a as isize), grads.dz(i, a), q.at(ii, b as isize), grads.dz(i, b), g.dz);
                    FaceRef::new(l, r, [0.0, 1.0], gamma, None)
                };
                zfaces.push(fr);
            }
        }

        let lin = |spec: &BoundarySpec, cells: &mut dyn Iterator<Item = (usize, Vec4)>, axis: Axis| -> Result<GhostLin> {
            if spec.is_periodic() {
                return Ok(GhostLin::Periodic);
            }
            let mut ms = Vec::new();
            for (k, qc) in cells {
                match side_closure(spec, k, iface)? {
                    SideClosure::Wall { wall_u, thermal } => ms.push(ghost_jacobian(&qc, axis, wall_u, thermal, gamma)?),
                    SideClosure::Periodic => unreachable!(),
                }
            }
            Ok(GhostLin::Wall(ms))
        };
        let cell = |i: usize, j: usize| reference.cell(g.idx0(i, j));
        let left = lin(&specs.left, &mut (0..nz).map(|j| (j, cell(0, j))), Axis::X)?;
        let right = lin(&specs.right, &mut (0..nz).map(|j| (j, cell(nx - 1, j))), Axis::X)?;
        let bottom = lin(&specs.bottom, &mut (0..nx).map(|i| (i, cell(i, 0))), Axis::Z)?;
        let top = lin(&specs.top, &mut (0..nx).map(|i| (i, cell(i, nz - 1))), Axis::Z)?;

        let (iface_u, iface_t) = match iface {
            Some(w) => (Some(w.u.to_vec()), Some(w.t.to_vec())),
            None => (None, None),
        };
        let mut op = Self {
            kind,
            grid: g,
            params: reference.params,
            specs: *specs,
            stencil,
            xfaces,
            zfaces,
            left,
            right,
            bottom,
            top,
            reference: reference.data.clone(),
            iface_u,
            iface_t,
            viscous_ref: None,
        };
        if kind == LinearOperatorKind::Full && reference.params.mu_tilde > 0.0 {
            op.viscous_ref = Some(op.viscous_residual(&reference.data)?);
        }
        Ok(op)
    }

    fn iface(&self) -> Option<InterfaceWall<'_>> {
        match (&self.iface_u, &self.iface_t) {
            (Some(u), Some(t)) => Some(InterfaceWall { u, t }),
            _ => None,
        }
    }

    fn viscous_residual(&self, data: &[f64]) -> Result<Vec<f64>> {
        let f = ConservedField { grid: self.grid, params: self.params, data: data.to_vec() };
        let p = fill_ghosts(&f, &self.specs, self.iface())?;
        Ok(assemble_from_ghosts(&p, &self.grid, &self.params, &self.specs, self.stencil, Terms::VISCOUS))
    }

    #[inline]
    fn ghost(rule: &GhostLin, k: usize, inner: &Vec4, wrap: &Vec4) -> Vec4 {
        match rule {
            GhostLin::Periodic => *wrap,
            GhostLin::Wall(ms) => mat_vec(&ms[k], inner),
        }
    }

    /// Adds the z-face contributions of column `i` for the column
    /// perturbation `x` (length 4·nz) into `out`.
    fn apply_column_into(&self, i: usize, x: &[f64], out: &mut [f64]) {
        let nz = self.grid.nz;
        let nx = self.grid.nx;
        let gamma = self.params.gamma;
        let at = |j: usize| -> Vec4 { [x[j * NVAR], x[j * NVAR + 1], x[j * NVAR + 2], x[j * NVAR + 3]] };
        // padded column: index j+1 for j in -1..=nz
        let mut col = vec![[0.0; NVAR]; nz + 2];
        for j in 0..nz {
            col[j + 1] = at(j);
        }
        col[0] = Self::ghost(&self.bottom, i, &col[1], &col[nz]);
        col[nz + 1] = Self::ghost(&self.top, i, &col[nz], &col[1]);
        let wrapped = |j: isize| -> Vec4 {
            // periodic neighbours beyond the ghost layer
            let n = nz as isize;
            col[(((j % n) + n) % n) as usize + 1]
        };
        let pz = self.specs.periodic_z();
        let get = |j: isize| -> Vec4 {
            if j >= -1 && j <= nz as isize {
                col[(j + 1) as usize]
            } else {
                wrapped(j)
            }
        };
        let inv = 1.0 / self.grid.dz;
        for f in 0..=nz {
            let fr = &self.zfaces[f * nx + i];
            let (a, b): (isize, isize) = if pz {
                if f == 0 {
                    continue;
                }
                (f as isize - 1, f as isize)
            } else {
                (f as isize - 1, f as isize)
            };
            let (dl, dr) = match fr.wall {
                Some(true) => {
                    let (c, m, p) = (get(a), get(a - 1), get(a + 1));
                    (std::array::from_fn(|v| c[v] + 0.25 * (p[v] - m[v])), [0.0; NVAR])
                }
                Some(false) => {
                    let (c, m, p) = (get(b), get(b - 1), get(b + 1));
                    ([0.0; NVAR], std::array::from_fn(|v| c[v] - 0.25 * (p[v] - m[v])))
                }
                None => {
                    let (ca, ma, pa) = (get(a), get(a - 1), get(a + 1));
                    let (cb, mb, pb) = (get(b), get(b - 1), get(b + 1));
                    (
                        std::array::from_fn(|v| ca[v] + 0.25 * (pa[v] - ma[v])),
                        std::array::from_fn(|v| cb[v] - 0.25 * (pb[v] - mb[v])),
                    )
                }
            };
            let phi = fr.apply(&dl, &dr, Axis::Z, gamma);
            let ia = if pz { Some(((a + nz as isize) % nz as isize) as usize) } else if a >= 0 { Some(a as usize) } else { None };
            let ib = if pz { Some((b as usize) % nz) } else if (b as usize) < nz { Some(b as usize) } else { None };
            if let Some(a) = ia {
                for v in 0..NVAR {
                    out[a * NVAR + v] -= phi[v] * inv;
                }
            }
            if let Some(b) = ib {
                for v in 0..NVAR {
                    out[b * NVAR + v] += phi[v] * inv;
                }
            }
        }
    }

    fn apply_x_into(&self, x: &[f64], out: &mut [f64]) {
        let (nx, nz) = (self.grid.nx, self.grid.nz);
        let gamma = self.params.gamma;
        let px = self.specs.periodic_x();
        let inv = 1.0 / self.grid.dx;
        let mut row = vec![[0.0; NVAR]; nx + 2];
        for j in 0..nz {
            for i in 0..nx {
                let k = (j * nx + i) * NVAR;
                row[i + 1] = [x[k], x[k + 1], x[k + 2], x[k + 3]];
            }
            row[0] = Self::ghost(&self.left, j, &row[1], &row[nx]);
            row[nx + 1] = Self::ghost(&self.right, j, &row[nx], &row[1]);
            let get = |i: isize| -> Vec4 {
                let n = nx as isize;
                if i >= -1 && i <= n {
                    row[(i + 1) as usize]
                } else {
                    row[(((i % n) + n) % n) as usize + 1]
                }
            };
            for f in 0..=nx {
                if px && f == 0 {
                    continue;
                }
                let fr = &self.xfaces[j * (nx + 1) + f];
                let (a, b) = (f as isize - 1, f as isize);
                let (dl, dr) = match fr.wall {
                    Some(true) => {
                        let (c, m, p) = (get(a), get(a - 1), get(a + 1));
                        (std::array::from_fn(|v| c[v] + 0.25 * (p[v] - m[v])), [0.0; NVAR])
                    }
                    Some(false) => {
                        let (c, m, p) = (get(b), get(b - 1), get(b + 1));
                        ([0.0; NVAR], std::array::from_fn(|v| c[v] - 0.25 * (p[v] - m[v])))
                    }
                    None => {
                        let (ca, ma, pa) = (get(a), get(a - 1), get(a + 1));
                        let (cb, mb, pb) = (get(b), get(b - 1), get(b + 1));
                        (
                            std::array::from_fn(|v| ca[v] + 0.25 * (pa[v] - ma[v])),
                            std::array::from_fn(|v| cb[v] - 0.25 * (pb[v] - mb[v])),
                        )
                    }
                };
                let phi = fr.apply(&dl, &dr, Axis::X, gamma);
                let ia = if px { Some((f + nx - 1) % nx) } else if f > 0 { Some(f - 1) } else { None };
                let ib = if px { Some(f % nx) } else if f < nx { Some(f) } else { None };
                if let Some(a) = ia {
                    let k = (j * nx + a) * NVAR;
                    for v in 0..NVAR {
                        out[k + v] -= phi[v] * inv;
                    }
                }
                if let Some(b) = ib {
                    let k = (j * nx + b) * NVAR;
                    for v in 0..NVAR {
                        out[k + v] += phi[v] * inv;
                    }
                }
            }
        }
    }

    fn gather_column(&self, i: usize, x: &[f64]) -> Vec<f64> {
        let nx = self.grid.nx;
        let mut c = Vec::with_capacity(self.grid.nz * NVAR);
        for j in 0..self.grid.nz {
            let k = (j * nx + i) * NVAR;
            c.extend_from_slice(&x[k..k + NVAR]);
        }
        c
    }

    fn scatter_column_add(&self, i: usize, c: &[f64], out: &mut [f64]) {
        let nx = self.grid.nx;
        for j in 0..self.grid.nz {
            let k = (j * nx + i) * NVAR;
            for v in 0..NVAR {
                out[k + v] += c[j * NVAR + v];
            }
        }
    }

    /// Applies the operator to a field-shaped vector.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.grid.cell_count() * NVAR {
            return Err(Error::Mismatch(format!("vector length {} does not match operator size {}", x.len(), self.grid.cell_count() * NVAR)));
        }
        let mut out = vec![0.0; x.len()];
        if self.kind != LinearOperatorKind::Vertical {
            self.apply_x_into(x, &mut out);
        }
        let mut colout = vec![0.0; self.grid.nz * NVAR];
        for i in 0..self.grid.nx {
            let c = self.gather_column(i, x);
            colout.iter_mut().for_each(|v| *v = 0.0);
            self.apply_column_into(i, &c, &mut colout);
            self.scatter_column_add(i, &colout, &mut out);
        }
        if let Some(vref) = &self.viscous_ref {
            let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if scale > 0.0 {
                let h = FD_EPSILON / scale;
                let shifted: Vec<f64> = self.reference.iter().zip(x).map(|(r, d)| r + h * d).collect();
                let vp = self.viscous_residual(&shifted)?;
                for k in 0..out.len() {
                    out[k] += (vp[k] - vref[k]) / h;
                }
            }
        }
        Ok(out)
    }

    /// Column action of Lᶻ on a column vector (length 4·nz).
    pub fn apply_column(&self, i: usize, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.apply_column_into(i, x, &mut out);
        out
    }

    /// Solves (I − αL)Q = b for Q in correction form: with δ = Q − b,
    /// (I − αL)δ = αL b, iterated until the residual falls below
    /// `tol`·‖αL b‖ (per column for Lᶻ).
    pub fn solve(&self, alpha: f64, b: &[f64], tol: f64, params: GmresParams) -> Result<StageSolution> {
        if !(alpha >= 0.0) {
            return Err(Error::Parameter(format!("stage coefficient alpha must be nonnegative, got {alpha}")));
        }
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::Parameter(format!("Krylov tolerance must lie in (0, 1), got {tol}")));
        }
        if alpha == 0.0 {
            return Ok(StageSolution { x: b.to_vec(), iterations: 0, residual: 0.0 });
        }
        match self.kind {
            LinearOperatorKind::Vertical => self.solve_columns(alpha, b, tol, params),
            _ => {
                let lb = self.apply(b)?;
                let rhs: Vec<f64> = lb.iter().map(|v| alpha * v).collect();
                let target = tol * norm2(&rhs);
                let mut d = vec![0.0; b.len()];
                let mut failure = None;
                let st = gmres(
                    |v, out| match self.apply(v) {
                        Ok(lv) => {
                            for k in 0..v.len() {
                                out[k] = v[k] - alpha * lv[k];
                            }
                        }
                        Err(e) => {
                            failure.get_or_insert(e);
                            out.iter_mut().for_each(|o| *o = f64::NAN);
                        }
                    },
                    &rhs,
                    &mut d,
                    target,
                    params,
                );
                if let Some(e) = failure {
                    return Err(e);
                }
                let st = st?;
                let x = b.iter().zip(&d).map(|(p, q)| p + q).collect();
                Ok(StageSolution { x, iterations: st.iterations, residual: st.residual })
            }
        }
    }

    fn solve_columns(&self, alpha: f64, b: &[f64], tol: f64, params: GmresParams) -> Result<StageSolution> {
        let nx = self.grid.nx;
        let results: Vec<Result<(Vec<f64>, SolveStats)>> = (0..nx)
            .into_par_iter()
            .map(|i| {
                let bc = self.gather_column(i, b);
                let lb = self.apply_column(i, &bc);
                let rhs: Vec<f64> = lb.iter().map(|v| alpha * v).collect();
                let target = tol * norm2(&rhs);
                let mut d = vec![0.0; bc.len()];
                let mut tmp = vec![0.0; bc.len()];
                let st = gmres(
                    |v, out| {
                        tmp.iter_mut().for_each(|t| *t = 0.0);
                        self.apply_column_into(i, v, &mut tmp);
                        for k in 0..v.len() {
                            out[k] = v[k] - alpha * tmp[k];
                        }
                    },
                    &rhs,
                    &mut d,
                    target,
                    params,
                )?;
                let x: Vec<f64> = bc.iter().zip(&d).map(|(p, q)| p + q).collect();
                Ok((x, st))
            })
            .collect();
        let mut x = vec![0.0; b.len()];
        let mut iterations = 0;
        let mut res2 = 0.0;
        for (i, r) in results.into_iter().enumerate() {
            let (xc, st) = r?;
            iterations = iterations.max(st.iterations);
            res2 += st.residual * st.residual;
            for j in 0..self.grid.nz {
                let k = (j * nx + i) * NVAR;
                x[k..k + NVAR].copy_from_slice(&xc[j * NVAR..j * NVAR + NVAR]);
            }
        }
        Ok(StageSolution { x, iterations, residual: res2.sqrt() })
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Result of a stage solve. For Lᶻ, `iterations` is the maximum over
/// columns and `residual` the combined 2-norm.
#[derive(Debug, Clone, PartialEq)]
pub struct StageSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Implicit stage system (I − αL(q̃))x = rhs.
#[derive(Debug, Clone)]
pub struct StageSystem {
    pub alpha: f64,
    pub reference: ConservedField,
    pub rhs: Vec<f64>,
    pub tolerance: f64,
    pub max_iterations: usize,
}

/// Applies the linearisation of R about `reference` to `q`.
pub fn linop_apply(
    kind: LinearOperatorKind,
    reference: &ConservedField,
    specs: &BoundarySet,
    iface: Option<InterfaceWall<'_>>,
    q: &[f64],
) -> Result<Vec<f64>> {
    LinearOperator::new(kind, reference, specs, iface, GradientStencil::default())?.apply(q)
}

/// Builds the operator about the system's reference and solves the stage.
pub fn stage_solve(
    kind: LinearOperatorKind,
    system: &StageSystem,
    specs: &BoundarySet,
    iface: Option<InterfaceWall<'_>>,
) -> Result<StageSolution> {
    let op = LinearOperator::new(kind, &system.reference, specs, iface, GradientStencil::default())?;
    op.solve(system.alpha, &system.rhs, system.tolerance, GmresParams { restart: 30, max_iterations: system.max_iterations })
}
