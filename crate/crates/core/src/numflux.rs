//! Cell gradients, linear reconstruction, the Roe inviscid flux and the
//! viscous face flux.

use crate::error::{Error, Result};
use crate::state::{FluidParams, NVAR};

pub type Vec4 = [f64; NVAR];
pub type Mat4 = [[f64; NVAR]; NVAR];

/// Least-squares gradient stencil on the uniform mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradientStencil {
    /// Unweighted least squares over the 3x3 neighbourhood: the mean of the
    /// central differences of the three neighbouring rows (or columns).
    #[default]
    FullNeighborhood,
    /// Central difference along the axis only (face neighbours).
    Compact,
}

/// Cell-centred array with one ghost layer on each side.
///
/// Indices run over `-1..=n` in each direction; `-1` and `n` are ghosts.
#[derive(Debug, Clone)]
pub struct Padded {
    pub nx: usize,
    pub nz: usize,
    pub nv: usize,
    pub data: Vec<f64>,
}

impl Padded {
    pub fn new(nx: usize, nz: usize, nv: usize) -> Self {
        Self { nx, nz, nv, data: vec![f64::NAN; (nx + 2) * (nz + 2) * nv] }
    }

    #[inline]
    pub fn offset(&self, i: isize, j: isize) -> usize {
        debug_assert!(i >= -1 && i <= self.nx as isize && j >= -1 && j <= self.nz as isize);
        (((j + 1) as usize) * (self.nx + 2) + (i + 1) as usize) * self.nv
    }

    #[inline]
    pub fn at(&self, i: isize, j: isize) -> &[f64] {
        let o = self.offset(i, j);
        &self.data[o..o + self.nv]
    }

    #[inline]
    pub fn at_mut(&mut self, i: isize, j: isize) -> &mut [f64] {
        let o = self.offset(i, j);
        let nv = self.nv;
        &mut self.data[o..o + nv]
    }

    #[inline]
    pub fn get4(&self, i: isize, j: isize) -> Vec4 {
        let s = self.at(i, j);
        [s[0], s[1], s[2], s[3]]
    }

    /// True when every ghost cell on all four sides and corners is finite.
    pub fn ghosts_filled(&self) -> bool {
        let (nx, nz) = (self.nx as isize, self.nz as isize);
        let ok = |i, j| self.at(i, j).iter().all(|v| v.is_finite());
        (-1..=nx).all(|i| ok(i, -1) && ok(i, nz)) && (-1..=nz).all(|j| ok(-1, j) && ok(nx, j))
    }
}

/// Per-cell gradients of `nv` quantities over the interior cells.
#[derive(Debug, Clone)]
pub struct CellGradients {
    pub nx: usize,
    pub nz: usize,
    pub nv: usize,
    pub d_dx: Vec<f64>,
    pub d_dz: Vec<f64>,
}

impl CellGradients {
    #[inline]
    pub fn dx(&self, i: usize, j: usize) -> &[f64] {
        let o = (j * self.nx + i) * self.nv;
        &self.d_dx[o..o + self.nv]
    }

    #[inline]
    pub fn dz(&self, i: usize, j: usize) -> &[f64] {
        let o = (j * self.nx + i) * self.nv;
        &self.d_dz[o..o + self.nv]
    }
}

/// Least-squares cell gradients of every component of a ghosted array.
pub fn ls_gradients(f: &Padded, dx: f64, dz: f64, stencil: GradientStencil) -> Result<CellGradients> {
    if !f.ghosts_filled() {
        return Err(Error::Boundary("gradient requested before ghost cells were filled".into()));
    }
    Ok(ls_gradients_unchecked(f, dx, dz, stencil))
}

pub(crate) fn ls_gradients_unchecked(f: &Padded, dx: f64, dz: f64, stencil: GradientStencil) -> CellGradients {
    let (nx, nz, nv) = (f.nx, f.nz, f.nv);
    let mut d_dx = vec![0.0; nx * nz * nv];
    let mut d_dz = vec![0.0; nx * nz * nv];
    for j in 0..nz {
        let jj = j as isize;
        for i in 0..nx {
            let ii = i as isize;
            let o = (j * nx + i) * nv;
            match stencil {
                GradientStencil::Compact => {
                    let (e, w) = (f.at(ii + 1, jj), f.at(ii - 1, jj));
                    let (n, s) = (f.at(ii, jj + 1), f.at(ii, jj - 1));
                    for v in 0..nv {
                        d_dx[o + v] = (e[v] - w[v]) / (2.0 * dx);
                        d_dz[o + v] = (n[v] - s[v]) / (2.0 * dz);
                    }
                }
                GradientStencil::FullNeighborhood => {
                    for v in 0..nv {
                        let mut sx = 0.0;
                        let mut sz = 0.0;
                        for d in -1..=1isize {
                            sx += f.at(ii + 1, jj + d)[v] - f.at(ii - 1, jj + d)[v];
                            sz += f.at(ii + d, jj + 1)[v] - f.at(ii + d, jj - 1)[v];
                        }
                        d_dx[o + v] = sx / (6.0 * dx);
                        d_dz[o + v] = sz / (6.0 * dz);
                    }
                }
            }
        }
    }
    CellGradients { nx, nz, nv, d_dx, d_dz }
}

/// Face orientation: `X` faces have normal (1, 0), `Z` faces (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Z,
}

impl Axis {
    pub fn normal(self) -> [f64; 2] {
        match self {
            Axis::X => [1.0, 0.0],
            Axis::Z => [0.0, 1.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceStates {
    pub q_l: Vec4,
    pub q_r: Vec4,
    pub normal: [f64; 2],
}

/// One-sided linear extrapolations to the face between cell `a` (left or
/// lower) and cell `b`, given each cell's slope along the face normal.
#[inline]
pub fn reconstruct_pair(qa: &[f64], ga: &[f64], qb: &[f64], gb: &[f64], h: f64) -> (Vec4, Vec4) {
    let mut l = [0.0; NVAR];
    let mut r = [0.0; NVAR];
    for v in 0..NVAR {
        l[v] = qa[v] + 0.5 * h * ga[v];
        r[v] = qb[v] - 0.5 * h * gb[v];
    }
    (l, r)
}

/// Face states on all faces whose two neighbours are interior cells,
/// wrapping around in periodic directions. Returns (x-faces, z-faces).
pub fn reconstruct_face_states(
    q: &Padded,
    grads: &CellGradients,
    dx: f64,
    dz: f64,
    periodic_x: bool,
    periodic_z: bool,
) -> (Vec<FaceStates>, Vec<FaceStates>) {
    let (nx, nz) = (q.nx, q.nz);
    let mut xf = Vec::new();
    for j in 0..nz {
        for f in 1..=nx {
            if f == nx && !periodic_x {
                break;
            }
            let (a, b) = (f - 1, f % nx);
            let (l, r) = reconstruct_pair(
                q.at(a as isize, j as isize),
                grads.dx(a, j),
                q.at(b as isize, j as isize),
                grads.dx(b, j),
                dx,
            );
            xf.push(FaceStates { q_l: l, q_r: r, normal: [1.0, 0.0] });
        }
    }
    let mut zf = Vec::new();
    for f in 1..=nz {
        if f == nz && !periodic_z {
            break;
        }
        let (a, b) = (f - 1, f % nz);
        for i in 0..nx {
            let (l, r) = reconstruct_pair(
                q.at(i as isize, a as isize),
                grads.dz(i, a),
                q.at(i as isize, b as isize),
                grads.dz(i, b),
                dz,
            );
            zf.push(FaceStates { q_l: l, q_r: r, normal: [0.0, 1.0] });
        }
    }
    (xf, zf)
}

/// Analytic inviscid flux F(q)·n.
#[inline]
pub fn euler_flux(q: &Vec4, n: [f64; 2], gamma: f64) -> Vec4 {
    let rho = q[0];
    let u = q[1] / rho;
    let w = q[2] / rho;
    let p = (gamma - 1.0) * (q[3] - 0.5 * rho * (u * u + w * w));
    let vn = u * n[0] + w * n[1];
    [rho * vn, q[1] * vn + p * n[0], q[2] * vn + p * n[1], (q[3] + p) * vn]
}

/// Jacobian of `euler_flux` with respect to the conserved variables.
#[inline]
pub fn flux_jacobian(q: &Vec4, n: [f64; 2], gamma: f64) -> Mat4 {
    let g1 = gamma - 1.0;
    let rho = q[0];
    let u = q[1] / rho;
    let w = q[2] / rho;
    let phi = 0.5 * g1 * (u * u + w * w);
    let p = g1 * (q[3] - 0.5 * rho * (u * u + w * w));
    let h = (q[3] + p) / rho;
    let (nx, nz) = (n[0], n[1]);
    let v = u * nx + w * nz;
    [
        [0.0, nx, nz, 0.0],
        [nx * phi - u * v, v - (gamma - 2.0) * u * nx, u * nz - g1 * w * nx, g1 * nx],
        [nz * phi - w * v, w * nx - g1 * u * nz, v - (gamma - 2.0) * w * nz, g1 * nz],
        [v * (phi - h), h * nx - g1 * u * v, h * nz - g1 * w * v, gamma * v],
    ]
}

#[inline]
pub fn mat_vec(a: &Mat4, x: &Vec4) -> Vec4 {
    let mut y = [0.0; NVAR];
    for r in 0..NVAR {
        y[r] = a[r][0] * x[0] + a[r][1] * x[1] + a[r][2] * x[2] + a[r][3] * x[3];
    }
    y
}

/// Roe upwind term ½|A(q̂)|(qR − qL), with no entropy fix.
#[inline]
pub fn roe_dissipation(ql: &Vec4, qr: &Vec4, n: [f64; 2], gamma: f64) -> Vec4 {
    let g1 = gamma - 1.0;
    let (nx, nz) = (n[0], n[1]);
    let (tx, tz) = (-nz, nx);

    let rl = ql[0];
    let ul = ql[1] / rl;
    let wl = ql[2] / rl;
    let pl = g1 * (ql[3] - 0.5 * rl * (ul * ul + wl * wl));
    let hl = (ql[3] + pl) / rl;

    let rr = qr[0];
    let ur = qr[1] / rr;
    let wr = qr[2] / rr;
    let pr = g1 * (qr[3] - 0.5 * rr * (ur * ur + wr * wr));
    let hr = (qr[3] + pr) / rr;

    let sl = rl.sqrt();
    let sr = rr.sqrt();
    let inv = 1.0 / (sl + sr);
    let rho = sl * sr;
    let u = (sl * ul + sr * ur) * inv;
    let w = (sl * wl + sr * wr) * inv;
    let h = (sl * hl + sr * hr) * inv;
    let q2 = u * u + w * w;
    let a = (g1 * (h - 0.5 * q2)).sqrt();
    let vn = u * nx + w * nz;
    let vt = u * tx + w * tz;

    let dp = pr - pl;
    let dvn = (ur - ul) * nx + (wr - wl) * nz;
    let dvt = (ur - ul) * tx + (wr - wl) * tz;
    let drho = rr - rl;

    let a2 = a * a;
    let alpha1 = (dp - rho * a * dvn) / (2.0 * a2);
    let alpha4 = (dp + rho * a * dvn) / (2.0 * a2);
    let alpha2 = drho - dp / a2;
    let alpha3 = rho * dvt;

    let l1 = (vn - a).abs() * alpha1;
    let l2 = vn.abs() * alpha2;
    let l3 = vn.abs() * alpha3;
    let l4 = (vn + a).abs() * alpha4;

    [
        0.5 * (l1 + l2 + l4),
        0.5 * (l1 * (u - a * nx) + l2 * u + l3 * tx + l4 * (u + a * nx)),
        0.5 * (l1 * (w - a * nz) + l2 * w + l3 * tz + l4 * (w + a * nz)),
        0.5 * (l1 * (h - vn * a) + l2 * 0.5 * q2 + l3 * vt + l4 * (h + vn * a)),
    ]
}

/// Roe flux without admissibility checks.
#[inline]
pub fn roe_flux_raw(ql: &Vec4, qr: &Vec4, n: [f64; 2], gamma: f64) -> Vec4 {
    let fl = euler_flux(ql, n, gamma);
    let fr = euler_flux(qr, n, gamma);
    let d = roe_dissipation(ql, qr, n, gamma);
    [
        0.5 * (fl[0] + fr[0]) - d[0],
        0.5 * (fl[1] + fr[1]) - d[1],
        0.5 * (fl[2] + fr[2]) - d[2],
        0.5 * (fl[3] + fr[3]) - d[3],
    ]
}

/// Roe approximate Riemann flux ½(F(qL)+F(qR))·n − ½|A(q̂)|(qR − qL).
pub fn roe_flux(states: &FaceStates, params: &FluidParams) -> Result<Vec4> {
    let g = params.gamma;
    for q in [&states.q_l, &states.q_r] {
        crate::state::checked_primitive(q, g)?;
    }
    Ok(roe_flux_raw(&states.q_l, &states.q_r, states.normal, g))
}

/// Common face velocity, velocity gradient and temperature gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceGradients {
    /// (u, w) at the face.
    pub u_hat: [f64; 2],
    /// [[du/dx, du/dz], [dw/dx, dw/dz]].
    pub grad_u: [[f64; 2]; 2],
    /// [dT/dx, dT/dz].
    pub grad_t: [f64; 2],
}

/// Builds face values from the two adjacent cells' (u, w, T) and their
/// cell gradients. Normal derivatives are two-point differences across the
/// face; tangential derivatives average the two cell gradients.
///
/// `va`/`vb` are (u, w, T) of the left/lower and right/upper cells,
/// `ta`/`tb` their derivatives of (u, w, T) along the face tangent.
pub fn common_face_gradients(va: [f64; 3], vb: [f64; 3], ta: [f64; 3], tb: [f64; 3], h: f64, axis: Axis) -> FaceGradients {
    let mut normal = [0.0; 3];
    let mut tang = [0.0; 3];
    for v in 0..3 {
        normal[v] = (vb[v] - va[v]) / h;
        tang[v] = 0.5 * (ta[v] + tb[v]);
    }
    let u_hat = [0.5 * (va[0] + vb[0]), 0.5 * (va[1] + vb[1])];
    match axis {
        Axis::X => FaceGradients {
            u_hat,
            grad_u: [[normal[0], tang[0]], [normal[1], tang[1]]],
            grad_t: [normal[2], tang[2]],
        },
        Axis::Z => FaceGradients {
            u_hat,
            grad_u: [[tang[0], normal[0]], [tang[1], normal[1]]],
            grad_t: [tang[2], normal[2]],
        },
    }
}

/// Viscous flux (0, σ·n, (σû)·n + κ̃∇T̂·n).
#[inline]
pub fn viscous_face_flux(g: &FaceGradients, params: &FluidParams, n: [f64; 2]) -> Vec4 {
    let mu = params.mu_tilde;
    let kappa = params.kappa();
    let ux = g.grad_u[0][0];
    let uz = g.grad_u[0][1];
    let wx = g.grad_u[1][0];
    let wz = g.grad_u[1][1];
    let div = ux + wz;
    let sxx = mu * (2.0 * ux - 2.0 / 3.0 * div);
    let szz = mu * (2.0 * wz - 2.0 / 3.0 * div);
    let sxz = mu * (uz + wx);
    let mx = sxx * n[0] + sxz * n[1];
    let mz = sxz * n[0] + szz * n[1];
    let e = mx * g.u_hat[0] + mz * g.u_hat[1] + kappa * (g.grad_t[0] * n[0] + g.grad_t[1] * n[1]);
    [0.0, mx, mz, e]
}
