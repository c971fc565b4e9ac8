//! Verification and demonstration cases: initial conditions, geometry,
//! boundary closures and fluid parameters.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::boundary::{BoundarySet, BoundarySpec};
use crate::coupling::{CoupledState, FvSystem, Subdomain};
use crate::error::{Error, Result};
use crate::grid::StructuredGrid2D;
use crate::krylov::GmresParams;
use crate::linop::LinearOperatorKind;
use crate::numflux::GradientStencil;
use crate::state::{ConservedField, FluidParams, PrimitiveCell};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DensityWave {
    pub rho_inf: f64,
    pub u_inf: f64,
    pub w_inf: f64,
    pub p_inf: f64,
    pub gamma: f64,
}

impl Default for DensityWave {
    fn default() -> Self {
        Self { rho_inf: 1.0, u_inf: 1.0, w_inf: 1.0, p_inf: 1.0, gamma: 1.4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaylorGreen {
    pub rho_inf: f64,
    pub u_inf: f64,
    /// Defaults to 1/γ.
    pub p_inf: Option<f64>,
    pub gamma: f64,
    pub pr: f64,
    /// Re = 100 at Mach 0.1 gives μ̃ = M/Re.
    pub mu: f64,
}

impl Default for TaylorGreen {
    fn default() -> Self {
        Self { rho_inf: 1.0, u_inf: 0.1, p_inf: None, gamma: 1.4, pr: 0.72, mu: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwoVortices {
    pub u_inf1: f64,
    pub u_inf2: f64,
    pub t_inf1: f64,
    pub t_inf2: f64,
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub xc1: f64,
    pub zc1: f64,
    pub xc2: f64,
    pub zc2: f64,
    pub gamma: f64,
    pub pr: f64,
    pub mu: f64,
    /// Bottom wall of Ω₁.
    pub wall_u1: f64,
    pub wall_t1: f64,
    /// Top wall of Ω₂.
    pub wall_u2: f64,
    pub wall_t2: f64,
}

impl Default for TwoVortices {
    fn default() -> Self {
        Self {
            u_inf1: 0.05,
            u_inf2: 0.1,
            t_inf1: 1.1,
            t_inf2: 1.0,
            alpha: 2.0,
            beta1: 0.1,
            beta2: 0.5,
            xc1: 0.0,
            zc1: -2.5,
            xc2: 0.0,
            zc2: 2.5,
            gamma: 1.4,
            pr: 0.72,
            mu: 1.0 / 5000.0,
            wall_u1: 0.05,
            wall_t1: 1.1,
            wall_u2: 0.1,
            wall_t2: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindDriven {
    pub rho_inf: f64,
    pub t_inf1: f64,
    pub t_inf2: f64,
    pub u_inf2: f64,
    pub gamma: f64,
    pub pr: f64,
    pub mu: f64,
    pub wall_u1: f64,
    pub wall_t1: f64,
    pub wall_u2: f64,
    pub wall_t2: f64,
}

impl Default for WindDriven {
    fn default() -> Self {
        Self {
            rho_inf: 1.0,
            t_inf1: 1.1,
            t_inf2: 1.0,
            u_inf2: 0.1,
            gamma: 1.4,
            pr: 0.72,
            mu: 1.0 / 5000.0,
            wall_u1: 0.0,
            wall_t1: 1.0,
            wall_u2: 0.1,
            wall_t2: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Khi {
    pub a: f64,
    pub amplitude: f64,
    pub sigma: f64,
    pub s1: f64,
    pub s2: f64,
    pub xc: f64,
    pub zc: f64,
    pub alpha: f64,
    pub beta: f64,
    pub t_inf1: f64,
    pub gamma: f64,
    pub pr: f64,
    pub mu: f64,
    pub wall_u1: f64,
    pub wall_t1: f64,
    pub wall_u2: f64,
    pub wall_t2: f64,
}

impl Default for Khi {
    fn default() -> Self {
        Self {
            a: 0.05,
            amplitude: 0.01,
            sigma: 0.2,
            s1: 2.0,
            s2: 3.0,
            xc: 0.0,
            zc: -3.0,
            alpha: 5.0,
            beta: 0.5,
            t_inf1: 1.1,
            gamma: 1.4,
            pr: 0.72,
            mu: 1.0 / 5000.0,
            wall_u1: 0.0,
            wall_t1: 1.0,
            wall_u2: 0.1,
            wall_t2: 0.9,
        }
    }
}

/// A case with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum CaseSpec {
    DensityWave(DensityWave),
    TaylorGreen(TaylorGreen),
    TwoVortices(TwoVortices),
    WindDriven(WindDriven),
    Khi(Khi),
}

pub const CASE_NAMES: [&str; 5] = ["density-wave", "taylor-green", "two-vortices", "wind-driven", "khi"];

/// Grid sizes of a run. `nz2` is ignored for single-domain cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSizes {
    pub nx: usize,
    pub nz1: usize,
    pub nz2: usize,
}

/// Isentropic vortex used by the two-domain cases.
fn vortex(x: f64, z: f64, xc: f64, zc: f64, alpha: f64, beta: f64, u_inf: f64, t_inf: f64, gamma: f64) -> PrimitiveCell {
    let (xt, zt) = (x - xc, z - zc);
    let r2 = xt * xt + zt * zt;
    let e = (alpha * (1.0 - r2)).exp();
    let rho = (1.0 - (gamma - 1.0) * beta * beta / (8.0 * alpha * gamma * PI * PI) * e).powf(1.0 / (gamma - 1.0));
    let eh = (0.5 * alpha * (1.0 - r2)).exp();
    let u = u_inf + beta / (2.0 * PI) * zt * eh;
    let w = -beta / (2.0 * PI) * xt * eh;
    let p = t_inf / gamma * rho.powf(gamma);
    PrimitiveCell::from_rho_u_w_p(rho, u, w, p, gamma)
}

impl CaseSpec {
    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "density-wave" => CaseSpec::DensityWave(DensityWave::default()),
            "taylor-green" => CaseSpec::TaylorGreen(TaylorGreen::default()),
            "two-vortices" => CaseSpec::TwoVortices(TwoVortices::default()),
            "wind-driven" => CaseSpec::WindDriven(WindDriven::default()),
            "khi" => CaseSpec::Khi(Khi::default()),
            other => return Err(Error::Config(format!("unknown case '{other}' (expected one of {})", CASE_NAMES.join(", ")))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            CaseSpec::DensityWave(_) => "density-wave",
            CaseSpec::TaylorGreen(_) => "taylor-green",
            CaseSpec::TwoVortices(_) => "two-vortices",
            CaseSpec::WindDriven(_) => "wind-driven",
            CaseSpec::Khi(_) => "khi",
        }
    }

    pub fn is_coupled(&self) -> bool {
        !matches!(self, CaseSpec::DensityWave(_) | CaseSpec::TaylorGreen(_))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, v: f64| Err(Error::Config(format!("case.{key} = {v} is out of range")));
        let (gamma, mu) = match self {
            CaseSpec::DensityWave(c) => {
                if !(c.rho_inf > 0.5) {
                    return bad("rho_inf", c.rho_inf);
                }
                if !(c.p_inf > 0.0) {
                    return bad("p_inf", c.p_inf);
                }
                (c.gamma, 0.0)
            }
            CaseSpec::TaylorGreen(c) => {
                if !(c.rho_inf > 0.0) {
                    return bad("rho_inf", c.rho_inf);
                }
                if let Some(p) = c.p_inf {
                    if !(p > c.rho_inf * c.u_inf * c.u_inf / 2.0) {
                        return bad("p_inf", p);
                    }
                }
                (c.gamma, c.mu)
            }
            CaseSpec::TwoVortices(c) => {
                for (k, v) in [("t_inf1", c.t_inf1), ("t_inf2", c.t_inf2), ("wall_t1", c.wall_t1), ("wall_t2", c.wall_t2), ("alpha", c.alpha)] {
                    if !(v > 0.0) {
                        return bad(k, v);
                    }
                }
                (c.gamma, c.mu)
            }
            CaseSpec::WindDriven(c) => {
                for (k, v) in [("rho_inf", c.rho_inf), ("t_inf1", c.t_inf1), ("t_inf2", c.t_inf2), ("wall_t1", c.wall_t1), ("wall_t2", c.wall_t2)] {
                    if !(v > 0.0) {
                        return bad(k, v);
                    }
                }
                (c.gamma, c.mu)
            }
            CaseSpec::Khi(c) => {
                for (k, v) in [("a", c.a), ("sigma", c.sigma), ("alpha", c.alpha), ("t_inf1", c.t_inf1), ("wall_t1", c.wall_t1), ("wall_t2", c.wall_t2)] {
                    if !(v > 0.0) {
                        return bad(k, v);
                    }
                }
                if !(c.s1 < c.s2) {
                    return bad("s1", c.s1);
                }
                (c.gamma, c.mu)
            }
        };
        if !(gamma > 1.0) {
            return bad("gamma", gamma);
        }
        if !(mu >= 0.0) {
            return bad("mu", mu);
        }
        Ok(())
    }

    /// Fluid parameters of Ω₁ and Ω₂ (identical for all cases).
    pub fn fluid_params(&self) -> Result<FluidParams> {
        match self {
            CaseSpec::DensityWave(c) => FluidParams::new(c.gamma, 0.72, 0.0),
            CaseSpec::TaylorGreen(c) => FluidParams::new(c.gamma, c.pr, c.mu),
            CaseSpec::TwoVortices(c) => FluidParams::new(c.gamma, c.pr, c.mu),
            CaseSpec::WindDriven(c) => FluidParams::new(c.gamma, c.pr, c.mu),
            CaseSpec::Khi(c) => FluidParams::new(c.gamma, c.pr, c.mu),
        }
    }

    /// Grids of Ω₁ and (for coupled cases) Ω₂.
    pub fn grids(&self, n: GridSizes) -> Result<(StructuredGrid2D, Option<StructuredGrid2D>)> {
        if self.is_coupled() {
            let g1 = StructuredGrid2D::new(n.nx, n.nz1, (-5.0, 5.0), (-5.0, 0.0))?;
            let g2 = StructuredGrid2D::new(n.nx, n.nz2, (-5.0, 5.0), (0.0, 5.0))?;
            Ok((g1, Some(g2)))
        } else {
            Ok((StructuredGrid2D::new(n.nx, n.nz1, (0.0, 1.0), (0.0, 1.0))?, None))
        }
    }

    /// Boundary closures of Ω₁ and Ω₂.
    pub fn boundaries(&self) -> (BoundarySet, Option<BoundarySet>) {
        let iso = |u: f64, t: f64| BoundarySpec::IsothermalWall { wall_u: u, wall_t: t };
        match self {
            CaseSpec::DensityWave(_) | CaseSpec::TaylorGreen(_) => (BoundarySet::periodic(), None),
            CaseSpec::TwoVortices(c) => (
                BoundarySet { bottom: iso(c.wall_u1, c.wall_t1), top: BoundarySpec::Interface, ..BoundarySet::periodic() },
                Some(BoundarySet { bottom: BoundarySpec::Interface, top: iso(c.wall_u2, c.wall_t2), ..BoundarySet::periodic() }),
            ),
            CaseSpec::WindDriven(WindDriven { wall_u1, wall_t1, wall_u2, wall_t2, .. })
            | CaseSpec::Khi(Khi { wall_u1, wall_t1, wall_u2, wall_t2, .. }) => (
                BoundarySet {
                    left: BoundarySpec::adiabatic_no_slip(),
                    right: BoundarySpec::adiabatic_no_slip(),
                    bottom: iso(*wall_u1, *wall_t1),
                    top: BoundarySpec::Interface,
                },
                Some(BoundarySet { bottom: BoundarySpec::Interface, top: iso(*wall_u2, *wall_t2), ..BoundarySet::periodic() }),
            ),
        }
    }

    /// Initial state, point-evaluated at cell centers.
    pub fn init(&self, n: GridSizes) -> Result<CoupledState> {
        self.validate()?;
        let params = self.fluid_params()?;
        let (g1, g2) = self.grids(n)?;
        let (q1, q2) = match self {
            CaseSpec::DensityWave(_) => (exact_density_wave_on(self, 0.0, g1)?, None),
            CaseSpec::TaylorGreen(c) => {
                let g = c.gamma;
                let p_inf = c.p_inf.unwrap_or(1.0 / g);
                let f = ConservedField::from_primitive_fn(g1, params, |x, z| {
                    let u = c.u_inf * (2.0 * PI * x).cos() * (2.0 * PI * z).sin();
                    let w = -c.u_inf * (2.0 * PI * x).sin() * (2.0 * PI * z).cos();
                    let p = p_inf + c.rho_inf * c.u_inf * c.u_inf / 4.0 * ((4.0 * PI * x).cos() + (4.0 * PI * z).cos());
                    PrimitiveCell::from_rho_u_w_p(c.rho_inf, u, w, p, g)
                })?;
                (f, None)
            }
            CaseSpec::TwoVortices(c) => {
                let g = c.gamma;
                let f1 = ConservedField::from_primitive_fn(g1, params, |x, z| vortex(x, z, c.xc1, c.zc1, c.alpha, c.beta1, c.u_inf1, c.t_inf1, g))?;
                let f2 = ConservedField::from_primitive_fn(g2.expect("coupled"), params, |x, z| {
                    vortex(x, z, c.xc2, c.zc2, c.alpha, c.beta2, c.u_inf2, c.t_inf2, g)
                })?;
                (f1, Some(f2))
            }
            CaseSpec::WindDriven(c) => {
                let g = c.gamma;
                let f1 = ConservedField::from_primitive_fn(g1, params, |_, _| PrimitiveCell::from_rho_u_w_t(c.rho_inf, 0.0, 0.0, c.t_inf1, g))?;
                let f2 = ConservedField::from_primitive_fn(g2.expect("coupled"), params, |_, _| {
                    PrimitiveCell::from_rho_u_w_t(c.rho_inf, c.u_inf2, 0.0, c.t_inf2, g)
                })?;
                (f1, Some(f2))
            }
            CaseSpec::Khi(c) => {
                let g = c.gamma;
                let f1 = ConservedField::from_primitive_fn(g1, params, |x, z| vortex(x, z, c.xc, c.zc, c.alpha, c.beta, 0.0, c.t_inf1, g))?;
                let f2 = ConservedField::from_primitive_fn(g2.expect("coupled"), params, |x, z| {
                    let jet = ((z - c.s1) / c.a).tanh() - ((z - c.s2) / c.a).tanh();
                    let rho = 1.0 + 0.5 * jet;
                    let u = 0.1 + (jet - 1.0);
                    let s2 = c.sigma * c.sigma;
                    let w = c.amplitude * (2.0 * PI * x).sin() * ((-(z - c.s1).powi(2) / s2).exp() + (-(z - c.s2).powi(2) / s2).exp());
                    PrimitiveCell::from_rho_u_w_p(rho, u, w, 1.0 / g, g)
                })?;
                (f1, Some(f2))
            }
        };
        Ok(CoupledState { q1, q2, time: 0.0 })
    }

    /// Finite-volume system for this case.
    pub fn system(&self, n: GridSizes, operator: LinearOperatorKind, krylov_tol: f64, gmres: GmresParams) -> Result<FvSystem> {
        let params = self.fluid_params()?;
        let (g1, g2) = self.grids(n)?;
        let (b1, b2) = self.boundaries();
        let stencil = GradientStencil::default();
        let sys = FvSystem {
            lower: Subdomain { grid: g1, params, bcs: b1, stencil },
            upper: g2.zip(b2).map(|(grid, bcs)| Subdomain { grid, params, bcs, stencil }),
            operator,
            krylov_tol,
            gmres,
        };
        sys.validate()?;
        Ok(sys)
    }
}

fn exact_density_wave_on(spec: &CaseSpec, t: f64, grid: StructuredGrid2D) -> Result<ConservedField> {
    let CaseSpec::DensityWave(c) = spec else {
        return Err(Error::Parameter(format!("exact solution only exists for density-wave, not {}", spec.name())));
    };
    let params = spec.fluid_params()?;
    ConservedField::from_primitive_fn(grid, params, |x, z| {
        let xt = x - c.u_inf * t;
        let zt = z - c.w_inf * t;
        let rho = c.rho_inf + 0.5 * (2.0 * PI * xt).sin() * (2.0 * PI * zt).cos();
        PrimitiveCell::from_rho_u_w_p(rho, c.u_inf, c.w_inf, c.p_inf, c.gamma)
    })
}

/// Exact advected density wave at time `t` on `grid`.
pub fn exact_density_wave(t: f64, grid: StructuredGrid2D, spec: &DensityWave) -> Result<ConservedField> {
    exact_density_wave_on(&CaseSpec::DensityWave(spec.clone()), t, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::primitive_from_conserved;

    #[test]
    fn density_wave_point_value() {
        let c = DensityWave::default();
        let rho = c.rho_inf + 0.5 * (2.0 * PI * 0.25f64).sin() * (0.0f64).cos();
        assert_eq!(rho, 1.5);
        let g = StructuredGrid2D::new(20, 20, (0.0, 1.0), (0.0, 1.0)).unwrap();
        let st = CaseSpec::DensityWave(c.clone()).init(GridSizes { nx: 20, nz1: 20, nz2: 0 }).unwrap();
        assert_eq!(st.q1, exact_density_wave(0.0, g, &c).unwrap());
        let p = st.q1.primitive(3, 7).unwrap();
        assert!((p.u - 1.0).abs() < 1e-14 && (p.p - 1.0).abs() < 1e-14);
    }

    #[test]
    fn density_wave_full_period() {
        let c = DensityWave::default();
        let g = StructuredGrid2D::new(8, 8, (0.0, 1.0), (0.0, 1.0)).unwrap();
        let a = exact_density_wave(0.0, g, &c).unwrap();
        let b = exact_density_wave(1.0, g, &c).unwrap();
        for (x, y) in a.data.iter().zip(&b.data) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn vortex_far_field() {
        let v = vortex(1e3, 0.0, 0.0, 0.0, 2.0, 0.5, 0.1, 1.0, 1.4);
        assert!((v.rho - 1.0).abs() < 1e-15);
        assert!((v.u - 0.1).abs() < 1e-15);
        assert!(v.w.abs() < 1e-15);
        assert!((v.p - 1.0 / 1.4).abs() < 1e-15);
    }

    #[test]
    fn khi_mid_jet() {
        let spec = CaseSpec::Khi(Khi::default());
        // five cells on (0, 5) put the third center at z = 2.5
        let st = spec.init(GridSizes { nx: 10, nz1: 10, nz2: 5 }).unwrap();
        let q2 = st.q2.unwrap();
        let (_, z) = q2.grid.cell_center(1, 3).unwrap();
        assert!((z - 2.5).abs() < 1e-14);
        let p = primitive_from_conserved(q2.get(1, 3).unwrap(), &q2.params).unwrap();
        assert!((p.rho - 2.0).abs() < 1e-8);
        assert!((p.u - 1.1).abs() < 1e-8);
    }

    #[test]
    fn two_vortices_is_admissible_and_warmer_below() {
        let spec = CaseSpec::TwoVortices(TwoVortices::default());
        let st = spec.init(GridSizes { nx: 20, nz1: 20, nz2: 10 }).unwrap();
        st.q1.check_admissible().unwrap();
        let t1 = st.q1.primitive(1, 20).unwrap().t;
        let t2 = st.q2.as_ref().unwrap().primitive(1, 1).unwrap().t;
        assert!(t1 > t2);
        spec.system(GridSizes { nx: 20, nz1: 20, nz2: 10 }, LinearOperatorKind::Vertical, 1e-4, GmresParams::default()).unwrap();
    }

    #[test]
    fn unknown_case() {
        assert!(matches!(CaseSpec::from_name("cavity"), Err(Error::Config(_))));
        for n in CASE_NAMES {
            assert_eq!(CaseSpec::from_name(n).unwrap().name(), n);
        }
    }

    #[test]
    fn serde_tag_and_unknown_fields() {
        let c: CaseSpec = toml::from_str("name = \"khi\"\na = 0.1\n").unwrap();
        assert!(matches!(c, CaseSpec::Khi(Khi { a, .. }) if a == 0.1));
        assert!(toml::from_str::<CaseSpec>("name = \"khi\"\nbogus = 1\n").is_err());
    }
}
