//! Partitioned IMEX-RK coupling of two subdomains: tight coupling with an
//! interface exchange at every stage, and loose (concurrent or sequential)
//! coupling with one exchange per step and substepping of Ω₂.
//!
//! Ω₁ is advanced with the implicit-explicit pair; Ω₂ with the explicit
//! tableau only.

use log::warn;

use crate::boundary::{BoundarySet, InterfaceExchange, Side};
use crate::error::{Error, Result};
use crate::grid::StructuredGrid2D;
use crate::krylov::GmresParams;
use crate::linop::{LinearOperator, LinearOperatorKind, StageSolution};
use crate::numflux::GradientStencil;
use crate::residual::{assemble_rhs_with, Terms};
use crate::state::{ConservedField, FluidParams};
use crate::tableau::IMEXTableau;

/// How the stiff part of Ω₁ is treated in the implicit stages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StiffTreatment {
    /// Linear solve with L(q̃) about the stage reference.
    Linearized,
    /// Nonlinear stage equation solved by Newton-type corrections with L as
    /// the approximate Jacobian.
    Nonlinear { max_iterations: usize, tolerance: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingMode {
    /// Exchange at every stage.
    Tight,
    /// Both subdomains use data frozen at tⁿ; Ω₂ takes `ns` substeps.
    Concurrent(usize),
    /// Ω₁ first; Ω₂ takes `ns` substeps using Ω₁'s dense output.
    Sequential(usize),
}

impl CouplingMode {
    pub fn substeps(&self) -> usize {
        match *self {
            CouplingMode::Tight => 1,
            CouplingMode::Concurrent(n) | CouplingMode::Sequential(n) => n,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            CouplingMode::Tight => "TC".into(),
            CouplingMode::Concurrent(n) => format!("CC{n}"),
            CouplingMode::Sequential(n) => format!("SC{n}"),
        }
    }
}

/// Time-integration settings of a coupled run.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingConfig {
    pub scheme: String,
    pub stiff: StiffTreatment,
    pub operator: LinearOperatorKind,
    pub mode: CouplingMode,
    /// Timestep of Ω₁.
    pub dt: f64,
    pub krylov_tol: f64,
    pub max_krylov_iterations: usize,
    /// Emit a diagnostics row every this many steps (0: first and last only).
    pub output_every: usize,
}

impl Default for CouplingConfig {
    fn default() -> Self {
        Self {
            scheme: "rk4".into(),
            stiff: StiffTreatment::Linearized,
            operator: LinearOperatorKind::Vertical,
            mode: CouplingMode::Tight,
            dt: 1e-3,
            krylov_tol: 1e-4,
            max_krylov_iterations: 500,
            output_every: 0,
        }
    }
}

impl CouplingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Parameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.krylov_tol > 0.0 && self.krylov_tol < 1.0) {
            return Err(Error::Parameter(format!("krylov_tol must lie in (0, 1), got {}", self.krylov_tol)));
        }
        if self.mode.substeps() == 0 {
            return Err(Error::Parameter("substeps must be at least 1".into()));
        }
        Ok(())
    }

    /// Method name such as "ARK2(Lᶻ,SC2)" or "RK4".
    pub fn method_name(&self, tableau: &IMEXTableau) -> String {
        let op = match self.operator {
            LinearOperatorKind::Full => "L",
            LinearOperatorKind::Inviscid => "Lᴵ",
            LinearOperatorKind::Vertical => "Lᶻ",
        };
        let label = tableau.label();
        match (tableau.is_explicit(), self.mode) {
            (true, CouplingMode::Tight) => label,
            (true, m) => format!("{label}({})", m.label()),
            (false, m) => format!("{label}({op},{})", m.label()),
        }
    }

    pub fn gmres(&self) -> GmresParams {
        GmresParams { restart: 30, max_iterations: self.max_krylov_iterations }
    }
}

/// Semi-discrete two-domain system seen by the drivers. State vectors are
/// flat; `Exchange` carries the interface data shared by both sides.
pub trait CoupledSystem {
    type Exchange;
    type Op;

    fn exchange(&self, q1: &[f64], q2: &[f64]) -> Result<Self::Exchange>;
    fn rhs1(&self, q1: &[f64], ex: &Self::Exchange) -> Result<Vec<f64>>;
    fn rhs2(&self, q2: &[f64], ex: &Self::Exchange) -> Result<Vec<f64>>;
    /// Linear operator of Ω₁ about `reference`, interface data frozen at `ex`.
    fn linearize(&self, reference: &[f64], ex: &Self::Exchange) -> Result<Self::Op>;
    fn op_apply(&self, op: &Self::Op, x: &[f64]) -> Result<Vec<f64>>;
    /// Solves (I − αL)x = b.
    fn op_solve(&self, op: &Self::Op, alpha: f64, b: &[f64]) -> Result<StageSolution>;
}

/// Per-step solver statistics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepInfo {
    pub max_krylov_iterations: usize,
    pub total_krylov_iterations: usize,
    pub nonlinear_iterations: usize,
}

/// base + dt·Σ_j coef_j·v_j, summed in `terms` order.
fn accumulate(base: &[f64], dt: f64, terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = base.to_vec();
    if terms.iter().all(|(c, _)| *c == 0.0) {
        return out;
    }
    for (k, o) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        for (c, v) in terms {
            if *c != 0.0 {
                s += c * v[k];
            }
        }
        *o += dt * s;
    }
    out
}

fn stage_err(stage: usize, e: Error) -> Error {
    Error::Stage { stage: stage + 1, source: Box::new(e) }
}

/// Stage data of one Ω₁ IMEX step.
struct ImplicitStages {
    r1: Vec<Vec<f64>>,
    q1_new: Vec<f64>,
}

/// Stage loop for Ω₁. `partner(i)` returns Ω₂'s state at stage `i`
/// (computed before Ω₁'s stage solve); `on_stage` receives the stage
/// exchange so that a tightly coupled partner can reuse it.
#[allow(clippy::too_many_arguments)]
fn implicit_domain_step<S, P, F>(
    sys: &S,
    tab: &IMEXTableau,
    cfg: &CouplingConfig,
    q1n: &[f64],
    dt: f64,
    ex0: S::Exchange,
    mut partner: P,
    mut on_stage: F,
    info: &mut StepInfo,
) -> Result<ImplicitStages>
where
    S: CoupledSystem,
    P: FnMut(usize) -> Result<Vec<f64>>,
    F: FnMut(usize, &S::Exchange) -> Result<()>,
{
    let s = tab.s;
    let explicit = tab.is_explicit();
    let mut r1: Vec<Vec<f64>> = Vec::with_capacity(s);
    let mut nn: Vec<Vec<f64>> = Vec::with_capacity(s);
    let mut ll: Vec<Vec<f64>> = Vec::with_capacity(s);
    let mut ex_prev = ex0;
    let nonlinear = matches!(cfg.stiff, StiffTreatment::Nonlinear { .. }) && !explicit;

    for i in 0..s {
        let q2i = partner(i).map_err(|e| stage_err(i, e))?;
        let (q1i, op) = if explicit {
            let terms: Vec<(f64, &[f64])> = (0..i).map(|j| (tab.a[i][j], r1[j].as_slice())).collect();
            (accumulate(q1n, dt, &terms), None)
        } else if nonlinear {
            let terms: Vec<(f64, &[f64])> = (0..i).map(|j| (tab.a_tilde[i][j], r1[j].as_slice())).collect();
            let check = accumulate(q1n, dt, &terms);
            let alpha = dt * tab.a_tilde[i][i];
            let op = sys.linearize(&check, &ex_prev).map_err(|e| stage_err(i, e))?;
            let mut q = check.clone();
            if alpha != 0.0 {
                let StiffTreatment::Nonlinear { max_iterations, tolerance } = cfg.stiff else { unreachable!() };
                let scale = check.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
                let mut converged = false;
                for _ in 0..max_iterations.max(1) {
                    let ex = sys.exchange(&q, &q2i).map_err(|e| stage_err(i, e))?;
                    let rq = sys.rhs1(&q, &ex).map_err(|e| stage_err(i, e))?;
                    let g: Vec<f64> = (0..q.len()).map(|k| check[k] + alpha * rq[k] - q[k]).collect();
                    let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if gn <= tolerance * scale {
                        converged = true;
                        break;
                    }
                    let sol = sys.op_solve(&op, alpha, &g).map_err(|e| stage_err(i, e))?;
                    info.max_krylov_iterations = info.max_krylov_iterations.max(sol.iterations);
                    info.total_krylov_iterations += sol.iterations;
                    info.nonlinear_iterations += 1;
                    for k in 0..q.len() {
                        q[k] += sol.x[k];
                    }
                }
                if !converged {
                    let ex = sys.exchange(&q, &q2i).map_err(|e| stage_err(i, e))?;
                    let rq = sys.rhs1(&q, &ex).map_err(|e| stage_err(i, e))?;
                    let gn = (0..q.len()).map(|k| (check[k] + alpha * rq[k] - q[k]).powi(2)).sum::<f64>().sqrt();
                    if gn > tolerance * scale {
                        return Err(stage_err(i, Error::SolverFailure { iterations: max_iterations, residual: gn, target: tolerance * scale }));
                    }
                }
            }
            (q, Some(op))
        } else {
            let mut terms: Vec<(f64, &[f64])> = Vec::with_capacity(2 * i);
            for j in 0..i {
                terms.push((tab.a[i][j], nn[j].as_slice()));
                terms.push((tab.a_tilde[i][j], ll[j].as_slice()));
            }
            let check = accumulate(q1n, dt, &terms);
            let op = sys.linearize(&check, &ex_prev).map_err(|e| stage_err(i, e))?;
            let alpha = dt * tab.a_tilde[i][i];
            let q = if alpha != 0.0 {
                let sol = sys.op_solve(&op, alpha, &check).map_err(|e| stage_err(i, e))?;
                info.max_krylov_iterations = info.max_krylov_iterations.max(sol.iterations);
                info.total_krylov_iterations += sol.iterations;
                sol.x
            } else {
                check
            };
            (q, Some(op))
        };
        let ex = sys.exchange(&q1i, &q2i).map_err(|e| stage_err(i, e))?;
        let r = sys.rhs1(&q1i, &ex).map_err(|e| stage_err(i, e))?;
        on_stage(i, &ex).map_err(|e| stage_err(i, e))?;
        if let (Some(op), false) = (op, nonlinear) {
            let l = sys.op_apply(&op, &q1i).map_err(|e| stage_err(i, e))?;
            let n: Vec<f64> = r.iter().zip(&l).map(|(a, b)| a - b).collect();
            nn.push(n);
            ll.push(l);
        }
        r1.push(r);
        ex_prev = ex;
    }

    let q1_new = if explicit || nonlinear {
        let terms: Vec<(f64, &[f64])> = (0..s).map(|i| (tab.b_tilde[i], r1[i].as_slice())).collect();
        accumulate(q1n, dt, &terms)
    } else {
        let mut terms: Vec<(f64, &[f64])> = Vec::with_capacity(2 * s);
        for i in 0..s {
            terms.push((tab.b[i], nn[i].as_slice()));
            terms.push((tab.b_tilde[i], ll[i].as_slice()));
        }
        accumulate(q1n, dt, &terms)
    };
    Ok(ImplicitStages { r1, q1_new })
}

/// One tightly coupled step (exchange at every stage).
pub fn step_tight_raw<S: CoupledSystem>(
    sys: &S,
    tab: &IMEXTableau,
    cfg: &CouplingConfig,
    q1n: &[f64],
    q2n: &[f64],
    dt: f64,
) -> Result<(Vec<f64>, Vec<f64>, StepInfo)> {
    let mut info = StepInfo::default();
    let ex0 = sys.exchange(q1n, q2n)?;
    let mut r2: Vec<Vec<f64>> = Vec::with_capacity(tab.s);
    let mut q2_stage: Vec<f64> = Vec::new();
    let r2_ref = std::cell::RefCell::new(&mut r2);
    let q2s = std::cell::RefCell::new(&mut q2_stage);
    let stages = implicit_domain_step(
        sys,
        tab,
        cfg,
        q1n,
        dt,
        ex0,
        |i| {
            let r2 = r2_ref.borrow();
            let terms: Vec<(f64, &[f64])> = (0..i).map(|j| (tab.a[i][j], r2[j].as_slice())).collect();
            let q = accumulate(q2n, dt, &terms);
            **q2s.borrow_mut() = q.clone();
            Ok(q)
        },
        |_, ex| {
            let q = q2s.borrow();
            let r = sys.rhs2(&q, ex)?;
            r2_ref.borrow_mut().push(r);
            Ok(())
        },
        &mut info,
    )?;
    let terms: Vec<(f64, &[f64])> = (0..tab.s).map(|i| (tab.b[i], r2[i].as_slice())).collect();
    let q2_new = accumulate(q2n, dt, &terms);
    Ok((stages.q1_new, q2_new, info))
}

/// Dense-output state qⁿ + Δt Σ B*_i(θ) R_i.
pub fn dense_output(qn: &[f64], stage_rhs: &[Vec<f64>], tab: &IMEXTableau, theta: f64, dt: f64) -> Result<Vec<f64>> {
    let w = tab
        .dense_weights(theta)?
        .ok_or_else(|| Error::Parameter(format!("scheme {} has no dense output", tab.name)))?;
    if stage_rhs.len() != tab.s {
        return Err(Error::Mismatch(format!("{} stage vectors for a {}-stage scheme", stage_rhs.len(), tab.s)));
    }
    let terms: Vec<(f64, &[f64])> = w.iter().zip(stage_rhs).map(|(c, v)| (*c, v.as_slice())).collect();
    Ok(accumulate(qn, dt, &terms))
}

/// One loosely coupled step: Ω₁ takes one IMEX step with Ω₂ frozen at tⁿ,
/// then Ω₂ takes `ns` explicit substeps with Ω₁ interpolated (sequential)
/// or frozen at tⁿ (concurrent).
pub fn step_loose_raw<S: CoupledSystem>(
    sys: &S,
    tab: &IMEXTableau,
    cfg: &CouplingConfig,
    q1n: &[f64],
    q2n: &[f64],
    dt: f64,
) -> Result<(Vec<f64>, Vec<f64>, StepInfo)> {
    let (ns, sequential) = match cfg.mode {
        CouplingMode::Concurrent(n) => (n, false),
        CouplingMode::Sequential(n) => (n, true),
        CouplingMode::Tight => return Err(Error::Parameter("loose step requested for tight coupling".into())),
    };
    if ns == 0 {
        return Err(Error::Parameter("substeps must be at least 1".into()));
    }
    let mut info = StepInfo::default();
    let ex0 = sys.exchange(q1n, q2n)?;
    let stages = implicit_domain_step(sys, tab, cfg, q1n, dt, ex0, |_| Ok(q2n.to_vec()), |_, _| Ok(()), &mut info)?;

    if sequential && tab.bstar.is_none() {
        warn!("scheme {} has no dense output; sequential coupling falls back to linear interpolation (first order)", tab.name);
    }
    let dt2 = dt / ns as f64;
    let mut q2 = q2n.to_vec();
    for k in 0..ns {
        let mut r2: Vec<Vec<f64>> = Vec::with_capacity(tab.s);
        for i in 0..tab.s {
            let terms: Vec<(f64, &[f64])> = (0..i).map(|j| (tab.a[i][j], r2[j].as_slice())).collect();
            let q2i = accumulate(&q2, dt2, &terms);
            let q1_star = if sequential {
                let theta = ((k as f64 + tab.c[i]) / ns as f64).clamp(0.0, 1.0);
                if tab.bstar.is_some() {
                    dense_output(q1n, &stages.r1, tab, theta, dt)?
                } else {
                    q1n.iter().zip(&stages.q1_new).map(|(a, b)| (1.0 - theta) * a + theta * b).collect()
                }
            } else {
                q1n.to_vec()
            };
            let ex = sys.exchange(&q1_star, &q2i).map_err(|e| stage_err(i, e))?;
            r2.push(sys.rhs2(&q2i, &ex).map_err(|e| stage_err(i, e))?);
        }
        let terms: Vec<(f64, &[f64])> = (0..tab.s).map(|i| (tab.b[i], r2[i].as_slice())).collect();
        q2 = accumulate(&q2, dt2, &terms);
    }
    Ok((stages.q1_new, q2, info))
}

/// Discretisation of one subdomain.
#[derive(Debug, Clone, PartialEq)]
pub struct Subdomain {
    pub grid: StructuredGrid2D,
    pub params: FluidParams,
    pub bcs: BoundarySet,
    pub stencil: GradientStencil,
}

impl Subdomain {
    fn field(&self, data: &[f64]) -> ConservedField {
        ConservedField { grid: self.grid, params: self.params, data: data.to_vec() }
    }
}

/// The finite-volume two-domain system: Ω₁ below the interface, Ω₂ above.
/// Single-domain problems leave `upper` empty.
#[derive(Debug, Clone)]
pub struct FvSystem {
    pub lower: Subdomain,
    pub upper: Option<Subdomain>,
    pub operator: LinearOperatorKind,
    pub krylov_tol: f64,
    pub gmres: GmresParams,
}

impl FvSystem {
    pub fn validate(&self) -> Result<()> {
        self.lower.bcs.validate()?;
        match &self.upper {
            Some(up) => {
                up.bcs.validate()?;
                if !matches!(self.lower.bcs.top, crate::boundary::BoundarySpec::Interface)
                    || !matches!(up.bcs.bottom, crate::boundary::BoundarySpec::Interface)
                {
                    return Err(Error::Boundary("two-domain runs need the interface on top of Ω₁ and at the bottom of Ω₂".into()));
                }
                if !self.lower.grid.conforms_in_x(&up.grid) {
                    return Err(Error::Mismatch("subdomain grids do not conform at the interface".into()));
                }
            }
            None => {
                if self.lower.bcs.has_interface() {
                    return Err(Error::Boundary("interface closure without an upper subdomain".into()));
                }
            }
        }
        Ok(())
    }
}

impl CoupledSystem for FvSystem {
    type Exchange = Option<InterfaceExchange>;
    type Op = LinearOperator;

    fn exchange(&self, q1: &[f64], q2: &[f64]) -> Result<Self::Exchange> {
        match &self.upper {
            Some(up) => Ok(Some(InterfaceExchange::compute(&self.lower.field(q1), &up.field(q2))?)),
            None => Ok(None),
        }
    }

    fn rhs1(&self, q1: &[f64], ex: &Self::Exchange) -> Result<Vec<f64>> {
        let d = &self.lower;
        let w = ex.as_ref().map(|e| e.wall(Side::Lower));
        assemble_rhs_with(&d.field(q1), &d.bcs, w, d.stencil, Terms::ALL)
            .map(|r| r.data)
            .map_err(|e| Error::Subdomain { index: 1, source: Box::new(e) })
    }

    fn rhs2(&self, q2: &[f64], ex: &Self::Exchange) -> Result<Vec<f64>> {
        match &self.upper {
            Some(d) => {
                let w = ex.as_ref().map(|e| e.wall(Side::Upper));
                assemble_rhs_with(&d.field(q2), &d.bcs, w, d.stencil, Terms::ALL)
                    .map(|r| r.data)
                    .map_err(|e| Error::Subdomain { index: 2, source: Box::new(e) })
            }
            None => Ok(Vec::new()),
        }
    }

    fn linearize(&self, reference: &[f64], ex: &Self::Exchange) -> Result<Self::Op> {
        let d = &self.lower;
        let w = ex.as_ref().map(|e| e.wall(Side::Lower));
        LinearOperator::new(self.operator, &d.field(reference), &d.bcs, w, d.stencil)
    }

    fn op_apply(&self, op: &Self::Op, x: &[f64]) -> Result<Vec<f64>> {
        op.apply(x)
    }

    fn op_solve(&self, op: &Self::Op, alpha: f64, b: &[f64]) -> Result<StageSolution> {
        op.solve(alpha, b, self.krylov_tol, self.gmres)
    }
}

/// State of the coupled problem.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledState {
    pub q1: ConservedField,
    pub q2: Option<ConservedField>,
    pub time: f64,
}

impl CoupledState {
    pub fn q2_data(&self) -> &[f64] {
        self.q2.as_ref().map(|f| f.data.as_slice()).unwrap_or(&[])
    }
}

/// Advances the state by one step of size `dt` with the configured mode.
pub fn step<S: CoupledSystem>(sys: &S, state: &CoupledState, cfg: &CouplingConfig, tab: &IMEXTableau, dt: f64) -> Result<(CoupledState, StepInfo)> {
    let (q1, q2, info) = match cfg.mode {
        CouplingMode::Tight => step_tight_raw(sys, tab, cfg, &state.q1.data, state.q2_data(), dt)?,
        _ => step_loose_raw(sys, tab, cfg, &state.q1.data, state.q2_data(), dt)?,
    };
    let next = CoupledState {
        q1: state.q1.with_data(q1),
        q2: state.q2.as_ref().map(|f| f.with_data(q2)),
        time: state.time + dt,
    };
    Ok((next, info))
}

/// One tightly coupled step of the finite-volume system.
pub fn step_tight(sys: &FvSystem, state: &CoupledState, cfg: &CouplingConfig, tab: &IMEXTableau) -> Result<CoupledState> {
    let mut c = cfg.clone();
    c.mode = CouplingMode::Tight;
    Ok(step(sys, state, &c, tab, cfg.dt)?.0)
}

/// One loosely coupled step of the finite-volume system.
pub fn step_loose(sys: &FvSystem, state: &CoupledState, cfg: &CouplingConfig, tab: &IMEXTableau) -> Result<CoupledState> {
    if cfg.mode == CouplingMode::Tight {
        return Err(Error::Parameter("loose step requested for tight coupling".into()));
    }
    Ok(step(sys, state, cfg, tab, cfg.dt)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tableau::tableau;

    /// R₁ = λ₁q₁, R₂ = λ₂q₂, with the exact linear operator L = λ₁.
    struct Scalar {
        l1: f64,
        l2: f64,
    }

    impl CoupledSystem for Scalar {
        type Exchange = ();
        type Op = f64;
        fn exchange(&self, _: &[f64], _: &[f64]) -> Result<()> {
            Ok(())
        }
        fn rhs1(&self, q: &[f64], _: &()) -> Result<Vec<f64>> {
            Ok(q.iter().map(|v| self.l1 * v).collect())
        }
        fn rhs2(&self, q: &[f64], _: &()) -> Result<Vec<f64>> {
            Ok(q.iter().map(|v| self.l2 * v).collect())
        }
        fn linearize(&self, _: &[f64], _: &()) -> Result<f64> {
            Ok(self.l1)
        }
        fn op_apply(&self, op: &f64, x: &[f64]) -> Result<Vec<f64>> {
            Ok(x.iter().map(|v| op * v).collect())
        }
        fn op_solve(&self, op: &f64, alpha: f64, b: &[f64]) -> Result<StageSolution> {
            Ok(StageSolution { x: b.iter().map(|v| v / (1.0 - alpha * op)).collect(), iterations: 1, residual: 0.0 })
        }
    }

    fn cfg(mode: CouplingMode) -> CouplingConfig {
        CouplingConfig { mode, ..Default::default() }
    }

    #[test]
    fn ark2_scalar_recurrence() {
        let t = tableau("ark2").unwrap();
        let sys = Scalar { l1: -10.0, l2: -1.0 };
        let dt = 0.1;
        let (q1, q2, _) = step_tight_raw(&sys, &t, &cfg(CouplingMode::Tight), &[1.0], &[1.0], dt).unwrap();
        // hand recurrence: Ω₁ fully implicit through ã (N ≡ 0), Ω₂ explicit through a
        let at = &t.a_tilde;
        let mut y = [0.0; 3];
        for i in 0..3 {
            let mut s = 1.0;
            for j in 0..i {
                s += dt * at[i][j] * (-10.0) * y[j];
            }
            y[i] = s / (1.0 - dt * at[i][i] * (-10.0));
        }
        let ex1 = 1.0 + dt * (0..3).map(|i| t.b[i] * (-10.0) * y[i]).sum::<f64>();
        let a = &t.a;
        let mut z = [0.0; 3];
        for i in 0..3 {
            z[i] = 1.0 + dt * (0..i).map(|j| a[i][j] * (-1.0) * z[j]).sum::<f64>();
        }
        let ex2 = 1.0 + dt * (0..3).map(|i| t.b[i] * (-1.0) * z[i]).sum::<f64>();
        assert!((q1[0] - ex1).abs() < 1e-14, "{} vs {}", q1[0], ex1);
        assert!((q2[0] - ex2).abs() < 1e-14);
    }

    #[test]
    fn explicit_limit_is_bit_identical() {
        let ark = tableau("ark3").unwrap().with_implicit_zeroed();
        let mut rk = ark.clone();
        rk.name = "rk-from-ark3".into();
        let sys = Scalar { l1: -3.0, l2: -0.5 };
        let a = step_tight_raw(&sys, &ark, &cfg(CouplingMode::Tight), &[0.7, 0.2], &[1.3], 0.05).unwrap();
        let b = step_tight_raw(&sys, &rk, &cfg(CouplingMode::Tight), &[0.7, 0.2], &[1.3], 0.05).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
        // and it is the plain RK update of the monolithic system
        let rk3 = tableau("rk3").unwrap();
        let c = step_tight_raw(&sys, &rk3, &cfg(CouplingMode::Tight), &[0.7], &[1.3], 0.05).unwrap();
        let h = 0.05;
        let f = |y: f64| -3.0 * y;
        let k1 = f(0.7);
        let k2 = f(0.7 + 0.5 * h * k1);
        let k3 = f(0.7 + h * (-k1 + 2.0 * k2));
        let expect = 0.7 + h * (k1 / 6.0 + 2.0 * k2 / 3.0 + k3 / 6.0);
        assert!((c.0[0] - expect).abs() < 1e-15);
    }

    #[test]
    fn zero_rhs_leaves_state() {
        let sys = Scalar { l1: 0.0, l2: 0.0 };
        for name in ["rk4", "ark2", "ark4"] {
            let t = tableau(name).unwrap();
            for mode in [CouplingMode::Tight, CouplingMode::Concurrent(1), CouplingMode::Sequential(3)] {
                let (a, b, _) = step(&sys, &scalar_state(), &cfg(mode), &t, 0.1).map(|(s, i)| (s.q1.data, s.q2.unwrap().data, i)).unwrap();
                assert_eq!(a, vec![2.0]);
                assert_eq!(b, vec![3.0]);
            }
        }
    }

    fn scalar_state() -> CoupledState {
        let g = StructuredGrid2D::new(1, 1, (0.0, 1.0), (0.0, 1.0)).unwrap();
        let p = FluidParams::air(0.0);
        CoupledState {
            q1: ConservedField { grid: g, params: p, data: vec![2.0] },
            q2: Some(ConservedField { grid: g, params: p, data: vec![3.0] }),
            time: 0.0,
        }
    }

    #[test]
    fn dense_output_endpoints() {
        let t = tableau("ark2").unwrap();
        let qn = vec![1.0, -2.0];
        let r = vec![vec![0.3, 0.1], vec![-0.2, 0.5], vec![0.7, 0.9]];
        assert_eq!(dense_output(&qn, &r, &t, 0.0, 0.1).unwrap(), qn);
        let end = dense_output(&qn, &r, &t, 1.0, 0.1).unwrap();
        for k in 0..2 {
            let upd = qn[k] + 0.1 * (0..3).map(|i| t.b[i] * r[i][k]).sum::<f64>();
            assert!((end[k] - upd).abs() < 1e-13);
        }
        assert!(matches!(dense_output(&qn, &r, &t, -0.1, 0.1), Err(Error::Range(_))));
        assert!(dense_output(&qn, &r, &tableau("rk4").unwrap(), 0.5, 0.1).is_err());
    }

    #[test]
    fn constant_rhs_dense_output_is_linear() {
        let t = tableau("ark3").unwrap();
        let r = vec![vec![2.0]; 4];
        for th in [0.0, 0.25, 0.6, 1.0] {
            let v = dense_output(&[1.0], &r, &t, th, 0.5).unwrap();
            assert!((v[0] - (1.0 + 0.5 * 2.0 * th)).abs() < 1e-13);
        }
    }

    #[test]
    fn loose_substeps_follow_partner() {
        // Ω₂ substeps only depend on its own state for the scalar system, so
        // Ns substeps of size Δt/Ns equal Ns explicit steps.
        let t = tableau("ark2").unwrap();
        let sys = Scalar { l1: -1.0, l2: -2.0 };
        let (_, q2, _) = step_loose_raw(&sys, &t, &cfg(CouplingMode::Sequential(2)), &[1.0], &[1.0], 0.2).unwrap();
        let mut y = vec![1.0];
        for _ in 0..2 {
            let ex = tableau("ark2").unwrap().with_implicit_zeroed();
            let (_, b, _) = step_tight_raw(&sys, &ex, &cfg(CouplingMode::Tight), &[0.0], &y, 0.1).unwrap();
            y = b;
        }
        assert!((q2[0] - y[0]).abs() < 1e-15);
    }

    #[test]
    fn nonlinear_mode_converges_on_linear_problem() {
        let t = tableau("ark2").unwrap();
        let sys = Scalar { l1: -10.0, l2: -1.0 };
        let mut c = cfg(CouplingMode::Tight);
        c.stiff = StiffTreatment::Nonlinear { max_iterations: 5, tolerance: 1e-13 };
        let (q1, _, info) = step_tight_raw(&sys, &t, &c, &[1.0], &[1.0], 0.1).unwrap();
        let (q1l, _, _) = step_tight_raw(&sys, &t, &cfg(CouplingMode::Tight), &[1.0], &[1.0], 0.1).unwrap();
        assert!((q1[0] - q1l[0]).abs() < 1e-13);
        assert!(info.nonlinear_iterations >= 1);
    }

    #[test]
    fn method_names() {
        let c = CouplingConfig { scheme: "ark2".into(), mode: CouplingMode::Sequential(2), ..Default::default() };
        assert_eq!(c.method_name(&tableau("ark2").unwrap()), "ARK2(Lᶻ,SC2)");
        let c = CouplingConfig { scheme: "rk4".into(), ..Default::default() };
        assert_eq!(c.method_name(&tableau("rk4").unwrap()), "RK4");
    }
}
