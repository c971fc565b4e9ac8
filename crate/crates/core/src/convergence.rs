//! Spatial and temporal convergence studies.

use rayon::prelude::*;

use crate::cases::{exact_density_wave, CaseSpec, GridSizes};
use crate::config::ResolvedConfig;
use crate::coupling::{CoupledState, CouplingConfig, CouplingMode};
use crate::diagnostics::{courant_numbers, l2_error_coupled, observed_order, ErrorReport};
use crate::error::{Error, Result};
use crate::grid::StructuredGrid2D;
use crate::run::{integrate, RunOutcome};
use crate::state::{ConservedField, NVAR};
use crate::tableau::tableau;

/// One level of a convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub method: String,
    pub h: f64,
    pub dt: f64,
    /// Courant numbers of the initial state.
    pub cr: (f64, f64),
    pub error: ErrorReport,
    /// Orders for (ρ, ρu, ρE) relative to the previous row.
    pub orders: Option<[f64; 3]>,
}

/// Fills `orders` from consecutive rows; `ratio(prev, cur)` is the
/// refinement factor between them.
pub fn attach_orders<F: Fn(&ConvergenceRow, &ConvergenceRow) -> f64>(rows: &mut [ConvergenceRow], ratio: F) {
    for k in 1..rows.len() {
        let r = ratio(&rows[k - 1], &rows[k]);
        let (a, b) = (rows[k - 1].error, rows[k].error);
        let o = |x: f64, y: f64| observed_order(x, y, r).unwrap_or(f64::NAN);
        rows[k].orders = Some([o(a.rho, b.rho), o(a.momentum, b.momentum), o(a.energy, b.energy)]);
    }
}

/// Block average of `fine` onto `coarse`; the fine grid must refine the
/// coarse one by an integer factor in both directions.
pub fn restrict(fine: &ConservedField, coarse: StructuredGrid2D) -> Result<ConservedField> {
    let fg = fine.grid;
    if fg.nx % coarse.nx != 0 || fg.nz % coarse.nz != 0 || fg.nx / coarse.nx != fg.nz / coarse.nz {
        return Err(Error::Mismatch(format!("{}x{} does not refine {}x{} uniformly", fg.nx, fg.nz, coarse.nx, coarse.nz)));
    }
    let r = fg.nx / coarse.nx;
    if (fg.x_extent().0 - coarse.x_extent().0).abs() > 1e-12 || (fg.z_extent().1 - coarse.z_extent().1).abs() > 1e-12 {
        return Err(Error::Mismatch("grids cover different regions".into()));
    }
    let w = 1.0 / (r * r) as f64;
    let mut data = vec![0.0; coarse.cell_count() * NVAR];
    for j in 0..coarse.nz {
        for i in 0..coarse.nx {
            let k = coarse.idx0(i, j);
            for b in 0..r {
                for a in 0..r {
                    let q = fine.cell(fg.idx0(i * r + a, j * r + b));
                    for v in 0..NVAR {
                        data[k * NVAR + v] += w * q[v];
                    }
                }
            }
        }
    }
    ConservedField::from_data(coarse, fine.params, data)
}

/// Runs `case` on `grid` with `coupling` up to `t_end`.
pub fn run_case(case: &CaseSpec, grid: GridSizes, coupling: &CouplingConfig, t_end: f64) -> Result<RunOutcome> {
    let tab = tableau(&coupling.scheme)?;
    let sys = case.system(grid, coupling.operator, coupling.krylov_tol, coupling.gmres())?;
    let init = case.init(grid)?;
    integrate(&sys, init, coupling, &tab, t_end, |_, _| Ok(()))
}

fn refine(n: GridSizes, f: usize) -> GridSizes {
    GridSizes { nx: n.nx * f, nz1: n.nz1 * f, nz2: n.nz2 * f }
}

fn restrict_state(fine: &CoupledState, coarse: &CoupledState) -> Result<CoupledState> {
    let q1 = restrict(&fine.q1, coarse.q1.grid)?;
    let q2 = match (&fine.q2, &coarse.q2) {
        (Some(f), Some(c)) => Some(restrict(f, c.grid)?),
        _ => None,
    };
    Ok(CoupledState { q1, q2, time: fine.time })
}

/// Spatial study over `levels` grids, each refined by two. The density
/// wave is compared with its exact solution; other cases with a run on
/// the grid refined once more than the finest level, block-averaged onto
/// each coarse grid.
pub fn space_study(cfg: &ResolvedConfig, levels: usize) -> Result<Vec<ConvergenceRow>> {
    space_study_with_reference(cfg, levels, 1 << levels)
}

/// As [`space_study`], with the reference grid refined by `ref_factor`
/// relative to the coarsest level (ignored for the density wave).
pub fn space_study_with_reference(cfg: &ResolvedConfig, levels: usize, ref_factor: usize) -> Result<Vec<ConvergenceRow>> {
    if levels == 0 {
        return Err(Error::Parameter("at least one level is needed".into()));
    }
    let method = cfg.method_name()?;
    let exact = matches!(cfg.case, CaseSpec::DensityWave(_));
    let mut jobs: Vec<GridSizes> = (0..levels).map(|k| refine(cfg.grid, 1 << k)).collect();
    if !exact {
        if ref_factor < (1 << (levels - 1)) * 2 {
            return Err(Error::Parameter("reference grid must be finer than the finest level".into()));
        }
        jobs.push(refine(cfg.grid, ref_factor));
    }
    let outcomes: Vec<Result<RunOutcome>> = jobs.par_iter().map(|g| run_case(&cfg.case, *g, &cfg.coupling, cfg.t_end)).collect();
    let outcomes: Vec<RunOutcome> = outcomes.into_iter().collect::<Result<_>>()?;
    let reference = if exact { None } else { outcomes.last() };
    let mut rows = Vec::with_capacity(levels);
    for out in outcomes.iter().take(levels) {
        let st = &out.state;
        let err = match (&cfg.case, reference) {
            (CaseSpec::DensityWave(dw), _) => {
                let ex = exact_density_wave(st.time, st.q1.grid, dw)?;
                l2_error_coupled(st, &CoupledState { q1: ex, q2: None, time: st.time })?
            }
            (_, Some(r)) => l2_error_coupled(st, &restrict_state(&r.state, st)?)?,
            _ => unreachable!(),
        };
        let g = st.q1.grid;
        rows.push(ConvergenceRow {
            method: method.clone(),
            h: g.dx.min(g.dz),
            dt: cfg.coupling.dt,
            cr: (out.rows[0].cr1, out.rows[0].cr2),
            error: ErrorReport { dt: cfg.coupling.dt, ..err },
            orders: None,
        });
    }
    attach_orders(&mut rows, |a, b| a.h / b.h);
    Ok(rows)
}

/// RK4 tight-coupling reference at `dt_ref` on the configured grid.
pub fn time_reference(cfg: &ResolvedConfig, dt_ref: f64) -> Result<CoupledState> {
    let c = CouplingConfig { scheme: "rk4".into(), mode: CouplingMode::Tight, dt: dt_ref, ..cfg.coupling.clone() };
    Ok(run_case(&cfg.case, cfg.grid, &c, cfg.t_end)?.state)
}

/// Temporal study: the configured method at each `dts` against `reference`.
pub fn time_study_against(cfg: &ResolvedConfig, dts: &[f64], reference: &CoupledState) -> Result<Vec<ConvergenceRow>> {
    let method = cfg.method_name()?;
    let init = cfg.case.init(cfg.grid)?;
    let results: Vec<Result<ConvergenceRow>> = dts
        .par_iter()
        .map(|&dt| {
            let c = CouplingConfig { dt, ..cfg.coupling.clone() };
            let out = run_case(&cfg.case, cfg.grid, &c, cfg.t_end)?;
            let err = l2_error_coupled(&out.state, reference)?;
            let cr = courant_numbers(&init, dt, dt / c.mode.substeps() as f64)?;
            let g = init.q1.grid;
            Ok(ConvergenceRow { method: method.clone(), h: g.dx.min(g.dz), dt, cr, error: ErrorReport { dt, ..err }, orders: None })
        })
        .collect();
    let mut rows: Vec<ConvergenceRow> = results.into_iter().collect::<Result<_>>()?;
    attach_orders(&mut rows, |a, b| a.dt / b.dt);
    Ok(rows)
}

/// Temporal study over `levels` timesteps halving from the configured one.
pub fn time_study(cfg: &ResolvedConfig, levels: usize) -> Result<Vec<ConvergenceRow>> {
    if levels == 0 {
        return Err(Error::Parameter("at least one level is needed".into()));
    }
    let dts: Vec<f64> = (0..levels).map(|k| cfg.coupling.dt / (1u64 << k) as f64).collect();
    let reference = time_reference(cfg, cfg.reference_dt)?;
    time_study_against(cfg, &dts, &reference)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::FluidParams;

    #[test]
    fn restriction_of_linear_field_is_exact_at_centers() {
        let fine = StructuredGrid2D::new(8, 8, (0.0, 1.0), (0.0, 1.0)).unwrap();
        let coarse = StructuredGrid2D::new(4, 4, (0.0, 1.0), (0.0, 1.0)).unwrap();
        let mut data = Vec::new();
        for j in 0..8 {
            for i in 0..8 {
                let (x, z) = fine.center0(i, j);
                data.extend_from_slice(&[1.0 + x + 2.0 * z, 0.0, 0.0, 3.0]);
            }
        }
        let f = ConservedField::from_data(fine, FluidParams::air(0.0), data).unwrap();
        let c = restrict(&f, coarse).unwrap();
        for j in 0..4 {
            for i in 0..4 {
                let (x, z) = coarse.center0(i, j);
                assert!((c.cell(coarse.idx0(i, j))[0] - (1.0 + x + 2.0 * z)).abs() < 1e-14);
            }
        }
        assert!(restrict(&f, StructuredGrid2D::new(3, 3, (0.0, 1.0), (0.0, 1.0)).unwrap()).is_err());
    }

    #[test]
    fn orders_from_rows() {
        let row = |dt: f64, e: f64| ConvergenceRow {
            method: "x".into(),
            h: 1.0,
            dt,
            cr: (0.0, 0.0),
            error: ErrorReport { rho: e, momentum: e, energy: e, h: 1.0, dt },
            orders: None,
        };
        let mut rows = vec![row(0.1, 4e-2), row(0.05, 1e-2)];
        attach_orders(&mut rows, |a, b| a.dt / b.dt);
        assert!(rows[0].orders.is_none());
        assert!((rows[1].orders.unwrap()[0] - 2.0).abs() < 1e-14);
    }
}
