//! Error norms, observed orders, conservation audits and Courant numbers.

use crate::coupling::CoupledState;
use crate::error::{Error, Result};
use crate::state::{checked_primitive, ConservedField, NVAR};

/// Cell-measure-weighted L2 errors. Momentum combines both components.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorReport {
    pub rho: f64,
    pub momentum: f64,
    pub energy: f64,
    pub h: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct SquaredErrors {
    rho: f64,
    mom: f64,
    energy: f64,
}

fn accumulate_sq(q: &ConservedField, r: &ConservedField, acc: &mut SquaredErrors) -> Result<()> {
    if q.grid != r.grid {
        return Err(Error::Mismatch("error norm needs identical grids".into()));
    }
    let m = q.grid.cell_measure();
    for k in 0..q.grid.cell_count() {
        let a = q.cell(k);
        let b = r.cell(k);
        acc.rho += m * (a[0] - b[0]).powi(2);
        acc.mom += m * ((a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2));
        acc.energy += m * (a[3] - b[3]).powi(2);
    }
    Ok(())
}

/// L2 error of one field against a reference on the same grid.
pub fn l2_error(q: &ConservedField, q_ref: &ConservedField) -> Result<ErrorReport> {
    let mut acc = SquaredErrors::default();
    accumulate_sq(q, q_ref, &mut acc)?;
    Ok(ErrorReport {
        rho: acc.rho.sqrt(),
        momentum: acc.mom.sqrt(),
        energy: acc.energy.sqrt(),
        h: q.grid.dx.min(q.grid.dz),
        dt: 0.0,
    })
}

/// L2 error over both subdomains of a coupled state.
pub fn l2_error_coupled(q: &CoupledState, q_ref: &CoupledState) -> Result<ErrorReport> {
    let mut acc = SquaredErrors::default();
    accumulate_sq(&q.q1, &q_ref.q1, &mut acc)?;
    match (&q.q2, &q_ref.q2) {
        (Some(a), Some(b)) => accumulate_sq(a, b, &mut acc)?,
        (None, None) => {}
        _ => return Err(Error::Mismatch("one state has an upper subdomain, the other not".into())),
    }
    Ok(ErrorReport {
        rho: acc.rho.sqrt(),
        momentum: acc.mom.sqrt(),
        energy: acc.energy.sqrt(),
        h: q.q1.grid.dx.min(q.q1.grid.dz),
        dt: 0.0,
    })
}

/// log(e_prev / e) / log(ratio).
pub fn observed_order(e_prev: f64, e: f64, ratio: f64) -> Result<f64> {
    if !(e_prev > 0.0) || !(e > 0.0) {
        return Err(Error::UndefinedOrder(format!("errors must be positive, got {e_prev:e} and {e:e}")));
    }
    if !(ratio > 0.0) || ratio == 1.0 {
        return Err(Error::UndefinedOrder(format!("refinement ratio {ratio} is degenerate")));
    }
    Ok((e_prev / e).ln() / ratio.ln())
}

/// Orders for a refinement series; `ratios[k]` relates entries k and k+1.
pub fn observed_orders(errors: &[f64], ratios: &[f64]) -> Result<Vec<f64>> {
    if errors.len() < 2 {
        return Err(Error::UndefinedOrder("need at least two errors".into()));
    }
    if ratios.len() != errors.len() - 1 {
        return Err(Error::Mismatch(format!("{} errors need {} ratios, got {}", errors.len(), errors.len() - 1, ratios.len())));
    }
    errors.windows(2).zip(ratios).map(|(w, r)| observed_order(w[0], w[1], *r)).collect()
}

/// Σ ρ|K| over one field, ascending cell order.
pub fn mass(field: &ConservedField) -> f64 {
    component_sum(field, 0)
}

/// Σ ρE|K| over one field, ascending cell order.
pub fn energy(field: &ConservedField) -> f64 {
    component_sum(field, 3)
}

fn component_sum(field: &ConservedField, v: usize) -> f64 {
    let mut s = 0.0;
    for k in 0..field.grid.cell_count() {
        s += field.data[k * NVAR + v];
    }
    s * field.grid.cell_measure()
}

/// Conservation totals at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservationSample {
    pub time: f64,
    pub mass1: f64,
    pub mass2: f64,
    pub energy: f64,
}

impl ConservationSample {
    pub fn total_mass(&self) -> f64 {
        self.mass1 + self.mass2
    }
}

pub fn conservation_sample(state: &CoupledState) -> ConservationSample {
    let (m2, e2) = state.q2.as_ref().map(|f| (mass(f), energy(f))).unwrap_or((0.0, 0.0));
    ConservationSample { time: state.time, mass1: mass(&state.q1), mass2: m2, energy: energy(&state.q1) + e2 }
}

/// Time series of conservation samples with relative losses against the
/// first sample.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConservationSeries {
    pub samples: Vec<ConservationSample>,
}

impl ConservationSeries {
    pub fn push(&mut self, s: ConservationSample) -> Result<()> {
        if let Some(last) = self.samples.last() {
            if !(s.time > last.time) {
                return Err(Error::Parameter(format!("sample time {} does not follow {}", s.time, last.time)));
            }
        }
        self.samples.push(s);
        Ok(())
    }

    fn first(&self) -> Option<&ConservationSample> {
        self.samples.first()
    }

    fn relative(now: f64, then: f64) -> f64 {
        if then == 0.0 {
            now - then
        } else {
            (now - then) / then.abs()
        }
    }

    pub fn mass_loss(&self, s: &ConservationSample) -> f64 {
        self.first().map(|f| Self::relative(s.total_mass(), f.total_mass())).unwrap_or(0.0)
    }

    pub fn energy_loss(&self, s: &ConservationSample) -> f64 {
        self.first().map(|f| Self::relative(s.energy, f.energy)).unwrap_or(0.0)
    }

    /// Largest relative drift of (total, Ω₁, Ω₂) mass over the series.
    pub fn max_mass_drift(&self) -> (f64, f64, f64) {
        let Some(f) = self.first() else { return (0.0, 0.0, 0.0) };
        let mut d = (0.0f64, 0.0f64, 0.0f64);
        for s in &self.samples {
            d.0 = d.0.max(Self::relative(s.total_mass(), f.total_mass()).abs());
            d.1 = d.1.max(Self::relative(s.mass1, f.mass1).abs());
            d.2 = d.2.max(Self::relative(s.mass2, f.mass2).abs());
        }
        d
    }
}

/// max over cells of (a + |u|)·dt / min(dx, dz).
pub fn courant_number(field: &ConservedField, dt: f64) -> Result<f64> {
    let g = field.params.gamma;
    let h = field.grid.dx.min(field.grid.dz);
    let mut speed = 0.0f64;
    for k in 0..field.grid.cell_count() {
        let (rho, u, w, p) = checked_primitive(&field.cell(k), g)?;
        speed = speed.max((g * p / rho).sqrt() + (u * u + w * w).sqrt());
    }
    Ok(speed * dt / h)
}

/// Courant numbers of both subdomains; Cr₂ is 0 without an upper domain.
pub fn courant_numbers(state: &CoupledState, dt1: f64, dt2: f64) -> Result<(f64, f64)> {
    let c1 = courant_number(&state.q1, dt1)?;
    let c2 = match &state.q2 {
        Some(f) => courant_number(f, dt2)?,
        None => 0.0,
    };
    Ok((c1, c2))
}
