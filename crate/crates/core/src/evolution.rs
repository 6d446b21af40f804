//! Quasi-static time stepping, equilibrium and energy-balance diagnostics, and
//! crack extraction along the film midline.

use crate::error::Result;
use crate::mesh::{Field, Mesh};
use crate::params::EnergyBreakdown;
use crate::staggered::{IrreversibilityMode, Staggered};

pub const DEFAULT_CRACK_THRESHOLD: f64 = 0.2;

/// Cracks found on the midline `y = 0`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CrackPattern {
    pub threshold: f64,
    /// Abscissae of the crack centers, increasing.
    pub centers: Vec<f64>,
    pub mean_spacing: f64,
    pub spacing_stddev: f64,
}

impl CrackPattern {
    pub fn count(&self) -> usize {
        self.centers.len()
    }

    pub fn gaps(&self) -> Vec<f64> {
        self.centers.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// Groups consecutive midline samples with `v < threshold` into cracks.
pub fn crack_pattern(mesh: &Mesh, v: &Field, threshold: f64) -> CrackPattern {
    let values = v.values();
    let mut centers = Vec::new();
    let mut group: Vec<f64> = Vec::new();
    for (x, weights) in mesh.midline() {
        let value: f64 = weights.iter().map(|&(i, w)| w * values[i]).sum();
        if value < threshold {
            group.push(x);
        } else if !group.is_empty() {
            centers.push(group.iter().sum::<f64>() / group.len() as f64);
            group.clear();
        }
    }
    if !group.is_empty() {
        centers.push(group.iter().sum::<f64>() / group.len() as f64);
    }
    let gaps: Vec<f64> = centers.windows(2).map(|w| w[1] - w[0]).collect();
    let (mean, std) = if gaps.is_empty() {
        (0.0, 0.0)
    } else {
        let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
        let var = gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / gaps.len() as f64;
        (mean, var.sqrt())
    };
    CrackPattern {
        threshold,
        centers,
        mean_spacing: mean,
        spacing_stddev: std,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub energy: EnergyBreakdown,
    pub iterations: usize,
    pub converged: bool,
    pub slope_u: f64,
    pub slope_u_scale: f64,
    pub slope_v: f64,
    pub slope_v_scale: f64,
    /// `E_k - E_{k-1} - dF/dt(t_k, u_k, v_k) dt`.
    pub balance_residual: f64,
    pub crack_count: usize,
    pub centers: Vec<f64>,
    /// `max_i (v_k - v_{k-1})`; non-positive under irreversible modes.
    pub max_v_increase: f64,
    pub solver_failures: usize,
}

impl StepRecord {
    pub fn is_event(&self, previous_count: usize) -> bool {
        self.crack_count > previous_count
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrackEvent {
    pub step: usize,
    pub t: f64,
    pub crack_count: usize,
    pub centers: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvolutionTrace {
    pub initial_energy: EnergyBreakdown,
    pub steps: Vec<StepRecord>,
    pub events: Vec<CrackEvent>,
}

impl EvolutionTrace {
    /// Time of the first crack event.
    pub fn first_event(&self) -> Option<&CrackEvent> {
        self.events.first()
    }

    /// Steps at which the crack count did not increase.
    pub fn continuity_steps(&self) -> impl Iterator<Item = &StepRecord> {
        let event_steps: Vec<usize> = self.events.iter().map(|e| e.step).collect();
        self.steps.iter().filter(move |s| !event_steps.contains(&s.step))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub u: Field,
    pub v: Field,
}

#[derive(Debug, Clone)]
pub struct EvolutionOptions {
    pub mode: IrreversibilityMode,
    pub threshold: f64,
    /// Times at which states are kept; event steps are always kept.
    pub snapshot_times: Vec<f64>,
    /// Initial state; defaults to `(0, 1)`.
    pub initial: Option<(Field, Field)>,
}

impl Default for EvolutionOptions {
    fn default() -> Self {
        Self {
            mode: IrreversibilityMode::None,
            threshold: DEFAULT_CRACK_THRESHOLD,
            snapshot_times: Vec::new(),
            initial: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionOutcome {
    pub trace: EvolutionTrace,
    pub snapshots: Vec<Snapshot>,
    pub final_state: Snapshot,
}

/// Equilibrium slopes and their scales at `(t, u, v)`.
pub fn slopes(solver: &Staggered, t: f64, u: &Field, v: &Field) -> Result<((f64, f64), (f64, f64))> {
    Ok((solver.u_slope(t, u, v)?, solver.v_slope(u, v)?))
}

/// `E_k - E_{k-1} - dF/dt(t_k, u_k, v_k) dt`.
pub fn energy_balance_residual(
    solver: &Staggered,
    previous_total: f64,
    t: f64,
    dt: f64,
    u: &Field,
    v: &Field,
) -> Result<f64> {
    let e = solver.energy(t, u, v)?.total;
    let rate = solver.space().energy_time_derivative(t, u, solver.params(), solver.load())?;
    Ok(e - previous_total - rate * dt)
}

/// Runs `t_k = k dt` for `k = 1..=t_end/dt`. `on_step` sees each record and state.
pub fn run_evolution(
    solver: &Staggered,
    options: &EvolutionOptions,
    mut on_step: impl FnMut(&StepRecord, &Field, &Field),
) -> Result<EvolutionOutcome> {
    let space = solver.space();
    let mesh = space.mesh();
    let load = solver.load();
    let (mut u, mut v) = match &options.initial {
        Some((u, v)) => (u.clone(), v.clone()),
        None => (Field::constant(mesh, mesh.dim(), 0.0), Field::constant(mesh, 1, 1.0)),
    };
    let initial_energy = solver.energy(0.0, &u, &v)?;
    let mut trace = EvolutionTrace {
        initial_energy,
        ..Default::default()
    };
    let mut snapshots = Vec::new();
    let mut previous_total = initial_energy.total;
    let mut previous_count = crack_pattern(mesh, &v, options.threshold).count();
    let dt = load.dt;

    for k in 1..=load.steps() {
        let t = load.time(k);
        let (u_new, v_new, report) = solver.step(t, &u, &v, options.mode)?;
        let energy = solver.energy(t, &u_new, &v_new)?;
        let ((slope_u, slope_u_scale), (slope_v, slope_v_scale)) = slopes(solver, t, &u_new, &v_new)?;
        let balance_residual = energy_balance_residual(solver, previous_total, t, dt, &u_new, &v_new)?;
        let pattern = crack_pattern(mesh, &v_new, options.threshold);
        let max_v_increase = v_new
            .values()
            .iter()
            .zip(v.values())
            .map(|(a, b)| a - b)
            .fold(f64::MIN, f64::max);
        let record = StepRecord {
            step: k,
            t,
            energy,
            iterations: report.iterations,
            converged: report.converged,
            slope_u,
            slope_u_scale,
            slope_v,
            slope_v_scale,
            balance_residual,
            crack_count: pattern.count(),
            centers: pattern.centers.clone(),
            max_v_increase,
            solver_failures: report.solver_failures,
        };
        let event = record.is_event(previous_count);
        if event {
            trace.events.push(CrackEvent {
                step: k,
                t,
                crack_count: pattern.count(),
                centers: pattern.centers,
            });
        }
        let wanted = options.snapshot_times.iter().any(|&s| (s - t).abs() < 0.5 * dt);
        if event || wanted {
            snapshots.push(Snapshot {
                t,
                u: u_new.clone(),
                v: v_new.clone(),
            });
        }
        on_step(&record, &u_new, &v_new);
        previous_total = energy.total;
        previous_count = record.crack_count;
        trace.steps.push(record);
        u = u_new;
        v = v_new;
    }
    let t_final = load.time(load.steps());
    Ok(EvolutionOutcome {
        trace,
        snapshots,
        final_state: Snapshot { t: t_final, u, v },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{BoundaryCondition, FeSpace};
    use crate::params::{LoadProgram, MaterialParams};
    use crate::staggered::StaggeredOptions;

    #[test]
    fn uniform_phase_has_no_cracks() {
        let mesh = Mesh::rectangle(3.0, 1.0, 30, 4).unwrap();
        let v = Field::constant(&mesh, 1, 1.0);
        let p = crack_pattern(&mesh, &v, 0.2);
        assert_eq!(p.count(), 0);
        assert_eq!(p.mean_spacing, 0.0);
    }

    #[test]
    fn two_dips_give_two_cracks() {
        let mesh = Mesh::rectangle(6.0, 1.0, 120, 4).unwrap();
        let h = 0.1;
        let v = Field::from_fn(&mesh, 1, |x| {
            let dip = |c: f64| (-(x[0] - c).powi(2) / 0.05).exp();
            [1.0 - 0.95 * (dip(-3.0) + dip(3.0)), 0.0]
        });
        let p = crack_pattern(&mesh, &v, 0.2);
        assert_eq!(p.count(), 2);
        assert!((p.mean_spacing - 6.0).abs() <= h);
        assert!((p.centers[0] + 3.0).abs() < 1e-9);
    }

    #[test]
    fn zero_load_evolution_is_trivial() {
        let mesh = Mesh::rectangle(2.0, 1.0, 8, 4).unwrap();
        let load = LoadProgram::affine([[0.0; 2]; 2], 0.5, 0.1);
        let solver = Staggered::new(
            FeSpace::new(mesh),
            MaterialParams::default(),
            load,
            BoundaryCondition::Neumann,
            StaggeredOptions::default(),
        )
        .unwrap();
        let out = run_evolution(&solver, &EvolutionOptions::default(), |_, _, _| {}).unwrap();
        assert_eq!(out.trace.steps.len(), 5);
        for s in &out.trace.steps {
            assert_eq!(s.crack_count, 0);
            assert!(s.energy.total.abs() < 1e-20);
            assert!(s.balance_residual.abs() < 1e-20);
            assert_eq!(s.slope_u, 0.0);
        }
        assert!(out.trace.events.is_empty());
        assert!(out.final_state.v.values().iter().all(|&x| (x - 1.0).abs() < 1e-12));
    }
}
