//! Evaluation of configured systems over τ and field grids.

use floquet_dd::clusters::{
    conditional_cluster_hamiltonians, doublet_dip_estimates, joint_full_model, PairSet, SpinCluster,
};
use floquet_dd::floquet::{
    coherence_floquet, envelope_general, floquet_pair, spectrum_scan, unit_cell_prepared,
    ConditionalHamiltonians, PreparedHamiltonians, PulseSequence, SpectrumScan,
};
use floquet_dd::pseudospin::{
    avg_hamiltonian_dip, coherence_analytic, diamond_boundaries, dip_positions, envelope,
    TwoStateModel,
};
use floquet_dd::sensors::{donor_polarization_sweep, nv_two_state, track_levels, NVModel, PairTarget};
use floquet_dd::Error;
use rayon::prelude::*;

use crate::config::{ClusterConfig, Polarization, ScanConfig, SystemConfig};
use crate::ScanError;

/// Dips whose coherence drop `1 - depth` is below this are rounding noise
/// at true crossings and are left out of reports.
pub const MIN_DIP_SIGNAL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    Coherence,
    Envelope,
}

impl Quantity {
    pub fn column(self) -> &'static str {
        match self {
            Quantity::Coherence => "coherence",
            Quantity::Envelope => "envelope",
        }
    }
}

/// The system at one point of the field axis.
pub enum PointModel {
    TwoState(TwoStateModel),
    Pairs { pairs: PairSet, p_u: f64, p_d: f64 },
    Cluster {
        hamiltonians: ConditionalHamiltonians,
        prepared: PreparedHamiltonians,
        cluster: SpinCluster,
        polarizations: (f64, f64),
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub coherence: f64,
    pub envelope: f64,
}

impl Sample {
    pub fn get(&self, q: Quantity) -> f64 {
        match q {
            Quantity::Coherence => self.coherence,
            Quantity::Envelope => self.envelope,
        }
    }
}

fn cluster_of(c: &ClusterConfig) -> SpinCluster {
    SpinCluster::triangle(c.a_rad_s, c.c12_rad_s, c.c23_rad_s, c.c31_rad_s)
}

fn annotate(location: String) -> impl FnOnce(Error) -> ScanError {
    move |source| ScanError::Model { location, source }
}

/// Models at each field value, or the single scalar-configured model when
/// `fields` is `None`. Field sweeps are traversed in order because donor
/// levels are followed adiabatically.
pub fn build_models(cfg: &ScanConfig, fields: Option<&[f64]>) -> Result<Vec<PointModel>, ScanError> {
    let at = |i: usize| match fields {
        Some(_) => format!("field row {i}"),
        None => "system".to_string(),
    };
    match &cfg.system {
        SystemConfig::Pseudospin { x_rad_s, z_u_rad_s, z_d_rad_s } => {
            let m = TwoStateModel::from_xz(*x_rad_s, *z_u_rad_s, *z_d_rad_s).map_err(annotate(at(0)))?;
            Ok(vec![PointModel::TwoState(m)])
        }
        SystemConfig::Nv { omega_x_rad_s, omega_z_rad_s, a_par_rad_s } => {
            let xs: Vec<f64> = match fields {
                Some(f) => f.to_vec(),
                None => vec![omega_x_rad_s.expect("checked at load")],
            };
            xs.iter()
                .enumerate()
                .map(|(i, &x)| {
                    let nv = NVModel { omega_x: x, omega_z: *omega_z_rad_s, a_par: *a_par_rad_s };
                    nv_two_state(&nv).map(PointModel::TwoState).map_err(annotate(at(i)))
                })
                .collect()
        }
        SystemConfig::DonorPair { delta_a_rad_s, c12_rad_s, donor, b0_tesla } => {
            let bs: Vec<f64> = match fields {
                Some(f) => f.to_vec(),
                None => vec![b0_tesla.expect("checked at load")],
            };
            let pol = donor_polarization_sweep(&donor.model(), &bs).map_err(annotate(at(0)))?;
            let target = PairTarget { delta_a: *delta_a_rad_s, c12: *c12_rad_s };
            pol.iter()
                .enumerate()
                .map(|(i, &(pu, pd))| target.two_state(pu, pd).map(PointModel::TwoState).map_err(annotate(at(i))))
                .collect()
        }
        SystemConfig::Cluster3(c) | SystemConfig::IndependentPairs(c) => {
            let cluster = cluster_of(c);
            let pols: Vec<(f64, f64)> = match &c.polarization {
                Polarization::Fixed { p_u, p_d } => vec![(*p_u, *p_d)],
                Polarization::Donor { donor, b0_tesla } => {
                    let bs: Vec<f64> = match fields {
                        Some(f) => f.to_vec(),
                        None => vec![b0_tesla.expect("checked at load")],
                    };
                    donor_polarization_sweep(&donor.model(), &bs).map_err(annotate(at(0)))?
                }
            };
            pols.iter()
                .enumerate()
                .map(|(i, &(pu, pd))| {
                    if matches!(cfg.system, SystemConfig::IndependentPairs(_)) {
                        Ok(PointModel::Pairs { pairs: PairSet::from_cluster(&cluster), p_u: pu, p_d: pd })
                    } else {
                        let ch = conditional_cluster_hamiltonians(&cluster, pu, pd).map_err(annotate(at(i)))?;
                        cluster_model(ch, cluster.clone(), (pu, pd)).map_err(annotate(at(i)))
                    }
                })
                .collect()
        }
        SystemConfig::JointFull(c) => {
            let cluster = cluster_of(c);
            let Polarization::Donor { donor, b0_tesla } = &c.polarization else {
                unreachable!("joint_full always uses a donor")
            };
            let d = donor.model();
            let bs: Vec<f64> = match fields {
                Some(f) => f.to_vec(),
                None => vec![b0_tesla.expect("checked at load")],
            };
            let levels = track_levels(&d, &bs).map_err(annotate(at(0)))?;
            bs.iter()
                .zip(&levels)
                .enumerate()
                .map(|(i, (&b, lv))| {
                    let ch = joint_full_model(&d, &cluster, b).map_err(annotate(at(i)))?;
                    let pu = lv.polarization(&d, d.level_u).map_err(annotate(at(i)))?;
                    let pd = lv.polarization(&d, d.level_d).map_err(annotate(at(i)))?;
                    cluster_model(ch, cluster.clone(), (pu, pd)).map_err(annotate(at(i)))
                })
                .collect()
        }
    }
}

fn cluster_model(ch: ConditionalHamiltonians, cluster: SpinCluster, pol: (f64, f64)) -> Result<PointModel, Error> {
    let prepared = ch.prepare()?;
    Ok(PointModel::Cluster { hamiltonians: ch, prepared, cluster, polarizations: pol })
}

pub fn sequence(cfg: &ScanConfig, tau: f64) -> Result<PulseSequence, Error> {
    PulseSequence::new(tau, cfg.sequence.n_p, cfg.sequence.pulse_duration_s, None)
}

/// Bath-averaged coherence and envelope at one τ.
///
/// With identity pulses the finite-pulse cell equals the ideal cell at the
/// same τ, so the closed forms apply unchanged; only the time axis moves.
pub fn sample(model: &PointModel, cfg: &ScanConfig, tau: f64) -> Result<Sample, Error> {
    let n_p = cfg.sequence.n_p;
    match model {
        PointModel::TwoState(m) => Ok(Sample {
            coherence: coherence_analytic(m, tau, n_p)?.value,
            envelope: envelope(m, tau)?.value,
        }),
        PointModel::Pairs { pairs, p_u, p_d } => {
            let mut s = Sample { coherence: 1.0, envelope: 1.0 };
            for p in &pairs.pairs {
                let m = p.two_state(*p_u, *p_d)?;
                s.coherence *= coherence_analytic(&m, tau, n_p)?.value;
                s.envelope *= envelope(&m, tau)?.value;
            }
            Ok(s)
        }
        PointModel::Cluster { prepared, .. } => {
            let cell = unit_cell_prepared(prepared, &sequence(cfg, tau)?)?;
            let pair = floquet_pair(&cell)?;
            Ok(Sample {
                coherence: coherence_floquet(&pair, n_p),
                envelope: envelope_general(&pair).envelope,
            })
        }
    }
}

pub fn thread_pool(threads: usize) -> Result<rayon::ThreadPool, ScanError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| ScanError::Io(format!("cannot start worker pool: {e}")))
}

/// Samples for every (model, τ) pair, row-major. Results are gathered by
/// grid index, so the output does not depend on the number of workers.
pub fn evaluate_grid(
    models: &[PointModel],
    cfg: &ScanConfig,
    taus: &[f64],
    pool: &rayon::ThreadPool,
) -> Result<Vec<Vec<Sample>>, ScanError> {
    let cols = taus.len();
    let flat: Vec<Result<Sample, ScanError>> = pool.install(|| {
        (0..models.len() * cols)
            .into_par_iter()
            .map(|k| {
                let (r, c) = (k / cols, k % cols);
                sample(&models[r], cfg, taus[c])
                    .map_err(|source| ScanError::Model { location: format!("(row {r}, column {c})"), source })
            })
            .collect()
    });
    let mut rows = Vec::with_capacity(models.len());
    let mut it = flat.into_iter();
    for _ in 0..models.len() {
        rows.push(it.by_ref().take(cols).collect::<Result<Vec<_>, _>>()?);
    }
    Ok(rows)
}

pub fn conditional_hamiltonians(model: &PointModel) -> Result<ConditionalHamiltonians, ScanError> {
    match model {
        PointModel::TwoState(m) => Ok(m.conditional_hamiltonians()),
        PointModel::Cluster { hamiltonians, .. } => Ok(hamiltonians.clone()),
        PointModel::Pairs { .. } => Err(ScanError::Config(
            "spectrum is not defined for independent pairs; use cluster3".into(),
        )),
    }
}

pub fn spectrum(model: &PointModel, cfg: &ScanConfig, taus: &[f64]) -> Result<SpectrumScan, ScanError> {
    let ch = conditional_hamiltonians(model)?;
    let base = sequence(cfg, taus[0]).map_err(annotate("sequence".into()))?;
    spectrum_scan(&ch, &base, taus, cfg.outputs.crossing_threshold_rad).map_err(annotate("spectrum".into()))
}

/// One line of the dip report.
#[derive(Clone, Debug, PartialEq)]
pub struct DipRow {
    pub tau_dip_s: f64,
    pub method: &'static str,
    pub delta_rad: Option<f64>,
    pub depth: Option<f64>,
    pub harmonic: u32,
}

fn two_state_dips(m: &TwoStateModel, tau_max: f64, n_p: u32) -> Result<Vec<DipRow>, Error> {
    let mut rows: Vec<DipRow> = dip_positions(m, tau_max, n_p)?
        .into_iter()
        .filter(|d| 1.0 - d.depth > MIN_DIP_SIGNAL)
        .map(|d| DipRow {
            tau_dip_s: d.tau_dip,
            method: "floquet_condition",
            delta_rad: Some(d.delta),
            depth: Some(d.depth),
            harmonic: d.harmonic_index,
        })
        .collect();
    if !rows.is_empty() {
        if let Ok(avg) = avg_hamiltonian_dip(m) {
            rows.push(DipRow {
                tau_dip_s: avg.tau_bar,
                method: "avg_hamiltonian",
                delta_rad: None,
                depth: None,
                harmonic: 1,
            });
        }
    }
    Ok(rows)
}

/// Dip report for the scalar-configured system, sorted by τ.
pub fn dips(model: &PointModel, cfg: &ScanConfig) -> Result<Vec<DipRow>, ScanError> {
    let tau_max = cfg.tau_axis.stop_s;
    let n_p = cfg.sequence.n_p;
    let mut rows = match model {
        PointModel::TwoState(m) => two_state_dips(m, tau_max, n_p).map_err(annotate("dips".into()))?,
        PointModel::Pairs { pairs, p_u, p_d } => {
            let mut rows = Vec::new();
            for (i, p) in pairs.pairs.iter().enumerate() {
                let m = p.two_state(*p_u, *p_d).map_err(annotate(format!("pair {i}")))?;
                rows.extend(two_state_dips(&m, tau_max, n_p).map_err(annotate(format!("pair {i}")))?);
            }
            rows
        }
        PointModel::Cluster { cluster, polarizations: (pu, pd), .. } => {
            let flip_flop = (0..3).any(|j| (0..3).any(|k| cluster.c(j, k) != 0.0));
            if !flip_flop {
                Vec::new()
            } else {
                doublet_dip_estimates(cluster, *pu, *pd)
                    .map_err(annotate("dips".into()))?
                    .into_iter()
                    .filter(|e| e.tau <= tau_max)
                    .map(|e| DipRow {
                        tau_dip_s: e.tau,
                        method: "secular_estimate",
                        delta_rad: None,
                        depth: None,
                        harmonic: 1,
                    })
                    .collect()
            }
        }
    };
    rows.sort_by(|a, b| a.tau_dip_s.total_cmp(&b.tau_dip_s).then(a.method.cmp(b.method)));
    Ok(rows)
}

/// Analytic curves drawn over a map: `(curve name, τ)` for one row.
pub fn overlay(model: &PointModel, cfg: &ScanConfig) -> Vec<(String, f64)> {
    let mut out = Vec::new();
    match model {
        PointModel::TwoState(m) => {
            if matches!(cfg.system, SystemConfig::Nv { .. }) {
                if let Ok(b) = diamond_boundaries(m) {
                    out.push(("tau_plus".to_string(), b.tau_plus));
                    if let Some(t) = b.tau_minus {
                        out.push(("tau_minus".to_string(), t));
                    }
                }
            }
            if let Ok(avg) = avg_hamiltonian_dip(m) {
                out.push(("avg_hamiltonian".to_string(), avg.tau_bar));
            }
            if let Ok(d) = dip_positions(m, cfg.tau_axis.stop_s, cfg.sequence.n_p) {
                if let Some(first) = d.first() {
                    out.push(("floquet_condition".to_string(), first.tau_dip));
                }
            }
        }
        PointModel::Pairs { .. } => {}
        PointModel::Cluster { cluster, polarizations: (pu, pd), .. } => {
            if let Ok(est) = doublet_dip_estimates(cluster, *pu, *pd) {
                out.extend(est.into_iter().map(|e| (format!("secular_{}", e.label()), e.tau)));
            }
        }
    }
    out
}
