//! Pulse sequences on the population model, executed in their cyclic steady
//! state and averaged over defect orientations, plus the named experiment
//! recipes built on them.

use core::f64::consts::PI;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{Matrix5, Vector3, Vector5};
use num_traits::Float;

use crate::coherence::{lorentzian_nodes, population_transfer, CoherenceParams, DriveParams};
use crate::linalg::expm;
use crate::photodynamics::{
    periodic_state, rate_matrix, window_integral, MixedDecay, PopulationState, RateParams, GS, MS0,
};
use crate::spin_model::{field_in_defect_frame, spectrum_in_lab, DefectOrientation, Transition, TransitionFrequencies, ZfsParams};
use crate::{Error, Result};

pub mod recipes;

/// How a microwave event acts on the metastable populations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MwMode {
    /// Coherent drive of `drive.target`, detuned by the carrier offset from
    /// that pair's line and averaged over the T2* detuning distribution.
    Addressed,
    /// As `Addressed`, on whichever pair lies closest to the carrier.
    NearestPair,
    /// Resonant rotation of `drive.target` by the pulse area, applied to the
    /// populations at the pulse midpoint (a π pulse swaps them).
    IdealSwap,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    /// Power in µW, duration in µs.
    Laser { power: f64, duration: f64 },
    Wait { duration: f64 },
    Microwave { drive: DriveParams, duration_ns: f64, mode: MwMode },
    /// PL integral over [offset, offset + width] µs from the start of the
    /// most recent laser event.
    ReadWindow { offset: f64, width: f64, label: String },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PulseSequence {
    pub events: Vec<Event>,
}

fn non_negative(v: f64, name: &'static str) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(name, "must be finite and >= 0"))
    }
}

impl PulseSequence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn laser(mut self, power: f64, duration: f64) -> Self {
        self.events.push(Event::Laser { power, duration });
        self
    }

    pub fn wait(mut self, duration: f64) -> Self {
        self.events.push(Event::Wait { duration });
        self
    }

    pub fn microwave(mut self, drive: DriveParams, duration_ns: f64, mode: MwMode) -> Self {
        self.events.push(Event::Microwave { drive, duration_ns, mode });
        self
    }

    pub fn window(mut self, offset: f64, width: f64, label: &str) -> Self {
        self.events.push(Event::ReadWindow { offset, width, label: String::from(label) });
        self
    }

    pub fn validate(&self) -> Result<()> {
        let mut last_laser: Option<f64> = None;
        let mut labels: Vec<&str> = Vec::new();
        for e in &self.events {
            match e {
                Event::Laser { power, duration } => {
                    non_negative(*power, "power")?;
                    non_negative(*duration, "duration")?;
                    last_laser = Some(*duration);
                }
                Event::Wait { duration } => {
                    non_negative(*duration, "duration")?;
                    last_laser = None;
                }
                Event::Microwave { drive, duration_ns, .. } => {
                    drive.validate()?;
                    non_negative(*duration_ns, "duration_ns")?;
                    last_laser = None;
                }
                Event::ReadWindow { offset, width, label } => {
                    non_negative(*offset, "offset")?;
                    non_negative(*width, "width")?;
                    let Some(d) = last_laser else {
                        return Err(Error::domain("offset", "a read window must follow a laser event"));
                    };
                    if offset + width > d * (1.0 + 1e-12) {
                        return Err(Error::domain("offset", "read window extends past its laser pulse"));
                    }
                    if labels.contains(&label.as_str()) {
                        return Err(Error::domain("label", "window labels must be unique"));
                    }
                    labels.push(label);
                }
            }
        }
        Ok(())
    }

    pub fn labels(&self) -> Vec<String> {
        self.events
            .iter()
            .filter_map(|e| match e {
                Event::ReadWindow { label, .. } => Some(label.clone()),
                _ => None,
            })
            .collect()
    }

    /// Total length of one repetition (µs).
    pub fn period(&self) -> f64 {
        self.events
            .iter()
            .map(|e| match e {
                Event::Laser { duration, .. } | Event::Wait { duration } => *duration,
                Event::Microwave { duration_ns, .. } => duration_ns * 1e-3,
                Event::ReadWindow { .. } => 0.0,
            })
            .sum()
    }
}

/// Physical constants shared by every sequence and recipe.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SystemParams {
    pub zfs: ZfsParams,
    pub rates: RateParams,
    pub coherence: CoherenceParams,
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        self.zfs.validate()?;
        self.rates.validate()?;
        self.coherence.validate()
    }
}

/// Window integrals of one sequence: per orientation and their equal-weight mean.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceOutput {
    pub labels: Vec<String>,
    /// `per_orientation[o][w]` for orientation `o` and window `w`.
    pub per_orientation: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
}

impl SequenceOutput {
    pub fn index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::domain("label", alloc::format!("no read window labelled '{label}'")))
    }

    pub fn get(&self, label: &str) -> Result<f64> {
        Ok(self.mean[self.index(label)?])
    }

    pub fn orientation(&self, o: usize, label: &str) -> Result<f64> {
        Ok(self.per_orientation[o][self.index(label)?])
    }
}

/// Spin physics of one defect frame in a given field.
struct FrameState {
    mixed: MixedDecay,
    lines: TransitionFrequencies,
}

fn frame_state(sys: &SystemParams, b_lab: &Vector3<f64>, o: &DefectOrientation) -> Result<FrameState> {
    let spec = spectrum_in_lab(&sys.zfs, b_lab, o)?;
    let mixed = MixedDecay::from_overlaps(spec.labelled_overlaps(), &sys.rates);
    let e = spec.labelled_energies();
    let lines = TransitionFrequencies {
        plus_zero: (e[1] - e[0]).abs(),
        minus_zero: (e[2] - e[0]).abs(),
        plus_minus: (e[1] - e[2]).abs(),
    };
    Ok(FrameState { mixed, lines })
}

fn swap_matrix(target: Transition, angle: f64) -> Matrix5<f64> {
    let (a, b) = target.levels();
    let f = Float::sin(0.5 * angle).powi(2);
    let mut p = Matrix5::identity();
    let (i, j) = (MS0 + a, MS0 + b);
    p[(i, i)] = 1.0 - f;
    p[(j, j)] = 1.0 - f;
    p[(i, j)] = f;
    p[(j, i)] = f;
    p
}

fn nearest_pair(lines: &TransitionFrequencies, frequency: f64) -> Transition {
    let mut best = Transition::PlusZero;
    for t in Transition::ALL {
        if (lines.get(t) - frequency).abs() < (lines.get(best) - frequency).abs() {
            best = t;
        }
    }
    best
}

/// Population map of a coherent pulse: MS columns from the density-matrix
/// engine with the frame's dressed decay rates, GS and ES columns from the
/// dark propagator.
fn coherent_map(
    sys: &SystemParams,
    frame: &FrameState,
    dark: &Matrix5<f64>,
    drive: &DriveParams,
    target: Transition,
    duration: f64,
) -> Result<Matrix5<f64>> {
    let mut m = expm(&(dark * duration))?;
    let dressed = RateParams {
        tau_0: 1.0 / frame.mixed.rates[0],
        tau_plus: 1.0 / frame.mixed.rates[1],
        tau_minus: 1.0 / frame.mixed.rates[2],
        ..sys.rates
    };
    let d = DriveParams { target, ..*drive };
    let centre = drive.frequency - frame.lines.get(target);
    let nodes = lorentzian_nodes(sys.coherence.detuning_hwhm(), sys.coherence.nodes);
    for k in 0..3 {
        for j in 0..5 {
            m[(j, MS0 + k)] = 0.0;
        }
    }
    let w = 1.0 / nodes.len() as f64;
    for &delta in &nodes {
        let t = population_transfer(&d, centre + delta, &dressed, &sys.coherence, duration)?;
        for k in 0..3 {
            for j in 0..3 {
                m[(MS0 + j, MS0 + k)] += w * t[(j, k)];
            }
            m[(GS, MS0 + k)] += w * (1.0 - t.column(k).sum());
        }
    }
    Ok(m)
}

fn event_maps(sys: &SystemParams, seq: &PulseSequence, frame: &FrameState) -> Result<Vec<Matrix5<f64>>> {
    let dark = rate_matrix(&sys.rates, &frame.mixed, 0.0)?;
    let mut maps = Vec::with_capacity(seq.events.len());
    for e in &seq.events {
        let m = match e {
            Event::Laser { power, duration } => expm(&(rate_matrix(&sys.rates, &frame.mixed, *power)? * *duration))?,
            Event::Wait { duration } => expm(&(dark * *duration))?,
            Event::Microwave { drive, duration_ns, mode } => {
                let t = duration_ns * 1e-3;
                match mode {
                    MwMode::IdealSwap => {
                        let half = expm(&(dark * (0.5 * t)))?;
                        half * swap_matrix(drive.target, 2.0 * PI * drive.rabi_rate * t) * half
                    }
                    MwMode::Addressed => coherent_map(sys, frame, &dark, drive, drive.target, t)?,
                    MwMode::NearestPair => {
                        let target = nearest_pair(&frame.lines, drive.frequency);
                        coherent_map(sys, frame, &dark, drive, target, t)?
                    }
                }
            }
            Event::ReadWindow { .. } => Matrix5::identity(),
        };
        maps.push(m);
    }
    Ok(maps)
}

fn run_frame(sys: &SystemParams, seq: &PulseSequence, frame: &FrameState, start: &Vector5<f64>) -> Result<Vec<f64>> {
    let maps = event_maps(sys, seq, frame)?;
    let mut cycle = Matrix5::identity();
    for m in &maps {
        cycle = m * cycle;
    }
    let mut x = periodic_state(&cycle, start)?;
    let tau_e = sys.rates.tau_e_us();
    let mut out = Vec::new();
    let mut lit: Option<(Matrix5<f64>, Vector5<f64>)> = None;
    for (e, m) in seq.events.iter().zip(&maps) {
        match e {
            Event::Laser { power, .. } => {
                lit = Some((rate_matrix(&sys.rates, &frame.mixed, *power)?, x));
            }
            Event::ReadWindow { offset, width, .. } => {
                let (a, x0) = lit.as_ref().expect("validated sequence");
                out.push(window_integral(a, x0, *offset, *width, tau_e)?);
            }
            _ => {}
        }
        x = m * x;
    }
    Ok(out)
}

/// Executes `seq` in its cyclic steady state for each orientation (each with
/// its own field-mixed decay rates) and averages the windows with equal weight.
pub fn run_sequence(
    seq: &PulseSequence,
    sys: &SystemParams,
    b_lab: &Vector3<f64>,
    orientations: &[DefectOrientation],
) -> Result<SequenceOutput> {
    run_sequence_from(seq, sys, b_lab, orientations, &PopulationState::GROUND)
}

/// [`run_sequence`] with an explicit starting guess for the fixed-point search.
pub fn run_sequence_from(
    seq: &PulseSequence,
    sys: &SystemParams,
    b_lab: &Vector3<f64>,
    orientations: &[DefectOrientation],
    start: &PopulationState,
) -> Result<SequenceOutput> {
    seq.validate()?;
    sys.validate()?;
    start.validate()?;
    if orientations.is_empty() {
        return Err(Error::domain("orientations", "need at least one orientation"));
    }
    if b_lab.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("field", "must be finite"));
    }
    let x0 = start.to_vector();
    let mut cache: Vec<(Vector3<f64>, Vec<f64>)> = Vec::new();
    let mut per_orientation = Vec::with_capacity(orientations.len());
    for o in orientations {
        let b = field_in_defect_frame(b_lab, o).map(|v| v.abs());
        let hit = cache.iter().find(|(k, _)| (k - b).amax() <= 1e-12 * (1.0 + b.amax()));
        let w = match hit {
            Some((_, w)) => w.clone(),
            None => {
                let frame = frame_state(sys, b_lab, o)?;
                let w = run_frame(sys, seq, &frame, &x0)?;
                cache.push((b, w.clone()));
                w
            }
        };
        per_orientation.push(w);
    }
    let labels = seq.labels();
    let n = orientations.len() as f64;
    let mean = (0..labels.len()).map(|i| per_orientation.iter().map(|w| w[i]).sum::<f64>() / n).collect();
    Ok(SequenceOutput { labels, per_orientation, mean })
}
