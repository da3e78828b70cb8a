//! The two reference workloads: phase estimation of a dispersively coupled
//! qubit-oscillator, and the displacement-loop calibration on a trapped-ion
//! device.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::gates::{enumerate_gateset, evo_gate, ops};
use crate::ir::{build_tape, GateInstruction, Param, QuantumTape, WireLabel};
use crate::jaqal::{emit_jaqal, lower_to_native, JaqalError, QscoutDevice};
use crate::measure::{BasisSchema, MeasurementSpec, Observable, Outcome};
use crate::rewrite::{decompose_to_gateset, DecomposeError, DEFAULT_MAX_DEPTH};
use crate::sim::{execute, simulate_with_env, Cutoffs, MeasurementResult, SimError};
use crate::types::infer_types;

#[derive(Debug, Error)]
pub enum DemoError {
    #[error("{0}")]
    Params(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Jaqal(#[from] JaqalError),
}

pub const QPE_QUBIT: &str = "q";
pub const QPE_MODE: &str = "m";

/// Phase-estimation settings. The data register starts in `|0⟩|fock⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QpeParams {
    pub bits: usize,
    pub t: f64,
    pub omega_r: f64,
    pub omega_q: f64,
    pub chi: f64,
    pub fock: usize,
}

impl Default for QpeParams {
    fn default() -> Self {
        QpeParams {
            bits: 10,
            t: 1.0,
            omega_r: 1.0,
            omega_q: -1.0,
            chi: 0.1,
            fock: 4,
        }
    }
}

impl QpeParams {
    /// Energy of the prepared eigenstate (qubit in |0⟩, so Z = +1).
    pub fn exact_energy(&self) -> f64 {
        let n = self.fock as f64;
        self.omega_r * n - self.omega_q / 2.0 - self.chi * n / 2.0
    }

    /// Spacing of the estimate grid.
    pub fn resolution(&self) -> f64 {
        TAU / (1u64 << self.bits) as f64 / self.t
    }

    /// Maps the register readout `j` (first estimation wire most significant)
    /// to an energy. With `U = exp(−iHt)` the phase `θ = j/2^bits` satisfies
    /// `e^{2πiθ} = e^{−iEt}`, so `E ≡ −2πθ/t` modulo `2π/t`; the branch is the
    /// one within `π/t` of the exact eigenvalue.
    pub fn energy_of(&self, j: u64) -> f64 {
        let raw = -TAU * j as f64 / (1u64 << self.bits) as f64 / self.t;
        let period = TAU / self.t;
        let center = self.exact_energy();
        center + (raw - center + period / 2.0).rem_euclid(period) - period / 2.0
    }

    pub fn window(&self) -> (f64, f64) {
        let c = self.exact_energy();
        (c - PI / self.t, c + PI / self.t)
    }
}

pub fn estimation_wire(i: usize) -> WireLabel {
    WireLabel::Name(format!("e{i}"))
}

/// Controlled phase `diag(1, 1, 1, e^{iφ})` up to global phase.
fn controlled_phase(phi: f64, a: &WireLabel, b: &WireLabel) -> Vec<GateInstruction> {
    vec![
        ops::rz(phi / 2.0, a.clone()),
        ops::cnot(a.clone(), b.clone()),
        ops::rz(-phi / 2.0, b.clone()),
        ops::cnot(a.clone(), b.clone()),
        ops::rz(phi / 2.0, b.clone()),
    ]
}

fn swap(a: &WireLabel, b: &WireLabel) -> Vec<GateInstruction> {
    vec![
        ops::cnot(a.clone(), b.clone()),
        ops::cnot(b.clone(), a.clone()),
        ops::cnot(a.clone(), b.clone()),
    ]
}

/// Inverse Fourier transform taking `⊗_k (|0⟩ + e^{2πi 2^{n−1−k} θ}|1⟩)` on
/// `wires[k]` to `|j⟩` with `wires[0]` most significant.
pub fn inverse_qft(wires: &[WireLabel]) -> Vec<GateInstruction> {
    let n = wires.len();
    let mut out = Vec::new();
    for k in 0..n / 2 {
        out.extend(swap(&wires[k], &wires[n - 1 - k]));
    }
    for k in (0..n).rev() {
        for m in (k + 1..n).rev() {
            out.extend(controlled_phase(
                -TAU / f64::from(1u32 << (m - k + 1)),
                &wires[m],
                &wires[k],
            ));
        }
        out.push(ops::h(wires[k].clone()));
    }
    out
}

/// Phase-estimation tape: Hadamards, controlled `Evo(t)^{2^{bits−1−k}}` on
/// estimation wire `k`, inverse Fourier transform, discrete sampling of the
/// estimation register.
pub fn qpe_tape(p: &QpeParams, shots: u64) -> Result<QuantumTape, DemoError> {
    if p.bits == 0 || p.bits > 30 {
        return Err(DemoError::Params(format!(
            "bits must be in 1..=30, got {}",
            p.bits
        )));
    }
    let evo = GateInstruction::new(
        evo_gate(p.omega_r, p.omega_q, p.chi, true),
        vec![Param::Real(p.t)],
        vec![QPE_QUBIT, QPE_MODE],
    )
    .expect("Evo is well formed");
    let est: Vec<WireLabel> = (0..p.bits).map(estimation_wire).collect();
    let mut gates: Vec<GateInstruction> = est.iter().map(|w| ops::h(w.clone())).collect();
    for (k, w) in est.iter().enumerate() {
        let power = num_rational::Rational64::from(1i64 << (p.bits - 1 - k));
        gates.push(
            evo.power(power)
                .controlled_by(w.clone())
                .expect("estimation wire is fresh"),
        );
    }
    gates.extend(inverse_qft(&est));
    let prep = vec![(QPE_QUBIT.into(), 0), (QPE_MODE.into(), p.fock)];
    build_tape(
        prep,
        gates,
        vec![MeasurementSpec::Sample(BasisSchema::discrete(est))],
        Some(shots),
    )
    .map_err(|e| DemoError::Params(e.to_string()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyCount {
    pub energy: f64,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QpeReport {
    pub params: QpeParams,
    /// Energy of the most frequent readout.
    pub estimate: f64,
    pub exact: f64,
    pub resolution: f64,
    pub window: (f64, f64),
    pub window_rule: String,
    /// Readout bitstring (first estimation wire first) → count.
    pub histogram: BTreeMap<String, u64>,
    /// Same counts keyed by energy, ascending.
    pub energies: Vec<EnergyCount>,
    pub shots: u64,
    pub seed: u64,
}

/// Builds, lowers to the simulator-native set, and samples the QPE tape.
pub fn run_qpe(
    p: &QpeParams,
    cutoff: usize,
    shots: u64,
    seed: Option<u64>,
) -> Result<QpeReport, DemoError> {
    if p.fock >= cutoff {
        return Err(DemoError::Params(format!(
            "Fock level {} needs a cutoff above {cutoff}",
            p.fock
        )));
    }
    let tape = qpe_tape(p, shots)?;
    let tape = decompose_to_gateset(
        &tape,
        &enumerate_gateset("sim-native").expect("shipped set"),
        DEFAULT_MAX_DEPTH,
    )?;
    let env = infer_types(&tape).map_err(SimError::Types)?;
    let cutoffs = Cutoffs::new(cutoff)?;
    let (results, seed) = execute::<f64>(&tape, &env, &cutoffs, seed)?;
    let Some(MeasurementResult::Samples { samples, .. }) = results.into_iter().next() else {
        unreachable!("the tape ends in one sample measurement")
    };
    let seed = seed.expect("shots mode reports its seed");

    let mut histogram = BTreeMap::new();
    let mut by_j: BTreeMap<u64, u64> = BTreeMap::new();
    for row in &samples {
        let bits: String = row
            .iter()
            .map(|o| if o.as_f64() > 0.5 { '1' } else { '0' })
            .collect();
        let j = row.iter().fold(0u64, |acc, o| {
            (acc << 1) | u64::from(matches!(o, Outcome::Bit(1)))
        });
        *histogram.entry(bits).or_insert(0) += 1;
        *by_j.entry(j).or_insert(0) += 1;
    }
    let (&best, _) = by_j
        .iter()
        .max_by_key(|(j, c)| (**c, std::cmp::Reverse(**j)))
        .expect("shots ≥ 1");
    let mut energies: Vec<EnergyCount> = by_j
        .iter()
        .map(|(&j, &count)| EnergyCount {
            energy: p.energy_of(j),
            count,
        })
        .collect();
    energies.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(QpeReport {
        params: *p,
        estimate: p.energy_of(best),
        exact: p.exact_energy(),
        resolution: p.resolution(),
        window: p.window(),
        window_rule:
            "E = -2*pi*theta/t, shifted by multiples of 2*pi/t into [exact - pi/t, exact + pi/t)"
                .into(),
        histogram,
        energies,
        shots,
        seed,
    })
}

/// `H; CD(β,0); D(β,π/2); CD(−β,0); D(−β,π/2); H` with ⟨Z⟩ on the qubit.
/// Ideally ⟨Z⟩ = cos(4β²).
pub fn calibration_tape(beta: f64, qubit: &str, mode: &str) -> QuantumTape {
    build_tape(
        vec![],
        vec![
            ops::h(qubit),
            ops::cd(beta, 0.0, qubit, mode),
            ops::d(beta, FRAC_PI_2, mode),
            ops::cd(-beta, 0.0, qubit, mode),
            ops::d(-beta, FRAC_PI_2, mode),
            ops::h(qubit),
        ],
        vec![MeasurementSpec::Expval(Observable::z(qubit))],
        None,
    )
    .expect("calibration tape is well formed")
}

pub const CALIBRATION_QUBIT: &str = "q";
pub const CALIBRATION_MODE: &str = "m1i1";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CalibrationPoint {
    pub beta: f64,
    pub expval: f64,
    /// cos(4β²)
    pub ideal: f64,
    /// ⟨Z⟩ of the device-lowered tape after discarding shots whose ancilla
    /// ends in |1⟩.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lowered_expval: Option<f64>,
    /// Probability of discarding a shot in the lowered circuit.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rejection: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jaqal: Option<String>,
}

/// `n` evenly spaced points on `[lo, hi]`, endpoints included.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Truncation hint: the loop drives the mode to amplitudes up to 2β, so
/// 4β² photons on average.
pub fn truncation_warning(beta: f64, cutoff: usize) -> Option<String> {
    let photons = 4.0 * beta * beta;
    (photons > cutoff as f64 / 2.0)
        .then(|| format!("beta = {beta}: about {photons:.1} photons against cutoff {cutoff}; results may be truncation-limited"))
}

/// ⟨Z⟩ and rejection probability of the device-lowered calibration tape.
pub fn lowered_calibration(
    beta: f64,
    cutoff: usize,
    device: &QscoutDevice,
) -> Result<(f64, f64, String), DemoError> {
    let tape = calibration_tape(beta, CALIBRATION_QUBIT, CALIBRATION_MODE);
    let env = infer_types(&tape).map_err(SimError::Types)?;
    let lowered = lower_to_native(&tape, &env, device)?;
    let text = emit_jaqal(&lowered, device, crate::jaqal::DEFAULT_PRECISION)?;
    let mut state = simulate_with_env::<f64>(&lowered.tape, &lowered.env, &Cutoffs::new(cutoff)?)?;
    let mut kept = 1.0;
    for w in lowered
        .tape
        .wires()
        .into_iter()
        .filter(WireLabel::is_reserved)
    {
        let (s, p) = state.postselect(&w, 0)?;
        state = s;
        kept *= p;
    }
    Ok((
        state.expval(&Observable::z(CALIBRATION_QUBIT))?,
        1.0 - kept,
        text,
    ))
}

/// Calibration curve. With `shots`, ⟨Z⟩ is a sample estimate from a stream
/// seeded per point as `seed + index`. With a device, each point is also
/// lowered, simulated with post-selection, and exported.
pub fn calibration_curve(
    betas: &[f64],
    cutoff: usize,
    shots: Option<u64>,
    seed: Option<u64>,
    device: Option<&QscoutDevice>,
) -> Result<(Vec<CalibrationPoint>, Option<u64>), DemoError> {
    if betas.is_empty() {
        return Err(DemoError::Params("no beta values".into()));
    }
    let cutoffs = Cutoffs::new(cutoff)?;
    let seed = shots.map(|_| seed.unwrap_or_else(|| rand::rng().random()));
    let mut out = Vec::with_capacity(betas.len());
    for (i, &beta) in betas.iter().enumerate() {
        let tape = calibration_tape(beta, CALIBRATION_QUBIT, CALIBRATION_MODE)
            .with_shots(shots)
            .map_err(|e| DemoError::Params(e.to_string()))?;
        let env = infer_types(&tape).map_err(SimError::Types)?;
        let (res, _) = execute::<f64>(
            &tape,
            &env,
            &cutoffs,
            seed.map(|s| s.wrapping_add(i as u64)),
        )?;
        let expval = res[0].value().expect("expval result");
        let (lowered_expval, rejection, jaqal) = match device {
            Some(d) => {
                let (e, r, text) = lowered_calibration(beta, cutoff, d)?;
                (Some(e), Some(r), Some(text))
            }
            None => (None, None, None),
        };
        out.push(CalibrationPoint {
            beta,
            expval,
            ideal: (4.0 * beta * beta).cos(),
            lowered_expval,
            rejection,
            jaqal,
        });
    }
    Ok((out, seed))
}
