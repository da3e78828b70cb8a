//! One function per subcommand.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::Path;

use serde_json::{json, Value};

use hybc_core::demos::{self, QpeParams};
use hybc_core::gates::{enumerate_gateset, GateSet};
use hybc_core::ir::QuantumTape;
use hybc_core::jaqal::{self, JaqalError, QscoutDevice};
use hybc_core::measure::Outcome as Measured;
use hybc_core::qasm::{emit_qasm, parse_qasm, ParseErrorKind, Parsed};
use hybc_core::rewrite::{decompose_to_gateset, resource_count, DEFAULT_MAX_DEPTH};
use hybc_core::sim::{execute, Cutoffs, MeasurementResult};
use hybc_core::types::{infer_types, InferenceError, TypeEnv, WireType};

use crate::report::{self, comment_header, emit, emit_json, metadata, Failure, Outcome};
use crate::{CalibrationArgs, Format, Options, QpeArgs};

const QASM_PRECISION: usize = 10;

fn parse_file(path: &Path) -> Result<Parsed, Failure> {
    let src = report::read(path)?;
    let parsed = parse_qasm(&src).map_err(|e| {
        let kind = if matches!(e.kind, ParseErrorKind::Type { .. }) {
            "TypeConflict"
        } else {
            "ParseError"
        };
        Failure::user(format!("{kind}: {}:{e}", path.display()))
    })?;
    report::warn(&parsed.warnings);
    Ok(parsed)
}

fn cutoffs(opts: &Options, default: usize) -> Result<Cutoffs, Failure> {
    let mut c = Cutoffs::new(opts.cutoff.unwrap_or(default)).map_err(Failure::user)?;
    for (w, n) in &opts.cutoff_wire {
        c = c.with(w.as_str(), *n).map_err(Failure::user)?;
    }
    Ok(c)
}

fn gateset(name: &str) -> Result<GateSet, Failure> {
    match enumerate_gateset(name) {
        Ok(g) => Ok(g),
        Err(_) if Path::new(name).is_file() => {
            GateSet::from_json(&report::read(Path::new(name))?).map_err(Failure::user)
        }
        Err(e) => Err(Failure::user(e)),
    }
}

fn lower(tape: &QuantumTape, target: &GateSet) -> Result<QuantumTape, Failure> {
    decompose_to_gateset(tape, target, DEFAULT_MAX_DEPTH).map_err(Failure::user)
}

/// Declared types plus inferred ones for wires introduced by lowering.
fn complete_env(tape: &QuantumTape, declared: &TypeEnv) -> TypeEnv {
    let inferred = infer_types(tape).unwrap_or_default();
    let mut env = declared.clone();
    for w in tape.wires() {
        let t = inferred
            .get(&w)
            .copied()
            .filter(|t| *t != WireType::Bottom)
            .unwrap_or(WireType::Qubit);
        env.entry(w).or_insert(t);
    }
    env
}

fn precision(opts: &Options, default: usize) -> usize {
    opts.precision.map_or(default, usize::from)
}

fn format(opts: &Options, default: Format) -> Format {
    opts.format.unwrap_or(default)
}

pub fn check(file: &Path, opts: &Options) -> Outcome {
    let parsed = parse_file(file)?;
    let inferred = infer_types(&parsed.tape).map_err(|e| match e {
        InferenceError::Conflict(t) => Failure::user(format!("TypeConflict: {t}")),
        other => Failure::user(format!("UnresolvableSignature: {other}")),
    })?;
    let mut diags = Vec::new();
    let mut types = serde_json::Map::new();
    let mut text = String::new();
    for (w, declared) in &parsed.env {
        let used = inferred.get(w).copied().unwrap_or(WireType::Bottom);
        if used != WireType::Bottom && used != *declared {
            diags.push(format!(
                "TypeConflict: wire {w}: declared {declared}, used as {used}"
            ));
        }
        if opts.strict && used == WireType::Bottom {
            diags.push(format!(
                "UnresolvedWire: wire {w}: type is not implied by any use"
            ));
        }
        types.insert(w.to_string(), json!(declared));
        writeln!(text, "{w}: {declared}").expect("string write");
    }
    match format(opts, Format::Text) {
        Format::Text => emit(&text, opts)?,
        Format::Json => emit_json(
            &json!({ "types": types, "diagnostics": diags, "metadata": metadata(None, None, None) }),
            opts,
        )?,
    }
    if diags.is_empty() {
        Ok(())
    } else {
        Err(Failure::User(diags))
    }
}

pub fn decompose(file: &Path, count: bool, opts: &Options) -> Outcome {
    let parsed = parse_file(file)?;
    let name = opts.gateset.as_deref().unwrap_or("sim-native");
    let target = gateset(name)?;
    let meta = metadata(None, None, Some(&target.name));
    if count {
        let r = resource_count(&parsed.tape, &target).map_err(Failure::user)?;
        return emit_json(
            &json!({ "gates": r.gates, "ancilla_qubits": r.ancilla_qubits, "metadata": meta }),
            opts,
        );
    }
    let out = lower(&parsed.tape, &target)?;
    let env = complete_env(&out, &parsed.env);
    let text = emit_qasm(&out, &env, precision(opts, QASM_PRECISION)).map_err(Failure::user)?;
    emit(&(comment_header(&meta) + &text), opts)
}

pub fn export_qasm(file: &Path, opts: &Options) -> Outcome {
    let parsed = parse_file(file)?;
    let (tape, name) = match opts.gateset.as_deref() {
        Some(n) => {
            let g = gateset(n)?;
            (lower(&parsed.tape, &g)?, Some(g.name))
        }
        None => (parsed.tape.clone(), None),
    };
    let env = complete_env(&tape, &parsed.env);
    let text = emit_qasm(&tape, &env, precision(opts, QASM_PRECISION)).map_err(Failure::user)?;
    emit(
        &(comment_header(&metadata(None, None, name.as_deref())) + &text),
        opts,
    )
}

/// Counts per outcome row; rows of bits print as a bitstring.
fn histogram(samples: &[Vec<Measured>]) -> BTreeMap<String, u64> {
    let mut h = BTreeMap::new();
    for row in samples {
        let key = if row.iter().all(|o| matches!(o, Measured::Bit(_))) {
            row.iter()
                .map(|o| {
                    if matches!(o, Measured::Bit(1)) {
                        '1'
                    } else {
                        '0'
                    }
                })
                .collect()
        } else {
            row.iter()
                .map(|o| o.as_f64().to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        *h.entry(key).or_insert(0) += 1;
    }
    h
}

fn result_json(r: &MeasurementResult) -> Result<Value, Failure> {
    let mut v = serde_json::to_value(r).map_err(|e| Failure::Internal(e.to_string()))?;
    if let MeasurementResult::Samples { samples, .. } = r {
        v["histogram"] = json!(histogram(samples));
    }
    Ok(v)
}

pub fn simulate(file: &Path, opts: &Options) -> Outcome {
    let parsed = parse_file(file)?;
    let tape = match opts.shots {
        Some(s) => parsed.tape.with_shots(Some(s)).map_err(Failure::user)?,
        None => parsed.tape.clone(),
    };
    let cut = cutoffs(opts, 16)?;
    let env = complete_env(&tape, &parsed.env);
    let (results, seed) = execute::<f64>(&tape, &env, &cut, opts.seed).map_err(Failure::user)?;
    let meta = metadata(seed, Some(&cut), None);
    match format(opts, Format::Json) {
        Format::Json => {
            let rs = results
                .iter()
                .map(result_json)
                .collect::<Result<Vec<_>, _>>()?;
            emit_json(&json!({ "results": rs, "metadata": meta }), opts)
        }
        Format::Text => {
            let mut s = String::new();
            for r in &results {
                match r {
                    MeasurementResult::Expval { expval } => writeln!(s, "expval: {expval}"),
                    MeasurementResult::Var { var } => writeln!(s, "var: {var}"),
                    MeasurementResult::Samples { samples, .. } => {
                        writeln!(s, "samples: {} shots", samples.len()).expect("string write");
                        histogram(samples)
                            .iter()
                            .try_for_each(|(k, n)| writeln!(s, "  {k} {n}"))
                    }
                }
                .expect("string write");
            }
            if let Some(seed) = seed {
                writeln!(s, "seed: {seed}").expect("string write");
            }
            emit(&s, opts)
        }
    }
}

fn load_device(opts: &Options) -> Result<Option<QscoutDevice>, Failure> {
    opts.device
        .as_deref()
        .map(|p| {
            QscoutDevice::from_json(&report::read(p)?)
                .map_err(|e| Failure::user(format!("{}: {e}", p.display())))
        })
        .transpose()
}

fn jaqal_failure(e: JaqalError) -> Failure {
    match e {
        JaqalError::Validation(d) => Failure::User(d.iter().map(ToString::to_string).collect()),
        other => Failure::user(other),
    }
}

/// Lowers for the given device, or for the smallest default device (at least
/// two ions) that holds the qubits.
fn lower_for_device(
    tape: &QuantumTape,
    env: &TypeEnv,
    device: Option<QscoutDevice>,
) -> Result<(jaqal::Lowered, QscoutDevice), Failure> {
    if let Some(d) = device {
        return jaqal::lower_to_native(tape, env, &d)
            .map(|l| (l, d))
            .map_err(jaqal_failure);
    }
    let mut d = QscoutDevice::new(2);
    loop {
        match jaqal::lower_to_native(tape, env, &d) {
            Ok(l) => return Ok((l, d)),
            Err(JaqalError::TooManyQubits { needed, .. }) if needed as u32 > d.n_qubits => {
                d = QscoutDevice::new(needed as u32)
            }
            Err(e) => return Err(jaqal_failure(e)),
        }
    }
}

pub fn export_jaqal(file: &Path, opts: &Options) -> Outcome {
    let parsed = parse_file(file)?;
    let (lowered, device) = lower_for_device(&parsed.tape, &parsed.env, load_device(opts)?)?;
    let text = jaqal::emit_jaqal(&lowered, &device, precision(opts, jaqal::DEFAULT_PRECISION))
        .map_err(jaqal_failure)?;
    emit(
        &(comment_header(&metadata(None, None, Some("qscout-native"))) + &text),
        opts,
    )
}

pub fn demo_qpe(a: &QpeArgs, opts: &Options) -> Outcome {
    let p = QpeParams {
        bits: a.bits,
        t: a.t,
        omega_r: a.omega_r,
        omega_q: a.omega_q,
        chi: a.chi,
        fock: a.fock,
    };
    let shots = opts.shots.unwrap_or(1024);
    let cutoff = opts.cutoff.unwrap_or(8);
    if a.circuit {
        let tape = demos::qpe_tape(&p, shots).map_err(Failure::user)?;
        let tape = lower(
            &tape,
            &enumerate_gateset("sim-native").expect("shipped set"),
        )?;
        let env = complete_env(&tape, &TypeEnv::new());
        let text =
            emit_qasm(&tape, &env, precision(opts, QASM_PRECISION)).map_err(Failure::user)?;
        return emit(
            &(comment_header(&metadata(None, None, Some("sim-native"))) + &text),
            opts,
        );
    }
    let r = demos::run_qpe(&p, cutoff, shots, opts.seed).map_err(Failure::user)?;
    let meta = metadata(
        Some(r.seed),
        Some(&Cutoffs::new(cutoff).map_err(Failure::user)?),
        Some("sim-native"),
    );
    match format(opts, Format::Json) {
        Format::Json => {
            let mut v = serde_json::to_value(&r).map_err(|e| Failure::Internal(e.to_string()))?;
            v["metadata"] = meta;
            emit_json(&v, opts)
        }
        Format::Text => {
            let mut s = String::new();
            writeln!(s, "estimate: {:.5}", r.estimate).expect("string write");
            writeln!(s, "exact: {}  resolution: {:.5}", r.exact, r.resolution)
                .expect("string write");
            writeln!(s, "window: {}", r.window_rule).expect("string write");
            let mut top: Vec<_> = r.energies.iter().collect();
            top.sort_by(|x, y| y.count.cmp(&x.count).then(x.energy.total_cmp(&y.energy)));
            for e in top.iter().take(5) {
                writeln!(s, "  E = {:.5}  {}", e.energy, e.count).expect("string write");
            }
            writeln!(s, "seed: {}", r.seed).expect("string write");
            emit(&s, opts)
        }
    }
}

pub fn demo_calibration(a: &CalibrationArgs, opts: &Options) -> Outcome {
    let betas = if a.betas.is_empty() {
        demos::linspace(a.beta_min, a.beta_max, a.points)
    } else {
        a.betas.clone()
    };
    if betas.is_empty() {
        return Err(Failure::user("no beta values"));
    }
    let cutoff = opts.cutoff.unwrap_or(16);
    if a.circuit {
        let tape =
            demos::calibration_tape(betas[0], demos::CALIBRATION_QUBIT, demos::CALIBRATION_MODE);
        let env = complete_env(&tape, &TypeEnv::new());
        let text =
            emit_qasm(&tape, &env, precision(opts, QASM_PRECISION)).map_err(Failure::user)?;
        return emit(&(comment_header(&metadata(None, None, None)) + &text), opts);
    }
    let warnings: Vec<String> = betas
        .iter()
        .filter_map(|b| demos::truncation_warning(*b, cutoff))
        .collect();
    report::warn(&warnings);
    let device = match load_device(opts)? {
        Some(d) => Some(d),
        None if a.lower || a.jaqal_dir.is_some() => Some(QscoutDevice::new(2)),
        None => None,
    };
    let (points, seed) =
        demos::calibration_curve(&betas, cutoff, opts.shots, opts.seed, device.as_ref())
            .map_err(Failure::user)?;
    if let Some(dir) = &a.jaqal_dir {
        std::fs::create_dir_all(dir)
            .map_err(|e| Failure::Internal(format!("{}: {e}", dir.display())))?;
        for (i, p) in points.iter().enumerate() {
            let path = dir.join(format!("calibration_{i:03}.jaqal"));
            std::fs::write(&path, p.jaqal.as_deref().unwrap_or_default())
                .map_err(|e| Failure::Internal(format!("{}: {e}", path.display())))?;
        }
    }
    let meta = metadata(
        seed,
        Some(&Cutoffs::new(cutoff).map_err(Failure::user)?),
        device.as_ref().map(|_| "qscout-native"),
    );
    match format(opts, Format::Json) {
        Format::Json => emit_json(
            &json!({ "points": points, "warnings": warnings, "metadata": meta }),
            opts,
        ),
        Format::Text => {
            let mut s = String::from("beta\texpval\tideal");
            if device.is_some() {
                s.push_str("\tlowered\trejection");
            }
            s.push('\n');
            for p in &points {
                write!(s, "{:.6}\t{:.6}\t{:.6}", p.beta, p.expval, p.ideal).expect("string write");
                if let (Some(l), Some(r)) = (p.lowered_expval, p.rejection) {
                    write!(s, "\t{l:.6}\t{r:.2e}").expect("string write");
                }
                s.push('\n');
            }
            emit(&s, opts)
        }
    }
}
