//! IR gate name ↔ OpenQASM token table.

/// `(ir name, qasm name)`.
pub const QASM_NAMES: &[(&str, &str)] = &[
    ("H", "h"),
    ("X", "x"),
    ("Y", "y"),
    ("Z", "z"),
    ("S", "s"),
    ("Sdg", "sdg"),
    ("RX", "rx"),
    ("RY", "ry"),
    ("RZ", "rz"),
    ("CNOT", "cx"),
    ("D", "cv_d"),
    ("R", "cv_r"),
    ("F", "cv_f"),
    ("Sq", "cv_sq"),
    ("K", "cv_k"),
    ("C", "cv_c"),
    ("SNAP", "cv_snap"),
    ("BS", "cv_bs"),
    ("ModeSwap", "cv_swap"),
    ("TMS", "cv_tms"),
    ("SUM", "cv_sum"),
    ("CR", "cv_cr"),
    ("CP", "cv_cp"),
    ("CD", "cv_cd"),
    ("CS", "cv_cs"),
    ("SQR", "cv_sqr"),
    ("JC", "cv_jc"),
    ("AJC", "cv_ajc"),
    ("RB", "cv_rb"),
    ("CBS", "cv_cbs"),
    ("CTMS", "cv_ctms"),
    ("CSUM", "cv_csum"),
    ("xCD", "cv_xcd"),
];

pub fn to_qasm(ir: &str) -> Option<&'static str> {
    QASM_NAMES.iter().find(|(i, _)| *i == ir).map(|(_, q)| *q)
}

pub fn from_qasm(q: &str) -> Option<&'static str> {
    QASM_NAMES.iter().find(|(_, n)| *n == q).map(|(i, _)| *i)
}

/// True for names that come from `stdgates.inc` rather than the CV library.
pub fn is_std_qasm(q: &str) -> bool {
    matches!(
        q,
        "h" | "x" | "y" | "z" | "s" | "sdg" | "rx" | "ry" | "rz" | "cx"
    )
}
