//! Shared serialization and text rendering for reports.
//!
//! Complex numbers travel as `[re, im]` pairs. Text output renders them in
//! polar form with the phase normalized to `(−π, π]`, six decimals.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serializer;

use crate::coins::normalize_phase;

pub fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn serialize_amps<S: Serializer>(amps: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(amps.iter().map(|&z| pair(z)))
}

/// Row-major nested `[[[re, im], ...], ...]`.
pub fn matrix_pairs(m: &DMatrix<Complex64>) -> Vec<Vec<[f64; 2]>> {
    m.row_iter()
        .map(|row| row.iter().map(|&z| pair(z)).collect())
        .collect()
}

pub fn format_complex(z: Complex64) -> String {
    let r = z.norm();
    if r < 5e-7 {
        return "0".to_string();
    }
    let theta = normalize_phase(z.arg());
    if theta.abs() < 5e-7 {
        format!("{r:.6}")
    } else {
        format!("{r:.6}∠{theta:.6}")
    }
}

/// `|300⟩` when every index is a single digit, `|12,0,1⟩` otherwise.
pub fn format_ket(indices: &[usize]) -> String {
    let body = if indices.iter().all(|&i| i < 10) {
        indices.iter().map(|i| i.to_string()).collect::<String>()
    } else {
        indices
            .iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    format!("|{body}⟩")
}

pub fn format_amps(amps: &[Complex64]) -> String {
    let parts: Vec<String> = amps.iter().map(|&z| format_complex(z)).collect();
    format!("({})", parts.join(", "))
}
