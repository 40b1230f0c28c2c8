//! Deterministic result files: population CSV and a JSON run summary.
//!
//! Rendering is fixed-format (12 significant digits, LF line endings, stable
//! field order) so rerunning the same configuration reproduces each output
//! byte for byte. Files are staged next to their target and renamed into
//! place, so a failed run never leaves a partial file.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::dynamics::PopulationTrace;
use crate::Result;

/// 12 significant digits; enough to round-trip the physics while keeping
/// rendering deterministic.
fn format_value(x: f64) -> String {
    format!("{x:.11e}")
}

/// CSV column for a basis label: "1" -> "p1", "3+" -> "p3p", "3-" -> "p3m".
fn column_name(label: &str) -> String {
    let mut name = String::from("p");
    for ch in label.chars() {
        match ch {
            '+' => name.push('p'),
            '-' => name.push('m'),
            c if c.is_ascii_alphanumeric() => name.push(c.to_ascii_lowercase()),
            _ => name.push('_'),
        }
    }
    name
}

/// Renders a population trace as CSV with a `t_s` time column in seconds.
pub fn render_trace_csv(trace: &PopulationTrace) -> String {
    let mut out = String::from("t_s");
    for label in trace.labels() {
        out.push(',');
        out.push_str(&column_name(label));
    }
    out.push('\n');
    for (t, row) in trace.times().iter().zip(trace.rows()) {
        out.push_str(&format_value(*t));
        for p in row {
            out.push(',');
            out.push_str(&format_value(*p));
        }
        out.push('\n');
    }
    out
}

/// Renders any serializable summary as pretty JSON with a trailing newline.
pub fn render_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| crate::Error::Numerical(format!("summary serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

fn staging_path(path: &Path) -> PathBuf {
    let mut name = path
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".tmp");
    path.with_file_name(name)
}

/// Writes fully rendered text, staging through a sibling `.tmp` file.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let tmp = staging_path(path);
    std::fs::write(&tmp, text)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drive::tests::{test_dipoles, test_fields};
    use crate::dynamics::{propagate_trace, time_grid, QuantumState};
    use crate::model::{build_interaction_hamiltonian, Detunings};
    use crate::units::two_pi_mhz;
    use crate::vibronic::Chirality;

    fn sample_trace() -> PopulationTrace {
        let set =
            crate::drive::build_coupling_set(&test_fields(), &test_dipoles(), Chirality::Left)
                .unwrap();
        let detunings = Detunings::two_photon(two_pi_mhz(20.0)).unwrap();
        let h = build_interaction_hamiltonian(&set, &detunings).unwrap();
        let psi0 = QuantumState::basis_state(4, 0).unwrap();
        let times = time_grid(2.5e-6, 5).unwrap();
        propagate_trace(&h, &psi0, &times).unwrap()
    }

    #[test]
    fn csv_has_expected_header_and_shape() {
        let csv = render_trace_csv(&sample_trace());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t_s,p1,p2,p3p,p3m");
        assert_eq!(lines.len(), 6);
        for line in &lines[1..] {
            assert_eq!(line.matches(',').count(), 4);
        }
        assert!(csv.ends_with('\n'));
        assert!(!csv.contains('\r'));
        // First row is t = 0 with all population in state 1.
        let first: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(first[0].parse::<f64>().unwrap(), 0.0);
        assert_eq!(first[1].parse::<f64>().unwrap(), 1.0);
    }

    #[test]
    fn rendering_is_reproducible() {
        let a = render_trace_csv(&sample_trace());
        let b = render_trace_csv(&sample_trace());
        assert_eq!(a, b);
    }

    #[test]
    fn values_round_trip_through_the_format() {
        for &x in &[0.0, 1.0, 0.9894951, 1.25e-6, 3.333333333333e-7] {
            let parsed: f64 = format_value(x).parse().unwrap();
            assert!(
                (parsed - x).abs() <= 1e-12 * x.abs().max(1e-300),
                "{x} -> {parsed}"
            );
        }
    }

    #[test]
    fn staged_write_lands_and_cleans_up() {
        let dir = std::env::temp_dir().join(format!("esst-output-{}", std::process::id()));
        let path = dir.join("trace.csv");
        write_text(&path, "t_s,p1\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "t_s,p1\n");
        assert!(!staging_path(&path).exists());
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn json_rendering_is_stable() {
        #[derive(Serialize)]
        struct Demo {
            name: &'static str,
            value: f64,
        }
        let text = render_json(&Demo { name: "x", value: 0.5 }).unwrap();
        assert_eq!(text, "{\n  \"name\": \"x\",\n  \"value\": 0.5\n}\n");
    }
}
