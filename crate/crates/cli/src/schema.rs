//! JSON file formats: dense states, observable sets (Pauli terms or dense
//! matrices), datasets, and the report writer.
//!
//! Reports are emitted by a small fixed-format writer (17 significant digits,
//! stable field order) so identical inputs produce byte-identical files.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Deserialize;

use qtomo_core::evidence::EvidenceReport;
use qtomo_core::maxent::ObservableSet;
use qtomo_core::operators::{DensityMatrix, HermitianOperator};
use qtomo_core::sampling::MeasurementDataset;

/// Dense Hermitian matrix: {"dim": d, "re": [[..]], "im": [[..]]}.
#[derive(Debug, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixFile {
    pub fn to_matrix(&self) -> Result<DMatrix<Complex64>, String> {
        let d = self.dim;
        if self.re.len() != d || self.im.len() != d {
            return Err(format!(
                "field `re`/`im`: expected {d} rows, found {}/{}",
                self.re.len(),
                self.im.len()
            ));
        }
        let mut m = DMatrix::zeros(d, d);
        for (i, (re_row, im_row)) in self.re.iter().zip(&self.im).enumerate() {
            if re_row.len() != d || im_row.len() != d {
                return Err(format!("row {i}: expected {d} columns"));
            }
            for j in 0..d {
                m[(i, j)] = Complex64::new(re_row[j], im_row[j]);
            }
        }
        Ok(m)
    }

    pub fn to_density_matrix(&self) -> Result<DensityMatrix, String> {
        let op = HermitianOperator::new(self.to_matrix()?).map_err(|e| e.to_string())?;
        DensityMatrix::new(op).map_err(|e| e.to_string())
    }
}

/// One observable: either a sum of weighted Pauli strings or a dense matrix.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum ObservableEntry {
    Pauli {
        label: String,
        pauli_terms: Vec<PauliTerm>,
    },
    Dense {
        label: String,
        dim: usize,
        re: Vec<Vec<f64>>,
        im: Vec<Vec<f64>>,
    },
}

/// A weighted Pauli string such as {"string": "XXIZ", "coeff": 0.25}.
/// Character k acts on qubit k (leftmost = qubit 0).
#[derive(Debug, Deserialize)]
pub struct PauliTerm {
    pub string: String,
    pub coeff: f64,
}

fn pauli_matrix(c: char) -> Result<DMatrix<Complex64>, String> {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let entries = match c.to_ascii_uppercase() {
        'I' => [one, zero, zero, one],
        'X' => [zero, one, one, zero],
        'Y' => [zero, -i, i, zero],
        'Z' => [one, zero, zero, -one],
        other => {
            return Err(format!(
                "invalid Pauli letter `{other}` (expected I, X, Y, Z)"
            ))
        }
    };
    Ok(DMatrix::from_row_slice(2, 2, &entries))
}

fn pauli_string_matrix(s: &str) -> Result<DMatrix<Complex64>, String> {
    if s.is_empty() {
        return Err("empty Pauli string".into());
    }
    let mut out = DMatrix::identity(1, 1);
    for c in s.chars() {
        out = out.kronecker(&pauli_matrix(c)?);
    }
    Ok(out)
}

impl ObservableEntry {
    pub fn to_operator(&self) -> Result<HermitianOperator, String> {
        match self {
            ObservableEntry::Pauli { label, pauli_terms } => {
                if pauli_terms.is_empty() {
                    return Err(format!("observable `{label}`: no pauli_terms"));
                }
                let qubits = pauli_terms[0].string.chars().count();
                let dim = 1usize << qubits;
                let mut sum: DMatrix<Complex64> = DMatrix::zeros(dim, dim);
                for term in pauli_terms {
                    if term.string.chars().count() != qubits {
                        return Err(format!(
                            "observable `{label}`: inconsistent Pauli string lengths"
                        ));
                    }
                    let m = pauli_string_matrix(&term.string)
                        .map_err(|e| format!("observable `{label}`: {e}"))?;
                    sum += m * Complex64::new(term.coeff, 0.0);
                }
                Ok(HermitianOperator::new(sum)
                    .map_err(|e| format!("observable `{label}`: {e}"))?
                    .with_label(label.clone()))
            }
            ObservableEntry::Dense { label, dim, re, im } => {
                let file = MatrixFile {
                    dim: *dim,
                    re: re.clone(),
                    im: im.clone(),
                };
                Ok(HermitianOperator::new(
                    file.to_matrix()
                        .map_err(|e| format!("observable `{label}`: {e}"))?,
                )
                .map_err(|e| format!("observable `{label}`: {e}"))?
                .with_label(label.clone()))
            }
        }
    }
}

pub fn parse_observable_set(entries: &[ObservableEntry]) -> Result<ObservableSet, String> {
    let operators = entries
        .iter()
        .map(|e| e.to_operator())
        .collect::<Result<Vec<_>, _>>()?;
    ObservableSet::new(operators).map_err(|e| e.to_string())
}

/// Dataset: {"N": .., "seed": .., "means": [{"label": .., "value": ..}]}.
#[derive(Debug, Deserialize)]
pub struct DatasetFile {
    #[serde(rename = "N")]
    pub sample_size: u64,
    #[serde(default)]
    pub seed: Option<u64>,
    pub means: Vec<MeanEntry>,
    #[serde(default)]
    pub truth_label: Option<String>,
}

#[derive(Debug, Deserialize)]
pub struct MeanEntry {
    pub label: String,
    pub value: f64,
}

impl DatasetFile {
    /// Means reordered to match the observable set, by label.
    pub fn aligned_means(&self, set: &ObservableSet) -> Result<Vec<f64>, String> {
        let mut out = Vec::with_capacity(set.len());
        for label in set.labels() {
            let entry = self
                .means
                .iter()
                .find(|m| m.label == label)
                .ok_or_else(|| format!("dataset: no mean for observable `{label}`"))?;
            out.push(entry.value);
        }
        if self.means.len() != set.len() {
            return Err(format!(
                "dataset: {} means for {} observables",
                self.means.len(),
                set.len()
            ));
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// fixed-format JSON writer

/// 17 significant digits; infinities become strings.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x > 0.0 {
        "\"infinity\"".into()
    } else if x < 0.0 {
        "\"-infinity\"".into()
    } else {
        "\"nan\"".into()
    }
}

fn escape_json(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

fn push_labeled_values(out: &mut String, key: &str, labels: &[&str], values: &[f64]) {
    out.push_str(&format!("  \"{key}\": [\n"));
    for (k, (label, value)) in labels.iter().zip(values).enumerate() {
        let comma = if k + 1 == values.len() { "" } else { "," };
        out.push_str(&format!(
            "    {{\"label\": \"{}\", \"value\": {}}}{comma}\n",
            escape_json(label),
            fmt_float(*value)
        ));
    }
    out.push_str("  ],\n");
}

fn push_matrix(out: &mut String, key: &str, matrix: &DMatrix<Complex64>, indent: &str) {
    let d = matrix.nrows();
    out.push_str(&format!("{indent}\"{key}\": {{\n"));
    out.push_str(&format!("{indent}  \"dim\": {d},\n"));
    for (part, name) in [(true, "re"), (false, "im")] {
        out.push_str(&format!("{indent}  \"{name}\": [\n"));
        for i in 0..d {
            let row: Vec<String> = (0..d)
                .map(|j| {
                    let z = matrix[(i, j)];
                    fmt_float(if part { z.re } else { z.im })
                })
                .collect();
            let comma = if i + 1 == d { "" } else { "," };
            out.push_str(&format!("{indent}    [{}]{comma}\n", row.join(", ")));
        }
        let comma = if part { "," } else { "" };
        out.push_str(&format!("{indent}  ]{comma}\n"));
    }
    out.push_str(&format!("{indent}}}\n"));
}

/// The full report document: status, scalar chain, Lagrange parameters,
/// error bars, and the dense estimate.
pub fn render_report(
    report: &EvidenceReport,
    set: &ObservableSet,
    sample_size: u64,
    criterion_threshold: f64,
    prior_tol: f64,
) -> String {
    let labels: Vec<&str> = set.labels().collect();
    let mut out = String::from("{\n");
    out.push_str(&format!("  \"status\": \"{}\",\n", report.status.label()));
    out.push_str(&format!("  \"r\": {},\n", set.len()));
    out.push_str(&format!("  \"N\": {sample_size},\n"));
    out.push_str(&format!("  \"n\": {},\n", set.dim() * set.dim() - 1));
    out.push_str(&format!(
        "  \"criterion_threshold\": {},\n",
        fmt_float(criterion_threshold)
    ));
    out.push_str(&format!("  \"prior_tol\": {},\n", fmt_float(prior_tol)));
    out.push_str(&format!(
        "  \"s_data\": {},\n",
        fmt_float(report.s_data.nats())
    ));
    out.push_str(&format!("  \"n_min\": {},\n", fmt_float(report.n_min)));
    match &report.scalars {
        Some(s) => {
            out.push_str(&format!("  \"alpha0\": {},\n", fmt_float(s.alpha0)));
            out.push_str(&format!("  \"beta\": {},\n", fmt_float(s.beta)));
            out.push_str(&format!("  \"criterion\": {},\n", fmt_float(s.criterion)));
            out.push_str(&format!("  \"variance\": {},\n", fmt_float(s.variance)));
            out.push_str(&format!(
                "  \"posterior_mean_check\": {},\n",
                fmt_float(s.posterior_mean_check)
            ));
            out.push_str(&format!(
                "  \"alpha0_range_ratio\": {},\n",
                fmt_float(s.alpha0_range_ratio)
            ));
        }
        None => {
            out.push_str("  \"alpha0\": null,\n");
            out.push_str("  \"beta\": null,\n");
            out.push_str("  \"criterion\": null,\n");
            out.push_str("  \"variance\": null,\n");
            out.push_str("  \"posterior_mean_check\": null,\n");
            out.push_str("  \"alpha0_range_ratio\": null,\n");
        }
    }
    push_labeled_values(
        &mut out,
        "lambda",
        &labels,
        report.data_state.lagrange().values(),
    );
    push_labeled_values(&mut out, "lambda_e", &labels, report.lambda_e.values());
    match &report.error_bars {
        Some(bars) => {
            out.push_str(&format!(
                "  \"error_measured\": {},\n",
                fmt_float(bars.measured)
            ));
            out.push_str(&format!(
                "  \"error_unmeasured\": {},\n",
                fmt_float(bars.unmeasured)
            ));
            push_labeled_values(
                &mut out,
                "per_observable_stderr",
                &labels,
                &bars.per_observable,
            );
        }
        None => {
            out.push_str("  \"error_measured\": null,\n");
            out.push_str("  \"error_unmeasured\": null,\n");
            out.push_str("  \"per_observable_stderr\": null,\n");
        }
    }
    push_matrix(&mut out, "rho_e", report.estimate.entries(), "  ");
    out.push('}');
    out.push('\n');
    out
}

/// Dataset document mirroring [`DatasetFile`].
pub fn render_dataset(dataset: &MeasurementDataset, set: &ObservableSet) -> String {
    let labels: Vec<&str> = set.labels().collect();
    let mut out = String::from("{\n");
    out.push_str(&format!("  \"N\": {},\n", dataset.sample_size));
    out.push_str(&format!("  \"seed\": {},\n", dataset.seed));
    if let Some(truth) = &dataset.truth_label {
        out.push_str(&format!("  \"truth_label\": \"{}\",\n", escape_json(truth)));
    }
    let mut body = String::new();
    push_labeled_values(&mut body, "means", &labels, &dataset.means);
    // strip the trailing comma of the last section
    let body = body.trim_end_matches('\n').trim_end_matches(',');
    out.push_str(body);
    out.push_str("\n}\n");
    out
}
