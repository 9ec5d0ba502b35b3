//! Declarative experiment configs, the subcommand drivers behind the `qsl`
//! binary, and deterministic JSON/CSV output assembly.

use serde::{Deserialize, Serialize};

use crate::direct::{solve_ivp_march, solve_ivp_series, ProblemSpec};
use crate::error::{QslError, Result};
use crate::gl::{coeffs_from_data, transform_problem, GLCoefficients, DIAGONAL_CONVENTION};
use crate::harness::{
    ashrafyan_check, isospectral_family, levinson_marchenko_roundtrip, RoundTripReport,
    RoundTripTolerances,
};
use crate::qcore::{LatticeFn, QLattice};
use crate::spectral::{
    char_delta, char_delta_dot, find_eigenvalues, lambda_seed, norming_by_derivative,
    norming_by_quadrature, SpectralData,
};

pub const TOOL_NAME: &str = "qsl";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One experiment, fully described: lattice, problem, task inputs, and the
/// effective tolerances. Unknown keys are rejected at parse time.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub lattice: LatticeSection,
    #[serde(default)]
    pub potential: PotentialSection,
    #[serde(default)]
    pub boundary: BoundarySection,
    #[serde(default)]
    pub task: TaskSection,
    #[serde(default)]
    pub tolerances: ToleranceSection,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    pub q: f64,
    pub a: f64,
    pub depth: usize,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSection {
    Zero,
    Constant { value: f64 },
    Linear { slope: f64 },
    Samples { values: Vec<f64>, value_at_zero: f64 },
}

impl Default for PotentialSection {
    fn default() -> Self {
        PotentialSection::Zero
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySection {
    #[serde(default)]
    pub h: f64,
    #[serde(default, rename = "H")]
    pub big_h: f64,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSection {
    /// number of eigenvalues for spectrum and data-driven tasks
    #[serde(default)]
    pub eigen_count: usize,
    /// probe values for the direct solvers
    #[serde(default)]
    pub lambdas: Vec<f64>,
    /// transform coefficients for reconstruct/roundtrip
    #[serde(default)]
    pub coefficients: Vec<f64>,
    /// one coefficient list per isospectral family member
    #[serde(default)]
    pub coefficient_grid: Vec<Vec<f64>>,
    /// target norming constants for data-driven reconstruct or the
    /// monotone-norming check
    #[serde(default)]
    pub target_normings: Vec<f64>,
    #[serde(default)]
    pub mode: RoundTripMode,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum RoundTripMode {
    #[default]
    Levinson,
    Ashrafyan,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceSection {
    /// series-solver convergence target (also the `--seed-tolerance` flag)
    pub seed: f64,
    /// relative eigenvalue agreement between problems
    pub eigenvalue: f64,
    /// relative norming agreement with the transform law
    pub norming: f64,
    /// absolute coefficient recovery error
    pub coefficient: f64,
    /// deviation budget for identity transforms
    pub identity: f64,
    /// kernel row-solve residual
    pub gl_residual: f64,
}

impl Default for ToleranceSection {
    fn default() -> Self {
        Self {
            seed: 1e-10,
            eigenvalue: 1e-6,
            norming: 1e-8,
            coefficient: 1e-5,
            identity: 1e-12,
            gl_residual: 1e-9,
        }
    }
}

impl ExperimentConfig {
    pub fn to_lattice(&self) -> Result<QLattice> {
        QLattice::new(self.lattice.q, self.lattice.a, self.lattice.depth)
    }

    pub fn to_problem(&self) -> Result<ProblemSpec> {
        let lat = self.to_lattice()?;
        let v = match &self.potential {
            PotentialSection::Zero => LatticeFn::constant(lat, 0.0),
            PotentialSection::Constant { value } => LatticeFn::constant(lat, *value),
            PotentialSection::Linear { slope } => LatticeFn::from_fn(lat, |x| slope * x),
            PotentialSection::Samples {
                values,
                value_at_zero,
            } => {
                if values.len() != lat.depth() + 1 {
                    return Err(QslError::Config {
                        reason: format!(
                            "potential.values needs {} samples for depth {}, got {}",
                            lat.depth() + 1,
                            lat.depth(),
                            values.len()
                        ),
                    });
                }
                LatticeFn::new(lat, values.clone(), *value_at_zero)?
            }
        };
        ProblemSpec::new(lat, v, self.boundary.h, self.boundary.big_h)
    }

    pub fn roundtrip_tolerances(&self) -> RoundTripTolerances {
        RoundTripTolerances {
            eigenvalue: self.tolerances.eigenvalue,
            norming: self.tolerances.norming,
            coefficient: self.tolerances.coefficient,
            identity: self.tolerances.identity,
            gl_residual: self.tolerances.gl_residual,
        }
    }
}

/// Minimal JSON document with deterministic rendering: object keys keep
/// insertion order, floats print with 17 significant digits.
#[derive(Clone, Debug, PartialEq)]
pub enum JVal {
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    Arr(Vec<JVal>),
    Obj(Vec<(String, JVal)>),
}

impl JVal {
    pub fn obj(pairs: Vec<(&str, JVal)>) -> JVal {
        JVal::Obj(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }

    pub fn nums(values: &[f64]) -> JVal {
        JVal::Arr(values.iter().map(|v| JVal::Num(*v)).collect())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out);
        out
    }

    fn write(&self, out: &mut String) {
        match self {
            JVal::Null => out.push_str("null"),
            JVal::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            JVal::Int(i) => out.push_str(&i.to_string()),
            JVal::Num(x) => {
                if x.is_finite() {
                    out.push_str(&format!("{x:.16e}"));
                } else {
                    out.push_str("null");
                }
            }
            JVal::Str(s) => write_json_string(s, out),
            JVal::Arr(items) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    item.write(out);
                }
                out.push(']');
            }
            JVal::Obj(pairs) => {
                out.push('{');
                for (i, (k, v)) in pairs.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    write_json_string(k, out);
                    out.push(':');
                    v.write(out);
                }
                out.push('}');
            }
        }
    }
}

fn write_json_string(s: &str, out: &mut String) {
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                out.push_str(&format!("\\u{:04x}", c as u32));
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

/// Converts a `serde_json` value; map keys come out alphabetically, which
/// keeps config echoes byte-stable.
pub fn from_json(value: &serde_json::Value) -> JVal {
    match value {
        serde_json::Value::Null => JVal::Null,
        serde_json::Value::Bool(b) => JVal::Bool(*b),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                JVal::Int(i)
            } else {
                JVal::Num(n.as_f64().unwrap_or(f64::NAN))
            }
        }
        serde_json::Value::String(s) => JVal::Str(s.clone()),
        serde_json::Value::Array(items) => JVal::Arr(items.iter().map(from_json).collect()),
        serde_json::Value::Object(map) => {
            JVal::Obj(map.iter().map(|(k, v)| (k.clone(), from_json(v))).collect())
        }
    }
}

/// Rendered command output: the JSON document plus an optional CSV table.
#[derive(Clone, Debug)]
pub struct ResultBundle {
    pub json: JVal,
    pub csv: Option<String>,
}

fn bundle(config: &ExperimentConfig, results: JVal, csv: Option<String>) -> Result<ResultBundle> {
    let echo = serde_json::to_value(config).map_err(|e| QslError::Config {
        reason: format!("config echo failed: {e}"),
    })?;
    let json = JVal::obj(vec![
        ("tool", JVal::Str(TOOL_NAME.into())),
        ("version", JVal::Str(TOOL_VERSION.into())),
        (
            "conventions",
            JVal::obj(vec![(
                "kernel_diagonal",
                JVal::Str(DIAGONAL_CONVENTION.into()),
            )]),
        ),
        ("config", from_json(&echo)),
        ("results", results),
    ]);
    Ok(ResultBundle { json, csv })
}

fn csv_table(header: &str, rows: &[Vec<f64>]) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Eigenvalue/norming table for the configured problem.
pub fn cmd_spectrum(config: &ExperimentConfig) -> Result<ResultBundle> {
    let spec = config.to_problem()?;
    let lat = *spec.lattice();
    let eigenvalues = find_eigenvalues(&spec, config.task.eigen_count)?;
    let mut rows = Vec::with_capacity(eigenvalues.len());
    let mut csv_rows = Vec::with_capacity(eigenvalues.len());
    for (n, &lam) in eigenvalues.iter().enumerate() {
        let alpha_quad = norming_by_quadrature(&spec, lam)?;
        let alpha_deriv = norming_by_derivative(&spec, lam)?;
        let seed_ratio = lam / lambda_seed(lat.q(), lat.a(), n);
        let delta_residual =
            (char_delta(&spec, lam) / char_delta_dot(&spec, lam)).abs() / lam.abs().max(1.0);
        let agreement = (alpha_quad - alpha_deriv).abs() / alpha_quad.abs();
        rows.push(JVal::obj(vec![
            ("n", JVal::Int(n as i64)),
            ("lambda", JVal::Num(lam)),
            ("seed_ratio", JVal::Num(seed_ratio)),
            ("alpha_quadrature", JVal::Num(alpha_quad)),
            ("alpha_derivative", JVal::Num(alpha_deriv)),
            ("alpha_agreement", JVal::Num(agreement)),
            ("delta_residual", JVal::Num(delta_residual)),
        ]));
        csv_rows.push(vec![
            n as f64,
            lam,
            seed_ratio,
            alpha_quad,
            alpha_deriv,
            agreement,
            delta_residual,
        ]);
    }
    let results = JVal::obj(vec![
        ("problem_digest", JVal::Str(spec.digest())),
        ("spectrum", JVal::Arr(rows)),
    ]);
    let csv = csv_table(
        "n,lambda,seed_ratio,alpha_quadrature,alpha_derivative,alpha_agreement,delta_residual",
        &csv_rows,
    );
    bundle(config, results, Some(csv))
}

/// Direct IVP solutions at each configured `lambda`, with the dual-solver
/// agreement column where the series solver applies.
pub fn cmd_direct(config: &ExperimentConfig) -> Result<ResultBundle> {
    let spec = config.to_problem()?;
    let lat = *spec.lattice();
    let points = lat.points();
    let mut blocks = Vec::new();
    let mut csv_rows = Vec::new();
    for &lam in &config.task.lambdas {
        let march = solve_ivp_march(&spec, lam, 1.0, spec.h())?;
        let agreement = if lam != 0.0 {
            let series = solve_ivp_series(&spec, lam, 1.0, spec.h(), config.tolerances.seed)?;
            let dev = march
                .phi
                .values()
                .iter()
                .zip(series.phi.values())
                .fold(0.0f64, |m, (a, b)| {
                    m.max((a - b).abs() / a.abs().max(b.abs()).max(1e-300))
                });
            JVal::Num(dev)
        } else {
            JVal::Null
        };
        let samples: Vec<JVal> = points
            .iter()
            .zip(march.phi.values())
            .enumerate()
            .map(|(m, (x, y))| {
                JVal::obj(vec![
                    ("m", JVal::Int(m as i64)),
                    ("x", JVal::Num(*x)),
                    ("value", JVal::Num(*y)),
                ])
            })
            .collect();
        for (m, (x, y)) in points.iter().zip(march.phi.values()).enumerate() {
            csv_rows.push(vec![lam, m as f64, *x, *y]);
        }
        blocks.push(JVal::obj(vec![
            ("lambda", JVal::Num(lam)),
            ("residual", JVal::Num(march.residual)),
            ("dual_agreement", agreement),
            (
                "super_value",
                march
                    .phi
                    .super_value()
                    .map(JVal::Num)
                    .unwrap_or(JVal::Null),
            ),
            ("samples", JVal::Arr(samples)),
        ]));
    }
    let results = JVal::obj(vec![
        ("problem_digest", JVal::Str(spec.digest())),
        ("solutions", JVal::Arr(blocks)),
    ]);
    let csv = csv_table("lambda,m,x,value", &csv_rows);
    bundle(config, results, Some(csv))
}

fn coefficients_for(config: &ExperimentConfig, spec: &ProblemSpec) -> Result<GLCoefficients> {
    let task = &config.task;
    if !task.coefficients.is_empty() {
        let count = task.coefficients.len().max(task.eigen_count);
        let data = SpectralData::compute(spec, count)?;
        GLCoefficients::new(task.coefficients.clone(), data)
    } else if !task.target_normings.is_empty() {
        let base = SpectralData::compute(spec, task.target_normings.len())?;
        let target = SpectralData {
            eigenvalues: base.eigenvalues.clone(),
            normings: task.target_normings.clone(),
            source_digest: String::new(),
        };
        coeffs_from_data(&target, &base, config.tolerances.eigenvalue)
    } else {
        Err(QslError::Config {
            reason: "task.coefficients or task.target_normings required".into(),
        })
    }
}

fn report_json(report: &RoundTripReport) -> JVal {
    let carrier = match &report.carrier {
        Some(c) => JVal::obj(vec![
            ("quad_dev", JVal::Num(c.quad_dev)),
            ("deep_dev", JVal::Num(c.deep_dev)),
            ("action_residual", JVal::Num(c.action_residual)),
            ("tridiag_defect", JVal::Num(c.tridiag_defect)),
        ]),
        None => JVal::Null,
    };
    JVal::obj(vec![
        ("base_digest", JVal::Str(report.base_digest.clone())),
        ("coefficients", JVal::nums(&report.coefficients)),
        ("eigenvalue_devs", JVal::nums(&report.eigenvalue_devs)),
        ("norming_devs", JVal::nums(&report.norming_devs)),
        ("coefficient_devs", JVal::nums(&report.coefficient_devs)),
        ("potential_dev", JVal::Num(report.potential_dev)),
        ("h_dev", JVal::Num(report.h_dev)),
        ("big_h_dev", JVal::Num(report.big_h_dev)),
        ("gl_residual", JVal::Num(report.gl_residual)),
        ("carrier", carrier),
        ("hypothesis_rejected", JVal::Bool(report.hypothesis_rejected)),
        ("mechanism", JVal::Bool(report.mechanism)),
        (
            "failures",
            JVal::Arr(
                report
                    .failures
                    .iter()
                    .map(|f| JVal::Str(f.clone()))
                    .collect(),
            ),
        ),
        (
            "flags",
            JVal::obj(vec![
                ("admissible", JVal::Bool(report.flags.admissible)),
                ("gl_residual", JVal::Bool(report.flags.gl_residual)),
                ("eigenvalues", JVal::Bool(report.flags.eigenvalues)),
                ("normings", JVal::Bool(report.flags.normings)),
                ("coefficients", JVal::Bool(report.flags.coefficients)),
                ("triple", JVal::Bool(report.flags.triple)),
            ]),
        ),
        ("pass", JVal::Bool(report.pass())),
    ])
}

/// Full GL pipeline from coefficients (or target data): kernel residual,
/// reconstructed triple, transformed spectral table, round-trip report.
pub fn cmd_reconstruct(config: &ExperimentConfig) -> Result<ResultBundle> {
    let spec = config.to_problem()?;
    let lat = *spec.lattice();
    let coeffs = coefficients_for(config, &spec)?;
    let out = transform_problem(&spec, &coeffs)?;
    let report = levinson_marchenko_roundtrip(&spec, &coeffs, &config.roundtrip_tolerances());

    let points = lat.points();
    let mut csv_rows = Vec::with_capacity(points.len());
    let v_samples: Vec<JVal> = points
        .iter()
        .zip(out.spec.v().values())
        .enumerate()
        .map(|(m, (x, v))| {
            csv_rows.push(vec![m as f64, *x, *v]);
            JVal::obj(vec![
                ("m", JVal::Int(m as i64)),
                ("x", JVal::Num(*x)),
                ("v", JVal::Num(*v)),
            ])
        })
        .collect();

    let results = JVal::obj(vec![
        ("base_digest", JVal::Str(spec.digest())),
        ("kernel_residual", JVal::Num(out.kernel.residual)),
        (
            "kernel_diagonal",
            JVal::Str(out.kernel.diagonal_convention.into()),
        ),
        ("h", JVal::Num(out.spec.h())),
        ("H", JVal::Num(out.spec.big_h())),
        ("potential", JVal::Arr(v_samples)),
        ("eigenvalues", JVal::nums(&out.data.eigenvalues)),
        ("normings", JVal::nums(&out.data.normings)),
        ("report", report_json(&report)),
    ]);
    let csv = csv_table("m,x,v", &csv_rows);
    bundle(config, results, Some(csv))
}

/// Uniqueness experiments: equal-data round trip or the monotone-norming
/// mechanism check, chosen by `task.mode`.
pub fn cmd_roundtrip(config: &ExperimentConfig) -> Result<ResultBundle> {
    let spec = config.to_problem()?;
    let tol = config.roundtrip_tolerances();
    let report = match config.task.mode {
        RoundTripMode::Levinson => {
            let coeffs = coefficients_for(config, &spec)?;
            levinson_marchenko_roundtrip(&spec, &coeffs, &tol)
        }
        RoundTripMode::Ashrafyan => {
            if config.task.target_normings.is_empty() {
                return Err(QslError::Config {
                    reason: "task.target_normings required for ashrafyan mode".into(),
                });
            }
            ashrafyan_check(&spec, &config.task.target_normings, &tol)
        }
    };
    let mut csv_rows = vec![
        vec![report.potential_dev],
        vec![report.h_dev],
        vec![report.big_h_dev],
        vec![report.gl_residual],
    ];
    csv_rows[0].insert(0, 0.0);
    csv_rows[1].insert(0, 1.0);
    csv_rows[2].insert(0, 2.0);
    csv_rows[3].insert(0, 3.0);
    let results = JVal::obj(vec![("report", report_json(&report))]);
    let csv = csv_table("row,deviation", &csv_rows);
    bundle(config, results, Some(csv))
}

/// One transform per grid entry, in parallel, reported in grid order.
pub fn cmd_isofamily(config: &ExperimentConfig) -> Result<ResultBundle> {
    let spec = config.to_problem()?;
    let lat = *spec.lattice();
    let grid = &config.task.coefficient_grid;
    let max_len = grid.iter().map(Vec::len).max().unwrap_or(0);
    let count = max_len.max(config.task.eigen_count).max(1);
    let data = SpectralData::compute(&spec, count)?;
    let coeff_sets: Vec<GLCoefficients> = grid
        .iter()
        .map(|c| GLCoefficients::new(c.clone(), data.clone()))
        .collect::<Result<_>>()?;
    let family = isospectral_family(&spec, &coeff_sets);

    let points = lat.points();
    let mut members = Vec::with_capacity(family.len());
    let mut csv_rows = Vec::new();
    for (index, member) in family.iter().enumerate() {
        match member {
            Ok((member_spec, member_data)) => {
                for (n, (lam, alpha)) in member_data
                    .eigenvalues
                    .iter()
                    .zip(&member_data.normings)
                    .enumerate()
                {
                    csv_rows.push(vec![index as f64, n as f64, *lam, *alpha]);
                }
                let v_samples: Vec<JVal> = points
                    .iter()
                    .zip(member_spec.v().values())
                    .map(|(x, v)| JVal::Arr(vec![JVal::Num(*x), JVal::Num(*v)]))
                    .collect();
                members.push(JVal::obj(vec![
                    ("index", JVal::Int(index as i64)),
                    ("coefficients", JVal::nums(&grid[index])),
                    ("h", JVal::Num(member_spec.h())),
                    ("H", JVal::Num(member_spec.big_h())),
                    ("eigenvalues", JVal::nums(&member_data.eigenvalues)),
                    ("normings", JVal::nums(&member_data.normings)),
                    ("potential", JVal::Arr(v_samples)),
                ]));
            }
            Err(e) => {
                members.push(JVal::obj(vec![
                    ("index", JVal::Int(index as i64)),
                    ("coefficients", JVal::nums(&grid[index])),
                    ("error", JVal::Str(e.to_string())),
                ]));
            }
        }
    }
    let results = JVal::obj(vec![
        ("base_digest", JVal::Str(spec.digest())),
        ("base_eigenvalues", JVal::nums(&data.eigenvalues)),
        ("members", JVal::Arr(members)),
    ]);
    let csv = csv_table("member,n,lambda,norming", &csv_rows);
    bundle(config, results, Some(csv))
}
