//! Analysis reports and the summary table.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use mubkit_core::cipher::{hn_spec, wn_spec, CipherSpec};
use mubkit_core::hilbert::{OrthonormalBasis, Povm};
use mubkit_core::keyanalysis::{
    compose_partition, composed_key_uncertainty_bound, conjecture_probe, key_guess_povm,
    key_guess_success, mes_search, min_entropy_key_uncertainty, minimal_part_entropy, mu_bound,
    povm_key_entropy, sanchez_bound, shannon_key_uncertainty_bound, MesConfig, PARTITION_TOL,
    PROBE_MAX_QUBITS,
};
use mubkit_core::mub::MubFamily;
use mubkit_core::Result;

pub const SCHEMA: &str = "report_v1";
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum AnalyzedCipher {
    Hn,
    Wn,
}

impl AnalyzedCipher {
    pub fn spec(self, n: u32) -> Result<CipherSpec> {
        match self {
            Self::Hn => hn_spec(n),
            Self::Wn => Ok(wn_spec(&MubFamily::with_default_field(n)?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinEntropyPovm {
    pub success_prob: f64,
    pub h_inf: f64,
    /// `m - n`, the largest possible min-entropy key uncertainty.
    pub upper_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasuredPovm {
    pub label: String,
    pub entropy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchInfo {
    pub method: String,
    pub restarts: usize,
    pub starts: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticBounds {
    pub mu: Option<f64>,
    pub larsen_sanchez: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShannonSection {
    pub measured_povms: Vec<MeasuredPovm>,
    /// Best entropy sum found; an upper bound on the true minimum.
    pub mes_upper_bound: f64,
    pub search: SearchInfo,
    pub analytic_lower_bounds: AnalyticBounds,
    /// Key-uncertainty lower bound from the analytic entropy-sum bound.
    pub lemma3_bound: f64,
    /// The same bound evaluated at the searched value; valid only if the search is optimal.
    pub search_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionSection {
    pub v: u32,
    pub parts: usize,
    pub partition_verified: bool,
    pub m_v: f64,
    pub minimizing_part: usize,
    pub bound: f64,
    pub product_measurement_entropy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema: String,
    pub tool_version: String,
    pub seed: u64,
    pub wall_clock_seconds: Option<f64>,
    pub cipher: AnalyzedCipher,
    pub n: u32,
    pub t: u32,
    pub m: u32,
    pub min_entropy_povm: MinEntropyPovm,
    pub shannon: ShannonSection,
    pub composition: Option<CompositionSection>,
    pub conjecture_probe: Option<Value>,
}

#[derive(Debug, Clone, Copy)]
pub struct AnalysisOptions {
    pub compose: Option<u32>,
    pub restarts: usize,
    pub seed: u64,
}

fn search_info(cfg: &MesConfig, starts: usize, converged: bool) -> SearchInfo {
    SearchInfo {
        method: "multi-start projected gradient on the unit sphere".into(),
        restarts: cfg.restarts,
        starts,
        seed: cfg.seed,
        tolerance: cfg.tolerance,
        max_iterations: cfg.max_iterations,
        converged,
    }
}

pub fn analyze(cipher: AnalyzedCipher, n: u32, opts: &AnalysisOptions) -> Result<AnalysisReport> {
    let spec = cipher.spec(n)?;
    let cfg = MesConfig::default().with_restarts(opts.restarts).with_seed(opts.seed);

    let guess = key_guess_povm(&spec, 0)?;
    let min_entropy_povm = MinEntropyPovm {
        success_prob: key_guess_success(&spec, 0, &guess)?,
        h_inf: min_entropy_key_uncertainty(&spec, 0, &guess)?,
        upper_bound: (spec.m() - spec.n()) as f64,
    };

    let mut povms: Vec<(String, Povm)> = Vec::new();
    if cipher == AnalyzedCipher::Wn {
        povms.push(("computational".into(), Povm::projective(&OrthonormalBasis::computational(spec.dim()))));
    }
    for (i, b) in spec.bases().iter().enumerate() {
        povms.push((format!("basis:{i}"), Povm::projective(b)));
    }
    povms.push(("key_guess".into(), guess));
    let measured_povms = povms
        .iter()
        .map(|(label, p)| {
            Ok(MeasuredPovm {
                label: label.clone(),
                entropy: povm_key_entropy(&spec, 0, p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mes = mes_search(spec.bases(), &cfg)?;
    let count = spec.bases().len() as u64;
    let analytic = match cipher {
        AnalyzedCipher::Hn => AnalyticBounds { mu: Some(mu_bound(n)), larsen_sanchez: None },
        AnalyzedCipher::Wn => AnalyticBounds { mu: None, larsen_sanchez: Some(sanchez_bound(count)) },
    };
    let analytic_value = analytic.mu.or(analytic.larsen_sanchez).unwrap_or(0.0);
    let shannon = ShannonSection {
        measured_povms,
        mes_upper_bound: mes.value,
        search: search_info(&cfg, mes.restarts, mes.converged),
        analytic_lower_bounds: analytic,
        lemma3_bound: shannon_key_uncertainty_bound(&spec, analytic_value),
        search_bound: shannon_key_uncertainty_bound(&spec, mes.value),
    };

    let composition = match opts.compose {
        Some(v) if v > 1 => {
            let partition = compose_partition(&spec, v)?;
            let m_v = minimal_part_entropy(&partition, &cfg)?;
            let composed = spec.compose(v)?;
            let product = Povm::projective(&OrthonormalBasis::computational(composed.dim()));
            Some(CompositionSection {
                v,
                parts: partition.parts.len(),
                partition_verified: partition.verify(PARTITION_TOL)?,
                m_v: m_v.value,
                minimizing_part: m_v.part,
                bound: composed_key_uncertainty_bound(&spec, v, m_v.value),
                product_measurement_entropy: povm_key_entropy(&composed, 0, &product)?,
            })
        }
        _ => None,
    };

    let v = opts.compose.unwrap_or(1).max(1);
    let conjecture_probe = if cipher == AnalyzedCipher::Wn && v * n <= PROBE_MAX_QUBITS {
        let probe = conjecture_probe(n, v, &cfg)?;
        Some(serde_json::to_value(probe).expect("probe serializes"))
    } else {
        None
    };

    Ok(AnalysisReport {
        schema: SCHEMA.into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        seed: opts.seed,
        wall_clock_seconds: None,
        cipher,
        n,
        t: spec.t(),
        m: spec.m(),
        min_entropy_povm,
        shannon,
        composition,
        conjecture_probe,
    })
}

fn round_significant(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().expect("formatted float parses")
}

/// Rounds every floating-point number in `value` to 12 significant digits.
pub fn canonicalize(value: Value) -> Value {
    match value {
        Value::Number(num) if num.is_f64() => {
            let x = round_significant(num.as_f64().expect("f64 number"));
            serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonicalize).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, canonicalize(v))).collect()),
        other => other,
    }
}

pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let value = canonicalize(serde_json::to_value(value).expect("report serializes"));
    let mut out = serde_json::to_string_pretty(&value).expect("value serializes");
    out.push('\n');
    out
}

pub const TABLE_HEADER: &str =
    "cipher,n,t,m,shannon_measured_min,shannon_lower_bound,min_entropy,min_entropy_upper_bound";

fn fmt_num(x: f64) -> String {
    let v = serde_json::Number::from_f64(round_significant(x)).map(|n| n.to_string());
    v.unwrap_or_else(|| x.to_string())
}

/// One CSV row per report: smallest measured Shannon key uncertainty, its
/// analytic lower bound, and the min-entropy of the key-guessing measurement.
pub fn report_table(reports: &[AnalysisReport]) -> String {
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for r in reports {
        let measured = r
            .shannon
            .measured_povms
            .iter()
            .map(|p| p.entropy)
            .fold(f64::INFINITY, f64::min);
        let cipher = match r.cipher {
            AnalyzedCipher::Hn => "hn",
            AnalyzedCipher::Wn => "wn",
        };
        out.push_str(&format!(
            "{cipher},{},{},{},{},{},{},{}\n",
            r.n,
            r.t,
            r.m,
            fmt_num(measured),
            fmt_num(r.shannon.lemma3_bound),
            fmt_num(r.min_entropy_povm.h_inf),
            fmt_num(r.min_entropy_povm.upper_bound),
        ));
    }
    out
}
