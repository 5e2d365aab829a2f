//! JSON experiment configs and the report-writing runner.

use std::fs;
use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use flagcalc_core::verify::{
    lemma_bounds_sweep, leibniz_ratio, smoothing_ratio, Experiment, Operator,
};
use flagcalc_core::{Error, Exponent, ExponentTuple, FlagForest, GridSpec, Result};

use crate::dsl::parse_tree;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub tree: Option<String>,
    pub forest: Option<Vec<String>>,
    pub symbol: Option<SymbolCfg>,
    #[serde(default = "one")]
    pub n_params: usize,
    pub grid: Vec<usize>,
    /// Leaf-major exponent matrix, e.g. `[["2","inf"],["4","4"]]`.
    pub exponents: Option<Vec<Vec<String>>>,
    pub experiment: ExperimentCfg,
}

#[derive(Deserialize)]
pub struct SymbolCfg {
    pub name: String,
    #[serde(default)]
    pub nu: f64,
    #[serde(default)]
    pub s: f64,
}

#[derive(Deserialize)]
pub struct ExperimentCfg {
    /// "terms" | "check" | "leibniz" | "smoothing" | "lemma"
    pub kind: String,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default)]
    pub band: Option<i64>,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default = "two")]
    pub p1: f64,
    #[serde(default = "two")]
    pub p2: f64,
}

fn one() -> usize {
    1
}
fn two() -> f64 {
    2.0
}
fn default_sigma() -> f64 {
    3.0
}

pub struct Overrides {
    pub seed: Option<u64>,
    pub grid: Option<Vec<usize>>,
}

/// Execute a config file, writing CSV + JSON artifacts into `out`.
///
/// Error-to-exit-code mapping lives in `main`: malformed input → 1,
/// constraint failure → 2, budget → 3.
pub fn run_config(path: &Path, out: &Path, ov: &Overrides) -> Result<()> {
    let bytes = fs::read(path)?;
    let file_hash: String = {
        let digest = Sha256::digest(&bytes);
        digest[..16].iter().map(|b| format!("{b:02x}")).collect()
    };
    let mut cfg: Config =
        serde_json::from_slice(&bytes).map_err(|e| Error::Config(format!("bad config: {e}")))?;
    if let Some(seed) = ov.seed {
        cfg.experiment.seed = seed;
    }
    if let Some(grid) = &ov.grid {
        cfg.grid = grid.clone();
    }
    fs::create_dir_all(out)?;

    let operator = build_operator(&cfg)?;
    match cfg.experiment.kind.as_str() {
        "terms" => {
            let op = operator
                .ok_or_else(|| Error::Config("terms needs a tree or forest".into()))?;
            let exps = exponent_tuple(&cfg, op.n_leaves(), op.n_params())?;
            let terms = op.rhs_terms(&exps)?;
            let mut w = Vec::new();
            push_line(&mut w, "index,text,latex")?;
            for (i, t) in terms.iter().enumerate() {
                push_line(&mut w, &format!("{},{},{}", i, quote(&t.text()), quote(&t.latex())))?;
            }
            fs::write(out.join("terms.csv"), w)?;
            write_summary(out, &file_hash, serde_json::json!({ "terms": terms.len() }))?;
            println!("{} terms -> {}", terms.len(), out.join("terms.csv").display());
        }
        "check" => {
            let op = operator
                .ok_or_else(|| Error::Config("check needs a tree or forest".into()))?;
            let exps = exponent_tuple(&cfg, op.n_leaves(), op.n_params())?;
            let verdict = op.check_exponents(&exps)?;
            let mut w = Vec::new();
            push_line(&mut w, "vertex,param,bound,exponent,satisfied")?;
            for c in &verdict.constraints {
                push_line(
                    &mut w,
                    &format!(
                        "{},{},{},{},{}",
                        c.vertex, c.param, c.bound, c.exponent, c.satisfied
                    ),
                )?;
            }
            fs::write(out.join("check.csv"), w)?;
            write_summary(
                out,
                &file_hash,
                serde_json::json!({ "pass": verdict.pass,
                                    "violations": verdict.violations().len() }),
            )?;
            if !verdict.pass {
                for c in verdict.violations() {
                    eprintln!(
                        "FAIL vertex {} param {}: need exponent > {}, got {}",
                        c.vertex, c.param, c.bound, c.exponent
                    );
                }
                return Err(Error::ConstraintFail(verdict.violations().len()));
            }
            println!("PASS ({} constraints)", verdict.constraints.len());
        }
        "leibniz" => {
            let op = operator
                .ok_or_else(|| Error::Config("leibniz needs a tree or forest".into()))?;
            let exps = exponent_tuple(&cfg, op.n_leaves(), op.n_params())?;
            let experiment = Experiment {
                operator: op,
                exponents: exps,
                trials: cfg.experiment.trials,
                seed: cfg.experiment.seed,
                grid: GridSpec::new(cfg.grid.clone())?,
                sigma: cfg.experiment.sigma,
                band: cfg.experiment.band,
            };
            let report = leibniz_ratio(&experiment)?;
            let mut w = Vec::new();
            report.write_csv(&mut w)?;
            fs::write(out.join("ratios.csv"), w)?;
            write_summary(
                out,
                &file_hash,
                serde_json::from_str(&report.json_summary()).expect("valid summary json"),
            )?;
            println!("max ratio {:.6} over {} trials", report.max, report.rows.len());
        }
        "smoothing" => {
            let sym = cfg
                .symbol
                .as_ref()
                .ok_or_else(|| Error::Config("smoothing needs a symbol".into()))?;
            if sym.name != "fractional_integral" {
                return Err(Error::UnknownSymbol(sym.name.clone()));
            }
            let grid = GridSpec::new(cfg.grid.clone())?;
            let band = cfg
                .experiment
                .band
                .unwrap_or((grid.sizes()[0] as i64 / 2 - 1) / 2);
            let report = smoothing_ratio(
                sym.nu,
                sym.s,
                &grid,
                cfg.experiment.seed,
                cfg.experiment.trials,
                band,
            )?;
            let mut w = Vec::new();
            report.write_csv(&mut w)?;
            fs::write(out.join("ratios.csv"), w)?;
            write_summary(
                out,
                &file_hash,
                serde_json::from_str(&report.json_summary()).expect("valid summary json"),
            )?;
            println!("max ratio {:.6} over {} trials", report.max, report.rows.len());
        }
        "lemma" => {
            let grid = GridSpec::new(cfg.grid.clone())?;
            let report = lemma_bounds_sweep(
                cfg.experiment.alpha,
                cfg.experiment.p1,
                cfg.experiment.p2,
                &grid,
                cfg.experiment.trials,
                cfg.experiment.seed,
            )?;
            let mut w = Vec::new();
            report.write_csv(&mut w)?;
            fs::write(out.join("lemma.csv"), w)?;
            write_summary(
                out,
                &file_hash,
                serde_json::json!({
                    "product": report.product,
                    "commutator": report.commutator,
                    "whitney": report.whitney,
                    "diag": report.diag,
                }),
            )?;
            println!(
                "constants: product {:.4} commutator {:.4} whitney {:.4} diag {:.4}",
                report.product, report.commutator, report.whitney, report.diag
            );
        }
        other => return Err(Error::Config(format!("unknown experiment kind {other:?}"))),
    }
    Ok(())
}

fn build_operator(cfg: &Config) -> Result<Option<Operator>> {
    match (&cfg.tree, &cfg.forest) {
        (Some(_), Some(_)) => Err(Error::Config("give either tree or forest, not both".into())),
        (Some(t), None) => Ok(Some(Operator::Tree(parse_tree(t, cfg.n_params)?))),
        (None, Some(fs)) => {
            let trees = fs.iter().map(|t| parse_tree(t, 1)).collect::<Result<Vec<_>>>()?;
            Ok(Some(Operator::Forest(FlagForest::new(trees)?)))
        }
        (None, None) => Ok(None),
    }
}

pub fn exponent_tuple(cfg: &Config, n_leaves: usize, n_params: usize) -> Result<ExponentTuple> {
    match &cfg.exponents {
        None => ExponentTuple::uniform(n_leaves, n_params, Exponent::from_int(2)),
        Some(rows) => {
            let mut p = Vec::with_capacity(rows.len());
            for row in rows {
                p.push(row.iter().map(|s| Exponent::parse(s)).collect::<Result<Vec<_>>>()?);
            }
            ExponentTuple::new(p)
        }
    }
}

fn write_summary(out: &Path, file_hash: &str, mut body: serde_json::Value) -> Result<()> {
    body["config_file_hash"] = serde_json::Value::String(file_hash.to_string());
    fs::write(out.join("summary.json"), body.to_string())?;
    Ok(())
}

/// RFC-4180: quote fields containing commas/quotes, CRLF-free LF endings.
fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn push_line(w: &mut Vec<u8>, line: &str) -> Result<()> {
    w.extend_from_slice(line.as_bytes());
    w.push(b'\n');
    Ok(())
}
