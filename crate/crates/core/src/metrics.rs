//! Evaluation protocol: field errors, the training loss, coefficient errors and rank
//! correlation.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::{Normalizer, TARGET_WIDTH};
use crate::post::{analyze_case, SimulationCloud};
use crate::spatial::KdTree;

pub const FIELD_NAMES: [&str; TARGET_WIDTH] = ["u_x", "u_y", "p", "nu_t"];
/// Relative error under which coefficient predictions are usually called accurate.
pub const ACCURACY_THRESHOLD: f64 = 0.05;

type Row = [f64; TARGET_WIDTH];

fn sq_norm(a: &Row, b: &Row) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldMse {
    pub volume: Row,
    /// Only pressure is meaningful on the wall; velocity and `nu_t` vanish there.
    pub surface_p: f64,
}

/// Per-channel mean squared error over volume nodes, and pressure error over surface
/// nodes.
pub fn field_mse(pred: &[Row], truth: &[Row], volume: &[bool], surface: &[bool]) -> Result<FieldMse> {
    let n = truth.len();
    if pred.len() != n || volume.len() != n || surface.len() != n {
        return Err(Error::Data("prediction, truth and masks differ in length".into()));
    }
    if let Some(i) = (0..n).find(|&i| volume[i] == surface[i]) {
        return Err(Error::Data(format!("node {i}: volume and surface masks must partition the nodes")));
    }
    let (mut acc, mut nv, mut sp, mut ns) = ([0.0; TARGET_WIDTH], 0usize, 0.0, 0usize);
    for i in 0..n {
        if volume[i] {
            for c in 0..TARGET_WIDTH {
                acc[c] += (pred[i][c] - truth[i][c]).powi(2);
            }
            nv += 1;
        } else {
            sp += (pred[i][2] - truth[i][2]).powi(2);
            ns += 1;
        }
    }
    if nv == 0 || ns == 0 {
        return Err(Error::Data("field errors need both volume and surface nodes".into()));
    }
    Ok(FieldMse { volume: acc.map(|a| a / nv as f64), surface_p: sp / ns as f64 })
}

/// Volume loss plus `lambda` times surface loss, each the mean squared norm of the
/// per-node error vector over its node set.
pub fn composite_loss(pred: &[Row], truth: &[Row], volume: &[usize], surface: &[usize], lambda: f64) -> Result<f64> {
    if volume.is_empty() || surface.is_empty() {
        return Err(Error::Data("both node sets must be non-empty".into()));
    }
    if pred.len() != truth.len() {
        return Err(Error::Data("prediction and truth differ in length".into()));
    }
    let mean = |ids: &[usize]| -> Result<f64> {
        let mut s = 0.0;
        for &i in ids {
            if i >= truth.len() {
                return Err(Error::Data(format!("node index {i} out of range")));
            }
            s += sq_norm(&pred[i], &truth[i]);
        }
        Ok(s / ids.len() as f64)
    };
    Ok(mean(volume)? + lambda * mean(surface)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativeError {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub n_used: usize,
    /// Cases skipped because the true value is zero.
    pub excluded: Vec<usize>,
}

impl RelativeError {
    pub fn is_accurate(&self) -> bool {
        self.mean < ACCURACY_THRESHOLD
    }
}

pub fn relative_error(pred: &[f64], truth: &[f64]) -> Result<RelativeError> {
    if pred.len() != truth.len() {
        return Err(Error::Data("prediction and truth differ in length".into()));
    }
    let mut errs = Vec::with_capacity(truth.len());
    let mut excluded = Vec::new();
    for (i, (p, t)) in pred.iter().zip(truth).enumerate() {
        if *t == 0.0 {
            excluded.push(i);
        } else {
            errs.push((p - t).abs() / t.abs());
        }
    }
    if errs.is_empty() {
        return Err(Error::Data("no case with a non-zero true value".into()));
    }
    let n = errs.len() as f64;
    let mean = errs.iter().sum::<f64>() / n;
    let std = (errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n).sqrt();
    Ok(RelativeError { mean, std, n_used: errs.len(), excluded })
}

/// Ranks starting at 1, ties sharing the mean of their positions.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::Numeric("rank correlation undefined for a constant sequence".into()));
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman rank correlation: Pearson correlation of average ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Data("sequences differ in length".into()));
    }
    if xs.len() < 2 {
        return Err(Error::Data("rank correlation needs at least two values".into()));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::Data("rank correlation of non-finite values".into()));
    }
    pearson(&average_ranks(xs), &average_ranks(ys))
}

/// One test case: ground truth and a prediction on the same nodes.
#[derive(Debug, Clone, Copy)]
pub struct EvalCase<'a> {
    pub name: &'a str,
    pub truth: &'a SimulationCloud,
    pub prediction: &'a SimulationCloud,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientPair {
    pub case: String,
    pub cd_true: f64,
    pub cd_pred: f64,
    pub cl_true: f64,
    pub cl_pred: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub n_cases: usize,
    /// Mean over cases of the per-case volume MSE, normalized units.
    pub volume_mse: Row,
    pub surface_p_mse: f64,
    pub cd_relative_error: RelativeError,
    pub cl_relative_error: RelativeError,
    pub spearman_cd: f64,
    pub spearman_cl: f64,
    pub cd_accurate: bool,
    pub cl_accurate: bool,
    pub std_convention: String,
    pub coefficients: Vec<CoefficientPair>,
}

fn target_rows(c: &SimulationCloud) -> Vec<Row> {
    (0..c.len()).map(|i| [c.velocity[i].x, c.velocity[i].y, c.pressure[i], c.nu_t[i]]).collect()
}

fn normalized(c: &SimulationCloud, norm: &Normalizer) -> Result<Vec<Row>> {
    let mut flat: Vec<f64> = target_rows(c).into_iter().flatten().collect();
    norm.apply(&mut flat)?;
    Ok(flat.chunks_exact(TARGET_WIDTH).map(|r| [r[0], r[1], r[2], r[3]]).collect())
}

struct CaseScores {
    mse: FieldMse,
    pair: CoefficientPair,
}

fn score_case(case: &EvalCase, norm: &Normalizer, k: usize) -> Result<CaseScores> {
    let (t, p) = (case.truth, case.prediction);
    if t.positions != p.positions || t.surface != p.surface {
        return Err(Error::Data(format!("case {}: prediction nodes differ from the truth", case.name)));
    }
    let tree = KdTree::new(&t.positions);
    let volume: Vec<bool> = t.surface.iter().map(|s| !s).collect();
    let mse = field_mse(&normalized(p, norm)?, &normalized(t, norm)?, &volume, &t.surface)?;
    let ft = analyze_case(t, &tree, k)?.forces;
    let fp = analyze_case(p, &tree, k)?.forces;
    Ok(CaseScores {
        mse,
        pair: CoefficientPair { case: case.name.to_string(), cd_true: ft.cd, cd_pred: fp.cd, cl_true: ft.cl, cl_pred: fp.cl },
    })
}

/// Score predictions against the truth. Field errors use the target normalizer; force
/// coefficients come from post-processing the physical (denormalized) prediction fields.
pub fn evaluate(cases: &[EvalCase], norm: &Normalizer, k: usize) -> Result<EvaluationReport> {
    if cases.is_empty() {
        return Err(Error::Data("no test case to evaluate".into()));
    }
    if norm.width() != TARGET_WIDTH {
        return Err(Error::Parameter(format!("target normalizer must have {TARGET_WIDTH} channels")));
    }
    let scores: Vec<CaseScores> = cases.par_iter().map(|c| score_case(c, norm, k)).collect::<Result<_>>()?;
    let n = scores.len() as f64;
    let mut volume = [0.0; TARGET_WIDTH];
    let mut surface = 0.0;
    for s in &scores {
        for c in 0..TARGET_WIDTH {
            volume[c] += s.mse.volume[c];
        }
        surface += s.mse.surface_p;
    }
    let pairs: Vec<CoefficientPair> = scores.into_iter().map(|s| s.pair).collect();
    let col = |f: fn(&CoefficientPair) -> f64| -> Vec<f64> { pairs.iter().map(f).collect() };
    let (cd_t, cd_p, cl_t, cl_p) = (col(|p| p.cd_true), col(|p| p.cd_pred), col(|p| p.cl_true), col(|p| p.cl_pred));
    let cd_re = relative_error(&cd_p, &cd_t)?;
    let cl_re = relative_error(&cl_p, &cl_t)?;
    let (rho_d, rho_l) = if pairs.len() >= 2 { (spearman(&cd_t, &cd_p)?, spearman(&cl_t, &cl_p)?) } else { (f64::NAN, f64::NAN) };
    Ok(EvaluationReport {
        n_cases: pairs.len(),
        volume_mse: volume.map(|v| v / n),
        surface_p_mse: surface / n,
        cd_accurate: cd_re.is_accurate(),
        cl_accurate: cl_re.is_accurate(),
        cd_relative_error: cd_re,
        cl_relative_error: cl_re,
        spearman_cd: rho_d,
        spearman_cl: rho_l,
        std_convention: "population".to_string(),
        coefficients: pairs,
    })
}

impl EvaluationReport {
    /// Field errors: one row per field with volume and surface MSE.
    pub fn mse_table_csv(&self) -> String {
        let mut s = String::from("field,volume_mse,surface_mse\n");
        for (c, name) in FIELD_NAMES.iter().enumerate() {
            let surf = if c == 2 { format!("{:e}", self.surface_p_mse) } else { String::new() };
            let _ = writeln!(s, "{name},{:e},{surf}", self.volume_mse[c]);
        }
        s
    }

    /// Coefficient errors and rank correlations.
    pub fn coefficient_table_csv(&self) -> String {
        let mut s = String::from("coefficient,relative_error_mean,relative_error_std,spearman\n");
        let _ = writeln!(s, "C_D,{:e},{:e},{}", self.cd_relative_error.mean, self.cd_relative_error.std, self.spearman_cd);
        let _ = writeln!(s, "C_L,{:e},{:e},{}", self.cl_relative_error.mean, self.cl_relative_error.std, self.spearman_cl);
        s
    }

    /// True against predicted coefficients, one row per case.
    pub fn scatter_csv(&self) -> String {
        let mut s = String::from("case,cd_true,cd_pred,cl_true,cl_pred\n");
        for p in &self.coefficients {
            let _ = writeln!(s, "{},{:e},{:e},{:e},{:e}", p.case, p.cd_true, p.cd_pred, p.cl_true, p.cl_pred);
        }
        s
    }
}
