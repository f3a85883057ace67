//! Piecewise OLS models of the functional/cross-capacity correlation.
//!
//! * Model 1: `r ~ within + low + within:low`
//! * Model 2: Model 1 `+ type`
//! * Model 3: Model 2 `+ within:type + low:type + within:low:type`
//!
//! `low` is 1 when `within` is below a threshold, `type` is a categorical
//! community label coded with sum-to-zero contrasts. Fits use a Householder
//! QR decomposition; Type-3 sums of squares drop one term's columns at a time.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::community::CommunityPartition;
use crate::error::{Error, Result};
use crate::mapper::MapperNetwork;
use crate::simdecomp::ProfileRow;

/// Level name given to interactions without a community.
pub const UNASSIGNED_LEVEL: &str = "none";
/// Level that absorbs community levels with fewer than two rows.
pub const POOLED_LEVEL: &str = "other";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LowThreshold {
    /// Mean of `within` over the input rows.
    Mean,
    Value(f64),
}

impl FromStr for LowThreshold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("mean") {
            return Ok(LowThreshold::Mean);
        }
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(LowThreshold::Value)
            .ok_or_else(|| {
                Error::InvalidParameter(format!("low threshold `{s}` is neither `mean` nor a number"))
            })
    }
}

impl fmt::Display for LowThreshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LowThreshold::Mean => f.write_str("mean"),
            LowThreshold::Value(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionRow {
    pub id: i64,
    pub within: f64,
    pub r: f64,
    pub low: bool,
    /// Index into [`RegressionDataset::levels`].
    pub level: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionDataset {
    pub rows: Vec<RegressionRow>,
    pub threshold: f64,
    pub threshold_mode: LowThreshold,
    /// Rows dropped because their correlation is undefined.
    pub excluded: usize,
    /// Type levels in order; the last is the one expressed through the others
    /// under sum-to-zero coding.
    pub levels: Vec<String>,
    pub warnings: Vec<String>,
}

impl RegressionDataset {
    /// Builds the regression rows from per-focal profiles.
    ///
    /// `types` maps interaction id to its community label; ids without a
    /// label go to the [`UNASSIGNED_LEVEL`] level. Levels with fewer than two
    /// rows are pooled into [`POOLED_LEVEL`].
    pub fn build(
        profiles: &[ProfileRow],
        types: &HashMap<i64, String>,
        threshold: LowThreshold,
    ) -> Result<Self> {
        if profiles.is_empty() {
            return Err(Error::Empty("no profile rows to regress".into()));
        }
        let cut = match threshold {
            LowThreshold::Mean => {
                profiles.iter().map(|p| p.within).sum::<f64>() / profiles.len() as f64
            }
            LowThreshold::Value(v) => v,
        };
        let defined: Vec<(&ProfileRow, f64)> = profiles
            .iter()
            .filter_map(|p| p.r_functional_cc.map(|r| (p, r)))
            .collect();
        let excluded = profiles.len() - defined.len();

        let label_of = |id: i64| {
            types
                .get(&id)
                .cloned()
                .unwrap_or_else(|| UNASSIGNED_LEVEL.to_string())
        };
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for (p, _) in &defined {
            *counts.entry(label_of(p.id)).or_default() += 1;
        }
        let mut warnings = Vec::new();
        let small: Vec<String> = counts
            .iter()
            .filter(|(_, &c)| c < 2)
            .map(|(l, _)| l.clone())
            .collect();
        if !small.is_empty() {
            warnings.push(format!(
                "pooled {} type level(s) with fewer than 2 rows into `{POOLED_LEVEL}`: {}",
                small.len(),
                small.join(", ")
            ));
        }
        let final_label = |id: i64| {
            let l = label_of(id);
            if small.contains(&l) {
                POOLED_LEVEL.to_string()
            } else {
                l
            }
        };
        let mut levels: Vec<String> = defined.iter().map(|(p, _)| final_label(p.id)).collect();
        levels.sort_by(|a, b| level_order(a).cmp(&level_order(b)));
        levels.dedup();
        let position: HashMap<&str, usize> =
            levels.iter().enumerate().map(|(k, l)| (l.as_str(), k)).collect();

        let rows = defined
            .iter()
            .map(|(p, r)| RegressionRow {
                id: p.id,
                within: p.within,
                r: *r,
                low: p.within < cut,
                level: position[final_label(p.id).as_str()],
            })
            .collect();
        Ok(RegressionDataset {
            rows,
            threshold: cut,
            threshold_mode: threshold,
            excluded,
            levels,
            warnings,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn response(&self) -> DVector<f64> {
        DVector::from_iterator(self.rows.len(), self.rows.iter().map(|r| r.r))
    }
}

/// Numeric labels sort numerically, then text labels alphabetically.
fn level_order(label: &str) -> (u8, i64, String) {
    match label.parse::<i64>() {
        Ok(v) => (0, v, String::new()),
        Err(_) => (1, 0, label.to_string()),
    }
}

/// Community label of each interaction: the community holding most of the
/// nodes that contain it, ties to the smaller community number. Interactions
/// in no node of the network are absent.
pub fn community_labels(
    network: &MapperNetwork,
    partition: &CommunityPartition,
) -> Result<HashMap<i64, String>> {
    let mut votes: HashMap<i64, BTreeMap<usize, usize>> = HashMap::new();
    for node in &network.nodes {
        let c = partition.community_of(node.id).ok_or_else(|| {
            Error::InvalidParameter(format!("node {} has no community assignment", node.id))
        })?;
        for &id in &node.members {
            *votes.entry(id).or_default().entry(c).or_default() += 1;
        }
    }
    Ok(votes
        .into_iter()
        .map(|(id, counts)| {
            let best = counts
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                .map(|(c, _)| *c)
                .expect("every voter cast at least one vote");
            (id, best.to_string())
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ModelId {
    One,
    Two,
    Three,
}

impl ModelId {
    pub fn number(&self) -> u8 {
        match self {
            ModelId::One => 1,
            ModelId::Two => 2,
            ModelId::Three => 3,
        }
    }

    pub fn all() -> [ModelId; 3] {
        [ModelId::One, ModelId::Two, ModelId::Three]
    }

    fn terms(&self) -> &'static [TermKind] {
        use TermKind::*;
        match self {
            ModelId::One => &[Within, Low, WithinLow],
            ModelId::Two => &[Within, Low, WithinLow, Type],
            ModelId::Three => &[
                Within,
                Low,
                WithinLow,
                Type,
                WithinType,
                LowType,
                WithinLowType,
            ],
        }
    }
}

impl TryFrom<u8> for ModelId {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(ModelId::One),
            2 => Ok(ModelId::Two),
            3 => Ok(ModelId::Three),
            other => Err(Error::InvalidParameter(format!("model must be 1, 2 or 3, got {other}"))),
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TermKind {
    Within,
    Low,
    WithinLow,
    Type,
    WithinType,
    LowType,
    WithinLowType,
}

impl TermKind {
    fn name(&self) -> &'static str {
        match self {
            TermKind::Within => "within",
            TermKind::Low => "low",
            TermKind::WithinLow => "within:low",
            TermKind::Type => "type",
            TermKind::WithinType => "within:type",
            TermKind::LowType => "low:type",
            TermKind::WithinLowType => "within:low:type",
        }
    }

    /// Continuous multiplier of the term for a row (1 for pure factor terms).
    fn scale(&self, row: &RegressionRow) -> f64 {
        let low = if row.low { 1.0 } else { 0.0 };
        match self {
            TermKind::Within | TermKind::WithinType => row.within,
            TermKind::Low | TermKind::LowType => low,
            TermKind::WithinLow | TermKind::WithinLowType => row.within * low,
            TermKind::Type => 1.0,
        }
    }

    fn involves_type(&self) -> bool {
        matches!(
            self,
            TermKind::Type | TermKind::WithinType | TermKind::LowType | TermKind::WithinLowType
        )
    }
}

/// A named group of adjacent design columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Term {
    pub name: String,
    pub columns: Range<usize>,
}

impl Term {
    pub fn df(&self) -> usize {
        self.columns.len()
    }
}

/// How a categorical factor becomes columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Contrasts {
    /// Level `l < L−1` is `+1`, the last level `−1` in every column.
    #[default]
    Sum,
    /// Indicator columns for levels `1..L`; level 0 is the reference.
    Treatment,
}

#[derive(Debug, Clone)]
pub struct Design {
    pub model: ModelId,
    pub matrix: DMatrix<f64>,
    pub column_names: Vec<String>,
    /// Intercept first, then model terms in formula order.
    pub terms: Vec<Term>,
}

impl Design {
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn columns(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn term(&self, name: &str) -> Option<&Term> {
        self.terms.iter().find(|t| t.name == name)
    }

    /// The design restricted to the given terms (by name), intercept kept.
    pub fn without(&self, term: &str) -> Design {
        self.select(|t| t.name != term)
    }

    fn select(&self, keep: impl Fn(&Term) -> bool) -> Design {
        let mut cols = Vec::new();
        let mut names = Vec::new();
        let mut terms = Vec::new();
        for t in self.terms.iter().filter(|t| keep(t)) {
            let start = cols.len();
            for c in t.columns.clone() {
                cols.push(c);
                names.push(self.column_names[c].clone());
            }
            terms.push(Term {
                name: t.name.clone(),
                columns: start..cols.len(),
            });
        }
        let matrix = self.matrix.select_columns(cols.iter());
        Design {
            model: self.model,
            matrix,
            column_names: names,
            terms,
        }
    }
}

pub fn build_design(model: ModelId, dataset: &RegressionDataset) -> Result<Design> {
    build_design_with(model, dataset, Contrasts::Sum)
}

pub fn build_design_with(
    model: ModelId,
    dataset: &RegressionDataset,
    contrasts: Contrasts,
) -> Result<Design> {
    let n = dataset.rows.len();
    if n == 0 {
        return Err(Error::Empty("regression dataset has no rows".into()));
    }
    let levels = dataset.levels.len();
    let contrast_columns = levels.saturating_sub(1);
    if model != ModelId::One && contrast_columns == 0 {
        return Err(Error::SingularDesign {
            term: "type".into(),
        });
    }

    let mut names = vec!["(intercept)".to_string()];
    let mut terms = vec![Term {
        name: "(intercept)".into(),
        columns: 0..1,
    }];
    let mut builders: Vec<(TermKind, Option<usize>)> = Vec::new();
    for kind in model.terms() {
        let start = names.len();
        if kind.involves_type() {
            for c in 0..contrast_columns {
                let level_label = match contrasts {
                    Contrasts::Sum => &dataset.levels[c],
                    Contrasts::Treatment => &dataset.levels[c + 1],
                };
                names.push(format!("{}[{}]", kind.name(), level_label));
                builders.push((*kind, Some(c)));
            }
        } else {
            names.push(kind.name().to_string());
            builders.push((*kind, None));
        }
        terms.push(Term {
            name: kind.name().to_string(),
            columns: start..names.len(),
        });
    }

    let last = levels.saturating_sub(1);
    let mut matrix = DMatrix::zeros(n, names.len());
    for (i, row) in dataset.rows.iter().enumerate() {
        matrix[(i, 0)] = 1.0;
        for (j, (kind, contrast)) in builders.iter().enumerate() {
            let scale = kind.scale(row);
            let code = match contrast {
                None => 1.0,
                Some(c) => match contrasts {
                    Contrasts::Sum => {
                        if row.level == *c {
                            1.0
                        } else if row.level == last {
                            -1.0
                        } else {
                            0.0
                        }
                    }
                    Contrasts::Treatment => {
                        if row.level == c + 1 {
                            1.0
                        } else {
                            0.0
                        }
                    }
                },
            };
            matrix[(i, j + 1)] = scale * code;
        }
    }
    Ok(Design {
        model,
        matrix,
        column_names: names,
        terms,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RegressionFit {
    pub model: ModelId,
    pub column_names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub n: usize,
    /// Estimated coefficients, intercept included.
    pub n_coefficients: usize,
    pub df_residual: usize,
    pub rss: f64,
    pub tss: f64,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub log_likelihood: f64,
    pub aic: f64,
    pub bic: f64,
    #[serde(skip)]
    pub fitted: Vec<f64>,
}

impl RegressionFit {
    pub fn residual_mean_square(&self) -> f64 {
        self.rss / self.df_residual as f64
    }
}

/// Least squares by Householder QR.
///
/// A column whose diagonal entry of `R` is negligible relative to its own norm
/// is collinear with the columns before it; the owning term is named in the
/// error.
pub fn fit_ols(design: &Design, y: &DVector<f64>) -> Result<RegressionFit> {
    let (n, p) = design.matrix.shape();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: y.len(),
            context: "response length".into(),
        });
    }
    if n <= p {
        return Err(Error::Degenerate(format!(
            "{n} rows cannot fit {p} coefficients with residual degrees of freedom"
        )));
    }
    let qr = design.matrix.clone().qr();
    let r = qr.r();
    for j in 0..p {
        let col_norm = design.matrix.column(j).norm();
        if !(r[(j, j)].abs() > 1e-10 * col_norm.max(f64::MIN_POSITIVE)) {
            let term = design
                .terms
                .iter()
                .find(|t| t.columns.contains(&j))
                .map(|t| t.name.clone())
                .unwrap_or_else(|| design.column_names[j].clone());
            return Err(Error::SingularDesign { term });
        }
    }
    let mut qty = y.clone();
    qr.q_tr_mul(&mut qty);
    let rhs = qty.rows(0, p).into_owned();
    let beta = r
        .solve_upper_triangular(&rhs)
        .ok_or_else(|| Error::SingularDesign {
            term: "(unknown)".into(),
        })?;
    let fitted = &design.matrix * &beta;
    let residuals = y - &fitted;
    let rss = residuals.norm_squared();
    let mean = y.mean();
    let tss = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>();

    let nf = n as f64;
    let pf = p as f64;
    let r_squared = if tss > 0.0 { (1.0 - rss / tss).clamp(0.0, 1.0) } else { 1.0 };
    let adj_r_squared = 1.0 - (1.0 - r_squared) * (nf - 1.0) / (nf - pf);
    // Gaussian likelihood at the ML variance RSS/n; the variance is one more parameter.
    let log_likelihood = if rss > 0.0 {
        -0.5 * nf * ((2.0 * std::f64::consts::PI).ln() + (rss / nf).ln() + 1.0)
    } else {
        f64::INFINITY
    };
    let k = pf + 1.0;
    let aic = -2.0 * log_likelihood + 2.0 * k;
    let bic = -2.0 * log_likelihood + nf.ln() * k;

    Ok(RegressionFit {
        model: design.model,
        column_names: design.column_names.clone(),
        coefficients: beta.iter().copied().collect(),
        n,
        n_coefficients: p,
        df_residual: n - p,
        rss,
        tss,
        r_squared,
        adj_r_squared,
        log_likelihood,
        aic,
        bic,
        fitted: fitted.iter().copied().collect(),
    })
}

pub fn fit_model(model: ModelId, dataset: &RegressionDataset) -> Result<RegressionFit> {
    let design = build_design(model, dataset)?;
    fit_ols(&design, &dataset.response())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnovaRow {
    pub term: String,
    pub ss: f64,
    pub df: usize,
    pub ms: f64,
    pub f: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnovaTable {
    pub model: ModelId,
    pub rows: Vec<AnovaRow>,
    pub residual_ss: f64,
    pub residual_df: usize,
    pub residual_ms: f64,
}

/// Upper tail of the F distribution.
pub fn f_pvalue(f: f64, df1: usize, df2: usize) -> f64 {
    if df1 == 0 || df2 == 0 || !f.is_finite() {
        return if f.is_infinite() { 0.0 } else { f64::NAN };
    }
    if f <= 0.0 {
        return 1.0;
    }
    FisherSnedecor::new(df1 as f64, df2 as f64)
        .map(|d| d.sf(f))
        .unwrap_or(f64::NAN)
}

/// Type-3 table: each term's SS is the RSS increase from dropping only its
/// columns from the full design.
pub fn type3_anova(model: ModelId, dataset: &RegressionDataset) -> Result<AnovaTable> {
    let design = build_design(model, dataset)?;
    type3_anova_design(&design, &dataset.response())
}

pub fn type3_anova_design(design: &Design, y: &DVector<f64>) -> Result<AnovaTable> {
    let full = fit_ols(design, y)?;
    let ms_res = full.residual_mean_square();
    let mut rows = Vec::new();
    for term in design.terms.iter().skip(1) {
        let reduced = fit_ols(&design.without(&term.name), y)?;
        let ss = (reduced.rss - full.rss).max(0.0);
        rows.push(anova_row(&term.name, ss, term.df(), ms_res, full.df_residual));
    }
    Ok(AnovaTable {
        model: design.model,
        rows,
        residual_ss: full.rss,
        residual_df: full.df_residual,
        residual_ms: ms_res,
    })
}

/// Sequential (Type-1) table: terms added one at a time in formula order.
pub fn sequential_anova(design: &Design, y: &DVector<f64>) -> Result<AnovaTable> {
    let full = fit_ols(design, y)?;
    let ms_res = full.residual_mean_square();
    let mut rows = Vec::new();
    let mut previous = fit_ols(&design.select(|t| t.name == "(intercept)"), y)?.rss;
    for (k, term) in design.terms.iter().enumerate().skip(1) {
        let names: Vec<&str> = design.terms[..=k].iter().map(|t| t.name.as_str()).collect();
        let partial = fit_ols(&design.select(|t| names.contains(&t.name.as_str())), y)?;
        let ss = (previous - partial.rss).max(0.0);
        rows.push(anova_row(&term.name, ss, term.df(), ms_res, full.df_residual));
        previous = partial.rss;
    }
    Ok(AnovaTable {
        model: design.model,
        rows,
        residual_ss: full.rss,
        residual_df: full.df_residual,
        residual_ms: ms_res,
    })
}

fn anova_row(term: &str, ss: f64, df: usize, ms_res: f64, df_res: usize) -> AnovaRow {
    let ms = ss / df as f64;
    let f = ms / ms_res;
    AnovaRow {
        term: term.to_string(),
        ss,
        df,
        ms,
        f,
        p: f_pvalue(f, df, df_res),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelComparison {
    pub small: ModelId,
    pub big: ModelId,
    pub delta_r_squared: f64,
    pub f: f64,
    pub df1: usize,
    pub df2: usize,
    pub p: f64,
}

/// Nested-model F test of `big` against `small`.
pub fn compare_models(small: &RegressionFit, big: &RegressionFit) -> Result<ModelComparison> {
    if small.n != big.n {
        return Err(Error::NotNested(format!(
            "fits use {} and {} rows",
            small.n, big.n
        )));
    }
    if let Some(missing) = small
        .column_names
        .iter()
        .find(|c| !big.column_names.contains(c))
    {
        return Err(Error::NotNested(format!(
            "column `{missing}` of the smaller model is absent from the larger"
        )));
    }
    let df1 = big.n_coefficients - small.n_coefficients;
    let df2 = big.df_residual;
    let (f, p) = if df1 == 0 {
        (0.0, 1.0)
    } else {
        let f = ((small.rss - big.rss).max(0.0) / df1 as f64) / (big.rss / df2 as f64);
        (f, f_pvalue(f, df1, df2))
    };
    Ok(ModelComparison {
        small: small.model,
        big: big.model,
        delta_r_squared: big.r_squared - small.r_squared,
        f,
        df1,
        df2,
        p,
    })
}

/// Everything the `regress` command reports.
#[derive(Debug, Clone, Serialize)]
pub struct RegressionReport {
    pub n: usize,
    pub excluded: usize,
    pub threshold: f64,
    pub levels: Vec<String>,
    pub fits: Vec<RegressionFit>,
    pub anova: Vec<AnovaTable>,
    pub comparisons: Vec<ModelComparison>,
}

/// Fits models `1..=up_to`, their Type-3 tables and successive comparisons.
pub fn regression_report(dataset: &RegressionDataset, up_to: ModelId) -> Result<RegressionReport> {
    let models: Vec<ModelId> = ModelId::all()
        .into_iter()
        .filter(|m| m.number() <= up_to.number())
        .collect();
    let mut fits = Vec::new();
    let mut anova = Vec::new();
    for &m in &models {
        fits.push(fit_model(m, dataset)?);
        anova.push(type3_anova(m, dataset)?);
    }
    let comparisons = fits
        .windows(2)
        .map(|w| compare_models(&w[0], &w[1]))
        .collect::<Result<_>>()?;
    Ok(RegressionReport {
        n: dataset.len(),
        excluded: dataset.excluded,
        threshold: dataset.threshold,
        levels: dataset.levels.clone(),
        fits,
        anova,
        comparisons,
    })
}

impl fmt::Display for RegressionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "n = {} ({} excluded, undefined r); low = within < {:.4}; {} type levels",
            self.n,
            self.excluded,
            self.threshold,
            self.levels.len()
        )?;
        for table in &self.anova {
            writeln!(f)?;
            writeln!(f, "Model {} - Omnibus ANOVA Test (Type 3 sum of squares)", table.model)?;
            writeln!(
                f,
                "{:<18} {:>14} {:>7} {:>12} {:>10} {:>10}",
                "", "Sum of Squares", "df", "Mean Square", "F", "p"
            )?;
            for row in &table.rows {
                writeln!(
                    f,
                    "{:<18} {:>14.4} {:>7} {:>12.4} {:>10.2} {:>10}",
                    row.term,
                    row.ss,
                    row.df,
                    row.ms,
                    row.f,
                    format_p(row.p)
                )?;
            }
            writeln!(
                f,
                "{:<18} {:>14.4} {:>7} {:>12.4}",
                "Residuals", table.residual_ss, table.residual_df, table.residual_ms
            )?;
        }
        writeln!(f)?;
        writeln!(f, "Model Fit Measures")?;
        writeln!(f, "{:<6} {:>8} {:>12} {:>12} {:>12}", "Model", "R²", "Adjusted R²", "AIC", "BIC")?;
        for fit in &self.fits {
            writeln!(
                f,
                "{:<6} {:>8.3} {:>12.3} {:>12.0} {:>12.0}",
                fit.model, fit.r_squared, fit.adj_r_squared, fit.aic, fit.bic
            )?;
        }
        if !self.comparisons.is_empty() {
            writeln!(f)?;
            writeln!(f, "Model Comparisons")?;
            writeln!(
                f,
                "{:<18} {:>8} {:>10} {:>6} {:>8} {:>8}",
                "Comparison", "ΔR²", "F", "df1", "df2", "p"
            )?;
            for c in &self.comparisons {
                writeln!(
                    f,
                    "{:<18} {:>8.4} {:>10.1} {:>6} {:>8} {:>8}",
                    format!("Model {} - Model {}", c.small, c.big),
                    c.delta_r_squared,
                    c.f,
                    c.df1,
                    c.df2,
                    format_p(c.p)
                )?;
            }
        }
        Ok(())
    }
}

fn format_p(p: f64) -> String {
    if p < 0.001 {
        "< .001".to_string()
    } else {
        format!("{p:.3}")
    }
}
