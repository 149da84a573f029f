//! Continuous and discrete Markov-modulated growth models, their
//! assumption checks, and the tail report.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::classes::{ClassPartition, Digraph};
use crate::error::{Error, Result};
use crate::pencil::{
    find_root, pole_order, ClassSummary, MetzlerPencil, PoleOptions, PoleReport, RootOptions, RootResult, Side,
};
use crate::spectral;
use crate::transforms::{Distribution, LevySpec, Strip};

const ROW_SUM_TOL: f64 = 1e-12;

pub(crate) fn to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if let Some(bad) = rows.iter().position(|r| r.len() != n) {
        return Err(Error::Dimension(format!("row {bad} has {} entries, expected {n}", rows[bad].len())));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Stopped Markov additive process: W evolves as a state-dependent Levy
/// process with jumps at modulator transitions until the first event of a
/// Markov-modulated Poisson process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuousModel {
    /// Generator of the modulating chain.
    pub pi: Vec<Vec<f64>>,
    /// Stopping intensity per state.
    pub lambda: Vec<f64>,
    pub initial_law: Vec<f64>,
    pub levy: Vec<LevySpec>,
    /// Jump at each transition; empty means no jumps anywhere.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub jumps: Vec<Vec<Distribution>>,
}

/// Markov chain with resets: W accumulates increments while surviving and
/// restarts at zero on a reset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteModel {
    /// Row-stochastic transition matrix.
    pub pi: Vec<Vec<f64>>,
    /// Survival probability of each transition.
    pub upsilon: Vec<Vec<f64>>,
    pub initial_law: Vec<f64>,
    pub increments: Vec<Vec<Distribution>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClauseCheck {
    pub id: String,
    pub description: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub clauses: Vec<ClauseCheck>,
    pub zeta_at_origin: Option<f64>,
}

impl ValidationReport {
    fn new() -> Self {
        ValidationReport { valid: true, clauses: Vec::new(), zeta_at_origin: None }
    }

    fn push(&mut self, id: &str, description: &str, failure: Option<String>) {
        self.valid &= failure.is_none();
        self.clauses.push(ClauseCheck {
            id: id.into(),
            description: description.into(),
            passed: failure.is_none(),
            detail: failure,
        });
    }

    pub fn failed(&self) -> Vec<&ClauseCheck> {
        self.clauses.iter().filter(|c| !c.passed).collect()
    }

    pub fn clause(&self, id: &str) -> Option<&ClauseCheck> {
        self.clauses.iter().find(|c| c.id == id)
    }

    fn into_result(self) -> Result<()> {
        if self.valid {
            Ok(())
        } else {
            let ids: Vec<String> = self.failed().iter().map(|c| format!("{} ({})", c.id, c.description)).collect();
            Err(Error::InvalidModel(ids.join("; ")))
        }
    }
}

fn law_failure(v: &[f64]) -> Option<String> {
    if let Some(i) = v.iter().position(|x| !(x.is_finite() && *x >= 0.0)) {
        return Some(format!("entry {} is {}", i + 1, v[i]));
    }
    let s: f64 = v.iter().sum();
    ((s - 1.0).abs() > ROW_SUM_TOL * v.len() as f64).then(|| format!("entries sum to {s}"))
}

fn classes_lacking(p: &ClassPartition, which: &[usize], has: impl Fn(&[usize]) -> bool) -> Option<String> {
    let bad: Vec<Vec<usize>> = which
        .iter()
        .map(|&k| p.class(k))
        .filter(|c| !has(c))
        .map(|c| c.iter().map(|v| v + 1).collect())
        .collect();
    (!bad.is_empty()).then(|| format!("classes {bad:?}"))
}

fn zeta_clause(rep: &mut ValidationReport, id: &str, description: &str, pencil: Result<MetzlerPencil>) {
    match pencil.and_then(|p| p.zeta_at(0.0)) {
        Ok(z) => {
            rep.zeta_at_origin = Some(z);
            rep.push(id, description, (z >= 0.0).then(|| format!("zeta(A(0)) = {z}")));
        }
        Err(e) => rep.push(id, description, Some(e.to_string())),
    }
}

impl ContinuousModel {
    pub fn size(&self) -> usize {
        self.pi.len()
    }

    /// Jump table with absent entries filled by the unit transform.
    pub fn jump_table(&self) -> Vec<Vec<Distribution>> {
        if self.jumps.is_empty() {
            vec![vec![Distribution::Unit; self.size()]; self.size()]
        } else {
            self.jumps.clone()
        }
    }

    pub fn generator(&self) -> Result<DMatrix<f64>> {
        to_matrix(&self.pi)
    }

    pub fn pencil(&self) -> Result<MetzlerPencil> {
        MetzlerPencil::continuous(self.generator()?, self.lambda.clone(), self.levy.clone(), self.jump_table())
    }

    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::new();
        let n = self.size();
        let jumps = self.jump_table();
        let shape_ok = n > 0
            && self.pi.iter().all(|r| r.len() == n)
            && self.lambda.len() == n
            && self.initial_law.len() == n
            && self.levy.len() == n
            && jumps.len() == n
            && jumps.iter().all(|r| r.len() == n);
        rep.push("shape", "all inputs have one entry per state", (!shape_ok).then(|| "inconsistent sizes".into()));
        if !shape_ok {
            return rep;
        }

        let mut gen_fail = None;
        for (m, row) in self.pi.iter().enumerate() {
            let scale = row.iter().map(|x| x.abs()).fold(1.0, f64::max);
            if let Some(k) = (0..n).find(|&k| k != m && !(row[k].is_finite() && row[k] >= 0.0)) {
                gen_fail = Some(format!("rate ({}, {}) is {}", m + 1, k + 1, row[k]));
                break;
            }
            let s: f64 = row.iter().sum();
            if !(s.abs() <= ROW_SUM_TOL * scale) {
                gen_fail = Some(format!("row {} sums to {s}", m + 1));
                break;
            }
        }
        rep.push("(i)", "generator has nonnegative off-diagonal rates and zero row sums", gen_fail);
        rep.push("initial_law", "initial law is a probability vector", law_failure(&self.initial_law));
        let lam_fail = self
            .lambda
            .iter()
            .position(|x| !(x.is_finite() && *x >= 0.0))
            .map(|i| format!("state {} has intensity {}", i + 1, self.lambda[i]));
        rep.push("intensities", "stopping intensities are nonnegative", lam_fail);

        let mut dist_fail = None;
        for (m, l) in self.levy.iter().enumerate() {
            if let Err(e) = l.validate() {
                dist_fail.get_or_insert(format!("state {}: {e}", m + 1));
            }
        }
        for m in 0..n {
            for k in 0..n {
                let d = &jumps[m][k];
                if let Err(e) = d.validate() {
                    dist_fail.get_or_insert(format!("jump ({}, {}): {e}", m + 1, k + 1));
                } else if (m == k || self.pi[m][k] == 0.0) && *d != Distribution::Unit {
                    dist_fail.get_or_insert(format!("jump ({}, {}) set on a transition that never fires", m + 1, k + 1));
                }
            }
        }
        rep.push("(ii)-(iii)", "Levy exponents and jump transforms come from the catalog", dist_fail);
        if !rep.valid {
            return rep;
        }

        let part = ClassPartition::of(&Digraph::from_pattern(n, |m, k| self.pi[m][k] > 0.0));
        rep.push(
            "(iv)",
            "every initial class of the generator carries initial mass",
            classes_lacking(&part, &part.initial_classes(), |c| c.iter().any(|&v| self.initial_law[v] > 0.0)),
        );
        rep.push(
            "(v)",
            "every final class of the generator contains a state with positive stopping intensity",
            classes_lacking(&part, &part.final_classes(), |c| c.iter().any(|&v| self.lambda[v] > 0.0)),
        );
        zeta_clause(&mut rep, "stopping", "spectral abscissa of A(0) is negative", self.pencil());
        rep
    }

    pub fn analyze(&self) -> Result<TailReport> {
        self.analyze_with(&RootOptions::default(), &PoleOptions::default())
    }

    pub fn analyze_with(&self, ropts: &RootOptions, popts: &PoleOptions) -> Result<TailReport> {
        self.validate().into_result()?;
        analyze_pencil(ModelKind::Continuous, &self.pencil()?, &self.initial_law, &self.lambda, ropts, popts)
    }
}

impl DiscreteModel {
    pub fn size(&self) -> usize {
        self.pi.len()
    }

    pub fn pencil(&self) -> Result<MetzlerPencil> {
        MetzlerPencil::discrete(to_matrix(&self.pi)?, to_matrix(&self.upsilon)?, self.increments.clone())
    }

    /// Pi . Upsilon
    pub fn survival_kernel(&self) -> Result<DMatrix<f64>> {
        Ok(to_matrix(&self.pi)?.component_mul(&to_matrix(&self.upsilon)?))
    }

    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::new();
        let n = self.size();
        let square = |m: &Vec<Vec<f64>>| m.len() == n && m.iter().all(|r| r.len() == n);
        let shape_ok = n > 0
            && square(&self.pi)
            && square(&self.upsilon)
            && self.initial_law.len() == n
            && self.increments.len() == n
            && self.increments.iter().all(|r| r.len() == n);
        rep.push("shape", "all inputs have one entry per state", (!shape_ok).then(|| "inconsistent sizes".into()));
        if !shape_ok {
            return rep;
        }
        let stoch_fail = self.pi.iter().enumerate().find_map(|(m, row)| {
            law_failure(row).map(|e| format!("row {}: {e}", m + 1))
        });
        rep.push("(i)", "transition matrix is row-stochastic", stoch_fail);
        let ups_fail = (0..n).flat_map(|m| (0..n).map(move |k| (m, k))).find_map(|(m, k)| {
            let u = self.upsilon[m][k];
            (!(0.0..=1.0).contains(&u)).then(|| format!("entry ({}, {}) is {u}", m + 1, k + 1))
        });
        rep.push("survival", "survival probabilities lie in [0, 1]", ups_fail);
        rep.push("initial_law", "initial law is a probability vector", law_failure(&self.initial_law));
        let inc_fail = (0..n).flat_map(|m| (0..n).map(move |k| (m, k))).find_map(|(m, k)| {
            self.increments[m][k].validate().err().map(|e| format!("increment ({}, {}): {e}", m + 1, k + 1))
        });
        rep.push("(ii)-(iii)", "increment distributions come from the catalog", inc_fail);
        if !rep.valid {
            return rep;
        }

        let q = Digraph::from_pattern(n, |m, k| self.pi[m][k] * self.upsilon[m][k] > 0.0);
        let qpart = ClassPartition::of(&q);
        rep.push(
            "(iv)",
            "every initial class of the surviving transition pattern carries initial mass",
            classes_lacking(&qpart, &qpart.initial_classes(), |c| c.iter().any(|&v| self.initial_law[v] > 0.0)),
        );
        let ppart = ClassPartition::of(&Digraph::from_pattern(n, |m, k| self.pi[m][k] > 0.0));
        rep.push(
            "(v)",
            "every final class of the transition matrix has a transition that can reset",
            classes_lacking(&ppart, &ppart.final_classes(), |c| {
                c.iter().any(|&m| (0..n).any(|k| self.pi[m][k] > 0.0 && self.upsilon[m][k] < 1.0))
            }),
        );
        zeta_clause(&mut rep, "reset", "spectral abscissa of A(0) is negative", self.pencil());
        rep
    }

    pub fn analyze(&self) -> Result<TailReport> {
        self.analyze_with(&RootOptions::default(), &PoleOptions::default())
    }

    pub fn analyze_with(&self, ropts: &RootOptions, popts: &PoleOptions) -> Result<TailReport> {
        self.validate().into_result()?;
        let ones = vec![1.0; self.size()];
        analyze_pencil(ModelKind::Discrete, &self.pencil()?, &self.initial_law, &ones, ropts, popts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Continuous,
    Discrete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperTail {
    pub exists: bool,
    pub alpha: Option<f64>,
    pub d_alpha: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerTail {
    pub exists: bool,
    pub beta: Option<f64>,
    pub d_beta: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideDiagnostics {
    pub root: RootResult,
    pub pole: Option<PoleReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailDiagnostics {
    pub zeta_at_origin: f64,
    pub strip: Strip,
    pub upper: SideDiagnostics,
    pub lower: SideDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub kind: ModelKind,
    pub upper: UpperTail,
    pub lower: LowerTail,
    /// Classes of the z-independent pattern; basic flags at the upper root.
    pub class_summary: ClassSummary,
    pub diagnostics: TailDiagnostics,
}

impl TailReport {
    /// Weighted orders (support-restricted chains) at each existing root.
    pub fn weighted_orders(&self) -> (Option<usize>, Option<usize>) {
        let w = |s: &SideDiagnostics| s.pole.as_ref().and_then(|p| p.d_weighted);
        (w(&self.diagnostics.upper), w(&self.diagnostics.lower))
    }
}

fn analyze_pencil(
    kind: ModelKind,
    pencil: &MetzlerPencil,
    v: &[f64],
    w: &[f64],
    ropts: &RootOptions,
    popts: &PoleOptions,
) -> Result<TailReport> {
    let zeta0 = pencil.zeta_at(0.0)?;
    let side = |s: Side| -> Result<SideDiagnostics> {
        let root = find_root(pencil, s, ropts)?;
        let pole = match root.value {
            Some(r) => Some(pole_order(pencil, r, Some((v, w)), popts)?),
            None => None,
        };
        Ok(SideDiagnostics { root, pole })
    };
    let up = side(Side::Positive)?;
    let down = side(Side::Negative)?;

    let part = pencil.classes_at(0.0)?;
    let class_summary = match (&up.pole, &down.pole) {
        (Some(p), _) | (None, Some(p)) => p.summary.clone(),
        (None, None) => {
            let bz = spectral::block_abscissae(&pencil.evaluate_real(0.0)?, &part)?;
            ClassSummary::new(&part, bz, vec![false; part.len()])
        }
    };
    Ok(TailReport {
        kind,
        upper: UpperTail { exists: up.root.exists, alpha: up.root.value, d_alpha: up.pole.as_ref().map(|p| p.d) },
        lower: LowerTail {
            exists: down.root.exists,
            beta: down.root.value.map(|x| -x),
            d_beta: down.pole.as_ref().map(|p| p.d),
        },
        class_summary,
        diagnostics: TailDiagnostics { zeta_at_origin: zeta0, strip: pencil.domain(), upper: up, lower: down },
    })
}

/// Chain 1 -> 2 -> ... -> N with Gaussian exponents, rates theta_n to the
/// next state and stopping intensities lambda_n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianChain {
    pub mu: Vec<f64>,
    pub sigma2: Vec<f64>,
    pub theta: Vec<f64>,
    pub lambda: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainClosedForm {
    pub alpha: f64,
    pub d_alpha: usize,
    pub beta: f64,
    pub d_beta: usize,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
}

/// Relative tolerance for counting tied per-state rates.
pub const TIE_TOLERANCE: f64 = 1e-9;

impl GaussianChain {
    pub fn size(&self) -> usize {
        self.mu.len()
    }

    fn check(&self) -> Result<()> {
        let n = self.size();
        if n == 0 || self.sigma2.len() != n || self.lambda.len() != n || self.theta.len() + 1 != n {
            return Err(Error::InvalidModel("chain needs N means, variances and intensities and N-1 rates".into()));
        }
        if self.theta.iter().any(|&t| !(t > 0.0)) {
            return Err(Error::InvalidModel("chain rates must be positive".into()));
        }
        if self.sigma2.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::InvalidModel("chain variances must be positive".into()));
        }
        if self.lambda.iter().any(|&l| !(l >= 0.0)) || !(self.lambda[n - 1] > 0.0) {
            return Err(Error::InvalidModel("the last state needs a positive stopping intensity".into()));
        }
        Ok(())
    }

    /// Total exit rate of each state.
    pub fn exit_rates(&self) -> Vec<f64> {
        let n = self.size();
        (0..n).map(|i| self.lambda[i] + if i + 1 < n { self.theta[i] } else { 0.0 }).collect()
    }

    pub fn closed_form(&self) -> Result<ChainClosedForm> {
        self.check()?;
        let c = self.exit_rates();
        let alphas: Vec<f64> = (0..self.size())
            .map(|i| {
                let (m, s) = (self.mu[i], self.sigma2[i]);
                (-m + (m * m + 2.0 * s * c[i]).sqrt()) / s
            })
            .collect();
        let betas: Vec<f64> = (0..self.size())
            .map(|i| {
                let (m, s) = (self.mu[i], self.sigma2[i]);
                (m + (m * m + 2.0 * s * c[i]).sqrt()) / s
            })
            .collect();
        let (alpha, d_alpha) = min_with_ties(&alphas);
        let (beta, d_beta) = min_with_ties(&betas);
        Ok(ChainClosedForm { alpha, d_alpha, beta, d_beta, alphas, betas })
    }

    pub fn to_model(&self) -> Result<ContinuousModel> {
        self.check()?;
        let n = self.size();
        let mut pi = vec![vec![0.0; n]; n];
        for i in 0..n - 1 {
            pi[i][i] = -self.theta[i];
            pi[i][i + 1] = self.theta[i];
        }
        let mut initial_law = vec![0.0; n];
        initial_law[0] = 1.0;
        Ok(ContinuousModel {
            pi,
            lambda: self.lambda.clone(),
            initial_law,
            levy: (0..n).map(|i| LevySpec::gaussian(self.mu[i], self.sigma2[i])).collect(),
            jumps: Vec::new(),
        })
    }
}

pub fn closed_form_gaussian_chain(chain: &GaussianChain) -> Result<ChainClosedForm> {
    chain.closed_form()
}

fn min_with_ties(xs: &[f64]) -> (f64, usize) {
    let m = xs.iter().copied().fold(f64::INFINITY, f64::min);
    (m, xs.iter().filter(|&&x| (x - m).abs() <= TIE_TOLERANCE * m.abs()).count())
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn reed() -> ContinuousModel {
        ContinuousModel {
            pi: vec![vec![0.0]],
            lambda: vec![1.0],
            initial_law: vec![1.0],
            levy: vec![LevySpec::gaussian(0.0, 2.0)],
            jumps: Vec::new(),
        }
    }

    fn chain(theta: f64) -> GaussianChain {
        GaussianChain { mu: vec![0.0, 0.0], sigma2: vec![2.0, 2.0], theta: vec![theta], lambda: vec![0.0, 1.0] }
    }

    #[test]
    fn closed_form_examples() {
        let cf = chain(1.0).closed_form().unwrap();
        assert_eq!((cf.alpha, cf.d_alpha), (1.0, 2));
        let cf = chain(3.0).closed_form().unwrap();
        assert!((cf.alphas[0] - 3f64.sqrt()).abs() < 1e-14);
        assert_eq!((cf.alpha, cf.d_alpha), (1.0, 1));
        let single = GaussianChain { mu: vec![0.0], sigma2: vec![2.0], theta: vec![], lambda: vec![1.0] };
        let cf = single.closed_form().unwrap();
        assert_eq!((cf.alpha, cf.beta), (1.0, 1.0));
    }

    #[test]
    fn reed_analysis() {
        let r = reed().analyze().unwrap();
        assert!((r.upper.alpha.unwrap() - 1.0).abs() < 1e-10);
        assert!((r.lower.beta.unwrap() - 1.0).abs() < 1e-10);
        assert_eq!((r.upper.d_alpha, r.lower.d_beta), (Some(1), Some(1)));
    }

    #[test]
    fn chain_analysis() {
        let r = chain(1.0).to_model().unwrap().analyze().unwrap();
        assert!((r.upper.alpha.unwrap() - 1.0).abs() < 1e-10);
        assert_eq!(r.upper.d_alpha, Some(2));
        assert_eq!(r.weighted_orders(), (Some(2), Some(2)));
        let r = chain(3.0).to_model().unwrap().analyze().unwrap();
        assert_eq!(r.upper.d_alpha, Some(1));
        let upper_pole = r.diagnostics.upper.pole.as_ref().unwrap();
        assert_eq!(upper_pole.verdict, crate::pencil::Verdict::Certified);
    }

    #[test]
    fn validation_failures() {
        let mut m = reed();
        m.lambda = vec![0.0];
        let rep = m.validate();
        assert!(!rep.valid);
        assert!(!rep.clause("(v)").unwrap().passed);
        assert!(!rep.clause("stopping").unwrap().passed);

        let d = DiscreteModel {
            pi: vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            upsilon: vec![vec![1.0; 2]; 2],
            initial_law: vec![1.0, 0.0],
            increments: vec![vec![Distribution::Gaussian { mean: 0.0, variance: 1.0 }; 2]; 2],
        };
        let rep = d.validate();
        assert!(!rep.clause("(v)").unwrap().passed);
        assert!(matches!(d.analyze(), Err(Error::InvalidModel(_))));
    }

    #[test]
    fn chain_model_is_valid() {
        let rep = chain(1.0).to_model().unwrap().validate();
        assert!(rep.valid, "{rep:?}");
    }

    #[test]
    fn scale_invariance() {
        let base = GaussianChain { mu: vec![0.3, -0.2], sigma2: vec![1.0, 2.0], theta: vec![0.7], lambda: vec![0.2, 1.1] };
        let c = 2.5;
        let scaled = GaussianChain {
            mu: base.mu.iter().map(|x| x * c).collect(),
            sigma2: base.sigma2.iter().map(|x| x * c).collect(),
            theta: base.theta.iter().map(|x| x * c).collect(),
            lambda: base.lambda.iter().map(|x| x * c).collect(),
        };
        let a = base.to_model().unwrap().analyze().unwrap();
        let b = scaled.to_model().unwrap().analyze().unwrap();
        assert!((a.upper.alpha.unwrap() - b.upper.alpha.unwrap()).abs() < 1e-9);
        assert!((a.lower.beta.unwrap() - b.lower.beta.unwrap()).abs() < 1e-9);
        assert_eq!((a.upper.d_alpha, a.lower.d_beta), (b.upper.d_alpha, b.lower.d_beta));
    }
}
