//! Holomorphic Metzler pencils z -> A(z), their real-axis spectral
//! abscissa, roots, and pole structure of A(z)^-1.

mod pole;
mod root;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classes::{ClassPartition, Digraph};
use crate::error::{Error, Result};
use crate::spectral;
use crate::transforms::{Distribution, LevySpec, Strip};

pub use pole::{
    laurent_block_structure, laurent_coefficient, laurent_probe, pole_order, residue_simple, transform_value,
    BlockCoefficient, BlockDerivative, BlockSign, Contraction, LaurentProbe, PoleOptions, PoleReport, ProbeOptions,
    SignStatus, Verdict,
};
pub use root::{find_root, AbsenceReason, RootOptions, RootResult, Side};

pub const MAX_POLY_DEGREE: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub enum PencilKind {
    /// Phi(z) + Pi . Psi(z) - Lambda
    Continuous {
        pi: DMatrix<f64>,
        lambda: Vec<f64>,
        levy: Vec<LevySpec>,
        jumps: Vec<Vec<Distribution>>,
    },
    /// Pi . Upsilon . Phi(z) - I
    Discrete {
        pi: DMatrix<f64>,
        upsilon: DMatrix<f64>,
        increments: Vec<Vec<Distribution>>,
    },
    /// Sum of C_k z^k, k <= 4.
    Explicit { coefficients: Vec<DMatrix<f64>> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetzlerPencil {
    n: usize,
    kind: PencilKind,
    domain: Strip,
}

fn check_dims(name: &str, rows: usize, cols: usize, n: usize) -> Result<()> {
    if rows != n || cols != n {
        return Err(Error::Dimension(format!("{name} is {rows}x{cols}, expected {n}x{n}")));
    }
    Ok(())
}

impl MetzlerPencil {
    pub fn continuous(
        pi: DMatrix<f64>,
        lambda: Vec<f64>,
        levy: Vec<LevySpec>,
        jumps: Vec<Vec<Distribution>>,
    ) -> Result<Self> {
        let n = pi.nrows();
        check_dims("generator", pi.nrows(), pi.ncols(), n)?;
        if lambda.len() != n || levy.len() != n {
            return Err(Error::Dimension("intensities and Levy exponents need one entry per state".into()));
        }
        check_dims("jump table", jumps.len(), jumps.first().map_or(0, Vec::len), n)?;
        let mut domain = Strip::WHOLE;
        for (m, spec) in levy.iter().enumerate() {
            spec.validate()?;
            domain = domain.intersect(&spec.strip());
            if jumps[m].len() != n {
                return Err(Error::Dimension(format!("jump row {m} has {} entries", jumps[m].len())));
            }
            for (k, d) in jumps[m].iter().enumerate() {
                d.validate()?;
                if pi[(m, k)] != 0.0 {
                    domain = domain.intersect(&d.strip());
                }
            }
        }
        Ok(MetzlerPencil { n, kind: PencilKind::Continuous { pi, lambda, levy, jumps }, domain })
    }

    pub fn discrete(pi: DMatrix<f64>, upsilon: DMatrix<f64>, increments: Vec<Vec<Distribution>>) -> Result<Self> {
        let n = pi.nrows();
        check_dims("transition matrix", pi.nrows(), pi.ncols(), n)?;
        check_dims("survival matrix", upsilon.nrows(), upsilon.ncols(), n)?;
        check_dims("increment table", increments.len(), increments.first().map_or(0, Vec::len), n)?;
        let mut domain = Strip::WHOLE;
        for m in 0..n {
            if increments[m].len() != n {
                return Err(Error::Dimension(format!("increment row {m} has {} entries", increments[m].len())));
            }
            for k in 0..n {
                let d = &increments[m][k];
                d.validate()?;
                if pi[(m, k)] * upsilon[(m, k)] != 0.0 {
                    domain = domain.intersect(&d.strip());
                }
            }
        }
        Ok(MetzlerPencil { n, kind: PencilKind::Discrete { pi, upsilon, increments }, domain })
    }

    pub fn explicit(coefficients: Vec<DMatrix<f64>>) -> Result<Self> {
        let first = coefficients.first().ok_or_else(|| Error::Dimension("no coefficients".into()))?;
        let n = first.nrows();
        if n == 0 {
            return Err(Error::Dimension("empty pencil".into()));
        }
        if coefficients.len() > MAX_POLY_DEGREE + 1 {
            return Err(Error::PolynomialDegree(coefficients.len() - 1));
        }
        for c in &coefficients {
            check_dims("coefficient", c.nrows(), c.ncols(), n)?;
        }
        Ok(MetzlerPencil { n, kind: PencilKind::Explicit { coefficients }, domain: Strip::WHOLE })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &PencilKind {
        &self.kind
    }

    pub fn domain(&self) -> Strip {
        self.domain
    }

    fn check_domain(&self, z: Complex64) -> Result<()> {
        if self.domain.contains_open(z.re) {
            Ok(())
        } else {
            Err(Error::OutsideStrip(z))
        }
    }

    pub fn evaluate(&self, z: Complex64) -> Result<DMatrix<Complex64>> {
        self.check_domain(z)?;
        let n = self.n;
        let zero = Complex64::new(0.0, 0.0);
        let mut a = DMatrix::from_element(n, n, zero);
        match &self.kind {
            PencilKind::Continuous { pi, lambda, levy, jumps } => {
                for m in 0..n {
                    for k in 0..n {
                        if pi[(m, k)] != 0.0 {
                            a[(m, k)] = pi[(m, k)] * jumps[m][k].laplace(z)?;
                        }
                    }
                    a[(m, m)] += levy[m].evaluate(z)? - lambda[m];
                }
            }
            PencilKind::Discrete { pi, upsilon, increments } => {
                for m in 0..n {
                    for k in 0..n {
                        let w = pi[(m, k)] * upsilon[(m, k)];
                        if w != 0.0 {
                            a[(m, k)] = w * increments[m][k].laplace(z)?;
                        }
                    }
                    a[(m, m)] -= 1.0;
                }
            }
            PencilKind::Explicit { coefficients } => {
                let mut zk = Complex64::new(1.0, 0.0);
                for c in coefficients {
                    a += c.map(|x| Complex64::new(x, 0.0)) * zk;
                    zk *= z;
                }
            }
        }
        Ok(a)
    }

    /// Entrywise derivative A'(z).
    pub fn derivative(&self, z: Complex64) -> Result<DMatrix<Complex64>> {
        self.check_domain(z)?;
        let n = self.n;
        let zero = Complex64::new(0.0, 0.0);
        let mut a = DMatrix::from_element(n, n, zero);
        match &self.kind {
            PencilKind::Continuous { pi, levy, jumps, .. } => {
                for m in 0..n {
                    for k in 0..n {
                        if pi[(m, k)] != 0.0 {
                            a[(m, k)] = pi[(m, k)] * jumps[m][k].laplace_derivative(z)?;
                        }
                    }
                    a[(m, m)] += levy[m].derivative(z)?;
                }
            }
            PencilKind::Discrete { pi, upsilon, increments } => {
                for m in 0..n {
                    for k in 0..n {
                        let w = pi[(m, k)] * upsilon[(m, k)];
                        if w != 0.0 {
                            a[(m, k)] = w * increments[m][k].laplace_derivative(z)?;
                        }
                    }
                }
            }
            PencilKind::Explicit { coefficients } => {
                let mut zk = Complex64::new(1.0, 0.0);
                for (k, c) in coefficients.iter().enumerate().skip(1) {
                    a += c.map(|x| Complex64::new(x, 0.0)) * (zk * k as f64);
                    zk *= z;
                }
            }
        }
        Ok(a)
    }

    pub fn evaluate_real(&self, s: f64) -> Result<DMatrix<f64>> {
        Ok(self.evaluate(Complex64::new(s, 0.0))?.map(|z| z.re))
    }

    pub fn derivative_real(&self, s: f64) -> Result<DMatrix<f64>> {
        Ok(self.derivative(Complex64::new(s, 0.0))?.map(|z| z.re))
    }

    /// Whether the (m, k) entry vanishes for every z.
    pub fn entry_identically_zero(&self, m: usize, k: usize) -> bool {
        match &self.kind {
            PencilKind::Continuous { pi, .. } => m != k && pi[(m, k)] == 0.0,
            PencilKind::Discrete { pi, upsilon, .. } => m != k && pi[(m, k)] * upsilon[(m, k)] == 0.0,
            PencilKind::Explicit { coefficients } => coefficients.iter().all(|c| c[(m, k)] == 0.0),
        }
    }

    /// Off-diagonal digraph of A(at). For model pencils this is the
    /// z-independent pattern of the generator or of Pi . Upsilon.
    pub fn pattern(&self, at: f64) -> Result<Digraph> {
        match &self.kind {
            PencilKind::Explicit { .. } => Digraph::from_matrix(&self.evaluate_real(at)?, 0.0),
            _ => Ok(Digraph::from_pattern(self.n, |m, k| !self.entry_identically_zero(m, k))),
        }
    }

    pub fn classes_at(&self, at: f64) -> Result<ClassPartition> {
        Ok(ClassPartition::of(&self.pattern(at)?))
    }

    /// zeta(A(s)), taken as the largest diagonal-block abscissa over the
    /// classes of A(s).
    pub fn zeta_at(&self, s: f64) -> Result<f64> {
        let a = self.evaluate_real(s)?;
        let p = self.classes_at(s)?;
        Ok(spectral::block_abscissae(&a, &p)?.into_iter().fold(f64::NEG_INFINITY, f64::max))
    }

    /// zeta of the diagonal block of A(s) on `class`.
    pub fn block_zeta_at(&self, s: f64, class: &[usize]) -> Result<f64> {
        let a = self.evaluate_real(s)?;
        spectral::spectral_abscissa(&spectral::principal_block(&a, class))
    }
}

/// Class structure of a matrix in 1-based labels, for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub classes: Vec<Vec<usize>>,
    /// Pairs (j, k) of 1-based class numbers with class j strictly before class k.
    pub strict_order: Vec<[usize; 2]>,
    pub initial: Vec<usize>,
    #[serde(rename = "final")]
    pub final_classes: Vec<usize>,
    pub block_zeta: Vec<f64>,
    pub basic: Vec<bool>,
}

impl ClassSummary {
    pub fn new(p: &ClassPartition, block_zeta: Vec<f64>, basic: Vec<bool>) -> Self {
        ClassSummary {
            classes: p.classes().iter().map(|c| c.iter().map(|v| v + 1).collect()).collect(),
            strict_order: p.strict_pairs().into_iter().map(|(j, k)| [j + 1, k + 1]).collect(),
            initial: p.initial_classes().into_iter().map(|k| k + 1).collect(),
            final_classes: p.final_classes().into_iter().map(|k| k + 1).collect(),
            block_zeta,
            basic,
        }
    }

    /// 0-based index of the class with the given 1-based labels.
    pub fn find(&self, labels: &[usize]) -> Option<usize> {
        let mut sorted = labels.to_vec();
        sorted.sort_unstable();
        self.classes.iter().position(|c| *c == sorted)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn reed() -> MetzlerPencil {
        MetzlerPencil::continuous(
            DMatrix::zeros(1, 1),
            vec![1.0],
            vec![LevySpec::gaussian(0.0, 2.0)],
            vec![vec![Distribution::Unit]],
        )
        .unwrap()
    }

    #[test]
    fn scalar_pencil_values() {
        let p = reed();
        for s in [-1.5, 0.0, 0.5, 2.0] {
            let a = p.evaluate_real(s).unwrap();
            assert!((a[(0, 0)] - (s * s - 1.0)).abs() < 1e-14);
            assert!((p.derivative_real(s).unwrap()[(0, 0)] - 2.0 * s).abs() < 1e-14);
        }
        assert_eq!(p.zeta_at(0.0).unwrap(), -1.0);
        assert!(p.zeta_at(1.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn baseline_at_origin() {
        let p = fixtures::counterexample_baseline();
        let a = p.evaluate_real(0.0).unwrap();
        let want = DMatrix::from_row_slice(3, 3, &[0., 1., 0., 0., 0., 1., 0., 0., 0.]);
        assert_eq!(a, want);
        assert_eq!(p.derivative_real(0.0).unwrap(), DMatrix::identity(3, 3));
    }

    #[test]
    fn discrete_at_origin() {
        let pi = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.2, 0.8]);
        let ups = DMatrix::from_row_slice(2, 2, &[0.9, 0.6, 1.0, 0.7]);
        let inc = vec![vec![Distribution::Gaussian { mean: 0.1, variance: 1.0 }; 2]; 2];
        let p = MetzlerPencil::discrete(pi.clone(), ups.clone(), inc).unwrap();
        let a = p.evaluate_real(0.0).unwrap();
        let want = pi.component_mul(&ups) - DMatrix::identity(2, 2);
        assert!((a - &want).norm() < 1e-15);
        let z = spectral::spectral_abscissa(&(want + DMatrix::identity(2, 2))).unwrap() - 1.0;
        assert!((p.zeta_at(0.0).unwrap() - z).abs() < 1e-12);
        // product rule on a single entry
        let d = p.derivative_real(0.3).unwrap();
        assert!((d[(0, 1)] - 0.5 * 0.6 * (0.1 + 0.3) * (0.1 * 0.3 + 0.045f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn domain_is_intersection_of_used_entries() {
        let pi = DMatrix::from_row_slice(2, 2, &[-1., 1., 0., 0.]);
        let jumps = vec![
            vec![Distribution::Unit, Distribution::ExponentialRight { rate: 3.0 }],
            vec![Distribution::ExponentialLeft { rate: 0.5 }, Distribution::Unit],
        ];
        let levy = vec![LevySpec::gaussian(0.0, 1.0), LevySpec::gaussian(0.0, 1.0)];
        let p = MetzlerPencil::continuous(pi, vec![0.0, 1.0], levy, jumps).unwrap();
        assert_eq!((p.domain().left, p.domain().right), (f64::NEG_INFINITY, 3.0));
        assert!(p.evaluate(Complex64::new(3.0, 0.0)).is_err());
    }

    #[test]
    fn explicit_degree_limit() {
        let c = vec![DMatrix::<f64>::zeros(2, 2); 6];
        assert!(matches!(MetzlerPencil::explicit(c), Err(Error::PolynomialDegree(5))));
    }
}
