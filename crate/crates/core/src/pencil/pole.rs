use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ClassSummary, MetzlerPencil};
use crate::classes::{support, ChainQuery, ClassPartition};
use crate::error::{Error, Result};
use crate::spectral;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeOptions {
    pub radii: Vec<f64>,
    pub nodes: usize,
    /// Largest order accepted; `None` means twice the pencil size.
    pub max_order: Option<i64>,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions { radii: vec![1e-2, 1e-3, 1e-4], nodes: 64, max_order: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleOptions {
    pub tol_root: f64,
    pub tol_basic: f64,
    /// Step for one-sided differences of block abscissae.
    pub fd_step: f64,
    /// One-sided slopes must exceed this in magnitude.
    pub sign_threshold: f64,
    pub probe: ProbeOptions,
}

impl Default for PoleOptions {
    fn default() -> Self {
        PoleOptions { tol_root: 1e-10, tol_basic: 1e-8, fd_step: 1e-6, sign_threshold: 1e-8, probe: ProbeOptions::default() }
    }
}

/// What g(z) the contour probe looks at.
#[derive(Debug, Clone, Copy)]
pub enum Contraction<'a> {
    /// Every entry of A(z)^-1.
    Entrywise,
    /// v^T A(z)^-1 w.
    Weighted { v: &'a [f64], w: &'a [f64] },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignStatus {
    Positive,
    Negative,
    Mixed,
    /// Some basic block has a vanishing or two-sided inconsistent slope.
    Degenerate,
}

impl SignStatus {
    pub fn eta(self) -> Option<f64> {
        match self {
            SignStatus::Positive => Some(1.0),
            SignStatus::Negative => Some(-1.0),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Certified,
    ClassConditionViolated,
    SignConditionViolated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockSign {
    Positive,
    Negative,
    Mixed,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockDerivative {
    /// 1-based class number.
    pub class: usize,
    pub left: f64,
    pub right: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaurentProbe {
    /// Order read off each consecutive pair of radii.
    pub order_estimates: Vec<f64>,
    pub order_estimate: f64,
    pub order: i64,
    pub identically_zero: bool,
    /// Real part of the coefficient of (z - root)^-order.
    pub leading_real: Vec<Vec<f64>>,
    pub leading_imag_max: f64,
}

impl LaurentProbe {
    pub fn leading(&self) -> DMatrix<f64> {
        let r = self.leading_real.len();
        let c = self.leading_real.first().map_or(0, Vec::len);
        DMatrix::from_fn(r, c, |i, j| self.leading_real[i][j])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleReport {
    pub root: f64,
    pub zeta_at_root: f64,
    pub summary: ClassSummary,
    /// Longest chain of classes at the root.
    pub d: usize,
    /// Longest chain restricted to the supports of v and w.
    pub d_weighted: Option<usize>,
    /// Vertex pairs (1-based) with a nonvanishing entry between classes
    /// that do not access each other.
    pub condition_v_violations: Vec<[usize; 2]>,
    pub block_derivatives: Vec<BlockDerivative>,
    pub sign_status: SignStatus,
    pub verdict: Verdict,
    pub numeric: Option<LaurentProbe>,
    pub numeric_weighted: Option<LaurentProbe>,
    pub probe_error: Option<String>,
    /// Sign of each class block of the leading coefficient of A(z)^-1.
    pub leading_coefficient_sign: Vec<Vec<BlockSign>>,
}

impl PoleReport {
    pub fn numeric_order(&self) -> Option<i64> {
        self.numeric.as_ref().map(|p| p.order)
    }

    /// The structural order, refused when a hypothesis fails.
    pub fn certified_order(&self) -> Result<usize> {
        match self.verdict {
            Verdict::Certified => Ok(self.d),
            Verdict::ClassConditionViolated => Err(Error::ConditionViolated(format!(
                "entries {:?} couple classes that do not access each other",
                self.condition_v_violations
            ))),
            Verdict::SignConditionViolated => Err(Error::ConditionViolated(format!(
                "basic block slopes are {:?}",
                self.sign_status
            ))),
        }
    }

    pub fn certified_weighted_order(&self) -> Result<usize> {
        self.certified_order()?;
        Ok(self.d_weighted.unwrap_or(self.d))
    }
}

pub(crate) struct RootStructure {
    pub partition: ClassPartition,
    pub block_zeta: Vec<f64>,
    pub basic: Vec<bool>,
    pub zeta: f64,
}

pub(crate) fn root_structure(p: &MetzlerPencil, root: f64, opts: &PoleOptions) -> Result<RootStructure> {
    let a = p.evaluate_real(root)?;
    let partition = p.classes_at(root)?;
    let block_zeta = spectral::block_abscissae(&a, &partition)?;
    let zeta = block_zeta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if zeta.abs() > opts.tol_root {
        return Err(Error::NotARoot(zeta.abs()));
    }
    let basic: Vec<bool> = block_zeta.iter().map(|z| z.abs() <= opts.tol_basic).collect();
    if !basic.iter().any(|&b| b) {
        return Err(Error::NoBasicClass);
    }
    Ok(RootStructure { partition, block_zeta, basic, zeta })
}

fn sign_structure(
    p: &MetzlerPencil,
    root: f64,
    rs: &RootStructure,
    opts: &PoleOptions,
) -> Result<(Vec<BlockDerivative>, SignStatus)> {
    let h = opts.fd_step;
    let mut derivs = Vec::new();
    let mut signs = Vec::new();
    for (k, class) in rs.partition.classes().iter().enumerate() {
        if !rs.basic[k] {
            continue;
        }
        let f0 = rs.block_zeta[k];
        let left = (f0 - p.block_zeta_at(root - h, class)?) / h;
        let right = (p.block_zeta_at(root + h, class)? - f0) / h;
        let t = opts.sign_threshold;
        signs.push(if left > t && right > t {
            Some(1)
        } else if left < -t && right < -t {
            Some(-1)
        } else {
            None
        });
        derivs.push(BlockDerivative { class: k + 1, left, right });
    }
    let status = if signs.iter().any(Option::is_none) {
        SignStatus::Degenerate
    } else if signs.iter().all(|&s| s == Some(1)) {
        SignStatus::Positive
    } else if signs.iter().all(|&s| s == Some(-1)) {
        SignStatus::Negative
    } else {
        SignStatus::Mixed
    };
    Ok((derivs, status))
}

fn condition_v(p: &MetzlerPencil, part: &ClassPartition) -> Vec<[usize; 2]> {
    let n = p.size();
    let mut out = Vec::new();
    for m in 0..n {
        for k in 0..n {
            if m != k
                && !part.accesses(part.class_of(m), part.class_of(k))
                && !p.entry_identically_zero(m, k)
            {
                out.push([m + 1, k + 1]);
            }
        }
    }
    out
}

fn check_weights(n: usize, v: &[f64], w: &[f64]) -> Result<()> {
    if v.len() != n || w.len() != n {
        return Err(Error::Dimension(format!("weights must have {n} entries")));
    }
    if v.iter().chain(w).any(|&x| !(x >= 0.0)) {
        return Err(Error::Dimension("weights must be nonnegative".into()));
    }
    Ok(())
}

/// Pole order of A(z)^-1 (and of v^T A(z)^-1 w) at a root of zeta(A(s)).
pub fn pole_order(
    p: &MetzlerPencil,
    root: f64,
    weights: Option<(&[f64], &[f64])>,
    opts: &PoleOptions,
) -> Result<PoleReport> {
    if let Some((v, w)) = weights {
        check_weights(p.size(), v, w)?;
    }
    let rs = root_structure(p, root, opts)?;
    let part = &rs.partition;
    let d = part.longest_chain_length(&ChainQuery::new(rs.basic.clone()))?;
    let d_weighted = weights
        .map(|(v, w)| {
            let q = ChainQuery::new(rs.basic.clone()).with_supports(Some(support(v)), Some(support(w)));
            part.longest_chain_length(&q)
        })
        .transpose()?;
    let violations = condition_v(p, part);
    let (block_derivatives, sign_status) = sign_structure(p, root, &rs, opts)?;
    let verdict = if !violations.is_empty() {
        Verdict::ClassConditionViolated
    } else if sign_status.eta().is_none() {
        Verdict::SignConditionViolated
    } else {
        Verdict::Certified
    };

    let mut probe_error = None;
    let numeric = match laurent_probe(p, root, Contraction::Entrywise, &opts.probe) {
        Ok(pr) => Some(pr),
        Err(e) => {
            probe_error = Some(e.to_string());
            None
        }
    };
    let numeric_weighted = match weights {
        Some((v, w)) => match laurent_probe(p, root, Contraction::Weighted { v, w }, &opts.probe) {
            Ok(pr) => Some(pr),
            Err(e) => {
                probe_error.get_or_insert(e.to_string());
                None
            }
        },
        None => None,
    };
    let leading_coefficient_sign = match &numeric {
        Some(pr) => block_signs(&pr.leading(), part),
        None => Vec::new(),
    };

    Ok(PoleReport {
        root,
        zeta_at_root: rs.zeta,
        summary: ClassSummary::new(part, rs.block_zeta.clone(), rs.basic.clone()),
        d,
        d_weighted,
        condition_v_violations: violations,
        block_derivatives,
        sign_status,
        verdict,
        numeric,
        numeric_weighted,
        probe_error,
        leading_coefficient_sign,
    })
}

fn sign_of(values: impl Iterator<Item = f64>, thresh: f64) -> BlockSign {
    let (mut pos, mut neg, mut zero) = (false, false, false);
    for x in values {
        if x > thresh {
            pos = true;
        } else if x < -thresh {
            neg = true;
        } else {
            zero = true;
        }
    }
    match (pos, neg, zero) {
        (false, false, _) => BlockSign::Zero,
        (true, false, false) => BlockSign::Positive,
        (false, true, false) => BlockSign::Negative,
        _ => BlockSign::Mixed,
    }
}

fn block_signs(c: &DMatrix<f64>, part: &ClassPartition) -> Vec<Vec<BlockSign>> {
    let thresh = 1e-8 * c.amax();
    let classes = part.classes();
    classes
        .iter()
        .map(|rows| {
            classes
                .iter()
                .map(|cols| sign_of(rows.iter().flat_map(|&i| cols.iter().map(move |&j| c[(i, j)])), thresh))
                .collect()
        })
        .collect()
}

fn contour_values(
    p: &MetzlerPencil,
    root: f64,
    contraction: Contraction<'_>,
    radius: f64,
    nodes: usize,
) -> Result<Vec<(Complex64, DMatrix<Complex64>)>> {
    (0..nodes)
        .into_par_iter()
        .map(|j| {
            let theta = 2.0 * PI * (j as f64 + 0.5) / nodes as f64;
            let offset = Complex64::from_polar(radius, theta);
            let a = p.evaluate(Complex64::new(root, 0.0) + offset)?;
            let g = match contraction {
                Contraction::Entrywise => a.try_inverse().ok_or(Error::Singular)?,
                Contraction::Weighted { v, w } => {
                    let rhs = DVector::from_iterator(w.len(), w.iter().map(|&x| Complex64::new(x, 0.0)));
                    let u = a.lu().solve(&rhs).ok_or(Error::Singular)?;
                    let s: Complex64 = v.iter().zip(u.iter()).map(|(&vi, ui)| vi * ui).sum();
                    DMatrix::from_element(1, 1, s)
                }
            };
            Ok((offset, g))
        })
        .collect()
}

/// Coefficient of (z - root)^-k in the Laurent expansion of g, by the
/// trapezoidal rule on a circle.
pub fn laurent_coefficient(
    p: &MetzlerPencil,
    root: f64,
    contraction: Contraction<'_>,
    k: i64,
    radius: f64,
    nodes: usize,
) -> Result<DMatrix<Complex64>> {
    let vals = contour_values(p, root, contraction, radius, nodes)?;
    Ok(coefficient_from(&vals, k))
}

fn coefficient_from(vals: &[(Complex64, DMatrix<Complex64>)], k: i64) -> DMatrix<Complex64> {
    let (r, c) = vals[0].1.shape();
    let mut acc = DMatrix::from_element(r, c, Complex64::new(0.0, 0.0));
    for (offset, g) in vals {
        acc += g * offset.powi(k as i32);
    }
    acc / Complex64::new(vals.len() as f64, 0.0)
}

/// Order of the singularity of g at `root` from the growth of max |g| on
/// shrinking circles, and the leading Laurent coefficient.
pub fn laurent_probe(
    p: &MetzlerPencil,
    root: f64,
    contraction: Contraction<'_>,
    opts: &ProbeOptions,
) -> Result<LaurentProbe> {
    if let Contraction::Weighted { v, w } = contraction {
        check_weights(p.size(), v, w)?;
    }
    let mut maxima = Vec::with_capacity(opts.radii.len());
    let mut first = None;
    for &eps in &opts.radii {
        let vals = contour_values(p, root, contraction, eps, opts.nodes)?;
        let m = vals.iter().map(|(_, g)| g.iter().map(|z| z.norm()).fold(0.0, f64::max)).fold(0.0, f64::max);
        maxima.push(m);
        if first.is_none() {
            first = Some(vals);
        }
    }
    let first = first.ok_or_else(|| Error::Dimension("no probe radii".into()))?;
    let (r, c) = first[0].1.shape();

    if maxima.iter().all(|&m| m < 1e-300) {
        return Ok(LaurentProbe {
            order_estimates: Vec::new(),
            order_estimate: 0.0,
            order: 0,
            identically_zero: true,
            leading_real: vec![vec![0.0; c]; r],
            leading_imag_max: 0.0,
        });
    }
    let estimates: Vec<f64> = opts
        .radii
        .windows(2)
        .zip(maxima.windows(2))
        .map(|(e, m)| -(m[1].ln() - m[0].ln()) / (e[1].ln() - e[0].ln()))
        .collect();
    let rounded: Vec<i64> = estimates.iter().map(|x| x.round() as i64).collect();
    if rounded.is_empty() || rounded.iter().any(|&o| o != rounded[0]) {
        return Err(Error::UnstableSlope(estimates));
    }
    let order = rounded[0];
    let cap = opts.max_order.unwrap_or(2 * p.size() as i64);
    if order > cap {
        return Err(Error::OrderExceedsCap { order, cap });
    }
    let lead = coefficient_from(&first, order);
    Ok(LaurentProbe {
        order_estimate: estimates.iter().sum::<f64>() / estimates.len() as f64,
        order_estimates: estimates,
        order,
        identically_zero: false,
        leading_real: (0..r).map(|i| (0..c).map(|j| lead[(i, j)].re).collect()).collect(),
        leading_imag_max: lead.iter().map(|z| z.im.abs()).fold(0.0, f64::max),
    })
}

/// Keldysh residue (y^T A'(root) x)^-1 x y^T at a simple root with
/// irreducible A(root).
pub fn residue_simple(p: &MetzlerPencil, root: f64, opts: &PoleOptions) -> Result<DMatrix<f64>> {
    let part = p.classes_at(root)?;
    if !part.is_irreducible() {
        return Err(Error::Reducible { classes: part.len() });
    }
    let a = p.evaluate_real(root)?;
    let perron = spectral::perron_data(&a, false)?;
    if perron.root.abs() > opts.tol_root {
        return Err(Error::NotARoot(perron.root.abs()));
    }
    let da = p.derivative_real(root)?;
    let x = DVector::from_vec(perron.right);
    let y = DVector::from_vec(perron.left);
    let q = y.dot(&(&da * &x));
    if q.abs() <= 1e-12 * da.norm().max(1.0) * x.norm() * y.norm() {
        return Err(Error::DegenerateDerivative(q));
    }
    Ok(&x * y.transpose() / q)
}

/// -v^T A(z)^-1 w, valid where zeta(A(Re z)) < 0.
pub fn transform_value(p: &MetzlerPencil, z: Complex64, v: &[f64], w: &[f64]) -> Result<Complex64> {
    check_weights(p.size(), v, w)?;
    let zeta = p.zeta_at(z.re)?;
    if zeta >= 0.0 {
        return Err(Error::OutsideConvergence(zeta));
    }
    let a = p.evaluate(z)?;
    let rhs = DVector::from_iterator(w.len(), w.iter().map(|&x| Complex64::new(x, 0.0)));
    let u = a.lu().solve(&rhs).ok_or(Error::Singular)?;
    Ok(-v.iter().zip(u.iter()).map(|(&vi, ui)| vi * ui).sum::<Complex64>())
}

/// Laurent coefficient of one class block of A(z)^-1 at the order given by
/// the longest chain between the two classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockCoefficient {
    /// 1-based class numbers.
    pub from: usize,
    pub to: usize,
    pub order: usize,
    pub observed: BlockSign,
    pub predicted: Option<BlockSign>,
}

/// Sign of every class block of A(z)^-1 at its own pole order. With slope
/// sign eta of the basic blocks, the prediction is -(-eta)^order.
pub fn laurent_block_structure(
    p: &MetzlerPencil,
    root: f64,
    radius: f64,
    opts: &PoleOptions,
) -> Result<Vec<BlockCoefficient>> {
    let rs = root_structure(p, root, opts)?;
    let (_, status) = sign_structure(p, root, &rs, opts)?;
    let part = &rs.partition;
    let m = part.len();
    let mut orders = vec![vec![0usize; m]; m];
    let mut needed = Vec::new();
    for j in 0..m {
        for k in 0..m {
            if part.accesses(j, k) {
                let q = ChainQuery::new(rs.basic.clone())
                    .with_supports(Some(part.class(j).to_vec()), Some(part.class(k).to_vec()));
                orders[j][k] = part.longest_chain_length(&q)?;
                if orders[j][k] > 0 && !needed.contains(&orders[j][k]) {
                    needed.push(orders[j][k]);
                }
            }
        }
    }
    let vals = contour_values(p, root, Contraction::Entrywise, radius, 64)?;
    let coeffs: Vec<(usize, DMatrix<f64>)> =
        needed.iter().map(|&o| (o, coefficient_from(&vals, o as i64).map(|z| z.re))).collect();

    let mut out = Vec::new();
    for j in 0..m {
        for k in 0..m {
            let order = orders[j][k];
            if order == 0 {
                continue;
            }
            let c = &coeffs.iter().find(|(o, _)| *o == order).unwrap().1;
            let thresh = 1e-8 * c.amax();
            let observed =
                sign_of(part.class(j).iter().flat_map(|&r| part.class(k).iter().map(move |&s| c[(r, s)])), thresh);
            let predicted = status.eta().map(|eta| {
                if -(-eta).powi(order as i32) > 0.0 {
                    BlockSign::Positive
                } else {
                    BlockSign::Negative
                }
            });
            out.push(BlockCoefficient { from: j + 1, to: k + 1, order, observed, predicted });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::transforms::{Distribution, LevySpec};

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
    fn baseline_probe() {
        let p = fixtures::counterexample_baseline();
        let pr = laurent_probe(&p, 0.0, Contraction::Entrywise, &ProbeOptions::default()).unwrap();
        assert_eq!(pr.order, 3);
        assert!((pr.leading()[(0, 2)] - 1.0).abs() < 1e-9);
        let rep = pole_order(&p, 0.0, None, &PoleOptions::default()).unwrap();
        assert_eq!(rep.d, 3);
        assert_eq!(rep.verdict, Verdict::Certified);
        assert_eq!(rep.certified_order().unwrap(), 3);
    }

    #[test]
    fn counterexamples_are_diagnosed() {
        let opts = PoleOptions::default();
        let bl = pole_order(&fixtures::counterexample_bottom_left(), 0.0, None, &opts).unwrap();
        assert_eq!((bl.d, bl.numeric_order(), bl.verdict), (3, Some(2), Verdict::ClassConditionViolated));
        assert_eq!(bl.condition_v_violations, vec![[3, 1]]);
        assert!(bl.certified_order().is_err());

        let tl = pole_order(&fixtures::counterexample_top_left(), 0.0, None, &opts).unwrap();
        assert_eq!((tl.d, tl.numeric_order(), tl.verdict), (3, Some(4), Verdict::SignConditionViolated));
        assert_eq!(tl.sign_status, SignStatus::Degenerate);

        let mx = pole_order(&fixtures::counterexample_mixed(), 0.0, None, &opts).unwrap();
        assert_eq!((mx.d, mx.numeric_order(), mx.sign_status), (3, Some(2), SignStatus::Mixed));
        assert_eq!(mx.verdict, Verdict::SignConditionViolated);
    }

    #[test]
    fn scalar_residues() {
        let p = reed();
        let opts = PoleOptions::default();
        let r = residue_simple(&p, 1.0, &opts).unwrap();
        assert!((r[(0, 0)] - 0.5).abs() < 1e-12);
        let r = residue_simple(&p, -1.0, &opts).unwrap();
        assert!((r[(0, 0)] + 0.5).abs() < 1e-12);
        let one = [1.0];
        let pr = laurent_probe(&p, 1.0, Contraction::Weighted { v: &one, w: &one }, &opts.probe).unwrap();
        assert_eq!(pr.order, 1);
        assert!((pr.leading_real[0][0] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn regular_point_has_no_pole() {
        let p = reed();
        let pr = laurent_probe(&p, 0.3, Contraction::Entrywise, &ProbeOptions::default()).unwrap();
        assert!(pr.order <= 0);
    }

    #[test]
    fn scalar_transform_values() {
        let p = reed();
        let one = [1.0];
        assert!((transform_value(&p, Complex64::new(0.0, 0.0), &one, &one).unwrap().re - 1.0).abs() < 1e-15);
        let t = transform_value(&p, Complex64::new(0.5, 0.0), &one, &one).unwrap();
        assert!((t.re - 4.0 / 3.0).abs() < 1e-14);
        assert!(matches!(
            transform_value(&p, Complex64::new(1.5, 0.0), &one, &one),
            Err(Error::OutsideConvergence(_))
        ));
    }

    #[test]
    fn example_matrix_narrative() {
        let p = fixtures::shifted_constant(&fixtures::example_matrix());
        let rep = pole_order(&p, 3.0, None, &PoleOptions::default()).unwrap();
        assert_eq!(rep.d, 2);
        let basic: Vec<Vec<usize>> = rep
            .summary
            .classes
            .iter()
            .zip(&rep.summary.basic)
            .filter(|(_, &b)| b)
            .map(|(c, _)| c.clone())
            .collect();
        assert_eq!(basic, vec![vec![1, 4], vec![2, 10], vec![9]]);
        // A(z) = A - zI has slope -1 in every block
        assert_eq!(rep.sign_status, SignStatus::Negative);
        assert_eq!(rep.numeric_order(), Some(2));
    }
}
