//! Dense complex matrices and operator norms, used to check the symbolic
//! results numerically.
//!
//! Small matrices (both sides at most [`SVD_LIMIT`]) go through a full SVD.
//! Larger ones use power iteration on the Gram matrix and fall back to the
//! SVD if the iteration does not certify within its budget.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use thiserror::Error;

use crate::digraph::{Digraph, MatrixUnit, SpaceElement};
use crate::regular::{CompressionTypeDecomposition, MapError, RegularMap};
use std::sync::Arc;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const SVD_LIMIT: usize = 64;
const POWER_MAX_ITERS: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("matrix entry ({0}, {1}) is not finite")]
    NonFinite(usize, usize),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("singular pair residual {residual:e} exceeds tolerance {tol:e}")]
    Uncertified { residual: f64, tol: f64 },
    #[error(transparent)]
    Map(#[from] MapError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        ComplexMatrix(DMatrix::identity(n, n))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        ComplexMatrix(DMatrix::from_fn(r, c, |i, j| Complex64::new(rows[i][j], 0.0)))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        ComplexMatrix(DMatrix::from_fn(rows, cols, f))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    /// Zero-based entry access.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.0[(i, j)] = v;
    }

    pub fn mul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &other.0)
    }

    pub fn inner(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    fn check_finite(&self) -> Result<(), NumericError> {
        for j in 0..self.cols() {
            for i in 0..self.rows() {
                let z = self.0[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(NumericError::NonFinite(i, j));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                let z = self.0[(i, j)];
                if z.im == 0.0 {
                    write!(f, "{:>8.4}", z.re)?;
                } else {
                    write!(f, " {:.3}{:+.3}i", z.re, z.im)?;
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    ExactSvd,
    PowerIteration,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormReport {
    pub value: f64,
    pub method: NormMethod,
    pub residual: f64,
}

/// `n × n` matrix with the element's coefficients at `(i, j)`.
pub fn realize(a: &SpaceElement) -> ComplexMatrix {
    let n = a.space().n();
    let mut m = ComplexMatrix::zeros(n, n);
    for (u, &c) in a.coeffs() {
        m.set(u.row - 1, u.col - 1, c);
    }
    m
}

pub fn apply(f: &RegularMap, a: &SpaceElement) -> Result<SpaceElement, MapError> {
    f.apply(a)
}

/// Largest singular value with a certified singular pair.
pub fn operator_norm(m: &ComplexMatrix, tol: f64) -> Result<NormReport, NumericError> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(NumericError::BadTolerance(tol));
    }
    m.check_finite()?;
    if m.rows() == 0 || m.cols() == 0 {
        return Ok(NormReport {
            value: 0.0,
            method: NormMethod::ExactSvd,
            residual: 0.0,
        });
    }
    if m.rows().max(m.cols()) > SVD_LIMIT {
        // deterministic start with no special alignment
        let start = DVector::from_fn(m.cols(), |i, _| Complex64::new(1.0 + (i as f64 * 0.618_033_988_7).fract(), 0.0));
        if let Some(report) = power_norm(&m.0, tol, start) {
            return Ok(report);
        }
    }
    svd_norm(&m.0, tol)
}

/// `operator_norm` with the default tolerance, returning just the value.
pub fn norm(m: &ComplexMatrix) -> f64 {
    operator_norm(m, DEFAULT_TOL)
        .expect("finite matrix with default tolerance")
        .value
}

fn svd_norm(a: &DMatrix<Complex64>, tol: f64) -> Result<NormReport, NumericError> {
    let svd = a.clone().svd(true, true);
    let (k, sigma) = svd
        .singular_values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, s)| if s > best.1 { (i, s) } else { best });
    let u = svd.u.as_ref().expect("requested U").column(k).into_owned();
    let v = svd
        .v_t
        .as_ref()
        .expect("requested V^T")
        .row(k)
        .adjoint()
        .into_owned();
    let residual = pair_residual(a, &u, &v, sigma);
    if residual <= tol * sigma.max(1.0) {
        return Ok(NormReport {
            value: sigma,
            method: NormMethod::ExactSvd,
            residual,
        });
    }
    // a repeated top value leaves the returned vectors inaccurate; polishing
    // v on the Gram matrix converges inside the top singular subspace
    power_norm(a, tol, v).ok_or(NumericError::Uncertified { residual, tol })
}

fn pair_residual(a: &DMatrix<Complex64>, u: &DVector<Complex64>, v: &DVector<Complex64>, sigma: f64) -> f64 {
    let s = Complex64::new(sigma, 0.0);
    let r1 = (a * v - u * s).norm();
    let r2 = (a.adjoint() * u - v * s).norm();
    r1.max(r2)
}

fn power_norm(a: &DMatrix<Complex64>, tol: f64, start: DVector<Complex64>) -> Option<NormReport> {
    let gram = a.adjoint() * a;
    let mut v = start;
    v /= Complex64::new(v.norm(), 0.0);
    let mut lambda = 0.0;
    for _ in 0..POWER_MAX_ITERS {
        let w = &gram * &v;
        let wn = w.norm();
        if wn == 0.0 {
            return Some(NormReport {
                value: 0.0,
                method: NormMethod::PowerIteration,
                residual: 0.0,
            });
        }
        lambda = v.dotc(&w).re;
        let residual = (&w - &v * Complex64::new(lambda, 0.0)).norm();
        v = w / Complex64::new(wn, 0.0);
        // ||A^* u - σ v|| = ||G v - λ v|| / σ for u = A v / σ
        if residual <= 0.5 * tol * lambda.max(0.0).sqrt().max(1.0) {
            break;
        }
    }
    let av = a * &v;
    let sigma = av.norm();
    if lambda <= 0.0 || sigma == 0.0 {
        return None;
    }
    let u = av / Complex64::new(sigma, 0.0);
    let residual = pair_residual(a, &u, &v, sigma);
    (residual <= tol * sigma.max(1.0)).then_some(NormReport {
        value: sigma,
        method: NormMethod::PowerIteration,
        residual,
    })
}

/// The `m × m` cycle pattern: ones on the diagonal and superdiagonal and
/// `-1` in the bottom-left corner. With `truncated` the corner is zero.
pub fn cycle_pattern(m: usize, truncated: bool) -> ComplexMatrix {
    let mut a = ComplexMatrix::zeros(m, m);
    for i in 0..m {
        a.set(i, i, Complex64::new(1.0, 0.0));
        if i + 1 < m {
            a.set(i, i + 1, Complex64::new(1.0, 0.0));
        }
    }
    if !truncated && m > 1 {
        a.set(m - 1, 0, Complex64::new(-1.0, 0.0));
    }
    a
}

/// `(2 cos(π/2m), 2 cos(π/(2m+1)))`: norms of the signed m-cycle pattern
/// and of its truncation.
pub fn cycle_norm_pair(m: usize) -> (f64, f64) {
    assert!(m >= 2, "cycle length must be at least 2");
    let m = m as f64;
    (
        2.0 * (std::f64::consts::PI / (2.0 * m)).cos(),
        2.0 * (std::f64::consts::PI / (2.0 * m + 1.0)).cos(),
    )
}

/// Norm of `Q a Q` on `Q C^n`.
pub fn compressed_norm(a: &SpaceElement, q: &crate::digraph::VertexSet, tol: f64) -> Result<f64, NumericError> {
    let idx: Vec<usize> = q.iter().copied().collect();
    let m = ComplexMatrix::from_fn(idx.len(), idx.len(), |i, j| a.coeff(MatrixUnit::new(idx[i], idx[j])));
    Ok(operator_norm(&m, tol)?.value)
}

/// `max_k ||Q_k a Q_k||` over the distinct compression projections; equals
/// the norm of the image of `a`.
pub fn compression_norm(d: &CompressionTypeDecomposition, a: &SpaceElement, tol: f64) -> Result<f64, NumericError> {
    if **a.space() != **d.dom() {
        return Err(MapError::DomainMismatch.into());
    }
    d.summands()
        .projections()
        .map(|q| compressed_norm(a, q, tol))
        .try_fold(0.0_f64, |acc, n| Ok(acc.max(n?)))
}

/// Element with independent standard complex Gaussian coefficients on every
/// edge of the space.
pub fn random_element<R: Rng + ?Sized>(space: &Arc<Digraph>, rng: &mut R) -> SpaceElement {
    let normal = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).expect("valid normal");
    let terms: Vec<(MatrixUnit, Complex64)> = space
        .edges()
        .iter()
        .map(|&u| (u, Complex64::new(normal.sample(rng), normal.sample(rng))))
        .collect();
    SpaceElement::new(space.clone(), terms).expect("support is the edge set")
}

/// Reproducible generator for trial `index` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub trials: usize,
    pub max_ratio: f64,
    pub worst_trial: Option<usize>,
    /// Trials with `||f(a)|| > (1 + tol) ||a||`.
    pub violations: Vec<usize>,
}

impl ProbeReport {
    pub fn is_contractive(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Estimates `sup ||f(a)|| / ||a||` from `extra` elements (tried first, in
/// order) followed by `trials` seeded Gaussian elements.
pub fn contractivity_probe(
    f: &RegularMap,
    trials: usize,
    seed: u64,
    tol: f64,
    extra: &[SpaceElement],
) -> Result<ProbeReport, NumericError> {
    let mut report = ProbeReport {
        trials: extra.len() + trials,
        max_ratio: 0.0,
        worst_trial: None,
        violations: Vec::new(),
    };
    let randoms = (0..trials).map(|t| random_element(f.dom(), &mut trial_rng(seed, t as u64)));
    for (index, a) in extra.iter().cloned().chain(randoms).enumerate() {
        let denom = operator_norm(&realize(&a), tol)?.value;
        if denom == 0.0 {
            continue;
        }
        let ratio = operator_norm(&realize(&f.apply(&a)?), tol)?.value / denom;
        if ratio > report.max_ratio {
            report.max_ratio = ratio;
            report.worst_trial = Some(index);
        }
        if ratio > 1.0 + tol {
            report.violations.push(index);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::VertexSet;
    use crate::regular::{decide_compression_type, ElementaryCompressionMap};

    #[test]
    fn identity_norm() {
        let r = operator_norm(&ComplexMatrix::identity(2), 1e-9).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert_eq!(r.method, NormMethod::ExactSvd);
    }

    #[test]
    fn repeated_top_singular_value() {
        let block = [[-0.9961, -1.0869], [-0.2278, -0.0530]];
        let mut m = ComplexMatrix::zeros(7, 7);
        for p in [[0, 6], [2, 4]] {
            for i in 0..2 {
                for j in 0..2 {
                    m.set(p[i], p[j], Complex64::new(block[i][j], 0.0));
                }
            }
        }
        m.set(1, 1, Complex64::new(-0.0530, 0.0));
        let r = operator_norm(&m, 1e-9).unwrap();
        let single = operator_norm(&ComplexMatrix::from_real_rows(&[block[0].to_vec(), block[1].to_vec()]), 1e-9).unwrap();
        assert!((r.value - single.value).abs() < 1e-12);
    }

    #[test]
    fn three_cycle_norms() {
        let full = norm(&cycle_pattern(3, false));
        let cut = norm(&cycle_pattern(3, true));
        assert!((full - 1.732_050_807_568_877_2).abs() < 1e-9);
        assert!((cut - 1.801_937_735_804_838).abs() < 1e-9);
    }

    #[test]
    fn norm_pair_m2_by_svd() {
        let (full, cut) = cycle_norm_pair(2);
        assert!((full - std::f64::consts::SQRT_2).abs() < 1e-12);
        assert!((cut - 1.618_033_988_749_895).abs() < 1e-12);
        assert!((norm(&cycle_pattern(2, false)) - full).abs() < 1e-9);
        assert!((norm(&cycle_pattern(2, true)) - cut).abs() < 1e-9);
        let ratios: Vec<f64> = (2..40).map(|m| cycle_norm_pair(m).1 / cycle_norm_pair(m).0).collect();
        assert!(ratios.windows(2).all(|w| w[1] < w[0]));
        assert!(ratios.iter().all(|&r| r > 1.0));
    }

    #[test]
    fn non_finite_rejected() {
        let mut m = ComplexMatrix::identity(2);
        m.set(0, 1, Complex64::new(f64::NAN, 0.0));
        assert_eq!(operator_norm(&m, 1e-9), Err(NumericError::NonFinite(0, 1)));
        assert!(matches!(
            operator_norm(&ComplexMatrix::identity(2), 0.0),
            Err(NumericError::BadTolerance(_))
        ));
    }

    #[test]
    fn power_iteration_agrees_with_svd() {
        let n = 80;
        let mut rng = trial_rng(7, 0);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let m = ComplexMatrix::from_fn(n, n, |_, _| Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng)));
        let big = operator_norm(&m, 1e-9).unwrap();
        let exact = svd_norm(m.inner(), 1e-9).unwrap();
        assert!((big.value - exact.value).abs() < 1e-8, "{big:?} vs {exact:?}");
    }

    #[test]
    fn realize_examples() {
        let t2 = Arc::new(Digraph::upper_triangular(2));
        let e12 = SpaceElement::from_real(t2.clone(), [((1, 2), 1.0)]).unwrap();
        assert_eq!(realize(&e12), ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]));
        assert_eq!(realize(&SpaceElement::zero(t2)), ComplexMatrix::zeros(2, 2));
    }

    #[test]
    fn compression_norm_example() {
        let t3 = Arc::new(Digraph::upper_triangular(3));
        let t5 = Arc::new(Digraph::upper_triangular(5));
        let comps = vec![
            ElementaryCompressionMap::placed(t3.clone(), t5.clone(), VertexSet::from([2]), &[1]).unwrap(),
            ElementaryCompressionMap::placed(t3.clone(), t5.clone(), VertexSet::from([2, 3]), &[2, 3]).unwrap(),
            ElementaryCompressionMap::placed(t3.clone(), t5.clone(), VertexSet::from([2, 3]), &[4, 5]).unwrap(),
        ];
        let f = crate::regular::assemble(t3.clone(), t5, &comps).unwrap();
        let d = decide_compression_type(&f).decomposition().cloned().unwrap();
        let a = SpaceElement::from_real(t3.clone(), [((1, 2), 1.0), ((2, 3), 1.0)]).unwrap();
        assert!((compression_norm(&d, &a, 1e-9).unwrap() - 1.0).abs() < 1e-12);
        let off = SpaceElement::from_real(t3, [((1, 1), 2.0), ((1, 3), 1.0)]).unwrap();
        assert_eq!(compression_norm(&d, &off, 1e-9).unwrap(), 0.0);
    }

    #[test]
    fn probe_zero_map() {
        let t2 = Arc::new(Digraph::upper_triangular(2));
        let r = contractivity_probe(&RegularMap::zero(t2.clone(), t2), 20, 0, 1e-9, &[]).unwrap();
        assert_eq!(r.max_ratio, 0.0);
        assert!(r.is_contractive());
    }

    #[test]
    fn probe_is_reproducible() {
        let g = Arc::new(Digraph::cycle(4));
        let f = RegularMap::identity(g);
        let a = contractivity_probe(&f, 30, 11, 1e-9, &[]).unwrap();
        let b = contractivity_probe(&f, 30, 11, 1e-9, &[]).unwrap();
        assert_eq!(a, b);
        assert!((a.max_ratio - 1.0).abs() < 1e-9);
    }
}
