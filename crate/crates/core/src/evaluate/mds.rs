//! Classical (Torgerson) MDS and Gaussian simulation from a correlation
//! matrix.

use std::io::Read;
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{EvalError, Result};
use crate::exec::Execution;
use crate::ingest::{ValueId, ValueMap};
use crate::rng::task_rng;
use crate::stats::correlation_matrix;

const SYM_TOL: f64 = 1e-9;
/// Eigenvalue floor used when repairing an indefinite correlation matrix.
pub const PSD_FLOOR: f64 = 1e-10;

/// Square matrix in row-major order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquareMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl SquareMatrix {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(EvalError::NotSquare { rows: n, len: data.len() });
        }
        Ok(SquareMatrix { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(rows.len(), rows.concat())
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        (0..n).for_each(|i| data[i * n + i] = 1.0);
        SquareMatrix { n, data }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= SYM_TOL))
    }

    fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.data)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MdsResult {
    /// `n` rows of `dims` coordinates.
    pub coordinates: Vec<Vec<f64>>,
    /// Retained eigenvalues, descending, clamped at zero.
    pub eigenvalues: Vec<f64>,
}

/// Eigenpairs sorted by descending eigenvalue (ties keep solver order).
fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let SymmetricEigen { eigenvalues, eigenvectors } = m.symmetric_eigen();
    let mut idx: Vec<usize> = (0..eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eigenvalues[b].total_cmp(&eigenvalues[a]));
    let vals = idx.iter().map(|&i| eigenvalues[i]).collect();
    let vecs = DMatrix::from_columns(&idx.iter().map(|&i| eigenvectors.column(i).into_owned()).collect::<Vec<_>>());
    (vals, vecs)
}

/// Torgerson scaling: `B = -1/2 J D^2 J`, coordinates from the top `dims`
/// eigenpairs. Each axis is flipped so its first non-negligible coordinate
/// is positive.
pub fn classical_mds(d: &SquareMatrix, dims: usize) -> Result<MdsResult> {
    let n = d.n;
    if !d.is_symmetric() {
        return Err(EvalError::AsymmetricInput);
    }
    if d.data.iter().any(|&x| !x.is_finite() || x < 0.0) {
        return Err(EvalError::NegativeDissimilarity);
    }
    if (0..n).any(|i| d.get(i, i) != 0.0) {
        return Err(EvalError::NonZeroDiagonal);
    }
    let dims = dims.min(n);
    let sq = d.to_nalgebra().map(|x| x * x);
    let j = DMatrix::<f64>::identity(n, n) - DMatrix::from_element(n, n, 1.0 / n as f64);
    let mut b = &j * sq * &j * -0.5;
    b = (&b + b.transpose()) * 0.5;
    let (vals, vecs) = sorted_eigen(b);
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let mut coordinates = vec![vec![0.0; dims]; n];
    let mut eigenvalues = Vec::with_capacity(dims);
    for k in 0..dims {
        let lambda = vals[k].max(0.0);
        eigenvalues.push(lambda);
        let mut axis: DVector<f64> = vecs.column(k).into_owned() * lambda.sqrt();
        let tiny = 1e-12 * scale.sqrt();
        if axis.iter().find(|x| x.abs() > tiny).is_some_and(|&x| x < 0.0) {
            axis.neg_mut();
        }
        for (row, &x) in coordinates.iter_mut().zip(axis.iter()) {
            row[k] = if x.abs() > tiny { x } else { 0.0 };
        }
    }
    Ok(MdsResult { coordinates, eigenvalues })
}

fn check_correlation(c: &SquareMatrix) -> bool {
    c.is_symmetric()
        && (0..c.n).all(|i| (c.get(i, i) - 1.0).abs() <= SYM_TOL)
        && c.data.iter().all(|x| x.is_finite() && x.abs() <= 1.0 + SYM_TOL)
}

/// `d = sqrt(2 (1 - rho))` with a zero diagonal.
pub fn correlation_to_dissimilarity(corr: &SquareMatrix) -> Result<SquareMatrix> {
    if !check_correlation(corr) {
        return Err(EvalError::InvalidCorrelation);
    }
    let n = corr.n;
    let data = (0..n * n)
        .map(|k| if k / n == k % n { 0.0 } else { (2.0 * (1.0 - corr.data[k])).max(0.0).sqrt() })
        .collect();
    SquareMatrix::new(n, data)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Simulation {
    pub rows: usize,
    pub cols: usize,
    /// Row-major samples.
    pub data: Vec<f64>,
    /// True when the input was not positive definite enough and had to be
    /// projected.
    pub repaired: bool,
}

/// Symmetric square root of a correlation matrix, repairing it when its
/// smallest eigenvalue is below the floor.
fn correlation_root(corr: &SquareMatrix) -> (DMatrix<f64>, bool) {
    let n = corr.n;
    let (vals, vecs) = sorted_eigen(corr.to_nalgebra());
    let repaired = vals.iter().any(|&v| v < PSD_FLOOR);
    let clipped: Vec<f64> = vals.iter().map(|&v| v.max(PSD_FLOOR)).collect();
    let mut root = &vecs * DMatrix::from_diagonal(&DVector::from_iterator(n, clipped.iter().map(|v| v.sqrt()))) * vecs.transpose();
    if repaired {
        // rescale so that root * root^T has unit diagonal
        let full = &root * root.transpose();
        let s = DVector::from_iterator(n, (0..n).map(|i| 1.0 / full[(i, i)].sqrt()));
        root = DMatrix::from_diagonal(&s) * root;
    }
    (root, repaired)
}

/// `n_samples` zero-mean Gaussian rows with correlation `corr`. Row `i`
/// draws from its own seeded stream.
pub fn simulate_from_correlation(corr: &SquareMatrix, n_samples: usize, seed: u64, exec: Execution) -> Result<Simulation> {
    if !corr.is_symmetric() || (0..corr.n).any(|i| (corr.get(i, i) - 1.0).abs() > SYM_TOL) {
        return Err(EvalError::NotACorrelationMatrix);
    }
    let p = corr.n;
    let (root, repaired) = correlation_root(corr);
    let rows = exec.map_range(n_samples, |i| {
        let mut rng = task_rng(seed, "simulate_from_correlation", i as u64);
        let z = DVector::from_iterator(p, (0..p).map(|_| StandardNormal.sample(&mut rng)));
        (&root * z).iter().copied().collect::<Vec<f64>>()
    });
    Ok(Simulation { rows: n_samples, cols: p, data: rows.concat(), repaired })
}

/// Pearson correlation matrix of the columns of a row-major sample.
pub fn empirical_correlation(data: &[f64], rows: usize, cols: usize) -> Result<SquareMatrix> {
    let c = correlation_matrix(data, rows, cols);
    if c.iter().any(|x| !x.is_finite()) {
        return Err(EvalError::ConstantColumn);
    }
    SquareMatrix::new(cols, c)
}

/// Parses a `value_a,value_b,correlation` table covering every unordered
/// pair of distinct values exactly once.
pub fn read_reference_correlation<R: Read>(reader: R) -> Result<SquareMatrix> {
    #[derive(Deserialize)]
    struct Row {
        value_a: ValueId,
        value_b: ValueId,
        correlation: f64,
    }
    let mut m = SquareMatrix::identity(ValueId::COUNT);
    let mut seen = [[false; 10]; 10];
    for (line, row) in csv::Reader::from_reader(reader).deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| EvalError::Reference(format!("row {}: {e}", line + 2)))?;
        let (a, b) = (row.value_a.index(), row.value_b.index());
        if a == b || seen[a][b] {
            return Err(EvalError::Reference(format!("row {}: repeated or diagonal pair", line + 2)));
        }
        seen[a][b] = true;
        seen[b][a] = true;
        m.data[a * 10 + b] = row.correlation;
        m.data[b * 10 + a] = row.correlation;
    }
    let missing = (0..10).flat_map(|a| (a + 1..10).map(move |b| (a, b))).filter(|&(a, b)| !seen[a][b]).count();
    if missing > 0 {
        return Err(EvalError::Reference(format!("{missing} value pairs missing")));
    }
    if !check_correlation(&m) {
        return Err(EvalError::InvalidCorrelation);
    }
    Ok(m)
}

pub fn load_reference_correlation(path: impl AsRef<Path>) -> Result<SquareMatrix> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| EvalError::Reference(format!("{}: {e}", path.display())))?;
    read_reference_correlation(f)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MdsPoint {
    pub value: ValueId,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MdsSet {
    pub label: String,
    pub source: String,
    pub points: Vec<MdsPoint>,
    pub eigenvalues: Vec<f64>,
    pub repaired: bool,
}

/// Contents of `mds.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MdsFile {
    pub transform: String,
    pub sets: Vec<MdsSet>,
}

/// Two-dimensional MDS of the ten values from a correlation matrix.
pub fn value_map_from_correlation(label: &str, source: &str, corr: &SquareMatrix, repaired: bool) -> Result<MdsSet> {
    let d = correlation_to_dissimilarity(corr)?;
    let r = classical_mds(&d, 2)?;
    Ok(MdsSet {
        label: label.into(),
        source: source.into(),
        points: ValueId::ALL
            .iter()
            .zip(&r.coordinates)
            .map(|(&value, c)| MdsPoint { value, x: c[0], y: c[1] })
            .collect(),
        eigenvalues: r.eigenvalues,
        repaired,
    })
}

/// The observed map (correlations between values across song profiles)
/// and, when a reference matrix is given, the simulated map.
pub fn mds_report(
    profiles: &[ValueMap<f64>],
    reference: Option<&SquareMatrix>,
    n_samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<MdsFile> {
    let flat: Vec<f64> = profiles.iter().flat_map(|p| p.values().iter().copied()).collect();
    let observed = empirical_correlation(&flat, profiles.len(), ValueId::COUNT)?;
    let mut sets = vec![value_map_from_correlation(
        "observed",
        "weighted-mean profiles across songs",
        &observed,
        false,
    )?];
    if let Some(reference) = reference {
        let sim = simulate_from_correlation(reference, n_samples, seed, exec)?;
        let corr = empirical_correlation(&sim.data, sim.rows, sim.cols)?;
        sets.push(value_map_from_correlation(
            "simulated",
            &format!("{n_samples} samples from the reference correlation matrix"),
            &corr,
            sim.repaired,
        )?);
    }
    Ok(MdsFile { transform: "sqrt(2 * (1 - r))".into(), sets })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dist_matrix(points: &[Vec<f64>]) -> SquareMatrix {
        let n = points.len();
        let data = (0..n * n)
            .map(|k| {
                let (a, b) = (&points[k / n], &points[k % n]);
                a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
            })
            .collect();
        SquareMatrix::new(n, data).unwrap()
    }

    fn max_dev(a: &SquareMatrix, b: &SquareMatrix) -> f64 {
        a.data.iter().zip(&b.data).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn triangle_round_trip() {
        let d = dist_matrix(&[vec![0.0, 0.0], vec![3.0, 0.0], vec![0.0, 4.0]]);
        let r = classical_mds(&d, 2).unwrap();
        assert!(max_dev(&dist_matrix(&r.coordinates), &d) < 1e-6);
        // sign convention
        for k in 0..2 {
            let first = r.coordinates.iter().map(|c| c[k]).find(|x| x.abs() > 1e-9).unwrap();
            assert!(first > 0.0);
        }
    }

    #[test]
    fn degenerate_and_invalid_inputs() {
        let r = classical_mds(&SquareMatrix::new(3, vec![0.0; 9]).unwrap(), 2).unwrap();
        assert!(r.coordinates.iter().flatten().all(|&x| x == 0.0));
        let asym = SquareMatrix::new(2, vec![0.0, 1.0, 2.0, 0.0]).unwrap();
        assert_eq!(classical_mds(&asym, 2), Err(EvalError::AsymmetricInput));
        let neg = SquareMatrix::new(2, vec![0.0, -1.0, -1.0, 0.0]).unwrap();
        assert_eq!(classical_mds(&neg, 2), Err(EvalError::NegativeDissimilarity));
    }

    #[test]
    fn identity_correlation_is_equilateral_in_full_space() {
        let d = correlation_to_dissimilarity(&SquareMatrix::identity(10)).unwrap();
        assert!((d.get(0, 1) - 2f64.sqrt()).abs() < 1e-15);
        let r = classical_mds(&d, 9).unwrap();
        let out = dist_matrix(&r.coordinates);
        for i in 0..10 {
            for j in 0..10 {
                assert!((out.get(i, j) - d.get(i, j)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn dissimilarity_examples() {
        let c = SquareMatrix::new(3, vec![1.0, 1.0, -1.0, 1.0, 1.0, 0.0, -1.0, 0.0, 1.0]).unwrap();
        let d = correlation_to_dissimilarity(&c).unwrap();
        assert_eq!(d.get(0, 1), 0.0);
        assert_eq!(d.get(0, 2), 2.0);
        assert!((d.get(1, 2) - std::f64::consts::SQRT_2).abs() < 1e-12);
        let bad = SquareMatrix::new(2, vec![1.0, 1.5, 1.5, 1.0]).unwrap();
        assert_eq!(correlation_to_dissimilarity(&bad), Err(EvalError::InvalidCorrelation));
    }

    #[test]
    fn simulation_matches_target_correlation() {
        let id = simulate_from_correlation(&SquareMatrix::identity(10), 10_000, 4, Execution::Parallel).unwrap();
        assert_eq!((id.rows, id.cols, id.data.len()), (10_000, 10, 100_000));
        assert!(!id.repaired);
        let c = empirical_correlation(&id.data, id.rows, id.cols).unwrap();
        assert!((0..10).all(|i| (0..10).all(|j| i == j || c.get(i, j).abs() < 0.05)));

        let two = SquareMatrix::new(2, vec![1.0, 0.8, 0.8, 1.0]).unwrap();
        let s = simulate_from_correlation(&two, 100_000, 9, Execution::Parallel).unwrap();
        let r = empirical_correlation(&s.data, s.rows, 2).unwrap().get(0, 1);
        assert!((0.77..=0.83).contains(&r), "{r}");
        let again = simulate_from_correlation(&two, 100_000, 9, Execution::Sequential).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn indefinite_input_is_repaired() {
        // pairwise 0.9/0.9/-0.9 is not PSD
        let c = SquareMatrix::new(3, vec![1.0, 0.9, 0.9, 0.9, 1.0, -0.9, 0.9, -0.9, 1.0]).unwrap();
        let s = simulate_from_correlation(&c, 20_000, 1, Execution::Parallel).unwrap();
        assert!(s.repaired);
        let e = empirical_correlation(&s.data, s.rows, 3).unwrap();
        assert!(e.data.iter().all(|x| x.is_finite()));
        let bad = SquareMatrix::new(2, vec![2.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(
            simulate_from_correlation(&bad, 5, 1, Execution::Sequential),
            Err(EvalError::NotACorrelationMatrix)
        );
    }

    #[test]
    fn reference_table() {
        let mut csv = String::from("value_a,value_b,correlation\n");
        for a in 0..10 {
            for b in a + 1..10 {
                csv += &format!("{},{},{}\n", ValueId::ALL[a], ValueId::ALL[b], if b == a + 1 { 0.3 } else { 0.0 });
            }
        }
        let m = read_reference_correlation(csv.as_bytes()).unwrap();
        assert_eq!(m.get(1, 0), 0.3);
        assert_eq!(m.get(4, 4), 1.0);
        let short: String = csv.lines().take(20).collect::<Vec<_>>().join("\n");
        assert!(matches!(read_reference_correlation(short.as_bytes()), Err(EvalError::Reference(_))));
    }

    proptest! {
        #[test]
        fn planar_round_trip(coords in proptest::collection::vec(-10.0f64..10.0, 20)) {
            let pts: Vec<Vec<f64>> = coords.chunks(2).map(|c| c.to_vec()).collect();
            let d = dist_matrix(&pts);
            let r = classical_mds(&d, 2).unwrap();
            prop_assert!(max_dev(&dist_matrix(&r.coordinates), &d) < 1e-6);
        }
    }
}
