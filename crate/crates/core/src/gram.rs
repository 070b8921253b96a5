//! Gram matrices over path collections, MMD estimators and kernel ridge
//! regression on top of them.

use std::io::{BufRead, BufReader, Read, Write};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::csv_io::format_number;
use crate::error::{Error, Result};
use crate::parallel::with_threads;
use crate::pde::{KernelConfig, Strategy};
use crate::series::TimeSeries;

/// Dense row-major kernel matrix with the configuration that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    /// `None` for matrices read from files without a provenance line.
    pub config: Option<KernelConfig>,
}

impl GramMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values for a {rows}x{cols} matrix",
                values.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            values,
            config: None,
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            values[i * n + i] = 1.0;
        }
        Self {
            rows: n,
            cols: n,
            values,
            config: None,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Mean over entries with `i != j`.
    pub fn off_diagonal_mean(&self) -> f64 {
        let n = self.rows;
        (self.values.iter().sum::<f64>() - self.trace()) / (n * (n - 1)) as f64
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.values)
    }

    /// Largest relative asymmetry `|K_ij - K_ji| / max|K|`.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i + 1..self.cols {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst / scale
    }

    /// Smallest eigenvalue of the symmetric part.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        if !self.is_square() {
            return Err(Error::Shape("eigenvalues need a square matrix".into()));
        }
        let m = self.to_matrix();
        let sym = (&m + m.transpose()) * 0.5;
        Ok(sym.symmetric_eigenvalues().min())
    }

    /// Writes the matrix as CSV: a `# {config json}` provenance line when the
    /// configuration is known, then one comma-separated line per row.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        if let Some(cfg) = &self.config {
            let json = serde_json::to_string(cfg).expect("config serializes");
            writeln!(out, "# {json}")?;
        }
        self.write_rows(out)
    }

    /// The matrix rows alone, for callers that write their own header.
    pub fn write_rows<W: Write>(&self, mut out: W) -> Result<()> {
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(|v| format_number(*v)).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads the format produced by [`GramMatrix::write_csv`]. Comment lines
    /// are skipped; the first one is parsed as provenance when it is valid
    /// configuration JSON.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut config = None;
        let mut values = Vec::new();
        let mut cols = None;
        let mut rows = 0;
        for (k, line) in BufReader::new(reader).lines().enumerate() {
            let line = line?;
            let lineno = k as u64 + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(comment) = trimmed.strip_prefix('#') {
                if config.is_none() && rows == 0 {
                    config = serde_json::from_str::<KernelConfig>(comment.trim()).ok();
                }
                continue;
            }
            let row: Vec<f64> = trimmed
                .split(',')
                .map(|f| {
                    f64::from_str(f.trim()).map_err(|_| Error::Parse {
                        line: lineno,
                        message: format!("not a number: {:?}", f.trim()),
                    })
                })
                .collect::<Result<_>>()?;
            match cols {
                None => cols = Some(row.len()),
                Some(c) if c != row.len() => {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("expected {c} fields, found {}", row.len()),
                    })
                }
                _ => {}
            }
            values.extend(row);
            rows += 1;
        }
        let cols = cols.ok_or_else(|| Error::Input("empty matrix file".into()))?;
        let mut g = GramMatrix::new(rows, cols, values)?;
        g.config = config;
        Ok(g)
    }
}

fn check_dims(xs: &[TimeSeries], ys: &[TimeSeries]) -> Result<()> {
    let dim = xs
        .first()
        .or_else(|| ys.first())
        .map(|s| s.dim())
        .ok_or_else(|| Error::Input("empty path collection".into()))?;
    if let Some((k, s)) = xs.iter().chain(ys).enumerate().find(|(_, s)| s.dim() != dim) {
        return Err(Error::Shape(format!(
            "path {k} has dimension {}, expected {dim}",
            s.dim()
        )));
    }
    Ok(())
}

/// `K[i][j] = k(xs[i], ys[j])`, or the self-Gram of `xs` when `ys` is
/// `None` (only the upper triangle is solved, then mirrored).
///
/// Pairs are distributed over a pool of `threads` workers (`0` picks the
/// rayon default). Each entry is written once by one solve, so the result
/// does not depend on the worker count.
pub fn gram(
    xs: &[TimeSeries],
    ys: Option<&[TimeSeries]>,
    config: &KernelConfig,
    threads: usize,
) -> Result<GramMatrix> {
    check_dims(xs, ys.unwrap_or(&[]))?;
    if xs.is_empty() || ys.is_some_and(|y| y.is_empty()) {
        return Err(Error::Input("empty path collection".into()));
    }
    let (rows, cols) = (xs.len(), ys.map_or(xs.len(), |y| y.len()));
    let pairs: Vec<(usize, usize)> = match ys {
        None => (0..rows)
            .flat_map(|i| (i..cols).map(move |j| (i, j)))
            .collect(),
        Some(_) => (0..rows)
            .flat_map(|i| (0..cols).map(move |j| (i, j)))
            .collect(),
    };
    let right = ys.unwrap_or(xs);

    let entries: Vec<Result<f64>> = with_threads(threads, || {
        let strategy = if pairs.len() < rayon::current_num_threads() {
            Strategy::default()
        } else {
            Strategy::Sequential
        };
        let solver = config.solver().with_strategy(strategy);
        pairs
            .par_iter()
            .map(|&(i, j)| config.kernel_with(&solver, &xs[i], &right[j]))
            .collect()
    })?;

    let mut values = vec![0.0; rows * cols];
    for (&(i, j), entry) in pairs.iter().zip(entries) {
        let v = entry.map_err(|e| Error::Pair {
            row: i,
            col: j,
            source: Box::new(e),
        })?;
        values[i * cols + j] = v;
        if ys.is_none() {
            values[j * cols + i] = v;
        }
    }
    Ok(GramMatrix {
        rows,
        cols,
        values,
        config: Some(*config),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmdVariant {
    /// V-statistic: `mean(Kxx) + mean(Kyy) - 2 mean(Kxy)`.
    Biased,
    /// U-statistic: diagonal terms of `Kxx` and `Kyy` excluded.
    Unbiased,
}

impl FromStr for MmdVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "biased" => Ok(MmdVariant::Biased),
            "unbiased" => Ok(MmdVariant::Unbiased),
            other => Err(Error::Input(format!(
                "unknown MMD variant {other:?} (expected biased or unbiased)"
            ))),
        }
    }
}

/// Squared MMD from precomputed blocks `Kxx` (m x m), `Kyy` (n x n) and
/// `Kxy` (m x n).
pub fn mmd_squared_from_blocks(
    kxx: &GramMatrix,
    kyy: &GramMatrix,
    kxy: &GramMatrix,
    variant: MmdVariant,
) -> Result<f64> {
    let (m, n) = (kxx.rows(), kyy.rows());
    if !kxx.is_square() || !kyy.is_square() || kxy.rows() != m || kxy.cols() != n {
        return Err(Error::Shape(format!(
            "inconsistent MMD blocks: Kxx {}x{}, Kyy {}x{}, Kxy {}x{}",
            kxx.rows(),
            kxx.cols(),
            kyy.rows(),
            kyy.cols(),
            kxy.rows(),
            kxy.cols()
        )));
    }
    match variant {
        MmdVariant::Biased => {
            if m == 0 || n == 0 {
                return Err(Error::Input("MMD needs non-empty samples".into()));
            }
            Ok(kxx.mean() + kyy.mean() - 2.0 * kxy.mean())
        }
        MmdVariant::Unbiased => {
            if m < 2 || n < 2 {
                return Err(Error::Input(format!(
                    "unbiased MMD needs at least two paths per sample, got {m} and {n}"
                )));
            }
            Ok(kxx.off_diagonal_mean() + kyy.off_diagonal_mean() - 2.0 * kxy.mean())
        }
    }
}

/// Squared maximum mean discrepancy between the empirical path measures of
/// `xs` and `ys` under the signature kernel.
pub fn mmd_squared(
    xs: &[TimeSeries],
    ys: &[TimeSeries],
    config: &KernelConfig,
    variant: MmdVariant,
    threads: usize,
) -> Result<f64> {
    let min = match variant {
        MmdVariant::Biased => 1,
        MmdVariant::Unbiased => 2,
    };
    if xs.len() < min || ys.len() < min {
        return Err(Error::Input(format!(
            "{variant:?} MMD needs at least {min} paths per sample, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let kxx = gram(xs, None, config, threads)?;
    let kyy = gram(ys, None, config, threads)?;
    let kxy = gram(xs, Some(ys), config, threads)?;
    mmd_squared_from_blocks(&kxx, &kyy, &kxy, variant)
}

/// Kernel ridge regression weights: solves `(K + ridge I) w = targets` by
/// Cholesky factorization with one step of iterative refinement.
pub fn krr_fit(gram: &GramMatrix, targets: &[f64], ridge: f64) -> Result<Vec<f64>> {
    if !gram.is_square() {
        return Err(Error::Shape(format!(
            "training Gram must be square, got {}x{}",
            gram.rows(),
            gram.cols()
        )));
    }
    if targets.len() != gram.rows() {
        return Err(Error::Shape(format!(
            "{} targets for a {}x{} Gram matrix",
            targets.len(),
            gram.rows(),
            gram.cols()
        )));
    }
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::Input(format!("ridge must be >= 0, got {ridge}")));
    }
    if gram.asymmetry() > 1e-12 {
        return Err(Error::Input(format!(
            "training Gram is not symmetric (relative asymmetry {:.3e})",
            gram.asymmetry()
        )));
    }
    let n = gram.rows();
    let a = gram.to_matrix() + DMatrix::<f64>::identity(n, n) * ridge;
    let b = DVector::from_column_slice(targets);
    let chol = a.clone().cholesky().ok_or_else(|| {
        Error::Numerical(format!(
            "K + {ridge} I is not positive definite; increase the ridge"
        ))
    })?;
    let mut w = chol.solve(&b);
    let r = &b - &a * &w;
    w += chol.solve(&r);
    let residual = (&b - &a * &w).norm();
    if !(residual <= 1e-8 * b.norm()) {
        return Err(Error::Numerical(format!(
            "ridge system solved with residual {residual:.3e}; increase the ridge"
        )));
    }
    Ok(w.iter().copied().collect())
}

/// Predictions `cross_gram * weights`, where `cross_gram[i][j]` is the kernel
/// between test path `i` and training path `j`.
pub fn krr_predict(cross_gram: &GramMatrix, weights: &[f64]) -> Result<Vec<f64>> {
    if cross_gram.cols() != weights.len() {
        return Err(Error::Shape(format!(
            "{} weights for a cross Gram with {} columns",
            weights.len(),
            cross_gram.cols()
        )));
    }
    Ok((0..cross_gram.rows())
        .map(|i| {
            cross_gram
                .row(i)
                .iter()
                .zip(weights)
                .map(|(k, w)| k * w)
                .sum()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(n: usize, v: &[f64]) -> GramMatrix {
        GramMatrix::new(n, v.len() / n, v.to_vec()).unwrap()
    }

    #[test]
    fn identity_ridge_halves_targets() {
        let t = [2.0, -4.0, 6.0];
        let w = krr_fit(&GramMatrix::identity(3), &t, 1.0).unwrap();
        for (w, t) in w.iter().zip(t) {
            assert!((w - t / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn krr_rejects_indefinite_without_ridge() {
        let k = mat(2, &[1.0, 2.0, 2.0, 1.0]);
        let err = krr_fit(&k, &[1.0, 1.0], 0.0).unwrap_err();
        assert!(err.is_numerical());
        assert!(err.to_string().contains("ridge"));
    }

    #[test]
    fn krr_shape_errors() {
        let k = mat(2, &[1.0, 0.0, 0.0, 1.0]);
        assert!(matches!(krr_fit(&k, &[1.0], 0.0), Err(Error::Shape(_))));
        assert!(matches!(krr_predict(&k, &[1.0]), Err(Error::Shape(_))));
        assert!(krr_fit(&mat(1, &[1.0, 2.0]), &[1.0], 0.0).is_err());
        assert!(krr_fit(&k, &[1.0, 1.0], -1.0).is_err());
    }

    #[test]
    fn mmd_block_validation() {
        let a = GramMatrix::identity(2);
        let b = GramMatrix::identity(1);
        let ab = mat(2, &[0.0, 0.0]);
        assert!(mmd_squared_from_blocks(&a, &b, &ab, MmdVariant::Biased).is_ok());
        assert!(mmd_squared_from_blocks(&a, &b, &ab, MmdVariant::Unbiased).is_err());
        assert!(mmd_squared_from_blocks(&a, &a, &ab, MmdVariant::Biased).is_err());
    }

    #[test]
    fn csv_round_trip_keeps_provenance() {
        let mut g = mat(2, &[1.0, 0.25, 0.25, 3.0e-9]);
        g.config = Some(KernelConfig::default());
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# {\"static_kernel\":\"linear\""));
        assert_eq!(GramMatrix::read_csv(buf.as_slice()).unwrap(), g);
    }

    #[test]
    fn csv_ragged_row() {
        let err = GramMatrix::read_csv("1,2\n3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn min_eigenvalue_of_diagonal() {
        let g = mat(2, &[3.0, 0.0, 0.0, -1.0]);
        assert!((g.min_eigenvalue().unwrap() + 1.0).abs() < 1e-14);
    }
}
