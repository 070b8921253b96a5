//! Cell-by-cell sweeps over the refined grid.
//!
//! Every interior cell `(p, q)` is written exactly once from its three
//! already-final neighbours `(p-1, q-1)`, `(p, q-1)` and `(p-1, q)`. The
//! row-major sweep and the antidiagonal wavefront therefore evaluate the
//! same expression on the same operands and agree bitwise.

use rayon::prelude::*;

use super::Scheme;

/// Refined grid geometry. `coarse` holds the data-cell increments already
/// divided by `4^lambda`, the increment of every refined sub-cell.
pub(crate) struct Refined<'a> {
    pub(crate) coarse: &'a [f64],
    pub(crate) coarse_cols: usize,
    pub(crate) shift: u32,
    pub(crate) rows: usize,
    pub(crate) cols: usize,
    pub(crate) scheme: Scheme,
}

/// Minimum number of cells handed to one rayon task along a diagonal.
const MIN_CHUNK: usize = 64;

impl Refined<'_> {
    #[inline(always)]
    fn increment(&self, p: usize, q: usize) -> f64 {
        self.coarse[((p - 1) >> self.shift) * self.coarse_cols + ((q - 1) >> self.shift)]
    }

    /// New value at `(p, q)` from `k00 = (p-1, q-1)`, `k10 = (p, q-1)` and
    /// `k01 = (p-1, q)`.
    #[inline(always)]
    fn cell(&self, p: usize, q: usize, k00: f64, k10: f64, k01: f64) -> f64 {
        let z = self.increment(p, q);
        match self.scheme {
            Scheme::Explicit => (k10 + k01) - k00 + 0.5 * z * (k10 + k01),
            Scheme::Implicit => {
                ((k10 + k01) - k00 + 0.25 * z * (k00 + (k10 + k01))) / (1.0 - 0.25 * z)
            }
        }
    }

    /// Row-major sweep materializing the whole `(rows+1) x (cols+1)` grid.
    pub(crate) fn sweep_full(&self) -> Vec<f64> {
        let w = self.cols + 1;
        let mut g = vec![1.0; (self.rows + 1) * w];
        for p in 1..=self.rows {
            let (done, rest) = g.split_at_mut(p * w);
            let above = &done[(p - 1) * w..];
            let row = &mut rest[..w];
            for q in 1..=self.cols {
                row[q] = self.cell(p, q, above[q - 1], row[q - 1], above[q]);
            }
        }
        g
    }

    /// Row-major sweep keeping two rows; returns the far corner.
    pub(crate) fn sweep_final(&self) -> f64 {
        let w = self.cols + 1;
        let mut above = vec![1.0; w];
        let mut row = vec![1.0; w];
        for p in 1..=self.rows {
            row[0] = 1.0;
            for q in 1..=self.cols {
                row[q] = self.cell(p, q, above[q - 1], row[q - 1], above[q]);
            }
            std::mem::swap(&mut above, &mut row);
        }
        above[self.cols]
    }

    /// Antidiagonal wavefront on the current rayon pool. When `full` is
    /// given, each finished diagonal is scattered into it.
    ///
    /// Diagonal buffers are indexed by the row `p`; diagonal `d` holds the
    /// cells `(p, d - p)`.
    fn wavefront(&self, mut full: Option<&mut [f64]>) -> f64 {
        let (m, n) = (self.rows, self.cols);
        let w = n + 1;
        let mut prev2 = vec![1.0; m + 1];
        let mut prev1 = vec![1.0; m + 1];
        let mut cur = vec![1.0; m + 1];
        for d in 2..=m + n {
            let lo = 1.max(d.saturating_sub(n));
            let hi = (d - 1).min(m);
            if d <= n {
                cur[0] = 1.0;
            }
            if d <= m {
                cur[d] = 1.0;
            }
            if lo <= hi {
                let (p1, p2) = (&prev1, &prev2);
                cur[lo..=hi]
                    .par_iter_mut()
                    .with_min_len(MIN_CHUNK)
                    .enumerate()
                    .for_each(|(k, out)| {
                        let p = lo + k;
                        *out = self.cell(p, d - p, p2[p - 1], p1[p], p1[p - 1]);
                    });
                if let Some(g) = full.as_deref_mut() {
                    for p in lo..=hi {
                        g[p * w + (d - p)] = cur[p];
                    }
                }
            }
            std::mem::swap(&mut prev2, &mut prev1);
            std::mem::swap(&mut prev1, &mut cur);
        }
        // The last diagonal holds only the far corner.
        prev1[m]
    }

    pub(crate) fn wavefront_full(&self) -> Vec<f64> {
        let mut g = vec![1.0; (self.rows + 1) * (self.cols + 1)];
        self.wavefront(Some(&mut g));
        g
    }

    pub(crate) fn wavefront_final(&self) -> f64 {
        self.wavefront(None)
    }
}
