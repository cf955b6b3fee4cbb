use super::Sketch;
use crate::error::{Error, Result};
use crate::matio::DenseMatrix;

/// Running `Π A` for a matrix `A` that arrives as a turnstile stream of
/// additive updates `A[i][j] += v`.
#[derive(Clone, Debug)]
pub struct SketchState {
    sketch: Sketch,
    sa: DenseMatrix,
}

impl SketchState {
    /// Zero state for an `n x d` stream, `n` being the sketch's column count.
    pub fn new(sketch: Sketch, d: usize) -> Self {
        let sa = DenseMatrix::zeros(sketch.rows(), d);
        SketchState { sketch, sa }
    }

    pub fn sketch(&self) -> &Sketch {
        &self.sketch
    }

    pub fn d(&self) -> usize {
        self.sa.cols()
    }

    /// Current `Π A`.
    pub fn sa(&self) -> &DenseMatrix {
        &self.sa
    }

    pub fn into_sa(self) -> DenseMatrix {
        self.sa
    }

    /// Applies `A[i][j] += v`: adds `v` times column `i` of `Π` to column `j`
    /// of the state, `s` multiply-adds in total.
    pub fn update(&mut self, i: usize, j: usize, v: f64) -> Result<()> {
        if i >= self.sketch.cols() || j >= self.d() {
            return Err(Error::dim(format!(
                "update ({i}, {j}) outside a {}x{} stream",
                self.sketch.cols(),
                self.d()
            )));
        }
        if !v.is_finite() {
            return Err(Error::param("update value must be finite"));
        }
        for (r, w) in self.sketch.column_nonzeros(i) {
            self.sa[(r, j)] = w.mul_add(v, self.sa[(r, j)]);
        }
        Ok(())
    }
}
