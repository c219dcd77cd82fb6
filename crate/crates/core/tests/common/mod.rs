//! Independent su(n) matrix model used as an oracle: root vectors are scaled
//! elementary matrices, the Cartan elements are explicit diagonal matrices,
//! and the Killing form is `B(X, Y) = 2n tr(XY)`. Nothing here touches the
//! abstract root-system code paths.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

pub struct SuMatrixModel {
    pub n: usize,
}

impl SuMatrixModel {
    pub fn new(n: usize) -> Self {
        SuMatrixModel { n }
    }

    fn e(&self, j: usize, k: usize) -> DMatrix<C64> {
        let mut m = DMatrix::from_element(self.n, self.n, C64::new(0.0, 0.0));
        m[(j, k)] = C64::new(1.0, 0.0);
        m
    }

    /// `E_{e_j - e_k} = e_jk / sqrt(2n)` (0-based indices).
    pub fn root_vector(&self, j: usize, k: usize) -> DMatrix<C64> {
        self.e(j, k) / C64::new((2.0 * self.n as f64).sqrt(), 0.0)
    }

    /// `H_{e_j - e_k} = (e_jj - e_kk) / (2n)`.
    pub fn cartan_vector(&self, j: usize, k: usize) -> DMatrix<C64> {
        (self.e(j, j) - self.e(k, k)) / C64::new(2.0 * self.n as f64, 0.0)
    }

    /// Killing form `B(X, Y) = 2n tr(XY)`.
    pub fn killing(&self, x: &DMatrix<C64>, y: &DMatrix<C64>) -> C64 {
        (x * y).trace() * C64::new(2.0 * self.n as f64, 0.0)
    }

    /// Pairing `(e_a - e_b, e_c - e_d) = B(t_., t_.)`, by evaluating the
    /// first root on the Cartan matrix of the second.
    pub fn pairing(&self, (a, b): (usize, usize), (c, d): (usize, usize)) -> f64 {
        let h = self.cartan_vector(c, d);
        // (e_a - e_b)(H) = H_aa - H_bb for diagonal H.
        (h[(a, a)] - h[(b, b)]).re
    }

    pub fn bracket(&self, x: &DMatrix<C64>, y: &DMatrix<C64>) -> DMatrix<C64> {
        x * y - y * x
    }

    /// The diagonal `A_j = diag(0...0, i, i, -2i/(n-2j), ...)` with `2(j-1)`
    /// leading zeros (1-based `j`), spanning `b_d` together with its peers.
    pub fn a_vector(&self, j: usize) -> DMatrix<C64> {
        let n = self.n;
        assert!(2 * j <= n);
        let tail = n - 2 * j;
        let mut m = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
        m[(2 * j - 2, 2 * j - 2)] = C64::new(0.0, 1.0);
        m[(2 * j - 1, 2 * j - 1)] = C64::new(0.0, 1.0);
        for p in 2 * j..n {
            m[(p, p)] = C64::new(0.0, -2.0 / tail as f64);
        }
        m
    }

    /// All roots as ordered index pairs `(a, b)`, meaning `e_a - e_b`.
    pub fn roots(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.n {
            for b in 0..self.n {
                if a != b {
                    out.push((a, b));
                }
            }
        }
        out
    }
}

/// Reference layer data of the su(n) decomposition in index-pair labels,
/// built with the strongly orthogonal roots `e_1 - e_2, e_3 - e_4, ...`: `R_j^+ = {a_j} + {e_{2j-1} - e_p} + {e_q - e_2j}`
/// for `p, q >= 2j+1`.
pub fn su_n_reference_layers(n: usize) -> Vec<Vec<(usize, usize)>> {
    let d = if n % 2 == 1 { (n - 1) / 2 } else { n / 2 };
    let mut layers = Vec::new();
    for j in 1..=d {
        let mut r_plus = vec![(2 * j - 2, 2 * j - 1)];
        for p in 2 * j..n {
            r_plus.push((2 * j - 2, p));
            r_plus.push((p, 2 * j - 1));
        }
        layers.push(r_plus);
    }
    layers
}
