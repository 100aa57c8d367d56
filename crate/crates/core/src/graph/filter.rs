use crate::autodiff::Matrix;
use crate::error::{Error, Result};
use crate::graph::pairwise::BinaryAdjacency;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FilterProvenance {
    NormalizedAdjacency,
    LearnedDdgf,
}

/// Propagation matrix applied before each layer's weights.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphFilter {
    pub matrix: Matrix,
    pub provenance: FilterProvenance,
}

impl GraphFilter {
    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: Matrix::identity(n),
            provenance: FilterProvenance::NormalizedAdjacency,
        }
    }
}

/// `D̃^{-1/2} (A + I) D̃^{-1/2}` with `D̃_ii = 1 + Σ_j A_ij`.
///
/// Each entry is `Ã_ij / sqrt(D̃_ii · D̃_jj)`; the product under the root is
/// commutative so the result is exactly symmetric.
pub fn normalize(adj: &BinaryAdjacency) -> GraphFilter {
    let n = adj.n();
    let degree: Vec<f64> = (0..n).map(|i| 1.0 + adj.entries.row(i).iter().sum::<f64>()).collect();
    let mut matrix = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let a = if i == j { 1.0 } else { adj.entries[(i, j)] };
            if a != 0.0 {
                matrix[(i, j)] = a / (degree[i] * degree[j]).sqrt();
            }
        }
    }
    GraphFilter {
        matrix,
        provenance: FilterProvenance::NormalizedAdjacency,
    }
}

/// `I − D^{-1/2} A D^{-1/2}`; isolated vertices contribute a zero scaling, so `L_ii = 1`.
pub fn normalized_laplacian(adj: &BinaryAdjacency) -> Matrix {
    let n = adj.n();
    let degree: Vec<f64> = (0..n).map(|i| adj.entries.row(i).iter().sum()).collect();
    let mut l = Matrix::identity(n);
    for i in 0..n {
        for j in 0..n {
            let a = adj.entries[(i, j)];
            if a != 0.0 && degree[i] > 0.0 && degree[j] > 0.0 {
                l[(i, j)] -= a / (degree[i] * degree[j]).sqrt();
            }
        }
    }
    l
}

/// `Σ_k θ_k L^k` with coefficients `θ_0..θ_K`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialFilter {
    pub coefficients: Vec<f64>,
}

impl PolynomialFilter {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::Validation("polynomial filter needs at least θ_0".into()));
        }
        Ok(Self { coefficients })
    }

    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Evaluates the filter on `x` by repeated multiplication with `l`.
    pub fn apply(&self, l: &Matrix, x: &[f64]) -> Result<Vec<f64>> {
        if !l.is_square() || l.rows() != x.len() {
            return Err(Error::dim("polynomial_filter_apply", l.shape(), (x.len(), 1)));
        }
        let mut power = x.to_vec();
        let mut out: Vec<f64> = x.iter().map(|v| self.coefficients[0] * v).collect();
        for &theta in &self.coefficients[1..] {
            power = (0..l.rows())
                .map(|i| l.row(i).iter().zip(&power).map(|(a, b)| a * b).sum())
                .collect();
            for (o, p) in out.iter_mut().zip(&power) {
                *o += theta * p;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_graph_normalizes_to_identity() {
        let adj = BinaryAdjacency::from_edges(4, &[]);
        assert_eq!(normalize(&adj).matrix, Matrix::identity(4));
        assert_eq!(normalized_laplacian(&adj), Matrix::identity(4));
    }

    #[test]
    fn single_edge() {
        let adj = BinaryAdjacency::from_edges(2, &[(0, 1)]);
        assert_eq!(normalize(&adj).matrix, Matrix::filled(2, 2, 0.5));
        assert_eq!(
            normalized_laplacian(&adj),
            Matrix::from_rows(&[[1.0, -1.0], [-1.0, 1.0]])
        );
    }

    #[test]
    fn order_zero_is_scaled_identity() {
        let adj = BinaryAdjacency::from_edges(3, &[(0, 1), (1, 2)]);
        let l = normalized_laplacian(&adj);
        let f = PolynomialFilter::new(vec![1.0]).unwrap();
        let x = [0.3, -2.0, 5.0];
        assert_eq!(f.apply(&l, &x).unwrap(), x.to_vec());
        assert!(f.apply(&l, &[1.0]).is_err());
    }

    #[test]
    fn path_graph_first_order_support() {
        let adj = BinaryAdjacency::from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        let l = normalized_laplacian(&adj);
        let f = PolynomialFilter::new(vec![0.5, 2.0]).unwrap();
        let y = f.apply(&l, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(y[0] != 0.0 && y[1] != 0.0);
        assert_eq!(y[2], 0.0);
        assert_eq!(y[3], 0.0);
    }
}
