use num_complex::Complex64;

use crate::holonomy::SigmaTable;
use crate::numkernel::ComplexMatrix;

/// The η = 3, n = (2, 2, 2) table whose diagonal blocks are all rank
/// deficient while every strictly off-diagonal `γ` of order 2 and 3
/// vanishes: with `N = [[0,0],[1,0]]`, `σ^{ll} = N†`,
/// `σ^{12} = σ^{23} = σ^{31} = N` and `σ^{13} = σ^{21} = σ^{32} = 0`
/// (indices one-based in this description).
pub fn zero_gamma_table() -> SigmaTable {
    let zero = ComplexMatrix::zeros(2, 2);
    let mut n = zero.clone();
    n[(1, 0)] = Complex64::new(1.0, 0.0);
    let nd = n.adjoint();
    let blocks = vec![
        vec![nd.clone(), n.clone(), zero.clone()],
        vec![zero.clone(), nd.clone(), n.clone()],
        vec![n, zero, nd],
    ];
    SigmaTable::from_blocks(vec![2, 2, 2], blocks).expect("blocks have consistent shapes")
}
