//! Local densities σ_p and σ_∞, the building blocks S(p^t), and the main
//! term ρ(n, Q).

pub mod counting;
pub mod density;
pub mod formula;
pub mod gauss;
pub mod jordan;

pub use counting::{local_count, sigma_p, LocalCounter};
pub use density::{rho, sigma_infinity, ArchimedeanNormalization, DensityContext, DensityProfile};
pub use formula::{s_pt_formula, sigma_p_formula, LocalTerm};
pub use gauss::{gauss_sum, gauss_sum_direct, ramanujan_sum, GaussSumValue};
pub use jordan::{jordan_decompose, JordanBlock, JordanBlock2, JordanBlockOdd};
