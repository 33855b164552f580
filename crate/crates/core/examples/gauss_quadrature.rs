//! Gauss quadrature from a truncated Jacobi matrix.

use hamburger::jacobi::{self, Family};
use hamburger::moments;
use hamburger::{JacobiMatrix, PrecisionConfig};

fn main() -> hamburger::Result<()> {
    let j = JacobiMatrix::family_truncation(Family::HermiteLike, 5, PrecisionConfig::default())?;
    let mu = jacobi::truncation_spectrum(&j, 5)?;
    let (nodes, weights) = mu.atoms()?;
    for (t, w) in nodes.iter().zip(&weights) {
        println!("t = {:+.15}  w = {:.15}", t.to_f64(), w.to_f64());
    }

    // Moments agree with the matrix up to order 2N-1 = 9.
    let exact = moments::jacobi_to_moments(&j, 10)?;
    let quad = mu.moments(10)?;
    for k in 0..=10 {
        println!("s_{k}: matrix {:.6}  quadrature {:.6}", exact.values()[k].to_f64(), quad.values()[k].to_f64());
    }
    Ok(())
}
