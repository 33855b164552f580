//! Smallest singular value of the columns (T - i) T^{k-1} delta.

use hamburger::bases;
use hamburger::jacobi::Family;
use hamburger::{JacobiMatrix, PrecisionConfig};
use rug::Rational;

fn main() -> hamburger::Result<()> {
    let j = JacobiMatrix::from_family(Family::HermiteLike, PrecisionConfig::default());
    let delta = [Rational::from(1)];
    for n in [1, 2, 4, 8] {
        let s = bases::representation_diagnostic(&j, &delta, 40, n)?;
        println!("n = {n}: sigma_min = {:.6e}", s.to_f64());
    }
    Ok(())
}
