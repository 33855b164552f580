//! Jacobi matrix of the Stone vector exp(-alpha J^2) g, by two routes.

use hamburger::bases;
use hamburger::jacobi::Family;
use hamburger::{JacobiMatrix, Measure, PrecisionConfig};
use rug::Rational;

fn main() -> hamburger::Result<()> {
    let cfg = PrecisionConfig::default();
    let alpha = bases::alpha_threshold();

    let (by_measure, _) = bases::stone_jacobi_measure_route(&Measure::gaussian(cfg), &alpha, 8)?;

    let j = JacobiMatrix::from_family(Family::HermiteLike, cfg);
    let (by_operator, basis, _) = bases::stone_jacobi_operator_route(&j, &alpha, &[Rational::from(1)], 60, 8)?;

    for k in 0..7 {
        println!(
            "b_{}: measure {:.15}  operator {:.15}",
            k + 1,
            by_measure.b()[k].to_f64(),
            by_operator.b()[k].to_f64()
        );
    }
    println!("basis orthonormality defect: {:.3e}", basis.orthonormality_defect());

    // Below the threshold the limit-point guarantee is not available.
    let (_, warnings) = bases::stone_jacobi_measure_route(&Measure::gaussian(cfg), &Rational::from((1, 4)), 4)?;
    for w in warnings {
        println!("warning: {w}");
    }
    Ok(())
}
