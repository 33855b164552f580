//! Jacobi matrix to moments and back.

use hamburger::moments;
use hamburger::{JacobiMatrix, PrecisionConfig};
use rug::Rational;

fn main() -> hamburger::Result<()> {
    let cfg = PrecisionConfig::bigfloat(256)?;
    let q = vec![Rational::from((1, 2)), Rational::from(-1), Rational::new(), Rational::from((3, 4))];
    let b = vec![Rational::from(2), Rational::from((1, 3)), Rational::from((5, 2))];
    let j = JacobiMatrix::new(q, b, cfg)?;

    let s = moments::jacobi_to_moments(&j, 7)?;
    println!("moments: {:?}", s.values().iter().map(|x| x.to_f64()).collect::<Vec<_>>());

    let back = moments::moments_to_jacobi(&s, 4)?;
    for k in 0..4 {
        println!("q_{} = {:.15}", k + 1, back.q()[k].to_f64());
    }
    for k in 0..3 {
        println!("b_{} = {:.15}", k + 1, back.b()[k].to_f64());
    }
    Ok(())
}
