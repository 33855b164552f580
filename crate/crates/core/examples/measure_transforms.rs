//! Gaussian damping and (1+t^2)^n reweighting, then recurrence coefficients.

use hamburger::measures::{self, Measure};
use hamburger::PrecisionConfig;
use rug::Rational;

fn main() -> hamburger::Result<()> {
    let mu = Measure::gaussian(PrecisionConfig::default());

    // e^{-t^2} damped by e^{-2 (1/2) t^2} has variance 1/4: b_k = sqrt(k)/2.
    let damped = measures::gauss_damp(&mu, &Rational::from((1, 2)))?;
    let j = measures::measure_to_jacobi(&damped, 6)?;
    for (k, b) in j.b().iter().enumerate() {
        println!("damped b_{} = {:.15}  sqrt(k)/2 = {:.15}", k + 1, b.to_f64(), ((k + 1) as f64).sqrt() / 2.0);
    }

    let (lifted, c) = measures::power_reweight(&mu, 1)?;
    println!("C_1 = int (1+t^2) dmu = {:.15}", c.to_f64());
    let s = lifted.moments(4)?;
    println!("moments of mu_1: {:?}", s.values().iter().map(|x| x.to_f64()).collect::<Vec<_>>());

    let atoms = Measure::atomic(
        vec![Rational::from(-2), Rational::new(), Rational::from(3)],
        vec![Rational::from(1), Rational::from(2), Rational::from(1)],
        PrecisionConfig::rational(),
    )?;
    let (nu, c) = measures::power_reweight(&atoms, -1)?;
    println!("exact atomic reweight: C = {c}, weights = {:?}", nu.atoms()?.1);
    Ok(())
}
