//! Limit point / limit circle verdicts for the built-in families.

use hamburger::jacobi::{self, ClassifyPolicy, Family, LOGNORMAL_MIN_BITS};
use hamburger::{JacobiMatrix, PrecisionConfig};

fn main() -> hamburger::Result<()> {
    let hermite = JacobiMatrix::from_family(Family::HermiteLike, PrecisionConfig::default());
    let v = jacobi::classify(&hermite, &ClassifyPolicy::default())?;
    print_verdict("hermite_like", &v);

    let cfg = PrecisionConfig::bigfloat(LOGNORMAL_MIN_BITS)?;
    let lognormal = JacobiMatrix::family_truncation(Family::Lognormal, 60, cfg)?;
    let v = jacobi::classify(&lognormal, &ClassifyPolicy::default().with_n_max(60))?;
    print_verdict("lognormal", &v);
    Ok(())
}

fn print_verdict(name: &str, v: &hamburger::DeterminacyVerdict) {
    println!("{name}: {}", v.verdict.name());
    for (n, r) in v.checkpoints.iter().zip(&v.radii) {
        println!("  r_{n} = {:.12e}", r.to_f64());
    }
}
