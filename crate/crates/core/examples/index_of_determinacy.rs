//! Index of determinacy of nu_n = (1+t^2)^{-n} dmu / C for a lognormal proxy,
//! and of a Gaussian-damped measure.

use hamburger::determinacy_index::{self, IndexReport};
use hamburger::{bases, measures, Measure, PrecisionConfig};

fn main() -> hamburger::Result<()> {
    let mu = measures::lognormal_proxy(40, determinacy_index::proxy_precision())?;
    let policy = determinacy_index::default_policy();
    for n in 0..=3 {
        let (nu, _) = measures::power_reweight(&mu, -n)?;
        let report = determinacy_index::index_of_determinacy(&nu, 5, &policy)?;
        print_report(&format!("nu_{n}"), &report);
    }

    let gaussian = Measure::gaussian(PrecisionConfig::default());
    let report =
        determinacy_index::infinite_index_probe(&gaussian, &bases::alpha_threshold(), 3, &policy.with_n_max(32))?;
    print_report("damped gaussian", &report);
    Ok(())
}

fn print_report(name: &str, r: &IndexReport) {
    println!("{name}: {:?}{}", r.index, if r.truncated { " (truncated)" } else { "" });
    for l in &r.per_level {
        println!(
            "  level {}: {} ({} coefficients at {} bits)",
            l.level,
            l.verdict.verdict.name(),
            l.coefficients,
            l.bits
        );
    }
}
