//! Hankel determinants of a moment sequence and the positivity test.

use hamburger::moments::{self, MomentSequence};
use hamburger::PrecisionConfig;

fn main() -> hamburger::Result<()> {
    // Moments of e^{-t^2}/sqrt(pi): s_{2k} = (2k-1)!! / 2^k.
    let gauss = MomentSequence::from_strs(
        &["1", "0", "1/2", "0", "3/4", "0", "15/8", "0", "105/16", "0", "945/32"],
        PrecisionConfig::rational(),
    )?;
    for (k, d) in moments::hankel_determinants(&gauss, 5)?.iter().enumerate() {
        println!("D_{k} = {d}");
    }
    println!("positive: {}", moments::validate_positive(&gauss, 5)?);

    // Two atoms at -1 and 1: D_2 vanishes.
    let two_atoms = MomentSequence::from_strs(&["1", "0", "1", "0", "1"], PrecisionConfig::rational())?;
    println!("two atoms positive up to k=2: {}", moments::validate_positive(&two_atoms, 2)?);
    Ok(())
}
