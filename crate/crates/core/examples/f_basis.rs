//! The f-basis of a lognormal quadrature proxy and its Gram matrix.

use hamburger::bases;
use hamburger::determinacy_index;
use hamburger::measures;

fn main() -> hamburger::Result<()> {
    let mu = measures::lognormal_proxy(40, determinacy_index::proxy_precision())?;
    let (j_hat, c) = bases::f_basis_jacobi(&mu, 6)?;
    println!("C = int (1+t^2)^-1 dmu = {:.15}", c.to_f64());
    for k in 0..6 {
        println!("q_hat_{} = {:.12}", k + 1, j_hat.q()[k].to_f64());
    }

    let gram = bases::f_basis_gram(&mu, 15)?;
    println!("max |Re G - I| = {:.3e}", gram.identity_defect());
    println!("max |Im G|     = {:.3e}", gram.max_imaginary());
    Ok(())
}
