//! The residual gap `||r_{m-1}||^2 - ||r_m||^2` against
//! `K = <A v_m, r_{m-1}>` and the last entry of `y`. On complex data the
//! product needs `conj(e_m^* y)`; the unconjugated form is off.
//!
//! cargo run --example gap_identity

use staglab::diagnostics::{gap_identity, residual_difference_identity, Thresholds};
use staglab::gmres::GmresState;
use staglab::instances::random_instance;

fn main() -> staglab::Result<()> {
    let inst = random_instance(10, 7)?;
    let t = Thresholds::default();
    let mut state = GmresState::new(inst.operator(), &inst.rhs)?;
    state.run(6, 0.0)?;
    println!(" m        gap     |K conj(e_m*y) - gap|  |K e_m*y - gap|  residual difference");
    for m in 1..=6 {
        let g = gap_identity(&state, m, &t)?;
        let rd = residual_difference_identity(&state, m, &t)?;
        println!(
            "{m:2}  {:10.6}  {:>22.1e}  {:>15.1e}  {rd:>19.1e}",
            g.gap, g.error, g.unconjugated_error
        );
    }
    Ok(())
}
