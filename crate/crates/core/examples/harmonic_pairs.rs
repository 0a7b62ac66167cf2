//! Harmonic Ritz pairs of a random complex matrix, with the check that each
//! harmonic residual is orthogonal to `A V_m`.
//!
//! cargo run --example harmonic_pairs -- 8 4

use staglab::gmres::GmresState;
use staglab::harmonic::harmonic_pairs;
use staglab::instances::random_instance;
use staglab::numeric::dot;

fn main() -> staglab::Result<()> {
    let mut args = std::env::args().skip(1);
    let n = args.next().and_then(|s| s.parse().ok()).unwrap_or(8);
    let m = args.next().and_then(|s| s.parse().ok()).unwrap_or(4);

    let inst = random_instance(n, 11)?;
    let mut state = GmresState::new(inst.operator(), &inst.rhs)?;
    state.run(m, 0.0)?;
    let av = state.explicit_av(m)?;
    for p in harmonic_pairs(state.arnoldi(), m)? {
        let Some(sigma) = p.sigma() else {
            println!("sigma = inf");
            continue;
        };
        let h = p.harmonic_residual.as_ref().expect("finite pair");
        let worst = (0..m).map(|j| dot(av.col(j), h).norm()).fold(0.0, f64::max);
        println!("sigma = {sigma:>28.10}  |e_m^* u| = {:.3e}  max |(A V_m)^* res| = {worst:.1e}", p.u_last.norm());
    }
    Ok(())
}
