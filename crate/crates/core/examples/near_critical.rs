use cqm_core::closed_form;
use cqm_core::fock::{self, CutoffPolicy};
use cqm_core::{lambda_for_target_critical, BosonState, Params};

fn main() -> cqm_core::Result<()> {
    // move the critical coupling to g_c = 0.1 and sit just below it
    let lambda = lambda_for_target_critical(0.1, 1.0)?;
    let params = Params::new(1.0, 1000.0, 0.099, lambda)?;
    let probe = BosonState::zero_plus_i_one();

    let t = closed_form::optimal_time(&params, 1)?;
    let closed = closed_form::qfi_g_any(&probe, &params, t)?.value;
    let exact = fock::generator_qfi_converged(&params, t, &probe, &CutoffPolicy::default())?;
    println!(
        "F_g(tau_1): closed {closed:.6e}, oracle {:.6e} at n_cut {}",
        exact.values, exact.n_cut
    );
    println!("I_g(tau_1) = {:.6e}", closed_form::inverted_variance_peak(&params, 1)?);
    Ok(())
}
