//! Decay rates of F_max − F_n and 1 − F_cond_n, and why the noiseless case has none.
use qpa::recurrence::{convergence_exponents, iterate, ExponentSettings, StopRule};
use qpa::{FlagMode, NoiseModel, Placement, SubensembleState};

fn main() -> qpa::Result<()> {
    let initial = SubensembleState::werner(0.85, FlagMode::Fixed)?;
    let t = iterate(
        &initial,
        &NoiseModel::fig1(),
        Placement::BeforeRotation,
        StopRule::rounds(60),
    )?;
    let fit = convergence_exponents(&t, &ExponentSettings::default())?;
    for (name, s) in [("F", &fit.fidelity), ("F_cond", &fit.conditional)] {
        println!(
            "{name:<7} rate {:.4} per round over rounds {}..={}, slope drift {:.4}, rms {:.2e}",
            s.rate, s.first_round, s.last_round, s.slope_drift, s.residual_rms
        );
    }
    println!("relative difference {:.4}", fit.relative_rate_difference());

    let clean = SubensembleState::werner(0.99, FlagMode::Fixed)?;
    let t = iterate(
        &clean,
        &NoiseModel::identity(),
        Placement::BeforeRotation,
        StopRule::rounds(30),
    )?;
    let gaps: Vec<String> = t
        .records
        .iter()
        .take(8)
        .map(|r| format!("{:.1e}", 1.0 - r.fidelity))
        .collect();
    println!("\nnoiseless 1 - F_n: {}", gaps.join(" "));
    match convergence_exponents(&t, &ExponentSettings::default()) {
        Ok(fit) => println!(
            "noiseless fit drift {:.2} (not a single exponential)",
            fit.fidelity.slope_drift
        ),
        Err(e) => println!("noiseless fit: {e}"),
    }
    Ok(())
}
