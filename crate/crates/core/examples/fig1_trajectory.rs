//! Exact trajectory under 97% uniform noise from Werner 0.85 pairs: the
//! fidelity saturates below one while the flag-conditioned fidelity goes to one.
use qpa::recurrence::{iterate, StopRule};
use qpa::{FlagMode, NoiseModel, Placement, SubensembleState};

fn main() -> qpa::Result<()> {
    let initial = SubensembleState::werner(0.85, FlagMode::Fixed)?;
    let t = iterate(
        &initial,
        &NoiseModel::fig1(),
        Placement::BeforeRotation,
        StopRule::default(),
    )?;
    println!("{:>5} {:>12} {:>12} {:>8}", "round", "F", "F_cond", "keep");
    for r in t.records.iter().take(16) {
        println!(
            "{:>5} {:>12.9} {:>12.9} {:>8.5}",
            r.round, r.fidelity, r.conditional_fidelity, r.keep_probability
        );
    }
    println!(
        "fixpoint after {} rounds: F_max = {:.9}, F_cond = {:.12}",
        t.rounds(),
        t.f_max(),
        t.f_cond_limit()
    );

    let flags = t.final_record().state.flag_marginal();
    println!("flag distribution at the fixpoint: {flags:.6?}");
    Ok(())
}
