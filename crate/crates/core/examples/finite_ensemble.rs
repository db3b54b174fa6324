//! Monte Carlo ensemble against the exact recurrence, then a sacrificial
//! fidelity check on the survivors.
use qpa::monte_carlo::{init_ensemble, DEFAULT_CHUNKS};
use qpa::recurrence::{iterate, werner_bell, StopRule};
use qpa::{FlagMode, NoiseModel, Placement, SubensembleState};

fn main() -> qpa::Result<()> {
    let noise = NoiseModel::fig1();
    let rounds = 8;
    let exact = iterate(
        &SubensembleState::werner(0.85, FlagMode::Fixed)?,
        &noise,
        Placement::BeforeRotation,
        StopRule::rounds(rounds),
    )?;
    let mut ensemble = init_ensemble(werner_bell(0.85), 1_000_000, FlagMode::Fixed, 1, DEFAULT_CHUNKS)?;
    let mc = ensemble.run_protocol(&noise, Placement::BeforeRotation, rounds);

    println!(
        "{:>5} {:>9} {:>10} {:>10} {:>7}",
        "round", "survivors", "F (mc)", "F (exact)", "z"
    );
    for (row, rec) in mc.rows.iter().zip(&exact.records) {
        let z = (row.fidelity - rec.fidelity) / (rec.fidelity * (1.0 - rec.fidelity) / row.survivors as f64).sqrt();
        println!(
            "{:>5} {:>9} {:>10.6} {:>10.6} {:>7.2}",
            row.round, row.survivors, row.fidelity, rec.fidelity, z
        );
    }

    let check = ensemble.check_minimum_fidelity(0.2, 0.95)?;
    println!(
        "\nsacrificed {} pairs: estimate {:.4}, 99% interval [{:.4}, {:.4}], F > 0.95 {}",
        check.sacrificed,
        check.estimate,
        check.interval[0],
        check.interval[1],
        if check.passed { "confirmed" } else { "not confirmed" }
    );
    Ok(())
}
