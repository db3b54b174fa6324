//! Cross-checks the label tables and one noisy round against full
//! density-matrix simulation.
use qpa::dense_oracle::oracle_one_round;
use qpa::recurrence::one_round;
use qpa::verify::{run_verification, ProtocolTables};
use qpa::{FlagMode, NoiseModel, Placement, SubensembleState};

fn main() -> qpa::Result<()> {
    let report = run_verification(&ProtocolTables::shipped());
    print!("{report}");

    let state = SubensembleState::werner(0.8, FlagMode::Random)?;
    let noise = NoiseModel::from_one_qubit_depolarizing(0.95)?;
    for placement in [Placement::BeforeRotation, Placement::BeforeBcnot] {
        let (engine, keep) = one_round(&state, &noise, placement)?;
        let oracle = oracle_one_round(&state, &noise, placement)?;
        println!(
            "{placement:?}: keep {keep:.12} vs {:.12}, max coefficient gap {:.1e}, Bell coherence {:.1e}",
            oracle.keep_probability,
            engine.max_abs_diff(&oracle.state),
            oracle.max_off_diagonal
        );
    }
    Ok(())
}
