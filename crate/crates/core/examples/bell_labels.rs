//! Bell-label algebra: Pauli shifts, the bilateral rotation, BCNOT and the twirl.
use qpa::bell_algebra::{
    apply_two_sided_pauli, bcnot_map, measurement_coincides, rotation_step3, twirl_dense, DenseTwoQubitState,
};
use qpa::linalg::{bell_vector, projector};
use qpa::{BellLabel, Pauli};

fn main() -> qpa::Result<()> {
    println!("two-sided Pauli errors on phi+:");
    for mu in Pauli::ALL {
        let row: Vec<&str> = Pauli::ALL
            .iter()
            .map(|&nu| apply_two_sided_pauli(BellLabel::PHI_PLUS, mu, nu).name())
            .collect();
        println!("  {mu:?} x (I X Y Z) -> {}", row.join(" "));
    }

    println!("\nbilateral rotation:");
    for b in BellLabel::ALL {
        println!("  {b} -> {}", rotation_step3(b));
    }

    println!("\nBCNOT (source, target) -> kept source, or discarded:");
    for s in BellLabel::ALL {
        let cells: Vec<String> = BellLabel::ALL
            .iter()
            .map(|&t| match bcnot_map(s, t) {
                (out, tgt) if measurement_coincides(tgt) => format!("{out:>5}"),
                _ => "    -".to_string(),
            })
            .collect();
        println!("  {s:>5} | {}", cells.join(" "));
    }

    // A superposition of phi+ and psi+ has Bell coherences; the twirl removes them.
    let v = (bell_vector(BellLabel::PHI_PLUS) + bell_vector(BellLabel::PSI_PLUS)).unscale(2f64.sqrt());
    let rho = DenseTwoQubitState::new(projector(&v))?;
    let twirled = twirl_dense(&rho);
    println!(
        "\nbefore twirl: diag {:?}, off-diagonal {:.3}",
        rho.bell_diagonal(),
        rho.bell_off_diagonal()
    );
    println!(
        "after twirl:  diag {:?}, off-diagonal {:.1e}",
        twirled.bell_diagonal(),
        twirled.bell_off_diagonal()
    );
    Ok(())
}
