//! Purification and security thresholds of the noise families, and their
//! dependence on the input fidelity.
use qpa::recurrence::{find_thresholds, threshold_grid, ScanSettings};
use qpa::{Error, FlagMode, NoiseFamily, SubensembleState};

fn main() -> qpa::Result<()> {
    let initial = SubensembleState::werner(0.85, FlagMode::Fixed)?;
    for (family, range) in [
        (NoiseFamily::OneSided, [0.88, 0.92]),
        (NoiseFamily::Product, [0.90, 1.0]),
        (NoiseFamily::Uniform, [0.85, 0.95]),
    ] {
        let settings = ScanSettings {
            range,
            ..ScanSettings::default()
        };
        match find_thresholds(|x| family.build(x), &initial, &settings) {
            Ok(t) => println!(
                "{:<10} f_purify {:.5}  f_secure {:.5}  window {:.1e}",
                family.name(),
                t.f_purify.unwrap_or(f64::NAN),
                t.f_secure.unwrap_or(f64::NAN),
                t.intermediate_width().unwrap_or(f64::NAN)
            ),
            Err(Error::NoThreshold { regime, .. }) => {
                println!("{:<10} no boundary, {regime} throughout", family.name())
            }
            Err(e) => return Err(e),
        }
    }

    let initials: Vec<(f64, SubensembleState)> = [0.75, 0.85, 0.95]
        .iter()
        .map(|&f| Ok((f, SubensembleState::werner(f, FlagMode::Fixed)?)))
        .collect::<qpa::Result<_>>()?;
    let settings = ScanSettings {
        range: [0.88, 0.92],
        ..ScanSettings::default()
    };
    println!("\none_sided thresholds by input fidelity:");
    for (f, t) in threshold_grid(|x| NoiseFamily::OneSided.build(x), &initials, &settings) {
        let t = t?;
        println!(
            "  F = {f:.2}: f_purify {:.5}, f_secure {:.5}",
            t.f_purify.unwrap(),
            t.f_secure.unwrap()
        );
    }
    Ok(())
}
