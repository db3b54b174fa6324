//! Error-flag bookkeeping: recording Pauli errors and the update table.
use qpa::lab_demon::{flag_update, record_error, record_two_sided};
use qpa::{ErrorFlag, Pauli};

fn main() {
    let mut flag = ErrorFlag::CLEAN;
    for p in [Pauli::X, Pauli::Z, Pauli::Y] {
        flag = record_error(flag, p);
        println!("after {p:?}: {flag}");
    }
    println!(
        "Z on Alice, Z on Bob: {}",
        record_two_sided(ErrorFlag::CLEAN, Pauli::Z, Pauli::Z)
    );

    println!("\nflag of the kept pair (rows: control flag, columns: target flag)");
    print!("      ");
    for t in ErrorFlag::ALL {
        print!("{t} ");
    }
    println!();
    for c in ErrorFlag::ALL {
        print!("{c}  ");
        for t in ErrorFlag::ALL {
            print!("{} ", flag_update(c, t));
        }
        println!();
    }
}
