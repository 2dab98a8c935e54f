//! Built-in configurations.

use std::collections::BTreeMap;

use crate::config::{ConfigFile, Entries, Grids, Term, Tolerances};

/// Water: `delta = 0.98`, `eta = 0.01`, `c0 = 1.15`.
pub const FILM_DELTA: f64 = 0.98;
pub const FILM_ETA: f64 = 0.01;
pub const FILM_C0: f64 = 1.15;

/// Perturbation used by the `--perturbed` film variant.
pub const FILM_PERTURBATION: &str = "0.1*exp(-x^2)";

fn term(power: u32, limit: &str, perturbation: Option<&str>) -> Term {
    Term { power, limit: limit.to_string(), perturbation: perturbation.map(str::to_string) }
}

/// Linearized thin-film system
/// `T_a = 9 eta/(2 delta) D^2 + phi1 D + phi0`,
/// `T_b = psi3 D^3 + psi2 D^2 + psi1 D + psi0`, `T_c = -D`, `T_d = c0 D`.
///
/// With `perturbed`, a Gaussian bump is added to each of `phi0, phi1` and
/// `psi0 ..= psi3`; the constant coefficients of the model stay constant.
pub fn film_config(delta: f64, eta: f64, c0: f64, perturbed: bool) -> ConfigFile {
    let p = perturbed.then_some(FILM_PERTURBATION);
    ConfigFile {
        params: BTreeMap::from([("c0".to_string(), c0), ("delta".to_string(), delta), ("eta".to_string(), eta)]),
        entries: Entries {
            a: vec![term(0, "-5/(2*delta)", p), term(1, "c0-17/21", p), term(2, "9*eta/(2*delta)", None)],
            b: vec![
                term(0, "5/(2*delta)", p),
                term(1, "1/7", p),
                term(2, "-2*eta/delta", p),
                term(3, "5/(6*delta)", p),
            ],
            c: vec![term(1, "-1", None)],
            d: vec![term(1, "c0", None)],
        },
        grids: Grids::default(),
        tolerances: Tolerances::default(),
    }
}

/// Decoupled system `T_a = -D^2`, `T_d = D`.
pub fn diagonal_config() -> ConfigFile {
    ConfigFile {
        params: BTreeMap::new(),
        entries: Entries { a: vec![term(2, "-1", None)], b: vec![], c: vec![], d: vec![term(1, "1", None)] },
        grids: Grids::default(),
        tolerances: Tolerances::default(),
    }
}
