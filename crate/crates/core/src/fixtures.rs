//! Bundled theories, shared by tests, the CLI and the Python bindings.

use std::sync::Arc;

use crate::text::parse_theory;
use crate::theory::Theory;

pub const GAMMA0_SRC: &str = include_str!("../../../fixtures/gamma0.eat");
pub const FREE_BINOP_SRC: &str = include_str!("../../../fixtures/free_binop.eat");
pub const Z2VEC_SRC: &str = include_str!("../../../fixtures/z2vec.eat");
pub const GROUPS_SRC: &str = include_str!("../../../fixtures/groups.eat");
pub const PI_ETA_EPS_SRC: &str = include_str!("../../../fixtures/pi_eta_eps.eat");

fn load(src: &str) -> Arc<Theory> {
    Arc::new(parse_theory(src).expect("bundled theory parses"))
}

/// One sort, no operations: models are plain sets.
pub fn gamma0() -> Arc<Theory> {
    load(GAMMA0_SRC)
}

pub fn free_binop() -> Arc<Theory> {
    load(FREE_BINOP_SRC)
}

pub fn z2_vector_spaces() -> Arc<Theory> {
    load(Z2VEC_SRC)
}

pub fn groups() -> Arc<Theory> {
    load(GROUPS_SRC)
}

/// Sorts `s`, `s'`; total `eta`, `eps : s -> s'`; `pi : s -> s` defined
/// where `eta(x) = eps(x)`.
pub fn pi_eta_eps() -> Arc<Theory> {
    load(PI_ETA_EPS_SRC)
}

/// Look up a bundled theory by file stem.
pub fn by_name(name: &str) -> Option<Arc<Theory>> {
    Some(match name {
        "gamma0" => gamma0(),
        "free_binop" => free_binop(),
        "z2vec" => z2_vector_spaces(),
        "groups" => groups(),
        "pi_eta_eps" => pi_eta_eps(),
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::validate_theory;

    #[test]
    fn bundled_theories_validate() {
        for name in ["gamma0", "free_binop", "z2vec", "groups", "pi_eta_eps"] {
            let t = by_name(name).unwrap();
            assert!(validate_theory(&t).is_ok(), "{name}");
        }
        assert_eq!(z2_vector_spaces().equations().len(), 4);
        assert_eq!(groups().ops().len(), 3);
    }
}
