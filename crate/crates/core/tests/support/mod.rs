//! Random generators and brute-force oracles shared by the property tests
//! (and by the CLI acceptance suite, which includes this file by path).
#![allow(dead_code)]

pub mod gen;
pub mod oracle;

/// Canonical, order-independent rendering of a multiset of environments.
pub fn env_multiset(envs: &[csbb_core::pattern::Env]) -> Vec<String> {
    let mut out: Vec<String> = envs
        .iter()
        .map(|e| {
            e.iter()
                .map(|(k, v)| format!("{k}={v:?}"))
                .collect::<Vec<_>>()
                .join(";")
        })
        .collect();
    out.sort();
    out
}
