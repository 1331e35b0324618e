//! Brute-force recipe feasibility, used as the oracle for `validate_recipe`.

use std::collections::HashSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use tgraph_core::HookContract;

pub const ALPHABET: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

pub fn random_contracts(r: &mut ChaCha8Rng, max_hooks: usize) -> Vec<HookContract> {
    let n = r.random_range(0..=max_hooks);
    (0..n)
        .map(|i| {
            let mut req = Vec::new();
            let mut prod = Vec::new();
            for a in ALPHABET {
                match r.random_range(0..10) {
                    0 => req.push(a),
                    1 | 2 => prod.push(a),
                    _ => {}
                }
            }
            HookContract::new(format!("h{i}")).requires(req).produces(prod)
        })
        .collect()
}

/// A valid order places every producer of an attribute before every hook
/// requiring it, and every requirement is a built-in or produced earlier.
pub fn order_is_valid(hooks: &[HookContract], order: &[usize], builtins: &[&str]) -> bool {
    let mut have: HashSet<&str> = builtins.iter().copied().collect();
    for (pos, &j) in order.iter().enumerate() {
        if !hooks[j].requires.iter().all(|r| have.contains(r.as_str())) {
            return false;
        }
        // no later hook may feed j
        if order[pos + 1..].iter().any(|&i| hooks[i].produces.iter().any(|p| hooks[j].requires.contains(p))) {
            return false;
        }
        have.extend(hooks[j].produces.iter().map(String::as_str));
    }
    true
}

/// Exhaustive search over permutations, pruning prefixes already known to fail.
pub fn brute_force_feasible(hooks: &[HookContract], builtins: &[&str]) -> bool {
    fn go(
        hooks: &[HookContract],
        builtins: &[&str],
        prefix: &mut Vec<usize>,
        used: u32,
        dead: &mut HashSet<u32>,
    ) -> bool {
        if prefix.len() == hooks.len() {
            return order_is_valid(hooks, prefix, builtins);
        }
        if dead.contains(&used) {
            return false;
        }
        for j in 0..hooks.len() {
            if used & (1 << j) != 0 {
                continue;
            }
            prefix.push(j);
            let ok = order_is_valid_prefix(hooks, prefix, builtins)
                && go(hooks, builtins, prefix, used | (1 << j), dead);
            prefix.pop();
            if ok {
                return true;
            }
        }
        dead.insert(used);
        false
    }
    pub fn order_is_valid_prefix(hooks: &[HookContract], prefix: &[usize], builtins: &[&str]) -> bool {
        // a placed hook must not be fed by any hook placed after it
        let j = *prefix.last().unwrap();
        let fed_late = prefix[..prefix.len() - 1]
            .iter()
            .any(|&i| hooks[j].produces.iter().any(|p| hooks[i].requires.contains(p)));
        let mut have: HashSet<&str> = builtins.iter().copied().collect();
        for &i in &prefix[..prefix.len() - 1] {
            have.extend(hooks[i].produces.iter().map(String::as_str));
        }
        !fed_late && hooks[j].requires.iter().all(|r| have.contains(r.as_str()))
    }
    go(hooks, builtins, &mut Vec::new(), 0, &mut HashSet::new())
}
