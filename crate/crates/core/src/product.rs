//! Synchronous composition.

use std::collections::HashMap;

use crate::alphabet::{EventId, EventSet};
use crate::automaton::{Automaton, AutomatonBuilder, StateId};
use crate::error::{Error, Result};

/// Result of a synchronous product, remembering each state's components.
#[derive(Clone, Debug)]
pub struct Product {
    pub automaton: Automaton,
    pub components: Vec<Vec<StateId>>,
}

impl Product {
    pub fn component(&self, q: StateId, i: usize) -> StateId {
        self.components[q][i]
    }
}

/// `a ‖ b`: shared events synchronize, private events interleave, marked
/// states are pairs of marked states, and only reachable pairs are kept.
pub fn sync_product(a: &Automaton, b: &Automaton) -> Result<Automaton> {
    Ok(sync_product_all(&[a, b])?.automaton)
}

/// N-ary synchronous product.
pub fn sync_product_all(parts: &[&Automaton]) -> Result<Product> {
    let first = parts
        .first()
        .ok_or_else(|| Error::InvalidAlphabet("empty product".into()))?;
    if parts.iter().any(|p| !p.same_alphabet(first)) {
        return Err(Error::AlphabetMismatch);
    }
    let alphabet = first.alphabet();
    let events: EventSet = parts.iter().flat_map(|p| p.events().iter().copied()).collect();
    // For each event, the indices of the operands that own it.
    let owners: HashMap<EventId, Vec<usize>> = events
        .iter()
        .map(|&e| {
            (
                e,
                (0..parts.len())
                    .filter(|&i| parts[i].events().contains(&e))
                    .collect(),
            )
        })
        .collect();

    let mut builder = AutomatonBuilder::new(alphabet, events);
    let mut index: HashMap<Vec<StateId>, StateId> = HashMap::new();
    let mut tuples: Vec<Vec<StateId>> = Vec::new();

    let label = |t: &[StateId]| -> String {
        let inner: Vec<&str> = t.iter().enumerate().map(|(i, &q)| parts[i].label(q)).collect();
        format!("({})", inner.join(","))
    };
    let marked = |t: &[StateId]| t.iter().enumerate().all(|(i, &q)| parts[i].is_marked(q));

    let init: Vec<StateId> = parts.iter().map(|p| p.initial()).collect();
    builder.add_state(label(&init), marked(&init));
    index.insert(init.clone(), 0);
    tuples.push(init);

    let mut i = 0;
    while i < tuples.len() {
        let cur = tuples[i].clone();
        // Candidate events: anything enabled in some operand.
        let mut candidates: Vec<EventId> = cur
            .iter()
            .enumerate()
            .flat_map(|(k, &q)| parts[k].transitions(q).map(|(e, _)| e))
            .collect();
        candidates.sort_unstable();
        candidates.dedup();
        for e in candidates {
            let mut next = cur.clone();
            let mut ok = true;
            for &k in &owners[&e] {
                match parts[k].next(cur[k], e) {
                    Some(t) => next[k] = t,
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            let target = match index.get(&next) {
                Some(&t) => t,
                None => {
                    let t = builder.add_state(label(&next), marked(&next));
                    index.insert(next.clone(), t);
                    tuples.push(next);
                    t
                }
            };
            builder.add_transition(i, e, target)?;
        }
        i += 1;
    }
    Ok(Product {
        automaton: builder.build(0)?,
        components: tuples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::{Alphabet, EventSpec};
    use crate::automaton::language_equal;
    use std::sync::Arc;

    #[test]
    fn product_with_universal_is_identity() {
        let al = Arc::new(
            Alphabet::new(vec![EventSpec::new("a"), EventSpec::new("b")], None, None).unwrap(),
        );
        let (a, b) = (al.lookup("a").unwrap(), al.lookup("b").unwrap());
        let mut g = AutomatonBuilder::new(&al, al.sigma().clone());
        let s0 = g.add_state("0", true);
        let s1 = g.add_state("1", false);
        g.add_transition(s0, a, s1).unwrap();
        g.add_transition(s1, b, s0).unwrap();
        let g = g.build(s0).unwrap();
        let mut u = AutomatonBuilder::new(&al, al.sigma().clone());
        let q = u.add_state("u", true);
        u.add_transition(q, a, q).unwrap();
        u.add_transition(q, b, q).unwrap();
        let u = u.build(q).unwrap();
        let p = sync_product(&g, &u).unwrap();
        assert!(language_equal(&p, &g));
        assert_eq!(p.marked_states(), g.marked_states());
    }

    #[test]
    fn mismatched_alphabets_are_rejected() {
        let a1 = Arc::new(Alphabet::new(vec![EventSpec::new("a")], None, None).unwrap());
        let a2 = Arc::new(Alphabet::new(vec![EventSpec::new("a").controllable(true)], None, None).unwrap());
        let x = AutomatonBuilder::new(&a1, EventSet::new());
        let mut x = x;
        x.add_state("0", true);
        let mut y = AutomatonBuilder::new(&a2, EventSet::new());
        y.add_state("0", true);
        assert!(matches!(
            sync_product(&x.build(0).unwrap(), &y.build(0).unwrap()),
            Err(Error::AlphabetMismatch)
        ));
    }
}
