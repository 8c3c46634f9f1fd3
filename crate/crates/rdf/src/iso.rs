//! Graph isomorphism modulo blank-node renaming.
//!
//! Backtracking search over blank-node bijections. Candidates are pruned by
//! degree and ground-neighbour signatures; every partial assignment is
//! checked against the triples whose blank nodes are all assigned.

use std::collections::{BTreeMap, BTreeSet};

use crate::term::{BlankNode, Subject, Term, Triple};

/// True when `a` and `b` are equal up to a bijective renaming of blank nodes.
pub fn isomorphic(a: &[Triple], b: &[Triple]) -> bool {
    let a: BTreeSet<Triple> = a.iter().cloned().collect();
    let b: BTreeSet<Triple> = b.iter().cloned().collect();
    if a.len() != b.len() {
        return false;
    }
    let ground_a: BTreeSet<&Triple> = a.iter().filter(|t| !has_blank(t)).collect();
    let ground_b: BTreeSet<&Triple> = b.iter().filter(|t| !has_blank(t)).collect();
    if ground_a != ground_b {
        return false;
    }
    let blank_a: Vec<&Triple> = a.iter().filter(|t| has_blank(t)).collect();
    let blank_b: Vec<&Triple> = b.iter().filter(|t| has_blank(t)).collect();
    let sig_a = signatures(&blank_a);
    let sig_b = signatures(&blank_b);
    if sig_a.len() != sig_b.len() {
        return false;
    }
    let mut multiset_a: Vec<&Signature> = sig_a.values().collect();
    let mut multiset_b: Vec<&Signature> = sig_b.values().collect();
    multiset_a.sort();
    multiset_b.sort();
    if multiset_a != multiset_b {
        return false;
    }

    // Most constrained blank nodes first.
    let mut order: Vec<&BlankNode> = sig_a.keys().collect();
    order.sort_by_key(|n| {
        let sig = &sig_a[*n];
        let candidates = sig_b.values().filter(|s| *s == sig).count();
        (candidates, std::cmp::Reverse(sig.out_degree + sig.in_degree))
    });

    let target: BTreeSet<&Triple> = blank_b.iter().copied().collect();
    let mut search = Search {
        order,
        sig_a: &sig_a,
        sig_b: &sig_b,
        triples: &blank_a,
        target: &target,
        forward: BTreeMap::new(),
        used: BTreeSet::new(),
    };
    search.extend(0)
}

fn has_blank(t: &Triple) -> bool {
    matches!(t.subject, Subject::BlankNode(_)) || matches!(t.object, Term::BlankNode(_))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Signature {
    out_degree: usize,
    in_degree: usize,
    /// (direction, predicate, ground neighbour or None for a blank neighbour)
    edges: Vec<(u8, String, Option<String>)>,
}

fn signatures(triples: &[&Triple]) -> BTreeMap<BlankNode, Signature> {
    let mut sigs: BTreeMap<BlankNode, Signature> = BTreeMap::new();
    let empty = || Signature {
        out_degree: 0,
        in_degree: 0,
        edges: Vec::new(),
    };
    for t in triples {
        if let Subject::BlankNode(s) = &t.subject {
            let neighbour = match &t.object {
                Term::BlankNode(_) => None,
                other => Some(other.to_string()),
            };
            let sig = sigs.entry(s.clone()).or_insert_with(empty);
            sig.out_degree += 1;
            sig.edges.push((0, t.predicate.as_str().to_string(), neighbour));
        }
        if let Term::BlankNode(o) = &t.object {
            let neighbour = match &t.subject {
                Subject::BlankNode(_) => None,
                Subject::Iri(i) => Some(i.to_string()),
            };
            let sig = sigs.entry(o.clone()).or_insert_with(empty);
            sig.in_degree += 1;
            sig.edges.push((1, t.predicate.as_str().to_string(), neighbour));
        }
    }
    for sig in sigs.values_mut() {
        sig.edges.sort();
    }
    sigs
}

struct Search<'a> {
    order: Vec<&'a BlankNode>,
    sig_a: &'a BTreeMap<BlankNode, Signature>,
    sig_b: &'a BTreeMap<BlankNode, Signature>,
    triples: &'a [&'a Triple],
    target: &'a BTreeSet<&'a Triple>,
    forward: BTreeMap<BlankNode, BlankNode>,
    used: BTreeSet<BlankNode>,
}

impl Search<'_> {
    fn extend(&mut self, depth: usize) -> bool {
        if depth == self.order.len() {
            return true;
        }
        let node = self.order[depth];
        let sig = &self.sig_a[node];
        let candidates: Vec<BlankNode> = self
            .sig_b
            .iter()
            .filter(|(b, s)| *s == sig && !self.used.contains(*b))
            .map(|(b, _)| b.clone())
            .collect();
        for candidate in candidates {
            self.forward.insert(node.clone(), candidate.clone());
            self.used.insert(candidate.clone());
            if self.consistent(node) && self.extend(depth + 1) {
                return true;
            }
            self.forward.remove(node);
            self.used.remove(&candidate);
        }
        false
    }

    /// Checks every triple touching `node` whose blank nodes are all mapped.
    fn consistent(&self, node: &BlankNode) -> bool {
        for t in self.triples {
            let touches = matches!(&t.subject, Subject::BlankNode(b) if b == node)
                || matches!(&t.object, Term::BlankNode(b) if b == node);
            if !touches {
                continue;
            }
            let subject = match &t.subject {
                Subject::BlankNode(b) => match self.forward.get(b) {
                    Some(m) => Subject::BlankNode(m.clone()),
                    None => continue,
                },
                s => s.clone(),
            };
            let object = match &t.object {
                Term::BlankNode(b) => match self.forward.get(b) {
                    Some(m) => Term::BlankNode(m.clone()),
                    None => continue,
                },
                o => o.clone(),
            };
            let mapped = Triple {
                subject,
                predicate: t.predicate.clone(),
                object,
            };
            if !self.target.contains(&mapped) {
                return false;
            }
        }
        true
    }
}
