//! Coupling deficiency: P{xi^U survives to the window end yet differs from
//! the full-occupancy copy} under the shared-field coupling.
//!
//! All family members ride one field per replica. Each vertex carries a
//! bitmask with one bit per member (plus one for full occupancy); a recovery
//! mark clears the vertex's mask and an arrow ORs the source mask into the
//! target. Bit i at vertex v at the window end says v is infected in the
//! copy started from member i, so every member's configuration is read off
//! one pass. This is the additivity of the field construction used as an
//! algorithm, and it makes the default all-singletons family costs linear in
//! the event count.

use rayon::prelude::*;

use super::ExperimentError;
use crate::engine::{EventField, FieldEvent};
use crate::graph::{Adjacency, VertexSet};
use crate::rng::substream;
use crate::stats::{binomial_se, mean_se};

const TAG_DEFICIENCY: u64 = 0x6465_6669_6369;

#[derive(Debug, Clone)]
pub enum Family {
    /// One member per vertex: the union-bound reduction of the supremum.
    Singletons,
    Sets(Vec<VertexSet>),
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct DeficiencyMember {
    pub index: usize,
    /// The member's vertex when the family is the singleton family.
    pub vertex: Option<u32>,
    pub estimate: f64,
    pub se: f64,
    pub hits: u64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct DeficiencyReport {
    pub lambda: f64,
    pub window: f64,
    pub replicas: usize,
    pub members: Vec<DeficiencyMember>,
    pub max_estimate: f64,
    pub max_se: f64,
    pub argmax: usize,
    /// Mean over replicas of the deficient fraction of the family, with its
    /// standard error across replicas.
    pub mean_fraction: f64,
    pub mean_fraction_se: f64,
    /// e^{-a} (1 - (1 - e^{-a})^{n-1}): the independent-clocks value each
    /// singleton attains when lambda = 0.
    pub closed_form_lambda0: Option<f64>,
}

pub fn coupling_deficiency(
    g: &Adjacency,
    lambda: f64,
    window: f64,
    family: &Family,
    replicas: usize,
    seed: u64,
) -> Result<DeficiencyReport, ExperimentError> {
    if replicas < 2 {
        return Err(ExperimentError::TooFewReplicas { need: 2, got: replicas });
    }
    let n = g.vertex_count();
    let members: Vec<VertexSet> = match family {
        Family::Singletons => (0..n as u32).map(VertexSet::singleton).collect(),
        Family::Sets(sets) => sets.clone(),
    };
    if members.is_empty() {
        return Err(ExperimentError::EmptyFamily);
    }
    for (i, m) in members.iter().enumerate() {
        if m.is_empty() {
            return Err(ExperimentError::EmptyFamilyMember(i));
        }
    }
    let f = members.len();
    let words = (f + 1).div_ceil(64);
    let full_word = f / 64;
    let full_bit = 1u64 << (f % 64);
    // Per-vertex initial masks.
    let mut init = vec![0u64; n * words];
    for (i, m) in members.iter().enumerate() {
        for v in m.iter() {
            init[v as usize * words + i / 64] |= 1 << (i % 64);
        }
    }
    for v in 0..n {
        init[v * words + full_word] |= full_bit;
    }
    // Mask selecting member bits inside each word; the full bit lives in the
    // last word, everything below it is a member bit.
    let mut member_mask = vec![u64::MAX; words];
    member_mask[full_word] = full_bit.wrapping_sub(1);

    let per_replica: Vec<(Vec<u64>, f64)> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let field =
                EventField::generate(g, lambda, window, substream(seed, TAG_DEFICIENCY, r as u64))
                    .expect("validated parameters");
            let mut bits = init.clone();
            for ev in field.events() {
                match ev {
                    FieldEvent::Mark(m) => {
                        let base = m.vertex as usize * words;
                        bits[base..base + words].iter_mut().for_each(|w| *w = 0);
                    }
                    FieldEvent::Arrow(a) => {
                        let src = a.source as usize * words;
                        let dst = a.target as usize * words;
                        for w in 0..words {
                            let s = bits[src + w];
                            if s != 0 {
                                bits[dst + w] |= s;
                            }
                        }
                    }
                }
            }
            // alive_i: some vertex carries bit i. miss_i: some vertex is in
            // the full copy but not in copy i.
            let mut alive = vec![0u64; words];
            let mut miss = vec![0u64; words];
            for v in 0..n {
                let base = v * words;
                let has_full = bits[base + full_word] & full_bit != 0;
                for w in 0..words {
                    alive[w] |= bits[base + w];
                    if has_full {
                        miss[w] |= !bits[base + w] & member_mask[w];
                    }
                }
            }
            let deficient: Vec<u64> =
                (0..words).map(|w| alive[w] & miss[w] & member_mask[w]).collect();
            let count: u32 = deficient.iter().map(|w| w.count_ones()).sum();
            (deficient, f64::from(count) / f as f64)
        })
        .collect();

    let mut hits = vec![0u64; f];
    for (deficient, _) in &per_replica {
        for (i, h) in hits.iter_mut().enumerate() {
            if deficient[i / 64] & (1 << (i % 64)) != 0 {
                *h += 1;
            }
        }
    }
    let fractions: Vec<f64> = per_replica.iter().map(|&(_, frac)| frac).collect();
    let (mean_fraction, mean_fraction_se) = mean_se(&fractions)?;
    let members_out: Vec<DeficiencyMember> = hits
        .iter()
        .enumerate()
        .map(|(i, &h)| {
            let estimate = h as f64 / replicas as f64;
            DeficiencyMember {
                index: i,
                vertex: match family {
                    Family::Singletons => Some(i as u32),
                    Family::Sets(_) => None,
                },
                estimate,
                se: binomial_se(estimate, replicas),
                hits: h,
            }
        })
        .collect();
    let argmax = (0..f)
        .max_by(|&a, &b| {
            members_out[a]
                .estimate
                .total_cmp(&members_out[b].estimate)
                .then(b.cmp(&a)) // lowest index wins ties
        })
        .unwrap();
    let closed_form_lambda0 = if lambda == 0.0 && matches!(family, Family::Singletons) {
        let e = (-window).exp();
        Some(e * (1.0 - (1.0 - e).powi(n as i32 - 1)))
    } else {
        None
    };
    Ok(DeficiencyReport {
        lambda,
        window,
        replicas,
        max_estimate: members_out[argmax].estimate,
        max_se: members_out[argmax].se,
        argmax,
        members: members_out,
        mean_fraction,
        mean_fraction_se,
        closed_form_lambda0,
    })
}
