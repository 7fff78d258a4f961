//! Exhaustive census of nine-point subsets of the plane of order four.
//!
//! The plane has 21 points, so candidate sets are bits of a `u32` and the
//! whole space of C(21,9) = 293930 subsets is walkable in one pass.  Each
//! candidate is screened by line intersection sizes; survivors get the two
//! expensive questions: does the characteristic vector lie in the binary
//! hyperplane code, and is the set the point set of a nondegenerate
//! conjugate-symmetric form.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::code::{CharVector, Code, Membership};
use crate::error::{Error, Result};
use crate::geometry::{Geometry, PointId, PointSet};
use crate::hermitian::fit_hermitian_form;

/// One surviving nine-point set.  `mask` has bit `i` set when point `i`
/// is in the set; point ids on 21 points always fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct UnitalRecord {
    pub mask: u32,
    pub in_code: bool,
    pub hermitian: bool,
}

/// Outcome of a full (or one-point-restricted) scan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HuntReport {
    /// Nine-point subsets examined.
    pub candidates: u64,
    /// Sets every line meets in 1 or 3 points, ascending by mask.
    pub unitals: Vec<UnitalRecord>,
    /// Set when the scan was restricted to sets through one point.
    pub fixed_point: Option<u32>,
}

impl HuntReport {
    pub fn unital_count(&self) -> u64 {
        self.unitals.len() as u64
    }

    pub fn codeword_count(&self) -> u64 {
        self.unitals.iter().filter(|u| u.in_code).count() as u64
    }

    pub fn hermitian_count(&self) -> u64 {
        self.unitals.iter().filter(|u| u.hermitian).count() as u64
    }

    /// Sets realized by a form whose characteristic vector is not a
    /// codeword.  Expected empty; reported rather than assumed.
    pub fn hermitian_outside_code(&self) -> u64 {
        self.unitals
            .iter()
            .filter(|u| u.hermitian && !u.in_code)
            .count() as u64
    }
}

#[derive(Default)]
struct Totals {
    candidates: u64,
    unitals: Vec<UnitalRecord>,
}

const PLANE_POINTS: u32 = 21;
const TARGET_SIZE: u32 = 9;

/// Scan every nine-point subset of the plane of order four, optionally only
/// those through `fixed`.  Larger geometries are refused: the candidate
/// count is a binomial in the point count and is already 10^14 for the
/// plane of order nine.
pub fn hunt_unitals(g: &Arc<Geometry>, fixed: Option<PointId>) -> Result<HuntReport> {
    if g.r() != 2 || g.field().order() != 4 {
        return Err(Error::ResourceLimit(
            "exhaustive unital census only runs on the plane of order four".into(),
        ));
    }
    let fixed_bit = match fixed {
        Some(p) => {
            if p.0 >= PLANE_POINTS {
                return Err(Error::InvalidParameter(format!(
                    "fixed point {} out of range",
                    p.0
                )));
            }
            1u32 << p.0
        }
        None => 0,
    };

    let mut line_masks = Vec::new();
    g.for_each_line(|_, pts| {
        let mut m = 0u32;
        for &p in pts {
            m |= 1 << p;
        }
        line_masks.push(m);
    });
    debug_assert_eq!(line_masks.len(), 21);

    let code = Code::new(Arc::clone(g))?;

    let mut totals = (0u32..1 << PLANE_POINTS)
        .into_par_iter()
        .with_min_len(1 << 12)
        .try_fold(Totals::default, |mut acc, mask| -> Result<Totals> {
            if mask & fixed_bit != fixed_bit || mask.count_ones() != TARGET_SIZE {
                return Ok(acc);
            }
            acc.candidates += 1;
            if !line_masks
                .iter()
                .all(|&lm| matches!((mask & lm).count_ones(), 1 | 3))
            {
                return Ok(acc);
            }
            let members: Vec<PointId> = (0..PLANE_POINTS)
                .filter(|i| mask >> i & 1 == 1)
                .map(PointId)
                .collect();
            let set = PointSet::from_members(g, &members)?;
            let v = CharVector::characteristic(g, &set)?;
            let in_code = matches!(code.member(&v)?, Membership::Member(_));
            let hermitian = fit_hermitian_form(g, &set)?.is_some();
            acc.unitals.push(UnitalRecord {
                mask,
                in_code,
                hermitian,
            });
            Ok(acc)
        })
        .try_reduce(Totals::default, |mut a, mut b| {
            a.candidates += b.candidates;
            a.unitals.append(&mut b.unitals);
            Ok(a)
        })?;

    totals.unitals.sort_unstable_by_key(|u| u.mask);
    Ok(HuntReport {
        candidates: totals.candidates,
        unitals: totals.unitals,
        fixed_point: fixed.map(|p| p.0),
    })
}

/// Draw `count` uniformly random `size`-point subsets, deterministically
/// from `seed`.  Negative-control batches in rejection experiments come
/// from here so a run is reproducible from its reported seed.
pub fn random_point_sets(
    g: &Geometry,
    size: u32,
    count: u32,
    seed: u64,
) -> Result<Vec<PointSet>> {
    let n = g.point_count();
    if size > n {
        return Err(Error::InvalidParameter(format!(
            "sample size {size} exceeds {n} points"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let idx = rand::seq::index::sample(&mut rng, n as usize, size as usize);
            let members: Vec<PointId> = idx.iter().map(|i| PointId(i as u32)).collect();
            PointSet::from_members(g, &members)
        })
        .collect()
}
