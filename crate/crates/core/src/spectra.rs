//! Intersection spectra and the classification predicates built on them:
//! admissible line sets, singular points, regularity, unitals, and the
//! quasi-Hermitian hyperplane profiles (non-singular and cone-shaped).

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::geometry::{
    check_same_geometry, popcount_and, Geometry, HyperplaneId, LineId, PointId, PointSet,
    Subspace,
};
use crate::hermitian::{canonical_cone, hermitian_hyperplane_numbers, hermitian_size, singular_size};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Family {
    Lines,
    Planes,
    Hyperplanes,
}

/// Exact histogram of |ℓ ∩ S| over one family of subspaces.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SpectrumReport {
    family: Family,
    histogram: BTreeMap<u32, u64>,
    set_size: u64,
}

impl SpectrumReport {
    pub fn family(&self) -> Family {
        self.family
    }

    pub fn histogram(&self) -> &BTreeMap<u32, u64> {
        &self.histogram
    }

    pub fn set_size(&self) -> u64 {
        self.set_size
    }

    /// Number of family members scanned (Σ of the histogram counts).
    pub fn family_size(&self) -> u64 {
        self.histogram.values().sum()
    }

    /// The intersection sizes that actually occur.
    pub fn values(&self) -> Vec<u32> {
        self.histogram.keys().copied().collect()
    }

    pub fn count(&self, size: u32) -> u64 {
        self.histogram.get(&size).copied().unwrap_or(0)
    }
}

/// Exact intersection histogram of S against lines, planes, or hyperplanes.
///
/// Planes are a separate enumeration only when 3 < r; at r = 3 they are the
/// hyperplanes and at r = 2 there is no proper plane family. The full plane
/// family of r ≥ 4 spaces is out of reach by design; scans there go through
/// [`pencil_spectrum`] instead, one line pencil at a time.
pub fn spectrum(g: &Geometry, s: &PointSet, family: Family) -> Result<SpectrumReport> {
    check_same_geometry(g, s)?;
    let mut histogram: BTreeMap<u32, u64> = BTreeMap::new();
    match family {
        Family::Lines => {
            g.for_each_line(|_, pts| {
                let cnt = pts.iter().filter(|&&x| s.contains(PointId(x))).count() as u32;
                *histogram.entry(cnt).or_default() += 1;
            });
        }
        Family::Hyperplanes => {
            scan_hyperplanes(g, s, &mut histogram);
        }
        Family::Planes => {
            if g.r() == 3 {
                scan_hyperplanes(g, s, &mut histogram);
            } else if g.r() == 2 {
                return Err(Error::InvalidParameter(
                    "a plane has no proper plane sections; use lines".into(),
                ));
            } else {
                return Err(Error::ResourceLimit(format!(
                    "full plane family of PG({},{}) is too large; scan pencils instead",
                    g.r(),
                    g.field().order()
                )));
            }
        }
    }
    Ok(SpectrumReport {
        family,
        histogram,
        set_size: s.len() as u64,
    })
}

fn scan_hyperplanes(g: &Geometry, s: &PointSet, histogram: &mut BTreeMap<u32, u64>) {
    for j in 0..g.hyperplane_count() {
        let hid = HyperplaneId(j);
        let cnt = match g.hyperplane_bits(hid) {
            Some(bits) => popcount_and(bits, s.bits()),
            None => g
                .hyperplane_points(hid)
                .iter()
                .filter(|&&p| s.contains(p))
                .count() as u32,
        };
        *histogram.entry(cnt).or_default() += 1;
    }
}

/// Histogram of |π ∩ S| over the planes through one line. The line is given
/// by a dimension-1 subspace; works for every r ≥ 3 at pencil cost m =
/// s^(2(r-2)) + ... + 1 rather than full-family cost.
pub fn pencil_spectrum(g: &Geometry, s: &PointSet, line: &Subspace) -> Result<SpectrumReport> {
    check_same_geometry(g, s)?;
    let mut histogram: BTreeMap<u32, u64> = BTreeMap::new();
    for plane in g.planes_through_line(line)? {
        let cnt = g
            .subspace_points(&plane)
            .iter()
            .filter(|&&p| s.contains(p))
            .count() as u32;
        *histogram.entry(cnt).or_default() += 1;
    }
    Ok(SpectrumReport {
        family: Family::Planes,
        histogram,
        set_size: s.len() as u64,
    })
}

/// A line whose intersection count breaks the ≡ 1 (mod p) rule.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ResidueViolation {
    pub line: LineId,
    pub count: u32,
}

/// Checks that every line meets S in ≡ 1 (mod p) points; `None` means the
/// residue rule holds, otherwise the first violating line is returned.
pub fn check_line_residue(g: &Geometry, s: &PointSet) -> Result<Option<ResidueViolation>> {
    check_same_geometry(g, s)?;
    let p = g.field().p();
    let mut hit: Option<ResidueViolation> = None;
    g.for_each_line(|l, pts| {
        if hit.is_some() {
            return;
        }
        let cnt = pts.iter().filter(|&&x| s.contains(PointId(x))).count() as u32;
        if cnt as u64 % p != 1 {
            hit = Some(ResidueViolation {
                line: LineId(l),
                count: cnt,
            });
        }
    });
    Ok(hit)
}

/// The points of S through which every line is a unisecant or lies inside S.
pub fn singular_points(g: &Geometry, s: &PointSet) -> Result<Vec<PointId>> {
    check_same_geometry(g, s)?;
    let full = g.field().order() as u32 + 1;
    let mut regular = vec![false; g.point_count() as usize];
    g.for_each_line(|_, pts| {
        let cnt = pts.iter().filter(|&&x| s.contains(PointId(x))).count() as u32;
        if cnt != 1 && cnt != full {
            for &x in pts {
                if s.contains(PointId(x)) {
                    regular[x as usize] = true;
                }
            }
        }
    });
    Ok(s.members().filter(|p| !regular[p.0 as usize]).collect())
}

/// Definition clause identifiers for the admissible-line-set classification:
/// the three membership clauses and the three regularity clauses.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Clause {
    /// |K| = k (vacuous for a concrete set; never reported violated).
    Size,
    /// every line meets K in 1, n, or q²+1 points
    LineSizes,
    /// some line meets K in exactly n points
    AttainsN,
    /// K satisfies the three membership clauses
    Membership,
    /// 3 ≤ n ≤ q²−1
    NRange,
    /// no planar section is the complement of a type-(0, q²+1−n) set
    PlanarComplement,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ClassificationReport {
    pub is_knrq: bool,
    /// the attained middle intersection size, when one exists
    pub n: Option<u32>,
    pub singular_points: Vec<PointId>,
    pub is_regular: bool,
    pub violated_clause: Option<Clause>,
    /// line witnessing a LineSizes violation, plane witnessing PlanarComplement
    pub witness_line: Option<LineId>,
    pub witness_plane: Option<HyperplaneId>,
}

/// Classifies S against the three-intersection-size line condition with
/// middle value n, locates its singular points, and evaluates regularity.
///
/// The planar-complement clause is read literally: a section S ∩ π disqualifies
/// S when every line of π meets π ∖ S in 0 or q²+1−n points. All planes are
/// scanned, which confines the check to r ≤ 3.
pub fn classify_knrq(g: &Geometry, s: &PointSet) -> Result<ClassificationReport> {
    check_same_geometry(g, s)?;
    let full = g.field().order() as u32 + 1;
    if g.r() > 3 {
        return Err(Error::ResourceLimit(format!(
            "plane scan over PG({},{}) is out of reach",
            g.r(),
            g.field().order()
        )));
    }

    // line spectrum with one witness line per attained size
    let mut first_line: BTreeMap<u32, LineId> = BTreeMap::new();
    g.for_each_line(|l, pts| {
        let cnt = pts.iter().filter(|&&x| s.contains(PointId(x))).count() as u32;
        first_line.entry(cnt).or_insert(LineId(l));
    });
    let others: Vec<u32> = first_line
        .keys()
        .copied()
        .filter(|&v| v != 1 && v != full)
        .collect();

    let singular = singular_points(g, s)?;

    if others.len() > 1 {
        // two distinct middle sizes: whichever n is chosen, the other size's
        // line breaks the clause
        return Ok(ClassificationReport {
            is_knrq: false,
            n: None,
            singular_points: singular,
            is_regular: false,
            violated_clause: Some(Clause::LineSizes),
            witness_line: Some(first_line[&others[1]]),
            witness_plane: None,
        });
    }
    let Some(&n) = others.first() else {
        return Ok(ClassificationReport {
            is_knrq: false,
            n: None,
            singular_points: singular,
            is_regular: false,
            violated_clause: Some(Clause::AttainsN),
            witness_line: None,
            witness_plane: None,
        });
    };

    // membership holds with middle size n; now regularity
    if n < 3 || n as u64 > g.field().order() - 1 {
        return Ok(ClassificationReport {
            is_knrq: true,
            n: Some(n),
            singular_points: singular,
            is_regular: false,
            violated_clause: Some(Clause::NRange),
            witness_line: None,
            witness_plane: None,
        });
    }
    let m = full - n;
    let complement_hit: Option<Option<HyperplaneId>> = if g.r() == 2 {
        whole_plane_complement_is_two_valued(g, s, m).then_some(None)
    } else {
        find_complement_section(g, s, m).map(Some)
    };
    if let Some(plane) = complement_hit {
        return Ok(ClassificationReport {
            is_knrq: true,
            n: Some(n),
            singular_points: singular,
            is_regular: false,
            violated_clause: Some(Clause::PlanarComplement),
            witness_line: None,
            witness_plane: plane,
        });
    }

    Ok(ClassificationReport {
        is_knrq: true,
        n: Some(n),
        singular_points: singular,
        is_regular: true,
        violated_clause: None,
        witness_line: None,
        witness_plane: None,
    })
}

/// At r = 2 the single planar section of S is S itself; its complement is
/// checked against the two admissible line counts directly.
fn whole_plane_complement_is_two_valued(g: &Geometry, s: &PointSet, m: u32) -> bool {
    let comp = s.complement(g).expect("same geometry");
    let mut ok = true;
    g.for_each_line(|_, pts| {
        let cnt = pts.iter().filter(|&&x| comp.contains(PointId(x))).count() as u32;
        if cnt != 0 && cnt != m {
            ok = false;
        }
    });
    ok
}

/// First plane π (r = 3: a hyperplane) whose complement section π ∖ S is met
/// by every line of π in 0 or m points. A line lies in π exactly when two of
/// its points do.
fn find_complement_section(g: &Geometry, s: &PointSet, m: u32) -> Option<HyperplaneId> {
    let mut line_reps: Vec<(LineId, [u32; 2], Vec<u32>)> = Vec::new();
    g.for_each_line(|l, pts| {
        line_reps.push((LineId(l), [pts[0], pts[1]], pts.to_vec()));
    });
    for j in 0..g.hyperplane_count() {
        let hid = HyperplaneId(j);
        let mut ok = true;
        for (_, reps, pts) in &line_reps {
            if !g.incident(PointId(reps[0]), hid) || !g.incident(PointId(reps[1]), hid) {
                continue;
            }
            let cnt = pts
                .iter()
                .filter(|&&x| g.incident(PointId(x), hid) && !s.contains(PointId(x)))
                .count() as u32;
            if cnt != 0 && cnt != m {
                ok = false;
                break;
            }
        }
        if ok {
            return Some(hid);
        }
    }
    None
}

/// q³+1 points of a plane met by every line in 1 or q+1 points.
pub fn unital_check(g: &Geometry, s: &PointSet) -> Result<bool> {
    check_same_geometry(g, s)?;
    if g.r() != 2 {
        return Err(Error::InvalidParameter(
            "unitals live in planes; r must be 2".into(),
        ));
    }
    let q = g.field().square_root_of_order().ok_or_else(|| {
        Error::InvalidParameter(format!(
            "plane order {} is not a square; no unitals",
            g.field().order()
        ))
    })?;
    if s.len() as u64 != q * q * q + 1 {
        return Ok(false);
    }
    let allowed: BTreeSet<u32> = [1, q as u32 + 1].into_iter().collect();
    let mut ok = true;
    g.for_each_line(|_, pts| {
        let cnt = pts.iter().filter(|&&x| s.contains(PointId(x))).count() as u32;
        if !allowed.contains(&cnt) {
            ok = false;
        }
    });
    Ok(ok)
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum QuasiHermitianVerdict {
    Passes,
    WrongSize {
        actual: u64,
        expected: BigUint,
    },
    BadHyperplane {
        hyperplane: HyperplaneId,
        count: u64,
    },
}

impl QuasiHermitianVerdict {
    pub fn passes(&self) -> bool {
        matches!(self, QuasiHermitianVerdict::Passes)
    }
}

/// Same size and hyperplane intersection numbers as the non-singular variety:
/// |S| must match exactly and every hyperplane count must be one of the two
/// closed-form values.
pub fn quasi_hermitian_check(g: &Geometry, s: &PointSet) -> Result<QuasiHermitianVerdict> {
    check_same_geometry(g, s)?;
    let q = require_square_order(g)?;
    let expected = hermitian_size(g.r(), q)?;
    if BigUint::from(s.len() as u64) != expected {
        return Ok(QuasiHermitianVerdict::WrongSize {
            actual: s.len() as u64,
            expected,
        });
    }
    let (nt, t) = hermitian_hyperplane_numbers(g.r(), q)?;
    let admissible: BTreeSet<BigUint> = [nt, t].into_iter().collect();
    Ok(check_hyperplane_profile(g, s, &admissible))
}

/// Cone-profile variant: size must equal the d-vertex singular expression and
/// every hyperplane count must be one the canonical cone Π_d H attains. The
/// vertex dimension d is an input; it is never inferred from S.
pub fn singular_quasi_hermitian_check(
    g: &Geometry,
    s: &PointSet,
    d: u32,
) -> Result<QuasiHermitianVerdict> {
    check_same_geometry(g, s)?;
    let q = require_square_order(g)?;
    let expected = singular_size(g.r(), q, d)?;
    if BigUint::from(s.len() as u64) != expected {
        return Ok(QuasiHermitianVerdict::WrongSize {
            actual: s.len() as u64,
            expected,
        });
    }
    let cone = canonical_cone(g, d)?;
    let profile = spectrum(g, &cone, Family::Hyperplanes)?;
    let admissible: BTreeSet<BigUint> = profile
        .values()
        .into_iter()
        .map(|v| BigUint::from(v))
        .collect();
    Ok(check_hyperplane_profile(g, s, &admissible))
}

fn require_square_order(g: &Geometry) -> Result<u64> {
    g.field().square_root_of_order().ok_or_else(|| {
        Error::InvalidParameter(format!(
            "field order {} is not a square",
            g.field().order()
        ))
    })
}

fn check_hyperplane_profile(
    g: &Geometry,
    s: &PointSet,
    admissible: &BTreeSet<BigUint>,
) -> QuasiHermitianVerdict {
    for j in 0..g.hyperplane_count() {
        let hid = HyperplaneId(j);
        let cnt = match g.hyperplane_bits(hid) {
            Some(bits) => popcount_and(bits, s.bits()) as u64,
            None => g
                .hyperplane_points(hid)
                .iter()
                .filter(|&&p| s.contains(p))
                .count() as u64,
        };
        if !admissible.contains(&BigUint::from(cnt)) {
            return QuasiHermitianVerdict::BadHyperplane {
                hyperplane: hid,
                count: cnt,
            };
        }
    }
    QuasiHermitianVerdict::Passes
}

/// Finds a plane through the given line meeting S in at most q³+q²+q+1
/// points. Such a plane must exist for any set with the quasi-Hermitian
/// hyperplane profile; a pencil without one is a loud counterexample.
pub fn plane_section_bound_check(g: &Geometry, s: &PointSet, line: &Subspace) -> Result<Subspace> {
    check_same_geometry(g, s)?;
    if g.r() < 3 {
        return Err(Error::InvalidParameter(
            "plane pencils need r >= 3".into(),
        ));
    }
    let q = require_square_order(g)?;
    let bound = q * q * q + q * q + q + 1;
    for plane in g.planes_through_line(line)? {
        let cnt = g
            .subspace_points(&plane)
            .iter()
            .filter(|&&p| s.contains(p))
            .count() as u64;
        if cnt <= bound {
            return Ok(plane);
        }
    }
    Err(Error::CounterexampleFound(format!(
        "every plane through the line meets the set in more than {bound} points"
    )))
}
