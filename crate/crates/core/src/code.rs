//! F_p linear algebra on vectors indexed by projective points: the code spanned
//! by hyperplane characteristic vectors, membership certificates, codeword
//! restriction to hyperplane sections, and the dual-plane multiset translation.
//!
//! Elimination is deterministic (first nonzero pivot, ascending columns), so
//! certificates are reproducible run to run even though the code admits many
//! decompositions of the same vector.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{
    check_same_geometry, Embedding, GeomKey, Geometry, HyperplaneId, PointId, PointSet,
};

/// Elimination works on dense matrices; beyond this many points the quadratic
/// transform alone stops fitting in cache-friendly memory.
pub const MATRIX_LIMIT: usize = 4096;

/// Dense matrix over F_p. Rows are bitsets for p = 2 and byte-packed residues
/// for odd p up to 251.
#[derive(Clone)]
pub struct FpMat {
    p: u64,
    rows: usize,
    cols: usize,
    words: usize,
    bits: Vec<u64>,
    bytes: Vec<u8>,
}

impl FpMat {
    pub fn zeros(p: u64, rows: usize, cols: usize) -> Result<FpMat> {
        if !(2..=251).contains(&p) {
            return Err(Error::ResourceLimit(format!(
                "characteristic {p} outside byte-packed range 2..=251"
            )));
        }
        if rows.max(cols) > MATRIX_LIMIT {
            return Err(Error::ResourceLimit(format!(
                "{rows}x{cols} matrix exceeds the {MATRIX_LIMIT} dense limit"
            )));
        }
        let (words, bits, bytes) = if p == 2 {
            let w = cols.div_ceil(64);
            (w, vec![0u64; rows * w], Vec::new())
        } else {
            (0, Vec::new(), vec![0u8; rows * cols])
        };
        Ok(FpMat {
            p,
            rows,
            cols,
            words,
            bits,
            bytes,
        })
    }

    pub fn identity(p: u64, n: usize) -> Result<FpMat> {
        let mut m = FpMat::zeros(p, n, n)?;
        for i in 0..n {
            m.set(i, i, 1);
        }
        Ok(m)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        if self.p == 2 {
            self.bits[r * self.words + c / 64] >> (c % 64) & 1
        } else {
            self.bytes[r * self.cols + c] as u64
        }
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        debug_assert!(v < self.p);
        if self.p == 2 {
            let w = &mut self.bits[r * self.words + c / 64];
            *w = *w & !(1 << (c % 64)) | (v << (c % 64));
        } else {
            self.bytes[r * self.cols + c] = v as u8;
        }
    }

    fn row_swap(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        if self.p == 2 {
            let (lo, hi) = (a.min(b), a.max(b));
            let (front, back) = self.bits.split_at_mut(hi * self.words);
            front[lo * self.words..(lo + 1) * self.words].swap_with_slice(&mut back[..self.words]);
        } else {
            let (lo, hi) = (a.min(b), a.max(b));
            let (front, back) = self.bytes.split_at_mut(hi * self.cols);
            front[lo * self.cols..(lo + 1) * self.cols].swap_with_slice(&mut back[..self.cols]);
        }
    }

    /// row[r] *= c
    fn row_scale(&mut self, r: usize, c: u64) {
        if self.p == 2 {
            debug_assert_eq!(c, 1);
            return;
        }
        let p = self.p;
        for x in &mut self.bytes[r * self.cols..(r + 1) * self.cols] {
            *x = ((*x as u64 * c) % p) as u8;
        }
    }

    /// row[dst] += c * row[src]
    fn row_add_scaled(&mut self, dst: usize, src: usize, c: u64) {
        debug_assert_ne!(dst, src);
        if c == 0 {
            return;
        }
        if self.p == 2 {
            let (d, s) = (dst * self.words, src * self.words);
            let (a, b) = if d < s {
                let (front, back) = self.bits.split_at_mut(s);
                (&mut front[d..d + self.words], &back[..self.words])
            } else {
                let (front, back) = self.bits.split_at_mut(d);
                (&mut back[..self.words], &front[s..s + self.words])
            };
            for (x, y) in a.iter_mut().zip(b) {
                *x ^= y;
            }
        } else {
            let p = self.p;
            let (d, s) = (dst * self.cols, src * self.cols);
            let (a, b) = if d < s {
                let (front, back) = self.bytes.split_at_mut(s);
                (&mut front[d..d + self.cols], &back[..self.cols])
            } else {
                let (front, back) = self.bytes.split_at_mut(d);
                (&mut back[..self.cols], &front[s..s + self.cols])
            };
            for (x, y) in a.iter_mut().zip(b) {
                *x = ((*x as u64 + c * *y as u64) % p) as u8;
            }
        }
    }

    pub fn row(&self, r: usize) -> Vec<u64> {
        (0..self.cols).map(|c| self.get(r, c)).collect()
    }

    /// Matrix-vector product over F_p.
    pub fn mat_vec(&self, v: &[u64]) -> Result<Vec<u64>> {
        if v.len() != self.cols {
            return Err(Error::InvalidParameter(format!(
                "vector length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        if self.p == 2 {
            let mut packed = vec![0u64; self.words];
            for (j, &x) in v.iter().enumerate() {
                packed[j / 64] |= (x & 1) << (j % 64);
            }
            Ok((0..self.rows)
                .map(|r| {
                    let row = &self.bits[r * self.words..(r + 1) * self.words];
                    row.iter()
                        .zip(&packed)
                        .map(|(&a, &b)| (a & b).count_ones() as u64)
                        .sum::<u64>()
                        & 1
                })
                .collect())
        } else {
            let p = self.p;
            Ok((0..self.rows)
                .map(|r| {
                    self.bytes[r * self.cols..(r + 1) * self.cols]
                        .iter()
                        .zip(v)
                        .map(|(&a, &b)| a as u64 * b)
                        .sum::<u64>()
                        % p
                })
                .collect())
        }
    }
}

fn inv_mod(a: u64, p: u64) -> u64 {
    // p prime, a nonzero: Fermat
    let mut acc = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    acc
}

/// Reduced echelon form of a matrix together with the row transform that
/// produced it: t * input = e, pivot rows first.
pub struct Echelon {
    e: FpMat,
    t: FpMat,
    pivots: Vec<(usize, usize)>,
}

pub fn echelon_with_transform(mut a: FpMat) -> Result<Echelon> {
    let p = a.p;
    let mut t = FpMat::identity(p, a.rows)?;
    let mut pivots = Vec::new();
    let mut next = 0usize;
    for col in 0..a.cols {
        let Some(pr) = (next..a.rows).find(|&r| a.get(r, col) != 0) else {
            continue;
        };
        a.row_swap(pr, next);
        t.row_swap(pr, next);
        let inv = inv_mod(a.get(next, col), p);
        if inv != 1 {
            a.row_scale(next, inv);
            t.row_scale(next, inv);
        }
        for r in 0..a.rows {
            if r == next {
                continue;
            }
            let c = a.get(r, col);
            if c != 0 {
                a.row_add_scaled(r, next, p - c);
                t.row_add_scaled(r, next, p - c);
            }
        }
        pivots.push((next, col));
        next += 1;
        if next == a.rows {
            break;
        }
    }
    Ok(Echelon { e: a, t, pivots })
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivots(&self) -> &[(usize, usize)] {
        &self.pivots
    }

    pub fn transform_row(&self, r: usize) -> Vec<u64> {
        self.t.row(r)
    }

    pub fn echelon_row(&self, r: usize) -> Vec<u64> {
        self.e.row(r)
    }

    /// Applies the recorded transform to a right-hand side.
    pub fn transformed(&self, v: &[u64]) -> Result<Vec<u64>> {
        self.t.mat_vec(v)
    }

    /// Basis of {x : input * x = 0}, one vector per free column.
    pub fn right_kernel_basis(&self) -> Vec<Vec<u64>> {
        let p = self.e.p;
        let pivot_col: BTreeMap<usize, usize> =
            self.pivots.iter().map(|&(r, c)| (c, r)).collect();
        let mut basis = Vec::new();
        for fc in 0..self.e.cols {
            if pivot_col.contains_key(&fc) {
                continue;
            }
            let mut v = vec![0u64; self.e.cols];
            v[fc] = 1;
            for (&c, &r) in &pivot_col {
                let coeff = self.e.get(r, fc);
                if coeff != 0 {
                    v[c] = p - coeff;
                }
            }
            basis.push(v);
        }
        basis
    }
}

/// Dense vector of residues mod p indexed by the points of one geometry.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CharVector {
    key: GeomKey,
    p: u64,
    entries: Vec<u64>,
}

impl CharVector {
    pub fn zero(g: &Geometry) -> CharVector {
        CharVector {
            key: g.key(),
            p: g.field().p(),
            entries: vec![0; g.point_count() as usize],
        }
    }

    pub fn characteristic(g: &Geometry, s: &PointSet) -> Result<CharVector> {
        check_same_geometry(g, s)?;
        let mut v = CharVector::zero(g);
        for p in s.members() {
            v.entries[p.0 as usize] = 1;
        }
        Ok(v)
    }

    pub fn from_residues(g: &Geometry, entries: Vec<u64>) -> Result<CharVector> {
        let p = g.field().p();
        if entries.len() != g.point_count() as usize {
            return Err(Error::InvalidParameter(format!(
                "vector length {} for {} points",
                entries.len(),
                g.point_count()
            )));
        }
        if let Some(bad) = entries.iter().find(|&&e| e >= p) {
            return Err(Error::InvalidParameter(format!(
                "entry {bad} is not a residue mod {p}"
            )));
        }
        Ok(CharVector {
            key: g.key(),
            p,
            entries,
        })
    }

    pub fn key(&self) -> GeomKey {
        self.key
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn entry(&self, p: PointId) -> u64 {
        self.entries[p.0 as usize]
    }

    pub fn weight(&self) -> usize {
        self.entries.iter().filter(|&&e| e != 0).count()
    }

    /// The support as a point set; only meaningful for 0/1 vectors but defined
    /// for all.
    pub fn support(&self, g: &Geometry) -> Result<PointSet> {
        if g.key() != self.key {
            return Err(Error::GeometryMismatch("vector from another geometry".into()));
        }
        let pts: Vec<PointId> = self
            .entries
            .iter()
            .enumerate()
            .filter(|(_, &e)| e != 0)
            .map(|(i, _)| PointId(i as u32))
            .collect();
        PointSet::from_members(g, &pts)
    }

    pub fn dot(&self, other: &CharVector) -> Result<u64> {
        if self.key != other.key || self.p != other.p {
            return Err(Error::GeometryMismatch(format!(
                "dot between vectors over {} and {}",
                self.key, other.key
            )));
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| a * b % self.p)
            .sum::<u64>()
            % self.p)
    }
}

/// Characteristic vector of one hyperplane.
pub fn hyperplane_vector(g: &Geometry, h: HyperplaneId) -> Result<CharVector> {
    if h.0 >= g.hyperplane_count() {
        return Err(Error::InvalidParameter(format!(
            "hyperplane id {} out of range",
            h.0
        )));
    }
    let mut v = CharVector::zero(g);
    for p in g.hyperplane_points(h) {
        v.entries[p.0 as usize] = 1;
    }
    Ok(v)
}

/// Sparse decomposition of a vector over hyperplane characteristic vectors:
/// Σ λ_i v^{H_i} with every λ_i a nonzero residue.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CodeCertificate {
    key: GeomKey,
    p: u64,
    coefficients: BTreeMap<u32, u64>,
}

impl CodeCertificate {
    pub fn from_coefficients(
        g: &Geometry,
        coefficients: BTreeMap<u32, u64>,
    ) -> Result<CodeCertificate> {
        let p = g.field().p();
        for (&hid, &lam) in &coefficients {
            if hid >= g.hyperplane_count() {
                return Err(Error::InvalidParameter(format!(
                    "hyperplane id {hid} out of range"
                )));
            }
            if lam == 0 || lam >= p {
                return Err(Error::InvalidParameter(format!(
                    "coefficient {lam} is not a nonzero residue mod {p}"
                )));
            }
        }
        Ok(CodeCertificate {
            key: g.key(),
            p,
            coefficients,
        })
    }

    /// The one-term certificate of a hyperplane's own characteristic vector.
    pub fn single(g: &Geometry, h: HyperplaneId) -> Result<CodeCertificate> {
        CodeCertificate::from_coefficients(g, [(h.0, 1)].into_iter().collect())
    }

    pub fn key(&self) -> GeomKey {
        self.key
    }

    pub fn coefficients(&self) -> &BTreeMap<u32, u64> {
        &self.coefficients
    }

    pub fn support_size(&self) -> usize {
        self.coefficients.len()
    }

    /// Σ λ_i mod p. Invariant of the codeword, not of the decomposition: any
    /// two decompositions differ by a relation, and every relation has
    /// coefficient sum 0 because each point lies on 1 mod p hyperplanes.
    pub fn coefficient_sum(&self) -> u64 {
        self.coefficients.values().sum::<u64>() % self.p
    }

    /// Rebuilds Σ λ_i v^{H_i} from incidence data and compares entrywise.
    pub fn verify(&self, g: &Geometry, target: &CharVector) -> Result<()> {
        if self.key != g.key() || target.key != g.key() {
            return Err(Error::GeometryMismatch(
                "certificate, target, and geometry disagree".into(),
            ));
        }
        let mut acc = vec![0u64; g.point_count() as usize];
        for (&hid, &lam) in &self.coefficients {
            if hid >= g.hyperplane_count() || lam == 0 || lam >= self.p {
                return Err(Error::Integrity(format!(
                    "certificate entry ({hid}, {lam}) is malformed"
                )));
            }
            for p in g.hyperplane_points(HyperplaneId(hid)) {
                acc[p.0 as usize] += lam;
            }
        }
        for (i, a) in acc.iter().enumerate() {
            if a % self.p != target.entries[i] {
                return Err(Error::Integrity(format!(
                    "certificate reproduces {} at point {i}, target has {}",
                    a % self.p,
                    target.entries[i]
                )));
            }
        }
        Ok(())
    }
}

/// Row vector orthogonal to every hyperplane characteristic vector but not to
/// the queried target: proof of non-membership.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct KernelWitness {
    key: GeomKey,
    p: u64,
    entries: Vec<u64>,
}

impl KernelWitness {
    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    /// Checks both halves of non-membership from scratch.
    pub fn verify(&self, g: &Geometry, target: &CharVector) -> Result<()> {
        if self.key != g.key() || target.key != g.key() {
            return Err(Error::GeometryMismatch(
                "witness, target, and geometry disagree".into(),
            ));
        }
        let p = self.p;
        for j in 0..g.hyperplane_count() {
            let s: u64 = g
                .hyperplane_points(HyperplaneId(j))
                .iter()
                .map(|pt| self.entries[pt.0 as usize])
                .sum();
            if s % p != 0 {
                return Err(Error::Integrity(format!(
                    "witness is not orthogonal to hyperplane {j}"
                )));
            }
        }
        let d: u64 = self
            .entries
            .iter()
            .zip(&target.entries)
            .map(|(&a, &b)| a * b % p)
            .sum::<u64>()
            % p;
        if d == 0 {
            return Err(Error::Integrity(
                "witness is orthogonal to the target; proves nothing".into(),
            ));
        }
        Ok(())
    }
}

pub enum Membership {
    Member(CodeCertificate),
    NotMember(KernelWitness),
}

/// The F_p code of a geometry: echelon form of the point-hyperplane incidence
/// matrix with its row transform, eliminated once and reused for every query.
pub struct Code {
    g: Arc<Geometry>,
    ech: Echelon,
}

impl Code {
    pub fn new(g: Arc<Geometry>) -> Result<Code> {
        let p = g.field().p();
        let n = g.point_count() as usize;
        let m = g.hyperplane_count() as usize;
        let mut a = FpMat::zeros(p, n, m)?;
        for j in 0..m {
            for pt in g.hyperplane_points(HyperplaneId(j as u32)) {
                a.set(pt.0 as usize, j, 1);
            }
        }
        let ech = echelon_with_transform(a)?;
        Ok(Code { g, ech })
    }

    pub fn geometry(&self) -> &Arc<Geometry> {
        &self.g
    }

    pub fn rank(&self) -> usize {
        self.ech.rank()
    }

    /// Decides membership of v in the span of the hyperplane vectors. Both
    /// outcomes carry an independently checkable witness.
    pub fn member(&self, v: &CharVector) -> Result<Membership> {
        if v.key != self.g.key() {
            return Err(Error::GeometryMismatch(
                "vector from another geometry".into(),
            ));
        }
        let w = self.ech.transformed(&v.entries)?;
        for r in self.ech.rank()..w.len() {
            if w[r] != 0 {
                return Ok(Membership::NotMember(KernelWitness {
                    key: self.g.key(),
                    p: v.p,
                    entries: self.ech.transform_row(r),
                }));
            }
        }
        let mut coefficients = BTreeMap::new();
        for &(row, col) in self.ech.pivots() {
            if w[row] != 0 {
                coefficients.insert(col as u32, w[row]);
            }
        }
        Ok(Membership::Member(CodeCertificate {
            key: self.g.key(),
            p: v.p,
            coefficients,
        }))
    }
}

/// Rank over F_p of the point-hyperplane incidence matrix.
pub fn rank_fp(g: &Arc<Geometry>) -> Result<usize> {
    Ok(Code::new(Arc::clone(g))?.rank())
}

/// Pushes a decomposition of v^𝒱 down to a hyperplane section: the trace
/// coefficient of a section hyperplane π is the sum of λ over the pencil of
/// ambient hyperplanes through π, and the resulting combination reproduces
/// v^{𝒱∩H} on the section geometry.
pub fn restrict_certificate(
    big: &Geometry,
    emb: &Embedding,
    cert: &CodeCertificate,
) -> Result<CodeCertificate> {
    if cert.key != big.key() {
        return Err(Error::Integrity(
            "certificate does not belong to the ambient geometry".into(),
        ));
    }
    let p = cert.p;
    let sub = emb.sub();
    let mut acc: BTreeMap<u32, u64> = BTreeMap::new();
    let mut lam_section = 0u64;
    for (&hid, &lam) in &cert.coefficients {
        if hid >= big.hyperplane_count() || lam == 0 || lam >= p {
            return Err(Error::Integrity(format!(
                "certificate entry ({hid}, {lam}) is malformed"
            )));
        }
        if hid == emb.hyperplane().0 {
            // the section hyperplane lies in the pencil of every trace
            lam_section = lam;
            continue;
        }
        let trace = emb.sub_hyperplane(big, HyperplaneId(hid))?;
        let e = acc.entry(trace.0).or_insert(0);
        *e = (*e + lam) % p;
    }
    if lam_section != 0 {
        for j in 0..sub.hyperplane_count() {
            let e = acc.entry(j).or_insert(0);
            *e = (*e + lam_section) % p;
        }
    }
    acc.retain(|_, v| *v != 0);
    Ok(CodeCertificate {
        key: sub.key(),
        p,
        coefficients: acc,
    })
}

/// Multiset of points of the dual plane: the lines of a plane certificate,
/// each with its coefficient as multiplicity.
pub struct DualMultiset {
    dual: Arc<Geometry>,
    p: u64,
    mult: BTreeMap<u32, u64>,
}

impl DualMultiset {
    pub fn dual(&self) -> &Arc<Geometry> {
        &self.dual
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn multiplicities(&self) -> &BTreeMap<u32, u64> {
        &self.mult
    }

    pub fn multiplicity(&self, p: PointId) -> u64 {
        self.mult.get(&p.0).copied().unwrap_or(0)
    }

    /// Σ multiplicities over the points of a dual line, mod p.
    pub fn line_residue(&self, h: HyperplaneId) -> u64 {
        self.dual
            .hyperplane_points(h)
            .iter()
            .map(|pt| self.multiplicity(*pt))
            .sum::<u64>()
            % self.p
    }
}

/// Translates a plane certificate into the dual plane: line e_i with
/// coefficient λ_i becomes the dual point e_i with multiplicity λ_i.
pub fn to_dual_multiset(plane: &Geometry, cert: &CodeCertificate) -> Result<DualMultiset> {
    if plane.r() != 2 {
        return Err(Error::InvalidParameter(format!(
            "dual multisets live on planes, geometry has r = {}",
            plane.r()
        )));
    }
    if cert.key != plane.key() {
        return Err(Error::GeometryMismatch(
            "certificate from another geometry".into(),
        ));
    }
    let dual = Arc::new(plane.dual_plane()?);
    Ok(DualMultiset {
        dual,
        p: cert.p,
        mult: cert.coefficients.clone(),
    })
}

/// δ = number of dual lines meeting the multiset in ≢ k (mod p) points, plus
/// the count of such lines through each dual point.
pub fn non_residue_secant_stats(
    m: &DualMultiset,
    k: u64,
) -> Result<(u64, BTreeMap<u32, u64>)> {
    if k >= m.p {
        return Err(Error::InvalidParameter(format!(
            "residue {k} out of range mod {}",
            m.p
        )));
    }
    let mut delta = 0u64;
    let mut per_point: BTreeMap<u32, u64> = BTreeMap::new();
    for j in 0..m.dual.hyperplane_count() {
        let h = HyperplaneId(j);
        if m.line_residue(h) != k {
            delta += 1;
            for pt in m.dual.hyperplane_points(h) {
                *per_point.entry(pt.0).or_insert(0) += 1;
            }
        }
    }
    Ok((delta, per_point))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::hermitian::HermitianForm;

    fn pg(p: u64, h: u32, r: u32) -> Arc<Geometry> {
        Arc::new(Geometry::build(Arc::new(Field::build(p, h).unwrap()), r).unwrap())
    }

    // test-local elimination over transposed incidence with descending column
    // scan: shares nothing with the production pivot order
    fn naive_rank(g: &Geometry) -> usize {
        let p = g.field().p();
        let n = g.point_count() as usize;
        let mut rows: Vec<Vec<u64>> = (0..g.hyperplane_count())
            .map(|j| {
                let mut r = vec![0u64; n];
                for pt in g.hyperplane_points(HyperplaneId(j)) {
                    r[pt.0 as usize] = 1;
                }
                r
            })
            .collect();
        let mut rank = 0;
        for col in (0..n).rev() {
            let Some(pr) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
                continue;
            };
            rows.swap(pr, rank);
            let inv = inv_mod(rows[rank][col], p);
            for x in rows[rank].iter_mut() {
                *x = *x * inv % p;
            }
            let pivot_row = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row[col] != 0 {
                    let c = p - row[col];
                    for (x, y) in row.iter_mut().zip(&pivot_row) {
                        *x = (*x + c * y) % p;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    struct XorShift(u64);
    impl XorShift {
        fn next(&mut self) -> u64 {
            let mut x = self.0;
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            self.0 = x;
            x
        }
    }

    #[test]
    fn incidence_rank_matches_an_independent_oracle() {
        let g4 = pg(2, 2, 2);
        let r4 = rank_fp(&g4).unwrap();
        assert_eq!(r4, 10);
        assert_eq!(r4, naive_rank(&g4));
        let g9 = pg(3, 2, 2);
        let r9 = rank_fp(&g9).unwrap();
        assert_eq!(r9, 37);
        assert_eq!(r9, naive_rank(&g9));
        assert!(r4 <= 21 && r9 <= 91);
    }

    #[test]
    fn transform_rows_beyond_the_rank_are_kernel_witnesses() {
        let g = pg(2, 2, 2);
        let code = Code::new(Arc::clone(&g)).unwrap();
        let n = g.point_count() as usize;
        assert_eq!(n - code.rank(), 11);
        // every zero row of the echelon yields a left-kernel vector
        for r in code.rank()..n {
            let w = code.ech.transform_row(r);
            for j in 0..g.hyperplane_count() {
                let s: u64 = g
                    .hyperplane_points(HyperplaneId(j))
                    .iter()
                    .map(|pt| w[pt.0 as usize])
                    .sum();
                assert_eq!(s % 2, 0, "row {r} vs hyperplane {j}");
            }
        }
    }

    #[test]
    fn dot_products_and_mismatch() {
        let g = pg(2, 2, 2);
        let herm = HermitianForm::identity(&g).unwrap().variety(&g).unwrap();
        let v = CharVector::characteristic(&g, &herm).unwrap();
        assert_eq!(v.weight(), 9);
        assert_eq!(v.dot(&v).unwrap(), 1); // 9 mod 2
        assert_eq!(v.dot(&CharVector::zero(&g)).unwrap(), 0);
        let other = pg(2, 2, 3);
        assert!(v.dot(&CharVector::zero(&other)).is_err());
    }

    #[test]
    fn line_dot_hyperplane_is_one_mod_p() {
        // lines meet hyperplanes in 1 or q²+1 points, both 1 mod p
        let g = pg(2, 2, 3);
        let hv: Vec<CharVector> = (0..g.hyperplane_count())
            .step_by(9)
            .map(|j| hyperplane_vector(&g, HyperplaneId(j)).unwrap())
            .collect();
        g.for_each_line(|_, pts| {
            let mut lv = CharVector::zero(&g);
            for &x in pts {
                lv.entries[x as usize] = 1;
            }
            for h in &hv {
                assert_eq!(lv.dot(h).unwrap(), 1);
            }
        });
        // and on a plane over F_3 where lines are the hyperplanes
        let g9 = pg(3, 2, 2);
        let all: Vec<CharVector> = (0..g9.hyperplane_count())
            .map(|j| hyperplane_vector(&g9, HyperplaneId(j)).unwrap())
            .collect();
        for a in all.iter().step_by(7) {
            for b in all.iter().step_by(11) {
                assert_eq!(a.dot(b).unwrap(), 1);
            }
        }
    }

    #[test]
    fn hermitian_curve_vector_is_a_codeword() {
        let g = pg(2, 2, 2);
        let code = Code::new(Arc::clone(&g)).unwrap();
        let herm = HermitianForm::identity(&g).unwrap().variety(&g).unwrap();
        let v = CharVector::characteristic(&g, &herm).unwrap();
        match code.member(&v).unwrap() {
            Membership::Member(cert) => {
                cert.verify(&g, &v).unwrap();
                assert_eq!(cert.coefficient_sum(), 1);
            }
            Membership::NotMember(_) => panic!("Hermitian curve vector must be in the code"),
        }
    }

    #[test]
    fn hyperplane_vectors_are_codewords_with_unit_sum() {
        for g in [pg(2, 2, 2), pg(3, 2, 2)] {
            let code = Code::new(Arc::clone(&g)).unwrap();
            for j in [0u32, 7, 20] {
                let v = hyperplane_vector(&g, HyperplaneId(j)).unwrap();
                match code.member(&v).unwrap() {
                    Membership::Member(cert) => {
                        cert.verify(&g, &v).unwrap();
                        assert_eq!(cert.coefficient_sum(), 1);
                    }
                    Membership::NotMember(_) => panic!("hyperplane vector must be in the code"),
                }
                // the one-term decomposition is itself a valid certificate
                CodeCertificate::single(&g, HyperplaneId(j))
                    .unwrap()
                    .verify(&g, &v)
                    .unwrap();
            }
        }
    }

    #[test]
    fn single_point_vector_is_rejected_with_witness() {
        let g = pg(2, 2, 2);
        let code = Code::new(Arc::clone(&g)).unwrap();
        let mut v = CharVector::zero(&g);
        v.entries[5] = 1;
        match code.member(&v).unwrap() {
            Membership::Member(_) => panic!("a single point meets lines in 0 or 1: not a codeword"),
            Membership::NotMember(w) => w.verify(&g, &v).unwrap(),
        }
    }

    #[test]
    fn random_nine_point_subsets_mostly_fall_outside_the_code() {
        let g = pg(2, 2, 2);
        let code = Code::new(Arc::clone(&g)).unwrap();
        let mut rng = XorShift(0x9e3779b97f4a7c15);
        let mut rejected = 0;
        for _ in 0..40 {
            let mut picks: Vec<u32> = Vec::new();
            while picks.len() < 9 {
                let c = (rng.next() % 21) as u32;
                if !picks.contains(&c) {
                    picks.push(c);
                }
            }
            let s =
                PointSet::from_members(&g, &picks.iter().map(|&c| PointId(c)).collect::<Vec<_>>())
                    .unwrap();
            let v = CharVector::characteristic(&g, &s).unwrap();
            match code.member(&v).unwrap() {
                Membership::Member(cert) => cert.verify(&g, &v).unwrap(),
                Membership::NotMember(w) => {
                    w.verify(&g, &v).unwrap();
                    rejected += 1;
                }
            }
        }
        assert!(rejected >= 30, "only {rejected} of 40 rejected");
    }

    #[test]
    fn member_decision_agrees_with_direct_reconstruction() {
        // vectors built as explicit combinations must come back members
        let g = pg(3, 2, 2);
        let code = Code::new(Arc::clone(&g)).unwrap();
        let mut rng = XorShift(42);
        for _ in 0..20 {
            let mut target = CharVector::zero(&g);
            let mut sum = 0u64;
            for _ in 0..5 {
                let j = (rng.next() % g.hyperplane_count() as u64) as u32;
                let lam = 1 + rng.next() % 2;
                sum += lam;
                for pt in g.hyperplane_points(HyperplaneId(j)) {
                    target.entries[pt.0 as usize] = (target.entries[pt.0 as usize] + lam) % 3;
                }
            }
            match code.member(&target).unwrap() {
                Membership::Member(cert) => {
                    cert.verify(&g, &target).unwrap();
                    assert_eq!(cert.coefficient_sum(), sum % 3);
                }
                Membership::NotMember(_) => panic!("explicit combination rejected"),
            }
        }
    }

    #[test]
    fn codeword_line_sections_carry_the_coefficient_sum() {
        // for a 0/1 codeword with coefficient sum σ, every line meets the
        // support in σ mod p points
        let g = pg(2, 2, 3);
        let code = Code::new(Arc::clone(&g)).unwrap();
        let mut rng = XorShift(7);
        for _ in 0..10 {
            let mut target = CharVector::zero(&g);
            let mut ids = Vec::new();
            for _ in 0..3 {
                let j = (rng.next() % 85) as u32;
                if !ids.contains(&j) {
                    ids.push(j);
                }
            }
            for &j in &ids {
                for pt in g.hyperplane_points(HyperplaneId(j)) {
                    target.entries[pt.0 as usize] ^= 1;
                }
            }
            let sigma = (ids.len() % 2) as u64;
            match code.member(&target).unwrap() {
                Membership::Member(cert) => {
                    assert_eq!(cert.coefficient_sum(), sigma);
                }
                Membership::NotMember(_) => panic!("XOR of hyperplanes rejected"),
            }
            g.for_each_line(|l, pts| {
                let cnt: u64 = pts.iter().map(|&x| target.entries[x as usize]).sum();
                assert_eq!(cnt % 2, sigma, "line {l}");
            });
        }
    }

    #[test]
    fn hermitian_surface_certificate_restricts_exactly_to_every_plane() {
        let g = pg(2, 2, 3);
        let code = Code::new(Arc::clone(&g)).unwrap();
        let herm = HermitianForm::identity(&g).unwrap().variety(&g).unwrap();
        let v = CharVector::characteristic(&g, &herm).unwrap();
        let Membership::Member(cert) = code.member(&v).unwrap() else {
            panic!("Hermitian surface vector must be in the code");
        };
        cert.verify(&g, &v).unwrap();
        for j in 0..g.hyperplane_count() {
            let emb = Embedding::hyperplane_section(&g, HyperplaneId(j)).unwrap();
            let restricted = restrict_certificate(&g, &emb, &cert).unwrap();
            // the target downstairs is the section of the variety
            let entries: Vec<u64> = emb
                .point_images()
                .iter()
                .map(|&b| u64::from(herm.contains(PointId(b))))
                .collect();
            let target = CharVector::from_residues(emb.sub(), entries).unwrap();
            restricted.verify(emb.sub(), &target).unwrap();
            assert_eq!(restricted.coefficient_sum(), cert.coefficient_sum());
            let w = target.weight();
            assert!(w == 9 || w == 13, "plane {j} section has weight {w}");
        }
    }

    #[test]
    fn restricting_a_hyperplane_certificate_gives_the_meet_line() {
        let g = pg(2, 2, 3);
        let h0 = HyperplaneId(3);
        let cert = CodeCertificate::single(&g, h0).unwrap();
        let emb = Embedding::hyperplane_section(&g, HyperplaneId(40)).unwrap();
        let restricted = restrict_certificate(&g, &emb, &cert).unwrap();
        let entries: Vec<u64> = emb
            .point_images()
            .iter()
            .map(|&b| u64::from(g.incident(PointId(b), h0)))
            .collect();
        let target = CharVector::from_residues(emb.sub(), entries).unwrap();
        assert_eq!(target.weight(), 5); // a line of the section plane
        restricted.verify(emb.sub(), &target).unwrap();
        // restricting the section hyperplane itself spreads over the full pencil
        let own = CodeCertificate::single(&g, HyperplaneId(40)).unwrap();
        let spread = restrict_certificate(&g, &emb, &own).unwrap();
        assert_eq!(spread.support_size(), 21);
        let ones = CharVector::from_residues(emb.sub(), vec![1; 21]).unwrap();
        spread.verify(emb.sub(), &ones).unwrap();
    }

    #[test]
    fn malformed_certificates_are_integrity_errors() {
        let g = pg(2, 2, 3);
        let emb = Embedding::hyperplane_section(&g, HyperplaneId(0)).unwrap();
        let bogus = CodeCertificate {
            key: g.key(),
            p: 2,
            coefficients: [(400u32, 1u64)].into_iter().collect(),
        };
        assert!(matches!(
            restrict_certificate(&g, &emb, &bogus),
            Err(Error::Integrity(_))
        ));
        assert!(CodeCertificate::from_coefficients(&g, [(400, 1)].into_iter().collect()).is_err());
        assert!(CodeCertificate::from_coefficients(&g, [(3, 0)].into_iter().collect()).is_err());
        assert!(CodeCertificate::from_coefficients(&g, [(3, 2)].into_iter().collect()).is_err());
    }

    #[test]
    fn dual_line_residues_read_back_the_codeword() {
        // residue of the dual line at P = Σ λ_i over lines through P = v(P)
        for g in [pg(2, 2, 2), pg(3, 2, 2)] {
            let code = Code::new(Arc::clone(&g)).unwrap();
            let herm = HermitianForm::identity(&g).unwrap().variety(&g).unwrap();
            let v = CharVector::characteristic(&g, &herm).unwrap();
            let Membership::Member(cert) = code.member(&v).unwrap() else {
                panic!("Hermitian curve vector must be in the code");
            };
            let m = to_dual_multiset(&g, &cert).unwrap();
            for i in 0..g.point_count() {
                assert_eq!(
                    m.line_residue(HyperplaneId(i)),
                    v.entries[i as usize],
                    "point {i}"
                );
            }
        }
    }

    #[test]
    fn nonzero_secant_count_equals_codeword_weight() {
        let g = pg(2, 2, 2);
        let code = Code::new(Arc::clone(&g)).unwrap();
        let herm = HermitianForm::identity(&g).unwrap().variety(&g).unwrap();
        let v = CharVector::characteristic(&g, &herm).unwrap();
        let Membership::Member(cert) = code.member(&v).unwrap() else {
            panic!("not a codeword");
        };
        let m = to_dual_multiset(&g, &cert).unwrap();
        let (delta, per_point) = non_residue_secant_stats(&m, 0).unwrap();
        assert_eq!(delta, 9);
        // characteristic codeword: every non-0 secant is a 1 mod p secant
        for j in 0..m.dual().hyperplane_count() {
            let res = m.line_residue(HyperplaneId(j));
            assert!(res == 0 || res == 1);
        }
        let total: u64 = per_point.values().sum();
        assert_eq!(total, delta * 5);
        assert!(non_residue_secant_stats(&m, 2).is_err());
    }

    #[test]
    fn single_line_multiset_is_one_dual_point() {
        let g = pg(2, 2, 2);
        let cert = CodeCertificate::single(&g, HyperplaneId(13)).unwrap();
        let m = to_dual_multiset(&g, &cert).unwrap();
        assert_eq!(m.multiplicities().len(), 1);
        assert_eq!(m.multiplicity(PointId(13)), 1);
        // empty multiset: no non-0 secants
        let empty = CodeCertificate::from_coefficients(&g, BTreeMap::new()).unwrap();
        let me = to_dual_multiset(&g, &empty).unwrap();
        let (delta, per) = non_residue_secant_stats(&me, 0).unwrap();
        assert_eq!(delta, 0);
        assert!(per.is_empty());
        // and the operation refuses non-planes
        let g3 = pg(2, 2, 3);
        let c3 = CodeCertificate::single(&g3, HyperplaneId(0)).unwrap();
        assert!(to_dual_multiset(&g3, &c3).is_err());
    }

    #[test]
    fn kernel_dimension_bookkeeping() {
        let g = pg(2, 2, 2);
        let code = Code::new(Arc::clone(&g)).unwrap();
        // free coordinates of the row space = points - rank
        let n = g.point_count() as usize;
        assert_eq!(code.rank() + (n - code.rank()), n);
        // right kernel of the incidence matrix has dimension hyperplanes - rank
        let kern = code.ech.right_kernel_basis();
        assert_eq!(kern.len(), g.hyperplane_count() as usize - code.rank());
        // each kernel vector really is a relation among hyperplane vectors
        for v in &kern {
            let mut acc = vec![0u64; n];
            for (j, &lam) in v.iter().enumerate() {
                if lam == 0 {
                    continue;
                }
                for pt in g.hyperplane_points(HyperplaneId(j as u32)) {
                    acc[pt.0 as usize] = (acc[pt.0 as usize] + lam) % 2;
                }
            }
            assert!(acc.iter().all(|&x| x == 0));
            // relations have coefficient sum 0 mod p
            assert_eq!(v.iter().sum::<u64>() % 2, 0);
        }
    }

    #[test]
    fn oversized_geometries_are_refused() {
        let g = pg(2, 6, 2); // 4161 points, just past the dense limit
        assert!(matches!(rank_fp(&g), Err(Error::ResourceLimit(_))));
        assert!(matches!(
            FpMat::zeros(257, 4, 4),
            Err(Error::ResourceLimit(_))
        ));
    }
}
