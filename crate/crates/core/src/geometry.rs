//! Enumeration of PG(r,s) over a finite field: canonical points, lines and
//! hyperplanes with dense deterministic ids, plus incidence queries.
//!
//! Points are the normalized homogeneous vectors (leftmost nonzero coordinate 1);
//! ids follow the lexicographic order of the coordinate vectors, most significant
//! coordinate first, elements compared by integer encoding. Hyperplane j uses the
//! coordinate vector of point j as its covector, so both families share one id
//! scheme and the incidence matrix is symmetric. Everything downstream (cache
//! files, certificates, spectra) leans on these ids being reproducible.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{El, Field};

/// Hard cap on the number of points of a buildable geometry.
pub const MAX_POINTS: u64 = 1 << 21;
/// Hyperplane bitsets are materialized only up to this many points; beyond it
/// incidence queries fall back to evaluating the pairing.
const BITSET_LIMIT: u64 = 8192;
/// Lines are materialized for r <= 3 when the total point-id table stays below
/// this many entries; otherwise line scans enumerate reduced echelon bases lazily.
const LINE_STORE_LIMIT: u64 = 1 << 22;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct PointId(pub u32);

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct HyperplaneId(pub u32);

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct LineId(pub u32);

/// Identity of a geometry: field parameters and dimension. Objects derived from a
/// geometry carry this key so cross-geometry mixups are caught early.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct GeomKey {
    pub p: u64,
    pub h: u32,
    pub r: u32,
}

impl std::fmt::Display for GeomKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PG({},{}^{})", self.r, self.p, self.h)
    }
}

struct LineStore {
    pts_per_line: usize,
    /// line ids -> sorted point ids, flattened with stride pts_per_line.
    points: Vec<u32>,
    lines_per_point: usize,
    /// point ids -> line ids through it, flattened with stride lines_per_point.
    through: Vec<u32>,
}

pub struct Geometry {
    field: Arc<Field>,
    r: u32,
    n_points: u32,
    /// n_points rows of r+1 normalized coordinates, row-major, id order.
    coords: Vec<El>,
    /// (s^j) for j = 0..=r+1.
    s_pow: Vec<u64>,
    /// cnt[k] = number of points whose first nonzero coordinate sits right of k.
    rank_offset: Vec<u64>,
    /// Incidence bitsets, n_points rows of `words` u64 each; empty above BITSET_LIMIT.
    bits: Vec<u64>,
    words: usize,
    lines: Option<LineStore>,
}

impl Geometry {
    pub fn build(field: Arc<Field>, r: u32) -> Result<Geometry> {
        if r < 2 {
            return Err(Error::InvalidParameter(format!(
                "projective dimension {r} below 2"
            )));
        }
        let s = field.order();
        let n128 = ((s as u128).pow(r + 1) - 1) / (s as u128 - 1);
        if n128 > MAX_POINTS as u128 {
            return Err(Error::ResourceLimit(format!(
                "PG({r},{s}) has {n128} points, cap is {MAX_POINTS}"
            )));
        }
        let n_points = n128 as u32;
        let width = (r + 1) as usize;

        let mut s_pow = vec![1u64; width + 1];
        for j in 1..=width {
            s_pow[j] = s_pow[j - 1] * s;
        }
        // rank_offset[k] = (s^(r-k) - 1)/(s - 1)
        let rank_offset: Vec<u64> = (0..width)
            .map(|k| (s_pow[width - 1 - k] - 1) / (s - 1))
            .collect();

        // points in id order: first nonzero coordinate from the right end leftward,
        // then the tail digits ascending
        let mut coords = Vec::with_capacity(n_points as usize * width);
        for k in (0..width).rev() {
            let tails = s_pow[width - 1 - k];
            for t in 0..tails {
                for _ in 0..k {
                    coords.push(El::ZERO);
                }
                coords.push(El::ONE);
                for j in k + 1..width {
                    let digit = (t / s_pow[width - 1 - j]) % s;
                    coords.push(field.el(digit)?);
                }
            }
        }
        debug_assert_eq!(coords.len(), n_points as usize * width);

        let mut g = Geometry {
            field,
            r,
            n_points,
            coords,
            s_pow,
            rank_offset,
            bits: Vec::new(),
            words: 0,
            lines: None,
        };

        if (n_points as u64) <= BITSET_LIMIT {
            g.build_bitsets();
        }
        if r == 2 {
            // lines of a plane are its hyperplanes: reuse those ids exactly
            if !g.bits.is_empty() {
                g.rebuild_lines_from_bits()?;
            }
        } else if r == 3 {
            let n_lines = g.line_count();
            if n_lines * (s + 1) <= LINE_STORE_LIMIT {
                g.build_line_store()?;
            }
        }
        Ok(g)
    }

    fn build_bitsets(&mut self) {
        let n = self.n_points as usize;
        let words = n.div_ceil(64);
        let mut bits = vec![0u64; n * words];
        for i in 0..n {
            // pairing is symmetric in (i, j): fill both halves from one evaluation
            for j in i..n {
                if self.pairing(PointId(i as u32), PointId(j as u32)) == El::ZERO {
                    bits[i * words + j / 64] |= 1 << (j % 64);
                    bits[j * words + i / 64] |= 1 << (i % 64);
                }
            }
        }
        self.bits = bits;
        self.words = words;
    }

    fn build_line_store(&mut self) -> Result<()> {
        let s = self.field.order();
        let ppl = (s + 1) as usize;
        let n_lines = self.line_count() as usize;
        let mut points = Vec::with_capacity(n_lines * ppl);
        let mut through: Vec<Vec<u32>> = vec![Vec::new(); self.n_points as usize];
        let mut count = 0u32;
        self.enumerate_subspaces(2, |rows| {
            let ids = self.span_point_ids_2(rows);
            debug_assert_eq!(ids.len(), ppl);
            for &id in &ids {
                through[id as usize].push(count);
            }
            points.extend_from_slice(&ids);
            count += 1;
        });
        if count as usize != n_lines {
            return Err(Error::Integrity(format!(
                "line enumeration produced {count} lines, formula says {n_lines}"
            )));
        }
        let lpp = through[0].len();
        debug_assert!(through.iter().all(|v| v.len() == lpp));
        let mut flat = Vec::with_capacity(self.n_points as usize * lpp);
        for v in through {
            flat.extend_from_slice(&v);
        }
        self.lines = Some(LineStore {
            pts_per_line: ppl,
            points,
            lines_per_point: lpp,
            through: flat,
        });
        Ok(())
    }

    /// Sorted point ids of the span of a 2-row reduced echelon basis.
    fn span_point_ids_2(&self, rows: &[Vec<El>]) -> Vec<u32> {
        let s = self.field.order();
        let width = self.width();
        let mut ids = Vec::with_capacity(s as usize + 1);
        let mut buf = vec![El::ZERO; width];
        // coefficient vectors (0,1) and (1, b): every projective combination once
        ids.push(self.id_of_normalized(&rows[1]).0);
        for b in 0..s {
            let eb = self.field.el(b).unwrap();
            for k in 0..width {
                buf[k] = self
                    .field
                    .add(rows[0][k], self.field.mul(eb, rows[1][k]));
            }
            let norm = self.normalize(&buf).expect("span rows are independent");
            ids.push(self.id_of_normalized(&norm).0);
        }
        ids.sort_unstable();
        ids
    }

    #[inline]
    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    #[inline]
    pub fn r(&self) -> u32 {
        self.r
    }

    #[inline]
    fn width(&self) -> usize {
        (self.r + 1) as usize
    }

    #[inline]
    pub fn point_count(&self) -> u32 {
        self.n_points
    }

    #[inline]
    pub fn hyperplane_count(&self) -> u32 {
        self.n_points
    }

    pub fn key(&self) -> GeomKey {
        GeomKey {
            p: self.field.p(),
            h: self.field.h(),
            r: self.r,
        }
    }

    /// Number of lines, from the Gaussian coefficient [r+1 choose 2]_s.
    pub fn line_count(&self) -> u64 {
        let s = self.s_pow[1] as u128;
        let num = (s.pow(self.r + 1) - 1) * (s.pow(self.r) - 1);
        let den = (s * s - 1) * (s - 1);
        (num / den) as u64
    }

    pub fn point_coords(&self, p: PointId) -> &[El] {
        let w = self.width();
        &self.coords[p.0 as usize * w..(p.0 as usize + 1) * w]
    }

    /// The covector of hyperplane j is the coordinate vector of point j.
    pub fn hyperplane_covector(&self, h: HyperplaneId) -> &[El] {
        self.point_coords(PointId(h.0))
    }

    #[inline]
    pub fn pairing(&self, i: PointId, j: PointId) -> El {
        let w = self.width();
        let a = &self.coords[i.0 as usize * w..i.0 as usize * w + w];
        let b = &self.coords[j.0 as usize * w..j.0 as usize * w + w];
        let mut acc = El::ZERO;
        for k in 0..w {
            acc = self.field.add(acc, self.field.mul(a[k], b[k]));
        }
        acc
    }

    #[inline]
    pub fn incident(&self, p: PointId, h: HyperplaneId) -> bool {
        if !self.bits.is_empty() {
            let row = h.0 as usize * self.words;
            return self.bits[row + p.0 as usize / 64] >> (p.0 % 64) & 1 == 1;
        }
        self.pairing(p, PointId(h.0)) == El::ZERO
    }

    /// Bitset row of a hyperplane (points incident with it), when materialized.
    pub fn hyperplane_bits(&self, h: HyperplaneId) -> Option<&[u64]> {
        if self.bits.is_empty() {
            return None;
        }
        let row = h.0 as usize * self.words;
        Some(&self.bits[row..row + self.words])
    }

    pub fn hyperplane_points(&self, h: HyperplaneId) -> Vec<PointId> {
        match self.hyperplane_bits(h) {
            Some(row) => iter_bits(row).map(PointId).collect(),
            None => (0..self.n_points)
                .map(PointId)
                .filter(|&p| self.incident(p, h))
                .collect(),
        }
    }

    /// Normalizes a homogeneous vector so its leftmost nonzero entry is 1.
    pub fn normalize(&self, v: &[El]) -> Option<Vec<El>> {
        let k = v.iter().position(|&c| c != El::ZERO)?;
        let inv = self.field.inv(v[k]).expect("nonzero pivot");
        Some(
            v.iter()
                .map(|&c| self.field.mul(c, inv))
                .collect(),
        )
    }

    /// Dense id of a normalized coordinate vector, computed arithmetically.
    fn id_of_normalized(&self, v: &[El]) -> PointId {
        let width = self.width();
        debug_assert_eq!(v.len(), width);
        let k = v
            .iter()
            .position(|&c| c == El::ONE)
            .expect("normalized vector");
        debug_assert!(v[..k].iter().all(|&c| c == El::ZERO));
        let mut tail = 0u64;
        for j in k + 1..width {
            tail += v[j].index() * self.s_pow[width - 1 - j];
        }
        PointId((self.rank_offset[k] + tail) as u32)
    }

    /// Id of an arbitrary nonzero coordinate vector.
    pub fn point_from_coords(&self, v: &[El]) -> Result<PointId> {
        if v.len() != self.width() {
            return Err(Error::InvalidParameter(format!(
                "coordinate vector has length {}, expected {}",
                v.len(),
                self.width()
            )));
        }
        let norm = self
            .normalize(v)
            .ok_or_else(|| Error::InvalidParameter("zero coordinate vector".into()))?;
        Ok(self.id_of_normalized(&norm))
    }

    pub fn hyperplane_from_covector(&self, v: &[El]) -> Result<HyperplaneId> {
        Ok(HyperplaneId(self.point_from_coords(v)?.0))
    }

    // ---- line access ----

    pub fn has_line_store(&self) -> bool {
        self.lines.is_some()
    }

    pub fn line_points(&self, l: LineId) -> Option<&[u32]> {
        self.lines.as_ref().map(|st| {
            let i = l.0 as usize * st.pts_per_line;
            &st.points[i..i + st.pts_per_line]
        })
    }

    pub fn lines_through(&self, p: PointId) -> Option<&[u32]> {
        self.lines.as_ref().map(|st| {
            let i = p.0 as usize * st.lines_per_point;
            &st.through[i..i + st.lines_per_point]
        })
    }

    /// Visits every line as (index, sorted point ids), from the store when present
    /// and otherwise by lazy echelon-basis enumeration; one order, one id scheme.
    pub fn for_each_line<F: FnMut(u32, &[u32])>(&self, mut f: F) {
        if let Some(st) = &self.lines {
            for l in 0..st.points.len() / st.pts_per_line {
                f(l as u32, &st.points[l * st.pts_per_line..(l + 1) * st.pts_per_line]);
            }
            return;
        }
        let mut idx = 0u32;
        self.enumerate_subspaces(2, |rows| {
            let ids = self.span_point_ids_2(rows);
            f(idx, &ids);
            idx += 1;
        });
    }

    /// Visits every k-dimensional projective subspace (k+1 echelon rows) in a fixed
    /// deterministic order: pivot columns ascending lexicographically, then free
    /// entries counting up, last position fastest.
    pub fn enumerate_subspaces<F: FnMut(&[Vec<El>])>(&self, rows: usize, mut f: F) {
        let width = self.width();
        let s = self.field.order();
        debug_assert!(rows >= 1 && rows <= width);
        let mut pivots: Vec<usize> = (0..rows).collect();
        loop {
            // free positions of this pivot pattern, row-major
            let mut free: Vec<(usize, usize)> = Vec::new();
            for (a, &ja) in pivots.iter().enumerate() {
                for c in ja + 1..width {
                    if !pivots.contains(&c) {
                        free.push((a, c));
                    }
                }
            }
            let mut basis = vec![vec![El::ZERO; width]; rows];
            for (a, &ja) in pivots.iter().enumerate() {
                basis[a][ja] = El::ONE;
            }
            let mut counters = vec![0u64; free.len()];
            loop {
                f(&basis);
                // odometer increment
                let mut pos = free.len();
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    counters[pos] += 1;
                    if counters[pos] < s {
                        let (a, c) = free[pos];
                        basis[a][c] = self.field.el(counters[pos]).unwrap();
                        break;
                    }
                    counters[pos] = 0;
                    let (a, c) = free[pos];
                    basis[a][c] = El::ZERO;
                }
                if counters.iter().all(|&c| c == 0) {
                    break;
                }
            }
            // next pivot combination in lexicographic order
            let mut i = rows;
            loop {
                if i == 0 {
                    return;
                }
                i -= 1;
                if pivots[i] < width - rows + i {
                    pivots[i] += 1;
                    for j in i + 1..rows {
                        pivots[j] = pivots[i] + (j - i);
                    }
                    break;
                }
                if i == 0 {
                    return;
                }
            }
        }
    }

    // ---- subspaces ----

    /// Reduced echelon span of a set of points.
    pub fn span(&self, pts: &[PointId]) -> Result<Subspace> {
        let mut rows: Vec<Vec<El>> = Vec::new();
        for &p in pts {
            if p.0 >= self.n_points {
                return Err(Error::InvalidParameter(format!(
                    "point id {} out of range",
                    p.0
                )));
            }
            rows.push(self.point_coords(p).to_vec());
        }
        let rref = rref_rows(&self.field, rows);
        if rref.is_empty() {
            return Err(Error::InvalidParameter("empty span".into()));
        }
        Ok(Subspace { rows: rref })
    }

    pub fn subspace_points(&self, s: &Subspace) -> Vec<PointId> {
        let order = self.field.order();
        let k = s.rows.len();
        let width = self.width();
        let mut out = Vec::new();
        // normalized coefficient vectors over the basis rows, leading 1 first
        let mut combo = vec![El::ZERO; k];
        for lead in (0..k).rev() {
            let tails = order.pow((k - lead - 1) as u32);
            for t in 0..tails {
                for c in combo.iter_mut() {
                    *c = El::ZERO;
                }
                combo[lead] = El::ONE;
                let mut tt = t;
                for j in (lead + 1..k).rev() {
                    combo[j] = self.field.el(tt % order).unwrap();
                    tt /= order;
                }
                let mut v = vec![El::ZERO; width];
                for (ci, row) in combo.iter().zip(&s.rows) {
                    if *ci == El::ZERO {
                        continue;
                    }
                    for x in 0..width {
                        v[x] = self.field.add(v[x], self.field.mul(*ci, row[x]));
                    }
                }
                let norm = self.normalize(&v).expect("independent basis");
                out.push(self.id_of_normalized(&norm));
            }
        }
        out.sort_unstable();
        out
    }

    /// The s+1 hyperplanes through a codimension-2 subspace.
    pub fn hyperplanes_through(&self, sub: &Subspace) -> Result<Vec<HyperplaneId>> {
        if sub.dim() != self.r as usize - 2 {
            return Err(Error::InvalidParameter(format!(
                "subspace has dimension {}, codimension 2 needs {}",
                sub.dim(),
                self.r - 2
            )));
        }
        let kernel = self.covector_kernel(&sub.rows);
        debug_assert_eq!(kernel.len(), 2);
        let s = self.field.order();
        let mut out = Vec::with_capacity(s as usize + 1);
        let width = self.width();
        let mut buf = vec![El::ZERO; width];
        out.push(self.hyperplane_from_covector(&kernel[1])?);
        for b in 0..s {
            let eb = self.field.el(b)?;
            for x in 0..width {
                buf[x] = self
                    .field
                    .add(kernel[0][x], self.field.mul(eb, kernel[1][x]));
            }
            out.push(self.hyperplane_from_covector(&buf)?);
        }
        out.sort_unstable();
        out.dedup();
        if out.len() != s as usize + 1 {
            return Err(Error::Integrity("pencil covectors collided".into()));
        }
        Ok(out)
    }

    /// Reduced echelon basis (r rows) of the point space of a hyperplane.
    pub fn hyperplane_point_basis(&self, h: HyperplaneId) -> Vec<Vec<El>> {
        let cov = self.hyperplane_covector(h).to_vec();
        rref_rows(&self.field, self.covector_kernel(&[cov]))
    }

    /// Basis of the space of covectors vanishing on the row space of `rows`.
    fn covector_kernel(&self, rows: &[Vec<El>]) -> Vec<Vec<El>> {
        let width = self.width();
        let k = rows.len();
        // rows are already reduced echelon with known pivots
        let pivots: Vec<usize> = rows
            .iter()
            .map(|r| r.iter().position(|&c| c == El::ONE).unwrap())
            .collect();
        let mut kernel = Vec::new();
        for fcol in 0..width {
            if pivots.contains(&fcol) {
                continue;
            }
            // covector with 1 at fcol, pivot entries forced by orthogonality
            let mut v = vec![El::ZERO; width];
            v[fcol] = El::ONE;
            for a in 0..k {
                // row_a . v = 0  =>  v[pivot_a] = -row_a[fcol]
                v[pivots[a]] = self.field.neg(rows[a][fcol]);
            }
            kernel.push(v);
        }
        kernel
    }

    /// m = s^(r-2) + ... + s + 1, the number of planes through a line.
    pub fn planes_through_line_count(&self) -> Result<u64> {
        if self.r < 3 {
            return Err(Error::InvalidParameter(
                "planes through a line need r >= 3".into(),
            ));
        }
        let s = self.field.order();
        Ok((0..=self.r - 2).map(|j| s.pow(j)).sum())
    }

    /// The planes through a line, in ascending order of their smallest new point.
    pub fn planes_through_line(&self, line: &Subspace) -> Result<Vec<Subspace>> {
        if self.r < 3 {
            return Err(Error::InvalidParameter(
                "planes through a line need r >= 3".into(),
            ));
        }
        if line.dim() != 1 {
            return Err(Error::InvalidParameter(format!(
                "expected a line, got dimension {}",
                line.dim()
            )));
        }
        let mut seen = vec![false; self.n_points as usize];
        for p in self.subspace_points(line) {
            seen[p.0 as usize] = true;
        }
        let mut out = Vec::new();
        for q in 0..self.n_points {
            if seen[q as usize] {
                continue;
            }
            let mut rows = line.rows.clone();
            rows.push(self.point_coords(PointId(q)).to_vec());
            let plane = Subspace {
                rows: rref_rows(&self.field, rows),
            };
            for p in self.subspace_points(&plane) {
                seen[p.0 as usize] = true;
            }
            out.push(plane);
        }
        Ok(out)
    }

    /// Swaps the roles of points and lines of a plane: incidence is transposed.
    pub fn dual_plane(&self) -> Result<Geometry> {
        if self.r != 2 {
            return Err(Error::InvalidParameter(
                "dual construction applies to planes only".into(),
            ));
        }
        if self.bits.is_empty() {
            return Err(Error::ResourceLimit(
                "plane too large for materialized incidence; no dual".into(),
            ));
        }
        let n = self.n_points as usize;
        let words = self.words;
        let mut bits = vec![0u64; self.bits.len()];
        for i in 0..n {
            for j in iter_bits(&self.bits[i * words..(i + 1) * words]) {
                bits[j as usize * words + i / 64] |= 1 << (i % 64);
            }
        }
        let mut dual = Geometry {
            field: Arc::clone(&self.field),
            r: self.r,
            n_points: self.n_points,
            coords: self.coords.clone(),
            s_pow: self.s_pow.clone(),
            rank_offset: self.rank_offset.clone(),
            bits,
            words,
            lines: None,
        };
        dual.rebuild_lines_from_bits()?;
        Ok(dual)
    }

    /// Line store of a plane straight from its hyperplane bitsets (r = 2 only,
    /// where lines and hyperplanes coincide and line id = hyperplane id).
    fn rebuild_lines_from_bits(&mut self) -> Result<()> {
        let s = self.field.order();
        let ppl = (s + 1) as usize;
        let n = self.n_points as usize;
        let mut points = Vec::with_capacity(n * ppl);
        let mut through: Vec<Vec<u32>> = vec![Vec::new(); n];
        for l in 0..n {
            let row = &self.bits[l * self.words..(l + 1) * self.words];
            let ids: Vec<u32> = iter_bits(row).collect();
            if ids.len() != ppl {
                return Err(Error::Integrity(format!(
                    "dual line {l} has {} points, expected {ppl}",
                    ids.len()
                )));
            }
            for &p in &ids {
                through[p as usize].push(l as u32);
            }
            points.extend_from_slice(&ids);
        }
        let lpp = through[0].len();
        let mut flat = Vec::with_capacity(n * lpp);
        for v in through {
            if v.len() != lpp {
                return Err(Error::Integrity("uneven dual pencils".into()));
            }
            flat.extend_from_slice(&v);
        }
        self.lines = Some(LineStore {
            pts_per_line: ppl,
            points,
            lines_per_point: lpp,
            through: flat,
        });
        Ok(())
    }
}

/// Iterates set bit positions of a packed word slice, ascending.
pub fn iter_bits(words: &[u64]) -> impl Iterator<Item = u32> + '_ {
    words.iter().enumerate().flat_map(|(wi, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                return None;
            }
            let b = w.trailing_zeros();
            w &= w - 1;
            Some(wi as u32 * 64 + b)
        })
    })
}

pub fn popcount_and(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(&x, &y)| (x & y).count_ones()).sum()
}

/// Projective subspace held as a reduced echelon basis; equality of row sets is
/// equality of subspaces.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Subspace {
    rows: Vec<Vec<El>>,
}

impl Subspace {
    /// Projective dimension: number of basis rows minus one.
    pub fn dim(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn basis_rows(&self) -> &[Vec<El>] {
        &self.rows
    }

    pub fn kind(&self, r: u32) -> &'static str {
        match self.dim() {
            1 => "line",
            2 => "plane",
            d if d == r as usize - 1 => "hyperplane",
            _ => "general",
        }
    }

    pub fn contains(&self, g: &Geometry, p: PointId) -> bool {
        let mut v = g.point_coords(p).to_vec();
        reduce_row(g.field(), &self.rows, &mut v);
        v.iter().all(|&c| c == El::ZERO)
    }
}

/// Reduced row echelon form over the field; dependent rows dropped, rows ordered
/// by pivot column.
pub fn rref_rows(field: &Field, rows: Vec<Vec<El>>) -> Vec<Vec<El>> {
    let mut basis: Vec<Vec<El>> = Vec::new();
    for mut row in rows {
        reduce_row(field, &basis, &mut row);
        if let Some(k) = row.iter().position(|&c| c != El::ZERO) {
            let inv = field.inv(row[k]).unwrap();
            for c in row.iter_mut() {
                *c = field.mul(*c, inv);
            }
            // clear column k in the existing basis to keep the form reduced
            for b in basis.iter_mut() {
                if b[k] != El::ZERO {
                    let f = b[k];
                    for (bc, rc) in b.iter_mut().zip(&row) {
                        *bc = field.sub(*bc, field.mul(f, *rc));
                    }
                }
            }
            basis.push(row);
            basis.sort_by_key(|r| r.iter().position(|&c| c != El::ZERO));
        }
    }
    basis
}

fn reduce_row(field: &Field, basis: &[Vec<El>], row: &mut [El]) {
    for b in basis {
        let k = b.iter().position(|&c| c != El::ZERO).unwrap();
        if row[k] != El::ZERO {
            let f = row[k];
            for (rc, bc) in row.iter_mut().zip(b) {
                *rc = field.sub(*rc, field.mul(f, *bc));
            }
        }
    }
}

/// Set of points of one geometry, stored both packed and as a sorted member list.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PointSet {
    key: GeomKey,
    n_points: u32,
    bits: Vec<u64>,
    members: Vec<u32>,
}

impl PointSet {
    pub fn from_members(g: &Geometry, pts: &[PointId]) -> Result<PointSet> {
        let mut members: Vec<u32> = Vec::with_capacity(pts.len());
        for &p in pts {
            if p.0 >= g.point_count() {
                return Err(Error::InvalidParameter(format!(
                    "point id {} out of range for {}",
                    p.0,
                    g.key()
                )));
            }
            members.push(p.0);
        }
        members.sort_unstable();
        members.dedup();
        let words = (g.point_count() as usize).div_ceil(64);
        let mut bits = vec![0u64; words];
        for &m in &members {
            bits[m as usize / 64] |= 1 << (m % 64);
        }
        Ok(PointSet {
            key: g.key(),
            n_points: g.point_count(),
            bits,
            members,
        })
    }

    pub fn key(&self) -> GeomKey {
        self.key
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    #[inline]
    pub fn contains(&self, p: PointId) -> bool {
        self.bits[p.0 as usize / 64] >> (p.0 % 64) & 1 == 1
    }

    pub fn members(&self) -> impl Iterator<Item = PointId> + '_ {
        self.members.iter().map(|&m| PointId(m))
    }

    pub fn member_ids(&self) -> &[u32] {
        &self.members
    }

    pub fn bits(&self) -> &[u64] {
        &self.bits
    }

    pub fn complement(&self, g: &Geometry) -> Result<PointSet> {
        check_same_geometry(g, self)?;
        let all: Vec<PointId> = (0..g.point_count())
            .map(PointId)
            .filter(|&p| !self.contains(p))
            .collect();
        PointSet::from_members(g, &all)
    }
}

pub fn check_same_geometry(g: &Geometry, s: &PointSet) -> Result<()> {
    if g.key() != s.key || g.point_count() != s.n_points {
        return Err(Error::GeometryMismatch(format!(
            "point set belongs to {} with {} points, geometry is {} with {}",
            s.key,
            s.n_points,
            g.key(),
            g.point_count()
        )));
    }
    Ok(())
}

/// Identification of a hyperplane of PG(r,s) with its own PG(r-1,s): a point
/// of the section geometry with coordinates y maps to Σ y_k b_k over the
/// echelon basis rows b_k of the hyperplane.
pub struct Embedding {
    hid: HyperplaneId,
    sub: Arc<Geometry>,
    basis: Vec<Vec<El>>,
    to_big: Vec<u32>,
}

impl Embedding {
    pub fn hyperplane_section(big: &Geometry, hid: HyperplaneId) -> Result<Embedding> {
        if big.r() < 3 {
            return Err(Error::InvalidParameter(
                "hyperplane sections need r >= 3; a plane's hyperplanes are lines".into(),
            ));
        }
        if hid.0 >= big.hyperplane_count() {
            return Err(Error::InvalidParameter(format!(
                "hyperplane id {} out of range for {}",
                hid.0,
                big.key()
            )));
        }
        let basis = big.hyperplane_point_basis(hid);
        let sub = Arc::new(Geometry::build(Arc::clone(big.field()), big.r() - 1)?);
        let f = big.field();
        let width = (big.r() + 1) as usize;
        let mut to_big = Vec::with_capacity(sub.point_count() as usize);
        for i in 0..sub.point_count() {
            let y = sub.point_coords(PointId(i));
            let mut x = vec![El::ZERO; width];
            for (k, row) in basis.iter().enumerate() {
                if y[k] == El::ZERO {
                    continue;
                }
                for (xc, &rc) in x.iter_mut().zip(row) {
                    *xc = f.add(*xc, f.mul(y[k], rc));
                }
            }
            let b = big.point_from_coords(&x)?;
            if !big.incident(b, hid) {
                return Err(Error::Integrity(format!(
                    "section image {} escapes hyperplane {}",
                    b.0, hid.0
                )));
            }
            to_big.push(b.0);
        }
        let mut sorted = to_big.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != to_big.len() {
            return Err(Error::Integrity("hyperplane section map collided".into()));
        }
        Ok(Embedding {
            hid,
            sub,
            basis,
            to_big,
        })
    }

    pub fn hyperplane(&self) -> HyperplaneId {
        self.hid
    }

    pub fn sub(&self) -> &Arc<Geometry> {
        &self.sub
    }

    /// Image of a section point in the ambient geometry.
    pub fn big_point(&self, p: PointId) -> PointId {
        PointId(self.to_big[p.0 as usize])
    }

    pub fn point_images(&self) -> &[u32] {
        &self.to_big
    }

    /// Trace of an ambient hyperplane h ≠ the section hyperplane: the section
    /// hyperplane with point set h ∩ section.
    pub fn sub_hyperplane(&self, big: &Geometry, h: HyperplaneId) -> Result<HyperplaneId> {
        if h == self.hid {
            return Err(Error::InvalidParameter(
                "the section hyperplane leaves no trace on itself".into(),
            ));
        }
        let f = big.field();
        let c = big.hyperplane_covector(h);
        let d: Vec<El> = self
            .basis
            .iter()
            .map(|row| {
                row.iter()
                    .zip(c)
                    .fold(El::ZERO, |acc, (&rc, &cc)| f.add(acc, f.mul(rc, cc)))
            })
            .collect();
        self.sub.hyperplane_from_covector(&d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pg(p: u64, h: u32, r: u32) -> Geometry {
        Geometry::build(Arc::new(Field::build(p, h).unwrap()), r).unwrap()
    }

    #[test]
    fn pg24_counts() {
        let g = pg(2, 2, 2);
        assert_eq!(g.point_count(), 21);
        assert_eq!(g.hyperplane_count(), 21);
        assert_eq!(g.line_count(), 21);
        g.for_each_line(|_, pts| assert_eq!(pts.len(), 5));
    }

    #[test]
    fn pg34_counts() {
        let g = pg(2, 2, 3);
        assert_eq!(g.point_count(), 85);
        assert_eq!(g.hyperplane_count(), 85);
        assert_eq!(g.line_count(), 357);
        let mut n = 0;
        g.for_each_line(|_, pts| {
            assert_eq!(pts.len(), 5);
            n += 1;
        });
        assert_eq!(n, 357);
    }

    #[test]
    fn pg39_and_pg44_point_counts() {
        assert_eq!(pg(3, 2, 3).point_count(), 820);
        assert_eq!(pg(2, 2, 4).point_count(), 341);
        assert_eq!(pg(5, 2, 2).point_count(), 651);
    }

    #[test]
    fn ids_follow_coordinate_order_and_roundtrip() {
        let g = pg(2, 2, 3);
        // id 0 is (0,0,0,1); the last id is (1, w+1, w+1, w+1) in encoding order
        let first = g.point_coords(PointId(0));
        assert!(first[..3].iter().all(|&c| c == El::ZERO));
        assert_eq!(first[3], El::ONE);
        for i in 0..g.point_count() {
            let v = g.point_coords(PointId(i)).to_vec();
            assert_eq!(g.point_from_coords(&v).unwrap(), PointId(i));
        }
        // scaling a representative does not change the id
        let f = g.field().clone();
        let w = f.el(2).unwrap();
        let scaled: Vec<El> = g
            .point_coords(PointId(40))
            .iter()
            .map(|&c| f.mul(c, w))
            .collect();
        assert_eq!(g.point_from_coords(&scaled).unwrap(), PointId(40));
    }

    #[test]
    fn incidence_is_symmetric_and_hyperplanes_have_the_right_size() {
        let g = pg(2, 2, 3);
        let expected = 21; // (s^r - 1)/(s - 1) with s = 4, r = 3
        for j in 0..g.hyperplane_count() {
            let pts = g.hyperplane_points(HyperplaneId(j));
            assert_eq!(pts.len(), expected);
            for &p in &pts {
                assert!(g.incident(p, HyperplaneId(j)));
                assert!(g.incident(PointId(j), HyperplaneId(p.0)));
            }
        }
    }

    #[test]
    fn two_points_span_one_line_exhaustive_pg24() {
        let g = pg(2, 2, 2);
        let n = g.point_count();
        let mut on_common_line = vec![0u32; (n * n) as usize];
        g.for_each_line(|_, pts| {
            for (a, &x) in pts.iter().enumerate() {
                for &y in &pts[a + 1..] {
                    on_common_line[(x * n + y) as usize] += 1;
                }
            }
        });
        for x in 0..n {
            for y in x + 1..n {
                assert_eq!(on_common_line[(x * n + y) as usize], 1, "pair {x},{y}");
            }
        }
    }

    #[test]
    fn two_hyperplanes_meet_in_codim_two_sampled() {
        let g = pg(2, 2, 3);
        for (a, b) in [(0u32, 1u32), (3, 80), (17, 44), (84, 2)] {
            let pa = g.hyperplane_points(HyperplaneId(a));
            let common: Vec<PointId> = pa
                .into_iter()
                .filter(|&p| g.incident(p, HyperplaneId(b)))
                .collect();
            assert_eq!(common.len(), 5); // a line of PG(3,4)
            let sub = g.span(&common).unwrap();
            assert_eq!(sub.dim(), 1);
        }
    }

    #[test]
    fn hyperplane_double_counting() {
        for g in [pg(2, 2, 2), pg(2, 2, 3), pg(3, 2, 2)] {
            let total: u64 = (0..g.hyperplane_count())
                .map(|j| g.hyperplane_points(HyperplaneId(j)).len() as u64)
                .sum();
            let s = g.field().order();
            let through_point: u64 = (0..g.r()).map(|j| s.pow(j)).sum();
            assert_eq!(total, g.point_count() as u64 * through_point);
        }
    }

    #[test]
    fn pencils_have_order_plus_one_members() {
        // PG(3,4): codim 2 is a line, pencil of 5 planes
        let g = pg(2, 2, 3);
        let line = g.span(&[PointId(0), PointId(1)]).unwrap();
        let pencil = g.hyperplanes_through(&line).unwrap();
        assert_eq!(pencil.len(), 5);
        for h in &pencil {
            for p in g.subspace_points(&line) {
                assert!(g.incident(p, *h));
            }
        }
        // PG(2,4): codim 2 is a point, pencil of 5 lines
        let g2 = pg(2, 2, 2);
        let pt = g2.span(&[PointId(7)]).unwrap();
        let pencil2 = g2.hyperplanes_through(&pt).unwrap();
        assert_eq!(pencil2.len(), 5);
        // PG(4,4): codim 2 is a plane, pencil of 5 hyperplanes
        let g4 = pg(2, 2, 4);
        let plane = g4
            .span(&[PointId(0), PointId(1), PointId(5)])
            .unwrap();
        assert_eq!(plane.dim(), 2);
        assert_eq!(g4.hyperplanes_through(&plane).unwrap().len(), 5);
        // wrong codimension is rejected
        assert!(g.hyperplanes_through(&g.span(&[PointId(3)]).unwrap()).is_err());
    }

    #[test]
    fn planes_through_line_counts() {
        assert_eq!(pg(2, 2, 3).planes_through_line_count().unwrap(), 5);
        assert_eq!(pg(2, 2, 4).planes_through_line_count().unwrap(), 21);
        assert_eq!(pg(3, 2, 3).planes_through_line_count().unwrap(), 10);
        assert!(pg(2, 2, 2).planes_through_line_count().is_err());
    }

    #[test]
    fn planes_through_line_partition_the_space() {
        let g = pg(2, 2, 3);
        let line = g.span(&[PointId(12), PointId(30)]).unwrap();
        let planes = g.planes_through_line(&line).unwrap();
        assert_eq!(planes.len(), 5);
        let line_pts = g.subspace_points(&line);
        let mut covered = vec![0u32; g.point_count() as usize];
        for pl in &planes {
            let pts = g.subspace_points(pl);
            assert_eq!(pts.len(), 21);
            for p in &line_pts {
                assert!(pl.contains(&g, *p));
            }
            for p in pts {
                covered[p.0 as usize] += 1;
            }
        }
        for i in 0..g.point_count() {
            let on_line = line_pts.contains(&PointId(i));
            assert_eq!(covered[i as usize], if on_line { 5 } else { 1 });
        }
    }

    #[test]
    fn lazy_line_enumeration_matches_store() {
        // same geometry parameters, with and without a store: r = 4 has none
        let g4 = pg(2, 2, 4);
        assert!(!g4.has_line_store());
        let mut n = 0u64;
        let mut sizes_ok = true;
        g4.for_each_line(|_, pts| {
            n += 1;
            sizes_ok &= pts.len() == 5;
        });
        assert_eq!(n, g4.line_count());
        assert!(sizes_ok);
        assert_eq!(n, 5797); // [5 choose 2]_4
    }

    #[test]
    fn dual_plane_transposes_incidence() {
        let g = pg(2, 2, 2);
        let d = g.dual_plane().unwrap();
        assert_eq!(d.point_count(), 21);
        for i in 0..21u32 {
            for j in 0..21u32 {
                assert_eq!(
                    d.incident(PointId(i), HyperplaneId(j)),
                    g.incident(PointId(j), HyperplaneId(i))
                );
            }
        }
        let dd = d.dual_plane().unwrap();
        for i in 0..21u32 {
            for j in 0..21u32 {
                assert_eq!(
                    dd.incident(PointId(i), HyperplaneId(j)),
                    g.incident(PointId(i), HyperplaneId(j))
                );
            }
        }
        assert!(pg(2, 2, 3).dual_plane().is_err());
    }

    #[test]
    fn determinism_two_builds_identical() {
        let a = pg(3, 2, 3);
        let b = pg(3, 2, 3);
        assert_eq!(a.coords, b.coords);
        assert_eq!(a.bits, b.bits);
        let (la, lb) = (a.lines.as_ref().unwrap(), b.lines.as_ref().unwrap());
        assert_eq!(la.points, lb.points);
        assert_eq!(la.through, lb.through);
    }

    #[test]
    fn build_rejects_small_r_and_huge_spaces() {
        let f = Arc::new(Field::build(2, 2).unwrap());
        assert!(matches!(
            Geometry::build(Arc::clone(&f), 1),
            Err(Error::InvalidParameter(_))
        ));
        let big = Arc::new(Field::build(2, 8).unwrap());
        // PG(4,256) has ~4.3e9 points
        assert!(matches!(
            Geometry::build(big, 4),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn point_sets_validate_and_complement() {
        let g = pg(2, 2, 2);
        let s = PointSet::from_members(&g, &[PointId(1), PointId(5), PointId(1)]).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.contains(PointId(5)));
        let c = s.complement(&g).unwrap();
        assert_eq!(c.len(), 19);
        assert!(!c.contains(PointId(5)));
        assert!(PointSet::from_members(&g, &[PointId(21)]).is_err());
        let other = pg(2, 2, 3);
        assert!(check_same_geometry(&other, &s).is_err());
    }

    #[test]
    fn subspace_span_and_membership() {
        let g = pg(2, 2, 3);
        let line = g.span(&[PointId(4), PointId(9)]).unwrap();
        assert_eq!(line.dim(), 1);
        let pts = g.subspace_points(&line);
        assert_eq!(pts.len(), 5);
        for p in &pts {
            assert!(line.contains(&g, *p));
        }
        let off = (0..g.point_count())
            .map(PointId)
            .find(|p| !pts.contains(p))
            .unwrap();
        assert!(!line.contains(&g, off));
        // span is independent of the generating set
        let again = g.span(&[pts[2], pts[0], pts[4]]).unwrap();
        assert_eq!(line, again);
    }

    #[test]
    fn hyperplane_section_bijects_onto_the_hyperplane() {
        let g = pg(2, 2, 3);
        for hid in [HyperplaneId(0), HyperplaneId(37), HyperplaneId(84)] {
            let emb = Embedding::hyperplane_section(&g, hid).unwrap();
            assert_eq!(emb.sub().point_count(), 21);
            let mut images: Vec<u32> = emb.point_images().to_vec();
            images.sort_unstable();
            let expect: Vec<u32> = g.hyperplane_points(hid).iter().map(|p| p.0).collect();
            assert_eq!(images, expect);
        }
        assert!(Embedding::hyperplane_section(&pg(2, 2, 2), HyperplaneId(0)).is_err());
        assert!(Embedding::hyperplane_section(&g, HyperplaneId(85)).is_err());
    }

    #[test]
    fn section_traces_agree_with_set_intersections() {
        let g = pg(2, 2, 3);
        let hid = HyperplaneId(11);
        let emb = Embedding::hyperplane_section(&g, hid).unwrap();
        assert!(emb.sub_hyperplane(&g, hid).is_err());
        for j in 0..g.hyperplane_count() {
            let h = HyperplaneId(j);
            if h == hid {
                continue;
            }
            let trace = emb.sub_hyperplane(&g, h).unwrap();
            // section point on the trace iff its image lies on h
            for i in 0..emb.sub().point_count() {
                let sp = PointId(i);
                assert_eq!(
                    emb.sub().incident(sp, trace),
                    g.incident(emb.big_point(sp), h),
                    "hyperplane {j}, section point {i}"
                );
            }
        }
    }
}
