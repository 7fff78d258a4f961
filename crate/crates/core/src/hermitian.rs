//! Hermitian varieties H(r,q²), the polarity behind them, singular cones
//! Pi_d H', and the exact closed forms for their sizes and hyperplane
//! intersection numbers.
//!
//! All closed forms run in big-integer arithmetic; machine words are never
//! trusted for formula evaluation, only for indexing.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::field::{prime_power_split, El, Field};
use crate::geometry::{Geometry, HyperplaneId, PointId, PointSet, Subspace};

fn bigpow(q: u64, e: u32) -> BigInt {
    BigInt::from(q).pow(e)
}

fn sign(k: u32) -> BigInt {
    if k % 2 == 0 {
        BigInt::one()
    } else {
        -BigInt::one()
    }
}

fn exact_div(num: BigInt, den: &BigInt, what: &str) -> Result<BigInt> {
    let (d, rem) = num_integer::Integer::div_rem(&num, den);
    if !rem.is_zero() {
        return Err(Error::Integrity(format!("{what} is not integral")));
    }
    Ok(d)
}

fn validate_rq(r: u32, q: u64) -> Result<()> {
    if r < 2 {
        return Err(Error::InvalidParameter(format!("dimension {r} below 2")));
    }
    if r > 16 || q > 1 << 16 {
        return Err(Error::ResourceLimit(format!(
            "parameters ({r},{q}) beyond the supported r <= 16, q <= 2^16"
        )));
    }
    if prime_power_split(q).is_none() {
        return Err(Error::InvalidParameter(format!("{q} is not a prime power")));
    }
    Ok(())
}

/// |H(r,q²)| = (q^(r+1) + (-1)^r)(q^r - (-1)^r) / (q² - 1).
pub fn hermitian_size(r: u32, q: u64) -> Result<BigUint> {
    validate_rq(r, q)?;
    let s = sign(r);
    let num = (bigpow(q, r + 1) + &s) * (bigpow(q, r) - &s);
    let den = bigpow(q, 2) - BigInt::one();
    let v = exact_div(num, &den, "Hermitian size")?;
    Ok(v.to_biguint().expect("size is positive"))
}

/// Intersection sizes of H(r,q²) with non-tangent and tangent hyperplanes.
///
/// non-tangent: (q^r + (-1)^(r-1))(q^(r-1) - (-1)^(r-1)) / (q² - 1)
/// tangent:     1 + q²(q^(r-1) + (-1)^r)(q^(r-2) - (-1)^r) / (q² - 1)
pub fn hermitian_hyperplane_numbers(r: u32, q: u64) -> Result<(BigUint, BigUint)> {
    validate_rq(r, q)?;
    let den = bigpow(q, 2) - BigInt::one();
    let s1 = sign(r - 1);
    let non_tangent = exact_div(
        (bigpow(q, r) + &s1) * (bigpow(q, r - 1) - &s1),
        &den,
        "non-tangent number",
    )?;
    let s0 = sign(r);
    let tangent = BigInt::one()
        + exact_div(
            bigpow(q, 2) * (bigpow(q, r - 1) + &s0) * (bigpow(q, r - 2) - &s0),
            &den,
            "tangent number",
        )?;
    Ok((
        non_tangent.to_biguint().expect("positive"),
        tangent.to_biguint().expect("positive"),
    ))
}

/// Size of the cone with vertex Pi_d over a non-singular H(r-d-1,q²):
/// q^(2(d+1)) |H(r-d-1,q²)| + |PG(d,q²)|. The base must itself be a
/// non-singular Hermitian variety, which needs r - d - 1 >= 2, i.e. d <= r-3;
/// d = r-2 would degenerate the base to a subline and is rejected.
pub fn singular_size(r: u32, q: u64, d: u32) -> Result<BigUint> {
    validate_rq(r, q)?;
    if d + 3 > r {
        return Err(Error::InvalidParameter(format!(
            "vertex dimension {d} out of range 0..={} for r = {r}",
            r as i64 - 3
        )));
    }
    let base = BigInt::from(hermitian_size(r - d - 1, q)?);
    let q2 = bigpow(q, 2);
    let mut vertex_points = BigInt::zero();
    for j in 0..=d {
        vertex_points += q2.pow(j);
    }
    let total = q2.pow(d + 1) * base + vertex_points;
    Ok(total.to_biguint().expect("positive"))
}

/// Hermitian form on PG(r,q²): a conjugate-symmetric matrix over GF(q²).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HermitianForm {
    width: usize,
    m: Vec<El>,
}

impl HermitianForm {
    /// The identity form, sum of x_i^(q+1).
    pub fn identity(g: &Geometry) -> Result<HermitianForm> {
        let w = (g.r() + 1) as usize;
        let mut m = vec![El::ZERO; w * w];
        for i in 0..w {
            m[i * w + i] = El::ONE;
        }
        HermitianForm::new(g, m)
    }

    /// Validates conjugate symmetry: entry (i,j) = conjugate of entry (j,i).
    pub fn new(g: &Geometry, m: Vec<El>) -> Result<HermitianForm> {
        let f = g.field();
        let q = f.square_root_of_order().ok_or_else(|| {
            Error::InvalidParameter(format!(
                "field of order {} is not a square; no Hermitian forms",
                f.order()
            ))
        })?;
        let w = (g.r() + 1) as usize;
        if m.len() != w * w {
            return Err(Error::InvalidParameter(format!(
                "form matrix has {} entries, expected {}",
                m.len(),
                w * w
            )));
        }
        for i in 0..w {
            for j in 0..w {
                if m[i * w + j] != f.conjugate(m[j * w + i], q)? {
                    return Err(Error::InvalidParameter(format!(
                        "matrix is not Hermitian at entry ({i},{j})"
                    )));
                }
            }
        }
        Ok(HermitianForm { width: w, m })
    }

    pub fn matrix(&self) -> &[El] {
        &self.m
    }

    /// Determinant over GF(q²); the form is non-singular iff this is nonzero.
    pub fn determinant(&self, field: &Field) -> El {
        let w = self.width;
        let mut a = self.m.clone();
        let mut det = El::ONE;
        for col in 0..w {
            let pivot = (col..w).find(|&row| a[row * w + col] != El::ZERO);
            let Some(pr) = pivot else { return El::ZERO };
            if pr != col {
                for k in 0..w {
                    a.swap(pr * w + k, col * w + k);
                }
                det = field.neg(det);
            }
            let pv = a[col * w + col];
            det = field.mul(det, pv);
            let inv = field.inv(pv).expect("pivot nonzero");
            for row in col + 1..w {
                let factor = field.mul(a[row * w + col], inv);
                if factor == El::ZERO {
                    continue;
                }
                for k in col..w {
                    let sub = field.mul(factor, a[col * w + k]);
                    a[row * w + k] = field.sub(a[row * w + k], sub);
                }
            }
        }
        det
    }

    pub fn is_nonsingular(&self, field: &Field) -> bool {
        self.determinant(field) != El::ZERO
    }

    /// conj(x)^T M x, always an element of the subfield F_q.
    pub fn evaluate(&self, g: &Geometry, p: PointId) -> El {
        let f = g.field();
        let w = self.width;
        let x = g.point_coords(p);
        let mut acc = El::ZERO;
        for i in 0..w {
            if x[i] == El::ZERO {
                continue;
            }
            let ci = f.conj(x[i]);
            let mut row = El::ZERO;
            for j in 0..w {
                row = f.add(row, f.mul(self.m[i * w + j], x[j]));
            }
            acc = f.add(acc, f.mul(ci, row));
        }
        acc
    }

    /// Covector of the polar hyperplane of P: conj(P)^T M.
    fn polar_covector(&self, g: &Geometry, p: PointId) -> Vec<El> {
        let f = g.field();
        let w = self.width;
        let x = g.point_coords(p);
        let mut c = vec![El::ZERO; w];
        for j in 0..w {
            let mut acc = El::ZERO;
            for i in 0..w {
                acc = f.add(acc, f.mul(f.conj(x[i]), self.m[i * w + j]));
            }
            c[j] = acc;
        }
        c
    }

    /// The polar hyperplane of a point. P is absolute iff P lies on it.
    pub fn polar_hyperplane(&self, g: &Geometry, p: PointId) -> Result<HyperplaneId> {
        g.hyperplane_from_covector(&self.polar_covector(g, p))
    }

    /// The pole of a hyperplane: the point whose polar it is.
    pub fn pole(&self, g: &Geometry, hid: HyperplaneId) -> Result<PointId> {
        let f = g.field();
        let w = self.width;
        let c = g.hyperplane_covector(hid).to_vec();
        // solve y M = c, i.e. M^T y^T = c^T, then P = conj(y)
        let mut aug: Vec<Vec<El>> = (0..w)
            .map(|row| {
                let mut v: Vec<El> = (0..w).map(|col| self.m[col * w + row]).collect();
                v.push(c[row]);
                v
            })
            .collect();
        // Gaussian elimination with the augmented column
        let mut piv_rows: Vec<usize> = Vec::new();
        let mut col = 0;
        let mut row = 0;
        while col < w && row < w {
            if let Some(pr) = (row..w).find(|&rr| aug[rr][col] != El::ZERO) {
                aug.swap(pr, row);
                let inv = f.inv(aug[row][col]).unwrap();
                for k in col..=w {
                    aug[row][k] = f.mul(aug[row][k], inv);
                }
                for rr in 0..w {
                    if rr != row && aug[rr][col] != El::ZERO {
                        let factor = aug[rr][col];
                        for k in col..=w {
                            let sub = f.mul(factor, aug[row][k]);
                            aug[rr][k] = f.sub(aug[rr][k], sub);
                        }
                    }
                }
                piv_rows.push(col);
                row += 1;
            }
            col += 1;
        }
        if row < w {
            return Err(Error::InvalidParameter(
                "form is singular; hyperplane has no unique pole".into(),
            ));
        }
        let mut y = vec![El::ZERO; w];
        for (rr, &pc) in piv_rows.iter().enumerate() {
            y[pc] = aug[rr][w];
        }
        let conj_y: Vec<El> = y.iter().map(|&v| f.conj(v)).collect();
        g.point_from_coords(&conj_y)
    }

    /// A hyperplane is tangent iff its pole is an absolute point (and then the
    /// pole lies on the hyperplane itself).
    pub fn is_tangent(&self, g: &Geometry, hid: HyperplaneId) -> Result<bool> {
        let pole = self.pole(g, hid)?;
        Ok(self.evaluate(g, pole) == El::ZERO)
    }

    /// All absolute points: {P : conj(P)^T M P = 0}.
    pub fn variety(&self, g: &Geometry) -> Result<PointSet> {
        let pts: Vec<PointId> = (0..g.point_count())
            .map(PointId)
            .filter(|&p| self.evaluate(g, p) == El::ZERO)
            .collect();
        PointSet::from_members(g, &pts)
    }
}

/// Builds the variety of a Hermitian form over g.
pub fn build_hermitian(g: &Geometry, form: &HermitianForm) -> Result<PointSet> {
    form.variety(g)
}

/// Union of all lines joining vertex points to base points, plus the vertex.
/// Vertex and base must be span-disjoint.
pub fn build_cone(g: &Geometry, vertex: &Subspace, base: &PointSet) -> Result<PointSet> {
    crate::geometry::check_same_geometry(g, base)?;
    let vertex_pts = g.subspace_points(vertex);
    // span-disjointness: joining the bases must add full rank
    let mut gens: Vec<PointId> = vertex_pts.clone();
    gens.extend(base.members());
    if !base.is_empty() {
        let join = g.span(&gens)?;
        let base_span = g.span(&base.members().collect::<Vec<_>>())?;
        if join.dim() != vertex.dim() + base_span.dim() + 1 {
            return Err(Error::InvalidParameter(
                "vertex and base are not span-disjoint".into(),
            ));
        }
    }
    let mut member_bits = vec![false; g.point_count() as usize];
    for &v in &vertex_pts {
        member_bits[v.0 as usize] = true;
    }
    for &v in &vertex_pts {
        for b in base.members() {
            let line = g.span(&[v, b])?;
            for p in g.subspace_points(&line) {
                member_bits[p.0 as usize] = true;
            }
        }
    }
    let members: Vec<PointId> = member_bits
        .iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(i, _)| PointId(i as u32))
        .collect();
    PointSet::from_members(g, &members)
}

/// The deterministic cone Pi_d H(r-d-1,q²): vertex spanned by the first d+1
/// standard basis points, base the identity-form Hermitian variety of the
/// complementary coordinate subspace.
pub fn canonical_cone(g: &Geometry, d: u32) -> Result<PointSet> {
    let r = g.r();
    if d + 3 > r {
        return Err(Error::InvalidParameter(format!(
            "vertex dimension {d} out of range 0..={} for r = {r}",
            r as i64 - 3
        )));
    }
    let f = g.field();
    let w = (r + 1) as usize;
    let unit = |i: usize| -> Result<PointId> {
        let mut v = vec![El::ZERO; w];
        v[i] = El::ONE;
        g.point_from_coords(&v)
    };
    let vertex_gens: Vec<PointId> = (0..=d as usize)
        .map(unit)
        .collect::<Result<_>>()?;
    let vertex = g.span(&vertex_gens)?;

    // base: points supported on the last r-d coordinates with sum of norms zero
    let q = f
        .square_root_of_order()
        .ok_or_else(|| Error::InvalidParameter("field order is not a square".into()))?;
    let mut base_pts = Vec::new();
    for i in 0..g.point_count() {
        let x = g.point_coords(PointId(i));
        if x[..=d as usize].iter().any(|&c| c != El::ZERO) {
            continue;
        }
        let mut acc = El::ZERO;
        for &c in &x[d as usize + 1..] {
            acc = f.add(acc, f.norm(c, q)?);
        }
        if acc == El::ZERO {
            base_pts.push(PointId(i));
        }
    }
    let base = PointSet::from_members(g, &base_pts)?;
    build_cone(g, &vertex, &base)
}

/// Searches for a non-singular conjugate-symmetric form whose absolute points
/// are exactly S.
///
/// The form's entries are unknowns over the prime field: vanishing at each
/// point of S and conjugation-fixedness of the diagonal are F_p-linear
/// constraints, so candidate forms are a kernel computation away. Every
/// nonzero kernel combination is tried; the first non-singular one whose
/// variety equals S wins. `None` means no non-singular form fits (cones, for
/// instance, are only cut out by singular forms).
pub fn fit_hermitian_form(g: &Geometry, s: &PointSet) -> Result<Option<HermitianForm>> {
    use crate::code::{echelon_with_transform, FpMat};

    crate::geometry::check_same_geometry(g, s)?;
    let f = g.field();
    if f.square_root_of_order().is_none() {
        return Err(Error::InvalidParameter(format!(
            "field of order {} is not a square; no Hermitian forms",
            f.order()
        )));
    }
    let p = f.p();
    let h = f.h() as usize;
    let w = (g.r() + 1) as usize;

    // unknown layout: upper-triangle entries (i <= j), h prime-field slots each
    let entries: Vec<(usize, usize)> = (0..w)
        .flat_map(|i| (i..w).map(move |j| (i, j)))
        .collect();
    let nv = entries.len() * h;
    let basis: Vec<El> = (0..h)
        .map(|d| {
            let mut c = vec![0u64; h];
            c[d] = 1;
            f.encode(&c).expect("basis coordinate vector is valid")
        })
        .collect();

    let n_rows = w * h + s.len() * h;
    let mut a = FpMat::zeros(p, n_rows, nv)?;
    let mut row = 0;
    // diagonal entries must be fixed by conjugation
    for i in 0..w {
        let col0 = entries.iter().position(|&e| e == (i, i)).unwrap() * h;
        for dd in 0..h {
            for (d, &b) in basis.iter().enumerate() {
                let contrib = f.sub(b, f.conj(b));
                a.set(row + dd, col0 + d, f.decode(contrib)[dd]);
            }
        }
        row += h;
    }
    // conj(x)^T M x = 0 at every point of S
    for pt in s.members() {
        let x = g.point_coords(pt);
        for (e_idx, &(i, j)) in entries.iter().enumerate() {
            for (d, &b) in basis.iter().enumerate() {
                let term = if i == j {
                    f.mul(b, f.mul(f.conj(x[i]), x[i]))
                } else {
                    let z = f.mul(b, f.mul(f.conj(x[i]), x[j]));
                    f.add(z, f.conj(z))
                };
                let coords = f.decode(term);
                for dd in 0..h {
                    a.set(row + dd, e_idx * h + d, coords[dd]);
                }
            }
        }
        row += h;
    }

    let ech = echelon_with_transform(a)?;
    let kernel = ech.right_kernel_basis();
    let k = kernel.len();
    if k == 0 {
        return Ok(None);
    }
    let combos = (p as u128).checked_pow(k as u32).filter(|&n| n <= 1 << 16);
    let Some(combos) = combos else {
        return Err(Error::ResourceLimit(format!(
            "{k}-dimensional solution space over F_{p} is too large to scan"
        )));
    };

    let mut digits = vec![0u64; k];
    for _ in 1..combos {
        // odometer over coefficient vectors in F_p^k, skipping zero
        for d in digits.iter_mut() {
            *d += 1;
            if *d < p {
                break;
            }
            *d = 0;
        }
        let mut v = vec![0u64; nv];
        for (l, kv) in kernel.iter().enumerate() {
            if digits[l] == 0 {
                continue;
            }
            for (slot, &kvv) in kv.iter().enumerate() {
                v[slot] = (v[slot] + digits[l] * kvv) % p;
            }
        }
        let mut m = vec![El::ZERO; w * w];
        for (e_idx, &(i, j)) in entries.iter().enumerate() {
            let el = f.encode(&v[e_idx * h..(e_idx + 1) * h])?;
            m[i * w + j] = el;
            if i != j {
                m[j * w + i] = f.conj(el);
            }
        }
        let form = HermitianForm::new(g, m)?;
        if !form.is_nonsingular(f) {
            continue;
        }
        if form.variety(g)? == *s {
            return Ok(Some(form));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{iter_bits, popcount_and};
    use std::collections::BTreeMap;
    use std::sync::Arc;

    fn pg(p: u64, h: u32, r: u32) -> Geometry {
        Geometry::build(Arc::new(Field::build(p, h).unwrap()), r).unwrap()
    }

    fn u(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn closed_form_sizes() {
        assert_eq!(hermitian_size(2, 2).unwrap(), u(9));
        assert_eq!(hermitian_size(3, 2).unwrap(), u(45));
        assert_eq!(hermitian_size(4, 2).unwrap(), u(165));
        assert_eq!(hermitian_size(2, 3).unwrap(), u(28));
        assert_eq!(hermitian_size(3, 3).unwrap(), u(280));
        assert!(hermitian_size(1, 2).is_err());
        assert!(hermitian_size(2, 6).is_err());
        assert!(hermitian_size(17, 2).is_err());
    }

    #[test]
    fn closed_form_hyperplane_numbers() {
        assert_eq!(
            hermitian_hyperplane_numbers(3, 2).unwrap(),
            (u(9), u(13))
        );
        assert_eq!(hermitian_hyperplane_numbers(2, 3).unwrap(), (u(4), u(1)));
        assert_eq!(
            hermitian_hyperplane_numbers(4, 2).unwrap(),
            (u(45), u(37))
        );
        assert_eq!(
            hermitian_hyperplane_numbers(3, 3).unwrap(),
            (u(28), u(37))
        );
    }

    #[test]
    fn hyperplane_numbers_satisfy_double_counting() {
        // sum over hyperplanes of |H ∩ V| = |V| * (hyperplanes through a point):
        // tangent count is |V|, the rest are non-tangent
        for r in 2..=6u32 {
            for q in [2u64, 3, 4, 5, 7, 8, 9] {
                let size = BigInt::from(hermitian_size(r, q).unwrap());
                let (nt, t) = hermitian_hyperplane_numbers(r, q).unwrap();
                let s = bigpow(q, 2);
                let n_pts = (s.pow(r + 1) - 1) / (&s - 1);
                let through: BigInt = (0..r).map(|j| s.pow(j)).sum();
                let lhs = BigInt::from(t) * &size + BigInt::from(nt) * (&n_pts - &size);
                assert_eq!(lhs, size * through, "r={r} q={q}");
            }
        }
    }

    #[test]
    fn h24_is_nine_points() {
        let g = pg(2, 2, 2);
        let form = HermitianForm::identity(&g).unwrap();
        assert!(form.is_nonsingular(g.field()));
        let v = form.variety(&g).unwrap();
        assert_eq!(v.len(), 9);
    }

    #[test]
    fn h34_plane_spectrum_and_tangency() {
        let g = pg(2, 2, 3);
        let form = HermitianForm::identity(&g).unwrap();
        let v = form.variety(&g).unwrap();
        assert_eq!(v.len(), 45);

        // exhaustive plane scan as the counting oracle
        let mut hist: BTreeMap<u32, u32> = BTreeMap::new();
        for j in 0..g.hyperplane_count() {
            let hid = HyperplaneId(j);
            let cnt = popcount_and(g.hyperplane_bits(hid).unwrap(), v.bits());
            *hist.entry(cnt).or_default() += 1;
            // tangency via the polarity must agree with the count
            let tangent = form.is_tangent(&g, hid).unwrap();
            assert_eq!(tangent, cnt == 13, "plane {j}");
        }
        // 85 planes, 45 tangent (one per variety point); the rest satisfy
        // 9x + 13*45 = 45*21, so x = 40
        let expected: BTreeMap<u32, u32> = [(9, 40), (13, 45)].into_iter().collect();
        assert_eq!(hist, expected);
    }

    #[test]
    fn h39_and_h29_sizes_by_enumeration() {
        let g = pg(3, 2, 3);
        let v = HermitianForm::identity(&g).unwrap().variety(&g).unwrap();
        assert_eq!(v.len(), 280);
        let g2 = pg(3, 2, 2);
        let v2 = HermitianForm::identity(&g2).unwrap().variety(&g2).unwrap();
        assert_eq!(v2.len(), 28);
    }

    #[test]
    fn polarity_involution_and_absoluteness() {
        let g = pg(2, 2, 2);
        let form = HermitianForm::identity(&g).unwrap();
        let v = form.variety(&g).unwrap();
        for i in 0..g.point_count() {
            let p = PointId(i);
            let h = form.polar_hyperplane(&g, p).unwrap();
            // P absolute iff P on its own polar
            assert_eq!(v.contains(p), g.incident(p, h));
            // pole(polar(P)) = P
            assert_eq!(form.pole(&g, h).unwrap(), p);
        }
        // polar(pole(H)) = H over all hyperplanes
        for j in 0..g.hyperplane_count() {
            let hid = HyperplaneId(j);
            let pole = form.pole(&g, hid).unwrap();
            assert_eq!(form.polar_hyperplane(&g, pole).unwrap(), hid);
        }
    }

    #[test]
    fn tangent_planes_biject_with_variety_points() {
        let g = pg(2, 2, 3);
        let form = HermitianForm::identity(&g).unwrap();
        let v = form.variety(&g).unwrap();
        let tangents: Vec<HyperplaneId> = (0..g.hyperplane_count())
            .map(HyperplaneId)
            .filter(|&h| form.is_tangent(&g, h).unwrap())
            .collect();
        assert_eq!(tangents.len(), v.len());
        // the bijection is P -> polar(P)
        let mut polars: Vec<HyperplaneId> = v
            .members()
            .map(|p| form.polar_hyperplane(&g, p).unwrap())
            .collect();
        polars.sort_unstable();
        assert_eq!(polars, tangents);
    }

    #[test]
    fn lines_meet_hermitian_varieties_in_one_qplus1_or_all() {
        for (p, h, r, q) in [(2u64, 2u32, 2u32, 2u64), (2, 2, 3, 2), (3, 2, 2, 3), (3, 2, 3, 3)] {
            let g = pg(p, h, r);
            let v = HermitianForm::identity(&g).unwrap().variety(&g).unwrap();
            let allowed = [1u64, q + 1, q * q + 1];
            g.for_each_line(|l, pts| {
                let cnt = pts.iter().filter(|&&x| v.contains(PointId(x))).count() as u64;
                assert!(allowed.contains(&cnt), "line {l} meets in {cnt}");
            });
        }
    }

    #[test]
    fn equivalent_forms_give_the_same_spectrum() {
        let g = pg(2, 2, 3);
        let f = g.field();
        let w = f.el(2).unwrap(); // class of t in GF(4)
        let wbar = f.el(3).unwrap(); // its conjugate t+1
        // non-diagonal Hermitian matrix with an off-diagonal conjugate pair
        let mut m = vec![El::ZERO; 16];
        m[0] = El::ONE;
        m[1 * 4 + 2] = w;
        m[2 * 4 + 1] = wbar;
        m[3 * 4 + 3] = El::ONE;
        let form = HermitianForm::new(&g, m).unwrap();
        assert!(form.is_nonsingular(f));
        let v = form.variety(&g).unwrap();
        assert_eq!(v.len(), 45);
        let mut hist: BTreeMap<u32, u32> = BTreeMap::new();
        for j in 0..g.hyperplane_count() {
            let cnt = popcount_and(g.hyperplane_bits(HyperplaneId(j)).unwrap(), v.bits());
            *hist.entry(cnt).or_default() += 1;
        }
        let expected: BTreeMap<u32, u32> = [(9, 40), (13, 45)].into_iter().collect();
        assert_eq!(hist, expected);
    }

    #[test]
    fn non_hermitian_matrices_are_rejected() {
        let g = pg(2, 2, 2);
        let f = g.field();
        let w = f.el(2).unwrap();
        let mut m = vec![El::ZERO; 9];
        m[0] = El::ONE;
        m[4] = El::ONE;
        m[8] = El::ONE;
        m[1] = w;
        m[3] = w; // should be conj(w) = w+1
        assert!(HermitianForm::new(&g, m).is_err());
        // diagonal entries must be fixed by conjugation
        let mut m2 = vec![El::ZERO; 9];
        m2[0] = w;
        m2[4] = El::ONE;
        m2[8] = El::ONE;
        assert!(HermitianForm::new(&g, m2).is_err());
        // odd-degree fields have no Hermitian forms at all
        let godd = pg(2, 3, 2);
        assert!(HermitianForm::identity(&godd).is_err());
    }

    #[test]
    fn cone_pi0_h24_in_pg34() {
        let g = pg(2, 2, 3);
        let cone = canonical_cone(&g, 0).unwrap();
        assert_eq!(u(cone.len() as u64), singular_size(3, 2, 0).unwrap());
        assert_eq!(cone.len(), 37);
        // plane spectrum of the cone is contained in {5, 9, 13}
        let mut seen: BTreeMap<u32, u32> = BTreeMap::new();
        for j in 0..g.hyperplane_count() {
            let cnt = popcount_and(g.hyperplane_bits(HyperplaneId(j)).unwrap(), cone.bits());
            *seen.entry(cnt).or_default() += 1;
        }
        assert!(seen.keys().all(|k| [5, 9, 13].contains(k)), "{seen:?}");
    }

    #[test]
    fn degenerate_cone_point_over_point_is_a_line() {
        let g = pg(2, 2, 3);
        let vertex = g.span(&[PointId(0)]).unwrap();
        let base = PointSet::from_members(&g, &[PointId(84)]).unwrap();
        let cone = build_cone(&g, &vertex, &base).unwrap();
        assert_eq!(cone.len(), 5); // s + 1 with s = 4
        let line = g.span(&[PointId(0), PointId(84)]).unwrap();
        let pts: Vec<u32> = g.subspace_points(&line).iter().map(|p| p.0).collect();
        assert_eq!(cone.member_ids(), &pts[..]);
    }

    #[test]
    fn cone_rejects_meeting_vertex_and_base() {
        let g = pg(2, 2, 3);
        let vertex = g.span(&[PointId(0), PointId(1)]).unwrap();
        let line_pts = g.subspace_points(&vertex);
        let base = PointSet::from_members(&g, &[line_pts[2], PointId(84)]).unwrap();
        assert!(build_cone(&g, &vertex, &base).is_err());
    }

    #[test]
    fn singular_size_range_and_values() {
        assert_eq!(singular_size(3, 2, 0).unwrap(), u(37));
        assert!(singular_size(3, 2, 1).is_err()); // d = r-2 is degenerate
        assert!(singular_size(4, 2, 2).is_err());
        assert!(singular_size(2, 2, 0).is_err());
        // q²(q³+1)+1 shape at d = 0, r = 3
        for q in [2u64, 3, 4, 5] {
            let expect = u(q * q) * (u(q * q * q) + u(1)) + u(1);
            assert_eq!(singular_size(3, q, 0).unwrap(), expect);
        }
    }

    #[test]
    fn singular_size_matches_construction_at_desk_scale() {
        for (p, h, r, q) in [(2u64, 2u32, 3u32, 2u64), (3, 2, 3, 3), (2, 2, 4, 2), (3, 2, 4, 3)] {
            let g = pg(p, h, r);
            for d in 0..=r.saturating_sub(3) {
                let cone = canonical_cone(&g, d).unwrap();
                assert_eq!(
                    u(cone.len() as u64),
                    singular_size(r, q, d).unwrap(),
                    "r={r} q={q} d={d}"
                );
            }
        }
    }

    #[test]
    fn fitting_recovers_a_form_from_its_variety() {
        for (p, h, r) in [(2u64, 2u32, 2u32), (3, 2, 2)] {
            let g = pg(p, h, r);
            let v = HermitianForm::identity(&g).unwrap().variety(&g).unwrap();
            let form = fit_hermitian_form(&g, &v)
                .unwrap()
                .expect("the variety of a non-singular form must be fittable");
            assert!(form.is_nonsingular(g.field()));
            assert_eq!(form.variety(&g).unwrap(), v);
        }
    }

    #[test]
    fn fitting_handles_non_diagonal_forms() {
        let g = pg(2, 2, 3);
        let f = g.field();
        let w = f.el(2).unwrap();
        let wbar = f.el(3).unwrap();
        let mut m = vec![El::ZERO; 16];
        m[0] = El::ONE;
        m[1 * 4 + 2] = w;
        m[2 * 4 + 1] = wbar;
        m[3 * 4 + 3] = El::ONE;
        let v = HermitianForm::new(&g, m).unwrap().variety(&g).unwrap();
        let refit = fit_hermitian_form(&g, &v).unwrap().unwrap();
        assert!(refit.is_nonsingular(f));
        assert_eq!(refit.variety(&g).unwrap(), v);
    }

    #[test]
    fn fitting_rejects_sets_no_nonsingular_form_cuts_out() {
        let g = pg(2, 2, 2);
        // wrong size: every non-singular variety here has 9 points
        let ten =
            PointSet::from_members(&g, &(0..10).map(PointId).collect::<Vec<_>>()).unwrap();
        assert!(fit_hermitian_form(&g, &ten).unwrap().is_none());
        // a full line: varieties contain no line
        let line = g.span(&[PointId(0), PointId(1)]).unwrap();
        let line_set = PointSet::from_members(&g, &g.subspace_points(&line)).unwrap();
        assert!(fit_hermitian_form(&g, &line_set).unwrap().is_none());
        // the empty set: varieties are never empty
        let empty = PointSet::from_members(&g, &[]).unwrap();
        assert!(fit_hermitian_form(&g, &empty).unwrap().is_none());
    }

    #[test]
    fn fitting_a_cone_finds_no_nonsingular_form() {
        // the cone is cut out by a rank-3 form, which the non-singularity
        // filter must refuse
        let g = pg(2, 2, 3);
        let cone = canonical_cone(&g, 0).unwrap();
        assert!(fit_hermitian_form(&g, &cone).unwrap().is_none());
    }

    #[test]
    fn fitting_needs_a_square_order_field() {
        let g = pg(2, 3, 2);
        let s = PointSet::from_members(&g, &[PointId(0)]).unwrap();
        assert!(fit_hermitian_form(&g, &s).is_err());
    }

    #[test]
    fn cone_base_slice_is_the_base_variety() {
        // the base plane of the canonical cone meets the cone exactly in the base
        let g = pg(2, 2, 3);
        let cone = canonical_cone(&g, 0).unwrap();
        // base plane: points with first coordinate zero, i.e. covector e_0;
        // its id is the hyperplane whose covector is (1,0,0,0)
        let f = g.field();
        let mut cov = vec![El::ZERO; 4];
        cov[0] = El::ONE;
        let hid = g.hyperplane_from_covector(&cov).unwrap();
        let in_plane: Vec<u32> = iter_bits(g.hyperplane_bits(hid).unwrap())
            .filter(|&i| cone.contains(PointId(i)))
            .collect();
        assert_eq!(in_plane.len(), 9);
        // and each such point satisfies the base equation on the last 3 coords
        for &i in &in_plane {
            let x = g.point_coords(PointId(i));
            let mut acc = El::ZERO;
            for &c in &x[1..] {
                acc = f.add(acc, f.norm(c, 2).unwrap());
            }
            assert_eq!(acc, El::ZERO);
        }
    }
}
