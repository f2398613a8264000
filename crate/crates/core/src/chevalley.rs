//! Pinned Chevalley groups over truncated local rings.
//!
//! Two independent routes compute with group elements. The symbolic route
//! rewrites words in root-subgroup, torus, and Weyl letters into the normal
//! form U^- T U^+ using the commutation relations; the structure constants it
//! uses are not hand-entered but extracted at construction time by matching
//! against the matrix pinning. The matrix route multiplies honest matrices
//! and recovers the normal form by exact LDU factorization through leading
//! minors. Tests drive both routes against each other; neither is allowed to
//! shortcut through the other.

use crate::error::{Error, Result};
use crate::padic::{Elt, Ring, ScaledElt};
use crate::root_data::{pairing, GroupKind, RootDatum};
use std::collections::HashMap;

// ---------------------------------------------------------------------------
// matrices
// ---------------------------------------------------------------------------

/// Square matrix over the fraction field of the truncated ring: value is
/// p^{-shift} times the stored mantissa matrix, with a shared record of how
/// many low digits of the value are trustworthy.
#[derive(Clone, Debug)]
pub struct Mat {
    ring: Ring,
    dim: usize,
    shift: u32,
    m: Vec<Elt>, // row-major
    abs_prec: i64,
}

impl Mat {
    pub fn identity(ring: &Ring, dim: usize) -> Mat {
        let mut m = vec![ring.zero(); dim * dim];
        for i in 0..dim {
            m[i * dim + i] = ring.one();
        }
        Mat {
            ring: ring.clone(),
            dim,
            shift: 0,
            m,
            abs_prec: ring.n() as i64,
        }
    }

    pub fn from_exact_entries(ring: &Ring, dim: usize, m: Vec<Elt>) -> Mat {
        assert_eq!(m.len(), dim * dim);
        Mat {
            ring: ring.clone(),
            dim,
            shift: 0,
            m,
            abs_prec: ring.n() as i64,
        }
    }

    pub fn from_scaled_entries(ring: &Ring, dim: usize, e: Vec<ScaledElt>) -> Mat {
        assert_eq!(e.len(), dim * dim);
        let shift = e.iter().map(|x| x.shift()).max().unwrap_or(0);
        let n = ring.n() as i64;
        let mut abs = n - shift as i64;
        for x in &e {
            abs = abs.min(x.abs_prec());
        }
        let m = e
            .iter()
            .map(|x| x.mantissa().mul_p_pow((shift - x.shift()) as usize))
            .collect();
        Mat {
            ring: ring.clone(),
            dim,
            shift,
            m,
            abs_prec: abs,
        }
        .normalized()
    }

    fn normalized(mut self) -> Mat {
        while self.shift > 0 && self.m.iter().all(|e| e.is_zero() || e.val() >= 1) {
            if self.m.iter().all(|e| e.is_zero()) {
                break;
            }
            for e in self.m.iter_mut() {
                *e = e.div_p_pow(1).unwrap();
            }
            self.shift -= 1;
        }
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn abs_prec(&self) -> i64 {
        self.abs_prec
    }

    pub fn entry(&self, i: usize, j: usize) -> ScaledElt {
        let mut s = ScaledElt::exact_shifted(self.m[i * self.dim + j].clone(), self.shift);
        s = s.cap_prec(self.abs_prec);
        s
    }

    pub fn mul(&self, other: &Mat) -> Result<Mat> {
        if self.ring != other.ring || self.dim != other.dim {
            return Err(Error::SpecMismatch("matrix shape/ring mismatch".into()));
        }
        let d = self.dim;
        let mut m = vec![self.ring.zero(); d * d];
        for i in 0..d {
            for k in 0..d {
                let a = &self.m[i * d + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    let b = &other.m[k * d + j];
                    if b.is_zero() {
                        continue;
                    }
                    m[i * d + j] = m[i * d + j].add(&a.mul(b)?)?;
                }
            }
        }
        let n = self.ring.n() as i64;
        let shift = self.shift + other.shift;
        let abs = (self.abs_prec - other.shift as i64)
            .min(other.abs_prec - self.shift as i64)
            .min(n - shift as i64);
        Ok(Mat {
            ring: self.ring.clone(),
            dim: d,
            shift,
            m,
            abs_prec: abs,
        }
        .normalized())
    }

    pub fn transpose(&self) -> Mat {
        let d = self.dim;
        let mut m = vec![self.ring.zero(); d * d];
        for i in 0..d {
            for j in 0..d {
                m[j * d + i] = self.m[i * d + j].clone();
            }
        }
        Mat {
            ring: self.ring.clone(),
            dim: d,
            shift: self.shift,
            m,
            abs_prec: self.abs_prec,
        }
    }

    pub fn frobenius(&self, power: i64) -> Mat {
        Mat {
            ring: self.ring.clone(),
            dim: self.dim,
            shift: self.shift,
            m: self.m.iter().map(|e| e.frobenius(power)).collect(),
            abs_prec: self.abs_prec,
        }
    }

    /// Determinant as a scaled value (exact precision tracking).
    pub fn det(&self) -> Result<ScaledElt> {
        let d = self.dim;
        let entries: Vec<ScaledElt> = (0..d * d)
            .map(|k| self.entry(k / d, k % d))
            .collect();
        det_scaled(&self.ring, &entries, d)
    }

    /// Inverse via adjugate over scaled entries.
    pub fn inv(&self) -> Result<Mat> {
        let d = self.dim;
        let det = self.det()?;
        let det_inv = det.inv()?;
        let mut out = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                // cofactor C_ji for the (i,j) entry of the inverse
                let minor = self.minor_entries(j, i);
                let mdet = det_scaled(&self.ring, &minor, d - 1)?;
                let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
                out.push(mdet.mul_int(sign).mul(&det_inv)?);
            }
        }
        Ok(Mat::from_scaled_entries(&self.ring, d, out))
    }

    fn minor_entries(&self, skip_row: usize, skip_col: usize) -> Vec<ScaledElt> {
        let d = self.dim;
        let mut out = Vec::with_capacity((d - 1) * (d - 1));
        for i in 0..d {
            if i == skip_row {
                continue;
            }
            for j in 0..d {
                if j == skip_col {
                    continue;
                }
                out.push(self.entry(i, j));
            }
        }
        out
    }

    /// Leading principal minor determinant of size k (top-left k x k).
    pub fn leading_minor(&self, k: usize) -> Result<ScaledElt> {
        let entries: Vec<ScaledElt> = (0..k)
            .flat_map(|i| (0..k).map(move |j| self.entry(i, j)))
            .collect();
        det_scaled(&self.ring, &entries, k)
    }

    /// Minor over explicit row and column index sets (equal cardinality).
    pub fn minor(&self, rows: &[usize], cols: &[usize]) -> Result<ScaledElt> {
        let k = rows.len();
        let entries: Vec<ScaledElt> = rows
            .iter()
            .flat_map(|&i| cols.iter().map(move |&j| self.entry(i, j)))
            .collect();
        det_scaled(&self.ring, &entries, k)
    }

    /// Values congruent mod p^k in every entry?
    pub fn eq_mod(&self, other: &Mat, k: i64) -> Result<bool> {
        for i in 0..self.dim {
            for j in 0..self.dim {
                if !self.entry(i, j).sub(&other.entry(i, j))?.val_at_least(k)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Strictest congruence both operands can certify.
    pub fn common_prec(&self, other: &Mat) -> i64 {
        self.abs_prec.min(other.abs_prec)
    }

    pub fn eq_to_common_prec(&self, other: &Mat) -> Result<bool> {
        let k = self.common_prec(other);
        self.eq_mod(other, k)
    }
}

fn det_scaled(ring: &Ring, entries: &[ScaledElt], d: usize) -> Result<ScaledElt> {
    match d {
        0 => Ok(ScaledElt::one(ring)),
        1 => Ok(entries[0].clone()),
        2 => entries[0]
            .mul(&entries[3])?
            .sub(&entries[1].mul(&entries[2])?),
        _ => {
            // cofactor expansion along the first row
            let mut acc = ScaledElt::zero(ring);
            for j in 0..d {
                if entries[j].is_zero_mantissa() {
                    continue;
                }
                let mut sub = Vec::with_capacity((d - 1) * (d - 1));
                for i in 1..d {
                    for jj in 0..d {
                        if jj != j {
                            sub.push(entries[i * d + jj].clone());
                        }
                    }
                }
                let minor = det_scaled(ring, &sub, d - 1)?;
                let term = entries[j].mul(&minor)?;
                acc = if j % 2 == 0 {
                    acc.add(&term)?
                } else {
                    acc.sub(&term)?
                };
            }
            Ok(acc)
        }
    }
}

// ---------------------------------------------------------------------------
// words
// ---------------------------------------------------------------------------

/// A letter of a symbolic word.
#[derive(Clone, Debug)]
pub enum Letter {
    /// Root subgroup element u_gamma(c).
    Root { idx: usize, c: ScaledElt },
    /// Torus point: unit coordinates in the cocharacter basis plus a
    /// cocharacter lattice part (power of p).
    Torus {
        units: Vec<ScaledElt>,
        lambda: Vec<i64>,
    },
    /// Weyl representative n_w; expanded into root letters during collection.
    Weyl { w: usize },
}

/// Normal form U^- T U^+: payload per canonical positive-root position for
/// each sign, torus units in the cocharacter basis, and the lattice part.
#[derive(Clone, Debug)]
pub struct NormalForm {
    pub neg: Vec<ScaledElt>,
    pub units: Vec<ScaledElt>,
    pub lambda: Vec<i64>,
    pub pos: Vec<ScaledElt>,
}

// ---------------------------------------------------------------------------
// the group context
// ---------------------------------------------------------------------------

pub struct Group {
    pub kind: GroupKind,
    pub datum: RootDatum,
    pub ring: Ring,
    pub dim: usize,
    /// For each root index, the matrix pattern of u_root(x) = I + sum x*sign*E_rc.
    patterns: Vec<Vec<(usize, usize, i64)>>,
    /// Weight in X^* of each diagonal entry of the torus embedding.
    diag_weights: Vec<Vec<i64>>,
    /// u_a(c) u_b(d) = prod u_{ia+jb}(C c^i d^j) * u_b(d) u_a(c); constants
    /// extracted against the matrix pinning at construction.
    comm: HashMap<(usize, usize), Vec<(u32, u32, usize, i64)>>,
    /// Galois data: root permutation and payload sign of the twist, and the
    /// Frobenius power applied to payloads.
    sigma_perm: Vec<usize>,
    sigma_sign: Vec<i64>,
    h_power: i64,
    phi: Option<Mat>,
}

fn patterns_for(kind: GroupKind) -> Vec<Vec<(usize, usize, i64)>> {
    // positives in collection order, then matching negatives
    match kind {
        GroupKind::Sl2 | GroupKind::Gl2 => vec![vec![(0, 1, 1)], vec![(1, 0, 1)]],
        GroupKind::Sl3 | GroupKind::Su3 => vec![
            vec![(0, 1, 1)],
            vec![(1, 2, 1)],
            vec![(0, 2, 1)],
            vec![(1, 0, 1)],
            vec![(2, 1, 1)],
            vec![(2, 0, 1)],
        ],
        GroupKind::Sp4 => vec![
            vec![(0, 1, 1), (2, 3, -1)],
            vec![(1, 2, 1)],
            vec![(0, 2, 1), (1, 3, 1)],
            vec![(0, 3, 1)],
            vec![(1, 0, 1), (3, 2, -1)],
            vec![(2, 1, 1)],
            vec![(2, 0, 1), (3, 1, 1)],
            vec![(3, 0, 1)],
        ],
    }
}

fn diag_weights_for(kind: GroupKind) -> Vec<Vec<i64>> {
    match kind {
        GroupKind::Sl2 => vec![vec![1], vec![-1]],
        GroupKind::Gl2 => vec![vec![1, 0], vec![0, 1]],
        GroupKind::Sl3 | GroupKind::Su3 => vec![vec![1, 0], vec![0, 1], vec![-1, -1]],
        GroupKind::Sp4 => vec![vec![1, 0], vec![0, 1], vec![0, -1], vec![-1, 0]],
    }
}

impl Group {
    pub fn new(kind: GroupKind, ring: &Ring) -> Result<Group> {
        let datum = RootDatum::new(kind);
        let dim = kind.matrix_dim();
        if kind == GroupKind::Su3 && ring.e() % 2 != 0 {
            return Err(Error::SpecMismatch(
                "unitary entry needs a quadratic layer in the coefficient ring".into(),
            ));
        }
        let phi = if kind == GroupKind::Su3 {
            let r = ring;
            let z = r.zero();
            let o = r.one();
            let no = r.from_int(-1);
            Some(Mat::from_exact_entries(
                r,
                3,
                vec![
                    z.clone(),
                    z.clone(),
                    o.clone(),
                    z.clone(),
                    no,
                    z.clone(),
                    o,
                    z.clone(),
                    z,
                ],
            ))
        } else {
            None
        };
        let mut g = Group {
            kind,
            datum,
            ring: ring.clone(),
            dim,
            patterns: patterns_for(kind),
            diag_weights: diag_weights_for(kind),
            comm: HashMap::new(),
            sigma_perm: vec![],
            sigma_sign: vec![],
            h_power: 1,
            phi,
        };
        g.extract_structure_constants()?;
        g.extract_sigma_table()?;
        Ok(g)
    }

    pub fn n_roots(&self) -> usize {
        self.datum.roots.len()
    }

    pub fn rank(&self) -> usize {
        self.datum.rank
    }

    // -- pinning ------------------------------------------------------------

    pub fn u_root(&self, idx: usize, c: &ScaledElt) -> Result<Mat> {
        let d = self.dim;
        let n = self.ring.n() as i64;
        let s = c.shift();
        let mut m = vec![self.ring.zero(); d * d];
        let diag = self.ring.one().mul_p_pow(s as usize);
        for i in 0..d {
            m[i * d + i] = diag.clone();
        }
        for &(r, cpos, sign) in &self.patterns[idx] {
            m[r * d + cpos] = c.mantissa().mul_int(sign);
        }
        Ok(Mat {
            ring: self.ring.clone(),
            dim: d,
            shift: s,
            m,
            abs_prec: c.abs_prec().min(n - s as i64),
        }
        .normalized())
    }

    pub fn torus_mat(&self, units: &[ScaledElt], lambda: &[i64]) -> Result<Mat> {
        let d = self.dim;
        let mut entries = vec![ScaledElt::zero(&self.ring); d * d];
        for (k, w) in self.diag_weights.iter().enumerate() {
            entries[k * d + k] = self.eval_char(w, units, lambda)?;
        }
        Ok(Mat::from_scaled_entries(&self.ring, d, entries))
    }

    /// chi(t) for t with the given unit coordinates and lattice part.
    pub fn eval_char(
        &self,
        chi: &[i64],
        units: &[ScaledElt],
        lambda: &[i64],
    ) -> Result<ScaledElt> {
        let mut acc = ScaledElt::p_pow(&self.ring, pairing(chi, lambda));
        for (j, u) in units.iter().enumerate() {
            if chi[j] != 0 {
                acc = acc.mul(&u.pow(chi[j])?)?;
            }
        }
        Ok(acc)
    }

    /// Weyl representative for a simple reflection: u(1) u^-(-1) u(1).
    pub fn n_simple(&self, i: usize) -> Result<Mat> {
        let s = self.datum.simple[i];
        let one = ScaledElt::one(&self.ring);
        let a = self.u_root(s, &one)?;
        let b = self.u_root(self.datum.opposite(s), &one.neg())?;
        a.mul(&b)?.mul(&self.u_root(s, &one)?)
    }

    pub fn weyl_rep(&self, w: usize) -> Result<Mat> {
        let mut acc = Mat::identity(&self.ring, self.dim);
        for &i in &self.datum.weyl.elems[w].word.clone() {
            acc = acc.mul(&self.n_simple(i)?)?;
        }
        Ok(acc)
    }

    pub fn letter_matrix(&self, l: &Letter) -> Result<Mat> {
        match l {
            Letter::Root { idx, c } => self.u_root(*idx, c),
            Letter::Torus { units, lambda } => self.torus_mat(units, lambda),
            Letter::Weyl { w } => self.weyl_rep(*w),
        }
    }

    pub fn word_matrix(&self, word: &[Letter]) -> Result<Mat> {
        let mut acc = Mat::identity(&self.ring, self.dim);
        for l in word {
            acc = acc.mul(&self.letter_matrix(l)?)?;
        }
        Ok(acc)
    }

    // -- Galois -------------------------------------------------------------

    /// The distinguished Galois generator on matrices: entrywise Frobenius
    /// for split entries; for the unitary entry, Phi h(g^T)^{-1} Phi with h
    /// the half-degree Frobenius.
    pub fn theta_mat(&self, g: &Mat) -> Result<Mat> {
        match &self.phi {
            None => Ok(g.frobenius(1)),
            Some(phi) => {
                let h = g.transpose().frobenius(self.h_power);
                phi.mul(&h.inv()?)?.mul(phi)
            }
        }
    }

    /// Same Galois generator on letters (Weyl letters must be expanded).
    pub fn theta_letter(&self, l: &Letter) -> Result<Letter> {
        match l {
            Letter::Root { idx, c } => Ok(Letter::Root {
                idx: self.sigma_perm[*idx],
                c: c.frobenius(self.h_power).mul_int(self.sigma_sign[*idx]),
            }),
            Letter::Torus { units, lambda } => {
                let (u, l2) = self.torus_apply_rows(
                    units,
                    lambda,
                    &self.twist_cochar_rows(),
                    self.h_power,
                )?;
                Ok(Letter::Torus {
                    units: u,
                    lambda: l2,
                })
            }
            Letter::Weyl { .. } => Err(Error::SpecMismatch(
                "expand Weyl letters before applying the Galois action".into(),
            )),
        }
    }

    pub fn theta_word(&self, word: &[Letter]) -> Result<Vec<Letter>> {
        let expanded = self.expand_weyl(word)?;
        expanded.iter().map(|l| self.theta_letter(l)).collect()
    }

    fn twist_cochar_rows(&self) -> Vec<Vec<i64>> {
        match &self.datum.twist {
            Some(t) => t.on_cochar.clone(),
            None => {
                let r = self.datum.rank;
                let mut m = vec![vec![0i64; r]; r];
                for (i, row) in m.iter_mut().enumerate() {
                    row[i] = 1;
                }
                m
            }
        }
    }

    /// Apply a lattice map (row convention) to a torus point, with an extra
    /// Frobenius twist on the unit coordinates.
    fn torus_apply_rows(
        &self,
        units: &[ScaledElt],
        lambda: &[i64],
        rows: &[Vec<i64>],
        frob: i64,
    ) -> Result<(Vec<ScaledElt>, Vec<i64>)> {
        let rank = self.datum.rank;
        let mut new_units = vec![ScaledElt::one(&self.ring); rank];
        let mut new_lambda = vec![0i64; rank];
        for j in 0..rank {
            let uj = units[j].frobenius(frob);
            for i in 0..rank {
                if rows[j][i] != 0 {
                    new_units[i] = new_units[i].mul(&uj.pow(rows[j][i])?)?;
                }
            }
        }
        for j in 0..rank {
            for i in 0..rank {
                new_lambda[i] += rows[j][i] * lambda[j];
            }
        }
        Ok((new_units, new_lambda))
    }

    /// Conjugation action of a Weyl element on a torus point: w t w^{-1}.
    pub fn weyl_on_torus(
        &self,
        w: usize,
        units: &[ScaledElt],
        lambda: &[i64],
    ) -> Result<(Vec<ScaledElt>, Vec<i64>)> {
        let rows: Vec<Vec<i64>> = (0..self.datum.rank)
            .map(|j| {
                let mut e = vec![0i64; self.datum.rank];
                e[j] = 1;
                self.datum.weyl.act_cochar(w, &e)
            })
            .collect();
        self.torus_apply_rows(units, lambda, &rows, 0)
    }

    // -- structure constants -------------------------------------------------

    fn probe_payloads(&self) -> Vec<Elt> {
        let r = &self.ring;
        let p = r.p() as i64;
        let mut v = vec![
            r.from_int(1),
            r.from_int(2),
            r.from_int(1 + p),
            r.from_int(2 * p + 1),
            r.from_int(p * p + 2),
        ];
        if r.e() > 1 {
            v[3] = r.gen();
            v[4] = r.gen().mul_int(2).add(&r.one()).unwrap();
        }
        v
    }

    fn extract_structure_constants(&mut self) -> Result<()> {
        let n_roots = self.n_roots();
        let probes = self.probe_payloads();
        for a in 0..n_roots {
            for b in 0..n_roots {
                if a == b || b == self.datum.opposite(a) {
                    continue;
                }
                // targets i*ra + j*rb in the root system, i,j >= 1
                let mut targets = vec![];
                for i in 1u32..=3 {
                    for j in 1u32..=3 {
                        let v: Vec<i64> = self.datum.roots[a]
                            .iter()
                            .zip(&self.datum.roots[b])
                            .map(|(x, y)| i as i64 * x + j as i64 * y)
                            .collect();
                        if let Some(t) = self.datum.root_index(&v) {
                            targets.push((i, j, t));
                        }
                    }
                }
                targets.sort_by_key(|&(i, j, _)| (i + j, i));
                let pairs: Vec<(Elt, Elt)> = (0..probes.len())
                    .map(|k| {
                        (
                            probes[k].clone(),
                            probes[(k + 2) % probes.len()].clone(),
                        )
                    })
                    .collect();
                let found = self.search_constants(a, b, &targets, &pairs)?;
                self.comm.insert((a, b), found);
            }
        }
        Ok(())
    }

    fn search_constants(
        &self,
        a: usize,
        b: usize,
        targets: &[(u32, u32, usize)],
        pairs: &[(Elt, Elt)],
    ) -> Result<Vec<(u32, u32, usize, i64)>> {
        let k = targets.len();
        if k == 0 {
            // must commute; verify
            for (c, d) in pairs {
                let ua = self.u_root(a, &ScaledElt::exact(c.clone()))?;
                let ub = self.u_root(b, &ScaledElt::exact(d.clone()))?;
                let lhs = ua.mul(&ub)?;
                let rhs = ub.mul(&ua)?;
                if !lhs.eq_to_common_prec(&rhs)? {
                    return Err(Error::SpecMismatch(format!(
                        "roots {a},{b} expected to commute but do not"
                    )));
                }
            }
            return Ok(vec![]);
        }
        let mut matches = vec![];
        let range: Vec<i64> = (-3..=3).collect();
        let mut choose = vec![0usize; k];
        loop {
            let cand: Vec<(u32, u32, usize, i64)> = targets
                .iter()
                .zip(&choose)
                .map(|(&(i, j, t), &ci)| (i, j, t, range[ci]))
                .collect();
            let mut ok = true;
            for (c, d) in pairs {
                if !self.constants_hold(a, b, &cand, c, d)? {
                    ok = false;
                    break;
                }
            }
            if ok {
                matches.push(cand);
            }
            // next choice
            let mut pos = 0;
            loop {
                if pos == k {
                    if matches.len() != 1 {
                        return Err(Error::SpecMismatch(format!(
                            "structure constant search for pair {a},{b} found {} solutions",
                            matches.len()
                        )));
                    }
                    return Ok(matches.pop().unwrap());
                }
                choose[pos] += 1;
                if choose[pos] < range.len() {
                    break;
                }
                choose[pos] = 0;
                pos += 1;
            }
        }
    }

    fn constants_hold(
        &self,
        a: usize,
        b: usize,
        cand: &[(u32, u32, usize, i64)],
        c: &Elt,
        d: &Elt,
    ) -> Result<bool> {
        let sc = ScaledElt::exact(c.clone());
        let sd = ScaledElt::exact(d.clone());
        let lhs = self.u_root(a, &sc)?.mul(&self.u_root(b, &sd)?)?;
        let mut rhs = Mat::identity(&self.ring, self.dim);
        for &(i, j, t, cc) in cand {
            let payload = sc.pow(i as i64)?.mul(&sd.pow(j as i64)?)?.mul_int(cc);
            rhs = rhs.mul(&self.u_root(t, &payload)?)?;
        }
        rhs = rhs.mul(&self.u_root(b, &sd)?)?.mul(&self.u_root(a, &sc)?)?;
        lhs.eq_to_common_prec(&rhs)
    }

    pub fn commutator_terms(&self, a: usize, b: usize) -> &[(u32, u32, usize, i64)] {
        self.comm
            .get(&(a, b))
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    fn extract_sigma_table(&mut self) -> Result<()> {
        let n_roots = self.n_roots();
        if self.phi.is_none() {
            self.sigma_perm = (0..n_roots).collect();
            self.sigma_sign = vec![1; n_roots];
            self.h_power = 1;
            return Ok(());
        }
        self.h_power = (self.ring.e() / 2) as i64;
        let perm: Vec<usize> = {
            let t = self.datum.twist.as_ref().unwrap();
            t.root_perm.clone()
        };
        let mut signs = vec![0i64; n_roots];
        let x = ScaledElt::exact(self.ring.gen());
        for idx in 0..n_roots {
            let img = self.theta_mat(&self.u_root(idx, &x)?)?;
            let hx = x.frobenius(self.h_power);
            let mut found = 0i64;
            for sign in [1i64, -1] {
                let cand = self.u_root(perm[idx], &hx.mul_int(sign))?;
                if img.eq_to_common_prec(&cand)? {
                    found = sign;
                    break;
                }
            }
            if found == 0 {
                return Err(Error::SpecMismatch(format!(
                    "Galois image of root {idx} is not a signed root letter"
                )));
            }
            signs[idx] = found;
        }
        self.sigma_perm = perm;
        self.sigma_sign = signs;
        Ok(())
    }

    pub fn sigma_sign(&self, idx: usize) -> i64 {
        self.sigma_sign[idx]
    }

    // -- collection ----------------------------------------------------------

    fn letter_rank(&self, l: &Letter) -> usize {
        let n_pos = self.datum.n_pos;
        match l {
            Letter::Root { idx, .. } => {
                if *idx < n_pos {
                    n_pos + 1 + *idx
                } else {
                    *idx - n_pos
                }
            }
            Letter::Torus { .. } => n_pos,
            Letter::Weyl { .. } => unreachable!("expanded before ranking"),
        }
    }

    pub fn expand_weyl(&self, word: &[Letter]) -> Result<Vec<Letter>> {
        let mut out = vec![];
        for l in word {
            match l {
                Letter::Weyl { w } => {
                    for &i in &self.datum.weyl.elems[*w].word {
                        let s = self.datum.simple[i];
                        let one = ScaledElt::one(&self.ring);
                        out.push(Letter::Root { idx: s, c: one.clone() });
                        out.push(Letter::Root {
                            idx: self.datum.opposite(s),
                            c: one.neg(),
                        });
                        out.push(Letter::Root { idx: s, c: one });
                    }
                }
                other => out.push(other.clone()),
            }
        }
        Ok(out)
    }

    fn root_on_torus(
        &self,
        gamma: usize,
        units: &[ScaledElt],
        lambda: &[i64],
    ) -> Result<ScaledElt> {
        self.eval_char(&self.datum.roots[gamma].clone(), units, lambda)
    }

    /// Collect a word into U^- T U^+ by local rewriting. Fails with
    /// NotInCell when an opposite-root pivot vanishes, or with
    /// PrecisionExhausted when the stored digits cannot decide a pivot.
    pub fn collect(&self, word: &[Letter]) -> Result<NormalForm> {
        let mut w = self.expand_weyl(word)?;
        let mut steps = 0usize;
        'outer: loop {
            steps += 1;
            if steps > 200_000 {
                return Err(Error::SpecMismatch(
                    "collection exceeded its step budget".into(),
                ));
            }
            // drop vanished payloads and identity tori
            let mut i = 0;
            while i < w.len() {
                let drop = match &w[i] {
                    Letter::Root { c, .. } => c.is_zero_mantissa(),
                    Letter::Torus { units, lambda } => {
                        lambda.iter().all(|&x| x == 0)
                            && units.iter().all(|u| {
                                u.shift() == 0 && *u.mantissa() == self.ring.one()
                            })
                    }
                    _ => false,
                };
                if drop {
                    w.remove(i);
                } else {
                    i += 1;
                }
            }
            for i in 0..w.len().saturating_sub(1) {
                let (l, r) = (w[i].clone(), w[i + 1].clone());
                match (&l, &r) {
                    (Letter::Torus { units: u1, lambda: l1 }, Letter::Torus { units: u2, lambda: l2 }) => {
                        let units: Result<Vec<ScaledElt>> =
                            u1.iter().zip(u2).map(|(a, b)| a.mul(b)).collect();
                        let lambda: Vec<i64> = l1.iter().zip(l2).map(|(a, b)| a + b).collect();
                        w.splice(i..i + 2, [Letter::Torus { units: units?, lambda }]);
                        continue 'outer;
                    }
                    (Letter::Torus { units, lambda }, Letter::Root { idx, c })
                        if self.letter_rank(&r) < self.datum.n_pos =>
                    {
                        let ev = self.root_on_torus(*idx, units, lambda)?;
                        let new_c = ev.mul(c)?;
                        w.splice(
                            i..i + 2,
                            [Letter::Root { idx: *idx, c: new_c }, l.clone()],
                        );
                        continue 'outer;
                    }
                    (Letter::Root { idx, c }, Letter::Torus { units, lambda })
                        if self.letter_rank(&l) > self.datum.n_pos =>
                    {
                        let ev = self.root_on_torus(*idx, units, lambda)?.inv()?;
                        let new_c = ev.mul(c)?;
                        w.splice(
                            i..i + 2,
                            [r.clone(), Letter::Root { idx: *idx, c: new_c }],
                        );
                        continue 'outer;
                    }
                    (Letter::Root { idx: ia, c: ca }, Letter::Root { idx: ib, c: cb }) => {
                        if ia == ib {
                            let c = ca.add(cb)?;
                            w.splice(i..i + 2, [Letter::Root { idx: *ia, c }]);
                            continue 'outer;
                        }
                        let (ra, rb) = (self.letter_rank(&l), self.letter_rank(&r));
                        if ra <= rb {
                            continue;
                        }
                        if *ib == self.datum.opposite(*ia) {
                            // u_b(a) u_{-b}(b): pivot 1 + ab
                            let prod = ca.mul(cb)?;
                            let pivot = ScaledElt::one(&self.ring).add(&prod)?;
                            let v = pivot.val_exact().map_err(|_| {
                                Error::PrecisionExhausted(
                                    "opposite-root pivot not separated from zero".into(),
                                )
                            })?;
                            let piv_inv = pivot.inv()?;
                            let beta = if *ia < self.datum.n_pos { *ia } else { *ib };
                            let coroot = self.datum.coroots[beta].clone();
                            let (pv, pu) = (v, pivot.mul(&ScaledElt::p_pow(&self.ring, -v))?);
                            let units: Result<Vec<ScaledElt>> =
                                coroot.iter().map(|&e| pu.pow(e)).collect();
                            let lambda: Vec<i64> = coroot.iter().map(|&e| e * pv).collect();
                            let new_neg = Letter::Root {
                                idx: *ib,
                                c: cb.mul(&piv_inv)?,
                            };
                            let new_pos = Letter::Root {
                                idx: *ia,
                                c: ca.mul(&piv_inv)?,
                            };
                            let t = Letter::Torus {
                                units: units?,
                                lambda,
                            };
                            w.splice(i..i + 2, [new_neg, t, new_pos]);
                            continue 'outer;
                        }
                        // non-opposite swap with commutator emission
                        let terms = self.comm.get(&(*ia, *ib)).cloned().unwrap_or_default();
                        let mut emitted = vec![];
                        for (pi, pj, t, cc) in terms {
                            let payload = ca
                                .pow(pi as i64)?
                                .mul(&cb.pow(pj as i64)?)?
                                .mul_int(cc);
                            emitted.push(Letter::Root { idx: t, c: payload });
                        }
                        emitted.push(r.clone());
                        emitted.push(l.clone());
                        w.splice(i..i + 2, emitted);
                        continue 'outer;
                    }
                    _ => {}
                }
            }
            break;
        }
        self.read_normal_form(&w)
    }

    fn read_normal_form(&self, w: &[Letter]) -> Result<NormalForm> {
        let n_pos = self.datum.n_pos;
        let rank = self.datum.rank;
        let mut nf = NormalForm {
            neg: vec![ScaledElt::zero(&self.ring); n_pos],
            units: vec![ScaledElt::one(&self.ring); rank],
            lambda: vec![0i64; rank],
            pos: vec![ScaledElt::zero(&self.ring); n_pos],
        };
        let mut last_rank = 0usize;
        let mut seen_torus = false;
        for l in w {
            let r = self.letter_rank(l);
            if r < last_rank {
                return Err(Error::SpecMismatch("collection left a disordered word".into()));
            }
            last_rank = r;
            match l {
                Letter::Root { idx, c } => {
                    if *idx < n_pos {
                        nf.pos[*idx] = c.clone();
                    } else {
                        nf.neg[*idx - n_pos] = c.clone();
                    }
                }
                Letter::Torus { units, lambda } => {
                    if seen_torus {
                        return Err(Error::SpecMismatch("two torus letters survived".into()));
                    }
                    seen_torus = true;
                    nf.units = units.clone();
                    nf.lambda = lambda.clone();
                }
                Letter::Weyl { .. } => unreachable!(),
            }
        }
        Ok(nf)
    }

    pub fn nf_matrix(&self, nf: &NormalForm) -> Result<Mat> {
        let n_pos = self.datum.n_pos;
        let mut acc = Mat::identity(&self.ring, self.dim);
        for i in 0..n_pos {
            if !nf.neg[i].is_zero_mantissa() {
                acc = acc.mul(&self.u_root(n_pos + i, &nf.neg[i])?)?;
            }
        }
        acc = acc.mul(&self.torus_mat(&nf.units, &nf.lambda)?)?;
        for i in 0..n_pos {
            if !nf.pos[i].is_zero_mantissa() {
                acc = acc.mul(&self.u_root(i, &nf.pos[i])?)?;
            }
        }
        Ok(acc)
    }

    // -- matrix-side factorization (independent oracle) ----------------------

    /// Factor a matrix in the big cell into U^- T U^+ by exact LDU through
    /// leading minors, then coordinate peeling against the pinning.
    pub fn factor(&self, g: &Mat) -> Result<NormalForm> {
        let d = self.dim;
        let mut minors = vec![ScaledElt::one(&self.ring)];
        for k in 1..=d {
            let mk = g.leading_minor(k)?;
            if mk.val_exact().is_err() {
                return Err(Error::PrecisionExhausted(format!(
                    "leading minor {k} not separated from zero"
                )));
            }
            minors.push(mk);
        }
        // unit upper and lower factors via minor ratios
        let mut u_mat = vec![vec![ScaledElt::zero(&self.ring); d]; d];
        let mut l_mat = vec![vec![ScaledElt::zero(&self.ring); d]; d];
        let mut d_diag = vec![ScaledElt::one(&self.ring); d];
        for i in 0..d {
            u_mat[i][i] = ScaledElt::one(&self.ring);
            l_mat[i][i] = ScaledElt::one(&self.ring);
            d_diag[i] = minors[i + 1].mul(&minors[i].inv()?)?;
        }
        for r in 0..d {
            let rows: Vec<usize> = (0..=r).collect();
            for c in r + 1..d {
                let mut cols: Vec<usize> = (0..r).collect();
                cols.push(c);
                let num = g.minor(&rows, &cols)?;
                u_mat[r][c] = num.mul(&minors[r + 1].inv()?)?;
                let mut rws: Vec<usize> = (0..r).collect();
                rws.push(c);
                let cls: Vec<usize> = (0..=r).collect();
                let num2 = g.minor(&rws, &cls)?;
                l_mat[c][r] = num2.mul(&minors[r + 1].inv()?)?;
            }
        }
        let pos = self.peel_upper(&u_mat)?;
        let neg = self.peel_lower(&l_mat)?;
        let (units, lambda) = self.peel_diag(&d_diag)?;
        Ok(NormalForm {
            neg,
            units,
            lambda,
            pos,
        })
    }

    fn peel_upper(&self, u: &[Vec<ScaledElt>]) -> Result<Vec<ScaledElt>> {
        let check = |x: &ScaledElt, y: &ScaledElt| -> Result<()> {
            let diff = x.sub(y)?;
            if diff.val_lb() < diff.abs_prec() {
                return Err(Error::SpecMismatch(
                    "matrix does not satisfy the group's triangular relations".into(),
                ));
            }
            Ok(())
        };
        match self.kind {
            GroupKind::Sl2 | GroupKind::Gl2 => Ok(vec![u[0][1].clone()]),
            GroupKind::Sl3 | GroupKind::Su3 => {
                let a = u[0][1].clone();
                let b = u[1][2].clone();
                let c = u[0][2].sub(&a.mul(&b)?)?;
                Ok(vec![a, b, c])
            }
            GroupKind::Sp4 => {
                let a = u[0][1].clone();
                let b = u[1][2].clone();
                let c = u[1][3].clone();
                let dd = u[0][3].sub(&a.mul(&c)?)?;
                check(&u[2][3], &a.neg())?;
                check(&u[0][2], &a.mul(&b)?.add(&c)?)?;
                Ok(vec![a, b, c, dd])
            }
        }
    }

    fn peel_lower(&self, l: &[Vec<ScaledElt>]) -> Result<Vec<ScaledElt>> {
        let check = |x: &ScaledElt, y: &ScaledElt| -> Result<()> {
            let diff = x.sub(y)?;
            if diff.val_lb() < diff.abs_prec() {
                return Err(Error::SpecMismatch(
                    "matrix does not satisfy the group's triangular relations".into(),
                ));
            }
            Ok(())
        };
        match self.kind {
            GroupKind::Sl2 | GroupKind::Gl2 => Ok(vec![l[1][0].clone()]),
            GroupKind::Sl3 | GroupKind::Su3 => {
                Ok(vec![l[1][0].clone(), l[2][1].clone(), l[2][0].clone()])
            }
            GroupKind::Sp4 => {
                let a = l[1][0].clone();
                let b = l[2][1].clone();
                let c = l[2][0].clone();
                let dd = l[3][0].add(&a.mul(&c)?)?;
                check(&l[3][2], &a.neg())?;
                check(&l[3][1], &c.sub(&a.mul(&b)?)?)?;
                Ok(vec![a, b, c, dd])
            }
        }
    }

    fn peel_diag(&self, d: &[ScaledElt]) -> Result<(Vec<ScaledElt>, Vec<i64>)> {
        let consistent = |x: &ScaledElt, y: &ScaledElt| -> Result<()> {
            let diff = x.sub(y)?;
            if diff.val_lb() < diff.abs_prec() {
                return Err(Error::SpecMismatch(
                    "diagonal is not in the torus of this group".into(),
                ));
            }
            Ok(())
        };
        let split = |x: &ScaledElt| -> Result<(i64, ScaledElt)> {
            let v = x.val_exact()?;
            let u = x.mul(&ScaledElt::p_pow(&self.ring, -v))?;
            Ok((v, u))
        };
        match self.kind {
            GroupKind::Sl2 => {
                let (v, u) = split(&d[0])?;
                consistent(&d[1], &d[0].inv()?)?;
                Ok((vec![u], vec![v]))
            }
            GroupKind::Gl2 => {
                let (v1, u1) = split(&d[0])?;
                let (v2, u2) = split(&d[1])?;
                Ok((vec![u1, u2], vec![v1, v2]))
            }
            GroupKind::Sl3 | GroupKind::Su3 => {
                let (v1, u1) = split(&d[0])?;
                let (v2, u2) = split(&d[1])?;
                consistent(&d[2], &d[0].mul(&d[1])?.inv()?)?;
                Ok((vec![u1, u2], vec![v1, v2]))
            }
            GroupKind::Sp4 => {
                let (v1, u1) = split(&d[0])?;
                let (v2, u2) = split(&d[1])?;
                consistent(&d[2], &d[1].inv()?)?;
                consistent(&d[3], &d[0].inv()?)?;
                Ok((vec![u1, u2], vec![v1, v2]))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ring3() -> Ring {
        Ring::unramified(3, 1, 9).unwrap()
    }

    fn rand_elt(r: &Ring, rng: &mut ChaCha8Rng) -> ScaledElt {
        ScaledElt::exact(r.from_int(rng.gen_range(0..(r.pn() as i64))))
    }

    fn rand_unit(r: &Ring, rng: &mut ChaCha8Rng) -> ScaledElt {
        loop {
            let e = rand_elt(r, rng);
            if e.val_lb() == 0 {
                return e;
            }
        }
    }

    fn groups_split() -> Vec<Group> {
        [GroupKind::Sl2, GroupKind::Gl2, GroupKind::Sl3, GroupKind::Sp4]
            .iter()
            .map(|&k| Group::new(k, &ring3()).unwrap())
            .collect()
    }

    #[test]
    fn sp4_pinning_is_symplectic() {
        let r = ring3();
        let g = Group::new(GroupKind::Sp4, &r).unwrap();
        // J: antidiagonal 1,1,-1,-1
        let z = || r.zero();
        let jm = Mat::from_exact_entries(
            &r,
            4,
            vec![
                z(), z(), z(), r.one(),
                z(), z(), r.one(), z(),
                z(), r.from_int(-1), z(), z(),
                r.from_int(-1), z(), z(), z(),
            ],
        );
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut check = |m: &Mat| {
            let t = m.transpose().mul(&jm).unwrap().mul(m).unwrap();
            assert!(t.eq_to_common_prec(&jm).unwrap());
        };
        for idx in 0..8 {
            check(&g.u_root(idx, &rand_elt(&r, &mut rng)).unwrap());
        }
        for _ in 0..5 {
            let units = vec![rand_unit(&r, &mut rng), rand_unit(&r, &mut rng)];
            let lambda = vec![rng.gen_range(-2..3), rng.gen_range(-2..3)];
            check(&g.torus_mat(&units, &lambda).unwrap());
        }
        check(&g.n_simple(0).unwrap());
        check(&g.n_simple(1).unwrap());
    }

    #[test]
    fn sl3_pinning_has_det_one() {
        let r = ring3();
        let g = Group::new(GroupKind::Sl3, &r).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for idx in 0..6 {
            let m = g.u_root(idx, &rand_elt(&r, &mut rng)).unwrap();
            let d = m.det().unwrap();
            assert!(d.sub(&ScaledElt::one(&r)).unwrap().is_zero_mantissa());
        }
        let units = vec![rand_unit(&r, &mut rng), rand_unit(&r, &mut rng)];
        let lambda = vec![2, -1];
        let t = g.torus_mat(&units, &lambda).unwrap();
        let d = t.det().unwrap();
        assert!(d.sub(&ScaledElt::one(&r)).unwrap().val_at_least(d.abs_prec()).unwrap_or(true));
    }

    #[test]
    fn torus_conjugation_matches_root_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for g in groups_split() {
            let r = &g.ring;
            for _ in 0..20 {
                let units: Vec<ScaledElt> =
                    (0..g.rank()).map(|_| rand_unit(r, &mut rng)).collect();
                let lambda: Vec<i64> = (0..g.rank()).map(|_| rng.gen_range(-2..3)).collect();
                let t = g.torus_mat(&units, &lambda).unwrap();
                let ti = t.inv().unwrap();
                for idx in 0..g.n_roots() {
                    let c = rand_elt(r, &mut rng);
                    let lhs = t
                        .mul(&g.u_root(idx, &c).unwrap())
                        .unwrap()
                        .mul(&ti)
                        .unwrap();
                    let ev = g
                        .eval_char(&g.datum.roots[idx].clone(), &units, &lambda)
                        .unwrap();
                    let rhs = g.u_root(idx, &ev.mul(&c).unwrap()).unwrap();
                    assert!(
                        lhs.eq_to_common_prec(&rhs).unwrap(),
                        "{:?} root {idx}",
                        g.kind
                    );
                }
            }
        }
    }

    #[test]
    fn frozen_structure_constants() {
        let r = ring3();
        let sl3 = Group::new(GroupKind::Sl3, &r).unwrap();
        // [u_alpha(c), u_beta(d)] = u_{alpha+beta}(cd)
        assert_eq!(sl3.commutator_terms(0, 1), &[(1, 1, 2, 1)]);
        assert_eq!(sl3.commutator_terms(1, 0), &[(1, 1, 2, -1)]);
        let sp4 = Group::new(GroupKind::Sp4, &r).unwrap();
        assert_eq!(sp4.commutator_terms(0, 1), &[(1, 1, 2, 1), (2, 1, 3, 1)]);
        assert_eq!(sp4.commutator_terms(1, 0), &[(1, 1, 2, -1), (1, 2, 3, -1)]);
        assert_eq!(sp4.commutator_terms(0, 2), &[(1, 1, 3, 2)]);
        assert_eq!(sp4.commutator_terms(2, 0), &[(1, 1, 3, -2)]);
        // long roots commute with each other
        assert_eq!(sp4.commutator_terms(1, 3), &[]);
    }

    #[test]
    fn relation_one_against_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for g in groups_split() {
            let r = &g.ring;
            for _ in 0..60 {
                let a = rng.gen_range(0..g.n_roots());
                let b = rng.gen_range(0..g.n_roots());
                if a == b || b == g.datum.opposite(a) {
                    continue;
                }
                let c = rand_elt(r, &mut rng);
                let d = rand_elt(r, &mut rng);
                let lhs = g
                    .u_root(a, &c)
                    .unwrap()
                    .mul(&g.u_root(b, &d).unwrap())
                    .unwrap();
                let mut rhs = Mat::identity(r, g.dim);
                for &(i, j, t, cc) in g.commutator_terms(a, b) {
                    let payload = c
                        .pow(i as i64)
                        .unwrap()
                        .mul(&d.pow(j as i64).unwrap())
                        .unwrap()
                        .mul_int(cc);
                    rhs = rhs.mul(&g.u_root(t, &payload).unwrap()).unwrap();
                }
                rhs = rhs
                    .mul(&g.u_root(b, &d).unwrap())
                    .unwrap()
                    .mul(&g.u_root(a, &c).unwrap())
                    .unwrap();
                assert!(lhs.eq_to_common_prec(&rhs).unwrap(), "{:?}", g.kind);
            }
        }
    }

    #[test]
    fn relation_two_against_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for g in groups_split() {
            let r = &g.ring;
            for pos in 0..g.datum.n_pos {
                for _ in 0..20 {
                    // keep val(ab) >= 1 so the pivot is a unit
                    let a = rand_elt(r, &mut rng);
                    let b = rand_elt(r, &mut rng)
                        .mul(&ScaledElt::p_pow(r, 1))
                        .unwrap();
                    let pivot = ScaledElt::one(r).add(&a.mul(&b).unwrap()).unwrap();
                    let piv_inv = pivot.inv().unwrap();
                    let neg = g.datum.opposite(pos);
                    let lhs = g
                        .u_root(pos, &a)
                        .unwrap()
                        .mul(&g.u_root(neg, &b).unwrap())
                        .unwrap();
                    let coroot = g.datum.coroots[pos].clone();
                    let units: Vec<ScaledElt> = coroot
                        .iter()
                        .map(|&e| pivot.pow(e).unwrap())
                        .collect();
                    let lambda = vec![0i64; g.rank()];
                    let rhs = g
                        .u_root(neg, &b.mul(&piv_inv).unwrap())
                        .unwrap()
                        .mul(&g.torus_mat(&units, &lambda).unwrap())
                        .unwrap()
                        .mul(&g.u_root(pos, &a.mul(&piv_inv).unwrap()).unwrap())
                        .unwrap();
                    assert!(lhs.eq_to_common_prec(&rhs).unwrap(), "{:?} {pos}", g.kind);
                }
            }
        }
    }

    #[test]
    fn collection_agrees_with_matrix_factorization() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for g in groups_split() {
            let r = &g.ring;
            let mut cells = 0;
            for _ in 0..120 {
                let len = rng.gen_range(1..6);
                let word: Vec<Letter> = (0..len)
                    .map(|_| match rng.gen_range(0..6) {
                        0 => Letter::Torus {
                            units: (0..g.rank()).map(|_| rand_unit(r, &mut rng)).collect(),
                            lambda: (0..g.rank()).map(|_| rng.gen_range(-1..2)).collect(),
                        },
                        1 => Letter::Weyl {
                            w: rng.gen_range(0..g.datum.weyl.len()),
                        },
                        _ => Letter::Root {
                            idx: rng.gen_range(0..g.n_roots()),
                            c: rand_elt(r, &mut rng),
                        },
                    })
                    .collect();
                let m = g.word_matrix(&word).unwrap();
                let via_collect = g.collect(&word);
                let via_factor = g.factor(&m);
                match (via_collect, via_factor) {
                    (Ok(nf1), Ok(nf2)) => {
                        cells += 1;
                        // same payloads up to precision, and both rebuild m
                        let m1 = g.nf_matrix(&nf1).unwrap();
                        let m2 = g.nf_matrix(&nf2).unwrap();
                        assert!(m1.eq_to_common_prec(&m).unwrap(), "{:?}", g.kind);
                        assert!(m2.eq_to_common_prec(&m).unwrap(), "{:?}", g.kind);
                        assert_eq!(nf1.lambda, nf2.lambda, "{:?}", g.kind);
                        for i in 0..g.datum.n_pos {
                            let dp = nf1.pos[i].sub(&nf2.pos[i]).unwrap();
                            assert!(dp.val_lb() >= dp.abs_prec(), "{:?} pos {i}", g.kind);
                            let dn = nf1.neg[i].sub(&nf2.neg[i]).unwrap();
                            assert!(dn.val_lb() >= dn.abs_prec(), "{:?} neg {i}", g.kind);
                        }
                    }
                    (Err(_), Err(_)) => {}
                    (a, b) => panic!(
                        "routes disagree for {:?}: collect={:?} factor={:?}",
                        g.kind,
                        a.map(|_| ()),
                        b.map(|_| ())
                    ),
                }
            }
            assert!(cells > 40, "{:?}: too few big-cell samples ({cells})", g.kind);
        }
    }

    #[test]
    fn factor_round_trip_includes_lattice_parts() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for g in groups_split() {
            let r = &g.ring;
            for _ in 0..40 {
                let nf = NormalForm {
                    neg: (0..g.datum.n_pos).map(|_| rand_elt(r, &mut rng)).collect(),
                    units: (0..g.rank()).map(|_| rand_unit(r, &mut rng)).collect(),
                    lambda: (0..g.rank()).map(|_| rng.gen_range(-2..3)).collect(),
                    pos: (0..g.datum.n_pos).map(|_| rand_elt(r, &mut rng)).collect(),
                };
                let m = g.nf_matrix(&nf).unwrap();
                let back = g.factor(&m).unwrap();
                assert_eq!(back.lambda, nf.lambda, "{:?}", g.kind);
                for i in 0..g.datum.n_pos {
                    let dp = back.pos[i].sub(&nf.pos[i]).unwrap();
                    assert!(dp.val_lb() >= dp.abs_prec(), "{:?}", g.kind);
                    let dn = back.neg[i].sub(&nf.neg[i]).unwrap();
                    assert!(dn.val_lb() >= dn.abs_prec(), "{:?}", g.kind);
                }
                for j in 0..g.rank() {
                    let du = back.units[j].sub(&nf.units[j]).unwrap();
                    assert!(du.val_lb() >= du.abs_prec(), "{:?}", g.kind);
                }
            }
        }
    }

    #[test]
    fn weyl_representatives_normalize_the_torus() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for g in groups_split() {
            let r = &g.ring;
            for w in 0..g.datum.weyl.len() {
                let nw = g.weyl_rep(w).unwrap();
                let nwi = nw.inv().unwrap();
                for _ in 0..5 {
                    let units: Vec<ScaledElt> =
                        (0..g.rank()).map(|_| rand_unit(r, &mut rng)).collect();
                    let lambda: Vec<i64> =
                        (0..g.rank()).map(|_| rng.gen_range(-1..2)).collect();
                    let t = g.torus_mat(&units, &lambda).unwrap();
                    let lhs = nw.mul(&t).unwrap().mul(&nwi).unwrap();
                    let (u2, l2) = g.weyl_on_torus(w, &units, &lambda).unwrap();
                    let rhs = g.torus_mat(&u2, &l2).unwrap();
                    assert!(lhs.eq_to_common_prec(&rhs).unwrap(), "{:?} w={w}", g.kind);
                }
            }
        }
    }

    #[test]
    fn galois_on_split_group_is_entrywise_frobenius() {
        let ring = Ring::unramified(3, 2, 6).unwrap();
        let g = Group::new(GroupKind::Sl2, &ring).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..20 {
            let c: Vec<i64> = (0..2).map(|_| rng.gen_range(0..ring.pn() as i64)).collect();
            let x = ScaledElt::exact(ring.from_coeffs(&c));
            let word = vec![Letter::Root {
                idx: rng.gen_range(0..2),
                c: x,
            }];
            let m1 = g.theta_mat(&g.word_matrix(&word).unwrap()).unwrap();
            let m2 = g.word_matrix(&g.theta_word(&word).unwrap()).unwrap();
            assert!(m1.eq_to_common_prec(&m2).unwrap());
        }
        // theta^e = id
        let x = ScaledElt::exact(ring.gen());
        let m = g.u_root(0, &x).unwrap();
        let mm = g.theta_mat(&g.theta_mat(&m).unwrap()).unwrap();
        assert!(mm.eq_to_common_prec(&m).unwrap());
    }

    #[test]
    fn unitary_sigma_signs_and_involution() {
        let ring = Ring::unramified(5, 2, 6).unwrap();
        let g = Group::new(GroupKind::Su3, &ring).unwrap();
        // swapped simple orbit keeps sign +1; the middle root picks up -1
        assert_eq!(g.sigma_sign(0), 1);
        assert_eq!(g.sigma_sign(1), 1);
        assert_eq!(g.sigma_sign(2), -1);
        assert_eq!(g.sigma_sign(3), 1);
        assert_eq!(g.sigma_sign(4), 1);
        assert_eq!(g.sigma_sign(5), -1);
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..20 {
            let c: Vec<i64> = (0..2).map(|_| rng.gen_range(0..ring.pn() as i64)).collect();
            let x = ScaledElt::exact(ring.from_coeffs(&c));
            let idx = rng.gen_range(0..6);
            let m = g.u_root(idx, &x).unwrap();
            let s2 = g.theta_mat(&g.theta_mat(&m).unwrap()).unwrap();
            assert!(s2.eq_to_common_prec(&m).unwrap());
        }
        // multiplicative on products
        let x = ScaledElt::exact(ring.gen());
        let y = ScaledElt::exact(ring.from_int(2));
        let a = g.u_root(0, &x).unwrap();
        let b = g.u_root(4, &y).unwrap();
        let lhs = g.theta_mat(&a.mul(&b).unwrap()).unwrap();
        let rhs = g.theta_mat(&a).unwrap().mul(&g.theta_mat(&b).unwrap()).unwrap();
        assert!(lhs.eq_to_common_prec(&rhs).unwrap());
        // word-level action agrees with the matrix action
        for _ in 0..20 {
            let word: Vec<Letter> = (0..3)
                .map(|_| Letter::Root {
                    idx: rng.gen_range(0..6),
                    c: ScaledElt::exact(
                        ring.from_coeffs(&[rng.gen_range(0..25), rng.gen_range(0..25)]),
                    ),
                })
                .collect();
            let m1 = g.theta_mat(&g.word_matrix(&word).unwrap()).unwrap();
            let m2 = g.word_matrix(&g.theta_word(&word).unwrap()).unwrap();
            assert!(m1.eq_to_common_prec(&m2).unwrap());
        }
    }

    #[test]
    fn matrix_inverse_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for g in groups_split() {
            let r = &g.ring;
            for _ in 0..20 {
                let word: Vec<Letter> = (0..4)
                    .map(|_| Letter::Root {
                        idx: rng.gen_range(0..g.n_roots()),
                        c: rand_elt(r, &mut rng),
                    })
                    .collect();
                let m = g.word_matrix(&word).unwrap();
                let mi = m.inv().unwrap();
                let prod = m.mul(&mi).unwrap();
                let id = Mat::identity(r, g.dim);
                assert!(prod.eq_to_common_prec(&id).unwrap(), "{:?}", g.kind);
            }
        }
    }

    #[test]
    fn lattice_conjugation_scales_payloads() {
        // pi^lambda u_gamma(c) pi^-lambda = u_gamma(p^<gamma,lambda> c)
        for g in groups_split() {
            let r = &g.ring;
            let lam: Vec<i64> = (0..g.rank()).map(|i| 1 - (i as i64)).collect();
            let t = g
                .torus_mat(&vec![ScaledElt::one(r); g.rank()], &lam)
                .unwrap();
            let ti = t.inv().unwrap();
            for idx in 0..g.n_roots() {
                let c = ScaledElt::exact(r.from_int(4));
                let lhs = t.mul(&g.u_root(idx, &c).unwrap()).unwrap().mul(&ti).unwrap();
                let k = pairing(&g.datum.roots[idx], &lam);
                let scaled = c.mul(&ScaledElt::p_pow(r, k)).unwrap();
                let rhs = g.u_root(idx, &scaled).unwrap();
                assert!(lhs.eq_to_common_prec(&rhs).unwrap(), "{:?} {idx}", g.kind);
            }
        }
    }
}
