//! Root data for the supported group catalog, with integer-exact Weyl group
//! machinery.
//!
//! Characters and cocharacters of the (split, over the big field) maximal
//! torus live in Z^rank with the standard dot pairing. Roots are listed
//! positives first in a fixed collection order, then the corresponding
//! negatives. The one twisted entry carries the lattice automorphism induced
//! by the nontrivial Galois element together with the restriction map to the
//! maximal split subtorus.

use crate::error::{Error, Result};
use std::collections::HashMap;

/// Supported reductive groups. The unitary entry is quasi-split, split by an
/// unramified quadratic extension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GroupKind {
    Sl2,
    Gl2,
    Sl3,
    Sp4,
    Su3,
}

impl GroupKind {
    pub fn name(&self) -> &'static str {
        match self {
            GroupKind::Sl2 => "SL2",
            GroupKind::Gl2 => "GL2",
            GroupKind::Sl3 => "SL3",
            GroupKind::Sp4 => "Sp4",
            GroupKind::Su3 => "SU3",
        }
    }

    pub fn parse(s: &str) -> Result<GroupKind> {
        match s.to_ascii_uppercase().as_str() {
            "SL2" => Ok(GroupKind::Sl2),
            "GL2" => Ok(GroupKind::Gl2),
            "SL3" => Ok(GroupKind::Sl3),
            "SP4" => Ok(GroupKind::Sp4),
            "SU3" => Ok(GroupKind::Su3),
            _ => Err(Error::UnknownGroup(s.to_string())),
        }
    }

    /// Degree of the residue extension splitting the group (1 when split).
    pub fn splitting_degree(&self) -> usize {
        match self {
            GroupKind::Su3 => 2,
            _ => 1,
        }
    }

    /// Matrix size of the standard representation used by the pinning.
    pub fn matrix_dim(&self) -> usize {
        match self {
            GroupKind::Sl2 | GroupKind::Gl2 => 2,
            GroupKind::Sl3 | GroupKind::Su3 => 3,
            GroupKind::Sp4 => 4,
        }
    }
}

pub type Chi = Vec<i64>; // element of X^*
pub type Lam = Vec<i64>; // element of X_*

pub fn pairing(chi: &[i64], lam: &[i64]) -> i64 {
    chi.iter().zip(lam).map(|(a, b)| a * b).sum()
}

fn mat_apply(m: &[Vec<i64>], v: &[i64]) -> Vec<i64> {
    m.iter().map(|row| pairing(row, v)).collect()
}

fn mat_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    let mut c = vec![vec![0i64; n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == 0 {
                continue;
            }
            for j in 0..n {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

fn identity(n: usize) -> Vec<Vec<i64>> {
    let mut m = vec![vec![0i64; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1;
    }
    m
}

/// One finite Weyl group element: its action on both lattices and a reduced
/// word in simple reflections.
#[derive(Clone, Debug)]
pub struct WeylElt {
    pub on_char: Vec<Vec<i64>>,
    pub on_cochar: Vec<Vec<i64>>,
    pub word: Vec<usize>,
}

/// Finite Weyl group, generated breadth-first so stored words are reduced.
pub struct WeylGroup {
    pub elems: Vec<WeylElt>,
    index: HashMap<Vec<Vec<i64>>, usize>,
}

impl WeylGroup {
    fn generate(datum: &RootDatum) -> WeylGroup {
        let rank = datum.rank;
        let gens_char: Vec<Vec<Vec<i64>>> = datum
            .simple
            .iter()
            .map(|&s| {
                // s_alpha(chi) = chi - <chi, alpha^vee> alpha
                let alpha = &datum.roots[s];
                let av = &datum.coroots[s];
                let mut m = identity(rank);
                for (j, row) in m.iter_mut().enumerate() {
                    let mut e = vec![0i64; rank];
                    e[j] = 1;
                    // careful: matrix rows represent images of basis vectors
                    // under the transpose convention; build directly instead
                    let img: Vec<i64> = (0..rank)
                        .map(|i| e[i] - av[j] * alpha[i])
                        .collect();
                    *row = img;
                }
                // row j = image of e_j; apply as sum_j v_j * row_j
                m
            })
            .collect();
        let gens_cochar: Vec<Vec<Vec<i64>>> = datum
            .simple
            .iter()
            .map(|&s| {
                let alpha = &datum.roots[s];
                let av = &datum.coroots[s];
                let mut m = identity(rank);
                for (j, row) in m.iter_mut().enumerate() {
                    let mut e = vec![0i64; rank];
                    e[j] = 1;
                    let img: Vec<i64> = (0..rank)
                        .map(|i| e[i] - alpha[j] * av[i])
                        .collect();
                    *row = img;
                }
                m
            })
            .collect();
        let id = WeylElt {
            on_char: identity(rank),
            on_cochar: identity(rank),
            word: vec![],
        };
        let mut elems = vec![id];
        let mut index = HashMap::new();
        index.insert(identity(rank), 0usize);
        let mut frontier = vec![0usize];
        while !frontier.is_empty() {
            let mut next = vec![];
            for &wi in &frontier {
                for (si, (gc, gco)) in gens_char.iter().zip(&gens_cochar).enumerate() {
                    // right multiplication: w * s_i acts as chi -> w(s_i(chi))
                    let nc = compose_row(&elems[wi].on_char, gc);
                    if index.contains_key(&nc) {
                        continue;
                    }
                    let nco = compose_row(&elems[wi].on_cochar, gco);
                    let mut word = elems[wi].word.clone();
                    word.push(si);
                    index.insert(nc.clone(), elems.len());
                    next.push(elems.len());
                    elems.push(WeylElt {
                        on_char: nc,
                        on_cochar: nco,
                        word,
                    });
                }
            }
            frontier = next;
        }
        WeylGroup { elems, index }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn length(&self, w: usize) -> usize {
        self.elems[w].word.len()
    }

    pub fn act_char(&self, w: usize, chi: &[i64]) -> Vec<i64> {
        apply_row(&self.elems[w].on_char, chi)
    }

    pub fn act_cochar(&self, w: usize, lam: &[i64]) -> Vec<i64> {
        apply_row(&self.elems[w].on_cochar, lam)
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        let m = compose_row(&self.elems[a].on_char, &self.elems[b].on_char);
        self.index[&m]
    }

    pub fn inv(&self, a: usize) -> usize {
        // order is small; scan
        (0..self.elems.len())
            .find(|&b| self.mul(a, b) == 0)
            .expect("group closed under inverse")
    }

    pub fn lookup_char_matrix(&self, m: &[Vec<i64>]) -> Option<usize> {
        self.index.get(&m.to_vec()).copied()
    }

    /// Unique element of maximal length.
    pub fn longest(&self) -> usize {
        (0..self.elems.len())
            .max_by_key(|&w| self.length(w))
            .unwrap()
    }
}

/// Row-convention application: image of v is sum_j v_j * row_j.
fn apply_row(m: &[Vec<i64>], v: &[i64]) -> Vec<i64> {
    let rank = m.len();
    let mut out = vec![0i64; rank];
    for (j, &vj) in v.iter().enumerate() {
        if vj == 0 {
            continue;
        }
        for i in 0..rank {
            out[i] += vj * m[j][i];
        }
    }
    out
}

/// (a then b)? No: returns the map v -> a-row-apply(b-row-apply? ) --
/// composition such that apply(compose(a,b), v) = apply(a, apply(b, v)).
fn compose_row(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let rank = a.len();
    (0..rank)
        .map(|j| apply_row(a, &b[j]))
        .collect()
}

/// Galois-twist data for a quasi-split entry.
pub struct TwistData {
    /// Lattice action on X^* (row convention).
    pub on_char: Vec<Vec<i64>>,
    /// Lattice action on X_*.
    pub on_cochar: Vec<Vec<i64>>,
    /// Image of each root index under the root permutation.
    pub root_perm: Vec<usize>,
    /// Restriction X^*(T) -> X^*(A) = Z to the maximal split subtorus.
    pub res: Vec<i64>,
}

pub struct RootDatum {
    pub kind: GroupKind,
    pub rank: usize,
    /// Positives first (fixed collection order), then matching negatives.
    pub roots: Vec<Chi>,
    pub coroots: Vec<Lam>,
    /// Indices of the simple roots within `roots`.
    pub simple: Vec<usize>,
    pub n_pos: usize,
    pub weyl: WeylGroup,
    pub twist: Option<TwistData>,
}

impl RootDatum {
    pub fn new(kind: GroupKind) -> RootDatum {
        let (rank, pos, pos_co, simple): (usize, Vec<Chi>, Vec<Lam>, Vec<usize>) = match kind {
            GroupKind::Sl2 => (1, vec![vec![2]], vec![vec![1]], vec![0]),
            GroupKind::Gl2 => (2, vec![vec![1, -1]], vec![vec![1, -1]], vec![0]),
            GroupKind::Sl3 | GroupKind::Su3 => (
                2,
                vec![vec![1, -1], vec![1, 2], vec![2, 1]],
                vec![vec![1, -1], vec![0, 1], vec![1, 0]],
                vec![0, 1],
            ),
            GroupKind::Sp4 => (
                2,
                vec![vec![1, -1], vec![0, 2], vec![1, 1], vec![2, 0]],
                vec![vec![1, -1], vec![0, 1], vec![1, 1], vec![1, 0]],
                vec![0, 1],
            ),
        };
        let n_pos = pos.len();
        let mut roots = pos.clone();
        let mut coroots = pos_co.clone();
        for r in &pos {
            roots.push(r.iter().map(|x| -x).collect());
        }
        for r in &pos_co {
            coroots.push(r.iter().map(|x| -x).collect());
        }
        let mut datum = RootDatum {
            kind,
            rank,
            roots,
            coroots,
            simple,
            n_pos,
            weyl: WeylGroup {
                elems: vec![],
                index: HashMap::new(),
            },
            twist: None,
        };
        datum.weyl = WeylGroup::generate(&datum);
        if kind == GroupKind::Su3 {
            // sigma(a, b) = (ab, b^{-1}) on torus points; on X_* rows are
            // images of basis cocharacters, on X^* the adjoint map
            let on_cochar = vec![vec![1, 0], vec![1, -1]];
            let on_char = vec![vec![1, 1], vec![0, -1]];
            let root_perm = (0..datum.roots.len())
                .map(|i| {
                    let img = apply_row(&on_char, &datum.roots[i]);
                    datum.root_index(&img).expect("twist permutes roots")
                })
                .collect();
            datum.twist = Some(TwistData {
                on_char,
                on_cochar,
                root_perm,
                res: vec![1, 0],
            });
        }
        datum
    }

    pub fn root_index(&self, chi: &[i64]) -> Option<usize> {
        self.roots.iter().position(|r| r == chi)
    }

    pub fn is_positive(&self, idx: usize) -> bool {
        idx < self.n_pos
    }

    /// Index of the negative of root `idx`.
    pub fn opposite(&self, idx: usize) -> usize {
        (idx + self.n_pos) % (2 * self.n_pos)
    }

    /// Sum of the positive roots.
    pub fn two_rho(&self) -> Chi {
        let mut s = vec![0i64; self.rank];
        for r in &self.roots[..self.n_pos] {
            for (i, &x) in r.iter().enumerate() {
                s[i] += x;
            }
        }
        s
    }

    /// Height of a cocharacter against 2rho after moving to the dominant
    /// chamber; equals sum over positive roots of |<alpha, lam>|.
    pub fn translation_length(&self, lam: &[i64]) -> i64 {
        self.roots[..self.n_pos]
            .iter()
            .map(|a| pairing(a, lam).abs())
            .sum()
    }

    pub fn dominant(&self, lam: &[i64]) -> Vec<i64> {
        let mut v = lam.to_vec();
        loop {
            let mut moved = false;
            for &s in &self.simple {
                if pairing(&self.roots[s], &v) < 0 {
                    let c = pairing(&self.roots[s], &v);
                    let av = &self.coroots[s];
                    for i in 0..self.rank {
                        v[i] -= c * av[i];
                    }
                    moved = true;
                }
            }
            if !moved {
                return v;
            }
        }
    }

    /// Minimal-length representatives of W_M \ W for the standard Levi with
    /// the given simple root indices (indices into `simple`).
    pub fn min_coset_reps(&self, levi: &[usize]) -> Vec<usize> {
        let mut reps: Vec<usize> = (0..self.weyl.len())
            .filter(|&w| {
                let wi = self.weyl.inv(w);
                levi.iter().all(|&li| {
                    let a = &self.roots[self.simple[li]];
                    let img = self.weyl.act_char(wi, a);
                    self.root_index(&img)
                        .map(|idx| self.is_positive(idx))
                        .unwrap_or(false)
                })
            })
            .collect();
        reps.sort_by_key(|&w| (self.weyl.length(w), w));
        reps
    }

    /// Simple reflection as a Weyl element index.
    pub fn simple_reflection(&self, i: usize) -> usize {
        let rank = self.rank;
        let alpha = &self.roots[self.simple[i]];
        let av = &self.coroots[self.simple[i]];
        let mut m = identity(rank);
        for (j, row) in m.iter_mut().enumerate() {
            let mut e = vec![0i64; rank];
            e[j] = 1;
            let img: Vec<i64> = (0..rank).map(|k| e[k] - av[j] * alpha[k]).collect();
            *row = img;
        }
        self.weyl.lookup_char_matrix(&m).expect("reflection present")
    }

    /// Structured export of the datum.
    pub fn export_record(&self) -> String {
        let mut out = format!("datum {} rank {}\n", self.kind.name(), self.rank);
        for i in 0..self.roots.len() {
            let r: Vec<String> = self.roots[i].iter().map(|x| x.to_string()).collect();
            let c: Vec<String> = self.coroots[i].iter().map(|x| x.to_string()).collect();
            out += &format!("root {} [{}] coroot [{}]\n", i, r.join(" "), c.join(" "));
        }
        let s: Vec<String> = self.simple.iter().map(|x| x.to_string()).collect();
        out += &format!("simple [{}]\n", s.join(" "));
        if let Some(t) = &self.twist {
            let p: Vec<String> = t.root_perm.iter().map(|x| x.to_string()).collect();
            out += &format!("twist-perm [{}]\n", p.join(" "));
        }
        out
    }

    /// Elements of the theta-fixed subgroup of W (all of W when untwisted).
    pub fn theta_fixed_weyl(&self) -> Vec<usize> {
        match &self.twist {
            None => (0..self.weyl.len()).collect(),
            Some(t) => (0..self.weyl.len())
                .filter(|&w| {
                    // theta w theta^{-1} = w as lattice maps
                    let m = compose_row(
                        &t.on_char,
                        &compose_row(&self.weyl.elems[w].on_char, &t.on_char),
                    );
                    m == self.weyl.elems[w].on_char
                })
                .collect(),
        }
    }
}

/// Element t_lambda * w of the extended affine Weyl group.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineElt {
    pub lambda: Lam,
    pub w: usize,
}

impl AffineElt {
    pub fn translation(lam: &[i64]) -> AffineElt {
        AffineElt {
            lambda: lam.to_vec(),
            w: 0,
        }
    }

    pub fn finite(w: usize) -> AffineElt {
        AffineElt { lambda: vec![], w }
    }

    /// (t_a u)(t_b v) = t_{a + u b} (u v).
    pub fn mul(&self, other: &AffineElt, datum: &RootDatum) -> AffineElt {
        let rank = datum.rank;
        let a = pad(&self.lambda, rank);
        let b = pad(&other.lambda, rank);
        let ub = datum.weyl.act_cochar(self.w, &b);
        let lambda: Vec<i64> = a.iter().zip(&ub).map(|(x, y)| x + y).collect();
        AffineElt {
            lambda,
            w: datum.weyl.mul(self.w, other.w),
        }
    }

    pub fn inv(&self, datum: &RootDatum) -> AffineElt {
        let wi = datum.weyl.inv(self.w);
        let rank = datum.rank;
        let a = pad(&self.lambda, rank);
        let neg: Vec<i64> = datum
            .weyl
            .act_cochar(wi, &a)
            .iter()
            .map(|x| -x)
            .collect();
        AffineElt { lambda: neg, w: wi }
    }
}

fn pad(v: &[i64], rank: usize) -> Vec<i64> {
    let mut out = v.to_vec();
    out.resize(rank, 0);
    out
}

/// Serialize a word letter for reports: translation part and finite part.
pub fn affine_record(e: &AffineElt, datum: &RootDatum) -> String {
    let lam = pad(&e.lambda, datum.rank);
    let l: Vec<String> = lam.iter().map(|x| x.to_string()).collect();
    let word: Vec<String> = datum.weyl.elems[e.w]
        .word
        .iter()
        .map(|x| x.to_string())
        .collect();
    format!("t[{}] w[{}]", l.join(" "), word.join(" "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn weyl_group_orders() {
        for (kind, n) in [
            (GroupKind::Sl2, 2),
            (GroupKind::Gl2, 2),
            (GroupKind::Sl3, 6),
            (GroupKind::Sp4, 8),
            (GroupKind::Su3, 6),
        ] {
            let d = RootDatum::new(kind);
            assert_eq!(d.weyl.len(), n, "{:?}", kind);
        }
    }

    #[test]
    fn weyl_permutes_roots_and_preserves_pairing() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for kind in [
            GroupKind::Sl2,
            GroupKind::Gl2,
            GroupKind::Sl3,
            GroupKind::Sp4,
        ] {
            let d = RootDatum::new(kind);
            for w in 0..d.weyl.len() {
                for (ri, r) in d.roots.iter().enumerate() {
                    let img = d.weyl.act_char(w, r);
                    let idx = d.root_index(&img).expect("root image is a root");
                    // coroot goes along
                    assert_eq!(d.weyl.act_cochar(w, &d.coroots[ri]), d.coroots[idx]);
                }
                for _ in 0..10 {
                    let chi: Vec<i64> = (0..d.rank).map(|_| rng.gen_range(-4..5)).collect();
                    let lam: Vec<i64> = (0..d.rank).map(|_| rng.gen_range(-4..5)).collect();
                    assert_eq!(
                        pairing(&d.weyl.act_char(w, &chi), &d.weyl.act_cochar(w, &lam)),
                        pairing(&chi, &lam)
                    );
                }
            }
        }
    }

    #[test]
    fn cartan_pairings() {
        let d = RootDatum::new(GroupKind::Sl3);
        assert_eq!(pairing(&d.roots[0], &d.coroots[0]), 2);
        assert_eq!(pairing(&d.roots[1], &d.coroots[0]), -1);
        assert_eq!(pairing(&d.roots[0], &d.coroots[1]), -1);
        let d = RootDatum::new(GroupKind::Sp4);
        assert_eq!(pairing(&d.roots[1], &d.coroots[0]), -2);
        assert_eq!(pairing(&d.roots[0], &d.coroots[1]), -1);
        for kind in [GroupKind::Sl2, GroupKind::Gl2, GroupKind::Sl3, GroupKind::Sp4] {
            let d = RootDatum::new(kind);
            for i in 0..d.roots.len() {
                assert_eq!(pairing(&d.roots[i], &d.coroots[i]), 2);
            }
        }
    }

    #[test]
    fn two_rho_heights() {
        assert_eq!(RootDatum::new(GroupKind::Sl2).two_rho(), vec![2]);
        assert_eq!(RootDatum::new(GroupKind::Gl2).two_rho(), vec![1, -1]);
        assert_eq!(RootDatum::new(GroupKind::Sl3).two_rho(), vec![4, 2]);
        assert_eq!(RootDatum::new(GroupKind::Sp4).two_rho(), vec![4, 2]);
        // volume exponents used downstream
        let sl2 = RootDatum::new(GroupKind::Sl2);
        assert_eq!(pairing(&sl2.two_rho(), &[1]), 2);
        let gl2 = RootDatum::new(GroupKind::Gl2);
        assert_eq!(pairing(&gl2.two_rho(), &[1, 0]), 1);
        let sp4 = RootDatum::new(GroupKind::Sp4);
        assert_eq!(pairing(&sp4.two_rho(), &[2, 1]), 10);
        // (2,1) is regular for Sp4: no positive root pairs to zero
        for a in &sp4.roots[..sp4.n_pos] {
            assert_ne!(pairing(a, &[2, 1]), 0);
        }
    }

    #[test]
    fn longest_elements() {
        let sl3 = RootDatum::new(GroupKind::Sl3);
        let w0 = sl3.weyl.longest();
        assert_eq!(sl3.weyl.length(w0), 3);
        // w0 maps alpha to -beta
        assert_eq!(sl3.weyl.act_char(w0, &[1, -1]), vec![-1, -2]);
        let sp4 = RootDatum::new(GroupKind::Sp4);
        let w0 = sp4.weyl.longest();
        assert_eq!(sp4.weyl.length(w0), 4);
        assert_eq!(sp4.weyl.act_char(w0, &[1, 0]), vec![-1, 0]);
        assert_eq!(sp4.weyl.act_char(w0, &[0, 1]), vec![0, -1]);
    }

    #[test]
    fn braid_relation_sp4() {
        let d = RootDatum::new(GroupKind::Sp4);
        let s0 = d.simple_reflection(0);
        let s1 = d.simple_reflection(1);
        let m = |a: usize, b: usize| d.weyl.mul(a, b);
        let lhs = m(m(m(s0, s1), s0), s1);
        let rhs = m(m(m(s1, s0), s1), s0);
        assert_eq!(lhs, rhs);
        assert_ne!(m(m(s0, s1), s0), m(m(s1, s0), s1));
    }

    #[test]
    fn coset_representatives() {
        let sl3 = RootDatum::new(GroupKind::Sl3);
        // Levi generated by the first simple root: three cosets, lengths 0,1,2
        let reps = sl3.min_coset_reps(&[0]);
        assert_eq!(reps.len(), 3);
        let lens: Vec<usize> = reps.iter().map(|&w| sl3.weyl.length(w)).collect();
        assert_eq!(lens, vec![0, 1, 2]);
        // Levi = torus: all of W
        assert_eq!(sl3.min_coset_reps(&[]).len(), 6);
    }

    #[test]
    fn twist_data() {
        let d = RootDatum::new(GroupKind::Su3);
        let t = d.twist.as_ref().unwrap();
        // alpha <-> beta, alpha+beta fixed
        assert_eq!(t.root_perm[0], 1);
        assert_eq!(t.root_perm[1], 0);
        assert_eq!(t.root_perm[2], 2);
        // involution
        let sq = compose_row(&t.on_char, &t.on_char);
        assert_eq!(sq, identity(2));
        let res_of = |i: usize| pairing(&d.roots[i], &[1, 0]);
        // res map defined on X^*: alpha, beta -> 1, alpha+beta -> 2
        assert_eq!(res_of(0), 1);
        assert_eq!(res_of(1), 1);
        assert_eq!(res_of(2), 2);
        // fixed subgroup of W has order 2: identity and the longest element
        let fixed = d.theta_fixed_weyl();
        assert_eq!(fixed.len(), 2);
        assert!(fixed.contains(&0));
        assert!(fixed.contains(&d.weyl.longest()));
    }

    #[test]
    fn affine_group_law() {
        let d = RootDatum::new(GroupKind::Sl2);
        let s = d.simple_reflection(0);
        let a = AffineElt {
            lambda: vec![1],
            w: s,
        };
        let b = AffineElt {
            lambda: vec![1],
            w: 0,
        };
        // (t_1 s)(t_1) = t_{1 + s(1)} s = t_0 s
        let ab = a.mul(&b, &d);
        assert_eq!(ab.lambda, vec![0]);
        assert_eq!(ab.w, s);
        // inverses
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for kind in [GroupKind::Sl2, GroupKind::Sp4] {
            let d = RootDatum::new(kind);
            for _ in 0..50 {
                let x = AffineElt {
                    lambda: (0..d.rank).map(|_| rng.gen_range(-3..4)).collect(),
                    w: rng.gen_range(0..d.weyl.len()),
                };
                let y = AffineElt {
                    lambda: (0..d.rank).map(|_| rng.gen_range(-3..4)).collect(),
                    w: rng.gen_range(0..d.weyl.len()),
                };
                let z = AffineElt {
                    lambda: (0..d.rank).map(|_| rng.gen_range(-3..4)).collect(),
                    w: rng.gen_range(0..d.weyl.len()),
                };
                assert_eq!(
                    x.mul(&y, &d).mul(&z, &d),
                    x.mul(&y.mul(&z, &d), &d)
                );
                let xi = x.inv(&d);
                let e = x.mul(&xi, &d);
                assert_eq!(e.w, 0);
                assert!(e.lambda.iter().all(|&c| c == 0));
            }
        }
    }

    #[test]
    fn translation_lengths() {
        let sl2 = RootDatum::new(GroupKind::Sl2);
        assert_eq!(sl2.translation_length(&[1]), 2);
        assert_eq!(sl2.translation_length(&[-3]), 6);
        let sp4 = RootDatum::new(GroupKind::Sp4);
        assert_eq!(sp4.translation_length(&[2, 1]), 10);
        assert_eq!(sp4.dominant(&[-2, 1]), vec![2, 1]);
    }

    #[test]
    fn export_shape() {
        let d = RootDatum::new(GroupKind::Sl2);
        let rec = d.export_record();
        assert!(rec.contains("datum SL2 rank 1"));
        assert!(rec.contains("root 0 [2] coroot [1]"));
    }
}
