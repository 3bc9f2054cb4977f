//! Tits buildings of signature (2,n) lattices: the star building of a
//! maximal lattice, descent to finite-index subgroups, the transitivity
//! element tau(x,y) on split maximal lattices, ascent to enclosing groups,
//! and deterministic DOT / plain-text export.
//!
//! Everything runs in the coordinates of a split maximal lattice
//! Lp = 2U + L0 (first four basis vectors two canonical hyperbolic planes).

use crate::cosets::{coset_transversal, gamma_n_transversal, quotient_exponent, stab_coset_transversal, Transversal};
use crate::discform::FiniteQuadraticForm;
use crate::isometry::{enumerate_genus_definite, iso_definite_first, DefiniteLattice};
use crate::lattice::{isotropic_quotient_gram, maximal_overlattice, LatRef, Lattice, Sublattice};
use crate::matrix::{int, kernel_columns, rat_of, row_smith, Int, IntMat, Rat, RatMat};
use crate::ogroup::{
    eichler_transvection, oplus_generators_definite, oplus_generators_lorentzian, sl2_embed,
    spinor_norm, u1_negator, GroupSpec, OrthMap, Sl2Side,
};
use crate::par;
use crate::vectors::{primitive_scale, q_to_z, sign_normalize, z_to_q, ZVec};
use crate::{Error, Result};
use num_traits::{One, Signed, Zero};

/// A Z-basis {x_i} of the maximal lattice adapted to a totally isotropic
/// sublattice: {x1,x2} and {x3,x4} are canonical bases of orthogonal
/// hyperbolic planes and the remaining columns span their complement. For a
/// line, x1 spans it; for a plane, <x1, x3> is it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitBasis {
    pub cols: IntMat,
}

impl SplitBasis {
    pub fn new(lp: &LatRef, cols: IntMat) -> Result<Self> {
        let g = lp.gram_of(&cols);
        let u = crate::lattice::gram_u();
        for b in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    if g[(2 * b + i, 2 * b + j)] != u[(i, j)] {
                        return Err(Error::Precondition("split basis lacks canonical 2U".into()));
                    }
                }
            }
        }
        for i in 0..2 {
            for j in 2..4 {
                if !g[(i, j)].is_zero() {
                    return Err(Error::Precondition("hyperbolic planes not orthogonal".into()));
                }
            }
        }
        for i in 0..4 {
            for j in 4..cols.cols() {
                if !g[(i, j)].is_zero() {
                    return Err(Error::Precondition("2U block does not split off".into()));
                }
            }
        }
        if cols.det().abs() != Int::one() {
            return Err(Error::Precondition("split basis must be unimodular".into()));
        }
        Ok(SplitBasis { cols })
    }

    pub fn x(&self, i: usize) -> ZVec {
        self.cols.column(i)
    }

    /// Gram of the definite part L0'.
    pub fn l0_gram(&self, lp: &LatRef) -> IntMat {
        let n = self.cols.cols();
        let mut rest = IntMat::zero(self.cols.rows(), n - 4);
        for j in 4..n {
            for i in 0..self.cols.rows() {
                rest[(i, j - 4)] = self.cols[(i, j)].clone();
            }
        }
        lp.gram_of(&rest)
    }

    /// Gram of the Lorentzian part L1' = <x3, ..., xn> (second U plus L0').
    pub fn l1_gram(&self, lp: &LatRef) -> IntMat {
        let n = self.cols.cols();
        let mut rest = IntMat::zero(self.cols.rows(), n - 2);
        for j in 2..n {
            for i in 0..self.cols.rows() {
                rest[(i, j - 2)] = self.cols[(i, j)].clone();
            }
        }
        lp.gram_of(&rest)
    }

    pub fn translated(&self, g: &OrthMap) -> Result<SplitBasis> {
        let cols = g.mat.mul(&self.cols.to_rat()).to_int().ok_or(Error::NotIntegral)?;
        Ok(SplitBasis { cols })
    }
}

/// The working context: a split maximal lattice with O^+ generators.
pub struct MaximalContext {
    /// the maximal lattice in split coordinates (Gram = 2U + G(L0))
    pub lp: LatRef,
    /// generators of O^+(Lp)
    pub gens: Vec<OrthMap>,
    pub oplus: GroupSpec,
}

impl MaximalContext {
    /// Build the context directly from a lattice that is already maximal
    /// and in split form.
    pub fn of_split_maximal(lp: &LatRef) -> Result<Self> {
        if !lp.is_maximal() {
            return Err(Error::Precondition("lattice is not maximal".into()));
        }
        SplitBasis::new(lp, IntMat::identity(lp.rank()))?;
        let n = lp.rank();
        // O+(L1) generators for the Lorentzian L1 = U + L0
        let mut l1g = IntMat::zero(n - 2, n - 2);
        for i in 2..n {
            for j in 2..n {
                l1g[(i - 2, j - 2)] = lp.gram()[(i, j)].clone();
            }
        }
        let l1 = Lattice::new(l1g)?;
        let gens1 = oplus_generators_lorentzian(&l1, None)?;
        let gens = crate::ogroup::generators_oplus_split(lp, &gens1)?;
        Ok(MaximalContext { lp: lp.clone(), gens, oplus: GroupSpec::oplus(lp) })
    }

    /// Identity split basis of the ambient.
    pub fn identity_split(&self) -> SplitBasis {
        SplitBasis { cols: IntMat::identity(self.lp.rank()) }
    }
}

/// Maximal-overlattice data rebased to split coordinates: the overlattice
/// of `sub`, an O^+ context on it, and the basis of `sub` inside.
pub struct AmbientData {
    pub ctx: MaximalContext,
    pub sub: LatRef,
    /// columns: basis of sub in Lp coordinates
    pub sub_basis: IntMat,
}

/// Embed a lattice into a split maximal overlattice. The overlattice is
/// rebased so its Gram is literally 2U + G(L0).
pub fn ambient_for(sub: &LatRef) -> Result<AmbientData> {
    let ov = maximal_overlattice(sub)?;
    let raw = ov.lattice;
    let split = find_split_basis(&raw)?;
    let gram_s = raw.gram_of(&split);
    let lp = Lattice::new(gram_s)?;
    // sub basis in rebased coordinates: split^{-1} * embed
    let sub_basis = split
        .to_rat()
        .inverse()
        .ok_or(Error::Degenerate)?
        .mul(&ov.embed.to_rat())
        .to_int()
        .ok_or(Error::NotIntegral)?;
    let ctx = MaximalContext::of_split_maximal(&lp)?;
    Ok(AmbientData { ctx, sub: sub.clone(), sub_basis })
}

/// Find a Z-basis splitting two canonical hyperbolic planes off a maximal
/// lattice of signature (2,n). Deterministic: box searches in lexicographic
/// order.
pub fn find_split_basis(lat: &LatRef) -> Result<IntMat> {
    let n = lat.rank();
    if lat.signature().0 != 2 {
        return Err(Error::Precondition("expected signature (2,n)".into()));
    }
    // fast path: already split
    if SplitBasis::new(lat, IntMat::identity(n)).is_ok() {
        return Ok(IntMat::identity(n));
    }
    // first hyperbolic pair in L
    let x1 = first_isotropic(lat.gram(), 4).ok_or(Error::Incomplete("no isotropic vector".into()))?;
    let (x1, x2) = hyperbolic_partner(lat.gram(), &x1)?;
    // complement of the pair
    let w = pair_complement(lat.gram(), &x1, &x2);
    let wg = lat.gram_of(&w);
    // second pair inside W
    let z = first_isotropic(&wg, 4).ok_or(Error::Incomplete("no second isotropic vector".into()))?;
    let wlat = Lattice::new(wg.clone())?;
    let (z, zp) = hyperbolic_partner(wlat.gram(), &z)?;
    let x3 = w.mul_vec(&z);
    let x4 = w.mul_vec(&zp);
    let d = pair_complement(wlat.gram(), &z, &zp);
    let l0_cols = w.mul(&d);
    let mut cols: Vec<ZVec> = vec![x1, x2, x3, x4];
    for j in 0..l0_cols.cols() {
        cols.push(l0_cols.column(j));
    }
    let m = IntMat::from_columns(&cols);
    SplitBasis::new(lat, m.clone())?;
    Ok(m)
}

/// First primitive isotropic vector of a (possibly indefinite) Gram in a
/// growing box, lexicographic order.
fn first_isotropic(gram: &IntMat, max_radius: i64) -> Option<ZVec> {
    let n = gram.rows();
    let norm = |v: &ZVec| -> Int {
        let mut s = Int::zero();
        for i in 0..n {
            if v[i].is_zero() {
                continue;
            }
            for j in 0..n {
                s += &v[i] * &gram[(i, j)] * &v[j];
            }
        }
        s
    };
    for radius in 1..=max_radius {
        let mut v = vec![int(-radius); n];
        'sweep: loop {
            if v.iter().any(|x| !x.is_zero())
                && norm(&v).is_zero()
                && crate::vectors::content(&v).is_one()
            {
                return Some(sign_normalize(&v));
            }
            let mut i = 0;
            loop {
                if i == n {
                    break 'sweep;
                }
                v[i] += 1;
                if v[i] <= int(radius) {
                    break;
                }
                v[i] = int(-radius);
                i += 1;
            }
        }
    }
    None
}

/// Complete a primitive isotropic vector of divisor one to a canonical
/// hyperbolic pair (x, y): (x,y) = 1, y isotropic.
fn hyperbolic_partner(gram: &IntMat, x: &ZVec) -> Result<(ZVec, ZVec)> {
    let n = gram.rows();
    let hat: ZVec = (0..n).map(|j| (0..n).map(|i| &x[i] * &gram[(i, j)]).sum()).collect();
    let (d, q) = row_smith(&hat);
    if !d.is_one() {
        return Err(Error::Precondition(
            "isotropic vector has divisor > 1; lattice not maximal?".into(),
        ));
    }
    let u: ZVec = q.column(0);
    // y = u - (u^2/2) x
    let uu = {
        let mut s = Int::zero();
        for i in 0..n {
            for j in 0..n {
                s += &u[i] * &gram[(i, j)] * &u[j];
            }
        }
        s
    };
    let half = uu / int(2);
    let y: ZVec = (0..n).map(|i| &u[i] - &half * &x[i]).collect();
    Ok((x.clone(), y))
}

/// Saturated orthogonal complement of a hyperbolic pair.
fn pair_complement(gram: &IntMat, x: &ZVec, y: &ZVec) -> IntMat {
    let n = gram.rows();
    let mut rows = IntMat::zero(2, n);
    for j in 0..n {
        rows[(0, j)] = (0..n).map(|i| &x[i] * &gram[(i, j)]).sum();
        rows[(1, j)] = (0..n).map(|i| &y[i] * &gram[(i, j)]).sum();
    }
    kernel_columns(&rows)
}

/// Split basis adapted to an isotropic line <v>.
pub fn split_for_line(ctx: &MaximalContext, v: &[Int]) -> Result<SplitBasis> {
    let lp = &ctx.lp;
    // identity shortcut: the canonical basis is already adapted to <e1>
    if sign_normalize(v) == sign_normalize(&ctx.identity_split().x(0)) {
        return Ok(ctx.identity_split());
    }
    let (x1, x2) = hyperbolic_partner(lp.gram(), &sign_normalize(v))?;
    let w = pair_complement(lp.gram(), &x1, &x2);
    let wg = lp.gram_of(&w);
    let z = first_isotropic(&wg, 5).ok_or(Error::Incomplete("no isotropic in complement".into()))?;
    let wlat = Lattice::new(wg)?;
    let (z, zp) = hyperbolic_partner(wlat.gram(), &z)?;
    let x3 = w.mul_vec(&z);
    let x4 = w.mul_vec(&zp);
    let d = pair_complement(wlat.gram(), &z, &zp);
    let l0_cols = w.mul(&d);
    let mut cols: Vec<ZVec> = vec![x1, x2, x3, x4];
    for j in 0..l0_cols.cols() {
        cols.push(l0_cols.column(j));
    }
    SplitBasis::new(lp, IntMat::from_columns(&cols))
}

/// Split basis adapted to a totally isotropic plane: x1 and x3 span it.
pub fn split_for_plane(ctx: &MaximalContext, plane: &Sublattice) -> Result<SplitBasis> {
    let lp = &ctx.lp;
    let b = plane.canonical();
    if b.cols() != 2 {
        return Err(Error::Precondition("expected a rank-2 sublattice".into()));
    }
    // identity shortcut for the canonical plane <e1, e2>
    {
        let id = ctx.identity_split();
        let canon = Sublattice::from_vectors(&[id.x(0), id.x(2)]);
        if plane.canonical() == canon.canonical() {
            return Ok(id);
        }
    }
    let a = b.column(0);
    let bb = b.column(1);
    if !lp.norm_z(&a).is_zero() || !lp.norm_z(&bb).is_zero() || !lp.ip_z(&a, &bb).is_zero() {
        return Err(Error::Precondition("sublattice is not totally isotropic".into()));
    }
    let (x1, x2) = hyperbolic_partner(lp.gram(), &a)?;
    // project the second generator into <x1,x2>^perp: b' = b - (b,x2)x1 - (b,x1)x2
    let bx2 = lp.ip_z(&bb, &x2);
    let bx1 = lp.ip_z(&bb, &x1);
    debug_assert!(bx1.is_zero(), "plane is totally isotropic");
    let bprime: ZVec =
        (0..lp.rank()).map(|i| &bb[i] - &bx2 * &x1[i] - &bx1 * &x2[i]).collect();
    let (_, bprim) = {
        let (c, p) = primitive_scale(&z_to_q(&bprime));
        (c, p)
    };
    let w = pair_complement(lp.gram(), &x1, &x2);
    // coordinates of b' inside W
    let wq = w.to_rat();
    let sol = solve_exact(&wq, &z_to_q(&bprim)).ok_or(Error::Precondition(
        "projected generator must lie in the pair complement".into(),
    ))?;
    let z = q_to_z(&sol).ok_or(Error::NotIntegral)?;
    let wg = lp.gram_of(&w);
    let wlat = Lattice::new(wg)?;
    let (z, zp) = hyperbolic_partner(wlat.gram(), &sign_normalize(&z))?;
    let x3 = w.mul_vec(&z);
    let x4 = w.mul_vec(&zp);
    let d = pair_complement(wlat.gram(), &z, &zp);
    let l0_cols = w.mul(&d);
    let mut cols: Vec<ZVec> = vec![x1, x2, x3, x4];
    for j in 0..l0_cols.cols() {
        cols.push(l0_cols.column(j));
    }
    let sb = SplitBasis::new(lp, IntMat::from_columns(&cols))?;
    // the plane must be exactly <x1, x3>
    let check = Sublattice::from_vectors(&[sb.x(0), sb.x(2)]);
    if check.canonical() != plane.canonical() {
        return Err(Error::Precondition("split basis does not reproduce the plane".into()));
    }
    Ok(sb)
}

fn solve_exact(m: &RatMat, b: &[Rat]) -> Option<Vec<Rat>> {
    m.solve(b)
}

/// tau(x,y) in O^+(Lp) with tau x = y, for primitive isotropic x, y in a
/// split maximal lattice. Normalizes both vectors into L1 = U2 + L0 with
/// the SL2 x SL2 action, then runs the two-transvection chain
/// t(f, x') t(e, u') mapping x' to -e; the two sides are composed.
pub fn tau(ctx: &MaximalContext, x: &[Int], y: &[Int]) -> Result<OrthMap> {
    let lp = &ctx.lp;
    if !lp.norm_z(x).is_zero() || !lp.norm_z(y).is_zero() {
        return Err(Error::NotIsotropic);
    }
    if !lp.is_primitive(x) || !lp.is_primitive(y) {
        return Err(Error::NotPrimitive);
    }
    let fx = normalize_to_minus_e(ctx, x)?;
    let fy = normalize_to_minus_e(ctx, y)?;
    let t = fy.inverse().compose(&fx);
    // verification (the chain is exact; this guards the preconditions)
    let applied = t.apply_z(x);
    if q_to_z(&applied).as_deref() != Some(y) {
        return Err(Error::Precondition("tau verification failed".into()));
    }
    if spinor_norm(lp, &t) != 1 || !t.is_integral() {
        return Err(Error::NotIsometry);
    }
    Ok(t)
}

/// The map F with F(w) = -e1 for primitive isotropic w:
/// F = t(f1, w') t(e1, u') g(w).
fn normalize_to_minus_e(ctx: &MaximalContext, w: &[Int]) -> Result<OrthMap> {
    let lp = &ctx.lp;
    let n = lp.rank();
    let g = normalize_into_l1(ctx, w)?;
    let wp = q_to_z(&g.apply_z(w)).ok_or(Error::NotIntegral)?;
    debug_assert!(wp[0].is_zero() && wp[1].is_zero());
    // u' in L1 with (w', u') = 1
    let hat = lp.hat(&wp);
    let sub_hat: ZVec = hat[2..].to_vec();
    let (d, q) = row_smith(&sub_hat);
    if !d.is_one() {
        return Err(Error::Precondition("divisor > 1 inside L1; lattice not maximal?".into()));
    }
    let mut uprime = vec![Int::zero(); n];
    for i in 2..n {
        uprime[i] = q[(i - 2, 0)].clone();
    }
    let mut e1 = vec![Int::zero(); n];
    e1[0] = Int::one();
    let mut f1 = vec![Int::zero(); n];
    f1[1] = Int::one();
    let t1 = eichler_transvection(lp, &e1, &uprime)?;
    let t2 = eichler_transvection(lp, &f1, &wp)?;
    Ok(t2.compose(&t1).compose(&g))
}

/// g(w): identity if w already lies in L1 (first two coordinates zero),
/// else the SL2 x SL2 element diagonalizing the 2x2 matrix
/// [[w3, -w2], [w1, w4]].
fn normalize_into_l1(ctx: &MaximalContext, w: &[Int]) -> Result<OrthMap> {
    let lp = &ctx.lp;
    if w[0].is_zero() && w[1].is_zero() {
        return Ok(OrthMap::identity(lp.clone()));
    }
    let iota = IntMat::from_columns(&[
        vec![w[2].clone(), w[0].clone()],
        vec![-w[1].clone(), w[3].clone()],
    ]);
    let snf = crate::matrix::smith_normal_form(&iota);
    // force both transforms into SL2 by sign-flipping one row; the result
    // stays diagonal
    let mut a = snf.p.clone();
    if a.det() != Int::one() {
        for j in 0..2 {
            a[(0, j)] = -a[(0, j)].clone();
        }
    }
    let mut binv = snf.q.clone();
    if binv.det() != Int::one() {
        for i in 0..2 {
            binv[(i, 0)] = -binv[(i, 0)].clone();
        }
    }
    let b = binv.inv_unimodular();
    let ga = sl2_embed(lp, &a, Sl2Side::Left)?;
    let gb = sl2_embed(lp, &b, Sl2Side::Right)?;
    let g = ga.compose(&gb);
    let img = q_to_z(&g.apply_z(w)).ok_or(Error::NotIntegral)?;
    if !img[0].is_zero() || !img[1].is_zero() {
        return Err(Error::Precondition("sl2 normalization failed".into()));
    }
    Ok(g)
}

/// A building node: a primitive totally isotropic sublattice with the group
/// element carrying the base representative onto it and an adapted split
/// basis.
#[derive(Clone)]
pub struct Node {
    pub sub: Sublattice,
    pub witness: OrthMap,
    pub split: SplitBasis,
}

impl std::fmt::Debug for Node {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Node({:?})", self.sub.canonical())
    }
}

/// Bipartite building: black nodes are isotropic lines, white nodes totally
/// isotropic planes; an edge records incidence of orbit representatives.
#[derive(Clone, Debug)]
pub struct TitsBuilding {
    pub lines: Vec<Node>,
    pub planes: Vec<Node>,
    pub edges: Vec<(usize, usize)>,
    pub group_label: String,
    pub complete: bool,
}

impl TitsBuilding {
    pub fn line_count(&self) -> usize {
        self.lines.len()
    }
    pub fn plane_count(&self) -> usize {
        self.planes.len()
    }
}

/// The building of O^+(Lp) for a split maximal lattice: one line node, one
/// plane node per class of gen(0, n-2, q_Lp), all planes adjacent to the
/// line.
pub fn building_maximal(ctx: &MaximalContext) -> Result<TitsBuilding> {
    let lp = &ctx.lp;
    let rank0 = lp.rank() - 4; // definite part of the splitting 2U + L0
    if rank0 > 3 {
        return Err(Error::Unsupported("genus enumeration limited to rank <= 3".into()));
    }
    let id_split = ctx.identity_split();
    let line = Node {
        sub: Sublattice::from_vectors(&[id_split.x(0)]),
        witness: OrthMap::identity(lp.clone()),
        split: id_split.clone(),
    };
    let q0 = FiniteQuadraticForm::of_lattice(lp);
    let classes = enumerate_genus_definite(rank0, (0, rank0), &q0)?;
    let mut planes: Vec<Node> = Vec::new();
    let mut matched = vec![false; classes.len()];
    // canonical plane <x1, x3> realizes the class of L0
    let base_plane = Sublattice::from_vectors(&[id_split.x(0), id_split.x(2)]);
    let base_class = DefiniteLattice::new(id_split.l0_gram(lp))?;
    for (i, c) in classes.iter().enumerate() {
        if iso_definite_first(c, &base_class)?.is_some() {
            matched[i] = true;
            planes.push(Node {
                sub: base_plane.clone(),
                witness: OrthMap::identity(lp.clone()),
                split: id_split.clone(),
            });
            break;
        }
    }
    if planes.is_empty() {
        return Err(Error::Precondition("base plane class missing from the genus".into()));
    }
    // bounded search for representatives of the remaining classes
    if matched.iter().any(|m| !m) {
        let budget = 200_000usize;
        let mut count = 0usize;
        'search: for radius in 1..=3i64 {
            let cands = isotropic_box(lp, radius);
            for i in 0..cands.len() {
                for j in i + 1..cands.len() {
                    count += 1;
                    if count > budget {
                        break 'search;
                    }
                    let (a, b) = (&cands[i], &cands[j]);
                    if !lp.ip_z(a, b).is_zero() {
                        continue;
                    }
                    let plane = Sublattice::from_vectors(&[a.clone(), b.clone()]);
                    if plane.rank() != 2 {
                        continue;
                    }
                    if planes.iter().any(|p| p.sub.canonical() == plane.canonical()) {
                        continue;
                    }
                    let comp = plane_perp(lp, &plane);
                    let qgram = isotropic_quotient_gram(lp, &plane, &comp);
                    let class = match DefiniteLattice::new(qgram) {
                        Ok(c) => c,
                        Err(_) => continue,
                    };
                    for (ci, c) in classes.iter().enumerate() {
                        if !matched[ci] && iso_definite_first(c, &class)?.is_some() {
                            matched[ci] = true;
                            let split = split_for_plane(ctx, &plane)?;
                            planes.push(Node {
                                sub: plane.clone(),
                                witness: OrthMap::identity(lp.clone()),
                                split,
                            });
                            break;
                        }
                    }
                    if matched.iter().all(|m| *m) {
                        break 'search;
                    }
                }
            }
        }
    }
    let complete = matched.iter().all(|m| *m);
    let edges = (0..planes.len()).map(|j| (0usize, j)).collect();
    Ok(TitsBuilding {
        lines: vec![line],
        planes,
        edges,
        group_label: "O+(Lp)".into(),
        complete,
    })
}

fn isotropic_box(lp: &LatRef, radius: i64) -> Vec<ZVec> {
    let n = lp.rank();
    let mut out = Vec::new();
    let mut v = vec![int(-radius); n];
    'sweep: loop {
        if v.iter().any(|x| !x.is_zero())
            && lp.norm_z(&v).is_zero()
            && crate::vectors::content(&v).is_one()
            && sign_normalize(&v) == v
        {
            out.push(v.clone());
        }
        let mut i = 0;
        loop {
            if i == n {
                break 'sweep;
            }
            v[i] += 1;
            if v[i] <= int(radius) {
                break;
            }
            v[i] = int(-radius);
            i += 1;
        }
    }
    out.sort_by(|a, b| crate::vectors::lex_cmp(a, b));
    out
}

fn plane_perp(lp: &LatRef, plane: &Sublattice) -> Sublattice {
    let b = plane.canonical();
    let n = lp.rank();
    let mut rows = IntMat::zero(2, n);
    for r in 0..2 {
        let col = b.column(r);
        for j in 0..n {
            rows[(r, j)] = (0..n).map(|i| &col[i] * &lp.gram()[(i, j)]).sum();
        }
    }
    Sublattice::from_basis_unchecked(kernel_columns(&rows))
}

/// Stabilizer generators of the line <x1> of a split basis:
/// transvections t(x1, v) over a basis of L1', the O^+ generators of L1'
/// extended by the identity on U1, and the U1 negator.
pub fn stab_line_generators(ctx: &MaximalContext, split: &SplitBasis) -> Result<Vec<OrthMap>> {
    let lp = &ctx.lp;
    let n = lp.rank();
    let x1 = split.x(0);
    let mut gens = Vec::new();
    for j in 2..n {
        gens.push(eichler_transvection(lp, &x1, &split.x(j))?);
    }
    let l1 = Lattice::new(split.l1_gram(lp))?;
    let base = {
        // canonical base point of the Lorentzian part: x3 + x4 in split
        // coordinates has norm 2
        let mut b = vec![Int::zero(); n - 2];
        b[0] = Int::one();
        b[1] = Int::one();
        b
    };
    let l1_gens = oplus_generators_lorentzian(&l1, Some(&base))?;
    let s = split.cols.to_rat();
    let s_inv = s.inverse().ok_or(Error::Degenerate)?;
    for g in l1_gens {
        let mut m = RatMat::identity(n);
        for i in 0..n - 2 {
            for j in 0..n - 2 {
                m[(i + 2, j + 2)] = g.mat[(i, j)].clone();
            }
        }
        gens.push(OrthMap::new(lp.clone(), s.mul(&m).mul(&s_inv))?);
    }
    gens.push(u1_negator(lp, &split.cols)?);
    Ok(gens)
}

/// Stabilizer generators of the plane <x1, x3> of a split basis: the Jacobi
/// transvections, t(x1, v) and t(x3, v) over a basis of L0', the
/// automorphisms of the definite part, and the U1 negator.
pub fn stab_plane_generators(ctx: &MaximalContext, split: &SplitBasis) -> Result<Vec<OrthMap>> {
    let lp = &ctx.lp;
    let n = lp.rank();
    let (x1, x2, x3, x4) = (split.x(0), split.x(1), split.x(2), split.x(3));
    let mut gens = vec![
        eichler_transvection(lp, &x1, &x4)?,
        eichler_transvection(lp, &x2, &x3)?,
        eichler_transvection(lp, &x1, &x3)?,
    ];
    for j in 4..n {
        gens.push(eichler_transvection(lp, &x1, &split.x(j))?);
        gens.push(eichler_transvection(lp, &x3, &split.x(j))?);
    }
    let l0 = Lattice::new(split.l0_gram(lp))?;
    if l0.rank() > 0 {
        let s = split.cols.to_rat();
        let s_inv = s.inverse().ok_or(Error::Degenerate)?;
        for g in oplus_generators_definite(&l0)? {
            let mut m = RatMat::identity(n);
            for i in 0..n - 4 {
                for j in 0..n - 4 {
                    m[(i + 4, j + 4)] = g.mat[(i, j)].clone();
                }
            }
            gens.push(OrthMap::new(lp.clone(), s.mul(&m).mul(&s_inv))?);
        }
    }
    gens.push(u1_negator(lp, &split.cols)?);
    Ok(gens)
}

/// The congruence level N for the line-orbit set inside a plane: with
/// M the exponent of Lp/L, N is the exponent of L^vee / (M Lp).
pub fn congruence_level(ctx: &MaximalContext, spec: &GroupSpec) -> Result<u64> {
    let n = ctx.lp.rank();
    let b = spec.basis.clone().unwrap_or_else(|| IntMat::identity(n));
    // M = exponent of Z^n / b Z^n
    let snf = crate::matrix::smith_normal_form(&b);
    let m = snf.divisors().last().cloned().unwrap_or_else(Int::one).abs();
    // L^vee in Lp coordinates: b * G(L)^{-1}
    let ldual = b.to_rat().mul(&spec.sub.gram().to_rat().inverse().ok_or(Error::Degenerate)?);
    let mut mlp = RatMat::identity(n);
    for i in 0..n {
        mlp[(i, i)] = rat_of(&m);
    }
    let e = quotient_exponent(&ldual, &mlp)?;
    u64::try_from(&e).map_err(|_| Error::Unsupported("congruence level too large".into()))
}

/// Descend a building along a finite-index subgroup G1 of G2 = O^+(Lp):
/// nodes split into G1-classes through the coset transversal and stabilizer
/// transversals; edges are decided through the congruence line-orbit set
/// and tau.
pub fn building_descend(
    b2: &TitsBuilding,
    spec_g1: &GroupSpec,
    ctx: &MaximalContext,
    budget: usize,
) -> Result<TitsBuilding> {
    let mut complete = true;
    let g_trans = coset_transversal(&ctx.gens, spec_g1, budget);
    complete &= g_trans.complete;

    let mut expand = |node: &Node, is_line: bool| -> Result<Vec<Node>> {
        let base_stab = if is_line {
            stab_line_generators(ctx, &node.split)?
        } else {
            stab_plane_generators(ctx, &node.split)?
        };
        // class reps: indices into g_trans with their stab transversals
        let mut class_reps: Vec<(usize, Transversal)> = Vec::new();
        for i in 0..g_trans.reps.len() {
            let gi_inv = g_trans.reps[i].inverse();
            let mut matched = false;
            for (j, lj) in &class_reps {
                let gj = &g_trans.reps[*j];
                let prod_base = gj.compose(&gi_inv);
                let hit = par::find_map_first(&lj.reps, |l| {
                    if spec_g1.is_member(&l.compose(&prod_base)) {
                        Some(())
                    } else {
                        None
                    }
                });
                if hit.is_some() {
                    matched = true;
                    break;
                }
            }
            if !matched {
                let gj = &g_trans.reps[i];
                let conj: Vec<OrthMap> = base_stab
                    .iter()
                    .map(|s| gj.compose(s).compose(&gj.inverse()))
                    .collect();
                let lj = stab_coset_transversal(&conj, spec_g1, budget);
                if !lj.complete {
                    complete = false;
                }
                class_reps.push((i, lj));
            }
        }
        let mut out = Vec::new();
        for (j, _) in class_reps {
            let g = &g_trans.reps[j];
            out.push(Node {
                sub: node.sub.apply(&g.mat),
                witness: g.compose(&node.witness),
                split: node.split.translated(g)?,
            });
        }
        Ok(out)
    };

    let mut lines = Vec::new();
    for node in &b2.lines {
        lines.extend(expand(node, true)?);
    }
    let mut planes = Vec::new();
    for node in &b2.planes {
        planes.extend(expand(node, false)?);
    }

    // edge phase
    let level = congruence_level(ctx, spec_g1)?;
    let jset = gamma_n_transversal(level);
    // per-line stabilizer transversals, shared across plane pairs
    let mut line_stabs: Vec<Transversal> = Vec::new();
    for line in &lines {
        let base = stab_line_generators(ctx, &line.split)?;
        let u = stab_coset_transversal(&base, spec_g1, budget);
        if !u.complete {
            complete = false;
        }
        line_stabs.push(u);
    }
    let mut edges = Vec::new();
    for (pi, plane) in planes.iter().enumerate() {
        let s = &plane.split;
        let sq = s.cols.to_rat();
        let s_inv = sq.inverse().ok_or(Error::Degenerate)?;
        // Gamma(N)-transversal embedded in Stab(plane)
        let lat_s = Lattice::new(ctx.lp.gram_of(&s.cols))?;
        let jmaps: Vec<OrthMap> = jset
            .iter()
            .map(|z| {
                let g = sl2_embed(&lat_s, z, Sl2Side::Left)?;
                OrthMap::new(ctx.lp.clone(), sq.mul(&g.mat).mul(&s_inv))
            })
            .collect::<Result<Vec<_>>>()?;
        let x1 = s.x(0);
        for (li, line) in lines.iter().enumerate() {
            let lvec = line.split.x(0);
            let ustab = &line_stabs[li];
            let found = par::find_map_first(&jmaps, |j| {
                let y = q_to_z(&j.apply_z(&x1))?;
                let t = tau(ctx, &y, &lvec).ok()?;
                ustab.reps.iter().find(|u| spec_g1.is_member(&u.compose(&t))).map(|_| ())
            });
            if found.is_some() {
                edges.push((li, pi));
            }
        }
    }
    edges.sort();
    Ok(TitsBuilding {
        lines,
        planes,
        edges,
        group_label: spec_g1.label.clone(),
        complete: complete && b2.complete,
    })
}

/// Line-orbit representatives only (the node phase restricted to lines).
pub fn isotropic_vector_orbits(
    b2: &TitsBuilding,
    spec_g1: &GroupSpec,
    ctx: &MaximalContext,
    budget: usize,
) -> Result<Vec<Sublattice>> {
    let mut shrunk = b2.clone();
    shrunk.planes.clear();
    shrunk.edges.clear();
    let b = building_descend(&shrunk, spec_g1, ctx, budget)?;
    Ok(b.lines.into_iter().map(|n| n.sub).collect())
}

/// Ascend a building to an enclosing group G2 = <G1, extra_gens>: nodes of
/// the same type merge when some coset representative carries one onto the
/// other inside G1, decided through O^+(Lp) transitivity and stabilizer
/// transversals. Requires G1 normal in G2 (the coset BFS walks the extra
/// generators only).
pub fn building_ascend(
    b1: &TitsBuilding,
    spec_g1: &GroupSpec,
    extra_gens: &[OrthMap],
    label: impl Into<String>,
    ctx: &MaximalContext,
    budget: usize,
) -> Result<TitsBuilding> {
    let mut complete = b1.complete;
    let h_trans = stab_coset_transversal(extra_gens, spec_g1, budget);
    complete &= h_trans.complete;

    let merge = |nodes: &[Node], is_line: bool| -> Result<Vec<usize>> {
        let mut parent: Vec<usize> = (0..nodes.len()).collect();
        fn find(parent: &mut Vec<usize>, i: usize) -> usize {
            if parent[i] != i {
                let r = find(parent, parent[i]);
                parent[i] = r;
            }
            parent[i]
        }
        for h in &h_trans.reps {
            for i1 in 0..nodes.len() {
                for i2 in 0..nodes.len() {
                    if find(&mut parent, i1) == find(&mut parent, i2) {
                        continue;
                    }
                    let moved = nodes[i1].sub.apply(&h.mat);
                    // ghat in O^+(Lp) with ghat(h E1) = E2, if one exists
                    let ghat = if is_line {
                        let v = moved.canonical().column(0);
                        let target = nodes[i2].sub.canonical().column(0);
                        match tau(ctx, &sign_normalize(&v), &sign_normalize(&target)) {
                            Ok(t) => Some(t),
                            Err(_) => None,
                        }
                    } else {
                        plane_carrier(ctx, &moved, &nodes[i2].sub)?
                    };
                    let ghat = match ghat {
                        Some(g) => g,
                        None => continue,
                    };
                    // J: left transversal of Stab_{O+(Lp)}(h E1) over
                    // Stab_{G1}(h E1)
                    let stab = if is_line {
                        let split = split_for_line(ctx, &moved.canonical().column(0))?;
                        stab_line_generators(ctx, &split)?
                    } else {
                        let split = split_for_plane(ctx, &moved)?;
                        stab_plane_generators(ctx, &split)?
                    };
                    let j_trans = coset_transversal(&stab, spec_g1, budget);
                    let hit = par::find_map_first(&j_trans.reps, |j| {
                        if spec_g1.is_member(&ghat.compose(j)) {
                            Some(())
                        } else {
                            None
                        }
                    });
                    if hit.is_some() {
                        let (r1, r2) = (find(&mut parent, i1), find(&mut parent, i2));
                        let (lo, hi) = (r1.min(r2), r1.max(r2));
                        parent[hi] = lo;
                    }
                }
            }
        }
        Ok((0..nodes.len()).map(|i| find(&mut parent, i)).collect())
    };

    let line_map = merge(&b1.lines, true)?;
    let plane_map = merge(&b1.planes, false)?;
    let rebuild = |nodes: &[Node], map: &[usize]| -> (Vec<Node>, Vec<usize>) {
        let mut kept: Vec<usize> = map.to_vec();
        kept.sort();
        kept.dedup();
        let reindex: Vec<usize> =
            map.iter().map(|r| kept.iter().position(|k| k == r).unwrap()).collect();
        (kept.iter().map(|&k| nodes[k].clone()).collect(), reindex)
    };
    let (lines, lmap) = rebuild(&b1.lines, &line_map);
    let (planes, pmap) = rebuild(&b1.planes, &plane_map);
    let mut edges: Vec<(usize, usize)> =
        b1.edges.iter().map(|(l, p)| (lmap[*l], pmap[*p])).collect();
    edges.sort();
    edges.dedup();
    Ok(TitsBuilding { lines, planes, edges, group_label: label.into(), complete })
}

/// ghat in O^+(Lp) mapping one totally isotropic plane to another, or None
/// when the definite quotients are not isometric (different orbits).
fn plane_carrier(
    ctx: &MaximalContext,
    from: &Sublattice,
    to: &Sublattice,
) -> Result<Option<OrthMap>> {
    let lp = &ctx.lp;
    let sa = split_for_plane(ctx, from)?;
    let sb = split_for_plane(ctx, to)?;
    let ga = sa.l0_gram(lp);
    let gb = sb.l0_gram(lp);
    let da = DefiniteLattice::new(ga)?;
    let db = DefiniteLattice::new(gb)?;
    let psi = match iso_definite_first(&da, &db)? {
        Some(p) => p,
        None => return Ok(None),
    };
    // adjust sb's definite part so the two split Grams agree exactly:
    // psi maps da -> db with psi^T G(db) psi = G(da)
    let n = lp.rank();
    let mut adj = IntMat::identity(n);
    for i in 0..n - 4 {
        for j in 0..n - 4 {
            adj[(i + 4, j + 4)] = psi[(i, j)].clone();
        }
    }
    let sb_adj = sb.cols.mul(&adj);
    let g = sb_adj.to_rat().mul(&sa.cols.to_rat().inverse().ok_or(Error::Degenerate)?);
    let mut ghat = OrthMap::new(lp.clone(), g)?;
    if spinor_norm(lp, &ghat) != 1 {
        // compose with the U1 negator of the target split (stabilizes the
        // target plane, spinor norm -1)
        let fix = u1_negator(lp, &sb.cols)?;
        ghat = fix.compose(&ghat);
    }
    debug_assert_eq!(spinor_norm(lp, &ghat), 1);
    // carrier property
    let moved = from.apply(&ghat.mat);
    if moved.canonical() != to.canonical() {
        return Err(Error::Precondition("plane carrier failed verification".into()));
    }
    Ok(Some(ghat))
}

/// Deterministic DOT rendering: lines are filled black circles, planes
/// hollow; labels are orbit indices.
pub fn to_dot(b: &TitsBuilding) -> String {
    let mut out = String::new();
    out.push_str("graph building {\n");
    out.push_str("  // lines are black, planes are white\n");
    for i in 0..b.lines.len() {
        out.push_str(&format!(
            "  l{} [label=\"{}\", shape=circle, style=filled, fillcolor=black, fontcolor=white];\n",
            i, i
        ));
    }
    for j in 0..b.planes.len() {
        out.push_str(&format!(
            "  p{} [label=\"{}\", shape=circle, style=filled, fillcolor=white];\n",
            j, j
        ));
    }
    for (l, p) in &b.edges {
        out.push_str(&format!("  l{} -- p{};\n", l, p));
    }
    out.push_str("}\n");
    out
}

/// Plain-text adjacency document with a versioned header. Node lines carry
/// the representative basis columns in the coordinates of the original
/// lattice when a basis for it inside Lp is supplied.
pub fn serialize_text(b: &TitsBuilding, sub_basis: Option<&IntMat>) -> String {
    let mut out = String::new();
    out.push_str("titsbuilding/v1\n");
    out.push_str(&format!("group {}\n", b.group_label));
    out.push_str(&format!("complete {}\n", b.complete));
    let convert = |v: &ZVec| -> String {
        match sub_basis {
            Some(bmat) => {
                let bi = bmat.to_rat().inverse().expect("basis invertible");
                let w = bi.mul_vec(&z_to_q(v));
                let (_, prim) = primitive_scale(&w);
                crate::vectors::fmt_zvec(&sign_normalize(&prim))
            }
            None => crate::vectors::fmt_zvec(v),
        }
    };
    out.push_str(&format!("lines {}\n", b.lines.len()));
    for (i, node) in b.lines.iter().enumerate() {
        let c = node.sub.canonical();
        out.push_str(&format!("line {} {}\n", i, convert(&c.column(0))));
    }
    out.push_str(&format!("planes {}\n", b.planes.len()));
    for (j, node) in b.planes.iter().enumerate() {
        let c = node.sub.canonical();
        let cols: Vec<String> = (0..c.cols()).map(|k| convert(&c.column(k))).collect();
        out.push_str(&format!("plane {} {}\n", j, cols.join(" ")));
    }
    out.push_str(&format!("edges {}\n", b.edges.len()));
    for (l, p) in &b.edges {
        out.push_str(&format!("edge {} {}\n", l, p));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, LatticeTerm};
    use crate::vectors::zvec;

    fn two_u_a2() -> LatRef {
        build_lattice(&[(LatticeTerm::U(1), 2), (LatticeTerm::A(2, 1), 1)]).unwrap()
    }

    #[test]
    fn split_basis_validation() {
        let lp = two_u_a2();
        assert!(SplitBasis::new(&lp, IntMat::identity(6)).is_ok());
        let l = build_lattice(&[(LatticeTerm::U(1), 1), (LatticeTerm::A(2, 1), 1)]).unwrap();
        assert!(SplitBasis::new(&l, IntMat::identity(4)).is_err());
    }

    #[test]
    fn tau_maps_e_to_f() {
        let lp = two_u_a2();
        let ctx = MaximalContext::of_split_maximal(&lp).unwrap();
        let e1 = zvec(&[1, 0, 0, 0, 0, 0]);
        let f1 = zvec(&[0, 1, 0, 0, 0, 0]);
        let t = tau(&ctx, &e1, &f1).unwrap();
        assert_eq!(q_to_z(&t.apply_z(&e1)).unwrap(), f1);
        // identity case
        let t = tau(&ctx, &e1, &e1).unwrap();
        assert_eq!(q_to_z(&t.apply_z(&e1)).unwrap(), e1);
    }

    #[test]
    fn tau_random_pairs() {
        let lp = two_u_a2();
        let ctx = MaximalContext::of_split_maximal(&lp).unwrap();
        let cands = isotropic_box(&lp, 2);
        assert!(cands.len() >= 10);
        let mut count = 0;
        for x in cands.iter().take(8) {
            for y in cands.iter().take(8) {
                let t = tau(&ctx, x, y).unwrap();
                assert_eq!(q_to_z(&t.apply_z(x)).unwrap(), *y);
                assert!(ctx.oplus.is_member(&t));
                count += 1;
            }
        }
        assert!(count >= 49);
    }

    #[test]
    fn building_maximal_2u_a2() {
        let lp = two_u_a2();
        let ctx = MaximalContext::of_split_maximal(&lp).unwrap();
        let b = building_maximal(&ctx).unwrap();
        assert!(b.complete);
        assert_eq!(b.line_count(), 1);
        assert_eq!(b.plane_count(), 1);
        assert_eq!(b.edges, vec![(0, 0)]);
    }

    #[test]
    fn congruence_level_self() {
        let lp = two_u_a2();
        let ctx = MaximalContext::of_split_maximal(&lp).unwrap();
        let spec = GroupSpec::stable_oplus(&lp);
        assert_eq!(congruence_level(&ctx, &spec).unwrap(), 3);
    }

    #[test]
    fn dot_and_text_deterministic() {
        let lp = two_u_a2();
        let ctx = MaximalContext::of_split_maximal(&lp).unwrap();
        let b = building_maximal(&ctx).unwrap();
        let d1 = to_dot(&b);
        let d2 = to_dot(&b);
        assert_eq!(d1, d2);
        assert!(d1.contains("fillcolor=black"));
        assert!(d1.contains("fillcolor=white"));
        assert!(d1.contains("l0 -- p0"));
        let s = serialize_text(&b, None);
        assert!(s.starts_with("titsbuilding/v1\n"));
        assert!(s.contains("lines 1"));
        assert!(s.contains("planes 1"));

        let empty = TitsBuilding {
            lines: vec![],
            planes: vec![],
            edges: vec![],
            group_label: "empty".into(),
            complete: true,
        };
        let d = to_dot(&empty);
        assert!(d.starts_with("graph building {"));
        assert!(d.ends_with("}\n"));
    }

    #[test]
    fn descend_stable_2u_a2() {
        let lp = two_u_a2();
        let ctx = MaximalContext::of_split_maximal(&lp).unwrap();
        let b2 = building_maximal(&ctx).unwrap();
        let spec = GroupSpec::stable_oplus(&lp);
        let b1 = building_descend(&b2, &spec, &ctx, 10_000).unwrap();
        assert!(b1.complete);
        assert_eq!(b1.line_count(), 1);
        assert_eq!(b1.plane_count(), 1);
        assert_eq!(b1.edges, vec![(0, 0)]);
    }

    #[test]
    fn node_representatives_are_isotropic() {
        let lp = two_u_a2();
        let ctx = MaximalContext::of_split_maximal(&lp).unwrap();
        let b = building_maximal(&ctx).unwrap();
        for node in &b.lines {
            let v = node.sub.canonical().column(0);
            assert!(lp.norm_z(&v).is_zero());
        }
        for node in &b.planes {
            let c = node.sub.canonical();
            for i in 0..c.cols() {
                for j in 0..c.cols() {
                    assert!(lp.ip_z(&c.column(i), &c.column(j)).is_zero());
                }
            }
        }
    }
}
