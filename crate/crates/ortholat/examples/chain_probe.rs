// feasibility probe: 1080-coset transversal for criterion 7/9
use ortholat::buildings::*;
use ortholat::cosets::coset_transversal;
use ortholat::lattice::{build_lattice, LatticeTerm};
use ortholat::ogroup::{DiscCondition, GroupSpec};

fn main() {
    let t0 = std::time::Instant::now();
    let l = build_lattice(&[(LatticeTerm::U(2), 2), (LatticeTerm::A(2, 1), 1)]).unwrap();
    println!("L = 2U(2)+A2, det {}", l.det());
    let amb = ambient_for(&l).unwrap();
    println!("ambient gram: {:?}", amb.ctx.lp.gram());
    println!("sub basis: {:?}", amb.sub_basis);
    let g1 = GroupSpec::in_ambient(&amb.ctx.lp, &l, amb.sub_basis.clone(), false, true, DiscCondition::Trivial, "~O+(2U(2)+A2)").unwrap();
    let t = coset_transversal(&amb.ctx.gens, &g1, 5000);
    println!("index |O+(2U+A2) : ~O+(2U(2)+A2)| = {} complete={} ({:?})", t.index(), t.complete, t0.elapsed());
    // classify mod intermediate groups
    let mid1 = build_lattice(&[(LatticeTerm::U(1), 1), (LatticeTerm::U(2), 1), (LatticeTerm::A(2, 1), 1)]).unwrap();
    // basis of U + U(2) + A2 inside 2U+A2-ambient coordinates: first U identity, the U(2) copy = <e2, 2f2>, A2 identity
    // but careful: ambient coords come from ambient_for(l) split; express mid1 via the sub basis:
    // sub basis columns = basis of 2U(2)+A2 in ambient. U+U(2)+A2 contains 2U(2)+A2 index 2... construct directly:
    // mid1 basis in ambient = columns: need U(2) -> U embedding per coordinate block. We instead solve:
    // take ambient basis vectors of L (sub_basis cols c1..c6 = images of e1,f1,e2,f2,a1,a2 of 2U(2)+A2);
    // hmm: 2U(2) = <e1, 2f1> + <e2, 2f2> inside 2U. So e1^{U(2)} = e1, f1^{U(2)} = 2f1.
    // Reconstruct the 2U+A2-identification: ambient = 2U+A2 should equal the maximal overlattice.
    // mid basis: e1, f1 (full U), e2, 2f2 (U(2)), a1, a2.
    // ambient coords: c1, c3 are the U(2) "e" vectors -> full-U e vectors are c1, c3; "f" vectors: c2/2*?,
    // simpler: mid1 = L + <x> where x = (1/2) * (f1 of U(2)) = c2/2 sits in ambient as integer vector c2/2.
    use ortholat::matrix::{IntMat, rat_of};
    use num_traits::One;
    let bq = amb.sub_basis.to_rat();
    let mut cols: Vec<Vec<ortholat::matrix::Rat>> = (0..6).map(|j| bq.column(j)).collect();
    // halve the second column (f1 of the first U(2) block) to upgrade that block to U
    for x in cols[1].iter_mut() { *x = &*x / rat_of(&ortholat::matrix::int(2)); }
    let mid_basis_q = ortholat::matrix::RatMat::from_columns(&cols);
    let mid_basis = mid_basis_q.to_int().expect("integral");
    let check = mid_basis.transpose().mul(amb.ctx.lp.gram()).mul(&mid_basis);
    assert_eq!(&check, mid1.gram(), "mid lattice gram transport");
    let _one = ortholat::matrix::Int::one();
    let g2 = GroupSpec::in_ambient(&amb.ctx.lp, &mid1, mid_basis, false, true, DiscCondition::Trivial, "~O+(U+U(2)+A2)").unwrap();
    let g3 = GroupSpec::stable_oplus(&amb.ctx.lp);
    // class counts
    let classify = |spec: &GroupSpec| -> usize {
        let mut reps: Vec<&ortholat::ogroup::OrthMap> = Vec::new();
        for r in &t.reps {
            if !reps.iter().any(|y| spec.is_member(&y.inverse().compose(r))) {
                reps.push(r);
            }
        }
        reps.len()
    };
    let t1 = std::time::Instant::now();
    let n3 = classify(&g3);
    println!("|O+ : ~O+(2U+A2)| = {} ({:?})", n3, t1.elapsed());
    let t1 = std::time::Instant::now();
    let n2 = classify(&g2);
    println!("|O+ : ~O+(U+U(2)+A2)| = {} ({:?})", n2, t1.elapsed());
    println!("chain indices: {} {} {}", t.index() / n2, n2 / n3, n3);
    println!("total {:?}", t0.elapsed());
    let _ = IntMat::identity(1);
}
