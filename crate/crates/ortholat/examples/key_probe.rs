// hunt key/predicate disagreement for in-ambient specs
use ortholat::buildings::*;
use ortholat::lattice::{build_lattice, LatticeTerm};
use ortholat::ogroup::{DiscCondition, GroupSpec, OrthMap};

fn main() {
    let l = build_lattice(&[(LatticeTerm::U(2), 2), (LatticeTerm::A(2, 1), 1)]).unwrap();
    let amb = ambient_for(&l).unwrap();
    let spec = GroupSpec::in_ambient(&amb.ctx.lp, &l, amb.sub_basis.clone(), false, true, DiscCondition::Trivial, "~O+").unwrap();
    // walk some products
    let mut elems: Vec<OrthMap> = vec![OrthMap::identity(amb.ctx.lp.clone())];
    for g in amb.ctx.gens.iter() {
        elems.push(g.clone());
        elems.push(g.inverse());
    }
    let n0 = elems.len();
    for i in 0..n0.min(8) {
        for j in 0..n0.min(8) {
            let p = elems[i].compose(&elems[j]);
            elems.push(p);
        }
    }
    println!("testing {} elements", elems.len());
    let mut bad = 0;
    for (i, a) in elems.iter().enumerate() {
        for b in elems.iter().skip(i) {
            let keys_equal = spec.coset_key(a) == spec.coset_key(b);
            let pred = spec.is_member(&b.inverse().compose(a));
            if keys_equal != pred {
                bad += 1;
                if bad <= 3 {
                    println!("MISMATCH: keys_equal={} pred={}", keys_equal, pred);
                    println!("a = {:?}", a.mat);
                    println!("b = {:?}", b.mat);
                }
            }
        }
    }
    println!("mismatches: {}", bad);
}
