// scratch integration check for the gk lattice
use ortholat::buildings::*;
use ortholat::lattice::{build_lattice, LatticeTerm};
use ortholat::ogroup::{DiscCondition, GroupSpec, reflection_z};
use ortholat::vectors::zvec;

fn main() {
    let start = std::time::Instant::now();
    let l = build_lattice(&[
        (LatticeTerm::U(1), 2),
        (LatticeTerm::Rank1(-6), 1),
        (LatticeTerm::Rank1(-2), 1),
    ]).unwrap();
    let amb = ambient_for(&l).unwrap();
    println!("ambient found: gram = {:?} ({:?})", amb.ctx.lp.gram(), start.elapsed());
    println!("sub basis = {:?}", amb.sub_basis);
    let spec = GroupSpec::in_ambient(&amb.ctx.lp, &l, amb.sub_basis.clone(), false, true, DiscCondition::Trivial, "~O+(L)").unwrap();
    let n_level = congruence_level(&amb.ctx, &spec).unwrap();
    println!("congruence level N = {}", n_level);
    let b2 = building_maximal(&amb.ctx).unwrap();
    println!("B(O+(Lp)): {} lines {} planes {:?} ({:?})", b2.line_count(), b2.plane_count(), b2.edges, start.elapsed());
    let b1 = building_descend(&b2, &spec, &amb.ctx, 10000).unwrap();
    println!("B(~O+(L)): {} lines {} planes edges {:?} complete {} ({:?})", b1.line_count(), b1.plane_count(), b1.edges, b1.complete, start.elapsed());
    // ascent: O+(L) = <~O+(L), sigma_v> with v the <-6> generator, in Lp coords
    let v_l = zvec(&[0,0,0,0,1,0]);
    let v_amb = amb.sub_basis.mul_vec(&v_l);
    let sigma = reflection_z(&amb.ctx.lp, &v_amb).unwrap();
    let b_up = building_ascend(&b1, &spec, &[sigma], "O+(L)", &amb.ctx, 10000).unwrap();
    println!("B(O+(L)): {} lines {} planes edges {:?} complete {} ({:?})", b_up.line_count(), b_up.plane_count(), b_up.edges, b_up.complete, start.elapsed());
}
