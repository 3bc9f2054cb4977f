//! Command line front end: parse lattice expressions, run lattice, orbit,
//! Vinberg, coset and building computations, and emit deterministic text
//! and DOT reports.
//!
//! Lattice expression grammar:
//! ```text
//! EXPR := TERM ('+' TERM)*
//! TERM := [count '*'] ATOM [ '(' int ')' ]
//! ATOM := 'U' | 'A' nat | '<' even-int '>' | 'gram' '[' '[' int,... ']' ,... ']'
//! ```
//! Vectors are written `(a,b,c,...)` with integer or `p/q` entries. Group
//! flags are a comma list of `stable`, `plus`, `so`, `disc=FILE`.

use clap::{Args, Parser, Subcommand};
use ortholat::buildings::{
    ambient_for, building_descend, building_maximal, serialize_text, to_dot,
};
use ortholat::cosets::coset_transversal;
use ortholat::discform::FiniteQuadraticForm;
use ortholat::expr::{parse_lattice, parse_vector};
use ortholat::lattice::{maximal_overlattice, LatRef};
use ortholat::matrix::{inertia, Int, IntMat, Rat};
use ortholat::ogroup::{vinberg_roots, DiscCondition, GroupSpec};
use ortholat::orbits::{
    equiv_definite_complement, equiv_indefinite, upgrade_to_so_plus, OrbitVerdict,
};
use ortholat::discform::FqfMap;
use num_traits::Signed;
use ortholat::vectors::{fmt_zvec, q_to_z};
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "ortholat",
    about = "Exact computations with even lattices: discriminant forms, vector orbits, Tits buildings",
    version
)]
struct Cli {
    /// Thread count for parallel phases (output is independent of this)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GroupArgs {
    /// Comma list of {stable, plus, so, disc=FILE}
    #[arg(long, default_value = "stable,plus")]
    group: String,
}

#[derive(Subcommand)]
enum Command {
    /// Lattice invariants: Gram, signature, D(L), q_L, maximality
    Lattice {
        #[command(subcommand)]
        sub: LatticeCmd,
    },
    /// Maximal overlattice and the coordinate embedding
    Overlattice { expr: String },
    /// Orbit equivalence of two non-isotropic vectors
    OrbitEq {
        expr: String,
        v1: String,
        v2: String,
        #[command(flatten)]
        group: GroupArgs,
    },
    /// Vinberg root system of a Lorentzian lattice
    Vinberg {
        expr: String,
        /// base point, e.g. "(1,1,0,0)"; defaults to the first
        /// positive-norm vector in a small box
        #[arg(long)]
        base: Option<String>,
        #[arg(long, default_value_t = 64)]
        budget: usize,
    },
    /// Tits building of the flagged group (descent from the maximal
    /// overlattice)
    Building {
        expr: String,
        #[command(flatten)]
        group: GroupArgs,
        /// write a DOT rendering here
        #[arg(long)]
        dot: Option<std::path::PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
    },
    /// Coset transversal of the flagged group inside O+ of the maximal
    /// overlattice
    Cosets {
        expr: String,
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
    },
}

#[derive(Subcommand)]
enum LatticeCmd {
    Info { expr: String },
}

struct GroupFlags {
    stable: bool,
    plus: bool,
    so: bool,
    disc_file: Option<String>,
}

fn parse_group_flags(s: &str) -> Result<GroupFlags, String> {
    let mut f = GroupFlags { stable: false, plus: false, so: false, disc_file: None };
    for part in s.split(',') {
        let part = part.trim();
        match part {
            "stable" => f.stable = true,
            "plus" => f.plus = true,
            "so" => f.so = true,
            "" => {}
            other => {
                if let Some(path) = other.strip_prefix("disc=") {
                    f.disc_file = Some(path.to_string());
                } else {
                    return Err(format!("unknown group flag '{}'", other));
                }
            }
        }
    }
    Ok(f)
}

/// Discriminant-subgroup file: one generator per line given as
/// semicolon-separated exponent images of the D(L) generators, e.g.
/// `1,0;0,3` maps g1 -> g1 and g2 -> 3 g2. Lines starting with '#' are
/// comments.
fn parse_disc_file(path: &str, orders: &[Int]) -> Result<Vec<FqfMap>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {}", path, e))?;
    let mut maps = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut images = Vec::new();
        for part in line.split(';') {
            let exps: Result<Vec<_>, _> =
                part.split(',').map(|t| t.trim().parse::<i64>().map(Int::from)).collect();
            images.push(exps.map_err(|e| format!("line {}: {}", lineno + 1, e))?);
        }
        if images.len() != orders.len() {
            return Err(format!("line {}: expected {} generator images", lineno + 1, orders.len()));
        }
        maps.push(FqfMap {
            dom_orders: orders.to_vec(),
            cod_orders: orders.to_vec(),
            images,
            form_compatible: false,
        });
    }
    Ok(maps)
}

fn group_label(f: &GroupFlags) -> String {
    let mut s = String::new();
    if f.stable {
        s.push('~');
    }
    if f.so {
        s.push_str("SO");
    } else {
        s.push('O');
    }
    if f.plus {
        s.push('+');
    }
    s
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        ortholat::par::configure_threads(t);
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {}", msg);
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn run(cli: Cli) -> Result<u8, String> {
    match cli.command {
        Command::Lattice { sub: LatticeCmd::Info { expr } } => lattice_info(&expr),
        Command::Overlattice { expr } => overlattice_cmd(&expr),
        Command::OrbitEq { expr, v1, v2, group } => orbit_eq(&expr, &v1, &v2, &group.group),
        Command::Vinberg { expr, base, budget } => vinberg_cmd(&expr, base.as_deref(), budget),
        Command::Building { expr, group, dot, budget } => {
            building_cmd(&expr, &group.group, dot.as_deref(), budget)
        }
        Command::Cosets { expr, group, budget } => cosets_cmd(&expr, &group.group, budget),
    }
}

fn err_str(e: ortholat::Error) -> String {
    e.to_string()
}

fn print_gram(g: &IntMat) {
    for i in 0..g.rows() {
        let row: Vec<String> = (0..g.cols()).map(|j| g[(i, j)].to_string()).collect();
        println!("  [{}]", row.join(", "));
    }
}

fn lattice_info(expr: &str) -> Result<u8, String> {
    let lat = parse_lattice(expr).map_err(err_str)?;
    println!("lattice {}", expr);
    println!("rank {}", lat.rank());
    let (p, m) = lat.signature();
    println!("signature ({},{})", p, m);
    println!("det {}", lat.det());
    println!("gram");
    print_gram(lat.gram());
    let dg = lat.disc_group();
    if dg.is_trivial() {
        println!("disc-group trivial");
    } else {
        let parts: Vec<String> = dg.orders.iter().map(|d| format!("C{}", d)).collect();
        println!("disc-group {}", parts.join("+"));
        let q = FiniteQuadraticForm::of_lattice(&lat);
        for (i, d) in q.orders.iter().enumerate() {
            let mut e = vec![Int::from(0); q.orders.len()];
            e[i] = Int::from(1);
            println!("q(g{}) = {} mod 2Z  (order {})", i + 1, q.q_value(&e), d);
        }
    }
    println!("maximal {}", lat.is_maximal());
    Ok(EXIT_OK)
}

fn overlattice_cmd(expr: &str) -> Result<u8, String> {
    let lat = parse_lattice(expr).map_err(err_str)?;
    let ov = maximal_overlattice(&lat).map_err(err_str)?;
    println!("lattice {}", expr);
    println!("index {}", ov.embed.det().abs());
    println!("overlattice-gram");
    print_gram(ov.lattice.gram());
    println!("embedding (columns = images of the basis)");
    print_gram(&ov.embed);
    Ok(EXIT_OK)
}

fn spec_for(lat: &LatRef, flags: &GroupFlags) -> Result<GroupSpec, String> {
    let disc = match &flags.disc_file {
        Some(path) => {
            let orders = lat.disc_group().orders.clone();
            DiscCondition::InSubgroup(parse_disc_file(path, &orders)?)
        }
        None if flags.stable => DiscCondition::Trivial,
        None => DiscCondition::Any,
    };
    GroupSpec::new(lat.clone(), lat.clone(), None, flags.so, flags.plus, disc, group_label(flags))
        .map_err(err_str)
}

fn orbit_eq(expr: &str, v1: &str, v2: &str, group: &str) -> Result<u8, String> {
    let lat = parse_lattice(expr).map_err(err_str)?;
    let flags = parse_group_flags(group)?;
    let v1: Vec<Rat> = parse_vector(v1).map_err(err_str)?;
    let v2: Vec<Rat> = parse_vector(v2).map_err(err_str)?;
    if v1.len() != lat.rank() || v2.len() != lat.rank() {
        return Err("vector dimension does not match the lattice rank".into());
    }
    let (_, w1) = ortholat::vectors::primitive_scale(&v1);
    let comp = lat.orthogonal_complement(&w1).map_err(err_str)?;
    let (pos, neg, zero) = inertia(&lat.gram_of(comp.basis()).to_rat());
    let definite_route = zero == 0 && (pos == 0 || neg == 0);
    println!("lattice {}", expr);
    println!("group {}", group_label(&flags));
    println!(
        "route {}",
        if definite_route { "definite-complement" } else { "indefinite-complement" }
    );
    let verdict = if definite_route {
        let spec = spec_for(&lat, &flags)?;
        equiv_definite_complement(&lat, &spec, &v1, &v2).map_err(err_str)?
    } else {
        let orders = lat.disc_group().orders.clone();
        let subgroup = match &flags.disc_file {
            Some(path) => parse_disc_file(path, &orders)?,
            None if flags.stable => vec![FqfMap::identity(&orders)],
            None => {
                let q = FiniteQuadraticForm::of_lattice(&lat);
                ortholat::discform::orthogonal_group(&q)
            }
        };
        let run = equiv_indefinite(&lat, &subgroup, &v1, &v2).map_err(err_str)?;
        if flags.plus || flags.so {
            upgrade_to_so_plus(&lat, &v1, &run.verdict).map_err(err_str)?
        } else {
            run.verdict
        }
    };
    match verdict {
        OrbitVerdict::Equivalent { witness, disc_witness } => {
            println!("verdict equivalent");
            match witness {
                Some(theta) => {
                    let ok = theta.apply(&v1) == v2 && theta.is_integral();
                    println!("witness verified {}", ok);
                    let m = theta.mat;
                    for i in 0..m.rows() {
                        let row: Vec<String> =
                            (0..m.cols()).map(|j| m[(i, j)].to_string()).collect();
                        println!("  [{}]", row.join(", "));
                    }
                }
                None => {
                    println!("witness disc-certificate (existence via gluing)");
                    if let Some(m) = disc_witness {
                        let imgs: Vec<String> = m
                            .images
                            .iter()
                            .map(|im| {
                                im.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
                            })
                            .collect();
                        println!("  induced map on D(L): {}", imgs.join("; "));
                    }
                }
            }
            Ok(EXIT_OK)
        }
        OrbitVerdict::NotEquivalent => {
            println!("verdict not-equivalent");
            Ok(EXIT_OK)
        }
        OrbitVerdict::Inconclusive(reason) => {
            println!("verdict inconclusive");
            println!("reason {}", reason);
            Ok(EXIT_INCONCLUSIVE)
        }
    }
}

fn vinberg_cmd(expr: &str, base: Option<&str>, budget: usize) -> Result<u8, String> {
    let lat = parse_lattice(expr).map_err(err_str)?;
    let x0 = match base {
        Some(s) => {
            let v = parse_vector(s).map_err(err_str)?;
            q_to_z(&v).ok_or("base point must be integral")?
        }
        None => ortholat::ogroup::default_vinberg_base(&lat),
    };
    println!("lattice {}", expr);
    println!("base {}", fmt_zvec(&x0));
    let vr = vinberg_roots(&lat, &x0, budget).map_err(err_str)?;
    println!("terminated {}", vr.terminated);
    println!("roots {}", vr.roots.len());
    for r in &vr.roots {
        println!("root {} norm {}", fmt_zvec(r), lat.norm_z(r));
    }
    Ok(if vr.terminated { EXIT_OK } else { EXIT_INCONCLUSIVE })
}

fn building_cmd(
    expr: &str,
    group: &str,
    dot: Option<&std::path::Path>,
    budget: usize,
) -> Result<u8, String> {
    let lat = parse_lattice(expr).map_err(err_str)?;
    let flags = parse_group_flags(group)?;
    if !flags.stable || flags.disc_file.is_some() {
        return Err("building supports the stable groups (--group stable,plus[,so])".into());
    }
    let amb = ambient_for(&lat).map_err(err_str)?;
    let spec = GroupSpec::in_ambient(
        &amb.ctx.lp,
        &lat,
        amb.sub_basis.clone(),
        flags.so,
        flags.plus,
        DiscCondition::Trivial,
        group_label(&flags),
    )
    .map_err(err_str)?;
    let b2 = building_maximal(&amb.ctx).map_err(err_str)?;
    let b = building_descend(&b2, &spec, &amb.ctx, budget).map_err(err_str)?;
    print!("{}", serialize_text(&b, Some(&amb.sub_basis)));
    if let Some(path) = dot {
        std::fs::write(path, to_dot(&b)).map_err(|e| e.to_string())?;
    }
    Ok(if b.complete { EXIT_OK } else { EXIT_INCONCLUSIVE })
}

fn cosets_cmd(expr: &str, group: &str, budget: usize) -> Result<u8, String> {
    let lat = parse_lattice(expr).map_err(err_str)?;
    let flags = parse_group_flags(group)?;
    if flags.disc_file.is_some() {
        return Err("cosets supports the predicate groups (stable/plus/so)".into());
    }
    let amb = ambient_for(&lat).map_err(err_str)?;
    let disc = if flags.stable { DiscCondition::Trivial } else { DiscCondition::Any };
    let spec = GroupSpec::in_ambient(
        &amb.ctx.lp,
        &lat,
        amb.sub_basis.clone(),
        flags.so,
        flags.plus,
        disc,
        group_label(&flags),
    )
    .map_err(err_str)?;
    let t = coset_transversal(&amb.ctx.gens, &spec, budget);
    println!("lattice {}", expr);
    println!("group {} inside O+(maximal overlattice)", group_label(&flags));
    println!("complete {}", t.complete);
    println!("index {}", t.index());
    for (i, r) in t.reps.iter().enumerate() {
        let rows: Vec<String> = (0..r.mat.rows())
            .map(|row| {
                (0..r.mat.cols())
                    .map(|c| r.mat[(row, c)].to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect();
        println!("rep {} [{}]", i, rows.join("; "));
    }
    Ok(if t.complete { EXIT_OK } else { EXIT_INCONCLUSIVE })
}
