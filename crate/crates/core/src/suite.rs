//! The seeded property suite behind `check-all`.
//!
//! Each function runs one family of checks and returns a report section.
//! Instances are drawn from independent sub-streams of the seed, so a
//! section's content depends only on `(seed, cfg)`.

use std::f64::consts::PI;

use crate::config::Config;
use crate::error::Result;
use crate::estimates::{gradient_estimate_check, harnack_verify, SolutionPair};
use crate::exhaustion::Direction;
use crate::function::{GraphFunction, Potential};
use crate::generators::{
    path, random_fixture, random_function, random_region, sample_solution_pair, FixedGraph, Lattice, RegularTree,
};
use crate::graph::{VertexId, WeightedGraph};
use crate::green::{eigen_bound_check, green_direct, green_exhaustion, green_series, transition};
use crate::operators::{kato_check, square_identity_check};
use crate::report::Section;
use crate::rng::SeedStream;
use crate::solvers::{dirichlet_solve, existence_exhaustion, poisson_solve};
use crate::spectral::{lambda1, lambda1_exhaustion, DirichletForm};

/// Largest fixture used by the random instances.
pub const FIXTURE_MAX_VERTICES: usize = 60;
/// Largest random region interior.
pub const REGION_MAX_SIZE: usize = 20;

fn stream(seed: u64, criterion: u64) -> SeedStream {
    let mut s = SeedStream::new(seed);
    for _ in 0..criterion {
        s.next_u64();
    }
    SeedStream::new(s.next_u64())
}

/// Runs `body`, recording an error as a failed check instead of aborting.
fn guarded(section: &mut Section, context: &str, body: impl FnOnce(&mut Section) -> Result<()>) {
    if let Err(e) = body(section) {
        section.error(context, &e);
    }
}

fn p3_fixture() -> (WeightedGraph, GraphFunction, GraphFunction) {
    let g = path(3).expect("fixture");
    let u = [(0, 1.0), (1, 2.0), (2, 1.0)].into_iter().collect();
    let q = [(0, 1.0), (1, -0.5), (2, 1.0)].into_iter().collect();
    (g, u, q)
}

/// Kato inequalities and the `Δu²` identity on random graphs and functions.
pub fn kato(seed: u64, cfg: &Config, trials: usize) -> Section {
    let mut s = Section::new("kato");
    let mut rng = stream(seed, 1);
    let (mut worst_kato, mut worst_square): (f64, f64) = (f64::INFINITY, 0.0);
    let mut failures = 0usize;
    guarded(&mut s, "kato trials", |_| {
        for _ in 0..trials {
            let g = random_fixture(&mut rng, FIXTURE_MAX_VERTICES)?;
            let u = random_function(&g, &mut rng);
            let k = kato_check(&g, &u, cfg)?;
            let l = square_identity_check(&g, &u, cfg)?;
            let scale = 1.0 + u.sup_norm().powi(2);
            worst_kato = worst_kato.min(k.worst_slack() / scale);
            worst_square = worst_square.max(l.max_residual / scale);
            failures += usize::from(!k.pass) + usize::from(!l.pass);
        }
        Ok(())
    });
    s.fact("trials", trials);
    s.at_least("min Kato slack / (1 + |u|²)", worst_kato, -cfg.identity);
    s.at_most("max square-identity residual / (1 + |u|²)", worst_square, cfg.identity);
    s.at_most("instances failing", failures as f64, 0.0);
    s
}

fn solution_pairs(
    seed: u64,
    cfg: &Config,
    trials: usize,
    mut visit: impl FnMut(&SolutionPair<'_>, &mut SeedStream) -> Result<()>,
) -> Result<()> {
    let mut rng = stream(seed, 2);
    for _ in 0..trials {
        let g = random_fixture(&mut rng, FIXTURE_MAX_VERTICES)?;
        let pair = sample_solution_pair(&g, rng.next_u64(), cfg)?;
        visit(&pair, &mut rng)?;
    }
    Ok(())
}

/// `|∇u|² ≤ P u²` and `P ≥ Q²` on sampled solution pairs.
pub fn gradient(seed: u64, cfg: &Config, trials: usize) -> Section {
    let mut s = Section::new("gradient estimate");
    let (mut worst_ratio, mut min_slack, mut min_pq) = (0.0f64, f64::INFINITY, f64::INFINITY);
    let mut failures = 0usize;
    guarded(&mut s, "gradient trials", |_| {
        solution_pairs(seed, cfg, trials, |pair, _| {
            let r = gradient_estimate_check(pair, cfg)?;
            let scale = 1.0 + pair.q().sup_norm().powi(2);
            worst_ratio = worst_ratio.max(r.worst_ratio);
            min_slack = min_slack.min(r.min_slack);
            min_pq = min_pq.min(r.min_p_minus_q_sq / scale);
            failures += usize::from(!r.pass);
            Ok(())
        })
    });
    s.fact("trials", trials);
    s.fact("worst |∇u|²/(P u²)", worst_ratio);
    s.at_least("min (P + tol) u² - |∇u|²", min_slack, 0.0);
    s.at_least("min (P - Q²) / (1 + |Q|²)", min_pq, -cfg.identity);
    s.at_most("pairs failing", failures as f64, 0.0);
    s
}

/// Harnack inequality in both modes on the same pairs, plus the tight fixture.
pub fn harnack(seed: u64, cfg: &Config, trials: usize) -> Section {
    let mut s = Section::new("harnack");
    let (mut min_degree, mut min_sharp, mut min_order) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut failures = 0usize;
    guarded(&mut s, "harnack trials", |_| {
        solution_pairs(seed, cfg, trials, |pair, rng| {
            let mut pool: Vec<VertexId> = pair.graph().vertices().to_vec();
            let k = rng.range(1, 8).min(pool.len());
            let mut set = Vec::with_capacity(k);
            for _ in 0..k {
                set.push(pool.swap_remove(rng.below(pool.len())));
            }
            set.sort_unstable();
            let r = harnack_verify(pair, &set, cfg)?;
            min_degree = min_degree.min(r.c_degree * r.inf / r.sup - 1.0);
            min_sharp = min_sharp.min(r.c_sharp * r.inf / r.sup - 1.0);
            min_order = min_order.min(r.c_degree / r.c_sharp - 1.0);
            failures += usize::from(!r.pass());
            Ok(())
        })
    });
    s.fact("trials", trials);
    s.at_least("min C_degree inf/sup - 1", min_degree, -cfg.harnack);
    s.at_least("min C_sharp inf/sup - 1", min_sharp, -cfg.harnack);
    s.at_least("min C_degree/C_sharp - 1", min_order, -cfg.harnack);
    s.at_most("sets failing", failures as f64, 0.0);
    guarded(&mut s, "P3 fixture", |s| {
        let (g, u, q) = p3_fixture();
        let pair = SolutionPair::new(&g, u, q, vec![0, 1, 2], cfg)?;
        let r = harnack_verify(&pair, &[0, 1], cfg)?;
        s.close_to("P3 C_degree", r.c_degree, 2.0, 0.0);
        s.close_to("P3 sup/inf", r.ratio, 2.0, 0.0);
        Ok(())
    });
    s
}

/// `λ₁` against the path closed form and along exhaustions.
pub fn spectral(cfg: &Config) -> Section {
    let mut s = Section::new("lambda1");
    guarded(&mut s, "path oracle", |s| {
        let iterative = Config { dense_eigen_max: 0, ..cfg.clone() };
        let (mut dense_err, mut iter_err): (f64, f64) = (0.0, 0.0);
        let mut positive = true;
        for n in 1..=50usize {
            let g = path(n + 2)?;
            let interior: Vec<VertexId> = (1..=n as VertexId).collect();
            let form = DirichletForm::assemble(&g.region_from_interior(&interior)?, &Potential::Zero)?;
            let exact = 1.0 - (PI / (n as f64 + 1.0)).cos();
            let d = lambda1(&form, cfg)?;
            let i = lambda1(&form, &iterative)?;
            dense_err = dense_err.max((d.lambda - exact).abs());
            iter_err = iter_err.max((i.lambda - exact).abs());
            positive &= d.positive && i.positive;
        }
        s.at_most("path n=1..50 dense |λ₁ - (1 - cos(π/(n+1)))|", dense_err, 1e-9);
        s.at_most("path n=1..50 inverse iteration |λ₁ - (1 - cos(π/(n+1)))|", iter_err, 1e-9);
        s.holds("principal eigenfunctions positive", positive);
        Ok(())
    });
    let exhaustions: [(Box<dyn crate::generators::BallGenerator>, Vec<usize>); 3] = [
        (Box::new(Lattice { dim: 1 }), (2..=20).collect()),
        (Box::new(Lattice { dim: 2 }), (2..=12).collect()),
        (Box::new(RegularTree { degree: 3 }), (2..=10).collect()),
    ];
    for (generator, radii) in exhaustions {
        let name = generator.name();
        guarded(&mut s, &format!("{name} exhaustion"), |s| {
            let r = lambda1_exhaustion(generator.as_ref(), generator.origin(), &radii, &Potential::Zero, cfg)?;
            s.at_most(format!("{name} λ₁ increase between radii"), r.monotonicity_defect, cfg.monotone);
            s.holds(format!("{name} eigenfunctions positive"), r.steps.iter().all(|st| st.positive));
            if name == "tree3" {
                let floor = 1.0 - 2.0 * 2f64.sqrt() / 3.0;
                let min = r.series.values.iter().copied().fold(f64::INFINITY, f64::min);
                s.at_least("tree3 min λ₁ over R=2..10", min, floor - 1e-12);
            }
            if name == "lattice1" {
                let err = r
                    .steps
                    .iter()
                    .map(|st| (st.lambda - (1.0 - (PI / (2.0 * st.radius as f64)).cos())).abs())
                    .fold(0.0, f64::max);
                s.at_most("lattice1 |λ₁ - (1 - cos(π/2R))|", err, 1e-9);
            }
            s.fact(format!("{name} estimate"), r.estimate);
            s.fact(format!("{name} last gap"), r.last_gap);
            s.add_series(r.series);
            Ok(())
        });
    }
    s
}

fn random_instance(rng: &mut SeedStream) -> Result<(WeightedGraph, Vec<VertexId>)> {
    let g = random_fixture(rng, FIXTURE_MAX_VERTICES)?;
    let interior = random_region(&g, rng, REGION_MAX_SIZE);
    Ok((g, interior))
}

/// Series and direct Green matrices, kernel symmetry and the identity.
pub fn green_matrices(seed: u64, cfg: &Config, trials: usize) -> Section {
    let mut s = Section::new("green matrix");
    guarded(&mut s, "P4 fixture", |s| {
        let g = path(4)?;
        let r = g.region_from_interior(&[1, 2])?;
        let exact = [[4.0 / 3.0, 2.0 / 3.0], [2.0 / 3.0, 4.0 / 3.0]];
        let series = green_series(&r, cfg.series_max_terms, cfg.series_tol, cfg)?;
        let direct = green_direct(&r, cfg)?;
        let (mut es, mut ed): (f64, f64) = (0.0, 0.0);
        for (i, x) in [1, 2].into_iter().enumerate() {
            for (j, y) in [1, 2].into_iter().enumerate() {
                es = es.max((series.green().get(x, y)? - exact[i][j]).abs());
                ed = ed.max((direct.get(x, y)? - exact[i][j]).abs());
            }
        }
        s.at_most("P4 series max |g - exact|", es, 1e-12);
        s.at_most("P4 direct max |g - exact|", ed, 1e-12);
        Ok(())
    });
    let mut rng = stream(seed, 5);
    let (mut agree, mut sym, mut ident, mut row_sum, mut min_diag, mut min_entry): (f64, f64, f64, f64, f64, f64) =
        (0.0, 0.0, 0.0, 0.0, f64::INFINITY, f64::INFINITY);
    let mut unconverged = 0usize;
    guarded(&mut s, "random regions", |_| {
        for _ in 0..trials {
            let (g, interior) = random_instance(&mut rng)?;
            let region = g.region_from_interior(&interior)?;
            let p = transition(&region)?;
            row_sum = row_sum.max(p.row_sums().iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max));
            let series = green_series(&region, cfg.series_max_terms, cfg.series_tol, cfg)?;
            unconverged += usize::from(!series.is_converged());
            let direct = green_direct(&region, cfg)?;
            let diff = (series.green().matrix() - direct.matrix()).abs().max();
            agree = agree.max(diff);
            sym = sym.max(direct.symmetry_defect()).max(series.green().symmetry_defect());
            ident = ident.max(direct.identity_residual(&p)).max(series.green().identity_residual(&p));
            min_diag = min_diag.min(direct.min_diagonal());
            min_entry = min_entry.min(direct.min_entry());
        }
        Ok(())
    });
    s.fact("trials", trials);
    s.at_most("series runs hitting the term cap", unconverged as f64, 0.0);
    s.at_most("max |row sum over S̄ - 1|", row_sum, 1e-12);
    s.at_most("max |series - direct|", agree, 1e-10);
    s.at_most("max relative kernel asymmetry", sym, cfg.kernel_symmetry);
    s.at_most("max |(I - P_S)g - I|", ident, cfg.green_identity);
    s.at_least("min g(x,x)", min_diag, 1.0 - 1e-12);
    s.at_least("min g(x,y)", min_entry, 0.0);
    s
}

/// Green exhaustions on ℤ¹, the 3-regular tree and ℤ³.
pub fn transience(cfg: &Config) -> Section {
    let mut s = Section::new("green exhaustion");
    guarded(&mut s, "lattice1", |s| {
        let radii: Vec<usize> = (2..=100).collect();
        let r = green_exhaustion(&Lattice { dim: 1 }, 0, &radii, &[(0, 0)], cfg)?;
        let p = &r.probes[0];
        let err = p.series.radii.iter().zip(&p.series.values).map(|(&r, v)| (v - r as f64).abs()).fold(0.0, f64::max);
        s.at_most("lattice1 max |g_R(0,0) - R|", err, 1e-9);
        s.holds("lattice1 classified GROWING", !p.classification.is_converging());
        s.at_most("lattice1 monotonicity defect", p.monotonicity_defect, cfg.monotone);
        s.fact("lattice1 classification", &p.classification);
        s.add_series(p.series.clone());
        Ok(())
    });
    guarded(&mut s, "tree3", |s| {
        let radii: Vec<usize> = (4..=12).collect();
        let r = green_exhaustion(&RegularTree { degree: 3 }, 0, &radii, &[(0, 0), (0, 1), (1, 2)], cfg)?;
        let root = &r.probes[0];
        s.close_to("tree3 g_12(root,root) vs 2", root.series.last().unwrap_or(f64::NAN), 2.0, 1e-2);
        s.holds("tree3 classified CONVERGING", root.classification.is_converging());
        for p in &r.probes {
            s.at_most(format!("tree3 g({},{}) monotonicity defect", p.x, p.y), p.monotonicity_defect, cfg.monotone);
            s.holds(format!("tree3 g({},{}) nonnegative", p.x, p.y), p.nonnegative);
            s.add_series(p.series.clone());
        }
        s.fact("tree3 classification", &root.classification);
        Ok(())
    });
    guarded(&mut s, "lattice3", |s| {
        let radii: Vec<usize> = (4..=10).collect();
        let r = green_exhaustion(&Lattice { dim: 3 }, 0, &radii, &[(0, 0), (0, 1)], cfg)?;
        let origin = &r.probes[0];
        for p in &r.probes {
            s.at_most(format!("lattice3 g({},{}) monotonicity defect", p.x, p.y), p.monotonicity_defect, cfg.monotone);
            s.holds(format!("lattice3 g({},{}) nonnegative", p.x, p.y), p.nonnegative);
            s.add_series(p.series.clone());
        }
        s.holds("lattice3 gaps shrinking", origin.series.gaps_shrinking());
        let last = origin.series.last().unwrap_or(f64::NAN);
        s.at_least("lattice3 g_10(0,0) lower", last, 1.40);
        s.at_most("lattice3 g_10(0,0) upper", last, 1.52);
        s.fact("lattice3 classification", &origin.classification);
        Ok(())
    });
    s
}

/// `λ₁ · A ≥ 1` and the Green representation of the principal eigenfunction.
pub fn eigen_bound(seed: u64, cfg: &Config, trials: usize) -> Section {
    let mut s = Section::new("eigen bound");
    guarded(&mut s, "fixtures", |s| {
        let p3 = path(3)?;
        let r = eigen_bound_check(&p3.region_from_interior(&[1])?, cfg)?;
        s.at_least("P3 λ₁·A", r.product, 1.0 - cfg.eigen_bound);
        let p4 = path(4)?;
        let r = eigen_bound_check(&p4.region_from_interior(&[1, 2])?, cfg)?;
        s.close_to("P4 λ₁·A = 1", r.product, 1.0, 1e-12);
        Ok(())
    });
    let mut rng = stream(seed, 7);
    let (mut min_product, mut max_rep): (f64, f64) = (f64::INFINITY, 0.0);
    guarded(&mut s, "random regions", |_| {
        for _ in 0..trials {
            let (g, interior) = random_instance(&mut rng)?;
            let r = eigen_bound_check(&g.region_from_interior(&interior)?, cfg)?;
            min_product = min_product.min(r.product);
            max_rep = max_rep.max(r.representation_residual);
        }
        Ok(())
    });
    s.fact("trials", trials);
    s.at_least("min λ₁·A", min_product, 1.0 - cfg.eigen_bound);
    s.at_most("max representation residual / |u|", max_rep, cfg.representation);
    s
}

/// `∫u² ≤ λ₁⁻² ∫f²` for nonnegative loads.
pub fn poisson(seed: u64, cfg: &Config, trials: usize) -> Section {
    let mut s = Section::new("poisson bound");
    guarded(&mut s, "P4 fixture", |s| {
        let g = path(4)?;
        let r = g.region_from_interior(&[1, 2])?;
        let f: GraphFunction = [(1, 1.0), (2, 1.0)].into_iter().collect();
        let rep = poisson_solve(&r, &Potential::Zero, &f, cfg)?;
        s.close_to("P4 ∫u² - λ₁⁻²∫f²", rep.lhs - rep.rhs, 0.0, 1e-12);
        Ok(())
    });
    let mut rng = stream(seed, 8);
    let (mut min_slack, mut max_ratio): (f64, f64) = (f64::INFINITY, 0.0);
    let mut not_positive = 0usize;
    guarded(&mut s, "random loads", |_| {
        for t in 0..trials {
            let (g, interior) = random_instance(&mut rng)?;
            let region = g.region_from_interior(&interior)?;
            let mut f = GraphFunction::new();
            for &x in &interior {
                f.set(x, if rng.below(4) == 0 { 0.0 } else { rng.uniform() });
            }
            let first = interior[0];
            if f.get(first)? == 0.0 {
                f.set(first, 1.0);
            }
            let q = if t % 2 == 0 {
                Potential::Zero
            } else {
                Potential::Function(interior.iter().map(|&x| (x, rng.uniform())).collect())
            };
            let rep = poisson_solve(&region, &q, &f, cfg)?;
            min_slack = min_slack.min(rep.rhs + 1e-9 - rep.lhs);
            max_ratio = max_ratio.max(rep.lhs / rep.rhs);
            not_positive += usize::from(!rep.positive);
        }
        Ok(())
    });
    s.fact("trials", trials);
    s.fact("max ∫u² / (λ₁⁻²∫f²)", max_ratio);
    s.at_least("min λ₁⁻²∫f² + 1e-9 - ∫u²", min_slack, 0.0);
    s.at_most("solutions not strictly positive", not_positive as f64, 0.0);
    s
}

/// Solver against the Green matrix, the maximum principle, and the `Q = 0`
/// existence exhaustion.
pub fn solvers(seed: u64, cfg: &Config, trials: usize) -> Section {
    let mut s = Section::new("solvers");
    let mut rng = stream(seed, 9);
    let (mut green_diff, mut max_excess): (f64, f64) = (0.0, f64::NEG_INFINITY);
    guarded(&mut s, "random instances", |_| {
        for _ in 0..trials {
            let (g, interior) = random_instance(&mut rng)?;
            let region = g.region_from_interior(&interior)?;
            let boundary = region.boundary();
            let f: GraphFunction = interior.iter().map(|&x| (x, rng.uniform_in(-1.0, 1.0))).collect();
            let zero_bc = GraphFunction::constant(boundary.iter().copied(), 0.0);
            let u = dirichlet_solve(&region, &Potential::Zero, &f, &zero_bc, cfg)?;
            let green = green_direct(&region, cfg)?;
            let fv: Vec<f64> = interior.iter().map(|&x| f.get(x)).collect::<Result<_>>()?;
            let gf = green.apply(&fv);
            for (p, &x) in interior.iter().enumerate() {
                green_diff = green_diff.max((u.get(x)? - gf[p]).abs());
            }
            let bc: GraphFunction = boundary.iter().map(|&y| (y, rng.uniform_in(-1.0, 1.0))).collect();
            let lo = bc.iter().map(|(_, v)| v).fold(f64::INFINITY, f64::min);
            let hi = bc.iter().map(|(_, v)| v).fold(f64::NEG_INFINITY, f64::max);
            let zero_f = GraphFunction::constant(interior.iter().copied(), 0.0);
            let h = dirichlet_solve(&region, &Potential::Zero, &zero_f, &bc, cfg)?;
            for &x in &interior {
                let v = h.get(x)?;
                max_excess = max_excess.max(lo - v).max(v - hi);
            }
        }
        Ok(())
    });
    s.fact("trials", trials);
    s.at_most("max |dirichlet_solve(f) - G_S f|", green_diff, 1e-10);
    s.at_most("max excursion outside [min bc, max bc]", max_excess, 1e-12);
    let hosts: [(Box<dyn crate::generators::BallGenerator>, Vec<usize>); 3] = [
        (Box::new(Lattice { dim: 2 }), vec![2, 3, 4, 6]),
        (Box::new(RegularTree { degree: 3 }), vec![2, 4, 6]),
        (Box::new(FixedGraph { name: "path40".into(), graph: path(40).expect("fixture") }), vec![3, 6, 9]),
    ];
    for (generator, radii) in hosts {
        let name = generator.name();
        let origin = if name == "path40" { 20 } else { generator.origin() };
        guarded(&mut s, &format!("{name} existence"), |s| {
            let r = existence_exhaustion(generator.as_ref(), origin, &radii, &Potential::Zero, cfg)?;
            let dev = r.normalized.iter().map(|(_, v)| (v - 1.0).abs()).fold(0.0, f64::max);
            s.at_most(format!("{name} Q=0 max |û - 1|"), dev, f64::EPSILON);
            Ok(())
        });
    }
    guarded(&mut s, "positive potential", |s| {
        let q = Potential::Constant(0.5);
        let tree = existence_exhaustion(&RegularTree { degree: 3 }, 0, &(2..=8).collect::<Vec<_>>(), &q, cfg)?;
        s.at_least("tree3 Q=1/2 min u", tree.steps.iter().map(|st| st.min_u).fold(f64::INFINITY, f64::min), 0.0);
        // radial about the root: each layer is fixed by the equation one layer in
        s.at_most("tree3 Q=1/2 max Cauchy gap", tree.gaps.values.iter().copied().fold(0.0, f64::max), 1e-12);
        let lattice = existence_exhaustion(&Lattice { dim: 2 }, 0, &(3..=10).collect::<Vec<_>>(), &q, cfg)?;
        s.at_least("lattice2 Q=1/2 min u", lattice.steps.iter().map(|st| st.min_u).fold(f64::INFINITY, f64::min), 0.0);
        s.holds("lattice2 Q=1/2 Cauchy gaps nonincreasing", lattice.gaps.is_monotone(Direction::Nonincreasing, 0.0));
        s.add_series(tree.gaps);
        s.add_series(lattice.gaps);
        Ok(())
    });
    s
}

pub const DEFAULT_TRIALS: Trials =
    Trials { kato: 1000, pairs: 500, green: 100, eigen: 100, poisson: 500, solvers: 500 };

/// Instance counts per section.
#[derive(Debug, Clone, Copy)]
pub struct Trials {
    pub kato: usize,
    pub pairs: usize,
    pub green: usize,
    pub eigen: usize,
    pub poisson: usize,
    pub solvers: usize,
}

/// Every section in a fixed order.
pub fn check_all(seed: u64, cfg: &Config, trials: &Trials) -> Vec<Section> {
    vec![
        kato(seed, cfg, trials.kato),
        gradient(seed, cfg, trials.pairs),
        harnack(seed, cfg, trials.pairs),
        spectral(cfg),
        green_matrices(seed, cfg, trials.green),
        transience(cfg),
        eigen_bound(seed, cfg, trials.eigen),
        poisson(seed, cfg, trials.poisson),
        solvers(seed, cfg, trials.solvers),
    ]
}
