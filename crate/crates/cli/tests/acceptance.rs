//! Acceptance driver. Prints one `[PASS]`/`[FAIL]` line per criterion and
//! exits non-zero if any criterion fails. Tolerances and time limits are the
//! constants next to each check.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use qcbound_core::geometry::{intersection_volume, ConvexCell, FractalTreeSpec, WhitneyChain, WhitneyTriple};
use qcbound_core::oracle::{mesh_domain, neumann_mu2, poincare_constant_p2, DomainSpec};
use qcbound_core::poincare::{
    chain_constant, convex_cell_constant, diameter_constant, subset_average_factor, pair_constant, pi_p, pi_p_quadrature, snowflake_series,
    snowflake_tail, triple_constant, SpectralParams, TailOptions,
};
use qcbound_core::qc_transfer::{
    ball_lower_bound, eigen_transfer, eigen_transfer_at_q, eigen_transfer_lipschitz, star_domain_3d_bound, poincare_transfer,
    q_grid, q_pq_norm, star_map_k, star_map_lipschitz, whitney_qc_bound, QCMapData, SobolevPoincareBase,
    Q_GRID_TOP_GAP,
};
use qcbound_core::{EigenBound, PoincareBound};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, format!("took {:.2} s, limit {limit_s} s", elapsed.as_secs_f64()))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> ConvexCell {
    ConvexCell::aabb(&[x0, y0], &[x1, y1]).unwrap()
}

fn cell_bound(c: &ConvexCell) -> PoincareBound {
    convex_cell_constant(c, SpectralParams::new(2.0, 2).unwrap()).unwrap()
}

/// pi_p closed form against its integral definition.
fn ac1() -> Outcome {
    const TOL: f64 = 1e-8;
    const TOL_PI2: f64 = 1e-12;
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for p in [1.5, 2.0, 3.0, 4.0, 10.0] {
        let closed = pi_p(p).map_err(|e| e.to_string())?;
        let integral = pi_p_quadrature(p).map_err(|e| e.to_string())?;
        let r = rel(closed, integral);
        ensure(r < TOL, format!("p = {p}: closed {closed} vs integral {integral}, rel {r:e}"))?;
        worst = worst.max(r);
    }
    let pi2 = pi_p(2.0).unwrap();
    ensure(rel(pi2, PI) < TOL_PI2, format!("pi_2 = {pi2}"))?;
    within(start.elapsed(), 1.0)?;
    Ok(format!("worst rel {worst:.1e}, pi_2 - pi = {:.1e}", pi2 - PI))
}

/// Finite-element calibration on the square, the 2x1 rectangle and the disk.
fn ac2() -> Outcome {
    const H: f64 = 0.025;
    let start = Instant::now();
    let cases = [
        ("unit square", DomainSpec::Rectangle { lo: [0.0, 0.0], hi: [1.0, 1.0] }, PI * PI, 0.01),
        ("2x1 rectangle", DomainSpec::Rectangle { lo: [0.0, 0.0], hi: [2.0, 1.0] }, PI * PI / 4.0, 0.01),
        ("unit disk", DomainSpec::Disk { radius: 1.0, center: [0.0, 0.0] }, 1.84118f64.powi(2), 0.02),
    ];
    let mut parts = Vec::new();
    for (name, spec, target, tol) in cases {
        let mesh = mesh_domain(&spec, H).map_err(|e| e.to_string())?;
        let mu = neumann_mu2(&mesh).map_err(|e| e.to_string())?.mu2;
        let r = rel(mu, target);
        ensure(r < tol, format!("{name}: mu2 = {mu}, target {target}, rel {r:e}"))?;
        parts.push(format!("{name} {:.3}%", 100.0 * r));
    }
    within(start.elapsed(), 30.0)?;
    Ok(format!("{} in {:.1} s", parts.join(", "), start.elapsed().as_secs_f64()))
}

/// diag(a, 1) on the unit square: transferred bound pi^2/a^3 below pi^2/a^2.
fn ac3() -> Outcome {
    const TOL: f64 = 1e-12;
    for a in [1.0f64, 2.0, 4.0] {
        let map = QCMapData::linear(&[vec![a, 0.0], vec![0.0, 1.0]], 1.0, None).map_err(|e| e.to_string())?;
        ensure(rel(map.k, a) < TOL, format!("K = {} for a = {a}", map.k))?;
        let base = EigenBound::given(PI * PI, 2.0, "unit-square").unwrap();
        let out = eigen_transfer_lipschitz(&map, &base, 2.0).map_err(|e| e.to_string())?;
        let expected = PI * PI / a.powi(3);
        let exact = PI * PI / (a * a);
        ensure(rel(out.mu_lower, expected) < TOL, format!("a = {a}: {} vs {expected}", out.mu_lower))?;
        ensure(out.mu_lower <= exact * (1.0 + TOL), format!("a = {a}: {} exceeds {exact}", out.mu_lower))?;
        if a == 1.0 {
            ensure(rel(out.mu_lower, exact) < TOL, "no equality at a = 1")?;
        }
    }
    Ok("a in {1, 2, 4}".into())
}

/// Subset-average comparison on random piecewise-constant grid functions.
fn ac4() -> Outcome {
    const SLACK: f64 = 1e-10;
    const CASES: usize = 1000;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut violations = 0;
    let mut tightest: f64 = f64::INFINITY;
    for _ in 0..CASES {
        let (nx, ny) = (rng.random_range(4..25usize), rng.random_range(4..25usize));
        let (w, h) = (0.5 + 2.0 * rng.random::<f64>(), 0.5 + 2.0 * rng.random::<f64>());
        let cell = w * h / (nx * ny) as f64;
        let p = 1.0 + 7.0 * rng.random::<f64>();
        let freq = 6.0 * rng.random::<f64>();
        let noise = rng.random::<f64>();
        let f: Vec<f64> = (0..nx * ny)
            .map(|k| (freq * (k % nx) as f64 / nx as f64).sin() * 3.0 + noise * (rng.random::<f64>() * 2.0 - 1.0))
            .collect();
        let share = 0.05 + 0.95 * rng.random::<f64>();
        let mut in_a: Vec<bool> = (0..f.len()).map(|_| rng.random::<f64>() < share).collect();
        let need = (0.05 * f.len() as f64).ceil() as usize;
        while in_a.iter().filter(|&&b| b).count() < need {
            let k = rng.random_range(0..f.len());
            in_a[k] = true;
        }
        let count_a = in_a.iter().filter(|&&b| b).count();
        let mean_a = f.iter().zip(&in_a).filter(|(_, &b)| b).map(|(v, _)| v).sum::<f64>() / count_a as f64;
        let c = 6.0 * rng.random::<f64>() - 3.0;
        let norm = |shift: f64| (f.iter().map(|v| cell * (v - shift).abs().powf(p)).sum::<f64>()).powf(1.0 / p);
        let factor = subset_average_factor(f.len() as f64 / count_a as f64, p).map_err(|e| e.to_string())?;
        let (lhs, rhs) = (norm(mean_a), factor * norm(c));
        if lhs > rhs + SLACK {
            violations += 1;
        }
        tightest = tightest.min(rhs - lhs);
    }
    ensure(violations == 0, format!("{violations} violations in {CASES} cases"))?;
    within(start.elapsed(), 10.0)?;
    Ok(format!("{CASES} cases, smallest gap {tightest:.3e}"))
}

struct TripleShape {
    a1: f64,
    b1: f64,
    overlap: f64,
    gap: f64,
    reach: f64,
    c: f64,
    d: f64,
    a3: f64,
    b3: f64,
}

impl TripleShape {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        let a1 = 0.6 + 0.8 * rng.random::<f64>();
        Self {
            a1,
            b1: 0.6 + 0.8 * rng.random::<f64>(),
            overlap: a1 * (0.2 + 0.3 * rng.random::<f64>()),
            gap: 0.05 + 0.25 * rng.random::<f64>(),
            reach: 0.2 + 0.3 * rng.random::<f64>(),
            c: 0.25 * rng.random::<f64>(),
            d: 0.3 + 0.3 * rng.random::<f64>(),
            a3: 0.6 + 0.8 * rng.random::<f64>(),
            b3: 0.6 + 0.8 * rng.random::<f64>(),
        }
    }

    fn x3(&self) -> f64 {
        self.a1 + self.gap
    }

    fn at(&self, x: f64) -> WhitneyTriple {
        let q1 = rect(x, 0.0, x + self.a1, self.b1);
        let r0 = x + self.a1 - self.overlap;
        let r2 = rect(r0, self.c, x + self.x3() + self.reach, self.c + self.d);
        let q3 = rect(x + self.x3(), 0.0, x + self.x3() + self.a3, self.b3);
        WhitneyTriple::new(q1, r2, q3).unwrap()
    }
}

fn fem_b(cells: &[ConvexCell]) -> Result<f64, String> {
    let spec = DomainSpec::from_cells(cells).map_err(|e| e.to_string())?;
    let mesh = mesh_domain(&spec, 0.05).map_err(|e| e.to_string())?;
    poincare_constant_p2(&mesh).map_err(|e| e.to_string())
}

fn triple_bound(t: &WhitneyTriple) -> PoincareBound {
    let [a, b, c] = t.cells();
    triple_constant(t, &cell_bound(a), &cell_bound(b), &cell_bound(c), 2.0).unwrap()
}

/// Pair, triple and chain bounds against the finite-element constant.
fn ac5() -> Outcome {
    const CONFIGS: usize = 20;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut min_ratio = [f64::INFINITY; 3];
    let mut violations = Vec::new();
    for k in 0..CONFIGS {
        let (a, b) = (0.6 + 0.8 * rng.random::<f64>(), 0.6 + 0.8 * rng.random::<f64>());
        let (w, h) = (0.6 + 0.8 * rng.random::<f64>(), 0.6 + 0.8 * rng.random::<f64>());
        let x = a * (0.2 + 0.6 * rng.random::<f64>());
        let y = b * (0.6 * rng.random::<f64>() - 0.3);
        let (q1, q2) = (rect(0.0, 0.0, a, b), rect(x, y, x + w, y + h));
        let overlap = intersection_volume(&q1, &q2).unwrap();
        let pair = pair_constant(&q1, &q2, overlap, &cell_bound(&q1), &cell_bound(&q2), 2.0).unwrap();

        let shape = TripleShape::random(&mut rng);
        let t = shape.at(0.0);
        let triple = triple_bound(&t);

        let shift = shape.x3() + shape.a3 * (0.3 + 0.4 * rng.random::<f64>());
        let second = TripleShape::random(&mut rng).at(shift);
        let triples = vec![t.clone(), second];
        let bounds: Vec<PoincareBound> = triples.iter().map(triple_bound).collect();
        let chain = WhitneyChain::from_triples(triples, None).map_err(|e| e.to_string())?;
        let chain_b = chain_constant(&chain, &bounds, 2.0).unwrap();

        let checks = [
            (pair.value, fem_b(&[q1, q2])?),
            (triple.value, fem_b(&t.cells().map(Clone::clone))?),
            (chain_b.value, fem_b(&chain.cells())?),
        ];
        for (j, (bound, oracle)) in checks.into_iter().enumerate() {
            min_ratio[j] = min_ratio[j].min(bound / oracle);
            if bound < oracle {
                violations.push(format!("config {k} rule {j}: {bound} < {oracle}"));
            }
        }
    }
    ensure(violations.is_empty(), violations.join("; "))?;
    within(start.elapsed(), 300.0)?;
    Ok(format!(
        "{CONFIGS} configs, min bound/oracle pair {:.2} triple {:.2} chain {:.2}, {:.1} s",
        min_ratio[0],
        min_ratio[1],
        min_ratio[2],
        start.elapsed().as_secs_f64()
    ))
}

/// Snowflake level series: depth 12 against depth 20, and the tail certificate.
fn ac6() -> Outcome {
    const TOL: f64 = 1e-6;
    let opts = TailOptions::default();
    let sum = |depth| snowflake_series(&FractalTreeSpec::new(1.0, depth), 2.0, opts).map(|s| s.finite_part);
    let (e12, e20) = (sum(12).map_err(|e| e.to_string())?, sum(20).map_err(|e| e.to_string())?);
    let r = rel(e12, e20);
    ensure(r < TOL, format!("E12 = {e12}, E20 = {e20}, rel {r:e}"))?;
    let spec = FractalTreeSpec::new(1.0, 20);
    let tails: Vec<f64> =
        (1..=20).map(|s| snowflake_tail(&spec, 2.0, s, opts).map(|t| t.bound)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    ensure(tails.iter().all(|t| t.is_finite() && *t > 0.0), format!("tail not positive and finite: {tails:?}"))?;
    ensure(tails.windows(2).all(|w| w[1] < w[0]), format!("tail not decreasing: {tails:?}"))?;
    let t12 = tails[11];
    ensure(e20 - e12 <= t12, format!("tail bound {t12:e} below the actual remainder {:e}", e20 - e12))?;
    Ok(format!("rel diff {r:.2e}, tail(12) = {t12:.2e}"))
}

/// Quasiconformality coefficient of the radial star map and the delta = 1,
/// p = 4 composition.
fn ac7() -> Outcome {
    let (s6, s2) = (6f64.sqrt(), 2f64.sqrt());
    let radical = 2.0 * (4.0 + s6 + s2).sqrt() / (4.0 - s6 - s2);
    let k = star_map_k();
    ensure((k * k - radical).abs() <= 1e-9, format!("K^2 = {} vs {radical}", k * k))?;
    let base = ball_lower_bound(3, 4.0).map_err(|e| e.to_string())?;
    let out = star_domain_3d_bound(1.0, 4.0, &base).map_err(|e| e.to_string())?;
    let hand = base.mu_lower / (k * star_map_lipschitz(1.0).powi(4));
    ensure(rel(out.mu_lower, hand) < 1e-12, format!("{} vs hand-composed {hand}", out.mu_lower))?;
    Ok(format!("K^2 = {:.9}, mu >= {:.6e}", k * k, out.mu_lower))
}

/// Identity-map neutrality and the min-over-q property on seeded draws.
fn ac8() -> Outcome {
    const DRAWS: usize = 100;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for draw in 0..DRAWS {
        let n = 2 + rng.random_range(0..2usize);
        let p = 1.1 + 4.0 * rng.random::<f64>();
        let mu = 10f64.powf(4.0 * rng.random::<f64>() - 2.0);
        let vol = 0.2 + 3.0 * rng.random::<f64>();
        let id = QCMapData::identity(n, vol).map_err(|e| e.to_string())?;
        let base = EigenBound::given(mu, p, "random-base").unwrap();
        let out = eigen_transfer_lipschitz(&id, &base, p).map_err(|e| e.to_string())?;
        ensure(rel(out.mu_lower, mu) <= 1e-12, format!("draw {draw}: identity gives {} for {mu}", out.mu_lower))?;
        let pb = diameter_constant(0.1 + 3.0 * rng.random::<f64>(), p).map_err(|e| e.to_string())?;
        let via_cells = whitney_qc_bound(&pb, &id, p).map_err(|e| e.to_string())?;
        ensure(rel(via_cells.mu_lower, pb.value.powf(-p)) <= 1e-12, format!("draw {draw}: cell-complex route moved"))?;

        let (a, b) = (1.0 + 2.0 * rng.random::<f64>(), 0.5 + 1.5 * rng.random::<f64>());
        let map = QCMapData::linear(&[vec![a, 0.0], vec![0.0, b]], 1.0, None).map_err(|e| e.to_string())?;
        let q_p = 1.2 + 1.8 * rng.random::<f64>();
        // Keep n r / (n + r) below p so the q-range is non-empty.
        let r_max = if q_p < 2.0 { 2.0 * q_p / (2.0 - q_p) } else { f64::INFINITY };
        let r = q_p + (3.0f64).min(0.8 * (r_max - q_p)) * (0.1 + 0.9 * rng.random::<f64>());
        let base = SobolevPoincareBase::ConvexPotential { n: 2, r, diameter: 2f64.sqrt(), volume: 1.0 };
        let (lo, exclusive) = base.q_lower();
        let lo = if exclusive && lo >= 1.0 { lo * (1.0 + 1e-9) } else { lo.max(1.0) };
        let grid = q_grid(lo, q_p - Q_GRID_TOP_GAP).map_err(|e| e.to_string())?;
        let best = eigen_transfer(&map, &base, q_p).map_err(|e| e.to_string())?;
        let constant = poincare_transfer(&map, &base, q_p).map_err(|e| e.to_string())?;
        let rest = constant.bound / (q_pq_norm(&map, q_p, constant.q_star.unwrap()).unwrap()
            * base.constant(constant.q_star.unwrap()).unwrap());
        for &q in &grid {
            let at = eigen_transfer_at_q(&map, &base, q_p, q).map_err(|e| e.to_string())?;
            ensure(best.mu_lower >= at.mu_lower, format!("draw {draw}: eigen min over q beaten at q = {q}"))?;
            let value = rest * q_pq_norm(&map, q_p, q).unwrap() * base.constant(q).unwrap();
            ensure(constant.bound <= value * (1.0 + 1e-12), format!("draw {draw}: constant min over q beaten at q = {q}"))?;
        }
    }
    Ok(format!("{DRAWS} draws"))
}

/// Two runs of the CLI suite produce byte-identical JSON.
fn ac9() -> Outcome {
    let suite = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/suite.json");
    let run = || {
        let out = Command::new(env!("CARGO_BIN_EXE_qcbound"))
            .args(["report", "--config", suite.to_str().unwrap(), "--seed", "7"])
            .output()
            .map_err(|e| e.to_string())?;
        ensure(out.status.code() == Some(0), format!("exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)))?;
        Ok::<_, String>(out.stdout)
    };
    let (first, second) = (run()?, run()?);
    ensure(!first.is_empty(), "empty report")?;
    ensure(first == second, "reports differ")?;
    Ok(format!("{} bytes identical", first.len()))
}

fn main() {
    let criteria: [(&str, Check); 9] =
        [("AC1", ac1), ("AC2", ac2), ("AC3", ac3), ("AC4", ac4), ("AC5", ac5), ("AC6", ac6), ("AC7", ac7), ("AC8", ac8), ("AC9", ac9)];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("[PASS] {name} {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {name} {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", 9 - failed, 9);
    if failed > 0 {
        std::process::exit(1);
    }
}
