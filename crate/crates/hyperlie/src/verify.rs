//! Seed-reproducible verification suites over randomly sampled points.
//!
//! Each suite runs a set of named residual checks against the tolerance
//! ladder: 1e-12 for exact algebra, 1e-9 for closed-form identities
//! through linear solves, 1e-8 for identities involving the tensor
//! derivative, 1e-6 for finite-difference and integration comparisons.
//! Tolerances can be overridden per check name.

use std::collections::BTreeMap;

use crate::algebra::{bracket, inner, ComplexAlgVec};
use crate::flow::{self, FlowConfig};
use crate::leaf;
use crate::orbit::{self, Projection};
use crate::poisson::{self, FrameIndex, LinearFn, MPoint, Slot};
use crate::sample::{self, Region};

/// Configuration shared by all suites.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    pub samples: usize,
    pub region: Region,
    pub phi_floor: f64,
    pub tol_overrides: BTreeMap<String, f64>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 42,
            samples: 200,
            region: Region::Both,
            phi_floor: 0.1,
            tol_overrides: BTreeMap::new(),
        }
    }
}

/// Result of one named residual check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub tolerance: f64,
    pub max_residual: f64,
    pub pass: bool,
    /// Coordinates of the worst point seen, for failure forensics.
    pub worst_point: Option<MPoint>,
}

/// Report of one suite run.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub samples: usize,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Accumulates the running max residual per named check.
struct Checker<'a> {
    cfg: &'a SuiteConfig,
    acc: Vec<(String, f64, f64, Option<MPoint>)>, // name, tol, max, worst
}

impl<'a> Checker<'a> {
    fn new(cfg: &'a SuiteConfig) -> Self {
        Checker {
            cfg,
            acc: Vec::new(),
        }
    }

    fn tol(&self, name: &str, default: f64) -> f64 {
        self.cfg.tol_overrides.get(name).copied().unwrap_or(default)
    }

    fn record(&mut self, name: &str, default_tol: f64, residual: f64, p: Option<&MPoint>) {
        let tol = self.tol(name, default_tol);
        if let Some(slot) = self.acc.iter_mut().find(|(n, ..)| n == name) {
            if residual > slot.2 {
                slot.2 = residual;
                slot.3 = p.copied();
            }
        } else {
            self.acc.push((name.to_string(), tol, residual, p.copied()));
        }
    }

    fn finish(self, suite: &str) -> SuiteReport {
        let checks = self
            .acc
            .into_iter()
            .map(|(name, tolerance, max_residual, worst_point)| CheckResult {
                pass: max_residual <= tolerance && max_residual.is_finite(),
                name,
                tolerance,
                max_residual,
                worst_point,
            })
            .collect();
        SuiteReport {
            suite: suite.to_string(),
            seed: self.cfg.seed,
            samples: self.cfg.samples,
            checks,
        }
    }
}

fn random_linear(rng: &mut rand_chacha::ChaCha8Rng) -> LinearFn {
    use rand::RngExt;
    LinearFn::new(
        Slot::from_index(rng.random_range(0..3usize)),
        sample::sample_vec(rng, 2.0),
    )
}

/// Jacobi identity for the three frame tensors and for random unit
/// combinations, plus the mixed compatibility of tensor pairs.
pub fn suite_jacobi(cfg: &SuiteConfig) -> SuiteReport {
    use rand::RngExt;
    let mut rng = sample::rng_for(cfg.seed, "jacobi");
    let mut ck = Checker::new(cfg);
    for _ in 0..cfg.samples {
        let p = sample::sample_m_o(&mut rng, cfg.phi_floor, cfg.region);
        let f = random_linear(&mut rng);
        let g = random_linear(&mut rng);
        let h = random_linear(&mut rng);
        for coeffs in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] {
            let j = poisson::jacobiator(&f, &g, &h, &p, coeffs).unwrap().abs();
            ck.record("jacobi_single_frame", 1e-8, j, Some(&p));
        }
        for _ in 0..20 {
            let k = sample::sample_unit_vec(&mut rng);
            let j = poisson::jacobiator(&f, &g, &h, &p, k.0).unwrap().abs();
            ck.record("jacobi_unit_combination", 1e-8, j, Some(&p));
        }
        let pairs = [
            (FrameIndex::One, FrameIndex::Two),
            (FrameIndex::Two, FrameIndex::Three),
            (FrameIndex::One, FrameIndex::Three),
        ];
        let (i, j) = pairs[rng.random_range(0..3usize)];
        let m = poisson::mixed_jacobiator(&f, &g, &h, &p, i, j)
            .unwrap()
            .abs();
        ck.record("jacobi_mixed_compatibility", 1e-8, m, Some(&p));
    }
    ck.finish("jacobi")
}

/// The two derivative conditions on the tensor and both forms of
/// equivariance.
pub fn suite_conditions(cfg: &SuiteConfig) -> SuiteReport {
    let mut rng = sample::rng_for(cfg.seed, "conditions");
    let mut ck = Checker::new(cfg);
    for _ in 0..cfg.samples {
        let p = sample::sample_m_o(&mut rng, cfg.phi_floor, cfg.region);
        let xi = sample::sample_vec(&mut rng, 2.0);
        let eta = sample::sample_vec(&mut rng, 2.0);
        let zeta = sample::sample_vec(&mut rng, 2.0);
        let (ra, rb) = poisson::condition_residuals(&p, xi, eta).unwrap();
        ck.record("condition_first", 1e-8, ra, Some(&p));
        ck.record("condition_second", 1e-8, rb, Some(&p));
        let eq = poisson::equivariance_residual(&p, xi, eta, zeta).unwrap();
        ck.record("equivariance_infinitesimal", 1e-8, eq, Some(&p));
        let rot = poisson::rotation_equivariance_residual(&p, xi).unwrap();
        ck.record("equivariance_rotation", 1e-9, rot, Some(&p));
    }
    ck.finish("conditions")
}

/// Frame covariance of the bracket triple, including the closed-form
/// first-slot value.
pub fn suite_frames(cfg: &SuiteConfig) -> SuiteReport {
    let mut rng = sample::rng_for(cfg.seed, "frames");
    let mut ck = Checker::new(cfg);
    for _ in 0..cfg.samples {
        let p = sample::sample_m_o(&mut rng, cfg.phi_floor, cfg.region);
        let o = sample::sample_rotation(&mut rng);
        let f = random_linear(&mut rng);
        let g = random_linear(&mut rng);
        let res = poisson::frame_covariance_residual(&p, &o, &f, &g).unwrap();
        ck.record("frame_covariance", 1e-9, res, Some(&p));

        // closed-form value for a pair of first-slot functions
        let xi = sample::sample_vec(&mut rng, 2.0);
        let eta = sample::sample_vec(&mut rng, 2.0);
        let p2 = p.mix_slots(&o);
        let at2 = poisson::a_for_point(&p2).unwrap();
        let mut ft = poisson::LinComb::default();
        let mut gt = poisson::LinComb::default();
        for j in 0..3 {
            ft.push(o.entry(0, j), LinearFn::new(Slot::from_index(j), xi));
            gt.push(o.entry(0, j), LinearFn::new(Slot::from_index(j), eta));
        }
        let lhs = poisson::linear_comb_bracket(&ft, &gt, FrameIndex::One).eval_with(&p2, &at2);
        let want = inner(bracket(xi, eta), p.a * (2.0 * o.entry(0, 0)) - p2.a);
        ck.record("frame_first_slot_value", 1e-9, (lhs - want).abs(), Some(&p));
    }
    ck.finish("frames")
}

/// Solvability of the tangency system, its closed-form solutions, and the
/// covariance of solutions under frames.
pub fn suite_system13(cfg: &SuiteConfig) -> SuiteReport {
    let mut rng = sample::rng_for(cfg.seed, "system13");
    let mut ck = Checker::new(cfg);
    for _ in 0..cfg.samples {
        let p = sample::sample_m_o(&mut rng, cfg.phi_floor, cfg.region);
        for _ in 0..3 {
            let xi = sample::sample_vec(&mut rng, 2.0);
            match poisson::solve_system13(&p, xi) {
                Ok(sol) => ck.record("system13_solve", 1e-9, sol.residual, Some(&p)),
                Err(_) => ck.record("system13_solve", 1e-9, f64::INFINITY, Some(&p)),
            }
        }
        // closed forms for directions a, b, c
        use crate::algebra::AlgVec;
        use crate::poisson::CotangentVec;
        let cands = [
            (p.a, CotangentVec::new(AlgVec::ZERO, AlgVec::ZERO, -p.b)),
            (p.b, CotangentVec::new(-p.c, AlgVec::ZERO, AlgVec::ZERO)),
            (p.c, CotangentVec::new(AlgVec::ZERO, -p.a, AlgVec::ZERO)),
        ];
        for (xi, cand) in cands {
            let r = poisson::system13_residual(&p, xi, &cand).unwrap();
            ck.record("system13_closed_forms", 1e-12, r, Some(&p));
        }
        // frame covariance of solutions
        let xi = sample::sample_vec(&mut rng, 2.0);
        let o = sample::sample_rotation(&mut rng);
        if let Ok(sol) = poisson::solve_system13(&p, xi) {
            let r = poisson::system13_residual(&p.mix_slots(&o), xi, &sol.cotangent.mix_slots(&o))
                .unwrap();
            ck.record("system13_frame_covariance", 1e-9, r, Some(&p));
        }
    }
    ck.finish("system13")
}

fn leaf_checks(ck: &mut Checker, p: &MPoint, rng: &mut rand_chacha::ChaCha8Rng) {
    let chart = match leaf::leaf_chart(p) {
        Ok(c) => c,
        Err(_) => {
            ck.record("leaf_chart_rank", 0.5, 1.0, Some(p));
            return;
        }
    };
    ck.record("leaf_chart_rank", 0.5, 0.0, Some(p));
    let forms = match leaf::restricted_forms(&chart) {
        Ok(f) => f,
        Err(_) => {
            ck.record("leaf_forms_nondegenerate", 0.5, 1.0, Some(p));
            return;
        }
    };
    ck.record("leaf_forms_nondegenerate", 0.5, 0.0, Some(p));
    for i in 0..3 {
        ck.record(
            "leaf_form_antisymmetry",
            1e-12,
            forms.w[i].antisymmetry_deviation(),
            Some(p),
        );
    }
    let rep = leaf::compatibility_residuals(&chart, &forms).unwrap();
    ck.record("leaf_square_identity", 1e-8, rep.square_identity, Some(p));
    ck.record("leaf_quaternion", 1e-8, rep.quaternion, Some(p));
    ck.record("leaf_contraction", 1e-8, rep.contraction, Some(p));
    for _ in 0..50 {
        let f = random_linear(rng);
        let g = random_linear(rng);
        let (same, cross) = leaf::bracket_reproduction_residuals(&chart, &forms, &f, &g).unwrap();
        ck.record("leaf_same_frame_brackets", 1e-8, same, Some(p));
        ck.record("leaf_cross_frame_brackets", 1e-8, cross, Some(p));
    }
}

/// Leaf charts, symplectic triple, and the pointwise compatibility
/// identities on both sides of the invariant.
pub fn suite_leaf(cfg: &SuiteConfig) -> SuiteReport {
    let mut rng = sample::rng_for(cfg.seed, "leaf");
    let mut ck = Checker::new(cfg);
    let half = cfg.samples.div_ceil(2);
    let regions: Vec<Region> = match cfg.region {
        Region::Both => vec![Region::Plus, Region::Minus],
        r => vec![r],
    };
    for region in regions {
        for _ in 0..half {
            let p = sample::sample_m_o(&mut rng, cfg.phi_floor, region);
            leaf_checks(&mut ck, &p, &mut rng);
        }
    }
    ck.finish("leaf")
}

/// Metric identities: evaluation on the gradient field and on rotation
/// generators, definiteness against the sign of the invariant, frame
/// independence, and agreement of the equivalent defining products.
pub fn suite_metric(cfg: &SuiteConfig) -> SuiteReport {
    let mut rng = sample::rng_for(cfg.seed, "metric");
    let mut ck = Checker::new(cfg);
    for _ in 0..cfg.samples {
        let p = sample::sample_m_o(&mut rng, cfg.phi_floor, cfg.region);
        let chart = match leaf::leaf_chart(&p) {
            Ok(c) => c,
            Err(_) => {
                ck.record("metric_chart", 0.5, 1.0, Some(&p));
                continue;
            }
        };
        let forms = leaf::restricted_forms(&chart).unwrap();
        let metric = leaf::leaf_metric(&chart, &forms).unwrap();
        let x = poisson::grad_phi(&p);
        let gxx = metric.value(&chart, &x, &x);
        ck.record(
            "metric_gradient_value",
            1e-8,
            (gxx + poisson::phi(&p)).abs(),
            Some(&p),
        );
        let xi = sample::sample_vec(&mut rng, 2.0);
        let gen = poisson::adjoint_generator(&p, xi);
        let ggen = metric.value(&chart, &gen, &gen);
        let at = poisson::a_for_point(&p).unwrap();
        ck.record(
            "metric_generator_value",
            1e-8,
            (ggen + at.quad(xi, xi)).abs(),
            Some(&p),
        );
        let sign_ok = metric
            .eigenvalues()
            .iter()
            .all(|ev| ev * poisson::phi(&p) < 0.0);
        ck.record(
            "metric_definiteness",
            0.5,
            if sign_ok { 0.0 } else { 1.0 },
            Some(&p),
        );
        ck.record(
            "metric_product_agreement",
            1e-9,
            metric.product_agreement,
            Some(&p),
        );
        ck.record("metric_symmetry", 1e-10, metric.asymmetry, Some(&p));
        let o = sample::sample_rotation(&mut rng);
        let res = leaf::metric_frame_residual(&p, &o).unwrap();
        ck.record("metric_frame_independence", 1e-8, res, Some(&p));
        // cross terms g(generator, gradient) are reported, not asserted
        let cross = metric.value(&chart, &gen, &x).abs();
        ck.record(
            "metric_cross_term_magnitude",
            f64::INFINITY,
            cross,
            Some(&p),
        );
    }
    ck.finish("metric")
}

/// Casimirs: analytic annihilation by the flow field and the rotation
/// generators, and drift along integrated backward flows.
pub fn suite_casimir(cfg: &SuiteConfig) -> SuiteReport {
    use rand::RngExt;
    let mut rng = sample::rng_for(cfg.seed, "casimir");
    let mut ck = Checker::new(cfg);
    for _ in 0..cfg.samples {
        let p = sample::sample_point(&mut rng, 2.0);
        for d in poisson::casimir_derivatives(&p, &poisson::grad_phi(&p)) {
            ck.record("casimir_flow_derivative", 1e-10, d.abs(), Some(&p));
        }
        let xi = sample::sample_vec(&mut rng, 2.0);
        for d in poisson::casimir_derivatives(&p, &poisson::adjoint_generator(&p, xi)) {
            ck.record("casimir_generator_derivative", 1e-10, d.abs(), Some(&p));
        }
    }
    // Drift along integrated flows from stratum points, which stay
    // bounded backward for arbitrarily long windows.
    for _ in 0..4 {
        let r = rng.random_range(0.3..1.5);
        let lam = rng.random_range(0.3..1.5);
        let p0 = sample::sample_stratum(&mut rng, r, lam);
        let traj = flow::integrate(&p0, &FlowConfig::new(0.0, -20.0)).unwrap();
        ck.record("casimir_flow_drift", 1e-6, traj.casimir_drift(), Some(&p0));
    }
    ck.finish("casimir")
}

/// Poisson-map property of the two projections, projection rank on the
/// strata, orbit-invariant values, and the orbit-form comparison.
pub fn suite_projection(cfg: &SuiteConfig) -> SuiteReport {
    use rand::RngExt;
    let mut rng = sample::rng_for(cfg.seed, "projection");
    let mut ck = Checker::new(cfg);
    for _ in 0..cfg.samples {
        let p = sample::sample_m_o(&mut rng, cfg.phi_floor, cfg.region);
        let x = ComplexAlgVec::new(
            sample::sample_vec(&mut rng, 2.0),
            sample::sample_vec(&mut rng, 2.0),
        );
        let y = ComplexAlgVec::new(
            sample::sample_vec(&mut rng, 2.0),
            sample::sample_vec(&mut rng, 2.0),
        );
        for proj in [Projection::Pr12, Projection::Pr13] {
            let r = orbit::poisson_map_residual(&p, x, y, proj).unwrap();
            ck.record("projection_poisson_map", 1e-10, r, Some(&p));
        }
    }
    // rank and casimir values on the strata
    let n_stratum = cfg.samples.clamp(1, 50);
    let mut last_sign: Option<f64> = None;
    for _ in 0..n_stratum {
        let lam = rng.random_range(0.2..1.5);
        let p = sample::sample_stratum(&mut rng, 1.0, lam);
        let rank = orbit::projection_rank(&p).unwrap();
        ck.record(
            "projection_rank_orbit",
            0.5,
            if rank == 4 { 0.0 } else { 1.0 },
            Some(&p),
        );
        let cas = orbit::projected_casimir(&p);
        let dev = (cas.re - 1.0).abs().max(cas.im.abs());
        ck.record("projection_orbit_casimir", 1e-7, dev, Some(&p));

        let lam0 = rng.random_range(0.2..1.5);
        let p0 = sample::sample_stratum(&mut rng, 0.0, lam0);
        let rank = orbit::projection_rank(&p0).unwrap();
        ck.record(
            "projection_rank_zero_stratum",
            0.5,
            if rank == 4 { 0.0 } else { 1.0 },
            Some(&p0),
        );
        let cas = orbit::projected_casimir(&p0);
        ck.record("projection_nilpotent_casimir", 1e-9, cas.abs(), Some(&p0));
    }
    // orbit-form comparison on one leaf (fixed radius), sign consistency
    let kks_points = cfg.samples.clamp(2, 20);
    for _ in 0..kks_points {
        let lam = rng.random_range(0.2..1.2);
        let p = sample::sample_stratum(&mut rng, 1.0, lam);
        match orbit::kks_residual(&p) {
            Ok(rep) => {
                ck.record("projection_orbit_form", 1e-6, rep.residual, Some(&p));
                let consistent = match last_sign {
                    None => {
                        last_sign = Some(rep.sign);
                        true
                    }
                    Some(s) => s == rep.sign,
                };
                ck.record(
                    "projection_orbit_form_sign",
                    0.5,
                    if consistent { 0.0 } else { 1.0 },
                    Some(&p),
                );
            }
            Err(_) => ck.record("projection_orbit_form", 1e-6, f64::INFINITY, Some(&p)),
        }
    }
    ck.finish("projection")
}

pub const SUITES: [&str; 8] = [
    "jacobi",
    "conditions",
    "frames",
    "system13",
    "leaf",
    "metric",
    "casimir",
    "projection",
];

/// Run a suite by name; `all` runs everything and concatenates reports.
pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Option<Vec<SuiteReport>> {
    match name {
        "jacobi" => Some(vec![suite_jacobi(cfg)]),
        "conditions" => Some(vec![suite_conditions(cfg)]),
        "frames" => Some(vec![suite_frames(cfg)]),
        "system13" => Some(vec![suite_system13(cfg)]),
        "leaf" => Some(vec![suite_leaf(cfg)]),
        "metric" => Some(vec![suite_metric(cfg)]),
        "casimir" => Some(vec![suite_casimir(cfg)]),
        "projection" => Some(vec![suite_projection(cfg)]),
        "all" => Some(
            SUITES
                .iter()
                .flat_map(|s| run_suite(s, cfg).unwrap())
                .collect(),
        ),
        _ => None,
    }
}
