//! Randomized invariant suites with a fixed seed: eigenvalue and trace
//! domain monotonicity, discrete Gauss–Bonnet, the Dirichlet-to-Neumann
//! operator's symmetry and kernel, and split-point invariance of the Mellin
//! regularization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::collar_heights::collar_mode_family;
use crate::error::Result;
use crate::geometry::meshgen::{annulus, pants, periodic_cylinder, PantsSpec};
use crate::geometry::{CollarCylinder, FlatCylinder, MetricSurface, Profile, WeightedInterval};
use crate::spectral_zeta::{
    flat_cylinder_sampled_trace, interval_trace, zeta_prime_at_zero, HeatTrace, HeightOptions, MellinOptions,
    Multiplicity,
};
use crate::sturm_liouville::{solve_mode, Coordinate, GridOptions, ModeProblem};
use crate::uniformization::DirichletNeumannOperator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Suite {
    EigenvalueMonotonicity,
    TraceMonotonicity,
    GaussBonnet,
    DirichletNeumann,
    SplitInvariance,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::EigenvalueMonotonicity,
        Suite::TraceMonotonicity,
        Suite::GaussBonnet,
        Suite::DirichletNeumann,
        Suite::SplitInvariance,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Suite::EigenvalueMonotonicity => "eigenvalue-monotonicity",
            Suite::TraceMonotonicity => "trace-monotonicity",
            Suite::GaussBonnet => "gauss-bonnet",
            Suite::DirichletNeumann => "dtn-operator",
            Suite::SplitInvariance => "split-invariance",
        }
    }

    /// A suite label, or `all`.
    pub fn parse_selection(s: &str) -> Option<Vec<Suite>> {
        if s.eq_ignore_ascii_case("all") {
            return Some(Self::ALL.to_vec());
        }
        Self::ALL.iter().find(|x| x.label() == s).map(|x| vec![*x])
    }

    pub fn run(&self, seed: u64, cases: usize) -> Result<SuiteReport> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (*self as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut report = SuiteReport::new(*self, seed, cases);
        for case in 0..cases {
            match self {
                Suite::EigenvalueMonotonicity => eigenvalue_case(&mut rng, case, &mut report)?,
                Suite::TraceMonotonicity => trace_case(&mut rng, case, &mut report)?,
                Suite::GaussBonnet => gauss_bonnet_case(&mut rng, case, &mut report)?,
                Suite::DirichletNeumann => dtn_case(&mut rng, case, &mut report)?,
                Suite::SplitInvariance => split_case(&mut rng, case, &mut report)?,
            }
        }
        Ok(report)
    }

    pub fn default_cases(&self) -> usize {
        match self {
            Suite::EigenvalueMonotonicity => 24,
            Suite::TraceMonotonicity => 8,
            Suite::GaussBonnet => 24,
            Suite::DirichletNeumann => 12,
            Suite::SplitInvariance => 8,
        }
    }
}

/// Outcome of one suite: every check compares an observed defect against
/// its allowance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub cases: usize,
    pub checks: usize,
    /// Largest `observed / allowed` over all checks.
    pub worst_ratio: f64,
    pub failures: Vec<String>,
}

impl SuiteReport {
    fn new(suite: Suite, seed: u64, cases: usize) -> Self {
        Self {
            suite: suite.label().into(),
            seed,
            cases,
            checks: 0,
            worst_ratio: 0.0,
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Records `observed ≤ allowed`.
    fn check(&mut self, observed: f64, allowed: f64, what: impl FnOnce() -> String) {
        self.checks += 1;
        let ratio = if allowed > 0.0 { observed / allowed } else { f64::INFINITY };
        if ratio.is_nan() || observed > allowed {
            self.failures.push(format!("{} ({observed:.3e} > {allowed:.3e})", what()));
        }
        if ratio.is_finite() {
            self.worst_ratio = self.worst_ratio.max(ratio);
        }
    }
}

pub fn run_suites(suites: &[Suite], seed: u64, cases: Option<usize>) -> Result<Vec<SuiteReport>> {
    suites
        .iter()
        .map(|s| s.run(seed, cases.unwrap_or_else(|| s.default_cases())))
        .collect()
}

/// `Σ a_k sin(ω_k x + p_k)` with analytic derivatives; amplitudes up to
/// `amplitude`, frequencies up to 3.
pub fn random_smooth_profile(rng: &mut impl Rng, terms: usize, amplitude: f64) -> Profile<f64> {
    let c: Vec<(f64, f64, f64)> = (0..terms)
        .map(|_| {
            (
                rng.random_range(-amplitude..amplitude),
                rng.random_range(0.2..3.0),
                rng.random_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    let (c1, c2) = (c.clone(), c.clone());
    Profile::with_derivatives(
        move |x: f64| c.iter().map(|(a, w, p)| a * (w * x + p).sin()).sum(),
        move |x: f64| c1.iter().map(|(a, w, p)| a * w * (w * x + p).cos()).sum(),
        move |x: f64| c2.iter().map(|(a, w, p)| -a * w * w * (w * x + p).sin()).sum(),
    )
}

/// A random `[A′, B′] ⊂ [A, B]` with `B′ − A′ ≥ frac (B − A)`.
fn nested(rng: &mut impl Rng, a: f64, b: f64, frac: f64) -> (f64, f64) {
    let w = b - a;
    let inner = rng.random_range(frac..0.95) * w;
    let a1 = a + rng.random_range(0.0..(w - inner));
    (a1, a1 + inner)
}

fn random_collar(rng: &mut impl Rng) -> (f64, f64, f64) {
    let l: f64 = rng.random_range(0.3..1.2);
    let a: f64 = rng.random_range(0.3..1.2);
    let b = rng.random_range((a + 0.6).max(1.8)..2.85);
    (l, a, b)
}

fn eigenvalue_case(rng: &mut ChaCha8Rng, case: usize, report: &mut SuiteReport) -> Result<()> {
    let (l, a, b) = random_collar(rng);
    let (a1, b1) = nested(rng, a, b, 0.4);
    let m = rng.random_range(0..4usize);
    let opts = GridOptions::default();
    let n = 6;
    let outer = solve_mode(&ModeProblem::collar(l, a, b, m)?, n, &opts)?;
    let inner = solve_mode(&ModeProblem::collar(l, a1, b1, m)?, n, &opts)?;
    for k in 0..n {
        let slack = outer.eigenvalues[k] - inner.eigenvalues[k];
        let allowed = outer.errors[k] + inner.errors[k] + 1e-12 * outer.eigenvalues[k];
        report.check(slack.max(0.0), allowed, || {
            format!("case {case}: λ_{k} of Δ_{l:.3}({m}) on [{a1:.3},{b1:.3}] ⊂ [{a:.3},{b:.3}] decreased")
        });
    }
    Ok(())
}

fn trace_case(rng: &mut ChaCha8Rng, case: usize, report: &mut SuiteReport) -> Result<()> {
    let (l, a, b) = random_collar(rng);
    let (a1, b1) = nested(rng, a, b, 0.5);
    let mut opts = HeightOptions::default();
    opts.mellin.t_min = 2e-3;
    let outer = collar_mode_family(&CollarCylinder::new(l, a, b)?, Coordinate::Liouville, &opts)?;
    let inner = collar_mode_family(&CollarCylinder::new(l, a1, b1)?, Coordinate::Liouville, &opts)?;
    for i in 0..=12 {
        let t = 4e-3 * 10f64.powf(i as f64 / 4.0);
        let (o, n) = (outer.trace(t, Multiplicity::Cylinder), inner.trace(t, Multiplicity::Cylinder));
        let excess = n.value - o.value;
        report.check(excess.max(0.0), o.error() + n.error() + 1e-14, || {
            format!("case {case}: θ(t = {t:.3e}) of nested collar exceeds the outer one")
        });
    }
    Ok(())
}

fn random_mesh(rng: &mut ChaCha8Rng) -> Result<MetricSurface<f64>> {
    match rng.random_range(0..3) {
        0 => {
            let mut spec = PantsSpec::with_vertex_target(rng.random_range(200..700));
            spec.hole_radius = rng.random_range(0.1..0.25);
            spec.hole_offset = rng.random_range(0.4..0.55);
            pants(spec)
        }
        1 => annulus(rng.random_range(0.1..0.7), rng.random_range(12..48), rng.random_range(3..12)),
        _ => {
            let a = rng.random_range(0.3..1.2);
            let b = rng.random_range(1.8..2.8);
            periodic_cylinder(
                rng.random_range(0.3..1.5),
                a,
                b,
                &Profile::neg_log_sin(),
                rng.random_range(6..24),
                rng.random_range(4..24),
            )
        }
    }
}

/// Random mesh with edge lengths perturbed by up to 1% and a random smooth
/// log scale.
fn perturbed_mesh(rng: &mut ChaCha8Rng) -> Result<MetricSurface<f64>> {
    let s = random_mesh(rng)?;
    let lengths: Vec<f64> = s
        .edge_lengths()
        .iter()
        .map(|l| l * (1.0 + rng.random_range(-0.01..0.01)))
        .collect();
    let s = s.with_lengths(&lengths)?;
    let fx = random_smooth_profile(rng, 3, 0.5);
    let fy = random_smooth_profile(rng, 3, 0.5);
    let psi: Vec<f64> = s
        .vertices()
        .iter()
        .map(|x| fx.value(x[0]) + fy.value(x[1] + x[2]))
        .collect();
    s.conformal(&psi)
}

fn gauss_bonnet_case(rng: &mut ChaCha8Rng, case: usize, report: &mut SuiteReport) -> Result<()> {
    let s = perturbed_mesh(rng)?;
    let defect = s.gauss_bonnet_defect().abs();
    report.check(defect, 1e-10, || {
        format!("case {case}: Gauss–Bonnet defect on {} vertices", s.vertex_count())
    });
    Ok(())
}

fn dtn_case(rng: &mut ChaCha8Rng, case: usize, report: &mut SuiteReport) -> Result<()> {
    let s = perturbed_mesh(rng)?;
    let t = DirichletNeumannOperator::new(&s)?;
    let scale = t.matrix.amax().max(1.0);
    report.check(t.asymmetry(), 1e-12 * scale, || format!("case {case}: T − Tᵀ"));
    report.check(t.constant_defect(), 1e-12 * scale, || format!("case {case}: T·1"));
    let sym = (&t.matrix + t.matrix.transpose()) * 0.5;
    let eig = sym.symmetric_eigenvalues();
    let mut sorted: Vec<f64> = eig.iter().copied().collect();
    sorted.sort_by(|a, b| a.total_cmp(b));
    // connected surface: the constants are the whole kernel
    let zeros = 1;
    report.check((-sorted[0]).max(0.0), 1e-11 * scale, || format!("case {case}: T not nonnegative"));
    report.check(
        if sorted[zeros] > 1e-9 * scale { 0.0 } else { 1.0 },
        0.5,
        || format!("case {case}: T has a kernel beyond the constants"),
    );
    Ok(())
}

/// Admissible split nodes of a trace grid in `[lo, hi]`.
fn split_nodes(trace: &HeatTrace<f64>, lo: f64, hi: f64) -> Vec<f64> {
    let n = trace.samples.len();
    trace
        .samples
        .iter()
        .enumerate()
        .filter(|(i, x)| i % 8 == 0 && (n - 1 - i) % 8 == 0 && *i > 0 && i + 1 < n && x.t >= lo && x.t <= hi)
        .map(|(_, x)| x.t)
        .collect()
}

fn split_case(rng: &mut ChaCha8Rng, case: usize, report: &mut SuiteReport) -> Result<()> {
    let mellin = MellinOptions::default();
    let trace = if case % 2 == 0 {
        let c = FlatCylinder::new(rng.random_range(0.3..1.5), 0.0, rng.random_range(0.4..2.0))?;
        flat_cylinder_sampled_trace(&c, &mellin)?
    } else {
        let a = rng.random_range(0.0..1.0);
        let b = a + rng.random_range(0.4..2.0);
        let interval = WeightedInterval::new(a, b, random_smooth_profile(rng, 2, 0.4))?;
        interval_trace(&interval, &HeightOptions::default())?
    };
    let nodes = split_nodes(&trace, 0.2, 2.0);
    let picks: Vec<f64> = (0..4).map(|_| nodes[rng.random_range(0..nodes.len())]).collect();
    let base = zeta_prime_at_zero(&trace, mellin.split, &mellin)?.value;
    for t in picks {
        let h = zeta_prime_at_zero(&trace, t, &mellin)?.value;
        report.check((h - base).abs(), 1e-8, || {
            format!("case {case}: ζ′(0) with split {t:.4} vs {}", mellin.split)
        });
    }
    Ok(())
}
