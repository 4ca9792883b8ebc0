//! Built-in checks of the samplers against the exact oracle.
//!
//! The implementations under test are injectable so a deliberately broken
//! variant can be checked to fail the suite that should catch it.

use std::io::{self, Write};

use treesample::colbourn::{self, ColbournSampler};
use treesample::fixtures;
use treesample::oracle::{exact_distribution, exact_marginals, root_child};
use treesample::stats::{binomial_two_sided, chi_square_gof, collect};
use treesample::{swor, Graph, Matrix, RandomSource, Tree, TreeKind, WilsonSampler};

pub type MarginalsFn = fn(&Graph, TreeKind) -> treesample::Result<Matrix>;
pub type DependencySamplerFn = fn(&Graph, &mut RandomSource) -> treesample::Result<Tree>;

pub const ALPHA: f64 = 0.001;
const BIAS_P: f64 = 1e-6;
const KINDS: [TreeKind; 2] = [TreeKind::Spanning, TreeKind::Dependency];

#[derive(Clone, Copy)]
pub struct Implementations {
    pub marginals: MarginalsFn,
    pub dependency_sampler: DependencySamplerFn,
}

impl Default for Implementations {
    fn default() -> Self {
        Implementations {
            marginals: colbourn::marginals,
            dependency_sampler: |g, rng| colbourn::colbourn(g, TreeKind::Dependency, rng),
        }
    }
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct SelftestReport {
    pub passed: Vec<String>,
    pub failed: Vec<String>,
}

type SuiteResult = Result<Vec<String>, String>;
type BoxedSampler<'a> = Box<dyn FnMut(&mut RandomSource) -> treesample::Result<Tree> + 'a>;
type Suite<'a> = (&'static str, Box<dyn Fn() -> SuiteResult + 'a>);

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn graphs(seed: u64) -> Vec<(String, Graph)> {
    let mut out: Vec<(String, Graph)> =
        fixtures::small().into_iter().map(|(n, g)| (n.to_string(), g)).collect();
    let mut rng = RandomSource::stream(seed, 1);
    for n in 2..=5 {
        for i in 0..4 {
            let density = if i % 2 == 0 { 1.0 } else { 0.6 };
            out.push((format!("random{n}.{i}"), fixtures::random_graph(n, density, &mut rng)));
        }
    }
    out
}

fn partition_agreement(seed: u64) -> SuiteResult {
    let mut worst: f64 = 0.0;
    for (name, g) in graphs(seed) {
        for kind in KINDS {
            let z = colbourn::partition(&g, kind).map_err(|e| format!("{name}: {e}"))?;
            let exact = exact_distribution(&g, kind).map_err(|e| format!("{name}: {e}"))?;
            worst = worst.max(rel_diff(z, exact.z));
        }
    }
    if worst > 1e-9 {
        return Err(format!("max relative Z error {worst:.3e}"));
    }
    Ok(vec![format!("max relative Z error {worst:.2e}")])
}

fn marginal_agreement(imp: &Implementations, seed: u64) -> SuiteResult {
    let mut worst: f64 = 0.0;
    for (name, g) in graphs(seed) {
        for kind in KINDS {
            let m = (imp.marginals)(&g, kind).map_err(|e| format!("{name}/{kind}: {e}"))?;
            let exact = exact_marginals(&g, kind).map_err(|e| format!("{name}: {e}"))?;
            if m.rows() != exact.rows() || m.cols() != exact.cols() {
                return Err(format!("{name}/{kind}: wrong matrix shape"));
            }
            let d = m.max_abs_diff(&exact);
            if d > 1e-9 {
                return Err(format!("{name}/{kind}: marginal error {d:.3e}"));
            }
            worst = worst.max(d);
        }
    }
    Ok(vec![format!("max marginal error {worst:.2e}")])
}

fn distributional(imp: &Implementations, seed: u64, samples: u64) -> SuiteResult {
    let random4 = fixtures::random_graph(4, 0.5, &mut RandomSource::stream(seed, 2));
    let cases = [("g2", fixtures::g2()), ("g3", fixtures::g3()), ("random4", random4)];
    let mut lines = Vec::new();
    let mut failures = Vec::new();
    for (stream, (name, g)) in cases.iter().enumerate() {
        let walk = WilsonSampler::new(g).map_err(|e| format!("{name}: {e}"))?;
        let col = ColbournSampler::new(g, TreeKind::Spanning).map_err(|e| format!("{name}: {e}"))?;
        let dep = imp.dependency_sampler;
        let mut checks: Vec<(String, TreeKind, BoxedSampler)> = vec![
            (format!("{name}/wilson"), TreeKind::Spanning, Box::new(|r| walk.spanning(r).map(|(t, _)| t))),
            (format!("{name}/colbourn-spanning"), TreeKind::Spanning, Box::new(|r| col.sample(r))),
            (format!("{name}/dependency"), TreeKind::Dependency, Box::new(move |r| dep(g, r))),
        ];
        for (i, (label, kind, sampler)) in checks.iter_mut().enumerate() {
            let exact = exact_distribution(g, *kind).map_err(|e| format!("{label}: {e}"))?;
            let mut rng = RandomSource::stream(seed, 10 + (stream * 3 + i) as u64);
            let emp = collect(sampler, samples, &mut rng).map_err(|e| format!("{label}: {e}"))?;
            match chi_square_gof(&emp, &exact, ALPHA) {
                Ok(report) => {
                    if report.reject {
                        failures.push(format!("{label}: {report}"));
                    }
                    lines.push(format!("{label}: {report}"));
                }
                Err(e) => failures.push(format!("{label}: {e}")),
            }
        }
    }
    if failures.is_empty() {
        Ok(lines)
    } else {
        Err(failures.join("; "))
    }
}

fn bias_detection(imp: &Implementations, seed: u64, samples: u64) -> SuiteResult {
    let g = fixtures::g3();
    let walk = WilsonSampler::new(&g).map_err(|e| e.to_string())?;
    let two_thirds = 2.0 / 3.0;
    let rate = |label: &str, stream: u64, sampler: &mut dyn FnMut(&mut RandomSource) -> treesample::Result<Tree>| {
        let emp = collect(sampler, samples, &mut RandomSource::stream(seed, stream))
            .map_err(|e| format!("{label}: {e}"))?;
        let hits: u64 = emp
            .counts
            .iter()
            .filter(|(k, _)| root_child(&k.to_tree()) == Some(1))
            .map(|(_, c)| *c)
            .sum();
        Ok::<_, String>((hits as f64 / emp.total as f64, binomial_two_sided(hits, emp.total, two_thirds)))
    };
    let (f_dep, p_dep) = rate("dependency", 40, &mut |r| (imp.dependency_sampler)(&g, r))?;
    let (f_rc, p_rc) = rate("wilson-rc", 41, &mut |r| walk.root_constrained(r).map(|(t, _)| t))?;
    let detail = vec![
        format!("dependency sampler p(root->1) = {f_dep:.4}, p-value vs 2/3 = {p_dep:.3e}"),
        format!("wilson-rc p(root->1) = {f_rc:.4}, p-value vs 2/3 = {p_rc:.3e} (expected biased)"),
    ];
    if p_dep < BIAS_P {
        return Err(format!("dependency sampler is biased: {}", detail[0]));
    }
    if p_rc >= BIAS_P {
        return Err(format!("bias of wilson-rc not detected: {}", detail[1]));
    }
    Ok(detail)
}

fn swor_suite(seed: u64) -> SuiteResult {
    let mut worst: f64 = 0.0;
    for (name, g) in fixtures::small() {
        for kind in KINDS {
            let exact = exact_distribution(&g, kind).map_err(|e| format!("{name}: {e}"))?;
            for run in 0..50 {
                let mut rng = RandomSource::stream(seed, 100 + run);
                let out = swor(&g, kind, exact.len() + 1, &mut rng).map_err(|e| format!("{name}: {e}"))?;
                let mut keys: Vec<_> = out.draws.iter().map(|d| d.tree.key()).collect();
                keys.sort();
                if !out.exhausted || !keys.iter().eq(exact.entries.keys()) {
                    return Err(format!("{name}/{kind}: drew {} of {} trees", keys.len(), exact.len()));
                }
                for d in &out.draws {
                    worst = worst.max(rel_diff(d.weight, g.tree_weight(&d.tree).map_err(|e| e.to_string())?));
                }
            }
        }
    }
    Ok(vec![format!("full support recovered on every fixture; weight error {worst:.1e}")])
}

/// Runs every suite, printing one line per suite plus its details.
pub fn run(
    imp: &Implementations,
    seed: u64,
    samples: u64,
    out: &mut dyn Write,
) -> io::Result<SelftestReport> {
    let suites: Vec<Suite> = vec![
        ("partition-agreement", Box::new(|| partition_agreement(seed))),
        ("marginal-agreement", Box::new(|| marginal_agreement(imp, seed))),
        ("distributional", Box::new(|| distributional(imp, seed, samples))),
        ("bias-detection", Box::new(|| bias_detection(imp, seed, samples))),
        ("swor", Box::new(|| swor_suite(seed))),
    ];
    let mut report = SelftestReport::default();
    for (name, suite) in suites {
        match suite() {
            Ok(lines) => {
                writeln!(out, "PASS {name}")?;
                for l in lines {
                    writeln!(out, "  {l}")?;
                }
                report.passed.push(name.to_string());
            }
            Err(msg) => {
                writeln!(out, "FAIL {name}: {msg}")?;
                report.failed.push(name.to_string());
            }
        }
    }
    out.flush()?;
    Ok(report)
}
