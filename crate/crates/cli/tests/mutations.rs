//! The selftest must name the suite that catches each deliberate defect.

use treesample::colbourn::{self, build_laplacian};
use treesample::wilson::wilson_rc;
use treesample::{Graph, Matrix, RandomSource, Tree, TreeKind, ROOT};
use treesample_cli::selftest::{run, Implementations};

#[allow(clippy::needless_range_loop)]
/// Dependency marginals with the `[j != 1]` and `[i != 1]` indicators inverted.
fn inverted_indicator_marginals(g: &Graph, kind: TreeKind) -> treesample::Result<Matrix> {
    if kind == TreeKind::Spanning {
        return colbourn::marginals(g, kind);
    }
    let state = build_laplacian(g, kind)?;
    let b = state.inverse_transpose();
    let n = g.n();
    let mut out = vec![vec![0.0; n + 1]; n + 1];
    for j in 1..=n {
        let c = j - 1;
        out[ROOT][j] = g.weight(ROOT, j) * b[(0, c)];
        for i in (1..=n).filter(|&i| i != j) {
            let own = if j == 1 { b[(c, c)] } else { 0.0 };
            let other = if i == 1 { b[(i - 1, c)] } else { 0.0 };
            out[i][j] = g.weight(i, j) * (own - other);
        }
    }
    Ok(Matrix::from_rows(&out))
}

fn rc_sampler(g: &Graph, rng: &mut RandomSource) -> treesample::Result<Tree> {
    wilson_rc(g, rng).map(|(t, _)| t)
}

#[test]
fn correct_build_passes() {
    let report = run(&Implementations::default(), 0, 20_000, &mut Vec::new()).unwrap();
    assert!(report.failed.is_empty(), "{:?}", report.failed);
}

#[test]
fn inverted_indicator_fails_marginal_agreement() {
    let imp = Implementations { marginals: inverted_indicator_marginals, ..Default::default() };
    let mut out = Vec::new();
    let report = run(&imp, 0, 20_000, &mut out).unwrap();
    assert!(report.failed.contains(&"marginal-agreement".to_string()), "{}", String::from_utf8_lossy(&out));
}

#[test]
fn root_constrained_walk_fails_bias_detection() {
    let imp = Implementations { dependency_sampler: rc_sampler, ..Default::default() };
    let report = run(&imp, 0, 20_000, &mut Vec::new()).unwrap();
    assert!(report.failed.contains(&"bias-detection".to_string()), "{:?}", report.failed);
}
