use super::{Mode, Scenario};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_basis, real_embed, ComplexMatrix, HermitianOperator, C64};
use crate::sdp::{preprocess, BlockTerm, Constraint, PreprocessReport, SdpProblem, SparseSym};

/// Upper limit on raw rows before rank reduction.
const MAX_RAW_ROWS: usize = 20_000;

/// Block holding `M[x,e|a]`.
pub fn block_index(n_o: usize, a: usize, x: usize, e: usize) -> usize {
    a * n_o * n_o + x * n_o + e
}

/// Raw row count `n_s d^2 + n_s n_o (d^2 - 1) + (n_s - 1) n_o d^2 + n_s n_o`.
pub fn raw_row_count(d: usize, n_s: usize, n_o: usize) -> usize {
    let d2 = d * d;
    n_s * d2 + n_s * n_o * (d2 - 1) + (n_s - 1) * n_o * d2 + n_s * n_o
}

/// `embed(h) / 2`, so that `<embed(h) / 2, embed(M)> = Re tr(h M)`.
fn embed_half(h: &HermitianOperator) -> SparseSym {
    SparseSym::from_dense(&real_embed(h).scale(0.5)).expect("embedding is symmetric")
}

fn unit(d: usize, r: usize, c: usize, v: C64) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    m.set(r, c, v);
    m
}

/// Functionals whose vanishing on `S` means `S` is proportional to the
/// identity: real and imaginary parts of every `S_jk`, `j < k`, then
/// `S_jj - S_00` for `j >= 1`.
fn proportionality_functionals(d: usize) -> Vec<(String, HermitianOperator)> {
    let half = C64::new(0.5, 0.0);
    let ihalf = C64::new(0.0, 0.5);
    let mut out = Vec::with_capacity(d * d - 1);
    for j in 0..d {
        for k in (j + 1)..d {
            // Re S_jk = tr(S (E_jk + E_kj) / 2), Im S_jk = tr(S i (E_jk - E_kj) / 2)
            let re = &unit(d, j, k, half) + &unit(d, k, j, half);
            let im = &unit(d, j, k, ihalf) - &unit(d, k, j, ihalf);
            out.push((format!("re{j}{k}"), HermitianOperator::new(re).expect("Hermitian")));
            out.push((format!("im{j}{k}"), HermitianOperator::new(im).expect("Hermitian")));
        }
    }
    for j in 1..d {
        let mut diag = vec![0.0; d];
        diag[j] = 1.0;
        diag[0] = -1.0;
        out.push((format!("d{j}"), HermitianOperator::diag(&diag)));
    }
    out
}

/// The effective-measurement SDP before rank reduction.
///
/// One real block of size `2d` per `(a, x, e)` (see [`block_index`]); with
/// `relax > 0` two `1x1` slack blocks per statistics row are appended. Rows are
/// grouped by input: for each `a`, nonsignalling against `a - 1`, then
/// normalization, proportionality and statistics.
pub fn build_raw_sdp(s: &Scenario, relax: f64) -> Result<SdpProblem> {
    s.validate()?;
    if !(relax >= 0.0) || !relax.is_finite() {
        return Err(Error::InvalidParameter(format!("relaxation {relax}")));
    }
    let (d, n_s, n_o) = (s.dim(), s.n_inputs(), s.n_outcomes());
    let raw = raw_row_count(d, n_s, n_o) + if relax > 0.0 { n_s * n_o } else { 0 };
    if raw > MAX_RAW_ROWS {
        return Err(Error::SizeCap(format!("{raw} raw constraints exceed {MAX_RAW_ROWS}")));
    }
    let n_blocks = n_s * n_o * n_o;
    let mut blocks = vec![2 * d; n_blocks];
    if relax > 0.0 {
        blocks.extend(std::iter::repeat_n(1, 2 * n_s * n_o));
    }

    let basis: Vec<SparseSym> = hermitian_basis(d).iter().map(embed_half).collect();
    let basis_trace: Vec<f64> = hermitian_basis(d).iter().map(HermitianOperator::trace).collect();
    let prop: Vec<(String, SparseSym)> = proportionality_functionals(d)
        .into_iter()
        .map(|(l, h)| (l, embed_half(&h)))
        .collect();
    let p = s.observed.input_probs();

    let objective = (0..n_s)
        .flat_map(|a| (0..n_o).map(move |x| (a, x)))
        .filter_map(|(a, x)| {
            let w = match s.mode {
                Mode::FiniteQ => p[a],
                Mode::AsymptoticAsymmetric if a == s.generation_index => 1.0,
                Mode::AsymptoticAsymmetric => 0.0,
            };
            (w != 0.0).then(|| BlockTerm {
                block: block_index(n_o, a, x, x),
                matrix: embed_half(&s.ensemble.states()[a].op().scale(w)),
            })
        })
        .collect();

    let term = |block: usize, m: &SparseSym, sign: f64| {
        let mut m = m.clone();
        m.scale(sign);
        BlockTerm { block, matrix: m }
    };
    let mut rows = Vec::with_capacity(raw);
    for a in 0..n_s {
        if a > 0 {
            for x in 0..n_o {
                for (k, g) in basis.iter().enumerate() {
                    let terms = (0..n_o)
                        .flat_map(|e| {
                            [
                                term(block_index(n_o, a, x, e), g, 1.0),
                                term(block_index(n_o, a - 1, x, e), g, -1.0),
                            ]
                        })
                        .collect();
                    rows.push(Constraint::new(terms, 0.0, format!("nosignal[a={a},x={x},k={k}]")));
                }
            }
        }
        for (k, g) in basis.iter().enumerate() {
            let terms = (0..n_o * n_o).map(|xe| term(a * n_o * n_o + xe, g, 1.0)).collect();
            rows.push(Constraint::new(terms, basis_trace[k], format!("norm[a={a},k={k}]")));
        }
        for e in 0..n_o {
            for (label, f) in &prop {
                let terms = (0..n_o).map(|x| term(block_index(n_o, a, x, e), f, 1.0)).collect();
                rows.push(Constraint::new(terms, 0.0, format!("prop[a={a},e={e},{label}]")));
            }
        }
        let (weight, rho) = match s.mode {
            Mode::FiniteQ => (p[a], s.ensemble.states()[a].op().scale(p[a])),
            Mode::AsymptoticAsymmetric => (1.0, s.ensemble.states()[a].op().clone()),
        };
        let rho = embed_half(&rho);
        for x in 0..n_o {
            let terms: Vec<BlockTerm> = (0..n_o).map(|e| term(block_index(n_o, a, x, e), &rho, 1.0)).collect();
            let rhs = weight * s.observed.conditional(x, a);
            let label = format!("stat[a={a},x={x}]");
            if relax > 0.0 {
                let slack = n_blocks + 2 * (a * n_o + x);
                let one = SparseSym::from_entries(1, [(0, 0, 1.0)])?;
                let mut upper = terms.clone();
                upper.push(term(slack, &one, 1.0));
                let mut lower = terms;
                lower.push(term(slack + 1, &one, -1.0));
                rows.push(Constraint::new(upper, rhs + relax, format!("{label}+")));
                rows.push(Constraint::new(lower, rhs - relax, format!("{label}-")));
            } else {
                rows.push(Constraint::new(terms, rhs, label));
            }
        }
    }
    SdpProblem::new(blocks, objective, rows)
}

/// [`build_raw_sdp`] followed by rank reduction and scaling.
pub fn build_sdp(s: &Scenario, relax: f64) -> Result<(SdpProblem, PreprocessReport)> {
    preprocess(&build_raw_sdp(s, relax)?)
}
