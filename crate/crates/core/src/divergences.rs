//! KL and JS divergences, earth mover's distance on histograms, and the 1-D
//! sample Wasserstein estimator.
//!
//! Values are computed in nats. `+∞` is an ordinary result (disjoint
//! supports), never an error. Conventions: `0 · log(0/q) = 0`, and
//! `p > 0, q = 0` gives `+∞`.

use std::f64::consts::LN_2;

use crate::distributions::{AnalyticDistribution, Grid, Histogram};
use crate::matrix::Matrix;
use crate::{Error, Result};

const NORMALIZATION_TOL: f64 = 1e-9;
const MASS_TOL: f64 = 1e-9;

/// Largest total mass [`em_bruteforce`] will enumerate.
pub const BRUTEFORCE_MAX_MASS: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogBase {
    Natural,
    Two,
}

/// A divergence in a stated log base. May be `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceValue {
    pub value: f64,
    pub log_base: LogBase,
}

impl DivergenceValue {
    pub fn nats(value: f64) -> Self {
        DivergenceValue {
            value,
            log_base: LogBase::Natural,
        }
    }

    pub fn in_base(self, base: LogBase) -> Self {
        let nats = match self.log_base {
            LogBase::Natural => self.value,
            LogBase::Two => self.value * LN_2,
        };
        let value = match base {
            LogBase::Natural => nats,
            LogBase::Two => nats / LN_2,
        };
        DivergenceValue { value, log_base: base }
    }

    pub fn as_nats(self) -> f64 {
        self.in_base(LogBase::Natural).value
    }

    pub fn as_bits(self) -> f64 {
        self.in_base(LogBase::Two).value
    }

    pub fn is_infinite(self) -> bool {
        self.value == f64::INFINITY
    }
}

fn check_probability_pair(p: &Histogram, q: &Histogram) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch(p.len(), q.len()));
    }
    for h in [p, q] {
        let total = h.total();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized(total));
        }
    }
    Ok(())
}

fn kl_terms(p: &[f64], q: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return f64::INFINITY;
        }
        acc += pi * (pi / qi).ln();
    }
    // Roundoff can leave -1e-17 when p == q.
    acc.max(0.0)
}

/// `Σ p_i log(p_i / q_i)` over normalized histograms.
pub fn kl_discrete(p: &Histogram, q: &Histogram) -> Result<DivergenceValue> {
    check_probability_pair(p, q)?;
    Ok(DivergenceValue::nats(kl_terms(p.masses(), q.masses())))
}

/// `½ KL(p‖m) + ½ KL(q‖m)` with `m = (p + q) / 2`. Always finite.
pub fn js_discrete(p: &Histogram, q: &Histogram) -> Result<DivergenceValue> {
    check_probability_pair(p, q)?;
    let m: Vec<f64> = p
        .masses()
        .iter()
        .zip(q.masses())
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    let js = 0.5 * (kl_terms(p.masses(), &m) + kl_terms(q.masses(), &m));
    Ok(DivergenceValue::nats(js.min(LN_2)))
}

fn require_1d(d: &AnalyticDistribution) -> Result<()> {
    if d.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: d.dim(),
        });
    }
    Ok(())
}

/// `∫ p log(p/q)` by the trapezoid rule on `grid`. Returns `+∞` if any grid
/// node has `p > 0` and `q = 0`.
pub fn kl_continuous(
    p: &AnalyticDistribution,
    q: &AnalyticDistribution,
    grid: &Grid,
) -> Result<DivergenceValue> {
    require_1d(p)?;
    require_1d(q)?;
    let mut infinite = false;
    let value = grid.integrate(|x| {
        let lp = p.ln_pdf(&[x]).expect("1-D");
        if lp == f64::NEG_INFINITY {
            return 0.0;
        }
        let lq = q.ln_pdf(&[x]).expect("1-D");
        if lq == f64::NEG_INFINITY {
            infinite = true;
            return 0.0;
        }
        lp.exp() * (lp - lq)
    });
    if infinite {
        return Ok(DivergenceValue::nats(f64::INFINITY));
    }
    Ok(DivergenceValue::nats(value.max(0.0)))
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Continuous JS by quadrature, symmetric in its arguments bit-for-bit.
pub fn js_continuous(
    p: &AnalyticDistribution,
    q: &AnalyticDistribution,
    grid: &Grid,
) -> Result<DivergenceValue> {
    require_1d(p)?;
    require_1d(q)?;
    let value = grid.integrate(|x| {
        let lp = p.ln_pdf(&[x]).expect("1-D");
        let lq = q.ln_pdf(&[x]).expect("1-D");
        let lm = log_add_exp(lp, lq) - LN_2;
        let term = |l: f64| if l == f64::NEG_INFINITY { 0.0 } else { l.exp() * (l - lm) };
        0.5 * (term(lp) + term(lq))
    });
    Ok(DivergenceValue::nats(value.clamp(0.0, LN_2)))
}

/// Earth mover's distance via the running surplus `δ_{i+1} = δ_i + P_i − Q_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmRecurrence {
    pub distance: f64,
    /// `δ_1 ..= δ_n`; `δ_0 = 0` is implicit.
    pub deltas: Vec<f64>,
}

pub fn em_recurrence(p: &Histogram, q: &Histogram) -> Result<EmRecurrence> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch(p.len(), q.len()));
    }
    let (tp, tq) = (p.total(), q.total());
    if (tp - tq).abs() > MASS_TOL {
        return Err(Error::UnequalMass(tp, tq));
    }
    let mut delta = 0.0;
    let mut deltas = Vec::with_capacity(p.len());
    for (pi, qi) in p.masses().iter().zip(q.masses()) {
        delta = delta + pi - qi;
        deltas.push(delta);
    }
    let distance = deltas.iter().map(|d| d.abs()).sum();
    Ok(EmRecurrence { distance, deltas })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Move {
    pub from: usize,
    pub to: usize,
    pub amount: f64,
}

/// Mass moved from source bins (P) to target bins (Q).
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub moves: Vec<Move>,
    pub cost: f64,
}

impl TransportPlan {
    pub fn recomputed_cost(&self) -> f64 {
        self.moves
            .iter()
            .map(|m| m.amount * (m.from as f64 - m.to as f64).abs())
            .sum()
    }

    /// Checks nonnegative amounts, both marginals, and the stored cost, all within 1e-9.
    pub fn validate(&self, source: &Histogram, target: &Histogram) -> Result<()> {
        let mut out = vec![0.0; source.len()];
        let mut inn = vec![0.0; target.len()];
        for m in &self.moves {
            if !(m.amount >= 0.0) || m.from >= out.len() || m.to >= inn.len() {
                return Err(Error::invalid("moves", format!("bad move {m:?}")));
            }
            out[m.from] += m.amount;
            inn[m.to] += m.amount;
        }
        for (marginal, hist, name) in [(&out, source, "source"), (&inn, target, "target")] {
            for (a, b) in marginal.iter().zip(hist.masses()) {
                if (a - b).abs() > 1e-9 {
                    return Err(Error::invalid("moves", format!("{name} marginal {a} != {b}")));
                }
            }
        }
        if (self.recomputed_cost() - self.cost).abs() > 1e-9 {
            return Err(Error::invalid("cost", "stored cost disagrees with moves"));
        }
        Ok(())
    }
}

struct PlanSearch {
    n: usize,
    cells: Vec<u32>,
    best_cost: u64,
    best_cells: Option<Vec<u32>>,
    source_left: Vec<u32>,
    target_left: Vec<u32>,
}

impl PlanSearch {
    // Visits cells (i, j) in row-major order and tries every feasible integer
    // amount. Branches whose partial cost already reaches the best are cut;
    // that never drops an optimal plan since costs are nonnegative.
    fn search(&mut self, cell: usize, cost: u64) {
        if cost >= self.best_cost {
            return;
        }
        if cell == self.n * self.n {
            if self.source_left.iter().all(|&s| s == 0) && self.target_left.iter().all(|&t| t == 0) {
                self.best_cost = cost;
                self.best_cells = Some(self.cells.clone());
            }
            return;
        }
        let (i, j) = (cell / self.n, cell % self.n);
        let distance = i.abs_diff(j) as u64;
        let cap = self.source_left[i].min(self.target_left[j]);
        // The last cell of a row must drain what is left of that source bin.
        let lo = if j + 1 == self.n { self.source_left[i] } else { 0 };
        if lo > cap {
            return;
        }
        for amount in lo..=cap {
            self.cells[cell] = amount;
            self.source_left[i] -= amount;
            self.target_left[j] -= amount;
            self.search(cell + 1, cost + amount as u64 * distance);
            self.source_left[i] += amount;
            self.target_left[j] += amount;
        }
        self.cells[cell] = 0;
    }
}

/// Exact earth mover's distance between integer histograms by enumerating
/// integer transport plans. Totals above [`BRUTEFORCE_MAX_MASS`] are refused.
pub fn em_bruteforce(p: &[u32], q: &[u32]) -> Result<(f64, TransportPlan)> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch(p.len(), q.len()));
    }
    let (tp, tq): (u32, u32) = (p.iter().sum(), q.iter().sum());
    if tp != tq {
        return Err(Error::UnequalMass(tp as f64, tq as f64));
    }
    if tp > BRUTEFORCE_MAX_MASS {
        return Err(Error::Capacity(format!(
            "total mass {tp} exceeds {BRUTEFORCE_MAX_MASS}"
        )));
    }
    let n = p.len();
    let mut search = PlanSearch {
        n,
        cells: vec![0; n * n],
        best_cost: u64::MAX,
        best_cells: None,
        source_left: p.to_vec(),
        target_left: q.to_vec(),
    };
    search.search(0, 0);
    let cells = search
        .best_cells
        .ok_or_else(|| Error::Undefined("no feasible transport plan".into()))?;
    let moves: Vec<Move> = cells
        .iter()
        .enumerate()
        .filter(|(_, &a)| a > 0)
        .map(|(k, &a)| Move {
            from: k / n,
            to: k % n,
            amount: a as f64,
        })
        .collect();
    let cost = search.best_cost as f64;
    Ok((cost, TransportPlan { moves, cost }))
}

/// `(1/n) Σ |a_(i) − b_(i)|` after sorting both samples.
pub fn wasserstein_1d(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::non_finite("wasserstein_1d samples"));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let total: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum();
    Ok(total / a.len() as f64)
}

/// 1-D Wasserstein distance of each column pair.
pub fn wasserstein_per_coordinate(a: &Matrix, b: &Matrix) -> Result<Vec<f64>> {
    if a.cols() != b.cols() {
        return Err(Error::DimensionMismatch {
            expected: a.cols(),
            got: b.cols(),
        });
    }
    (0..a.cols())
        .map(|j| wasserstein_1d(&a.col(j), &b.col(j)))
        .collect()
}

/// `∫ |F_p − F_q| dx` for two 1-D analytic laws.
pub fn wasserstein_1d_analytic(
    p: &AnalyticDistribution,
    q: &AnalyticDistribution,
    grid: &Grid,
) -> Result<f64> {
    require_1d(p)?;
    require_1d(q)?;
    Ok(grid.integrate(|x| (p.cdf_1d(x).expect("1-D") - q.cdf_1d(x).expect("1-D")).abs()))
}

/// Divergences between the vertical segments at `x = 0` and `x = θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParallelLinesRow {
    pub theta: f64,
    pub kl_pq: DivergenceValue,
    pub kl_qp: DivergenceValue,
    pub js: DivergenceValue,
    pub w: f64,
}

pub fn parallel_lines_table(theta: f64) -> Result<ParallelLinesRow> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::invalid("theta", format!("theta must lie in [0, 1], got {theta}")));
    }
    let (kl, js) = if theta == 0.0 { (0.0, 0.0) } else { (f64::INFINITY, LN_2) };
    Ok(ParallelLinesRow {
        theta,
        kl_pq: DivergenceValue::nats(kl),
        kl_qp: DivergenceValue::nats(kl),
        js: DivergenceValue::nats(js),
        w: theta.abs(),
    })
}
