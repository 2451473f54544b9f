//! Gateway-placement optimization: minimum set cover over candidate
//! positions subject to every end device being covered.
//!
//! `solve_exact` is a branch-and-bound solver that returns a provably
//! minimum-cardinality cover and, among optima, the lexicographically
//! smallest selected set, so identical coverage matrices always yield
//! identical placements. `solve_greedy` is the classic largest-gain
//! heuristic, and `brute_force` is an exhaustive oracle for small instances.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::coverage::{threshold, CoverageMatrix, GainMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    FeasibleHeuristic,
    Infeasible,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::FeasibleHeuristic => "feasible_heuristic",
            SolveStatus::Infeasible => "infeasible",
        }
    }

    pub fn is_feasible(&self) -> bool {
        !matches!(self, SolveStatus::Infeasible)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    pub nodes_explored: u64,
}

/// Result of one placement solve. `selected` holds 1-based candidate
/// indices in ascending order; `uncovered` holds 1-based device indices
/// when the instance is infeasible.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacementSolution {
    pub selected: Vec<usize>,
    pub objective: usize,
    pub status: SolveStatus,
    pub uncovered: Vec<usize>,
    pub stats: SolveStats,
    /// Wall-clock solve time; informational only and excluded from files so
    /// identical inputs produce identical output bytes.
    pub runtime: Duration,
}

impl PlacementSolution {
    fn infeasible(uncovered: Vec<usize>, nodes: u64, runtime: Duration) -> Self {
        PlacementSolution {
            selected: Vec::new(),
            objective: 0,
            status: SolveStatus::Infeasible,
            uncovered,
            stats: SolveStats {
                nodes_explored: nodes,
            },
            runtime,
        }
    }

    /// True when every device row has a selected covering candidate.
    pub fn is_valid_cover(&self, beta: &CoverageMatrix) -> bool {
        if !self.status.is_feasible() {
            return false;
        }
        (0..beta.num_eds()).all(|d| self.selected.iter().any(|&p| beta.covered(d, p - 1)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Exact,
    Greedy,
}

impl std::str::FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(SolverKind::Exact),
            "greedy" => Ok(SolverKind::Greedy),
            other => Err(Error::InvalidInput(format!(
                "unknown solver '{other}' (expected exact or greedy)"
            ))),
        }
    }
}

// ---------------------------------------------------------------------------
// Bitmask instance representation
// ---------------------------------------------------------------------------

type Mask = Vec<u64>;

fn mask_words(bits: usize) -> usize {
    bits.div_ceil(64)
}

fn mask_set(m: &mut Mask, i: usize) {
    m[i / 64] |= 1u64 << (i % 64);
}

fn mask_get(m: &Mask, i: usize) -> bool {
    m[i / 64] & (1u64 << (i % 64)) != 0
}

fn mask_or(a: &Mask, b: &Mask) -> Mask {
    a.iter().zip(b).map(|(x, y)| x | y).collect()
}

/// Rows of `col` not yet present in `covered`.
fn mask_gain(col: &Mask, covered: &Mask) -> usize {
    col.iter()
        .zip(covered)
        .map(|(c, v)| (c & !v).count_ones() as usize)
        .sum()
}

fn mask_is_subset(a: &Mask, b: &Mask) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

struct SetCover {
    num_rows: usize,
    /// Per-column bitmask of covered rows.
    cols: Vec<Mask>,
    /// Per-row list of covering column indices.
    rows_cols: Vec<Vec<usize>>,
}

impl SetCover {
    fn from_coverage(beta: &CoverageMatrix) -> Self {
        let num_rows = beta.num_eds();
        let num_cols = beta.num_candidates();
        let words = mask_words(num_rows);
        let mut cols = vec![vec![0u64; words]; num_cols];
        let mut rows_cols = vec![Vec::new(); num_rows];
        for (d, row_cols) in rows_cols.iter_mut().enumerate() {
            for (p, col) in cols.iter_mut().enumerate() {
                if beta.covered(d, p) {
                    mask_set(col, d);
                    row_cols.push(p);
                }
            }
        }
        SetCover {
            num_rows,
            cols,
            rows_cols,
        }
    }

    fn empty_mask(&self) -> Mask {
        vec![0u64; mask_words(self.num_rows)]
    }

    /// 0-based rows no column covers.
    fn uncoverable_rows(&self) -> Vec<usize> {
        (0..self.num_rows)
            .filter(|&r| self.rows_cols[r].is_empty())
            .collect()
    }

    /// Classic greedy cover restricted to `active` columns, starting from
    /// `covered`. Ties break toward the lowest column index. Returns the
    /// chosen columns in pick order, or None when some row is uncoverable.
    fn greedy(&self, active: &[bool], covered: &Mask) -> Option<Vec<usize>> {
        let mut covered = covered.clone();
        let mut uncovered = self.num_rows - mask_gain(&covered, &self.empty_mask());
        // mask_gain(covered, empty) counts covered rows
        let mut picks = Vec::new();
        while uncovered > 0 {
            let mut best: Option<(usize, usize)> = None; // (gain, col)
            for (p, col) in self.cols.iter().enumerate() {
                if !active[p] {
                    continue;
                }
                let gain = mask_gain(col, &covered);
                if gain > 0 && best.is_none_or(|(g, _)| gain > g) {
                    best = Some((gain, p));
                }
            }
            let (gain, p) = best?;
            covered = mask_or(&covered, &self.cols[p]);
            uncovered -= gain;
            picks.push(p);
        }
        Some(picks)
    }

    /// LP-free lower bound: cover the uncovered-row demand fractionally with
    /// the largest column gains, rounded up.
    fn fractional_bound(&self, active: &[bool], covered: &Mask, uncovered: usize) -> usize {
        if uncovered == 0 {
            return 0;
        }
        let mut gains: Vec<usize> = self
            .cols
            .iter()
            .enumerate()
            .filter(|(p, _)| active[*p])
            .map(|(_, col)| mask_gain(col, covered))
            .filter(|&g| g > 0)
            .collect();
        gains.sort_unstable_by(|a, b| b.cmp(a));
        let mut remaining = uncovered;
        for (used, g) in gains.into_iter().enumerate() {
            if g >= remaining {
                return used + 1;
            }
            remaining -= g;
        }
        usize::MAX / 2 // demand not coverable from here
    }
}

// ---------------------------------------------------------------------------
// Branch and bound
// ---------------------------------------------------------------------------

struct Search<'a> {
    sc: &'a SetCover,
    /// When set, the search only has to certify that a cover of at most
    /// this size exists and stops at the first one found.
    budget: Option<usize>,
    best: usize,
    found: bool,
    nodes: u64,
}

impl<'a> Search<'a> {
    fn new(sc: &'a SetCover, initial_best: usize, budget: Option<usize>) -> Self {
        Search {
            sc,
            budget,
            best: initial_best,
            found: false,
            nodes: 0,
        }
    }

    fn run(&mut self, active: &mut Vec<bool>, covered: &Mask, uncovered: usize, count: usize) {
        if self.budget.is_some() && self.found {
            return;
        }
        self.nodes += 1;
        if uncovered == 0 {
            if count < self.best {
                self.best = count;
            }
            if let Some(b) = self.budget {
                if count <= b {
                    self.found = true;
                }
            }
            return;
        }
        let bound = count + self.sc.fractional_bound(active, covered, uncovered);
        let prune_at = self.budget.map(|b| b + 1).unwrap_or(self.best);
        if bound >= prune_at {
            return;
        }

        // Branch on the uncovered row with the fewest covering candidates.
        let mut branch_row = None;
        let mut branch_n = usize::MAX;
        for r in 0..self.sc.num_rows {
            if mask_get(covered, r) {
                continue;
            }
            let n = self.sc.rows_cols[r].iter().filter(|&&p| active[p]).count();
            if n == 0 {
                return; // row became uncoverable under the exclusions
            }
            if n < branch_n {
                branch_n = n;
                branch_row = Some(r);
            }
        }
        let row = branch_row.expect("uncovered > 0 implies an uncovered row");

        // Candidates covering that row: largest gain first, index ascending.
        let mut candidates: Vec<(usize, usize)> = self.sc.rows_cols[row]
            .iter()
            .filter(|&&p| active[p])
            .map(|&p| (mask_gain(&self.sc.cols[p], covered), p))
            .collect();
        candidates.sort_unstable_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));

        // Every cover must use one of these columns; excluding tried ones in
        // later branches keeps the enumeration duplicate-free.
        for &(gain, p) in &candidates {
            active[p] = false;
            let next = mask_or(covered, &self.sc.cols[p]);
            self.run(active, &next, uncovered - gain, count + 1);
            if self.budget.is_some() && self.found {
                break;
            }
        }
        for &(_, p) in &candidates {
            active[p] = true;
        }
    }
}

/// Minimum cover size of `sc`; `upper_bound` must come from a known cover.
fn min_cover_size(sc: &SetCover, upper_bound: usize, nodes: &mut u64) -> usize {
    let mut search = Search::new(sc, upper_bound, None);
    let mut active = vec![true; sc.cols.len()];
    let covered = sc.empty_mask();
    search.run(&mut active, &covered, sc.num_rows, 0);
    *nodes += search.nodes;
    search.best
}

/// Whether the rows missing from `covered` can be covered with at most
/// `budget` columns drawn from `active`.
fn exists_cover_within(
    sc: &SetCover,
    active: &[bool],
    covered: &Mask,
    uncovered: usize,
    budget: usize,
    nodes: &mut u64,
) -> bool {
    if uncovered == 0 {
        return true;
    }
    if budget == 0 {
        return false;
    }
    match sc.greedy(active, covered) {
        None => return false,
        Some(picks) if picks.len() <= budget => return true,
        Some(_) => {}
    }
    let mut search = Search::new(sc, budget + 1, Some(budget));
    let mut active = active.to_vec();
    search.run(&mut active, covered, uncovered, 0);
    *nodes += search.nodes;
    search.found
}

// ---------------------------------------------------------------------------
// Public solvers
// ---------------------------------------------------------------------------

/// Exact minimum-gateway solve via branch and bound.
///
/// Deterministic: among all minimum covers the lexicographically smallest
/// selected set is returned, found by fixing candidates in ascending index
/// order and certifying each extension with a budget-bounded search.
pub fn solve_exact(beta: &CoverageMatrix) -> PlacementSolution {
    let start = Instant::now();
    let sc = SetCover::from_coverage(beta);
    let mut nodes = 0u64;

    let uncoverable = sc.uncoverable_rows();
    if !uncoverable.is_empty() {
        return PlacementSolution::infeasible(
            uncoverable.into_iter().map(|r| r + 1).collect(),
            nodes,
            start.elapsed(),
        );
    }

    // Phase 1: optimal objective on the reduced instance.
    let reduced = reduce(&sc);
    let all_active = vec![true; reduced.cols.len()];
    let greedy = reduced
        .greedy(&all_active, &reduced.empty_mask())
        .expect("feasibility was checked");
    let kstar = min_cover_size(&reduced, greedy.len(), &mut nodes);

    // Phase 2: lexicographically smallest cover of size kstar on the full
    // column set.
    let mut selected = Vec::with_capacity(kstar);
    let mut covered = sc.empty_mask();
    let mut uncovered = sc.num_rows;
    let mut budget = kstar;
    let mut active = vec![true; sc.cols.len()];
    for p in 0..sc.cols.len() {
        if budget == 0 {
            break;
        }
        active[p] = false; // p is either taken now or excluded from here on
        let gain = mask_gain(&sc.cols[p], &covered);
        if gain == 0 {
            continue;
        }
        let with_p = mask_or(&covered, &sc.cols[p]);
        if exists_cover_within(
            &sc,
            &active,
            &with_p,
            uncovered - gain,
            budget - 1,
            &mut nodes,
        ) {
            selected.push(p + 1);
            covered = with_p;
            uncovered -= gain;
            budget -= 1;
        }
    }
    assert_eq!(uncovered, 0, "phase 2 must reproduce the certified optimum");
    assert_eq!(selected.len(), kstar);

    PlacementSolution {
        selected,
        objective: kstar,
        status: SolveStatus::Optimal,
        uncovered: Vec::new(),
        stats: SolveStats {
            nodes_explored: nodes,
        },
        runtime: start.elapsed(),
    }
}

/// Duplicate-row and dominated-column reduction used by phase 1.
fn reduce(sc: &SetCover) -> SetCover {
    let mut seen = std::collections::HashSet::new();
    let mut kept_rows = Vec::new();
    for r in 0..sc.num_rows {
        if seen.insert(sc.rows_cols[r].clone()) {
            kept_rows.push(r);
        }
    }
    let num_rows = kept_rows.len();
    let words = mask_words(num_rows);
    let mut cols: Vec<Mask> = vec![vec![0u64; words]; sc.cols.len()];
    for (new_r, &r) in kept_rows.iter().enumerate() {
        for &p in &sc.rows_cols[r] {
            mask_set(&mut cols[p], new_r);
        }
    }
    // A column whose coverage is contained in another's can be swapped out
    // of any cover without growing it; equal-coverage ties keep the lowest
    // index.
    let mut keep = vec![true; cols.len()];
    for j in 0..cols.len() {
        for k in 0..cols.len() {
            if j == k || !keep[k] {
                continue;
            }
            if mask_is_subset(&cols[j], &cols[k]) {
                let equal = mask_is_subset(&cols[k], &cols[j]);
                if !equal || k < j {
                    keep[j] = false;
                    break;
                }
            }
        }
    }
    let cols: Vec<Mask> = cols
        .into_iter()
        .zip(&keep)
        .filter(|(_, k)| **k)
        .map(|(c, _)| c)
        .collect();
    let mut rows_cols: Vec<Vec<usize>> = vec![Vec::new(); num_rows];
    for (p, col) in cols.iter().enumerate() {
        for (r, row_cols) in rows_cols.iter_mut().enumerate() {
            if mask_get(col, r) {
                row_cols.push(p);
            }
        }
    }
    SetCover {
        num_rows,
        cols,
        rows_cols,
    }
}

/// Greedy set cover: repeatedly pick the candidate covering the most
/// uncovered devices, ties toward the lowest index.
pub fn solve_greedy(beta: &CoverageMatrix) -> PlacementSolution {
    let start = Instant::now();
    let sc = SetCover::from_coverage(beta);
    let uncoverable = sc.uncoverable_rows();
    if !uncoverable.is_empty() {
        return PlacementSolution::infeasible(
            uncoverable.into_iter().map(|r| r + 1).collect(),
            0,
            start.elapsed(),
        );
    }
    let active = vec![true; sc.cols.len()];
    let mut picks = sc
        .greedy(&active, &sc.empty_mask())
        .expect("feasibility was checked")
        .into_iter()
        .map(|p| p + 1)
        .collect::<Vec<_>>();
    picks.sort_unstable();
    PlacementSolution {
        objective: picks.len(),
        selected: picks,
        status: SolveStatus::FeasibleHeuristic,
        uncovered: Vec::new(),
        stats: SolveStats::default(),
        runtime: start.elapsed(),
    }
}

/// Exhaustive minimum cover for small instances; same tie-break rule as
/// [`solve_exact`]. Test oracle, refused above 24 candidates.
pub fn brute_force(beta: &CoverageMatrix) -> Result<PlacementSolution> {
    let start = Instant::now();
    if beta.num_candidates() > 24 {
        return Err(Error::InvalidInput(format!(
            "brute force is limited to 24 candidates, got {}",
            beta.num_candidates()
        )));
    }
    let sc = SetCover::from_coverage(beta);
    let uncoverable = sc.uncoverable_rows();
    if !uncoverable.is_empty() {
        return Ok(PlacementSolution::infeasible(
            uncoverable.into_iter().map(|r| r + 1).collect(),
            0,
            start.elapsed(),
        ));
    }
    let full_rows = sc.num_rows;
    let mut nodes = 0u64;
    for k in 1..=sc.cols.len() {
        let mut acc = Vec::with_capacity(k);
        if let Some(found) =
            combo_search(&sc, 0, k, &sc.empty_mask(), full_rows, &mut acc, &mut nodes)
        {
            return Ok(PlacementSolution {
                selected: found.iter().map(|p| p + 1).collect(),
                objective: k,
                status: SolveStatus::Optimal,
                uncovered: Vec::new(),
                stats: SolveStats {
                    nodes_explored: nodes,
                },
                runtime: start.elapsed(),
            });
        }
    }
    unreachable!("a feasible instance has a cover of size <= num_candidates")
}

/// First (lexicographically smallest) k-combination that covers all rows.
fn combo_search(
    sc: &SetCover,
    from: usize,
    remaining: usize,
    covered: &Mask,
    uncovered: usize,
    acc: &mut Vec<usize>,
    nodes: &mut u64,
) -> Option<Vec<usize>> {
    *nodes += 1;
    if uncovered == 0 && remaining == 0 {
        return Some(acc.clone());
    }
    if remaining == 0 || sc.cols.len() - from < remaining {
        return None;
    }
    for p in from..sc.cols.len() {
        let gain = mask_gain(&sc.cols[p], covered);
        // with remaining picks this combination must still be a cover
        acc.push(p);
        let next = mask_or(covered, &sc.cols[p]);
        if let Some(found) = combo_search(
            sc,
            p + 1,
            remaining - 1,
            &next,
            uncovered - gain,
            acc,
            nodes,
        ) {
            return Some(found);
        }
        acc.pop();
    }
    None
}

/// Mean over devices of the strongest received power from the selected set.
pub fn avg_ed_best_power(alpha: &GainMatrix, solution: &PlacementSolution) -> Result<f64> {
    if !solution.status.is_feasible() {
        return Err(Error::InfeasiblePlacement(solution.uncovered.clone()));
    }
    if solution.selected.is_empty() {
        return Err(Error::InvalidInput("solution selects no candidates".into()));
    }
    let mut sum = 0.0;
    for d in 0..alpha.num_eds() {
        let best = solution
            .selected
            .iter()
            .map(|&p| alpha.get(d, p - 1))
            .fold(f64::NEG_INFINITY, f64::max);
        sum += best;
    }
    Ok(sum / alpha.num_eds() as f64)
}

// ---------------------------------------------------------------------------
// Threshold sweep
// ---------------------------------------------------------------------------

/// One row of a threshold sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub rho_dbm: f64,
    pub status: SolveStatus,
    pub objective: Option<usize>,
    pub selected: Vec<usize>,
    pub avg_ed_best_power_dbm: Option<f64>,
}

/// Sweep entries sorted by threshold ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub entries: Vec<SweepEntry>,
}

fn sweep_one(alpha: &GainMatrix, rho_dbm: f64, solver: SolverKind) -> SweepEntry {
    let beta = threshold(alpha, rho_dbm);
    let solution = match solver {
        SolverKind::Exact => solve_exact(&beta),
        SolverKind::Greedy => solve_greedy(&beta),
    };
    let avg = if solution.status.is_feasible() {
        avg_ed_best_power(alpha, &solution).ok()
    } else {
        None
    };
    SweepEntry {
        rho_dbm,
        status: solution.status,
        objective: solution.status.is_feasible().then_some(solution.objective),
        selected: solution.selected,
        avg_ed_best_power_dbm: avg,
    }
}

/// Solves the placement once per threshold. Thresholds are sorted
/// ascending; solves run in parallel under the `parallel` feature with
/// results assembled by index.
pub fn sweep_rho(alpha: &GainMatrix, rho_list: &[f64], solver: SolverKind) -> Result<SweepReport> {
    let rhos = sorted_rhos(rho_list)?;
    let entries = sweep_entries(alpha, &rhos, solver);
    Ok(SweepReport { entries })
}

/// Sequential reference path of [`sweep_rho`].
pub fn sweep_rho_sequential(
    alpha: &GainMatrix,
    rho_list: &[f64],
    solver: SolverKind,
) -> Result<SweepReport> {
    let rhos = sorted_rhos(rho_list)?;
    let entries = rhos.iter().map(|&r| sweep_one(alpha, r, solver)).collect();
    Ok(SweepReport { entries })
}

fn sorted_rhos(rho_list: &[f64]) -> Result<Vec<f64>> {
    if rho_list.is_empty() {
        return Err(Error::InvalidInput("rho list must be non-empty".into()));
    }
    if rho_list.iter().any(|r| r.is_nan()) {
        return Err(Error::InvalidInput("rho list contains NaN".into()));
    }
    let mut rhos = rho_list.to_vec();
    rhos.sort_by(f64::total_cmp);
    Ok(rhos)
}

#[cfg(feature = "parallel")]
fn sweep_entries(alpha: &GainMatrix, rhos: &[f64], solver: SolverKind) -> Vec<SweepEntry> {
    use rayon::prelude::*;
    rhos.par_iter()
        .map(|&r| sweep_one(alpha, r, solver))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn sweep_entries(alpha: &GainMatrix, rhos: &[f64], solver: SolverKind) -> Vec<SweepEntry> {
    rhos.iter().map(|&r| sweep_one(alpha, r, solver)).collect()
}

impl SweepReport {
    /// CSV rows `rho_dbm,status,objective,selected` with `;`-joined
    /// indices; objective and selected stay empty on infeasible rows.
    pub fn to_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::from("rho_dbm,status,objective,selected\n");
        for e in &self.entries {
            let objective = e.objective.map(|o| o.to_string()).unwrap_or_default();
            let selected = e
                .selected
                .iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join(";");
            out.push_str(&format!(
                "{},{},{},{}\n",
                e.rho_dbm,
                e.status.as_str(),
                objective,
                selected
            ));
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

// ---------------------------------------------------------------------------
// Plan file
// ---------------------------------------------------------------------------

/// On-disk JSON produced by the `plan` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanFile {
    pub rho_dbm: f64,
    pub channel_source: String,
    pub selected: Vec<usize>,
    pub objective: usize,
    pub status: SolveStatus,
    pub uncovered: Vec<usize>,
    pub stats: SolveStats,
}

impl PlanFile {
    pub fn new(
        rho_dbm: f64,
        channel_source: impl Into<String>,
        solution: &PlacementSolution,
    ) -> Self {
        PlanFile {
            rho_dbm,
            channel_source: channel_source.into(),
            selected: solution.selected.clone(),
            objective: solution.objective,
            status: solution.status,
            uncovered: solution.uncovered.clone(),
            stats: solution.stats,
        }
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::InvalidInput(format!("plan not serializable: {e}")))?;
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path, Some(e.line()), e.to_string()))
    }

    /// Rebuilds a solution for code paths that consume plans.
    pub fn to_solution(&self) -> PlacementSolution {
        PlacementSolution {
            selected: self.selected.clone(),
            objective: self.objective,
            status: self.status,
            uncovered: self.uncovered.clone(),
            stats: self.stats,
            runtime: Duration::ZERO,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::CoverageMatrix;

    fn beta_from(rows: &[&[u8]]) -> CoverageMatrix {
        let d = rows.len();
        let p = rows[0].len();
        let flat: Vec<bool> = rows
            .iter()
            .flat_map(|r| r.iter().map(|&v| v != 0))
            .collect();
        CoverageMatrix::from_rows(flat, d, p, -90.0)
    }

    #[test]
    fn identity_needs_every_column() {
        let beta = beta_from(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        let sol = solve_exact(&beta);
        assert_eq!(sol.selected, vec![1, 2, 3]);
        assert_eq!(sol.objective, 3);
        assert_eq!(sol.status, SolveStatus::Optimal);

        let greedy = solve_greedy(&beta);
        assert_eq!(greedy.selected, vec![1, 2, 3]);
        assert_eq!(greedy.status, SolveStatus::FeasibleHeuristic);
    }

    #[test]
    fn dominating_column_wins() {
        let beta = beta_from(&[&[0, 1, 0], &[0, 1, 0], &[0, 1, 0]]);
        let sol = solve_exact(&beta);
        assert_eq!(sol.selected, vec![2]);
        assert_eq!(sol.objective, 1);
    }

    #[test]
    fn four_by_three_instance() {
        // columns cover {1,2}, {3,4}, {2,3}; optimum certified by enumeration
        let beta = beta_from(&[&[1, 0, 0], &[1, 0, 1], &[0, 1, 1], &[0, 1, 0]]);
        let exact = solve_exact(&beta);
        assert_eq!(exact.objective, 2);
        assert_eq!(exact.selected, vec![1, 2]);
        let brute = brute_force(&beta).unwrap();
        assert_eq!(brute.objective, 2);
        assert_eq!(brute.selected, vec![1, 2]);
    }

    #[test]
    fn infeasible_lists_uncovered() {
        let beta = beta_from(&[&[1, 0], &[0, 0], &[0, 1], &[0, 0]]);
        for sol in [
            solve_exact(&beta),
            solve_greedy(&beta),
            brute_force(&beta).unwrap(),
        ] {
            assert_eq!(sol.status, SolveStatus::Infeasible);
            assert_eq!(sol.uncovered, vec![2, 4]);
            assert!(sol.selected.is_empty());
            assert_eq!(sol.objective, 0);
        }
    }

    #[test]
    fn all_ones_column_ties_to_lowest_index() {
        let beta = beta_from(&[&[1, 1, 1, 1, 1], &[1, 1, 1, 1, 1]]);
        assert_eq!(solve_exact(&beta).selected, vec![1]);
        assert_eq!(brute_force(&beta).unwrap().selected, vec![1]);
        assert_eq!(solve_greedy(&beta).selected, vec![1]);
    }

    #[test]
    fn lexicographic_tie_break_among_optima() {
        // columns cover {1,2}, {1,3}, {2,4}, {3,4}: the only optima are
        // {1,4} and {2,3}, and {1,4} is lexicographically smaller
        let beta = beta_from(&[&[1, 1, 0, 0], &[1, 0, 1, 0], &[0, 1, 0, 1], &[0, 0, 1, 1]]);
        let exact = solve_exact(&beta);
        let brute = brute_force(&beta).unwrap();
        assert_eq!(exact.objective, 2);
        assert_eq!(exact.selected, vec![1, 4]);
        assert_eq!(brute.selected, vec![1, 4]);
    }

    #[test]
    fn brute_force_refuses_large_instances() {
        let flat = vec![true; 25];
        let beta = CoverageMatrix::from_rows(flat, 1, 25, -90.0);
        assert!(brute_force(&beta).is_err());
    }

    #[test]
    fn greedy_is_forced_on_identity() {
        let beta = beta_from(&[&[1, 0], &[0, 1]]);
        assert_eq!(solve_greedy(&beta).objective, 2);
    }

    #[test]
    fn avg_best_power() {
        let alpha =
            GainMatrix::from_rows(vec![-80.0, -70.0, -90.0, -95.0], 2, 2, 0.0, "test").unwrap();
        let beta = threshold(&alpha, -100.0);
        let sol = solve_exact(&beta);
        assert_eq!(sol.objective, 1);
        assert_eq!(sol.selected, vec![1]);
        let avg = avg_ed_best_power(&alpha, &sol).unwrap();
        assert_eq!(avg, (-80.0 + -90.0) / 2.0);

        let both = PlacementSolution {
            selected: vec![1, 2],
            objective: 2,
            status: SolveStatus::Optimal,
            uncovered: vec![],
            stats: SolveStats::default(),
            runtime: Duration::ZERO,
        };
        // adding a gateway never decreases the per-device best
        assert!(avg_ed_best_power(&alpha, &both).unwrap() >= avg);
    }

    #[test]
    fn avg_best_power_rejects_infeasible() {
        let alpha = GainMatrix::from_rows(vec![-80.0], 1, 1, 0.0, "test").unwrap();
        let sol = PlacementSolution::infeasible(vec![1], 0, Duration::ZERO);
        assert!(avg_ed_best_power(&alpha, &sol).is_err());
    }

    #[test]
    fn sweep_structure() {
        let alpha =
            GainMatrix::from_rows(vec![-80.0, -100.0, -85.0, -95.0], 2, 2, 0.0, "test").unwrap();
        let report = sweep_rho(&alpha, &[-90.0, -110.0, -70.0], SolverKind::Exact).unwrap();
        assert_eq!(report.entries.len(), 3);
        let rhos: Vec<f64> = report.entries.iter().map(|e| e.rho_dbm).collect();
        assert_eq!(rhos, vec![-110.0, -90.0, -70.0]);
        // a threshold below every entry is satisfied by one candidate
        assert_eq!(report.entries[0].objective, Some(1));
        // a threshold above max(alpha) is infeasible
        assert_eq!(report.entries[2].status, SolveStatus::Infeasible);
        assert_eq!(report.entries[2].objective, None);
        // objectives never decrease with rho on feasible entries
        let objs: Vec<usize> = report.entries.iter().filter_map(|e| e.objective).collect();
        assert!(objs.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn sweep_rejects_empty_rho_list() {
        let alpha = GainMatrix::from_rows(vec![-80.0], 1, 1, 0.0, "test").unwrap();
        assert!(sweep_rho(&alpha, &[], SolverKind::Exact).is_err());
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn sweep_parallel_matches_sequential() {
        let alpha = GainMatrix::from_rows(
            vec![-80.0, -100.0, -85.0, -95.0, -70.0, -120.0],
            3,
            2,
            0.0,
            "test",
        )
        .unwrap();
        let rhos: Vec<f64> = (0..9).map(|i| -120.0 + 5.0 * i as f64).collect();
        let par = sweep_rho(&alpha, &rhos, SolverKind::Exact).unwrap();
        let seq = sweep_rho_sequential(&alpha, &rhos, SolverKind::Exact).unwrap();
        assert_eq!(par, seq);
    }

    #[test]
    fn plan_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("plan.json");
        let beta = beta_from(&[&[1, 0], &[1, 1]]);
        let sol = solve_exact(&beta);
        let plan = PlanFile::new(-90.0, "okumura_hata", &sol);
        plan.write(&path).unwrap();
        let loaded = PlanFile::read(&path).unwrap();
        assert_eq!(plan, loaded);
        assert_eq!(loaded.to_solution().selected, sol.selected);
    }
}
