//! Randomized cross-checks of the exact solver against the exhaustive
//! oracle, plus structural solver properties.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use loraplan_core::coverage::CoverageMatrix;
use loraplan_core::placement::{brute_force, solve_exact, solve_greedy, SolveStatus};

fn random_beta(rng: &mut ChaCha8Rng, max_rows: usize, max_cols: usize) -> CoverageMatrix {
    let rows = rng.random_range(1..=max_rows);
    let cols = rng.random_range(1..=max_cols);
    let density = rng.random_range(0.1..0.8);
    let flat: Vec<bool> = (0..rows * cols).map(|_| rng.random_bool(density)).collect();
    CoverageMatrix::from_rows(flat, rows, cols, -90.0)
}

#[test]
fn exact_matches_brute_force_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let mut feasible_seen = 0;
    let mut infeasible_seen = 0;
    for _ in 0..250 {
        let beta = random_beta(&mut rng, 30, 16);
        let exact = solve_exact(&beta);
        let brute = brute_force(&beta).unwrap();
        assert_eq!(exact.status, brute.status);
        assert_eq!(exact.objective, brute.objective);
        // same tie-break rule: the selected sets agree exactly
        assert_eq!(exact.selected, brute.selected);
        if exact.status == SolveStatus::Infeasible {
            assert_eq!(exact.uncovered, brute.uncovered);
            infeasible_seen += 1;
        } else {
            assert!(exact.is_valid_cover(&beta));
            feasible_seen += 1;
        }
    }
    assert!(
        feasible_seen > 50,
        "want a healthy mix, got {feasible_seen} feasible"
    );
    assert!(
        infeasible_seen > 5,
        "want a healthy mix, got {infeasible_seen} infeasible"
    );
}

#[test]
fn greedy_bounded_by_ln_d_plus_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xBEEF);
    let mut checked = 0;
    for _ in 0..120 {
        let beta = random_beta(&mut rng, 20, 12);
        let exact = solve_exact(&beta);
        let greedy = solve_greedy(&beta);
        assert_eq!(exact.status.is_feasible(), greedy.status.is_feasible());
        if !exact.status.is_feasible() {
            continue;
        }
        assert!(greedy.is_valid_cover(&beta));
        assert!(greedy.objective >= exact.objective);
        let bound = exact.objective as f64 * ((beta.num_eds() as f64).ln() + 1.0);
        assert!(
            greedy.objective as f64 <= bound + 1e-9,
            "greedy {} exceeds ln-bound {bound} (exact {})",
            greedy.objective,
            exact.objective
        );
        checked += 1;
    }
    assert!(checked > 40);
}

#[test]
fn column_permutation_equivariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xABCD);
    for _ in 0..60 {
        let beta = random_beta(&mut rng, 15, 10);
        let cols = beta.num_candidates();
        // random permutation: perm[new] = old
        let mut perm: Vec<usize> = (0..cols).collect();
        for i in (1..cols).rev() {
            let j = rng.random_range(0..=i);
            perm.swap(i, j);
        }
        let flat: Vec<bool> = (0..beta.num_eds())
            .flat_map(|d| perm.iter().map(move |&old| (d, old)))
            .map(|(d, old)| beta.covered(d, old))
            .collect();
        let permuted = CoverageMatrix::from_rows(flat, beta.num_eds(), cols, -90.0);

        let base = solve_exact(&beta);
        let moved = solve_exact(&permuted);
        assert_eq!(base.status, moved.status);
        assert_eq!(base.objective, moved.objective);
        if base.status.is_feasible() {
            // mapping the original selection through the permutation gives a
            // valid cover of the permuted instance with the same size
            let mut inverse = vec![0usize; cols];
            for (new, &old) in perm.iter().enumerate() {
                inverse[old] = new;
            }
            let mut mapped: Vec<usize> =
                base.selected.iter().map(|&p| inverse[p - 1] + 1).collect();
            mapped.sort_unstable();
            for d in 0..permuted.num_eds() {
                assert!(mapped.iter().any(|&p| permuted.covered(d, p - 1)));
            }
            assert_eq!(mapped.len(), moved.objective);
        }
    }
}

#[test]
fn all_ones_column_collapses_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    for _ in 0..40 {
        let beta = random_beta(&mut rng, 12, 8);
        let rows = beta.num_eds();
        let cols = beta.num_candidates();
        let flat: Vec<bool> = (0..rows)
            .flat_map(|d| (0..cols + 1).map(move |p| (d, p)))
            .map(|(d, p)| p == cols || beta.covered(d, p))
            .collect();
        let augmented = CoverageMatrix::from_rows(flat, rows, cols + 1, -90.0);
        let sol = solve_exact(&augmented);
        assert_eq!(sol.objective, 1);
    }
}
