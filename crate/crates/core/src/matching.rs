//! Persistence-aware point distances and optimal diagram matching.
//!
//! Matching is always per homology degree: a cost matrix over the
//! degree-filtered points of two diagrams is solved by the Hungarian
//! algorithm, and only pairs within the matching threshold survive.
//! Rectangular problems are padded to square with a sentinel cost above
//! anything real, which leaves the optimal sub-assignment unchanged; padded
//! pairs are never reported.

use thiserror::Error;

use crate::persistence::{Degree, PersistenceDiagram, PersistencePoint};

#[derive(Debug, Error)]
pub enum MatchError {
    #[error("cannot compare a degree-{0} point with a degree-{1} point")]
    DegreeMismatch(Degree, Degree),
}

/// Point-to-point metric used when linking adjacent scales.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceMetric {
    /// Plain Euclidean distance in the (birth, death) plane.
    Euclidean,
    /// Euclidean damped by the mean persistence of the endpoints.
    PersistenceScaled,
    /// Euclidean inflated by the relative persistence gap; the default.
    RelativePersistence,
}

impl DistanceMetric {
    pub fn as_str(&self) -> &'static str {
        match self {
            DistanceMetric::Euclidean => "euclidean",
            DistanceMetric::PersistenceScaled => "pscaled",
            DistanceMetric::RelativePersistence => "relpers",
        }
    }

    pub fn parse(s: &str) -> Option<DistanceMetric> {
        match s {
            "euclidean" => Some(DistanceMetric::Euclidean),
            "pscaled" => Some(DistanceMetric::PersistenceScaled),
            "relpers" => Some(DistanceMetric::RelativePersistence),
            _ => None,
        }
    }
}

impl std::fmt::Display for DistanceMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Accepted correspondences between two degree-filtered diagrams plus the
/// leftovers on both sides. Indices refer to positions within the filtered
/// point lists.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub pairs: Vec<(usize, usize, f64)>,
    pub unmatched_a: Vec<usize>,
    pub unmatched_b: Vec<usize>,
}

/// Distance between two same-degree points under the chosen metric.
pub fn point_distance(
    p: &PersistencePoint,
    q: &PersistencePoint,
    metric: DistanceMetric,
) -> Result<f64, MatchError> {
    if p.degree != q.degree {
        return Err(MatchError::DegreeMismatch(p.degree, q.degree));
    }
    Ok(point_distance_unchecked(p, q, metric))
}

fn point_distance_unchecked(
    p: &PersistencePoint,
    q: &PersistencePoint,
    metric: DistanceMetric,
) -> f64 {
    let base = ((p.birth - q.birth).powi(2) + (p.death - q.death).powi(2)).sqrt();
    let pers_p = p.persistence();
    let pers_q = q.persistence();
    match metric {
        DistanceMetric::Euclidean => base,
        DistanceMetric::PersistenceScaled => base / (1.0 + (pers_p + pers_q) / 2.0),
        DistanceMetric::RelativePersistence => {
            let max = pers_p.max(pers_q);
            // Two diagonal points have no persistence gap to speak of.
            let ratio = if max > 0.0 {
                (pers_p - pers_q).abs() / max
            } else {
                0.0
            };
            base * (1.0 + ratio)
        }
    }
}

/// Row-major cost matrix of a bipartite matching problem.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> CostMatrix {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        debug_assert!(rows.iter().all(|r| r.len() == n_cols));
        CostMatrix {
            rows: n_rows,
            cols: n_cols,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn max_entry(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }
}

/// Pairwise distances between the degree-filtered points of two diagrams.
pub fn distance_matrix(
    a: &PersistenceDiagram,
    b: &PersistenceDiagram,
    degree: Degree,
    metric: DistanceMetric,
) -> CostMatrix {
    let pa = a.points_of_degree(degree);
    let pb = b.points_of_degree(degree);
    points_distance_matrix(&pa, &pb, metric)
}

pub(crate) fn points_distance_matrix(
    pa: &[PersistencePoint],
    pb: &[PersistencePoint],
    metric: DistanceMetric,
) -> CostMatrix {
    let mut data = Vec::with_capacity(pa.len() * pb.len());
    for p in pa {
        for q in pb {
            data.push(point_distance_unchecked(p, q, metric));
        }
    }
    CostMatrix {
        rows: pa.len(),
        cols: pb.len(),
        data,
    }
}

/// Minimum-cost one-to-one assignment of `min(rows, cols)` pairs.
///
/// Entries must be finite and non-negative. The result is deterministic and
/// sorted by row; ties inside the solver break toward lower indices.
pub fn solve_assignment(costs: &CostMatrix) -> Vec<(usize, usize)> {
    let (rows, cols) = (costs.rows(), costs.cols());
    if rows == 0 || cols == 0 {
        return Vec::new();
    }
    let dim = rows.max(cols);
    // Any sentinel above the largest real cost keeps the real sub-assignment
    // optimal: every padded slot is used exactly |rows - cols| times no
    // matter which, so padding adds a constant.
    let sentinel = costs.max_entry() + 1.0;
    let padded = |r: usize, c: usize| -> f64 {
        if r < rows && c < cols {
            costs.get(r, c)
        } else {
            sentinel
        }
    };

    // Hungarian algorithm with row/column potentials, one augmenting path
    // per row, O(dim^3) overall. Columns are 1-based internally; column 0 is
    // the virtual root of the alternating tree.
    let mut row_potential = vec![0.0f64; dim + 1];
    let mut col_potential = vec![0.0f64; dim + 1];
    let mut col_match = vec![0usize; dim + 1]; // row (1-based) matched to col
    let mut predecessor = vec![0usize; dim + 1];

    for row in 1..=dim {
        col_match[0] = row;
        let mut current_col = 0usize;
        let mut min_slack = vec![f64::INFINITY; dim + 1];
        let mut visited = vec![false; dim + 1];

        loop {
            visited[current_col] = true;
            let attached_row = col_match[current_col];
            let mut delta = f64::INFINITY;
            let mut next_col = 0usize;
            for col in 1..=dim {
                if visited[col] {
                    continue;
                }
                let reduced = padded(attached_row - 1, col - 1)
                    - row_potential[attached_row]
                    - col_potential[col];
                if reduced < min_slack[col] {
                    min_slack[col] = reduced;
                    predecessor[col] = current_col;
                }
                if min_slack[col] < delta {
                    delta = min_slack[col];
                    next_col = col;
                }
            }
            for col in 0..=dim {
                if visited[col] {
                    row_potential[col_match[col]] += delta;
                    col_potential[col] -= delta;
                } else {
                    min_slack[col] -= delta;
                }
            }
            current_col = next_col;
            if col_match[current_col] == 0 {
                break;
            }
        }

        // Augment along the alternating path back to the root.
        while current_col != 0 {
            let prev = predecessor[current_col];
            col_match[current_col] = col_match[prev];
            current_col = prev;
        }
    }

    let mut pairs = Vec::with_capacity(rows.min(cols));
    for (col, &row) in col_match.iter().enumerate().skip(1) {
        if row >= 1 && row <= rows && col <= cols {
            pairs.push((row - 1, col - 1));
        }
    }
    pairs.sort_unstable();
    debug_assert_eq!(pairs.len(), rows.min(cols));
    pairs
}

/// Optimal assignment between two diagrams at one degree, filtered by the
/// matching threshold; everything else is reported unmatched.
pub fn match_diagrams(
    a: &PersistenceDiagram,
    b: &PersistenceDiagram,
    degree: Degree,
    metric: DistanceMetric,
    match_threshold: f64,
) -> MatchResult {
    debug_assert!(match_threshold >= 0.0);
    let costs = distance_matrix(a, b, degree, metric);
    match_costs(&costs, match_threshold)
}

pub(crate) fn match_costs(costs: &CostMatrix, match_threshold: f64) -> MatchResult {
    let assignment = solve_assignment(costs);
    let mut matched_a = vec![false; costs.rows()];
    let mut matched_b = vec![false; costs.cols()];
    let mut pairs = Vec::new();
    for (row, col) in assignment {
        let d = costs.get(row, col);
        if d <= match_threshold {
            matched_a[row] = true;
            matched_b[col] = true;
            pairs.push((row, col, d));
        }
    }
    MatchResult {
        pairs,
        unmatched_a: (0..costs.rows()).filter(|&i| !matched_a[i]).collect(),
        unmatched_b: (0..costs.cols()).filter(|&j| !matched_b[j]).collect(),
    }
}
