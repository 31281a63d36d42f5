//! Labeled weighted bipartite networks, their direct and reverse feature
//! matrices, coincidence-similarity networks and classical projections.

use std::collections::HashSet;
use std::fmt;

use ndarray::{Array2, Axis};
use thiserror::Error;

use crate::similarity::{self, SimilarityError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("{side} labels are empty")]
    NoLabels { side: Side },
    #[error("duplicate {side} label {label:?}")]
    DuplicateLabel { side: Side, label: String },
    #[error("weight matrix is {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    Shape {
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },
    #[error("weight {value} between {a:?} and {b:?} is not a finite non-negative number")]
    InvalidWeight { a: String, b: String, value: f64 },
    #[error("symmetric matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("symmetric matrix differs at ({i}, {j}): {upper} vs {lower}")]
    Asymmetric {
        i: usize,
        j: usize,
        upper: f64,
        lower: f64,
    },
    #[error("same-type entry ({i}, {j}) is {value}; links must join A to B")]
    SameTypeLink { i: usize, j: usize, value: f64 },
    #[error("A-node count {n_a} exceeds matrix size {size}")]
    SplitOutOfRange { n_a: usize, size: usize },
    #[error("node {label:?} has no links in the {orientation} orientation")]
    IsolatedNode {
        label: String,
        orientation: Orientation,
    },
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
}

/// One of the two node types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    A,
    B,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::A => "A",
            Side::B => "B",
        })
    }
}

/// Which node type plays the role of data elements (rows).
///
/// `Direct` uses A-nodes as rows with B-nodes as features; `Reverse` swaps
/// the roles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    Direct,
    Reverse,
}

impl Orientation {
    pub fn row_side(self) -> Side {
        match self {
            Orientation::Direct => Side::A,
            Orientation::Reverse => Side::B,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::Direct => "direct",
            Orientation::Reverse => "reverse",
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Orientation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "direct" => Ok(Orientation::Direct),
            "reverse" => Ok(Orientation::Reverse),
            other => Err(format!(
                "unknown orientation {other:?} (expected direct|reverse)"
            )),
        }
    }
}

/// A weighted bipartite network. `weights[[i, k]]` is the weight of the link
/// between `a_labels[i]` and `b_labels[k]`, zero meaning no link.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteNetwork {
    a_labels: Vec<String>,
    b_labels: Vec<String>,
    weights: Array2<f64>,
}

fn check_labels(side: Side, labels: &[String]) -> Result<(), NetworkError> {
    if labels.is_empty() {
        return Err(NetworkError::NoLabels { side });
    }
    let mut seen = HashSet::with_capacity(labels.len());
    for label in labels {
        if !seen.insert(label.as_str()) {
            return Err(NetworkError::DuplicateLabel {
                side,
                label: label.clone(),
            });
        }
    }
    Ok(())
}

impl BipartiteNetwork {
    pub fn new(
        a_labels: Vec<String>,
        b_labels: Vec<String>,
        weights: Array2<f64>,
    ) -> Result<Self, NetworkError> {
        check_labels(Side::A, &a_labels)?;
        check_labels(Side::B, &b_labels)?;
        let (rows, cols) = weights.dim();
        if rows != a_labels.len() || cols != b_labels.len() {
            return Err(NetworkError::Shape {
                rows,
                cols,
                expected_rows: a_labels.len(),
                expected_cols: b_labels.len(),
            });
        }
        for ((i, k), &value) in weights.indexed_iter() {
            if !value.is_finite() || value < 0.0 {
                return Err(NetworkError::InvalidWeight {
                    a: a_labels[i].clone(),
                    b: b_labels[k].clone(),
                    value,
                });
            }
        }
        Ok(Self {
            a_labels,
            b_labels,
            weights,
        })
    }

    pub fn a_labels(&self) -> &[String] {
        &self.a_labels
    }

    pub fn b_labels(&self) -> &[String] {
        &self.b_labels
    }

    pub fn labels(&self, side: Side) -> &[String] {
        match side {
            Side::A => &self.a_labels,
            Side::B => &self.b_labels,
        }
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn n_a(&self) -> usize {
        self.a_labels.len()
    }

    pub fn n_b(&self) -> usize {
        self.b_labels.len()
    }

    /// Number of links (positive weights).
    pub fn link_count(&self) -> usize {
        self.weights.iter().filter(|&&w| w > 0.0).count()
    }

    pub fn is_binary(&self) -> bool {
        self.weights.iter().all(|&w| w == 0.0 || w == 1.0)
    }

    /// Same network with every positive weight replaced by 1.
    pub fn binarize(&self) -> Self {
        Self {
            a_labels: self.a_labels.clone(),
            b_labels: self.b_labels.clone(),
            weights: self.weights.mapv(|w| if w > 0.0 { 1.0 } else { 0.0 }),
        }
    }

    /// Per-node sums of weights on `side`.
    pub fn strengths(&self, side: Side) -> Vec<f64> {
        let axis = match side {
            Side::A => Axis(1),
            Side::B => Axis(0),
        };
        self.weights.sum_axis(axis).to_vec()
    }

    /// Rebuilds the square symmetric weight matrix over all A-nodes followed
    /// by all B-nodes, with zero A–A and B–B blocks.
    pub fn to_symmetric(&self) -> Array2<f64> {
        let (n_a, n_b) = self.weights.dim();
        let mut full = Array2::zeros((n_a + n_b, n_a + n_b));
        for ((i, k), &w) in self.weights.indexed_iter() {
            full[[i, n_a + k]] = w;
            full[[n_a + k, i]] = w;
        }
        full
    }

    /// Extracts a network from its square symmetric form. The first `n_a`
    /// labels name the A-nodes, the rest the B-nodes.
    pub fn from_symmetric(
        full: &Array2<f64>,
        n_a: usize,
        labels: &[String],
    ) -> Result<Self, NetworkError> {
        let (rows, cols) = full.dim();
        if rows != cols {
            return Err(NetworkError::NotSquare { rows, cols });
        }
        if n_a > rows {
            return Err(NetworkError::SplitOutOfRange { n_a, size: rows });
        }
        if labels.len() != rows {
            return Err(NetworkError::Shape {
                rows: labels.len(),
                cols: 1,
                expected_rows: rows,
                expected_cols: 1,
            });
        }
        for i in 0..rows {
            for j in (i + 1)..rows {
                let (upper, lower) = (full[[i, j]], full[[j, i]]);
                if upper != lower {
                    return Err(NetworkError::Asymmetric { i, j, upper, lower });
                }
            }
        }
        for ((i, j), &value) in full.indexed_iter() {
            if (i < n_a) == (j < n_a) && value != 0.0 {
                return Err(NetworkError::SameTypeLink { i, j, value });
            }
        }
        let block = full.slice(ndarray::s![..n_a, n_a..]).to_owned();
        Self::new(labels[..n_a].to_vec(), labels[n_a..].to_vec(), block)
    }

    /// Orientation-resolved view: rows are the data elements, columns the
    /// features describing them.
    pub fn feature_matrix(&self, orientation: Orientation) -> FeatureMatrix {
        match orientation {
            Orientation::Direct => FeatureMatrix {
                row_labels: self.a_labels.clone(),
                col_labels: self.b_labels.clone(),
                values: self.weights.clone(),
            },
            Orientation::Reverse => FeatureMatrix {
                row_labels: self.b_labels.clone(),
                col_labels: self.a_labels.clone(),
                values: self.weights.t().to_owned(),
            },
        }
    }

    /// Coincidence-similarity network over the row type of `orientation`.
    ///
    /// Nodes without links cannot be compared. They are rejected with
    /// [`NetworkError::IsolatedNode`] unless `isolated` is
    /// [`IsolatedNodes::Drop`], in which case they are left out of the result.
    pub fn coincidence_network(
        &self,
        orientation: Orientation,
        isolated: IsolatedNodes,
    ) -> Result<SimilarityNetwork, NetworkError> {
        let features = self.feature_matrix(orientation);
        let keep: Vec<usize> = (0..features.values.nrows())
            .filter(|&i| features.values.row(i).iter().any(|&w| w > 0.0))
            .collect();
        if keep.len() != features.values.nrows() && isolated == IsolatedNodes::Reject {
            let first = (0..features.values.nrows())
                .find(|i| !keep.contains(i))
                .expect("some row was dropped");
            return Err(NetworkError::IsolatedNode {
                label: features.row_labels[first].clone(),
                orientation,
            });
        }
        let labels: Vec<String> = keep
            .iter()
            .map(|&i| features.row_labels[i].clone())
            .collect();
        let rows = features.values.select(Axis(0), &keep);
        let matrix = match rows.nrows() {
            0 => Array2::zeros((0, 0)),
            1 => Array2::ones((1, 1)),
            _ => similarity::pairwise_similarity(rows.view())?.coincidence(),
        };
        Ok(SimilarityNetwork {
            labels,
            matrix,
            orientation,
            source_features: features.col_labels.len(),
        })
    }

    /// Unipartite projection onto `side`.
    ///
    /// Unweighted: entry (i, j) counts opposite-type nodes linked to both i
    /// and j. Weighted: entry (i, j) is `Σ_k min(w_ik, w_jk)`. The diagonal
    /// is zero.
    pub fn project(&self, side: Side, use_weights: bool) -> ProjectedNetwork {
        let rows = match side {
            Side::A => self.weights.clone(),
            Side::B => self.weights.t().to_owned(),
        };
        let n = rows.nrows();
        let mut matrix = Array2::zeros((n, n));
        for i in 0..n {
            for j in (i + 1)..n {
                let shared: f64 = rows
                    .row(i)
                    .iter()
                    .zip(rows.row(j))
                    .map(|(&x, &y)| {
                        if use_weights {
                            x.min(y)
                        } else if x > 0.0 && y > 0.0 {
                            1.0
                        } else {
                            0.0
                        }
                    })
                    .sum();
                matrix[[i, j]] = shared;
                matrix[[j, i]] = shared;
            }
        }
        ProjectedNetwork {
            labels: self.labels(side).to_vec(),
            matrix,
            side,
            weighted: use_weights,
        }
    }
}

/// Policy for nodes with no links when building similarity networks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IsolatedNodes {
    #[default]
    Reject,
    Drop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub values: Array2<f64>,
}

/// Symmetric coincidence-similarity network over one node type. The unit
/// diagonal is stored but never treated as an edge.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityNetwork {
    pub labels: Vec<String>,
    pub matrix: Array2<f64>,
    pub orientation: Orientation,
    pub source_features: usize,
}

impl SimilarityNetwork {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        Some(self.matrix[[i, j]])
    }

    /// Off-diagonal pairs `(i, j, value)` with `i < j` and `value > 0`, in
    /// row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.labels.len();
        (0..n)
            .flat_map(move |i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, self.matrix[[i, j]]))
            .filter(|&(_, _, v)| v > 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedNetwork {
    pub labels: Vec<String>,
    pub matrix: Array2<f64>,
    pub side: Side,
    pub weighted: bool,
}

/// The 5 A-node, 8 B-node example network used throughout the documentation
/// and tests.
///
/// The symmetric listing of this network gives the A5–B6 link a weight of 3
/// while both the direct and reverse tabulations give 4. The value 4 is
/// used here.
pub fn example_network() -> BipartiteNetwork {
    let weights = ndarray::arr2(&[
        [1.0, 2.0, 0.0, 0.0, 0.0, 0.0, 2.0, 0.0],
        [0.0, 0.0, 0.0, 3.0, 2.0, 0.0, 1.0, 0.0],
        [1.0, 0.0, 4.0, 0.0, 0.0, 2.0, 0.0, 2.0],
        [0.0, 0.0, 0.0, 0.0, 4.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, 2.0, 0.0, 0.0, 4.0, 0.0, 3.0],
    ]);
    BipartiteNetwork::new(numbered("A", 5), numbered("B", 8), weights)
        .expect("example network is valid")
}

/// `prefix1, prefix2, …, prefix{n}`.
pub fn numbered(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;
    use proptest::prelude::*;

    fn net(w: Array2<f64>) -> BipartiteNetwork {
        let (a, b) = w.dim();
        BipartiteNetwork::new(numbered("A", a), numbered("B", b), w).unwrap()
    }

    #[test]
    fn rejects_bad_construction() {
        let w = arr2(&[[1.0]]);
        assert!(matches!(
            BipartiteNetwork::new(vec![], vec!["B".into()], w.clone()),
            Err(NetworkError::NoLabels { side: Side::A })
        ));
        assert!(matches!(
            BipartiteNetwork::new(
                vec!["x".into(), "x".into()],
                vec!["B".into()],
                arr2(&[[1.0], [1.0]])
            ),
            Err(NetworkError::DuplicateLabel { side: Side::A, .. })
        ));
        assert!(matches!(
            BipartiteNetwork::new(vec!["A".into()], vec!["B".into()], arr2(&[[-1.0]])),
            Err(NetworkError::InvalidWeight { .. })
        ));
        assert!(matches!(
            BipartiteNetwork::new(vec!["A".into()], vec!["B".into(), "C".into()], w),
            Err(NetworkError::Shape { .. })
        ));
    }

    #[test]
    fn single_cell_feature_matrix() {
        let n = net(arr2(&[[2.5]]));
        for o in [Orientation::Direct, Orientation::Reverse] {
            assert_eq!(n.feature_matrix(o).values, arr2(&[[2.5]]));
        }
    }

    #[test]
    fn reverse_is_transpose() {
        let n = example_network();
        let d = n.feature_matrix(Orientation::Direct);
        let r = n.feature_matrix(Orientation::Reverse);
        assert_eq!(d.values.t(), r.values);
        assert_eq!(r.row_labels, numbered("B", 8));
        assert_eq!(r.col_labels, numbered("A", 5));
    }

    #[test]
    fn from_symmetric_errors() {
        let labels = numbered("N", 2);
        let zero = Array2::zeros((2, 2));
        let n = BipartiteNetwork::from_symmetric(&zero, 1, &labels).unwrap();
        assert_eq!(n.weights(), &arr2(&[[0.0]]));
        assert!(n
            .coincidence_network(Orientation::Direct, IsolatedNodes::Reject)
            .is_err());

        let labels3 = numbered("N", 3);
        let mut same = Array2::zeros((3, 3));
        same[[0, 1]] = 1.0;
        same[[1, 0]] = 1.0;
        assert!(matches!(
            BipartiteNetwork::from_symmetric(&same, 2, &labels3),
            Err(NetworkError::SameTypeLink { i: 0, j: 1, .. })
        ));

        let mut asym = Array2::zeros((3, 3));
        asym[[0, 2]] = 1.0;
        assert!(matches!(
            BipartiteNetwork::from_symmetric(&asym, 1, &labels3),
            Err(NetworkError::Asymmetric { i: 0, j: 2, .. })
        ));
        assert!(matches!(
            BipartiteNetwork::from_symmetric(&Array2::zeros((2, 3)), 1, &labels),
            Err(NetworkError::NotSquare { .. })
        ));
    }

    #[test]
    fn isolated_nodes() {
        let n = net(arr2(&[[1.0, 0.0], [0.0, 0.0], [1.0, 1.0]]));
        match n.coincidence_network(Orientation::Direct, IsolatedNodes::Reject) {
            Err(NetworkError::IsolatedNode { label, .. }) => assert_eq!(label, "A2"),
            other => panic!("unexpected {other:?}"),
        }
        let s = n
            .coincidence_network(Orientation::Direct, IsolatedNodes::Drop)
            .unwrap();
        assert_eq!(s.labels, vec!["A1", "A3"]);
        assert!((s.matrix[[0, 1]] - 0.5).abs() < 1e-15);
        // B-side has no isolated node.
        assert!(n
            .coincidence_network(Orientation::Reverse, IsolatedNodes::Reject)
            .is_ok());
    }

    #[test]
    fn disjoint_rows_have_zero_similarity() {
        let n = net(arr2(&[[1.0, 0.0, 0.0], [0.0, 3.0, 0.0], [0.0, 0.0, 2.0]]));
        let s = n
            .coincidence_network(Orientation::Direct, IsolatedNodes::Reject)
            .unwrap();
        assert_eq!(s.edges().count(), 0);
        assert_eq!(s.source_features, 3);
    }

    #[test]
    fn projection_examples() {
        let n = example_network();
        let p = n.project(Side::A, false);
        assert_eq!(p.matrix[[0, 1]], 1.0);
        assert_eq!(p.matrix[[0, 0]], 0.0);

        let single = net(arr2(&[[2.0], [1.0]]));
        assert_eq!(single.project(Side::A, true).matrix[[0, 1]], 1.0);
        assert_eq!(single.project(Side::A, false).matrix[[0, 1]], 1.0);

        let disjoint = net(arr2(&[[2.0, 0.0], [0.0, 1.0]]));
        assert_eq!(disjoint.project(Side::A, true).matrix[[0, 1]], 0.0);
    }

    fn small_network() -> impl Strategy<Value = BipartiteNetwork> {
        (1usize..=8, 1usize..=8).prop_flat_map(|(a, b)| {
            prop::collection::vec(prop_oneof![Just(0.0), 0.5f64..4.0], a * b)
                .prop_map(move |w| net(Array2::from_shape_vec((a, b), w).unwrap()))
        })
    }

    proptest! {
        #[test]
        fn symmetric_round_trip(n in small_network()) {
            let labels: Vec<String> = n.a_labels().iter().chain(n.b_labels()).cloned().collect();
            let back = BipartiteNetwork::from_symmetric(&n.to_symmetric(), n.n_a(), &labels).unwrap();
            prop_assert_eq!(back, n);
        }

        #[test]
        fn unweighted_projection_ignores_weights(n in small_network()) {
            for side in [Side::A, Side::B] {
                prop_assert_eq!(n.project(side, false), n.binarize().project(side, false));
            }
        }

        #[test]
        fn coincidence_network_is_bounded_symmetric(n in small_network()) {
            for o in [Orientation::Direct, Orientation::Reverse] {
                let s = n.coincidence_network(o, IsolatedNodes::Drop).unwrap();
                prop_assert_eq!(s.matrix.t(), s.matrix.view());
                prop_assert!(s.matrix.iter().all(|&v| (0.0..=1.0).contains(&v)));
                prop_assert!(s.matrix.diag().iter().all(|&v| v == 1.0));
            }
        }
    }
}
