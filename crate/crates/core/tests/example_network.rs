//! The 5x8 example network checked against independent oracles: exact
//! rational evaluation of the indices and brute-force set enumeration.

use bipartite_coincidence::bipartite::{example_network, numbered};
use bipartite_coincidence::{BipartiteNetwork, IsolatedNodes, Orientation, Side};
use ndarray::{arr2, Array2};

/// Direct tabulation (A rows, B columns).
fn direct_rows() -> Array2<f64> {
    arr2(&[
        [1.0, 2.0, 0.0, 0.0, 0.0, 0.0, 2.0, 0.0],
        [0.0, 0.0, 0.0, 3.0, 2.0, 0.0, 1.0, 0.0],
        [1.0, 0.0, 4.0, 0.0, 0.0, 2.0, 0.0, 2.0],
        [0.0, 0.0, 0.0, 0.0, 4.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, 2.0, 0.0, 0.0, 4.0, 0.0, 3.0],
    ])
}

/// Reverse tabulation (B rows, A columns), typed in independently.
fn reverse_rows() -> Array2<f64> {
    arr2(&[
        [1.0, 0.0, 1.0, 0.0, 0.0],
        [2.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 4.0, 0.0, 2.0],
        [0.0, 3.0, 0.0, 0.0, 0.0],
        [0.0, 2.0, 0.0, 4.0, 0.0],
        [0.0, 0.0, 2.0, 0.0, 4.0],
        [2.0, 1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 2.0, 1.0, 3.0],
    ])
}

/// Full 13x13 symmetric form. `a5_b6` is 3 in the symmetric listing and 4
/// in both tabulations.
fn symmetric_form(a5_b6: f64) -> Array2<f64> {
    let rows: [[f64; 13]; 13] = [
        [0., 0., 0., 0., 0., 1., 2., 0., 0., 0., 0., 2., 0.],
        [0., 0., 0., 0., 0., 0., 0., 0., 3., 2., 0., 1., 0.],
        [0., 0., 0., 0., 0., 1., 0., 4., 0., 0., 2., 0., 2.],
        [0., 0., 0., 0., 0., 0., 0., 0., 0., 4., 0., 0., 1.],
        [0., 0., 0., 0., 0., 0., 0., 2., 0., 0., a5_b6, 0., 3.],
        [1., 0., 1., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0.],
        [2., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0.],
        [0., 0., 4., 0., 2., 0., 0., 0., 0., 0., 0., 0., 0.],
        [0., 3., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0.],
        [0., 2., 0., 4., 0., 0., 0., 0., 0., 0., 0., 0., 0.],
        [0., 0., 2., 0., a5_b6, 0., 0., 0., 0., 0., 0., 0., 0.],
        [2., 1., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0.],
        [0., 0., 2., 1., 3., 0., 0., 0., 0., 0., 0., 0., 0.],
    ];
    Array2::from_shape_fn((13, 13), |(i, j)| rows[i][j])
}

fn all_labels() -> Vec<String> {
    numbered("A", 5)
        .into_iter()
        .chain(numbered("B", 8))
        .collect()
}

#[test]
fn tables_agree_under_the_a5_b6_convention() {
    let net = BipartiteNetwork::from_symmetric(&symmetric_form(4.0), 5, &all_labels()).unwrap();
    assert_eq!(net.weights(), &direct_rows());
    assert_eq!(
        net.feature_matrix(Orientation::Reverse).values,
        reverse_rows()
    );
    assert_eq!(net, example_network());
    assert_eq!(net.to_symmetric(), symmetric_form(4.0));

    let literal = BipartiteNetwork::from_symmetric(&symmetric_form(3.0), 5, &all_labels()).unwrap();
    let differing: Vec<(usize, usize)> = literal
        .weights()
        .indexed_iter()
        .filter(|(pos, &w)| w != direct_rows()[*pos])
        .map(|(pos, _)| pos)
        .collect();
    assert_eq!(differing, vec![(4, 5)]);
}

/// Exact J, I, C as reduced fractions from integer rows.
fn rational_indices(x: &[i64], y: &[i64]) -> ((i64, i64), (i64, i64), (i64, i64)) {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }
    fn reduce(n: i64, d: i64) -> (i64, i64) {
        let g = gcd(n, d).max(1);
        (n / g, d / g)
    }
    let mut min_sum = 0;
    let mut max_sum = 0;
    for (&a, &b) in x.iter().zip(y) {
        min_sum += if a < b { a } else { b };
        max_sum += if a > b { a } else { b };
    }
    let sx: i64 = x.iter().sum();
    let sy: i64 = y.iter().sum();
    let lighter = if sx < sy { sx } else { sy };
    (
        reduce(min_sum, max_sum),
        reduce(min_sum, lighter),
        reduce(min_sum * min_sum, max_sum * lighter),
    )
}

fn integer_rows(m: &Array2<f64>) -> Vec<Vec<i64>> {
    m.outer_iter()
        .map(|r| r.iter().map(|&v| v as i64).collect())
        .collect()
}

#[test]
fn hand_evaluated_pairs() {
    let a = integer_rows(&direct_rows());
    let (j, i, c) = rational_indices(&a[2], &a[4]);
    assert_eq!((j, i, c), ((1, 2), (2, 3), (1, 3)));

    let b = integer_rows(&reverse_rows());
    let (j, i, c) = rational_indices(&b[2], &b[5]);
    assert_eq!((j, i, c), ((1, 2), (2, 3), (1, 3)));
}

#[test]
fn coincidence_networks_match_rational_oracle() {
    let net = example_network();
    for (orientation, table) in [
        (Orientation::Direct, direct_rows()),
        (Orientation::Reverse, reverse_rows()),
    ] {
        let sim = net
            .coincidence_network(orientation, IsolatedNodes::Reject)
            .unwrap();
        let rows = integer_rows(&table);
        assert_eq!(sim.len(), rows.len());
        for p in 0..rows.len() {
            assert_eq!(sim.matrix[[p, p]], 1.0);
            for q in 0..rows.len() {
                if p != q {
                    let (_, _, (num, den)) = rational_indices(&rows[p], &rows[q]);
                    let expected = num as f64 / den as f64;
                    assert!(
                        (sim.matrix[[p, q]] - expected).abs() <= 1e-15,
                        "{orientation} ({p},{q})"
                    );
                }
            }
        }
    }

    let direct = net
        .coincidence_network(Orientation::Direct, IsolatedNodes::Reject)
        .unwrap();
    let a35 = direct.get("A3", "A5").unwrap();
    let strongest = direct.edges().map(|(_, _, v)| v).fold(0.0, f64::max);
    assert_eq!(a35, strongest);
    assert!((direct.get("A3", "A5").unwrap() - 1.0 / 3.0).abs() < 1e-15);
    let reverse = net
        .coincidence_network(Orientation::Reverse, IsolatedNodes::Reject)
        .unwrap();
    assert!((reverse.get("B3", "B6").unwrap() - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(reverse.source_features, 5);
}

#[test]
fn projections_match_common_neighbour_enumeration() {
    let net = example_network();
    let p = net.project(Side::A, false);
    assert_eq!(p.matrix[[0, 1]], 1.0);

    // Brute force over 0/1 networks up to 8x8 from a fixed xorshift stream.
    let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    for _ in 0..200 {
        let n_a = 1 + (next() % 8) as usize;
        let n_b = 1 + (next() % 8) as usize;
        let w = Array2::from_shape_fn((n_a, n_b), |_| (next() % 2) as f64);
        let net = BipartiteNetwork::new(numbered("A", n_a), numbered("B", n_b), w.clone()).unwrap();
        let neighbours_a: Vec<Vec<usize>> = (0..n_a)
            .map(|i| (0..n_b).filter(|&k| w[[i, k]] > 0.0).collect())
            .collect();
        let proj = net.project(Side::A, false);
        for i in 0..n_a {
            for j in 0..n_a {
                let expected = if i == j {
                    0
                } else {
                    neighbours_a[i]
                        .iter()
                        .filter(|k| neighbours_a[j].contains(k))
                        .count()
                };
                assert_eq!(proj.matrix[[i, j]], expected as f64);
            }
        }
        let proj_b = net.project(Side::B, false);
        for k in 0..n_b {
            for l in 0..n_b {
                let expected = if k == l {
                    0
                } else {
                    (0..n_a)
                        .filter(|&i| w[[i, k]] > 0.0 && w[[i, l]] > 0.0)
                        .count()
                };
                assert_eq!(proj_b.matrix[[k, l]], expected as f64);
            }
        }
    }
}
