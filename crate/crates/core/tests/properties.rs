//! Property-based invariants: structural identities that must hold for
//! arbitrary inputs, not just the hand-picked cases.

use proptest::prelude::*;

use eddylab::mesh::{inner_product, BoundarySplit, Grid, StateVector};
use eddylab::ops::BlockOperatorA;
use eddylab::scenarios::CoilLoop;
use eddylab::sparse::SparseOperator;
use eddylab::time::{check_discrete_d0_positivity, rho_tau, Trajectory};
use eddylab::{mesh, Error};

fn traj_strategy(ne: usize) -> impl Strategy<Value = Trajectory> {
    (
        0.01..0.5f64,                    // tau
        0.1..3.0f64,                     // rho
        0i64..3,                         // start index
        proptest::collection::vec(proptest::collection::vec(-1.0..1.0f64, ne), 1..25),
    )
        .prop_map(|(tau, rho, start, values)| {
            let states = values
                .into_iter()
                .map(|e| StateVector { e, h: vec![] })
                .collect();
            Trajectory::new(tau, start, rho, states).unwrap()
        })
}

fn split_strategy() -> impl Strategy<Value = BoundarySplit> {
    prop_oneof![
        Just(BoundarySplit::AllGamma1),
        Just(BoundarySplit::AllGamma2),
        proptest::collection::vec(any::<bool>(), 6).prop_map(|v| BoundarySplit::BoxSides {
            gamma2_sides: [v[0], v[1], v[2], v[3], v[4], v[5]],
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// d0 and its causal inverse are exact mutual inverses.
    #[test]
    fn d0_inverse_pair_identity(traj in traj_strategy(3)) {
        let round1 = traj.d0_apply().unwrap().d0_inverse_apply();
        let round2 = traj.d0_inverse_apply().d0_apply().unwrap();
        let scale = traj.weighted_norm(1.0).max(1e-30);
        prop_assert!(traj.sub(&round1).unwrap().weighted_norm(1.0) <= 1e-11 * scale);
        prop_assert!(traj.sub(&round2).unwrap().weighted_norm(1.0) <= 1e-11 * scale);
    }

    /// The accretivity quotient never drops below the discrete constant,
    /// for any zero-history trajectory whatsoever.
    #[test]
    fn accretivity_is_unconditional(traj in traj_strategy(2)) {
        if traj.weighted_norm(1.0) > 0.0 {
            let r = check_discrete_d0_positivity(&traj, 1.0).unwrap();
            let bound = rho_tau(traj.rho(), traj.tau());
            prop_assert!(r >= bound * (1.0 - 1e-12), "r = {r}, bound = {bound}");
        }
    }

    /// Weighted norm: absolute homogeneity and the triangle inequality.
    #[test]
    fn weighted_norm_is_a_norm(
        traj in traj_strategy(3),
        other_vals in proptest::collection::vec(proptest::collection::vec(-1.0..1.0f64, 3), 1..25),
        c in -3.0..3.0f64,
    ) {
        let mut scaled = traj.clone();
        for i in 0..scaled.len() {
            scaled.state_mut(i).scale(c);
        }
        let n = traj.weighted_norm(0.5);
        prop_assert!((scaled.weighted_norm(0.5) - c.abs() * n).abs() <= 1e-12 * (1.0 + n));

        // build a second trajectory on the same window for the triangle bound
        let other = Trajectory::from_fn(traj.tau(), traj.start_index(), traj.rho(), traj.len(), |i, _| {
            let row = &other_vals[(i - traj.start_index()) as usize % other_vals.len()];
            StateVector { e: row.clone(), h: vec![] }
        }).unwrap();
        let mut sum = traj.clone();
        sum.add_scaled(1.0, &other).unwrap();
        prop_assert!(sum.weighted_norm(0.5) <= n + other.weighted_norm(0.5) + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Discrete inner product: symmetric, bilinear, positive definite.
    #[test]
    fn inner_product_is_spd(
        seed in any::<u64>(),
        h in 0.1..2.0f64,
    ) {
        let grid = Grid::full([2, 2, 2], h, BoundarySplit::AllGamma2).unwrap();
        let (ne, nh) = (grid.e_space().count(), grid.h_space().count());
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        let mut rv = || StateVector {
            e: (0..ne).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            h: (0..nh).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        };
        let (x, y, z) = (rv(), rv(), rv());
        let xy = inner_product(&x, &y, &grid).unwrap();
        let yx = inner_product(&y, &x, &grid).unwrap();
        prop_assert!((xy - yx).abs() <= 1e-13 * (1.0 + xy.abs()));
        let mut xz = x.clone();
        xz.add_scaled(2.0, &z);
        let lhs = inner_product(&xz, &y, &grid).unwrap();
        let rhs = xy + 2.0 * inner_product(&z, &y, &grid).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        if x.dot_euclid(&x) > 0.0 {
            prop_assert!(inner_product(&x, &x, &grid).unwrap() > 0.0);
        }
    }

    /// Grid construction on arbitrary boxes and splits: the index map is a
    /// deterministic bijection, edge counts respect the closed formulas, and
    /// the electric condition only ever removes edges.
    #[test]
    fn grid_counts_and_determinism(
        nx in 1usize..4,
        ny in 1usize..4,
        nz in 1usize..4,
        split in split_strategy(),
    ) {
        let g = Grid::full([nx, ny, nz], 0.5, split.clone()).unwrap();
        let g2 = Grid::full([nx, ny, nz], 0.5, split).unwrap();
        prop_assert_eq!(g.e_space().locations(), g2.e_space().locations());
        let full_edges = nx * (ny + 1) * (nz + 1) + (nx + 1) * ny * (nz + 1) + (nx + 1) * (ny + 1) * nz;
        let full_faces = (nx + 1) * ny * nz + nx * (ny + 1) * nz + nx * ny * (nz + 1);
        prop_assert!(g.e_space().count() <= full_edges);
        prop_assert_eq!(g.h_space().count(), full_faces);
        if g.boundary_face_counts().0 == 0 {
            prop_assert_eq!(g.e_space().count(), full_edges);
        }
        // bijectivity
        for (idx, &loc) in g.e_space().locations().iter().enumerate() {
            prop_assert_eq!(g.e_space().index_of(loc), Some(idx));
        }
    }

    /// Skew-adjointness of the block operator holds for arbitrary irregular
    /// masks and splits (it is a transpose by construction).
    #[test]
    fn skewness_on_arbitrary_masks(
        mask_bits in proptest::collection::vec(any::<bool>(), 8),
        split in split_strategy(),
        seed in any::<u64>(),
    ) {
        prop_assume!(mask_bits.iter().any(|&b| b));
        let grid = match Grid::build([2, 2, 2], 0.5, mask_bits, split) {
            Ok(g) => g,
            Err(Error::Domain(_)) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
        };
        // every retained DOF touches the masked domain
        for &loc in grid.e_space().locations() {
            prop_assert!(!grid.masked_cells_of_edge(loc).is_empty());
        }
        for &loc in grid.h_space().locations() {
            prop_assert!(!grid.masked_cells_of_face(loc).is_empty());
        }
        let a = BlockOperatorA::from_grid(&grid);
        let (ne, nh) = (grid.e_space().count(), grid.h_space().count());
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        let mut rv = || StateVector {
            e: (0..ne).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            h: (0..nh).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        };
        let (u, v) = (rv(), rv());
        let au = a.apply(&u).unwrap();
        let av = a.apply(&v).unwrap();
        let lhs = inner_product(&au, &v, &grid).unwrap();
        let rhs = inner_product(&u, &av, &grid).unwrap();
        let scale = au.space_norm(grid.measure()) * v.space_norm(grid.measure())
            + u.space_norm(grid.measure()) * av.space_norm(grid.measure());
        prop_assert!((lhs + rhs).abs() <= 1e-13 * (scale + 1e-300));
    }

    /// Sparse apply agrees with the dense matrix built from the same triples,
    /// and transposing twice is the identity on entries.
    #[test]
    fn sparse_apply_matches_dense(
        triples in proptest::collection::vec((0usize..6, 0usize..5, -2.0..2.0f64), 0..30),
        x in proptest::collection::vec(-1.0..1.0f64, 5),
    ) {
        let rows = mesh::SpaceInfo { kind: mesh::DofKind::Combined, count: 6 };
        let cols = mesh::SpaceInfo { kind: mesh::DofKind::Combined, count: 5 };
        let a = SparseOperator::from_triples(rows, cols, triples.clone()).unwrap();
        let mut dense = [[0.0f64; 5]; 6];
        for (r, c, v) in triples {
            dense[r][c] += v;
        }
        let y = a.apply(&x).unwrap();
        for (r, yr) in y.iter().enumerate() {
            let expect: f64 = (0..5).map(|c| dense[r][c] * x[c]).sum();
            prop_assert!((yr - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
        }
        let att = a.transpose().transpose();
        prop_assert_eq!(
            a.iter().collect::<Vec<_>>(),
            att.iter().collect::<Vec<_>>()
        );
    }

    /// Every generated rectangular coil path is a closed loop.
    #[test]
    fn coil_rectangles_close(
        i0 in 0usize..4, di in 1usize..5,
        j0 in 0usize..4, dj in 1usize..5,
        layer in 0usize..6,
    ) {
        let profile = eddylab::scenarios::TimeProfile::Step { amplitude: 1.0, onset: 0.0 };
        let coil = CoilLoop::rectangle(i0, i0 + di, j0, j0 + dj, layer, 1.0, profile).unwrap();
        prop_assert_eq!(coil.edges.len(), 2 * (di + dj));
        coil.validate_closed().unwrap();
    }

    /// Time profiles vanish up to their onset.
    #[test]
    fn profiles_are_causal(
        onset in 0.0..2.0f64,
        amplitude in -3.0..3.0f64,
        width in 0.01..1.0f64,
        t in 0.0..2.0f64,
    ) {
        use eddylab::scenarios::TimeProfile;
        let profiles = [
            TimeProfile::SmoothRamp { amplitude, onset, width },
            TimeProfile::SineBurst { amplitude, onset, frequency: 1.0 / width },
            TimeProfile::Step { amplitude, onset },
        ];
        for p in profiles {
            if t <= onset {
                prop_assert_eq!(p.value(t), 0.0);
            }
        }
    }
}
