use equinet::numerics::max_abs_diff;
use equinet::tasks::{self, center_of_mass, PointCloud};
use equinet::{rng, Matrix};
use itertools::Itertools;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn center_of_mass_commutes_with_invertible_maps(
        entries in prop::collection::vec(-2.0..2.0f64, 9),
        coords in prop::collection::vec(-5.0..5.0f64, 3..24),
    ) {
        let x = Matrix::new(3, 3, entries).unwrap();
        let inv = x.inverse();
        prop_assume!(inv.is_some());
        let cond = x.frobenius_norm() * inv.unwrap().frobenius_norm();
        prop_assume!(cond < 100.0);
        let usable = coords.len() / 3 * 3;
        let pc = PointCloud::from_flat(&coords[..usable]).unwrap();
        let moved: Vec<[f64; 3]> = pc.points().iter().map(|p| {
            let q = x.matvec(p);
            [q[0], q[1], q[2]]
        }).collect();
        let lhs = center_of_mass(&PointCloud::new(moved).unwrap()).unwrap();
        let rhs = x.matvec(&center_of_mass(&pc).unwrap());
        let scale = 1.0 + x.max_abs() * pc.points().iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(max_abs_diff(&lhs, &rhs) / scale < 1e-12);
    }
}

#[test]
fn trained_deep_sets_net_ignores_point_order() {
    for m in 2..=5 {
        let train = tasks::com_dataset(m, 64, 10 + m as u64).unwrap();
        let net = tasks::com_architecture(m).build(m as u64).unwrap();
        let (trained, history) = net.train(&train, 200, 0.5).unwrap();
        assert!(history.last().unwrap() < history.first().unwrap());
        let mut r = rng::seeded(m as u64);
        for _ in 0..3 {
            let cloud = rng::uniform_vec(&mut r, 3 * m, -1.0, 1.0);
            let base = trained.forward(&cloud).unwrap();
            for perm in (0..m).permutations(m) {
                let permuted: Vec<f64> = perm.iter().flat_map(|&p| cloud[3 * p..3 * p + 3].to_vec()).collect();
                let out = trained.forward(&permuted).unwrap();
                assert!(max_abs_diff(&out, &base) < 1e-10, "m = {m}, {perm:?}");
            }
        }
    }
}
