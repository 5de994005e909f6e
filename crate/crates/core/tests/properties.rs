use std::sync::OnceLock;

use nalgebra::DMatrix;
use proptest::prelude::*;

use pdegp::design::{build_training, halton, DesignSpec, Provenance, TrainingSet};
use pdegp::emulator::{ConditionedGP, EmulatorModel, Family};
use pdegp::kernels::{Kernel, KernelFamily, KernelHyper};
use pdegp::metrics::{hellinger, GridDensity};
use pdegp::pde::{DiffusionField, ObservationOperator, PdeProblem, ThetaBox};
use pdegp::posterior::SmoothedUniformPrior;

fn min_eig_ratio(m: &DMatrix<f64>) -> f64 {
    let ev = ((m + m.transpose()) * 0.5).symmetric_eigenvalues();
    ev.min() / ev.max().abs().max(1e-300)
}

fn kernel_family() -> impl Strategy<Value = KernelFamily> {
    prop_oneof![Just(KernelFamily::SquaredExponential), Just(KernelFamily::Matern52)]
}

fn synthetic_training(thetas: Vec<Vec<f64>>, d_y: usize) -> TrainingSet {
    let gx = thetas
        .iter()
        .map(|t| (0..d_y).map(|j| (t[0] * (j + 1) as f64).sin() + t.iter().sum::<f64>()).collect())
        .collect();
    TrainingSet {
        theta: thetas,
        gx,
        theta_bar: vec![],
        xf: vec![],
        xg: vec![],
        f_vals: vec![],
        g_vals: vec![],
        provenance: Provenance { design: "synthetic".into(), halton_skip: 0, mesh_n: 0 },
    }
}

fn pde_emulator() -> &'static (PdeProblem, ConditionedGP) {
    static GP: OnceLock<(PdeProblem, ConditionedGP)> = OnceLock::new();
    GP.get_or_init(|| {
        let p = PdeProblem::linear_source_1d(DiffusionField::four_cell());
        let obs = ObservationOperator::uniform_points(6);
        let t = build_training(&p, &obs, &DesignSpec { n: 4, n_bar: 10, d_f: 10, d_g: 2, mesh_n: 256 }).unwrap();
        let m = EmulatorModel::new(
            Family::PdeConstrained,
            Kernel::squared_exponential(0.1, 1.0, 2).unwrap(),
            Some(Kernel::matern52(1.0, 0.3, 1).unwrap()),
        );
        let gp = ConditionedGP::condition(&m, &p, &obs, &t).unwrap();
        (p, gp)
    })
}

fn gaussian_grid(mu: f64, sd: f64) -> GridDensity {
    let axis: Vec<f64> = (0..=400).map(|i| -6.0 + 12.0 * i as f64 / 400.0).collect();
    let v = axis.iter().map(|x| (-0.5 * ((x - mu) / sd).powi(2)).exp() + 1e-300).collect();
    let mut g = GridDensity::new(vec![axis], v).unwrap();
    g.normalize().unwrap();
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gram_matrices_are_psd(
        family in kernel_family(),
        var in 0.01f64..10.0,
        ls in 0.05f64..3.0,
        pts in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 2), 2..12),
    ) {
        let k = Kernel::new(family, KernelHyper::new(var, ls).unwrap(), 2).unwrap();
        let g = k.gram(&pts);
        prop_assert!((&g - g.transpose()).amax() < 1e-14 * var);
        prop_assert!(min_eig_ratio(&g) > -1e-10);
    }

    #[test]
    fn separable_predictive_covariance_is_psd(
        family in kernel_family(),
        ls in 0.1f64..2.0,
        train in prop::collection::vec(-1.0f64..1.0, 1..7),
        a in -1.5f64..1.5,
        b in -1.5f64..1.5,
    ) {
        let p = PdeProblem::constant_diffusion();
        let obs = ObservationOperator::uniform_points(4);
        let t = synthetic_training(train.iter().map(|x| vec![*x]).collect(), 4);
        let k_p = Kernel::new(family, KernelHyper::new(0.5, ls).unwrap(), 1).unwrap();
        let k_s = Kernel::squared_exponential(1.0, 0.3, 1).unwrap();
        for m in [
            EmulatorModel::new(Family::Baseline, k_p.clone(), None),
            EmulatorModel::new(Family::SpatiallyCorrelated, k_p.clone(), Some(k_s.clone())),
        ] {
            let gp = ConditionedGP::condition(&m, &p, &obs, &t).unwrap();
            let d = gp.d_out();
            let mut joint = DMatrix::zeros(2 * d, 2 * d);
            joint.view_mut((0, 0), (d, d)).copy_from(&gp.predict_cov(&[a], &[a]).unwrap());
            joint.view_mut((d, d), (d, d)).copy_from(&gp.predict_cov(&[b], &[b]).unwrap());
            let c = gp.predict_cov(&[a], &[b]).unwrap();
            joint.view_mut((0, d), (d, d)).copy_from(&c);
            joint.view_mut((d, 0), (d, d)).copy_from(&c.transpose());
            let scale = m.k_p.variance() * gp.output_cov().amax();
            let ev = ((&joint + joint.transpose()) * 0.5).symmetric_eigenvalues();
            prop_assert!(ev.min() > -1e-8 * scale, "{:?}: min eigenvalue {}", m.family, ev.min());
        }
    }

    #[test]
    fn pde_constrained_variance_is_psd(t1 in -1.0f64..1.0, t2 in -1.0f64..1.0) {
        let (_, gp) = pde_emulator();
        let c = gp.predict_cov(&[t1, t2], &[t1, t2]).unwrap();
        let ev = ((&c + c.transpose()) * 0.5).symmetric_eigenvalues();
        prop_assert!(ev.min() > -1e-9 * gp.model().k_p.variance(), "min eigenvalue {}", ev.min());
    }

    #[test]
    fn hellinger_is_a_bounded_symmetric_metric(
        m1 in -2.0f64..2.0, s1 in 0.3f64..1.5,
        m2 in -2.0f64..2.0, s2 in 0.3f64..1.5,
        m3 in -2.0f64..2.0, s3 in 0.3f64..1.5,
    ) {
        let (p, q, r) = (gaussian_grid(m1, s1), gaussian_grid(m2, s2), gaussian_grid(m3, s3));
        let pq = hellinger(&p, &q).unwrap();
        let qp = hellinger(&q, &p).unwrap();
        prop_assert!((pq - qp).abs() < 1e-14);
        prop_assert!((0.0..=1.0).contains(&pq));
        prop_assert!(hellinger(&p, &p).unwrap() < 1e-7);
        let pr = hellinger(&p, &r).unwrap();
        let rq = hellinger(&r, &q).unwrap();
        prop_assert!(pq <= pr + rq + 1e-12);
    }

    #[test]
    fn halton_points_lie_in_the_unit_cube(n in 1usize..200, dim in 1usize..12, skip in 0usize..1000) {
        let pts = halton(n, dim, skip).unwrap();
        prop_assert_eq!(pts.len(), n);
        prop_assert!(pts.iter().flatten().all(|x| (0.0..1.0).contains(x)));
    }

    #[test]
    fn smoothed_prior_is_flat_inside_and_pulls_back_outside(
        theta in prop::collection::vec(-3.0f64..3.0, 3),
        lambda in 1e-4f64..1e-1,
    ) {
        let pr = SmoothedUniformPrior::new(ThetaBox::symmetric(3, 1.0), lambda).unwrap();
        let lp = pr.log_density(&theta);
        let g = pr.grad(&theta);
        prop_assert!(lp <= 0.0);
        for (t, gk) in theta.iter().zip(&g) {
            if t.abs() <= 1.0 {
                prop_assert_eq!(*gk, 0.0);
            } else {
                prop_assert!(gk * t < 0.0);
            }
        }
        prop_assert_eq!(lp == 0.0, theta.iter().all(|t| t.abs() <= 1.0));
    }
}
