use fstest::elliptical::{radial_integral, RadialPower};
use fstest::linalg::mahalanobis_sq;
use fstest::{EllipticalModel, Family, MixtureModel, Seed, SpdMatrix, SquareMatrix};

#[test]
fn squared_distance_mean_matches_radial_integrals() {
    for family in [Family::Gaussian, Family::LightTail100] {
        for d in [1usize, 2, 4, 10] {
            let model = EllipticalModel::standard(family, d).unwrap();
            let data = model.sample(20_000, &mut Seed(11).stream(family.name(), d as u64));
            let zero = vec![0.0; d];
            let sigma = SpdMatrix::identity(d);
            let dist: Vec<f64> = data.rows().map(|y| mahalanobis_sq(y, &zero, &sigma).unwrap()).collect();
            let n = dist.len() as f64;
            let mean = dist.iter().sum::<f64>() / n;
            let sd = (dist.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            let expected = radial_integral(family, d, RadialPower::One).unwrap()
                / radial_integral(family, d, RadialPower::Zero).unwrap();
            assert!(
                (mean - expected).abs() < 4.0 * sd / n.sqrt() + 1e-9,
                "{family:?} d={d}: {mean} vs {expected}"
            );
        }
    }
}

#[test]
fn score_is_gradient_of_log_density() {
    let scatter = SpdMatrix::new(SquareMatrix::from_rows(&[[2.0, 0.3, 0.0], [0.3, 1.0, 0.1], [0.0, 0.1, 0.5]]).unwrap()).unwrap();
    let y = [0.4, -0.7, 0.2];
    for family in Family::ALL {
        let model = EllipticalModel::new(family, vec![0.1, 0.2, -0.3], scatter.clone()).unwrap();
        let score = model.location_score(&y).unwrap();
        let h = 1e-6;
        for k in 0..3 {
            let mut up = model.location().to_vec();
            let mut down = up.clone();
            up[k] += h;
            down[k] -= h;
            let fd = (model.with_location(up).unwrap().log_density(&y).unwrap()
                - model.with_location(down).unwrap().log_density(&y).unwrap())
                / (2.0 * h);
            assert!((fd - score[k]).abs() < 1e-5 * (1.0 + fd.abs()), "{family:?} k={k}: {fd} vs {}", score[k]);
        }
    }
}

#[test]
fn gaussian_sample_moments_follow_scatter() {
    let scatter = SpdMatrix::new(SquareMatrix::from_rows(&[[4.0, 1.0], [1.0, 1.0]]).unwrap()).unwrap();
    let model = EllipticalModel::new(Family::Gaussian, vec![1.0, -2.0], scatter).unwrap();
    let data = model.sample(50_000, &mut Seed(3).stream("moments", 0));
    let cov = fstest::linalg::covariance(&data);
    let n = data.len() as f64;
    let mean: Vec<f64> = (0..2).map(|j| data.rows().map(|r| r[j]).sum::<f64>() / n).collect();
    assert!((mean[0] - 1.0).abs() < 0.05 && (mean[1] + 2.0).abs() < 0.03, "{mean:?}");
    assert!((cov[(0, 0)] - 4.0).abs() < 0.15);
    assert!((cov[(0, 1)] - 1.0).abs() < 0.06);
    assert!((cov[(1, 1)] - 1.0).abs() < 0.04);
}

#[test]
fn mixture_mean_interpolates_components() {
    let base = EllipticalModel::standard(Family::Gaussian, 2).unwrap();
    let mixture = MixtureModel::new(0.5, base, &[5.0, 5.0]).unwrap();
    let data = mixture.sample(40_000, &mut Seed(9).stream("mixture", 0));
    let n = data.len() as f64;
    for j in 0..2 {
        let m = data.rows().map(|r| r[j]).sum::<f64>() / n;
        assert!((m - 2.5).abs() < 0.05, "coordinate {j}: {m}");
    }
}

#[test]
fn sampling_is_reproducible_per_stream() {
    let model = EllipticalModel::standard(Family::Cauchy, 3).unwrap();
    let a = model.sample(100, &mut Seed(1).stream("x", 4));
    let b = model.sample(100, &mut Seed(1).stream("x", 4));
    let c = model.sample(100, &mut Seed(1).stream("x", 5));
    assert_eq!(a, b);
    assert_ne!(a, c);
}
