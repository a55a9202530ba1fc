use jdld::data_io::generate_quadratic_mixture_data;
use jdld::potentials::{gradient_check, Cross, Dunes, EqualModes, Potential, QuadraticMixture, StdGaussian};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn catalog() -> Vec<Box<dyn Potential>> {
    let data = generate_quadratic_mixture_data(0.0, 1.0, 100, 42).unwrap();
    let mut out: Vec<Box<dyn Potential>> = Vec::new();
    for alpha in [-2, -1, 0, 1] {
        out.push(Box::new(Dunes::new(alpha, 0.02).unwrap()));
    }
    out.push(Box::new(Cross::new(0.01).unwrap()));
    out.push(Box::new(QuadraticMixture::new(data).unwrap()));
    for n in [1, 2, 8, 16, 32] {
        out.push(Box::new(EqualModes::new(n, 6.0, 1.0).unwrap()));
    }
    out.push(Box::new(StdGaussian::new(1).unwrap()));
    out.push(Box::new(StdGaussian::new(3).unwrap()));
    out
}

#[test]
fn analytic_gradients_match_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for p in catalog() {
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let x: Vec<f64> = (0..p.dim()).map(|_| rng.random_range(-5.0..5.0)).collect();
            worst = worst.max(gradient_check(p.as_ref(), &x, 1e-5));
        }
        assert!(worst < 1e-5, "{}: relative gradient error {worst:e}", p.name());
    }
}

#[test]
fn log_densities_are_finite() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for p in catalog() {
        for _ in 0..200 {
            let x: Vec<f64> = (0..p.dim()).map(|_| rng.random_range(-50.0..50.0)).collect();
            assert!(p.log_density(&x).is_finite(), "{} at {x:?}", p.name());
        }
    }
}

#[test]
fn dunes_and_cross_peak_at_origin() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cross = Cross::new(0.01).unwrap();
    assert_eq!(cross.log_density(&[0.0, 0.0]), 0.0);
    for alpha in [-2, -1, 0, 1] {
        let d = Dunes::new(alpha, 0.02).unwrap();
        assert_eq!(d.log_density(&[0.0]), 0.0);
        for _ in 0..1000 {
            let x: f64 = rng.random_range(-20.0..20.0);
            assert!(d.log_density(&[x]) <= 0.0);
            if x != 0.0 {
                assert!(d.log_density(&[x]) < 0.0);
            }
        }
    }
    for _ in 0..1000 {
        let p = [rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0)];
        assert!(cross.log_density(&p) < 0.0);
    }
}

#[test]
fn single_mode_is_a_standard_gaussian_up_to_a_constant() {
    let one = EqualModes::new(1, 1.0, 1.0).unwrap();
    let g = StdGaussian::new(1).unwrap();
    let offset = one.log_density(&[0.0]) - g.log_density(&[0.0]);
    for x in [-7.0, -1.3, 0.2, 4.4, 11.0] {
        let d = one.log_density(&[x]) - g.log_density(&[x]);
        assert!((d - offset).abs() < 1e-12);
    }
}

#[test]
fn quadratic_mixture_symmetries() {
    let data = generate_quadratic_mixture_data(0.0, 1.0, 100, 42).unwrap();
    let q = QuadraticMixture::new(data).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let t0: f64 = rng.random_range(-2.0..2.0);
        let t1: f64 = rng.random_range(-2.0..2.0);
        // component means θ0² and (θ0+θ1)² are unchanged by θ1 → −2θ0 − θ1,
        // so the likelihood is too; the N(0,1) prior on θ1 is not.
        let reflected = [t0, -2.0 * t0 - t1];
        assert!((q.log_likelihood(&[t0, t1]) - q.log_likelihood(&reflected)).abs() < 1e-12);
        // full posterior is symmetric under θ → −θ
        assert!((q.log_density(&[t0, t1]) - q.log_density(&[-t0, -t1])).abs() < 1e-12);
    }
}

#[test]
fn quadratic_mixture_grid_has_four_lobes() {
    let data = generate_quadratic_mixture_data(0.0, 1.0, 100, 42).unwrap();
    let q = QuadraticMixture::new(data).unwrap();
    let n = 200;
    let coord = |i: usize| -2.0 + 4.0 * (i as f64 + 0.5) / n as f64;
    let grid: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| q.log_density(&[coord(i), coord(j)])).collect())
        .collect();

    // the global maximum sits on a lobe with θ0 + θ1 ≈ ±1
    let (mut bi, mut bj) = (0, 0);
    for i in 0..n {
        for j in 0..n {
            if grid[i][j] > grid[bi][bj] {
                (bi, bj) = (i, j);
            }
        }
    }
    let (t0, t1) = (coord(bi), coord(bj));
    assert!(((t0 + t1).abs() - 1.0).abs() < 0.1, "argmax θ0+θ1 = {}", t0 + t1);

    // strict local maxima of the grid, grouped into lobes
    let mut lobes: Vec<(f64, f64)> = Vec::new();
    for i in 1..n - 1 {
        for j in 1..n - 1 {
            let v = grid[i][j];
            let is_max = (-1i32..=1)
                .flat_map(|di| (-1i32..=1).map(move |dj| (di, dj)))
                .filter(|&(di, dj)| (di, dj) != (0, 0))
                .all(|(di, dj)| v > grid[(i as i32 + di) as usize][(j as i32 + dj) as usize]);
            let (x, y) = (coord(i), coord(j));
            if is_max && !lobes.iter().any(|&(a, b)| (x - a).hypot(y - b) < 0.2) {
                lobes.push((x, y));
            }
        }
    }
    assert_eq!(lobes.len(), 4, "{lobes:?}");
    for &(x, y) in &lobes {
        assert!(lobes.iter().any(|&(a, b)| (x + a).hypot(y + b) < 0.2), "{lobes:?}");
    }
}

#[test]
fn eight_mode_mixture_variance() {
    let p = EqualModes::new(8, 6.0, 1.0).unwrap();
    let means = p.means();
    let mean_of_means = means.iter().sum::<f64>() / 8.0;
    let between = means.iter().map(|m| (m - mean_of_means).powi(2)).sum::<f64>() / 8.0;
    assert!(mean_of_means.abs() < 1e-12);
    assert!((1.0 + between - 190.0).abs() < 1e-9);

    // direct mixture sampling
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 1_000_000;
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let k = rng.random_range(0..8);
        let z: f64 = rng.sample(StandardNormal);
        let x = means[k] + p.width() * z;
        s += x;
        s2 += x * x;
    }
    let mean = s / n as f64;
    let var = s2 / n as f64 - mean * mean;
    assert!(mean.abs() < 0.05, "{mean}");
    assert!((var - 190.0).abs() < 1.0, "{var}");
}

#[test]
fn potentials_are_shareable_across_threads() {
    let p = Cross::new(0.01).unwrap();
    let values: Vec<f64> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..4)
            .map(|k| {
                let p = &p;
                s.spawn(move || p.log_density(&[k as f64, 1.0]))
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    for (k, v) in values.iter().enumerate() {
        assert_eq!(*v, p.log_density(&[k as f64, 1.0]));
    }
}
