//! Diagnostic: quoted standard errors must match the realized spread of
//! estimates across seeds (ratio near 1; gross understatement would poison
//! every 3-sigma acceptance band downstream).

use fracperim::geometry::ConvexBody;
use fracperim::math::Vector;
use fracperim::perimeter::{ray_mc, McConfig};

#[test]
fn quoted_sigma_tracks_realized_spread() {
    let body = ConvexBody::cuboid(Vector::zeros(2), Vector::new(&[1.0, 1.0])).unwrap();
    for s in [0.5, 0.75] {
        let mut vals = vec![];
        let mut sigmas = vec![];
        for seed in 0..16u64 {
            let est = ray_mc(&body, s, &McConfig::new(100_000, 1000 + seed)).unwrap();
            vals.push(est.value);
            sigmas.push(est.std_error);
        }
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let spread =
            (vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt();
        let quoted = sigmas.iter().sum::<f64>() / n;
        let ratio = spread / quoted;
        println!("s={s}: spread {spread:.5} quoted {quoted:.5} ratio {ratio:.3}");
        assert!(
            ratio < 1.6,
            "s={s}: quoted sigma understates realized spread by {ratio:.2}x"
        );
    }
}
