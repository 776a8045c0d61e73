use rand::Rng;
use rand_distr::{Cauchy, Distribution};

const MAX_REJECTIONS: usize = 1_000_000;

/// Number of spins to flip at temperature `t`.
pub fn sample_flip_count<R: Rng + ?Sized>(t: f64, alpha: f64, n: usize, rng: &mut R) -> usize {
    sample_flip_count_counted(t, alpha, n, rng).0
}

/// As [`sample_flip_count`], also returning how many draws were rejected.
///
/// Draws `x ~ Cauchy(0, α·t)` until `round(|x|) < n`, then maps `0 → 1` and
/// `m > n/2 → n − m`. After a million rejections the draw falls back to the
/// inverse CDF of the truncated folded Cauchy, which has the same law.
pub fn sample_flip_count_counted<R: Rng + ?Sized>(t: f64, alpha: f64, n: usize, rng: &mut R) -> (usize, usize) {
    let scale = alpha * t;
    if !(scale > 0.0 && scale.is_finite()) || n < 2 {
        return (1, 0);
    }
    let cauchy = Cauchy::new(0.0, scale).expect("positive finite scale");
    let mut rejected = 0;
    let m = loop {
        let x: f64 = cauchy.sample(rng);
        let m = x.abs().round();
        if m < n as f64 {
            break m as usize;
        }
        rejected += 1;
        if rejected >= MAX_REJECTIONS {
            let limit = (n as f64 - 0.5) / scale;
            let u: f64 = rng.random();
            break (scale * (u * limit.atan()).tan()).round().min(n as f64 - 1.0) as usize;
        }
    };
    let m = if m == 0 {
        1
    } else if m > n / 2 {
        n - m
    } else {
        m
    };
    (m, rejected)
}

/// Metropolis rule: downhill always, uphill with probability `exp(−ΔH/t)`.
pub fn metropolis_accept<R: Rng + ?Sized>(delta_h: f64, t: f64, rng: &mut R) -> bool {
    if delta_h <= 0.0 {
        return true;
    }
    if t <= 0.0 {
        return false;
    }
    rng.random::<f64>() < (-delta_h / t).exp()
}
