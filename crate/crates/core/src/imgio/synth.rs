//! Procedural reference images for building desk-scale corpora.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::plane::{rgb_to_ycbcr, ColorImage, ImagePlane};

/// Smooth multi-octave lattice noise in roughly [0, 1].
struct ValueNoise {
    grid: Vec<f64>,
    size: usize,
}

impl ValueNoise {
    fn new(rng: &mut ChaCha8Rng, size: usize) -> Self {
        Self {
            grid: (0..size * size).map(|_| rng.random()).collect(),
            size,
        }
    }

    fn lattice(&self, x: i64, y: i64) -> f64 {
        let n = self.size as i64;
        self.grid[(y.rem_euclid(n) * n + x.rem_euclid(n)) as usize]
    }

    fn sample(&self, x: f64, y: f64) -> f64 {
        let (x0, y0) = (x.floor(), y.floor());
        let (fx, fy) = (x - x0, y - y0);
        let s = |t: f64| t * t * (3.0 - 2.0 * t);
        let (sx, sy) = (s(fx), s(fy));
        let (ix, iy) = (x0 as i64, y0 as i64);
        let top = self.lattice(ix, iy) * (1.0 - sx) + self.lattice(ix + 1, iy) * sx;
        let bot = self.lattice(ix, iy + 1) * (1.0 - sx) + self.lattice(ix + 1, iy + 1) * sx;
        top * (1.0 - sy) + bot * sy
    }

    fn fractal(&self, x: f64, y: f64, octaves: usize) -> f64 {
        let (mut amp, mut freq, mut sum, mut norm) = (1.0, 1.0, 0.0, 0.0);
        for _ in 0..octaves {
            sum += amp * self.sample(x * freq, y * freq);
            norm += amp;
            amp *= 0.5;
            freq *= 2.0;
        }
        sum / norm
    }
}

fn lerp3(a: [f64; 3], b: [f64; 3], t: f64) -> [f64; 3] {
    [0, 1, 2].map(|i| a[i] + (b[i] - a[i]) * t)
}

fn random_color(rng: &mut ChaCha8Rng) -> [f64; 3] {
    [
        0.1 + 0.8 * rng.random::<f64>(),
        0.1 + 0.8 * rng.random::<f64>(),
        0.1 + 0.8 * rng.random::<f64>(),
    ]
}

/// Deterministic reference image. Five families cycle with `index`:
/// fractal texture, composed scene, oriented grating, flat-shaded cells and
/// turbulent stripes.
pub fn procedural_reference(
    index: usize,
    width: usize,
    height: usize,
    seed: u64,
) -> ColorImage<f64> {
    let mut rng =
        ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let noise = ValueNoise::new(&mut rng, 32);
    let (c0, c1, c2) = (
        random_color(&mut rng),
        random_color(&mut rng),
        random_color(&mut rng),
    );
    let scale = 4.0 + 6.0 * rng.random::<f64>();
    let (w, h) = (width as f64, height as f64);

    let pixel: Box<dyn Fn(f64, f64) -> [f64; 3]> = match index % 5 {
        0 => Box::new(move |x, y| {
            let t = noise.fractal(x / w * scale, y / h * scale, 5);
            lerp3(c0, c1, t)
        }),
        1 => {
            let horizon = 0.35 + 0.3 * rng.random::<f64>();
            let disks: Vec<(f64, f64, f64, [f64; 3])> = (0..4)
                .map(|_| {
                    (
                        rng.random::<f64>(),
                        rng.random::<f64>(),
                        0.05 + 0.15 * rng.random::<f64>(),
                        random_color(&mut rng),
                    )
                })
                .collect();
            Box::new(move |x, y| {
                let (u, v) = (x / w, y / h);
                let mut c = if v < horizon {
                    lerp3(c0, [0.9, 0.9, 0.95], v / horizon)
                } else {
                    let t = noise.fractal(u * scale * 2.0, v * scale * 2.0, 4);
                    lerp3(c1, c2, t)
                };
                for &(cx, cy, r, col) in &disks {
                    let d = ((u - cx).powi(2) + (v - cy).powi(2)).sqrt();
                    let a = ((r - d) * w * 0.5).clamp(0.0, 1.0);
                    c = lerp3(c, col, a);
                }
                c
            })
        }
        2 => {
            let theta = std::f64::consts::PI * rng.random::<f64>();
            let freq = 0.15 + 0.5 * rng.random::<f64>();
            Box::new(move |x, y| {
                let s = (x * theta.cos() + y * theta.sin()) * freq;
                let g = 0.5 + 0.35 * s.sin();
                let vign = 1.0 - 0.4 * (((x / w - 0.5).powi(2) + (y / h - 0.5).powi(2)) * 2.0);
                let n = noise.fractal(x / w * scale, y / h * scale, 3);
                lerp3(c0, c1, (g * vign * 0.8 + 0.2 * n).clamp(0.0, 1.0))
            })
        }
        3 => {
            let cells: Vec<(f64, f64, [f64; 3])> = (0..12)
                .map(|_| {
                    (
                        rng.random::<f64>() * w,
                        rng.random::<f64>() * h,
                        random_color(&mut rng),
                    )
                })
                .collect();
            Box::new(move |x, y| {
                cells
                    .iter()
                    .min_by(|a, b| {
                        let da = (a.0 - x).powi(2) + (a.1 - y).powi(2);
                        let db = (b.0 - x).powi(2) + (b.1 - y).powi(2);
                        da.total_cmp(&db)
                    })
                    .map(|c| c.2)
                    .unwrap_or(c0)
            })
        }
        _ => {
            let period = 6.0 + 10.0 * rng.random::<f64>();
            Box::new(move |x, y| {
                let turb = noise.fractal(x / w * scale, y / h * scale, 5);
                let s = ((x + 12.0 * turb * period / 6.0) / period * std::f64::consts::TAU).sin();
                lerp3(lerp3(c0, c1, turb), c2, 0.5 + 0.4 * s)
            })
        }
    };

    let mut planes = [Vec::new(), Vec::new(), Vec::new()];
    for y in 0..height {
        for x in 0..width {
            let [r, g, b] = pixel(x as f64 + 0.5, y as f64 + 0.5).map(|c| c.clamp(0.0, 1.0));
            // Quantize through 8-bit RGB so the image survives a PNG round trip.
            let q = |c: f64| (c * 255.0).round() / 255.0;
            let ycc = rgb_to_ycbcr(q(r), q(g), q(b));
            for (p, v) in planes.iter_mut().zip(ycc) {
                p.push(v);
            }
        }
    }
    let [y, cb, cr] = planes.map(|p| ImagePlane::new(width, height, p).expect("sized"));
    ColorImage::new(y, cb, cr).expect("same dims")
}
