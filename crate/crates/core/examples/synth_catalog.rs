//! Writes a Starlink-like TLE catalog: several Walker shells at their filed
//! altitudes and inclinations, small per-satellite perturbations, uniformly
//! subsampled.
//!
//! Usage: `cargo run --example synth_catalog -- [output] [count] [seed]`

use std::f64::consts::TAU;
use std::io::Write;

use lislnet_core::orbit::{format_tle, parse_t0, OrbitalElements, EARTH_MU, EARTH_RADIUS};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

struct Shell {
    altitude_km: f64,
    inclination_deg: f64,
    planes: usize,
    per_plane: usize,
    phasing: usize,
}

const SHELLS: &[Shell] = &[
    Shell {
        altitude_km: 550.0,
        inclination_deg: 53.0,
        planes: 72,
        per_plane: 22,
        phasing: 17,
    },
    Shell {
        altitude_km: 540.0,
        inclination_deg: 53.2,
        planes: 72,
        per_plane: 22,
        phasing: 17,
    },
    Shell {
        altitude_km: 570.0,
        inclination_deg: 70.0,
        planes: 36,
        per_plane: 20,
        phasing: 11,
    },
    Shell {
        altitude_km: 560.0,
        inclination_deg: 97.6,
        planes: 10,
        per_plane: 52,
        phasing: 3,
    },
    Shell {
        altitude_km: 530.0,
        inclination_deg: 43.0,
        planes: 56,
        per_plane: 36,
        phasing: 13,
    },
    Shell {
        altitude_km: 525.0,
        inclination_deg: 53.0,
        planes: 28,
        per_plane: 40,
        phasing: 7,
    },
];

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let out = args
        .first()
        .map(String::as_str)
        .unwrap_or("data/starlink_like.tle");
    let count: usize = args
        .get(1)
        .map(|s| s.parse().expect("count"))
        .unwrap_or(1000);
    let seed: u64 = args
        .get(2)
        .map(|s| s.parse().expect("seed"))
        .unwrap_or(2025);
    let t0 = parse_t0("2025-07-16T16:00:00Z").unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raan_jitter = Normal::new(0.0, 0.3f64.to_radians()).unwrap();
    let phase_jitter = Normal::new(0.0, 0.5f64.to_radians()).unwrap();
    let alt_jitter = Normal::new(0.0, 1.5e3).unwrap();

    let mut all = Vec::new();
    for shell in SHELLS {
        let total = shell.planes * shell.per_plane;
        for p in 0..shell.planes {
            for s in 0..shell.per_plane {
                let raan = TAU * p as f64 / shell.planes as f64;
                let anomaly = TAU * s as f64 / shell.per_plane as f64
                    + TAU * (shell.phasing * p) as f64 / total as f64;
                all.push((shell, raan, anomaly));
            }
        }
    }
    let mut picked = sample(&mut rng, all.len(), count.min(all.len())).into_vec();
    picked.sort_unstable();

    let mut file = std::io::BufWriter::new(std::fs::File::create(out).expect("create output"));
    for (k, &idx) in picked.iter().enumerate() {
        let (shell, raan, anomaly) = all[idx];
        let a = EARTH_RADIUS + shell.altitude_km * 1e3 + alt_jitter.sample(&mut rng);
        let n = (EARTH_MU / a.powi(3)).sqrt();
        let e = rng.random_range(0.0..2e-4);
        let argp = rng.random_range(0.0..TAU);
        let m0 = (anomaly + phase_jitter.sample(&mut rng) - argp).rem_euclid(TAU);
        let el = OrbitalElements::from_mean_motion(
            44_000 + k as u32,
            n,
            e,
            shell.inclination_deg.to_radians(),
            (raan + raan_jitter.sample(&mut rng)).rem_euclid(TAU),
            argp,
            m0,
            0.0,
        )
        .expect("valid elements");
        let (l1, l2) = format_tle(&el, t0, "25001A");
        writeln!(file, "STARLINK-SYN-{:04}\n{l1}\n{l2}", k + 1).unwrap();
    }
}
