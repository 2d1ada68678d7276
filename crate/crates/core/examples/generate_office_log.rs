//! Regenerates `data/office.log`, the bundled CARMEN sample log.
//!
//! The log holds FLASER records of a SICK-style scanner (361 beams over
//! 180°, range noise σ = 1 cm, millimeter resolution) driven through a
//! furnished office. A window in the outer wall lets some beams escape,
//! which produces max-range readings.
//!
//! ```text
//! cargo run --example generate_office_log [output-path]
//! ```

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write;

use ple::geometry::{first_intersection_distance, Point2, Polyline, PolylineMap, Ray};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const BEAMS: usize = 361;
const NO_RETURN: f64 = 81.91;

fn open(pts: &[(f64, f64)]) -> Polyline {
    Polyline::open(pts.iter().map(|&(x, y)| Point2::new(x, y)).collect()).unwrap()
}

fn closed(pts: &[(f64, f64)]) -> Polyline {
    Polyline::closed(pts.iter().map(|&(x, y)| Point2::new(x, y)).collect()).unwrap()
}

fn office() -> PolylineMap {
    PolylineMap::new(vec![
        // Outer walls; the window spans x in [4, 7] on the north side and the
        // door leads into a corridor to the east.
        open(&[(4.0, 8.0), (0.0, 8.0), (0.0, 0.0), (12.0, 0.0), (12.0, 3.0)]),
        open(&[(12.0, 4.2), (12.0, 8.0), (7.0, 8.0)]),
        // Corridor behind the door.
        open(&[(12.0, 2.99), (15.0, 2.99), (15.0, 12.0)]),
        open(&[(12.01, 4.21), (13.5, 4.21), (13.5, 12.0)]),
        // Desks, a cabinet and a pillar.
        closed(&[(1.0, 5.5), (3.5, 5.5), (3.5, 7.0), (1.0, 7.0)]),
        closed(&[(8.0, 1.0), (10.5, 1.0), (10.5, 2.2), (8.0, 2.2)]),
        closed(&[(10.8, 6.0), (11.7, 6.0), (11.7, 7.6), (10.8, 7.6)]),
        closed(&[(6.0, 3.6), (6.4, 3.6), (6.4, 4.0), (6.0, 4.0)]),
    ])
    .unwrap()
}

fn main() {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/office.log").to_string());
    let map = office();
    let noise = Normal::new(0.0, 0.01).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1999);
    let poses = [
        (3.0, 2.0, 0.6),
        (4.5, 2.5, 1.2),
        (6.0, 2.8, 1.6),
        (7.5, 3.0, 1.3),
        (9.0, 4.5, 0.4),
        (10.0, 5.0, 0.0),
        (8.0, 6.0, 2.6),
        (5.0, 5.5, 3.3),
    ];

    let mut log = String::new();
    log.push_str("# synthetic office, SICK LMS-style scanner, 361 beams over 180 degrees\n");
    log.push_str("PARAM robot_front_laser_max 81.9 nohost 0.0\n");
    for (i, &(x, y, theta)) in poses.iter().enumerate() {
        let t = 1000.0 + i as f64 * 0.2;
        let origin = Point2::new(x, y);
        let mut ranges = Vec::with_capacity(BEAMS);
        for k in 0..BEAMS {
            let bearing = theta - FRAC_PI_2 + k as f64 * PI / (BEAMS - 1) as f64;
            let ray = Ray::from_polar(origin, bearing, 1.0, false).unwrap();
            let r = match first_intersection_distance(&ray, &map) {
                Some(d) if d < 80.0 => ((d + noise.sample(&mut rng)) * 1000.0).round() / 1000.0,
                _ => NO_RETURN,
            };
            ranges.push(format!("{r:.3}"));
        }
        let _ = writeln!(
            log,
            "ODOM {x:.4} {y:.4} {theta:.4} 0.000 0.000 0.000 {t:.6} nohost {t:.6}"
        );
        let _ = writeln!(
            log,
            "FLASER {BEAMS} {} {x:.4} {y:.4} {theta:.4} {x:.4} {y:.4} {theta:.4} {t:.6} nohost {t:.6}",
            ranges.join(" ")
        );
    }
    std::fs::write(&out, log).expect("write log");
    println!("wrote {} records to {out}", poses.len());
}
