//! Reader for CARMEN robot log files.
//!
//! Two laser message types are understood:
//!
//! ```text
//! FLASER n r_1 .. r_n x y theta odom_x odom_y odom_theta timestamp host logger_timestamp
//! ROBOTLASER1 type start_angle fov resolution max_range accuracy remission_mode
//!     n r_1 .. r_n m rem_1 .. rem_m x y theta robot_x robot_y robot_theta
//!     tv rv forward_safety side_safety turn_axis timestamp host logger_timestamp
//! ```
//!
//! FLASER carries no geometry, so its readings are spread over a half
//! circle starting at −π/2 with step π/(n−1). Every other message type is
//! ignored.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::BufRead;

use crate::scan::{Pose2, Scan};

use super::IoError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarmenOptions {
    /// Sensor range assumed for FLASER records.
    pub flaser_max_range: f64,
}

impl Default for CarmenOptions {
    fn default() -> Self {
        Self { flaser_max_range: 80.0 }
    }
}

/// One laser record.
#[derive(Debug, Clone, PartialEq)]
pub struct CarmenRecord {
    pub ranges: Vec<f64>,
    /// Bearing of the first reading relative to the laser heading.
    pub start_angle: f64,
    pub angle_step: f64,
    pub max_range: f64,
    pub laser_pose: Pose2,
    pub timestamp: f64,
    /// Line number in the log, starting at 1.
    pub line: usize,
}

impl CarmenRecord {
    /// Readings at or beyond the max range, and non-positive ones, become
    /// max-range rays.
    pub fn to_scan(&self) -> Scan {
        let readings = self.ranges.iter().enumerate().map(|(i, &r)| {
            let r = if r > 0.0 && r < self.max_range { r } else { self.max_range };
            (self.start_angle + i as f64 * self.angle_step, r)
        });
        Scan::from_polar(self.laser_pose, readings, self.max_range, false)
            .expect("validated readings form valid rays")
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CarmenLog {
    pub records: Vec<CarmenRecord>,
    /// Laser lines that could not be parsed.
    pub skipped: usize,
}

impl CarmenLog {
    pub fn scans(&self) -> Vec<Scan> {
        self.records.iter().map(CarmenRecord::to_scan).collect()
    }
}

fn numbers(tokens: &[&str]) -> Option<Vec<f64>> {
    tokens.iter().map(|t| t.parse::<f64>().ok().filter(|v| v.is_finite())).collect()
}

fn count(token: Option<&&str>) -> Option<usize> {
    token?.parse().ok()
}

fn parse_flaser(tokens: &[&str], opts: &CarmenOptions, line: usize) -> Option<CarmenRecord> {
    let n = count(tokens.get(1))?;
    // n readings, two poses, timestamp, host, logger timestamp.
    if n < 2 || tokens.len() != 2 + n + 6 + 3 {
        return None;
    }
    let ranges = numbers(&tokens[2..2 + n])?;
    let rest = numbers(&tokens[2 + n..2 + n + 7])?;
    Some(CarmenRecord {
        ranges,
        start_angle: -FRAC_PI_2,
        angle_step: PI / (n - 1) as f64,
        max_range: opts.flaser_max_range,
        laser_pose: Pose2::new(rest[0], rest[1], rest[2]),
        timestamp: rest[6],
        line,
    })
}

fn parse_robotlaser(tokens: &[&str], line: usize) -> Option<CarmenRecord> {
    let head = numbers(tokens.get(1..8)?)?;
    let n = count(tokens.get(8))?;
    let ranges = numbers(tokens.get(9..9 + n)?)?;
    let m = count(tokens.get(9 + n))?;
    let tail_start = 10 + n + m;
    numbers(tokens.get(10 + n..tail_start)?)?;
    // Two poses, five velocity and safety fields, timestamp, host, logger timestamp.
    if n < 2 || tokens.len() != tail_start + 14 {
        return None;
    }
    let tail = numbers(&tokens[tail_start..tail_start + 12])?;
    let (start_angle, step, max_range) = (head[1], head[3], head[4]);
    if !(max_range > 0.0 && step != 0.0) {
        return None;
    }
    Some(CarmenRecord {
        ranges,
        start_angle,
        angle_step: step,
        max_range,
        laser_pose: Pose2::new(tail[0], tail[1], tail[2]),
        timestamp: tail[11],
        line,
    })
}

/// Reads every laser record of a CARMEN log.
///
/// Malformed laser lines, such as a reading count that disagrees with the
/// number of tokens, are skipped and counted. A stream that cannot be read
/// (including invalid UTF-8) is an error carrying the line number.
pub fn parse_carmen_log<R: BufRead>(reader: R, opts: &CarmenOptions) -> Result<CarmenLog, IoError> {
    let mut log = CarmenLog::default();
    for (i, line) in reader.lines().enumerate() {
        let number = i + 1;
        let line = line.map_err(|e| IoError::Line {
            line: number,
            message: e.to_string(),
        })?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let record = match tokens.first() {
            Some(&"FLASER") => parse_flaser(&tokens, opts, number),
            Some(&"ROBOTLASER1") => parse_robotlaser(&tokens, number),
            _ => continue,
        };
        match record {
            Some(r) => log.records.push(r),
            None => log.skipped += 1,
        }
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flaser(ranges: &[f64], pose: (f64, f64, f64)) -> String {
        let r: Vec<String> = ranges.iter().map(|r| r.to_string()).collect();
        format!(
            "FLASER {} {} {} {} {} 0 0 0 12.5 host 12.6",
            ranges.len(),
            r.join(" "),
            pose.0,
            pose.1,
            pose.2
        )
    }

    #[test]
    fn flaser_with_361_readings() {
        let text = flaser(&[2.0; 361], (1.0, 2.0, 0.5));
        let log = parse_carmen_log(text.as_bytes(), &CarmenOptions::default()).unwrap();
        assert_eq!(log.skipped, 0);
        let scan = &log.scans()[0];
        assert_eq!(scan.len(), 361);
        let first = scan.rays()[0];
        assert!((first.bearing() - (0.5 - FRAC_PI_2)).abs() < 1e-12);
        assert!((scan.rays()[180].bearing() - 0.5).abs() < 1e-12);
        assert!((scan.rays()[360].bearing() - (0.5 + FRAC_PI_2)).abs() < 1e-12);
        assert_eq!(first.start(), crate::geometry::Point2::new(1.0, 2.0));
        assert_eq!(log.records[0].timestamp, 12.5);
    }

    #[test]
    fn empty_input_and_other_messages() {
        let log = parse_carmen_log("".as_bytes(), &CarmenOptions::default()).unwrap();
        assert!(log.records.is_empty());
        let log = parse_carmen_log("# comment\nODOM 0 0 0 0 0 0 1 h 1\n".as_bytes(), &CarmenOptions::default())
            .unwrap();
        assert_eq!((log.records.len(), log.skipped), (0, 0));
    }

    #[test]
    fn count_mismatch_is_skipped() {
        let good = flaser(&[1.0, 2.0, 3.0], (0.0, 0.0, 0.0));
        let bad = "FLASER 4 1.0 2.0 3.0 0 0 0 0 0 0 1 h 1";
        let text = format!("{good}\n{bad}\n{good}\nFLASER x\n");
        let log = parse_carmen_log(text.as_bytes(), &CarmenOptions::default()).unwrap();
        assert_eq!((log.records.len(), log.skipped), (2, 2));
        assert_eq!(log.records[1].line, 3);
    }

    #[test]
    fn max_range_readings_are_flagged() {
        let text = flaser(&[1.0, 80.0, 0.0, 81.0], (0.0, 0.0, 0.0));
        let scan = &parse_carmen_log(text.as_bytes(), &CarmenOptions::default()).unwrap().scans()[0];
        let flags: Vec<bool> = scan.rays().iter().map(|r| r.is_max_range()).collect();
        assert_eq!(flags, [false, true, true, true]);
    }

    #[test]
    fn robotlaser_uses_declared_geometry() {
        let ranges = ["1.5"; 5].join(" ");
        let text = format!(
            "ROBOTLASER1 0 -1.0 2.0 0.5 30 0.01 0 5 {ranges} 0 3 4 1.57 3 4 1.57 0 0 0 0 0 99.0 host 99.1"
        );
        let log = parse_carmen_log(text.as_bytes(), &CarmenOptions::default()).unwrap();
        assert_eq!(log.skipped, 0);
        let r = &log.records[0];
        assert_eq!((r.start_angle, r.angle_step, r.max_range, r.timestamp), (-1.0, 0.5, 30.0, 99.0));
        assert_eq!(r.laser_pose, Pose2::new(3.0, 4.0, 1.57));
    }

    #[test]
    fn unreadable_stream_reports_line() {
        let bytes: &[u8] = b"ODOM 0\n\xff\xfe\n";
        match parse_carmen_log(bytes, &CarmenOptions::default()) {
            Err(IoError::Line { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
