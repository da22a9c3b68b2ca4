//! `TWINPOSE` pose files.
//!
//! ```text
//! TWINPOSE 1 <n>
//! <i> <px> <py> <pz> <qw> <qx> <qy> <qz> <roll_deg> <vfov_deg>
//! ...
//! ```
//!
//! Lines starting with `#` and blank lines are ignored. Record order is
//! preserved exactly; it defines pose pairing downstream.

use nalgebra::{Point3, Quaternion, UnitQuaternion};
use thiserror::Error;

use crate::pose::{CameraPose, PoseSet};

pub const POSE_FILE_MAGIC: &str = "TWINPOSE";
pub const POSE_FILE_VERSION: u32 = 1;

/// Quaternions further than this from unit norm are rejected.
const UNIT_NORM_TOLERANCE: f64 = 1e-6;
/// Quaternions closer than this to unit norm are kept bit-for-bit so that
/// written files read back exactly.
const RENORMALIZE_ABOVE: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum PoseFileError {
    #[error("missing TWINPOSE header")]
    MissingHeader,
    #[error("line {line}: malformed header")]
    BadHeader { line: usize },
    #[error("unsupported pose file version {0} (expected {POSE_FILE_VERSION})")]
    VersionMismatch(u32),
    #[error("pose file declares no poses")]
    Empty,
    #[error("header declares {declared} poses but {found} records follow")]
    CountMismatch { declared: usize, found: usize },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: quaternion norm {norm} is not 1")]
    NonUnitQuaternion { line: usize, norm: f64 },
    #[error("line {line}: frame {frame} appears twice")]
    DuplicateFrame { line: usize, frame: usize },
}

pub fn read_pose_file(bytes: &[u8]) -> Result<PoseSet, PoseFileError> {
    let text = String::from_utf8_lossy(bytes);
    let mut declared: Option<usize> = None;
    let mut poses: Vec<CameraPose> = Vec::new();
    let mut seen = std::collections::HashSet::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let Some(count) = declared else {
            if tokens.first() != Some(&POSE_FILE_MAGIC) {
                return Err(PoseFileError::MissingHeader);
            }
            let [_, version, n] = tokens[..] else {
                return Err(PoseFileError::BadHeader { line });
            };
            let version: u32 = version
                .parse()
                .map_err(|_| PoseFileError::BadHeader { line })?;
            if version != POSE_FILE_VERSION {
                return Err(PoseFileError::VersionMismatch(version));
            }
            let n: usize = n.parse().map_err(|_| PoseFileError::BadHeader { line })?;
            if n == 0 {
                return Err(PoseFileError::Empty);
            }
            declared = Some(n);
            continue;
        };
        if poses.len() == count {
            return Err(PoseFileError::CountMismatch {
                declared: count,
                found: count + 1,
            });
        }
        if tokens.len() != 10 {
            return Err(PoseFileError::Syntax {
                line,
                message: format!("expected 10 fields, found {}", tokens.len()),
            });
        }
        let frame: usize = tokens[0].parse().map_err(|_| PoseFileError::Syntax {
            line,
            message: format!("invalid frame index {:?}", tokens[0]),
        })?;
        let mut values = [0.0f64; 9];
        for (slot, token) in values.iter_mut().zip(&tokens[1..]) {
            *slot = token
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| PoseFileError::Syntax {
                    line,
                    message: format!("invalid number {token:?}"),
                })?;
        }
        let [px, py, pz, qw, qx, qy, qz, roll_deg, vertical_fov_deg] = values;
        let q = Quaternion::new(qw, qx, qy, qz);
        let norm = q.norm();
        if (norm - 1.0).abs() > UNIT_NORM_TOLERANCE {
            return Err(PoseFileError::NonUnitQuaternion { line, norm });
        }
        if !seen.insert(frame) {
            return Err(PoseFileError::DuplicateFrame { line, frame });
        }
        poses.push(CameraPose {
            frame,
            position: Point3::new(px, py, pz),
            rotation: UnitQuaternion::new_unchecked(if (norm - 1.0).abs() <= RENORMALIZE_ABOVE {
                q
            } else {
                q / norm
            }),
            roll_deg,
            vertical_fov_deg,
        });
    }

    let declared = declared.ok_or(PoseFileError::MissingHeader)?;
    if poses.len() != declared {
        return Err(PoseFileError::CountMismatch {
            declared,
            found: poses.len(),
        });
    }
    Ok(PoseSet::new(poses))
}

/// Serializes in set order. Numbers use the shortest round-tripping form.
pub fn write_pose_file(poses: &PoseSet) -> Vec<u8> {
    use std::fmt::Write;
    let mut s = format!("{POSE_FILE_MAGIC} {POSE_FILE_VERSION} {}\n", poses.len());
    for p in poses {
        let q = p.rotation.quaternion();
        let _ = writeln!(
            s,
            "{} {:?} {:?} {:?} {:?} {:?} {:?} {:?} {:?} {:?}",
            p.frame,
            p.position.x,
            p.position.y,
            p.position.z,
            q.w,
            q.i,
            q.j,
            q.k,
            p.roll_deg,
            p.vertical_fov_deg
        );
    }
    s.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn origin_pose() -> CameraPose {
        CameraPose {
            frame: 0,
            position: Point3::origin(),
            rotation: UnitQuaternion::identity(),
            roll_deg: 0.0,
            vertical_fov_deg: 23.0,
        }
    }

    #[test]
    fn single_identity_pose() {
        let set = PoseSet::new(vec![origin_pose()]);
        let text = String::from_utf8(write_pose_file(&set)).unwrap();
        assert_eq!(
            text,
            "TWINPOSE 1 1\n0 0.0 0.0 0.0 1.0 0.0 0.0 0.0 0.0 23.0\n"
        );
        assert_eq!(read_pose_file(text.as_bytes()).unwrap(), set);
    }

    #[test]
    fn comments_and_plain_integers_are_accepted() {
        let text = "# exported by hand\nTWINPOSE 1 1\n\n# record\n4 1 2 3 1 0 0 0 90 23\n";
        let set = read_pose_file(text.as_bytes()).unwrap();
        assert_eq!(set.poses[0].frame, 4);
        assert_eq!(set.poses[0].position, Point3::new(1.0, 2.0, 3.0));
    }

    #[test]
    fn header_and_record_errors() {
        let rec = "0 0 0 0 1 0 0 0 0 23\n";
        let too_few = format!("TWINPOSE 1 3\n{rec}1 0 0 0 1 0 0 0 0 23\n");
        assert_eq!(
            read_pose_file(too_few.as_bytes()),
            Err(PoseFileError::CountMismatch {
                declared: 3,
                found: 2
            })
        );
        let too_many = format!("TWINPOSE 1 1\n{rec}1 0 0 0 1 0 0 0 0 23\n");
        assert!(matches!(
            read_pose_file(too_many.as_bytes()),
            Err(PoseFileError::CountMismatch { .. })
        ));
        assert_eq!(
            read_pose_file(format!("TWINPOSE 2 1\n{rec}").as_bytes()),
            Err(PoseFileError::VersionMismatch(2))
        );
        assert_eq!(
            read_pose_file(rec.as_bytes()),
            Err(PoseFileError::MissingHeader)
        );
        assert_eq!(read_pose_file(b""), Err(PoseFileError::MissingHeader));
        assert_eq!(read_pose_file(b"TWINPOSE 1 0\n"), Err(PoseFileError::Empty));
        assert!(matches!(
            read_pose_file(b"TWINPOSE 1 1\n0 0 0 0 1.1 0 0 0 0 23\n"),
            Err(PoseFileError::NonUnitQuaternion { line: 2, .. })
        ));
        assert!(matches!(
            read_pose_file(b"TWINPOSE 1 1\n0 0 0 0 1 0 0 0 0\n"),
            Err(PoseFileError::Syntax { line: 2, .. })
        ));
        assert!(matches!(
            read_pose_file(format!("TWINPOSE 1 2\n{rec}{rec}").as_bytes()),
            Err(PoseFileError::DuplicateFrame { line: 3, frame: 0 })
        ));
    }

    #[test]
    fn near_unit_quaternion_is_normalized() {
        let set = read_pose_file(b"TWINPOSE 1 1\n0 0 0 0 1.0000005 0 0 0 0 23\n").unwrap();
        assert!((set.poses[0].rotation.quaternion().norm() - 1.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn arbitrary_bytes_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..128)) {
            let _ = read_pose_file(&bytes);
            let mut prefixed = b"TWINPOSE 1 1\n".to_vec();
            prefixed.extend_from_slice(&bytes);
            let _ = read_pose_file(&prefixed);
        }
    }
}
