//! Trajectory CSV and metrics JSON files.
//!
//! A trajectory file is a small `#`-commented header followed by one CSV row
//! per robot per recorded step, ordered by `(step, id)`:
//!
//! ```text
//! # treeswarm trajectory v1
//! # n_robot = 200
//! # dim = 2
//! # dt = 0.01
//! # seed = 7
//! # config_hash = 0123456789abcdef
//! step,id,x,y
//! 1,0,-2.31898513e0,-1.95473367e0
//! ```
//!
//! Rows hold post-step positions (step 0 never appears), with floats at nine
//! significant digits. Identical config and seed reproduce the file byte for
//! byte.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::{read_file, write_atomic};
use crate::metrics::MetricsReport;
use crate::sim::TrajectoryLog;
use crate::Vect;

const MAGIC_LINE: &str = "# treeswarm trajectory v1";
const AXES: [&str; 3] = ["x", "y", "z"];

/// A trajectory read back from disk: the header fields plus the recorded
/// states in file order.
#[derive(Clone, Debug)]
pub struct TrajectoryFile<const D: usize> {
    pub n_robot: usize,
    pub dt: f64,
    pub seed: u64,
    pub config_hash: String,
    pub states: Vec<(u64, Vec<Vect<D>>)>,
}

/// Writes a run's recorded states as CSV.
pub fn write_trajectory<const D: usize>(path: &Path, log: &TrajectoryLog<D>) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "{MAGIC_LINE}").unwrap();
    writeln!(out, "# n_robot = {}", log.n_robot).unwrap();
    writeln!(out, "# dim = {D}").unwrap();
    writeln!(out, "# dt = {:?}", log.dt).unwrap();
    writeln!(out, "# seed = {}", log.seed).unwrap();
    writeln!(out, "# config_hash = {}", log.config_hash).unwrap();
    writeln!(out, "step,id,{}", AXES[..D].join(",")).unwrap();
    for (step, positions) in &log.states {
        for (id, p) in positions.iter().enumerate() {
            write!(out, "{step},{id}").unwrap();
            for a in 0..D {
                write!(out, ",{:.8e}", p[a]).unwrap();
            }
            out.push('\n');
        }
    }
    write_atomic(path, out.as_bytes())
}

/// Reads a trajectory file back, checking the header, the column count, the
/// `(step, id)` ordering, and that every coordinate is finite.
pub fn read_trajectory<const D: usize>(path: &Path) -> Result<TrajectoryFile<D>> {
    let bytes = read_file(path)?;
    let text = String::from_utf8(bytes)
        .map_err(|_| Error::file(path, "trajectory is not valid UTF-8"))?;
    let mut lines = text.lines();
    if lines.next() != Some(MAGIC_LINE) {
        return Err(Error::file(path, "not a trajectory file"));
    }

    let mut n_robot: Option<usize> = None;
    let mut dim: Option<usize> = None;
    let mut dt: Option<f64> = None;
    let mut seed: Option<u64> = None;
    let mut config_hash: Option<String> = None;
    let mut columns: Option<&str> = None;
    for line in lines.by_ref() {
        if let Some(rest) = line.strip_prefix('#') {
            let (key, value) = rest
                .split_once('=')
                .ok_or_else(|| Error::file(path, format!("bad header line {line:?}")))?;
            let value = value.trim();
            macro_rules! parsed {
                () => {
                    value.parse().map_err(|_| {
                        Error::file(path, format!("bad header value in {line:?}"))
                    })?
                };
            }
            match key.trim() {
                "n_robot" => n_robot = Some(parsed!()),
                "dim" => dim = Some(parsed!()),
                "dt" => dt = Some(parsed!()),
                "seed" => seed = Some(parsed!()),
                "config_hash" => config_hash = Some(value.to_string()),
                other => return Err(Error::file(path, format!("unknown header key {other:?}"))),
            }
        } else {
            columns = Some(line);
            break;
        }
    }
    let missing = |what: &str| Error::file(path, format!("header is missing {what}"));
    let n_robot = n_robot.ok_or_else(|| missing("n_robot"))?;
    let dim = dim.ok_or_else(|| missing("dim"))?;
    let dt = dt.ok_or_else(|| missing("dt"))?;
    let seed = seed.ok_or_else(|| missing("seed"))?;
    let config_hash = config_hash.ok_or_else(|| missing("config_hash"))?;
    if dim != D {
        return Err(Error::file(path, format!("is a {dim}D trajectory but {D}D is needed")));
    }
    if n_robot == 0 {
        return Err(Error::file(path, "n_robot must be at least 1"));
    }
    let expect_columns = format!("step,id,{}", AXES[..D].join(","));
    if columns != Some(expect_columns.as_str()) {
        return Err(Error::file(path, format!("expected column line {expect_columns:?}")));
    }

    let mut states: Vec<(u64, Vec<Vect<D>>)> = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = i + 1;
        let mut fields = line.split(',');
        let mut field = |what: &str| {
            fields
                .next()
                .ok_or_else(|| Error::file(path, format!("row {row}: missing {what}")))
        };
        let step: u64 = field("step")?
            .parse()
            .map_err(|_| Error::file(path, format!("row {row}: bad step")))?;
        let id: usize = field("id")?
            .parse()
            .map_err(|_| Error::file(path, format!("row {row}: bad id")))?;
        let mut p = Vect::<D>::zeros();
        for a in 0..D {
            let v: f64 = field(AXES[a])?
                .parse()
                .map_err(|_| Error::file(path, format!("row {row}: bad {}", AXES[a])))?;
            if !v.is_finite() {
                return Err(Error::file(path, format!("row {row}: non-finite {}", AXES[a])));
            }
            p[a] = v;
        }
        if fields.next().is_some() {
            return Err(Error::file(path, format!("row {row}: too many fields")));
        }

        let start_new = match states.last() {
            None => true,
            Some((s, ps)) if *s == step => {
                if ps.len() == n_robot {
                    return Err(Error::file(path, format!("row {row}: step {step} repeated")));
                }
                false
            }
            Some((s, ps)) => {
                if ps.len() != n_robot {
                    return Err(Error::file(
                        path,
                        format!("step {s} has {} rows, expected {n_robot}", ps.len()),
                    ));
                }
                if *s >= step {
                    return Err(Error::file(path, format!("row {row}: steps not increasing")));
                }
                true
            }
        };
        if start_new {
            if id != 0 {
                return Err(Error::file(path, format!("row {row}: step must start at id 0")));
            }
            states.push((step, vec![p]));
        } else {
            let (_, ps) = states.last_mut().unwrap();
            if id != ps.len() {
                return Err(Error::file(path, format!("row {row}: ids out of order")));
            }
            ps.push(p);
        }
    }
    if let Some((s, ps)) = states.last() {
        if ps.len() != n_robot {
            return Err(Error::file(
                path,
                format!("step {s} has {} rows, expected {n_robot}", ps.len()),
            ));
        }
    }
    Ok(TrajectoryFile { n_robot, dt, seed, config_hash, states })
}

/// A metrics report as pretty-printed JSON, newline-terminated.
pub fn metrics_json(report: &MetricsReport) -> Result<String> {
    let mut text = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Config(format!("cannot serialize metrics: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// Writes a metrics report as pretty-printed JSON.
pub fn write_metrics(path: &Path, report: &MetricsReport) -> Result<()> {
    write_atomic(path, metrics_json(report)?.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_log() -> TrajectoryLog<2> {
        let state = |k: f64| vec![Vect::<2>::new(k, -k), Vect::<2>::new(k + 0.5, k)];
        TrajectoryLog {
            n_robot: 2,
            dt: 0.01,
            seed: 9,
            config_hash: "00ff00ff00ff00ff".into(),
            initial: state(0.0),
            states: vec![(1, state(1.0)), (2, state(2.0))],
            metrics: Vec::new(),
        }
    }

    #[test]
    fn roundtrips_states_and_header() {
        let log = sample_log();
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("run.csv");
        write_trajectory(&file, &log).unwrap();
        let back: TrajectoryFile<2> = read_trajectory(&file).unwrap();
        assert_eq!(back.n_robot, 2);
        assert_eq!(back.dt, 0.01);
        assert_eq!(back.seed, 9);
        assert_eq!(back.config_hash, "00ff00ff00ff00ff");
        assert_eq!(back.states, log.states);
    }

    #[test]
    fn row_count_matches_contract() {
        let log = sample_log();
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("run.csv");
        write_trajectory(&file, &log).unwrap();
        let text = std::fs::read_to_string(&file).unwrap();
        let data_rows = text.lines().filter(|l| !l.starts_with('#')).count() - 1; // column line
        assert_eq!(data_rows, log.states.len() * log.n_robot);
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn rejects_malformed_rows() {
        let log = sample_log();
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("run.csv");
        write_trajectory(&file, &log).unwrap();
        let good = std::fs::read_to_string(&file).unwrap();

        let cases: Vec<(&str, String)> = vec![
            ("wrong magic", good.replacen("v1", "v9", 1)),
            ("missing header", good.replacen("# seed = 9\n", "", 1)),
            ("bad float", good.replacen("1.00000000e0", "one", 1)),
            ("extra field", good.replacen("1,0,", "1,0,7.0,", 1)),
            ("dropped row", {
                let mut lines: Vec<&str> = good.lines().collect();
                lines.remove(lines.len() - 2);
                lines.join("\n")
            }),
            ("swapped ids", {
                let mut lines: Vec<&str> = good.lines().collect();
                lines.swap(7, 8);
                lines.join("\n")
            }),
            ("step order", {
                let mut lines: Vec<&str> = good.lines().collect();
                let (a, b) = (lines.len() - 4, lines.len() - 2);
                lines.swap(a, b);
                lines.swap(a + 1, b + 1);
                lines.join("\n")
            }),
        ];
        for (what, text) in cases {
            std::fs::write(&file, &text).unwrap();
            assert!(read_trajectory::<2>(&file).is_err(), "{what} should fail");
        }
        // and the 3D reader refuses a 2D file
        std::fs::write(&file, &good).unwrap();
        assert!(read_trajectory::<3>(&file).is_err());
    }

    #[test]
    fn writes_are_byte_deterministic() {
        let log = sample_log();
        let dir = tempfile::tempdir().unwrap();
        let (f1, f2) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
        write_trajectory(&f1, &log).unwrap();
        write_trajectory(&f2, &log).unwrap();
        assert_eq!(std::fs::read(&f1).unwrap(), std::fs::read(&f2).unwrap());
    }
}
