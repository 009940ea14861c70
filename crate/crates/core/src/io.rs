//! File formats: profile JSON, trajectory JSON Lines, annotated JSON Lines
//! and the phase decomposition JSON. Rationals are always strings.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::{OpinionProfile, Trajectory};
use crate::error::{Error, Result};
use crate::lyapunov::{AnnotatedTrajectory, StepClass};
use crate::phases::PhaseDecomposition;
use crate::rational::{
    format_rational, parse_rational, serde_rational, serde_rational_opt, serde_rational_vec, Rational,
};

#[derive(Debug, Serialize, Deserialize)]
struct ProfileFile {
    epsilon: String,
    opinions: Vec<String>,
}

/// Parses a profile JSON document. Opinions are sorted if needed; the flag
/// reports whether that happened.
pub fn parse_profile(text: &str) -> Result<(OpinionProfile, bool)> {
    let raw: ProfileFile = serde_json::from_str(text)?;
    let epsilon = parse_rational(&raw.epsilon)?;
    let opinions = raw
        .opinions
        .iter()
        .map(|s| parse_rational(s))
        .collect::<Result<Vec<_>>>()?;
    OpinionProfile::sorted(epsilon, opinions)
}

pub fn read_profile<R: Read>(mut reader: R) -> Result<OpinionProfile> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let (profile, reordered) = parse_profile(&text)?;
    if reordered {
        log::warn!("input opinions were not sorted; agents relabelled in increasing order");
    }
    Ok(profile)
}

pub fn ingest(path: &Path) -> Result<OpinionProfile> {
    read_profile(File::open(path)?)
}

pub fn profile_to_json(profile: &OpinionProfile) -> String {
    let raw = ProfileFile {
        epsilon: format_rational(profile.epsilon()),
        opinions: profile.opinions().iter().map(format_rational).collect(),
    };
    serde_json::to_string(&raw).expect("profile serialization cannot fail")
}

pub fn write_profile<W: Write>(mut writer: W, profile: &OpinionProfile) -> Result<()> {
    writeln!(writer, "{}", profile_to_json(profile))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub t: usize,
    #[serde(with = "serde_rational_vec")]
    pub x: Vec<Rational>,
}

pub fn write_trajectory<W: Write>(mut writer: W, trajectory: &Trajectory) -> Result<()> {
    for p in &trajectory.profiles {
        let record = TrajectoryRecord {
            t: p.time(),
            x: p.opinions().to_vec(),
        };
        serde_json::to_writer(&mut writer, &record)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads trajectory records, skipping blank lines. Fails on an empty file.
pub fn read_trajectory<R: Read>(reader: R) -> Result<Vec<TrajectoryRecord>> {
    let mut out = Vec::new();
    for (lineno, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: TrajectoryRecord = serde_json::from_str(&line).map_err(|e| {
            Error::MalformedTrajectory(format!("line {}: {e}", lineno + 1))
        })?;
        out.push(record);
    }
    if out.is_empty() {
        return Err(Error::MalformedTrajectory("no records".to_string()));
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
struct AnnotatedRecord<'a> {
    t: usize,
    #[serde(with = "serde_rational_vec")]
    x: &'a [Rational],
    #[serde(rename = "U_size")]
    u_size: usize,
    nu: usize,
    #[serde(rename = "L", with = "serde_rational")]
    lyapunov: &'a Rational,
    m: usize,
    #[serde(with = "serde_rational_opt")]
    d: &'a Option<Rational>,
    class: StepClass,
}

pub fn write_annotated<W: Write>(mut writer: W, annotated: &AnnotatedTrajectory) -> Result<()> {
    for a in &annotated.analyses {
        let record = AnnotatedRecord {
            t: a.t,
            x: annotated.opinions(a.t),
            u_size: a.u_size,
            nu: a.nu,
            lyapunov: &a.lyapunov,
            m: a.m,
            d: &a.d,
            class: a.class,
        };
        serde_json::to_writer(&mut writer, &record)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct PhaseJson {
    k: usize,
    start: usize,
    end: usize,
    n_k: usize,
    nu_k_end: usize,
    #[serde(rename = "I_count")]
    i_count: usize,
    #[serde(rename = "D_count")]
    d_count: usize,
}

#[derive(Debug, Serialize)]
struct DecompositionJson<'a> {
    #[serde(rename = "S")]
    splits: &'a [usize],
    phases: Vec<PhaseJson>,
}

pub fn decomposition_to_json(decomposition: &PhaseDecomposition) -> String {
    let doc = DecompositionJson {
        splits: &decomposition.splits,
        phases: decomposition
            .phases
            .iter()
            .map(|p| PhaseJson {
                k: p.k,
                start: p.start,
                end: p.end,
                n_k: p.n_k,
                nu_k_end: p.nu_k_end,
                i_count: p.increase.len(),
                d_count: p.decrease.len(),
            })
            .collect(),
    };
    serde_json::to_string(&doc).expect("decomposition serialization cannot fail")
}
