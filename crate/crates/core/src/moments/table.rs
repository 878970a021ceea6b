use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::spectral::{FreqVec, Lattice};

/// Dyadic shell of a frequency: the `j` with `2^j ≤ ⟨n⟩ < 2^{j+1}`.
pub fn shell_of(n: &[i64]) -> u32 {
    let s = 1 + n.iter().map(|x| (x * x) as u64).sum::<u64>();
    (63 - s.leading_zeros()) / 2
}

/// Geometric centre `2^{j+1/2}` of shell `j`.
pub fn shell_center(j: u32) -> f64 {
    2f64.powf(j as f64 + 0.5)
}

/// Lattice indices whose frequency lies in shell `j`.
pub fn shell_indices(lattice: &Lattice, j: u32) -> Vec<usize> {
    (0..lattice.len()).filter(|&i| shell_of(&lattice.freq(i).0) == j).collect()
}

/// A single frequency or a dyadic shell.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Target {
    Mode(FreqVec),
    Shell(u32),
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Mode(n) => {
                let parts: Vec<String> = n.0.iter().map(i64::to_string).collect();
                write!(f, "n={}", parts.join(";"))
            }
            Target::Shell(j) => write!(f, "j={j}"),
        }
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Format {
            field: "shell_or_n",
            detail: format!("cannot parse target {s:?}"),
        };
        if let Some(rest) = s.strip_prefix("j=") {
            return rest.trim().parse().map(Target::Shell).map_err(|_| bad());
        }
        let rest = s.strip_prefix("n=").unwrap_or(s);
        let comps: std::result::Result<Vec<i64>, _> = rest.split(';').map(|x| x.trim().parse()).collect();
        comps.map(|c| Target::Mode(FreqVec(c))).map_err(|_| bad())
    }
}

/// Running mean and variance, mergeable in any grouping.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Accumulator {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Accumulator) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentEntry {
    pub target: Target,
    pub estimate: f64,
    /// Zero exactly for oracle values.
    pub stderr: f64,
    pub samples: u64,
}

impl MomentEntry {
    pub fn exact(target: Target, value: f64) -> Self {
        MomentEntry {
            target,
            estimate: value,
            stderr: 0.0,
            samples: 0,
        }
    }

    pub fn from_accumulator(target: Target, acc: &Accumulator) -> Self {
        MomentEntry {
            target,
            estimate: acc.mean(),
            stderr: acc.stderr(),
            samples: acc.count(),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.stderr == 0.0
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MomentTable {
    entries: Vec<MomentEntry>,
}

const HEADER: [&str; 4] = ["shell_or_n", "estimate", "stderr", "samples"];

impl MomentTable {
    pub fn new(entries: Vec<MomentEntry>) -> Result<Self> {
        for e in &entries {
            if !(e.estimate >= 0.0 && e.stderr >= 0.0) {
                return Err(crate::error::domain(format!(
                    "entry {} has negative or non-finite values",
                    e.target
                )));
            }
        }
        Ok(MomentTable { entries })
    }

    pub fn entries(&self) -> &[MomentEntry] {
        &self.entries
    }

    pub fn get(&self, target: &Target) -> Option<&MomentEntry> {
        self.entries.iter().find(|e| &e.target == target)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(HEADER)?;
        for e in &self.entries {
            w.write_record([
                e.target.to_string(),
                e.estimate.to_string(),
                e.stderr.to_string(),
                e.samples.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let headers = r.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != HEADER {
            return Err(Error::Format {
                field: "header",
                detail: format!("expected {}", HEADER.join(",")),
            });
        }
        let mut entries = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let num = |i: usize, field: &'static str| -> Result<f64> {
                rec[i].parse().map_err(|_| Error::Format {
                    field,
                    detail: format!("cannot parse {:?}", &rec[i]),
                })
            };
            entries.push(MomentEntry {
                target: rec[0].parse()?,
                estimate: num(1, "estimate")?,
                stderr: num(2, "stderr")?,
                samples: rec[3].parse().map_err(|_| Error::Format {
                    field: "samples",
                    detail: format!("cannot parse {:?}", &rec[3]),
                })?,
            });
        }
        MomentTable::new(entries)
    }
}
