//! JSONL and CSV record writers.

use std::io::{self, Write};

use clap::ValueEnum;
use serde::Serialize;

use treesample::oracle::ExactEntry;
use treesample::scaling::ScalingReport;
use treesample::{Algorithm, Graph, Matrix, SworDraw, Tree, TreeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Jsonl,
    Csv,
}

#[derive(Serialize)]
struct SampleRecord<'a> {
    parents: &'a [usize],
    weight: f64,
    log_weight: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    steps: Option<u64>,
}

#[derive(Serialize)]
struct SworRecord<'a> {
    parents: &'a [usize],
    weight: f64,
    log_weight: f64,
    conditional_probability: f64,
}

#[derive(Serialize)]
struct SworSummary {
    requested: usize,
    returned: usize,
    exhausted: bool,
}

#[derive(Serialize)]
struct EnumRecord<'a> {
    parents: &'a [usize],
    weight: f64,
    probability: f64,
}

#[derive(Serialize)]
struct PartitionRecord {
    z_mtt: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    z_oracle: Option<f64>,
    kind: TreeKind,
}

#[derive(Serialize)]
struct TimingRecord {
    n: usize,
    algorithm: &'static str,
    mean_seconds: f64,
    std_seconds: f64,
    samples: usize,
}

#[derive(Serialize)]
struct SlopeRecord {
    algorithm: &'static str,
    slope: Option<f64>,
}

fn join(parents: &[usize]) -> String {
    parents.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

/// Writes one record per line, emitting a CSV header before the first row.
pub struct RecordWriter<'w> {
    out: &'w mut dyn Write,
    format: Format,
    header_done: bool,
}

impl<'w> RecordWriter<'w> {
    pub fn new(out: &'w mut dyn Write, format: Format) -> Self {
        RecordWriter { out, format, header_done: false }
    }

    fn json<T: Serialize>(&mut self, value: &T) -> io::Result<()> {
        serde_json::to_writer(&mut *self.out, value)?;
        writeln!(self.out)
    }

    fn header(&mut self, columns: &str) -> io::Result<()> {
        if !self.header_done {
            writeln!(self.out, "{columns}")?;
            self.header_done = true;
        }
        Ok(())
    }

    pub fn sample(&mut self, g: &Graph, tree: &Tree, steps: Option<u64>) -> io::Result<()> {
        let weight = g.tree_weight(tree).map_err(io::Error::other)?;
        let log_weight = g.tree_log_weight(tree).map_err(io::Error::other)?;
        match self.format {
            Format::Jsonl => {
                self.json(&SampleRecord { parents: tree.parents(), weight, log_weight, steps })
            }
            Format::Csv => {
                self.header("parents,weight,log_weight,steps")?;
                let steps = steps.map(|s| s.to_string()).unwrap_or_default();
                writeln!(self.out, "{},{weight},{log_weight},{steps}", join(tree.parents()))
            }
        }
    }

    pub fn swor_draw(&mut self, g: &Graph, d: &SworDraw) -> io::Result<()> {
        let log_weight = g.tree_log_weight(&d.tree).map_err(io::Error::other)?;
        match self.format {
            Format::Jsonl => self.json(&SworRecord {
                parents: d.tree.parents(),
                weight: d.weight,
                log_weight,
                conditional_probability: d.conditional_probability,
            }),
            Format::Csv => {
                self.header("parents,weight,log_weight,conditional_probability")?;
                writeln!(
                    self.out,
                    "{},{},{log_weight},{}",
                    join(d.tree.parents()),
                    d.weight,
                    d.conditional_probability
                )
            }
        }
    }

    pub fn swor_summary(&mut self, requested: usize, returned: usize, exhausted: bool) -> io::Result<()> {
        match self.format {
            Format::Jsonl => {
                #[derive(Serialize)]
                struct Wrapper {
                    summary: SworSummary,
                }
                self.json(&Wrapper { summary: SworSummary { requested, returned, exhausted } })
            }
            Format::Csv => writeln!(
                self.out,
                "# requested {requested}, returned {returned}, exhausted {exhausted}"
            ),
        }
    }

    pub fn exact_entry(&mut self, e: &ExactEntry) -> io::Result<()> {
        match self.format {
            Format::Jsonl => self.json(&EnumRecord {
                parents: e.tree.parents(),
                weight: e.weight,
                probability: e.probability,
            }),
            Format::Csv => {
                self.header("parents,weight,probability")?;
                writeln!(self.out, "{},{},{}", join(e.tree.parents()), e.weight, e.probability)
            }
        }
    }

    /// One line per row; CSV values are comma-separated, JSONL rows are arrays.
    pub fn matrix(&mut self, m: &Matrix) -> io::Result<()> {
        for i in 0..m.rows() {
            let row = m.row(i);
            match self.format {
                Format::Jsonl => self.json(&row)?,
                Format::Csv => {
                    let cells: Vec<String> = row.iter().map(f64::to_string).collect();
                    writeln!(self.out, "{}", cells.join(","))?;
                }
            }
        }
        Ok(())
    }

    pub fn partition(&mut self, z_mtt: f64, z_oracle: Option<f64>, kind: TreeKind) -> io::Result<()> {
        match self.format {
            Format::Jsonl => self.json(&PartitionRecord { z_mtt, z_oracle, kind }),
            Format::Csv => {
                self.header("z_mtt,z_oracle,kind")?;
                let oracle = z_oracle.map(|z| z.to_string()).unwrap_or_default();
                writeln!(self.out, "{z_mtt},{oracle},{kind}")
            }
        }
    }

    /// Timing rows, then one slope row per algorithm.
    pub fn bench(&mut self, report: &ScalingReport, algorithms: &[Algorithm]) -> io::Result<()> {
        for r in &report.rows {
            match self.format {
                Format::Jsonl => self.json(&TimingRecord {
                    n: r.n,
                    algorithm: r.algorithm.as_str(),
                    mean_seconds: r.mean_seconds,
                    std_seconds: r.std_seconds,
                    samples: r.samples,
                })?,
                Format::Csv => {
                    self.header("n,algorithm,mean_seconds,std_seconds,samples")?;
                    writeln!(
                        self.out,
                        "{},{},{:e},{:e},{}",
                        r.n, r.algorithm, r.mean_seconds, r.std_seconds, r.samples
                    )?;
                }
            }
        }
        for &a in algorithms {
            let slope = report.slope(a);
            match self.format {
                Format::Jsonl => self.json(&SlopeRecord { algorithm: a.as_str(), slope })?,
                Format::Csv => {
                    let s = slope.map(|s| format!("{s:.4}")).unwrap_or_default();
                    writeln!(self.out, "slope,{a},{s},,")?;
                }
            }
        }
        Ok(())
    }

    pub fn finish(self) -> io::Result<()> {
        self.out.flush()
    }
}
