use std::io::{Read, Write};

use serde::Serialize;

use super::{Aggregate, HarnessError, SweepRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format '{other}'")),
        }
    }
}

pub const RECORD_HEADER: [&str; 10] = [
    "d",
    "p",
    "sample",
    "method",
    "defined",
    "gap_db",
    "visited_nodes",
    "extra_nodes",
    "max_growth_db",
    "nodes_in_clusters",
];

fn write_csv<T: Serialize>(rows: &[T], header: &[&str], out: impl Write) -> Result<(), HarnessError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    // Written by hand so an empty stream still gets its header line.
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_records_csv(records: &[SweepRecord], out: impl Write) -> Result<(), HarnessError> {
    write_csv(records, &RECORD_HEADER, out)
}

pub fn write_records(records: &[SweepRecord], format: OutputFormat, mut out: impl Write) -> Result<(), HarnessError> {
    match format {
        OutputFormat::Csv => write_records_csv(records, out),
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut out, records)?;
            writeln!(out)?;
            Ok(())
        }
    }
}

pub fn read_records_csv(input: impl Read) -> Result<Vec<SweepRecord>, HarnessError> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != RECORD_HEADER {
        return Err(HarnessError::InvalidConfig(format!(
            "unexpected CSV header: {}",
            header.join(",")
        )));
    }
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

const AGGREGATE_HEADER: [&str; 14] = [
    "d",
    "p",
    "method",
    "n",
    "skipped_empty",
    "mean_visited_nodes",
    "std_visited_nodes",
    "mean_extra_nodes",
    "std_extra_nodes",
    "mean_nodes_in_clusters",
    "mean_max_growth_db",
    "defined_fraction",
    "fraction_below",
    "fraction_below_se",
];

pub fn write_aggregates_csv(aggs: &[Aggregate], out: impl Write) -> Result<(), HarnessError> {
    write_csv(aggs, &AGGREGATE_HEADER, out)
}
