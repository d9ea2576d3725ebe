//! The `caccioppoli-partition/1` JSON file format and a JSON writer that
//! prints every float with 17 significant digits.

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use std::io;
use std::path::Path;

use super::{Partition, Partition1D, Partition2D, ValidationReport, ViolationKind};
use crate::error::{Error, Result};
use crate::labels::LabelSet;

pub const PARTITION_FORMAT: &str = "caccioppoli-partition/1";

/// On-disk form of a labelled partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionFile {
    pub format: String,
    pub dim: u8,
    pub labels: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breakpoints: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<Vec<Vec<usize>>>,
    pub cell_labels: Vec<usize>,
}

impl PartitionFile {
    pub fn from_parts(labels: &LabelSet, partition: &Partition) -> Self {
        let mut file = Self {
            format: PARTITION_FORMAT.to_string(),
            dim: partition.dim() as u8,
            labels: labels.labels().to_vec(),
            interval: None,
            breakpoints: None,
            vertices: None,
            cells: None,
            cell_labels: partition.cell_labels().to_vec(),
        };
        match partition {
            Partition::D1(p) => {
                file.interval = Some([p.interval.0, p.interval.1]);
                file.breakpoints = Some(p.breakpoints.clone());
            }
            Partition::D2(p) => {
                file.vertices = Some(p.vertices.clone());
                file.cells = Some(p.cells.clone());
            }
        }
        file
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if file.format != PARTITION_FORMAT {
            return Err(Error::Parse(format!("unsupported format tag '{}'", file.format)));
        }
        match file.dim {
            1 => {
                if file.interval.is_none() || file.vertices.is_some() || file.cells.is_some() {
                    return Err(Error::Parse("a 1D partition needs 'interval' and no 'vertices'/'cells'".into()));
                }
            }
            2 => {
                if file.vertices.is_none()
                    || file.cells.is_none()
                    || file.interval.is_some()
                    || file.breakpoints.is_some()
                {
                    return Err(Error::Parse("a 2D partition needs 'vertices' and 'cells' only".into()));
                }
            }
            d => return Err(Error::Parse(format!("unsupported dimension {d}"))),
        }
        Ok(file)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        to_json_string(self)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    /// The partition without any invariant checks.
    pub fn partition_unchecked(&self) -> Partition {
        match self.dim {
            1 => {
                let [a, b] = self.interval.unwrap_or([0.0, 0.0]);
                Partition1D::from_parts_unchecked(
                    (a, b),
                    self.breakpoints.clone().unwrap_or_default(),
                    self.cell_labels.clone(),
                )
                .into()
            }
            _ => Partition2D::from_parts_unchecked(
                self.vertices.clone().unwrap_or_default(),
                self.cells.clone().unwrap_or_default(),
                self.cell_labels.clone(),
            )
            .into(),
        }
    }

    /// Full diagnostic over the label set and the mesh.
    pub fn validate(&self) -> ValidationReport {
        let mut report = self.partition_unchecked().validate(self.labels.len());
        if let Err(e) = LabelSet::new(self.labels.clone()) {
            report.push(ViolationKind::InvalidLabelSet, e.to_string());
        }
        report
    }

    /// Label set and partition, failing on the first invariant breach.
    pub fn into_parts(&self) -> Result<(LabelSet, Partition)> {
        let labels = LabelSet::new(self.labels.clone())?;
        let partition = self.partition_unchecked();
        let report = partition.validate(labels.len());
        if !report.is_ok() {
            return Err(Error::Structural(report.to_string()));
        }
        Ok((labels, partition))
    }
}

/// Pretty JSON with floats as `d.dddddddddddddddde±x` (17 significant digits).
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("serialising to memory cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

/// Float formatting shared by the JSON and CSV writers.
pub fn format_f64(value: f64) -> String {
    if value.is_finite() {
        format!("{value:.16e}")
    } else {
        value.to_string()
    }
}

struct Sig17<'a>(PrettyFormatter<'a>);

impl Formatter for Sig17<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}
