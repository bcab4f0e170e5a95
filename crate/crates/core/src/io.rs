//! The matrix file format and serialization of algebra-valued data.
//!
//! ```json
//! {"version":1,"rows":2,"cols":2,"shape":[1],
//!  "entries":[[[[[[1,0]]]],[[[[1,0]]]]],[[[[[1,0]]]],[[[[-1,0]]]]]]}
//! ```
//!
//! `entries[i][j][x]` is the `Kₓ×Kₓ` block of entry `(i, j)` on fiber `x`,
//! row-major, each complex number a `[re, im]` pair. Numbers may also be
//! given as strings, which is the only way to spell a non-finite value; such
//! values are rejected with `NONFINITE`.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::algebra::{AlgElem, AlgebraShape, Block};
use crate::hadamard::NCMatrix;
use crate::json;
use crate::magic::MagicUnitary;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("malformed JSON: {0}")]
    Malformed(String),

    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("non-finite number at {0}")]
    NonFinite(String),

    #[error("unsupported format version {0}")]
    UnsupportedVersion(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl FileError {
    pub fn code(&self) -> &'static str {
        match self {
            FileError::Malformed(_) => "MALFORMED_JSON",
            FileError::DimMismatch(_) => "DIM_MISMATCH",
            FileError::NonFinite(_) => "NONFINITE",
            FileError::UnsupportedVersion(_) => "UNSUPPORTED_VERSION",
            FileError::Io { .. } => "IO",
        }
    }
}

type FileResult<T> = std::result::Result<T, FileError>;

struct BlockRef<'a>(&'a Block);

impl Serialize for BlockRef<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let b = self.0;
        let rows: Vec<Vec<[f64; 2]>> = (0..b.nrows())
            .map(|r| (0..b.ncols()).map(|c| [b[(r, c)].re, b[(r, c)].im]).collect())
            .collect();
        rows.serialize(serializer)
    }
}

/// An element is written as its list of fiber blocks; the shape is implied
/// by the enclosing object.
impl Serialize for AlgElem {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.blocks().iter().map(BlockRef))
    }
}

impl Serialize for NCMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let entries: Vec<&[AlgElem]> = self.entries().chunks(self.cols()).collect();
        let mut st = serializer.serialize_struct("MatrixFile", 5)?;
        st.serialize_field("version", &FORMAT_VERSION)?;
        st.serialize_field("rows", &self.rows())?;
        st.serialize_field("cols", &self.cols())?;
        st.serialize_field("shape", self.shape())?;
        st.serialize_field("entries", &entries)?;
        st.end()
    }
}

impl Serialize for MagicUnitary {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let entries: Vec<&[AlgElem]> = self.entries().chunks(self.size()).collect();
        let mut st = serializer.serialize_struct("MagicUnitary", 3)?;
        st.serialize_field("size", &self.size())?;
        st.serialize_field("shape", self.algebra())?;
        st.serialize_field("entries", &entries)?;
        st.end()
    }
}

pub fn to_json_string(h: &NCMatrix) -> String {
    json::to_string(h).expect("matrix serialization is infallible")
}

pub fn save(h: &NCMatrix, path: impl AsRef<Path>) -> FileResult<()> {
    let path = path.as_ref();
    let mut text = to_json_string(h);
    text.push('\n');
    fs::write(path, text).map_err(|source| FileError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load(path: impl AsRef<Path>) -> FileResult<NCMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| FileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    from_json_str(&text)
}

fn classify_syntax_error(text: &str, err: serde_json::Error) -> FileError {
    let msg = err.to_string();
    // bare NaN / Infinity tokens are not JSON but are what a careless writer emits
    let bare_nonfinite = ["NaN", "Infinity"].iter().any(|tok| {
        text.match_indices(tok).any(|(at, _)| {
            let before = text[..at].chars().rev().find(|c| !c.is_whitespace() && *c != '-');
            !matches!(before, Some('"'))
        })
    });
    if msg.contains("number out of range") || bare_nonfinite {
        FileError::NonFinite(format!("line {} column {}", err.line(), err.column()))
    } else {
        FileError::Malformed(msg)
    }
}

fn field<'a>(obj: &'a serde_json::Map<String, Value>, key: &str) -> FileResult<&'a Value> {
    obj.get(key).ok_or_else(|| FileError::Malformed(format!("missing field '{key}'")))
}

fn positive_int(v: &Value, what: &str) -> FileResult<usize> {
    match v.as_u64() {
        Some(n) if n > 0 => usize::try_from(n).map_err(|_| FileError::DimMismatch(format!("{what} too large"))),
        Some(_) => Err(FileError::DimMismatch(format!("{what} must be positive"))),
        None => Err(FileError::Malformed(format!("{what} must be a positive integer"))),
    }
}

fn array<'a>(v: &'a Value, len: usize, at: &str) -> FileResult<&'a [Value]> {
    let items = v
        .as_array()
        .ok_or_else(|| FileError::Malformed(format!("{at} must be an array")))?;
    if items.len() != len {
        return Err(FileError::DimMismatch(format!(
            "{at} has length {}, expected {len}",
            items.len()
        )));
    }
    Ok(items)
}

fn number(v: &Value, at: &str) -> FileResult<f64> {
    let x = match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| FileError::Malformed(format!("{at} is not representable")))?,
        Value::String(s) => s
            .trim()
            .parse::<f64>()
            .map_err(|_| FileError::Malformed(format!("{at}: '{s}' is not a number")))?,
        _ => return Err(FileError::Malformed(format!("{at} must be a number"))),
    };
    if x.is_finite() {
        Ok(x)
    } else {
        Err(FileError::NonFinite(at.to_string()))
    }
}

pub fn from_json_str(text: &str) -> FileResult<NCMatrix> {
    let root: Value = serde_json::from_str(text).map_err(|e| classify_syntax_error(text, e))?;
    let obj = root
        .as_object()
        .ok_or_else(|| FileError::Malformed("top level must be an object".into()))?;
    let version = field(obj, "version")?;
    if version.as_u64() != Some(FORMAT_VERSION) {
        return Err(FileError::UnsupportedVersion(version.to_string()));
    }
    let rows = positive_int(field(obj, "rows")?, "rows")?;
    let cols = positive_int(field(obj, "cols")?, "cols")?;
    let fibers = field(obj, "shape")?
        .as_array()
        .ok_or_else(|| FileError::Malformed("shape must be an array".into()))?
        .iter()
        .enumerate()
        .map(|(x, k)| positive_int(k, &format!("shape[{x}]")))
        .collect::<FileResult<Vec<usize>>>()?;
    let shape = AlgebraShape::new(fibers).map_err(|e| FileError::DimMismatch(e.to_string()))?;

    let grid = array(field(obj, "entries")?, rows, "entries")?;
    let mut entries = Vec::with_capacity(rows * cols);
    for (i, row) in grid.iter().enumerate() {
        let row = array(row, cols, &format!("entries[{i}]"))?;
        for (j, entry) in row.iter().enumerate() {
            let at = format!("entries[{i}][{j}]");
            let fibers = array(entry, shape.num_fibers(), &at)?;
            let mut blocks = Vec::with_capacity(fibers.len());
            for (x, (fib, &k)) in fibers.iter().zip(shape.fibers()).enumerate() {
                let at = format!("{at}[{x}]");
                let mut block: Block = DMatrix::zeros(k, k);
                for (r, brow) in array(fib, k, &at)?.iter().enumerate() {
                    for (c, pair) in array(brow, k, &format!("{at}[{r}]"))?.iter().enumerate() {
                        let at = format!("{at}[{r}][{c}]");
                        let pair = array(pair, 2, &at)?;
                        block[(r, c)] = Complex64::new(number(&pair[0], &at)?, number(&pair[1], &at)?);
                    }
                }
                blocks.push(block);
            }
            let elem = AlgElem::from_blocks(shape.clone(), blocks).map_err(|e| FileError::DimMismatch(e.to_string()))?;
            entries.push(elem);
        }
    }
    NCMatrix::new(shape, rows, cols, entries).map_err(|e| FileError::DimMismatch(e.to_string()))
}
