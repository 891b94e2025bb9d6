use std::path::Path;

use serde_json::{Map, Value};

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("dataset I/O at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed dataset: {0}")]
    Format(String),
}

/// One CSV column. Index columns are written as integers.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub unit: String,
    pub index: bool,
}

impl Column {
    pub fn real(name: &str, unit: &str) -> Self {
        Self {
            name: name.to_string(),
            unit: unit.to_string(),
            index: false,
        }
    }

    pub fn index(name: &str) -> Self {
        Self {
            name: name.to_string(),
            unit: "1".to_string(),
            index: true,
        }
    }

    fn to_json(&self) -> Value {
        serde_json::json!({"name": self.name, "unit": self.unit, "index": self.index})
    }

    fn from_json(v: &Value) -> Option<Self> {
        Some(Self {
            name: v.get("name")?.as_str()?.to_string(),
            unit: v.get("unit")?.as_str()?.to_string(),
            index: v.get("index")?.as_bool()?,
        })
    }
}

/// Rows of numbers under a schema, with a JSON metadata block.
///
/// On disk: one `# {json}` line, a header line of column names, then one
/// comma-separated line per row. Reals carry 17 significant digits, so a
/// written dataset reads back bit-identically.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
    pub metadata: Map<String, Value>,
}

/// Metadata key that varies between otherwise identical runs.
pub const WALL_TIME_KEY: &str = "wall_time_s";

/// `x` with 17 significant digits.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

impl Dataset {
    pub fn new(columns: Vec<Column>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            metadata: Map::new(),
        }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut metadata = self.metadata.clone();
        metadata.insert(
            "columns".into(),
            Value::Array(self.columns.iter().map(Column::to_json).collect()),
        );
        let mut out = format!("# {}\n", Value::Object(metadata));
        let names: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        out.push_str(&names.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .zip(&self.columns)
                .map(|(v, c)| {
                    if c.index {
                        format!("{}", *v as i64)
                    } else {
                        format_real(*v)
                    }
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, DatasetError> {
        let bad = |m: &str| DatasetError::Format(m.to_string());
        let mut lines = text.lines();
        let header = lines
            .next()
            .and_then(|l| l.strip_prefix("# "))
            .ok_or_else(|| bad("missing `# ` metadata line"))?;
        let mut metadata = match serde_json::from_str(header) {
            Ok(Value::Object(m)) => m,
            _ => return Err(bad("metadata is not a JSON object")),
        };
        let columns: Vec<Column> = metadata
            .remove("columns")
            .and_then(|v| {
                v.as_array()
                    .map(|a| a.iter().map(Column::from_json).collect::<Option<Vec<_>>>())
            })
            .flatten()
            .ok_or_else(|| bad("metadata lacks a column schema"))?;
        let names = lines.next().ok_or_else(|| bad("missing header line"))?;
        if names.split(',').ne(columns.iter().map(|c| c.name.as_str())) {
            return Err(bad("header does not match the column schema"));
        }
        let mut rows = Vec::new();
        for line in lines {
            let row = line
                .split(',')
                .map(|s| s.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| bad("unparsable number"))?;
            if row.len() != columns.len() {
                return Err(bad("row length does not match the header"));
            }
            rows.push(row);
        }
        Ok(Self {
            columns,
            rows,
            metadata,
        })
    }

    pub fn write(&self, path: &Path) -> Result<(), DatasetError> {
        let io = |source| DatasetError::Io {
            path: path.display().to_string(),
            source,
        };
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(io)?;
        }
        std::fs::write(path, self.to_csv()).map_err(io)
    }

    pub fn read(path: &Path) -> Result<Self, DatasetError> {
        let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_csv(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let mut d = Dataset::new(vec![Column::index("cell"), Column::real("x", "1/omega")]);
        d.rows = vec![
            vec![0.0, 0.1],
            vec![1.0, -1.0 / 3.0],
            vec![2.0, 6.02e23],
            vec![3.0, 5e-324],
            vec![4.0, -0.0],
        ];
        d.metadata.insert("note".into(), Value::from("a"));
        let text = d.to_csv();
        assert!(text.starts_with("# {"));
        assert!(text.contains("\ncell,x\n0,1.0000000000000001e-1\n1,-3.3333333333333331e-1\n"));
        let back = Dataset::from_csv(&text).unwrap();
        for (a, b) in back.rows.iter().flatten().zip(d.rows.iter().flatten()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(back.to_csv(), text);
        assert_eq!(back.column("x").unwrap()[2], 6.02e23);
    }

    #[test]
    fn rejects_malformed_files() {
        for text in ["", "cell\n0\n", "# []\n", "# {\"columns\":[]}\nx\n", "# {}\nx\n1\n"] {
            assert!(Dataset::from_csv(text).is_err(), "{text:?}");
        }
        let mut d = Dataset::new(vec![Column::real("x", "1")]);
        d.rows.push(vec![1.0]);
        let text = d.to_csv().replace("1.0000000000000000e0", "one");
        assert!(Dataset::from_csv(&text).is_err());
    }
}
