//! CSV tables with a commented metadata header.

use std::io::Write;

/// Power of the hopping carried by a column, used to rescale reported units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    /// Energies, rates and currents.
    Rate,
    Time,
    InverseEnergy,
    Plain,
    /// Printed as an integer.
    Count,
}

impl Dimension {
    fn power(self) -> i32 {
        match self {
            Dimension::Rate => 1,
            Dimension::Time | Dimension::InverseEnergy => -1,
            Dimension::Plain | Dimension::Count => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub dimension: Dimension,
}

impl Column {
    fn new(name: impl Into<String>, dimension: Dimension) -> Self {
        Self { name: name.into(), dimension }
    }
    pub fn rate(name: impl Into<String>) -> Self {
        Self::new(name, Dimension::Rate)
    }
    pub fn time(name: impl Into<String>) -> Self {
        Self::new(name, Dimension::Time)
    }
    pub fn inverse_energy(name: impl Into<String>) -> Self {
        Self::new(name, Dimension::InverseEnergy)
    }
    pub fn plain(name: impl Into<String>) -> Self {
        Self::new(name, Dimension::Plain)
    }
    pub fn count(name: impl Into<String>) -> Self {
        Self::new(name, Dimension::Count)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<Column>,
    /// Values in units of the hopping.
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: Vec<Column>, rows: Vec<Vec<f64>>) -> Self {
        debug_assert!(rows.iter().all(|r| r.len() == columns.len()));
        Self { columns, rows }
    }

    /// Cell `(row, col)` rescaled to the energy unit `hopping`, 17 significant digits.
    pub fn formatted(&self, row: usize, col: usize, hopping: f64) -> String {
        let column = &self.columns[col];
        let v = self.rows[row][col];
        match column.dimension {
            Dimension::Count => format!("{}", v as i64),
            d => format!("{:.16e}", v * hopping.powi(d.power())),
        }
    }

    /// Comment lines, then the column header, then one record per row.
    pub fn write_csv<W: Write>(&self, mut out: W, header: &str, hopping: f64) -> std::io::Result<()> {
        for line in header.lines() {
            writeln!(out, "# {line}")?;
        }
        let mut csv = csv::Writer::from_writer(out);
        csv.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        for r in 0..self.rows.len() {
            csv.write_record((0..self.columns.len()).map(|c| self.formatted(r, c, hopping)))?;
        }
        csv.flush()
    }
}
