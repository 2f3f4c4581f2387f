//! Tabulated functions on a rectangular grid in the upper half plane, read
//! from CSV rows `re, im, value[, value_im]` and evaluated by tensor-product
//! Lagrange interpolation.

use std::io::Read;

use num_complex::Complex64;
use thetalift::{Error, Result};

/// A function sampled on the grid `xs × ys`.
#[derive(Debug, Clone)]
pub struct TabulatedFunction {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// `values[i * ys.len() + j]` is the sample at `(xs[i], ys[j])`.
    values: Vec<Complex64>,
    order: usize,
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup();
    v
}

fn position(nodes: &[f64], x: f64) -> Option<usize> {
    nodes.binary_search_by(|n| n.total_cmp(&x)).ok()
}

/// Start of the window of `order + 1` nodes around `x` and the Lagrange
/// weights on it.
fn lagrange_window(nodes: &[f64], x: f64, order: usize) -> Result<(usize, Vec<f64>)> {
    let (lo, hi) = (nodes[0], nodes[nodes.len() - 1]);
    if !(lo..=hi).contains(&x) {
        return Err(Error::Domain(format!("{x} lies outside the tabulated range [{lo}, {hi}]")));
    }
    let k = order + 1;
    let right = nodes.partition_point(|n| *n < x);
    let start = right.saturating_sub(k / 2).min(nodes.len() - k);
    let window = &nodes[start..start + k];
    let weights = (0..k)
        .map(|i| {
            (0..k)
                .filter(|&j| j != i)
                .map(|j| (x - window[j]) / (window[i] - window[j]))
                .product()
        })
        .collect();
    Ok((start, weights))
}

impl TabulatedFunction {
    /// Parses CSV rows `re, im, value[, value_im]`; a header row is allowed.
    /// Every grid node must be present exactly once.
    pub fn from_csv<R: Read>(reader: R, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::Invalid("interpolation order must be at least 1".into()));
        }
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).flexible(true).from_reader(reader);
        let mut rows = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Invalid(format!("table line {}: {e}", line + 1)))?;
            let fields: Vec<f64> = match rec.iter().map(str::parse::<f64>).collect::<std::result::Result<_, _>>() {
                Ok(f) => f,
                Err(_) if line == 0 => continue,
                Err(e) => return Err(Error::Invalid(format!("table line {}: {e}", line + 1))),
            };
            if !(3..=4).contains(&fields.len()) {
                return Err(Error::Invalid(format!("table line {}: expected 3 or 4 columns", line + 1)));
            }
            rows.push((fields[0], fields[1], Complex64::new(fields[2], *fields.get(3).unwrap_or(&0.0))));
        }
        let xs = sorted_unique(rows.iter().map(|r| r.0).collect());
        let ys = sorted_unique(rows.iter().map(|r| r.1).collect());
        if xs.len() <= order || ys.len() <= order {
            return Err(Error::Invalid(format!("order {order} needs more than {order} grid lines in each direction")));
        }
        if rows.len() != xs.len() * ys.len() {
            return Err(Error::Invalid(format!("{} rows do not fill a {} x {} grid", rows.len(), xs.len(), ys.len())));
        }
        let mut values = vec![None; rows.len()];
        for (x, y, v) in rows {
            let idx = position(&xs, x).unwrap() * ys.len() + position(&ys, y).unwrap();
            if values[idx].replace(v).is_some() {
                return Err(Error::Invalid(format!("duplicate grid node ({x}, {y})")));
            }
        }
        let values = values.into_iter().map(|v| v.unwrap()).collect();
        Ok(TabulatedFunction { xs, ys, values, order })
    }

    /// Interpolated value at `tau`.
    pub fn eval(&self, tau: Complex64) -> Result<Complex64> {
        let (sx, wx) = lagrange_window(&self.xs, tau.re, self.order)?;
        let (sy, wy) = lagrange_window(&self.ys, tau.im, self.order)?;
        let mut total = Complex64::new(0.0, 0.0);
        for (i, a) in wx.iter().enumerate() {
            for (j, b) in wy.iter().enumerate() {
                total += self.values[(sx + i) * self.ys.len() + sy + j] * (a * b);
            }
        }
        Ok(total)
    }
}
