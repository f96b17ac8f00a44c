//! Input side of the library: discrete fields (grids of samples, scattered
//! point sets), the text formats they load from, and the distance metrics the
//! graph constructors run on.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::object::{ObjectKind, PropValue, SpatialObject};

/// A regular 2-D grid of numeric samples, row-major, optionally multi-channel.
///
/// Row 0 is the top row; `(row, col)` indexes throughout. All stored values
/// are finite — constructors reject NaN and infinities.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    width: usize,
    height: usize,
    channels: usize,
    spacing: [f64; 2],
    values: Vec<f64>,
}

impl GridField {
    pub fn new(width: usize, height: usize, channels: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || channels == 0 {
            return Err(Error::Empty("grid dimensions must be positive".into()));
        }
        if values.len() != width * height * channels {
            return Err(Error::Format(format!(
                "expected {} values for a {}x{}x{} grid, got {}",
                width * height * channels,
                width,
                height,
                channels,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Format(format!("non-finite grid value {v}")));
        }
        Ok(GridField {
            width,
            height,
            channels,
            spacing: [1.0, 1.0],
            values,
        })
    }

    /// Single-channel grid from a list of equal-length rows.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty("no rows".into()));
        }
        let width = rows[0].len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != width) {
            return Err(Error::Format(format!(
                "ragged grid: row 0 has {} values, row {} has {}",
                width,
                i,
                r.len()
            )));
        }
        let height = rows.len();
        GridField::new(width, height, 1, rows.into_iter().flatten().collect())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn spacing(&self) -> [f64; 2] {
        self.spacing
    }

    /// Grid spacing per axis as `[row step, col step]`; both must be positive.
    pub fn set_spacing(&mut self, spacing: [f64; 2]) -> Result<()> {
        if !(spacing[0] > 0.0 && spacing[1] > 0.0) || !spacing.iter().all(|s| s.is_finite()) {
            return Err(Error::Argument(format!("spacing must be positive, got {spacing:?}")));
        }
        self.spacing = spacing;
        Ok(())
    }

    /// Channel-0 value at `(row, col)`. Panics on out-of-range indices.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.get_channel(row, col, 0)
    }

    pub fn get_channel(&self, row: usize, col: usize, channel: usize) -> f64 {
        assert!(row < self.height && col < self.width && channel < self.channels);
        self.values[(row * self.width + col) * self.channels + channel]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_binary(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0 || v == 1.0)
    }
}

/// Parse a whitespace-separated text grid (one line per row, single channel).
/// Blank lines are ignored; ragged rows and non-numeric tokens are errors.
pub fn load_grid_text(text: &str) -> Result<GridField> {
    let mut rows = Vec::new();
    let mut width = None;
    for (lineno, line) in text.lines().enumerate() {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        match width {
            None => width = Some(toks.len()),
            Some(w) if w != toks.len() => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("ragged row: expected {} values, got {}", w, toks.len()),
                })
            }
            _ => {}
        }
        let mut row = Vec::with_capacity(toks.len());
        for t in toks {
            let v: f64 = t.parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                msg: format!("not a number: {t:?}"),
            })?;
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Empty("grid text contains no rows".into()));
    }
    GridField::from_rows(rows)
}

/// Render a single-channel grid back to the text format `load_grid_text`
/// reads. Integer-valued samples print without a decimal point, so an
/// integer grid round-trips byte-for-byte.
pub fn emit_grid_text(field: &GridField) -> Result<String> {
    if field.channels != 1 {
        return Err(Error::Argument("grid text is single-channel".into()));
    }
    let mut out = String::new();
    for r in 0..field.height {
        for c in 0..field.width {
            if c > 0 {
                out.push(' ');
            }
            let v = field.get(r, c);
            if v.fract() == 0.0 && v.abs() < 9e15 {
                out.push_str(&format!("{}", v as i64));
            } else {
                out.push_str(&format!("{v}"));
            }
        }
        out.push('\n');
    }
    Ok(out)
}

/// Parse a plain (ASCII, `P2`) PGM image into a single-channel grid.
/// `#` comments are allowed anywhere between tokens, as the format permits.
pub fn load_pgm(text: &str) -> Result<GridField> {
    let mut tokens = Vec::new();
    for line in text.lines() {
        let content = match line.find('#') {
            Some(i) => &line[..i],
            None => line,
        };
        tokens.extend(content.split_whitespace().map(str::to_string));
    }
    let mut it = tokens.into_iter();
    match it.next() {
        Some(magic) if magic == "P2" => {}
        Some(other) => {
            return Err(Error::Format(format!(
                "expected plain PGM magic 'P2', got {other:?}"
            )))
        }
        None => return Err(Error::Empty("empty PGM input".into())),
    }
    let mut next_int = |what: &str| -> Result<i64> {
        let tok = it
            .next()
            .ok_or_else(|| Error::Format(format!("PGM truncated before {what}")))?;
        tok.parse()
            .map_err(|_| Error::Format(format!("bad PGM {what}: {tok:?}")))
    };
    let width = next_int("width")?;
    let height = next_int("height")?;
    let maxval = next_int("maxval")?;
    if width <= 0 || height <= 0 {
        return Err(Error::Format(format!("bad PGM dimensions {width}x{height}")));
    }
    if maxval <= 0 {
        return Err(Error::Format(format!("bad PGM maxval {maxval}")));
    }
    let n = (width * height) as usize;
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        let v = next_int("sample")?;
        if v < 0 || v > maxval {
            return Err(Error::Format(format!(
                "PGM sample {v} outside 0..={maxval}"
            )));
        }
        values.push(v as f64);
    }
    GridField::new(width as usize, height as usize, 1, values)
}

/// A finite ordered set of 2-D or 3-D points, optionally with a per-point
/// value vector attached. Point order is preserved: for orbit data the order
/// is the sampling order.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    points: Vec<Vec<f64>>,
    values: Option<Vec<Vec<f64>>>,
}

impl PointSet {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("no points".into()));
        }
        let dim = points[0].len();
        if dim != 2 && dim != 3 {
            return Err(Error::Format(format!("points must be 2-D or 3-D, got {dim} coordinates")));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::Format(format!(
                    "point {} has {} coordinates, expected {}",
                    i,
                    p.len(),
                    dim
                )));
            }
            if let Some(c) = p.iter().find(|c| !c.is_finite()) {
                return Err(Error::Format(format!("non-finite coordinate {c} in point {i}")));
            }
        }
        Ok(PointSet {
            dim,
            points,
            values: None,
        })
    }

    /// Attach one value vector per point (all the same length).
    pub fn with_values(mut self, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != self.points.len() {
            return Err(Error::Format(format!(
                "{} value vectors for {} points",
                values.len(),
                self.points.len()
            )));
        }
        let arity = values.first().map_or(0, Vec::len);
        if values.iter().any(|v| v.len() != arity) {
            return Err(Error::Format("ragged value vectors".into()));
        }
        self.values = Some(values);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn values(&self) -> Option<&[Vec<f64>]> {
        self.values.as_deref()
    }
}

/// Parse comma-separated numeric rows into a point set. Every row must have
/// the same arity, and the arity picks the dimension (2 or 3).
pub fn load_points_csv(text: &str) -> Result<PointSet> {
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut coords = Vec::new();
        for tok in line.split(',') {
            let t = tok.trim();
            let v: f64 = t.parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                msg: format!("not a number: {t:?}"),
            })?;
            coords.push(v);
        }
        points.push(coords);
    }
    if points.is_empty() {
        return Err(Error::Empty("CSV contains no rows".into()));
    }
    PointSet::new(points)
}

/// Distance function used by the knn and minimum-spanning-tree constructors.
#[derive(Clone)]
pub enum Metric {
    Euclidean,
    Manhattan,
    Chebyshev,
    Custom {
        name: String,
        f: Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>,
    },
}

impl Metric {
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Metric::Chebyshev => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max),
            Metric::Custom { f, .. } => f(a, b),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Manhattan => "manhattan",
            Metric::Chebyshev => "chebyshev",
            Metric::Custom { name, .. } => name,
        }
    }

    /// Look a built-in metric up by name (the names `name()` reports).
    pub fn by_name(name: &str) -> Result<Metric> {
        match name {
            "euclidean" => Ok(Metric::Euclidean),
            "manhattan" => Ok(Metric::Manhattan),
            "chebyshev" => Ok(Metric::Chebyshev),
            other => Err(Error::Argument(format!("unknown metric {other:?}"))),
        }
    }
}

impl Default for Metric {
    fn default() -> Self {
        Metric::Euclidean
    }
}

impl fmt::Debug for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Metric({})", self.name())
    }
}

/// One pixel object per grid cell, row-major. Each object's geometry is its
/// cell center as `(x, y) = (col, row)`; row, col, and sampled value ride
/// along as properties.
pub fn field_cells(field: &GridField) -> Vec<SpatialObject> {
    let mut cells = Vec::with_capacity(field.width() * field.height());
    for r in 0..field.height() {
        for c in 0..field.width() {
            let mut obj = SpatialObject::new(ObjectKind::Pixel, vec![vec![c as f64, r as f64]])
                .with_prop("row", r)
                .with_prop("col", c)
                .with_prop("value", field.get(r, c));
            if field.channels() > 1 {
                let all: Vec<PropValue> = (0..field.channels())
                    .map(|ch| PropValue::Real(field.get_channel(r, c, ch)))
                    .collect();
                obj = obj.with_prop("values", all);
            }
            cells.push(obj);
        }
    }
    cells
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_text_round_trip_is_exact_on_integer_grids() {
        let text = "0 1 1\n1 0 1\n";
        let g = load_grid_text(text).unwrap();
        assert_eq!((g.width(), g.height()), (3, 2));
        assert_eq!(emit_grid_text(&g).unwrap(), text);
    }

    #[test]
    fn grid_text_round_trip_preserves_real_values() {
        let g = GridField::from_rows(vec![vec![0.5, 1.25], vec![-3.0, 1e-9]]).unwrap();
        let back = load_grid_text(&emit_grid_text(&g).unwrap()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn ragged_grid_is_a_parse_error() {
        let err = load_grid_text("1 2 3\n4 5\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn empty_grid_is_an_empty_error() {
        assert!(matches!(load_grid_text("\n\n"), Err(Error::Empty(_))));
    }

    #[test]
    fn non_numeric_token_is_a_parse_error() {
        let err = load_grid_text("1 x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn nan_is_rejected() {
        assert!(GridField::from_rows(vec![vec![f64::NAN]]).is_err());
        assert!(PointSet::new(vec![vec![0.0, f64::INFINITY]]).is_err());
    }

    #[test]
    fn pgm_with_comments_parses() {
        let text = "P2\n# a comment\n3 2 # inline\n255\n0 10 20\n30 40 50\n";
        let g = load_pgm(text).unwrap();
        assert_eq!((g.width(), g.height()), (3, 2));
        assert_eq!(g.get(1, 2), 50.0);
    }

    #[test]
    fn pgm_rejects_binary_magic_and_range_violations() {
        assert!(matches!(load_pgm("P5\n1 1\n255\n0"), Err(Error::Format(_))));
        assert!(matches!(
            load_pgm("P2\n1 1\n10\n11"),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn csv_single_point_3d() {
        let ps = load_points_csv("1,2,3\n").unwrap();
        assert_eq!(ps.dim(), 3);
        assert_eq!(ps.len(), 1);
        assert_eq!(ps.point(0), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn csv_mixed_arity_is_an_error() {
        assert!(load_points_csv("1,2\n3,4,5\n").is_err());
    }

    #[test]
    fn csv_preserves_point_order() {
        let ps = load_points_csv("0,0\n5,0\n1,1\n").unwrap();
        assert_eq!(ps.point(1), &[5.0, 0.0]);
    }

    #[test]
    fn metric_values() {
        let a = [0.0, 0.0];
        let b = [3.0, 4.0];
        assert_eq!(Metric::Euclidean.distance(&a, &b), 5.0);
        assert_eq!(Metric::Manhattan.distance(&a, &b), 7.0);
        assert_eq!(Metric::Chebyshev.distance(&a, &b), 4.0);
    }

    #[test]
    fn field_cells_are_row_major_with_location_and_value() {
        let g = GridField::from_rows(vec![vec![0.0, 1.0], vec![2.0, 3.0]]).unwrap();
        let cells = field_cells(&g);
        assert_eq!(cells.len(), 4);
        // Second cell is (row 0, col 1).
        assert_eq!(cells[1].int_prop("row"), Some(0));
        assert_eq!(cells[1].int_prop("col"), Some(1));
        assert_eq!(cells[1].real_prop("value"), Some(1.0));
        assert_eq!(cells[1].point2(0), Some([1.0, 0.0]));
        // Third cell is (row 1, col 0).
        assert_eq!(cells[2].real_prop("value"), Some(2.0));
    }

    #[test]
    fn spacing_must_be_positive() {
        let mut g = GridField::from_rows(vec![vec![0.0]]).unwrap();
        assert!(g.set_spacing([0.5, 2.0]).is_ok());
        assert!(g.set_spacing([0.0, 1.0]).is_err());
    }
}
