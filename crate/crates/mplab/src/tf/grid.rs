use std::io::{BufRead, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::util::{fmt_g17, is_power_of_two, pairwise_sum};

/// Centered uniform grid on `[−L/2, L/2)` per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    extent: Vec<f64>,
    points: Vec<usize>,
}

impl Grid {
    pub fn new(extent: Vec<f64>, points: Vec<usize>) -> Result<Self> {
        if extent.len() != points.len() || !(1..=2).contains(&extent.len()) {
            return Err(Error::Dimension("grids have one or two axes".into()));
        }
        for (&l, &n) in extent.iter().zip(&points) {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::Domain(format!("extent {l} must be positive")));
            }
            if n < 8 || !is_power_of_two(n) {
                return Err(Error::Domain(format!(
                    "point count {n} must be a power of two >= 8"
                )));
            }
        }
        Ok(Self { extent, points })
    }

    pub fn line(extent: f64, n: usize) -> Result<Self> {
        Self::new(vec![extent], vec![n])
    }

    pub fn square(extent: f64, n: usize) -> Result<Self> {
        Self::new(vec![extent; 2], vec![n; 2])
    }

    pub fn dim(&self) -> usize {
        self.extent.len()
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.extent[axis]
    }

    pub fn n(&self, axis: usize) -> usize {
        self.points[axis]
    }

    pub fn shape(&self) -> &[usize] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.extent[axis] / self.points[axis] as f64
    }

    /// `Δx^dim`, the Riemann-sum weight.
    pub fn cell(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    /// Grid of the Fourier samples: spacing `1/L`, extent `n/L`.
    pub fn dual(&self) -> Grid {
        let extent = self
            .extent
            .iter()
            .zip(&self.points)
            .map(|(&l, &n)| n as f64 / l)
            .collect();
        Grid {
            extent,
            points: self.points.clone(),
        }
    }

    pub fn coord(&self, axis: usize, k: usize) -> f64 {
        -0.5 * self.extent[axis] + k as f64 * self.spacing(axis)
    }

    pub fn coords(&self, axis: usize) -> Vec<f64> {
        (0..self.points[axis])
            .map(|k| self.coord(axis, k))
            .collect()
    }

    /// Row-major multi-index of a flat index.
    pub fn unravel(&self, flat: usize) -> Vec<usize> {
        match self.dim() {
            1 => vec![flat],
            _ => vec![flat / self.points[1], flat % self.points[1]],
        }
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        match self.dim() {
            1 => idx[0],
            _ => idx[0] * self.points[1] + idx[1],
        }
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.unravel(flat)
            .iter()
            .enumerate()
            .map(|(a, &k)| self.coord(a, k))
            .collect()
    }

    /// Signed sample offset of `x` along an axis when `x` is a multiple of `Δx`.
    pub fn offset_of(&self, axis: usize, x: f64) -> Option<i64> {
        let r = x / self.spacing(axis);
        let k = r.round();
        ((r - k).abs() < 1e-9).then_some(k as i64)
    }

    /// Grid index of `x` if it is a grid point.
    pub fn index_of(&self, axis: usize, x: f64) -> Option<usize> {
        let k = self.offset_of(axis, x + 0.5 * self.extent[axis])?;
        (0..self.points[axis] as i64)
            .contains(&k)
            .then_some(k as usize)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .enumerate()
            .all(|(a, &v)| v >= -0.5 * self.extent[a] && v < 0.5 * self.extent[a])
    }

    /// Central quarter of the index range per axis.
    pub fn central(&self, axis: usize) -> std::ops::Range<usize> {
        let n = self.points[axis];
        3 * n / 8..5 * n / 8 + 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    grid: Grid,
    values: Vec<Complex64>,
}

impl SampledField {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::Domain("field samples must be finite".into()));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_parts(grid: Grid, values: Vec<Complex64>) -> Self {
        Self { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|k| f(&grid.point(k))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn at(&self, idx: &[usize]) -> Complex64 {
        self.values[self.grid.ravel(idx)]
    }

    pub fn norm(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v.norm_sqr()).collect();
        (self.grid.cell() * pairwise_sum(&sq)).sqrt()
    }

    /// `⟨f, g⟩ = Σ f ḡ Δx^dim`.
    pub fn inner(&self, other: &SampledField) -> Result<Complex64> {
        self.same_grid(other)?;
        let terms: Vec<Complex64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .collect();
        Ok(crate::util::pairwise_sum_c(&terms) * self.grid.cell())
    }

    pub fn same_grid(&self, other: &SampledField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Dimension("fields live on different grids".into()));
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &SampledField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(&[f64], Complex64) -> Complex64) -> SampledField {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, &v)| f(&self.grid.point(k), v))
            .collect();
        SampledField {
            grid: self.grid.clone(),
            values,
        }
    }

    /// `x ↦ f(−x)`, with `−x₀` wrapping onto `x₀`.
    pub fn flip(&self) -> SampledField {
        let mut out = self.clone();
        for k in 0..self.grid.len() {
            let idx: Vec<usize> = self
                .grid
                .unravel(k)
                .iter()
                .enumerate()
                .map(|(a, &i)| (self.grid.n(a) - i) % self.grid.n(a))
                .collect();
            out.values[k] = self.values[self.grid.ravel(&idx)];
        }
        out
    }

    pub fn conj(&self) -> SampledField {
        SampledField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }

    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        let g = &self.grid;
        let ext: Vec<String> = (0..g.dim()).map(|a| fmt_g17(g.extent(a))).collect();
        let ns: Vec<String> = g.shape().iter().map(|n| n.to_string()).collect();
        writeln!(
            w,
            "# grid dim={} n={} L={}",
            g.dim(),
            ns.join(","),
            ext.join(",")
        )?;
        let idx_cols: Vec<String> = (0..g.dim()).map(|a| format!("k{a}")).collect();
        writeln!(w, "{},real,imag", idx_cols.join(","))?;
        for (k, v) in self.values.iter().enumerate() {
            let idx: Vec<String> = g.unravel(k).iter().map(|i| i.to_string()).collect();
            writeln!(w, "{},{},{}", idx.join(","), fmt_g17(v.re), fmt_g17(v.im))?;
        }
        Ok(())
    }

    pub fn read_csv(r: impl BufRead, source: &str) -> Result<Self> {
        let bad = |msg: String| Error::Parse {
            field: source.to_string(),
            msg,
        };
        let mut lines = r.lines();
        let head = lines.next().ok_or_else(|| bad("empty file".into()))??;
        let grid = parse_grid_header(&head).map_err(|m| bad(m))?;
        lines
            .next()
            .ok_or_else(|| bad("missing column header".into()))??;
        let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
        let mut seen = vec![false; grid.len()];
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != grid.dim() + 2 {
                return Err(bad(format!(
                    "line {}: expected {} columns",
                    lineno + 3,
                    grid.dim() + 2
                )));
            }
            let mut idx = Vec::with_capacity(grid.dim());
            for (a, c) in cols[..grid.dim()].iter().enumerate() {
                let i: usize = c
                    .parse()
                    .map_err(|_| bad(format!("line {}: bad index {c:?}", lineno + 3)))?;
                if i >= grid.n(a) {
                    return Err(bad(format!("line {}: index {i} out of range", lineno + 3)));
                }
                idx.push(i);
            }
            let num = |c: &str| {
                c.parse::<f64>()
                    .map_err(|_| bad(format!("line {}: bad number {c:?}", lineno + 3)))
            };
            let k = grid.ravel(&idx);
            values[k] = Complex64::new(num(cols[grid.dim()])?, num(cols[grid.dim() + 1])?);
            seen[k] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(bad("missing samples".into()));
        }
        SampledField::new(grid, values)
    }

    /// Little-endian: `u32 dim`, `u32 n` per axis, `f64 L` per axis, then `re, im` pairs.
    pub fn write_binary(&self, w: &mut impl Write) -> Result<()> {
        let g = &self.grid;
        w.write_all(&(g.dim() as u32).to_le_bytes())?;
        for &n in g.shape() {
            w.write_all(&(n as u32).to_le_bytes())?;
        }
        for a in 0..g.dim() {
            w.write_all(&g.extent(a).to_le_bytes())?;
        }
        for v in &self.values {
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(mut r: impl Read, source: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Parse {
            field: source.to_string(),
            msg: msg.to_string(),
        };
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4).map_err(|_| bad("truncated header"))?;
        let dim = u32::from_le_bytes(b4) as usize;
        if !(1..=2).contains(&dim) {
            return Err(bad("dim must be 1 or 2"));
        }
        let mut ns = Vec::with_capacity(dim);
        for _ in 0..dim {
            r.read_exact(&mut b4).map_err(|_| bad("truncated header"))?;
            ns.push(u32::from_le_bytes(b4) as usize);
        }
        let mut ls = Vec::with_capacity(dim);
        for _ in 0..dim {
            r.read_exact(&mut b8).map_err(|_| bad("truncated header"))?;
            ls.push(f64::from_le_bytes(b8));
        }
        let grid = Grid::new(ls, ns).map_err(|e| bad(&e.to_string()))?;
        let mut values = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            r.read_exact(&mut b8)
                .map_err(|_| bad("truncated samples"))?;
            let re = f64::from_le_bytes(b8);
            r.read_exact(&mut b8)
                .map_err(|_| bad("truncated samples"))?;
            values.push(Complex64::new(re, f64::from_le_bytes(b8)));
        }
        if r.read(&mut b4)? != 0 {
            return Err(bad("trailing bytes"));
        }
        SampledField::new(grid, values).map_err(|e| bad(&e.to_string()))
    }

    /// Reads CSV or binary, chosen by content.
    pub fn load(path: &Path) -> Result<Self> {
        let bytes =
            std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let name = path.display().to_string();
        if bytes.starts_with(b"#") {
            SampledField::read_csv(std::io::Cursor::new(bytes), &name)
        } else {
            SampledField::read_binary(std::io::Cursor::new(bytes), &name)
        }
    }
}

fn parse_grid_header(line: &str) -> std::result::Result<Grid, String> {
    let body = line
        .strip_prefix('#')
        .ok_or("first line must be a '# grid' header")?
        .trim();
    let body = body
        .strip_prefix("grid")
        .ok_or("first line must be a '# grid' header")?;
    let (mut dim, mut ns, mut ls) = (None, None, None);
    for kv in body.split_whitespace() {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| format!("malformed header token {kv:?}"))?;
        match k {
            "dim" => dim = Some(v.parse::<usize>().map_err(|_| format!("bad dim {v:?}"))?),
            "n" => {
                ns = Some(
                    v.split(',')
                        .map(|s| s.parse::<usize>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|_| format!("bad n {v:?}"))?,
                )
            }
            "L" => {
                ls = Some(
                    v.split(',')
                        .map(|s| s.parse::<f64>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|_| format!("bad L {v:?}"))?,
                )
            }
            _ => return Err(format!("unknown header key {k:?}")),
        }
    }
    let (dim, ns, ls) = (
        dim.ok_or("missing dim")?,
        ns.ok_or("missing n")?,
        ls.ok_or("missing L")?,
    );
    if ns.len() != dim || ls.len() != dim {
        return Err("header axis count does not match dim".into());
    }
    Grid::new(ls, ns).map_err(|e| e.to_string())
}

/// `f(x) = e^{(iπc − a)|x|²}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianChirp {
    pub a: f64,
    pub c: f64,
}

impl GaussianChirp {
    pub fn new(a: f64, c: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite() && c.is_finite()) {
            return Err(Error::Domain(format!(
                "Gaussian rate a = {a} must be positive"
            )));
        }
        Ok(Self { a, c })
    }

    pub fn standard() -> Self {
        Self {
            a: std::f64::consts::PI,
            c: 0.0,
        }
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        Complex64::new(-self.a * r2, std::f64::consts::PI * self.c * r2).exp()
    }

    pub fn sample(&self, grid: &Grid) -> SampledField {
        SampledField::from_fn(grid.clone(), |x| self.eval(x))
    }

    /// Exact `f̂(ξ) = (π/α)^{d/2} e^{−π²|ξ|²/α}` with `α = a − iπc`.
    pub fn fourier(&self, xi: &[f64]) -> Complex64 {
        let pi = std::f64::consts::PI;
        let alpha = Complex64::new(self.a, -pi * self.c);
        let r2: f64 = xi.iter().map(|v| v * v).sum();
        (Complex64::from(pi) / alpha).powf(0.5 * xi.len() as f64) * (-(pi * pi * r2) / alpha).exp()
    }

    /// Rate `b` in `|f̂(ξ)| = (a²/π² + c²)^{−d/4} e^{−b|ξ|²}`.
    pub fn spectral_rate(&self) -> f64 {
        let pi = std::f64::consts::PI;
        pi * pi * self.a / (self.a * self.a + pi * pi * self.c * self.c)
    }

    pub fn spectral_amplitude(&self, d: usize) -> f64 {
        let pi = std::f64::consts::PI;
        (self.a * self.a / (pi * pi) + self.c * self.c).powf(-0.25 * d as f64)
    }

    pub fn fourier_magnitude(&self, xi: &[f64]) -> f64 {
        let r2: f64 = xi.iter().map(|v| v * v).sum();
        self.spectral_amplitude(xi.len()) * (-self.spectral_rate() * r2).exp()
    }
}
