//! File formats: CSV field files, flat key=value configs, JSON reports.
//!
//! Reals are serialized with 17 significant digits so a save/load round
//! trip reproduces every value to the bit. Writes go through a temp file in
//! the same directory followed by a rename, so a crash mid-write never
//! leaves a partially written output observable.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::energy::{CoupledGSpec, NonlinearitySpec};
use crate::error::{Error, Result};
use crate::grid::{Field1D, Field2D, Grid1D, Grid2D};

fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Parse { what: path.display().to_string(), reason: reason.into() }
}

fn tmp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".tmp");
    path.with_file_name(name)
}

/// Write via temp-file + rename; on producer failure the temp file is
/// removed and the target is left untouched.
pub fn write_atomic(path: &Path, produce: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let tmp = tmp_path(path);
    let mut file = fs::File::create(&tmp)?;
    if let Err(e) = produce(&mut file) {
        drop(file);
        let _ = fs::remove_file(&tmp);
        return Err(e);
    }
    file.flush()?;
    drop(file);
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_bytes_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    write_atomic(path, |w| {
        w.write_all(bytes)?;
        Ok(())
    })
}

/// CSV with header `x,value`. Moduli are taken on ingestion.
pub fn read_field_1d(path: &Path) -> Result<Field1D> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| parse_err(path, "empty file"))?;
    if header.trim() != "x,value" {
        return Err(parse_err(path, format!("expected header 'x,value', got '{header}'")));
    }
    let mut xs = Vec::new();
    let mut values = Vec::new();
    for (k, line) in lines.enumerate() {
        let mut parts = line.split(',');
        let x: f64 = parts
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| parse_err(path, format!("bad x in row {}", k + 2)))?;
        let v: f64 = parts
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| parse_err(path, format!("bad value in row {}", k + 2)))?;
        xs.push(x);
        values.push(v.abs());
    }
    if xs.is_empty() {
        return Err(parse_err(path, "no data rows"));
    }
    let n = xs.len();
    let h = if n >= 2 { (xs[n - 1] - xs[0]) / (n - 1) as f64 } else { 1.0 };
    if n >= 2 {
        if !(h.is_finite() && h > 0.0) {
            return Err(parse_err(path, "x not increasing"));
        }
        for (i, &x) in xs.iter().enumerate() {
            if (x - (xs[0] + i as f64 * h)).abs() > 1e-9 * h {
                return Err(parse_err(path, format!("non-uniform spacing at row {}", i + 2)));
            }
        }
    }
    Field1D::new(Grid1D::new(xs[0], h, n)?, values)
}

pub fn write_field_1d(path: &Path, field: &Field1D) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "x,value")?;
        for i in 0..field.n() {
            writeln!(w, "{},{}", fmt_real(field.grid().center(i)), fmt_real(field.values()[i]))?;
        }
        Ok(())
    })
}

/// CSV with header `x,y,value`, row-major over a rectangular grid.
pub fn read_field_2d(path: &Path) -> Result<Field2D> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| parse_err(path, "empty file"))?;
    if header.trim() != "x,y,value" {
        return Err(parse_err(path, format!("expected header 'x,y,value', got '{header}'")));
    }
    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    for (k, line) in lines.enumerate() {
        let mut parts = line.split(',');
        let mut next = |what: &str| -> Result<f64> {
            parts
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| parse_err(path, format!("bad {what} in row {}", k + 2)))
        };
        let x = next("x")?;
        let y = next("y")?;
        let v = next("value")?;
        rows.push((x, y, v.abs()));
    }
    if rows.is_empty() {
        return Err(parse_err(path, "no data rows"));
    }
    let y0 = rows[0].1;
    let nx = rows.iter().take_while(|r| r.1 == y0).count();
    if nx == 0 || rows.len() % nx != 0 {
        return Err(parse_err(path, "rows do not form a rectangular grid"));
    }
    let ny = rows.len() / nx;
    let hx = if nx >= 2 { (rows[nx - 1].0 - rows[0].0) / (nx - 1) as f64 } else { 1.0 };
    let hy = if ny >= 2 { (rows[(ny - 1) * nx].1 - y0) / (ny - 1) as f64 } else { 1.0 };
    for (hname, hval) in [("hx", hx), ("hy", hy)] {
        if !(hval.is_finite() && hval > 0.0) {
            return Err(parse_err(path, format!("{hname} not positive")));
        }
    }
    let x0 = rows[0].0;
    for j in 0..ny {
        for i in 0..nx {
            let (x, y, _) = rows[j * nx + i];
            if (x - (x0 + i as f64 * hx)).abs() > 1e-9 * hx
                || (y - (y0 + j as f64 * hy)).abs() > 1e-9 * hy
            {
                return Err(parse_err(path, format!("grid not rectangular at row {}", j * nx + i + 2)));
            }
        }
    }
    let values = rows.into_iter().map(|r| r.2).collect();
    Field2D::new(Grid2D::new(x0, y0, hx, hy, nx, ny)?, values)
}

pub fn write_field_2d(path: &Path, field: &Field2D) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "x,y,value")?;
        let g = field.grid();
        for j in 0..g.ny() {
            for i in 0..g.nx() {
                writeln!(
                    w,
                    "{},{},{}",
                    fmt_real(g.x_center(i)),
                    fmt_real(g.y_center(j)),
                    fmt_real(field.values()[j * g.nx() + i])
                )?;
            }
        }
        Ok(())
    })
}

/// Two or more named columns of reals; the plot-data format.
pub fn write_csv_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "{}", header.join(","))?;
        for row in rows {
            let line: Vec<String> = row.iter().map(|v| fmt_real(*v)).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    })
}

/// Flat `key=value` config with `#` comments.
pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path)?;
    parse_config(&text).map_err(|reason| parse_err(path, reason))
}

pub fn parse_config(text: &str) -> std::result::Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value", k + 1))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// A nonlinearity described by a config file.
#[derive(Debug, Clone)]
pub enum SpecConfig {
    Scalar(NonlinearitySpec),
    Coupled(CoupledGSpec),
}

fn get_f64(map: &BTreeMap<String, String>, key: &str) -> Result<f64> {
    map.get(key)
        .ok_or_else(|| Error::Config { reason: format!("missing key '{key}'") })?
        .parse()
        .map_err(|_| Error::Config { reason: format!("key '{key}' is not a number") })
}

fn get_f64_or(map: &BTreeMap<String, String>, key: &str, default: f64) -> Result<f64> {
    match map.get(key) {
        None => Ok(default),
        Some(s) => s
            .parse()
            .map_err(|_| Error::Config { reason: format!("key '{key}' is not a number") }),
    }
}

/// Build a spec from a parsed config map. `kind=power` needs `p`;
/// `kind=coupled` needs `a1,r1,a2,r2,beta,gamma1,gamma2`; `kind=tabulated`
/// needs `points=s:F;s:F;...`. `dim` defaults to 1.
pub fn spec_from_config(map: &BTreeMap<String, String>) -> Result<SpecConfig> {
    let kind = map
        .get("kind")
        .ok_or_else(|| Error::Config { reason: "missing key 'kind'".into() })?;
    let dim = get_f64_or(map, "dim", 1.0)? as usize;
    match kind.as_str() {
        "power" => Ok(SpecConfig::Scalar(NonlinearitySpec::power(get_f64(map, "p")?, dim)?)),
        "tabulated" => {
            let raw = map
                .get("points")
                .ok_or_else(|| Error::Config { reason: "missing key 'points'".into() })?;
            let mut points = Vec::new();
            for pair in raw.split(';') {
                let (s, f) = pair
                    .split_once(':')
                    .ok_or_else(|| Error::Config { reason: format!("bad point '{pair}'") })?;
                let s: f64 = s.trim().parse().map_err(|_| Error::Config { reason: format!("bad point '{pair}'") })?;
                let f: f64 = f.trim().parse().map_err(|_| Error::Config { reason: format!("bad point '{pair}'") })?;
                points.push((s, f));
            }
            Ok(SpecConfig::Scalar(NonlinearitySpec::tabulated(points, dim)?))
        }
        "coupled" => Ok(SpecConfig::Coupled(CoupledGSpec::new(
            dim,
            get_f64(map, "a1")?,
            get_f64_or(map, "r1", 2.0)?,
            get_f64(map, "a2")?,
            get_f64_or(map, "r2", 2.0)?,
            get_f64(map, "beta")?,
            get_f64_or(map, "gamma1", 1.0)?,
            get_f64_or(map, "gamma2", 1.0)?,
        )?)),
        other => Err(Error::Config { reason: format!("unknown kind '{other}'") }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;

    #[test]
    fn field_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.csv");
        let grid = Grid1D::new(-1.2345678901234567, 0.0625, 64).unwrap();
        let u = Field1D::sample(grid, |x| (x * 3.7).sin().abs() * (-0.2 * x * x).exp()).unwrap();
        write_field_1d(&path, &u).unwrap();
        let back = read_field_1d(&path).unwrap();
        assert_eq!(back.n(), u.n());
        assert_eq!(back.h().to_bits(), u.h().to_bits());
        for (a, b) in u.values().iter().zip(back.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn field_2d_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u2.csv");
        let grid = Grid2D::new(-2.0, -1.0, 0.25, 0.5, 8, 4).unwrap();
        let u = Field2D::sample(grid, |x, y| (x + 2.0 * y).abs()).unwrap();
        write_field_2d(&path, &u).unwrap();
        let back = read_field_2d(&path).unwrap();
        assert_eq!(back.grid(), u.grid());
        for (a, b) in u.values().iter().zip(back.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn ingestion_takes_moduli() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("neg.csv");
        std::fs::write(&path, "x,value\n0.0,-1.5\n1.0,2.0\n").unwrap();
        let u = read_field_1d(&path).unwrap();
        assert_eq!(u.values(), &[1.5, 2.0]);
    }

    #[test]
    fn non_uniform_spacing_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "x,value\n0.0,1.0\n1.0,1.0\n2.5,1.0\n").unwrap();
        assert!(matches!(read_field_1d(&path), Err(Error::Parse { .. })));
    }

    #[test]
    fn atomic_write_leaves_no_partial_file_on_failure() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.json");
        let result = write_atomic(&path, |w| {
            w.write_all(b"partial")?;
            Err(Error::Config { reason: "injected crash".into() })
        });
        assert!(result.is_err());
        assert!(!path.exists());
        assert!(!tmp_path(&path).exists());

        // A prior complete file survives a failed overwrite.
        write_bytes_atomic(&path, b"good").unwrap();
        let result = write_atomic(&path, |w| {
            w.write_all(b"broken half")?;
            Err(Error::Config { reason: "injected crash".into() })
        });
        assert!(result.is_err());
        assert_eq!(std::fs::read(&path).unwrap(), b"good");
    }

    #[test]
    fn config_parsing_and_specs() {
        let map = parse_config("# comment\nkind=power\np = 3\n").unwrap();
        match spec_from_config(&map).unwrap() {
            SpecConfig::Scalar(s) => assert_eq!(s.f(2.0), 8.0),
            _ => panic!("expected scalar"),
        }
        let map = parse_config("kind=coupled\na1=0.25\na2=0.25\nbeta=0.5\nr1=2\nr2=2\n").unwrap();
        match spec_from_config(&map).unwrap() {
            SpecConfig::Coupled(g) => assert!(g.beta > 0.0),
            _ => panic!("expected coupled"),
        }
        assert!(spec_from_config(&parse_config("kind=power\n").unwrap()).is_err());
    }

    #[test]
    fn empty_table_writes_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_csv_table(&path, &["alpha", "energy"], &[]).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "alpha,energy\n");
    }
}
