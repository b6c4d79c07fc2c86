//! Grid function serialization.
//!
//! CSV layout:
//!
//! ```text
//! # lattice dim=2 h=0.25 lo=-4,-4 shape=9,9
//! # exterior {"kind":"zero"}
//! i0,i1,value
//! -4,-4,0.125
//! ```
//!
//! Indices are global lattice indices (node coordinate = `h * index`);
//! values use the shortest representation that round-trips.
//!
//! The binary layout is little-endian: magic `FGRD`, `u32` version, `u32`
//! dimension, `f64` spacing, `dim` × `i64` offsets, `dim` × `u64` shape,
//! `u32` length of the exterior JSON, the JSON bytes, then one `f64` per node.

use std::io::{Read, Write};

use super::grid::{ExteriorModel, GridFunction};
use super::lattice::Lattice;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"FGRD";
const VERSION: u32 = 1;

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

pub fn write_csv<W: Write>(f: &GridFunction, mut out: W) -> Result<()> {
    let lat = &f.lattice;
    writeln!(
        out,
        "# lattice dim={} h={} lo={} shape={}",
        lat.dim(),
        lat.h(),
        join(lat.index_offset()),
        join(lat.shape())
    )?;
    writeln!(out, "# exterior {}", serde_json::to_string(&f.exterior).map_err(io_err)?)?;
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (0..lat.dim()).map(|k| format!("i{k}")).collect();
    header.push("value".into());
    w.write_record(&header).map_err(io_err)?;
    for (i, v) in f.values.iter().enumerate() {
        let g = lat.global_index(i);
        let mut row: Vec<String> = g[..lat.dim()].iter().map(ToString::to_string).collect();
        row.push(v.to_string());
        w.write_record(&row).map_err(io_err)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',').map(|x| x.trim().parse().map_err(|_| Error::Io(format!("bad list entry {x:?}")))).collect()
}

pub fn read_csv<R: Read>(input: R) -> Result<GridFunction> {
    let mut text = String::new();
    let mut input = input;
    input.read_to_string(&mut text)?;
    let mut lines = text.lines();
    let head = lines.next().and_then(|l| l.strip_prefix("# lattice ")).ok_or_else(|| io_err("missing lattice line"))?;
    let ext =
        lines.next().and_then(|l| l.strip_prefix("# exterior ")).ok_or_else(|| io_err("missing exterior line"))?;
    let mut dim = None;
    let mut h = None;
    let mut lo = None;
    let mut shape = None;
    for field in head.split_whitespace() {
        let (k, v) = field.split_once('=').ok_or_else(|| io_err(format!("bad lattice field {field:?}")))?;
        match k {
            "dim" => dim = Some(v.parse::<usize>().map_err(io_err)?),
            "h" => h = Some(v.parse::<f64>().map_err(io_err)?),
            "lo" => lo = Some(parse_list::<i64>(v)?),
            "shape" => shape = Some(parse_list::<usize>(v)?),
            _ => return Err(io_err(format!("unknown lattice field {k:?}"))),
        }
    }
    let (dim, h, lo, shape) = match (dim, h, lo, shape) {
        (Some(a), Some(b), Some(c), Some(d)) => (a, b, c, d),
        _ => return Err(io_err("incomplete lattice line")),
    };
    let lattice = Lattice::new(dim, h, &lo, &shape)?;
    let exterior: ExteriorModel = serde_json::from_str(ext).map_err(io_err)?;
    let body: String = lines.collect::<Vec<_>>().join("\n");
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let mut values = vec![f64::NAN; lattice.len()];
    let mut seen = vec![false; lattice.len()];
    for rec in reader.records() {
        let rec = rec.map_err(io_err)?;
        if rec.len() != dim + 1 {
            return Err(io_err(format!("row with {} fields, expected {}", rec.len(), dim + 1)));
        }
        let mut g = [0i64; 3];
        for k in 0..dim {
            g[k] = rec[k].parse().map_err(io_err)?;
        }
        let i = lattice.index_of(&g).ok_or_else(|| io_err(format!("index {g:?} outside the lattice")))?;
        if seen[i] {
            return Err(io_err(format!("duplicate row for index {g:?}")));
        }
        seen[i] = true;
        values[i] = rec[dim].parse().map_err(io_err)?;
    }
    if seen.iter().any(|s| !s) {
        return Err(io_err("missing rows"));
    }
    GridFunction::new(lattice, values, exterior)
}

pub fn write_binary<W: Write>(f: &GridFunction, mut out: W) -> Result<()> {
    let lat = &f.lattice;
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(lat.dim() as u32).to_le_bytes())?;
    out.write_all(&lat.h().to_le_bytes())?;
    for v in lat.index_offset() {
        out.write_all(&v.to_le_bytes())?;
    }
    for v in lat.shape() {
        out.write_all(&(*v as u64).to_le_bytes())?;
    }
    let json = serde_json::to_vec(&f.exterior).map_err(io_err)?;
    out.write_all(&(json.len() as u32).to_le_bytes())?;
    out.write_all(&json)?;
    for v in &f.values {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn take<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

pub fn read_binary<R: Read>(mut input: R) -> Result<GridFunction> {
    if &take::<4, _>(&mut input)? != MAGIC {
        return Err(io_err("not a grid file"));
    }
    let version = u32::from_le_bytes(take(&mut input)?);
    if version != VERSION {
        return Err(io_err(format!("unsupported version {version}")));
    }
    let dim = u32::from_le_bytes(take(&mut input)?) as usize;
    if dim == 0 || dim > 3 {
        return Err(io_err(format!("bad dimension {dim}")));
    }
    let h = f64::from_le_bytes(take(&mut input)?);
    let mut lo = vec![0i64; dim];
    for v in lo.iter_mut() {
        *v = i64::from_le_bytes(take(&mut input)?);
    }
    let mut shape = vec![0usize; dim];
    for v in shape.iter_mut() {
        *v = u64::from_le_bytes(take(&mut input)?) as usize;
    }
    let lattice = Lattice::new(dim, h, &lo, &shape)?;
    let len = u32::from_le_bytes(take(&mut input)?) as usize;
    let mut json = vec![0u8; len];
    input.read_exact(&mut json)?;
    let exterior: ExteriorModel = serde_json::from_slice(&json).map_err(io_err)?;
    let mut values = Vec::with_capacity(lattice.len());
    for _ in 0..lattice.len() {
        values.push(f64::from_le_bytes(take(&mut input)?));
    }
    GridFunction::new(lattice, values, exterior)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> GridFunction {
        let lat = Lattice::new(2, 0.3, &[-2, 1], &[4, 3]).unwrap();
        let ext = ExteriorModel::RadialPower { center: vec![0.1, 0.2], amplitude: -0.5, exponent: 0.25, offset: 1.0 };
        GridFunction::from_fn(lat, ext, |x| (x[0] * 7.1).sin() / 3.0 + x[1]).unwrap()
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let f = sample();
        let mut buf = Vec::new();
        write_csv(&f, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, f);
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# lattice dim=2 h=0.3 lo=-2,1 shape=4,3\n"));
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let f = sample();
        let mut buf = Vec::new();
        write_binary(&f, &mut buf).unwrap();
        assert_eq!(read_binary(buf.as_slice()).unwrap(), f);
        buf[0] = b'X';
        assert!(read_binary(buf.as_slice()).is_err());
    }

    #[test]
    fn csv_with_missing_rows_is_rejected() {
        let f = sample();
        let mut buf = Vec::new();
        write_csv(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let truncated: String = text.lines().take(5).map(|l| format!("{l}\n")).collect();
        assert!(read_csv(truncated.as_bytes()).is_err());
    }
}
