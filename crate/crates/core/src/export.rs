//! Plain-text and image writers for indicator grids and peak tables.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::inversion::{IndicatorGrid, IndicatorKind, PeakSet};
use crate::Result;

/// `x,y,value` rows in grid order (row-major, `y` outer).
pub fn grid_csv(g: &IndicatorGrid) -> String {
    let mut out = String::from("x,y,value\n");
    for (p, v) in g.samples() {
        out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", p.x, p.y, v));
    }
    out
}

pub fn write_grid_csv(g: &IndicatorGrid, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, grid_csv(g))?;
    Ok(())
}

/// Affine map from indicator values to 16-bit gray levels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrayMap {
    pub min: f64,
    pub max: f64,
}

impl GrayMap {
    pub fn for_grid(g: &IndicatorGrid) -> Self {
        let min = g.values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = g.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        GrayMap { min, max }
    }

    pub fn gray(&self, v: f64) -> u16 {
        if self.max <= self.min {
            return 0;
        }
        let t = ((v - self.min) / (self.max - self.min)).clamp(0.0, 1.0);
        (t * 65535.0).round() as u16
    }

    pub fn value(&self, gray: u16) -> f64 {
        self.min + (self.max - self.min) * gray as f64 / 65535.0
    }
}

/// Sidecar path `<image>.map` next to a PGM file.
pub fn sidecar_path(pgm: &Path) -> PathBuf {
    let mut name = pgm.as_os_str().to_owned();
    name.push(".map");
    PathBuf::from(name)
}

/// Binary 16-bit PGM (maxval 65535, big-endian). The first image row is the
/// top of the grid (`y = ymax`). A text sidecar records the gray mapping.
pub fn write_grid_pgm(g: &IndicatorGrid, path: impl AsRef<Path>) -> Result<GrayMap> {
    let path = path.as_ref();
    let map = GrayMap::for_grid(g);
    let (nx, ny) = (g.grid.nx, g.grid.ny);
    let mut bytes = format!("P5\n{nx} {ny}\n65535\n").into_bytes();
    bytes.reserve(2 * nx * ny);
    for iy in (0..ny).rev() {
        for ix in 0..nx {
            bytes.extend_from_slice(&map.gray(g.value(ix, iy)).to_be_bytes());
        }
    }
    fs::write(path, bytes)?;

    let kind = match g.kind {
        IndicatorKind::Obstacle => "obstacle",
        IndicatorKind::Source => "source",
    };
    let mut side = fs::File::create(sidecar_path(path))?;
    writeln!(side, "kind {kind}")?;
    writeln!(side, "normalized {}", g.normalized)?;
    writeln!(side, "degenerate {}", g.degenerate)?;
    writeln!(side, "value = min + (max - min) * gray / 65535")?;
    writeln!(side, "min {:.16e}", map.min)?;
    writeln!(side, "max {:.16e}", map.max)?;
    writeln!(side, "columns x {:.16e} .. {:.16e} ({nx})", g.grid.xmin, g.grid.xmax)?;
    writeln!(side, "rows y {:.16e} .. {:.16e} ({ny}), first row is ymax", g.grid.ymax, g.grid.ymin)?;
    Ok(map)
}

/// `x,y,value` rows, strongest peak first.
pub fn peaks_csv(peaks: &PeakSet) -> String {
    let mut out = String::from("x,y,value\n");
    for p in &peaks.peaks {
        out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", p.point.x, p.point.y, p.value));
    }
    out
}

pub fn write_peaks_csv(peaks: &PeakSet, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, peaks_csv(peaks))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SamplingGrid;
    use crate::inversion::{extract_peaks, IndicatorKind};
    use nalgebra::DMatrix;

    fn ramp() -> IndicatorGrid {
        let grid = SamplingGrid::new((0.0, 2.0, -1.0, 1.0), 3, 2).unwrap();
        IndicatorGrid {
            grid,
            values: DMatrix::from_row_slice(2, 3, &[-1.0, 0.0, 1.0, 2.0, 3.0, 4.0]),
            kind: IndicatorKind::Source,
            normalized: false,
            degenerate: false,
            reference_scale: 0.0,
        }
    }

    #[test]
    fn csv_is_row_major() {
        let csv = grid_csv(&ramp());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x,y,value");
        assert_eq!(lines.len(), 7);
        let second: Vec<f64> = lines[2].split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(second, vec![1.0, -1.0, 0.0]);
        let fourth: Vec<f64> = lines[4].split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(fourth, vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn pgm_layout_and_mapping() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.pgm");
        let map = write_grid_pgm(&ramp(), &path).unwrap();
        assert_eq!((map.min, map.max), (-1.0, 4.0));
        let bytes = fs::read(&path).unwrap();
        let header = b"P5\n3 2\n65535\n";
        assert_eq!(&bytes[..header.len()], header);
        let px: Vec<u16> = bytes[header.len()..]
            .chunks(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect();
        // top row is y = ymax
        assert_eq!(px[0], 39321);
        assert_eq!(px[5], 26214);
        assert_eq!(px[3], 0);
        assert_eq!(px[2], 65535);
        assert!((map.value(px[4]) - 0.0).abs() < 1e-4);
        let side = fs::read_to_string(sidecar_path(&path)).unwrap();
        assert!(side.contains("min -1.0000000000000000e0"));
    }

    #[test]
    fn peaks_table() {
        let g = ramp();
        let csv = peaks_csv(&extract_peaks(&g, 0.5, 0.1));
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.lines().nth(1).unwrap().starts_with("2.0000000000000000e0,1.0000000000000000e0,4"));
    }
}
