//! Plain-text exports: histogram CSV, ASCII graymap and pair tables.
//!
//! Every writer takes `meta` lines (for example a config hash and the seed)
//! that are embedded as comments, so artifacts stay traceable to their run.

use std::io::{self, Write};

use crate::bench::PixelGrid;
use crate::model::PhotonPair;
use crate::sim::Histogram2;

/// Key/value pairs written as comment lines.
pub type Meta<'a> = &'a [(&'a str, String)];

/// `#`-prefixed metadata and grid geometry, then one line per `iy`
/// (ascending) with the counts for increasing `ix`.
pub fn write_histogram_csv<W: Write>(
    hist: &Histogram2,
    grid: &PixelGrid,
    meta: Meta,
    mut out: W,
) -> io::Result<()> {
    for (k, v) in meta {
        writeln!(out, "# {k}={v}")?;
    }
    writeln!(
        out,
        "# nx={},ny={},pitch={:e}",
        grid.nx, grid.ny, grid.pitch
    )?;
    writeln!(
        out,
        "# rows: iy ascending (y increasing); columns: ix ascending"
    )?;
    for iy in 0..hist.ny {
        let row: Vec<String> = (0..hist.nx)
            .map(|ix| hist.get(ix, iy).to_string())
            .collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Plain PGM (P2) scaled so the largest count maps to 255. The top row is
/// the largest `y`.
pub fn write_pgm<W: Write>(hist: &Histogram2, meta: Meta, mut out: W) -> io::Result<()> {
    writeln!(out, "P2")?;
    for (k, v) in meta {
        writeln!(out, "# {k}={v}")?;
    }
    writeln!(out, "{} {}", hist.nx, hist.ny)?;
    writeln!(out, "255")?;
    let max = hist.max();
    for iy in (0..hist.ny).rev() {
        let row: Vec<String> = (0..hist.nx)
            .map(|ix| {
                let c = hist.get(ix, iy);
                (255 * c + max / 2)
                    .checked_div(max)
                    .unwrap_or(0)
                    .to_string()
            })
            .collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    Ok(())
}

/// One line per pair: birth point, signal and idler direction and frequency.
pub fn write_pairs_csv<W: Write>(pairs: &[PhotonPair], meta: Meta, mut out: W) -> io::Result<()> {
    for (k, v) in meta {
        writeln!(out, "# {k}={v}")?;
    }
    writeln!(out, "bx,by,bz,sx,sy,sz,omega_s,ix,iy,iz,omega_i")?;
    for p in pairs {
        let (b, s, i) = (p.birth_point, p.signal.direction(), p.idler.direction());
        writeln!(
            out,
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            b.x,
            b.y,
            b.z,
            s.x,
            s.y,
            s.z,
            p.signal.omega(),
            i.x,
            i.y,
            i.z,
            p.idler.omega()
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hist() -> Histogram2 {
        Histogram2::from_counts(3, 2, vec![0, 1, 2, 3, 4, 10]).unwrap()
    }

    #[test]
    fn csv_layout() {
        let grid = PixelGrid {
            nx: 3,
            ny: 2,
            pitch: 1e-4,
        };
        let mut out = Vec::new();
        write_histogram_csv(&hist(), &grid, &[("seed", "7".into())], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# seed=7");
        assert_eq!(lines[1], "# nx=3,ny=2,pitch=1e-4");
        assert_eq!(&lines[3..], ["0,1,2", "3,4,10"]);
    }

    #[test]
    fn pgm_is_top_down_and_normalized() {
        let mut out = Vec::new();
        write_pgm(&hist(), &[], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text, "P2\n3 2\n255\n77 102 255\n0 26 51\n");
    }

    #[test]
    fn empty_pgm_is_black() {
        let mut out = Vec::new();
        write_pgm(&Histogram2::new(2, 1), &[], &mut out).unwrap();
        assert!(String::from_utf8(out).unwrap().ends_with("0 0\n"));
    }
}
