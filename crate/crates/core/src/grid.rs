//! n x n region grids and permutations of their cells.
//!
//! Cells are numbered in reading order: cell `i` sits at grid column
//! `i % n`, grid row `i / n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::ImageBuffer;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegionGrid {
    pub n: usize,
    pub cell_width: usize,
    pub cell_height: usize,
}

impl RegionGrid {
    pub fn cells(&self) -> usize {
        self.n * self.n
    }

    /// Pixel origin of cell `i`.
    pub fn origin(&self, i: usize) -> (usize, usize) {
        ((i % self.n) * self.cell_width, (i / self.n) * self.cell_height)
    }
}

pub fn partition(img: &ImageBuffer, n: usize) -> Result<RegionGrid> {
    if n == 0 {
        return Err(Error::InvalidParam("grid order must be at least 1".into()));
    }
    if !img.width().is_multiple_of(n) {
        return Err(Error::NotDivisible {
            dimension: "width",
            size: img.width(),
            divisor: n,
        });
    }
    if !img.height().is_multiple_of(n) {
        return Err(Error::NotDivisible {
            dimension: "height",
            size: img.height(),
            divisor: n,
        });
    }
    Ok(RegionGrid {
        n,
        cell_width: img.width() / n,
        cell_height: img.height() / n,
    })
}

/// A bijection on the `n * n` cells of a grid. Output cell `i` takes input
/// cell `mapping[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct GridPermutation {
    n: usize,
    mapping: Vec<usize>,
}

impl GridPermutation {
    pub fn new(n: usize, mapping: Vec<usize>) -> Result<Self> {
        if n == 0 || mapping.len() != n * n {
            return Err(Error::InvalidParam(format!(
                "grid permutation of order {n} needs {} entries, got {}",
                n * n,
                mapping.len()
            )));
        }
        let mut seen = vec![false; mapping.len()];
        for &m in &mapping {
            if m >= mapping.len() || std::mem::replace(&mut seen[m], true) {
                return Err(Error::InvalidParam(format!(
                    "mapping {mapping:?} is not a bijection"
                )));
            }
        }
        Ok(Self { n, mapping })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            mapping: (0..n * n).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn is_identity(&self) -> bool {
        self.mapping.iter().enumerate().all(|(i, &m)| i == m)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.mapping.len()];
        for (i, &m) in self.mapping.iter().enumerate() {
            inv[m] = i;
        }
        Self {
            n: self.n,
            mapping: inv,
        }
    }

    /// Permutation equivalent to applying `self` and then `next`.
    pub fn then(&self, next: &GridPermutation) -> Result<Self> {
        if self.n != next.n {
            return Err(Error::ShapeMismatch(format!(
                "cannot compose grid orders {} and {}",
                self.n, next.n
            )));
        }
        Ok(Self {
            n: self.n,
            mapping: next.mapping.iter().map(|&m| self.mapping[m]).collect(),
        })
    }
}

impl TryFrom<Vec<usize>> for GridPermutation {
    type Error = Error;

    fn try_from(mapping: Vec<usize>) -> Result<Self> {
        let n = (mapping.len() as f64).sqrt().round() as usize;
        Self::new(n, mapping)
    }
}

impl From<GridPermutation> for Vec<usize> {
    fn from(p: GridPermutation) -> Self {
        p.mapping
    }
}

pub fn apply_grid_permutation(img: &ImageBuffer, perm: &GridPermutation) -> Result<ImageBuffer> {
    let grid = partition(img, perm.n)?;
    let mut out = img.clone();
    for (dst, &src) in perm.mapping.iter().enumerate() {
        let (sx, sy) = grid.origin(src);
        let (dx, dy) = grid.origin(dst);
        let cell = img.crop(sx, sy, grid.cell_width, grid.cell_height)?;
        out.paste(&cell, dx, dy)?;
    }
    Ok(out)
}

/// The grid cells of `img` in reading order.
pub fn split_cells(img: &ImageBuffer, n: usize) -> Result<Vec<ImageBuffer>> {
    let grid = partition(img, n)?;
    (0..grid.cells())
        .map(|i| {
            let (x, y) = grid.origin(i);
            img.crop(x, y, grid.cell_width, grid.cell_height)
        })
        .collect()
}

/// Inverse of [`split_cells`].
pub fn join_cells(cells: &[ImageBuffer], n: usize) -> Result<ImageBuffer> {
    let first = cells
        .first()
        .ok_or_else(|| Error::EmptyInput("no cells to join".into()))?;
    if cells.len() != n * n {
        return Err(Error::ShapeMismatch(format!(
            "{} cells cannot fill a {n}x{n} grid",
            cells.len()
        )));
    }
    let (cw, ch, c) = (first.width(), first.height(), first.channels());
    let mut out = ImageBuffer::filled(cw * n, ch * n, c, 0.0)?;
    for (i, cell) in cells.iter().enumerate() {
        if (cell.width(), cell.height(), cell.channels()) != (cw, ch, c) {
            return Err(Error::ShapeMismatch("cells differ in shape".into()));
        }
        out.paste(cell, (i % n) * cw, (i / n) * ch)?;
    }
    Ok(out)
}
