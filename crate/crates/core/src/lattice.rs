//! Torus geometry, colony addressing and region classification inside colonies.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeomError {
    #[error("colony size Q = {0} must be odd and at least 3")]
    BadQ(usize),
    #[error("need at least one level, got n = {0}")]
    BadLevels(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site {
    pub x: usize,
    pub y: usize,
}

impl Site {
    pub const fn new(x: usize, y: usize) -> Self {
        Site { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ColonyAddress {
    pub level: usize,
    pub rho: (usize, usize),
}

/// An L x L torus with L = Q^n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticeGeom {
    pub q: usize,
    pub n_levels: usize,
    pub l: usize,
}

impl LatticeGeom {
    pub fn new(q: usize, n_levels: usize) -> Result<Self, GeomError> {
        if q < 3 || q.is_multiple_of(2) {
            return Err(GeomError::BadQ(q));
        }
        if n_levels == 0 {
            return Err(GeomError::BadLevels(n_levels));
        }
        Ok(LatticeGeom { q, n_levels, l: q.pow(n_levels as u32) })
    }

    pub fn sites(&self) -> usize {
        self.l * self.l
    }

    #[inline]
    pub fn index(&self, s: Site) -> usize {
        s.y * self.l + s.x
    }

    #[inline]
    pub fn site(&self, idx: usize) -> Site {
        Site::new(idx % self.l, idx / self.l)
    }

    /// Site shifted by a signed offset, wrapped onto the torus.
    #[inline]
    pub fn offset(&self, s: Site, dx: i64, dy: i64) -> Site {
        let l = self.l as i64;
        Site::new((s.x as i64 + dx).rem_euclid(l) as usize, (s.y as i64 + dy).rem_euclid(l) as usize)
    }

    /// Side length, in sites, of a level-k colony.
    pub fn colony_side(&self, k: usize) -> usize {
        self.q.pow(k as u32)
    }

    /// Cells per axis of the level-k renormalized lattice.
    pub fn cells(&self, k: usize) -> usize {
        self.l / self.colony_side(k)
    }

    pub fn colony_of(&self, s: Site, k: usize) -> ColonyAddress {
        let side = self.colony_side(k);
        ColonyAddress { level: k, rho: (s.x / side, s.y / side) }
    }

    pub fn centre_site(&self, c: ColonyAddress) -> Site {
        let side = self.colony_side(c.level);
        let off = (side - 1) / 2;
        Site::new(c.rho.0 * side + off, c.rho.1 * side + off)
    }

    /// Minimal signed displacement from `a` to `b`, components in (-L/2, L/2].
    pub fn torus_displacement(&self, a: Site, b: Site) -> (i64, i64) {
        (wrap_delta(b.x as i64 - a.x as i64, self.l as i64), wrap_delta(b.y as i64 - a.y as i64, self.l as i64))
    }

    pub fn torus_distance(&self, a: Site, b: Site) -> usize {
        let (dx, dy) = self.torus_displacement(a, b);
        (dx.unsigned_abs() + dy.unsigned_abs()) as usize
    }

    pub fn neighbours(&self, s: Site) -> [Site; 4] {
        [self.offset(s, 1, 0), self.offset(s, -1, 0), self.offset(s, 0, 1), self.offset(s, 0, -1)]
    }
}

/// Reduces `d` into (-l/2, l/2].
#[inline]
pub fn wrap_delta(d: i64, l: i64) -> i64 {
    let mut r = d.rem_euclid(l);
    if 2 * r > l {
        r -= l;
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionClass {
    WestBorder,
    SouthBorder,
    SWQuadrant,
    WestCorridor,
    NWQuadrant,
    NorthCorridor,
    NEQuadrant,
    EastCorridor,
    SEQuadrant,
    SouthCorridor,
    Centre,
}

impl RegionClass {
    pub const ALL: [RegionClass; 11] = [
        RegionClass::WestBorder,
        RegionClass::SouthBorder,
        RegionClass::SWQuadrant,
        RegionClass::WestCorridor,
        RegionClass::NWQuadrant,
        RegionClass::NorthCorridor,
        RegionClass::NEQuadrant,
        RegionClass::EastCorridor,
        RegionClass::SEQuadrant,
        RegionClass::SouthCorridor,
        RegionClass::Centre,
    ];

    /// Image under a quarter turn counter-clockwise about the colony centre.
    /// Borders have no image.
    pub fn rotate_ccw(self) -> Option<RegionClass> {
        use RegionClass::*;
        Some(match self {
            SWQuadrant => SEQuadrant,
            SEQuadrant => NEQuadrant,
            NEQuadrant => NWQuadrant,
            NWQuadrant => SWQuadrant,
            WestCorridor => SouthCorridor,
            SouthCorridor => EastCorridor,
            EastCorridor => NorthCorridor,
            NorthCorridor => WestCorridor,
            Centre => Centre,
            WestBorder | SouthBorder => return None,
        })
    }
}

/// Ordered region chain: border classes first, then the fall-through class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegionChain {
    pub west: bool,
    pub south: bool,
    pub inner: RegionClass,
}

impl RegionChain {
    pub fn classes(&self) -> Vec<RegionClass> {
        let mut v = Vec::with_capacity(3);
        if self.west {
            v.push(RegionClass::WestBorder);
        }
        if self.south {
            v.push(RegionClass::SouthBorder);
        }
        v.push(self.inner);
        v
    }

    /// The single class a site belongs to in the partition of the colony.
    pub fn primary(&self) -> RegionClass {
        if self.west {
            RegionClass::WestBorder
        } else if self.south {
            RegionClass::SouthBorder
        } else {
            self.inner
        }
    }
}

/// Classifies `rho` by its position inside its enclosing colony of side `q`.
pub fn region_of(rho: (usize, usize), q: usize) -> RegionChain {
    use std::cmp::Ordering::*;
    use RegionClass::*;
    let (x, y) = (rho.0 % q, rho.1 % q);
    let mid = q / 2;
    let inner = match (x.cmp(&mid), y.cmp(&mid)) {
        (Less, Less) => SWQuadrant,
        (Less, Equal) => WestCorridor,
        (Less, Greater) => NWQuadrant,
        (Equal, Greater) => NorthCorridor,
        (Greater, Greater) => NEQuadrant,
        (Greater, Equal) => EastCorridor,
        (Greater, Less) => SEQuadrant,
        (Equal, Less) => SouthCorridor,
        (Equal, Equal) => Centre,
    };
    RegionChain { west: x == 0, south: y == 0, inner }
}
