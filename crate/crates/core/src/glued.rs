//! Function systems on non-unital spaces, glued from unital pieces.
//!
//! Within a piece the distance is that piece's canonical ultrametric (at most
//! `λ`), across pieces it is `1/λ`. A map of piece `i` sends every other
//! piece to its own fixed point in piece `i`.

use std::fmt;

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::ifs::{build_ifs_unital, Caps, FixedPoint, FunctionSystem, IfsSystem};
use crate::metric::{fresh_context, Profile};
use crate::par::Exec;
use crate::space::{FractalVerdict, Multiplicity, OrdinalSpace};
use crate::tree::{check_lambda, lambda_pow, Branch};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GluedPoint {
    pub piece: usize,
    pub branch: Branch,
}

impl fmt::Display for GluedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X{}:{}", self.piece, self.branch)
    }
}

#[derive(Debug)]
pub struct GluedIfs {
    context: u64,
    lambda: BigRational,
    pieces: Vec<(OrdinalSpace, IfsSystem)>,
    /// `(piece, map within piece)` for each extended map.
    maps: Vec<(usize, usize)>,
    /// Fixed branch of each extended map; only needed with several pieces.
    fixed: Vec<Option<Branch>>,
    caps: Caps,
    exec: Exec,
}

/// Splits `x` into unital pieces, builds one system per piece and glues.
pub fn build_ifs_general(x: &OrdinalSpace, lambda: BigRational) -> Result<GluedIfs> {
    check_lambda(&lambda)?;
    let (height, mult) = x.scattered_height()?;
    if x.classify_fractal()? == FractalVerdict::NotTopologicalFractal {
        return Err(Error::NotSuccessor(height));
    }
    let cap = Caps::default().net_cap;
    if matches!(mult, Multiplicity::Finite(m) if m > cap as u64) {
        return Err(Error::SizeCapExceeded(cap));
    }
    let mut pieces = Vec::new();
    for piece in x.unital_decomposition()? {
        let (h, _) = piece.scattered_height()?;
        let sys = build_ifs_unital(h, lambda.clone())?;
        pieces.push((piece, sys));
    }
    let several = pieces.len() > 1;
    let tol = lambda_pow(&lambda, Caps::default().level_cap as i64);
    let mut maps = Vec::new();
    let mut fixed = Vec::new();
    for (i, (_, sys)) in pieces.iter().enumerate() {
        for j in 0..sys.map_count() {
            let fp = if several {
                let fp = sys.fixed_point(j, &tol)?;
                if !fp.exact {
                    return Err(Error::InexactFixedPoint(maps.len()));
                }
                Some(fp.point)
            } else {
                None
            };
            maps.push((i, j));
            fixed.push(fp);
        }
    }
    Ok(GluedIfs {
        context: fresh_context(),
        lambda,
        pieces,
        maps,
        fixed,
        caps: Caps::default(),
        exec: Exec::default(),
    })
}

impl GluedIfs {
    pub fn pieces(&self) -> &[(OrdinalSpace, IfsSystem)] {
        &self.pieces
    }

    /// One piece: the gluing adds nothing to the piece's own system.
    pub fn is_degenerate(&self) -> bool {
        self.pieces.len() == 1
    }

    pub fn cross_distance(&self) -> BigRational {
        self.lambda.recip()
    }

    pub fn fixed_branch(&self, map: usize) -> Option<&Branch> {
        self.fixed.get(map).and_then(Option::as_ref)
    }

    /// Fixed point of an extended map; it lies in the map's own piece.
    pub fn fixed_point(&self, map: usize, tol: &BigRational) -> Result<FixedPoint<GluedPoint>> {
        let &(piece, j) = self.maps.get(map).ok_or(Error::NoSuchMap(map))?;
        let fp = self.pieces[piece].1.fixed_point(j, tol)?;
        Ok(FixedPoint {
            point: GluedPoint {
                piece,
                branch: fp.point,
            },
            exact: fp.exact,
            steps: fp.steps,
        })
    }

    pub fn with_caps(mut self, caps: Caps) -> Self {
        for (_, s) in &mut self.pieces {
            s.set_caps(caps.clone());
        }
        self.caps = caps;
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        for (_, s) in &mut self.pieces {
            s.set_exec(exec);
        }
        self.exec = exec;
        self
    }
}

impl FunctionSystem for GluedIfs {
    type Point = GluedPoint;

    fn context(&self) -> u64 {
        self.context
    }

    fn lambda(&self) -> &BigRational {
        &self.lambda
    }

    fn map_count(&self) -> usize {
        self.maps.len()
    }

    fn map_label(&self, i: usize) -> String {
        let (piece, j) = self.maps[i];
        format!("X{piece}.{}", self.pieces[piece].1.map_label(j))
    }

    fn apply_map(&self, i: usize, p: &GluedPoint) -> Result<GluedPoint> {
        let &(piece, j) = self.maps.get(i).ok_or(Error::NoSuchMap(i))?;
        let branch = if p.piece == piece {
            self.pieces[piece].1.apply_map(j, &p.branch)?
        } else {
            self.fixed[i].clone().ok_or(Error::InexactFixedPoint(i))?
        };
        Ok(GluedPoint { piece, branch })
    }

    fn seed_points(&self) -> Vec<GluedPoint> {
        (0..self.pieces.len())
            .map(|piece| GluedPoint {
                piece,
                branch: Branch::central(),
            })
            .collect()
    }

    fn profile(&self, p: &GluedPoint) -> Result<Profile> {
        self.pieces
            .get(p.piece)
            .ok_or(Error::NoSuchMap(p.piece))?
            .1
            .branch_profile(&p.branch, p.piece)
    }

    fn caps(&self) -> &Caps {
        &self.caps
    }

    fn exec(&self) -> Exec {
        self.exec
    }
}
