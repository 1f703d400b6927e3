//! Block-fading channel realizations for the uplink K-cell network.
//!
//! Gains are stored as power gains indexed by `(bs, cell, user)`: the link
//! from user `u` of cell `k` to base station `i`. Every realization is
//! independent of the operating SNR; the SNR (or `P/N0` in the geometric
//! mode) is applied by the scheduler and metric code so a single draw can be
//! evaluated at every point of a power sweep.

pub mod geometry;

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{config_err, Result};

pub use geometry::{draw_geometric, place_users_uniform, CellGeometry, HexLayout, PathLossModel};

#[inline]
fn link_index(cells: usize, users: usize, bs: usize, cell: usize, user: usize) -> usize {
    (bs * cells + cell) * users + user
}

/// Small-scale power gains `|h|²`, i.i.d. unit-mean exponential.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallScaleGains {
    cells: usize,
    users: usize,
    gains: Vec<f64>,
}

impl SmallScaleGains {
    pub fn new(cells: usize, users: usize, gains: Vec<f64>) -> Result<Self> {
        check_dims(cells, users)?;
        if gains.len() != cells * cells * users {
            return Err(config_err(format!(
                "expected {} small-scale gains for K={cells}, N={users}, got {}",
                cells * cells * users,
                gains.len()
            )));
        }
        if let Some(g) = gains.iter().find(|g| !(**g >= 0.0) || !g.is_finite()) {
            return Err(config_err(format!(
                "small-scale gain {g} is not a finite value >= 0"
            )));
        }
        Ok(Self {
            cells,
            users,
            gains,
        })
    }

    pub fn draw<R: Rng + ?Sized>(cells: usize, users: usize, rng: &mut R) -> Result<Self> {
        check_dims(cells, users)?;
        let gains = (0..cells * cells * users)
            .map(|_| Exp1.sample(rng))
            .collect();
        Ok(Self {
            cells,
            users,
            gains,
        })
    }

    #[inline]
    pub fn get(&self, bs: usize, cell: usize, user: usize) -> f64 {
        self.gains[link_index(self.cells, self.users, bs, cell, user)]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.gains
    }
}

/// Per-cell amplitude factors `β_ik` shared by all users of cell `k` towards BS `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaMatrix {
    cells: usize,
    amplitude: Vec<f64>,
}

impl BetaMatrix {
    pub fn ones(cells: usize) -> Self {
        Self {
            cells,
            amplitude: vec![1.0; cells * cells],
        }
    }

    /// Builds the matrix from rows `beta[i][k]`; requires `0 < β ≤ 1` and `β_ii = 1`.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let cells = rows.len();
        if cells == 0 {
            return Err(config_err("beta matrix is empty"));
        }
        let mut amplitude = Vec::with_capacity(cells * cells);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cells {
                return Err(config_err(format!(
                    "beta row {i} has {} entries, expected {cells}",
                    row.len()
                )));
            }
            for (k, b) in row.into_iter().enumerate() {
                if !(b > 0.0 && b <= 1.0) {
                    return Err(config_err(format!(
                        "beta[{i}][{k}] = {b} is outside (0, 1]"
                    )));
                }
                if i == k && b != 1.0 {
                    return Err(config_err(format!("beta[{i}][{i}] must be 1, got {b}")));
                }
                amplitude.push(b);
            }
        }
        Ok(Self { cells, amplitude })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    #[inline]
    pub fn get(&self, bs: usize, cell: usize) -> f64 {
        self.amplitude[bs * self.cells + cell]
    }
}

/// Large-scale attenuation: a per-cell amplitude matrix (flat mode) or an
/// absolute power gain per link (geometric mode).
#[derive(Debug, Clone, PartialEq)]
pub enum LargeScaleGains {
    Flat(BetaMatrix),
    PerLink(Vec<f64>),
}

/// One block of the channel: small-scale fading, large-scale gains and the
/// composite power gains derived from them.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    cells: usize,
    users: usize,
    small: SmallScaleGains,
    large: LargeScaleGains,
    link: Vec<f64>,
    // cached per (cell, user)
    desired: Vec<f64>,
    cross_sum: Vec<f64>,
}

impl ChannelRealization {
    pub fn new(small: SmallScaleGains, large: LargeScaleGains) -> Result<Self> {
        let (cells, users) = (small.cells, small.users);
        let link: Vec<f64> = match &large {
            LargeScaleGains::Flat(beta) => {
                if beta.cells() != cells {
                    return Err(config_err(format!(
                        "beta matrix is {}x{}, expected {cells}x{cells}",
                        beta.cells(),
                        beta.cells()
                    )));
                }
                let mut link = Vec::with_capacity(small.gains.len());
                for i in 0..cells {
                    for k in 0..cells {
                        let b2 = beta.get(i, k).powi(2);
                        let start = link_index(cells, users, i, k, 0);
                        link.extend(small.gains[start..start + users].iter().map(|h| b2 * h));
                    }
                }
                link
            }
            LargeScaleGains::PerLink(gains) => {
                if gains.len() != small.gains.len() {
                    return Err(config_err(format!(
                        "expected {} per-link gains, got {}",
                        small.gains.len(),
                        gains.len()
                    )));
                }
                if let Some(g) = gains.iter().find(|g| !(**g > 0.0) || !g.is_finite()) {
                    return Err(config_err(format!(
                        "per-link gain {g} is not finite and > 0"
                    )));
                }
                gains.iter().zip(&small.gains).map(|(l, h)| l * h).collect()
            }
        };

        let mut desired = vec![0.0; cells * users];
        let mut cross_sum = vec![0.0; cells * users];
        for k in 0..cells {
            for i in 0..cells {
                let start = link_index(cells, users, i, k, 0);
                let row = &link[start..start + users];
                let dst = if i == k {
                    &mut desired[k * users..(k + 1) * users]
                } else {
                    &mut cross_sum[k * users..(k + 1) * users]
                };
                for (d, g) in dst.iter_mut().zip(row) {
                    *d += g;
                }
            }
        }

        Ok(Self {
            cells,
            users,
            small,
            large,
            link,
            desired,
            cross_sum,
        })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn small(&self) -> &SmallScaleGains {
        &self.small
    }

    pub fn large(&self) -> &LargeScaleGains {
        &self.large
    }

    /// Composite power gain from user `user` of cell `cell` to BS `bs`.
    #[inline]
    pub fn link_gain(&self, bs: usize, cell: usize, user: usize) -> f64 {
        self.link[link_index(self.cells, self.users, bs, cell, user)]
    }

    #[inline]
    pub fn desired_gain(&self, cell: usize, user: usize) -> f64 {
        self.desired[cell * self.users + user]
    }

    /// Sum of the user's power gains towards every foreign BS (no SNR factor).
    #[inline]
    pub fn cross_gain_sum(&self, cell: usize, user: usize) -> f64 {
        self.cross_sum[cell * self.users + user]
    }

    pub fn desired_gains(&self, cell: usize) -> &[f64] {
        &self.desired[cell * self.users..(cell + 1) * self.users]
    }

    pub fn cross_gain_sums(&self, cell: usize) -> &[f64] {
        &self.cross_sum[cell * self.users..(cell + 1) * self.users]
    }
}

fn check_dims(cells: usize, users: usize) -> Result<()> {
    if cells == 0 {
        return Err(config_err("number of cells K must be at least 1"));
    }
    if users == 0 {
        return Err(config_err("number of users per cell N must be at least 1"));
    }
    Ok(())
}

/// Draws one flat-mode block: Rayleigh fading scaled by a fixed β matrix.
pub fn draw_flat<R: Rng + ?Sized>(
    cells: usize,
    users: usize,
    beta: &BetaMatrix,
    rng: &mut R,
) -> Result<ChannelRealization> {
    if beta.cells() != cells {
        return Err(config_err(format!(
            "beta matrix covers {} cells, expected {cells}",
            beta.cells()
        )));
    }
    let small = SmallScaleGains::draw(cells, users, rng)?;
    ChannelRealization::new(small, LargeScaleGains::Flat(beta.clone()))
}
