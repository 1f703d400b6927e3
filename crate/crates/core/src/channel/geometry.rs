//! Hexagonal cluster layout, uniform user drops and the path-loss/shadowing
//! model used by the system-level (geometric) channel mode.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{ChannelRealization, LargeScaleGains, SmallScaleGains};
use crate::error::{config_err, Result};

const SQRT3: f64 = 1.732_050_807_568_877_2;

pub type Point = [f64; 2];

/// BS sites of a hexagonal cluster: one center cell and up to six
/// first-ring neighbours. Hexagons are flat-topped with the given
/// center-to-vertex radius, so neighbouring sites are `√3·radius` apart.
#[derive(Debug, Clone, PartialEq)]
pub struct HexLayout {
    radius: f64,
    bs_positions: Vec<Point>,
}

impl HexLayout {
    pub fn cluster(cells: usize, radius: f64) -> Result<Self> {
        if !(1..=7).contains(&cells) {
            return Err(config_err(format!(
                "hexagonal cluster supports 1..=7 cells, got {cells}"
            )));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(config_err(format!(
                "cell radius must be positive, got {radius}"
            )));
        }
        let spacing = SQRT3 * radius;
        let mut bs_positions = vec![[0.0, 0.0]];
        for j in 0..cells - 1 {
            let angle = (30.0 + 60.0 * j as f64).to_radians();
            bs_positions.push([spacing * angle.cos(), spacing * angle.sin()]);
        }
        Ok(Self {
            radius,
            bs_positions,
        })
    }

    pub fn cells(&self) -> usize {
        self.bs_positions.len()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn bs_positions(&self) -> &[Point] {
        &self.bs_positions
    }

    /// Whether `p` lies in the hexagon of `cell` (boundary included).
    pub fn contains(&self, cell: usize, p: Point) -> bool {
        let c = self.bs_positions[cell];
        in_hexagon(self.radius, [p[0] - c[0], p[1] - c[1]])
    }
}

fn in_hexagon(radius: f64, offset: Point) -> bool {
    let (x, y) = (offset[0].abs(), offset[1].abs());
    // small slack so points produced on an edge by rounding still count
    let tol = 1e-9 * radius;
    y <= SQRT3 / 2.0 * radius + tol && SQRT3 * x + y <= SQRT3 * radius + tol
}

/// A layout with dropped users; `user_positions[k]` belong to cell `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGeometry {
    pub layout: HexLayout,
    pub user_positions: Vec<Vec<Point>>,
}

impl CellGeometry {
    pub fn cells(&self) -> usize {
        self.layout.cells()
    }

    pub fn users(&self) -> usize {
        self.user_positions.first().map_or(0, Vec::len)
    }

    pub fn distance(&self, bs: usize, cell: usize, user: usize) -> f64 {
        let b = self.layout.bs_positions[bs];
        let p = self.user_positions[cell][user];
        (p[0] - b[0]).hypot(p[1] - b[1])
    }
}

/// Drops `users` points uniformly inside every hexagon by rejection from the
/// hexagon's bounding box.
pub fn place_users_uniform<R: Rng + ?Sized>(
    layout: &HexLayout,
    users: usize,
    rng: &mut R,
) -> Result<CellGeometry> {
    if users == 0 {
        return Err(config_err("number of users per cell N must be at least 1"));
    }
    let r = layout.radius;
    let half_height = SQRT3 / 2.0 * r;
    let user_positions = layout
        .bs_positions
        .iter()
        .map(|c| {
            let mut pts = Vec::with_capacity(users);
            while pts.len() < users {
                let x = rng.random_range(-r..=r);
                let y = rng.random_range(-half_height..=half_height);
                if in_hexagon(r, [x, y]) {
                    pts.push([c[0] + x, c[1] + y]);
                }
            }
            pts
        })
        .collect();
    Ok(CellGeometry {
        layout: layout.clone(),
        user_positions,
    })
}

/// Distance-power-law path loss with log-normal shadowing.
///
/// The power gain at distance `d` is `(max(d, d0)/d0)^-exponent · 10^(S/10)`
/// with `S ~ N(0, shadow_std_db²)` drawn independently per link. `d0` is the
/// reference distance with unit gain; absolute link-budget constants are
/// folded into the transmit power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossModel {
    pub exponent: f64,
    pub shadow_std_db: f64,
    pub reference_distance_m: f64,
}

impl PathLossModel {
    pub fn new(exponent: f64, shadow_std_db: f64) -> Result<Self> {
        let model = Self {
            exponent,
            shadow_std_db,
            reference_distance_m: 1.0,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.exponent > 2.0 && self.exponent.is_finite()) {
            return Err(config_err(format!(
                "path-loss exponent must be > 2, got {}",
                self.exponent
            )));
        }
        if !(self.shadow_std_db >= 0.0 && self.shadow_std_db.is_finite()) {
            return Err(config_err(format!(
                "shadowing std must be >= 0 dB, got {}",
                self.shadow_std_db
            )));
        }
        if !(self.reference_distance_m > 0.0) {
            return Err(config_err("reference distance must be positive"));
        }
        Ok(())
    }

    /// Distance-only power gain; distances below `d0` are clamped to `d0`.
    pub fn path_gain(&self, distance_m: f64) -> f64 {
        let d = distance_m.max(self.reference_distance_m) / self.reference_distance_m;
        d.powf(-self.exponent)
    }

    pub fn gain_with_shadowing(&self, distance_m: f64, shadow_db: f64) -> f64 {
        self.path_gain(distance_m) * 10f64.powf(shadow_db / 10.0)
    }
}

/// Draws one geometric-mode block: per-link path loss and shadowing on top of
/// Rayleigh fading. Users are served by the BS of the hexagon they were
/// dropped in.
pub fn draw_geometric<R: Rng + ?Sized>(
    geom: &CellGeometry,
    model: &PathLossModel,
    rng: &mut R,
) -> Result<ChannelRealization> {
    model.validate()?;
    let (cells, users) = (geom.cells(), geom.users());
    if users == 0 || geom.user_positions.iter().any(|u| u.len() != users) {
        return Err(config_err(
            "every cell must hold the same nonzero number of users",
        ));
    }
    let shadow = if model.shadow_std_db > 0.0 {
        Some(Normal::new(0.0, model.shadow_std_db).map_err(|e| config_err(e.to_string()))?)
    } else {
        None
    };
    let mut large = Vec::with_capacity(cells * cells * users);
    for i in 0..cells {
        for k in 0..cells {
            for u in 0..users {
                let s = shadow.as_ref().map_or(0.0, |n| n.sample(rng));
                large.push(model.gain_with_shadowing(geom.distance(i, k, u), s));
            }
        }
    }
    let small = SmallScaleGains::draw(cells, users, rng)?;
    ChannelRealization::new(small, LargeScaleGains::PerLink(large))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Domain};

    /// Mean distance from the center of a uniform point in a flat-topped
    /// hexagon, by Simpson quadrature of ∫ρ(θ)³/3 dθ over the boundary.
    fn hexagon_mean_distance(radius: f64) -> f64 {
        let apothem = SQRT3 / 2.0 * radius;
        // one 60° sector around an edge normal, integrand symmetric
        let n = 20_000;
        let a = -std::f64::consts::PI / 6.0;
        let h = (std::f64::consts::PI / 3.0) / n as f64;
        let f = |t: f64| (apothem / t.cos()).powi(3) / 3.0;
        let mut s = f(a) + f(a + n as f64 * h);
        for j in 1..n {
            let w = if j % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + j as f64 * h);
        }
        let sector = s * h / 3.0;
        let area = 3.0 * SQRT3 / 2.0 * radius * radius;
        6.0 * sector / area
    }

    #[test]
    fn cluster_of_seven() {
        let layout = HexLayout::cluster(7, 500.0).unwrap();
        assert_eq!(layout.cells(), 7);
        for p in &layout.bs_positions()[1..] {
            assert!((p[0].hypot(p[1]) - SQRT3 * 500.0).abs() < 1e-9);
        }
        // the six neighbours are each other's ring neighbours at the same spacing
        let b = layout.bs_positions();
        for j in 1..7 {
            let next = if j == 6 { 1 } else { j + 1 };
            let d = (b[j][0] - b[next][0]).hypot(b[j][1] - b[next][1]);
            assert!((d - SQRT3 * 500.0).abs() < 1e-9);
        }
        assert!(HexLayout::cluster(8, 500.0).is_err());
        assert!(HexLayout::cluster(0, 500.0).is_err());
        assert!(HexLayout::cluster(3, -1.0).is_err());
    }

    #[test]
    fn hexagons_do_not_overlap() {
        let layout = HexLayout::cluster(7, 500.0).unwrap();
        let mut rng = stream(4, Domain::Geometry, 7, 200, 0);
        let geom = place_users_uniform(&layout, 200, &mut rng).unwrap();
        for (k, pts) in geom.user_positions.iter().enumerate() {
            for p in pts {
                assert!(layout.contains(k, *p));
                // strictly interior points belong to exactly one cell
                let owners = (0..7).filter(|&c| layout.contains(c, *p)).count();
                assert!(owners >= 1);
            }
        }
    }

    #[test]
    fn single_user_within_radius() {
        let layout = HexLayout::cluster(1, 250.0).unwrap();
        let mut rng = stream(2, Domain::Geometry, 1, 1, 0);
        let geom = place_users_uniform(&layout, 1, &mut rng).unwrap();
        assert!(geom.distance(0, 0, 0) <= 250.0);
    }

    #[test]
    fn table2_drop_sizes() {
        let layout = HexLayout::cluster(7, 500.0).unwrap();
        let mut rng = stream(2, Domain::Geometry, 7, 500, 0);
        let geom = place_users_uniform(&layout, 500, &mut rng).unwrap();
        let total: usize = geom.user_positions.iter().map(Vec::len).sum();
        assert_eq!(total, 3500);
        for (k, pts) in geom.user_positions.iter().enumerate() {
            assert!(pts.iter().all(|p| layout.contains(k, *p)));
        }
    }

    #[test]
    fn mean_distance_matches_quadrature() {
        let oracle = hexagon_mean_distance(500.0);
        let layout = HexLayout::cluster(1, 500.0).unwrap();
        let mut rng = stream(5, Domain::Geometry, 1, 100_000, 0);
        let geom = place_users_uniform(&layout, 100_000, &mut rng).unwrap();
        let mean = (0..100_000).map(|u| geom.distance(0, 0, u)).sum::<f64>() / 1e5;
        // distance sd is about 0.2 R, so the standard error is ~0.3 m
        assert!(
            (mean - oracle).abs() < 2.0,
            "sample {mean}, quadrature {oracle}"
        );
    }

    #[test]
    fn path_gain_examples() {
        let m = PathLossModel::new(3.0, 0.0).unwrap();
        assert_eq!(m.path_gain(1.0), 1.0);
        assert!((m.path_gain(500.0) - 8e-9).abs() < 1e-21);
        // clamp below the reference distance
        assert_eq!(m.path_gain(0.0), 1.0);
        assert_eq!(m.path_gain(0.3), 1.0);
        assert!((m.gain_with_shadowing(1.0, 10.0) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn path_gain_strictly_decreasing() {
        let m = PathLossModel::new(3.5, 0.0).unwrap();
        let mut prev = f64::INFINITY;
        for j in 1..2000 {
            let g = m.path_gain(j as f64 * 0.7 + 1.0);
            assert!(g < prev);
            prev = g;
        }
    }

    #[test]
    fn model_validation() {
        assert!(PathLossModel::new(2.0, 8.0).is_err());
        assert!(PathLossModel::new(3.0, -1.0).is_err());
        assert!(PathLossModel::new(f64::NAN, 8.0).is_err());
        assert!(PathLossModel::new(3.0, 8.0).is_ok());
    }

    #[test]
    fn geometric_draw_without_shadowing_uses_distance_law() {
        let layout = HexLayout::cluster(7, 500.0).unwrap();
        let mut rng = stream(8, Domain::Geometry, 7, 20, 0);
        let geom = place_users_uniform(&layout, 20, &mut rng).unwrap();
        let model = PathLossModel::new(3.0, 0.0).unwrap();
        let ch = draw_geometric(&geom, &model, &mut rng).unwrap();
        let LargeScaleGains::PerLink(large) = ch.large() else {
            panic!("geometric draw must carry per-link gains");
        };
        for i in 0..7 {
            for k in 0..7 {
                for u in 0..20 {
                    let idx = (i * 7 + k) * 20 + u;
                    assert_eq!(large[idx], model.path_gain(geom.distance(i, k, u)));
                    assert_eq!(ch.link_gain(i, k, u), large[idx] * ch.small().get(i, k, u));
                }
            }
        }
    }

    #[test]
    fn shadowing_spread_in_db() {
        // all users at the reference distance: gain in dB is the shadowing sample
        let layout = HexLayout::cluster(1, 500.0).unwrap();
        let geom = CellGeometry {
            layout,
            user_positions: vec![vec![[0.0, 0.0]; 20_000]],
        };
        let model = PathLossModel::new(3.0, 8.0).unwrap();
        let mut rng = stream(3, Domain::Channel, 1, 20_000, 0);
        let ch = draw_geometric(&geom, &model, &mut rng).unwrap();
        let LargeScaleGains::PerLink(large) = ch.large() else {
            unreachable!()
        };
        let db: Vec<f64> = large.iter().map(|g| 10.0 * g.log10()).collect();
        let mean = db.iter().sum::<f64>() / db.len() as f64;
        let sd =
            (db.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (db.len() - 1) as f64).sqrt();
        assert!(mean.abs() < 0.2, "mean {mean}");
        assert!((sd - 8.0).abs() < 0.2, "sd {sd}");
    }
}
