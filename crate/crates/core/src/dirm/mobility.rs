use rand::Rng;

use super::config::CellConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Heading {
    East,
    West,
    North,
    South,
}

impl Heading {
    const ALL: [Heading; 4] = [Heading::East, Heading::West, Heading::North, Heading::South];

    fn reverse(self) -> Self {
        match self {
            Heading::East => Heading::West,
            Heading::West => Heading::East,
            Heading::North => Heading::South,
            Heading::South => Heading::North,
        }
    }

    fn unit(self) -> (f64, f64) {
        match self {
            Heading::East => (1.0, 0.0),
            Heading::West => (-1.0, 0.0),
            Heading::North => (0.0, 1.0),
            Heading::South => (0.0, -1.0),
        }
    }

    fn horizontal(self) -> bool {
        matches!(self, Heading::East | Heading::West)
    }
}

/// A vehicle on the street grid. Streets run along every multiple of the
/// block size in both axes.
#[derive(Clone, Debug, PartialEq)]
pub struct Vehicle {
    pub x: f64,
    pub y: f64,
    pub heading: Heading,
    pub speed: f64,
}

impl Vehicle {
    pub fn position(&self) -> (f64, f64) {
        (self.x, self.y)
    }
}

/// Places a vehicle uniformly on the street network with a speed in
/// `[max/2, max]`.
pub fn spawn<R: Rng + ?Sized>(cfg: &CellConfig, rng: &mut R) -> Vehicle {
    let b = cfg.block_m;
    let (cols, rows) = (
        (cfg.grid_width_m / b).round() as usize,
        (cfg.grid_height_m / b).round() as usize,
    );
    let horizontal_len = cfg.grid_width_m * (rows + 1) as f64;
    let vertical_len = cfg.grid_height_m * (cols + 1) as f64;
    let horizontal = rng.random::<f64>() * (horizontal_len + vertical_len) < horizontal_len;
    let (x, y, heading) = if horizontal {
        let y = rng.random_range(0..=rows) as f64 * b;
        let x = rng.random::<f64>() * cfg.grid_width_m;
        (
            x,
            y,
            if rng.random::<bool>() {
                Heading::East
            } else {
                Heading::West
            },
        )
    } else {
        let x = rng.random_range(0..=cols) as f64 * b;
        let y = rng.random::<f64>() * cfg.grid_height_m;
        (
            x,
            y,
            if rng.random::<bool>() {
                Heading::North
            } else {
                Heading::South
            },
        )
    };
    let speed = cfg.max_speed_mps * (0.5 + 0.5 * rng.random::<f64>());
    let mut v = Vehicle {
        x,
        y,
        heading,
        speed,
    };
    if !can_move(cfg, v.x, v.y, v.heading) {
        v.heading = v.heading.reverse();
    }
    v
}

fn can_move(cfg: &CellConfig, x: f64, y: f64, h: Heading) -> bool {
    match h {
        Heading::East => x < cfg.grid_width_m,
        Heading::West => x > 0.0,
        Heading::North => y < cfg.grid_height_m,
        Heading::South => y > 0.0,
    }
}

/// Distance to the next intersection along the heading.
fn to_intersection(cfg: &CellConfig, v: &Vehicle) -> f64 {
    let b = cfg.block_m;
    let along = if v.heading.horizontal() { v.x } else { v.y };
    let next = match v.heading {
        Heading::East | Heading::North => ((along / b).floor() + 1.0) * b,
        Heading::West | Heading::South => ((along / b).ceil() - 1.0) * b,
    };
    (next - along).abs()
}

/// Advances every vehicle by `dt` seconds. At each intersection a vehicle
/// picks uniformly among the streets leading on, avoiding a U-turn unless it
/// is the only way out.
pub fn mobility_step<R: Rng + ?Sized>(
    cfg: &CellConfig,
    vehicles: &mut [Vehicle],
    dt: f64,
    rng: &mut R,
) {
    for v in vehicles.iter_mut() {
        let mut remaining = v.speed * dt;
        while remaining > 0.0 {
            let gap = to_intersection(cfg, v);
            let (ux, uy) = v.heading.unit();
            if remaining < gap {
                v.x += ux * remaining;
                v.y += uy * remaining;
                break;
            }
            v.x = ((v.x + ux * gap) / cfg.block_m).round() * cfg.block_m;
            v.y = ((v.y + uy * gap) / cfg.block_m).round() * cfg.block_m;
            remaining -= gap;
            let options: Vec<Heading> = Heading::ALL
                .into_iter()
                .filter(|h| *h != v.heading.reverse() && can_move(cfg, v.x, v.y, *h))
                .collect();
            v.heading = if options.is_empty() {
                v.heading.reverse()
            } else {
                options[rng.random_range(0..options.len())]
            };
        }
    }
}
