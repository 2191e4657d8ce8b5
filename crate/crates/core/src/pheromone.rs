//! Virtual pheromone field: per-cell concentrations with saturating deposits,
//! proportional evaporation, and a max-merge used when maps from different
//! robots are combined.

use thiserror::Error;

use crate::env::{CellCoord, Environment};

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("concentration {psi} outside [0, {psi_max}]")]
    PsiOutOfRange { psi: f64, psi_max: f64 },
    #[error("evaporation rate {0} outside (0, 1]")]
    BetaOutOfRange(f64),
    #[error("deposit targets wall cell ({0}, {1})")]
    DepositOnWall(usize, usize),
    #[error("negative deposit {0}")]
    NegativeDeposit(f64),
}

/// Parameters of the deposition rule.
///
/// A deposit at distance `r` from the robot adds
/// `(psi_max - psi) * alpha * (delta * e)^(eta * r / pi)`
/// to the cell: a fraction of the remaining headroom that shrinks with
/// distance. `alpha` is the maximum deposit fraction, `delta` scales the
/// distance falloff, and `eta` compensates for evaporation between visits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DepositionParams {
    pub psi_max: f64,
    pub alpha: f64,
    pub delta: f64,
    pub eta: f64,
}

impl Default for DepositionParams {
    fn default() -> Self {
        DepositionParams {
            psi_max: 100.0,
            alpha: 0.5,
            delta: 0.1,
            eta: 2.0,
        }
    }
}

impl DepositionParams {
    /// Fraction of the headroom deposited at distance `r`; `alpha` at r = 0.
    pub fn falloff_factor(&self, r: f64) -> f64 {
        self.alpha
            * (self.delta * std::f64::consts::E).powf(self.eta * r / std::f64::consts::PI)
    }
}

/// Deposit added to a cell currently holding `psi`, by a robot at distance `r`.
pub fn deposit_amount(psi: f64, params: &DepositionParams, r: f64) -> Result<f64, FieldError> {
    if !(0.0..=params.psi_max).contains(&psi) {
        return Err(FieldError::PsiOutOfRange {
            psi,
            psi_max: params.psi_max,
        });
    }
    Ok((params.psi_max - psi) * params.falloff_factor(r))
}

/// Merge of two concentrations for the same cell: the larger one wins.
/// Evaporation makes higher values the more recently refreshed ones, so this
/// forms the join of a semilattice (commutative, associative, idempotent).
pub fn merge_cell(local: f64, received: f64) -> f64 {
    local.max(received)
}

/// Per-cell pheromone concentrations over a grid, each in `[0, psi_max]`.
/// Wall cells stay at zero forever.
#[derive(Clone, Debug, PartialEq)]
pub struct PheromoneMap {
    width: usize,
    height: usize,
    psi_max: f64,
    free: Vec<bool>,
    psi: Vec<f64>,
}

impl PheromoneMap {
    pub fn new(env: &Environment, psi_max: f64) -> Self {
        assert!(psi_max > 0.0, "psi_max must be positive");
        PheromoneMap {
            width: env.width(),
            height: env.height(),
            psi_max,
            free: env.free_mask(),
            psi: vec![0.0; env.width() * env.height()],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn psi_max(&self) -> f64 {
        self.psi_max
    }

    fn idx(&self, c: CellCoord) -> usize {
        c.row * self.width + c.col
    }

    pub fn psi(&self, c: CellCoord) -> f64 {
        self.psi[self.idx(c)]
    }

    pub fn is_free(&self, c: CellCoord) -> bool {
        self.free[self.idx(c)]
    }

    pub fn values(&self) -> &[f64] {
        &self.psi
    }

    /// Sets one cell, validating range and that the cell is not a wall.
    pub fn set(&mut self, c: CellCoord, value: f64) -> Result<(), FieldError> {
        let idx = self.idx(c);
        if !self.free[idx] {
            return Err(FieldError::DepositOnWall(c.row, c.col));
        }
        if !(0.0..=self.psi_max).contains(&value) {
            return Err(FieldError::PsiOutOfRange {
                psi: value,
                psi_max: self.psi_max,
            });
        }
        self.psi[idx] = value;
        Ok(())
    }

    /// One field update step: every cell evaporates by the fraction `beta`,
    /// then the listed deposits are added and each touched cell is clamped to
    /// `psi_max`. Deposits are computed against pre-evaporation values by the
    /// caller, so a deposit is not evaporated in the step it lands.
    pub fn step_update(
        &mut self,
        beta: f64,
        deposits: &[(CellCoord, f64)],
    ) -> Result<(), FieldError> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(FieldError::BetaOutOfRange(beta));
        }
        for v in &mut self.psi {
            *v -= beta * *v;
        }
        for &(cell, amount) in deposits {
            if amount < 0.0 {
                return Err(FieldError::NegativeDeposit(amount));
            }
            let idx = self.idx(cell);
            if !self.free[idx] {
                return Err(FieldError::DepositOnWall(cell.row, cell.col));
            }
            self.psi[idx] = (self.psi[idx] + amount).min(self.psi_max);
        }
        Ok(())
    }

    /// Merges a received concentration into one cell (max wins).
    pub fn merge(&mut self, c: CellCoord, received: f64) {
        let idx = self.idx(c);
        self.psi[idx] = merge_cell(self.psi[idx], received);
    }

    /// CSV rendering: one line per row, values to six significant digits,
    /// walls as -1.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in 0..self.height {
            for col in 0..self.width {
                if col > 0 {
                    out.push(',');
                }
                let idx = row * self.width + col;
                if self.free[idx] {
                    out.push_str(&fmt_sig6(self.psi[idx]));
                } else {
                    out.push_str("-1");
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Plain decimal rendering with six significant digits.
fn fmt_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{:.*}", decimals, x)
}
