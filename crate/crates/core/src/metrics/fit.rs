//! Growth-order fits: `y = a + b·x` against `y = a + b·x²`.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitOrder {
    Linear,
    Quadratic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Regression {
    pub intercept: f64,
    pub slope: f64,
    pub r2: f64,
}

/// Ordinary least squares with one regressor. `None` with fewer than two
/// distinct regressor values.
pub fn regress(xs: &[f64], ys: &[f64]) -> Option<Regression> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    // A constant response is fitted perfectly by any order.
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Some(Regression { intercept, slope, r2 })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderFit {
    pub linear: Regression,
    pub quadratic: Regression,
}

impl OrderFit {
    pub fn best(&self) -> FitOrder {
        if self.quadratic.r2 > self.linear.r2 {
            FitOrder::Quadratic
        } else {
            FitOrder::Linear
        }
    }

    pub fn get(&self, order: FitOrder) -> Regression {
        match order {
            FitOrder::Linear => self.linear,
            FitOrder::Quadratic => self.quadratic,
        }
    }

    /// `order` reaches `min_r2` and strictly beats the other order.
    pub fn supports(&self, order: FitOrder, min_r2: f64) -> bool {
        let (this, other) = match order {
            FitOrder::Linear => (self.linear, self.quadratic),
            FitOrder::Quadratic => (self.quadratic, self.linear),
        };
        this.r2 >= min_r2 && this.r2 > other.r2
    }
}

pub fn fit_orders(xs: &[f64], ys: &[f64]) -> Option<OrderFit> {
    let squares: Vec<f64> = xs.iter().map(|x| x * x).collect();
    Some(OrderFit { linear: regress(xs, ys)?, quadratic: regress(&squares, ys)? })
}
