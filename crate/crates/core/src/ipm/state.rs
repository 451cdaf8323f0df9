use crate::ipm::QpProblem;

/// Interior iterate: primal x, one slack and one multiplier vector per
/// finite-bound family, and the barrier parameter. Slack/multiplier
/// vectors are indexed over finite bounds only.
#[derive(Debug, Clone)]
pub struct IterateState {
    pub x: Vec<f64>,
    pub s_la: Vec<f64>,
    pub s_ua: Vec<f64>,
    pub s_lx: Vec<f64>,
    pub s_ux: Vec<f64>,
    pub lam_la: Vec<f64>,
    pub lam_ua: Vec<f64>,
    pub lam_lx: Vec<f64>,
    pub lam_ux: Vec<f64>,
    pub mu: f64,
}

impl IterateState {
    /// Smallest slack or multiplier entry, +inf when there are none.
    pub fn min_interior(&self) -> f64 {
        [
            &self.s_la, &self.s_ua, &self.s_lx, &self.s_ux, &self.lam_la, &self.lam_ua,
            &self.lam_lx, &self.lam_ux,
        ]
        .iter()
        .flat_map(|v| v.iter().copied())
        .fold(f64::INFINITY, f64::min)
    }

    pub fn is_interior(&self) -> bool {
        let m = self.min_interior();
        m > 0.0 || m == f64::INFINITY
    }
}

/// Residuals of the perturbed optimality conditions, one block per
/// family plus stationarity and complementarity.
#[derive(Debug, Clone)]
pub struct ResidualSet {
    pub r_h: Vec<f64>,
    pub r_la: Vec<f64>,
    pub r_ua: Vec<f64>,
    pub r_lx: Vec<f64>,
    pub r_ux: Vec<f64>,
    pub rc_la: Vec<f64>,
    pub rc_ua: Vec<f64>,
    pub rc_lx: Vec<f64>,
    pub rc_ux: Vec<f64>,
}

impl ResidualSet {
    /// Infinity norm over every family, complementarity included.
    pub fn norm_inf(&self) -> f64 {
        [
            &self.r_h, &self.r_la, &self.r_ua, &self.r_lx, &self.r_ux, &self.rc_la,
            &self.rc_ua, &self.rc_lx, &self.rc_ux,
        ]
        .iter()
        .flat_map(|v| v.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        [
            &self.r_h, &self.r_la, &self.r_ua, &self.r_lx, &self.r_ux, &self.rc_la,
            &self.rc_ua, &self.rc_lx, &self.rc_ux,
        ]
        .iter()
        .all(|v| v.iter().all(|x| x.is_finite()))
    }
}

/// Full Newton direction recovered from the reduced solve.
#[derive(Debug, Clone)]
pub struct StepDirection {
    pub dx: Vec<f64>,
    pub dlam_la: Vec<f64>,
    pub dlam_ua: Vec<f64>,
    pub dlam_lx: Vec<f64>,
    pub dlam_ux: Vec<f64>,
    pub ds_la: Vec<f64>,
    pub ds_ua: Vec<f64>,
    pub ds_lx: Vec<f64>,
    pub ds_ux: Vec<f64>,
}

impl StepDirection {
    pub fn zeros(prob: &QpProblem) -> Self {
        Self {
            dx: vec![0.0; prob.num_vars()],
            dlam_la: vec![0.0; prob.lin_lower_rows().len()],
            dlam_ua: vec![0.0; prob.lin_upper_rows().len()],
            dlam_lx: vec![0.0; prob.var_lower_idx().len()],
            dlam_ux: vec![0.0; prob.var_upper_idx().len()],
            ds_la: vec![0.0; prob.lin_lower_rows().len()],
            ds_ua: vec![0.0; prob.lin_upper_rows().len()],
            ds_lx: vec![0.0; prob.var_lower_idx().len()],
            ds_ux: vec![0.0; prob.var_upper_idx().len()],
        }
    }
}
