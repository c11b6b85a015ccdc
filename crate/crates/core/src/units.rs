//! Logarithmic-unit conversions. Only the configuration loader calls these;
//! every other module works in linear units (watts, W/Hz, linear gains).

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0 - 3.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// A lognormal standard deviation given in dB, expressed as the standard
/// deviation of the natural logarithm of the linear factor.
pub fn db_sigma_to_ln_sigma(sigma_db: f64) -> f64 {
    sigma_db * std::f64::consts::LN_10 / 10.0
}
