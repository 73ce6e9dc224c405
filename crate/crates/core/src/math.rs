//! Float helpers backed by `libm` so results are identical with and without `std`.

pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

pub fn log10(x: f64) -> f64 {
    libm::log10(x)
}

pub fn log2(x: f64) -> f64 {
    libm::log2(x)
}

pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

pub fn round(x: f64) -> f64 {
    libm::round(x)
}

pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

/// `10^(db/10)`.
pub fn db_to_linear(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

pub fn hypot3(dx: f64, dy: f64, dz: f64) -> f64 {
    sqrt(dx * dx + dy * dy + dz * dz)
}
