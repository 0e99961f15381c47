//! First-order radio energy model.
//!
//! Transmitting `L` bits over `d` meters costs `L E_elec + L eps_fs d^2`
//! below the crossover distance and `L E_elec + L eps_mp d^4` at or beyond
//! it. Receiving costs `L E_elec`; aggregation costs `L E_DA` per signal.

use crate::model::RadioParams;

pub fn crossover_distance(radio: &RadioParams) -> f64 {
    radio
        .d0_override
        .unwrap_or_else(|| (radio.eps_fs / radio.eps_mp).sqrt())
}

pub fn tx_energy(radio: &RadioParams, bits: u64, d: f64) -> f64 {
    let bits = bits as f64;
    let amplifier = if d < crossover_distance(radio) {
        radio.eps_fs * d * d
    } else {
        radio.eps_mp * d * d * d * d
    };
    bits * radio.e_elec + bits * amplifier
}

pub fn rx_energy(radio: &RadioParams, bits: u64) -> f64 {
    bits as f64 * radio.e_elec
}

/// Cost of fusing `signals` packets of `bits` each, the head's own reading
/// included.
pub fn aggregation_energy(radio: &RadioParams, bits: u64, signals: usize) -> f64 {
    signals as f64 * bits as f64 * radio.e_da
}
