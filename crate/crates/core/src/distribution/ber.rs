use std::fmt;

use crate::error::{Error, Result};
use crate::ld_stats::LdModel;
use crate::scenario::Scenario;
use crate::special;

/// Conditional error probability `b Q(√(a γ))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modulation {
    Bpsk,
    Qpsk,
    /// Square L-QAM, `L` a power of 4 in practice.
    Qam(u32),
}

impl Modulation {
    pub fn a(self) -> f64 {
        match self {
            Modulation::Bpsk => 2.0,
            Modulation::Qpsk => 1.0,
            Modulation::Qam(l) => 3.0 / (l as f64 - 1.0),
        }
    }

    pub fn b(self) -> f64 {
        match self {
            Modulation::Bpsk | Modulation::Qpsk => 1.0,
            Modulation::Qam(l) => 2.0 / (l as f64).log2(),
        }
    }

    /// Bit error probability at a fixed SINR.
    pub fn conditional_ber(self, gamma: f64) -> f64 {
        self.b() * special::q_function((self.a() * gamma).sqrt())
    }

    pub fn name(self) -> String {
        self.to_string()
    }

    pub fn validate(self) -> Result<Self> {
        match self {
            Modulation::Qam(l) if l < 4 => Err(Error::InvalidArgument(format!(
                "QAM order {l} must be at least 4"
            ))),
            m => Ok(m),
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modulation::Bpsk => write!(f, "BPSK"),
            Modulation::Qpsk => write!(f, "QPSK"),
            Modulation::Qam(l) => write!(f, "{l}-QAM"),
        }
    }
}

impl std::str::FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let up = s.trim().to_ascii_uppercase();
        match up.as_str() {
            "BPSK" => Ok(Modulation::Bpsk),
            "QPSK" => Ok(Modulation::Qpsk),
            _ => up
                .strip_suffix("-QAM")
                .or_else(|| up.strip_suffix("QAM"))
                .and_then(|l| l.parse::<u32>().ok())
                .map(Modulation::Qam)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown modulation '{s}'")))?
                .validate(),
        }
    }
}

impl LdModel {
    /// Average uncoded BER with every term evaluated at `s1 = a/(2M)`:
    /// `(b/2) exp(-ΔI(s1) + v1(s1)/2 + s1 I'(s1)) Γ(1/2, s1 I'(s1))`.
    pub fn ber(&self, modulation: Modulation) -> Result<f64> {
        let s1 = modulation.a() / (2.0 * self.m() as f64);
        let fp = self.fixed_point(s1, None)?;
        let delta_i = self.info(&fp)? - self.i0();
        let y = s1 * self.info_deriv(&fp);
        let v1 = self.v1_at(&fp)?;
        // e^{y} Γ(1/2, y) = erfcx(√y) avoids overflow for large y.
        Ok(0.5 * modulation.b() * (-delta_i + 0.5 * v1).exp() * special::erfcx(y.sqrt()))
    }
}

pub fn ber(sc: &Scenario, modulation: Modulation) -> Result<f64> {
    LdModel::new(sc)?.ber(modulation)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table() {
        assert_eq!((Modulation::Bpsk.a(), Modulation::Bpsk.b()), (2.0, 1.0));
        assert_eq!((Modulation::Qpsk.a(), Modulation::Qpsk.b()), (1.0, 1.0));
        let q = Modulation::Qam(16);
        assert!((q.a() - 0.2).abs() < 1e-15 && (q.b() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn parse_round_trip() {
        for m in [Modulation::Bpsk, Modulation::Qpsk, Modulation::Qam(64)] {
            assert_eq!(m.to_string().parse::<Modulation>().unwrap(), m);
        }
        assert!("8PSK".parse::<Modulation>().is_err());
        assert!("2-QAM".parse::<Modulation>().is_err());
    }
}
