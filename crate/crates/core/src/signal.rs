//! Baseband constellation generation, random symbol modulation, and the
//! IQF1 capture-file format.
//!
//! Symbols are generated at symbol rate (one complex sample per symbol,
//! no pulse shaping), with every constellation normalized to unit average
//! power.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::mcs::Modulation;

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("frame length must be at least 1")]
    ZeroLength,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("IQF1 format: {0}")]
    Format(String),
}

/// Gray-labeled constellation with unit average power.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    pub modulation: Modulation,
    pub points: Vec<Complex64>,
}

impl Constellation {
    pub fn for_modulation(modulation: Modulation) -> Self {
        let bits = modulation.bits_per_symbol();
        let i_bits = bits.div_ceil(2);
        let q_bits = bits / 2;
        let li = 1u32 << i_bits;
        let lq = 1u32 << q_bits;
        // Per-axis mean square of the odd-integer grid {+-1, +-3, ...} is
        // (L^2 - 1) / 3; a single-level axis (L = 1) contributes nothing.
        let norm = (((li * li - 1) + (lq * lq - 1)) as f64 / 3.0).sqrt();
        let points = (0..(1u32 << bits))
            .map(|idx| {
                let gi = idx >> q_bits;
                let gq = idx & (lq - 1);
                let re = axis_level(gray_decode(gi), li) / norm;
                let im = if lq > 1 {
                    axis_level(gray_decode(gq), lq) / norm
                } else {
                    0.0
                };
                Complex64::new(re, im)
            })
            .collect();
        Constellation { modulation, points }
    }

    /// Mean |p|^2 over the points; 1.0 up to rounding by construction.
    pub fn mean_power(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.points.len() as f64
    }
}

/// Gray code -> binary, so that adjacent labels map to adjacent levels.
fn gray_decode(mut g: u32) -> u32 {
    let mut b = g;
    while g > 1 {
        g >>= 1;
        b ^= g;
    }
    b
}

/// Level index 0..l -> odd-integer amplitude -(l-1), ..., -1, 1, ..., l-1.
fn axis_level(idx: u32, l: u32) -> f64 {
    2.0 * idx as f64 - (l - 1) as f64
}

/// A finite sequence of complex baseband samples, the unit of interception.
#[derive(Debug, Clone, PartialEq)]
pub struct IqFrame {
    pub samples: Vec<Complex64>,
    /// SNR the synthesis targeted, when known.
    pub nominal_snr_db: Option<f64>,
    /// Ground-truth modulation, when known (carried in IQF1 captures).
    pub modulation: Option<Modulation>,
}

impl IqFrame {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// `n` independent uniform random constellation symbols of modulation `m`.
pub fn modulate<R: Rng>(m: Modulation, n: usize, rng: &mut R) -> Result<IqFrame, SignalError> {
    if n == 0 {
        return Err(SignalError::ZeroLength);
    }
    let c = Constellation::for_modulation(m);
    let samples = (0..n)
        .map(|_| c.points[rng.random_range(0..c.points.len())])
        .collect();
    Ok(IqFrame {
        samples,
        nominal_snr_db: Some(f64::INFINITY),
        modulation: Some(m),
    })
}

/// Fourth-order/two-conjugate cumulant C42 = E|s|^4 - |E s^2|^2 - 2(E|s|^2)^2
/// of the unit-power constellation, in closed form.
///
/// BPSK: E|s|^4 = 1, E s^2 = 1          -> -2
/// QPSK: E|s|^4 = 1, E s^2 = 0          -> -1
/// 16-QAM: E|s|^4 = 33/25, E s^2 = 0    -> -17/25
/// 64-QAM: E|s|^4 = 29/21, E s^2 = 0    -> -13/21
pub fn theoretical_c42(m: Modulation) -> f64 {
    match m {
        Modulation::Bpsk => -2.0,
        Modulation::Qpsk => -1.0,
        Modulation::Qam16 => -17.0 / 25.0,
        Modulation::Qam64 => -13.0 / 21.0,
    }
}

const IQF1_MAGIC: &[u8; 4] = b"IQF1";
const IQF1_MOD_UNKNOWN: u32 = u32::MAX;

/// Writes a frame in the IQF1 interleaved binary format: a 16-byte header
/// (magic `IQF1`, u32 sample count, u32 modulation code, f32 nominal SNR,
/// all little-endian) followed by f32 I then Q per sample.
pub fn write_iqf1<W: Write>(frame: &IqFrame, mut w: W) -> Result<(), SignalError> {
    if frame.is_empty() {
        return Err(SignalError::ZeroLength);
    }
    let count = u32::try_from(frame.len())
        .map_err(|_| SignalError::Format("frame too long for IQF1".into()))?;
    w.write_all(IQF1_MAGIC)?;
    w.write_all(&count.to_le_bytes())?;
    let code = frame.modulation.map_or(IQF1_MOD_UNKNOWN, |m| m.wire_code());
    w.write_all(&code.to_le_bytes())?;
    let snr = frame.nominal_snr_db.map_or(f32::NAN, |s| s as f32);
    w.write_all(&snr.to_le_bytes())?;
    for s in &frame.samples {
        w.write_all(&(s.re as f32).to_le_bytes())?;
        w.write_all(&(s.im as f32).to_le_bytes())?;
    }
    Ok(())
}

pub fn read_iqf1<R: Read>(mut r: R) -> Result<IqFrame, SignalError> {
    let mut header = [0u8; 16];
    r.read_exact(&mut header)?;
    if &header[0..4] != IQF1_MAGIC {
        return Err(SignalError::Format("bad magic".into()));
    }
    let count = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    if count == 0 {
        return Err(SignalError::Format("zero-sample frame".into()));
    }
    let code = u32::from_le_bytes(header[8..12].try_into().unwrap());
    let modulation = if code == IQF1_MOD_UNKNOWN {
        None
    } else {
        Some(
            Modulation::from_wire_code(code)
                .ok_or_else(|| SignalError::Format(format!("bad modulation code {code}")))?,
        )
    };
    let snr = f32::from_le_bytes(header[12..16].try_into().unwrap());
    let mut buf = vec![0u8; count * 8];
    r.read_exact(&mut buf)?;
    let samples = buf
        .chunks_exact(8)
        .map(|c| {
            Complex64::new(
                f32::from_le_bytes(c[0..4].try_into().unwrap()) as f64,
                f32::from_le_bytes(c[4..8].try_into().unwrap()) as f64,
            )
        })
        .collect();
    Ok(IqFrame {
        samples,
        nominal_snr_db: if snr.is_nan() { None } else { Some(snr as f64) },
        modulation,
    })
}

pub fn write_iqf1_file<P: AsRef<Path>>(frame: &IqFrame, path: P) -> Result<(), SignalError> {
    let file = std::fs::File::create(path)?;
    write_iqf1(frame, std::io::BufWriter::new(file))
}

pub fn read_iqf1_file<P: AsRef<Path>>(path: P) -> Result<IqFrame, SignalError> {
    let file = std::fs::File::open(path)?;
    read_iqf1(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Brute-force cumulant over the constellation points.
    fn c42_brute_force(m: Modulation) -> f64 {
        let c = Constellation::for_modulation(m);
        let n = c.points.len() as f64;
        let m42: f64 = c.points.iter().map(|p| p.norm_sqr().powi(2)).sum::<f64>() / n;
        let m20: Complex64 = c.points.iter().map(|p| p * p).sum::<Complex64>() / n;
        let m21: f64 = c.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / n;
        m42 - m20.norm_sqr() - 2.0 * m21 * m21
    }

    #[test]
    fn constellations_have_unit_power_and_right_size() {
        for m in Modulation::ALL {
            let c = Constellation::for_modulation(m);
            assert_eq!(c.points.len(), 1 << m.bits_per_symbol());
            assert_relative_eq!(c.mean_power(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn bpsk_and_qpsk_points_are_canonical() {
        let b = Constellation::for_modulation(Modulation::Bpsk);
        let mut res: Vec<f64> = b.points.iter().map(|p| p.re).collect();
        res.sort_by(f64::total_cmp);
        assert_eq!(res, vec![-1.0, 1.0]);
        assert!(b.points.iter().all(|p| p.im == 0.0));

        let q = Constellation::for_modulation(Modulation::Qpsk);
        let r = 1.0 / 2f64.sqrt();
        for p in &q.points {
            assert_relative_eq!(p.re.abs(), r, epsilon = 1e-15);
            assert_relative_eq!(p.im.abs(), r, epsilon = 1e-15);
        }
    }

    #[test]
    fn qam_axis_labels_are_gray_coded() {
        // Walking one axis in level order flips exactly one bit at a time.
        for bits in [2u32, 3] {
            let l = 1 << bits;
            let mut labels = vec![0u32; l as usize];
            for g in 0..l {
                labels[gray_decode(g) as usize] = g;
            }
            for w in labels.windows(2) {
                assert_eq!((w[0] ^ w[1]).count_ones(), 1);
            }
        }
    }

    #[test]
    fn theoretical_c42_matches_brute_force() {
        for m in Modulation::ALL {
            assert_relative_eq!(theoretical_c42(m), c42_brute_force(m), epsilon = 1e-12);
        }
    }

    #[test]
    fn c42_values_are_strictly_ordered_and_negative() {
        let c: Vec<f64> = Modulation::ALL.iter().map(|&m| theoretical_c42(m)).collect();
        for w in c.windows(2) {
            assert!(w[0] < w[1]);
        }
        assert!(c[3] < 0.0);
        // Published reference values.
        assert_relative_eq!(c[2], -0.68, epsilon = 1e-12);
        assert!((c[3] - (-0.6190)).abs() < 1e-4);
    }

    #[test]
    fn modulate_draws_constellation_members() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = modulate(Modulation::Bpsk, 1000, &mut rng).unwrap();
        assert!(f.samples.iter().all(|s| s.im == 0.0 && s.re.abs() == 1.0));
        let c = Constellation::for_modulation(Modulation::Qam64);
        let f = modulate(Modulation::Qam64, 1000, &mut rng).unwrap();
        assert!(f.samples.iter().all(|s| c.points.contains(s)));
    }

    #[test]
    fn modulate_empirical_power_near_unity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = modulate(Modulation::Qam16, 1_000_000, &mut rng).unwrap();
        let p = f.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / f.len() as f64;
        assert!((p - 1.0).abs() < 0.01, "power = {p}");
    }

    #[test]
    fn modulate_is_deterministic_and_rejects_zero() {
        let a = modulate(Modulation::Qpsk, 64, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = modulate(Modulation::Qpsk, 64, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            modulate(Modulation::Qpsk, 0, &mut ChaCha8Rng::seed_from_u64(5)),
            Err(SignalError::ZeroLength)
        ));
    }

    #[test]
    fn iqf1_round_trip_preserves_header_and_f32_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut frame = modulate(Modulation::Qam16, 128, &mut rng).unwrap();
        frame.nominal_snr_db = Some(17.5);
        let mut buf = Vec::new();
        write_iqf1(&frame, &mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 128 * 8);
        let back = read_iqf1(buf.as_slice()).unwrap();
        assert_eq!(back.modulation, Some(Modulation::Qam16));
        assert_eq!(back.nominal_snr_db, Some(17.5));
        assert_eq!(back.len(), 128);
        for (a, b) in frame.samples.iter().zip(&back.samples) {
            assert_relative_eq!(a.re, b.re, epsilon = 1e-6);
            assert_relative_eq!(a.im, b.im, epsilon = 1e-6);
        }
    }

    #[test]
    fn iqf1_rejects_garbage() {
        assert!(read_iqf1(&b"NOPE\x01\x00\x00\x00"[..]).is_err());
        let mut buf = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let frame = modulate(Modulation::Bpsk, 4, &mut rng).unwrap();
        write_iqf1(&frame, &mut buf).unwrap();
        buf.truncate(20); // payload cut short
        assert!(read_iqf1(buf.as_slice()).is_err());
    }
}
