//! The 802.11ac VHT (20 MHz) MCS table, AMC selection, and the reverse
//! map from a detected modulation to its operational SNR interval.
//!
//! The reverse map is what the attack exploits: MCS tables are public, so
//! observing the modulation alone bounds the link's SNR to an interval.

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum McsError {
    #[error("snr {snr_db} dB is below the table floor ({floor_db} dB): out of coverage")]
    OutOfCoverage { snr_db: f64, floor_db: f64 },
    #[error("modulation {0} does not appear in the table")]
    ModulationAbsent(Modulation),
    #[error("invalid MCS table: {0}")]
    InvalidTable(String),
    #[error("MCS CSV: {0}")]
    Csv(String),
}

/// The four modulation schemes the downlink can use, ordered by spectral
/// efficiency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Modulation {
    Bpsk,
    Qpsk,
    Qam16,
    Qam64,
}

impl Modulation {
    pub const ALL: [Modulation; 4] = [
        Modulation::Bpsk,
        Modulation::Qpsk,
        Modulation::Qam16,
        Modulation::Qam64,
    ];

    pub fn bits_per_symbol(self) -> u32 {
        match self {
            Modulation::Bpsk => 1,
            Modulation::Qpsk => 2,
            Modulation::Qam16 => 4,
            Modulation::Qam64 => 6,
        }
    }

    /// Stable code used in the IQF1 frame header.
    pub fn wire_code(self) -> u32 {
        match self {
            Modulation::Bpsk => 0,
            Modulation::Qpsk => 1,
            Modulation::Qam16 => 2,
            Modulation::Qam64 => 3,
        }
    }

    pub fn from_wire_code(code: u32) -> Option<Modulation> {
        Modulation::ALL.get(code as usize).copied()
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Modulation::Bpsk => "BPSK",
            Modulation::Qpsk => "QPSK",
            Modulation::Qam16 => "16-QAM",
            Modulation::Qam64 => "64-QAM",
        };
        f.write_str(s)
    }
}

impl FromStr for Modulation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match norm.as_str() {
            "bpsk" => Ok(Modulation::Bpsk),
            "qpsk" => Ok(Modulation::Qpsk),
            "qam16" | "16qam" => Ok(Modulation::Qam16),
            "qam64" | "64qam" => Ok(Modulation::Qam64),
            _ => Err(format!("unknown modulation `{s}`")),
        }
    }
}

/// FEC code rate, carried as metadata only (no coding is simulated).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CodeRate {
    pub numer: u32,
    pub denom: u32,
}

impl CodeRate {
    pub const fn new(numer: u32, denom: u32) -> Self {
        CodeRate { numer, denom }
    }

    pub fn as_f64(self) -> f64 {
        self.numer as f64 / self.denom as f64
    }
}

impl fmt::Display for CodeRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer, self.denom)
    }
}

impl FromStr for CodeRate {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (n, d) = s
            .split_once('/')
            .ok_or_else(|| format!("code rate `{s}` is not of the form a/b"))?;
        let numer = n.trim().parse().map_err(|_| format!("bad numerator in `{s}`"))?;
        let denom: u32 = d.trim().parse().map_err(|_| format!("bad denominator in `{s}`"))?;
        if denom == 0 {
            return Err("code rate denominator is zero".into());
        }
        Ok(CodeRate { numer, denom })
    }
}

/// One row of the MCS table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McsEntry {
    pub index: u8,
    pub modulation: Modulation,
    pub code_rate: CodeRate,
    pub data_rate_800ns_mbps: f64,
    pub data_rate_400ns_mbps: f64,
    pub min_snr_db: f64,
}

/// Ordered MCS table; the default is the 802.11ac VHT 20 MHz table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McsTable {
    entries: Vec<McsEntry>,
}

impl Default for McsTable {
    fn default() -> Self {
        const ROWS: [(u8, Modulation, CodeRate, f64, f64, f64); 8] = [
            (0, Modulation::Bpsk, CodeRate::new(1, 2), 6.5, 7.2, 2.0),
            (1, Modulation::Qpsk, CodeRate::new(1, 2), 13.0, 14.4, 5.0),
            (2, Modulation::Qpsk, CodeRate::new(3, 4), 19.5, 21.7, 9.0),
            (3, Modulation::Qam16, CodeRate::new(1, 2), 26.0, 28.9, 11.0),
            (4, Modulation::Qam16, CodeRate::new(3, 4), 39.0, 43.3, 15.0),
            (5, Modulation::Qam64, CodeRate::new(2, 3), 52.0, 57.8, 18.0),
            (6, Modulation::Qam64, CodeRate::new(3, 4), 58.5, 65.0, 20.0),
            (7, Modulation::Qam64, CodeRate::new(5, 6), 65.0, 72.2, 25.0),
        ];
        let entries = ROWS
            .iter()
            .map(|&(index, modulation, code_rate, r800, r400, snr)| McsEntry {
                index,
                modulation,
                code_rate,
                data_rate_800ns_mbps: r800,
                data_rate_400ns_mbps: r400,
                min_snr_db: snr,
            })
            .collect();
        McsTable { entries }
    }
}

impl McsTable {
    pub fn new(entries: Vec<McsEntry>) -> Result<Self, McsError> {
        if entries.is_empty() {
            return Err(McsError::InvalidTable("table is empty".into()));
        }
        for (i, e) in entries.iter().enumerate() {
            if e.index as usize != i {
                return Err(McsError::InvalidTable(format!(
                    "indices must be contiguous from 0; row {i} has index {}",
                    e.index
                )));
            }
            if !e.min_snr_db.is_finite() {
                return Err(McsError::InvalidTable(format!(
                    "row {i}: min_snr_db must be finite"
                )));
            }
            if e.data_rate_800ns_mbps <= 0.0 || e.data_rate_400ns_mbps <= 0.0 {
                return Err(McsError::InvalidTable(format!(
                    "row {i}: data rates must be positive"
                )));
            }
        }
        for w in entries.windows(2) {
            if w[1].min_snr_db <= w[0].min_snr_db {
                return Err(McsError::InvalidTable(format!(
                    "min_snr_db must be strictly increasing (rows {} and {})",
                    w[0].index, w[1].index
                )));
            }
            if w[1].modulation < w[0].modulation {
                return Err(McsError::InvalidTable(format!(
                    "modulation order must be non-decreasing (rows {} and {})",
                    w[0].index, w[1].index
                )));
            }
        }
        Ok(McsTable { entries })
    }

    pub fn entries(&self) -> &[McsEntry] {
        &self.entries
    }

    /// The lowest SNR at which any MCS is available (the coverage floor).
    pub fn floor_snr_db(&self) -> f64 {
        self.entries[0].min_snr_db
    }

    /// Loads a table from CSV with columns
    /// `index,modulation,code_rate,rate_800ns_mbps,rate_400ns_mbps,min_snr_db`.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self, McsError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let expected = [
            "index",
            "modulation",
            "code_rate",
            "rate_800ns_mbps",
            "rate_400ns_mbps",
            "min_snr_db",
        ];
        let headers = rdr.headers().map_err(|e| McsError::Csv(e.to_string()))?;
        let got: Vec<&str> = headers.iter().collect();
        if got != expected {
            return Err(McsError::Csv(format!(
                "expected header {expected:?}, got {got:?}"
            )));
        }
        let mut entries = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| McsError::Csv(e.to_string()))?;
            let field = |i: usize| -> Result<&str, McsError> {
                record
                    .get(i)
                    .ok_or_else(|| McsError::Csv(format!("row {row}: missing column {i}")))
            };
            let parse_f64 = |i: usize| -> Result<f64, McsError> {
                field(i)?
                    .parse()
                    .map_err(|_| McsError::Csv(format!("row {row}: bad number in column {i}")))
            };
            entries.push(McsEntry {
                index: field(0)?
                    .parse()
                    .map_err(|_| McsError::Csv(format!("row {row}: bad index")))?,
                modulation: field(1)?
                    .parse()
                    .map_err(|e: String| McsError::Csv(format!("row {row}: {e}")))?,
                code_rate: field(2)?
                    .parse()
                    .map_err(|e: String| McsError::Csv(format!("row {row}: {e}")))?,
                data_rate_800ns_mbps: parse_f64(3)?,
                data_rate_400ns_mbps: parse_f64(4)?,
                min_snr_db: parse_f64(5)?,
            });
        }
        McsTable::new(entries)
    }

    pub fn from_csv_path<P: AsRef<Path>>(path: P) -> Result<Self, McsError> {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| McsError::Csv(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_csv_reader(file)
    }
}

/// Half-open operational SNR interval `[lo, hi)`; `hi = None` is unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnrInterval {
    pub lo_db: f64,
    pub hi_db: Option<f64>,
}

impl SnrInterval {
    pub fn contains(&self, snr_db: f64) -> bool {
        snr_db >= self.lo_db && self.hi_db.map_or(true, |hi| snr_db < hi)
    }
}

/// AMC selection: the entry with the largest `min_snr_db` not exceeding
/// `snr_db`. Below the table floor the user cannot be served.
pub fn select_mcs(snr_db: f64, table: &McsTable) -> Result<&McsEntry, McsError> {
    table
        .entries()
        .iter()
        .rev()
        .find(|e| snr_db >= e.min_snr_db)
        .ok_or(McsError::OutOfCoverage {
            snr_db,
            floor_db: table.floor_snr_db(),
        })
}

/// The reverse map: the half-open SNR interval within which AMC picks
/// modulation `m`. The top modulation's interval is unbounded above.
pub fn snr_interval_for_modulation(
    m: Modulation,
    table: &McsTable,
) -> Result<SnrInterval, McsError> {
    let lo = table
        .entries()
        .iter()
        .filter(|e| e.modulation == m)
        .map(|e| e.min_snr_db)
        .fold(f64::INFINITY, f64::min);
    if !lo.is_finite() {
        return Err(McsError::ModulationAbsent(m));
    }
    let hi = table
        .entries()
        .iter()
        .filter(|e| e.modulation > m)
        .map(|e| e.min_snr_db)
        .fold(f64::INFINITY, f64::min);
    Ok(SnrInterval {
        lo_db: lo,
        hi_db: hi.is_finite().then_some(hi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_table_matches_published_rows() {
        let t = McsTable::default();
        assert_eq!(t.entries().len(), 8);
        let e0 = &t.entries()[0];
        assert_eq!(
            (e0.modulation, e0.code_rate, e0.data_rate_800ns_mbps, e0.data_rate_400ns_mbps, e0.min_snr_db),
            (Modulation::Bpsk, CodeRate::new(1, 2), 6.5, 7.2, 2.0)
        );
        let e7 = &t.entries()[7];
        assert_eq!(
            (e7.modulation, e7.code_rate, e7.data_rate_800ns_mbps, e7.data_rate_400ns_mbps, e7.min_snr_db),
            (Modulation::Qam64, CodeRate::new(5, 6), 65.0, 72.2, 25.0)
        );
        let snrs: Vec<f64> = t.entries().iter().map(|e| e.min_snr_db).collect();
        assert_eq!(snrs, [2.0, 5.0, 9.0, 11.0, 15.0, 18.0, 20.0, 25.0]);
    }

    #[test]
    fn select_picks_largest_min_snr_at_or_below() {
        let t = McsTable::default();
        let e = select_mcs(12.0, &t).unwrap();
        assert_eq!((e.index, e.modulation, e.code_rate), (3, Modulation::Qam16, CodeRate::new(1, 2)));
        let e = select_mcs(2.0, &t).unwrap();
        assert_eq!((e.index, e.modulation), (0, Modulation::Bpsk));
        assert_eq!(
            select_mcs(1.9, &t),
            Err(McsError::OutOfCoverage { snr_db: 1.9, floor_db: 2.0 })
        );
    }

    #[test]
    fn intervals_match_table_bands() {
        let t = McsTable::default();
        let b = snr_interval_for_modulation(Modulation::Bpsk, &t).unwrap();
        assert_eq!((b.lo_db, b.hi_db), (2.0, Some(5.0)));
        let q = snr_interval_for_modulation(Modulation::Qpsk, &t).unwrap();
        assert_eq!((q.lo_db, q.hi_db), (5.0, Some(11.0)));
        let q16 = snr_interval_for_modulation(Modulation::Qam16, &t).unwrap();
        assert_eq!((q16.lo_db, q16.hi_db), (11.0, Some(18.0)));
        let q64 = snr_interval_for_modulation(Modulation::Qam64, &t).unwrap();
        assert_eq!((q64.lo_db, q64.hi_db), (18.0, None));
    }

    #[test]
    fn intervals_tile_the_covered_range() {
        let t = McsTable::default();
        let intervals: Vec<SnrInterval> = Modulation::ALL
            .iter()
            .map(|&m| snr_interval_for_modulation(m, &t).unwrap())
            .collect();
        assert_eq!(intervals[0].lo_db, t.floor_snr_db());
        for w in intervals.windows(2) {
            assert_eq!(w[0].hi_db, Some(w[1].lo_db));
        }
        assert_eq!(intervals[3].hi_db, None);
    }

    #[test]
    fn selection_consistent_with_intervals() {
        let t = McsTable::default();
        let mut snr = 2.0;
        while snr <= 40.0 {
            let m = select_mcs(snr, &t).unwrap().modulation;
            let iv = snr_interval_for_modulation(m, &t).unwrap();
            assert!(iv.contains(snr), "snr {snr} not in interval of {m}");
            // Exactly one modulation claims each SNR.
            let claims = Modulation::ALL
                .iter()
                .filter(|&&mm| snr_interval_for_modulation(mm, &t).unwrap().contains(snr))
                .count();
            assert_eq!(claims, 1, "snr {snr}");
            snr += 0.01;
        }
    }

    #[test]
    fn selection_is_monotone_in_snr() {
        let t = McsTable::default();
        let mut prev = 0;
        for i in 0..4000 {
            let snr = 2.0 + i as f64 * 0.01;
            let idx = select_mcs(snr, &t).unwrap().index;
            assert!(idx >= prev);
            prev = idx;
        }
    }

    #[test]
    fn modulation_parsing_and_display() {
        assert_eq!("bpsk".parse::<Modulation>().unwrap(), Modulation::Bpsk);
        assert_eq!("16-QAM".parse::<Modulation>().unwrap(), Modulation::Qam16);
        assert_eq!("qam64".parse::<Modulation>().unwrap(), Modulation::Qam64);
        assert_eq!("64QAM".parse::<Modulation>().unwrap(), Modulation::Qam64);
        assert!("8psk".parse::<Modulation>().is_err());
        assert_eq!(Modulation::Qam16.to_string(), "16-QAM");
        for m in Modulation::ALL {
            assert_eq!(Modulation::from_wire_code(m.wire_code()), Some(m));
        }
    }

    #[test]
    fn csv_round_trip_matches_default() {
        let csv_text = "index,modulation,code_rate,rate_800ns_mbps,rate_400ns_mbps,min_snr_db\n\
            0,BPSK,1/2,6.5,7.2,2\n\
            1,QPSK,1/2,13,14.4,5\n\
            2,QPSK,3/4,19.5,21.7,9\n\
            3,16-QAM,1/2,26,28.9,11\n\
            4,16-QAM,3/4,39,43.3,15\n\
            5,64-QAM,2/3,52,57.8,18\n\
            6,64-QAM,3/4,58.5,65,20\n\
            7,64-QAM,5/6,65,72.2,25\n";
        let t = McsTable::from_csv_reader(csv_text.as_bytes()).unwrap();
        assert_eq!(t, McsTable::default());
    }

    #[test]
    fn invalid_tables_are_rejected() {
        let mut rows = McsTable::default().entries().to_vec();
        rows[3].min_snr_db = 9.0; // duplicate of row 2
        assert!(McsTable::new(rows).is_err());

        let mut rows = McsTable::default().entries().to_vec();
        rows[5].modulation = Modulation::Bpsk; // order violation
        assert!(McsTable::new(rows).is_err());

        let mut rows = McsTable::default().entries().to_vec();
        rows[4].index = 9; // gap
        assert!(McsTable::new(rows).is_err());

        assert!(McsTable::new(vec![]).is_err());
    }

    #[test]
    fn missing_modulation_is_an_error() {
        let rows = McsTable::default().entries()[..3].to_vec(); // BPSK + QPSK only
        let t = McsTable::new(rows).unwrap();
        assert_eq!(
            snr_interval_for_modulation(Modulation::Qam64, &t),
            Err(McsError::ModulationAbsent(Modulation::Qam64))
        );
        // QPSK is now the top modulation: unbounded above.
        let q = snr_interval_for_modulation(Modulation::Qpsk, &t).unwrap();
        assert_eq!((q.lo_db, q.hi_db), (5.0, None));
    }
}
