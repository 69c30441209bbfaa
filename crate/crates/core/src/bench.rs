//! Sweep harness: generate keys across a residue-size range, run the
//! matching attack on each, and record window/iteration/timing data as CSV.

use crate::attack::{run_attack, AttackConfig, AttackStatus};
use crate::keygen::{gen_key, KeygenError, ModulusShape};
use num_traits::ToPrimitive;
use std::fmt;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::Path;

/// One key/attack pair. `s` and `l` are empty CSV cells for shapes that do
/// not have them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchRecord {
    pub shape: ModulusShape,
    pub prime_bits: u64,
    pub r_p_bits: u64,
    pub r_q_bits: u64,
    pub s: Option<u32>,
    pub l: Option<u32>,
    pub window_width: u64,
    pub iterations: u64,
    pub elapsed_ns: u128,
    pub success: bool,
    pub seed: u64,
}

pub const CSV_HEADER: &str =
    "shape,prime_bits,r_p_bits,r_q_bits,s,l,window_width,iterations,elapsed_ns,success,seed";

impl BenchRecord {
    pub fn csv_row(&self) -> String {
        let opt = |v: Option<u32>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.shape.name(),
            self.prime_bits,
            self.r_p_bits,
            self.r_q_bits,
            opt(self.s),
            opt(self.l),
            self.window_width,
            self.iterations,
            self.elapsed_ns,
            self.success,
            self.seed,
        )
    }
}

/// Per-r_bits medians over the trials at that point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepPoint {
    pub r_bits: u32,
    pub trials: u32,
    pub median_window_width: u64,
    pub median_iterations: u64,
    pub median_elapsed_ns: u128,
}

#[derive(Clone, Debug)]
pub struct SweepSummary {
    pub records: Vec<BenchRecord>,
    pub points: Vec<SweepPoint>,
}

impl SweepSummary {
    /// One line per sweep point, for standard output.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for p in &self.points {
            out.push_str(&format!(
                "r_bits={} trials={} median_window_width={} median_iterations={} median_elapsed_ns={}\n",
                p.r_bits, p.trials, p.median_window_width, p.median_iterations, p.median_elapsed_ns
            ));
        }
        out
    }
}

#[derive(Debug)]
pub enum BenchError {
    Keygen(KeygenError),
    /// An attack failed on a key the generator vouched for; this is a
    /// correctness alarm, not a measurement.
    AttackFailed { r_bits: u32, seed: u64, status: String },
    Io(std::io::Error),
}

impl fmt::Display for BenchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BenchError::Keygen(e) => write!(f, "key generation failed: {e}"),
            BenchError::AttackFailed { r_bits, seed, status } => write!(
                f,
                "attack failed on a valid key (r_bits={r_bits} seed={seed}): {status}"
            ),
            BenchError::Io(e) => write!(f, "csv output failed: {e}"),
        }
    }
}

impl std::error::Error for BenchError {}

impl From<KeygenError> for BenchError {
    fn from(e: KeygenError) -> Self {
        BenchError::Keygen(e)
    }
}

impl From<std::io::Error> for BenchError {
    fn from(e: std::io::Error) -> Self {
        BenchError::Io(e)
    }
}

fn median<T: Ord + Copy>(values: &mut [T]) -> T {
    values.sort_unstable();
    values[(values.len() - 1) / 2]
}

/// Generate trials_per_point keys at every r_bits in the range, attack each,
/// and abort with an error if any attack misses. Trial seeds depend only on
/// the trial index, not on r_bits, so sweep points where the residue cap
/// stops binding reuse identical keys and medians stay flat instead of
/// fluctuating.
pub fn run_sweep(
    shape: ModulusShape,
    prime_bits: u64,
    r_bits_range: RangeInclusive<u32>,
    trials_per_point: u32,
    seed: u64,
    cfg: &AttackConfig,
    csv_out: Option<&Path>,
) -> Result<SweepSummary, BenchError> {
    assert!(trials_per_point >= 1, "need at least one trial per point");
    assert!(!r_bits_range.is_empty(), "empty r_bits range");
    let mut records = Vec::new();
    let mut points = Vec::new();
    for r_bits in r_bits_range {
        let mut widths = Vec::new();
        let mut iterations = Vec::new();
        let mut timings = Vec::new();
        for trial in 0..trials_per_point {
            let trial_seed = seed ^ (trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            let key = gen_key(shape, prime_bits, r_bits, trial_seed)?;
            let hints = key.hints();
            let out = run_attack(&key.n, &hints, cfg);
            let success = match &out.status {
                AttackStatus::Factored { p, q } => {
                    (*p == key.prime_p.p && *q == key.prime_q.p)
                        || (*p == key.prime_q.p && *q == key.prime_p.p)
                }
                _ => false,
            };
            if !success {
                return Err(BenchError::AttackFailed {
                    r_bits,
                    seed: trial_seed,
                    status: format!("{:?}", out.status),
                });
            }
            let window = out.window.as_ref().expect("factored outcomes carry a window");
            let width = window.width().to_u64().expect("bench windows fit u64");
            widths.push(width);
            iterations.push(out.iterations);
            timings.push(out.elapsed_ns());
            records.push(BenchRecord {
                shape,
                prime_bits,
                r_p_bits: key.prime_p.r.bits(),
                r_q_bits: key.prime_q.r.bits(),
                s: shape.s(),
                l: shape.l(),
                window_width: width,
                iterations: out.iterations,
                elapsed_ns: out.elapsed_ns(),
                success,
                seed: trial_seed,
            });
        }
        points.push(SweepPoint {
            r_bits,
            trials: trials_per_point,
            median_window_width: median(&mut widths),
            median_iterations: median(&mut iterations),
            median_elapsed_ns: median(&mut timings),
        });
    }
    if let Some(path) = csv_out {
        let mut file = std::fs::File::create(path)?;
        writeln!(file, "{CSV_HEADER}")?;
        for record in &records {
            writeln!(file, "{}", record.csv_row())?;
        }
    }
    Ok(SweepSummary { records, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attack;
    use num_bigint::BigUint;

    #[test]
    fn pq_sweep_widths_match_window_formula_and_medians_do_not_decrease() {
        let cfg = AttackConfig::default();
        let trials = 5u32;
        let summary =
            run_sweep(ModulusShape::Pq, 48, 4..=10, trials, 0xBEEF, &cfg, None).unwrap();
        assert_eq!(summary.records.len(), 7 * trials as usize);
        for (pi, point) in summary.points.iter().enumerate() {
            for t in 0..trials as usize {
                let rec = &summary.records[pi * trials as usize + t];
                assert!(rec.success);
                assert!(rec.iterations <= rec.window_width);
                // regenerate the key at this point's cap: the recorded width
                // must match the window operation exactly
                let key = gen_key(rec.shape, rec.prime_bits, point.r_bits, rec.seed).unwrap();
                assert_eq!(key.prime_p.r.bits(), rec.r_p_bits);
                assert_eq!(key.prime_q.r.bits(), rec.r_q_bits);
                let w = attack::window_pq(&key.n, &key.prime_p.r, &key.prime_q.r).unwrap();
                assert_eq!(w.width(), BigUint::from(rec.window_width));
            }
        }
        let medians: Vec<u64> = summary.points.iter().map(|p| p.median_window_width).collect();
        for pair in medians.windows(2) {
            assert!(pair[1] >= pair[0], "median width decreased: {medians:?}");
        }
    }

    #[test]
    fn pslqs_two_point_sweep_is_affine_in_l() {
        // s = 5 allows l in {1, 2}; widths at fixed r_p follow the window
        // formula, which is affine in l up to ceiling jitter
        let cfg = AttackConfig::default();
        let mut widths = Vec::new();
        for l in [1u32, 2] {
            let shape = ModulusShape::psl_qs(5, l).unwrap();
            let key = crate::keygen::gen_key_with_residues(
                shape,
                60,
                &BigUint::from(20u32),
                &BigUint::from(12u32),
                7,
            )
            .unwrap();
            let w = attack::window_power_power(&key.n, 5, l, &key.prime_p.r).unwrap();
            widths.push(w.width().to_u64().unwrap());
        }
        // closed form: width = B + 2T + 2s + 2 with B = l*400, T = ceil(l*(5-l)*8400/10)
        assert_eq!(widths[0], 400 + 2 * 3360 + 12);
        assert_eq!(widths[1], 800 + 2 * 5040 + 12);
    }

    #[test]
    fn csv_rows_have_stable_shape() {
        let cfg = AttackConfig::default();
        let dir = std::env::temp_dir().join("powres-bench-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("sweep.csv");
        let summary = run_sweep(
            ModulusShape::ps_q(2).unwrap(),
            48,
            4..=5,
            3,
            99,
            &cfg,
            Some(&path),
        )
        .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), summary.records.len());
        for (row, rec) in rows.iter().zip(&summary.records) {
            assert_eq!(*row, rec.csv_row());
            let cells: Vec<&str> = row.split(',').collect();
            assert_eq!(cells.len(), 11);
            assert_eq!(cells[0], "psq");
            assert_eq!(cells[4], "2"); // s column
            assert_eq!(cells[5], ""); // l column empty for psq
            assert_eq!(cells[9], "true");
        }
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn sweep_is_deterministic_apart_from_timing() {
        let cfg = AttackConfig::default();
        let a = run_sweep(ModulusShape::Pq, 48, 5..=6, 3, 1, &cfg, None).unwrap();
        let b = run_sweep(ModulusShape::Pq, 48, 5..=6, 3, 1, &cfg, None).unwrap();
        assert_eq!(a.records.len(), b.records.len());
        for (x, y) in a.records.iter().zip(&b.records) {
            assert_eq!(x.shape, y.shape);
            assert_eq!(x.window_width, y.window_width);
            assert_eq!(x.iterations, y.iterations);
            assert_eq!(x.seed, y.seed);
            assert_eq!(x.r_p_bits, y.r_p_bits);
            assert_eq!(x.r_q_bits, y.r_q_bits);
        }
    }
}
