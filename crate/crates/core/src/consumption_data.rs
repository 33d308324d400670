//! Meter-data pipeline: parse raw household readings, aggregate them to
//! hourly energies, and reduce each hour of the day to a small discrete
//! consumption distribution.

use std::collections::BTreeMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("distribution needs equally many loads and probabilities ({loads} vs {probs})")]
    LengthMismatch { loads: usize, probs: usize },
    #[error("distribution must contain at least one scenario")]
    EmptyDistribution,
    #[error("scenario loads must be non-negative, finite and strictly increasing")]
    InvalidLoads,
    #[error("scenario probabilities must be positive and sum to 1")]
    InvalidProbabilities,
    #[error("hour must be in 0..=23, got {0}")]
    InvalidHour(u8),
    #[error("cannot discretize an empty sample")]
    EmptySample,
    #[error("scenario count must be in 1..={max}, got {requested}")]
    BadScenarioCount { requested: usize, max: usize },
    #[error("input has no header line")]
    MissingHeader,
    #[error("malformed header: missing column `{0}`")]
    MissingColumn(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Finite scenario set for one hour of the day: loads `x` in kWh with
/// probabilities `p`, strictly increasing and summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution<T>")]
#[serde(bound(
    serialize = "T: Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct DiscreteDistribution<T> {
    time_frame: u8,
    loads: Vec<T>,
    probs: Vec<T>,
}

#[derive(Deserialize)]
struct RawDistribution<T> {
    time_frame: u8,
    loads: Vec<T>,
    probs: Vec<T>,
}

impl<T: Real> TryFrom<RawDistribution<T>> for DiscreteDistribution<T> {
    type Error = DataError;

    fn try_from(raw: RawDistribution<T>) -> Result<Self, DataError> {
        DiscreteDistribution::new(raw.time_frame, raw.loads, raw.probs)
    }
}

impl<T: Real> DiscreteDistribution<T> {
    /// Build a distribution from sorted loads. Loads closer than the
    /// comparison tolerance are treated as duplicates and merged, summing
    /// their probabilities.
    pub fn new(time_frame: u8, loads: Vec<T>, probs: Vec<T>) -> Result<Self, DataError> {
        if time_frame > 23 {
            return Err(DataError::InvalidHour(time_frame));
        }
        if loads.len() != probs.len() {
            return Err(DataError::LengthMismatch { loads: loads.len(), probs: probs.len() });
        }
        if loads.is_empty() {
            return Err(DataError::EmptyDistribution);
        }
        if loads.iter().any(|x| !x.is_finite() || *x < T::zero())
            || loads.windows(2).any(|w| w[1] < w[0])
        {
            return Err(DataError::InvalidLoads);
        }
        let total: T = probs.iter().copied().sum();
        if probs.iter().any(|p| !p.is_finite() || *p <= T::zero())
            || (total - T::one()).abs() > T::tol()
        {
            return Err(DataError::InvalidProbabilities);
        }
        let mut merged_loads: Vec<T> = Vec::with_capacity(loads.len());
        let mut merged_probs: Vec<T> = Vec::with_capacity(probs.len());
        for (x, p) in loads.into_iter().zip(probs) {
            match merged_loads.last_mut() {
                Some(last) if x - *last <= T::tol() => {
                    let prev_p = *merged_probs.last().unwrap();
                    let total_p = prev_p + p;
                    *last = (*last * prev_p + x * p) / total_p;
                    *merged_probs.last_mut().unwrap() = total_p;
                }
                _ => {
                    merged_loads.push(x);
                    merged_probs.push(p);
                }
            }
        }
        Ok(Self { time_frame, loads: merged_loads, probs: merged_probs })
    }

    /// Single-scenario distribution with all mass at one load.
    pub fn point_mass(time_frame: u8, load: T) -> Result<Self, DataError> {
        Self::new(time_frame, vec![load], vec![T::one()])
    }

    pub fn time_frame(&self) -> u8 {
        self.time_frame
    }

    pub fn loads(&self) -> &[T] {
        &self.loads
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn scenario_count(&self) -> usize {
        self.loads.len()
    }

    /// Expected load, `sum(x * p)`.
    pub fn mean(&self) -> T {
        self.loads.iter().zip(&self.probs).map(|(&x, &p)| x * p).sum()
    }

    /// Probability-weighted load mass on each side of a capacity:
    /// `(sum of x*p over x <= c, sum of x*p over x > c)`.
    pub fn load_mass_split(&self, c: T) -> (T, T) {
        let mut below = T::zero();
        let mut above = T::zero();
        for (&x, &p) in self.loads.iter().zip(&self.probs) {
            if x <= c {
                below = below + x * p;
            } else {
                above = above + x * p;
            }
        }
        (below, above)
    }
}

/// Calendar day in naive wall-clock time; no timezone handling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CalendarDate {
    pub year: u16,
    pub month: u8,
    pub day: u8,
}

/// Energy consumed in one hour of one day, with the fraction of expected
/// meter readings that were actually present.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HourlySample<T> {
    pub date: CalendarDate,
    pub hour: u8,
    /// kWh; the mean available active power in kW times one hour.
    pub energy: T,
    pub coverage: f64,
}

#[derive(Debug, Clone)]
pub struct IngestConfig {
    /// Minimum fraction of expected readings an hour must have to be kept.
    pub min_coverage: f64,
    /// Minutes between readings; `None` auto-detects from the first rows.
    pub cadence_minutes: Option<u32>,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self { min_coverage: 0.5, cadence_minutes: None }
    }
}

/// Per-run ingestion tallies.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestStats {
    pub rows_total: usize,
    pub rows_skipped: usize,
    pub readings_missing: usize,
    pub hours_kept: usize,
    pub hours_dropped: usize,
    pub cadence_minutes: u32,
}

/// Parse semicolon-separated meter data with a
/// `Date;Time;Global_active_power;...` header, `d/m/yyyy` dates, `HH:MM:SS`
/// times and `?` for missing readings, and aggregate it into one
/// [`HourlySample`] per (date, hour) meeting the coverage threshold.
///
/// Unparseable rows are skipped and counted in the returned stats.
pub fn ingest_power_csv<T: Real>(
    source: impl BufRead,
    cfg: &IngestConfig,
) -> Result<(Vec<HourlySample<T>>, IngestStats), DataError> {
    let mut lines = source.lines();
    let header = lines.next().ok_or(DataError::MissingHeader)??;
    let columns: Vec<&str> = header.trim().split(';').collect();
    let col = |name: &'static str| -> Result<usize, DataError> {
        columns
            .iter()
            .position(|c| c.eq_ignore_ascii_case(name))
            .ok_or(DataError::MissingColumn(name))
    };
    let date_col = col("Date")?;
    let time_col = col("Time")?;
    let power_col = col("Global_active_power")?;
    let needed = date_col.max(time_col).max(power_col) + 1;

    struct HourAccumulator {
        sum_kw: f64,
        valid: u32,
        seen: u32,
    }

    let mut hours: BTreeMap<(CalendarDate, u8), HourAccumulator> = BTreeMap::new();
    let mut stats = IngestStats::default();
    let mut minute_gaps: Vec<u32> = Vec::new();
    let mut prev_minute_of_day: Option<(CalendarDate, u32)> = None;

    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        stats.rows_total += 1;
        let fields: Vec<&str> = line.trim().split(';').collect();
        if fields.len() < needed {
            stats.rows_skipped += 1;
            continue;
        }
        let Some((date, hour, minute)) = parse_date(fields[date_col])
            .zip(parse_time(fields[time_col]))
            .map(|(d, (h, m))| (d, h, m))
        else {
            stats.rows_skipped += 1;
            continue;
        };
        // Cadence detection looks at the gap between consecutive same-day rows.
        if minute_gaps.len() < 100 {
            let minute_of_day = hour as u32 * 60 + minute;
            if let Some((prev_date, prev)) = prev_minute_of_day {
                if prev_date == date && minute_of_day > prev {
                    minute_gaps.push(minute_of_day - prev);
                }
            }
            prev_minute_of_day = Some((date, minute_of_day));
        }
        let entry = hours
            .entry((date, hour))
            .or_insert(HourAccumulator { sum_kw: 0.0, valid: 0, seen: 0 });
        entry.seen += 1;
        let raw = fields[power_col].trim();
        if raw == "?" || raw.is_empty() {
            stats.readings_missing += 1;
        } else if let Ok(kw) = raw.parse::<f64>() {
            if kw.is_finite() && kw >= 0.0 {
                entry.sum_kw += kw;
                entry.valid += 1;
            } else {
                stats.rows_skipped += 1;
                entry.seen -= 1;
            }
        } else {
            stats.rows_skipped += 1;
            entry.seen -= 1;
        }
    }

    let cadence = cfg.cadence_minutes.unwrap_or_else(|| modal_gap(&minute_gaps));
    stats.cadence_minutes = cadence;
    let expected_per_hour = (60 / cadence.max(1)).max(1) as f64;

    let mut samples = Vec::new();
    for ((date, hour), acc) in hours {
        let coverage = (acc.valid as f64 / expected_per_hour).min(1.0);
        if coverage < cfg.min_coverage || acc.valid == 0 {
            stats.hours_dropped += 1;
            continue;
        }
        // Mean available power in kW over one hour = energy in kWh.
        let energy = acc.sum_kw / acc.valid as f64;
        samples.push(HourlySample {
            date,
            hour,
            energy: T::lit(energy),
            coverage,
        });
        stats.hours_kept += 1;
    }
    Ok((samples, stats))
}

fn parse_date(s: &str) -> Option<CalendarDate> {
    let mut parts = s.trim().splitn(3, '/');
    let day: u8 = parts.next()?.parse().ok()?;
    let month: u8 = parts.next()?.parse().ok()?;
    let year: u16 = parts.next()?.parse().ok()?;
    ((1..=31).contains(&day) && (1..=12).contains(&month)).then_some(CalendarDate {
        year,
        month,
        day,
    })
}

fn parse_time(s: &str) -> Option<(u8, u32)> {
    let mut parts = s.trim().splitn(3, ':');
    let hour: u8 = parts.next()?.parse().ok()?;
    let minute: u32 = parts.next()?.parse().ok()?;
    (hour <= 23 && minute <= 59).then_some((hour, minute))
}

/// Most frequent positive gap; 1 minute when nothing can be inferred.
fn modal_gap(gaps: &[u32]) -> u32 {
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for &g in gaps.iter().filter(|&&g| g > 0) {
        *counts.entry(g).or_default() += 1;
    }
    counts
        .into_iter()
        .max_by_key(|&(gap, count)| (count, std::cmp::Reverse(gap)))
        .map(|(gap, _)| gap)
        .unwrap_or(1)
}

/// Group sample energies by hour of day; hours with no samples map to empty
/// lists. Order within a group follows the input order.
pub fn group_by_hour<T: Real>(samples: &[HourlySample<T>]) -> [Vec<T>; 24] {
    let mut groups: [Vec<T>; 24] = std::array::from_fn(|_| Vec::new());
    for s in samples {
        groups[s.hour as usize].push(s.energy);
    }
    groups
}

/// Reduce a sample of hourly energies to `n_scenarios` equal-mass bins, each
/// represented by its conditional mean. Bins whose representatives coincide
/// are merged, so the result may hold fewer scenarios than requested.
///
/// The conditional-mean representatives preserve the sample mean exactly.
pub fn discretize<T: Real>(
    time_frame: u8,
    energies: &[T],
    n_scenarios: usize,
) -> Result<DiscreteDistribution<T>, DataError> {
    if energies.is_empty() {
        return Err(DataError::EmptySample);
    }
    if n_scenarios == 0 || n_scenarios > energies.len() {
        return Err(DataError::BadScenarioCount {
            requested: n_scenarios,
            max: energies.len(),
        });
    }
    let mut sorted = energies.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("energies must not be NaN"));

    let n = sorted.len();
    let mut loads: Vec<T> = Vec::with_capacity(n_scenarios);
    let mut probs: Vec<T> = Vec::with_capacity(n_scenarios);
    for bin in 0..n_scenarios {
        let start = bin * n / n_scenarios;
        let end = (bin + 1) * n / n_scenarios;
        let count = end - start;
        let mass = T::from_usize(count).unwrap() / T::from_usize(n).unwrap();
        let mean = sorted[start..end].iter().copied().sum::<T>()
            / T::from_usize(count).unwrap();
        // Merge bins with coinciding representatives (ties in the data).
        match loads.last() {
            Some(&prev) if (mean - prev).abs() <= T::tol() => {
                let prev_p = probs.pop().unwrap();
                let prev_x = loads.pop().unwrap();
                let total = prev_p + mass;
                loads.push((prev_x * prev_p + mean * mass) / total);
                probs.push(total);
            }
            _ => {
                loads.push(mean);
                probs.push(mass);
            }
        }
    }
    DiscreteDistribution::new(time_frame, loads, probs)
}
