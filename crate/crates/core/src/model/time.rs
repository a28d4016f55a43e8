use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Resolution {
    Yearly,
    Monthly,
    Weekly,
    Daily,
}

impl Resolution {
    pub fn as_str(self) -> &'static str {
        match self {
            Resolution::Yearly => "yearly",
            Resolution::Monthly => "monthly",
            Resolution::Weekly => "weekly",
            Resolution::Daily => "daily",
        }
    }
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Resolution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "yearly" => Ok(Resolution::Yearly),
            "monthly" => Ok(Resolution::Monthly),
            "weekly" => Ok(Resolution::Weekly),
            "daily" => Ok(Resolution::Daily),
            other => Err(Error::InvalidInput(format!("unknown resolution `{other}`"))),
        }
    }
}

/// Number of ISO-8601 weeks in an ISO week-numbering year (52 or 53).
pub fn iso_weeks_in_year(year: i32) -> u32 {
    if NaiveDate::from_isoywd_opt(year, 53, Weekday::Mon).is_some() {
        53
    } else {
        52
    }
}

pub fn days_in_year(year: i32) -> u32 {
    if NaiveDate::from_ymd_opt(year, 2, 29).is_some() {
        366
    } else {
        365
    }
}

/// A point on one of the supported time axes.
///
/// `sub` is the month (1-12), ISO week (1-53) or day of year (1-366); it is 0
/// for yearly keys. Weekly keys carry the ISO week-numbering year, which can
/// differ from the calendar year for days at the turn of the year.
///
/// Fields are public so that malformed keys can be represented and reported
/// by [`crate::model::validate_panel`]; use the constructors to get checked
/// keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TimeKey {
    pub resolution: Resolution,
    pub year: i32,
    pub sub: u32,
}

impl TimeKey {
    pub fn new(resolution: Resolution, year: i32, sub: u32) -> Result<Self, Error> {
        let key = TimeKey {
            resolution,
            year,
            sub,
        };
        if key.is_valid() {
            Ok(key)
        } else {
            Err(Error::InvalidInput(format!(
                "{resolution} time key {year}/{sub} out of range"
            )))
        }
    }

    pub fn yearly(year: i32) -> Self {
        TimeKey {
            resolution: Resolution::Yearly,
            year,
            sub: 0,
        }
    }

    pub fn monthly(year: i32, month: u32) -> Self {
        TimeKey {
            resolution: Resolution::Monthly,
            year,
            sub: month,
        }
    }

    pub fn weekly(iso_year: i32, week: u32) -> Self {
        TimeKey {
            resolution: Resolution::Weekly,
            year: iso_year,
            sub: week,
        }
    }

    pub fn daily(year: i32, ordinal: u32) -> Self {
        TimeKey {
            resolution: Resolution::Daily,
            year,
            sub: ordinal,
        }
    }

    pub fn from_date(date: NaiveDate, resolution: Resolution) -> Self {
        match resolution {
            Resolution::Yearly => TimeKey::yearly(date.year()),
            Resolution::Monthly => TimeKey::monthly(date.year(), date.month()),
            Resolution::Weekly => {
                let w = date.iso_week();
                TimeKey::weekly(w.year(), w.week())
            }
            Resolution::Daily => TimeKey::daily(date.year(), date.ordinal()),
        }
    }

    /// Calendar date of a daily key.
    pub fn date(&self) -> Option<NaiveDate> {
        match self.resolution {
            Resolution::Daily => NaiveDate::from_yo_opt(self.year, self.sub),
            _ => None,
        }
    }

    pub fn is_valid(&self) -> bool {
        match self.resolution {
            Resolution::Yearly => self.sub == 0,
            Resolution::Monthly => (1..=12).contains(&self.sub),
            Resolution::Weekly => (1..=iso_weeks_in_year(self.year)).contains(&self.sub),
            Resolution::Daily => (1..=days_in_year(self.year)).contains(&self.sub),
        }
    }

    /// Every key of `resolution` whose (ISO) year is `year`, in order.
    pub fn all_in_year(year: i32, resolution: Resolution) -> Vec<TimeKey> {
        match resolution {
            Resolution::Yearly => vec![TimeKey::yearly(year)],
            Resolution::Monthly => (1..=12).map(|m| TimeKey::monthly(year, m)).collect(),
            Resolution::Weekly => (1..=iso_weeks_in_year(year))
                .map(|w| TimeKey::weekly(year, w))
                .collect(),
            Resolution::Daily => (1..=days_in_year(year))
                .map(|d| TimeKey::daily(year, d))
                .collect(),
        }
    }
}

// Lexicographic by (year, sub); resolution only breaks ties between keys of
// different resolutions so that the order stays total and consistent with Eq.
impl Ord for TimeKey {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.year, self.sub, self.resolution).cmp(&(other.year, other.sub, other.resolution))
    }
}

impl PartialOrd for TimeKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `2018`, `2018-03`, `2018-W05`, `2018-D123`.
impl fmt::Display for TimeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.resolution {
            Resolution::Yearly => write!(f, "{}", self.year),
            Resolution::Monthly => write!(f, "{}-{:02}", self.year, self.sub),
            Resolution::Weekly => write!(f, "{}-W{:02}", self.year, self.sub),
            Resolution::Daily => write!(f, "{}-D{:03}", self.year, self.sub),
        }
    }
}

impl FromStr for TimeKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::InvalidInput(format!("cannot parse time key `{s}`"));
        let (year, rest) = match s.find('-') {
            Some(i) if i > 0 => (&s[..i], Some(&s[i + 1..])),
            _ => (s, None),
        };
        let year: i32 = year.parse().map_err(|_| bad())?;
        let (resolution, sub) = match rest {
            None => (Resolution::Yearly, "0"),
            Some(r) if r.starts_with('W') => (Resolution::Weekly, &r[1..]),
            Some(r) if r.starts_with('D') => (Resolution::Daily, &r[1..]),
            Some(r) => (Resolution::Monthly, r),
        };
        let sub: u32 = sub.parse().map_err(|_| bad())?;
        TimeKey::new(resolution, year, sub)
    }
}

/// Inclusive range of years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearSpan {
    pub start: i32,
    pub end: i32,
}

impl YearSpan {
    pub fn new(start: i32, end: i32) -> Result<Self, Error> {
        if start > end {
            return Err(Error::InvalidInput(format!(
                "year span {start}-{end} is empty"
            )));
        }
        Ok(YearSpan { start, end })
    }

    pub fn contains(&self, year: i32) -> bool {
        (self.start..=self.end).contains(&year)
    }

    pub fn years(&self) -> impl Iterator<Item = i32> {
        self.start..=self.end
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iso_week_counts() {
        assert_eq!(iso_weeks_in_year(2015), 53);
        assert_eq!(iso_weeks_in_year(2016), 52);
        assert_eq!(iso_weeks_in_year(2020), 53);
    }

    #[test]
    fn validity_ranges() {
        assert!(TimeKey::monthly(2018, 12).is_valid());
        assert!(!TimeKey::monthly(2018, 13).is_valid());
        assert!(!TimeKey::monthly(2018, 0).is_valid());
        assert!(!TimeKey::weekly(2016, 53).is_valid());
        assert!(TimeKey::weekly(2015, 53).is_valid());
        assert!(TimeKey::daily(2016, 366).is_valid());
        assert!(!TimeKey::daily(2017, 366).is_valid());
        assert!(!TimeKey { resolution: Resolution::Yearly, year: 2018, sub: 1 }.is_valid());
    }

    #[test]
    fn label_round_trip() {
        for key in [
            TimeKey::yearly(2018),
            TimeKey::monthly(2018, 3),
            TimeKey::weekly(2015, 53),
            TimeKey::daily(2016, 60),
        ] {
            let label = key.to_string();
            assert_eq!(label.parse::<TimeKey>().unwrap(), key, "{label}");
        }
        assert!("2018-13".parse::<TimeKey>().is_err());
        assert!("x".parse::<TimeKey>().is_err());
    }

    #[test]
    fn iso_year_assignment() {
        // 2017-01-01 is a Sunday and belongs to week 52 of ISO year 2016.
        let d = NaiveDate::from_ymd_opt(2017, 1, 1).unwrap();
        assert_eq!(TimeKey::from_date(d, Resolution::Weekly), TimeKey::weekly(2016, 52));
        let d = NaiveDate::from_ymd_opt(2018, 12, 31).unwrap();
        assert_eq!(TimeKey::from_date(d, Resolution::Weekly), TimeKey::weekly(2019, 1));
    }
}
