//! Two-period geographic panel data: observations, validation, first
//! differences, single-period slices and CSV ingestion.
//!
//! Distances are signed with positive values on the treated side of the
//! border. A unit sitting exactly at distance zero counts as treated, i.e.
//! the treatment indicator is `distance >= 0`.

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::local::Side;

/// Pre-treatment period label.
pub const PRE: u8 = 0;
/// Post-treatment period label.
pub const POST: u8 = 1;

/// One unit-period outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub unit_id: String,
    /// 0 = pre-treatment, 1 = post-treatment.
    pub period: u8,
    pub outcome: f64,
    /// Signed distance to the border; positive inside the treated area.
    pub distance: f64,
}

impl Observation {
    pub fn new(unit_id: impl Into<String>, period: u8, outcome: f64, distance: f64) -> Self {
        Self {
            unit_id: unit_id.into(),
            period,
            outcome,
            distance,
        }
    }
}

/// Names of the CSV columns holding each field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColumnMapping {
    pub unit: String,
    pub period: String,
    pub outcome: String,
    pub distance: String,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        Self {
            unit: "unit_id".into(),
            period: "period".into(),
            outcome: "outcome".into(),
            distance: "distance".into(),
        }
    }
}

/// A collection of unit-period observations.
///
/// Construction does not enforce the balanced-panel invariants; run
/// [`validate_panel`] to check them. Operations that difference within a
/// unit refuse invalid panels.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelDataset {
    observations: Vec<Observation>,
    pub source: String,
    pub columns: ColumnMapping,
}

impl PanelDataset {
    pub fn new(observations: Vec<Observation>, source: impl Into<String>) -> Self {
        Self {
            observations,
            source: source.into(),
            columns: ColumnMapping::default(),
        }
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Relabels period 0 as 1 and vice versa.
    pub fn with_periods_swapped(&self) -> Self {
        let mut out = self.clone();
        for obs in &mut out.observations {
            obs.period = 1 - obs.period.min(1);
        }
        out
    }

    /// Returns a copy with `f(observation)` added to every outcome.
    pub fn map_outcomes(&self, f: impl Fn(&Observation) -> f64) -> Self {
        let mut out = self.clone();
        for obs in &mut out.observations {
            obs.outcome += f(obs);
        }
        out
    }

    /// Writes the panel as CSV using `columns` for the header.
    ///
    /// Numbers are printed in shortest round-trip form, so reading the file
    /// back with [`load_panel`] reproduces every value exactly.
    pub fn write_csv<W: Write>(&self, writer: W, columns: &ColumnMapping) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record([
            &columns.unit,
            &columns.period,
            &columns.outcome,
            &columns.distance,
        ])?;
        for obs in &self.observations {
            wtr.write_record([
                obs.unit_id.clone(),
                obs.period.to_string(),
                format_f64(obs.outcome),
                format_f64(obs.distance),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

pub(crate) fn format_f64(x: f64) -> String {
    // `{:?}` is the shortest representation that parses back to the same bits.
    format!("{x:?}")
}

/// One `(unit, distance, value)` triple of a cross-section.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossPoint {
    pub unit_id: String,
    pub distance: f64,
    pub value: f64,
}

/// Per-unit values against the running variable: one period's outcomes or
/// first differences.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossSection {
    points: Vec<CrossPoint>,
}

impl CrossSection {
    /// Builds a cross-section, rejecting non-finite numbers and duplicate ids.
    pub fn new(points: Vec<CrossPoint>) -> Result<Self> {
        let mut seen = HashMap::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            if !p.distance.is_finite() || !p.value.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite distance or value for unit `{}`",
                    p.unit_id
                )));
            }
            if seen.insert(p.unit_id.as_str(), i).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "duplicate unit id `{}` in cross-section",
                    p.unit_id
                )));
            }
        }
        Ok(Self { points })
    }

    /// Convenience constructor labelling units by position.
    pub fn from_pairs(distances: &[f64], values: &[f64]) -> Result<Self> {
        if distances.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "{} distances but {} values",
                distances.len(),
                values.len()
            )));
        }
        let points = distances
            .iter()
            .zip(values)
            .enumerate()
            .map(|(i, (&distance, &value))| CrossPoint {
                unit_id: i.to_string(),
                distance,
                value,
            })
            .collect();
        Self::new(points)
    }

    pub fn points(&self) -> &[CrossPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn distances(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.distance)
    }

    /// `(distance, value)` pairs on one side of the cutoff, in input order.
    pub fn side(&self, side: Side) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .filter(|p| Side::of(p.distance) == side)
            .map(|p| (p.distance, p.value))
            .collect()
    }

    pub fn count_side(&self, side: Side) -> usize {
        self.points
            .iter()
            .filter(|p| Side::of(p.distance) == side)
            .count()
    }

    /// Returns a copy with `f(distance)` added to every value.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            points: self
                .points
                .iter()
                .map(|p| CrossPoint {
                    value: p.value + f(p.distance),
                    ..p.clone()
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    Global,
    Unit(String),
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::Global => f.write_str("global"),
            Scope::Unit(id) => f.write_str(id),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueKind {
    Unbalanced,
    DuplicateRow,
    DistanceDrift,
    NonFinite,
    InvalidPeriod,
    EmptySide,
    AtCutoff,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Issue {
    pub severity: Severity,
    pub scope: Scope,
    pub kind: IssueKind,
    pub message: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SideCounts {
    pub n_left: usize,
    pub n_right: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub is_valid: bool,
    pub issues: Vec<Issue>,
    pub n_units: usize,
    /// Indexed by period.
    pub counts: [SideCounts; 2],
}

impl ValidationReport {
    pub fn errors(&self) -> impl Iterator<Item = &Issue> {
        self.issues
            .iter()
            .filter(|i| i.severity == Severity::Error)
    }

    pub fn has_issue(&self, kind: IssueKind, scope: &Scope) -> bool {
        self.issues
            .iter()
            .any(|i| i.kind == kind && &i.scope == scope)
    }

    /// One-line description of the first few errors.
    pub fn summary(&self) -> String {
        let errs: Vec<String> = self
            .errors()
            .take(3)
            .map(|i| format!("{}: {}", i.scope, i.message))
            .collect();
        let total = self.errors().count();
        let mut s = errs.join("; ");
        if total > errs.len() {
            s.push_str(&format!("; ... ({total} errors total)"));
        }
        s
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "valid={} units={} period0(left={}, right={}) period1(left={}, right={})",
            self.is_valid,
            self.n_units,
            self.counts[0].n_left,
            self.counts[0].n_right,
            self.counts[1].n_left,
            self.counts[1].n_right
        )?;
        for issue in &self.issues {
            let sev = match issue.severity {
                Severity::Error => "error",
                Severity::Warning => "warning",
            };
            writeln!(f, "  [{sev}] {}: {}", issue.scope, issue.message)?;
        }
        Ok(())
    }
}

/// Reads a panel from CSV text with a header row.
///
/// Row numbers in errors count data rows from 1, excluding the header.
pub fn load_panel<R: Read>(source: R, columns: &ColumnMapping) -> Result<PanelDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema {
                column: name.to_string(),
            })
    };
    let i_unit = find(&columns.unit)?;
    let i_period = find(&columns.period)?;
    let i_outcome = find(&columns.outcome)?;
    let i_distance = find(&columns.distance)?;

    let mut observations = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let row = idx + 1;
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or("");

        let period_raw = field(i_period);
        let period: i64 = period_raw.parse().map_err(|_| Error::Parse {
            row,
            column: columns.period.clone(),
            message: format!("expected an integer period, got `{period_raw}`"),
        })?;
        if period != 0 && period != 1 {
            return Err(Error::Domain {
                row,
                message: format!("period must be 0 or 1, got {period}"),
            });
        }
        let real = |i: usize, name: &str| -> Result<f64> {
            let raw = field(i);
            match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Parse {
                    row,
                    column: name.to_string(),
                    message: format!("expected a finite number, got `{raw}`"),
                }),
            }
        };
        let outcome = real(i_outcome, &columns.outcome)?;
        let distance = real(i_distance, &columns.distance)?;
        observations.push(Observation {
            unit_id: field(i_unit).to_string(),
            period: period as u8,
            outcome,
            distance,
        });
    }

    Ok(PanelDataset {
        observations,
        source: String::new(),
        columns: columns.clone(),
    })
}

pub fn load_panel_path(path: &Path, columns: &ColumnMapping) -> Result<PanelDataset> {
    let file = std::fs::File::open(path)?;
    let mut data = load_panel(std::io::BufReader::new(file), columns)?;
    data.source = path.display().to_string();
    Ok(data)
}

#[derive(Default)]
struct UnitSlots<'a> {
    obs: [Option<&'a Observation>; 2],
}

/// Groups observations by unit in order of first appearance.
fn group_units(data: &PanelDataset) -> (Vec<&str>, HashMap<&str, UnitSlots<'_>>, Vec<&Observation>) {
    let mut order = Vec::new();
    let mut units: HashMap<&str, UnitSlots> = HashMap::new();
    let mut duplicates = Vec::new();
    for obs in &data.observations {
        let slots = units.entry(obs.unit_id.as_str()).or_insert_with(|| {
            order.push(obs.unit_id.as_str());
            UnitSlots::default()
        });
        if obs.period > 1 {
            continue;
        }
        let slot = &mut slots.obs[obs.period as usize];
        if slot.is_some() {
            duplicates.push(obs);
        } else {
            *slot = Some(obs);
        }
    }
    (order, units, duplicates)
}

/// Checks every panel invariant and reports violations without failing.
pub fn validate_panel(data: &PanelDataset) -> ValidationReport {
    let mut issues = Vec::new();
    let mut push = |severity, scope, kind, message: String| {
        issues.push(Issue {
            severity,
            scope,
            kind,
            message,
        })
    };

    let mut counts = [SideCounts::default(); 2];
    let mut at_cutoff = 0usize;
    for obs in &data.observations {
        if obs.period > 1 {
            push(
                Severity::Error,
                Scope::Unit(obs.unit_id.clone()),
                IssueKind::InvalidPeriod,
                format!("period {} is not 0 or 1", obs.period),
            );
            continue;
        }
        if !obs.outcome.is_finite() || !obs.distance.is_finite() {
            push(
                Severity::Error,
                Scope::Unit(obs.unit_id.clone()),
                IssueKind::NonFinite,
                format!(
                    "non-finite value in period {} (outcome={}, distance={})",
                    obs.period, obs.outcome, obs.distance
                ),
            );
            continue;
        }
        let c = &mut counts[obs.period as usize];
        match Side::of(obs.distance) {
            Side::Left => c.n_left += 1,
            Side::Right => c.n_right += 1,
        }
        if obs.distance == 0.0 && obs.period == PRE {
            at_cutoff += 1;
        }
    }

    let (order, units, duplicates) = group_units(data);
    for dup in duplicates {
        push(
            Severity::Error,
            Scope::Unit(dup.unit_id.clone()),
            IssueKind::DuplicateRow,
            format!("duplicate row for period {}", dup.period),
        );
    }
    for id in &order {
        let slots = &units[id];
        match slots.obs {
            [Some(a), Some(b)] => {
                if a.distance.is_finite() && b.distance.is_finite() && a.distance != b.distance {
                    push(
                        Severity::Error,
                        Scope::Unit(id.to_string()),
                        IssueKind::DistanceDrift,
                        format!(
                            "distance drift: {} in period 0, {} in period 1",
                            a.distance, b.distance
                        ),
                    );
                }
            }
            [Some(_), None] | [None, Some(_)] => {
                let have = if slots.obs[0].is_some() { 0 } else { 1 };
                push(
                    Severity::Error,
                    Scope::Unit(id.to_string()),
                    IssueKind::Unbalanced,
                    format!("unbalanced: only observed in period {have}"),
                );
            }
            [None, None] => {}
        }
    }

    for (t, c) in counts.iter().enumerate() {
        for (n, side) in [(c.n_left, Side::Left), (c.n_right, Side::Right)] {
            if n == 0 {
                push(
                    Severity::Error,
                    Scope::Global,
                    IssueKind::EmptySide,
                    format!("no observations on the {side} side in period {t}"),
                );
            }
        }
    }
    if at_cutoff > 0 {
        push(
            Severity::Warning,
            Scope::Global,
            IssueKind::AtCutoff,
            format!("{at_cutoff} unit(s) at distance exactly 0 are assigned to the treated side"),
        );
    }

    let is_valid = !issues.iter().any(|i| i.severity == Severity::Error);
    ValidationReport {
        is_valid,
        issues,
        n_units: order.len(),
        counts,
    }
}

fn require_valid(data: &PanelDataset) -> Result<()> {
    let report = validate_panel(data);
    if report.is_valid {
        Ok(())
    } else {
        Err(Error::InvalidPanel(Box::new(report)))
    }
}

/// Within-unit change `y_1 - y_0`, one point per unit.
pub fn first_difference(data: &PanelDataset) -> Result<CrossSection> {
    require_valid(data)?;
    let (order, units, _) = group_units(data);
    let points = order
        .iter()
        .map(|id| {
            let [Some(pre), Some(post)] = units[id].obs else {
                unreachable!("validated panel is balanced")
            };
            CrossPoint {
                unit_id: id.to_string(),
                distance: pre.distance,
                value: post.outcome - pre.outcome,
            }
        })
        .collect();
    CrossSection::new(points)
}

/// One period's outcomes, one point per unit observed in that period.
pub fn period_slice(data: &PanelDataset, period: u8) -> Result<CrossSection> {
    if period > 1 {
        return Err(Error::InvalidArgument(format!(
            "period must be 0 or 1, got {period}"
        )));
    }
    let points = data
        .observations
        .iter()
        .filter(|o| o.period == period)
        .map(|o| CrossPoint {
            unit_id: o.unit_id.clone(),
            distance: o.distance,
            value: o.outcome,
        })
        .collect();
    CrossSection::new(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FOUR_ROWS: &str = "unit_id,period,outcome,distance\n\
        a,0,1.0,-0.5\n\
        a,1,4.0,-0.5\n\
        b,0,2.5,0.25\n\
        b,1,3.5e0,0.25\n";

    fn two_unit_panel() -> PanelDataset {
        load_panel(FOUR_ROWS.as_bytes(), &ColumnMapping::default()).unwrap()
    }

    #[test]
    fn loads_four_rows() {
        let data = two_unit_panel();
        assert_eq!(data.len(), 4);
        assert_eq!(data.observations()[3].outcome, 3.5);
        assert_eq!(data.observations()[1].period, 1);
    }

    #[test]
    fn missing_column_names_it() {
        let text = "unit_id,period,outcome\na,0,1.0\n";
        match load_panel(text.as_bytes(), &ColumnMapping::default()) {
            Err(Error::Schema { column }) => assert_eq!(column, "distance"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_period_cites_row() {
        let text = "unit_id,period,outcome,distance\n\
            a,0,1,1\na,1,1,1\nb,2,1,1\n";
        match load_panel(text.as_bytes(), &ColumnMapping::default()) {
            Err(Error::Domain { row, .. }) => assert_eq!(row, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_numeric_outcome_is_parse_error() {
        let text = "unit_id,period,outcome,distance\na,0,abc,1\n";
        match load_panel(text.as_bytes(), &ColumnMapping::default()) {
            Err(Error::Parse { row, column, .. }) => {
                assert_eq!(row, 1);
                assert_eq!(column, "outcome");
            }
            other => panic!("unexpected {other:?}"),
        }
        let text = "unit_id,period,outcome,distance\na,0,1,NaN\n";
        assert!(matches!(
            load_panel(text.as_bytes(), &ColumnMapping::default()),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn remapped_columns() {
        let text = "id,t,y,km\nx,0,1,-1\n";
        let cols = ColumnMapping {
            unit: "id".into(),
            period: "t".into(),
            outcome: "y".into(),
            distance: "km".into(),
        };
        let data = load_panel(text.as_bytes(), &cols).unwrap();
        assert_eq!(data.observations()[0], Observation::new("x", 0, 1.0, -1.0));
    }

    #[test]
    fn balanced_panel_is_valid() {
        let report = validate_panel(&two_unit_panel());
        assert!(report.is_valid, "{report}");
        assert_eq!(report.n_units, 2);
        for c in report.counts {
            assert_eq!(c, SideCounts { n_left: 1, n_right: 1 });
        }
    }

    #[test]
    fn unbalanced_unit_reported() {
        let mut obs = two_unit_panel().observations().to_vec();
        obs.push(Observation::new("A", 0, 1.0, 0.3));
        let report = validate_panel(&PanelDataset::new(obs, "test"));
        assert!(!report.is_valid);
        assert!(report.has_issue(IssueKind::Unbalanced, &Scope::Unit("A".into())));
    }

    #[test]
    fn distance_drift_reported() {
        let mut obs = two_unit_panel().observations().to_vec();
        obs.push(Observation::new("B", 0, 1.0, 3.0));
        obs.push(Observation::new("B", 1, 1.0, 3.1));
        let report = validate_panel(&PanelDataset::new(obs, "test"));
        assert!(!report.is_valid);
        assert!(report.has_issue(IssueKind::DistanceDrift, &Scope::Unit("B".into())));
    }

    #[test]
    fn duplicates_empty_sides_and_non_finite() {
        let obs = vec![
            Observation::new("a", 0, 1.0, 1.0),
            Observation::new("a", 0, 2.0, 1.0),
            Observation::new("a", 1, f64::NAN, 1.0),
        ];
        let report = validate_panel(&PanelDataset::new(obs, "test"));
        assert!(!report.is_valid);
        let u = Scope::Unit("a".into());
        assert!(report.has_issue(IssueKind::DuplicateRow, &u));
        assert!(report.has_issue(IssueKind::NonFinite, &u));
        assert!(report.has_issue(IssueKind::EmptySide, &Scope::Global));
    }

    #[test]
    fn cutoff_unit_is_treated_with_warning() {
        let mut obs = two_unit_panel().observations().to_vec();
        obs.push(Observation::new("z", 0, 0.0, 0.0));
        obs.push(Observation::new("z", 1, 0.0, 0.0));
        let report = validate_panel(&PanelDataset::new(obs, "test"));
        assert!(report.is_valid);
        assert_eq!(report.counts[0].n_right, 2);
        assert!(report.has_issue(IssueKind::AtCutoff, &Scope::Global));
    }

    #[test]
    fn first_difference_values() {
        let fd = first_difference(&two_unit_panel()).unwrap();
        assert_eq!(fd.len(), 2);
        assert_eq!(fd.points()[0].value, 3.0);
        assert_eq!(fd.points()[0].distance, -0.5);
        assert_eq!(fd.points()[1].value, 1.0);
    }

    #[test]
    fn first_difference_of_constant_panel_is_zero() {
        let flat: Vec<Observation> = two_unit_panel()
            .observations()
            .iter()
            .map(|o| Observation { outcome: 5.0, ..o.clone() })
            .collect();
        let fd = first_difference(&PanelDataset::new(flat, "flat")).unwrap();
        assert!(fd.points().iter().all(|p| p.value == 0.0));
    }

    #[test]
    fn first_difference_rejects_unbalanced() {
        let mut obs = two_unit_panel().observations().to_vec();
        obs.pop();
        match first_difference(&PanelDataset::new(obs, "test")) {
            Err(Error::InvalidPanel(report)) => assert!(!report.is_valid),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn period_slices() {
        let data = two_unit_panel();
        let s0 = period_slice(&data, 0).unwrap();
        let s1 = period_slice(&data, 1).unwrap();
        assert_eq!(s0.len(), 2);
        let diff: Vec<f64> = s1
            .points()
            .iter()
            .zip(s0.points())
            .map(|(a, b)| a.value - b.value)
            .collect();
        let fd = first_difference(&data).unwrap();
        assert_eq!(diff, fd.points().iter().map(|p| p.value).collect::<Vec<_>>());
        assert!(matches!(period_slice(&data, 2), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let obs = vec![
            Observation::new("u1", 0, 0.1 + 0.2, -1.0 / 3.0),
            Observation::new("u1", 1, 1e-300, -1.0 / 3.0),
            Observation::new("u2", 0, -123456789.12345679, 2.0f64.sqrt()),
            Observation::new("u2", 1, f64::MAX, 2.0f64.sqrt()),
        ];
        let data = PanelDataset::new(obs, "mem");
        let mut buf = Vec::new();
        data.write_csv(&mut buf, &ColumnMapping::default()).unwrap();
        let back = load_panel(buf.as_slice(), &ColumnMapping::default()).unwrap();
        assert_eq!(back.observations(), data.observations());
    }

    #[test]
    fn cross_section_rejects_duplicates() {
        assert!(CrossSection::from_pairs(&[1.0, f64::INFINITY], &[0.0, 0.0]).is_err());
        let p = CrossPoint {
            unit_id: "x".into(),
            distance: 0.0,
            value: 0.0,
        };
        assert!(CrossSection::new(vec![p.clone(), p]).is_err());
    }
}
