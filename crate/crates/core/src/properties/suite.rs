use serde::Serialize;
use thiserror::Error;

use super::accounting::{accounting_of, check_conservation};
use super::pic::{enumerate_deviations, pic_report, PicError};
use super::timing::{check_time_efficiency, TimeEfficiencyOptions};
use super::{Property, PropertyReport, Verdict, DEFAULT_ENUMERATION_CAP};
use crate::mechanisms::{ChildOrdering, MechanismConfig, MechanismError};
use crate::network::Network;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteOptions {
    pub strict: bool,
    pub enumeration_cap: usize,
    pub time: TimeEfficiencyOptions,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            strict: false,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            time: TimeEfficiencyOptions::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("{network}: {source}")]
    Mechanism {
        network: String,
        #[source]
        source: MechanismError,
    },
    #[error("{network}: {source}")]
    Pic {
        network: String,
        #[source]
        source: PicError,
    },
}

/// Whether `mechanism` is supposed to satisfy `property`. The starter only
/// promises weak budget balance and weak PIC; baselines are held to the
/// model's requirements so that their refutations show up as failures.
fn claims(mechanism: &MechanismConfig, property: Property) -> bool {
    match mechanism {
        MechanismConfig::Scheme(_) => true,
        MechanismConfig::Starter(_) => !matches!(property, Property::BudgetBalance | Property::StrongPropagationIc),
        MechanismConfig::Fixed(_) | MechanismConfig::Uniform(_) => !matches!(
            property,
            Property::StrongPropagationIc | Property::TimeEfficiency | Property::Conservation
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteEntry {
    pub network: String,
    pub mechanism: MechanismConfig,
    pub reports: Vec<PropertyReport>,
}

impl SuiteEntry {
    pub fn report(&self, property: Property) -> Option<&PropertyReport> {
        self.reports.iter().find(|r| r.property == property)
    }
}

/// One JSON-lines record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteRow<'a> {
    pub network: &'a str,
    pub mechanism: &'static str,
    pub property: Property,
    pub expected: bool,
    pub verdict: Verdict,
    pub instances_checked: usize,
    pub tolerance: f64,
    pub violations: &'a [super::Violation],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SuiteReport {
    pub entries: Vec<SuiteEntry>,
}

impl SuiteReport {
    pub fn rows(&self) -> impl Iterator<Item = SuiteRow<'_>> {
        self.entries.iter().flat_map(|entry| {
            entry.reports.iter().map(move |r| SuiteRow {
                network: &entry.network,
                mechanism: entry.mechanism.name(),
                property: r.property,
                expected: claims(&entry.mechanism, r.property),
                verdict: r.verdict,
                instances_checked: r.instances_checked,
                tolerance: r.tolerance,
                violations: &r.violations,
            })
        })
    }

    pub fn to_json_lines(&self) -> String {
        self.rows()
            .map(|row| serde_json::to_string(&row).expect("row serialization is infallible") + "\n")
            .collect()
    }

    /// True when every claimed property holds. Baseline rows are ignored as
    /// long as at least one non-baseline mechanism is in the suite.
    pub fn passed(&self) -> bool {
        let has_primary = self.entries.iter().any(|e| !e.mechanism.is_baseline());
        self.entries
            .iter()
            .filter(|e| !has_primary || !e.mechanism.is_baseline())
            .flat_map(|e| e.reports.iter().map(move |r| (e, r)))
            .all(|(e, r)| !claims(&e.mechanism, r.property) || r.holds())
    }
}

/// Runs every applicable checker over every `(network, mechanism)` pair.
///
/// Rows come out in input order; the report is a pure function of the
/// inputs and `opts.time.seed`.
pub fn run_property_suite(
    nets: &[(String, Network)],
    mechanisms: &[MechanismConfig],
    opts: SuiteOptions,
) -> Result<SuiteReport, SuiteError> {
    let mut entries = Vec::with_capacity(nets.len() * mechanisms.len());
    for (name, net) in nets {
        for mechanism in mechanisms {
            let mech_err = |source| SuiteError::Mechanism {
                network: name.clone(),
                source,
            };
            let rv = mechanism.run(net).map_err(mech_err)?;
            let mut reports = accounting_of(&rv).into_reports();

            let devs =
                enumerate_deviations(net, mechanism, opts.enumeration_cap).map_err(|source| SuiteError::Pic {
                    network: name.clone(),
                    source,
                })?;
            reports.push(pic_report(&devs, mechanism.budget(), false));
            if opts.strict {
                reports.push(pic_report(&devs, mechanism.budget(), true));
            }

            if let MechanismConfig::Scheme(cfg) = mechanism {
                if cfg.ordering() == ChildOrdering::Arrival {
                    reports.push(check_time_efficiency(net, cfg, opts.time).map_err(mech_err)?);
                }
                reports.push(check_conservation(&rv));
            }
            entries.push(SuiteEntry {
                network: name.clone(),
                mechanism: *mechanism,
                reports,
            });
        }
    }
    Ok(SuiteReport { entries })
}
