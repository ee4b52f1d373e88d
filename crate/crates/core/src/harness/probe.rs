use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::CsvTable;
use crate::error::{Error, Result};
use crate::mechanisms::{forward_greedy_charge_of, AuctionOutcome, Mechanism};
use crate::netmodel::{NetworkInstance, RequestKey, SellerId};

/// One probed agent: a buyer's request or a seller's ask toward a request.
///
/// Text form: `buyer:<buyer_id>:<index>` or
/// `seller:<seller_id>:<buyer_id>:<index>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum AgentSelector {
    Buyer(RequestKey),
    Seller {
        seller_id: SellerId,
        request: RequestKey,
    },
}

impl AgentSelector {
    pub fn role(&self) -> AgentRole {
        match self {
            AgentSelector::Buyer(_) => AgentRole::BuyerRequest,
            AgentSelector::Seller { .. } => AgentRole::SellerAskEntry,
        }
    }
}

impl fmt::Display for AgentSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentSelector::Buyer(k) => write!(f, "buyer:{}:{}", k.buyer_id, k.index),
            AgentSelector::Seller { seller_id, request } => {
                write!(f, "seller:{seller_id}:{}:{}", request.buyer_id, request.index)
            }
        }
    }
}

impl FromStr for AgentSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::UnknownAgent(format!("`{s}` (expected buyer:<i>:<k> or seller:<j>:<i>:<k>)"));
        let parts: Vec<&str> = s.split(':').collect();
        let num = |p: &str| p.parse::<u32>().map_err(|_| bad());
        match parts.as_slice() {
            ["buyer", i, k] => Ok(AgentSelector::Buyer(RequestKey::new(num(i)?, num(k)?))),
            ["seller", j, i, k] => Ok(AgentSelector::Seller {
                seller_id: num(j)?,
                request: RequestKey::new(num(i)?, num(k)?),
            }),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for AgentSelector {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<AgentSelector> for String {
    fn from(a: AgentSelector) -> String {
        a.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgentRole {
    BuyerRequest,
    SellerAskEntry,
}

/// Misreports to try, as multiples of the agent's truthful value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeGrid {
    pub multipliers: Vec<f64>,
}

impl Default for ProbeGrid {
    /// 21 points over `[0, 2 x truthful]`; the middle point is truthful.
    fn default() -> Self {
        Self::uniform(21)
    }
}

impl ProbeGrid {
    /// `points` (odd) multipliers `2 i / (points - 1)`.
    pub fn uniform(points: usize) -> Self {
        let n = points.max(2) - 1;
        Self {
            multipliers: (0..=n).map(|i| 2.0 * i as f64 / n as f64).collect(),
        }
    }

    pub fn truthful_only() -> Self {
        Self {
            multipliers: vec![1.0],
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.multipliers.contains(&1.0) {
            return Err(Error::Validation(
                "probe grid must include the truthful report".into(),
            ));
        }
        if self.multipliers.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::Validation(
                "probe multipliers must be finite and nonnegative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbePoint {
    pub report: f64,
    pub utility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub agent: AgentSelector,
    pub role: AgentRole,
    pub mechanism: Mechanism,
    pub truthful_report: f64,
    pub truthful_utility: f64,
    pub best_report: f64,
    pub best_utility: f64,
    /// `best_utility - truthful_utility`.
    pub max_gain: f64,
    pub points: Vec<ProbePoint>,
}

impl CsvTable for DeviationReport {
    fn header(&self) -> Vec<&'static str> {
        vec!["report", "utility"]
    }

    fn records(&self) -> Vec<Vec<String>> {
        self.points
            .iter()
            .map(|p| vec![p.report.to_string(), p.utility.to_string()])
            .collect()
    }
}

/// Utility of `agent` when it reports `report` and everyone else keeps
/// their reports. Quasi-linear per entry: value minus charge for a buyer's
/// request, payment minus cost for a seller's ask entry, zero otherwise.
fn utility_at(
    instance: &NetworkInstance,
    agent: AgentSelector,
    report: f64,
    mechanism: Mechanism,
) -> Result<f64> {
    let mut inst = instance.clone();
    match agent {
        AgentSelector::Buyer(key) => {
            let req = inst.request_mut(key).expect("agent checked before probing");
            req.bid = report;
            let value = req.true_value;
            let charge = match mechanism {
                Mechanism::Greedy => forward_greedy_charge_of(&inst, key, 0.0),
                _ => mechanism.run(&inst)?.trade_for(key).map(|t| t.buyer_charge),
            };
            Ok(charge.map_or(0.0, |c| value - c))
        }
        AgentSelector::Seller { seller_id, request } => {
            let seller = &mut inst.sellers[seller_id as usize];
            seller.asks.insert(request, report);
            let cost = seller.true_costs.get(&request).copied().unwrap_or(report);
            let outcome: AuctionOutcome = mechanism.run(&inst)?;
            Ok(outcome
                .trade_for(request)
                .filter(|t| t.candidate.seller_id == seller_id)
                .map_or(0.0, |t| t.seller_payment - cost))
        }
    }
}

/// Evaluates `agent`'s utility at every misreport on `grid` and reports the
/// largest gain over truthful reporting.
pub fn deviation_probe(
    instance: &NetworkInstance,
    agent: AgentSelector,
    grid: &ProbeGrid,
    mechanism: Mechanism,
) -> Result<DeviationReport> {
    grid.validate()?;
    let truthful = match agent {
        AgentSelector::Buyer(key) => {
            instance
                .request(key)
                .ok_or_else(|| Error::UnknownAgent(agent.to_string()))?
                .true_value
        }
        AgentSelector::Seller { seller_id, request } => {
            if !mechanism.has_sellers() {
                return Err(Error::Validation(format!(
                    "{mechanism} has no seller reports to probe ({agent})"
                )));
            }
            instance
                .seller(seller_id)
                .and_then(|s| s.true_costs.get(&request))
                .copied()
                .ok_or_else(|| Error::UnknownAgent(agent.to_string()))?
        }
    };

    let mut reports: Vec<f64> = grid.multipliers.iter().map(|m| m * truthful).collect();
    reports.sort_by(f64::total_cmp);
    reports.dedup();
    let points = reports
        .par_iter()
        .map(|&report| {
            Ok(ProbePoint {
                report,
                utility: utility_at(instance, agent, report, mechanism)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let truthful_utility = points
        .iter()
        .find(|p| p.report == truthful)
        .expect("grid contains the truthful report")
        .utility;
    let best = points
        .iter()
        .fold(None::<&ProbePoint>, |acc, p| match acc {
            Some(b) if b.utility >= p.utility => Some(b),
            _ => Some(p),
        })
        .expect("grid is nonempty");
    Ok(DeviationReport {
        agent,
        role: agent.role(),
        mechanism,
        truthful_report: truthful,
        truthful_utility,
        best_report: best.report,
        best_utility: best.utility,
        max_gain: best.utility - truthful_utility,
        points,
    })
}

/// Agents worth probing in `outcome`: every winning request (and, when the
/// mechanism has sellers, every winning ask entry), plus up to `losers`
/// losing requests drawn with `seed`.
pub fn select_probe_agents(outcome: &AuctionOutcome, losers: usize, seed: u64) -> Vec<AgentSelector> {
    let mut agents = Vec::new();
    for t in &outcome.trades {
        agents.push(AgentSelector::Buyer(t.candidate.request));
        if outcome.mechanism.has_sellers() {
            agents.push(AgentSelector::Seller {
                seller_id: t.candidate.seller_id,
                request: t.candidate.request,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    agents.extend(
        outcome
            .losers
            .choose_multiple(&mut rng, losers)
            .map(|k| AgentSelector::Buyer(*k)),
    );
    agents
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::double_auction;
    use crate::netmodel::{generate_instance, ScenarioConfig};

    #[test]
    fn agent_spec_round_trip() {
        for s in ["buyer:3:2", "seller:1:0:1"] {
            assert_eq!(s.parse::<AgentSelector>().unwrap().to_string(), s);
        }
        for s in ["buyer:3", "seller:x:0:1", "relay:1:1", ""] {
            assert!(matches!(s.parse::<AgentSelector>(), Err(Error::UnknownAgent(_))));
        }
    }

    #[test]
    fn default_grid_has_truthful_middle() {
        let g = ProbeGrid::default();
        assert_eq!(g.multipliers.len(), 21);
        assert_eq!(g.multipliers[10], 1.0);
        assert_eq!(g.multipliers[20], 2.0);
    }

    #[test]
    fn truthful_only_has_no_gain() {
        let inst = generate_instance(&ScenarioConfig::reference()).unwrap();
        let r = deviation_probe(
            &inst,
            AgentSelector::Buyer(RequestKey::new(0, 1)),
            &ProbeGrid::truthful_only(),
            Mechanism::Double,
        )
        .unwrap();
        assert_eq!(r.points.len(), 1);
        assert_eq!(r.max_gain, 0.0);
    }

    #[test]
    fn unknown_agents_are_errors() {
        let inst = generate_instance(&ScenarioConfig::reference()).unwrap();
        let g = ProbeGrid::default();
        let missing = AgentSelector::Buyer(RequestKey::new(99, 1));
        assert!(matches!(
            deviation_probe(&inst, missing, &g, Mechanism::Double),
            Err(Error::UnknownAgent(_))
        ));
        let seller = AgentSelector::Seller {
            seller_id: 0,
            request: RequestKey::new(0, 1),
        };
        assert!(deviation_probe(&inst, seller, &g, Mechanism::Greedy).is_err());
        let ghost = AgentSelector::Seller {
            seller_id: 7,
            request: RequestKey::new(0, 1),
        };
        assert!(deviation_probe(&inst, ghost, &g, Mechanism::Double).is_err());
    }

    #[test]
    fn winners_and_sampled_losers_are_selected() {
        let inst = generate_instance(&ScenarioConfig::reference()).unwrap();
        let out = double_auction(&inst).unwrap();
        let agents = select_probe_agents(&out, 5, 7);
        assert_eq!(agents.len(), 2 * out.trades.len() + out.losers.len().min(5));
        assert_eq!(agents, select_probe_agents(&out, 5, 7));
    }
}
