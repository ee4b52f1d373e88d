//! Simulator and mechanism library for end-to-end service auctions in
//! edge-computing wireless mesh networks.
//!
//! Buyers bid for services with end-to-end QoS requirements (compute,
//! storage, rate); sellers ask prices for hosting them. The service provider
//! first solves a price-blind assignment/spectrum/routing problem
//! ([`netopt`]), then clears an auction over the resulting candidate matches
//! ([`mechanisms`]). [`harness`] runs the experiments and deviation probes.

pub mod error;
pub mod harness;
pub mod mechanisms;
pub mod netmodel;
pub mod netopt;

pub use error::{Error, Result};
pub use netmodel::{
    generate_instance, Band, InstanceBuilder, Interval, Link, LinkKey, NetworkInstance, Node, NodeId,
    NodeRole, QosSpec, RequestKey, ScenarioConfig, Seller, SellerId, ServiceRequest, SplitVector,
};
pub use netopt::{
    check_feasibility, plan_throughput, solve_p1_exact, solve_p1_greedy, AllocationPlan, FeasibilityReport,
    SizeLimits,
};
