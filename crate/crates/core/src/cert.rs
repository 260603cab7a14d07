//! Ideal threshold certificates.
//!
//! A certificate is the set of nodes whose contributions it aggregates. There
//! is no signature math: unforgeability is checked against the record of
//! contributions that honest nodes actually sent.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::types::{MessageKind, NodeId, View};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CertKind {
    /// Time certificate: f+1 wishes for a view.
    Tc,
    /// Quorum certificate: 2f+1 votes for a view.
    Qc,
}

impl CertKind {
    pub fn threshold(self, f: usize) -> usize {
        match self {
            CertKind::Tc => f + 1,
            CertKind::Qc => 2 * f + 1,
        }
    }

    /// The message kind whose senders a certificate of this kind aggregates.
    pub fn contribution(self) -> MessageKind {
        match self {
            CertKind::Tc => MessageKind::Wish,
            CertKind::Qc => MessageKind::Vote,
        }
    }
}

impl fmt::Display for CertKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CertKind::Tc => "TC",
            CertKind::Qc => "QC",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertKind,
    pub view: View,
    pub signers: BTreeSet<NodeId>,
}

impl Certificate {
    pub fn meets_threshold(&self, f: usize) -> bool {
        self.signers.len() >= self.kind.threshold(f)
    }
}

/// Returned by [`form_certificate`] while a leader is still accumulating.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Insufficient {
    pub have: usize,
    pub need: usize,
}

/// Aggregates contributions for `view` into a certificate once enough
/// distinct senders are present. Contributions for other views are ignored.
pub fn form_certificate<I>(kind: CertKind, view: View, contributions: I, f: usize) -> Result<Certificate, Insufficient>
where
    I: IntoIterator<Item = (NodeId, View)>,
{
    let signers: BTreeSet<NodeId> = contributions
        .into_iter()
        .filter(|&(_, v)| v == view)
        .map(|(node, _)| node)
        .collect();
    let need = kind.threshold(f);
    if signers.len() >= need {
        Ok(Certificate { kind, view, signers })
    } else {
        Err(Insufficient { have: signers.len(), need })
    }
}

/// What certificate verification may consult about the run so far.
pub trait ContributionContext {
    fn is_corrupt(&self, node: NodeId) -> bool;
    /// Whether `node` has sent a contribution of `kind` for `view`.
    fn contributed(&self, node: NodeId, kind: CertKind, view: View) -> bool;
}

/// Threshold check plus unforgeability: every honest signer must have sent a
/// matching contribution. Corrupt signers may sign anything.
pub fn verify_certificate(cert: &Certificate, f: usize, ctx: &impl ContributionContext) -> bool {
    cert.meets_threshold(f)
        && cert
            .signers
            .iter()
            .all(|&s| ctx.is_corrupt(s) || ctx.contributed(s, cert.kind, cert.view))
}

/// Contributions observed so far in a run.
#[derive(Clone, Debug, Default)]
pub struct ContributionLedger {
    corrupt: BTreeSet<NodeId>,
    sent: BTreeSet<(NodeId, CertKind, View)>,
}

impl ContributionLedger {
    pub fn new(corrupt: impl IntoIterator<Item = NodeId>) -> Self {
        ContributionLedger { corrupt: corrupt.into_iter().collect(), sent: BTreeSet::new() }
    }

    /// Records that `node` sent a message of `kind`; kinds that are not
    /// certificate contributions are ignored.
    pub fn record(&mut self, node: NodeId, kind: MessageKind, view: View) {
        let cert_kind = match kind {
            MessageKind::Wish => CertKind::Tc,
            MessageKind::Vote => CertKind::Qc,
            _ => return,
        };
        self.sent.insert((node, cert_kind, view));
    }
}

impl ContributionContext for ContributionLedger {
    fn is_corrupt(&self, node: NodeId) -> bool {
        self.corrupt.contains(&node)
    }

    fn contributed(&self, node: NodeId, kind: CertKind, view: View) -> bool {
        self.sent.contains(&(node, kind, view))
    }
}
