"""What one agent knows about its own information and its peers."""

from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from src.model.state import ActionVector, EnuVector
from src.model.track import TrackEstimate


@dataclass(frozen=True)
class PeerSnapshot:
    """Last message received from a peer.

    Carries the peer's estimates, their one-step-ahead Fisher
    information, its position at send time, and the action it most
    recently decided.
    """

    peer_id: int
    step: int
    position: EnuVector
    action: ActionVector
    fims: Dict[int, np.ndarray]
    estimates: Dict[int, TrackEstimate] = field(default_factory=dict)


@dataclass(frozen=True)
class PeerPrediction:
    """Action and post-action position one agent expects of a peer."""

    action: ActionVector
    position: EnuVector


@dataclass
class FisherView:
    """Per-agent view of pre-action Fisher information.

    ``communicated[l]`` is the flag C for peer l: whether l's most recent
    transmission to this agent got through.
    """

    agent_id: int
    group: int = 0
    own_fims: Dict[int, np.ndarray] = field(default_factory=dict)
    peers: Dict[int, PeerSnapshot] = field(default_factory=dict)
    communicated: Dict[int, bool] = field(default_factory=dict)

    def receive(self, snapshot: PeerSnapshot, success: bool) -> None:
        """Record one transmission attempt from a peer.

        A successful attempt overwrites the stored snapshot; a failed one
        only clears the communication flag.
        """
        self.communicated[snapshot.peer_id] = success
        if success:
            self.peers[snapshot.peer_id] = snapshot

    def communicated_peers(self) -> List[int]:
        """Peers whose latest transmission succeeded, in id order."""
        return sorted(l for l, ok in self.communicated.items() if ok and l in self.peers)
