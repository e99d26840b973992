"""Base class for BPR traffic networks."""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Hashable, List, Optional, Sequence, Union
from urllib.parse import urlparse

import networkx as nx
import numpy as np
import requests

from .errors import (
    ContractViolationError,
    InfeasibleNetworkError,
    NetworkFormatError,
)

logger = logging.getLogger(__name__)

# BPR coefficients: t = t0 * (1 + ALPHA * (V / c) ** BETA)
BPR_ALPHA = 0.15
BPR_BETA = 4


def bpr_time(t0: Any, cap: Any, flow: Any) -> Any:
    """
    BPR link travel time ``t0 * (1 + 0.15 (flow / cap)^4)``.

    Works on scalars and on numpy arrays of equal shape.

    Raises:
        ContractViolationError: If t0 or cap is not positive, or flow is
            negative.
    """
    t0_arr, cap_arr, flow_arr = (
        np.asarray(t0, dtype=float),
        np.asarray(cap, dtype=float),
        np.asarray(flow, dtype=float),
    )
    if np.any(t0_arr <= 0):
        raise ContractViolationError(f"t0 must be positive, got {t0}")
    if np.any(cap_arr <= 0):
        raise ContractViolationError(f"cap must be positive, got {cap}")
    if np.any(flow_arr < 0):
        raise ContractViolationError(
            f"flow must be nonnegative, got {flow}"
        )
    result = t0_arr * (1.0 + BPR_ALPHA * (flow_arr / cap_arr) ** BPR_BETA)
    return float(result) if result.ndim == 0 else result


@dataclass(frozen=True)
class Link:
    tail: Hashable
    head: Hashable
    t0: float
    cap: float


@dataclass(frozen=True)
class OdPair:
    origin: Hashable
    destination: Hashable
    demand: float


@dataclass(frozen=True)
class ControlledLink:
    """Tolled link with corridor ``[lo + x, hi + x]`` for its flow."""

    link: int
    lo: float
    hi: float


def _is_url(source: str) -> bool:
    return urlparse(source).scheme in ("http", "https")


class TrafficNetworkBase:
    """
    Directed road network with BPR latencies and fixed OD demands.

    Links are indexed by position; the index is the edge key of the
    underlying ``networkx.MultiDiGraph``, so parallel links are allowed.
    """

    def __init__(
        self,
        nodes: Sequence[Hashable],
        links: Sequence[Link],
        od_pairs: Sequence[OdPair],
        controlled: Sequence[ControlledLink] = (),
        name: str = "network",
        description: Optional[str] = None,
    ) -> None:
        """
        Initialize and validate the network.

        Args:
            nodes: Node identifiers.
            links: Links; their order fixes the link indices.
            od_pairs: Origin-destination demands.
            controlled: Tolled links, in toll-vector order.
            name: Label used in logs and summaries.
            description: Free text carried through ``to_dict``.

        Raises:
            ContractViolationError: If any field is out of range or refers
                to an unknown node or link.
        """
        self.nodes = list(nodes)
        self.links = list(links)
        self.od_pairs = list(od_pairs)
        self.controlled = list(controlled)
        self.name = name
        self.description = description
        self._validate()

        self.graph = nx.MultiDiGraph()
        self.graph.add_nodes_from(self.nodes)
        for index, link in enumerate(self.links):
            self.graph.add_edge(link.tail, link.head, key=index)

        self.t0 = np.array([link.t0 for link in self.links], dtype=float)
        self.cap = np.array([link.cap for link in self.links], dtype=float)
        self.demands = np.array(
            [od.demand for od in self.od_pairs], dtype=float
        )
        self.controlled_indices = np.array(
            [c.link for c in self.controlled], dtype=int
        )
        self.corridor_lo = np.array(
            [c.lo for c in self.controlled], dtype=float
        )
        self.corridor_hi = np.array(
            [c.hi for c in self.controlled], dtype=float
        )

    def _validate(self) -> None:
        if not self.nodes:
            raise ContractViolationError("Network has no nodes")
        known = set(self.nodes)
        if len(known) != len(self.nodes):
            raise ContractViolationError("Node identifiers must be unique")
        if not self.links:
            raise ContractViolationError("Network has no links")
        for i, link in enumerate(self.links):
            for end in (link.tail, link.head):
                if end not in known:
                    raise ContractViolationError(
                        f"Link {i} refers to unknown node {end!r}"
                    )
            if not link.t0 > 0:
                raise ContractViolationError(
                    f"Link {i} has non-positive t0 {link.t0}"
                )
            if not link.cap > 0:
                raise ContractViolationError(
                    f"Link {i} has non-positive capacity {link.cap}"
                )
        for i, od in enumerate(self.od_pairs):
            for end in (od.origin, od.destination):
                if end not in known:
                    raise ContractViolationError(
                        f"OD pair {i} refers to unknown node {end!r}"
                    )
            if od.origin == od.destination:
                raise ContractViolationError(
                    f"OD pair {i} has identical origin and destination"
                )
            if not od.demand >= 0:
                raise ContractViolationError(
                    f"OD pair {i} has negative demand {od.demand}"
                )
        seen = set()
        for c in self.controlled:
            if not 0 <= c.link < len(self.links):
                raise ContractViolationError(
                    f"Controlled link index {c.link} is out of range"
                )
            if c.link in seen:
                raise ContractViolationError(
                    f"Controlled link {c.link} is listed twice"
                )
            seen.add(c.link)
            if c.lo > c.hi:
                raise ContractViolationError(
                    f"Controlled link {c.link} has lo {c.lo} > hi {c.hi}"
                )

    @property
    def num_links(self) -> int:
        return len(self.links)

    @property
    def num_controlled(self) -> int:
        return len(self.controlled)

    def check_reachability(self) -> None:
        """
        Raise InfeasibleNetworkError unless every OD pair is routable.
        """
        for i, od in enumerate(self.od_pairs):
            if not nx.has_path(self.graph, od.origin, od.destination):
                raise InfeasibleNetworkError(
                    f"OD pair {i} ({od.origin!r} -> {od.destination!r}) "
                    "has no path"
                )

    def link_times(self, flows: Any) -> np.ndarray:
        """BPR travel time of every link at ``flows``."""
        return bpr_time(self.t0, self.cap, flows)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TrafficNetworkBase":
        """
        Build a network from its document form.

        Expected keys: ``nodes``, ``links`` ({tail, head, t0, cap}),
        ``od`` ({o, d, demand}) and optionally ``controlled``
        ({link, lo, hi}), ``name`` and ``description``.

        Raises:
            NetworkFormatError: If a key is missing or a value has the
                wrong type.
        """
        try:
            links = [
                Link(
                    item["tail"],
                    item["head"],
                    float(item["t0"]),
                    float(item["cap"]),
                )
                for item in data["links"]
            ]
            od_pairs = [
                OdPair(item["o"], item["d"], float(item["demand"]))
                for item in data["od"]
            ]
            controlled = [
                ControlledLink(
                    int(item["link"]), float(item["lo"]), float(item["hi"])
                )
                for item in data.get("controlled", [])
            ]
            nodes = list(data["nodes"])
        except (KeyError, TypeError, ValueError) as e:
            raise NetworkFormatError(
                f"Malformed network document: missing or invalid field {e}"
            ) from e
        return cls(
            nodes,
            links,
            od_pairs,
            controlled,
            name=str(data.get("name", "network")),
            description=data.get("description"),
        )

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "TrafficNetworkBase":
        """
        Load a network from a JSON file.

        Raises:
            NetworkFormatError: If the file cannot be read or parsed.
        """
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as e:
            raise NetworkFormatError(
                f"Cannot read network file {path}: {e}"
            ) from e
        except json.JSONDecodeError as e:
            raise NetworkFormatError(
                f"Network file {path} is not valid JSON: line {e.lineno}, "
                f"column {e.colno}: {e.msg}"
            ) from e
        return cls.from_dict(data)

    @classmethod
    def from_url(
        cls,
        url: str,
        timeout: float = 30.0,
        session: Optional[requests.Session] = None,
    ) -> "TrafficNetworkBase":
        """
        Fetch a network document over HTTP(S).

        Args:
            url: Address of the JSON document.
            timeout: Request timeout in seconds.
            session: Session to reuse; a plain ``requests.get`` otherwise.

        Raises:
            NetworkFormatError: If the request fails or the body is not a
                valid network document.
        """
        getter = session.get if session is not None else requests.get
        try:
            response = getter(url, timeout=timeout)
            response.raise_for_status()
        except requests.exceptions.HTTPError as e:
            raise NetworkFormatError(
                f"Fetching network from {url} failed with status "
                f"{response.status_code}: {e}"
            ) from e
        except requests.exceptions.RequestException as e:
            raise NetworkFormatError(
                f"Failed to fetch network from {url}: {e}"
            ) from e
        try:
            data = response.json()
        except ValueError as e:
            raise NetworkFormatError(
                f"Network at {url} is not valid JSON: {e}"
            ) from e
        logger.info("Loaded network from %s", url)
        return cls.from_dict(data)

    @classmethod
    def load(cls, source: Union[str, Path]) -> "TrafficNetworkBase":
        """Load from an http(s) URL or a file path."""
        if isinstance(source, str) and _is_url(source):
            return cls.from_url(source)
        return cls.from_file(source)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"name": self.name}
        if self.description is not None:
            data["description"] = self.description
        data["nodes"] = list(self.nodes)
        data["links"] = [
            {
                "tail": link.tail,
                "head": link.head,
                "t0": link.t0,
                "cap": link.cap,
            }
            for link in self.links
        ]
        data["od"] = [
            {"o": od.origin, "d": od.destination, "demand": od.demand}
            for od in self.od_pairs
        ]
        data["controlled"] = [
            {"link": c.link, "lo": c.lo, "hi": c.hi} for c in self.controlled
        ]
        return data

    def __repr__(self) -> str:
        return (
            f"{type(self).__name__}(name={self.name!r}, "
            f"nodes={len(self.nodes)}, links={self.num_links}, "
            f"od_pairs={len(self.od_pairs)}, "
            f"controlled={self.num_controlled})"
        )
