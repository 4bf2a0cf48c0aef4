"""
Weather state network for hazefuse

Templates are nodes; directed edges count observed transitions between situations.
Nodes are ranked by recency of use and update, and the normalized outgoing edge counts
form a Markov chain used for forecasting.
"""
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from pydantic import ValidationError as PydanticValidationError

from hazefuse.analysis.features import WeatherFeatureVector, welford_update
from hazefuse.analysis.templates import (
    WeatherTemplate,
    blend_schedules,
    blend_weight_specs,
    dominant,
    sigma_floor_array,
    template_distance,
)
from hazefuse.core.exceptions import EmptyDictionary, UnknownTemplate, ValidationError
from hazefuse.utils.file_io import JsonLoader, write_json

logger = logging.getLogger(__name__)

THETA_DEV = 3.0
THETA_NEW = 6.0
RECENCY_HORIZON_S = 3600.0
NOVEL_PRIOR_COUNT = 5
PROMOTION_COUNT = 10
BLEND_SIZE = 2


@dataclass(frozen=True)
class WeatherAssessment:
    """Outcome of weather detection: one template, or a blend when the situation is new"""
    matched: Tuple[Tuple[str, float], ...]
    distance: float
    novel: bool
    t_s: float

    def __post_init__(self):
        weights = [w for _, w in self.matched]
        if not weights or any(w < 0 for w in weights) or abs(sum(weights) - 1.0) > 1e-9:
            raise ValueError("blend weights must be nonnegative and sum to 1")

    @property
    def primary(self) -> str:
        """Name of the highest-weight template"""
        return dominant(self.matched)

    @property
    def is_blend(self) -> bool:
        return len(self.matched) > 1


class WeatherStateNetwork:
    """Directed weighted graph over weather templates"""

    def __init__(self, templates: Sequence[WeatherTemplate] = (), edges: Optional[Dict[Tuple[str, str], float]] = None):
        self.logger = logging.getLogger(__name__)
        self.nodes: Dict[str, WeatherTemplate] = {}
        self.edges: Dict[Tuple[str, str], float] = {}
        self.current: Optional[str] = None
        for template in templates:
            self.add_template(template)
        for (source, target), count in (edges or {}).items():
            self.add_transition(source, target, count)

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, name: str) -> bool:
        return name in self.nodes

    def template(self, name: str) -> WeatherTemplate:
        if name not in self.nodes:
            raise UnknownTemplate(f"unknown weather template '{name}'")
        return self.nodes[name]

    def add_template(self, template: WeatherTemplate) -> None:
        self.nodes[template.name] = template

    def add_transition(self, source: str, target: str, count: float = 1) -> None:
        """Add to the transition count source -> target"""
        self.template(source)
        self.template(target)
        if count < 0:
            raise ValueError("transition counts must be >= 0")
        self.edges[(source, target)] = self.edges.get((source, target), 0) + count

    def out_counts(self, name: str) -> Dict[str, float]:
        return {target: c for (source, target), c in sorted(self.edges.items()) if source == name and c > 0}


def rank_templates(network: WeatherStateNetwork, now_t: float, recency_s: float = RECENCY_HORIZON_S) -> List[str]:
    """
    Order templates by rank class, highest first

    Classes: 1 most recently used, 2 reinforced/updated within recency_s, 3 event links of
    classes 1-2, 4 the rest. Within a class: descending last_used_t, then name.

    Args:
        network: Weather state network
        now_t: Current time in seconds
        recency_s: Horizon for class 2

    Returns:
        Permutation of all template names
    """
    nodes = network.nodes
    used = [t.last_used_t for t in nodes.values() if t.last_used_t is not None]
    latest_use = max(used) if used else None

    rank_class = {}
    for name, tpl in nodes.items():
        if latest_use is not None and tpl.last_used_t == latest_use:
            rank_class[name] = 1
        elif tpl.last_updated_t is not None and now_t - recency_s <= tpl.last_updated_t <= now_t:
            rank_class[name] = 2
    linked = {link for name in rank_class for link in nodes[name].event_links}
    for name in nodes:
        if name not in rank_class:
            rank_class[name] = 3 if name in linked else 4

    def key(name: str):
        last_used = nodes[name].last_used_t
        return rank_class[name], -(last_used if last_used is not None else -math.inf), name

    return sorted(nodes, key=key)


def detect_weather(
    f: WeatherFeatureVector,
    network: WeatherStateNetwork,
    current: str,
    thresholds: Tuple[float, float] = (THETA_DEV, THETA_NEW),
    now_t: Optional[float] = None,
) -> WeatherAssessment:
    """
    Decide the weather situation for a feature vector

    The current template is kept while f stays within theta_dev of it. Otherwise templates
    are tried in rank order; failing that the closest one within theta_new is taken, and if
    none is that close the situation is new and the two closest templates are blended with
    inverse-distance weights.

    Args:
        f: Current features
        network: Weather state network
        current: Name of the previously logged template
        thresholds: (theta_dev, theta_new)
        now_t: Time used for ranking (default f.t_s)

    Returns:
        WeatherAssessment

    Raises:
        EmptyDictionary: network has no templates
        UnknownTemplate: current is not a node
    """
    if len(network) == 0:
        raise EmptyDictionary("weather dictionary is empty")
    theta_dev, theta_new = thresholds
    now_t = f.t_s if now_t is None else now_t

    current_distance = template_distance(f, network.template(current))
    if current_distance <= theta_dev:
        return WeatherAssessment(((current, 1.0),), current_distance, False, f.t_s)

    distances = {name: template_distance(f, tpl) for name, tpl in network.nodes.items()}
    for name in rank_templates(network, now_t):
        if distances[name] <= theta_dev:
            return WeatherAssessment(((name, 1.0),), distances[name], False, f.t_s)

    closest = sorted(distances, key=lambda name: (distances[name], name))
    best = closest[0]
    if distances[best] <= theta_new:
        return WeatherAssessment(((best, 1.0),), distances[best], False, f.t_s)

    parents = closest[:BLEND_SIZE]
    inverse = [1.0 / distances[name] for name in parents]
    total = sum(inverse)
    blend = tuple((name, w / total) for name, w in zip(parents, inverse))
    return WeatherAssessment(blend, distances[best], True, f.t_s)


def forecast(network: WeatherStateNetwork, current: str) -> Dict[str, float]:
    """
    One-step Markov forecast from normalized outgoing transition counts

    Returns:
        Distribution over next templates; {current: 1.0} when there are no outgoing edges
    """
    network.template(current)
    counts = network.out_counts(current)
    total = sum(counts.values())
    if total <= 0:
        return {current: 1.0}
    return {target: c / total for target, c in counts.items()}


def transition_matrix(network: WeatherStateNetwork) -> Tuple[List[str], np.ndarray]:
    """Row-stochastic matrix over sorted names; nodes without outgoing edges are absorbing"""
    names = sorted(network.nodes)
    index = {name: i for i, name in enumerate(names)}
    matrix = np.zeros((len(names), len(names)))
    for name in names:
        for target, p in forecast(network, name).items():
            matrix[index[name], index[target]] = p
    return names, matrix


def forecast_steps(network: WeatherStateNetwork, current: str, steps: int) -> Dict[str, float]:
    """Distribution over templates `steps` transitions ahead"""
    network.template(current)
    if steps < 1:
        return {current: 1.0}
    names, matrix = transition_matrix(network)
    row = np.linalg.matrix_power(matrix, steps)[names.index(current)]
    return {name: float(p) for name, p in zip(names, row) if p > 0}


def _novel_name(network: WeatherStateNetwork, now_t: float) -> str:
    name = f"novel-{now_t:g}"
    suffix = 1
    while name in network:
        suffix += 1
        name = f"novel-{now_t:g}-{suffix}"
    return name


def learn(
    network: WeatherStateNetwork,
    assessment: WeatherAssessment,
    f: WeatherFeatureVector,
    now_t: float,
) -> WeatherStateNetwork:
    """
    Reinforce a matched template or register a new one

    Args:
        network: Network to update in place
        assessment: Output of detect_weather
        f: Features the assessment was made from
        now_t: Current time

    Returns:
        The updated network
    """
    previous = network.current

    if not assessment.novel:
        name = assessment.primary
        tpl = network.template(name)
        mu, sigma, count = welford_update(tpl.mu_array(), tpl.sigma_array(), tpl.count, f.as_array(), sigma_floor_array())
        tpl.set_statistics(mu, sigma)
        tpl.count = count
        tpl.last_used_t = now_t
        tpl.last_updated_t = now_t
        if tpl.provisional and tpl.count >= PROMOTION_COUNT:
            tpl.provisional = False
            network.logger.info(f"Weather template '{name}' promoted after {tpl.count} observations")
    else:
        parts = [(network.template(n), w) for n, w in assessment.matched]
        sigma = sum(w * tpl.sigma_array() for tpl, w in parts)
        name = _novel_name(network, now_t)
        tpl = WeatherTemplate(
            name=name,
            mu=f.as_dict(),
            sigma={c: float(s) for c, s in zip(f.as_dict(), np.maximum(sigma, sigma_floor_array()))},
            count=NOVEL_PRIOR_COUNT,
            last_used_t=now_t,
            last_updated_t=now_t,
            schedule=blend_schedules(parts),
            weights=blend_weight_specs(parts),
            settings=network.template(assessment.primary).settings.model_copy(deep=True),
            event_links=[n for n, _ in assessment.matched],
            provisional=True,
        )
        network.add_template(tpl)
        network.logger.info(
            f"Registered new weather template '{name}' blended from "
            + ", ".join(f"{n} ({w:.2f})" for n, w in assessment.matched)
        )

    if previous is not None and previous in network:
        network.add_transition(previous, name)
    network.current = name
    return network


class _EdgeFile(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)
    source: str = Field(alias="from")
    target: str = Field(alias="to")
    count: float = Field(ge=0)


class _DictionaryFile(BaseModel):
    model_config = ConfigDict(extra="forbid")
    nodes: Dict[str, WeatherTemplate]
    edges: List[_EdgeFile] = Field(default_factory=list)


def load_dictionary(path: Path) -> WeatherStateNetwork:
    """
    Load a weather dictionary file

    Raises:
        ParseError: malformed JSON
        ValidationError: schema or graph invariant violated
    """
    document = JsonLoader().load(Path(path))
    try:
        parsed = _DictionaryFile.model_validate(document)
    except PydanticValidationError as e:
        diagnostics = [f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()]
        raise ValidationError(diagnostics[0], diagnostics) from e

    for key, tpl in parsed.nodes.items():
        if key != tpl.name:
            raise ValidationError(f"nodes.{key}: name '{tpl.name}' does not match its key")
    try:
        network = WeatherStateNetwork(
            list(parsed.nodes.values()),
            {(edge.source, edge.target): edge.count for edge in parsed.edges},
        )
    except UnknownTemplate as e:
        raise ValidationError(f"edges: {e}") from e
    logger.info(f"Loaded weather dictionary {Path(path).name}: {len(network)} templates, {len(network.edges)} edges")
    return network


def dictionary_document(network: WeatherStateNetwork) -> dict:
    return {
        "nodes": {name: tpl.model_dump() for name, tpl in sorted(network.nodes.items())},
        "edges": [{"from": s, "to": t, "count": c} for (s, t), c in sorted(network.edges.items())],
    }


def save_dictionary(network: WeatherStateNetwork, path: Path) -> None:
    write_json(Path(path), dictionary_document(network))
    logger.info(f"Saved weather dictionary with {len(network)} templates to {Path(path).name}")
