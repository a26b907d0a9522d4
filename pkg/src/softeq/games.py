"""Game representations, utility transforms, and payoff evaluation.

Two game kinds are supported: dense normal-form games (one payoff table per
player over the full joint action space) and graphical games (payoffs that
decompose into pairwise terms over a neighbor graph).  Raw payoffs are always
what gets reported; a ``UtilityTransform`` maps them into the strictly
positive utilities that drive the soft-response dynamics.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import logsumexp

PROB_ATOL = 1e-12
VALUE_FLOOR = 1e-300


def _frozen_array(values, dtype=float) -> np.ndarray:
    out = np.ascontiguousarray(np.asarray(values, dtype=dtype))
    out.setflags(write=False)
    return out


# ---------------------------------------------------------------------------
# strategy profiles


@dataclass(frozen=True, eq=False)
class StrategyProfile:
    """One probability distribution over actions per player."""

    distributions: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        dists = tuple(_frozen_array(d) for d in self.distributions)
        for i, dist in enumerate(dists):
            if dist.ndim != 1 or dist.size == 0:
                raise ValueError(f"player {i}: distribution must be a nonempty vector")
            if not np.isfinite(dist).all():
                raise ValueError(f"player {i}: probabilities must be finite")
            if (dist < 0).any():
                raise ValueError(f"player {i}: negative probability {dist.min()!r}")
            total = float(dist.sum())
            if abs(total - 1.0) > PROB_ATOL:
                raise ValueError(f"player {i}: probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "distributions", dists)

    def __len__(self) -> int:
        return len(self.distributions)

    def __getitem__(self, i: int) -> np.ndarray:
        return self.distributions[i]

    @property
    def action_counts(self) -> tuple[int, ...]:
        return tuple(d.size for d in self.distributions)

    @classmethod
    def uniform(cls, action_counts: Sequence[int]) -> "StrategyProfile":
        return cls(tuple(np.full(k, 1.0 / k) for k in action_counts))

    @classmethod
    def point_mass(cls, action_counts: Sequence[int], joint_action: Sequence[int]) -> "StrategyProfile":
        dists = []
        for k, a in zip(action_counts, joint_action, strict=True):
            d = np.zeros(k)
            d[a] = 1.0
            dists.append(d)
        return cls(tuple(dists))

    @classmethod
    def random_interior(cls, action_counts: Sequence[int], rng: np.random.Generator) -> "StrategyProfile":
        """Each coordinate drawn uniform in (0, 1), then normalized."""
        dists = []
        for k in action_counts:
            d = rng.random(k)
            dists.append(d / d.sum())
        return cls(tuple(dists))

    def distance(self, other: "StrategyProfile") -> float:
        """L-infinity distance over all probability entries."""
        return max(
            float(np.abs(a - b).max())
            for a, b in zip(self.distributions, other.distributions, strict=True)
        )

    def is_point_mass(self, atol: float = PROB_ATOL) -> bool:
        return all(abs(float(d.max()) - 1.0) <= atol for d in self.distributions)

    def to_joint_action(self) -> tuple[int, ...]:
        if not self.is_point_mass():
            raise ValueError("profile is not a point mass")
        return tuple(int(np.argmax(d)) for d in self.distributions)


# ---------------------------------------------------------------------------
# games


@dataclass(frozen=True, eq=False)
class NormalFormGame:
    """Dense n-player game; ``payoffs[i]`` has shape ``action_counts``."""

    payoffs: tuple[np.ndarray, ...]

    @property
    def player_count(self) -> int:
        return len(self.payoffs)

    @property
    def action_counts(self) -> tuple[int, ...]:
        return self.payoffs[0].shape

    @property
    def joint_action_count(self) -> int:
        return int(np.prod(self.action_counts))


def build_normal_form(action_counts: Sequence[int], payoff_tables: Sequence) -> NormalFormGame:
    """Validate shapes and finiteness and assemble a NormalFormGame."""
    counts = tuple(int(k) for k in action_counts)
    if not counts or any(k < 1 for k in counts):
        raise ValueError(f"action counts must be positive, got {counts}")
    if len(payoff_tables) != len(counts):
        raise ValueError(
            f"expected {len(counts)} payoff tables, got {len(payoff_tables)}"
        )
    tables = []
    for i, raw in enumerate(payoff_tables):
        table = np.asarray(raw, dtype=float)
        if table.shape != counts:
            if table.ndim == 1 and table.size == int(np.prod(counts)):
                table = table.reshape(counts)  # accept flat row-major input
            else:
                raise ValueError(
                    f"player {i}: payoff table shape {table.shape} != {counts}"
                )
        if not np.isfinite(table).all():
            raise ValueError(f"player {i}: payoff table contains non-finite entries")
        tables.append(_frozen_array(table))
    return NormalFormGame(tuple(tables))


def from_bimatrix(row_payoffs, col_payoffs) -> NormalFormGame:
    """2-player game from two matrices, both indexed [row action][col action]."""
    a = np.asarray(row_payoffs, dtype=float)
    b = np.asarray(col_payoffs, dtype=float)
    if a.ndim != 2 or a.shape != b.shape:
        raise ValueError(f"bimatrix shapes differ: {a.shape} vs {b.shape}")
    return build_normal_form(a.shape, [a, b])


@dataclass(frozen=True, eq=False)
class GraphicalGame:
    """Pairwise-decomposed game on an undirected neighbor graph.

    ``tables[(i, j)]`` holds the payoff player i collects from the joint
    action with neighbor j, shape (actions[i], actions[j]).  Both directed
    tables exist for every edge; they need not be each other's transpose.
    """

    action_counts: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    tables: Mapping[tuple[int, int], np.ndarray]
    neighbors: tuple[tuple[int, ...], ...]

    @property
    def player_count(self) -> int:
        return len(self.action_counts)


def build_graphical(
    action_counts: Sequence[int],
    edges: Iterable[Sequence[int]],
    tables: Mapping,
) -> GraphicalGame:
    counts = tuple(int(k) for k in action_counts)
    n = len(counts)
    if not counts or any(k < 1 for k in counts):
        raise ValueError(f"action counts must be positive, got {counts}")
    edge_set: set[tuple[int, int]] = set()
    for pair in edges:
        i, j = (int(p) for p in pair)
        if i == j:
            raise ValueError(f"self-loop edge on player {i}")
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"edge ({i},{j}) out of range for {n} players")
        edge_set.add((min(i, j), max(i, j)))
    sorted_edges = tuple(sorted(edge_set))
    directed = {}
    for i, j in sorted_edges:
        for a, b in ((i, j), (j, i)):
            if (a, b) not in tables:
                raise ValueError(f"missing table for direction ({a},{b})")
            t = np.asarray(tables[(a, b)], dtype=float)
            if t.shape != (counts[a], counts[b]):
                raise ValueError(
                    f"table ({a},{b}) has shape {t.shape}, expected "
                    f"{(counts[a], counts[b])}"
                )
            if not np.isfinite(t).all():
                raise ValueError(f"table ({a},{b}) contains non-finite entries")
            directed[(a, b)] = _frozen_array(t)
    nbrs: list[list[int]] = [[] for _ in range(n)]
    for i, j in sorted_edges:
        nbrs[i].append(j)
        nbrs[j].append(i)
    return GraphicalGame(
        action_counts=counts,
        edges=sorted_edges,
        tables=directed,
        neighbors=tuple(tuple(sorted(v)) for v in nbrs),
    )


def induce_normal_form(game: GraphicalGame) -> NormalFormGame:
    """Expand a graphical game to its dense normal form (small instances)."""
    counts = game.action_counts
    size = int(np.prod(counts))
    if size > 10**7:
        raise ValueError(f"joint action space {size} too large to expand")
    tables = []
    for i in range(game.player_count):
        table = np.zeros(counts)
        for j in game.neighbors[i]:
            f = game.tables[(i, j)]
            shape = [1] * len(counts)
            shape[i] = counts[i]
            shape[j] = counts[j]
            # reshape needs the table's axes in joint-action order
            block = f if i < j else f.T
            table = table + block.reshape(shape)
        tables.append(table)
    return build_normal_form(counts, tables)


# ---------------------------------------------------------------------------
# utility transforms


@dataclass(frozen=True)
class UtilityTransform:
    """Entrywise positive-making map from raw payoffs to utilities.

    Kinds: ``identity`` (g -> g), ``shift`` (g -> g + offset) and
    ``exponential`` (g -> exp(g / hbar)).
    """

    kind: str
    offset: float = 0.0
    hbar: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("identity", "shift", "exponential"):
            raise ValueError(f"unknown transform kind {self.kind!r}")
        if self.kind == "exponential" and not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar!r}")

    @classmethod
    def identity(cls) -> "UtilityTransform":
        return cls("identity")

    @classmethod
    def shift(cls, offset: float) -> "UtilityTransform":
        return cls("shift", offset=float(offset))

    @classmethod
    def exponential(cls, hbar: float = 1.0) -> "UtilityTransform":
        return cls("exponential", hbar=float(hbar))

    def apply(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        if self.kind == "identity":
            return values.copy()
        if self.kind == "shift":
            return values + self.offset
        # saturation to inf is intended for extreme payoff/hbar ratios;
        # dynamics avoid it by working with exact logarithms instead
        with np.errstate(over="ignore"):
            return np.exp(values / self.hbar)

    def describe(self) -> str:
        if self.kind == "identity":
            return "identity"
        if self.kind == "shift":
            return f"shift:{self.offset:g}"
        return f"exp:{self.hbar:g}"


def parse_transform(text: str) -> UtilityTransform:
    """Parse ``identity``, ``shift:<offset>`` or ``exp:<hbar>``."""
    name, _, arg = text.partition(":")
    if name == "identity" and not arg:
        return UtilityTransform.identity()
    if name == "shift" and arg:
        return UtilityTransform.shift(float(arg))
    if name in ("exp", "exponential"):
        return UtilityTransform.exponential(float(arg) if arg else 1.0)
    raise ValueError(
        f"cannot parse transform {text!r}; use identity, shift:<offset> or exp:<hbar>"
    )


@dataclass(frozen=True, eq=False)
class UtilityView:
    """Read-only pairing of a dense game with transformed utility tables."""

    game: NormalFormGame
    transform: UtilityTransform
    utilities: tuple[np.ndarray, ...]

    @property
    def player_count(self) -> int:
        return self.game.player_count

    @property
    def action_counts(self) -> tuple[int, ...]:
        return self.game.action_counts

    def action_values(self, profile: StrategyProfile, i: int) -> np.ndarray:
        """Expected utility of each of player i's actions (transformed scale)."""
        return _expected_over_opponents(self.utilities[i], profile.distributions, i)

    def log_action_values(self, profile: StrategyProfile, i: int) -> np.ndarray:
        """log of action_values, computed overflow-safely for exponential utilities."""
        if self.transform.kind == "exponential":
            return _log_expected_exponential(
                self.game.payoffs[i], self.transform.hbar, profile.distributions, i
            )
        vals = self.action_values(profile, i)
        return np.log(np.maximum(vals, VALUE_FLOOR))


def transform_utilities(game: NormalFormGame, transform: UtilityTransform) -> UtilityView:
    """Apply a transform, rejecting any non-positive utility for identity/shift."""
    if not isinstance(game, NormalFormGame):
        raise TypeError(
            "transform_utilities expects a dense game; graphical games use the "
            "factorized path in the society module"
        )
    utilities = []
    for i, table in enumerate(game.payoffs):
        u = transform.apply(table)
        if transform.kind != "exponential" and not (u > 0).all():
            flat = int(np.argmin(u))
            joint = np.unravel_index(flat, u.shape)
            raise ValueError(
                f"transform {transform.describe()} gives non-positive utility "
                f"{u[joint]!r} for player {i} at joint action {tuple(int(a) for a in joint)}"
            )
        utilities.append(_frozen_array(u))
    return UtilityView(game=game, transform=transform, utilities=tuple(utilities))


# ---------------------------------------------------------------------------
# expectations


def _expected_over_opponents(table: np.ndarray, dists: Sequence[np.ndarray], i: int) -> np.ndarray:
    """Contract every axis except player i's with the opponents' distributions."""
    out = np.moveaxis(table, i, 0)
    rest = [dists[j] for j in range(len(dists)) if j != i]
    for d in reversed(rest):
        out = out @ d
    return np.asarray(out)


def _log_expected_exponential(
    raw_table: np.ndarray, hbar: float, dists: Sequence[np.ndarray], i: int
) -> np.ndarray:
    """log E[exp(g/hbar)] without materializing exp(g/hbar)."""
    n = len(dists)
    scaled = np.moveaxis(raw_table, i, 0) / hbar
    k_i = scaled.shape[0]
    flat = scaled.reshape(k_i, -1)
    rest = [dists[j] for j in range(n) if j != i]
    weights = np.ones(1)
    for d in rest:
        weights = np.multiply.outer(weights, d).ravel()
    if flat.shape[1] == 1 and not rest:  # single-player game
        return flat[:, 0]
    return logsumexp(flat, axis=1, b=weights[None, :])


def raw_action_values(game, profile: StrategyProfile, i: int) -> np.ndarray:
    """Expected raw payoff of each of player i's actions against the profile."""
    if isinstance(game, NormalFormGame):
        return _expected_over_opponents(game.payoffs[i], profile.distributions, i)
    if isinstance(game, GraphicalGame):
        out = np.zeros(game.action_counts[i])
        for j in game.neighbors[i]:
            out += game.tables[(i, j)] @ profile[j]
        return out
    raise TypeError(f"unsupported game type {type(game).__name__}")


def per_player_expected_payoff(game, profile: StrategyProfile, i: int) -> float:
    """Expected raw payoff of player i under independent mixed strategies."""
    return float(profile[i] @ raw_action_values(game, profile, i))


def overall_payoff(game, profile: StrategyProfile) -> float:
    n = game.player_count
    return float(sum(per_player_expected_payoff(game, profile, i) for i in range(n)))


def unilateral_payoffs(game, joint_action: Sequence[int], i: int) -> np.ndarray:
    """Raw payoff of each of player i's actions with everyone else fixed."""
    joint = tuple(int(a) for a in joint_action)
    if isinstance(game, NormalFormGame):
        index = joint[:i] + (slice(None),) + joint[i + 1 :]
        return np.asarray(game.payoffs[i][index])
    if isinstance(game, GraphicalGame):
        out = np.zeros(game.action_counts[i])
        for j in game.neighbors[i]:
            out += game.tables[(i, j)][:, joint[j]]
        return out
    raise TypeError(f"unsupported game type {type(game).__name__}")


# ---------------------------------------------------------------------------
# JSON interchange


def game_to_json(game) -> dict:
    if isinstance(game, NormalFormGame):
        return {
            "players": game.player_count,
            "actions": list(game.action_counts),
            "payoffs": [t.tolist() for t in game.payoffs],
        }
    if isinstance(game, GraphicalGame):
        return {
            "players": game.player_count,
            "actions": list(game.action_counts),
            "edges": [list(e) for e in game.edges],
            "tables": {
                f"{i},{j}": game.tables[(i, j)].tolist()
                for i, j in sorted(game.tables)
            },
        }
    raise TypeError(f"unsupported game type {type(game).__name__}")


def game_from_json(doc: Mapping):
    for key in ("players", "actions"):
        if key not in doc:
            raise ValueError(f"game document missing key {key!r}")
    n = int(doc["players"])
    counts = [int(k) for k in doc["actions"]]
    if len(counts) != n:
        raise ValueError(f"'actions' has {len(counts)} entries for {n} players")
    if "edges" in doc:
        tables = {}
        for key, val in doc.get("tables", {}).items():
            try:
                i, j = (int(p) for p in key.split(","))
            except ValueError as exc:
                raise ValueError(f"bad table key {key!r}; expected 'i,j'") from exc
            tables[(i, j)] = val
        return build_graphical(counts, doc["edges"], tables)
    if "payoffs" not in doc:
        raise ValueError("game document missing key 'payoffs'")
    return build_normal_form(counts, doc["payoffs"])


def load_game(path) -> NormalFormGame | GraphicalGame:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return game_from_json(doc)


def save_game(game, path) -> None:
    Path(path).write_text(
        json.dumps(game_to_json(game), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
