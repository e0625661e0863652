"""Similarity score between a selected subset and the known correct solutions.

The score weights three penalties: missing relevant information, chosen
irrelevant features, and chosen redundant copies. Arithmetic is carried out in
rationals so that the extreme values 0 and 1 are hit exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .synth import ConfigurationError, DatasetSchema, Role


@dataclass(frozen=True)
class RolePartition:
    relevant: frozenset[int]
    irrelevant: frozenset[int]
    sources: dict  # redundant feature -> relevant feature it copies

    def __post_init__(self):
        redundant = frozenset(self.sources)
        if self.relevant & self.irrelevant or self.relevant & redundant or self.irrelevant & redundant:
            raise ValueError("roles must be disjoint")
        if not set(self.sources.values()) <= self.relevant:
            raise ValueError("every redundant feature must copy a relevant one")

    @property
    def redundant(self) -> frozenset[int]:
        return frozenset(self.sources)

    @property
    def n_total(self) -> int:
        return len(self.relevant) + len(self.irrelevant) + len(self.sources)

    def representative(self, feature: int) -> int:
        """The relevant feature whose equivalence class contains ``feature``."""
        return self.sources.get(feature, feature)

    def classes(self) -> dict[int, frozenset[int]]:
        """Equivalence classes of relevant+redundant features, keyed by relevant member."""
        members = {r: {r} for r in self.relevant}
        for f, src in self.sources.items():
            members[src].add(f)
        return {r: frozenset(m) for r, m in members.items()}

    def correct_solutions(self):
        """Yield every X*: one member from each equivalence class."""
        import itertools

        groups = [sorted(c) for _, c in sorted(self.classes().items())]
        for pick in itertools.product(*groups):
            yield frozenset(pick)

    @classmethod
    def from_schema(cls, schema: DatasetSchema) -> "RolePartition":
        return cls(schema.columns_with_role(Role.RELEVANT), schema.columns_with_role(Role.IRRELEVANT),
                   schema.source_map())


@dataclass(frozen=True)
class ScoreWeights:
    alpha_r: float
    alpha_i: float
    alpha_rr: float
    epsilon: float


def _exact_alphas(n_r: int, n_i: int, n_rr: int, epsilon) -> tuple[Fraction, Fraction, Fraction]:
    if n_r < 1:
        raise ConfigurationError("the score needs at least one relevant feature")
    if n_i < 0 or n_rr < 0:
        raise ConfigurationError("role cardinalities must be non-negative")
    eps = Fraction(epsilon)
    if not 0 < eps <= 1:
        raise ConfigurationError(f"epsilon must lie in (0, 1], got {epsilon}")
    beta_r = eps / 2
    beta_i = 2 * eps / 3
    # per-feature weights follow the chain a_I = beta_R a_R, a_R' = beta_I a_I;
    # empty roles contribute nothing and drop out of the normalization
    unit_r = 1 / (n_r + n_i * beta_r + n_rr * beta_r * beta_i)
    return n_r * unit_r, n_i * beta_r * unit_r, n_rr * beta_r * beta_i * unit_r


def compute_alphas(n_r: int, n_i: int, n_rr: int, epsilon: float = 1.0) -> ScoreWeights:
    a_r, a_i, a_rr = _exact_alphas(n_r, n_i, n_rr, epsilon)
    return ScoreWeights(float(a_r), float(a_i), float(a_rr), float(epsilon))


def equivalence_partition(partition: RolePartition, subset) -> tuple[frozenset, frozenset]:
    """Return (classes of the chosen relevant/redundant features, full classes they touch).

    Both are sets of frozensets. The first splits the chosen members by
    shared source; the second lists the complete classes of the universe
    that have at least one chosen member.
    """
    chosen: dict[int, set[int]] = {}
    for f in subset:
        if f in partition.relevant or f in partition.sources:
            chosen.setdefault(partition.representative(f), set()).add(f)
    full = partition.classes()
    rho_a = frozenset(frozenset(m) for m in chosen.values())
    rho_in_x = frozenset(full[r] for r in chosen)
    return rho_a, rho_in_x


def quotient_F(quotient_set) -> int:
    """Total surplus members: sum of ``|class| - 1`` over the classes."""
    return sum(len(c) - 1 for c in quotient_set)


def score_exact(partition: RolePartition, subset, epsilon=1) -> Fraction:
    subset = frozenset(subset)
    unknown = subset - partition.relevant - partition.irrelevant - partition.redundant
    if unknown:
        raise ValueError(f"subset has indices outside the universe: {sorted(unknown)}")
    a_r, a_i, a_rr = _exact_alphas(len(partition.relevant), len(partition.irrelevant),
                                   len(partition.sources), epsilon)
    rho_a, rho_in_x = equivalence_partition(partition, subset)

    relevance = Fraction(len(rho_a), len(partition.relevant))
    if partition.irrelevant:
        irrelevance = 1 - Fraction(len(subset & partition.irrelevant), len(partition.irrelevant))
    else:
        irrelevance = Fraction(1)
    available = quotient_F(rho_in_x)
    redundancy = Fraction(0) if available == 0 else 1 - Fraction(quotient_F(rho_a), available)
    return a_r * relevance + a_rr * redundancy + a_i * irrelevance


def score(partition: RolePartition, subset, epsilon: float = 1.0) -> float:
    return float(score_exact(partition, subset, epsilon))
