"""Takagi-Sugeno rule base: inference and the two identification variants.

Both identifiers take the same cluster structure.  The baseline fits the
affine consequents against the plain normalized fulfillment degrees; the
weighted variant first estimates per-rule priors and Gaussian time clusters
from the training times and fits against the prior- and time-weighted
degrees, so the consequents absorb population and lifetime information.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .clustering import ClusterSet, TrainingTable
from .mixture import (
    TimeClusterParams,
    estimate_time_clusters,
    firing_matrix,
    normalize_firing,
    normalize_rows,
    rule_firing,
    weighted_firing,
    weighted_firing_matrix,
)

MODEL_SCHEMA_VERSION = 1

# Relative singular-value cutoff for the consequent least-squares solve.
SVD_RCOND = 1e-10


@dataclass
class Rule:
    """One fuzzy rule: input center, affine consequent, optional time cluster."""

    center: np.ndarray            # I input-space coordinates
    a: np.ndarray                 # consequent slope, I values
    b: float
    weight: float = 1.0
    prior: float | None = None
    time_centroid: float | None = None
    time_variance: float | None = None

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float)
        self.a = np.asarray(self.a, dtype=float)
        if self.center.shape != self.a.shape:
            raise ValueError("rule center and consequent slope lengths differ")


@dataclass
class TSFISModel:
    """Identified rule base plus the shared per-feature membership spreads."""

    rules: list[Rule]
    sigmas: np.ndarray
    feature_set: tuple[str, ...]
    variant: str                          # "baseline" or "weighted"
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.rules:
            raise ValueError("model needs at least one rule")
        self.sigmas = np.asarray(self.sigmas, dtype=float)
        if (self.sigmas <= 0.0).any():
            raise ValueError("membership spreads must be strictly positive")
        if self.variant not in ("baseline", "weighted"):
            raise ValueError(f"unknown variant {self.variant!r}")
        self.feature_set = tuple(self.feature_set)
        n = self.sigmas.size
        for rule in self.rules:
            if rule.center.size != n or rule.a.size != n:
                raise ValueError("rule dimensionality does not match sigmas")
        if self.variant == "weighted":
            for rule in self.rules:
                if rule.prior is None or rule.time_centroid is None \
                        or rule.time_variance is None:
                    raise ValueError("weighted model rules need time parameters")

    @property
    def n_rules(self) -> int:
        return len(self.rules)

    @property
    def n_features(self) -> int:
        return self.sigmas.size

    @property
    def centers(self) -> np.ndarray:
        return np.array([r.center for r in self.rules])

    @property
    def rule_weights(self) -> np.ndarray:
        return np.array([r.weight for r in self.rules])

    @property
    def slopes(self) -> np.ndarray:
        return np.array([r.a for r in self.rules])

    @property
    def offsets(self) -> np.ndarray:
        return np.array([r.b for r in self.rules])

    @property
    def time_params(self) -> TimeClusterParams | None:
        if self.variant != "weighted":
            return None
        return TimeClusterParams(
            priors=np.array([r.prior for r in self.rules]),
            centroids=np.array([r.time_centroid for r in self.rules]),
            variances=np.array([r.time_variance for r in self.rules]),
        )


class Estimate(NamedTuple):
    """Past-useful-life ratio estimate: raw aggregation output and the
    [0, 1]-clamped value used for RUL conversion."""

    raw: float
    clamped: float


def infer(model: TSFISModel, values, tau: float | None = None) -> Estimate:
    """Evaluate the rule base on one observation.

    Weighted models additionally weight each rule by its prior and by the
    time membership of the observation, so ``tau`` must be provided.
    """
    v = np.asarray(values, dtype=float)
    if v.size != model.n_features:
        raise ValueError(
            f"expected {model.n_features} feature values, got {v.size}")
    if model.variant == "weighted":
        if tau is None:
            raise ValueError("weighted model requires the observation time tau")
        w = weighted_firing(v, tau, model.centers, model.sigmas,
                            model.time_params, model.rule_weights)
    else:
        w = normalize_firing(rule_firing(v, model.centers, model.sigmas,
                                         model.rule_weights))
    raw = float(w @ (model.slopes @ v + model.offsets))
    return Estimate(raw, min(max(raw, 0.0), 1.0))


def predict_table(model: TSFISModel, features, taus=None) -> np.ndarray:
    """Raw ratio estimates for every row of a feature matrix."""
    x = np.atleast_2d(np.asarray(features, dtype=float))
    if model.variant == "weighted":
        if taus is None:
            raise ValueError("weighted model requires observation times")
        w = weighted_firing_matrix(x, taus, model.centers, model.sigmas,
                                   model.time_params, model.rule_weights)
    else:
        w = normalize_rows(firing_matrix(x, model.centers, model.sigmas,
                                         model.rule_weights))
    consequents = x @ model.slopes.T + model.offsets[None, :]
    return np.sum(w * consequents, axis=1)


def build_design_matrix(features, degrees) -> np.ndarray:
    """Stack rule-major blocks [w_j * v_1..v_I, w_j] for each row.

    Row k is the concatenation over rules j of the row's features scaled by
    the rule's degree, followed by the degree itself, so the least-squares
    coefficient vector reads [a_1, b_1, ..., a_J, b_J].
    """
    x = np.atleast_2d(np.asarray(features, dtype=float))
    w = np.atleast_2d(np.asarray(degrees, dtype=float))
    if x.shape[0] != w.shape[0]:
        raise ValueError("feature rows must match degree rows")
    k = x.shape[0]
    extended = np.hstack([x, np.ones((k, 1))])
    blocks = w[:, :, None] * extended[:, None, :]
    return blocks.reshape(k, -1)


def solve_consequents(design, targets) -> np.ndarray:
    """Minimum-norm least squares via SVD with a relative cutoff.

    The normal-equations inverse is numerically unsafe for near-collinear
    designs; the SVD route honors the same minimization problem and warns
    when the design is rank deficient.
    """
    design = np.asarray(design, dtype=float)
    targets = np.asarray(targets, dtype=float)
    beta, _, rank, _ = np.linalg.lstsq(design, targets, rcond=SVD_RCOND)
    if rank < design.shape[1]:
        warnings.warn(
            f"rank-deficient design matrix (rank {rank} < {design.shape[1]}); "
            "returning the minimum-norm solution", RuntimeWarning, stacklevel=2)
    return beta


def _consequent_rules(clusters: ClusterSet, beta: np.ndarray) -> list[Rule]:
    n_inputs = clusters.input_centers.shape[1]
    rules = []
    for j, center in enumerate(clusters.input_centers):
        block = beta[j * (n_inputs + 1) : (j + 1) * (n_inputs + 1)]
        rules.append(Rule(center=center.copy(), a=block[:-1], b=float(block[-1])))
    return rules


def identify_baseline(table: TrainingTable, clusters: ClusterSet,
                      provenance: dict | None = None) -> TSFISModel:
    """Classic subtractive-clustering + least-squares identification."""
    if table.rho is None:
        raise ValueError("identification requires labeled rows (rho present)")
    w = firing_matrix(table.features, clusters.input_centers, clusters.sigmas)
    wbar = normalize_rows(w)
    design = build_design_matrix(table.features, wbar)
    beta = solve_consequents(design, table.rho)
    return TSFISModel(
        rules=_consequent_rules(clusters, beta),
        sigmas=clusters.sigmas.copy(),
        feature_set=table.feature_names,
        variant="baseline",
        provenance=provenance or {},
    )


def identify_weighted(table: TrainingTable, clusters: ClusterSet,
                      provenance: dict | None = None) -> TSFISModel:
    """Prior- and time-weighted least-squares identification.

    Steps: fulfillment degrees from the cluster structure; per-rule priors
    and Gaussian time clusters from their time projection; degrees reweighted
    by prior times time membership; consequents from the weighted
    least-squares solve.
    """
    if table.rho is None:
        raise ValueError("identification requires labeled rows (rho present)")
    if table.taus is None:
        raise ValueError("weighted identification requires observation times")
    w = firing_matrix(table.features, clusters.input_centers, clusters.sigmas)
    wbar = normalize_rows(w)
    time_params = estimate_time_clusters(table.taus, wbar)
    wtil = weighted_firing_matrix(table.features, table.taus,
                                  clusters.input_centers, clusters.sigmas,
                                  time_params)
    design = build_design_matrix(table.features, wtil)
    beta = solve_consequents(design, table.rho)
    rules = _consequent_rules(clusters, beta)
    for j, rule in enumerate(rules):
        rule.prior = float(time_params.priors[j])
        rule.time_centroid = float(time_params.centroids[j])
        rule.time_variance = float(time_params.variances[j])
    return TSFISModel(
        rules=rules,
        sigmas=clusters.sigmas.copy(),
        feature_set=table.feature_names,
        variant="weighted",
        provenance=provenance or {},
    )


def save_model(model: TSFISModel, path) -> None:
    """Persist the model as a versioned JSON document (full float precision)."""
    doc = {
        "schema_version": MODEL_SCHEMA_VERSION,
        "variant": model.variant,
        "feature_set": list(model.feature_set),
        "sigmas": [float(s) for s in model.sigmas],
        "rules": [
            {
                "center": [float(c) for c in rule.center],
                "a": [float(a) for a in rule.a],
                "b": float(rule.b),
                "weight": float(rule.weight),
                "prior": rule.prior,
                "time_centroid": rule.time_centroid,
                "time_variance": rule.time_variance,
            }
            for rule in model.rules
        ],
        "provenance": model.provenance,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_model(path) -> TSFISModel:
    """Load a model persisted by save_model; inference round-trips exactly."""
    with open(path) as fh:
        doc = json.load(fh)
    version = doc.get("schema_version")
    if version != MODEL_SCHEMA_VERSION:
        raise ValueError(f"unsupported model schema version: {version}")
    rules = [
        Rule(
            center=np.array(r["center"], dtype=float),
            a=np.array(r["a"], dtype=float),
            b=float(r["b"]),
            weight=float(r.get("weight", 1.0)),
            prior=r.get("prior"),
            time_centroid=r.get("time_centroid"),
            time_variance=r.get("time_variance"),
        )
        for r in doc["rules"]
    ]
    return TSFISModel(
        rules=rules,
        sigmas=np.array(doc["sigmas"], dtype=float),
        feature_set=tuple(doc["feature_set"]),
        variant=doc["variant"],
        provenance=doc.get("provenance", {}),
    )
