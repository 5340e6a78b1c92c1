"""
Support-set hallucination.

A hallucinated support pairs the foreground of one support image with the
background of another. Intra-class pairing draws donors from the same class,
inter-class pairing from every other support. Each background comes in ``D``
dilation variants, multiplying the pair count.

Similarity priors score a pair by the distance between the two f-encoded
backgrounds: SSP scales the refined map by ``p``, HSP drops pairs with
``p <= tau``. TriR penalizes the mixer's drift from a frozen teacher on real
(same-image) pairs.
"""

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from salnet.autodiff.graph import DiffGraph
from salnet.autodiff.value import DiffValue
from salnet.data.episodes import Episode
from salnet.shared.exceptions import ConstraintViolationError, ParameterRangeError, ShapeMismatchError


class Strategy(str, Enum):
    NONE = "none"
    INTRA = "intra"
    INTER = "inter"


class PriorMode(str, Enum):
    NONE = "none"
    SSP = "ssp"
    HSP = "hsp"


class TrirMode(str, Enum):
    OFF = "off"
    TEACHER_FULL_IMAGE = "teacher_full_image"
    TEACHER_FGBG = "teacher_fgbg"


class PriorConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    mode: PriorMode = PriorMode.NONE
    alpha: float = Field(default=1.0, ge=0.0)
    tau: float = Field(default=0.5, ge=0.0, lt=1.0)


class TrirConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    mode: TrirMode = TrirMode.OFF
    beta: float = Field(default=0.01, ge=0.0)
    teacher_checkpoint: Optional[Path] = None


@dataclass(frozen=True)
class HallucinationPair:
    fg_source: int
    bg_source: int
    variant: int


@dataclass(frozen=True, eq=False)
class HallucinatedSample:
    """A foreground/background combination; it carries the foreground's class."""

    fg_source: int
    bg_source: int
    bg_variant: int
    bg_dilation_radius: Optional[float]
    class_label: int
    prior_p: float = 1.0
    descriptor: Optional[np.ndarray] = None


def enumerate_intra(episode: Episode, n_variants: int = 1) -> List[HallucinationPair]:
    """``D * (W - 1)`` pairs per support image; empty at one shot."""
    slots = episode.support_slots
    return [
        HallucinationPair(fg, bg, v)
        for fg in range(len(slots))
        for v in range(n_variants)
        for bg in range(len(slots))
        if bg != fg and slots[bg] == slots[fg]
    ]


def enumerate_inter(episode: Episode, n_variants: int = 1) -> List[HallucinationPair]:
    """``D * (W - 1 + W * (N - 1))`` pairs per support image."""
    count = len(episode.support)
    return [
        HallucinationPair(fg, bg, v)
        for fg in range(count)
        for v in range(n_variants)
        for bg in range(count)
        if bg != fg
    ]


def enumerate_pairs(strategy: Strategy, episode: Episode, n_variants: int = 1) -> List[HallucinationPair]:
    strategy = Strategy(strategy)
    if strategy is Strategy.INTRA:
        return enumerate_intra(episode, n_variants)
    if strategy is Strategy.INTER:
        return enumerate_inter(episode, n_variants)
    return []


def background_distance(b_a: np.ndarray, b_b: np.ndarray) -> float:
    """Squared Euclidean distance between two f-encoded backgrounds."""
    a = np.asarray(getattr(b_a, "data", b_a), dtype=np.float64)
    b = np.asarray(getattr(b_b, "data", b_b), dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeMismatchError("Background maps differ in shape", node="background_distance",
                                 details={"a": a.shape, "b": b.shape})
    diff = a - b
    return float(np.sum(diff * diff))


def prior_probability(d, alpha: float):
    """
    Reflected-sigmoid profile ``2 e^{-alpha d} / (1 + e^{-alpha d})``.

    Accepts a scalar or an array of distances.
    """
    if alpha < 0:
        raise ParameterRangeError("alpha must be >= 0", details={"alpha": alpha})
    e = np.exp(-alpha * np.asarray(d, dtype=np.float64))
    p = 2.0 * e / (1.0 + e)
    return float(p) if np.ndim(p) == 0 else p


def apply_ssp(graph: DiffGraph, phi: DiffValue, p) -> DiffValue:
    """Scale refined maps by their prior; ``p`` is a scalar or one value per batch row."""
    factor = np.asarray(p, dtype=np.float64)
    if factor.ndim == 1:
        factor = factor.reshape((-1,) + (1,) * (phi.data.ndim - 1))
    return graph.scale(phi, factor if factor.ndim else float(factor), name="ssp")


def apply_hsp(samples: Sequence[HallucinatedSample], tau: float) -> List[HallucinatedSample]:
    """Keep samples whose prior exceeds ``tau``; kept samples are used unweighted."""
    if not 0.0 <= tau < 1.0:
        raise ParameterRangeError("tau must be in [0, 1)", details={"tau": tau})
    return [s for s in samples if s.prior_p > tau]


def check_reconstruction(foreground: np.ndarray, background: np.ndarray, image: np.ndarray, name: str = "") -> None:
    """
    Raises:
        ConstraintViolationError: ``F + B`` does not reproduce the source image
    """
    if not np.array_equal(foreground + background, image):
        raise ConstraintViolationError(
            "Teacher pair does not reconstruct its source image",
            details={"image": name, "max_error": float(np.max(np.abs(foreground + background - image)))},
        )


def trir_omega(graph: DiffGraph, student_phi: DiffValue, teacher_phi) -> DiffValue:
    """
    ``Omega = (1 / NW) * sum_i ||Phi_i - Phi*_i||^2`` over the real support maps.

    ``teacher_phi`` enters as a constant, so no gradient reaches the teacher.
    """
    teacher = graph.constant(np.asarray(getattr(teacher_phi, "data", teacher_phi), dtype=np.float64))
    if teacher.shape != student_phi.shape:
        raise ShapeMismatchError("Student and teacher maps differ in shape", node="trir",
                                 details={"student": student_phi.shape, "teacher": teacher.shape})
    count = student_phi.shape[0]
    per_image = student_phi.size // count
    delta = graph.sub(student_phi, teacher, name="trir.delta")
    return graph.scale(graph.mean_square(delta), float(per_image), name="trir.omega")
