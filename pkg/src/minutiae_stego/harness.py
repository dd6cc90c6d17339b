"""Synthetic genuine/impostor evaluation of embedding impact.

Protocol per embedding config: the first impression of every finger is
protected with random payload bits filling its capacity; each protected
template is matched against the other impressions of the same finger
(genuine) and the protected first impressions are matched pairwise across
fingers (impostor).  A baseline row with ``b = 0`` (nothing embedded) is
always included.  FRR at threshold ``t`` is the share of genuine scores below
``t``; FAR is the share of impostor scores at or above ``t``.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import os
import re
from dataclasses import dataclass, field, replace
from typing import Dict, List, Sequence, Tuple

from .codec import EmbedConfig, EmbedError, BitPayload, capacity, embed_template
from .matcher import MatchParams, PreparedTemplate, match_templates
from .rng import Lcg64, derive_seed
from .template import MinutiaeTemplate, load

log = logging.getLogger(__name__)

IMPRESSIONS_PER_FINGER = 8
THRESHOLDS = tuple(i / 100 for i in range(101))
MAX_PLACEMENT_TRIES = 1000
# stream tags keep generation, perturbation and payload seeds apart
_GEN, _PERTURB, _PAYLOAD = 1, 2, 3
CSV_COLUMNS = (
    "b",
    "strategy",
    "order_preserving",
    "threshold",
    "frr",
    "far",
    "mean_genuine",
    "mean_impostor",
    "mean_distortion",
    "order_adjustments",
)


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class GenParams:
    width: int = 256
    height: int = 256
    n_min: int = 30
    n_max: int = 60
    min_spacing: float = 8.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError("image size must be positive")
        if not 0 <= self.n_min <= self.n_max:
            raise ValueError(f"empty minutiae count range [{self.n_min}, {self.n_max}]")
        if self.min_spacing < 0:
            raise ValueError("min_spacing must be non-negative")


@dataclass(frozen=True)
class PerturbParams:
    max_translation: float = 20.0
    max_rotation: float = 15.0
    jitter_sigma_xy: float = 2.0
    jitter_sigma_theta: float = 5.0
    drop_rate: float = 0.1
    add_rate: float = 0.1
    width: int = 256
    height: int = 256
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("drop_rate", "add_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")


@dataclass(frozen=True)
class EvalRow:
    b: int
    strategy: str
    order_preserving: bool
    thresholds: Tuple[float, ...]
    frr: Tuple[float, ...]
    far: Tuple[float, ...]
    mean_genuine: float
    mean_impostor: float
    mean_distortion: float
    order_adjustments: int
    # not part of the CSV
    genuine_scores: Tuple[float, ...] = field(default=(), compare=False)
    impostor_scores: Tuple[float, ...] = field(default=(), compare=False)
    range_failures: int = field(default=0, compare=False)


@dataclass(frozen=True)
class EvalReport:
    rows: Tuple[EvalRow, ...] = ()

    def row(self, b: int, strategy: str | None = None) -> EvalRow:
        for r in self.rows:
            if r.b == b and (strategy is None or r.strategy == strategy):
                return r
        raise KeyError((b, strategy))


def _round_half_up(v: float) -> int:
    return int(math.floor(v + 0.5))


def gen_template(p: GenParams) -> MinutiaeTemplate:
    """Uniformly scattered minutiae at least ``min_spacing`` apart."""
    rng = Lcg64(p.seed)
    n = rng.randint(p.n_min, p.n_max)
    spacing2 = p.min_spacing * p.min_spacing
    placed: List[Tuple[int, int, int]] = []
    for k in range(n):
        for _ in range(MAX_PLACEMENT_TRIES):
            x = rng.randint(0, p.width - 1)
            y = rng.randint(0, p.height - 1)
            if all((x - px) ** 2 + (y - py) ** 2 >= spacing2 for px, py, _t in placed):
                break
        else:
            raise GenerationError(
                f"could not place minutia {k + 1} of {n} at spacing {p.min_spacing} "
                f"in {p.width}x{p.height} after {MAX_PLACEMENT_TRIES} tries"
            )
        placed.append((x, y, rng.randint(0, 359)))
    placed.sort(key=lambda m: m[0])
    return MinutiaeTemplate.from_tuples(placed)


def perturb(t: MinutiaeTemplate, p: PerturbParams) -> MinutiaeTemplate:
    """Simulate another impression: rigid motion, jitter, dropped and spurious minutiae."""
    rng = Lcg64(p.seed)
    phi = rng.uniform(-p.max_rotation, p.max_rotation)
    tx = rng.uniform(-p.max_translation, p.max_translation)
    ty = rng.uniform(-p.max_translation, p.max_translation)
    c, s = math.cos(math.radians(phi)), math.sin(math.radians(phi))
    cx, cy = (p.width - 1) / 2, (p.height - 1) / 2
    xmax, ymax = p.width - 1, p.height - 1

    out = []
    for m in t.points:
        dropped = rng.random() < p.drop_rate
        jx, jy, jt = rng.gauss(), rng.gauss(), rng.gauss()
        if dropped:
            continue
        x = cx + c * (m.x - cx) - s * (m.y - cy) + tx + p.jitter_sigma_xy * jx
        y = cy + s * (m.x - cx) + c * (m.y - cy) + ty + p.jitter_sigma_xy * jy
        theta = _round_half_up(m.theta + phi + p.jitter_sigma_theta * jt) % 360
        out.append((min(max(_round_half_up(x), 0), xmax), min(max(_round_half_up(y), 0), ymax), theta))
    for _ in range(t.n):
        if rng.random() < p.add_rate:
            out.append((rng.randint(0, xmax), rng.randint(0, ymax), rng.randint(0, 359)))
    out.sort(key=lambda m: m[0])
    return MinutiaeTemplate.from_tuples(out)


def synth_database(db_size: int, gen: GenParams, pert: PerturbParams,
                   impressions: int = IMPRESSIONS_PER_FINGER) -> List[List[MinutiaeTemplate]]:
    """``db_size`` fingers, each an original template followed by perturbed copies."""
    fingers = []
    for f in range(db_size):
        master = gen_template(replace(gen, seed=derive_seed(gen.seed, _GEN, f)))
        imps = [master]
        for k in range(1, impressions):
            imps.append(perturb(master, replace(pert, seed=derive_seed(pert.seed, _PERTURB, f, k))))
        fingers.append(imps)
    return fingers


_DB_NAME = re.compile(r"^(?P<finger>.+)_(?P<imp>\d+)\.mnt$")


def load_database_dir(path) -> List[List[MinutiaeTemplate]]:
    """Read ``<finger>_<impression>.mnt`` files (FVC naming) grouped by finger.

    Within a finger, impressions are ordered numerically and the first one is
    the template that gets protected.
    """
    groups: Dict[str, List[Tuple[int, str]]] = {}
    for name in sorted(os.listdir(path)):
        m = _DB_NAME.match(name)
        if m:
            groups.setdefault(m["finger"], []).append((int(m["imp"]), name))
    if not groups:
        raise FileNotFoundError(f"no <finger>_<impression>.mnt files in {path}")
    fingers = []
    for key in sorted(groups, key=lambda s: (len(s), s)):
        files = sorted(groups[key])
        fingers.append([load(os.path.join(path, name)) for _, name in files])
    return fingers


def _random_payload(n_bits: int, seed: int) -> BitPayload:
    rng = Lcg64(seed)
    return BitPayload(tuple(rng.bit() for _ in range(n_bits)))


def _rates(genuine: Sequence[float], impostor: Sequence[float], thresholds: Sequence[float]):
    frr = tuple(sum(s < t for s in genuine) / len(genuine) if genuine else 0.0 for t in thresholds)
    far = tuple(sum(s >= t for s in impostor) / len(impostor) if impostor else 0.0 for t in thresholds)
    return frr, far


def _mean(v: Sequence[float]) -> float:
    return sum(v) / len(v) if v else 0.0


def _evaluate(
    fingers: Sequence[Sequence[PreparedTemplate]],
    protected: Sequence[PreparedTemplate],
    match: MatchParams,
):
    genuine = [
        match_templates(protected[f], other, match).score
        for f, imps in enumerate(fingers)
        for other in imps[1:]
    ]
    impostor = [
        match_templates(protected[f], protected[g], match).score
        for f in range(len(protected))
        for g in range(f + 1, len(protected))
    ]
    return genuine, impostor


def run_eval_database(
    fingers: Sequence[Sequence[MinutiaeTemplate]],
    cfgs: Sequence[EmbedConfig],
    match: MatchParams = MatchParams(),
    thresholds: Sequence[float] = THRESHOLDS,
) -> EvalReport:
    """Evaluate embedding configs on an explicit database of impressions."""
    if len(fingers) < 2:
        raise ValueError("need at least two fingers")
    thresholds = tuple(thresholds)
    if any(b <= a for a, b in zip(thresholds, thresholds[1:])):
        raise ValueError("thresholds must be strictly increasing")

    prepared = [[PreparedTemplate(t) for t in imps] for imps in fingers]
    originals = [imps[0] for imps in prepared]

    genuine, impostor = _evaluate(prepared, originals, match)
    frr, far = _rates(genuine, impostor, thresholds)
    rows = [EvalRow(
        b=0, strategy="none", order_preserving=False, thresholds=thresholds,
        frr=frr, far=far, mean_genuine=_mean(genuine), mean_impostor=_mean(impostor),
        mean_distortion=0.0, order_adjustments=0,
        genuine_scores=tuple(genuine), impostor_scores=tuple(impostor),
    )]

    for cfg in cfgs:
        protected = []
        total = elements = adjustments = failures = 0
        for f, imps in enumerate(fingers):
            t = imps[0]
            payload = _random_payload(capacity(t, cfg.b), derive_seed(cfg.padding_key, _PAYLOAD, f, cfg.b))
            try:
                pt, rep = embed_template(t, payload, cfg)
            except EmbedError as exc:
                log.warning("finger %d: %s; keeping the unprotected template", f, exc)
                failures += 1
                protected.append(prepared[f][0])
                continue
            total += rep.total_distortion
            elements += rep.elements_used
            adjustments += rep.order_adjustments
            protected.append(PreparedTemplate(pt))
        genuine, impostor = _evaluate(prepared, protected, match)
        frr, far = _rates(genuine, impostor, thresholds)
        rows.append(EvalRow(
            b=cfg.b, strategy=cfg.strategy, order_preserving=cfg.order_preserving,
            thresholds=thresholds, frr=frr, far=far,
            mean_genuine=_mean(genuine), mean_impostor=_mean(impostor),
            mean_distortion=total / elements if elements else 0.0,
            order_adjustments=adjustments,
            genuine_scores=tuple(genuine), impostor_scores=tuple(impostor),
            range_failures=failures,
        ))
        log.info("b=%d %s: mean genuine %.4f", cfg.b, cfg.strategy, rows[-1].mean_genuine)
    return EvalReport(tuple(rows))


def run_eval(
    db_size: int,
    gen: GenParams = GenParams(),
    pert: PerturbParams = PerturbParams(),
    cfgs: Sequence[EmbedConfig] = (),
    match: MatchParams = MatchParams(),
    thresholds: Sequence[float] = THRESHOLDS,
) -> EvalReport:
    if db_size < 2:
        raise ValueError("db_size must be at least 2")
    fingers = synth_database(db_size, gen, pert)
    return run_eval_database(fingers, cfgs, match, thresholds)


def _fmt_bool(v: bool) -> str:
    return "true" if v else "false"


def report_csv(r: EvalReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in r.rows:
        for t, frr, far in zip(row.thresholds, row.frr, row.far):
            w.writerow([
                row.b, row.strategy, _fmt_bool(row.order_preserving), repr(t), repr(frr),
                repr(far), repr(row.mean_genuine), repr(row.mean_impostor),
                repr(row.mean_distortion), row.order_adjustments,
            ])
    return buf.getvalue()


def parse_report_csv(text: str) -> EvalReport:
    """Inverse of :func:`report_csv` for the columns the CSV carries."""
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    grouped: Dict[tuple, List[dict]] = {}
    for rec in reader:
        key = (int(rec["b"]), rec["strategy"], rec["order_preserving"] == "true")
        grouped.setdefault(key, []).append(rec)
    rows = []
    for (b, strategy, op), recs in grouped.items():
        first = recs[0]
        rows.append(EvalRow(
            b=b, strategy=strategy, order_preserving=op,
            thresholds=tuple(float(r["threshold"]) for r in recs),
            frr=tuple(float(r["frr"]) for r in recs),
            far=tuple(float(r["far"]) for r in recs),
            mean_genuine=float(first["mean_genuine"]),
            mean_impostor=float(first["mean_impostor"]),
            mean_distortion=float(first["mean_distortion"]),
            order_adjustments=int(first["order_adjustments"]),
        ))
    return EvalReport(tuple(rows))
