"""Monte Carlo experiments: uncertainty sums vs. overlap, and (P_A, P_B) clouds.

Every POVM pair ``k`` draws from its own stream ``RngStream(seed, k)``, so the
output does not depend on how pairs are distributed over worker processes.
Results are assembled in pair order by a single writer.
"""
import csv
import io
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from ._accel import backend_name
from .errors import ConfigInvalid
from .measure import (
    BOUND_TOL,
    DomainSpec,
    Povm,
    domain_boundary,
    domain_contains,
    domain_spec,
    joint_overlap,
    max_prob_batch,
    overlap_sandwich,
    scan_pair,
    snap_unit,
)
from .metrics import BUILTIN_NAMES, builtin_kernel, h_cf
from .randgen import (
    RngStream,
    random_mixed_states,
    random_povm_elements,
    random_pure_states,
    random_pvm_elements,
)

log = logging.getLogger(__name__)

__all__ = [
    "ExperimentConfig",
    "RunManifest",
    "FIG1_COLUMNS",
    "FIG2_COLUMNS",
    "run_fig1",
    "run_fig2",
    "write_fig1",
    "write_fig2",
    "draw_pair",
    "draw_states",
    "bound_sweep",
    "SweepSummary",
]

FIG1_COLUMNS = (
    "pair_id", "state_id", "kernel", "c_ab", "u_a", "u_b",
    "u_sum", "bound_joint", "bound_improved", "slack",
)
FIG2_COLUMNS = ("state_id", "p_a", "p_b", "in_domain")
FIG2_CHUNK = 1000
BOUNDARY_POINTS = 1000


@dataclass
class ExperimentConfig:
    dim: int = 3
    n_a: int = 3
    n_b: int = 3
    n_povm_pairs: int = 1000
    n_states_per_pair: int = 25
    kernel_names: tuple = BUILTIN_NAMES
    observable_mode: str = "pvm"
    state_mode: str = "both"
    mixed_method: str = "spectral"
    seed: int = 42
    output_path: str = ""
    output_format: str = "csv"
    witness: bool = True

    def __post_init__(self):
        self.kernel_names = tuple(builtin_kernel(k).name for k in self.kernel_names)
        if self.observable_mode == "pvm":
            self.n_a = self.n_b = self.dim
        self.validate()

    def validate(self):
        if self.dim < 2:
            raise ConfigInvalid("dim must be >= 2")
        for name in ("n_a", "n_b", "n_povm_pairs", "n_states_per_pair"):
            if getattr(self, name) < 1:
                raise ConfigInvalid(f"{name} must be >= 1")
        if self.observable_mode == "povm" and min(self.n_a, self.n_b) < 2:
            raise ConfigInvalid("POVMs need at least 2 outcomes")
        if self.observable_mode not in ("pvm", "povm"):
            raise ConfigInvalid(f"observable_mode must be pvm or povm, got {self.observable_mode!r}")
        if self.state_mode not in ("pure", "mixed", "both"):
            raise ConfigInvalid(f"state_mode must be pure, mixed or both, got {self.state_mode!r}")
        if self.mixed_method not in ("spectral", "wishart"):
            raise ConfigInvalid(f"mixed_method must be spectral or wishart, got {self.mixed_method!r}")
        if self.output_format not in ("csv", "json"):
            raise ConfigInvalid(f"output_format must be csv or json, got {self.output_format!r}")
        if not self.kernel_names:
            raise ConfigInvalid("at least one kernel is required")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigInvalid("seed must be an unsigned 64-bit integer")

    def echo(self):
        d = asdict(self)
        d["kernel_names"] = list(self.kernel_names)
        return d


@dataclass
class RunManifest:
    config: dict
    version: str = __version__
    backend: str = field(default_factory=backend_name)
    kernels: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    wall_time_s: float = 0.0

    @property
    def violations(self):
        return sum(v["violations"] for v in self.kernels.values())

    def as_dict(self, include_time=True):
        d = {
            "config": self.config,
            "version": self.version,
            "backend": self.backend,
            "kernels": self.kernels,
            "total_violations": self.violations,
        }
        d.update(self.extra)
        if include_time:
            d["wall_time_s"] = self.wall_time_s
        return d


# --------------------------------------------------------------------------
# sampling


def draw_pair(cfg, rng):
    """One POVM pair according to ``cfg.observable_mode``."""
    if cfg.observable_mode == "pvm":
        a = random_pvm_elements(cfg.dim, rng)
        b = random_pvm_elements(cfg.dim, rng)
    else:
        a = random_povm_elements(cfg.dim, cfg.n_a, rng)
        b = random_povm_elements(cfg.dim, cfg.n_b, rng)
    return Povm(a, check=False), Povm(b, check=False)


def draw_states(cfg, count, rng):
    """``count`` density matrices; ``both`` alternates pure (even ids) and mixed (odd ids)."""
    n = cfg.dim
    if cfg.state_mode == "pure":
        psi = random_pure_states(n, count, rng)
        return psi[:, :, None] * np.conj(psi[:, None, :])
    if cfg.state_mode == "mixed":
        return random_mixed_states(n, count, rng, cfg.mixed_method)
    n_pure = (count + 1) // 2
    psi = random_pure_states(n, n_pure, rng)
    mixed = random_mixed_states(n, count - n_pure, rng, cfg.mixed_method)
    out = np.empty((count, n, n), dtype=np.complex128)
    out[0::2] = psi[:, :, None] * np.conj(psi[:, None, :])
    out[1::2] = mixed
    return out


def _witness(a, b):
    """``|a_i'><a_i'|`` for the maximising pair of a rank-one PVM pair."""
    _, (i, _j) = joint_overlap(a, b)
    return np.array(a.elements[i])[None]


# --------------------------------------------------------------------------
# uncertainty sums vs. overlap


def _fig1_pair(cfg, pair_id, same_pair=False):
    rng = RngStream(cfg.seed, pair_id)
    a, b = draw_pair(cfg, rng)
    if same_pair:
        b = a
    rhos = draw_states(cfg, cfg.n_states_per_pair, rng)
    if cfg.witness and cfg.observable_mode == "pvm":
        rhos = np.concatenate([rhos, _witness(a, b)])
    scan = scan_pair(cfg.kernel_names, a, b, rhos)
    return scan


def _fig1_chunk(args):
    cfg, ids, same_pair = args
    return [(pid, _fig1_pair(cfg, pid, same_pair)) for pid in ids]


def _chunks(n, size):
    return [list(range(s, min(n, s + size))) for s in range(0, n, size)]


def _map_ordered(fn, jobs, workers):
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def run_fig1(cfg, workers=1, same_pair=False):
    """Uncertainty sums vs. joint overlap for many random POVM pairs.

    Returns ``(rows, manifest)`` where each row is a dict keyed by
    :data:`FIG1_COLUMNS`. In PVM mode with ``cfg.witness`` set, the state
    ``|a_i'>`` attaining the overlap is appended to each pair with
    ``state_id = n_states_per_pair``. ``same_pair`` forces ``B = A``.
    """
    t0 = time.perf_counter()
    jobs = [(cfg, ids, same_pair) for ids in _chunks(cfg.n_povm_pairs, 64)]
    results = [r for chunk in _map_ordered(_fig1_chunk, jobs, workers) for r in chunk]
    rows = []
    summary = {k: {"min_slack": np.inf, "violations": 0, "records": 0} for k in cfg.kernel_names}
    witness_min = {k: np.inf for k in cfg.kernel_names}
    for pid, scan in results:
        n_st = scan.p_a.shape[0]
        for sid in range(n_st):
            for name in cfg.kernel_names:
                kd = scan.kernels[name]
                slack = float(kd["slack"][sid])
                rows.append({
                    "pair_id": pid,
                    "state_id": sid,
                    "kernel": name,
                    "c_ab": scan.c_ab,
                    "u_a": float(kd["u_a"][sid]),
                    "u_b": float(kd["u_b"][sid]),
                    "u_sum": float(kd["u_sum"][sid]),
                    "bound_joint": kd["bound_joint"],
                    "bound_improved": kd["bound_improved"],
                    "slack": slack,
                })
                s = summary[name]
                s["records"] += 1
                s["min_slack"] = min(s["min_slack"], slack)
                if slack < -BOUND_TOL:
                    s["violations"] += 1
                if sid >= cfg.n_states_per_pair:
                    witness_min[name] = min(witness_min[name], abs(slack))
    extra = {"mixed_method": cfg.mixed_method}
    if cfg.witness and cfg.observable_mode == "pvm":
        extra["witness_min_abs_slack"] = {k: float(v) for k, v in witness_min.items()}
    manifest = RunManifest(cfg.echo(), kernels=_finite(summary), extra=extra)
    manifest.wall_time_s = time.perf_counter() - t0
    return rows, manifest


def _finite(summary):
    return {k: {kk: (float(vv) if isinstance(vv, float) else vv) for kk, vv in v.items()}
            for k, v in summary.items()}


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def _csv_text(columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _stem(path):
    for ext in (".csv", ".json"):
        if path.endswith(ext):
            return path[: -len(ext)]
    return path


def _manifest_path(path):
    return _stem(path) + ".manifest.json"


def _json_text(obj):
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def write_fig1(cfg, rows, manifest, path=None):
    """Write Fig-1 data (CSV or JSON) plus ``<stem>.manifest.json``; returns written paths."""
    path = path or cfg.output_path
    if not path:
        raise ConfigInvalid("no output path given")
    if cfg.output_format == "csv":
        _write_text(path, _csv_text(FIG1_COLUMNS, rows))
    else:
        _write_text(path, _json_text({"columns": list(FIG1_COLUMNS), "records": rows}))
    mpath = _manifest_path(path)
    _write_text(mpath, _json_text(manifest.as_dict()))
    return [path, mpath]


# --------------------------------------------------------------------------
# (P_A, P_B) clouds for one pair


def _fig2_chunk(args):
    cfg, chunk_id, count, a, b = args
    rng = RngStream(cfg.seed, 1 + chunk_id)
    rhos = draw_states(cfg, count, rng)
    p_a = np.max(np.einsum("kij,sji->sk", a, rhos).real, axis=1)
    p_b = np.max(np.einsum("kij,sji->sk", b, rhos).real, axis=1)
    return p_a, p_b


def run_fig2(cfg, workers=1, extra_states=None):
    """Cloud of ``(P_A, P_B)`` for one fixed POVM pair and many states.

    The pair comes from stream 0; states are drawn in chunks of 1000, chunk
    ``c`` from stream ``1 + c``. ``extra_states`` (density matrices) are
    appended after the random ones. Returns ``(result, manifest)`` where
    ``result`` holds ``rows``, ``spec`` (a :class:`DomainSpec`), the sampled
    ``boundary`` and per-kernel ``h_curves``.
    """
    t0 = time.perf_counter()
    a, b = draw_pair(cfg, RngStream(cfg.seed, 0))
    spec = domain_spec(a, b)
    n = cfg.n_states_per_pair
    sizes = [min(FIG2_CHUNK, n - s) for s in range(0, n, FIG2_CHUNK)]
    jobs = [(cfg, c, size, a.elements, b.elements) for c, size in enumerate(sizes)]
    parts = _map_ordered(_fig2_chunk, jobs, workers)
    p_a = snap_unit(np.concatenate([p[0] for p in parts]))
    p_b = snap_unit(np.concatenate([p[1] for p in parts]))
    if extra_states is not None:
        ex = np.asarray(extra_states, dtype=np.complex128).reshape(-1, cfg.dim, cfg.dim)
        p_a = np.concatenate([p_a, max_prob_batch(a, ex)])
        p_b = np.concatenate([p_b, max_prob_batch(b, ex)])
    inside = domain_contains(spec, p_a, p_b, BOUND_TOL)
    inside = np.atleast_1d(inside)
    rows = [
        {"state_id": i, "p_a": float(p_a[i]), "p_b": float(p_b[i]), "in_domain": bool(inside[i])}
        for i in range(p_a.shape[0])
    ]
    x, hx = domain_boundary(spec, BOUNDARY_POINTS)
    curves = {"x": x, "wootters": hx}
    if 0.0 < spec.c_ab < 1.0:
        for name in ("bures", "root_infidelity"):
            curves[name] = np.asarray(h_cf(name, spec.c_ab, x))
    below_rect = int(np.count_nonzero((p_a < 1.0 / spec.n_a - BOUND_TOL) | (p_b < 1.0 / spec.n_b - BOUND_TOL)))
    violations = int(np.count_nonzero(~inside))
    manifest = RunManifest(
        cfg.echo(),
        kernels={"wootters": {"violations": violations, "records": len(rows)}},
        extra={
            "mixed_method": cfg.mixed_method,
            "domain": spec.as_dict(),
            "points_below_uniform": below_rect,
        },
    )
    manifest.wall_time_s = time.perf_counter() - t0
    result = {"rows": rows, "spec": spec, "boundary": (x, hx), "h_curves": curves}
    return result, manifest


def write_fig2(cfg, result, manifest, path=None):
    """Write the scatter, boundary, spec and h-curve files; returns written paths."""
    path = path or cfg.output_path
    if not path:
        raise ConfigInvalid("no output path given")
    stem = _stem(path)
    spec = result["spec"]
    x, hx = result["boundary"]
    curves = result["h_curves"]
    curve_names = [k for k in ("wootters", "bures", "root_infidelity") if k in curves]
    if cfg.output_format == "json":
        payload = {
            "columns": list(FIG2_COLUMNS),
            "records": result["rows"],
            "spec": spec.as_dict(),
            "boundary": {"x": x.tolist(), "h_of_x": hx.tolist()},
            "h_curves": {k: np.asarray(curves[k]).tolist() for k in ["x"] + curve_names},
        }
        _write_text(path, _json_text(payload))
        written = [path]
    else:
        _write_text(path, _csv_text(FIG2_COLUMNS, result["rows"]))
        bpath = stem + ".boundary.csv"
        _write_text(bpath, _csv_text(("x", "h_of_x"), [{"x": u, "h_of_x": v} for u, v in zip(x, hx)]))
        spath = stem + ".spec.csv"
        _write_text(spath, _csv_text(("c_a", "c_b", "c_ab", "full_rectangle"), [spec.as_dict()]))
        cpath = stem + ".hcurves.csv"
        crow = [{"x": x[i], **{k: curves[k][i] for k in curve_names}} for i in range(x.size)]
        _write_text(cpath, _csv_text(["x"] + curve_names, crow))
        written = [path, bpath, spath, cpath]
    mpath = _manifest_path(path)
    _write_text(mpath, _json_text(manifest.as_dict()))
    return written + [mpath]


# --------------------------------------------------------------------------
# invariant sweep over dimensions and outcome counts


@dataclass
class SweepSummary:
    trials: int = 0
    pairs: int = 0
    joint_violations: int = 0
    intrinsic_violations: int = 0
    sandwich_violations: int = 0
    improved_violations: int = 0
    domain_violations: int = 0
    min_slack: dict = field(default_factory=dict)

    @property
    def clean(self):
        return not (
            self.joint_violations
            or self.intrinsic_violations
            or self.sandwich_violations
            or self.improved_violations
            or self.domain_violations
        )


def bound_sweep(dims=(2, 3, 4), outcomes=range(2, 7), n_pairs=1000, n_states=10,
                  kernels=BUILTIN_NAMES, seed=2014, state_mode="mixed", tol=BOUND_TOL):
    """Check the joint, intrinsic, combined and overlap-sandwich bounds on random draws.

    For every ``N`` in ``dims`` and ``(N_A, N_B)`` in ``outcomes^2`` draws
    ``n_pairs`` random POVM pairs with ``n_states`` states each. Counts
    violations beyond ``tol``; also checks that every ``(P_A, P_B)`` lies in
    the allowed domain.
    """
    out = SweepSummary(min_slack={builtin_kernel(k).name: np.inf for k in kernels})
    outcomes = list(outcomes)
    for n in dims:
        for na in outcomes:
            for nb in outcomes:
                cfg = ExperimentConfig(dim=n, n_a=na, n_b=nb, n_povm_pairs=n_pairs,
                                       n_states_per_pair=n_states, kernel_names=tuple(kernels),
                                       observable_mode="povm", state_mode=state_mode, seed=seed)
                tag = (n << 48) | (na << 40) | (nb << 32)
                for k in range(n_pairs):
                    rng = RngStream(seed, tag | k)
                    a, b = draw_pair(cfg, rng)
                    rhos = draw_states(cfg, n_states, rng)
                    scan = scan_pair(cfg.kernel_names, a, b, rhos)
                    out.pairs += 1
                    out.trials += n_states
                    if not overlap_sandwich(scan.c_a, scan.c_b, scan.c_ab, na, nb, tol)[2]:
                        out.sandwich_violations += 1
                    for name, kd in scan.kernels.items():
                        out.min_slack[name] = min(out.min_slack[name], float(kd["slack"].min()))
                        out.joint_violations += int(np.count_nonzero(kd["slack"] < -tol))
                        out.intrinsic_violations += int(np.count_nonzero(kd["u_a"] < kd["intrinsic_a"] - tol))
                        out.intrinsic_violations += int(np.count_nonzero(kd["u_b"] < kd["intrinsic_b"] - tol))
                        out.improved_violations += int(
                            np.count_nonzero(kd["u_sum"] < kd["bound_improved"] - tol)
                        )
                    spec = DomainSpec.from_overlaps(scan.c_a, scan.c_b, scan.c_ab, na, nb)
                    inside = np.atleast_1d(domain_contains(spec, scan.p_a, scan.p_b, tol))
                    out.domain_violations += int(np.count_nonzero(~inside))
    return out
