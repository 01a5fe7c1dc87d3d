"""Experiment configuration, orchestration and result tables.

A configuration is a single JSON document; every key is optional and
missing keys take the defaults of :class:`ExperimentConfig`.  Unknown keys
are rejected with a :class:`ConfigError` naming the key.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .algebra import (
    LocalOperator,
    Region,
    identity,
    normalized_trace,
    operator_from_dict,
    partial_trace,
    pauli,
    random_hermitian,
    load_operator,
)
from .condexp import (
    block_spin_gce,
    equivalence_constant,
    gce_property_report,
    inner_automorphism,
    kraus_map,
    markov_generator,
    marginal_density,
    semigroup_apply,
    transpose_map,
)
from .gibbs import (
    Potential,
    gibbs_density,
    gibbs_expectation,
    potential_heisenberg,
)
from .lp import kms_inner, lps_norm, monotonicity_sweep
from .orlicz import (
    OrliczFunction,
    contraction_report,
    ddp_norm,
    luxemburg_norm,
    trace_phi_sides,
)

__all__ = [
    "SUBCOMMANDS",
    "ConfigError",
    "ExperimentConfig",
    "ResultTable",
    "default_config",
    "config_from_dict",
    "config_to_dict",
    "load_config",
    "dump_config",
    "write_table",
    "read_table",
    "build_potential",
    "build_observable",
    "build_volumes",
    "run",
]

SUBCOMMANDS = ("norms", "monotonicity", "semigroup", "equivalence", "orlicz",
               "contraction", "selftest")


class ConfigError(ValueError):
    pass


def _default_tolerances() -> dict:
    return {
        "monotonicity": 1e-8,
        "unitality": 1e-10,
        "semigroup": 1e-9,
        "equivalence_factor": 10.0,
        "lemma": 1e-10,
        "ddp": 1e-12,
        "contraction": 1e-9,
        "gce_unital": 1e-12,
        "gce_positivity": 1e-10,
        "gce_symmetry": 1e-8,
    }


@dataclass
class ExperimentConfig:
    lattice: dict = field(default_factory=lambda: {"d": 1, "n": 2})
    potential: dict = field(default_factory=lambda: {"type": "ising", "J": 1.0, "h": 0.2})
    beta: list = field(default_factory=lambda: [0.1, 0.3, 0.5])
    volumes: list = field(default_factory=lambda: [2, 3, 4, 5, 6])
    observable: dict = field(default_factory=lambda: {"name": "z", "site": [0]})
    norm_grid: dict = field(default_factory=lambda: {"p": [1, 1.5, 2, 3, 4],
                                                     "s": [0, 0.25, 0.5, 0.75, 1]})
    orlicz: list = field(default_factory=lambda: [{"kind": "power", "p": 2},
                                                  {"kind": "exp_minus_one"},
                                                  {"kind": "cosh_minus_one"},
                                                  {"kind": "llogl"}])
    blocks: list = field(default_factory=lambda: [[[0]]])
    times: list = field(default_factory=lambda: [0.0, 0.25, 0.5, 1.0, 2.0, 4.0])
    seed: int = 0
    samples: int = 20
    tolerances: dict = field(default_factory=_default_tolerances)
    output: dict = field(default_factory=lambda: {"path": None, "format": "csv"})


_FIELDS = {f.name for f in dataclasses.fields(ExperimentConfig)}
_NESTED_KEYS = {
    "lattice": {"d", "n"},
    "potential": {"type", "J", "Jx", "Jy", "Jz", "h", "range", "terms"},
    "observable": {"name", "site", "sites", "file", "operator", "seed"},
    "norm_grid": {"p", "s"},
    "tolerances": set(_default_tolerances()),
    "output": {"path", "format"},
}


def default_config() -> ExperimentConfig:
    return ExperimentConfig()


def config_from_dict(doc: dict) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    for key in doc:
        if key not in _FIELDS:
            raise ConfigError(f"unknown config field {key!r}")
    cfg = ExperimentConfig()
    for key, value in doc.items():
        allowed = _NESTED_KEYS.get(key)
        if allowed is not None:
            if not isinstance(value, dict):
                raise ConfigError(f"config field {key!r} must be an object")
            for sub in value:
                if sub not in allowed:
                    raise ConfigError(f"unknown config field {key + '.' + sub!r}")
            merged = dict(getattr(cfg, key))
            merged.update(value)
            value = merged
        setattr(cfg, key, value)
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    if not isinstance(cfg.beta, list):
        cfg.beta = [cfg.beta]
    for name in ("beta", "volumes", "times", "orlicz", "blocks"):
        if not isinstance(getattr(cfg, name), list) or not getattr(cfg, name):
            raise ConfigError(f"config field {name!r} must be a non-empty list")
    for name in ("p", "s"):
        grid = cfg.norm_grid.get(name)
        if not isinstance(grid, list) or not grid:
            raise ConfigError(f"config field 'norm_grid.{name}' must be a non-empty list")
    if any(not isinstance(b, (int, float)) or b < 0 for b in cfg.beta):
        raise ConfigError("config field 'beta' must hold non-negative numbers")
    if any(not isinstance(p, (int, float)) or p < 1 for p in cfg.norm_grid["p"]):
        raise ConfigError("config field 'norm_grid.p' must hold numbers >= 1")
    if any(not isinstance(s, (int, float)) or not 0 <= s <= 1 for s in cfg.norm_grid["s"]):
        raise ConfigError("config field 'norm_grid.s' must hold numbers in [0, 1]")
    if not isinstance(cfg.seed, int) or cfg.seed < 0:
        raise ConfigError("config field 'seed' must be a non-negative integer")
    if not isinstance(cfg.samples, int) or cfg.samples < 1:
        raise ConfigError("config field 'samples' must be a positive integer")
    if cfg.output.get("format") not in ("csv", "json"):
        raise ConfigError("config field 'output.format' must be 'csv' or 'json'")
    if cfg.potential.get("type") not in ("ising", "heisenberg", "custom"):
        raise ConfigError("config field 'potential.type' must be ising, heisenberg or custom")
    try:
        for spec in cfg.orlicz:
            OrliczFunction.from_spec(spec)
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"config field 'orlicz': {exc}") from exc


def config_to_dict(cfg: ExperimentConfig) -> dict:
    return dataclasses.asdict(cfg)


def load_config(path) -> ExperimentConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return config_from_dict(doc)


def dump_config(cfg: ExperimentConfig, path) -> None:
    Path(path).write_text(json.dumps(config_to_dict(cfg), indent=2, sort_keys=True))


def _config_hash(cfg: ExperimentConfig) -> str:
    blob = json.dumps(config_to_dict(cfg), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


# -- result tables ------------------------------------------------------------


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[list[Any]] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    passed: bool = True

    def add(self, *row):
        if len(row) != len(self.columns):
            raise ValueError(f"row has {len(row)} entries, table has {len(self.columns)} columns")
        self.rows.append(list(row))

    def column(self, name: str) -> list:
        k = self.columns.index(name)
        return [r[k] for r in self.rows]


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_table(table: ResultTable, path, fmt: str = "csv") -> None:
    """CSV (header plus rows, metadata in ``<path>.meta.json``) or one JSON document."""
    path = Path(path)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(table.columns)
        for row in table.rows:
            w.writerow([_fmt(x) for x in row])
        path.write_text(buf.getvalue())
        meta = dict(table.metadata, passed=bool(table.passed))
        Path(str(path) + ".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True))
    elif fmt == "json":
        doc = {"columns": table.columns,
               "rows": [[_json_scalar(x) for x in r] for r in table.rows],
               "metadata": table.metadata, "passed": bool(table.passed)}
        path.write_text(json.dumps(doc, indent=1))
    else:
        raise ValueError(f"unknown table format {fmt!r}")


def _json_scalar(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return x


def read_table(path, fmt: str = "csv") -> ResultTable:
    path = Path(path)
    if fmt == "json":
        doc = json.loads(path.read_text())
        return ResultTable(doc["columns"], doc["rows"], doc["metadata"], doc["passed"])
    rows = list(csv.reader(io.StringIO(path.read_text())))
    meta_path = Path(str(path) + ".meta.json")
    meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    passed = meta.pop("passed", True)

    def parse(x):
        for conv in (int, float):
            try:
                return conv(x)
            except ValueError:
                pass
        return {"true": True, "false": False}.get(x, x)

    return ResultTable(rows[0], [[parse(x) for x in r] for r in rows[1:]], meta, passed)


# -- builders -----------------------------------------------------------------


def build_potential(cfg: ExperimentConfig) -> Potential:
    spec, lat = cfg.potential, cfg.lattice
    kind = spec["type"]
    if kind in ("ising", "heisenberg"):
        if lat.get("n", 2) != 2:
            raise ConfigError("ising/heisenberg potentials need site dimension n = 2")
        if kind == "ising":
            J = spec.get("J", spec.get("Jz", 1.0))
            return potential_heisenberg(0.0, 0.0, J, spec.get("h", 0.0), d=lat["d"])
        return potential_heisenberg(spec.get("Jx", 1.0), spec.get("Jy", 1.0), spec.get("Jz", 1.0),
                                    spec.get("h", 0.0), d=lat["d"])
    terms = []
    for term in spec.get("terms") or []:
        if isinstance(term, str):
            op = load_operator(term)
        elif isinstance(term, dict) and "file" in term:
            op = load_operator(term["file"])
        else:
            op = operator_from_dict(term)
        terms.append((op.support, op.matrix))
    if not terms:
        raise ConfigError("config field 'potential.terms' must list at least one operator")
    return Potential(tuple(terms), d=lat["d"], n=lat["n"], range=spec.get("range"))


def _sites(entry, d):
    if isinstance(entry, int):
        return [(entry,) + (0,) * (d - 1)]
    if entry and isinstance(entry[0], int) and len(entry) == d:
        return [tuple(entry)]
    return [tuple(s) if not isinstance(s, int) else (s,) for s in entry]


def build_volumes(cfg: ExperimentConfig) -> list[Region]:
    d = cfg.lattice["d"]
    out = []
    for v in cfg.volumes:
        if isinstance(v, int):
            out.append(Region.chain(v, d=d))
        else:
            out.append(Region([tuple(s) if not isinstance(s, int) else (s,) + (0,) * (d - 1)
                               for s in v]))
    return out


def build_observable(cfg: ExperimentConfig) -> LocalOperator:
    spec, lat = cfg.observable, cfg.lattice
    d, n = lat["d"], lat["n"]
    if "file" in spec:
        return load_operator(spec["file"])
    if "operator" in spec:
        return operator_from_dict(spec["operator"])
    name = spec.get("name", "z")
    sites = spec.get("sites", spec.get("site", [0]))
    region = Region(_sites(sites, d))
    if name in ("identity", "1"):
        return identity(region, n)
    if name == "random":
        return random_hermitian(region, spec.get("seed", cfg.seed), n)
    if n != 2:
        raise ConfigError("named Pauli observables need n = 2")
    try:
        single = pauli(name)
    except KeyError as exc:
        raise ConfigError(f"config field 'observable.name': unknown observable {name!r}") from exc
    m = np.eye(1)
    for _ in region.sites:
        m = np.kron(m, single)
    return LocalOperator(region, m, 2)


# -- subcommands --------------------------------------------------------------


def _cmd_norms(cfg):
    phi, f = build_potential(cfg), build_observable(cfg)
    t = ResultTable(["beta", "volume_size", "p", "s", "norm"])
    for beta in cfg.beta:
        for vol in build_volumes(cfg):
            rho = gibbs_density(phi, vol, beta)
            for p in cfg.norm_grid["p"]:
                for s in cfg.norm_grid["s"]:
                    t.add(float(beta), len(vol), float(p), float(s), lps_norm(f, rho, p, s))
    return t


def _cmd_monotonicity(cfg):
    phi, f = build_potential(cfg), build_observable(cfg)
    vols = build_volumes(cfg)
    tol = cfg.tolerances["monotonicity"]
    t = ResultTable(["beta", "volume_size", "p", "s", "norm", "non_increasing"])
    for beta in cfg.beta:
        for p in cfg.norm_grid["p"]:
            for s in cfg.norm_grid["s"]:
                seq = monotonicity_sweep(phi, beta, f, vols, p, s)
                ok = all(b <= a + tol for a, b in zip(seq, seq[1:]))
                # asserted for p >= 2 only; smaller p is recorded
                if p >= 2 and not ok:
                    t.passed = False
                for vol, val in zip(vols, seq):
                    t.add(float(beta), len(vol), float(p), float(s), val, ok)
    return t


def _block_regions(cfg):
    d = cfg.lattice["d"]
    return [Region(_sites(b, d)) for b in cfg.blocks]


def _cmd_semigroup(cfg):
    phi, f = build_potential(cfg), build_observable(cfg)
    vol = build_volumes(cfg)[-1]
    tol = cfg.tolerances["semigroup"]
    t = ResultTable(["beta", "t", "expectation", "distance_to_equilibrium"])
    for beta in cfg.beta:
        rho = gibbs_density(phi, vol, beta)
        L = markov_generator(*(block_spin_gce(rho, X) for X in _block_regions(cfg)))
        eq = gibbs_expectation(rho, f).real
        base = None
        for time_ in cfg.times:
            pf = semigroup_apply(L, f, time_)
            ex = gibbs_expectation(rho, pf).real
            diff = pf - eq * identity(vol, f.n)
            dist = math.sqrt(max(kms_inner(diff, diff, rho, 0.5).real, 0.0))
            if abs(ex - eq) > tol:
                t.passed = False
            if base is None:
                base = dist
            elif dist > base * (1 + tol) + tol:
                t.passed = False
            t.add(float(beta), float(time_), ex, dist)
    return t


def _cmd_equivalence(cfg):
    phi = build_potential(cfg)
    X = _block_regions(cfg)[0]
    factor = cfg.tolerances["equivalence_factor"]
    t = ResultTable(["beta", "volume_size", "c"])
    for beta in cfg.beta:
        cs = []
        for vol in build_volumes(cfg):
            rho = gibbs_density(phi, vol, beta)
            c = equivalence_constant(rho, marginal_density(rho, X))
            cs.append(c)
            t.add(float(beta), len(vol), c)
        if cs[-1] >= factor * cs[0]:
            t.passed = False
    return t


def _cmd_orlicz(cfg):
    vol = build_volumes(cfg)[0]
    rng = np.random.default_rng(cfg.seed)
    t = ResultTable(["sample", "phi", "luxemburg", "ddp", "lemma_residual"])
    lemma_tol, ddp_tol = cfg.tolerances["lemma"], cfg.tolerances["ddp"]
    for k in range(cfg.samples):
        f = random_hermitian(vol, rng, cfg.lattice["n"])
        for spec in cfg.orlicz:
            phi = OrliczFunction.from_spec(spec)
            lux, ddp = luxemburg_norm(f, phi), ddp_norm(f, phi)
            lhs, rhs = trace_phi_sides(f, phi)
            if math.isinf(lhs) and math.isinf(rhs):
                res = 0.0
            else:
                res = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)
            if res > lemma_tol or abs(lux - ddp) > ddp_tol * max(1.0, lux):
                t.passed = False
            t.add(k, phi.label(), lux, ddp, res)
    return t


def _contraction_maps(vol: Region, n: int, rng):
    dim = n ** len(vol)
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
    q2, _ = np.linalg.qr(rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
    p = rng.uniform(0.2, 0.8)
    return [
        ("inner_automorphism", inner_automorphism(q, vol, n)),
        ("transpose", transpose_map(vol, n)),
        ("kraus_pair", kraus_map([math.sqrt(p) * q, math.sqrt(1 - p) * q2], vol, n)),
        ("pure_isometry", kraus_map([q2], vol, n)),
    ]


def _cmd_contraction(cfg):
    vol = build_volumes(cfg)[0]
    rng = np.random.default_rng(cfg.seed)
    tol = cfg.tolerances["contraction"]
    t = ResultTable(["map", "class", "phi", "bound", "max_ratio", "min_ratio",
                     "step_violation", "passed"])
    for name, T in _contraction_maps(vol, cfg.lattice["n"], rng):
        for spec in cfg.orlicz:
            phi = OrliczFunction.from_spec(spec)
            rep = contraction_report(T, phi, samples=cfg.samples, seed=cfg.seed)
            ok = rep.passed(tol)
            t.passed = t.passed and bool(ok)
            t.add(name, rep.map_class, phi.label(), rep.bound, rep.max_ratio, rep.min_ratio,
                  rep.step_violation, ok)
    t.metadata["bounds"] = "classes 2-3: derived bounds, not stated in closed form by the theory"
    return t


def _cmd_selftest(cfg):
    """Compact property suite over the configured model."""
    tol = cfg.tolerances
    phi = build_potential(cfg)
    vols = build_volumes(cfg)
    t = ResultTable(["check", "value", "tolerance", "passed"])

    def record(name, value, bound):
        ok = bool(value <= bound)
        t.passed = t.passed and ok
        t.add(name, float(value), float(bound), ok)

    rng = np.random.default_rng(cfg.seed)
    small = [v for v in vols if len(v) <= 3] or vols[:1]
    worst = 0.0
    for vol in small:
        for _ in range(cfg.samples):
            f = random_hermitian(vol, rng, cfg.lattice["n"])
            for site in vol.sites:
                tr = normalized_trace(partial_trace(f, Region([site])))
                worst = max(worst, abs(tr - normalized_trace(f)))
    record("trace_compatibility", worst, 1e-12)

    worst = 0.0
    for beta in cfg.beta:
        for vol in vols:
            rho = gibbs_density(phi, vol, beta)
            one = identity(vol, cfg.lattice["n"])
            for p in cfg.norm_grid["p"]:
                for s in cfg.norm_grid["s"]:
                    worst = max(worst, abs(lps_norm(one, rho, p, s) - 1))
    record("norm_unitality", worst, tol["unitality"])

    mono = _cmd_monotonicity(cfg)
    record("volume_monotonicity_failures", 0.0 if mono.passed else 1.0, 0.0)

    vol = next((v for v in vols if len(v) <= 4), vols[0])
    X = _block_regions(cfg)[0]
    rep_u = rep_p = rep_s = 0.0
    for beta in cfg.beta:
        rho = gibbs_density(phi, vol, beta)
        rep = gce_property_report(block_spin_gce(rho, X), rho, samples=cfg.samples,
                                  seed=cfg.seed)
        rep_u, rep_p, rep_s = max(rep_u, rep.unital), max(rep_p, rep.positivity), \
            max(rep_s, rep.symmetry)
    record("gce_unital", rep_u, tol["gce_unital"])
    record("gce_positivity", rep_p, tol["gce_positivity"])
    record("gce_symmetry", rep_s, tol["gce_symmetry"])

    sg = _cmd_semigroup(cfg)
    record("semigroup_invariance_failures", 0.0 if sg.passed else 1.0, 0.0)
    eqv = _cmd_equivalence(cfg)
    record("equivalence_growth_failures", 0.0 if eqv.passed else 1.0, 0.0)
    orl = _cmd_orlicz(cfg)
    record("lemma_residual", max(orl.column("lemma_residual")), tol["lemma"])
    record("ddp_vs_luxemburg", max(abs(a - b) for a, b in
                                   zip(orl.column("luxemburg"), orl.column("ddp"))), tol["ddp"])
    con = _cmd_contraction(cfg)
    record("contraction_failures", float(sum(not ok for ok in con.column("passed"))), 0.0)
    return t


_COMMANDS = {
    "norms": _cmd_norms,
    "monotonicity": _cmd_monotonicity,
    "semigroup": _cmd_semigroup,
    "equivalence": _cmd_equivalence,
    "orlicz": _cmd_orlicz,
    "contraction": _cmd_contraction,
    "selftest": _cmd_selftest,
}


def run(subcommand: str, cfg: ExperimentConfig | None = None) -> ResultTable:
    """Run one experiment; ``table.passed`` is false iff one of its checks failed."""
    if subcommand not in _COMMANDS:
        raise ConfigError(f"unknown subcommand {subcommand!r}; choose from {', '.join(SUBCOMMANDS)}")
    cfg = cfg or default_config()
    start = time.perf_counter()
    table = _COMMANDS[subcommand](cfg)
    table.metadata.update({
        "subcommand": subcommand,
        "config_hash": _config_hash(cfg),
        "tool_version": __version__,
        "wall_time": time.perf_counter() - start,
    })
    return table
