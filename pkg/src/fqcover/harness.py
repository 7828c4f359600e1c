"""Experiment harness: self-tests, sweeps, sampling campaigns, reports.

Reproducibility contract: a command with a fixed spec and seed produces a
byte-identical JSON report across runs and across worker counts.  Three
things make that work:

* the RNG is Philox (counter-based): every sampled object gets its own
  stream keyed by (seed; sample index, size, purpose tag), so sharding
  the sample indices over workers cannot change what is drawn;
* workers are sharded over contiguous index ranges and merged by
  addition / sorted concatenation, both order-independent;
* wall-clock timing is printed to stderr by the CLI and never enters the
  JSON body.

Integers with absolute value >= 2^53 are serialized as decimal strings
so the reports survive JSON readers that parse numbers as doubles.
"""

from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np

from . import __version__
from .covering import (
    ScalarSet,
    bilinear_cover,
    cover_verdict,
    covers_units,
    d_for_epsilon,
    dot_product_set,
    dot_set_lower_bound,
    point_cover_threshold,
    sqrt_subfield,
    sumset_of_products,
)
from .fourier import (
    SpectralFn,
    char_matrix,
    convolve_diff,
    fourier_forward,
    fourier_forward_direct,
    fourier_invert,
    plancherel_check,
)
from .gf import Field, make_field, subfield_indices
from .incidence import (
    PointSet,
    hyperplane_hat_identity_check,
    nu_bruteforce,
    remainder_bound_check,
    second_moment_check,
)

EXHAUSTIVE_BUDGET = 10 ** 7
JSON_INT_LIMIT = 1 << 53

EXIT_OK = 0
EXIT_COUNTEREXAMPLE = 2
EXIT_BAD_SPEC = 3
EXIT_BUDGET = 4

# Purpose tags keep the Philox streams of different sampling loops disjoint.
TAG_COVER = 1
TAG_POINTS = 2
TAG_BILINEAR = 3
TAG_STRUCTURED = 4
TAG_SELFTEST = 5

SELFTEST_ROSTER = ((2, 1), (3, 1), (2, 2), (5, 1), (7, 1),
                   (2, 3), (3, 2), (13, 1), (2, 4), (5, 2))

POINT_CHECKS = ("cover", "remainder", "identities", "second_moment", "keylowerbound")
ALL_CHECKS = POINT_CHECKS + ("bilinear",)


class BadSpecError(ValueError):
    pass


class BudgetExceededError(RuntimeError):
    pass


@dataclass
class ExperimentSpec:
    p: int
    n: int = 1
    d: int = 2
    mode: str = "sample"            # exhaustive | sample | structured
    sizes: tuple[int, int] | None = None
    samples: int = 100
    seed: int = 0
    checks: tuple[str, ...] = ()
    workers: int = 1
    out: str | None = None
    csv: str | None = None

    def validate(self) -> None:
        if self.mode not in ("exhaustive", "sample", "structured"):
            raise BadSpecError(f"unknown mode {self.mode!r}")
        if self.d < 1:
            raise BadSpecError(f"dimension d={self.d} must be >= 1")
        if self.samples < 0:
            raise BadSpecError(f"sample count must be >= 0, got {self.samples}")
        if not (0 <= self.seed < 1 << 64):
            raise BadSpecError("seed must fit in 64 bits")
        if self.sizes is not None and self.sizes[0] > self.sizes[1]:
            raise BadSpecError(f"empty size range {self.sizes}")
        bad = set(self.checks) - set(ALL_CHECKS)
        if bad:
            raise BadSpecError(f"unknown checks: {sorted(bad)}")
        if self.workers < 1:
            raise BadSpecError("workers must be >= 1")

    def echo(self) -> dict:
        # Execution-only fields (workers, output paths) stay out of the echo
        # so reports are byte-identical across worker counts.
        return {
            "p": self.p, "n": self.n, "d": self.d, "mode": self.mode,
            "sizes": list(self.sizes) if self.sizes else None,
            "samples": self.samples, "seed": self.seed,
            "checks": list(self.checks),
        }


@dataclass
class RunReport:
    command: str
    spec: dict
    field: dict | None
    tallies: dict = dc_field(default_factory=dict)
    counterexamples: list = dc_field(default_factory=list)
    extras: dict = dc_field(default_factory=dict)
    status: str = "ok"
    exit_code: int = EXIT_OK

    def flag_counterexamples(self) -> None:
        if self.counterexamples:
            self.status = "counterexample"
            self.exit_code = EXIT_COUNTEREXAMPLE

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "version": __version__,
            "command": self.command,
            "spec": self.spec,
            "field": self.field,
            "tallies": self.tallies,
            "counterexamples": self.counterexamples,
            "extras": self.extras,
            "status": self.status,
            "exit_code": self.exit_code,
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        v = int(obj)
        return str(v) if abs(v) >= JSON_INT_LIMIT else v
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, Fraction):
        return str(obj)
    raise TypeError(f"cannot serialize {type(obj)!r}")


def canonical_json(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, separators=(",", ":"),
                      allow_nan=False) + "\n"


# ----------------------------------------------------------------------
# RNG streams and sampling
# ----------------------------------------------------------------------

_FIELD_CACHE: dict[tuple[int, int], Field] = {}


def get_field(p: int, n: int) -> Field:
    f = _FIELD_CACHE.get((p, n))
    if f is None:
        f = make_field(p, n)
        _FIELD_CACHE[(p, n)] = f
    return f


def stream(seed: int, index: int, size: int, tag: int) -> np.random.Generator:
    """An independent Philox stream for one sampled object."""
    return np.random.Generator(np.random.Philox(key=seed,
                                                counter=[index, size, tag, 0]))


def sample_indices(rng: np.random.Generator, universe: int, size: int) -> np.ndarray:
    return np.sort(rng.choice(universe, size=size, replace=False))


# ----------------------------------------------------------------------
# Structured families
# ----------------------------------------------------------------------

def _divisors(m: int) -> list[int]:
    out = [d for d in range(1, m + 1) if m % d == 0]
    return out


def structured_scalar_sets(field: Field) -> list[tuple[str, ScalarSet]]:
    """Deterministic roster of structured A: subfields, multiplicative
    subgroups, generator-power prefixes."""
    q, g = field.q, field.generator
    out: list[tuple[str, ScalarSet]] = []
    for m in range(1, field.n):
        if field.n % m == 0:
            out.append((f"subfield_{field.p}^{m}",
                        ScalarSet.from_indices(field, subfield_indices(field, m))))
    if q > 2:
        for h in _divisors(q - 1):
            if 1 < h < q - 1:
                elems = [field.pow(g, k * (q - 1) // h) for k in range(h)]
                out.append((f"subgroup_{h}", ScalarSet.from_indices(field, elems)))
    for length in sorted({2, (q - 1) // 2, q - 2}):
        if 1 <= length <= q - 1:
            elems = [field.pow(g, k) for k in range(length)]
            out.append((f"powers_{length}", ScalarSet.from_indices(field, elems)))
    return out


def structured_point_sets(field: Field, d: int, seed: int) -> list[tuple[str, PointSet]]:
    """Deterministic roster of structured E: lines, hyperplanes, grids,
    subgroup grids, a line with random points, small punctured spaces."""
    q = field.q
    out: list[tuple[str, PointSet]] = []
    directions = [1]
    if d >= 2:
        directions += [q, 1 + q]
    for y in directions:
        out.append((f"line_{y}", PointSet.line(field, d, y)))
    if d >= 2:
        for m in directions[:2]:
            out.append((f"hyperplane_{m}", PointSet.perp_hyperplane(field, d, m)))
    grid_a = list(range(1, min(q, 1 + max(2, math.isqrt(q)))))
    out.append(("grid_smallrange", PointSet.grid_of_scalars(field, d, grid_a)))
    if q > 3:
        g = field.generator
        h = max(h for h in _divisors(q - 1) if h < q - 1)
        sub = [field.pow(g, k * (q - 1) // h) for k in range(h)]
        out.append((f"subgroup_grid_{h}", PointSet.grid_of_scalars(field, d, sub)))
    rng = stream(seed, 0, 0, TAG_STRUCTURED)
    extra = sample_indices(rng, q ** d, min(q ** d, max(2, q // 2)))
    out.append(("line_plus_random", PointSet.line(field, d, 1).union(
        PointSet.from_flat(field, d, extra))))
    if q ** d <= 512:
        out.append(("punctured_space", PointSet.full(field, d).strip_origin()))
    return out


# ----------------------------------------------------------------------
# Subset enumeration (colex order) and budget guard
# ----------------------------------------------------------------------

def colex_subsets(universe: int, k: int):
    """All k-subsets of range(universe) in colexicographic order."""
    if k == 0:
        yield ()
        return
    for top in range(k - 1, universe):
        for rest in colex_subsets(top, k - 1):
            yield rest + (top,)


def enumeration_budget(universe: int, sizes: list[int]) -> int:
    return sum(math.comb(universe, s) for s in sizes)


def require_budget(universe: int, sizes: list[int]) -> None:
    total = enumeration_budget(universe, sizes)
    if total > EXHAUSTIVE_BUDGET:
        raise BudgetExceededError(
            f"exhaustive enumeration needs {total} subsets, over the budget "
            f"of {EXHAUSTIVE_BUDGET}")


def _parallel(worker, tasks: list, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [worker(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, tasks))


# ----------------------------------------------------------------------
# selftest
# ----------------------------------------------------------------------

def _selftest_field(field: Field, seed: int) -> dict:
    q = field.q
    results = {}
    a = np.arange(q)

    w = char_matrix(field)
    rows = w.sum(axis=1)
    ortho = abs(rows[0] - q) <= 1e-9 * q and (
        q == 1 or float(np.max(np.abs(rows[1:]))) <= 1e-9 * q)
    results["orthogonality"] = bool(ortho)

    ab = field.add_arrays(a[:, None], a[None, :])
    results["add_commutative"] = bool(np.array_equal(ab, ab.T))
    mul_ab = field.mul_arrays(a[:, None], a[None, :])
    results["mul_commutative"] = bool(np.array_equal(mul_ab, mul_ab.T))
    aa, bb, cc = a[:, None, None], a[None, :, None], a[None, None, :]
    results["add_associative"] = bool(np.array_equal(
        field.add_arrays(field.add_arrays(aa, bb), cc),
        field.add_arrays(aa, field.add_arrays(bb, cc))))
    results["mul_associative"] = bool(np.array_equal(
        field.mul_arrays(field.mul_arrays(aa, bb), cc),
        field.mul_arrays(aa, field.mul_arrays(bb, cc))))
    results["distributive"] = bool(np.array_equal(
        field.mul_arrays(aa, field.add_arrays(bb, cc)),
        field.add_arrays(field.mul_arrays(aa, bb), field.mul_arrays(aa, cc))))
    results["identities"] = bool(
        np.array_equal(field.add_arrays(a, 0), a)
        and np.array_equal(field.mul_arrays(a, 1), a)
        and np.all(field.mul_arrays(a, 0) == 0))
    nz = a[1:]
    results["inverses"] = bool(q == 1 or np.all(
        field.mul_arrays(nz, field.inv_table[nz]) == 1))
    results["frobenius"] = bool(np.array_equal(
        field.pow_arrays(field.add_arrays(a[:, None], a[None, :]), field.p),
        field.add_arrays(field.pow_arrays(a, field.p)[:, None],
                         field.pow_arrays(a, field.p)[None, :])))
    results["trace_surjective"] = bool(
        len(np.unique(field.trace_table)) == field.p)
    return results


def _selftest_transforms(field: Field, d: int, seed: int) -> dict:
    q = field.q
    size = q ** d
    results = {}
    rng = stream(seed, field.q, d, TAG_SELFTEST)

    f = SpectralFn(field, d, rng.standard_normal(size) + 1j * rng.standard_normal(size))
    back = fourier_invert(fourier_forward(f)).values
    results["inversion_roundtrip"] = bool(
        float(np.max(np.abs(back - f.values))) <= 1e-9 * max(1.0, float(np.max(np.abs(f.values)))))

    g = SpectralFn(field, d, rng.standard_normal(size) + 1j * rng.standard_normal(size))
    lhs, rhs = plancherel_check(f, g)
    results["plancherel_random"] = bool(abs(lhs - rhs) <= 1e-9 * (1 + abs(rhs)))

    e_bits = np.zeros(size, dtype=bool)
    e_bits[sample_indices(rng, size, max(1, min(size // 2, 48)))] = True
    e = PointSet(field, d, e_bits)
    ind = e.indicator()
    lhs, rhs = plancherel_check(ind, ind)
    results["plancherel_indicator"] = bool(abs(lhs - rhs) <= 1e-9 * (1 + abs(rhs)))

    ghat = fourier_forward(convolve_diff(ind, ind)).values
    expect = size * np.abs(fourier_forward(ind).values) ** 2
    err = float(np.max(np.abs(ghat - expect)))
    results["diff_convolution_hat"] = bool(err <= 1e-8 * max(1.0, float(np.max(expect))))

    if size ** 2 <= 3 ** 12:
        fast = fourier_forward(f).values
        direct = fourier_forward_direct(f).values
        results["forward_vs_direct"] = bool(float(np.max(np.abs(fast - direct))) <= 1e-9)
    return results


def run_selftest(spec: ExperimentSpec) -> RunReport:
    report = RunReport("selftest", spec.echo(), None)
    fields_meta = []
    failures = []
    passed = checked = 0
    for p, n in SELFTEST_ROSTER:
        field = get_field(p, n)
        fields_meta.append(field.descriptor())
        results = _selftest_field(field, spec.seed)
        for d in (1, 2, 3):
            for name, ok in _selftest_transforms(field, d, spec.seed).items():
                results[f"{name}_d{d}"] = ok
        for name, ok in results.items():
            checked += 1
            passed += ok
            if not ok:
                failures.append({"q": field.q, "check": name})
    report.tallies = {"checked": checked, "passed": passed}
    report.counterexamples = sorted(failures, key=lambda c: (c["q"], c["check"]))
    report.extras = {"roster": fields_meta}
    report.flag_counterexamples()
    return report


# ----------------------------------------------------------------------
# cover-exhaustive
# ----------------------------------------------------------------------

def _cover_exhaustive_task(task) -> dict:
    p, n, d, size, lo, hi = task
    field = get_field(p, n)
    checked = covered = 0
    failures = []
    for subset in itertools.islice(colex_subsets(field.q, size), lo, hi):
        verdict = cover_verdict(ScalarSet.from_indices(field, subset), d)
        checked += 1
        covered += verdict.covers_units
        if verdict.threshold_met and not verdict.covers_units:
            failures.append({"size": size, "subset": list(subset),
                             "missing": verdict.missing[:32]})
    return {"size": size, "checked": checked, "covered": covered,
            "failures": failures}


def _min_threshold_size(q: int, d: int) -> int:
    s = 1
    while s <= q and s ** (2 * d) <= q ** (d + 1):
        s += 1
    return s


def run_cover_exhaustive(spec: ExperimentSpec) -> RunReport:
    field = get_field(spec.p, spec.n)
    q, d = field.q, spec.d
    report = RunReport("cover-exhaustive", spec.echo(), field.descriptor())

    s_min = _min_threshold_size(q, d)
    if spec.sizes is not None:
        sizes = [s for s in range(spec.sizes[0], spec.sizes[1] + 1) if 0 <= s <= q]
    else:
        sizes = list(range(min(s_min, q + 1), q + 1))
    require_budget(q, sizes)

    chunk = 2048
    tasks = []
    for s in sizes:
        total = math.comb(q, s)
        for lo in range(0, total, chunk):
            tasks.append((spec.p, spec.n, d, s, lo, min(lo + chunk, total)))
    results = _parallel(_cover_exhaustive_task, tasks, spec.workers)

    tallies = {}
    failures = []
    for res in results:
        t = tallies.setdefault(res["size"], {"checked": 0, "covered": 0,
                                             "threshold": res["size"] >= s_min})
        t["checked"] += res["checked"]
        t["covered"] += res["covered"]
        failures.extend(res["failures"])
    report.tallies = {str(s): tallies[s] for s in sorted(tallies)}
    report.counterexamples = sorted(failures, key=lambda c: (c["size"], c["subset"]))

    extras = {"threshold_min_size": s_min, "budget": enumeration_budget(q, sizes)}
    if spec.sizes is None and not failures:
        # Empirical scan below the guaranteed range: smallest size at which
        # every subset still covers.  Reported, never asserted.
        empirical = s_min
        remaining = EXHAUSTIVE_BUDGET - enumeration_budget(q, sizes)
        s = s_min - 1
        while s >= 1 and math.comb(q, s) <= remaining:
            remaining -= math.comb(q, s)
            all_cover = True
            for subset in colex_subsets(q, s):
                verdict = cover_verdict(ScalarSet.from_indices(field, subset), d)
                if not verdict.covers_units:
                    all_cover = False
                    break
            if not all_cover:
                break
            empirical = s
            s -= 1
        extras["empirical_all_cover_min_size"] = empirical
        extras["empirical_scan_floor"] = s + 1
    report.extras = extras
    report.flag_counterexamples()
    return report


# ----------------------------------------------------------------------
# cover-sample
# ----------------------------------------------------------------------

def _cover_sample_task(task) -> dict:
    p, n, d, seed, size, lo, hi = task
    field = get_field(p, n)
    checked = covered = 0
    failures = []
    for i in range(lo, hi):
        rng = stream(seed, i, size, TAG_COVER)
        subset = sample_indices(rng, field.q, size)
        verdict = cover_verdict(ScalarSet.from_indices(field, subset), d)
        checked += 1
        covered += verdict.covers_units
        if verdict.threshold_met and not verdict.covers_units:
            failures.append({"size": size, "sample_index": i,
                             "subset": [int(x) for x in subset],
                             "missing": verdict.missing[:32]})
    return {"size": size, "checked": checked, "covered": covered,
            "failures": failures}


def _bilinear_campaign(field: Field, d: int, seed: int, samples: int) -> dict:
    covered_count = 0
    min_cover_ratio = None
    max_noncover_ratio = None
    for i in range(samples):
        rng = stream(seed, i, 0, TAG_BILINEAR)
        a_sets, b_sets = [], []
        for _ in range(2 * d):
            size = int(rng.integers(1, field.q))
            (a_sets if len(a_sets) < d else b_sets).append(
                ScalarSet.from_indices(field, sample_indices(rng, field.q, size)))
        verdict = bilinear_cover(a_sets, b_sets)
        ratio = verdict.extras["ratio"]
        if verdict.covers_units:
            covered_count += 1
            if min_cover_ratio is None or ratio < min_cover_ratio:
                min_cover_ratio = ratio
        elif max_noncover_ratio is None or ratio > max_noncover_ratio:
            max_noncover_ratio = ratio
    return {"samples": samples, "covered": covered_count,
            "min_covering_ratio": min_cover_ratio,
            "max_noncovering_ratio": max_noncover_ratio}


def run_cover_sample(spec: ExperimentSpec) -> RunReport:
    field = get_field(spec.p, spec.n)
    q, d = field.q, spec.d
    report = RunReport("cover-sample", spec.echo(), field.descriptor())

    s_min = _min_threshold_size(q, d)
    if spec.sizes is not None:
        sizes = [s for s in range(spec.sizes[0], spec.sizes[1] + 1) if 0 <= s <= q]
    else:
        sizes = list(range(min(s_min, q + 1), q + 1))

    chunk = 256
    tasks = []
    for s in sizes:
        for lo in range(0, spec.samples, chunk):
            tasks.append((spec.p, spec.n, d, spec.seed, s, lo,
                          min(lo + chunk, spec.samples)))
    results = _parallel(_cover_sample_task, tasks, spec.workers)

    tallies = {}
    failures = []
    for res in results:
        t = tallies.setdefault(res["size"], {"checked": 0, "covered": 0,
                                             "threshold": res["size"] >= s_min})
        t["checked"] += res["checked"]
        t["covered"] += res["covered"]
        failures.extend(res["failures"])

    extras = {"threshold_min_size": s_min}
    if spec.mode == "structured":
        structured = []
        for name, a in structured_scalar_sets(field):
            verdict = cover_verdict(a, d)
            structured.append({"name": name, **verdict.to_report_dict()})
            if verdict.threshold_met and not verdict.covers_units:
                failures.append({"size": a.count, "structured": name,
                                 "missing": verdict.missing[:32]})
        extras["structured"] = structured
    if "bilinear" in spec.checks:
        extras["bilinear"] = _bilinear_campaign(field, d, spec.seed, spec.samples)

    report.tallies = {str(s): tallies[s] for s in sorted(tallies)}
    report.counterexamples = sorted(
        failures, key=lambda c: (c["size"], c.get("sample_index", -1), str(c)))
    report.extras = extras
    report.flag_counterexamples()
    return report


# ----------------------------------------------------------------------
# sharpness
# ----------------------------------------------------------------------

def run_sharpness(spec: ExperimentSpec) -> RunReport:
    field = get_field(spec.p, spec.n)
    q, d = field.q, spec.d
    report = RunReport("sharpness", spec.echo(), field.descriptor())
    extras: dict = {}

    if field.n % 2 == 0:
        sub = sqrt_subfield(field)
        closure_ok = True
        for dd in range(1, 7):
            if sumset_of_products(sub, dd) != sub:
                closure_ok = False
                break
        covered, _ = covers_units(sumset_of_products(sub, d))
        extras["sqrt_subfield"] = {
            "size": sub.count,
            "closed_up_to_d6": closure_ok,
            "covers_units": covered,
            "ratio": sub.count / q ** ((d + 1) / (2 * d)),
        }
        if not closure_ok or covered:
            report.counterexamples.append({"structured": "sqrt_subfield",
                                           "size": sub.count})
    else:
        extras["sqrt_subfield"] = "skipped: no subfield of size sqrt(q)"

    best = None
    families = []
    for name, a in structured_scalar_sets(field):
        verdict = cover_verdict(a, d)
        entry = {"name": name, "size": a.count,
                 "covers_units": verdict.covers_units,
                 "ratio": a.count / q ** ((d + 1) / (2 * d))}
        families.append(entry)
        if not verdict.covers_units and (best is None or a.count > best["size"]):
            best = entry
        if verdict.threshold_met and not verdict.covers_units:
            report.counterexamples.append({"structured": name, "size": a.count})
    extras["families"] = families
    extras["largest_noncovering"] = best
    report.tallies = {"families_checked": len(families)}
    report.extras = extras
    report.flag_counterexamples()
    return report


# ----------------------------------------------------------------------
# geometry
# ----------------------------------------------------------------------

def _geometry_check_one(field: Field, d: int, e: PointSet, checks) -> dict:
    """Run the requested point-set checks; returns per-check booleans plus
    the exact remainder sharpness fraction."""
    out: dict = {}
    if "cover" in checks:
        if point_cover_threshold(e):
            covered, missing = covers_units(dot_product_set(e))
            out["cover"] = covered
            if not covered:
                out["cover_missing"] = missing[:32]
        else:
            out["cover"] = None
    core = e.strip_origin()
    prof = None
    if "remainder" in checks:
        rep = remainder_bound_check(core)
        prof = rep.profile
        out["remainder"] = rep.ok
        num = rep.profile.r_numerator(rep.worst_t) ** 2
        den = core.count ** 2 * field.q ** (d + 1)
        out["sharpness_frac"] = (num, den)
    if "identities" in checks:
        hat = hyperplane_hat_identity_check(core)
        ind = core.indicator()
        ghat = fourier_forward(convolve_diff(ind, ind)).values
        expect = field.q ** d * np.abs(fourier_forward(ind).values) ** 2
        gerr = float(np.max(np.abs(ghat - expect))) if ghat.size else 0.0
        gok = gerr <= 1e-8 * max(1.0, float(np.max(expect)) if expect.size else 1.0)
        out["identities"] = hat.ok and gok
    if "second_moment" in checks:
        rep = second_moment_check(core, profile=prof)
        out["second_moment"] = rep.ok
    if "keylowerbound" in checks:
        verdict = dot_set_lower_bound(core)
        out["keylowerbound"] = verdict.threshold_met
    return out


def _geometry_sample_task(task) -> dict:
    p, n, d, seed, size, lo, hi, checks = task
    field = get_field(p, n)
    outcomes = []
    for i in range(lo, hi):
        rng = stream(seed, i, size, TAG_POINTS)
        flats = sample_indices(rng, field.q ** d, size)
        e = PointSet.from_flat(field, d, flats)
        res = _geometry_check_one(field, d, e, checks)
        res["size"] = size
        res["sample_index"] = i
        outcomes.append(res)
    return {"outcomes": outcomes}


def _merge_geometry_outcomes(report: RunReport, outcomes, checks) -> tuple:
    tallies = {c: {"checked": 0, "passed": 0} for c in checks}
    worst = (0, 1, None)  # (numerator, denominator, label)
    for res in outcomes:
        label = res.get("name") or f"size{res['size']}#{res.get('sample_index', 0)}"
        for c in checks:
            val = res.get(c)
            if val is None:
                continue
            tallies[c]["checked"] += 1
            tallies[c]["passed"] += bool(val)
            if not val:
                entry = {"check": c, "case": label}
                if c == "cover":
                    entry["missing"] = res.get("cover_missing", [])
                report.counterexamples.append(entry)
        frac = res.get("sharpness_frac")
        if frac and frac[1] > 0 and frac[0] * worst[1] > worst[0] * frac[1]:
            worst = (frac[0], frac[1], label)
    report.tallies = tallies
    return worst


def run_geometry(spec: ExperimentSpec) -> RunReport:
    field = get_field(spec.p, spec.n)
    q, d = field.q, spec.d
    report = RunReport("geometry", spec.echo(), field.descriptor())
    checks = tuple(c for c in spec.checks if c in POINT_CHECKS) or POINT_CHECKS
    universe = q ** d
    outcomes = []

    if spec.mode == "exhaustive":
        if spec.sizes is not None:
            sizes = [s for s in range(spec.sizes[0], spec.sizes[1] + 1)
                     if 0 <= s <= universe]
        else:
            lo = 1
            while lo <= universe and lo ** 2 <= q ** (d + 1):
                lo += 1
            sizes = list(range(lo, universe + 1))
        require_budget(universe, sizes)
        for s in sizes:
            for subset in colex_subsets(universe, s):
                e = PointSet.from_flat(field, d, list(subset))
                res = _geometry_check_one(field, d, e, checks)
                res["size"] = s
                res["sample_index"] = 0
                res["name"] = f"size{s}_colex{subset}"
                outcomes.append(res)
    else:
        lo, hi = spec.sizes if spec.sizes is not None else (1, min(universe, 100))
        hi = min(hi, universe)
        chunk = 64
        tasks = []
        for s in range(lo, hi + 1):
            for tlo in range(0, spec.samples, chunk):
                tasks.append((spec.p, spec.n, d, spec.seed, s, tlo,
                              min(tlo + chunk, spec.samples), checks))
        for res in _parallel(_geometry_sample_task, tasks, spec.workers):
            outcomes.extend(res["outcomes"])
        if spec.mode == "structured":
            for name, e in structured_point_sets(field, d, spec.seed):
                res = _geometry_check_one(field, d, e, checks)
                res["size"] = e.count
                res["name"] = name
                outcomes.append(res)

    worst = _merge_geometry_outcomes(report, outcomes, checks)
    report.extras = {
        "sharpness": {"max_ratio": worst[0] / worst[1] if worst[2] else 0.0,
                      "numerator": worst[0], "denominator": worst[1],
                      "case": worst[2]},
    }
    report.counterexamples.sort(key=lambda c: (c["check"], str(c["case"])))
    report.flag_counterexamples()
    return report


def geometry_csv_profile(spec: ExperimentSpec, case_label: str | None):
    """Recompute the nu profile of the sharpest case for CSV export.

    The case label encodes how the set was drawn (sample stream, colex
    subset, or structured-family name), so the profile is re-derived
    instead of being carried through the merge.
    """
    import ast

    field = get_field(spec.p, spec.n)
    if case_label is None:
        return None
    if case_label.startswith("size") and "#" in case_label:
        size_s, idx_s = case_label[4:].split("#")
        rng = stream(spec.seed, int(idx_s), int(size_s), TAG_POINTS)
        flats = sample_indices(rng, field.q ** spec.d, int(size_s))
        e = PointSet.from_flat(field, spec.d, flats)
    elif "_colex" in case_label:
        subset = ast.literal_eval(case_label.split("_colex", 1)[1])
        e = PointSet.from_flat(field, spec.d, list(subset))
    else:
        named = dict(structured_point_sets(field, spec.d, spec.seed))
        if case_label not in named:
            return None
        e = named[case_label]
    return nu_bruteforce(e.strip_origin())


# ----------------------------------------------------------------------
# d-of-eps
# ----------------------------------------------------------------------

def run_d_of_eps(eps: Fraction) -> RunReport:
    d_cover, d_proportion = d_for_epsilon(eps)
    report = RunReport("d-of-eps", {"eps": str(Fraction(eps))}, None)
    report.extras = {"d_cover": d_cover, "d_proportion": d_proportion}
    return report
