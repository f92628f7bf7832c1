"""Command-line front end: bundled configurations, suite runs and
deterministic report export.

    schiffer run <config.json | bundled name> [--basis-size N] [--tolerance T] [--out DIR]
    schiffer list-scenarios
    schiffer verify --suite <id> --config <path | bundled name>

Exit codes: 0 all suites pass, 1 a suite failed, 2 the configuration is
invalid (the message names the offending JSON path), 3 an index did not
stabilize across basis sizes.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import platform
import sys
import time
from importlib import resources
from pathlib import Path

EXIT_OK, EXIT_FAIL, EXIT_SCHEMA, EXIT_UNSTABLE = 0, 1, 2, 3
THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


# ---------------------------------------------------------------- resources

def _data(sub: str):
    return resources.files("schiffer").joinpath(sub)


def load_schema(kind: str = "config") -> dict:
    return json.loads(_data("schemas").joinpath(f"{kind}.schema.json").read_text())


def bundled_configs() -> dict:
    """Bundled configurations by name."""
    out = {}
    for f in sorted(_data("configs").iterdir(), key=lambda p: p.name):
        if f.name.endswith(".json"):
            cfg = json.loads(f.read_text())
            out[cfg["name"]] = cfg
    return out


def list_scenarios() -> str:
    return "\n".join(f"{name:20s} {cfg.get('description', '')}" for name, cfg in bundled_configs().items())


# ---------------------------------------------------------------- config handling

def _pointer(parts) -> str:
    return "/" + "/".join(str(p) for p in parts)


def validate_config(cfg) -> None:
    """Raise ConfigError naming the JSON path of the first violation."""
    import jsonschema
    v = jsonschema.Draft202012Validator(load_schema("config"))
    errs = sorted(v.iter_errors(cfg), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errs:
        e = errs[0]
        path = _pointer(e.absolute_path)
        if e.validator == "required":
            missing = [k for k in e.validator_value if k not in (e.instance or {})]
            path = _pointer(list(e.absolute_path) + missing[:1])
        raise ConfigError(path, e.message)


def read_config(source: str) -> dict:
    """Parse a config path or bundled name and validate it."""
    p = Path(source)
    if p.exists():
        try:
            cfg = json.loads(p.read_text())
        except json.JSONDecodeError as e:
            raise ConfigError("/", f"invalid JSON ({e.msg} at line {e.lineno})") from e
    else:
        name = p.stem if p.suffix == ".json" else source
        configs = bundled_configs()
        if name not in configs:
            raise ConfigError("/", f"no such file or bundled scenario {source!r}")
        cfg = configs[name]
    validate_config(cfg)
    return cfg


def _complex(v) -> complex:
    return complex(v[0], v[1]) if isinstance(v, list) else complex(v)


def build_from_config(cfg: dict):
    from .geometry import CurveSpec, GeometryError, SurfaceDescriptor, build_complex
    s = cfg["surface"]
    try:
        surface = SurfaceDescriptor(s["kind"], _complex(s.get("tau", 1j)))
    except GeometryError as e:
        raise ConfigError("/surface", str(e)) from e
    curves = []
    for i, c in enumerate(cfg["curves"]):
        kw = dict(c)
        for key in ("center",):
            if key in kw:
                kw[key] = _complex(kw[key])
        if "semi_axes" in kw:
            kw["semi_axes"] = tuple(kw["semi_axes"])
        if "vertices" in kw:
            kw["vertices"] = tuple(_complex(v) for v in kw["vertices"])
        try:
            curves.append(CurveSpec(**kw))
        except GeometryError as e:
            raise ConfigError(f"/curves/{i}", str(e)) from e
    sides = {int(k): v for k, v in cfg.get("sides", {}).items()} or None
    try:
        return build_complex(surface, curves, sides)
    except GeometryError as e:
        raise ConfigError("/curves", str(e)) from e


# ---------------------------------------------------------------- suites

def _tolerances(cfg, override):
    from .analysis import DEFAULT_TOL
    tol = dict(DEFAULT_TOL)
    tol.update(cfg.get("tolerances", {}))
    if override is not None:
        tol = {k: float(override) for k in tol}
    return tol


def _identity(cx, cfg, suite, N, tol, ops):
    from . import analysis as A
    r = A.run_identity_suite(cx, suite, N=N, config_id=cfg["name"], tol=tol[suite], ops=ops)
    return r.to_dict(), r.passed, False, {}


def _jump(cx, cfg, suite, N, tol, ops):
    from . import analysis as A
    q = _complex(cfg["q"]) if "q" in cfg else None
    r = A.run_jump_suite(cx, q=q, N=max(N, 8), resolution=cfg.get("resolution", 32),
                         config_id=cfg["name"], tol=tol["jump"])
    return r.to_dict(), r.passed, False, {}


def _harmonic(cx, cfg, suite, N, tol, ops):
    from . import analysis as A
    r = A.run_harmonic_measure_suite(cx, N=N, resolution=cfg.get("resolution", 32), config_id=cfg["name"],
                                     tol=tol["harmonic_measure"])
    return r.to_dict(), r.passed, False, {}


def _index(cx, cfg, suite, N, tol, ops):
    from . import analysis as A
    r = A.index_experiment(cx, N=N, ops=ops)
    stable = bool(r.diagnostics["stable"])
    ok = stable and r.diagnostics["coker_cross_check"]
    if r.restricted_sigma_min is not None:
        ok = ok and r.restricted_sigma_min > r.rank_tol
    d = r.to_dict()
    d["expected_index"] = cx.piece(1).genus - cx.piece(2).genus if not _capped(cx) else \
        1 - len(cx.piece(1).components) - cx.genus
    ok = ok and d["index"] == d["expected_index"]
    d["pass"] = bool(ok)
    return d, ok, not stable, {"singular_values_T12": r.singular_values}


def _capped(cx):
    return all(c.kind == "cap" for c in cx.piece(1).components)


def _cohomology(cx, cfg, suite, N, tol, ops):
    from . import analysis as A
    forms, names = A.default_test_forms(cx, N)
    out, ok = {}, True
    for piece in (2, 1):
        r = A.cohomology_periods(cx, forms, piece, N, names, tol=tol["period"], ops=ops)
        out[f"piece {piece}"] = r.to_dict()
        ok = ok and r.passed
    out["pass"] = ok
    return out, ok, False, {}


def _hc(cx, cfg, suite, N, tol, ops):
    from . import analysis as A
    out, ok = {}, True
    for k in (1, 2):
        pairs = A.hc_boundary_pairings(cx, k)
        vals = {}
        for name, (rounded, raw) in pairs.items():
            close = abs(raw - rounded) < 1e-10 and rounded in (-1, 0, 1)
            ok = ok and close
            vals[name] = {"value": [raw.real, raw.imag], "rounded": rounded}
        out[f"piece {k}"] = vals
    for cyc in A.surface_cycles(cx):
        H = A.build_HC(cx, cyc)
        for label, alpha in (("dz", A.ConstantForm(1.0, 0.0, H.area)), ("dzbar", A.ConstantForm(0.0, 1.0, H.area))):
            err = abs(alpha.inner(H.star()) - alpha.integrate(cyc))
            out[f"reproducing {cyc.label} on {label}"] = err
            ok = ok and err < 1e-10
    out["pass"] = ok
    return out, ok, False, {}


def _decomposition(cx, cfg, suite, N, tol, ops):
    import numpy as np
    from . import analysis as A, bases as B
    T12, R2 = ops.T(1, 2, N), ops.R(2, N)
    cod = T12.codomain
    out, ok = {}, True
    g = np.zeros(T12.shape[1], dtype=complex)
    g[min(1, len(g) - 1)] = 1.0
    cases = {"R2 dz": (R2.entries[:, 0], ("tau",)), "T12 of a basis element": (T12.entries @ g, ("gamma",))}
    for name, (coef, parts) in cases.items():
        r = A.capped_decomposition_check(cx, B.FormVector(cod, coef), N, ops=ops)
        d = r.to_dict()
        ok = ok and r.residual < 1e-6
        if "gamma" in parts:
            err = float(np.linalg.norm(r.gamma - g))
            d["gamma_error"] = err
            ok = ok and err < 1e-6 and (r.inverse_check is None or r.inverse_check < 1e-6)
        out[name] = d
    out["pass"] = ok
    return out, ok, False, {}


def _probe(cx, cfg, suite, N, tol, ops):
    from . import analysis as A
    pcfg = cfg.get("probe")
    if not pcfg:
        raise ConfigError("/probe", "the quasicircle_probe suite needs a probe section")
    sizes = tuple(pcfg.get("basis_sizes", (12, 16)))
    floor = float(pcfg.get("floor", 0.05))
    out, ok, reports = {}, True, {}
    for fam in pcfg["families"]:
        make = A.ellipse_family if fam["family"] == "ellipse" else A.cusp_family
        r = A.quasicircle_probe(*make(fam["parameters"]), basis_sizes=sizes, family=fam["family"])
        reports[fam["family"]] = r
        d = r.to_dict()
        fam_ok = r.trend_stable and all(r.decreasing.values())
        if fam["family"] == "ellipse":
            d["floor"] = min(r.sigma_min[sizes[-1]])
            fam_ok = fam_ok and d["floor"] > floor
        d["pass"] = bool(fam_ok)
        out[fam["family"]] = d
        ok = ok and fam_ok
    if "ellipse" in reports and "cusp" in reports:
        ell_floor = min(reports["ellipse"].sigma_min[sizes[-1]])
        final = reports["cusp"].sigma_min[sizes[-1]][-1]
        below = final < 0.5 * ell_floor
        out["cusp below half the ellipse floor"] = {"final": final, "half_floor": 0.5 * ell_floor,
                                                   "basis_size": sizes[-1], "pass": below}
        ok = ok and below
    out["pass"] = bool(ok)
    return out, ok, False, {}


SUITE_RUNNERS = {
    "adjoint": _identity, "quadratic_I": _identity, "quadratic_II": _identity, "quadratic_III": _identity,
    "schiffer_vanishing": _identity, "conformal_invariance": _identity, "jump": _jump,
    "harmonic_measure": _harmonic, "index": _index, "cohomology": _cohomology, "hc_pairings": _hc,
    "capped_decomposition": _decomposition, "quasicircle_probe": _probe,
}


# ---------------------------------------------------------------- export

def _fmt(x) -> str:
    if isinstance(x, bool) or x is None:
        return json.dumps(x)
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            return "null"
        s = format(x, ".17g")
        return s if any(ch in s for ch in ".en") else s + ".0"
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, complex):
        return _fmt([x.real, x.imag])
    if isinstance(x, dict):
        items = sorted((str(k), v) for k, v in x.items())
        return "{" + ", ".join(f"{json.dumps(k)}: {_fmt(v)}" for k, v in items) + "}"
    if isinstance(x, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    try:  # numpy scalars and arrays
        import numpy as np
        if isinstance(x, np.ndarray):
            return _fmt(x.tolist())
        if isinstance(x, np.generic):
            return _fmt(x.item())
    except ImportError:  # pragma: no cover
        pass
    raise TypeError(f"cannot export {type(x).__name__}")


def export_json(obj) -> str:
    """Deterministic JSON: keys sorted, floats with 17 significant digits."""
    return _fmt(obj) + "\n"


def export_csv(singular_values) -> str:
    rows = ["index,sigma"] + [f"{i},{format(float(s), '.17g')}" for i, s in enumerate(singular_values)]
    return "\n".join(rows) + "\n"


def environment() -> dict:
    import numpy
    import scipy
    from importlib.metadata import PackageNotFoundError, version
    try:
        pkg = version("artifact")
    except PackageNotFoundError:  # running from a source tree
        pkg = "source"
    return {"precision": "float64 / complex128", "python": platform.python_version(),
            "numpy": numpy.__version__, "scipy": scipy.__version__, "package": pkg}


# ---------------------------------------------------------------- orchestration

def run_config(cfg: dict, basis_size: int | None = None, tolerance: float | None = None,
               suites=None):
    """Run the selected suites; returns (report dict, timings dict, csv dumps)."""
    from .analysis import OperatorCache
    cx = build_from_config(cfg)
    N = int(basis_size or cfg.get("basis_size", 12))
    tol = _tolerances(cfg, tolerance)
    ops = OperatorCache(cx)
    results, timings, dumps = [], {}, {}
    unstable = False
    for suite in suites or cfg["suites"]:
        t0 = time.perf_counter()
        entry = {"suite": suite}
        try:
            res, ok, unst, extra = SUITE_RUNNERS[suite](cx, cfg, suite, N, tol, ops)
            entry.update({"result": res, "pass": bool(ok), "unstable": bool(unst)})
            unstable = unstable or unst
            dumps.update({f"{suite}_{k}": v for k, v in extra.items()})
        except ConfigError:
            raise
        except Exception as e:  # a suite that cannot run is a failed suite
            entry.update({"result": None, "pass": False, "error": f"{type(e).__name__}: {e}"})
        timings[suite] = time.perf_counter() - t0
        results.append(entry)
    passed = all(r["pass"] for r in results)
    code = EXIT_UNSTABLE if unstable else (EXIT_OK if passed else EXIT_FAIL)
    report = {"config": cfg["name"], "pass": passed, "exit_code": code, "basis_size": N,
              "resolution": int(cfg.get("resolution", 32)), "tolerances": tol,
              "environment": environment(), "suites": results}
    return report, timings, dumps


def write_outputs(report, timings, dumps, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(export_json(report))
    # wall-clock lives apart from the report so that reports stay byte-identical
    (out_dir / "timings.json").write_text(export_json({"wall_clock_seconds": timings,
                                                       "finished": time.strftime("%Y-%m-%dT%H:%M:%S")}))
    for name, sv in dumps.items():
        (out_dir / f"{name}.csv").write_text(export_csv(sv))


def _apply_threads():
    n = os.environ.get("SCHIFFER_THREADS")
    if not n:
        return None
    for var in THREAD_VARS:
        os.environ.setdefault(var, n)
    try:
        from threadpoolctl import threadpool_limits
        return threadpool_limits(int(n))
    except ImportError:
        return None


def _summary(report) -> str:
    lines = []
    for s in report["suites"]:
        flag = "PASS" if s["pass"] else ("ERROR" if "error" in s else "FAIL")
        lines.append(f"{flag:5s} {s['suite']}" + (f"  ({s['error']})" if "error" in s else ""))
        res = s.get("result") or {}
        for rec in res.get("records", []):
            lines.append(f"      {'ok ' if rec['pass'] else 'bad'} {rec['identity']}: "
                         f"{rec['residual']:.3e} < {rec['tolerance']:.1e}")
    return "\n".join(lines)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="schiffer", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run every suite of a configuration")
    p_run.add_argument("config")
    p_run.add_argument("--basis-size", type=int)
    p_run.add_argument("--tolerance", type=float)
    p_run.add_argument("--out", type=Path)
    sub.add_parser("list-scenarios", help="list bundled configurations")
    p_ver = sub.add_parser("verify", help="run a single suite")
    p_ver.add_argument("--suite", required=True, choices=sorted(SUITE_RUNNERS))
    p_ver.add_argument("--config", required=True)
    p_ver.add_argument("--basis-size", type=int)
    p_ver.add_argument("--tolerance", type=float)
    args = parser.parse_args(argv)

    if args.command == "list-scenarios":
        print(list_scenarios())
        return EXIT_OK
    _apply_threads()
    try:
        cfg = read_config(args.config)
        if args.command == "run":
            report, timings, dumps = run_config(cfg, args.basis_size, args.tolerance)
            out = args.out or Path(cfg.get("output", Path("schiffer_runs") / cfg["name"]))
            write_outputs(report, timings, dumps, out)
            print(_summary(report))
            print(f"report written to {out / 'report.json'}")
        else:
            report, _, _ = run_config(cfg, args.basis_size, args.tolerance, suites=[args.suite])
            print(_summary(report))
    except ConfigError as e:
        print(f"invalid configuration at {e.path}: {e.message}", file=sys.stderr)
        return EXIT_SCHEMA
    return report["exit_code"]


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
