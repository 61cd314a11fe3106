"""Model files and the batch pipeline behind ``bfvkit run``.

A model file is line oriented::

    [variables]
    pairs = 2
    coordinate = x
    momentum = y

    [constraints]
    x1*y2 - x2*y1

    [bounds]
    N = 4
    D = 4
    K = 3
    order = grevlex

    [pipeline]
    tate
    charge
    check
    cohomology
    quantize

    [observables]
    x1^2 + x2^2
    y1^2 + y2^2
"""
from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field

from .algebra import Element, GeneratorTable
from .brst import Charge, brst_charge, cme_check
from .cohomology import h0_bracket, h0_lift, invariance_check
from .groebner import CacheIntegrityError, PolyRing, atomic_write, cached_ideal
from .quantize import Obstruction, qme_solve
from .tate import Homotopy, Resolution, SliceBounds, delta_apply, homology_classes, koszul_init, tate_extend

STAGES = ("groebner", "tate", "charge", "check", "cohomology", "quantize")
CACHE_ENV = "BFVKIT_CACHE"


class SpecError(ValueError):
    def __init__(self, msg, line=None, column=None):
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + msg)
        self.line, self.column = line, column


@dataclass
class ModelSpec:
    pairs: int = 0
    coordinate: str = "x"
    momentum: str = "y"
    constraints: list = field(default_factory=list)
    observables: list = field(default_factory=list)
    order: str = "grevlex"
    N: int = 4
    D: int = 4
    W: int = 6
    K: int = 3
    pipeline: list = field(default_factory=lambda: list(STAGES))
    name: str = "model"

    @property
    def table(self):
        return GeneratorTable(self.pairs, (), self.coordinate, self.momentum)

    @property
    def ring(self):
        return PolyRing.for_table(self.table, self.order)

    @property
    def bounds(self):
        return SliceBounds(D=self.D, W=self.W)

    def apply_bounds(self, text):
        """Override bounds from ``N=4,D=3,K=2`` style text."""
        for item in filter(None, (s.strip() for s in text.split(","))):
            key, _, val = item.partition("=")
            key = key.strip()
            if key not in ("N", "D", "W", "K"):
                raise SpecError(f"unknown bound {key!r}")
            setattr(self, key, int(val))
        self.validate()

    def validate(self):
        if self.N < 2:
            raise SpecError("N must be at least 2")
        if self.K < 1:
            raise SpecError("K must be at least 1")
        for s in self.pipeline:
            if s not in STAGES:
                raise SpecError(f"unknown pipeline stage {s!r}")

    def canonical(self):
        lines = ["[variables]", f"pairs = {self.pairs}", f"coordinate = {self.coordinate}",
                 f"momentum = {self.momentum}", "", "[constraints]"]
        lines += self.constraints
        lines += ["", "[bounds]", f"N = {self.N}", f"D = {self.D}", f"W = {self.W}", f"K = {self.K}",
                  f"order = {self.order}", "", "[pipeline]"]
        lines += self.pipeline
        if self.observables:
            lines += ["", "[observables]"] + self.observables
        return "\n".join(lines) + "\n"


def parse_spec(text, name="model"):
    spec = ModelSpec(name=name)
    section = None
    pipeline = []
    seen_pipeline = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        stripped = line.strip()
        if not stripped:
            continue
        col = len(line) - len(line.lstrip()) + 1
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise SpecError("unterminated section header", lineno, col)
            section = stripped[1:-1].strip()
            if section not in ("variables", "constraints", "bounds", "pipeline", "observables"):
                raise SpecError(f"unknown section [{section}]", lineno, col + 1)
            seen_pipeline |= section == "pipeline"
            continue
        if section is None:
            raise SpecError("content before the first section", lineno, col)
        if section in ("variables", "bounds"):
            if "=" not in stripped:
                raise SpecError("expected 'key = value'", lineno, col)
            key, _, val = stripped.partition("=")
            key, val = key.strip(), val.strip()
            vcol = line.index(val, line.index("=")) + 1 if val else line.index("=") + 2
            try:
                if section == "variables":
                    if key == "pairs":
                        spec.pairs = int(val)
                    elif key in ("coordinate", "momentum"):
                        if not val.isalpha():
                            raise ValueError
                        setattr(spec, key, val)
                    else:
                        raise SpecError(f"unknown variable setting {key!r}", lineno, col)
                else:
                    if key == "order":
                        PolyRing((), val)
                        spec.order = val
                    elif key in ("N", "D", "W", "K"):
                        setattr(spec, key, int(val))
                    else:
                        raise SpecError(f"unknown bound {key!r}", lineno, col)
            except SpecError:
                raise
            except ValueError:
                raise SpecError(f"bad value {val!r} for {key}", lineno, vcol) from None
        elif section in ("constraints", "observables"):
            getattr(spec, section).append((stripped, lineno, col))
        else:
            pipeline.append(stripped)
    if seen_pipeline:
        spec.pipeline = pipeline
    ring = spec.ring
    for attr in ("constraints", "observables"):
        checked = []
        for text_, lineno, col in getattr(spec, attr):
            try:
                ring.parse(text_)
            except ValueError as exc:
                raise SpecError(str(exc), lineno, col) from None
            checked.append(text_)
        setattr(spec, attr, checked)
    try:
        spec.validate()
    except SpecError as exc:
        raise SpecError(str(exc)) from None
    return spec


def load_spec(path):
    with open(path, encoding="utf-8") as fh:
        name = os.path.splitext(os.path.basename(path))[0]
        return parse_spec(fh.read(), name)


# ---------------------------------------------------------------------------


class Session:
    """Lazily built objects for one model, with optional disk caching."""

    def __init__(self, spec, cache_dir=None):
        self.spec = spec
        self.cache_dir = cache_dir if cache_dir is not None else os.environ.get(CACHE_ENV) or None
        self._ideal = self._koszul = self._res = self._hom = self._charge = None

    @property
    def ideal(self):
        if self._ideal is None:
            ring = self.spec.ring
            gens = [ring.parse(c) for c in self.spec.constraints]
            self._ideal = cached_ideal(gens, ring, self.cache_dir)
        return self._ideal

    @property
    def koszul(self):
        if self._koszul is None:
            self._koszul = koszul_init(self.ideal, self.spec.table)
        return self._koszul

    def _res_cache_path(self):
        s = self.spec
        key = hashlib.sha256(
            (self.ideal.dumps() + f"|N={s.N}|D={s.D}|W={s.W}").encode()
        ).hexdigest()[:24]
        return os.path.join(self.cache_dir, f"resolution-{key}.txt")

    @property
    def resolution(self):
        if self._res is None:
            if self.cache_dir:
                path = self._res_cache_path()
                if os.path.exists(path):
                    self._res = Resolution.loads(read_checked(path), self.ideal)
                    return self._res
            self._res = tate_extend(self.koszul, max(self.spec.N - 1, 1), self.spec.bounds)
            if self.cache_dir:
                write_checked(self._res_cache_path(), self._res.dumps())
        return self._res

    @property
    def homotopy(self):
        if self._hom is None:
            self._hom = Homotopy(self.resolution, self.spec.bounds)
        return self._hom

    @property
    def charge(self):
        if self._charge is None:
            self._charge = brst_charge(self.resolution, self.spec.N, self.homotopy)
        return self._charge


def write_checked(path, text):
    digest = hashlib.sha256(text.encode()).hexdigest()
    atomic_write(path, text + f"checksum {digest}\n")


def read_checked(path):
    with open(path, encoding="utf-8") as fh:
        data = fh.read()
    body, _, tail = data.rpartition("checksum ")
    if not tail.strip() or hashlib.sha256(body.encode()).hexdigest() != tail.strip():
        raise CacheIntegrityError(f"cache file {path} is corrupted")
    return body


def verify_cache(cache_dir):
    """Check every cache file; returns a list of (file, problem)."""
    from .groebner import PolyIdeal

    problems = []
    if not cache_dir or not os.path.isdir(cache_dir):
        return problems
    for name in sorted(os.listdir(cache_dir)):
        path = os.path.join(cache_dir, name)
        try:
            if name.startswith("ideal-"):
                with open(path, encoding="utf-8") as fh:
                    PolyIdeal.loads(fh.read())
            elif name.startswith("resolution-"):
                read_checked(path)
        except (CacheIntegrityError, ValueError, IndexError) as exc:
            problems.append((name, str(exc) or type(exc).__name__))
    return problems


# ---------------------------------------------------------------------------


@dataclass
class Report:
    spec_name: str
    stages: dict = field(default_factory=dict)  # stage -> dict of results
    artifacts: dict = field(default_factory=dict)  # name -> relative path
    timings: dict = field(default_factory=dict)
    ok: bool = True

    def as_dict(self):
        return {"model": self.spec_name, "ok": self.ok, "stages": self.stages,
                "artifacts": self.artifacts}

    def to_json(self):
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"

    def human(self):
        lines = [f"model {self.spec_name}: {'ok' if self.ok else 'FAILED'}"]
        for stage, info in self.stages.items():
            t = self.timings.get(stage)
            head = f"  [{stage}] {info.get('status', '')}" + (f" ({t:.2f}s)" if t is not None else "")
            lines.append(head)
            for k, v in info.items():
                if k != "status":
                    lines.append(f"      {k}: {v}")
        for name, path in self.artifacts.items():
            lines.append(f"  artifact {name}: {path}")
        return "\n".join(lines)


def run(spec, outdir=None, cache_dir=None):
    """Execute the stages of ``spec``; artifacts go to ``outdir`` when given."""
    sess = Session(spec, cache_dir)
    report = Report(spec.name)
    files = {}

    def stage(name, fn):
        t0 = time.perf_counter()
        try:
            info = fn()
        except Obstruction as exc:
            info = {"status": "obstructed", "order": exc.order, "witness": exc.witness.to_expr()}
            report.ok = False
        except Exception as exc:  # stage errors are reported with context
            info = {"status": "error", "error": f"{type(exc).__name__}: {exc}"}
            report.ok = False
        report.stages[name] = info
        report.timings[name] = time.perf_counter() - t0
        return info["status"] not in ("error", "obstructed", "violated")

    def do_groebner():
        ideal = sess.ideal
        files["ideal.txt"] = ideal.dumps()
        return {"status": "ok", "generators": len(ideal.gens), "basis": len(ideal.basis),
                "syzygies": len(ideal.syzygies()), "zero_ideal": ideal.is_zero()}

    def do_tate():
        classes = homology_classes(sess.koszul, -1, spec.bounds) if spec.constraints else []
        res = sess.resolution
        files["resolution.txt"] = res.dumps()
        counts = {str(-l): res.table.count(l) for l in range(1, res.table.depth + 1)}
        return {"status": "ok", "koszul_exact": not classes, "koszul_classes_degree_-1": len(classes),
                "ghosts_by_degree": counts, "extent": res.extent}

    def do_charge():
        ch = sess.charge
        files["charge.txt"] = ch.dumps()
        return {"status": "ok", "N": spec.N, "steps": len(ch.steps), "terms": len(ch.R),
                "residual_zero": not ch.residual, "R": ch.R.to_expr() if len(ch.R) <= 12 else f"{len(ch.R)} terms"}

    def do_check():
        ch = sess.charge
        rr = cme_check(ch.R, spec.N)
        res = sess.resolution
        # on ghosts, d_R reproduces delta modulo antighost terms
        bad = []
        from .brst import d_R_apply
        for g in res.ghosts():
            if g[1] >= spec.N:
                continue
            img = d_R_apply(ch.R, Element.gen(res.table, g, spec.N), spec.N, check=False)
            low = img.filter(lambda m: not any(h[0] == 3 for h, _ in m))
            want = delta_apply(res, Element.gen(res.table, g, spec.N))
            if low != Element(want.terms, res.table, low.N):
                bad.append(res.table.name(g))
        status = "ok" if not rr and not bad else "violated"
        if status != "ok":
            report.ok = False
        return {"status": status, "cme_residual_terms": len(rr), "delta_mismatch": bad}

    def do_cohomology():
        res = sess.resolution
        info = {"status": "ok"}
        if sess.ideal.is_zero():
            info["h0"] = "P (no constraints)"
        obs = []
        ring = spec.ring
        classes = []
        for text in spec.observables:
            p = ring.parse(text)
            ok, _ = invariance_check(p, sess.ideal)
            entry = {"observable": text, "invariant": ok}
            if ok:
                c = h0_lift(p, res, sess.charge.R)
                classes.append((text, c))
                entry["lift"] = c.x.to_expr()
            obs.append(entry)
        brackets = []
        lines = []
        for i in range(len(classes)):
            for j in range(i + 1, len(classes)):
                b = h0_bracket(classes[i][1], classes[j][1])
                brackets.append({"pair": [classes[i][0], classes[j][0]], "bracket_nf": b.to_expr(),
                                 "nonzero_mod_J": bool(b)})
                lines.append(f"{{{classes[i][0]}, {classes[j][0]}}} = {b.to_expr()}")
        info["observables"] = obs
        info["brackets"] = brackets
        files["h0.txt"] = "# degree 0 classes\n" + "".join(
            f"class {t}\n" + "".join("  " + ln + "\n" for ln in c.x.to_text().splitlines())
            for t, c in classes
        ) + "".join(f"bracket {ln}\n" for ln in lines)
        return info

    def do_quantize():
        out = qme_solve(sess.charge.R, spec.N, spec.K, spec.D)
        files["qcharge.txt"] = out.dumps()
        return {"status": "ok", "K": spec.K, "N": spec.N,
                "corrections": sum(1 for u in out.corrections if u), "terms": len(out.r.terms)}

    table = {"groebner": do_groebner, "tate": do_tate, "charge": do_charge, "check": do_check,
             "cohomology": do_cohomology, "quantize": do_quantize}
    for name in STAGES:
        if name == "groebner" or name in spec.pipeline:
            if not stage(name, table[name]):
                break
    files["spec.txt"] = spec.canonical()
    if outdir:
        os.makedirs(outdir, exist_ok=True)
        for fname, text in sorted(files.items()):
            atomic_write(os.path.join(outdir, fname), text)
            report.artifacts[fname.rsplit(".", 1)[0]] = fname
        atomic_write(os.path.join(outdir, "report.json"), report.to_json())
    return report


__all__ = ["ModelSpec", "parse_spec", "load_spec", "run", "Report", "Session", "SpecError",
           "Charge", "verify_cache"]
