"""Batch front end: read a config file, run one check, write a report and artifacts.

Exit status: 0 check passed or certificate produced, 1 property violated (a
witness is written), 2 inconclusive within the bounds, 3 input error.
"""

from __future__ import annotations

import argparse
import dataclasses
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import gallery
from .clopen import Clopen
from .fullgroup import coe_check, return_equivalence_check, twist_action
from .model import (
    BudgetExceeded,
    DEFAULT_BUDGET,
    InvalidInput,
    PathPoint,
    model_from_tables,
    validate_chain,
)
from .records import coe_records, dump_records, return_equiv_records, verify_artifact, witness_records
from .regularity import (
    ascending_chain_probe,
    germ_hausdorff_witness,
    is_adapted,
    kernel_normality_check,
    lqa_violation_search,
    topological_freeness_check,
)

EXIT_PASS, EXIT_VIOLATED, EXIT_INCONCLUSIVE, EXIT_INPUT = 0, 1, 2, 3


class ConfigError(InvalidInput):
    def __init__(self, message, line=None):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


@dataclass
class Entry:
    value: str
    line: int


@dataclass
class RunConfig:
    model: dict
    command: dict
    bounds: dict
    output: dict
    model2: dict | None = None

    @property
    def name(self):
        return self.command["name"].value


SECTIONS = ("model", "model2", "command", "bounds", "output")

BUILDER_KEYS = {
    "odometer": {"arities"},
    "product": {"group", "order", "arities", "prefix"},
    "dihedral": {"p", "depth"},
    "heisenberg": {"p", "q", "depth"},
    "grigorchuk": {"depth"},
    "automaton": {"arity", "depth", "identity"},
    "explicit": {"generators", "involutions", "depth"},
}
PATTERN_KEYS = {
    "automaton": (re.compile(r"^state [A-Za-z_][A-Za-z0-9_]*$"),),
    "explicit": (
        re.compile(r"^size \d+$"),
        re.compile(r"^perm [A-Za-z_][A-Za-z0-9_]* \d+$"),
        re.compile(r"^projection \d+$"),
        re.compile(r"^basepoint \d+$"),
    ),
}
COMMAND_KEYS = {
    "validate": set(),
    "report": set(),
    "freeness": set(),
    "lqa": {"u"},
    "normality": {"v", "u"},
    "chain-probe": {"point", "depths"},
    "germ": {"point"},
    "coe": set(),
    "return-equiv": {"u", "u2", "h"},
    "twist": {"u", "map", "names"},
    "export-dot": {"depth"},
}
NEEDS_L = {"freeness", "lqa", "normality", "chain-probe", "germ", "coe", "return-equiv", "twist"}
NEEDS_D = {"freeness", "lqa", "normality", "coe", "return-equiv", "twist"}


def parse_config(text):
    """Strict INI-like parse; unknown sections or keys are errors with their line."""
    sections = {}
    current = None
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith(("#", ";")):
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {line!r}", n)
            current = line[1:-1].strip()
            if current not in SECTIONS:
                raise ConfigError(f"unknown section [{current}]", n)
            if current in sections:
                raise ConfigError(f"duplicate section [{current}]", n)
            sections[current] = {}
            continue
        if current is None:
            raise ConfigError("key outside of any section", n)
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"expected 'key = value', got {line!r}", n)
        key = " ".join(key.split())
        if key in sections[current]:
            raise ConfigError(f"duplicate key {current}.{key}", n)
        sections[current][key] = Entry(value.strip(), n)
    for req in ("model", "command"):
        if req not in sections:
            raise ConfigError(f"missing section [{req}]")
    for sec in ("model", "model2"):
        if sec in sections:
            _check_model_keys(sec, sections[sec])
    cmd = sections["command"]
    if "name" not in cmd:
        raise ConfigError("missing key command.name")
    name = cmd["name"].value
    if name not in COMMAND_KEYS:
        raise ConfigError(f"command.name: unknown command {name!r}", cmd["name"].line)
    for key, e in cmd.items():
        if key != "name" and key not in COMMAND_KEYS[name]:
            raise ConfigError(f"unknown key command.{key} for command {name!r}", e.line)
    bounds = sections.get("bounds", {})
    parsed_bounds = {}
    for key, e in bounds.items():
        if key not in ("L", "D", "budget"):
            raise ConfigError(f"unknown key bounds.{key}", e.line)
        parsed_bounds[key] = _positive(e, f"bounds.{key}")
    for key, need in (("L", NEEDS_L), ("D", NEEDS_D)):
        if name in need and key not in parsed_bounds:
            raise ConfigError(f"command {name!r} needs bounds.{key}")
    output = sections.get("output", {})
    for key, e in output.items():
        if key not in ("artifact", "report"):
            raise ConfigError(f"unknown key output.{key}", e.line)
        if not e.value or "/" in e.value or e.value.startswith("."):
            raise ConfigError(f"output.{key}: expected a plain file name", e.line)
    if name == "coe" and "model2" not in sections:
        raise ConfigError("command 'coe' needs a [model2] section")
    return RunConfig(sections["model"], cmd, parsed_bounds, output, sections.get("model2"))


def _check_model_keys(sec, entries):
    if "builder" not in entries:
        raise ConfigError(f"missing key {sec}.builder")
    builder = entries["builder"].value
    if builder not in BUILDER_KEYS:
        raise ConfigError(f"{sec}.builder: unknown builder {builder!r}", entries["builder"].line)
    allowed = BUILDER_KEYS[builder] | {"builder", "name"}
    for key, e in entries.items():
        if key in allowed or any(p.match(key) for p in PATTERN_KEYS.get(builder, ())):
            continue
        raise ConfigError(f"unknown key {sec}.{key} for builder {builder!r}", e.line)


def _positive(e, path):
    try:
        v = int(e.value)
    except ValueError:
        raise ConfigError(f"{path}: expected an integer, got {e.value!r}", e.line) from None
    if v < 1:
        raise ConfigError(f"{path}: must be positive", e.line)
    return v


def _int(entries, key, path, default=None):
    if key not in entries:
        if default is None:
            raise ConfigError(f"missing key {path}.{key}")
        return default
    return _positive(entries[key], f"{path}.{key}")


def _int_list(entries, key, path):
    if key not in entries:
        raise ConfigError(f"missing key {path}.{key}")
    e = entries[key]
    try:
        vals = [int(x) for x in e.value.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"{path}.{key}: expected comma-separated integers", e.line) from None
    if not vals:
        raise ConfigError(f"{path}.{key}: empty list", e.line)
    return vals


def _semantic(fn, path, e):
    try:
        return fn()
    except ConfigError:
        raise
    except InvalidInput as exc:
        raise ConfigError(f"{path}: {exc}", e.line if e else None) from None


def parse_cycles(text, n):
    """Cycle notation like ``(0 1)(2 3)`` as an image list on ``0..n-1``."""
    img = list(range(n))
    body = text.strip()
    if body in ("", "()"):
        return img
    if not re.fullmatch(r"(\(\s*\d+(?:[\s,]+\d+)*\s*\)\s*)+", body):
        raise InvalidInput(f"bad cycle notation {text!r}")
    seen = set()
    for cyc in re.findall(r"\(([^)]*)\)", body):
        pts = [int(x) for x in cyc.replace(",", " ").split()]
        for p in pts:
            if not 0 <= p < n or p in seen:
                raise InvalidInput(f"point {p} out of range or repeated in {text!r}")
            seen.add(p)
        for a, b in zip(pts, pts[1:] + pts[:1]):
            img[a] = b
    return img


def _automaton_spec(entries, path):
    arity = _int(entries, "arity", path)
    identity = entries["identity"].value if "identity" in entries else "e"
    states = {}
    for key, e in entries.items():
        if not key.startswith("state "):
            continue
        name = key.split()[1]
        m = re.fullmatch(r"perm\s+(.*?)\s+sections\s+(.*)", e.value)
        if not m:
            raise ConfigError(f"{path}.{key}: expected 'perm (cycles) sections 0:s 1:s ...'", e.line)
        perm = _semantic(lambda: parse_cycles(m.group(1), arity), f"{path}.{key}", e)
        secs = {}
        for item in m.group(2).split():
            letter, sep, target = item.partition(":")
            if not sep or not letter.isdigit():
                raise ConfigError(f"{path}.{key}: bad section {item!r}", e.line)
            secs[int(letter)] = target
        if sorted(secs) != list(range(arity)):
            raise ConfigError(f"{path}.{key}: need one section per letter 0..{arity - 1}", e.line)
        states[name] = (tuple(perm), tuple(secs[i] for i in range(arity)))
    if identity not in states:
        states = {identity: (tuple(range(arity)), (identity,) * arity), **states}
    return _semantic(lambda: gallery.AutomatonSpec(arity, states, identity), path, None)


def _explicit_model(entries, path, name):
    gens_e = entries.get("generators")
    if gens_e is None:
        raise ConfigError(f"missing key {path}.generators")
    symbols = [s.strip() for s in gens_e.value.split(",") if s.strip()]
    depth = _int(entries, "depth", path)
    sizes = [1]
    for ell in range(1, depth + 1):
        sizes.append(_int(entries, f"size {ell}", path))
    images = [[[0] for _ in symbols]]
    projections = [None]
    basepoints = [0]
    for ell in range(1, depth + 1):
        rows = []
        for s in symbols:
            key = f"perm {s} {ell}"
            e = entries.get(key)
            if e is None:
                raise ConfigError(f"missing key {path}.{key}")
            rows.append(_semantic(lambda: parse_cycles(e.value, sizes[ell]), f"{path}.{key}", e))
        images.append(rows)
        pkey = f"projection {ell}"
        if pkey not in entries:
            raise ConfigError(f"missing key {path}.{pkey}")
        pe = entries[pkey]
        try:
            proj = [int(x) for x in pe.value.replace(",", " ").split()]
        except ValueError:
            raise ConfigError(f"{path}.{pkey}: expected integers", pe.line) from None
        if len(proj) != sizes[ell]:
            raise ConfigError(f"{path}.{pkey}: expected {sizes[ell]} entries", pe.line)
        projections.append(proj)
        bkey = f"basepoint {ell}"
        basepoints.append(int(entries[bkey].value) if bkey in entries else 0)
    for key, e in entries.items():
        parts = key.split()
        if parts[0] in ("size", "projection", "basepoint") and not 1 <= int(parts[-1]) <= depth:
            raise ConfigError(f"{path}.{key}: level outside 1..{depth}", e.line)
        if parts[0] == "perm" and (parts[1] not in symbols or not 1 <= int(parts[2]) <= depth):
            raise ConfigError(f"{path}.{key}: unknown generator or level", e.line)
    invol = []
    if "involutions" in entries:
        for s in entries["involutions"].value.split(","):
            if s.strip():
                if s.strip() not in symbols:
                    raise ConfigError(f"{path}.involutions: unknown generator {s.strip()!r}", entries["involutions"].line)
                invol.append(symbols.index(s.strip()))
    model = _semantic(
        lambda: model_from_tables(symbols, sizes, images, projections, basepoints, name, invol), path, gens_e
    )
    return model


def build_model(entries, path="model"):
    """Construct the model described by a ``[model]`` section."""
    builder = entries["builder"].value
    name = entries["name"].value if "name" in entries else None
    be = entries["builder"]
    if builder == "odometer":
        m = _semantic(lambda: gallery.build_odometer(_int_list(entries, "arities", path), name), path, be)
    elif builder == "product":
        group = entries["group"].value if "group" in entries else "cyclic"
        order = _int(entries, "order", path, 4)
        if group == "cyclic":
            table = gallery.cyclic_table(order)
        elif group == "klein":
            if order != 4:
                raise ConfigError(f"{path}.order: the Klein four-group has order 4", entries["order"].line)
            table = gallery.klein_table()
        else:
            raise ConfigError(f"{path}.group: expected 'cyclic' or 'klein'", entries["group"].line)
        prefix = entries["prefix"].value if "prefix" in entries else "g"
        arities = _int_list(entries, "arities", path)
        m = _semantic(lambda: gallery.build_product_model(table, arities, prefix, name), path, be)
    elif builder == "dihedral":
        m = _semantic(lambda: gallery.build_dihedral(_int(entries, "p", path), _int(entries, "depth", path)), path, be)
    elif builder == "heisenberg":
        m = _semantic(
            lambda: gallery.build_heisenberg(
                _int(entries, "p", path), _int(entries, "q", path), _int(entries, "depth", path)
            ),
            path,
            be,
        )
    elif builder == "grigorchuk":
        m = _semantic(lambda: gallery.build_grigorchuk(_int(entries, "depth", path)), path, be)
    elif builder == "automaton":
        spec = _automaton_spec(entries, path)
        m = _semantic(
            lambda: gallery.build_automaton_group(spec, _int(entries, "depth", path), name or "automaton"), path, be
        )
    else:
        m = _explicit_model(entries, path, name or "explicit")
    if name and m.name != name:
        m = dataclasses.replace(m, name=name)
    return m


class Run:
    """Collects report lines and artifact text for one command."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.lines = []
        self.artifact = None
        self.status = EXIT_PASS

    def say(self, *parts):
        self.lines.append("\t".join(str(p) for p in parts))


def _clopen(model, cmd, key, default):
    if key not in cmd:
        return default
    e = cmd[key]
    return _semantic(lambda: Clopen.parse(model, e.value), f"command.{key}", e)


def _point(model, cmd):
    if "point" not in cmd:
        return PathPoint.from_point(model, model.basepoint(model.depth))
    e = cmd["point"]
    vals = [int(x) for x in e.value.replace(",", " ").split()] if re.fullmatch(r"[\d,\s]+", e.value) else None
    if vals is None:
        raise ConfigError("command.point: expected a cell index or a comma-separated path", e.line)
    if len(vals) == 1:
        return _semantic(lambda: PathPoint.from_point(model, vals[0]), "command.point", e)
    p = PathPoint(tuple(vals))
    _semantic(lambda: p.check(model), "command.point", e)
    return p


def _twisted(model, cfg):
    cmd = cfg.command
    U = _clopen(model, cmd, "u", None)
    if U is None:
        raise ConfigError("command 'twist' needs command.u")
    if "map" not in cmd:
        raise ConfigError("command 'twist' needs command.map")
    e = cmd["map"]
    mapping = {}
    for item in e.value.split(";"):
        src, sep, dst = item.partition("->")
        if not sep:
            raise ConfigError("command.map: expected 'word -> word; ...'", e.line)
        mapping[src.strip()] = dst.strip()
    names = [s.strip() for s in cmd["names"].value.split(",")] if "names" in cmd else None
    budget = cfg.bounds.get("budget", DEFAULT_BUDGET)
    return U, _semantic(lambda: twist_action(model, U, mapping, names, cfg.bounds["L"], budget), "command.map", e)


def _matching(model, cmd, U1, U2, depth):
    if "h" not in cmd or cmd["h"].value == "identity":
        if U1.points(depth).size != U2.points(depth).size:
            raise ConfigError("identity matching needs U1 and U2 of equal size")
        return dict(zip(U1.points(depth).tolist(), U2.points(depth).tolist()))
    e = cmd["h"]
    h = {}
    for item in e.value.split(","):
        a, sep, b = item.partition(":")
        if not sep:
            raise ConfigError("command.h: expected 'identity' or 'a:b,c:d,...'", e.line)
        try:
            h[int(a)] = int(b)
        except ValueError:
            raise ConfigError("command.h: cells must be integers", e.line) from None
    return h


def models_for(cfg):
    """The models a command (and its artifacts) refer to: ``(m1, m2)``."""
    m1 = build_model(cfg.model, "model")
    if cfg.name == "twist":
        _, m2 = _twisted(m1, cfg)
        return m1, m2
    m2 = build_model(cfg.model2, "model2") if cfg.model2 else m1
    return m1, m2


def _check_depth(model, D):
    if D > model.depth:
        raise ConfigError(f"bounds.D={D} exceeds model depth {model.depth}")


def execute(cfg):
    run = Run(cfg)
    m1, m2 = models_for(cfg)
    cmd = cfg.command
    b = cfg.bounds
    L, D = b.get("L"), b.get("D")
    budget = b.get("budget", DEFAULT_BUDGET)
    if D is not None:
        _check_depth(m1, D)
    run.say("model", m1.name, "sizes=" + ",".join(str(m1.size(i)) for i in range(m1.depth + 1)))
    run.say("command", cfg.name)
    name = cfg.name
    if name == "validate":
        rep = validate_chain(m1)
        run.lines.extend(rep.lines())
        run.say("verdict", "valid" if rep.valid else "invalid")
        run.status = EXIT_PASS if rep.valid else EXIT_VIOLATED
    elif name == "report":
        rep = validate_chain(m1)
        run.say("valid", "yes" if rep.valid else "no")
        run.say("generators", ",".join(m1.alphabet.symbols))
        inv = [m1.alphabet.symbols[i] for i in sorted(m1.alphabet.involutions)]
        run.say("involutions", ",".join(inv) or "-")
        for ell in range(1, m1.depth + 1):
            ar = is_adapted(m1, Clopen.basepoint_cylinder(m1, ell), min(L or 2, 2), budget)
            run.say(f"level {ell}", f"size={m1.size(ell)}", f"basepoint-cylinder={ar.verdict}", f"translates={ar.translate_count}")
        run.status = EXIT_PASS if rep.valid else EXIT_VIOLATED
    elif name == "freeness":
        res = topological_freeness_check(m1, L, D, budget)
        _witness_result(run, m1, res)
    elif name == "lqa":
        U = _clopen(m1, cmd, "u", Clopen.full(m1))
        res = lqa_violation_search(m1, U, L, D, budget)
        _witness_result(run, m1, res)
    elif name == "normality":
        U = _clopen(m1, cmd, "u", None)
        V = _clopen(m1, cmd, "v", None)
        if U is None or V is None:
            raise ConfigError("command 'normality' needs command.u and command.v")
        res = _semantic(lambda: kernel_normality_check(m1, V, U, L, D, budget), "command", None)
        _witness_result(run, m1, res)
    elif name == "chain-probe":
        x = _point(m1, cmd)
        depths = _int_list(cmd, "depths", "command") if "depths" in cmd else list(range(1, m1.depth))
        rep = _semantic(lambda: ascending_chain_probe(m1, x, depths, L, budget), "command.depths", cmd.get("depths"))
        for i, d in enumerate(rep.depths):
            run.say("subgroup", f"depth={d}", f"words={len(rep.subgroups[i])}")
        for s in rep.steps:
            sep = m1.fmt(s.separating_word) if s.separating_word is not None else "-"
            run.say("step", s.index, "included" if s.included else "not-included", "strict" if s.strict else "equal", sep)
        if rep.strict_increases:
            run.say("verdict", f"strict-increase(L={L})")
            run.artifact = witness_records(m1, rep, {"L": L})
            run.status = EXIT_VIOLATED
        else:
            run.say("verdict", f"no-increase-up-to-bounds(L={L})")
    elif name == "germ":
        x = _point(m1, cmd)
        res = _semantic(lambda: germ_hausdorff_witness(m1, x, L, budget), "command.point", cmd.get("point"))
        _witness_result(run, m1, res)
    elif name == "coe":
        res = coe_check(m1, m2, L, D, budget)
        _coe_result(run, m1, m2, res)
    elif name == "return-equiv":
        U1 = _clopen(m1, cmd, "u", Clopen.full(m1))
        U2 = _clopen(m2, cmd, "u2", U1)
        h = _matching(m1, cmd, U1, U2, D)
        res = _semantic(
            lambda: return_equivalence_check(m1, U1, m2, U2, h, L, D, budget), "command.h", cmd.get("h")
        )
        run.say("verdict", res.describe())
        if res.certificate:
            run.say("matched", len(res.certificate.pairs))
            run.artifact = return_equiv_records(m1, m2, res.certificate)
        else:
            model = m1 if res.failure.direction == "1->2" else m2
            run.say("unmatched", res.failure.describe(model))
            run.status = EXIT_INCONCLUSIVE
    elif name == "twist":
        U, tw = _twisted(m1, cfg)
        run.say("twisted", tw.name, "generators=" + ",".join(tw.alphabet.symbols))
        res = coe_check(m1, tw, L, D, budget)
        free = topological_freeness_check(tw, L, D, budget)
        if free.found:
            run.say("freeness", free.describe(), tw.fmt(free.witness.word), free.witness.cylinder.render())
        else:
            run.say("freeness", free.describe())
        _coe_result(run, m1, tw, res)
    elif name == "export-dot":
        depth = _int(cmd, "depth", "command", m1.depth)
        _check_depth(m1, depth)
        run.artifact = gallery.export_tree(m1, depth).splitlines()
        run.say("verdict", f"exported(depth={depth})")
    return run


def _witness_result(run, model, res):
    run.say("verdict", res.describe())
    if res.found:
        w = res.witness
        for key, val in vars(w).items():
            if isinstance(val, tuple) and key in ("word", "conjugator", "kernel_word"):
                val = model.fmt(val)
            elif isinstance(val, Clopen):
                val = val.render()
            elif isinstance(val, PathPoint):
                val = ",".join(map(str, val.coordinates))
            elif isinstance(val, tuple):
                val = ",".join(map(str, val))
            run.say("witness", f"{key}={val}")
        run.artifact = witness_records(model, w, res.bounds)
        run.status = EXIT_VIOLATED


def _coe_result(run, m1, m2, res):
    run.say("verdict", res.describe())
    if res.certificate:
        cert = res.certificate
        for direction, table in (("1->2", cert.forward), ("2->1", cert.backward)):
            for sym, pe in table.items():
                run.say("table", direction, sym, f"pieces={len(pe.pieces)}", pe.describe())
        run.artifact = coe_records(m1, m2, cert)
    else:
        run.say("failure", res.failure.describe())
        run.status = EXIT_INCONCLUSIVE


def _default_artifact_name(cfg):
    return f"{cfg.name}.dot" if cfg.name == "export-dot" else f"{cfg.name}.tsv"


def main(argv=None):
    parser = argparse.ArgumentParser(prog="cantor-actions", description=__doc__.splitlines()[0])
    parser.add_argument("--config", required=True, help="configuration file")
    parser.add_argument("--out", default=".", help="directory for artifacts (default: .)")
    parser.add_argument("--verify", metavar="PATH", help="re-check a witness or certificate file against the config")
    parser.add_argument("--quiet", action="store_true", help="suppress the report on standard output")
    args = parser.parse_args(argv)
    out = sys.stdout

    def emit(lines):
        if not args.quiet:
            out.write("\n".join(lines) + "\n")

    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        cfg = parse_config(text)
        if args.verify:
            m1, m2 = models_for(cfg)
            try:
                art = Path(args.verify).read_text(encoding="utf-8")
            except (OSError, UnicodeDecodeError) as exc:
                raise InvalidInput(f"cannot read artifact: {exc}") from None
            ok = verify_artifact(art, m1, m2)
            emit([f"verify\t{'accepted' if ok else 'rejected'}"])
            return EXIT_PASS if ok else EXIT_VIOLATED
        run = execute(cfg)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except InvalidInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    outdir = Path(args.out)
    try:
        if run.artifact is not None:
            name = cfg.output["artifact"].value if "artifact" in cfg.output else _default_artifact_name(cfg)
            outdir.mkdir(parents=True, exist_ok=True)
            (outdir / name).write_text(dump_records(run.artifact), encoding="utf-8")
            run.say("artifact", name)
        if "report" in cfg.output:
            outdir.mkdir(parents=True, exist_ok=True)
            (outdir / cfg.output["report"].value).write_text("\n".join(run.lines) + "\n", encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_INPUT
    emit(run.lines)
    return run.status


if __name__ == "__main__":
    sys.exit(main())
