"""Tab-separated text records for witnesses and certificates.

Each line is ``kind<TAB>key=value<TAB>...``.  Words are written with symbol
names (``a b^-1 t^3``, ``1`` for the empty word) and clopen sets as
``level:c1,c2``.  The first line is a header naming the artifact kind, the
model(s) and the bounds; certificates carry ``label=up-to-bounds`` because they
only speak about the stated word length and depth.
"""

from __future__ import annotations

from .clopen import Clopen
from .fullgroup import CoeCertificate, PiecewiseElement, ReturnEquivCertificate
from .model import InvalidInput, PathPoint
from .regularity import (
    ChainReport,
    ChainStep,
    FixedCylinderWitness,
    GermWitness,
    LqaWitness,
    NormalityWitness,
)


def _line(record, /, **fields):
    parts = [record] + [f"{k}={v}" for k, v in fields.items()]
    for p in parts:
        if "\t" in p or "\n" in p:
            raise InvalidInput(f"record field contains a tab or newline: {p!r}")
    return "\t".join(parts)


def dump_records(lines):
    return "\n".join(lines) + "\n"


def parse_records(text):
    """List of ``(kind, fields)``; blank lines and ``#`` comments are skipped."""
    out = []
    for n, raw in enumerate(text.splitlines(), 1):
        if not raw.strip() or raw.startswith("#"):
            continue
        kind, *rest = raw.split("\t")
        fields = {}
        for item in rest:
            key, sep, value = item.partition("=")
            if not sep:
                raise InvalidInput(f"line {n}: field {item!r} is not key=value")
            fields[key] = value
        out.append((kind, fields))
    return out


def _ints(text):
    return tuple(int(x) for x in text.split(",")) if text else ()


def _word(model, text):
    return model.word(text)


def witness_records(model, witness, bounds):
    """Records for any regularity witness or chain report."""
    head = {"model": model.name, "label": "up-to-bounds"}
    head.update({k: v for k, v in bounds.items()})
    fmt = model.fmt
    if isinstance(witness, FixedCylinderWitness):
        body = [_line("witness", word=fmt(witness.word), cylinder=witness.cylinder.render(), depth=witness.depth)]
    elif isinstance(witness, LqaWitness):
        body = [
            _line(
                "witness",
                word=fmt(witness.word),
                inner=witness.inner.render(),
                outer=witness.outer.render(),
                depth=witness.depth,
            )
        ]
    elif isinstance(witness, NormalityWitness):
        body = [
            _line(
                "witness",
                conjugator=fmt(witness.conjugator),
                kernel_word=fmt(witness.kernel_word),
                inner=witness.inner.render(),
                outer=witness.outer.render(),
                depth=witness.depth,
            )
        ]
    elif isinstance(witness, GermWitness):
        body = [
            _line(
                "witness",
                word=fmt(witness.word),
                point=",".join(map(str, witness.point.coordinates)),
                cells=",".join(map(str, witness.trivial_cells)),
                depth=witness.depth,
            )
        ]
    elif isinstance(witness, ChainReport):
        body = [
            _line(
                "chain",
                point=",".join(map(str, witness.point.coordinates)),
                depths=",".join(map(str, witness.depths)),
            )
        ]
        for s in witness.steps:
            body.append(
                _line(
                    "step",
                    index=s.index,
                    included="yes" if s.included else "no",
                    strict="yes" if s.strict else "no",
                    word=fmt(s.separating_word) if s.separating_word is not None else "-",
                )
            )
        return [_line("artifact", kind="chain-report", **head)] + body
    else:
        raise InvalidInput(f"cannot serialize {type(witness).__name__}")
    return [_line("artifact", kind=witness.kind, **head)] + body


def piecewise_records(model, pe, **tags):
    return [_line("piece", **tags, cylinder=c.render(), word=model.fmt(w)) for c, w in pe.pieces]


def coe_records(m1, m2, cert):
    lines = [
        _line(
            "artifact",
            kind=cert.kind,
            model1=m1.name,
            model2=m2.name,
            label="up-to-bounds",
            L=cert.max_len,
            D=cert.depth,
        )
    ]
    for direction, src, dst, table in (("1->2", m1, m2, cert.forward), ("2->1", m2, m1, cert.backward)):
        for sym in src.alphabet.symbols:
            lines.extend(piecewise_records(dst, table[sym], direction=direction, generator=sym))
    return lines


def return_equiv_records(m1, m2, cert):
    lines = [
        _line(
            "artifact",
            kind=cert.kind,
            model1=m1.name,
            model2=m2.name,
            label="up-to-bounds",
            L=cert.max_len,
            D=cert.depth,
        ),
        _line("sets", u1=cert.U1.render(), u2=cert.U2.render()),
        _line("matching", h=",".join(f"{a}:{b}" for a, b in sorted(cert.h.items()))),
    ]
    for w1, w2 in cert.pairs:
        lines.append(_line("pair", word1=m1.fmt(w1), word2=m2.fmt(w2)))
    return lines


def load_artifact(text, m1, m2=None):
    """Rebuild a witness or certificate from records; ``m2`` defaults to ``m1``."""
    m2 = m1 if m2 is None else m2
    recs = parse_records(text)
    if not recs or recs[0][0] != "artifact":
        raise InvalidInput("artifact text must start with an 'artifact' header line")
    head = recs[0][1]
    kind = head.get("kind")
    body = recs[1:]
    try:
        return _load(kind, head, body, m1, m2)
    except (KeyError, IndexError, ValueError) as exc:
        if isinstance(exc, InvalidInput):
            raise
        raise InvalidInput(f"malformed {kind} artifact: {exc!r}") from None


def _load(kind, head, body, m1, m2):
    def only(name):
        rows = [f for k, f in body if k == name]
        if len(rows) != 1:
            raise InvalidInput(f"expected one {name!r} record, found {len(rows)}")
        return rows[0]

    if kind == FixedCylinderWitness.kind:
        f = only("witness")
        return FixedCylinderWitness(_word(m1, f["word"]), Clopen.parse(m1, f["cylinder"]), int(f["depth"]))
    if kind == LqaWitness.kind:
        f = only("witness")
        return LqaWitness(
            _word(m1, f["word"]), Clopen.parse(m1, f["inner"]), Clopen.parse(m1, f["outer"]), int(f["depth"])
        )
    if kind == NormalityWitness.kind:
        f = only("witness")
        return NormalityWitness(
            _word(m1, f["conjugator"]),
            _word(m1, f["kernel_word"]),
            Clopen.parse(m1, f["inner"]),
            Clopen.parse(m1, f["outer"]),
            int(f["depth"]),
        )
    if kind == GermWitness.kind:
        f = only("witness")
        return GermWitness(_word(m1, f["word"]), PathPoint(_ints(f["point"])), _ints(f["cells"]), int(f["depth"]))
    if kind == "chain-report":
        f = only("chain")
        steps = []
        for k, s in body:
            if k != "step":
                continue
            word = None if s["word"] == "-" else _word(m1, s["word"])
            steps.append(ChainStep(int(s["index"]), s["included"] == "yes", s["strict"] == "yes", word))
        return ChainReport(PathPoint(_ints(f["point"])), _ints(f["depths"]), int(head["L"]), [], steps)
    if kind == CoeCertificate.kind:
        tables = {"1->2": {}, "2->1": {}}
        for k, f in body:
            if k != "piece":
                continue
            direction = f["direction"]
            if direction not in tables:
                raise InvalidInput(f"unknown direction {direction!r}")
            dst = m2 if direction == "1->2" else m1
            tables[direction].setdefault(f["generator"], []).append(
                (Clopen.parse(dst, f["cylinder"]), _word(dst, f["word"]))
            )
        fwd = {g: PiecewiseElement(m2, p) for g, p in tables["1->2"].items()}
        bwd = {g: PiecewiseElement(m1, p) for g, p in tables["2->1"].items()}
        return CoeCertificate(fwd, bwd, int(head["L"]), int(head["D"]))
    if kind == ReturnEquivCertificate.kind:
        sets = only("sets")
        h = {}
        for item in only("matching")["h"].split(","):
            a, _, b = item.partition(":")
            h[int(a)] = int(b)
        pairs = [(_word(m1, f["word1"]), _word(m2, f["word2"])) for k, f in body if k == "pair"]
        return ReturnEquivCertificate(
            Clopen.parse(m1, sets["u1"]), Clopen.parse(m2, sets["u2"]), h, int(head["D"]), int(head["L"]), pairs
        )
    raise InvalidInput(f"unknown artifact kind {kind!r}")


def verify_artifact(text, m1, m2=None):
    """Re-check a serialized witness or certificate against the model(s)."""
    m2 = m1 if m2 is None else m2
    obj = load_artifact(text, m1, m2)
    try:
        if isinstance(obj, (CoeCertificate, ReturnEquivCertificate)):
            return obj.verify(m1, m2)
        return obj.verify(m1)
    except (IndexError, InvalidInput):
        # cells or points outside the model cannot be part of a valid witness
        return False
