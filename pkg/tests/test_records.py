import pytest

from cantor_actions import (
    Clopen,
    InvalidInput,
    PathPoint,
    ascending_chain_probe,
    build_grigorchuk,
    build_product_toy,
    coe_check,
    cyclic_table,
    germ_hausdorff_witness,
    identity_matching,
    kernel_normality_check,
    klein_table,
    lqa_violation_search,
    return_equivalence_check,
    topological_freeness_check,
)
from cantor_actions.records import (
    coe_records,
    dump_records,
    load_artifact,
    parse_records,
    return_equiv_records,
    verify_artifact,
    witness_records,
)

G = build_grigorchuk(4)


def _round_trip(model, witness, bounds):
    text = dump_records(witness_records(model, witness, bounds))
    assert verify_artifact(text, model)
    return text, load_artifact(text, model)


def test_regularity_witnesses_round_trip():
    res = topological_freeness_check(G, 1, 3)
    text, back = _round_trip(G, res.witness, res.bounds)
    assert back == res.witness
    assert text.splitlines()[0].split("\t")[:2] == ["artifact", "kind=freeness-witness"]
    res = lqa_violation_search(G, Clopen.full(G), 1, 2)
    assert _round_trip(G, res.witness, res.bounds)[1] == res.witness
    res = kernel_normality_check(G, Clopen.cell(G, 2, 0), Clopen.cell(G, 1, 0), 4, 4)
    assert _round_trip(G, res.witness, res.bounds)[1] == res.witness
    res = germ_hausdorff_witness(G, PathPoint.from_point(G, 15), 4)
    assert _round_trip(G, res.witness, res.bounds)[1] == res.witness


def test_chain_report_round_trip():
    rep = ascending_chain_probe(G, PathPoint.from_point(G, 0), (1, 2, 3), 4)
    _, back = _round_trip(G, rep, {"L": 4})
    assert [(s.strict, s.separating_word) for s in back.steps] == [(s.strict, s.separating_word) for s in rep.steps]


def test_certificates_round_trip():
    m1, m2 = build_product_toy(4, cyclic_table(4), klein_table(), (2, 2))
    cert = coe_check(m1, m2, 4, 3).certificate
    text = dump_records(coe_records(m1, m2, cert))
    assert "label=up-to-bounds" in text.splitlines()[0]
    assert verify_artifact(text, m1, m2)
    back = load_artifact(text, m1, m2)
    assert back.forward == cert.forward and back.backward == cert.backward
    U = Clopen.cell(m1, 1, 0)
    rcert = return_equivalence_check(m1, U, m2, U, identity_matching(U, 3), 3, 3).certificate
    text = dump_records(return_equiv_records(m1, m2, rcert))
    assert verify_artifact(text, m1, m2)


def test_parse_records_rejects_bad_fields():
    assert parse_records("# note\n\nartifact\tkind=x\n") == [("artifact", {"kind": "x"})]
    with pytest.raises(InvalidInput):
        parse_records("artifact\tkind\n")
    with pytest.raises(InvalidInput):
        load_artifact("witness\tword=a\n", G)
    with pytest.raises(InvalidInput):
        load_artifact("artifact\tkind=nope\n", G)
    with pytest.raises(InvalidInput):
        load_artifact("artifact\tkind=lqa-witness\nwitness\tword=a\n", G)
