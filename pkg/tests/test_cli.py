import subprocess
import sys
from pathlib import Path

import pytest

from cantor_actions.cli import ConfigError, main, parse_config, parse_cycles
from cantor_actions.model import InvalidInput

CONFIGS = Path(__file__).parent / "configs"


def run_cli(tmp_path, name, *extra):
    import io
    from contextlib import redirect_stdout

    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(["--config", str(CONFIGS / name), "--out", str(tmp_path), *extra])
    return code, buf.getvalue()


def test_minimal_odometer_config_parses():
    cfg = parse_config("[model]\nbuilder = odometer\narities = 2,2,2\n[command]\nname = validate\n")
    assert cfg.name == "validate"
    assert cfg.model["arities"].value == "2,2,2"


def test_grigorchuk_lqa_config_parses():
    cfg = parse_config((CONFIGS / "grigorchuk_lqa.ini").read_text())
    assert cfg.bounds == {"L": 1, "D": 2}


@pytest.mark.parametrize(
    "text,line",
    [
        ("[model]\nbuilder = odometer\ncolour = red\n[command]\nname = validate\n", 3),
        ("[model]\nbuilder = odometer\narities = 2\n[command]\nname = validate\nfoo = 1\n", 6),
        ("[model]\nbuilder = odometer\narities = 2\n[colours]\n", 4),
        ("[model]\nbuilder = odometer\narities = 2\n[command]\nname = fly\n", 5),
        ("[model]\nbuilder = odometer\narities = 2\n[command]\nname = freeness\n[bounds]\nL = 0\nD = 2\n", 7),
        ("[model]\nbuilder = odometer\nbuilder = odometer\n", 3),
        ("builder = odometer\n", 1),
        ("[model]\nbuilder\n", 2),
    ],
)
def test_config_errors_carry_line_numbers(text, line):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}:")


def test_missing_bounds_are_reported():
    with pytest.raises(ConfigError, match="bounds.L"):
        parse_config("[model]\nbuilder = odometer\narities = 2\n[command]\nname = freeness\n")


def test_cycle_notation():
    assert parse_cycles("(0 1 2)(3 4)", 6) == [1, 2, 0, 4, 3, 5]
    assert parse_cycles("()", 3) == [0, 1, 2]
    with pytest.raises(InvalidInput):
        parse_cycles("(0 0)", 2)
    with pytest.raises(InvalidInput):
        parse_cycles("0 1", 2)


@pytest.mark.parametrize(
    "config,status,artifact",
    [
        ("odometer_freeness.ini", 0, None),
        ("odometer_lqa.ini", 0, None),
        ("grigorchuk_lqa.ini", 1, "lqa.tsv"),
        ("grigorchuk_chain.ini", 1, "chain-probe.tsv"),
        ("heisenberg_normality.ini", 0, None),
        ("grigorchuk_normality.ini", 1, "normality.tsv"),
        ("product_coe.ini", 0, "coe.tsv"),
        ("odometer_twist.ini", 0, "twist.tsv"),
        ("odometer_return_identity.ini", 0, "return-equiv.tsv"),
        ("odometer_return_swap.ini", 2, None),
        ("grigorchuk_automaton_germ.ini", 1, "germ.tsv"),
        ("explicit_dot.ini", 0, "z4.dot"),
    ],
)
def test_commands_exit_status_and_artifacts(tmp_path, config, status, artifact):
    code, out = run_cli(tmp_path, config)
    assert code == status, out
    files = sorted(p.name for p in tmp_path.iterdir())
    assert files == ([artifact] if artifact else [])
    if artifact and artifact.endswith(".tsv"):
        code, out = run_cli(tmp_path, config, "--verify", str(tmp_path / artifact))
        assert code == 0 and out == "verify\taccepted\n"


def test_report_texts(tmp_path):
    _, out = run_cli(tmp_path, "odometer_freeness.ini")
    assert "verdict\tfree-up-to-bounds(L=8, D=4)" in out.splitlines()
    _, out = run_cli(tmp_path, "grigorchuk_lqa.ini")
    assert "witness\tword=d" in out and "witness\tinner=1:0" in out
    _, out = run_cli(tmp_path, "odometer_return_swap.ini")
    assert "unmatched\trestriction of t (1->2) has no match" in out


def test_tampered_artifact_is_rejected(tmp_path):
    run_cli(tmp_path, "grigorchuk_lqa.ini")
    art = tmp_path / "lqa.tsv"
    art.write_text(art.read_text().replace("inner=1:0", "inner=1:1"))
    code, out = run_cli(tmp_path, "grigorchuk_lqa.ini", "--verify", str(art))
    assert code == 1 and "rejected" in out
    art.write_text("garbage\n")
    code, _ = run_cli(tmp_path, "grigorchuk_lqa.ini", "--verify", str(art))
    assert code == 3


def test_quiet_and_report_file(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[model]\nbuilder = dihedral\np = 3\ndepth = 3\n[command]\nname = report\n[output]\nreport = r.txt\n")
    code = main(["--config", str(cfg), "--out", str(tmp_path / "o"), "--quiet"])
    assert code == 0
    text = (tmp_path / "o" / "r.txt").read_text()
    assert "involutions\ts" in text and "level 3\tsize=27" in text


def test_input_errors_exit_three(tmp_path, capsys):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[model]\nbuilder = heisenberg\np = 2\nq = 2\ndepth = 1\n[command]\nname = validate\n")
    assert main(["--config", str(cfg)]) == 3
    assert "distinct primes" in capsys.readouterr().err
    assert main(["--config", str(tmp_path / "missing.ini")]) == 3
    cfg.write_text("[model]\nbuilder = odometer\narities = 2,2\n[command]\nname = freeness\n[bounds]\nL = 2\nD = 5\n")
    assert main(["--config", str(cfg)]) == 3


def test_non_transitive_automaton_is_an_input_error(tmp_path, capsys):
    cfg = tmp_path / "c.ini"
    cfg.write_text(
        "[model]\nbuilder = automaton\narity = 2\ndepth = 2\nstate a = perm () sections 0:a 1:e\n"
        "[command]\nname = validate\n"
    )
    assert main(["--config", str(cfg)]) == 3
    assert "not transitive" in capsys.readouterr().err


def test_budget_exhaustion_is_inconclusive(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text(
        "[model]\nbuilder = grigorchuk\ndepth = 3\n[command]\nname = freeness\n[bounds]\nL = 9\nD = 3\nbudget = 50\n"
    )
    assert main(["--config", str(cfg), "--quiet"]) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "cantor_actions", "--config", str(CONFIGS / "odometer_freeness.ini"), "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[-1] == "verdict\tfree-up-to-bounds(L=8, D=4)"
