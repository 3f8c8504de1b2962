import os
import json

from pytest import fixture, mark

from vlex_multipliers.cli.main import main
from vlex_multipliers.cli.reports import SIDECAR, content_hash, read_report, report_path
from vlex_multipliers.errors import EXIT_DOMAIN, EXIT_OK, EXIT_PARSE, EXIT_PRECONDITION, EXIT_VIOLATIONS
from vlex_multipliers.grid import Grid, GridFunction, write_csv
from vlex_multipliers.utils import canonical_json

PLASTIC = 1.32471795724474

SMALL_LAYOUT = {"core_half_width": 8.0, "core_count": 256, "annulus_count": 32, "breakpoint_count": 16}
SMALL_SEARCH = {"starts": 2, "iters": 3, "grid": {"half_width": 32.0, "count": 1024}}
SMALL_SUITE = {"size": 8, "mollification_symbols": 0, "restarts": 1, "max_iters": 20}
EXPONENT_3 = {"3": {"kind": "constant", "value": 3.0}}


@fixture
def out(tmp_path):
    return str(tmp_path / "reports")


def write_json(path, content) -> str:
    path.write_text(json.dumps(content))
    return str(path)


def printed(capsys):
    return json.loads(capsys.readouterr().out)


def reports(directory, extension=".json"):
    return sorted(name for name in os.listdir(directory) if name.endswith(extension))


def lorentzian_config(tmp_path, **certificate):
    options = {"epsilon": 400.0, "theta": 0.25, "layout": SMALL_LAYOUT}
    options.update(certificate)
    return write_json(tmp_path / "experiment.json", {
        "exponents": EXPONENT_3,
        "symbols": {
            "lorentzian": {"expr": "2/(1+x^2)", "wiener": {"constant": 0, "density": "exp(-abs(x))"}},
            "atan": {"expr": "atan(x)"},
        },
        "certificate": options,
    })


def test_norm_of_an_empty_file(tmp_path, out):
    path = tmp_path / "empty.csv"
    path.write_text("")
    assert main(["--out", out, "--exponent", "3", "norm", str(path)]) == EXIT_PARSE


def test_norm_of_a_missing_file(tmp_path, out):
    assert main(["--out", out, "norm", str(tmp_path / "missing.csv")]) == EXIT_PARSE


def test_norm_of_an_indicator(tmp_path, out, capsys):
    path = str(tmp_path / "chi.csv")
    write_csv(path, GridFunction.indicator(Grid(16.0, 1024), 0.0, 8.0))
    assert main(["--out", out, "--exponent", "3", "norm", path]) == EXIT_OK
    payload = printed(capsys)
    assert payload["kind"] == "grid"
    assert abs(payload["norm"] - 2.0) < 5e-3
    assert reports(out) == [os.path.basename(report_path(out, "norm", payload))]


def test_norm_of_a_sequence(tmp_path, out, capsys):
    path = tmp_path / "plastic.csv"
    path.write_text("w,p,re,im\n1,2,1,0\n1,3,0,1\n")
    assert main(["--out", out, "norm", str(path)]) == EXIT_OK
    payload = printed(capsys)
    assert payload["kind"] == "sequence"
    assert abs(payload["norm"] - PLASTIC) < 1e-8


def test_invalid_exponent_is_a_domain_error(tmp_path, out):
    path = str(tmp_path / "chi.csv")
    write_csv(path, GridFunction.indicator(Grid(16.0, 1024), 0.0, 8.0))
    assert main(["--out", out, "--exponent", "0.5", "norm", path]) == EXIT_DOMAIN


def test_reports_are_content_addressed(tmp_path, capsys):
    path = tmp_path / "plastic.csv"
    path.write_text("w,p,re,im\n1,2,1,0\n1,3,0,1\n")
    first, second = str(tmp_path / "first"), str(tmp_path / "second")
    assert main(["--out", first, "norm", str(path)]) == EXIT_OK
    assert main(["--out", second, "norm", str(path)]) == EXIT_OK
    assert reports(first) == reports(second)

    with open(os.path.join(first, reports(first)[0])) as handle:
        document = json.load(handle)
    assert "sidecar" in document
    assert reports(first)[0] == f"norm-{content_hash(document)}.json"

    assert main(["--out", first, "norm", str(path)]) == EXIT_OK
    assert len(reports(first)) == 1
    capsys.readouterr()


def test_mulnorm_of_a_constant_symbol(tmp_path, out, capsys):
    symbol = write_json(tmp_path / "symbol.json", {"expr": "2"})
    config = write_json(tmp_path / "experiment.json", {"search": SMALL_SEARCH})
    assert main(["--config", config, "--out", out, "--exponent", "3", "mulnorm", symbol]) == EXIT_OK
    estimate = printed(capsys)["estimate"]
    assert abs(estimate["upper"] - 2.0) < 1e-9
    assert abs(estimate["lower"] - 2.0) < 1e-9


def test_mulnorm_without_upper_bound_is_a_domain_error(tmp_path, out):
    symbol = write_json(tmp_path / "symbol.json", {"expr": "sin(x)"})
    config = write_json(tmp_path / "experiment.json", {"search": SMALL_SEARCH})
    assert main(["--config", config, "--out", out, "--exponent", "3", "mulnorm", symbol]) == EXIT_DOMAIN
    assert not os.path.exists(out)


def test_unknown_symbol_is_a_parse_error(tmp_path, out):
    assert main(["--out", out, "--exponent", "3", "mulnorm", str(tmp_path / "nothing.json")]) == EXIT_PARSE


def test_unknown_config_key_is_a_config_error(tmp_path, out):
    config = write_json(tmp_path / "experiment.json", {"exponent": EXPONENT_3})
    assert main(["--config", config, "--out", out, "--exponent", "3", "mulnorm", "x"]) == EXIT_PARSE


def test_approximate_non_decaying_symbol(tmp_path, out):
    config = lorentzian_config(tmp_path)
    assert main(["--config", config, "--out", out, "approximate", "atan"]) == EXIT_PRECONDITION
    assert not os.path.exists(out)


def test_approximate_needs_epsilon(tmp_path, out):
    config = write_json(tmp_path / "experiment.json", {"exponents": EXPONENT_3,
                                                      "symbols": {"atan": {"expr": "atan(x)"}}})
    assert main(["--config", config, "--out", out, "approximate", "atan", "--mode", "bar"]) == EXIT_PARSE


def test_approximate_and_replay(tmp_path, out, capsys):
    config = lorentzian_config(tmp_path)
    assert main(["--config", config, "--out", out, "approximate", "lorentzian"]) == EXIT_OK
    payload = printed(capsys)
    certificate = payload["certificate"]
    assert payload["replay"]["ok"]
    assert certificate["bound_formula_id"] == "cloud"
    assert certificate["certified_total"] < 400.0

    certificate["certified_total"] *= 0.5
    tampered = write_json(tmp_path / "tampered.json", certificate)
    assert main(["--out", out, "replay", tampered]) == EXIT_VIOLATIONS
    assert not printed(capsys)["replay"]["ok"]


def test_approximate_is_deterministic(tmp_path, capsys):
    config = lorentzian_config(tmp_path)
    first, second = str(tmp_path / "first"), str(tmp_path / "second")
    assert main(["--config", config, "--out", first, "approximate", "lorentzian"]) == EXIT_OK
    assert main(["--config", config, "--out", second, "approximate", "lorentzian"]) == EXIT_OK
    assert reports(first) == reports(second)
    capsys.readouterr()


def test_replay_of_garbage(tmp_path, out):
    path = tmp_path / "certificate.json"
    path.write_text("{not json")
    assert main(["--out", out, "replay", str(path)]) == EXIT_PARSE
    assert main(["--out", out, "replay", write_json(tmp_path / "list.json", [1, 2])]) == EXIT_PARSE


def test_empty_suite(tmp_path, out, capsys):
    config = write_json(tmp_path / "experiment.json", {"symbols": {}, "exponents": {}})
    assert main(["--config", config, "--out", out, "suite"]) == EXIT_OK
    assert printed(capsys)["report"]["rows"] == []
    assert len(reports(out, ".csv")) == 1


def test_too_small_s_bound_fails_the_suite(tmp_path, out, capsys):
    config = write_json(tmp_path / "experiment.json", {
        "symbols": {"one": {"expr": "1"}},
        "exponents": EXPONENT_3,
        "s_bounds": {"3": 0.5},
        "suite": SMALL_SUITE,
    })
    assert main(["--config", config, "--out", out, "suite"]) == EXIT_VIOLATIONS
    assert printed(capsys)["report"]["violations"] == 1


def test_suite_csv_format(tmp_path, out, capsys):
    config = write_json(tmp_path / "experiment.json", {
        "symbols": {"one": {"expr": "1"}},
        "exponents": EXPONENT_3,
        "suite": SMALL_SUITE,
    })
    assert main(["--config", config, "--out", out, "--format", "csv", "suite"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "case_id,check,lhs,rhs,margin,pass,hard"
    assert all(line.startswith("one@3,") for line in lines[1:])


def test_small_oracle_run(tmp_path, out, capsys):
    config = write_json(tmp_path / "experiment.json", {
        "oracle": {"count": 2, "size": 4, "variable": False, "restarts": 2, "max_iters": 30},
    })
    assert main(["--config", config, "--out", out, "oracle"]) == EXIT_OK
    assert len(printed(capsys)["report"]["rows"]) == 6


@mark.slow
def test_replay_of_an_honest_certificate(tmp_path, out, capsys):
    config = lorentzian_config(tmp_path, epsilon=0.5, layout=None)
    assert main(["--config", config, "--out", out, "approximate", "lorentzian", "--consistency"]) == EXIT_OK
    payload = printed(capsys)
    assert payload["consistency"]["pass"]
    path = os.path.join(out, reports(out)[0])
    assert main(["--out", out, "replay", path]) == EXIT_OK
    result = printed(capsys)
    assert result["replay"]["ok"]
    assert result["honesty"]["ok"]


@mark.slow
def test_suite_reports_are_reproducible(tmp_path):
    config = write_json(tmp_path / "experiment.json", {
        "symbols": {
            "lorentzian": {"expr": "2/(1+x^2)", "wiener": {"constant": 0, "density": "exp(-abs(x))"}},
            "hat": {"pieces": [
                {"lower": "-inf", "upper": -1, "expr": "0"},
                {"lower": -1, "upper": 0, "expr": "1+x"},
                {"lower": 0, "upper": 1, "expr": "1-x"},
                {"lower": 1, "upper": "inf", "expr": "0"},
            ]},
        },
        "exponents": dict(EXPONENT_3, pwl={"kind": "pwl", "knots": [[-1, 2], [1, 3]], "left_tail": 2, "right_tail": 3}),
        "s_bounds": {"pwl": 2.0},
        "suite": dict(SMALL_SUITE, mollification_symbols=2, mollification_size=16, deltas=[0.5, 0.25]),
    })
    runs = [str(tmp_path / name) for name in "first second".split()]
    codes = [main(["--config", config, "--seed", "7", "--out", directory, "suite"]) for directory in runs]
    assert codes[0] == codes[1]
    assert codes[0] in (EXIT_OK, EXIT_VIOLATIONS)
    assert reports(runs[0]) == reports(runs[1])
    assert reports(runs[0], ".csv") == reports(runs[1], ".csv")
    for name in reports(runs[0], ".csv"):
        first, second = (open(os.path.join(directory, name), "rb").read() for directory in runs)
        assert first == second
    for name in reports(runs[0]):
        first, second = (read_report(os.path.join(directory, name)) for directory in runs)
        assert first.pop(SIDECAR)["timestamp"]
        second.pop(SIDECAR)
        assert canonical_json(first) == canonical_json(second)
        assert content_hash(first) in name
