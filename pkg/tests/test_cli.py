import csv
import io
import json
import math

import pytest

from primesq import __version__, singular
from primesq.cli import run
from primesq.serialize import csv_text, dumps, fmt_float


def invoke(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse_csv(text):
    body = "\n".join(line for line in text.splitlines() if not line.startswith("#"))
    return list(csv.DictReader(io.StringIO(body)))


def test_scan_example(capsys):
    code, out, _ = invoke(capsys, "scan", "--x", "10000", "--h", "100", "--class", "h2",
                          "--mode", "unrestricted", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["summary"]["exceptions"] == 0 and doc["exceptional"] == []
    assert doc["header"]["params"]["X"] == 10000
    assert doc["header"]["version"] == __version__


def test_constants_example(capsys):
    code, out, _ = invoke(capsys, "constants", "--theta2", "0.6", "--method", "grid", "--resolution", "2000")
    assert code == 0
    doc = json.loads(out)
    lo = doc["sigma2_minus"]
    assert lo["value"] > 0.22
    assert lo["method"] == "grid" and lo["resolution"] == 2000 and "error" in lo and "seed" in lo
    assert doc["sigma2_plus"]["value"] < 2.26


def test_buchstab_example(capsys):
    code, out, _ = invoke(capsys, "buchstab", "--t-max", "3", "--step", "0.0001")
    assert code == 0
    rows = parse_csv(out)
    row = next(r for r in rows if float(r["t"]) == 3.0)
    assert abs(float(row["w"]) - (1 + math.log(2)) / 3) <= 1e-6


def test_singular_command(capsys):
    code, out, _ = invoke(capsys, "singular", "--j", "2", "--n", "10", "20", "--P", "2", "--format", "csv")
    assert code == 0
    rows = parse_csv(out)
    assert [int(r["n"]) for r in rows] == [10, 20]
    assert float(rows[0]["product"]) == pytest.approx(2.0)


def test_decomp_command(capsys):
    code, out, _ = invoke(capsys, "decomp", "--x", "1000000", "--theta1", "0.95", "--theta2", "0.52")
    assert code == 0
    doc = json.loads(out)
    assert not any(doc["identity_violations"].values())
    assert set(doc["weights"]["lambda0"]) == {"support_size", "sum", "min", "max"}


def test_decomp_degenerate_config_is_reported_not_failed(capsys):
    code, out, _ = invoke(capsys, "decomp", "--x", "100000000", "--theta1", "0.55", "--B", "1")
    assert code == 0
    assert "z0_below_2" in json.loads(out)["config"]["flags"]


@pytest.mark.parametrize(
    "argv",
    [
        ["scan", "--x", "10000"],
        ["scan", "--x", "10000", "--h", "10", "--bogus"],
        ["nosuch"],
        ["constants", "--theta2", "0.4"],
        ["buchstab", "--step", "0.5"],
        ["scan", "--x", "10000", "--h", "10", "--class", "H4", "--mode", "paper_intervals"],
        ["scan", "--x", "0", "--h", "10"],
        ["constants", "--theta2", "nan"],
    ],
)
def test_invalid_input_exit_1(capsys, argv):
    code, out, err = invoke(capsys, *argv)
    assert code == 1
    assert out == ""
    assert "error" in err


def test_consistency_failure_exit_2(capsys, monkeypatch):
    real = singular._multiplicative_values
    monkeypatch.setattr(singular, "_multiplicative_values", lambda j, ns, q: real(j, ns, q) + 1e-3)
    code, out, err = invoke(capsys, "singular", "--n", "100", "--P", "10")
    assert code == 2
    assert "consistency" in err


def test_output_is_byte_identical(capsys):
    argv = ["constants", "--theta2", "0.6", "--method", "monte_carlo", "--samples", "20000", "--seed", "3"]
    _, a, _ = invoke(capsys, *argv)
    _, b, _ = invoke(capsys, *argv)
    assert a == b
    assert json.loads(a)["sigma2_minus"]["seed"] == 3


def test_timing_goes_to_header_only_on_request(capsys):
    _, plain, err = invoke(capsys, "buchstab", "--t-max", "2.5", "--step", "0.01")
    assert "wall_seconds" not in plain and "buchstab" in err
    _, timed, _ = invoke(capsys, "buchstab", "--t-max", "2.5", "--step", "0.01", "--timing")
    assert "# wall_seconds:" in timed


def test_output_file(tmp_path, capsys):
    target = tmp_path / "scan.csv"
    code, out, _ = invoke(capsys, "scan", "--x", "10000", "--h", "30", "--format", "csv", "-o", str(target))
    assert code == 0 and out == ""
    text = target.read_text()
    assert text.startswith("# tool: primesq\n# version: ")
    assert "# params: " in text and "# summary: " in text
    assert parse_csv(text)[0].keys() == {"n", "count", "predicted", "ratio"}


def test_verify_subset(capsys):
    code, out, err = invoke(capsys, "verify", "--only", "3", "4")
    assert code == 0
    rows = parse_csv(out)
    assert [r["check"] for r in rows] == ["3", "4"]
    assert all(r["status"] == "pass" for r in rows)
    assert err.count("[PASS]") == 2


def test_float_format():
    assert fmt_float(0.5) == "0.5"
    assert fmt_float(3.0) == "3.0"
    assert float(fmt_float(0.1)) == 0.1
    assert len(fmt_float(1 / 3).replace("0.", "")) == 17


def test_serializer_non_finite():
    assert dumps({"a": float("nan"), "b": [1, float("inf")]}) == '{\n  "a": null,\n  "b": [1, null]\n}\n'
    text = csv_text(["x", "y"], [(1.5, float("nan")), (None, 2)], {"k": {"a": 1}})
    assert text == '# k: {"a": 1}\nx,y\n1.5,\n,2\n'
