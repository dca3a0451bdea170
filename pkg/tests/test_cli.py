from __future__ import annotations

import json
import shutil
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest
from referencing import Registry, Resource

from seqspec.cli import main
from seqspec.config import load_config, parse_config

ROOT = Path(__file__).resolve().parents[1]
SCHEMAS = ROOT / "docs" / "schemas"
CONFIGS = ROOT / "demos" / "configs"


def _registry():
    res = []
    for p in SCHEMAS.glob("*.json"):
        doc = json.loads(p.read_text())
        res.append((doc["$id"], Resource.from_contents(doc)))
    return Registry().with_resources(res)


REGISTRY = _registry()


def validate(doc, name):
    schema = json.loads((SCHEMAS / f"{name}.schema.json").read_text())
    jsonschema.Draft202012Validator(schema, registry=REGISTRY).validate(doc)


def write_cfg(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


TRI = {"type": "toeplitz", "symbol": {"coeffs": [{"k": -1, "re": 1.0}, {"k": 1, "re": 1.0}]}}
ALT = {"type": "alternate", "args": [{"type": "identity"}, {"type": "zero"}]}


def run(tmp_path, command, cfg, *extra):
    out = tmp_path / f"out_{command}"
    code = main([command, "--config", write_cfg(tmp_path, cfg), "--out", str(out), "--no-timestamp", *extra])
    return code, out


def test_shipped_configs_validate():
    for p in CONFIGS.glob("*.json"):
        if p.name.startswith("symbol"):
            continue
        validate(json.loads(p.read_text()), "config")
        load_config(p)


def test_dichotomy_tridiagonal(tmp_path):
    cfg = {"sequence": TRI, "horizon": 256, "grid": {"min": -3, "max": 3, "step": 0.25}}
    code, out = run(tmp_path, "dichotomy", cfg, "--plot-data")
    doc = json.loads((out / "dichotomy.json").read_text())
    assert code == 0 and doc["result"]["dichotomy"] is True
    validate(doc, "dichotomy")
    plot = (out / "spectrum_plot.dat").read_text().splitlines()
    assert len(plot) == 1 + 25 and plot[1] == "-3.0 0"


def test_compact_identity(tmp_path):
    code, out = run(tmp_path, "compact", {"sequence": {"type": "identity"}, "horizon": 64, "k_max": 4})
    doc = json.loads((out / "compact.json").read_text())
    assert code == 0 and doc["result"]["verdict"] == "NotCompact"
    assert doc["result"]["essential_rank"] == "Infinity"
    validate(doc, "compact")


def test_fredholm_alternate_undecided(tmp_path):
    code, out = run(tmp_path, "fredholm", {"sequence": ALT, "horizon": 128, "k_max": 3})
    doc = json.loads((out / "fredholm.json").read_text())
    assert code == 2 and doc["result"]["verdict"] == "Undecided"
    validate(doc, "fredholm")


def test_spectrum_alternate(tmp_path):
    code, out = run(tmp_path, "spectrum", {"sequence": ALT, "horizon": 64, "grid": {"min": 0, "max": 1, "step": 0.5}})
    doc = json.loads((out / "spectrum.json").read_text())
    assert code == 2 and doc["result"]["non_transient"] == [0.0, 1.0]
    validate(doc, "spectrum")


def test_analyze_csv(tmp_path):
    code, out = run(tmp_path, "analyze", {"sequence": {"type": "identity"}, "horizon": 16, "k_max": 2}, "--plot-data")
    lines = (out / "profile.csv").read_text().splitlines()
    assert code == 0 and lines[0] == "n,dim,k,sigma_desc" and len(lines) == 1 + 1 + 2 * 15
    assert (out / "profile_plot.dat").exists()


def test_stability(tmp_path):
    cfg = {"sequence": {"type": "toeplitz", "symbol": {"coeffs": [{"k": 0, "re": -2.0}, {"k": 1, "re": 1.0}]}},
           "horizon": 64}
    code, out = run(tmp_path, "stability", cfg)
    doc = json.loads((out / "stability.json").read_text())
    assert code == 0 and doc["result"]["verdict"] == "Stable"
    validate(doc, "stability")
    code, _ = run(tmp_path, "stability", {"sequence": {"type": "identity"}, "horizon": 64})
    assert code == 1


def test_restrict_round_trip(tmp_path):
    cfg = {"sequence": ALT, "horizon": 128, "k_max": 3, "tolerances": {"epsilon": 0.01},
           "grid": {"min": 0, "max": 1, "step": 0.5}}
    code, out = run(tmp_path, "restrict", cfg)
    assert code == 0
    eta = json.loads((out / "eta.json").read_text())
    validate(eta, "eta")
    doc = json.loads((out / "restrict.json").read_text())
    validate(doc, "restrict")
    assert doc["result"]["verification"]["converged"] and eta == list(range(2, 129, 2))
    # the emitted eta drives a follow-up run
    shutil.copy(out / "eta.json", tmp_path / "eta.json")
    cfg2 = dict(cfg, sequence={"type": "restrict", "arg": ALT, "eta_file": "eta.json"}, horizon=len(eta))
    validate(cfg2, "config")
    code, out2 = run(tmp_path, "dichotomy", cfg2)
    assert code == 0 and json.loads((out2 / "dichotomy.json").read_text())["result"]["dichotomy"]


def test_determinism(tmp_path):
    cfg = {"sequence": TRI, "horizon": 32, "k_max": 4, "grid": {"min": -1, "max": 1, "step": 0.5}}
    a = tmp_path / "a"
    b = tmp_path / "b"
    p = write_cfg(tmp_path, cfg)
    for d in (a, b):
        for cmd in ("fredholm", "compact", "dichotomy"):
            main([cmd, "--config", p, "--out", str(d), "--no-timestamp"])
    for f in a.iterdir():
        assert f.read_bytes() == (b / f.name).read_bytes()
    main(["fredholm", "--config", p, "--out", str(a)])
    assert "timestamp" in json.loads((a / "fredholm.json").read_text())


@pytest.mark.parametrize(
    "cfg,field",
    [
        ({"sequence": {"type": "identity"}, "horizon": 8}, "horizon"),
        ({"sequence": {"type": "nope"}, "horizon": 32}, "sequence.type"),
        ({"sequence": {"type": "add", "args": [{"type": "identity"}]}, "horizon": 32}, "sequence.args"),
        ({"sequence": {"type": "toeplitz", "symbol": {"coeffs": []}, "K": [[1, 2]]}, "horizon": 32}, "sequence.K"),
        ({"sequence": {"type": "identity"}, "horizon": 32, "tolerances": {"tau": -1}}, "tolerances.tau"),
        ({"sequence": {"type": "identity"}, "horizon": 32, "bogus": 1}, "bogus"),
        ({"sequence": {"type": "scale", "arg": {"type": "identity"}, "factor": "x"}, "horizon": 32}, "sequence.factor"),
        ({"sequence": {"type": "identity"}, "horizon": 32, "grid": {"min": 0, "max": 1, "step": 0}}, "grid.step"),
    ],
)
def test_malformed_config_names_field(tmp_path, capsys, cfg, field):
    code = main(["compact", "--config", write_cfg(tmp_path, cfg), "--out", str(tmp_path)])
    assert code == 1
    assert field in capsys.readouterr().err


def test_non_selfadjoint_spectrum_is_error(tmp_path, capsys):
    seq = {"type": "toeplitz", "symbol": {"coeffs": [{"k": 1, "re": 1.0}]}}
    code, _ = run(tmp_path, "spectrum", {"sequence": seq, "horizon": 32, "grid": {"min": 0, "max": 1, "step": 1}})
    assert code == 1 and "self-adjoint" in capsys.readouterr().err


def test_missing_grid_is_error(tmp_path):
    code, _ = run(tmp_path, "dichotomy", {"sequence": TRI, "horizon": 32})
    assert code == 1


def test_horizon_override_and_symbol_file(tmp_path):
    cfg = load_config(CONFIGS / "shift_minus_two.json", horizon=32)
    assert cfg.horizon == 32 and cfg.structured().symbol.coeffs == {0: -2, 1: 1}


def test_tree_nodes():
    cfg = parse_config({
        "sequence": {"type": "direct_sum", "args": [
            {"type": "scale", "factor": {"re": 0, "im": 1}, "arg": {"type": "identity", "dims": {"constant": 2}}},
            {"type": "adjoint", "arg": {"type": "explicit", "matrices": [[[1]], [[1, 2], [3, 4]]]}}]},
        "horizon": 16})
    m = cfg.sequence.eval(2)
    assert m.shape == (4, 4) and m[0, 0] == 1j and m[2, 3] == 3


def test_console_script(tmp_path):
    exe = shutil.which("seqspec")
    cmd = [exe] if exe else [sys.executable, "-m", "seqspec.cli"]
    p = write_cfg(tmp_path, {"sequence": {"type": "identity"}, "horizon": 16, "k_max": 4})
    r = subprocess.run(cmd + ["compact", "--config", p, "--out", str(tmp_path), "--no-timestamp"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "compact.json" in r.stdout
