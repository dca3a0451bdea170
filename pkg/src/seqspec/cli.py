"""Command-line entry point: ``seqspec <command> --config cfg.json``.

Exit status is 0 for decided verdicts, 2 when a verdict is Undecided (or
an extraction fails), 1 on errors.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import sys
from pathlib import Path

from . import __version__
from .arveson import dichotomy_audit, essential_spectrum_estimate
from .asymptotics import compactness_test, essential_rank, fredholm_test, singular_profile
from .config import AnalysisConfig, load_config
from .errors import ConfigurationError, SeqSpecError
from .restriction import ExtractionRequest, extract_convergent, verify_convergence
from .toeplitz import noise_decay_ok, stability_check

COMMANDS = ("analyze", "compact", "fredholm", "spectrum", "dichotomy", "restrict", "stability")
VERDICT_CODE = {"Transient": 0, "Essential": 1, "Undecided": 2}

OK, ERROR, UNDECIDED = 0, 1, 2


def _clean(x):
    """JSON-safe copy: inf/nan become strings, numpy scalars become Python numbers."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if hasattr(x, "item") and not isinstance(x, (str, bytes)):
        x = x.item()
    if isinstance(x, float) and x != x:
        return "NaN"
    if isinstance(x, float) and x in (float("inf"), float("-inf")):
        return "Infinity" if x > 0 else "-Infinity"
    return x


class Runner:
    def __init__(self, cfg: AnalysisConfig, out: Path, timestamp: bool, plot: bool):
        self.cfg = cfg
        self.out = out
        self.timestamp = timestamp
        self.plot = plot
        self.written: list[Path] = []

    def write(self, name: str, text: str) -> None:
        self.out.mkdir(parents=True, exist_ok=True)
        p = self.out / name
        p.write_text(text)
        self.written.append(p)

    def report(self, name: str, command: str, result: dict) -> None:
        doc = {
            "command": command,
            "version": __version__,
            "horizon": self.cfg.horizon,
            "k_max": self.cfg.k_max,
            "result": result,
        }
        if self.timestamp:
            doc["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        self.write(name, json.dumps(_clean(doc), indent=2, sort_keys=True, allow_nan=False) + "\n")

    # -- commands ---------------------------------------------------------

    def analyze(self) -> int:
        p = singular_profile(self.cfg.sequence, self.cfg.horizon, self.cfg.k_max)
        self.write("profile.csv", p.to_csv())
        if self.plot:
            self.write("profile_plot.dat", p.to_plot_csv())
        return OK

    def compact(self) -> int:
        c = self.cfg
        p = singular_profile(c.sequence, c.horizon, max(2, c.k_max))
        v = compactness_test(p, c.tolerances.tol)
        res = v.to_dict()
        res["essential_rank"] = essential_rank(p, c.tolerances.tol)
        res["tol"] = c.tolerances.tol
        self.report("compact.json", "compact", res)
        if self.plot:
            self.write("profile_plot.dat", p.to_plot_csv())
        return UNDECIDED if v.verdict == "Undecided" else OK

    def fredholm(self) -> int:
        c = self.cfg
        p = singular_profile(c.sequence, c.horizon, c.k_max)
        v = fredholm_test(p, c.tolerances.tau)
        res = v.to_dict()
        res["tau"] = c.tolerances.tau
        self.report("fredholm.json", "fredholm", res)
        if self.plot:
            self.write("profile_plot.dat", p.to_plot_csv())
        return UNDECIDED if v.verdict == "Undecided" else OK

    def _grid(self):
        if not self.cfg.grid:
            raise ConfigurationError("grid: required for spectrum commands")
        return self.cfg.grid

    def _plot_points(self, classifications) -> None:
        lines = ["# lambda verdict_code (0 transient, 1 essential, 2 undecided)"]
        lines += [f"{c.lam!r} {VERDICT_CODE[c.verdict]}" for c in classifications]
        self.write("spectrum_plot.dat", "\n".join(lines) + "\n")

    def spectrum(self) -> int:
        c = self.cfg
        est = essential_spectrum_estimate(c.sequence, self._grid(), c.tolerances.eps_ladder, c.horizon,
                                          c.tolerances.rules)
        self.report("spectrum.json", "spectrum", est.to_dict())
        if self.plot:
            self._plot_points(est.classifications)
        return UNDECIDED if est.undecided else OK

    def dichotomy(self) -> int:
        c = self.cfg
        rep = dichotomy_audit(c.sequence, self._grid(), c.tolerances.eps_ladder, c.horizon, c.tolerances.rules)
        self.report("dichotomy.json", "dichotomy", rep.to_dict())
        if self.plot:
            self._plot_points(rep.estimate.classifications)
        return OK if rep.flag else UNDECIDED

    def restrict(self) -> int:
        c = self.cfg
        seqs = c.family or [c.sequence]
        k_max = min(c.k_max, 16)
        req = ExtractionRequest(seqs, c.horizon, c.tolerances.epsilon, k_max, c.min_length)
        res = extract_convergent(req)
        check = verify_convergence(seqs, res.eta, c.tolerances.epsilon, k_max, c.horizon)
        self.write("eta.json", json.dumps(res.eta.to_list()) + "\n")
        self.report("restrict.json", "restrict",
                    {"extraction": res.to_dict(), "verification": check.to_dict(),
                     "epsilon": c.tolerances.epsilon})
        return OK if res.success and check.converged else UNDECIDED

    def stability(self) -> int:
        c = self.cfg
        spec = c.structured()
        v = stability_check(spec, c.horizon, c.tolerances.stability_tol)
        res = v.to_dict()
        res["noise_decay_ok"] = noise_decay_ok(spec, c.horizon)
        res["tol"] = c.tolerances.stability_tol
        self.report("stability.json", "stability", res)
        return UNDECIDED if v.verdict == "Undecided" else OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="seqspec", description="Finite-horizon analysis of matrix sequences.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="JSON analysis configuration")
    ap.add_argument("--horizon", type=int, help="override the configured horizon")
    ap.add_argument("--out", default=".", help="output directory (default: current directory)")
    ap.add_argument("--no-timestamp", action="store_true", help="omit the timestamp field from JSON reports")
    ap.add_argument("--plot-data", action="store_true", help="also write gnuplot-ready data files")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.horizon)
        runner = Runner(cfg, Path(args.out), not args.no_timestamp, args.plot_data)
        code = getattr(runner, args.command)()
    except SeqSpecError as exc:
        print(f"seqspec {args.command}: {exc}", file=sys.stderr)
        return ERROR
    for p in runner.written:
        print(p)
    return code


if __name__ == "__main__":
    sys.exit(main())
