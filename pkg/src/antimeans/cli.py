"""Command-line client for the antimean service.

Every command builds a typed request, dispatches it (in process by
default, or against a running server when ``--server`` is given), and
renders the typed response as JSON or a text table.  A flat JSON run
config (``--config``) can hold any flag value; explicit flags win.

Frame indices are 1-based on the command line and in run configs
(``--frame 1,2,3,4,5`` selects the first five landmarks); the service
wire format uses 0-based indices.

Exit codes: 0 success, 1 usage error, 2 numerical/statistical failure,
3 I/O or file-format failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .data import load_landmarks
from .errors import AntimeanError, SchemaError
from .service import handlers
from .service import schemas as S

EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; the contract is 1
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# config / flag merging
# ---------------------------------------------------------------------------

_CONFIG_KEYS = (
    "command", "input", "groups", "frame", "frame_indices", "nu", "alpha",
    "boot", "seed", "df_mode", "gap_tol", "format", "out", "server",
    "pairwise", "center", "kappa", "n", "scales", "kind", "reps", "g",
    "n_per", "confidence", "separation", "host", "port",
)


def _load_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise SchemaError(f"config {path} must be a JSON object")
    unknown = set(cfg) - set(_CONFIG_KEYS)
    if unknown:
        raise UsageError(f"unknown run-config keys: {sorted(unknown)}")
    return cfg


def _merged(args, key, default=None):
    value = getattr(args, key, None)
    if value is not None:
        return value
    if getattr(args, "_config", None) and key in args._config:
        return args._config[key]
    return default


def _parse_frame(value) -> tuple:
    if value is None:
        raise UsageError("this command needs --frame i1,i2,i3,i4,i5 (1-based)")
    if isinstance(value, str):
        parts = [p for p in value.replace(" ", "").split(",") if p]
    else:
        parts = list(value)
    try:
        idx = tuple(int(p) for p in parts)
    except ValueError as exc:
        raise UsageError(f"bad frame indices {value!r}") from exc
    if len(idx) != 5 or min(idx) < 1:
        raise UsageError("frame needs exactly 5 distinct 1-based indices")
    return tuple(i - 1 for i in idx)


# ---------------------------------------------------------------------------
# input loading
# ---------------------------------------------------------------------------


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON at line {exc.lineno}") from exc


def _load_one_input(path):
    """Returns ("configs", [ConfigPayload]) or ("groups", {name: [shape]})."""
    p = Path(path)
    if not p.exists():
        raise SchemaError(f"input file not found: {path}")
    if p.suffix.lower() == ".csv":
        configs = load_landmarks(p, "csv")
        return "configs", [
            S.ConfigPayload(config_id=c.config_id, landmarks=c.landmarks.tolist())
            for c in configs
        ]
    payload = _read_json(p)
    if isinstance(payload, dict) and ("shapes" in payload or "groups" in payload):
        if "groups" in payload:
            return "groups", {str(k): v for k, v in payload["groups"].items()}
        return "groups", {p.stem: payload["shapes"]}
    configs = load_landmarks(p, "json")
    return "configs", [
        S.ConfigPayload(config_id=c.config_id, landmarks=c.landmarks.tolist())
        for c in configs
    ]


def _load_groups_map(value):
    if value is None:
        return None
    if isinstance(value, dict):
        return {str(k): [str(x) for x in v] for k, v in value.items()}
    payload = _read_json(value)
    if not isinstance(payload, dict):
        raise SchemaError(f"groups file {value} must map group name -> config ids")
    return {str(k): [str(x) for x in v] for k, v in payload.items()}


def gather_groups(args) -> list:
    """Resolve --input/--groups/--frame into a list of GroupData payloads."""
    inputs = _merged(args, "input")
    if not inputs:
        raise UsageError("this command needs --input")
    if isinstance(inputs, str):
        inputs = [inputs]
    groups_map = _load_groups_map(_merged(args, "groups"))
    frame_raw = _merged(args, "frame")

    if frame_raw is None:
        frame_raw = _merged(args, "frame_indices")

    shape_groups: dict = {}
    config_pool: list = []
    per_file_configs: list = []
    for path in inputs:
        kind, loaded = _load_one_input(path)
        if kind == "groups":
            for name, shapes in loaded.items():
                if name in shape_groups:
                    raise SchemaError(f"duplicate group name {name!r}")
                shape_groups[name] = shapes
        else:
            config_pool.extend(loaded)
            per_file_configs.append((Path(path).stem, loaded))

    out = []
    if config_pool:
        frame = _parse_frame(frame_raw)
        if groups_map:
            by_id = {c.config_id: c for c in config_pool}
            known = set()
            for name, ids in groups_map.items():
                members = []
                for cid in ids:
                    if cid not in by_id:
                        raise SchemaError(f"group {name!r} references unknown config {cid!r}")
                    members.append(by_id[cid])
                    known.add(cid)
                out.append(S.GroupData(name=name, configs=members, frame_indices=frame))
            missing = [c.config_id for c in config_pool if c.config_id not in known]
            if missing:
                raise SchemaError(f"configs not assigned to any group: {missing}")
        elif len(per_file_configs) > 1:
            for name, configs in per_file_configs:
                out.append(S.GroupData(name=name, configs=configs, frame_indices=frame))
        else:
            out.append(S.GroupData(name="all", configs=config_pool, frame_indices=frame))
    for name, shapes in shape_groups.items():
        out.append(S.GroupData(name=name, shapes=shapes))
    if not out:
        raise UsageError("no observations found in the inputs")
    return out


def _load_shape_payload(value):
    if value is None:
        return None
    if isinstance(value, (list, tuple)):
        return [list(map(float, row)) for row in value]
    payload = _read_json(value)
    if isinstance(payload, dict):
        payload = payload.get("components") or payload.get("shape") or payload.get("antimean")
    if payload is None:
        raise SchemaError(f"{value}: expected a shape as a (q, m+1) array")
    return [list(map(float, row)) for row in payload]


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

_LOCAL = {
    "antimean": handlers.run_antimean,
    "test1": handlers.run_test1,
    "test2": handlers.run_test2,
    "manova": handlers.run_manova,
    "coords": handlers.run_coords,
    "synth": handlers.run_synth,
    "calibrate": handlers.run_calibrate,
}

_RESPONSE = {
    "antimean": S.AntimeanReport,
    "test1": S.TestReport,
    "test2": S.TestReport,
    "manova": S.TestReport,
    "coords": S.CoordsReport,
    "synth": S.SynthReport,
    "calibrate": S.CalibrateReport,
}


def dispatch(command: str, request, server: str | None):
    if not server:
        return _LOCAL[command](request)
    import httpx

    try:
        resp = httpx.post(
            f"{server.rstrip('/')}/v1/{command}",
            json=json.loads(request.model_dump_json()),
            timeout=3600.0,
        )
    except httpx.HTTPError as exc:
        raise SchemaError(f"cannot reach server {server}: {exc}") from exc
    if resp.status_code == 422 and "error_type" in resp.text:
        body = resp.json()
        raise AntimeanError(f"{body.get('error_type')}: {body.get('detail')}")
    if resp.status_code != 200:
        raise SchemaError(f"server error {resp.status_code}: {resp.text[:500]}")
    return _RESPONSE[command].model_validate(resp.json())


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------


def _fmt_matrix(rows, indent="  "):
    return "\n".join(
        indent + "[" + ", ".join(f"{v: .6f}" for v in row) + "]" for row in rows
    )


def render_table(report) -> str:
    lines = []
    if isinstance(report, S.AntimeanReport):
        lines.append(f"sample antimean  (n={report.n}, q={report.q}, m={report.m})")
        lines.append("components:")
        lines.append(_fmt_matrix(report.antimean))
        lines.append("per-block eigenvalues (ascending):")
        lines.append(_fmt_matrix(report.eigenvalues))
        lines.append("gap diagnostics (two smallest eigenvalues per block):")
        for d in report.gap_diagnostics:
            lines.append(
                f"  block {d.block}: d1={d.smallest[0]:.6g} d2={d.smallest[1]:.6g} gap={d.gap:.6g}"
            )
        lines.append("anticovariance:")
        lines.append(_fmt_matrix(report.anticovariance))
    elif isinstance(report, S.TestReport):
        lines.append(f"{report.command}: {report.method} calibration")
        lines.append(
            f"statistic = {report.statistic:.6g}   df = {report.df}"
            + (f" (mode {report.df_mode})" if report.df_mode else "")
        )
        lines.append(
            f"p = {report.p_value:.6g}   cutoff({1 - report.alpha:.0%}) = "
            f"{report.cutoff:.6g}   reject = {'Yes' if report.reject else 'No'}"
        )
        if report.bootstrap:
            b = report.bootstrap
            lines.append(
                f"bootstrap: B={b.B} used={b.n_used} failed={b.n_failed} "
                f"cutoff={b.cutoff:.6g} empirical p={b.empirical_p}"
            )
        if report.df_alternatives:
            lines.append("df alternatives:")
            for mode, alt in report.df_alternatives.items():
                lines.append(
                    f"  {mode}: df={alt['df']:.0f} p={alt['p_value']:.6g} cutoff={alt['cutoff']:.6g}"
                )
        if report.pairwise is not None:
            lines.append("pairwise tests:")
            pairs = "  ".join(
                f"({e.pair[0] + 1},{e.pair[1] + 1})" for e in report.pairwise
            )
            verdicts = "  ".join(e.verdict for e in report.pairwise)
            lines.append("  " + pairs)
            lines.append("  " + verdicts)
        for name, diags in report.gap_diagnostics.items():
            worst = min(diags, key=lambda d: d.gap)
            lines.append(
                f"gaps[{name}]: worst block {worst.block} gap={worst.gap:.6g}"
            )
    elif isinstance(report, S.CoordsReport):
        lines.append(f"registered projective shapes (q={report.q})")
        for entry in report.shapes:
            lines.append(f"config {entry.config_id}:")
            lines.append(_fmt_matrix(entry.components))
    elif isinstance(report, S.SynthReport):
        lines.append(
            f"synthetic sample: n={report.n} q={report.q} m={report.m}"
        )
        lines.append("true antimean:")
        lines.append(_fmt_matrix(report.true_antimean))
    elif isinstance(report, S.CalibrateReport):
        lines.append(f"calibration {report.kind}: reps={report.reps} failed={report.n_failed}")
        for key, value in report.metrics.items():
            lines.append(f"  {key} = {value:.6g}")
        lines.append("  params: " + json.dumps(report.params, sort_keys=True))
    else:
        lines.append(report.model_dump_json(indent=2))
    return "\n".join(lines)


def emit(report, args):
    fmt = _merged(args, "format", "json")
    if fmt not in ("json", "table"):
        raise UsageError(f"unknown format {fmt!r}")
    text = report.model_dump_json(indent=2) if fmt == "json" else render_table(report)
    out = _merged(args, "out")
    if out:
        try:
            Path(out).write_text(text + "\n")
        except OSError as exc:
            raise SchemaError(f"cannot write {out}: {exc}") from exc
    else:
        print(text)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _single_group(args) -> S.GroupData:
    groups = gather_groups(args)
    if len(groups) != 1:
        raise UsageError(f"this command needs exactly one group, got {len(groups)}")
    return groups[0]


def cmd_antimean(args):
    req = S.AntimeanRequest(
        data=_single_group(args), gap_tol=float(_merged(args, "gap_tol", 1e-9))
    )
    emit(dispatch("antimean", req, _merged(args, "server")), args)


def cmd_test1(args):
    nu = _load_shape_payload(_merged(args, "nu"))
    if nu is None:
        raise UsageError("test1 needs --nu (hypothesized antimean)")
    req = S.OneSampleRequest(
        data=_single_group(args),
        nu=nu,
        alpha=float(_merged(args, "alpha", 0.05)),
        boot=int(_merged(args, "boot", 0)),
        seed=int(_merged(args, "seed", 0)),
        gap_tol=float(_merged(args, "gap_tol", 1e-9)),
    )
    emit(dispatch("test1", req, _merged(args, "server")), args)


def cmd_test2(args):
    groups = gather_groups(args)
    if len(groups) != 2:
        raise UsageError(f"test2 needs exactly two groups, got {len(groups)}")
    req = S.TwoSampleRequest(
        group1=groups[0],
        group2=groups[1],
        alpha=float(_merged(args, "alpha", 0.05)),
        boot=int(_merged(args, "boot", 0)),
        seed=int(_merged(args, "seed", 0)),
        gap_tol=float(_merged(args, "gap_tol", 1e-9)),
    )
    emit(dispatch("test2", req, _merged(args, "server")), args)


_DF_MODE_ALIASES = {"3q": "3q", "g3q": "g3q", "gminus1": "gminus1"}


def cmd_manova(args):
    groups = gather_groups(args)
    if len(groups) < 2:
        raise UsageError(f"manova needs at least two groups, got {len(groups)}")
    mode = str(_merged(args, "df_mode", "3q"))
    if mode not in _DF_MODE_ALIASES:
        raise UsageError(f"--df-mode must be one of {sorted(_DF_MODE_ALIASES)}")
    req = S.ManovaRequest(
        groups=groups,
        alpha=float(_merged(args, "alpha", 0.05)),
        df_mode=_DF_MODE_ALIASES[mode],
        boot=int(_merged(args, "boot", 0)),
        seed=int(_merged(args, "seed", 0)),
        gap_tol=float(_merged(args, "gap_tol", 1e-9)),
        pairwise=bool(_merged(args, "pairwise", False)),
    )
    emit(dispatch("manova", req, _merged(args, "server")), args)


def cmd_coords(args):
    group = _single_group(args)
    if group.configs is None:
        raise UsageError("coords needs landmark configurations, not shapes")
    req = S.CoordsRequest(configs=group.configs, frame_indices=group.frame_indices)
    emit(dispatch("coords", req, _merged(args, "server")), args)


def cmd_synth(args):
    center = _load_shape_payload(_merged(args, "center"))
    if center is None:
        raise UsageError("synth needs --center (shape JSON)")
    kappa = _merged(args, "kappa", 20.0)
    scales = _merged(args, "scales")
    if isinstance(scales, str):
        scales = [float(v) for v in scales.split(",") if v]
    req = S.SynthRequest(
        center=center,
        concentration=float(kappa),
        n=int(_merged(args, "n", 100)),
        seed=int(_merged(args, "seed", 0)),
        axis_scales=scales,
    )
    emit(dispatch("synth", req, _merged(args, "server")), args)


def cmd_calibrate(args):
    kind = _merged(args, "kind")
    if kind is None:
        raise UsageError("calibrate needs --kind")
    params = {}
    for key, flag in (
        ("n", "n"), ("reps", "reps"), ("B", "boot"), ("alpha", "alpha"),
        ("seed", "seed"), ("g", "g"), ("n_per", "n_per"), ("kappa", "kappa"),
        ("confidence", "confidence"), ("separation_angle", "separation"),
    ):
        value = _merged(args, flag)
        if value is not None:
            params[key] = float(value)
    req = S.CalibrateRequest(kind=kind, params=params)
    emit(dispatch("calibrate", req, _merged(args, "server")), args)


def cmd_serve(args):
    import uvicorn

    from .service import create_app

    uvicorn.run(
        create_app(),
        host=str(_merged(args, "host", "127.0.0.1")),
        port=int(_merged(args, "port", 8000)),
    )


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="antimeans", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(fn=fn)
        p.add_argument("--config", help="flat JSON run config; flags win")
        p.add_argument("--input", action="append", help="data file (repeatable)")
        p.add_argument("--groups", help="JSON map: group name -> config ids")
        p.add_argument("--frame", help="1-based frame indices i1,i2,i3,i4,i5")
        p.add_argument("--alpha", type=float)
        p.add_argument("--boot", type=int, help="bootstrap resample count B")
        p.add_argument("--seed", type=int)
        p.add_argument("--df-mode", dest="df_mode", choices=sorted(_DF_MODE_ALIASES))
        p.add_argument("--gap-tol", dest="gap_tol", type=float)
        p.add_argument("--format", choices=("json", "table"))
        p.add_argument("--out")
        p.add_argument("--server", help="base URL of a running service")
        return p

    add("antimean", cmd_antimean, "sample antimean of one group")
    t1 = add("test1", cmd_test1, "one-sample antimean test")
    t1.add_argument("--nu", help="hypothesized antimean (shape JSON)")
    add("test2", cmd_test2, "two-sample antimean test")
    mv = add("manova", cmd_manova, "multi-group anti-MANOVA")
    mv.add_argument("--pairwise", action="store_true", default=None)
    add("coords", cmd_coords, "register landmarks to projective shapes")
    sy = add("synth", cmd_synth, "draw a synthetic sample")
    sy.add_argument("--center", help="center shape (JSON)")
    sy.add_argument("--kappa", type=float)
    sy.add_argument("--n", type=int)
    sy.add_argument("--scales", help="per-axis scales s1,s2,...")
    ca = add("calibrate", cmd_calibrate, "Monte Carlo size/coverage/power")
    ca.add_argument("--kind", choices=sorted(handlers.CALIBRATIONS))
    ca.add_argument("--n", type=int)
    ca.add_argument("--reps", type=int)
    ca.add_argument("--g", type=int)
    ca.add_argument("--n-per", dest="n_per", type=int)
    ca.add_argument("--kappa", type=float)
    ca.add_argument("--confidence", type=float)
    ca.add_argument("--separation", type=float)
    sv = sub.add_parser("serve", help="run the HTTP service")
    sv.set_defaults(fn=cmd_serve)
    sv.add_argument("--config")
    sv.add_argument("--host")
    sv.add_argument("--port", type=int)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "command", None):
        parser.print_help()
        return EXIT_USAGE
    try:
        cfg_path = getattr(args, "config", None)
        args._config = _load_config(cfg_path) if cfg_path else {}
        args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except AntimeanError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return 0


if __name__ == "__main__":
    sys.exit(main())
