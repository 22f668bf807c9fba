"""Command-line entry point: ``localmps <command> [options]``.

Every flag can also come from ``--config FILE``, a plain ``key = value``
file whose keys are the flag names without leading dashes (``dprime = 2,4,8``).
Flags given on the command line win over the file.

Exit status: 0 on success, 1 when an acceptance check fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import contextlib
import datetime as _dt
import hashlib
import json
import os
import sys
from typing import Optional, Sequence

from . import bounds, entanglement, mps as mpslib, states
from .construction import construct
from .errors import LocalMpsError
from .verify import max_local_error_multi, sweep

THREADS_ENV = "LOCALMPS_THREADS"


class UsageError(Exception):
    pass


# -- state specs --------------------------------------------------------------

def _parse_kv(text: str, allowed: Sequence[str] = ()) -> dict:
    out = {}
    for item in filter(None, (x.strip() for x in text.split(","))):
        if "=" not in item:
            raise UsageError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    unknown = set(out) - set(allowed) if allowed else set()
    if unknown:
        raise UsageError(f"unknown state parameter(s) {sorted(unknown)}")
    return out


def parse_state_spec(spec: str) -> mpslib.Mps:
    """Build a state from ``kind[:args]``; see the README for the grammar."""
    kind, _, args = spec.partition(":")
    kind = kind.strip().lower()
    try:
        if kind in ("product", "ghz", "w", "aklt"):
            n = int(args) if args and "=" not in args else int(_parse_kv(args).get("n", 0))
            return states.named_state(kind, n)
        if kind == "random":
            kv = _parse_kv(args, ("n", "d", "D", "seed"))
            return states.random_mps(int(kv["n"]), int(kv.get("d", 2)), int(kv.get("D", 4)), int(kv.get("seed", 0)))
        if kind == "tfim":
            kv = _parse_kv(args, ("n", "h", "method", "D", "sweeps", "seed"))
            n, h = int(kv["n"]), float(kv["h"])
            method = kv.get("method", "ed" if n <= 12 else "dmrg")
            if method not in ("ed", "dmrg"):
                raise UsageError(f"tfim method must be ed or dmrg, got {method!r}")
            if method == "ed":
                return states.tfim_exact_ground(n, h)[1]
            res = states.mps_ground_search(
                states.tfim_hamiltonian(n, h), int(kv.get("D", 24)), int(kv.get("sweeps", 12)), int(kv.get("seed", 0))
            )
            return res.state
        if kind == "file":
            return mpslib.load(args)
    except (KeyError, ValueError) as exc:
        if isinstance(exc, LocalMpsError):
            raise
        raise UsageError(f"bad state spec {spec!r}: {exc}") from exc
    raise UsageError(f"unknown state kind {kind!r}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"expected a comma-separated integer list, got {text!r}") from exc


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"expected a comma-separated number list, got {text!r}") from exc


# -- config and output ---------------------------------------------------------

def read_config(path: str) -> dict:
    out = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"config line without '=': {raw.rstrip()}")
            k, v = line.split("=", 1)
            out[k.strip().replace("-", "_")] = v.strip()
    return out


def provenance(command: str, config: dict, state: Optional[mpslib.Mps] = None) -> dict:
    h = hashlib.sha256()
    h.update(command.encode())
    h.update(json.dumps(config, sort_keys=True, default=str).encode())
    if state is not None:
        h.update(mpslib.dumps(state))
    return {"command": command, "config": config, "input_sha256": h.hexdigest()}


def _write(path: Optional[str], text: str) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)


def _json_doc(body: dict) -> str:
    doc = dict(body)
    doc["metadata"] = {"timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat()}
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


# -- commands -----------------------------------------------------------------

def cmd_state_make(a) -> int:
    psi = parse_state_spec(a.state)
    mpslib.save(psi, a.out)
    print(f"state {a.state}: n={psi.n} d={psi.d} max_bond={psi.max_bond} -> {a.out}")
    return 0


def cmd_entropy(a) -> int:
    psi = parse_state_spec(a.state)
    prof = entanglement.entropy_profile(psi, float(a.alpha))
    _write(a.out, prof.to_csv())
    print(f"entropy alpha={a.alpha}: max={prof.max_entropy:.6g} nats over {len(prof.per_cut)} cuts")
    return 0


def cmd_truncate_profile(a) -> int:
    psi = parse_state_spec(a.state)
    prof = entanglement.truncation_profile(psi, int(a.dprime))
    _write(a.out, prof.to_csv())
    print(f"truncation D'={a.dprime}: epsilon={prof.epsilon:.6g}")
    return 0


def _config_of(a, keys) -> dict:
    return {k: getattr(a, k) for k in keys}


def cmd_construct(a) -> int:
    psi = parse_state_spec(a.state)
    dprime = _int_list(a.dprime)
    if len(dprime) != 1:
        raise UsageError("construct takes a single --dprime")
    phi, rep = construct(
        psi, dprime[0], seed=int(a.seed), widths=_int_list(a.widths),
        retry_budget=int(a.retry_budget), threshold=float(a.threshold),
    )
    rep.provenance = provenance("construct", _config_of(a, ("state", "dprime", "seed", "widths", "retry_budget", "threshold")), psi)
    body = rep.to_dict(include_metadata=False)
    _write(a.out, _json_doc(body))
    if a.phi_out:
        mpslib.save(phi, a.phi_out)
    print(
        f"construct D'={dprime[0]}: eps={rep.epsilon:.3g} m={rep.m} M={rep.M} bond={rep.bond_dim_phi} "
        f"max_local_error={rep.max_local_error:.3g} accepted={rep.accepted}"
    )
    return 0 if rep.accepted else 1


def cmd_verify(a) -> int:
    psi = parse_state_spec(a.state)
    phi = mpslib.load(a.phi)
    err, per = max_local_error_multi(psi, phi, _int_list(a.widths))
    body = {
        "max_local_error": err,
        "per_window_errors": [list(x) for x in per],
        "threshold": float(a.threshold),
        "accepted": bool(err <= float(a.threshold)),
        "provenance": provenance("verify", _config_of(a, ("state", "phi", "widths", "threshold")), psi),
    }
    _write(a.out, _json_doc(body))
    print(f"verify: max_local_error={err:.3g} accepted={body['accepted']}")
    return 0 if body["accepted"] else 1


def cmd_sweep(a) -> int:
    psi = parse_state_spec(a.state)
    res = sweep(psi, _int_list(a.dprime), widths=_int_list(a.widths), seed=int(a.seed), retry_budget=int(a.retry_budget))
    _write(a.out, res.to_csv())
    if a.json_out:
        body = {
            "rows": res.rows,
            "slope": res.slope,
            "curve_constant": res.curve_constant,
            "provenance": provenance("sweep", _config_of(a, ("state", "dprime", "seed", "widths", "retry_budget")), psi),
        }
        _write(a.json_out, _json_doc(body))
    errs = res.errors()
    ok = all(r["accepted"] for r in res.rows)
    print(f"sweep over D'={a.dprime}: errors={['%.3g' % e for e in errs]} slope={res.slope} accepted={ok}")
    return 0 if ok else 1


def cmd_plan(a) -> int:
    if a.invert:
        D = bounds.invert_vc06(float(a.renyi), float(a.alpha), float(a.epsilon))
        print(f"plan: smallest D with tail bound <= {a.epsilon}: {D}")
        _write(a.out, f"renyi,alpha,epsilon,D\n{a.renyi},{a.alpha},{a.epsilon},{D}\n")
        return 0
    params = {}
    if a.alpha is not None:
        params["alpha"] = float(a.alpha)
    if a.gap is not None:
        params["gap"] = float(a.gap)
    if a.c_alpha is not None:
        params["c_alpha"] = float(a.c_alpha)
    law = bounds.scaling_law(a.law, amplitude=float(a.amplitude), log_power=float(a.log_power), **params)
    deltas = _float_list(a.deltas)
    _write(a.out, law.to_csv(deltas))
    extra = f" exponent={law.exponent:.6g}" if law.exponent is not None else ""
    print(f"plan {a.law}:{extra} ln D at delta={deltas[-1]:g} is {law.log_D(deltas[-1]):.6g}")
    return 0


def cmd_selftest(a) -> int:
    from .selftest import run_selftest

    return 0 if run_selftest(verbose=True) else 1


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="localmps", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="key = value file mirroring the flags")
    sub = p.add_subparsers(dest="command", required=True)

    st = sub.add_parser("state", help="state I/O")
    stsub = st.add_subparsers(dest="state_command", required=True)
    mk = stsub.add_parser("make", help="build a state and save it as MPS1")
    mk.add_argument("--state")
    mk.add_argument("--out")
    mk.set_defaults(func=cmd_state_make, required=("state", "out"))

    en = sub.add_parser("entropy", help="per-cut Renyi entropy CSV")
    en.add_argument("--state")
    en.add_argument("--alpha", default="0.5")
    en.add_argument("--out")
    en.set_defaults(func=cmd_entropy, required=("state",))

    tp = sub.add_parser("truncate-profile", help="per-cut truncation tails CSV")
    tp.add_argument("--state")
    tp.add_argument("--dprime")
    tp.add_argument("--out")
    tp.set_defaults(func=cmd_truncate_profile, required=("state", "dprime"))

    def run_flags(q):
        q.add_argument("--state")
        q.add_argument("--dprime")
        q.add_argument("--seed", default="0")
        q.add_argument("--widths", default="1,2,3")
        q.add_argument("--retry-budget", dest="retry_budget", default="8")
        q.add_argument("--out")

    co = sub.add_parser("construct", help="build phi and report its local error")
    run_flags(co)
    co.add_argument("--threshold", default="0.5")
    co.add_argument("--phi-out", dest="phi_out")
    co.set_defaults(func=cmd_construct, required=("state", "dprime"))

    ve = sub.add_parser("verify", help="local error between a state and a saved phi")
    ve.add_argument("--state")
    ve.add_argument("--phi")
    ve.add_argument("--widths", default="1,2,3")
    ve.add_argument("--threshold", default="0.5")
    ve.add_argument("--out")
    ve.set_defaults(func=cmd_verify, required=("state", "phi"))

    sw = sub.add_parser("sweep", help="construct over a D' grid, CSV table")
    run_flags(sw)
    sw.add_argument("--json-out", dest="json_out")
    sw.set_defaults(func=cmd_sweep, required=("state", "dprime"))

    pl = sub.add_parser("plan", help="bond-dimension budgets")
    pl.add_argument("--law", default="thm1_area", choices=bounds.LAW_TAGS)
    pl.add_argument("--alpha")
    pl.add_argument("--gap")
    pl.add_argument("--c-alpha", dest="c_alpha")
    pl.add_argument("--amplitude", default="1.0")
    pl.add_argument("--log-power", dest="log_power", default="0.0")
    pl.add_argument("--deltas", default="0.1,0.01,0.001")
    pl.add_argument("--invert", action="store_true", help="invert the Renyi tail bound instead")
    pl.add_argument("--renyi")
    pl.add_argument("--epsilon")
    pl.add_argument("--out")
    pl.set_defaults(func=cmd_plan, required=())

    se = sub.add_parser("selftest", help="run the built-in invariant suites")
    se.set_defaults(func=cmd_selftest, required=())
    return p


def _merge_config(parser, args, argv) -> None:
    if not args.config:
        return
    cfg = read_config(args.config)
    given = {tok.split("=", 1)[0].lstrip("-").replace("-", "_") for tok in argv if tok.startswith("--")}
    for k, v in cfg.items():
        if k in given:
            continue
        if not hasattr(args, k):
            raise UsageError(f"unknown config key {k!r}")
        if k == "invert":
            v = v.lower() in ("1", "true", "yes")
        setattr(args, k, v)


@contextlib.contextmanager
def _thread_limit():
    value = os.environ.get(THREADS_ENV)
    if not value:
        yield
        return
    from threadpoolctl import threadpool_limits

    with threadpool_limits(limits=int(value)):
        yield


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _merge_config(parser, args, argv)
        missing = [k for k in args.required if getattr(args, k, None) in (None, "")]
        if missing:
            raise UsageError("missing required option(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))
        if args.command == "plan" and args.invert and None in (args.renyi, args.alpha, args.epsilon):
            raise UsageError("--invert needs --renyi, --alpha and --epsilon")
        with _thread_limit():
            return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"localmps: error: {exc}", file=sys.stderr)
        return 2
    except LocalMpsError as exc:
        print(f"localmps: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
