"""Command-line front door; a thin client of the service endpoints.

Every subcommand marshals its flags into one request against the FastAPI
app.  By default the app runs in-process, so no server is needed; pass
``--server http://host:port`` to talk to a running instance instead
(``uvicorn weam.service.app:app``).

The default seed is 42, overridable with the WEAM_SEED environment
variable; --seed wins over both.
"""

from __future__ import annotations

import argparse
import os
import sys

FORMATS_HELP = """\
file formats (all little-endian):
  .eamf features   magic EAMF, version 0x01, n uint32, count uint64,
                   count*n float32 row-major
  .eaml labels     magic EAML, version 0x01, count uint64, count uint16
                   class ids; 0xFFFF marks a rejected cue in
                   predicted-label files
  .eamr register   magic EAMR, version 0x01, n uint32, m uint32,
                   total_registrations uint64, n*m uint16 weights by
                   column then row
  .eamq quantizer  magic EAMQ, version 0x01, n uint32, m uint32,
                   n float32 mins, n float32 maxs
"""


def _default_seed() -> int:
    try:
        return int(os.environ.get("WEAM_SEED", "42"))
    except ValueError:
        return 42


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated ints: {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weam",
        description="weighted entropic associative memory toolkit",
        epilog=FORMATS_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--server", default=None,
                        help="base URL of a running service; default runs "
                             "the service in-process")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text,
                           epilog=FORMATS_HELP,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--seed", type=int, default=_default_seed())
        return p

    p = add("gen-synthetic", "generate the bundled synthetic benchmark")
    p.add_argument("--features-out", required=True)
    p.add_argument("--labels-out", required=True)
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--per-class", type=int, default=200)
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--separation", type=float, default=6.0)

    p = add("split-manifest", "export the fold shuffle for other tools")
    p.add_argument("--out", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--features", default=None,
                       help="take the item count from this feature file")
    group.add_argument("--count", type=int, default=None)

    p = add("calibrate", "calibrate a quantizer on a feature file")
    p.add_argument("--features", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--fold", type=int, default=None,
                   help="calibrate on this fold's remembered split")
    p.add_argument("--global-range", action="store_true",
                   help="normalize all features against the global extrema")

    p = add("register", "fill a register from a feature file")
    p.add_argument("--features", required=True)
    p.add_argument("--quantizer", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--memory", default=None, help="existing register to update")
    p.add_argument("--fold", type=int, default=None,
                   help="fill from this fold's remembered split")
    p.add_argument("--fill", type=float, default=100.0,
                   help="percent of the selected rows to register")

    p = add("recognize", "run the acceptance test over a feature file")
    p.add_argument("--memory", required=True)
    p.add_argument("--quantizer", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--fold", type=int, default=None,
                   help="cue with this fold's test split")
    p.add_argument("--iota", type=float, default=0.0)
    p.add_argument("--kappa", type=float, default=0.0)
    p.add_argument("--xi", type=int, default=0)
    p.add_argument("--out", default=None, help="per-cue CSV report")

    p = add("retrieve", "retrieve reconstructions for a feature file")
    p.add_argument("--memory", required=True)
    p.add_argument("--quantizer", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True, help="retrieved features (.eamf)")
    p.add_argument("--out-flags", default=None,
                   help="acceptance flags (.eaml; 0xFFFF = rejected)")
    p.add_argument("--fold", type=int, default=None)
    p.add_argument("--sigma", type=float, default=0.025)
    p.add_argument("--iota", type=float, default=0.0)
    p.add_argument("--kappa", type=float, default=0.0)
    p.add_argument("--xi", type=int, default=0)

    def add_experiment(name, help_text):
        p = add(name, help_text)
        p.add_argument("--features", required=True)
        p.add_argument("--labels", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--n", type=_int_list, default=None, dest="n_values",
                       help="comma-separated column counts")
        p.add_argument("--m", type=_int_list, default=None, dest="m_values",
                       help="comma-separated row counts")
        p.add_argument("--fold", type=_int_list, default=None, dest="folds",
                       help="comma-separated folds (default: all ten)")
        p.add_argument("--iota", type=float, default=0.0)
        p.add_argument("--kappa", type=float, default=0.0)
        p.add_argument("--xi", type=int, default=0)
        p.add_argument("--noise", type=float, default=0.0,
                       help="feature-noise level on test cues")
        p.add_argument("--global-range", action="store_true",
                       help="comparison mode: normalize against the global "
                            "extrema instead of per feature")
        return p

    p = add_experiment("grid", "precision/recall over the size grid")
    p.add_argument("--sigma", type=float, default=0.025)

    p = add_experiment("fill-sweep", "performance vs remembered-corpus portion")
    p.add_argument("--sigma", type=float, default=0.025)
    p.add_argument("--fill", type=_float_list, default=None,
                   dest="fill_percents", help="comma-separated fill percents")

    p = add_experiment("sigma-sweep", "retrieval quality across sigma values")
    p.add_argument("--sigma", type=float, default=0.025)
    p.add_argument("--sigma-values", type=_float_list, default=None)
    p.add_argument("--examples-out", default=None,
                   help="per-class retrieved features (.eamf) for rendering")

    p = add_experiment("chain", "association chains, one per class")
    p.add_argument("--sigma", type=float, default=0.04)
    p.add_argument("--depth", type=int, default=6, dest="chain_depth")
    p.add_argument("--examples-out", default=None)

    p = add("eval", "score externally produced predicted labels")
    p.add_argument("--true", required=True, dest="true_labels")
    p.add_argument("--pred", required=True, dest="predicted_labels")
    p.add_argument("--entropy", type=float, default=None)
    p.add_argument("--out", default=None, help="single-row CSV report")

    return parser


_PAYLOAD_FIELDS = {
    "gen-synthetic": ["features_out", "labels_out", "classes", "per_class",
                      "n", "separation", "seed"],
    "split-manifest": ["out", "features", "count", "seed"],
    "calibrate": ["features", "m", "out", "fold", "seed"],
    "register": ["features", "quantizer", "out", "memory", "fold", "seed"],
    "recognize": ["memory", "quantizer", "features", "fold", "iota", "kappa",
                  "xi", "seed", "out"],
    "retrieve": ["memory", "quantizer", "features", "out", "out_flags",
                 "fold", "sigma", "seed", "iota", "kappa", "xi"],
    "grid": ["features", "labels", "out", "n_values", "m_values", "folds",
             "sigma", "iota", "kappa", "xi", "seed"],
    "fill-sweep": ["features", "labels", "out", "n_values", "m_values",
                   "folds", "sigma", "iota", "kappa", "xi", "seed",
                   "fill_percents"],
    "sigma-sweep": ["features", "labels", "out", "n_values", "m_values",
                    "folds", "sigma", "iota", "kappa", "xi", "seed",
                    "sigma_values", "examples_out"],
    "chain": ["features", "labels", "out", "n_values", "m_values", "folds",
              "sigma", "iota", "kappa", "xi", "seed", "chain_depth",
              "examples_out"],
    "eval": ["true_labels", "predicted_labels", "entropy", "out"],
}

_ENDPOINTS = {
    "gen-synthetic": "/synthetic",
    "split-manifest": "/split-manifest",
    "calibrate": "/calibrate",
    "register": "/register",
    "recognize": "/recognize",
    "retrieve": "/retrieve",
    "grid": "/grid",
    "fill-sweep": "/fill-sweep",
    "sigma-sweep": "/sigma-sweep",
    "chain": "/chain",
    "eval": "/eval",
}


def _build_payload(args: argparse.Namespace) -> dict:
    payload = {}
    for field in _PAYLOAD_FIELDS[args.command]:
        if hasattr(args, field):
            payload[field] = getattr(args, field)
    if args.command == "calibrate":
        payload["per_feature"] = not args.global_range
    if args.command == "register":
        payload["fill_percent"] = args.fill
    if args.command in ("grid", "fill-sweep", "sigma-sweep", "chain"):
        payload["noise_level"] = args.noise
        payload["global_range"] = args.global_range
    return payload


def _make_client(server: str | None):
    if server:
        import httpx

        return httpx.Client(base_url=server, timeout=None)
    import warnings

    with warnings.catch_warnings():
        # fastapi's test client import warns about its httpx dependency
        warnings.simplefilter("ignore", DeprecationWarning)
        from fastapi.testclient import TestClient

    from .service.app import create_app

    return TestClient(create_app())


def _print_response(command: str, body: dict) -> None:
    if command in ("grid", "fill-sweep", "sigma-sweep", "chain"):
        print(f"{body['experiment']}: {body['rows']} rows -> {body['csv_path']}")
        print(f"manifest: {body['manifest_path']}")
        if body.get("examples_path"):
            print(f"examples: {body['examples_path']}")
        best = body.get("best")
        if best:
            keys = [k for k in ("n", "m", "fill_percent", "sigma")
                    if k in best]
            label = " ".join(f"{k}={best[k]}" for k in keys)
            print(f"best by F1: {label}  f1={best['f1_mean']:.4f} "
                  f"precision={best['precision_mean']:.4f} "
                  f"recall={best['recall_mean']:.4f} "
                  f"entropy={best['entropy_mean']:.4f}")
        if command == "chain" and body.get("summary"):
            print("class transitions:")
            for item in body["summary"]:
                print(f"  {item['transition']}: {item['count']}")
    elif command == "eval":
        print(f"cues {body['total']}: {body['correct']} correct, "
              f"{body['wrong_class']} wrong class, {body['rejected']} rejected")
        print(f"precision={body['precision']:.4f} recall={body['recall']:.4f} "
              f"accuracy={body['accuracy']:.4f} f1={body['f1']:.4f}")
        if body.get("out"):
            print(f"report: {body['out']}")
    elif command == "recognize":
        print(f"accepted {body['accepted']}/{body['total']} "
              f"(omega_bar={body['omega_bar']:.4f})")
        if body.get("out"):
            print(f"per-cue report: {body['out']}")
    elif command == "retrieve":
        print(f"retrieved {body['accepted']}/{body['total']} -> {body['out']}")
        if body.get("out_flags"):
            print(f"flags: {body['out_flags']}")
    elif command == "register":
        print(f"registered {body['registered']} patterns into "
              f"{body['n']}x{body['m']} register -> {body['out']} "
              f"({body['bytes_written']} bytes)")
        print(f"total registrations: {body['total_registrations']}, "
              f"entropy: {body['entropy']:.4f}")
    elif command == "calibrate":
        print(f"calibrated {body['n']} features at m={body['m']} on "
              f"{body['calibrated_on']} rows -> {body['out']}")
    elif command == "gen-synthetic":
        print(f"wrote {body['count']} items of width {body['n']} -> "
              f"{body['features_out']}, {body['labels_out']}")
    elif command == "split-manifest":
        print(f"wrote fold shuffle for {body['count']} items "
              f"(seed {body['seed']}) -> {body['out']}")
    else:
        print(body)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    payload = _build_payload(args)
    try:
        client = _make_client(args.server)
        with client:
            response = client.post(_ENDPOINTS[args.command], json=payload)
    except Exception as exc:  # connection failures, not HTTP errors
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        print(f"error: {detail}", file=sys.stderr)
        return 1
    _print_response(args.command, response.json())
    return 0


if __name__ == "__main__":
    sys.exit(main())
