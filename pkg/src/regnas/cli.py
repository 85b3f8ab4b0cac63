"""Command-line front end.

Subcommands wrap the engine one-to-one: space validation, (constrained)
sampling, single searches, family searches, weight-ratio sweeps, the
transitivity and search-direction experiments, and NFR audits of externally
produced prediction files.  Every run writes a manifest recording the
resolved configuration and input digests; re-running a manifest reproduces
all output files byte-for-byte.

Exit codes: 0 success, 2 configuration/usage errors, 3 infeasible search,
4 evaluator or data-consistency miss.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .costmodel import CostConstraint, flops, load_lut, parse_constraint_spec
from .errors import (
    ConfigError,
    DataMismatchError,
    EvaluatorMissError,
    InfeasibleError,
    RegnasError,
)
from .evaluator import PredictionTable, SyntheticSupernetModel
from .metrics import (
    RewardConfig,
    load_predictions,
    nfr_matrix,
    pair_nfr,
    relative_change,
    top1,
)
from .search import (
    SearchConfig,
    SearchResult,
    direction_compare,
    evolutionary_search,
    family_search,
    lambda_sweep,
    transitivity_check,
)
from .space import (
    SearchSpaceDef,
    constrained_sample,
    contains,
    decode,
    digest,
    encode,
    random_sample,
    validate_space,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_MISS = 4


# ---------------------------------------------------------------------------
# Deterministic file helpers
# ---------------------------------------------------------------------------

def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _write_csv(path: Path, rows: Sequence[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerows(rows)


def _write_jsonl(path: Path, objs) -> None:
    with open(path, "w") as fh:
        for obj in objs:
            fh.write(json.dumps(obj, sort_keys=True) + "\n")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _load_json_file(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed JSON: {exc}") from exc


def _load_space(path: str) -> SearchSpaceDef:
    try:
        return SearchSpaceDef.from_json(_load_json_file(path))
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"{path}: not a search-space definition: {exc}") from exc


def _load_arch(path: str, space: SearchSpaceDef):
    obj = _load_json_file(path)
    if not isinstance(obj, list):
        raise ConfigError(f"{path}: an architecture file is a JSON integer array")
    try:
        return decode(space, obj)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _load_evaluator(spec_path: Optional[str], space: SearchSpaceDef):
    if spec_path is None:
        return SyntheticSupernetModel(space=space, seed=0)
    obj = _load_json_file(spec_path)
    kind = obj.get("kind")
    if kind == "synthetic":
        try:
            return SyntheticSupernetModel(
                space=space,
                seed=int(obj.get("seed", 0)),
                n_samples=int(obj.get("n_samples", 10_000)),
                capacity_gain=float(obj.get("capacity_gain", 1.0)),
                noise_scale=float(obj.get("noise_scale", 0.3)),
                channel_block=int(obj.get("channel_block", 8)),
            )
        except ValueError as exc:
            raise ConfigError(f"{spec_path}: {exc}") from exc
    if kind == "table":
        base = Path(spec_path).parent
        n, entries = load_predictions(base / obj["path"])
        return PredictionTable.from_entries(n, entries, provenance={"path": obj["path"]})
    raise ConfigError(f"{spec_path}: evaluator kind must be 'synthetic' or 'table'")


def _constraint_from_flag(text: str) -> CostConstraint:
    kind, threshold, lut_path = parse_constraint_spec(text)
    lut = load_lut(lut_path) if lut_path else None
    return CostConstraint(kind=kind, threshold=threshold, lut=lut)


def _threads() -> int:
    raw = os.environ.get("REGNAS_THREADS", "1")
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"REGNAS_THREADS={raw!r} is not an integer") from None
    if value < 1:
        raise ConfigError("REGNAS_THREADS must be >= 1")
    return value


def _float_list(text: str, flag: str) -> list[float]:
    try:
        values = [float(x) for x in text.split(",") if x != ""]
    except ValueError:
        raise ConfigError(f"{flag} expects comma-separated numbers, got {text!r}") from None
    if not values:
        raise ConfigError(f"{flag} must list at least one value")
    return values


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _manifest(args, inputs: Sequence[str], outputs: Sequence[str], config: dict,
              out: Path, started: float) -> None:
    manifest = {
        "command": args.cmd,
        "argv": args._argv,
        "engine_version": __version__,
        "seed": getattr(args, "seed", None),
        "config": config,
        "inputs": {p: _sha256(Path(p)) for p in inputs},
        "outputs": sorted(outputs),
        "wall_clock_s": time.time() - started,
    }
    _write_json(out / "manifest.json", manifest)


def _opt(value) -> str:
    return "" if value is None else repr(value)


def _scatter_rows(entries) -> list[list]:
    rows: list[list] = [["digest", "top1", "nfr", "cost", "contains_ref"]]
    for c in entries:
        rows.append([
            c.digest,
            repr(c.top1),
            _opt(c.nfr),
            repr(c.cost),
            "" if c.contains_ref is None else int(c.contains_ref),
        ])
    return rows


def _search_outputs(out: Path, result: SearchResult, cfg: SearchConfig,
                    space: SearchSpaceDef) -> list[str]:
    best = result.best_score
    summary = {
        "best": {
            "digest": best.digest,
            "encoding": list(encode(space, result.best)),
            "top1": best.top1,
            "reward": best.reward,
            "cost": best.cost,
        },
        "config": cfg.summary_json(),
        "evaluation_slots": result.evaluation_slots,
        "distinct_evaluations": result.distinct_evaluations,
    }
    if best.nfr is not None:
        summary["best"]["nfr"] = best.nfr
    if cfg.cas_enabled and best.contains_ref is not None:
        summary["best"]["contains_ref"] = best.contains_ref
    _write_json(out / "summary.json", summary)
    _write_jsonl(out / "log.jsonl", (g.to_json() for g in result.log))
    _write_csv(out / "scatter.csv", _scatter_rows(result.scatter_entries()))
    return ["summary.json", "log.jsonl", "scatter.csv"]


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------

def _cmd_space_validate(args) -> int:
    report = validate_space(_load_space(args.space))
    if report.ok:
        size = f"{report.size}{'+ (saturated)' if report.saturated else ''}"
        print(f"ok: {size} architectures")
        return EXIT_OK
    for violation in report.violations:
        print(f"violation: {violation}", file=sys.stderr)
    return EXIT_CONFIG


def _cmd_sample(args) -> int:
    started = time.time()
    space = _load_space(args.space)
    inputs = [args.space]
    ref = None
    if args.ref:
        ref = _load_arch(args.ref, space)
        inputs.append(args.ref)
    constraint = _constraint_from_flag(args.constraint) if args.constraint else None

    archs = []
    for i in range(args.n):
        if ref is not None:
            archs.append(constrained_sample(space, ref, args.seed + i, args.direction))
        else:
            archs.append(random_sample(space, args.seed + i))

    out = _out_dir(args)
    _write_json(out / "samples.json", [list(encode(space, a)) for a in archs])
    outputs = ["samples.json"]

    if args.scatter:
        evaluator = _load_evaluator(args.evaluator, space)
        if args.evaluator:
            inputs.append(args.evaluator)
        ref_bits = evaluator.evaluate(ref) if ref is not None else None
        rows: list[list] = [["digest", "top1", "nfr", "cost", "contains_ref"]]
        for a in archs:
            bits = evaluator.evaluate(a)
            cost = constraint.cost(space, a) if constraint else flops(space, a)
            rows.append([
                digest(a),
                repr(top1(bits)),
                _opt(pair_nfr(ref_bits, bits) if ref_bits is not None else None),
                repr(cost),
                "" if ref is None else int(contains(space, ref, a)),
            ])
        _write_csv(out / "scatter.csv", rows)
        outputs.append("scatter.csv")

    config = {
        "n": args.n,
        "direction": args.direction,
        "constraint": args.constraint,
        "evaluator": args.evaluator,
    }
    _manifest(args, inputs, outputs, config, out, started)
    print(f"wrote {len(archs)} samples to {out}")
    return EXIT_OK


def _base_search_config(args, space: SearchSpaceDef, inputs: list[str]) -> SearchConfig:
    reference = None
    if getattr(args, "ref", None):
        reference = _load_arch(args.ref, space)
        inputs.append(args.ref)
    cas = bool(getattr(args, "cas", False))
    if cas and reference is None:
        raise ConfigError("--cas requires --ref")
    constraint = _constraint_from_flag(args.constraint)
    if constraint.lut is not None:
        constraint.lut.validate_against(space)
    return SearchConfig(
        reward=RewardConfig.parse(args.reward),
        constraint=constraint,
        generations=args.generations,
        population=args.population,
        mutate_prob=args.mutate_prob,
        mutation_ratio=args.mutation_ratio,
        parent_fraction=args.parent_fraction,
        cas_enabled=cas,
        cas_direction=args.direction,
        reference=reference,
        rng_seed=args.seed,
        retry_budget=args.retry_budget,
        threads=_threads(),
    )


def _cmd_search(args) -> int:
    started = time.time()
    space = _load_space(args.space)
    inputs = [args.space]
    cfg = _base_search_config(args, space, inputs)
    evaluator = _load_evaluator(args.evaluator, space)
    if args.evaluator:
        inputs.append(args.evaluator)

    result = evolutionary_search(cfg, space, evaluator)
    if cfg.cas_enabled and not result.best_score.contains_ref:
        raise RegnasError("constrained search produced a non-containing best; engine bug")

    out = _out_dir(args)
    outputs = _search_outputs(out, result, cfg, space)
    _manifest(args, inputs, outputs, cfg.summary_json(), out, started)
    best = result.best_score
    nfr_part = f" nfr={best.nfr:.4f}" if best.nfr is not None else ""
    print(f"best {best.digest}: top1={best.top1:.4f}{nfr_part} cost={best.cost:.3f}")
    return EXIT_OK


def _family_constraint(args) -> CostConstraint:
    if args.constraint_kind == "flops":
        return CostConstraint(kind="flops", threshold=1.0)
    if not args.lut:
        raise ConfigError("--constraint-kind latency requires --lut")
    return CostConstraint(kind="latency", threshold=1.0, lut=load_lut(args.lut))


def _family_dir_outputs(out: Path, family, space: SearchSpaceDef, prefix: str = "") -> list[str]:
    outputs = []
    matrix_name = f"{prefix}matrix.csv"
    _write_csv(out / matrix_name, family.matrix.to_csv_rows())
    outputs.append(matrix_name)
    for label, arch, res in zip(family.labels, family.architectures, family.results):
        name = f"{prefix}model_{label}.json"
        obj = {
            "label": label,
            "digest": res.best_score.digest,
            "encoding": list(encode(space, arch)),
            "top1": res.best_score.top1,
            "reward": res.best_score.reward,
            "cost": res.best_score.cost,
        }
        if res.best_score.nfr is not None:
            obj["nfr_vs_reference"] = res.best_score.nfr
        _write_json(out / name, obj)
        outputs.append(name)
    return outputs


def _cmd_family(args) -> int:
    started = time.time()
    space = _load_space(args.space)
    inputs = [args.space]
    budgets = _float_list(args.budgets, "--budgets")
    if len(budgets) < 2:
        raise ConfigError("--budgets needs at least two values")
    constraint = _family_constraint(args)
    if constraint.lut is not None:
        constraint.lut.validate_against(space)
        inputs.append(args.lut)
    cfg = SearchConfig(
        reward=RewardConfig.parse(args.reward),
        constraint=constraint,
        generations=args.generations,
        population=args.population,
        mutate_prob=args.mutate_prob,
        mutation_ratio=args.mutation_ratio,
        parent_fraction=args.parent_fraction,
        rng_seed=args.seed,
        retry_budget=args.retry_budget,
        threads=_threads(),
    )
    evaluator = _load_evaluator(args.evaluator, space)
    if args.evaluator:
        inputs.append(args.evaluator)

    family = family_search(space, evaluator, budgets, cfg, mode=args.mode)
    out = _out_dir(args)
    outputs = _family_dir_outputs(out, family, space)
    summary = {
        "mode": args.mode,
        "budgets": budgets,
        "labels": list(family.labels),
        "digests": [digest(a) for a in family.architectures],
        "top1": list(family.matrix.top1s),
        "mean_pairwise_nfr": family.mean_pairwise_nfr(),
    }
    _write_json(out / "summary.json", summary)
    outputs.append("summary.json")
    _manifest(args, inputs, outputs, summary | {"reward": args.reward}, out, started)
    print(f"family of {len(family.labels)}: mean pairwise NFR {family.mean_pairwise_nfr():.4f}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    started = time.time()
    space = _load_space(args.space)
    inputs = [args.space]
    cfg = _base_search_config(args, space, inputs)
    if cfg.reference is None:
        raise ConfigError("sweep requires --ref")
    ratios = _float_list(args.ratios, "--ratios")
    evaluator = _load_evaluator(args.evaluator, space)
    if args.evaluator:
        inputs.append(args.evaluator)

    rows = lambda_sweep(space, evaluator, ratios, cfg)
    out = _out_dir(args)
    table = [["ratio", "cost", "top1", "nfr"]]
    table += [[repr(r.ratio), repr(r.cost), repr(r.top1), repr(r.nfr)] for r in rows]
    _write_csv(out / "table.csv", table)
    _manifest(args, inputs, ["table.csv"], {"ratios": ratios}, out, started)
    print(f"swept {len(rows)} ratios; nfr range "
          f"[{min(r.nfr for r in rows):.4f}, {max(r.nfr for r in rows):.4f}]")
    return EXIT_OK


def _cmd_transitivity(args) -> int:
    started = time.time()
    space = _load_space(args.space)
    inputs = [args.space]
    budgets = _float_list(args.budgets, "--budgets")
    if len(budgets) != 3:
        raise ConfigError("--budgets must list exactly three values")
    constraint = _family_constraint(args)
    if constraint.lut is not None:
        constraint.lut.validate_against(space)
        inputs.append(args.lut)
    cfg = SearchConfig(
        reward=RewardConfig.parse(args.reward),
        constraint=constraint,
        generations=args.generations,
        population=args.population,
        mutate_prob=args.mutate_prob,
        mutation_ratio=args.mutation_ratio,
        parent_fraction=args.parent_fraction,
        rng_seed=args.seed,
        retry_budget=args.retry_budget,
        threads=_threads(),
    )
    evaluator = _load_evaluator(args.evaluator, space)
    if args.evaluator:
        inputs.append(args.evaluator)

    report = transitivity_check(space, evaluator, cfg, tuple(budgets))
    out = _out_dir(args)
    _write_json(out / "report.json", report.to_json())
    _manifest(args, inputs, ["report.json"], {"budgets": budgets}, out, started)
    print(f"nfr direct {report.nfr_direct:.4f} vs transitive {report.nfr_transitive:.4f} "
          f"(gap {report.gap:+.4f})")
    return EXIT_OK


def _cmd_direction(args) -> int:
    started = time.time()
    space = _load_space(args.space)
    inputs = [args.space]
    budgets = _float_list(args.budgets, "--budgets")
    if len(budgets) < 2:
        raise ConfigError("--budgets needs at least two values")
    constraint = _family_constraint(args)
    if constraint.lut is not None:
        constraint.lut.validate_against(space)
        inputs.append(args.lut)
    cfg = SearchConfig(
        reward=RewardConfig.parse(args.reward),
        constraint=constraint,
        generations=args.generations,
        population=args.population,
        mutate_prob=args.mutate_prob,
        mutation_ratio=args.mutation_ratio,
        parent_fraction=args.parent_fraction,
        rng_seed=args.seed,
        retry_budget=args.retry_budget,
        threads=_threads(),
    )
    evaluator = _load_evaluator(args.evaluator, space)
    if args.evaluator:
        inputs.append(args.evaluator)

    report = direction_compare(space, evaluator, budgets, cfg)
    out = _out_dir(args)
    _write_json(out / "report.json", report.to_json())
    outputs = ["report.json"]
    outputs += _family_dir_outputs(out, report.s2l, space, prefix="s2l_")
    outputs += _family_dir_outputs(out, report.l2s, space, prefix="l2s_")
    _manifest(args, inputs, outputs, {"budgets": budgets}, out, started)
    print(f"mean pairwise NFR: s2l {report.s2l.mean_pairwise_nfr():.4f}, "
          f"l2s {report.l2s.mean_pairwise_nfr():.4f}")
    return EXIT_OK


def _cmd_audit(args) -> int:
    started = time.time()
    if len(args.predictions) < 2:
        raise ConfigError("audit needs at least two prediction files")
    labels: list[str] = []
    vectors = []
    n_expected: Optional[int] = None
    for path in args.predictions:
        n, entries = load_predictions(path)
        if n_expected is None:
            n_expected = n
        elif n != n_expected:
            raise DataMismatchError(
                f"{path}: {n} samples, other inputs have {n_expected}"
            )
        stem = Path(path).stem
        for key, vec in entries:
            label = key if len(entries) > 1 else stem
            if label in labels:
                raise ConfigError(f"duplicate model label {label!r} across inputs")
            labels.append(label)
            vectors.append(vec)
    if len(vectors) < 2:
        raise ConfigError("audit needs at least two models")

    matrix = nfr_matrix(vectors, labels)
    ref_label = args.ref if args.ref is not None else labels[0]
    base_label = args.baseline if args.baseline is not None else labels[-1]
    for name, label in (("--ref", ref_label), ("--baseline", base_label)):
        if label not in labels:
            raise ConfigError(f"{name} {label!r} is not one of {labels}")
    ref_i = labels.index(ref_label)
    base_i = labels.index(base_label)

    top1s = [top1(v) for v in vectors]
    nfr_col = [
        None if i == ref_i else pair_nfr(vectors[ref_i], vectors[i])
        for i in range(len(vectors))
    ]
    rows: list[list] = [["model", "top1", "top1_rel_change", "nfr_vs_ref", "nfr_rel_change"]]
    for i, label in enumerate(labels):
        rel_t1 = relative_change(top1s[base_i], top1s[i]) if top1s[i] != 0 else None
        rel_nfr = None
        if nfr_col[i] not in (None, 0.0) and nfr_col[base_i] is not None:
            rel_nfr = relative_change(nfr_col[base_i], nfr_col[i])
        rows.append([label, repr(top1s[i]), _opt(rel_t1), _opt(nfr_col[i]), _opt(rel_nfr)])

    out = _out_dir(args)
    _write_csv(out / "matrix.csv", matrix.to_csv_rows())
    _write_csv(out / "relative.csv", rows)
    config = {"ref": ref_label, "baseline": base_label, "n_samples": n_expected}
    _manifest(args, list(args.predictions), ["matrix.csv", "relative.csv"], config, out, started)
    print(f"audited {len(labels)} models over {n_expected} samples")
    return EXIT_OK


def _cmd_rerun(args) -> int:
    manifest = _load_json_file(args.manifest)
    try:
        argv = list(manifest["argv"])
    except (KeyError, TypeError):
        raise ConfigError(f"{args.manifest}: manifest lacks an argv record") from None
    if "--out" in argv:
        i = argv.index("--out")
        argv[i + 1] = args.out
    else:
        argv += ["--out", args.out]
    return main(argv)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_search_knobs(p: argparse.ArgumentParser) -> None:
    p.add_argument("--generations", type=int, default=20)
    p.add_argument("--population", type=int, default=100)
    p.add_argument("--mutate-prob", type=float, default=0.1, dest="mutate_prob")
    p.add_argument("--mutation-ratio", type=float, default=0.5, dest="mutation_ratio")
    p.add_argument("--parent-fraction", type=float, default=0.25, dest="parent_fraction")
    p.add_argument("--retry-budget", type=int, default=100, dest="retry_budget")


def _add_family_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--budgets", required=True, help="comma-separated ascending budgets")
    p.add_argument("--constraint-kind", choices=["flops", "latency"], default="flops",
                   dest="constraint_kind")
    p.add_argument("--lut", help="latency table JSON (with --constraint-kind latency)")
    p.add_argument("--reward", default="r2")
    p.add_argument("--evaluator", help="evaluator config JSON")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_search_knobs(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="regnas",
        description="Regression-constrained architecture search toolkit",
    )
    parser.add_argument("--version", action="version", version=f"regnas {__version__}")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("space-validate", help="check a space definition and print its size")
    p.add_argument("space")
    p.set_defaults(handler=_cmd_space_validate)

    p = sub.add_parser("sample", help="draw (optionally constrained) random architectures")
    p.add_argument("space")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ref", help="reference architecture JSON for constrained sampling")
    p.add_argument("--direction", choices=["grow", "shrink"], default="grow")
    p.add_argument("--constraint", help="flops:MF or latency:MS@lut.json (cost column)")
    p.add_argument("--evaluator", help="evaluator config JSON (enables --scatter)")
    p.add_argument("--scatter", action="store_true", help="also evaluate and dump scatter.csv")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_sample)

    p = sub.add_parser("search", help="run one evolutionary search")
    p.add_argument("space")
    p.add_argument("--reward", required=True, help="r0|r1|r2 or 'acc_weight,nfr_weight'")
    p.add_argument("--constraint", required=True, help="flops:MF or latency:MS@lut.json")
    p.add_argument("--ref", help="reference architecture JSON")
    p.add_argument("--cas", action="store_true", help="restrict to the containment subspace")
    p.add_argument("--direction", choices=["grow", "shrink"], default="grow")
    p.add_argument("--evaluator", help="evaluator config JSON")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_search_knobs(p)
    p.set_defaults(handler=_cmd_search)

    p = sub.add_parser("family", help="search a family of models across budgets")
    p.add_argument("space")
    p.add_argument("--mode", choices=["s2l", "l2s"], default="s2l")
    _add_family_args(p)
    p.set_defaults(handler=_cmd_family)

    p = sub.add_parser("sweep", help="sweep the nfr/accuracy weight ratio")
    p.add_argument("space")
    p.add_argument("--ratios", required=True, help="comma-separated nfr/acc weight ratios")
    p.add_argument("--reward", default="r2")
    p.add_argument("--constraint", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--cas", action="store_true")
    p.add_argument("--direction", choices=["grow", "shrink"], default="grow")
    p.add_argument("--evaluator")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_search_knobs(p)
    p.set_defaults(handler=_cmd_sweep)

    p = sub.add_parser("transitivity", help="direct vs transitive constrained search")
    p.add_argument("space")
    _add_family_args(p)
    p.set_defaults(handler=_cmd_transitivity)

    p = sub.add_parser("direction", help="compare small-to-large vs large-to-small families")
    p.add_argument("space")
    _add_family_args(p)
    p.set_defaults(handler=_cmd_direction)

    p = sub.add_parser("audit", help="pairwise NFR matrix over prediction files")
    p.add_argument("predictions", nargs="+")
    p.add_argument("--ref", help="model label used as the flip baseline (default: first)")
    p.add_argument("--baseline", help="model whose relative changes are reported (default: last)")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_audit)

    p = sub.add_parser("rerun", help="re-execute a recorded manifest")
    p.add_argument("manifest")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_rerun)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args._argv = argv
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (EvaluatorMissError, DataMismatchError) as exc:
        print(f"miss: {exc}", file=sys.stderr)
        return EXIT_MISS
    except RegnasError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
