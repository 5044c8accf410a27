"""Command-line interface.

Every subcommand ends with ``key=value`` lines on stdout.  Module errors
print ``error: ...`` on stderr and exit with status 1; usage errors exit 2.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dataset import class_seed
from .errors import MilpRetrievalError
from .features import dump_graph, featurize
from .generators import (
    MANDATORY,
    TRAIN_SEEDS,
    GeneratorSpec,
    describe_instance,
    generate_instance,
    get_class,
    list_classes,
    validate_params,
)
from .library import build_library, load_library, retrieve_and_generate, save_library
from .lp import Feasibility, Limits, check_feasible
from .milp import StructStats, instance_stats
from .model import ModelConfig, TextEmbedder, kway_from_embeddings, load_checkpoint, save_checkpoint
from .model.train import EpochRecord
from .mps import read_mps_file, write_mps_file
from .pipeline import DATA_SEED, run_training
from .rng import mix_seed
from .simlib import embed_instance, js_structural_divergence, sim_matrix_from_embeddings

MODEL_ENV = "MILPRET_MODEL"
DEFAULT_SEED = 0
_GENERATE_STREAM = 0x6E7


class UsageError(MilpRetrievalError):
    pass


# ------------------------------------------------------------------ config
def read_config_file(path: str | Path) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def _pairs(items: list[str] | None) -> dict[str, str]:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise UsageError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def resolve_config(args) -> ModelConfig:
    """Preset, then config file, then ``--set`` overrides."""
    values: dict[str, str] = {}
    if getattr(args, "config", None):
        values.update(read_config_file(args.config))
    values.update(_pairs(getattr(args, "set", None)))
    preset = values.pop("preset", "toy" if getattr(args, "toy", False) else "full")
    if preset not in ("toy", "full"):
        raise UsageError(f"unknown preset {preset!r}; expected toy or full")
    base = ModelConfig.toy() if preset == "toy" else ModelConfig()
    merged = base.to_dict()
    merged.update(values)
    if "ffn_dim" not in values and "emb_size" in values:
        merged["ffn_dim"] = 0
    return ModelConfig.from_dict(merged)


def _parse_params(class_id: str, items: list[str] | None) -> dict:
    gen = get_class(class_id)
    params = gen.defaults()
    schema = gen.schema()
    for k, v in _pairs(items).items():
        if k not in schema:
            raise UsageError(f"{class_id} has no parameter {k!r}; known: {', '.join(schema)}")
        params[k] = schema[k].coerce(float(v))
    return validate_params(class_id, params)


def _model_path(args) -> str:
    path = args.model or os.environ.get(MODEL_ENV)
    if not path:
        raise UsageError(f"no model given; pass --model or set {MODEL_ENV}")
    return path


def _class_list(text: str | None, default) -> list[str]:
    if not text:
        return list(default)
    ids = [c.strip() for c in text.split(",") if c.strip()]
    for c in ids:
        get_class(c)
    return ids


def _mps_files(directory: str | Path) -> list[Path]:
    files = sorted(Path(directory).glob("*.mps"))
    if not files:
        raise UsageError(f"no .mps files in {directory}")
    return files


def _class_of(path: Path) -> str:
    return path.stem.split("_", 1)[0]


def _limits(args) -> Limits:
    return Limits(max_nodes=args.max_nodes, max_seconds=args.max_seconds)


def _emit(**kv) -> None:
    for k, v in kv.items():
        print(f"{k}={v}")


def _write_csv(path: str | None, header: list[str], rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    if path:
        Path(path).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


# --------------------------------------------------------------- commands
def cmd_generate(args) -> None:
    params = _parse_params(args.cls, args.param)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for i in range(args.count):
        spec = GeneratorSpec(args.cls, params, mix_seed(args.seed, _GENERATE_STREAM, i))
        inst = generate_instance(spec)
        name = f"{args.cls}_{args.seed}_{i}.mps"
        write_mps_file(inst, out / name)
        rows.append([name, *instance_stats(inst).as_array()])
    if args.count:
        _write_csv(str(out / "stats.csv"), ["file", *StructStats.field_names()], rows)
    _emit(count=args.count, out=out)


def cmd_featurize(args) -> None:
    inst = read_mps_file(args.input)
    graph, lp, milp = featurize(inst, max_nodes=args.nodes)
    text = dump_graph(graph)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    _emit(n_vars=graph.n, n_cons=graph.m, edges=graph.edge_cons.size, lp_status=lp.status.value)


def cmd_train(args) -> None:
    cfg = resolve_config(args)
    if args.library:
        classes = load_library(args.library).class_ids()
    else:
        classes = _class_list(args.classes, TRAIN_SEEDS)
    history_rows = []

    def progress(rec: EpochRecord) -> None:
        history_rows.append(rec.row())
        if args.verbose:
            print(" ".join(f"{c}={v}" for c, v in zip(EpochRecord.columns(), rec.row())), file=sys.stderr)

    run = run_training(classes, args.per_class, cfg, args.data_seed, progress=progress)
    digest = save_checkpoint(run.params, args.out)
    if args.history:
        _write_csv(args.history, EpochRecord.columns(), history_rows)
    last = run.history[-1] if run.history else None
    _emit(
        checkpoint=args.out,
        sha256=digest,
        epochs=len(run.history),
        final_train_loss=f"{last.train_loss:.6f}" if last else "nan",
    )


def cmd_embed(args) -> None:
    params = load_checkpoint(_model_path(args))
    rows = []
    for f in args.inputs:
        x = embed_instance(params, read_mps_file(f), args.sample_seed)
        rows.append([Path(f).stem, *(f"{v:.9g}" for v in x)])
    buf = "".join(",".join(map(str, r)) + "\n" for r in rows)
    if args.out:
        Path(args.out).write_text(buf)
    else:
        sys.stdout.write(buf)
    _emit(count=len(rows), dim=params.cfg.out_dim)


def cmd_sim(args) -> None:
    params = load_checkpoint(_model_path(args))
    if args.matrix:
        files = _mps_files(args.matrix)
        X = np.array([embed_instance(params, read_mps_file(f), args.sample_seed) for f in files])
        mat = sim_matrix_from_embeddings(X, [f.stem for f in files])
        if args.out:
            Path(args.out).write_text(mat.to_csv())
        else:
            sys.stdout.write(mat.to_csv())
        _emit(size=len(files))
        return
    if len(args.pair) != 2:
        raise UsageError("sim needs two MPS files or --matrix DIR")
    a, b = (embed_instance(params, read_mps_file(f), args.sample_seed) for f in args.pair)
    _emit(sim=f"{float(np.clip(a @ b, -1.0, 1.0)):.6f}")


def cmd_retrieve(args) -> None:
    lib = load_library(args.library)
    params = load_checkpoint(_model_path(args))
    target = read_mps_file(args.target)
    m = max(args.generate, 1)
    hit, insts = retrieve_and_generate(lib, params, target, m, args.scale, args.seed, args.sample_seed)
    for cid in sorted(hit.scores):
        print(f"score.{cid}={hit.scores[cid]:.6f}")
    if args.generate:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for i, inst in enumerate(insts):
            write_mps_file(inst, out / f"{hit.class_id}_{args.seed}_{i}.mps")
    _emit(
        class_id=hit.class_id,
        score=f"{hit.score:.6f}",
        params=";".join(f"{k}:{v}" for k, v in hit.generator.params.items()),
        generated=args.generate,
    )


def cmd_eval(args) -> None:
    if args.mode == "kway":
        params = load_checkpoint(_model_path(args))
        files = _mps_files(args.inputs[0])
        embedder = TextEmbedder(params.cfg.out_dim)
        P, T = [], []
        for f in files:
            inst = read_mps_file(f)
            P.append(embed_instance(params, inst, args.sample_seed))
            T.append(embedder.encode(describe_instance(_class_of(f), inst)))
        acc = kway_from_embeddings(np.array(P), np.array(T), args.k, args.trials, args.seed)
        _write_csv(args.out, ["k", "milp_to_text", "text_to_milp"], [[args.k, *acc]])
        _emit(k=args.k, milp_to_text=f"{acc[0]:.6f}", text_to_milp=f"{acc[1]:.6f}")
    elif args.mode == "js":
        if len(args.inputs) != 2:
            raise UsageError("js needs two directories")
        groups = [[read_mps_file(f) for f in _mps_files(d)] for d in args.inputs]
        js = js_structural_divergence(*groups)
        _write_csv(args.out, ["group_a", "group_b", "js"], [[*args.inputs, f"{js:.6f}"]])
        _emit(js=f"{js:.6f}")
    else:
        files = _mps_files(args.inputs[0])
        limits = _limits(args)
        rows = [[f.name, check_feasible(read_mps_file(f), limits).value] for f in files]
        ratio = sum(r[1] == Feasibility.FEASIBLE.value for r in rows) / len(rows)
        _write_csv(args.out, ["file", "status"], rows)
        _emit(count=len(rows), feasible_ratio=f"{ratio:.6f}")


def cmd_library_build(args) -> None:
    params = load_checkpoint(_model_path(args))
    classes = _class_list(args.classes, MANDATORY)
    specs = [
        GeneratorSpec(c, get_class(c).defaults(), class_seed(args.seed, c), get_class(c).description)
        for c in classes
    ]
    lib = build_library(specs, args.per_class, params, _limits(args), args.sample_seed)
    save_library(lib, args.out)
    _emit(entries=len(lib.entries), instances=sum(len(e.instance_files) for e in lib.entries), out=args.out)


# ------------------------------------------------------------------ parser
def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="milp-retrieval", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--log-level", default="WARNING")
    sub = p.add_subparsers(dest="command", required=True)

    def model_opts(sp):
        sp.add_argument("--model", help=f"checkpoint path (default ${MODEL_ENV})")
        sp.add_argument("--sample-seed", type=int, default=0)

    def budget_opts(sp):
        sp.add_argument("--max-nodes", type=int, default=Limits.max_nodes)
        sp.add_argument("--max-seconds", type=float, default=Limits.max_seconds)

    g = sub.add_parser("generate", help="write instances of one class")
    g.add_argument("--class", dest="cls", required=True, help="one of " + ", ".join(c.class_id for c in list_classes()))
    g.add_argument("--param", action="append", metavar="KEY=VALUE")
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--seed", type=int, default=DEFAULT_SEED)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    f = sub.add_parser("featurize", help="bipartite graph of one MPS file")
    f.add_argument("input")
    f.add_argument("--out")
    f.add_argument("--nodes", type=int, default=200)
    f.set_defaults(func=cmd_featurize)

    t = sub.add_parser("train", help="contrastive training on generated pairs")
    t.add_argument("--config")
    t.add_argument("--set", action="append", metavar="KEY=VALUE")
    t.add_argument("--toy", action="store_true", help="start from the toy preset")
    t.add_argument("--print-config", action="store_true")
    t.add_argument("--classes", help="comma-separated class ids")
    t.add_argument("--library", help="train on the classes of a library")
    t.add_argument("--per-class", type=int, default=20)
    t.add_argument("--data-seed", type=int, default=DATA_SEED)
    t.add_argument("--out", default="model.ckpt")
    t.add_argument("--history")
    t.add_argument("--verbose", action="store_true")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("embed", help="embedding vectors as id,floats lines")
    e.add_argument("inputs", nargs="+")
    e.add_argument("--out")
    model_opts(e)
    e.set_defaults(func=cmd_embed)

    s = sub.add_parser("sim", help="embedding similarity")
    s.add_argument("pair", nargs="*")
    s.add_argument("--matrix", help="directory of MPS files")
    s.add_argument("--out")
    model_opts(s)
    s.set_defaults(func=cmd_sim)

    r = sub.add_parser("retrieve", help="retrieve a generator for a target")
    r.add_argument("target")
    r.add_argument("--library", required=True)
    r.add_argument("--generate", type=int, default=0)
    r.add_argument("--scale", action="store_true")
    r.add_argument("--seed", type=int, default=DEFAULT_SEED)
    r.add_argument("--out", default="generated")
    model_opts(r)
    r.set_defaults(func=cmd_retrieve)

    v = sub.add_parser("eval", help="kway, js or feasible-ratio metrics")
    v.add_argument("mode", choices=["kway", "js", "feasible-ratio"])
    v.add_argument("inputs", nargs="+", help="directories of MPS files")
    v.add_argument("--k", type=int, default=4)
    v.add_argument("--trials", type=int, default=200)
    v.add_argument("--seed", type=int, default=DEFAULT_SEED)
    v.add_argument("--out")
    model_opts(v)
    budget_opts(v)
    v.set_defaults(func=cmd_eval)

    b = sub.add_parser("library-build", help="build and save a generator library")
    b.add_argument("--classes", help="comma-separated class ids (default: mandatory set)")
    b.add_argument("--per-class", type=int, default=20)
    b.add_argument("--seed", type=int, default=DEFAULT_SEED)
    b.add_argument("--out", required=True)
    model_opts(b)
    budget_opts(b)
    b.set_defaults(func=cmd_library_build)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    try:
        if getattr(args, "print_config", False):
            for k, v in resolve_config(args).to_dict().items():
                print(f"{k} = {v}")
            return 0
        args.func(args)
    except (MilpRetrievalError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
