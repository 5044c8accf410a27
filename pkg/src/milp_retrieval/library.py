"""Generator library: build, persist, load and retrieve.

On disk a library directory holds::

    manifest.json                  format_version, model checksum, entries
    instances/<class>/<file>.mps   feasible instances kept at build time
    embeddings/<class>.emb         header then count*D float32 (little-endian)

An embedding file starts with the magic ``MLEMB001``, then ``D`` and
``count`` as little-endian uint32.  The manifest records each file's
SHA-256 so truncation or edits are caught on load.
"""

from __future__ import annotations

import hashlib
import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .dataset import class_specs
from .errors import CorruptLibrary, DimensionMismatch, EmptyLibrary, InvalidParams, VersionMismatch
from .features import featurize
from .generators import GeneratorSpec, generate_instance, get_class, scale_params
from .lp import Feasibility, Limits, check_feasible
from .milp import MilpInstance
from .model.checkpoint import checkpoint_id
from .model.encoder import encode_milp
from .model.params import ModelParams
from .mps import read_mps_file, write_mps
from .rng import mix_seed
from .simlib import embed_instance

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
EMB_MAGIC = b"MLEMB001"
DEFAULT_BUDGET = Limits()
_GEN_STREAM = 0x6E4


@dataclass
class LibraryEntry:
    class_id: str
    generator: GeneratorSpec
    description: str
    instance_files: list[str]
    embeddings: np.ndarray  # (count, D), unit rows
    feasible_flags: list[bool]
    instance_specs: list[GeneratorSpec] = field(default_factory=list)
    instances: list[MilpInstance] | None = None  # in memory after a build

    def __post_init__(self) -> None:
        if self.embeddings.ndim != 2 or self.embeddings.shape[0] != len(self.instance_files):
            raise CorruptLibrary(f"{self.class_id}: embedding count differs from instance count")
        if self.embeddings.shape[0] < 1:
            raise CorruptLibrary(f"{self.class_id}: entry has no embeddings")


@dataclass
class Library:
    entries: list[LibraryEntry]
    model_ref: str
    format_version: int = FORMAT_VERSION
    root: Path | None = None

    def __post_init__(self) -> None:
        ids = [e.class_id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise CorruptLibrary("duplicate class ids in library")
        dims = {e.embeddings.shape[1] for e in self.entries}
        if len(dims) > 1:
            raise CorruptLibrary(f"inconsistent embedding dimensions {sorted(dims)}")

    @property
    def dim(self) -> int:
        return self.entries[0].embeddings.shape[1] if self.entries else 0

    def class_ids(self) -> list[str]:
        return [e.class_id for e in self.entries]

    def entry(self, class_id: str) -> LibraryEntry:
        for e in self.entries:
            if e.class_id == class_id:
                return e
        raise KeyError(class_id)

    def load_instance(self, class_id: str, k: int) -> MilpInstance:
        e = self.entry(class_id)
        if e.instances is not None:
            return e.instances[k]
        if self.root is None:
            raise CorruptLibrary("library has neither in-memory instances nor a root directory")
        return read_mps_file(self.root / e.instance_files[k])


# ------------------------------------------------------------------- build
def build_library(
    classes: Sequence[GeneratorSpec],
    per_class: int,
    params: ModelParams,
    budget: Limits = DEFAULT_BUDGET,
    sample_seed: int | None = 0,
    featurize_nodes: int = 200,
) -> Library:
    """Generate, filter by feasibility, and embed ``per_class`` instances per class.

    Instance seeds and jittered sizes derive from each class spec's seed.
    Infeasible and undecided instances are dropped; a class left empty is
    dropped with a warning.
    """
    if per_class < 1:
        raise InvalidParams("per_class must be >= 1")
    entries = []
    for base in classes:
        specs = class_specs(base.class_id, per_class, base.seed, dict(base.params))
        kept_specs, kept_inst, vecs = [], [], []
        for spec in specs:
            inst = generate_instance(spec)
            verdict = check_feasible(inst, budget)
            if verdict != Feasibility.FEASIBLE:
                log.info("%s seed %d dropped: %s", spec.class_id, spec.seed, verdict.value)
                continue
            graph = featurize(inst, max_nodes=featurize_nodes)[0]
            vecs.append(encode_milp(params, graph, sample_seed))
            kept_specs.append(spec)
            kept_inst.append(inst)
        if not kept_inst:
            log.warning("class %s dropped: no feasible instance within budget", base.class_id)
            continue
        files = [f"instances/{base.class_id}/{base.class_id}_{k}.mps" for k in range(len(kept_inst))]
        entries.append(
            LibraryEntry(
                class_id=base.class_id,
                generator=base,
                description=base.description,
                instance_files=files,
                embeddings=np.array(vecs),
                feasible_flags=[True] * len(kept_inst),
                instance_specs=kept_specs,
                instances=kept_inst,
            )
        )
    if not entries:
        raise EmptyLibrary("every class was dropped by the feasibility filter")
    return Library(entries, checkpoint_id(params))


# ------------------------------------------------------------- persistence
def _emb_bytes(X: np.ndarray) -> bytes:
    count, dim = X.shape
    return EMB_MAGIC + struct.pack("<II", dim, count) + np.ascontiguousarray(X, dtype="<f4").tobytes()


def _read_emb(data: bytes, path: str) -> np.ndarray:
    head = len(EMB_MAGIC) + 8
    if len(data) < head or data[: len(EMB_MAGIC)] != EMB_MAGIC:
        raise CorruptLibrary(f"{path}: bad embedding header")
    dim, count = struct.unpack_from("<II", data, len(EMB_MAGIC))
    if len(data) != head + 4 * dim * count:
        raise CorruptLibrary(f"{path}: expected {count}x{dim} floats, file has {len(data) - head} bytes")
    X = np.frombuffer(data[head:], dtype="<f4").astype(np.float64).reshape(count, dim)
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    if not np.all(np.isfinite(X)) or np.any(np.abs(norms - 1.0) > 1e-4):
        raise CorruptLibrary(f"{path}: embeddings are not unit vectors")
    return X


def save_library(lib: Library, directory: str | Path) -> Path:
    root = Path(directory)
    (root / "embeddings").mkdir(parents=True, exist_ok=True)
    manifest_entries = []
    for e in lib.entries:
        (root / "instances" / e.class_id).mkdir(parents=True, exist_ok=True)
        for k, rel in enumerate(e.instance_files):
            target = root / rel
            if e.instances is not None:
                target.write_bytes(write_mps(e.instances[k]))
            elif lib.root is not None and (lib.root / rel).resolve() != target.resolve():
                target.write_bytes((lib.root / rel).read_bytes())
        emb_rel = f"embeddings/{e.class_id}.emb"
        data = _emb_bytes(e.embeddings)
        (root / emb_rel).write_bytes(data)
        manifest_entries.append(
            {
                "class_id": e.class_id,
                "generator": e.generator.to_dict(),
                "description": e.description,
                "instances": [
                    {"file": f, "feasible": bool(flag), "spec": s.to_dict()}
                    for f, flag, s in zip(e.instance_files, e.feasible_flags, e.instance_specs)
                ],
                "embedding_file": emb_rel,
                "embedding_sha256": hashlib.sha256(data).hexdigest(),
                "dim": int(e.embeddings.shape[1]),
            }
        )
    manifest = {
        "format_version": lib.format_version,
        "model_checksum": lib.model_ref,
        "entries": manifest_entries,
    }
    (root / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return root


def load_library(directory: str | Path) -> Library:
    root = Path(directory)
    try:
        manifest = json.loads((root / "manifest.json").read_text())
    except FileNotFoundError:
        raise CorruptLibrary(f"{root}: no manifest.json") from None
    except json.JSONDecodeError as exc:
        raise CorruptLibrary(f"{root}/manifest.json: {exc}") from None
    version = manifest.get("format_version")
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"library format_version {version!r}; this build reads {FORMAT_VERSION}")
    entries = []
    try:
        for item in manifest["entries"]:
            emb_path = root / item["embedding_file"]
            try:
                data = emb_path.read_bytes()
            except OSError:
                raise CorruptLibrary(f"missing embedding file {item['embedding_file']}") from None
            if hashlib.sha256(data).hexdigest() != item["embedding_sha256"]:
                raise CorruptLibrary(f"{item['embedding_file']}: checksum mismatch")
            X = _read_emb(data, item["embedding_file"])
            if X.shape[1] != item["dim"]:
                raise CorruptLibrary(f"{item['embedding_file']}: dimension {X.shape[1]} != {item['dim']}")
            insts = item["instances"]
            entries.append(
                LibraryEntry(
                    class_id=item["class_id"],
                    generator=GeneratorSpec.from_dict(item["generator"]),
                    description=item["description"],
                    instance_files=[i["file"] for i in insts],
                    embeddings=X,
                    feasible_flags=[bool(i["feasible"]) for i in insts],
                    instance_specs=[GeneratorSpec.from_dict(i["spec"]) for i in insts],
                )
            )
        model_ref = manifest["model_checksum"]
    except (KeyError, TypeError) as exc:
        raise CorruptLibrary(f"malformed manifest: missing {exc}") from None
    return Library(entries, model_ref, version, root)


# ---------------------------------------------------------------- retrieval
@dataclass
class Retrieval:
    class_id: str
    score: float
    generator: GeneratorSpec
    scores: dict[str, float]  # best score per class


def retrieve_embedding(lib: Library, x: np.ndarray) -> Retrieval:
    """Argmax over classes of the best cosine with any stored instance."""
    if not lib.entries:
        raise EmptyLibrary("library has no entries")
    if x.shape != (lib.dim,):
        raise DimensionMismatch(f"target embedding has shape {x.shape}, library stores {lib.dim}")
    scores = {e.class_id: float(np.clip(e.embeddings @ x, -1.0, 1.0).max()) for e in lib.entries}
    best = None
    for cid in sorted(scores):  # lowest class_id wins ties
        if best is None or scores[cid] > scores[best]:
            best = cid
    return Retrieval(best, scores[best], lib.entry(best).generator, scores)


def retrieve(lib: Library, params: ModelParams, target: MilpInstance, sample_seed: int | None = 0) -> Retrieval:
    if not lib.entries:
        raise EmptyLibrary("library has no entries")
    if lib.model_ref != checkpoint_id(params):
        log.warning("library was built with a different model checkpoint")
    return retrieve_embedding(lib, embed_instance(params, target, sample_seed))


def retrieve_and_generate(
    lib: Library,
    params: ModelParams,
    target: MilpInstance,
    m: int,
    scale_to_target: bool = False,
    seed: int = 0,
    sample_seed: int | None = 0,
) -> tuple[Retrieval, list[MilpInstance]]:
    """Retrieve a generator and run it ``m`` times with fresh seeds.

    With ``scale_to_target`` the size parameters are first rescaled by
    ``(target n_vars / median generated n_vars) ** (1 / size_exponent)``,
    measured on the unscaled batch; if the scaled parameters are invalid
    the unscaled ones are used.
    """
    if m < 1:
        raise InvalidParams("m must be >= 1")
    hit = retrieve(lib, params, target, sample_seed)
    spec = hit.generator
    seeds = [mix_seed(seed, _GEN_STREAM, i) for i in range(m)]
    out = [generate_instance(spec.with_seed(s)) for s in seeds]
    if scale_to_target:
        median = float(np.median([inst.n_vars for inst in out]))
        gen = get_class(spec.class_id)
        factor = (target.n_vars / median) ** (1.0 / gen.size_exponent)
        try:
            scaled = spec.with_params(scale_params(spec.class_id, spec.params, factor))
        except InvalidParams as exc:
            log.warning("scaling to target failed (%s); keeping unscaled parameters", exc)
        else:
            out = [generate_instance(scaled.with_seed(s)) for s in seeds]
            hit = Retrieval(hit.class_id, hit.score, scaled, hit.scores)
    return hit, out
