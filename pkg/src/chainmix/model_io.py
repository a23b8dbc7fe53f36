"""Model and trajectory file I/O.

Model files are JSON objects with a top-level ``"type"`` in ``{"hmm",
"markov_mixture", "iid_mixture", "partitioned_kernel_mixture"}`` (plus the
auxiliary ``"stochastic_matrix"``) and fields mirroring the model dataclasses.
Arrays are row-major nested lists; symbol labels are strings; the fictitious
symbol is spelled ``@del`` and is implicit: it may not appear among a file's
emittable symbols, and partition files list the real cells ``E_1..E_J`` only.
The loader rejects unknown fields.

Trajectory files hold one trajectory per line as whitespace-separated symbols.
A line ``# hidden: x0 x1 ...`` attaches a hidden trace to the preceding
trajectory; other ``#`` lines are comments.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import ModelFormatError
from .model_core import (
    DELTA,
    Alphabet,
    Distribution,
    HMMModel,
    IIDMixtureModel,
    MarkovMixtureModel,
    Partition,
    PartitionedKernelMixture,
    StochasticMatrix,
)
from .sim import Trajectory

_SCHEMAS = {
    "hmm": {"type", "alphabet", "hidden_states", "pi", "P", "readout"},
    "markov_mixture": {"type", "alphabet", "y0", "weights", "components"},
    "iid_mixture": {"type", "alphabet", "weights", "components"},
    "partitioned_kernel_mixture": {"type", "alphabet", "partition", "y0", "weights", "kernels"},
    "stochastic_matrix": {"type", "labels", "rows"},
}


def _check_keys(raw: dict, kind: str, where: str) -> None:
    expected = _SCHEMAS[kind]
    unknown = sorted(set(raw) - expected)
    if unknown:
        raise ModelFormatError(f"{where}: unknown fields {unknown} for type {kind!r}")
    missing = sorted(expected - set(raw))
    if missing:
        raise ModelFormatError(f"{where}: missing fields {missing} for type {kind!r}")


def _alphabet(raw, where: str) -> Alphabet:
    if not isinstance(raw, list) or not all(isinstance(s, str) for s in raw):
        raise ModelFormatError(f"{where}: alphabet must be a list of strings")
    if DELTA in raw:
        raise ModelFormatError(
            f"{where}: {DELTA!r} is the reserved fictitious symbol and is implicit"
        )
    if len(set(raw)) != len(raw):
        raise ModelFormatError(f"{where}: alphabet labels are not unique")
    return Alphabet.of(raw)


def _array(raw, shape_hint: str, where: str) -> np.ndarray:
    try:
        arr = np.array(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"{where}: {shape_hint} is not a numeric array ({exc})") from exc
    return arr


def model_from_dict(raw: dict, where: str = "model"):
    if not isinstance(raw, dict):
        raise ModelFormatError(f"{where}: top level must be an object")
    kind = raw.get("type")
    if kind not in _SCHEMAS:
        raise ModelFormatError(
            f"{where}: type must be one of {sorted(_SCHEMAS)}, got {kind!r}"
        )
    _check_keys(raw, kind, where)
    if kind == "stochastic_matrix":
        labels = raw["labels"]
        if not isinstance(labels, list) or not all(isinstance(s, str) for s in labels):
            raise ModelFormatError(f"{where}: labels must be a list of strings")
        rows = _array(raw["rows"], "rows", where)
        if rows.ndim != 2 or rows.shape[0] != rows.shape[1] or rows.shape[0] != len(labels):
            raise ModelFormatError(f"{where}: rows must be square and match the labels")
        return StochasticMatrix(rows, tuple(labels))

    alphabet = _alphabet(raw["alphabet"], where)
    k = alphabet.size
    if kind == "hmm":
        hidden = raw["hidden_states"]
        if not isinstance(hidden, list) or not all(isinstance(s, str) for s in hidden):
            raise ModelFormatError(f"{where}: hidden_states must be a list of strings")
        n = len(hidden)
        pi = _array(raw["pi"], "pi", where)
        P = _array(raw["P"], "P", where)
        f = _array(raw["readout"], "readout", where)
        if pi.shape != (n,) or P.shape != (n, n) or f.shape != (n, k):
            raise ModelFormatError(f"{where}: pi/P/readout shapes do not match "
                                   f"{n} hidden states and {k} symbols")
        return HMMModel(tuple(hidden), alphabet, Distribution(pi),
                        StochasticMatrix(P, tuple(hidden)), f)
    if kind == "markov_mixture":
        w = _array(raw["weights"], "weights", where)
        comps = _array(raw["components"], "components", where)
        if comps.ndim != 3 or comps.shape[1:] != (k, k) or comps.shape[0] != w.shape[0]:
            raise ModelFormatError(f"{where}: components must be {w.shape[0]} matrices "
                                   f"of shape {(k, k)}")
        return MarkovMixtureModel(
            alphabet, str(raw["y0"]), Distribution(w),
            tuple(StochasticMatrix(c, alphabet.emittable) for c in comps))
    if kind == "iid_mixture":
        w = _array(raw["weights"], "weights", where)
        comps = _array(raw["components"], "components", where)
        if comps.ndim != 2 or comps.shape != (w.shape[0], k):
            raise ModelFormatError(f"{where}: components must have shape "
                                   f"{(w.shape[0], k)}")
        return IIDMixtureModel(alphabet, Distribution(w),
                               tuple(Distribution(c) for c in comps))
    # partitioned_kernel_mixture
    cells = raw["partition"]
    if (not isinstance(cells, list)
            or not all(isinstance(c, list) and all(isinstance(s, str) for s in c)
                       for c in cells)):
        raise ModelFormatError(f"{where}: partition must be a list of symbol lists")
    partition = Partition(tuple(tuple(c) for c in cells))
    w = _array(raw["weights"], "weights", where)
    kernels = _array(raw["kernels"], "kernels", where)
    if kernels.ndim != 3 or kernels.shape != (w.shape[0], partition.n_cells, k):
        raise ModelFormatError(
            f"{where}: kernels must have shape {(w.shape[0], partition.n_cells, k)}"
        )
    return PartitionedKernelMixture(alphabet, partition, Distribution(w),
                                    kernels, str(raw["y0"]))


def model_to_dict(model) -> dict:
    if isinstance(model, StochasticMatrix):
        return {"type": "stochastic_matrix", "labels": list(model.labels),
                "rows": model.rows.tolist()}
    if isinstance(model, HMMModel):
        return {"type": "hmm", "alphabet": list(model.alphabet.emittable),
                "hidden_states": list(model.hidden_states),
                "pi": model.pi.weights.tolist(), "P": model.P.rows.tolist(),
                "readout": model.readout.tolist()}
    if isinstance(model, MarkovMixtureModel):
        return {"type": "markov_mixture", "alphabet": list(model.alphabet.emittable),
                "y0": model.y0, "weights": model.weights.weights.tolist(),
                "components": [c.rows.tolist() for c in model.components]}
    if isinstance(model, IIDMixtureModel):
        return {"type": "iid_mixture", "alphabet": list(model.alphabet.emittable),
                "weights": model.weights.weights.tolist(),
                "components": [c.weights.tolist() for c in model.components]}
    if isinstance(model, PartitionedKernelMixture):
        return {"type": "partitioned_kernel_mixture",
                "alphabet": list(model.alphabet.emittable),
                "partition": [list(c) for c in model.partition.cells],
                "y0": model.y0, "weights": model.weights.weights.tolist(),
                "kernels": model.kernels.tolist()}
    raise TypeError(f"cannot serialize {type(model).__name__}")


def load_model(path):
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"{path}: not valid JSON ({exc})") from exc
    return model_from_dict(raw, where=str(path))


def save_model(model, path) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, indent=2)
        fh.write("\n")


def load_partition(path) -> Partition:
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(raw, dict) or set(raw) != {"cells"}:
        raise ModelFormatError(f"{path}: partition file must be {{\"cells\": [[...], ...]}}")
    cells = raw["cells"]
    if (not isinstance(cells, list)
            or not all(isinstance(c, list) and all(isinstance(s, str) for s in c)
                       for c in cells)):
        raise ModelFormatError(f"{path}: cells must be lists of symbol strings")
    return Partition(tuple(tuple(c) for c in cells))


def read_trajectories(path) -> list[Trajectory]:
    out: list[Trajectory] = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("hidden:"):
                    if not out:
                        raise ModelFormatError(
                            f"{path}:{lineno}: hidden trace before any trajectory"
                        )
                    hidden = tuple(body[len("hidden:"):].split())
                    prev = out[-1]
                    if len(hidden) != len(prev):
                        raise ModelFormatError(
                            f"{path}:{lineno}: hidden trace length {len(hidden)} "
                            f"!= trajectory length {len(prev)}"
                        )
                    out[-1] = Trajectory(prev.symbols, hidden, prev.source)
                continue
            out.append(Trajectory(tuple(line.split())))
    if not out:
        raise ModelFormatError(f"{path}: no trajectories found")
    return out


def write_trajectories(fh, trajectories, trace_hidden: bool = False) -> None:
    for t in trajectories:
        fh.write(" ".join(t.symbols) + "\n")
        if trace_hidden and t.hidden is not None:
            fh.write("# hidden: " + " ".join(t.hidden) + "\n")
