"""Model checkpoints: networks and extractors as .npz, trees and flat
parameter records as JSON. Loads reproduce the saved model bit-exactly.
"""

from __future__ import annotations

import json

import numpy as np

from .classifiers import FittedClassifier
from .classifiers.bayes import GnbModel
from .classifiers.logistic import LrModel
from .classifiers.tree import TreeNode
from .extract import AeModel, LdaModel, PcaModel
from .nn.layers import LayerSpec
from .nn.network import Network, TrainHistory, build_network

FORMAT_VERSION = 1


def _specs_to_json(specs) -> str:
    return json.dumps([s.to_dict() for s in specs])


def _specs_from_json(blob) -> list[LayerSpec]:
    return [LayerSpec(**d) for d in json.loads(blob)]


def _save_npz(path, meta: dict, arrays: list[np.ndarray]) -> None:
    payload = {f"arr_{i}": a for i, a in enumerate(arrays)}
    payload["meta"] = np.array(json.dumps(meta))
    # write through a handle so numpy keeps the caller's exact filename
    with open(path, "wb") as fh:
        np.savez(fh, **payload)


def _load_npz(path):
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["meta"]))
        arrays = [data[f"arr_{i}"] for i in range(meta["n_arrays"])]
    return meta, arrays


def _network_payload(net: Network) -> tuple[dict, list[np.ndarray]]:
    params = net.params()
    meta = {
        "specs": _specs_to_json(net.specs),
        "input_dim": net.input_dim,
        "n_arrays": len(params),
    }
    return meta, params


def _network_from_payload(meta: dict, arrays) -> Network:
    net = build_network(_specs_from_json(meta["specs"]), meta["input_dim"])
    params = net.params()
    if len(params) != len(arrays):
        raise ValueError("checkpoint parameter count does not match the spec")
    for p, a in zip(params, arrays):
        if p.shape != a.shape:
            raise ValueError("checkpoint tensor shape does not match the spec")
        p[...] = a
    return net


def _tree_to_dict(node: TreeNode) -> dict:
    if node.is_leaf:
        return {"counts": list(node.counts)}
    return {
        "feature": node.feature,
        "threshold": node.threshold,
        "left": _tree_to_dict(node.left),
        "right": _tree_to_dict(node.right),
        "counts": list(node.counts) if node.counts else None,
    }


def _tree_from_dict(d: dict) -> TreeNode:
    if "feature" not in d:
        return TreeNode(counts=tuple(d["counts"]))
    return TreeNode(
        feature=d["feature"],
        threshold=d["threshold"],
        left=_tree_from_dict(d["left"]),
        right=_tree_from_dict(d["right"]),
        counts=tuple(d["counts"]) if d.get("counts") else None,
    )


def save_model(model, path) -> None:
    """Write one fitted model; the format is chosen by model type."""
    if isinstance(model, FittedClassifier):
        if isinstance(model.model, Network):
            meta, arrays = _network_payload(model.model)
            meta.update(version=FORMAT_VERSION, type="classifier",
                        kind=model.kind, n_features=model.n_features)
            _save_npz(path, meta, arrays)
            return
        doc = {"version": FORMAT_VERSION, "type": "classifier",
               "kind": model.kind, "n_features": model.n_features,
               "inner": _shallow_to_dict(model.model)}
        _write_json(path, doc)
        return
    if isinstance(model, Network):
        meta, arrays = _network_payload(model)
        meta.update(version=FORMAT_VERSION, type="network")
        _save_npz(path, meta, arrays)
    elif isinstance(model, AeModel):
        meta, arrays = _network_payload(model.network)
        meta.update(version=FORMAT_VERSION, type="autoencoder",
                    n_encoder_layers=model.n_encoder_layers,
                    bottleneck=model.bottleneck, final_loss=model.final_loss)
        _save_npz(path, meta, arrays)
    elif isinstance(model, PcaModel):
        arrays = [model.mean, model.components, model.singular_values,
                  model.explained_variance]
        _save_npz(path, {"version": FORMAT_VERSION, "type": "pca",
                         "total_variance": model.total_variance,
                         "n_arrays": len(arrays)}, arrays)
    elif isinstance(model, LdaModel):
        arrays = [model.projection, model.class_means]
        _save_npz(path, {"version": FORMAT_VERSION, "type": "lda",
                         "output_variance": model.output_variance,
                         "zero_separation": model.zero_separation,
                         "n_arrays": len(arrays)}, arrays)
    elif isinstance(model, TreeNode):
        _write_json(path, {"version": FORMAT_VERSION, "type": "tree",
                           "root": _tree_to_dict(model)})
    elif isinstance(model, (LrModel, GnbModel)):
        _write_json(path, {"version": FORMAT_VERSION,
                           "type": "lr" if isinstance(model, LrModel) else "gnb",
                           "inner": _shallow_to_dict(model)})
    else:
        raise TypeError(f"cannot persist objects of type {type(model).__name__}")


def _shallow_to_dict(model) -> dict:
    if isinstance(model, TreeNode):
        return {"type": "tree", "root": _tree_to_dict(model)}
    if isinstance(model, LrModel):
        return {"type": "lr", "weights": model.weights.tolist(), "bias": model.bias,
                "C": model.C, "converged": model.converged,
                "iterations_used": model.iterations_used}
    if isinstance(model, GnbModel):
        return {"type": "gnb", "priors": model.priors.tolist(),
                "means": model.means.tolist(), "variances": model.variances.tolist(),
                "smoothing": model.smoothing}
    raise TypeError(f"cannot persist objects of type {type(model).__name__}")


def _shallow_from_dict(doc: dict):
    if doc["type"] == "tree":
        return _tree_from_dict(doc["root"])
    if doc["type"] == "lr":
        return LrModel(weights=np.array(doc["weights"], dtype=np.float64),
                       bias=doc["bias"], C=doc["C"], converged=doc["converged"],
                       iterations_used=doc["iterations_used"])
    if doc["type"] == "gnb":
        return GnbModel(priors=np.array(doc["priors"], dtype=np.float64),
                        means=np.array(doc["means"], dtype=np.float64),
                        variances=np.array(doc["variances"], dtype=np.float64),
                        smoothing=doc["smoothing"])
    raise ValueError(f"unknown shallow model type {doc['type']!r}")


def _write_json(path, doc) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_model(path):
    """Read back anything save_model wrote."""
    with open(path, "rb") as fh:
        magic = fh.read(2)
    if magic == b"PK":  # npz is a zip archive
        meta, arrays = _load_npz(path)
        if meta["version"] != FORMAT_VERSION:
            raise ValueError(f"unsupported checkpoint version {meta['version']}")
        if meta["type"] == "network":
            return _network_from_payload(meta, arrays)
        if meta["type"] == "classifier":
            net = _network_from_payload(meta, arrays)
            return FittedClassifier(kind=meta["kind"], n_features=meta["n_features"],
                                    model=net)
        if meta["type"] == "autoencoder":
            return AeModel(network=_network_from_payload(meta, arrays),
                           n_encoder_layers=meta["n_encoder_layers"],
                           bottleneck=meta["bottleneck"],
                           final_loss=meta["final_loss"], history=TrainHistory())
        if meta["type"] == "pca":
            return PcaModel(mean=arrays[0], components=arrays[1],
                            singular_values=arrays[2], explained_variance=arrays[3],
                            total_variance=meta["total_variance"])
        if meta["type"] == "lda":
            return LdaModel(projection=arrays[0], class_means=arrays[1],
                            output_variance=meta["output_variance"],
                            zero_separation=meta["zero_separation"])
        raise ValueError(f"unknown checkpoint type {meta['type']!r}")
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc["version"] != FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint version {doc['version']}")
    if doc["type"] == "tree":
        return _tree_from_dict(doc["root"])
    if doc["type"] == "classifier":
        inner = _shallow_from_dict(doc["inner"])
        return FittedClassifier(kind=doc["kind"], n_features=doc["n_features"],
                                model=inner)
    return _shallow_from_dict(doc["inner"])
