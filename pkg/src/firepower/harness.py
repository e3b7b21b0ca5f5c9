"""Few-shot experiment protocol: for each (k, seed), draw k labeled target
configurations, run every method on the identical split, and score total
power with MAPE and Pearson R."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import baselines
from .application import build_target_model
from .baselines import (
    METHOD_KEYS,
    TransferWrapper,
    sample_features,
    train_monolithic,
    train_monolithic_per_component,
)
from .dataset import Dataset, few_shot_split
from .errors import ValidationError
from .knowledge import KnowledgeBase, extract_knowledge
from .metrics import mape, pearson_r
from .trees import GbtHyperparams


@dataclass
class EvalResult:
    method: str
    k: int
    seed: int
    mape_percent: float
    pearson_r: float
    per_sample: list[tuple[str, str, float, float]]

    def sort_key(self):
        return (self.method, self.k, self.seed)


def choose_labeled_configs(ds_target: Dataset, k: int, seed: int) -> list[str]:
    """Uniform draw of k labeled configuration ids, deterministic per (k, seed)."""
    ids = sorted(ds_target.config_ids())
    rng = np.random.default_rng([seed, k])
    return [ids[i] for i in rng.choice(len(ids), size=k, replace=False)]


def _firepower_totals(model, test: Dataset) -> list[float]:
    totals = np.zeros(len(test.samples))
    for comp in test.component_table:
        hw, ev = model.per_component[comp.name]
        hw_by_config = {
            cfg.id: hw.predict(comp, cfg, model.epsilon) for cfg in test.configurations
        }
        X = np.array([baselines.component_features(test, comp, s) for s in test.samples])
        ev_preds = ev.model.predict_many(X)
        hw_preds = np.array([hw_by_config[s.config_id] for s in test.samples])
        totals += hw_preds * ev_preds
    return list(totals)


def _transfer_totals(w: TransferWrapper, features: np.ndarray) -> np.ndarray:
    preds = np.empty(features.shape[0])
    p_t = w.source_many(features)
    for i, x in enumerate(features):
        j = w.nearest_index(x)
        label = float(w.pool_labels[j])
        if np.array_equal(x, w.pool_features[j]):
            preds[i] = label
        else:
            preds[i] = p_t[i] / max(w.pool_source_preds[j], baselines.TRANSFER_EPSILON) * label
    return preds


def _method_predictions(
    method: str,
    kb: KnowledgeBase,
    train: Dataset,
    test: Dataset,
    hp: GbtHyperparams,
    use_M: bool,
    sources: dict,
) -> list[float]:
    if method == "mcpat_calib":
        model = train_monolithic(train, use_M, hp)
        X = np.array([model.features(test, s) for s in test.samples])
        return list(model.model.predict_many(X))
    if method == "mcpat_calib_component":
        models = train_monolithic_per_component(train, hp)
        totals = np.zeros(len(test.samples))
        for comp in test.component_table:
            X = np.array([baselines.component_features(test, comp, s) for s in test.samples])
            totals += models[comp.name].predict_many(X)
        return list(totals)
    if method == "mcpat_calib_transfer":
        source = sources["monolithic"]
        pool = np.array(
            [sample_features(train, s, source.event_names, use_M) for s in train.samples]
        )
        labels = np.array([s.total_power for s in train.samples])
        w = TransferWrapper.build(source.model.predict, pool, labels, source.model.predict_many)
        X = np.array(
            [sample_features(test, s, source.event_names, use_M) for s in test.samples]
        )
        return list(_transfer_totals(w, X))
    if method == "mcpat_calib_component_transfer":
        comp_sources = sources["per_component"]
        totals = np.zeros(len(test.samples))
        for comp in train.component_table:
            pool = np.array(
                [baselines.component_features(train, comp, s) for s in train.samples]
            )
            labels = np.array([s.component_power[comp.name] for s in train.samples])
            w = TransferWrapper.build(
                comp_sources[comp.name].predict,
                pool,
                labels,
                comp_sources[comp.name].predict_many,
            )
            X = np.array([baselines.component_features(test, comp, s) for s in test.samples])
            totals += _transfer_totals(w, X)
        return list(totals)
    if method == "firepower_no_retrain":
        model = build_target_model(kb, train, hp, force_no_retrain=True)
        return _firepower_totals(model, test)
    if method == "firepower":
        model = build_target_model(kb, train, hp)
        return _firepower_totals(model, test)
    raise ValidationError(f"unknown method {method!r}")


def run_experiment(
    ds_known: Dataset,
    ds_target: Dataset,
    methods: list[str] | None = None,
    ks: list[int] = (2, 3, 4),
    seeds: list[int] = (0,),
    hp: GbtHyperparams | None = None,
    threshold: float = 0.95,
    use_M: bool = False,
) -> list[EvalResult]:
    methods = list(methods) if methods else list(METHOD_KEYS)
    hp = hp or GbtHyperparams()
    for m in methods:
        if m not in METHOD_KEYS:
            raise ValidationError(f"unknown method {m!r}")
    n_configs = len(ds_target.configurations)
    if n_configs <= max(ks):
        raise ValidationError("target dataset has too few configurations for the given ks")

    kb = extract_knowledge(ds_known, hp, threshold)
    sources: dict = {}
    if "mcpat_calib_transfer" in methods:
        sources["monolithic"] = train_monolithic(ds_known, use_M, hp)
    if "mcpat_calib_component_transfer" in methods:
        sources["per_component"] = train_monolithic_per_component(ds_known, hp)

    results = []
    for k in ks:
        for seed in seeds:
            labeled = choose_labeled_configs(ds_target, k, seed)
            train, test = few_shot_split(ds_target, labeled)
            labels = [s.total_power for s in test.samples]
            for method in methods:
                preds = _method_predictions(method, kb, train, test, hp, use_M, sources)
                per_sample = [
                    (s.config_id, s.workload, float(p), float(s.total_power))
                    for s, p in zip(test.samples, preds)
                ]
                results.append(
                    EvalResult(
                        method=method,
                        k=k,
                        seed=seed,
                        mape_percent=mape(preds, labels),
                        pearson_r=pearson_r(preds, labels),
                        per_sample=per_sample,
                    )
                )
    results.sort(key=EvalResult.sort_key)
    return results


def summarize(results: list[EvalResult]) -> dict[tuple[str, int], tuple[float, float]]:
    """Mean (MAPE, R) per (method, k); means of per-seed metrics, no pooling."""
    cells: dict[tuple[str, int], list[EvalResult]] = {}
    for r in results:
        cells.setdefault((r.method, r.k), []).append(r)
    return {
        key: (
            float(np.mean([r.mape_percent for r in rs])),
            float(np.mean([r.pearson_r for r in rs])),
        )
        for key, rs in sorted(cells.items())
    }
