import numpy as np
import pytest

import firepower as fp
from firepower.dataset import dataset_from_dict
from firepower.trees import GbtHyperparams


@pytest.fixture(scope="session")
def synth_pair():
    spec = fp.default_spec(seed=0)
    return fp.generate_pair(spec)


@pytest.fixture(scope="session")
def small_hp():
    return GbtHyperparams(n_estimators=20)


@pytest.fixture(scope="session")
def kb0(synth_pair, small_hp):
    ds_known, _, _ = synth_pair
    return fp.extract_knowledge(ds_known, small_hp)


def tiny_doc():
    """A hand-sized dataset document with a two-component table."""
    rng = np.random.default_rng(7)
    params = lambda a, b: {  # noqa: E731
        "FetchWidth": a,
        "DecodeWidth": b,
        "FetchBufferEntry": 8,
        "RobEntry": 32,
        "IntPhyRegister": 64,
        "FpPhyRegister": 64,
        "LDQEntry": 8,
        "BranchCount": 8,
        "MemIssueWidth": 1,
        "IntIssueWidth": 2,
        "DCacheWay": 4,
        "DCacheTLBEntry": 8,
        "MSHREntry": 2,
        "ICacheFetchBytes": 2,
    }
    configs = [
        {"id": "C1", "params": params(4, 1)},
        {"id": "C2", "params": params(6, 3)},
        {"id": "C3", "params": params(8, 5)},
    ]
    samples = []
    for cfg in configs:
        for w in range(2):
            front = 2.0 * cfg["params"]["FetchWidth"] + w + 1.0
            core = 3.0 * cfg["params"]["DecodeWidth"] + 0.5 * w + 1.0
            other = float(rng.uniform(1.0, 2.0))
            samples.append(
                {
                    "config_id": cfg["id"],
                    "workload": f"w{w}",
                    "total_power": front + core + other,
                    "component_power": {"Front": front, "Core": core, "Other Logic": other},
                    "event_stats": {"front_act": 1.0 + w, "core_act": 2.0 + w},
                }
            )
    return {
        "architecture": "Tiny",
        "component_table": [
            {
                "name": "Front",
                "hw_params": ["FetchWidth", "BranchCount"],
                "event_stats": ["front_act"],
                "important_param": "FetchWidth",
            },
            {
                "name": "Core",
                "hw_params": ["DecodeWidth", "IntIssueWidth"],
                "event_stats": ["core_act"],
            },
            {
                "name": "Other Logic",
                "hw_params": ["FetchWidth", "DecodeWidth"],
                "event_stats": [],
            },
        ],
        "configurations": configs,
        "samples": samples,
    }


@pytest.fixture
def tiny_dataset():
    return dataset_from_dict(tiny_doc())
