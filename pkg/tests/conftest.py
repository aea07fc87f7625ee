import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))  # for reference_impl

from moirebench.dataset import SplitSpec, build_dataset
from moirebench.pipeline import PipelineConfig
from moirebench.sources import make_sample_sources

# One shared "desk scale" build: small enough to run in seconds, large
# enough to exercise every split and content class.
DESK_SPLIT = dict(train=12, val=3, test=3)
DESK_MASTER_SEED = 905
DESK_SOURCE_SEED = 203


def desk_pipeline_config():
    return PipelineConfig(output_size=64, seed=5)


def build_desk(source_dir, out_dir, n_jobs=2):
    return build_dataset(
        source_dir,
        out_dir,
        SplitSpec(**DESK_SPLIT),
        desk_pipeline_config(),
        DESK_MASTER_SEED,
        freq_imbalance_ratio=2.0,  # rebalance quiescent at desk scale
        n_jobs=n_jobs,
    )


@pytest.fixture(scope="session")
def sources_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("sources")
    make_sample_sources(d, per_class=6, size=160, seed=DESK_SOURCE_SEED)
    return str(d)


@pytest.fixture(scope="session")
def desk_dataset(tmp_path_factory, sources_dir):
    """(dataset_dir, manifest) for the canonical desk build."""
    out = str(tmp_path_factory.mktemp("desk-dataset"))
    manifest = build_desk(sources_dir, out)
    return out, manifest
