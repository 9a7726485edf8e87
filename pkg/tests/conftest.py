import numpy as np
import pytest

from blpr.dataset import synth_glyphs
from blpr.nnet import TrainConfig, build_network, save_model, train

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def small_cnn():
    """CNN overfit on a few clean renders of every class; reads clean synthetic plates."""
    ds = synth_glyphs(seed=3, per_class_train=12, per_class_valid=0, per_class_test=0)
    net, _ = train(build_network("blpr-cnn", seed=1), ds.arrays("train"), (),
                   TrainConfig(learning_rate=1e-3, epochs=6, seed=1))
    return net


@pytest.fixture(scope="session")
def small_cnn_path(small_cnn, tmp_path_factory):
    path = tmp_path_factory.mktemp("model") / "small.bin"
    save_model(small_cnn, path)
    return path


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
