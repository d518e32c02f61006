import numpy as np
import pytest

from lqpat import GrayImage, write_pgm


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_image(rng, shape=(16, 16)):
    return GrayImage(rng.integers(0, 256, size=shape))


def make_tree(root, classes):
    """Write ``{label: [array, ...]}`` as ``root/<label>/imgNN.pgm``."""
    for label, images in classes.items():
        d = root / label
        d.mkdir(parents=True, exist_ok=True)
        for k, arr in enumerate(images):
            write_pgm(GrayImage(arr), d / f"img{k:02d}.pgm")
    return root


def duplicates_classes(n_classes=5, per_class=4, shape=(20, 20), seed=7):
    """Each class: one random image repeated ``per_class`` times."""
    r = np.random.default_rng(seed)
    return {f"c{k}": [r.integers(0, 256, size=shape)] * per_class for k in range(n_classes)}


@pytest.fixture
def duplicates_tree(tmp_path):
    return make_tree(tmp_path / "dups", duplicates_classes())


_ACCEPTANCE = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _ACCEPTANCE[marker.args[0]] = (marker.args[1], report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, outcome = _ACCEPTANCE[number]
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{status}] AC{number:<2} {title}")
