import importlib
import logging

import numpy as np
import pytest


def test_import_utils():
    importlib.import_module("qcrb.utils")


def _reload_utils():
    # helper to reload module and reset state between tests
    utils = importlib.import_module("qcrb.utils")
    importlib.reload(utils)
    utils._default_logger = None
    return utils


def test_init_and_get_logger(tmp_path, caplog):
    utils = _reload_utils()

    logfile = tmp_path / "test.log"
    logger = utils.init_logger(
        name="testlogger",
        level=10,
        logfile=str(logfile),
        fmt="%(levelname)s:%(message)s",
    )
    assert logger.name == "testlogger"
    assert utils.get_logger() is logger
    assert utils.get_logger("qcrb.Named") is logger

    caplog.clear()
    caplog.set_level(10)
    logger.info("info-msg")
    logger.debug("debug-msg")
    texts = [r.message for r in caplog.records]
    assert "info-msg" in texts
    assert "debug-msg" in texts

    with open(logfile, "r") as f:
        data = f.read()
    assert "INFO:info-msg" in data
    assert "DEBUG:debug-msg" in data


def test_init_logger_replaces_handlers():
    utils = _reload_utils()
    first = utils.init_logger("qcrb.reinit")
    second = utils.init_logger("qcrb.reinit", level=logging.DEBUG)
    assert first is second
    assert len(second.handlers) == 1
    assert second.level == logging.DEBUG
    utils._default_logger = None


def test_get_logger_without_init():
    utils = _reload_utils()
    assert utils.get_logger("qcrb.Fresh").name == "qcrb.Fresh"
    assert utils.get_logger().name == "qcrb"


def test_read_write_json(tmp_path):
    utils = _reload_utils()
    p = tmp_path / "cfg.json"
    obj = {"b": 2, "a": [1.5, 2.5]}
    utils.write_json(str(p), obj)
    assert utils.read_json(str(p)) == obj
    text = p.read_text()
    # sorted, indented
    assert text.index('"a"') < text.index('"b"')
    assert "\n  " in text


def test_make_rng_is_reproducible():
    utils = _reload_utils()
    a = utils.make_rng(5).standard_normal(4)
    b = utils.make_rng(5).standard_normal(4)
    c = utils.make_rng([5, 1]).standard_normal(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_dagger_and_hermitian_part():
    utils = _reload_utils()
    x = np.array([[1, 2j], [3, 4 + 1j]])
    assert np.array_equal(utils.dagger(x), np.array([[1, 3], [-2j, 4 - 1j]]))
    h = utils.hermitian_part(x)
    assert np.allclose(h, h.conj().T)
    assert np.allclose(h, [[1, 1.5 + 1j], [1.5 - 1j, 4]])
    stack = np.stack([x, 2 * x])
    assert utils.dagger(stack).shape == (2, 2, 2)
    assert np.array_equal(utils.dagger(stack)[1], 2 * utils.dagger(x))


def test_complex_pairs():
    utils = _reload_utils()
    x = np.array([[1 + 2j, 0], [-1j, 3]])
    pairs = utils.complex_to_pairs(x)
    assert pairs[0][0] == [1.0, 2.0]
    assert pairs[1][0] == [0.0, -1.0]
    assert np.array_equal(utils.pairs_to_complex(pairs), x)
    assert utils.complex_to_pairs(np.complex128(2 - 1j)) == [2.0, -1.0]
    with pytest.raises(ValueError):
        utils.pairs_to_complex([[1.0, 2.0, 3.0]])
