import pytest

from sumforge.config import DEFAULTS, ConfigError, fingerprint, load_config, parse_config, resolve


def test_parse_with_comments_and_types():
    cfg = parse_config("# run\ntrain.learning_rate=0.01  # faster\nseed = 7\n\n"
                       "model.bidirectional=true\ncorpus.min_score=none\n")
    assert cfg == {"train.learning_rate": 0.01, "seed": 7, "model.bidirectional": True,
                   "corpus.min_score": None}


@pytest.mark.parametrize("text", ["nokey", "bogus.key=1", "seed=abc", "model.bidirectional=maybe"])
def test_parse_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_precedence():
    env = {"SUMFORGE_SEED": "5"}
    assert resolve({}, {}, env={})["seed"] == DEFAULTS["seed"]
    assert resolve({}, {}, env=env)["seed"] == 5
    assert resolve({}, {"seed": 6}, env=env)["seed"] == 6
    assert resolve({"seed": 9}, {"seed": 6}, env=env)["seed"] == 9
    assert resolve({"seed": None}, {"seed": 6}, env=env)["seed"] == 6


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.cfg")
    assert load_config(None) == {}


def test_fingerprint_canonical():
    assert fingerprint({"a": 1, "b": [1, 2]}) == fingerprint({"b": [1, 2], "a": 1})
    assert fingerprint({"a": 1}) != fingerprint({"a": 2})
    assert len(fingerprint({})) == 16
