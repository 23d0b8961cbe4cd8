import pytest

from housing_abm.config import (PAPER_SHARES, SimulationConfig, dump_config, load_config,
                                parse_config_text)


def test_defaults_match_parameter_table():
    c = SimulationConfig()
    assert (c.N, c.L, c.a, c.R, c.K, c.Y1, c.delta) == (100, 11, 1.0, 3.0, 10, 15.0, 5.0)
    assert (c.beta, c.alpha, c.mu, c.lam, c.tau, c.nu, c.gamma_total) == (0.5, 0.1, 0.1, 0.95, 2, 0.1, 1000)
    assert c.shares == PAPER_SHARES


def test_parse_aliases_and_arrays():
    d = parse_config_text('lambda = 0.9\ngamma_total = 500\nshares = [0.5, 0.5]\nK = 2\nforeigners = true\n')
    assert d == {"lam": 0.9, "gamma_total": 500, "shares": (0.5, 0.5), "K": 2, "foreigners": True}


def test_load_dump_roundtrip(tmp_path):
    c = SimulationConfig(K=2, shares=(0.4, 0.6), xi=(-0.1, 0.1), lam=0.9, foreigners=True)
    p = tmp_path / "c.toml"
    p.write_text(dump_config(c))
    assert load_config(p) == c


def test_replace_keeps_K_and_shares_in_sync():
    c = SimulationConfig().replace(K=1)
    assert c.shares == (1.0,)
    c = SimulationConfig().replace(shares=(0.5, 0.5))
    assert c.K == 2


@pytest.mark.parametrize("bad", [dict(K=3), dict(xi=(0.0,)), dict(clearing="fifo"),
                                 dict(alpha=2.0), dict(initial_occupants="x"),
                                 dict(xi=(-1.0,) + (0.0,) * 9)])
def test_validation(bad):
    with pytest.raises(ValueError):
        SimulationConfig(**bad)


def test_unknown_keys_kept(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text("note = \"hello\"\nalpha = 0.2\n")
    c = load_config(p)
    assert c.alpha == 0.2 and c.extra == {"note": "hello"}
