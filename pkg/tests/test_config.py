import pytest

from nlkuramoto import ConfigurationError, SimConfig, apply_overrides, parse_config_text


MINIMAL = """
[grid]
nodes = 32

[physics]
model = singular
"""


def test_minimal_config_fills_defaults():
    cfg = parse_config_text(MINIMAL)
    assert cfg.grid.dimension == 1
    assert cfg.grid.nodes == 32
    assert cfg.grid.extents == ((0.0, 1.0),)
    assert cfg.physics.s == 0.5
    assert cfg.physics.kappa == 1.0
    assert cfg.integrator.scheme == "rk4"
    assert cfg.integrator.dt is None
    assert cfg.output.formats == ("csv", "manifest")


def test_empty_config_is_the_default_run():
    cfg = parse_config_text("")
    assert cfg == SimConfig()


def test_comments_and_blank_lines_ignored():
    cfg = parse_config_text("""
# a comment
[physics]
kappa = 2.0   # inline comment

[integrator]
horizon = 3.0
""")
    assert cfg.physics.kappa == 2.0
    assert cfg.integrator.horizon == 3.0


def test_s_out_of_range_rejected_with_constraint():
    with pytest.raises(ConfigurationError) as err:
        parse_config_text("[physics]\ns = 1.2\n")
    assert any("physics.s" in p and "(0, 1)" in p for p in err.value.problems)


def test_relaxation_diameter_hypothesis_enforced():
    text = "[initial]\nkind = smooth\ndiameter = 3.5\n"
    with pytest.raises(ConfigurationError) as err:
        parse_config_text(text)
    assert any("initial.diameter" in p and "pi" in p for p in err.value.problems)
    # the documented override lifts it
    cfg = parse_config_text(text + "allow_large_diameter = true\n")
    assert cfg.initial.diameter == 3.5
    # and so does turning on dissipation (the guarantee is only needed for the
    # undamped singular dynamics)
    cfg = parse_config_text(text + "\n[physics]\ndelta = 0.1\n")
    assert cfg.physics.delta == 0.1


def test_all_violations_reported_at_once():
    bad = """
[grid]
dimension = 3
nodes = 1

[physics]
model = warp
s = -1
kappa = -2

[integrator]
safety = 7
stride = 0
"""
    with pytest.raises(ConfigurationError) as err:
        parse_config_text(bad)
    problems = "\n".join(err.value.problems)
    for fragment in ("grid.dimension", "grid.nodes", "physics.model", "physics.s",
                     "physics.kappa", "integrator.safety", "integrator.stride"):
        assert fragment in problems


def test_unknown_keys_and_sections_rejected():
    with pytest.raises(ConfigurationError) as err:
        parse_config_text("[grid]\nnodse = 10\n\n[warp]\nspeed = 9\n")
    problems = "\n".join(err.value.problems)
    assert "unknown key grid.nodse" in problems
    assert "unknown section [warp]" in problems


def test_epsilon_model_coupling():
    with pytest.raises(ConfigurationError) as err:
        parse_config_text("[physics]\nmodel = regularized\n")
    assert any("physics.epsilon" in p for p in err.value.problems)
    with pytest.raises(ConfigurationError) as err:
        parse_config_text("[physics]\nmodel = singular\nepsilon = 0.1\n")
    assert any("physics.epsilon" in p for p in err.value.problems)
    cfg = parse_config_text("[physics]\nmodel = regularized\nepsilon = 0.2\n")
    assert cfg.physics.epsilon == 0.2


def test_random_kind_requires_seed():
    with pytest.raises(ConfigurationError) as err:
        parse_config_text("[initial]\nkind = random\ndiameter = 1.0\n")
    assert any("initial.seed" in p for p in err.value.problems)


def test_nu_file_only_for_lattice(tmp_path):
    with pytest.raises(ConfigurationError) as err:
        parse_config_text("[physics]\nmodel = singular\nnu_file = nu.txt\n")
    assert any("nu_file" in p for p in err.value.problems)


def test_two_dimensional_extents():
    cfg = parse_config_text("[grid]\ndimension = 2\nnodes = 8\nextent = 0 1\nextent2 = -1 1\n")
    assert cfg.grid.extents == ((0.0, 1.0), (-1.0, 1.0))
    # extent2 defaults to extent
    cfg = parse_config_text("[grid]\ndimension = 2\nnodes = 8\nextent = 0 2\n")
    assert cfg.grid.extents == ((0.0, 2.0), (0.0, 2.0))
    with pytest.raises(ConfigurationError):
        parse_config_text("[grid]\ndimension = 1\nextent2 = 0 1\n")


def test_canonical_text_round_trips():
    cfg = parse_config_text("""
[grid]
dimension = 2
nodes = 12
extent = 0 1
extent2 = 0.5 2.5

[physics]
model = regularized
epsilon = 0.05
kappa = 0.75
delta = 0.3
nu = -0.25
s = 0.6180339887498949

[initial]
kind = random
seed = 99
diameter = 2.2

[integrator]
scheme = euler
dt = 0.001
stride = 5
horizon = 0.25

[output]
directory = results/run1
formats = csv snapshots manifest
""")
    again = parse_config_text(cfg.canonical_text())
    assert again == cfg
    assert again.content_hash() == cfg.content_hash()


def test_content_hash_tracks_changes():
    a = parse_config_text("[physics]\nkappa = 1.0\n")
    b = parse_config_text("[physics]\nkappa = 1.5\n")
    assert a.content_hash() != b.content_hash()
    # whitespace and comments do not matter
    c = parse_config_text("# hi\n[physics]\n  kappa =   1.0\n")
    assert c.content_hash() == a.content_hash()


def test_apply_overrides_precedence():
    cfg = parse_config_text("[physics]\nkappa = 1.0\n\n[integrator]\nhorizon = 1.0\n")
    over = apply_overrides(cfg, {("physics", "kappa"): "2.5",
                                 ("integrator", "dt"): "0.01"})
    assert over.physics.kappa == 2.5
    assert over.integrator.dt == 0.01
    assert over.integrator.horizon == 1.0
    with pytest.raises(ConfigurationError):
        apply_overrides(cfg, {("physics", "warp"): "1"})
    with pytest.raises(ConfigurationError):
        apply_overrides(cfg, {("physics", "s"): "2.0"})


def test_shipped_configs_parse():
    from pathlib import Path
    from nlkuramoto import parse_config
    configs = sorted((Path(__file__).resolve().parents[1] / "configs").glob("*.cfg"))
    assert configs, "example configs missing"
    for path in configs:
        parse_config(path)


def test_syntax_errors_carry_line_numbers():
    with pytest.raises(ConfigurationError) as err:
        parse_config_text("[grid]\nnodes 32\n", source="demo.cfg")
    assert any("demo.cfg:2" in p for p in err.value.problems)
