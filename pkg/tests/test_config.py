import math

import pytest

from superfem.config import PRESETS, ConfigError, StudyConfig, auto_domain, dump_config, load_config, parse_config
from superfem.tensor import SPDTensor2, certify_mesh

BASE = """
[domain]
mode = explicit
vertices = 0, 0; 1, 0; 1, 1; 0, 1

[tensor]
a11 = 2
a12 = 1
a22 = 2
"""


def test_defaults():
    cfg = parse_config(BASE)
    assert cfg.n_list == (2, 4, 8, 16, 32, 64)
    assert cfg.quadrature_degree == 6 and cfg.quadrature.degree == 6
    assert cfg.solver_tolerance == 1e-13
    assert cfg.certification == "strict"
    assert cfg.output_format == "csv"
    assert cfg.domain.area == pytest.approx(1.0)
    assert cfg.manufactured.name == "sin_sin"


@pytest.mark.parametrize("name", PRESETS)
def test_preset_round_trip(name):
    cfg = load_config(name)
    text = dump_config(cfg)
    again = parse_config(text)
    assert again == cfg
    assert dump_config(again) == text


def test_round_trip_auto_and_custom():
    cfg = parse_config(
        BASE.replace("mode = explicit\nvertices = 0, 0; 1, 0; 1, 1; 0, 1", "mode = auto\nalpha = 2")
        + "[study]\nsolution = custom\nexpression = x**2 - y**2 + exp(x)\nn_list = 4 8\n"
    )
    assert cfg.alpha == 2.0 and cfg.vertices is None
    text = dump_config(cfg)
    assert parse_config(text) == cfg and dump_config(parse_config(text)) == text


def test_auto_domain_is_certified_with_unit_area():
    A = SPDTensor2(2, 2, 8)
    p = auto_domain(A, 2.0)
    assert p.area == pytest.approx(1.0, rel=1e-14)
    assert certify_mesh(A, p.mesh(4)).certified


def test_custom_expression():
    cfg = parse_config(BASE + "[study]\nsolution = custom\nexpression = x**3*y + sin(y)\n")
    u = cfg.manufactured
    assert u.value(2.0, 0.0) == pytest.approx(0.0)
    gx, gy = u.gradient(1.0, 2.0)
    assert (gx, gy) == pytest.approx((6.0, 1.0 + math.cos(2.0)))
    uxx, uxy, uyy = u.hessian(1.0, 2.0)
    assert (uxx, uxy, uyy) == pytest.approx((12.0, 3.0, -math.sin(2.0)))


@pytest.mark.parametrize(
    "mutate, message",
    [
        (lambda t: t.replace("a22 = 2\n", ""), "missing [tensor] a22"),
        (lambda t: t.replace("a12 = 1", "a12 = 3"), "positive definite"),
        (lambda t: t.replace("1, 1; 0, 1", "1, 1; 0, 2"), "parallelogram"),
        (lambda t: t.replace("0, 0; 1, 0; 1, 1; 0, 1", "0, 0; 1, 0; 1, 1"), "4 vertices"),
        (lambda t: t.replace("0, 0; 1, 0; 1, 1; 0, 1", "0, 0; 0, 1; 1, 1; 1, 0"), "inverted"),
        (lambda t: t.replace("mode = explicit", "mode = magic"), "mode"),
        (lambda t: t + "[study]\nn_list = 4, 2\n", "ascending"),
        (lambda t: t + "[study]\nn_list = 0, 2\n", "positive"),
        (lambda t: t + "[study]\nn_list = two\n", "two"),
        (lambda t: t + "[study]\ncertification = sometimes\n", "strict, warn or off"),
        (lambda t: t + "[study]\nquadrature_degree = 9\n", "degree 9"),
        (lambda t: t + "[study]\nsolution = custom\n", "expression"),
        (lambda t: t + "[output]\nformat = xml\n", "csv or markdown"),
        (lambda t: t.replace("[tensor]", "[tensr]"), "missing [tensor] section"),
    ],
)
def test_invalid_configs(mutate, message):
    with pytest.raises(ConfigError) as info:
        parse_config(mutate(BASE))
    assert message in str(info.value)


def test_custom_expression_errors():
    with pytest.raises(ConfigError):
        parse_config(BASE + "[study]\nsolution = custom\nexpression = x + z\n").manufactured
    with pytest.raises(ConfigError):
        parse_config(BASE + "[study]\nsolution = custom\nexpression = x +* 2\n").manufactured
    with pytest.raises(ConfigError):
        parse_config(BASE + "[study]\nsolution = bogus\n").manufactured


def test_load_config_file_and_missing(tmp_path):
    path = tmp_path / "study.cfg"
    path.write_text(BASE, encoding="utf-8")
    assert load_config(path).tensor == SPDTensor2(2, 1, 2)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.cfg")


def test_with_output_dir(tmp_path):
    cfg = load_config("table3")
    assert cfg.with_output_dir(tmp_path).output_path == str(tmp_path / "table3.csv")


def test_direct_construction_needs_one_domain_spec():
    with pytest.raises(ConfigError):
        StudyConfig(tensor=SPDTensor2(1, 0, 1))
    with pytest.raises(ConfigError):
        StudyConfig(tensor=SPDTensor2(1, 0, 1), alpha=-1.0)
