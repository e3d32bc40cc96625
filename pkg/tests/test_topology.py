import pytest

from dualrail.topology import (
    Endpoint,
    Topology,
    TopologyError,
    build_site_plan,
    exit_bin,
    layered_tree,
    split_exit_bin,
    to_dot,
    validate,
)


@pytest.mark.parametrize("layers", [1, 2, 3, 4, 5])
def test_free_port_count_scaling(layers):
    t = layered_tree(layers)
    assert len(t.free_ports) == 4 * 3 ** (layers - 1)
    assert not validate(t)


def test_layered_tree_unit_counts():
    assert [len(layered_tree(n).units) for n in (1, 2, 3)] == [1, 5, 17]
    assert len(layered_tree(2).links) == 4


def test_layered_tree_rejects_zero():
    with pytest.raises(ValueError):
        layered_tree(0)


def test_site_counts():
    assert len(build_site_plan(layered_tree(1)).sites) == 8
    assert len(build_site_plan(layered_tree(2)).sites) == 5 * 8 + 2 * 4


def test_endpoint_round_trip():
    ep = Endpoint.parse("C/Le:Rf")
    assert ep == Endpoint("C/Le", "R", "f")
    assert str(ep) == "C/Le:Rf"


@pytest.mark.parametrize("bad", ["C", "C:Lx", "C:Q", ":Le"])
def test_endpoint_parse_errors(bad):
    with pytest.raises(TopologyError):
        Endpoint.parse(bad)


def test_validation_errors():
    t = Topology.build(["A", "B"], [("A:Le", "B:Re"), ("A:Le", "B:Rf")])
    assert any("multiply linked" in e for e in validate(t))
    t = Topology.build(["A"], [("A:Le", "Z:Re")])
    assert any("unknown unit" in e for e in validate(t))
    t = Topology.build(["A"], [("A:Le", "A:Le")])
    assert any("degenerate" in e for e in validate(t))
    with pytest.raises(TopologyError):
        build_site_plan(Topology.build(["A"], [("A:Le", "Z:Re")]))


def test_partner_and_free():
    t = layered_tree(2)
    assert t.partner(Endpoint("C", "L", "e")) == Endpoint("C/Le", "R", "e")
    assert not t.is_free(Endpoint("C", "L", "e"))
    assert t.is_free(Endpoint("C/Le", "L", "e"))


def test_exit_bin_labels():
    assert split_exit_bin(exit_bin("C:Le", 7)) == ("C:Le", 7)
    assert split_exit_bin("C:Le") is None


def test_dot_counts():
    dot = to_dot(layered_tree(2))
    assert dot.count("[label=") == 5
    assert dot.count(" -- ") == 4
    assert dot.startswith("graph network {")
