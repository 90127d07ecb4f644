import pytest

from losstomo.harness import SETTINGS
from losstomo.topology import TopologyError, ancestors, parse_topology


def test_parse_star_setting():
    t = parse_topology(SETTINGS["2x2-equal"])
    assert len(t.sources) == 2
    assert len(t.receivers) == 2
    assert len(t.links) == 4
    assert len(t.nodes) == 5
    for l in t.links:
        assert l.pass_rate == pytest.approx(0.99)


def test_parse_stores_pass_rate():
    t = parse_topology(
        "node 0\nnode 1\nnode 2\nnode 3\n"
        "link 1 0 2 0.25\nlink 2 2 1 0.0\nlink 3 2 3 0\n"
        "source 0\nreceiver 1\nreceiver 3\n"
    )
    assert t.link_by_id[1].pass_rate == 0.75
    assert t.link_by_id[1].loss_rate == 0.25
    assert t.link_by_id[2].pass_rate == 1.0


def test_empty_link_list_rejected():
    with pytest.raises(TopologyError, match="no links"):
        parse_topology("node 0\nsource 0\n")


def test_loss_rate_out_of_range():
    text = (
        "node 0\nnode 1\nlink 1 0 1 1.2\nsource 0\nreceiver 1\n"
    )
    with pytest.raises(TopologyError, match="pass rate out of range"):
        parse_topology(text)


def test_syntax_error_reports_line():
    with pytest.raises(TopologyError, match="line 2"):
        parse_topology("node 0\nlink one 0 0\n")


def test_duplicate_ids_rejected():
    with pytest.raises(TopologyError, match="duplicate node"):
        parse_topology("node 0\nnode 0\n")
    with pytest.raises(TopologyError, match="duplicate link"):
        parse_topology(
            "node 0\nnode 1\nnode 2\nlink 1 0 1 0.1\nlink 1 0 2 0.1\n"
            "source 0\nreceiver 1\nreceiver 2\n"
        )


def test_unreachable_receiver_rejected():
    text = (
        "node 0\nnode 1\nnode 2\nnode 3\nnode 4\n"
        "link 1 0 1 0.1\n"
        "link 2 2 3 0.1\nlink 3 2 4 0.1\n"
        "source 0\nreceiver 1\nreceiver 3\nreceiver 4\n"
    )
    # nodes 3 and 4 hang below node 2, which no source feeds
    with pytest.raises(TopologyError):
        parse_topology(text)


def test_source_shape_enforced():
    text = (
        "node 0\nnode 1\nnode 2\n"
        "link 1 0 1 0.1\nlink 2 0 2 0.1\n"
        "source 0\nreceiver 1\nreceiver 2\n"
    )
    with pytest.raises(TopologyError, match="exactly one outgoing"):
        parse_topology(text)


def test_comments_and_blank_lines_ignored():
    t = parse_topology(
        "# a comment\n\nnode 0\nnode 1  # trailing\nlink 1 0 1 0.5\nsource 0\nreceiver 1\n"
    )
    assert t.nodes == frozenset({0, 1})


def test_tree_membership(big_topology):
    t = big_topology
    assert t.tree_nodes[16] == frozenset(
        {16, 17, 18, 2, 19, 20, 4, 5, 21, 22, 23, 24, 8, 9, 10, 11}
    )
    assert 2 in t.tree_nodes[0] and 18 not in t.tree_nodes[0]
    assert t.sources_reaching(2) == (0, 16)
    assert t.sources_reaching(3) == (0,)


def test_ancestors_paths(big_topology):
    t = big_topology
    assert ancestors(t, 2, 16) == (17, 16)
    assert ancestors(t, 8, 0) == (4, 2, 1, 0)
    assert ancestors(t, 17, 16) == (16,)


def test_ancestors_outside_tree(big_topology):
    with pytest.raises(TopologyError):
        ancestors(big_topology, 18, 0)


def test_in_degree_of_ordinary_nodes(big_topology):
    t = big_topology
    joints = {n for n in t.nodes if len(t.in_links[n]) >= 2}
    assert joints == {2}
    for n in t.nodes - joints - set(t.sources):
        assert len(t.in_links[n]) == 1


def test_true_rates(star22):
    assert star22.subtree_rate[2] == pytest.approx(1 - 0.01**2)
    assert star22.path_rate(0, 2) == pytest.approx(0.99)
    assert star22.path_rate(0, 3) == pytest.approx(0.99 * 0.99)
