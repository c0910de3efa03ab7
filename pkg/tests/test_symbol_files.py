"""Symbol file parsing, serialization, corpus loading and validation."""

import json

import numpy as np
import pytest

from bloch_wco.analytic_core import Compose, Exp, Mobius, Z, evaluate
from bloch_wco.errors import NotSelfMap, ParseError, UnsupportedSymbol
from bloch_wco.harness.corpus import corpus_files, load_corpus, load_entries
from bloch_wco.harness.symbol_files import (
    load_document,
    parse_document,
    parse_symbol_file,
    serialize_expr,
    write_symbol_file,
)
from bloch_wco.harness.validate_symbol_files import count_nodes, validate_symbol_file
from bloch_wco.nevanlinna import polynomial_map_from_expr


def test_parse_document_builds_trees():
    node = {"op": "add", "args": [{"op": "const", "re": 0.5}, {"op": "mul", "args": [
        {"op": "const", "re": 0.3}, {"op": "powint", "n": 2, "args": [{"op": "z"}]}]}]}
    expr = parse_document(node)
    assert evaluate(expr, 0.5) == pytest.approx(0.575)
    assert parse_document({"op": "mobius", "re": 0.0, "im": 0.5}) == Mobius(0.5j)


@pytest.mark.parametrize("node, path", [
    ({"op": "bogus"}, "$.op"),
    ({"op": "add", "args": [{"op": "z"}]}, "$.args"),
    ({"op": "const", "re": "x"}, "$.re"),
    ({"op": "powint", "n": 1.5, "args": [{"op": "z"}]}, "$.n"),
    ({"op": "mobius", "re": 1.5}, "$"),
    ({"op": "exp", "args": [[]]}, "$.args[0]"),
])
def test_parse_errors_carry_json_path(node, path):
    with pytest.raises(ParseError) as info:
        parse_document(node)
    assert info.value.path == path


def test_malformed_json_reports_line_and_column(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "u": {"op": "z"},\n  "phi": \n}\n')
    with pytest.raises(ParseError) as info:
        load_document(path)
    assert info.value.line == 4
    assert info.value.column is not None


def test_missing_keys(tmp_path):
    path = tmp_path / "half.json"
    path.write_text(json.dumps({"u": {"op": "z"}}))
    with pytest.raises(ParseError, match="phi"):
        load_document(path)


def test_write_then_parse(tmp_path):
    u = Exp(Z) / 3
    phi = Compose(Mobius(0.3), Z / 2)
    path = write_symbol_file(u, phi, tmp_path / "nested" / "pair.json", label="written")
    pair = parse_symbol_file(path)
    assert pair.label == "written"
    z = np.array([0.1, -0.4j, 0.7 + 0.1j])
    assert np.allclose(evaluate(pair.u, z), evaluate(u, z))
    assert np.allclose(evaluate(pair.phi, z), evaluate(phi, z))
    assert serialize_expr(Z) == {"op": "z"}


def test_label_defaults_to_file_stem(tmp_path):
    path = tmp_path / "unnamed_pair.json"
    path.write_text(json.dumps({"u": {"op": "z"}, "phi": {"op": "z"}}))
    assert parse_symbol_file(path).label == "unnamed_pair"


def test_expanding_map_is_rejected(tmp_path):
    path = write_symbol_file(Z, 2 * Z, tmp_path / "expanding.json")
    with pytest.raises(NotSelfMap):
        parse_symbol_file(path)


def test_bundled_corpus_loads(corpus_dir):
    entries = load_corpus(corpus_dir)
    assert len(entries) >= 20
    assert all(entry.ok for entry in entries), [str(e.error) for e in entries if not e.ok]
    assert [e.path.name for e in entries] == sorted(e.path.name for e in entries)

    contact = [e for e in entries if e.pair.report.boundary_contact]
    assert 0 < len(contact) < len(entries)

    shifted = 0
    for entry in entries:
        try:
            phi = polynomial_map_from_expr(entry.pair.phi, validate=False)
        except UnsupportedSymbol:
            continue
        shifted += phi.at_zero != 0
    assert shifted >= 5


def test_bad_entries_are_kept_with_their_error(tmp_path, corpus_dir):
    bad = tmp_path / "bad.json"
    bad.write_text("not json")
    entries = load_entries([corpus_dir / "identity_one.json", bad])
    assert entries[0].ok and entries[0].label == "identity_one"
    assert not entries[1].ok
    assert entries[1].label == "bad"
    assert isinstance(entries[1].error, ParseError)

    with pytest.raises(FileNotFoundError):
        corpus_files(tmp_path / "missing")


def test_validate_symbol_file(tmp_path, corpus_dir):
    ok, error, count, metadata = validate_symbol_file(corpus_dir / "identity_one.json")
    assert ok and error is None
    assert count == 2
    assert metadata["boundary_contact"]
    assert metadata["phi_degree"] == 1

    ok, _, _, metadata = validate_symbol_file(corpus_dir / "conjugated_horocycle.json")
    assert ok and metadata["phi_degree"] is None

    empty = tmp_path / "empty.json"
    empty.write_text("")
    assert validate_symbol_file(empty)[:2] == (False, "File is empty (0 bytes)")
    ok, error, _, _ = validate_symbol_file(tmp_path / "nope.json")
    assert not ok and error.startswith("File does not exist")


def test_count_nodes():
    assert count_nodes(Z) == 1
    assert count_nodes(Exp(Z) / 3) == 4


def test_corpus_symbols_survive_serialization(corpus_dir):
    rng = np.random.default_rng(11)
    z = 0.9 * np.sqrt(rng.uniform(size=1000)) * np.exp(2j * np.pi * rng.uniform(size=1000))
    for path in corpus_files(corpus_dir):
        doc = load_document(path)
        for key in ("u", "phi"):
            expr = parse_document(doc[key])
            again = parse_document(json.loads(json.dumps(serialize_expr(expr))))
            assert again == expr, (path.name, key)
            diff = np.abs(np.broadcast_to(evaluate(again, z) - evaluate(expr, z), z.shape))
            assert diff.max() <= 1e-14, (path.name, key)
