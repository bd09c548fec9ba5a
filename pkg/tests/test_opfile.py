import numpy as np
import pytest

from lpbounds import opfile
from lpbounds.errors import ParseError, ValidationError
from lpbounds.randgen import RngStream, random_mixed_states, random_povm_elements


def test_format_entry():
    assert opfile.format_entry(0.1 - 2j) == "0.10000000000000001-2j"
    assert complex(opfile.format_entry(complex(np.pi, -np.e))) == complex(np.pi, -np.e)


def test_round_trip_exact():
    ops = random_povm_elements(4, 5, RngStream(1))
    back = opfile.loads(opfile.dumps("povm", ops))
    assert (back.dim, back.kind) == (4, "povm")
    assert np.array_equal(back.operators, ops)


def test_comments_and_blank_lines():
    text = "# header comment\n\ndim 1 count 2 kind povm  # trailing\nop 1\n0.5+0j\n# mid\nop 2\n0.5+0j\n"
    of = opfile.loads(text)
    np.testing.assert_array_equal(of.operators[:, 0, 0], [0.5, 0.5])


@pytest.mark.parametrize(
    "text, line, field",
    [
        ("", None, None),
        ("dim 2 count 1\n", 1, "header"),
        ("dim x count 1 kind povm\n", 1, "header"),
        ("dim 1 count 1 kind spin\n", 1, "kind"),
        ("dim 1 count 1 kind povm\nop 2\n1+0j\n", 2, "op"),
        ("dim 2 count 1 kind povm\nop 1\n1+0j 0+0j\n0+0j\n", 4, "row"),
        ("dim 1 count 1 kind povm\nop 1\nabc\n", 3, "col 1"),
        ("dim 1 count 1 kind povm\nop 1\nnan+0j\n", 3, "col 1"),
        ("dim 1 count 1 kind povm\nop 1\n", 2, "row"),
        ("dim 1 count 1 kind povm\nop 1\n1+0j\n1+0j\n", 4, None),
    ],
)
def test_parse_errors(text, line, field):
    with pytest.raises(ParseError) as exc:
        opfile.loads(text)
    assert exc.value.line == line
    assert exc.value.field == field
    if line is not None:
        assert str(exc.value).startswith(f"line {line}:")


def test_load_povm_reports_deviation(tmp_path):
    path = tmp_path / "bad.txt"
    opfile.write(path, "povm", np.array([np.diag([1.0, 0.0]), np.diag([0.0, 0.9])]))
    with pytest.raises(ValidationError) as exc:
        opfile.load_povm(path)
    assert "completeness deviation 1.000e-01" in str(exc.value)
    assert exc.value.report.completeness_deviation == pytest.approx(0.1)


def test_load_povm_non_hermitian(tmp_path):
    path = tmp_path / "nh.txt"
    opfile.write(path, "povm", np.array([[[1.0, 1.0], [0.0, 0.0]], [[0.0, -1.0], [0.0, 1.0]]]))
    with pytest.raises(ValidationError):
        opfile.load_povm(path)


def test_load_povm_rejects_state(tmp_path):
    path = tmp_path / "s.txt"
    opfile.write(path, "state", np.eye(2) / 2)
    with pytest.raises(ValidationError):
        opfile.load_povm(path)
    assert opfile.load_state(path).dim == 2


def test_load_state_round_trip(tmp_path):
    rho = random_mixed_states(4, 1, RngStream(9))[0]
    path = tmp_path / "rho.txt"
    opfile.write(path, "state", rho)
    back = opfile.load_state(path).matrix
    assert np.max(np.abs(back - rho)) <= 1e-15
    assert abs(np.trace(back) - 1) <= 1e-10


def test_unknown_kind_on_write():
    with pytest.raises(ValueError):
        opfile.dumps("spin", np.eye(2))
